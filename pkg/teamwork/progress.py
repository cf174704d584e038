from __future__ import annotations

import logging
from collections import deque
from datetime import timedelta
from time import monotonic

from blinker import Signal

log = logging.getLogger(__name__)


class Progress:
    """Iteration counter that publishes ``updated`` and ``finished``
    signals."""
    sma_window = 10  # Simple Moving Average window

    def __init__(self, *, max=10, name='run'):
        self.name = name
        self.start_ts = monotonic()
        self._ts = self.start_ts
        self._xput = deque(maxlen=self.sma_window)
        self._max = max
        self.index = 0
        self.updated = Signal()
        self.finished = Signal()
        self.status = "running"

    @property
    def progress(self):
        if self.max <= 0:
            return 0.0
        return min(1.0, self.index / self.max)

    @property
    def remaining(self):
        return max(self.max - self.index, 0)

    @property
    def percent(self):
        return self.progress * 100

    @property
    def elapsed(self):
        if self.status != "running":
            return self._ts - self.start_ts
        return monotonic() - self.start_ts

    @property
    def eta(self):
        if self.status != "running" or not self._xput:
            return 0
        avg = sum(self._xput) / len(self._xput)
        return avg * self.remaining

    @property
    def max(self):
        return self._max

    @max.setter
    def max(self, x):
        self._max = x
        self.updated.send(self)

    def next(self, n=1):
        if n <= 0:
            raise ValueError('progress only moves forward')
        now = monotonic()
        self._xput.append((now - self._ts) / n)
        self._ts = now
        self.index += n
        self.updated.send(self)

    def finish(self, success=True):
        self._ts = monotonic()
        self.status = "finished" if success else "failure"
        self.finished.send(self, success=success)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.finish(exc_type is None)

    def __repr__(self):
        return (f"{self.name} ({self.index}/{self.max}) {self.percent:.0f}%"
                f" Used time: {timedelta(seconds=round(self.elapsed))}"
                f" Remaining time: {timedelta(seconds=round(self.eta))}"
                f" {self.status}")


class LogReporter():
    """Log a progress line every ``every`` iterations."""

    def __init__(self, every=1000, level=logging.INFO):
        self.every = max(1, int(every))
        self.level = level

    def listen(self, progress: Progress):
        self.progress = progress
        progress.updated.connect(self.update)
        progress.finished.connect(self.finish)

    def update(self, sender: Progress):
        if sender.index and sender.index % self.every == 0:
            log.log(self.level, '%r', sender)

    def finish(self, sender: Progress, success: bool = True):
        log.log(self.level if success else logging.ERROR, '%r', sender)
        self.progress.updated.disconnect(self.update)
        self.progress.finished.disconnect(self.finish)
