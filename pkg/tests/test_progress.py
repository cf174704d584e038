import logging

import pytest

from teamwork.progress import LogReporter, Progress


def test_progress():
    seen = []
    p = Progress(max=4, name='mu')
    p.updated.connect(lambda sender: seen.append(sender.index))
    with p:
        p.next()
        p.next(3)
    assert seen == [1, 4]
    assert p.progress == 1.0 and p.remaining == 0
    assert p.status == 'finished'
    assert repr(p).startswith('mu (4/4) 100%')
    with pytest.raises(ValueError):
        p.next(0)


def test_failed_progress():
    p = Progress(max=2)
    with pytest.raises(RuntimeError):
        with p:
            raise RuntimeError('boom')
    assert p.status == 'failure'


def test_log_reporter(caplog):
    p = Progress(max=10, name='pp')
    reporter = LogReporter(every=5)
    reporter.listen(p)
    with caplog.at_level(logging.INFO, logger='teamwork.progress'):
        with p:
            for _ in range(10):
                p.next()
    lines = [r.getMessage() for r in caplog.records]
    assert len(lines) == 3
    assert lines[0].startswith('pp (5/10)')
    assert lines[-1].endswith('finished')
