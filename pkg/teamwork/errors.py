class EnumerationLimitError(ValueError):
    """Exact enumeration of the history tree is refused."""


class InvalidDistributionError(ValueError):
    """A policy emitted something that is not a probability distribution."""


class UnknownHistoryError(KeyError):
    """A tabular policy was queried outside its domain."""

    def __str__(self):
        return str(self.args[0]) if self.args else 'unknown history'


class DivergenceError(RuntimeError):
    """Solver aborted; the partial trace is attached."""

    def __init__(self, msg, trace=None):
        super().__init__(msg)
        self.trace = trace


class EpsilonNetError(ValueError):
    """A test scenario has no training scenario within epsilon."""


class FormatError(ValueError):
    """File or format error, prefixed with ``path:line:col``."""

    def __init__(self, msg, path=None, line=None, col=None):
        self.path = path
        self.line = line
        self.col = col
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(str(line))
            if col is not None:
                where.append(str(col))
        if where:
            msg = ':'.join(where) + ': ' + msg
        super().__init__(msg)
