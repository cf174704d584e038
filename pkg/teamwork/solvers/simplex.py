import numpy as np


def project_simplex(v: np.ndarray, z: float = 1.0) -> np.ndarray:
    """Euclidean projection onto ``{x >= 0, sum(x) = z}``.

    Sort the entries, find the largest ``rho`` with
    ``u_rho - (cumsum(u)_rho - z) / rho > 0`` and shift by that threshold.

    Examples:
        >>> project_simplex(np.array([0.5, 0.7]))
        array([0.4, 0.6])
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError('project_simplex needs a non-empty vector')
    if not np.all(np.isfinite(v)):
        raise ValueError('project_simplex needs finite entries')
    u = np.sort(v)[::-1]
    cssv = np.cumsum(u) - z
    ind = np.arange(1, v.size + 1)
    rho = np.count_nonzero(u - cssv / ind > 0)
    theta = cssv[rho - 1] / rho
    return np.maximum(v - theta, 0)
