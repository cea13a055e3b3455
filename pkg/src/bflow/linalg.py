"""Direct solver for periodic (cyclic) tridiagonal systems."""
import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from .errors import LinearSolveError


def solve_cyclic_tridiagonal(lower, diag, upper, rhs):
    """Solve ``lower[j] x[j-1] + diag[j] x[j] + upper[j] x[j+1] = rhs[j]`` with periodic indices.

    The corner entries ``lower[0]`` and ``upper[-1]`` are removed by a rank-one
    Sherman-Morrison correction so that only a plain banded solve is needed.
    """
    lower = np.asarray(lower, dtype=float)
    diag = np.asarray(diag, dtype=float)
    upper = np.asarray(upper, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    n = diag.shape[0]
    if n < 3:
        raise LinearSolveError("cyclic system needs at least 3 unknowns")
    gamma = -diag[0] if diag[0] != 0 else -1.0
    d = diag.copy()
    d[0] -= gamma
    d[-1] -= lower[0] * upper[-1] / gamma
    band = np.zeros((3, n))
    band[0, 1:] = upper[:-1]
    band[1] = d
    band[2, :-1] = lower[1:]
    corr = np.zeros(n)
    corr[0] = gamma
    corr[-1] = upper[-1]
    try:
        sol = solve_banded((1, 1), band, np.column_stack([rhs, corr]), check_finite=False)
    except (LinAlgError, ValueError) as exc:
        raise LinearSolveError(f"banded solve failed: {exc}") from exc
    y, z = sol[:, 0], sol[:, 1]
    scale = lower[0] / gamma
    denom = 1.0 + z[0] + scale * z[-1]
    # cancellation in the denominator means the cyclic matrix is (numerically) singular
    if not np.isfinite(denom) or abs(denom) <= 1e-12 * (1.0 + abs(z[0]) + abs(scale * z[-1])):
        raise LinearSolveError("Sherman-Morrison correction is singular")
    x = y - ((y[0] + scale * y[-1]) / denom) * z
    if not np.all(np.isfinite(x)):
        raise LinearSolveError("cyclic tridiagonal solve produced non-finite values")
    return x
