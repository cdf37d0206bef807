"""Dense symmetric linear algebra used by the embedding models.

The eigensolver is a cyclic Jacobi method: each sweep visits every
off-diagonal pair exactly once, following a round-robin ordering whose
rounds consist of disjoint rotation planes.  Rotations within a round
commute, so they are applied in one vectorized step, which keeps the
solver fast enough for kernel matrices with a few hundred rows while
staying fully deterministic.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInput, NumericalFailure

DEFAULT_TOL = 1e-12
MAX_SWEEPS = 100


def as_matrix(data, name: str = "data") -> np.ndarray:
    """Coerce to a 2-D float64 array, rejecting empty or non-finite input."""
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise InvalidInput(f"{name} must be 2-dimensional, got ndim={arr.ndim}")
    if arr.size == 0:
        raise InvalidInput(f"{name} is empty")
    if not np.isfinite(arr).all():
        raise InvalidInput(f"{name} contains non-finite entries")
    return arr


def covariance_matrix(data) -> np.ndarray:
    """Sample covariance (ddof=1) of the columns of ``data``.

    Returns an M x M symmetric matrix for an N x M input with N >= 2.
    """
    arr = as_matrix(data)
    n = arr.shape[0]
    if n < 2:
        raise InvalidInput(f"covariance needs at least 2 rows, got {n}")
    centered = arr - arr.mean(axis=0)
    cov = centered.T @ centered / (n - 1)
    return (cov + cov.T) / 2.0


def off_diagonal_norm(m: np.ndarray) -> float:
    """Frobenius norm of the off-diagonal part.

    Computed on a zero-diagonal copy; the subtract-the-diagonal shortcut
    cancels catastrophically once the matrix is nearly diagonal.
    """
    off = np.array(m, dtype=np.float64, copy=True)
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


def _round_robin_rounds(n: int) -> list[np.ndarray]:
    # Circle-method tournament: n-1 rounds of disjoint index pairs that
    # together cover every (i, j), i < j, exactly once.
    players = list(range(n)) + ([-1] if n % 2 else [])
    size = len(players)
    rounds = []
    for _ in range(size - 1):
        pairs = []
        for i in range(size // 2):
            a, b = players[i], players[size - 1 - i]
            if a >= 0 and b >= 0:
                pairs.append((min(a, b), max(a, b)))
        rounds.append(np.asarray(pairs, dtype=np.intp))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def sym_eigen(
    m,
    tol: float = DEFAULT_TOL,
    max_sweeps: int = MAX_SWEEPS,
) -> tuple[np.ndarray, np.ndarray]:
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi.

    Parameters
    ----------
    m : array-like
        Square matrix, symmetric to 1e-9 (relative to its largest entry).
    tol : float
        Convergence threshold on the off-diagonal Frobenius norm,
        relative to the total Frobenius norm.
    max_sweeps : int
        Iteration cap; exceeding it raises :class:`NumericalFailure`.

    Returns
    -------
    (eigenvalues, eigenvectors)
        Eigenvalues sorted descending; eigenvectors as matching
        orthonormal columns.
    """
    a = as_matrix(m, "matrix")
    n, ncols = a.shape
    if n != ncols:
        raise InvalidInput(f"matrix must be square, got {n}x{ncols}")
    scale = max(1.0, float(np.abs(a).max()))
    if float(np.abs(a - a.T).max()) > 1e-9 * scale:
        raise InvalidInput("matrix is not symmetric to 1e-9")

    a = (a + a.T) / 2.0
    if n == 1:
        return a[0].copy(), np.ones((1, 1))

    vecs = np.eye(n)
    norm = float(np.linalg.norm(a))
    if norm == 0.0:
        return np.zeros(n), vecs
    rounds = _round_robin_rounds(n)

    # Rotations below this size cannot push the off-diagonal norm above
    # tol * norm even if every pair sits at the threshold, so skipping
    # them is free accuracy-wise and saves most of the late-sweep work.
    skip_below = max(tol * norm / (2.0 * n), 1e-300)
    for _ in range(max_sweeps):
        if off_diagonal_norm(a) <= tol * norm:
            break
        _jacobi_sweep(a, vecs, rounds, skip_below)
    else:
        if off_diagonal_norm(a) > tol * norm:
            raise NumericalFailure(
                f"Jacobi did not converge in {max_sweeps} sweeps "
                f"(off-diagonal norm {off_diagonal_norm(a):.3e})"
            )

    eigenvalues = np.diag(a).copy()
    order = np.argsort(-eigenvalues, kind="stable")
    return eigenvalues[order], vecs[:, order]


def _jacobi_sweep(
    a: np.ndarray,
    vecs: np.ndarray,
    rounds: list[np.ndarray],
    skip_below: float,
) -> None:
    for pairs in rounds:
        p, q = pairs[:, 0], pairs[:, 1]
        apq = a[p, q]
        active = np.abs(apq) > skip_below
        if not active.any():
            continue
        p, q, apq = p[active], q[active], apq[active]
        theta = (a[q, q] - a[p, p]) / (2.0 * apq)
        sign = np.where(theta >= 0.0, 1.0, -1.0)
        t = sign / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
        c = 1.0 / np.sqrt(t * t + 1.0)
        s = t * c

        rows_p, rows_q = a[p, :].copy(), a[q, :].copy()
        a[p, :] = c[:, None] * rows_p - s[:, None] * rows_q
        a[q, :] = s[:, None] * rows_p + c[:, None] * rows_q
        cols_p, cols_q = a[:, p].copy(), a[:, q].copy()
        a[:, p] = cols_p * c - cols_q * s
        a[:, q] = cols_p * s + cols_q * c
        a[p, q] = 0.0
        a[q, p] = 0.0

        vp, vq = vecs[:, p].copy(), vecs[:, q].copy()
        vecs[:, p] = vp * c - vq * s
        vecs[:, q] = vp * s + vq * c


def leading_eigenpair(
    m,
    tol: float = 1e-11,
    max_iter: int = 20000,
) -> tuple[float, np.ndarray]:
    """Largest eigenpair of a symmetric positive semidefinite matrix.

    Deterministic power iteration; O(n^2) per step, so it stays cheap for
    the few-hundred-row kernel matrices where a full Jacobi decomposition
    would dominate the runtime.  Convergence is declared when the
    eigen-residual ``|m v - lambda v|`` drops below ``tol * lambda``.
    """
    a = as_matrix(m, "matrix")
    n, ncols = a.shape
    if n != ncols:
        raise InvalidInput(f"matrix must be square, got {n}x{ncols}")
    if n == 1:
        return float(a[0, 0]), np.ones(1)

    # Start from the column with the largest diagonal entry; restart from
    # the next candidates if the first start is (anti)symmetric dead weight.
    starts = np.argsort(-np.diag(a), kind="stable")[:3]
    last_exc: NumericalFailure | None = None
    for start in starts:
        v = a[:, start].copy()
        nv = float(np.linalg.norm(v))
        if nv == 0.0:
            return 0.0, _unit_vector(n, int(start))
        v /= nv
        lam = 0.0
        for _ in range(max_iter):
            w = a @ v
            lam = float(v @ w)
            resid = float(np.linalg.norm(w - lam * v))
            if resid <= tol * max(abs(lam), np.finfo(float).tiny):
                return lam, v
            nw = float(np.linalg.norm(w))
            if nw == 0.0:
                return 0.0, v
            v = w / nw
        last_exc = NumericalFailure(
            f"power iteration stalled after {max_iter} steps "
            f"(residual {resid:.3e}, eigenvalue {lam:.3e})"
        )
    raise last_exc


def _unit_vector(n: int, index: int) -> np.ndarray:
    v = np.zeros(n)
    v[index] = 1.0
    return v
