"""Independent brute-force oracles shared by the test suite.

These deliberately avoid the library's own numerical routines.
"""

import math

import numpy as np


def eig2x2(m) -> np.ndarray:
    """Eigenvalues of a symmetric 2x2 from the quadratic formula, descending."""
    a, b = float(m[0][0]), float(m[0][1])
    d = float(m[1][1])
    disc = math.sqrt((a - d) ** 2 + 4.0 * b * b)
    return np.array([(a + d + disc) / 2.0, (a + d - disc) / 2.0])


def eig3x3(m) -> np.ndarray:
    """Eigenvalues of a symmetric 3x3 via the trigonometric cubic solution."""
    m = np.asarray(m, dtype=np.float64)
    p1 = m[0, 1] ** 2 + m[0, 2] ** 2 + m[1, 2] ** 2
    if p1 == 0.0:
        return np.sort(np.diag(m))[::-1]
    q = float(np.trace(m)) / 3.0
    p2 = (m[0, 0] - q) ** 2 + (m[1, 1] - q) ** 2 + (m[2, 2] - q) ** 2 + 2.0 * p1
    p = math.sqrt(p2 / 6.0)
    b = (m - q * np.eye(3)) / p
    det_b = (
        b[0, 0] * (b[1, 1] * b[2, 2] - b[1, 2] * b[2, 1])
        - b[0, 1] * (b[1, 0] * b[2, 2] - b[1, 2] * b[2, 0])
        + b[0, 2] * (b[1, 0] * b[2, 1] - b[1, 1] * b[2, 0])
    )
    r = min(1.0, max(-1.0, det_b / 2.0))
    phi = math.acos(r) / 3.0
    lam1 = q + 2.0 * p * math.cos(phi)
    lam3 = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    lam2 = 3.0 * q - lam1 - lam3
    return np.sort(np.array([lam1, lam2, lam3]))[::-1]


def standardize_then_dot(data, point, component) -> float:
    """Explicit z-score-then-project oracle for PCA projections."""
    data = np.asarray(data, dtype=np.float64)
    means = data.mean(axis=0)
    stds = data.std(axis=0)
    stds = np.where(stds > 0, stds, 1.0)
    z = (np.asarray(point, dtype=np.float64) - means) / stds
    return float(np.dot(component, z))
