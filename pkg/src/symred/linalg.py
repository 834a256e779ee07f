"""Small numerical linear algebra helpers shared across the package.

Everything here is a thin, deterministic wrapper around SVD-based routines:
null spaces with a relative rank threshold, orthonormal range bases, and
principal-angle comparison of subspaces.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

#: Default relative singular-value threshold for rank decisions.
RANK_RCOND = 1e-8


def null_space(a: np.ndarray, rcond: float = RANK_RCOND, atol: float = 0.0) -> np.ndarray:
    """Orthonormal basis (columns) of the null space of ``a``.

    Singular values below ``max(rcond * sigma_max, atol)`` count as zero; the
    absolute floor matters for matrix products that are zero in exact
    arithmetic but carry rounding noise, where the relative threshold alone
    would compare the noise against itself.  A matrix with no rows (or
    identically zero) has the full space as null space.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    n = a.shape[1]
    if a.shape[0] == 0 or not np.any(a):
        return np.eye(n)
    _, s, vh = np.linalg.svd(a)
    tol = max(rcond * s[0], atol)
    rank = int(np.sum(s > tol))
    return vh[rank:].conj().T


def range_space(a: np.ndarray, rcond: float = RANK_RCOND) -> np.ndarray:
    """Orthonormal basis (columns) of the column space of ``a``."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.shape[1] == 0 or not np.any(a):
        return np.zeros((a.shape[0], 0))
    u, s, _ = np.linalg.svd(a)
    tol = rcond * s[0]
    rank = int(np.sum(s > tol))
    return u[:, :rank]


def orthonormalize(a: np.ndarray, rcond: float = RANK_RCOND) -> np.ndarray:
    """Orthonormal basis spanning the columns of ``a`` (alias of range_space)."""
    return range_space(a, rcond)


def principal_angle_defect(u: np.ndarray, v: np.ndarray) -> float:
    """Largest principal angle between two subspaces given by orthonormal bases.

    Equal subspaces give 0.  Subspaces of different dimension cannot be equal,
    so the defect is reported as pi/2.  Two zero-dimensional subspaces are
    equal by convention (defect 0).
    """
    u = np.atleast_2d(np.asarray(u, dtype=float))
    v = np.atleast_2d(np.asarray(v, dtype=float))
    du = u.shape[1]
    dv = v.shape[1]
    if du == 0 and dv == 0:
        return 0.0
    if du != dv:
        return float(np.pi / 2)
    angles = scipy.linalg.subspace_angles(u, v)
    return float(np.max(angles)) if angles.size else 0.0


def min_norm_lstsq(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Minimum-norm least-squares solution of ``a x = b``."""
    x, *_ = np.linalg.lstsq(np.asarray(a, dtype=float), np.asarray(b, dtype=float), rcond=None)
    return x


def rank(a: np.ndarray, rcond: float = RANK_RCOND) -> int:
    """Numerical rank with the package-wide relative threshold."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.size == 0 or not np.any(a):
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    return int(np.sum(s > rcond * s[0]))
