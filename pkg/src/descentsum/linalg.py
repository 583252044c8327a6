"""Dense complex linear algebra helpers sized for small transfer matrices.

Matrices are numpy arrays of complex128, dense, capped at 64x64.  The two
hand-rolled routines are the matrix exponential (scaling and squaring with a
fixed-degree Taylor evaluation) and gamma(M) = sum_k M^k/(k+1)!, the integral
of exp(M t) over t in [0, 1], obtained from one block-matrix exponential.
Determinants and nullspaces delegate to LAPACK via numpy (LU with partial
pivoting, SVD).
"""

from __future__ import annotations

import numpy as np

MAX_DIM = 64
_EXP_NORM_LIMIT = 700.0  # exp overflows float64 shortly above e^709
_TAYLOR_DEGREE = 18

__all__ = ["mat_exp", "gamma", "det", "nullspace_vector"]


def _as_square(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if M.shape[0] > MAX_DIM:
        raise ValueError(f"dimension {M.shape[0]} exceeds the cap {MAX_DIM}")
    if not np.isfinite(M).all():
        raise ValueError("matrix has non-finite entries")
    return M


def mat_exp(M: np.ndarray) -> np.ndarray:
    """exp(M) by scaling-and-squaring with a degree-18 Taylor core.

    The input is scaled by 2^-s so its 1-norm is at most 1/2, the series is
    summed to degree 18 (giving ~1e-16 truncation at that norm), and the
    result is squared s times.  Raises OverflowError when exp(M) cannot be
    represented in float64.
    """
    M = _as_square(M)
    norm = float(np.linalg.norm(M, 1))
    if norm > _EXP_NORM_LIMIT:
        raise OverflowError(
            f"matrix 1-norm {norm:.3g} exceeds the exp overflow bound "
            f"{_EXP_NORM_LIMIT:.0f}"
        )
    s = 0 if norm <= 0.5 else int(np.ceil(np.log2(norm / 0.5)))
    X = M / (2.0**s)
    d = M.shape[0]
    result = np.eye(d, dtype=complex)
    term = np.eye(d, dtype=complex)
    for k in range(1, _TAYLOR_DEGREE + 1):
        term = term @ X / k
        result = result + term
    for _ in range(s):
        result = result @ result
    return result


def gamma(M: np.ndarray) -> np.ndarray:
    """gamma(M) = sum_k M^k / (k+1)!, i.e. the integral of exp(M t) on [0, 1].

    Computed as the top-right block of exp([[M, I], [0, 0]]), which is exact
    up to the accuracy of mat_exp and needs no invertibility assumption.
    Satisfies M @ gamma(M) = exp(M) - I.
    """
    M = _as_square(M)
    d = M.shape[0]
    block = np.zeros((2 * d, 2 * d), dtype=complex)
    block[:d, :d] = M
    block[:d, d:] = np.eye(d)
    return mat_exp(block)[:d, d:]


def det(M: np.ndarray) -> complex:
    """Determinant via LU with partial pivoting."""
    return complex(np.linalg.det(_as_square(M)))


def nullspace_vector(M: np.ndarray, tol: float | None = None) -> np.ndarray:
    """A unit vector spanning the (numerical) nullspace of M.

    The smallest singular value must fall below tol (default 1e-8 * ||M||),
    otherwise ValueError reports the gap.  The returned right singular vector
    has unit 2-norm and its largest-modulus entry rotated to be real positive,
    which pins the sign/phase deterministically.
    """
    M = _as_square(M)
    if tol is None:
        tol = 1e-8 * max(1.0, float(np.linalg.norm(M, 1)))
    _, sing, vh = np.linalg.svd(M)
    smallest = float(sing[-1]) if len(sing) else 0.0
    if smallest >= tol:
        raise ValueError(
            f"matrix is not singular at tolerance {tol:.3g} "
            f"(smallest singular value {smallest:.3g})"
        )
    v = vh[-1].conj()
    j = int(np.argmax(np.abs(v)))
    phase = v[j] / abs(v[j])
    v = v / phase
    return v / np.linalg.norm(v)
