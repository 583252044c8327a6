"""Transfer matrices and the spectrum of the weighted descent operator.

A scheme with window length m induces two d x d matrices (d = 2^(m-1), rows
and columns indexed by the words of length m - 1 in lexicographic order):

    A[uy, au] = wt(auy)      B[uy, bu] = wt(buy)

with all other entries zero (for m = 1 they are the 1x1 matrices wt(a) and
wt(b)).  The nonzero eigenvalues lambda of the underlying integral operator
are exactly the nonzero roots of

    det P(lambda) = 0,    P(lambda) = -lambda I + B gamma((A - B)/lambda),

and the eigenfunctions are built from vectors in the nullspace of P(lambda).
An eigenvalue is certified simple when B exp((A-B)/lambda) c is nonzero for
the nullspace vector c.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .linalg import det, gamma, mat_exp, nullspace_vector
from .words import WeightScheme, all_words

REAL_SCAN_POINTS = 2000
COMPLEX_GRID = 60
DEDUP_TOL = 1e-8
_SIMPLE_TOL = 1e-8

__all__ = [
    "TransferPair",
    "SpectralPoint",
    "build_transfer",
    "det_P",
    "find_real_roots",
    "find_complex_roots",
    "is_simple",
    "det_M_product_check",
]


@dataclass(frozen=True)
class TransferPair:
    """The pair (A, B) for a scheme, with the index order recorded."""

    m: int
    A: np.ndarray
    B: np.ndarray

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    @property
    def index_words(self) -> list[str]:
        return all_words(self.m - 1)

    def overflow_floor(self) -> float:
        """Smallest |lambda| for which (A-B)/lambda stays below the exp bound."""
        norm = float(np.linalg.norm(self.A - self.B, 1))
        return norm / 700.0


@dataclass(frozen=True)
class SpectralPoint:
    """One located eigenvalue with its certificate data."""

    lam: complex
    vector: np.ndarray
    simple: bool
    residual: float


def build_transfer(scheme: WeightScheme) -> TransferPair:
    """Assemble the transfer pair of a scheme."""
    m = scheme.m
    d = 2 ** (m - 1)
    A = np.zeros((d, d), dtype=complex)
    B = np.zeros((d, d), dtype=complex)
    if m == 1:
        A[0, 0] = float(scheme.wt["a"])
        B[0, 0] = float(scheme.wt["b"])
    else:
        index = {w: i for i, w in enumerate(all_words(m - 1))}
        for w in all_words(m - 1):
            A[index[w], index["a" + w[:-1]]] = float(scheme.wt["a" + w])
            B[index[w], index["b" + w[:-1]]] = float(scheme.wt["b" + w])
    return TransferPair(m=m, A=A, B=B)


def det_P(pair: TransferPair, lam: complex) -> complex:
    """det(-lambda I + B gamma((A-B)/lambda)).

    Refuses |lambda| below the overflow floor ||A-B|| / 700, where the matrix
    exponential inside gamma would overflow float64.
    """
    floor = pair.overflow_floor()
    if abs(lam) <= floor:
        raise ValueError(
            f"|lambda| = {abs(lam):.3g} is at or below the overflow floor "
            f"{floor:.3g} for this scheme"
        )
    d = pair.dim
    P = -lam * np.eye(d, dtype=complex) + pair.B @ gamma((pair.A - pair.B) / lam)
    return det(P)


def _P_matrix(pair: TransferPair, lam: complex) -> np.ndarray:
    d = pair.dim
    return -lam * np.eye(d, dtype=complex) + pair.B @ gamma((pair.A - pair.B) / lam)


def _residual_scale(pair: TransferPair, lam: complex) -> float:
    return max(1.0, abs(lam) ** pair.dim)


def _make_point(pair: TransferPair, lam: complex) -> SpectralPoint:
    P = _P_matrix(pair, lam)
    vector = nullspace_vector(P)
    return SpectralPoint(
        lam=lam,
        vector=vector,
        simple=is_simple(pair, lam, vector),
        residual=abs(det(P)),
    )


def _sort_points(points: list[SpectralPoint]) -> list[SpectralPoint]:
    return sorted(points, key=lambda p: (-abs(p.lam), np.angle(p.lam)))


def is_simple(pair: TransferPair, lam: complex, vector: np.ndarray) -> bool:
    """Certificate that the root is simple: B exp((A-B)/lambda) c != 0."""
    image = pair.B @ mat_exp((pair.A - pair.B) / lam) @ vector
    return bool(np.linalg.norm(image) > _SIMPLE_TOL * np.linalg.norm(vector))


def find_real_roots(
    pair: TransferPair,
    lo: float,
    hi: float,
    include_negative: bool = False,
) -> list[SpectralPoint]:
    """Real roots of det_P on [lo, hi], 0 < lo < hi.

    Scans a uniform grid of REAL_SCAN_POINTS points for sign changes of the
    (real) determinant and polishes each bracket by bisection followed by
    secant steps, to steps below 1e-13.  With include_negative the mirror
    interval [-hi, -lo] is scanned as well.  A lo below the overflow floor is
    clipped (with a warning).
    """
    if not (0 < lo < hi):
        raise ValueError("need 0 < lo < hi")
    floor = pair.overflow_floor()
    if lo <= floor:
        lo = floor * 1.01 + 1e-12
        warnings.warn(
            f"scan lower bound raised to {lo:.3g} (overflow floor of the scheme)",
            stacklevel=2,
        )
        if lo >= hi:
            return []
    intervals = [(lo, hi)]
    if include_negative:
        intervals.append((-hi, -lo))
    roots: list[float] = []
    for a, b in intervals:
        roots.extend(_scan_interval(pair, a, b))
    deduped: list[float] = []
    for r in sorted(roots):
        if not deduped or abs(r - deduped[-1]) > DEDUP_TOL:
            deduped.append(r)
    return _sort_points([_make_point(pair, complex(r)) for r in deduped])


def _scan_interval(pair: TransferPair, a: float, b: float) -> list[float]:
    xs = np.linspace(a, b, REAL_SCAN_POINTS)
    vals = [det_P(pair, complex(x)).real for x in xs]
    roots = []
    for i in range(len(xs) - 1):
        va, vb = vals[i], vals[i + 1]
        if va == 0.0:
            roots.append(float(xs[i]))
        elif va * vb < 0:
            roots.append(_polish_real(pair, float(xs[i]), float(xs[i + 1]), va, vb))
    if vals[-1] == 0.0:
        roots.append(float(xs[-1]))
    return roots


def _polish_real(
    pair: TransferPair, a: float, b: float, fa: float, fb: float
) -> float:
    for _ in range(80):
        mid = 0.5 * (a + b)
        if b - a < 1e-13 * max(1.0, abs(mid)):
            break
        fm = det_P(pair, complex(mid)).real
        if fm == 0.0:
            return mid
        if fa * fm < 0:
            b, fb = mid, fm
        else:
            a, fa = mid, fm
    # secant refinement inside the final bracket
    x0, x1, f0, f1 = a, b, fa, fb
    for _ in range(4):
        if f1 == f0:
            break
        x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
        if not (min(a, b) - 1e-12 <= x2 <= max(a, b) + 1e-12):
            break
        x0, f0, x1, f1 = x1, f1, x2, det_P(pair, complex(x2)).real
    return x1


def find_complex_roots(
    pair: TransferPair,
    region: tuple[float, float, float, float],
    exclude: float = 0.05,
    grid: int = COMPLEX_GRID,
) -> list[SpectralPoint]:
    """Roots of det_P inside a rectangle of the complex plane.

    ``region`` is (re_lo, re_hi, im_lo, im_hi).  |det_P| is evaluated on a
    grid x grid lattice; Newton iteration (with a numerically differenced
    derivative) is started from every local minimum of |det_P| on the
    lattice.  Converged roots are deduplicated at 1e-8, roots with
    |lambda| < exclude are dropped, and for every non-real root the complex
    conjugate is verified and reported as well, even if the rectangle is
    one-sided.
    """
    re_lo, re_hi, im_lo, im_hi = region
    if not (re_lo < re_hi and im_lo < im_hi):
        raise ValueError("empty region")
    exclude = max(exclude, pair.overflow_floor() * 1.01 + 1e-12)
    res = np.linspace(re_lo, re_hi, grid)
    ims = np.linspace(im_lo, im_hi, grid)
    mags = np.full((grid, grid), np.inf)
    for i, x in enumerate(res):
        for j, y in enumerate(ims):
            z = complex(x, y)
            if abs(z) < exclude:
                continue
            mags[i, j] = abs(det_P(pair, z))
    seeds = []
    for i in range(grid):
        for j in range(grid):
            v = mags[i, j]
            if not np.isfinite(v):
                continue
            neighbors = mags[
                max(0, i - 1) : i + 2, max(0, j - 1) : j + 2
            ]
            if v <= neighbors.min():
                seeds.append((v, complex(res[i], ims[j])))
    seeds.sort(key=lambda t: (t[0], t[1].real, t[1].imag))
    roots: list[complex] = []
    for _, seed in seeds[:200]:
        root = _newton(pair, seed, exclude)
        if root is None or abs(root) < exclude:
            continue
        if not (
            re_lo - 1e-9 <= root.real <= re_hi + 1e-9
            and im_lo - 1e-9 <= root.imag <= im_hi + 1e-9
        ):
            continue
        if all(abs(root - r) > DEDUP_TOL for r in roots):
            roots.append(root)
    # report conjugates of non-real roots even when the box is one-sided
    for root in list(roots):
        if abs(root.imag) > DEDUP_TOL:
            conj = root.conjugate()
            if all(abs(conj - r) > DEDUP_TOL for r in roots):
                if abs(det_P(pair, conj)) <= 1e-8 * _residual_scale(pair, conj):
                    roots.append(conj)
    return _sort_points([_make_point(pair, r) for r in roots])


def _newton(
    pair: TransferPair, z: complex, exclude: float, max_iter: int = 60
) -> complex | None:
    f = lambda w: det_P(pair, w)
    for _ in range(max_iter):
        if abs(z) < 0.5 * exclude:
            return None
        h = 1e-6 * max(1.0, abs(z))
        try:
            fz = f(z)
            deriv = (f(z + h) - f(z - h)) / (2 * h)
        except ValueError:  # wandered below the overflow floor
            return None
        if deriv == 0:
            return None
        step = fz / deriv
        z = z - step
        if abs(step) <= 1e-12 * max(1.0, abs(z)):
            if abs(f(z)) <= 1e-8 * _residual_scale(pair, z):
                return z
            return None
    return None


def det_M_product_check(pair: TransferPair, lam: complex) -> complex:
    """det(-A + B exp((A-B)/lambda)), the equivalent form for invertible A-B.

    Vanishes at the same nonzero lambda as det_P when A - B is invertible;
    raises ValueError when A - B is singular and the form is not available.
    """
    M = pair.A - pair.B
    sing = np.linalg.svd(M, compute_uv=False)
    if float(sing[-1]) < 1e-12 * max(1.0, float(sing[0])):
        raise ValueError("A - B is singular; the product form is unavailable")
    return det(-pair.A + pair.B @ mat_exp(M / lam))
