"""Piecewise exponential-polynomial calculus on descent cells of the cube.

The unit cube [0,1]^m splits into 2^(m-1) full-dimensional cells P_u, one per
{a,b}-word u of length m - 1: inside P_u consecutive coordinates satisfy
x_i <= x_{i+1} exactly when u_i = a.  The weighted descent operator

    T(f)(x_1, ..., x_m) = integral_0^1 wt(word(t, x_1, ..., x_m)) f(t, x_1, ..., x_{m-1}) dt

maps functions that are, on each cell, a function of the first coordinate
alone to functions of the same shape.  Everything here is represented by
ExpPoly -- finite sums c * x^k * exp(mu x) -- so antiderivatives, products,
the end-point reflection J, and integrals over the cells are all closed form.
Coefficients stay exact rationals when the inputs are rational polynomials
(the operator-iteration route relies on that); otherwise they are complex.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Callable, Iterable, Mapping, Sequence

import cmath

import numpy as np

from .exact import WeightedCount, _check_refinement
from .spectral import TransferPair, build_transfer
from .words import WeightScheme, all_words, symmetry_defect

MU_MERGE_TOL = 1e-9
_JORDAN_TOL = 1e-8
# rounding splits a defective eigenvalue by ~eps^(1/blocksize), far above
# eps itself; clustering must sit above that, kernel classification below
_CLUSTER_TOL = 1e-4

__all__ = [
    "ExpPoly",
    "PiecewiseFn",
    "eigenfunction_pieces",
    "apply_J",
    "polytope_integral",
    "inner_products",
    "adjoint_eigenfunction",
    "asymptotic_constant",
    "scheme_constant",
    "predict_alpha",
    "apply_operator",
    "alpha_by_operator_iteration",
    "kappa_piecewise",
    "mu_piecewise",
    "letter_indicator",
    "constant_piecewise",
]

_EXACT_TYPES = (int, Fraction)


def _is_exact_scalar(v) -> bool:
    return isinstance(v, _EXACT_TYPES)


def _div_by_int(c, d: int):
    if isinstance(c, int):
        return Fraction(c, d)
    return c / d


def _exp_of(mu):
    if mu == 0:
        return 1
    return cmath.exp(complex(mu))


class ExpPoly:
    """A finite sum of terms c * x^k * exp(mu x), canonically normalized.

    Terms with equal (k, mu) are merged, zero coefficients dropped, and
    inexact exponents closer than 1e-9 are identified.  Coefficients and
    exponents are exact (int/Fraction) or inexact (float/complex); mixing the
    two coerces the whole polynomial to inexact.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[tuple] = ()) -> None:
        merged: dict = {}
        for c, k, mu in terms:
            if k < 0:
                raise ValueError("degree must be nonnegative")
            if not _is_exact_scalar(mu) and abs(complex(mu)) <= MU_MERGE_TOL:
                mu = 0  # keep near-zero exponents on the polynomial branch
            key = (k, mu)
            merged[key] = merged.get(key, 0) + c
        # identify inexact exponents that agree to MU_MERGE_TOL
        exact_keys = [key for key in merged if _is_exact_scalar(key[1])]
        inexact_keys = [key for key in merged if not _is_exact_scalar(key[1])]
        inexact_keys.sort(
            key=lambda key: (key[0], complex(key[1]).real, complex(key[1]).imag)
        )
        out: dict = {key: merged[key] for key in exact_keys}
        rep_for_degree: dict[int, list] = {}
        for k, mu in inexact_keys:
            reps = rep_for_degree.setdefault(k, [])
            z = complex(mu)
            for rep in reps:
                if abs(z - rep) <= MU_MERGE_TOL:
                    out[(k, rep)] = out.get((k, rep), 0) + merged[(k, mu)]
                    break
            else:
                reps.append(z)
                out[(k, z)] = out.get((k, z), 0) + merged[(k, mu)]
        cleaned = tuple(
            sorted(
                ((c, k, mu) for (k, mu), c in out.items() if c != 0),
                key=lambda t: (t[1], complex(t[2]).real, complex(t[2]).imag),
            )
        )
        self.terms = cleaned

    # --- constructors ---

    @classmethod
    def zero(cls) -> "ExpPoly":
        return cls(())

    @classmethod
    def constant(cls, value) -> "ExpPoly":
        return cls(((value, 0, 0),))

    @classmethod
    def term(cls, coef, degree: int, mu=0) -> "ExpPoly":
        return cls(((coef, degree, mu),))

    # --- predicates ---

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_exact(self) -> bool:
        return all(
            _is_exact_scalar(c) and _is_exact_scalar(mu) for c, _, mu in self.terms
        )

    def as_inexact(self) -> "ExpPoly":
        return ExpPoly(
            (complex(c), k, mu if _is_exact_scalar(mu) and mu == 0 else complex(mu))
            for c, k, mu in self.terms
        )

    def max_coef(self) -> float:
        return max((abs(complex(c)) for c, _, _ in self.terms), default=0.0)

    # --- ring operations ---

    def _paired(self, other: "ExpPoly") -> tuple["ExpPoly", "ExpPoly"]:
        if self.is_exact != other.is_exact:
            return self.as_inexact(), other.as_inexact()
        return self, other

    def __add__(self, other: "ExpPoly") -> "ExpPoly":
        if not isinstance(other, ExpPoly):
            return NotImplemented
        a, b = self._paired(other)
        return ExpPoly(a.terms + b.terms)

    def __neg__(self) -> "ExpPoly":
        return ExpPoly((-c, k, mu) for c, k, mu in self.terms)

    def __sub__(self, other: "ExpPoly") -> "ExpPoly":
        return self + (-other)

    def scale(self, s) -> "ExpPoly":
        if s == 0:
            return ExpPoly.zero()
        if self.is_exact and not _is_exact_scalar(s):
            return self.as_inexact().scale(complex(s))
        return ExpPoly((c * s, k, mu) for c, k, mu in self.terms)

    def __mul__(self, other: "ExpPoly") -> "ExpPoly":
        if not isinstance(other, ExpPoly):
            return NotImplemented
        a, b = self._paired(other)
        return ExpPoly(
            (c1 * c2, k1 + k2, mu1 + mu2)
            for c1, k1, mu1 in a.terms
            for c2, k2, mu2 in b.terms
        )

    # --- calculus ---

    def antiderivative(self) -> "ExpPoly":
        """The antiderivative F with F(0) = 0."""
        out = []
        for c, k, mu in self.terms:
            if mu == 0:
                out.append((_div_by_int(c, k + 1), k + 1, mu))
            else:
                # integral of x^k e^(mu x): by parts, degrees k down to 0
                for j in range(k, -1, -1):
                    sign = -1 if (k - j) % 2 else 1
                    ratio = factorial(k) // factorial(j)
                    out.append((c * sign * ratio / mu ** (k - j + 1), j, mu))
        F = ExpPoly(out)
        f0 = F.at_zero()
        if f0 != 0:
            F = F + ExpPoly.constant(-f0)
        return F

    def at_zero(self):
        return sum((c for c, k, _ in self.terms if k == 0), start=0)

    def at_one(self):
        return sum((c * _exp_of(mu) for c, _, mu in self.terms), start=0)

    def __call__(self, x):
        total = 0
        for c, k, mu in self.terms:
            value = c * x**k
            if mu != 0:
                value *= cmath.exp(complex(mu) * x)
            total += value
        return total

    def conjugate(self) -> "ExpPoly":
        return ExpPoly((c.conjugate(), k, mu.conjugate()) for c, k, mu in self.terms)

    def reflect(self) -> "ExpPoly":
        """The composition x -> 1 - x, expanded back into ExpPoly form."""
        out = []
        for c, k, mu in self.terms:
            base = c * _exp_of(mu)
            for j in range(k + 1):
                sign = -1 if j % 2 else 1
                out.append((base * comb(k, j) * sign, j, -mu))
        return ExpPoly(out)

    # --- plumbing ---

    def __eq__(self, other) -> bool:
        return isinstance(other, ExpPoly) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(self.terms)

    def __repr__(self) -> str:
        if not self.terms:
            return "ExpPoly(0)"
        bits = []
        for c, k, mu in self.terms:
            part = f"{c}"
            if k:
                part += f"*x^{k}"
            if mu != 0:
                part += f"*e^({mu}x)"
            bits.append(part)
        return "ExpPoly(" + " + ".join(bits) + ")"


@dataclass(frozen=True)
class PiecewiseFn:
    """One ExpPoly per descent cell, depending on one designated coordinate.

    ``which_variable`` records whether each piece is a function of the first
    or the last coordinate of its cell; the operator produces first-variable
    functions, the reflection J swaps the designation.
    """

    m: int
    which_variable: str  # 'first' | 'last'
    pieces: Mapping[str, ExpPoly]

    def __post_init__(self) -> None:
        if self.which_variable not in ("first", "last"):
            raise ValueError("which_variable must be 'first' or 'last'")
        expected = all_words(self.m - 1)
        if set(self.pieces) != set(expected):
            raise ValueError(
                f"pieces must cover exactly the {len(expected)} words of "
                f"length {self.m - 1}"
            )
        object.__setattr__(self, "pieces", dict(self.pieces))

    def map_pieces(self, fn: Callable[[ExpPoly], ExpPoly]) -> "PiecewiseFn":
        return PiecewiseFn(
            self.m, self.which_variable, {u: fn(p) for u, p in self.pieces.items()}
        )

    def scale(self, s) -> "PiecewiseFn":
        return self.map_pieces(lambda p: p.scale(s))

    def conjugate(self) -> "PiecewiseFn":
        return self.map_pieces(lambda p: p.conjugate())

    def __add__(self, other: "PiecewiseFn") -> "PiecewiseFn":
        self._check_compatible(other)
        return PiecewiseFn(
            self.m,
            self.which_variable,
            {u: p + other.pieces[u] for u, p in self.pieces.items()},
        )

    def __sub__(self, other: "PiecewiseFn") -> "PiecewiseFn":
        return self + other.scale(-1)

    def _check_compatible(self, other: "PiecewiseFn") -> None:
        if self.m != other.m or self.which_variable != other.which_variable:
            raise ValueError("piecewise functions are not compatible")

    def max_coef(self) -> float:
        return max(p.max_coef() for p in self.pieces.values())


def constant_piecewise(m: int, value, which_variable: str = "first") -> PiecewiseFn:
    return PiecewiseFn(
        m, which_variable, {u: ExpPoly.constant(value) for u in all_words(m - 1)}
    )


def kappa_piecewise(scheme: WeightScheme) -> PiecewiseFn:
    """The initial-weight function: wt1(u) on cell P_u, first-variable."""
    return PiecewiseFn(
        scheme.m,
        "first",
        {u: ExpPoly.constant(scheme.wt1[u]) for u in all_words(scheme.m - 1)},
    )


def mu_piecewise(scheme: WeightScheme) -> PiecewiseFn:
    """The final-weight function: wt2(u) on cell P_u, last-variable."""
    return PiecewiseFn(
        scheme.m,
        "last",
        {u: ExpPoly.constant(scheme.wt2[u]) for u in all_words(scheme.m - 1)},
    )


def letter_indicator(m: int, letter: str, which_variable: str) -> PiecewiseFn:
    """Indicator of cells whose word starts (first) or ends (last) with letter."""
    if letter not in ("a", "b"):
        raise ValueError("letter must be 'a' or 'b'")
    if m < 2:
        raise ValueError("letter indicators need m >= 2")

    def hit(u: str) -> bool:
        return (u[0] if which_variable == "first" else u[-1]) == letter

    return PiecewiseFn(
        m,
        which_variable,
        {
            u: ExpPoly.constant(Fraction(1)) if hit(u) else ExpPoly.zero()
            for u in all_words(m - 1)
        },
    )


def eigenfunction_pieces(
    pair: TransferPair, lam: complex, vector: np.ndarray
) -> PiecewiseFn:
    """The eigenfunction exp((A-B)/lambda * x) @ c, one ExpPoly per cell.

    The matrix is split into generalized eigenspaces (eigenvalues clustered
    at 1e-8); on each space exp contributes exp(mu x) times a polynomial of
    degree below the block size.  Raises ValueError when the generalized
    eigenspaces cannot be classified at that tolerance.
    """
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    M = (pair.A - pair.B) / lam
    d = M.shape[0]
    c = np.asarray(vector, dtype=complex)
    if c.shape != (d,):
        raise ValueError(f"vector must have shape ({d},)")
    scale = max(1.0, float(np.linalg.norm(M, 1)))
    eigenvalues = np.linalg.eigvals(M)
    clusters = _cluster(eigenvalues, _CLUSTER_TOL * scale)
    bases = []
    for rep, mult in clusters:
        K = np.linalg.matrix_power(M - rep * np.eye(d), mult)
        _, sing, vh = np.linalg.svd(K)
        cut = _JORDAN_TOL * max(1.0, float(sing[0])) if len(sing) else _JORDAN_TOL
        kernel_dim = int(np.sum(sing <= cut))
        if kernel_dim != mult:
            raise ValueError(
                f"failed to classify the generalized eigenspace at eigenvalue "
                f"{rep:.6g} (tolerance {_JORDAN_TOL:g}): multiplicity {mult}, "
                f"kernel dimension {kernel_dim}"
            )
        bases.append(vh[d - mult :].conj().T)
    S = np.hstack(bases)
    try:
        y = np.linalg.solve(S, c)
    except np.linalg.LinAlgError:
        raise ValueError(
            f"failed to classify the generalized eigenspaces at tolerance "
            f"{_JORDAN_TOL:g}: basis is numerically singular"
        ) from None
    pieces_terms: list[list[tuple]] = [[] for _ in range(d)]
    col = 0
    for (rep, mult), basis in zip(clusters, bases):
        cj = basis @ y[col : col + mult]
        col += mult
        N = M - rep * np.eye(d)
        vec = cj
        for i in range(mult):
            if i > 0:
                vec = N @ vec
            coefs = vec / factorial(i)
            for idx in range(d):
                if coefs[idx] != 0:
                    pieces_terms[idx].append((complex(coefs[idx]), i, complex(rep)))
    words = all_words(pair.m - 1)
    return PiecewiseFn(
        pair.m,
        "first",
        {words[idx]: ExpPoly(pieces_terms[idx]) for idx in range(d)},
    )


def _cluster(values: np.ndarray, tol: float) -> list[tuple[complex, int]]:
    """Greedy transitive clustering; returns (representative, multiplicity)."""
    items = sorted((complex(v) for v in values), key=lambda z: (z.real, z.imag))
    groups: list[list[complex]] = []
    for z in items:
        placed = False
        for g in groups:
            if any(abs(z - w) <= tol for w in g):
                g.append(z)
                placed = True
                break
        if not placed:
            groups.append([z])
    # merge groups that became adjacent transitively
    changed = True
    while changed:
        changed = False
        for i in range(len(groups)):
            for j in range(i + 1, len(groups)):
                if any(
                    abs(z - w) <= tol for z in groups[i] for w in groups[j]
                ):
                    groups[i].extend(groups.pop(j))
                    changed = True
                    break
            if changed:
                break
    out = []
    for g in groups:
        rep = sum(g) / len(g)
        out.append((complex(rep), len(g)))
    out.sort(key=lambda t: (t[0].real, t[0].imag))
    return out


def apply_J(f: PiecewiseFn) -> PiecewiseFn:
    """The reflection (Jf)(x_1,...,x_m) = f(1-x_m, ..., 1-x_1) on pieces.

    The point map sends cell P_u onto P_{reversed u} (reversing coordinate
    order and complementing values cancel on the descent word), so the piece
    of Jf on P_u is the piece of f on P_{reversed u} composed with x -> 1-x,
    and a first-variable function becomes a last-variable one (and back).
    """
    flipped = "last" if f.which_variable == "first" else "first"
    return PiecewiseFn(
        f.m,
        flipped,
        {u: f.pieces[u[::-1]].reflect() for u in f.pieces},
    )


def polytope_integral(u: str, f: ExpPoly, g: ExpPoly):
    """Integral over the cell P_u of f(x_1) * g(x_m), in closed form.

    Coordinates are integrated innermost-out: x_m runs over [x_{m-1}, 1] when
    u ends in a and [0, x_{m-1}] when it ends in b, and so on down to x_1
    over [0, 1].  Exact Fraction arithmetic survives when both factors are
    rational polynomials.
    """
    if any(ch not in "ab" for ch in u):
        raise ValueError(f"word {u!r} has letters outside {{a, b}}")
    cur = g
    for letter in reversed(u):
        F = cur.antiderivative()
        if letter == "a":
            cur = ExpPoly.constant(F.at_one()) - F
        else:
            cur = F
    return (f * cur).antiderivative().at_one()


def _pairing(first_fn: PiecewiseFn, last_fn: PiecewiseFn):
    total = 0
    for u in all_words(first_fn.m - 1):
        total += polytope_integral(u, first_fn.pieces[u], last_fn.pieces[u])
    return total


def inner_products(
    phi: PiecewiseFn,
    psi: PiecewiseFn,
    kappa: PiecewiseFn,
    mu: PiecewiseFn,
) -> tuple[complex, complex, complex]:
    """The three pairings (<phi, mu>, <kappa, conj(psi)>, <phi, conj(psi)>).

    The inner product is integral of f times the conjugate of g.  Since the
    second slots hold mu and the already-conjugated adjoint eigenfunction,
    the integrands work out to phi*conj(mu), kappa*psi, and phi*psi.
    """
    return (
        _pairing(phi, mu.conjugate()),
        _pairing(kappa, psi),
        _pairing(phi, psi),
    )


def adjoint_eigenfunction(scheme: WeightScheme, phi: PiecewiseFn) -> PiecewiseFn:
    """The adjoint eigenfunction psi = J(phi).

    Valid only when the scheme is symmetric under word reversal (then J
    conjugates the operator into its adjoint); any other scheme is refused
    with a diagnostic naming the offending weight pair.
    """
    defect = symmetry_defect(scheme)
    if defect is not None:
        raise ValueError(
            "adjoint eigenfunctions via the J reflection need a "
            f"reversal-symmetric scheme: {defect}"
        )
    return apply_J(phi)


def asymptotic_constant(
    phi: PiecewiseFn,
    psi: PiecewiseFn,
    kappa: PiecewiseFn,
    mu: PiecewiseFn,
) -> complex:
    """The coefficient <phi, mu> <kappa, conj(psi)> / <phi, conj(psi)>.

    This is the weight of one eigenvalue's lambda^(n-m) term in the
    n!-normalized asymptotics.  A denominator pairing below 1e-10 is refused:
    it signals a possibly non-simple eigenvalue, where this formula is wrong.
    """
    p_phi_mu, p_kappa_psi, p_phi_psi = inner_products(phi, psi, kappa, mu)
    if abs(p_phi_psi) < 1e-10:
        raise ValueError(
            f"pairing <phi, conj(psi)> = {abs(p_phi_psi):.3g} vanishes at "
            "tolerance 1e-10; the eigenvalue may not be simple"
        )
    return p_phi_mu * p_kappa_psi / p_phi_psi


def scheme_constant(
    scheme: WeightScheme,
    lam: complex,
    vector: np.ndarray,
    kappa: PiecewiseFn | None = None,
    mu: PiecewiseFn | None = None,
) -> complex:
    """Convenience wrapper: eigenfunction, adjoint, and constant in one step.

    kappa and mu default to the scheme's initial and final weight functions.
    """
    pair = build_transfer(scheme)
    phi = eigenfunction_pieces(pair, lam, vector)
    psi = adjoint_eigenfunction(scheme, phi)
    if kappa is None:
        kappa = kappa_piecewise(scheme)
    if mu is None:
        mu = mu_piecewise(scheme)
    return asymptotic_constant(phi, psi, kappa, mu)


def predict_alpha(
    terms: Sequence[tuple[complex, complex]], n: int, m: int
) -> float:
    """Sum of c * lambda^(n-m) over the given (c, lambda) pairs, as a real.

    Conjugate eigenvalue pairs must both be present so the sum is real; an
    imaginary residue above 1e-9 (relative) raises.
    """
    if n < m:
        raise ValueError("prediction needs n >= m")
    total = sum(c * lam ** (n - m) for c, lam in terms)
    total = complex(total)
    if abs(total.imag) > 1e-9 * max(1.0, abs(total.real)):
        raise ValueError(
            f"prediction has imaginary residue {total.imag:.3g}; "
            "conjugate eigenvalues must be included in pairs"
        )
    return total.real


def apply_operator(scheme: WeightScheme, f: PiecewiseFn) -> PiecewiseFn:
    """One application of the weighted descent operator T.

    On the cell P_w (w = uy) the result is
    wt(a u y) * integral_0^{x_1} f|_{P_{au}} + wt(b u y) * integral_{x_1}^1 f|_{P_{bu}},
    a function of the first coordinate again.  Exact on rational inputs.
    """
    if f.which_variable != "first":
        raise ValueError("operator input must be a first-variable function")
    if f.m != scheme.m:
        raise ValueError("dimension mismatch between scheme and function")
    m = scheme.m
    pieces: dict[str, ExpPoly] = {}
    if m == 1:
        F = f.pieces[""].antiderivative()
        up = F.scale(scheme.wt["a"])
        down = (ExpPoly.constant(F.at_one()) - F).scale(scheme.wt["b"])
        pieces[""] = up + down
    else:
        for w in all_words(m - 1):
            u = w[:-1]
            Fa = f.pieces["a" + u].antiderivative()
            Fb = f.pieces["b" + u].antiderivative()
            up = Fa.scale(scheme.wt["a" + w])
            down = (ExpPoly.constant(Fb.at_one()) - Fb).scale(scheme.wt["b" + w])
            pieces[w] = up + down
    return PiecewiseFn(m, "first", pieces)


def alpha_by_operator_iteration(
    scheme: WeightScheme,
    n: int,
    start: str | None = None,
    end: str | None = None,
) -> WeightedCount:
    """alpha_n as n! <T^(n-m)(kappa), mu>, in exact rational arithmetic.

    Iterates of T on the piecewise-constant kappa stay rational polynomials,
    and the closing pairing is a rational polytope integral, so the result is
    an exact Fraction.  Requires n >= m.  ``start``/``end`` restrict to
    descent words with the given first/last letter by zeroing kappa and mu
    off the matching cells (m = 2, n >= 2 only, matching the other oracles).
    """
    m = scheme.m
    if n < m:
        raise ValueError(f"operator iteration needs n >= m = {m}")
    _check_refinement(m, n, start, end)
    f = kappa_piecewise(scheme)
    if start is not None:
        ind = letter_indicator(m, start, "first")
        f = PiecewiseFn(m, "first", {u: f.pieces[u] * ind.pieces[u] for u in f.pieces})
    for _ in range(n - m):
        f = apply_operator(scheme, f)
    mu = mu_piecewise(scheme)
    if end is not None:
        ind = letter_indicator(m, end, "last")
        mu = PiecewiseFn(m, "last", {u: mu.pieces[u] * ind.pieces[u] for u in mu.pieces})
    total = _pairing(f, mu)  # mu is rational, conjugation is a no-op
    if not isinstance(total, (int, Fraction)):
        raise AssertionError("operator iteration left the exact path")
    return WeightedCount(n, Fraction(factorial(n)) * total)
