"""Exact rational computations of weighted descent-pattern sums.

The central quantity is alpha_n: the sum of Wt(pi) over all pi in S_n, where
Wt multiplies the scheme's window weights along the descent word of pi (with
wt1 on the leading m-1 letters and wt2 on the trailing m-1 letters).  This
module holds the two exact routes used to cross-check everything else:
brute-force enumeration over S_n, and an insertion dynamic program over
(descent-word suffix, rank of last entry) states.  It also carries the exact
closed-form machinery available for the scheme with wt(aa) = 0, wt(bb) = 2:
recursions, nearest-integer formulas, and generating-function coefficients.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from math import comb, factorial
from typing import Iterable, Sequence

from .words import WeightScheme, all_words, descent_word

BRUTE_FORCE_CAP = 10

__all__ = [
    "WeightedCount",
    "wt_of_permutation",
    "brute_force_alpha",
    "dp_alpha",
    "derangements",
    "section6_recursion",
    "nearest_integer_formula",
    "genfun_coeffs",
    "verify_genfun_equation",
    "count_barred",
]


@dataclass(frozen=True)
class WeightedCount:
    """An exact weighted permutation count for one n."""

    n: int
    value: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", Fraction(self.value))


def wt_of_permutation(scheme: WeightScheme, pi: Sequence[int]) -> Fraction:
    """Weight of one permutation under the scheme.

    The descent word u of pi has length n - 1.  For n > m the weight is
    wt1(prefix) * product of wt over all length-m windows of u * wt2(suffix);
    for n = m the window product is empty and the weight is wt1(u) * wt2(u).
    Permutations shorter than m are not weighted (raises ValueError).
    """
    n = len(pi)
    m = scheme.m
    if n < m:
        raise ValueError(f"permutation of length {n} is shorter than m = {m}")
    u = descent_word(pi)
    return _wt_of_word(scheme, u)


def _wt_of_word(scheme: WeightScheme, u: str) -> Fraction:
    m = scheme.m
    value = scheme.wt1[u[: m - 1]] * scheme.wt2[u[len(u) - (m - 1) :] if m > 1 else ""]
    for i in range(len(u) - m + 1):
        value *= scheme.wt[u[i : i + m]]
    return value


@lru_cache(maxsize=None)
def _word_multiplicities(n: int) -> dict[str, int]:
    """How many permutations in S_n share each descent word (full enumeration)."""
    counts: Counter[str] = Counter(
        "".join("a" if p[i] < p[i + 1] else "b" for i in range(n - 1))
        for p in permutations(range(n))
    )
    return dict(counts)


def _check_refinement(m: int, n: int, start: str | None, end: str | None) -> None:
    if start is None and end is None:
        return
    if m != 2:
        raise ValueError("start/end refinements are defined only for m = 2")
    if n < 2:
        raise ValueError("start/end refinements require n >= 2")
    for letter in (start, end):
        if letter is not None and letter not in ("a", "b"):
            raise ValueError(f"letter must be 'a' or 'b', got {letter!r}")


def brute_force_alpha(
    scheme: WeightScheme,
    n: int,
    start: str | None = None,
    end: str | None = None,
) -> WeightedCount:
    """alpha_n by enumerating all n! permutations.

    The sum is accumulated per descent word (the weight of a permutation
    depends only on its word), which rearranges but does not change the
    defining sum.  Intended as the ground-truth oracle; n is capped at
    BRUTE_FORCE_CAP -- use dp_alpha for larger n.  ``start``/``end``
    restrict to words with the given first/last letter (m = 2, n >= 2 only).
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n > BRUTE_FORCE_CAP:
        raise ValueError(
            f"n = {n} exceeds the brute-force cap {BRUTE_FORCE_CAP}; use dp_alpha"
        )
    _check_refinement(scheme.m, n, start, end)
    if n < scheme.m:
        return WeightedCount(n, Fraction(factorial(n)))
    total = Fraction(0)
    for word, count in _word_multiplicities(n).items():
        if start is not None and word[0] != start:
            continue
        if end is not None and word[-1] != end:
            continue
        w = _wt_of_word(scheme, word)
        if w:
            total += count * w
    return WeightedCount(n, total)


def brute_force_alpha_direct(scheme: WeightScheme, n: int) -> WeightedCount:
    """alpha_n summed permutation by permutation, with no grouping.

    Quadratically slower than brute_force_alpha; exists so tests can check
    that grouping by descent word is a pure rearrangement.
    """
    if n > BRUTE_FORCE_CAP:
        raise ValueError(
            f"n = {n} exceeds the brute-force cap {BRUTE_FORCE_CAP}; use dp_alpha"
        )
    if n < scheme.m:
        return WeightedCount(n, Fraction(factorial(n)))
    total = sum(
        (wt_of_permutation(scheme, p) for p in permutations(range(1, n + 1))),
        Fraction(0),
    )
    return WeightedCount(n, total)


def dp_alpha(
    scheme: WeightScheme,
    n: int,
    start: str | None = None,
    end: str | None = None,
) -> WeightedCount:
    """alpha_n by the insertion dynamic program, exactly.

    Permutations are built by appending entries on the right; the state is
    (last min(m-1, built-1) letters of the descent word, rank of the last
    entry).  Exact big-integer arithmetic is used when every weight is an
    integer, exact rationals otherwise.

    ``start``/``end`` restrict to permutations whose descent word begins or
    ends with the given letter.  These refined counts are defined only for
    m = 2 and n >= 2.
    """
    m = scheme.m
    if n < 0:
        raise ValueError("n must be nonnegative")
    _check_refinement(m, n, start, end)
    if n == 0:
        return WeightedCount(0, Fraction(1))

    integral = all(
        v.denominator == 1
        for table in (scheme.wt, scheme.wt1, scheme.wt2)
        for v in table.values()
    )
    cast = (lambda f: f.numerator) if integral else (lambda f: f)
    wt = {w: cast(v) for w, v in scheme.wt.items()}
    wt1 = {w: cast(v) for w, v in scheme.wt1.items()}
    wt2 = {w: cast(v) for w, v in scheme.wt2.items()}

    one = 1 if integral else Fraction(1)
    init = wt1[""] if m == 1 else one
    # states: {(suffix, rank): weight} after i entries, rank in 1..i
    states: dict[tuple[str, int], object] = {("", 1): init}
    for i in range(1, n):
        nxt: dict[tuple[str, int], object] = {}
        for (suffix, rank), weight in states.items():
            for new_rank in range(1, i + 2):
                letter = "a" if new_rank > rank else "b"
                if i == 1 and start is not None and letter != start:
                    continue
                grown = suffix + letter
                factor = one
                if len(grown) == m:  # a full window just closed
                    factor = wt[grown]
                    if not factor:
                        continue
                    new_suffix = grown[1:]
                else:
                    new_suffix = grown
                    if len(grown) == m - 1:  # the prefix is now complete
                        factor = wt1[grown]
                        if not factor:
                            continue
                key = (new_suffix, new_rank)
                add = weight * factor
                if key in nxt:
                    nxt[key] += add
                else:
                    nxt[key] = add
        states = nxt
    total = 0 if integral else Fraction(0)
    for (suffix, _rank), weight in states.items():
        if end is not None and (not suffix or suffix[-1] != end):
            continue
        if n >= m:
            weight = weight * wt2[suffix[len(suffix) - (m - 1) :] if m > 1 else ""]
        total += weight
    return WeightedCount(n, Fraction(total))


def derangements(n: int) -> int:
    """Number of fixed-point-free permutations of n elements."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    d_prev, d = 1, 0  # D_0, D_1
    if n == 0:
        return 1
    for k in range(2, n + 1):
        d_prev, d = d, (k - 1) * (d + d_prev)
    return d


_SEC6_KEYS = ("aa", "ab", "bb", "total")


def section6_recursion(n: int) -> dict[str, int]:
    """Exact refined counts for the wt(aa)=0, wt(bb)=2 scheme via recursion.

    Returns {'aa', 'ab', 'bb', 'total'} for the given n >= 2, where 'ab' is
    the common value of the (a,b) and (b,a) refinements.  Seeds at n = 2 are
    delta_{x,y}; for n >= 3 each value is n times the previous plus a
    signed correction.
    """
    if n < 2:
        raise ValueError("refined counts start at n = 2")
    aa, ab, bb, total = 1, 0, 1, 2
    for k in range(3, n + 1):
        sign = -1 if k % 2 else 1
        aa = k * aa + 1 + 4 * sign
        ab = k * ab - 2 * sign
        bb = k * bb + sign
        total = k * total + 1 + sign
    return {"aa": aa, "ab": ab, "bb": bb, "total": total}


# Truncated-series integer formulas: value = sum_{k<=n} coef(k) * n!/k!,
# where coef(k) comes from the numerator series of the closed form.
_NEAREST_THRESHOLD = {"aa": 8, "ab": 3, "bb": 2, "total": 4}


def _series_coef(which: str, k: int) -> int:
    at0 = 1 if k == 0 else 0
    sign = -1 if k % 2 else 1
    if which == "aa":
        return 1 - 4 * at0 + 4 * sign
    if which == "ab":
        return at0 - 2 * sign
    if which == "bb":
        return sign
    if which == "total":
        return 1 - 2 * at0 + sign
    raise ValueError(f"which must be one of {_SEC6_KEYS}, got {which!r}")


def nearest_integer_formula(n: int, which: str) -> int:
    """Nearest integer to c * n! for the wt(aa)=0, wt(bb)=2 refined counts.

    c is (per refinement) e - 4 + 4/e, 1 - 2/e, 1/e, or e - 2 + 1/e.  The
    value is computed by the exact truncated series sum_{k<=n} coef(k)*n!/k!
    in big-integer arithmetic -- no floating point.  Below the per-refinement
    threshold (aa: 8, ab: 3, bb: 2, total: 4) the rounding claim does not
    hold, so the call is refused.
    """
    if which not in _SEC6_KEYS:
        raise ValueError(f"which must be one of {_SEC6_KEYS}, got {which!r}")
    threshold = _NEAREST_THRESHOLD[which]
    if n < threshold:
        raise ValueError(
            f"nearest-integer formula for {which!r} is only valid for "
            f"n >= {threshold}, got n = {n}"
        )
    nf = factorial(n)
    return sum(_series_coef(which, k) * (nf // factorial(k)) for k in range(n + 1))


# --- exact power series (ordinary coefficients, Fractions) ---


def _series_exp(sign: int, order: int) -> list[Fraction]:
    return [Fraction(sign**k, factorial(k)) for k in range(order + 1)]


def _series_mul(a: list[Fraction], b: list[Fraction], order: int) -> list[Fraction]:
    out = [Fraction(0)] * (order + 1)
    for i, ai in enumerate(a[: order + 1]):
        if not ai:
            continue
        for j in range(min(len(b), order + 1 - i)):
            if b[j]:
                out[i + j] += ai * b[j]
    return out


def _series_int(a: list[Fraction], order: int) -> list[Fraction]:
    out = [Fraction(0)] * (order + 1)
    for k in range(min(len(a), order)):
        out[k + 1] = a[k] / (k + 1)
    return out


def _closed_form_series(order: int) -> dict[str, list[Fraction]]:
    """Ordinary power-series coefficients of the four closed forms."""
    geom = [Fraction(1)] * (order + 1)
    ep = _series_exp(1, order)
    em = _series_exp(-1, order)

    def combo(ce: int, c0: int, cm: int) -> list[Fraction]:
        return [ce * ep[k] + cm * em[k] + (c0 if k == 0 else 0) for k in range(order + 1)]

    f_aa = _series_mul(combo(1, -4, 4), geom, order)
    f_aa[0] -= 1
    if order >= 1:
        f_aa[1] += 2
    f_ab = _series_mul(combo(0, 1, -2), geom, order)
    f_ab[0] += 1
    if order >= 1:
        f_ab[1] -= 1
    f_bb = _series_mul(em, geom, order)
    f_bb[0] -= 1
    f_tot = _series_mul(combo(1, -2, 1), geom, order)
    return {"aa": f_aa, "ab": f_ab, "bb": f_bb, "total": f_tot}


def genfun_coeffs(order: int) -> dict[str, list[Fraction]]:
    """Coefficients of z^n/n! of the four closed-form generating functions.

    Returned per refinement ('aa', 'ab', 'bb', 'total') as lists indexed by n
    from 0 to order; entries agree with the refined counts for n >= 2.
    """
    series = _closed_form_series(order)
    return {
        key: [coef * factorial(k) for k, coef in enumerate(s)]
        for key, s in series.items()
    }


def verify_genfun_equation(order: int, bb_weight: int = 2) -> bool:
    """Check the quadratic integral equation tying the four series together.

    For each pair (x, y) the series F_{x,y} must equal

        delta_{x,y} z^2/2! + delta_{x,b} delta_{y,a} 2 z^3/3!
        + int (F_{x,a} + W F_{x,b}) F_{b,y}
        + delta_{x,a} int F_{b,y}  + delta_{x,b} int w F_{b,y}
        + delta_{y,b} int (F_{x,a} + W F_{x,b})
        + delta_{y,a} int (F_{x,a} + W F_{x,b}) w

    with W = bb_weight, compared through z^order in exact arithmetic.  The
    identity holds for the scheme's actual double-descent weight W = 2 and
    must fail for other W (useful as a negative control).
    """
    f = _closed_form_series(order + 1)
    f["ba"] = f["ab"]  # equal by the reversal symmetry of the scheme

    def F(x: str, y: str) -> list[Fraction]:
        return f[x + y]

    z = [Fraction(0)] * (order + 2)
    for x in "ab":
        for y in "ab":
            lhs = F(x, y)
            rhs = [Fraction(0)] * (order + 2)
            if x == y and order >= 2:
                rhs[2] += Fraction(1, 2)
            if x == "b" and y == "a" and order >= 3:
                rhs[3] += Fraction(2, 6)
            bracket = [
                F(x, "a")[k] + bb_weight * F(x, "b")[k] for k in range(order + 2)
            ]
            fby = F("b", y)
            for term in (
                _series_int(_series_mul(bracket, fby, order + 1), order + 1),
                _series_int(fby, order + 1) if x == "a" else z,
                _series_int([Fraction(0)] + fby[:-1], order + 1) if x == "b" else z,
                _series_int(bracket, order + 1) if y == "b" else z,
                _series_int([Fraction(0)] + bracket[:-1], order + 1) if y == "a" else z,
            ):
                for k in range(order + 1):
                    rhs[k] += term[k]
            if any(lhs[k] != rhs[k] for k in range(order + 1)):
                return False
    return True


def _maximal_descent_runs(pi: Sequence[int]) -> list[int]:
    """Sizes of the maximal decreasing intervals partitioning positions 1..n."""
    runs = []
    size = 1
    for i in range(len(pi) - 1):
        if pi[i] > pi[i + 1]:
            size += 1
        else:
            runs.append(size)
            size = 1
    runs.append(size)
    return runs


def _compositions(total: int) -> Iterable[tuple[int, ...]]:
    if total == 0:
        yield ()
        return
    for first in range(1, total + 1):
        for rest in _compositions(total - first):
            yield (first,) + rest


def count_barred(pi: Sequence[int]) -> int:
    """Ways to split each maximal descent run into barred sub-runs.

    Each maximal descent run of size c may be partitioned into consecutive
    sub-runs, a sub-run of size s admitting s - 1 bar placements; the count
    per run is the sum over compositions of c of the product of (part - 1).
    A double ascent leaves an unbarrable singleton inside, giving 0; singleton
    runs at the two ends are skipped (nothing there needs a bar).
    """
    word = descent_word(pi)
    if "aa" in word:
        return 0
    result = 1
    for size in _maximal_descent_runs(pi):
        if size == 1:
            continue
        result *= sum(_run_product(comp) for comp in _compositions(size))
    return result


def _run_product(comp: tuple[int, ...]) -> int:
    prod = 1
    for part in comp:
        prod *= part - 1
    return prod


def double_descents(pi: Sequence[int]) -> int:
    """Number of positions where two descents are adjacent."""
    # overlapping count: a run of k descents contributes k - 1
    word = descent_word(pi)
    return sum(1 for i in range(len(word) - 1) if word[i] == word[i + 1] == "b")
