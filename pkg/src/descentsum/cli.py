"""Command-line front end: reproducible runs with machine-readable output.

Five subcommands tie the library together: ``oracle`` (the exact counting
routes, cross-checked), ``spectrum`` (eigenvalues of the transfer operator),
``constants`` (asymptotic coefficients from eigenfunction pairings),
``verify`` (exact counts against spectral predictions with a decay check),
and ``sequence`` (the two-letter wt(aa)=0, wt(bb)=2 scheme's four integer
sequences and their identities).

Output is deterministic: floats are fixed at 12 significant digits, row
order is fixed, and timing goes to stderr so identical invocations produce
byte-identical stdout.  Exit codes: 0 success, 1 a numeric check failed,
2 usage or parse error.
"""

from __future__ import annotations

import argparse
import cmath
import csv
import json
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from pathlib import Path
from typing import Callable, Sequence

from .exact import (
    BRUTE_FORCE_CAP,
    brute_force_alpha,
    derangements,
    dp_alpha,
    genfun_coeffs,
    nearest_integer_formula,
    section6_recursion,
    verify_genfun_equation,
)
from .expfun import (
    adjoint_eigenfunction,
    alpha_by_operator_iteration,
    asymptotic_constant,
    eigenfunction_pieces,
    inner_products,
    kappa_piecewise,
    mu_piecewise,
    predict_alpha,
)
from .presets import PRESETS, preset_scheme
from .spectral import SpectralPoint, build_transfer, find_complex_roots, find_real_roots
from .words import SchemeParseError, WeightScheme, load_scheme, symmetry_defect

__all__ = ["main"]

PAIR_MATCH_TOL = 1e-8


class UsageFailure(Exception):
    """Bad flags or inputs; maps to exit code 2."""


class CheckFailure(Exception):
    """A numeric assertion failed before any table was produced; exit 1."""


@dataclass
class RunReport:
    command: str
    scheme_label: str
    params: dict
    columns: list[str]
    rows: list[dict]
    summary: list[str] = field(default_factory=list)


# --- value formatting ---


def _fmt_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.12g}"
    if isinstance(v, (int, Fraction)):
        return str(v)
    return str(v)


def _json_cell(v):
    if isinstance(v, bool):
        return v
    if isinstance(v, float):
        return float(f"{v:.12g}")
    if isinstance(v, Fraction):
        return str(v)
    return v


def _emit(report: RunReport, fmt: str) -> None:
    if fmt == "json":
        payload = {
            "command": report.command,
            "scheme": report.scheme_label,
            "params": {k: _json_cell(v) for k, v in report.params.items()},
            "columns": report.columns,
            "rows": [
                {col: _json_cell(row[col]) for col in report.columns}
                for row in report.rows
            ],
            "summary": report.summary,
        }
        print(json.dumps(payload, indent=2))
        return
    if fmt == "csv":
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(report.columns)
        for row in report.rows:
            writer.writerow([_fmt_cell(row[col]) for col in report.columns])
        return
    cells = [[_fmt_cell(row[col]) for col in report.columns] for row in report.rows]
    widths = [
        max(len(col), *(len(r[i]) for r in cells)) if cells else len(col)
        for i, col in enumerate(report.columns)
    ]
    print("  ".join(col.ljust(w) for col, w in zip(report.columns, widths)).rstrip())
    for r in cells:
        print("  ".join(c.rjust(w) for c, w in zip(r, widths)).rstrip())
    for line in report.summary:
        print(line)


# --- shared plumbing ---


def _resolve_scheme(args) -> tuple[WeightScheme, str]:
    if getattr(args, "preset", None):
        try:
            return preset_scheme(args.preset), args.preset
        except KeyError as exc:
            raise UsageFailure(exc.args[0]) from None
    if getattr(args, "scheme", None):
        path = Path(args.scheme)
        try:
            text = path.read_text()
        except OSError as exc:
            raise UsageFailure(f"cannot read scheme file {path}: {exc}") from None
        return load_scheme(text), str(path)
    raise UsageFailure("one of --scheme FILE or --preset NAME is required")


def _parse_real_range(spec: str | None, scheme: WeightScheme) -> tuple[float, float]:
    if spec is None:
        return 0.05, max(2.0, float(scheme.max_abs_weight()) + 1.0)
    parts = spec.split(":")
    if len(parts) != 2:
        raise UsageFailure(f"--real-range wants LO:HI, got {spec!r}")
    try:
        lo, hi = (float(p) for p in parts)
    except ValueError:
        raise UsageFailure(f"--real-range wants numbers, got {spec!r}") from None
    if not (0 < lo < hi):
        raise UsageFailure("--real-range needs 0 < LO < HI")
    return lo, hi


def _parse_complex_box(
    spec: str | None, scheme: WeightScheme
) -> tuple[float, float, float, float]:
    if spec is None:
        r = max(1.0, float(scheme.max_abs_weight()))
        return (-r, r, -r, r)
    parts = spec.split(":")
    if len(parts) != 4:
        raise UsageFailure(f"--complex-box wants RE1:RE2:IM1:IM2, got {spec!r}")
    try:
        re1, re2, im1, im2 = (float(p) for p in parts)
    except ValueError:
        raise UsageFailure(f"--complex-box wants numbers, got {spec!r}") from None
    if not (re1 < re2 and im1 < im2):
        raise UsageFailure("--complex-box needs RE1 < RE2 and IM1 < IM2")
    return re1, re2, im1, im2


def _collect_spectrum(
    scheme: WeightScheme, args
) -> tuple[list[SpectralPoint], tuple[float, float], tuple[float, float, float, float]]:
    """Real-axis and complex-region roots merged, sorted by falling modulus."""
    pair = build_transfer(scheme)
    lo, hi = _parse_real_range(getattr(args, "real_range", None), scheme)
    box = _parse_complex_box(getattr(args, "complex_box", None), scheme)
    points = list(find_real_roots(pair, lo, hi, include_negative=True))
    for p in find_complex_roots(pair, region=box):
        if any(abs(p.lam - q.lam) <= PAIR_MATCH_TOL for q in points):
            continue  # the real-axis scan already owns this root
        points.append(p)
    points.sort(key=lambda p: (-abs(p.lam), cmath.phase(p.lam)))
    return points, (lo, hi), box


def _truncate_points(
    points: list[SpectralPoint], top: int
) -> tuple[list[SpectralPoint], float | None]:
    """Keep the top-k by modulus without splitting a conjugate pair.

    Returns the kept points and the modulus of the first excluded one
    (None when nothing is excluded).
    """
    if top <= 0 or top >= len(points):
        return points, None
    k = top
    last, nxt = points[k - 1].lam, points[k].lam
    if abs(last.imag) > 1e-9 and abs(nxt - last.conjugate()) <= PAIR_MATCH_TOL:
        k += 1
    if k >= len(points):
        return points, None
    return points[:k], abs(points[k].lam)


def _spectrum_rows(points: list[SpectralPoint]) -> list[dict]:
    return [
        {
            "lambda_re": p.lam.real,
            "lambda_im": p.lam.imag,
            "abs_lambda": abs(p.lam),
            "simple": p.simple,
            "residual": p.residual,
        }
        for p in points
    ]


def _constants_for_points(
    scheme: WeightScheme,
    points: list[SpectralPoint],
    skipped: list[tuple[SpectralPoint, str]] | None = None,
) -> list[dict]:
    """Constant rows per point; degenerate points go to ``skipped`` if given."""
    pair = build_transfer(scheme)
    kappa = kappa_piecewise(scheme)
    mu = mu_piecewise(scheme)
    rows = []
    for p in points:
        try:
            phi = eigenfunction_pieces(pair, p.lam, p.vector)
            psi = adjoint_eigenfunction(scheme, phi)
            p1, p2, p3 = inner_products(phi, psi, kappa, mu)
            const = asymptotic_constant(phi, psi, kappa, mu)
        except ValueError as exc:
            if skipped is None:
                raise CheckFailure(f"at lambda = {p.lam:.12g}: {exc}") from None
            skipped.append((p, str(exc)))
            continue
        rows.append(
            {
                "lambda_re": p.lam.real,
                "lambda_im": p.lam.imag,
                "const_re": const.real,
                "const_im": const.imag,
                "phi_mu_re": complex(p1).real,
                "phi_mu_im": complex(p1).imag,
                "kappa_psi_re": complex(p2).real,
                "kappa_psi_im": complex(p2).imag,
                "phi_psi_re": complex(p3).real,
                "phi_psi_im": complex(p3).imag,
            }
        )
    return rows


# --- subcommands ---


def _cmd_oracle(args) -> tuple[RunReport, list[str]]:
    scheme, label = _resolve_scheme(args)
    n = args.n
    if n < 0:
        raise UsageFailure("--n must be nonnegative")
    start, end = args.start, args.end
    methods: list[str] = []
    if args.method == "all":
        methods.append("dp")
        if n <= BRUTE_FORCE_CAP:
            methods.append("brute")
        if n >= scheme.m:
            methods.append("operator")
    else:
        methods.append(args.method)

    rows: list[dict] = []
    failures: list[str] = []
    values: dict[str, Fraction] = {}
    for method in methods:
        fn: Callable = {
            "dp": dp_alpha,
            "brute": brute_force_alpha,
            "operator": alpha_by_operator_iteration,
        }[method]
        try:
            value = fn(scheme, n, start=start, end=end).value
        except ValueError as exc:
            raise UsageFailure(str(exc)) from None
        values[method] = value
        rows.append(
            {
                "n": n,
                "method": method,
                "alpha": value,
                "alpha_over_n_factorial": float(value / factorial(n)),
            }
        )
    summary = []
    if args.method == "all":
        agree = len(set(values.values())) == 1
        summary.append(f"agreement: {'true' if agree else 'false'}")
        if not agree:
            detail = ", ".join(f"{k}={v}" for k, v in values.items())
            failures.append(f"oracle disagreement at n={n}: {detail}")
    report = RunReport(
        command="oracle",
        scheme_label=label,
        params={"n": n, "method": args.method, "start": start, "end": end},
        columns=["n", "method", "alpha", "alpha_over_n_factorial"],
        rows=rows,
        summary=summary,
    )
    return report, failures


def _cmd_spectrum(args) -> tuple[RunReport, list[str]]:
    scheme, label = _resolve_scheme(args)
    points, (lo, hi), box = _collect_spectrum(scheme, args)
    points, _ = _truncate_points(points, args.top)
    report = RunReport(
        command="spectrum",
        scheme_label=label,
        params={
            "real_range": f"{lo:.12g}:{hi:.12g}",
            "complex_box": ":".join(f"{v:.12g}" for v in box),
            "top": args.top,
        },
        columns=["lambda_re", "lambda_im", "abs_lambda", "simple", "residual"],
        rows=_spectrum_rows(points),
    )
    return report, []


def _cmd_constants(args) -> tuple[RunReport, list[str]]:
    scheme, label = _resolve_scheme(args)
    defect = symmetry_defect(scheme)
    if defect is not None:
        raise CheckFailure(
            f"constants need a reversal-symmetric scheme: {defect}"
        )
    points, (lo, hi), box = _collect_spectrum(scheme, args)
    points, _ = _truncate_points(points, args.top)
    rows = _constants_for_points(scheme, points)
    report = RunReport(
        command="constants",
        scheme_label=label,
        params={
            "real_range": f"{lo:.12g}:{hi:.12g}",
            "complex_box": ":".join(f"{v:.12g}" for v in box),
            "top": args.top,
        },
        columns=[
            "lambda_re",
            "lambda_im",
            "const_re",
            "const_im",
            "phi_mu_re",
            "phi_mu_im",
            "kappa_psi_re",
            "kappa_psi_im",
            "phi_psi_re",
            "phi_psi_im",
        ],
        rows=rows,
    )
    return report, []


def _cmd_verify(args) -> tuple[RunReport, list[str]]:
    scheme, label = _resolve_scheme(args)
    m = scheme.m
    n_max = args.n_max
    if n_max < m:
        raise UsageFailure(f"--n-max must be at least m = {m}")
    tol = args.tol
    if tol <= 0:
        raise UsageFailure("--tol must be positive")

    defect = symmetry_defect(scheme)
    points, (lo, hi), box = _collect_spectrum(scheme, args)
    if defect is not None:
        print(
            f"note: scheme is not reversal-symmetric ({defect}); "
            "constants are unavailable, showing the spectrum only",
            file=sys.stderr,
        )
        report = RunReport(
            command="verify",
            scheme_label=label,
            params={"mode": "spectrum-only"},
            columns=["lambda_re", "lambda_im", "abs_lambda", "simple", "residual"],
            rows=_spectrum_rows(points),
        )
        return report, []

    points, r_hat = _truncate_points(points, args.top)
    skipped: list[tuple[SpectralPoint, str]] = []
    crows = _constants_for_points(scheme, points, skipped)
    for p, msg in skipped:
        print(
            f"note: no constant at lambda = {p.lam:.12g} ({msg}); "
            "treating it as excluded",
            file=sys.stderr,
        )
        worst = abs(p.lam)
        r_hat = worst if r_hat is None else max(r_hat, worst)
    terms = [
        (
            complex(row["const_re"], row["const_im"]),
            complex(row["lambda_re"], row["lambda_im"]),
        )
        for row in crows
    ]
    # reference decay scale when every found eigenvalue is in the prediction:
    # remaining-spectrum contributions shrink at least factorially
    ref_base = max(2.0, 2.0 * float(scheme.max_abs_weight()))

    rows: list[dict] = []
    failures: list[str] = []
    prev_err: float | None = None
    for n in range(m, n_max + 1):
        exact = dp_alpha(scheme, n).value
        exact_norm = exact / factorial(n)
        predicted = predict_alpha(terms, n, m)
        err = abs(predicted - float(exact_norm))
        if r_hat is not None:
            bound = tol * r_hat**n
        else:
            bound = tol * ref_base**n / factorial(n + 1)
        rows.append(
            {
                "n": n,
                "alpha": exact,
                "alpha_over_n_factorial": float(exact_norm),
                "predicted": predicted,
                "abs_error": err,
                "bound": bound,
            }
        )
        if n >= m + 5:
            if err > bound:
                failures.append(
                    f"n={n}: error {err:.6g} exceeds the decay bound {bound:.6g}"
                )
            if (
                prev_err is not None
                and max(err, prev_err) > 1e-9  # ignore the fp noise floor
                and err > prev_err * (1 + 1e-9) + 1e-12
            ):
                failures.append(
                    f"n={n}: error {err:.6g} grew from {prev_err:.6g}"
                )
        prev_err = err
    summary = [
        "r_hat: "
        + (f"{r_hat:.12g}" if r_hat is not None else "none (all found eigenvalues used)")
    ]
    report = RunReport(
        command="verify",
        scheme_label=label,
        params={
            "n_max": n_max,
            "top": args.top,
            "tol": tol,
            "real_range": f"{lo:.12g}:{hi:.12g}",
            "complex_box": ":".join(f"{v:.12g}" for v in box),
        },
        columns=[
            "n",
            "alpha",
            "alpha_over_n_factorial",
            "predicted",
            "abs_error",
            "bound",
        ],
        rows=rows,
        summary=summary,
    )
    return report, failures


def _cmd_sequence(args) -> tuple[RunReport, list[str]]:
    if getattr(args, "preset", None) not in (None, "sec6"):
        raise UsageFailure(
            "the sequence tables are specific to the sec6 preset "
            "(two letters, wt(aa)=0, wt(bb)=2)"
        )
    n_max = args.n_max
    if n_max < 4:
        raise UsageFailure("--n-max must be at least 4")
    scheme = preset_scheme("sec6")
    coeffs = genfun_coeffs(n_max)
    rows: list[dict] = []
    failures: list[str] = []
    for n in range(2, n_max + 1):
        rec = section6_recursion(n)
        dp = {
            "aa": dp_alpha(scheme, n, "a", "a").value,
            "ab": dp_alpha(scheme, n, "a", "b").value,
            "ba": dp_alpha(scheme, n, "b", "a").value,
            "bb": dp_alpha(scheme, n, "b", "b").value,
            "total": dp_alpha(scheme, n).value,
        }
        dp_ok = (
            dp["aa"] == rec["aa"]
            and dp["ab"] == rec["ab"] == dp["ba"]
            and dp["bb"] == rec["bb"]
            and dp["total"] == rec["total"]
        )
        der_ok = rec["bb"] == derangements(n)
        gen_ok = all(coeffs[key][n] == rec[key] for key in ("aa", "ab", "bb", "total"))
        row = {
            "n": n,
            "aa": rec["aa"],
            "ab": rec["ab"],
            "ba": rec["ab"],
            "bb": rec["bb"],
            "total": rec["total"],
            "dp_ok": dp_ok,
            "derangement_ok": der_ok,
            "genfun_ok": gen_ok,
        }
        for key in ("aa", "ab", "bb", "total"):
            try:
                near = nearest_integer_formula(n, key)
            except ValueError:
                row[f"nearest_{key}"] = "-"
                continue
            row[f"nearest_{key}"] = "ok" if near == rec[key] else "fail"
            if near != rec[key]:
                failures.append(
                    f"n={n}: nearest-integer formula for {key} gave {near}, "
                    f"expected {rec[key]}"
                )
        if not dp_ok:
            failures.append(f"n={n}: recursion disagrees with the insertion DP")
        if not der_ok:
            failures.append(
                f"n={n}: alpha_n(b,b) = {rec['bb']} != derangements {derangements(n)}"
            )
        if not gen_ok:
            failures.append(f"n={n}: generating-function coefficient mismatch")
        rows.append(row)

    eq_ok = verify_genfun_equation(12)
    control_ok = not verify_genfun_equation(12, bb_weight=3)
    summary = [
        f"integral-equation check through order 12: {'ok' if eq_ok else 'FAIL'}",
        "integral-equation negative control (double-descent weight 3): "
        + ("fails as expected" if control_ok else "UNEXPECTEDLY PASSES"),
    ]
    if not eq_ok:
        failures.append("integral-equation check failed at order 12")
    if not control_ok:
        failures.append("integral-equation negative control passed; check is vacuous")

    report = RunReport(
        command="sequence",
        scheme_label="sec6",
        params={"n_max": n_max},
        columns=[
            "n",
            "aa",
            "ab",
            "ba",
            "bb",
            "total",
            "dp_ok",
            "derangement_ok",
            "genfun_ok",
            "nearest_aa",
            "nearest_ab",
            "nearest_bb",
            "nearest_total",
        ],
        rows=rows,
        summary=summary,
    )
    return report, failures


# --- parser ---


def _add_scheme_flags(sp: argparse.ArgumentParser) -> None:
    group = sp.add_mutually_exclusive_group()
    group.add_argument("--scheme", metavar="FILE", help="weight scheme file")
    group.add_argument(
        "--preset",
        metavar="NAME",
        help="built-in scheme: " + ", ".join(sorted(PRESETS)),
    )


def _add_format_flag(sp: argparse.ArgumentParser) -> None:
    sp.add_argument(
        "--format",
        choices=("table", "csv", "json"),
        default="table",
        help="output format (default table)",
    )


def _add_region_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument(
        "--real-range",
        metavar="LO:HI",
        help="positive real interval to scan (mirrored to negatives)",
    )
    sp.add_argument(
        "--complex-box",
        metavar="RE1:RE2:IM1:IM2",
        help="complex rectangle to search",
    )
    sp.add_argument(
        "--top",
        type=int,
        default=0,
        metavar="K",
        help="keep only the K largest-modulus eigenvalues "
        "(conjugate pairs are never split; 0 = all)",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="descentsum",
        description="Weighted permutation counts by consecutive descent "
        "patterns: exact oracles, transfer-operator spectra, and asymptotics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    oracle = sub.add_parser(
        "oracle", help="exact alpha_n by up to three independent routes"
    )
    _add_scheme_flags(oracle)
    oracle.add_argument("--n", type=int, required=True, help="permutation length")
    oracle.add_argument(
        "--method",
        choices=("dp", "brute", "operator", "all"),
        default="all",
        help="counting route (default all: cross-checked)",
    )
    oracle.add_argument(
        "--start", choices=("a", "b"), help="restrict the first descent letter"
    )
    oracle.add_argument(
        "--end", choices=("a", "b"), help="restrict the last descent letter"
    )
    _add_format_flag(oracle)
    oracle.set_defaults(func=_cmd_oracle)

    spectrum = sub.add_parser(
        "spectrum", help="nonzero eigenvalues of the transfer operator"
    )
    _add_scheme_flags(spectrum)
    _add_region_flags(spectrum)
    _add_format_flag(spectrum)
    spectrum.set_defaults(func=_cmd_spectrum)

    constants = sub.add_parser(
        "constants", help="asymptotic coefficients from eigenfunction pairings"
    )
    _add_scheme_flags(constants)
    _add_region_flags(constants)
    _add_format_flag(constants)
    constants.set_defaults(func=_cmd_constants)

    verify = sub.add_parser(
        "verify", help="exact counts against the spectral prediction"
    )
    _add_scheme_flags(verify)
    _add_region_flags(verify)
    verify.add_argument(
        "--n-max", type=int, default=14, help="largest n to check (default 14)"
    )
    verify.add_argument(
        "--tol",
        type=float,
        default=3.0,
        help="multiplier on the decay bound (default 3)",
    )
    _add_format_flag(verify)
    verify.set_defaults(func=_cmd_verify)

    sequence = sub.add_parser(
        "sequence",
        help="integer sequences and identities of the wt(aa)=0, wt(bb)=2 scheme",
    )
    sequence.add_argument(
        "--preset", metavar="NAME", help="must be sec6 when given"
    )
    sequence.add_argument(
        "--n-max", type=int, default=12, help="largest n in the table (default 12)"
    )
    _add_format_flag(sequence)
    sequence.set_defaults(func=_cmd_sequence)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        report, failures = args.func(args)
    except UsageFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SchemeParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CheckFailure as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 1
    finally:
        print(f"elapsed: {time.perf_counter() - started:.3f}s", file=sys.stderr)
    _emit(report, args.format)
    for line in failures:
        print(f"check failed: {line}", file=sys.stderr)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
