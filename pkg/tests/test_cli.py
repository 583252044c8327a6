"""Command-line interface: subcommands, formats, exit codes, determinism."""

import csv
import io
import json

import pytest

from descentsum.cli import main


def run(capsys, *argv):
    rc = main(list(argv))
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def table_rows(out):
    lines = [ln for ln in out.splitlines() if ln.strip()]
    header = lines[0].split()
    rows = []
    for ln in lines[1:]:
        cells = ln.split()
        if cells[0].endswith(":"):
            break  # summary lines follow the data rows
        if len(cells) == len(header):
            rows.append(dict(zip(header, cells)))
    return header, rows


def test_oracle_sec6_agreement(capsys):
    rc, out, err = run(capsys, "oracle", "--preset", "sec6", "--n", "4")
    assert rc == 0
    assert "agreement: true" in out
    header, rows = table_rows(out)
    assert "alpha" in header
    assert {r["method"] for r in rows} == {"dp", "brute", "operator"}
    assert all(r["alpha"] == "26" for r in rows)


def test_oracle_single_method_and_refinement(capsys):
    rc, out, _ = run(capsys, "oracle", "--preset", "no-peaks", "--n", "10",
                     "--method", "dp")
    assert rc == 0
    _, rows = table_rows(out)
    assert rows[0]["alpha"] == "512"
    rc, out, _ = run(capsys, "oracle", "--preset", "sec6", "--n", "3",
                     "--method", "dp", "--start", "b", "--end", "b")
    assert rc == 0
    _, rows = table_rows(out)
    assert rows[0]["alpha"] == "2"


def test_oracle_brute_example(capsys):
    rc, out, _ = run(capsys, "oracle", "--preset", "sec5-1", "--n", "4",
                     "--method", "brute")
    assert rc == 0
    _, rows = table_rows(out)
    assert rows[0]["alpha"] == "22"


def test_oracle_brute_over_cap_is_usage_error(capsys):
    rc, out, err = run(capsys, "oracle", "--preset", "sec6", "--n", "12",
                       "--method", "brute")
    assert rc == 2
    assert "dp" in err


def test_oracle_requires_a_scheme(capsys):
    rc, _, err = run(capsys, "oracle", "--n", "4")
    assert rc == 2
    assert "--scheme" in err or "--preset" in err


def test_unknown_preset_is_usage_error(capsys):
    rc, _, err = run(capsys, "oracle", "--preset", "nope", "--n", "4")
    assert rc == 2
    assert "available" in err


def test_malformed_scheme_file_is_usage_error(tmp_path, capsys):
    bad = tmp_path / "bad.scheme"
    bad.write_text("m = 2\nwt qq = 1\n")
    rc, _, err = run(capsys, "oracle", "--scheme", str(bad), "--n", "4")
    assert rc == 2
    assert "line 2" in err


def test_scheme_file_round_trip(tmp_path, capsys):
    f = tmp_path / "tilted.scheme"
    f.write_text("m = 2\nwt aa = 1/2\nwt2 b = 3\n")
    rc, out, _ = run(capsys, "oracle", "--scheme", str(f), "--n", "5",
                     "--method", "dp")
    assert rc == 0
    _, rows = table_rows(out)
    assert rows  # parses and counts without error


def test_spectrum_sec51_table(capsys):
    rc, out, _ = run(capsys, "spectrum", "--preset", "sec5-1")
    assert rc == 0
    header, rows = table_rows(out)
    assert header[0] == "lambda_re"
    top = rows[0]
    assert abs(float(top["lambda_re"]) - 0.9240358576) < 1e-8
    assert abs(float(top["lambda_im"])) < 1e-10
    assert top["simple"] == "true"


def test_spectrum_sec6_single_root(capsys):
    rc, out, _ = run(capsys, "spectrum", "--preset", "sec6")
    assert rc == 0
    _, rows = table_rows(out)
    assert len(rows) == 1
    assert abs(float(rows[0]["lambda_re"]) - 1.0) < 1e-10


def test_spectrum_top_keeps_conjugate_pairs(capsys):
    rc, out, _ = run(capsys, "spectrum", "--preset", "sec5-1", "--top", "3")
    assert rc == 0
    _, rows = table_rows(out)
    assert len(rows) == 3
    ims = sorted(float(r["lambda_im"]) for r in rows)
    assert abs(ims[0] + ims[2]) < 1e-12  # the pair survived truncation intact


def test_spectrum_region_flags(capsys):
    rc, out, _ = run(capsys, "spectrum", "--preset", "sec5-1",
                     "--real-range", "0.5:2", "--complex-box=-1:1:-1:1")
    assert rc == 0
    _, rows = table_rows(out)
    reals = [r for r in rows if abs(float(r["lambda_im"])) < 1e-10]
    for r in reals:
        assert float(r["lambda_re"]) >= 0.5 or float(r["lambda_re"]) <= -0.5 or \
            abs(float(r["lambda_re"])) <= 1.0


def test_constants_sec6_values(capsys):
    rc, out, _ = run(capsys, "constants", "--preset", "sec6")
    assert rc == 0
    _, rows = table_rows(out)
    assert abs(float(rows[0]["const_re"]) - 1.0861612696) < 1e-9
    assert abs(float(rows[0]["phi_psi_re"]) - 0.0735758882) < 1e-9


def test_constants_refuse_asymmetric_scheme(tmp_path, capsys):
    f = tmp_path / "lop.scheme"
    f.write_text("m = 3\nwt aab = 0\n")
    rc, _, err = run(capsys, "constants", "--scheme", str(f))
    assert rc == 1
    assert "symmetric" in err


def test_verify_sec51_top1(capsys):
    rc, out, _ = run(capsys, "verify", "--preset", "sec5-1", "--top", "1")
    assert rc == 0
    assert "r_hat: 0.493852" in out
    _, rows = table_rows(out)
    last = rows[-1]
    assert int(last["n"]) == 14
    assert float(last["abs_error"]) < float(last["bound"])


def test_verify_sec6(capsys):
    rc, out, _ = run(capsys, "verify", "--preset", "sec6", "--n-max", "12")
    assert rc == 0
    assert "none (all found eigenvalues used)" in out
    _, rows = table_rows(out)
    errs = {int(r["n"]): float(r["abs_error"]) for r in rows}
    assert errs[12] < 1e-9


def test_verify_spectrum_only_fallback_for_asymmetric(capsys):
    # no-peaks is not reversal-symmetric; verify degrades with a note
    rc, out, err = run(capsys, "verify", "--preset", "no-peaks")
    assert rc == 0
    assert "spectrum only" in err or "spectrum-only" in out + err


def test_verify_validation(capsys):
    rc, _, err = run(capsys, "verify", "--preset", "sec6", "--n-max", "1")
    assert rc == 2
    rc, _, err = run(capsys, "verify", "--preset", "sec6", "--tol", "-1")
    assert rc == 2


def test_sequence_default(capsys):
    rc, out, _ = run(capsys, "sequence")
    assert rc == 0
    assert "integral-equation check through order 12: ok" in out
    assert "fails as expected" in out
    _, rows = table_rows(out)
    by_n = {int(r["n"]): r for r in rows}
    assert by_n[4]["total"] == "26"
    assert by_n[4]["bb"] == "9"
    assert by_n[2]["nearest_bb"] == "ok"
    assert by_n[2]["nearest_aa"] == "-"  # below its threshold
    assert by_n[12]["derangement_ok"] == "true"


def test_sequence_rejects_other_presets(capsys):
    rc, _, err = run(capsys, "sequence", "--preset", "sec5-1")
    assert rc == 2


def test_sequence_n_max_validation(capsys):
    rc, _, err = run(capsys, "sequence", "--n-max", "3")
    assert rc == 2


def test_json_format(capsys):
    rc, out, _ = run(capsys, "oracle", "--preset", "sec6", "--n", "4",
                     "--format", "json")
    assert rc == 0
    doc = json.loads(out)
    assert doc["command"] == "oracle"
    assert "agreement: true" in doc["summary"]
    assert any(row["alpha"] == "26" for row in doc["rows"])


def test_json_spectrum_numbers_are_numbers(capsys):
    rc, out, _ = run(capsys, "spectrum", "--preset", "sec6", "--format", "json")
    doc = json.loads(out)
    assert isinstance(doc["rows"][0]["lambda_re"], float)


def test_csv_format(capsys):
    rc, out, _ = run(capsys, "spectrum", "--preset", "sec6", "--format", "csv")
    assert rc == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert abs(float(rows[0]["lambda_re"]) - 1.0) < 1e-10


def test_stdout_is_deterministic(capsys):
    _, out1, _ = run(capsys, "spectrum", "--preset", "sec5-1", "--format", "json")
    _, out2, _ = run(capsys, "spectrum", "--preset", "sec5-1", "--format", "json")
    assert out1 == out2


def test_timing_goes_to_stderr_not_stdout(capsys):
    rc, out, err = run(capsys, "oracle", "--preset", "sec6", "--n", "4")
    assert "elapsed" in err
    assert "elapsed" not in out


def test_bad_flag_value_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["oracle", "--preset", "sec6", "--n", "4", "--method", "nope"])
    assert exc.value.code == 2
