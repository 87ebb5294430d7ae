import csv
import json

import pytest

from majorantlab import expsum, load_set
from majorantlab.cli import main
from majorantlab.verify import (
    VerifyReport,
    CheckResult,
    check_sawtooth_envelope,
    suite,
)


def read_rows(path):
    body = [l for l in open(path) if not l.startswith("#")]
    parsed = list(csv.reader(body))
    return [dict(zip(parsed[0], row)) for row in parsed[1:]]


def rows_without_timing(path):
    out = []
    for rec in read_rows(path):
        rec.pop("wall_ms")
        out.append(rec)
    return out


# -------------------------------------------------------------- subcommands


def test_thresholds_c2_one_column(tmp_path):
    assert main(["thresholds", "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "thresholds.csv")
    ones = [r for r in rows if float(r["c2"]) == 1.0]
    assert len(ones) == 10
    assert all(float(r["value"]) == 2.0 for r in ones)
    # monotone in c2 for fixed c1
    for c1 in {r["c1"] for r in rows}:
        vals = [float(r["value"]) for r in rows if r["c1"] == c1]
        assert vals == sorted(vals)


def test_count_ratios_and_set_out(tmp_path):
    out_set = tmp_path / "biggest.txt"
    code = main(["count", "--N-list", "1e3,1e4,1e5", "--out", str(tmp_path),
                 "--set-out", str(out_set)])
    assert code == 0
    rows = read_rows(tmp_path / "count.csv")
    assert [int(r["N"]) for r in rows] == [10**3, 10**4, 10**5]
    assert abs(float(rows[-1]["ratio"]) - 1) < 0.05
    assert float(rows[0]["exponent"]) < 0
    back = load_set(out_set)
    assert back.spec.N == 10**5
    assert len(back.members) == int(float(rows[-1]["value"]))


def test_expsum_decay_exponents(tmp_path):
    code = main(["expsum-decay", "--N-list", "1e3,1e4,1e5",
                 "--xi-rule", "golden:1", "--out", str(tmp_path)])
    assert code == 0
    rows = read_rows(tmp_path / "expsum-decay.csv")
    assert len(rows) == 9  # three N, three frequencies (0, 1/2, golden)
    for xi in {r["xi"] for r in rows}:
        slopes = {r["exponent"] for r in rows if r["xi"] == xi}
        assert len(slopes) == 1
        assert float(slopes.pop()) < 0


def test_vdc_subcommand(tmp_path):
    code = main(["vdc", "--m-max", "3", "--levels", "10:12",
                 "--xi-rule", "0.0,0.5", "--out", str(tmp_path)])
    assert code == 0
    rows = read_rows(tmp_path / "vdc.csv")
    assert len(rows) == 3 * 2 * 3 * 2  # m, xi, N, l
    assert all(float(r["ratio"]) <= 50 for r in rows)


def test_majorant_subcommand_with_sidecar(tmp_path):
    sidecar = tmp_path / "coeffs.csv"
    code = main(["majorant", "--N-list", "256,512", "--p", "2.5",
                 "--budget", "40", "--seed", "3", "--out", str(tmp_path),
                 "--coeffs-out", str(sidecar)])
    assert code == 0
    rows = read_rows(tmp_path / "majorant.csv")
    assert len(rows) == 2
    assert all(float(r["value"]) >= 1 - 1e-9 for r in rows)
    lines = [l for l in sidecar.read_text().splitlines() if not l.startswith("#")]
    n, re, im = lines[0].split(",")
    assert abs(complex(float(re), float(im))) == pytest.approx(1.0, abs=1e-9)


def test_prop2_subcommand(tmp_path):
    code = main(["prop2", "--levels", "10:12", "--trials", "3",
                 "--out", str(tmp_path), "--seed", "5"])
    assert code == 0
    rows = read_rows(tmp_path / "prop2.csv")
    kinds = {r["quantity"] for r in rows}
    assert kinds == {"restriction_ratio_max", "mu_nu_fourier_sup"}


def test_verify_quick_passes(tmp_path, capsys):
    code = main(["verify", "--out", str(tmp_path)])
    assert code == 0
    out = capsys.readouterr().out
    assert "[FAIL]" not in out
    rows = read_rows(tmp_path / "verify.csv")
    assert all(float(r["value"]) == 1.0 for r in rows)


# ------------------------------------------------------------- exit codes


def test_exit_code_validation_error(tmp_path):
    # p below the admissible threshold for c2 > 1
    code = main(["majorant", "--c2", "1.1", "--ell2", "constant_one",
                 "--p", "2.5", "--N-list", "256", "--out", str(tmp_path)])
    assert code == 2


def test_exit_code_capacity_error(tmp_path):
    code = main(["count", "--N-list", "1e12", "--out", str(tmp_path)])
    assert code == 3


def test_exit_code_verify_failure(tmp_path, monkeypatch):
    import majorantlab.cli as cli_mod

    def fake_suite(level):
        return VerifyReport([CheckResult("x", "quick", False, "boom")])

    monkeypatch.setattr(cli_mod._verify, "suite", fake_suite)
    code = main(["verify", "--out", str(tmp_path)])
    assert code == 4


# ----------------------------------------------------------- reproducibility


def test_byte_identical_outputs_same_seed(tmp_path):
    args = ["expsum-decay", "--N-list", "1e3,1e4", "--xi-rule", "golden:1",
            "--seed", "99"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert rows_without_timing(a / "expsum-decay.csv") == \
        rows_without_timing(b / "expsum-decay.csv")


def test_identical_across_worker_counts(tmp_path):
    base = ["count", "--N-list", "1e3,3e3,1e4,3e4", "--seed", "4"]
    one, many = tmp_path / "w1", tmp_path / "w8"
    assert main(base + ["--workers", "1", "--out", str(one)]) == 0
    assert main(base + ["--workers", "8", "--out", str(many)]) == 0
    assert rows_without_timing(one / "count.csv") == \
        rows_without_timing(many / "count.csv")


def test_config_echo_and_file(tmp_path):
    cfg = tmp_path / "exp.ini"
    cfg.write_text(
        "[experiment]\nname = count\n"
        "[h1]\nfamily = log_power\nB = 1.0\nc = 1.0\n"
        "[h2]\nfamily = log_power\nB = 1.0\nc = 1.0\n"
        "[params]\nn_list = 1000,2000\nseed = 21\n")
    code = main(["--config", str(cfg), "count", "--out", str(tmp_path)])
    assert code == 0
    text = (tmp_path / "count.csv").read_text()
    assert text.startswith("#")
    assert "# seed = 21" in text
    rows = read_rows(tmp_path / "count.csv")
    assert [int(r["N"]) for r in rows] == [1000, 2000]
    # flags override the file
    code = main(["--config", str(cfg), "count", "--N-list", "500",
                 "--out", str(tmp_path)])
    rows = read_rows(tmp_path / "count.csv")
    assert [int(r["N"]) for r in rows] == [500]


def test_jsonl_mirror_matches_csv(tmp_path):
    assert main(["count", "--N-list", "1e3", "--out", str(tmp_path)]) == 0
    csv_rows = read_rows(tmp_path / "count.csv")
    lines = (tmp_path / "count.jsonl").read_text().splitlines()
    head = json.loads(lines[0])
    assert "config" in head
    recs = [json.loads(l) for l in lines[1:]]
    assert len(recs) == len(csv_rows)
    assert recs[0]["N"] == int(csv_rows[0]["N"])
    assert recs[0]["value"] == float(csv_rows[0]["value"])


# ----------------------------------------------------- verify suite details


def test_sawtooth_mutation_is_caught():
    # a sign error in the sawtooth must trip the envelope check
    def broken(x):
        return -(expsum.sawtooth(x))

    ok, _ = check_sawtooth_envelope()
    assert ok
    bad, measured = check_sawtooth_envelope(sawtooth_fn=broken)
    assert not bad


def test_suite_levels():
    quick = suite("quick")
    assert quick.all_passed
    assert all(r.level == "quick" for r in quick.results)
    with pytest.raises(ValueError):
        suite("nope")
