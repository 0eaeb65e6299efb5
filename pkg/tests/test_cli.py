import math
import re
import subprocess
import sys

import numpy as np
import pytest

from ocksr.bench import make_planted, make_synthetic, write_csv
from ocksr.cli import build_parser, main
from ocksr.model import load_model


@pytest.fixture
def train_csv(tmp_path):
    data = make_synthetic(88, 12, d=5, seed=17)
    path = tmp_path / "train.csv"
    write_csv(path, data.samples)
    return path


def _plain_csv(tmp_path, name, X):
    path = tmp_path / name
    path.write_text("".join(",".join(repr(float(v)) for v in row) + "\n" for row in X))
    return path


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def _fields(out):
    return dict(line.split(": ", 1) for line in out.splitlines() if ": " in line)


def test_fit_tikhonov_auto(tmp_path, train_csv, capsys):
    model_path = tmp_path / "m.ocksr"
    code, out, _ = _run(capsys, "fit", "--method", "tikhonov", "--delta", "auto", "--header", train_csv, "-o", model_path)
    assert code == 0
    for key in ("iterations", "delta", "sparsity", "tau"):
        assert re.search(rf"^{key}: ", out, re.M), key
    m = load_model(model_path)
    assert m.method_tag == "tikhonov" and 0 < m.delta < 1
    assert abs(np.linalg.norm(m.alpha) - 1.0) <= 1e-10


def test_fit_lasso_sparsity(tmp_path, train_csv, capsys):
    model_path = tmp_path / "m.ocksr"
    code, out, _ = _run(capsys, "fit", "--method", "lasso", "--sparsity", "0.9", "--header", train_csv, "-o", model_path)
    assert code == 0
    m = load_model(model_path)
    assert m.n == 100
    assert int(np.sum(m.alpha == 0.0)) == 90 or "skipped" in out
    assert "sparsity: 90/100 zero coefficients" in out


def test_fit_known_fraction_lists_outliers(tmp_path, train_csv, capsys):
    model_path = tmp_path / "m.ocksr"
    code, out, _ = _run(capsys, "fit", "--method", "tikhonov-plus", "--n0", "12", "--header", train_csv, "-o", model_path)
    assert code == 0
    line = next(line for line in out.splitlines() if line.startswith("identified_outliers"))
    assert line.startswith("identified_outliers (12): ")
    listed = [int(v) for v in line.split(": ", 1)[1].split()]
    assert len(listed) == 12
    assert list(load_model(model_path).identified_outliers) == listed


def test_score_org_training_file_and_tau_override(tmp_path, train_csv, capsys):
    model_path = tmp_path / "org.ocksr"
    assert _run(capsys, "fit", "--method", "org", "--header", train_csv, "-o", model_path)[0] == 0
    out_path = tmp_path / "scores.csv"
    assert _run(capsys, "score", "--header", model_path, train_csv, "-o", out_path)[0] == 0
    rows = out_path.read_text().splitlines()
    assert rows[0] == "index,score,decision"
    scores = np.array([float(r.split(",")[1]) for r in rows[1:]])
    np.testing.assert_allclose(scores, 1.0, rtol=0, atol=1e-8)

    code, out, _ = _run(capsys, "score", "--header", "--tau", "1.5", model_path, train_csv)
    assert code == 0
    assert {r.split(",")[2] for r in out.splitlines()[1:]} == {"0"}


def test_rank_planted_outliers_last(tmp_path, capsys):
    data = make_planted()
    csv_path = _plain_csv(tmp_path, "planted.csv", data.samples)
    model_path = tmp_path / "p.ocksr"
    assert _run(capsys, "fit", csv_path, "-o", model_path)[0] == 0
    code, first, _ = _run(capsys, "rank", model_path)
    assert code == 0
    rows = first.splitlines()
    assert rows[0] == "rank,index,response"
    assert sorted(int(r.split(",")[1]) for r in rows[-4:]) == [3, 9, 14, 21]
    assert _run(capsys, "rank", model_path)[1] == first


def test_missing_and_empty_model_exit_2(tmp_path, train_csv, capsys):
    code, _, err = _run(capsys, "score", tmp_path / "nope.ocksr", train_csv)
    assert code == 2 and "error" in err
    empty = tmp_path / "empty.ocksr"
    empty.write_text("")
    assert _run(capsys, "rank", empty)[0] == 2


def test_bad_csv_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n3,x\n")
    code, _, err = _run(capsys, "fit", bad, "-o", tmp_path / "m.ocksr")
    assert code == 2 and "row 2" in err


def test_domain_error_exit_1(tmp_path, capsys):
    dup = _plain_csv(tmp_path, "dup.csv", [[0.0, 1.0], [2.0, 3.0], [0.0, 1.0]])
    code, _, err = _run(capsys, "delta-opt", dup)
    assert code == 1 and "DuplicateSamples" in err
    code, _, err = _run(capsys, "fit", dup, "-o", tmp_path / "m.ocksr")
    assert code == 1


def test_usage_error_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["fit"])
    assert info.value.code == 2
    capsys.readouterr()


def test_delta_opt_two_point_fixture(tmp_path, capsys):
    # K off-diagonal 0.96 gives eigenvalues 0.04 and 1.96
    r = math.sqrt(-2.0 * math.log(0.96))
    path = _plain_csv(tmp_path, "two.csv", [[0.0], [r]])
    code, out, _ = _run(capsys, "delta-opt", "--sigma", "1", path)
    assert code == 0
    f = _fields(out)
    assert float(f["lambda_min"]) == pytest.approx(0.04, abs=1e-12)
    assert float(f["lambda_max"]) == pytest.approx(1.96, abs=1e-12)
    assert float(f["condition"]) == pytest.approx(49.0, rel=1e-9)
    assert float(f["delta_opt_normalized_unit_diagonal"]) == pytest.approx(0.925538461538, abs=1e-6)
    assert "delta_opt_general" in f and "delta_opt_normalized_spectral" in f


def test_delta_opt_near_identity_hits_floor(tmp_path, capsys):
    path = _plain_csv(tmp_path, "far.csv", [[0.0], [1000.0], [2000.0]])
    code, out, _ = _run(capsys, "delta-opt", "--sigma", "0.1", path)
    assert code == 0
    f = _fields(out)
    for key in ("delta_opt_general", "delta_opt_normalized_unit_diagonal", "delta_opt_normalized_spectral"):
        assert f[key].endswith("[floor substituted]"), key
        assert float(f[key].split()[0]) == 1e-8


def _sweep(capsys, tmp_path, prefix, *extra):
    out_prefix = tmp_path / prefix
    code, out, _ = _run(capsys, "sweep", "--n-train", "40", "--n-test", "20", "--out-prefix", out_prefix, *extra)
    assert code == 0
    return [(tmp_path / f"{prefix}{s}").read_bytes() for s in (".csv", "_summary.csv", "_plot.dat")]


def test_sweep_record_count(tmp_path, capsys):
    files = _sweep(capsys, tmp_path, "s", "--methods", "org,tikhonov", "--levels", "0.5", "--repeats", "10")
    assert len(files[0].decode().splitlines()) == 1 + 20


def test_sweep_byte_deterministic(tmp_path, capsys):
    args = ("--levels", "0.2,0.4", "--repeats", "2")
    assert _sweep(capsys, tmp_path, "a", *args) == _sweep(capsys, tmp_path, "b", *args)
    assert _sweep(capsys, tmp_path, "c", *args, "--seed", "7") != _sweep(capsys, tmp_path, "a", *args)


def test_sweep_from_csv_data(tmp_path, capsys):
    data_path = tmp_path / "data.csv"
    assert _run(capsys, "gen-data", "--n-target", "80", "--n-outlier", "40", "--d", "4", "-o", data_path)[0] == 0
    files = _sweep(
        capsys, tmp_path, "d", "--data", data_path, "--header", "--levels", "0.2", "--repeats", "2",
        "--methods", "tikhonov,kmeans_baseline",
    )
    assert len(files[0].decode().splitlines()) == 1 + 4


def test_sweep_ranking_mode(tmp_path, capsys):
    files = _sweep(capsys, tmp_path, "r", "--ranking", "--levels", "0.3", "--repeats", "2", "--methods", "tikhonov")
    lines = files[0].decode().splitlines()[1:]
    assert len(lines) == 2 and all(float(l.split(",")[3]) >= 0.9 for l in lines)


def test_gen_data_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert _run(capsys, "gen-data", "--n-target", "10", "--n-outlier", "5", "-o", path)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    header = a.read_text().splitlines()[0].split(",")
    assert header[-1] == "label" and len(header) == 11


def test_fit_output_deterministic(tmp_path, train_csv, capsys):
    for name in ("x.ocksr", "y.ocksr"):
        assert _run(capsys, "fit", "--method", "lasso-plus", "--n0", "12", "--header", train_csv, "-o", tmp_path / name)[0] == 0
    assert (tmp_path / "x.ocksr").read_bytes() == (tmp_path / "y.ocksr").read_bytes()


def test_config_file_and_precedence(tmp_path, train_csv, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# fit settings\nmethod = lasso\nsparsity = 0.8\nheader = true\n")
    m1 = tmp_path / "c1.ocksr"
    assert _run(capsys, "fit", "--config", cfg, train_csv, "-o", m1)[0] == 0
    assert load_model(m1).method_tag == "lasso"
    assert int(np.count_nonzero(load_model(m1).alpha)) == 20
    m2 = tmp_path / "c2.ocksr"
    assert _run(capsys, "fit", "--config", cfg, "--sparsity", "0.9", train_csv, "-o", m2)[0] == 0
    assert int(np.count_nonzero(load_model(m2).alpha)) == 10

    bad = tmp_path / "bad.cfg"
    bad.write_text("no_such_flag = 1\n")
    assert _run(capsys, "fit", "--config", bad, train_csv, "-o", m2)[0] == 2


def _subcommand_parsers():
    parser = build_parser()
    return parser._subparsers._group_actions[0].choices


@pytest.mark.parametrize("name", ["fit", "score", "rank", "delta-opt", "sweep", "gen-data"])
def test_help_documents_every_flag_and_default(name):
    sub = _subcommand_parsers()[name]
    text = sub.format_help()
    for action in sub._actions:
        if action.dest == "help" or not action.option_strings:
            continue
        assert any(opt in text for opt in action.option_strings), action.dest
        if action.required:
            continue
        assert action.help, action.dest
        # argparse may wrap long defaults mid-token
        assert f"(default:{action.default})".replace(" ", "") in "".join(text.split()), action.dest


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "ocksr", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for name in ("fit", "score", "rank", "delta-opt", "sweep", "gen-data"):
        assert name in proc.stdout
