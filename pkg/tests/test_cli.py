import json
import subprocess
import sys

import numpy as np
import pytest

from lulu_dpt.cli import EXIT_FAIL, EXIT_IO, EXIT_OK, EXIT_USAGE, main, parse_scales, UsageError
from lulu_dpt.formats import format_pgm, parse_pgm


@pytest.fixture
def csv_442(tmp_path):
    p = tmp_path / "in.csv"
    p.write_text("4,4,2\n")
    return p


def test_decompose_cmd(tmp_path, csv_442):
    out = tmp_path / "out"
    assert main(["decompose", "--input", str(csv_442), "--output", str(out)]) == EXIT_OK
    recs = [json.loads(l) for l in (out / "pulses.jsonl").read_text().splitlines()]
    assert [r["scale"] for r in recs] == [2, 3]
    summary = json.loads((out / "summary.json").read_text())
    assert summary["source_digest"] and summary["lattice"]["boundary"] == "zero_padded"
    assert (out / "spectrum.csv").read_text().splitlines()[0] == "n,gamma_minus,gamma_plus,energy"


def test_decompose_zero_pgm(tmp_path):
    src = tmp_path / "z.pgm"
    src.write_bytes(format_pgm(np.zeros((3, 4), dtype=int))[0])
    out = tmp_path / "out"
    assert main(["decompose", "--input", str(src), "--output", str(out)]) == EXIT_OK
    assert (out / "pulses.jsonl").read_text() == ""
    assert (out / "spectrum.csv").read_text().splitlines() == ["n,gamma_minus,gamma_plus,energy"]


def test_malformed_csv(tmp_path, capsys):
    src = tmp_path / "bad.csv"
    src.write_text("1,2\n3,oops\n")
    assert main(["decompose", "--input", str(src), "--output", str(tmp_path / "o")]) == EXIT_IO
    assert "row 2, column 2" in capsys.readouterr().err


def test_missing_input(tmp_path):
    assert main(["decompose", "--input", str(tmp_path / "nope.csv"), "--output", str(tmp_path)]) == EXIT_IO


def test_filter_band(tmp_path, csv_442):
    out = tmp_path / "o.csv"
    assert main(["filter", "--input", str(csv_442), "--scales", "3:3", "--output", str(out)]) == EXIT_OK
    assert out.read_text() == "2,2,2\n"
    assert main(["filter", "--input", str(csv_442), "--scales", "1:3", "--output", str(out)]) == EXIT_OK
    assert out.read_text() == "4,4,2\n"


def test_filter_bad_band(tmp_path, csv_442):
    args = ["filter", "--input", str(csv_442), "--output", str(tmp_path / "o.csv")]
    assert main(args + ["--scales", "3:2"]) == EXIT_USAGE
    assert main(args + ["--scales", "0:2"]) == EXIT_USAGE
    with pytest.raises(UsageError):
        parse_scales("2")


def test_size_guard(tmp_path, csv_442):
    args = ["decompose", "--input", str(csv_442), "--output", str(tmp_path / "o"), "--max-cells", "2"]
    assert main(args) == EXIT_USAGE


def test_eight_connectivity_needs_2d(tmp_path, csv_442):
    args = ["decompose", "--input", str(csv_442), "--output", str(tmp_path / "o"), "--connectivity", "8"]
    assert main(args) == EXIT_USAGE


def test_pgm_filter_full_band_exact(tmp_path):
    rng = np.random.default_rng(0)
    img = rng.integers(0, 256, size=(12, 10))
    src = tmp_path / "a.pgm"
    src.write_bytes(format_pgm(img)[0])
    out = tmp_path / "b.pgm"
    assert main(["filter", "--input", str(src), "--scales", "1:", "--output", str(out),
                 "--connectivity", "8"]) == EXIT_OK
    back, _ = parse_pgm(out.read_bytes())
    assert np.array_equal(back, img)


@pytest.mark.parametrize("boundary", ["zero", "domain"])
def test_decompose_reconstruct_round_trip(tmp_path, boundary):
    rng = np.random.default_rng(1)
    arr = rng.integers(-5, 9, size=(7, 9))
    src = tmp_path / "a.csv"
    src.write_text("\n".join(",".join(map(str, r)) for r in arr) + "\n")
    out = tmp_path / "dec"
    assert main(["decompose", "--input", str(src), "--output", str(out), "--boundary", boundary]) == EXIT_OK
    rec = tmp_path / "r.csv"
    assert main(["reconstruct", "--input", str(out), "--output", str(rec)]) == EXIT_OK
    assert rec.read_text() == src.read_text()


def test_verify_deterministic(tmp_path):
    cfg = tmp_path / "suite.cfg"
    cfg.write_text("# small suite\nseed = 5\ntrials = 5\nn_values = 1, 2\nshapes = 3x4, 9\noperators = L1.U1, U2\n")
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["verify", "--config", str(cfg), "--output", str(a)]) == EXIT_OK
    assert main(["verify", "--config", str(cfg), "--output", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["verdict"] == "pass"


def test_verify_injected_fault(tmp_path, capsys):
    cfg = tmp_path / "suite.cfg"
    cfg.write_text("trials = 8\nn_values = 1\nshapes = 8\n")
    assert main(["verify", "--config", str(cfg), "--inject-fault"]) == EXIT_FAIL
    assert "witness" in capsys.readouterr().err


def test_verify_default_seed(tmp_path):
    assert main(["verify", "--output", str(tmp_path / "r.json")]) == EXIT_OK


def test_module_entry_point(tmp_path, csv_442):
    res = subprocess.run(
        [sys.executable, "-m", "lulu_dpt", "filter", "--input", str(csv_442), "--scales", "2:2",
         "--output", str(tmp_path / "o.csv")],
        capture_output=True, text=True,
    )
    assert res.returncode == 0, res.stderr
    assert (tmp_path / "o.csv").read_text() == "2,2,0\n"
