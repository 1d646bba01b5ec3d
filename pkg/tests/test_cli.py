import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from rankzeta.cli import main


def rows(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.reader(lines))


def run(*argv):
    return main([str(a) for a in argv])


class TestAptable:
    def test_table1(self, tmp_path, table1):
        out = tmp_path / "ap.csv"
        assert run("aptable", "--curve", "E6", "--X", 173, "--no-cache", "--out", out) == 0
        body = rows(out)
        assert body[0] == ["p", "a_p", "reduction"] and len(body) == 41
        assert {int(p): int(a) for p, a, _ in body[1:]} == table1
        assert [r[2] for r in body[1:4]] == ["bad", "bad", "good"]

    def test_stdout(self, capsys):
        assert run("aptable", "--curve", "E1", "--X", 10, "--no-cache") == 0
        text = capsys.readouterr().out
        assert "# command: aptable" in text and "2,-2,good" in text

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for p in (a, b):
            assert run("aptable", "--curve", "E2", "--X", 3000, "--cache-dir", tmp_path / "c",
                       "--out", p) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_module_entry(self, tmp_path):
        out = tmp_path / "m.csv"
        res = subprocess.run([sys.executable, "-m", "rankzeta", "aptable", "--curve", "E1",
                              "--X", "50", "--no-cache", "--out", str(out)], capture_output=True)
        assert res.returncode == 0 and len(rows(out)) == 16


class TestErrors:
    def test_singular(self, tmp_path, capsys):
        out = tmp_path / "x.csv"
        assert run("aptable", "--curve", "[0,0,0,0,0]", "--X", 100, "--out", out) == 3
        assert capsys.readouterr().err.startswith("error[singular-curve]")
        assert not out.exists()
        assert list(tmp_path.iterdir()) == []

    def test_parse(self, capsys):
        assert run("aptable", "--curve", "[0,0,1]", "--X", 10, "--no-cache") == 2
        assert "error[parse]" in capsys.readouterr().err

    def test_domain(self, capsys):
        assert run("zplot", "--zeta", "--d", 5, "--t", "0:1:0.1") == 4
        assert run("zplot", "--zeta", "--t", "1:0:0.1") == 4
        assert "error[domain]" in capsys.readouterr().err

    def test_zeros_no_partial(self, tmp_path):
        out = tmp_path / "z.txt"
        assert run("zeros", "--zeta", "--out", out) == 4
        assert list(tmp_path.iterdir()) == []


class TestCommands:
    def test_bias(self, tmp_path):
        out, cp = tmp_path / "b.json", tmp_path / "b.csv"
        assert run("bias", "--curve", "E1", "--X", 100, "--no-cache", "--out", out,
                   "--checkpoints", cp) == 0
        rep = json.loads(out.read_text())
        assert rep["rank"] == 1 and rep["X"] == 100
        body = rows(cp)
        assert body[0] == ["x", "S_E", "bias_to_date"]
        assert float(body[-1][2]) == pytest.approx(rep["bias_mean"])

    def test_zplot_zeta_sign_changes(self, tmp_path):
        out = tmp_path / "z.csv"
        assert run("zplot", "--zeta", "--t", "0:50:0.05", "--out", out) == 0
        body = np.array(rows(out)[1:], dtype=float)
        assert len(body) == 1001
        t, z = body[:, 0], body[:, 1]
        flips = t[:-1][np.sign(z[:-1]) != np.sign(z[1:])]
        zeros = [14.134725, 21.022040, 25.010858, 30.424876, 32.935062, 37.586178,
                 40.918719, 43.327073, 48.005151, 49.773832]
        assert len(flips) == len(zeros)
        assert np.all(np.abs(flips + 0.025 - zeros) < 0.05)

    def test_zplot_curve(self, tmp_path):
        out = tmp_path / "e.csv"
        assert run("zplot", "--curve", "E1", "--t", "0:10:0.5", "--no-cache", "--out", out) == 0
        body = np.array(rows(out)[1:], dtype=float)
        assert abs(body[0, 1]) < 1e-8

    def test_zeros_zeta(self, tmp_path, reference_zeros):
        out = tmp_path / "z.txt"
        assert run("zeros", "--zeta", "--count", 20, "--out", out) == 0
        got = np.loadtxt(out, comments="#")
        assert np.allclose(got, reference_zeros[:20], atol=1e-9)
        meta = json.loads((tmp_path / "z.txt.json").read_text())
        assert meta["complete"] is True and meta["count"] == 20
        assert reference_zeros[19] < meta["height"] < reference_zeros[20]

    def test_zeros_chi(self, tmp_path):
        out = tmp_path / "c.txt"
        assert run("zeros", "--d", 5, "--T", 15, "--out", out) == 0
        assert (tmp_path / "c.txt.json").exists()
        assert len(np.atleast_1d(np.loadtxt(out, comments="#"))) >= 2

    def test_paircorr_table(self, tmp_path):
        zt = tmp_path / "z.txt"
        assert run("zeros", "--zeta", "--count", 200, "--out", zt) == 0
        out = tmp_path / "pc.csv"
        assert run("paircorr", "--zeros", zt, "--lo", 0, "--hi", 5, "--bin", 0.25, "--out", out) == 0
        body = rows(out)
        assert body[0] == ["bin_left", "bin_right", "value", "prediction", "main"]
        assert len(body) == 21
        text = out.read_text()
        assert "L2_full" in text and "L2_main" in text

    def test_density_small_family(self, tmp_path):
        out = tmp_path / "d.csv"
        assert run("density", "--X", 200, "--T", 4, "--bin", 0.5, "--out", out) == 0
        body = np.array(rows(out)[1:], dtype=float)
        assert len(body) == 8 and np.all(body[:, 2] >= 0)

    @pytest.mark.parametrize("kind,extra", [("gue", []), ("symplectic", []),
                                            ("density", ["--d", 5]),
                                            ("rank-ratio", ["--curve", "E6", "--no-cache"]),
                                            ("paircorr", ["--T", 1000])])
    def test_predict(self, tmp_path, kind, extra):
        out = tmp_path / "p.csv"
        assert run("predict", "--kind", kind, "--x", "0.5:5:0.5", *extra, "--out", out) == 0
        body = rows(out)
        assert body[0] == ["abscissa", "value", "label"] and len(body) == 11
