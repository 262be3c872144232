import csv
import io
import json

import numpy as np
import pytest

from nft_toolkit import DiscreteSpectrum, NonlinearSpectrum, SampledPulse
from nft_toolkit.cli import EXIT_COUNT, EXIT_DUPLICATE, EXIT_FORMAT, EXIT_TOLERANCE, main
from nft_toolkit.io import read_pulse_csv, read_spectrum_json, write_pulse_csv, write_spectrum_json


def spectrum_file(tmp_path, eigs, qd, name="spec.json"):
    path = tmp_path / name
    write_spectrum_json(path, NonlinearSpectrum(DiscreteSpectrum(eigs, qd)))
    return path


@pytest.fixture
def ex2_file(tmp_path):
    return spectrum_file(tmp_path, [0.5j, 1j], [3.0, -6.0])


def read_csv_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestInft:
    def test_empty_spectrum_gives_zero_pulse(self, tmp_path):
        src = spectrum_file(tmp_path, [], [])
        out = tmp_path / "p.csv"
        assert main(["inft", str(src), "--out", str(out)]) == 0
        pulse, _ = read_pulse_csv(out)
        np.testing.assert_array_equal(pulse.samples, 0)

    def test_single_soliton(self, tmp_path):
        src = spectrum_file(tmp_path, [0.5j], [-1j])
        out = tmp_path / "p.csv"
        assert main(["inft", str(src), "--T0", "20", "--N", "1000", "--out", str(out)]) == 0
        pulse, _ = read_pulse_csv(out)
        np.testing.assert_allclose(np.abs(pulse.samples), 1 / np.cosh(pulse.t), atol=1e-6)

    def test_two_soliton_shape(self, ex2_file, tmp_path, capsys):
        out = tmp_path / "p.csv"
        assert main(["inft", str(ex2_file), "--T0", "5", "--out", str(out)]) == 0
        assert "warning" in capsys.readouterr().err
        pulse, _ = read_pulse_csv(out)
        assert 2.5 <= np.max(np.abs(pulse.samples)) <= 3.5
        assert pulse.n_intervals == 2048

    def test_malformed_json(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{")
        assert main(["inft", str(bad)]) == EXIT_FORMAT

    def test_duplicate_eigenvalues(self, tmp_path):
        dup = tmp_path / "dup.json"
        dup.write_text(json.dumps({"eigenvalues": [{"re": 0, "im": 1}] * 2, "qd": [{"re": 1, "im": 0}] * 2}))
        assert main(["inft", str(dup)]) == EXIT_DUPLICATE

    def test_same_input_and_output_refused(self, ex2_file):
        assert main(["inft", str(ex2_file), "--out", str(ex2_file)]) == EXIT_FORMAT


class TestNft:
    def _ex2_pulse(self, tmp_path, ex2_file, n=1024):
        path = tmp_path / "ex2.csv"
        main(["inft", str(ex2_file), "--T0", "5", "--N", str(n), "--out", str(path)])
        return path

    def test_zero_pulse(self, tmp_path):
        src = tmp_path / "z.csv"
        write_pulse_csv(src, SampledPulse.zeros(4.0, 64))
        out = tmp_path / "s.json"
        assert main(["nft", str(src), "--out", str(out)]) == 0
        spec = read_spectrum_json(out)
        assert len(spec.discrete) == 0
        np.testing.assert_allclose(spec.continuous.qc, 0, atol=1e-15)

    def test_two_soliton_fb(self, tmp_path, ex2_file):
        src = self._ex2_pulse(tmp_path, ex2_file)
        out = tmp_path / "s.json"
        assert main(["nft", str(src), "--out", str(out), "--eigenvalues", "0.5j,1j"]) == 0
        qd = read_spectrum_json(out).discrete.qd.real
        assert qd[0] == pytest.approx(3.01, abs=0.01)
        assert qd[1] == pytest.approx(-5.991, abs=0.001)

    def test_two_soliton_plain(self, tmp_path, ex2_file):
        src = self._ex2_pulse(tmp_path, ex2_file)
        out = tmp_path / "s.json"
        assert main(["nft", str(src), "--no-fb", "--out", str(out), "--eigenvalues", "0.5j,1j"]) == 0
        assert read_spectrum_json(out).discrete.qd[1].real == pytest.approx(-6.130, abs=0.001)

    def test_search_and_metadata(self, tmp_path, ex2_file):
        src = self._ex2_pulse(tmp_path, ex2_file)
        out = tmp_path / "s.json"
        argv = ["nft", str(src), "--out", str(out), "--lambda-grid", "-2:2:11", "--region", "-1:1:0.1:2",
                "--split", "argmin", "--kernel", "trapezoid"]
        assert main(argv) == 0
        doc = json.loads(out.read_text())
        assert doc["metadata"]["N"] == 1024 and doc["metadata"]["kernel"] == "trapezoid"
        assert doc["metadata"]["split"] == "argmin" and doc["metadata"]["region"]["im"] == [0.1, 2.0]
        assert len(doc["qc"]["lambda"]) == 11
        spec = read_spectrum_json(out)
        np.testing.assert_allclose(spec.discrete.eigenvalues, [0.5j, 1j], atol=1e-3)
        np.testing.assert_allclose(spec.discrete.qd, [3, -6], rtol=0.01)

    def test_off_centre_window(self, tmp_path, ex2_file):
        src = self._ex2_pulse(tmp_path, ex2_file)
        pulse, _ = read_pulse_csv(src)
        moved = tmp_path / "moved.csv"
        write_pulse_csv(moved, pulse, t_offset=2.5)
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        main(["nft", str(src), "--out", str(a), "--eigenvalues", "0.5j,1j"])
        main(["nft", str(moved), "--out", str(b), "--eigenvalues", "0.5j,1j"])
        # the same pulse delayed by 2.5 carries Q_d * exp(-2j lam 2.5)
        qa, qb = read_spectrum_json(a), read_spectrum_json(b)
        lam = np.array([0.5j, 1j])
        np.testing.assert_allclose(qb.discrete.qd, qa.discrete.qd * np.exp(-2j * lam * 2.5), rtol=1e-9)
        np.testing.assert_allclose(np.abs(qb.continuous.qc), np.abs(qa.continuous.qc), rtol=1e-9, atol=1e-15)

    def test_nonuniform_grid(self, tmp_path):
        src = tmp_path / "bad.csv"
        src.write_text("t,re_q,im_q\n0,1,0\n1,1,0\n3,1,0\n")
        assert main(["nft", str(src)]) == EXIT_FORMAT

    def test_output_is_deterministic(self, tmp_path, ex2_file):
        src = self._ex2_pulse(tmp_path, ex2_file, n=256)
        outs = []
        for k in range(2):
            out = tmp_path / f"s{k}.json"
            main(["nft", str(src), "--out", str(out)])
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_bad_flags(self, tmp_path):
        with pytest.raises(SystemExit):
            main(["nft", "x.csv", "--lambda-grid", "1:0"])
        with pytest.raises(SystemExit):
            main(["nft", "x.csv", "--kernel", "rk4"])


class TestRoundtrip:
    def test_empty(self, tmp_path, capsys):
        assert main(["roundtrip", str(spectrum_file(tmp_path, [], []))]) == 0
        assert "pass" in capsys.readouterr().out

    def test_two_soliton(self, ex2_file, capsys):
        assert main(["roundtrip", str(ex2_file), "--N", "1024", "--tol-lambda", "1e-2", "--tol-qd", "0.01"]) == 0
        out = capsys.readouterr().out
        assert out.count("ok") == 2

    def test_count_mismatch(self, ex2_file, capsys):
        assert main(["roundtrip", str(ex2_file), "--N", "512", "--region", "-1:1:0.1:0.8"]) == EXIT_COUNT
        assert "count mismatch" in capsys.readouterr().out

    def test_tolerance_failure(self, ex2_file):
        assert main(["roundtrip", str(ex2_file), "--N", "512", "--tol-qd", "1e-9"]) == EXIT_TOLERANCE

    def test_random_three_soliton(self, capsys):
        # the first three-eigenvalue draw of seed 0 (index 1)
        assert main(["roundtrip", "--random", "2", "--seed", "0"]) == 0
        out = capsys.readouterr().out
        assert "random spectrum 1 (seed 0): 3 eigenvalue(s)" in out

    def test_seeded_draws_repeat(self, capsys):
        main(["roundtrip", "--random", "2", "--seed", "3"])
        first = capsys.readouterr().out
        main(["roundtrip", "--random", "2", "--seed", "3"])
        assert capsys.readouterr().out == first


class TestConvergence:
    def test_zero_function(self, capsys):
        assert main(["convergence", "--mode", "zero"]) == 0
        rows = read_csv_rows(capsys.readouterr().out)
        assert rows and all(float(r["error"]) == 0 for r in rows)
        assert list(rows[0]) == ["N", "kernel", "quantity", "value", "error"]

    def test_table_sweep(self, tmp_path):
        out = tmp_path / "c.csv"
        assert main(["convergence", "--mode", "table1", "--out", str(out)]) == 0
        rows = read_csv_rows(out.read_text())
        fb = {(int(r["N"]), r["quantity"]): float(r["value"]) for r in rows if r["kernel"] == "trapezoid-fb"}
        assert fb[(1024, "qd(0.5j)")] == pytest.approx(3.01, abs=0.01)
        assert fb[(1024, "qd(1j)")] == pytest.approx(-5.991, abs=0.001)
        assert fb[(32, "a(0.5j)")] == pytest.approx(-1.3e-2, abs=0.1e-2)
        plain = {(int(r["N"]), r["quantity"]): float(r["value"]) for r in rows if r["kernel"] == "trapezoid"}
        assert plain[(64, "qd(1j)")] == pytest.approx(-42.35, abs=0.01)

    def test_linear_function_slope(self, capsys):
        main(["convergence", "--mode", "t"])
        rows = [r for r in read_csv_rows(capsys.readouterr().out) if r["kernel"] == "trapezoid"]
        n = np.array([float(r["N"]) for r in rows])
        err = np.array([float(r["error"]) for r in rows])
        slope = np.polyfit(np.log(n), np.log(err), 1)[0]
        assert slope == pytest.approx(-2, abs=0.2)

    def test_sech_slope(self, capsys):
        main(["convergence", "--mode", "sech"])
        rows = [r for r in read_csv_rows(capsys.readouterr().out) if r["kernel"] == "trapezoid"]
        n = np.array([float(r["N"]) for r in rows])
        err = np.array([float(r["error"]) for r in rows])
        assert np.polyfit(np.log(n), np.log(err), 1)[0] == pytest.approx(-2, abs=0.2)

    def test_output_is_deterministic(self, capsys):
        main(["convergence", "--mode", "sech"])
        first = capsys.readouterr().out
        main(["convergence", "--mode", "sech"])
        assert capsys.readouterr().out == first


class TestEvolve:
    def test_phase_factor(self, tmp_path):
        src = spectrum_file(tmp_path, [0.5j], [3.0])
        out = tmp_path / "e.json"
        assert main(["evolve", str(src), "--z", str(np.pi), "--out", str(out)]) == 0
        assert read_spectrum_json(out).discrete.qd[0] == pytest.approx(-3.0, abs=1e-12)

    def test_there_and_back(self, tmp_path, ex2_file):
        fwd, back = tmp_path / "f.json", tmp_path / "b.json"
        main(["evolve", str(ex2_file), "--z", "1.7", "--out", str(fwd)])
        main(["evolve", str(fwd), "--z", "-1.7", "--out", str(back)])
        np.testing.assert_allclose(read_spectrum_json(back).discrete.qd, [3, -6], rtol=1e-12)

    def test_requires_distance(self, ex2_file):
        with pytest.raises(SystemExit):
            main(["evolve", str(ex2_file)])
