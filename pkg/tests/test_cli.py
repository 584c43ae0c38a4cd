import csv
import io
import json

import pytest

from jacobi_capacity.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


class TestCommands:
    def test_capacity(self, capsys):
        code, out, _ = run(capsys, "capacity", "--dist-a", "nonfading", "--dist-b", "nonfading",
                           "-M", "200", "--protocol", "TDMA", "--trials", "4", "--power", "1")
        assert code == 0
        (row,) = rows(out)
        assert row["seed"] == "0" and row["protocol"] == "TDMA"
        assert float(row["mean_nats"]) == pytest.approx(0.9624, abs=0.01)

    def test_snr_db(self, capsys):
        code, out, _ = run(capsys, "capacity", "-M", "50", "--trials", "2", "--snr-db", "10,20")
        assert code == 0
        assert [float(r["P"]) for r in rows(out)] == pytest.approx([10.0, 100.0])

    def test_bounds_records_seed(self, capsys):
        code, out, _ = run(capsys, "bounds", "-K", "2", "--n-max", "2", "--trials", "500", "--seed", "9")
        assert code == 0
        assert out.startswith("# bounds seed=9")
        assert len(rows(out)) == 2

    def test_tdma_offset(self, capsys):
        code, out, _ = run(capsys, "tdma-offset")
        assert float(rows(out)[0]["Linf_bits"]) == pytest.approx(0.8327, abs=1e-4)

    def test_closed_form_json(self, capsys):
        code, out, _ = run(capsys, "closed-form", "--power", "1", "--format", "json")
        data = json.loads(out)
        assert code == 0 and {d["quantity"] for d in data} >= {"rate_nonfading", "rate_tdma_rayleigh"}

    def test_lyapunov(self, capsys):
        code, out, _ = run(capsys, "lyapunov", "-M", "500", "--reps", "3", "--format", "json")
        (row,) = json.loads(out)
        assert code == 0 and row["seed"] == 0 and "se" in row

    def test_lyapunov_bounds(self, capsys):
        code, out, _ = run(capsys, "lyapunov", "--k-max", "2", "--trials", "300")
        assert code == 0 and [r["k"] for r in rows(out)] == ["1", "2"]

    def test_figures(self, tmp_path, capsys):
        code, _, _ = run(capsys, "figures", "--n-max", "3", "--trials", "300", "--outdir", str(tmp_path))
        assert code == 0
        assert len(rows((tmp_path / "ladder_K2.csv").read_text())) == 3
        users = rows((tmp_path / "users_n2.csv").read_text())
        assert [r["K"] for r in users] == ["2", "3", "4", "6", "8", "10"]

    def test_output_file(self, tmp_path, capsys):
        path = tmp_path / "out.csv"
        assert main(["tdma-offset", "-o", str(path)]) == 0
        assert path.read_text().startswith("dist_a,")


class TestContract:
    def test_env_seed(self, capsys, monkeypatch):
        monkeypatch.setenv("JACOBI_SEED", "42")
        _, out, _ = run(capsys, "capacity", "-M", "20", "--trials", "2", "--power", "1")
        assert rows(out)[0]["seed"] == "42"

    def test_bad_env_seed(self, capsys, monkeypatch):
        monkeypatch.setenv("JACOBI_SEED", "x")
        assert run(capsys, "tdma-offset")[0] == 2

    def test_identical_across_threads(self, capsys):
        args = ["capacity", "-M", "100", "-K", "2", "--trials", "70", "--power", "1,5"]
        _, one, _ = run(capsys, *args, "--threads", "1")
        _, many, _ = run(capsys, *args, "--threads", "0")
        assert one == many

    @pytest.mark.parametrize("argv", [
        ["capacity", "--dist-a", "bogus"],
        ["capacity", "--power", "-1"],
        ["capacity", "--power", "1", "--snr-db", "0"],
        ["bounds", "--trials", "0"],
        ["lyapunov", "--lambda", "0.5"],
        ["tdma-offset", "--dist-a", "empirical:/nonexistent/file"],
    ])
    def test_bad_config_exit_2(self, capsys, argv):
        code, _, err = run(capsys, *argv)
        assert code == 2 and "error" in err

    def test_argparse_error_exit_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["capacity", "--format", "xml"])
        assert exc.value.code == 2
