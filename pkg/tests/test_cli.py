import json
import subprocess
import sys
from pathlib import Path

import pytest

from ecdvqe.cli import (EXIT_SCHEMA, EXIT_SIZE, RunManifest, SchemaError, encode_report, load_problem,
                        main, parse_problem, solve, sweep)

DATA = Path(__file__).resolve().parents[1] / "data"
BKP = DATA / "knapsack.json"
MC = DATA / "multi_constraint.json"


def write(tmp_path, payload, name="p.json"):
    path = tmp_path / name
    path.write_text(payload if isinstance(payload, str) else json.dumps(payload))
    return path


class TestEncode:
    def test_knapsack(self, capsys):
        assert main(["encode", "--problem", str(BKP)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["num_qubits"] == 7 and report["num_terms"] == 29
        assert report["suggested_layouts"][0] == [8, 8]
        assert report["ground_state"] == {"bits": "0110000", "energy": -12.0, "outcome": "|0,6,0>"}

    def test_multi_constraint(self):
        report = encode_report(MC)
        assert report["num_terms"] == 19
        assert report["ground_state"]["outcome"] == "|1,0,4>"
        const = [r for r in report["terms"] if r["z"] == []]
        assert const == [{"coef": 32.0, "z": []}]

    def test_objective_only(self, tmp_path):
        path = write(tmp_path, {"sense": "min", "objective": [[0, 1], [1, -2]], "constraints": []})
        report = encode_report(path)
        assert report["num_qubits"] == 2
        assert {tuple(r["z"]): r["coef"] for r in report["terms"]} == {(): -0.5, (0,): -0.5, (1,): 1.0}

    def test_writes_file(self, tmp_path, capsys):
        out = tmp_path / "h.json"
        assert main(["encode", "--problem", str(BKP), "--out", str(out)]) == 0
        assert json.loads(out.read_text())["num_terms"] == 29


class TestSchema:
    @pytest.mark.parametrize("data, field", [
        ({"objective": [[0, 1]]}, "sense"),
        ({"sense": "max"}, "objective"),
        ({"sense": "max", "objective": [[0, "a"]]}, "objective[0]"),
        ({"sense": "max", "objective": [[0, 1]], "constraints": [{"coeffs": [[0, 1]], "sense": "<",
                                                                  "rhs": 1, "lambda": 1}]}, "constraints[0]"),
        ({"sense": "max", "objective": [[0, 1]], "constraints": [{"coeffs": [[0, 1]], "sense": "<=",
                                                                  "rhs": 1}]}, "constraints[0].lambda"),
        ({"sense": "max", "objective": [[0, 1]], "constraints": [{"coeffs": [[0, 1]], "sense": "<=",
                                                                  "rhs": 1, "lambda": -1}]}, "lambda"),
        ({"sense": "max", "objective": [[0, 1]], "extra": 1}, "unknown"),
    ])
    def test_field_diagnostics(self, data, field):
        with pytest.raises(SchemaError, match=field.replace("[", r"\[").replace("]", r"\]")):
            parse_problem(data)

    def test_json_line_number(self, tmp_path):
        path = write(tmp_path, '{\n  "sense": "max",\n  "objective": [[0, 1],]\n}')
        with pytest.raises(SchemaError, match="line 3"):
            load_problem(path)

    def test_exit_code(self, tmp_path, capsys):
        path = write(tmp_path, {"sense": "sideways", "objective": []})
        assert main(["encode", "--problem", str(path)]) == EXIT_SCHEMA
        assert "sense" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["solve", "--problem", str(tmp_path / "nope.json"), "--solver", "exact",
                     "--out", str(tmp_path)]) == EXIT_SCHEMA

    def test_bad_cutoffs(self, tmp_path):
        code = main(["solve", "--problem", str(BKP), "--solver", "ecd-vqe", "--cutoffs", "4,4",
                     "--out", str(tmp_path)])
        assert code == EXIT_SCHEMA

    def test_manifest_needs_problem(self):
        with pytest.raises(SchemaError):
            RunManifest.from_dict({"solver": "exact"})


class TestSolve:
    def test_exact(self, tmp_path):
        sol = solve(RunManifest(str(BKP), solver="exact", out=str(tmp_path)))
        assert sol["x"] == [0, 1, 1, 0] and sol["objective"] == 12 and sol["feasible"]
        for name in ("trace.tsv", "histogram.json", "solution.json", "metadata.json"):
            assert (tmp_path / name).exists()

    def test_every_output_embeds_manifest(self, tmp_path):
        m = RunManifest(str(MC), solver="ecd-vqe", depth=1, seeds=[0], max_iter=2, out=str(tmp_path))
        solve(m)
        for name in ("histogram.json", "solution.json", "metadata.json"):
            assert json.loads((tmp_path / name).read_text())["manifest"] == m.to_dict()
        first = (tmp_path / "trace.tsv").read_text().splitlines()[0]
        assert json.loads(first.split(": ", 1)[1]) == m.to_dict()

    def test_rerun_is_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            solve(RunManifest(str(MC), solver="ecd-vqe", depth=2, seeds=[1, 2], max_iter=4, out=str(out)))
        strip = lambda p: p.read_text().split("\n", 1)[1]  # noqa: E731  first line names the out dir
        assert strip(a / "trace.tsv") == strip(b / "trace.tsv")
        ha, hb = (json.loads((d / "histogram.json").read_text()) for d in (a, b))
        assert ha["records"] == hb["records"]

    def test_qaoa(self, tmp_path):
        sol = solve(RunManifest(str(MC), solver="qaoa", layers=1, trials=2, max_iter=5, out=str(tmp_path)))
        assert sol["ground_bits"] == "100100"
        rows = (tmp_path / "trace.tsv").read_text().splitlines()
        assert rows[1].startswith("trial\tseed") and len(rows) == 4

    def test_manifest_file_with_override(self, tmp_path):
        mpath = write(tmp_path, {"problem": str(BKP), "solver": "qaoa", "out": str(tmp_path / "o")}, "m.json")
        assert main(["solve", "--manifest", str(mpath), "--solver", "exact"]) == 0
        meta = json.loads((tmp_path / "o" / "metadata.json").read_text())
        assert meta["manifest"]["solver"] == "exact"

    def test_size_guard_exit(self, tmp_path):
        big = {"sense": "min", "objective": [[i, 1] for i in range(26)]}
        path = write(tmp_path, big)
        assert main(["solve", "--problem", str(path), "--solver", "exact", "--out", str(tmp_path)]) == EXIT_SIZE
        assert main(["solve", "--problem", str(path), "--solver", "qaoa", "--layers", "1", "--trials", "1",
                     "--out", str(tmp_path)]) == EXIT_SIZE


class TestSweep:
    def test_single_value_matches_solve(self, tmp_path):
        base = RunManifest(str(MC), solver="ecd-vqe", depth=1, seeds=[0], max_iter=3, out=str(tmp_path / "s"))
        rows = sweep(base, "kappa-tau", [0.0])
        direct = solve(RunManifest(str(MC), solver="ecd-vqe", depth=1, seeds=[0], max_iter=3,
                                   out=str(tmp_path / "d")))
        assert len(rows) == 1
        assert rows[0]["energy"] == direct["energy"]
        assert rows[0]["probability"] == direct["probability"]
        lines = (tmp_path / "s" / "sweep.tsv").read_text().splitlines()
        assert lines[1].split("\t")[0] == "kappa-tau" and len(lines) == 3

    def test_layers_axis(self, tmp_path, capsys):
        code = main(["sweep", "--problem", str(MC), "--solver", "qaoa", "--trials", "1", "--max-iter", "3",
                     "--axis", "layers", "--values", "1,2", "--out", str(tmp_path)])
        assert code == 0
        assert len(capsys.readouterr().out.strip().splitlines()) == 2

    def test_empty_axis(self, tmp_path):
        with pytest.raises(SchemaError):
            sweep(RunManifest(str(MC), out=str(tmp_path)), "depth", [])


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ecdvqe.cli", "encode", "--problem", str(MC)],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["num_qubits"] == 6
