"""Command-line driver: encode problem files, run solvers, sweep one setting.

Exit codes: 0 success, 2 schema or manifest error, 3 solver failure, 4 size guard.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .hilbert import (MeasurementHistogram, encode, make_layout, suggest_layouts)
from .noise import NoiseConfig
from .qaoa import run_qaoa
from .qubo import (BinaryProblem, LinearConstraint, SizeGuardError, exact_ground_state,
                   to_pauli_hamiltonian, to_unconstrained)
from .vqe import OptimizerConfig, extract_solution, run_ecd_vqe_seeds

EXIT_OK, EXIT_SCHEMA, EXIT_SOLVER, EXIT_SIZE = 0, 2, 3, 4
SOLVERS = ("ecd-vqe", "qaoa", "exact")
SWEEP_AXES = {"kappa-tau": "kappa_tau", "layers": "layers", "depth": "depth"}


class SchemaError(ValueError):
    pass


# -- problem files ------------------------------------------------------------------


def _pairs(value, where: str) -> tuple[tuple[int, float], ...]:
    if not isinstance(value, list):
        raise SchemaError(f"{where}: expected a list of [index, coefficient] pairs")
    out = []
    for k, item in enumerate(value):
        if (not isinstance(item, list) or len(item) != 2 or isinstance(item[0], bool)
                or not isinstance(item[0], int) or not isinstance(item[1], (int, float))):
            raise SchemaError(f"{where}[{k}]: expected [index, coefficient], got {item!r}")
        if item[0] < 0:
            raise SchemaError(f"{where}[{k}]: negative variable index {item[0]}")
        out.append((item[0], float(item[1])))
    return tuple(out)


def parse_problem(data: Any) -> BinaryProblem:
    """Build a BinaryProblem from decoded JSON, naming the offending field on error."""
    if not isinstance(data, dict):
        raise SchemaError("top level: expected an object")
    unknown = set(data) - {"sense", "objective", "constraints", "num_variables"}
    if unknown:
        raise SchemaError(f"top level: unknown field(s) {sorted(unknown)}")
    sense = data.get("sense")
    if sense not in ("max", "min"):
        raise SchemaError(f"sense: expected 'max' or 'min', got {sense!r}")
    if "objective" not in data:
        raise SchemaError("objective: missing")
    objective = _pairs(data["objective"], "objective")
    raw = data.get("constraints", [])
    if not isinstance(raw, list):
        raise SchemaError("constraints: expected a list")
    constraints = []
    for c, item in enumerate(raw):
        where = f"constraints[{c}]"
        if not isinstance(item, dict):
            raise SchemaError(f"{where}: expected an object")
        for key in ("coeffs", "sense", "rhs", "lambda"):
            if key not in item:
                raise SchemaError(f"{where}.{key}: missing")
        extra = set(item) - {"coeffs", "sense", "rhs", "lambda", "slack_bits"}
        if extra:
            raise SchemaError(f"{where}: unknown field(s) {sorted(extra)}")
        if not isinstance(item["rhs"], (int, float)) or isinstance(item["rhs"], bool):
            raise SchemaError(f"{where}.rhs: expected a number")
        if not isinstance(item["lambda"], (int, float)) or not item["lambda"] > 0:
            raise SchemaError(f"{where}.lambda: expected a positive number")
        bits = item.get("slack_bits")
        if bits is not None and (not isinstance(bits, int) or bits < 0):
            raise SchemaError(f"{where}.slack_bits: expected a nonnegative integer")
        try:
            constraints.append(LinearConstraint(_pairs(item["coeffs"], f"{where}.coeffs"), item["sense"],
                                                float(item["rhs"]), float(item["lambda"]), bits))
        except SchemaError:
            raise
        except ValueError as exc:
            raise SchemaError(f"{where}: {exc}") from None
    used = [i for i, _ in objective] + [i for con in constraints for i, _ in con.coeffs]
    n = data.get("num_variables", max(used, default=-1) + 1)
    try:
        return BinaryProblem(sense, objective, tuple(constraints), n)
    except ValueError as exc:
        raise SchemaError(f"problem: {exc}") from None


def load_problem(path: str | Path) -> BinaryProblem:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SchemaError(f"{path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        return parse_problem(data)
    except SchemaError as exc:
        raise SchemaError(f"{path}: {exc}") from None


# -- manifest -----------------------------------------------------------------------


@dataclass
class RunManifest:
    problem: str
    solver: str = "ecd-vqe"
    cutoffs: list[int] | None = None
    depth: int = 5
    layers: int = 20
    trials: int = 50
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2, 3, 4])
    shots: int = 0
    kappa_tau: float = 0.0
    max_iter: int | None = None
    out: str = "results"

    def validate(self) -> None:
        if self.solver not in SOLVERS:
            raise SchemaError(f"solver: expected one of {SOLVERS}, got {self.solver!r}")
        if self.solver == "ecd-vqe":
            if self.depth < 1:
                raise SchemaError("depth: must be >= 1")
            if not self.seeds:
                raise SchemaError("seeds: at least one seed is required")
        if self.solver == "qaoa":
            if self.layers < 1:
                raise SchemaError("layers: must be >= 1")
            if self.trials < 1:
                raise SchemaError("trials: must be >= 1")
        if self.shots < 0:
            raise SchemaError("shots: must be >= 0")
        if self.kappa_tau < 0:
            raise SchemaError("kappa_tau: must be >= 0")
        if self.max_iter is not None and self.max_iter < 1:
            raise SchemaError("max_iter: must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunManifest":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise SchemaError(f"manifest: unknown field(s) {sorted(unknown)}")
        if "problem" not in data:
            raise SchemaError("manifest.problem: missing")
        return cls(**data)

    def optimizer_config(self) -> OptimizerConfig:
        default_iter = 150 if self.solver == "qaoa" else 200
        return OptimizerConfig(max_iter=self.max_iter or default_iter, shots=self.shots,
                               noise=NoiseConfig(self.kappa_tau), seed=self.seeds[0] if self.seeds else 0)


def _dump(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=False) + "\n")


def _table(path: Path, manifest: RunManifest, header: Sequence[str], rows) -> None:
    lines = ["# manifest: " + json.dumps(manifest.to_dict(), sort_keys=True), "\t".join(header)]
    lines += ["\t".join(_cell(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def _cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


# -- solvers ------------------------------------------------------------------------


def _layout_for(manifest: RunManifest, num_qubits: int):
    cutoffs = manifest.cutoffs or list(suggest_layouts(num_qubits)[0])
    try:
        return make_layout(num_qubits, cutoffs)
    except ValueError as exc:
        raise SchemaError(f"cutoffs: {exc}") from None


def solve(manifest: RunManifest) -> dict:
    """Run one solver; returns the result summary and writes every output file."""
    manifest.validate()
    problem = load_problem(manifest.problem)
    ham = to_pauli_hamiltonian(to_unconstrained(problem))
    out = Path(manifest.out)
    out.mkdir(parents=True, exist_ok=True)
    meta = {"manifest": manifest.to_dict(), "num_qubits": ham.num_qubits, "num_terms": ham.num_terms}
    t0 = time.perf_counter()

    if manifest.solver == "exact":
        bits, energy = exact_ground_state(ham)
        x = bits[: problem.num_variables]
        solution = {"x": list(x), "bits": "".join(map(str, bits)), "energy": energy,
                    "objective": problem.objective_value(x), "feasible": problem.is_feasible(x),
                    "probability": 1.0}
        histogram = {"format": "bits", "records": [{"bits": solution["bits"], "p": 1.0}]}
        _table(out / "trace.tsv", manifest, ["bits", "energy"], [(solution["bits"], energy)])

    elif manifest.solver == "ecd-vqe":
        layout = _layout_for(manifest, ham.num_qubits)
        config = manifest.optimizer_config()
        best, traces = run_ecd_vqe_seeds(ham, layout, manifest.depth, config, seeds=manifest.seeds)
        sol = extract_solution(best, layout, problem)
        solution = sol.to_dict()
        solution["energy"] = best.final.energy
        solution["seed"] = best.seed
        hist = best.histogram()
        histogram = {"format": "fock", "layout": layout.to_dict(), "records": hist.to_records()}
        body = best.to_tsv().splitlines()
        (out / "trace.tsv").write_text(
            "# manifest: " + json.dumps(manifest.to_dict(), sort_keys=True) + "\n"
            + f"# seed: {best.seed}\n" + "\n".join(body) + "\n")
        meta["layout"] = layout.to_dict()
        meta["runs"] = [{"seed": t.seed, "final_energy": t.final.energy, "p_argmax": t.final.p_argmax,
                         "argmax": str(t.final.argmax), "iterations": t.final.iteration,
                         "reason": t.reason} for t in traces]

    else:
        config = manifest.optimizer_config()
        result = run_qaoa(ham, manifest.layers, manifest.trials, config)
        k = int(np.argmax(result.probabilities))
        bits = tuple(int(c) for c in format(k, f"0{ham.num_qubits}b"))
        x = bits[: problem.num_variables]
        solution = {"x": list(x), "bits": "".join(map(str, bits)),
                    "probability": float(result.probabilities[k]),
                    "objective": problem.objective_value(x), "feasible": problem.is_feasible(x),
                    "ground_bits": "".join(map(str, result.solution)),
                    "ground_probability": result.best.solution_probability,
                    "energy": result.best.energy, "seed": result.best.seed}
        histogram = {"format": "bits", "records": result.distribution_records()}
        _table(out / "trace.tsv", manifest,
               ["trial", "seed", "energy", "solution_probability", "iterations", "reason"],
               [(t, r.seed, r.energy, r.solution_probability, r.iterations, r.reason)
                for t, r in enumerate(result.trials)])

    meta["wall_time"] = time.perf_counter() - t0
    _dump(out / "solution.json", {"manifest": manifest.to_dict(), **solution})
    _dump(out / "histogram.json", {"manifest": manifest.to_dict(), **histogram})
    _dump(out / "metadata.json", meta)
    return solution


def sweep(manifest: RunManifest, axis: str, values: Sequence[float]) -> list[dict]:
    """One solve per axis value with the same seeds; writes sweep.tsv under manifest.out."""
    if axis not in SWEEP_AXES:
        raise SchemaError(f"axis: expected one of {sorted(SWEEP_AXES)}, got {axis!r}")
    if not values:
        raise SchemaError("values: the sweep axis is empty")
    key = SWEEP_AXES[axis]
    base = Path(manifest.out)
    rows = []
    for v in values:
        v = float(v) if key == "kappa_tau" else int(v)
        sub = replace(manifest, **{key: v}, out=str(base / f"{axis}={v}"))
        sol = solve(sub)
        rows.append({"value": v, "energy": sol.get("energy"), "probability": sol["probability"],
                     "x": "".join(map(str, sol["x"])), "objective": sol["objective"],
                     "feasible": sol["feasible"], "ground_probability": sol.get("ground_probability", "")})
    header = ["value", "energy", "probability", "x", "objective", "feasible", "ground_probability"]
    _table(base / "sweep.tsv", manifest, [axis] + header[1:], [[r[h] for h in header] for r in rows])
    return rows


def encode_report(path: str | Path) -> dict:
    problem = load_problem(path)
    ham = to_pauli_hamiltonian(to_unconstrained(problem))
    report = {"num_qubits": ham.num_qubits, "num_terms": ham.num_terms, "terms": ham.to_records(),
              "suggested_layouts": [list(c) for c in suggest_layouts(ham.num_qubits)]
              if ham.num_qubits >= 2 else []}
    try:
        bits, energy = exact_ground_state(ham)
        report["ground_state"] = {"bits": "".join(map(str, bits)), "energy": energy}
        if report["suggested_layouts"]:
            layout = make_layout(ham.num_qubits, report["suggested_layouts"][0])
            report["ground_state"]["outcome"] = str(encode(bits, layout))
    except SizeGuardError:
        pass
    return report


# -- argument handling --------------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ecdvqe", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    enc = sub.add_parser("encode", help="print the Pauli-Z Hamiltonian of a problem file")
    enc.add_argument("--problem", required=True)
    enc.add_argument("--out", help="also write the report to this JSON file")

    for name in ("solve", "sweep"):
        p = sub.add_parser(name)
        # None means "not given", so a --manifest file can supply the value
        p.add_argument("--manifest", help="JSON manifest; explicit flags override its fields")
        p.add_argument("--problem")
        p.add_argument("--solver", choices=SOLVERS)
        p.add_argument("--cutoffs", type=_int_list)
        p.add_argument("--depth", type=int)
        p.add_argument("--layers", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--seeds", type=_int_list)
        p.add_argument("--shots", type=int)
        p.add_argument("--kappa-tau", dest="kappa_tau", type=float)
        p.add_argument("--max-iter", dest="max_iter", type=int)
        p.add_argument("--out")
        if name == "sweep":
            p.add_argument("--axis", required=True, choices=sorted(SWEEP_AXES))
            p.add_argument("--values", required=True, type=_float_list)
    return parser


def manifest_from_args(args: argparse.Namespace) -> RunManifest:
    data: dict = {}
    if args.manifest:
        try:
            data = json.loads(Path(args.manifest).read_text())
        except OSError as exc:
            raise SchemaError(f"{args.manifest}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{args.manifest}: line {exc.lineno}: {exc.msg}") from None
        if not isinstance(data, dict):
            raise SchemaError(f"{args.manifest}: expected an object")
    for f in fields(RunManifest):
        value = getattr(args, f.name, None)
        if value is not None:
            data[f.name] = value
    manifest = RunManifest.from_dict(data)
    manifest.validate()
    return manifest


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "encode":
            report = encode_report(args.problem)
            text = json.dumps(report, indent=2)
            print(text)
            if args.out:
                Path(args.out).write_text(text + "\n")
            return EXIT_OK
        manifest = manifest_from_args(args)
        if args.command == "solve":
            sol = solve(manifest)
            print(json.dumps({k: v for k, v in sol.items() if k != "manifest"}))
        else:
            rows = sweep(manifest, args.axis, args.values)
            for row in rows:
                print(json.dumps(row))
        return EXIT_OK
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except SizeGuardError as exc:
        print(f"size guard: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except (ValueError, ArithmeticError, RuntimeError, NotImplementedError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
