"""ECD-VQE on the three-constraint problem with a (4, 8) qumode layout."""

import argparse
import json
from pathlib import Path

from ecdvqe import OptimizerConfig, make_layout, to_pauli_hamiltonian, to_unconstrained
from ecdvqe.cli import load_problem
from ecdvqe.hilbert import BasisOutcome
from ecdvqe.vqe import extract_solution, run_ecd_vqe_seeds

TARGET = BasisOutcome(1, (0, 4))
DATA = Path(__file__).resolve().parents[1] / "data" / "multi_constraint.json"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--depth", type=int, default=10)
    ap.add_argument("--max-iter", type=int, default=200)
    ap.add_argument("--out", default="results/multi_constraint")
    args = ap.parse_args()

    problem = load_problem(DATA)
    ham = to_pauli_hamiltonian(to_unconstrained(problem))
    layout = make_layout(6, (4, 8))
    best, traces = run_ecd_vqe_seeds(ham, layout, args.depth, OptimizerConfig(max_iter=args.max_iter),
                                     seeds=range(args.seeds))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for t in traces:
        (out / f"trace_seed{t.seed}.tsv").write_text(t.to_tsv())
        print(t.seed, t.reason, f"E={t.final.energy:.4f}", t.final.argmax,
              "argmax=|1,0,4> from", t.first_iteration(lambda r: r.argmax == TARGET))
    (out / "histogram.json").write_text(json.dumps(best.histogram().to_records(), indent=1))
    sol = extract_solution(best, layout, problem)
    print("best:", json.dumps(sol.to_dict()))


if __name__ == "__main__":
    main()
