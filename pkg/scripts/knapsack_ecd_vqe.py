"""ECD-VQE on the 4-item knapsack: per-seed energy and argmax-probability traces."""

import argparse
from pathlib import Path

from ecdvqe import OptimizerConfig, build_knapsack, make_layout, to_pauli_hamiltonian, to_unconstrained
from ecdvqe.hilbert import BasisOutcome
from ecdvqe.vqe import extract_solution, run_ecd_vqe_seeds

TARGET = BasisOutcome(0, (6, 0))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--depth", type=int, default=5)
    ap.add_argument("--max-iter", type=int, default=200)
    ap.add_argument("--r-scale", type=float, default=0.2)
    ap.add_argument("--out", default="results/knapsack")
    args = ap.parse_args()

    problem = build_knapsack([2, 5, 7, 3], [2.5, 3, 4, 3.5], 7, 2)
    ham = to_pauli_hamiltonian(to_unconstrained(problem))
    layout = make_layout(7, (8, 8))
    config = OptimizerConfig(max_iter=args.max_iter, r_scale=args.r_scale)
    best, traces = run_ecd_vqe_seeds(ham, layout, args.depth, config, seeds=range(args.seeds))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    print("seed\treason\titers\tE_final\targmax\tp_argmax\tsolved_at\tE_within_0.5_at")
    for t in traces:
        (out / f"trace_seed{t.seed}.tsv").write_text(t.to_tsv())
        solved = t.first_iteration(lambda r: r.argmax == TARGET and r.p_argmax > 0.9)
        near = t.first_iteration(lambda r: abs(r.energy + 12) < 0.5)
        print(f"{t.seed}\t{t.reason}\t{t.final.iteration}\t{t.final.energy:.4f}\t{t.final.argmax}\t"
              f"{t.final.p_argmax:.4f}\t{solved}\t{near}")
    sol = extract_solution(best, layout, problem)
    print(f"best seed {best.seed}: x={sol.bits} objective={sol.objective} feasible={sol.feasible} "
          f"p={sol.probability:.4f}")


if __name__ == "__main__":
    main()
