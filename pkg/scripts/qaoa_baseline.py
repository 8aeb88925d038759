"""QAOA on the knapsack Hamiltonian: best ground-state probability against layer count."""

import argparse
import json
from pathlib import Path

from ecdvqe import OptimizerConfig, build_knapsack, to_pauli_hamiltonian, to_unconstrained
from ecdvqe.qaoa import qaoa_layer_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--layers", default="1,5,10,15,20")
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--max-iter", type=int, default=150)
    ap.add_argument("--out", default="results/qaoa")
    args = ap.parse_args()

    ham = to_pauli_hamiltonian(to_unconstrained(build_knapsack([2, 5, 7, 3], [2.5, 3, 4, 3.5], 7, 2)))
    layers = [int(v) for v in args.layers.split(",")]
    results = qaoa_layer_sweep(ham, layers, args.trials, OptimizerConfig(max_iter=args.max_iter))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = ["p\tbest_probability\tbest_energy\tbest_seed"]
    for r in results:
        rows.append(f"{r.layers}\t{r.best.solution_probability:.6f}\t{r.best.energy:.6f}\t{r.best.seed}")
        (out / f"distribution_p{r.layers}.json").write_text(json.dumps(r.distribution_records(), indent=1))
    (out / "probability_vs_layers.tsv").write_text("\n".join(rows) + "\n")
    print("\n".join(rows))


if __name__ == "__main__":
    main()
