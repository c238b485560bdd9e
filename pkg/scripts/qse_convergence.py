#!/usr/bin/env python3
"""Subspace-expansion energy convergence: basis-shape grid and Trotter sweep.

Two tables: energy distance vs (n_l, n_k) with exact evolution, and vs the
step count r with second-order Trotterized evolution at fixed basis shape.
"""

import argparse

from kitaevqse import lattice, oracle, qse, vqe
from kitaevqse.pauli import gershgorin_kappa


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=2)
    parser.add_argument("--cols", type=int, default=2)
    parser.add_argument("--coupling", type=float, default=-1.0)
    parser.add_argument("--field", type=float, default=0.1)
    parser.add_argument("--layers", type=int, default=1, help="reference-state circuit depth")
    parser.add_argument("--max-n", type=int, default=3, help="scan n_l, n_k in 0..max-n")
    parser.add_argument("--max-r", type=int, default=10)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    lat = lattice.build_lattice(args.rows, args.cols)
    h0 = lattice.kitaev_hamiltonian(lat, args.coupling)
    h = lattice.kitaev_hamiltonian(lat, args.coupling, args.field)
    reference, _, _ = vqe.prepare_reference_state(lat, h0, layers=args.layers, seed=args.seed)
    exact_energy = oracle.diagonalize(h).ground_energy
    print(f"N={lat.num_sites}, J={args.coupling}, h^z={args.field}, exact E0={exact_energy:.12f}")
    print(f"kappa={gershgorin_kappa(h):.4f}, delta_t={qse.default_time_step(h):.6f}")

    shapes = [(n_l, n_k) for n_l in range(args.max_n + 1) for n_k in range(args.max_n + 1)]
    rows = qse.qse_energy_curve(reference, h, shapes, exact_energy=exact_energy)
    print("\nexact evolution, delta_E by basis shape:")
    print(f"{'n_l':>4} {'n_k':>4} {'n_phi':>6} {'delta_E':>12}")
    for row in rows:
        print(f"{row['n_l']:>4} {row['n_k']:>4} {row['n_phi']:>6} {row['delta_e']:>12.3e}")

    rs = list(range(1, args.max_r + 1))
    trot = qse.qse_energy_curve(
        reference, h, [(3, 3)], exact_energy=exact_energy,
        evolution_mode="trotter2", trotter_steps=rs,
    )
    print("\ntrotter2 at n_k=n_l=3, delta_E by step count:")
    print(f"{'r':>4} {'delta_E':>12}")
    for row in trot:
        print(f"{row['r']:>4} {row['delta_e']:>12.3e}")


if __name__ == "__main__":
    main()
