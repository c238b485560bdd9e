"""Quantum subspace expansion: multigrid basis, H/S assembly, eigensolve.

Basis states are time evolutions of a reference state on a two-level
grid: a coarse stride of (n_k+1) time steps raised to the power l, then
k fine steps on top. Index order is l ascending, k ascending within
each l, so matrices are reproducible across runs.

The generalized eigenproblem H phi = E S phi is solved by canonical
orthogonalization: eigendecompose S, drop the near-null directions,
transform to an ordinary Hermitian problem, solve densely. Spectral
truncation (rather than a ridge term) keeps the solution inside the
span of the basis, so the variational bound on the energy survives
regularization.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .pauli import PauliSum, apply_sum, gershgorin_kappa
from .simulator import EvolutionOperator, StateVector, evolve, evolve_times

DEFAULT_S_THRESHOLD = 1e-12
HERMITICITY_TOL = 1e-10


class QseError(ValueError):
    pass


@dataclass(frozen=True)
class MultigridIndex:
    """(l, k) position on the two-level time grid."""

    l: int
    k: int


def multigrid_indices(n_k: int, n_l: int) -> list[MultigridIndex]:
    """All (l, k) pairs, l ascending then k ascending.

    k spans (0, n_k) for l > 0, (-n_k, 0) for l < 0 and (-n_k, n_k) for
    l = 0, which makes the total count 2(n_l+1)(n_k+1) - 1.
    """
    if n_k < 0 or n_l < 0:
        raise QseError("n_k and n_l must be non-negative")
    out: list[MultigridIndex] = []
    for l in range(-n_l, n_l + 1):
        if l > 0:
            ks = range(0, n_k + 1)
        elif l < 0:
            ks = range(-n_k, 1)
        else:
            ks = range(-n_k, n_k + 1)
        out.extend(MultigridIndex(l, k) for k in ks)
    return out


def basis_size(n_k: int, n_l: int) -> int:
    return 2 * (n_l + 1) * (n_k + 1) - 1


def default_time_step(h: PauliSum) -> float:
    """2*pi over the Gershgorin spectral-width bound."""
    return 2.0 * np.pi / gershgorin_kappa(h)


@dataclass
class SubspaceBasis:
    reference: StateVector
    indices: list[MultigridIndex]
    states: list[StateVector]
    delta_t: float
    evolution: EvolutionOperator

    def __len__(self) -> int:
        return len(self.states)

    def state_matrix(self) -> np.ndarray:
        """(n_phi, 2^N) row-stacked amplitudes."""
        return np.stack([s.amplitudes for s in self.states])


def build_basis(
    ref: StateVector,
    n_k: int,
    n_l: int,
    delta_t: float,
    evolution: EvolutionOperator,
) -> SubspaceBasis:
    """Evolve the reference onto the two-level multigrid.

    state(l, k) = V(k dt) (V((n_k+1) dt))^l ref, with negative l using
    the inverse coarse evolution. In trotter2 mode each V application is
    one product-formula evolution over its full time argument, so the
    step count per basis state stays at r*(|l|+1).
    """
    if delta_t <= 0.0:
        raise QseError("delta_t must be positive")
    indices = multigrid_indices(n_k, n_l)
    coarse_t = (n_k + 1) * delta_t

    if evolution.mode == "exact":
        # V(k dt) V(coarse)^l = V(k dt + l coarse) exactly; batch through
        # the cached eigenbasis in one pass.
        times = [idx.l * coarse_t + idx.k * delta_t for idx in indices]
        stacked = evolve_times(evolution, ref, times)
        states = [StateVector(row.copy(), ref.num_sites) for row in stacked]
        return SubspaceBasis(ref, indices, states, delta_t, evolution)

    anchors: dict[int, StateVector] = {0: ref.copy()}
    for l in range(1, n_l + 1):
        anchors[l] = evolve(anchors[l - 1], evolution, coarse_t)
        anchors[-l] = evolve(anchors[-(l - 1)], evolution, -coarse_t)

    states = []
    for idx in indices:
        if idx.k == 0:
            states.append(anchors[idx.l].copy())
        else:
            states.append(evolve(anchors[idx.l], evolution, idx.k * delta_t))
    return SubspaceBasis(ref, indices, states, delta_t, evolution)


@dataclass
class SubspaceMatrices:
    hamiltonian: np.ndarray
    overlap: np.ndarray
    assembly_mode: str
    hoa_tau: float | None = None

    @property
    def size(self) -> int:
        return self.overlap.shape[0]

    def to_json_dict(self) -> dict:
        return {
            "assembly_mode": self.assembly_mode,
            "hoa_tau": self.hoa_tau,
            "hamiltonian_re": self.hamiltonian.real.tolist(),
            "hamiltonian_im": self.hamiltonian.imag.tolist(),
            "overlap_re": self.overlap.real.tolist(),
            "overlap_im": self.overlap.imag.tolist(),
        }

    def save_json(self, path) -> None:
        import json
        from pathlib import Path

        Path(path).write_text(json.dumps(self.to_json_dict()))

    def save_csv(self, path) -> None:
        """Flat (matrix, row, col, re, im) listing for offline inspection."""
        from pathlib import Path

        lines = ["matrix,row,col,re,im"]
        for name, mat in (("H", self.hamiltonian), ("S", self.overlap)):
            for i in range(mat.shape[0]):
                for j in range(mat.shape[1]):
                    lines.append(f"{name},{i},{j},{mat[i, j].real!r},{mat[i, j].imag!r}")
        Path(path).write_text("\n".join(lines) + "\n")


def assemble_matrices(
    basis: SubspaceBasis,
    h: PauliSum,
    mode: str = "exact",
    hoa_tau: float | None = None,
) -> SubspaceMatrices:
    """Fill H_ab = <a|H|b> and S_ab = <a|b> over the basis.

    mode "exact" applies the Hamiltonian directly. Mode "hoa" replaces
    it with a central sine difference of evolution overlaps,
    (<a|V(-tau)|b> - <a|V(tau)|b>) / (2i tau), hermitized; the relative
    error is O((tau*kappa)^2) and tau*kappa >= 1 is rejected outright.
    """
    phi = basis.state_matrix()
    s_mat = phi.conj() @ phi.T

    if mode == "exact":
        h_phi = np.stack([apply_sum(h, s.amplitudes) for s in basis.states])
        h_mat = phi.conj() @ h_phi.T
        residual = np.max(np.abs(h_mat - h_mat.conj().T))
        if residual > HERMITICITY_TOL * max(1.0, np.max(np.abs(h_mat))):
            raise QseError(f"assembled H has hermiticity residual {residual:g}")
        h_mat = 0.5 * (h_mat + h_mat.conj().T)
    elif mode == "hoa":
        if hoa_tau is None or hoa_tau <= 0.0:
            raise QseError("hoa mode requires a positive tau")
        kappa = gershgorin_kappa(h)
        if hoa_tau * kappa > 1.0:
            raise QseError(
                f"tau*kappa = {hoa_tau * kappa:g} > 1: sine-difference approximation invalid"
            )
        fwd = np.stack([evolve(s, basis.evolution, hoa_tau).amplitudes for s in basis.states])
        bwd = np.stack([evolve(s, basis.evolution, -hoa_tau).amplitudes for s in basis.states])
        raw = (phi.conj() @ bwd.T - phi.conj() @ fwd.T) / (2j * hoa_tau)
        h_mat = 0.5 * (raw + raw.conj().T)
    else:
        raise QseError(f"unknown assembly mode {mode!r}")

    s_mat = 0.5 * (s_mat + s_mat.conj().T)
    return SubspaceMatrices(h_mat, s_mat, mode, hoa_tau if mode == "hoa" else None)


def perturb_matrices(
    mats: SubspaceMatrices, sigma: float, rng: np.random.Generator
) -> SubspaceMatrices:
    """Additive complex Gaussian noise on every entry, then re-hermitized.

    Diagnostic stand-in for finite-shot overlap estimation noise.
    """
    def noisy(mat: np.ndarray) -> np.ndarray:
        noise = sigma * (rng.normal(size=mat.shape) + 1j * rng.normal(size=mat.shape))
        out = mat + noise
        return 0.5 * (out + out.conj().T)

    return SubspaceMatrices(noisy(mats.hamiltonian), noisy(mats.overlap), mats.assembly_mode, mats.hoa_tau)


@dataclass
class QseGroundState:
    coefficients: np.ndarray
    energy: float
    regularization_report: dict

    @property
    def basis_size(self) -> int:
        return self.coefficients.size


def solve_ground_state(
    mats: SubspaceMatrices,
    threshold: float = DEFAULT_S_THRESHOLD,
    psd_tol: float = 1e-12,
) -> QseGroundState:
    """Minimal generalized eigenpair on the regularized subspace.

    The returned coefficient vector is S-normalized. The overlap matrix
    must be PSD within ``psd_tol`` (relative to its largest eigenvalue);
    directions with S-eigenvalue below ``threshold`` times the largest
    are discarded before the transformed Hermitian solve.
    """
    s_mat, h_mat = mats.overlap, mats.hamiltonian
    for name, mat in (("S", s_mat), ("H", h_mat)):
        residual = np.max(np.abs(mat - mat.conj().T))
        if residual > 1e-8 * max(1.0, np.max(np.abs(mat))):
            raise QseError(f"{name} is not Hermitian (residual {residual:g})")

    s_eigs, s_vecs = np.linalg.eigh(s_mat)
    s_max = float(s_eigs[-1])
    if s_max <= 0.0:
        raise QseError("overlap matrix is numerically rank zero")
    if s_eigs[0] < -psd_tol * s_max:
        raise QseError(f"overlap matrix is not PSD: min eigenvalue {s_eigs[0]:g}")

    keep = s_eigs > threshold * s_max
    if not np.any(keep):
        raise QseError("regularization discarded the entire subspace")
    transform = s_vecs[:, keep] / np.sqrt(s_eigs[keep])
    h_ortho = transform.conj().T @ h_mat @ transform
    h_ortho = 0.5 * (h_ortho + h_ortho.conj().T)
    evals, evecs = np.linalg.eigh(h_ortho)
    coeffs = transform @ evecs[:, 0]

    report = {
        "s_eigenvalues": s_eigs.tolist(),
        "threshold": threshold,
        "kept": int(np.sum(keep)),
        "discarded": int(np.sum(~keep)),
    }
    return QseGroundState(coefficients=coeffs, energy=float(evals[0]), regularization_report=report)


def reconstruct_state(gs: QseGroundState, basis: SubspaceBasis) -> StateVector:
    """Sum the basis states with the solved coefficients (unit norm by S-normalization)."""
    amps = basis.state_matrix().T @ gs.coefficients
    return StateVector(amps, basis.reference.num_sites)


def prepare_qse_ground_state(
    reference: StateVector,
    h: PauliSum,
    n_k: int,
    n_l: int,
    *,
    evolution_mode: str = "exact",
    trotter_steps: int = 1,
    delta_t: float | None = None,
    assembly_mode: str = "exact",
    hoa_tau: float | None = None,
    threshold: float = DEFAULT_S_THRESHOLD,
    evolution: EvolutionOperator | None = None,
) -> tuple[QseGroundState, SubspaceBasis, SubspaceMatrices]:
    """One-call pipeline: basis, matrices, solve.

    Pass a prebuilt ``evolution`` to reuse its cached factorization
    across many calls on the same Hamiltonian.
    """
    dt = default_time_step(h) if delta_t is None else delta_t
    op = evolution if evolution is not None else EvolutionOperator(
        h, mode=evolution_mode, trotter_steps=trotter_steps
    )
    basis = build_basis(reference, n_k, n_l, dt, op)
    mats = assemble_matrices(basis, h, mode=assembly_mode, hoa_tau=hoa_tau)
    gs = solve_ground_state(mats, threshold=threshold)
    return gs, basis, mats


def qse_energy_curve(
    reference: StateVector,
    h: PauliSum,
    shape_pairs: Sequence[tuple[int, int]],
    *,
    exact_energy: float,
    evolution_mode: str = "exact",
    trotter_steps: Sequence[int] = (1,),
    delta_t: float | None = None,
    threshold: float = DEFAULT_S_THRESHOLD,
) -> list[dict]:
    """Energy-distance sweep over basis shapes and, when Trotterized, step counts.

    Returns one row dict per (n_l, n_k, r) with keys
    (n_l, n_k, n_phi, r, mode, energy, delta_e). Exact evolution records
    r = 0 since no step count applies.
    """
    rows: list[dict] = []
    rs = [0] if evolution_mode == "exact" else list(trotter_steps)
    operators = {
        r: EvolutionOperator(h, mode=evolution_mode, trotter_steps=max(r, 1)) for r in rs
    }
    for n_l, n_k in shape_pairs:
        for r in rs:
            gs, _, _ = prepare_qse_ground_state(
                reference, h, n_k, n_l,
                delta_t=delta_t,
                threshold=threshold,
                evolution=operators[r],
            )
            rows.append({
                "n_l": n_l,
                "n_k": n_k,
                "n_phi": basis_size(n_k, n_l),
                "r": r,
                "mode": evolution_mode,
                "energy": gs.energy,
                "delta_e": abs(gs.energy - exact_energy),
            })
    return rows
