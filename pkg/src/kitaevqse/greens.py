"""Krylov-subspace Green's functions, spectral functions, structure factor.

The retarded correlator for a single-site Pauli excitation c at sites
(a, b) splits into a particle-like part <GS| c_a (z - H)^-1 c_b |GS> and
a hole-like part <GS| c_a (z + H)^-1 c_b |GS>. Both are evaluated in a
multigrid subspace built on top of c|GS>: a three-term Lanczos
recursion run purely on the subspace H/S matrices yields tridiagonal
coefficients {a_n}, {b_n}, and the diagonal correlator is the standard
continued fraction in those coefficients. The hole-like part reuses the
identical machinery with the Hamiltonian negated, since
(z + H)^-1 = (z - (-H))^-1.

Off-diagonal elements come from the polarization identity
G_ab = (G+_ab - G_aa - G_bb) / 2 with G+ seeded by (c_a + c_b)|GS>;
the seed is normalized and the resulting fraction scaled back by the
squared norm, because a sum of two Pauli strings is not unitary.

No ground-energy shift is applied to z by default: the evaluation
argument is exactly z = omega + i*delta on both the subspace and the
exact-diagonalization sides, so the two are always comparable. An
optional shift flag rebases z -> z + E_GS for both parts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import oracle as oracle_mod
from .pauli import PauliSum, PauliTerm, apply_sum, gershgorin_kappa, pauli_sum, single_site
from .qse import (
    QseGroundState,
    SubspaceBasis,
    SubspaceMatrices,
    assemble_matrices,
    build_basis,
    default_time_step,
    reconstruct_state,
)
from .simulator import EvolutionOperator, StateVector

LANCZOS_B2_REL_TOL = 1e-8
LANCZOS_IMAG_TOL = 1e-8


class GreensError(ValueError):
    pass


@dataclass(frozen=True)
class ExcitationOperator:
    """Single-site Pauli used as creation/annihilation operator."""

    kind: str
    site: int

    def __post_init__(self):
        if self.kind not in "XYZ":
            raise GreensError(f"excitation kind must be X, Y or Z, got {self.kind!r}")
        if self.site < 0:
            raise GreensError("site index must be non-negative")

    def term(self, num_sites: int) -> PauliTerm:
        return single_site(self.kind, self.site, num_sites)


@dataclass(frozen=True)
class KrylovBasisConfig:
    """Multigrid parameters for the excitation subspace (tilde family)."""

    tilde_n_k: int
    tilde_n_l: int
    tilde_delta_t: float | None = None
    evolution_mode: str = "exact"
    trotter_steps: int = 1


@dataclass
class LanczosCoefficients:
    """Tridiagonal data {a_n}, {b_n} with b_0 = 0."""

    a: np.ndarray
    b: np.ndarray
    termination_index: int
    vectors: np.ndarray | None = None  # subspace coordinates of the Krylov states

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        if self.a.size != self.b.size or self.a.size == 0:
            raise GreensError("need equal-length, non-empty a and b with b[0] = 0")

    def to_json_dict(self) -> dict:
        return {
            "a": self.a.tolist(),
            "b": self.b.tolist(),
            "termination_index": self.termination_index,
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2))


@dataclass
class GreensFunctionSamples:
    energies: np.ndarray
    values: np.ndarray
    kind: str
    labels: dict

    def spectral_function(self) -> np.ndarray:
        return -np.imag(self.values) / np.pi


def continued_fraction(coeffs: LanczosCoefficients, z) -> np.ndarray | complex:
    """Evaluate 1 / (z - a0 - b1^2 / (z - a1 - ...)) bottom-up."""
    z_arr = np.asarray(z, dtype=complex)
    tail = np.zeros_like(z_arr)
    a, b = coeffs.a, coeffs.b
    with np.errstate(divide="ignore", invalid="ignore"):
        for n in range(a.size - 1, 0, -1):
            tail = b[n] ** 2 / (z_arr - a[n] - tail)
        out = 1.0 / (z_arr - a[0] - tail)
    if not np.all(np.isfinite(out)):
        raise GreensError("continued fraction hit a pole; evaluate with Im z != 0")
    return out if out.shape else complex(out)


def _regularized_inverse(s_mat: np.ndarray, threshold: float) -> tuple[np.ndarray, int]:
    eigs, vecs = np.linalg.eigh(s_mat)
    if eigs[-1] <= 0.0:
        raise GreensError("overlap matrix is numerically rank zero")
    keep = eigs > threshold * eigs[-1]
    if not np.any(keep):
        raise GreensError("overlap matrix rank-deficient beyond regularization")
    kept = vecs[:, keep]
    inv = (kept / eigs[keep]) @ kept.conj().T
    return inv, int(np.sum(keep))


def lanczos_iterate(
    psi_mats: SubspaceMatrices,
    psi0: np.ndarray,
    *,
    negate_hamiltonian: bool = False,
    kappa: float | None = None,
    s_threshold: float = 1e-10,
    keep_vectors: bool = False,
) -> LanczosCoefficients:
    """Three-term recursion a_n = psi_n^dag H psi_n, b_n^2 by the variance
    difference, psi_n = ((S^-1 H - a) psi_{n-1} - b psi_{n-2}) / b_n.

    Run in the S-orthonormalized coordinates of the regularized
    subspace, where S^-1 is exactly the identity: applying the raw
    truncated pseudo-inverse instead amplifies roundoff by the inverse
    of the smallest kept S-eigenvalue and fabricates large negative
    b^2 after a dozen steps. The transformed recursion is algebraically
    identical on the kept subspace; one re-orthogonalization pass per
    step keeps the Krylov states S-orthonormal to machine precision.

    The starting vector is S-normalized internally. Iteration stops
    when b_n^2 falls below tol = 1e-8 * (kappa/2)^2 (invariant subspace
    exhausted) or at the regularized rank of S; b_n^2 < -tol aborts.
    """
    h_mat = -psi_mats.hamiltonian if negate_hamiltonian else psi_mats.hamiltonian
    s_mat = psi_mats.overlap

    eigs, vecs = np.linalg.eigh(s_mat)
    if eigs[-1] <= 0.0:
        raise GreensError("overlap matrix is numerically rank zero")
    keep = eigs > s_threshold * eigs[-1]
    if not np.any(keep):
        raise GreensError("overlap matrix rank-deficient beyond regularization")
    rank = int(np.sum(keep))
    transform = vecs[:, keep] / np.sqrt(eigs[keep])  # X with X^dag S X = I
    h_ortho = transform.conj().T @ h_mat @ transform
    h_ortho = 0.5 * (h_ortho + h_ortho.conj().T)

    if kappa is None:
        scale = float(np.max(np.abs(h_ortho))) if h_ortho.size else 1.0
    else:
        scale = kappa / 2.0
    b2_tol = LANCZOS_B2_REL_TOL * max(scale, 1.0) ** 2

    # orthonormal coordinates of psi0: y = X^dag S psi0 = s^{1/2} U^dag psi0
    y = np.sqrt(eigs[keep]) * (vecs[:, keep].conj().T @ np.asarray(psi0, dtype=complex))
    norm0 = float(np.real(np.vdot(y, y)))
    if norm0 <= 0.0:
        raise GreensError("starting vector has non-positive S-norm")
    y = y / np.sqrt(norm0)

    a_list: list[float] = []
    b_list: list[float] = [0.0]
    basis = [y]
    prev = np.zeros_like(y)

    a_raw = complex(np.vdot(y, h_ortho @ y))
    if abs(a_raw.imag) > LANCZOS_IMAG_TOL * max(1.0, abs(a_raw.real)):
        raise GreensError(f"a_0 has imaginary residue {a_raw.imag:g}")
    a_list.append(a_raw.real)

    while len(a_list) < rank:
        n = len(a_list)
        hy = h_ortho @ y
        b2 = float(np.real(np.vdot(hy, hy))) - a_list[-1] ** 2 - b_list[-1] ** 2
        if b2 < -b2_tol:
            raise GreensError(
                f"b_{n}^2 = {b2:g} is negative beyond tolerance: ill-conditioned subspace"
            )
        if b2 <= b2_tol:
            break
        b_n = float(np.sqrt(b2))
        nxt = (hy - a_list[-1] * y - b_list[-1] * prev) / b_n
        for column in basis:
            nxt -= np.vdot(column, nxt) * column
        nxt /= np.linalg.norm(nxt)
        a_raw = complex(np.vdot(nxt, h_ortho @ nxt))
        if abs(a_raw.imag) > LANCZOS_IMAG_TOL * max(1.0, abs(a_raw.real)):
            raise GreensError(f"a_{n} has imaginary residue {a_raw.imag:g}")
        prev, y = y, nxt
        a_list.append(a_raw.real)
        b_list.append(b_n)
        basis.append(y)

    vectors = None
    if keep_vectors:
        vectors = transform @ np.column_stack(basis)  # back to psi-basis coordinates
    return LanczosCoefficients(
        a=np.array(a_list),
        b=np.array(b_list),
        termination_index=len(a_list),
        vectors=vectors,
    )


@dataclass
class GreensEngine:
    """Shared context for GF runs on one (Hamiltonian, QSE ground state).

    Caches the reconstructed ground statevector, the excitation-subspace
    evolution operator and finished diagonal curves, since the structure
    factor revisits every site's diagonal many times.
    """

    hamiltonian: PauliSum
    gs: QseGroundState
    gs_basis: SubspaceBasis
    config: KrylovBasisConfig
    s_threshold: float = 1e-12      # seed projection: keep as much span as possible
    lanczos_threshold: float = 1e-10  # recursion: favor well-conditioned spectral data
    shift_energy: bool = False
    _gs_state: StateVector | None = field(default=None, repr=False)
    _evolution: EvolutionOperator | None = field(default=None, repr=False)
    _diag_cache: dict = field(default_factory=dict, repr=False)

    @property
    def num_sites(self) -> int:
        return self.hamiltonian.num_sites

    @property
    def kappa(self) -> float:
        return gershgorin_kappa(self.hamiltonian)

    def ground_state(self) -> StateVector:
        if self._gs_state is None:
            self._gs_state = reconstruct_state(self.gs, self.gs_basis)
        return self._gs_state

    def _psi_evolution(self) -> EvolutionOperator:
        if self._evolution is None:
            if (
                self.config.evolution_mode == self.gs_basis.evolution.mode
                and self.config.trotter_steps == self.gs_basis.evolution.trotter_steps
            ):
                self._evolution = self.gs_basis.evolution  # reuse cached factorization
            else:
                self._evolution = EvolutionOperator(
                    self.hamiltonian,
                    mode=self.config.evolution_mode,
                    trotter_steps=self.config.trotter_steps,
                )
        return self._evolution

    def seed_subspace(
        self, excitation: PauliSum
    ) -> tuple[SubspaceBasis, SubspaceMatrices, np.ndarray, float]:
        """(psi basis, matrices, psi0 coefficients, seed norm squared).

        psi0 expresses excitation|GS> in the psi basis through the
        transition-matrix route; the basis itself is grown from the
        normalized seed statevector.
        """
        gs_state = self.ground_state()
        seeded = apply_sum(excitation, gs_state.amplitudes)
        norm_sq = float(np.real(np.vdot(seeded, seeded)))
        if norm_sq <= 1e-24:
            raise GreensError("excitation annihilates the ground state")
        seed_state = StateVector(seeded / np.sqrt(norm_sq), self.num_sites)

        dt = self.config.tilde_delta_t
        if dt is None:
            dt = default_time_step(self.hamiltonian)
        psi_basis = build_basis(
            seed_state, self.config.tilde_n_k, self.config.tilde_n_l, dt, self._psi_evolution()
        )
        psi_mats = assemble_matrices(psi_basis, self.hamiltonian)

        # transition matrix <psi_a| excitation |phi_b> contracted with the GS coefficients
        psi_stack = psi_basis.state_matrix()
        exc_phi = np.stack(
            [apply_sum(excitation, s.amplitudes) for s in self.gs_basis.states]
        )
        transition = psi_stack.conj() @ exc_phi.T
        rhs = transition @ self.gs.coefficients
        s_inv, _ = _regularized_inverse(psi_mats.overlap, self.s_threshold)
        psi0 = s_inv @ rhs
        return psi_basis, psi_mats, psi0, norm_sq

    def correlator(self, excitation: PauliSum, z_grid: np.ndarray) -> np.ndarray:
        """Particle plus hole resolvent for one (possibly composite) excitation."""
        _, psi_mats, psi0, norm_sq = self.seed_subspace(excitation)
        z = np.asarray(z_grid, dtype=complex)
        if self.shift_energy:
            z = z + self.gs.energy
        greater = continued_fraction(
            lanczos_iterate(psi_mats, psi0, kappa=self.kappa, s_threshold=self.lanczos_threshold), z
        )
        lesser = continued_fraction(
            lanczos_iterate(
                psi_mats, psi0, negate_hamiltonian=True, kappa=self.kappa,
                s_threshold=self.lanczos_threshold,
            ),
            z,
        )
        return norm_sq * (greater + lesser)

    def diagonal_gf(self, kind: str, site: int, z_grid: np.ndarray) -> np.ndarray:
        key = (kind, site, _grid_key(z_grid))
        if key not in self._diag_cache:
            term = ExcitationOperator(kind, site).term(self.num_sites)
            excitation = pauli_sum([term], self.num_sites)
            self._diag_cache[key] = self.correlator(excitation, z_grid)
        return self._diag_cache[key]

    def offdiagonal_gf(self, kind: str, site_a: int, site_b: int, z_grid: np.ndarray) -> np.ndarray:
        if site_a == site_b:
            raise GreensError("off-diagonal path requires distinct sites")
        combined = pauli_sum(
            [
                ExcitationOperator(kind, site_a).term(self.num_sites),
                ExcitationOperator(kind, site_b).term(self.num_sites),
            ],
            self.num_sites,
        )
        plus = self.correlator(combined, z_grid)
        g_aa = self.diagonal_gf(kind, site_a, z_grid)
        g_bb = self.diagonal_gf(kind, site_b, z_grid)
        return 0.5 * (plus - g_aa - g_bb)


def _grid_key(z_grid: np.ndarray) -> tuple:
    z = np.asarray(z_grid, dtype=complex)
    return (z.size, complex(z[0]), complex(z[-1]))


def krylov_seed(
    gs: QseGroundState,
    gs_basis: SubspaceBasis,
    c_dag: ExcitationOperator,
    cfg: KrylovBasisConfig,
    s_threshold: float = 1e-12,
) -> tuple[SubspaceBasis, np.ndarray]:
    """Excitation subspace and starting coefficients for one Pauli excitation."""
    engine = GreensEngine(gs_basis.evolution.hamiltonian, gs, gs_basis, cfg, s_threshold)
    n = engine.num_sites
    excitation = pauli_sum([c_dag.term(n)], n)
    psi_basis, _, psi0, _ = engine.seed_subspace(excitation)
    return psi_basis, psi0


def retarded_gf(
    engine: GreensEngine,
    site_a: int,
    site_b: int,
    kind: str,
    omega_grid: np.ndarray,
    delta: float,
) -> GreensFunctionSamples:
    """Retarded G_ab(omega + i delta); diagonal directly, off-diagonal via G+."""
    if delta <= 0.0:
        raise GreensError("retarded evaluation requires delta > 0")
    omega = np.asarray(omega_grid, dtype=float)
    z = omega + 1j * delta
    if site_a == site_b:
        values = engine.diagonal_gf(kind, site_a, z)
    else:
        values = engine.offdiagonal_gf(kind, site_a, site_b, z)
    return GreensFunctionSamples(
        energies=z,
        values=values,
        kind="retarded",
        labels={"site_a": site_a, "site_b": site_b, "kind": kind, "delta": delta},
    )


def dynamical_structure_factor(
    engine: GreensEngine,
    positions: np.ndarray,
    q: np.ndarray,
    omega_grid: np.ndarray,
    delta: float,
    kinds: str = "XYZ",
) -> np.ndarray:
    """(1/N) sum_mu sum_ij exp(-i q (r_i - r_j)) Im G^mumu_ij at fixed field.

    Off-diagonal elements are assembled through the polarization
    identity, diagonal curves are cached, and the (i, j)/(j, i) pair
    symmetry of the identity halves the work.
    """
    omega = np.asarray(omega_grid, dtype=float)
    z = omega + 1j * delta
    n = engine.num_sites
    q = np.asarray(q, dtype=float)
    total = np.zeros(omega.size, dtype=complex)
    for kind in kinds:
        for i in range(n):
            total += np.imag(engine.diagonal_gf(kind, i, z))
            for j in range(i + 1, n):
                im_g = np.imag(engine.offdiagonal_gf(kind, i, j, z))
                phase_ij = np.exp(-1j * q @ (positions[i] - positions[j]))
                phase_ji = np.exp(-1j * q @ (positions[j] - positions[i]))
                total += (phase_ij + phase_ji) * im_g
    total /= n
    if np.max(np.abs(total.imag)) < 1e-10 * max(1.0, np.max(np.abs(total.real))):
        return total.real
    return total


def dynamical_structure_factor_ed(
    decomp: "oracle_mod.SpectralDecomposition",
    num_sites: int,
    omega_grid: np.ndarray,
    delta: float,
    kinds: str = "XYZ",
    ground_vector: np.ndarray | None = None,
) -> np.ndarray:
    """Exact q=0 structure factor via collective-operator Lehmann weights.

    At q=0 the double site sum of Im G^mumu_ij collapses, by linearity of
    Im, to the resolvent of the collective operator sum_i sigma_i^mu.
    """
    from .pauli import apply_term

    omega = np.asarray(omega_grid, dtype=float)
    z = omega + 1j * delta
    gs = decomp.ground_vector() if ground_vector is None else ground_vector
    evecs, evals = decomp.eigenvectors, decomp.eigenvalues
    total = np.zeros(omega.size)
    for kind in kinds:
        collective = np.zeros_like(gs)
        for i in range(num_sites):
            collective += apply_term(single_site(kind, i, num_sites), gs)
        weights = np.abs(evecs.conj().T @ collective) ** 2
        resolvent = (weights[None, :] / (z[:, None] - evals[None, :])).sum(axis=1)
        resolvent += (weights[None, :] / (z[:, None] + evals[None, :])).sum(axis=1)
        total += np.imag(resolvent)
    return total / num_sites


def normalize_intensity(table: np.ndarray) -> np.ndarray:
    """Affine rescale of a whole table onto [0, 1]."""
    lo, hi = float(np.min(table)), float(np.max(table))
    if hi - lo <= 0.0:
        return np.zeros_like(table)
    return (table - lo) / (hi - lo)
