"""Exact-diagonalization reference: spectra, ground spaces, resolvent GFs.

Everything else in the package is validated against this module, so it
stays deliberately naive: dense matrices, full Hermitian eigensolve,
Lehmann sums. Real-symmetric inputs are factorized in real arithmetic,
which covers every shipped Kitaev instance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .pauli import PauliSum, PauliTerm, apply_term, to_matrix

DEGENERACY_GAP = 1e-9


class OracleError(ValueError):
    pass


@dataclass
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    ground_degeneracy: int

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    def ground_space(self) -> np.ndarray:
        """Orthonormal columns spanning the (near-)degenerate ground space."""
        return self.eigenvectors[:, : self.ground_degeneracy]

    def ground_vector(self) -> np.ndarray:
        return self.eigenvectors[:, 0]


def diagonalize(h: PauliSum, cap: int = 14) -> SpectralDecomposition:
    """Full dense Hermitian eigensolution with degeneracy detection."""
    if h.num_sites > cap:
        raise OracleError(f"{h.num_sites} sites exceeds the dense diagonalization cap {cap}")
    if not h.is_hermitian():
        raise OracleError("diagonalize requires a Hermitian sum")
    mat = to_matrix(h, cap=cap)
    if np.max(np.abs(mat.imag)) <= 1e-14 * max(1.0, np.max(np.abs(mat.real))):
        evals, evecs = np.linalg.eigh(mat.real)
        evecs = evecs.astype(complex)
    else:
        evals, evecs = np.linalg.eigh(mat)
    degeneracy = int(np.sum(evals <= evals[0] + DEGENERACY_GAP))
    return SpectralDecomposition(evals, evecs, degeneracy)


def ground_space_fidelity(amplitudes: np.ndarray, decomp: SpectralDecomposition) -> float:
    """Squared norm of the projection onto the degenerate ground space."""
    coords = decomp.ground_space().conj().T @ amplitudes
    val = float(np.real(np.vdot(coords, coords)))
    return min(max(val, 0.0), 1.0)


def exact_resolvent_gf(
    decomp: SpectralDecomposition,
    c_a: PauliTerm,
    c_b: PauliTerm,
    z_grid: np.ndarray,
    ground_vector: np.ndarray | None = None,
    kind: str = "retarded",
) -> np.ndarray:
    """Lehmann-sum Green's function on an energy grid.

    greater:  <GS| c_a (z - H)^-1 c_b^dag |GS>
    lesser:   <GS| c_a^dag (z + H)^-1 c_b |GS>
    retarded: greater + lesser

    ``ground_vector`` selects the member of a degenerate ground space
    (defaults to the first eigenvector); pass the same vector used on
    the subspace-expansion side when comparing.
    """
    z = np.asarray(z_grid, dtype=complex)
    if np.any(z.imag == 0.0):
        raise OracleError("resolvent evaluation requires Im z != 0")
    gs = decomp.ground_vector() if ground_vector is None else ground_vector
    evecs = decomp.eigenvectors
    evals = decomp.eigenvalues

    def _project(term: PauliTerm) -> np.ndarray:
        return evecs.conj().T @ apply_term(term, gs)  # <n|term|GS>

    def _greater() -> np.ndarray:
        weights = np.conj(_project(_dagger(c_a))) * _project(_dagger(c_b))
        return (weights[None, :] / (z[:, None] - evals[None, :])).sum(axis=1)

    def _lesser() -> np.ndarray:
        weights = np.conj(_project(c_a)) * _project(c_b)
        return (weights[None, :] / (z[:, None] + evals[None, :])).sum(axis=1)

    if kind == "greater":
        return _greater()
    if kind == "lesser":
        return _lesser()
    if kind == "retarded":
        return _greater() + _lesser()
    raise OracleError(f"unknown GF kind {kind!r}")


def _dagger(term: PauliTerm) -> PauliTerm:
    return term.with_coefficient(np.conj(term.coefficient))


def emit_fixture(entries: list[dict], path: str | Path, version: str) -> None:
    """Versioned JSON of ground energies/degeneracies per instance."""
    payload = {"version": version, "entries": entries}
    Path(path).write_text(json.dumps(payload, indent=2))


def fixture_entry(label: str, h: PauliSum, decomp: SpectralDecomposition) -> dict:
    return {
        "label": label,
        "num_sites": h.num_sites,
        "num_terms": len(h),
        "ground_energy": decomp.ground_energy,
        "ground_degeneracy": decomp.ground_degeneracy,
    }
