import json

import numpy as np
import pytest

from kitaevqse import oracle
from kitaevqse.oracle import OracleError, diagonalize, exact_resolvent_gf
from kitaevqse.pauli import PauliTerm, pauli_sum, single_site, to_matrix

# frozen at the first verified run of this module; the ground energy of
# the 2x2 torus at zero field is -4*sqrt(3)
E0_N8_J_MINUS1 = -6.928203230275509
E0_N8_J_MINUS1_HZ01 = -7.0345243183958


class TestDiagonalize:
    def test_single_z(self):
        dec = diagonalize(pauli_sum([single_site("Z", 0, 1)], 1))
        assert np.allclose(dec.eigenvalues, [-1.0, 1.0])

    def test_commuting_terms_sum_spectra(self):
        h = pauli_sum([single_site("Z", 0, 2, 0.5), single_site("Z", 1, 2, 0.2)], 2)
        dec = diagonalize(h)
        assert np.allclose(sorted(dec.eigenvalues), sorted([0.7, 0.3, -0.3, -0.7]))

    def test_frozen_kitaev_fixture_values(self, dec0_8, dec_8):
        assert dec0_8.ground_energy == pytest.approx(E0_N8_J_MINUS1, abs=1e-10)
        assert dec0_8.ground_degeneracy == 1
        assert dec_8.ground_energy == pytest.approx(E0_N8_J_MINUS1_HZ01, abs=1e-10)
        assert dec_8.ground_degeneracy == 1

    def test_eigen_residuals(self, h0_8, dec0_8):
        mat = to_matrix(h0_8)
        for k in (0, 17, 101, 255):
            v = dec0_8.eigenvectors[:, k]
            residual = np.linalg.norm(mat @ v - dec0_8.eigenvalues[k] * v)
            assert residual < 1e-10

    def test_orthonormal_columns(self, dec0_8):
        gram = dec0_8.eigenvectors.conj().T @ dec0_8.eigenvectors
        assert np.max(np.abs(gram - np.eye(256))) < 1e-10

    def test_degeneracy_detection(self):
        # two decoupled spins with equal fields: middle levels degenerate,
        # ground level unique
        h = pauli_sum([single_site("Z", 0, 2, 1.0), single_site("Z", 1, 2, 1.0)], 2)
        dec = diagonalize(h)
        assert dec.ground_degeneracy == 1
        assert np.sum(np.abs(dec.eigenvalues) < 1e-12) == 2

    def test_cap(self):
        with pytest.raises(OracleError):
            diagonalize(pauli_sum([single_site("Z", 0, 15)], 15), cap=14)

    def test_non_hermitian_rejected(self):
        with pytest.raises(OracleError):
            diagonalize(pauli_sum([single_site("Z", 0, 1, 1j)], 1))

    def test_topological_degeneracy_n12(self, dec0_12):
        assert dec0_12.ground_degeneracy == 4


class TestGroundSpaceFidelity:
    def test_exact_member(self, dec0_8):
        assert oracle.ground_space_fidelity(dec0_8.ground_vector(), dec0_8) == pytest.approx(1.0)

    def test_orthogonal_state(self, dec0_8):
        v = dec0_8.eigenvectors[:, -1]
        assert oracle.ground_space_fidelity(v, dec0_8) == pytest.approx(0.0, abs=1e-12)


class TestExactResolventGf:
    def test_free_resolvent_is_one_over_z(self):
        # H = 0 represented by an empty-coefficient sum is not allowed in
        # diagonalize, so scale a Z term to zero coupling via tiny epsilon-free
        # construction: use two opposite terms that cancel to the zero matrix.
        h = pauli_sum([single_site("Z", 0, 2, 1.0), single_site("Z", 0, 2, -1.0)], 2)
        assert len(h) == 0
        dec = oracle.SpectralDecomposition(np.zeros(4), np.eye(4, dtype=complex), 4)
        c = single_site("Z", 0, 2)
        z = np.array([0.3 + 0.1j, -1.2 + 0.4j])
        greater = exact_resolvent_gf(dec, c, c, z, ground_vector=np.eye(4)[0], kind="greater")
        assert np.allclose(greater, 1.0 / z)

    def test_large_delta_decay(self, dec_8):
        c = single_site("Z", 0, 8)
        z = np.array([1j * 1e4])
        val = exact_resolvent_gf(dec_8, c, c, z)
        # retarded = greater + lesser ~ 2/(i delta)
        assert abs(val[0] - 2.0 / z[0]) < 1e-6

    def test_requires_complex_energies(self, dec_8):
        c = single_site("Z", 0, 8)
        with pytest.raises(OracleError):
            exact_resolvent_gf(dec_8, c, c, np.array([0.5 + 0j]))

    def test_resolvent_identity(self):
        # (z1 - z2) G(z1) G(z2) = G(z2) - G(z1) for the scalar-weight case:
        # check on a random 3-site Hamiltonian via the diagonal element
        rng = np.random.default_rng(11)
        terms = [PauliTerm(rng.normal(), ax) for ax in ("ZII", "IXI", "IIZ", "XXI")]
        h = pauli_sum(terms, 3)
        dec = diagonalize(h)
        c = single_site("Z", 1, 3)
        z1, z2 = 0.7 + 0.3j, -0.4 + 0.2j
        gs = dec.ground_vector()
        # project onto a single eigenvector so the GF is a pure simple pole
        weights = np.abs(dec.eigenvectors.conj().T @ (to_matrix(pauli_sum([c], 3)) @ gs)) ** 2
        g1 = np.sum(weights / (z1 - dec.eigenvalues))
        g2 = np.sum(weights / (z2 - dec.eigenvalues))
        lhs = (z1 - z2) * np.sum(weights / ((z1 - dec.eigenvalues) * (z2 - dec.eigenvalues)))
        assert lhs == pytest.approx(g2 - g1, abs=1e-12)

    def test_im_greater_nonpositive_on_diagonal(self, dec_8):
        c = single_site("Z", 2, 8)
        z = np.linspace(-10, 10, 41) + 0.1j
        greater = exact_resolvent_gf(dec_8, c, c, z, kind="greater")
        assert np.all(np.imag(greater) <= 1e-14)


class TestFixtureEmission:
    def test_round_trip(self, h0_8, dec0_8, tmp_path):
        entry = oracle.fixture_entry("n8_j-1", h0_8, dec0_8)
        path = tmp_path / "fixture.json"
        oracle.emit_fixture([entry], path, version="0.1.0")
        data = json.loads(path.read_text())
        assert data["version"] == "0.1.0"
        assert data["entries"][0]["ground_energy"] == pytest.approx(E0_N8_J_MINUS1)
        assert data["entries"][0]["ground_degeneracy"] == 1
