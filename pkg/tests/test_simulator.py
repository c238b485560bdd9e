import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from kitaevqse.pauli import PauliTerm, pauli_sum, single_site, to_matrix, two_site
from kitaevqse.simulator import (
    EvolutionOperator,
    SimulationError,
    StateVector,
    apply_pauli_rotation,
    cnot_depth,
    evolve,
    evolve_times,
    expectation,
    grouped_by_axis,
    overlap,
)


def random_state(n, seed=0):
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return StateVector(amps / np.linalg.norm(amps), n)


class TestStateVector:
    def test_basis_state(self):
        st8 = StateVector.computational_basis(3, index=5)
        assert st8.amplitudes[5] == 1.0
        assert st8.norm() == pytest.approx(1.0)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(SimulationError):
            StateVector(np.zeros(7), 3)

    def test_amplitude_dump_layout(self, tmp_path):
        state = StateVector(np.array([1 + 2j, 3 - 4j]) / np.sqrt(30), 1)
        path = tmp_path / "amps.bin"
        state.dump_amplitudes(path)
        raw = np.frombuffer(path.read_bytes(), dtype="<f8")
        assert raw.size == 4
        assert raw[0] == pytest.approx(state.amplitudes[0].real)
        assert raw[1] == pytest.approx(state.amplitudes[0].imag)
        assert raw[2] == pytest.approx(state.amplitudes[1].real)


class TestOverlapExpectation:
    def test_self_overlap(self):
        psi = random_state(4, 1)
        assert overlap(psi, psi) == pytest.approx(1.0)

    def test_orthogonal_basis_states(self):
        a = StateVector.computational_basis(3, 0)
        b = StateVector.computational_basis(3, 4)
        assert overlap(a, b) == 0

    def test_size_mismatch(self):
        with pytest.raises(SimulationError):
            overlap(random_state(2), random_state(3))

    def test_expectation_trivial_values(self):
        zero = StateVector.computational_basis(3, 0)
        z_sum = pauli_sum([single_site("Z", 1, 3)], 3)
        x_sum = pauli_sum([single_site("X", 1, 3)], 3)
        assert expectation(zero, z_sum) == pytest.approx(1.0)
        assert expectation(zero, x_sum) == pytest.approx(0.0)

    def test_expectation_rejects_non_hermitian(self):
        psi = random_state(2)
        bad = pauli_sum([single_site("Z", 0, 2, 1j)], 2)
        with pytest.raises(SimulationError):
            expectation(psi, bad)


class TestPauliRotation:
    def test_z_phase_on_zero_state(self):
        state = StateVector.computational_basis(1, 0)
        theta = 0.731
        out = apply_pauli_rotation(state, single_site("Z", 0, 1), theta)
        assert out.amplitudes[0] == pytest.approx(np.exp(-1j * theta / 2))

    def test_zero_angle_is_identity(self):
        psi = random_state(3, 2)
        out = apply_pauli_rotation(psi, two_site("X", 0, 2, 3), 0.0)
        assert np.allclose(out.amplitudes, psi.amplitudes)

    def test_xx_pi_rotation_flips(self):
        state = StateVector.computational_basis(2, 0)
        out = apply_pauli_rotation(state, two_site("X", 0, 1, 2), np.pi)
        expected = np.zeros(4, complex)
        expected[3] = -1j
        assert np.allclose(out.amplitudes, expected)

    @settings(max_examples=80, deadline=None)
    @given(
        st.text(alphabet="IXYZ", min_size=2, max_size=2).filter(lambda s: s != "II"),
        st.floats(-6.0, 6.0, allow_nan=False),
        st.floats(0.2, 1.5),
    )
    def test_matches_dense_exponential(self, axes, angle, coeff):
        # all one- and two-site strings on a 2-site register vs expm
        term = PauliTerm(coeff, axes)
        psi = random_state(2, 5)
        out = apply_pauli_rotation(psi, term, angle)
        gen = to_matrix(pauli_sum([term], 2))
        expected = scipy.linalg.expm(-0.5j * angle * gen) @ psi.amplitudes
        assert np.allclose(out.amplitudes, expected, atol=1e-10)
        assert out.norm() == pytest.approx(1.0, abs=1e-12)

    def test_complex_coefficient_rejected(self):
        psi = random_state(2)
        with pytest.raises(SimulationError):
            apply_pauli_rotation(psi, PauliTerm(1j, "XX"), 0.5)


class TestGrouping:
    def test_kitaev_groups(self, h_8):
        groups = grouped_by_axis(h_8)
        sizes = [len(g) for g in groups]
        assert sizes == [8, 4, 4, 4]  # field singles first, then XX, YY, ZZ sweeps
        kinds = [{ch for t in g for ch in t.axes if ch != "I"} for g in groups]
        assert kinds == [{"Z"}, {"X"}, {"Y"}, {"Z"}]

    def test_leftover_strings_get_own_group(self):
        mixed = pauli_sum([PauliTerm(1.0, "XZY"), single_site("Z", 0, 3, 0.5)], 3)
        groups = grouped_by_axis(mixed)
        assert [len(g) for g in groups] == [1, 1]


class TestEvolve:
    def test_exact_matches_expm(self, h_8, evolution_8):
        psi = random_state(8, 3)
        t = 0.37
        out = evolve(psi, evolution_8, t)
        expected = scipy.linalg.expm(-1j * t * to_matrix(h_8)) @ psi.amplitudes
        assert np.linalg.norm(out.amplitudes - expected) < 1e-10

    def test_zero_time_identity_both_modes(self, h_8, evolution_8):
        psi = random_state(8, 4)
        trot = EvolutionOperator(h_8, mode="trotter2", trotter_steps=3)
        for op in (evolution_8, trot):
            out = evolve(psi, op, 0.0)
            assert np.allclose(out.amplitudes, psi.amplitudes)

    def test_group_property(self, evolution_8):
        psi = random_state(8, 5)
        a = evolve(evolve(psi, evolution_8, 0.21), evolution_8, 0.34)
        b = evolve(psi, evolution_8, 0.55)
        assert np.linalg.norm(a.amplitudes - b.amplitudes) < 1e-10

    def test_commuting_hamiltonian_trotter_exact_at_r1(self, lat8):
        from kitaevqse.lattice import kitaev_hamiltonian

        h_zz = kitaev_hamiltonian(lat8, [0.0, 0.0, -1.0], 0.3)  # ZZ bonds + Z field
        psi = random_state(8, 6)
        exact = EvolutionOperator(h_zz, mode="exact")
        trot = EvolutionOperator(h_zz, mode="trotter2", trotter_steps=1)
        t = 0.8
        a = evolve(psi, exact, t)
        b = evolve(psi, trot, t)
        assert np.linalg.norm(a.amplitudes - b.amplitudes) < 1e-10

    def test_trotter_second_order_convergence(self, h_8, evolution_8):
        psi = random_state(8, 7)
        t = 0.3
        exact = evolve(psi, evolution_8, t).amplitudes
        errors = []
        for r in (1, 2, 4, 8):
            trot = EvolutionOperator(h_8, mode="trotter2", trotter_steps=r)
            errors.append(np.linalg.norm(evolve(psi, trot, t).amplitudes - exact))
        ratios = [errors[i] / errors[i + 1] for i in range(3)]
        for ratio in ratios:
            assert 3.0 < ratio < 5.0  # ~4x per doubling of r

    def test_trotter_inverse_is_negative_time(self, h_8):
        trot = EvolutionOperator(h_8, mode="trotter2", trotter_steps=2)
        psi = random_state(8, 8)
        back = evolve(evolve(psi, trot, 0.4), trot, -0.4)
        assert np.linalg.norm(back.amplitudes - psi.amplitudes) < 1e-12

    def test_norm_preserved_through_long_product(self, h_8):
        trot = EvolutionOperator(h_8, mode="trotter2", trotter_steps=2)
        psi = random_state(8, 9)
        for _ in range(50):
            psi = evolve(psi, trot, 0.17)
        assert abs(psi.norm() - 1.0) < 1e-12

    def test_exact_cap(self, lat8):
        from kitaevqse.lattice import kitaev_hamiltonian

        h = kitaev_hamiltonian(lat8, -1.0)
        op = EvolutionOperator(h, mode="exact", dense_cap=6)
        with pytest.raises(SimulationError):
            evolve(StateVector.computational_basis(8), op, 0.1)

    def test_trotter_needs_positive_steps(self, h_8):
        with pytest.raises(SimulationError):
            EvolutionOperator(h_8, mode="trotter2", trotter_steps=0)

    def test_evolve_times_matches_single(self, evolution_8):
        psi = random_state(8, 10)
        times = [0.0, 0.25, -0.4]
        batch = evolve_times(evolution_8, psi, times)
        for row, t in zip(batch, times):
            single = evolve(psi, evolution_8, t)
            assert np.linalg.norm(row - single.amplitudes) < 1e-12


class TestCnotDepth:
    def test_paper_closed_forms(self, h_8):
        op = EvolutionOperator(h_8, mode="trotter2", trotter_steps=5)
        layers, cnots = cnot_depth(op, n_l=0)
        assert cnots == 5 * 8 * 5 == 200
        assert layers == 10 * 5

    def test_layer_scaling_with_multigrid_depth(self, h_8):
        op = EvolutionOperator(h_8, mode="trotter2", trotter_steps=1)
        layers, _ = cnot_depth(op, n_l=3)
        assert layers == 40

    def test_exact_mode_rejected(self, evolution_8):
        with pytest.raises(SimulationError):
            cnot_depth(evolution_8, 1)
