import numpy as np
import pytest

from kitaevqse import lattice, oracle, qse, vqe
from kitaevqse.greens import GreensEngine, KrylovBasisConfig
from kitaevqse.simulator import EvolutionOperator


@pytest.fixture(scope="session")
def lat8():
    return lattice.build_lattice(2, 2)


@pytest.fixture(scope="session")
def lat12():
    return lattice.build_lattice(3, 2)


@pytest.fixture(scope="session")
def h0_8(lat8):
    return lattice.kitaev_hamiltonian(lat8, -1.0)


@pytest.fixture(scope="session")
def h_8(lat8):
    return lattice.kitaev_hamiltonian(lat8, -1.0, 0.1)


@pytest.fixture(scope="session")
def dec0_8(h0_8):
    return oracle.diagonalize(h0_8)


@pytest.fixture(scope="session")
def dec_8(h_8):
    return oracle.diagonalize(h_8)


@pytest.fixture(scope="session")
def ref8(lat8, h0_8):
    state, _, _ = vqe.prepare_reference_state(lat8, h0_8, layers=1, seed=1)
    return state


@pytest.fixture(scope="session")
def evolution_8(h_8, dec_8):
    op = EvolutionOperator(h_8, mode="exact")
    # same dense matrix underneath; share the factorization
    op._eigenvalues = dec_8.eigenvalues
    op._eigenvectors = np.ascontiguousarray(dec_8.eigenvectors)
    return op


@pytest.fixture(scope="session")
def qse8(ref8, h_8, evolution_8):
    return qse.prepare_qse_ground_state(ref8, h_8, 3, 3, evolution=evolution_8)


@pytest.fixture(scope="session")
def engine8(h_8, qse8):
    gs, basis, _ = qse8
    return GreensEngine(h_8, gs, basis, KrylovBasisConfig(tilde_n_k=3, tilde_n_l=3))


# ---- N=12 (heavier; built lazily, shared once built) ----

@pytest.fixture(scope="session")
def h0_12(lat12):
    return lattice.kitaev_hamiltonian(lat12, -1.0)


@pytest.fixture(scope="session")
def h_12(lat12):
    return lattice.kitaev_hamiltonian(lat12, -1.0, 0.1)


@pytest.fixture(scope="session")
def dec0_12(h0_12):
    return oracle.diagonalize(h0_12)


@pytest.fixture(scope="session")
def dec_12(h_12):
    return oracle.diagonalize(h_12)


@pytest.fixture(scope="session")
def ref12(lat12, h0_12):
    state, _, _ = vqe.prepare_reference_state(lat12, h0_12, layers=2, seed=1)
    return state


@pytest.fixture(scope="session")
def evolution_12(h_12, dec_12):
    op = EvolutionOperator(h_12, mode="exact")
    op._eigenvalues = dec_12.eigenvalues
    op._eigenvectors = np.ascontiguousarray(dec_12.eigenvectors)
    return op
