import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kitaevqse import pauli
from kitaevqse.pauli import (
    PauliError,
    PauliTerm,
    commutes,
    gershgorin_kappa,
    multiply,
    pauli_sum,
    single_site,
    sum_from_strings,
    sum_to_strings,
    term_from_string,
    term_to_string,
    to_matrix,
    two_site,
)


def axes_strategy(n):
    return st.text(alphabet="IXYZ", min_size=n, max_size=n)


def term_strategy(n):
    coeff = st.tuples(
        st.floats(-2, 2, allow_nan=False), st.floats(-2, 2, allow_nan=False)
    ).map(lambda ab: complex(*ab))
    return st.builds(PauliTerm, coeff, axes_strategy(n))


class TestSingleSiteAlgebra:
    def test_x_times_y_is_iz(self):
        x1 = single_site("X", 0, 1)
        y1 = single_site("Y", 0, 1)
        out = multiply(x1, y1)
        assert out.axes == "Z"
        assert out.coefficient == 1j

    def test_involution(self):
        xx = two_site("X", 0, 1, 2)
        out = multiply(xx, xx)
        assert out.axes == "II"
        assert out.coefficient == 1

    def test_hexagon_bond_product_pattern(self):
        # y,x,z,y,x,z bond walk around a six-site ring collapses to the
        # alternating X,Z,Y string with coefficient +1
        n = 6
        bonds = [
            two_site("Y", 0, 1, n), two_site("X", 1, 2, n), two_site("Z", 2, 3, n),
            two_site("Y", 3, 4, n), two_site("X", 4, 5, n), two_site("Z", 5, 0, n),
        ]
        prod = bonds[0]
        for b in bonds[1:]:
            prod = multiply(prod, b)
        assert prod.axes == "XZYXZY"
        assert prod.coefficient == pytest.approx(1.0)

    def test_size_mismatch(self):
        with pytest.raises(PauliError):
            multiply(single_site("X", 0, 1), single_site("X", 0, 2))
        with pytest.raises(PauliError):
            commutes(single_site("X", 0, 1), single_site("X", 0, 2))


class TestCommutes:
    def test_same_site_clash(self):
        assert not commutes(single_site("X", 0, 1), single_site("Z", 0, 1))

    def test_disjoint_support(self):
        assert commutes(two_site("X", 0, 1, 3), single_site("Z", 2, 3))

    @settings(max_examples=150, deadline=None)
    @given(axes_strategy(4), axes_strategy(4))
    def test_matches_matrix_commutator(self, ax_a, ax_b):
        a, b = PauliTerm(1.0, ax_a), PauliTerm(1.0, ax_b)
        ma, mb = pauli.term_to_matrix(a), pauli.term_to_matrix(b)
        comm_norm = np.max(np.abs(ma @ mb - mb @ ma))
        assert commutes(a, b) == (comm_norm < 1e-12)


class TestMultiplyAgainstMatrices:
    @settings(max_examples=100, deadline=None)
    @given(term_strategy(3), term_strategy(3))
    def test_product_matches_matrix_product(self, a, b):
        out = multiply(a, b)
        expected = pauli.term_to_matrix(a) @ pauli.term_to_matrix(b)
        assert np.allclose(pauli.term_to_matrix(out), expected, atol=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(term_strategy(3), term_strategy(3), term_strategy(3))
    def test_associativity(self, a, b, c):
        left = multiply(multiply(a, b), c)
        right = multiply(a, multiply(b, c))
        assert left.axes == right.axes
        assert left.coefficient == pytest.approx(right.coefficient, abs=1e-12)


class TestPauliSum:
    def test_merges_duplicate_axes(self):
        n = 2
        s = pauli_sum([single_site("Z", 0, n, 0.5), single_site("Z", 0, n, 0.25)], n)
        assert len(s) == 1
        assert s.terms[0].coefficient == pytest.approx(0.75)

    def test_prunes_cancelled_terms(self):
        n = 2
        s = pauli_sum([single_site("Z", 0, n, 1.0), single_site("Z", 0, n, -1.0)], n)
        assert len(s) == 0

    def test_first_occurrence_order(self):
        n = 2
        s = pauli_sum(
            [single_site("X", 0, n), single_site("Z", 1, n), single_site("X", 0, n, 2.0)], n
        )
        assert [t.axes for t in s.terms] == ["XI", "IZ"]

    def test_hermitian_flag(self):
        n = 1
        assert pauli_sum([single_site("Z", 0, n, 0.3)], n).is_hermitian()
        assert not pauli_sum([single_site("Z", 0, n, 0.3j)], n).is_hermitian()


class TestToMatrix:
    def test_z_on_one_site(self):
        mat = to_matrix(pauli_sum([single_site("Z", 0, 1)], 1))
        assert np.allclose(mat, np.diag([1.0, -1.0]))

    def test_xx_antidiagonal(self):
        mat = to_matrix(pauli_sum([two_site("X", 0, 1, 2)], 2))
        assert np.allclose(mat, np.fliplr(np.eye(4)))

    def test_cap_enforced(self):
        s = pauli_sum([single_site("Z", 0, 4)], 4)
        with pytest.raises(PauliError):
            to_matrix(s, cap=3)

    @settings(max_examples=60, deadline=None)
    @given(term_strategy(3), term_strategy(3))
    def test_matrix_of_product_is_product_of_matrices(self, a, b):
        prod_mat = to_matrix(pauli_sum([multiply(a, b)], 3))
        direct = to_matrix(pauli_sum([a], 3)) @ to_matrix(pauli_sum([b], 3))
        assert np.allclose(prod_mat, direct, atol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(term_strategy(3), min_size=1, max_size=5))
    def test_apply_sum_matches_matrix(self, terms):
        s = pauli_sum(terms, 3)
        rng = np.random.default_rng(3)
        vec = rng.normal(size=8) + 1j * rng.normal(size=8)
        assert np.allclose(pauli.apply_sum(s, vec), to_matrix(s) @ vec, atol=1e-10)


class TestGershgorinKappa:
    def test_single_term(self):
        h = pauli_sum([single_site("Z", 0, 1, 0.1)], 1)
        assert gershgorin_kappa(h) == pytest.approx(0.2)

    def test_kitaev_with_field_value(self, h_8):
        # 12 unit bond terms plus 8 field terms of 0.1
        assert gershgorin_kappa(h_8) == pytest.approx(25.6)

    def test_empty_sum_rejected(self):
        with pytest.raises(PauliError):
            gershgorin_kappa(pauli_sum([], 2))

    def test_bounds_exact_spectral_width(self, h0_8, h_8, dec0_8, dec_8):
        for h, dec in ((h0_8, dec0_8), (h_8, dec_8)):
            width = dec.eigenvalues[-1] - dec.eigenvalues[0]
            assert gershgorin_kappa(h) >= width


class TestTextualFormat:
    def test_round_trip(self):
        term = PauliTerm(-0.5, "XIZY")
        text = term_to_string(term)
        assert text == "-0.5 * X1 Z3 Y4"
        back = term_from_string(text, 4)
        assert back == term

    def test_identity_round_trip(self):
        term = PauliTerm(2.0, "III")
        assert term_from_string(term_to_string(term), 3) == term

    def test_complex_coefficient(self):
        term = PauliTerm(1 - 0.5j, "XY")
        assert term_from_string(term_to_string(term), 2) == term

    def test_sum_round_trip(self, h_8):
        lines = sum_to_strings(h_8)
        back = sum_from_strings(lines, 8)
        assert back.terms == h_8.terms

    def test_rejects_garbage(self):
        with pytest.raises(PauliError):
            term_from_string("1.0 * Q1", 2)
        with pytest.raises(PauliError):
            term_from_string("nope * X1", 2)
        with pytest.raises(PauliError):
            term_from_string("1.0 * X9", 2)
