"""Pauli-string algebra on a fixed qubit register.

A term is a complex coefficient times a tensor product of single-site
Paulis, stored as a string over ``IXYZ`` with one character per site
(site 0 leftmost, acting on the most significant bit of the basis
index). Sums are kept in canonical merged form: no two terms share the
same axes and coefficients below ``MERGE_TOL`` are pruned.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

AXES_CHARS = "IXYZ"
MERGE_TOL = 1e-14

# (a, b) -> (phase, axis) for the single-site product a*b
_SINGLE_PRODUCT = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("Y", "I"): (1, "Y"), ("Z", "I"): (1, "Z"),
    ("X", "X"): (1, "I"), ("Y", "Y"): (1, "I"), ("Z", "Z"): (1, "I"),
    ("X", "Y"): (1j, "Z"), ("Y", "Z"): (1j, "X"), ("Z", "X"): (1j, "Y"),
    ("Y", "X"): (-1j, "Z"), ("Z", "Y"): (-1j, "X"), ("X", "Z"): (-1j, "Y"),
}

_SINGLE_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

DEFAULT_DENSE_CAP = 14


class PauliError(ValueError):
    """Raised on malformed Pauli terms/sums or contract violations."""


@dataclass(frozen=True)
class PauliTerm:
    """One coefficient-weighted Pauli string."""

    coefficient: complex
    axes: str

    def __post_init__(self):
        if not self.axes or any(ch not in AXES_CHARS for ch in self.axes):
            raise PauliError(f"axes must be a non-empty string over {AXES_CHARS!r}, got {self.axes!r}")
        object.__setattr__(self, "coefficient", complex(self.coefficient))

    @property
    def num_sites(self) -> int:
        return len(self.axes)

    @property
    def weight(self) -> int:
        """Number of non-identity sites."""
        return sum(1 for ch in self.axes if ch != "I")

    def is_identity(self) -> bool:
        return self.weight == 0

    def with_coefficient(self, coefficient: complex) -> "PauliTerm":
        return PauliTerm(coefficient, self.axes)

    def support(self) -> tuple[int, ...]:
        return tuple(q for q, ch in enumerate(self.axes) if ch != "I")

    def __str__(self) -> str:
        return term_to_string(self)


def identity(num_sites: int, coefficient: complex = 1.0) -> PauliTerm:
    return PauliTerm(coefficient, "I" * num_sites)


def single_site(kind: str, site: int, num_sites: int, coefficient: complex = 1.0) -> PauliTerm:
    """Pauli ``kind`` on ``site`` (0-based), identity elsewhere."""
    if kind not in "XYZ":
        raise PauliError(f"kind must be one of X, Y, Z, got {kind!r}")
    if not 0 <= site < num_sites:
        raise PauliError(f"site {site} out of range for {num_sites} sites")
    axes = ["I"] * num_sites
    axes[site] = kind
    return PauliTerm(coefficient, "".join(axes))


def two_site(kind: str, site_a: int, site_b: int, num_sites: int, coefficient: complex = 1.0) -> PauliTerm:
    """``kind`` ⊗ ``kind`` on a pair of distinct sites."""
    if site_a == site_b:
        raise PauliError("two_site requires distinct sites")
    axes = ["I"] * num_sites
    for s in (site_a, site_b):
        if not 0 <= s < num_sites:
            raise PauliError(f"site {s} out of range for {num_sites} sites")
        axes[s] = kind
    if kind not in "XYZ":
        raise PauliError(f"kind must be one of X, Y, Z, got {kind!r}")
    return PauliTerm(coefficient, "".join(axes))


def multiply(a: PauliTerm, b: PauliTerm) -> PauliTerm:
    """Exact operator product a·b with accumulated phase."""
    if a.num_sites != b.num_sites:
        raise PauliError(f"size mismatch: {a.num_sites} vs {b.num_sites}")
    phase = a.coefficient * b.coefficient
    out = []
    for ca, cb in zip(a.axes, b.axes):
        ph, ax = _SINGLE_PRODUCT[(ca, cb)]
        phase *= ph
        out.append(ax)
    return PauliTerm(phase, "".join(out))


def commutes(a: PauliTerm, b: PauliTerm) -> bool:
    """True iff the strings commute (even number of anticommuting sites)."""
    if a.num_sites != b.num_sites:
        raise PauliError(f"size mismatch: {a.num_sites} vs {b.num_sites}")
    clashes = sum(
        1 for ca, cb in zip(a.axes, b.axes)
        if ca != "I" and cb != "I" and ca != cb
    )
    return clashes % 2 == 0


@dataclass(frozen=True)
class PauliSum:
    """Canonical merged sum of Pauli terms over a fixed register.

    Construct via :func:`pauli_sum`; the raw constructor does not merge.
    """

    terms: tuple[PauliTerm, ...]
    num_sites: int

    def __post_init__(self):
        for t in self.terms:
            if t.num_sites != self.num_sites:
                raise PauliError("all terms must share the register size")

    def __len__(self) -> int:
        return len(self.terms)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(t.coefficient.imag) <= tol for t in self.terms)

    def coefficient_norm(self) -> float:
        """Sum of absolute coefficients."""
        return float(sum(abs(t.coefficient) for t in self.terms))

    def scaled(self, factor: complex) -> "PauliSum":
        return PauliSum(tuple(t.with_coefficient(t.coefficient * factor) for t in self.terms), self.num_sites)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if other.num_sites != self.num_sites:
            raise PauliError("size mismatch in sum")
        return pauli_sum(list(self.terms) + list(other.terms), self.num_sites)

    def __str__(self) -> str:
        return " + ".join(term_to_string(t) for t in self.terms) if self.terms else "0"


def pauli_sum(terms: Iterable[PauliTerm], num_sites: int) -> PauliSum:
    """Merge duplicate axes, prune coefficients below MERGE_TOL.

    Term order follows first occurrence of each axes string, so sums
    built from ordered bond lists stay in bond order.
    """
    merged: dict[str, complex] = {}
    order: list[str] = []
    for t in terms:
        if t.num_sites != num_sites:
            raise PauliError("term register size does not match sum")
        if t.axes not in merged:
            merged[t.axes] = t.coefficient
            order.append(t.axes)
        else:
            merged[t.axes] += t.coefficient
    kept = tuple(
        PauliTerm(merged[ax], ax) for ax in order if abs(merged[ax]) > MERGE_TOL
    )
    return PauliSum(kept, num_sites)


# ---------------------------------------------------------------------------
# Basis action: P|i> = phase(i) |i ^ flip_mask>, with site 0 on the most
# significant bit. These arrays drive matrix-free application and to_matrix.
# ---------------------------------------------------------------------------

def term_masks(term: PauliTerm) -> tuple[int, int, int]:
    """(flip_mask, sign_mask, y_count) for the string's basis action."""
    n = term.num_sites
    flip = 0
    sign = 0
    y_count = 0
    for q, ch in enumerate(term.axes):
        bit = 1 << (n - 1 - q)
        if ch in "XY":
            flip |= bit
        if ch in "ZY":
            sign |= bit
        if ch == "Y":
            y_count += 1
    return flip, sign, y_count


def term_phases(term: PauliTerm) -> tuple[int, np.ndarray]:
    """(flip_mask, per-index phase array) such that P|i> = phase[i]|i ^ flip>.

    The phase includes the term coefficient.
    """
    n = term.num_sites
    flip, sign, y_count = term_masks(term)
    dim = 1 << n
    idx = np.arange(dim, dtype=np.int64)
    parity = np.bitwise_count(np.bitwise_and(idx, sign)) & 1
    phases = np.where(parity, -1.0, 1.0).astype(complex)
    phases *= term.coefficient * (1j) ** y_count
    return flip, phases


def apply_term(term: PauliTerm, amplitudes: np.ndarray) -> np.ndarray:
    """Matrix-free P|psi> for one term."""
    flip, phases = term_phases(term)
    idx = np.arange(amplitudes.size, dtype=np.int64)
    src = np.bitwise_xor(idx, flip)
    return phases[src] * amplitudes[src]


def apply_sum(h: PauliSum, amplitudes: np.ndarray) -> np.ndarray:
    """Matrix-free H|psi>."""
    out = np.zeros_like(amplitudes)
    idx = np.arange(amplitudes.size, dtype=np.int64)
    for term in h.terms:
        flip, phases = term_phases(term)
        src = np.bitwise_xor(idx, flip)
        out += phases[src] * amplitudes[src]
    return out


def term_to_matrix(term: PauliTerm) -> np.ndarray:
    mat = np.ones((1, 1), dtype=complex)
    for ch in term.axes:
        mat = np.kron(mat, _SINGLE_MATRICES[ch])
    return term.coefficient * mat


def to_matrix(h: PauliSum, cap: int = DEFAULT_DENSE_CAP) -> np.ndarray:
    """Dense 2^N x 2^N matrix of the sum.

    Assembled column-wise from the basis action, so memory stays at one
    output matrix.
    """
    n = h.num_sites
    if n > cap:
        raise PauliError(f"register size {n} exceeds dense cap {cap}")
    dim = 1 << n
    mat = np.zeros((dim, dim), dtype=complex)
    cols = np.arange(dim, dtype=np.int64)
    for term in h.terms:
        flip, phases = term_phases(term)
        rows = np.bitwise_xor(cols, flip)
        # P|i> lands on row i ^ flip with phase(i)
        np.add.at(mat, (rows, cols), phases)
    return mat


def gershgorin_kappa(h: PauliSum) -> float:
    """Spectral-width bound kappa = 2 * sum |c_i|.

    Twice the triangle-inequality bound on the spectral radius of a
    traceless Pauli sum; rigorous whenever the identity term is absent,
    and an upper bound on lambda_max - lambda_min in general.
    """
    if not h.is_hermitian():
        raise PauliError("kappa is defined for Hermitian sums only")
    if len(h) == 0:
        raise PauliError("empty Hamiltonian has no spectral width")
    return 2.0 * h.coefficient_norm()


# ---------------------------------------------------------------------------
# Textual format: "coeff * X1 Y3 Z4" with 1-based site indices.
# ---------------------------------------------------------------------------

def _format_coefficient(c: complex) -> str:
    if c.imag == 0.0:
        return repr(c.real)
    return repr(c)


def term_to_string(term: PauliTerm) -> str:
    ops = " ".join(f"{ch}{q + 1}" for q, ch in enumerate(term.axes) if ch != "I")
    return f"{_format_coefficient(term.coefficient)} * {ops if ops else 'I'}"


def term_from_string(text: str, num_sites: int) -> PauliTerm:
    head, _, tail = text.partition("*")
    if not tail:
        raise PauliError(f"expected 'coeff * ops', got {text!r}")
    try:
        coeff = complex(head.strip())
    except ValueError as exc:
        raise PauliError(f"bad coefficient in {text!r}") from exc
    axes = ["I"] * num_sites
    tokens = tail.split()
    if tokens == ["I"]:
        return PauliTerm(coeff, "".join(axes))
    for tok in tokens:
        kind, idx_text = tok[0], tok[1:]
        if kind not in "XYZ" or not idx_text.isdigit():
            raise PauliError(f"bad operator token {tok!r} in {text!r}")
        site = int(idx_text) - 1
        if not 0 <= site < num_sites:
            raise PauliError(f"site {int(idx_text)} out of range in {text!r}")
        if axes[site] != "I":
            raise PauliError(f"duplicate site in {text!r}")
        axes[site] = kind
    return PauliTerm(coeff, "".join(axes))


def sum_to_strings(h: PauliSum) -> list[str]:
    return [term_to_string(t) for t in h.terms]


def sum_from_strings(lines: Sequence[str], num_sites: int) -> PauliSum:
    return pauli_sum([term_from_string(line, num_sites) for line in lines], num_sites)
