"""Shared fixtures: reference Hamiltonians and independent dense oracles."""

import numpy as np
import pytest

from hampart.operators import ElectronicIntegrals
from hampart.pauli import parse_pauli_text, pauli_matrix

# Four-qubit example Hamiltonian used throughout (identity offset +1).
ILLUSTRATIVE_TEXT = """\
1.0
0.5 X0 X1 X2
1.0 X0 X2
0.5 Y0 Y1 X2
1.0 X1
2.0 X1 X2
1.0 X1 X2 X3
-1.0 X1 X2 Z3
-1.0 X1 Z2
-0.5 X1 Z2 X3
0.5 X1 Z2 Z3
0.5 X1 X3
-0.5 X1 Z3
4.0 X2
1.0 X2 X3
-1.0 X2 Z3
-1.0 Z2
-0.5 Z2 X3
0.5 Z2 Z3
0.5 X3
-0.5 Z3
"""

# The five fully-commuting groups of the example, as letter strings.
ILLUSTRATIVE_FC_GROUPS = [
    {"IIXI", "IXXI", "IIXX", "IXXX", "IXII", "XIXI", "IIIX", "IXIX", "XXXI"},
    {"IIZI", "IXZI", "IIZX", "IXZX"},
    {"IIZZ", "IXZZ"},
    {"IIXZ", "IXXZ", "IIIZ", "IXIZ"},
    {"YYXI"},
]


@pytest.fixture(scope="session")
def illustrative_hamiltonian():
    return parse_pauli_text(ILLUSTRATIVE_TEXT, n=4)


def h2_sto3g_integrals() -> ElectronicIntegrals:
    """H2 / STO-3G at 0.7414 Angstrom (standard published integral set)."""
    ints = ElectronicIntegrals(norb=2)
    ints.set_one_body(0, 0, -1.252477495)
    ints.set_one_body(1, 1, -0.475934275)
    ints.set_two_body(0, 0, 0, 0, 0.674493166)
    ints.set_two_body(0, 0, 1, 1, 0.663472101)
    ints.set_two_body(0, 1, 0, 1, 0.181287518)
    ints.set_two_body(1, 1, 1, 1, 0.697397010)
    ints.core = 0.713776188
    return ints


@pytest.fixture(scope="session")
def h2_integrals():
    return h2_sto3g_integrals()


@pytest.fixture()
def h2_fcidump(tmp_path):
    from hampart.operators import write_fcidump

    path = tmp_path / "h2.fcidump"
    write_fcidump(path, h2_sto3g_integrals(), nelec=2)
    return path


# Vibrational acceptance instance: 3 modes, d=4, dense cubic+quartic PES.
VIB_OMEGA = (1.0, 1.2, 0.9)


def vib_couplings():
    from itertools import combinations_with_replacement

    c = {k: 0.2 for k in combinations_with_replacement(range(3), 3)}
    c.update({k: 0.1 for k in combinations_with_replacement(range(3), 4)})
    return c


# ---------------------------------------------------------------------------
# Independent oracles


def kron_all(mats):
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def dense_from_letters(letters: str) -> np.ndarray:
    """Qubit 0 is the first kron factor (most significant basis bit)."""
    return kron_all([pauli_matrix(ch) for ch in letters])


def dense_pauli_sum(h) -> np.ndarray:
    """Rebuild a PauliSum matrix term by term from explicit kron products."""
    dim = 1 << h.n
    out = h.constant * np.eye(dim, dtype=complex)
    for string, coeff in h.terms.items():
        out += coeff * dense_from_letters(string.letters)
    return out


def jw_ladder(mode: int, modes: int, dagger: bool) -> np.ndarray:
    """Explicit Jordan-Wigner ladder matrix; |1> is the occupied state."""
    lower = np.array([[0, 1], [0, 0]], dtype=complex)
    op = lower.conj().T if dagger else lower
    mats = [pauli_matrix("Z")] * mode + [op]
    mats += [np.eye(2, dtype=complex)] * (modes - mode - 1)
    return kron_all(mats)


def dense_fermion(op) -> np.ndarray:
    """FermionOperator matrix from explicit ladder products."""
    dim = 1 << op.modes
    out = np.zeros((dim, dim), dtype=complex)
    for coeff, ops in op.terms:
        term = np.eye(dim, dtype=complex)
        for mode, dagger in ops:
            term = term @ jw_ladder(mode, op.modes, dagger)
        out += coeff * term
    return out


def random_hermitian(dim: int, rng) -> np.ndarray:
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (m + m.conj().T) / 2.0
