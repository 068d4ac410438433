"""Exact algebra of n-qubit Pauli strings and real-weighted Pauli sums.

Pauli letters are stored symplectically as an (x, z) bit pair per qubit:
I=(0,0), X=(1,0), Y=(1,1), Z=(0,1). Multiplication and commutation are
bitwise on the packed masks.

Matrix convention: qubit 0 is the first tensor factor, i.e. the most
significant bit of a computational-basis index.
"""

from __future__ import annotations

from typing import Iterable, Iterator

import numpy as np
import scipy.sparse

from .errors import DataError, DimensionError, DomainError, ParseError, ResourceError

SIMPLIFY_TOL = 1e-12

# Qubit caps for matrix realization; callers may override per call.
DENSE_QUBIT_CAP = 12
SPARSE_QUBIT_CAP = 16

_LETTER_TO_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_TO_LETTER = {v: k for k, v in _LETTER_TO_BITS.items()}

# i-exponent of the phase picked up by multiplying single-qubit Paulis,
# indexed by [2*z1 + x1][2*z2 + x2] (I=0, X=1, Z=2, Y=3).
# Verified against dense 2x2 products in the test suite.
_PHASE_EXP = (
    (0, 0, 0, 0),  # I * {I, X, Z, Y}
    (0, 0, 3, 1),  # X * {I, X, Z, Y}
    (0, 1, 0, 3),  # Z * {I, X, Z, Y}
    (0, 3, 1, 0),  # Y * {I, X, Z, Y}
)

_PAULI_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_matrix(letter: str) -> np.ndarray:
    """Dense 2x2 matrix for a single Pauli letter."""
    return _PAULI_MATS[letter].copy()


class PauliString:
    """Immutable n-qubit Pauli string (no coefficient)."""

    __slots__ = ("n", "x", "z")

    def __init__(self, n: int, x: int, z: int):
        if n < 0:
            raise DomainError(f"negative qubit count {n}")
        if x >> n or z >> n:
            raise DataError(f"mask exceeds {n} qubits")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)

    def __setattr__(self, *_):
        raise AttributeError("PauliString is immutable")

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0)

    @classmethod
    def from_letters(cls, letters: str) -> "PauliString":
        x = z = 0
        for q, letter in enumerate(letters):
            try:
                xb, zb = _LETTER_TO_BITS[letter]
            except KeyError:
                raise DataError(f"invalid Pauli letter {letter!r}") from None
            x |= xb << q
            z |= zb << q
        return cls(len(letters), x, z)

    @classmethod
    def from_ops(cls, ops: Iterable[tuple[int, str]], n: int) -> "PauliString":
        """Build from sparse (qubit, letter) pairs; omitted qubits are identity."""
        x = z = 0
        for q, letter in ops:
            if not 0 <= q < n:
                raise DataError(f"qubit {q} out of range for n={n}")
            xb, zb = _LETTER_TO_BITS[letter]
            if (x >> q) & 1 or (z >> q) & 1:
                raise DataError(f"qubit {q} assigned twice")
            x |= xb << q
            z |= zb << q
        return cls(n, x, z)

    @property
    def letters(self) -> str:
        return "".join(
            _BITS_TO_LETTER[((self.x >> q) & 1, (self.z >> q) & 1)] for q in range(self.n)
        )

    def letter(self, q: int) -> str:
        return _BITS_TO_LETTER[((self.x >> q) & 1, (self.z >> q) & 1)]

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    @property
    def support_mask(self) -> int:
        return self.x | self.z

    def support(self) -> tuple[int, ...]:
        mask = self.x | self.z
        return tuple(q for q in range(self.n) if (mask >> q) & 1)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PauliString)
            and self.n == other.n
            and self.x == other.x
            and self.z == other.z
        )

    def __hash__(self) -> int:
        return hash((self.n, self.x, self.z))

    def __repr__(self) -> str:
        return f"PauliString({self.letters!r})"

    def sparse_repr(self) -> str:
        """Compact `X0 Z3` form used by the text format; empty for identity."""
        return " ".join(f"{self.letter(q)}{q}" for q in self.support())


def weight(p: PauliString) -> int:
    """Number of non-identity letters."""
    return (p.x | p.z).bit_count()


def multiply(p: PauliString, q: PauliString) -> tuple[complex, PauliString]:
    """Product p*q as (phase, string) with phase in {1, i, -1, -i}."""
    if p.n != q.n:
        raise DimensionError(f"qubit counts differ: {p.n} != {q.n}")
    exp = 0
    both = (p.x | p.z) & (q.x | q.z)
    mask = both
    while mask:
        qb = (mask & -mask).bit_length() - 1
        mask &= mask - 1
        i1 = 2 * ((p.z >> qb) & 1) + ((p.x >> qb) & 1)
        i2 = 2 * ((q.z >> qb) & 1) + ((q.x >> qb) & 1)
        exp += _PHASE_EXP[i1][i2]
    return (1j) ** (exp % 4), PauliString(p.n, p.x ^ q.x, p.z ^ q.z)


def commutes(p: PauliString, q: PauliString, kind: str = "full") -> bool:
    """Commutation predicate.

    `full`: p and q commute as matrices (symplectic product is even).
    `qubitwise`: every aligned letter pair commutes, i.e. letters are equal
    or at least one is identity.
    """
    if p.n != q.n:
        raise DimensionError(f"qubit counts differ: {p.n} != {q.n}")
    if kind == "full":
        return (((p.x & q.z).bit_count() + (p.z & q.x).bit_count()) % 2) == 0
    if kind == "qubitwise":
        both = (p.x | p.z) & (q.x | q.z)
        differ = (p.x ^ q.x) | (p.z ^ q.z)
        return both & differ == 0
    raise DataError(f"unknown commutation kind {kind!r}")


def _basis_mask(mask: int, n: int) -> int:
    """Map a qubit-indexed mask to basis-index bit positions (qubit 0 = MSB)."""
    out = 0
    for q in range(n):
        if (mask >> q) & 1:
            out |= 1 << (n - 1 - q)
    return out


def string_action(p: PauliString) -> tuple[int, int, complex]:
    """Action of p on basis states: p|b> = phase(b)|b ^ flip>.

    Returns (flip, sign_mask, base_phase): phase(b) =
    base_phase * (-1)^popcount(b & sign_mask).
    """
    n = p.n
    flip = _basis_mask(p.x, n)
    sign_mask = _basis_mask(p.z, n)
    n_y = (p.x & p.z).bit_count()
    return flip, sign_mask, (1j) ** n_y


def _phases_over_basis(p: PauliString) -> tuple[int, np.ndarray]:
    flip, sign_mask, base = string_action(p)
    dim = 1 << p.n
    idx = np.arange(dim, dtype=np.uint64)
    parity = np.bitwise_count(idx & np.uint64(sign_mask)) & 1
    phases = base * np.where(parity, -1.0, 1.0)
    return flip, phases


def string_to_dense(p: PauliString) -> np.ndarray:
    flip, phases = _phases_over_basis(p)
    dim = 1 << p.n
    mat = np.zeros((dim, dim), dtype=complex)
    cols = np.arange(dim)
    mat[cols ^ flip, cols] = phases
    return mat


def apply_string(p: PauliString, vec: np.ndarray) -> np.ndarray:
    """p @ vec without materializing a matrix."""
    flip, phases = _phases_over_basis(p)
    out = np.empty_like(vec)
    cols = np.arange(vec.shape[0])
    out[cols ^ flip] = phases * vec
    return out


class PauliSum:
    """Real-weighted sum of Pauli strings plus an identity offset.

    Invariants: stored terms are non-identity, share the same qubit count,
    and carry coefficients with |c| > SIMPLIFY_TOL; identity mass lives in
    `constant`. Instances are treated as immutable.
    """

    def __init__(
        self,
        n: int,
        terms: Iterable[tuple[float, PauliString]] = (),
        constant: float = 0.0,
    ):
        acc: dict[PauliString, float] = {}
        const = _require_real(constant, "constant")
        for coeff, string in terms:
            c = _require_real(coeff, "coefficient")
            if string.n != n:
                raise DimensionError(f"term on {string.n} qubits in {n}-qubit sum")
            if string.is_identity:
                const += c
            else:
                acc[string] = acc.get(string, 0.0) + c
        self._n = n
        self._terms = {s: c for s, c in acc.items() if abs(c) > SIMPLIFY_TOL}
        self._constant = const

    @property
    def n(self) -> int:
        return self._n

    @property
    def constant(self) -> float:
        return self._constant

    @property
    def terms(self) -> dict[PauliString, float]:
        return dict(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def coefficient(self, string: PauliString) -> float:
        return self._terms.get(string, 0.0)

    def items_sorted(self) -> list[tuple[float, PauliString]]:
        """Terms in descending |coefficient|; ties broken by letter sequence."""
        return sorted(
            ((c, s) for s, c in self._terms.items()),
            key=lambda cs: (-abs(cs[0]), cs[1].letters),
        )

    def __iter__(self) -> Iterator[tuple[float, PauliString]]:
        return iter(self.items_sorted())

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if self.n != other.n:
            raise DimensionError(f"qubit counts differ: {self.n} != {other.n}")
        merged = [(c, s) for s, c in self._terms.items()]
        merged.extend((c, s) for s, c in other._terms.items())
        return PauliSum(self.n, merged, self._constant + other._constant)

    def scaled(self, factor: float) -> "PauliSum":
        factor = _require_real(factor, "scale factor")
        return PauliSum(
            self.n,
            [(factor * c, s) for s, c in self._terms.items()],
            factor * self._constant,
        )

    def simplified(self) -> "PauliSum":
        """Re-normalize; idempotent because construction already canonicalizes."""
        return PauliSum(self.n, [(c, s) for s, c in self._terms.items()], self._constant)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PauliSum)
            and self.n == other.n
            and self._constant == other._constant
            and self._terms == other._terms
        )

    def __repr__(self) -> str:
        return f"PauliSum(n={self.n}, terms={len(self)}, constant={self._constant!r})"

    def to_matrix(
        self,
        representation: str = "sparse",
        *,
        dense_cap: int | None = None,
        sparse_cap: int | None = None,
    ):
        """Realize as a 2^n x 2^n matrix (scipy CSR or numpy array)."""
        if representation == "dense":
            cap = DENSE_QUBIT_CAP if dense_cap is None else dense_cap
            if self.n > cap:
                raise ResourceError(f"dense realization capped at {cap} qubits, got {self.n}")
            dim = 1 << self.n
            mat = np.zeros((dim, dim), dtype=complex)
            cols = np.arange(dim)
            if self._constant:
                mat[cols, cols] = self._constant
            for string, coeff in self._terms.items():
                flip, phases = _phases_over_basis(string)
                mat[cols ^ flip, cols] += coeff * phases
            return mat
        if representation == "sparse":
            cap = SPARSE_QUBIT_CAP if sparse_cap is None else sparse_cap
            if self.n > cap:
                raise ResourceError(f"sparse realization capped at {cap} qubits, got {self.n}")
            dim = 1 << self.n
            cols = np.arange(dim)
            row_chunks = []
            col_chunks = []
            data_chunks = []
            if self._constant:
                row_chunks.append(cols)
                col_chunks.append(cols)
                data_chunks.append(np.full(dim, self._constant, dtype=complex))
            for string, coeff in self._terms.items():
                flip, phases = _phases_over_basis(string)
                row_chunks.append(cols ^ flip)
                col_chunks.append(cols)
                data_chunks.append(coeff * phases)
            if not data_chunks:
                return scipy.sparse.csr_matrix((dim, dim), dtype=complex)
            mat = scipy.sparse.coo_matrix(
                (
                    np.concatenate(data_chunks),
                    (np.concatenate(row_chunks), np.concatenate(col_chunks)),
                ),
                shape=(dim, dim),
            ).tocsr()
            mat.sum_duplicates()
            return mat
        raise DataError(f"unknown representation {representation!r}")

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """Matrix-free (H @ vec), including the constant."""
        dim = 1 << self.n
        if vec.shape[0] != dim:
            raise DimensionError(f"state dimension {vec.shape[0]} != 2^{self.n}")
        out = self._constant * vec.astype(complex, copy=True)
        cols = np.arange(dim)
        for string, coeff in self._terms.items():
            flip, phases = _phases_over_basis(string)
            out[cols ^ flip] += coeff * phases * vec
        return out


def _require_real(value, what: str) -> float:
    if isinstance(value, complex):
        if abs(value.imag) > SIMPLIFY_TOL:
            raise DataError(f"{what} must be real, got {value}")
        value = value.real
    value = float(value)
    if not np.isfinite(value):
        raise DataError(f"{what} must be finite, got {value}")
    return value


def parse_pauli_text(text: str, n: int | None = None) -> PauliSum:
    """Parse the one-term-per-line text format.

    Each line is `<coefficient> <letter><qubit> ...` (e.g. `0.5 X0 Z3`);
    a line with only a coefficient is the identity term; `#` starts a comment.
    """
    parsed: list[tuple[float, list[tuple[int, str]]]] = []
    max_q = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        try:
            coeff = float(fields[0])
        except ValueError:
            raise ParseError(f"bad coefficient {fields[0]!r}", lineno) from None
        if not np.isfinite(coeff):
            raise ParseError(f"non-finite coefficient {fields[0]!r}", lineno)
        ops = []
        for tok in fields[1:]:
            if len(tok) < 2 or tok[0] not in "IXYZ":
                raise ParseError(f"bad factor {tok!r}", lineno)
            try:
                q = int(tok[1:])
            except ValueError:
                raise ParseError(f"bad qubit index in {tok!r}", lineno) from None
            if q < 0:
                raise ParseError(f"negative qubit index in {tok!r}", lineno)
            if tok[0] != "I":
                ops.append((q, tok[0]))
            max_q = max(max_q, q)
        parsed.append((coeff, ops))
    if n is None:
        n = max_q + 1 if max_q >= 0 else 0
    elif max_q >= n:
        raise DataError(f"qubit index {max_q} out of range for n={n}")
    return PauliSum(n, [(c, PauliString.from_ops(ops, n)) for c, ops in parsed])


def format_pauli_text(h: PauliSum) -> str:
    """Deterministic inverse of parse_pauli_text (descending |c|, lex ties)."""
    lines = []
    if h.constant or len(h) == 0:
        lines.append(repr(h.constant))
    for coeff, string in h.items_sorted():
        lines.append(f"{coeff!r} {string.sparse_repr()}")
    return "\n".join(lines) + "\n"
