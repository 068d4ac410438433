"""Measurement fragments: tensor-product terms with bounded-size factors.

A TensorProductTerm is a product of Hermitian blocks on disjoint qubit sets
(identity implied elsewhere); a Fragment is a set of such terms measured in
one basis; a Partition is a list of fragments plus an identity constant that
together reconstruct a Hamiltonian.

Matrix convention matches pauli.py: qubit 0 is the most significant basis
bit. A factor's block is indexed with its first listed qubit as the most
significant block bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.sparse

from . import pauli as _pauli
from .errors import DataError, DimensionError, ResourceError
from .pauli import PauliString, PauliSum, pauli_matrix

_HERMITIAN_TOL = 1e-10


class TensorFactor:
    """Hermitian block acting on an ordered tuple of qubits."""

    __slots__ = ("qubits", "block")

    def __init__(self, qubits, block):
        qubits = tuple(int(q) for q in qubits)
        if len(set(qubits)) != len(qubits):
            raise DataError(f"repeated qubit in factor {qubits}")
        block = np.array(block, dtype=complex)
        dim = 1 << len(qubits)
        if block.shape != (dim, dim):
            raise DimensionError(
                f"factor on {len(qubits)} qubits needs a {dim} x {dim} block, got {block.shape}"
            )
        if np.max(np.abs(block - block.conj().T)) > _HERMITIAN_TOL:
            raise DataError("factor block is not Hermitian")
        block.setflags(write=False)
        object.__setattr__(self, "qubits", qubits)
        object.__setattr__(self, "block", block)

    def __setattr__(self, *_):
        raise AttributeError("TensorFactor is immutable")

    @property
    def size(self) -> int:
        return len(self.qubits)

    def __repr__(self) -> str:
        return f"TensorFactor(qubits={self.qubits})"


class TensorProductTerm:
    """Product of factors on pairwise-disjoint qubit sets."""

    __slots__ = ("factors",)

    def __init__(self, factors):
        factors = tuple(factors)
        seen: set[int] = set()
        for f in factors:
            overlap = seen.intersection(f.qubits)
            if overlap:
                raise DataError(f"factors overlap on qubits {sorted(overlap)}")
            seen.update(f.qubits)
        object.__setattr__(self, "factors", factors)

    def __setattr__(self, *_):
        raise AttributeError("TensorProductTerm is immutable")

    def support(self) -> tuple[int, ...]:
        return tuple(sorted(q for f in self.factors for q in f.qubits))

    def max_factor_size(self) -> int:
        return max((f.size for f in self.factors), default=0)

    def __repr__(self) -> str:
        return f"TensorProductTerm({[f.qubits for f in self.factors]})"


@dataclass(frozen=True)
class Fragment:
    """Terms simultaneously measurable in one basis."""

    terms: tuple[TensorProductTerm, ...]
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    def support(self) -> tuple[int, ...]:
        return tuple(sorted({q for t in self.terms for q in t.support()}))

    def max_factor_size(self) -> int:
        return max((t.max_factor_size() for t in self.terms), default=0)


@dataclass(frozen=True)
class Partition:
    """Fragments plus identity constant reconstructing an n-qubit Hamiltonian."""

    n: int
    fragments: tuple[Fragment, ...]
    constant: float = 0.0
    source: str = ""
    hamiltonian_sha256: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "fragments", tuple(self.fragments))
        for frag in self.fragments:
            for term in frag.terms:
                for f in term.factors:
                    if f.qubits and max(f.qubits) >= self.n:
                        raise DataError(
                            f"factor on qubits {f.qubits} exceeds n={self.n}"
                        )

    def __len__(self) -> int:
        return len(self.fragments)

    def max_factor_size(self) -> int:
        return max((f.max_factor_size() for f in self.fragments), default=0)


def pauli_term(coeff: float, string: PauliString) -> TensorProductTerm:
    """Weighted Pauli string as a product of 1-qubit factors (coeff in the first)."""
    support = string.support()
    if not support:
        raise DataError("identity terms belong in Partition.constant")
    factors = []
    for pos, q in enumerate(support):
        block = pauli_matrix(string.letter(q))
        if pos == 0:
            block = coeff * block
        factors.append(TensorFactor((q,), block))
    return TensorProductTerm(factors)


def pauli_group_fragment(group: list[tuple[float, PauliString]], label: str) -> Fragment:
    return Fragment(tuple(pauli_term(c, s) for c, s in group), label)


# ---------------------------------------------------------------------------
# Realization


def _deposit(values: np.ndarray, bit_sources: list[int], bit_targets: list[int]) -> np.ndarray:
    """Move bit `bit_sources[j]` of each value to bit `bit_targets[j]`."""
    out = np.zeros_like(values)
    for src, tgt in zip(bit_sources, bit_targets):
        out |= ((values >> src) & 1) << tgt
    return out


def term_matrix(term: TensorProductTerm, n: int, representation: str = "sparse"):
    """Realize a term on the full 2^n space."""
    if representation == "dense":
        if n > _pauli.DENSE_QUBIT_CAP:
            raise ResourceError(f"dense realization capped at {_pauli.DENSE_QUBIT_CAP} qubits")
        return _term_dense(term, n)
    if representation == "sparse":
        if n > _pauli.SPARSE_QUBIT_CAP:
            raise ResourceError(f"sparse realization capped at {_pauli.SPARSE_QUBIT_CAP} qubits")
        return _term_sparse(term, n)
    raise DataError(f"unknown representation {representation!r}")


def _term_dense(term: TensorProductTerm, n: int) -> np.ndarray:
    qubit_order = [q for f in term.factors for q in f.qubits]
    blocks = [f.block for f in term.factors]
    rest = [q for q in range(n) if q not in qubit_order]
    if rest:
        blocks.append(np.eye(1 << len(rest), dtype=complex))
    full = reduce(np.kron, blocks) if blocks else np.eye(1 << n, dtype=complex)
    order = qubit_order + rest
    # kron axis j corresponds to qubit order[j]; permute axes to qubit order.
    axis_of_qubit = [order.index(q) for q in range(n)]
    tensor = full.reshape((2,) * (2 * n))
    perm = axis_of_qubit + [n + a for a in axis_of_qubit]
    return tensor.transpose(perm).reshape(1 << n, 1 << n)


def _term_sparse(term: TensorProductTerm, n: int) -> scipy.sparse.csr_matrix:
    dim = 1 << n
    if not term.factors:
        return scipy.sparse.identity(dim, dtype=complex, format="csr")
    qubit_order = [q for f in term.factors for q in f.qubits]
    m = len(qubit_order)
    combined = reduce(np.kron, [f.block for f in term.factors])
    a_idx, b_idx = np.nonzero(combined)
    vals = combined[a_idx, b_idx]
    # Support bits: combined-index bit (m-1-j) belongs to qubit qubit_order[j],
    # which sits at basis bit (n-1-q).
    src = [m - 1 - j for j in range(m)]
    tgt = [n - 1 - qubit_order[j] for j in range(m)]
    row_supp = _deposit(a_idx.astype(np.int64), src, tgt)
    col_supp = _deposit(b_idx.astype(np.int64), src, tgt)
    rest = [q for q in range(n) if q not in qubit_order]
    x = np.arange(1 << len(rest), dtype=np.int64)
    rest_bits = _deposit(x, list(range(len(rest))), [n - 1 - q for q in reversed(rest)])
    rows = (row_supp[:, None] + rest_bits[None, :]).ravel()
    cols = (col_supp[:, None] + rest_bits[None, :]).ravel()
    data = np.repeat(vals, rest_bits.shape[0])
    mat = scipy.sparse.coo_matrix((data, (rows, cols)), shape=(dim, dim)).tocsr()
    mat.sum_duplicates()
    return mat


def fragment_matrix(frag: Fragment, n: int, representation: str = "sparse"):
    if representation == "dense":
        out = np.zeros((1 << n, 1 << n), dtype=complex)
        for term in frag.terms:
            out += _term_dense(term, n)
        return out
    mats = [term_matrix(t, n, "sparse") for t in frag.terms]
    if not mats:
        return scipy.sparse.csr_matrix((1 << n, 1 << n), dtype=complex)
    return reduce(lambda a, b: a + b, mats)


def partition_matrix(p: Partition, representation: str = "sparse"):
    n = p.n
    if representation == "dense":
        out = np.zeros((1 << n, 1 << n), dtype=complex)
        for frag in p.fragments:
            out += fragment_matrix(frag, n, "dense")
        out += p.constant * np.eye(1 << n)
        return out
    out = p.constant * scipy.sparse.identity(1 << n, dtype=complex, format="csr")
    for frag in p.fragments:
        out = out + fragment_matrix(frag, n, "sparse")
    return out


def apply_block(vec: np.ndarray, n: int, qubits: tuple[int, ...], block: np.ndarray) -> np.ndarray:
    """Apply an arbitrary 2^m x 2^m block on `qubits` to an n-qubit vector."""
    m = len(qubits)
    psi = vec.reshape((2,) * n) if n else vec
    block_t = block.reshape((2,) * (2 * m))
    psi = np.tensordot(block_t, psi, axes=(list(range(m, 2 * m)), list(qubits)))
    psi = np.moveaxis(psi, list(range(m)), list(qubits))
    return psi.reshape(-1)


def apply_term(term: TensorProductTerm, vec: np.ndarray, n: int) -> np.ndarray:
    """term @ vec via per-factor tensor contraction; no matrices materialized."""
    out = vec
    for f in term.factors:
        out = apply_block(out, n, f.qubits, f.block)
    return out


def apply_fragment(frag: Fragment, vec: np.ndarray, n: int) -> np.ndarray:
    if vec.shape[0] != 1 << n:
        raise DimensionError(f"state dimension {vec.shape[0]} != 2^{n}")
    out = np.zeros_like(vec, dtype=complex)
    for term in frag.terms:
        out += apply_term(term, vec, n)
    return out


def pauli_sum_from_fragment(frag: Fragment, n: int) -> PauliSum | None:
    """Exact Pauli form of a fragment; None if imaginary weight appears."""
    from .encodings import pauli_project
    from .pauli import multiply

    terms = []
    constant = 0.0
    for term in frag.terms:
        parts = [(1.0 + 0j, PauliString.identity(n))]
        for f in term.factors:
            lifted = []
            for c, s in pauli_project(f.block, f.size):
                ops = [(f.qubits[j], s.letter(j)) for j in range(f.size) if s.letter(j) != "I"]
                lifted.append((c, PauliString.from_ops(ops, n)))
            new_parts = []
            for c0, s0 in parts:
                for c1, s1 in lifted:
                    phase, s = multiply(s0, s1)
                    new_parts.append((c0 * c1 * phase, s))
            parts = new_parts
        for c, s in parts:
            if abs(c.imag) > 1e-9:
                return None
            if s.is_identity:
                constant += c.real
            else:
                terms.append((c.real, s))
    return PauliSum(n, terms, constant)


# ---------------------------------------------------------------------------
# JSON serialization (bit-exact round trip)

FORMAT_TAG = "hampart-partition-v1"


def _block_to_json(block: np.ndarray) -> list[list[float]]:
    flat = block.ravel()
    return [[float(v.real), float(v.imag)] for v in flat]


def _block_from_json(data, dim: int) -> np.ndarray:
    arr = np.array([complex(re, im) for re, im in data], dtype=complex)
    if arr.size != dim * dim:
        raise DataError(f"block length {arr.size} != {dim * dim}")
    return arr.reshape(dim, dim)


def partition_to_json(p: Partition) -> dict:
    return {
        "format": FORMAT_TAG,
        "source": p.source,
        "n": p.n,
        "constant": p.constant,
        "hamiltonian_sha256": p.hamiltonian_sha256,
        "fragments": [
            {
                "label": frag.label,
                "terms": [
                    {
                        "factors": [
                            {"qubits": list(f.qubits), "block": _block_to_json(f.block)}
                            for f in term.factors
                        ]
                    }
                    for term in frag.terms
                ],
            }
            for frag in p.fragments
        ],
    }


def partition_from_json(data: dict | str) -> Partition:
    if isinstance(data, str):
        data = json.loads(data)
    if data.get("format") != FORMAT_TAG:
        raise DataError(f"unknown partition format {data.get('format')!r}")
    fragments = []
    for frag in data["fragments"]:
        terms = []
        for term in frag["terms"]:
            factors = []
            for f in term["factors"]:
                qubits = tuple(int(q) for q in f["qubits"])
                factors.append(TensorFactor(qubits, _block_from_json(f["block"], 1 << len(qubits))))
            terms.append(TensorProductTerm(factors))
        fragments.append(Fragment(tuple(terms), frag.get("label", "")))
    return Partition(
        n=int(data["n"]),
        fragments=tuple(fragments),
        constant=float(data["constant"]),
        source=data.get("source", ""),
        hamiltonian_sha256=data.get("hamiltonian_sha256"),
    )


def save_partition(path, p: Partition):
    with open(path, "w") as fh:
        json.dump(partition_to_json(p), fh, indent=1)
        fh.write("\n")


def load_partition(path) -> Partition:
    with open(path) as fh:
        return partition_from_json(json.load(fh))
