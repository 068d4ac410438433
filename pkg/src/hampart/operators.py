"""Pre-encoded fermionic and bosonic operators, lattices, and model builders.

Fermionic terms are lists of ladder operators (mode, dagger); bosonic terms
are lists of one-mode factors drawn from {b, bdag, q, p, n}. Both operator
types are plain term containers: builders produce Hermitian content and
`is_hermitian` checks conjugate pairing term by term.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DomainError, ParseError

LATTICE_KINDS = ("chain", "square", "hexagonal", "triangular", "cubic", "tetrahedral", "custom")

BOSON_SYMBOLS = ("b", "bdag", "q", "p", "n")
_BOSON_CONJ = {"b": "bdag", "bdag": "b", "q": "q", "p": "p", "n": "n"}


@dataclass(frozen=True)
class Lattice:
    """Finite graph of sites; `positions` carries generator coordinates when known."""

    kind: str
    sites: int
    edges: tuple[tuple[int, int], ...]
    boundary: str = "open"
    positions: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        if self.kind not in LATTICE_KINDS:
            raise DataError(f"unknown lattice kind {self.kind!r}")
        if self.boundary not in ("open", "periodic"):
            raise DataError(f"unknown boundary {self.boundary!r}")
        seen = set()
        canon = []
        for i, j in self.edges:
            if i == j:
                raise DataError(f"self-loop at site {i}")
            if not (0 <= i < self.sites and 0 <= j < self.sites):
                raise DataError(f"edge ({i}, {j}) out of range for {self.sites} sites")
            e = (min(i, j), max(i, j))
            if e in seen:
                raise DataError(f"duplicate edge {e}")
            seen.add(e)
            canon.append(e)
        object.__setattr__(self, "edges", tuple(canon))
        if self.positions is not None:
            if len(self.positions) != self.sites:
                raise DataError("positions must cover every site")
            object.__setattr__(self, "positions", tuple(tuple(p) for p in self.positions))

    def degree(self) -> int:
        deg = [0] * self.sites
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return max(deg, default=0)


def chain_lattice(sites: int, boundary: str = "open") -> Lattice:
    if sites < 1:
        raise DomainError("chain needs at least 1 site")
    edges = [(i, i + 1) for i in range(sites - 1)]
    if boundary == "periodic" and sites > 2:
        edges.append((sites - 1, 0))
    return Lattice("chain", sites, tuple(edges), boundary, tuple((i,) for i in range(sites)))


def square_lattice(width: int, height: int) -> Lattice:
    """Open-boundary rectangular patch of the square lattice."""
    idx = {(x, y): x + width * y for y in range(height) for x in range(width)}
    edges = []
    for (x, y), i in idx.items():
        if (x + 1, y) in idx:
            edges.append((i, idx[(x + 1, y)]))
        if (x, y + 1) in idx:
            edges.append((i, idx[(x, y + 1)]))
    pos = sorted(idx, key=idx.get)
    return Lattice("square", len(idx), tuple(edges), "open", tuple(pos))


def hexagonal_lattice(width: int, height: int) -> Lattice:
    """Brick-wall patch of the honeycomb lattice (vertical rungs on even x+y)."""
    idx = {(x, y): x + width * y for y in range(height) for x in range(width)}
    edges = []
    for (x, y), i in idx.items():
        if (x + 1, y) in idx:
            edges.append((i, idx[(x + 1, y)]))
        if (x, y + 1) in idx and (x + y) % 2 == 0:
            edges.append((i, idx[(x, y + 1)]))
    pos = sorted(idx, key=idx.get)
    return Lattice("hexagonal", len(idx), tuple(edges), "open", tuple(pos))


def triangular_lattice(width: int, height: int) -> Lattice:
    """Open patch of the triangular lattice (square grid plus one diagonal family)."""
    idx = {(x, y): x + width * y for y in range(height) for x in range(width)}
    edges = []
    for (x, y), i in idx.items():
        for dx, dy in ((1, 0), (0, 1), (1, 1)):
            if (x + dx, y + dy) in idx:
                edges.append((i, idx[(x + dx, y + dy)]))
    pos = sorted(idx, key=idx.get)
    return Lattice("triangular", len(idx), tuple(edges), "open", tuple(pos))


def cubic_lattice(nx: int, ny: int, nz: int) -> Lattice:
    idx = {
        (x, y, z): x + nx * (y + ny * z)
        for z in range(nz)
        for y in range(ny)
        for x in range(nx)
    }
    edges = []
    for (x, y, z), i in idx.items():
        for d in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
            nb = (x + d[0], y + d[1], z + d[2])
            if nb in idx:
                edges.append((i, idx[nb]))
    pos = sorted(idx, key=idx.get)
    return Lattice("cubic", len(idx), tuple(edges), "open", tuple(pos))


# Bond vectors from the even sublattice of the diamond (tetrahedral) lattice.
TETRAHEDRAL_BONDS = ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1))


def tetrahedral_lattice(extent: int = 2) -> Lattice:
    """Open patch of the diamond lattice; every site has degree <= 4.

    Sublattice A sits at scaled FCC points (components even, sum % 4 == 0),
    sublattice B at A + (1, 1, 1); bonds follow TETRAHEDRAL_BONDS.
    """
    if extent < 1:
        raise DomainError("extent must be >= 1")
    span = range(0, 2 * extent + 1, 2)
    a_sites = [
        (x, y, z) for x in span for y in span for z in span if (x + y + z) % 4 == 0
    ]
    site_set = set(a_sites)
    for p in a_sites:
        for b in TETRAHEDRAL_BONDS:
            site_set.add((p[0] + b[0], p[1] + b[1], p[2] + b[2]))
    pos = sorted(site_set)
    idx = {p: i for i, p in enumerate(pos)}
    edges = []
    for p in a_sites:
        for b in TETRAHEDRAL_BONDS:
            nb = (p[0] + b[0], p[1] + b[1], p[2] + b[2])
            if nb in idx:
                edges.append((idx[p], idx[nb]))
    return Lattice("tetrahedral", len(pos), tuple(edges), "open", tuple(pos))


def custom_lattice(sites: int, edges) -> Lattice:
    return Lattice("custom", sites, tuple(tuple(e) for e in edges))


def lattice_to_json(lat: Lattice) -> dict:
    out = {
        "kind": lat.kind,
        "sites": lat.sites,
        "edges": [list(e) for e in lat.edges],
        "boundary": lat.boundary,
    }
    if lat.positions is not None:
        out["positions"] = [list(p) for p in lat.positions]
    return out


def lattice_from_json(data: dict | str) -> Lattice:
    if isinstance(data, str):
        data = json.loads(data)
    try:
        return Lattice(
            data["kind"],
            int(data["sites"]),
            tuple(tuple(e) for e in data["edges"]),
            data.get("boundary", "open"),
            tuple(tuple(p) for p in data["positions"]) if data.get("positions") else None,
        )
    except KeyError as exc:
        raise DataError(f"lattice JSON missing field {exc}") from None


FermionTerm = tuple[float, tuple[tuple[int, bool], ...]]


@dataclass(frozen=True)
class FermionOperator:
    """Sum of products of fermionic ladder operators on `modes` modes."""

    modes: int
    terms: tuple[FermionTerm, ...] = ()

    def __post_init__(self):
        canon = []
        for coeff, ops in self.terms:
            ops = tuple((int(m), bool(d)) for m, d in ops)
            for m, _ in ops:
                if not 0 <= m < self.modes:
                    raise DataError(f"mode {m} out of range for {self.modes} modes")
            canon.append((float(coeff), ops))
        object.__setattr__(self, "terms", tuple(canon))

    def __len__(self) -> int:
        return len(self.terms)

    def accumulated(self) -> dict[tuple[tuple[int, bool], ...], float]:
        acc: dict[tuple[tuple[int, bool], ...], float] = {}
        for coeff, ops in self.terms:
            acc[ops] = acc.get(ops, 0.0) + coeff
        return {k: v for k, v in acc.items() if abs(v) > 1e-14}

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        """Term-level conjugate pairing, up to signed reordering across modes."""
        canon: dict[tuple, float] = {}

        def _absorb(ops, coeff):
            key, sign = _fermion_mode_sort(ops)
            canon[key] = canon.get(key, 0.0) + sign * coeff

        for ops, coeff in self.accumulated().items():
            _absorb(ops, coeff)
            conj = tuple((m, not d) for m, d in reversed(ops))
            _absorb(conj, -coeff)
        return all(abs(v) <= tol for v in canon.values())

    def support_spread(self) -> int:
        touched = sorted({m for _, ops in self.terms for m, _ in ops})
        return touched[-1] - touched[0] + 1 if touched else 0


def _fermion_mode_sort(ops: tuple[tuple[int, bool], ...]) -> tuple[tuple, int]:
    """Stable-sort ladder ops by mode; each cross-mode transposition flips sign."""
    seq = list(ops)
    sign = 1
    changed = True
    while changed:
        changed = False
        for i in range(len(seq) - 1):
            if seq[i][0] > seq[i + 1][0]:
                seq[i], seq[i + 1] = seq[i + 1], seq[i]
                sign = -sign
                changed = True
    return tuple(seq), sign


BosonTerm = tuple[float, tuple[tuple[int, str], ...]]


@dataclass(frozen=True)
class BosonOperator:
    """Sum of products of one-mode bosonic factors, truncated to d levels per mode."""

    modes: int
    d: int
    terms: tuple[BosonTerm, ...] = ()

    def __post_init__(self):
        if self.d < 2:
            raise DomainError(f"truncation d must be >= 2, got {self.d}")
        canon = []
        for coeff, factors in self.terms:
            factors = tuple((int(m), str(s)) for m, s in factors)
            for m, s in factors:
                if not 0 <= m < self.modes:
                    raise DataError(f"mode {m} out of range for {self.modes} modes")
                if s not in BOSON_SYMBOLS:
                    raise DataError(f"unknown bosonic symbol {s!r}")
            canon.append((float(coeff), factors))
        object.__setattr__(self, "terms", tuple(canon))

    def __len__(self) -> int:
        return len(self.terms)

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        canon: dict[tuple, float] = {}

        def _absorb(factors, coeff):
            key = tuple(sorted(factors, key=lambda f: f[0]))
            canon[key] = canon.get(key, 0.0) + coeff

        for coeff, factors in self.terms:
            _absorb(factors, coeff)
            conj = tuple((m, _BOSON_CONJ[s]) for m, s in reversed(factors))
            _absorb(conj, -coeff)
        return all(abs(v) <= tol for v in canon.values())


def boson_matrices(d: int) -> dict[str, np.ndarray]:
    """Truncated ladder and quadrature matrices on d levels.

    b|l> = sqrt(l)|l-1>, q = (b + b^t)/sqrt(2), p = i(b^t - b)/sqrt(2),
    n = b^t b = diag(0..d-1).
    """
    if d < 2:
        raise DomainError(f"need d >= 2, got {d}")
    b = np.zeros((d, d), dtype=complex)
    for level in range(1, d):
        b[level - 1, level] = np.sqrt(level)
    bdag = b.conj().T
    q = (b + bdag) / np.sqrt(2)
    p = 1j * (bdag - b) / np.sqrt(2)
    n = bdag @ b
    return {"b": b, "bdag": bdag, "q": q, "p": p, "n": n}


def build_fermi_hubbard(lat: Lattice, t: float, U: float) -> FermionOperator:
    """Spinless nearest-neighbor Hubbard model on the lattice's edge list.

    H = -sum_<ij> t (a+_i a_j + a+_j a_i) + sum_<ij> (U/2) a+_i a_i a+_j a_j
    """
    terms = []
    for i, j in lat.edges:
        if t != 0.0:
            terms.append((-t, ((i, True), (j, False))))
            terms.append((-t, ((j, True), (i, False))))
        if U != 0.0:
            terms.append((U / 2.0, ((i, True), (i, False), (j, True), (j, False))))
    return FermionOperator(lat.sites, tuple(terms))


def build_bose_hubbard(lat: Lattice, t: float, U: float, d: int) -> BosonOperator:
    """H = -sum_<ij> t (b+_i b_j + h.c.) + sum_i (U/2) n_i (n_i - 1)."""
    terms = []
    for i, j in lat.edges:
        if t != 0.0:
            terms.append((-t, ((i, "bdag"), (j, "b"))))
            terms.append((-t, ((j, "bdag"), (i, "b"))))
    for i in range(lat.sites):
        if U != 0.0:
            terms.append((U / 2.0, ((i, "n"), (i, "n"))))
            terms.append((-U / 2.0, ((i, "n"),)))
    return BosonOperator(lat.sites, d, tuple(terms))


def build_vibrational(
    omega, couplings: dict[tuple[int, ...], float] | None, d: int
) -> BosonOperator:
    """Harmonic part (1/2) sum_i w_i (q_i^2 + p_i^2) plus q-string couplings.

    Coupling keys are mode-index tuples of arbitrary order; each key (i, j, k)
    contributes t * q_i q_j q_k (repeat an index for powers).
    """
    omega = [float(w) for w in omega]
    modes = len(omega)
    terms = []
    for i, w in enumerate(omega):
        if w != 0.0:
            terms.append((0.5 * w, ((i, "q"), (i, "q"))))
            terms.append((0.5 * w, ((i, "p"), (i, "p"))))
    for key, coeff in (couplings or {}).items():
        key = tuple(int(m) for m in key)
        for m in key:
            if not 0 <= m < modes:
                raise DataError(f"coupling index {m} out of range for {modes} modes")
        if coeff != 0.0:
            terms.append((float(coeff), tuple((m, "q") for m in key)))
    return BosonOperator(modes, d, tuple(terms))


def vibrational_from_json(data: dict | str, d: int | None = None) -> BosonOperator:
    """JSON form: {"omega": [...], "couplings": {"0,1,2": t, ...}, "d": 4}."""
    if isinstance(data, str):
        data = json.loads(data)
    couplings = {}
    for key, val in data.get("couplings", {}).items():
        idx = tuple(int(tok) for tok in str(key).split(","))
        couplings[idx] = float(val)
    if d is None:
        d = int(data["d"])
    return build_vibrational(data["omega"], couplings, d)


# ---------------------------------------------------------------------------
# FCIDUMP ingestion


@dataclass
class ElectronicIntegrals:
    """Spatial-orbital integrals: h[i,j], chemist-notation g[(ij|kl)], core energy."""

    norb: int
    h: dict[tuple[int, int], float] = field(default_factory=dict)
    g: dict[tuple[int, int, int, int], float] = field(default_factory=dict)
    core: float = 0.0

    def set_one_body(self, i: int, j: int, value: float):
        self.h[(i, j)] = value
        self.h[(j, i)] = value

    def set_two_body(self, i: int, j: int, k: int, l: int, value: float):
        for a, b in ((i, j), (j, i)):
            for c, e in ((k, l), (l, k)):
                self.g[(a, b, c, e)] = value
                self.g[(c, e, a, b)] = value


_NORB_RE = re.compile(r"NORB\s*=\s*(\d+)", re.IGNORECASE)


def read_fcidump(path) -> ElectronicIntegrals:
    """Parse an FCIDUMP file into spatial-orbital integrals (1-based -> 0-based)."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    header = []
    body_start = None
    for lineno, line in enumerate(lines, start=1):
        header.append(line)
        if "&END" in line.upper() or line.strip() == "/":
            body_start = lineno
            break
    if body_start is None:
        raise ParseError("missing &END (or '/') header terminator")
    m = _NORB_RE.search(" ".join(header))
    if not m:
        raise ParseError("header does not declare NORB")
    ints = ElectronicIntegrals(norb=int(m.group(1)))
    for lineno, line in enumerate(lines[body_start:], start=body_start + 1):
        stripped = line.strip()
        if not stripped:
            continue
        fields = stripped.split()
        if len(fields) != 5:
            raise ParseError(f"expected `value i j k l`, got {stripped!r}", lineno)
        try:
            value = float(fields[0])
            i, j, k, l = (int(tok) for tok in fields[1:])
        except ValueError:
            raise ParseError(f"bad numeric field in {stripped!r}", lineno) from None
        for idx in (i, j, k, l):
            if idx < 0 or idx > ints.norb:
                raise DataError(f"line {lineno}: orbital index {idx} out of range")
        if i == 0 and j == 0 and k == 0 and l == 0:
            ints.core += value
        elif k == 0 and l == 0:
            if j == 0:
                continue  # orbital-energy record; not part of the Hamiltonian
            ints.set_one_body(i - 1, j - 1, value)
        elif i > 0 and j > 0 and k > 0 and l > 0:
            ints.set_two_body(i - 1, j - 1, k - 1, l - 1, value)
        else:
            raise ParseError(f"unsupported index pattern in {stripped!r}", lineno)
    return ints


def write_fcidump(path, ints: ElectronicIntegrals, nelec: int = 0, ms2: int = 0):
    """Emit integrals in FCIDUMP format (full double precision)."""
    with open(path, "w") as fh:
        fh.write(f" &FCI NORB={ints.norb},NELEC={nelec},MS2={ms2},\n")
        fh.write("  ORBSYM=" + "1," * ints.norb + "\n")
        fh.write("  ISYM=1,\n")
        fh.write(" &END\n")
        written = set()
        for (i, j, k, l), val in sorted(ints.g.items()):
            key = frozenset(((i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k),
                             (k, l, i, j), (l, k, i, j), (k, l, j, i), (l, k, j, i)))
            if key in written or val == 0.0:
                continue
            written.add(key)
            fh.write(f" {val!r} {i + 1} {j + 1} {k + 1} {l + 1}\n")
        seen1 = set()
        for (i, j), val in sorted(ints.h.items()):
            if (j, i) in seen1 or val == 0.0:
                continue
            seen1.add((i, j))
            fh.write(f" {val!r} {i + 1} {j + 1} 0 0\n")
        fh.write(f" {ints.core!r} 0 0 0 0\n")


def fermion_from_integrals(ints: ElectronicIntegrals) -> FermionOperator:
    """Expand spatial integrals to interleaved spin orbitals (index 2*orb + spin).

    One-body: sum_ij h_ij a+_{i s} a_{j s}. Two-body from chemist (ij|kl):
    (1/2) sum_{st} sum_{ijkl} (ij|kl) a+_{i s} a+_{k t} a_{l t} a_{j s}.
    The core energy enters as an empty-product (identity) term.
    """
    terms = []
    if ints.core != 0.0:
        terms.append((ints.core, ()))
    for (i, j), val in ints.h.items():
        if val == 0.0:
            continue
        for s in (0, 1):
            terms.append((val, ((2 * i + s, True), (2 * j + s, False))))
    for (i, j, k, l), val in ints.g.items():
        if val == 0.0:
            continue
        for s in (0, 1):
            for t in (0, 1):
                p, q = 2 * i + s, 2 * k + t
                r, w = 2 * l + t, 2 * j + s
                if p == q or r == w:
                    continue
                terms.append((0.5 * val, ((p, True), (q, True), (r, False), (w, False))))
    return FermionOperator(2 * ints.norb, tuple(terms))


def load_fcidump(path) -> FermionOperator:
    """FCIDUMP file -> spin-orbital FermionOperator (core energy as identity term)."""
    return fermion_from_integrals(read_fcidump(path))
