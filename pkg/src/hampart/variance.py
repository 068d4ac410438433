"""Exact measurement-variance evaluation against explicit state vectors.

The shot-count figure of merit for a partition {M_q} on a state is
(sum_q sqrt(Var[M_q]))^2; a single-fragment partition gives the lower
bound Var[H]. Everything here is matrix-free: fragments are applied to
states factor by factor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DimensionError, DomainError, ResourceError
from .fragments import Fragment, Partition, apply_fragment
from .pauli import PauliSum

STATE_QUBIT_CAP = 16
_NEGATIVE_VAR_TOL = 1e-10


@dataclass(frozen=True)
class StateVector:
    """Normalized n-qubit state with provenance label (e.g. 'haar:7')."""

    n: int
    amplitudes: np.ndarray
    seed: str = ""

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (1 << self.n,):
            raise DimensionError(f"state needs 2^{self.n} amplitudes, got {amp.shape}")
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > 1e-12:
            raise DataError(f"state norm {norm} deviates from 1")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)


def random_state(n: int, seed: int) -> StateVector:
    """Haar-distributed state: normalized i.i.d. complex Gaussian amplitudes."""
    if n > STATE_QUBIT_CAP:
        raise ResourceError(f"states capped at {STATE_QUBIT_CAP} qubits, got {n}")
    rng = np.random.default_rng(seed)
    amp = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    amp /= np.linalg.norm(amp)
    return StateVector(n, amp, seed=f"haar:{seed}")


def basis_state(n: int, index: int) -> StateVector:
    if not 0 <= index < (1 << n):
        raise DomainError(f"basis index {index} out of range for n={n}")
    amp = np.zeros(1 << n, dtype=complex)
    amp[index] = 1.0
    return StateVector(n, amp, seed=f"basis:{index}")


def fragment_variance(frag: Fragment, psi: StateVector) -> float:
    """Var[M] = <psi|M^2|psi> - <psi|M|psi>^2 via two applications of M."""
    support = frag.support()
    if support and support[-1] >= psi.n:
        raise DimensionError(
            f"fragment touches qubit {support[-1]} but the state has {psi.n} qubits"
        )
    vec = psi.amplitudes
    m_psi = apply_fragment(frag, vec, psi.n)
    mean = np.vdot(vec, m_psi)
    m2_psi = apply_fragment(frag, m_psi, psi.n)
    second = np.vdot(vec, m2_psi)
    if abs(mean.imag) > 1e-9 or abs(second.imag) > 1e-9:
        raise DataError(f"non-real expectation ({mean}, {second}); fragment not Hermitian?")
    var = second.real - mean.real**2
    if var < -_NEGATIVE_VAR_TOL:
        raise DataError(f"variance {var} below clamp threshold; fragment not Hermitian?")
    return max(var, 0.0)


@dataclass(frozen=True)
class VarianceReport:
    """Per-fragment variances and the total shot-count figure for one state."""

    method: str
    state_seed: str
    fragment_count: int
    per_fragment: tuple[float, ...]
    total: float

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "state_seed": self.state_seed,
            "fragment_count": self.fragment_count,
            "per_fragment": list(self.per_fragment),
            "total": self.total,
        }


def partition_cost(p: Partition, psi: StateVector) -> VarianceReport:
    """Total = (sum_q sqrt(Var[M_q]))^2; the constant contributes nothing."""
    if p.n != psi.n:
        raise DimensionError(f"partition on {p.n} qubits, state on {psi.n}")
    per = tuple(fragment_variance(frag, psi) for frag in p.fragments)
    total = float(np.sum(np.sqrt(np.asarray(per))) ** 2)
    return VarianceReport(
        method=p.source,
        state_seed=psi.seed,
        fragment_count=len(p.fragments),
        per_fragment=per,
        total=total,
    )


def lower_bound(h: PauliSum, psi: StateVector) -> float:
    """Var[H]: the single-fragment cost."""
    if h.n != psi.n:
        raise DimensionError(f"operator on {h.n} qubits, state on {psi.n}")
    vec = psi.amplitudes
    h_psi = h.apply(vec)
    mean = np.vdot(vec, h_psi).real
    second = np.vdot(vec, h.apply(h_psi)).real
    return max(second - mean**2, 0.0)


# ---------------------------------------------------------------------------
# One-qubit rotated-basis analysis

# For H = eta*X + sqrt(1-eta^2)*Z and |psi> = alpha|0> + sqrt(1-alpha^2)|1>:
#   <X> = 2*alpha*sqrt(1-alpha^2), <Z> = 2*alpha^2 - 1, and H^2 = I,
# so both basis costs reduce to closed forms in (eta, alpha).


def rotated_basis_demo(eta: float, alpha: float) -> tuple[float, float]:
    """Shot counts for the two-basis Pauli split vs. the single rotated basis.

    Returns (N_GPB, N_RB) where
    N_GPB = (eta*sqrt(Var[X]) + sqrt(1-eta^2)*sqrt(Var[Z]))^2 and
    N_RB = 1 - <H>^2 on the real one-qubit state parameterized by alpha.
    """
    if not (0.0 <= eta <= 1.0 and 0.0 <= alpha <= 1.0):
        raise DomainError(f"eta and alpha must lie in [0, 1], got ({eta}, {alpha})")
    ex = 2.0 * alpha * np.sqrt(max(1.0 - alpha * alpha, 0.0))
    ez = 2.0 * alpha * alpha - 1.0
    var_x = max(1.0 - ex * ex, 0.0)
    var_z = max(1.0 - ez * ez, 0.0)
    comp = np.sqrt(max(1.0 - eta * eta, 0.0))
    n_gpb = (eta * np.sqrt(var_x) + comp * np.sqrt(var_z)) ** 2
    mean_h = eta * ex + comp * ez
    n_rb = 1.0 - mean_h * mean_h
    return float(n_gpb), float(n_rb)


def theorem1_grid(resolution: int, parameterization: str = "angle") -> np.ndarray:
    """Grid of (eta, alpha, N_GPB, N_RB) rows.

    `angle` places eta = cos(theta), alpha = cos(phi) on uniform angle grids
    over [0, pi/2] (so 1/sqrt(2) and cos(pi/8) appear exactly at resolution
    101); `uniform` spaces eta and alpha directly over [0, 1].
    """
    if resolution < 2:
        raise DomainError(f"resolution must be >= 2, got {resolution}")
    if parameterization == "angle":
        angles = np.linspace(0.0, np.pi / 2.0, resolution)
        etas = np.cos(angles)
        alphas = np.cos(angles)
    elif parameterization == "uniform":
        etas = np.linspace(0.0, 1.0, resolution)
        alphas = np.linspace(0.0, 1.0, resolution)
    else:
        raise DataError(f"unknown parameterization {parameterization!r}")
    rows = np.empty((resolution * resolution, 4))
    i = 0
    for eta in etas:
        eta = min(max(float(eta), 0.0), 1.0)
        for alpha in alphas:
            alpha = min(max(float(alpha), 0.0), 1.0)
            gpb, rb = rotated_basis_demo(eta, alpha)
            rows[i] = (eta, alpha, gpb, rb)
            i += 1
    return rows
