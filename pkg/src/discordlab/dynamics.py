"""Exact reduced dynamics of two qubits coupled to two correlated spin baths.

The bath conserves total spin and magnetization, so the reduced evolution is a
Gibbs-weighted mixture of closed 4x4 unitaries, one per bath magnetization
sector ``(m1, m2)``. X-form initial states stay X-form for all times.

Units: all couplings and frequencies in 1/ps, times in ps, ``beta_t`` in ps.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace
from functools import lru_cache
from typing import Sequence

import numpy as np

X_PATTERN = np.array(
    [
        [True, False, False, True],
        [False, True, True, False],
        [False, True, True, False],
        [True, False, False, True],
    ]
)


class InvalidQuantumNumberError(ValueError):
    """(N, j) is not a valid collective-spin multiplet label."""


class NonAscendingGridError(ValueError):
    """Time grid is not strictly ascending."""


@dataclass(frozen=True)
class ModelParams:
    """All Hamiltonian and bath constants, defaults from the reference run."""

    j1: float = 9.0
    j2: float = 11.0
    omega1: float = 5.0
    omega2: float = 6.0
    alpha1: float = 250.0
    alpha2: float = 200.0
    gamma1: float = 0.2
    gamma2: float = 0.3
    q: float = 30.0
    beta_t: float = 1.0 / 77.0
    n1: int = 14
    n2: int = 12

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("bath sizes n1, n2 must be >= 1")
        if self.beta_t <= 0:
            raise ValueError("inverse temperature beta_t must be > 0")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ModelParams":
        return cls.from_dict(json.loads(text))

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown model parameters: {sorted(unknown)}")
        return cls(**d)

    def with_q(self, q: float) -> "ModelParams":
        return replace(self, q=q)


@dataclass
class XState:
    """Two-qubit X-form state in the basis |00>, |01>, |10>, |11>.

    ``delta`` is the |00><11| coherence, ``beta_c`` the |01><10| coherence
    (named to avoid clashing with the inverse temperature).
    """

    a: float
    b: float
    c: float
    d: float
    delta: complex = 0.0
    beta_c: complex = 0.0

    def __post_init__(self):
        pops = (self.a, self.b, self.c, self.d)
        if min(pops) < -1e-12:
            raise ValueError(f"negative population in {pops}")
        if abs(sum(pops) - 1.0) > 1e-10:
            raise ValueError(f"populations sum to {sum(pops)!r}, expected 1")
        if abs(self.delta) ** 2 > self.a * self.d + 1e-12:
            raise ValueError("|delta|^2 exceeds a*d")
        if abs(self.beta_c) ** 2 > self.b * self.c + 1e-12:
            raise ValueError("|beta_c|^2 exceeds b*c")

    def to_matrix(self) -> np.ndarray:
        m = np.zeros((4, 4), dtype=complex)
        m[0, 0], m[1, 1], m[2, 2], m[3, 3] = self.a, self.b, self.c, self.d
        m[0, 3] = self.delta
        m[3, 0] = np.conj(self.delta)
        m[1, 2] = self.beta_c
        m[2, 1] = np.conj(self.beta_c)
        return m

    @classmethod
    def from_matrix(cls, m: np.ndarray, atol: float = 1e-10) -> "XState":
        defect = x_pattern_defect(m)
        if defect > atol:
            raise ValueError(f"matrix is not X-form: off-pattern entry {defect:.3e}")
        return cls(
            a=float(m[0, 0].real),
            b=float(m[1, 1].real),
            c=float(m[2, 2].real),
            d=float(m[3, 3].real),
            delta=complex(m[0, 3]),
            beta_c=complex(m[1, 2]),
        )


@dataclass
class SectorPropagator:
    """Closed 4x4 unitary for one bath magnetization sector."""

    m1: float
    m2: float
    u: np.ndarray
    weight: float


def x_pattern_defect(m: np.ndarray) -> float:
    """Largest off-X-pattern entry magnitude."""
    return float(np.max(np.abs(np.where(X_PATTERN, 0.0, m))))


def degeneracy(n: int, j: float) -> int:
    """Multiplicity of the total-spin-j multiplet among n spin-1/2 particles.

    nu(n, j) = C(n, n/2 - j) - C(n, n/2 - j - 1).
    """
    if n < 1:
        raise InvalidQuantumNumberError(f"need n >= 1, got {n}")
    k = n / 2.0 - j
    if j < 0 or j > n / 2.0 or abs(k - round(k)) > 1e-9:
        raise InvalidQuantumNumberError(f"invalid (n, j) = ({n}, {j})")
    k = round(k)
    lower = math.comb(n, k - 1) if k >= 1 else 0
    return math.comb(n, k) - lower


def magnetization_count(n: int, m: float) -> int:
    """Number of bath basis states with total S^z = m: sum over j of nu(n, j)."""
    k = n / 2.0 - m
    if abs(k - round(k)) > 1e-9 or k < 0 or k > n:
        raise InvalidQuantumNumberError(f"invalid (n, m) = ({n}, {m})")
    return math.comb(n, round(k))


def magnetizations(n: int) -> np.ndarray:
    """All S^z eigenvalues for n spin-1/2 particles, ascending."""
    return np.arange(n + 1) - n / 2.0


def sector_weight(params: ModelParams, m1: float, m2: float, j1: float, j2: float) -> float:
    """Unnormalized Gibbs weight of the (j1, m1, j2, m2) bath sector."""
    nu = degeneracy(params.n1, j1) * degeneracy(params.n2, j2)
    expo = -params.beta_t * (
        params.q * m1 * m2 + params.alpha1 * m1 + params.alpha2 * m2
    )
    return nu * math.exp(expo)


def _log_weights(params: ModelParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Log of j-aggregated sector weights on the (m1, m2) grid."""
    m1 = magnetizations(params.n1)
    m2 = magnetizations(params.n2)
    logg1 = np.array([math.lgamma(params.n1 + 1)
                      - math.lgamma(k + 1) - math.lgamma(params.n1 - k + 1)
                      for k in range(params.n1 + 1)])
    logg2 = np.array([math.lgamma(params.n2 + 1)
                      - math.lgamma(k + 1) - math.lgamma(params.n2 - k + 1)
                      for k in range(params.n2 + 1)])
    mm1, mm2 = np.meshgrid(m1, m2, indexing="ij")
    expo = -params.beta_t * (
        params.q * mm1 * mm2 + params.alpha1 * mm1 + params.alpha2 * mm2
    )
    logw = logg1[:, None] + logg2[None, :] + expo
    return mm1.ravel(), mm2.ravel(), logw.ravel()


def partition_function(params: ModelParams) -> float:
    """Bath partition function Z, the sum of all sector weights.

    Computed over magnetization sectors with the exact degeneracy sums. When
    the exponents are large enough to overflow, the log-sum-exp form keeps the
    ratios finite and Z itself saturates at inf.
    """
    _, _, logw = _log_weights(params)
    if np.max(np.abs(logw)) > 500.0:
        peak = float(np.max(logw))
        return float(math.exp(peak) * np.exp(logw - peak).sum())
    return float(np.exp(logw).sum())


def _phase_terms(params: ModelParams, m1: float, m2: float):
    w1 = params.omega1 + params.gamma1 * m1
    w2 = params.omega2 + params.gamma2 * m2
    e1 = w1 + w2 + params.j2
    e4 = -e1 + 2.0 * params.j2
    q = w1 - w2
    rsq = q * q + 4.0 * params.j1 * params.j1
    return e1, e4, q, rsq


def sector_propagator(params: ModelParams, m1: float, m2: float, t: float) -> SectorPropagator:
    """Propagator U(t) of the two qubits inside one magnetization sector.

    Corners carry pure phases exp(-i E1 t), exp(-i E4 t); the |01>, |10>
    block mixes through the flip-flop coupling j1. The degenerate case
    Q^2 + 4 j1^2 = 0 reduces to the diagonal analytic limit.
    """
    if t < 0:
        raise ValueError(f"need t >= 0, got {t}")
    e1, e4, q, rsq = _phase_terms(params, m1, m2)
    u = np.zeros((4, 4), dtype=complex)
    u[0, 0] = np.exp(-1j * e1 * t)
    u[3, 3] = np.exp(-1j * e4 * t)
    if abs(rsq) < 1e-14:
        # e2 = e3 = -j2; the central block is a pure phase.
        u[1, 1] = u[2, 2] = np.exp(1j * params.j2 * t)
    else:
        r = math.sqrt(rsq)
        e2, e3 = -params.j2 + r, -params.j2 - r
        q1, q2 = q + r, q - r
        p2, p3 = np.exp(-1j * e2 * t), np.exp(-1j * e3 * t)
        u[1, 1] = (p2 * q1 - p3 * q2) / (2.0 * r)
        u[1, 2] = u[2, 1] = 2.0 * params.j1 * (p2 - p3) / (2.0 * r)
        u[2, 2] = (-p2 * q2 + p3 * q1) / (2.0 * r)
    weight = (
        magnetization_count(params.n1, m1)
        * magnetization_count(params.n2, m2)
        * math.exp(
            -params.beta_t
            * (params.q * m1 * m2 + params.alpha1 * m1 + params.alpha2 * m2)
        )
    )
    return SectorPropagator(m1=m1, m2=m2, u=u, weight=weight)


@lru_cache(maxsize=32)
def _sector_table(params: ModelParams):
    """Per-sector phase data and normalized weights, cached per parameter set."""
    m1, m2, logw = _log_weights(params)
    w = np.exp(logw - np.max(logw))
    w /= w.sum()
    e1 = np.empty_like(w)
    e4 = np.empty_like(w)
    q = np.empty_like(w)
    rsq = np.empty_like(w)
    for i in range(w.size):
        e1[i], e4[i], q[i], rsq[i] = _phase_terms(params, m1[i], m2[i])
    return m1, m2, w, e1, e4, q, rsq


def evolve(rho0: "XState | np.ndarray", params: ModelParams, t: float) -> np.ndarray:
    """Reduced state at time t: the weighted mixture of sector evolutions.

    Accepts an :class:`XState` or any 4x4 density matrix; X form is preserved
    exactly by the sector block structure.
    """
    if t < 0:
        raise ValueError(f"need t >= 0, got {t}")
    rho = rho0.to_matrix() if isinstance(rho0, XState) else np.asarray(rho0, dtype=complex)
    _, _, w, e1, e4, q, rsq = _sector_table(params)
    r = np.sqrt(rsq)
    rsafe = np.where(rsq < 1e-14, 1.0, r)
    cos_rt = np.where(rsq < 1e-14, 1.0, np.cos(r * t))
    sin_over_r = np.where(rsq < 1e-14, 0.0, np.sin(r * t) / rsafe)
    inner_phase = np.exp(1j * params.j2 * t)
    s = w.size
    u = np.zeros((s, 4, 4), dtype=complex)
    u[:, 0, 0] = np.exp(-1j * e1 * t)
    u[:, 3, 3] = np.exp(-1j * e4 * t)
    u[:, 1, 1] = inner_phase * (cos_rt - 1j * q * sin_over_r)
    u[:, 2, 2] = inner_phase * (cos_rt + 1j * q * sin_over_r)
    u[:, 1, 2] = u[:, 2, 1] = inner_phase * (-2j * params.j1 * sin_over_r)
    return np.einsum("s,sij,jk,slk->il", w, u, rho, u.conj(), optimize=True)


def trajectory(
    rho0: "XState | np.ndarray", params: ModelParams, t_grid: Sequence[float]
) -> list[tuple[float, np.ndarray]]:
    """Evolve once per grid point; the grid must be strictly ascending."""
    t_grid = list(t_grid)
    if any(b <= a for a, b in zip(t_grid, t_grid[1:])):
        raise NonAscendingGridError(f"grid {t_grid[:5]}... is not strictly ascending")
    return [(t, evolve(rho0, params, t)) for t in t_grid]


def uniform_grid(t_max: float, steps: int) -> list[float]:
    """steps points t_max/steps, 2 t_max/steps, ..., t_max (excludes t=0)."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    return [t_max * k / steps for k in range(1, steps + 1)]
