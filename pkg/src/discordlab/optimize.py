"""Shared derivative-free minimization: grid seeding, Nelder-Mead, multistart.

All searches are box-bounded; candidate points are clamped to the box before
evaluation, so objectives only ever see feasible points. Everything is
deterministic for a fixed :class:`ObjectiveSpec` seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


class BudgetExceededError(ValueError):
    """Requested lattice is larger than the evaluation budget."""


@dataclass(frozen=True)
class ObjectiveSpec:
    """Search box plus termination and reproducibility settings."""

    dimension: int
    bounds: tuple[tuple[float, float], ...]
    tolerance: float = 1e-9
    max_evals: int = 2000
    seed: int = 0

    def __post_init__(self):
        if len(self.bounds) != self.dimension:
            raise ValueError("bounds length must equal dimension")
        if any(lo >= hi for lo, hi in self.bounds):
            raise ValueError("each bound must satisfy lo < hi")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")

    @property
    def lo(self) -> np.ndarray:
        return np.array([b[0] for b in self.bounds])

    @property
    def hi(self) -> np.ndarray:
        return np.array([b[1] for b in self.bounds])


@dataclass
class OptimizeResult:
    """Best point found, with bookkeeping for determinism checks."""

    value: float
    argmin: np.ndarray
    evaluations: int
    converged: bool
    start_values: tuple[float, ...] = ()


def grid_search(
    f: Callable[[np.ndarray], float],
    spec: ObjectiveSpec,
    points_per_dim: "int | Sequence[int]",
) -> tuple[np.ndarray, float]:
    """Evaluate the full lattice and return its argmin (first hit on ties)."""
    if isinstance(points_per_dim, int):
        counts = [points_per_dim] * spec.dimension
    else:
        counts = list(points_per_dim)
        if len(counts) != spec.dimension:
            raise ValueError("points_per_dim length must equal dimension")
    total = int(np.prod(counts))
    if total > spec.max_evals:
        raise BudgetExceededError(
            f"lattice of {total} points exceeds budget {spec.max_evals}"
        )
    axes = [np.linspace(lo, hi, c) for (lo, hi), c in zip(spec.bounds, counts)]
    best_x, best_f = None, np.inf
    for idx in np.ndindex(*counts):
        x = np.array([axes[k][i] for k, i in enumerate(idx)])
        fx = f(x)
        if fx < best_f:
            best_x, best_f = x, fx
    return best_x, float(best_f)


def nelder_mead(
    f: Callable[[np.ndarray], float],
    spec: ObjectiveSpec,
    x0: np.ndarray,
) -> tuple[np.ndarray, float, bool]:
    """Nelder-Mead with reflect/expand/contract/shrink = 1, 2, 0.5, 0.5.

    Terminates when the simplex diameter (max-norm spread around the current
    best vertex) drops below ``spec.tolerance``, or on budget exhaustion
    (``converged=False``). Returns the best point ever evaluated.
    """
    lo, hi = spec.lo, spec.hi
    n = spec.dimension
    evals = 0
    best_x, best_f = None, np.inf

    def feval(x: np.ndarray) -> float:
        nonlocal evals, best_x, best_f
        x = np.clip(x, lo, hi)
        fx = float(f(x))
        evals += 1
        if fx < best_f:
            best_x, best_f = x, fx
        return fx

    x0 = np.clip(np.asarray(x0, dtype=float), lo, hi)
    verts = np.empty((n + 1, n))
    verts[0] = x0
    for i in range(n):
        step = 0.05 * (hi[i] - lo[i])
        if x0[i] + step > hi[i]:
            step = -step
        verts[i + 1] = x0
        verts[i + 1, i] += step
    fv = np.array([feval(v) for v in verts])

    converged = False
    while evals < spec.max_evals:
        order = np.argsort(fv, kind="stable")
        verts, fv = verts[order], fv[order]
        if np.max(np.abs(verts[1:] - verts[0])) < spec.tolerance:
            converged = True
            break
        centroid = verts[:-1].mean(axis=0)
        xr = centroid + (centroid - verts[-1])
        fr = feval(xr)
        if fr < fv[0]:
            xe = centroid + 2.0 * (centroid - verts[-1])
            fe = feval(xe)
            if fe < fr:
                verts[-1], fv[-1] = np.clip(xe, lo, hi), fe
            else:
                verts[-1], fv[-1] = np.clip(xr, lo, hi), fr
        elif fr < fv[-2]:
            verts[-1], fv[-1] = np.clip(xr, lo, hi), fr
        else:
            if fr < fv[-1]:
                xc = centroid + 0.5 * (centroid - verts[-1])
                fc = feval(xc)
                if fc <= fr:
                    verts[-1], fv[-1] = np.clip(xc, lo, hi), fc
                else:
                    verts, fv = _shrink(verts, fv, feval)
            else:
                xcc = centroid - 0.5 * (centroid - verts[-1])
                fcc = feval(xcc)
                if fcc < fv[-1]:
                    verts[-1], fv[-1] = np.clip(xcc, lo, hi), fcc
                else:
                    verts, fv = _shrink(verts, fv, feval)
        if evals >= spec.max_evals:
            break

    return best_x, best_f, converged


def _shrink(verts, fv, feval):
    for i in range(1, len(verts)):
        verts[i] = verts[0] + 0.5 * (verts[i] - verts[0])
        fv[i] = feval(verts[i])
    return verts, fv


def multistart(
    f: Callable[[np.ndarray], float],
    spec: ObjectiveSpec,
    n_starts: int,
    grid_points: "int | Sequence[int] | None" = None,
    extra_starts: Sequence[np.ndarray] = (),
) -> OptimizeResult:
    """Polish a grid seed, any supplied seeds, and seeded-random starts.

    The global best is reduced deterministically (ties go to the lowest start
    index), so the result is independent of any parallel execution of starts.
    """
    if n_starts < 1:
        raise ValueError("n_starts must be >= 1")
    evaluations = 0

    def counted(x: np.ndarray) -> float:
        nonlocal evaluations
        evaluations += 1
        return f(x)

    starts: list[np.ndarray] = []
    if grid_points is not None:
        gx, _ = grid_search(counted, spec, grid_points)
        starts.append(gx)
    starts.extend(np.clip(np.asarray(x, dtype=float), spec.lo, spec.hi)
                  for x in extra_starts)
    n_random = max(0, n_starts - len(starts))
    if n_random:
        rng = np.random.default_rng(spec.seed)
        rand = rng.uniform(spec.lo, spec.hi, size=(n_random, spec.dimension))
        starts.extend(rand)

    best = None
    start_values = []
    for idx, x0 in enumerate(starts):
        x, fx, conv = nelder_mead(counted, spec, x0)
        start_values.append(fx)
        if best is None or fx < best[0]:
            best = (fx, idx, x, conv)
    fx, _, x, conv = best
    return OptimizeResult(
        value=fx,
        argmin=x,
        evaluations=evaluations,
        converged=conv,
        start_values=tuple(start_values),
    )
