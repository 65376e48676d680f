"""Training-corpus pipeline: generate, deduplicate, classify, split, persist.

A row links the seven input features (state eigenvalues, the Renyi-discord
argmin angles, the Renyi-2 discord itself) to the Bures-discord label, plus
the provenance columns time, bath coupling, and theta-class tag.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from . import measures
from .dynamics import ModelParams, XState, evolve, uniform_grid
from .parallel import parallel_map

CSV_COLUMNS = (
    "eig1", "eig2", "eig3", "eig4", "theta_star", "phi_star",
    "red2", "dbr", "t", "q_used", "class_tag",
)
CLASS_THETA0 = "THETA0"
CLASS_THETAQ = "THETAQ"


class SchemaMismatchError(ValueError):
    """CSV header does not match the dataset schema."""


@dataclass
class FeatureRow:
    eig1: float
    eig2: float
    eig3: float
    eig4: float
    theta_star: float
    phi_star: float
    red2: float
    dbr: float
    t: float
    q_used: float
    class_tag: str = ""

    def features(self) -> np.ndarray:
        return np.array(
            [self.eig1, self.eig2, self.eig3, self.eig4,
             self.theta_star, self.phi_star, self.red2]
        )

    def validate(self) -> "FeatureRow":
        eigs = (self.eig1, self.eig2, self.eig3, self.eig4)
        if any(e < -1e-12 or e > 1.0 + 1e-12 for e in eigs):
            raise ValueError(f"eigenvalues out of [0,1]: {eigs}")
        if any(b > a + 1e-12 for a, b in zip(eigs, eigs[1:])):
            raise ValueError(f"eigenvalues not descending: {eigs}")
        if abs(sum(eigs) - 1.0) > 1e-8:
            raise ValueError(f"eigenvalues sum to {sum(eigs)!r}")
        if self.red2 < 0:
            raise ValueError(f"negative red2 {self.red2}")
        if not 0.0 <= self.dbr <= 2.0:
            raise ValueError(f"dbr {self.dbr} outside [0,2]")
        return self


@dataclass(frozen=True)
class RowTask:
    """One (initial state, bath coupling, time) cell of the sampling grid."""

    params: ModelParams
    state: XState
    q: float
    t: float
    seed: int
    with_ordering: bool = False


@dataclass
class RowRecord:
    """A feature row plus the evolved state and any extra ordering measures."""

    row: FeatureRow
    state_t: XState
    extras: dict


def _task_seed(base_seed: int, state_idx: int, q_idx: int, t_idx: int) -> int:
    ss = np.random.SeedSequence((base_seed, state_idx, q_idx, t_idx))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def compute_row(task: RowTask) -> RowRecord:
    """Evolve one cell and evaluate its measures. Pure function of the task."""
    params = task.params.with_q(task.q)
    rho_t = evolve(task.state, params, task.t)
    eigs = np.sort(np.linalg.eigvalsh(rho_t))[::-1]
    red = measures.renyi_discord(rho_t, 2.0, seed=task.seed)
    dbr = measures.discord_bures(rho_t, seed=task.seed)
    row = FeatureRow(
        eig1=float(eigs[0]), eig2=float(eigs[1]),
        eig3=float(eigs[2]), eig4=float(eigs[3]),
        theta_star=float(red.argmin[0]), phi_star=float(red.argmin[1]),
        red2=red.value, dbr=dbr.value, t=task.t, q_used=task.q,
    )
    extras = {}
    if task.with_ordering:
        extras["concurrence"] = measures.concurrence(rho_t)
        extras["dhl"] = measures.discord_hellinger(rho_t, seed=task.seed).value
        extras["dhs"] = measures.discord_hs(rho_t, seed=task.seed).value
    return RowRecord(row=row, state_t=XState.from_matrix(rho_t), extras=extras)


def generate_records(
    params: ModelParams,
    initial_states: list[XState],
    t_grid: list[float],
    q_values: list[float],
    seed: int,
    threads: "int | None" = None,
    with_ordering: bool = False,
    progress=None,
) -> list[RowRecord]:
    if not initial_states or not t_grid or not q_values:
        raise ValueError("initial_states, t_grid and q_values must be nonempty")
    tasks = [
        RowTask(
            params=params, state=s, q=q, t=t,
            seed=_task_seed(seed, si, qi, ti),
            with_ordering=with_ordering,
        )
        for si, s in enumerate(initial_states)
        for qi, q in enumerate(q_values)
        for ti, t in enumerate(t_grid)
    ]
    return parallel_map(compute_row, tasks, threads=threads, progress=progress)


def generate(
    params: ModelParams,
    initial_states: list[XState],
    t_grid: list[float],
    q_values: list[float],
    seed: int,
    threads: "int | None" = None,
) -> list[FeatureRow]:
    """One feature row per (initial state, q, grid time), deterministic in seed."""
    recs = generate_records(
        params, initial_states, t_grid, q_values, seed, threads=threads
    )
    return [r.row for r in recs]


def dedup(
    rows: list[FeatureRow], rounding: float = 1e-6
) -> tuple[list[FeatureRow], float]:
    """Collapse rows whose features agree after rounding to the given quantum.

    Keeps the first occurrence; returns the surviving rows and the repetition
    rate removed/total.
    """
    seen = set()
    kept = []
    for row in rows:
        key = tuple(int(round(v / rounding)) for v in row.features())
        if key in seen:
            continue
        seen.add(key)
        kept.append(row)
    rate = (len(rows) - len(kept)) / len(rows) if rows else 0.0
    return kept, rate


def classify_theta(
    rows: list[FeatureRow], tol: float = 1e-2
) -> tuple[list[FeatureRow], list[FeatureRow]]:
    """Tag rows by their optimal measurement angle theta*.

    Within tol of 0 -> THETA0, within tol of pi/4 -> THETAQ; anything else is
    quarantined and returned separately.
    """
    classified, quarantined = [], []
    for row in rows:
        if abs(row.theta_star) <= tol:
            classified.append(replace(row, class_tag=CLASS_THETA0))
        elif abs(row.theta_star - math.pi / 4) <= tol:
            classified.append(replace(row, class_tag=CLASS_THETAQ))
        else:
            quarantined.append(row)
    return classified, quarantined


def split(
    rows: list[FeatureRow],
    fractions: tuple[float, float, float] = (0.6, 0.2, 0.2),
    seed: int = 0,
) -> tuple[list[FeatureRow], list[FeatureRow], list[FeatureRow]]:
    """Seeded shuffle into train/val/test with sizes within one row of the
    requested proportions."""
    if abs(sum(fractions) - 1.0) > 1e-12:
        raise ValueError("fractions must sum to 1")
    order = np.random.default_rng(seed).permutation(len(rows))
    n_train = int(round(fractions[0] * len(rows)))
    n_val = int(round(fractions[1] * len(rows)))
    shuffled = [rows[i] for i in order]
    return (
        shuffled[:n_train],
        shuffled[n_train:n_train + n_val],
        shuffled[n_train + n_val:],
    )


def write_csv(rows: list[FeatureRow], path) -> None:
    """Write the dataset schema with 17-significant-digit floats."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for row in rows:
            w.writerow(
                [format(getattr(row, c), ".17g") for c in CSV_COLUMNS[:-1]]
                + [row.class_tag]
            )


def read_csv(path) -> list[FeatureRow]:
    """Read rows back, validating the header and every row's invariants."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if header is None or tuple(header) != CSV_COLUMNS:
            raise SchemaMismatchError(f"unexpected header {header} in {path}")
        rows = []
        for rec in r:
            if len(rec) != len(CSV_COLUMNS):
                raise SchemaMismatchError(f"row width {len(rec)} in {path}")
            vals = [float(v) for v in rec[:-1]]
            rows.append(FeatureRow(*vals, class_tag=rec[-1]).validate())
    return rows


def to_arrays(rows: list[FeatureRow]) -> tuple[np.ndarray, np.ndarray]:
    """Feature matrix (n, 7) and label vector (n,) for network training."""
    x = np.array([r.features() for r in rows])
    y = np.array([r.dbr for r in rows])
    return x, y


MEASURED_COLUMNS = (
    "state_id", "q_used", "t",
    "a", "b", "c", "d", "re_delta", "im_delta", "re_beta", "im_beta",
    "eig1", "eig2", "eig3", "eig4",
    "concurrence", "dhs", "dhl", "dbr", "red2", "theta_star", "phi_star",
)


def write_measured_csv(records, states, q_values, t_grid, path) -> None:
    """Full per-row corpus: evolved state, spectrum, and all five measures.

    Records must come from :func:`generate_records` with ``with_ordering``
    set, in its (state, q, t) task order.
    """
    nq, nt = len(q_values), len(t_grid)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(MEASURED_COLUMNS)
        for i, rec in enumerate(records):
            sid = i // (nq * nt)
            xs = rec.state_t
            row = rec.row
            w.writerow(
                [str(sid)]
                + [format(v, ".17g") for v in (
                    row.q_used, row.t,
                    xs.a, xs.b, xs.c, xs.d,
                    xs.delta.real, xs.delta.imag,
                    xs.beta_c.real, xs.beta_c.imag,
                    row.eig1, row.eig2, row.eig3, row.eig4,
                    rec.extras["concurrence"], rec.extras["dhs"],
                    rec.extras["dhl"], row.dbr, row.red2,
                    row.theta_star, row.phi_star,
                )]
            )


def read_measured_csv(path) -> list[dict]:
    """Rows of the measured corpus as {column: float} dicts."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if header is None or tuple(header) != MEASURED_COLUMNS:
            raise SchemaMismatchError(f"unexpected header {header} in {path}")
        return [dict(zip(MEASURED_COLUMNS, map(float, rec))) for rec in r]


def reference_recipe() -> dict:
    """Default sampling recipe for the desk-scale corpus.

    Two X-state sub-families on the same (b, c) lattice with 0.1 steps and
    inner coherences on the 0.1 ladder allowed by |beta_c|^2 <= b c:

    * inner family, empty |00> corner: a = delta = 0, d = 1 - b - c; its
      discord minimizers sit at the z measurement (theta* = 0);
    * mixed family, the remaining mass split evenly across the outer corner
      (a = d) with outer coherence delta = 0.1; its minimizers favor the
      equatorial measurement (theta* = pi/4).

    Two bath couplings and 60 uniform times on (0, 6] ps per state.
    """
    states = []
    grid = [0.1, 0.2, 0.3, 0.4, 0.5]
    for b in grid:
        for c in grid:
            n_inner = int(math.floor(math.sqrt(b * c) / 0.1 + 1e-9))
            for k in range(1, n_inner + 1):
                states.append(_state_dict(0.0, b, c, 1.0 - b - c, 0.0, k * 0.1))
            corner = (1.0 - b - c) / 2.0
            if corner >= 0.1 - 1e-12:
                for k in range(1, n_inner + 1):
                    states.append(_state_dict(corner, b, c, corner, 0.1, k * 0.1))
    return {
        "states": states,
        "t_max": 6.0,
        "steps": 60,
        "q_values": [30.0, 60.0],
    }


def tiny_recipe() -> dict:
    """Two states, one coupling, ten times; for smoke tests."""
    return {
        "states": [
            _state_dict(0.0, 0.4, 0.5, 0.1, 0.0, 0.4),
            _state_dict(0.25, 0.25, 0.25, 0.25, 0.2, 0.1),
        ],
        "t_max": 6.0,
        "steps": 10,
        "q_values": [30.0],
    }


def _state_dict(a, b, c, d, delta, beta_c) -> dict:
    return {
        "a": a, "b": b, "c": c, "d": d,
        "delta_re": complex(delta).real, "delta_im": complex(delta).imag,
        "beta_re": complex(beta_c).real, "beta_im": complex(beta_c).imag,
    }


def recipe_states(recipe: dict) -> list[XState]:
    return [
        XState(
            a=s["a"], b=s["b"], c=s["c"], d=s["d"],
            delta=complex(s["delta_re"], s["delta_im"]),
            beta_c=complex(s["beta_re"], s["beta_im"]),
        )
        for s in recipe["states"]
    ]


def recipe_grid(recipe: dict) -> list[float]:
    return uniform_grid(float(recipe["t_max"]), int(recipe["steps"]))
