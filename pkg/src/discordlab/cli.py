"""Command-line surface: simulate, measure, dataset, train, report.

Every command is deterministic given its config and seed, writes a manifest
next to its outputs recording a sha256 per artifact, and exits 0 on success,
1 on numeric/runtime failure, 2 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, dataset, measures, mlp
from .dynamics import ModelParams, XState, evolve, uniform_grid

TRAJECTORY_COLUMNS = (
    "t", "a", "b", "c", "d", "re_delta", "im_delta", "re_beta", "im_beta",
    "eig1", "eig2", "eig3", "eig4",
)
STATE_COLUMNS = ("a", "b", "c", "d", "re_delta", "im_delta", "re_beta", "im_beta")
DEFAULT_MEASURES = ("concurrence", "dhs", "dhl", "dbr", "red2")
DIFF_PAIRS = (
    ("dbr", "dhl"), ("dbr", "dhs"), ("dhl", "dhs"), ("red2", "concurrence"),
)

# Conventions this implementation fixes where the source material leaves
# room; recorded in every run manifest.
CONVENTION_NOTES = {
    "time_evolution": "schrodinger picture, rho(t) = U(t) rho0 U(t)^dag",
    "qfi_numerator": "(q_i - q_k)^2 difference form",
    "bures_discord_gauge": "2 (1 - max fidelity) over classical-quantum states",
    "measurement_parameterization":
        "cos(theta)|0> + e^{i phi} sin(theta)|1>; z measurement reported at theta = 0",
    "nn_output_activation": "linear",
    "time_grid": "uniform on (0, t_max], t = 0 excluded",
}


class ConfigError(ValueError):
    """Bad configuration or input file; maps to exit code 2."""


def _fmt(x: float) -> str:
    return format(x, ".17g")


def _load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


def _load_params(path) -> tuple[ModelParams, dict]:
    """Model parameters plus any non-parameter extras from a flat config."""
    if path is None:
        return ModelParams(), {}
    raw = _load_json(path)
    extras = {k: raw.pop(k) for k in ("t_max", "steps", "seed") if k in raw}
    try:
        return ModelParams.from_dict(raw), extras
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad model config {path}: {exc}") from exc


def _load_state(path) -> XState:
    raw = _load_json(path)
    try:
        return XState(
            a=raw["a"], b=raw["b"], c=raw["c"], d=raw["d"],
            delta=complex(raw.get("delta_re", 0.0), raw.get("delta_im", 0.0)),
            beta_c=complex(raw.get("beta_re", 0.0), raw.get("beta_im", 0.0)),
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad state file {path}: {exc}") from exc


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _version_string() -> str:
    """Package version, extended git-describe style when a repo is present."""
    import subprocess

    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True, text=True, timeout=5,
            cwd=Path(__file__).parent,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def write_manifest(out_dir, command: list[str], config: dict, seeds: dict,
                   artifacts: list) -> Path:
    path = Path(out_dir) / "manifest.json"
    doc = {
        "command": command,
        "config": config,
        "seeds": seeds,
        "version": _version_string(),
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "notes": CONVENTION_NOTES,
        "artifacts": {str(Path(a).name): _sha256(a) for a in artifacts},
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _write_rows(path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        w.writerows(rows)


def cmd_simulate(args) -> int:
    params, extras = _load_params(args.config)
    state = _load_state(args.state)
    t_max = args.t_max if args.t_max is not None else float(extras.get("t_max", 6.0))
    steps = args.steps if args.steps is not None else int(extras.get("steps", 60))
    rows = []
    for t in uniform_grid(t_max, steps):
        rho = evolve(state, params, t)
        xs = XState.from_matrix(rho)
        eigs = np.sort(np.linalg.eigvalsh(rho))[::-1]
        rows.append([_fmt(v) for v in (
            t, xs.a, xs.b, xs.c, xs.d,
            xs.delta.real, xs.delta.imag, xs.beta_c.real, xs.beta_c.imag,
            *eigs,
        )])
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    _write_rows(out, TRAJECTORY_COLUMNS, rows)
    write_manifest(out.parent, ["simulate"] + _redact(args), json.loads(params.to_json()),
                   {}, [out])
    print(f"simulate: wrote {len(rows)} rows to {out}")
    return 0


def _redact(args) -> list[str]:
    return [f"{k}={v}" for k, v in sorted(vars(args).items()) if k != "func" and v is not None]


def _states_from_csv(path) -> tuple[list[dict], list[XState]]:
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or any(
                c not in reader.fieldnames for c in STATE_COLUMNS
            ):
                raise ConfigError(
                    f"{path} must contain the state columns {STATE_COLUMNS}"
                )
            raw = list(reader)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    states = [
        XState(
            a=float(r["a"]), b=float(r["b"]), c=float(r["c"]), d=float(r["d"]),
            delta=complex(float(r["re_delta"]), float(r["im_delta"])),
            beta_c=complex(float(r["re_beta"]), float(r["im_beta"])),
        )
        for r in raw
    ]
    return raw, states


def cmd_measure(args) -> int:
    which = tuple(args.measures.split(","))
    unknown = set(which) - set(measures.BATCH_MEASURES)
    if unknown:
        raise ConfigError(f"unknown measures {sorted(unknown)}")
    raw, states = _states_from_csv(args.infile)
    records = measures.batch_evaluate(
        [s.to_matrix() for s in states], which=which, seed=args.seed,
        threads=args.threads,
    )
    out_cols = list(raw[0].keys()) if raw else list(STATE_COLUMNS)
    new_cols = [m for m in which]
    if "red2" in which:
        new_cols += ["theta_star", "phi_star"]
    diffs = [(a, b) for a, b in DIFF_PAIRS if a in which and b in which]
    new_cols += [f"{a}_minus_{b}" for a, b in diffs]
    rows = []
    for base, rec in zip(raw, records):
        row = dict(base)
        for m in which:
            row[m] = _fmt(rec[m])
        if "red2" in which:
            row["theta_star"] = _fmt(rec["red2_theta_star"])
            row["phi_star"] = _fmt(rec["red2_phi_star"])
        for a, b in diffs:
            row[f"{a}_minus_{b}"] = _fmt(rec[a] - rec[b])
        rows.append(row)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=out_cols + [c for c in new_cols if c not in out_cols])
        w.writeheader()
        w.writerows(rows)
    write_manifest(out.parent, ["measure"] + _redact(args), {}, {"seed": args.seed}, [out])
    print(f"measure: wrote {len(rows)} rows to {out}")
    return 0


def run_dataset_build(
    params: ModelParams,
    recipe: dict,
    seed: int,
    out_dir,
    threads: "int | None" = None,
    with_ordering: bool = False,
    command: "list[str] | None" = None,
    progress=None,
) -> dict:
    """Generate, dedup, classify, split, and persist; returns a summary."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    states = dataset.recipe_states(recipe)
    grid = dataset.recipe_grid(recipe)
    q_values = [float(q) for q in recipe["q_values"]]
    records = dataset.generate_records(
        params, states, grid, q_values, seed, threads=threads,
        with_ordering=with_ordering, progress=progress,
    )
    artifacts = []
    if with_ordering:
        measured = out_dir / "corpus_measured.csv"
        dataset.write_measured_csv(records, states, q_values, grid, measured)
        artifacts.append(measured)
        audited = len(records)
    else:
        # Ordering spot check on a 1% subsample: the Bures discord must
        # dominate the other two geometric discords on every emitted row.
        n_audit = max(1, len(records) // 100)
        stride = max(1, len(records) // n_audit)
        audited = 0
        for rec in records[::stride]:
            rho = rec.state_t.to_matrix()
            dhl = measures.discord_hellinger(rho, seed=seed).value
            dhs = measures.discord_hs(rho, seed=seed).value
            if rec.row.dbr < dhl - 1e-4 or rec.row.dbr < dhs - 1e-4:
                raise RuntimeError(
                    f"ordering audit failed at t={rec.row.t}, q={rec.row.q_used}: "
                    f"dbr={rec.row.dbr} dhl={dhl} dhs={dhs}"
                )
            audited += 1
    rows = [r.row for r in records]
    kept, rep_rate = dataset.dedup(rows)
    classified, quarantined = dataset.classify_theta(kept)
    summary = {
        "rows_generated": len(rows),
        "rows_after_dedup": len(kept),
        "repetition_rate": rep_rate,
        "quarantined": len(quarantined),
        "ordering_audited_rows": audited,
    }
    qpath = out_dir / "quarantine.csv"
    dataset.write_csv(quarantined, qpath)
    artifacts.append(qpath)
    for idx, tag in enumerate((dataset.CLASS_THETA0, dataset.CLASS_THETAQ)):
        subset = [r for r in classified if r.class_tag == tag]
        split_seed = int(np.random.SeedSequence((seed, idx)).generate_state(1)[0])
        train, val, test = dataset.split(subset, seed=split_seed)
        summary[tag] = {
            "total": len(subset), "train": len(train),
            "val": len(val), "test": len(test),
        }
        for part, part_rows in (("train", train), ("val", val), ("test", test)):
            p = out_dir / f"{tag.lower()}_{part}.csv"
            dataset.write_csv(part_rows, p)
            artifacts.append(p)
    write_manifest(
        out_dir, command or ["dataset"],
        {"params": json.loads(params.to_json()), "recipe_states": len(states),
         "steps": len(grid), "q_values": q_values},
        {"seed": seed}, artifacts,
    )
    with open(out_dir / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def _load_recipe(name_or_path) -> dict:
    if name_or_path == "reference":
        return dataset.reference_recipe()
    if name_or_path == "tiny":
        return dataset.tiny_recipe()
    raw = _load_json(name_or_path)
    for key in ("states", "t_max", "steps", "q_values"):
        if key not in raw:
            raise ConfigError(f"recipe {name_or_path} is missing '{key}'")
    return raw


def cmd_dataset(args) -> int:
    params, extras = _load_params(args.config)
    recipe = _load_recipe(args.recipe)
    seed = args.seed if args.seed is not None else int(extras.get("seed", 0))
    summary = run_dataset_build(
        params, recipe, seed, args.out_dir, threads=args.threads,
        with_ordering=args.with_ordering,
        command=["dataset"] + _redact(args),
    )
    print(f"dataset: {summary['rows_generated']} rows -> "
          f"{summary['rows_after_dedup']} after dedup "
          f"(repetition rate {summary['repetition_rate']:.4f}), "
          f"{summary['quarantined']} quarantined")
    for tag in (dataset.CLASS_THETA0, dataset.CLASS_THETAQ):
        s = summary[tag]
        print(f"  {tag}: {s['total']} rows = {s['train']}/{s['val']}/{s['test']}")
    return 0


def cmd_train(args) -> int:
    data_dir = Path(args.data_dir)
    tag = args.klass.lower()
    try:
        train_rows = dataset.read_csv(data_dir / f"{tag}_train.csv")
        val_rows = dataset.read_csv(data_dir / f"{tag}_val.csv")
    except (OSError, dataset.SchemaMismatchError) as exc:
        raise ConfigError(f"cannot load {tag} data from {data_dir}: {exc}") from exc
    if not train_rows or not val_rows:
        raise ConfigError(f"empty {tag} training/validation data in {data_dir}")
    cfg = mlp.TrainConfig(
        epochs=args.epochs, learning_rate=args.learning_rate,
        dropout_rate=args.dropout, seed=args.seed,
    )
    net = mlp.init(args.seed)
    best, history = mlp.train(
        net, dataset.to_arrays(train_rows), dataset.to_arrays(val_rows), cfg
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ckpt = out / f"{tag}_checkpoint.json"
    mlp.save(best, ckpt, config=cfg)
    hist_path = out / f"{tag}_history.csv"
    _write_rows(hist_path, ("epoch", "train_mse", "val_mse"),
                [[e, _fmt(tr), _fmt(va)] for e, tr, va in history])
    write_manifest(out, ["train"] + _redact(args),
                   {"config": mlp._config_dict(cfg)}, {"seed": args.seed},
                   [ckpt, hist_path])
    best_epoch, _, best_val = min(history, key=lambda h: (h[2], h[0]))
    print(f"train[{tag}]: best val MSE {best_val:.6f} at epoch {best_epoch}, "
          f"final train MSE {history[-1][1]:.6f}")
    return 0


def _read_table(path) -> tuple[list[str], list[dict]]:
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            return list(reader.fieldnames or []), list(reader)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


def cmd_report(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.which == "ordering":
        cols, rows = _read_table(args.infile)
        diff_cols = [c for c in cols if "_minus_" in c]
        if not diff_cols:
            # Raw measure columns: derive the standard difference columns.
            pairs = [(a, b) for a, b in DIFF_PAIRS if a in cols and b in cols]
            if not pairs:
                raise ConfigError(
                    f"{args.infile} has neither difference nor measure columns"
                )
            for r in rows:
                for a, b in pairs:
                    r[f"{a}_minus_{b}"] = _fmt(float(r[a]) - float(r[b]))
            diff_cols = [f"{a}_minus_{b}" for a, b in pairs]
        keep = [c for c in ("t", "q_used") if c in cols] + diff_cols
        _write_rows(out / "ordering_points.csv", keep,
                    [[r[c] for c in keep] for r in rows])
        lines = [f"rows: {len(rows)}"]
        for c in diff_cols:
            vals = np.array([float(r[c]) for r in rows])
            lines.append(
                f"{c}: min {vals.min():.6g} max {vals.max():.6g} "
                f"negative_beyond_1e-4 {int((vals < -1e-4).sum())} "
                f"positive {int((vals > 1e-3).sum())} negative {int((vals < -1e-3).sum())}"
            )
        for c in ("dbr_minus_dhl", "dbr_minus_dhs"):
            if c in diff_cols:
                vals = np.array([float(r[c]) for r in rows])
                lines.append(f"{c} ordering violations: {int((vals < -1e-4).sum())}")
        artifacts = [out / "ordering_points.csv"]
    elif args.which == "freezing":
        cols, rows = _read_table(args.infile)
        mcols = [c for c in cols if c in measures.BATCH_MEASURES]
        if "t" not in cols or not mcols:
            raise ConfigError(f"{args.infile} needs a t column and measure columns")
        keep = ["t"] + mcols
        _write_rows(out / "freezing_curve.csv", keep,
                    [[r[c] for c in keep] for r in rows])
        lines = [f"rows: {len(rows)}"]
        for c in mcols:
            vals = np.array([float(r[c]) for r in rows])
            lines.append(f"{c}: mean {vals.mean():.6g} "
                         f"peak_to_peak {vals.max() - vals.min():.6g}")
        artifacts = [out / "freezing_curve.csv"]
    else:
        cols, rows = _read_table(args.infile)
        if not {"epoch", "train_mse", "val_mse"} <= set(cols):
            raise ConfigError(f"{args.infile} is not a training history")
        _write_rows(out / "mse_curve.csv", ("epoch", "train_mse", "val_mse"),
                    [[r["epoch"], r["train_mse"], r["val_mse"]] for r in rows])
        epochs = [int(r["epoch"]) for r in rows]
        val = np.array([float(r["val_mse"]) for r in rows])
        tr = np.array([float(r["train_mse"]) for r in rows])
        k = int(np.argmin(val))
        lines = [
            f"epochs: {len(rows)}",
            f"best_val_epoch: {epochs[k]}",
            f"best_val_mse: {val[k]:.6g}",
            f"train_mse_at_best: {tr[k]:.6g}",
            f"final_train_mse: {tr[-1]:.6g}",
            f"final_val_mse: {val[-1]:.6g}",
        ]
        artifacts = [out / "mse_curve.csv"]
    summary = out / f"{args.which}_summary.txt"
    summary.write_text("\n".join(lines) + "\n")
    artifacts.append(summary)
    write_manifest(out, ["report"] + _redact(args), {}, {}, artifacts)
    print("\n".join(lines))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="discordlab",
        description="Two-qubit open-system correlation lab",
    )
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="evolve an X state and write its trajectory")
    s.add_argument("--config", help="model parameter JSON")
    s.add_argument("--state", required=True, help="initial X state JSON")
    s.add_argument("--t-max", type=float, dest="t_max")
    s.add_argument("--steps", type=int)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    m = sub.add_parser("measure", help="append correlation measures to state rows")
    m.add_argument("--in", dest="infile", required=True)
    m.add_argument("--measures", default=",".join(DEFAULT_MEASURES))
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--threads", type=int, default=None)
    m.add_argument("--out", required=True)
    m.set_defaults(func=cmd_measure)

    d = sub.add_parser("dataset", help="build the train/val/test corpus")
    d.add_argument("--config", help="model parameter JSON")
    d.add_argument("--recipe", default="reference",
                   help="'reference', 'tiny', or a recipe JSON path")
    d.add_argument("--seed", type=int, default=None)
    d.add_argument("--threads", type=int, default=None)
    d.add_argument("--with-ordering", action="store_true", dest="with_ordering",
                   help="also write corpus_measured.csv with all five measures")
    d.add_argument("--out-dir", required=True, dest="out_dir")
    d.set_defaults(func=cmd_dataset)

    t = sub.add_parser("train", help="train the class network on a dataset")
    t.add_argument("--data-dir", required=True, dest="data_dir")
    t.add_argument("--class", required=True, dest="klass",
                   choices=["theta0", "thetaq"])
    t.add_argument("--epochs", type=int, default=100_000)
    t.add_argument("--learning-rate", type=float, default=0.005)
    t.add_argument("--dropout", type=float, default=0.1)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_train)

    r = sub.add_parser("report", help="emit plot-ready CSV and a text summary")
    r.add_argument("--which", required=True, choices=["ordering", "freezing", "mse"])
    r.add_argument("--in", dest="infile", required=True)
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_report)
    return p


def main(argv: "list[str] | None" = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, dataset.SchemaMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # numeric or IO failure during the run
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
