"""Command-line surface: validate, score, rank, synth, ablate.

Reports are JSON (authoritative) with a CSV mirror next to them.
Scatter files for external plotting are two-column CSV with header
"accuracy,score". The dispersion score's -inf sentinel is serialized as
JSON -Infinity (readable by json.load) and "-inf" in CSV.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from ._kernels import backend_name
from .baselines import SND_ANTICORRELATED, SND_DEFAULT_TAU, baseline_scores
from .bundle import (
    BundleError,
    DatasetBundle,
    l2_normalize,
    load_bundle,
    validate_bundle_dir,
    write_bundle,
)
from .metrics import ranking_metrics
from .synth import SynthConfig, generate_zoo
from .vega import VegaConfig, effective_textual, vega_score_sweep
from .zeroshot import cosine_matrix, pseudo_labels, softmax_probs, zero_shot_accuracy

TEMPERATURE_SWEEP = (0.005, 0.01, 0.05, 0.1, 0.5)

REPORT_COLUMNS = (
    "model_id",
    "s_n",
    "s_e",
    "vega",
    "ent_raw",
    "ent_score",
    "conf",
    "snd",
    "ds",
    "rot",
    "accuracy",
    "wall_time",
    "error",
)

SCORE_COLUMNS = tuple(
    c for c in REPORT_COLUMNS if c not in ("model_id", "accuracy", "wall_time", "error")
)


class CliError(Exception):
    """User-facing failure with a structured message."""


@dataclass(frozen=True)
class EngineConfig:
    """Scoring configuration: the graph-alignment knobs plus the
    baseline-only parameters."""

    vega: VegaConfig = VegaConfig()
    snd_tau: float = SND_DEFAULT_TAU
    ds_seed: int = 0

    def as_dict(self) -> dict:
        out = self.vega.as_dict()
        out["snd_tau"] = self.snd_tau
        out["ds_seed"] = self.ds_seed
        return out


_CONFIG_KEYS = (
    "t",
    "cov_mode",
    "edge_transform",
    "shrinkage",
    "snd_tau",
    "ds_seed",
    "normalize",
    "exclude_diagonal",
)


def load_engine_config(path: str | None) -> EngineConfig:
    if path is None:
        return EngineConfig()
    raw = _read_json(Path(path), "config")
    if not isinstance(raw, dict):
        raise CliError(f"config file {path} must hold a JSON object")
    unknown = sorted(set(raw) - set(_CONFIG_KEYS))
    if unknown:
        raise CliError(
            f"unknown config key(s) {', '.join(unknown)}; known: {', '.join(_CONFIG_KEYS)}"
        )
    vega_kwargs = {k: raw[k] for k in raw if k not in ("snd_tau", "ds_seed")}
    try:
        cfg = VegaConfig(**vega_kwargs)
    except (TypeError, ValueError) as exc:
        raise CliError(f"bad config: {exc}") from exc
    snd_tau = raw.get("snd_tau", SND_DEFAULT_TAU)
    if not isinstance(snd_tau, (int, float)) or snd_tau <= 0:
        raise CliError(f"snd_tau must be a positive number, got {snd_tau!r}")
    ds_seed = raw.get("ds_seed", 0)
    if not isinstance(ds_seed, int):
        raise CliError(f"ds_seed must be an integer, got {ds_seed!r}")
    return EngineConfig(vega=cfg, snd_tau=float(snd_tau), ds_seed=ds_seed)


def _read_json(path: Path, what: str):
    try:
        return json.loads(path.read_text())
    except OSError as exc:
        raise CliError(f"cannot read {what} file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"{what} file {path} is not valid JSON: {exc}") from exc


@dataclass
class ZooManifest:
    dataset_id: str
    entries: list[tuple[str, Path]]  # (model_id, resolved bundle path)


def load_zoo_manifest(path: str | Path) -> ZooManifest:
    path = Path(path)
    raw = _read_json(path, "zoo manifest")
    if not isinstance(raw, dict) or not isinstance(raw.get("entries"), list):
        raise CliError(f"zoo manifest {path} must be an object with an 'entries' list")
    dataset_id = raw.get("dataset_id")
    if not isinstance(dataset_id, str):
        raise CliError("zoo manifest needs a string 'dataset_id'")
    entries = []
    seen = set()
    for i, entry in enumerate(raw["entries"]):
        if (
            not isinstance(entry, dict)
            or not isinstance(entry.get("model_id"), str)
            or not isinstance(entry.get("bundle_path"), str)
        ):
            raise CliError(f"zoo entry {i} needs string 'model_id' and 'bundle_path'")
        model_id = entry["model_id"]
        if model_id in seen:
            raise CliError(f"duplicate model_id {model_id!r} in zoo manifest")
        seen.add(model_id)
        bundle_path = Path(entry["bundle_path"])
        if not bundle_path.is_absolute():
            bundle_path = path.parent / bundle_path
        entries.append((model_id, bundle_path))
    return ZooManifest(dataset_id=dataset_id, entries=entries)


def score_bundle(bundle: DatasetBundle, config: EngineConfig) -> dict:
    """All score columns (and accuracy when labels exist) for one bundle.

    Labels feed only the accuracy field; every score is computed before
    they are touched.
    """
    vc = config.vega
    score = vega_score_sweep(bundle, vc, [vc.t])[0]

    visual = np.asarray(bundle.visual, dtype=np.float64)
    textual = effective_textual(bundle)
    rot_visual, rot_textual = bundle.rot_visual, bundle.rot_textual
    if vc.normalize:
        visual, textual = l2_normalize(visual), l2_normalize(textual)
        if rot_visual is not None:
            rot_visual, rot_textual = l2_normalize(rot_visual), l2_normalize(rot_textual)
    sim = cosine_matrix(visual, textual)

    base = baseline_scores(
        visual,
        softmax_probs(sim, temperature=1.0),
        n_classes=bundle.n_classes,
        snd_tau=config.snd_tau,
        ds_seed=config.ds_seed,
        rot_visual=rot_visual,
        rot_textual=rot_textual,
    )
    row = {
        "model_id": bundle.model_id,
        "s_n": score.s_n,
        "s_e": score.s_e,
        "vega": score.s,
        "ent_raw": base.ent_raw,
        "ent_score": base.ent_score,
        "conf": base.conf,
        "snd": base.snd,
        "ds": base.ds,
    }
    if base.rot is not None:
        row["rot"] = base.rot
    if bundle.labels is not None:
        row["accuracy"] = zero_shot_accuracy(pseudo_labels(sim), bundle.labels)
    return row


def _score_entry(model_id: str, bundle_path: Path, config: EngineConfig) -> dict:
    start = time.perf_counter()
    try:
        bundle = load_bundle(bundle_path, normalize=False)
        if bundle.model_id != model_id:
            # manifest is authoritative for naming; keep a note
            bundle.model_id = model_id
        row = score_bundle(bundle, config)
    except (BundleError, ValueError, OSError) as exc:
        row = {"model_id": model_id, "error": str(exc)}
    row["wall_time"] = time.perf_counter() - start
    return row


def cmd_score(args) -> int:
    manifest = load_zoo_manifest(args.zoo)
    config = _config_from_args(args)
    workers = max(1, args.workers)
    if workers == 1:
        rows = [_score_entry(m, p, config) for m, p in manifest.entries]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_score_entry, m, p, config) for m, p in manifest.entries
            ]
            rows = [f.result() for f in futures]  # manifest order, not completion order

    report = {
        "dataset_id": manifest.dataset_id,
        "tool_version": __version__,
        "kernel_backend": backend_name(),
        "config": config.as_dict(),
        "flags": {"snd_anticorrelated_expected": SND_ANTICORRELATED},
        "rows": rows,
    }
    _write_report(Path(args.out), report)
    failed = sum(1 for r in rows if "error" in r)
    print(f"scored {len(rows) - failed}/{len(rows)} models -> {args.out}")
    return 0 if failed == 0 else 1


def _write_report(out: Path, report: dict) -> None:
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(report, indent=2) + "\n")
    with out.with_suffix(".csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_COLUMNS)
        for row in report["rows"]:
            writer.writerow([_csv_cell(row.get(c)) for c in REPORT_COLUMNS])


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return value


def cmd_rank(args) -> int:
    report = _read_json(Path(args.report), "score report")
    rows = report.get("rows")
    if not isinstance(rows, list):
        raise CliError("score report has no 'rows' list")
    method = args.method
    acc, scores = [], []
    for row in rows:
        if "error" in row:
            raise CliError(
                f"model {row.get('model_id')!r} failed during scoring; "
                "re-run score or drop it from the zoo before ranking"
            )
        if "accuracy" not in row:
            raise CliError(
                f"model {row.get('model_id')!r} has no accuracy "
                "(zoo bundles must carry labels to be ranked)"
            )
        if method not in row:
            available = sorted(
                k for k in row if k not in ("model_id", "wall_time", "error")
            )
            raise CliError(
                f"unknown method column {method!r}; available: {', '.join(available)}"
            )
        acc.append(row["accuracy"])
        scores.append(row[method])
    if len(acc) < 5:
        raise CliError(f"ranking metrics need at least 5 models, got {len(acc)}")

    metrics = ranking_metrics(acc, scores)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    payload = {"method": method, "n_models": len(acc), **metrics.as_dict()}
    out.write_text(json.dumps(payload, indent=2) + "\n")
    with out.with_suffix(".csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(payload))
        writer.writerow([_csv_cell(v) for v in payload.values()])

    scatter = Path(args.scatter) if args.scatter else _derived_path(out, "_scatter.csv")
    with scatter.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["accuracy", "score"])
        for a, s in zip(acc, scores):
            writer.writerow([_csv_cell(float(a)), _csv_cell(float(s))])
    print(
        f"{method}: r5={metrics.r5:.2f} tau5={metrics.tau5:.2f} tau={metrics.tau:.2f} "
        f"top1={metrics.top1_acc:.3f} oracle={metrics.oracle:.3f} -> {out}"
    )
    return 0


def _derived_path(out: Path, suffix: str) -> Path:
    return out.with_name(out.stem + suffix)


def cmd_synth(args) -> int:
    raw = _read_json(Path(args.config), "synth config")
    if not isinstance(raw, dict):
        raise CliError("synth config must be a JSON object")
    known = {
        "n_models",
        "alpha_range",
        "n_classes",
        "dim",
        "n_images",
        "intra_class_spread",
        "anchor_correlation",
        "label_noise",
        "seed",
    }
    unknown = sorted(set(raw) - known)
    if unknown:
        raise CliError(f"unknown synth config key(s): {', '.join(unknown)}")
    n_models = raw.get("n_models", 20)
    alpha_range = tuple(raw.get("alpha_range", (0.1, 0.9)))
    if len(alpha_range) != 2:
        raise CliError("alpha_range must be [lo, hi]")
    base_kwargs = {k: v for k, v in raw.items() if k not in ("n_models", "alpha_range")}
    try:
        base = SynthConfig(**base_kwargs)
        zoo = generate_zoo(n_models, base, alpha_range)
    except (TypeError, ValueError) as exc:
        raise CliError(f"bad synth config: {exc}") from exc

    out_dir = Path(args.out)
    entries = []
    for bundle, acc in zoo:
        rel = Path("bundles") / bundle.model_id
        write_bundle(bundle, out_dir / rel)
        entries.append(
            {"model_id": bundle.model_id, "bundle_path": str(rel), "accuracy": acc}
        )
    manifest = {"dataset_id": zoo[0][0].dataset_id, "entries": entries}
    (out_dir / "zoo.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {len(entries)} bundles + zoo.json -> {out_dir}")
    return 0


def cmd_ablate(args) -> int:
    manifest = load_zoo_manifest(args.zoo)
    config = _config_from_args(args)
    temps = sorted(set(TEMPERATURE_SWEEP) | {config.vega.t})

    acc = []
    per_temp_s, s_n_rows, s_e_rows = {t: [] for t in temps}, [], []
    for model_id, bundle_path in manifest.entries:
        try:
            bundle = load_bundle(bundle_path, normalize=False)
        except BundleError as exc:
            raise CliError(f"bundle {model_id!r}: {exc}") from exc
        if bundle.labels is None:
            raise CliError(f"bundle {model_id!r} has no labels; ablation needs accuracy")
        scores = vega_score_sweep(bundle, config.vega, temps)
        for t, sc in zip(temps, scores):
            per_temp_s[t].append(sc.s)
        at_default = scores[temps.index(config.vega.t)]
        s_n_rows.append(at_default.s_n)
        s_e_rows.append(at_default.s_e)

        visual = np.asarray(bundle.visual, dtype=np.float64)
        textual = effective_textual(bundle)
        if config.vega.normalize:
            visual, textual = l2_normalize(visual), l2_normalize(textual)
        acc.append(
            zero_shot_accuracy(
                pseudo_labels(cosine_matrix(visual, textual)), bundle.labels
            )
        )

    if len(acc) < 5:
        raise CliError(f"ablation metrics need at least 5 models, got {len(acc)}")

    components = []
    default_t = config.vega.t
    for name, values in (
        ("s_n", s_n_rows),
        ("s_e", s_e_rows),
        ("vega", per_temp_s[default_t]),
    ):
        components.append({"method": name, **ranking_metrics(acc, values).as_dict()})
    sweep = [
        {"t": t, **ranking_metrics(acc, per_temp_s[t]).as_dict()}
        for t in sorted(TEMPERATURE_SWEEP)
    ]

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "dataset_id": manifest.dataset_id,
        "config": config.as_dict(),
        "components": components,
        "temperature_sweep": sweep,
    }
    out.write_text(json.dumps(payload, indent=2) + "\n")
    with out.with_suffix(".csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["section", "name", "r5", "tau5", "tau", "top1_acc", "oracle"])
        for c in components:
            writer.writerow(
                ["component", c["method"]]
                + [_csv_cell(c[m]) for m in ("r5", "tau5", "tau", "top1_acc", "oracle")]
            )
        for s in sweep:
            writer.writerow(
                ["temperature", _csv_cell(s["t"])]
                + [_csv_cell(s[m]) for m in ("r5", "tau5", "tau", "top1_acc", "oracle")]
            )
    print(f"ablation table ({len(components)} components, {len(sweep)}-point sweep) -> {out}")
    return 0


def cmd_validate(args) -> int:
    report = validate_bundle_dir(args.bundle)
    for severity, message in report.issues:
        print(f"{severity}: {message}")
    if report.ok:
        print(f"ok: {args.bundle}")
        return 0
    return 1


def _config_from_args(args) -> EngineConfig:
    config = load_engine_config(args.config)
    overrides = {}
    if getattr(args, "no_normalize", False):
        overrides["normalize"] = False
    if getattr(args, "exclude_diagonal", False):
        overrides["exclude_diagonal"] = True
    if overrides:
        from dataclasses import replace

        config = EngineConfig(
            vega=replace(config.vega, **overrides),
            snd_tau=config.snd_tau,
            ds_seed=config.ds_seed,
        )
    return config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vega",
        description="Rank vision-language models on unlabeled tasks from "
        "precomputed embedding bundles.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a bundle directory")
    p.add_argument("bundle", help="bundle directory")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("score", help="score every model in a zoo")
    p.add_argument("--zoo", required=True, help="zoo manifest JSON")
    p.add_argument("--config", default=None, help="engine config JSON")
    p.add_argument("--out", required=True, help="report JSON path (CSV mirror beside it)")
    p.add_argument("--workers", type=int, default=1, help="parallel scoring workers")
    p.add_argument("--no-normalize", action="store_true", help="skip L2 normalization")
    p.add_argument(
        "--exclude-diagonal",
        action="store_true",
        help="drop the diagonal from the edge correlation",
    )
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("rank", help="ranking metrics for one score column")
    p.add_argument("--report", required=True, help="score report JSON")
    p.add_argument("--method", required=True, help="score column to rank by")
    p.add_argument("--out", required=True, help="metrics JSON path")
    p.add_argument("--scatter", default=None, help="scatter CSV path (default: derived)")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("synth", help="generate a synthetic model zoo")
    p.add_argument("--config", required=True, help="synth config JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ablate", help="component table + temperature sweep")
    p.add_argument("--zoo", required=True, help="zoo manifest JSON (bundles need labels)")
    p.add_argument("--config", default=None, help="engine config JSON")
    p.add_argument("--out", required=True, help="ablation JSON path (CSV mirror beside it)")
    p.add_argument("--no-normalize", action="store_true", help="skip L2 normalization")
    p.add_argument(
        "--exclude-diagonal",
        action="store_true",
        help="drop the diagonal from the edge correlation",
    )
    p.set_defaults(func=cmd_ablate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BundleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
