"""Command-line front end.

Subcommands: simulate | ajive | jackstraw | compare | diproperm | diagnose.
Every flag can also be set in a JSON config file (--config); flags override
config values, config values override defaults.  Each output JSON embeds the
tool version, the fully resolved configuration, and the master seed; the
write timestamp is confined to the single "timestamp" field so results can
be compared bit-exactly after stripping it.

Result JSON schemas
-------------------
All documents share a metadata envelope:
  {"tool", "version", "command", "config", "seed", "timestamp", ...payload}
Payloads:
  jackstraw  result.json: target/config echo, f_observed, f_null, p_raw,
             p_adjusted, significant, n_significant
  diagnose   diagnostic.json: null_density [[log10F, density]...],
             observed_points [[log10F, significant]...],
             sorted_pvalues [[rank, p]...], ks_statistic, ks_pvalue, counts
  diproperm  diproperm.json: observed_stat, null_stats, z_score, z_interval,
             empirical_pvalue, direction, statistic, balanced, retries
Exit codes: 0 completed, 2 validation error, 1 runtime error.
"""

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .ajive import ajive_decompose, select_scores
from .diagnostics import build_report, render_svg_panels
from .diproperm import diproperm_test
from .io import read_block_csv, read_labels_csv, write_block_csv, write_matrix_csv
from .jackstraw import (
    JackstrawConfig,
    JackstrawResult,
    LoadingTarget,
    jackstraw_run,
)
from .simulation import ToyConfig, compare_methods, simulate_toy

__all__ = ["RunConfig", "main", "build_parser"]

_ENV_THREADS = "JIVE_JACKSTRAW_THREADS"


@dataclass
class RunConfig:
    """Fully resolved settings of one CLI run, echoed into every output."""

    command: str
    blocks: list = field(default_factory=list)   # input file paths
    names: list = field(default_factory=list)
    ranks: list = field(default_factory=list)
    joint_rank: object = "auto"                  # int or "auto"
    space: str = "joint"
    block_index: int = 0
    component: object = 0                        # int or "all"
    k: int = 1
    s: int = 1000
    mode: str = "approximate"
    alpha: float = 0.05
    adjust: str = "bonferroni"
    smoothing: bool = False
    seed: int = 0
    threads: int = 1
    out: str = "."
    extra: dict = field(default_factory=dict)    # subcommand-specific settings

    def to_dict(self):
        d = asdict(self)
        d.update(d.pop("extra"))
        return d


def _default_threads():
    raw = os.environ.get(_ENV_THREADS, "").strip()
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{_ENV_THREADS} must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValueError(f"{_ENV_THREADS} must be >= 1, got {value}")
    return value


def _load_config_file(path):
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    return data


def _pick(args, cfg, key, default):
    """Flag value if given, else config-file value, else default."""
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in cfg:
        return cfg[key]
    return default


def _parse_joint_rank(value):
    if value == "auto":
        return "auto"
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ValueError(f"--joint-rank must be an integer or 'auto', got {value!r}") from None


def _parse_component(value):
    if value == "all":
        return None
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ValueError(f"--component must be an integer or 'all', got {value!r}") from None


def _now():
    return datetime.now(timezone.utc).isoformat()


def _write_json(path, run_config, key, payload):
    # payload sits under its own key so it can never shadow the envelope
    doc = {
        "tool": "jive-jackstraw",
        "version": __version__,
        "command": run_config.command,
        "config": run_config.to_dict(),
        "seed": run_config.seed,
        "timestamp": _now(),
        key: payload,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_table_csv(path, row_labels, col_labels, matrix):
    write_matrix_csv(path, np.asarray(matrix, dtype=float), list(row_labels), list(col_labels), corner="method")


def _outdir(run_config):
    os.makedirs(run_config.out, exist_ok=True)
    return run_config.out


def _load_blocks(run_config):
    if not run_config.blocks:
        raise ValueError("--blocks is required")
    names = run_config.names or [None] * len(run_config.blocks)
    if len(names) != len(run_config.blocks):
        raise ValueError(
            f"{len(run_config.names)} names for {len(run_config.blocks)} blocks"
        )
    return [read_block_csv(p, n) for p, n in zip(run_config.blocks, names)]


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(run_config):
    extra = run_config.extra
    toy = ToyConfig(
        d1=extra["d1"],
        d2=extra["d2"],
        n=extra["n"],
        joint_amplitude=extra["joint_amplitude"],
        individual_amplitude=extra["individual_amplitude"],
        noise_variance=extra["noise_variance"],
        joint_support=extra["joint_support"],
        individual_support=extra["individual_support"],
        seed=run_config.seed,
    )
    blocks, truth = simulate_toy(toy)
    out = _outdir(run_config)
    for block in blocks:
        write_block_csv(block, os.path.join(out, f"{block.name}.csv"))
    _write_json(
        os.path.join(out, "ground_truth.json"),
        run_config,
        "ground_truth",
        {
            "toy_config": toy.to_dict(),
            "joint_score": truth.joint_score.tolist(),
            "individual_scores": [s.tolist() for s in truth.individual_scores],
            "joint_loadings": [v.tolist() for v in truth.joint_loadings],
            "individual_loadings": [v.tolist() for v in truth.individual_loadings],
            "joint_masks": [[bool(x) for x in m] for m in truth.joint_masks],
            "individual_masks": [[bool(x) for x in m] for m in truth.individual_masks],
        },
    )
    return 0


def cmd_ajive(run_config):
    blocks = _load_blocks(run_config)
    dec = ajive_decompose(
        blocks,
        run_config.ranks,
        run_config.joint_rank,
        normalize_blocks=run_config.extra.get("normalize_blocks", False),
    )
    out = _outdir(run_config)
    case_ids = list(dec.case_ids)
    if dec.joint_rank > 0:
        write_matrix_csv(
            os.path.join(out, "cns.csv"),
            dec.cns,
            [f"joint{i + 1}" for i in range(dec.joint_rank)],
            case_ids,
        )
    write_matrix_csv(
        os.path.join(out, "stacked_singular_values.csv"),
        dec.stacked_singular_values[None, :],
        ["singular_value"],
        [str(i + 1) for i in range(dec.stacked_singular_values.size)],
    )
    summary_blocks = []
    for block, fit in zip(blocks, dec.blocks):
        stem = os.path.join(out, fit.name)
        write_matrix_csv(f"{stem}_joint.csv", fit.joint, block.feature_names, case_ids)
        write_matrix_csv(
            f"{stem}_individual.csv", fit.individual, block.feature_names, case_ids
        )
        if fit.individual_rank > 0:
            write_matrix_csv(
                f"{stem}_bss.csv",
                fit.bss,
                [f"individual{i + 1}" for i in range(fit.individual_rank)],
                case_ids,
            )
        resid = (
            (block.matrix - block.matrix.mean(axis=1, keepdims=True))
            - fit.joint
            - fit.individual
        )
        summary_blocks.append(
            {
                "name": fit.name,
                "initial_rank": fit.initial_rank,
                "individual_rank": fit.individual_rank,
                "joint_frobenius": float(np.linalg.norm(fit.joint)),
                "individual_frobenius": float(np.linalg.norm(fit.individual)),
                "residual_frobenius": float(np.linalg.norm(resid)),
            }
        )
    _write_json(
        os.path.join(out, "summary.json"),
        run_config,
        "summary",
        {
            "joint_rank": dec.joint_rank,
            "stacked_singular_values": dec.stacked_singular_values.tolist(),
            "auto_centered": list(dec.auto_centered),
            "blocks": summary_blocks,
        },
    )
    return 0


def _write_jackstraw_outputs(run_config, result, feature_names):
    out = _outdir(run_config)
    _write_json(os.path.join(out, "result.json"), run_config, "result", result.to_dict())
    with open(os.path.join(out, "features.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write("feature,f,p_raw,p_adjusted,significant\n")
        for name, f, p, pa, sig in zip(
            feature_names,
            result.f_observed,
            result.p_raw,
            result.p_adjusted,
            result.significant,
        ):
            fh.write(
                f"{name},{repr(float(f))},{repr(float(p))},{repr(float(pa))},"
                f"{'true' if sig else 'false'}\n"
            )
    report = build_report(result)
    _write_json(os.path.join(out, "diagnostic.json"), run_config, "report", report.to_dict())
    for panel, svg in render_svg_panels(report).items():
        with open(os.path.join(out, f"diagnostic_{panel}.svg"), "w", encoding="utf-8") as fh:
            fh.write(svg)


def cmd_jackstraw(run_config):
    blocks = _load_blocks(run_config)
    target = LoadingTarget(
        space=run_config.space,
        block=run_config.block_index,
        component=run_config.component,
    )
    config = JackstrawConfig(
        k_rows=run_config.k,
        n_reps=run_config.s,
        mode=run_config.mode,
        seed=run_config.seed,
        alpha=run_config.alpha,
        adjustment=run_config.adjust,
        smoothing=run_config.smoothing,
    )
    result = jackstraw_run(
        blocks,
        target,
        run_config.ranks,
        run_config.joint_rank,
        config,
        threads=run_config.threads,
    )
    _write_jackstraw_outputs(run_config, result, blocks[target.block].feature_names)
    return 0


def cmd_compare(run_config):
    extra = run_config.extra
    toy = ToyConfig(
        d1=extra["d1"],
        d2=extra["d2"],
        n=extra["n"],
        joint_amplitude=extra["joint_amplitude"],
        individual_amplitude=extra["individual_amplitude"],
        noise_variance=extra["noise_variance"],
        joint_support=extra["joint_support"],
        individual_support=extra["individual_support"],
        seed=run_config.seed,
    )
    jconfig = JackstrawConfig(
        k_rows=run_config.k,
        n_reps=run_config.s,
        mode=run_config.mode,
        seed=run_config.seed,
        alpha=run_config.alpha,
        adjustment=run_config.adjust,
        smoothing=run_config.smoothing,
    )
    tables = compare_methods(toy, jconfig, threads=run_config.threads)
    out = _outdir(run_config)
    _write_table_csv(
        os.path.join(out, "accuracy.csv"), tables.row_labels, tables.col_labels, tables.accuracy
    )
    _write_table_csv(
        os.path.join(out, "angles.csv"), tables.row_labels, tables.col_labels, tables.angles
    )
    _write_table_csv(
        os.path.join(out, "true_positive.csv"),
        tables.row_labels,
        tables.col_labels,
        tables.true_positive,
    )
    _write_json(
        os.path.join(out, "comparison.json"),
        run_config,
        "comparison",
        {"toy_config": toy.to_dict(), **tables.to_dict()},
    )
    return 0


def cmd_diproperm(run_config):
    extra = run_config.extra
    block = read_block_csv(extra["matrix"])
    case_ids, labels = read_labels_csv(extra["labels"])
    if case_ids != block.case_ids:
        raise ValueError(
            "label file case ids do not match the matrix case ids (same order required)"
        )
    result = diproperm_test(
        block.matrix,
        np.asarray(labels),
        n_perm=extra["n_perm"],
        balanced=extra["balanced"],
        batches=extra["batches"],
        seed=run_config.seed,
        statistic=extra["statistic"],
    )
    out = _outdir(run_config)
    _write_json(os.path.join(out, "diproperm.json"), run_config, "result", result.to_dict())
    return 0


def cmd_diagnose(run_config):
    with open(run_config.extra["result"], encoding="utf-8") as fh:
        doc = json.load(fh)
    result = JackstrawResult.from_dict(doc["result"])
    report = build_report(result)
    out = _outdir(run_config)
    _write_json(os.path.join(out, "diagnostic.json"), run_config, "report", report.to_dict())
    for panel, svg in render_svg_panels(report).items():
        with open(os.path.join(out, f"diagnostic_{panel}.svg"), "w", encoding="utf-8") as fh:
            fh.write(svg)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(sub):
    sub.add_argument("--config", help="JSON config file; flags override its values")
    sub.add_argument("--seed", type=int, help="master RNG seed (default 0)")
    sub.add_argument(
        "--threads",
        type=int,
        help=f"worker threads (default ${_ENV_THREADS} or 1); never changes results",
    )
    sub.add_argument("--out", help="output directory (default .)")


def _add_block_args(sub):
    sub.add_argument("--blocks", nargs="+", help="block CSV paths")
    sub.add_argument("--names", nargs="+", help="block names (default: file stems)")
    sub.add_argument("--ranks", nargs="+", type=int, help="per-block initial ranks")
    sub.add_argument("--joint-rank", help="joint rank (integer or 'auto')")


def _add_jackstraw_args(sub):
    sub.add_argument("--k", type=int, help="rows permuted per replicate (default 1)")
    sub.add_argument("--s", type=int, help="replicates (default 1000)")
    sub.add_argument("--mode", choices=["full", "approx", "approximate"], help="null mode")
    sub.add_argument("--alpha", type=float, help="significance level (default 0.05)")
    sub.add_argument("--adjust", choices=["bonferroni", "bh", "none"], help="adjustment")
    sub.add_argument(
        "--smoothing", action="store_true", default=None, help="(1+count)/(1+B) p-values"
    )


def _add_toy_args(sub):
    sub.add_argument("--d1", type=int, help="block 1 features (default 120)")
    sub.add_argument("--d2", type=int, help="block 2 features (default 120)")
    sub.add_argument("--n", type=int, help="cases, multiple of 4 (default 160)")
    sub.add_argument("--joint-amplitude", type=float, help="default 0.7")
    sub.add_argument("--individual-amplitude", type=float, help="default 1.0")
    sub.add_argument("--noise-variance", type=float, help="default 2.0")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="jive-jackstraw",
        description="Joint/individual decomposition with jackstraw significance inference",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("simulate", help="write the toy two-block dataset")
    _add_toy_args(p)
    _add_common(p)

    p = subs.add_parser("ajive", help="decompose blocks into joint/individual parts")
    _add_block_args(p)
    p.add_argument(
        "--normalize-blocks",
        action="store_true",
        default=None,
        help="divide each block by its Frobenius norm first",
    )
    _add_common(p)

    p = subs.add_parser("jackstraw", help="significance of one target's loadings")
    _add_block_args(p)
    p.add_argument("--space", choices=["joint", "individual"], help="score space")
    p.add_argument("--block-index", type=int, help="block whose features are tested")
    p.add_argument("--component", help="score index, or 'all' for the whole subspace")
    _add_jackstraw_args(p)
    _add_common(p)

    p = subs.add_parser("compare", help="AJIVE-vs-PCA jackstraw tables on toy data")
    _add_toy_args(p)
    _add_jackstraw_args(p)
    _add_common(p)

    p = subs.add_parser("diproperm", help="two-sample direction-projection test")
    p.add_argument("--matrix", help="data matrix CSV")
    p.add_argument("--labels", help="case_id,label CSV aligned with the matrix")
    p.add_argument("--n-perm", type=int, help="permutations (default 1000)")
    p.add_argument(
        "--balanced",
        choices=["true", "false"],
        help="balanced permutations (default true)",
    )
    p.add_argument("--batches", type=int, help="z-interval batches (default 10)")
    p.add_argument("--statistic", choices=["mean-diff", "t"], help="projection statistic")
    _add_common(p)

    p = subs.add_parser("diagnose", help="rebuild the diagnostic from a result JSON")
    p.add_argument("--result", help="result.json from a jackstraw run")
    _add_common(p)

    return parser


def _resolve(args):
    cfg = _load_config_file(args.config)
    command = args.command

    def pick(key, default):
        return _pick(args, cfg, key, default)

    rc = RunConfig(
        command=command,
        seed=int(pick("seed", 0)),
        threads=int(pick("threads", _default_threads())),
        out=str(pick("out", ".")),
    )
    if rc.seed < 0:
        raise ValueError(f"--seed must be >= 0, got {rc.seed}")
    if rc.threads < 1:
        raise ValueError(f"--threads must be >= 1, got {rc.threads}")

    if command in ("ajive", "jackstraw"):
        rc.blocks = [str(p) for p in pick("blocks", [])]
        rc.names = [str(n) for n in pick("names", [])]
        ranks = pick("ranks", None)
        if ranks is None:
            raise ValueError("--ranks is required")
        rc.ranks = [int(r) for r in ranks]
        rc.joint_rank = _parse_joint_rank(pick("joint_rank", "auto"))
    if command == "ajive":
        rc.extra["normalize_blocks"] = bool(pick("normalize_blocks", False))
    if command in ("jackstraw", "compare"):
        rc.k = int(pick("k", 1))
        rc.s = int(pick("s", 1000))
        rc.mode = str(pick("mode", "approximate"))
        rc.alpha = float(pick("alpha", 0.05))
        rc.adjust = str(pick("adjust", "bonferroni"))
        rc.smoothing = bool(pick("smoothing", False))
    if command == "jackstraw":
        rc.space = str(pick("space", "joint"))
        rc.block_index = int(pick("block_index", 0))
        rc.component = _parse_component(pick("component", 0))
    if command in ("simulate", "compare"):
        rc.extra.update(
            d1=int(pick("d1", 120)),
            d2=int(pick("d2", 120)),
            n=int(pick("n", 160)),
            joint_amplitude=float(pick("joint_amplitude", 0.7)),
            individual_amplitude=float(pick("individual_amplitude", 1.0)),
            noise_variance=float(pick("noise_variance", 2.0)),
            joint_support=pick("joint_support", ((1, 80), (1, 40))),
            individual_support=pick("individual_support", ((81, 120), (41, 120))),
        )
    if command == "diproperm":
        matrix = pick("matrix", None)
        labels = pick("labels", None)
        if matrix is None or labels is None:
            raise ValueError("--matrix and --labels are required")
        balanced = pick("balanced", True)
        if isinstance(balanced, str):
            balanced = balanced == "true"
        rc.extra.update(
            matrix=str(matrix),
            labels=str(labels),
            n_perm=int(pick("n_perm", 1000)),
            balanced=bool(balanced),
            batches=int(pick("batches", 10)),
            statistic=str(pick("statistic", "mean-diff")),
        )
    if command == "diagnose":
        result = pick("result", None)
        if result is None:
            raise ValueError("--result is required")
        rc.extra["result"] = str(result)
    return rc


_COMMANDS = {
    "simulate": cmd_simulate,
    "ajive": cmd_ajive,
    "jackstraw": cmd_jackstraw,
    "compare": cmd_compare,
    "diproperm": cmd_diproperm,
    "diagnose": cmd_diagnose,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        run_config = _resolve(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](run_config)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
