"""Command-line interface.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

import argparse
import json
import logging
import os
import sys
import time

from . import __version__
from .catalog import FEATURE_NAMES

logger = logging.getLogger("eegload")


class UsageError(Exception):
    """Bad arguments discovered after parsing (exit code 2)."""


def _split(value, known, what):
    if value in (None, "all"):
        return list(known)
    items = [v.strip() for v in value.split(",") if v.strip()]
    bad = [v for v in items if v not in known]
    if bad:
        raise UsageError(f"unknown {what}: {', '.join(bad)}; known: {', '.join(known)}")
    return items


def _meta_path(path):
    return path + ".meta.json"


def cmd_synth_generate(args, cfg):
    from .synth import generate

    synth_cfg = cfg.synth_config(seed=args.seed)
    manifest = generate(synth_cfg, args.out, jobs=args.jobs)
    print(f"participants: {len(manifest.participants)}")
    print(f"recordings: {manifest.n_recordings}")
    print(f"epochs per condition: {synth_cfg.epochs_per_condition}")
    print(f"sampling rate (Hz): {synth_cfg.sampling_rate_hz:g}")
    print(f"manifest: {os.path.join(args.out, 'manifest.json')}")
    return 0


def cmd_extract_features(args, cfg):
    from .io import load_manifest, write_feature_table
    from .montage import MONTAGE_64, resolve_preset
    from .pipeline import extract_dataset

    manifest = load_manifest(args.data)
    try:
        resolve_preset(args.preset, MONTAGE_64, cfg.presets)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows, skipped = extract_dataset(manifest, args.preset, cfg.presets or None, jobs=args.jobs,
                                    line_freq=cfg.line_freq_hz)
    write_feature_table(rows, args.out)
    meta = {"preset": args.preset, "manifest": os.path.abspath(args.data), "n_rows": len(rows),
            "skipped_events": skipped}
    with open(_meta_path(args.out), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"rows: {len(rows)}  skipped events: {len(skipped)}  -> {args.out}")
    return 0


def cmd_run_benchmark(args, cfg):
    from . import benchmark
    from .evaluation import TASKS
    from .io import read_feature_table
    from .models import FAMILIES

    tasks = _split(args.tasks, tuple(TASKS), "task")
    families = _split(args.models, FAMILIES, "model")
    table = read_feature_table(args.features)
    preset = args.preset
    if preset is None:
        meta_file = _meta_path(args.features)
        preset = "all"
        if os.path.exists(meta_file):
            with open(meta_file) as fh:
                preset = json.load(fh).get("preset", "all")
    if args.permute_labels:
        table = benchmark.permute_labels(table, args.seed)
    start = time.time()
    records, skips = benchmark.run_benchmark(table, tasks, families, seed=args.seed, preset=preset,
                                             grids=cfg.grids, jobs=args.jobs,
                                             group_by_epoch=cfg.group_by_epoch)
    meta = {"features": os.path.abspath(args.features), "preset": preset, "seed": args.seed,
            "tasks": tasks, "models": families, "permuted_labels": bool(args.permute_labels),
            "group_by_epoch": cfg.group_by_epoch, "version": __version__}
    rows = benchmark.write_results(args.out, records, skips, meta, figures=not args.no_figures)
    logger.info("benchmark finished in %.1f s", time.time() - start)
    print(benchmark.format_summary(rows), end="")
    print(f"records: {len(records)}  skipped: {len(skips)}  -> {args.out}")
    return 0 if records else 1


def _assign_presets(dirs, loaded):
    from .benchmark import load_meta

    presets = [load_meta(d).get("preset") or (loaded[i][0]["preset"] if loaded[i] else None)
               for i, d in enumerate(dirs)]
    wanted = ("all", "frontal", "frontal_parietal")
    if sorted(p for p in presets if p) == sorted(wanted):
        return [loaded[presets.index(w)] for w in wanted]
    logger.warning("result presets %s are not one of each; using argument order "
                   "(all, frontal, frontal_parietal)", presets)
    return loaded


def cmd_compare_subsets(args, cfg):
    from .benchmark import load_results, write_csv
    from .evaluation import compare_presets

    loaded = [load_results(d) for d in args.results]
    res_all, res_frontal, res_fp = _assign_presets(args.results, loaded)
    rows = compare_presets(res_all, res_frontal, res_fp)
    columns = ("task", "model", "metric", "pairing", "n", "mean_diff", "cohens_d", "t", "t_p",
               "wilcoxon_w", "wilcoxon_p", "outcome")
    write_csv(rows, args.out, columns)
    if not args.no_figures:
        from .plotting import plot_preset_comparison
        plot_preset_comparison(rows, os.path.splitext(args.out)[0] + ".png")
    counts = {}
    for r in rows:
        counts[r["outcome"]] = counts.get(r["outcome"], 0) + 1
    print("outcomes: " + ", ".join(f"{k}={v}" for k, v in sorted(counts.items())) + f"  -> {args.out}")
    return 0


def cmd_analyze_individuals(args, cfg):
    from .benchmark import load_results, write_csv
    from .individuals import analyze, report_rows
    from .io import dump_json, load_profiles

    records = load_results(args.results)
    profiles = load_profiles(args.profiles)
    report = analyze(records, profiles, score=cfg.optimal_task_score)
    dump_json(report, args.out)
    stem = os.path.splitext(args.out)[0]
    write_csv(report_rows(report), stem + ".tests.csv",
              ("analysis", "variable", "test", "statistic", "df", "p_value", "effect_size", "note"))
    write_csv(report["participants"], stem + ".optimal_tasks.csv",
              ("participant", "gender", "task", "accuracy"))
    mnl = report["multinomial_logit"]
    if not args.no_figures and "confusion_matrix" in mnl:
        from .plotting import plot_confusion
        plot_confusion(mnl["confusion_matrix"], mnl["classes"], stem + ".confusion.png")
    print(f"participants: {report['n_participants']}  groups: {report['group_sizes']}")
    if "null_accuracy" in mnl:
        print(f"multinomial logit accuracy {mnl['accuracy']:.3f} (null {mnl['null_accuracy']:.3f})")
    print(f"report -> {args.out}")
    return 0


def cmd_list_features(args, cfg):
    for name in FEATURE_NAMES:
        print(name)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="eegload", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML file overriding presets, grids, evaluation and synth settings")
    common.add_argument("--jobs", type=int, default=1, help="parallel workers (output does not depend on it)")
    common.add_argument("--seed", type=int, default=None, help="random seed")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth-generate", parents=[common], help="write a synthetic dataset")
    p.set_defaults(func=cmd_synth_generate, config_required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("extract-features", parents=[common], help="preprocess and extract the feature table")
    p.set_defaults(func=cmd_extract_features)
    p.add_argument("--data", required=True, help="dataset manifest")
    p.add_argument("--preset", default="all", help="all, frontal, frontal_parietal or a configured preset")
    p.add_argument("--out", required=True)

    p = sub.add_parser("run-benchmark", parents=[common], help="nested cross-validation benchmark")
    p.set_defaults(func=cmd_run_benchmark)
    p.add_argument("--features", required=True)
    p.add_argument("--tasks", default="all", help="'all' or comma list of multi_357,bin_35,bin_37,bin_57")
    p.add_argument("--models", default="all", help="'all' or comma list of model families")
    p.add_argument("--preset", default=None, help="label stored with the results (default: from the table)")
    p.add_argument("--permute-labels", action="store_true",
                   help="shuffle epoch labels within participant (chance-level control)")
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--out", required=True)

    p = sub.add_parser("compare-subsets", parents=[common], help="paired electrode-preset comparison")
    p.set_defaults(func=cmd_compare_subsets)
    p.add_argument("--results", nargs=3, required=True, metavar="DIR",
                   help="result directories for all, frontal and frontal_parietal")
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--out", required=True)

    p = sub.add_parser("analyze-individuals", parents=[common], help="individual-differences statistics")
    p.set_defaults(func=cmd_analyze_individuals)
    p.add_argument("--results", required=True)
    p.add_argument("--profiles", required=True, help="manifest holding participant metadata")
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--out", required=True)

    p = sub.add_parser("list-features", parents=[common], help="print the 143 feature names in order")
    p.set_defaults(func=cmd_list_features)
    return parser


def main(argv=None):
    from .config import ConfigError, load_config

    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "config_required", False) and not args.config:
        parser.error(f"{args.command} requires --config")
    if args.jobs < 1:
        parser.error("--jobs must be at least 1")
    try:
        cfg = load_config(args.config)
        if args.seed is None and args.command != "synth-generate":
            args.seed = 0
        return args.func(args, cfg)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
