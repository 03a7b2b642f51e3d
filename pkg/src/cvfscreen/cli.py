"""Command-line interface.

Exit codes: 0 success, 1 validation error, 2 I/O error.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, Settings, dump_settings, load_settings
from .corpus import SynthSpec, ingest_manifest, synth_corpus
from .pipeline import (ExperimentConfig, emit_report, extract_all, read_feature_csv,
                       run_experiment, write_feature_csv)
from .registry import FEATURE_SETS, feature_set_mask
from .signal_io import load_wav
from .stats import select_features
from .svm import train_smo
from .vad import segment_voicing

EXIT_OK, EXIT_VALIDATION, EXIT_IO = 0, 1, 2


def _cmd_extract(args, settings: Settings) -> int:
    corpus = ingest_manifest(args.manifest)
    fm = extract_all(corpus, settings.vad, settings.nld, workers=args.workers or settings.workers,
                     rate_check=args.rate_check)
    write_feature_csv(fm, args.out)
    print(f"wrote {fm.values.shape[0]} x {fm.values.shape[1]} features to {args.out}")
    return EXIT_OK


def _cmd_select(args, settings: Settings) -> int:
    fm = read_feature_csv(args.features)
    alpha = settings.alpha if args.alpha is None else args.alpha
    sel = select_features(fm.values, fm.labels, alpha, fm.names)
    Path(args.out).write_text(sel.to_table())
    print(f"{len(sel.retained)}/{len(fm.names)} features retained at alpha={alpha:g}")
    return EXIT_OK


def _cmd_evaluate(args, settings: Settings) -> int:
    fm = read_feature_csv(args.features)
    cfg = ExperimentConfig(
        feature_set=args.feature_set,
        selection=args.select,
        alpha=settings.alpha,
        svm=settings.svm,
        k=settings.k if args.k is None else args.k,
        seed=settings.seed if args.seed is None else args.seed,
    )
    result = run_experiment(fm.values, fm.labels, cfg, fm.names)
    fmt = "csv" if Path(args.report).suffix.lower() == ".csv" else "text"
    Path(args.report).write_text(emit_report(result, fmt))
    if args.save_model:
        last = result.stages[-1]
        cols = feature_set_mask(cfg.feature_set)
        if last.name == "anova" and last.feature_names:
            cols = [cols[i] for i in result.selection.retained]
        model = train_smo(fm.values[:, cols], list(fm.labels), cfg.svm, cfg.seed)
        model.save(args.save_model)
    print(emit_report(result, "text"), end="")
    return EXIT_OK


def _cmd_synth(args, settings: Settings) -> int:
    spec = SynthSpec.load(args.spec)
    manifest = synth_corpus(spec, args.seed, args.out)
    print(f"wrote synthetic corpus manifest {manifest}")
    return EXIT_OK


def _cmd_segments(args, settings: Settings) -> int:
    seg_map = segment_voicing(load_wav(args.wav), settings.vad)
    sys.stdout.write(seg_map.to_table())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cvfscreen", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="key = value settings file overriding the defaults")
    p.add_argument("--print-config", action="store_true",
                   help="print the effective settings and exit")
    sub = p.add_subparsers(dest="command")

    s = sub.add_parser("extract", help="extract the 80-feature matrix of a corpus")
    s.add_argument("--manifest", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--rate-check", action="store_true",
                   help="fail unless all recordings share one sample rate")
    s.add_argument("--workers", type=int, default=0)
    s.set_defaults(func=_cmd_extract)

    s = sub.add_parser("select", help="ANOVA feature selection")
    s.add_argument("--features", required=True)
    s.add_argument("--alpha", type=float)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_select)

    s = sub.add_parser("evaluate", help="cross-validated SVM evaluation")
    s.add_argument("--features", required=True)
    s.add_argument("--select", action="store_true", help="add the ANOVA-selected stage")
    s.add_argument("--feature-set", default="LF+CFD+PE", choices=list(FEATURE_SETS))
    s.add_argument("--k", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--report", required=True, help="R.csv or R.txt")
    s.add_argument("--save-model", help="also train on all rows and write the model here")
    s.set_defaults(func=_cmd_evaluate)

    s = sub.add_parser("synth", help="generate a synthetic corpus")
    s.add_argument("--spec", required=True, help="JSON generator spec")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_synth)

    s = sub.add_parser("segments", help="print the voiced/unvoiced segment table of a WAV file")
    s.add_argument("--wav", required=True)
    s.set_defaults(func=_cmd_segments)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse reports usage errors with status 2, which is reserved for I/O failures
        return EXIT_OK if exc.code in (0, None) else EXIT_VALIDATION
    try:
        settings = load_settings(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.print_config:
        sys.stdout.write(dump_settings(settings))
        return EXIT_OK
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_VALIDATION
    try:
        return args.func(args, settings)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
