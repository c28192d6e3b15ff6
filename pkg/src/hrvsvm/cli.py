"""Command-line entry point: ``hrvsvm {features,train,classify,evaluate}``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import HrvSvmError, SingleClassError
from .ingest import load_signal, parse_session_manifest, read_text
from .metrics import as_rr, compute_metrics, filter_ectopic, format_metrics
from .pipeline import (
    TASKS,
    TrainConfig,
    evaluate,
    extract_features,
    fit_features,
    format_report,
    get_task,
    label_for,
    load_model,
    report_from_values,
    save_model,
    session_features,
)
from .svm import KERNEL_KINDS, KernelSpec, decision_value, sign_label


class CliError(Exception):
    pass


def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"{text!r} must be > 0")
    return v


def _read(path) -> str:
    try:
        return read_text(path)
    except FileNotFoundError:
        raise CliError(f"no such file: {path}") from None
    except IsADirectoryError:
        raise CliError(f"is a directory: {path}") from None


def _signal(path, kind):
    if not Path(path).exists():
        raise CliError(f"no such file: {path}")
    return load_signal(path, kind)


def cmd_features(args) -> int:
    rr = as_rr(_signal(args.path, args.kind))
    if args.ectopic_filter:
        rr = filter_ectopic(rr)
    sys.stdout.write(format_metrics(compute_metrics(rr)))
    return 0


def _manifest(path):
    sessions = parse_session_manifest(_read(path))
    for s in sessions:
        p = Path(s.signal_path)
        full = p if p.is_absolute() else Path(path).parent / p
        if not full.exists():
            raise CliError(f"no such file: {full} (session {s.session_id})")
    return sessions, Path(path).parent


def cmd_train(args) -> int:
    task = get_task(args.task)
    kernel = KernelSpec(args.kernel, sigma=args.sigma)
    config = TrainConfig(
        kernel=kernel,
        c_bound=args.c,
        kkt_tol=args.tol,
        normalize=not args.no_normalize,
        ectopic_filter=args.ectopic_filter,
    )
    sessions, base = _manifest(args.manifest)
    labels = [label_for(task, task.level_of(s)) for s in sessions]
    if len(set(labels)) < 2:
        raise SingleClassError(f"need both classes: every session is labelled {labels[0]:+d} for {task.kind}")
    feats = session_features(sessions, task, config, base)
    result = fit_features([f.values for f in feats], labels, task, config)
    Path(args.out).write_text(save_model(result.model), encoding="utf-8")
    report = report_from_values(
        task,
        [s.session_id for s in sessions],
        [task.level_of(s) for s in sessions],
        [decision_value(result.model, f.values) for f in feats],
    )
    if not result.converged:
        print(
            f"warning: solver stopped after {result.iterations} passes without meeting "
            f"the KKT tolerance; the model is feasible but may be suboptimal",
            file=sys.stderr,
        )
    print(f"support_vectors={len(result.model.support_alphas)}")
    print(f"converged={'true' if result.converged else 'false'}")
    print(f"training_accuracy={report.accuracy:.3f}")
    return 0


def _verdict(task_name: str, label: int) -> str:
    return TASKS[task_name].positive_name if label > 0 else "healthy"


def cmd_classify(args) -> int:
    model = load_model(_read(args.model))
    if model.task is None:
        raise CliError("model file does not name a task")
    task = get_task(model.task)
    rr = as_rr(_signal(args.path, args.kind))
    if args.ectopic_filter:
        rr = filter_ectopic(rr)
    fv = extract_features(task, compute_metrics(rr), Path(args.path).name)
    value = decision_value(model, fv.values)
    label = sign_label(value)
    print(f"label={label:+d} decision={value!r} verdict={_verdict(task.kind, label)}")
    return 0


def cmd_evaluate(args) -> int:
    task = get_task(args.task)
    model = load_model(_read(args.model))
    if model.task is not None and model.task != task.kind:
        raise CliError(f"task mismatch: model was trained for {model.task}, not {task.kind}")
    sessions, base = _manifest(args.manifest)
    report = evaluate(model, sessions, task, TrainConfig(ectopic_filter=args.ectopic_filter), base)
    Path(args.out).write_text(format_report(report), encoding="utf-8")
    print(f"accuracy={report.correct_count}/{report.total_count}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hrvsvm", description="HRV features and SVM stress/influenza classification")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("features", help="print time-domain HRV metrics of one signal file")
    p.add_argument("--kind", choices=("rr", "hr"), required=True)
    p.add_argument("--ectopic-filter", action="store_true")
    p.add_argument("path")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train", help="train a classifier from a session manifest")
    p.add_argument("--task", choices=sorted(TASKS), required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--kernel", choices=KERNEL_KINDS, default="gaussian")
    p.add_argument("--sigma", type=_positive, default=1.0)
    p.add_argument("--c", type=_positive, default=1000.0)
    p.add_argument("--tol", type=_positive, default=1e-3)
    p.add_argument("--no-normalize", action="store_true")
    p.add_argument("--ectopic-filter", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", help="classify one signal file with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--kind", choices=("rr", "hr"), required=True)
    p.add_argument("--ectopic-filter", action="store_true")
    p.add_argument("path")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("evaluate", help="self-test a saved model on a manifest, writing a CSV report")
    p.add_argument("--model", required=True)
    p.add_argument("--task", choices=sorted(TASKS), required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--ectopic-filter", action="store_true")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, HrvSvmError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
