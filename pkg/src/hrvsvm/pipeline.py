"""Sessions to labelled feature vectors, training, self-test evaluation, model files."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    ConstantFeatureError,
    ModelFormatError,
    RangeError,
    TaskMismatchError,
    VersionError,
)
from .ingest import LEVEL_RANGE, SessionRecord, load_signal
from .metrics import HrvMetrics, as_rr, compute_metrics, filter_ectopic
from .svm import (
    KERNEL_KINDS,
    KernelSpec,
    Model,
    Normalizer,
    TrainingSet,
    build_model,
    decision_value,
    sign_label,
    solve_dual,
)

MODEL_HEADER = "hrvsvm-model v1"
REPORT_HEADER = ("session_id", "level", "true_label", "decision_value", "predicted_label", "correct")


@dataclass(frozen=True)
class Task:
    kind: str
    positive_threshold: int
    feature_names: tuple[str, str]
    positive_name: str

    @property
    def level_field(self) -> str:
        return "stress_level" if self.kind == "stress" else "flu_level"

    def level_of(self, record: SessionRecord) -> int:
        return getattr(record, self.level_field)


STRESS = Task("stress", 2, ("sdev_hr", "sdev_nn"), "stress")
INFLUENZA = Task("influenza", 1, ("mean_hr", "mean_rr"), "influenza")
TASKS = {t.kind: t for t in (STRESS, INFLUENZA)}


def get_task(name: str) -> Task:
    try:
        return TASKS[name]
    except KeyError:
        raise ValueError(f"unknown task {name!r}; expected one of {sorted(TASKS)}") from None


def label_for(task: Task, level: int) -> int:
    lo, hi = LEVEL_RANGE
    if not lo <= level <= hi:
        raise RangeError(f"level must be in {lo}..{hi}, got {level}")
    return 1 if level > task.positive_threshold else -1


@dataclass(frozen=True)
class FeatureVector:
    values: tuple[float, float]
    session_id: str


def extract_features(task: Task, metrics: HrvMetrics, session_id: str) -> FeatureVector:
    values = []
    for name in task.feature_names:
        v = getattr(metrics, name, None)
        if v is None or not math.isfinite(v):
            raise ValueError(f"session {session_id}: metric {name} is missing or not finite")
        values.append(float(v))
    return FeatureVector(tuple(values), session_id)


def fit_normalizer(features) -> Normalizer:
    x = np.asarray(features, dtype=np.float64)
    means = x.mean(axis=0)
    stds = x.std(axis=0)
    for i, s in enumerate(stds):
        if not s > 0:
            raise ConstantFeatureError(f"feature {i} is constant across the training set")
    return Normalizer(tuple(means.tolist()), tuple(stds.tolist()))


@dataclass(frozen=True)
class TrainConfig:
    kernel: KernelSpec = field(default_factory=KernelSpec)
    c_bound: float = 1000.0
    kkt_tol: float = 1e-3
    max_passes: int = 10000
    normalize: bool = True
    ectopic_filter: bool = False
    x_threshold_ms: float = 50.0


def session_metrics(record: SessionRecord, config: TrainConfig, base_dir=None) -> HrvMetrics:
    path = Path(record.signal_path)
    if base_dir is not None and not path.is_absolute():
        path = Path(base_dir) / path
    rr = as_rr(load_signal(path, record.signal_kind))
    if config.ectopic_filter:
        rr = filter_ectopic(rr)
    return compute_metrics(rr, config.x_threshold_ms)


def session_features(sessions, task: Task, config: TrainConfig, base_dir=None) -> list[FeatureVector]:
    return [
        extract_features(task, session_metrics(s, config, base_dir), s.session_id)
        for s in sessions
    ]


@dataclass(frozen=True)
class TrainResult:
    model: Model
    converged: bool
    iterations: int
    objective_value: float


def fit_features(features, labels, task: Task | None = None, config: TrainConfig | None = None) -> TrainResult:
    """Train on raw feature rows; normalisation (if enabled) is fitted here."""
    config = config or TrainConfig()
    x = np.asarray(features, dtype=np.float64)
    normalizer = fit_normalizer(x) if config.normalize else None
    ts = TrainingSet(normalizer.apply(x) if normalizer else x, labels)
    sol = solve_dual(ts, config.kernel, config.c_bound, config.kkt_tol, config.max_passes)
    model = build_model(sol, ts, normalizer, task.kind if task else None)
    return TrainResult(model, sol.converged, sol.iterations, sol.objective_value)


def train(sessions, task: Task, config: TrainConfig | None = None, base_dir=None) -> TrainResult:
    config = config or TrainConfig()
    sessions = list(sessions)
    if len(sessions) < 2:
        raise ValueError("need at least 2 sessions to train")
    labels = [label_for(task, task.level_of(s)) for s in sessions]
    feats = session_features(sessions, task, config, base_dir)
    return fit_features([f.values for f in feats], labels, task, config)


@dataclass(frozen=True)
class EvaluationRow:
    session_id: str
    level: int
    true_label: int
    decision_value: float
    predicted_label: int

    @property
    def correct(self) -> bool:
        return self.predicted_label == self.true_label


@dataclass(frozen=True)
class EvaluationReport:
    rows: tuple[EvaluationRow, ...]

    @property
    def correct_count(self) -> int:
        return sum(r.correct for r in self.rows)

    @property
    def total_count(self) -> int:
        return len(self.rows)

    @property
    def accuracy(self) -> float:
        return self.correct_count / self.total_count if self.rows else 0.0


def report_from_values(task: Task, session_ids, levels, values) -> EvaluationReport:
    """Apply the sign rule to already-computed decision values."""
    rows = []
    for sid, level, value in zip(session_ids, levels, values, strict=True):
        rows.append(EvaluationRow(sid, int(level), label_for(task, int(level)), float(value), sign_label(value)))
    return EvaluationReport(tuple(rows))


def evaluate(m: Model, sessions, task: Task, config: TrainConfig | None = None, base_dir=None) -> EvaluationReport:
    """Score sessions with a trained model; rows keep input order."""
    if m.task is not None and m.task != task.kind:
        raise TaskMismatchError(f"model was trained for {m.task!r}, not {task.kind!r}")
    config = config or TrainConfig()
    sessions = list(sessions)
    feats = session_features(sessions, task, config, base_dir)
    values = [decision_value(m, f.values) for f in feats]
    return report_from_values(
        task, [s.session_id for s in sessions], [task.level_of(s) for s in sessions], values
    )


def holdout_split(sessions, test_fraction: float = 0.25, seed: int = 0):
    """Shuffle-and-split helper for experiments outside the self-test procedure."""
    sessions = list(sessions)
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must lie in (0, 1)")
    order = np.random.default_rng(seed).permutation(len(sessions))
    n_test = max(1, int(round(test_fraction * len(sessions))))
    test = [sessions[i] for i in sorted(order[:n_test])]
    train_part = [sessions[i] for i in sorted(order[n_test:])]
    return train_part, test


def format_report(report: EvaluationReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_HEADER)
    for r in report.rows:
        writer.writerow(
            [r.session_id, r.level, r.true_label, repr(r.decision_value), r.predicted_label,
             "true" if r.correct else "false"]
        )
    return buf.getvalue()


# model files


def save_model(m: Model) -> str:
    k = m.kernel
    lines = [
        MODEL_HEADER,
        f"task {m.task or '-'}",
        f"kernel {k.kind} sigma={k.sigma!r} degree={k.degree} coef0={k.coef0!r}",
        f"c_bound {m.c_bound!r}",
        f"converged {'true' if m.converged else 'false'}",
        f"bias {m.bias!r}",
    ]
    norm = m.normalizer
    lines.append(f"normalizer {0 if norm is None else len(norm.means)}")
    if norm is not None:
        lines += [f"{mu!r} {sd!r}" for mu, sd in zip(norm.means, norm.stds)]
    lines.append(f"support_vectors {len(m.support_alphas)} dim {m.dim}")
    for a, y, x in zip(m.support_alphas.tolist(), m.support_labels.tolist(), m.support_points.tolist()):
        lines.append(" ".join([repr(a), "1" if y > 0 else "-1"] + [repr(v) for v in x]))
    return "\n".join(lines) + "\n"


class _Reader:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.pos = 0

    def next(self, keyword: str | None = None) -> tuple[int, list[str]]:
        while self.pos < len(self.lines) and not self.lines[self.pos].strip():
            self.pos += 1
        if self.pos >= len(self.lines):
            raise ModelFormatError(f"unexpected end of file (wanted {keyword or 'a row'})", self.pos + 1)
        self.pos += 1
        lineno = self.pos
        parts = self.lines[lineno - 1].split()
        if keyword is not None:
            if parts[0] != keyword:
                raise ModelFormatError(f"expected {keyword!r}, found {parts[0]!r}", lineno)
            parts = parts[1:]
        return lineno, parts


def _finite(token: str, lineno: int) -> float:
    try:
        v = float(token)
    except ValueError:
        raise ModelFormatError(f"{token!r} is not a number", lineno) from None
    if not math.isfinite(v):
        raise ModelFormatError(f"non-finite value {token!r}", lineno)
    return v


def _int(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise ModelFormatError(f"{token!r} is not an integer", lineno) from None


def load_model(doc: str) -> Model:
    r = _Reader(doc)
    if not r.lines or r.lines[0].strip() != MODEL_HEADER:
        found = r.lines[0].strip() if r.lines else ""
        raise VersionError(f"unsupported model header {found!r}; expected {MODEL_HEADER!r}", 1)
    r.pos = 1
    lineno, parts = r.next("task")
    if len(parts) != 1:
        raise ModelFormatError("task row needs one value", lineno)
    task = None if parts[0] == "-" else parts[0]
    if task is not None and task not in TASKS:
        raise ModelFormatError(f"unknown task {task!r}", lineno)
    lineno, parts = r.next("kernel")
    if not parts or parts[0] not in KERNEL_KINDS:
        raise ModelFormatError("kernel row must start with a kernel kind", lineno)
    opts = {}
    for p in parts[1:]:
        key, sep, val = p.partition("=")
        if not sep or key not in ("sigma", "degree", "coef0"):
            raise ModelFormatError(f"bad kernel option {p!r}", lineno)
        opts[key] = _int(val, lineno) if key == "degree" else _finite(val, lineno)
    try:
        kernel = KernelSpec(parts[0], **opts)
    except ValueError as exc:
        raise ModelFormatError(str(exc), lineno) from None
    lineno, parts = r.next("c_bound")
    c_bound = _finite(parts[0], lineno) if len(parts) == 1 else None
    if c_bound is None or c_bound <= 0:
        raise ModelFormatError("c_bound must be one positive number", lineno)
    lineno, parts = r.next("converged")
    if parts not in (["true"], ["false"]):
        raise ModelFormatError("converged must be true or false", lineno)
    converged = parts[0] == "true"
    lineno, parts = r.next("bias")
    if len(parts) != 1:
        raise ModelFormatError("bias row needs one value", lineno)
    bias = _finite(parts[0], lineno)
    lineno, parts = r.next("normalizer")
    n_norm = _int(parts[0], lineno) if len(parts) == 1 else -1
    if n_norm < 0:
        raise ModelFormatError("normalizer row needs a non-negative count", lineno)
    means, stds = [], []
    for _ in range(n_norm):
        lineno, parts = r.next()
        if len(parts) != 2:
            raise ModelFormatError("normalizer rows are 'mean std'", lineno)
        mu, sd = _finite(parts[0], lineno), _finite(parts[1], lineno)
        if sd <= 0:
            raise ModelFormatError("normalizer std must be > 0", lineno)
        means.append(mu)
        stds.append(sd)
    normalizer = Normalizer(tuple(means), tuple(stds)) if n_norm else None
    lineno, parts = r.next("support_vectors")
    if len(parts) != 3 or parts[1] != "dim":
        raise ModelFormatError("expected 'support_vectors N dim D'", lineno)
    n_sv, dim = _int(parts[0], lineno), _int(parts[2], lineno)
    if n_sv < 1 or dim < 1:
        raise ModelFormatError("need at least one support vector of dimension >= 1", lineno)
    if normalizer is not None and len(normalizer.means) != dim:
        raise ModelFormatError("normalizer size does not match feature dimension", lineno)
    alphas, labels, points = [], [], []
    for _ in range(n_sv):
        lineno, parts = r.next()
        if len(parts) != 2 + dim:
            raise ModelFormatError(f"support vector rows need {2 + dim} fields", lineno)
        a = _finite(parts[0], lineno)
        if a < 0:
            raise ModelFormatError(f"alpha must be >= 0, got {parts[0]}", lineno)
        if parts[1] not in ("1", "-1", "+1"):
            raise ModelFormatError(f"label must be +1 or -1, got {parts[1]!r}", lineno)
        alphas.append(a)
        labels.append(-1.0 if parts[1] == "-1" else 1.0)
        points.append([_finite(t, lineno) for t in parts[2:]])
    if r.pos < len(r.lines) and any(line.strip() for line in r.lines[r.pos:]):
        raise ModelFormatError("trailing content after support vectors", r.pos + 1)
    return Model(
        support_points=np.asarray(points, dtype=np.float64),
        support_labels=np.asarray(labels),
        support_alphas=np.asarray(alphas),
        bias=bias,
        kernel=kernel,
        normalizer=normalizer,
        task=task,
        c_bound=c_bound,
        converged=converged,
    )

