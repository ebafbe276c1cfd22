"""Command-line front end.

Dataset ingestion, synthetic-data generation, channel ranking, training,
prediction, experiment sweeps, and the decorrelation demo. Every run with
identical inputs and seed produces byte-identical output files: floats are
written with repr (shortest round-trip form), report rows are ordered by
(m, R), and nothing time- or path-dependent goes into a report.
"""

import argparse
import configparser
import csv
import dataclasses
import os
import sys
from dataclasses import dataclass

import numpy as np

from .classify import (
    evaluate,
    load_model,
    save_model,
    t_test_accuracies,
    train_mvbeta,
    train_pca_gauss,
)
from .dirstat import DirichletParams, dirichlet_sample
from .errors import ConvergenceError, DataLoadError, DegenerateDataError, NumericError
from .msignal import FeatureConfig, Trial, extract_features
from .neutral import pnt_forward_batch, sample_correlation_matrix
from .selection import ChannelScore, rank_channels_cr, rank_channels_fr

_MANIFEST_HEADER = ("trial_id", "path", "label", "split")


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class ExperimentConfig:
    """Sweep and pipeline settings, usually read from an INI-style file."""

    classifier: str = "mvbeta"
    ranking: str = "fisher_ratio"
    criterion: str = "variance"
    m_values: tuple = (1,)
    R_values: tuple = (2, 3, 4)
    seed: int = 0
    level: int = 4
    band_low_hz: float = 7.0
    band_high_hz: float = 30.0
    epsilon_floor: float = 1e-10
    sample_rate_hz: float = 1000.0
    scores_path: str = ""
    n_components: int = 1

    def __post_init__(self):
        if self.classifier not in ("mvbeta", "pca_gauss"):
            raise ValueError(f"classifier must be mvbeta or pca_gauss, got {self.classifier!r}")
        if self.ranking not in ("fisher_ratio", "classification_rate", "external_csv"):
            raise ValueError(f"unknown ranking method {self.ranking!r}")
        if self.criterion not in ("variance", "entropy"):
            raise ValueError(f"unknown selection criterion {self.criterion!r}")
        m_vals = tuple(sorted(set(int(m) for m in self.m_values)))
        R_vals = tuple(sorted(set(int(R) for R in self.R_values)))
        if not m_vals or m_vals[0] < 1:
            raise ValueError("m values must be positive integers")
        if not R_vals or R_vals[0] < 1:
            raise ValueError("R values must be positive integers")
        if self.level < 1:
            raise ValueError("level must be >= 1")
        if not (0.0 < self.band_low_hz < self.band_high_hz):
            raise ValueError("band edges must satisfy 0 < low < high")
        if self.ranking == "external_csv" and not self.scores_path:
            raise ValueError("ranking=external_csv needs a scores file path")
        if self.n_components < 1:
            raise ValueError("n_components must be >= 1")
        object.__setattr__(self, "m_values", m_vals)
        object.__setattr__(self, "R_values", R_vals)


@dataclass(frozen=True)
class GeneratorSpec:
    """Per-class, per-channel Dirichlet parameters for synthetic data."""

    n_channels: int
    dim: int
    train_per_class: int
    test_per_class: int
    pos_alphas: tuple
    neg_alphas: tuple

    def __post_init__(self):
        if self.n_channels < 1 or self.dim < 2:
            raise ValueError("need at least 1 channel and dimension >= 2")
        if self.train_per_class < 2 or self.test_per_class < 0:
            raise ValueError("train_per_class must be >= 2 and test_per_class >= 0")
        for side in (self.pos_alphas, self.neg_alphas):
            if len(side) != self.n_channels:
                raise ValueError("one alpha vector per channel per class")


def _int_list(text: str) -> tuple:
    """Parse '1:4' (inclusive range) or '2,3,4' into a tuple of ints."""
    text = text.strip()
    if ":" in text:
        lo_s, hi_s = text.split(":", 1)
        lo, hi = int(lo_s), int(hi_s)
        if hi < lo:
            raise ValueError(f"empty range {text!r}")
        return tuple(range(lo, hi + 1))
    return tuple(int(tok) for tok in text.split(","))


def _load_config_file(path):
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    if path is not None:
        try:
            with open(path) as fh:
                cp.read_file(fh)
        except OSError as exc:
            raise DataLoadError(f"cannot read config {path}: {exc}") from exc
        except configparser.Error as exc:
            raise DataLoadError(f"bad config {path}: {exc}") from exc
    return cp


def experiment_config(cp, seed_override=None, base_dir=".") -> ExperimentConfig:
    """Build an ExperimentConfig from a parsed config file.

    A --seed flag wins over the file's seed. Relative scores paths are
    resolved against the config file's directory.
    """
    exp = cp["experiment"] if cp.has_section("experiment") else {}
    feat = cp["features"] if cp.has_section("features") else {}
    band = tuple(float(tok) for tok in feat.get("band", "7,30").split(","))
    if len(band) != 2:
        raise DataLoadError("features band must be two comma-separated edges")
    seed = int(exp.get("seed", "0"))
    if seed_override is not None:
        seed = seed_override
    scores = exp.get("scores", "").strip()
    if scores and not os.path.isabs(scores):
        scores = os.path.join(base_dir, scores)
    try:
        return ExperimentConfig(
            classifier=exp.get("classifier", "mvbeta").strip(),
            ranking=exp.get("ranking", "fisher_ratio").strip(),
            criterion=exp.get("criterion", "variance").strip(),
            m_values=_int_list(exp.get("m", "1")),
            R_values=_int_list(exp.get("r", "2,3,4")),
            seed=seed,
            level=int(feat.get("level", "4")),
            band_low_hz=band[0],
            band_high_hz=band[1],
            epsilon_floor=float(feat.get("epsilon", "1e-10")),
            sample_rate_hz=float(feat.get("sample_rate_hz", "1000")),
            scores_path=scores,
            n_components=int(exp.get("components", "1")),
        )
    except ValueError as exc:
        raise DataLoadError(f"bad config value: {exc}") from exc


def generator_spec(cp) -> GeneratorSpec:
    """Build a GeneratorSpec from the [generator] and [class ±1] sections."""
    if not cp.has_section("generator"):
        raise DataLoadError("config has no [generator] section")
    gen = cp["generator"]
    n_channels = int(gen.get("channels", "4"))
    dim = int(gen.get("dim", "5"))
    train = int(gen.get("train_per_class", "150"))
    test = int(gen.get("test_per_class", "50"))

    def class_alphas(section):
        if not cp.has_section(section):
            raise DataLoadError(f"config has no [{section}] section")
        sec = cp[section]
        out = []
        for c in range(1, n_channels + 1):
            raw = sec.get(f"channel_{c}", sec.get("default"))
            if raw is None:
                raise DataLoadError(f"[{section}] needs channel_{c} or a default entry")
            alpha = tuple(float(tok) for tok in raw.split(","))
            if len(alpha) != dim:
                raise DataLoadError(f"[{section}] channel_{c}: expected {dim} values, got {len(alpha)}")
            out.append(alpha)
        return tuple(out)

    return GeneratorSpec(
        n_channels, dim, train, test, class_alphas("class +1"), class_alphas("class -1")
    )


# ---------------------------------------------------------------------------
# dataset ingestion


@dataclass(frozen=True)
class ManifestEntry:
    trial_id: str
    path: str
    label: int
    split: str


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple
    n_channels: int
    sample_rate_hz: float


def _parse_label(text, trial_id):
    tok = text.strip()
    if tok in ("+1", "1"):
        return +1
    if tok == "-1":
        return -1
    raise DataLoadError(f"label must be +1 or -1, got {text!r}", trial_id=trial_id)


def read_manifest(path):
    """Parse a manifest CSV into ManifestEntry rows.

    Columns: trial_id,path,label,split. Paths are resolved relative to the
    manifest's own directory and must exist.
    """
    base = os.path.dirname(os.path.abspath(path))
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataLoadError(f"cannot read manifest {path}: {exc}") from exc
    if not rows or tuple(c.strip() for c in rows[0]) != _MANIFEST_HEADER:
        raise DataLoadError(f"{path}: manifest header must be {','.join(_MANIFEST_HEADER)}")
    entries, seen = [], set()
    for row in rows[1:]:
        if not row:
            continue
        if len(row) != 4:
            raise DataLoadError(f"{path}: manifest rows need 4 fields, got {row!r}")
        tid, rel, label_text, split = (c.strip() for c in row)
        if not tid:
            raise DataLoadError(f"{path}: empty trial_id")
        if tid in seen:
            raise DataLoadError(f"duplicate trial_id {tid!r}", trial_id=tid)
        seen.add(tid)
        label = _parse_label(label_text, tid)
        if split not in ("train", "test"):
            raise DataLoadError(f"split must be train or test, got {split!r}", trial_id=tid)
        full = os.path.join(base, rel)
        if not os.path.exists(full):
            raise DataLoadError(f"trial file not found: {full}", trial_id=tid)
        entries.append(ManifestEntry(tid, full, label, split))
    if not entries:
        raise DataLoadError(f"{path}: manifest lists no trials")
    return entries


def ingest(manifest_path, sample_rate_hz: float = 1000.0):
    """Load a signal-space dataset: manifest plus one CSV per trial.

    Each trial file holds one row per channel, comma-separated samples.
    Returns (DatasetManifest, list of Trial) in manifest order.
    """
    entries = read_manifest(manifest_path)
    trials, n_channels = [], None
    for e in entries:
        with open(e.path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
        if not rows:
            raise DataLoadError(f"{e.path}: empty trial file", trial_id=e.trial_id)
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise DataLoadError(f"{e.path}: ragged channel rows", trial_id=e.trial_id)
        try:
            mat = np.array([[float(v) for v in r] for r in rows], dtype=float)
            trial = Trial(e.trial_id, mat, e.label, sample_rate_hz)
        except ValueError as exc:
            raise DataLoadError(f"{e.path}: {exc}", trial_id=e.trial_id) from exc
        if n_channels is None:
            n_channels = mat.shape[0]
        elif mat.shape[0] != n_channels:
            raise DataLoadError(
                f"{e.path}: expected {n_channels} channels, found {mat.shape[0]}",
                trial_id=e.trial_id,
            )
        trials.append(trial)
    return DatasetManifest(tuple(entries), n_channels, sample_rate_hz), trials


# ---------------------------------------------------------------------------
# feature-space datasets


def write_features(path, records, dim: int):
    """Write (trial_id, per-channel vectors, label) records as CSV.

    Columns: trial_id,channel,x1..xD,label; one row per channel, channels
    ascending, trials in the given order.
    """
    header = ["trial_id", "channel"] + [f"x{i}" for i in range(1, dim + 1)] + ["label"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for tid, feats, label in records:
            for c, vec in enumerate(feats, start=1):
                w.writerow([tid, c] + [repr(float(v)) for v in vec] + [f"{label:+d}"])


def load_features(path, manifest=None):
    """Load a features CSV, optionally joining split info from a manifest.

    Returns (records, n_channels, dim) where each record is a tuple
    (trial_id, per-channel vectors, label, split); split is None when no
    manifest is supplied.
    """
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataLoadError(f"cannot read features {path}: {exc}") from exc
    if not rows:
        raise DataLoadError(f"{path}: empty features file")
    header = [c.strip() for c in rows[0]]
    dim = len(header) - 3
    if (
        dim < 2
        or header[0] != "trial_id"
        or header[1] != "channel"
        or header[-1] != "label"
        or header[2:-1] != [f"x{i}" for i in range(1, dim + 1)]
    ):
        raise DataLoadError(f"{path}: header must be trial_id,channel,x1..xD,label")
    per_trial, labels, order = {}, {}, []
    for row in rows[1:]:
        if not row:
            continue
        if len(row) != len(header):
            raise DataLoadError(f"{path}: row has {len(row)} fields, expected {len(header)}")
        tid = row[0].strip()
        try:
            channel = int(row[1])
            vec = np.array([float(v) for v in row[2:-1]], dtype=float)
        except ValueError as exc:
            raise DataLoadError(f"{path}: {exc}", trial_id=tid) from exc
        if channel < 1:
            raise DataLoadError(f"channel numbers are 1-based, got {channel}", trial_id=tid)
        label = _parse_label(row[-1], tid)
        if tid not in per_trial:
            per_trial[tid] = {}
            labels[tid] = label
            order.append(tid)
        elif labels[tid] != label:
            raise DataLoadError("inconsistent labels across channel rows", trial_id=tid)
        if channel in per_trial[tid]:
            raise DataLoadError(f"duplicate channel {channel}", trial_id=tid)
        per_trial[tid][channel] = vec
    if not order:
        raise DataLoadError(f"{path}: no feature rows")
    n_channels = max(max(chs) for chs in per_trial.values())
    for tid in order:
        if sorted(per_trial[tid]) != list(range(1, n_channels + 1)):
            raise DataLoadError(f"expected channels 1..{n_channels}", trial_id=tid)
    split_of = None
    if manifest is not None:
        split_of = {e.trial_id: e.split for e in manifest}
        label_of = {e.trial_id: e.label for e in manifest}
        for tid in split_of:
            if tid not in per_trial:
                raise DataLoadError("manifest trial missing from features file", trial_id=tid)
        for tid in order:
            if tid not in split_of:
                raise DataLoadError("features file lists a trial absent from the manifest", trial_id=tid)
            if label_of[tid] != labels[tid]:
                raise DataLoadError("manifest and features disagree on the label", trial_id=tid)
    records = []
    for tid in order:
        feats = tuple(per_trial[tid][c] for c in range(1, n_channels + 1))
        records.append((tid, feats, labels[tid], split_of[tid] if split_of else None))
    return records, n_channels, dim


def _split_matrices(records, split, n_channels):
    """Per-channel (n, D) class matrices from the records of one split."""
    pos = [[] for _ in range(n_channels)]
    neg = [[] for _ in range(n_channels)]
    for _, feats, label, sp in records:
        if split is not None and sp != split:
            continue
        side = pos if label == +1 else neg
        for c in range(n_channels):
            side[c].append(feats[c])
    if not pos[0] or not neg[0]:
        where = f"{split} split" if split else "dataset"
        raise DataLoadError(f"{where} needs trials from both classes")
    return [np.array(v) for v in pos], [np.array(v) for v in neg]


def _eval_records(records, split):
    out = [(tid, feats, label) for tid, feats, label, sp in records if split is None or sp == split]
    if not out:
        raise DataLoadError(f"no {split} trials in dataset")
    return out


# ---------------------------------------------------------------------------
# synthetic data


def synth(spec: GeneratorSpec, seed: int, out_dir):
    """Sample a labelled feature-space dataset from known Dirichlets.

    Writes features.csv, manifest.csv (its path column pointing at
    features.csv), and a truth.csv sidecar with the generating parameters.
    Identical spec + seed give byte-identical files.
    """
    rng = np.random.default_rng(seed)
    n_total = spec.train_per_class + spec.test_per_class
    records, manifest_rows, idx = [], [], 0
    for label, alphas in ((+1, spec.pos_alphas), (-1, spec.neg_alphas)):
        draws = [dirichlet_sample(DirichletParams(a), n_total, seed=rng) for a in alphas]
        for t in range(n_total):
            idx += 1
            tid = f"trial_{idx:05d}"
            split = "train" if t < spec.train_per_class else "test"
            records.append((tid, tuple(d[t] for d in draws), label))
            manifest_rows.append((tid, "features.csv", label, split))
    features_path = os.path.join(out_dir, "features.csv")
    write_features(features_path, records, spec.dim)
    manifest_path = os.path.join(out_dir, "manifest.csv")
    with open(manifest_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(_MANIFEST_HEADER)
        for tid, rel, label, split in manifest_rows:
            w.writerow([tid, rel, f"{label:+d}", split])
    truth_path = os.path.join(out_dir, "truth.csv")
    with open(truth_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "channel"] + [f"alpha{i}" for i in range(1, spec.dim + 1)])
        for label, alphas in ((+1, spec.pos_alphas), (-1, spec.neg_alphas)):
            for c, alpha in enumerate(alphas, start=1):
                w.writerow([f"{label:+d}", c] + [repr(float(v)) for v in alpha])
    return features_path, manifest_path, truth_path


# ---------------------------------------------------------------------------
# rankings


def load_scores_csv(path, n_channels: int):
    """External channel scores (columns channel,score) as a ranking."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataLoadError(f"cannot read scores {path}: {exc}") from exc
    if not rows or [c.strip() for c in rows[0]][:2] != ["channel", "score"]:
        raise DataLoadError(f"{path}: scores header must be channel,score")
    scores = {}
    for row in rows[1:]:
        if not row:
            continue
        try:
            ch, sc = int(row[0]), float(row[1])
        except ValueError as exc:
            raise DataLoadError(f"{path}: {exc}") from exc
        if ch in scores:
            raise DataLoadError(f"{path}: duplicate channel {ch}")
        scores[ch] = sc
    if sorted(scores) != list(range(1, n_channels + 1)):
        raise DataLoadError(f"{path}: need exactly one score per channel 1..{n_channels}")
    ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    return [ChannelScore(ch, sc, "external_csv") for ch, sc in ranked]


def load_ranking_csv(path, n_channels: int):
    """Re-read a ranking.csv written by the rank subcommand."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataLoadError(f"cannot read ranking {path}: {exc}") from exc
    if not rows or [c.strip() for c in rows[0]] != ["channel", "score", "method"]:
        raise DataLoadError(f"{path}: ranking header must be channel,score,method")
    out, seen = [], set()
    for row in rows[1:]:
        if not row:
            continue
        try:
            ch, sc = int(row[0]), float(row[1])
        except ValueError as exc:
            raise DataLoadError(f"{path}: {exc}") from exc
        if ch in seen or ch > n_channels:
            raise DataLoadError(f"{path}: bad or duplicate channel {ch}")
        seen.add(ch)
        out.append(ChannelScore(ch, sc, row[2].strip()))
    if not out:
        raise DataLoadError(f"{path}: no ranking rows")
    return sorted(out, key=lambda s: (-s.score, s.channel_index))


def make_ranking(cfg: ExperimentConfig, class_pos, class_neg):
    if cfg.ranking == "fisher_ratio":
        return rank_channels_fr(class_pos, class_neg)
    if cfg.ranking == "classification_rate":
        return rank_channels_cr(class_pos, class_neg)
    return load_scores_csv(cfg.scores_path, len(class_pos))


# ---------------------------------------------------------------------------
# experiment sweep


@dataclass(frozen=True)
class ExperimentReport:
    grid: tuple     # (m, R, accuracy) ordered by (m, R)
    methods: tuple  # (name, best_acc, best_m, mean_acc, std_acc) per R
    ttests: tuple   # (method_a, method_b, p_value), empty if fewer than 2 m values


def _method_name(cfg: ExperimentConfig, R: int) -> str:
    if cfg.classifier == "mvbeta":
        return f"mvbeta {cfg.ranking} {cfg.criterion} R={R}"
    return f"pca_gauss {cfg.ranking} R={R}"


def _train_one(cfg, pos_tr, neg_tr, m, R, ranking):
    if cfg.classifier == "mvbeta":
        return train_mvbeta(pos_tr, neg_tr, m=m, R=R, ranking=ranking, criterion=cfg.criterion)
    return train_pca_gauss(pos_tr, neg_tr, m=m, R=R, ranking=ranking, n_components=cfg.n_components)


def run_experiment(cfg: ExperimentConfig, records, n_channels: int, dim: int, out_dir) -> ExperimentReport:
    """Full (m, R) sweep: train on the train split, score on the test split.

    Emits grid.csv, summary.txt (method, best performance, best m, mean
    acc., std. dev. across the m sweep), ttests.csv (pairwise p-values
    between the per-R accuracy series), and one serialized model per cell
    under models/.
    """
    pos_tr, neg_tr = _split_matrices(records, "train", n_channels)
    test_set = _eval_records(records, "test")
    max_R = dim - 1 if cfg.classifier == "mvbeta" else dim
    for m in cfg.m_values:
        if m > n_channels:
            raise ValueError(f"m={m} exceeds the {n_channels} available channels")
    for R in cfg.R_values:
        if R > max_R:
            raise ValueError(f"R={R} exceeds {max_R} for classifier {cfg.classifier}")
    ranking = make_ranking(cfg, pos_tr, neg_tr)
    model_dir = os.path.join(out_dir, "models")
    os.makedirs(model_dir, exist_ok=True)
    grid, acc_by_R = [], {R: [] for R in cfg.R_values}
    for m in cfg.m_values:
        for R in cfg.R_values:
            try:
                model = _train_one(cfg, pos_tr, neg_tr, m, R, ranking)
                save_model(model, os.path.join(model_dir, f"model_m{m}_R{R}.txt"))
                acc = evaluate(model, test_set).accuracy
            except (ValueError, ArithmeticError, RuntimeError) as exc:
                raise type(exc)(f"(m={m}, R={R}): {exc}") from exc
            grid.append((m, R, acc))
            acc_by_R[R].append(acc)
    methods, names = [], {}
    for R in cfg.R_values:
        accs = acc_by_R[R]
        best = max(accs)
        best_m = cfg.m_values[accs.index(best)]
        mean = float(np.mean(accs))
        std = float(np.std(accs, ddof=1)) if len(accs) > 1 else 0.0
        names[R] = _method_name(cfg, R)
        methods.append((names[R], best, best_m, mean, std))
    ttests = []
    if len(cfg.m_values) >= 2:
        for i, Ra in enumerate(cfg.R_values):
            for Rb in cfg.R_values[i + 1:]:
                p = t_test_accuracies(acc_by_R[Ra], acc_by_R[Rb])
                ttests.append((names[Ra], names[Rb], p))
    report = ExperimentReport(tuple(grid), tuple(methods), tuple(ttests))
    _write_report(report, out_dir)
    return report


def _write_report(report: ExperimentReport, out_dir):
    with open(os.path.join(out_dir, "grid.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["m", "R", "accuracy"])
        for m, R, acc in report.grid:
            w.writerow([m, R, repr(acc)])
    with open(os.path.join(out_dir, "ttests.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method_a", "method_b", "p_value"])
        for a, b, p in report.ttests:
            w.writerow([a, b, repr(p)])
    rows = [("method", "best performance", "best m", "mean acc.", "std. dev.")]
    for name, best, best_m, mean, std in report.methods:
        rows.append((name, f"{best:.4f}", str(best_m), f"{mean:.4f}", f"{std:.4f}"))
    widths = [max(len(r[i]) for r in rows) for i in range(5)]
    lines = [
        "  ".join(val.ljust(widths[i]) for i, val in enumerate(row)).rstrip()
        for row in rows
    ]
    with open(os.path.join(out_dir, "summary.txt"), "w") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# decorrelation demo


def _write_matrix(path, M):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in np.asarray(M):
            w.writerow([repr(float(v)) for v in row])


def decorrelate_demo(alpha, n: int, seed: int, out_dir) -> float:
    """Sample Dirichlet vectors, transform them, and report correlations.

    Writes correlation_before.csv, correlation_after.csv, and a short
    decorrelation.txt; returns the max |off-diagonal| after the transform.
    """
    if n < 100:
        raise ValueError("n must be >= 100")
    X = dirichlet_sample(DirichletParams(alpha), n, seed=seed)
    before = sample_correlation_matrix(X)
    after = sample_correlation_matrix(pnt_forward_batch(X))
    off = after - np.eye(after.shape[0])
    max_off = float(np.max(np.abs(off)))
    _write_matrix(os.path.join(out_dir, "correlation_before.csv"), before)
    _write_matrix(os.path.join(out_dir, "correlation_after.csv"), after)
    lines = [
        f"alpha: {','.join(repr(float(a)) for a in alpha)}",
        f"n: {n}",
        f"seed: {seed}",
        f"max |off-diagonal| after transform: {repr(max_off)}",
    ]
    if n < 10000:
        lines.append(
            f"note: at n={n} the standard error of a sample correlation is roughly "
            f"{1.0 / np.sqrt(n):.3f}; off-diagonal magnitudes at or below that level "
            "are sampling noise."
        )
    with open(os.path.join(out_dir, "decorrelation.txt"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return max_off


# ---------------------------------------------------------------------------
# subcommands


def _single(values, name):
    if len(values) != 1:
        raise ValueError(f"config lists several {name} values; pass --{name} to pick one")
    return values[0]


def _cmd_extract(args):
    cfg = experiment_config(_load_config_file(args.config), args.seed, _config_dir(args))
    fc = FeatureConfig(cfg.level, cfg.band_low_hz, cfg.band_high_hz, cfg.epsilon_floor)
    manifest, trials = ingest(args.manifest, cfg.sample_rate_hz)
    records = [(t.trial_id, extract_features(t, fc), t.label) for t in trials]
    out = os.path.join(args.out_dir, "features.csv")
    write_features(out, records, cfg.level + 1)
    print(f"wrote {out} ({len(records)} trials, {manifest.n_channels} channels)")
    return 0


def _cmd_rank(args):
    cfg = experiment_config(_load_config_file(args.config), args.seed, _config_dir(args))
    overrides = {}
    if args.method:
        overrides["ranking"] = args.method
    if args.scores:
        overrides["scores_path"] = args.scores
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    manifest = read_manifest(args.manifest) if args.manifest else None
    records, n_channels, _ = load_features(args.features, manifest)
    split = "train" if manifest else None
    pos, neg = _split_matrices(records, split, n_channels)
    ranking = make_ranking(cfg, pos, neg)
    out = os.path.join(args.out_dir, "ranking.csv")
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["channel", "score", "method"])
        for s in ranking:
            w.writerow([s.channel_index, repr(float(s.score)), s.method])
    print(f"wrote {out}")
    return 0


def _cmd_train(args):
    cfg = experiment_config(_load_config_file(args.config), args.seed, _config_dir(args))
    manifest = read_manifest(args.manifest)
    records, n_channels, dim = load_features(args.features, manifest)
    pos, neg = _split_matrices(records, "train", n_channels)
    m = args.m if args.m is not None else _single(cfg.m_values, "m")
    R = args.R if args.R is not None else _single(cfg.R_values, "R")
    if args.ranking_file:
        ranking = load_ranking_csv(args.ranking_file, n_channels)
    else:
        ranking = make_ranking(cfg, pos, neg)
    model = _train_one(cfg, pos, neg, m, R, ranking)
    out = os.path.join(args.out_dir, "model.txt")
    save_model(model, out)
    acc = evaluate(model, _eval_records(records, "train")).accuracy
    print(f"wrote {out} (train accuracy {acc:.4f})")
    return 0


def _cmd_predict(args):
    model = load_model(args.model)
    manifest = read_manifest(args.manifest) if args.manifest else None
    if args.split != "all" and manifest is None:
        raise DataLoadError("--split needs --manifest for the split assignment")
    records, _, _ = load_features(args.features, manifest)
    split = None if args.split == "all" else args.split
    test_set = _eval_records(records, split)
    res = evaluate(model, test_set)
    out = os.path.join(args.out_dir, "predictions.csv")
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trial_id", "prediction", "actual"])
        for tid, pred, actual in res.predictions:
            w.writerow([tid, f"{pred:+d}", f"{actual:+d}"])
    print(f"wrote {out} (accuracy {res.accuracy:.4f} on {len(test_set)} trials)")
    return 0


def _cmd_experiment(args):
    cfg = experiment_config(_load_config_file(args.config), args.seed, _config_dir(args))
    manifest = read_manifest(args.manifest)
    records, n_channels, dim = load_features(args.features, manifest)
    report = run_experiment(cfg, records, n_channels, dim, args.out_dir)
    best = max(report.methods, key=lambda row: row[1])
    print(f"wrote {os.path.join(args.out_dir, 'summary.txt')}")
    print(f"best: {best[0]} -> {best[1]:.4f} at m={best[2]}")
    return 0


def _cmd_synth(args):
    if not args.config:
        raise DataLoadError("synth needs --config with [generator] and [class ...] sections")
    cp = _load_config_file(args.config)
    spec = generator_spec(cp)
    seed = args.seed
    if seed is None:
        seed = int(cp["experiment"].get("seed", "0")) if cp.has_section("experiment") else 0
    features_path, manifest_path, truth_path = synth(spec, seed, args.out_dir)
    print(f"wrote {features_path}, {manifest_path}, {truth_path}")
    return 0


def _cmd_decorrelate(args):
    alpha = tuple(float(tok) for tok in args.alpha.split(","))
    seed = 0 if args.seed is None else args.seed
    max_off = decorrelate_demo(alpha, args.n, seed, args.out_dir)
    print(f"max |off-diagonal| after transform: {max_off:.6f}")
    return 0


def _config_dir(args):
    return os.path.dirname(os.path.abspath(args.config)) if args.config else "."


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mvbeta",
        description="Multichannel beta-MAP classification toolkit",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed (wins over the config file)")
    common.add_argument("--config", default=None, help="INI-style config file")
    common.add_argument("--out-dir", default=".", help="directory for output files")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", parents=[common], help="mDWT features from a signal-space manifest")
    p.add_argument("--manifest", required=True)
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("rank", parents=[common], help="rank channels by separability")
    p.add_argument("--features", required=True)
    p.add_argument("--manifest", help="restrict ranking to the train split")
    p.add_argument("--method", choices=["fisher_ratio", "classification_rate", "external_csv"])
    p.add_argument("--scores", help="channel,score CSV for method external_csv")
    p.set_defaults(func=_cmd_rank)

    p = sub.add_parser("train", parents=[common], help="fit one classifier on the train split")
    p.add_argument("--features", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--m", type=int, default=None, help="number of top channels")
    p.add_argument("--R", type=int, default=None, help="kept dimensions per channel")
    p.add_argument("--ranking-file", default=None, help="reuse a ranking.csv instead of recomputing")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("predict", parents=[common], help="label trials with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--manifest")
    p.add_argument("--split", choices=["train", "test", "all"], default="all")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("experiment", parents=[common], help="full (m, R) sweep with reports")
    p.add_argument("--features", required=True)
    p.add_argument("--manifest", required=True)
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic feature-space dataset")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("decorrelate-demo", parents=[common], help="correlation before/after the transform")
    p.add_argument("--alpha", default="2,5,6,3,7", help="comma-separated Dirichlet parameters")
    p.add_argument("--n", type=int, default=100000)
    p.set_defaults(func=_cmd_decorrelate)

    args = parser.parse_args(argv)
    os.makedirs(args.out_dir, exist_ok=True)
    try:
        return args.func(args)
    except (DataLoadError, DegenerateDataError, ConvergenceError, NumericError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
