"""MAP classification over transformed simplex features, a PCA+Gaussian
baseline, evaluation, and the Welch t-test used to compare methods.

Both classifiers share the same conventions: binary labels +1/-1, ties
resolved to +1, log-domain likelihoods, uniform priors by default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import betainc, logsumexp

from . import selection as _selection
from .dirstat import dirichlet_mle
from .errors import ConvergenceError, DataLoadError, DegenerateDataError, NumericError
from .neutral import BetaParamVector, beta_params_from_dirichlet, pnt_forward
from .dirstat import beta_pdf_log

__all__ = [
    "MvBetaModel",
    "PcaGaussModel",
    "EvaluationResult",
    "train_mvbeta",
    "predict_mvbeta",
    "train_pca_gauss",
    "predict_pca_gauss",
    "evaluate",
    "t_test_accuracies",
    "save_model",
    "load_model",
]

_LN_2PI = math.log(2.0 * math.pi)
_FORMAT_HEADER = "mvbeta-model-format 1"
# Diagonal loading of projected Gaussian covariances, as a fraction of the
# mean diagonal.
GAUSS_RIDGE_FRACTION = 1e-9


def _validate_priors(priors):
    p = (float(priors[0]), float(priors[1]))
    if len(priors) != 2 or p[0] < 0.0 or p[1] < 0.0 or abs(p[0] + p[1] - 1.0) > 1e-9:
        raise ValueError("priors must be two nonnegative reals summing to 1")
    return p


def _log_prior(p: float) -> float:
    return math.log(p) if p > 0.0 else float("-inf")


@dataclass(frozen=True, eq=False)
class MvBetaModel:
    """Per-channel beta parameters for both classes plus shared selections.

    channel_list holds 1-based indices into the original channel order;
    pos_params, neg_params and selections align with it entry by entry.
    """

    channel_list: tuple
    selections: tuple
    pos_params: tuple
    neg_params: tuple
    priors: tuple = (0.5, 0.5)

    def __post_init__(self):
        if not (len(self.channel_list) == len(self.selections) == len(self.pos_params) == len(self.neg_params)):
            raise ValueError("per-channel fields must have equal length")
        if len(self.channel_list) < 1:
            raise ValueError("model must cover at least one channel")
        for sel, bp_p, bp_n in zip(self.selections, self.pos_params, self.neg_params):
            if len(bp_p) != len(bp_n):
                raise ValueError("class parameter vectors must agree in length")
            if max(sel.kept_indices) > len(bp_p):
                raise ValueError("selection indexes beyond the parameter dimension")
        object.__setattr__(self, "priors", _validate_priors(self.priors))


@dataclass(frozen=True, eq=False)
class PcaGaussModel:
    """Per-channel projection and per-class Gaussian mixture parameters.

    Per channel: centers[i] (length d), bases[i] (d x R, orthonormal
    columns); per class and channel: weights (n_components,), means
    (n_components x R), covs (n_components x R x R).
    """

    channel_list: tuple
    centers: tuple
    bases: tuple
    pos_gauss: tuple  # (weights, means, covs) per channel
    neg_gauss: tuple
    priors: tuple = (0.5, 0.5)

    def __post_init__(self):
        n = len(self.channel_list)
        if not (n == len(self.centers) == len(self.bases) == len(self.pos_gauss) == len(self.neg_gauss)):
            raise ValueError("per-channel fields must have equal length")
        if n < 1:
            raise ValueError("model must cover at least one channel")
        for basis in self.bases:
            gram = basis.T @ basis
            if not np.allclose(gram, np.eye(basis.shape[1]), atol=1e-8):
                raise ValueError("projection basis must have orthonormal columns")
        object.__setattr__(self, "priors", _validate_priors(self.priors))


@dataclass(frozen=True, eq=False)
class EvaluationResult:
    """Accuracy, per-trial predictions, and confusion counts."""

    accuracy: float
    predictions: tuple  # (trial_id, predicted, actual)
    confusion: dict  # keys tp, tn, fp, fn
    meta: dict = field(default_factory=dict)


def _top_channels(ranking, m: int, n_channels: int):
    if not (1 <= m <= n_channels):
        raise ValueError(f"m must lie in 1..{n_channels}, got {m}")
    ordered = sorted(ranking, key=lambda s: (-s.score, s.channel_index))
    chans = [s.channel_index for s in ordered[:m]]
    if len(set(chans)) != m or max(chans) > n_channels or min(chans) < 1:
        raise ValueError("ranking does not provide m distinct valid channel indices")
    return chans


def _fit_alpha(vectors, channel_index: int):
    try:
        return dirichlet_mle(vectors)
    except ConvergenceError as exc:
        raise ConvergenceError(
            f"channel {channel_index}: {exc}", last_alpha=exc.last_alpha
        ) from exc
    except DegenerateDataError as exc:
        raise DegenerateDataError(f"channel {channel_index}: {exc}") from exc


def train_mvbeta(class_pos, class_neg, m: int, R: int, ranking, criterion: str = "variance", priors=(0.5, 0.5)) -> MvBetaModel:
    """Fit the beta MAP classifier on the top-m ranked channels.

    ``class_pos[c]`` / ``class_neg[c]`` are (n, K+1) matrices of simplex
    features for channel c. Per kept channel, each class gets its own
    Dirichlet fit mapped to beta marginals; the kept transformed dimensions
    come from a class-pooled fit so both classes share them.
    """
    if len(class_pos) != len(class_neg) or len(class_pos) < 1:
        raise ValueError("need the same nonzero number of channels per class")
    chans = _top_channels(ranking, m, len(class_pos))
    selections, pos_params, neg_params = [], [], []
    for idx in chans:
        P = np.asarray(class_pos[idx - 1], dtype=float)
        N = np.asarray(class_neg[idx - 1], dtype=float)
        if P.shape[0] < 2 or N.shape[0] < 2:
            raise ValueError(f"channel {idx}: each class needs at least 2 vectors")
        K = P.shape[1] - 1
        if not (1 <= R <= K):
            raise ValueError(f"R must lie in 1..{K}, got {R}")
        pos_params.append(beta_params_from_dirichlet(_fit_alpha(P, idx)))
        neg_params.append(beta_params_from_dirichlet(_fit_alpha(N, idx)))
        pooled = beta_params_from_dirichlet(_fit_alpha(np.vstack([P, N]), idx))
        selections.append(_selection.select_features(pooled, R, criterion))
    return MvBetaModel(
        channel_list=tuple(chans),
        selections=tuple(selections),
        pos_params=tuple(pos_params),
        neg_params=tuple(neg_params),
        priors=priors,
    )


def _mvbeta_class_loglik(model: MvBetaModel, trial_features, params) -> float:
    total = 0.0
    for i, idx in enumerate(model.channel_list):
        u = pnt_forward(np.asarray(trial_features[idx - 1], dtype=float))
        if np.any(u <= 0.0) or np.any(u >= 1.0):
            raise ValueError(f"channel {idx}: transformed feature left (0, 1)")
        for k in model.selections[i].kept_indices:
            total += beta_pdf_log(float(u[k - 1]), params[i].marginal(k - 1))
    return total


def predict_mvbeta(model: MvBetaModel, trial_features) -> int:
    """MAP label of one trial; ties go to +1.

    ``trial_features`` lists one simplex vector per original channel; the
    model picks out its own channels by index.
    """
    if len(trial_features) < max(model.channel_list):
        raise ValueError("trial does not provide every channel the model uses")
    ll_pos = _mvbeta_class_loglik(model, trial_features, model.pos_params)
    ll_neg = _mvbeta_class_loglik(model, trial_features, model.neg_params)
    ll_pos += _log_prior(model.priors[0])
    ll_neg += _log_prior(model.priors[1])
    return +1 if ll_pos >= ll_neg else -1


# ---------------------------------------------------------------------------
# PCA + Gaussian baseline


def _fit_gaussian_mixture(Z: np.ndarray, n_components: int):
    """Deterministic Gaussian (mixture) fit in the projected space.

    n_components=1 is the closed-form fit. Larger counts run plain EM from
    a deterministic split along the dominant principal direction of Z.
    """
    n, R = Z.shape
    if n <= R:
        raise NumericError("not enough samples to fit a covariance in the projected space")

    def _cov(block):
        # a block with zero spread in every coordinate carries no covariance
        # information; np.cov would still return rounding noise for it
        if np.all(np.ptp(block, axis=0) == 0.0):
            raise NumericError("degenerate covariance in projected space")
        c = np.atleast_2d(np.cov(block, rowvar=False))
        tr = np.trace(c)
        if not np.isfinite(tr) or tr <= 0.0:
            raise NumericError("degenerate covariance in projected space")
        return c + (GAUSS_RIDGE_FRACTION * tr / R) * np.eye(R)

    if n_components == 1:
        return (
            np.array([1.0]),
            Z.mean(axis=0)[None, :],
            _cov(Z)[None, :, :],
        )

    # deterministic start: order by projection on the leading eigenvector,
    # cut into equal slices
    C0 = np.atleast_2d(np.cov(Z, rowvar=False))
    _, vecs = np.linalg.eigh(C0)
    order = np.argsort(Z @ vecs[:, -1], kind="stable")
    slices = np.array_split(order, n_components)
    weights = np.array([len(s) / n for s in slices])
    means = np.vstack([Z[s].mean(axis=0) for s in slices])
    covs = np.stack([_cov(Z[s]) for s in slices])

    prev_ll = -np.inf
    for _ in range(200):
        log_resp = np.empty((n, n_components))
        for j in range(n_components):
            log_resp[:, j] = math.log(max(weights[j], 1e-300)) + _gauss_logpdf_rows(
                Z, means[j], covs[j]
            )
        norm = logsumexp(log_resp, axis=1)
        ll = float(norm.sum())
        resp = np.exp(log_resp - norm[:, None])
        nk = resp.sum(axis=0)
        weights = nk / n
        means = (resp.T @ Z) / nk[:, None]
        new_covs = []
        for j in range(n_components):
            diff = Z - means[j]
            c = (resp[:, j, None] * diff).T @ diff / nk[j]
            tr = np.trace(c)
            if not np.isfinite(tr) or tr <= 0.0:
                raise NumericError("degenerate covariance during mixture fit")
            new_covs.append(c + (GAUSS_RIDGE_FRACTION * tr / R) * np.eye(R))
        covs = np.stack(new_covs)
        if abs(ll - prev_ll) < 1e-8 * max(1.0, abs(ll)):
            break
        prev_ll = ll
    return weights, means, covs


def _gauss_logpdf_rows(Z, mean, cov):
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0:
        raise NumericError("covariance is not positive definite")
    diff = Z - mean
    sol = np.linalg.solve(cov, diff.T).T
    quad = np.sum(diff * sol, axis=1)
    return -0.5 * (mean.size * _LN_2PI + logdet + quad)


def _gauss_logpdf(z, mean, cov) -> float:
    return float(_gauss_logpdf_rows(z[None, :], mean, cov)[0])


def train_pca_gauss(class_pos, class_neg, m: int, R: int, ranking, priors=(0.5, 0.5), n_components: int = 1) -> PcaGaussModel:
    """Fit the PCA + Gaussian baseline on the top-m ranked channels.

    Per channel the data of both classes is pooled, centered, and projected
    onto the R leading eigenvectors of the pooled covariance; each class
    then gets a Gaussian (or a small mixture when n_components > 1) in the
    projected space.
    """
    if len(class_pos) != len(class_neg) or len(class_pos) < 1:
        raise ValueError("need the same nonzero number of channels per class")
    if n_components < 1:
        raise ValueError("n_components must be >= 1")
    chans = _top_channels(ranking, m, len(class_pos))
    centers, bases, pos_g, neg_g = [], [], [], []
    for idx in chans:
        P = np.asarray(class_pos[idx - 1], dtype=float)
        N = np.asarray(class_neg[idx - 1], dtype=float)
        d = P.shape[1]
        if not (1 <= R <= d):
            raise ValueError(f"R must lie in 1..{d}, got {R}")
        pooled = np.vstack([P, N])
        center = pooled.mean(axis=0)
        try:
            vals, vecs = np.linalg.eigh(np.cov(pooled - center, rowvar=False))
        except np.linalg.LinAlgError as exc:
            raise NumericError(f"channel {idx}: eigendecomposition failed: {exc}") from exc
        basis = vecs[:, np.argsort(vals)[::-1][:R]]
        centers.append(center)
        bases.append(basis)
        pos_g.append(_fit_gaussian_mixture((P - center) @ basis, n_components))
        neg_g.append(_fit_gaussian_mixture((N - center) @ basis, n_components))
    return PcaGaussModel(
        channel_list=tuple(chans),
        centers=tuple(centers),
        bases=tuple(bases),
        pos_gauss=tuple(pos_g),
        neg_gauss=tuple(neg_g),
        priors=priors,
    )


def _pca_class_loglik(model: PcaGaussModel, trial_features, side: str) -> float:
    gauss = model.pos_gauss if side == "pos" else model.neg_gauss
    total = 0.0
    for i, idx in enumerate(model.channel_list):
        x = np.asarray(trial_features[idx - 1], dtype=float)
        z = (x - model.centers[i]) @ model.bases[i]
        weights, means, covs = gauss[i]
        comps = [
            math.log(max(weights[j], 1e-300)) + _gauss_logpdf(z, means[j], covs[j])
            for j in range(len(weights))
        ]
        total += float(logsumexp(comps))
    return total


def predict_pca_gauss(model: PcaGaussModel, trial_features) -> int:
    """MAP label under the projected Gaussian model; ties go to +1."""
    if len(trial_features) < max(model.channel_list):
        raise ValueError("trial does not provide every channel the model uses")
    ll_pos = _pca_class_loglik(model, trial_features, "pos") + _log_prior(model.priors[0])
    ll_neg = _pca_class_loglik(model, trial_features, "neg") + _log_prior(model.priors[1])
    return +1 if ll_pos >= ll_neg else -1


# ---------------------------------------------------------------------------
# evaluation and significance


def evaluate(model, test_set, meta=None) -> EvaluationResult:
    """Score a model on labelled trials.

    ``test_set`` is a sequence of (trial_id, per-channel features, label)
    records. Accuracy is exactly correct/total; confusion counts treat +1
    as the positive class.
    """
    records = list(test_set)
    if not records:
        raise ValueError("test set must be nonempty")
    predict = predict_mvbeta if isinstance(model, MvBetaModel) else predict_pca_gauss
    preds = []
    tp = tn = fp = fn = 0
    for trial_id, features, label in records:
        if label not in (+1, -1):
            raise ValueError(f"trial {trial_id}: label must be +1 or -1")
        got = predict(model, features)
        preds.append((trial_id, got, label))
        if label == +1:
            tp, fn = (tp + 1, fn) if got == +1 else (tp, fn + 1)
        else:
            tn, fp = (tn + 1, fp) if got == -1 else (tn, fp + 1)
    correct = tp + tn
    return EvaluationResult(
        accuracy=correct / len(records),
        predictions=tuple(preds),
        confusion={"tp": tp, "tn": tn, "fp": fp, "fn": fn},
        meta=dict(meta or {}),
    )


def t_test_accuracies(sample_a, sample_b) -> float:
    """Two-sided Welch t-test p-value for the difference in means.

    Uses the regularized incomplete beta function for the t tail. Two
    zero-variance samples with equal means give p = 1 by convention.
    """
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValueError("each sample needs at least 2 values")
    va = a.var(ddof=1)
    vb = b.var(ddof=1)
    if va == 0.0 and vb == 0.0:
        return 1.0 if a.mean() == b.mean() else 0.0
    sa, sb = va / a.size, vb / b.size
    t = (a.mean() - b.mean()) / math.sqrt(sa + sb)
    df = (sa + sb) ** 2 / (sa**2 / (a.size - 1) + sb**2 / (b.size - 1))
    # two-sided tail of Student's t with df degrees of freedom
    return float(betainc(df / 2.0, 0.5, df / (df + t * t)))


# ---------------------------------------------------------------------------
# serialization


def _fmt_floats(values) -> str:
    return ",".join(repr(float(v)) for v in np.asarray(values, dtype=float).ravel())


def save_model(model, path):
    """Write a model as versioned labelled-CSV text."""
    lines = [_FORMAT_HEADER]
    if isinstance(model, MvBetaModel):
        lines.append("kind,mvbeta")
        lines.append("priors," + _fmt_floats(model.priors))
        lines.append("channels," + ",".join(str(c) for c in model.channel_list))
        for i, idx in enumerate(model.channel_list):
            sel = model.selections[i]
            lines.append(f"[channel {idx}]")
            lines.append(
                "selection," + sel.criterion + "," + ",".join(str(k) for k in sel.kept_indices)
            )
            lines.append("pos_a," + _fmt_floats(model.pos_params[i].a))
            lines.append("pos_b," + _fmt_floats(model.pos_params[i].b))
            lines.append("neg_a," + _fmt_floats(model.neg_params[i].a))
            lines.append("neg_b," + _fmt_floats(model.neg_params[i].b))
    elif isinstance(model, PcaGaussModel):
        lines.append("kind,pca_gauss")
        lines.append("priors," + _fmt_floats(model.priors))
        lines.append("channels," + ",".join(str(c) for c in model.channel_list))
        for i, idx in enumerate(model.channel_list):
            d, r = model.bases[i].shape
            lines.append(f"[channel {idx}]")
            lines.append(f"shape,{d},{r}")
            lines.append("center," + _fmt_floats(model.centers[i]))
            lines.append("basis," + _fmt_floats(model.bases[i]))
            for side, gauss in (("pos", model.pos_gauss[i]), ("neg", model.neg_gauss[i])):
                weights, means, covs = gauss
                lines.append(f"{side}_weights," + _fmt_floats(weights))
                for j in range(len(weights)):
                    lines.append(f"{side}_mean_{j}," + _fmt_floats(means[j]))
                    lines.append(f"{side}_cov_{j}," + _fmt_floats(covs[j]))
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_sections(lines):
    """Split 'key,values' lines into a global dict plus per-channel dicts."""
    top = {}
    sections = []
    current = top
    for ln in lines:
        ln = ln.strip()
        if not ln:
            continue
        if ln.startswith("[channel ") and ln.endswith("]"):
            current = {"_index": int(ln[len("[channel ") : -1])}
            sections.append(current)
            continue
        key, _, rest = ln.partition(",")
        current[key] = rest
    return top, sections


def load_model(path):
    """Read a model written by save_model."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != _FORMAT_HEADER:
        raise DataLoadError(f"{path}: not a recognized model file")
    top, sections = _parse_sections(lines[1:])
    try:
        kind = top["kind"]
        priors = tuple(float(v) for v in top["priors"].split(","))
        channels = tuple(int(v) for v in top["channels"].split(","))
        by_index = {s["_index"]: s for s in sections}
        if kind == "mvbeta":
            selections, pos_params, neg_params = [], [], []
            for idx in channels:
                sec = by_index[idx]
                parts = sec["selection"].split(",")
                selections.append(
                    _selection.FeatureSelection(tuple(int(k) for k in parts[1:]), parts[0])
                )
                pos_params.append(
                    BetaParamVector(
                        np.fromstring(sec["pos_a"], sep=","),
                        np.fromstring(sec["pos_b"], sep=","),
                    )
                )
                neg_params.append(
                    BetaParamVector(
                        np.fromstring(sec["neg_a"], sep=","),
                        np.fromstring(sec["neg_b"], sep=","),
                    )
                )
            return MvBetaModel(channels, tuple(selections), tuple(pos_params), tuple(neg_params), priors)
        if kind == "pca_gauss":
            centers, bases, pos_g, neg_g = [], [], [], []
            for idx in channels:
                sec = by_index[idx]
                d, r = (int(v) for v in sec["shape"].split(","))
                centers.append(np.fromstring(sec["center"], sep=","))
                bases.append(np.fromstring(sec["basis"], sep=",").reshape(d, r))
                for side, acc in (("pos", pos_g), ("neg", neg_g)):
                    weights = np.fromstring(sec[f"{side}_weights"], sep=",")
                    means = np.vstack(
                        [np.fromstring(sec[f"{side}_mean_{j}"], sep=",") for j in range(weights.size)]
                    )
                    covs = np.stack(
                        [
                            np.fromstring(sec[f"{side}_cov_{j}"], sep=",").reshape(r, r)
                            for j in range(weights.size)
                        ]
                    )
                    acc.append((weights, means, covs))
            return PcaGaussModel(channels, tuple(centers), tuple(bases), tuple(pos_g), tuple(neg_g), priors)
        raise KeyError(f"unknown kind {kind!r}")
    except (KeyError, ValueError, IndexError) as exc:
        raise DataLoadError(f"{path}: malformed model file ({exc})") from exc
