"""Channel ranking and within-channel feature selection.

Channels are ranked either by Fisher ratio (closed-form class separation)
or by resubstitution classification rate; within a channel, transformed
dimensions are kept by largest beta variance or differential entropy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dirstat import BetaParams, digamma, log_gamma
from .errors import NumericError
from .neutral import BetaParamVector

__all__ = [
    "ChannelScore",
    "FeatureSelection",
    "fisher_ratio",
    "rank_channels_fr",
    "rank_channels_cr",
    "beta_variance",
    "beta_entropy",
    "select_features",
]

# Diagonal loading applied to the pooled covariance before inversion, as a
# fraction of its mean diagonal. Simplex-valued features are rank-deficient
# by one, so some loading is required; this value lifts the null direction
# ~1000x above float noise while perturbing well-conditioned problems by
# O(1e-12) relative.
RIDGE_FRACTION = 1e-12


@dataclass(frozen=True)
class ChannelScore:
    """Separability score of one channel. channel_index is 1-based."""

    channel_index: int
    score: float
    method: str

    def __post_init__(self):
        if self.channel_index < 1:
            raise ValueError("channel_index is 1-based and must be >= 1")
        if self.method not in ("fisher_ratio", "classification_rate", "external_csv"):
            raise ValueError(f"unknown ranking method {self.method!r}")
        if not np.isfinite(self.score):
            raise ValueError("score must be finite")
        if self.method == "fisher_ratio" and self.score < 0.0:
            raise ValueError("fisher ratio scores are nonnegative")
        if self.method == "classification_rate" and not (0.0 <= self.score <= 1.0):
            raise ValueError("classification rates lie in [0, 1]")


@dataclass(frozen=True)
class FeatureSelection:
    """Kept transformed dimensions of one channel, 1-based, best first."""

    kept_indices: tuple
    criterion: str

    def __post_init__(self):
        idx = tuple(int(i) for i in self.kept_indices)
        if len(idx) < 1:
            raise ValueError("at least one dimension must be kept")
        if len(set(idx)) != len(idx) or min(idx) < 1:
            raise ValueError("kept_indices must be distinct 1-based indices")
        if self.criterion not in ("variance", "entropy"):
            raise ValueError(f"unknown selection criterion {self.criterion!r}")
        object.__setattr__(self, "kept_indices", idx)

    @property
    def R(self) -> int:
        return len(self.kept_indices)


def _class_matrix(vectors, name):
    X = np.asarray(vectors, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError(f"{name} must contain at least 2 vectors of common dimension")
    return X


def fisher_ratio(class_pos, class_neg) -> float:
    """Largest generalized Rayleigh quotient separating the two classes.

    Computed in closed form as dmu' (S+ + S-)^{-1} dmu, where dmu is the
    mean difference and S are the per-class sample covariances; the pooled
    matrix gets a tiny diagonal load before inversion.
    """
    P = _class_matrix(class_pos, "class_pos")
    N = _class_matrix(class_neg, "class_neg")
    if P.shape[1] != N.shape[1]:
        raise ValueError("classes must share a common dimension")
    dmu = P.mean(axis=0) - N.mean(axis=0)
    pooled = np.cov(P, rowvar=False) + np.cov(N, rowvar=False)
    pooled = np.atleast_2d(pooled)
    d = pooled.shape[0]
    ridge = RIDGE_FRACTION * np.trace(pooled) / d
    try:
        sol = np.linalg.solve(pooled + ridge * np.eye(d), dmu)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"pooled covariance is singular: {exc}") from exc
    fr = float(dmu @ sol)
    if not np.isfinite(fr):
        raise NumericError("fisher ratio overflowed; pooled covariance is effectively singular")
    return fr


def _sorted_scores(scores):
    return sorted(scores, key=lambda s: (-s.score, s.channel_index))


def rank_channels_fr(class_pos, class_neg) -> list:
    """Fisher-ratio score per channel, best first.

    ``class_pos[c]`` and ``class_neg[c]`` are the (n, d) feature matrices
    of channel c for each class. Ties break toward the lower channel index.
    """
    if len(class_pos) != len(class_neg) or len(class_pos) < 1:
        raise ValueError("need the same nonzero number of channels per class")
    scores = [
        ChannelScore(c + 1, fisher_ratio(class_pos[c], class_neg[c]), "fisher_ratio")
        for c in range(len(class_pos))
    ]
    return _sorted_scores(scores)


def rank_channels_cr(class_pos, class_neg) -> list:
    """Resubstitution accuracy per channel, best first.

    Trains the full-dimension MAP classifier on each channel alone and
    scores it on its own training set. Deterministic for fixed inputs.
    """
    from . import classify  # deferred: classify depends on this module

    if len(class_pos) != len(class_neg) or len(class_pos) < 1:
        raise ValueError("need the same nonzero number of channels per class")
    scores = []
    for c in range(len(class_pos)):
        P = _class_matrix(class_pos[c], "class_pos")
        N = _class_matrix(class_neg[c], "class_neg")
        K = P.shape[1] - 1
        trivial = [ChannelScore(1, 0.0, "classification_rate")]
        model = classify.train_mvbeta([P], [N], m=1, R=K, ranking=trivial)
        correct = sum(classify.predict_mvbeta(model, [x]) == +1 for x in P)
        correct += sum(classify.predict_mvbeta(model, [x]) == -1 for x in N)
        scores.append(
            ChannelScore(c + 1, correct / (len(P) + len(N)), "classification_rate")
        )
    return _sorted_scores(scores)


def beta_variance(p: BetaParams) -> float:
    """Variance of Beta(a, b): ab / ((a+b)^2 (a+b+1))."""
    s = p.a + p.b
    return p.a * p.b / (s * s * (s + 1.0))


def beta_entropy(p: BetaParams) -> float:
    """Differential entropy of Beta(a, b)."""
    a, b = p.a, p.b
    log_beta = log_gamma(a) + log_gamma(b) - log_gamma(a + b)
    # grouped so that swapping a and b gives the bit-identical result
    own_terms = (a - 1.0) * digamma(a) + (b - 1.0) * digamma(b)
    return (log_beta + (a + b - 2.0) * digamma(a + b)) - own_terms


def select_features(params: BetaParamVector, R: int, criterion: str = "variance") -> FeatureSelection:
    """Keep the R dimensions with the largest variance or entropy.

    Returned indices are 1-based and ordered by descending criterion value;
    exact ties break toward the lower index.
    """
    K = len(params)
    if not (1 <= R <= K):
        raise ValueError(f"R must lie in 1..{K}, got {R}")
    if criterion == "variance":
        values = [beta_variance(params.marginal(k)) for k in range(K)]
    elif criterion == "entropy":
        values = [beta_entropy(params.marginal(k)) for k in range(K)]
    else:
        raise ValueError(f"unknown selection criterion {criterion!r}")
    order = sorted(range(K), key=lambda k: (-values[k], k))
    return FeatureSelection(tuple(k + 1 for k in order[:R]), criterion)
