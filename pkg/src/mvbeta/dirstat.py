"""Distribution kernel: special functions, beta/Dirichlet densities,
Dirichlet sampling, and maximum-likelihood estimation.

All densities are computed in the log domain; products over many channels
and dimensions underflow otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln as _gammaln

from .errors import ConvergenceError, DegenerateDataError

__all__ = [
    "DirichletParams",
    "BetaParams",
    "SuperDirichletParams",
    "log_gamma",
    "digamma",
    "beta_pdf_log",
    "dirichlet_pdf_log",
    "super_dirichlet_pdf_log",
    "dirichlet_sample",
    "dirichlet_mle",
]

# Euler-Mascheroni constant, used by the inverse-digamma seed.
EULER_GAMMA = 0.57721566490153286060


# ---------------------------------------------------------------------------
# parameter containers


@dataclass(frozen=True)
class DirichletParams:
    """Concentration vector of a Dirichlet distribution."""

    alpha: np.ndarray

    def __post_init__(self):
        alpha = np.atleast_1d(np.asarray(self.alpha, dtype=float))
        if alpha.ndim != 1 or alpha.size < 2:
            raise ValueError("alpha must be a vector of length >= 2")
        if not np.all(np.isfinite(alpha)) or np.any(alpha <= 0.0):
            raise ValueError("every concentration parameter must be positive and finite")
        object.__setattr__(self, "alpha", alpha)

    @property
    def dim(self) -> int:
        return self.alpha.size


@dataclass(frozen=True)
class BetaParams:
    """Shape parameters (a, b) of a beta distribution."""

    a: float
    b: float

    def __post_init__(self):
        for name, v in (("a", self.a), ("b", self.b)):
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"beta parameter {name} must be positive and finite, got {v!r}")


@dataclass(frozen=True)
class SuperDirichletParams:
    """Parameters of a product of independent Dirichlet blocks (one per channel)."""

    blocks: tuple[DirichletParams, ...] = field(default_factory=tuple)

    def __post_init__(self):
        blocks = tuple(self.blocks)
        if len(blocks) < 1:
            raise ValueError("at least one Dirichlet block is required")
        if not all(isinstance(b, DirichletParams) for b in blocks):
            raise TypeError("blocks must be DirichletParams instances")
        object.__setattr__(self, "blocks", blocks)


# ---------------------------------------------------------------------------
# special functions


def log_gamma(x):
    """Natural log of the gamma function for positive ``x``.

    Accepts a scalar or array. Backed by scipy's ``gammaln``; the wrapper
    adds the strict positive-domain check the rest of the package relies on.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise ValueError("log_gamma requires x > 0")
    out = _gammaln(arr)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


# Asymptotic tail of psi(x) = d/dx ln Gamma(x), valid for x >= _PSI_SHIFT.
# Coefficients are -B_2n / (2n) for the series psi(x) ~ ln x - 1/(2x) + sum c_n x^(-2n).
_PSI_SHIFT = 6.0
_PSI_COEFFS = (
    -1.0 / 12.0,
    1.0 / 120.0,
    -1.0 / 252.0,
    1.0 / 240.0,
    -1.0 / 132.0,
    691.0 / 32760.0,
    -1.0 / 12.0,
)


def digamma(x):
    """Digamma function psi(x) for positive ``x`` (scalar or array).

    Small arguments are shifted upward with psi(x) = psi(x + 1) - 1/x until
    x >= 6, where the asymptotic series in 1/x^2 converges to below 1e-12.
    """
    arr = np.atleast_1d(np.asarray(x, dtype=float)).copy()
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise ValueError("digamma requires x > 0")
    acc = np.zeros_like(arr)
    # x > 0 implies at most ceil(_PSI_SHIFT) shift steps per element
    for _ in range(int(_PSI_SHIFT)):
        small = arr < _PSI_SHIFT
        if not small.any():
            break
        acc[small] -= 1.0 / arr[small]
        arr[small] += 1.0
    inv2 = 1.0 / (arr * arr)
    tail = np.zeros_like(arr)
    for c in reversed(_PSI_COEFFS):
        tail = (tail + c) * inv2
    out = acc + np.log(arr) - 0.5 / arr + tail
    return float(out[0]) if np.isscalar(x) or np.asarray(x).ndim == 0 else out


# Asymptotic tail of psi'(x); same shift-then-series scheme as digamma.
_PSI1_COEFFS = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
)


def _trigamma(x):
    """psi'(x) for positive arguments; internal helper for Newton steps."""
    arr = np.atleast_1d(np.asarray(x, dtype=float)).copy()
    acc = np.zeros_like(arr)
    for _ in range(int(_PSI_SHIFT)):
        small = arr < _PSI_SHIFT
        if not small.any():
            break
        acc[small] += 1.0 / (arr[small] * arr[small])
        arr[small] += 1.0
    inv = 1.0 / arr
    inv2 = inv * inv
    tail = np.zeros_like(arr)
    for c in reversed(_PSI1_COEFFS):
        tail = (tail + c) * inv2
    return acc + inv + 0.5 * inv2 + tail * inv


def _inv_digamma(y, tol=1e-12, max_iter=20):
    """Solve psi(alpha) = y for alpha > 0 by Newton iteration.

    Seeded with the usual piecewise approximation: exp(y) + 1/2 for
    y >= -2.22, otherwise -1/(y + EULER_GAMMA).
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    alpha = np.empty_like(y)
    big = y >= -2.22
    alpha[big] = np.exp(y[big]) + 0.5
    alpha[~big] = -1.0 / (y[~big] + EULER_GAMMA)
    for _ in range(max_iter):
        step = (digamma(alpha) - y) / _trigamma(alpha)
        new = alpha - step
        # keep iterates positive; halve the step when Newton overshoots
        bad = new <= 0.0
        while bad.any():
            step = np.where(bad, 0.5 * step, step)
            new = alpha - step
            bad = new <= 0.0
        alpha = new
        if np.max(np.abs(step)) < tol * np.max(alpha):
            break
    return alpha


# ---------------------------------------------------------------------------
# log densities


def beta_pdf_log(x, p: BetaParams):
    """Log density of Beta(a, b) at ``x`` in the open interval (0, 1).

    ``x`` may be a scalar or an array; every element must lie strictly
    inside (0, 1).
    """
    arr = np.asarray(x, dtype=float)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise ValueError("beta_pdf_log requires x strictly inside (0, 1)")
    norm = _gammaln(p.a + p.b) - _gammaln(p.a) - _gammaln(p.b)
    out = norm + (p.a - 1.0) * np.log(arr) + (p.b - 1.0) * np.log1p(-arr)
    return float(out) if arr.ndim == 0 else out


def dirichlet_pdf_log(x, p: DirichletParams) -> float:
    """Log density of Dir(alpha) at a point ``x`` of the open simplex."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size != p.dim:
        raise ValueError(f"dimension mismatch: x has {arr.size} coordinates, alpha has {p.dim}")
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise ValueError("x must lie strictly inside the simplex")
    if abs(arr.sum() - 1.0) > 1e-6:
        raise ValueError("x must sum to 1")
    a = p.alpha
    norm = _gammaln(a.sum()) - _gammaln(a).sum()
    return float(norm + ((a - 1.0) * np.log(arr)).sum())


def super_dirichlet_pdf_log(xsup, p: SuperDirichletParams) -> float:
    """Log density of a product of Dirichlet blocks at ``xsup``.

    ``xsup`` is a sequence with one simplex vector per block; the result is
    the sum of the per-block log densities.
    """
    if len(xsup) != len(p.blocks):
        raise ValueError(f"block count mismatch: {len(xsup)} vectors for {len(p.blocks)} blocks")
    return sum(dirichlet_pdf_log(x_t, block) for x_t, block in zip(xsup, p.blocks))


# ---------------------------------------------------------------------------
# sampling and estimation


def dirichlet_sample(p: DirichletParams, n: int, seed: int) -> np.ndarray:
    """Draw ``n`` i.i.d. vectors from Dir(alpha) as an (n, dim) array.

    Uses normalized gamma variates from a seeded PCG64 generator, so a
    fixed seed reproduces the draw exactly.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    g = rng.gamma(shape=p.alpha, size=(int(n), p.dim))
    return g / g.sum(axis=1, keepdims=True)


def _mean_loglik(mean_log: np.ndarray, alpha: np.ndarray) -> float:
    """Mean Dirichlet log likelihood given per-coordinate mean logs."""
    return float(
        _gammaln(alpha.sum()) - _gammaln(alpha).sum() + ((alpha - 1.0) * mean_log).sum()
    )


def dirichlet_mle(data, tol: float = 1e-8, max_iter: int = 1000, on_iteration=None) -> DirichletParams:
    """Maximum-likelihood Dirichlet fit by fixed-point iteration.

    Each sweep solves psi(alpha_k) = psi(sum alpha_old) + mean(ln x_k) with a
    Newton inversion of the digamma function; this is a minorize-maximize
    update, so the likelihood never decreases. Iteration stops when the
    largest relative parameter change drops below ``tol``.

    Parameters
    ----------
    data : array-like, shape (n, dim)
        Sample of simplex vectors, n >= 2, all strictly interior.
    tol : float
        Relative-change stopping threshold.
    max_iter : int
        Iteration cap; exceeding it raises ConvergenceError carrying the
        last iterate.
    on_iteration : callable, optional
        Called as ``on_iteration(iteration, alpha, mean_loglik)`` after the
        initial guess (iteration 0) and after every sweep.
    """
    X = np.asarray(data, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("data must be an (n, dim) array with n >= 2")
    if np.any(X <= 0.0) or np.any(X >= 1.0):
        raise ValueError("all vectors must lie strictly inside the simplex")
    if np.max(np.abs(X.sum(axis=1) - 1.0)) > 1e-6:
        raise ValueError("all vectors must sum to 1")
    if np.any(X.var(axis=0) == 0.0):
        raise DegenerateDataError("a coordinate is constant across the sample; the MLE is unbounded")

    # moment-matching start: total concentration from coordinate 1
    m1 = X[:, 0].mean()
    m2 = (X[:, 0] ** 2).mean()
    var1 = m2 - m1 * m1
    if var1 <= 0.0:
        raise DegenerateDataError("zero variance in coordinate 1; cannot initialize the fit")
    alpha = (m1 - m2) / var1 * X.mean(axis=0)
    alpha = np.maximum(alpha, 1e-12)

    mean_log = np.log(X).mean(axis=0)
    if on_iteration is not None:
        on_iteration(0, alpha.copy(), _mean_loglik(mean_log, alpha))

    for iteration in range(1, max_iter + 1):
        target = digamma(alpha.sum()) + mean_log
        new_alpha = _inv_digamma(target)
        delta = np.max(np.abs(new_alpha - alpha) / alpha)
        alpha = new_alpha
        if on_iteration is not None:
            on_iteration(iteration, alpha.copy(), _mean_loglik(mean_log, alpha))
        if delta < tol:
            return DirichletParams(alpha)

    raise ConvergenceError(
        f"Dirichlet fit did not converge in {max_iter} iterations", last_alpha=alpha
    )
