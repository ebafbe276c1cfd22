"""Non-linear decorrelation of neutral vectors.

A vector on the open simplex is mapped, level by level, to ratios of
adjacent pair sums. For Dirichlet-distributed input the resulting scalars
are mutually independent, each following a beta distribution whose
parameters mirror the same pairing recursion applied to the concentration
vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dirstat import BetaParams, DirichletParams
from .errors import DegenerateDataError

__all__ = [
    "BetaParamVector",
    "pnt_forward",
    "pnt_forward_batch",
    "pnt_inverse",
    "beta_params_from_dirichlet",
    "sample_correlation_matrix",
]


@dataclass(frozen=True)
class BetaParamVector:
    """Per-coordinate beta shape parameters of a transformed vector."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if a.ndim != 1 or a.shape != b.shape:
            raise ValueError("a and b must be vectors of equal length")
        if np.any(a <= 0.0) or np.any(b <= 0.0):
            raise ValueError("beta parameters must be positive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def __len__(self) -> int:
        return self.a.size

    def marginal(self, k: int) -> BetaParams:
        """Shape parameters of coordinate ``k`` (0-based)."""
        return BetaParams(float(self.a[k]), float(self.b[k]))


def _validate_simplex(x: np.ndarray):
    if x.ndim != 1 or x.size < 2:
        raise ValueError("input must be a vector of length >= 2")
    if np.any(x <= 0.0):
        raise ValueError("every coordinate must be strictly positive")
    if abs(x.sum() - 1.0) > 1e-6:
        raise ValueError("input must sum to 1")


def pnt_forward(x, trace=None) -> np.ndarray:
    """Map a simplex vector of length K+1 to K ratio coordinates.

    While more than two coordinates remain, adjacent coordinates are paired
    left-to-right (a level with an even number of degrees of freedom leaves
    the trailing coordinates unpaired and carries them forward), each pair
    emits u = left / (left + right), and the pair sums replace the pair.
    When two coordinates remain the first is emitted as the final u.

    Parameters
    ----------
    x : array-like
        Point strictly inside the simplex, length >= 2.
    trace : list, optional
        If given, receives one (level, state_length, n_pairs) tuple per
        recursion level, terminal level included with n_pairs = 0.

    Returns
    -------
    ndarray
        The K transformed coordinates, each in (0, 1).
    """
    state = np.asarray(x, dtype=float).copy()
    _validate_simplex(state)
    out = []
    level = 0
    while state.size > 2:
        npairs = (state.size - 1) // 2
        if trace is not None:
            trace.append((level, state.size, npairs))
        left = state[0 : 2 * npairs : 2]
        right = state[1 : 2 * npairs : 2]
        sums = left + right
        out.extend(left / sums)
        state = np.concatenate([sums, state[2 * npairs :]])
        level += 1
    if trace is not None:
        trace.append((level, 2, 0))
    out.append(state[0])
    return np.asarray(out)


def pnt_forward_batch(X) -> np.ndarray:
    """Row-wise pnt_forward for an (n, K+1) matrix of simplex points.

    Equivalent to stacking pnt_forward over rows but vectorized, which
    matters when decorrelating 1e5 samples at once.
    """
    state = np.asarray(X, dtype=float)
    if state.ndim != 2 or state.shape[1] < 2:
        raise ValueError("X must be an (n, d) matrix with d >= 2")
    if np.any(state <= 0.0):
        raise ValueError("every coordinate must be strictly positive")
    if np.max(np.abs(state.sum(axis=1) - 1.0)) > 1e-6:
        raise ValueError("every row must sum to 1")
    cols = []
    state = state.copy()
    while state.shape[1] > 2:
        npairs = (state.shape[1] - 1) // 2
        left = state[:, 0 : 2 * npairs : 2]
        right = state[:, 1 : 2 * npairs : 2]
        sums = left + right
        cols.append(left / sums)
        state = np.hstack([sums, state[:, 2 * npairs :]])
    cols.append(state[:, :1])
    return np.hstack(cols)


def _level_plan(n: int) -> list[int]:
    """Pair counts per recursion level for an input of length n."""
    plan = []
    m = n
    while m > 2:
        npairs = (m - 1) // 2
        plan.append(npairs)
        m -= npairs
    return plan


def pnt_inverse(u) -> np.ndarray:
    """Reconstruct the simplex vector whose pnt_forward equals ``u``.

    Walks the pairing levels in reverse, splitting each pair sum by its
    stored ratio. The result is renormalized to sum exactly 1 to cancel
    accumulated rounding.
    """
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.size < 1:
        raise ValueError("u must be a vector of length >= 1")
    if np.any(u <= 0.0) or np.any(u >= 1.0):
        raise ValueError("every coordinate must lie strictly inside (0, 1)")
    n = u.size + 1
    plan = _level_plan(n)
    offsets = np.concatenate([[0], np.cumsum(plan)]).astype(int)
    state = [u[-1], 1.0 - u[-1]]
    for t in range(len(plan) - 1, -1, -1):
        ratios = u[offsets[t] : offsets[t + 1]]
        rebuilt = []
        for l, r in enumerate(ratios):
            s = state[l]
            rebuilt.append(r * s)
            rebuilt.append((1.0 - r) * s)
        rebuilt.extend(state[len(ratios) :])
        state = rebuilt
    x = np.asarray(state)
    return x / x.sum()


def beta_params_from_dirichlet(p: DirichletParams, trace=None) -> BetaParamVector:
    """Beta shape parameters of each transformed coordinate of Dir(alpha).

    Runs the same pairing recursion as pnt_forward on the concentration
    vector: each pair emits (a, b) = (left, right) and is replaced by its
    sum; the terminal two-element state emits its own (first, second).
    Output index k gives the marginal Beta(a_k, b_k) of u_k.
    """
    state = p.alpha.copy()
    a_out = []
    b_out = []
    level = 0
    while state.size > 2:
        npairs = (state.size - 1) // 2
        if trace is not None:
            trace.append((level, state.size, npairs))
        for l in range(npairs):
            a_out.append(state[2 * l])
            b_out.append(state[2 * l + 1])
        merged = [state[2 * l] + state[2 * l + 1] for l in range(npairs)]
        state = np.concatenate([merged, state[2 * npairs :]])
        level += 1
    if trace is not None:
        trace.append((level, 2, 0))
    a_out.append(state[0])
    b_out.append(state[1])
    return BetaParamVector(np.asarray(a_out), np.asarray(b_out))


def sample_correlation_matrix(data) -> np.ndarray:
    """Pearson correlation matrix of an (n, d) sample, rows as observations."""
    X = np.asarray(data, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("data must be an (n, d) matrix with n >= 2")
    var = X.var(axis=0)
    if np.any(var == 0.0):
        bad = int(np.flatnonzero(var == 0.0)[0])
        raise DegenerateDataError(f"coordinate {bad} has zero variance")
    C = np.corrcoef(X, rowvar=False)
    C = 0.5 * (C + C.T)
    np.fill_diagonal(C, 1.0)
    return C
