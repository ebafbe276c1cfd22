"""Tests for the pairing transform, its inverse, the induced beta
marginals, and the correlation diagnostics."""

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from mvbeta.dirstat import DirichletParams, dirichlet_sample
from mvbeta.errors import DegenerateDataError
from mvbeta.neutral import (
    BetaParamVector,
    beta_params_from_dirichlet,
    pnt_forward,
    pnt_forward_batch,
    pnt_inverse,
    sample_correlation_matrix,
)

# ---------------------------------------------------------------------------
# forward transform


def test_forward_five_coordinates():
    u = pnt_forward(np.array([0.1, 0.2, 0.3, 0.25, 0.15]))
    assert np.allclose(u, [1.0 / 3.0, 6.0 / 11.0, 6.0 / 17.0, 0.85], atol=1e-15)


def test_forward_uniform_four():
    # 4 coordinates give an odd degree-of-freedom count at level one, so only
    # the first pair merges and the trailing two carry forward
    u = pnt_forward(np.array([0.25, 0.25, 0.25, 0.25]))
    assert np.allclose(u, [0.5, 2.0 / 3.0, 0.75], atol=1e-15)


def test_forward_length_two():
    assert np.allclose(pnt_forward(np.array([0.5, 0.5])), [0.5])
    assert np.allclose(pnt_forward(np.array([0.3, 0.7])), [0.3])


def test_forward_length_three():
    u = pnt_forward(np.array([0.2, 0.3, 0.5]))
    assert np.allclose(u, [0.4, 0.5], atol=1e-15)


@pytest.mark.parametrize("n", range(2, 13))
def test_forward_output_dimension(n):
    x = np.full(n, 1.0 / n)
    assert pnt_forward(x).size == n - 1


def test_forward_output_range():
    rng = np.random.default_rng(8)
    for _ in range(50):
        x = rng.dirichlet(np.full(6, 0.7))
        x = np.maximum(x, 1e-9)
        x /= x.sum()
        u = pnt_forward(x)
        assert np.all((u > 0.0) & (u < 1.0))


def test_forward_validation():
    with pytest.raises(ValueError):
        pnt_forward(np.array([1.0]))
    with pytest.raises(ValueError):
        pnt_forward(np.array([0.5, 0.5, 0.0]))
    with pytest.raises(ValueError):
        pnt_forward(np.array([0.6, -0.1, 0.5]))
    with pytest.raises(ValueError):
        pnt_forward(np.array([0.4, 0.4]))  # sums to 0.8


# ---------------------------------------------------------------------------
# inverse and round trip


def test_inverse_of_worked_trace():
    x = pnt_inverse(np.array([1.0 / 3.0, 6.0 / 11.0, 6.0 / 17.0, 0.85]))
    assert np.allclose(x, [0.1, 0.2, 0.3, 0.25, 0.15], atol=1e-12)


def test_inverse_length_one():
    assert np.allclose(pnt_inverse(np.array([0.5])), [0.5, 0.5])
    assert np.allclose(pnt_inverse(np.array([0.3])), [0.3, 0.7])


def test_inverse_validation():
    with pytest.raises(ValueError):
        pnt_inverse(np.array([]))
    with pytest.raises(ValueError):
        pnt_inverse(np.array([0.5, 1.0]))
    with pytest.raises(ValueError):
        pnt_inverse(np.array([0.0, 0.5]))


@st.composite
def simplex_points(draw):
    n = draw(st.integers(min_value=2, max_value=12))
    raw = draw(
        st.lists(
            st.floats(min_value=1e-3, max_value=1.0),
            min_size=n,
            max_size=n,
        )
    )
    x = np.asarray(raw)
    return x / x.sum()


@given(simplex_points())
@settings(max_examples=300)
def test_round_trip_property(x):
    u = pnt_forward(x)
    assert u.size == x.size - 1
    assert np.max(np.abs(pnt_inverse(u) - x)) < 1e-12


def test_round_trip_random_sweep():
    # dense deterministic sweep over lengths 2..12
    rng = np.random.default_rng(4711)
    worst = 0.0
    for n in range(2, 13):
        for _ in range(100):
            x = rng.dirichlet(np.full(n, 1.2))
            x = np.maximum(x, 1e-12)
            x /= x.sum()
            worst = max(worst, float(np.max(np.abs(pnt_inverse(pnt_forward(x)) - x))))
    assert worst < 1e-12


def test_inverse_output_sums_to_one_exactly():
    x = pnt_inverse(np.array([0.123, 0.456, 0.789]))
    assert x.sum() == pytest.approx(1.0, abs=1e-15)


# ---------------------------------------------------------------------------
# batch helper


def test_batch_matches_scalar():
    X = dirichlet_sample(DirichletParams([2, 5, 6, 3, 7]), 500, seed=0)
    U = pnt_forward_batch(X)
    U_ref = np.array([pnt_forward(row) for row in X])
    assert np.array_equal(U, U_ref)


@pytest.mark.parametrize("d", [2, 3, 4, 7, 11])
def test_batch_shapes(d):
    X = dirichlet_sample(DirichletParams(np.full(d, 2.0)), 64, seed=d)
    assert pnt_forward_batch(X).shape == (64, d - 1)


def test_batch_validation():
    with pytest.raises(ValueError):
        pnt_forward_batch(np.array([[0.5, 0.5, 0.1]]))  # bad row sum
    with pytest.raises(ValueError):
        pnt_forward_batch(np.array([0.5, 0.5]))  # not 2-d


# ---------------------------------------------------------------------------
# induced beta parameters


def test_beta_params_reference_vector():
    bp = beta_params_from_dirichlet(DirichletParams([2, 5, 6, 3, 7]))
    assert np.array_equal(bp.a, [2.0, 6.0, 7.0, 16.0])
    assert np.array_equal(bp.b, [5.0, 3.0, 9.0, 7.0])


def test_beta_params_pair():
    bp = beta_params_from_dirichlet(DirichletParams([1, 1]))
    assert np.array_equal(bp.a, [1.0])
    assert np.array_equal(bp.b, [1.0])


def test_beta_params_symmetric_four():
    bp = beta_params_from_dirichlet(DirichletParams([1, 1, 1, 1]))
    assert np.array_equal(bp.a, [1.0, 2.0, 3.0])
    assert np.array_equal(bp.b, [1.0, 1.0, 1.0])


def test_beta_param_vector_helpers():
    bp = beta_params_from_dirichlet(DirichletParams([2, 5, 6]))
    assert len(bp) == 2
    m = bp.marginal(1)
    assert (m.a, m.b) == (7.0, 6.0)
    with pytest.raises(ValueError):
        BetaParamVector(np.array([1.0, 2.0]), np.array([1.0]))
    with pytest.raises(ValueError):
        BetaParamVector(np.array([1.0, -2.0]), np.array([1.0, 1.0]))


@pytest.mark.parametrize("n", range(2, 13))
def test_structural_alignment(n):
    # the parameter recursion must walk the exact same pairing tree as the
    # data transform; both record (level, state_length, n_pairs) tuples
    rng = np.random.default_rng(n)
    x = rng.dirichlet(np.full(n, 2.0))
    x = np.maximum(x, 1e-9)
    x /= x.sum()
    t_data, t_params = [], []
    pnt_forward(x, trace=t_data)
    beta_params_from_dirichlet(DirichletParams(np.full(n, 2.0)), trace=t_params)
    assert t_data == t_params


def test_transformed_coordinates_match_beta_marginals():
    # KS test of each transformed coordinate against its derived marginal
    p = DirichletParams([2, 5, 6, 3, 7])
    bp = beta_params_from_dirichlet(p)
    U = pnt_forward_batch(dirichlet_sample(p, 20000, seed=300))
    for k in range(4):
        pv = scipy.stats.kstest(U[:, k], scipy.stats.beta(bp.a[k], bp.b[k]).cdf).pvalue
        assert pv > 0.01, f"coordinate {k} failed KS test (p={pv:.4g})"


# ---------------------------------------------------------------------------
# correlation diagnostics


def test_correlation_matrix_basic_shape():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((10000, 4))
    C = sample_correlation_matrix(X)
    assert C.shape == (4, 4)
    assert np.array_equal(C, C.T)
    assert np.array_equal(np.diag(C), np.ones(4))
    off = C[~np.eye(4, dtype=bool)]
    assert np.max(np.abs(off)) < 3.0 / np.sqrt(10000)


def test_correlation_of_raw_dirichlet_matches_analytic():
    # corr(x_i, x_j) = -sqrt(a_i a_j / ((a0 - a_i)(a0 - a_j)))
    alpha = np.array([2.0, 5.0, 6.0, 3.0, 7.0])
    a0 = alpha.sum()
    X = dirichlet_sample(DirichletParams(alpha), 100000, seed=123)
    C = sample_correlation_matrix(X)
    expected12 = -np.sqrt(alpha[0] * alpha[1] / ((a0 - alpha[0]) * (a0 - alpha[1])))
    assert expected12 == pytest.approx(-0.1627, abs=5e-4)
    assert C[0, 1] == pytest.approx(expected12, abs=0.02)


def test_correlation_vanishes_after_transform():
    X = dirichlet_sample(DirichletParams([2, 5, 6, 3, 7]), 100000, seed=123)
    C = sample_correlation_matrix(pnt_forward_batch(X))
    off = C[~np.eye(4, dtype=bool)]
    assert np.max(np.abs(off)) < 0.02


def test_correlation_degenerate_input():
    X = np.ones((50, 3))
    X[:, 0] = np.linspace(0.1, 0.9, 50)
    with pytest.raises(DegenerateDataError):
        sample_correlation_matrix(X)


def test_correlation_validation():
    with pytest.raises(ValueError):
        sample_correlation_matrix(np.array([[1.0, 2.0]]))
