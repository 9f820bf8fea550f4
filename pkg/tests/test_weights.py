"""Tests for the eigenvector and row-geometric-mean weighting methods."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcmaudit import (
    ConvergenceError,
    ValidationError,
    WeightVector,
    build_matrix,
    consistent_from_weights,
    eigenvector_method,
    is_consistent,
    row_geometric_mean,
)

from conftest import (
    KINKED_RATIO_BASE,
    KINKED_RATIO_FACTOR_101,
    random_upper,
)


def test_2x2_closed_form():
    # every 2x2 reciprocal matrix is consistent: lambda = 2, w = (a, 1)/(a + 1)
    result = eigenvector_method(build_matrix(2, [2.0]))
    assert result.lambda_max == pytest.approx(2.0, abs=1e-12)
    assert result.weights.values == pytest.approx([2 / 3, 1 / 3], abs=1e-12)


def test_kinked_ratio_reference_values(kinked_matrix, kinked_matrix_at):
    base = eigenvector_method(kinked_matrix)
    assert base.weights.ratio(1, 4) == pytest.approx(KINKED_RATIO_BASE, rel=1e-9)
    stepped = eigenvector_method(kinked_matrix_at(1.01))
    assert stepped.weights.ratio(1, 4) == pytest.approx(KINKED_RATIO_FACTOR_101, rel=1e-9)


def test_eigen_result_contract(kinked_matrix):
    result = eigenvector_method(kinked_matrix, tol=1e-13)
    assert result.lambda_max >= kinked_matrix.n
    assert result.residual <= 1e-13
    assert result.iterations >= 1
    assert np.all(result.weights.values > 0)
    assert result.weights.values.sum() == pytest.approx(1.0, abs=1e-12)


def test_nonconvergence_raises_with_iterate(kinked_matrix):
    with pytest.raises(ConvergenceError) as info:
        eigenvector_method(kinked_matrix, max_iter=2)
    err = info.value
    assert err.iterations == 2
    assert err.residual > 0
    assert err.last_weights.shape == (4,)


def test_rejects_bad_eigen_parameters(kinked_matrix):
    with pytest.raises(ValidationError):
        eigenvector_method(kinked_matrix, tol=0.0)
    with pytest.raises(ValidationError):
        eigenvector_method(kinked_matrix, max_iter=0)


def test_rgm_recovers_weights_of_consistent_matrix(rng):
    w = rng.uniform(0.05, 5.0, size=6)
    w /= w.sum()
    got = row_geometric_mean(consistent_from_weights(w))
    assert got.values == pytest.approx(w, abs=1e-12)


def test_em_recovers_weights_of_consistent_matrix(rng):
    w = rng.uniform(0.05, 5.0, size=6)
    w /= w.sum()
    result = eigenvector_method(consistent_from_weights(w))
    assert result.lambda_max == pytest.approx(6.0, abs=1e-9)
    assert result.weights.values == pytest.approx(w, rel=1e-10)


def test_rgm_matches_extended_precision_row_products(kinked_matrix):
    # independent oracle: geometric means evaluated at 50 digits
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 50
    rows = [
        [1, 8, 1, 5],
        [mp.mpf(1) / 8, 1, 3, 7],
        [1, mp.mpf(1) / 3, 1, 9],
        [mp.mpf(1) / 5, mp.mpf(1) / 7, mp.mpf(1) / 9, 1],
    ]
    gm = [mp.power(mp.fprod(row), mp.mpf(1) / 4) for row in rows]
    total = mp.fsum(gm)
    expected = [float(g / total) for g in gm]
    got = row_geometric_mean(kinked_matrix)
    assert got.values == pytest.approx(expected, rel=1e-14)


@settings(max_examples=150, deadline=None)
@given(st.lists(st.floats(min_value=1 / 9, max_value=9.0), min_size=3, max_size=3))
def test_em_equals_rgm_for_3x3(upper):
    m = build_matrix(3, upper)
    em = eigenvector_method(m).weights.values
    rgm = row_geometric_mean(m).values
    assert np.max(np.abs(em - rgm)) < 1e-9


def test_lambda_floor_and_consistency_link(rng):
    for n in (3, 5, 7):
        m = build_matrix(n, random_upper(rng, n))
        lam = eigenvector_method(m).lambda_max
        assert lam >= n - 1e-12
        assert (lam - n <= 1e-9) == is_consistent(m, 1e-9)
    m = consistent_from_weights(rng.uniform(0.1, 2.0, size=5))
    assert eigenvector_method(m).lambda_max - 5 <= 1e-9
    assert is_consistent(m, 1e-9)


def test_permutation_equivariance(rng):
    m = build_matrix(5, random_upper(rng, 5))
    sigma = rng.permutation(5)
    permuted = build_matrix(5, m.entries[np.ix_(sigma, sigma)][np.triu_indices(5, 1)])
    em, em_p = eigenvector_method(m), eigenvector_method(permuted)
    assert em_p.weights.values == pytest.approx(em.weights.values[sigma], rel=1e-11)
    assert em_p.lambda_max == pytest.approx(em.lambda_max, rel=1e-12)
    rgm, rgm_p = row_geometric_mean(m), row_geometric_mean(permuted)
    assert rgm_p.values == pytest.approx(rgm.values[sigma], rel=1e-13)


def test_rgm_ratios_increase_with_raised_entry(rng):
    # raising a[i, j] must strictly raise every ratio w_i / w_k, k != i
    from pcmaudit import PerturbationSpec, perturb

    for _ in range(100):
        n = int(rng.integers(4, 8))
        m = build_matrix(n, random_upper(rng, n))
        i = int(rng.integers(1, n))
        j = int(rng.integers(i + 1, n + 1))
        factor = float(rng.uniform(1.0001, 2.0))
        w0 = row_geometric_mean(m)
        w1 = row_geometric_mean(perturb(m, PerturbationSpec(i, j, factor)))
        for k in range(1, n + 1):
            if k != i:
                assert w1.ratio(i, k) > w0.ratio(i, k)


def test_weight_vector_validation():
    with pytest.raises(ValidationError):
        WeightVector(np.array([0.5, 0.6]))
    with pytest.raises(ValidationError):
        WeightVector(np.array([1.2, -0.2]))
    wv = WeightVector(np.array([0.25, 0.75]))
    assert wv.ratio(2, 1) == 3.0
