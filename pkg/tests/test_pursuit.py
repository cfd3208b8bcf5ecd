import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

from sompbound.exceptions import ReselectionError, SingularMatrixError
from sompbound.linalg import norm_inf_to_inf
from sompbound.model import Scenario, gen_matrix_orthonormal, make_instance
from sompbound.pursuit import (
    SOMP,
    PursuitConfig,
    residual_update,
    selection_metric,
    somp,
    write_trace_csv,
)


def omp_reference(y, phi, n_iter):
    """Textbook OMP with numpy's least squares, kept independent of the package."""
    residual = y.copy()
    chosen, residuals = [], [residual]
    for _ in range(n_iter):
        scores = np.abs(phi.T @ residual)
        chosen.append(int(np.argmax(scores)))
        coef, *_ = np.linalg.lstsq(phi[:, chosen], y, rcond=None)
        residual = y - phi[:, chosen] @ coef
        residuals.append(residual)
    return chosen, residuals


def test_config_validation():
    with pytest.raises(ValueError):
        PursuitConfig(n_iterations=0)
    with pytest.raises(ValueError):
        PursuitConfig(n_iterations=2, p=3)
    assert PursuitConfig(n_iterations=1, p="inf").p == np.inf


def test_orthonormal_exact_recovery():
    phi = gen_matrix_orthonormal(16, 10, 3)
    x = np.zeros((10, 3))
    x[[1, 4, 7]] = np.array([[3.0, -1.0, 2.0], [0.5, 2.0, -1.0], [1.0, 1.0, 1.0]])
    trace = somp(phi @ x, phi, PursuitConfig(3), true_support=(1, 4, 7))
    assert trace.final_support == (1, 4, 7)
    assert all(trace.correct_before)
    assert np.abs(trace.residuals[-1]).max() < 1e-12


@pytest.mark.parametrize("seed", range(10))
def test_k1_matches_omp_reference(seed):
    inst = make_instance(Scenario.GENERIC_RANDOM, 20, 40, 1, 4, seed)
    trace = somp(inst.y, inst.phi, PursuitConfig(4))
    chosen, residuals = omp_reference(inst.y, inst.phi, 4)
    assert trace.selected == chosen
    for mine, ref in zip(trace.residuals, residuals):
        np.testing.assert_allclose(mine, ref, atol=1e-10)


def test_monte_carlo_recovery_rate():
    hits = 0
    for seed in range(100):
        inst = make_instance(Scenario.GENERIC_RANDOM, 32, 64, 4, 5, seed)
        trace = somp(inst.y, inst.phi, PursuitConfig(5))
        hits += trace.final_support == inst.support
    assert hits >= 95


def test_trace_invariants():
    inst = make_instance(Scenario.GENERIC_RANDOM, 24, 48, 3, 6, seed=2)
    trace = somp(inst.y, inst.phi, PursuitConfig(6), true_support=inst.support)
    assert len(trace.final_support) == trace.n_iterations == 6
    norms = [np.linalg.norm(r) for r in trace.residuals]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(norms, norms[1:]))
    for t, rec in enumerate(trace.records):
        assert rec.metric_values[rec.atom] == rec.metric_values.max()
        assert rec.residual_frobenius == pytest.approx(norms[t + 1], rel=1e-15)
        # step-7 orthogonality and zero metric on selected atoms
        r = trace.residuals[t + 1]
        assert np.linalg.norm(inst.phi[:, list(rec.support_after)].T @ r) <= 1e-10
        nxt = selection_metric(r, inst.phi, 1)
        assert np.all(nxt[list(rec.support_after)] <= 1e-10)


def test_tie_break_lowest_index():
    phi = np.eye(3)
    y = np.array([[1.0], [1.0], [0.5]])
    trace = somp(y, phi, PursuitConfig(1))
    assert trace.selected == [0]


def test_reselection_raises_with_trace():
    # residual vanishes after one step, every score ties at 0, atom 0 comes back
    phi = np.column_stack([np.eye(2), np.eye(2)[:, :1]])
    y = np.array([[1.0], [0.0]])
    with pytest.raises((ReselectionError, SingularMatrixError)) as info:
        somp(y, phi, PursuitConfig(2))
    assert info.value.trace is not None
    assert info.value.trace.selected == [0]


def test_residual_update_cases(rng):
    phi = rng.standard_normal((5, 5))
    y = rng.standard_normal((5, 2))
    assert np.abs(residual_update(y, phi, range(5))).max() < 1e-12
    a = rng.standard_normal((6, 2))
    q, _ = np.linalg.qr(np.column_stack([a, rng.standard_normal((6, 1))]))
    perp = q[:, 2:3]
    np.testing.assert_allclose(residual_update(perp, a, [0, 1]), perp, atol=1e-14)
    phi = rng.standard_normal((9, 7))
    y = rng.standard_normal((9, 3))
    r = residual_update(y, phi, [0, 3, 5])
    assert np.abs(phi[:, [0, 3, 5]].T @ r).max() <= 1e-10


def test_selection_metric_cases(rng):
    phi = rng.standard_normal((6, 9))
    assert not selection_metric(np.zeros((6, 3)), phi, 1).any()
    r1 = rng.standard_normal((6, 1))
    m1, m2, mi = (selection_metric(r1, phi, p) for p in (1, 2, np.inf))
    np.testing.assert_allclose(m1, m2, rtol=1e-15)
    np.testing.assert_allclose(m1, mi, rtol=1e-15)


def test_selection_metric_matches_inf_norm_on_support(rng):
    phi = rng.standard_normal((8, 12))
    r = rng.standard_normal((8, 4))
    support = [1, 5, 6, 10]
    metric = selection_metric(r, phi, 1)
    assert abs(metric[support].max() - norm_inf_to_inf(phi[:, support].T @ r)) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.permutations(range(5)))
def test_column_permutation_invariance(seed, perm):
    inst = make_instance(Scenario.GENERIC_RANDOM, 16, 24, 5, 4, seed)
    a = somp(inst.y, inst.phi, PursuitConfig(4))
    b = somp(inst.y[:, list(perm)], inst.phi, PursuitConfig(4))
    assert a.selected == b.selected
    np.testing.assert_allclose(
        a.records[0].metric_values, b.records[0].metric_values, rtol=1e-13, atol=1e-13
    )


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_p_variants_agree_for_single_vector(seed):
    inst = make_instance(Scenario.GENERIC_RANDOM, 16, 24, 1, 4, seed)
    traces = [somp(inst.y, inst.phi, PursuitConfig(4, p=p)) for p in (1, 2, np.inf)]
    assert traces[0].selected == traces[1].selected == traces[2].selected


def test_trace_csv():
    inst = make_instance(Scenario.GENERIC_RANDOM, 24, 32, 2, 3, seed=1)
    trace = somp(inst.y, inst.phi, PursuitConfig(3), true_support=inst.support)
    buf = io.StringIO()
    write_trace_csv(trace, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "t,j_t,metric_max_correct,metric_max_incorrect,residual_frobenius,correct_so_far"
    assert len(lines) == 4
    first = lines[1].split(",")
    assert int(first[1]) == trace.selected[0]
    assert float(first[2]) == pytest.approx(trace.records[0].metric_values[list(inst.support)].max())


def test_estimator_api():
    inst = make_instance(Scenario.GENERIC_RANDOM, 32, 64, 4, 5, seed=3)
    est = SOMP(n_nonzero=5)
    assert est.get_params() == {"n_nonzero": 5, "p": 1}
    est.fit(inst.phi, inst.y)
    assert tuple(est.support_) == inst.support
    np.testing.assert_allclose(est.coef_, inst.x, atol=1e-10)
    np.testing.assert_allclose(est.predict(inst.phi), inst.y, atol=1e-10)
    assert est.score(inst.phi, inst.y) == pytest.approx(1.0)
    assert clone(est).get_params() == est.get_params()


def test_estimator_vector_target():
    inst = make_instance(Scenario.GENERIC_RANDOM, 20, 30, 1, 3, seed=8)
    est = SOMP(n_nonzero=3).fit(inst.phi, inst.y[:, 0])
    assert est.predict(inst.phi).shape == (20,)


def test_estimator_not_fitted():
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        SOMP().predict(np.eye(3))
