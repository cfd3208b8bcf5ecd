"""Acceptance gate: one test per primary criterion, each logging a PASS/FAIL line.

The lines are collected in ``conftest.ACCEPTANCE_LINES`` and printed in the
terminal summary of every pytest run that includes this module.
"""
import itertools
import math
import time

import numpy as np
import pytest

from sompbound.bounds import lemma1_bound
from sompbound.experiments import ExperimentSpec, figure1_grid, run_case, soundness_campaign
from sompbound.linalg import norm_2_to_2, norm_frobenius, norm_inf_to_inf
from sompbound.model import Scenario, gen_matrix_gaussian, gen_matrix_orthonormal, make_instance
from sompbound.pursuit import PursuitConfig, somp
from sompbound.rip import ric_exact

from conftest import ACCEPTANCE_LINES


def record(name, ok, detail):
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    assert ok, detail


def test_soundness_campaign():
    start = time.perf_counter()
    s = soundness_campaign(ExperimentSpec("soundness", m=32, n=64, K=(1, 4, 16), s=5, trials=1000)).summary
    elapsed = time.perf_counter() - start
    ok = not s.violations and s.n_rip_ok >= 1000 and elapsed <= 300
    record(
        "soundness", ok,
        f"{s.n_rip_ok}/{s.n_trials} instances with delta < 1, {s.n_reports} iterations, "
        f"{len(s.violations)} violations, min slack thm1 {s.min_slack_thm1:.3e}, "
        f"thm2 {s.min_slack_thm2:.3e}, {elapsed:.1f} s",
    )


def test_remark1_sharpness():
    result = run_case(ExperimentSpec("case4", m=64, n=64, K=(1, 4, 16), s=5, trials=100, seed=1))
    gaps = [r.remark1_gap for r in result.rows]
    worst = max(gaps)
    instances = {(r.K, r.seed) for r in result.rows}
    ok = len(instances) >= 100 and worst <= 1e-8 and result.summary.passed
    record("remark1 sharpness", ok, f"{len(instances)} instances, {len(gaps)} iterations, max gap {worst:.3e}")


def _ric_oracle(phi, s_max):
    out, best = [], 0.0
    for s in range(1, s_max + 1):
        for t in itertools.combinations(range(phi.shape[1]), s):
            cols = phi[:, t]
            best = max(best, norm_2_to_2(cols.T @ cols - np.eye(s)))
        out.append(best)
    return np.array(out)


def test_ric_oracle_equivalence():
    s_max = 4
    worst = 0.0
    for seed in range(20):
        phi = gen_matrix_gaussian(8, 12, 1000 + seed)
        worst = max(worst, float(np.max(np.abs(np.array(ric_exact(phi, s_max).deltas) - _ric_oracle(phi, s_max)))))
    q = gen_matrix_orthonormal(6, 4, 0)
    planted = q.copy()
    planted[:, 1] = 0.3 * q[:, 0] + math.sqrt(1 - 0.09) * q[:, 1]
    d2 = ric_exact(planted, 2).delta(2)
    ok = worst <= 1e-12 and abs(d2 - 0.3) <= 1e-12
    record("ric oracle", ok, f"20 matrices 8x12, orders 1..{s_max}, max diff {worst:.3e}; planted delta_2 = {d2!r}")


def test_figure1_reproduction():
    res = figure1_grid()
    max_rel = max(abs(r - rc) / max(1.0, rc) for _, _, _, r, rc in res.rows)
    crossings_ok = all(
        res.crossing[key] == res.crossing_closed_form[key]
        and res.crossing_closed_form[key] >= ((1 + math.sqrt(key[0]) * key[1]) / (1 + key[1])) ** 2 - 1e-12
        and res.crossing_closed_form[key] - 1 < ((1 + math.sqrt(key[0]) * key[1]) / (1 + key[1])) ** 2
        for key in res.crossing
    )
    table = {(K, jt, d): r for K, jt, d, r, _ in res.rows}
    jts = sorted({jt for _, jt, _ in table})
    monotone = all(
        table.get((K + 1, jt, d), math.inf) > r
        and all(table[(K, j2, d)] < r for j2 in jts if j2 > jt)
        for (K, jt, d), r in table.items()
    )
    ok = max_rel <= 1e-14 and crossings_ok and monotone
    record(
        "figure1", ok,
        f"{len(res.rows)} grid points, max deviation {max_rel:.3e}, crossings match={crossings_ok}, "
        f"monotone={monotone}",
    )


def test_case_verdicts():
    c1 = run_case(ExperimentSpec("case1", trials=100))
    c2 = run_case(ExperimentSpec("case2", K=(1,), trials=100))
    c3 = run_case(ExperimentSpec("case3", trials=100))
    parts, ok = [], True
    for name, res in (("case1", c1), ("case2 K=1", c2), ("case3", c3)):
        judged = [r for r in res.rows if r.verdict is not None]
        good = sum(r.verdict for r in judged)
        ok = ok and judged and good == len(judged) and not res.summary.violations
        parts.append(f"{name} {good}/{len(judged)}")
    eq = [r for r in c3.rows if r.verdict is not None and r.pattern == Scenario.IDENTICAL_MAGNITUDES.value]
    sqrt_k = max(abs(r.report.ratio_r - math.sqrt(r.K)) for r in eq)
    ok = ok and sqrt_k <= 1e-12
    record("case verdicts", bool(ok), ", ".join(parts) + f"; max |r - sqrt K| {sqrt_k:.3e}")


def test_lemma1_property():
    rng = np.random.default_rng(7)
    violations = 0
    worst = -math.inf
    for _ in range(10_000):
        d = int(rng.integers(1, 11))
        a = rng.standard_normal((d, d)) * 10.0 ** rng.uniform(-3, 3)
        a = 0.5 * (a + a.T)
        alpha = float(rng.normal(scale=5))
        lhs = norm_inf_to_inf(a)
        rhs = lemma1_bound(a, alpha)
        # cross-check the package eigenvalues with LAPACK's
        lam = np.linalg.eigvalsh(a)
        rhs_lapack = abs(alpha) + math.sqrt(d) * float(np.max(np.abs(lam - alpha)))
        assert rhs == pytest.approx(rhs_lapack, rel=1e-10)
        worst = max(worst, (lhs - rhs) / max(1.0, rhs))
        violations += lhs > rhs * (1 + 1e-12)
    record("lemma1", violations == 0, f"10000 matrices, {violations} violations, max (lhs-rhs)/rhs {worst:.3e}")


def _omp_reference(y, phi, n_iter):
    residual, chosen, residuals = y.copy(), [], [y.copy()]
    for _ in range(n_iter):
        chosen.append(int(np.argmax(np.abs(phi.T @ residual))))
        coef, *_ = np.linalg.lstsq(phi[:, chosen], y, rcond=None)
        residual = y - phi[:, chosen] @ coef
        residuals.append(residual)
    return chosen, residuals


def test_algorithm_fidelity():
    mismatches, worst_res, worst_orth = 0, 0.0, 0.0
    for seed in range(100):
        inst = make_instance(Scenario.GENERIC_RANDOM, 32, 64, 1, 5, seed)
        trace = somp(inst.y, inst.phi, PursuitConfig(5))
        chosen, residuals = _omp_reference(inst.y, inst.phi, 5)
        mismatches += trace.selected != chosen
        worst_res = max(worst_res, max(float(np.max(np.abs(a - b))) for a, b in zip(trace.residuals, residuals)))
        for K in (1, 4, 16):
            inst_k = inst if K == 1 else make_instance(Scenario.GENERIC_RANDOM, 32, 64, K, 5, seed)
            tr = trace if K == 1 else somp(inst_k.y, inst_k.phi, PursuitConfig(5))
            for t in range(1, tr.n_iterations + 1):
                cols = inst_k.phi[:, list(tr.support_at(t))]
                worst_orth = max(worst_orth, norm_frobenius(cols.T @ tr.residuals[t]))
    ok = mismatches == 0 and worst_res <= 1e-10 and worst_orth <= 1e-10
    record(
        "algorithm fidelity", ok,
        f"100 seeds, {mismatches} selection mismatches, max residual diff {worst_res:.3e}, "
        f"max ||Phi_St^T R_t||_F {worst_orth:.3e}",
    )
