import math

import numpy as np
import pytest
from scipy import integrate
from scipy import special as sp

from subdiff.analytics import (AsymptoticRegime, MsdCurve, MsdKind,
                               covariance_analytic, fit_power_law,
                               gamma_msd_asymptote,
                               match_gamma_to_tempered_stable, memory_kernel,
                               msd_analytic, msd_ensemble, msd_time_avg,
                               tail_power_integral)
from subdiff.distributions import (GammaSpec, StableSpec, TemperedStableSpec,
                                   unit_time_mean)
from subdiff.errors import DomainError, FitError, GridMismatchError
from subdiff.subordination import Trajectory, simulate_ensemble

TS = TemperedStableSpec(alpha=0.6, lam=1.0, c=1.0)
ST = StableSpec(alpha=0.6)
GAM = GammaSpec(a=1.0, c=1.0)


# kernel reference values from 50-digit evaluations of the defining
# Mittag-Leffler and shape-integral forms
def test_memory_kernel_reference_values():
    assert memory_kernel(TS, 1.0) == pytest.approx(1.702687347773813, rel=1e-11)
    assert memory_kernel(TS, 0.1) == pytest.approx(2.336215156969386, rel=1e-11)
    assert memory_kernel(TS, 200.0) == pytest.approx(5.0 / 3.0, rel=1e-12)
    ts2 = TemperedStableSpec(alpha=0.4, lam=2.0, c=1.5)
    assert memory_kernel(ts2, 5.0) == pytest.approx(2.526194801442779, rel=1e-11)
    assert memory_kernel(ST, 2.0) == pytest.approx(0.5089056056122795, rel=1e-13)
    assert memory_kernel(GAM, 1.0) == pytest.approx(1.032920947575257, rel=1e-11)
    assert memory_kernel(GAM, 0.5) == pytest.approx(1.109103026363044305, rel=1e-11)
    assert memory_kernel(GammaSpec(a=2.0, c=1.5), 2.0) == pytest.approx(
        0.3443069825250857, rel=1e-11)
    with pytest.raises(DomainError):
        memory_kernel(TS, 0.0)


def test_memory_kernel_ts_beyond_series_matches_high_precision():
    # t large enough that the saturating branch is used; compare with a
    # 60-digit evaluation of the direct product form
    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 60
    alpha = mpmath.mpf(3) / 5
    z = mpmath.mpf(30) ** alpha
    e_ml = sum(z ** k / mpmath.gamma(alpha * k + alpha) for k in range(400))
    ref = float(mpmath.e ** (-30) * mpmath.mpf(30) ** (alpha - 1) * e_ml)
    assert memory_kernel(TS, 30.0) == pytest.approx(ref, rel=1e-10)


def test_msd_reference_values():
    assert msd_analytic(TS, 0.5) == pytest.approx(1.112743526583246, rel=1e-9)
    assert msd_analytic(TS, 1.0) == pytest.approx(1.979741421197111, rel=1e-9)
    assert msd_analytic(TS, 5.0) == pytest.approx(8.666591041700483, rel=1e-9)
    assert msd_analytic(ST, 2.0) == pytest.approx(
        2.0 ** 0.6 / math.gamma(1.6), rel=1e-13)
    assert msd_analytic(GAM, 50.0) == pytest.approx(50.5, rel=1e-9)
    assert msd_analytic(GAM, 30.0) == pytest.approx(30.5, rel=1e-9)
    assert msd_analytic(TS, 0.0) == 0.0
    with pytest.raises(DomainError):
        msd_analytic(TS, -1.0)


def test_msd_tempered_stable_matches_incomplete_gamma_series():
    # independent route: expanding the kernel's exponential factor gives
    # msd(t) = sum_j P(alpha j, lam t) / (c lam^alpha)
    alpha, lam, c = TS.alpha, TS.lam, TS.c
    for t in (0.3, 1.0, 3.0, 10.0, 30.0):
        total = 0.0
        for j in range(1, 5000):
            term = float(sp.gammainc(alpha * j, lam * t))
            total += term
            if term < 1e-16:
                break
        ref = total / (c * lam ** alpha)
        assert msd_analytic(TS, t) == pytest.approx(ref, rel=1e-9)


def test_msd_derivative_matches_kernel():
    for spec in (ST, TS, GammaSpec(a=1.0, c=0.6)):
        for t in (0.1, 0.3, 1.0, 3.0, 10.0):
            h = 1e-3 * t
            fd = (msd_analytic(spec, t + h) - msd_analytic(spec, t - h)) / (2 * h)
            m = memory_kernel(spec, t)
            assert fd == pytest.approx(m, rel=1e-4)


def test_tempered_stable_degenerates_to_stable_at_tiny_lambda():
    near = TemperedStableSpec(alpha=0.6, lam=1e-8, c=1.0)
    worst_k = worst_m = 0.0
    for t in np.geomspace(0.1, 10.0, 7):
        worst_k = max(worst_k, abs(memory_kernel(near, t)
                                   / memory_kernel(ST, t) - 1.0))
        worst_m = max(worst_m, abs(msd_analytic(near, t)
                                   / msd_analytic(ST, t) - 1.0))
    # the exact first tempering correction of the kernel at t=10 is
    # (lam t)^alpha Gamma(alpha)/Gamma(2 alpha) = 1.022e-4
    assert worst_k < 1.1e-4
    assert worst_m < 1e-4


def test_covariance_is_symmetric_and_uses_earlier_time():
    assert covariance_analytic(TS, 0.5, 1.0) == covariance_analytic(TS, 1.0, 0.5)
    assert covariance_analytic(TS, 0.5, 1.0) == msd_analytic(TS, 0.5)
    assert covariance_analytic(TS, 0.0, 3.0) == 0.0


def _toy_trajectory(y):
    y = np.asarray(y, dtype=float)
    t = np.arange(y.size, dtype=float)
    return Trajectory(t_grid=t, s_values=t, y_values=y, seed_info=None)


def test_msd_ensemble_hand_case_and_errors():
    trajs = [_toy_trajectory([0.0, 1.0, 2.0]), _toy_trajectory([0.0, 3.0, 4.0])]
    curve = msd_ensemble(trajs)
    assert curve.kind is MsdKind.ENSEMBLE_AVG
    assert np.allclose(curve.values, [0.0, 5.0, 10.0])
    assert curve.stderr[1] == pytest.approx(4.0)
    with pytest.raises(DomainError):
        msd_ensemble(trajs[:1])
    short = _toy_trajectory([0.0, 1.0])
    with pytest.raises(GridMismatchError):
        msd_ensemble([trajs[0], short])


def test_msd_time_avg_hand_case():
    tr = _toy_trajectory([0.0, 1.0, 0.0, 1.0, 0.0])
    curve = msd_time_avg(tr, [1.0, 2.0])
    assert curve.kind is MsdKind.TIME_AVG
    assert np.allclose(curve.t_grid, [1.0, 2.0])
    assert curve.values[0] == pytest.approx(1.0)
    assert curve.values[1] == pytest.approx(0.0)


def test_msd_time_avg_validation():
    tr = _toy_trajectory([0.0, 1.0, 0.0, 1.0, 0.0])
    with pytest.raises(DomainError):
        msd_time_avg(tr, [4.0])
    with pytest.raises(DomainError):
        msd_time_avg(tr, [0.0])
    with pytest.raises(DomainError):
        msd_time_avg(tr, [1.0, 1.2])
    bad = Trajectory(t_grid=np.array([0.0, 0.1, 0.4, 0.5]),
                     s_values=np.zeros(4), y_values=np.zeros(4),
                     seed_info=None)
    with pytest.raises(GridMismatchError):
        msd_time_avg(bad, [0.2])


def test_fit_power_law_recovers_exact_exponent():
    t = np.geomspace(0.1, 10.0, 30)
    curve = MsdCurve(t_grid=t, values=2.5 * t ** 0.73,
                     kind=MsdKind.ANALYTIC, meta=0.0)
    fit = fit_power_law(curve, 0.1, 10.0)
    assert fit.exponent == pytest.approx(0.73, abs=1e-10)
    assert fit.log_prefactor == pytest.approx(math.log(2.5), abs=1e-10)
    assert fit.rms_residual < 1e-12


def test_fit_power_law_validation():
    t = np.geomspace(0.1, 10.0, 30)
    curve = MsdCurve(t_grid=t, values=t, kind=MsdKind.ANALYTIC, meta=0.0)
    with pytest.raises(DomainError):
        fit_power_law(curve, 5.0, 1.0)
    with pytest.raises(FitError):
        fit_power_law(curve, 9.0, 10.0)
    flat = MsdCurve(t_grid=t, values=np.zeros_like(t),
                    kind=MsdKind.TIME_AVG, meta=0.0)
    with pytest.raises(FitError):
        fit_power_law(flat, 0.1, 10.0)


def test_ensemble_msd_matches_analytic_all_families():
    grid = np.concatenate(([0.0], np.geomspace(0.05, 5.0, 9)))
    for spec in (ST, TS, GammaSpec(a=1.0, c=0.6)):
        trajs = simulate_ensemble(spec, grid, 1e-3, 1000, 555, workers=3)
        curve = msd_ensemble(trajs)
        ref = np.array([msd_analytic(spec, float(t)) for t in grid])
        dev = np.abs(curve.values[1:] - ref[1:]) / curve.stderr[1:]
        assert float(dev.max()) < 4.0


def test_gamma_msd_asymptote_values_and_domain():
    small = gamma_msd_asymptote(1.0, 1.0, 0.01, AsymptoticRegime.SMALL_T)
    assert small == pytest.approx(-math.exp(-0.01) / math.log(0.01), rel=1e-14)
    assert gamma_msd_asymptote(2.0, 1.5, 30.0, AsymptoticRegime.LARGE_T) \
        == pytest.approx(10.0, rel=1e-14)
    with pytest.raises(DomainError):
        gamma_msd_asymptote(1.0, 1.0, 2.0, AsymptoticRegime.SMALL_T)
    with pytest.raises(DomainError):
        gamma_msd_asymptote(-1.0, 1.0, 0.5, AsymptoticRegime.LARGE_T)


# reference values from a 50-digit evaluation of the recursion
TAIL_INTEGRAL_ANCHORS = {
    (0.1, 1): 0.06229061789148658,
    (0.1, 2): 0.09753439143955837,
    (0.1, 3): 0.1705053921843011,
    (0.1, 4): 0.3396276520318924,
    (0.3, 1): 0.4561357711333238,
    (0.3, 2): 1.006892795178507,
    (0.3, 3): 2.758100825537050,
    (0.3, 4): 9.412507709003306,
    (0.5, 1): 1.762032010947286,
    (0.5, 2): 5.805497208606995,
    (0.5, 3): 25.84803361870058,
    (0.5, 4): 149.8846671941666,
}


def test_tail_power_integral_reference_values():
    for (u, k), expected in TAIL_INTEGRAL_ANCHORS.items():
        assert tail_power_integral(u, k) == pytest.approx(expected, rel=1e-12)
    assert tail_power_integral(0.5, 0) == pytest.approx(
        0.5 / math.log(2.0), rel=1e-14)


def test_tail_power_integral_matches_quadrature():
    u, k = 0.3, 3
    ref, _ = integrate.quad(lambda tau: u ** tau * tau ** k, 1.0, np.inf,
                            epsabs=0.0, epsrel=1e-12)
    assert tail_power_integral(u, k) == pytest.approx(ref, rel=1e-10)


def test_tail_power_integral_validation():
    with pytest.raises(DomainError):
        tail_power_integral(1.0, 1)
    with pytest.raises(DomainError):
        tail_power_integral(0.0, 1)
    with pytest.raises(DomainError):
        tail_power_integral(0.5, -1)
    with pytest.raises(DomainError):
        tail_power_integral(0.5, 1.5)


def test_match_gamma_preserves_unit_time_mean():
    matched = match_gamma_to_tempered_stable(0.6, 1.0, 1.0, 1.0)
    assert matched == GammaSpec(a=1.0, c=0.6)
    ts = TemperedStableSpec(alpha=0.7, lam=2.0, c=1.3)
    matched = match_gamma_to_tempered_stable(0.7, 2.0, 1.3, 0.25)
    assert unit_time_mean(matched) == pytest.approx(unit_time_mean(ts), rel=1e-14)


def test_msd_curve_validation():
    t = np.array([0.0, 1.0, 2.0])
    with pytest.raises(DomainError):
        MsdCurve(t_grid=t, values=np.array([0.0, -1.0, 2.0]),
                 kind=MsdKind.ENSEMBLE_AVG, meta=2.0)
    with pytest.raises(DomainError):
        MsdCurve(t_grid=t, values=np.array([0.0, 2.0, 1.0]),
                 kind=MsdKind.ANALYTIC, meta=0.0)
    with pytest.raises(DomainError):
        MsdCurve(t_grid=t, values=np.array([0.0, 1.0]),
                 kind=MsdKind.ANALYTIC, meta=0.0)
