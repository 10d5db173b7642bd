"""Analytic formulas and statistical estimators for the subordinated motion.

Covers the memory kernel and mean squared displacement of each subordinator
family, the covariance, ensemble- and time-averaged MSD estimators,
log-log power-law fitting, the gamma-family asymptotic forms, and the
recursion for the exponential-tail integrals used by those asymptotics.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .distributions import (GammaSpec, StableSpec, SubordinatorSpec,
                            TemperedStableSpec)
from .errors import (ConvergenceError, DomainError, FitError,
                     GridMismatchError)
from .special import (ML_DEFAULT_ATOL, ML_MAX_TERMS, ML_Z_SERIES_MAX,
                      _kernel_quadrature, _series_scan, gamma_fn,
                      mittag_leffler)
from .subordination import Trajectory


class MsdKind(enum.Enum):
    ENSEMBLE_AVG = "ensemble_avg"
    TIME_AVG = "time_avg"
    ANALYTIC = "analytic"


@dataclass(frozen=True, eq=False)
class MsdCurve:
    """Mean squared displacement samples on a time grid.

    meta carries the ensemble size for ensemble averages or the trajectory
    length for time averages; stderr is present only for ensemble curves.
    """

    t_grid: np.ndarray
    values: np.ndarray
    kind: MsdKind
    meta: float
    stderr: np.ndarray | None = None

    def __post_init__(self):
        t = np.asarray(self.t_grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or v.shape != t.shape:
            raise DomainError("t_grid and values must be 1-d arrays of equal length")
        if not np.all(np.isfinite(v)) or np.any(v < 0.0):
            raise DomainError("msd values must be finite and nonnegative")
        if self.kind is MsdKind.ANALYTIC and v.size > 1:
            slack = 1e-9 * (float(np.max(v)) + 1e-30)
            if np.any(np.diff(v) < -slack):
                raise DomainError("analytic msd curves must be nondecreasing")
        object.__setattr__(self, "t_grid", t)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares line on (log t, log value)."""

    exponent: float
    log_prefactor: float
    fit_range: tuple[float, float]
    rms_residual: float


class AsymptoticRegime(enum.Enum):
    SMALL_T = "small_t"
    LARGE_T = "large_t"


def _check_time(t, name: str = "t", allow_zero: bool = False) -> float:
    if not (isinstance(t, (int, float, np.floating)) and math.isfinite(float(t))):
        raise DomainError(f"{name} must be a finite real, got {t!r}")
    t = float(t)
    if t < 0.0 or (t == 0.0 and not allow_zero):
        raise DomainError(f"{name} must be {'>= 0' if allow_zero else '> 0'}, got {t}")
    return t


def _gamma_kernel_integral(a: float, c: float, t: float) -> float:
    """Quadrature for the gamma-family kernel, with e^(-t/a) folded into the
    exponent so the integrand never overflows."""
    x = t / a
    big_l = math.log(x)

    def h(tau: float) -> float:
        if tau <= 0.0:
            return 0.0
        e = tau * big_l - special.gammaln(tau) - x
        return math.exp(e) if e > -745.0 else 0.0

    tau_hi = max(50.0, 10.0 * x)
    pts = set(np.geomspace(1e-4, 0.9 * tau_hi, 20))
    width = 4.0 * (math.sqrt(x) + 1.0)
    for p in (x + 0.5 - width, x + 0.5, x + 0.5 + width):
        if 0.0 < p < tau_hi:
            pts.add(p)
    val, err = integrate.quad(h, 0.0, tau_hi, points=sorted(pts),
                              limit=400, epsabs=0.0, epsrel=1e-10)
    if not math.isfinite(val) or (val > 0.0 and err > 1e-8 * val):
        raise ConvergenceError(
            f"gamma kernel quadrature error {err:.3g} exceeds 1e-8 relative at t={t}")
    return val / (c * t)


def memory_kernel(spec: SubordinatorSpec, t: float) -> float:
    """Memory kernel M(t) of the family; its running integral is the MSD.

    The tempered stable branch evaluates the Mittag-Leffler factor directly
    where its series converges and otherwise splits off the exact constant
    long-time level, so no intermediate quantity overflows.
    """
    t = _check_time(t)
    if isinstance(spec, StableSpec):
        return t ** (spec.alpha - 1.0) / gamma_fn(spec.alpha)
    if isinstance(spec, TemperedStableSpec):
        alpha, lam, c = spec.alpha, spec.lam, spec.c
        z = (lam * t) ** alpha
        if z <= ML_Z_SERIES_MAX and _series_scan(alpha, alpha, z,
                                                 ML_DEFAULT_ATOL, ML_MAX_TERMS)[0]:
            ml_val = mittag_leffler(alpha, alpha, z).value
            return math.exp(-lam * t) * t ** (alpha - 1.0) * ml_val / c
        base = lam ** (1.0 - alpha) / (alpha * c)
        if lam * t > 700.0:
            return base
        ik, kerr, _ = _kernel_quadrature(alpha, alpha, z, 1e-12)
        corr = math.exp(-lam * t) * t ** (alpha - 1.0) / c
        value = base + corr * ik
        if kerr * abs(corr) > 1e-8 * abs(value):
            raise ConvergenceError(
                f"tempered stable kernel quadrature error too large at t={t}")
        return value
    if isinstance(spec, GammaSpec):
        return _gamma_kernel_integral(spec.a, spec.c, t)
    raise DomainError(f"unsupported spec type {type(spec).__name__}")


def _ts_msd_integrand(alpha: float, v: float) -> float:
    """Integrand of the tempered stable MSD after substituting away the
    power-law endpoint singularity; equals e^(-v^(1/alpha)) times the
    kernel integral of the Mittag-Leffler representation."""
    if v <= 0.0:
        return float(special.rgamma(alpha))
    if v < 1e-6:
        e_val = float(special.rgamma(alpha)) + v * float(special.rgamma(2.0 * alpha)) \
            + v * v * float(special.rgamma(3.0 * alpha))
        boundary = v ** ((1.0 - alpha) / alpha) / alpha
        return math.exp(-v ** (1.0 / alpha)) * (e_val - boundary)
    ik = _kernel_quadrature(alpha, alpha, v, 1e-11)[0]
    return math.exp(-v ** (1.0 / alpha)) * ik


def msd_analytic(spec: SubordinatorSpec, t: float) -> float:
    """Mean squared displacement of Y at physical time t.

    Stable: exact closed form. Tempered stable: exact linear term plus a
    bounded correction integral (the change of variable v = (lam u)^alpha
    removes the u^(alpha-1) singularity of the kernel identically).
    Gamma: integral of the regularized lower incomplete gamma over shape.
    """
    t = _check_time(t, allow_zero=True)
    if t == 0.0:
        return 0.0
    if isinstance(spec, StableSpec):
        return t ** spec.alpha / gamma_fn(spec.alpha + 1.0)
    if isinstance(spec, TemperedStableSpec):
        alpha, lam, c = spec.alpha, spec.lam, spec.c
        z_t = (lam * t) ** alpha
        hi = min(z_t, 46.0 ** alpha)
        pts = [p for p in np.geomspace(hi * 1e-8, hi * 0.9, 12)]
        corr, err = integrate.quad(lambda v: _ts_msd_integrand(alpha, v),
                                   0.0, hi, points=pts, limit=200,
                                   epsabs=1e-13, epsrel=1e-9)
        value = (lam * t + corr) / (c * alpha * lam ** alpha)
        if not math.isfinite(value) or err > 1e-6 * (lam * t + abs(corr)):
            raise ConvergenceError(
                f"tempered stable msd quadrature failed to converge at t={t}")
        return value
    if isinstance(spec, GammaSpec):
        x = t / spec.a

        def p_reg(s: float) -> float:
            if s <= 0.0:
                return 1.0
            return float(special.gammainc(s, x))

        s_hi = max(50.0, x + 40.0 * math.sqrt(x) + 40.0)
        pts = set(np.geomspace(1e-6, 0.9 * s_hi, 20))
        for p in (x - 4.0 * math.sqrt(x), x, x + 4.0 * math.sqrt(x)):
            if 0.0 < p < s_hi:
                pts.add(p)
        val, err = integrate.quad(p_reg, 0.0, s_hi, points=sorted(pts),
                                  limit=400, epsabs=0.0, epsrel=1e-10)
        if not math.isfinite(val) or (val > 0.0 and err > 1e-6 * val):
            raise ConvergenceError(
                f"gamma msd quadrature error {err:.3g} too large at t={t}")
        return val / spec.c
    raise DomainError(f"unsupported spec type {type(spec).__name__}")


def covariance_analytic(spec: SubordinatorSpec, s: float, t: float) -> float:
    """Covariance of Y(s) and Y(t); equals the MSD at min(s, t)."""
    s = _check_time(s, "s", allow_zero=True)
    t = _check_time(t, "t", allow_zero=True)
    return msd_analytic(spec, min(s, t))


def msd_ensemble(trajectories) -> MsdCurve:
    """Sample mean of Y(t)^2 across trajectories sharing one grid.

    Returns the curve with a per-point standard error band attached.
    """
    trajs = list(trajectories)
    if len(trajs) < 2:
        raise DomainError("msd_ensemble requires at least 2 trajectories")
    grid = trajs[0].t_grid
    for tr in trajs[1:]:
        if tr.t_grid.shape != grid.shape or not np.array_equal(tr.t_grid, grid):
            raise GridMismatchError("trajectories do not share a common time grid")
    ysq = np.stack([tr.y_values for tr in trajs]) ** 2
    values = ysq.mean(axis=0)
    stderr = ysq.std(axis=0, ddof=1) / math.sqrt(len(trajs))
    return MsdCurve(t_grid=grid, values=values, kind=MsdKind.ENSEMBLE_AVG,
                    meta=float(len(trajs)), stderr=stderr)


def msd_time_avg(traj: Trajectory, t_lags, T: float | None = None) -> MsdCurve:
    """Sliding-window average of squared increments along one trajectory.

    Lags are snapped to the trajectory's uniform sampling step; the window
    integral uses the trapezoid rule. Every lag must satisfy 0 < lag < T.
    """
    grid = traj.t_grid
    if grid.size < 3:
        raise DomainError("time-averaged msd needs at least 3 grid points")
    dt = float(grid[1] - grid[0])
    if not np.allclose(np.diff(grid), dt, rtol=1e-9, atol=1e-12 * max(dt, 1.0)):
        raise GridMismatchError("time-averaged msd requires a uniform time grid")
    n_last = grid.size - 1
    if T is None:
        T = float(grid[-1])
    else:
        T = _check_time(T, "T")
        n_last = int(round(T / dt))
        if n_last > grid.size - 1 or abs(n_last * dt - T) > 1e-9 * max(T, 1.0):
            raise DomainError(f"T={T} is not on the trajectory grid")
    T_used = n_last * dt
    y = traj.y_values
    lags_in = np.atleast_1d(np.asarray(t_lags, dtype=float))
    snapped = []
    values = []
    for lag in lags_in:
        if not math.isfinite(lag) or lag <= 0.0 or lag >= T_used:
            raise DomainError(f"lag {lag} outside (0, T={T_used})")
        m = int(round(lag / dt))
        m = min(max(m, 1), n_last - 1)
        d = y[m:n_last + 1] - y[:n_last + 1 - m]
        g = d * d
        integral = dt * (0.5 * g[0] + g[1:-1].sum() + 0.5 * g[-1])
        snapped.append(m * dt)
        values.append(integral / (T_used - m * dt))
    snapped = np.asarray(snapped)
    if np.any(np.diff(snapped) <= 0.0):
        raise DomainError("lags collapse onto non-increasing grid steps after snapping")
    return MsdCurve(t_grid=snapped, values=np.asarray(values),
                    kind=MsdKind.TIME_AVG, meta=T_used)


def fit_power_law(curve: MsdCurve, t_lo: float, t_hi: float) -> PowerLawFit:
    """Least-squares power-law fit of the curve on [t_lo, t_hi] in log-log."""
    t_lo = _check_time(t_lo, "t_lo")
    t_hi = _check_time(t_hi, "t_hi")
    if t_lo >= t_hi:
        raise DomainError(f"fit window requires t_lo < t_hi, got [{t_lo}, {t_hi}]")
    mask = (curve.t_grid >= t_lo) & (curve.t_grid <= t_hi) & (curve.t_grid > 0.0)
    if int(mask.sum()) < 5:
        raise FitError(
            f"fit window [{t_lo}, {t_hi}] contains {int(mask.sum())} points, need >= 5")
    vals = curve.values[mask]
    if np.any(vals <= 0.0):
        raise FitError("fit window contains nonpositive msd values")
    lt = np.log(curve.t_grid[mask])
    lv = np.log(vals)
    slope, intercept = np.polyfit(lt, lv, 1)
    resid = lv - (slope * lt + intercept)
    return PowerLawFit(exponent=float(slope), log_prefactor=float(intercept),
                       fit_range=(t_lo, t_hi),
                       rms_residual=float(np.sqrt(np.mean(resid ** 2))))


def gamma_msd_asymptote(a: float, c: float, t: float, regime: AsymptoticRegime) -> float:
    """Asymptotic MSD forms for the gamma family.

    SMALL_T returns the shape -e^(-t/a)/log(t/a), defined only for t < a
    and known up to a constant amplitude; LARGE_T returns the exact linear
    law t/(a c).
    """
    if not (isinstance(a, (int, float, np.floating)) and float(a) > 0.0):
        raise DomainError(f"a must be > 0, got {a!r}")
    if not (isinstance(c, (int, float, np.floating)) and float(c) > 0.0):
        raise DomainError(f"c must be > 0, got {c!r}")
    t = _check_time(t)
    if regime is AsymptoticRegime.SMALL_T:
        if t >= a:
            raise DomainError(f"small-t regime requires t < a, got t={t}, a={a}")
        return -math.exp(-t / a) / math.log(t / a)
    if regime is AsymptoticRegime.LARGE_T:
        return t / (float(a) * float(c))
    raise DomainError(f"unknown regime {regime!r}")


def tail_power_integral(u: float, k: int) -> float:
    """Integral of u^tau tau^k over tau in [1, inf) for 0 < u < 1.

    Evaluated by the integration-by-parts recursion with base case
    -u/log(u) at k = 0.
    """
    if not (isinstance(u, (int, float, np.floating)) and 0.0 < float(u) < 1.0):
        raise DomainError(f"u must lie in (0, 1), got {u!r}")
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool) or k < 0:
        raise DomainError(f"k must be an integer >= 0, got {k!r}")
    log_u = math.log(float(u))
    f = -float(u) / log_u
    for j in range(1, int(k) + 1):
        f = -float(u) / log_u - (j / log_u) * f
    return f


def match_gamma_to_tempered_stable(alpha: float, lam: float, c: float,
                                   a_fixed: float) -> GammaSpec:
    """Gamma parameters whose unit-time mean equals the tempered stable one.

    Keeps the requested scale a_fixed and solves a c_gamma = c alpha
    lam^(alpha-1) for the shape rate.
    """
    ts = TemperedStableSpec(alpha=float(alpha), lam=float(lam), c=float(c))
    if not (isinstance(a_fixed, (int, float, np.floating)) and float(a_fixed) > 0.0):
        raise DomainError(f"a_fixed must be > 0, got {a_fixed!r}")
    mean = ts.c * ts.alpha * ts.lam ** (ts.alpha - 1.0)
    return GammaSpec(a=float(a_fixed), c=mean / float(a_fixed))
