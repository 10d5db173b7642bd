"""Special-function evaluators backing the analytic layer.

Gamma-family functions wrap scipy.special behind strict domain and overflow
checks. The generalized Mittag-Leffler evaluator dispatches between a
truncated power series, a real-line integral representation, and a
large-argument expansion; it reports which branch produced the value along
with an error estimate, so downstream quadratures can trust the result.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import ConvergenceError, DomainError, SingularityError

_LOG_DBL_MAX = math.log(np.finfo(float).max)

# Mittag-Leffler regime thresholds. z_asym is derived from the p-term
# remainder bound O(z^-(p+1)) evaluated at the default tolerance.
ML_Z_SERIES_MAX = 5.0
ML_ASYM_TERMS = 5
ML_DEFAULT_ATOL = 1e-10
ML_DEFAULT_RTOL = 1e-10
ML_MAX_TERMS = 400


def ml_z_asym_threshold(atol: float = ML_DEFAULT_ATOL, p: int = ML_ASYM_TERMS) -> float:
    """Smallest z for which the p-term large-z expansion meets `atol`."""
    return atol ** (-1.0 / (p + 1))


def gamma_fn(z: float) -> float:
    """Gamma function on the positive real axis.

    Raises DomainError for z <= 0 and OverflowError once the result
    exceeds the double range (z > ~171.6).
    """
    z = float(z)
    if not math.isfinite(z) or z <= 0.0:
        raise DomainError(f"gamma_fn requires finite z > 0, got {z}")
    val = float(special.gamma(z))
    if math.isinf(val):
        raise OverflowError(f"gamma_fn({z}) exceeds double range")
    return val


def lower_incomplete_gamma(s: float, x: float) -> float:
    """Lower incomplete gamma integral of t^(s-1) e^-t over [0, x] (unregularized)."""
    s = float(s)
    x = float(x)
    if not math.isfinite(s) or s <= 0.0:
        raise DomainError(f"lower_incomplete_gamma requires s > 0, got {s}")
    if not math.isfinite(x) or x < 0.0:
        raise DomainError(f"lower_incomplete_gamma requires x >= 0, got {x}")
    whole = float(special.gamma(s))
    if math.isinf(whole):
        raise OverflowError(f"lower_incomplete_gamma overflow for s={s}")
    return float(special.gammainc(s, x)) * whole


def bessel_i(v: float, z: float) -> float:
    """Modified Bessel function of the first kind I_v(z) for order v >= 0."""
    v = float(v)
    z = float(z)
    if not math.isfinite(v) or v < 0.0:
        raise DomainError(f"bessel_i requires order v >= 0, got {v}")
    if not math.isfinite(z):
        raise DomainError(f"bessel_i requires finite z, got {z}")
    val = float(special.iv(v, z))
    if math.isnan(val):
        raise DomainError(f"bessel_i undefined for v={v}, z={z}")
    if math.isinf(val):
        raise OverflowError(f"bessel_i({v}, {z}) exceeds double range")
    return val


def lower_incomplete_gamma_bessel(s: float, x: float, n_terms: int = 30) -> float:
    """Bessel-series identity for the lower incomplete gamma integral.

    Verification-only evaluator, intended for small x:

        gamma(s, x) = Gamma(s) x^(s/2) e^-x
                      * sum_n e_n(-1) x^(n/2) I_(n+s)(2 sqrt(x))

    with e_n the exponential partial sums. Not a production path.
    """
    s = float(s)
    x = float(x)
    if s <= 0.0 or x < 0.0:
        raise DomainError("lower_incomplete_gamma_bessel requires s > 0, x >= 0")
    if x == 0.0:
        return 0.0
    root = math.sqrt(x)
    e_partial = 0.0
    fact = 1.0
    total = 0.0
    for n in range(n_terms):
        if n > 0:
            fact *= -1.0 / n
        e_partial += fact
        total += e_partial * x ** (0.5 * n) * float(special.iv(n + s, 2.0 * root))
    return gamma_fn(s) * x ** (0.5 * s) * math.exp(-x) * total


class MlRegime(enum.Enum):
    SERIES = "series"
    INTEGRAL_REP = "integral_rep"
    ASYMPTOTIC = "asymptotic"


@dataclass(frozen=True)
class MlEvalReport:
    """Outcome of one Mittag-Leffler evaluation."""

    value: float
    regime: MlRegime
    terms_used: int
    est_abs_error: float


def _series_scan(alpha: float, beta: float, z: float, atol: float, max_terms: int):
    """Deterministic term-magnitude scan for the defining series.

    Returns (feasible, n_terms, est_trunc, peak_log). Magnitudes only; no
    summation happens here, so regime selection depends only on the inputs.
    """
    if z == 0.0:
        return True, 1, 0.0, 0.0
    k = np.arange(max_terms, dtype=float)
    log_terms = k * math.log(abs(z)) - special.gammaln(alpha * k + beta)
    peak_idx = int(np.argmax(log_terms))
    peak_log = float(log_terms[peak_idx])
    if peak_log > _LOG_DBL_MAX - 5.0:
        return False, max_terms, math.inf, peak_log
    log_floor = math.log(atol) - 3.0
    decay = np.diff(log_terms) <= math.log(0.9)
    ok = (log_terms[1:] <= log_floor) & decay & (np.arange(1, max_terms) > peak_idx)
    hits = np.nonzero(ok)[0]
    if hits.size == 0:
        return False, max_terms, math.inf, peak_log
    n_terms = int(hits[0]) + 2  # include the first sub-floor decaying term
    est_trunc = 10.0 * math.exp(float(log_terms[n_terms - 1]))
    if z < 0.0:
        # alternating sum: cancellation noise scales with the peak term
        cancel = math.exp(peak_log) * 5e-16 * math.sqrt(n_terms)
        if cancel > 0.5 * atol:
            return False, n_terms, cancel, peak_log
        est_trunc += cancel
    return True, n_terms, est_trunc, peak_log


def _eval_series(alpha: float, beta: float, z: float,
                 atol: float = ML_DEFAULT_ATOL,
                 max_terms: int = ML_MAX_TERMS) -> tuple[float, int, float]:
    """Sum the defining power series; returns (value, terms, est_abs_error)."""
    feasible, n_terms, est, _ = _series_scan(alpha, beta, z, atol, max_terms)
    if not feasible:
        raise ConvergenceError(
            f"Mittag-Leffler series does not reach tol={atol} within "
            f"{max_terms} terms for alpha={alpha}, beta={beta}, z={z}")
    if z == 0.0:
        return 1.0 / gamma_fn(beta), 1, 0.0
    k = np.arange(n_terms, dtype=float)
    if (n_terms - 1) * math.log(abs(z)) < 700.0:
        terms = np.power(abs(z), k) * special.rgamma(alpha * k + beta)
    else:
        # |z|^k alone would overflow; assemble each term in log space
        terms = np.exp(k * math.log(abs(z)) - special.gammaln(alpha * k + beta))
    if z < 0.0:
        terms[1::2] *= -1.0
    value = math.fsum(terms.tolist())
    return value, n_terms, est


def ml_integral_kernel(alpha: float, beta: float, r: float, z: float) -> float:
    """Integrand of the real-line Mittag-Leffler representation.

        K(alpha, beta, r, z) = r^((1-beta)/alpha) e^(-r^(1/alpha)) / (pi alpha)
            * [r sin(pi (1-beta)) - z sin(pi (1-beta+alpha))]
            / [r^2 - 2 r z cos(pi alpha) + z^2]

    Valid for 0 < alpha < 1 and beta <= 1 + alpha; z must be nonzero.
    At beta = alpha the z term vanishes identically.
    """
    alpha = float(alpha)
    beta = float(beta)
    r = float(r)
    z = float(z)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"ml_integral_kernel requires 0 < alpha < 1, got {alpha}")
    if beta > 1.0 + alpha:
        raise DomainError(f"ml_integral_kernel requires beta <= 1 + alpha, got beta={beta}")
    if r <= 0.0:
        raise DomainError(f"ml_integral_kernel requires r > 0, got {r}")
    if z == 0.0:
        raise DomainError("ml_integral_kernel requires z != 0")
    den = r * r - 2.0 * r * z * math.cos(math.pi * alpha) + z * z
    if den <= 1e-14 * (r * r + z * z):
        raise SingularityError(
            f"kernel denominator vanishes at r={r}, z={z}, alpha={alpha}")
    num = r * math.sin(math.pi * (1.0 - beta)) - z * math.sin(math.pi * (1.0 - beta + alpha))
    return r ** ((1.0 - beta) / alpha) * math.exp(-r ** (1.0 / alpha)) \
        / (math.pi * alpha) * num / den


def _kernel_quadrature(alpha: float, beta: float, z: float,
                       atol: float) -> tuple[float, float, int]:
    """Integrate the representation kernel over r in (0, r_cut].

    Returns (value, est_abs_error, n_evals). The cutoff is chosen from the
    stretched-exponential envelope so the discarded tail is below tolerance.
    Substituting r = u^p with p = alpha / (alpha + 1 - beta) turns the
    algebraic prefactor r^((1-beta)/alpha) dr into p du exactly, so the
    integrand stays bounded at u = 0 even when beta > 1.
    """
    big = max(45.0, -1.2 * math.log(atol))
    r_cut = big ** alpha
    sin_b = math.sin(math.pi * (1.0 - beta))
    sin_ba = math.sin(math.pi * (1.0 - beta + alpha))
    cos_a = math.cos(math.pi * alpha)
    ex = (alpha + 1.0 - beta) / alpha

    if ex > 1e-12:
        p = 1.0 / ex

        def f(u: float) -> float:
            r = u ** p if u > 0.0 else 0.0
            den = r * r - 2.0 * r * z * cos_a + z * z
            num = r * sin_b - z * sin_ba
            return p * math.exp(-r ** (1.0 / alpha)) / (math.pi * alpha) * num / den

        top = r_cut ** ex
        z_pt = abs(z) ** ex
    else:
        # beta at the upper edge 1 + alpha: the z term of the numerator is
        # identically zero there and r cancels the algebraic prefactor
        def f(r: float) -> float:
            den = r * r - 2.0 * r * z * cos_a + z * z
            w = r ** ex if r > 0.0 else 1.0
            return w * sin_b * math.exp(-r ** (1.0 / alpha)) / (math.pi * alpha) / den

        top = r_cut
        z_pt = abs(z)

    pts = list(np.geomspace(top * 1e-12, top * 0.5, 16))
    if 0.0 < z_pt < top:
        pts.append(z_pt)
    pts = sorted(set(pts))
    val, err, info = integrate.quad(
        f, 0.0, top, points=pts, limit=400,
        epsabs=0.1 * atol, epsrel=1e-12, full_output=1)[:3]
    tail = (big + abs(z)) * math.exp(-big)
    return float(val), float(err) + tail, int(info["neval"])


def _eval_integral_rep(alpha: float, beta: float, z: float,
                       atol: float = ML_DEFAULT_ATOL) -> tuple[float, int, float]:
    """Integral-representation evaluation; returns (value, evals, est_abs_error)."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"integral representation requires 0 < alpha < 1, got {alpha}")
    if beta > 1.0 + alpha:
        raise DomainError(
            f"integral representation requires beta <= 1 + alpha, got beta={beta}")
    if z == 0.0:
        raise DomainError("integral representation requires z != 0")
    val, err, nev = _kernel_quadrature(alpha, beta, z, atol)
    if z > 0.0:
        log_lead = (1.0 - beta) / alpha * math.log(z) + z ** (1.0 / alpha) - math.log(alpha)
        if log_lead > _LOG_DBL_MAX - 2.0:
            raise OverflowError(
                f"Mittag-Leffler value exceeds double range for alpha={alpha}, "
                f"beta={beta}, z={z}")
        lead = math.exp(log_lead)
        val += lead
        err += 1e-15 * lead
    return val, nev, err


def _eval_asymptotic(alpha: float, beta: float, z: float,
                     p: int = ML_ASYM_TERMS) -> tuple[float, int, float]:
    """Large positive z expansion; returns (value, terms, est_abs_error)."""
    if z <= 0.0:
        raise DomainError(f"asymptotic branch requires z > 0, got {z}")
    log_lead = (1.0 - beta) / alpha * math.log(z) + z ** (1.0 / alpha) - math.log(alpha)
    if log_lead > _LOG_DBL_MAX - 2.0:
        raise OverflowError(
            f"Mittag-Leffler value exceeds double range for alpha={alpha}, "
            f"beta={beta}, z={z}")
    lead = math.exp(log_lead)
    # 1/Gamma evaluates to zero at the poles, dropping those terms exactly
    corr = math.fsum(z ** (-k) * float(special.rgamma(beta - alpha * k))
                     for k in range(1, p + 1))
    rem = z ** (-(p + 1)) * max(1.0, abs(float(special.rgamma(beta - alpha * (p + 1)))))
    return lead - corr, p + 1, rem + 1e-15 * lead


def mittag_leffler(alpha: float, beta: float, z: float, *,
                   atol: float = ML_DEFAULT_ATOL,
                   rtol: float = ML_DEFAULT_RTOL,
                   z_series: float = ML_Z_SERIES_MAX,
                   z_asym: float | None = None,
                   max_terms: int = ML_MAX_TERMS,
                   p_asym: int = ML_ASYM_TERMS) -> MlEvalReport:
    """Generalized Mittag-Leffler function E_alpha,beta(z) on the real line.

    Regime selection is a deterministic function of (alpha, beta, z) and the
    configured thresholds: the defining series for small |z| when its scan
    predicts convergence within budget, the large-argument expansion for
    z >= z_asym, and the integral representation otherwise (which requires
    beta <= 1 + alpha).

    Returns an MlEvalReport carrying the value, the regime that produced it,
    the work performed, and an absolute error estimate. Raises DomainError
    for parameters outside 0 < alpha < 1 or beta <= 0, OverflowError when
    the value exceeds the double range, and ConvergenceError when no branch
    attains the requested tolerance.
    """
    alpha = float(alpha)
    beta = float(beta)
    z = float(z)
    if not (math.isfinite(alpha) and 0.0 < alpha < 1.0):
        raise DomainError(f"mittag_leffler requires 0 < alpha < 1, got {alpha}")
    if not (math.isfinite(beta) and beta > 0.0):
        raise DomainError(f"mittag_leffler requires beta > 0, got {beta}")
    if not math.isfinite(z):
        raise DomainError(f"mittag_leffler requires finite z, got {z}")
    if z_asym is None:
        z_asym = ml_z_asym_threshold(atol, p_asym)

    if z == 0.0:
        return MlEvalReport(1.0 / gamma_fn(beta), MlRegime.SERIES, 1, 0.0)

    if abs(z) <= z_series:
        feasible = _series_scan(alpha, beta, z, atol, max_terms)[0]
        if feasible:
            value, n, est = _eval_series(alpha, beta, z, atol, max_terms)
            return MlEvalReport(value, MlRegime.SERIES, n, est)

    if z >= z_asym:
        value, n, est = _eval_asymptotic(alpha, beta, z, p_asym)
        if est <= max(atol, rtol * abs(value)):
            return MlEvalReport(value, MlRegime.ASYMPTOTIC, n, est)

    if beta <= 1.0 + alpha:
        value, n, est = _eval_integral_rep(alpha, beta, z, atol)
        if est <= max(atol, rtol * abs(value)):
            return MlEvalReport(value, MlRegime.INTEGRAL_REP, n, est)
        raise ConvergenceError(
            f"integral representation reached est_abs_error={est:.3g} > tol "
            f"for alpha={alpha}, beta={beta}, z={z}")

    raise ConvergenceError(
        f"no evaluation regime attains tolerance for alpha={alpha}, "
        f"beta={beta}, z={z} (series infeasible, beta > 1 + alpha)")


def reciprocal_gamma_coeffs(n_max: int) -> np.ndarray:
    """Taylor coefficients a_k of 1/Gamma(z) = sum_k a_k z^k, k = 0 .. n_max.

    Computed by exponentiating the standard log-Gamma series, so a_1 = 1
    and a_2 is the Euler-Mascheroni constant. Supported for n_max <= 30;
    beyond that the coefficients are below double precision anyway.
    """
    if not isinstance(n_max, (int, np.integer)):
        raise DomainError(f"n_max must be an integer, got {n_max!r}")
    if not 1 <= n_max <= 30:
        raise DomainError(f"n_max must be in [1, 30], got {n_max}")
    if n_max == 1:
        return np.array([0.0, 1.0])
    # 1/Gamma(1+z) = exp(g(z)), g(z) = euler*z - sum_{j>=2} (-1)^j zeta(j) z^j / j
    g = np.zeros(n_max, dtype=float)
    g[1] = np.euler_gamma
    for j in range(2, n_max):
        g[j] = -((-1.0) ** j) * float(special.zeta(j)) / j
    b = np.zeros(n_max, dtype=float)
    b[0] = 1.0
    for n in range(1, n_max):
        b[n] = sum(j * g[j] * b[n - j] for j in range(1, n + 1)) / n
    a = np.zeros(n_max + 1, dtype=float)
    a[1:] = b
    return a
