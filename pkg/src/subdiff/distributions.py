"""Increment laws of the three subordinator families.

Each family is described by a frozen parameter container that validates on
construction and acts as the single source of truth for the Levy exponent,
the increment samplers, and the density evaluators. Sampling uses the exact
Kanter transformation for one-sided stable variates, exponential-tilting
rejection for tempered stable variates (with automatic splitting of the
time step when the acceptance rate would be poor), and numpy's gamma
generator for gamma increments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar, Union

import numpy as np
from scipy import integrate

from .errors import BudgetError, DomainError

# smallest positive double; used to keep sampled increments strictly positive
_POS_MIN = 5e-324


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise DomainError(msg)


def _finite_pos(x) -> bool:
    return isinstance(x, (int, float, np.integer, np.floating)) \
        and math.isfinite(float(x)) and float(x) > 0.0


@dataclass(frozen=True)
class StableSpec:
    """One-sided alpha-stable subordinator, totally skewed, unit scale."""

    alpha: float
    family: ClassVar[str] = "stable"

    def __post_init__(self):
        _require(isinstance(self.alpha, (int, float, np.floating))
                 and math.isfinite(float(self.alpha))
                 and 0.0 < float(self.alpha) < 1.0,
                 f"stable alpha must lie in (0, 1), got {self.alpha!r}")


@dataclass(frozen=True)
class TemperedStableSpec:
    """Tempered stable subordinator with tempering rate lam and scale c."""

    alpha: float
    lam: float
    c: float
    family: ClassVar[str] = "tempered_stable"

    def __post_init__(self):
        _require(isinstance(self.alpha, (int, float, np.floating))
                 and math.isfinite(float(self.alpha))
                 and 0.0 < float(self.alpha) < 1.0,
                 f"tempered stable alpha must lie in (0, 1), got {self.alpha!r}")
        _require(_finite_pos(self.lam),
                 f"tempering rate lam must be > 0, got {self.lam!r}")
        _require(_finite_pos(self.c), f"scale c must be > 0, got {self.c!r}")


@dataclass(frozen=True)
class GammaSpec:
    """Gamma subordinator with scale a and shape rate c."""

    a: float
    c: float
    family: ClassVar[str] = "gamma"

    def __post_init__(self):
        _require(_finite_pos(self.a), f"gamma scale a must be > 0, got {self.a!r}")
        _require(_finite_pos(self.c), f"gamma shape rate c must be > 0, got {self.c!r}")


SubordinatorSpec = Union[StableSpec, TemperedStableSpec, GammaSpec]

_FAMILY_ALIASES = {
    "stable": "stable",
    "tempered_stable": "tempered_stable",
    "tempered-stable": "tempered_stable",
    "ts": "tempered_stable",
    "gamma": "gamma",
}


def make_spec(family: str, *, alpha: float | None = None, lam: float | None = None,
              c: float | None = None, a: float | None = None) -> SubordinatorSpec:
    """Build a subordinator spec from a family name and keyword parameters."""
    key = _FAMILY_ALIASES.get(str(family).strip().lower())
    if key is None:
        raise DomainError(f"unknown subordinator family {family!r}")
    if key == "stable":
        _require(alpha is not None, "stable family requires alpha")
        return StableSpec(alpha=float(alpha))
    if key == "tempered_stable":
        _require(alpha is not None and lam is not None and c is not None,
                 "tempered stable family requires alpha, lam and c")
        return TemperedStableSpec(alpha=float(alpha), lam=float(lam), c=float(c))
    _require(a is not None and c is not None, "gamma family requires a and c")
    return GammaSpec(a=float(a), c=float(c))


class RngStream:
    """Reproducible random stream addressed by (master_seed, stream_index).

    Streams with distinct addresses are statistically independent; the same
    address always reproduces the same sequence.
    """

    __slots__ = ("master_seed", "stream_index", "generator")

    def __init__(self, master_seed: int, stream_index: int):
        if not isinstance(master_seed, (int, np.integer)) or isinstance(master_seed, bool):
            raise DomainError(f"master_seed must be an integer, got {master_seed!r}")
        if not isinstance(stream_index, (int, np.integer)) or isinstance(stream_index, bool):
            raise DomainError(f"stream_index must be an integer, got {stream_index!r}")
        if not 0 <= int(master_seed) < 2 ** 64:
            raise DomainError(f"master_seed must fit in 64 bits, got {master_seed}")
        if int(stream_index) < 0:
            raise DomainError(f"stream_index must be >= 0, got {stream_index}")
        self.master_seed = int(master_seed)
        self.stream_index = int(stream_index)
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_index,))
        self.generator = np.random.Generator(np.random.PCG64(seq))

    def __repr__(self):
        return f"RngStream(master_seed={self.master_seed}, stream_index={self.stream_index})"


def _generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    raise DomainError(f"rng must be an RngStream or numpy Generator, got {type(rng).__name__}")


def levy_exponent(spec: SubordinatorSpec, z):
    """Levy exponent of the subordinator, so E[e^(-z U(t))] = e^(-t psi(z)).

    Accepts a scalar or array z >= 0 and returns the matching shape.
    """
    arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
        raise DomainError("levy_exponent requires finite z >= 0")
    if isinstance(spec, StableSpec):
        out = arr ** spec.alpha
    elif isinstance(spec, TemperedStableSpec):
        out = spec.c * ((spec.lam + arr) ** spec.alpha - spec.lam ** spec.alpha)
    elif isinstance(spec, GammaSpec):
        out = spec.c * np.log1p(spec.a * arr)
    else:
        raise DomainError(f"unsupported spec type {type(spec).__name__}")
    return float(out) if np.isscalar(z) or arr.ndim == 0 else out


def _kanter_standard(alpha: float, gen: np.random.Generator, n: int) -> np.ndarray:
    """Draw n one-sided stable variates with Laplace transform e^(-z^alpha).

    Kanter's transformation of a uniform angle and a unit exponential.
    """
    u = gen.uniform(0.0, math.pi, size=n)
    np.clip(u, 1e-12, math.pi - 1e-12, out=u)
    w = gen.standard_exponential(size=n)
    # censoring the extreme left tail (mass ~1e-16) avoids overflow below
    np.clip(w, 1e-16, None, out=w)
    ratio = (1.0 - alpha) / alpha
    x = np.sin(alpha * u) / np.sin(u) ** (1.0 / alpha) \
        * (np.sin((1.0 - alpha) * u) / w) ** ratio
    return x


def sample_stable_increment(alpha: float, scale_t: float, rng, size=None):
    """Sample the increment of a stable subordinator over operational time scale_t.

    The draw is strictly positive with Laplace transform e^(-scale_t z^alpha).
    With size=None a scalar is returned, otherwise an array of that shape.
    """
    _require(_finite_pos(alpha) and alpha < 1.0, f"alpha must lie in (0, 1), got {alpha!r}")
    _require(_finite_pos(scale_t), f"scale_t must be > 0, got {scale_t!r}")
    gen = _generator(rng)
    n = 1 if size is None else int(np.prod(size))
    x = float(scale_t) ** (1.0 / alpha) * _kanter_standard(float(alpha), gen, n)
    if size is None:
        return float(x[0])
    return x.reshape(size)


def _tilted_proposal_block(alpha: float, lam: float, lt_scale: float,
                           gen: np.random.Generator, n: int):
    """One rejection round for the tempered stable sampler.

    Draws n stable proposals with Laplace transform e^(-lt_scale z^alpha)
    and returns (values, accept_mask) where acceptance has probability
    e^(-lam x) given the proposal x.
    """
    x = lt_scale ** (1.0 / alpha) * _kanter_standard(alpha, gen, n)
    accept = gen.random(n) < np.exp(-lam * x)
    return x, accept


def sample_tempered_stable(alpha: float, lam: float, c: float, scale_t: float,
                           rng, size=None, max_rounds: int = 200):
    """Sample a tempered stable increment over operational time scale_t.

    The law has Laplace transform e^(-scale_t c ((lam+z)^alpha - lam^alpha)).
    Stable proposals are tilted by e^(-lam x); when the acceptance rate
    e^(-scale_t c lam^alpha) drops below 0.1 the increment is assembled as a
    sum of sub-increments sized so each piece accepts with rate >= 0.5.
    Raises BudgetError if any slot stays unfilled after max_rounds passes.
    """
    _require(_finite_pos(alpha) and alpha < 1.0, f"alpha must lie in (0, 1), got {alpha!r}")
    _require(_finite_pos(lam), f"lam must be > 0, got {lam!r}")
    _require(_finite_pos(c), f"c must be > 0, got {c!r}")
    _require(_finite_pos(scale_t), f"scale_t must be > 0, got {scale_t!r}")
    gen = _generator(rng)
    alpha = float(alpha)
    lam = float(lam)
    exponent = float(scale_t) * float(c) * lam ** alpha
    n_pieces = 1 if exponent <= -math.log(0.1) else int(math.ceil(exponent / math.log(2.0)))
    lt_scale = float(scale_t) * float(c) / n_pieces

    n_out = 1 if size is None else int(np.prod(size))
    slots = n_out * n_pieces
    out = np.empty(slots, dtype=float)
    pending = np.arange(slots)
    for _ in range(max_rounds):
        x, accept = _tilted_proposal_block(alpha, lam, lt_scale, gen, pending.size)
        out[pending[accept]] = x[accept]
        pending = pending[~accept]
        if pending.size == 0:
            break
    else:
        raise BudgetError(
            f"tempered stable sampler left {pending.size} of {slots} slots "
            f"unfilled after {max_rounds} rejection rounds")
    total = out.reshape(n_out, n_pieces).sum(axis=1)
    if size is None:
        return float(total[0])
    return total.reshape(size)


def sample_gamma_increment(a: float, c: float, scale_t: float, rng, size=None):
    """Sample a gamma increment: shape c*scale_t, scale a.

    Draws whose double representation would round to zero (possible for
    very small shapes) are clamped to the smallest positive double so the
    strict-positivity contract holds.
    """
    _require(_finite_pos(a), f"a must be > 0, got {a!r}")
    _require(_finite_pos(c), f"c must be > 0, got {c!r}")
    _require(_finite_pos(scale_t), f"scale_t must be > 0, got {scale_t!r}")
    gen = _generator(rng)
    x = gen.gamma(shape=float(c) * float(scale_t), scale=float(a), size=size)
    if size is None:
        return float(max(x, _POS_MIN))
    return np.fmax(x, _POS_MIN)


def _stable_pdf_standard(alpha: float, x: float) -> float:
    """Density at x of the one-sided stable law with Laplace transform e^(-z^alpha).

    Single-integral representation over an angle; the integrand is assembled
    in log space, and breakpoints are clustered toward the angle's upper
    endpoint where the integrand develops a boundary layer for large x.
    """
    if x <= 0.0:
        return 0.0
    frac = alpha / (1.0 - alpha)
    log_y = -frac * math.log(x)

    def f(w: float) -> float:
        u = math.pi - w
        if u <= 0.0 or u >= math.pi:
            return 0.0
        la = (alpha * math.log(math.sin(alpha * u))
              + (1.0 - alpha) * math.log(math.sin((1.0 - alpha) * u))
              - math.log(math.sin(u))) / (1.0 - alpha)
        t = la + log_y
        if t > 690.0:
            return 0.0
        e = la - math.exp(t)
        return math.exp(e) if e > -745.0 else 0.0

    pts = list(math.pi * np.geomspace(1e-13, 0.9, 28))
    val = integrate.quad(f, 0.0, math.pi, points=pts, limit=500,
                         epsabs=1e-280, epsrel=1e-10)[0]
    return frac / math.pi * x ** (-1.0 / (1.0 - alpha)) * val


def pdf_stable(alpha: float, sigma: float, x: float) -> float:
    """Density of the totally skewed stable law with stability alpha, scale sigma.

    The scale follows the standard S1 parameterization, so the Laplace
    transform is exp(-sigma^alpha z^alpha / cos(pi alpha / 2)).
    """
    _require(_finite_pos(alpha) and alpha < 1.0, f"alpha must lie in (0, 1), got {alpha!r}")
    _require(_finite_pos(sigma), f"sigma must be > 0, got {sigma!r}")
    _require(isinstance(x, (int, float, np.floating)) and math.isfinite(float(x))
             and float(x) > 0.0, f"x must be finite and > 0, got {x!r}")
    alpha = float(alpha)
    spatial = float(sigma) / math.cos(math.pi * alpha / 2.0) ** (1.0 / alpha)
    return _stable_pdf_standard(alpha, float(x) / spatial) / spatial


def pdf_tempered_stable(alpha: float, lam: float, c: float, x: float) -> float:
    """Unit-time tempered stable density: exponential tilt of a stable law.

    lam = 0 is allowed here and reduces to the untempered stable density
    with scale (c cos(pi alpha / 2))^(1/alpha).
    """
    _require(_finite_pos(alpha) and alpha < 1.0, f"alpha must lie in (0, 1), got {alpha!r}")
    _require(isinstance(lam, (int, float, np.floating)) and math.isfinite(float(lam))
             and float(lam) >= 0.0, f"lam must be >= 0, got {lam!r}")
    _require(_finite_pos(c), f"c must be > 0, got {c!r}")
    alpha = float(alpha)
    lam = float(lam)
    sigma = (float(c) * math.cos(math.pi * alpha / 2.0)) ** (1.0 / alpha)
    base = pdf_stable(alpha, sigma, x)
    if base == 0.0:
        return 0.0
    arg = -lam * float(x) + float(c) * lam ** alpha
    return math.exp(arg) * base if arg > -745.0 else 0.0


def pdf_gamma(a: float, c_shape: float, x: float) -> float:
    """Gamma density with scale a and shape c_shape, evaluated in log space."""
    _require(_finite_pos(a), f"a must be > 0, got {a!r}")
    _require(_finite_pos(c_shape), f"c_shape must be > 0, got {c_shape!r}")
    _require(isinstance(x, (int, float, np.floating)) and math.isfinite(float(x))
             and float(x) > 0.0, f"x must be finite and > 0, got {x!r}")
    a = float(a)
    c_shape = float(c_shape)
    x = float(x)
    log_p = (c_shape - 1.0) * math.log(x) - x / a \
        - math.lgamma(c_shape) - c_shape * math.log(a)
    return math.exp(log_p) if log_p > -745.0 else 0.0


def unit_time_mean(spec: SubordinatorSpec) -> float:
    """Mean of U(1) for the family; infinite for the stable subordinator."""
    if isinstance(spec, StableSpec):
        return math.inf
    if isinstance(spec, TemperedStableSpec):
        return spec.c * spec.alpha * spec.lam ** (spec.alpha - 1.0)
    if isinstance(spec, GammaSpec):
        return spec.a * spec.c
    raise DomainError(f"unsupported spec type {type(spec).__name__}")
