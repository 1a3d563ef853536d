"""Spherical functions and their decay data on a rank-one group.

With alpha, beta the Jacobi-type parameters of the group and s the
spectral coordinate (s = i*lam on the tempered axis), the spherical
function along the Cartan coordinate t >= 0 is

    phi_s(t) = 2F1((rho+s)/2, (rho-s)/2; alpha+1; -sinh(t)^2),

so phi is 1 at t = 0, identically 1 at s = rho, and bounded by 1.  Its
large-t behaviour for 0 < Re s < rho is phi_s(t) ~ c(s) e^{-(rho-s)t}
with the gamma-quotient coefficient computed by hc_c_function.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from .errors import ConvergenceError, ValidationError
from .groups import RankOneGroup, SpectralParam, check_param
from .hyper import gauss_2f1_neg, ln_gamma

_LN2 = math.log(2.0)
_UNIT_SLACK = 1e-11  # |phi| may exceed 1 by roundoff only


@dataclass(frozen=True)
class SphericalValue:
    """phi_s(a_t) together with the point where it was evaluated."""

    t: float
    param: SpectralParam
    value: float


@dataclass(frozen=True)
class CFunctionValue:
    """Decay coefficient c(s); complex on the tempered axis."""

    param: SpectralParam
    value: complex

    @property
    def magnitude(self) -> float:
        return abs(self.value)


def spherical_fn_many(group: RankOneGroup, param: SpectralParam, ts) -> np.ndarray:
    """phi_s(a_t) on an array of Cartan coordinates t >= 0."""
    ts = np.asarray(ts, dtype=np.float64)
    if ts.size and np.min(ts) < 0.0:
        raise ValidationError("t >= 0 required")
    check_param(group, param)
    if param.is_trivial:
        return np.ones_like(ts)

    s = param.s_complex(group)
    rho = group.rho
    a = (rho + s) / 2.0
    b = (rho - s) / 2.0
    c = group.alpha + 1.0
    if b == 0.0:  # s = rho: the constant spherical function
        return np.ones_like(ts)

    x = -np.sinh(ts) ** 2
    values = gauss_2f1_neg(_tidy(a), _tidy(b), c, x)
    values = np.real(np.atleast_1d(values))
    values[ts == 0.0] = 1.0

    overshoot = np.max(np.abs(values)) - 1.0
    if overshoot > _UNIT_SLACK:
        raise ConvergenceError(
            f"|phi| exceeded 1 by {overshoot:.3e} for {param.label()}; evaluation is unreliable"
        )
    return np.clip(values, -1.0, 1.0)


def spherical_fn(group: RankOneGroup, param: SpectralParam, t: float) -> SphericalValue:
    """Single-point spherical function value."""
    value = spherical_fn_many(group, param, np.array([float(t)]))[0]
    return SphericalValue(t=float(t), param=param, value=float(value))


def _tidy(z: complex):
    return z if z.imag != 0.0 else float(z.real)


def hc_c_function(group: RankOneGroup, param: SpectralParam) -> CFunctionValue:
    """Gamma-quotient decay coefficient.

    c(s) = 2^{rho-s} Gamma(alpha+1) Gamma(s)
           / [Gamma((rho+s)/2) Gamma((s+alpha-beta+1)/2)],

    defined for complementary parameters 0 < s <= rho' and tempered
    parameters with lam > 0; the constant function and the s = 0 boundary
    are rejected.
    """
    check_param(group, param)
    if param.is_trivial:
        raise ValidationError("the constant spherical function has no decay coefficient")
    s = param.s_complex(group)
    if s == 0.0:
        raise ValidationError("s = 0 boundary point has a c-function pole")
    rho, alpha, beta = group.rho, group.alpha, group.beta
    log_value = (
        (rho - s) * _LN2
        + ln_gamma(alpha + 1.0)
        + ln_gamma(_tidy(s))
        - ln_gamma(_tidy((rho + s) / 2.0))
        - ln_gamma(_tidy((s + alpha - beta + 1.0) / 2.0))
    )
    return CFunctionValue(param=param, value=cmath.exp(log_value))


def certify_decay_bound(
    group: RankOneGroup,
    params: Iterable[SpectralParam],
    t_grid: Sequence[float],
) -> List[Tuple[SpectralParam, float]]:
    """Empirical constant for the first-order decay bound.

    For each parameter, returns C* = max over the grid of
    |phi_s(a_t)| e^{(rho - re s) t} / (1 + t); C* is finite because the
    bound it certifies holds with some constant for every parameter.
    """
    ts = np.asarray(list(t_grid), dtype=np.float64)
    if ts.size == 0:
        raise ValidationError("empty t grid")
    results: List[Tuple[SpectralParam, float]] = []
    for param in params:
        decay = group.rho - param.re_s(group)
        values = np.abs(spherical_fn_many(group, param, ts))
        ratio = values * np.exp(decay * ts) / (1.0 + ts)
        c_star = float(np.max(ratio))
        if not math.isfinite(c_star):
            raise ConvergenceError(f"decay certificate diverged for {param.label()}")
        results.append((param, c_star))
    return results
