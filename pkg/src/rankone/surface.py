"""Monte Carlo ball averages on the modular surface.

The group is PSL(2, R) acting on the upper half-plane, the quotient is by
PSL(2, Z), and the uniform measure on a Riemannian ball is sampled in
Cartan coordinates: two projective rotation angles plus a radius drawn by
inverting the cached volume profile.  Orbit points are folded back into
the standard fundamental domain, where indicator observables are compared
against their exact normalized areas.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .ballavg import VolumeProfile, build_volume_profile
from .errors import ConvergenceError, ValidationError
from .groups import make_group
from .model import DecayReport

__all__ = [
    "HPoint",
    "Mat2",
    "MCRun",
    "KSResult",
    "CuspIndicator",
    "DiskIndicator",
    "ConstantObservable",
    "hyp_dist",
    "cartan_sample",
    "reduce_to_domain",
    "observable_eval",
    "observable_mean",
    "parse_observable",
    "mc_average",
    "ks_radial_test",
    "decay_scan",
    "surface_group",
]

_CHUNK = 65536
_DOMAIN_EDGE = 1.0 - 1e-15
_WORD_TOL = 1e-9
# Hyperbolic area of the modular surface.
_SURFACE_AREA = math.pi / 3.0


def surface_group():
    """The rank-one group realized here: SO(2,1), rho = 1/2."""
    return make_group("so", 2)


@dataclass(frozen=True)
class HPoint:
    """Upper half-plane point."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and self.y > 0.0):
            raise ValidationError("point needs finite x and y > 0")

    def as_complex(self) -> complex:
        return complex(self.x, self.y)


def _mobius_xy(a, b, c, d, x, y):
    # Real Moebius action with the imaginary part written explicitly as
    # det * y / |cz + d|^2, which keeps it positive for det = 1.
    den = (c * x + d) ** 2 + (c * y) ** 2
    xn = (a * x + b) * (c * x + d) + a * c * y * y
    return xn / den, y / den


@dataclass(frozen=True)
class Mat2:
    """Projective real 2x2 matrix with unit determinant."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if not (math.isfinite(det) and det > 0.0):
            raise ValidationError("matrix must have positive finite determinant")
        if abs(det - 1.0) > 1e-12:
            scale = 1.0 / math.sqrt(det)
            for name in ("a", "b", "c", "d"):
                object.__setattr__(self, name, getattr(self, name) * scale)
            det = self.a * self.d - self.b * self.c
        if abs(det - 1.0) > 1e-12:
            raise ValidationError("determinant not normalizable to 1")

    def mul(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inv(self) -> "Mat2":
        return Mat2(self.d, -self.b, -self.c, self.a)

    def act(self, z: HPoint) -> HPoint:
        x, y = _mobius_xy(self.a, self.b, self.c, self.d, z.x, z.y)
        return HPoint(float(x), float(y))


def hyp_dist(z: HPoint, w: HPoint) -> float:
    """Distance in the hyperbolic metric of the upper half-plane."""
    return float(_dist_xy(z.x, z.y, w.x, w.y))


def _dist_xy(x1, y1, x2, y2):
    q = ((x1 - x2) ** 2 + (y1 - y2) ** 2) / (2.0 * y1 * y2)
    return np.arccosh(1.0 + q)


def _rotation(theta: float) -> Mat2:
    return Mat2(math.cos(theta), -math.sin(theta), math.sin(theta), math.cos(theta))


def cartan_sample(profile: VolumeProfile, t: float, rng: np.random.Generator) -> Mat2:
    """One draw from the uniform measure on the radius-t ball.

    The element is k(theta1) a_tau k(theta2) with both angles uniform on
    [0, pi) and tau inverted from the cached radial CDF, so the distance
    of g.i to i is exactly the drawn tau.
    """
    if t < 0.0:
        raise ValidationError("radius t must be nonnegative")
    if t == 0.0:
        theta = rng.uniform(0.0, math.pi, 2)
        return _rotation(theta[0]).mul(_rotation(theta[1]))
    theta1, theta2, tau = _draw_cartan(profile, t, rng, 1)
    half = math.exp(0.5 * float(tau[0]))
    a_tau = Mat2(half, 0.0, 0.0, 1.0 / half)
    return _rotation(float(theta1[0])).mul(a_tau).mul(_rotation(float(theta2[0])))


def _draw_cartan(profile, t, rng, n):
    # Draw order is fixed: theta1, theta2, then the radial uniform.
    theta1 = rng.uniform(0.0, math.pi, n)
    theta2 = rng.uniform(0.0, math.pi, n)
    u = rng.uniform(0.0, 1.0, n)
    tau = profile.sample_radius(float(t), u)
    return theta1, theta2, tau


# --------------------------------------------------------------------------
# Reduction to the standard fundamental domain.


def _reduce_batch(x, y, cap: int = 10**6):
    """Fold points into {|Re| <= 1/2, |z| >= 1}, accumulating the word.

    Word entries are integers carried in float64, exact up to 2^53; the
    accumulated matrix is verified against input and output before
    returning.
    """
    x = np.array(x, dtype=np.float64, copy=True)
    y = np.array(y, dtype=np.float64, copy=True)
    x_in = x.copy()
    y_in = y.copy()
    wa = np.ones_like(x)
    wb = np.zeros_like(x)
    wc = np.zeros_like(x)
    wd = np.ones_like(x)
    active = np.ones(x.shape, dtype=bool)
    for _ in range(cap):
        n = np.round(x[active])
        if n.size:
            x[active] -= n
            # T^{-n} on the left: top row picks up -n times the bottom row.
            wa[active] -= n * wc[active]
            wb[active] -= n * wd[active]
        r2 = x[active] ** 2 + y[active] ** 2
        inside = r2 < _DOMAIN_EDGE
        if not np.any(inside):
            # Translation alone may have finished other points too.
            sub = np.abs(x[active]) <= 0.5
            still = active.copy()
            still[active] = ~sub
            active = still
            if not np.any(active):
                break
            continue
        idx = np.flatnonzero(active)[inside]
        r2i = r2[inside]
        xi = x[idx]
        x[idx] = -xi / r2i
        y[idx] = y[idx] / r2i
        # S on the left swaps the rows with a sign.
        wa[idx], wb[idx], wc[idx], wd[idx] = -wc[idx], -wd[idx], wa[idx], wb[idx]
    else:
        raise ConvergenceError("reduction did not terminate within the iteration cap")
    if np.any(np.abs(x) > 0.5 + 1e-12) or np.any(x**2 + y**2 < 1.0 - 1e-12):
        raise ConvergenceError("reduction left a point outside the domain")
    vx, vy = _mobius_xy(wa, wb, wc, wd, x_in, y_in)
    scale = np.maximum(1.0, y)
    if np.any(np.abs(vx - x) > _WORD_TOL * scale) or np.any(np.abs(vy - y) > _WORD_TOL * scale):
        raise ConvergenceError("accumulated word does not reproduce the reduced point")
    return x, y, (wa, wb, wc, wd)


def reduce_to_domain(z: HPoint) -> Tuple[HPoint, Mat2]:
    """Reduce one point, returning it with the group word that was applied."""
    x, y, (wa, wb, wc, wd) = _reduce_batch(np.array([z.x]), np.array([z.y]))
    word = Mat2(float(wa[0]), float(wb[0]), float(wc[0]), float(wd[0]))
    return HPoint(float(x[0]), float(y[0])), word


# --------------------------------------------------------------------------
# Observables on the fundamental domain.


class CuspIndicator:
    """Indicator of the cusp neighborhood Im z > height."""

    def __init__(self, height: float):
        if not height >= 1.0:
            raise ValidationError("cusp height must be >= 1 to stay in the domain")
        self.height = float(height)

    def label(self) -> str:
        return f"cusp:{self.height:g}"

    def mean(self) -> float:
        return (1.0 / self.height) / _SURFACE_AREA

    def eval_batch(self, x, y):
        return (np.asarray(y) > self.height).astype(np.float64)


class DiskIndicator:
    """Indicator of a hyperbolic disk contained in the fundamental domain."""

    def __init__(self, center: HPoint, radius: float):
        if not radius > 0.0:
            raise ValidationError("disk radius must be positive")
        self.center = center
        self.radius = float(radius)
        cx, cy = center.x, center.y
        if abs(cx) > 0.5 or cx * cx + cy * cy < 1.0:
            raise ValidationError("disk center must lie in the fundamental domain")
        sr = math.sinh(self.radius)
        # Distances to the three boundary geodesics: the two vertical
        # lines and the unit circle.
        to_lines = min(0.5 - cx, 0.5 + cx) / cy
        to_circle = (cx * cx + cy * cy - 1.0) / (2.0 * cy)
        if min(to_lines, to_circle) < sr:
            raise ValidationError("disk must be contained in the fundamental domain")

    def label(self) -> str:
        return f"disk:{self.center.x:g},{self.center.y:g},{self.radius:g}"

    def mean(self) -> float:
        return 2.0 * math.pi * (math.cosh(self.radius) - 1.0) / _SURFACE_AREA

    def eval_batch(self, x, y):
        d = _dist_xy(np.asarray(x), np.asarray(y), self.center.x, self.center.y)
        return (d < self.radius).astype(np.float64)


class ConstantObservable:
    """The constant function 1; its average is exact for any sampling."""

    def label(self) -> str:
        return "const"

    def mean(self) -> float:
        return 1.0

    def eval_batch(self, x, y):
        return np.ones_like(np.asarray(x, dtype=np.float64))


def observable_eval(obs, z: HPoint) -> float:
    """Value at one reduced point."""
    return float(obs.eval_batch(np.array([z.x]), np.array([z.y]))[0])


def observable_mean(obs) -> float:
    """Exact space average of the observable on the modular surface."""
    return float(obs.mean())


def parse_observable(text: str):
    """Parse 'cusp:Y', 'disk:cx,cy,r', or 'const'."""
    name, _, rest = text.partition(":")
    try:
        if name == "cusp":
            return CuspIndicator(float(rest))
        if name == "disk":
            cx, cy, r = (float(v) for v in rest.split(","))
            return DiskIndicator(HPoint(cx, cy), r)
        if name == "const" and not rest:
            return ConstantObservable()
    except ValidationError:
        raise
    except ValueError as exc:
        raise ValidationError(f"malformed observable {text!r}: {exc}") from None
    raise ValidationError(f"unknown observable {text!r}")


# --------------------------------------------------------------------------
# Monte Carlo driver.


@dataclass(frozen=True)
class MCRun:
    """Result of one Monte Carlo ball average."""

    t: float
    samples: int
    seed: int
    observable: str
    base: HPoint
    estimate: float
    standard_error: float


def _chunk_sizes(n: int, chunk: int):
    sizes = [chunk] * (n // chunk)
    if n % chunk:
        sizes.append(n % chunk)
    return sizes


def _run_chunk(profile, t, base, obs, seq, size, apply_inverse):
    rng = np.random.Generator(np.random.PCG64(seq))
    theta1, theta2, tau = _draw_cartan(profile, t, rng, size)
    if apply_inverse:
        # g^{-1} x0 = k(-theta2) a_{-tau} k(-theta1) x0.
        x, y = _mobius_xy(np.cos(theta1), np.sin(theta1), -np.sin(theta1), np.cos(theta1), base.x, base.y)
        scale = np.exp(-tau)
        x, y = x * scale, y * scale
        x, y = _mobius_xy(np.cos(theta2), np.sin(theta2), -np.sin(theta2), np.cos(theta2), x, y)
    else:
        # g x0 = k(theta1) a_tau k(theta2) x0.
        x, y = _mobius_xy(np.cos(theta2), -np.sin(theta2), np.sin(theta2), np.cos(theta2), base.x, base.y)
        scale = np.exp(tau)
        x, y = x * scale, y * scale
        x, y = _mobius_xy(np.cos(theta1), -np.sin(theta1), np.sin(theta1), np.cos(theta1), x, y)
    xr, yr, _ = _reduce_batch(x, y)
    values = obs.eval_batch(xr, yr)
    return float(np.sum(values)), float(np.sum(values * values))


def mc_average(
    t: float,
    n: int,
    obs,
    seed: int,
    base: Optional[HPoint] = None,
    threads: Optional[int] = None,
    apply_inverse: bool = True,
) -> MCRun:
    """Monte Carlo estimate of the ball average of obs at the base point.

    Samples are drawn in fixed-size chunks, each from its own substream
    of the master seed, and reduced in chunk order, so the estimate is
    bit-identical for any thread count.  At t = 0 the average degenerates
    to the value at the base point.
    """
    if t < 0.0:
        raise ValidationError("radius t must be nonnegative")
    n = int(n)
    if n < 1:
        raise ValidationError("sample count must be positive")
    if base is None:
        base = HPoint(0.1, 1.3)
    label = obs.label()
    if t == 0.0:
        z, _ = reduce_to_domain(base)
        value = observable_eval(obs, z)
        return MCRun(0.0, n, int(seed), label, base, value, 0.0)
    profile = build_volume_profile(surface_group(), float(t))
    sizes = _chunk_sizes(n, _CHUNK)
    seqs = np.random.SeedSequence(int(seed)).spawn(len(sizes))
    jobs = [
        (profile, float(t), base, obs, seq, size, apply_inverse)
        for seq, size in zip(seqs, sizes)
    ]
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            partials = list(pool.map(lambda args: _run_chunk(*args), jobs))
    else:
        partials = [_run_chunk(*args) for args in jobs]
    total = sum(p[0] for p in partials)
    total_sq = sum(p[1] for p in partials)
    estimate = total / n
    if n > 1:
        variance = max(total_sq - n * estimate * estimate, 0.0) / (n - 1)
    else:
        variance = 0.0
    stderr = math.sqrt(variance / n)
    return MCRun(float(t), n, int(seed), label, base, estimate, stderr)


@dataclass(frozen=True)
class KSResult:
    """Kolmogorov-Smirnov audit of the sampled radial law."""

    t: float
    samples: int
    statistic: float
    threshold: float

    @property
    def ok(self) -> bool:
        return self.statistic < self.threshold


def ks_radial_test(t: float, n: int, seed: int, profile: Optional[VolumeProfile] = None) -> KSResult:
    """Compare the empirical law of the sampled radius with the exact CDF.

    The threshold 1.63 / sqrt(n) is the asymptotic 1 percent critical
    value of the two-sided statistic.
    """
    if not t > 0.0:
        raise ValidationError("radius t must be positive")
    n = int(n)
    if n < 100:
        raise ValidationError("KS test needs at least 100 samples")
    if profile is None:
        profile = build_volume_profile(surface_group(), float(t))
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))
    _, _, tau = _draw_cartan(profile, t, rng, n)
    tau = np.sort(tau)
    cdf = profile.cdf(tau, float(t))
    grid = np.arange(1, n + 1, dtype=np.float64) / n
    statistic = float(np.max(np.maximum(grid - cdf, cdf - (grid - 1.0 / n))))
    return KSResult(float(t), n, statistic, 1.63 / math.sqrt(n))


def decay_scan(
    t_grid,
    n: int,
    obs,
    seed: int,
    base: Optional[HPoint] = None,
    threads: Optional[int] = None,
) -> DecayReport:
    """Deviation of MC ball averages from the space mean, against t e^{-t/2}.

    The envelope constant is the empirical supremum of deviation over the
    shape, taken on the points whose deviation stands above the 4-sigma
    Monte Carlo noise band, so the reported envelope genuinely bounds the
    signal; the decay exponent is a separate least-squares fit reported
    with its uncertainty.  When every point is noise the constant is zero
    and only the noise band remains.
    """
    ts = np.atleast_1d(np.asarray(t_grid, dtype=np.float64))
    if ts.size == 0:
        raise ValidationError("scan grid must be nonempty")
    if np.min(ts) < 1.0 or np.max(ts) > 10.0:
        raise ValidationError("scan grid must lie in [1, 10]")
    if ts.size > 1 and np.min(np.diff(ts)) <= 0.0:
        raise ValidationError("scan grid must be strictly increasing")
    mean = observable_mean(obs)
    seeds = np.random.SeedSequence(int(seed)).generate_state(ts.size, dtype=np.uint64)
    estimates = np.empty_like(ts)
    stderrs = np.empty_like(ts)
    for i, t in enumerate(ts):
        run = mc_average(float(t), n, obs, int(seeds[i]), base=base, threads=threads)
        estimates[i] = run.estimate
        stderrs[i] = run.standard_error
    deviations = np.abs(estimates - mean)
    shape = ts * np.exp(-0.5 * ts)
    signal = deviations > 4.0 * stderrs
    fitted_constant = 0.0
    fitted_exponent = None
    exponent_stderr = None
    if np.any(signal):
        fitted_constant = float(np.max(deviations[signal] / shape[signal]))
        if np.count_nonzero(signal) >= 3:
            coef, cov = np.polyfit(ts[signal], np.log(deviations[signal]), 1, cov=True)
            fitted_exponent = float(coef[0])
            exponent_stderr = float(math.sqrt(max(cov[0, 0], 0.0)))
    envelopes = fitted_constant * shape
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(envelopes > 0.0, deviations / np.where(envelopes > 0.0, envelopes, 1.0), 0.0)
    sup_ratio = float(np.max(ratios)) if ratios.size else 0.0
    return DecayReport(
        ts=ts,
        deviations=deviations,
        envelopes=envelopes,
        ratios=ratios,
        sup_ratio=sup_ratio,
        fitted_exponent=fitted_exponent,
        fitted_constant=fitted_constant,
        fitted_exponent_stderr=exponent_stderr,
        estimates=estimates,
        stderrs=stderrs,
    )
