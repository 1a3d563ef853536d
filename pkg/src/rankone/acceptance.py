"""Acceptance suite: the quantitative checks the package promises to pass.

Each criterion function runs one self-contained check against frozen
oracle values and returns a result record; run_all executes the full
suite in order.  The checks pin concrete groups, grids, seeds, and
tolerances so that a pass is reproducible bit for bit.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional

import numpy as np

from .ballavg import (
    ball_volume,
    psi_asymptotic_constant,
    psi_lipschitz_check,
    psi_on_grid,
)
from .groups import complementary, make_group, principal, trivial
from .model import (
    PuritySpectrum,
    SpectralVector,
    direction_convergence,
    finite_sum_check,
    theorem_mean_report,
)
from .spherical import certify_decay_bound, hc_c_function, spherical_fn_many
from .surface import (
    ConstantObservable,
    CuspIndicator,
    decay_scan,
    ks_radial_test,
    mc_average,
)

__all__ = ["CriterionResult", "ALL_CRITERIA", "run_all"]


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"criterion {self.number:02d} {self.name}: {status} ({self.detail}; {self.seconds:.1f}s)"


def _h3():
    return make_group("so", 3)


def criterion_spherical_oracle() -> CriterionResult:
    """Closed-form check of the spherical functions on hyperbolic 3-space."""
    start = time.perf_counter()
    group = _h3()
    ts = np.logspace(math.log10(0.01), math.log10(25.0), 200)
    worst = 0.0
    for s in np.arange(1, 11) / 10.0:
        vals = spherical_fn_many(group, complementary(float(s)), ts)
        oracle = np.sinh(s * ts) / (s * np.sinh(ts))
        worst = max(worst, float(np.max(np.abs(vals - oracle))))
    for lam in (0.5, 1.0, 2.0):
        vals = spherical_fn_many(group, principal(lam), ts)
        oracle = np.sin(lam * ts) / (lam * np.sinh(ts))
        worst = max(worst, float(np.max(np.abs(vals - oracle))))
    elapsed = time.perf_counter() - start
    passed = worst <= 1e-10 and elapsed < 10.0
    return CriterionResult(
        1, "spherical oracle", passed, f"worst abs err {worst:.2e}", elapsed
    )


def criterion_c_function() -> CriterionResult:
    """Scaled spherical values at t=40 against the gamma-factor constant."""
    start = time.perf_counter()
    group = _h3()
    t = 40.0
    worst = 0.0
    for s in (0.3, 0.5, 0.9):
        phi = float(spherical_fn_many(group, complementary(s), np.array([t]))[0])
        scaled = phi * math.exp((group.rho - s) * t)
        c = hc_c_function(group, complementary(s)).value.real
        worst = max(worst, abs(scaled - c) / abs(c), abs(c - 1.0 / s) * s)
    elapsed = time.perf_counter() - start
    passed = worst <= 1e-8
    return CriterionResult(
        2, "c-function consistency", passed, f"worst rel err {worst:.2e}", elapsed
    )


def criterion_decay_certificates() -> CriterionResult:
    """Empirical decay constants are finite, and exactly 1 for the constants."""
    start = time.perf_counter()
    group = _h3()
    params = [
        trivial(),
        complementary(0.3),
        complementary(0.5),
        complementary(0.9),
        principal(0.5),
        principal(1.0),
        principal(2.0),
    ]
    grid = np.concatenate([[0.0], np.linspace(0.01, 40.0, 120)])
    certified = certify_decay_bound(group, params, grid)
    finite = all(math.isfinite(c) for _, c in certified)
    trivial_const = next(c for p, c in certified if p.is_trivial)
    passed = finite and trivial_const == 1.0
    elapsed = time.perf_counter() - start
    worst = max(c for _, c in certified)
    return CriterionResult(
        3,
        "decay certificates",
        passed,
        f"max constant {worst:.4f}, constants exactly {trivial_const}",
        elapsed,
    )


def criterion_ball_volume() -> CriterionResult:
    """Quadrature against the closed-form volume and its growth constant.

    The normalized limit e^{-2t} m(B_t) of the closed form
    (sinh t cosh t - t)/2 is 1/8, which is the frozen expected value.
    """
    start = time.perf_counter()
    group = _h3()
    worst = 0.0
    for t in np.linspace(0.1, 30.0, 60):
        v = ball_volume(group, float(t))
        oracle = (math.sinh(t) * math.cosh(t) - t) / 2.0
        worst = max(worst, abs(v - oracle) / oracle)
    norm_limit = ball_volume(group, 30.0) * math.exp(-60.0)
    limit_err = abs(norm_limit - 0.125)
    elapsed = time.perf_counter() - start
    passed = worst <= 1e-10 and limit_err <= 1e-6
    return CriterionResult(
        4,
        "ball volume",
        passed,
        f"worst rel err {worst:.2e}, normalized limit off by {limit_err:.2e}",
        elapsed,
    )


def criterion_psi_asymptotics() -> CriterionResult:
    """Scaled ball averages settle on the elementary-integration constant."""
    start = time.perf_counter()
    group = _h3()
    s = 0.5
    vals = psi_on_grid(group, complementary(s), np.array([30.0, 40.0]))
    scaled = vals * np.exp((group.rho - s) * np.array([30.0, 40.0]))
    rel_diff = abs(scaled[1] - scaled[0]) / abs(scaled[1])
    limit = psi_asymptotic_constant(group, complementary(s))
    oracle = float(Fraction(8, 3))
    limit_err = abs(limit - oracle)
    elapsed = time.perf_counter() - start
    passed = rel_diff < 1e-3 and limit_err <= 1e-6
    return CriterionResult(
        5,
        "psi asymptotics",
        passed,
        f"scaled drift {rel_diff:.2e}, limit off by {limit_err:.2e}",
        elapsed,
    )


def criterion_shell_lipschitz() -> CriterionResult:
    """Ball-average increments stay within the volume-shell bound."""
    start = time.perf_counter()
    group = _h3()
    params = [trivial(), complementary(0.5), principal(1.0)]
    min_slack = math.inf
    for t in (1.0, 2.0, 5.0, 10.0):
        for eps in (0.01, 0.1, 0.5):
            for param in params:
                jump, bound = psi_lipschitz_check(group, param, t, eps)
                min_slack = min(min_slack, bound - jump)
    elapsed = time.perf_counter() - start
    passed = min_slack >= -1e-9
    return CriterionResult(
        6, "shell Lipschitz bound", passed, f"min slack {min_slack:.2e}", elapsed
    )


def _reference_spectrum():
    group = _h3()
    spec = PuritySpectrum(
        group=group,
        atoms=(1.0, 0.7),
        r=0.4,
        omega=((complementary(0.4), 1.0), (principal(1.0), 1.0)),
    )
    f = SpectralVector(atom_norms=(1.0, 1.0), omega_norms=(1.0, 1.0))
    return spec, f


def criterion_mean_envelope() -> CriterionResult:
    """Spectral-model deviations stay under the drifting exponential envelope."""
    start = time.perf_counter()
    spec, f = _reference_spectrum()
    grid = np.linspace(1.0, 40.0, 79)
    report = theorem_mean_report(spec, f, grid)
    refined = theorem_mean_report(spec, f, np.linspace(1.0, 40.0, 157))
    sup_change = abs(refined.sup_ratio - report.sup_ratio) / report.sup_ratio
    exponent_err = abs(report.fitted_exponent - (-0.6))
    elapsed = time.perf_counter() - start
    passed = (
        math.isfinite(report.sup_ratio)
        and sup_change < 0.01
        and exponent_err <= 0.05
    )
    return CriterionResult(
        7,
        "mean decay envelope",
        passed,
        f"sup {report.sup_ratio:.4f}, refinement drift {sup_change:.2e}, "
        f"exponent {report.fitted_exponent:.4f}",
        elapsed,
    )


def criterion_direction() -> CriterionResult:
    """Normalized deviation aligns with the leading nonconstant atom."""
    start = time.perf_counter()
    spec, f = _reference_spectrum()
    dists = direction_convergence(spec, f, np.array([10.0, 20.0, 40.0]))
    final = float(dists[-1])
    elapsed = time.perf_counter() - start
    passed = final < 1e-3 and bool(np.all(np.diff(dists) < 0))
    return CriterionResult(
        8, "direction convergence", passed, f"distance at t=40 is {final:.2e}", elapsed
    )


def criterion_grid_summability() -> CriterionResult:
    """Refining-grid series is dominated termwise and Cauchy at the recorded M."""
    start = time.perf_counter()
    report = finite_sum_check(0.5, 200, enumerate_limit=60)
    elapsed = time.perf_counter() - start
    passed = (
        report.domination_checked_to == 60
        and report.domination_min_slack >= -1e-12
        and report.enumeration_max_rel_gap < 1e-12
        and report.cauchy_m == 100
        and report.cauchy_gap < 1e-6
    )
    return CriterionResult(
        9,
        "grid summability",
        passed,
        f"min domination slack {report.domination_min_slack:.2e}, "
        f"|S(200)-S(100)| = {report.cauchy_gap:.2e}",
        elapsed,
    )


def criterion_mc_ergodic() -> CriterionResult:
    """Monte Carlo ball average converges to the space average."""
    start = time.perf_counter()
    target = 3.0 / (2.0 * math.pi)
    run = mc_average(6.0, 1_000_000, CuspIndicator(2.0), 42)
    dev = abs(run.estimate - target)
    const = mc_average(6.0, 10_000, ConstantObservable(), 42)
    ks = ks_radial_test(6.0, 100_000, 42)
    elapsed = time.perf_counter() - start
    passed = (
        dev <= 4.0 * run.standard_error
        and const.estimate == 1.0
        and const.standard_error == 0.0
        and ks.ok
        and elapsed < 120.0
    )
    return CriterionResult(
        10,
        "MC ergodic limit",
        passed,
        f"deviation {dev:.2e} vs 4se {4*run.standard_error:.2e}, "
        f"KS {ks.statistic:.4f} < {ks.threshold:.4f}",
        elapsed,
    )


def criterion_mc_decay_scan() -> CriterionResult:
    """MC deviations across radii stay inside envelope or noise band."""
    start = time.perf_counter()
    report = decay_scan(np.arange(2.0, 9.0), 1_000_000, CuspIndicator(2.0), 42)
    bounds = np.maximum(report.envelopes, 4.0 * report.stderrs)
    ok = bool(np.all(report.deviations <= bounds * (1.0 + 1e-12)))
    elapsed = time.perf_counter() - start
    passed = ok and report.fitted_exponent is not None and report.fitted_exponent < 0.0
    return CriterionResult(
        11,
        "MC decay scan",
        passed,
        f"envelope C {report.fitted_constant:.4f}, "
        f"exponent {report.fitted_exponent:.3f}",
        elapsed,
    )


ALL_CRITERIA: List[Callable[[], CriterionResult]] = [
    criterion_spherical_oracle,
    criterion_c_function,
    criterion_decay_certificates,
    criterion_ball_volume,
    criterion_psi_asymptotics,
    criterion_shell_lipschitz,
    criterion_mean_envelope,
    criterion_direction,
    criterion_grid_summability,
    criterion_mc_ergodic,
    criterion_mc_decay_scan,
]


def run_all(report: Optional[Callable[[str], None]] = None) -> List[CriterionResult]:
    """Run every criterion in order, optionally streaming one line per result."""
    results = []
    for check in ALL_CRITERIA:
        result = check()
        results.append(result)
        if report is not None:
            report(result.line())
    return results
