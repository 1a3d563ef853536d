"""Rank-one simple Lie group data and spectral parameters.

A group is identified by its restricted-root multiplicities (n1, n2).  All
structural constants (rho, and the Jacobi-type parameters alpha, beta) are
kept as exact rationals so the defining identities hold with no roundoff:

    rho   = (n1 + 2*n2) / 2
    alpha = (n1 + n2 - 1) / 2
    beta  = (n2 - 1) / 2
    alpha + beta + 1 == rho

The positive spherical dual is parametrized by {rho} u (0, rho'] u i*R+,
split here into a three-way tagged parameter: the constant function, the
real interval (decaying, positive definite), and the tempered axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

from .errors import ValidationError

_NAMED_MULTIPLICITIES = {
    # name -> callable(n) -> (n1, n2)
    "so": lambda n: (n - 1, 0),
    "su": lambda n: (2 * (n - 1), 1),
    "sp": lambda n: (4 * (n - 1), 3),
}


@dataclass(frozen=True)
class RankOneGroup:
    """Root data of a rank-one simple Lie group.

    rho_prime bounds the spherical parameters that actually occur in
    L2-decompositions of lattice quotients; it equals rho for the real
    hyperbolic family, and defaults to rho (flagged by rho_prime_assumed)
    when no sharper value is supplied.
    """

    n1: int
    n2: int
    rho_prime: float
    rho_prime_assumed: bool
    label: str = "custom"

    def __post_init__(self):
        if not (isinstance(self.n1, int) and isinstance(self.n2, int)):
            raise ValidationError("multiplicities must be integers")
        if self.n1 < 1:
            raise ValidationError("n1 >= 1 required: a rank-one group has a root")
        if self.n2 < 0:
            raise ValidationError("n2 >= 0 required")
        if not (0.0 < self.rho_prime <= float(self.rho_exact) + 1e-12):
            raise ValidationError(
                f"rho_prime must lie in (0, rho]; got {self.rho_prime} with rho={float(self.rho_exact)}"
            )

    # Exact rational structure constants.
    @property
    def rho_exact(self) -> Fraction:
        return Fraction(self.n1 + 2 * self.n2, 2)

    @property
    def alpha_exact(self) -> Fraction:
        return Fraction(self.n1 + self.n2 - 1, 2)

    @property
    def beta_exact(self) -> Fraction:
        return Fraction(self.n2 - 1, 2)

    @property
    def rho(self) -> float:
        return float(self.rho_exact)

    @property
    def alpha(self) -> float:
        return float(self.alpha_exact)

    @property
    def beta(self) -> float:
        return float(self.beta_exact)

    def describe(self) -> str:
        return (
            f"{self.label}: n1={self.n1} n2={self.n2} rho={self.rho} "
            f"rho'={self.rho_prime}{' (assumed)' if self.rho_prime_assumed else ''}"
        )


def make_group(
    name: str,
    n: Optional[object] = None,
    rho_prime: Optional[float] = None,
) -> RankOneGroup:
    """Build a group from a family name.

    name is one of "so", "su", "sp", "f4", "custom"; n is the real rank-n
    index for the named families (so/su/sp need n >= 2) or an (n1, n2) pair
    for "custom".  rho_prime, if given, overrides the default rho.
    """
    name = name.lower()
    if name == "f4":
        n1, n2 = 8, 7
        label = "f4(-20)"
    elif name == "custom":
        if not (isinstance(n, (tuple, list)) and len(n) == 2):
            raise ValidationError("custom group needs an (n1, n2) pair")
        n1, n2 = int(n[0]), int(n[1])
        label = f"custom({n1},{n2})"
    elif name in _NAMED_MULTIPLICITIES:
        if not isinstance(n, int):
            raise ValidationError(f"{name} group needs an integer rank parameter")
        if n < 2:
            raise ValidationError(f"{name}:{n} is not a noncompact rank-one group (need n >= 2)")
        n1, n2 = _NAMED_MULTIPLICITIES[name](n)
        label = f"{name}({n},1)"
    else:
        raise ValidationError(f"unknown group family {name!r} (want so, su, sp, f4, custom)")

    rho = Fraction(n1 + 2 * n2, 2)
    # For the real hyperbolic family the full interval (0, rho] occurs, so
    # rho' = rho is a theorem; elsewhere it is an unverified default.
    if rho_prime is None:
        assumed = not (name == "so")
        rp = float(rho)
    else:
        assumed = False
        rp = float(rho_prime)
    return RankOneGroup(n1=n1, n2=n2, rho_prime=rp, rho_prime_assumed=assumed, label=label)


def parse_group(text: str, rho_prime: Optional[float] = None) -> RankOneGroup:
    """Parse a compact group spec: so:n | su:n | sp:n | f4 | custom:n1,n2."""
    text = text.strip().lower()
    if text == "f4":
        return make_group("f4", rho_prime=rho_prime)
    if ":" not in text:
        raise ValidationError(f"cannot parse group {text!r}")
    head, _, tail = text.partition(":")
    if head == "custom":
        parts = tail.split(",")
        if len(parts) != 2:
            raise ValidationError(f"custom group wants custom:n1,n2; got {text!r}")
        return make_group("custom", (int(parts[0]), int(parts[1])), rho_prime=rho_prime)
    try:
        n = int(tail)
    except ValueError as exc:
        raise ValidationError(f"bad rank in group spec {text!r}") from exc
    return make_group(head, n, rho_prime=rho_prime)


# --------------------------------------------------------------------------
# Spectral parameters.

TRIVIAL_KIND = "trivial"
COMPLEMENTARY_KIND = "complementary"
PRINCIPAL_KIND = "principal"


@dataclass(frozen=True)
class SpectralParam:
    """Point of the positive spherical dual.

    kind "trivial": the constant spherical function (s = rho).
    kind "complementary": real parameter s in (0, rho'].
    kind "principal": tempered parameter s = i*lam, lam >= 0.
    """

    kind: str
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in (TRIVIAL_KIND, COMPLEMENTARY_KIND, PRINCIPAL_KIND):
            raise ValidationError(f"unknown spectral kind {self.kind!r}")
        if self.kind == COMPLEMENTARY_KIND and not (self.value > 0.0 and math.isfinite(self.value)):
            raise ValidationError("complementary parameter needs s > 0")
        if self.kind == PRINCIPAL_KIND and not (self.value >= 0.0 and math.isfinite(self.value)):
            raise ValidationError("principal parameter needs lambda >= 0")

    @property
    def is_trivial(self) -> bool:
        return self.kind == TRIVIAL_KIND

    def re_s(self, group: RankOneGroup) -> float:
        """Real part of the spectral coordinate: rho, s, or 0."""
        if self.kind == TRIVIAL_KIND:
            return group.rho
        if self.kind == COMPLEMENTARY_KIND:
            return self.value
        return 0.0

    def s_complex(self, group: RankOneGroup) -> complex:
        """Spectral coordinate as a complex number."""
        if self.kind == TRIVIAL_KIND:
            return complex(group.rho)
        if self.kind == COMPLEMENTARY_KIND:
            return complex(self.value)
        return complex(0.0, self.value)

    def label(self) -> str:
        if self.kind == TRIVIAL_KIND:
            return "trivial"
        if self.kind == COMPLEMENTARY_KIND:
            return f"c:{self.value:g}"
        return f"p:{self.value:g}"


def trivial() -> SpectralParam:
    return SpectralParam(TRIVIAL_KIND)


def complementary(s: float) -> SpectralParam:
    return SpectralParam(COMPLEMENTARY_KIND, float(s))


def principal(lam: float) -> SpectralParam:
    return SpectralParam(PRINCIPAL_KIND, float(lam))


def parse_param(text: str) -> SpectralParam:
    """Parse trivial | c:S | p:LAM."""
    text = text.strip().lower()
    if text == "trivial":
        return trivial()
    head, _, tail = text.partition(":")
    try:
        if head == "c":
            return complementary(float(tail))
        if head == "p":
            return principal(float(tail))
    except ValueError as exc:
        raise ValidationError(f"bad spectral parameter {text!r}") from exc
    raise ValidationError(f"bad spectral parameter {text!r} (want trivial, c:S, or p:LAM)")


def check_param(group: RankOneGroup, param: SpectralParam) -> None:
    """Reject parameters outside the dual of the given group."""
    if param.kind == COMPLEMENTARY_KIND and param.value > group.rho_prime + 1e-12:
        raise ValidationError(
            f"complementary s={param.value} exceeds rho'={group.rho_prime} for {group.label}"
        )


# --------------------------------------------------------------------------
# Purity validation.


@dataclass(frozen=True)
class PurityCheck:
    """Outcome of validate_purity: empty violations means valid."""

    violations: Tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_purity(group: RankOneGroup, spectrum) -> PurityCheck:
    """Check the ordering constraints of a pure spectrum.

    Expects an object with fields atoms (s_0 = rho > s_1 > ... > s_k),
    r (spectral gap bound, 0 < r < s_k), and omega (pairs (param, weight)
    with re_s <= r).  Every violated inequality is reported separately.
    """
    problems = []
    atoms = list(spectrum.atoms)
    r = float(spectrum.r)
    if not atoms:
        problems.append("atom list is empty; s_0 = rho is mandatory")
    else:
        if abs(atoms[0] - group.rho) > 1e-12:
            problems.append(f"s_0 = {atoms[0]} != rho = {group.rho}")
        for j in range(1, len(atoms)):
            if not atoms[j] < atoms[j - 1]:
                problems.append(f"atoms not strictly decreasing at index {j}: {atoms[j-1]} -> {atoms[j]}")
        for j, s in enumerate(atoms):
            if not s > r:
                problems.append(f"atom s_{j} = {s} is not above r = {r}")
        for j, s in enumerate(atoms[1:], start=1):
            if s > group.rho_prime + 1e-12:
                problems.append(f"atom s_{j} = {s} exceeds rho' = {group.rho_prime}")
    if not (r > 0.0):
        problems.append(f"r = {r} must be positive")
    for i, (param, weight) in enumerate(spectrum.omega):
        if not (math.isfinite(weight) and weight >= 0.0):
            problems.append(f"omega[{i}] weight {weight} must be finite and >= 0")
        re_s = param.re_s(group)
        if re_s > r + 1e-12:
            problems.append(f"omega[{i}] ({param.label()}) has re_s = {re_s} > r = {r}")
    return PurityCheck(tuple(problems))
