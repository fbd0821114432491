"""Model parameters, derived indices and hypothesis predicates.

The equation is

    i u_t - L_a u + lam |x|^{-b} |u|^alpha u = 0,   L_a = -Delta + a/|x|^2,

posed on R^N with N >= 3.  Parameters may be given as ints, floats or
``fractions.Fraction``; the exponent checker keeps exact arithmetic when
they are rational.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real

# tolerance used when a float parameter is compared with a critical value
ALPHA_TOL = 1e-12


class HardyViolation(ValueError):
    """a <= -(N-2)^2/4: the operator L_a is not positive."""


class HypothesisViolation(ValueError):
    """Parameters fall outside the range a computation is valid for."""


class RegimeMismatch(ValueError):
    """A threshold quantity was requested in the wrong regime."""


class Regime(enum.Enum):
    MASS_SUBCRITICAL = "mass_subcritical"
    MASS_CRITICAL = "mass_critical"
    INTERCRITICAL = "intercritical"
    ENERGY_CRITICAL = "energy_critical"
    ENERGY_SUPERCRITICAL = "energy_supercritical"


def _exact(x):
    return type(x) is int or type(x) is Fraction


def _q(x):
    """Promote ints to Fractions so that division stays exact."""
    return Fraction(x) if _exact(x) else x


def _tol(*xs):
    return 0 if all(_exact(x) for x in xs) else ALPHA_TOL


def lt(x, y) -> bool:
    """Strict x < y, treating |x - y| <= tol as equality for floats."""
    return x < y - _tol(x, y)


def le(x, y) -> bool:
    return x <= y + _tol(x, y)


def close(x, y) -> bool:
    return abs(x - y) <= _tol(x, y)


def sqrt(x):
    """Square root that stays a Fraction when x is a rational square."""
    if _exact(x) and x >= 0:
        x = Fraction(x)
        n, d = math.isqrt(x.numerator), math.isqrt(x.denominator)
        if n * n == x.numerator and d * d == x.denominator:
            return Fraction(n, d)
    return math.sqrt(x)


def hardy_floor(N: int):
    return -Fraction((N - 2) ** 2, 4)


def mass_critical_power(N: int, b):
    return (4 - 2 * _q(b)) / N


def energy_critical_power(N: int, b):
    return (4 - 2 * _q(b)) / (N - 2)


def strichartz_a_floor(N: int, b, alpha):
    """Lower bound on a used by the Strichartz-based local theory:
    -(N-2)^2/4 + ((alpha(N-2) - (2-2b)) / (2(alpha+1)))^2."""
    b, alpha = _q(b), _q(alpha)
    t = (alpha * (N - 2) - (2 - 2 * b)) / (2 * (alpha + 1))
    return hardy_floor(N) + t * t


@dataclass(frozen=True)
class ModelParams:
    dim: int
    a: Real
    b: Real
    alpha: Real
    lam: int = 1

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 3:
            raise ValueError(f"dimension must be an integer >= 3, got {self.dim}")
        if self.lam not in (1, -1):
            raise ValueError("lam must be +1 (focusing) or -1 (defocusing)")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.b < 0:
            raise ValueError("b must be nonnegative")
        if not self.a > hardy_floor(self.dim):
            raise HardyViolation(
                f"a = {self.a} <= -(N-2)^2/4 = {float(hardy_floor(self.dim))}")

    def replace(self, **kw) -> "ModelParams":
        d = dict(dim=self.dim, a=self.a, b=self.b, alpha=self.alpha, lam=self.lam)
        d.update(kw)
        return ModelParams(**d)

    def as_floats(self) -> "ModelParams":
        return ModelParams(self.dim, float(self.a), float(self.b),
                           float(self.alpha), self.lam)


@dataclass(frozen=True)
class DerivedIndices:
    s_c: Real
    rho: Real
    nu: Real
    regime: Regime

    @property
    def sigma(self):
        """(1 - s_c)/s_c, the mass exponent in the intercritical thresholds."""
        return (1 - self.s_c) / self.s_c


def derive_indices(params: ModelParams) -> DerivedIndices:
    N = params.dim
    a, b, al = _q(params.a), _q(params.b), _q(params.alpha)
    if not a > hardy_floor(N):
        raise HardyViolation(f"a = {a} is below the Hardy floor")
    if all(_exact(x) for x in (a, b, al)):
        s_c = Fraction(N, 2) - (2 - b) / al
        nu = sqrt(Fraction((N - 2) ** 2, 4) + a)
        rho = Fraction(N - 2, 2) - nu
        if not _exact(nu):
            rho = float(rho)
    else:
        a, b, al = float(a), float(b), float(al)
        s_c = N / 2 - (2 - b) / al
        nu = math.sqrt((N - 2) ** 2 / 4 + a)
        rho = (N - 2) / 2 - nu
    am, ae = mass_critical_power(N, b), energy_critical_power(N, b)
    if close(al, am):
        regime = Regime.MASS_CRITICAL
    elif close(al, ae):
        regime = Regime.ENERGY_CRITICAL
    elif al < am:
        regime = Regime.MASS_SUBCRITICAL
    elif al < ae:
        regime = Regime.INTERCRITICAL
    else:
        regime = Regime.ENERGY_SUPERCRITICAL
    return DerivedIndices(s_c=s_c, rho=rho, nu=nu, regime=regime)


@dataclass
class HypothesisReport:
    """Per hypothesis set, the truth value of each individual condition."""
    conditions: dict = field(default_factory=dict)

    def holds(self, name: str) -> bool:
        return all(self.conditions[name].values())

    def __getitem__(self, name: str) -> bool:
        return self.holds(name)

    @property
    def flags(self) -> dict:
        return {k: self.holds(k) for k in self.conditions}

    def failing(self, name: str) -> list:
        return [c for c, ok in self.conditions[name].items() if not ok]


def check_hypotheses(params: ModelParams) -> HypothesisReport:
    """Evaluate every well-posedness hypothesis set on ``params``.

    Sets: suzuki_lwp (energy method), kato_lwp_case1/2 (Strichartz local
    theory, low and high power), corollary_i/ii (large b, cubic N=3),
    gwp_radial, gwp_n3_i/ii/iii, gwp_nonradial_case1/2 (small data).

    Strict inequalities are strict: a float parameter within ALPHA_TOL of a
    boundary counts as being on it.
    """
    N = params.dim
    a, b, al = _q(params.a), _q(params.b), _q(params.alpha)
    am, ae = mass_critical_power(N, b), energy_critical_power(N, b)
    low = (2 - 2 * b) / (N - 2)
    low_n = (2 - 2 * b) / N
    floor = hardy_floor(N)
    s_floor = strichartz_a_floor(N, b, al)
    b_cap = min(Fraction(N, 2), 2)
    c = {}

    c["suzuki_lwp"] = {
        "0<alpha<(4-2b)/(N-2)": lt(0, al) and lt(al, ae),
        "a>-(N-2)^2/4": lt(floor, a),
        "0<b<2": lt(0, b) and lt(b, 2),
    }
    c["kato_lwp_case1"] = {
        "0<=b<min(N/2,2)": le(0, b) and lt(b, b_cap),
        "0<=b<1": lt(b, 1),
        "(2-2b)/N<alpha<=(2-2b)/(N-2)": lt(low_n, al) and le(al, low),
        "a>-(N-2)^2/4": lt(floor, a),
    }
    c["kato_lwp_case2"] = {
        "0<=b<min(N/2,2)": le(0, b) and lt(b, b_cap),
        "max(0,(2-2b)/(N-2))<alpha<(4-2b)/(N-2)": lt(max(0, low), al) and lt(al, ae),
        "a>strichartz floor": lt(s_floor, a),
    }
    c["corollary_i"] = {
        "1<=b<min(N/2,4)": le(1, b) and lt(b, min(Fraction(N, 2), 4)),
        "0<alpha<(4-2b)/(N-2)": lt(0, al) and lt(al, ae),
        "a>strichartz floor": lt(s_floor, a),
    }
    c["corollary_ii"] = {
        "N=3": N == 3,
        "alpha=2": close(al, 2),
        "0<b<1": lt(0, b) and lt(b, 1),
        "a>-1/4+b^2/9": lt(Fraction(-1, 4) + b * b / 9, a),
    }
    c["gwp_radial"] = {
        "a>0": lt(0, a),
        "0<b<min(N/2,2)": lt(0, b) and lt(b, b_cap),
        "(4-2b)/N<alpha<(4-2b)/(N-2)": lt(am, al) and lt(al, ae),
        "alpha<3-2b if N=3": N != 3 or lt(al, 3 - 2 * b),
    }
    n3 = {"N=3": N == 3, "a>0": lt(0, a), "0<b<3/2": lt(0, b) and lt(b, Fraction(3, 2))}
    c["gwp_n3_i"] = dict(n3, **{
        "max(1,(4-2b)/3)<alpha<4-2b": lt(max(1, am), al) and lt(al, 4 - 2 * b)})
    c["gwp_n3_ii"] = dict(n3, **{
        "(4-2b)/3<alpha<4-2b": lt(am, al) and lt(al, 4 - 2 * b),
        "0<b<1/2": lt(0, b) and lt(b, Fraction(1, 2))})
    c["gwp_n3_iii"] = dict(n3, **{
        "3-2b<=alpha<4-2b": le(3 - 2 * b, al) and lt(al, 4 - 2 * b),
        "0<b<1": lt(0, b) and lt(b, 1)})
    b6 = {"0<b<(6-N)/2": lt(0, b) and lt(b, Fraction(6 - N, 2))}
    c["gwp_nonradial_case1"] = dict(b6, **{
        "N=3": N == 3,
        "(4-2b)/3<alpha<=2-2b": lt(am, al) and le(al, 2 - 2 * b),
        "0<=b<1/2": le(0, b) and lt(b, Fraction(1, 2)),
        "a>-1/4": lt(Fraction(-1, 4), a),
    })
    c["gwp_nonradial_case2"] = dict(b6, **{
        "3<=N<=5": 3 <= N <= 5,
        "max((4-2b)/N,(2-2b)/(N-2),1)<alpha<(4-2b)/(N-2)": lt(max(am, low, 1), al) and lt(al, ae),
        "a>strichartz floor": lt(s_floor, a),
    })
    return HypothesisReport(conditions=c)
