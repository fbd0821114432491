"""Exact bookkeeping for Strichartz pairs and Hoelder splits.

Every pair used by the well-posedness arguments is rebuilt from its
closed form and checked against the defining relations: admissibility
class, Sobolev-equivalence window, the Hoelder scaling equations and the
integrability of |x|^{-b} on the unit ball B or its complement.

Arithmetic is exact (``Fraction``) when the inputs are rational; otherwise
floats are compared with an absolute/relative tolerance of 1e-12.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .model import (ModelParams, HypothesisViolation, derive_indices, hardy_floor,
                    strichartz_a_floor, mass_critical_power, energy_critical_power,
                    _exact, _q)

TOL = 1e-12
INF = math.inf


class EmptyWindow(ValueError):
    """The Sobolev-equivalence window (r_lo, r_hi) is empty."""


class Kind(enum.Enum):
    S = "S-admissible"
    HS = "Hs-admissible"
    DUAL_HS = "dual Hs-admissible"
    QUASI_HS = "Hs relation with r >= 2"
    NONE = "not admissible"


def _eq(x, y) -> bool:
    if type(x) is float or type(y) is float:
        x, y = float(x), float(y)
        return abs(x - y) <= TOL * max(1.0, abs(x), abs(y))
    return x == y


def _lt(x, y) -> bool:
    if type(x) is float or type(y) is float:
        x, y = float(x), float(y)
        return x < y - TOL * max(1.0, abs(x), abs(y))
    return x < y


def _frac(n, d, *like):
    """n/d, exact unless one of ``like`` is a float."""
    if any(type(x) is float for x in like):
        return n / d
    return Fraction(n, d)


def _le(x, y) -> bool:
    return _lt(x, y) or _eq(x, y)


def _inv(x):
    if x == INF:
        return 0
    return 1 / _q(x)


@dataclass(frozen=True)
class PairQR:
    q: object
    r: object

    @property
    def inv_q(self):
        return _inv(self.q)

    @property
    def inv_r(self):
        return _inv(self.r)

    def dual(self) -> "PairQR":
        """Hoelder conjugate pair (q', r')."""
        iq, ir = 1 - self.inv_q, 1 - self.inv_r
        return PairQR(INF if iq == 0 else 1 / iq, INF if ir == 0 else 1 / ir)

    def as_floats(self):
        return float(self.q), float(self.r)


def _relation_gap(pair: PairQR, N: int, s) -> object:
    """2/q - (N/2 - N/r - s)."""
    iq, ir, s = pair.inv_q, pair.inv_r, _q(s)
    return 2 * iq - (_frac(N, 2, iq, ir, s) - N * ir - s)


def is_s_admissible(pair: PairQR, N: int) -> bool:
    if pair.r == INF:
        return False
    return (_eq(_relation_gap(pair, N, 0), 0)
            and _le(2, pair.r) and _le(pair.r, _frac(2 * N, N - 2, pair.r)))


def is_hs_admissible(pair: PairQR, s, N: int) -> bool:
    """Relation 2/q = N/2 - N/r - s with 2N/(N-2s) <= r < 2N/(N-2).

    The endpoint pair (inf, 2N/(N-2s)) satisfies the relation but is
    excluded, since no estimate uses it.
    """
    s = _q(s)
    if pair.q == INF or pair.r == INF or not 0 < s < N / 2:
        return False
    return (_eq(_relation_gap(pair, N, s), 0)
            and _le(2 * N / (N - 2 * s), pair.r) and _lt(pair.r, _frac(2 * N, N - 2, pair.r)))


def is_dual_hs_admissible(pair: PairQR, s, N: int) -> bool:
    """Relation 2/q = N/2 - N/r + s with 2N/(N-2s) < r < 2N/(N-2)."""
    s = _q(s)
    if pair.q == INF or pair.r == INF or not 0 < s < N / 2:
        return False
    return (_eq(_relation_gap(pair, N, -s), 0)
            and _lt(2 * N / (N - 2 * s), pair.r) and _lt(pair.r, _frac(2 * N, N - 2, pair.r)))


def satisfies_hs_relation(pair: PairQR, s, N: int) -> bool:
    """Only the scaling relation and r >= 2 (no upper bound on r)."""
    if pair.q == INF or pair.r == INF:
        return False
    return _eq(_relation_gap(pair, N, s), 0) and _le(2, pair.r)


def classify(pair: PairQR, N: int, s=0) -> Kind:
    if is_s_admissible(pair, N):
        return Kind.S
    if s and is_hs_admissible(pair, s, N):
        return Kind.HS
    if s and is_dual_hs_admissible(pair, s, N):
        return Kind.DUAL_HS
    if s and satisfies_hs_relation(pair, s, N):
        return Kind.QUASI_HS
    return Kind.NONE


def has_class(pair: PairQR, kind: Kind, N: int, s=0) -> bool:
    if kind is Kind.S:
        return is_s_admissible(pair, N)
    if kind is Kind.HS:
        return is_hs_admissible(pair, s, N)
    if kind is Kind.DUAL_HS:
        return is_dual_hs_admissible(pair, s, N)
    if kind is Kind.QUASI_HS:
        return satisfies_hs_relation(pair, s, N)
    return classify(pair, N, s) is Kind.NONE


def sobolev_equivalence_window(s, params: ModelParams):
    """Range of r on which ||L_a^{s/2} f||_r and ||D^s f||_r are equivalent.

    (1, N/s) for a > 0, (N/(N-rho), N/(s+rho)) for a < 0 and (1, inf) for
    a = 0.  Raises EmptyWindow when the interval is empty.
    """
    s = _q(s)
    if not 0 < s < 2:
        raise ValueError("s must lie in (0, 2)")
    N, a = params.dim, params.a
    if a == 0:
        return (1, INF)
    if a > 0:
        lo, hi = 1, N / s
    else:
        rho = derive_indices(params).rho
        lo, hi = N / (N - rho), N / (s + rho)
    if not lo < hi:
        raise EmptyWindow(f"window ({lo}, {hi}) is empty")
    return (lo, hi)


# ---------------------------------------------------------------- checks

_OPS = {
    "<": _lt,
    "<=": _le,
    ">": lambda x, y: _lt(y, x),
    ">=": lambda x, y: _le(y, x),
    "==": _eq,
}


@dataclass(frozen=True)
class Check:
    label: str
    lhs: object
    op: str
    rhs: object

    @property
    def ok(self) -> bool:
        return _OPS[self.op](self.lhs, self.rhs)

    def as_dict(self):
        return {"label": self.label, "lhs": _num(self.lhs), "op": self.op,
                "rhs": _num(self.rhs), "ok": self.ok}


def _num(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    if x == INF:
        return "inf"
    return float(x)


@dataclass
class NamedPair:
    name: str
    family: str
    pair: PairQR
    required: Kind
    s: object = 0
    window: bool = False
    checks: list = field(default_factory=list)


@dataclass
class HolderSplit:
    """Exponents of one Hoelder estimate on region B (unit ball) or its
    complement, with the scaling equations and integrability conditions
    they are claimed to satisfy."""
    name: str
    family: str
    region: str
    exponents: dict
    equations: list = field(default_factory=list)
    finiteness: list = field(default_factory=list)
    checks: list = field(default_factory=list)


def verify_named_pair(np_: NamedPair, params: ModelParams) -> dict:
    N = params.dim
    out = {"name": np_.name, "family": np_.family,
           "q": _num(np_.pair.q), "r": _num(np_.pair.r),
           "required": np_.required.value,
           "class_ok": has_class(np_.pair, np_.required, N, np_.s)}
    if np_.window:
        try:
            lo, hi = sobolev_equivalence_window(1, params)
            out["window"] = [_num(lo), _num(hi)]
            out["window_ok"] = _lt(lo, np_.pair.r) and _lt(np_.pair.r, hi)
        except EmptyWindow:
            out["window_ok"] = False
    out["checks"] = [c.as_dict() for c in np_.checks]
    out["ok"] = out["class_ok"] and out.get("window_ok", True) and all(c.ok for c in np_.checks)
    return out


def _window(params):
    try:
        return sobolev_equivalence_window(1, params)
    except EmptyWindow:
        return None


def _pair_ok(np_: NamedPair, params: ModelParams, window) -> bool:
    if not has_class(np_.pair, np_.required, params.dim, np_.s):
        return False
    if np_.window:
        if window is None:
            return False
        lo, hi = window
        if not (_lt(lo, np_.pair.r) and _lt(np_.pair.r, hi)):
            return False
    return all(c.ok for c in np_.checks)


def _split_ok(split: HolderSplit) -> bool:
    op = _OPS[">"] if split.region == "B" else _lt
    return (all(_eq(l, r) for _, l, r in split.equations)
            and all(op(v, 0) for _, v in split.finiteness)
            and all(c.ok for c in split.checks))


def verify_holder_split(split: HolderSplit, params: ModelParams) -> dict:
    """Check scaling equations, the sign condition making |x|^{-b}
    (resp. |x|^{-b-1}) integrable on the region, and side conditions."""
    sign = ">" if split.region == "B" else "<"
    eqs = [Check(lbl, l, "==", r) for lbl, l, r in split.equations]
    fin = [Check(lbl, v, sign, 0) for lbl, v in split.finiteness]
    failures = [c.label for c in eqs + fin + split.checks if not c.ok]
    return {"name": split.name, "family": split.family, "region": split.region,
            "exponents": {k: _num(v) for k, v in split.exponents.items()},
            "equations": [c.as_dict() for c in eqs],
            "finiteness": [c.as_dict() for c in fin],
            "checks": [c.as_dict() for c in split.checks],
            "failures": failures, "ok": not failures}


# ------------------------------------------------------------- families

def _conditions(family: str, params: ModelParams) -> dict:
    N = params.dim
    a, b, al = _q(params.a), _q(params.b), _q(params.alpha)
    am, ae = mass_critical_power(N, b), energy_critical_power(N, b)
    low = (2 - 2 * b) / (N - 2)
    floor, s_floor = hardy_floor(N), strichartz_a_floor(N, b, al)
    if not all(_exact(x) for x in (a, b, al)):
        a, b, al, am, ae, low = map(float, (a, b, al, am, ae, low))
        floor, s_floor = float(floor), float(s_floor)
    gt = lambda x, y: _lt(y, x)
    if family == "local_high_power":
        return {"0<b<min(N/2,2)": gt(b, 0) and _lt(b, min(_frac(N, 2, b), 2)),
                "max(0,(2-2b)/(N-2))<alpha<(4-2b)/(N-2)": _lt(max(0, low), al) and _lt(al, ae),
                "a>strichartz floor": gt(a, s_floor)}
    if family == "local_low_power":
        return {"0<b<1": gt(b, 0) and _lt(b, 1),
                "(2-2b)/N<alpha<=(2-2b)/(N-2)": _lt((2 - 2 * b) / N, al) and _le(al, low),
                "a>-(N-2)^2/4": gt(a, floor)}
    if family == "small_data_radial":
        return {"(4-2b)/N<alpha<(4-2b)/(N-2)": _lt(am, al) and _lt(al, ae),
                "0<b<min(N/2,2)": gt(b, 0) and _lt(b, min(_frac(N, 2, b), 2)),
                "a>0": gt(a, 0)}
    if family == "small_data_3d":
        return {"N=3": N == 3, "a>0": gt(a, 0),
                "0<b<3/2": gt(b, 0) and _lt(b, _frac(3, 2, b)),
                "max((4-2b)/3,1)<alpha<4-2b": _lt(max(am, 1), al) and _lt(al, 4 - 2 * b)}
    if family == "small_data_nonradial_low":
        return {"N=3": N == 3, "0<b<1/2": gt(b, 0) and _lt(b, _frac(1, 2, b)),
                "(4-2b)/3<alpha<=2-2b": _lt(am, al) and _le(al, 2 - 2 * b),
                "a>-(N-2)^2/4": gt(a, floor)}
    if family == "small_data_nonradial_high":
        return {"3<=N<=5": 3 <= N <= 5,
                "0<b<(6-N)/2": gt(b, 0) and _lt(b, _frac(6 - N, 2, b)),
                "max((2-2b)/(N-2),(4-2b)/N,1)<alpha<(4-2b)/(N-2)": _lt(max(low, am, 1), al) and _lt(al, ae),
                "a>strichartz floor": gt(a, s_floor)}
    raise KeyError(family)


FAMILIES = ("local_high_power", "local_low_power", "small_data_radial",
            "small_data_3d", "small_data_nonradial_low", "small_data_nonradial_high")


def family_applies(family: str, params: ModelParams) -> bool:
    return all(_conditions(family, params).values())


def _holder_hs_type(F, fam, N, b, al, th, s_c, rbar, r, region):
    """Split shared by the small-data families:
    |x|^{-b} |u|^theta |u|^{alpha-theta} v in L^{2N/(N+2)},
    u^theta in L^{theta r1}, u^{alpha-theta} in L^{rbar/(alpha-theta)}, v in L^r.
    """
    r1 = (F(2 * N, N - 2) if region == "B" else 2) / th
    N_gamma = F(N + 2, 2) - N / r1 - N * (al - th) / rbar - N / r
    N_r3 = N / r - 1                      # Sobolev: W^{1,r} -> L^{r3}
    N_d = F(N + 2, 2) - N / r1 - N * (al - th) / rbar - N_r3
    closed = th * (2 - b) / al - N / r1
    target = th * (1 - s_c) if region == "B" else -th * s_c
    return HolderSplit(
        name=f"{fam}:{region}", family=fam, region=region,
        exponents={"r1": r1, "N/gamma": N_gamma, "N/d": N_d, "theta*r1": th * r1},
        equations=[("N/gamma-b = theta(2-b)/alpha - N/r1", N_gamma - b, closed),
                   ("N/d-b-1 = N/gamma-b", N_d - b - 1, N_gamma - b),
                   ("N/gamma-b = signed theta multiple of s_c", N_gamma - b, target)],
        finiteness=[("N/gamma-b", N_gamma - b), ("N/d-b-1", N_d - b - 1)],
        checks=[Check("H1 embeds in L^{theta r1}: theta r1 >= 2", th * r1, ">=", 2),
                Check("theta r1 <= 2N/(N-2)", th * r1, "<=", F(2 * N, N - 2)),
                Check("r < N (Sobolev for the gradient factor)", r, "<", N)])


def radial_hat_exponents(N: int, b, alpha, theta):
    """(q_hat, r_hat, a_hat, a_tilde) of the radial small-data argument.

    Pure formulas, usable outside the family's parameter region.
    """
    b, al, th = _q(b), _q(alpha), _q(theta)
    qh = 4 * al * (al + 2 - th) / (al * (N * al + 2 * b) - th * (N * al - 4 + 2 * b))
    rh = N * al * (al + 2 - th) / (al * (N - b) - th * (2 - b))
    ah = 2 * al * (al + 2 - th) / (4 - 2 * b - (N - 2) * al)
    at = 2 * al * (al + 2 - th) / (al * (N * (al + 1 - th) - 2 + 2 * b) - (4 - 2 * b) * (1 - th))
    return qh, rh, ah, at


def _build(family: str, params: ModelParams, th, eps):
    N = params.dim
    b, al = _q(params.b), _q(params.alpha)
    th, eps = _q(th), _q(eps)
    s_c = derive_indices(params).s_c
    if all(_exact(x) for x in (b, al, th, eps)):
        F = Fraction
    else:
        # float mode: avoid mixed Fraction/float arithmetic
        F = lambda n, d=1: n / d
        b, al, th, eps, s_c = float(b), float(al), float(th), float(eps), float(s_c)
    pairs, splits = [], []
    fam = family

    if family == "local_high_power":
        c = al * (N - 2) - (2 - 2 * b)
        for sgn, tag, region in ((1, "plus", "B_complement"), (-1, "minus", "B")):
            r = 2 * N * (al + 1) / (N + 2 + 2 * al - 2 * b + sgn * eps)
            q = 4 * (al + 1) / (c - sgn * eps)
            inv_qs = F(1, 2) - (al + 1) / q
            pairs.append(NamedPair(f"high_power_{tag}", fam, PairQR(q, r), Kind.S, window=True, checks=[
                Check("r < N", r, "<", N),
                Check("q >= 2", q, ">=", 2),
                Check("1/q* > 0", inv_qs, ">", 0),
                Check("1/q* closed form", inv_qs, "==", (4 - 2 * b - al * (N - 2) + sgn * eps) / 4)]))
            inv_r1 = al * (1 / r - F(1, N))          # 1 = N/r - N/(alpha r1)
            inv_beta = inv_r1 + 1 / r
            N_gamma = N * (F(N + 2, 2 * N) - inv_beta)
            inv_e = (al + 1) * (1 / r - F(1, N))     # 1 = N/r - N/((alpha+1) e)
            N_d = N * (F(N + 2, 2 * N) - inv_e)
            splits.append(HolderSplit(
                name=f"{fam}:{tag}:{region}", family=fam, region=region,
                exponents={"q": q, "r": r, "N/gamma": N_gamma, "N/d": N_d, "1/q*": inv_qs},
                equations=[("N/gamma", N_gamma, F(N + 2, 2) - N * (al + 1) / r + al),
                           ("N/d", N_d, F(N + 2, 2) - N * (al + 1) / r + al + 1)],
                finiteness=[("N/gamma-b", N_gamma - b), ("N/d-b-1", N_d - b - 1)],
                checks=[Check("1/q* > 0", inv_qs, ">", 0)]))

    elif family == "local_low_power":
        c = 1 - b
        q = 4 * (2 * c + eps) / (eps * (N - 2))
        r = N * (2 * c + eps) / (c * N + eps)
        inv_qs = F(1, 2) - al / q              # from 1/2 = 1/q* + alpha/q
        inv_qs_printed = F(1, 2) - (al + 1) / q
        pairs.append(NamedPair("low_power", fam, PairQR(q, r), Kind.S, window=True, checks=[
            Check("r < N", r, "<", N),
            Check("1/q* > 0", inv_qs, ">", 0),
            Check("1/2-(alpha+1)/q > 0", inv_qs_printed, ">", 0)]))
        inv_r1 = al * (1 / r - F(1, N))
        # the gradient factor sits in L^2_x (L^inf_t), the u^alpha factor in L^q_t
        N_gamma = N * (F(N + 2, 2 * N) - inv_r1 - F(1, 2))
        N_d = N * (F(N + 2, 2 * N) - inv_r1 - F(N - 2, 2 * N))
        splits.append(HolderSplit(
            name=f"{fam}:B", family=fam, region="B",
            exponents={"q": q, "r": r, "N/gamma": N_gamma, "N/d": N_d, "1/q*": inv_qs},
            equations=[("N/gamma", N_gamma, 1 - N * al / r + al),
                       ("N/d - 1 = N/gamma", N_d - 1, N_gamma)],
            finiteness=[("N/gamma-b", N_gamma - b), ("N/d-b-1", N_d - b - 1)],
            checks=[Check("1/q* > 0", inv_qs, ">", 0)]))
        r1 = N / (1 - b + eps)
        N_gamma = N * (F(N + 2, 2 * N) - 1 / r1 - F(1, 2))
        N_d = N * (F(N + 2, 2 * N) - 1 / r1 - F(N - 2, 2 * N))
        splits.append(HolderSplit(
            name=f"{fam}:B_complement", family=fam, region="B_complement",
            exponents={"r1": r1, "N/gamma": N_gamma, "N/d": N_d},
            equations=[("N/gamma", N_gamma, 1 - N / r1),
                       ("N/d - 1 = N/gamma", N_d - 1, N_gamma)],
            finiteness=[("N/gamma-b", N_gamma - b), ("N/d-b-1", N_d - b - 1)],
            checks=[Check("alpha r1 > 2", al * r1, ">", 2),
                    Check("alpha r1 < 2N/(N-2)", al * r1, "<", F(2 * N, N - 2))]))

    elif family == "small_data_radial":
        qh, rh, ah, at = radial_hat_exponents(N, b, al, th)
        theta_ok = [Check("0 < theta", th, ">", 0), Check("theta < alpha", th, "<", al)]
        hat_checks = list(theta_ok)
        if N >= 4:
            hat_checks += [Check("r < N", rh, "<", N),
                           Check("r' < N", 1 / (1 - 1 / rh), "<", N)]
        pairs += [NamedPair("hat_q_r", fam, PairQR(qh, rh), Kind.S, window=N >= 4, checks=hat_checks),
                  NamedPair("hat_a_r", fam, PairQR(ah, rh), Kind.HS, s=s_c),
                  NamedPair("tilde_a_r", fam, PairQR(at, rh), Kind.DUAL_HS, s=s_c)]
        if N == 3 and _lt(al, 3 - 2 * b):
            qe, re = 4 / (1 - 2 * eps), 3 / (1 + eps)
            den = al * (3 - 2 * b - 2 * eps) - 2 * th * (2 - b)
            a3 = 4 * (al - th) / (1 + 2 * eps)
            r3 = 6 * al * (al - th) / den
            pairs += [NamedPair("n3_gradient", fam, PairQR(qe, re), Kind.S, window=True,
                                checks=[Check("r_eps < 3", re, "<", 3)]),
                      NamedPair("n3_potential", fam, PairQR(a3, r3), Kind.HS, s=s_c, checks=[
                          Check("denominator of r > 0", den, ">", 0),
                          Check("1/2 = (alpha-theta)/a + 1/q_eps", (al - th) / a3 + 1 / qe, "==", F(1, 2))])]
            for region in ("B", "B_complement"):
                splits.append(_holder_hs_type(F, fam, N, b, al, th, s_c, r3, re, region))

    elif family == "small_data_3d":
        ab = 4 * (al - th) / (1 + 2 * eps)
        rb = 6 * al * (al - th) / (al * (3 - 2 * b - 2 * eps) - th * (4 - 2 * b))
        q, r = 4 / (1 - 2 * eps), 3 / (1 + eps)
        pb = 6 * al * (al - th) / (al * (3 - 2 * b - 2 * eps) + 2 * al * s_c * (al - th) - th * (4 - 2 * b))
        pairs += [NamedPair("gradient", fam, PairQR(q, r), Kind.S, window=True,
                            checks=[Check("r < 3", r, "<", 3)]),
                  NamedPair("quasi_hs", fam, PairQR(ab, rb), Kind.QUASI_HS, s=s_c, checks=[
                      Check("1/2 = (alpha-theta)/abar + 1/q", (al - th) / ab + 1 / q, "==", F(1, 2))]),
                  NamedPair("pbar", fam, PairQR(ab, pb), Kind.S, checks=[
                      Check("pbar > 2", pb, ">", 2),
                      Check("pbar < 3/s_c", pb, "<", 3 / s_c),
                      Check("s_c = 3/pbar - 3/rbar", 3 / pb - 3 / rb, "==", s_c)])]
        for region in ("B", "B_complement"):
            splits.append(_holder_hs_type(F, fam, N, b, al, th, s_c, rb, r, region))

    elif family in ("small_data_nonradial_low", "small_data_nonradial_high"):
        if family.endswith("low"):
            ab = 2 * (al - th) / (1 - th)
            rb = 3 * al * (al - th) / (al * (1 - b) - th * (2 - b - al))
            q, r = 2 / th, 6 / (3 - 2 * th)
            pb = N * al * (al - th) / (al * s_c * (al - th) + al * (1 - b) - th * (2 - b - al))
        else:
            ab = 4 * (al + 1) * (al - th) / (4 - 2 * b - al * (N - 4))
            rb = 2 * N * al * (al + 1) * (al - th) / (al * al * (N - 2 * b) - th * (4 - 2 * b) * (al + 1))
            q = 4 * (al + 1) / (al * (N - 2) - 2 + 2 * b)
            r = 2 * N * (al + 1) / (2 * (al + 1) + N - 2 * b)
            pb = 2 * N * al * (al + 1) * (al - th) / (
                2 * al * s_c * (al + 1) * (al - th) + al * al * (N - 2 * b) - th * (4 - 2 * b) * (al + 1))
        pairs += [NamedPair("gradient", fam, PairQR(q, r), Kind.S, window=True, checks=[
                      Check("r > 2", r, ">", 2), Check("r < N", r, "<", N)]),
                  NamedPair("quasi_hs", fam, PairQR(ab, rb), Kind.QUASI_HS, s=s_c, checks=[
                      Check("1/2 = (alpha-theta)/abar + 1/q", (al - th) / ab + 1 / q, "==", F(1, 2))]),
                  NamedPair("pbar", fam, PairQR(ab, pb), Kind.S, checks=[
                      Check("pbar > 2", pb, ">", 2),
                      Check("pbar < 2N/(N-2)", pb, "<", F(2 * N, N - 2)),
                      Check("pbar < N/s_c", pb, "<", N / s_c),
                      Check("s_c = N/pbar - N/rbar", N / pb - N / rb, "==", s_c)])]
        for region in ("B", "B_complement"):
            splits.append(_holder_hs_type(F, fam, N, b, al, th, s_c, rb, r, region))
    else:
        raise KeyError(family)
    return pairs, splits


def build_named_pairs(params: ModelParams, theta=Fraction(1, 1000), eps=Fraction(1, 1000),
                      family: str | None = None) -> list:
    """Named pairs of one family (or of every family whose hypotheses hold).

    Raises HypothesisViolation when the requested family does not apply, or
    when no family applies at all.
    """
    fams = [family] if family else [f for f in FAMILIES if family_applies(f, params)]
    if family and not family_applies(family, params):
        bad = [k for k, v in _conditions(family, params).items() if not v]
        raise HypothesisViolation(f"{family}: failing conditions {bad}")
    if not fams:
        raise HypothesisViolation("no exponent family applies to these parameters")
    out = []
    for f in fams:
        out += _build(f, params, theta, eps)[0]
    return out


def build_holder_splits(params: ModelParams, theta=Fraction(1, 1000), eps=Fraction(1, 1000),
                        family: str | None = None) -> list:
    fams = [family] if family else [f for f in FAMILIES if family_applies(f, params)]
    if family and not family_applies(family, params):
        raise HypothesisViolation(f"{family} does not apply")
    out = []
    for f in fams:
        out += _build(f, params, theta, eps)[1]
    return out


@dataclass
class FamilyReport:
    family: str
    theta: object
    eps: object
    backoffs: int
    pairs: list
    splits: list

    @property
    def ok(self) -> bool:
        return all(p["ok"] for p in self.pairs) and all(s["ok"] for s in self.splits)

    def failures(self) -> list:
        out = []
        for p in self.pairs:
            if not p["ok"]:
                out.append(p["name"])
        for s in self.splits:
            out += [f"{s['name']}:{f}" for f in s["failures"]]
        return out

    def as_dict(self):
        return {"family": self.family, "theta": _num(self.theta), "eps": _num(self.eps),
                "backoffs": self.backoffs, "ok": self.ok, "failures": self.failures(),
                "pairs": self.pairs, "splits": self.splits}


def _search(family, params, theta, eps, max_backoff):
    if not family_applies(family, params):
        bad = [k for k, v in _conditions(family, params).items() if not v]
        raise HypothesisViolation(f"{family}: failing conditions {bad}")
    th, ep = _q(theta), _q(eps)
    win = _window(params)
    for k in range(max_backoff + 1):
        pairs, splits = _build(family, params, th, ep)
        ok = all(_pair_ok(p, params, win) for p in pairs) and all(_split_ok(s) for s in splits)
        if ok or k == max_backoff:
            return ok, th, ep, k, pairs, splits
        th, ep = th / 4, ep / 4


def family_passes(family: str, params: ModelParams, theta=Fraction(1, 1000),
                  eps=Fraction(1, 1000), max_backoff: int = 30) -> bool:
    """Boolean form of ``verify_family`` without building the report."""
    return _search(family, params, theta, eps, max_backoff)[0]


def verify_family(family: str, params: ModelParams, theta=Fraction(1, 1000),
                  eps=Fraction(1, 1000), max_backoff: int = 30) -> FamilyReport:
    """Build and check one family.

    The constructions only claim their properties for theta, eps small
    enough.  When a check fails at the requested values both are divided
    by 4 and the family is rebuilt, up to ``max_backoff`` times; the values
    actually used are reported.  Conditions that fail in the limit
    theta, eps -> 0 are therefore still reported as failures.
    """
    _, th, ep, k, pairs, splits = _search(family, params, theta, eps, max_backoff)
    rp = [verify_named_pair(p, params) for p in pairs]
    rs = [verify_holder_split(s, params) for s in splits]
    return FamilyReport(family, th, ep, k, rp, rs)


def verification_report(params: ModelParams, theta=Fraction(1, 1000),
                        eps=Fraction(1, 1000)) -> dict:
    fams = [f for f in FAMILIES if family_applies(f, params)]
    reps = [verify_family(f, params, theta, eps) for f in fams]
    rejected = {f: [k for k, v in _conditions(f, params).items() if not v]
                for f in FAMILIES if f not in fams}
    return {"params": {"N": params.dim, "a": _num(params.a), "b": _num(params.b),
                       "alpha": _num(params.alpha)},
            "families": [r.as_dict() for r in reps],
            "not_applicable": rejected,
            "all_pass": bool(reps) and all(r.ok for r in reps)}


# ------------------------------------------------------------- sampling

def sample_family_params(family: str, rng: np.random.Generator) -> ModelParams:
    """Uniform draw from the open parameter region of a family."""
    u = rng.uniform
    if family in ("small_data_3d", "small_data_nonradial_low"):
        N = 3
    elif family == "small_data_nonradial_high":
        N = int(rng.integers(3, 6))
    else:
        N = int(rng.integers(3, 9))
    if family == "local_high_power":
        b = u(0, min(N / 2, 2))
        lo = max(0.0, (2 - 2 * b) / (N - 2))
        al = u(lo, (4 - 2 * b) / (N - 2))
        a = strichartz_a_floor(N, b, al) + u(0, 3)
    elif family == "local_low_power":
        b = u(0, 1)
        al = u((2 - 2 * b) / N, (2 - 2 * b) / (N - 2))
        a = -(N - 2) ** 2 / 4 + u(0, 3)
    elif family == "small_data_radial":
        b = u(0, min(N / 2, 2))
        al = u((4 - 2 * b) / N, (4 - 2 * b) / (N - 2))
        a = u(0, 3)
    elif family == "small_data_3d":
        b = u(0, 1.5)
        al = u(max((4 - 2 * b) / 3, 1), 4 - 2 * b)
        a = u(0, 3)
    elif family == "small_data_nonradial_low":
        b = u(0, 0.5)
        al = u((4 - 2 * b) / 3, 2 - 2 * b)
        a = -0.25 + u(0, 3)
    elif family == "small_data_nonradial_high":
        b = u(0, (6 - N) / 2)
        al = u(max((2 - 2 * b) / (N - 2), (4 - 2 * b) / N, 1), (4 - 2 * b) / (N - 2))
        a = strichartz_a_floor(N, b, al) + u(0, 3)
    else:
        raise KeyError(family)
    return ModelParams(N, float(a), float(b), float(al))
