"""Time evolution of radial data.

Strang splitting of i u_t = L_a u - lam r^{-b} |u|^alpha u into

* the linear flow, one Crank-Nicolson step on w = r^{(N-1)/2} u with the
  symmetrized operator (unitary in the discrete l^2 norm), and
* the nonlinear flow, which keeps |u| fixed pointwise and is therefore
  the exact phase rotation u -> u exp(i lam dt r^{-b} |u|^alpha).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import get_lapack_funcs

from .model import ModelParams
from .radial import (RadialField, RadialGrid, Quadratic, FiniteVarianceViolation,
                     operator_for, to_w, from_w, mass, kinetic_norm_sq,
                     potential_integral, virial_quantities)


class SolveFailure(RuntimeError):
    """The Crank-Nicolson system could not be factorized."""


class InsufficientSamples(ValueError):
    pass


class Status(enum.Enum):
    RUNNING = "Running"
    REACHED_T_END = "ReachedTEnd"
    BLOWUP = "BlowupDetected"
    UNRESOLVED = "Unresolved"

    @property
    def terminal(self) -> bool:
        return self is not Status.RUNNING


@dataclass
class EvolutionConfig:
    dt: float = 1e-3
    t_end: float = 1.0
    snapshot_every: int = 10
    blowup_gradient_factor: float = 1e3
    blowup_linf_factor: float = 1e2
    adapt: bool = True
    max_steps: int = 1_000_000
    mass_tol: float = 1e-10          # per-step relative mass drift that halves dt
    max_halvings: int = 12
    weight: object = field(default_factory=Quadratic)
    keep_times: tuple = ()           # states stored at these times
    nonlinear: bool = True           # False: linear flow only
    store_snapshots: bool = False    # keep the state at every snapshot

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not (self.blowup_gradient_factor > 1 and self.blowup_linf_factor > 1):
            raise ValueError("blow-up factors must exceed 1")
        if self.snapshot_every < 1 or self.max_steps < 1:
            raise ValueError("snapshot_every and max_steps must be positive")


@dataclass
class TrajectoryRecord:
    t: float
    mass: float
    energy: float
    h1a: float
    kinetic: float
    linf: float
    V: float
    Vp: float
    Vpp: float
    status: Status
    dt: float = math.nan

    def as_row(self) -> list:
        return [self.t, self.mass, self.energy, self.h1a, self.kinetic, self.linf,
                self.V, self.Vp, self.Vpp, self.status.value]


COLUMNS = ("t", "mass", "energy", "h1a", "kinetic", "linf", "V", "Vp", "Vpp", "status")


@dataclass
class Evolution:
    final: RadialField
    trajectory: list
    status: Status
    states: dict = field(default_factory=dict)   # t -> RadialField
    t_star: float | None = None
    snapshots: list = field(default_factory=list)  # (t, RadialField) if stored

    def __iter__(self):
        # allows final, trajectory, status = evolve(...)
        return iter((self.final, self.trajectory, self.status))


# ------------------------------------------------------------- substeps

class _CrankNicolson:
    """(I + i dt/2 A) w_new = (I - i dt/2 A) w with a cached banded LU."""

    def __init__(self, grid: RadialGrid, a: float, dt: float):
        self.op = operator_for(grid, float(a))
        self.dt = dt
        k = self.op.bandwidth
        self.k = k
        ab = self.op.banded(1.0 + 0j, 0.5j * dt)
        # LAPACK gbtrf wants kl extra rows on top for the fill-in
        lab = np.zeros((3 * k + 1, grid.M), dtype=complex)
        lab[k:] = ab
        gbtrf, self._gbtrs = get_lapack_funcs(("gbtrf", "gbtrs"), (lab,))
        self.lu, self.piv, info = gbtrf(lab, k, k)
        if info != 0:
            raise SolveFailure(f"banded LU failed (info={info})")

    def __call__(self, w: np.ndarray) -> np.ndarray:
        rhs = w - 0.5j * self.dt * self.op.apply(w)
        x, info = self._gbtrs(self.lu, self.k, self.k, rhs, self.piv)
        if info != 0:
            raise SolveFailure(f"banded solve failed (info={info})")
        return x


@lru_cache(maxsize=16)
def _propagator(grid: RadialGrid, a: float, dt: float) -> _CrankNicolson:
    return _CrankNicolson(grid, a, dt)


def linear_step(u: RadialField, dt: float, params: ModelParams) -> RadialField:
    """One Crank-Nicolson step of i u_t = L_a u (dt < 0 runs backwards)."""
    g = u.grid
    cn = _propagator(g, float(params.a), float(dt))
    return from_w(g, cn(to_w(u).astype(complex)))


def nonlinear_step(u: RadialField, dt: float, params: ModelParams) -> RadialField:
    """u * exp(i lam dt r^{-b} |u|^alpha), exact for the nonlinear sub-flow."""
    p = params.as_floats()
    g = u.grid
    with np.errstate(over="raise", invalid="raise"):
        phase = p.lam * dt * g.r ** (-p.b) * np.abs(u.values) ** p.alpha
    if not np.all(np.isfinite(phase)):
        raise FloatingPointError("nonlinear phase overflowed")
    return RadialField(g, u.values * np.exp(1j * phase))


def strang_step(u: RadialField, dt: float, params: ModelParams, nonlinear: bool = True):
    if not nonlinear:
        return linear_step(u, dt, params)
    u = nonlinear_step(u, dt / 2, params)
    u = linear_step(u, dt, params)
    return nonlinear_step(u, dt / 2, params)


# ------------------------------------------------------------ diagnostics

def _energy(u: RadialField, p: ModelParams, K: float) -> float:
    return 0.5 * K - p.lam / (p.alpha + 2) * potential_integral(u, p.b, p.alpha)


def _record(u: RadialField, t: float, p: ModelParams, cfg: EvolutionConfig,
            status: Status, dt: float) -> TrajectoryRecord:
    Mu = mass(u)
    K = kinetic_norm_sq(u, p.a)
    E = _energy(u, p, K)
    try:
        V, V1, V2 = virial_quantities(u, p, cfg.weight)
    except FiniteVarianceViolation:
        V = V1 = V2 = math.nan
    return TrajectoryRecord(t, Mu, E, math.sqrt(Mu + K), K, float(np.abs(u.values).max()),
                            V, V1, V2, status, dt)


def evolve(u0: RadialField, params: ModelParams, cfg: EvolutionConfig) -> Evolution:
    """Integrate from t = 0 to cfg.t_end.

    Step control: dt is halved (up to max_halvings times) whenever one step
    changes the mass by more than mass_tol.  In the focusing case the step
    also follows the time scale L^2 of a concentrating profile of width L:
    since max|u| grows like L^{-(2-b)/alpha}, dt = dt0 (linf0/linf)^{2 alpha/(2-b)}
    once max|u| exceeds its initial value.
    Blow-up is declared when the kinetic term exceeds
    blowup_gradient_factor * K0 or max|u| exceeds blowup_linf_factor times
    its initial value; the run is Unresolved when the step control is
    exhausted or max_steps is reached first.
    """
    p = params.as_floats()
    u = u0.copy()
    t, steps, halvings = 0.0, 0, 0
    M0 = mass(u)
    K0 = kinetic_norm_sq(u, p.a)
    linf0 = float(np.abs(u.values).max())
    keep = sorted(k for k in cfg.keep_times if 0 < k <= cfg.t_end)
    states = {}
    traj = [_record(u, 0.0, p, cfg, Status.RUNNING, cfg.dt)]
    status, t_star = Status.RUNNING, None
    K, linf = K0, linf0
    Mprev = M0
    snaps = [(0.0, u.copy())] if cfg.store_snapshots else []
    while True:
        if t >= cfg.t_end - 1e-12 * max(1.0, cfg.t_end):
            status = Status.REACHED_T_END
            break
        if steps >= cfg.max_steps:
            status = Status.UNRESOLVED
            break
        dt = cfg.dt / 2 ** halvings
        if cfg.adapt and p.lam > 0 and linf > linf0:
            dt = min(dt, cfg.dt * (linf0 / linf) ** (2 * p.alpha / (2 - p.b)))
        nxt = keep[0] if keep else cfg.t_end
        dt = min(dt, cfg.t_end - t, nxt - t)
        try:
            un = strang_step(u, dt, p, cfg.nonlinear)
        except FloatingPointError:
            status, t_star = Status.BLOWUP, t
            break
        Mn = mass(un)
        if cfg.adapt and abs(Mn - Mprev) > cfg.mass_tol * Mprev:
            if halvings >= cfg.max_halvings:
                status = Status.UNRESOLVED
                break
            halvings += 1
            continue
        u, t, Mprev = un, t + dt, Mn
        steps += 1
        K = kinetic_norm_sq(u, p.a)
        while keep and t >= keep[0] - 1e-12:
            states[keep.pop(0)] = u.copy()
        linf = float(np.abs(u.values).max())
        if K > cfg.blowup_gradient_factor * K0 or linf > cfg.blowup_linf_factor * linf0:
            status, t_star = Status.BLOWUP, t
            break
        if steps % cfg.snapshot_every == 0:
            traj.append(_record(u, t, p, cfg, Status.RUNNING, dt))
            if cfg.store_snapshots:
                snaps.append((t, u.copy()))
    last = _record(u, t, p, cfg, status, dt if steps else cfg.dt)
    if traj[-1].t == t and len(traj) > 1:
        traj[-1] = last
    else:
        traj.append(last)
    if cfg.store_snapshots and snaps[-1][0] != t:
        snaps.append((t, u.copy()))
    return Evolution(u, traj, status, states, t_star, snaps)


# ----------------------------------------------------------------- audits

def second_derivative(t, V):
    """d^2V/dt^2 at interior samples of a possibly non-uniform time series."""
    t, V = np.asarray(t, float), np.asarray(V, float)
    h0, h1 = t[1:-1] - t[:-2], t[2:] - t[1:-1]
    return t[1:-1], 2 * (h0 * V[2:] - (h0 + h1) * V[1:-1] + h1 * V[:-2]) / (h0 * h1 * (h0 + h1))


def virial_audit(trajectory, params: ModelParams, eta: float | None = None,
                 slack: float = 0.05) -> dict:
    """Two-sided check of the virial identity along a trajectory.

    d^2V/dt^2 from finite differences of the recorded V is compared with
    the recorded V'' (built from the integral formula).  For the
    quadratic weight the identity value 8K - lam (4N alpha + 8b)/(alpha+2) P
    equals 16 E in the mass-critical case.  For truncated weights the
    report carries the inequality checks V'' <= 15 E(u0) (with slack) and,
    when eta is given, V'' <= -7 eta (with slack).
    """
    recs = [r for r in trajectory if np.isfinite(r.V)]
    if len(recs) < 5:
        raise InsufficientSamples("virial audit needs at least 5 samples with finite V")
    t = np.array([r.t for r in recs])
    V = np.array([r.V for r in recs])
    Vpp = np.array([r.Vpp for r in recs])
    tm, d2 = second_derivative(t, V)
    ident = Vpp[1:-1]
    scale = np.max(np.abs(ident))
    rel = np.abs(d2 - ident) / max(scale, 1e-300)
    E0 = recs[0].energy
    p = params.as_floats()
    out = {
        "t": tm.tolist(),
        "fd_Vpp": d2.tolist(),
        "identity_Vpp": ident.tolist(),
        "max_rel_dev": float(rel.max()),
        "E0": E0,
        "sixteen_E0": 16 * E0,
        "max_Vpp": float(Vpp.max()),
    }
    from .model import derive_indices, Regime
    if derive_indices(params).regime is Regime.MASS_CRITICAL:
        out["max_rel_dev_16E"] = float(np.max(np.abs(d2 - 16 * E0)) / abs(16 * E0)) if E0 else math.inf
    if E0 < 0:
        bound = 15 * E0 + slack * abs(15 * E0)
        out["bound_15E"] = bound
        out["holds_15E"] = bool(np.all(Vpp <= bound))
    if eta is not None:
        bound = -7 * eta + slack * 7 * eta
        out["bound_7eta"] = bound
        out["holds_7eta"] = bool(np.all(Vpp <= bound))
    return out


def scattering_diagnostic(evolution: Evolution, params: ModelParams, dt: float,
                          times=None) -> list:
    """Cauchy increments of phi(t) = e^{i t L_a} u(t) in H^1_a.

    The stored states are pulled back to t = 0 with the same Crank-Nicolson
    propagator run at -dt, and consecutive profiles are compared.
    """
    if evolution.status is not Status.REACHED_T_END:
        raise ValueError(f"scattering diagnostic needs a completed run, got {evolution.status.value}")
    ts = sorted(evolution.states) if times is None else list(times)
    if len(ts) < 2:
        raise InsufficientSamples("need states at two or more times")
    p = params.as_floats()
    phis = []
    for tk in ts:
        u = evolution.states[tk]
        n = int(round(tk / dt))
        step = tk / n
        for _ in range(n):
            u = linear_step(u, -step, p)
        phis.append(u)
    out = []
    for k in range(len(ts) - 1):
        d = RadialField(phis[k].grid, phis[k + 1].values - phis[k].values)
        out.append((ts[k + 1], math.sqrt(mass(d) + kinetic_norm_sq(d, p.a))))
    return out
