"""Ground states, the sharp Gagliardo-Nirenberg constant and thresholds.

Q > 0 solves L_a Q + Q - r^{-b} Q^{alpha+1} = 0.  Writing Q = r^{-rho} v
turns L_a into the flat radial Laplacian in the (generally fractional)
dimension D = 2 + 2 nu:

    v'' + (D-1)/r v' = v - r^p |v|^alpha v,     p = -b - alpha rho,

and v is bounded at the origin: smooth and even when p = 0, with an
r^{p+2} correction otherwise.  Two independent solvers are
provided:

* shooting: bisection on v(0) = s, then a two-sided match with the decaying
  branch integrated inward from large r;
* flow: normalized imaginary-time flow on a Chebyshev grid in y, r = R y^2,
  followed by the two-parameter rescaling to unit frequency.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.integrate import solve_ivp
from scipy.linalg import lu_factor, lu_solve
from scipy.optimize import brentq
from scipy.special import kve

from .model import (ModelParams, HypothesisViolation, RegimeMismatch, Regime,
                    derive_indices)
from .radial import (RadialGrid, RadialField, mass, kinetic_norm_sq,
                     potential_integral, weinstein_quotient, sphere_area)


class NoConvergence(RuntimeError):
    pass


@dataclass
class SolverOpts:
    method: str = "shooting"          # "shooting" | "flow"
    M: int = 8192
    r_max: float = 30.0
    tol: float = 1e-8                 # elliptic residual / ||Q||_{H^1}
    r0: float = 1e-4                  # series start for shooting
    s_window: tuple = (1e-6, 1e3)
    max_bisect: int = 200
    r_far: float = 26.0               # inward integration starts here
    cheb_n: int = 512
    flow_R: float = 30.0
    flow_tau: float = 10.0
    flow_sigma: float | None = None   # None: matched to the trial profile
    flow_maxiter: int = 20000
    flow_tol: float = 1e-14


@dataclass(frozen=True)
class _Reduced:
    N: int
    nu: float
    rho: float
    D: float
    p: float
    alpha: float

    @property
    def beta(self):
        return self.p + 2


def _reduced(params: ModelParams) -> _Reduced:
    pf = params.as_floats()
    ind = derive_indices(params)
    nu, rho = float(ind.nu), float(ind.rho)
    return _Reduced(pf.dim, nu, rho, 2 + 2 * nu, -pf.b - pf.alpha * rho, pf.alpha)


def _tail(rd: _Reduced, c, r):
    """c * r^{-nu} K_nu(r) scaled by e^{r_ref}: returns (v, v')."""
    r = np.asarray(r, dtype=float)
    e = np.exp(-r)
    v = c * r ** (-rd.nu) * kve(rd.nu, r) * e
    dv = -c * r ** (-rd.nu) * kve(rd.nu + 1, r) * e
    return v, dv


class Profile:
    """Reduced profile v(r) with derivative, valid for all r > 0."""

    def v(self, r):
        raise NotImplementedError

    def dv(self, r):
        raise NotImplementedError

    def q(self, r):
        """Q(r) = r^{-rho} v(r)."""
        r = np.asarray(r, dtype=float)
        return r ** (-self.rd.rho) * self.v(r)


def _series(rd: _Reduced, s, r):
    """Expansion of v at the origin through the r^{2 beta} term:
    v = s + s r^2/(2D) + c2 r^beta + c3 r^{2 beta}."""
    al, D, B = rd.alpha, rd.D, rd.beta
    c1 = s / (2 * D)
    c2 = -s ** (al + 1) / (B * (B + D - 2))
    c3 = -(al + 1) * s ** al * c2 / (2 * B * (2 * B + D - 2))
    v = s + c1 * r ** 2 + c2 * r ** B + c3 * r ** (2 * B)
    dv = 2 * c1 * r + B * c2 * r ** (B - 1) + 2 * B * c3 * r ** (2 * B - 1)
    return v, dv


def _start_radius(rd: _Reduced, s, r0):
    """Shrink r0 until the neglected series terms are below ~1e-15."""
    return min(r0, (1e-5 / s ** rd.alpha) ** (1 / rd.beta))


class ShootingProfile(Profile):
    def __init__(self, rd, s, r0, out, r_m, inn, r_far, c):
        self.rd, self.s, self.r0 = rd, s, r0
        self.out, self.r_m, self.inn, self.r_far, self.c = out, r_m, inn, r_far, c

    def _series(self, r):
        return _series(self.rd, self.s, r)

    def _eval(self, r, k):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        m0 = r <= self.r0
        m1 = (r > self.r0) & (r <= self.r_m)
        m2 = (r > self.r_m) & (r <= self.r_far)
        m3 = r > self.r_far
        if m0.any():
            out[m0] = self._series(r[m0])[k]
        if m1.any():
            out[m1] = self.out.sol(r[m1])[k]
        if m2.any():
            out[m2] = self.c * self.inn.sol(r[m2])[k]
        if m3.any():
            out[m3] = _tail(self.rd, self.c_tail, r[m3])[k]
        return out

    @property
    def c_tail(self):
        v_far = _tail(self.rd, 1.0, self.r_far)[0]
        return self.c * float(self.inn.sol(self.r_far)[0]) / float(v_far)

    def v(self, r):
        return self._eval(r, 0)

    def dv(self, r):
        return self._eval(r, 1)


class FlowProfile(Profile):
    """v(r) = lam g(mu r), g stored as a Chebyshev series in y = sqrt(r/R)."""

    def __init__(self, rd, coef, R, lam, mu, r_cut):
        self.rd, self.coef, self.R, self.lam, self.mu = rd, coef, R, lam, mu
        self.dcoef = C.chebder(coef)
        self.r_cut = r_cut
        v_c = self._inner(np.array([r_cut]), 0)[0]
        self.c_tail = v_c / _tail(rd, 1.0, r_cut)[0]

    def _inner(self, r, k):
        y = np.sqrt(self.mu * r / self.R)
        x = 1 - 2 * y
        if k == 0:
            return self.lam * C.chebval(x, self.coef)
        gy = -2 * C.chebval(x, self.dcoef)
        return self.lam * self.mu * gy / (2 * self.R * y)

    def _eval(self, r, k):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        m = r <= self.r_cut
        if m.any():
            out[m] = self._inner(r[m], k)
        if (~m).any():
            out[~m] = _tail(self.rd, self.c_tail, r[~m])[k]
        return out

    def v(self, r):
        return self._eval(r, 0)

    def dv(self, r):
        return self._eval(r, 1)


# ------------------------------------------------------------- shooting

def _shoot(params: ModelParams, opts: SolverOpts):
    rd = _reduced(params)
    D, p, al = rd.D, rd.p, rd.alpha

    def rhs(r, y):
        v, dv = y[0], y[1]
        nl = r ** p * abs(v) ** al * v
        return [dv, v - nl - (D - 1) / r * dv,
                v * v * r ** (D - 1), dv * dv * r ** (D - 1), nl * v * r ** (D - 1)]

    def rhs2(r, y):
        return rhs(r, y)[:2]

    def start(s):
        r0 = _start_radius(rd, s, opts.r0)
        return r0, list(_series(rd, s, r0))

    def ev_cross(r, y):
        return y[0]
    ev_cross.terminal, ev_cross.direction = True, -1

    def ev_up(r, y):
        return y[1]
    ev_up.terminal, ev_up.direction = True, 1

    def run(s, r_end=60.0):
        r0, y0 = start(s)
        return solve_ivp(rhs2, (r0, r_end), y0, method="DOP853", rtol=1e-13,
                         atol=1e-15, events=[ev_cross, ev_up])

    lo, hi = opts.s_window
    if run(lo).t_events[0].size:
        raise NoConvergence("shooting window does not bracket the ground state")
    it = 0
    for it in range(opts.max_bisect):
        s = math.sqrt(lo * hi) if hi / lo > 2 else 0.5 * (lo + hi)
        if start(s)[1][0] <= 0:
            # the series is already past its range at r0
            hi = s
            continue
        sol = run(s)
        if sol.t_events[0].size:
            hi = s
        elif sol.t_events[1].size:
            lo = s
        else:
            break
        if hi - lo <= 4e-16 * hi:
            break
    else:
        raise NoConvergence("bisection did not converge")
    s = 0.5 * (lo + hi)
    r_event = float(run(s).t[-1])
    r_m = min(4.0, r_event / 3)
    r_far = opts.r_far

    # inward decaying branch: v = c * w with w(r_far) = r^{-nu} K_nu(r) e^{r}
    w0, dw0 = (x / math.exp(-r_far) for x in _tail(rd, 1.0, r_far))

    def inward(c):
        def f(r, y):
            w, dw = y[0], y[1]
            nl = c ** al * r ** p * abs(w) ** al * w
            return [dw, w - nl - (D - 1) / r * dw,
                    w * w * r ** (D - 1), dw * dw * r ** (D - 1), nl * w * r ** (D - 1)]
        return solve_ivp(f, (r_far, r_m), [w0, dw0, 0.0, 0.0, 0.0], method="DOP853",
                         rtol=1e-13, atol=1e-300, first_step=1e-3, dense_output=True)

    def outward(s):
        r0, y0 = start(s)
        return solve_ivp(rhs, (r0, r_m), y0 + [0.0, 0.0, 0.0], method="DOP853",
                         rtol=1e-13, atol=1e-15, dense_output=True)

    def mismatch(s, c):
        o, i = outward(s), inward(c)
        return np.array([o.y[0, -1] - c * i.y[0, -1], o.y[1, -1] - c * i.y[1, -1]]), o, i

    o = outward(s)
    i_lin = inward(0.0)
    c = o.y[0, -1] / i_lin.y[0, -1]
    x = np.array([s, c])
    for newton in range(20):
        F, o, i = mismatch(*x)
        scale = np.array([abs(o.y[0, -1]), abs(o.y[1, -1])])
        if np.all(np.abs(F) <= 1e-13 * scale):
            break
        J = np.empty((2, 2))
        for k in range(2):
            dx = np.zeros(2)
            dx[k] = 1e-7 * x[k]
            J[:, k] = (mismatch(*(x + dx))[0] - F) / dx[k]
        x = x - np.linalg.solve(J, F)
    s, c = x
    F, o, i = mismatch(s, c)
    r0 = o.t[0]
    prof = ShootingProfile(rd, s, r0, o, r_m, i, r_far, c)

    om = sphere_area(rd.N)
    # contributions of [0, r0] from the two leading terms of v'
    B = rd.beta
    k1, k2 = s / D, -s ** (al + 1) / (B + D - 2)
    mass0 = s * s * r0 ** D / D
    kin0 = (k1 * k1 * r0 ** (D + 2) / (D + 2) + 2 * k1 * k2 * r0 ** (B + D) / (B + D)
            + k2 * k2 * r0 ** (2 * B + D - 2) / (2 * B + D - 2))
    pot0 = s ** (al + 2) * r0 ** (p + D) / (p + D)
    integrals = {
        "mass": om * (mass0 + o.y[2, -1] - c * c * i.y[2, -1]),
        "kinetic": om * (kin0 + o.y[3, -1] - c * c * i.y[3, -1]),
        "potential": om * (pot0 + o.y[4, -1] - c * c * i.y[4, -1]),
    }
    meta = {"method": "shooting", "s": float(s), "bisection_iterations": it + 1,
            "newton_iterations": newton, "r_event": r_event, "r_match": r_m,
            "match_mismatch": [float(abs(F[0]) / abs(o.y[0, -1])), float(abs(F[1]) / abs(o.y[1, -1]))],
            "continuum": {k: float(v) for k, v in integrals.items()}}
    return prof, meta


# ----------------------------------------------------------------- flow

def cheb(n: int):
    """Chebyshev differentiation matrix and extrema x_k = cos(pi k/n)."""
    x = np.cos(np.pi * np.arange(n + 1) / n)
    c = np.r_[2, np.ones(n - 1), 2] * (-1) ** np.arange(n + 1)
    X = np.tile(x, (n + 1, 1)).T
    dX = X - X.T
    Dm = np.outer(c, 1 / c) / (dX + np.eye(n + 1))
    return Dm - np.diag(Dm.sum(1)), x


def clenshaw_curtis(n: int) -> np.ndarray:
    """Clenshaw-Curtis weights on [-1, 1] for the nodes of cheb(n)."""
    th = np.pi * np.arange(n + 1) / n
    w = np.zeros(n + 1)
    v = np.ones(n - 1)
    if n % 2 == 0:
        w[0] = w[n] = 1 / (n * n - 1)
        for k in range(1, n // 2):
            v -= 2 * np.cos(2 * k * th[1:-1]) / (4 * k * k - 1)
        v -= np.cos(n * th[1:-1]) / (n * n - 1)
    else:
        w[0] = w[n] = 1 / (n * n)
        for k in range(1, (n - 1) // 2 + 1):
            v -= 2 * np.cos(2 * k * th[1:-1]) / (4 * k * k - 1)
    w[1:-1] = 2 * v / n
    return w


class _ChebRadial:
    """Collocation in y in [0, 1], r = R y^2, for the reduced operator
    -(v'' + (D-1)/r v') = -(v_yy + (2D-3)/y v_y) / (4 R^2 y^2)."""

    def __init__(self, n, R, D, N):
        Dm, x = cheb(n)
        self.x = x                                  # x = 1 - 2y, descending in x
        self.y = (1 - x) / 2
        self.Dy = -2 * Dm
        self.R, self.D = R, D
        self.r = R * self.y ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            self.L = -(self.Dy @ self.Dy + np.diag((2 * D - 3) / self.y) @ self.Dy) / (
                4 * R * R * self.y[:, None] ** 2)
        w = clenshaw_curtis(n) / 2
        self.wq = sphere_area(N) * w * self.r ** (D - 1) * 2 * R * self.y

    def interior(self):
        return slice(1, -1)


def _flow(params: ModelParams, opts: SolverOpts):
    rd = _reduced(params)
    D, p, al = rd.D, rd.p, rd.alpha
    n, R, tau = opts.cheb_n, opts.flow_R, opts.flow_tau
    cg = _ChebRadial(n, R, D, rd.N)
    r, wq = cg.r, cg.wq
    I = np.eye(n + 1)
    Lb = cg.L.copy()
    Lb[0] = cg.Dy[0]                    # v_y(0) = 0
    Lb[-1] = 0
    Lb[-1, -1] = 1                      # v(R) = 0
    pr = np.zeros_like(r)
    pr[1:] = r[1:] ** p
    sl = cg.interior()

    def norms(v):
        Lv = cg.L[sl] @ v
        return (np.sum(wq[sl] * v[sl] ** 2), np.sum(wq[sl] * v[sl] * Lv),
                np.sum(wq[sl] * pr[sl] * np.abs(v[sl]) ** (al + 2)))

    e = rd.N * al + 2 * float(params.b)
    v = np.exp(-r)
    m0 = 1.0
    v *= math.sqrt(m0 / norms(v)[0])
    sigma = opts.flow_sigma
    if sigma is None:
        # the trial then satisfies K / (sigma P) = e / (2(alpha+2)), the
        # scale-invariant ratio shared by all rescaled ground states
        _, K1, P1 = norms(v)
        sigma = K1 * 2 * (al + 2) / (e * P1)
    A = I + tau * (Lb + I)
    A[0], A[-1] = Lb[0], Lb[-1]
    lu = lu_factor(A)
    it, dv = 0, np.inf
    for it in range(opts.flow_maxiter):
        rhs = v + tau * sigma * pr * np.abs(v) ** al * v
        rhs[0] = rhs[-1] = 0
        vn = lu_solve(lu, rhs)
        vn *= math.sqrt(m0 / norms(vn)[0])
        dv = np.max(np.abs(vn - v))
        v = vn
        if dv < opts.flow_tol:
            break
    else:
        if dv > 1e-10:
            raise NoConvergence(f"gradient flow stalled at step size {dv:.2e}")
    if np.min(v) < -1e-10 * np.max(v):
        raise NoConvergence("gradient flow left the positive cone")
    # fit L v + A v = B N(v) in the weighted least-squares sense
    Lv = cg.L[sl] @ v
    Nv = (pr * np.abs(v) ** al * v)[sl]
    vv = v[sl]
    w = wq[sl]
    G = np.array([[np.sum(w * vv * vv), -np.sum(w * vv * Nv)],
                  [np.sum(w * Nv * vv), -np.sum(w * Nv * Nv)]])
    A_fit, B_fit = np.linalg.solve(G, -np.array([np.sum(w * vv * Lv), np.sum(w * Nv * Lv)]))
    mu = A_fit ** -0.5
    lam = (mu ** (2 + p) * B_fit) ** (1 / al)
    coef = C.chebfit(cg.x, v, n)
    r_cut = min(0.8 * R / mu, 20.0)
    prof = FlowProfile(rd, coef, R, lam, mu, r_cut)
    Mg, Kg, Pg = norms(v)
    integrals = {"mass": lam ** 2 * mu ** (-D) * Mg,
                 "kinetic": lam ** 2 * mu ** (2 - D) * Kg,
                 "potential": lam ** (al + 2) * mu ** (-p - D) * Pg}
    N, b = rd.N, float(params.b)
    meta = {"method": "flow", "iterations": it + 1, "last_update": float(dv),
            "sigma": float(sigma), "A_fit": float(A_fit), "B_fit": float(B_fit),
            "mu": float(mu), "lambda": float(lam),
            "printed_mu": (4 - 2 * b - al * (N - 2)) / (N * al + 2 * b),
            "continuum": {k: float(x) for k, x in integrals.items()}}
    return prof, meta


# ------------------------------------------------------------ interface

def ground_state_admissible(params: ModelParams) -> dict:
    """Conditions under which a ground state exists (energy-method range)."""
    N, b, al = params.dim, float(params.b), float(params.alpha)
    return {
        "lam=1": params.lam == 1,
        "0<=b<2": 0 <= b < 2,
        "0<alpha<(4-2b)/(N-2)": 0 < al < (4 - 2 * b) / (N - 2) - 1e-12,
        "a>-(N-2)^2/4": float(params.a) > -(N - 2) ** 2 / 4,
    }


@dataclass
class GroundState:
    params: ModelParams
    profile: RadialField
    mass: float
    kinetic: float
    potential: float
    energy: float
    sharp_constant: float
    solver_meta: dict = field(default_factory=dict)
    shape: Profile = field(default=None, repr=False)

    def field_on(self, grid: RadialGrid) -> RadialField:
        """Q sampled on another grid (the profile is a continuous object)."""
        if grid.dim != self.params.dim:
            raise ValueError("grid dimension differs from the model dimension")
        return RadialField(grid, self.shape.q(grid.r))

    def summary(self) -> dict:
        return {"mass": self.mass, "kinetic": self.kinetic, "potential": self.potential,
                "energy": self.energy, "C_a": self.sharp_constant,
                "solver_meta": self.solver_meta}


def _on_grid(params, prof, grid, meta):
    Q = RadialField(grid, prof.q(grid.r))
    if np.any(Q.values.real <= 0):
        raise NoConvergence("profile is not positive on the grid")
    # Q = r^{-rho} v with v not even in r once p != 0, so the grid
    # functionals use the product rule adapted to that behavior
    pf = params.as_floats()
    rho = prof.rd.rho
    Mq = mass(Q, rho)
    Kq = kinetic_norm_sq(Q, pf.a, method="adapted")
    Pq = potential_integral(Q, pf.b, pf.alpha, rho)
    E = 0.5 * Kq - Pq / (pf.alpha + 2)
    return GroundState(params, Q, Mq, Kq, Pq, E,
                       1 / weinstein_quotient(Q, params, method="adapted"), meta, prof)


def regrid(gs: "GroundState", grid: RadialGrid) -> "GroundState":
    """The same profile with its functionals evaluated on another grid."""
    return _on_grid(gs.params, gs.shape, grid, dict(gs.solver_meta))


def solve_ground_state(params: ModelParams, opts: SolverOpts | None = None) -> GroundState:
    opts = opts or SolverOpts()
    cond = ground_state_admissible(params)
    bad = [k for k, v in cond.items() if not v]
    if bad:
        raise HypothesisViolation(f"no ground state in this range; failing: {bad}")
    if opts.method == "shooting":
        prof, meta = _shoot(params, opts)
    elif opts.method == "flow":
        prof, meta = _flow(params, opts)
    else:
        raise ValueError(f"unknown method {opts.method!r}")
    gs = _on_grid(params, prof, RadialGrid(params.dim, opts.M, opts.r_max), meta)
    res = elliptic_residual(gs)
    meta["residual"] = res
    if res > opts.tol:
        raise NoConvergence(f"elliptic residual {res:.2e} exceeds tol {opts.tol:g}")
    return gs


def _gauss_nodes(R: float, n: int = 400):
    """Gauss-Legendre nodes in y on (0, 1), r = R y^2, with dr weights."""
    x, w = np.polynomial.legendre.leggauss(n)
    y = (x + 1) / 2
    return R * y ** 2, w / 2 * 2 * R * y


def elliptic_residual(gs: GroundState, R: float = 20.0) -> float:
    """Relative residual of the elliptic equation in flux form.

    Integrating the reduced equation against r^{D-1} gives

        F(r) = r^{D-1} v'(r) - int_0^r (v - t^p |v|^alpha v) t^{D-1} dt = 0.

    F is evaluated from the solver's own (v, v') at panel ends, with the
    integral done by composite Gauss-Legendre on panels that refine
    geometrically towards r = 0.  No second derivative is taken, so the
    r^{p+2} singularity of v at the origin does not spoil the check.
    Returns max |F| / max |r^{D-1} v'|.
    """
    rd = gs.shape.rd
    edges = np.r_[np.geomspace(1e-8, 1.0, 60), np.linspace(1.0, R, 96)[1:]]
    x, w = np.polynomial.legendre.leggauss(16)
    a, b = edges[:-1, None], edges[1:, None]
    t = (a + b) / 2 + (b - a) / 2 * x
    wt = (b - a) / 2 * w
    v = gs.shape.v(t.ravel()).reshape(t.shape)
    f = (v - t ** rd.p * np.abs(v) ** rd.alpha * v) * t ** (rd.D - 1)
    I = np.r_[0.0, np.cumsum(np.sum(wt * f, axis=1))]
    flux = edges ** (rd.D - 1) * gs.shape.dv(edges)
    return float(np.max(np.abs(flux - I)) / np.max(np.abs(flux)))


def h1_distance(g1: GroundState, g2: GroundState, R: float = 30.0, n: int = 600) -> float:
    """||Q1 - Q2||_{H^1_a} / ||Q1||_{H^1_a} computed in the reduced variable.

    ||u||^2 + ||sqrt(L_a) u||^2 = omega int (|v|^2 + |v'|^2) r^{D-1} dr for
    u = r^{-rho} v, so both profiles are compared through (v, v') on
    Gauss-Legendre nodes, independently of any grid.
    """
    rd = g1.shape.rd
    r, w = _gauss_nodes(R, n)
    w = w * r ** (rd.D - 1)
    v1, d1 = g1.shape.v(r), g1.shape.dv(r)
    v2, d2 = g2.shape.v(r), g2.shape.dv(r)
    num = np.sum(w * ((v1 - v2) ** 2 + (d1 - d2) ** 2))
    den = np.sum(w * (v1 ** 2 + d1 ** 2))
    return math.sqrt(num / den)


def pohozaev_targets(params: ModelParams):
    """(K/M, P/M) forced on any ground state."""
    pf = params.as_floats()
    N, b, al = pf.dim, pf.b, pf.alpha
    d = 4 - 2 * b - al * (N - 2)
    return (N * al + 2 * b) / d, 2 * (al + 2) / d


def pohozaev_residuals(gs: GroundState, params: ModelParams):
    t1, t2 = pohozaev_targets(params)
    res1 = abs(gs.kinetic - t1 * gs.mass) / gs.kinetic
    res2 = abs(gs.potential - t2 * gs.mass) / gs.potential
    return res1, res2


def sharp_constant(gs: GroundState) -> float:
    return 1 / weinstein_quotient(gs.profile, gs.params, method="adapted")


def mass_from_sharp_constant(C_a: float, params: ModelParams) -> float:
    """M[Q] from C_a, eliminating K and P with the Pohozaev identities:
    M = [2(alpha+2)/(C_a d) (d/e)^{e/4}]^{2/alpha}, e = N alpha + 2b,
    d = 4 - 2b - alpha(N-2)."""
    pf = params.as_floats()
    N, b, al = pf.dim, pf.b, pf.alpha
    e, d = N * al + 2 * b, 4 - 2 * b - al * (N - 2)
    return (2 * (al + 2) / (C_a * d) * (d / e) ** (e / 4)) ** (2 / al)


def mass_from_sharp_constant_as_printed(C_a: float, params: ModelParams) -> float:
    """{2(alpha+2)/(N alpha+2b) d^{(N alpha-(4-2b))/4} / C_a}^{1/(alpha+2)}.

    Kept to document that this form disagrees with the computed mass.
    """
    pf = params.as_floats()
    N, b, al = pf.dim, pf.b, pf.alpha
    d = 4 - 2 * b - al * (N - 2)
    return (2 * (al + 2) / (N * al + 2 * b) * d ** ((N * al - (4 - 2 * b)) / 4) / C_a) ** (1 / (al + 2))


# ------------------------------------------------------------ thresholds

@dataclass
class Thresholds:
    regime: Regime
    mass_Q: float
    energy_Q: float
    kinetic_Q: float
    C_a: float
    mass_crit_threshold: float            # ||Q||_{L^2}
    sigma: float | None = None            # (1 - s_c)/s_c
    s_c: float | None = None
    me_product: float | None = None       # M(Q)^{1-s_c} E(Q)^{s_c}
    grad_product: float | None = None     # ||Q||^{1-s_c} ||sqrt(L_a) Q||^{s_c}
    y_star: float | None = None
    e: float | None = None                # N alpha + 2b
    alpha: float | None = None

    def P(self, y):
        """1/2 y^2 - C_a/(alpha+2) y^{e/2}."""
        if self.y_star is None:
            raise RegimeMismatch("P(y) is only defined in the intercritical regime")
        y = np.asarray(y, dtype=float)
        return 0.5 * y ** 2 - self.C_a / (self.alpha + 2) * y ** (self.e / 2)

    @property
    def trapping_level(self) -> float:
        """M(Q)^sigma E(Q); equals P(y_star)."""
        return self.mass_Q ** self.sigma * self.energy_Q


def thresholds(gs: GroundState, params: ModelParams) -> Thresholds:
    ind = derive_indices(params)
    pf = params.as_floats()
    th = Thresholds(ind.regime, gs.mass, gs.energy, gs.kinetic, gs.sharp_constant,
                    math.sqrt(gs.mass))
    if ind.regime is Regime.INTERCRITICAL:
        s_c = float(ind.s_c)
        e = pf.dim * pf.alpha + 2 * pf.b
        th.s_c, th.sigma, th.e, th.alpha = s_c, (1 - s_c) / s_c, e, pf.alpha
        th.me_product = gs.mass ** (1 - s_c) * gs.energy ** s_c
        th.grad_product = gs.mass ** ((1 - s_c) / 2) * gs.kinetic ** (s_c / 2)
        th.y_star = ((pf.alpha + 2) / (gs.sharp_constant * e / 2)) ** (1 / (e / 2 - 2))
    elif ind.regime is not Regime.MASS_CRITICAL:
        raise RegimeMismatch(f"no thresholds in the {ind.regime.value} regime")
    return th


class Prediction(enum.Enum):
    GLOBAL_MASS_CRITICAL = "global: mass below ground state (mass-critical)"
    BLOWUP_MASS_CRITICAL = "blow-up candidate: negative energy (mass-critical)"
    GLOBAL_INTERCRITICAL = "global: below ground state, gradient below"
    BLOWUP_INTERCRITICAL = "blow-up candidate: below ground state, gradient above"
    NO_PREDICTION = "no prediction"


EQ_RTOL = 1e-6


def _functionals(u0: RadialField, params: ModelParams):
    """(M, K, E) with the same adapted quadrature as the ground state."""
    from .radial import energy
    pf = params.as_floats()
    rho = _reduced(params).rho
    return (mass(u0, rho), kinetic_norm_sq(u0, pf.a, method="adapted"),
            energy(u0, params, method="adapted"))


def classify_initial_data(u0: RadialField, th: Thresholds, params: ModelParams) -> Prediction:
    """Strongest prediction the global-vs-blow-up criteria make for u0.

    Strict inequalities are read with relative margin EQ_RTOL, so u0 = Q
    (equality up to discretization) gives NO_PREDICTION.  Radiality, the
    extra hypothesis for blow-up, always holds here.
    """
    if params.lam != 1:
        return Prediction.NO_PREDICTION
    M0, K0, E0 = _functionals(u0, params)
    if th.regime is Regime.MASS_CRITICAL:
        if M0 < th.mass_Q * (1 - EQ_RTOL):
            return Prediction.GLOBAL_MASS_CRITICAL
        # E(Q) = 0 exactly, so E < 0 is read against the kinetic scale
        if E0 < -EQ_RTOL * K0:
            return Prediction.BLOWUP_MASS_CRITICAL
        return Prediction.NO_PREDICTION
    if th.regime is Regime.INTERCRITICAL:
        lhs = M0 ** th.sigma * E0
        if not lhs < th.trapping_level * (1 - EQ_RTOL):
            return Prediction.NO_PREDICTION
        y0 = M0 ** (th.sigma / 2) * math.sqrt(K0)
        if y0 < th.y_star * (1 - EQ_RTOL):
            return Prediction.GLOBAL_INTERCRITICAL
        if y0 > th.y_star * (1 + EQ_RTOL):
            return Prediction.BLOWUP_INTERCRITICAL
    return Prediction.NO_PREDICTION


def max_delta0(u0: RadialField, th: Thresholds, params: ModelParams) -> float:
    """Largest delta0 with M^sigma E(u0) <= (1 - delta0) M(Q)^sigma E(Q)."""
    if th.y_star is None:
        raise RegimeMismatch("coercivity needs the intercritical regime")
    M0, _, E0 = _functionals(u0, params)
    return 1 - M0 ** th.sigma * E0 / th.trapping_level


def coercivity_gap(u0: RadialField, th: Thresholds, params: ModelParams, delta0: float):
    """(delta, eta) for data below the ground-state level by the factor 1 - delta0.

    delta: |y - y*| >= delta y* whenever P(y) <= (1 - delta0) P(y*), found
    from the two roots of P(y) = (1 - delta0) P(y*).
    eta = M(u0)^{-sigma} delta0 M(Q)^sigma E(Q) (N alpha + 2b)/4.
    """
    if not delta0 > 0:
        raise HypothesisViolation("delta0 must be positive")
    if max_delta0(u0, th, params) < delta0 * (1 - 1e-12):
        raise HypothesisViolation("u0 is not (1 - delta0) below the ground-state level")
    ys = th.y_star
    level = (1 - delta0) * th.trapping_level
    f = lambda y: float(th.P(y)) - level
    y_lo = brentq(f, 0.0, ys) if level > 0 else 0.0
    hi = 2 * ys
    while f(hi) > 0:
        hi *= 2
    y_hi = brentq(f, ys, hi)
    delta = min(1 - y_lo / ys, y_hi / ys - 1)
    eta = _functionals(u0, params)[0] ** (-th.sigma) * delta0 * th.trapping_level * th.e / 4
    return delta, eta
