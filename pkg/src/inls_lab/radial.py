"""Radial grids, the symmetrized operator and integral functionals.

A radial function u(r) on R^N is sampled on the staggered grid
r_j = (j - 1/2) h, j = 1..M, h = r_max / M.  Integrals use the midpoint
rule with weights omega_{N-1} r_j^{N-1} h.

L_a = -Delta + a/r^2 is discretized on w = r^{(N-1)/2} u, where it reads
-w'' + c_eff/r^2 w with c_eff = a + (N-1)(N-3)/4.  Regular solutions behave
like w ~ r^{1/2+nu}, nu = sqrt((N-2)^2/4 + a); the stencil is corrected so
that it annihilates r^{1/2+nu} exactly, which keeps fourth-order accuracy
up to the origin for fields of the form r^{-rho} g(r) with g smooth and even.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal, cholesky_banded, LinAlgError
from scipy.special import gamma, roots_jacobi

from .model import ModelParams, derive_indices


class TruncationWarning(UserWarning):
    """The field does not decay at r_max; integrals may be truncated."""


class NegativeForm(ValueError):
    """A discrete quadratic form that should be nonnegative came out negative."""


class FiniteVarianceViolation(ValueError):
    """The field carries too much mass near r_max for the quadratic weight."""


def sphere_area(N: int) -> float:
    """Area of the unit sphere S^{N-1}."""
    return 2 * math.pi ** (N / 2) / gamma(N / 2)


@dataclass(frozen=True)
class RadialGrid:
    dim: int
    M: int = 4096
    r_max: float = 40.0

    def __post_init__(self):
        if self.dim < 3 or self.M < 8 or not self.r_max > 0:
            raise ValueError("need dim >= 3, M >= 8, r_max > 0")

    @cached_property
    def h(self) -> float:
        return self.r_max / self.M

    @cached_property
    def r(self) -> np.ndarray:
        r = (np.arange(1, self.M + 1) - 0.5) * self.h
        r.setflags(write=False)
        return r

    @cached_property
    def omega(self) -> float:
        return sphere_area(self.dim)

    @cached_property
    def weights(self) -> np.ndarray:
        w = self.omega * self.r ** (self.dim - 1) * self.h
        w.setflags(write=False)
        return w

    def integrate(self, f) -> float:
        """Midpoint quadrature of a radial integrand over R^N."""
        return float(np.sum(self.weights * f))

    def volume_within(self, R: float) -> float:
        """Measure of {|x| <= R} counted cell by cell.

        Cells [(j-1)h, jh] inside the ball contribute their exact shell
        volume and the cut cell contributes the part below R; the indicator
        quadrature with midpoint weights would only be first order.
        """
        N, h = self.dim, self.h
        cells = self.omega / N * ((self.r + h / 2) ** N - (self.r - h / 2) ** N)
        return float(np.sum(cells * self.cell_fraction_within(R)))

    def cell_fraction_within(self, R: float) -> np.ndarray:
        """Fraction of each cell's volume lying inside {r <= R}."""
        N, h = self.dim, self.h
        lo = self.r - h / 2
        hi = self.r + h / 2
        top = np.clip(R, lo, hi)
        return (top ** N - lo ** N) / (hi ** N - lo ** N)


@dataclass
class RadialField:
    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.grid.M,):
            raise ValueError("field length does not match the grid")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field has non-finite entries")

    @classmethod
    def gaussian(cls, grid: RadialGrid, amplitude=1.0, width=1.0, rho=0.0, chirp=0.0):
        """A r^{-rho} exp(-r^2/(2 width^2)) exp(i chirp r^2).

        rho = 0 gives a plain Gaussian; the rho of the model gives the
        profile with the regular behaviour of L_a at the origin.
        """
        r = grid.r
        u = amplitude * r ** (-rho) * np.exp(-r ** 2 / (2 * width ** 2) + 1j * chirp * r ** 2)
        return cls(grid, u)

    @classmethod
    def from_function(cls, grid: RadialGrid, f):
        return cls(grid, f(grid.r))

    def copy(self) -> "RadialField":
        return RadialField(self.grid, self.values.copy())

    def scaled(self, c) -> "RadialField":
        return RadialField(self.grid, c * self.values)

    def save(self, path, **meta) -> None:
        g = self.grid
        head = [f"inls_lab radial field dim={g.dim} M={g.M} r_max={g.r_max!r}"]
        head += [f"{k}={v!r}" for k, v in meta.items()]
        head.append("r re_u im_u")
        data = np.column_stack([g.r, self.values.real, self.values.imag])
        np.savetxt(path, data, fmt="%.17g", header="\n".join(head))

    @classmethod
    def load(cls, path) -> "RadialField":
        with open(path) as fh:
            first = fh.readline()
        kv = dict(tok.split("=") for tok in first.lstrip("# ").split() if "=" in tok)
        grid = RadialGrid(int(kv["dim"]), int(kv["M"]), float(kv["r_max"]))
        data = np.loadtxt(path)
        if not np.allclose(data[:, 0], grid.r, rtol=1e-14, atol=0):
            raise ValueError("stored abscissae do not match the declared grid")
        return cls(grid, data[:, 1] + 1j * data[:, 2])


# ------------------------------------------------------------ operator

def _stencil_apply(diag, o1, o2, w):
    y = diag * w
    y[:-1] += o1 * w[1:]
    y[1:] += o1 * w[:-1]
    if o2 is not None:
        y[:-2] += o2 * w[2:]
        y[2:] += o2 * w[:-2]
    return y


class SymmetrizedOperator:
    """Banded symmetric matrix A with w^T A w h ~ int |w'|^2 + c_eff/r^2 |w|^2 dr.

    Fourth-order five-point stencil for -d^2/dr^2 with a diagonal
    correction V = d - (S phi)/phi, phi = r^{1/2+nu}, so that A phi = 0 in
    the interior and the regular behaviour is built in.  Beyond r_max the
    ghost values are zero (Dirichlet) for w but the correction uses the
    continuation of phi.  If the five-point matrix is not positive
    definite near the origin (large nu) the second-order three-point
    version of the same construction is used instead.
    """

    def __init__(self, grid: RadialGrid, a: float, order: int = 4):
        N = grid.dim
        self.grid = grid
        self.a = float(a)
        self.c_eff = self.a + (N - 1) * (N - 3) / 4
        nu2 = (N - 2) ** 2 / 4 + self.a
        if nu2 <= 0:
            raise ValueError("a must exceed the Hardy floor")
        self.nu = math.sqrt(nu2)
        self.order = order
        if order == 4:
            self._build4()
            if not self._leading_block_pd():
                self.order = 2
                self._build2()
        elif order == 2:
            self._build2()
        else:
            raise ValueError("order must be 2 or 4")
        for arr in (self.diag, self.o1, self.o2):
            if arr is not None:
                arr.setflags(write=False)

    def _phi(self, x):
        return x ** (0.5 + self.nu)

    def _build4(self):
        g = self.grid
        M, h = g.M, g.h
        r = g.r
        d = np.full(M, 30 / (12 * h * h))
        o1 = np.full(M - 1, -16 / (12 * h * h))
        o2 = np.full(M - 2, 1 / (12 * h * h))
        phi = self._phi(r)
        S = _stencil_apply(d, o1, o2, phi)
        ext = lambda j: self._phi((j - 0.5) * h)
        S[-1] += (-16 * ext(M + 1) + ext(M + 2)) / (12 * h * h)
        S[-2] += ext(M + 1) / (12 * h * h)
        self.diag = d - S / phi
        self.o1, self.o2 = o1, o2

    def _build2(self):
        g = self.grid
        M, h = g.M, g.h
        r = g.r
        phi = self._phi(r)
        up = self._phi(r + h)
        dn = np.r_[0.0, phi[:-1]]
        self.diag = (up + dn) / (phi * h * h)
        self.o1 = np.full(M - 1, -1 / (h * h))
        self.o2 = None

    def _leading_block_pd(self, n: int = 200) -> bool:
        n = min(n, self.grid.M)
        ab = np.zeros((3, n))
        ab[0] = self.diag[:n]
        ab[1, :-1] = self.o1[: n - 1]
        ab[2, :-2] = self.o2[: n - 2]
        try:
            cholesky_banded(ab, lower=True)
            return True
        except LinAlgError:
            return False

    @property
    def bandwidth(self) -> int:
        return 2 if self.o2 is not None else 1

    def apply(self, w: np.ndarray) -> np.ndarray:
        return _stencil_apply(self.diag, self.o1, self.o2, w)

    def form(self, w: np.ndarray) -> float:
        """h * Re(w^* A w)."""
        return float(self.grid.h * np.real(np.vdot(w, self.apply(w))))

    def banded(self, alpha, beta) -> np.ndarray:
        """alpha I + beta A in the (l, u) = (k, k) storage of solve_banded."""
        k, M = self.bandwidth, self.grid.M
        dt = np.result_type(alpha, beta, float)
        ab = np.zeros((2 * k + 1, M), dtype=dt)
        ab[k] = alpha + beta * self.diag
        ab[k - 1, 1:] = beta * self.o1
        ab[k + 1, :-1] = beta * self.o1
        if k == 2:
            ab[0, 2:] = beta * self.o2
            ab[4, :-2] = beta * self.o2
        return ab

    def lowest_eigenvalue(self, n: int = 400) -> float:
        """Smallest eigenvalue of the leading n x n block (diagnostic)."""
        n = min(n, self.grid.M)
        if self.o2 is None:
            return float(eigvalsh_tridiagonal(self.diag[:n], self.o1[: n - 1],
                                              select="i", select_range=(0, 0))[0])
        A = (np.diag(self.diag[:n]) + np.diag(self.o1[: n - 1], 1) + np.diag(self.o1[: n - 1], -1)
             + np.diag(self.o2[: n - 2], 2) + np.diag(self.o2[: n - 2], -2))
        return float(np.linalg.eigvalsh(A)[0])


@lru_cache(maxsize=32)
def operator_for(grid: RadialGrid, a: float) -> SymmetrizedOperator:
    return SymmetrizedOperator(grid, a)


def to_w(u: RadialField) -> np.ndarray:
    return u.grid.r ** ((u.grid.dim - 1) / 2) * u.values


def from_w(grid: RadialGrid, w: np.ndarray) -> RadialField:
    return RadialField(grid, w / grid.r ** ((grid.dim - 1) / 2))


# ---------------------------------------------------------- derivatives

def even_derivative(v: np.ndarray, h: float) -> np.ndarray:
    """Sixth-order centered first derivative on the staggered grid.

    v is continued evenly across r = 0 (v(-r) = v(r)) and by zero past
    r_max, which is exact for smooth even profiles that have decayed.
    """
    e = np.concatenate([v[2::-1], v, np.zeros(3, dtype=v.dtype)])
    return (-e[:-6] + 9 * e[1:-5] - 45 * e[2:-4] + 45 * e[4:-2] - 9 * e[5:-1] + e[6:]) / (60 * h)


@lru_cache(maxsize=None)
def _fd_weights(offsets: tuple) -> np.ndarray:
    """First-derivative weights on integer offsets (unit spacing)."""
    x = np.asarray(offsets, dtype=float)
    V = np.vander(x, increasing=True).T
    rhs = np.zeros(len(x))
    rhs[1] = 1.0
    return np.linalg.solve(V, rhs)


def one_sided_derivative(v: np.ndarray, h: float) -> np.ndarray:
    """Sixth-order first derivative that makes no parity assumption.

    Centered seven-point differences in the interior and one-sided
    seven-point stencils on the first and last three nodes.  Used for
    profiles with non-even terms r^beta at the origin.
    """
    M = len(v)
    d = np.empty_like(v)
    c = _fd_weights((-3, -2, -1, 0, 1, 2, 3))
    d[3:-3] = sum(c[k] * v[k:M - 6 + k] for k in range(7))
    for i in range(3):
        cl = _fd_weights(tuple(range(-i, 7 - i)))
        d[i] = cl @ v[:7]
        d[M - 1 - i] = -(cl @ v[M - 1:M - 8:-1])
    return d / h


def _lagrange(x, n):
    """Values of the n Lagrange basis polynomials on nodes 0..n-1 at x."""
    out = []
    for i in range(n):
        li = np.ones_like(x)
        for k in range(n):
            if k != i:
                li = li * (x - k) / (i - k)
        out.append(li)
    return out


@lru_cache(maxsize=64)
def _product_weights(dim: int, M: int, r_max: float, gam: float, n: int = 8) -> np.ndarray:
    """Weights W with sum W_j g(r_j) ~ omega int_0^{r_max} r^gam g(r) dr.

    g is replaced by its degree n-1 Lagrange interpolant through n nearby
    nodes on each piece [0, r_1], [r_j, r_{j+1}], [r_M, r_max], and r^gam
    times each basis polynomial is integrated exactly (Gauss-Jacobi on the
    first piece, where r^gam is singular; Gauss-Legendre elsewhere).  The
    rule is of order n for smooth g whatever gam > -1 is, whereas the
    plain midpoint rule degrades to O(h^{gam+1}) for non-even integrands.
    """
    h = r_max / M
    r = (np.arange(1, M + 1) - 0.5) * h
    W = np.zeros(M)
    half = n // 2 - 1
    j = np.arange(M - 1)
    first = np.clip(j - half, 0, M - n)
    xg, wg = np.polynomial.legendre.leggauss(12)
    t = (xg + 1) / 2
    rr = r[j, None] + h * t
    wr = rr ** gam * (h * wg / 2)
    loc = (rr - r[first][:, None]) / h
    for i, li in enumerate(_lagrange(loc, n)):
        np.add.at(W, first + i, np.sum(wr * li, axis=1))
    xj, wj = roots_jacobi(12, 0.0, gam)
    rr = r[0] * (1 + xj) / 2
    wr = wj * (r[0] / 2) ** (gam + 1)
    for i, li in enumerate(_lagrange(rr / h - 0.5, n)):
        W[i] += np.sum(wr * li)
    rr = r[-1] + h / 2 * t
    wr = rr ** gam * (h / 2 * wg / 2)
    for i, li in enumerate(_lagrange((rr - r[M - n]) / h, n)):
        W[M - n + i] += np.sum(wr * li)
    W *= sphere_area(dim)
    W.setflags(write=False)
    return W


def product_weights(grid: RadialGrid, gam: float) -> np.ndarray:
    return _product_weights(grid.dim, grid.M, grid.r_max, float(gam))


def _rho(grid_a_dim):
    N, a = grid_a_dim
    return (N - 2) / 2 - math.sqrt((N - 2) ** 2 / 4 + a)


def radial_derivative(u: RadialField, a: float) -> np.ndarray:
    """u_r computed through v = r^rho u, u_r = r^{-rho} (v' - rho v / r)."""
    g = u.grid
    rho = _rho((g.dim, a))
    v = g.r ** rho * u.values
    dv = even_derivative(v, g.h)
    return g.r ** (-rho) * (dv - rho * v / g.r)


# ---------------------------------------------------------- functionals

def mass(u: RadialField, rho: float | None = None) -> float:
    """int |u|^2.  With rho given, u is treated as r^{-rho} times a regular
    profile v and the integral is done as int |v|^2 r^{N-1-2 rho} with
    product weights; otherwise the midpoint rule is used."""
    g = u.grid
    if rho is None:
        return g.integrate(np.abs(u.values) ** 2)
    v = g.r ** rho * u.values
    return float(product_weights(g, g.dim - 1 - 2 * rho) @ np.abs(v) ** 2)


def kinetic_norm_sq(u: RadialField, a: float, method: str = "operator") -> float:
    """||sqrt(L_a) u||^2 = int |grad u|^2 + a |u|^2 / r^2.

    method="operator": quadratic form of the symmetrized stencil (the
    quantity conserved by the time stepper).  method="centered": the
    equivalent form int |v'|^2 r^{2 nu + 1} dr (omega factor included),
    v = r^rho u, with sixth-order centered differences and the midpoint
    rule.  method="adapted": the same form with one-sided differences
    near the origin and product weights, for profiles whose regular part
    v is not even in r (ground states with b > 0 or a != 0).
    """
    g = u.grid
    if method == "operator":
        op = operator_for(g, float(a))
        val = g.omega * op.form(to_w(u))
    elif method == "centered":
        rho = _rho((g.dim, a))
        v = g.r ** rho * u.values
        dv = even_derivative(v, g.h)
        val = g.omega * g.h * float(np.sum(np.abs(dv) ** 2 * g.r ** (g.dim - 1 - 2 * rho)))
    elif method == "adapted":
        rho = _rho((g.dim, a))
        v = g.r ** rho * u.values
        dv = one_sided_derivative(v, g.h)
        val = float(product_weights(g, g.dim - 1 - 2 * rho) @ np.abs(dv) ** 2)
    else:
        raise ValueError(f"unknown method {method!r}")
    scale = mass(u) / g.h ** 2
    if val < -1e-12 * max(scale, 1.0):
        raise NegativeForm(f"kinetic form is negative ({val}); grid under-resolved near r=0")
    return max(val, 0.0)


def potential_integral(u: RadialField, b: float, alpha: float, rho: float | None = None) -> float:
    """int r^{-b} |u|^{alpha+2}; rho selects the product rule as in mass()."""
    g = u.grid
    if rho is None:
        return g.integrate(g.r ** (-b) * np.abs(u.values) ** (alpha + 2))
    v = g.r ** rho * u.values
    gam = g.dim - 1 - b - (alpha + 2) * rho
    return float(product_weights(g, gam) @ np.abs(v) ** (alpha + 2))


def weighted_lp(u: RadialField, p: float, b: float) -> float:
    if p < 1:
        raise ValueError("p must be >= 1")
    if b >= u.grid.dim:
        raise ValueError("b must be < N for the weight to be locally integrable")
    g = u.grid
    return g.integrate(g.r ** (-b) * np.abs(u.values) ** p) ** (1 / p)


def check_decay(u: RadialField, tol: float = 1e-8) -> bool:
    v = np.abs(u.values)
    peak = v.max()
    ok = peak == 0 or v[-1] < tol * peak
    if not ok:
        warnings.warn(f"|u(r_max)| = {v[-1]:.3e} exceeds {tol:g} * max|u|", TruncationWarning,
                      stacklevel=3)
    return ok


def energy(u: RadialField, params: ModelParams, method: str = "operator") -> float:
    """E = 1/2 ||sqrt(L_a) u||^2 - lam/(alpha+2) int r^{-b} |u|^{alpha+2}."""
    check_decay(u)
    p = params.as_floats()
    K = kinetic_norm_sq(u, p.a, method)
    rho = _rho((p.dim, p.a)) if method == "adapted" else None
    P = potential_integral(u, p.b, p.alpha, rho)
    return 0.5 * K - p.lam / (p.alpha + 2) * P


def weinstein_quotient(u: RadialField, params: ModelParams, method: str = "operator") -> float:
    """J_a(u) = K^{(N alpha + 2b)/4} M^{(4 - 2b - alpha(N-2))/4} / P."""
    p = params.as_floats()
    N = p.dim
    rho = _rho((p.dim, p.a)) if method == "adapted" else None
    P = potential_integral(u, p.b, p.alpha, rho)
    if P == 0:
        raise ZeroDivisionError("potential integral vanishes")
    K = kinetic_norm_sq(u, p.a, method)
    M = mass(u, rho)
    e = N * p.alpha + 2 * p.b
    d = 4 - 2 * p.b - p.alpha * (N - 2)
    return K ** (e / 4) * M ** (d / 4) / P


# ---------------------------------------------------------------- virial

def _smoothstep(x):
    """C^4 step: 0 for x <= 0, 1 for x >= 1."""
    x = np.clip(x, 0.0, 1.0)
    return x ** 5 * (126 - 420 * x + 540 * x ** 2 - 315 * x ** 3 + 70 * x ** 4)


def _smoothstep_d(x, k):
    """k-th derivative of the smoothstep, k = 1, 2."""
    inside = (x > 0) & (x < 1)
    x = np.clip(x, 0.0, 1.0)
    if k == 1:
        d = 630 * x ** 4 * (1 - x) ** 4
    else:
        d = 2520 * x ** 3 * (1 - x) ** 3 * (1 - 2 * x)
    return np.where(inside, d, 0.0)


@dataclass(frozen=True)
class Quadratic:
    """phi = r^2."""

    def derivs(self, r):
        z = np.zeros_like(r)
        return r ** 2, 2 * r, 2 + z, z

    kinks = ()
    R = math.inf


@dataclass(frozen=True)
class TruncatedCritical:
    """phi_R = R^2 psi(r/R), psi = r^2 (r<=1), r^2 - (r-1)^4/2 (1<r<=2), 7/2 (r>2).

    psi' jumps from 2 to 0 at r = 2, so phi_R' jumps by -2R at r = 2R.
    """
    R: float

    def derivs(self, r):
        """(phi, phi', phi'', phi''') on the regular pieces."""
        R = self.R
        s = r / R
        t = s - 1
        in1, in2 = s <= 1, (s > 1) & (s <= 2)
        psi = np.where(in1, s ** 2, np.where(in2, s ** 2 - t ** 4 / 2, 3.5))
        d1 = np.where(in1, 2 * s, np.where(in2, 2 * s - 2 * t ** 3, 0.0))
        d2 = np.where(in1, 2.0, np.where(in2, 2 - 6 * t ** 2, 0.0))
        d3 = np.where(in1, 0.0, np.where(in2, -12 * t, 0.0))
        return R * R * psi, R * d1, d2, d3 / R

    @property
    def kinks(self):
        return ((2 * self.R, -2 * self.R),)


@dataclass(frozen=True)
class TruncatedIntercritical:
    """phi_R = R^2 psi(r/R) with psi' = 2 s (1 - S((s-1)/(L-1))), S a C^4 step.

    psi = s^2 for s <= 1, constant for s >= L, psi'' <= 2 everywhere.  The
    plateau value is psi(L) (25/11 for L = 2); see plateau().
    """
    R: float
    L: float = 2.0

    def _psi_parts(self, s):
        L = self.L
        x = (s - 1) / (L - 1)
        S = _smoothstep(x)
        S1 = _smoothstep_d(x, 1) / (L - 1)
        S2 = _smoothstep_d(x, 2) / (L - 1) ** 2
        d1 = 2 * s * (1 - S)
        d2 = 2 * (1 - S) - 2 * s * S1
        d3 = -4 * S1 - 2 * s * S2
        return d1, d2, d3

    def _psi(self, s):
        # psi(s) = s^2 - int_1^s 2t S((t-1)/(L-1)) dt, Gauss-Legendre per point
        s = np.asarray(s, dtype=float)
        out = s ** 2
        m = s > 1
        if np.any(m):
            xg, wg = np.polynomial.legendre.leggauss(24)
            top = np.minimum(s[m], self.L)
            half = (top - 1) / 2
            t = 1 + half[:, None] * (xg[None, :] + 1)
            corr = np.sum(wg[None, :] * 2 * t * _smoothstep((t - 1) / (self.L - 1)), axis=1) * half
            corr += np.where(s[m] > self.L, s[m] ** 2 - top ** 2, 0.0)
            out = out.copy()
            out[m] = s[m] ** 2 - corr
        return out

    def plateau(self) -> float:
        return float(self._psi(np.array([self.L + 1.0]))[0])

    def derivs(self, r):
        R = self.R
        s = r / R
        d1, d2, d3 = self._psi_parts(s)
        return R * R * self._psi(s), R * d1, d2, d3 / R

    kinks = ()


def _derivs_at(f, g, x):
    """Value and first two derivatives of samples f at points x (cubic fit)."""
    r, h = g.r, g.h
    j = int(np.clip(np.searchsorted(r, x) - 2, 0, len(r) - 4))
    xs, ys = r[j:j + 4], f[j:j + 4]
    c = np.polynomial.polynomial.polyfit(xs - x, ys, 3)
    return c[0], c[1], 2 * c[2]


def virial_quantities(u: RadialField, params: ModelParams, weight=Quadratic()):
    """(V, V', V'') for the weight phi.

    V = int phi |u|^2, V' = 2 Im int conj(u) u_r phi', and V'' from the
    localized virial identity written for radial phi:

        V'' = 4 int phi'' |u_r|^2 + 4a int phi'/r^3 |u|^2 - int Delta^2 phi |u|^2
              - lam 2 alpha/(alpha+2) int r^{-b} |u|^{alpha+2} Delta phi
              - lam 4b/(alpha+2) int r^{-b-1} phi' |u|^{alpha+2}.

    The phi = r^2 part is assembled from the operator kinetic form, which
    makes it the exact discrete counterpart of
    8 K - lam (4 N alpha + 8 b)/(alpha+2) P.  The remainder chi = phi - r^2
    vanishes for r < R and is integrated directly, including the
    distributional terms from a jump of phi'.
    """
    g = u.grid
    p = params.as_floats()
    N, a, b, al, lam = p.dim, p.a, p.b, p.alpha, p.lam
    r = g.r
    dens = np.abs(u.values) ** 2
    if isinstance(weight, Quadratic):
        tail = r > 0.9 * g.r_max
        tot = g.integrate(r ** 2 * dens)
        if tot > 0 and g.integrate(np.where(tail, r ** 2 * dens, 0.0)) > 1e-8 * tot:
            raise FiniteVarianceViolation("variance integrand does not decay before r_max")

    phi, d1, d2, d3 = weight.derivs(r)
    rho = _rho((N, a))
    v = r ** rho * u.values
    dv = even_derivative(v, g.h)
    im = r ** (-2 * rho) * np.imag(np.conj(v) * dv)      # Im(conj(u) u_r)
    V = g.integrate(phi * dens)
    V1 = 2 * g.integrate(im * d1)

    K = kinetic_norm_sq(u, a)
    nl = r ** (-b) * np.abs(u.values) ** (al + 2)
    P = g.integrate(nl)
    c1 = -2 * al / (al + 2)
    c2 = -4 * b / (al + 2)
    V2 = 8 * K + lam * (2 * N * c1 + 2 * c2) * P

    if not isinstance(weight, Quadratic):
        ur = radial_derivative(u, a)
        x1, x2 = d1 - 2 * r, d2 - 2                       # chi', chi''
        lap = x2 + (N - 1) * x1 / r                       # Delta chi
        lap_d = d3 + (N - 1) * (d2 / r - d1 / r ** 2)     # (Delta chi)', regular part
        # -int Delta^2 chi f = int (Delta chi)' f' dV + jump terms; f = |u|^2
        fprime = 2 * np.real(np.conj(u.values) * ur)
        corr = 4 * g.integrate(x2 * np.abs(ur) ** 2)
        corr += 4 * a * g.integrate(x1 / r ** 3 * dens)
        corr += g.integrate(lap_d * fprime)
        corr += lam * c1 * g.integrate(nl * lap)
        corr += lam * c2 * g.integrate(nl * x1 / r)
        for rk, J in weight.kinks:
            if rk >= g.r_max:
                continue
            f0, f1, f2 = _derivs_at(dens, g, rk)
            ur0 = _derivs_at(ur, g, rk)[0]
            nl0 = _derivs_at(nl, g, rk)[0]
            wk = g.omega * rk ** (N - 1)
            # Delta chi carries J delta(r - rk); its regular part jumps by [g]
            eps = 1e-9 * rk
            before = weight.derivs(np.array([rk - eps]))
            after = weight.derivs(np.array([rk + eps]))
            lap_of = lambda dd, x: dd[2][0] + (N - 1) * dd[1][0] / x
            jump = lap_of(after, rk + eps) - lap_of(before, rk - eps)
            corr += 4 * J * wk * abs(ur0) ** 2
            corr += lam * c1 * J * wk * nl0
            corr += wk * jump * f1
            corr -= J * wk * (f2 + (N - 1) * f1 / rk)
        V2 += corr
    return V, V1, V2


def strauss_bound_check(u: RadialField, R: float, C: float | None = None):
    """(sup_{r>=R} |u|, C R^{-(N-1)/2} ||u||^{1/2} ||grad u||^{1/2}).

    Default C = sqrt(2/omega_{N-1}), the constant obtained by integrating
    d/dr (r^{N-1}|u|^2) from r to infinity.
    """
    g = u.grid
    N = g.dim
    if C is None:
        C = math.sqrt(2 / g.omega)
    m = g.r >= R
    lhs = float(np.abs(u.values[m]).max()) if np.any(m) else 0.0
    grad = kinetic_norm_sq(u, 0.0, method="centered")
    rhs = C * R ** (-(N - 1) / 2) * mass(u) ** 0.25 * grad ** 0.25
    return lhs, rhs
