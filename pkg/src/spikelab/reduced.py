"""Model parameters, the reduced interaction potential and the polygon-radius equations."""
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from . import kernels
from .errors import CoincidentSpikes, DomainError, NoRoot, RegimeError
from .geometry import PolygonCluster, build_cluster
from .ground_state import integrals, solve_ground_state


class RegimeWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ModelParams:
    epsilon: float
    D: float
    tau: float = 0.0
    domain_radius: float = 1.0
    mu_second: float = 1.0
    # precursor mu(r) and its derivative; None means 1 + mu''(0) r^2 / 2
    mu: Optional[Callable] = field(default=None, compare=False)
    mu_prime: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        if not (self.epsilon > 0 and self.D > 0 and self.tau >= 0 and self.mu_second > 0):
            raise DomainError("need epsilon > 0, D > 0, tau >= 0, mu'' > 0")
        if self.epsilon ** 2 / self.D > 0.1:
            warnings.warn("epsilon^2/D > 0.1: outside the small-ratio regime", RegimeWarning)
        elif self.D * math.log(1 / self.sigma) > 0.1:
            warnings.warn("D log(sqrt(D)/epsilon) > 0.1: outside the small-D regime", RegimeWarning)

    @property
    def sigma(self):
        return self.epsilon / math.sqrt(self.D)

    @property
    def quadratic_mu(self):
        return self.mu is None

    def mu_at(self, r):
        if self.mu is None:
            return 1.0 + 0.5 * self.mu_second * np.asarray(r) ** 2
        return self.mu(r)

    def mu_prime_at(self, r):
        if self.mu is None:
            return self.mu_second * np.asarray(r)
        if self.mu_prime is not None:
            return self.mu_prime(r)
        h = 1e-6
        return (self.mu(np.asarray(r) + h) - self.mu(np.asarray(r) - h)) / (2 * h)


@lru_cache(maxsize=4)
def ground_constants(r_max=20.0, n=4000):
    """Ground-state constants at the default resolution, computed once."""
    return integrals(solve_ground_state(r_max, n))


def compute_xi(params: ModelParams, int_w2):
    s = params.sigma
    if s >= 1:
        raise RegimeError(f"sigma = {s:.4g} must be below 1")
    return 2 * math.pi / (math.log(1 / s) * int_w2)


@dataclass(frozen=True)
class ReducedConstants:
    xi: float
    c1: float
    c2: float
    c3_potential: float
    c3_balance: float
    k: int

    @property
    def c3_centre(self):
        # balance constant of the centre equation once everything is moved to one side
        return self.c3_balance * 4 * math.sin(math.pi / self.k) ** 2 * -1


def make_constants(params: ModelParams, k, gs=None) -> ReducedConstants:
    gs = gs or ground_constants()
    xi = compute_xi(params, gs.int_w2)
    s2 = math.sin(math.pi / k) ** 2
    return ReducedConstants(
        xi=xi,
        c1=gs.c1,
        c2=gs.c2,
        c3_potential=-gs.c2 / gs.c1,
        c3_balance=gs.c2 * params.mu_second / (4 * gs.c1 * s2),
        k=int(k),
    )


# ------------------------------------------------------------------ potential
def _positions(q):
    if isinstance(q, PolygonCluster):
        return q.positions
    return np.asarray(q, dtype=float).reshape(-1, 2)


def _check_distinct(X):
    d = X[:, None, :] - X[None, :, :]
    dist = np.sqrt((d ** 2).sum(-1)) + np.eye(len(X))
    if np.any(dist == 0):
        raise CoincidentSpikes("two spikes share a position")


def _pair_terms(X, sigma):
    iu = np.triu_indices(len(X), 1)
    d = np.sqrt(((X[iu[0]] - X[iu[1]]) ** 2).sum(-1))
    s = sigma * d
    return s ** -0.5 * np.exp(-s)


def potential(q, rc: ReducedConstants, params: ModelParams):
    """Pi(q): unordered-pair Green interaction plus the precursor term."""
    X = _positions(q)
    _check_distinct(X)
    pairs = kernels.pair_energy(np.ascontiguousarray(X), params.sigma)
    r = params.epsilon * np.hypot(X[:, 0], X[:, 1])
    return rc.xi * pairs + rc.c3_potential * float(np.sum(params.mu_at(r)))


def potential_delta(q, dq, rc: ReducedConstants, params: ModelParams):
    """Pi(q + dq) - Pi(q) without forming either value, to keep small differences accurate."""
    X = _positions(q)
    Y = X + np.asarray(dq, dtype=float).reshape(X.shape)
    _check_distinct(Y)
    dpair = np.sum(_pair_terms(Y, params.sigma) - _pair_terms(X, params.sigma))
    if params.quadratic_mu:
        dr2 = np.sum(Y ** 2 - X ** 2)
        dmu = 0.5 * params.mu_second * params.epsilon ** 2 * dr2
    else:
        eps = params.epsilon
        dmu = float(np.sum(params.mu_at(eps * np.hypot(*Y.T)) - params.mu_at(eps * np.hypot(*X.T))))
    return rc.xi * dpair + rc.c3_potential * dmu


def potential_gradient(q, rc: ReducedConstants, params: ModelParams):
    """Analytic gradient of Pi, one row per spike."""
    X = np.ascontiguousarray(_positions(q))
    _check_distinct(X)
    g = rc.xi * kernels.pair_gradient(X, params.sigma)
    rad = np.hypot(X[:, 0], X[:, 1])
    eps = params.epsilon
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = np.where(rad[:, None] > 0, X / rad[:, None], 0.0)
    g += rc.c3_potential * eps * np.asarray(params.mu_prime_at(eps * rad))[:, None] * unit
    return g


def force_scale(cluster: PolygonCluster, rc: ReducedConstants, params: ModelParams):
    """Size of one nearest-neighbour repulsion; gradients are reported relative to it."""
    s = params.sigma * cluster.nearest_distance()
    if cluster.with_centre:
        s = min(s, params.sigma * cluster.radius)
    return rc.xi * params.sigma * math.exp(-s) * (s ** -0.5 + 0.5 * s ** -1.5)


def vertex_gradient_local(cluster: PolygonCluster, rc, params, j=0):
    """(radial, tangential) gradient components at vertex j."""
    g = potential_gradient(cluster, rc, params)[j]
    fr = cluster.frames()[j]
    return float(g @ fr.radial), float(g @ fr.tangential)


# ------------------------------------------------------------ radius equations
@dataclass(frozen=True)
class EquilibriumResult:
    radius: float
    residual: float  # relative to the size of the balancing term
    nondegeneracy: float  # derivative of the left side in R at the root
    scaled_root: float  # x = 2 sigma R sin(pi/k), or sigma R with a centre
    with_centre: bool


def _solve_decreasing(f, df, lo, cap):
    """Root of a strictly decreasing f with f(lo) > 0; bracket grown geometrically."""
    if not f(lo) > 0:
        raise NoRoot("left side is not positive at the start of the monotone branch")
    hi = 2 * lo
    while f(hi) > 0:
        lo, hi = hi, 2 * hi
        if hi > cap:
            raise NoRoot("no sign change below the radius cap")
    x = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    for _ in range(3):
        step = f(x) / df(x)
        if not np.isfinite(step) or abs(step) > 1e-6 * x:
            break
        x -= step
    return x


def equilibrium_radius(k, params: ModelParams, rc: ReducedConstants) -> EquilibriumResult:
    """Root of xi x^-3/2 e^-x + c3_balance D = 0 with x = 2 sigma R sin(pi/k)."""
    sigma = params.sigma
    s = math.sin(math.pi / k)
    target = -rc.c3_balance * params.D
    f = lambda x: rc.xi * x ** -1.5 * math.exp(-x) - target
    df = lambda x: -rc.xi * math.exp(-x) * (x ** -1.5 + 1.5 * x ** -2.5)
    cap = 1e6 / sigma * 2 * sigma * s
    x = _solve_decreasing(f, df, 1.5, cap)
    return EquilibriumResult(
        radius=x / (2 * sigma * s),
        residual=abs(f(x)) / target,
        nondegeneracy=df(x) * 2 * sigma * s,
        scaled_root=x,
        with_centre=False,
    )


def equilibrium_radius_centre(k, params: ModelParams, rc: ReducedConstants) -> EquilibriumResult:
    """Root of c1 xi sigma y^-1/2 e^-y + c2 eps^2 R mu''(0) = 0 with y = sigma R."""
    sigma = params.sigma
    eps2 = params.epsilon ** 2
    m2 = params.mu_second

    def f(y):
        return rc.c1 * rc.xi * sigma * y ** -0.5 * math.exp(-y) + rc.c2 * eps2 * (y / sigma) * m2

    def df(y):
        return -rc.c1 * rc.xi * sigma * math.exp(-y) * (y ** -0.5 + 0.5 * y ** -1.5) + rc.c2 * eps2 * m2 / sigma

    y = _solve_decreasing(f, df, 1.5, 1e6)
    scale = abs(rc.c2 * eps2 * (y / sigma) * m2)
    return EquilibriumResult(
        radius=y / sigma,
        residual=abs(f(y)) / scale,
        nondegeneracy=df(y) * sigma,
        scaled_root=y,
        with_centre=True,
    )


def _log_terms(params: ModelParams):
    if params.D >= 1 / math.e:
        raise DomainError("asymptotic radius needs D < 1/e")
    L = math.log(1 / params.D)
    return L, L - 1.5 * math.log(L)


def asymptotic_radius(k, params: ModelParams, rc: ReducedConstants):
    _, core = _log_terms(params)
    s = math.sin(math.pi / k)
    return (core - math.log(rc.xi / abs(rc.c3_balance))) / (2 * params.sigma * s)


def asymptotic_radius_centre(k, params: ModelParams, rc: ReducedConstants):
    _, core = _log_terms(params)
    return (core - math.log(rc.xi / rc.c3_centre)) / params.sigma


def radius_window(params: ModelParams, C=10.0):
    """Admissible band (base/C, C*base) for the polygon radius, or None when undefined."""
    inner = params.D * math.log(1 / params.sigma)
    if inner >= 1:
        return None
    base = math.log(1 / inner) / params.sigma
    return base / C, base * C


def critical_radius(k, params: ModelParams, rc: ReducedConstants, with_centre=False, seed=None):
    """Radius where Pi restricted to uniform breathing of the polygon is stationary.

    The scalar radius equations keep only nearest neighbours at leading order,
    so this exact critical point sits slightly off their root.
    """
    if seed is None:
        solver = equilibrium_radius_centre if with_centre else equilibrium_radius
        seed = solver(k, params, rc).radius

    def breathing(R):
        cl = build_cluster(k, R, 0.0, with_centre)
        g = potential_gradient(cl, rc, params)[:k]
        return float(np.sum(g * cl.vertices) / R)

    lo, hi = 0.8 * seed, 1.25 * seed
    while breathing(lo) > 0:
        lo *= 0.8
    while breathing(hi) < 0:
        hi *= 1.25
        if hi > 1e3 * seed:
            raise NoRoot("breathing gradient has no sign change")
    return brentq(breathing, lo, hi, xtol=1e-13 * seed, rtol=4 * np.finfo(float).eps)
