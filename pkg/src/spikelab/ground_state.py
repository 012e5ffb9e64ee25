"""Radial ground state of Delta w - w + w^2 = 0 in the plane, by shooting on w(0)."""
import csv
import json
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.integrate import simpson

from . import __version__, kernels
from .errors import DomainError, NonConvergence
from .greens import bessel_k0k1

BRACKET = (1.0, 4.0)
TAIL_SWITCH = 1e-6  # hand over to the K0 tail once w drops below this
DECAY_RATIO = 1e-8
BLEND = 1.0  # width of the trajectory-to-tail blend
SHOOT_HORIZON = 25.0  # integrate this far so every trial height declares itself
GAP_TOL = 1e-6  # relative spread allowed between the two bracketing trajectories


@dataclass(frozen=True)
class RadialProfile:
    r_grid: np.ndarray
    w_values: np.ndarray
    w_derivs: np.ndarray
    w0: float
    residual_sup: float
    tail_start: float  # radius where the K0 tail replaces the integrated trajectory
    tail_coeff: float  # C in w ~ C r^-1/2 e^-r beyond r_max

    @property
    def r_max(self):
        return float(self.r_grid[-1])

    @property
    def h(self):
        return float(self.r_grid[1] - self.r_grid[0])


@dataclass(frozen=True)
class GroundStateConstants:
    int_w2: float
    int_w3: float
    c1: float
    c2: float

    def as_dict(self, w0=None):
        out = {} if w0 is None else {"w0": w0}
        out.update(int_w2=self.int_w2, int_w3=self.int_w3, c1=self.c1, c2=self.c2)
        return out


def _bisect_height(h, n, iters=200):
    lo, hi = BRACKET
    _, _, _, s_lo = kernels.rk4_radial(lo, h, n)
    _, _, _, s_hi = kernels.rk4_radial(hi, h, n)
    # w0 = 1 is the constant solution; nudge it so the trajectory actually moves
    if s_lo == kernels.DECAYS:
        lo = lo + 1e-9
        _, _, _, s_lo = kernels.rk4_radial(lo, h, n)
    if s_lo != kernels.RISES or s_hi != kernels.CROSSES:
        raise NonConvergence("could not bracket the ground-state height in [1, 4]")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        _, _, _, s = kernels.rk4_radial(mid, h, n)
        if s == kernels.CROSSES:
            hi = mid
        else:
            lo = mid
    return lo, hi


def _second_derivative(p, h):
    """w'' from the integrator's w' by sixth-order central differences.

    Near r=0 the odd symmetry of w' supplies the ghost values; the last three
    nodes fall back to one-sided second order.
    """
    n = p.size
    ext = np.concatenate([-p[3:0:-1], p])
    c = (-1 / 60, 3 / 20, -3 / 4, 0.0, 3 / 4, -3 / 20, 1 / 60)
    out = np.empty(n)
    m = n - 3
    out[:m] = sum(cj * ext[j:j + m] for j, cj in enumerate(c)) / h
    out[m:] = np.gradient(p, h, edge_order=2)[m:]
    return out


def solve_ground_state(r_max=20.0, n=4000, tol=1e-8):
    """Shoot on w(0) with RK4, then splice the exact K0 tail where w gets tiny."""
    if r_max < 15 or n < 2000 or not tol > 0:
        raise DomainError("need r_max >= 15, n >= 2000, tol > 0")
    h = r_max / n
    npts = n + 1
    nshoot = max(npts, int(np.ceil(SHOOT_HORIZON / h)) + 1)
    lo, hi = _bisect_height(h, nshoot)
    W, P, stop, _ = kernels.rk4_radial(lo, h, nshoot)
    Wh, _, stop_h, _ = kernels.rk4_radial(hi, h, nshoot)
    stop = min(stop, npts)
    stop_h = min(stop_h, npts)
    W = W[:npts]
    P = P[:npts]
    Wh = Wh[:npts]
    r = np.arange(npts) * h

    # the two bracketing trajectories agree until the unstable e^r mode wakes up
    upto = min(stop, stop_h) - 1
    gap = np.abs(W[:upto] - Wh[:upto]) > GAP_TOL * np.abs(W[:upto])
    small = W[:upto] <= TAIL_SWITCH
    bad = np.flatnonzero(gap | small)
    j = int(bad[0]) if bad.size else upto
    j = max(j, 2)
    if r[j] < 8.0:
        raise NonConvergence(f"shooting trajectory unreliable already at r={r[j]:.2f}")

    # blend into C*K0 over a short window with a C^2 quintic ramp so that
    # neither w nor w' picks up a kink at the handover
    m = min(int(round(BLEND / h)), j - 1)
    i0 = j - m
    K0j, _ = bessel_k0k1(r[j])
    C = W[j] / K0j
    k0, k1 = bessel_k0k1(r[i0:])
    w = W.copy()
    p = P.copy()
    x = np.clip((r[i0:] - r[i0]) / (r[j] - r[i0]), 0.0, 1.0)
    s = x ** 3 * (10 - 15 * x + 6 * x * x)
    ds = 30 * x * x * (1 - x) ** 2 / (r[j] - r[i0])
    # past j the raw trajectory carries zero weight (and is zero-filled after a stop)
    Wi = W[i0:]
    Pi = P[i0:]
    w[i0:] = (1 - s) * Wi + s * C * k0
    p[i0:] = (1 - s) * Pi - s * C * k1 + ds * (C * k0 - Wi)

    if not (np.all(w > 0) and np.all(np.diff(w) < 0)):
        raise NonConvergence("profile is not positive and decreasing")
    wpp = _second_derivative(p, h)
    res = wpp[1:-1] + p[1:-1] / r[1:-1] - w[1:-1] + w[1:-1] ** 2
    residual = float(np.abs(res).max())
    if residual > tol:
        raise NonConvergence(f"ODE residual {residual:.3e} exceeds tol {tol:.1e}")
    tail_coeff = float(w[-1] * np.sqrt(r[-1]) * np.exp(r[-1]))
    return RadialProfile(r, w, p, float(0.5 * (lo + hi)), residual, float(r[j]), tail_coeff)


def integrals(profile: RadialProfile) -> GroundStateConstants:
    """Integrals of w^2, w^3 over the plane and the reduced constants c1, c2."""
    r = profile.r_grid
    w = profile.w_values
    R = profile.r_max
    C = profile.tail_coeff
    # beyond r_max, w ~ C r^-1/2 e^-r
    tail2 = C ** 2 * np.exp(-2 * R) / 2
    tail3 = C ** 3 * np.exp(-3 * R) / (3 * np.sqrt(R))
    int_w2 = 2 * np.pi * (simpson(w ** 2 * r, x=r) + tail2)
    int_w3 = 2 * np.pi * (simpson(w ** 3 * r, x=r) + tail3)
    # integral of w w_r x1^2 / r over the plane; angular average of cos^2 is pi
    c2 = np.pi * simpson(w * profile.w_derivs * r ** 2, x=r)
    return GroundStateConstants(float(int_w2), float(int_w3), float(int_w2 * int_w3 / 3), float(c2))


def _interpolant(profile):
    return PchipInterpolator(profile.r_grid, profile.w_values, extrapolate=False)


def evaluate_w(profile: RadialProfile, r):
    """w(r) by monotone cubic interpolation; C r^-1/2 e^-r past r_max."""
    rr = np.asarray(r, dtype=float)
    if np.any(rr < 0):
        raise DomainError("radius must be non-negative")
    out = np.empty(rr.shape)
    inside = rr <= profile.r_max
    out[inside] = _interpolant(profile)(rr[inside])
    far = rr[~inside]
    out[~inside] = profile.tail_coeff * far ** -0.5 * np.exp(-far)
    return float(out) if rr.ndim == 0 else out


def evaluate_w_prime(profile: RadialProfile, r):
    rr = np.asarray(r, dtype=float)
    out = np.empty(rr.shape)
    inside = rr <= profile.r_max
    out[inside] = np.interp(rr[inside], profile.r_grid, profile.w_derivs)
    far = rr[~inside]
    out[~inside] = -profile.tail_coeff * np.exp(-far) * (far ** -0.5 + 0.5 * far ** -1.5)
    return float(out) if rr.ndim == 0 else out


def write_profile_csv(profile: RadialProfile, path):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["r", "w", "w_prime"])
        for row in zip(profile.r_grid, profile.w_values, profile.w_derivs):
            out.writerow([repr(float(v)) for v in row])


def write_constants_json(profile: RadialProfile, consts: GroundStateConstants, path):
    with open(path, "w") as fh:
        json.dump({"version": __version__, **consts.as_dict(w0=profile.w0)}, fh, indent=2, sort_keys=True)
        fh.write("\n")
