"""Free-space Green's function of (Delta - sigma^2) in the plane.

K0 and K1 are computed here from scratch: a power series near the origin,
a trapezoid rule on the cosh integral representation at moderate argument,
and the Hankel asymptotic series far out.
"""
import csv
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularPoint

log = logging.getLogger(__name__)

EULER_GAMMA = 0.57721566490153286061

_SERIES_MAX = 2.0
_ASYMPTOTIC_MIN = 30.0
_N_SERIES = 30
_N_ASYMPTOTIC = 20
_TRAP_STEP = 0.1
# integrand e^{-z(cosh t - 1)} is below e^-50 past this t for every z > 2
_TRAP_T = np.arange(0.0, math.acosh(1.0 + 50.0 / _SERIES_MAX) + _TRAP_STEP, _TRAP_STEP)


def _series(z):
    q = 0.25 * z * z
    lg = np.log(0.5 * z) + EULER_GAMMA
    t = np.ones_like(z)  # (z^2/4)^k / (k!)^2
    u = np.ones_like(z)  # (z^2/4)^k / (k! (k+1)!)
    i0 = t.copy()
    i1s = u.copy()
    harm = 0.0
    s0 = np.zeros_like(z)
    s1 = 2.0 * (1.0 - EULER_GAMMA) - 1.0 + 0.0 * z  # psi(1) + psi(2)
    s1 = s1 * u
    for k in range(1, _N_SERIES):
        t = t * q / (k * k)
        u = u * q / (k * (k + 1))
        harm += 1.0 / k
        i0 = i0 + t
        i1s = i1s + u
        s0 = s0 + harm * t
        psi_sum = 2.0 * (harm - EULER_GAMMA) + 1.0 / (k + 1)
        s1 = s1 + psi_sum * u
    k0 = -lg * i0 + s0
    i1 = 0.5 * z * i1s
    k1 = 1.0 / z + (lg - EULER_GAMMA) * i1 - 0.25 * z * s1
    return k0, k1


def _trapezoid(z):
    t = _TRAP_T
    e = np.exp(-np.outer(z, np.cosh(t) - 1.0))
    w = np.full(t.size, _TRAP_STEP)
    w[0] *= 0.5
    scale = np.exp(-z)
    k0 = scale * (e @ w)
    k1 = scale * (e @ (w * np.cosh(t)))
    return k0, k1


def _asymptotic(z):
    pref = np.sqrt(np.pi / (2.0 * z)) * np.exp(-z)
    out = []
    for nu in (0.0, 1.0):
        mu4 = 4.0 * nu * nu
        term = np.ones_like(z)
        total = term.copy()
        for k in range(1, _N_ASYMPTOTIC):
            term = term * (mu4 - (2 * k - 1) ** 2) / (k * 8.0 * z)
            total = total + term
        out.append(pref * total)
    return out[0], out[1]


def bessel_k0k1(z):
    """Return (K0(z), K1(z)) for z > 0, scalar or array."""
    arr = np.asarray(z, dtype=float)
    flat = np.atleast_1d(arr).ravel()
    if np.any(~(flat > 0)):
        raise DomainError("modified Bessel K needs z > 0")
    k0 = np.empty_like(flat)
    k1 = np.empty_like(flat)
    for mask, fn in (
        (flat <= _SERIES_MAX, _series),
        ((flat > _SERIES_MAX) & (flat <= _ASYMPTOTIC_MIN), _trapezoid),
        (flat > _ASYMPTOTIC_MIN, _asymptotic),
    ):
        if mask.any():
            k0[mask], k1[mask] = fn(flat[mask])
    if arr.ndim == 0:
        return float(k0[0]), float(k1[0])
    return k0.reshape(arr.shape), k1.reshape(arr.shape)


def bessel_k0(z):
    return bessel_k0k1(z)[0]


def bessel_k1(z):
    return bessel_k0k1(z)[1]


@dataclass(frozen=True)
class GreenParams:
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")


def _separation(x, z):
    d = np.asarray(x, dtype=float) - np.asarray(z, dtype=float)
    r = float(np.hypot(d[0], d[1]))
    if r == 0.0:
        raise SingularPoint("Green's function evaluated on the diagonal")
    return d, r


def green_free(p: GreenParams, x, z):
    """(1/2pi) K0(sigma |x - z|)."""
    _, r = _separation(x, z)
    return bessel_k0(p.sigma * r) / (2.0 * np.pi)


def green_gradient(p: GreenParams, x, z):
    """Gradient of green_free in x."""
    d, r = _separation(x, z)
    return -(p.sigma / (2.0 * np.pi)) * bessel_k1(p.sigma * r) * d / r


def boundary_correction_bound(p: GreenParams, q, domain_radius):
    """Size of the leading image-charge term a Neumann wall at domain_radius adds at q.

    The reflected source sits at distance 2*(domain_radius - |q|), so the
    dropped regular part is of order K0 of that distance. Logged, not asserted.
    """
    gap = domain_radius - float(np.hypot(*q))
    if gap <= 0:
        raise DomainError("point lies outside the domain")
    bound = bessel_k0(2.0 * p.sigma * gap) / (2.0 * np.pi)
    log.info("image-charge correction at |q|=%.4g: %.3e", domain_radius - gap, bound)
    return bound


def write_kernel_csv(p: GreenParams, radii, path):
    """Dump r, G(r), dG/dr for plotting."""
    radii = np.asarray(radii, dtype=float)
    k0, k1 = bessel_k0k1(p.sigma * radii)
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["r", "G", "dG_dr"])
        for r, a, b in zip(radii, k0, k1):
            out.writerow([repr(float(r)), repr(float(a) / (2 * np.pi)), repr(-p.sigma * float(b) / (2 * np.pi))])
