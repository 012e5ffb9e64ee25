"""Radial discretization of the linearized operator around w and of the nonlocal problem.

Cell-centred grid r_i = (i + 1/2) h on [0, r_max]; the unknown is psi = sqrt(r) phi,
which turns the weighted radial Laplacian into a symmetric tridiagonal matrix.
"""
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.linalg import eigh_tridiagonal, solve_banded

from .errors import DomainError, GridError, NonConvergence
from .ground_state import RadialProfile, evaluate_w, evaluate_w_prime

# only eigenvalues above the essential-spectrum edge -1 are sensitive to a finite box
ISOLATED_ABOVE = -1.0
BOUNDARY_TOL = 1e-4


@dataclass(frozen=True)
class RadialOperator:
    m: int
    r: np.ndarray
    h: float
    w: np.ndarray
    gamma: complex
    diag: np.ndarray
    offdiag: np.ndarray

    @property
    def n(self):
        return self.r.size

    @property
    def r_max(self):
        return self.n * self.h

    def u(self):
        """Column of the rank-one term: sqrt(r) w^2."""
        return np.sqrt(self.r) * self.w ** 2

    def v(self):
        """Row of the rank-one term: the functional psi -> int w phi / int w^2."""
        denom = np.sum(self.w ** 2 * self.r * self.h)
        return np.sqrt(self.r) * self.w * self.h / denom

    def dense_local(self):
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def dense(self):
        A = self.dense_local()
        if self.gamma != 0:
            A = A - self.gamma * np.outer(self.u(), self.v())
        return A


def build_operator(profile: RadialProfile, m=0, gamma=0.0, n=2000, r_max=None) -> RadialOperator:
    if int(m) != m or m < 0:
        raise DomainError("mode must be a non-negative integer")
    r_max = profile.r_max if r_max is None else r_max
    h = r_max / n
    r = (np.arange(n) + 0.5) * h
    w = evaluate_w(profile, r)
    rp, rm = r + h / 2, r - h / 2
    diag = -(rp + rm) / (r * h * h) - m * m / r ** 2 - 1.0 + 2.0 * w
    off = np.sqrt(rp[:-1] * rm[1:]) / (np.sqrt(r[:-1] * r[1:]) * h * h)
    return RadialOperator(int(m), r, h, w, gamma, diag, off)


@dataclass
class Spectrum:
    values: np.ndarray  # descending by real part
    vectors: np.ndarray  # phi samples, one column per value
    op: RadialOperator


def _to_phi(op, psi):
    return psi / np.sqrt(op.r)[:, None]


def _local(op, count):
    n = op.n
    vals, vecs = eigh_tridiagonal(op.diag, op.offdiag, select="i", select_range=(n - count, n - 1))
    order = np.argsort(-vals)
    return vals[order], vecs[:, order]


def _enlarged(op, profile, factor=1.25):
    n = int(round(op.n * factor))
    return build_operator(profile, op.m, op.gamma, n=n, r_max=n * op.h)


def _boundary_check(op, profile, vals, solver):
    if profile is None or not np.any(np.real(vals) > ISOLATED_ABOVE):
        return
    big_vals = solver(_enlarged(op, profile))
    for a in vals:
        if a.real <= ISOLATED_ABOVE:
            continue
        gap = np.min(np.abs(big_vals - a))
        if gap > BOUNDARY_TOL:
            raise GridError(f"eigenvalue {a:.6g} moves by {gap:.2e} when r_max grows 25%")


def local_spectrum(op: RadialOperator, count=3, profile: Optional[RadialProfile] = None) -> Spectrum:
    """Top eigenvalues of the local operator (multiplier ignored).

    Passing the profile enables the r_max sensitivity check.
    """
    vals, vecs = _local(op, count)
    _boundary_check(op, profile, vals, lambda o: _local(o, count + 2)[0])
    return Spectrum(vals, _to_phi(op, vecs), op)


def _dense_eig(op):
    vals, vecs = np.linalg.eig(op.dense())
    order = np.lexsort((-vals.imag, -vals.real))
    return vals[order], vecs[:, order]


def nlep_spectrum(op: RadialOperator, count=6, profile: Optional[RadialProfile] = None) -> Spectrum:
    """Leading eigenvalues of L0 phi - gamma (int w phi / int w^2) w^2."""
    if op.m != 0 or op.gamma == 0:
        # for m >= 1 the functional integrates an oscillating mode to zero
        return local_spectrum(op, count, profile)
    vals, vecs = _dense_eig(op)
    vals, vecs = vals[:count], vecs[:, :count]
    _boundary_check(op, profile, vals, lambda o: _dense_eig(o)[0][: count + 4])
    if np.all(np.abs(vals.imag) == 0):
        vals = vals.real
        vecs = vecs.real
    return Spectrum(vals, _to_phi(op, vecs), op)


def nlep_apply(op: RadialOperator, phi):
    """Apply the discrete nonlocal operator to phi samples."""
    psi = np.sqrt(op.r) * phi
    return (op.dense() @ psi) / np.sqrt(op.r)


def eigen_residual(op: RadialOperator, value, phi):
    psi = np.sqrt(op.r) * phi
    A = op.dense()
    return float(np.linalg.norm(A @ psi - value * psi) / np.linalg.norm(psi))


def secular_refine(op: RadialOperator, alpha, tol=1e-10, maxiter=50):
    """Newton on 1 - gamma v^T (S - alpha)^-1 u = 0 with tridiagonal solves.

    Eigenvalues of the rank-one perturbed operator are exactly the roots of this
    function, so this both refines a seed and cross-checks the dense route.
    """
    n = op.n
    u = op.u().astype(complex)
    v = op.v()
    g = op.gamma
    ab = np.zeros((3, n), dtype=complex)
    ab[0, 1:] = op.offdiag
    ab[2, :-1] = op.offdiag
    a = complex(alpha)
    with np.errstate(all="ignore"):
        return _secular_newton(op, ab, u, v, g, a, alpha, tol, maxiter)


def _secular_newton(op, ab, u, v, g, a, alpha, tol, maxiter):
    for _ in range(maxiter):
        ab[1] = op.diag - a
        y = solve_banded((1, 1), ab, u)
        z = solve_banded((1, 1), ab, y)
        f = 1.0 - g * (v @ y)
        df = -g * (v @ z)
        if df == 0 or not np.isfinite(f):
            break
        step = f / df
        a -= step
        if not np.isfinite(a):
            break
        if abs(step) <= tol * max(1.0, abs(a)):
            return a.real if a.imag == 0 else a
    raise NonConvergence(f"secular iteration from {alpha} did not settle")


def correlation(op: RadialOperator, phi, target):
    """|<phi, target>| / (|phi| |target|) in the r-weighted inner product."""
    wgt = op.r
    num = abs(np.sum(phi * target * wgt))
    return float(num / math.sqrt(np.sum(phi * phi * wgt) * np.sum(target * target * wgt)))


def zero_mode_correlation(profile: RadialProfile, spec: Spectrum):
    """Correlation of the top m=1 eigenfunction with w'."""
    return correlation(spec.op, spec.vectors[:, 0].real, evaluate_w_prime(profile, spec.op.r))


def grid_doubling_shift(profile: RadialProfile, gamma=2.0, n=2000, count=3, coarse_values=None):
    """Largest move of the top eigenvalues when the cell count doubles.

    The coarse values come from the dense solver, the fine ones from secular
    Newton seeded at the coarse values.
    """
    if coarse_values is None:
        coarse_values = nlep_spectrum(build_operator(profile, 0, gamma, n=n), count).values
    vals = np.asarray(coarse_values)[:count]
    fine = build_operator(profile, 0, gamma, n=2 * n)
    moved = []
    for a in vals:
        b = secular_refine(fine, a)
        moved.append(abs(b - a))
    return float(max(moved)), vals


# ----------------------------------------------------------------- tau scan
@dataclass
class TauEntry:
    tau: float
    converged: bool
    lam: Optional[complex]
    max_real: Optional[float]
    iterations: int
    note: str = ""


def _top(op):
    vals, _ = _dense_eig(op)
    return vals[0]


def nlep_tau_scan(profile: RadialProfile, tau_values, lambda_guess=None, n=400,
                  damping=0.5, tol=1e-9, maxiter=300, restarts=3):
    """Self-consistent top eigenvalue for multiplier 2 / (1 + tau lambda), per tau.

    Each sweep iterates lambda <- (1 - damping) lambda + damping * eig(gamma(lambda)),
    following the eigenvalue with secular Newton steps; a dense solve at the end
    confirms it is still the rightmost one, otherwise the sweep restarts from there.
    """
    base = build_operator(profile, 0, 2.0, n=n)
    top0 = _top(base)
    out = []
    for tau in tau_values:
        if tau < 0:
            raise DomainError("tau must be non-negative")
        if tau == 0:
            out.append(TauEntry(0.0, True, top0, float(top0.real), 1))
            continue
        lam = complex(top0 if lambda_guess is None else lambda_guess)
        entry = None
        total = 0
        for _ in range(restarts + 1):
            tracked = lam
            settled = False
            for it in range(maxiter):
                total += 1
                denom = 1.0 + tau * lam
                if abs(denom) < 1e-10:
                    entry = TauEntry(tau, False, None, None, total, "multiplier pole 1 + tau lambda = 0")
                    break
                op = replace(base, gamma=2.0 / denom)
                try:
                    tracked = complex(secular_refine(op, tracked))
                except NonConvergence:
                    tracked = complex(_top(op))
                if abs(tracked - lam) <= tol * max(1.0, abs(tracked)):
                    settled = True
                    break
                lam = (1 - damping) * lam + damping * tracked
            if entry is not None:
                break
            if not settled:
                entry = TauEntry(tau, False, lam, float(lam.real), total, "iteration limit")
                break
            top = complex(_top(replace(base, gamma=2.0 / (1.0 + tau * tracked))))
            if top.real <= tracked.real + 1e-9:
                entry = TauEntry(tau, True, tracked, float(tracked.real), total)
                break
            lam = top
        if entry is None:
            entry = TauEntry(tau, False, lam, float(lam.real), total, "rightmost eigenvalue kept moving")
        out.append(entry)
    return out


def crossing_tau(entries):
    """First tau where the converged max real part turns positive, interpolated linearly."""
    good = [e for e in entries if e.converged]
    for a, b in zip(good, good[1:]):
        if a.max_real <= 0 < b.max_real:
            t = a.max_real / (a.max_real - b.max_real)
            return a.tau + t * (b.tau - a.tau)
    return None
