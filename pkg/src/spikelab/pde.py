"""Desk-scale time stepper for the precursor Gierer-Meinhardt system in y variables.

A_t = eps^2 Lap A - mu(y) A + A^2 / H
tau H_t = D Lap H - H + A^2

Diffusion is implicit (5-point Neumann Laplacian, sparse LU factorized once),
reactions explicit. The inhibitor is either solved quasi-statically each step,
(I - D Lap) H = A^2, or stepped with tau_eff = max(tau, tau_floor).
"""
import csv
import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field, fields
from typing import List, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from . import __version__, kernels
from .errors import ConfigError, LinearSolveFailure, PositivityLoss
from .ground_state import evaluate_w, solve_ground_state
from .reduced import (
    ModelParams,
    compute_xi,
    equilibrium_radius,
    equilibrium_radius_centre,
    ground_constants,
    make_constants,
)

log = logging.getLogger(__name__)

W_CUTOFF = 1e-6
RATE_BOUND = 0.2


@dataclass
class Field2D:
    nx: int
    ny: int
    h: float
    values: np.ndarray
    L: float = 1.0

    def coords(self):
        """Cell-centre coordinates along each axis."""
        x = -self.L + (np.arange(self.nx) + 0.5) * self.h
        y = -self.L + (np.arange(self.ny) + 0.5) * self.h
        return x, y


@dataclass
class SimConfig:
    k: int = 3
    with_centre: bool = False
    epsilon: float = math.sqrt(1e-3)
    D: float = 0.02
    tau: float = 0.0
    mu2: float = 4.0
    L: float = 1.0
    nx: int = 128
    dt: float = 0.01
    t_end: float = 20.0
    seed: int = 0
    perturb_amp: float = 0.005
    snapshot_every: int = 100
    # beyond the documented keys
    inhibitor: str = "quasi-steady"  # or "dynamic"
    tau_floor: float = 1e-3
    init: str = "cluster"  # cluster | single | homogeneous
    offset_x: float = 0.3
    offset_y: float = 0.0
    radius: float = 0.0  # polygon radius in y units; 0 means take it from the reduced equation
    precursor: str = "quadratic"  # quadratic | none
    mask: str = "square"  # square | disk

    def __post_init__(self):
        self.validate()

    @property
    def ny(self):
        return self.nx

    @property
    def h(self):
        return 2 * self.L / self.nx

    @property
    def params(self):
        return ModelParams(epsilon=self.epsilon, D=self.D, tau=self.tau, mu_second=self.mu2)

    def validate(self):
        bad = []
        if self.k < 1:
            bad.append("k must be >= 1")
        if not (self.epsilon > 0 and self.D > 0 and self.tau >= 0 and self.mu2 >= 0):
            bad.append("epsilon, D > 0 and tau, mu2 >= 0")
        if self.nx < 8 or self.L <= 0 or self.dt <= 0 or self.t_end < 0:
            bad.append("grid and time settings must be positive")
        if not 0 <= self.perturb_amp <= 0.01:
            bad.append("perturb_amp must lie in [0, 0.01]")
        if self.snapshot_every < 1:
            bad.append("snapshot_every must be >= 1")
        if self.inhibitor not in ("quasi-steady", "dynamic"):
            bad.append(f"unknown inhibitor mode {self.inhibitor!r}")
        if self.init not in ("cluster", "single", "homogeneous"):
            bad.append(f"unknown init {self.init!r}")
        if self.precursor not in ("quadratic", "none"):
            bad.append(f"unknown precursor {self.precursor!r}")
        if self.mask not in ("square", "disk"):
            bad.append(f"unknown mask {self.mask!r}")
        if bad:
            raise ConfigError("; ".join(bad))

    @property
    def tau_eff(self):
        return max(self.tau, self.tau_floor)


_BOOL = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}


def parse_config(text) -> SimConfig:
    """Read `key = value` lines; '#' starts a comment. Unknown keys are rejected."""
    types = {f.name: f.type for f in fields(SimConfig)}
    kw = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        typ = types[key]
        try:
            if typ in (bool, "bool"):
                if val.lower() not in _BOOL:
                    raise ValueError(val)
                kw[key] = _BOOL[val.lower()]
            elif typ in (int, "int"):
                kw[key] = int(val)
            elif typ in (float, "float"):
                kw[key] = float(val)
            else:
                kw[key] = val
        except ValueError:
            raise ConfigError(f"line {lineno}: bad value {val!r} for {key}") from None
    return SimConfig(**kw)


def load_config(path) -> SimConfig:
    with open(path) as fh:
        return parse_config(fh.read())


# ------------------------------------------------------------------ operators
def _active_mask(cfg: SimConfig):
    x = -cfg.L + (np.arange(cfg.nx) + 0.5) * cfg.h
    X, Y = np.meshgrid(x, x, indexing="ij")
    if cfg.mask == "disk":
        return X ** 2 + Y ** 2 <= cfg.L ** 2
    return np.ones((cfg.nx, cfg.nx), dtype=bool)


def neumann_laplacian(active, h):
    """5-point Laplacian on the active cells; missing neighbours act as mirrors (zero flux)."""
    nx, ny = active.shape
    idx = -np.ones(active.shape, dtype=np.int64)
    idx[active] = np.arange(active.sum())
    rows, cols, vals = [], [], []
    diag = np.zeros(active.sum())
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        a = idx[max(0, -di):nx - max(0, di), max(0, -dj):ny - max(0, dj)]
        b = idx[max(0, di):nx - max(0, -di) or None, max(0, dj):ny - max(0, -dj) or None]
        ok = (a >= 0) & (b >= 0)
        rows.append(a[ok])
        cols.append(b[ok])
        np.add.at(diag, a[ok], -1.0)
    n = diag.size
    rows = np.concatenate(rows + [np.arange(n)])
    cols = np.concatenate(cols + [np.arange(n)])
    vals = np.concatenate([np.ones(rows.size - n), diag])
    return sp.csc_matrix((vals, (rows, cols)), shape=(n, n)) / (h * h)


class Stepper:
    """Holds the factorized implicit operators for one configuration."""

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        self.active = _active_mask(cfg)
        lap = neumann_laplacian(self.active, cfg.h)
        eye = sp.identity(lap.shape[0], format="csc")
        try:
            self.solve_A = splu((eye - cfg.dt * cfg.epsilon ** 2 * lap).tocsc()).solve
            if cfg.inhibitor == "quasi-steady":
                self.solve_H = splu((eye - cfg.D * lap).tocsc()).solve
            else:
                c = cfg.dt / cfg.tau_eff
                self.solve_H = splu((eye - c * cfg.D * lap).tocsc()).solve
        except RuntimeError as exc:
            raise LinearSolveFailure(str(exc)) from exc
        x = -cfg.L + (np.arange(cfg.nx) + 0.5) * cfg.h
        X, Y = np.meshgrid(x, x, indexing="ij")
        if cfg.precursor == "none":
            self.mu = np.ones_like(X)
        else:
            self.mu = np.asarray(cfg.params.mu_at(np.hypot(X, Y)), dtype=float)

    def _solve(self, solver, grid):
        out = np.zeros_like(grid)
        sol = solver(grid[self.active])
        if not np.all(np.isfinite(sol)):
            raise LinearSolveFailure("implicit solve returned non-finite values")
        out[self.active] = sol
        return out

    def inhibitor_from(self, A):
        return self._solve(self.solve_H, A * A)

    def reaction_rate(self, A, H):
        """Largest explicit linearized reaction rate, used for the step-size bound."""
        rate = float(np.max((self.mu + 2 * A / H)[self.active]))
        if self.cfg.inhibitor == "dynamic":
            rate = max(rate, 1.0 / self.cfg.tau_eff)
        return rate


@dataclass
class SimState:
    A: np.ndarray
    H: np.ndarray
    t: float = 0.0
    n: int = 0


def _check_positive(state, stepper):
    act = stepper.active
    if not (np.all(np.isfinite(state.A)) and np.all(np.isfinite(state.H))):
        raise PositivityLoss("non-finite field values", state)
    if state.A[act].min() <= 0 or state.H[act].min() <= 0:
        raise PositivityLoss(f"field lost positivity at t={state.t:.4g}", state)


def step(state: SimState, stepper: Stepper, check=True) -> SimState:
    cfg = stepper.cfg
    dt = cfg.dt
    rhs = kernels.reaction(state.A, state.H, stepper.mu, dt)
    A = stepper._solve(stepper.solve_A, rhs)
    if cfg.inhibitor == "quasi-steady":
        H = stepper.inhibitor_from(A)
    else:
        H = stepper._solve(stepper.solve_H, kernels.inhibitor_source(state.A, state.H, dt, cfg.tau_eff))
    new = SimState(A, H, state.t + dt, state.n + 1)
    if check:
        _check_positive(new, stepper)
    return new


# -------------------------------------------------------------- initial data
def spike_amplitude(cfg: SimConfig):
    xi = compute_xi(cfg.params, ground_constants().int_w2)
    return xi * cfg.D / cfg.epsilon ** 2


def cluster_radius(cfg: SimConfig):
    """Polygon radius in y units from the reduced radius equation."""
    if cfg.radius > 0:
        return cfg.radius
    p = cfg.params
    rc = make_constants(p, max(cfg.k, 2))
    solver = equilibrium_radius_centre if cfg.with_centre else equilibrium_radius
    return cfg.epsilon * solver(max(cfg.k, 2), p, rc).radius


def spike_centres(cfg: SimConfig):
    if cfg.init == "single":
        return np.array([[cfg.offset_x, cfg.offset_y]])
    R = cluster_radius(cfg) if cfg.k > 1 else 0.0
    th = 2 * np.pi * np.arange(cfg.k) / cfg.k
    pts = R * np.column_stack([np.cos(th), np.sin(th)])
    if cfg.with_centre:
        pts = np.vstack([pts, [0.0, 0.0]])
    return pts


def initial_state(cfg: SimConfig, stepper: Optional[Stepper] = None, profile=None) -> SimState:
    stepper = stepper or Stepper(cfg)
    shape = (cfg.nx, cfg.nx)
    if cfg.init == "homogeneous":
        # with mu = 1 the constant state A = H = 1 balances both equations
        A = np.ones(shape)
        H = np.ones(shape)
        return SimState(A * stepper.active, H * stepper.active + (~stepper.active))
    profile = profile or solve_ground_state()
    x = -cfg.L + (np.arange(cfg.nx) + 0.5) * cfg.h
    X, Y = np.meshgrid(x, x, indexing="ij")
    amp = spike_amplitude(cfg)
    A = np.zeros(shape)
    for cx, cy in spike_centres(cfg):
        rr = np.hypot(X - cx, Y - cy) / cfg.epsilon
        w = evaluate_w(profile, rr)
        A += amp * np.where(w >= W_CUTOFF, w, 0.0)
    if cfg.perturb_amp > 0:
        rng = np.random.default_rng(cfg.seed)
        A *= 1.0 + cfg.perturb_amp * rng.uniform(-1.0, 1.0, size=shape)
    A *= stepper.active
    H = stepper.inhibitor_from(A) if cfg.inhibitor == "quasi-steady" else np.full(shape, amp)
    H[~stepper.active] = 1.0
    return SimState(A, H)


# ------------------------------------------------------------ spike tracking
def detect_spikes(field: Field2D, rel_threshold=0.5, merge_cells=3.0):
    """Local maxima above rel_threshold * max, refined by 3x3 parabolic fits.

    Returns a list of (x, y, amplitude). Peaks closer than merge_cells * h are
    merged, keeping the taller one.
    """
    F = np.ascontiguousarray(field.values, dtype=float)
    top = float(F.max())
    if top <= 0 or top - float(F.min()) <= 1e-12 * abs(top):
        return []
    idx = kernels.local_maxima(F, rel_threshold * top)
    xs, ys = field.coords()
    found = []
    for i, j in idx:
        c = F[i, j]
        nb = np.array([F[i - 1, j], F[i + 1, j], F[i, j - 1], F[i, j + 1]])
        # fit the parabola to log F when possible: spike cores are closer to
        # Gaussian than to quadratic, which cuts the sub-grid bias about fourfold
        if c > 0 and np.all(nb > 0):
            g0, g1, g2, g3, gc = (*np.log(nb), math.log(c))
        else:
            g0, g1, g2, g3, gc = (*nb, c)
        dx2 = g0 - 2 * gc + g1
        dy2 = g2 - 2 * gc + g3
        ox = 0.5 * (g0 - g1) / dx2 if dx2 < 0 else 0.0
        oy = 0.5 * (g2 - g3) / dy2 if dy2 < 0 else 0.0
        ox = min(max(ox, -0.5), 0.5)
        oy = min(max(oy, -0.5), 0.5)
        peak = gc - 0.25 * (ox * (g0 - g1) + oy * (g2 - g3))
        amp = math.exp(peak) if c > 0 and np.all(nb > 0) else peak
        found.append((xs[i] + ox * field.h, ys[j] + oy * field.h, float(amp)))
    found.sort(key=lambda s: -s[2])
    kept = []
    for s in found:
        if all(math.hypot(s[0] - t[0], s[1] - t[1]) >= merge_cells * field.h for t in kept):
            kept.append(s)
    kept.sort(key=lambda s: (round(math.atan2(s[1], s[0]), 12), s[0]))
    return kept


def asymmetry_score(spikes, with_centre=False):
    """std / mean of consecutive distances around the ring (centre spike left out)."""
    pts = np.array([(s[0], s[1]) for s in spikes], dtype=float).reshape(-1, 2)
    if with_centre and len(pts) > 1:
        c = pts.mean(axis=0)
        pts = np.delete(pts, np.argmin(np.hypot(*(pts - c).T)), axis=0)
    if len(pts) < 3:
        return 0.0
    c = pts.mean(axis=0)
    order = np.argsort(np.arctan2(pts[:, 1] - c[1], pts[:, 0] - c[0]))
    ring = pts[order]
    d = np.hypot(*(np.roll(ring, -1, axis=0) - ring).T)
    return float(d.std() / d.mean())


@dataclass
class Snapshot:
    t: float
    spikes: list
    asymmetry: float


@dataclass
class SpikeTrack:
    snapshots: List[Snapshot] = field(default_factory=list)

    def counts(self):
        return [len(s.spikes) for s in self.snapshots]

    def asymmetries(self):
        return [s.asymmetry for s in self.snapshots]

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["t", "j", "x", "y", "amplitude", "asymmetry"])
            for snap in self.snapshots:
                for j, (x, y, a) in enumerate(snap.spikes, start=1):
                    out.writerow([f"{snap.t:.10g}", j, f"{x:.12g}", f"{y:.12g}", f"{a:.12g}",
                                  f"{snap.asymmetry:.12g}"])


def _snapshot(cfg, state):
    fld = Field2D(cfg.nx, cfg.nx, cfg.h, state.A, cfg.L)
    spikes = detect_spikes(fld)
    return Snapshot(state.t, spikes, asymmetry_score(spikes, cfg.with_centre))


def write_fields(cfg: SimConfig, state: SimState, outdir, tag):
    """Flat little-endian float64 file holding A then H, with a JSON sidecar."""
    os.makedirs(outdir, exist_ok=True)
    base = os.path.join(outdir, f"snap_{tag:06d}")
    np.concatenate([state.A.ravel(), state.H.ravel()]).astype("<f8").tofile(base + ".bin")
    meta = {
        "version": __version__,
        "nx": cfg.nx,
        "ny": cfg.nx,
        "h": cfg.h,
        "L": cfg.L,
        "t": state.t,
        "step": state.n,
        "fields": ["A", "H"],
        "dtype": "<f8",
        "order": "C",
    }
    with open(base + ".json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_fields(path_bin):
    with open(path_bin[:-4] + ".json") as fh:
        meta = json.load(fh)
    raw = np.fromfile(path_bin, dtype=meta["dtype"])
    n = meta["nx"] * meta["ny"]
    return meta, raw[:n].reshape(meta["nx"], meta["ny"]), raw[n:].reshape(meta["nx"], meta["ny"])


@dataclass
class RunResult:
    track: SpikeTrack
    state: SimState
    config: SimConfig


def run(cfg: SimConfig, outdir=None, profile=None, state=None) -> RunResult:
    stepper = Stepper(cfg)
    state = state or initial_state(cfg, stepper, profile)
    rate = stepper.reaction_rate(state.A, state.H)
    if cfg.dt * rate > RATE_BOUND:
        raise ConfigError(f"dt * reaction rate = {cfg.dt * rate:.3g} exceeds {RATE_BOUND}")
    nsteps = int(round(cfg.t_end / cfg.dt))
    track = SpikeTrack([_snapshot(cfg, state)])
    if outdir:
        write_fields(cfg, state, outdir, 0)
    for _ in range(nsteps):
        state = step(state, stepper)
        if state.n % cfg.snapshot_every == 0 or state.n == nsteps:
            track.snapshots.append(_snapshot(cfg, state))
            if outdir:
                write_fields(cfg, state, outdir, state.n)
    if outdir:
        track.write_csv(os.path.join(outdir, "track.csv"))
        with open(os.path.join(outdir, "config.json"), "w") as fh:
            json.dump({"version": __version__, **asdict(cfg)}, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return RunResult(track, state, cfg)
