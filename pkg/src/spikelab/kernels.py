"""Hot loops, each in a numba flavour and a plain numpy flavour.

The public names at the bottom pick one flavour according to
``_accel.USE_NUMBA``. Both flavours are importable directly so tests and the
benchmark can compare them.
"""
import numpy as np

from . import _accel

# ---------------------------------------------------------------- radial RK4
# status codes returned by the shooting integrator
DECAYS = 0
CROSSES = -1  # w went negative: initial height too large
RISES = 1  # w' turned positive: initial height too small


def _rk4_radial_py(w0, h, n):
    a = (w0 - w0 * w0) / 4.0
    b = a * (1.0 - 2.0 * w0) / 16.0
    W = np.zeros(n)
    P = np.zeros(n)
    W[0] = w0
    r = h
    w = w0 + a * h * h + b * h ** 4
    p = 2.0 * a * h + 4.0 * b * h ** 3
    W[1] = w
    P[1] = p
    for i in range(1, n - 1):
        k1w = p
        k1p = -p / r + w - w * w
        w2 = w + 0.5 * h * k1w
        p2 = p + 0.5 * h * k1p
        rm = r + 0.5 * h
        k2w = p2
        k2p = -p2 / rm + w2 - w2 * w2
        w3 = w + 0.5 * h * k2w
        p3 = p + 0.5 * h * k2p
        k3w = p3
        k3p = -p3 / rm + w3 - w3 * w3
        w4 = w + h * k3w
        p4 = p + h * k3p
        r4 = r + h
        k4w = p4
        k4p = -p4 / r4 + w4 - w4 * w4
        w = w + h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
        p = p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        r = r4
        W[i + 1] = w
        P[i + 1] = p
        if w < 0.0:
            return W, P, i + 1, CROSSES
        if p > 0.0:
            return W, P, i + 1, RISES
    return W, P, n, DECAYS


rk4_radial_numpy = _rk4_radial_py
rk4_radial_numba = _accel.njit(_rk4_radial_py)


# ---------------------------------------------------------- reaction update
def reaction_numpy(A, H, mu, dt):
    """Explicit activator source dt*(-mu*A + A^2/H) added to A."""
    return A + dt * (-mu * A + A * A / H)


def _reaction_loop(A, H, mu, dt):
    out = np.empty_like(A)
    nx, ny = A.shape
    for i in range(nx):
        for j in range(ny):
            a = A[i, j]
            out[i, j] = a + dt * (-mu[i, j] * a + a * a / H[i, j])
    return out


reaction_numba = _accel.njit(_reaction_loop)


def inhibitor_source_numpy(A, H, dt, tau):
    return H + (dt / tau) * (A * A - H)


def _inhibitor_loop(A, H, dt, tau):
    out = np.empty_like(H)
    nx, ny = H.shape
    c = dt / tau
    for i in range(nx):
        for j in range(ny):
            a = A[i, j]
            out[i, j] = H[i, j] + c * (a * a - H[i, j])
    return out


inhibitor_source_numba = _accel.njit(_inhibitor_loop)


# ------------------------------------------------------------- local maxima
def local_maxima_numpy(F, threshold):
    """Interior indices (i, j) where F is >= its 8 neighbours and > threshold."""
    c = F[1:-1, 1:-1]
    mask = c > threshold
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            nb = F[1 + di:F.shape[0] - 1 + di, 1 + dj:F.shape[1] - 1 + dj]
            mask &= c >= nb
    idx = np.argwhere(mask) + 1
    return idx.astype(np.int64)


def _local_maxima_loop(F, threshold):
    nx, ny = F.shape
    buf = np.empty((nx * ny, 2), dtype=np.int64)
    m = 0
    for i in range(1, nx - 1):
        for j in range(1, ny - 1):
            v = F[i, j]
            if v <= threshold:
                continue
            ok = True
            for di in range(-1, 2):
                for dj in range(-1, 2):
                    if (di != 0 or dj != 0) and F[i + di, j + dj] > v:
                        ok = False
            if ok:
                buf[m, 0] = i
                buf[m, 1] = j
                m += 1
    return buf[:m].copy()


local_maxima_numba = _accel.njit(_local_maxima_loop)


# ------------------------------------------------------ pairwise interaction
def pair_energy_numpy(X, sigma):
    """Sum over unordered pairs of (sigma d)^(-1/2) exp(-sigma d)."""
    diff = X[:, None, :] - X[None, :, :]
    d = np.sqrt((diff ** 2).sum(-1))
    iu = np.triu_indices(X.shape[0], 1)
    s = sigma * d[iu]
    return float(np.sum(s ** -0.5 * np.exp(-s)))


def _pair_energy_loop(X, sigma):
    n = X.shape[0]
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            dx = X[i, 0] - X[j, 0]
            dy = X[i, 1] - X[j, 1]
            s = sigma * np.sqrt(dx * dx + dy * dy)
            total += np.exp(-s) / np.sqrt(s)
    return total


pair_energy_numba = _accel.njit(_pair_energy_loop)


def pair_gradient_numpy(X, sigma):
    """Gradient of pair_energy with respect to every position."""
    diff = X[:, None, :] - X[None, :, :]
    d = np.sqrt((diff ** 2).sum(-1))
    np.fill_diagonal(d, 1.0)
    s = sigma * d
    # d/dd of s^-1/2 e^-s = -sigma e^-s (s^-1/2 + s^-3/2 / 2)
    dphi = -sigma * np.exp(-s) * (s ** -0.5 + 0.5 * s ** -1.5)
    np.fill_diagonal(dphi, 0.0)
    return ((dphi / d)[:, :, None] * diff).sum(axis=1)


def _pair_gradient_loop(X, sigma):
    n = X.shape[0]
    g = np.zeros((n, 2))
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            dx = X[i, 0] - X[j, 0]
            dy = X[i, 1] - X[j, 1]
            d = np.sqrt(dx * dx + dy * dy)
            s = sigma * d
            dphi = -sigma * np.exp(-s) * (s ** -0.5 + 0.5 * s ** -1.5)
            g[i, 0] += dphi * dx / d
            g[i, 1] += dphi * dy / d
    return g


pair_gradient_numba = _accel.njit(_pair_gradient_loop)


if _accel.USE_NUMBA:
    rk4_radial = rk4_radial_numba
    reaction = reaction_numba
    inhibitor_source = inhibitor_source_numba
    local_maxima = local_maxima_numba
    pair_energy = pair_energy_numba
    pair_gradient = pair_gradient_numba
else:
    rk4_radial = rk4_radial_numpy
    reaction = reaction_numpy
    inhibitor_source = inhibitor_source_numpy
    local_maxima = local_maxima_numpy
    pair_energy = pair_energy_numpy
    pair_gradient = pair_gradient_numpy
