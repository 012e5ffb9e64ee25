"""Small-eigenvalue matrices for polygon clusters, their circulant spectra and verdicts."""
import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidK, StepError
from .geometry import build_cluster
from .reduced import (
    ModelParams,
    ReducedConstants,
    critical_radius,
    make_constants,
    potential_delta,
)

TOL = 1e-9
ORACLE_TOL = 1e-6


class Verdict(str, enum.Enum):
    STABLE = "Stable"
    MARGINAL = "Marginal"
    UNSTABLE = "Unstable"


# ------------------------------------------------------------------ circulants
@dataclass(frozen=True)
class CirculantSpec:
    first_row: tuple

    @property
    def k(self):
        return len(self.first_row)

    def matrix(self):
        b = np.asarray(self.first_row)
        return np.array([np.roll(b, n) for n in range(self.k)])


def fourier_vectors(k):
    """Columns X_l = (1, e^l, e^2l, ...)/sqrt(k) with e = exp(2 pi i / k)."""
    j = np.arange(k)
    return np.exp(2j * np.pi * np.outer(j, j) / k) / math.sqrt(k)


def circulant_eigs(spec: CirculantSpec, check=True):
    """Eigenvalues lambda_l = sum_j b_j e^{(j-1) l} and eigenvectors X_l."""
    k = spec.k
    b = np.asarray(spec.first_row, dtype=complex)
    X = fourier_vectors(k)
    lam = X.T @ b * math.sqrt(k)
    if check:
        B = spec.matrix()
        res = np.abs(B @ X - X * lam).max() if k else 0.0
        if res > 1e-12 * max(1.0, np.abs(b).max()):
            raise ArithmeticError(f"circulant eigen-residual {res:.2e}")
    return lam, X


def _check_k(k, lo=3):
    if int(k) != k or k < lo:
        raise InvalidK(f"need an integer k >= {lo}, got {k}")
    return int(k)


def a1_row(k):
    row = [0] * k
    row[0] = -2
    row[1] += 1
    row[-1] += 1
    return tuple(row)


def a2_row(k):
    row = [0] * k
    row[1] += 1
    row[-1] -= 1
    return tuple(row)


def build_A1(k):
    return CirculantSpec(a1_row(_check_k(k))).matrix()


def build_A2(k):
    return CirculantSpec(a2_row(_check_k(k))).matrix()


def build_M_leading(k):
    """Leading small-eigenvalue matrix, radial rows first, prefactor dropped."""
    k = _check_k(k)
    s, c = math.sin(math.pi / k), math.cos(math.pi / k)
    A1, A2, I = build_A1(k), build_A2(k), np.eye(k)
    return np.block([[s * s * (A1 + 4 * I), s * c * A2], [-s * c * A2, -c * c * A1]])


def build_M_second(k):
    k = _check_k(k)
    c2, s2 = math.cos(2 * math.pi / k), math.sin(2 * math.pi / k)
    A1, A2 = build_A1(k), build_A2(k)
    return np.block([[c2 * A1, -s2 * A2], [s2 * A2, c2 * A1]])


def leading_block(k, l):
    s2k = math.sin(2 * math.pi / k)
    s, c = math.sin(math.pi / k), math.cos(math.pi / k)
    sl, cl = math.sin(l * math.pi / k), math.cos(l * math.pi / k)
    off = s2k * math.sin(2 * l * math.pi / k)
    return np.array([[4 * s * s * cl * cl, 1j * off], [-1j * off, 4 * c * c * sl * sl]])


def second_block(k, l):
    c2, s2 = math.cos(2 * math.pi / k), math.sin(2 * math.pi / k)
    sl2 = math.sin(l * math.pi / k) ** 2
    off = 2 * s2 * math.sin(2 * l * math.pi / k)
    return np.array([[-4 * c2 * sl2, -1j * off], [1j * off, -4 * c2 * sl2]])


def kernel_vector(k, l):
    """Null vector of leading_block(k, l)."""
    a = math.pi / k
    return np.array([math.cos(a) * math.sin(l * a), 1j * math.sin(a) * math.cos(l * a)])


def dft_transform(M, k):
    """P^-1 M P with P = diag(F, F) built from the Fourier vectors."""
    F = fourier_vectors(k)
    P = np.block([[F, np.zeros_like(F)], [np.zeros_like(F), F]])
    return P.conj().T @ M @ P


def assemble_blocks(k, block):
    """Embed per-mode 2x2 blocks at (l, l), (l, k+l), (k+l, l), (k+l, k+l)."""
    out = np.zeros((2 * k, 2 * k), dtype=complex)
    for l in range(k):
        b = block(k, l)
        idx = [l, k + l]
        out[np.ix_(idx, idx)] = b
    return out


# --------------------------------------------------------------- mu spectrum
def _mu_denominator(k, l):
    a = math.pi / k
    return (math.cos(a) * math.sin(l * a)) ** 2 + (math.sin(a) * math.cos(l * a)) ** 2


def mu_closed_form(k, l):
    a = math.pi / k
    s, c = math.sin(a), math.cos(a)
    sl, cl = math.sin(l * a), math.cos(l * a)
    num = 4 * math.sin(2 * a) * math.sin(2 * l * a) * c * s * cl * sl
    return -4 * math.cos(2 * a) * sl * sl + num / _mu_denominator(k, l)


def mu_rayleigh(k, l):
    v = kernel_vector(k, l)
    return float(np.real(v.conj() @ second_block(k, l) @ v) / np.real(v.conj() @ v))


def mu_numerator(k, l):
    """mu_l written over the common denominator of the quotient."""
    return mu_closed_form(k, l) * _mu_denominator(k, l)


def mu_spectrum(k, check=True):
    """(mu_0, ..., mu_{k-1}) with mu_0 pinned to 0 as the rotation mode."""
    k = _check_k(k)
    mus = [0.0]
    for l in range(1, k):
        a = mu_closed_form(k, l)
        if check:
            b = mu_rayleigh(k, l)
            if abs(a - b) > 1e-12:
                raise ArithmeticError(f"mu_{l} closed form {a} vs quotient {b}")
        mus.append(a)
    return mus


# ------------------------------------------------------------------- reports
@dataclass
class StabilityReport:
    k: int
    with_centre: bool
    verdict: Verdict
    witness: Optional[int]
    mu_values: list = field(default_factory=list)
    kernel_modes: list = field(default_factory=list)
    warning: Optional[str] = None
    oracle_signs: Optional[list] = None
    eigenvalues: Optional[list] = None


def _verdict_from_mu(mus, tol=TOL):
    rest = list(enumerate(mus))[1:]
    neg = [l for l, m in rest if m < -tol]
    if neg:
        # mu_l = mu_{k-l}, so report the lowest unstable index
        return Verdict.UNSTABLE, neg[0]
    zero = [l for l, m in rest if abs(m) <= tol]
    if zero:
        return Verdict.MARGINAL, zero[0]
    return Verdict.STABLE, None


def default_params(D=1e-5, sigma=0.05, mu2=1.0):
    return ModelParams(epsilon=sigma * math.sqrt(D), D=D, mu_second=mu2)


def classify(k, params: Optional[ModelParams] = None, tol=TOL) -> StabilityReport:
    if int(k) != k or k < 2:
        raise InvalidK(f"need an integer k >= 2, got {k}")
    k = int(k)
    if k == 2:
        # the circulant stencil counts the single neighbour twice, so the two-spike
        # case is read off the reduced-potential Hessian instead
        params = params or default_params()
        orc = hessian_oracle(2, params, make_constants(params, 2))
        neg = [i for i, s in enumerate(orc.signs) if s == "-"]
        zeros = orc.signs.count("0")
        if neg:
            verdict, witness = Verdict.UNSTABLE, neg[0]
        elif zeros > 1:
            verdict, witness = Verdict.MARGINAL, orc.signs.index("0")
        else:
            verdict, witness = Verdict.STABLE, None
        return StabilityReport(2, False, verdict, witness, oracle_signs=orc.signs,
                               eigenvalues=list(orc.scaled))
    mus = mu_spectrum(k)
    verdict, witness = _verdict_from_mu(mus, tol)
    modes = [(l, kernel_vector(k, l)) for l in range(k)]
    warning = None
    if verdict is Verdict.MARGINAL:
        warning = f"mode l={witness} is zero at both computed orders; higher orders decide it"
    return StabilityReport(k, False, verdict, witness, mus, modes, warning)


# ---------------------------------------------------------------- with centre
def build_M_centre(k):
    """(2k+2)-square matrix; order is vertex radials, centre x, vertex tangentials, centre y."""
    if int(k) != k or k < 2:
        raise InvalidK(f"need an integer k >= 2, got {k}")
    k = int(k)
    th = 2 * np.pi * np.arange(k) / k
    n = k + 1
    M1 = np.eye(n)
    M1[n - 1, n - 1] = k / 2
    M1[:k, n - 1] = M1[n - 1, :k] = -np.cos(th)
    M2 = np.zeros((n, n))
    M2[:k, n - 1] = -np.sin(th)
    M4 = np.zeros((n, n))
    M4[n - 1, n - 1] = k / 2
    return np.block([[M1, M2], [M2.T, M4]])


def restricted_indices(k):
    """Components 1..k+1 and 2k+2 (0-based), the class the quadratic identity covers."""
    return list(range(k + 1)) + [2 * k + 1]


def centre_quadratic(k, a):
    """Sum of squares the restricted quadratic form reduces to."""
    a = np.asarray(a, dtype=float)
    th = 2 * np.pi * np.arange(k) / k
    alpha, beta = a[k], a[2 * k + 1]
    return float(np.sum((a[:k] - alpha * np.cos(th) - beta * np.sin(th)) ** 2))


def centre_tangential_block(k):
    """Second-order matrix on the vertex-tangential class: -cos^2(pi/k) A1."""
    return -math.cos(math.pi / k) ** 2 * build_A1(k)


def classify_centre(k, tol=TOL) -> StabilityReport:
    if int(k) != k or k < 2:
        raise InvalidK(f"need an integer k >= 2, got {k}")
    k = int(k)
    if k >= 6:
        return StabilityReport(
            k, True, Verdict.MARGINAL, None,
            warning="a centre spike with six or more vertices is not covered by the analysis",
        )
    M = build_M_centre(k)
    idx = restricted_indices(k)
    ev = np.linalg.eigvalsh(M[np.ix_(idx, idx)])
    if ev[0] < -tol:
        # the literal leading-order matrix already has a negative direction
        return StabilityReport(
            k, True, Verdict.UNSTABLE, int(np.argmin(ev)), eigenvalues=[float(e) for e in ev],
            warning="restricted leading-order matrix is indefinite",
        )
    # the restricted zero modes are the two translations, lifted by the centre spike;
    # the vertex-tangential class is governed by -cos^2(pi/k) A1 with the rotation as kernel
    evt = np.linalg.eigvalsh(centre_tangential_block(k))
    zeros_t = int(np.sum(np.abs(evt) <= tol))
    if evt[0] < -tol:
        return StabilityReport(k, True, Verdict.UNSTABLE, int(np.argmin(evt)),
                               eigenvalues=[float(e) for e in np.concatenate([ev, evt])])
    verdict = Verdict.STABLE if zeros_t == 1 else Verdict.MARGINAL
    return StabilityReport(k, True, verdict, None,
                           eigenvalues=[float(e) for e in np.concatenate([ev, evt])])


# ------------------------------------------------------------- Hessian oracle
@dataclass
class OracleResult:
    k: int
    with_centre: bool
    radius: float
    hessian: np.ndarray
    scaled: np.ndarray  # eigenvalues over max |eigenvalue|, ascending
    signs: list

    @property
    def n_negative(self):
        return self.signs.count("-")

    @property
    def n_zero(self):
        return self.signs.count("0")


def local_basis(k, with_centre):
    """Unit displacement per coordinate, in the matrix ordering used above."""
    th = 2 * np.pi * np.arange(k) / k
    m = k + int(with_centre)
    er = np.zeros((m, 2))
    et = np.zeros((m, 2))
    er[:k] = np.column_stack([np.cos(th), np.sin(th)])
    et[:k] = np.column_stack([-np.sin(th), np.cos(th)])
    if with_centre:
        er[k] = (1.0, 0.0)
        et[k] = (0.0, 1.0)
    basis = []
    for block in (er, et):
        for j in range(m):
            d = np.zeros((m, 2))
            d[j] = block[j]
            basis.append(d)
    return basis


def numerical_hessian(k, params, rc, radius, with_centre=False, rel_step=1e-4):
    cl = build_cluster(k, radius, 0.0, with_centre)
    X = cl.positions
    basis = local_basis(k, with_centre)
    n = len(basis)
    h = rel_step * radius
    H = np.empty((n, n))
    for a in range(n):
        for b in range(n):
            total = 0.0
            for sa, sb, sign in ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)):
                total += sign * potential_delta(X, h * (sa * basis[a] + sb * basis[b]), rc, params)
            H[a, b] = total / (4 * h * h)
    asym = np.abs(H - H.T).max()
    if asym > 1e-4 * np.abs(H).max():
        raise StepError(f"finite-difference Hessian asymmetry {asym:.2e}")
    return 0.5 * (H + H.T)


def hessian_oracle(k, params: ModelParams, rc: ReducedConstants, with_centre=False,
                   radius=None, tol=ORACLE_TOL) -> OracleResult:
    """Sign pattern of the reduced-potential Hessian at the exact breathing equilibrium."""
    if radius is None:
        radius = critical_radius(k, params, rc, with_centre)
    H = numerical_hessian(k, params, rc, radius, with_centre)
    ev = np.linalg.eigvalsh(H)
    scaled = ev / np.abs(ev).max()
    signs = ["-" if v < -tol else "+" if v > tol else "0" for v in scaled]
    return OracleResult(k, with_centre, float(radius), H, scaled, signs)


def shift_operator(k, with_centre=False):
    """Permutation moving every vertex coordinate to the next vertex."""
    m = k + int(with_centre)
    n = 2 * m
    S = np.zeros((n, n))
    for block in (0, m):
        for j in range(k):
            S[block + (j + 1) % k, block + j] = 1.0
        if with_centre:
            S[block + k, block + k] = 1.0
    return S
