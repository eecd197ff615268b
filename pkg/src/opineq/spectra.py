"""Radial angular-momentum-channel eigenproblems.

Two independent discrete realizations of |p| live here: a quasi-discrete
Hankel transform on Bessel-function zeros (momentum_channel) and a
position-space Lieb-Yau band assembly on the log grid (used by the
Chandrasekhar scan, where the trial support must span many decades).
They are cross-checked against each other in the tests.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg as sla
from scipy.special import jn_zeros, jv

from . import kernels
from .anticomm import _band_moments
from .errors import (DomainError, GridRejectionError, OpineqError,
                     RefinementNeededError)
from .quadrature import integrate_adaptive


@dataclass(frozen=True)
class GridSpec:
    """Logarithmic radial grid: n log-spaced nodes on [r_min, r_max]."""

    r_min: float
    r_max: float
    n: int

    def __post_init__(self):
        if not (0 < self.r_min < self.r_max):
            raise DomainError("need 0 < r_min < r_max")
        if self.n < 16:
            raise DomainError("need at least 16 nodes")

    def nodes(self):
        return np.geomspace(self.r_min, self.r_max, self.n)

    def log_step(self):
        return math.log(self.r_max / self.r_min) / (self.n - 1)

    def scaled(self, factor: float) -> "GridSpec":
        return GridSpec(self.r_min * factor, self.r_max * factor, self.n)

    def refined(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.r_min, self.r_max, self.n * factor)


@dataclass(frozen=True)
class ChannelOperator:
    """Dense symmetric realization of a radial operator in one channel.

    The matrix acts on weighted samples v_k = f(r_k) sqrt(w_k), where the
    weights make the Euclidean inner product equal the per-channel
    radial L^2 inner product (the 2 pi angular factor divided out).
    """

    m: int
    grid: GridSpec
    r: np.ndarray = field(repr=False)
    w: np.ndarray = field(repr=False)
    matrix: np.ndarray = field(repr=False)
    kind: str = "qdht"

    def __post_init__(self):
        M = self.matrix
        asym = np.max(np.abs(M - M.T)) / max(np.max(np.abs(M)), 1e-300)
        if asym > 1e-12:
            raise GridRejectionError("assembled matrix asymmetric (%.2e)" % asym)

    def rayleigh(self, samples):
        v = np.asarray(samples, float) * np.sqrt(self.w)
        return float(v @ self.matrix @ v) / float(v @ v)


@dataclass(frozen=True)
class SpectrumReport:
    """Channel-resolved eigenvalues with assembled levels and degeneracies."""

    channel_eigenvalues: dict
    levels: tuple          # (level index n, energy, degeneracy)
    refinement_trace: tuple
    grid: GridSpec

    def __post_init__(self):
        for m, ev in self.channel_eigenvalues.items():
            if np.any(np.diff(ev) < 0):
                raise DomainError("channel %d eigenvalues not ascending" % m)
        for _, _, g in self.levels:
            if not (isinstance(g, int) and g > 0):
                raise DomainError("degeneracies must be positive integers")


# ---------------------------------------------------------------------------
# quasi-discrete Hankel transform realization of |p| (2D channel m)

COND_THRESHOLD = 0.05


def _qdht(nu: int, R: float, n: int):
    j = jn_zeros(nu, n + 1)
    J = j[n]
    r = j[:n] * (R / J)
    k = j[:n] / R
    scale = np.abs(jv(nu + 1, j[:n]))
    C = (2.0 / J) * jv(nu, np.outer(j[:n], j[:n]) / J) / np.outer(scale, scale)
    w = 2.0 / ((J / R) ** 2 * scale ** 2)
    return r, k, w, C


def momentum_channel(m: int, grid: GridSpec,
                     cond_threshold: float = COND_THRESHOLD) -> ChannelOperator:
    """|p| on the 2D channel e^{i m theta}: Hankel transform of order |m|
    on Bessel zeros, multiply by |k|, transform back; dense symmetric PSD.

    Nodes are the scaled Bessel zeros (grid supplies r_max and n).
    """
    if abs(m) > 64:
        raise DomainError("|m| must be <= 64")
    r, k, w, C = _qdht(abs(m), grid.r_max, grid.n)
    resid = np.max(np.abs(C @ C - np.eye(grid.n)))
    if resid > cond_threshold:
        raise GridRejectionError(
            "Hankel transform involution residual %.3g exceeds %.3g"
            % (resid, cond_threshold))
    P = C @ (k[:, None] * C)
    P = 0.5 * (P + P.T)
    return ChannelOperator(m=m, grid=grid, r=r, w=w, matrix=P, kind="qdht")


# ---------------------------------------------------------------------------
# Lieb-Yau band assembly of |p| on the log grid (2D channel m)

def _angular_diff_band_moments(m: int, h: float, n: int, tol: float = 1e-10):
    """phi0[k] = int over band k of (A_0 - A_m)(cosh x) dx, the positive
    channel-coupling kernel; integrable log singularity in band 0."""
    def Dm(x):
        x = np.atleast_1d(np.asarray(x, float))
        um1 = 2.0 * np.sinh(x / 2.0) ** 2
        v, _, _ = kernels.polar_batch(1.5, 0.0, m, um1, np.zeros_like(um1),
                                      tol, True)
        return 2.0 * v

    phi0 = np.empty(n)
    for kb in range(min(3, n)):
        a = max(0.0, kb * h - h / 2.0)
        b = kb * h + h / 2.0
        phi0[kb] = integrate_adaptive(lambda x: float(Dm(x)[0]), a, b, 1e-9).value
    if n > 3:
        xi, wi = np.polynomial.legendre.leggauss(12)
        ks = np.arange(3, n)
        x = (ks[:, None] * h + (h / 2.0) * xi[None, :]).ravel()
        vals = Dm(x).reshape(len(ks), xi.size)
        phi0[3:] = (h / 2.0) * vals @ wi
    return phi0


@lru_cache(maxsize=64)
def _momentum_log_grid(m: int, n: int, L: float):
    """|p| (2D channel m) on the scaled log grid [1, e^L] with n nodes.

    Assembled from the position-space double integral with per-offset
    exact band weights; PSD by construction for m = 0.  Returns
    (matrix, nodes).  Physical grids [r_min, r_max] rescale by 1/r_min.
    """
    h = L / (n - 1)
    s = np.arange(n) * h
    a = np.exp(-s)
    ehalf = np.exp(0.5 * s)
    phi2 = _band_moments(2.0, h, n, 0.0)
    c0 = 2.0 ** -2.5 / (2.0 * math.pi)
    P = np.zeros((n, n))
    ks = np.arange(1, n)
    coef = 2.0 * c0 * phi2[1:] / (ks * h) ** 2
    for k in range(1, n):
        g = coef[k - 1] * ehalf[:n - k] * ehalf[k:]
        gaa = g * a[:n - k] ** 2
        gbb = g * a[k:] ** 2
        gab = g * a[:n - k] * a[k:]
        idx = np.arange(n - k)
        P[idx, idx] += gaa
        P[idx + k, idx + k] += gbb
        P[idx, idx + k] -= gab
        P[idx + k, idx] -= gab
    # diagonal band: quadratic-vanishing limit through central differences
    q = c0 * phi2[0] * np.exp(s[1:-1]) / (2.0 * h * h)
    for i in range(1, n - 1):
        cplus, cminus = a[i + 1], a[i - 1]
        P[i + 1, i + 1] += q[i - 1] * cplus * cplus
        P[i - 1, i - 1] += q[i - 1] * cminus * cminus
        P[i + 1, i - 1] -= q[i - 1] * cplus * cminus
        P[i - 1, i + 1] -= q[i - 1] * cplus * cminus
    if m != 0:
        phi0 = _angular_diff_band_moments(abs(m), h, n)
        d0 = 2.0 * c0 * phi0
        for k in range(1, n):
            g = d0[k] * ehalf[:n - k] * ehalf[k:] * a[:n - k] * a[k:]
            idx = np.arange(n - k)
            P[idx, idx + k] += g
            P[idx + k, idx] += g
        P[np.arange(n), np.arange(n)] += d0[0] * np.exp(s) * a * a
    return P, np.exp(s)


def momentum_channel_log(m: int, grid: GridSpec) -> ChannelOperator:
    """Log-grid Lieb-Yau realization of |p| in 2D channel m."""
    L = math.log(grid.r_max / grid.r_min)
    P, nodes = _momentum_log_grid(abs(m), grid.n, L)
    r = nodes * grid.r_min
    w = grid.log_step() * r * r  # v_k = f(r_k) r_k sqrt(h)
    return ChannelOperator(m=m, grid=grid, r=r, w=w,
                           matrix=P / grid.r_min, kind="lieb-yau-log")


def chandrasekhar_lowest(nu: float, m: int, grid: GridSpec) -> float:
    """Lowest eigenvalue of the channel matrix of |p| - nu/|x| in 2D.

    By degree -1 homogeneity the matrix is assembled on the rescaled
    grid [1, r_max/r_min] and the eigenvalue scaled back, which keeps
    small eigenvalues resolvable next to the 1/r_min Coulomb scale.
    """
    if nu < 0:
        raise DomainError("coupling nu must be >= 0")
    L = math.log(grid.r_max / grid.r_min)
    P, nodes = _momentum_log_grid(abs(m), grid.n, L)
    H = P - nu * np.diag(1.0 / nodes)
    e0 = float(sla.eigvalsh(H, subset_by_index=[0, 0])[0])
    return e0 / grid.r_min


# ---------------------------------------------------------------------------
# critical coupling, method 1: refinement-divergence bisection

@dataclass(frozen=True)
class CriticalCouplingResult:
    nu_c: float
    uncertainty: float
    method: str
    trace: tuple = field(repr=False, default=())


DEFAULT_SCAN_SCHEDULE = (
    GridSpec(math.exp(-44.0), 1.0, 551),
    GridSpec(math.exp(-60.0), 1.0, 751),
    GridSpec(math.exp(-76.0), 1.0, 951),
)


def classify_coupling(nu: float, grid_schedule=DEFAULT_SCAN_SCHEDULE,
                      noise_floor: float = 1e-14):
    """'divergent' when the lowest eigenvalue grows by more than 2x across
    each refinement (degree -1 homogeneity makes true divergence geometric
    in 1/r_min); 'stable' otherwise."""
    evs = [chandrasekhar_lowest(nu, 0, g) for g in grid_schedule]
    # negative beyond discretization noise, measured on the grid's own scale
    meaningful = [e < -noise_floor / g.r_min
                  for e, g in zip(evs, grid_schedule)]
    ratios = []
    for e1, e2 in zip(evs, evs[1:]):
        ratios.append(e2 / e1 if (e1 < 0 and e2 < 0) else 0.0)
    divergent = all(meaningful) and all(r > 2.0 for r in ratios)
    return ("divergent" if divergent else "stable"), tuple(evs)


def critical_coupling_bisect(grid_schedule=None, lo: float = 0.05,
                             hi: float = 0.6, nu_tol: float = 3e-4) -> CriticalCouplingResult:
    """Bisect the coupling where the channel-0 scan turns refinement-divergent."""
    schedule = tuple(grid_schedule) if grid_schedule else DEFAULT_SCAN_SCHEDULE
    if len(schedule) < 3:
        raise DomainError("grid schedule needs >= 3 refinements")
    trace = []
    c_lo, ev = classify_coupling(lo, schedule)
    trace.append((lo, c_lo, ev))
    c_hi, ev = classify_coupling(hi, schedule)
    trace.append((hi, c_hi, ev))
    if c_lo != "stable" or c_hi != "divergent":
        raise OpineqError(
            "no stable-to-divergent transition inside [%g, %g]; trace: %r"
            % (lo, hi, trace))
    while hi - lo > 2.0 * nu_tol:
        mid = 0.5 * (lo + hi)
        c, ev = classify_coupling(mid, schedule)
        trace.append((mid, c, ev))
        if c == "stable":
            lo = mid
        else:
            hi = mid
    return CriticalCouplingResult(nu_c=0.5 * (lo + hi), uncertainty=0.5 * (hi - lo),
                                  method="bisect", trace=tuple(trace))


# ---------------------------------------------------------------------------
# critical coupling, method 2: Mellin multiplier of the sandwiched kernel

def coulomb_channel_kernel(m: int, t, tol: float = 1e-11):
    """k_m(t) = (2 pi)^-1 int_0^{2pi} cos(m theta) (1 + t^2 - 2 t cos theta)^{-1/2} dtheta."""
    t = np.atleast_1d(np.asarray(t, float))
    if np.any(t <= 0):
        raise DomainError("t must be positive")
    um1 = (1.0 - t) ** 2 / (2.0 * t)
    v, _, _ = kernels.polar_batch(0.5, 0.0, abs(m), um1, np.zeros_like(t), tol)
    return v / (np.pi * np.sqrt(2.0 * t))


def mellin_multiplier(m: int, s: float = 0.0, tol: float = 1e-9) -> float:
    """M_m(s): Mellin symbol of the channel-projected |x|^-1/2 |p|^-1 |x|^-1/2.

    The sandwiched kernel is homogeneous of degree -2, hence Mellin-
    diagonal per channel; M_m(s) = int_0^inf k_m(t) t^{-1/2+is} dt, folded
    onto (0,1) by the k_m(1/t) = t k_m(t) symmetry (so it is real and
    even in s), with t = y^2 flattening the endpoint.
    """
    def f(y):
        km = float(coulomb_channel_kernel(m, y * y)[0])
        return 4.0 * km * math.cos(2.0 * s * math.log(y))

    return integrate_adaptive(f, 0.0, 1.0, tol).value


def critical_coupling_mellin(m_max: int = 2) -> CriticalCouplingResult:
    """nu_c = 1 / max_m sup_s M_m(s); the sup sits at m = 0, s = 0 (checked)."""
    if m_max < 0:
        raise DomainError("m_max must be >= 0")
    mult = [mellin_multiplier(m, 0.0) for m in range(m_max + 1)]
    if any(b >= a for a, b in zip(mult, mult[1:])):
        raise OpineqError("channel multipliers not decreasing: %r" % mult)
    for s in (0.25, 0.5):
        if mellin_multiplier(0, s) >= mult[0]:
            raise OpineqError("M_0 not maximized at s = 0")
    return CriticalCouplingResult(nu_c=1.0 / mult[0], uncertainty=1e-8,
                                  method="mellin", trace=tuple(mult))


# ---------------------------------------------------------------------------
# 2D hydrogen on the log grid

DEFAULT_HYDROGEN_GRID = GridSpec(1e-3, 120.0, 900)


def _hydrogen_channel(Z: float, m: int, grid: GridSpec, count: int):
    """Lowest eigenvalues of -Laplacian/2 - Z/r in channel m (log-grid FD).

    The quadratic form in s = ln r with phi = f(e^s) is
    (1/2) int (phi'^2 + m^2 phi^2) ds + int V(e^s) e^{2s} phi^2 ds over
    int phi^2 e^{2s} ds; the diagonal weight is folded in symmetrically.
    """
    n = grid.n
    h = grid.log_step()
    s = np.log(grid.nodes())
    # natural (free) ends: the log-coordinate eigenfunction tends to a
    # constant at the inner boundary, so Dirichlet ghosts would poison it
    main = np.full(n, 1.0 / (h * h) + 0.5 * m * m) - Z * np.exp(s)
    main[0] -= 0.5 / (h * h)
    main[-1] -= 0.5 / (h * h)
    if m == 0:
        # Robin term encoding the s-wave Coulomb cusp phi'(0)/phi(0) = -2Z;
        # without it the truncation error is O(r_min) instead of O(r_min^2)
        main[0] -= Z * grid.r_min / h
    off = np.full(n - 1, -0.5 / (h * h))
    d = np.exp(-s)  # B^{-1/2} for B = diag(e^{2s})
    A = np.diag(main * d * d)
    A[np.arange(n - 1), np.arange(1, n)] = off * d[:-1] * d[1:]
    A[np.arange(1, n), np.arange(n - 1)] = off * d[:-1] * d[1:]
    return sla.eigvalsh(A, subset_by_index=[0, count - 1])


def hydrogen2d(Z: float, m_max: int, grid: GridSpec = DEFAULT_HYDROGEN_GRID,
               n_levels: int = 3, check: bool = True) -> SpectrumReport:
    """Non-relativistic 2D hydrogen: channels m = -m_max..m_max of
    -Laplacian/2 - Z/|x| (hbar = e = 1), assembled into levels with
    degeneracies.

    Level n lives in channels |m| <= n with multiplicity 2n + 1.
    Raises RefinementNeededError when a half-resolution solve moves any
    requested level by more than 0.5%.
    """
    if Z <= 0:
        raise DomainError("Z must be positive")
    scaled = GridSpec(grid.r_min / Z, grid.r_max / Z, grid.n) if Z != 1 else grid
    chans = {}
    for m in range(0, m_max + 1):
        count = max(1, n_levels - m)
        chans[m] = _hydrogen_channel(Z, m, scaled, count)
    trace = [(scaled.n, tuple(float(x) for x in chans[0]))]
    if check:
        half = GridSpec(scaled.r_min, scaled.r_max, max(16, scaled.n // 2))
        ref = _hydrogen_channel(Z, 0, half, max(1, n_levels))
        trace.insert(0, (half.n, tuple(float(x) for x in ref)))
        shift = np.abs(ref - chans[0]) / np.abs(chans[0])
        if np.any(shift > 5e-3):
            raise RefinementNeededError(
                "grid too coarse: half-resolution levels move by up to %.2e"
                % float(np.max(shift)), trace=trace)
    levels = []
    for n in range(n_levels):
        e0 = float(chans[0][n])
        degeneracy = 1
        for m in range(1, min(n, m_max) + 1):
            k = n - m
            if k < len(chans[m]) and abs(chans[m][k] - e0) < 2e-2 * abs(e0):
                degeneracy += 2
        levels.append((n, e0, degeneracy))
    full = {m: chans[abs(m)] for m in range(-m_max, m_max + 1)}
    return SpectrumReport(channel_eigenvalues=full, levels=tuple(levels),
                          refinement_trace=tuple(trace), grid=scaled)


# ---------------------------------------------------------------------------
# anticommutator spectral estimate

def _sine_momentum_3d(n: int, R: float):
    """|p| restricted to l = 0 in 3D: u = r f maps the channel to the
    Dirichlet half-line, diagonal in the sine transform."""
    k = np.arange(1, n + 1)
    r = k * (R / (n + 1))
    S = np.sqrt(2.0 / (n + 1)) * np.sin(np.pi * np.outer(k, k) / (n + 1))
    kl = np.pi * k / R
    P = S @ (kl[:, None] * S)
    return 0.5 * (P + P.T), r


def lambda_min_anticomm(d: int, grid: GridSpec = None, refine_steps: int = 3):
    """Rayleigh-quotient estimate of inf spec of |x||p| + |p||x| (a pure
    number by scale invariance), with a grid-refinement trace.

    The anticommutator matrix is (x_i + x_j) P_ij: the X^{1/2} P X^{1/2}
    sandwich completed with its double-commutator term, so it is the
    exact matrix anticommutator X P + P X.
    """
    if d not in (2, 3):
        raise DomainError("d must be 2 or 3")
    if grid is None:
        grid = GridSpec(1e-3, 1.0, 1024 if d == 2 else 1200)
    trace = []
    value = None
    for step in range(refine_steps, 0, -1):
        n = max(32, grid.n // 2 ** (step - 1))
        if d == 2:
            op = momentum_channel(0, GridSpec(grid.r_min, grid.r_max, n))
            P, r = op.matrix, op.r
        else:
            P, r = _sine_momentum_3d(n, grid.r_max)
        H = (r[:, None] + r[None, :]) * P
        lam = float(sla.eigvalsh(H, subset_by_index=[0, 0])[0])
        trace.append((n, lam))
        value = lam
    return value, tuple(trace)
