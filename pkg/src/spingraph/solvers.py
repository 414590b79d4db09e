"""Ground states and spectra.

Dense diagonalization is the oracle at small dimension; a Lanczos
iteration with full reorthogonalization handles everything matvec-sized.
The complete-graph XXZ spectrum is available in closed form, and the
two-collective-spin reduction comes with a classical minimizer that
locates the XY/AFM transition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize, minimize_scalar
from scipy.special import logsumexp

from .hamiltonian import (CouplingParams, DenseOperator, SpinOperator,
                          attainable_sectors, build_collective_pair)
from .seeding import as_seed

DENSE_AUTO_DIM = 1024  # below this, sector solves go through eigh directly


class SolverError(RuntimeError):
    """Capacity overflow or iteration failure."""


@dataclass(frozen=True)
class StateVector:
    """Normalized amplitudes over a full or sector basis."""

    amplitudes: np.ndarray
    L: int
    s: float
    sector: object | None = None  # SectorBasis when restricted

    def to_full(self) -> np.ndarray:
        if self.sector is None:
            return self.amplitudes
        base = round(2 * self.s) + 1
        full = np.zeros(base ** self.L, dtype=self.amplitudes.dtype)
        full[self.sector.states] = self.amplitudes
        return full


@dataclass
class GroundStateResult:
    energy: float
    state: StateVector
    sector: int | None
    solver: str  # "dense" | "lanczos"
    residual: float
    degenerate: bool = False


# ---------------------------------------------------------------------------
# dense path


def dense_spectrum(op, vectors: bool = False, cap: int = 1 << 14):
    """All eigenvalues ascending (and eigenvectors on request)."""
    H = op.to_dense(cap=cap) if hasattr(op, "to_dense") else np.asarray(op)
    if H.shape[0] > cap:
        raise SolverError(f"dense capacity exceeded: {H.shape[0]} > {cap}")
    if vectors:
        vals, vecs = np.linalg.eigh(H)
        return vals, vecs
    return np.linalg.eigvalsh(H)


# ---------------------------------------------------------------------------
# Lanczos with full reorthogonalization


def _lanczos_tridiag(matvec, dim, v0, tol, max_iter, which):
    """Lanczos with full reorthogonalization.

    which: "min" tracks the lowest Ritz value, "abs" tracks whichever end
    of the spectrum has the larger magnitude.  Iterates until the Lanczos
    residual bound |beta_k U[last]| of every tracked Ritz pair drops below
    tol/2, then verifies the exact residual with one matvec.

    Returns (value, vector, exact_residual, converged).
    """
    norm0 = np.linalg.norm(v0)
    if norm0 == 0.0:
        raise SolverError("zero start vector")
    max_iter = max(1, min(max_iter, dim))
    capacity = min(max_iter, 128)
    V = np.empty((capacity, dim), dtype=np.asarray(v0).dtype)
    V[0] = v0 / norm0
    alphas: list[float] = []
    betas: list[float] = []
    w = matvec(V[0])
    if np.linalg.norm(w) == 0.0:
        return 0.0, V[0].copy(), 0.0, True  # zero operator
    if np.iscomplexobj(w) and not np.iscomplexobj(V):
        V = V.astype(complex)

    def ritz(k):
        return sla.eigh_tridiagonal(np.array(alphas[:k]),
                                    np.array(betas[:k - 1]))

    def finish(k):
        theta, U = ritz(k)
        if which == "min":
            t = 0
        else:
            t = 0 if abs(theta[0]) >= abs(theta[-1]) else len(theta) - 1
        value = float(theta[t])
        vec = V[:k].T @ U[:, t]
        vec = vec / np.linalg.norm(vec)
        res = float(np.linalg.norm(matvec(vec) - value * vec))
        return value, vec, res

    for k in range(1, max_iter + 1):
        alpha = float(np.real(np.vdot(V[k - 1], w)))
        alphas.append(alpha)
        w = w - alpha * V[k - 1]
        if k > 1:
            w = w - betas[k - 2] * V[k - 2]
        for _ in range(2):  # two projection passes keep V orthonormal
            coeff = V[:k].conj() @ w
            w = w - V[:k].T @ coeff
        beta = float(np.linalg.norm(w))
        theta, U = ritz(k)
        targets = [0] if which == "min" else [0, len(theta) - 1]
        bound_ok = all(abs(beta * U[-1, t]) <= 0.5 * tol for t in targets)
        if bound_ok or beta <= 1e-14 or k == max_iter or k == dim:
            value, vec, res = finish(k)
            if res <= tol or beta <= 1e-14:
                return value, vec, res, True
            if k == max_iter or k == dim:
                return value, vec, res, False
            # bound was optimistic: keep iterating
        if k < max_iter and k < dim:
            betas.append(beta)
            if k == capacity:  # grow the stored-basis buffer
                capacity = min(max_iter, capacity * 2)
                grown = np.empty((capacity, dim), dtype=V.dtype)
                grown[:k] = V[:k]
                V = grown
            V[k] = w / beta
            w = matvec(V[k])
    value, vec, res = finish(len(alphas))
    return value, vec, res, res <= tol


def _solve_lowest(op, tol, max_iter, rng, method="auto"):
    """Lowest eigenpair of one operator block (dense below the auto cap)."""
    dim = op.dim
    if method == "dense" or (method == "auto" and dim <= DENSE_AUTO_DIM):
        vals, vecs = dense_spectrum(op, vectors=True)
        vec = vecs[:, 0]
        res = float(np.linalg.norm(op.matvec(vec) - vals[0] * vec))
        return float(vals[0]), vec, res, "dense"
    v0 = rng.standard_normal(dim)
    value, vec, res, ok = _lanczos_tridiag(op.matvec, dim, v0, tol,
                                           max_iter, "min")
    if not ok:
        raise SolverError(
            f"Lanczos failed to converge (best residual {res:.3e})")
    return value, vec, res, "lanczos"


def lanczos_ground(op: SpinOperator | DenseOperator, sector: int | None = None,
                   tol: float = 1e-10, max_iter: int = 600,
                   seed=0, method: str = "auto") -> GroundStateResult:
    """Lowest eigenpair.

    For an operator that conserves total Sz and no explicit ``sector``,
    the ground state is minimized over all attainable M sectors (the
    winning M is reported; +/-M symmetric ties and near-ties are
    flagged).  Otherwise the operator is solved as given.  ``method``
    forces the dense or Lanczos backend ("auto" switches on dimension).
    """
    rng = as_seed(seed).generator()
    is_spin_op = isinstance(op, SpinOperator)
    if sector is not None:
        if not is_spin_op:
            raise SolverError("sector solve requires a SpinOperator")
        block = op.restrict(sector) if op.sector is None else op
        value, vec, res, how = _solve_lowest(block, tol, max_iter, rng,
                                             method)
        return GroundStateResult(
            value, StateVector(vec, block.L, block.s, block.sector),
            sector, how, res)
    if is_spin_op and op.sector is None and op.conserves_sz:
        return _sector_minimized_ground(op, tol, max_iter, rng, method)
    value, vec, res, how = _solve_lowest(op, tol, max_iter, rng, method)
    L = getattr(op, "L", 0)
    s = getattr(op, "s", 0.5)
    state = StateVector(vec, L, s) if is_spin_op else \
        StateVector(vec, L, s, None)
    return GroundStateResult(value, state, None, how, res)


def _sector_minimized_ground(op: SpinOperator, tol, max_iter, rng,
                             method="auto"):
    """Minimize the ground energy over total-Sz sectors.

    The +/-M spectra coincide when there is no longitudinal field, so only
    M >= 0 is solved in that case; a winning M > 0 is then flagged as
    degenerate.  Exact and near (1e-10) cross-sector ties break toward
    smaller |M|.
    """
    sectors = attainable_sectors(op.L, op.s)
    pm_symmetric = op.field[2] == 0.0
    if pm_symmetric:
        sectors = [M for M in sectors if M >= 0]
    sectors = sorted(sectors, key=lambda M: (abs(M), M))
    best = None
    energies = {}
    for M in sectors:
        block = op.restrict(M)
        value, vec, res, how = _solve_lowest(block, tol, max_iter, rng,
                                             method)
        energies[M] = value
        if best is None or value < best[0] - 1e-14:
            best = (value, vec, res, how, M, block)
    value, vec, res, how, M, block = best
    # +/-M partner states are exactly degenerate; cross-sector near-ties
    # (first-order coexistence) are flagged too
    degenerate = pm_symmetric and M != 0
    for M2, v2 in energies.items():
        if M2 != M and abs(v2 - value) <= 1e-10 * max(1.0, abs(value)):
            degenerate = True
    return GroundStateResult(
        value, StateVector(vec, op.L, op.s, block.sector), M, how, res,
        degenerate)


def extreme_abs_eigenvalue(op, tol: float = 1e-8, max_iter: int = 600,
                           seed=0) -> float:
    """Eigenvalue of largest magnitude, sign preserved."""
    rng = as_seed(seed).generator()
    dim = op.dim
    if dim <= DENSE_AUTO_DIM:
        vals = dense_spectrum(op)
        return float(vals[int(np.argmax(np.abs(vals)))])
    v0 = rng.standard_normal(dim)
    value, _, res, ok = _lanczos_tridiag(op.matvec, dim, v0, tol,
                                         max_iter, "abs")
    if not ok:
        raise SolverError(
            f"Lanczos failed to converge (best residual {res:.3e})")
    return value


# ---------------------------------------------------------------------------
# complete-graph XXZ spectrum


@dataclass(frozen=True)
class SpectrumEntry:
    S: int          # collective spin quantum number
    M: int          # Pauli-units magnetization, in {-2S, ..., 2S} step 2
    energy: float
    degeneracy: int  # exact count of this (S, M) level in the 2^L space


def spin_multiplicity(L: int, S: int) -> int:
    """Number of spin-S multiplets in the L-fold product of spin-1/2s:
    C(L, L/2 - S) - C(L, L/2 - S - 1)."""
    k = L // 2 - S
    if k < 0:
        return 0
    return math.comb(L, k) - (math.comb(L, k - 1) if k >= 1 else 0)


def complete_xxz_energy(L: int, J: float, delta: float, S: int, M: int) -> float:
    """Closed-form level energy of the complete-graph XXZ (Pauli units)."""
    return (-J / (L - 1) * (4 * S * (S + 1) - M * M)
            + 2.0 * J * L / (L - 1)
            + delta / (L - 1) * (M * M - L))


def complete_xxz_spectrum(L: int, J: float = 1.0,
                          delta: float = 0.0) -> list[SpectrumEntry]:
    """All (S, M) levels of the complete-graph XXZ with exact degeneracies.

    Degeneracy is the standard SU(2) multiplet count; the sum over all
    entries is exactly 2^L.
    """
    if L % 2 != 0:
        raise SolverError("complete-graph XXZ spectrum requires even L")
    entries = []
    for S in range(0, L // 2 + 1):
        mult = spin_multiplicity(L, S)
        for M in range(-2 * S, 2 * S + 1, 2):
            entries.append(SpectrumEntry(
                S, M, complete_xxz_energy(L, J, delta, S, M), mult))
    return entries


def spectrum_multiset(entries: list[SpectrumEntry]) -> np.ndarray:
    """Eigenvalues repeated by degeneracy, ascending."""
    out = np.concatenate([np.full(e.degeneracy, e.energy) for e in entries])
    out.sort()
    return out


@dataclass(frozen=True)
class SpectralDensity:
    bin_edges: np.ndarray
    masses: np.ndarray
    L: int
    delta: float


def spectral_density(L: int, J: float = 1.0, delta: float = 0.0,
                     n_bins: int = 64) -> SpectralDensity:
    """Degeneracy-weighted histogram of level energy density over (S, M)."""
    if L % 2 != 0:
        raise SolverError("spectral density requires even L")
    if L > 64:
        raise SolverError("spectral density enumeration capped at L = 64")
    entries = complete_xxz_spectrum(L, J, delta)
    dens = np.array([e.energy / L for e in entries])
    total = 1 << L
    weights = np.array([e.degeneracy / total for e in entries])
    lo, hi = float(dens.min()), float(dens.max())
    if hi == lo:
        hi = lo + 1.0
    edges = np.linspace(lo, hi, n_bins + 1)
    masses, _ = np.histogram(dens, bins=edges, weights=weights)
    return SpectralDensity(edges, masses, L, delta)


# ---------------------------------------------------------------------------
# free energy


def free_energy_density(eigenvalues, L: int, beta: float) -> float:
    """-(1/(L beta)) ln sum_i exp(-beta lambda_i), overflow-safe.

    beta must be positive: the beta = 0 boundary value diverges with the
    -(ln dim)/(L beta) term and is excluded.
    """
    if beta <= 0.0:
        raise SolverError("free energy density requires beta > 0")
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.size == 0:
        raise SolverError("empty spectrum")
    return float(-logsumexp(-beta * lam) / (L * beta))


# ---------------------------------------------------------------------------
# semiclassical two-spin reduction


@dataclass(frozen=True)
class ClassicalPairConfig:
    n_a: np.ndarray       # unit vector of collective spin A
    n_b: np.ndarray
    weight_a: float       # per-site collective length 2 s lam (sigma units)
    weight_b: float
    energy_density: float
    phase: str            # "xy" | "afm"
    degenerate: bool = False


def _pair_energy_terms(lam, p1, p2, J, delta, s):
    """Coefficients of the classical per-site energy in sigma units."""
    w_a, w_b = 2 * s * lam, 2 * s * (1 - lam)
    c = p1 * (lam * lam + (1 - lam) ** 2) + 2 * p2 * lam * (1 - lam)
    j_ax = np.array([-J, -J, delta])
    return w_a, w_b, c, j_ax


def _pair_energy(theta_a, theta_b, lam, p1, p2, J, delta, s):
    """Classical energy density with both vectors in the xz plane."""
    w_a, w_b, c, j_ax = _pair_energy_terms(lam, p1, p2, J, delta, s)
    sa, ca = np.sin(theta_a), np.cos(theta_a)
    sb, cb = np.sin(theta_b), np.cos(theta_b)
    e = j_ax[0] * (p1 * (w_a * sa) ** 2 + p1 * (w_b * sb) ** 2
                   + 2 * p2 * (w_a * sa) * (w_b * sb)) \
        + j_ax[2] * (p1 * (w_a * ca) ** 2 + p1 * (w_b * cb) ** 2
                     + 2 * p2 * (w_a * ca) * (w_b * cb))
    return e / c


def semiclassical_pair_minimize(lam: float, p1: float, p2: float,
                                J: float = 1.0, delta: float = 0.0,
                                s: float = 0.5) -> ClassicalPairConfig:
    """Global classical minimizer of the two-collective-spin energy.

    The XXZ couplings are axially symmetric, so both vectors can be taken
    in the xz plane; a 64x64 angle grid seeds local descents.  The refined
    minimum always lands on one of the symmetric configurations (both
    spins in-plane aligned, or anti-aligned along z), which are then
    compared exactly so the phase flip is resolved to float precision.
    Ties at the transition, and the free relative angle at p2 = 0, are
    flagged degenerate.
    """
    def f(x):
        return float(_pair_energy(np.array(x[0]), np.array(x[1]),
                                  lam, p1, p2, J, delta, s))

    grid = np.linspace(0.0, 2.0 * np.pi, 64, endpoint=False)
    ta, tb = np.meshgrid(grid, grid, indexing="ij")
    e = _pair_energy(ta, tb, lam, p1, p2, J, delta, s)
    flat = np.argsort(e, axis=None)[:3]
    best_x, best_e = None, np.inf
    for i in flat:
        r = minimize(f, (float(ta.flat[i]), float(tb.flat[i])),
                     method="Nelder-Mead",
                     options={"xatol": 1e-10, "fatol": 1e-13,
                              "maxiter": 600})
        if r.fun < best_e:
            best_e, best_x = float(r.fun), r.x

    e_xy = f((np.pi / 2, np.pi / 2))
    e_afm = min(f((0.0, np.pi)), f((np.pi, 0.0)))
    tie_tol = 1e-11 * max(1.0, abs(e_xy), abs(e_afm))
    degenerate = abs(e_xy - e_afm) <= tie_tol or p2 == 0.0
    w_a, w_b, _, _ = _pair_energy_terms(lam, p1, p2, J, delta, s)
    if min(e_xy, e_afm) <= best_e + tie_tol:
        # descent confirms a symmetric global minimum: report it exactly
        if e_xy <= e_afm:
            n_a = np.array([1.0, 0.0, 0.0])
            n_b = np.array([1.0, 0.0, 0.0])
            return ClassicalPairConfig(n_a, n_b, w_a, w_b, e_xy, "xy",
                                       degenerate)
        n_a = np.array([0.0, 0.0, 1.0])
        n_b = np.array([0.0, 0.0, -1.0])
        return ClassicalPairConfig(n_a, n_b, w_a, w_b, e_afm, "afm",
                                   degenerate)
    # canted minimum (not reachable for J > 0, delta >= 0): classify by
    # the nearer symmetric energy and keep the descent geometry
    theta_a, theta_b = float(best_x[0]), float(best_x[1])
    n_a = np.array([math.sin(theta_a), 0.0, math.cos(theta_a)])
    n_b = np.array([math.sin(theta_b), 0.0, math.cos(theta_b)])
    phase = "xy" if abs(best_e - e_xy) <= abs(best_e - e_afm) else "afm"
    return ClassicalPairConfig(n_a, n_b, w_a, w_b, best_e, phase, degenerate)


def critical_point(lam: float, p1: float, p2: float, J: float = 1.0) -> float:
    """XY -> AFM critical coupling of the two-spin reduction.

    Returns +inf when the denominator is non-positive (no transition,
    e.g. the trivial cut p1 = p2).
    """
    within = p1 * (lam * lam + (1.0 - lam) ** 2)
    cross = 2.0 * p2 * lam * (1.0 - lam)
    denom = cross - within
    if denom <= 0.0:
        return math.inf
    return J * (within + cross) / denom


def tfi_meanfield(h: float) -> tuple[float, float, float]:
    """(mz, mx, energy density) of the collective transverse-field Ising
    ground state, minimizing e(theta) = -cos^2 theta + h sin theta.

    A coarse scan brackets the minimum; the winner is polished on the
    stationary set cos(theta) (2 sin(theta) + h) = 0, whose two branches
    (sin theta = -h/2 for |h| <= 2, cos theta = 0 otherwise) are compared
    exactly.  The polish matters near |h| = 2 where the raw minimum is
    quartically flat and blind descent stalls at ~1e-4 accuracy.
    """
    def f(theta):
        return -np.cos(theta) ** 2 + h * np.sin(theta)

    candidates = [math.pi / 2 if h <= 0 else -math.pi / 2]
    if abs(h) <= 2.0:
        candidates.append(math.asin(-h / 2.0))
    grid = np.linspace(0.0, 2.0 * np.pi, 720, endpoint=False)
    scan_min = float(np.min(f(grid)))
    theta = min(candidates, key=f)
    if f(theta) > scan_min + 1e-9:  # stationary set missed the basin
        theta = float(grid[int(np.argmin(f(grid)))])
        r = minimize_scalar(f, bounds=(theta - 0.02, theta + 0.02),
                            method="bounded", options={"xatol": 1e-13})
        theta = float(r.x)
    return abs(math.cos(theta)), -math.sin(theta), float(f(theta))


# ---------------------------------------------------------------------------
# helpers shared by studies


def sector_spectrum(op: SpinOperator, cap: int = 1 << 14) -> np.ndarray:
    """Full spectrum via per-sector dense solves when Sz is conserved."""
    if not op.conserves_sz or op.sector is not None:
        return dense_spectrum(op, cap=cap)
    pieces = [dense_spectrum(op.restrict(M), cap=cap)
              for M in attainable_sectors(op.L, op.s)]
    out = np.concatenate(pieces)
    out.sort()
    return out


def pair_ground_energy_density(L: int, lam: float, p1: float, p2: float,
                               params: CouplingParams) -> float:
    """Ground energy density of the collective-pair reduction."""
    op = build_collective_pair(L, lam, p1, p2, params)
    vals = np.linalg.eigvalsh(op.matrix)
    return float(vals[0]) / L
