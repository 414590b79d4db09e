"""Measured quantities on spin-1/2 state vectors.

Correlations are Pauli two-point functions <sigma^a_v sigma^a_v'>:
zz is diagonal in the computational basis, xx/yy go through on-the-fly
bit-flip contractions (no operator matrices are materialized).  Both
entropies are reported in bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphs import Graph, GraphError
from .solvers import StateVector

DEFAULT_BINS = 256


class ObservablesError(ValueError):
    pass


@dataclass(frozen=True)
class CorrelationMatrix:
    axis: str                # "x" | "y" | "z"
    values: np.ndarray       # L x L symmetric, diagonal exactly 1
    ordering: np.ndarray     # site permutation used for row/column order


@dataclass
class ObservablesRecord:
    energy_density: float
    c_afm: float
    c_xy: float
    mz_density: float
    mx_density: float
    ee_bits: float
    shannon_zz: float
    shannon_xx: float
    shannon_yy: float
    ground_sector: int | None
    degenerate: bool


@dataclass(frozen=True)
class EnsembleStats:
    mean: float
    variance: float | None   # n-1 denominator; None when n < 2
    n: int


def _full_state(state: StateVector) -> np.ndarray:
    psi = state.to_full()
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-9:
        raise ObservablesError(f"state not normalized (|psi| = {norm})")
    if round(2 * state.s) != 1:
        raise ObservablesError("correlation observables require s = 1/2")
    return psi


def _z_values(L: int) -> list[np.ndarray]:
    idx = np.arange(1 << L, dtype=np.int64)
    return [(((idx >> v) & 1) * 2 - 1).astype(np.int8) for v in range(L)]


def corr_matrix(state: StateVector, axis: str,
                ordering: np.ndarray | None = None) -> CorrelationMatrix:
    """All pairwise <sigma^axis sigma^axis> expectation values."""
    if axis not in ("x", "y", "z"):
        raise ObservablesError(f"unknown axis {axis!r}")
    psi = _full_state(state)
    L = state.L
    if ordering is None:
        ordering = np.arange(L, dtype=np.int64)
    z = _z_values(L)
    C = np.eye(L)
    idx = np.arange(1 << L, dtype=np.int64)
    if axis == "z":
        prob = np.abs(psi) ** 2
        zw = np.array([zv * prob for zv in z])      # L x dim
        zmat = np.array([zv.astype(float) for zv in z])
        C = zmat @ zw.T
        np.fill_diagonal(C, 1.0)
    else:
        for u in range(L):
            for v in range(u + 1, L):
                mask = (1 << u) | (1 << v)
                flipped = psi[idx ^ mask]
                if axis == "x":
                    val = np.real(np.vdot(psi, flipped))
                else:  # <yy> carries -z_u z_v relative to <xx>
                    val = np.real(np.vdot(psi, -(z[u] * z[v]) * flipped))
                C[u, v] = C[v, u] = val
    perm = np.asarray(ordering)
    C = C[np.ix_(perm, perm)]
    return CorrelationMatrix(axis, C, perm)


def order_params(state: StateVector, g: Graph) -> tuple[float, float]:
    """(C_AFM, C_XY): edge-averaged zz correlation and the all-pair
    in-plane correlation sum, both normalized by N_E."""
    if g.n_edges == 0:
        raise ObservablesError("order parameters need at least one edge")
    zz = corr_matrix(state, "z").values
    xx = corr_matrix(state, "x").values
    yy = corr_matrix(state, "y").values
    c_afm = sum(zz[u, v] for (u, v) in g.edges) / g.n_edges
    iu = np.triu_indices(g.L, k=1)
    c_xy = float((xx[iu] + yy[iu]).sum()) / g.n_edges
    return float(c_afm), c_xy


def magnetization(state: StateVector, axis: str) -> float:
    """(1/L) sum_v <sigma^axis_v>."""
    psi = _full_state(state)
    L = state.L
    z = _z_values(L)
    idx = np.arange(1 << L, dtype=np.int64)
    total = 0.0
    if axis == "z":
        prob = np.abs(psi) ** 2
        for v in range(L):
            total += float(np.dot(prob, z[v]))
    elif axis == "x":
        for v in range(L):
            total += float(np.real(np.vdot(psi, psi[idx ^ (1 << v)])))
    elif axis == "y":
        # (sigma^y psi)_i = -i z_v(i) psi_{i^bit}
        for v in range(L):
            flipped = psi[idx ^ (1 << v)]
            total += float(np.real(np.vdot(psi, -1j * z[v] * flipped)))
    else:
        raise ObservablesError(f"unknown axis {axis!r}")
    return total / L


def entanglement_entropy(state: StateVector, cut: int,
                         ordering: np.ndarray | None = None) -> float:
    """Bipartite von Neumann entropy in bits across positions [0, cut).

    Sector states are embedded into the full 2^L space first; the given
    site ordering is applied before the Schmidt decomposition.
    """
    L = state.L
    if not (1 <= cut < L):
        raise ObservablesError(f"cut position {cut} outside 1..L-1")
    psi = _full_state(state)
    if ordering is not None:
        perm = np.asarray(ordering)
        idx = np.arange(1 << L, dtype=np.int64)
        target = np.zeros_like(idx)
        for pos in range(L):
            target |= ((idx >> int(perm[pos])) & 1) << pos
        reordered = np.zeros_like(psi)
        reordered[target] = psi
        psi = reordered
    mat = psi.reshape(1 << (L - cut), 1 << cut)  # rows: positions >= cut
    sv = np.linalg.svd(mat, compute_uv=False)
    p = sv ** 2
    p = p[p > 1e-300]
    return float(-(p * np.log2(p)).sum())


def shannon_entropy(corr: CorrelationMatrix, n_bins: int = DEFAULT_BINS) -> float:
    """Binned Shannon entropy (bits) of the off-diagonal correlations.

    Bins are [-1 + 2i/n, -1 + 2(i+1)/n), the last closed at +1; elements
    exactly at -1 land in bin 0.
    """
    if n_bins < 2:
        raise ObservablesError("need at least two bins")
    L = corr.values.shape[0]
    off = corr.values[~np.eye(L, dtype=bool)]
    if off.size == 0:
        raise ObservablesError("matrix has no off-diagonal elements")
    if np.any(np.abs(off) > 1.0 + 1e-9):
        raise ObservablesError("correlation element outside [-1, 1]")
    clipped = np.clip(off, -1.0, 1.0)
    bins = np.floor((clipped + 1.0) * n_bins / 2.0).astype(np.int64)
    bins = np.clip(bins, 0, n_bins - 1)  # +1 goes into the last bin
    counts = np.bincount(bins, minlength=n_bins)
    p = counts / off.size
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def ensemble_stats(values) -> EnsembleStats:
    """Sample mean and (n-1)-denominator variance."""
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        raise ObservablesError("no values")
    mean = float(arr.mean())
    var = float(arr.var(ddof=1)) if arr.size >= 2 else None
    return EnsembleStats(mean, var, int(arr.size))
