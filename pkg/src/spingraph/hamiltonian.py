"""Hermitian spin operators over the computational basis.

Basis encoding: vertex v is digit v of a base-(2s+1) integer, digit t
meaning magnetic quantum number m = t - s.  For s = 1/2 this is one bit
per vertex (bit set = spin up), so total-Sz sectors are popcount classes.

Magnetization labels M are carried in integer units of 2m per site
(i.e. Pauli sigma^z units for s = 1/2): M = sum_v 2 m_v.

Two independent backends sit behind one interface:

- s = 1/2: matrix-free bit kernels over the edge list, full space or a
  fixed-M sector.  All matrix elements are real unless wy != 0.
- s > 1/2: an explicitly stored scipy CSR matrix assembled from kron
  products of single-site spin matrices (desk-scale dimensions only).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .graphs import Graph, GraphError, complete_graph

DEFAULT_DIM_CAP = 1 << 26
ALLOWED_SPINS = (0.5, 1.0, 1.5, 2.0)


class HamiltonianError(ValueError):
    """Bad couplings, basis request or capacity overflow."""


@dataclass(frozen=True)
class CouplingParams:
    """Couplings of the two-body + field Hamiltonian.

    With ``pauli=True`` the operators are sigma^alpha = 2 s^alpha (the
    convention that drops the 1/2 in front of the Pauli matrices).
    """

    jx: float = 0.0
    jy: float = 0.0
    jz: float = 0.0
    wx: float = 0.0
    wy: float = 0.0
    wz: float = 0.0
    s: float = 0.5
    pauli: bool = False
    # adds +1/(200 L) * sum_v (z operator) at build time; used to split the
    # Z2 degeneracy of the ferromagnetic Ising ground state
    z_break: bool = False

    def __post_init__(self):
        if self.s not in ALLOWED_SPINS:
            raise HamiltonianError(f"spin s={self.s} not supported")
        for name in ("jx", "jy", "jz", "wx", "wy", "wz"):
            if not math.isfinite(getattr(self, name)):
                raise HamiltonianError(f"coupling {name} must be finite")

    @property
    def conserves_sz(self) -> bool:
        """[H, Sz] = 0 iff jx == jy and no transverse field."""
        return self.jx == self.jy and self.wx == 0.0 and self.wy == 0.0


def preset_xxz(j: float = 1.0, delta: float = 0.0) -> CouplingParams:
    """Spin-1/2 XXZ in Pauli convention: jx = jy = -J, jz = Delta."""
    return CouplingParams(jx=-j, jy=-j, jz=delta, s=0.5, pauli=True)


def preset_tfi(h: float, break_symmetry: bool = False) -> CouplingParams:
    """Transverse-field Ising in Pauli convention: jz = -1, wx = h.

    ``break_symmetry`` requests the +1/(200 L) longitudinal term, fixed
    at build time because it depends on the vertex count.
    """
    return CouplingParams(jz=-1.0, wx=h, s=0.5, pauli=True,
                          z_break=break_symmetry)


# ---------------------------------------------------------------------------
# sector bases


@dataclass(frozen=True)
class SectorBasis:
    """Complete sorted enumeration of a total-Sz = M sector."""

    L: int
    s: float
    M: int
    states: np.ndarray  # sorted basis encodings, int64

    @property
    def dim(self) -> int:
        return int(self.states.size)


def attainable_sectors(L: int, s: float = 0.5) -> list[int]:
    """All M labels with at least one basis state."""
    two_s = round(2 * s)
    top = two_s * L
    return list(range(-top, top + 1, 2))


def sector_basis(L: int, s: float, M: int) -> SectorBasis:
    """Enumerate the M sector (M in 2m-per-site units)."""
    two_s = round(2 * s)
    if abs(M) > two_s * L or (M + two_s * L) % 2 != 0:
        raise HamiltonianError(f"sector M={M} unattainable for L={L}, s={s}")
    if two_s == 1:
        k = (M + L) // 2  # number of set bits
        states = []
        chunk = 1 << 20
        for start in range(0, 1 << L, chunk):
            block = np.arange(start, min(start + chunk, 1 << L), dtype=np.int64)
            states.append(block[np.bitwise_count(block) == k])
        return SectorBasis(L, s, M, np.concatenate(states))
    base = two_s + 1
    dim = base ** L
    idx = np.arange(dim, dtype=np.int64)
    digit_sum = np.zeros(dim, dtype=np.int64)
    for v in range(L):
        digit_sum += (idx // base ** v) % base
    want = (M + two_s * L) // 2  # sum of digits t_v with m = t - s
    return SectorBasis(L, s, M, idx[digit_sum == want])


# ---------------------------------------------------------------------------
# operator core


class SpinOperator:
    """Hermitian operator with a matvec kernel; immutable after build.

    Construction goes through the module-level builders.  ``pairs`` and
    ``pair_coeffs`` hold per-pair (jx, jy, jz) couplings *including* the
    L/N_E prefactor and the operator-convention scaling; ``field`` is the
    uniform per-site (wx, wy, wz) in the same units.
    """

    def __init__(self, L, s, pauli, pairs, pair_coeffs, field,
                 sector: SectorBasis | None = None,
                 dim_cap: int = DEFAULT_DIM_CAP):
        self.L = int(L)
        self.s = float(s)
        self.pauli = bool(pauli)
        self.pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        self.pair_coeffs = np.asarray(pair_coeffs, dtype=float).reshape(-1, 3)
        self.field = np.asarray(field, dtype=float).reshape(3)
        self.sector = sector
        two_s = round(2 * self.s)
        self.base = two_s + 1
        full_dim = self.base ** self.L
        if full_dim > dim_cap and sector is None:
            raise HamiltonianError(
                f"dimension {full_dim} exceeds cap {dim_cap}")
        self.dim = sector.dim if sector is not None else full_dim
        self.dtype = complex if self.field[1] != 0.0 else float
        self._csr = None
        self._diag = None
        self._hops = None
        if self.base > 2:
            self._csr = self._assemble_csr()
        else:
            self._prepare_bits()

    # -- shared helpers ----------------------------------------------------

    @property
    def conserves_sz(self) -> bool:
        cj = self.pair_coeffs
        return bool(np.all(cj[:, 0] == cj[:, 1])
                    and self.field[0] == 0.0 and self.field[1] == 0.0)

    def _states(self) -> np.ndarray:
        if self.sector is not None:
            return self.sector.states
        return np.arange(self.dim, dtype=np.int64)

    # -- s = 1/2 bit kernels -------------------------------------------------

    def _prepare_bits(self):
        states = self._states()
        diag = np.zeros(states.size, dtype=float)
        z = [(((states >> v) & 1) * 2 - 1).astype(np.int8)
             for v in range(self.L)]
        for (u, v), (_, _, cjz) in zip(self.pairs, self.pair_coeffs):
            if cjz != 0.0:
                diag += cjz * (z[u] * z[v])
        if self.field[2] != 0.0:
            for v in range(self.L):
                diag += self.field[2] * z[v]
        self._diag = diag
        self._zbits = z
        if self.sector is not None:
            if not self.conserves_sz:
                raise HamiltonianError(
                    "sector restriction requires jx == jy and no x/y field")
            # per-pair hop tables: indices where the two bits differ, and
            # the sector index of the flipped partner state
            hops = []
            for (u, v), (cjx, cjy, _) in zip(self.pairs, self.pair_coeffs):
                amp = cjx + cjy  # anti-aligned pair: jx - jy*z_u*z_v, zz=-1
                if amp == 0.0:
                    hops.append(None)
                    continue
                differ = np.nonzero(z[u] != z[v])[0]
                flipped = states[differ] ^ ((1 << int(u)) | (1 << int(v)))
                partner = np.searchsorted(states, flipped)
                hops.append((differ, partner, amp))
            self._hops = hops

    def _matvec_bits_full(self, psi, out):
        states = self._states()
        np.multiply(self._diag, psi, out=out)
        z = self._zbits
        for (u, v), (cjx, cjy, _) in zip(self.pairs, self.pair_coeffs):
            if cjx == 0.0 and cjy == 0.0:
                continue
            mask = (1 << int(u)) | (1 << int(v))
            coeff = cjx - cjy * (z[u] * z[v]).astype(float)
            out[states ^ mask] += coeff * psi
        wx, wy = self.field[0], self.field[1]
        if wx != 0.0 or wy != 0.0:
            for v in range(self.L):
                coeff = wx
                if wy != 0.0:
                    coeff = wx + 1j * wy * z[v].astype(float)
                out[states ^ (1 << v)] += coeff * psi
        return out

    def _matvec_bits_sector(self, psi, out):
        np.multiply(self._diag, psi, out=out)
        for hop in self._hops:
            if hop is None:
                continue
            differ, partner, amp = hop
            out[partner] += amp * psi[differ]
        return out

    # -- s > 1/2 stored matrices ---------------------------------------------

    def _assemble_csr(self):
        two_s = self.base - 1
        s = self.s
        m = np.arange(-s, s + 1e-9, 1.0)  # digit t ascending = m ascending
        sz = sp.diags(m)
        ladder = np.sqrt(s * (s + 1) - m[:-1] * (m[:-1] + 1))
        s_plus = sp.diags(ladder, -1)   # raises m: |t+1><t|
        s_minus = sp.diags(ladder, 1)
        sx = 0.5 * (s_plus + s_minus)
        sy = -0.5j * (s_plus - s_minus)
        ident = sp.identity(self.base, format="csr")

        def site(op, v):
            ops = [op if u == v else ident for u in range(self.L)]
            out = ops[-1]
            for u in range(self.L - 2, -1, -1):
                out = sp.kron(out, ops[u], format="csr")
            return out

        full_dim = self.base ** self.L
        H = sp.csr_matrix((full_dim, full_dim),
                          dtype=complex if self.dtype is complex else float)
        one_site = {"x": sx, "y": sy, "z": sz}
        needed = [ax for i, ax in enumerate("xyz")
                  if np.any(self.pair_coeffs[:, i] != 0.0)
                  or self.field[i] != 0.0]
        cached = {ax: [site(one_site[ax], v) for v in range(self.L)]
                  for ax in needed}
        for (u, v), cj in zip(self.pairs, self.pair_coeffs):
            for ax_i, ax in enumerate("xyz"):
                if cj[ax_i] != 0.0:
                    term = cached[ax][u] @ cached[ax][v]
                    H = H + cj[ax_i] * (term if ax != "y" else term.real)
        for ax_i, ax in enumerate("xyz"):
            if self.field[ax_i] != 0.0:
                for v in range(self.L):
                    term = cached[ax][v]
                    if ax == "y" and self.dtype is not complex:
                        raise HamiltonianError("wy != 0 requires complex dtype")
                    H = H + self.field[ax_i] * term
        if self.dtype is not complex:
            H = sp.csr_matrix(H.real)
        if self.sector is not None:
            if not self.conserves_sz:
                raise HamiltonianError(
                    "sector restriction requires jx == jy and no x/y field")
            idx = self.sector.states
            H = H[idx][:, idx]
        return H.tocsr()

    # -- public surface -----------------------------------------------------

    def matvec(self, psi: np.ndarray) -> np.ndarray:
        psi = np.asarray(psi)
        if psi.shape != (self.dim,):
            raise HamiltonianError(f"state length {psi.shape} != dim {self.dim}")
        if self._csr is not None:
            return self._csr @ psi
        dtype = complex if (self.dtype is complex
                            or np.iscomplexobj(psi)) else float
        out = np.zeros(self.dim, dtype=dtype)
        if self.sector is not None:
            return self._matvec_bits_sector(psi, out)
        return self._matvec_bits_full(psi, out)

    def to_dense(self, cap: int = 1 << 14) -> np.ndarray:
        if self.dim > cap:
            raise HamiltonianError(f"dense cap exceeded: dim {self.dim} > {cap}")
        if self._csr is not None:
            return self._csr.toarray()
        n = self.dim
        H = np.zeros((n, n), dtype=self.dtype)
        cols = np.arange(n)
        H[cols, cols] = self._diag
        if self.sector is not None:
            for hop in self._hops:
                if hop is None:
                    continue
                differ, partner, amp = hop
                H[partner, differ] += amp
            return H
        states = self._states()
        z = self._zbits
        for (u, v), (cjx, cjy, _) in zip(self.pairs, self.pair_coeffs):
            if cjx == 0.0 and cjy == 0.0:
                continue
            mask = (1 << int(u)) | (1 << int(v))
            coeff = cjx - cjy * (z[u] * z[v]).astype(float)
            H[states ^ mask, cols] += coeff
        wx, wy = self.field[0], self.field[1]
        if wx != 0.0 or wy != 0.0:
            for v in range(self.L):
                coeff = wx if wy == 0.0 else wx + 1j * wy * z[v].astype(float)
                H[states ^ (1 << v), cols] += coeff
        return H

    def restrict(self, M: int) -> "SpinOperator":
        """Operator restricted to the total-Sz = M sector."""
        if self.sector is not None:
            raise HamiltonianError("operator is already sector-restricted")
        basis = sector_basis(self.L, self.s, M)
        return SpinOperator(self.L, self.s, self.pauli, self.pairs,
                            self.pair_coeffs, self.field, sector=basis)

    def embed(self, psi: np.ndarray) -> np.ndarray:
        """Scatter a sector vector into the full space (identity if full)."""
        if self.sector is None:
            return np.asarray(psi)
        full = np.zeros(self.base ** self.L, dtype=np.asarray(psi).dtype)
        full[self.sector.states] = psi
        return full


class DenseOperator:
    """Thin wrapper giving small dense matrices the SpinOperator surface."""

    def __init__(self, matrix: np.ndarray):
        matrix = np.asarray(matrix)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise HamiltonianError("DenseOperator needs a square matrix")
        self.matrix = matrix
        self.dim = matrix.shape[0]
        self.sector = None

    def matvec(self, psi: np.ndarray) -> np.ndarray:
        return self.matrix @ psi

    def to_dense(self, cap: int = 1 << 14) -> np.ndarray:
        return self.matrix


# ---------------------------------------------------------------------------
# builders


def _convention_factors(params: CouplingParams) -> tuple[float, float]:
    """(two-body, one-body) scale factors translating the requested
    operator convention into the kernel's native units.

    The s = 1/2 bit kernel works in sigma units; the kron path works in
    canonical spin units.
    """
    if round(2 * params.s) == 1:
        return (1.0, 1.0) if params.pauli else (0.25, 0.5)
    return (4.0, 2.0) if params.pauli else (1.0, 1.0)


def build(g: Graph, params: CouplingParams, sector: int | None = None,
          dim_cap: int = DEFAULT_DIM_CAP) -> SpinOperator:
    """Assemble (L/N_E) sum_edges [Jx sxsx + Jy sysy + Jz szsz] + sum_v w.s_v."""
    if g.n_edges == 0:
        raise HamiltonianError("graph has no edges: L/N_E scaling undefined")
    two_body, one_body = _convention_factors(params)
    pref = g.L / g.n_edges
    coeffs = np.tile(
        np.array([params.jx, params.jy, params.jz]) * pref * two_body,
        (g.n_edges, 1))
    field = np.array([params.wx, params.wy, params.wz]) * one_body
    if params.z_break:
        # +1/(200 L) sum_v sigma^z, in the kernel's native units: the bit
        # kernel is sigma-native, the kron kernel is canonical (sigma = 2 s)
        eps = 1.0 / (200.0 * g.L)
        field[2] += eps if round(2 * params.s) == 1 else 2.0 * eps
    basis = None
    if sector is not None:
        basis = sector_basis(g.L, params.s, sector)
    return SpinOperator(g.L, params.s, params.pauli, g.edge_array(), coeffs,
                        field, sector=basis, dim_cap=dim_cap)


def build_difference(g_er: Graph, params: CouplingParams,
                     dim_cap: int = DEFAULT_DIM_CAP) -> SpinOperator:
    """H(Complete) - H(g_er), assembled pair-wise: the coefficient of the
    (u, v) term is 2/(L-1) - [uv in E] * L/N_E per spin axis."""
    if g_er.n_edges == 0:
        raise HamiltonianError("graph has no edges: L/N_E scaling undefined")
    L = g_er.L
    two_body, _ = _convention_factors(params)
    edge_set = set(g_er.edges)
    pairs = [(u, v) for u in range(L) for v in range(u + 1, L)]
    j_vec = np.array([params.jx, params.jy, params.jz]) * two_body
    coeffs = np.empty((len(pairs), 3))
    for i, pr in enumerate(pairs):
        c = 2.0 / (L - 1) - (L / g_er.n_edges if pr in edge_set else 0.0)
        coeffs[i] = c * j_vec
    return SpinOperator(L, params.s, params.pauli, np.asarray(pairs), coeffs,
                        np.zeros(3), dim_cap=dim_cap)


def collective_spin_matrices(two_S: int) -> dict[str, np.ndarray]:
    """Dense spin matrices for a single spin of size S = two_S/2, basis
    ordered by ascending m."""
    S = two_S / 2.0
    m = np.arange(-S, S + 1e-9, 1.0)
    dim = two_S + 1
    sz = np.diag(m)
    ladder = np.sqrt(S * (S + 1) - m[:-1] * (m[:-1] + 1))
    s_plus = np.zeros((dim, dim))
    s_plus[np.arange(1, dim), np.arange(dim - 1)] = ladder
    sx = 0.5 * (s_plus + s_plus.T)
    sy_imag = 0.5 * (s_plus - s_plus.T)  # sy = -i * sy_imag
    return {"x": sx, "y_imag": sy_imag, "z": sz}


def build_collective_pair(L: int, lam: float, p1: float, p2: float,
                          params: CouplingParams) -> DenseOperator:
    """Two-collective-spin reduction of the cut-graph Hamiltonian on the
    maximal-spin product space S_A = lam*L/2, S_B = (1-lam)*L/2 (s = 1/2).

    Normalization mirrors the physical graph Hamiltonian: the two-body sum
    is scaled by L/N_bar with N_bar the expected edge count from exact pair
    counting, and the per-axis single-site Casimir constants (c-numbers for
    s = 1/2) are subtracted so that lam = 1/2, p1 = p2 reproduces the
    complete-graph maximal-spin branch exactly.  The field term enters
    unscaled, as in the microscopic Hamiltonian.
    """
    if round(2 * params.s) != 1:
        raise HamiltonianError("collective pair reduction requires s = 1/2")
    n_a = lam * L
    if abs(n_a - round(n_a)) > 1e-9:
        raise HamiltonianError("lam * L must be an integer")
    n_a = round(n_a)
    n_b = L - n_a
    if n_a < 1 or n_b < 1:
        raise HamiltonianError("both partitions need at least one vertex")
    n_pairs = p1 * (n_a * (n_a - 1) // 2 + n_b * (n_b - 1) // 2) \
        + p2 * n_a * n_b
    if n_pairs <= 0:
        raise HamiltonianError("expected edge count is zero")
    pref = L / n_pairs

    # collective operators in sigma units when pauli else canonical
    scale = 2.0 if params.pauli else 1.0
    a = collective_spin_matrices(n_a)
    b = collective_spin_matrices(n_b)
    dim_a, dim_b = n_a + 1, n_b + 1
    eye_a, eye_b = np.eye(dim_a), np.eye(dim_b)
    site_sq = 1.0 if params.pauli else 0.25  # (sigma^a)^2 = 1, (s^a)^2 = 1/4

    j = {"x": params.jx, "y": params.jy, "z": params.jz}
    w = {"x": params.wx, "y": params.wy, "z": params.wz}
    dim = dim_a * dim_b
    H = np.zeros((dim, dim))

    def kron(m_a, m_b):
        return np.kron(m_a, m_b)

    for ax in "xyz":
        if j[ax] == 0.0 and w[ax] == 0.0:
            continue
        if ax == "y":
            # S_y^2 and S_yA S_yB are real: (-i X)(-i X) = -X X with X real
            sa2 = -scale * scale * (a["y_imag"] @ a["y_imag"])
            sb2 = -scale * scale * (b["y_imag"] @ b["y_imag"])
            cross = -scale * scale * kron(a["y_imag"], b["y_imag"])
            sa1 = sb1 = None  # pure-imaginary one-body; only wy uses it
        else:
            ma, mb = scale * a[ax], scale * b[ax]
            sa2, sb2 = ma @ ma, mb @ mb
            cross = kron(ma, mb)
            sa1, sb1 = ma, mb
        if j[ax] != 0.0:
            two_body = (p1 * (kron(sa2, eye_b) + kron(eye_a, sb2))
                        + 2.0 * p2 * cross) / 2.0
            # subtract per-axis single-site Casimir: p1 * n_sites * (s^ax)^2
            two_body -= 0.5 * p1 * (n_a + n_b) * site_sq * np.eye(dim)
            H += pref * j[ax] * two_body
        if w[ax] != 0.0:
            if ax == "y":
                raise HamiltonianError("wy on the pair operator not supported")
            H += w[ax] * (kron(sa1, eye_b) + kron(eye_a, sb1))
    if params.z_break:
        eps = 1.0 / (200.0 * L)
        ma, mb = scale * a["z"], scale * b["z"]
        H += eps * (kron(ma, eye_b) + kron(eye_a, mb))
    return DenseOperator(H)


def hermiticity_defect(op, n_probes: int = 5, seed: int = 0) -> float:
    """max |<x|H y> - conj(<y|H x>)| over random probe pairs."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_probes):
        x = rng.standard_normal(op.dim) + 1j * rng.standard_normal(op.dim)
        y = rng.standard_normal(op.dim) + 1j * rng.standard_normal(op.dim)
        lhs = np.vdot(x, op.matvec(y))
        rhs = np.conj(np.vdot(y, op.matvec(x)))
        worst = max(worst, abs(lhs - rhs))
    return worst
