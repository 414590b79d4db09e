"""Simple-graph construction and cut machinery.

All generators are deterministic given (spec, L, seed).  Graphs are
immutable: a sorted tuple of 0-based edges (u, v) with u < v, plus an
optional per-vertex partition tag for two-set cut graphs.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .seeding import Seed, as_seed

KINDS = ("complete", "chain", "er", "cut", "uniform_degree", "antiregular")

# Redraw cap for the even-degree-sum rejection loop; the odds of hitting
# it are ~2^-1000 for any sane degree window.
MAX_DEGREE_REDRAWS = 1000


class GraphError(ValueError):
    """Invalid graph, spec or degree-sequence input."""


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices 0..L-1."""

    L: int
    edges: tuple[tuple[int, int], ...]
    partition: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.L <= 0:
            raise GraphError("vertex count must be positive")
        prev = (-1, -1)
        for (u, v) in self.edges:
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            if not (0 <= u < v < self.L):
                raise GraphError(f"edge ({u}, {v}) out of range or unordered")
            if (u, v) <= prev:
                raise GraphError("edge list must be strictly sorted")
            prev = (u, v)
        if self.partition is not None:
            if len(self.partition) != self.L:
                raise GraphError("partition length must equal L")
            if any(t not in (0, 1) for t in self.partition):
                raise GraphError("partition tags must be 0 or 1")

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.L, dtype=np.int64)
        for (u, v) in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def edge_array(self) -> np.ndarray:
        """Edges as an (n_edges, 2) int array (empty -> shape (0, 2))."""
        if not self.edges:
            return np.zeros((0, 2), dtype=np.int64)
        return np.asarray(self.edges, dtype=np.int64)

    def is_connected(self) -> bool:
        if self.L == 1:
            return True
        adj: list[list[int]] = [[] for _ in range(self.L)]
        for (u, v) in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        seen = np.zeros(self.L, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if not seen[y]:
                    seen[y] = True
                    stack.append(y)
        return bool(seen.all())


@dataclass(frozen=True)
class EnsembleSpec:
    """Parameters selecting one of the graph ensembles."""

    kind: str
    p: float | None = None
    lam: float | None = None
    p1: float | None = None
    p2: float | None = None
    deg_lo: int | None = None
    deg_hi: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise GraphError(f"unknown ensemble kind {self.kind!r}")
        if self.kind == "er":
            if self.p is None or not (0.0 < self.p <= 1.0):
                raise GraphError("er requires 0 < p <= 1")
        if self.kind == "cut":
            if self.lam is None or not (0.0 < self.lam < 1.0):
                raise GraphError("cut requires 0 < lambda < 1")
            for name, val in (("p1", self.p1), ("p2", self.p2)):
                if val is None or not (0.0 <= val <= 1.0):
                    raise GraphError(f"cut requires 0 <= {name} <= 1")
        if self.kind == "uniform_degree":
            lo, hi = self.deg_lo, self.deg_hi
            if (lo is None) != (hi is None):
                raise GraphError("set both deg_lo and deg_hi or neither")
            if lo is not None and not (0 < lo <= hi):
                raise GraphError("uniform_degree requires 0 < deg_lo <= deg_hi")

    def label(self) -> str:
        """Compact CSV-safe label (no commas)."""
        if self.kind == "er":
            return f"er(p={self.p:g})"
        if self.kind == "cut":
            return f"cut(lam={self.lam:g};p1={self.p1:g};p2={self.p2:g})"
        if self.kind == "uniform_degree":
            if self.deg_lo is None:
                return "uniform(lo=L/4;hi=3L/4)"
            return f"uniform(lo={self.deg_lo};hi={self.deg_hi})"
        return self.kind


# ---------------------------------------------------------------------------
# generators


def complete_graph(L: int) -> Graph:
    return Graph(L, tuple((u, v) for u in range(L) for v in range(u + 1, L)))


def chain_graph(L: int) -> Graph:
    return Graph(L, tuple((v, v + 1) for v in range(L - 1)))


def _pair_list(L: int) -> list[tuple[int, int]]:
    return [(u, v) for u in range(L) for v in range(u + 1, L)]


def erdos_renyi(L: int, p: float, rng: np.random.Generator) -> Graph:
    """Each of the C(L,2) pairs kept independently with probability p."""
    pairs = _pair_list(L)
    draws = rng.random(len(pairs))
    edges = tuple(pr for pr, x in zip(pairs, draws) if x < p)
    return Graph(L, edges)


def cut_graph(L: int, lam: float, p1: float, p2: float,
              rng: np.random.Generator) -> Graph:
    """Two-set random graph: first ceil(lam*L) vertices are set A.

    Within-set pairs appear with probability p1, cross-set with p2.
    """
    n_a = math.ceil(lam * L)
    pairs = _pair_list(L)
    draws = rng.random(len(pairs))
    edges = []
    for (u, v), x in zip(pairs, draws):
        prob = p1 if (u < n_a) == (v < n_a) else p2
        if x < prob:
            edges.append((u, v))
    tags = tuple([0] * n_a + [1] * (L - n_a))
    return Graph(L, tuple(edges), partition=tags)


def uniform_degree_bounds(L: int) -> tuple[int, int]:
    """Default degree window: ceil(L/4) .. floor(3L/4)."""
    return math.ceil(L / 4), (3 * L) // 4


def uniform_degree_graph(L: int, rng: np.random.Generator,
                         deg_lo: int | None = None,
                         deg_hi: int | None = None) -> Graph:
    """Degrees drawn uniformly in [deg_lo, deg_hi], redrawn until the sum
    is even, then realized with Havel-Hakimi."""
    if deg_lo is None or deg_hi is None:
        deg_lo, deg_hi = uniform_degree_bounds(L)
    if not (0 < deg_lo <= deg_hi < L):
        raise GraphError(f"degree bounds ({deg_lo}, {deg_hi}) invalid for L={L}")
    for _ in range(MAX_DEGREE_REDRAWS):
        degrees = rng.integers(deg_lo, deg_hi + 1, size=L)
        if int(degrees.sum()) % 2 == 0:
            seq = [int(d) for d in degrees]
            if not is_graphical(seq):
                # Window is well inside (0, L-1) so this should not occur;
                # redraw rather than fail on a freak sequence.
                continue
            return havel_hakimi(seq)
    raise GraphError(
        f"no even-sum graphical degree sequence in {MAX_DEGREE_REDRAWS} draws")


def antiregular_graph(L: int) -> Graph:
    """Maximally irregular graph: edge (i, j) iff i + j >= L + 1 in 1-based
    labels.  Degree multiset is {1, ..., L-1} with exactly one repeat."""
    edges = tuple((u, v) for u in range(L) for v in range(u + 1, L)
                  if (u + 1) + (v + 1) >= L + 1)
    return Graph(L, edges)


def generate(spec: EnsembleSpec, L: int, seed: Seed | int) -> Graph:
    """Draw one graph from the ensemble; bit-identical for equal seeds."""
    rng = as_seed(seed).generator()
    if spec.kind == "complete":
        return complete_graph(L)
    if spec.kind == "chain":
        return chain_graph(L)
    if spec.kind == "er":
        return erdos_renyi(L, spec.p, rng)
    if spec.kind == "cut":
        return cut_graph(L, spec.lam, spec.p1, spec.p2, rng)
    if spec.kind == "uniform_degree":
        return uniform_degree_graph(L, rng, spec.deg_lo, spec.deg_hi)
    if spec.kind == "antiregular":
        return antiregular_graph(L)
    raise GraphError(f"unknown ensemble kind {spec.kind!r}")


# ---------------------------------------------------------------------------
# degree sequences


def _erdos_gallai_violation(degrees: list[int]) -> int | None:
    """First k (1-based) violating the Erdos-Gallai inequality, else None.

    Assumes entries are non-negative; an odd degree sum is reported as k=0.
    """
    if sum(degrees) % 2 != 0:
        return 0
    d = sorted(degrees, reverse=True)
    n = len(d)
    for k in range(1, n + 1):
        lhs = sum(d[:k])
        rhs = k * (k - 1) + sum(min(x, k) for x in d[k:])
        if lhs > rhs:
            return k
    return None


def is_graphical(degrees) -> bool:
    """True iff the sequence is realizable as a simple graph."""
    seq = [int(x) for x in degrees]
    if not seq:
        return True
    n = len(seq)
    if any(x < 0 or x >= n for x in seq):
        return False
    return _erdos_gallai_violation(seq) is None


def havel_hakimi(degrees) -> Graph:
    """Realize a graphical degree sequence as a simple graph.

    Deterministic: each round connects the highest-degree vertex to the
    next-highest remaining degrees, breaking ties by lowest vertex index.
    """
    seq = [int(x) for x in degrees]
    L = len(seq)
    if L == 0:
        raise GraphError("empty degree sequence")
    if any(x < 0 or x >= L for x in seq):
        raise GraphError("degrees must lie in [0, L-1]")
    k = _erdos_gallai_violation(seq)
    if k is not None:
        if k == 0:
            raise GraphError("degree sum is odd; sequence not graphical")
        raise GraphError(f"Erdos-Gallai condition violated at k={k}")

    remaining = list(seq)
    edges: list[tuple[int, int]] = []
    while True:
        order = sorted(range(L), key=lambda v: (-remaining[v], v))
        head = order[0]
        d = remaining[head]
        if d == 0:
            break
        targets = [v for v in order[1:] if remaining[v] > 0][:d]
        if len(targets) < d:
            raise GraphError("sequence became non-graphical during construction")
        remaining[head] = 0
        for v in targets:
            remaining[v] -= 1
            edges.append((min(head, v), max(head, v)))
    g = Graph(L, tuple(sorted(edges)))
    if list(g.degrees()) != seq:
        raise GraphError("Havel-Hakimi failed to realize the input sequence")
    return g


# ---------------------------------------------------------------------------
# cuts


@dataclass(frozen=True)
class CutScanResult:
    """Extreme cut-size deviation over bipartitions at fixed magnetization."""

    L: int
    M: int
    max_abs_deviation: float
    n_cuts_scanned: int
    exhaustive: bool


def cut_size(g: Graph, side) -> int:
    """Number of edges whose endpoints carry different side labels."""
    side = np.asarray(side)
    if side.shape != (g.L,):
        raise GraphError(f"side assignment must have length {g.L}")
    if not g.edges:
        return 0
    e = g.edge_array()
    return int(np.count_nonzero(side[e[:, 0]] != side[e[:, 1]]))


def _masks_with_popcount(L: int, k: int) -> np.ndarray:
    """All L-bit masks with k set bits, ascending (chunked to bound memory)."""
    out = []
    chunk = 1 << 20
    for start in range(0, 1 << L, chunk):
        block = np.arange(start, min(start + chunk, 1 << L), dtype=np.int64)
        out.append(block[np.bitwise_count(block) == k])
    return np.concatenate(out)


def _cut_sizes_for_masks(g: Graph, masks: np.ndarray) -> np.ndarray:
    sizes = np.zeros(masks.shape[0], dtype=np.int64)
    for (u, v) in g.edges:
        sizes += ((masks >> u) ^ (masks >> v)) & 1
    return sizes


def cut_deviation_scan(g: Graph, p: float, M: int, mode: str = "exhaustive",
                       n_samples: int = 10000,
                       seed: Seed | int | None = None) -> CutScanResult:
    """Scan bipartitions with side sizes (L+M)/2, (L-M)/2 and report the
    largest |N_AB - p(L^2 - M^2)/4|.

    ``mode`` is "exhaustive" (L <= 24) or "sampled" (n_samples draws).
    """
    L = g.L
    if abs(M) > L or (L + M) % 2 != 0:
        raise GraphError(f"magnetization M={M} infeasible for L={L}")
    k = (L + M) // 2
    mean = p * (L * L - M * M) / 4.0
    if mode == "exhaustive":
        if L > 24:
            raise GraphError("exhaustive scan limited to L <= 24")
        masks = _masks_with_popcount(L, k)
        sizes = _cut_sizes_for_masks(g, masks)
        dev = float(np.max(np.abs(sizes - mean))) if sizes.size else abs(mean)
        return CutScanResult(L, M, dev, int(masks.size), True)
    if mode == "sampled":
        rng = as_seed(0 if seed is None else seed).generator()
        # k column indices per row via argsort of uniform noise
        picks = np.argsort(rng.random((n_samples, L)), axis=1)[:, :k]
        masks = np.zeros(n_samples, dtype=np.int64)
        for j in range(k):
            masks |= np.int64(1) << picks[:, j].astype(np.int64)
        sizes = _cut_sizes_for_masks(g, masks)
        dev = float(np.max(np.abs(sizes - mean))) if sizes.size else abs(mean)
        return CutScanResult(L, M, dev, n_samples, False)
    raise GraphError(f"unknown scan mode {mode!r}")


def expected_cut_params(lam: float, p1: float, p2: float) -> tuple[float, float]:
    """(edge density N_E/L^2, cross-edge fraction alpha) for the cut ensemble.

    density = p1(lam^2 - lam + 1/2) + p2 lam(1-lam); the lam^2 - lam + 1/2
    factor is (lam^2 + (1-lam)^2)/2, i.e. the within-set pair fraction.
    """
    density = p1 * (lam * lam - lam + 0.5) + p2 * lam * (1.0 - lam)
    cross = 2.0 * p2 * lam * (1.0 - lam)
    within = p1 * (lam * lam + (1.0 - lam) ** 2)
    alpha = cross / (within + cross)
    return density, alpha


# ---------------------------------------------------------------------------
# site orderings


def site_ordering(g: Graph, kind: str = "identity") -> np.ndarray:
    """Vertex permutation ``order`` with order[position] = vertex.

    - identity: 0..L-1.
    - cut_blocks: set-A vertices first (requires a partitioned graph).
    - irregular_center: max-degree vertex at position L//2, distance from
      the center growing as degree falls; the two lowest degrees land at
      positions 0 and L-1.
    """
    L = g.L
    if kind == "identity":
        return np.arange(L, dtype=np.int64)
    if kind == "cut_blocks":
        if g.partition is None:
            raise GraphError("cut_blocks ordering requires a partitioned graph")
        a = [v for v in range(L) if g.partition[v] == 0]
        b = [v for v in range(L) if g.partition[v] == 1]
        return np.asarray(a + b, dtype=np.int64)
    if kind == "irregular_center":
        deg = g.degrees()
        by_degree = sorted(range(L), key=lambda v: (-int(deg[v]), v))
        center = L // 2
        slots = [center]
        for d in range(1, L):
            left, right = center - d, center + d
            pair = [left, right] if L % 2 == 0 else [right, left]
            slots.extend(s for s in pair if 0 <= s < L)
        order = np.empty(L, dtype=np.int64)
        for vertex, pos in zip(by_degree, slots):
            order[pos] = vertex
        return order
    raise GraphError(f"unknown ordering kind {kind!r}")


# ---------------------------------------------------------------------------
# JSON graph files


def write_graph_json(g: Graph, path: str) -> None:
    """Write {"L": ..., "edges": ..., "partition": ...} atomically."""
    doc: dict = {"L": g.L, "edges": [list(e) for e in g.edges]}
    if g.partition is not None:
        doc["partition"] = list(g.partition)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, separators=(",", ":"))
        fh.write("\n")
    os.replace(tmp, path)


def read_graph_json(path: str) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    unknown = set(doc) - {"L", "edges", "partition"}
    if unknown:
        raise GraphError(f"unknown graph-file keys: {sorted(unknown)}")
    edges = tuple((int(u), int(v)) for u, v in doc["edges"])
    part = doc.get("partition")
    return Graph(int(doc["L"]), edges,
                 None if part is None else tuple(int(t) for t in part))
