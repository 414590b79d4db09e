import numpy as np
import pytest

from spingraph.graphs import (EnsembleSpec, chain_graph, complete_graph,
                              generate)
from spingraph.hamiltonian import (CouplingParams, HamiltonianError,
                                   attainable_sectors, build,
                                   build_collective_pair, build_difference,
                                   hermiticity_defect, preset_tfi, preset_xxz,
                                   sector_basis)
from spingraph.seeding import Seed
from spingraph.solvers import complete_xxz_energy, dense_spectrum

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]])


def kron_chain(ops):
    """ops[v] acts on vertex v; vertex 0 is the least significant bit."""
    out = ops[-1]
    for op in reversed(ops[:-1]):
        out = np.kron(out, op)
    return out


def dense_reference(g, params):
    """Independent dense assembly from literal Pauli matrices."""
    L, dim = g.L, 1 << g.L
    # basis convention: bit set = spin up; sigma matrices above use the
    # (up, down) ordering so site operators need the basis flip
    flip = np.array([[0.0, 1.0], [1.0, 0.0]])
    sx = flip @ PAULI_X @ flip
    sy = flip @ PAULI_Y @ flip
    sz = flip @ PAULI_Z @ flip
    eye = np.eye(2)
    scale = 1.0 if params.pauli else 0.5

    def site(op, v):
        return kron_chain([op if u == v else eye for u in range(L)])

    H = np.zeros((dim, dim), dtype=complex)
    pref = g.L / g.n_edges
    for (u, v) in g.edges:
        H += pref * (params.jx * scale ** 2 * site(sx, u) @ site(sx, v)
                     + params.jy * scale ** 2 * site(sy, u) @ site(sy, v)
                     + params.jz * scale ** 2 * site(sz, u) @ site(sz, v))
    for v in range(L):
        H += (params.wx * scale * site(sx, v)
              + params.wy * scale * site(sy, v)
              + params.wz * scale * site(sz, v))
    return H


class TestBuild:
    def test_zero_couplings_zero_operator(self):
        op = build(complete_graph(4), CouplingParams())
        assert np.max(np.abs(op.to_dense())) == 0.0

    def test_chain2_pauli_zz(self):
        op = build(chain_graph(2), CouplingParams(jz=1.0, pauli=True))
        assert np.allclose(sorted(dense_spectrum(op)), [-2, -2, 2, 2])

    def test_complete_graph_diagonal_identity(self):
        # every basis state is an eigenvector with (M^2 - L)/(L - 1)
        for L in (4, 6, 8, 10, 12, 14):
            op = build(complete_graph(L), CouplingParams(jz=1.0, pauli=True))
            states = np.arange(1 << L, dtype=np.int64)
            M = 2 * np.bitwise_count(states).astype(np.int64) - L
            diag = op._diag
            assert np.allclose(diag, (M * M - L) / (L - 1), atol=1e-12)

    def test_empty_graph_rejected(self):
        from spingraph.graphs import Graph
        with pytest.raises(HamiltonianError, match="scaling undefined"):
            build(Graph(3, ()), CouplingParams(jz=1.0))

    def test_matches_literal_pauli_reference(self):
        rng = np.random.default_rng(42)
        for trial in range(6):
            g = generate(EnsembleSpec("er", p=0.6), 5, Seed(trial))
            if g.n_edges == 0:
                continue
            params = CouplingParams(*rng.uniform(-2, 2, 6), s=0.5,
                                    pauli=bool(trial % 2))
            H = build(g, params).to_dense()
            Href = dense_reference(g, params)
            assert np.max(np.abs(H - Href)) < 1e-12

    def test_spin1_two_site_xyz(self):
        s1x = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]]) / np.sqrt(2)
        s1y = np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]]) / np.sqrt(2)
        s1z = np.diag([-1.0, 0.0, 1.0])  # ascending m matches the encoding
        jx, jy, jz = 0.8, -0.4, 1.3
        expected = 2 * (jx * np.kron(s1x, s1x)
                        + jy * np.real(np.kron(s1y, s1y))
                        + jz * np.kron(s1z, s1z))
        op = build(chain_graph(2), CouplingParams(jx=jx, jy=jy, jz=jz, s=1.0))
        assert np.max(np.abs(op.to_dense() - expected)) < 1e-12

    def test_dimension_cap(self):
        with pytest.raises(HamiltonianError, match="cap"):
            build(complete_graph(8), CouplingParams(jz=1.0), dim_cap=100)


class TestPresets:
    def test_xxz_fields(self):
        p = preset_xxz(1.0, 1.5)
        assert (p.jx, p.jy, p.jz) == (-1.0, -1.0, 1.5)
        assert (p.wx, p.wy, p.wz) == (0.0, 0.0, 0.0)
        assert p.pauli and p.s == 0.5
        assert p.conserves_sz

    def test_xxz_pure_xy(self):
        p = preset_xxz(1.0, 0.0)
        assert p.jz == 0.0

    def test_tfi_classical_limit(self):
        p = preset_tfi(0.0, False)
        assert p.jz == -1.0 and p.wx == 0.0 and not p.z_break

    def test_tfi_break_term_scales_with_l(self):
        p = preset_tfi(1.0, True)
        for L in (4, 10):
            op = build(complete_graph(L), p)
            # field z entry carries 1/(200 L)
            assert op.field[2] == pytest.approx(1.0 / (200 * L))

    def test_invalid_spin(self):
        with pytest.raises(HamiltonianError):
            CouplingParams(s=0.75)


class TestHermiticity:
    @pytest.mark.parametrize("kind,extra", [
        ("complete", {}), ("chain", {}), ("er", {"p": 0.6}),
        ("cut", {"lam": 0.5, "p1": 0.7, "p2": 0.4}),
        ("uniform_degree", {}), ("antiregular", {}),
    ])
    def test_random_params_hermitian(self, kind, extra):
        rng = np.random.default_rng(hash(kind) % 2 ** 32)
        spec = EnsembleSpec(kind, **extra)
        for trial in range(50):
            L = int(rng.integers(4, 9))
            if kind == "cut" and L % 2:
                L += 1
            g = generate(spec, L, Seed(trial))
            if g.n_edges == 0:
                continue
            params = CouplingParams(*rng.uniform(-2, 2, 6), s=0.5, pauli=True)
            op = build(g, params)
            assert hermiticity_defect(op, n_probes=2, seed=trial) < 1e-12


class TestSectors:
    def test_counts(self):
        assert sector_basis(4, 0.5, 0).dim == 6
        assert sector_basis(4, 0.5, 4).dim == 1
        assert sector_basis(3, 1.0, 0).dim == 7

    def test_unattainable(self):
        with pytest.raises(HamiltonianError):
            sector_basis(4, 0.5, 3)
        with pytest.raises(HamiltonianError):
            sector_basis(4, 0.5, 6)

    def test_sector_sizes_sum_to_dim(self):
        for L, s in ((6, 0.5), (3, 1.0), (2, 1.5)):
            total = sum(sector_basis(L, s, M).dim
                        for M in attainable_sectors(L, s))
            assert total == (round(2 * s) + 1) ** L

    def test_xxz_sector_closure(self):
        # matvec of an embedded sector vector stays exactly in the sector
        g = generate(EnsembleSpec("er", p=0.7), 8, Seed(4))
        op = build(g, preset_xxz(1.0, 1.3))
        basis = sector_basis(8, 0.5, 2)
        rng = np.random.default_rng(0)
        psi = np.zeros(1 << 8)
        psi[basis.states] = rng.standard_normal(basis.dim)
        out = op.matvec(psi)
        outside = np.delete(out, basis.states)
        assert np.max(np.abs(outside)) == 0.0

    def test_sector_matvec_matches_projection(self):
        g = generate(EnsembleSpec("er", p=0.7), 8, Seed(4))
        op = build(g, preset_xxz(1.0, 1.3))
        block = op.restrict(0)
        H = op.to_dense()
        states = block.sector.states
        Hblock = H[np.ix_(states, states)]
        assert np.max(np.abs(block.to_dense() - Hblock)) < 1e-12

    def test_sector_requires_conservation(self):
        g = complete_graph(4)
        op = build(g, preset_tfi(1.0, False))
        with pytest.raises(HamiltonianError):
            op.restrict(0)


class TestDifference:
    def test_complete_gives_zero(self):
        op = build_difference(complete_graph(6), preset_xxz(1.0, 1.5))
        assert np.max(np.abs(op.to_dense())) == 0.0

    def test_l2_single_edge_zero(self):
        op = build_difference(chain_graph(2), preset_xxz(1.0, 0.7))
        assert np.max(np.abs(op.to_dense())) == 0.0

    def test_linearity_on_random_vectors(self):
        g = generate(EnsembleSpec("er", p=0.5), 10, Seed(17))
        params = preset_xxz(1.0, 1.5)
        D = build_difference(g, params)
        Hg = build(g, params)
        Hc = build(complete_graph(10), params)
        rng = np.random.default_rng(3)
        for _ in range(20):
            x = rng.standard_normal(1 << 10)
            lhs = D.matvec(x) + Hg.matvec(x)
            rhs = Hc.matvec(x)
            assert np.max(np.abs(lhs - rhs)) < 1e-12 * np.linalg.norm(x)


class TestCollectivePair:
    def test_dimension(self):
        op = build_collective_pair(4, 0.5, 0.5, 1.0, preset_xxz(1.0, 1.0))
        assert op.dim == 9

    def test_equal_probabilities_match_complete_graph(self):
        # lam = 1/2, p1 = p2 = p: spectrum equals the complete-graph XXZ
        # levels lambda_{S,M}, one copy per (S, M)
        for L, p, delta in ((6, 0.7, 1.5), (8, 1.0, 0.4)):
            op = build_collective_pair(L, 0.5, p, p, preset_xxz(1.0, delta))
            got = np.sort(np.linalg.eigvalsh(op.matrix))
            want = np.sort([complete_xxz_energy(L, 1.0, delta, S, M)
                            for S in range(L // 2 + 1)
                            for M in range(-2 * S, 2 * S + 1, 2)])
            assert np.max(np.abs(got - want)) < 1e-10

    def test_p2_zero_block_decouples(self):
        op = build_collective_pair(8, 0.5, 0.6, 0.0, preset_xxz(1.0, 1.5))
        T = op.matrix.reshape(5, 5, 5, 5)
        for a in range(5):
            for ap in range(5):
                if a == ap:
                    continue
                for b in range(5):
                    for bp in range(5):
                        if b != bp:
                            assert T[a, b, ap, bp] == 0.0

    def test_non_integer_lam_l(self):
        with pytest.raises(HamiltonianError):
            build_collective_pair(5, 0.5, 0.5, 1.0, preset_xxz(1.0, 1.0))
