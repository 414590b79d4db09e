import math

import numpy as np
import pytest

from spingraph.graphs import EnsembleSpec, chain_graph, complete_graph, generate
from spingraph.hamiltonian import (CouplingParams, DenseOperator, build,
                                   build_difference, preset_tfi, preset_xxz)
from spingraph.seeding import Seed
from spingraph.solvers import (SolverError, complete_xxz_energy,
                               complete_xxz_spectrum, critical_point,
                               dense_spectrum, extreme_abs_eigenvalue,
                               free_energy_density, lanczos_ground,
                               semiclassical_pair_minimize, sector_spectrum,
                               spectral_density, spectrum_multiset,
                               spin_multiplicity, tfi_meanfield)


class TestDenseSpectrum:
    def test_zero_operator(self):
        vals = dense_spectrum(DenseOperator(np.zeros((4, 4))))
        assert np.allclose(vals, 0.0)

    def test_chain2(self):
        op = build(chain_graph(2), CouplingParams(jz=1.0, pauli=True))
        assert np.allclose(dense_spectrum(op), [-2, -2, 2, 2])

    def test_reconstruction(self):
        g = generate(EnsembleSpec("er", p=0.5), 8, Seed(1))
        op = build(g, preset_xxz(1.0, 0.8))
        vals, vecs = dense_spectrum(op, vectors=True)
        H = op.to_dense()
        norm = np.linalg.norm(H, 2)
        for i in (0, 37, 255):
            r = np.linalg.norm(H @ vecs[:, i] - vals[i] * vecs[:, i])
            assert r <= 1e-9 * max(norm, 1.0)

    def test_capacity(self):
        with pytest.raises(SolverError):
            dense_spectrum(DenseOperator(np.zeros((8, 8))), cap=4)


class TestLanczos:
    def test_diagonal_operator(self):
        r = lanczos_ground(DenseOperator(np.diag([3.0, -1.0, 4.0])), seed=1)
        assert r.energy == pytest.approx(-1.0)

    def test_complete_graph_matches_analytic(self):
        op = build(complete_graph(10), preset_xxz(1.0, 1.0))
        r = lanczos_ground(op, seed=3)
        want = min(e.energy for e in complete_xxz_spectrum(10, 1.0, 1.0))
        assert r.energy == pytest.approx(want, abs=1e-9)
        assert r.sector == 0

    def test_er_matches_dense(self):
        g = generate(EnsembleSpec("er", p=0.5), 12, Seed(11))
        op = build(g, preset_xxz(1.0, 1.0))
        r = lanczos_ground(op, seed=5)
        dense_min = sector_spectrum(op)[0]
        assert r.energy == pytest.approx(dense_min, abs=1e-8)

    def test_fifty_random_instances_match_dense(self):
        rng = np.random.default_rng(7)
        kinds = [EnsembleSpec("er", p=0.6),
                 EnsembleSpec("cut", lam=0.5, p1=0.8, p2=0.3),
                 EnsembleSpec("uniform_degree")]
        for trial in range(50):
            L = int(rng.integers(5, 10))
            spec = kinds[trial % len(kinds)]
            if spec.kind == "cut" and L % 2:
                L += 1
            g = generate(spec, L, Seed(1000 + trial))
            if g.n_edges == 0:
                continue
            params = CouplingParams(*rng.uniform(-1.5, 1.5, 6), s=0.5,
                                    pauli=True)
            op = build(g, params)
            r = lanczos_ground(op, seed=trial, method="lanczos", tol=1e-10)
            dense_min = float(dense_spectrum(op)[0])
            assert r.energy == pytest.approx(dense_min, abs=1e-8)
            assert r.residual <= 1e-8

    def test_residual_and_norm_invariants(self):
        g = generate(EnsembleSpec("er", p=0.7), 9, Seed(2))
        op = build(g, preset_tfi(1.2, True))
        r = lanczos_ground(op, seed=9, method="lanczos")
        assert abs(np.linalg.norm(r.state.amplitudes) - 1.0) < 1e-12
        assert r.residual <= 1e-10

    def test_sector_argument(self):
        op = build(complete_graph(8), preset_xxz(1.0, 1.5))
        r = lanczos_ground(op, sector=4, seed=1)
        want = min(complete_xxz_energy(8, 1.0, 1.5, S, 4)
                   for S in range(2, 5))
        assert r.energy == pytest.approx(want, abs=1e-9)
        assert r.sector == 4

    def test_degenerate_flag_for_nonzero_m(self):
        # deep AFM regime on a cut graph: ground sector has |M| > 0 partner
        g = generate(EnsembleSpec("cut", lam=0.5, p1=0.5, p2=1.0), 8, Seed(5))
        op = build(g, preset_xxz(1.0, 8.0))
        r = lanczos_ground(op, seed=2)
        if r.sector != 0:
            assert r.degenerate

    def test_nonconvergence_raises(self):
        g = generate(EnsembleSpec("er", p=0.5), 10, Seed(3))
        op = build(g, preset_xxz(1.0, 0.5))
        with pytest.raises(SolverError, match="residual"):
            lanczos_ground(op, sector=0, seed=1, method="lanczos",
                           tol=1e-14, max_iter=4)


class TestExtremeAbs:
    def test_diagonal(self):
        assert extreme_abs_eigenvalue(
            DenseOperator(np.diag([1.0, -3.0, 2.0]))) == pytest.approx(-3.0)

    def test_zero_operator(self):
        assert extreme_abs_eigenvalue(DenseOperator(np.zeros((6, 6)))) == 0.0

    def test_er_p1_difference_zero(self):
        op = build_difference(generate(EnsembleSpec("er", p=1.0), 8, Seed(1)),
                              preset_xxz(1.0, 1.5))
        assert extreme_abs_eigenvalue(op, seed=4) == pytest.approx(0.0,
                                                                   abs=1e-12)

    def test_matches_dense_maxabs(self):
        rng = np.random.default_rng(17)
        for trial in range(12):
            L = int(rng.integers(6, 12))
            g = generate(EnsembleSpec("er", p=0.5), L, Seed(300 + trial))
            if g.n_edges == 0:
                continue
            params = CouplingParams(*rng.uniform(-1.5, 1.5, 3), s=0.5,
                                    pauli=True)
            op = build_difference(g, params)
            vals = dense_spectrum(op)
            want = float(vals[int(np.argmax(np.abs(vals)))])
            rng2 = np.random.default_rng(trial)
            v0 = rng2.standard_normal(op.dim)
            from spingraph.solvers import _lanczos_tridiag
            got, _, _, ok = _lanczos_tridiag(op.matvec, op.dim, v0, 1e-8,
                                             600, "abs")
            assert ok
            assert abs(abs(got) - abs(want)) < 1e-8


class TestCompleteXxzSpectrum:
    def test_l4_minimum(self):
        entries = complete_xxz_spectrum(4, 1.0, 1.5)
        lam_min = min(e.energy for e in entries)
        assert lam_min == pytest.approx(-22.0 / 3.0, abs=1e-12)
        best = min(entries, key=lambda e: e.energy)
        assert (best.S, best.M) == (2, 0)

    def test_degeneracy_sum_exact(self):
        for L in range(2, 25, 2):
            entries = complete_xxz_spectrum(L, 1.0, 1.5)
            assert sum(e.degeneracy for e in entries) == 2 ** L

    def test_multiplicity_matches_brute_force(self):
        # multiplicities validated against dense ED level counting
        for L in (4, 6, 8):
            delta = 1.3
            op = build(complete_graph(L), preset_xxz(1.0, delta))
            dense = dense_spectrum(op)
            analytic = spectrum_multiset(complete_xxz_spectrum(L, 1.0, delta))
            assert dense.shape == analytic.shape
            assert np.max(np.abs(np.sort(dense) - analytic)) < 1e-10

    def test_multiplicity_formula(self):
        # S-multiplet counts: C(L, L/2-S) - C(L, L/2-S-1)
        assert spin_multiplicity(4, 2) == 1
        assert spin_multiplicity(4, 1) == 3
        assert spin_multiplicity(4, 0) == 2

    def test_odd_l_rejected(self):
        with pytest.raises(SolverError):
            complete_xxz_spectrum(5, 1.0, 1.0)


class TestSpectralDensity:
    def test_masses_sum_to_one(self):
        for L in (8, 16, 32):
            d = spectral_density(L, 1.0, 1.5, n_bins=40)
            assert abs(d.masses.sum() - 1.0) < 1e-12

    def test_l4_support(self):
        d = spectral_density(4, 1.0, 1.5, n_bins=400)
        levels = {e.energy / 4 for e in complete_xxz_spectrum(4, 1.0, 1.5)}
        occupied = np.nonzero(d.masses)[0]
        for i in occupied:
            lo, hi = d.bin_edges[i], d.bin_edges[i + 1]
            assert any(lo - 1e-12 <= x <= hi + 1e-12 for x in levels)

    def test_narrowing_with_l(self):
        # probability mass at |E/L| < 0.5 grows with L (delta-function limit)
        def central_mass(L):
            total = 1 << L
            return sum(e.degeneracy for e in complete_xxz_spectrum(L, 1.0, 1.5)
                       if abs(e.energy / L) < 0.5) / total
        m8, m16, m32 = central_mass(8), central_mass(16), central_mass(32)
        assert m8 < m16 < m32


class TestFreeEnergy:
    def test_single_spin(self):
        f = free_energy_density([-1.0, 1.0], 1, 1.0)
        assert f == pytest.approx(-math.log(2 * math.cosh(1.0)), abs=1e-12)

    def test_large_beta_ground_state_dominance(self):
        f = free_energy_density([0.0, 5.0], 1, 200.0)
        assert f == pytest.approx(0.0, abs=1e-12)

    def test_shift_identity(self):
        eigs = np.array([-2.0, 0.3, 1.7, 4.0])
        f0 = free_energy_density(eigs, 2, 0.7)
        f1 = free_energy_density(eigs + 5.0, 2, 0.7)
        assert f1 - f0 == pytest.approx(5.0 / 2, abs=1e-12)

    def test_monotone_in_beta_and_bounded(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            eigs = np.sort(rng.standard_normal(64) * 3)
            L = 6
            betas = [0.1, 0.5, 1.0, 5.0, 20.0, 100.0]
            fs = [free_energy_density(eigs, L, b) for b in betas]
            assert all(fs[i] <= fs[i + 1] + 1e-12 for i in range(len(fs) - 1))
            assert all(f <= eigs[0] / L + 1e-12 for f in fs)

    def test_beta_zero_rejected(self):
        with pytest.raises(SolverError):
            free_energy_density([1.0], 1, 0.0)


class TestSemiclassical:
    def test_delta_zero_is_xy(self):
        cfg = semiclassical_pair_minimize(0.5, 0.5, 1.0, 1.0, 0.0)
        assert cfg.phase == "xy"
        assert abs(cfg.n_a[2]) < 1e-9 and abs(cfg.n_b[2]) < 1e-9

    def test_deep_afm(self):
        cfg = semiclassical_pair_minimize(0.5, 0.5, 1.0, 1.0, 10.0)
        assert cfg.phase == "afm"
        assert cfg.n_a[2] * cfg.n_b[2] == pytest.approx(-1.0)

    def test_tie_at_critical_point(self):
        cfg = semiclassical_pair_minimize(0.5, 0.5, 1.0, 1.0, 3.0)
        assert cfg.degenerate

    def test_p2_zero_flagged(self):
        cfg = semiclassical_pair_minimize(0.5, 0.5, 0.0, 1.0, 1.0)
        assert cfg.degenerate

    def test_unit_vectors(self):
        cfg = semiclassical_pair_minimize(0.3, 0.4, 0.9, 1.0, 2.0)
        assert np.linalg.norm(cfg.n_a) == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.norm(cfg.n_b) == pytest.approx(1.0, abs=1e-12)

    def test_flip_agrees_with_formula_random_sweep(self):
        # 100 random parameter points: bisected flip matches Eq-form to 1e-9
        rng = np.random.default_rng(123)
        checked = 0
        while checked < 100:
            lam = rng.uniform(0.15, 0.85)
            p1 = rng.uniform(0.05, 1.0)
            p2 = rng.uniform(0.05, 1.0)
            dc = critical_point(lam, p1, p2, 1.0)
            if not math.isfinite(dc) or dc > 25.0:
                continue
            lo, hi = max(0.0, dc - 1.0), dc + 1.0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if semiclassical_pair_minimize(lam, p1, p2, 1.0,
                                               mid).phase == "xy":
                    lo = mid
                else:
                    hi = mid
                if hi - lo < 2.5e-10:
                    break
            assert abs(0.5 * (lo + hi) - dc) < 1e-9
            checked += 1


class TestCriticalPoint:
    def test_paper_point(self):
        assert critical_point(0.5, 0.5, 1.0, 1.0) == 3.0

    def test_trivial_cut_no_transition(self):
        assert critical_point(0.5, 0.8, 0.8, 1.0) == math.inf

    def test_j_scaling(self):
        assert critical_point(0.5, 0.5, 1.0, 2.0) == 6.0


class TestTfiMeanfield:
    def test_zero_field(self):
        mz, mx, e = tfi_meanfield(0.0)
        assert (mz, mx, e) == (1.0, 0.0, -1.0)

    def test_critical_field(self):
        mz, mx, e = tfi_meanfield(2.0)
        assert mz == pytest.approx(0.0, abs=1e-9)
        assert e == pytest.approx(-2.0, abs=1e-12)

    def test_intermediate(self):
        mz, mx, e = tfi_meanfield(1.0)
        assert mz == pytest.approx(math.sqrt(3) / 2, abs=1e-9)
        assert mx == pytest.approx(0.5, abs=1e-9)
        assert e == pytest.approx(-1.25, abs=1e-12)

    def test_above_critical(self):
        mz, mx, e = tfi_meanfield(3.0)
        assert mz == pytest.approx(0.0, abs=1e-9)
        assert mx == pytest.approx(1.0, abs=1e-9)
        assert e == pytest.approx(-3.0, abs=1e-12)
