"""Theoretical intervals, Monte Carlo sweeps, ranking, convergence."""
import math
from fractions import Fraction

import numpy as np
import pytest

from defect_robust import (
    BUILTIN_TEMPLATE_NAMES,
    DefectSpec,
    NoiseSpec,
    OrientationField,
    PeriodMode,
    SweepConfig,
    add_noise,
    analytic_path_robustness,
    builtin_template,
    center_placement,
    convergence_study,
    derive_seed,
    estimate_charge,
    normalize_and_rank,
    path_robustness,
    run_sweep,
    synth_defect_field,
    theoretical_interval,
)

NEM = PeriodMode.NEMATIC
HALF = Fraction(1, 2)


class TestAnalyticRobustness:
    def test_matches_synthesized_field(self):
        # the analytic per-edge formula must agree with building the field
        # and measuring it
        t = builtin_template("2x2")
        centers = np.array([[0.73, 1.21], [1.49, 0.51], [1.03, 0.97]])
        r = analytic_path_robustness(t, centers, HALF)
        f_dummy = OrientationField(nx=16, ny=16, h=1.0, mode=NEM, angles=np.zeros((16, 16)))
        pl = center_placement(t, f_dummy)
        for k, c in enumerate(centers):
            cx, cy = c[0] + pl.offset[0], c[1] + pl.offset[1]
            f = synth_defect_field(DefectSpec(charge=HALF, center=(cx, cy)), 16, 16)
            rep = path_robustness(f, pl.path())
            assert r[k] == pytest.approx(rep.path_robustness, abs=1e-12)

    def test_square1_centroid_value(self):
        r = analytic_path_robustness(builtin_template("single"), [(0.5, 0.5)], HALF)
        assert r[0] == pytest.approx(math.pi / 4)


class TestTheoreticalInterval:
    def test_bounds_are_ordered_and_in_range(self):
        for name in BUILTIN_TEMPLATE_NAMES:
            iv = theoretical_interval(builtin_template(name), HALF, oracle_density=60)
            assert 0.0 <= iv.lower <= iv.upper <= math.pi / 2 + 1e-12
            assert iv.n_oracle_samples > 0

    def test_lower_bound_ordering(self):
        # larger templates keep the defect farther from the path
        low = {n: theoretical_interval(builtin_template(n), HALF, oracle_density=120).lower
               for n in ("single", "2x2", "3x3")}
        assert low["3x3"] > low["2x2"] > low["single"]

    def test_refinement_only_widens(self):
        for name in ("2x2", "cross"):
            t = builtin_template(name)
            coarse = theoretical_interval(t, HALF, oracle_density=51)
            fine = theoretical_interval(t, HALF, oracle_density=101)
            assert fine.lower <= coarse.lower + 1e-12
            assert fine.upper >= coarse.upper - 1e-12

    def test_density_validation(self):
        with pytest.raises(ValueError):
            theoretical_interval(builtin_template("single"), HALF, oracle_density=1)


def _small_config(**kw):
    defaults = dict(templates=("single", "2x2", "cross"), n_centers=300,
                    noise_amplitudes=(0.0, 0.2), n_noise_realizations=3)
    defaults.update(kw)
    return SweepConfig(**defaults)


class TestRunSweep:
    def test_block_shapes_and_determinism(self):
        cfg = _small_config()
        res1 = run_sweep(cfg)
        res2 = run_sweep(_small_config())
        for (name, amp), blk in res1.blocks.items():
            n = cfg.n_centers * (1 if amp == 0.0 else cfg.n_noise_realizations)
            assert len(blk.robustness) == n
            assert np.array_equal(blk.robustness, res2.blocks[(name, amp)].robustness)
            assert np.array_equal(blk.center_x, res2.blocks[(name, amp)].center_x)

    def test_seed_changes_samples(self):
        a = run_sweep(_small_config())
        b = run_sweep(_small_config(base_seed=1))
        blk_a = a.block("2x2", 0.0)
        blk_b = b.block("2x2", 0.0)
        assert not np.array_equal(blk_a.center_x, blk_b.center_x)

    def test_centers_in_central_unit_square(self):
        res = run_sweep(_small_config())
        for t in res.config.templates:
            pl_off = res.placements[t.name]
            cx0 = t.centroid[0] + pl_off[0]
            cy0 = t.centroid[1] + pl_off[1]
            blk = res.block(t.name, 0.0)
            assert np.all(np.abs(blk.center_x - cx0) <= 0.5)
            assert np.all(np.abs(blk.center_y - cy0) <= 0.5)

    def test_matches_public_field_pipeline(self):
        # sweeping via path-vertex evaluation equals synthesizing the field,
        # adding noise, and measuring -- bit for bit
        cfg = _small_config(templates=("cross",), n_centers=4)
        res = run_sweep(cfg)
        t = res.config.templates[0]
        pl = center_placement(t, OrientationField(nx=32, ny=32, h=1.0, mode=NEM,
                                                  angles=np.zeros((32, 32))))
        clean = res.block("cross", 0.0)
        noisy = res.block("cross", 0.2)
        for i in range(4):
            f = synth_defect_field(DefectSpec(charge=HALF,
                                              center=(clean.center_x[i], clean.center_y[i])),
                                   32, 32)
            assert path_robustness(f, pl.path()).path_robustness == clean.robustness[i]
            assert float(estimate_charge(f, pl.path()).charge) == clean.charge[i]
            for r in range(cfg.n_noise_realizations):
                g = add_noise(f, NoiseSpec(amplitude=0.2, seed=derive_seed(0, 3, i, r)))
                j = i * cfg.n_noise_realizations + r
                assert path_robustness(g, pl.path()).path_robustness == noisy.robustness[j]

    def test_noise_free_agreement_is_exact(self):
        res = run_sweep(_small_config())
        for t in res.config.templates:
            assert res.agreement[(t.name, 0.0)] == 1.0

    def test_paired_noise_perturbation_bound(self):
        cfg = _small_config()
        res = run_sweep(cfg)
        for t in cfg.templates:
            clean = np.repeat(res.block(t.name, 0.0).robustness, cfg.n_noise_realizations)
            noisy = res.block(t.name, 0.2).robustness
            assert np.max(np.abs(noisy - clean)) <= 2 * 0.2 + 1e-12

    def test_config_validation(self):
        with pytest.raises(ValueError):
            _small_config(n_centers=0)
        with pytest.raises(ValueError):
            _small_config(noise_amplitudes=(-0.1,))
        with pytest.raises(ValueError):
            _small_config(charge=Fraction(1, 3))
        with pytest.raises(ValueError):
            _small_config(templates=("3x3ext",), nx=6, ny=6)  # no 1-cell margin


class TestRanking:
    def test_single_is_last_and_entries_sorted(self):
        res = run_sweep(_small_config())
        rank = normalize_and_rank(res)
        for amp in (0.0, 0.2):
            entries = rank.ranking(amp)
            assert entries[-1].template == "single"
            mins = [e.min_normalized for e in entries]
            assert mins == sorted(mins, reverse=True)
            assert rank.top(amp) == entries[0].template

    def test_normalization_uses_resolution(self):
        res = run_sweep(_small_config())
        rank = normalize_and_rank(res)
        for e in rank.ranking(0.0):
            blk = res.block(e.template, 0.0)
            assert e.min_normalized == pytest.approx(
                float(np.min(blk.robustness)) / e.resolution)


class TestConvergence:
    def test_rows_and_monotone_lower(self):
        rows = convergence_study(HALF, (1, 2, 4, 8), oracle_density=80)
        assert [r.n for r in rows] == [1, 2, 4, 8]
        lows = [r.lower for r in rows]
        assert lows == sorted(lows)
        assert all(0.0 <= r.lower <= r.upper <= math.pi / 2 + 1e-12 for r in rows)

    def test_square1_upper_is_quarter_pi(self):
        # at the cell centroid every edge subtends pi/2, giving pi/2 - q*pi/2
        rows = convergence_study(HALF, (1,), oracle_density=81)
        assert rows[0].upper == pytest.approx(math.pi / 4)
        assert rows[0].analytic_lower_bound == pytest.approx(math.pi / 4)

    def test_bound_formula(self):
        rows = convergence_study(HALF, (8,), oracle_density=40)
        expected = math.pi / 2 - 0.5 * math.asin(1.0 / 3.5)
        assert rows[0].analytic_lower_bound == pytest.approx(expected)
        assert rows[0].r_min == pytest.approx(3.5)
