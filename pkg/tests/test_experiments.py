import math

import numpy as np
import pytest

from interface_lab.config import default_config
from interface_lab.experiments import (
    ensemble_fpt,
    ensemble_summaries,
    run_experiment,
    run_fpt_experiment,
    run_kernel_check,
    run_martingale_experiment,
    run_occupation_experiment,
    run_pde_vs_mc,
    worker_count,
)
from interface_lab.report import summarize


class TestSummarize:
    def test_hand_values(self):
        s = summarize([1.0, 2.0, 3.0])
        assert s.mean == pytest.approx(2.0)
        assert s.se == pytest.approx(1.0 / math.sqrt(3.0), abs=1e-12)
        assert s.se == pytest.approx(0.57735, abs=1e-5)

    def test_constant_sample(self):
        s = summarize([0.5] * 10)  # dyadic so the mean is exact
        assert s.mean == 0.5
        assert s.se == 0.0
        s2 = summarize([4.2] * 10)
        assert s2.mean == pytest.approx(4.2, abs=1e-14)
        assert s2.se == pytest.approx(0.0, abs=1e-14)

    def test_two_values(self):
        s = summarize([0.0, 1.0])
        assert s.mean == 0.5
        assert s.se == pytest.approx(0.5, abs=1e-12)

    def test_ci_brackets_mean(self):
        s = summarize(np.linspace(0, 1, 50))
        lo, hi = s.ci95
        assert lo < s.mean < hi
        assert hi - s.mean == pytest.approx(1.96 * s.se)

    def test_insufficient_data(self):
        with pytest.raises(ValueError, match="at least 2"):
            summarize([1.0])


class TestEnsembles:
    def test_se_scales_like_inverse_sqrt_n(self):
        # occupation fractions at three sizes: se * sqrt(n) constant within 20%
        scaled = []
        for n in (1000, 4000, 16000):
            _, occ, _ = ensemble_summaries(2.0 / 3.0, 0.0, 0.01, 100, n, 5, 1)
            s = summarize(occ)
            scaled.append(s.se * math.sqrt(n))
        mid = np.median(scaled)
        assert all(abs(v - mid) / mid < 0.2 for v in scaled)

    def test_block_boundaries_do_not_matter(self):
        # same lane and seed: the first k paths are a prefix regardless of total
        a = ensemble_fpt(0.5, -1.0, 1.0, 0.01, 200, 700, 9, 3, True)
        b = ensemble_fpt(0.5, -1.0, 1.0, 0.01, 200, 2100, 9, 3, True)
        assert np.array_equal(a, b[:700], equal_nan=True)

    def test_worker_count_env(self, monkeypatch):
        monkeypatch.setenv("INTERFACE_LAB_THREADS", "2")
        assert worker_count() == 2
        monkeypatch.setenv("INTERFACE_LAB_THREADS", "0")
        assert worker_count() >= 1
        monkeypatch.setenv("INTERFACE_LAB_THREADS", "junk")
        with pytest.raises(ValueError):
            worker_count()


def tiny(name, **kw):
    base = dict(paths=4000, seed=11)
    base.update(kw)
    return default_config(name, **base)


def mc_ratio(report):
    return report.curves["survival_ratio"]["ratio_forward_over_reverse"]


class TestExperimentReports:
    def test_kernel_check_structure(self):
        rep = run_kernel_check(tiny("kernel-check", paths=20000))
        names = [d.name for d in rep.diagnostics]
        assert "sign_frequency_abs_error" in names
        assert "ks_distance" in names
        assert "normalization_residual" in names
        assert "chapman_kolmogorov_residual" in names
        assert rep.passed
        assert rep.config["seed"] == 11
        assert rep.alpha_star == pytest.approx(2.0 / 3.0)

    def test_fpt_structure(self):
        rep = run_fpt_experiment(tiny("fpt", dt=4e-3, pde_dt=2e-3,
                                      grid_nodes=1651, half_width=33.0))
        assert set(rep.curves) >= {"mc_survival", "pde_survival", "survival_ratio",
                                   "factored_bound"}
        t = rep.curves["mc_survival"]["t"]
        assert t[0] == 0.25 and t[-1] == 4.0
        surv = rep.curves["mc_survival"]["surv_forward"]
        assert all(0.0 <= v <= 1.0 for v in surv)
        assert all(a >= b for a, b in zip(surv, surv[1:]))

    def test_occupation_structure(self):
        rep = run_occupation_experiment(tiny("occupation", dt=4e-3, t_max=1.0))
        rows = rep.curves["occupation_sweep"]
        assert rows["lambda"] == [0.3, 2.0 / 3.0, 0.9]
        assert rep.config["lambda_critical"] == pytest.approx(2.0 / 3.0)
        # alpha_star column recomputed per swept lambda
        for lam, a in zip(rows["lambda"], rows["alpha_star"]):
            expected = lam * 1.0 / (lam * 1.0 + (1 - lam) * 2.0)
            assert a == pytest.approx(expected)

    def test_martingale_structure(self):
        rep = run_martingale_experiment(tiny("martingale", dt=4e-3))
        rows = rep.curves["martingale_grid"]
        assert len(rows["alpha"]) == 9  # 3 alphas x 3 test functions
        assert set(rows["f"]) == {"linear", "symmetric_quadratic", "mixed"}
        null_checks = [d for d in rep.diagnostics if d.name.startswith("null_residual")]
        assert len(null_checks) == 3
        # the +/-0.15 perturbations are detectable even at this reduced size
        rejections = [d for d in rep.diagnostics if d.name.startswith("rejection")]
        assert len(rejections) == 2 and all(d.passed for d in rejections)

    def test_symmetric_medium_curves_agree_at_every_grid_time(self):
        rep = run_fpt_experiment(tiny(
            "fpt", d_plus=2.0, d_minus=2.0, interface="half", paths=8000,
            dt=4e-3, pde_dt=2e-3, grid_nodes=1651, half_width=33.0,
        ))
        mc = rep.curves["mc_survival"]
        sa, se_a = np.asarray(mc["surv_forward"]), np.asarray(mc["se_forward"])
        sb, se_b = np.asarray(mc["surv_reverse"]), np.asarray(mc["se_reverse"])
        pooled = np.sqrt(se_a**2 + se_b**2)
        assert np.all(np.abs(sa - sb) <= 3.0 * pooled + 1e-12)
        ratio = [r for r in mc_ratio(rep) if r is not None]
        assert all(abs(r - 1.0) < 0.1 for r in ratio[4:])

    def test_occupation_fraction_tracks_alpha_star_over_horizons(self):
        # mean plus-side fraction equals alpha* at every horizon
        for i, t in enumerate((1.0, 2.0, 3.0)):
            n_steps = round(t / 4e-3)
            _, occ, _ = ensemble_summaries(2.0 / 3.0, 0.0, 4e-3, n_steps, 6000, 3, 20 + i)
            s = summarize(occ / (n_steps * 4e-3))
            assert abs(s.mean - 2.0 / 3.0) < 3.5 * s.se

    def test_pde_vs_mc_structure(self):
        rep = run_pde_vs_mc(tiny("pde-vs-mc", dt=4e-3, pde_dt=2e-3,
                                 grid_nodes=1701, half_width=17.0))
        rows = rep.curves["probe_comparison"]
        assert rows["probe_y"] == [-1.0, 0.0, 1.0]
        assert rep.config["alpha_canonical"] == pytest.approx(2.0 / 3.0)
        assert rep.config["alpha_flux_weight_literal"] == pytest.approx(0.8)

    def test_failed_assertion_recorded_not_raised(self):
        # a wrong alpha must produce a failing report, not an exception
        rep = run_pde_vs_mc(tiny("pde-vs-mc", dt=4e-3, pde_dt=2e-3, paths=20000,
                                 grid_nodes=1701, half_width=17.0,
                                 alpha_override=0.85))
        assert not rep.passed
        assert any(d.asserted and not d.passed for d in rep.diagnostics)


class TestDeterminism:
    @pytest.mark.parametrize("name,extra", [
        ("kernel-check", dict(paths=20000)),
        ("occupation", dict(paths=3000, dt=4e-3, t_max=1.0)),
    ])
    def test_repeat_and_worker_count_invariance(self, name, extra, monkeypatch):
        cfg = default_config(name, seed=13, **extra)
        monkeypatch.setenv("INTERFACE_LAB_THREADS", "1")
        r1 = run_experiment(cfg).to_json(include_wall_time=False)
        monkeypatch.setenv("INTERFACE_LAB_THREADS", "4")
        r4 = run_experiment(cfg).to_json(include_wall_time=False)
        assert r1 == r4
        r1b = run_experiment(cfg).to_json(include_wall_time=False)
        assert r1b == r4

    def test_seed_changes_results(self):
        a = run_occupation_experiment(tiny("occupation", dt=4e-3, t_max=1.0, seed=1))
        b = run_occupation_experiment(tiny("occupation", dt=4e-3, t_max=1.0, seed=2))
        assert a.to_json(include_wall_time=False) != b.to_json(include_wall_time=False)
