import json
import math

import numpy as np
import pytest

from ksnudge import (
    ErrorSeries,
    FeedbackLaw,
    LawKind,
    ScenarioConfig,
    chaotic_restart_state,
    convergence_time,
    decay_rate_windows,
    initial_condition,
    l2_norm,
    mode_error_snapshot,
    paper_methods,
    run_scenario,
    time_averaged_spectrum,
    write_artifacts,
)


def small_config(**kw):
    base = dict(n_points=128, dt=2.0**-8, t_end=3.0, sample_stride=8,
                snapshot_times=(1.0, 2.0), spectrum_window=(1.0, 3.0), restart_time=2.0)
    base.update(kw)
    return ScenarioConfig(**base)


def series(times, err):
    times = np.asarray(times, float)
    err = np.asarray(err, float)
    return ErrorSeries("x", times, err, err)


class TestConvergenceTime:
    def test_stays_below(self):
        t = np.arange(0, 41)
        err = np.where(t >= 20, 1e-15, 1e-3)
        assert convergence_time(series(t, err), 1e-13) == 20

    def test_never(self):
        assert convergence_time(series([0, 1, 2], [1, 1e-2, 1e-5]), 1e-13) is None

    def test_rebound(self):
        t = np.arange(0, 21)
        err = np.full(t.shape, 1e-3)
        err[10:12] = 1e-15
        err[15:] = 1e-15
        assert convergence_time(series(t, err), 1e-13) == 15

    def test_nan_tail_is_not_converged(self):
        assert convergence_time(series([0, 1, 2], [1, 1e-15, np.nan]), 1e-13) is None

    def test_threshold_monotone(self, rng):
        err = np.exp(-np.linspace(0, 40, 400) + rng.normal(0, 1, 400))
        s = series(np.linspace(0, 40, 400), err)
        previous = math.inf
        for thr in [1e-16, 1e-14, 1e-12, 1e-10, 1e-8]:
            t = convergence_time(s, thr)
            t = math.inf if t is None else t
            assert t <= previous
            previous = t

    def test_bad_threshold(self):
        with pytest.raises(ValueError):
            convergence_time(series([0], [1]), 0.0)


class TestSpectraAndSnapshots:
    def test_constant_trajectory(self):
        s = np.array([0, 1 + 1j, 0.5, 0])
        samples = np.stack([s] * 5)
        np.testing.assert_allclose(time_averaged_spectrum(samples, np.arange(5), (1, 3)), np.abs(s))

    def test_single_sample_window(self):
        samples = np.arange(12.0).reshape(3, 4)
        np.testing.assert_array_equal(time_averaged_spectrum(samples, [0, 1, 2], (0.5, 1.5)), samples[1])

    def test_empty_window(self):
        with pytest.raises(ValueError, match="no samples"):
            time_averaged_spectrum(np.zeros((2, 3)), [0, 1], (5, 6))

    def test_mode_error(self, grid):
        u = initial_condition(grid)
        np.testing.assert_array_equal(mode_error_snapshot(u, u), 0)
        np.testing.assert_array_equal(mode_error_snapshot(u, grid.zeros()), np.abs(u))


class TestDecayRates:
    def test_exponential(self):
        t = np.linspace(0, 30, 301)
        r1, r2 = decay_rate_windows(series(t, np.exp(-t)), (5, 15), (20, 26))
        assert r1 == pytest.approx(-1, rel=1e-12)
        assert r2 == pytest.approx(-1, rel=1e-12)

    def test_super_exponential(self):
        t = np.linspace(0, 5, 501)
        r1, r2 = decay_rate_windows(series(t, np.exp(-t**2)), (0.5, 1.5), (3, 4))
        assert abs(r2) > abs(r1)

    def test_rejects_floor(self):
        t = np.linspace(0, 30, 301)
        with pytest.raises(ValueError, match="at or below"):
            decay_rate_windows(series(t, np.exp(-2 * t)), (5, 15), (20, 26), floor=1e-13)
        err = np.exp(-t)
        err[250] = 0.0
        with pytest.raises(ValueError):
            decay_rate_windows(series(t, err), (5, 15), (20, 26))


class TestConfig:
    def test_defaults(self):
        cfg = ScenarioConfig()
        assert (cfg.n_points, cfg.lam, cfg.mu, cfg.mode_cutoff, cfg.t_end) == (8192, 2.0, 1.0, 32, 60.0)
        assert cfg.dt == 2.0**-13
        assert cfg.length == pytest.approx(32 * math.pi)
        assert [m.label for m in cfg.methods] == ["linear", "power_g0.1", "hybrid_g0.1", "cc_g0.1"]
        assert cfg.n_steps == 491520

    def test_mu_propagates(self):
        cfg = ScenarioConfig(mu=3.0, dt=1e-3)
        assert all(m.mu == 3.0 for m in cfg.methods)

    @pytest.mark.parametrize("kw,match", [
        (dict(mu=20000.0), "2/mu"),
        (dict(t_end=0.0), "t_end"),
        (dict(sample_stride=0), "sample_stride"),
        (dict(n_points=64, mode_cutoff=32), "mode_cutoff"),
        (dict(init="warm"), "init"),
        (dict(methods=(FeedbackLaw(LawKind.POWER, 0.1), FeedbackLaw(LawKind.POWER, 0.1))), "duplicate"),
    ])
    def test_invalid(self, kw, match):
        with pytest.raises(ValueError, match=match):
            ScenarioConfig(**kw)


class TestRunScenario:
    def test_structure(self):
        cfg = small_config()
        r = run_scenario(cfg)
        assert r.labels == [m.label for m in cfg.methods]
        n_samples = cfg.n_steps // cfg.sample_stride + 1
        for s in r.series.values():
            assert len(s.times) == len(s.err_l2) == len(s.err_h1) == n_samples
            assert np.all(np.diff(s.times) > 0)
        assert r.series["linear"].err_l2[0] == pytest.approx(math.sqrt(5 / 8))
        assert set(r.snapshots) == {1.0, 2.0}
        assert set(r.spectra) == {"reference", *r.labels}

    def test_deterministic(self):
        a = run_scenario(small_config())
        b = run_scenario(small_config())
        assert a.reference_digest == b.reference_digest
        for label in a.labels:
            np.testing.assert_array_equal(a.series[label].err_l2, b.series[label].err_l2)

    def test_method_independence(self):
        one = run_scenario(small_config(methods=(FeedbackLaw(LawKind.HYBRID, 0.1),)))
        many = run_scenario(small_config())
        assert one.reference_digest == many.reference_digest
        np.testing.assert_array_equal(one.series["hybrid_g0.1"].err_l2, many.series["hybrid_g0.1"].err_l2)
        np.testing.assert_array_equal(one.spectra["hybrid_g0.1"], many.spectra["hybrid_g0.1"])

    def test_parallel_matches_serial(self):
        cfg = small_config()
        serial = run_scenario(cfg)
        parallel = run_scenario(cfg, parallel=True, workers=2)
        assert serial.reference_digest == parallel.reference_digest
        assert serial.labels == parallel.labels
        for label in serial.labels:
            np.testing.assert_array_equal(serial.series[label].err_l2, parallel.series[label].err_l2)
            np.testing.assert_array_equal(serial.series[label].err_h1, parallel.series[label].err_h1)
            for ts in serial.snapshots:
                np.testing.assert_array_equal(serial.snapshots[ts][label], parallel.snapshots[ts][label])
        assert serial.convergence == parallel.convergence

    def test_no_feedback_does_not_decay(self):
        cfg = small_config(mu=0.0, methods=("linear",), t_end=5.0)
        err = run_scenario(cfg).series["linear"].err_l2
        assert err.min() > 0.5 * err[0]

    def test_blowup_is_reported_not_raised(self, monkeypatch):
        from ksnudge import harness

        real = harness.feedback_term

        def exploding(u, v, o, law, g):
            out = real(u, v, o, law, g)
            if law.kind is LawKind.CONCAVE_CONVEX:
                out = out * np.inf
            return out

        monkeypatch.setattr(harness, "feedback_term", exploding)
        r = run_scenario(small_config())
        assert r.blowup["cc_g0.1"] == 0.0
        assert r.convergence["cc_g0.1"] is None
        assert r.blowup["linear"] is None
        assert np.isfinite(r.series["linear"].err_l2).all()

    def test_chaotic_restart_state(self):
        cfg = small_config()
        s = chaotic_restart_state(cfg)
        assert s[0] == 0
        u0 = initial_condition(cfg.grid())
        assert l2_norm(s - u0) > 0.1
        np.testing.assert_array_equal(s, chaotic_restart_state(cfg))

    def test_chaotic_restart_run(self):
        cfg = small_config(init="chaotic_restart")
        r = run_scenario(cfg)
        expected = l2_norm(chaotic_restart_state(cfg))
        assert r.series["linear"].err_l2[0] == pytest.approx(expected)


class TestWriteArtifacts:
    def test_files_and_headers(self, tmp_path):
        cfg = small_config(methods=paper_methods()[:2])
        r = run_scenario(cfg)
        written = write_artifacts(r, tmp_path)
        names = {p.name for p in written}
        assert names == {
            "errors.csv", "spectrum_reference.csv", "spectrum_linear.csv", "spectrum_power_g0.1.csv",
            "mode_error_t1.csv", "mode_error_t2.csv", "summary.json",
        }
        lines = (tmp_path / "errors.csv").read_text().splitlines()
        assert lines[0] == "t,method,err_l2,err_h1"
        assert {line.split(",")[1] for line in lines[1:]} == {"linear", "power_g0.1"}
        assert len(lines) == 1 + 2 * len(r.times)
        assert (tmp_path / "spectrum_linear.csv").read_text().splitlines()[0] == "mode,k,amplitude"
        head = (tmp_path / "mode_error_t2.csv").read_text().splitlines()[0]
        assert head == "mode,k,linear,power_g0.1"

    def test_full_precision(self, tmp_path):
        r = run_scenario(small_config(methods=("linear",)))
        write_artifacts(r, tmp_path)
        row = (tmp_path / "errors.csv").read_text().splitlines()[5].split(",")
        assert float(row[2]) == r.series["linear"].err_l2[4]
        assert float(row[3]) == r.series["linear"].err_h1[4]

    def test_summary(self, tmp_path):
        r = run_scenario(small_config())
        write_artifacts(r, tmp_path)
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["step_count"] == r.n_steps
        assert summary["scenario"]["n_points"] == 128
        assert summary["convergence_time"] == {k: None for k in r.labels}
        assert summary["reference_digest"] == r.reference_digest
        assert "wall_clock_seconds" in summary

    def test_empty_method_list(self, tmp_path):
        r = run_scenario(small_config(methods=()))
        names = {p.name for p in write_artifacts(r, tmp_path)}
        assert names == {"errors.csv", "spectrum_reference.csv", "summary.json"}

    def test_rerun_identical_numbers(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        write_artifacts(run_scenario(small_config()), a)
        write_artifacts(run_scenario(small_config()), b)
        for p in a.glob("*.csv"):
            assert p.read_bytes() == (b / p.name).read_bytes()

    def test_speedups(self, tmp_path):
        r = run_scenario(small_config())
        r.convergence = {"linear": 49.8, "power_g0.1": 27.3, "hybrid_g0.1": None, "cc_g0.1": 17.4}
        assert r.speedups["cc_g0.1"] == pytest.approx(49.8 / 17.4)
        assert r.speedups["hybrid_g0.1"] is None
        assert r.speedups["linear"] == 1.0
        write_artifacts(r, tmp_path)
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["speedup_vs_linear"]["cc_g0.1"] == pytest.approx(2.862, abs=1e-3)

    def test_unwritable(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        r = run_scenario(small_config(methods=("linear",), t_end=0.1))
        with pytest.raises(OSError, match="file"):
            write_artifacts(r, blocker / "sub")
