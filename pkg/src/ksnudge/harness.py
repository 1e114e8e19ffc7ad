"""Lockstep assimilation experiments and their diagnostics.

One reference KSE trajectory is advanced together with one assimilated
trajectory per feedback law. Errors are sampled every ``sample_stride``
steps; convergence times, per-mode error snapshots and time-averaged
spectra are derived from the run and can be written to CSV/JSON.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .assimilation import FeedbackLaw, LawKind, Observer, feedback_term, stability_check
from .kse import DEFAULT_DT, BlowUpError, KseParams, etd1_step, initial_condition, precompute_etd
from .spectral import SpectralGrid, h1_norm, l2_norm, make_grid

__all__ = [
    "MACHINE_PRECISION",
    "ScenarioConfig",
    "ErrorSeries",
    "RunArtifacts",
    "run_scenario",
    "convergence_time",
    "time_averaged_spectrum",
    "mode_error_snapshot",
    "decay_rate_windows",
    "chaotic_restart_state",
    "write_artifacts",
]

log = logging.getLogger(__name__)

MACHINE_PRECISION = 1e-13
REFERENCE = "reference"


def paper_methods(gamma: float = 0.1, mu: float = 1.0) -> tuple[FeedbackLaw, ...]:
    """Linear AOT plus the power, hybrid and concave-convex laws."""
    return (
        FeedbackLaw(LawKind.LINEAR, 0.0, mu),
        FeedbackLaw(LawKind.POWER, gamma, mu),
        FeedbackLaw(LawKind.HYBRID, gamma, mu),
        FeedbackLaw(LawKind.CONCAVE_CONVEX, gamma, mu),
    )


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything that determines a run. Defaults are the 8192-point setup.

    The gain ``mu`` is shared: every law in ``methods`` is re-tagged with it.
    """

    n_points: int = 8192
    length: float = 32 * math.pi
    lam: float = 2.0
    dt: float = DEFAULT_DT
    t_end: float = 60.0
    mu: float = 1.0
    mode_cutoff: int = 32
    methods: tuple = field(default_factory=paper_methods)
    init: str = "fresh"
    v_init: str = "zero"
    sample_stride: int = 32
    threshold: float = MACHINE_PRECISION
    restart_time: float = 30.0
    snapshot_times: tuple = (4.0, 14.0, 24.0, 34.0)
    spectrum_window: tuple = (20.0, 60.0)
    decay_windows: tuple = ((5.0, 15.0), (20.0, 26.0))

    def __post_init__(self):
        methods = tuple(
            dataclasses.replace(m, mu=self.mu) if isinstance(m, FeedbackLaw)
            else FeedbackLaw(LawKind.parse(m), 0.0, self.mu)
            for m in self.methods
        )
        object.__setattr__(self, "methods", methods)
        for name in ("snapshot_times", "spectrum_window"):
            object.__setattr__(self, name, tuple(float(t) for t in getattr(self, name)))
        object.__setattr__(self, "decay_windows", tuple(tuple(map(float, w)) for w in self.decay_windows))
        self.validate()

    def validate(self) -> None:
        if not self.t_end > 0:
            raise ValueError(f"t_end must be positive, got {self.t_end!r}")
        if int(self.sample_stride) != self.sample_stride or self.sample_stride < 1:
            raise ValueError(f"sample_stride must be a positive integer, got {self.sample_stride!r}")
        if self.n_points % 2 or self.n_points < 8:
            raise ValueError(f"n_points must be an even integer >= 8, got {self.n_points!r}")
        if self.mode_cutoff > self.n_points // 3:
            raise ValueError(
                f"mode_cutoff {self.mode_cutoff} exceeds floor(n_points/3) = {self.n_points // 3}"
            )
        if self.init not in ("fresh", "chaotic_restart"):
            raise ValueError(f"init must be 'fresh' or 'chaotic_restart', got {self.init!r}")
        if self.v_init != "zero":
            raise ValueError(f"v_init must be 'zero', got {self.v_init!r}")
        if not self.threshold > 0:
            raise ValueError(f"threshold must be positive, got {self.threshold!r}")
        check = stability_check(self.mu, self.dt)
        if not check:
            raise ValueError(check.message)
        labels = [m.label for m in self.methods]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate methods in {labels}")
        KseParams(self.lam, self.dt)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    def grid(self) -> SpectralGrid:
        return make_grid(self.n_points, self.length)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["methods"] = [{"kind": m.kind.value, "gamma": m.gamma, "mu": m.mu} for m in self.methods]
        return d


@dataclass
class ErrorSeries:
    label: str
    times: np.ndarray
    err_l2: np.ndarray
    err_h1: np.ndarray


@dataclass
class RunArtifacts:
    config: ScenarioConfig
    times: np.ndarray
    reference_l2: np.ndarray
    series: dict
    convergence: dict
    final_error: dict
    blowup: dict
    snapshots: dict
    spectra: dict
    decay_rates: dict
    reference_digest: str
    n_steps: int
    final_states: dict = field(default_factory=dict)
    wall_clock: float = 0.0

    @property
    def labels(self) -> list:
        return list(self.series)

    @property
    def speedups(self) -> dict:
        """``t*(linear) / t*(method)`` where both converged."""
        base = self.convergence.get("linear")
        out = {}
        for label, t in self.convergence.items():
            out[label] = base / t if base is not None and t is not None and t > 0 else None
        return out

    def summary(self) -> dict:
        cfg = self.config
        return {
            "scenario": cfg.to_dict(),
            "methods": self.labels,
            "convergence_time": self.convergence,
            "final_error": self.final_error,
            "blowup_time": self.blowup,
            "speedup_vs_linear": self.speedups,
            "decay_rates": {k: list(v) if v is not None else None for k, v in self.decay_rates.items()},
            "reference_digest": self.reference_digest,
            "step_count": self.n_steps,
            "wall_clock_seconds": self.wall_clock,
        }


def convergence_time(e: ErrorSeries, threshold: float = MACHINE_PRECISION):
    """First sample time after which ``err_l2`` stays below ``threshold``; None if never."""
    if not threshold > 0:
        raise ValueError(f"threshold must be positive, got {threshold!r}")
    err = np.asarray(e.err_l2, dtype=float)
    if err.size == 0:
        return None
    # NaN compares False, so a blown-up tail counts as "not below"
    above = ~(err < threshold)
    if above[-1]:
        return None
    if not above.any():
        return float(e.times[0])
    return float(e.times[np.flatnonzero(above)[-1] + 1])


def time_averaged_spectrum(samples, times, window) -> np.ndarray:
    """Mean of ``|u_hat|`` over the samples whose time falls in ``window``."""
    t_a, t_b = window
    times = np.asarray(times, dtype=float)
    sel = (times >= t_a) & (times <= t_b)
    if not sel.any():
        raise ValueError(f"no samples in window [{t_a}, {t_b}]")
    return np.abs(np.asarray(samples)[sel]).mean(axis=0)


def mode_error_snapshot(u_hat, v_hat) -> np.ndarray:
    return np.abs(np.asarray(u_hat) - np.asarray(v_hat))


def _log_slope(times, err, window, floor):
    t_a, t_b = window
    sel = (times >= t_a) & (times <= t_b)
    if sel.sum() < 2:
        raise ValueError(f"fewer than two samples in window [{t_a}, {t_b}]")
    e = err[sel]
    if not (e > floor).all():
        raise ValueError(f"window [{t_a}, {t_b}] contains errors at or below {floor:g}")
    return float(np.polyfit(times[sel], np.log(e), 1)[0])


def decay_rate_windows(e: ErrorSeries, w1, w2, floor: float = 0.0):
    """Least-squares slopes of ``log(err_l2)`` against time over two windows.

    Raises ``ValueError`` if a window holds an error at or below ``floor``.
    """
    times = np.asarray(e.times, dtype=float)
    err = np.asarray(e.err_l2, dtype=float)
    return _log_slope(times, err, w1, floor), _log_slope(times, err, w2, floor)


def _fresh_setup(cfg: ScenarioConfig):
    g = cfg.grid()
    coeffs = precompute_etd(g, KseParams(cfg.lam, cfg.dt))
    return g, coeffs


def chaotic_restart_state(cfg: ScenarioConfig) -> np.ndarray:
    """Reference state at ``cfg.restart_time`` of a run from the smooth initial data."""
    g, coeffs = _fresh_setup(cfg)
    u = initial_condition(g)
    n = int(round(cfg.restart_time / cfg.dt))
    for step in range(n):
        u = etd1_step(u, coeffs, g, t=step * cfg.dt)
    return u


class _SpectrumAccumulator:
    def __init__(self, n_modes):
        self.total = np.zeros(n_modes)
        self.count = 0

    def add(self, s):
        self.total += np.abs(s)
        self.count += 1

    def mean(self):
        return self.total / self.count if self.count else None


def run_scenario(cfg: ScenarioConfig, *, parallel: bool = False, workers: int | None = None) -> RunArtifacts:
    """Run the reference and every assimilated trajectory over ``[0, t_end]``.

    With ``parallel=True`` each method runs in its own process, recomputing
    the (deterministic) reference; results are identical to the serial path.
    """
    if parallel and len(cfg.methods) > 1:
        return _run_parallel(cfg, workers)
    start = time.perf_counter()
    g, coeffs = _fresh_setup(cfg)
    obs = Observer(cfg.mode_cutoff)
    obs.check(g)
    u = chaotic_restart_state(cfg) if cfg.init == "chaotic_restart" else initial_condition(g)

    laws = list(cfg.methods)
    labels = [law.label for law in laws]
    vs = {label: g.zeros() for label in labels}
    alive = {label: True for label in labels}
    blowup = {label: None for label in labels}

    n_steps = cfg.n_steps
    stride = cfg.sample_stride
    sample_steps = set(range(0, n_steps + 1, stride)) | {n_steps}
    snap_steps = {}
    for ts in cfg.snapshot_times:
        if 0 <= ts <= cfg.t_end:
            snap_steps.setdefault(int(round(ts / cfg.dt)), []).append(ts)
    t_a, t_b = cfg.spectrum_window

    times = []
    ref_l2 = []
    err_l2 = {label: [] for label in labels}
    err_h1 = {label: [] for label in labels}
    spectra = {label: _SpectrumAccumulator(g.n_modes) for label in [REFERENCE, *labels]}
    snapshots = {}
    digest = hashlib.sha256()

    def record(step, u):
        t = step * cfg.dt
        times.append(t)
        ref_l2.append(float(l2_norm(u)))
        digest.update(u.tobytes())
        in_window = t_a <= t <= t_b
        if in_window:
            spectra[REFERENCE].add(u)
        for label in labels:
            if alive[label]:
                d = u - vs[label]
                err_l2[label].append(float(l2_norm(d)))
                err_h1[label].append(float(h1_norm(d, g)))
                if in_window:
                    spectra[label].add(vs[label])
            else:
                err_l2[label].append(math.nan)
                err_h1[label].append(math.nan)

    for step in range(n_steps + 1):
        if step in sample_steps:
            record(step, u)
        if step in snap_steps:
            for ts in snap_steps[step]:
                snapshots[ts] = {label: mode_error_snapshot(u, vs[label]) for label in labels if alive[label]}
        if step == n_steps:
            break
        t = step * cfg.dt
        with np.errstate(over="ignore", invalid="ignore"):
            forcings = {
                law.label: feedback_term(u, vs[law.label], obs, law, g) for law in laws if alive[law.label]
            }
        try:
            u_next = etd1_step(u, coeffs, g, t=t)
        except BlowUpError as exc:
            raise BlowUpError(t, REFERENCE) from exc
        for label, f in forcings.items():
            try:
                vs[label] = etd1_step(vs[label], coeffs, g, f, t=t)
            except BlowUpError:
                log.warning("method %s blew up at t=%g", label, t)
                alive[label] = False
                blowup[label] = t
        u = u_next

    times = np.asarray(times)
    series = {
        label: ErrorSeries(label, times, np.asarray(err_l2[label]), np.asarray(err_h1[label]))
        for label in labels
    }
    convergence = {label: convergence_time(s, cfg.threshold) for label, s in series.items()}
    final_error = {}
    for label, s in series.items():
        finite = s.err_l2[np.isfinite(s.err_l2)]
        final_error[label] = float(finite[-1]) if finite.size else None
    decay = {}
    w1, w2 = cfg.decay_windows
    for label, s in series.items():
        try:
            decay[label] = decay_rate_windows(s, w1, w2, floor=cfg.threshold)
        except ValueError:
            decay[label] = None
    return RunArtifacts(
        config=cfg,
        times=times,
        reference_l2=np.asarray(ref_l2),
        series=series,
        convergence=convergence,
        final_error=final_error,
        blowup=blowup,
        snapshots=snapshots,
        spectra={label: acc.mean() for label, acc in spectra.items() if acc.count},
        decay_rates=decay,
        reference_digest=digest.hexdigest(),
        n_steps=n_steps,
        final_states={REFERENCE: u, **vs},
        wall_clock=time.perf_counter() - start,
    )


def _run_single(cfg: ScenarioConfig) -> RunArtifacts:
    return run_scenario(cfg, parallel=False)


def _run_parallel(cfg: ScenarioConfig, workers) -> RunArtifacts:
    start = time.perf_counter()
    parts = [dataclasses.replace(cfg, methods=(law,)) for law in cfg.methods]
    with ProcessPoolExecutor(max_workers=workers or min(len(parts), os.cpu_count() or 1)) as pool:
        results = list(pool.map(_run_single, parts))
    digests = {r.reference_digest for r in results}
    if len(digests) != 1:
        raise RuntimeError("reference trajectories differ between workers")
    first = results[0]
    merged = {
        "series": {}, "convergence": {}, "final_error": {}, "blowup": {}, "decay_rates": {},
        "final_states": {},
    }
    spectra = {REFERENCE: first.spectra.get(REFERENCE)} if REFERENCE in first.spectra else {}
    snapshots = {}
    for r in results:
        for key in merged:
            merged[key].update(getattr(r, key))
        spectra.update({k: v for k, v in r.spectra.items() if k != REFERENCE})
        for ts, snap in r.snapshots.items():
            snapshots.setdefault(ts, {}).update(snap)
    return RunArtifacts(
        config=cfg,
        times=first.times,
        reference_l2=first.reference_l2,
        snapshots=snapshots,
        spectra=spectra,
        reference_digest=first.reference_digest,
        n_steps=first.n_steps,
        wall_clock=time.perf_counter() - start,
        **merged,
    )


def _fmt(x) -> str:
    return "nan" if x is None or not math.isfinite(x) else f"{x:.17g}"


def _write_csv(path: Path, header, rows) -> None:
    try:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(row) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def write_artifacts(r: RunArtifacts, directory) -> list[Path]:
    """Write ``errors.csv``, spectra, mode-error snapshots and ``summary.json``."""
    out = Path(directory)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    g = r.config.grid()
    written = []

    path = out / "errors.csv"
    rows = (
        (_fmt(t), label, _fmt(e2), _fmt(e1))
        for label, s in r.series.items()
        for t, e2, e1 in zip(s.times, s.err_l2, s.err_h1)
    )
    _write_csv(path, ("t", "method", "err_l2", "err_h1"), rows)
    written.append(path)

    for label, spec in r.spectra.items():
        path = out / f"spectrum_{label}.csv"
        rows = ((str(m), _fmt(g.k[m]), _fmt(a)) for m, a in enumerate(spec))
        _write_csv(path, ("mode", "k", "amplitude"), rows)
        written.append(path)

    for ts, snap in sorted(r.snapshots.items()):
        if not snap:
            continue
        path = out / f"mode_error_t{ts:g}.csv"
        labels = list(snap)
        rows = (
            (str(m), _fmt(g.k[m]), *(_fmt(snap[label][m]) for label in labels))
            for m in range(g.n_modes)
        )
        _write_csv(path, ("mode", "k", *labels), rows)
        written.append(path)

    path = out / "summary.json"
    try:
        path.write_text(json.dumps(r.summary(), indent=2, allow_nan=False, default=_json_default) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    written.append(path)
    return written


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")
