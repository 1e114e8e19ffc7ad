"""Command-line entry point: ``ksnudge {run,compare,gamma-sweep,spectrum}``.

Configuration comes from built-in defaults, then an optional flat JSON file
(``--config``), then flags; later sources win.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .assimilation import FeedbackLaw, LawKind
from .harness import ScenarioConfig, run_scenario, write_artifacts
from .kse import BlowUpError

DEFAULT_GAMMA = 0.1
DEFAULT_OUT = "ksnudge_out"

_FLAG_TO_FIELD = {
    "lam": "lam",
    "mu": "mu",
    "n": "n_points",
    "dt": "dt",
    "t_end": "t_end",
    "modes": "mode_cutoff",
    "stride": "sample_stride",
    "threshold": "threshold",
}


class ConfigError(ValueError):
    pass


def _csv_list(text):
    return [item.strip() for item in text.split(",") if item.strip()]


def _float_list(text):
    try:
        return [float(x) for x in _csv_list(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="flat JSON file with ScenarioConfig keys")
    common.add_argument("--lambda", dest="lam", type=float, help="instability parameter (default 2)")
    common.add_argument("--mu", type=float, help="feedback gain (default 1)")
    common.add_argument("--gamma", type=float, help="exponent for the nonlinear laws (default 0.1)")
    common.add_argument("--n", type=int, help="grid points (default 8192)")
    common.add_argument("--dt", type=float, help="time step (default 2**-13)")
    common.add_argument("--t-end", dest="t_end", type=float, help="final time (default 60)")
    common.add_argument("--modes", type=int, help="observed Fourier modes M (default 32)")
    common.add_argument("--stride", type=int, help="steps between recorded samples (default 32)")
    common.add_argument("--threshold", type=float, help="convergence threshold on the L2 error (default 1e-13)")
    common.add_argument("--init", choices=("fresh", "chaotic"), help="reference initial data")
    common.add_argument("--out", type=Path, help="output directory (default $KSNUDGE_OUT or ./ksnudge_out)")
    common.add_argument("--parallel", action="store_true", help="one worker process per method")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="ksnudge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "run one scenario (all four laws unless --methods is given)"),
        ("compare", "compare several feedback laws side by side"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--methods", type=_csv_list, help="comma list of linear,power,hybrid,cc")
    p = sub.add_parser("gamma-sweep", parents=[common], help="power law for several exponents")
    p.add_argument("--gammas", type=_float_list, default=[0.0, 0.05, 0.075, 0.1, 0.125])
    p = sub.add_parser("spectrum", parents=[common], help="time-averaged spectra over a window")
    p.add_argument("--methods", type=_csv_list)
    p.add_argument("--window", type=_float_list, default=[20.0, 60.0], help="t_a,t_b (default 20,60)")
    return parser


def _methods_from_names(names, gamma):
    laws = []
    for name in names:
        kind = LawKind.parse(name)
        laws.append(FeedbackLaw(kind, 0.0 if kind is LawKind.LINEAR else gamma))
    return tuple(laws)


def _methods_from_file(items, gamma):
    laws = []
    for item in items:
        if isinstance(item, str):
            laws.extend(_methods_from_names([item], gamma))
        elif isinstance(item, dict):
            laws.append(FeedbackLaw(LawKind.parse(item["kind"]), float(item.get("gamma", gamma))))
        else:
            raise ConfigError(f"cannot interpret method entry {item!r}")
    return tuple(laws)


def resolve(args) -> tuple[ScenarioConfig, Path]:
    """Merge defaults, the JSON config file and flags into a validated config."""
    values = {}
    gamma = DEFAULT_GAMMA
    file_methods = None
    if args.config is not None:
        try:
            data = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config {args.config} must hold a JSON object")
        known = set(ScenarioConfig.__dataclass_fields__) | {"gamma", "lambda"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        data = dict(data)
        if "lambda" in data:
            data["lam"] = data.pop("lambda")
        gamma = float(data.pop("gamma", gamma))
        file_methods = data.pop("methods", None)
        values.update(data)

    for flag, name in _FLAG_TO_FIELD.items():
        value = getattr(args, flag, None)
        if value is not None:
            values[name] = value
    if args.gamma is not None:
        gamma = args.gamma
    if args.init is not None:
        values["init"] = "chaotic_restart" if args.init == "chaotic" else "fresh"
    if values.get("init") == "chaotic":
        values["init"] = "chaotic_restart"

    try:
        if args.command == "gamma-sweep":
            values["methods"] = tuple(FeedbackLaw(LawKind.POWER, g) for g in args.gammas)
        elif getattr(args, "methods", None):
            values["methods"] = _methods_from_names(args.methods, gamma)
        elif file_methods is not None:
            values["methods"] = _methods_from_file(file_methods, gamma)
        else:
            values["methods"] = _methods_from_names(["linear", "power", "hybrid", "cc"], gamma)
        if args.command == "spectrum":
            if len(args.window) != 2 or not args.window[0] < args.window[1]:
                raise ConfigError(f"--window needs t_a,t_b with t_a < t_b, got {args.window}")
            values["spectrum_window"] = tuple(args.window)
        for key in ("snapshot_times", "spectrum_window", "decay_windows"):
            if key in values and isinstance(values[key], list):
                values[key] = tuple(tuple(v) if isinstance(v, list) else v for v in values[key])
        cfg = ScenarioConfig(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    out = args.out or Path(os.environ.get("KSNUDGE_OUT") or DEFAULT_OUT)
    return cfg, out


def format_summary(summary: dict) -> str:
    """Table of method, t*, speedup; numbers rendered exactly as in summary.json."""
    rows = [("method", "t*", "speedup", "final_err_l2")]
    for label in summary["methods"]:
        rows.append((
            label,
            json.dumps(summary["convergence_time"][label]),
            json.dumps(summary["speedup_vs_linear"][label]),
            json.dumps(summary["final_error"][label]),
        ))
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    lines.append(f"steps: {summary['step_count']}  wall clock: {json.dumps(summary['wall_clock_seconds'])} s")
    return "\n".join(lines)


def execute(args) -> int:
    try:
        cfg, out = resolve(args)
    except ConfigError as exc:
        print(f"ksnudge: configuration error: {exc}", file=sys.stderr)
        return 2
    try:
        result = run_scenario(cfg, parallel=args.parallel)
    except BlowUpError as exc:
        print(f"ksnudge: {exc}", file=sys.stderr)
        return 1
    try:
        write_artifacts(result, out)
    except OSError as exc:
        print(f"ksnudge: {exc}", file=sys.stderr)
        return 1
    summary = json.loads((out / "summary.json").read_text())
    print(format_summary(summary))
    print(f"artifacts written to {out}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return execute(args)


if __name__ == "__main__":
    sys.exit(main())
