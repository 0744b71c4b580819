"""Command-line entry point: ``qfi-lab {figure,claims,sweep,simulate}``.

Exit codes: 0 success, 2 configuration error, 3 usage error, 4 failed claim.
"""

from __future__ import annotations

import argparse
import hashlib
import itertools
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, claims, control, experiments
from .dynamics import HamiltonianSpec, Kind, ResolutionError, evolve_trace
from .su2 import DOWN_X, DOWN_Z, UP_X, UP_Z, InvalidArgument

EXIT_OK, EXIT_CONFIG, EXIT_USAGE, EXIT_CLAIMS = 0, 2, 3, 4
THREADS_ENV = "QFI_LAB_THREADS"

STATES = {"up_x": UP_X, "down_x": DOWN_X, "up_z": UP_Z, "down_z": DOWN_Z}


class UsageError(Exception):
    pass


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


# --- config and output plumbing ------------------------------------------------

def load_config(path) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return data


def canonical_json(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, separators=(",", ":"))


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        return value if math.isfinite(value) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_text(path: Path, text: str) -> str:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return sha256_text(text)


def write_manifest(out: Path, command: str, scenario: str, config: dict, outputs: list, extra=None):
    manifest = {
        "tool": "qfi-lab",
        "version": __version__,
        "command": command,
        "scenario": scenario,
        "config": config,
        "config_sha256": sha256_text(canonical_json(config)),
        "outputs": outputs,
    }
    if extra:
        manifest["metadata"] = extra
    text = json.dumps(_jsonable(manifest), sort_keys=True, indent=2) + "\n"
    write_text(out / f"{scenario}_manifest.json", text)
    return manifest


def resolve_threads(value) -> int:
    raw = value if value is not None else os.environ.get(THREADS_ENV)
    if raw is None:
        return 1
    try:
        n = int(raw)
    except (TypeError, ValueError):
        raise UsageError(f"thread count must be an integer, got {raw!r}") from None
    if n < 1:
        raise UsageError(f"thread count must be >= 1, got {n}")
    return n


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


# --- subcommands ------------------------------------------------------------------

def cmd_figure(args) -> int:
    data = load_config(args.config)
    if data.get("scenario") not in (None, args.scenario):
        raise ConfigError(f"config scenario {data['scenario']!r} does not match {args.scenario!r}")
    try:
        cfg = experiments.ExperimentConfig.from_dict(data, args.scenario)
        if args.steps is not None:
            if "n_points" not in cfg.params:
                raise UsageError(f"--steps does not apply to {args.scenario}")
            cfg = cfg.with_params(n_points=args.steps)
    except InvalidArgument as exc:
        raise ConfigError(str(exc)) from None
    out = _out_dir(args.out)
    datasets = experiments.run_figure(cfg)
    outputs, meta = [], {}
    for ds in datasets:
        name = f"{ds.name}.csv"
        digest = write_text(out / name, ds.to_csv())
        outputs.append({"file": name, "sha256": digest, "columns": list(ds.columns),
                        "series": list(ds.series)})
        meta[ds.name] = {k: v for k, v in ds.metadata.items() if k != "params"}
    write_manifest(out, "figure", args.scenario, cfg.canonical(), outputs, meta)
    return EXIT_OK


def cmd_claims(args) -> int:
    report = claims.run_claims()
    report["version"] = __version__
    out = _out_dir(args.out)
    write_text(out / "claims.json", json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n")
    for r in report["claims"]:
        status = "PASS" if r["passed"] else "FAIL"
        print(f"{status} {r['id']}: computed {r['computed_value']:.6g} vs {r['reference_value']:.6g}")
    return EXIT_OK if report["all_passed"] else EXIT_CLAIMS


def parse_axis(spec: str, default_num: int):
    """``name=start:stop[:num]`` -> (name, values)."""
    name, sep, rng = spec.partition("=")
    if not sep:
        raise UsageError(f"axis must look like name=start:stop[:num], got {spec!r}")
    if name not in experiments.SWEEP_AXES:
        raise UsageError(f"unknown sweep axis {name!r}; expected one of {', '.join(experiments.SWEEP_AXES)}")
    parts = rng.split(":")
    try:
        if len(parts) == 2:
            start, stop, num = float(parts[0]), float(parts[1]), default_num
        elif len(parts) == 3:
            start, stop, num = float(parts[0]), float(parts[1]), int(parts[2])
        else:
            raise ValueError
    except ValueError:
        raise UsageError(f"bad axis range {rng!r}") from None
    if num < 1 or not (math.isfinite(start) and math.isfinite(stop)):
        raise UsageError(f"axis {name!r} has an empty or invalid grid")
    return name, np.linspace(start, stop, num)


def cmd_sweep(args) -> int:
    if not args.axis:
        raise UsageError("sweep needs at least one --axis")
    if len(args.axis) > 2:
        raise UsageError(f"at most 2 sweep axes are supported, got {len(args.axis)}")
    threads = resolve_threads(args.threads)
    axes = [parse_axis(a, args.steps or 21) for a in args.axis]
    if len({name for name, _ in axes}) != len(axes):
        raise UsageError("sweep axes must be distinct")
    data = load_config(args.config)
    fixed = data.get("params", {})
    if not isinstance(fixed, dict):
        raise ConfigError("'params' must be an object")
    metric = experiments.SWEEP_METRICS[args.metric]
    names = [name for name, _ in axes]
    points = list(itertools.product(*(values for _, values in axes)))

    def evaluate(point):
        return metric(**dict(fixed, **dict(zip(names, (float(v) for v in point)))))

    try:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(evaluate, points))
    except (InvalidArgument, ResolutionError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    lines = [",".join(names + [args.metric])]
    for point, value in zip(points, values):
        lines.append(",".join(f"{float(v):.17g}" for v in (*point, value)))
    out = _out_dir(args.out)
    name = f"sweep_{args.metric}.csv"
    digest = write_text(out / name, "\n".join(lines) + "\n")
    config = {"metric": args.metric, "axes": {n: v for n, v in axes}, "params": fixed,
              "units": experiments.UNITS}
    write_manifest(out, "sweep", f"sweep_{args.metric}", config,
                   [{"file": name, "sha256": digest, "columns": names + [args.metric]}])
    return EXIT_OK


def build_simulation(data: dict, steps: int | None):
    """Hamiltonian, control sequence, sample times and states from a simulate config."""
    try:
        h = data.get("hamiltonian", {"kind": "H1", "amplitude": 1.0, "frequency": 1e-3})
        spec = HamiltonianSpec(Kind(h.get("kind", "H1")), float(h.get("amplitude", 1.0)),
                               float(h.get("frequency", 0.0)), float(h.get("phase", 0.0)),
                               float(h.get("drift", 0.0)))
        t_max = float(data.get("t_max", 100.0))
        n = int(steps if steps is not None else data.get("n_samples", 100))
        if n < 1 or not t_max > 0:
            raise InvalidArgument("need n_samples >= 1 and t_max > 0")
        c = data.get("control", {"label": "None"})
        label = c.get("label", "None")
        if label == "None":
            seq = None
        elif label == "Method1":
            seq = control.build_method1(float(c.get("frame_drift", 0.0)), float(c["dt"]), t_max,
                                        c.get("rabi_estimate"))
        elif label == "Method2":
            seq = control.build_method2(float(c.get("rabi_estimate", spec.amplitude)), int(c.get("k", 0)),
                                        t_max, float(c.get("frame_drift", 0.0)), c.get("dt"))
        elif label == "Pang":
            seq = control.build_pang_control(float(c.get("rabi", spec.amplitude)),
                                             float(c.get("frame_drift", 0.0)), t_max, c.get("mode", "frame"))
        elif label == "H2PulseTrain":
            seq = control.build_h2_pulse_train(float(c["frame_frequency"]), t_max)
        else:
            raise InvalidArgument(f"unknown control label {label!r}")
        psi0 = STATES[data.get("initial_state", "down_x")]
        psi_out = STATES[data.get("measure_state", "up_x")]
    except KeyError as exc:
        raise ConfigError(f"missing or unknown config entry {exc}") from None
    except (InvalidArgument, ValueError, TypeError, AttributeError) as exc:
        raise ConfigError(str(exc)) from None
    times = t_max * np.arange(1, n + 1) / n
    return spec, seq, times, psi0, psi_out


def cmd_simulate(args) -> int:
    data = load_config(args.config)
    spec, seq, times, psi0, psi_out = build_simulation(data, args.steps)
    try:
        U = evolve_trace(spec, seq, times)
    except (InvalidArgument, ResolutionError) as exc:
        raise ConfigError(str(exc)) from None
    P = np.abs((U @ psi0) @ psi_out.conj()) ** 2
    cols = ["t", "u00_re", "u00_im", "u01_re", "u01_im", "u10_re", "u10_im", "u11_re", "u11_im", "p"]
    lines = [",".join(cols)]
    for t, u, p in zip(times, U, P):
        flat = [t] + [x for z in u.ravel() for x in (z.real, z.imag)] + [p]
        lines.append(",".join(f"{float(v):.17g}" for v in flat))
    out = _out_dir(args.out)
    digest = write_text(out / "simulate.csv", "\n".join(lines) + "\n")
    write_manifest(out, "simulate", "simulate", data, [{"file": "simulate.csv", "sha256": digest,
                                                         "columns": cols}])
    return EXIT_OK


# --- entry point ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qfi-lab", description="Frequency-estimation Fisher information experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, steps_help):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", default=".", help="output directory (default: current)")
        p.add_argument("--steps", type=int, help=steps_help)
        p.add_argument("--threads", type=int, help=f"worker threads (fallback: ${THREADS_ENV})")

    fig = sub.add_parser("figure", help="write the CSV datasets of one figure")
    fig.add_argument("scenario", choices=experiments.SCENARIOS)
    common(fig, "number of grid points (overrides n_points)")
    fig.set_defaults(func=cmd_figure)

    cl = sub.add_parser("claims", help="check every reference constant; exit 4 on a failure")
    cl.add_argument("--out", default=".", help="directory for claims.json")
    cl.add_argument("--threads", type=int, help="accepted for symmetry; claims run serially")
    cl.set_defaults(func=cmd_claims)

    sw = sub.add_parser("sweep", help="evaluate a metric over a 1-D or 2-D parameter grid")
    sw.add_argument("--metric", required=True, choices=sorted(experiments.SWEEP_METRICS))
    sw.add_argument("--axis", action="append", default=[], help="name=start:stop[:num] (repeat for 2-D)")
    common(sw, "default points per axis when num is omitted")
    sw.set_defaults(func=cmd_sweep)

    sim = sub.add_parser("simulate", help="dump the propagator and transition probability over time")
    common(sim, "number of time samples")
    sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        resolve_threads(getattr(args, "threads", None))
        return args.func(args)
    except ConfigError as exc:
        print(f"qfi-lab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UsageError as exc:
        print(f"qfi-lab: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
