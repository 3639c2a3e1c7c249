"""Command-line entry points for the simulation and analysis experiments.

Every command writes its outputs plus a ``manifest.json`` recording the
fully resolved parameters, so a run can be reproduced bit-identically.
Exit codes: 0 success, 1 runtime/numeric failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

# numba probes TBB on import; the probe warning is noise for CLI users
warnings.filterwarnings("ignore", message="The TBB threading layer requires TBB version")

from . import __version__, analysis, birthdeath, model, normalform, sde, slowfast
from .errors import BudgetError, ConvergenceError, IntegrationError


@dataclass
class RunManifest:
    command: str
    parameters: dict
    seed: int | None
    version: str
    outputs: list
    duration_s: float

    def write(self, directory: Path) -> Path:
        path = directory / "manifest.json"
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2, default=str)
            fh.write("\n")
        return path


def _triple(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated values, got {text!r}")
    return tuple(float(v) for v in parts)


def _range(text: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}")
    return float(parts[0]), float(parts[1])


def _params(args) -> model.ModelParams:
    return model.baseline_params(h=args.h, zeta=args.zeta)


def _emit(args, command: str, outputs: list, t0: float, seed: int | None) -> None:
    resolved = {k: v for k, v in sorted(vars(args).items())
                if k not in ("func", "config")}
    manifest = RunManifest(command=command, parameters=resolved, seed=seed,
                           version=__version__, outputs=[str(o) for o in outputs],
                           duration_s=time.perf_counter() - t0)
    out_dir = Path(outputs[0]).resolve().parent if outputs else Path.cwd()
    manifest.write(out_dir)


def cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    p = _params(args)
    initial = np.array(args.initial)
    if args.scheme == "rk4":
        cfg = sde.SimConfig(dt=args.dt, t_end=args.t_end, timescale=args.timescale,
                            scheme="rk4_deterministic", seed=args.seed,
                            initial=initial, save_every=args.thin)
        traj = sde.integrate_deterministic(p, cfg)
    else:
        n = model.NoiseParams(*args.sigma)
        cfg = sde.SimConfig(dt=args.dt, t_end=args.t_end, timescale=args.timescale,
                            scheme="euler_maruyama", seed=args.seed,
                            initial=initial, boundary_policy=args.boundary,
                            save_every=args.thin)
        traj = sde.integrate_em(p, n, cfg)
    traj.to_csv(args.out)
    _emit(args, "simulate", [args.out], t0, args.seed)
    return 0


def cmd_scan(args) -> int:
    t0 = time.perf_counter()
    p = _params(args)
    lo, hi = args.h_range
    if not hi > lo:
        raise ValueError(f"inverted or empty h range {lo}:{hi}")
    if args.what == "hopf":
        h_crit = slowfast.scan_hopf(p, lo, hi, step=args.step)
    else:
        h_crit = slowfast.scan_fsn2(p, lo, hi, step=args.step)
    with open(args.out, "w") as fh:
        fh.write("what,h\n")
        fh.write(f"{args.what},{h_crit:.17g}\n")
    outputs = [args.out]
    if args.track:
        hs = np.arange(lo, hi + 0.5 * args.step, args.step)
        rows = slowfast.fold_track(p, hs)
        with open(args.track, "w") as fh:
            fh.write("h,x,y,z,lambda_s,lambda_w,mu,kind\n")
            for r in rows:
                fh.write(f"{r['h']:.17g},{r['x']:.17g},{r['y']:.17g},{r['z']:.17g},"
                         f"{r['lambda_s']:.17g},{r['lambda_w']:.17g},{r['mu']:.17g},{r['kind']}\n")
        outputs.append(args.track)
    _emit(args, "scan", outputs, t0, None)
    return 0


def cmd_histogram(args) -> int:
    t0 = time.perf_counter()
    p = _params(args)
    n = model.NoiseParams(*args.sigma)
    per_path = analysis.sao_count_ensemble(
        p, n, count=args.paths, seed=args.seed, t_end=args.t_end,
        dt=args.dt, save_every=args.thin)
    flat = [c for counts in per_path for c in counts]
    hist = analysis.build_histogram(flat, n_paths=args.paths)
    analysis.histogram_to_csv(hist, args.out)
    _emit(args, "histogram", [args.out], t0, args.seed)
    return 0


def cmd_returnmap(args) -> int:
    t0 = time.perf_counter()
    p = _params(args)
    n = model.NoiseParams(*args.sigma)
    samples = analysis.return_map(p, n, seed=args.seed, grid_size=args.grid,
                                  dt=args.dt, budget=args.budget)
    analysis.returnmap_to_csv(samples, args.out)
    _emit(args, "returnmap", [args.out], t0, args.seed)
    return 0


def cmd_normalform(args) -> int:
    t0 = time.perf_counter()
    p = _params(args)
    n = model.NoiseParams(*args.sigma)
    fc = slowfast.fold_curve(p)
    fs = slowfast.find_folded_singularity(p, 0.5 * (fc.a + fc.b))
    nfc = normalform.compute_constants(p, fs, n)
    pref_F, pref_G = normalform.noise_prefactors(p, n, fs)
    payload = {
        "constants": json.loads(nfc.to_json()),
        "folded_node": {"x": fs.point[0], "y": fs.point[1], "z": fs.point[2],
                        "lambda_s": float(np.real(fs.lambda_s)),
                        "lambda_w": float(np.real(fs.lambda_w)),
                        "mu": fs.mu, "kind": fs.kind},
        "noise_prefactors": {"sigma_F": pref_F.tolist(), "sigma_G": pref_G.tolist()},
    }
    if args.verify:
        report = normalform.verify_normal_form(nfc, p, fs, delta=args.delta)
        payload["verification"] = json.loads(report.to_json())
    with open(args.out, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    outputs = [args.out]
    if args.sweep is not None:
        lo, hi = args.sweep
        rows = normalform.fold_sweep(p, n, lo, hi, num=args.sweep_num)
        normalform.chi_table_to_csv(rows, args.sweep_out)
        outputs.append(args.sweep_out)
    _emit(args, "normalform", outputs, t0, None)
    return 0


def cmd_birthdeath_check(args) -> int:
    t0 = time.perf_counter()
    p = _params(args)
    state = (np.array(args.state) if args.state is not None
             else np.array([0.3, slowfast.graph_y(p, 0.3, 0.1), 0.1]))
    report = birthdeath.compare_to_diffusion(
        p, state, np.array(args.omega), delta_s=args.delta_s,
        replicas=args.replicas, seed=args.seed)
    with open(args.out, "w") as fh:
        fh.write(report.to_json())
        fh.write("\n")
    _emit(args, "birthdeath-check", [args.out], t0, args.seed)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mmopp",
        description="Fast-slow predator-prey toolkit: simulation, slow-fast "
                    "geometry, SAO statistics, and normal-form diagnostics.")
    parser.add_argument("--config", type=Path, default=None,
                        help="key=value file supplying flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, h_default=2.4):
        sp.add_argument("--h", type=float, default=h_default,
                        help="competition coefficient (bifurcation knob)")
        sp.add_argument("--zeta", type=float, default=0.01, help="timescale ratio")
        sp.add_argument("--seed", type=int, default=0, help="master seed")

    sp = sub.add_parser("simulate", help="integrate one trajectory to CSV")
    sp.add_argument("--scheme", choices=("rk4", "em"), required=True)
    sp.add_argument("--timescale", choices=("slow", "fast"), default="slow")
    common(sp)
    sp.add_argument("--sigma", type=_triple, default=(1e-6, 3e-3, 3e-3),
                    help="sigma1,sigma2,sigma3 (em only)")
    sp.add_argument("--t-end", type=float, default=100.0)
    sp.add_argument("--dt", type=float, default=1e-4)
    sp.add_argument("--initial", type=_triple, default=(0.3, 0.3, 0.1))
    sp.add_argument("--boundary", choices=("reflect_to_zero", "absorb"),
                    default="reflect_to_zero")
    sp.add_argument("--thin", type=int, default=10, help="save every k-th step")
    sp.add_argument("--out", type=Path, default=Path("trajectory.csv"))
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("scan", help="locate the Hopf or FSN II value in h")
    sp.add_argument("--what", choices=("hopf", "fsn2"), required=True)
    sp.add_argument("--h-range", type=_range, required=True, help="lo:hi")
    sp.add_argument("--step", type=float, default=1e-2)
    common(sp)
    sp.add_argument("--track", type=Path, default=None,
                    help="also write the folded-singularity track CSV")
    sp.add_argument("--out", type=Path, default=Path("scan.csv"))
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("histogram", help="inter-spike SAO count distribution")
    common(sp)
    sp.add_argument("--paths", type=int, default=200)
    sp.add_argument("--sigma", type=_triple, default=(1e-6, 3e-3, 3e-3))
    sp.add_argument("--t-end", type=float, default=2000.0)
    sp.add_argument("--dt", type=float, default=1e-4)
    sp.add_argument("--thin", type=int, default=10)
    sp.add_argument("--out", type=Path, default=Path("histogram.csv"))
    sp.set_defaults(func=cmd_histogram)

    sp = sub.add_parser("returnmap", help="stochastic first-return map")
    common(sp, h_default=2.3)
    sp.add_argument("--grid", type=int, default=1000)
    sp.add_argument("--sigma", type=_triple, default=(1e-6, 1e-3, 1e-4))
    sp.add_argument("--dt", type=float, default=1e-4)
    sp.add_argument("--budget", type=float, default=analysis.RETURN_BUDGET)
    sp.add_argument("--out", type=Path, default=Path("returnmap.csv"))
    sp.set_defaults(func=cmd_returnmap)

    sp = sub.add_parser("normalform", help="fold-local constants and certification")
    common(sp, h_default=2.3)
    sp.add_argument("--sigma", type=_triple, default=(1e-6, 3e-3, 3e-3))
    sp.add_argument("--verify", action="store_true")
    sp.add_argument("--delta", type=float, default=1e-3)
    sp.add_argument("--sweep", type=_range, default=None,
                    help="also sweep h over lo:hi for chi and prefactor curves")
    sp.add_argument("--sweep-num", type=int, default=41)
    sp.add_argument("--sweep-out", type=Path, default=Path("fold_sweep.csv"))
    sp.add_argument("--out", type=Path, default=Path("normalform.json"))
    sp.set_defaults(func=cmd_normalform)

    sp = sub.add_parser("birthdeath-check", help="chain vs diffusion moments")
    common(sp)
    sp.add_argument("--omega", type=_triple, required=True,
                    help="population scales omega1,omega2,omega3")
    sp.add_argument("--replicas", type=int, default=10_000)
    sp.add_argument("--delta-s", type=float, default=1e-3)
    sp.add_argument("--state", type=_triple, default=None,
                    help="comparison state (default: on the critical manifold)")
    sp.add_argument("--out", type=Path, default=Path("birthdeath.json"))
    sp.set_defaults(func=cmd_birthdeath_check)
    return parser


def _load_config(path: Path) -> dict:
    values = {}
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"bad config line {line!r}: expected key=value")
        key, _, val = line.partition("=")
        values[key.strip().replace("-", "_")] = val.strip()
    return values


_FLOAT_KEYS = ("h", "zeta", "t_end", "dt", "step", "delta", "delta_s", "budget")
_INT_KEYS = ("seed", "paths", "grid", "replicas", "thin")
_TUPLE_KEYS = ("sigma", "omega", "initial", "state", "h_range")


def _apply_config(args, raw: dict, argv: list) -> None:
    """Config-file values fill in flags the user did not pass explicitly."""
    for key, val in raw.items():
        if not hasattr(args, key):
            continue
        flag = "--" + key.replace("_", "-")
        if flag in argv:
            continue
        if key in _FLOAT_KEYS:
            setattr(args, key, float(val))
        elif key in _INT_KEYS:
            setattr(args, key, int(val))
        elif key in _TUPLE_KEYS:
            setattr(args, key, _range(val) if key == "h_range" else _triple(val))
        else:
            setattr(args, key, val)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is not None:
        try:
            raw = _load_config(args.config)
        except (OSError, ValueError) as exc:
            parser.error(str(exc))
        _apply_config(args, raw, argv)
    if getattr(args, "paths", 1) < 1:
        parser.error("--paths must be >= 1")
    if getattr(args, "grid", 1) < 1:
        parser.error("--grid must be >= 1")
    hr = getattr(args, "h_range", None)
    if hr is not None and not hr[1] > hr[0]:
        parser.error(f"--h-range must satisfy lo < hi, got {hr[0]}:{hr[1]}")
    try:
        return args.func(args)
    except (ValueError, ConvergenceError, IntegrationError, BudgetError,
            ZeroDivisionError, OSError) as exc:
        print(f"mmopp {args.command}: error: {exc}", file=sys.stderr)
        return 1
