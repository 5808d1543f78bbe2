"""Batch command line: certificates, shooting, grids, profiles, energy laws.

Every command resolves its flags against the defaults in `config`, runs the
corresponding library call, prints a short human summary, and (when --out is
given) writes its artifacts plus a RunManifest cataloging the resolved
parameters.  Exit codes: 0 success / all proved, 1 failure (a Failed
certificate, a broken bracket, no blowup), 2 at least one Inconclusive
certificate, 64 usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__, certify, config, core, integrate, manifold, profile

__all__ = ["RunManifest", "main"]

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    """argparse maps usage errors to exit 2; scripts here expect 64."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunManifest:
    """What a command ran with and what it wrote."""

    command: str
    parameters: dict
    tool_version: str
    rounding_mode: str
    wall_ms: int
    outputs: tuple[str, ...]

    def to_json_dict(self) -> dict:
        return {
            "command": self.command,
            "parameters": self.parameters,
            "tool_version": self.tool_version,
            "rounding_mode": self.rounding_mode,
            "wall_ms": self.wall_ms,
            "outputs": list(self.outputs),
        }


def _atomic_write(path: str, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_json(path: str, obj) -> None:
    _atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _out_base(out: str) -> str:
    for suffix in (".json", ".csv"):
        if out.endswith(suffix):
            return out[: -len(suffix)]
    return out


def _finish(command: str, parameters: dict, outputs: list[str], started: float) -> None:
    if not outputs:
        return
    manifest = RunManifest(
        command=command,
        parameters=parameters,
        tool_version=__version__,
        rounding_mode=certify.ROUNDING_MODE,
        wall_ms=int(round((time.perf_counter() - started) * 1000.0)),
        outputs=tuple(outputs),
    )
    base = _out_base(outputs[0])
    _write_json(f"{base}.manifest.json", manifest.to_json_dict())


# ---------------------------------------------------------------------------
# verify


def _run_verify(params: dict, out: str | None) -> tuple[int, dict, list[str]]:
    tasks = list(certify.TASK_IDS) if params["task"] == "all" else [params["task"]]
    certs = [
        certify.run_task(tid, min_width=params["min_width"]) for tid in tasks
    ]
    for cert in certs:
        print(
            f"{cert.task_id}: {cert.status.value}"
            f" (boxes={cert.boxes_examined}, depth={cert.max_depth},"
            f" {cert.wall_ms} ms)"
        )
    outputs: list[str] = []
    if out is not None:
        path = f"{_out_base(out)}.json"
        _write_json(path, [c.to_json_dict() for c in certs])
        outputs.append(path)
    statuses = {c.task_id: c.status for c in certs}
    if any(s is certify.Status.FAILED for s in statuses.values()):
        code = EXIT_FAILED
    elif any(s is certify.Status.INCONCLUSIVE for s in statuses.values()):
        code = EXIT_INCONCLUSIVE
    else:
        code = EXIT_OK
    return code, {tid: s.value for tid, s in statuses.items()}, outputs


def _cmd_verify(args, parser: _Parser) -> int:
    started = time.perf_counter()
    if args.min_width is not None and not (
        args.min_width > 0.0 and math.isfinite(args.min_width)
    ):
        parser.error(f"--min-width must be positive and finite, got {args.min_width}")
    params = {"task": args.task, "min_width": args.min_width}
    code, _, outputs = _run_verify(params, args.out)
    _finish("verify", params, outputs, started)
    return code


# ---------------------------------------------------------------------------
# shoot


def _run_shoot(params: dict, out: str | None) -> tuple[int, dict, list[str]]:
    cfg = integrate.IntegrationConfig(max_span=params["span"])
    try:
        theta_star, res = manifold.find_heteroclinic(
            theta_tol=params["theta_tol"], cfg=cfg, eps0=params["eps0"]
        )
    except ValueError as err:
        print(f"shoot: {err}", file=sys.stderr)
        return EXIT_FAILED, {}, []
    end = res.end_state.as_array()
    target = np.array([0.5 * math.pi, 0.0, 0.0, 0.0])
    distance = float(np.linalg.norm(end - target))
    print(
        f"theta* = {theta_star!r} ({res.outcome.value}),"
        f" end distance to (pi/2,0,0,0) = {distance:.6e}"
    )
    report = {
        "theta_star": theta_star,
        "outcome": res.outcome.value,
        "g": res.g,
        "tau": res.tau,
        "end_state": [float(v) for v in end],
        "end_distance": distance,
        "eps0": params["eps0"],
        "theta_tol": params["theta_tol"],
        "theta_tol_requested": params["theta_tol_requested"],
        "span": params["span"],
    }
    outputs: list[str] = []
    if out is not None:
        base = _out_base(out)
        _write_json(f"{base}.json", report)
        outputs.append(f"{base}.json")
        orbit = integrate.integrate(
            5, manifold.seed_state(manifold.SeedSpec(params["eps0"], theta_star)), cfg=cfg
        )
        integrate.write_csv(orbit, f"{base}.csv")
        outputs.append(f"{base}.csv")
    return EXIT_OK, {"theta_star": theta_star, "outcome": res.outcome.value}, outputs


def _cmd_shoot(args, parser: _Parser) -> int:
    started = time.perf_counter()
    if args.d != 5:
        parser.error(f"shooting is implemented for d=5 only, got --d {args.d}")
    if not (0.0 < args.eps0 <= 0.1):
        parser.error(f"--eps0 must lie in (0, 0.1], got {args.eps0}")
    if not (args.theta_tol > 0.0 and math.isfinite(args.theta_tol)):
        parser.error(f"--theta-tol must be positive, got {args.theta_tol}")
    if not (args.span > 0.0 and math.isfinite(args.span)):
        parser.error(f"--span must be positive, got {args.span}")
    resolved = max(args.theta_tol, config.THETA_TOL_FLOOR)
    if resolved != args.theta_tol:
        print(
            f"theta tolerance clamped to the floating-point floor {resolved:g}",
            file=sys.stderr,
        )
    params = {
        "d": args.d,
        "eps0": args.eps0,
        "theta_tol": resolved,
        "theta_tol_requested": args.theta_tol,
        "span": args.span,
    }
    code, _, outputs = _run_shoot(params, args.out)
    _finish("shoot", params, outputs, started)
    return code


# ---------------------------------------------------------------------------
# classify


def _parse_range(text: str, parser: _Parser) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        parser.error(f"--theta-range must look like '<lo>:<hi>', got {text!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        parser.error(f"--theta-range endpoints must be numbers, got {text!r}")
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        parser.error(f"--theta-range needs lo < hi, got {text!r}")
    return lo, hi


def _run_classify(params: dict, out: str | None) -> tuple[int, dict, list[str]]:
    thetas = np.linspace(params["lo"], params["hi"], params["grid"])
    results = manifold.classification_grid(
        thetas, eps0=params["eps0"], workers=params["workers"]
    )
    counts: dict[str, int] = {}
    for r in results:
        counts[r.outcome.value] = counts.get(r.outcome.value, 0) + 1
    print(
        f"classified {len(results)} angles on [{params['lo']:.6g}, {params['hi']:.6g}]: "
        + ", ".join(f"{k}={v}" for k, v in sorted(counts.items()))
    )
    outputs: list[str] = []
    if out is not None:
        path = f"{_out_base(out)}.csv"
        manifold.write_grid_csv(results, path)
        outputs.append(path)
    grid_summary = [[r.theta, r.outcome.value, r.g] for r in results]
    return EXIT_OK, {"grid": grid_summary}, outputs


def _cmd_classify(args, parser: _Parser) -> int:
    started = time.perf_counter()
    if args.grid < 2:
        parser.error(f"--grid must be at least 2, got {args.grid}")
    if not (0.0 < args.eps0 <= 0.1):
        parser.error(f"--eps0 must lie in (0, 0.1], got {args.eps0}")
    if args.theta_range is None:
        lo, hi = -0.5 * math.pi, manifold.theta0(args.eps0)
    else:
        lo, hi = _parse_range(args.theta_range, parser)
    params = {
        "grid": args.grid,
        "lo": lo,
        "hi": hi,
        "eps0": args.eps0,
        "workers": config.default_workers(),
    }
    code, _, outputs = _run_classify(params, args.out)
    _finish("classify", params, outputs, started)
    return code


# ---------------------------------------------------------------------------
# wind


def _run_wind(params: dict, out: str | None) -> tuple[int, dict, list[str]]:
    cfg = integrate.IntegrationConfig(
        max_span=params["span"], blowup_norm=params["blowup_norm"]
    )
    policy = profile.SeedPolicy(eps0=params["eps0"], theta_offset=params["theta_offset"])
    try:
        traj, prof, report = profile.build_winding_profile(cfg=cfg, seed_policy=policy)
    except profile.WindingError as err:
        print(f"wind: {err}", file=sys.stderr)
        return EXIT_FAILED, {}, []
    print(
        f"winding_count = {report.winding_count}, s_f estimate = {report.s_f_estimate!r},"
        f" blowup at s = {float(traj.s[-1])!r}"
    )
    outputs: list[str] = []
    if out is not None:
        base = _out_base(out)
        _write_json(f"{base}.json", report.to_json_dict())
        outputs.append(f"{base}.json")
        profile.write_profile_csv(prof, 5, f"{base}.csv")
        outputs.append(f"{base}.csv")
    return EXIT_OK, report.to_json_dict(), outputs


def _cmd_wind(args, parser: _Parser) -> int:
    started = time.perf_counter()
    if not (0.0 < args.eps0 <= 0.1):
        parser.error(f"--eps0 must lie in (0, 0.1], got {args.eps0}")
    if not (args.blowup_norm > 0.0 and math.isfinite(args.blowup_norm)):
        parser.error(f"--blowup-norm must be positive, got {args.blowup_norm}")
    if args.theta is None:
        offset = config.WIND_THETA_OFFSET
    else:
        offset = args.theta - manifold.theta0(args.eps0)
        if offset <= 0.0:
            parser.error(
                f"--theta must exceed the boundary angle theta0 = "
                f"{manifold.theta0(args.eps0):.6g}, got {args.theta}"
            )
    params = {
        "eps0": args.eps0,
        "theta_offset": offset,
        "blowup_norm": args.blowup_norm,
        "span": args.span,
    }
    try:
        code, _, outputs = _run_wind(params, args.out)
    except ValueError as err:
        parser.error(str(err))
    _finish("wind", params, outputs, started)
    return code


# ---------------------------------------------------------------------------
# energy


def _connection_state(rng: np.random.Generator) -> np.ndarray:
    """Random member of the explicit d=4 connecting family at s = 0.

    The family is phi = 2 arctan(e^{s-c}) + k pi with jet (sech, -sech tanh,
    sech (tanh^2 - sech^2)) in the shifted variable, optionally reflected.
    Every member is a bounded orbit with exactly conserved energy.
    """
    c = float(rng.uniform(-2.0, 2.0))
    k = int(rng.integers(-1, 4))
    reflect = bool(rng.integers(0, 2))
    sech = 1.0 / math.cosh(-c)
    tanh = math.tanh(-c)
    x = np.array(
        [
            2.0 * math.atan(math.exp(-c)) + k * math.pi,
            sech,
            -sech * tanh,
            sech * (tanh * tanh - sech * sech),
        ]
    )
    return -x if reflect else x


def _run_energy(params: dict, out: str | None) -> tuple[int, dict, list[str]]:
    rng = np.random.default_rng(params["seed"])
    d, mode = params["d"], params["mode"]
    worst = 0.0
    spans: list[float] = []
    for _ in range(params["orbits"]):
        if mode == "conservation":
            x0 = _connection_state(rng)
            cfg = integrate.IntegrationConfig(max_span=10.0, blowup_norm=20.0)
        else:
            x0 = rng.uniform(-0.5, 0.5, size=4)
            cfg = integrate.IntegrationConfig(max_span=10.0, blowup_norm=1e3)
        traj = integrate.integrate(d, x0, cfg=cfg)
        totals = np.array([core.energy(d, x).total for x in traj.states])
        spans.append(float(traj.s[-1]))
        if mode == "conservation":
            worst = max(worst, float(np.max(np.abs(totals - totals[0]))))
        else:
            increments = np.diff(totals)
            if len(increments):
                worst = min(worst, float(np.min(increments)))
    label = "conservation defect" if mode == "conservation" else "worst energy increment"
    print(f"d={d} {mode}: {label} over {params['orbits']} orbits = {worst!r}")
    report = {
        "d": d,
        "mode": mode,
        "orbits": params["orbits"],
        "seed": params["seed"],
        "worst": worst,
        "spans": spans,
    }
    outputs: list[str] = []
    if out is not None:
        path = f"{_out_base(out)}.json"
        _write_json(path, report)
        outputs.append(path)
    return EXIT_OK, {"worst": worst}, outputs


def _cmd_energy(args, parser: _Parser) -> int:
    started = time.perf_counter()
    if args.mode == "conservation" and args.d != 4:
        parser.error("--mode conservation requires --d 4 (energy is conserved only there)")
    if args.mode == "monotonicity" and args.d not in (5, 6, 7):
        parser.error(f"--mode monotonicity requires --d in {{5, 6, 7}}, got {args.d}")
    params = {"d": args.d, "mode": args.mode, "orbits": 20, "seed": args.seed}
    code, _, outputs = _run_energy(params, args.out)
    _finish("energy", params, outputs, started)
    return code


# ---------------------------------------------------------------------------
# spectrum


def _run_spectrum(params: dict, out: str | None) -> tuple[int, dict, list[str]]:
    lin = core.linearization(params["d"], params["parity"])
    print(f"linearization matrix (d={params['d']}, {params['parity']} parity):")
    for row in lin.matrix:
        print("  [" + ", ".join(f"{v:g}" for v in row) + "]")
    if lin.eigenvalues is not None:
        print("eigenvalues:", ", ".join(f"{v:g}" for v in lin.eigenvalues))
        print("eigenvectors (columns, (1, lam, lam^2, lam^3)):")
        for row in lin.eigenvectors:
            print("  [" + ", ".join(f"{v:g}" for v in row) + "]")
        eigs = list(lin.eigenvalues)
        vecs = [[float(v) for v in row] for row in lin.eigenvectors]
    else:
        numeric = sorted(np.linalg.eigvals(lin.matrix), key=lambda z: z.real)
        print(
            "numeric eigenvalues:",
            ", ".join(f"{z.real:.6g}{z.imag:+.6g}i" for z in numeric),
        )
        eigs = [[z.real, z.imag] for z in numeric]
        vecs = None
    report = {
        "d": params["d"],
        "parity": params["parity"],
        "matrix": [[float(v) for v in row] for row in lin.matrix],
        "eigenvalues": eigs,
        "eigenvectors": vecs,
    }
    outputs: list[str] = []
    if out is not None:
        path = f"{_out_base(out)}.json"
        _write_json(path, report)
        outputs.append(path)
    return EXIT_OK, {}, outputs


def _cmd_spectrum(args, parser: _Parser) -> int:
    started = time.perf_counter()
    if not (3 <= args.d <= 10):
        parser.error(f"--d must lie in [3, 10], got {args.d}")
    params = {"d": args.d, "parity": args.parity}
    code, _, outputs = _run_spectrum(params, args.out)
    _finish("spectrum", params, outputs, started)
    return code


# ---------------------------------------------------------------------------
# replay


_RUNNERS = {
    "verify": _run_verify,
    "shoot": _run_shoot,
    "classify": _run_classify,
    "wind": _run_wind,
    "energy": _run_energy,
    "spectrum": _run_spectrum,
}


def _replay_matches(command: str, summary: dict, manifest: dict) -> bool | None:
    """Compare a fresh summary with the artifacts listed in the manifest.

    Returns None when the original artifacts are gone (nothing to compare).
    """
    originals = [p for p in manifest.get("outputs", []) if os.path.exists(p)]
    if command == "verify":
        path = next((p for p in originals if p.endswith(".json")), None)
        if path is None:
            return None
        with open(path) as fh:
            old = {c["task_id"]: c["status"] for c in json.load(fh)}
        return old == summary
    if command == "classify":
        path = next((p for p in originals if p.endswith(".csv")), None)
        if path is None:
            return None
        old = []
        with open(path) as fh:
            next(fh)
            for line in fh:
                cells = line.rstrip("\n").split(",")
                old.append([float(cells[0]), cells[1], int(cells[2]) if cells[2] else None])
        return old == summary["grid"]
    return None


def _cmd_replay(args, parser: _Parser) -> int:
    try:
        with open(args.manifest) as fh:
            manifest = json.load(fh)
    except (OSError, json.JSONDecodeError) as err:
        parser.error(f"cannot read manifest {args.manifest!r}: {err}")
    command = manifest.get("command")
    if command not in _RUNNERS:
        parser.error(f"manifest names unknown command {command!r}")
    started = time.perf_counter()
    code, summary, outputs = _RUNNERS[command](manifest["parameters"], args.out)
    if args.out is not None:
        _finish(command, manifest["parameters"], outputs, started)
    verdict = _replay_matches(command, summary, manifest)
    if verdict is False:
        print("replay: results differ from the recorded artifacts", file=sys.stderr)
        return EXIT_FAILED
    if verdict is True:
        print("replay: results match the recorded artifacts")
    return code


# ---------------------------------------------------------------------------
# parser wiring


def _build_parser() -> _Parser:
    parser = _Parser(prog="biwind", description=__doc__)
    parser.add_argument("--version", action="version", version=f"biwind {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run interval-arithmetic certificate tasks")
    p.add_argument("--task", default="all", choices=list(certify.TASK_IDS) + ["all"])
    p.add_argument("--min-width", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(handler=_cmd_verify)

    p = sub.add_parser("shoot", help="locate the connecting orbit by bisection")
    p.add_argument("--d", type=int, default=5)
    p.add_argument("--eps0", type=float, default=config.EPS0)
    p.add_argument("--theta-tol", type=float, default=config.THETA_TOL)
    p.add_argument("--span", type=float, default=config.SHOOT_SPAN)
    p.add_argument("--out", default=None)
    p.set_defaults(handler=_cmd_shoot)

    p = sub.add_parser("classify", help="classify seeded orbits over an angle grid")
    p.add_argument("--grid", type=int, default=200)
    p.add_argument("--theta-range", default=None, metavar="LO:HI")
    p.add_argument("--eps0", type=float, default=config.EPS0)
    p.add_argument("--out", default=None)
    p.set_defaults(handler=_cmd_classify)

    p = sub.add_parser("wind", help="build the winding radial profile")
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--eps0", type=float, default=config.WIND_EPS0)
    p.add_argument("--blowup-norm", type=float, default=config.BLOWUP_NORM)
    p.add_argument("--span", type=float, default=config.MAX_SPAN)
    p.add_argument("--out", default=None)
    p.set_defaults(handler=_cmd_wind)

    p = sub.add_parser("energy", help="sample energy conservation or monotonicity")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--mode", required=True, choices=["conservation", "monotonicity"])
    p.add_argument("--seed", type=int, default=5)
    p.add_argument("--out", default=None)
    p.set_defaults(handler=_cmd_energy)

    p = sub.add_parser("spectrum", help="print a linearization and its eigensystem")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--parity", default="even", choices=["even", "odd"])
    p.add_argument("--out", default=None)
    p.set_defaults(handler=_cmd_spectrum)

    p = sub.add_parser("replay", help="re-run a command from its manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(handler=_cmd_replay)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    return args.handler(args, parser)


if __name__ == "__main__":
    sys.exit(main())
