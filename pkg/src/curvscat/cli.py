"""Command-line front end: solve, shoot, sweep, verify, flow.

All data files are emitted deterministically: CSV floats carry 12
significant digits, JSON floats 17; timestamps appear only in the run
manifest.  Exit codes: 0 ok, 1 usage error, 2 blow-up or non-scattering
outcome, 3 partial sweep failure, 4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import re
import sys
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import analysis, geometry, shooting, verification
from .closed_forms import AsymptoticData
from .integrator import (NotConvergedError, SolverConfig, Trajectory,
                         deflection, integrate)

TOOL_VERSION = "0.1.0"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NONSCATTERING = 2
EXIT_PARTIAL = 3
EXIT_VERIFY_FAIL = 4


class UsageError(Exception):
    pass


# lets values like -0.75pi or -pi pass as arguments, not flags
_NEGATIVE_VALUE = re.compile(
    r"^-(?:(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?(?:pi)?|pi)$")


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; the contract reserves 2 for
    # non-scattering outcomes and 1 for usage errors
    def __init__(self, *a, **kw):
        super().__init__(*a, **kw)
        self._negative_number_matcher = _NEGATIVE_VALUE

    def error(self, message):
        raise UsageError(message)


def parse_angle(text: str) -> float:
    """Angle in radians, or a '<number>pi' literal such as -0.75pi."""
    s = text.strip().lower()
    if s.endswith("pi"):
        head = s[:-2]
        if head in ("", "+", "-"):
            head += "1"
        return float(head) * math.pi
    return float(s)


# --- deterministic emission -------------------------------------------------


def _csv_num(x) -> str:
    return format(float(x), ".12g")


def _json_render(obj, indent: int = 0) -> str:
    pad = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v) or math.isinf(v):
            return "null"
        return format(v, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple, np.ndarray)):
        items = [_json_render(v, indent + 1) for v in obj]
        return "[" + ", ".join(items) + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        inner = ",\n".join(
            f"{pad}  {json.dumps(str(k))}: {_json_render(v, indent + 1)}"
            for k, v in obj.items())
        return "{\n" + inner + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def write_json(path: Path, obj) -> None:
    path.write_text(_json_render(obj) + "\n")


def write_trajectory_csv(path: Path, traj: Trajectory) -> None:
    en = traj.energies()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "xi", "eta", "xi_dot", "eta_dot", "energy"])
        for k in range(len(traj)):
            w.writerow([_csv_num(traj.t[k]), _csv_num(traj.xi[k]),
                        _csv_num(traj.eta[k]), _csv_num(traj.xi_dot[k]),
                        _csv_num(traj.eta_dot[k]), _csv_num(en[k])])


def write_radial_csv(path: Path, sol: geometry.RadialSolution) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "u", "K"])
        for k in range(len(sol.r_grid)):
            w.writerow([_csv_num(sol.r_grid[k]), _csv_num(sol.u_values[k]),
                        _csv_num(sol.k_values[k])])


def write_sweep_csv(path: Path, rows: list[shooting.SweepRow]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["theta", "eta_in", "kappa", "alpha", "k_star",
                    "pokhozaev_residual", "energy_drift"])
        for r in rows:
            w.writerow([_csv_num(r.theta), _csv_num(r.eta_in), _csv_num(r.kappa),
                        _csv_num(r.alpha), _csv_num(r.k_star),
                        _csv_num(r.pokhozaev_residual), _csv_num(r.energy_drift)])


def write_manifest(out_dir: Path, command: str, argv: list[str], inputs: dict,
                   cfg: SolverConfig, outputs: list[str]) -> None:
    write_json(out_dir / "manifest.json", {
        "schema": "curvscat/manifest/v1",
        "command": command,
        "argv": argv,
        "inputs": inputs,
        "config": asdict(cfg),
        "outputs": sorted(outputs + ["manifest.json"]),
        "version": f"curvscat {TOOL_VERSION}",
        "timestamp": datetime.now(timezone.utc).isoformat(),
    })


# --- shared pieces -----------------------------------------------------------


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out-dir", default=".", help="directory for emitted files")
    d = SolverConfig()
    p.add_argument("--rel-tol", type=float, default=d.rel_tol)
    p.add_argument("--abs-tol", type=float, default=d.abs_tol)
    p.add_argument("--escape-tol", type=float, default=d.escape_tol)
    p.add_argument("--max-time", type=float, default=d.max_time)
    p.add_argument("--dense-step", type=float, default=d.dense_step)
    p.add_argument("--t-start-offset", type=float, default=d.t_start_offset)
    p.add_argument("--min-tail", type=float, default=d.min_tail)
    p.add_argument("--tail-pad", type=float, default=d.tail_pad)


def _config_from(args) -> SolverConfig:
    return SolverConfig(
        rel_tol=args.rel_tol, abs_tol=args.abs_tol, escape_tol=args.escape_tol,
        max_time=args.max_time, dense_step=args.dense_step,
        t_start_offset=args.t_start_offset, min_tail=args.min_tail,
        tail_pad=args.tail_pad)


def _events_dict(traj: Trajectory) -> dict:
    ev = traj.events
    out = {"t0": ev.t0, "t_half": ev.t_half, "t_m": ev.t_m}
    if ev.blowup is not None:
        p = ev.blowup.last_state
        out["blowup"] = {
            "reason": ev.blowup.reason,
            "last_state": {"t": p.t, "xi": p.xi, "eta": p.eta,
                           "xi_dot": p.xi_dot, "eta_dot": p.eta_dot},
        }
    else:
        out["blowup"] = None
    return out


def _solution_summary(traj: Trajectory, inputs: dict, cfg: SolverConfig) -> tuple[dict, "geometry.RadialSolution | None"]:
    theta = deflection(traj)
    summary = {
        "schema": "curvscat/summary/v1",
        "inputs": inputs,
        "events": _events_dict(traj),
        "theta": theta,
        "escaped": True,
        "drift": traj.max_energy_drift,
        "config": asdict(cfg),
    }
    sol = None
    if traj.events.t0 is not None:
        sol = geometry.to_radial(traj)
        fit = geometry.asymptotic_fit(sol)
        kap_t, al_t = geometry.theta_identities(theta)
        summary.update({
            "kappa": sol.kappa,
            "alpha": sol.alpha,
            "k_star": sol.k_star,
            "fits": {
                "u_slope": fit.u_slope, "u_intercept": fit.u_intercept,
                "k_slope": fit.k_slope, "k_intercept": fit.k_intercept,
                "window_r": list(fit.fit_window), "residual": fit.residual,
            },
            "residuals": {
                "pokhozaev": geometry.pokhozaev_residual(sol.kappa, sol.alpha),
                "pokhozaev_rel": abs(geometry.pokhozaev_residual(sol.kappa, sol.alpha)) / (16 * math.pi**2),
                "kappa_vs_theta_rel": abs(sol.kappa - kap_t) / kap_t,
                "alpha_vs_theta_rel": abs(sol.alpha - al_t) / al_t,
            },
        })
    else:
        summary["note"] = "eta zero crossing beyond the time budget: no radial data"
    return summary, sol


# --- commands ----------------------------------------------------------------


def cmd_solve(args, argv) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = _config_from(args)
    inputs = {"eta_in": args.eta_in, "xi_in": args.xi_in}
    outputs = []

    if args.eta_in <= 0.0:
        summary = {
            "schema": "curvscat/summary/v1",
            "inputs": inputs,
            "escaped": False,
            "blowup": {"reason": "eta_in nonpositive: no scattering"},
            "config": asdict(cfg),
        }
        write_json(out / "summary.json", summary)
        outputs.append("summary.json")
        write_manifest(out, "solve", argv, inputs, cfg, outputs)
        print("non-scattering: eta_in nonpositive")
        return EXIT_NONSCATTERING

    traj = integrate(AsymptoticData(args.xi_in, args.eta_in), cfg)
    write_trajectory_csv(out / "trajectory.csv", traj)
    outputs.append("trajectory.csv")

    if traj.events.blowup is not None or not traj.escaped:
        reason = (traj.events.blowup.reason if traj.events.blowup is not None
                  else "no escape within the time budget")
        summary = {
            "schema": "curvscat/summary/v1",
            "inputs": inputs,
            "events": _events_dict(traj),
            "escaped": traj.escaped,
            "blowup": {"reason": reason},
            "drift": traj.max_energy_drift,
            "config": asdict(cfg),
        }
        write_json(out / "summary.json", summary)
        outputs.append("summary.json")
        write_manifest(out, "solve", argv, inputs, cfg, outputs)
        print(f"non-scattering: {reason}")
        return EXIT_NONSCATTERING

    summary, sol = _solution_summary(traj, inputs, cfg)
    if sol is not None:
        write_radial_csv(out / "radial.csv", sol)
        outputs.append("radial.csv")
    write_json(out / "summary.json", summary)
    outputs.append("summary.json")
    write_manifest(out, "solve", argv, inputs, cfg, outputs)
    print(f"theta = {summary['theta']:.12g}")
    return EXIT_OK


def cmd_shoot(args, argv) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = _config_from(args)
    theta_t = parse_angle(args.theta)
    inputs = {"theta_target": theta_t, "root_tol": args.root_tol}
    try:
        res = shooting.shoot(theta_t, cfg, root_tol=args.root_tol,
                             ceiling=args.eta_ceiling)
    except shooting.BracketNotFoundError as exc:
        write_json(out / "summary.json", {
            "schema": "curvscat/summary/v1",
            "inputs": inputs,
            "error": str(exc),
            "scanned": [{"eta_in": e, "theta": th} for e, th in exc.scanned],
            "config": asdict(cfg),
        })
        write_manifest(out, "shoot", argv, inputs, cfg, ["summary.json"])
        print(f"bracket not found: {exc}")
        return EXIT_NONSCATTERING

    outputs = ["trajectory.csv", "summary.json"]
    write_trajectory_csv(out / "trajectory.csv", res.trajectory)
    summary, sol = _solution_summary(res.trajectory, inputs, cfg)
    summary["shooting"] = {
        "theta_target": res.theta_target,
        "theta_achieved": res.theta_achieved,
        "eta_in": res.eta_in_found,
        "iterations": res.iterations,
        "bracket": list(res.bracket),
    }
    if sol is not None:
        write_radial_csv(out / "radial.csv", sol)
        outputs.append("radial.csv")
    write_json(out / "summary.json", summary)
    write_manifest(out, "shoot", argv, inputs, cfg, outputs)
    print(f"eta_in = {res.eta_in_found:.12g}  theta = {res.theta_achieved:.12g}")
    return EXIT_OK


def cmd_sweep(args, argv) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = _config_from(args)
    lo, hi = parse_angle(args.theta_min), parse_angle(args.theta_max)
    grid = np.linspace(lo, hi, args.n)
    inputs = {"theta_min": lo, "theta_max": hi, "n": args.n,
              "root_tol": args.root_tol}
    rows = []
    for theta_t in grid:
        rows += shooting.sweep([theta_t], cfg, root_tol=args.root_tol,
                               ceiling=args.eta_ceiling)
        r = rows[-1]
        print(f"theta {theta_t:+.6f}: {r.status}"
              + (f" eta_in = {r.eta_in:.9g}" if r.status == "ok" else ""))
    write_sweep_csv(out / "sweep.csv", rows)
    write_json(out / "sweep.json", {
        "schema": "curvscat/sweep/v1",
        "inputs": inputs,
        "rows": [{
            "theta_target": r.theta_target, "theta": r.theta, "eta_in": r.eta_in,
            "kappa": r.kappa, "alpha": r.alpha, "k_star": r.k_star,
            "pokhozaev_residual": r.pokhozaev_residual,
            "energy_drift": r.energy_drift, "status": r.status,
        } for r in rows],
        "config": asdict(cfg),
    })
    write_manifest(out, "sweep", argv, inputs, cfg, ["sweep.csv", "sweep.json"])
    failures = sum(1 for r in rows if r.status != "ok")
    return EXIT_PARTIAL if failures else EXIT_OK


def cmd_verify(args, argv) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = _config_from(args)
    etas = args.eta_in
    results = verification.run_suite(etas, cfg)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name} (eta_in = {r.eta_in:g}): {r.detail}")
    all_pass = all(r.passed for r in results)
    inputs = {"eta_in": list(etas)}
    write_json(out / "verify_report.json", {
        "schema": "curvscat/verify/v1",
        "inputs": inputs,
        "items": [{"name": r.name, "eta_in": r.eta_in, "passed": r.passed,
                   "detail": r.detail} for r in results],
        "passed": all_pass,
        "config": asdict(cfg),
    })
    write_manifest(out, "verify", argv, inputs, cfg, ["verify_report.json"])
    print("verification " + ("PASSED" if all_pass else "FAILED"))
    return EXIT_OK if all_pass else EXIT_VERIFY_FAIL


def cmd_flow(args, argv) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = _config_from(args)
    state = analysis.GradientFlowState.from_anchor(
        args.mu0, args.delta, args.epsilon, nu0=args.nu0)
    res = analysis.gradient_flow_run(state, tol=args.tol,
                                     max_iter=args.max_iter, keep_history=True)
    with open(out / "flow.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "mu", "nu", "grad_norm"])
        for n, (mu, nu, gn) in enumerate(res.history):
            w.writerow([n, _csv_num(mu), _csv_num(nu), _csv_num(gn)])
    inputs = {"mu0": state.mu0, "nu0": state.nu0, "delta": state.delta,
              "epsilon": state.epsilon, "tol": args.tol}
    write_json(out / "flow_summary.json", {
        "schema": "curvscat/flow/v1",
        "inputs": inputs,
        "fixed_point": {"mu": res.fixed_point[0], "nu": res.fixed_point[1]},
        "iterations": res.iterations,
        "stayed_in_quadrant": res.stayed_in_quadrant,
        "converged": res.converged,
        "grad_norm": res.grad_norm,
    })
    write_manifest(out, "flow", argv, inputs, cfg, ["flow.csv", "flow_summary.json"])
    ok = res.converged and res.stayed_in_quadrant
    print(f"fixed point = ({res.fixed_point[0]:.12g}, {res.fixed_point[1]:.12g})"
          f"  converged = {res.converged}  in_quadrant = {res.stayed_in_quadrant}")
    return EXIT_OK if ok else EXIT_NONSCATTERING


def build_parser() -> _Parser:
    p = _Parser(prog="curvscat",
                description="Scattering solver for self-consistent Gauss "
                            "curvature surfaces")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="integrate one (eta_in, xi_in) datum")
    ps.add_argument("--eta-in", type=float, required=True)
    ps.add_argument("--xi-in", type=float, default=0.0)
    _add_solver_flags(ps)
    ps.set_defaults(func=cmd_solve)

    ph = sub.add_parser("shoot", help="find eta_in for a target deflection")
    ph.add_argument("--theta", required=True,
                    help="target angle in radians or '<x>pi' (e.g. -0.75pi)")
    ph.add_argument("--root-tol", type=float, default=1e-8)
    ph.add_argument("--eta-ceiling", type=float, default=shooting.DEFAULT_CEILING)
    _add_solver_flags(ph)
    ph.set_defaults(func=cmd_shoot)

    pw = sub.add_parser("sweep", help="tabulate the deflection map on a theta grid")
    pw.add_argument("--theta-min", required=True)
    pw.add_argument("--theta-max", required=True)
    pw.add_argument("--n", type=int, required=True)
    pw.add_argument("--root-tol", type=float, default=1e-8)
    pw.add_argument("--eta-ceiling", type=float, default=shooting.DEFAULT_CEILING)
    _add_solver_flags(pw)
    pw.set_defaults(func=cmd_sweep)

    pv = sub.add_parser("verify", help="run the invariant suite")
    pv.add_argument("--eta-in", type=float, nargs="*", default=[6.0, 8.0, 12.0])
    _add_solver_flags(pv)
    pv.set_defaults(func=cmd_verify)

    pf = sub.add_parser("flow", help="run the anchored gradient-flow recurrence")
    pf.add_argument("--mu0", type=float, required=True)
    pf.add_argument("--nu0", type=float, default=None)
    pf.add_argument("--delta", type=float, required=True)
    pf.add_argument("--epsilon", type=float, default=0.1)
    pf.add_argument("--tol", type=float, default=1e-10)
    pf.add_argument("--max-iter", type=int, default=100000)
    _add_solver_flags(pf)
    pf.set_defaults(func=cmd_flow)
    return p


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args, list(argv))
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except (ValueError, NotConvergedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
