"""Command-line interface.

Subcommands: equilibrium, simulate-reduced, simulate-full, simulate-closed,
boundary-layer, stability-chart, epsilon-sweep.  Exit codes: 0 success,
2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .chart import sweep_chart
from .config import (RunRecord, Scenario, Stopwatch, emit_csv,
                     parse_scenario, parse_scenario_text)
from .control import ClosedLoopConfig, Gains, closed_loop_simulate
from .errors import ConfigurationError, NumericalError
from .experiments import epsilon_sweep
from .model import assemble
from .params import PressureProfile
from .pde import simulate_boundary_layer, simulate_full
from .reduced import simulate_reduced
from .steady_state import find_equilibrium

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _load_scenario(args) -> Scenario:
    if getattr(args, "config", None):
        scenario = parse_scenario(args.config)
    else:
        scenario = parse_scenario_text("")
    return scenario


def _build_form(scenario: Scenario, vx_override=None):
    params = scenario.params
    if vx_override is not None:
        params = params.replace(v_x=float(vx_override))
    kind = scenario["pressure_kind"]
    if kind == "constant":
        pressure = PressureProfile()
    else:
        pressure = PressureProfile(kind="exponential",
                                   rate=scenario["pressure_rate"])
    return assemble(params, carcass=scenario["carcass"],
                    pressures=(pressure, pressure))


def _out(args, name: str) -> str:
    os.makedirs(args.out_dir, exist_ok=True)
    return os.path.join(args.out_dir, f"{args.prefix}{name}")


def _numeric(args, scenario, key, attr=None):
    value = getattr(args, attr or key.replace("-", "_"), None)
    return scenario[key] if value is None else value


def _write_record(args, scenario, outputs, notes, elapsed):
    record = RunRecord(command=args.command, config_echo=scenario.echo(),
                       outputs=outputs, notes=notes, wall_time_s=elapsed)
    path = _out(args, "run.txt")
    record.write(path)
    return path


def _cmd_equilibrium(args):
    scenario = _load_scenario(args)
    form = _build_form(scenario)
    U_star = np.array([scenario["delta1"], scenario["delta2"]])
    n_cells = _numeric(args, scenario, "n_cells")
    with Stopwatch() as sw:
        eq = find_equilibrium(U_star, form.b, form, n_cells)
    eig = np.linalg.eigvals(eq.A1tilde)
    path = _out(args, "equilibrium.csv")
    emit_csv([{
        "beta": eq.X_star[0], "r": eq.X_star[1],
        "alpha1": eq.alpha_star[0], "alpha2": eq.alpha_star[1],
        "Fy1": eq.F_star[0], "Fy2": eq.F_star[1],
        "C1": eq.Ctilde[0, 0], "C2": eq.Ctilde[1, 1],
        "eig_re_1": eig[0].real, "eig_im_1": eig[0].imag,
        "eig_re_2": eig[1].real, "eig_im_2": eig[1].imag,
        "residual": eq.residual,
    }], path)
    _write_record(args, scenario, [path],
                  [f"n_cells = {n_cells}"], sw.elapsed)
    return EXIT_OK


def _steering(scenario):
    return np.array([scenario["delta1"], scenario["delta2"]])


def _cmd_simulate_reduced(args):
    scenario = _load_scenario(args)
    form = _build_form(scenario)
    X0 = np.array([scenario["beta0"], scenario["r0"]])
    dt = args.dt if args.dt is not None else 1e-4
    T = _numeric(args, scenario, "T")
    with Stopwatch() as sw:
        traj = simulate_reduced(X0, _steering(scenario), form.b, form,
                                dt=dt, T=T,
                                n_cells=_numeric(args, scenario, "n_cells"),
                                sample_stride=scenario["sample_stride"])
    path = _out(args, "reduced.csv")
    emit_csv([{"t": t, "beta": X[0], "r": X[1], "Fy1": F[0], "Fy2": F[1],
               "delta1": U[0], "delta2": U[1]}
              for t, X, F, U in zip(traj.t, traj.X, traj.F, traj.U)], path)
    _write_record(args, scenario, [path],
                  [f"diverged = {traj.diverged}"], sw.elapsed)
    return EXIT_OK


def _cmd_simulate_full(args):
    scenario = _load_scenario(args)
    form = _build_form(scenario)
    X0 = np.array([scenario["beta0"], scenario["r0"]])
    z0 = np.array([scenario["z0_1"], scenario["z0_2"]])
    snapshot_times = [float(s) for s in
                      (args.snapshot_times.split(",")
                       if args.snapshot_times else [])]
    with Stopwatch() as sw:
        traj = simulate_full(
            X0, z0, _steering(scenario), form,
            dt=_numeric(args, scenario, "dt"),
            T=_numeric(args, scenario, "T"),
            n_cells=_numeric(args, scenario, "n_cells"),
            sample_stride=scenario["sample_stride"],
            snapshot_times=snapshot_times)
    states = _out(args, "full_states.csv")
    emit_csv([{"t": t, "beta": X[0], "r": X[1], "Fy1": F[0], "Fy2": F[1],
               "delta1": U[0], "delta2": U[1], "zeta_norm": zn}
              for t, X, F, U, zn in zip(traj.t, traj.X, traj.F, traj.U,
                                        traj.zeta_norm)], states)
    outputs = [states]
    xi = np.linspace(0.0, 1.0, traj.meta["n_cells"] + 1)
    for ts, z in sorted(traj.snapshots.items()):
        snap = _out(args, f"full_snapshot_t{ts:g}.csv")
        emit_csv([{"xi": x, "z1": z1, "z2": z2}
                  for x, z1, z2 in zip(xi, z[0], z[1])], snap)
        outputs.append(snap)
    _write_record(args, scenario, outputs,
                  [f"diverged = {traj.diverged}",
                   f"Lbar_rule = {traj.meta['Lbar_rule']}",
                   f"eps = {traj.meta['eps']!r}"], sw.elapsed)
    return EXIT_OK


def _parse_gain_list(text, want, name):
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != want:
        raise ConfigurationError(
            f"--{name} needs {want} comma-separated numbers")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise ConfigurationError(f"--{name}: {exc}")


def _cmd_simulate_closed(args):
    scenario = _load_scenario(args)
    form = _build_form(scenario, vx_override=args.vx)
    n_cells = _numeric(args, scenario, "n_cells")
    eq = find_equilibrium(_steering(scenario), form.b, form, n_cells)

    Fvals = (_parse_gain_list(args.F, 4, "F") if args.F
             else list(scenario["F"]))
    Lvals = (_parse_gain_list(args.L, 2, "L") if args.L
             else list(scenario["L"]))
    gains = Gains(F=np.array(Fvals).reshape(2, 2),
                  L=np.array(Lvals).reshape(2, 1),
                  alpha_star=eq.alpha_star)
    mode = "state" if args.state_feedback else "output"
    cfg = ClosedLoopConfig(
        gains=gains, target=eq,
        delay=args.delay if args.delay is not None else scenario["delay"],
        noise_std=(args.noise_std if args.noise_std is not None
                   else scenario["noise_std"]),
        noise_sample_dt=(args.noise_dt if args.noise_dt is not None
                         else scenario["noise_dt"]),
        rng_seed=args.seed if args.seed is not None else scenario["seed"],
        mode=mode)

    k = args.k if args.k is not None else 1.0
    if args.k is not None:
        X0 = -k * np.array([0.03, -0.05])
    else:
        X0 = np.array([scenario["beta0"], scenario["r0"]])
    z0 = np.array([scenario["z0_1"], scenario["z0_2"]])
    xhat0 = np.array([scenario["xhat_beta0"], scenario["xhat_r0"]])

    with Stopwatch() as sw:
        res = closed_loop_simulate(
            cfg, X0, z0, xhat0, form,
            dt=_numeric(args, scenario, "dt"),
            T=_numeric(args, scenario, "T"),
            n_cells=n_cells, sample_stride=scenario["sample_stride"])

    states = _out(args, "closed_states.csv")
    emit_csv([{"t": t, "beta": X[0], "r": X[1],
               "beta_hat": Xh[0], "r_hat": Xh[1],
               "Fy1": F[0], "Fy2": F[1],
               "delta1": U[0], "delta2": U[1], "zeta_norm": zn}
              for t, X, Xh, F, U, zn in zip(res.t, res.X, res.Xhat, res.F,
                                            res.U, res.zeta_norm)], states)
    norms = _out(args, "closed_norms.csv")
    emit_csv([{"t": t, "composite_norm": cn, "estimate_error_norm": en}
              for t, cn, en in zip(res.t, res.composite_norm,
                                   res.estimate_error_norm)], norms)
    _write_record(args, scenario, [states, norms],
                  [f"mode = {mode}", f"diverged = {res.diverged}",
                   f"seed = {cfg.rng_seed}"], sw.elapsed)
    return EXIT_OK


def _cmd_boundary_layer(args):
    scenario = _load_scenario(args)
    form = _build_form(scenario)
    X = np.array([scenario["beta0"], scenario["r0"]])
    U = _steering(scenario)
    z0 = np.array([scenario["z0_1"], scenario["z0_2"]])
    n_cells = _numeric(args, scenario, "n_cells")
    with Stopwatch() as sw:
        rec = simulate_boundary_layer(z0, X, U, form, ds=args.ds, S=args.S,
                                      n_cells=n_cells)
    path = _out(args, "boundary_layer.csv")
    emit_csv([{"s": s, "norm": n} for s, n in zip(rec.s, rec.norm)], path)
    _write_record(args, scenario, [path],
                  [f"fitted_decay_rate = {rec.rate!r}"], sw.elapsed)
    return EXIT_OK


def _cmd_stability_chart(args):
    scenario = _load_scenario(args)
    index_values = np.linspace(args.index_min, args.index_max,
                               args.index_steps)
    vx_values = np.linspace(args.vx_min, args.vx_max, args.vx_steps)
    n_cells = _numeric(args, scenario, "n_cells")
    with Stopwatch() as sw:
        cells = sweep_chart(index_values, vx_values, scenario.params,
                            carcass=scenario["carcass"], n_cells=n_cells,
                            jobs=args.jobs)
    path = _out(args, "chart.csv")
    emit_csv([{"index": c.understeer_index, "v_x": c.v_x,
               "max_real_part": c.max_real_part, "stable": c.stable}
              for c in cells], path)
    failures = [c for c in cells if c.error]
    notes = [f"cells = {len(cells)}", f"failed_cells = {len(failures)}"]
    notes += [f"failure at (index={c.understeer_index:g}, v_x={c.v_x:g}): "
              f"{c.error}" for c in failures[:10]]
    _write_record(args, scenario, [path], notes, sw.elapsed)
    return EXIT_OK


def _cmd_epsilon_sweep(args):
    scenario = _load_scenario(args)
    with Stopwatch() as sw:
        res = epsilon_sweep(scenario.params, carcass=scenario["carcass"],
                            T=args.T, n_cells=_numeric(args, scenario,
                                                       "n_cells"),
                            halvings=args.halvings,
                            cfl_fraction=args.cfl_fraction)
    path = _out(args, "epsilon_sweep.csv")
    rows = []
    for i, (eps, gap) in enumerate(zip(res.eps_values, res.gaps)):
        ratio = res.ratios[i - 1] if i > 0 else float("nan")
        rows.append({"eps": eps, "sup_gap": gap, "ratio_to_previous": ratio})
    emit_csv(rows, path)
    _write_record(args, scenario, [path],
                  [f"ratios = {[float(r) for r in res.ratios]!r}"],
                  sw.elapsed)
    return EXIT_OK


def _add_common(sub):
    sub.add_argument("--config", help="scenario file (key = value lines)")
    sub.add_argument("--out-dir", default=".", help="output directory")
    sub.add_argument("--prefix", default="", help="output filename prefix")
    sub.add_argument("--n-cells", type=int, default=None,
                     help="spatial cells N (grid has N+1 nodes)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semitrack",
        description="Single-track vehicle model with distributed tire "
                    "friction: simulation, stability analysis and "
                    "stabilizing control.")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("equilibrium",
                        help="solve the constant-steering equilibrium")
    _add_common(p)
    p.set_defaults(fn=_cmd_equilibrium)

    p = subs.add_parser("simulate-reduced",
                        help="integrate the quasi-static-tire reduced ODE")
    _add_common(p)
    p.add_argument("--dt", type=float, default=None, help="step [s]")
    p.add_argument("--T", type=float, default=None, help="horizon [s]")
    p.set_defaults(fn=_cmd_simulate_reduced)

    p = subs.add_parser("simulate-full",
                        help="integrate the full ODE-PDE interconnection")
    _add_common(p)
    p.add_argument("--dt", type=float, default=None, help="step [s]")
    p.add_argument("--T", type=float, default=None, help="horizon [s]")
    p.add_argument("--snapshot-times", default="",
                   help="comma-separated times for bristle-grid snapshots")
    p.set_defaults(fn=_cmd_simulate_full)

    p = subs.add_parser("simulate-closed",
                        help="closed-loop run with observer, delay, noise")
    _add_common(p)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--T", type=float, default=None)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--state-feedback", action="store_true")
    group.add_argument("--output-feedback", action="store_true")
    p.add_argument("--F", default=None,
                   help="state-feedback gain, 4 comma-separated row-major")
    p.add_argument("--L", default=None,
                   help="output-injection gain, 2 comma-separated")
    p.add_argument("--delay", type=float, default=None,
                   help="input delay [s]")
    p.add_argument("--noise-std", type=float, default=None,
                   help="yaw-rate noise std [rad/s]")
    p.add_argument("--noise-dt", type=float, default=None,
                   help="noise hold time [s]")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--k", type=float, default=None,
                   help="initial-condition scale: X0 = -k [0.03, -0.05]")
    p.add_argument("--vx", type=float, default=None,
                   help="override longitudinal speed [m/s]")
    p.set_defaults(fn=_cmd_simulate_closed)

    p = subs.add_parser("boundary-layer",
                        help="frozen-slip fast subsystem in stretched time")
    _add_common(p)
    p.add_argument("--ds", type=float, default=1e-4,
                   help="stretched-time step")
    p.add_argument("--S", type=float, default=5.0,
                   help="stretched-time horizon")
    p.set_defaults(fn=_cmd_boundary_layer)

    p = subs.add_parser("stability-chart",
                        help="eigenvalue chart over (understeer index, v_x)")
    _add_common(p)
    p.add_argument("--index-min", type=float, default=0.5)
    p.add_argument("--index-max", type=float, default=1.5)
    p.add_argument("--index-steps", type=int, default=15)
    p.add_argument("--vx-min", type=float, default=2.0)
    p.add_argument("--vx-max", type=float, default=60.0)
    p.add_argument("--vx-steps", type=int, default=15)
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel worker processes")
    p.set_defaults(fn=_cmd_stability_chart)

    p = subs.add_parser("epsilon-sweep",
                        help="full-vs-reduced gap as the fast scale halves")
    _add_common(p)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--halvings", type=int, default=2)
    p.add_argument("--cfl-fraction", type=float, default=0.5)
    p.set_defaults(fn=_cmd_epsilon_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
