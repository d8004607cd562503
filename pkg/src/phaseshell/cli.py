"""Command-line drivers: reconstruction, temporal-convergence study, sweeps.

Configuration comes from ``key = value`` files ('#' comments) overridden by
command-line flags.  Progress goes to stderr; data goes to files (and the
convergence/sweep tables to stdout).  Exit codes: 0 success, 1 usage or
config error, 2 numerical failure, 3 instability detected.
"""

import argparse
import logging
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import diagnostics, solver
from .extract import marching_cubes, write_energy_csv, write_obj, write_vtk_structured
from .grid import GridSpec, ScalarField
from .phasefield import ModelParams, edge_function, epsilon_from_cells, init_phi
from .pointcloud import build_index, distance_field, fit_to_domain, load_points, subsample

log = logging.getLogger("phaseshell")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_UNSTABLE = 3

S_MODES = ("zero", "2/eps2", "4/eps2", "explicit")


class UsageError(ValueError):
    """Bad flags or config file contents."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_list(text):
    return [int(tok) for tok in str(text).split(",") if tok.strip()]


def _float_list(text):
    return [float(tok) for tok in str(text).split(",") if tok.strip()]


def _str_list(text):
    return [tok.strip() for tok in str(text).split(",") if tok.strip()]


# config-file key -> converter; shared with the flag definitions below
_KEY_TYPES = {
    "input": str, "format": str,
    "nx": int, "ny": int, "nz": int,
    "lx": float, "ly": float, "lz": float,
    "epsilon": float, "epsilon_cells": float,
    "chi": float, "gamma": float, "lam": float,
    "s_mode": str, "s_value": float,
    "dt": float, "steps": int, "T": float,
    "margin": float, "stride": int, "bucket": float,
    "out_field": str, "out_mesh": str, "out_csv": str, "out_summary": str,
    "parallel": str,
    "gs_tol": float, "newton_tol": float, "gs_max": int, "newton_max": int,
    "monitor_tol": float, "init_uniform": float,
    "ref_dt": float, "ref_steps": int,
    "dt_multipliers": _int_list, "epsilon_list": _float_list, "s_modes": _str_list,
}


@dataclass
class RunConfig:
    """Fully resolved run description; every module invariant re-checked."""

    command: str
    spec: GridSpec
    epsilon: float
    dt: float
    steps: int
    chi: float = None
    gamma: float = None
    lam: float = 1e-10
    s_mode: str = "2/eps2"
    s_value: float = None
    input: str = None
    fmt: str = "xyz"
    margin: float = 0.1
    stride: int = 1
    bucket: float = None
    out_field: str = None
    out_mesh: str = None
    out_csv: str = None
    out_summary: str = None
    parallel: str = "serial"
    gs_tol: float = 1e-6
    newton_tol: float = 1e-6
    gs_max: int = 500
    newton_max: int = 200
    monitor_tol: float = 1e-10
    init_uniform: float = None
    ref_dt: float = None
    ref_steps: int = 64
    dt_multipliers: list = field(default_factory=list)
    epsilon_list: list = field(default_factory=list)
    s_modes: list = field(default_factory=list)

    def stabilization_for(self, epsilon, s_mode=None):
        mode = s_mode if s_mode is not None else self.s_mode
        if mode == "zero":
            return 0.0
        if mode == "2/eps2":
            return 2.0 / epsilon ** 2
        if mode == "4/eps2":
            return 4.0 / epsilon ** 2
        if mode == "explicit":
            if self.s_value is None:
                raise UsageError("s_mode 'explicit' requires s_value")
            return self.s_value
        raise UsageError(f"unknown s_mode {mode!r} (expected one of {S_MODES})")

    def make_params(self, epsilon=None, dt=None, s_mode=None):
        eps = epsilon if epsilon is not None else self.epsilon
        return ModelParams(
            epsilon=eps,
            gamma=self.gamma,
            dt=dt if dt is not None else self.dt,
            chi=self.chi,
            lam=self.lam,
            stabilization=self.stabilization_for(eps, s_mode),
            gs_tol=self.gs_tol,
            newton_tol=self.newton_tol,
            gs_max=self.gs_max,
            newton_max=self.newton_max,
            sweep=self.parallel,
        )


def _read_config_file(path):
    values = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from None
    for line_no, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise UsageError(f"{path}:{line_no}: expected 'key = value', got {text!r}")
        key, _, value = text.partition("=")
        key = key.strip()
        if key not in _KEY_TYPES:
            raise UsageError(f"{path}:{line_no}: unknown key {key!r}")
        try:
            values[key] = _KEY_TYPES[key](value.strip())
        except ValueError:
            raise UsageError(f"{path}:{line_no}: bad value for {key!r}: {value.strip()!r}") from None
    return values


def _build_parser():
    parser = _Parser(prog="phaseshell", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    common = _Parser(add_help=False)
    g = common.add_argument_group("inputs")
    g.add_argument("--input", type=str, help="point cloud file")
    g.add_argument("--format", dest="format", choices=("xyz", "ply-ascii"), help="point file format")
    g.add_argument("--config", type=str, help="key = value config file; flags override it")
    g = common.add_argument_group("grid")
    g.add_argument("--nx", type=int)
    g.add_argument("--ny", type=int)
    g.add_argument("--nz", type=int)
    g.add_argument("--lx", type=float)
    g.add_argument("--ly", type=float)
    g.add_argument("--lz", type=float)
    g = common.add_argument_group("model")
    g.add_argument("--epsilon", type=float, help="interface thickness")
    g.add_argument("--epsilon-cells", dest="epsilon_cells", type=float,
                   help="derive epsilon from a transition width in cells")
    g.add_argument("--chi", type=float)
    g.add_argument("--gamma", type=float, help="initial shell half-width (default 5h)")
    g.add_argument("--lam", type=float, help="edge-function floor")
    g.add_argument("--s-mode", dest="s_mode", choices=S_MODES)
    g.add_argument("--s-value", dest="s_value", type=float)
    g.add_argument("--dt", type=float)
    g.add_argument("--steps", type=int)
    g.add_argument("--T", dest="T", type=float, help="total time (alternative to --steps)")
    g = common.add_argument_group("pipeline")
    g.add_argument("--margin", type=float)
    g.add_argument("--stride", type=int, help="keep every stride-th point")
    g.add_argument("--bucket", type=float, help="spatial index bucket size (default 2h)")
    g.add_argument("--init-uniform", dest="init_uniform", type=float,
                   help="skip the cloud and start from a uniform field (debug)")
    g.add_argument("--out-field", dest="out_field", type=str)
    g.add_argument("--out-mesh", dest="out_mesh", type=str)
    g.add_argument("--out-csv", dest="out_csv", type=str)
    g.add_argument("--out-summary", dest="out_summary", type=str)
    g = common.add_argument_group("solver")
    g.add_argument("--parallel", choices=("serial", "redblack"))
    g.add_argument("--gs-tol", dest="gs_tol", type=float)
    g.add_argument("--newton-tol", dest="newton_tol", type=float)
    g.add_argument("--gs-max", dest="gs_max", type=int)
    g.add_argument("--newton-max", dest="newton_max", type=int)
    g.add_argument("--monitor-tol", dest="monitor_tol", type=float)

    sub.add_parser("reconstruct", parents=[common],
                   help="point cloud to narrow-volume mesh")

    conv = sub.add_parser("convergence", parents=[common],
                          help="temporal convergence study against a fine-step reference")
    conv.add_argument("--ref-dt", dest="ref_dt", type=float, help="reference time step")
    conv.add_argument("--ref-steps", dest="ref_steps", type=int,
                      help="reference step count (divisible by every multiplier)")
    conv.add_argument("--dt-multipliers", dest="dt_multipliers", type=_int_list,
                      help="comma list of reference-step multipliers")

    sw = sub.add_parser("sweep", parents=[common],
                        help="cartesian parameter sweep with per-run stability verdicts")
    sw.add_argument("--dt-multipliers", dest="dt_multipliers", type=_int_list)
    sw.add_argument("--epsilon-list", dest="epsilon_list", type=_float_list)
    sw.add_argument("--s-modes", dest="s_modes", type=_str_list)
    return parser


def parse_config(argv):
    """Flags plus optional config file to a validated RunConfig."""
    ns = _build_parser().parse_args(argv)
    file_values = _read_config_file(ns.config) if ns.config else {}

    def pick(key, default=None):
        cli = getattr(ns, key, None)
        if cli is not None:
            return cli
        if key in file_values:
            return file_values[key]
        return default

    nx = pick("nx", 64)
    ny = pick("ny", 64)
    nz = pick("nz", 64)
    lx = pick("lx")
    ly = pick("ly")
    lz = pick("lz")
    if lx is None:
        lx = 1.0
    h = lx / nx
    for name, val, n in (("ly", ly, ny), ("lz", lz, nz)):
        if val is not None and abs(val - h * n) > 1e-9 * max(1.0, abs(val)):
            raise UsageError(
                f"{name}={val} is inconsistent with uniform spacing h=lx/nx={h} (expected {h * n})")
    try:
        spec = GridSpec(nx, ny, nz, h)
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    epsilon = pick("epsilon")
    epsilon_cells = pick("epsilon_cells")
    if epsilon is not None and epsilon_cells is not None:
        raise UsageError("give either epsilon or epsilon_cells, not both")
    if epsilon is None:
        epsilon = epsilon_from_cells(epsilon_cells if epsilon_cells is not None else 5.0, h)

    steps = pick("steps")
    total_time = pick("T")
    dt = pick("dt", 1e-5)
    if steps is not None and total_time is not None:
        raise UsageError("give either steps or T, not both")
    if total_time is not None:
        ratio = total_time / dt
        steps = int(round(ratio))
        if steps < 1 or abs(ratio - steps) > 1e-9 * max(1.0, ratio):
            raise UsageError(f"T={total_time} is not a positive multiple of dt={dt}")
    if steps is None:
        steps = 100
    if steps < 1:
        raise UsageError(f"steps must be >= 1, got {steps}")

    cfg = RunConfig(
        command=ns.command,
        spec=spec,
        epsilon=epsilon,
        dt=dt,
        steps=steps,
        chi=pick("chi"),
        gamma=pick("gamma", 5.0 * h),
        lam=pick("lam", 1e-10),
        s_mode=pick("s_mode", "2/eps2"),
        s_value=pick("s_value"),
        input=pick("input"),
        fmt=pick("format", "xyz"),
        margin=pick("margin", 0.1),
        stride=pick("stride", 1),
        bucket=pick("bucket", 2.0 * h),
        out_field=pick("out_field"),
        out_mesh=pick("out_mesh"),
        out_csv=pick("out_csv"),
        out_summary=pick("out_summary"),
        parallel=pick("parallel", "serial"),
        gs_tol=pick("gs_tol", 1e-6),
        newton_tol=pick("newton_tol", 1e-6),
        gs_max=pick("gs_max", 500),
        newton_max=pick("newton_max", 200),
        monitor_tol=pick("monitor_tol", 1e-10),
        init_uniform=pick("init_uniform"),
        ref_dt=pick("ref_dt"),
        ref_steps=pick("ref_steps", 64),
        dt_multipliers=pick("dt_multipliers", []),
        epsilon_list=pick("epsilon_list", []),
        s_modes=pick("s_modes", []),
    )
    try:
        cfg.make_params()  # surfaces parameter invariant violations now
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return cfg


def _initial_fields(cfg, params):
    """Distance-based phi0 and edge weight, or the uniform debug override."""
    if cfg.init_uniform is not None:
        phi0 = ScalarField.full(cfg.spec, cfg.init_uniform)
        g = edge_function(phi0, params.lam)
        return phi0, g
    if not cfg.input:
        raise UsageError("an input point cloud is required (or use --init-uniform)")
    try:
        cloud = load_points(cfg.input, cfg.fmt)
    except OSError as exc:
        raise UsageError(f"cannot read {cfg.input}: {exc}") from None
    if cfg.stride > 1:
        cloud = subsample(cloud, cfg.stride)
    cloud = fit_to_domain(cloud, cfg.spec, cfg.margin)
    index = build_index(cloud, cfg.bucket)
    d = distance_field(index, cfg.spec)
    log.info("loaded %d points; distance field on %s grid", len(cloud), cfg.spec.shape)
    phi0 = init_phi(d, params)
    g = edge_function(phi0, params.lam)
    return phi0, g


def _run_steps(phi0, g, params, steps):
    """Advance ``steps`` levels; returns (records, final_state, error).

    A solver failure stops the loop; completed records are kept so drivers
    can still write partial outputs.
    """
    st = solver.initial_state(phi0, g, params)
    records = [diagnostics.record_step(st)]
    error = None
    for _ in range(steps):
        try:
            st = solver.step(st)
        except solver.SolverConvergenceError as exc:
            error = exc
            break
        records.append(diagnostics.record_step(st))
    return records, st, error


def run_reconstruct(cfg):
    """Full pipeline: load, fit, distance, init, evolve, extract, write."""
    params = cfg.make_params()
    phi0, g = _initial_fields(cfg, params)
    records, st, error = _run_steps(phi0, g, params, cfg.steps)

    if cfg.out_field:
        write_vtk_structured(st.phi_n, cfg.spec, cfg.out_field)
    if cfg.out_mesh:
        write_obj(marching_cubes(st.phi_n), cfg.out_mesh)
    if cfg.out_csv:
        write_energy_csv(records, cfg.out_csv)

    if error is not None:
        log.error("step %d failed: %s", len(records), error)
        return EXIT_NUMERICAL
    violations = diagnostics.monotonicity_report(records, cfg.monitor_tol)
    if violations:
        log.error("energy increased at %d step(s), first at step %d", len(violations), violations[0][0])
        return EXIT_UNSTABLE
    log.info("finished %d steps; final energy %.6e, volume %.6e",
             cfg.steps, records[-1].e_tilde, records[-1].volume)
    return EXIT_OK


def rate_table(dts, errors):
    """Rows (dt, error, rate) with rate = log2 error ratio per halving.

    The rate column pairs each dt with the next finer one; the finest row
    has no rate.  Identical adjacent dts are rejected.
    """
    if len(dts) != len(errors) or len(dts) < 2:
        raise ValueError("need matching dt/error lists with at least two entries")
    order = np.argsort(dts)[::-1]
    dts = [float(dts[i]) for i in order]
    errors = [float(errors[i]) for i in order]
    rows = []
    for i, (dt, err) in enumerate(zip(dts, errors)):
        rate = None
        if i + 1 < len(dts):
            if dts[i + 1] == dt:
                raise ValueError(f"duplicate time step {dt} in rate table")
            rate = math.log(err / errors[i + 1]) / math.log(dt / dts[i + 1])
        rows.append((dt, err, rate))
    return rows


def run_convergence(cfg):
    """Errors against a fine-step reference at a shared final time."""
    if cfg.ref_dt is None:
        raise UsageError("convergence requires --ref-dt")
    multipliers = cfg.dt_multipliers or [2, 4, 8, 16]
    if any(m < 2 for m in multipliers):
        raise UsageError("dt multipliers must be >= 2 (the reference uses 1)")
    if len(set(multipliers)) != len(multipliers):
        raise UsageError(f"duplicate dt multipliers in {multipliers}")
    for m in multipliers:
        if cfg.ref_steps % m != 0:
            raise UsageError(f"ref_steps={cfg.ref_steps} is not divisible by multiplier {m}")

    params = cfg.make_params(dt=cfg.ref_dt)
    phi0, g = _initial_fields(cfg, params)

    def final_field(dt, n_steps):
        records, st, error = _run_steps(phi0, g, cfg.make_params(dt=dt), n_steps)
        if error is not None:
            raise error
        return st.phi_n

    log.info("reference run: %d steps at dt=%g", cfg.ref_steps, cfg.ref_dt)
    ref = final_field(cfg.ref_dt, cfg.ref_steps)
    vol = cfg.spec.cell_volume
    dts, errors = [], []
    for m in multipliers:
        dt = m * cfg.ref_dt
        log.info("coarse run: %d steps at dt=%g", cfg.ref_steps // m, dt)
        sol = final_field(dt, cfg.ref_steps // m)
        diff = sol.interior - ref.interior
        errors.append(math.sqrt(vol * float(np.sum(diff * diff))))
        dts.append(dt)

    rows = rate_table(dts, errors)
    lines = ["dt,error,rate"]
    for dt, err, rate in rows:
        lines.append(f"{dt:.17g},{err:.17g}," + (f"{rate:.17g}" if rate is not None else ""))
    print("\n".join(lines))
    if cfg.out_csv:
        with open(cfg.out_csv, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    return EXIT_OK


def _csv_path_for(base, label):
    if base is None:
        return None
    stem, dot, ext = base.rpartition(".")
    return f"{stem}_{label}.{ext}" if dot else f"{base}_{label}"


def run_sweep(cfg):
    """Cartesian sweep over dt multipliers, epsilons, and damping modes.

    Each run gets its own energy CSV; the summary table (stdout, optionally
    a file) carries the per-run monotonicity verdict, final volume, and
    final energy.
    """
    multipliers = cfg.dt_multipliers or [1]
    epsilons = cfg.epsilon_list or [cfg.epsilon]
    s_modes = cfg.s_modes or [cfg.s_mode]

    distance_cache = {}

    def fields_for(eps):
        # phi0 depends on epsilon only through the default chi = eps/2
        key = cfg.chi if cfg.chi is not None else eps
        if key not in distance_cache:
            params = cfg.make_params(epsilon=eps)
            distance_cache[key] = _initial_fields(cfg, params)
        return distance_cache[key]

    rows = []
    any_crash = False
    any_unstable = False
    for eps in epsilons:
        phi0, g = fields_for(eps)
        for mode in s_modes:
            for mult in multipliers:
                dt = mult * cfg.dt
                label = f"eps{eps:g}_S{mode.replace('/', '')}_dt{mult}x"
                params = cfg.make_params(epsilon=eps, dt=dt, s_mode=mode)
                records, st, error = _run_steps(phi0, g, params, cfg.steps)
                path = _csv_path_for(cfg.out_csv, label)
                if path:
                    write_energy_csv(records, path)
                if error is not None:
                    if isinstance(error, solver.SolverDivergenceError):
                        verdict = "unstable(non-finite)"
                        any_unstable = True
                    else:
                        verdict = "crash"
                        any_crash = True
                    log.error("run %s failed after %d steps: %s", label, len(records) - 1, error)
                elif len(records) > 1 and diagnostics.monotonicity_report(records, cfg.monitor_tol):
                    verdict = "unstable(energy)"
                    any_unstable = True
                else:
                    verdict = "stable"
                rows.append((label, dt, eps, mode, verdict,
                             records[-1].volume, records[-1].e_tilde))

    lines = ["label,dt,epsilon,s_mode,verdict,final_volume,final_e_tilde"]
    for label, dt, eps, mode, verdict, vol_f, e_f in rows:
        lines.append(f"{label},{dt:.17g},{eps:.17g},{mode},{verdict},{vol_f:.17g},{e_f:.17g}")
    print("\n".join(lines))
    if cfg.out_summary:
        with open(cfg.out_summary, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    if any_crash:
        return EXIT_NUMERICAL
    if any_unstable:
        return EXIT_UNSTABLE
    return EXIT_OK


_COMMANDS = {
    "reconstruct": run_reconstruct,
    "convergence": run_convergence,
    "sweep": run_sweep,
}


def main(argv=None):
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(message)s")
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else list(argv))
        return _COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except solver.SolverConvergenceError as exc:
        log.error("%s", exc)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
