"""Run configuration, CSV serialization, offline audit, and the CLI.

Everything on disk is plain text: a line-based `key = value` config format
and CSV files with shortest-round-trip decimal floats, so every numerical
claim the solver makes can be re-checked by external tooling.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass, fields as dc_fields
from pathlib import Path

import numpy as np

from .core import (BoundaryConfig, SimParams, equilibrium_state,
                   interface_initial_state, make_grid)
from .diagnostics import (DiagnosticsRecord, bracket_roots, dissipation_rate,
                          make_context, record)
from .integrator import SimulationAbort, run
from .mms import convergence_study, default_case
from .operators import chemical_potential


class ConfigError(ValueError):
    pass


def _fmt(x):
    """Shortest decimal that round-trips the double exactly."""
    return repr(float(x))


# -- run configuration -------------------------------------------------------

@dataclass
class RunConfig:
    epsilon: float = 1.0
    beta: float = 1.0
    nu: float = 1.0
    gas_R: float = 1.0
    c_v: float = 1.0
    kappa_tilde: float = 1.0
    cfl: float = 0.4
    t_final: float = 1.0
    positivity_floor: float = 1e-10
    L: float = 16.0
    N: int = 512
    phi_left: float = -1.0
    phi_right: float = 1.0
    ic: str = "interface"
    phi_width: float = 1.0
    v_amp: float = 0.0
    v_width: float = 2.0
    v_center: float = 0.0
    u_amp: float = 0.0
    u_width: float = 2.0
    u_center: float = 0.0
    theta_amp: float = 0.0
    theta_width: float = 2.0
    theta_center: float = 0.0
    outdir: str = "out"
    snapshot_every_steps: int = 0
    snapshot_every_time: float = 0.0
    diag_every_steps: int = 10
    weighted_diss: tuple = ((0.5, 0),)
    seed: int = 0
    mms_resolutions: tuple = (128, 256, 512)
    mms_t_final: float = 0.25
    mms_amplitude: float = 0.1

    def params(self):
        return SimParams(epsilon=self.epsilon, beta=self.beta, nu=self.nu,
                         gas_R=self.gas_R, c_v=self.c_v,
                         kappa_tilde=self.kappa_tilde, cfl=self.cfl,
                         t_final=self.t_final,
                         positivity_floor=self.positivity_floor)

    def grid(self):
        return make_grid(self.L, self.N)

    def bc(self):
        return BoundaryConfig(self.phi_left, self.phi_right)

    def initial_state(self):
        if self.ic == "equilibrium":
            return equilibrium_state(self.grid(), self.bc())
        return interface_initial_state(
            self.grid(), self.params(), self.bc(), phi_width=self.phi_width,
            v_amp=self.v_amp, v_width=self.v_width, v_center=self.v_center,
            u_amp=self.u_amp, u_width=self.u_width, u_center=self.u_center,
            theta_amp=self.theta_amp, theta_width=self.theta_width,
            theta_center=self.theta_center)

    def to_text(self):
        lines = []
        for f in dc_fields(self):
            value = getattr(self, f.name)
            if f.name == "weighted_diss":
                text = ",".join(f"{_fmt(a)}:{n}" for a, n in value)
            elif f.name == "mms_resolutions":
                text = ",".join(str(n) for n in value)
            elif isinstance(value, float):
                text = _fmt(value)
            else:
                text = str(value)
            lines.append(f"{f.name} = {text}")
        return "\n".join(lines) + "\n"


def _parse_weighted(text):
    pairs = []
    text = text.strip()
    if not text:
        return ()
    for chunk in text.split(","):
        alpha_str, _, n_str = chunk.partition(":")
        pairs.append((float(alpha_str), int(n_str)))
    return tuple(pairs)


def _parse_resolutions(text):
    return tuple(int(n) for n in text.split(",") if n.strip())


_PARSERS = {
    "ic": str,
    "outdir": str,
    "N": int,
    "snapshot_every_steps": int,
    "diag_every_steps": int,
    "seed": int,
    "weighted_diss": _parse_weighted,
    "mms_resolutions": _parse_resolutions,
}


def parse_config(text):
    """Parse the `key = value` format; unknown keys are a hard error."""
    known = {f.name for f in dc_fields(RunConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"expected 'key = value' (line {lineno}): {raw.strip()!r}")
        key = key.strip()
        value = value.strip()
        if key not in known:
            raise ConfigError(f"unknown key '{key}' (line {lineno})")
        parser = _PARSERS.get(key, float)
        try:
            values[key] = parser(value)
        except ValueError as exc:
            raise ConfigError(f"bad value for '{key}' (line {lineno}): {exc}") from None
    cfg = RunConfig(**values)
    _validate_config(cfg)
    return cfg


def _validate_config(cfg):
    try:
        cfg.params()
        BoundaryConfig(cfg.phi_left, cfg.phi_right)
        make_grid(cfg.L, cfg.N)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.L != int(cfg.L):
        raise ConfigError(f"L must be an integer (unit-interval averages), got {cfg.L}")
    if cfg.N % (2 * int(cfg.L)) != 0:
        raise ConfigError(f"N = {cfg.N} cells do not tile {2 * int(cfg.L)} unit "
                          "intervals; pick N divisible by 2L")
    if cfg.ic not in ("interface", "equilibrium"):
        raise ConfigError(f"ic must be 'interface' or 'equilibrium', got '{cfg.ic}'")
    if cfg.t_final < 0:
        raise ConfigError(f"t_final must be >= 0, got {cfg.t_final}")
    for key in ("snapshot_every_steps", "diag_every_steps", "seed"):
        if getattr(cfg, key) < 0:
            raise ConfigError(f"{key} must be >= 0")
    if cfg.snapshot_every_time < 0:
        raise ConfigError("snapshot_every_time must be >= 0")
    for alpha, _ in cfg.weighted_diss:
        if not 0.0 < alpha < 1.0:
            raise ConfigError(f"weighted_diss alpha must be in (0, 1), got {alpha}")


# -- snapshots ----------------------------------------------------------------

SNAPSHOT_COLUMNS = ("x", "v", "u", "theta", "phi", "mu", "G")


def write_snapshot(state, params, path):
    """Interior cells as CSV rows x,v,u,theta,phi,mu,G in ascending x."""
    s = state.grid.interior
    mu = chemical_potential(state, params)[s]
    columns = (state.grid.x, state.v[s], state.u[s], state.theta[s],
               state.phi[s], mu, state.G[s])
    with open(path, "w", newline="") as fh:
        fh.write(",".join(SNAPSHOT_COLUMNS) + "\n")
        for row in zip(*columns):
            fh.write(",".join(_fmt(val) for val in row) + "\n")


def read_snapshot(path):
    """Snapshot columns as a dict of float arrays."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != SNAPSHOT_COLUMNS:
            raise ValueError(f"unexpected snapshot header in {path}: {header}")
        rows = [[float(cell) for cell in row] for row in reader if row]
    data = np.asarray(rows)
    return {name: data[:, k] for k, name in enumerate(SNAPSHOT_COLUMNS)}


# -- diagnostics time series ---------------------------------------------------

_RECORD_SCALARS = ("t", "mass_excess", "energy_total", "e_lyap", "v_diss",
                   "diss_cum", "e0", "alpha1", "alpha2", "phi_min", "phi_max",
                   "v_min", "v_max", "theta_min", "theta_max",
                   "bracket_violations", "lemma24_residual")


def _weighted_column(alpha, n):
    return f"wdiss_a{_fmt(alpha)}_n{n}"


def write_diagnostics(records, path):
    """One CSV row per record; a schema comment line sits on top."""
    pairs = sorted(records[0].weighted) if records else ()
    header = list(_RECORD_SCALARS) + [_weighted_column(a, n) for a, n in pairs]
    with open(path, "w", newline="") as fh:
        fh.write("# nsac1d diagnostics v1; one row per recorded state\n")
        fh.write(",".join(header) + "\n")
        for rec in records:
            cells = [str(getattr(rec, name)) if name == "bracket_violations"
                     else _fmt(getattr(rec, name)) for name in _RECORD_SCALARS]
            cells += [_fmt(rec.weighted[pair]) for pair in pairs]
            fh.write(",".join(cells) + "\n")


def read_diagnostics(path):
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(io.StringIO("".join(lines)))
    header = next(reader)
    pairs = []
    for name in header[len(_RECORD_SCALARS):]:
        body = name[len("wdiss_a"):]
        alpha_str, _, n_str = body.rpartition("_n")
        pairs.append((float(alpha_str), int(n_str)))
    records = []
    for row in reader:
        if not row:
            continue
        kwargs = {}
        for name, cell in zip(_RECORD_SCALARS, row):
            kwargs[name] = int(cell) if name == "bracket_violations" else float(cell)
        weighted = {pair: float(cell)
                    for pair, cell in zip(pairs, row[len(_RECORD_SCALARS):])}
        records.append(DiagnosticsRecord(weighted=weighted, **kwargs))
    return records


# -- offline audit --------------------------------------------------------------

LYAP_SLACK = 1e-3
PHI_TOL = 1e-8
MASS_TOL = 1e-12


def audit_records(records):
    """Re-assert the quantitative invariants on a diagnostics time series.

    Returns (failures, report_lines); monitored quantities are reported but
    never failed, since their continuum bounds carry non-constructive
    constants or are resolution-dependent.
    """
    failures = []
    lines = []

    def check(name, ok, detail):
        status = "PASS" if ok else "FAIL"
        lines.append(f"{status}  {name}: {detail}")
        if not ok:
            failures.append(name)

    if not records:
        return ["empty diagnostics"], ["FAIL  empty diagnostics: no records"]
    records = sorted(records, key=lambda r: r.t)
    e0 = records[0].e0
    tiny = 1e-14 * (1.0 + e0)

    m0 = records[0].mass_excess
    scale = max(abs(m0), 1.0)
    worst_mass = max(abs(r.mass_excess - m0) for r in records)
    check("mass_conservation", worst_mass <= MASS_TOL * scale,
          f"max relative variation {worst_mass / scale:.3e} (limit {MASS_TOL:.0e})")

    worst = max(r.e_lyap + r.diss_cum - e0 * (1.0 + LYAP_SLACK) for r in records)
    check("lyapunov_global", worst <= tiny,
          f"max excess over E0*(1+{LYAP_SLACK}) is {worst:.3e}")

    worst_step = -np.inf
    for prev, cur in zip(records, records[1:]):
        excess = (cur.e_lyap + (cur.diss_cum - prev.diss_cum)
                  - prev.e_lyap - LYAP_SLACK * e0)
        worst_step = max(worst_step, excess)
    check("lyapunov_step", len(records) < 2 or worst_step <= tiny,
          f"max per-interval excess {worst_step:.3e}")

    phi_lo = min(r.phi_min for r in records)
    phi_hi = max(r.phi_max for r in records)
    check("phi_max_principle",
          phi_lo >= -1.0 - PHI_TOL and phi_hi <= 1.0 + PHI_TOL,
          f"phi in [{phi_lo:.12f}, {phi_hi:.12f}] (tolerance {PHI_TOL:.0e})")

    total_viol = sum(r.bracket_violations for r in records)
    check("cell_average_brackets", total_viol == 0,
          f"{total_viol} unit-interval averages outside [alpha1, alpha2]")

    v_lo = min(r.v_min for r in records)
    th_lo = min(r.theta_min for r in records)
    check("positivity", v_lo > 0.0 and th_lo > 0.0,
          f"min v = {v_lo:.6e}, min theta = {th_lo:.6e}")

    drift = max(abs(r.energy_total - records[0].energy_total) for r in records)
    rel = drift / max(abs(records[0].energy_total), 1.0)
    lines.append(f"MONITORED  energy_drift: relative {rel:.3e} (second-order small)")
    lines.append(f"MONITORED  lemma24_residual: final {records[-1].lemma24_residual:.3e}")
    for pair in sorted(records[0].weighted):
        final = records[-1].weighted[pair]
        lines.append(f"MONITORED  wdiss(alpha={pair[0]}, n={pair[1]}): final {final:.3e}")
    return failures, lines


# -- run orchestration ------------------------------------------------------------

PLOT_SCRIPT = """\
#!/usr/bin/env python3
# Plot the diagnostics time series and the final snapshot written next to
# this script.  Requires matplotlib; the solver itself never imports it.
import csv
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = Path(__file__).parent
with open(here / "diagnostics.csv") as fh:
    rows = [r for r in csv.DictReader(ln for ln in fh if not ln.startswith("#"))]
t = [float(r["t"]) for r in rows]

fig, axes = plt.subplots(2, 2, figsize=(10, 7))
axes[0, 0].plot(t, [float(r["e_lyap"]) for r in rows], label="e_lyap")
axes[0, 0].plot(t, [float(r["e_lyap"]) + float(r["diss_cum"]) for r in rows],
                label="e_lyap + cumulative dissipation")
axes[0, 0].axhline(float(rows[0]["e0"]), ls=":", c="k", label="E0")
axes[0, 0].legend()
axes[0, 1].plot(t, [float(r["mass_excess"]) for r in rows])
axes[0, 1].set_title("mass excess")
axes[1, 0].plot(t, [float(r["phi_min"]) for r in rows], label="phi_min")
axes[1, 0].plot(t, [float(r["phi_max"]) for r in rows], label="phi_max")
axes[1, 0].legend()
snap = here / "snapshot_final.csv"
if snap.exists():
    with open(snap) as fh:
        srows = list(csv.DictReader(fh))
    x = [float(r["x"]) for r in srows]
    for name in ("v", "u", "theta", "phi"):
        axes[1, 1].plot(x, [float(r[name]) for r in srows], label=name)
    axes[1, 1].legend()
fig.tight_layout()
fig.savefig(here / "diagnostics.png", dpi=150)
print(here / "diagnostics.png")
"""


def _cmd_run(cfg, out=sys.stdout):
    params = cfg.params()
    grid = cfg.grid()
    bc = cfg.bc()
    initial = cfg.initial_state()
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config.txt").write_text(cfg.to_text())

    ctx = make_context(initial, params, cfg.weighted_diss)
    records = [record(initial, params, ctx)]
    state_tracker = {"prev_t": initial.t, "steps": 0, "last_snap_t": initial.t}

    def observer(state):
        tr = state_tracker
        if state.t > tr["prev_t"]:
            ctx.diss_cum += (state.t - tr["prev_t"]) * dissipation_rate(state, params)
            tr["prev_t"] = state.t
            tr["steps"] += 1
        else:
            return  # initial state, already recorded
        if cfg.diag_every_steps and tr["steps"] % cfg.diag_every_steps == 0:
            records.append(record(state, params, ctx))
        want_snap = (cfg.snapshot_every_steps
                     and tr["steps"] % cfg.snapshot_every_steps == 0)
        if cfg.snapshot_every_time and state.t - tr["last_snap_t"] >= cfg.snapshot_every_time - 1e-12:
            want_snap = True
        if want_snap:
            tr["last_snap_t"] = state.t
            write_snapshot(state, params, outdir / f"snapshot_step{tr['steps']:07d}.csv")

    try:
        result = run(initial, params, bc, cfg.t_final, observer=observer)
    except SimulationAbort as exc:
        print(f"ABORT: {exc}", file=out)
        dump = record(exc.state, params, ctx)
        for name in _RECORD_SCALARS:
            print(f"  {name} = {getattr(dump, name)}", file=out)
        records.append(dump)
        write_diagnostics(records, outdir / "diagnostics.csv")
        return 1

    final = result.state
    if records[-1].t != final.t:
        records.append(record(final, params, ctx))
    write_diagnostics(records, outdir / "diagnostics.csv")
    write_snapshot(final, params, outdir / "snapshot_final.csv")
    (outdir / "plot_diagnostics.py").write_text(PLOT_SCRIPT)

    failures, lines = audit_records(records)
    print(f"run finished: t = {final.t}, steps = {result.control.step_count}, "
          f"last dt limited by {result.control.limit_kind}", file=out)
    for line in lines:
        print(line, file=out)
    return 1 if failures else 0


def _cmd_audit(path, out=sys.stdout):
    failures, lines = audit_records(read_diagnostics(path))
    for line in lines:
        print(line, file=out)
    if failures:
        print(f"AUDIT FAILED: {', '.join(failures)}", file=out)
        return 1
    print("AUDIT PASSED", file=out)
    return 0


def _cmd_mms(cfg, out=sys.stdout):
    params = cfg.params()
    grid = make_grid(cfg.L, cfg.mms_resolutions[0])
    case = default_case(params, grid, amplitude=cfg.mms_amplitude,
                        t_star=cfg.mms_t_final)
    rows = convergence_study(case, params, cfg.mms_resolutions)
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    header = ("N,err_v,err_u,err_theta,err_phi,"
              "order_v,order_u,order_theta,order_phi")
    csv_lines = [header]
    for r in rows:
        csv_lines.append(",".join([str(r.n_cells)] + [
            _fmt(val) for val in (r.err_v, r.err_u, r.err_theta, r.err_phi,
                                  r.order_v, r.order_u, r.order_theta, r.order_phi)]))
    (outdir / "mms_convergence.csv").write_text("\n".join(csv_lines) + "\n")
    for line in csv_lines:
        print(line, file=out)
    return 0


def _cmd_brackets(e0, out=sys.stdout):
    alpha1, alpha2 = bracket_roots(e0)
    print(f"{alpha1:.17g} {alpha2:.17g}", file=out)
    return 0


def main(argv=None, out=sys.stdout):
    """Entry point; returns 0 on success, 1 on assertion failure, 2 on usage."""
    parser = argparse.ArgumentParser(
        prog="nsac1d",
        description="1-D two-phase compressible flow solver and diagnostics auditor")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="simulate and emit snapshots/diagnostics")
    p_run.add_argument("config", help="path to a key = value config file")
    p_audit = sub.add_parser("audit", help="re-assert invariants on a diagnostics CSV")
    p_audit.add_argument("diagnostics", help="path to diagnostics.csv")
    p_mms = sub.add_parser("mms", help="manufactured-solution convergence study")
    p_mms.add_argument("config", help="path to a key = value config file")
    p_brackets = sub.add_parser("brackets", help="print the roots of y - ln y - 1 = e0")
    p_brackets.add_argument("e0", type=float)

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0

    try:
        if args.command == "run":
            cfg = parse_config(Path(args.config).read_text())
            return _cmd_run(cfg, out=out)
        if args.command == "audit":
            return _cmd_audit(args.diagnostics, out=out)
        if args.command == "mms":
            cfg = parse_config(Path(args.config).read_text())
            return _cmd_mms(cfg, out=out)
        if args.command == "brackets":
            if not args.e0 >= 0:  # also rejects nan
                print("e0 must be >= 0", file=out)
                return 2
            return _cmd_brackets(args.e0, out=out)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=out)
        return 2
    return 2


def main_cli():
    sys.exit(main())
