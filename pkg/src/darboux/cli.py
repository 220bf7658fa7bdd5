"""Command-line front end.

    darboux <command> --config <path> [--out <path>] [--format csv|json]
            [--rmin R] [--rmax R] [--points N] [--grid linear|log]
            [--figures DIR | --no-figures]

Commands: ``potential`` (sampled transformed potential), ``solution``
(transformed solution components), ``smatrix`` (S over a k-list), ``kvg``
(the neutron-proton construction: potential + decomposition, S sweep and a
summary), ``verify`` (the full check suite; nonzero exit on failure).

When ``--out`` is given the delimited tables are written there and the
matching figures are rendered alongside; without it tables go to stdout.
DARBOUX_THREADS caps sweep parallelism.  Exit codes: 0 success,
1 verification failure, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import __version__
from .config import COMMANDS, ConfigError, RunConfig, parse_config
from .parallel import parallel_map
from .scattering import (KvGParameters, closed_form_smatrix, decompose_potential,
                         eta_ratio, eta_residue_ratio, kvg_delta_v, kvg_grid,
                         numerical_smatrix, unitarity_defect)
from .tables import OutputTable, format_csv, format_json, write_table
from .transform import RealityError, SingularPointError, compute_potential, transform_vector
from .verify import run_checks

__all__ = ["main"]


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="darboux",
                                 description="Darboux transformation chains with singular links")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON run configuration")
    ap.add_argument("--out", help="output path (tables; figures land beside it)")
    ap.add_argument("--format", choices=("csv", "json"), dest="fmt")
    ap.add_argument("--rmin", type=float)
    ap.add_argument("--rmax", type=float)
    ap.add_argument("--points", type=int)
    ap.add_argument("--grid", choices=("linear", "log"), dest="spacing")
    ap.add_argument("--figures", help="directory for rendered figures")
    ap.add_argument("--no-figures", action="store_true")
    ap.add_argument("--version", action="version", version=f"darboux {__version__}")
    return ap


def _load_config(args) -> RunConfig:
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = parse_config(fh.read())
        if cfg.command != args.command:
            raise ConfigError([f"config command {cfg.command!r} does not match "
                               f"requested {args.command!r}"])
    else:
        if args.command in ("potential", "solution", "smatrix"):
            raise ConfigError([f"{args.command}: --config is required"])
        cfg = RunConfig(command=args.command)
        if args.command == "kvg":
            cfg.kvg = KvGParameters()
    for name, attr in (("rmin", "r_min"), ("rmax", "r_max"), ("points", "points"),
                       ("spacing", "spacing")):
        val = getattr(args, name)
        if val is not None:
            setattr(cfg.grid, attr, val)
            cfg.grid_explicit = True
    if cfg.grid.r_min <= 0 or cfg.grid.r_max <= cfg.grid.r_min or cfg.grid.points < 2:
        raise ConfigError(["grid: need 0 < r_min < r_max and at least 2 points"])
    if args.fmt:
        cfg.out_format = args.fmt
    if args.out:
        cfg.out_path = args.out
    return cfg


# ---------------------------------------------------------------------------
# table builders
# ---------------------------------------------------------------------------

def _meta(cfg: RunConfig, **extra) -> dict:
    meta = {"tool": "darboux", "version": __version__}
    meta.update(extra)
    return meta


def _potential_table(cfg: RunConfig, chain_spec, grid, name: str) -> OutputTable:
    table = compute_potential(chain_spec, grid)
    n = table.n
    columns = ["r_fm"]
    for i in range(n):
        for j in range(n):
            columns.append(f"V{i + 1}{j + 1}_fm^-2")
    decomp = decompose_potential(table) if n == 2 else None
    if decomp is not None:
        columns += ["V_C_fm^-2", "V_T_fm^-2", "V_O_fm^-2"]
    columns.append("pole")
    rows = []
    for idx, r in enumerate(table.grid):
        row = [float(r)]
        row += [float(table.values[idx, i, j]) for i in range(n) for j in range(n)]
        if decomp is not None:
            row += [float(decomp.v_c[idx]), float(decomp.v_t[idx]), float(decomp.v_o[idx])]
        row.append(bool(table.flags[idx]))
        rows.append(row)
    meta = _meta(cfg, pole_radii=[round(p, 12) for p in table.poles],
                 imag_residue=table.imag_max, scale=table.scale,
                 symmetry_defect=table.symmetry_defect())
    return OutputTable(name, columns, rows, meta), table


def _smatrix_rows(values) -> tuple:
    columns = ["k_fm^-1",
               "S11_re", "S11_im", "S12_re", "S12_im",
               "S21_re", "S21_im", "S22_re", "S22_im",
               "delta1_rad", "delta2_rad", "mixing_rad", "unitarity_defect"]
    rows = []
    for sv in values:
        s = sv.s
        rows.append([sv.k,
                     s[0, 0].real, s[0, 0].imag, s[0, 1].real, s[0, 1].imag,
                     s[1, 0].real, s[1, 0].imag, s[1, 1].real, s[1, 1].imag,
                     sv.eigenphases[0], sv.eigenphases[1], sv.mixing,
                     unitarity_defect(s)])
    return columns, rows


def _default_klist() -> list:
    return [round(0.05 * i, 10) for i in range(1, 41)]


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _cmd_potential(cfg: RunConfig):
    table, raw = _potential_table(cfg, cfg.chain, cfg.grid.build(), "potential")
    figures = [("potential", lambda path: _fig_potential(raw, path))]
    return [table], figures, 0


def _cmd_solution(cfg: RunConfig):
    grid = cfg.grid.build()
    n = cfg.chain.n

    def at_radius(r):
        try:
            return transform_vector(cfg.chain, cfg.psi, float(r))
        except SingularPointError:
            return np.full(n, np.nan, dtype=complex)
    comps = np.array(parallel_map(at_radius, grid))
    columns = ["r_fm"]
    for j in range(n):
        columns += [f"phi{j + 1}_re", f"phi{j + 1}_im"]
    columns.append("pole")
    rows = []
    for idx, r in enumerate(grid):
        row = [float(r)]
        flagged = not np.all(np.isfinite(comps[idx].view(float)))
        for j in range(n):
            c = comps[idx, j]
            row += [float(c.real) if not flagged else 0.0,
                    float(c.imag) if not flagged else 0.0]
        row.append(flagged)
        rows.append(row)
    meta = _meta(cfg, energy=cfg.energy if cfg.energy is not None else "unspecified")
    table = OutputTable("solution", columns, rows, meta)
    figures = [("solution", lambda path: _fig_solution(grid, comps, path))]
    return [table], figures, 0


def _cmd_smatrix(cfg: RunConfig):
    if cfg.chain is not None:
        _, raw = _potential_table(cfg, cfg.chain, cfg.grid.build(), "potential")
        l_per_channel = tuple(ch.l if ch.kind == "centrifugal" else 0 for ch in cfg.chain.v0)
        values = parallel_map(lambda k: numerical_smatrix(raw, k, l_per_channel), cfg.k_values)
        source = "numerical"
    else:
        values = [closed_form_smatrix(cfg.kvg, k) for k in cfg.k_values]
        source = "closed-form"
    columns, rows = _smatrix_rows(values)
    table = OutputTable("smatrix", columns, rows, _meta(cfg, source=source))
    figures = [("smatrix", lambda path: _fig_smatrix(values, path))]
    return [table], figures, 0


def _cmd_kvg(cfg: RunConfig):
    from .scattering import build_kvg_chain
    p = cfg.kvg or KvGParameters()
    spec = build_kvg_chain(p)
    grid = cfg.grid.build() if cfg.grid_explicit else kvg_grid()
    pot_table, raw = _potential_table(cfg, spec, grid, "kvg_potential")
    pot_table.metadata.update(k1=p.k1, k2=p.k2, chi=p.chi)

    k_values = cfg.k_values or _default_klist()
    s_values = [closed_form_smatrix(p, k) for k in k_values]
    columns, rows = _smatrix_rows(s_values)
    s_table = OutputTable("kvg_smatrix", columns, rows,
                          _meta(cfg, k1=p.k1, k2=p.k2, chi=p.chi, source="closed-form"))

    dv = kvg_delta_v(raw)
    ok = ~raw.flags
    tail_sel = ok & (raw.grid >= 15.0)
    tail = float(np.max(np.abs(dv[tail_sel]))) if np.any(tail_sel) else float("nan")
    summary = OutputTable(
        "kvg_summary",
        ["k1_fm^-1", "k2_fm^-1", "chi_fm^-1", "eta_formula", "eta_residue",
         "symmetry_defect", "imag_residue_rel", "tail_max_fm^-2"],
        [[p.k1, p.k2, p.chi, eta_ratio(p), eta_residue_ratio(p),
          raw.symmetry_defect(), raw.imag_max / raw.scale, tail]],
        _meta(cfg))
    decomp = decompose_potential(raw)
    figures = [
        ("kvg_potential", lambda path: _fig_potential(raw, path)),
        ("kvg_decomposition", lambda path: _fig_decomposition(decomp, path)),
        ("kvg_smatrix", lambda path: _fig_smatrix(s_values, path)),
    ]
    return [pot_table, s_table, summary], figures, 0


def _cmd_verify(cfg: RunConfig):
    results = run_checks(n_chains=cfg.n_chains, seed=cfg.seed, params=cfg.kvg)
    for res in results:
        if res.name in cfg.tolerances:
            res.tolerance = cfg.tolerances[res.name]
            res.passed = res.measured < res.tolerance
        print(res.line())
    n_fail = sum(1 for r in results if not r.passed)
    print(f"{len(results) - n_fail}/{len(results)} checks passed")
    tables = []
    if cfg.out_path:
        tables.append(OutputTable(
            "verify",
            ["check", "measured", "tolerance", "passed", "seconds"],
            [[r.name, r.measured, r.tolerance, r.passed, round(r.seconds, 3)]
             for r in results],
            _meta(cfg)))
    return tables, [], (1 if n_fail else 0)


# ---------------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------------

def _fig_potential(raw, path):
    from . import plots
    ok = ~raw.flags
    return plots.plot_potential(raw.grid[ok], raw.values[ok], path, r_max=6.0)


def _fig_decomposition(decomp, path):
    from . import plots
    return plots.plot_decomposition(decomp.grid, decomp.v_c, decomp.v_t, decomp.v_o, path)


def _fig_smatrix(values, path):
    from . import plots
    ks = [sv.k for sv in values]
    eig = [sv.eigenphases for sv in values]
    mix = [sv.mixing for sv in values]
    return plots.plot_smatrix(ks, eig, mix, path)


def _fig_solution(grid, comps, path):
    from . import plots
    ok = np.all(np.isfinite(comps.view(float)), axis=1)
    return plots.plot_solution(np.asarray(grid)[ok], comps[ok], path)


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

def _emit(tables, figures, cfg: RunConfig, args) -> None:
    fmt = cfg.out_format
    if cfg.out_path:
        parent = os.path.dirname(os.path.abspath(cfg.out_path))
        os.makedirs(parent, exist_ok=True)
        base, ext = os.path.splitext(cfg.out_path)
        if not ext:
            ext = "." + fmt
        multi = len(tables) > 1
        written = []
        for table in tables:
            path = f"{base}_{table.name.split('_', 1)[-1]}{ext}" if multi else base + ext
            write_table(table, path, fmt)
            written.append(path)
        for path in written:
            print(f"wrote {path}")
    else:
        for table in tables:
            sys.stdout.write(format_csv(table) if fmt == "csv" else format_json(table))
    fig_dir = None
    if args.figures and not args.no_figures:
        fig_dir = args.figures
    elif cfg.out_path and not args.no_figures:
        fig_dir = os.path.dirname(os.path.abspath(cfg.out_path))
    if fig_dir and figures:
        os.makedirs(fig_dir, exist_ok=True)
        for name, render in figures:
            out = os.path.join(fig_dir, f"{name}.png")
            render(out)
            print(f"wrote {out}")


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = _load_config(args)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    handlers = {
        "potential": _cmd_potential,
        "solution": _cmd_solution,
        "smatrix": _cmd_smatrix,
        "kvg": _cmd_kvg,
        "verify": _cmd_verify,
    }
    try:
        tables, figures, status = handlers[cfg.command](cfg)
        _emit(tables, figures, cfg, args)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return 2
    except (SingularPointError, RealityError, np.linalg.LinAlgError,
            ArithmeticError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return status


if __name__ == "__main__":
    sys.exit(main())
