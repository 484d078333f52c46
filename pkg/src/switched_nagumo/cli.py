"""Command-line surface: threshold reports, figure data, certification, orbits, scans.

Configuration is a flat ``key = value`` text file with ``#`` comments; every
physical quantity is dimensionless.  Command-line flags override config
values, and every output file embeds the full effective configuration in a
``#``-prefixed header block so runs are reproducible byte for byte.

Exit status: 0 pass, 1 certification/verification failure, 2 usage or
config parse error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from . import __version__
from .errors import (
    HypothesisH0Violated,
    NotFound,
    PolishDiverged,
    SwitchedNagumoError,
)
from .flow import flow_autonomous, flow_switched
from .horseshoe import build_regions, certify_horseshoe
from .model import (
    ModelParams,
    compute_thresholds,
    energy,
    equilibria,
    homoclinic_extent,
    homoclinic_threshold,
    matching_abscissa,
    saddle_center_threshold,
)
from .symbolic import Itinerary, find_periodic, verify_itinerary
from .timemaps import (
    orbit_period,
    period_scaling_limit,
    slow_anchor_bound,
    transit_time,
    transit_time_bounds,
)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3

DEFAULTS = {
    "g": 0.1, "a": 0.25, "n0": 0.35, "n1": 30.0,
    "alpha": 7.2, "beta": 14.2,
    "pbar0": 0.12, "p0": None, "mu_bar": 2.4,
    "seed": 20260811, "out": "out",
    "paths": 64, "tol": 1e-9, "symbols": 2,
    "rtol": 1e-10, "atol": 1e-12, "refine_tol": 1e-10,
    "n_points": 129, "arc_samples": 65,
}

# captions of the narrative figures pin their own parameters
FIGURE_DEFAULTS = {
    1: {"g": 0.5, "a": 0.4, "n0": 0.8, "n1": 16.0, "alpha": 4.0, "beta": 6.0},
    2: {"g": 0.1, "a": 0.4, "n0": 0.1, "n1": 10.0, "alpha": 4.0, "beta": 6.0},
    3: {"g": 0.1, "a": 0.4, "n0": 0.1, "n1": 10.0, "alpha": 4.0, "beta": 6.0,
        "pbar0": 0.07},
    4: {"g": 0.1, "a": 0.4, "n0": 0.1, "n1": 10.0, "alpha": 4.0, "beta": 6.0,
        "pbar0": 0.07},
    5: {"g": 0.1, "a": 0.4, "n0": 0.1, "n1": 10.0, "alpha": 4.0, "beta": 6.0,
        "pbar0": 0.07},
}


class ConfigError(Exception):
    pass


def parse_config(text, source="<config>"):
    """Parse flat key = value lines; numbers become int/float, else strings."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        try:
            out[key] = int(val)
        except ValueError:
            try:
                out[key] = float(val)
            except ValueError:
                out[key] = val
    return out


def effective_config(args):
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        cfg.update(parse_config(path.read_text(), source=str(path)))
    for flag in ("out", "paths", "tol", "symbols"):
        val = getattr(args, flag, None)
        if val is not None:
            cfg[flag] = val
    return cfg


def params_from(cfg):
    return ModelParams(g=float(cfg["g"]), a=float(cfg["a"]), n0=float(cfg["n0"]),
                       n1=float(cfg["n1"]), alpha=float(cfg["alpha"]),
                       beta=float(cfg["beta"]))


def _fmt(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return f"{v:.17e}"
    return str(v)


def header_lines(cfg):
    return [f"{k} = {_fmt(cfg[k])}" for k in sorted(cfg) if cfg[k] is not None]


def write_table(path, columns, rows, cfg):
    with open(path, "w") as fh:
        for line in header_lines(cfg):
            fh.write(f"# {line}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(float(v)) if isinstance(v, (int, float, np.floating))
                              and not isinstance(v, bool) else str(v)
                              for v in row) + "\n")


def _outdir(cfg):
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_thresholds(args):
    cfg = effective_config(args)
    params = params_from(cfg)
    g, nl = params.g, params.nl
    m0 = saddle_center_threshold(g, nl)
    print(f"m0star           = {m0:.9g}")
    try:
        th = compute_thresholds(params, cfg["mu_bar"] or None)
        pck = slow_anchor_bound(params)
        rows = [
            ("m1star", th.m1star), ("m1star_optimal", th.m1star_optimal),
            ("lambda_sup", th.lambda_sup), ("theta_sup", th.theta_sup),
            ("b", th.b), ("kappa", th.kappa), ("eta", th.eta),
            ("mu_star", th.mu_star), ("mu_tilde", th.mu_tilde),
            ("m2star", th.m2star), ("p_hat0", th.p_hat0), ("p_check0", pck),
        ]
        for name, val in rows:
            print(f"{name:<16} = {val:.9g}")
        print("regime verdict:")
        print(f"  n0 < m0star          : {params.n0 < m0}   "
              f"({params.n0:g} vs {m0:.6g})")
        print(f"  n1 > m1star          : {params.n1 > th.m1star}   "
              f"({params.n1:g} vs {th.m1star:.6g})")
        print(f"  n1 > m2star          : {params.n1 > th.m2star}   "
              f"({params.n1:g} vs {th.m2star:.6g})")
        print(f"  theorem-regime flag  : {params.in_horseshoe_regime(cfg['mu_bar'] or None)}")
    except HypothesisH0Violated as exc:
        print(f"m1star and the horseshoe constants are undefined: {exc}")
        return EXIT_FAIL
    return EXIT_PASS


def _level_line_rows(g, nl, mu, levels, n_x=600):
    rows = []
    xs = np.linspace(0.0, 1.0, n_x)
    for c in levels:
        y2 = 2.0 * (c + 0.5 * g * xs * xs - mu * nl.integral(xs))
        ok = y2 >= 0.0
        y = np.sqrt(np.where(ok, y2, 0.0))
        for xi, yi, good in zip(xs, y, ok):
            if good:
                rows.append((mu, c, xi, yi))
                if yi > 0.0:
                    rows.append((mu, c, xi, -yi))
    return rows


def cmd_levelsets(args):
    cfg = effective_config(args)
    params = params_from(cfg)
    out = _outdir(cfg)
    g, nl = params.g, params.nl
    n_levels = int(cfg.get("n_levels", 9))
    rows = []
    for mu in (params.n1, params.n0):
        try:
            a_mu, _ = equilibria(g, nl, mu)
            e_min = float(energy(a_mu, 0.0, g, nl, mu))
        except SwitchedNagumoError:
            e_min = float(energy(0.5, 0.0, g, nl, mu))
        levels = list(np.linspace(0.9 * e_min, 0.0, n_levels)) + [0.05 * abs(e_min)]
        rows += _level_line_rows(g, nl, mu, levels)
    path = out / "levelsets.csv"
    write_table(path, ["mu", "level", "x", "y"], rows, cfg)
    print(f"wrote {path} ({len(rows)} points)")
    return EXIT_PASS


def cmd_timemap(args):
    cfg = effective_config(args)
    params = params_from(cfg)
    g, nl = params.g, params.nl
    mu = cfg.get("mu")
    mu_sigma = float(mu) if mu is not None else params.n0
    mu_tau = float(mu) if mu is not None else params.n1
    p0 = float(cfg.get("query_p0", 0.25 * params.a))
    xi = float(cfg.get("query_xi", params.a))
    x0 = float(cfg.get("query_x0", 0.25 * params.a))
    m0 = saddle_center_threshold(g, nl)
    m1 = homoclinic_threshold(g, nl)
    if mu_sigma < m0:
        lo, hi = transit_time_bounds(g, nl, mu_sigma, p0, xi)
        print(f"sigma({mu_sigma:g}; {p0:g} -> {xi:g}) = "
              f"{transit_time(g, nl, mu_sigma, p0, xi):.12g}   "
              f"bounds [{lo:.12g}, {hi:.12g}]")
    if mu_tau > m1:
        period, x1 = orbit_period(g, nl, mu_tau, x0)
        print(f"tau({mu_tau:g}; x0={x0:g}) = {period:.12g}   "
              f"turning point x1 = {x1:.12g}")
    limit = period_scaling_limit(nl, x0)
    print(f"limit of tau(mu, x0) sqrt(mu) as mu -> inf, x0={x0:g}: {limit:.12g}")
    return EXIT_PASS


def cmd_orbit(args):
    cfg = effective_config(args)
    params = params_from(cfg)
    out = _outdir(cfg)
    z0 = (float(cfg.get("z0x", cfg["pbar0"])), float(cfg.get("z0y", 0.0)))
    t_end = float(cfg.get("t_end", params.beta))
    mode = str(cfg.get("mode", "switched"))
    if mode == "switched":
        traj = flow_switched(params, z0, t_end)
    elif mode in ("high", "low"):
        mu = params.n1 if mode == "high" else params.n0
        traj = flow_autonomous(params.g, params.nl, mu, z0, t_end)
    else:
        print(f"unknown mode {mode!r} (switched|high|low)", file=sys.stderr)
        return EXIT_USAGE
    path = out / "orbit.csv"
    traj.to_csv(path, n_samples=int(cfg.get("n_samples", 2001)),
                header_lines=header_lines(cfg))
    print(f"wrote {path}; extrema: {len(traj.maxima)} maxima / {len(traj.minima)} "
          f"minima; energy drift {traj.max_energy_drift():.3e}")
    return EXIT_PASS


def cmd_figure(args):
    cfg = effective_config(args)
    k = args.k
    if k not in FIGURE_DEFAULTS:
        print(f"figure index must be 1..5, got {k}", file=sys.stderr)
        return EXIT_USAGE
    merged = dict(DEFAULTS)
    merged.update(FIGURE_DEFAULTS[k])
    # figure parameter sets carry their own thresholds; never inherit the
    # reference mu_bar / p0 across a different nonlinearity
    merged["mu_bar"] = FIGURE_DEFAULTS[k].get("mu_bar")
    merged["p0"] = FIGURE_DEFAULTS[k].get("p0")
    if getattr(args, "config", None):
        merged.update(parse_config(Path(args.config).read_text(), args.config))
    if args.out is not None:
        merged["out"] = args.out
    cfg = merged
    params = params_from(cfg)
    g, nl = params.g, params.nl
    out = _outdir(cfg)
    path = out / f"figure{k}.csv"

    if k == 1:
        ss = np.linspace(0.0, 1.0, 801)
        rows = [(s, -g * s + params.n0 * nl.value(s), -g * s + params.n1 * nl.value(s))
                for s in ss]
        write_table(path, ["s", "low_weight_curve", "high_weight_curve"], rows, cfg)
    elif k == 2:
        rows = []
        a_hi, _ = equilibria(g, nl, params.n1)
        e_min = float(energy(a_hi, 0.0, g, nl, params.n1))
        rows += _level_line_rows(g, nl, params.n1,
                                 list(np.linspace(0.9 * e_min, 0.0, 8)))
        rows += _level_line_rows(g, nl, params.n0,
                                 list(np.linspace(-0.02, 0.02, 7)))
        write_table(path, ["mu", "level", "x", "y"], rows, cfg)
    elif k == 3:
        pbar0 = float(cfg["pbar0"])
        c = float(energy(pbar0, 0.0, g, nl, params.n1))
        a_hi, _ = equilibria(g, nl, params.n1)
        rows = [("inner", c, x, y) for _, _, x, y in
                _level_line_rows(g, nl, params.n1, [c])]
        rows += [("outer", 0.0, x, y) for _, _, x, y in
                 _level_line_rows(g, nl, params.n1, [0.0])]
        # a sample path crossing the quarter-annulus along a fixed ray from P1
        for t in np.linspace(0.0, 1.0, 65):
            level = c * (1.0 - t)
            ray = lambda r: float(
                energy(a_hi + r / math.sqrt(2.0), r / math.sqrt(2.0), g, nl,
                       params.n1)) - level
            r_hi = 0.7
            r = brentq(ray, 1e-9, r_hi, xtol=1e-13)
            rows.append(("path", level, a_hi + r / math.sqrt(2.0), r / math.sqrt(2.0)))
        write_table(path, ["piece", "level", "x", "y"], rows, cfg)
        print(f"# c = {c:.9g}")
        print(f"# a_n1 = {a_hi:.9g}")
        print(f"# E1(a_n1,0) = {float(energy(a_hi, 0.0, g, nl, params.n1)):.9g}")
    elif k in (4, 5):
        mu_bar = cfg.get("mu_bar")
        regions = build_regions(params, pbar0=float(cfg["pbar0"]),
                                p0=cfg.get("p0"),
                                mu_bar=float(mu_bar) if mu_bar else None,
                                strict=False)
        if k == 4:
            rows = [("hi", regions.e0_hi, x, y) for _, _, x, y in
                    _level_line_rows(g, nl, params.n0, [regions.e0_hi])]
            rows += [("lo", regions.e0_lo, x, y) for _, _, x, y in
                     _level_line_rows(g, nl, params.n0, [regions.e0_lo])]
            write_table(path, ["side", "level", "x", "y"], rows, cfg)
        else:
            rows = []
            for rect in ("A", "B"):
                for side in (("inner", "outer") if rect == "A" else ("hi", "lo")):
                    arc = regions.side_arc(rect, side, 129)
                    rows += [(rect, side, x, y) for x, y in arc]
                # transverse edges complete the boundary trace
                for tv in (0.0, 1.0):
                    pts = [regions.path_point(rect, prof, tv)
                           for prof in np.linspace(0.0, 1.0, 65)]
                    rows += [(rect, f"edge{tv:.0f}", x, y) for x, y in pts]
            rows.append(("guide", "x=a", params.a, 0.0))
            rows.append(("guide", "x=a_n1", regions.a_n1, 0.0))
            write_table(path, ["set", "arc", "x", "y"], rows, cfg)
            print(f"# pbar0_plus = {regions.pbar0_plus:.9g}")
            print(f"# inclusion a_n1 <= pbar0_plus: "
                  f"{regions.a_n1 <= regions.pbar0_plus}")
    print(f"wrote {path}")
    return EXIT_PASS


def cmd_certify(args):
    cfg = effective_config(args)
    params = params_from(cfg)
    out = _outdir(cfg)
    cert = certify_horseshoe(
        params, pbar0=cfg.get("pbar0"), p0=cfg.get("p0"),
        mu_bar=cfg.get("mu_bar"), p_symbols=int(cfg["symbols"]),
        n_paths=int(cfg["paths"]), n_points=int(cfg["n_points"]),
        refine_tol=float(cfg["refine_tol"]), rtol=float(cfg["rtol"]),
        atol=float(cfg["atol"]), arc_samples=int(cfg["arc_samples"]))
    cert_path = out / "certificate.txt"
    with open(cert_path, "w") as fh:
        for line in header_lines(cfg):
            fh.write(f"# {line}\n")
        fh.write(cert.to_text())
    csv_path = out / "certificate_paths.csv"
    with open(csv_path, "w") as fh:
        for line in header_lines(cfg):
            fh.write(f"# {line}\n")
        fh.write(cert.paths_csv())
    status = "PASS" if cert.passed else f"FAIL at {cert.first_failure}"
    print(f"certificate: {status}; min margin {cert.min_margin:.3e}; "
          f"wrote {cert_path} and {csv_path}")
    return EXIT_PASS if cert.passed else EXIT_FAIL


def cmd_find_periodic(args):
    cfg = effective_config(args)
    params = params_from(cfg)
    out = _outdir(cfg)
    try:
        itin = Itinerary.parse(args.itinerary)
    except SwitchedNagumoError as exc:
        print(f"bad itinerary: {exc}", file=sys.stderr)
        return EXIT_USAGE
    symbols = int(cfg["symbols"])
    if itin.p_symbols > max(symbols, 2):
        print(f"itinerary uses symbol {max(itin.symbols)} but p_symbols = {symbols}",
              file=sys.stderr)
        return EXIT_USAGE
    cert_path = _outdir(cfg) / "certificate.txt"
    if not args.force and not cert_path.exists():
        print("no certificate found in the output directory; run `certify` "
              "first or pass --force", file=sys.stderr)
        return EXIT_USAGE
    regions = build_regions(params, pbar0=cfg.get("pbar0"), p0=cfg.get("p0"),
                            mu_bar=cfg.get("mu_bar"))
    orbit = find_periodic(params, regions, itin, tol=float(cfg["tol"]))
    m = len(itin)
    report = verify_itinerary(params, orbit.anchor, itin, horizon_blocks=2 * m,
                              anchors=orbit.points, rtol=1e-12, atol=1e-14)
    name = "-".join(str(s) for s in itin.symbols)
    orbit_path = out / f"orbit_{name}.csv"
    traj = flow_switched(params, orbit.anchor, m * params.beta,
                         rtol=1e-12, atol=1e-14)
    traj.to_csv(orbit_path, n_samples=int(cfg.get("n_samples", 4001)),
                header_lines=header_lines(cfg))
    rep_path = out / f"orbit_{name}_report.txt"
    with open(rep_path, "w") as fh:
        for line in header_lines(cfg):
            fh.write(f"# {line}\n")
        fh.write(f"itinerary = {','.join(str(s) for s in itin.symbols)}\n")
        fh.write(f"residual = {orbit.residual:.17e}\n")
        fh.write(f"anchor = {orbit.anchor[0]:.17e}, {orbit.anchor[1]:.17e}\n")
        for k, z in enumerate(orbit.points):
            fh.write(f"block_anchor {k} = {z[0]:.17e}, {z[1]:.17e}\n")
        fh.write(f"verified = {str(report.ok).lower()}\n")
        for b in report.blocks:
            fh.write(f"block {b.block}: symbol {b.symbol}, maxima {b.n_max}, "
                     f"minima {b.n_min}, convexity_min {b.convexity_min:.6e}, "
                     f"entry_slope {b.entry_slope:.6e}, exit_slope "
                     f"{b.exit_slope:.6e}, ok {str(b.ok).lower()}\n")
        fh.write(f"x_range = [{report.confinement.x_min:.9e}, "
                 f"{report.confinement.x_max:.9e}]\n")
    print(f"orbit: residual {orbit.residual:.3e}, verified {report.ok}; "
          f"wrote {orbit_path} and {rep_path}")
    return EXIT_PASS if report.ok else EXIT_FAIL


def _parse_range(spec):
    """'lo:hi:n' -> n equispaced values; single number -> [value]."""
    if isinstance(spec, (int, float)):
        return [float(spec)]
    parts = str(spec).split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise ConfigError(f"range must be 'lo:hi:count', got {spec!r}")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    return list(np.linspace(lo, hi, n))


def cmd_scan(args):
    cfg = effective_config(args)
    out = _outdir(cfg)
    scan_keys = [k for k in ("n0", "n1", "alpha", "beta", "p_symbols")
                 if f"scan_{k}" in cfg]
    if not scan_keys:
        write_table(out / "scan.csv",
                    ["pass", "first_failure", "min_margin"], [], cfg)
        print("empty scan: no scan_* ranges in the config; wrote empty table")
        return EXIT_PASS
    grids = {k: _parse_range(cfg[f"scan_{k}"]) for k in scan_keys}
    combos = [{}]
    for k in scan_keys:
        combos = [dict(c, **{k: v}) for c in combos for v in grids[k]]
    rows = []
    n_paths = int(cfg.get("scan_paths", 8))
    for combo in combos:
        point = dict(cfg)
        point.update(combo)
        try:
            params = params_from(point)
            cert = certify_horseshoe(
                params, pbar0=point.get("pbar0"), p0=point.get("p0"),
                mu_bar=point.get("mu_bar"),
                p_symbols=int(point.get("p_symbols", point["symbols"])),
                n_paths=n_paths, n_points=int(point["n_points"]) // 2,
                refine_tol=float(point["refine_tol"]), rtol=float(point["rtol"]),
                atol=float(point["atol"]), arc_samples=17)
            rows.append([combo.get(k, "") for k in scan_keys]
                        + [str(cert.passed).lower(), cert.first_failure or "none",
                           cert.min_margin])
        except SwitchedNagumoError as exc:
            rows.append([combo.get(k, "") for k in scan_keys]
                        + ["error", type(exc).__name__, math.nan])
    path = out / "scan.csv"
    write_table(path, scan_keys + ["pass", "first_failure", "min_margin"],
                rows, cfg)
    n_pass = sum(1 for r in rows if r[len(scan_keys)] == "true")
    print(f"scan: {n_pass}/{len(rows)} points certify; wrote {path}")
    return EXIT_PASS


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="switched-nagumo",
        description="Thresholds, time maps, horseshoe certification and "
                    "symbolic orbits for the Nagumo equation with a stepwise "
                    "periodic weight.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--paths", type=int, help="number of crossing paths")
        p.add_argument("--tol", type=float, help="solver tolerance")
        p.add_argument("--symbols", type=int, help="number of symbols p")
        p.add_argument("--force", action="store_true",
                       help="skip certificate prerequisites")

    for name, fn in (("thresholds", cmd_thresholds), ("levelsets", cmd_levelsets),
                     ("timemap", cmd_timemap), ("orbit", cmd_orbit),
                     ("certify", cmd_certify), ("scan", cmd_scan)):
        p = sub.add_parser(name)
        add_common(p)
        p.set_defaults(fn=fn)

    p = sub.add_parser("figure")
    p.add_argument("k", type=int, help="figure index 1..5")
    add_common(p)
    p.set_defaults(fn=cmd_figure)

    p = sub.add_parser("find-periodic")
    p.add_argument("itinerary", help="comma-separated symbol block, e.g. 1,2,1")
    add_common(p)
    p.set_defaults(fn=cmd_find_periodic)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NotFound, PolishDiverged) as exc:
        print(f"search failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except SwitchedNagumoError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
