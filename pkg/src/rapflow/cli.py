"""Command line front end.

Five subcommands drive the library end to end:

  simulate   sample one system and summarize the trajectory
  classify   run the recurrence classifier on one system
  scan       sweep a grid of shifts and report the admitted set
  verify     run a self-contained, deterministic checking suite
  examples   list the catalogued systems and their analytic guarantees

Summaries and data go to stdout, diagnostics to stderr.  Exit codes:
0 success, 1 a verify suite found failures, 2 bad configuration (flags,
expressions, config file), 3 the integrator aborted, 4 every
classification verdict came back inconclusive.

A config file named with --config uses INI syntax with one section per
subcommand and keys spelled like the long flags; explicit flags override
file values, which override the built-in defaults:

    [classify]
    eps = 0.1
    tau-step = 0.05
"""
from __future__ import annotations

import argparse
import configparser
import dataclasses
import math
import sys
import textwrap
from concurrent.futures import ThreadPoolExecutor
from types import SimpleNamespace

import numpy as np

from . import catalog
from ._version import VERSION
from .classify import (
    CLASS_ORDER,
    ClassifyConfig,
    _scan_grid,
    almost_period_scan,
    asymptotic_stationary_test,
    asymptotic_tau_periodic_test,
    classify_trajectory,
    remote_stationary_test,
    remote_tau_periodic_test,
    tail_sup,
)
from .dynamics import (
    DynamicsError,
    FieldValidationError,
    IntegratorConfig,
    ScalarField,
    boundedness,
    check_lipschitz_one,
    check_monotone_in_x,
    contraction_gap,
    integrate,
    iterate,
    sample_function,
)
from .expr import EvalError, ParseError, parse
from .serialize import (
    almost_period_set_csv,
    canonical_hash,
    classification_json,
    csv_text,
    json_text,
    jsonable,
    trajectory_csv,
    trajectory_json,
    write_text,
)

__all__ = ["ConfigError", "build_parser", "main"]


class ConfigError(Exception):
    """A problem with flags, expressions, or the config file (exit 2)."""


# ---------------------------------------------------------------------------
# value parsing


def _parse_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"not a number: {text!r}")
    if not math.isfinite(v):
        raise ConfigError(f"value must be finite: {text!r}")
    return v


def _parse_int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"not an integer: {text!r}")


def _parse_pair(text: str, what: str) -> tuple[float, float]:
    raw = text.replace(",", ":")
    parts = raw.split(":")
    if len(parts) != 2:
        raise ConfigError(f"{what} must look like LO:HI, got {text!r}")
    lo, hi = (_parse_float(p) for p in parts)
    if not lo < hi:
        raise ConfigError(f"{what} needs LO < HI, got {text!r}")
    return lo, hi


def _parse_span(text: str) -> tuple[float, float]:
    return _parse_pair(text, "span")


def _parse_window(text: str) -> tuple[float, float]:
    return _parse_pair(text, "window")


def _parse_windows(text: str) -> tuple[tuple[float, float], ...]:
    wins = tuple(_parse_pair(part, "window")
                 for part in text.split(";") if part.strip())
    if not wins:
        raise ConfigError("windows must list at least one LO:HI pair")
    return wins


def _parse_choice(name: str, allowed: tuple[str, ...]):
    def conv(text: str) -> str:
        if text not in allowed:
            raise ConfigError(
                f"{name} must be one of {', '.join(allowed)}; got {text!r}")
        return text
    return conv


def _params_dict(items) -> dict:
    """Turn repeated NAME=VALUE bindings into a dict, later ones winning."""
    out = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        name = name.strip()
        if not sep or not name.isidentifier():
            raise ConfigError(f"parameter bindings look like NAME=VALUE, got {item!r}")
        out[name] = _parse_float(value)
    return out


def _parse_bh(spec: str) -> dict:
    """Read a Beverton-Holt spec like 'mu=2,K=10' or 'mu=3,K=10+sin(ln(1+t))'.

    K may be a number or an expression in t; alpha and beta override the
    capacity band the expression is checked against.
    """
    kwargs = {}
    for item in spec.split(","):
        item = item.strip()
        if not item:
            continue
        name, sep, value = item.partition("=")
        name = name.strip()
        if not sep:
            raise ConfigError(f"Beverton-Holt spec entries look like NAME=VALUE, got {item!r}")
        if name in ("mu", "alpha", "beta"):
            kwargs[name] = _parse_float(value)
        elif name == "K":
            try:
                kwargs["capacity"] = float(value)
            except ValueError:
                kwargs["capacity"] = value.strip()
        else:
            raise ConfigError(f"unknown Beverton-Holt key {name!r} (use mu, K, alpha, beta)")
    if "mu" not in kwargs:
        raise ConfigError("a Beverton-Holt spec needs at least mu, e.g. 'mu=2,K=10'")
    return kwargs


# ---------------------------------------------------------------------------
# config file merging

_CONVERTERS = {
    "ode": str, "map": str, "fn": str, "example": str, "bh": str,
    "u0": _parse_float, "span": _parse_span, "steps": _parse_int,
    "dt": _parse_float, "method": _parse_choice("method", ("rkf45", "rk4")),
    "abs_tol": _parse_float, "rel_tol": _parse_float,
    "source": _parse_choice("source", ("integrate", "curve")),
    "horizon": _parse_float, "bound": _parse_float,
    "eps": _parse_float, "exact_eps": _parse_float, "tau": _parse_float,
    "tau_max": _parse_float, "tau_step": _parse_float,
    "windows": _parse_windows, "seed": _parse_int,
    "mode": _parse_choice("mode", ("global", "remote")),
    "window": _parse_window, "threads": _parse_int,
    "out": str, "format": _parse_choice("format", ("csv", "json")),
}


def _merged_options(args: argparse.Namespace) -> SimpleNamespace:
    """Overlay config-file values under the explicit flags.

    Precedence: command line, then the file section named after the
    subcommand, then built-in defaults (every unset option stays None and
    the handlers fill in defaults).
    """
    merged = dict(vars(args))
    path = merged.get("config")
    if not path:
        return SimpleNamespace(**merged)
    cp = configparser.ConfigParser(interpolation=None, default_section="")
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}")
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file: {exc}")
    for section in cp.sections():
        if section not in ("simulate", "classify", "scan"):
            raise ConfigError(f"unknown config file section [{section}]")
    if not cp.has_section(args.command):
        return SimpleNamespace(**merged)
    for key, raw in cp.items(args.command):
        dest = key.replace("-", "_")
        if dest == "param":
            file_params = raw.split()
            merged["param"] = file_params + (merged.get("param") or [])
            continue
        if dest not in merged or dest in ("config", "command", "handler"):
            raise ConfigError(
                f"unknown option {key!r} in config file section [{args.command}]")
        if merged[dest] is None:
            merged[dest] = _CONVERTERS[dest](raw)
    return SimpleNamespace(**merged)


# ---------------------------------------------------------------------------
# building the trajectory a subcommand works on


def _mk_field(kind: str, rhs: str, params: dict) -> ScalarField:
    try:
        expr = parse(rhs)
    except ParseError as exc:
        raise ConfigError(f"bad expression {rhs!r}: {exc}")
    missing = set(expr.params) - set(params)
    if missing:
        raise ConfigError(
            f"unbound parameters {', '.join(sorted(missing))}; bind them with --param")
    try:
        return ScalarField(
            kind=kind, rhs=expr, params=params,
            time_domain="half-line" if kind == "discrete" else "full-line",
            name="command-line")
    except FieldValidationError as exc:
        raise ConfigError(str(exc))


def _integrator_config(o, default_dt: float = 0.01) -> IntegratorConfig:
    return IntegratorConfig(
        method=o.method or "rkf45",
        abs_tol=o.abs_tol if o.abs_tol is not None else 1e-9,
        rel_tol=o.rel_tol if o.rel_tol is not None else 1e-9,
        dt_out=o.dt if o.dt is not None else default_dt)


def _build_trajectory(o):
    """Resolve the system flags into (trajectory, meta).

    meta may carry 'field' (the ScalarField behind the samples), 'flags'
    (Beverton-Holt certificate flags) and 'example' (the catalog entry).
    """
    sources = [name for name in ("ode", "map", "fn", "example", "bh")
               if getattr(o, name, None)]
    if len(sources) != 1:
        raise ConfigError(
            "give exactly one system: --ode, --map, --fn, --example or --bh")
    src = sources[0]
    params = _params_dict(o.param)
    if o.horizon is not None and not o.horizon > 0:
        raise ConfigError("horizon must be positive")
    if o.steps is not None and o.steps < 1:
        raise ConfigError("steps must be at least 1")
    meta = {}

    if src == "ode":
        fld = _mk_field("continuous", o.ode, params)
        span = o.span or (0.0, 100.0)
        if o.horizon is not None:
            span = (span[0], float(o.horizon))
        traj = integrate(fld, o.u0 if o.u0 is not None else 0.0,
                         span, _integrator_config(o))
        meta["field"] = fld
    elif src == "map":
        fld = _mk_field("discrete", o.map, params)
        steps = o.steps if o.steps is not None else 1000
        if o.horizon is not None:
            steps = int(round(o.horizon))
        traj = iterate(fld, o.u0 if o.u0 is not None else 1.0, steps)
        meta["field"] = fld
    elif src == "fn":
        span = o.span or (0.0, 100.0)
        if o.horizon is not None:
            span = (span[0], float(o.horizon))
        try:
            traj = sample_function(o.fn, span,
                                   o.dt if o.dt is not None else 0.01,
                                   params=params or None, name="command-line")
        except ParseError as exc:
            raise ConfigError(f"bad expression {o.fn!r}: {exc}")
    elif src == "bh":
        try:
            fld, flags = catalog.make_beverton_holt(**_parse_bh(o.bh))
        except (ValueError, ParseError) as exc:
            raise ConfigError(f"bad Beverton-Holt spec: {exc}")
        steps = o.steps if o.steps is not None else 1000
        if o.horizon is not None:
            steps = int(round(o.horizon))
        traj = iterate(fld, o.u0 if o.u0 is not None else 1.0, steps)
        meta["field"] = fld
        meta["flags"] = flags
    else:
        try:
            ex = catalog.get(o.example)
        except KeyError:
            known = ", ".join(catalog.catalog())
            raise ConfigError(f"unknown example {o.example!r} (known: {known})")
        kwargs = {}
        if o.u0 is not None:
            kwargs["u0"] = o.u0
        if o.span is not None:
            kwargs["span"] = o.span
        if o.steps is not None:
            kwargs["steps"] = o.steps
        if o.dt is not None:
            kwargs["dt"] = o.dt
        if o.horizon is not None:
            if ex.kind == "map":
                kwargs["steps"] = int(round(o.horizon))
            else:
                lo = (o.span or (0.0, 0.0))[0]
                kwargs["span"] = (lo, float(o.horizon))
        if o.source is not None:
            kwargs["source"] = o.source
        integrated_ode = ex.kind == "ode" and kwargs.get("source") != "curve"
        if integrated_ode and any(
                getattr(o, n) is not None
                for n in ("dt", "method", "abs_tol", "rel_tol")):
            kwargs["config"] = _integrator_config(o)
        try:
            traj = ex.trajectory(**kwargs)
        except ValueError as exc:
            raise ConfigError(str(exc))
        meta["example"] = ex
        if ex.rhs is not None:
            meta["field"] = ex.system()
    return traj, meta


def _write_data(o, text: str, what: str) -> None:
    write_text(o.out, text)
    print(f"wrote {what} to {o.out}", file=sys.stderr)


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args) -> int:
    o = _merged_options(args)
    traj, meta = _build_trajectory(o)
    sup = float(np.max(np.abs(traj.values)))
    print(f"samples: {len(traj)}")
    print(f"grid: t0={traj.t0:g} dt={traj.dt:g} t_end={traj.t_end:g}")
    print(f"sup |x|: {sup!r}")
    if o.bound is not None:
        rep = boundedness(traj, o.bound)
        if rep.verdict == "pass":
            print(f"bounded: yes (sup {rep.extreme!r} <= {o.bound!r})")
        else:
            w = rep.witness
            print(f"bounded: no (|x| = {abs(w['value'])!r} at t = {w['t']!r} "
                  f"exceeds {o.bound!r})")
    if "flags" in meta:
        f = meta["flags"]
        print(f"certificate: ratio={f['certificate_ratio']:.6g} "
              f"holds={f['certificate_holds']} sup_bound={f['sup_bound']:.6g}")
    if o.out:
        fmt = o.format or "csv"
        text = trajectory_csv(traj) if fmt == "csv" else trajectory_json(traj)
        _write_data(o, text, f"trajectory ({len(traj)} samples, {fmt})")
    return 0


# ---------------------------------------------------------------------------
# classify


def _classification_csv(res) -> str:
    rows = [("label", res.label),
            ("candidate_tau",
             "" if res.candidate_tau is None else res.candidate_tau)]
    rows += [(f"verdict[{name}]", res.verdicts[name]) for name in CLASS_ORDER]
    rows.append(("hierarchy_ok", res.hierarchy_ok()))
    return csv_text(("property", "value"), rows, canonical_hash(res.config))


def cmd_classify(args) -> int:
    o = _merged_options(args)
    traj, meta = _build_trajectory(o)
    ex = meta.get("example")
    base = catalog.recommended_config(ex) if ex is not None else ClassifyConfig()
    over = {}
    if o.eps is not None:
        over["eps"] = o.eps
    if o.exact_eps is not None:
        over["exact_eps"] = o.exact_eps
    if o.tau is not None:
        over["tau"] = o.tau
    if o.tau_max is not None:
        over["tau_range"] = (0.0, o.tau_max)
    if o.tau_step is not None:
        over["tau_step"] = o.tau_step
    if o.windows is not None:
        over["windows"] = o.windows
    if o.seed is not None:
        over["seed"] = o.seed
    try:
        cfg = dataclasses.replace(base, **over) if over else base
    except ValueError as exc:
        raise ConfigError(str(exc))
    res = classify_trajectory(traj, cfg)
    print(res.summary())
    if o.out:
        fmt = o.format or "json"
        text = classification_json(res) if fmt == "json" else _classification_csv(res)
        _write_data(o, text, f"classification ({fmt})")
    if all(v == "inconclusive" for v in res.verdicts.values()):
        print("every verdict is inconclusive; sample longer or loosen eps",
              file=sys.stderr)
        return 4
    return 0


# ---------------------------------------------------------------------------
# scan


def _merge_scans(parts):
    first = parts[0]
    from .classify import AlmostPeriodSet
    return AlmostPeriodSet(
        mode=first.mode, eps=first.eps,
        taus=np.concatenate([p.taus for p in parts]),
        sups=np.concatenate([p.sups for p in parts]),
        admitted=np.concatenate([p.admitted for p in parts]),
        assessable=np.concatenate([p.assessable for p in parts]),
        window=first.window)


def cmd_scan(args) -> int:
    o = _merged_options(args)
    traj, _ = _build_trajectory(o)
    eps = o.eps if o.eps is not None else 0.05
    tau_max = o.tau_max if o.tau_max is not None else 100.0
    tau_step = o.tau_step if o.tau_step is not None else 0.01
    mode = o.mode or "global"
    threads = o.threads if o.threads is not None else 1
    if threads < 1:
        raise ConfigError("threads must be at least 1")
    if mode == "remote" and o.window is None:
        raise ConfigError("remote scans need --window LO:HI")
    scan_kwargs = dict(mode=mode, window=o.window)
    try:
        if threads == 1:
            scan = almost_period_scan(traj, eps, (0.0, tau_max), tau_step,
                                      **scan_kwargs)
        else:
            grid = _scan_grid(traj, (0.0, tau_max), tau_step)
            chunks = [c for c in np.array_split(grid, threads) if c.size]
            with ThreadPoolExecutor(max_workers=threads) as pool:
                parts = list(pool.map(
                    lambda c: almost_period_scan(
                        traj, eps, (0.0, tau_max), tau_step,
                        taus=c, **scan_kwargs),
                    chunks))
            scan = _merge_scans(parts)
    except ValueError as exc:
        raise ConfigError(str(exc))
    dens = scan.density()
    print(f"mode: {scan.mode}" + ("" if scan.window is None else
                                  f" (window {scan.window[0]:g}:{scan.window[1]:g})"))
    print(f"shifts scanned: {len(scan.taus)} (0 to {tau_max:g}, step {tau_step:g})")
    print(f"admitted at eps={eps:g}: {dens.n_admitted}")
    if dens.n_admitted:
        print(f"largest gap between admitted shifts: {dens.largest_gap:.6g}")
    print(f"relative density: {dens.verdict}")
    if o.out:
        fmt = o.format or "csv"
        if fmt == "csv":
            text = almost_period_set_csv(scan)
        else:
            payload = jsonable(scan)
            payload["density"] = jsonable(dens)
            digest = canonical_hash({"eps": eps, "tau_max": tau_max,
                                     "tau_step": tau_step, "mode": mode,
                                     "window": scan.window})
            text = json_text(payload, digest)
        _write_data(o, text, f"shift scan ({len(scan.taus)} shifts, {fmt})")
    return 0


# ---------------------------------------------------------------------------
# verify suites
#
# Each suite returns a list of (ok, message) pairs and must be deterministic
# and self-contained: fixed seeds, no files, no network.


def _suite_contraction():
    out = []
    cfg = IntegratorConfig(dt_out=0.02)
    horizon = 15.0
    decay = math.exp(-horizon)
    rng = np.random.default_rng(0)
    pairs = rng.uniform(-5.0, 5.0, size=(40, 2))
    all_pass = True
    worst = 0.0
    for u1, u2 in pairs:
        fld = ScalarField(kind="continuous", rhs="-x+sin(t)", name="damped-forced")
        _, gaps, rep = contraction_gap(fld, float(u1), float(u2),
                                       (0.0, horizon), cfg)
        all_pass = all_pass and rep.verdict == "pass"
        g0 = abs(float(u2 - u1))
        if g0 > 0:
            worst = max(worst, float(gaps[-1]) / (g0 * decay))
    out.append((all_pass,
                "forced linear decay: 40 seeded pairs never widen their gap"))
    out.append((worst <= 1.0 + 1e-3,
                f"final gaps sit on the exp(-t) envelope (worst ratio {worst:.9f})"))

    slow = ScalarField(kind="continuous", rhs="-x+sin(ln(1+t))",
                       time_domain="half-line", name="damped-log-forced")
    ok = True
    for u1, u2 in pairs[:5]:
        _, gaps, rep = contraction_gap(slow, float(u1), float(u2),
                                       (0.0, horizon), cfg)
        g0 = abs(float(u2 - u1))
        ok = ok and rep.verdict == "pass" and gaps[-1] <= g0 * decay * (1 + 1e-3)
    out.append((ok, "the forcing term does not affect the gap decay rate"))

    half = ScalarField(kind="discrete", rhs="x/2", time_domain="half-line",
                       name="halving")
    _, gaps, rep = contraction_gap(half, 1.0, -1.0, 30)
    exact = np.array_equal(gaps, 2.0 * 0.5 ** np.arange(31.0))
    out.append((rep.verdict == "pass" and exact,
                "halving map gaps are exactly 2^(1-n)"))

    bh, _ = catalog.make_beverton_holt()
    _, gaps, rep = contraction_gap(bh, 3.0, 12.0, 2000)
    out.append((rep.verdict == "pass" and gaps[-1] < 1e-6,
                f"drifting-capacity map: the pair (3, 12) closes its gap "
                f"monotonically (final gap {float(gaps[-1]):.3e})"))
    return out


def _suite_periodic():
    out = []
    two_pi = 2.0 * math.pi
    sine = catalog.get("sine")
    traj = sine.trajectory()
    scan = almost_period_scan(traj, 0.05, (0.0, 100.0), 0.01)
    dens = scan.density()
    out.append((dens.verdict == "pass" and dens.largest_gap <= 6.4,
                f"sine admits relatively dense shifts at eps=0.05 "
                f"(largest gap {dens.largest_gap:.3f})"))
    sup = tail_sup(traj, two_pi, (0.0, traj.t_end - two_pi))
    out.append((sup <= 1e-5,
                f"one full period reproduces the sine curve (sup {sup:.3e})"))
    bat = remote_stationary_test(traj, 0.05, ((100.0, 200.0), (200.0, 390.0)))
    out.append((bat.verdict == "fail",
                "sine is honestly rejected as remotely constant"))
    res = classify_trajectory(traj, catalog.recommended_config(sine))
    out.append((res.label == "tau-periodic"
                and res.candidate_tau is not None
                and abs(res.candidate_tau - two_pi) <= 1e-6
                and res.hierarchy_ok(),
                f"classifier lands on tau-periodic with the shift 2*pi "
                f"(candidate {res.candidate_tau:.9f})"))
    relax = catalog.get("relax-sin")
    rep = asymptotic_tau_periodic_test(relax.trajectory(), two_pi, 1e-4)
    out.append((rep.verdict == "pass",
                f"after its transient the relaxation response repeats with "
                f"the forcing period (statistic {rep.statistic:.3e})"))
    return out


def _suite_monotone():
    out = []
    bh, flags = catalog.make_beverton_holt()
    t_grid = np.linspace(0.0, 60.0, 31)
    rep = check_monotone_in_x(bh, t_grid, np.linspace(0.1, 30.0, 40))
    out.append((rep.verdict == "pass",
                "drifting-capacity map is monotone in the population"))
    rep = check_lipschitz_one(bh, t_grid, np.linspace(5.0, 22.0, 35))
    out.append((rep.verdict == "pass" and rep.extreme <= 0.95,
                f"on the trapped band [5, 22] the map contracts "
                f"(largest ratio {rep.extreme:.4f})"))
    rep = check_lipschitz_one(bh, t_grid, np.linspace(0.1, 2.0, 20))
    out.append((rep.verdict == "fail" and rep.extreme > 1.2,
                f"below the capacity band the map honestly expands "
                f"(largest ratio {rep.extreme:.4f})"))
    out.append((not flags["certificate_holds"]
                and flags["certificate_ratio"] > 1.0
                and flags["sup_bound"] == 22.0,
                f"the coarse ratio certificate is reported as not applying "
                f"(ratio {flags['certificate_ratio']:.4f} > 1)"))
    doubling = ScalarField(kind="discrete", rhs="2*x", time_domain="half-line",
                           name="doubling")
    rep = check_lipschitz_one(doubling, np.arange(3.0), np.linspace(-3.0, 3.0, 13))
    out.append((rep.verdict == "fail" and abs(rep.extreme - 2.0) <= 1e-9,
                "the doubling map is flagged as expanding with ratio 2"))
    return out


def _suite_counterexample():
    out = []
    w = catalog.nonconvergence_witnesses(5)
    at_zero = catalog.oracle_value("slow-chirp", w["zero_times"])
    at_one = catalog.oracle_value("slow-chirp", w["one_times"])
    ok = (np.max(np.abs(at_zero)) <= 1e-10
          and np.max(np.abs(at_one - 1.0)) <= 1e-10)
    out.append((ok, "witness times pin the chirp orbit to 0 and to 1, "
                    "so it never converges"))
    traj = sample_function(catalog.CHIRP_CURVE, (0.0, 1201.0), 0.05,
                           name="slow-chirp")
    rep = asymptotic_tau_periodic_test(traj, 1.0, 0.3)
    out.append((rep.verdict == "fail",
                f"no tail makes the chirp 1-shift small: residue "
                f"oscillation {rep.residue_osc:.3f}"))
    long_traj = sample_function(catalog.CHIRP_CURVE, (0.0, 102000.0), 0.05,
                                name="slow-chirp")
    curve = remote_tau_periodic_test(long_traj, 3.0, 0.1,
                                     ((1e3, 1e4), (1e4, 1e5)))
    sups = curve.sups
    out.append((curve.verdict == "pass" and sups[1] < sups[0],
                f"yet late windows shrink the 3-shift comparison "
                f"({sups[0]:.3f} then {sups[1]:.3f}): recurrence holds "
                f"only remotely"))
    ts = np.linspace(0.0, 5000.0, 2001)
    for name in ("slow-chirp", "sin-log"):
        diff = np.abs(catalog.oracle_value(name, ts + 3.0)
                      - catalog.oracle_value(name, ts))
        bound = catalog.tail_bound(name, ts, 3.0)
        out.append((bool(np.all(diff <= bound + 1e-12)),
                    f"the analytic tail bound for {name} dominates the "
                    f"measured 3-shift differences"))
    return out


def _suite_beverton_holt():
    out = []
    bh, flags = catalog.make_beverton_holt()
    traj = iterate(bh, 1.0, 102000)
    rep = boundedness(traj, flags["sup_bound"], tail_from=100.0)
    out.append((rep.verdict == "pass",
                f"orbit from 1 is eventually trapped below "
                f"mu*beta/(mu-1) = {flags['sup_bound']:g} "
                f"(tail sup {rep.extreme:.4f})"))
    bat = remote_stationary_test(traj, 0.05, ((1e3, 1e4), (1e4, 1e5)))
    out.append((bat.verdict == "pass",
                "every probe shift settles on late windows: the orbit is "
                "remotely stationary at eps=0.05"))
    asy = asymptotic_stationary_test(traj, 0.05)
    out.append((asy.verdict == "fail",
                f"the same orbit never converges (tail oscillation "
                f"{asy.statistic:.4f}): asymptotic constancy is rejected"))
    const, _ = catalog.make_beverton_holt(mu=2.0, capacity=10.0)
    fixed = iterate(const, 10.0, 200)
    out.append((bool(np.all(fixed.values == 10.0)),
                "at constant capacity the carrying value is an exact fixed point"))
    approach = iterate(const, 3.0, 200)
    tail = approach.values[60:]
    out.append((bool(np.all(np.abs(tail - 10.0) <= 1e-8)),
                "orbits reach the constant capacity to 1e-8 within 60 steps"))
    return out


_PARSER_SOURCES = (
    "sin(t)",
    "sin(t)+sin(sqrt(2)*t)",
    catalog.CHIRP_RHS,
    catalog.CHIRP_CURVE,
    catalog.BH_RHS,
    catalog.BH_DRIFTING_RHS,
    catalog.DEFAULT_CAPACITY,
    "-x+sin(ln(1+t))",
    "exp(-x^2)*ln(1+t)",
    "1/(1+x^2)",
    "-(x-sin(t))^3",
    "floor(t/2)*cos(pi*t)",
    "mu*x*(1-x/K)",
    "2^(-t)*cos(t)+e^(-x)",
    "abs(x)^(3/2)",
    "sqrt(x^2+1)-abs(x)",
)


def _suite_parser():
    out = []
    stable = 0
    for src in _PARSER_SOURCES:
        text1 = parse(src).to_text()
        text2 = parse(text1).to_text()
        stable += text1 == text2
    out.append((stable == len(_PARSER_SOURCES),
                f"printing and reparsing is idempotent on "
                f"{stable}/{len(_PARSER_SOURCES)} catalogued expressions"))
    rng = np.random.default_rng(20260814)
    alphabet = np.array(list("0123456789.+-*/^()tx, abcdefghilmnopqrs_"))
    parsed = rejected = crashed = 0
    for _ in range(3000):
        n = int(rng.integers(1, 33))
        s = "".join(rng.choice(alphabet, size=n))
        try:
            parse(s)
            parsed += 1
        except ParseError:
            rejected += 1
        except Exception:
            crashed += 1
    out.append((crashed == 0,
                f"3000 fuzzed strings: {parsed} parsed, {rejected} rejected "
                f"cleanly, {crashed} crashed"))
    return out


_SUITES = {
    "contraction": _suite_contraction,
    "periodic": _suite_periodic,
    "monotone": _suite_monotone,
    "counterexample": _suite_counterexample,
    "beverton-holt": _suite_beverton_holt,
    "parser": _suite_parser,
}


def cmd_verify(args) -> int:
    names = list(_SUITES) if args.suite == "all" else [args.suite]
    passed = total = 0
    for name in names:
        print(f"suite: {name}")
        for ok, message in _SUITES[name]():
            total += 1
            passed += bool(ok)
            print(f"  [{'ok' if ok else 'FAIL'}] {message}")
    print(f"passed {passed}/{total} checks")
    return 0 if passed == total else 1


# ---------------------------------------------------------------------------
# examples


def cmd_examples(args) -> int:
    table = catalog.catalog()
    if args.name:
        try:
            entry = catalog.get(args.name)
        except KeyError:
            known = ", ".join(table)
            raise ConfigError(f"unknown example {args.name!r} (known: {known})")
        table = {entry.name: entry}
    width = max(len(n) for n in table)
    cwidth = max(len("expected class"),
                 max(len(ex.expected_class) for ex in table.values()))
    print(f"{'name':<{width}}  {'kind':<5}  {'expected class':<{cwidth}}  "
          f"description")
    for ex in table.values():
        print(f"{ex.name:<{width}}  {ex.kind:<5}  {ex.expected_class:<{cwidth}}  "
              f"{ex.description}")
    if args.name:
        ex = next(iter(table.values()))
        print()
        if ex.curve:
            print(f"curve: {ex.curve}")
        if ex.rhs:
            print(f"rhs: {ex.rhs}  params: {ex.params or '{}'}")
        if ex.recommended:
            print(f"recommended: {ex.recommended}")
        if ex.notes:
            print(textwrap.fill(f"notes: {ex.notes}", width=78))
    bounded = [n for n in ("sin-log", "sin-log-drift", "slow-chirp") if n in table]
    if bounded:
        print()
        print("analytic tail bounds (both sides sampled on the same grid):")
        for name in bounded:
            print(f"  {name}: {catalog.tail_bound_text(name)}")
    if "beverton-holt" in table:
        _, flags = catalog.make_beverton_holt()
        print()
        print("beverton-holt certificate flags:")
        print(f"  expansion_possible={flags['expansion_possible']}: with mu > 1 "
              f"the one-step map expands somewhere below the capacity band, "
              f"even though orbits are eventually trapped")
        print(f"  certificate_ratio={flags['certificate_ratio']:.6g}, "
              f"certificate_holds={flags['certificate_holds']}: the coarse "
              f"one-step certificate mu*beta^2/alpha^2 <= 1 does not apply "
              f"here, so remote stationarity rests on the numerical battery")
        print(f"  sup_bound={flags['sup_bound']:.6g}: every orbit eventually "
              f"stays below mu*beta/(mu-1)")
    return 0


# ---------------------------------------------------------------------------
# parser assembly


def _add_system_flags(sp: argparse.ArgumentParser) -> None:
    g = sp.add_argument_group("system")
    g.add_argument("--ode", metavar="EXPR",
                   help="continuous field dx/dt = f(t, x)")
    g.add_argument("--map", metavar="EXPR",
                   help="discrete field x_{n+1} = f(n, x_n)")
    g.add_argument("--fn", metavar="EXPR",
                   help="closed-form curve of t, sampled directly")
    g.add_argument("--example", metavar="NAME",
                   help="catalogued system (see 'rapflow examples')")
    g.add_argument("--bh", metavar="SPEC",
                   help="Beverton-Holt map, e.g. 'mu=2,K=10'; K may be an "
                        "expression in t, alpha/beta bound its range")
    g.add_argument("--param", action="append", metavar="NAME=VALUE",
                   help="bind a field parameter (repeatable)")
    g.add_argument("--u0", type=float, help="initial value")
    g.add_argument("--span", type=_parse_span, metavar="T0:T1",
                   help="time span, e.g. 0:100")
    g.add_argument("--steps", type=int, help="iteration count for maps")
    g.add_argument("--dt", type=float, help="output grid spacing (default 0.01)")
    g.add_argument("--method", choices=("rkf45", "rk4"),
                   help="integration scheme (default rkf45)")
    g.add_argument("--abs-tol", type=float,
                   help="absolute step error tolerance (default 1e-9)")
    g.add_argument("--rel-tol", type=float,
                   help="relative step error tolerance (default 1e-9)")
    g.add_argument("--source", choices=("integrate", "curve"),
                   help="for examples with a known solution curve: integrate "
                        "the field or sample the curve")
    g.add_argument("--horizon", type=float,
                   help="override the end time (step count for maps)")


def _add_output_flags(sp: argparse.ArgumentParser, default_fmt: str) -> None:
    g = sp.add_argument_group("output")
    g.add_argument("--out", metavar="PATH", help="write the data here")
    g.add_argument("--format", choices=("csv", "json"),
                   help=f"output format (default {default_fmt})")
    g.add_argument("--config", metavar="PATH",
                   help="INI file with defaults for any flag")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rapflow",
        description="Simulate scalar nonautonomous systems and classify "
                    "their recurrence.")
    parser.add_argument("--version", action="version",
                        version=f"rapflow {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True,
                                metavar="command")

    sim = sub.add_parser("simulate",
                         help="sample a trajectory and summarize it")
    _add_system_flags(sim)
    sim.add_argument("--bound", type=float,
                     help="also check sup |x| against this bound")
    _add_output_flags(sim, "csv")
    sim.set_defaults(handler=cmd_simulate)

    cls = sub.add_parser("classify",
                         help="run the recurrence classifier on a system")
    _add_system_flags(cls)
    g = cls.add_argument_group("classifier")
    g.add_argument("--eps", type=float, help="recurrence tolerance (default 0.05)")
    g.add_argument("--exact-eps", type=float,
                   help="tolerance for exact periodicity and constancy")
    g.add_argument("--tau", type=float, help="pin the candidate shift")
    g.add_argument("--tau-max", type=float, help="largest shift to scan")
    g.add_argument("--tau-step", type=float, help="scan grid spacing")
    g.add_argument("--windows", type=_parse_windows, metavar="LO:HI;LO:HI",
                   help="late comparison windows")
    g.add_argument("--seed", type=int, help="seed for the probe battery")
    _add_output_flags(cls, "json")
    cls.set_defaults(handler=cmd_classify)

    scn = sub.add_parser("scan", help="sweep a grid of shifts")
    _add_system_flags(scn)
    g = scn.add_argument_group("scan")
    g.add_argument("--eps", type=float, help="admission tolerance (default 0.05)")
    g.add_argument("--tau-max", type=float,
                   help="largest shift to scan (default 100)")
    g.add_argument("--tau-step", type=float,
                   help="scan grid spacing (default 0.01)")
    g.add_argument("--mode", choices=("global", "remote"),
                   help="compare over the whole span or one late window")
    g.add_argument("--window", type=_parse_window, metavar="LO:HI",
                   help="late window for --mode remote")
    g.add_argument("--threads", type=int,
                   help="worker threads; results are identical at any count")
    _add_output_flags(scn, "csv")
    scn.set_defaults(handler=cmd_scan)

    ver = sub.add_parser("verify", help="run a self-contained checking suite")
    ver.add_argument("suite", choices=(*_SUITES, "all"),
                     help="which suite to run")
    ver.set_defaults(handler=cmd_verify)

    exm = sub.add_parser("examples", help="list the catalogued systems")
    exm.add_argument("name", nargs="?",
                     help="show one catalogued system in detail")
    exm.set_defaults(handler=cmd_examples)
    return parser


_VALUE_FLAGS = ("--ode", "--map", "--fn", "--bh", "--u0", "--tau",
                "--bound", "--horizon")


def _glue_flag_values(argv):
    """Join flags to their values so leading-dash expressions parse.

    argparse reads '--ode -x+sin(t)' as two options; rewriting it to
    '--ode=-x+sin(t)' keeps the documented space-separated form working for
    expressions and negative numbers alike.
    """
    out = []
    i = 0
    while i < len(argv):
        arg = argv[i]
        if arg in _VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{arg}={argv[i + 1]}")
            i += 2
        else:
            out.append(arg)
            i += 1
    return out


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    args = build_parser().parse_args(_glue_flag_values(argv))
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"rapflow: error: {exc}", file=sys.stderr)
        return 2
    except ParseError as exc:
        print(f"rapflow: error: bad expression: {exc}", file=sys.stderr)
        return 2
    except FieldValidationError as exc:
        print(f"rapflow: error: {exc}", file=sys.stderr)
        return 2
    except DynamicsError as exc:
        print(f"rapflow: error: integration aborted: {exc}", file=sys.stderr)
        return 3
    except (EvalError, ValueError) as exc:
        print(f"rapflow: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
