"""Command-line interface: ``microlax energy|regime-map|verify|simulate|convergence``.

Exit codes: 0 ok, 1 verification failure, 2 usage or configuration error,
3 energy evaluation error, 4 partial result (some regime-map samples
failed), 5 simulation failure.
"""

from __future__ import annotations

import argparse
import contextlib
import datetime as _dt
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, kernels
from . import io as mio
from .errors import MicrolaxError

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_EVAL, EXIT_PARTIAL, EXIT_SIM = 0, 1, 2, 3, 4, 5

log = logging.getLogger("microlax")


def thread_count(deterministic: bool = False) -> int:
    """``MICROLAX_THREADS`` (default 1); forced to 1 in deterministic mode."""
    if deterministic:
        return 1
    try:
        return max(1, int(os.environ.get("MICROLAX_THREADS", "1")))
    except ValueError:
        return 1


@contextlib.contextmanager
def thread_limit(n: int):
    """Cap BLAS/OpenMP pools and the FFT worker count at ``n``."""
    from threadpoolctl import threadpool_limits

    old = os.environ.get("MICROLAX_THREADS")
    os.environ["MICROLAX_THREADS"] = str(n)
    try:
        with threadpool_limits(limits=n):
            yield
    finally:
        if old is None:
            os.environ.pop("MICROLAX_THREADS", None)
        else:
            os.environ["MICROLAX_THREADS"] = old


# ---------------------------------------------------------------------------
# energy


def _point(cp):
    if not cp.has_section("point"):
        raise mio.ConfigError("missing [point] section with d and eps")
    d = mio._get(cp, "point", "d", float)
    eps = mio.floats(mio._get(cp, "point", "eps", str))
    return d, eps


def _energy_params(cp, variant, eps):
    if variant == "scalar3d":
        dim = 2
    else:
        dim = 1 if eps.size == 1 else 2
    params = mio.parse_params(cp, variant, dim)
    if params.ncomp != eps.size:
        raise mio.ConfigError(f"eps has {eps.size} components, parameters need {params.ncomp}")
    return params


def _variant(args, cp) -> str:
    if args.variant:
        return args.variant
    if cp.has_option("run", "variant"):
        v = cp.get("run", "variant")
        if v not in ("linear", "relaxed", "scalar3d"):
            raise mio.ConfigError(f"unknown variant {v!r}")
        return v
    return "relaxed"


def cmd_energy(args) -> int:
    from .relaxed_energy import eval_extended, evaluate

    cp = mio.read_config(args.config)
    variant = _variant(args, cp)
    d, eps = _point(cp)
    params = _energy_params(cp, variant, eps)
    try:
        r = evaluate(d, eps, params) if 0.0 <= d <= 1.0 else eval_extended(d, eps, params)
    except MicrolaxError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_EVAL
    f = mio.fmt17
    vec = lambda v: ", ".join(f(x) for x in np.atleast_1d(v))  # noqa: E731
    lines = [
        ("value", f(r.value)),
        ("d_d", f(r.d_d)),
        ("d_eps", vec(r.d_eps)),
        ("regime", f"{int(r.regime)} ({r.regime.name})"),
        ("beta_star", f(r.beta_star)),
        ("eps1_star", vec(r.eps1_star)),
        ("eps2_star", vec(r.eps2_star)),
    ]
    for k, v in lines:
        print(f"{k} = {v}")
    if args.out:
        out = mio.ensure_dir(args.out)
        n = np.atleast_1d(r.d_eps).size
        header = ["d", "value", "d_d"] + [f"d_eps{i}" for i in range(n)] + ["regime", "beta_star"]
        header += [f"eps1_star{i}" for i in range(n)] + [f"eps2_star{i}" for i in range(n)]
        row = [d, r.value, r.d_d, *np.atleast_1d(r.d_eps), int(r.regime), r.beta_star, *np.atleast_1d(r.eps1_star), *np.atleast_1d(r.eps2_star)]
        mio.write_csv(out / "energy.csv", header, [row])
    return EXIT_OK


# ---------------------------------------------------------------------------
# regime map

AXIS_NAMES = ("d", "eps0", "eps1", "eps2", "scale")


def _axis(cp, key):
    raw = [t.strip() for t in mio._get(cp, "map", key, str).split(",")]
    if len(raw) != 4 or raw[0] not in AXIS_NAMES:
        raise mio.ConfigError(f"[map] {key} must be 'name, lo, hi, count' with name in {AXIS_NAMES}")
    lo, hi = float(raw[1]), float(raw[2])
    count = int(raw[3])
    if count < 2 or not (np.isfinite(lo) and np.isfinite(hi)):
        raise mio.ConfigError(f"[map] {key}: need count >= 2 and finite range")
    return raw[0], np.linspace(lo, hi, count)


def _sample(name_vals, d, eps, p):
    from .phase_energy import PhaseParams

    eps = eps.copy()
    for name, v in name_vals:
        if name == "d":
            d = v
        elif name == "scale":
            p = PhaseParams(p.alpha1, p.alpha2, p.epsT1, p.epsT1 + v * (p.epsT2 - p.epsT1), w1=p.w1, w2=p.w2, sigma_ext=p.sigma_ext)
        else:
            k = int(name[-1])
            if k >= eps.size:
                raise mio.ConfigError(f"axis {name} exceeds the strain size {eps.size}")
            eps[k] = v
    return d, eps, p


def cmd_regime_map(args) -> int:
    from .relaxed_energy import eval_2d, eval_scalar3d

    cp = mio.read_config(args.config)
    variant = _variant(args, cp)
    if variant == "linear":
        raise mio.ConfigError("regime maps need the relaxed 2D or scalar3d variant")
    d0, eps0 = _point(cp)
    p = _energy_params(cp, variant, eps0)
    if p.ncomp == 1:
        raise mio.ConfigError("regime maps need the relaxed 2D or scalar3d variant")
    (xn, xs), (yn, ys) = _axis(cp, "x"), _axis(cp, "y")
    fn = eval_scalar3d if p.ncomp == 2 else eval_2d
    rows = []
    flagged = 0
    for y in ys:
        for x in xs:
            d, eps, pp = _sample(((xn, x), (yn, y)), d0, eps0, p)
            try:
                r = fn(d, eps, pp)
                rows.append([x, y, int(r.regime), r.beta_star, r.value, 0, ""])
            except MicrolaxError as exc:
                flagged += 1
                rows.append([x, y, -1, np.nan, np.nan, 1, type(exc).__name__])
    out = mio.ensure_dir(args.out or ".")
    mio.write_csv(out / "regime_map.csv", [xn, yn, "regime", "beta_star", "value", "flagged", "error"], rows)
    print(f"{len(rows)} samples, {flagged} flagged -> {out / 'regime_map.csv'}")
    if flagged == len(rows):
        return EXIT_EVAL
    return EXIT_PARTIAL if flagged else EXIT_OK


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    from .verify import SUITES, Check, run_suites

    overrides = {}
    if args.config:
        cp = mio.read_config(args.config)
        if cp.has_section("verify"):
            overrides = {k: mio._get(cp, "verify", k, float) for k in cp.options("verify")}
    names = None
    if args.suite:
        names = [s.strip() for s in args.suite.split(",") if s.strip()]
        bad = [s for s in names if s not in SUITES]
        if bad:
            raise mio.ConfigError(f"unknown suite(s) {bad}; choose from {', '.join(SUITES)}")
    with thread_limit(thread_count(args.deterministic)):
        checks = run_suites(names, overrides)
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"{status} {c.suite}.{c.name}: {c.value:.6g} (tol {c.tol:.3g}) {c.detail}")
    if args.out:
        out = mio.ensure_dir(args.out)
        mio.write_csv(out / "verify_report.csv", Check.HEADER, (c.row() for c in checks))
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VERIFY


# ---------------------------------------------------------------------------
# simulate


def _snapshot(out: Path, sim, state, vtk: bool):
    tag = f"{state.step:06d}"
    mio.write_field_csv(out / f"a_{tag}.csv", state.a)
    mio.write_field_csv(out / f"b_{tag}.csv", state.b)
    mio.write_field_csv(out / f"mu_{tag}.csv", state.mu)
    if vtk:
        mio.write_vtk(out / f"fields_{tag}.vtk", sim.grid, {"a": state.a, "b": state.b, "d": state.a + state.b, "mu": state.mu})


def run_simulation(config_path, out_dir, seed=None, variant=None, deterministic=False):
    """Run a configured simulation and write all outputs to ``out_dir``.

    Diagnostics are flushed row by row so a failed run keeps its partial
    record.  Returns ``(final_state, n_rows)``; solver errors propagate
    after the manifest is written with ``status = "failed"``.
    """
    from .field_solver import Diagnostics, Simulation

    cp = mio.read_config(config_path)
    cfg = mio.build_sim_config(cp, variant=variant, seed=seed, base_dir=Path(config_path).parent)
    vtk = mio._get(cp, "run", "vtk", bool, False)
    out = mio.ensure_dir(out_dir)
    (out / "resolved_config.ini").write_text(mio.config_text(cp), encoding="utf-8")
    threads = thread_count(deterministic)
    manifest = {
        "version": __version__,
        "kernel_backend": kernels.BACKEND,
        "config": mio.config_text(cp),
        "seed": cfg.seed,
        "deterministic": bool(deterministic),
        "threads": threads,
        "start": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    t0 = time.perf_counter()
    sim = Simulation(cfg)
    every = max(1, cfg.output_every)
    snap = cfg.snapshot_every
    last = {"state": None, "diag": None}
    status = "failed"
    with open(out / "diagnostics.csv", "w", newline="", encoding="utf-8") as fh, thread_limit(threads):
        fh.write(",".join(Diagnostics.FIELDS) + "\n")

        def record(state, diag):
            last["state"], last["diag"] = state, diag
            if diag.step % every == 0:
                fh.write(",".join(mio.fmt(v) for v in diag.row()) + "\n")
                fh.flush()
            if diag.step == 0 or (snap > 0 and diag.step % snap == 0):
                _snapshot(out, sim, state, vtk)
                log.info("step %d  t=%.6g  F=%.12g", state.step, state.time, state.energy)

        try:
            final, rows = sim.run(callback=record)
            status = "ok"
        finally:
            s, dg = last["state"], last["diag"]
            if s is not None and dg is not None:
                if dg.step % every != 0:
                    fh.write(",".join(mio.fmt(v) for v in dg.row()) + "\n")
                if not (s.step == 0 or (snap > 0 and s.step % snap == 0)):
                    _snapshot(out, sim, s, vtk)
            manifest.update(
                status=status,
                end=_dt.datetime.now(_dt.timezone.utc).isoformat(),
                wall_seconds=time.perf_counter() - t0,
                final=None if dg is None else dict(zip(Diagnostics.FIELDS, (float(v) for v in dg.row()))),
            )
            mio.write_manifest(out / "manifest.json", manifest)
    return final, len(rows)


def cmd_simulate(args) -> int:
    if not args.out:
        raise mio.ConfigError("simulate needs --out DIR")
    try:
        state, n = run_simulation(args.config, args.out, seed=args.seed, variant=args.variant, deterministic=args.deterministic)
    except MicrolaxError as exc:
        print(f"simulation failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SIM
    print(f"{n - 1} steps, t = {state.time!r}, F = {state.energy!r} -> {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# convergence


def cmd_convergence(args) -> int:
    from .convergence import HEADER, elastic_study, time_study

    cp = mio.read_config(args.config)
    if not cp.has_section("convergence"):
        raise mio.ConfigError("missing [convergence] section")
    kind = mio._get(cp, "convergence", "kind", str, "elastic")
    levels = mio._get(cp, "convergence", "levels", int, 4)
    if levels < 3:
        raise mio.ConfigError("[convergence] levels must be at least 3")
    with thread_limit(thread_count(args.deterministic)):
        try:
            if kind == "elastic":
                for s in ("run", "grid"):
                    if not cp.has_section(s):
                        cp.add_section(s)
                variant = _variant(args, cp)
                dim = mio._get(cp, "grid", "dim", int, 2)
                params = mio.parse_params(cp, variant, dim)
                length = mio._get(cp, "grid", "length", float, 1.0)
                rows = elastic_study(
                    params,
                    (length,) * dim,
                    base_n=mio._get(cp, "convergence", "base_n", int, 8),
                    levels=levels,
                    mean=mio._get(cp, "convergence", "mean", float, 0.5),
                    amplitude=mio._get(cp, "convergence", "amplitude", float, 0.3),
                )
            elif kind == "time":
                if not cp.has_section("run"):
                    cp.add_section("run")
                if not (cp.has_option("run", "t_end") or cp.has_option("run", "n_steps")):
                    cp.set("run", "t_end", cp.get("convergence", "t_end", fallback="1.0"))
                cfg = mio.build_sim_config(cp, variant=args.variant, seed=args.seed, base_dir=Path(args.config).parent)
                rows = time_study(
                    cfg,
                    base_dt=mio._get(cp, "convergence", "base_dt", float, cfg.dt),
                    t_end=mio._get(cp, "convergence", "t_end", float, 10 * cfg.dt),
                    levels=levels,
                    amplitude=mio._get(cp, "convergence", "amplitude", float, 0.05),
                )
            else:
                raise mio.ConfigError("[convergence] kind must be 'elastic' or 'time'")
        except MicrolaxError as exc:
            print(f"convergence study failed: {type(exc).__name__}: {exc}", file=sys.stderr)
            return EXIT_SIM
    for r in rows:
        print(f"level {r[0]}  n={r[1]}  dt={r[2]!r}  {r[3]}: error {r[4]:.6e}  order {r[5]:.3f}")
    if args.out:
        out = mio.ensure_dir(args.out)
        mio.write_csv(out / "convergence.csv", HEADER, rows)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="microlax", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"microlax {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", metavar="PATH", required=config_required, help="INI configuration file")
        p.add_argument("--out", metavar="DIR", help="output directory")
        p.add_argument("--seed", type=int, help="override the random seed")
        p.add_argument("--deterministic", action="store_true", help="single thread, bit-reproducible outputs")
        p.add_argument("--variant", choices=("linear", "relaxed", "scalar3d"), help="elastic energy variant")
        p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    p = sub.add_parser("energy", help="evaluate the energy and derivatives at one point")
    common(p)
    p.set_defaults(func=cmd_energy)
    p = sub.add_parser("regime-map", help="tabulate regimes over a 2D parameter grid")
    common(p)
    p.set_defaults(func=cmd_regime_map)
    p = sub.add_parser("verify", help="run the pinned verification suites")
    common(p, config_required=False)
    p.add_argument("--suite", metavar="NAME", help="comma-separated suite names (default: all)")
    p.set_defaults(func=cmd_verify)
    p = sub.add_parser("simulate", help="run a phase-field simulation")
    common(p)
    p.set_defaults(func=cmd_simulate)
    p = sub.add_parser("convergence", help="grid or time refinement study")
    common(p)
    p.set_defaults(func=cmd_convergence)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except mio.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MicrolaxError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_EVAL


if __name__ == "__main__":
    sys.exit(main())
