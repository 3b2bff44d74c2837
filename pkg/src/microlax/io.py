"""Configuration parsing and output writers.

Configuration files are INI-style.  Tensors are comma lists in Mandel
order (``e11, e22, sqrt2 e12`` in 2D, ``g1, g2`` in anti-plane shear, a
single number in 1D); moduli are given by ``cubic = C11, C12, C44``,
``isotropic = lambda, mu``, ``scalar = k`` or ``matrix = ...`` (row-major).
See ``docs/config.md`` for the full key list.

Numbers are written with ``repr`` so every float round-trips and the
decimal point never depends on the locale.
"""

from __future__ import annotations

import configparser
import csv
import io as _io
import json
import os
from pathlib import Path

import numpy as np

from .errors import MicrolaxError
from .phase_energy import ChemParams, LinearTheoryParams, PhaseParams
from .tensor_core import ElasticModulus, cubic_mandel

NCOMP = {"1d": 1, "scalar3d": 2, "2d": 3}


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


def read_config(path) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return cp


def parse_config_text(text: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    return cp


def config_text(cp: configparser.ConfigParser) -> str:
    buf = _io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def floats(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.replace(";", ",").split(",") if t.strip()], dtype=float)
    except ValueError as exc:
        raise ConfigError(f"expected a comma list of numbers, got {text!r}") from exc


def _get(cp, section, key, conv=float, default=None):
    if not cp.has_option(section, key):
        if default is None:
            raise ConfigError(f"missing [{section}] {key}")
        return default
    raw = cp.get(section, key)
    try:
        if conv is bool:
            return cp.getboolean(section, key)
        return conv(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for [{section}] {key}: {raw!r}") from exc


def _opt(cp, section, key, conv=float, default=None):
    if not cp.has_option(section, key):
        return default
    return _get(cp, section, key, conv)


def parse_modulus(cp, section: str, ncomp: int, suffix: str = "") -> np.ndarray:
    """Modulus from one of the ``cubic``/``isotropic``/``scalar``/``matrix`` keys."""
    keys = [k + suffix for k in ("cubic", "isotropic", "scalar", "matrix")]
    given = [k for k in keys if cp.has_option(section, k)]
    if len(given) != 1:
        raise ConfigError(f"[{section}] needs exactly one of {', '.join(keys)}")
    key = given[0]
    v = floats(cp.get(section, key))
    kind = key[: len(key) - len(suffix)]
    if kind == "cubic":
        if ncomp != 3 or v.size != 3:
            raise ConfigError(f"[{section}] {key} needs C11, C12, C44 in 2D")
        return cubic_mandel(*v)
    if kind == "isotropic":
        if ncomp != 3 or v.size != 2:
            raise ConfigError(f"[{section}] {key} needs lambda, mu in 2D")
        return ElasticModulus.isotropic(*v).mandel_matrix
    if kind == "scalar":
        if v.size != 1:
            raise ConfigError(f"[{section}] {key} takes one number")
        return v[0] * np.eye(ncomp)
    if v.size != ncomp * ncomp:
        raise ConfigError(f"[{section}] {key} needs {ncomp * ncomp} entries")
    return v.reshape(ncomp, ncomp)


def _vector(cp, section, key, ncomp, default_zero=True):
    if not cp.has_option(section, key):
        if default_zero:
            return np.zeros(ncomp)
        raise ConfigError(f"missing [{section}] {key}")
    v = floats(cp.get(section, key))
    if v.size != ncomp:
        raise ConfigError(f"[{section}] {key} needs {ncomp} entries, got {v.size}")
    return v


def space_of(variant: str, dim: int) -> str:
    if variant == "scalar3d":
        return "scalar3d"
    return "1d" if dim == 1 else "2d"


def parse_grid(cp):
    from .field_solver.grid import Grid

    dim = _get(cp, "grid", "dim", int, 1)
    if dim not in (1, 2):
        raise ConfigError("[grid] dim must be 1 or 2")
    n = _get(cp, "grid", "n", int, 64)
    length = _get(cp, "grid", "length", float, 1.0)
    try:
        if dim == 1:
            return Grid((_get(cp, "grid", "nx", int, n),), (_get(cp, "grid", "lx", float, length),))
        nx, ny = _get(cp, "grid", "nx", int, n), _get(cp, "grid", "ny", int, n)
        lx, ly = _get(cp, "grid", "lx", float, length), _get(cp, "grid", "ly", float, length)
        return Grid((ny, nx), (ly, lx))
    except ValueError as exc:
        raise ConfigError(f"[grid] {exc}") from exc


def parse_chem(cp) -> ChemParams:
    if not cp.has_section("chem"):
        return ChemParams()
    d = ChemParams()
    try:
        return _chem(cp, d)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"[chem] {exc}") from exc


def _chem(cp, d: ChemParams) -> ChemParams:
    return ChemParams(
        theta=_get(cp, "chem", "theta", float, d.theta),
        kappa1=_get(cp, "chem", "kappa1", float, d.kappa1),
        kappa2=_get(cp, "chem", "kappa2", float, d.kappa2),
        lam=_get(cp, "chem", "lam", float, d.lam),
        g_delta=_get(cp, "chem", "g_delta", float, d.g_delta),
    )


def parse_params(cp, variant: str, dim: int):
    """Elastic parameters for ``variant`` on a ``dim``-dimensional body.

    Invalid material data (non-symmetric or indefinite moduli, wrong sizes)
    is reported as :class:`ConfigError`.
    """
    try:
        return _params(cp, variant, dim)
    except (MicrolaxError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid material data: {type(exc).__name__}: {exc}") from exc


def _params(cp, variant: str, dim: int):
    ncomp = NCOMP[space_of(variant, dim)]
    sig = _vector(cp, "load", "sigma_ext", ncomp) if cp.has_section("load") else np.zeros(ncomp)
    if variant == "linear":
        if not cp.has_section("linear"):
            raise ConfigError("variant 'linear' needs a [linear] section")
        C = parse_modulus(cp, "linear", ncomp)
        has2 = any(cp.has_option("linear", k) for k in ("cubic2", "isotropic2", "scalar2", "matrix2"))
        C2 = parse_modulus(cp, "linear", ncomp, suffix="2") if has2 else None
        eb = _vector(cp, "linear", "eigenstrain", ncomp)
        return LinearTheoryParams(C, eb, C2=C2, sigma_ext=sig)
    for s in ("phase1", "phase2"):
        if not cp.has_section(s):
            raise ConfigError(f"variant '{variant}' needs [phase1] and [phase2]")
    return PhaseParams(
        parse_modulus(cp, "phase1", ncomp),
        parse_modulus(cp, "phase2", ncomp),
        _vector(cp, "phase1", "eigenstrain", ncomp),
        _vector(cp, "phase2", "eigenstrain", ncomp),
        w1=_get(cp, "phase1", "w", float, 0.0),
        w2=_get(cp, "phase2", "w", float, 0.0),
        sigma_ext=sig,
    )


def load_field(path, shape) -> np.ndarray:
    """Cell field from a snapshot CSV written by :func:`write_field_csv`."""
    try:
        arr = read_field_csv(path)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read field file {path}: {exc}") from exc
    if arr.size != int(np.prod(shape)):
        raise ConfigError(f"field file {path} has {arr.size} values, grid needs {int(np.prod(shape))}")
    return arr.reshape(shape)


def build_sim_config(cp, variant: str | None = None, seed: int | None = None, base_dir="."):
    """Resolve a parsed INI file into a :class:`SimConfig`.

    ``variant`` and ``seed`` override the file when given.  Resolved values
    are written back into ``cp`` so the manifest reproduces the run.
    """
    from .field_solver.simulation import SimConfig

    for s in ("run", "grid", "initial", "solver"):
        if not cp.has_section(s):
            cp.add_section(s)
    if variant is not None:
        cp.set("run", "variant", variant)
    if seed is not None:
        cp.set("initial", "seed", str(seed))
    variant = _get(cp, "run", "variant", str, "relaxed")
    grid = parse_grid(cp)
    params = parse_params(cp, variant, grid.dim)
    t_end = _opt(cp, "run", "t_end", float)
    n_steps = _opt(cp, "run", "n_steps", int)
    if t_end is None and n_steps is None:
        raise ConfigError("[run] needs t_end or n_steps")
    a_init = b_init = None
    for key in ("a_file", "b_file"):
        if cp.has_option("initial", key):
            path = Path(cp.get("initial", key))
            if not path.is_absolute():
                path = Path(base_dir) / path
            arr = load_field(path, grid.shape)
            if key == "a_file":
                a_init = arr
            else:
                b_init = arr
    try:
        cfg = SimConfig(
            params=params,
            grid=grid,
            chem=parse_chem(cp),
            variant=variant,
            mobility=_get(cp, "solver", "mobility", float, 1.0),
            dt=_get(cp, "run", "dt", float, 1e-4),
            dt_adaptive=_get(cp, "run", "dt_adaptive", bool, True),
            t_end=t_end,
            n_steps=n_steps,
            stepper=_get(cp, "run", "stepper", str, "semi_implicit"),
            mu_convention=_get(cp, "run", "mu_convention", str, "energy"),
            stab_a=_get(cp, "solver", "stab_a", float, 0.0),
            stab_b=_get(cp, "solver", "stab_b", float, 0.0),
            tol_elast=_opt(cp, "solver", "tol_elast", float),
            newton_max=_get(cp, "solver", "newton_max", int, 50),
            tol_mm=_get(cp, "solver", "tol_mm", float, 1e-8),
            mm_max_iter=_get(cp, "solver", "mm_max_iter", int, 500),
            max_halvings=_get(cp, "solver", "max_halvings", int, 20),
            energy_slack=_get(cp, "solver", "energy_slack", float, 1e-9),
            range_delta=_get(cp, "solver", "range_delta", float, 1e-6),
            require_commuting=_get(cp, "solver", "require_commuting", bool, True),
            a0=_get(cp, "initial", "a0", float, 0.5),
            b0=_get(cp, "initial", "b0", float, 0.0),
            noise=_get(cp, "initial", "noise", float, 1e-3),
            seed=_get(cp, "initial", "seed", int, 0),
            a_init=a_init,
            b_init=b_init,
            freeze_a=_get(cp, "run", "freeze_a", bool, False),
            output_every=_get(cp, "run", "output_every", int, 1),
            snapshot_every=_get(cp, "run", "snapshot_every", int, 0),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    cp.set("run", "variant", cfg.variant)
    cp.set("initial", "seed", str(cfg.seed))
    return cfg


# writers
def fmt(x) -> str:
    """Round-trip text for numbers; integers stay integers."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def fmt17(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])


def write_field_csv(path, field: np.ndarray) -> None:
    """Field dump: header ``row, c0, c1, ...`` then one line per grid row."""
    f = np.atleast_2d(np.asarray(field, float))
    ncol = f.shape[1]
    write_csv(path, ["row"] + [f"c{j}" for j in range(ncol)], ([i] + list(f[i]) for i in range(f.shape[0])))


def read_field_csv(path) -> np.ndarray:
    arr = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return arr[:, 1:]


def write_vtk(path, grid, fields: dict, title: str = "microlax snapshot") -> None:
    """Legacy ASCII structured-points file with cell data as point data."""
    shape = grid.shape
    if grid.dim == 1:
        nx, ny = shape[0], 1
        hx, hy = grid.spacing[0], 1.0
    else:
        ny, nx = shape
        hy, hx = grid.spacing
    lines = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {nx} {ny} 1",
        f"SPACING {fmt(hx)} {fmt(hy)} 1.0",
        f"ORIGIN {fmt(0.5 * hx)} {fmt(0.5 * hy)} 0.0",
        f"POINT_DATA {nx * ny}",
    ]
    for name, f in fields.items():
        lines.append(f"SCALARS {name} double 1")
        lines.append("LOOKUP_TABLE default")
        lines.extend(fmt(v) for v in np.asarray(f, float).ravel())
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_manifest(path, manifest: dict) -> None:
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def ensure_dir(path) -> Path:
    p = Path(path)
    os.makedirs(p, exist_ok=True)
    return p
