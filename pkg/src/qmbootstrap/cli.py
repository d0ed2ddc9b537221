"""Command-line orchestration: declarative TOML configs in, artifact files out.

One invocation runs one mode (scan, refine, oracle, residual-check,
matrix-dump) against one config file. All numerical work happens before any
file is written, so a failing run leaves no partial artifacts. Output files
are byte-identical across repeated runs of the same config; the manifest is
the one exception, since it records elapsed wall time.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import __version__
from .errors import (
    BadParameter,
    ConfigParse,
    DomainTooSmall,
    EngineError,
    IncompleteTable,
    Io,
    MissingInitial,
    NonConfining,
    NonIntegrableMoment,
    NonSmoothPotential,
    NumericalFailure,
    Overflow,
    UnknownInitialData,
    UnsupportedFamily,
)
from .feasibility import is_feasible
from .matrices import ONE_OP_KINDS, MatrixKind, build_matrix, matrix_dimension
from .ordering import BaseKind
from .oracle import moments_from_wavefunction, solve_1d, solve_periodic, solve_radial
from .potentials import Family, PotentialSpec, ValidatedPotential, validate_spec
from .recursion import gen_one_var, gen_two_var, initial_from_values, recursion_residual
from .scanner import ScanAxis, ScanConfig, run_scan

# Every deliberate engine error maps to its own exit code (shown in --help).
EXIT_CODES: tuple[tuple[type, int], ...] = (
    (ConfigParse, 2),
    (Io, 3),
    (NonSmoothPotential, 4),
    (NonConfining, 5),
    (BadParameter, 6),
    (UnknownInitialData, 7),
    (MissingInitial, 8),
    (Overflow, 9),
    (UnsupportedFamily, 10),
    (IncompleteTable, 11),
    (NumericalFailure, 12),
    (DomainTooSmall, 13),
    (NonIntegrableMoment, 14),
    (EngineError, 15),
)

_BASE_KINDS = {"power": BaseKind.POWER, "exp": BaseKind.EXP, "trig_exp": BaseKind.TRIG_EXP}

_DEFAULT_BASE = {
    Family.EVEN_POLYNOMIAL: "power",
    Family.COULOMB: "power",
    Family.TODA: "exp",
    Family.TRIG: "trig_exp",
    Family.YUKAWA: "exp",
}


def _exit_code(exc: EngineError) -> int:
    for cls, code in EXIT_CODES:
        if type(exc) is cls:
            return code
    return EXIT_CODES[-1][1]


def _reject_unknown(block: dict, allowed: set[str], where: str) -> None:
    for key in block:
        if key not in allowed:
            raise ConfigParse(f"unknown key {key!r} in [{where}] (allowed: {sorted(allowed)})")


def _need(block: dict, key: str, where: str) -> Any:
    if key not in block:
        raise ConfigParse(f"[{where}] is missing required key {key!r}")
    return block[key]


def _set_override(config: dict, assignment: str) -> None:
    """Apply one --set dotted.path=value override onto the config tree."""
    path, sep, raw = assignment.partition("=")
    if not sep or not path:
        raise ConfigParse(f"--set needs dotted.key=value, got {assignment!r}")
    try:
        value = tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw  # bare string convenience: --set potential.family=Toda
    node = config
    keys = path.split(".")
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigParse(f"--set path {path!r} descends through a non-table key")
    node[keys[-1]] = value


def _load_config(path: str, sets: list[str]) -> dict:
    try:
        with open(path, "rb") as fh:
            config = tomllib.load(fh)
    except OSError as exc:
        raise Io(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigParse(f"config {path} is not valid TOML: {exc}") from exc
    for assignment in sets:
        _set_override(config, assignment)
    return config


def _build_potential(config: dict) -> ValidatedPotential:
    block = config.get("potential")
    if not isinstance(block, dict):
        raise ConfigParse("config needs a [potential] block")
    _reject_unknown(block, {"family", "coeffs", "angular_l", "free_initial"}, "potential")
    name = _need(block, "family", "potential")
    try:
        family = Family(name)
    except ValueError:
        raise ConfigParse(
            f"unknown family {name!r} (known: {[f.value for f in Family]})"
        ) from None
    spec = PotentialSpec(
        family=family,
        coeffs=tuple(block.get("coeffs", ())),
        angular_l=block.get("angular_l"),
        free_initial=block.get("free_initial"),
    )
    return validate_spec(spec)


def _parse_axes(raw: Any) -> tuple[ScanAxis, ...]:
    if not isinstance(raw, list) or not raw:
        raise ConfigParse("[scan] axes must be a non-empty array of tables")
    axes = []
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict):
            raise ConfigParse(f"axis #{i} must be a table with name/lo/hi/step")
        _reject_unknown(entry, {"name", "lo", "hi", "step"}, f"scan.axes[{i}]")
        axis = ScanAxis(
            name=str(_need(entry, "name", f"scan.axes[{i}]")),
            lo=float(_need(entry, "lo", f"scan.axes[{i}]")),
            hi=float(_need(entry, "hi", f"scan.axes[{i}]")),
            step=float(_need(entry, "step", f"scan.axes[{i}]")),
        )
        if axis.step <= 0 or axis.hi < axis.lo:
            raise ConfigParse(
                f"axis {axis.name!r}: need step > 0 and hi >= lo, got "
                f"lo={axis.lo} hi={axis.hi} step={axis.step}"
            )
        axes.append(axis)
    return tuple(axes)


def _matrix_kind(name: str) -> MatrixKind:
    try:
        return MatrixKind(name)
    except ValueError:
        raise ConfigParse(
            f"unknown matrix kind {name!r} (known: {[k.value for k in MatrixKind]})"
        ) from None


def _build_scan_config(config: dict, pot: ValidatedPotential, refine: bool) -> ScanConfig:
    block = config.get("scan")
    if not isinstance(block, dict):
        raise ConfigParse("config needs a [scan] block")
    _reject_unknown(block, {"kind", "depth", "tol", "axes", "max_refine_iters"}, "scan")
    return ScanConfig(
        potential=pot,
        matrix_kind=_matrix_kind(str(_need(block, "kind", "scan"))),
        depth=int(_need(block, "depth", "scan")),
        axes=_parse_axes(_need(block, "axes", "scan")),
        tol=float(block.get("tol", 1e-9)),
        refine=refine,
        max_refine_iters=int(block.get("max_refine_iters", 25)),
    )


def _solve_oracle(config: dict, pot: ValidatedPotential):
    block = config.get("oracle")
    if not isinstance(block, dict):
        raise ConfigParse("config needs an [oracle] block")
    _reject_unknown(block, {"lo", "hi", "r_max", "n_points", "n_levels"}, "oracle")
    n_points = int(_need(block, "n_points", "oracle"))
    n_levels = int(_need(block, "n_levels", "oracle"))
    if pot.domain == "line":
        for key in ("r_max",):
            if key in block:
                raise ConfigParse(f"[oracle] key {key!r} does not apply to a line domain")
        return solve_1d(pot, float(_need(block, "lo", "oracle")),
                        float(_need(block, "hi", "oracle")), n_points, n_levels)
    if pot.domain == "radial":
        for key in ("lo", "hi"):
            if key in block:
                raise ConfigParse(f"[oracle] key {key!r} does not apply to a radial domain")
        return solve_radial(pot, float(_need(block, "r_max", "oracle")), n_points, n_levels)
    for key in ("lo", "hi", "r_max"):
        if key in block:
            raise ConfigParse(f"[oracle] key {key!r} does not apply to a periodic domain")
    return solve_periodic(pot, n_points, n_levels)


def _json_bytes(obj: Any) -> bytes:
    return (json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n").encode()


def _write(out_dir: Path, name: str, data: bytes) -> None:
    try:
        (out_dir / name).write_bytes(data)
    except OSError as exc:
        raise Io(f"cannot write {out_dir / name}: {exc}") from exc


def _points_csv(region) -> bytes:
    names = [ax.name for ax in region.axes]
    lines = [",".join(names + ["min_eigenvalue", "feasible", "error"])]
    for p in region.points:
        cells = [repr(c) for c in p.coords]
        cells.append("" if p.min_eigenvalue is None else repr(p.min_eigenvalue))
        cells.append("1" if p.feasible else "0")
        cells.append(p.error)
        lines.append(",".join(cells))
    return ("\n".join(lines) + "\n").encode()


def _islands_json(region) -> bytes:
    islands = []
    for isl in region.islands:
        entry: dict[str, Any] = {
            "label": isl.label,
            "bounds": {name: list(b) for name, b in isl.bounds.items()},
            "multi_level": isl.multi_level,
            "n_points": len(isl.point_indices),
        }
        if isl.refined is not None:
            entry["refined"] = {name: list(b) for name, b in isl.refined.items()}
        islands.append(entry)
    return _json_bytes({"axes": [ax.name for ax in region.axes], "islands": islands})


def _svg_1d(region) -> str:
    ax = region.axes[0]
    span = max(ax.hi - ax.lo, ax.step)
    x_of = lambda v: 40.0 + 720.0 * (v - ax.lo) / span  # noqa: E731
    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" width="800" height="120" viewBox="0 0 800 120">',
        '<line x1="40" y1="80" x2="760" y2="80" stroke="black"/>',
        f'<text x="40" y="100" font-size="10">{ax.name}={ax.lo!r}</text>',
        f'<text x="700" y="100" font-size="10">{ax.name}={ax.hi!r}</text>',
    ]
    for isl in region.islands:
        lo, hi = isl.bounds[ax.name]
        x0, x1 = x_of(lo), x_of(hi)
        parts.append(
            f'<rect x="{x0:.2f}" y="60" width="{max(x1 - x0, 1.0):.2f}" height="20" '
            'fill="steelblue"/>'
        )
        parts.append(
            f'<text x="{x0:.2f}" y="52" font-size="10">{isl.label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _svg_2d(region) -> str:
    ax0, ax1 = region.axes[0], region.axes[1]
    span0 = max(ax0.hi - ax0.lo, ax0.step)
    span1 = max(ax1.hi - ax1.lo, ax1.step)
    x_of = lambda v: 40.0 + 720.0 * (v - ax0.lo) / span0  # noqa: E731
    y_of = lambda v: 560.0 - 520.0 * (v - ax1.lo) / span1  # noqa: E731
    pw = max(720.0 * ax0.step / span0, 1.0)
    ph = max(520.0 * ax1.step / span1, 1.0)
    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" width="800" height="600" viewBox="0 0 800 600">',
        '<rect x="40" y="40" width="720" height="520" fill="none" stroke="black"/>',
        f'<text x="380" y="585" font-size="10">{ax0.name}</text>',
        f'<text x="10" y="300" font-size="10">{ax1.name}</text>',
        f'<text x="40" y="575" font-size="10">{ax0.lo!r}..{ax0.hi!r}</text>',
        f'<text x="45" y="555" font-size="10">{ax1.lo!r}..{ax1.hi!r}</text>',
    ]
    for p in region.points:
        if p.feasible:
            parts.append(
                f'<rect x="{x_of(p.coords[0]) - pw / 2:.2f}" y="{y_of(p.coords[1]) - ph / 2:.2f}" '
                f'width="{pw:.2f}" height="{ph:.2f}" fill="steelblue"/>'
            )
    for isl in region.islands:
        b0, b1 = isl.bounds[ax0.name], isl.bounds[ax1.name]
        cx = x_of(0.5 * (b0[0] + b0[1]))
        cy = y_of(0.5 * (b1[0] + b1[1]))
        parts.append(f'<text x="{cx:.2f}" y="{cy - 6.0:.2f}" font-size="12">{isl.label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _region_svg(region) -> bytes:
    if len(region.axes) == 1:
        return _svg_1d(region).encode()
    if len(region.axes) == 2:
        return _svg_2d(region).encode()
    # 3+ axes have no plot; emit a stub so the artifact set is predictable
    return (
        '<svg xmlns="http://www.w3.org/2000/svg" width="800" height="40">'
        f"<text x=\"10\" y=\"25\">no plot for {len(region.axes)}-dimensional scans</text></svg>\n"
    ).encode()


def _run_scan_mode(config: dict, out_dir: Path, refine: bool) -> str:
    pot = _build_potential(config)
    cfg = _build_scan_config(config, pot, refine)
    region = run_scan(cfg)
    _write(out_dir, "points.csv", _points_csv(region))
    _write(out_dir, "islands.json", _islands_json(region))
    _write(out_dir, "region.svg", _region_svg(region))
    n_feasible = sum(1 for p in region.points if p.feasible)
    return (
        f"{len(region.points)} points, {n_feasible} feasible, "
        f"{len(region.islands)} islands"
    )


def _run_oracle_mode(config: dict, out_dir: Path) -> str:
    pot = _build_potential(config)
    sol = _solve_oracle(config, pot)
    payload = {
        "family": pot.family.value,
        "coeffs": list(pot.coeffs),
        "angular_l": pot.angular_l,
        "domain": pot.domain,
        "eigenvalues": [float(e) for e in sol.eigenvalues],
    }
    _write(out_dir, "eigenvalues.json", _json_bytes(payload))
    return f"{len(sol.eigenvalues)} levels, ground energy {float(sol.eigenvalues[0])!r}"


def _run_residual_mode(config: dict, out_dir: Path) -> str:
    pot = _build_potential(config)
    block = config.get("residual")
    if not isinstance(block, dict):
        raise ConfigParse("config needs a [residual] block")
    allowed = {"level", "base", "one_min", "one_max", "two_m_min", "two_m_max",
               "two_n_min", "two_n_max", "second_index"}
    _reject_unknown(block, allowed, "residual")
    level = int(block.get("level", 0))
    base_name = str(block.get("base", _DEFAULT_BASE[pot.family]))
    if base_name not in _BASE_KINDS:
        raise ConfigParse(f"unknown base {base_name!r} (known: {sorted(_BASE_KINDS)})")
    one_indices = ()
    if "one_min" in block or "one_max" in block:
        one_indices = range(int(_need(block, "one_min", "residual")),
                            int(_need(block, "one_max", "residual")) + 1)
    two_indices = ()
    if any(k in block for k in ("two_m_min", "two_m_max", "two_n_min", "two_n_max")):
        two_indices = [
            (m, n)
            for m in range(int(_need(block, "two_m_min", "residual")),
                           int(_need(block, "two_m_max", "residual")) + 1)
            for n in range(int(_need(block, "two_n_min", "residual")),
                           int(_need(block, "two_n_max", "residual")) + 1)
        ]
    if not one_indices and not two_indices:
        raise ConfigParse("[residual] needs one_min/one_max or two_*_min/two_*_max index ranges")
    sol = _solve_oracle(config, pot)
    table = moments_from_wavefunction(
        sol, level, _BASE_KINDS[base_name],
        one_indices=one_indices, two_indices=two_indices,
        second_index=str(block.get("second_index", "momentum")),
    )
    residuals = recursion_residual(pot, table, float(sol.eigenvalues[level]))
    instances = {
        name: {"abs": abs(v), "re": v.real, "im": v.imag}
        for name, v in residuals.items()
    }
    payload = {
        "family": pot.family.value,
        "level": level,
        "energy": float(sol.eigenvalues[level]),
        "count": len(instances),
        "max_abs": max((e["abs"] for e in instances.values()), default=0.0),
        "instances": instances,
    }
    _write(out_dir, "residuals.json", _json_bytes(payload))
    return f"{payload['count']} instances, max |residual| {payload['max_abs']:.3e}"


def _run_matrix_mode(config: dict, out_dir: Path) -> str:
    pot = _build_potential(config)
    block = config.get("matrix")
    if not isinstance(block, dict):
        raise ConfigParse("config needs a [matrix] block")
    _reject_unknown(block, {"kind", "depth", "tol", "values"}, "matrix")
    kind = _matrix_kind(str(_need(block, "kind", "matrix")))
    depth = int(_need(block, "depth", "matrix"))
    tol = float(block.get("tol", 1e-9))
    values = block.get("values")
    if not isinstance(values, dict):
        raise ConfigParse("[matrix] needs a values table of initial data, e.g. {E = 1.0}")
    init = initial_from_values(pot, {k: float(v) for k, v in values.items()})
    if kind in ONE_OP_KINDS:
        table = gen_one_var(pot, init, max_index=2 * depth)
    else:
        table = gen_two_var(pot, init, depth)
    matrix = build_matrix(table, kind, depth)
    verdict = is_feasible(matrix, tol)
    payload = {
        "kind": kind.value,
        "depth": depth,
        "dimension": matrix_dimension(kind, depth),
        "tol": tol,
        "min_eigenvalue": verdict.min_eigenvalue,
        "feasible": verdict.feasible,
        "entries_re": [[float(v.real) for v in row] for row in matrix.entries],
        "entries_im": [[float(v.imag) for v in row] for row in matrix.entries],
    }
    _write(out_dir, "matrix.json", _json_bytes(payload))
    return (
        f"{kind.value} depth {depth}: min eigenvalue {verdict.min_eigenvalue:.3e}, "
        f"feasible {verdict.feasible}"
    )


def _build_parser() -> argparse.ArgumentParser:
    codes = ", ".join(f"{code}={cls.__name__}" for cls, code in EXIT_CODES)
    parser = argparse.ArgumentParser(
        prog="bootstrap",
        description="Bound-state search by moment recursion and matrix positivity.",
        epilog=f"exit codes: 0=success, {codes} (15 covers any other engine error)",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="mode", required=True)
    descriptions = {
        "scan": "grid scan; writes points.csv, islands.json, region.svg",
        "refine": "grid scan plus island-boundary bisection; same artifacts",
        "oracle": "finite-difference eigenvalues; writes eigenvalues.json",
        "residual-check": "oracle moments through the recursion; writes residuals.json",
        "matrix-dump": "one positivity matrix at one point; writes matrix.json",
    }
    for mode, desc in descriptions.items():
        p = sub.add_parser(mode, help=desc)
        p.add_argument("--config", required=True, help="TOML config file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config key, dotted path (repeatable)")
        p.add_argument("--out", default=".", help="output directory (default: .)")
    return parser


def main(argv: list[str] | None = None) -> int:
    """Entry point; returns the exit code rather than raising."""
    args = _build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        config = _load_config(args.config, args.set)
        out_dir = Path(args.out)
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise Io(f"cannot create output directory {out_dir}: {exc}") from exc
        if args.mode == "scan":
            summary = _run_scan_mode(config, out_dir, refine=False)
        elif args.mode == "refine":
            summary = _run_scan_mode(config, out_dir, refine=True)
        elif args.mode == "oracle":
            summary = _run_oracle_mode(config, out_dir)
        elif args.mode == "residual-check":
            summary = _run_residual_mode(config, out_dir)
        else:
            summary = _run_matrix_mode(config, out_dir)
        manifest = {
            "config": config,
            "elapsed_seconds": time.perf_counter() - started,
            "mode": args.mode,
            "version": __version__,
        }
        _write(out_dir, "manifest.json", _json_bytes(manifest))
    except EngineError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return _exit_code(exc)
    print(f"{args.mode}: {summary} -> {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
