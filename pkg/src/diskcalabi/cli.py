"""Command-line front end.

Subcommands: calabi, orbits, check-theorem, suspend, nk, spectrum,
filtration, bounds.  Inputs are JSON documents (map specifications or
parameter objects); outputs are CSV or JSON with floats rendered at 15
significant digits, so identical inputs produce byte-identical files.

Exit codes: 0 success, 1 malformed input, 2 precondition/domain error,
3 numeric or consistency failure, 4 theorem check inconclusive.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import echcomb, suspension
from .diskmap import calabi
from .errors import (
    BudgetError,
    ConsistencyError,
    DomainError,
    InvalidInputError,
    InvalidProfileError,
    NumericError,
    PreconditionError,
    ResonanceError,
)
from .mapspec import load_mapspec, load_params
from .orbitscan import check_mean_action_theorem, find_periodic_orbits

EXIT_OK = 0
EXIT_BAD_INPUT = 1
EXIT_PRECONDITION = 2
EXIT_NUMERIC = 3
EXIT_INCONCLUSIVE = 4


def fmt(x) -> str:
    """Fixed 15-significant-digit rendering used for all emitted floats."""
    return f"{float(x):.15g}"


def _quantize(obj):
    if isinstance(obj, float):
        return float(fmt(obj))
    if isinstance(obj, dict):
        return {k: _quantize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_quantize(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(fmt(float(obj)))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def _emit_text(text: str, output):
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)


def _emit_json(obj, output):
    _emit_text(json.dumps(_quantize(obj), indent=2) + "\n", output)


def _emit_csv(header, rows, output):
    lines = [",".join(header)]
    lines += [",".join(row) for row in rows]
    _emit_text("\n".join(lines) + "\n", output)


def _plot_path(args, suffix: str) -> str | None:
    if not getattr(args, "plot", False):
        return None
    if args.output is None:
        raise InvalidInputError("--plot needs -o/--output to derive the figure path")
    return str(Path(args.output).with_suffix("")) + f"_{suffix}.svg"


def _require(params: dict, args, names):
    out = []
    for name in names:
        flag = getattr(args, name, None)
        if flag is not None:
            out.append(flag)
        elif name in params:
            out.append(params[name])
        else:
            raise InvalidInputError(f"missing parameter {name!r} (flag or input file)")
    return out


# ---------------------------------------------------------------------------
# subcommand implementations


def _cmd_calabi(args) -> int:
    m = load_mapspec(args.input)
    res = calabi(m, quad_tol=args.quad_tol, method=args.method)
    _emit_json(
        {
            "command": "calabi",
            "theta0": m.theta0,
            "value": res.value,
            "error_estimate": res.quad_error_estimate,
            "method": res.method,
        },
        args.output,
    )
    fig = _plot_path(args, "action")
    if fig is not None and m.is_radial:
        from .diskmap import ActionProfile
        from .plots import save_radial_action

        save_radial_action(ActionProfile(m, quad_tol=args.quad_tol), res.value, fig)
    return EXIT_OK


def _orbit_rows(scan):
    rows = []
    for o in scan:
        pts = ";".join(f"{fmt(x)}:{fmt(y)}" for x, y in o.points)
        rows.append([str(o.period), pts, fmt(o.total_action),
                     fmt(o.mean_action), fmt(o.residual)])
    return rows


def _cmd_orbits(args) -> int:
    m = load_mapspec(args.input)
    scan = find_periodic_orbits(
        m, args.d_max, grid_n=args.grid_n, newton_tol=args.newton_tol,
        dedupe_eps=args.dedupe_eps, quad_tol=args.quad_tol,
    )
    _emit_csv(
        ["period", "points", "total_action", "mean_action", "residual"],
        _orbit_rows(scan), args.output,
    )
    fig = _plot_path(args, "orbits")
    if fig is not None:
        from .plots import save_orbits

        save_orbits(list(scan), fig)
    return EXIT_OK


def _cmd_check_theorem(args) -> int:
    m = load_mapspec(args.input)
    verdict = check_mean_action_theorem(
        m, d_max=args.d_max, grid_n=args.grid_n, tol=args.tol,
        quad_tol=args.quad_tol, newton_tol=args.newton_tol,
        dedupe_eps=args.dedupe_eps,
    )
    _emit_json(verdict.to_dict(), args.output)
    fig = _plot_path(args, "action")
    if fig is not None and m.is_radial:
        from .diskmap import ActionProfile
        from .plots import save_radial_action

        save_radial_action(ActionProfile(m, quad_tol=args.quad_tol),
                           verdict.calabi, fig)
    return EXIT_INCONCLUSIVE if verdict.inconclusive else EXIT_OK


def _cmd_suspend(args) -> int:
    m = load_mapspec(args.input)
    m.validate_collar()
    susp = suspension.build_suspension(m, quad_tol=args.quad_tol)
    contact = suspension.verify_contact(susp, n_samples=args.samples)
    vol = suspension.contact_volume(susp, quad_tol=args.quad_tol)
    cal = calabi(m, quad_tol=args.quad_tol).value
    pts = np.asarray(
        [[0.0, 0.0], [0.4, 0.1], [-0.3, 0.5], [0.7, -0.2], [0.0, -0.8]]
    )
    defect = 0.0
    for p in pts:
        rt = suspension.return_time(susp, p, quad_tol=args.quad_tol)
        defect = max(defect, abs(rt - float(susp.action(p))))
    _emit_json(
        {
            "min_F": contact.min_F,
            "volume": vol,
            "calabi": cal,
            "max_return_time_defect": defect,
        },
        args.output,
    )
    fig = _plot_path(args, "suspension")
    if fig is not None:
        if m.is_radial:
            from .plots import save_suspension_heat

            save_suspension_heat(susp, fig)
        else:
            print("note: suspension heat map is emitted only for radially "
                  "symmetric maps", file=sys.stderr)
    return EXIT_OK


def _cmd_nk(args) -> int:
    params = load_params(args.input) if args.input else {}
    a, b, k_max = _require(params, args, ["a", "b", "k_max"])
    values, ms, ns = echcomb.capacity_sequence(float(a), float(b), int(k_max))
    rows = [
        [str(k), fmt(values[k]), str(int(ms[k])), str(int(ns[k]))]
        for k in range(len(values))
    ]
    _emit_csv(["k", "N_k", "m", "n"], rows, args.output)
    return EXIT_OK


def _cmd_spectrum(args) -> int:
    params = load_params(args.input) if args.input else {}
    a, b, k_max = _require(params, args, ["a", "b", "k_max"])
    table = echcomb.ellipsoid_spectrum(float(a), float(b), int(k_max),
                                       eps_res=args.eps_res)
    ratio = table.ratio()
    rows = []
    for k in range(len(table.values)):
        rows.append([
            str(k), fmt(table.values[k]), str(int(table.ms[k])),
            str(int(table.ns[k])), str(int(table.gradings[k])),
            "" if k == 0 else fmt(ratio[k]),
        ])
    _emit_csv(["k", "N_k", "m", "n", "grading", "ck2_over_2k"], rows, args.output)
    fig = _plot_path(args, "spectrum")
    if fig is not None:
        from .plots import save_spectrum

        ks = np.arange(1, len(table.values))
        save_spectrum(ks, ratio[1:], float(a) * float(b), fig)
    return EXIT_OK


def _cmd_filtration(args) -> int:
    params = load_params(args.input) if args.input else {}
    if "a" in params or args.a is not None:
        a, b, d_max, m_max = _require(params, args, ["a", "b", "d_max", "m_max"])
        rows = []
        for d in range(int(d_max) + 1):
            for mm in range(int(m_max) + 1):
                val = echcomb.ellipsoid_filtration(float(a), float(b), d, mm)
                action = float(a) * d + float(b) * mm
                rows.append([str(d), str(mm), fmt(val), fmt(action)])
        _emit_csv(["d", "m", "filtration", "action"], rows, args.output)
        return EXIT_OK
    theta0, = _require(params, args, ["theta0"])
    entries = params.get("orbits")
    if entries is None:
        raise InvalidInputError("filtration input needs 'orbits': [[m, linking], ...]")
    rows = []
    for m_mult, linking in entries:
        q = echcomb.FiltrationQuery(float(theta0), int(m_mult), int(linking))
        rows.append([str(int(m_mult)), str(int(linking)),
                     fmt(echcomb.knot_filtration(q))])
    _emit_csv(["m", "linking", "filtration"], rows, args.output)
    return EXIT_OK


def _cmd_bounds(args) -> int:
    params = load_params(args.input) if args.input else {}
    theta0, volume, eps = _require(params, args, ["theta0", "volume", "eps"])
    theta0, volume, eps = float(theta0), float(volume), float(eps)
    k_values = params.get("k_values")
    if args.k_values:
        k_values = [int(k) for k in args.k_values.split(",")]
    if not k_values:
        raise InvalidInputError("bounds input needs 'k_values' (or --k-values)")
    c = params.get("c", args.c)
    if c is None:
        scan_k = int(params.get("c_scan_kmax", 20000))
        c = echcomb.capacity_lower_bound(1.0, 1.0 / theta0, scan_k).c_witness
        c_source = f"scan(k<={scan_k})"
    else:
        c = float(c)
        c_source = "given"
    k_min = echcomb.min_admissible_k(theta0, volume, eps, c)
    limit = echcomb.mean_action_bound_limit(theta0, volume, eps)
    entries = []
    for k in k_values:
        entries.append({
            "k": int(k),
            "bound": echcomb.mean_action_bound(theta0, volume, eps, int(k), c),
        })
    _emit_json(
        {
            "theta0": theta0,
            "volume": volume,
            "eps": eps,
            "c": c,
            "c_source": c_source,
            "k_min": k_min,
            "limit": limit,
            "entries": entries,
        },
        args.output,
    )
    fig = _plot_path(args, "bounds")
    if fig is not None:
        from .plots import save_bounds

        save_bounds([e["k"] for e in entries], [e["bound"] for e in entries],
                    limit, fig)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diskcalabi",
        description="Calabi invariant, periodic-orbit mean actions, contact "
                    "suspensions, and ellipsoid spectra for area-preserving "
                    "disk maps.  Angles are in turns.",
        epilog="exit codes: 0 ok, 1 malformed input, 2 precondition error, "
               "3 numeric error, 4 inconclusive theorem verdict",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input, input_help):
        if needs_input:
            p.add_argument("input", help=input_help)
        else:
            p.add_argument("input", nargs="?", default=None, help=input_help)
        p.add_argument("-o", "--output", default=None,
                       help="output file (stdout when omitted)")
        p.add_argument("--quad-tol", type=float, default=1e-9)
        p.add_argument("--plot", action="store_true",
                       help="emit SVG figures next to the output file")

    p = sub.add_parser("calabi", help="Calabi invariant of a map")
    common(p, True, "map specification JSON")
    p.add_argument("--method", choices=["auto", "polar", "2d"], default="auto")
    p.set_defaults(func=_cmd_calabi)

    p = sub.add_parser("orbits", help="scan for periodic orbits")
    common(p, True, "map specification JSON")
    p.add_argument("--d-max", type=int, default=8)
    p.add_argument("--grid-n", type=int, default=16)
    p.add_argument("--newton-tol", type=float, default=1e-10)
    p.add_argument("--dedupe-eps", type=float, default=1e-7)
    p.set_defaults(func=_cmd_orbits)

    p = sub.add_parser("check-theorem",
                       help="compare min mean action against the Calabi invariant")
    common(p, True, "map specification JSON")
    p.add_argument("--d-max", type=int, default=8)
    p.add_argument("--grid-n", type=int, default=16)
    p.add_argument("--newton-tol", type=float, default=1e-10)
    p.add_argument("--dedupe-eps", type=float, default=1e-7)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=_cmd_check_theorem)

    p = sub.add_parser("suspend", help="suspension report for a map")
    common(p, True, "map specification JSON")
    p.add_argument("--samples", type=int, default=2048)
    p.set_defaults(func=_cmd_suspend)

    p = sub.add_parser("nk", help="capacity sequence N_k(a, b)")
    common(p, False, "parameter JSON with a, b, k_max")
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--b", type=float, default=None)
    p.add_argument("--k-max", type=int, default=None, dest="k_max")
    p.set_defaults(func=_cmd_nk)

    p = sub.add_parser("spectrum",
                       help="ellipsoid spectrum with generators and gradings")
    common(p, False, "parameter JSON with a, b, k_max")
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--b", type=float, default=None)
    p.add_argument("--k-max", type=int, default=None, dest="k_max")
    p.add_argument("--eps-res", type=float, default=1e-9)
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("filtration", help="knot filtration values")
    common(p, False, "parameter JSON (theta0+orbits, or a,b,d_max,m_max)")
    p.add_argument("--theta0", type=float, default=None)
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--b", type=float, default=None)
    p.add_argument("--d-max", type=int, default=None, dest="d_max")
    p.add_argument("--m-max", type=int, default=None, dest="m_max")
    p.set_defaults(func=_cmd_filtration)

    p = sub.add_parser("bounds", help="finite-index mean-action bounds")
    common(p, False, "parameter JSON with theta0, volume, eps, k_values")
    p.add_argument("--theta0", type=float, default=None)
    p.add_argument("--volume", type=float, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--k-values", type=str, default=None, dest="k_values",
                   help="comma-separated k list")
    p.set_defaults(func=_cmd_bounds)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except (DomainError, PreconditionError, ResonanceError,
            InvalidProfileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (NumericError, ConsistencyError, BudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
