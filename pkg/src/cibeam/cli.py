"""Command-line interface: ``cibeam <command> [options]``.

Exit status is 0 on success, 1 for malformed flags, 2 for parameters outside
the admissible domain and 3 when a numerical procedure fails.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import __version__
from .divergence import DEFAULT_I0, divergence_report, theta_ee, theta_rms
from .errors import CibeamError, DomainError, DualNotConstructibleError, NumericalError
from .export import atomic_output, csv_text, dumps_json, pgm_bytes, write_text
from .modes import cib_field, expansion_coeffs, pupil_field, sample_grid
from .params import AT_INFINITY, ModeIndices, classify, dual, make_params
from .specfun import SeriesControl

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_NUMERIC = 0, 1, 2, 3

# Options whose values may start with '-' (e.g. "--p -2.5,0").
_VALUE_FLAGS = {"--lambda", "--z0", "--d0", "--q1", "--p", "--m", "--grid", "--i0",
                "--tol", "--max-terms", "--tail", "--terms", "--out", "--format", "--mmax"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _complex(text: str) -> complex:
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected RE,IM but got {text!r}")


def _q1(text: str):
    return AT_INFINITY if text.strip().lower() == "inf" else _complex(text)


def _grid(text: str):
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(f"expected NX,NY,EXTENT,Z but got {text!r}")
    try:
        nx, ny = int(parts[0]), int(parts[1])
        extent, z = float(parts[2]), float(parts[3])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NX,NY,EXTENT,Z but got {text!r}") from None
    if nx < 2 or ny < 2 or not extent > 0:
        raise argparse.ArgumentTypeError("grid needs NX, NY >= 2 and EXTENT > 0")
    return nx, ny, extent, z


def _build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--lambda", dest="wavelength", type=float, default=1.0,
                        help="wavelength (sets the length unit, default 1)")
    common.add_argument("--z0", type=float, default=math.pi,
                        help="confocal parameter (default pi, giving W0 = 1 for lambda = 1)")
    common.add_argument("--d0", type=float, default=0.0, help="waist location")
    common.add_argument("--i0", type=float, default=DEFAULT_I0,
                        help="encircled-energy fraction (default 1 - 1/e)")
    common.add_argument("--tol", type=float, default=1e-12, help="series relative tolerance")
    common.add_argument("--max-terms", type=int, default=10_000, help="series term cap")
    common.add_argument("--out", help="output path (default: standard output)")
    common.add_argument("--format", choices=("json", "csv", "pgm"), default="json")

    beam = _Parser(add_help=False)
    beam.add_argument("--q1", type=_q1, required=True, help='"RE,IM" or "inf"')
    beam.add_argument("--p", type=_complex, required=True, help='radial order "RE,IM"')
    beam.add_argument("--m", type=int, required=True, help="OAM index")

    grid = _Parser(add_help=False)
    grid.add_argument("--grid", type=_grid, required=True, help="NX,NY,EXTENT,Z")

    parser = _Parser(prog="cibeam", description="Circular beam fields and divergences.")
    parser.add_argument("--version", action="version", version=f"cibeam {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("validate", parents=[common, beam], help="classify a parameter set")
    sub.add_parser("field", parents=[common, beam, grid], help="sample the field on a grid")
    exp = sub.add_parser("expand", parents=[common, beam], help="LG expansion coefficients")
    exp.add_argument("--tail", type=float, default=None,
                     help="bound on discarded power (default 1e-24)")
    exp.add_argument("--terms", type=int, default=None, help="fixed truncation order N")
    sub.add_parser("divergence", parents=[common, beam], help="rms and encircled-energy divergence")
    fig1 = sub.add_parser("figure1", parents=[common], help="divergence versus |m|")
    fig1.add_argument("--mmax", type=int, default=10)
    sub.add_parser("figure2", parents=[common], help="divergence versus p for m = 2")
    sub.add_parser("pupil", parents=[common, beam, grid], help="sample the pupil-plane field")
    return parser


def _normalize_argv(argv):
    """Join value flags to their values so negative numbers are not read as flags."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def _beam(args):
    params = make_params(args.wavelength, args.z0, args.d0, args.q1)
    return params, ModeIndices(args.p, args.m)


def _echo(args) -> dict:
    out = {"version": __version__, "command": args.command, "lambda": args.wavelength,
           "z0": args.z0, "d0": args.d0}
    if hasattr(args, "q1"):
        out["q1"] = "inf" if args.q1 is AT_INFINITY else args.q1
        out["p"] = args.p
        out["m"] = args.m
    return out


def _control(args) -> SeriesControl:
    try:
        return SeriesControl(args.tol, args.max_terms)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit(args, text: str) -> None:
    if args.out:
        with atomic_output([args.out]) as (tmp,):
            write_text(tmp, text)
    else:
        sys.stdout.write(text)


def _report(args, payload: dict) -> None:
    if args.format == "pgm":
        raise UsageError(f"--format pgm is only available for field and pupil, not {args.command}")
    if args.format == "json":
        _emit(args, dumps_json(payload))
        return
    flat = {k: v for k, v in payload.items() if not isinstance(v, dict)}
    rows = [(k, _csv_value(v)) for k, v in flat.items() if k != "parameters"]
    _emit(args, csv_text(_echo(args), ["key", "value"], rows))


def _csv_value(v):
    if v is None:
        return ""
    if isinstance(v, complex):
        return f"{v.real:.16e};{v.imag:.16e}"
    if isinstance(v, (bool, str)):
        return str(v)
    if isinstance(v, int):
        return str(v)
    return f"{float(v):.16e}"


def cmd_validate(args) -> int:
    params, modes = _beam(args)
    cls = classify(params, modes)
    out = {"parameters": _echo(args), "tag": cls.tag.value, "valid": cls.valid,
           "canonical": cls.canonical, "detail": cls.detail or "",
           "xi": params.xi, "xi_abs": abs(params.xi)}
    try:
        dparams, dmodes = dual(params, modes)
        out["dual"] = {"q0": dparams.q0, "q1": dparams.q1, "p": dmodes.p, "m": dmodes.m}
    except DualNotConstructibleError as exc:
        out["dual"] = None
        out["dual_note"] = str(exc)
    _report(args, out)
    return EXIT_OK if cls.valid else EXIT_DOMAIN


def _grid_outputs(args, grid, what: str) -> None:
    values = grid.values
    header = _echo(args)
    header.update({"grid_nx": grid.nx, "grid_ny": grid.ny, "grid_extent": grid.extent,
                   "grid_z": grid.z, "field": what})
    if not args.out:
        raise UsageError(f"{args.command} requires --out")
    if args.format == "pgm":
        intensity = np.abs(values) ** 2
        peak = float(intensity.max())
        stem, ext = os.path.splitext(args.out)
        phase_path = f"{stem}_phase{ext or '.pgm'}"
        with atomic_output([args.out, phase_path]) as (t_int, t_phase):
            with open(t_int, "wb") as fh:
                fh.write(pgm_bytes(intensity, 0.0, peak))
            with open(t_phase, "wb") as fh:
                fh.write(pgm_bytes(np.angle(values), -math.pi, math.pi))
        return
    X, Y = np.meshgrid(grid.x, grid.y)
    if args.format == "csv":
        rows = zip(X.ravel(), Y.ravel(), values.real.ravel(), values.imag.ravel(),
                   (np.abs(values) ** 2).ravel(), np.angle(values).ravel())
        text = csv_text(header, ["x", "y", "re", "im", "intensity", "phase"], rows)
    else:
        text = dumps_json({"parameters": header, "layout": "row-major, row 0 at y = +extent",
                           "x": grid.x, "y": grid.y,
                           "values": np.stack([values.real, values.imag], axis=-1).reshape(-1, 2)})
    with atomic_output([args.out]) as (tmp,):
        write_text(tmp, text)


def cmd_field(args) -> int:
    params, modes = _beam(args)
    ctl = _control(args)
    nx, ny, extent, z = args.grid
    grid = sample_grid(lambda r, phi: cib_field(modes, params, r, phi, z, ctl), nx, ny, extent, z)
    _grid_outputs(args, grid, "cib")
    return EXIT_OK


def cmd_pupil(args) -> int:
    params, modes = _beam(args)
    nx, ny, extent, z = args.grid
    grid = sample_grid(lambda r, phi: pupil_field(modes, params, r, phi), nx, ny, extent, z)
    _grid_outputs(args, grid, "pupil")
    return EXIT_OK


def cmd_expand(args) -> int:
    params, modes = _beam(args)
    ctl = _control(args)
    if args.terms is not None and args.tail is not None:
        raise UsageError("give at most one of --terms and --tail")
    if args.terms is not None:
        ex = expansion_coeffs(modes, params, N=args.terms, ctl=ctl)
    else:
        ex = expansion_coeffs(modes, params, target_tail=args.tail or 1e-24, ctl=ctl)
    if args.format == "csv":
        header = _echo(args)
        header.update({"psi": ex.psi, "tail_bound": ex.tail_bound, "xi": ex.xi})
        rows = ((n, a.real, a.imag, abs(a) ** 2) for n, a in enumerate(ex.coeffs))
        _emit(args, csv_text(header, ["n", "re", "im", "abs_sq"], rows))
        return EXIT_OK
    _report(args, {"parameters": _echo(args), "m": ex.m, "p": ex.p, "xi": ex.xi,
                   "psi": ex.psi, "n_max": ex.N, "power": ex.power(),
                   "tail_bound": ex.tail_bound, "coeffs": list(ex.coeffs)})
    return EXIT_OK


def cmd_divergence(args) -> int:
    params, modes = _beam(args)
    ctl = _control(args)
    rep = divergence_report(modes, params, args.i0, ctl)
    out = {"parameters": _echo(args), "theta0": rep.theta0}
    if rep.theta_rms is None:
        out["theta_rms_note"] = "undefined: intensity second moment diverges"
        out["theta_rms_over_theta0_note"] = "undefined"
    out["theta_rms"] = rep.theta_rms
    out["theta_rms_over_theta0"] = None if rep.theta_rms is None else rep.theta_rms / rep.theta0
    out["theta_ee"] = rep.theta_ee
    out["theta_ee_over_theta0"] = rep.theta_ee / rep.theta0
    if rep.phi_factor is None:
        out["phi_factor_note"] = "undefined: Re(p) + |m| <= 0 on |xi| = 1"
    out["phi_factor"] = rep.phi_factor
    out["psi"] = rep.psi
    out["i0"] = rep.i0
    out["notes"] = rep.notes
    _report(args, out)
    return EXIT_OK


def _unit_xi_params(args):
    # q1 = Re(q0) = -d0 gives xi = 1.
    return make_params(args.wavelength, args.z0, args.d0, complex(-args.d0, 0.0))


def _ratio(value, theta0):
    return None if value is None else value / theta0


def figure1_rows(params, mmax: int, i0: float, ctl: SeriesControl):
    """Rows ``(m, rms(p=0), ee(p=0), rms(p=1-m), ee(p=1-m), ee(p=-m))`` in units of theta0."""
    t0 = params.theta0
    rows = []
    for m in range(mmax + 1):
        row = [m]
        for p, with_rms in ((0.0, True), (1.0 - m, True), (-float(m), False)):
            modes = ModeIndices(p, m)
            if with_rms:
                row.append(_ratio(theta_rms(modes, params, ctl), t0))
            row.append(theta_ee(modes, params, i0, ctl) / t0)
        rows.append(row)
    return rows


FIGURE2_P = np.round(np.arange(-19, 101) / 10.0, 10)


def figure2_rows(params, i0: float, ctl: SeriesControl, m: int = 2):
    """Rows ``(p, rms, ee)`` in units of theta0; rms is None where undefined."""
    t0 = params.theta0
    rows = []
    for p in FIGURE2_P:
        modes = ModeIndices(float(p), m)
        rows.append([float(p), _ratio(theta_rms(modes, params, ctl), t0),
                     theta_ee(modes, params, i0, ctl) / t0])
    return rows


def _table(args, columns, rows):
    if args.format == "pgm":
        raise UsageError(f"--format pgm is not available for {args.command}")
    header = _echo(args)
    header.update({"xi": 1.0, "units": "theta0", "i0": args.i0})
    if args.format == "csv":
        _emit(args, csv_text(header, columns, rows))
    else:
        _emit(args, dumps_json({"parameters": header, "columns": columns,
                                "rows": [list(r) for r in rows]}))


def cmd_figure1(args) -> int:
    if args.mmax < 0:
        raise UsageError("--mmax must be >= 0")
    rows = figure1_rows(_unit_xi_params(args), args.mmax, args.i0, _control(args))
    _table(args, ["m", "theta_rms_p0", "theta_ee_p0", "theta_rms_p1_minus_m",
                  "theta_ee_p1_minus_m", "theta_ee_p_minus_m"], rows)
    return EXIT_OK


def cmd_figure2(args) -> int:
    rows = figure2_rows(_unit_xi_params(args), args.i0, _control(args))
    _table(args, ["p", "theta_rms", "theta_ee"], rows)
    return EXIT_OK


_COMMANDS = {
    "validate": cmd_validate,
    "field": cmd_field,
    "expand": cmd_expand,
    "divergence": cmd_divergence,
    "figure1": cmd_figure1,
    "figure2": cmd_figure2,
    "pupil": cmd_pupil,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = _build_parser().parse_args(_normalize_argv(argv))
        if not 0 < args.i0 < 1:
            raise UsageError("--i0 must lie in (0, 1)")
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"cibeam: invalid input: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except NumericalError as exc:
        print(f"cibeam: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except CibeamError as exc:
        print(f"cibeam: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
