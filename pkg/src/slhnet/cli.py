"""Command-line interface.

Exit codes: 0 success, 2 invalid model or input, 3 numerical failure.
Errors are reported on stderr as a single ``ERRCLASS: message`` line.
"""
import argparse
import sys

import numpy as np

from . import io
from .dynamics import DensityMatrix, integrate_master
from .errors import ModelError, NumericalError, ParityError, ParseError, SLHError
from .fermi import validate_fermi
from .network import concatenate, reduce_network, series
from .ops import DEFAULT_TOL
from .slh import ito_to_stratonovich, stratonovich_to_ito
from .wire import WireState, gaussian_packet, propagate_wavepacket, transfer_function

EXIT_OK, EXIT_MODEL, EXIT_NUMERICAL = 0, 2, 3


def _load(path, tol, *kinds):
    mf = io.parse_model(path, tol)
    if kinds and mf.kind not in kinds:
        raise ParseError(f"{path}: expected a {' or '.join(kinds)} model, got {mf.kind}")
    return mf.model


def _emit(text, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_triple(G, args):
    if args.format == "csv":
        _emit(io.triple_csv(G), args.out)
    else:
        _emit(io.dump_model("slh", io.encode_triple(G)), args.out)


def cmd_validate(args):
    mf = io.parse_model(args.model, args.tol)
    print(f"ok {mf.kind}")


def cmd_ito(args):
    C = _load(args.model, args.tol, "stratonovich")
    _emit_triple(stratonovich_to_ito(C), args)


def cmd_stratonovich(args):
    G = _load(args.model, args.tol, "slh")
    C = ito_to_stratonovich(G)
    if args.format == "csv":
        raise ParseError("stratonovich output is only available as json")
    _emit(io.dump_model("stratonovich", io.encode_stratonovich(C)), args.out)


def cmd_series(args):
    G2 = _load(args.second, args.tol, "slh")
    G1 = _load(args.first, args.tol, "slh")
    _emit_triple(series(G2, G1, shared=args.shared), args)


def cmd_concat(args):
    parts = [_load(p, args.tol, "slh") for p in args.models]
    _emit_triple(concatenate(*parts, shared=args.shared), args)


def cmd_reduce(args):
    spec = _load(args.model, args.tol, "network")
    G, trace = reduce_network(spec)
    _emit_triple(G, args)
    if args.trace:
        lines = ["step,source,target,cond,channels"]
        for k, st in enumerate(trace.steps):
            (sc, sp), (tc, tp) = st.edge
            lines.append(f"{k},{sc}.out[{sp}],{tc}.in[{tp}],{io.fmt(st.cond)},{st.channels}")
        _emit("\n".join(lines) + "\n", args.trace)


def _load_state(path, dim):
    data = io.load_json(path)
    if "rho" in data:
        rho = io.decode_matrix(data["rho"], "rho", (dim, dim))
        return DensityMatrix(rho)
    if "psi" in data:
        psi = io.decode_matrix(data["psi"], "psi", (dim,))
        return DensityMatrix.pure(psi)
    raise ParseError(f"{path}: expected a 'rho' or 'psi' field")


def _load_observables(path, dim):
    data = io.load_json(path)
    obs = data.get("observables") if isinstance(data, dict) else None
    if not isinstance(obs, dict):
        raise ParseError(f"{path}: expected an 'observables' object")
    return {name: io.decode_matrix(m, f"observables.{name}", (dim, dim))
            for name, m in obs.items()}


def cmd_evolve(args):
    G = _load(args.model, args.tol, "slh")
    rho0 = _load_state(args.rho0, G.dim)
    obs = _load_observables(args.observables, G.dim) if args.observables else {}
    traj = integrate_master(G, rho0, args.t_end, args.dt, obs, every=args.every)
    _emit(io.trajectory_csv(traj, list(obs)), args.out)


def cmd_sweep(args):
    P = _load(args.model, args.tol, "linear_passive")
    if args.omega_steps < 1:
        raise ParseError("--omega-steps must be positive")
    grid = np.linspace(args.omega_min, args.omega_max, args.omega_steps)
    _emit(io.sweep_csv([transfer_function(P, w) for w in grid]), args.out)


def cmd_wire(args):
    state = WireState.from_function(
        lambda x: gaussian_packet(x, args.center, args.width), args.x_max, args.h,
        args.epsilon)
    times = sorted(float(t) for t in args.times.split(",")) if args.times else [0.0]
    snaps, t_prev = [], 0.0
    for t in times:
        state = propagate_wavepacket(state, t - t_prev)
        t_prev = t
        snaps.append(np.abs(state.psi))
    rows = [",".join(["x"] + [f"t={io.fmt(t)}" for t in times])]
    for k, x in enumerate(state.x):
        rows.append(",".join([io.fmt(x)] + [io.fmt(s[k]) for s in snaps]))
    _emit("\n".join(rows) + "\n", args.out)


def cmd_parity(args):
    G = _load(args.model, args.tol, "fermi")
    diag = validate_fermi(G, args.tol)
    _emit(diag.table() + "\n", args.out)
    if not diag.passed:
        bad = ", ".join(c.coefficient for c in diag.failures())
        raise ParityError(f"parity table violated by {bad}")


def build_parser():
    p = argparse.ArgumentParser(prog="slhnet", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL,
                        help="validation tolerance (default %(default)g)")
    common.add_argument("--out", help="output path (default stdout)")
    triple_out = argparse.ArgumentParser(add_help=False)
    triple_out.add_argument("--format", choices=("json", "csv"), default="json")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", parents=[common], help="parse and validate a model file")
    s.add_argument("model")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("ito", parents=[common, triple_out],
                       help="Stratonovich coefficients -> SLH triple")
    s.add_argument("model")
    s.set_defaults(func=cmd_ito)

    s = sub.add_parser("stratonovich", parents=[common, triple_out],
                       help="SLH triple -> Stratonovich coefficients")
    s.add_argument("model")
    s.set_defaults(func=cmd_stratonovich)

    s = sub.add_parser("series", parents=[common, triple_out],
                       help="series product SECOND <| FIRST (FIRST's output feeds SECOND)")
    s.add_argument("second")
    s.add_argument("first")
    s.add_argument("--shared", action="store_true",
                   help="components act on one common system space")
    s.set_defaults(func=cmd_series)

    s = sub.add_parser("concat", parents=[common, triple_out], help="concatenate components")
    s.add_argument("models", nargs="+")
    s.add_argument("--shared", action="store_true")
    s.set_defaults(func=cmd_concat)

    s = sub.add_parser("reduce", parents=[common, triple_out],
                       help="reduce a network file to one SLH triple")
    s.add_argument("model")
    s.add_argument("--trace", help="write the elimination trace CSV here")
    s.set_defaults(func=cmd_reduce)

    s = sub.add_parser("evolve", parents=[common], help="integrate the master equation")
    s.add_argument("model")
    s.add_argument("--rho0", required=True, help="JSON file with 'rho' or 'psi'")
    s.add_argument("--observables", help="JSON file with an 'observables' object")
    s.add_argument("--t-end", type=float, required=True)
    s.add_argument("--dt", type=float, required=True)
    s.add_argument("--every", type=int, default=1, help="store every N-th step")
    s.set_defaults(func=cmd_evolve)

    s = sub.add_parser("sweep", parents=[common], help="frequency response of a linear component")
    s.add_argument("model")
    s.add_argument("--omega-min", type=float, default=-10.0)
    s.add_argument("--omega-max", type=float, default=10.0)
    s.add_argument("--omega-steps", type=int, default=401)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("wire", parents=[common], help="single quantum crossing a delta kick")
    s.add_argument("--epsilon", type=float, default=0.0)
    s.add_argument("--x-max", type=float, default=20.0)
    s.add_argument("--h", type=float, default=0.05)
    s.add_argument("--center", type=float, default=5.0)
    s.add_argument("--width", type=float, default=0.5)
    s.add_argument("--times", default="0,10", help="comma-separated snapshot times")
    s.set_defaults(func=cmd_wire)

    s = sub.add_parser("parity", parents=[common], help="check a Fermi component's parity table")
    s.add_argument("model")
    s.set_defaults(func=cmd_parity)
    return p


def _fail(exc, code):
    msg = " ".join(str(exc).split())
    errclass = getattr(exc, "errclass", type(exc).__name__.upper())
    print(f"{errclass}: {msg}", file=sys.stderr)
    return code


def run(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except NumericalError as exc:
        return _fail(exc, EXIT_NUMERICAL)
    except (ModelError, SLHError) as exc:
        return _fail(exc, EXIT_MODEL)
    except (ValueError, IndexError) as exc:
        exc.errclass = "USAGE"
        return _fail(exc, EXIT_MODEL)
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
