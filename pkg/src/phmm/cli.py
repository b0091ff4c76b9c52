"""Command-line interface.

Every subcommand reads JSON documents (see :mod:`phmm.io`) and writes
deterministic JSON or CSV.  Failures are reported as a JSON object on stderr
with a nonzero exit status: 1 when a verification fails, 2 for errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import io
from .errors import PhmmError
from .moments import moments_finite, moments_markov
from .reduction import (
    Reduction,
    family_left,
    family_right,
    ph_gain,
    reduce_descriptor_markov,
    reduce_ph_finite,
    reduce_ph_krylov,
    reduce_ph_markov,
)
from .simulation import simulate_left, simulate_right
from .systems import (
    DescriptorModel,
    GeneratorLeft,
    GeneratorRight,
    PortHamiltonianSystem,
    ladder_system,
    smib_system,
    transfer_eval,
)
from .verification import (
    default_tolerance,
    passivity_check,
    passivity_data,
    verify_certificate,
    verify_finite_match,
    verify_markov_match,
    verify_moments,
)

EXIT_FAIL = 1
EXIT_ERROR = 2

METHODS = ("sigma-g", "sigma-h", "ph-finite", "ph-markov", "descriptor", "ph-krylov")


class CliError(Exception):
    """Invalid combination of command-line options."""


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _complexes(text: str) -> list[complex]:
    return [complex(v.strip().replace("i", "j")) for v in text.split(",") if v.strip()]


def _load(path: str):
    return io.load_document(path)


def _load_matrix(path: str) -> np.ndarray:
    return io.parse_matrix(Path(path).read_text(encoding="utf-8"))


def _need(args, name: str):
    val = getattr(args, name)
    if val is None:
        raise CliError(f"--{name.replace('_', '-')} is required here")
    return val


def _generator(args):
    gen = _load(_need(args, "generator"))
    if not isinstance(gen, (GeneratorRight, GeneratorLeft)):
        raise CliError("--generator must be a generator_right or generator_left document")
    side = "right" if isinstance(gen, GeneratorRight) else "left"
    if getattr(args, "side", None) not in (None, side):
        raise CliError(f"--side {args.side} does not match a {side} generator")
    return gen


def _write_out(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        io.atomic_write_text(path, text)


# -- subcommands ---------------------------------------------------------------


def cmd_moments(args) -> int:
    system, gen = _load(args.system), _generator(args)
    variant = args.variant or "finite"
    if variant == "finite":
        mv, sol = moments_finite(system, gen)
    else:
        mv, sol = moments_markov(system, gen, variant)
    out = {"side": mv.side, "kind": mv.kind, "points": mv.points, "moments": mv.matrix,
           "residual": sol.residual()}
    sys.stdout.write(io.dumps(out) + "\n")
    return 0


def _reduce(args) -> Reduction:
    system = _load(args.system)
    method = args.method
    if method == "ph-krylov":
        pts = _complexes(_need(args, "points"))
        tangents = _load_matrix(args.tangents) if args.tangents else None
        return reduce_ph_krylov(system, pts, tangents)
    gen = _generator(args)
    if method == "ph-finite":
        return reduce_ph_finite(system, gen)
    if method == "ph-markov":
        return reduce_ph_markov(system, gen, args.variant or ("pi" if isinstance(gen, GeneratorRight) else "upsilon"))
    if method == "sigma-g":
        if not isinstance(gen, GeneratorRight):
            raise CliError("sigma-g needs a right generator")
        fam = family_right(system, gen)
        gain = _load_matrix(args.gain) if args.gain else _default_gain(system, gen)
        return fam.reduction(gain)
    if method == "sigma-h":
        if not isinstance(gen, GeneratorLeft):
            raise CliError("sigma-h needs a left generator")
        fam = family_left(system, gen)
        gain = _load_matrix(args.gain) if args.gain else _default_gain(system, gen)
        return fam.reduction(gain)
    if method == "descriptor":
        try:
            variant = int(args.variant or 1)
        except ValueError as exc:
            raise CliError("descriptor variants are 1, 2, 3 or 4") from exc
        return reduce_descriptor_markov(system, gen, variant, _load_matrix(_need(args, "gain")))
    raise CliError(f"unknown method {method!r}")


def _default_gain(system, gen) -> np.ndarray:
    if not isinstance(system, PortHamiltonianSystem):
        raise CliError("--gain is required unless the system is port-Hamiltonian")
    return ph_gain(system, gen)


def _cert_path(out: str, cert: str | None) -> str:
    if cert:
        return cert
    p = Path(out)
    stem = p.name[:-5] if p.name.endswith(".json") else p.name
    return str(p.with_name(stem + ".cert.json"))


def cmd_reduce(args) -> int:
    red = _reduce(args)
    cert_path = _cert_path(args.out, args.certificate)
    io.save_document(red.model, args.out, name=f"reduced-{args.method}")
    io.save_document(red.certificate, cert_path, name=f"certificate-{args.method}")
    summary = {"model": args.out, "certificate": cert_path, "certificate_kind": red.certificate.kind,
               "order": int(red.model.n)}
    sys.stdout.write(io.dumps(summary) + "\n")
    return 0


def cmd_verify(args) -> int:
    tol = default_tolerance()
    mode = args.mode
    original = _load(args.original) if args.original else None
    reduced = _load(args.reduced) if args.reduced else None
    if mode == "finite":
        if original is None or reduced is None:
            raise CliError("finite mode needs --original and --reduced")
        if args.points:
            tangents = _load_matrix(args.tangents) if args.tangents else None
            side = args.side or "right"
            report = verify_finite_match(original, reduced, _complexes(args.points), tangents, side, tol=tol)
        else:
            report = verify_moments(original, reduced, _generator(args), tol=tol)
    elif mode == "markov":
        if original is None or reduced is None:
            raise CliError("markov mode needs --original and --reduced")
        report = verify_markov_match(original, reduced, _need(args, "count"), tol=tol)
    elif mode == "certificate":
        if reduced is None:
            raise CliError("certificate mode needs --reduced")
        cert = _load(_need(args, "certificate"))
        gen = _generator(args) if args.generator else None
        report = verify_certificate(reduced, cert, gen=gen, original=original)
    elif mode == "passivity":
        if args.generator:
            if original is None:
                raise CliError("family passivity needs --original")
            data = passivity_data(original, _generator(args))
            report = passivity_check(data, _load_matrix(_need(args, "storage")), form=args.form)
        else:
            target = reduced if reduced is not None else original
            if target is None:
                raise CliError("passivity mode needs a system")
            if args.storage:
                P = _load_matrix(args.storage)
            elif isinstance(target, PortHamiltonianSystem):
                P = target.Q
            else:
                raise CliError("--storage is required for a non port-Hamiltonian system")
            report = passivity_check(target, P)
    else:
        raise CliError(f"unknown mode {mode!r}")
    out = report.to_dict()
    out["mode"] = mode
    sys.stdout.write(io.dumps(out) + "\n")
    return 0 if report else EXIT_FAIL


def cmd_simulate(args) -> int:
    system, gen = _load(args.system), _generator(args)
    if isinstance(gen, GeneratorRight):
        w0 = _floats(args.w0) if args.w0 else np.eye(1, gen.nu)[0][::-1]
        res = simulate_right(system, gen, w0, args.horizon, args.dt, form=args.form or "standard")
    else:
        res = simulate_left(system, gen, args.input, args.horizon, args.dt, form=args.form or "finite")
    _write_out(args.out, res.to_csv())
    summary = {"output": res.output_name, "tail_residual": res.tail_residual,
               "relative_tail_residual": res.relative_tail_residual, "transient_ok": res.transient_ok}
    # keep stdout clean when the CSV goes there
    stream = sys.stderr if args.out in (None, "-") else sys.stdout
    stream.write(io.dumps(summary) + "\n")
    return 0


def bode_csv(system, wmin: float, wmax: float, points: int) -> str:
    """Magnitude (dB) and unwrapped phase (degrees) on a log grid."""
    if not (0 < wmin < wmax) or points < 2:
        raise CliError("need 0 < wmin < wmax and at least two points")
    w = np.logspace(np.log10(wmin), np.log10(wmax), points)
    K = np.array([transfer_eval(system, 1j * wk) for wk in w])
    p, m = K.shape[1:]
    mag = 20.0 * np.log10(np.maximum(np.abs(K), np.finfo(float).tiny))
    phase = np.degrees(np.unwrap(np.angle(K), axis=0))
    head = ["omega"]
    cols = [w]
    for i in range(p):
        for j in range(m):
            head += [f"mag_db_{i + 1}{j + 1}", f"phase_deg_{i + 1}{j + 1}"]
            cols += [mag[:, i, j], phase[:, i, j]]
    data = np.column_stack(cols)
    lines = [",".join(head)] + [",".join(io.format_number(v) for v in row) for row in data]
    return "\n".join(lines) + "\n"


def cmd_bode(args) -> int:
    _write_out(args.out, bode_csv(_load(args.system), args.wmin, args.wmax, args.points))
    return 0


def cmd_example(args) -> int:
    if args.name == "ladder":
        kw = {}
        for key in ("r", "c", "l", "q"):
            val = getattr(args, key)
            if val:
                kw[key] = tuple(_floats(val))
        obj = ladder_system(**kw)
    else:
        obj = smib_system(args.delta) if args.delta is not None else smib_system()
    _write_out(args.out, io.write_document(obj, name=args.name))
    return 0


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="phmm", description="Moment matching for port-Hamiltonian systems.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("moments", help="moments at a generator spectrum")
    p.add_argument("--system", required=True)
    p.add_argument("--generator", required=True)
    p.add_argument("--side", choices=("right", "left"))
    p.add_argument("--variant", choices=("finite", "pi", "pi_bar", "pi_tilde", "upsilon", "upsilon_hat"))
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("reduce", help="build a reduced model and its certificate")
    p.add_argument("--system", required=True)
    p.add_argument("--generator")
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--variant")
    p.add_argument("--gain", help="JSON matrix for G, H or the descriptor output matrix")
    p.add_argument("--points", help="comma-separated points, e.g. 0.5,1+2j,1-2j")
    p.add_argument("--tangents", help="JSON matrix, one tangent per row")
    p.add_argument("--out", required=True)
    p.add_argument("--certificate", help="certificate path (default: <out>.cert.json)")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("verify", help="check a reduced model")
    p.add_argument("--original")
    p.add_argument("--reduced")
    p.add_argument("--mode", required=True, choices=("finite", "markov", "certificate", "passivity"))
    p.add_argument("--generator")
    p.add_argument("--side", choices=("right", "left"))
    p.add_argument("--points")
    p.add_argument("--tangents")
    p.add_argument("--count", type=int)
    p.add_argument("--certificate")
    p.add_argument("--storage", help="JSON matrix P for the passivity check")
    p.add_argument("--form", choices=("as_printed", "symmetric"), default="as_printed")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="time-domain interconnection with a signal generator")
    p.add_argument("--system", required=True)
    p.add_argument("--generator", required=True)
    p.add_argument("--side", choices=("right", "left"))
    p.add_argument("--horizon", type=float, required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--w0", help="generator initial state (right side)")
    p.add_argument("--input", choices=("impulse", "step"), default="impulse")
    p.add_argument("--form", choices=("standard", "descriptor_i", "descriptor_ii", "finite", "markov", "markov_hat"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bode", help="frequency response table")
    p.add_argument("--system", required=True)
    p.add_argument("--wmin", type=float, required=True)
    p.add_argument("--wmax", type=float, required=True)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bode)

    p = sub.add_parser("example", help="write a shipped example system")
    p.add_argument("name", choices=("ladder", "smib"))
    p.add_argument("--r", help="ladder resistances r1,r2,r3")
    p.add_argument("--c", help="ladder capacitances c1,c2")
    p.add_argument("--l", help="ladder inductances l1,l2")
    p.add_argument("--q", help="ladder energy diagonal q1,q2,q3,q4")
    p.add_argument("--delta", type=float, help="SMIB load angle in radians")
    p.add_argument("--out")
    p.set_defaults(func=cmd_example)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return int(args.func(args))
    except (PhmmError, CliError, ValueError, TypeError, OSError, KeyError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        sys.stderr.write(json.dumps(err, sort_keys=True) + "\n")
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
