"""Command line interface: analyze, decompose, same-orbit, witness, generate, selftest.

Exit codes: 0 ok, 1 numerical-health failure (or a failed self-test / refused
witness), 2 usage or parse error.  Text output prints angles in degrees, JSON
output keeps radians.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings

import numpy as np

from . import selftest
from .angles import ISOCLINIC_TOL, isoclinicity, principal_angles
from .decompose import full_decompose, kaehler_multiangle
from .hqspace import TOL_COMPARE, TOL_RANK, TOL_SNAP, HQSpace, NumericalHealthWarning, check_so3
from .lab import GeneratorSpec, random_sp_n
from .orbit import classify, orbit_invariant, sp_n_witness
from .subspace import frame_from_json, frame_to_json

EXIT_OK, EXIT_HEALTH, EXIT_USAGE = 0, 1, 2
STRUCTURE_NAMES = ("I", "J", "K")


class UsageError(Exception):
    pass


def _deg(x):
    return f"{np.degrees(x):.6f}"


def _degs(xs):
    return "(" + ", ".join(_deg(x) for x in np.atleast_1d(xs)) + ")"


def _vec(v):
    return "(" + ", ".join(f"{x:.6f}" for x in v) + ")"


def _to_builtin(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


# ------------------------------------------------------------------- loading


def _read_json(source):
    """Parse JSON from a path, '-' for stdin, or an inline string starting with '{'."""
    if source.lstrip().startswith("{"):
        text, label = source, "<inline>"
    elif source == "-":
        text, label = sys.stdin.read(), "<stdin>"
    else:
        try:
            with open(source) as fh:
                text = fh.read()
        except OSError as e:
            raise UsageError(f"{source}: {e.strerror}") from None
        label = source
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise UsageError(f"{label}:{e.lineno}:{e.colno}: {e.msg}") from None


def _basis(args):
    if args.basis is None:
        return None
    try:
        return check_so3(np.array(args.basis, dtype=float).reshape(3, 3).T)
    except ValueError as e:
        raise UsageError(f"--basis: {e}") from None


def _load(args, source):
    obj = _read_json(source)
    try:
        n, U, residual = frame_from_json(obj, args.tol_rank)
    except ValueError as e:
        raise UsageError(f"{source}: {e}") from None
    return HQSpace(n, _basis(args)), U, residual


def _tolerances(args):
    return {"rank": args.tol_rank, "snap": args.tol_snap, "compare": args.tol_compare,
            "isoclinic": args.tol_isoclinic}


# ------------------------------------------------------------------ commands


def _report_class(cls):
    if cls.ic4 and cls.kind in ("TotallyReal", "Other"):
        return "Ic4"
    return cls.kind


def cmd_analyze(args):
    space, U, residual = _load(args, args.frame)
    m = U.shape[1]
    cls = classify(space, U, args.tol_snap)
    try:
        inv = orbit_invariant(space, U, args.tol_snap, cls=cls, oriented=args.oriented)
        data = inv.data()
    except ValueError as e:
        data, inv = None, None
        note = str(e)
    angles = {}
    for name, e in zip(STRUCTURE_NAMES, np.eye(3)):
        if m == 0:
            break
        rep = isoclinicity(space, e, U, args.tol_isoclinic)
        pa = principal_angles(U, space.apply(e, U))
        angles[name] = {"principal_angles": pa.thetas, "isoclinic": rep.isoclinic,
                        "isoclinic_angle": rep.angle if rep.isoclinic else None}
    report = {
        "class": _report_class(cls), "data": data, "tolerances": _tolerances(args),
        "dim": m, "n": space.n, "flags": {"ic4": cls.ic4, "rhps": cls.rhps},
        "angles": angles, "load_residual": residual,
    }
    if inv is None:
        report["note"] = note
    if args.json:
        return report
    lines = [f"class: {report['class']}  (dim {m} in H^{space.n})"]
    if cls.ic4 or cls.rhps:
        lines.append("flags: " + ", ".join(k for k, v in report["flags"].items() if v))
    if inv is None:
        lines.append(f"invariant: {note}")
    else:
        lines += _invariant_text(inv)
    for name, a in angles.items():
        iso = f"isoclinic at {_deg(a['isoclinic_angle'])} deg" if a["isoclinic"] else "not isoclinic"
        lines.append(f"(U, {name}U): principal angles {_degs(a['principal_angles'])} deg; {iso}")
    return "\n".join(lines)


def _invariant_text(inv):
    if inv.kind == "TwoPlane":
        return [f"imaginary measure: {'' if inv.oriented else '+-'}{_vec(inv.im)}"]
    if inv.kind == "Complex":
        return [f"structure: {_vec(inv.structure)}", f"multiangle: {_degs(inv.multiangle)} deg"]
    if inv.kind == "SigmaComplex":
        return [f"addend {i}: structure {_vec(it.structure)}, dim {it.dim}, multiangle {_degs(it.multiangle)} deg"
                for i, it in enumerate(inv.items)]
    if inv.kind == "Ic4":
        v = inv.inv
        return [f"isoclinic angles (I, J, K): {_degs(v.thetas)} deg",
                f"xi={v.xi:.6f} chi={v.chi:.6f} eta={v.eta:.6f} Gamma={v.Gamma:.6f} Delta={v.Delta:.6f}"]
    return [f"{inv.kind} of dimension {inv.dim}"]


def cmd_decompose(args):
    space, U, _ = _load(args, args.frame)
    dec = full_decompose(space, U, args.tol_snap)
    report = {
        "U_Q_dim": dec.quaternionic.shape[1],
        "sigma": [{"structure": A, "dim": W.shape[1], "multiangle": kaehler_multiangle(space, A, W, args.tol_snap)}
                  for A, W in dec.sigma],
        "U_R_dim": dec.real.shape[1],
        "residuals": dec.residuals,
    }
    if args.json:
        return report
    lines = [f"U_Q: dim {report['U_Q_dim']}"]
    for i, it in enumerate(report["sigma"]):
        lines.append(f"U_sigma[{i}]: structure {_vec(it['structure'])}, dim {it['dim']}, "
                     f"multiangle {_degs(it['multiangle'])} deg")
    lines.append(f"U_R: dim {report['U_R_dim']}")
    lines.append("residuals: " + ", ".join(f"{k}={v:.3g}" for k, v in dec.residuals.items()))
    return "\n".join(lines)


def _pair(args):
    space, U, _ = _load(args, args.frame_a)
    space_b, W, _ = _load(args, args.frame_b)
    if space.n != space_b.n:
        raise UsageError(f"frames live in H^{space.n} and H^{space_b.n}")
    if U.shape[1] != W.shape[1]:
        raise UsageError(f"dimension mismatch: {U.shape[1]} vs {W.shape[1]}")
    return space, U, W


def cmd_same_orbit(args):
    space, U, W = _pair(args)
    a = orbit_invariant(space, U, args.tol_snap, oriented=args.oriented)
    b = orbit_invariant(space, W, args.tol_snap, oriented=args.oriented)
    dist = a.distance(b)
    same = bool(dist <= args.tol_compare)
    report = {"same_orbit": same, "class": [a.kind, b.kind], "distance": dist if np.isfinite(dist) else None,
              "invariants": [a.data(), b.data()], "tolerances": _tolerances(args)}
    if args.json:
        return report
    d = "n/a (different classes)" if not np.isfinite(dist) else f"{dist:.3g}"
    return f"same orbit: {'yes' if same else 'no'}  (classes {a.kind} / {b.kind}, invariant distance {d})"


def cmd_witness(args):
    space, U, W = _pair(args)
    w = sp_n_witness(space, U, W, snap=args.tol_snap, compare=args.tol_compare)
    if w is None:
        report = {"witness": None, "reason": "subspaces are not in the same Sp(n)-orbit"}
        return (report if args.json else report["reason"]), EXIT_HEALTH
    report = w.to_json()
    if args.json:
        return report
    v = w.verification
    lines = [f"witness g in Sp({space.n}) ({space.dim}x{space.dim})",
             f"max principal angle (gU, W): {_deg(v['max_principal_angle'])} deg",
             "commutator norms: " + ", ".join(f"{c:.3g}" for c in v["commutator_norms"]),
             f"orthogonality residual: {v['orthogonality_residual']:.3g}"]
    if args.matrix:
        lines += [" ".join(f"{x: .6f}" for x in row) for row in w.g]
    return "\n".join(lines)


def cmd_generate(args):
    try:
        spec = GeneratorSpec.from_json(_read_json(args.spec))
        space = HQSpace(args.n, _basis(args))
        U = spec.build(space)
    except (ValueError, KeyError, TypeError) as e:
        raise UsageError(f"generator spec: {e}") from None
    if args.scramble:
        U = random_sp_n(space, args.seed) @ U
    return frame_to_json(space.n, U)


def cmd_selftest(args):
    only = args.criteria or None
    if only and any(not 1 <= k <= len(selftest.CRITERIA) for k in only):
        raise UsageError(f"criteria are numbered 1..{len(selftest.CRITERIA)}")
    if args.size < selftest.MIN_SIZE:
        raise UsageError(f"--size must be at least {selftest.MIN_SIZE}")
    results = []
    for k in only or range(1, len(selftest.CRITERIA) + 1):
        r = selftest.run_criterion(k, args.size, args.seed, args.scale, args.tol_override)
        results.append(r)
        if not args.json:
            print(r.line(), flush=True)
    failed = [r.number for r in results if not r.passed]
    code = EXIT_HEALTH if failed else EXIT_OK
    if args.json:
        return {"passed": not failed, "failed": failed, "results": [r.to_json() for r in results]}, code
    return f"{len(results) - len(failed)}/{len(results)} criteria passed", code


# -------------------------------------------------------------------- parser


def _common(p):
    p.add_argument("--tol-rank", type=float, default=TOL_RANK, help="rank threshold for frames (default %(default)g)")
    p.add_argument("--tol-snap", type=float, default=TOL_SNAP, help="snap tolerance for cosines (default %(default)g)")
    p.add_argument("--tol-compare", type=float, default=TOL_COMPARE,
                   help="invariant comparison tolerance (default %(default)g)")
    p.add_argument("--tol-isoclinic", type=float, default=ISOCLINIC_TOL,
                   help="isoclinicity tolerance (default %(default)g)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true", help="JSON output (angles in radians)")
    p.add_argument("--basis", type=float, nargs=9, metavar="X",
                   help="admissible basis: coefficients of I', J', K' in (I, J, K), three triples")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    _common(common)
    parser = argparse.ArgumentParser(prog="hqorbit", description="Sp(n)-orbit invariants of subspaces of H^n.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="classify a frame and print its orbit invariant")
    p.add_argument("frame", help="frame JSON file, '-' for stdin, or inline JSON")
    p.add_argument("--oriented", action="store_true", help="keep the orientation of 2-planes")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("decompose", parents=[common], help="U = U_Q + U_sigma + U_R")
    p.add_argument("frame")
    p.set_defaults(func=cmd_decompose)

    for name, func, text in (("same-orbit", cmd_same_orbit, "decide Sp(n)-equivalence of two frames"),
                             ("witness", cmd_witness, "explicit g in Sp(n) with gU = W")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("frame_a")
        p.add_argument("frame_b")
        if name == "same-orbit":
            p.add_argument("--oriented", action="store_true", help="compare oriented 2-planes")
        else:
            p.add_argument("--matrix", action="store_true", help="print the matrix in text mode")
        p.set_defaults(func=func)

    p = sub.add_parser("generate", parents=[common], help="frame JSON from a generator spec")
    p.add_argument("spec", help="generator spec JSON (file, '-' or inline)")
    p.add_argument("-n", type=int, default=8, help="quaternionic dimension (default %(default)s)")
    p.add_argument("--scramble", action="store_true", help="apply a random element of Sp(n) (from --seed)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("selftest", parents=[common], help="run the acceptance sweeps")
    p.add_argument("--size", type=int, default=8, help="quaternionic dimension n (default %(default)s)")
    p.add_argument("--scale", type=float, default=1.0, help="fraction of the full trial counts")
    p.add_argument("--tol-override", type=float, default=None, help="replace every criterion tolerance")
    p.add_argument("--criteria", type=int, nargs="+", metavar="K", help="run only these criteria")
    p.set_defaults(func=cmd_selftest)
    return parser


def _check_args(args):
    for name in ("tol_rank", "tol_snap", "tol_compare", "tol_isoclinic"):
        if not getattr(args, name) > 0:
            raise UsageError(f"--{name.replace('_', '-')} must be positive")
    if getattr(args, "scale", 1.0) <= 0:
        raise UsageError("--scale must be positive")
    if getattr(args, "tol_override", None) is not None and not args.tol_override > 0:
        raise UsageError("--tol-override must be positive")


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        _check_args(args)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", NumericalHealthWarning)
            out = args.func(args)
    except UsageError as e:
        print(f"hqorbit: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as e:
        print(f"hqorbit: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    out, code = out if isinstance(out, tuple) else (out, EXIT_OK)
    health = [str(w.message) for w in caught if issubclass(w.category, NumericalHealthWarning)]
    for w in caught:
        if not issubclass(w.category, NumericalHealthWarning):
            warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)
    if health:
        code = max(code, EXIT_HEALTH)
        if isinstance(out, dict):
            out["health_warnings"] = health
        else:
            out += "".join(f"\nwarning: {h}" for h in health)
    print(json.dumps(out, default=_to_builtin, indent=2) if isinstance(out, dict) else out)
    return code


if __name__ == "__main__":
    sys.exit(main())
