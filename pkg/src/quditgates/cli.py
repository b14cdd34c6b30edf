"""Command-line entry point: ``quditgates {analyze,certify,synth,make,corpus}``.

Exit codes: 0 success, 1 usage, 2 invalid input, 3 domain rejection.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .gates import KINDS, GateSpec, named_gates
from .lie import CLOSURE_TOL, LEAK_TOL, universality_report
from .linalg import UNITARITY_TOL, Gate, InvalidGateError, load_gate, save_gate
from .primitivity import COEFF_TOL, coefficient_test, default_tol, is_primitive
from .synthesis import NoConvergenceError, PrimitiveEntanglerError, synthesize
from .variant import NMAX, ROOT_TOL, det_phase, special_universality_verdict

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_DOMAIN = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class InputError(Exception):
    pass


def _g(x: float) -> str:
    return f"{x:.12g}"


def _digest(path: str) -> str:
    try:
        return hashlib.sha256(Path(path).read_bytes()).hexdigest()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _read_two_qudit(path: str) -> Gate:
    try:
        gate = load_gate(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except InvalidGateError as exc:
        raise InputError(f"{path}: {exc}") from exc
    if gate.n != 2:
        raise InputError(f"{path}: expected a 2-qudit gate, got n={gate.n}")
    return gate


def _report(args, command: str, inputs: dict, verdict: dict, tolerances: dict, seed=None) -> dict:
    return {
        "tool": "quditgates",
        "version": __version__,
        "command": command,
        "argv": args.argv,
        "inputs": inputs,
        "verdict": verdict,
        "tolerances": tolerances,
        "seed": seed,
    }


def _emit(args, report: dict) -> None:
    if not args.json:
        return
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.json == "-":
        sys.stdout.write(text)
    else:
        Path(args.json).write_text(text)


def _is_identity(m: np.ndarray) -> bool:
    return bool(np.max(np.abs(m - np.eye(m.shape[0]))) <= 1e-9)


def _describe_factorization(f) -> str:
    s = "I" if _is_identity(f.s.matrix) else "S"
    t = "I" if _is_identity(f.t.matrix) else "T"
    body = f"({s}⊗{t})" + ("·P" if f.swap_flag else "")
    return body if f.phase == 0 else f"exp(i*{_g(f.phase)})·{body}"


def cmd_analyze(args) -> int:
    gate = _read_two_qudit(args.path)
    tol = default_tol()
    verdict = is_primitive(gate, tol)
    h1, h2, r1, r2 = coefficient_test(gate)
    uni = universality_report(gate, tol)
    phase = det_phase(gate)
    d4 = gate.d**4
    if verdict.is_primitive:
        line = f"primitive: {_describe_factorization(verdict.factorization)}; not universal"
    else:
        line = f"imprimitive; universal with all 1-qudit gates; closure {uni.closure_dim}/{d4}"
    print(line)
    print(f"  schmidt residual {_g(verdict.residual_schmidt)}; coefficient residuals "
          f"(i) {_g(r1)} (ii) {_g(r2)}; det phase {_g(phase)}")
    if verdict.witness is not None:
        print(f"  witness output entropy {_g(verdict.witness.output_entropy)} nats")
    if verdict.borderline:
        print("  warning: gate is near the primitivity threshold")
    if not uni.consistent:
        print(f"  warning: closure dimension {uni.closure_dim} disagrees with the verdict")
    payload = {
        "primitivity": verdict.to_json(),
        "coefficient_test": {"holds_i": h1, "holds_ii": h2,
                             "max_residual_i": r1, "max_residual_ii": r2},
        "universality": uni.to_json(),
        "det_phase": phase,
    }
    if verdict.factorization is not None:
        f = verdict.factorization
        payload["factorization"] = {"s": f.s.to_json(), "t": f.t.to_json(),
                                    "swap": f.swap_flag, "phase": f.phase}
    tols = {"primitivity": tol, "coefficient": COEFF_TOL, "closure": CLOSURE_TOL,
            "unitarity": UNITARITY_TOL}
    _emit(args, _report(args, "analyze", {args.path: _digest(args.path)}, payload, tols))
    return EXIT_OK


def cmd_certify(args) -> int:
    gate = _read_two_qudit(args.path)
    tol = default_tol()
    if args.special:
        v = special_universality_verdict(gate, args.nmax, args.tol_root, tol)
        det = v.det_analysis
        if v.special_universal:
            print(f"universal with special 1-qudit gates (caveat: nmax={args.nmax})")
        elif not v.imprimitive:
            print("not universal (primitive)")
        else:
            print(f"not universal (det root of unity, order {det.root_order})")
        if v.caveat:
            print(f"  caveat: {v.caveat}")
        print(f"  su closure {v.su_closure_dim}/{gate.d**4 - 1}")
        payload = v.to_json()
        tols = {"primitivity": tol, "root": args.tol_root, "nmax": args.nmax,
                "closure": CLOSURE_TOL}
    else:
        uni = universality_report(gate, tol)
        if uni.universal:
            print(f"universal with all 1-qudit gates; closure {uni.closure_dim}/{gate.d**4}")
        else:
            print(f"not universal (primitive); closure {uni.closure_dim}/{gate.d**4}")
        payload = uni.to_json()
        tols = {"primitivity": tol, "closure": CLOSURE_TOL}
    _emit(args, _report(args, "certify", {args.path: _digest(args.path)}, payload, tols))
    return EXIT_OK


def cmd_synth(args) -> int:
    target = _read_two_qudit(args.target)
    ent = _read_two_qudit(args.entangler)
    if target.d != ent.d:
        raise InputError(f"target has d={target.d} but entangler has d={ent.d}")
    inputs = {args.target: _digest(args.target), args.entangler: _digest(args.entangler)}
    tols = {"synthesis": args.tol, "primitivity": default_tol()}
    code = EXIT_OK
    try:
        result = synthesize(target, ent, args.layers, args.restarts, args.tol, args.seed)
    except PrimitiveEntanglerError as exc:
        print(f"rejected: {exc}", file=sys.stderr)
        _emit(args, _report(args, "synth", inputs, {"error": "PrimitiveEntangler",
                                                    "message": str(exc)}, tols, args.seed))
        return EXIT_DOMAIN
    except NoConvergenceError as exc:
        result = exc.result
        code = EXIT_DOMAIN
        print(f"no convergence: best cost {_g(result.cost)} > tol {_g(args.tol)}", file=sys.stderr)
    if code == EXIT_OK:
        print(f"converged: cost {_g(result.cost)} with {result.circuit.num_entanglers} entangler(s)")
    payload = result.to_json()
    payload["entangler_gate"] = ent.to_json()
    if args.out:
        Path(args.out).write_text(json.dumps(result.circuit.to_json(), indent=2) + "\n")
    _emit(args, _report(args, "synth", inputs, payload, tols, args.seed))
    return code


def _spec_from_args(args) -> GateSpec:
    if args.spec:
        try:
            return GateSpec.from_json(json.loads(args.spec))
        except (json.JSONDecodeError, KeyError) as exc:
            raise InputError(f"bad --spec: {exc}") from exc
    params = json.loads(args.params) if args.params else []
    if args.kind == "q_phi" and args.phi is not None:
        params = [args.phi]
    elif args.kind == "u_theta_phi" and (args.theta is not None or args.phi is not None):
        params = [args.theta or 0.0, args.phi or 0.0]
    elif args.kind in ("identity", "haar") and args.n is not None:
        params = [args.n]
    return GateSpec(args.kind, args.d, params, args.seed)


def cmd_make(args) -> int:
    if not args.kind and not args.spec:
        raise argparse.ArgumentError(None, "give a gate kind or --spec")
    try:
        spec = _spec_from_args(args)
        gate = spec.build()
    except (ValueError, TypeError, IndexError) as exc:
        raise InputError(str(exc)) from exc
    if args.out:
        save_gate(gate, args.out)
    else:
        json.dump(gate.to_json(), sys.stdout)
        sys.stdout.write("\n")
    return EXIT_OK


def cmd_corpus(args) -> int:
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    for name, gate in named_gates().items():
        save_gate(gate, out / f"{name}.json")
        print(out / f"{name}.json")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="quditgates", description="Universality analysis of 2-qudit gates.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="primitivity, factorization and closure of a gate file")
    a.add_argument("path")
    a.add_argument("--json", metavar="FILE", help="write the JSON report ('-' for stdout)")
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("certify", help="universality verdict")
    c.add_argument("path")
    c.add_argument("--special", action="store_true", help="restrict 1-qudit gates to det 1")
    c.add_argument("--nmax", type=int, default=NMAX)
    c.add_argument("--tol-root", type=float, default=ROOT_TOL)
    c.add_argument("--json", metavar="FILE")
    c.set_defaults(func=cmd_certify)

    s = sub.add_parser("synth", help="compile a target gate over an entangler")
    s.add_argument("target")
    s.add_argument("entangler")
    s.add_argument("--layers", type=int, default=3, help="maximum number of entanglers")
    s.add_argument("--restarts", type=int, default=20)
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", metavar="FILE", help="write the circuit JSON")
    s.add_argument("--json", metavar="FILE")
    s.set_defaults(func=cmd_synth)

    m = sub.add_parser("make", help="write a named gate as JSON")
    m.add_argument("kind", nargs="?", choices=KINDS)
    m.add_argument("--d", type=int, default=2)
    m.add_argument("--n", type=int)
    m.add_argument("--phi", type=float)
    m.add_argument("--theta", type=float)
    m.add_argument("--params", help="JSON parameter list")
    m.add_argument("--seed", type=int)
    m.add_argument("--spec", help='full gate spec, e.g. {"kind":"q_phi","params":[1.57]}')
    m.add_argument("--out", metavar="FILE")
    m.set_defaults(func=cmd_make)

    k = sub.add_parser("corpus", help="write the standard named gates to a directory")
    k.add_argument("outdir")
    k.set_defaults(func=cmd_corpus)
    return p


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv = argv
    start = time.perf_counter()
    try:
        code = args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except argparse.ArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.command in ("analyze", "certify", "synth"):
        print(f"  wall time {time.perf_counter() - start:.3f} s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
