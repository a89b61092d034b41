"""Command line front end: ``dualpde <command> [--file F | --gallery NAME] ...``.

Every command builds a report (an ordered dict) and prints it either as
indented text or as JSON.  Exit status is 0 on success, 1 when the answer is
a negative verdict (not involutive, not torsion-free, no parametrization)
and 2 on any error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
import warnings
from fractions import Fraction
from typing import Dict, List, Optional

from .algebra import format_poly
from .cc import build_sequence, generate_cc
from .coords import CoordinateChange
from .duality import double_duality_test, differential_rank, minimum_parametrization
from .errors import DualPDEError, NotTorsionFree, OrderBudgetExceeded
from .gallery import GALLERY, gallery
from .jets import (
    JetSystem,
    characters,
    complete_to_involution,
    find_delta_regular,
    is_involutive,
    janet_tabular,
)
from .operators import OpMatrix, adjoint, format_row, matmul, principal_symbol
from .opfile import format_operator_file, parse_operator_file

COMMANDS = ("adjoint", "compose", "cc", "involution", "characters", "tabular", "symbol",
            "rank", "torsion", "parametrize", "min-parametrize", "sequence", "gallery")


class CommandError(DualPDEError):
    pass


# ---------------------------------------------------------------------------
# payload helpers


def matrix_payload(A: OpMatrix) -> Dict:
    out = {
        "shape": [A.p, A.m],
        "n": A.n,
        "order": A.order(),
        "unknowns": list(A.source_labels),
        "equations": [{"name": A.target_labels[i],
                       "expr": format_row(A.rows[i], A.source_labels, A.n)} for i in range(A.p)],
    }
    if any(w != 1 for w in A.source_weights):
        out["weights"] = [str(w) for w in A.source_weights]
    if any(w != 1 for w in A.target_weights):
        out["eqweights"] = [str(w) for w in A.target_weights]
    return out


def change_payload(T: Optional[CoordinateChange]):
    if T is None or T.is_identity():
        return "identity"
    return T.describe()


def _characters_payload(ct):
    return {"order": ct.q, "alpha": list(ct.alpha), "beta": list(ct.beta),
            "dim_g_q": ct.dim_g_q, "dim_g_q+1": ct.dim_g_q1}


def _jet_system(A: OpMatrix, args):
    S = JetSystem.from_operator(A)
    if args.coords == "auto":
        _, S = find_delta_regular(S, seed=args.seed)
    return S


# ---------------------------------------------------------------------------
# commands (each returns (payload, exit status))


def cmd_adjoint(A, args):
    return {"adjoint": matrix_payload(adjoint(A))}, 0


def cmd_compose(A, args):
    B = _load_second(args, A.n)
    C = matmul(A, B)
    return {"second": matrix_payload(B), "product": matrix_payload(C), "is_zero": C.is_zero()}, 0


def cmd_cc(A, args):
    r = generate_cc(A, args.max_order, seed=args.seed, coords=args.coords)
    return {"rows": r.rows, "order": r.order, "completion_order": r.completion_order,
            "coordinates": change_payload(r.change), "cc": matrix_payload(r.cc)}, 0


def cmd_involution(A, args):
    S = _jet_system(A, args)
    verdict = is_involutive(S)
    payload = {"coordinates": change_payload(S.change), "involutive": verdict.involutive}
    if not verdict.involutive:
        payload["reason"] = verdict.reason
    try:
        done, ct = complete_to_involution(S, args.max_order)
    except OrderBudgetExceeded as exc:
        # the verdict stands; only the completion is missing
        payload["completion"] = {"failed": str(exc), "max_order": exc.max_order}
    else:
        payload["completion"] = {"order": done.q, "equations": len(done.rows),
                                 "characters": _characters_payload(ct)}
    return payload, 0 if verdict.involutive else 1


def cmd_characters(A, args):
    S = _jet_system(A, args)
    return {"coordinates": change_payload(S.change), "equations": len(S.rows),
            "characters": _characters_payload(characters(S))}, 0


def cmd_tabular(A, args):
    S = _jet_system(A, args)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        tab = janet_tabular(S)
    payload = {"coordinates": change_payload(S.change), "tabular": tab.render(),
               "beta": list(tab.beta)}
    if caught:
        payload["warning"] = str(caught[0].message)
    return payload, 0


def cmd_symbol(A, args):
    M = principal_symbol(A)
    names = [f"x{i + 1}" for i in range(A.n)] + [f"chi{i + 1}" for i in range(A.n)]
    payload = {"order": M.q, "shape": [M.p, M.m]}
    payload["entries"] = [
        {"row": A.target_labels[i], "col": A.source_labels[k],
         "symbol": format_poly(P, names)}
        for i, line in enumerate(M.polynomial_matrix()) for k, P in enumerate(line) if P.terms]
    payload["generic_rank"] = M.generic_rank(seed=args.seed)
    payload["exact_rank"] = M.exact_rank()
    if M.p == M.m:
        payload["determinant"] = format_poly(M.determinant(), names)
    return payload, 0


def cmd_rank(A, args):
    cert = differential_rank(A, args.max_order, seed=args.seed)
    return {"rank": cert.rank, "module_rank": cert.module_rank,
            "witness_rows": [A.target_labels[i] for i in cert.witness_rows],
            "coordinates": change_payload(cert.change),
            "characters": _characters_payload(cert.character_table)}, 0


def _torsion_payload(rep, A):
    out = []
    for t in rep.torsion_generators:
        entry = {"element": format_row(t.row, A.source_labels, A.n),
                 "normal_form": format_row(t.remainder, A.source_labels, A.n)}
        if t.annihilator is not None:
            entry["annihilator"] = format_row(t.annihilator.as_row(0), ["t"], A.n)
            entry["annihilator_order"] = t.annihilator.order()
        out.append(entry)
    return out


def cmd_torsion(A, args):
    rep = double_duality_test(A, args.max_order, seed=args.seed)
    payload = {"torsion_free": rep.torsion_free,
               "torsion_generators": len(rep.torsion_generators),
               "generators": _torsion_payload(rep, A),
               "ad_d": matrix_payload(rep.ad_d),
               "d1_prime": matrix_payload(rep.d1_prime)}
    if rep.notes:
        payload["notes"] = rep.notes
    return payload, 0 if rep.torsion_free else 1


def cmd_parametrize(A, args):
    rep = double_duality_test(A, args.max_order, seed=args.seed, certify=False)
    payload = {"torsion_free": rep.torsion_free}
    if not rep.torsion_free:
        payload["torsion_generators"] = len(rep.torsion_generators)
        return payload, 1
    payload["parametrizes"] = rep.parametrizes
    payload["potentials"] = rep.d.m
    payload["parametrization"] = matrix_payload(rep.d)
    return payload, 0 if rep.parametrizes else 1


def cmd_min_parametrize(A, args):
    try:
        P = minimum_parametrization(A, args.max_order, seed=args.seed)
    except NotTorsionFree as exc:
        return {"torsion_free": False, "reason": str(exc)}, 1
    return {"torsion_free": True, "potentials": P.m, "parametrization": matrix_payload(P)}, 0


def cmd_sequence(A, args):
    seq = build_sequence(A, args.steps, args.max_order, seed=args.seed, coords=args.coords)
    return {"fiber_dims": seq.fiber_dims, "orders": seq.orders,
            "euler_poincare": seq.euler_poincare(), "is_complex": seq.is_complex(),
            "operators": [matrix_payload(op) for op in seq.operators[1:]]}, 0


def cmd_gallery(A, args):
    return {"name": args.gallery, "file": format_operator_file(A).splitlines()}, 0


HANDLERS = {
    "adjoint": cmd_adjoint, "compose": cmd_compose, "cc": cmd_cc,
    "involution": cmd_involution, "characters": cmd_characters, "tabular": cmd_tabular,
    "symbol": cmd_symbol, "rank": cmd_rank, "torsion": cmd_torsion,
    "parametrize": cmd_parametrize, "min-parametrize": cmd_min_parametrize,
    "sequence": cmd_sequence, "gallery": cmd_gallery,
}


# ---------------------------------------------------------------------------
# input and output


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def load_operator(args) -> OpMatrix:
    if args.file and args.gallery:
        raise CommandError("give either --file or --gallery, not both")
    if args.file:
        return parse_operator_file(_read(args.file))
    if args.gallery:
        if args.gallery not in GALLERY:
            raise CommandError(f"unknown gallery operator {args.gallery!r}; "
                               f"choose from {', '.join(sorted(GALLERY))}")
        return gallery(args.gallery, args.n, args.metric)
    raise CommandError("no input operator: use --file or --gallery")


def _load_second(args, n: int) -> OpMatrix:
    if not args.with_:
        raise CommandError("compose needs --with FILE or --with GALLERY_NAME")
    if args.with_ in GALLERY:
        return gallery(args.with_, n if args.n is None else args.n, args.metric)
    return parse_operator_file(_read(args.with_))


def _input_block(A: OpMatrix, args) -> Dict:
    text = format_operator_file(A)
    src = f"file:{args.file}" if args.file else f"gallery:{args.gallery}"
    block = {"source": src, "shape": [A.p, A.m], "n": A.n,
             "digest": "sha256:" + hashlib.sha256(text.encode("utf-8")).hexdigest()}
    if args.gallery:
        block["metric"] = args.metric
    return block


def run_command(cmd: str, args) -> (Dict, int):
    """Build the report for one command.  Errors become an ``error`` entry
    and status 2."""
    report = {"command": cmd, "options": {"seed": args.seed, "coords": args.coords,
                                          "max_order": args.max_order}}
    if cmd not in HANDLERS:
        report["error"] = {"type": "CommandError", "message": f"unknown command {cmd!r}"}
        return report, 2
    t0 = time.perf_counter()
    try:
        A = load_operator(args)
        report["input"] = _input_block(A, args)
        payload, status = HANDLERS[cmd](A, args)
        report["result"] = payload
    except (DualPDEError, ValueError, OSError) as exc:
        info = {"type": type(exc).__name__, "message": str(exc)}
        for attr in ("line", "col", "max_order"):
            if getattr(exc, attr, None) is not None:
                info[attr] = getattr(exc, attr)
        report["error"] = info
        status = 2
    if args.timing:
        report["timing_seconds"] = round(time.perf_counter() - t0, 3)
    return report, status


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    raise TypeError(f"cannot serialize {type(v).__name__}")


def render_table(report: Dict) -> str:
    lines: List[str] = []

    def emit(key, value, indent):
        pad = "  " * indent
        if isinstance(value, dict):
            lines.append(f"{pad}{key}:")
            for k, v in value.items():
                emit(k, v, indent + 1)
        elif isinstance(value, list) and value and not all(isinstance(v, int) for v in value) \
                and key not in ("weights", "eqweights", "unknowns"):
            lines.append(f"{pad}{key}:")
            for i, v in enumerate(value):
                if isinstance(v, dict) and set(v) == {"name", "expr"}:
                    lines.append(f"{pad}  {v['name']}: {v['expr']}")
                elif isinstance(v, dict):
                    emit(f"[{i + 1}]", v, indent + 1)
                else:
                    lines.append(f"{pad}  {v}")
        elif isinstance(value, list):
            lines.append(f"{pad}{key}: ({', '.join(str(v) for v in value)})")
        else:
            lines.append(f"{pad}{key}: {str(value).lower() if isinstance(value, bool) else value}")

    for k, v in report.items():
        emit(k, v, 0)
    return "\n".join(lines) + "\n"


def render(report: Dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, default=_jsonable) + "\n"
    return render_table(report)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dualpde",
                                 description="Exact duality computations for linear PDE systems.")
    ap.add_argument("command", help="one of: " + ", ".join(COMMANDS))
    ap.add_argument("name", nargs="?", help="gallery operator name (shorthand for --gallery)")
    ap.add_argument("--file", "-f", help="operator file ('-' reads standard input)")
    ap.add_argument("--gallery", "-g", help="built-in operator: " + ", ".join(sorted(GALLERY)))
    ap.add_argument("--n", type=int, default=None,
                    help="dimension for gallery operators (default 4 for einstein/ricci, else 3)")
    ap.add_argument("--metric", default="euclid", choices=("euclid", "minkowski"))
    ap.add_argument("--with", dest="with_", help="second operator for compose (file or gallery name)")
    ap.add_argument("--max-order", type=int, default=None, help="order budget (default q+5)")
    ap.add_argument("--seed", type=int, default=0, help="seed for coordinate search (default 0)")
    ap.add_argument("--coords", default="auto", choices=("auto", "identity"))
    ap.add_argument("--steps", type=int, default=2, help="CC stages for sequence (default 2)")
    ap.add_argument("--format", default="table", choices=("table", "json"))
    ap.add_argument("--timing", action="store_true", help="include wall-clock time in the report")
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    if args.name:
        if args.gallery and args.gallery != args.name:
            sys.stderr.write("error: conflicting gallery names\n")
            return 2
        args.gallery = args.name
    if args.seed < 0 or args.seed >= 2 ** 64:
        sys.stderr.write("error: --seed must be an unsigned 64-bit integer\n")
        return 2
    report, status = run_command(args.command, args)
    if args.command == "gallery" and args.format == "table" and "error" not in report:
        sys.stdout.write("\n".join(report["result"]["file"]) + "\n")
    else:
        sys.stdout.write(render(report, args.format))
    if "error" in report:
        sys.stderr.write(f"error: {report['error']['message']}\n")
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
