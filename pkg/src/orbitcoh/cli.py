"""Command-line interface: betti, ring, verify, cellular.

Exit codes: 0 success, 1 verification or form failure, 2 malformed
input, 3 unsupported parameters.  Identical inputs produce
byte-identical output.
"""

from __future__ import annotations

import argparse
import sys

from .cellular import CellularForm, construct_cellular_form
from .jsonio import BadInput, dumps, load_json, parse_copresheaf, parse_graph, parse_poset
from .oracle import OracleTooLarge
from .orbit import Graph
from .ring import RingPresentation, UnsupportedM, cohomology_presentation, real_gr_presentation
from .verify import verify_full

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_BAD_INPUT = 2
EXIT_UNSUPPORTED = 3


def _graph_from_args(args) -> Graph:
    if args.complete is not None:
        if args.complete < 1:
            raise BadInput("--complete expects a positive integer")
        return Graph.complete(args.complete)
    if args.graph is None:
        raise BadInput("one of --graph FILE or --complete N is required")
    return parse_graph(load_json(args.graph))


def _check_km(args):
    if args.k < 1 or args.m < 1:
        raise BadInput("k and m must be positive integers")
    if args.mode == "real" and args.k != 2:
        raise BadInput("real mode forces k = 2")


def _emit(args, payload: dict, text: str):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(dumps(payload))
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)


def _poincare_string(coeffs: list[int]) -> str:
    terms = []
    for d, c in enumerate(coeffs):
        if not c:
            continue
        if d == 0:
            terms.append(str(c))
        elif c == 1:
            terms.append(f"t^{d}" if d > 1 else "t")
        else:
            terms.append(f"{c}*t^{d}" if d > 1 else f"{c}*t")
    return " + ".join(terms) if terms else "0"


def _presentation(args, additive_only: bool) -> RingPresentation:
    graph = _graph_from_args(args)
    if args.mode == "real":
        return real_gr_presentation(graph, args.m)
    return cohomology_presentation(graph, args.k, args.m,
                                   additive_only=additive_only)


def cmd_betti(args) -> int:
    _check_km(args)
    additive = args.m == 1
    pres = _presentation(args, additive_only=additive)
    poincare = pres.poincare_polynomial()
    payload = {
        "command": "betti",
        "graph": {"n": pres.graph.n,
                  "edges": sorted([list(e) for e in pres.graph.edges])},
        "k": pres.k,
        "m": pres.m,
        "mode": pres.mode,
        "betti": [[d, r] for d, r in pres.betti_table().items()],
        "poincare": poincare,
        "gradings": {t: pres.piece_rank(t) for t in pres.gradings()},
    }
    if additive and pres.mode == "complex":
        payload["warning"] = ("m = 1 output is additive only; the ring "
                              "statement needs m > 1")
    lines = ["degree  rank"]
    for d, r in pres.betti_table().items():
        lines.append(f"{d:>6}  {r}")
    lines.append("poincare: " + _poincare_string(poincare))
    if "warning" in payload:
        lines.append("warning: " + payload["warning"])
    _emit(args, payload, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_ring(args) -> int:
    _check_km(args)
    if args.m == 1:
        raise UnsupportedM("the ring presentation needs m > 1")
    pres = _presentation(args, additive_only=False)
    payload = pres.to_json_dict(include_products=True)
    payload["command"] = "ring"
    nonzero = sum(1 for entry in payload.get("products", []) if entry[2])
    lines = [
        f"basis: {len(pres.basis)} elements over "
        f"{len(pres.gradings())} gradings ({pres.mode} mode)",
        "poincare: " + _poincare_string(pres.poincare_polynomial()),
        f"nonzero basis products: {nonzero}",
        "idx  degree  grading",
    ]
    for i, e in enumerate(pres.basis):
        lines.append(f"{i:>3}  {e.degree:>6}  {e.theta}")
    _emit(args, payload, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    _check_km(args)
    graph = _graph_from_args(args)
    report = verify_full(graph, args.k, args.m, oracle_limit=args.oracle_limit)
    payload = {
        "command": "verify",
        "k": args.k,
        "m": args.m,
        "ok": report.ok,
        "checks": report.lines,
        "rank_checks": report.rank_checks,
        "product_checks": report.product_checks,
    }
    _emit(args, payload, str(report) + "\n")
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_cellular(args) -> int:
    poset = parse_poset(load_json(args.poset))
    g = parse_copresheaf(load_json(args.copresheaf), poset)
    result = construct_cellular_form(poset, g)
    if isinstance(result, CellularForm):
        payload = {"command": "cellular", "cellular": True}
        payload.update(result.to_json_dict())
        lines = ["cellular form exists", "element  rank  piece"]
        for i, lab in enumerate(poset.labels):
            lines.append(f"{lab}  {poset.rank[i]}  {result.piece_ranks[i]}")
        _emit(args, payload, "\n".join(lines) + "\n")
        return EXIT_OK
    payload = {
        "command": "cellular",
        "cellular": False,
        "element": str(result.element),
        "step": result.step,
        "detail": result.detail,
    }
    text = (f"not cellular: {result.step} fails at {result.element}"
            f" ({result.detail})\n")
    _emit(args, payload, text)
    return EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orbitcoh",
        description="Cohomology rings of orbit configuration spaces of the "
                    "standard action, with brute-force verification.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_graph=True):
        if needs_graph:
            p.add_argument("--graph", help="graph JSON file")
            p.add_argument("--complete", type=int,
                           help="complete graph on N vertices")
        p.add_argument("--k", type=int, default=2, help="order of each cyclic factor")
        p.add_argument("--m", type=int, default=2, help="number of coordinates")
        p.add_argument("--mode", choices=["complex", "real"], default="complex")
        p.add_argument("--out", help="write JSON here instead of a text table")
        p.add_argument("--oracle-limit", type=int, default=100,
                       dest="oracle_limit",
                       help="largest poset the brute-force oracle will accept")

    p_betti = sub.add_parser("betti", help="Betti table and Poincare polynomial")
    common(p_betti)
    p_betti.set_defaults(func=cmd_betti)

    p_ring = sub.add_parser("ring", help="full ring presentation")
    common(p_ring)
    p_ring.set_defaults(func=cmd_ring)

    p_verify = sub.add_parser("verify", help="verify the closed form against "
                                             "the brute-force oracle")
    common(p_verify)
    p_verify.set_defaults(func=cmd_verify)

    p_cell = sub.add_parser("cellular", help="run the cellular form "
                                             "construction on a poset")
    p_cell.add_argument("--poset", required=True, help="poset JSON file")
    p_cell.add_argument("--copresheaf", required=True,
                        help="copresheaf JSON file")
    p_cell.add_argument("--out", help="write JSON here instead of text")
    p_cell.set_defaults(func=cmd_cellular)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BadInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except UnsupportedM as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except OracleTooLarge as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED


if __name__ == "__main__":
    sys.exit(main())
