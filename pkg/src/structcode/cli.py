"""Command-line front end.

Exit codes: 0 success or checked-true, 1 checked-false or refuted,
2 usage/parse/I-O error, 3 precondition violation on valid input.
Payloads are JSON on standard output, byte-stable for fixed inputs and
seed; ``--pretty`` switches to indented rendering.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import core, formats
from .backforth import (bf_equiv, distinguishing_move, interval_equiv,
                        lg_certify, lg_concat_certify, phi_pair, phi_tuple)
from .codings import (daisy_decode, daisy_encode, shuffle_build,
                      shuffle_decode, Block, ShuffleFragment)
from .core import (Digraph, FinLinOrder, LoopedDigraph, MalformedInputError,
                   PreconditionError, UGraph, classify)
from .denseq import Dyadic
from .fslin import (block_of, fs_compare, fs_element, fs_enumerate, fs_member,
                    mentions, min_length_in_interval, shape, shape_formulas,
                    shift_tuple)
from .interp import builtin_int_in_nat, check_interpretation, marker_interp, trivial_interp
from .marker import MarkerStreamDecoder, marker_decode, marker_encode

SCHEMA = 1


def _read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}")


class UsageError(Exception):
    pass


def _load_parts(path):
    try:
        return formats.parse_struct_text(_read(path))
    except MalformedInputError as exc:
        # unreadable input files are usage errors, not precondition failures
        raise UsageError(f"{path}: {exc}")


def load_digraph(path, loops=False):
    vertices, edges, order = _load_parts(path)
    if order is not None:
        raise MalformedInputError(f"{path}: expected a graph, found an order")
    return (LoopedDigraph if loops else Digraph)(vertices, edges)


def load_ugraph(path):
    vertices, edges, order = _load_parts(path)
    if order is not None:
        raise MalformedInputError(f"{path}: expected a graph, found an order")
    return UGraph(vertices, edges)


def load_struct(path):
    """A graph file becomes a digraph (loops allowed), an order file an order."""
    vertices, edges, order = _load_parts(path)
    if order is not None:
        if vertices or edges:
            raise MalformedInputError(f"{path}: order files take only o lines")
        return FinLinOrder(order)
    return LoopedDigraph(vertices, edges)


def _graph_payload(g):
    def key(v):
        return (str(type(v)), v)
    if "E" in g.signature and isinstance(g, UGraph):
        edges = {tuple(sorted(e, key=key)) for e in g.undirected_edges()}
    else:
        edges = set(g.relations["E"])
    return {"schema": SCHEMA,
            "vertices": sorted(g.universe, key=key),
            "edges": [list(e) for e in sorted(edges, key=lambda e: tuple(map(key, e)))]}


def _elem_arg(g, raw):
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise UsageError(f"bad element JSON: {exc}")
    return formats.element_from_json(g, data)


def _tuple_arg(g, raw):
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise UsageError(f"bad tuple JSON: {exc}")
    if not isinstance(data, list):
        raise UsageError("tuple must be a JSON list of elements")
    return tuple(formats.element_from_json(g, d) for d in data)


def _vertex_tuple(struct, ids):
    out = []
    toks = [t for t in (ids or "").split(",") if t != ""]
    for tok in toks:
        v = formats._ident(tok)
        if v not in set(struct.universe):
            raise PreconditionError(f"tuple entry {tok} is not in the structure")
        out.append(v)
    return tuple(out)


def _shape_payload(s):
    return {"order": list(s.order),
            "gaps": [g if g is not None else "inf" for g in s.gaps],
            "blocks": [list(b) for b in s.blocks],
            "half_lengths": list(s.half_lengths),
            "min_half": list(s.min_half)}


def _level(phi):
    kind, lvl = classify(phi)
    return f"{kind} {lvl}"


# ---------------------------------------------------------------------------
# subcommand handlers; each returns (exit_code, payload-or-None)


def cmd_marker(args):
    if args.action == "encode":
        code = marker_encode(load_digraph(args.file))
        payload = _graph_payload(code.graph)
        if args.tags:
            payload["tags"] = {str(v): list(map(str, tag))
                               for v, tag in sorted(code.provenance.items())}
        return 0, payload
    if args.action == "decode":
        g = marker_decode(load_ugraph(args.file))
        return 0, _graph_payload(g)
    # stream-decode: facts in, decoded facts out as they stabilize
    dec = MarkerStreamDecoder()
    for raw in sys.stdin:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "v" and len(parts) == 2:
            fact = ("v", formats._ident(parts[1]))
        elif parts[0] == "e" and len(parts) == 3:
            fact = ("e", formats._ident(parts[1]), formats._ident(parts[2]))
        else:
            raise MalformedInputError(f"bad fact line: {line!r}")
        for out in dec.feed(fact):
            print(" ".join(str(x) for x in out), flush=True)
    return 0, None


def cmd_fs(args):
    g = load_digraph(args.graph)
    if args.action == "member":
        try:
            formats.element_from_json(g, json.loads(args.elems[0]))
        except json.JSONDecodeError as exc:
            raise UsageError(f"bad element JSON: {exc}")
        except MalformedInputError as exc:
            return 1, {"member": False, "reason": str(exc)}
        return 0, {"member": True}
    if args.action == "compare":
        c = fs_compare(_elem_arg(g, args.elems[0]), _elem_arg(g, args.elems[1]))
        return 0, {"compare": c}
    if args.action == "mentions":
        return 0, {"mentions": list(mentions(_elem_arg(g, args.elems[0])))}
    if args.action == "block":
        m, k = block_of(g, _elem_arg(g, args.elems[0]))
        return 0, {"size": m, "position": k}
    if args.action == "minlen":
        k, w = min_length_in_interval(g, _elem_arg(g, args.elems[0]),
                                      _elem_arg(g, args.elems[1]))
        return 0, {"k": k, "witness": formats.element_to_json(w)}
    if args.action == "shape":
        elems = tuple(_elem_arg(g, e) for e in args.elems)
        s = shape(g, elems)
        payload = _shape_payload(s)
        if args.formulas:
            fs = shape_formulas(s)
            payload["sigma"] = {"formula": formats.formula_to_sexpr(fs.sigma),
                                "level": _level(fs.sigma)}
            payload["pi"] = {"formula": formats.formula_to_sexpr(fs.pi),
                             "level": _level(fs.pi)}
        return 0, payload
    if args.action == "enumerate":
        elems = fs_enumerate(g, args.half_len, args.max_exp)
        return 0, {"count": len(elems),
                   "elements": [formats.element_to_json(e) for e in elems]}
    if args.action == "shift":
        elems = tuple(_elem_arg(g, e) for e in args.elems)
        res = shift_tuple(g, elems, _elem_arg(g, args.past), side=args.side)
        return 0, {"elements": [formats.element_to_json(e) for e in res.elements],
                   "separator": formats.element_to_json(res.separator),
                   "map": {str(k): str(v)
                           for k, v in sorted(res.map.seeds.items())}}
    if args.action == "certify":
        t1 = _tuple_arg(g, args.tuple_a)
        t2 = _tuple_arg(g, args.tuple_b)
        if args.tuple_a2 or args.tuple_b2:
            if not (args.tuple_a2 and args.tuple_b2):
                raise UsageError("--tuple-a2 and --tuple-b2 go together")
            cert = lg_concat_certify(
                g, (t1, _tuple_arg(g, args.tuple_a2)),
                (t2, _tuple_arg(g, args.tuple_b2)), args.gamma)
        else:
            cert = lg_certify(g, t1, t2, args.gamma)
        code = 1 if cert.verdict == "Distinguished" else 0
        return code, {"verdict": cert.verdict,
                      "evidence": json.loads(json.dumps(cert.evidence, default=str))}
    raise UsageError(f"unknown fs action {args.action!r}")


def cmd_bnf(args):
    if args.action == "equiv":
        a, b = load_struct(args.files[0]), load_struct(args.files[1])
        ta, tb = _vertex_tuple(a, args.tuple_a), _vertex_tuple(b, args.tuple_b)
        eq = bf_equiv(a, ta, b, tb, args.gamma, args.bound)
        payload = {"equivalent": eq, "gamma": args.gamma}
        if not eq:
            payload["witness"] = json.loads(json.dumps(
                distinguishing_move(a, ta, b, tb, args.gamma, args.bound),
                default=str))
        return (0 if eq else 1), payload
    if args.action == "formula":
        a = load_struct(args.files[0])
        tup = _vertex_tuple(a, args.tuple_a)
        phi = phi_tuple(a, tup, args.gamma, args.bound)
        return 0, {"formula": formats.formula_to_sexpr(phi),
                   "level": _level(phi)}
    if args.action == "pair":
        a = load_struct(args.files[0])
        bound = args.bound if args.bound else len(a.universe)
        phi = phi_pair(a.signature, args.length, args.gamma, bound)
        return 0, {"formula": formats.formula_to_sexpr(phi),
                   "level": _level(phi)}
    if args.action == "intervals":
        a, b = load_struct(args.files[0]), load_struct(args.files[1])
        if not isinstance(a, FinLinOrder) or not isinstance(b, FinLinOrder):
            raise PreconditionError("intervals needs two order files")
        ta, tb = _vertex_tuple(a, args.tuple_a), _vertex_tuple(b, args.tuple_b)
        verdict, per = interval_equiv(a, ta, b, tb, args.gamma)
        return (0 if verdict else 1), {"equivalent": verdict,
                                       "intervals": per}
    raise UsageError(f"unknown bnf action {args.action!r}")


def _report_payload(rep):
    return {"passed": rep.passed,
            "classes": rep.class_count,
            "domain_size": rep.domain_size,
            "failures": json.loads(json.dumps(rep.failures, default=str)),
            "iso": None if rep.iso is None
            else {str(k): str(v) for k, v in sorted(rep.iso.items(),
                                                    key=lambda kv: str(kv[0]))},
            "notes": rep.notes}


def cmd_interp(args):
    if args.action == "check":
        carrier = load_struct(args.carrier)
        target = load_struct(args.target)
        spec = formats.parse_interp_spec(_read(args.spec))
        rep = check_interpretation(carrier, spec, target, args.max_arity,
                                   seed=args.seed)
        return (0 if rep.passed else 1), _report_payload(rep)
    if args.action == "int":
        carrier, spec, target = builtin_int_in_nat(args.n)
        rep = check_interpretation(carrier, spec, target, 2, seed=args.seed)
        return (0 if rep.passed else 1), _report_payload(rep)
    if args.action == "trivial":
        target = load_struct(args.target)
        carrier = load_struct(args.carrier)
        _, rep = trivial_interp(target, carrier)
        return (0 if rep.passed else 1), _report_payload(rep)
    if args.action == "marker":
        g = load_digraph(args.graph)
        carrier, spec, target = marker_interp(g)
        rep = check_interpretation(carrier, spec, target, 1, seed=args.seed)
        return (0 if rep.passed else 1), _report_payload(rep)
    raise UsageError(f"unknown interp action {args.action!r}")


def _parse_set(raw):
    if not raw:
        return set()
    try:
        return {int(x) for x in raw.split(",") if x != ""}
    except ValueError:
        raise UsageError(f"bad number list {raw!r}")


def cmd_daisy(args):
    if args.action == "encode":
        g = daisy_encode(_parse_set(args.set), args.bound)
        return 0, _graph_payload(g)
    s, bound = daisy_decode(load_ugraph(args.file))
    return 0, {"set": sorted(s), "bound": bound}


def _fragment_payload(f):
    return {"schema": SCHEMA, "labels": list(f.labels),
            "omega": f.include_omega, "resolution": f.resolution,
            "offset": f.offset, "marked": f.marked,
            "blocks": [{"point": str(b.point), "label": b.label,
                        "size": b.size, "omega_prefix": b.omega_prefix}
                       for b in f.blocks]}


def _fragment_from_json(data):
    try:
        blocks = tuple(Block(Dyadic.parse(b["point"]), b["label"], b["size"],
                             bool(b["omega_prefix"])) for b in data["blocks"])
        return ShuffleFragment(tuple(data["labels"]), bool(data["omega"]),
                               int(data["resolution"]), int(data["offset"]),
                               blocks, bool(data.get("marked", True)))
    except (KeyError, TypeError) as exc:
        raise MalformedInputError(f"bad fragment: {exc}")


def cmd_shuffle(args):
    if args.action == "build":
        labels = sorted(_parse_set(args.labels))
        f = shuffle_build(labels, args.omega, args.resolution)
        return 0, _fragment_payload(f)
    try:
        data = json.loads(_read(args.file))
    except json.JSONDecodeError as exc:
        raise UsageError(f"bad fragment JSON: {exc}")
    report = shuffle_decode(_fragment_from_json(data))
    return 0, {"report": {str(n): v for n, v in sorted(report.items())}}


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="structcode",
                                description="Concrete codings between graphs, "
                                            "orders and arithmetic.")
    p.add_argument("--seed", type=int,
                   default=int(os.environ.get("STRUCTCODE_SEED", "0")),
                   help="seed for any sampled checks")
    p.add_argument("--pretty", action="store_true",
                   help="indent the JSON payload")
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("marker", help="digraph-in-graph coding")
    ms = m.add_subparsers(dest="action", required=True)
    enc = ms.add_parser("encode")
    enc.add_argument("file")
    enc.add_argument("--tags", action="store_true",
                     help="include construction role tags")
    ms.add_parser("decode").add_argument("file")
    ms.add_parser("stream-decode")

    f = sub.add_parser("fs", help="order elements built from a digraph")
    fsub = f.add_subparsers(dest="action", required=True)
    for name, nargs in (("member", 1), ("compare", 2), ("mentions", 1),
                        ("block", 1), ("minlen", 2)):
        sp = fsub.add_parser(name)
        sp.add_argument("--graph", required=True)
        sp.add_argument("elems", nargs=nargs, metavar="ELEM")
    sp = fsub.add_parser("shape")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--formulas", action="store_true")
    sp.add_argument("elems", nargs="+", metavar="ELEM")
    sp = fsub.add_parser("enumerate")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--half-len", type=int, default=1)
    sp.add_argument("--max-exp", type=int, default=3)
    sp = fsub.add_parser("shift")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--past", required=True, metavar="ELEM")
    sp.add_argument("--side", choices=("left", "right"), default="right")
    sp.add_argument("elems", nargs="+", metavar="ELEM")
    sp = fsub.add_parser("certify")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--gamma", type=int, required=True)
    sp.add_argument("--tuple-a", required=True)
    sp.add_argument("--tuple-b", required=True)
    sp.add_argument("--tuple-a2")
    sp.add_argument("--tuple-b2")

    b = sub.add_parser("bnf", help="back-and-forth games and formulas")
    bs = b.add_subparsers(dest="action", required=True)
    sp = bs.add_parser("equiv")
    sp.add_argument("--gamma", type=int, required=True)
    sp.add_argument("--bound", type=int)
    sp.add_argument("--tuple-a", default="", help="comma-separated vertex ids")
    sp.add_argument("--tuple-b", default="")
    sp.add_argument("files", nargs=2, metavar="STRUCT")
    sp = bs.add_parser("formula")
    sp.add_argument("--gamma", type=int, required=True)
    sp.add_argument("--bound", type=int)
    sp.add_argument("--tuple-a", default="", help="comma-separated vertex ids")
    sp.add_argument("files", nargs=1, metavar="STRUCT")
    sp = bs.add_parser("pair")
    sp.add_argument("--gamma", type=int, required=True)
    sp.add_argument("--length", type=int, required=True)
    sp.add_argument("--bound", type=int)
    sp.add_argument("files", nargs=1, metavar="STRUCT")
    sp = bs.add_parser("intervals")
    sp.add_argument("--gamma", type=int, required=True)
    sp.add_argument("--tuple-a", default="")
    sp.add_argument("--tuple-b", default="")
    sp.add_argument("files", nargs=2, metavar="ORDER")

    i = sub.add_parser("interp", help="interpretation checking")
    isub = i.add_subparsers(dest="action", required=True)
    sp = isub.add_parser("check")
    sp.add_argument("--carrier", required=True)
    sp.add_argument("--spec", required=True)
    sp.add_argument("--target", required=True)
    sp.add_argument("--max-arity", type=int, required=True)
    sp = isub.add_parser("int")
    sp.add_argument("--n", type=int, required=True)
    sp = isub.add_parser("trivial")
    sp.add_argument("--target", required=True)
    sp.add_argument("--carrier", required=True)
    sp = isub.add_parser("marker")
    sp.add_argument("--graph", required=True)

    d = sub.add_parser("daisy", help="set-in-graph coding")
    ds = d.add_subparsers(dest="action", required=True)
    sp = ds.add_parser("encode")
    sp.add_argument("--set", default="")
    sp.add_argument("--bound", type=int, required=True)
    ds.add_parser("decode").add_argument("file")

    s = sub.add_parser("shuffle", help="dense shuffle fragments")
    ss = s.add_subparsers(dest="action", required=True)
    sp = ss.add_parser("build")
    sp.add_argument("--labels", default="")
    sp.add_argument("--omega", action="store_true")
    sp.add_argument("--resolution", type=int, required=True)
    ss.add_parser("decode").add_argument("file")

    return p


HANDLERS = {"marker": cmd_marker, "fs": cmd_fs, "bnf": cmd_bnf,
            "interp": cmd_interp, "daisy": cmd_daisy, "shuffle": cmd_shuffle}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code, payload = HANDLERS[args.command](args)
    except UsageError as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 2
    except (MalformedInputError, PreconditionError) as exc:
        print(json.dumps({"error": str(exc)}))
        return 3
    if payload is not None:
        if args.pretty:
            print(json.dumps(payload, sort_keys=True, indent=2))
        else:
            print(json.dumps(payload, sort_keys=True, separators=(",", ":")))
    return code


if __name__ == "__main__":
    sys.exit(main())
