"""Coding of irreflexive digraphs into undirected graphs with uniform decoding.

Each vertex a of the input gets a base point b_a attached to a fresh
triangle.  Each ordered pair (a, a') of distinct vertices gets a connector
point p adjacent to b_a, a middle point c joining p to b_{a'}, and a
polygon hanging off p: a square when the edge (a, a') is present, a
pentagon when it is absent.  Decoding is uniform: a point is a base point
iff it is adjacent to a triangle it does not belong to, and the edge
relation is read off by existential formulas that look for the attached
square or pentagon.

The decoder is monotone in the input facts (the three formulas are
existential and negation-free), which is what makes the streaming decoder
below sound: facts, once emitted, never have to be retracted.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

from .core import (And, Digraph, Eq, Evaluator, Exists, MalformedInputError,
                   Not, PreconditionError, Rel, UGraph, distinct_all)


@dataclass
class MarkerCode:
    graph: UGraph
    provenance: dict  # vertex -> role tag


def marker_encode(g):
    """Encode an irreflexive digraph as an undirected graph."""
    if not isinstance(g, Digraph):
        raise PreconditionError("marker_encode expects an irreflexive digraph")
    nxt = itertools.count()
    vertices = []
    edges = []
    prov = {}

    def fresh(tag):
        v = next(nxt)
        vertices.append(v)
        prov[v] = tag
        return v

    base = {}
    for a in sorted(g.vertices):
        b = fresh(("base", a))
        t1, t2, t3 = (fresh(("tri", a, i)) for i in range(3))
        edges += [(t1, t2), (t2, t3), (t3, t1), (b, t1)]
        base[a] = b
    for a, a2 in itertools.permutations(sorted(g.vertices), 2):
        p = fresh(("pair", a, a2))
        c = fresh(("mid", a, a2))
        edges += [(p, base[a]), (p, c), (c, base[a2])]
        sides = 4 if g.rel("E", (a, a2)) else 5
        poly = [fresh(("poly", a, a2, i)) for i in range(sides)]
        edges += list(zip(poly, poly[1:] + poly[:1]))
        edges.append((p, poly[0]))
    return MarkerCode(UGraph(vertices, edges), prov)


def base_point_formula(x="x"):
    """x is adjacent to a triangle it does not belong to."""
    ts = ("t1", "t2", "t3")
    conj = [Rel("E", (x, "t1")), Rel("E", ("t1", "t2")),
            Rel("E", ("t2", "t3")), Rel("E", ("t3", "t1"))]
    conj += distinct_all((x,) + ts)
    return Exists(ts, And(tuple(conj)))


def _poly_formula(x, y, sides):
    ss = tuple(f"s{i}" for i in range(1, sides + 1))
    conj = [Rel("E", (x, "p")), Rel("E", ("p", "c")), Rel("E", ("c", y)),
            Rel("E", ("p", "s1"))]
    conj += [Rel("E", (ss[i], ss[(i + 1) % sides])) for i in range(sides)]
    conj += distinct_all((x, y, "p", "c") + ss)
    return And((Not(Eq(x, y)), Exists(("p", "c") + ss, And(tuple(conj)))))


def square_formula(x="x", y="y"):
    """The pair (x, y) carries a square: the coded edge is present."""
    return _poly_formula(x, y, 4)


def pentagon_formula(x="x", y="y"):
    """The pair (x, y) carries a pentagon: the coded edge is absent."""
    return _poly_formula(x, y, 5)


def marker_decode(h):
    """Decode an undirected graph back to the coded digraph.

    Vertices of the result are the base points of ``h``.  Raises
    MalformedInputError when some pair of base points carries neither a
    square nor a pentagon.
    """
    ev = Evaluator(h)
    bphi = base_point_formula()
    sq = square_formula()
    pent = pentagon_formula()
    bases = [v for v in h.universe if ev.eval(bphi, {"x": v})]
    edges = []
    for u, v in itertools.permutations(bases, 2):
        env = {"x": u, "y": v}
        if ev.eval(sq, env):
            edges.append((u, v))
        elif not ev.eval(pent, env):
            raise MalformedInputError(
                f"base pair ({u}, {v}) carries neither a square nor a pentagon")
    return Digraph(bases, edges)


def relabel_decoded(decoded, code):
    """Map a decode of code.graph back through the provenance tags."""
    names = {v: code.provenance[v][1] for v in decoded.vertices}
    return Digraph([names[v] for v in decoded.vertices],
                   [(names[u], names[v]) for u, v in decoded.edges])


# ---------------------------------------------------------------------------
# streaming decoder


@dataclass
class _Growing:
    """Mutable graph fed fact by fact; presents the Structure interface
    pieces the evaluator needs."""
    universe: tuple = ()
    signature: dict = field(default_factory=lambda: {"E": 2})
    adj: dict = field(default_factory=dict)

    def add_vertex(self, v):
        if v not in self.adj:
            self.adj[v] = set()
            self.universe = self.universe + (v,)

    def add_edge(self, u, v):
        self.add_vertex(u)
        self.add_vertex(v)
        self.adj[u].add(v)
        self.adj[v].add(u)

    def rel(self, name, args):
        u, v = args
        return v in self.adj.get(u, ())

    def matches(self, name, pattern):
        u, v = pattern
        if u is not None:
            return [(u, w) for w in self.adj.get(u, ()) if v is None or v == w]
        if v is not None:
            return [(w, v) for w in self.adj.get(v, ())]
        return [(a, b) for a in self.adj for b in self.adj[a]]


class MarkerStreamDecoder:
    """Decode an enumerated diagram of an encoded graph, fact by fact.

    ``feed`` takes facts of the form ("v", x) or ("e", x, y) and returns
    the list of decoded facts, in the same two shapes, that become true at
    this stage.  Because the decoding formulas are positive-existential,
    every emitted fact stays true in every later stage, and once the whole
    diagram has been fed the emitted facts form exactly the batch decode.
    """

    def __init__(self):
        self.g = _Growing()
        self.bases = set()
        self.emitted_edges = set()
        self._bphi = base_point_formula()
        self._sq = square_formula()

    def _ball(self, seeds, radius):
        seen = set(seeds)
        frontier = deque((s, 0) for s in seeds)
        while frontier:
            v, d = frontier.popleft()
            if d == radius:
                continue
            for w in self.g.adj.get(v, ()):
                if w not in seen:
                    seen.add(w)
                    frontier.append((w, d + 1))
        return seen

    def feed(self, fact):
        out = []
        if fact[0] == "v":
            self.g.add_vertex(fact[1])
            return out
        if fact[0] != "e":
            raise MalformedInputError(f"unknown fact kind {fact[0]!r}")
        _, u, v = fact
        self.g.add_edge(u, v)
        ev = Evaluator(self.g)
        # a new edge can only create base points within distance two of it
        for x in self._ball({u, v}, 2):
            if x not in self.bases and ev.eval(self._bphi, {"x": x}):
                self.bases.add(x)
                out.append(("v", x))
        # and new coded edges whose witness square uses the edge; the whole
        # witness sits within distance five of either endpoint
        near = self._ball({u, v}, 5)
        for x, y in itertools.permutations(sorted(self.bases), 2):
            if (x, y) in self.emitted_edges or (x not in near and y not in near):
                continue
            if ev.eval(self._sq, {"x": x, "y": y}):
                self.emitted_edges.add((x, y))
                out.append(("e", x, y))
        return out

    def result(self):
        return Digraph(sorted(self.bases), self.emitted_edges)


def diagram_facts(h):
    """The diagram of an undirected graph as a list of stream facts."""
    facts = [("v", v) for v in h.universe]
    seen = set()
    for u, v in sorted(h.relations["E"]):
        if (v, u) not in seen:
            seen.add((u, v))
            facts.append(("e", u, v))
    return facts
