"""Finite relational structures and the logic toolbox built on them.

This module provides the shared substrate for everything else in the
package: finite structures with named relations, an AST for (bounded
fragments of) infinitary first-order formulas, brute-force evaluation on
finite models, a syntactic complexity classifier, enumeration of atomic
types of distinct tuples in the one-binary-relation language, and a
backtracking isomorphism search with colour refinement.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass


class StructError(ValueError):
    """Base class for errors raised by this package."""


class PreconditionError(StructError):
    """An operation was called on input that violates its contract."""


class EvalError(StructError):
    """A formula could not be evaluated (unbound variable, unknown relation)."""


class MalformedInputError(StructError):
    """Input data does not decode as an image of the expected construction."""


# ---------------------------------------------------------------------------
# structures


class Structure:
    """A finite relational structure.

    ``universe`` is a tuple of hashable elements, ``signature`` maps relation
    names to arities, ``relations`` maps names to frozensets of tuples.
    """

    def __init__(self, universe, signature, relations):
        self.universe = tuple(universe)
        self.signature = dict(signature)
        uset = set(self.universe)
        if len(uset) != len(self.universe):
            raise PreconditionError("universe has repeated elements")
        rels = {}
        for name, arity in self.signature.items():
            tuples = frozenset(tuple(t) for t in relations.get(name, ()))
            for t in tuples:
                if len(t) != arity:
                    raise PreconditionError(
                        f"tuple {t!r} has wrong arity for relation {name}")
                if any(x not in uset for x in t):
                    raise PreconditionError(
                        f"tuple {t!r} mentions elements outside the universe")
            rels[name] = tuples
        extra = set(relations) - set(self.signature)
        if extra:
            raise PreconditionError(f"relations not in signature: {sorted(extra)}")
        self.relations = rels
        self._index = {}

    def rel(self, name, args):
        try:
            tuples = self.relations[name]
        except KeyError:
            raise EvalError(f"unknown relation {name!r}")
        return tuple(args) in tuples

    def matches(self, name, pattern):
        """All relation tuples consistent with ``pattern`` (None = free slot)."""
        bound = tuple((i, v) for i, v in enumerate(pattern) if v is not None)
        if not bound:
            return self.relations[name]
        # index on the exact set of bound positions
        positions = tuple(i for i, _ in bound)
        key = (name, positions)
        idx = self._index.get(key)
        if idx is None:
            idx = {}
            for t in self.relations[name]:
                idx.setdefault(tuple(t[i] for i in positions), []).append(t)
            self._index[key] = idx
        return idx.get(tuple(v for _, v in bound), [])

    def key(self):
        """Canonical hashable form, for use as a cache key or in comparisons."""
        return (
            tuple(sorted(self.signature.items())),
            self.universe,
            tuple((n, tuple(sorted(self.relations[n])))
                  for n in sorted(self.relations)),
        )

    def __repr__(self):
        sig = ",".join(f"{n}/{a}" for n, a in sorted(self.signature.items()))
        return f"<{type(self).__name__} |U|={len(self.universe)} {sig}>"


class Digraph(Structure):
    """Irreflexive directed graph in the language with one binary relation E."""

    def __init__(self, vertices, edges):
        edges = {tuple(e) for e in edges}
        for u, v in edges:
            if u == v:
                raise PreconditionError(f"self-loop at {u!r} not allowed")
        super().__init__(vertices, {"E": 2}, {"E": edges})

    @property
    def vertices(self):
        return self.universe

    @property
    def edges(self):
        return self.relations["E"]


class LoopedDigraph(Structure):
    """Directed graph where self-loops are permitted (tuple-type contexts)."""

    def __init__(self, vertices, edges):
        super().__init__(vertices, {"E": 2}, {"E": {tuple(e) for e in edges}})

    @property
    def vertices(self):
        return self.universe

    @property
    def edges(self):
        return self.relations["E"]


class UGraph(Structure):
    """Undirected graph, stored with E closed under swapping the endpoints."""

    def __init__(self, vertices, edges):
        sym = set()
        for u, v in edges:
            if u == v:
                raise PreconditionError(f"self-loop at {u!r} not allowed")
            sym.add((u, v))
            sym.add((v, u))
        super().__init__(vertices, {"E": 2}, {"E": sym})

    @property
    def vertices(self):
        return self.universe

    def undirected_edges(self):
        return {frozenset(e) for e in self.relations["E"]}

    def neighbors(self, v):
        return sorted(t[1] for t in self.matches("E", (v, None)))


class FinLinOrder(Structure):
    """A finite linear order; elements are listed in increasing order."""

    def __init__(self, elements):
        elements = tuple(elements)
        lt = {(elements[i], elements[j])
              for i in range(len(elements)) for j in range(i + 1, len(elements))}
        super().__init__(elements, {"<": 2}, {"<": lt})

    @property
    def elements(self):
        return self.universe


# ---------------------------------------------------------------------------
# formulas

# Nodes are frozen dataclasses so formulas can be shared and hashed freely.
# And/Or are the finitary connectives.  BigAnd/BigOr mark junctions that
# stand for (truncations of) infinite families indexed by tuples; they
# evaluate identically but are classified with the level-raising convention.


@dataclass(frozen=True)
class Rel:
    name: str
    args: tuple

    def __str__(self):
        return f"({self.name} {' '.join(self.args)})"


@dataclass(frozen=True)
class Eq:
    left: str
    right: str

    def __str__(self):
        return f"(= {self.left} {self.right})"


@dataclass(frozen=True)
class Not:
    body: object

    def __str__(self):
        return f"(not {self.body})"


@dataclass(frozen=True)
class And:
    parts: tuple

    def __str__(self):
        return f"(and {' '.join(str(p) for p in self.parts)})"


@dataclass(frozen=True)
class Or:
    parts: tuple

    def __str__(self):
        return f"(or {' '.join(str(p) for p in self.parts)})"


@dataclass(frozen=True)
class BigAnd:
    parts: tuple

    def __str__(self):
        return f"(and* {' '.join(str(p) for p in self.parts)})"


@dataclass(frozen=True)
class BigOr:
    parts: tuple

    def __str__(self):
        return f"(or* {' '.join(str(p) for p in self.parts)})"


@dataclass(frozen=True)
class Exists:
    vars: tuple
    body: object

    def __str__(self):
        return f"(exists ({' '.join(self.vars)}) {self.body})"


@dataclass(frozen=True)
class Forall:
    vars: tuple
    body: object

    def __str__(self):
        return f"(forall ({' '.join(self.vars)}) {self.body})"


TRUE = And(())
FALSE = Or(())


def conj(parts):
    parts = tuple(parts)
    return parts[0] if len(parts) == 1 else And(parts)


def disj(parts):
    parts = tuple(parts)
    return parts[0] if len(parts) == 1 else Or(parts)


def distinct_all(names):
    """Pairwise inequality of the listed variables."""
    return [Not(Eq(a, b)) for a, b in itertools.combinations(names, 2)]


def free_vars(phi, _cache=None):
    if _cache is None:
        _cache = {}
    got = _cache.get(id(phi))
    if got is not None:
        return got
    if isinstance(phi, Rel):
        out = frozenset(phi.args)
    elif isinstance(phi, Eq):
        out = frozenset((phi.left, phi.right))
    elif isinstance(phi, Not):
        out = free_vars(phi.body, _cache)
    elif isinstance(phi, (And, Or, BigAnd, BigOr)):
        out = frozenset().union(*(free_vars(p, _cache) for p in phi.parts)) \
            if phi.parts else frozenset()
    elif isinstance(phi, (Exists, Forall)):
        out = free_vars(phi.body, _cache) - frozenset(phi.vars)
    else:
        raise EvalError(f"not a formula node: {phi!r}")
    _cache[id(phi)] = out
    return out


class Evaluator:
    """Brute-force truth evaluation of a formula in a finite structure.

    Quantified conjunctions are evaluated by backtracking: variables are
    assigned one at a time and every conjunct is checked as soon as its
    variables are bound, with candidate values drawn from relation indexes
    where a binding conjunct is available.  With ``memo=True`` results of
    quantified subformulas are cached per (node, restriction of the
    environment to its free variables), which makes repeated evaluation of
    shared subformulas cheap.
    """

    def __init__(self, structure, memo=False):
        self.s = structure
        self.memo = {} if memo else None
        self._fv = {}
        self._plans = {}
        self._flat = {}

    def _flatten_parts(self, parts):
        """Nested conjunctions as one flat tuple, cached for plan reuse."""
        got = self._flat.get(id(parts))
        if got is None:
            out = []
            stack = list(reversed(parts))
            while stack:
                c = stack.pop()
                if isinstance(c, (And, BigAnd)):
                    stack.extend(reversed(c.parts))
                else:
                    out.append(c)
            got = tuple(out)
            self._flat[id(parts)] = (got, parts)  # keep parts alive for id()
        else:
            got = got[0]
        return got

    def eval(self, phi, env=None):
        return self._eval(phi, dict(env or {}))

    def _eval(self, phi, env):
        if isinstance(phi, Rel):
            try:
                args = tuple(env[a] for a in phi.args)
            except KeyError as e:
                raise EvalError(f"unbound variable {e.args[0]!r}")
            return self.s.rel(phi.name, args)
        if isinstance(phi, Eq):
            try:
                return env[phi.left] == env[phi.right]
            except KeyError as e:
                raise EvalError(f"unbound variable {e.args[0]!r}")
        if isinstance(phi, Not):
            return not self._eval(phi.body, env)
        if isinstance(phi, (And, BigAnd)):
            return all(self._eval(p, env) for p in phi.parts)
        if isinstance(phi, (Or, BigOr)):
            return any(self._eval(p, env) for p in phi.parts)
        if isinstance(phi, Exists):
            return self._quant(phi, env, True)
        if isinstance(phi, Forall):
            return self._quant(phi, env, False)
        raise EvalError(f"not a formula node: {phi!r}")

    def _quant(self, phi, env, existential):
        key = None
        if self.memo is not None:
            fv = free_vars(phi, self._fv)
            key = (id(phi), tuple(sorted((v, env[v]) for v in fv if v in env)))
            got = self.memo.get(key)
            if got is not None:
                return got
        body = phi.body
        if existential and isinstance(body, (And, BigAnd)):
            result = self._search(list(phi.vars),
                                  self._flatten_parts(body.parts), env)
        else:
            result = None
            for vals in itertools.product(self.s.universe, repeat=len(phi.vars)):
                sub = dict(env)
                sub.update(zip(phi.vars, vals))
                truth = self._eval(body, sub)
                if existential and truth:
                    result = True
                    break
                if not existential and not truth:
                    result = False
                    break
            if result is None:
                result = not existential
        if key is not None:
            self.memo[key] = result
        return result

    def _search(self, todo, conjuncts, env):
        """Backtracking witness search for Exists over a conjunction.

        The scheduling of candidate narrowing and conjunct checks depends
        only on the formula and on which outer variables are bound, so it
        is planned once per (node identity, bound-variable set) and reused
        across evaluations.
        """
        plan = self._search_plan(tuple(todo), conjuncts,
                                 frozenset(env.keys()))
        pre, steps, leftovers = plan
        if not all(self._eval(c, env) for c in pre):
            return False
        return self._run_plan(steps, 0, leftovers, env)

    def _run_plan(self, steps, i, leftovers, env):
        if i == len(steps):
            return all(self._eval(c, env) for c in leftovers)
        var, cand, pending = steps[i]
        if cand is None:
            values = self.s.universe
        elif cand[0] == "eq":
            values = [env[cand[1]]]
        else:
            _, name, args, slot = cand
            pattern = tuple(None if a is None else env[a] for a in args)
            values = sorted({t[slot] for t in self.s.matches(name, pattern)})
        for val in values:
            env[var] = val
            if all(self._eval(c, env) for c in pending) and \
                    self._run_plan(steps, i + 1, leftovers, env):
                del env[var]
                return True
            del env[var]
        return False

    def _search_plan(self, todo, conjuncts, outer):
        key = (id(conjuncts), todo, outer)
        plan = self._plans.get(key)
        if plan is not None:
            return plan

        def is_atom(c):
            inner = c.body if isinstance(c, Not) else c
            return isinstance(inner, (Rel, Eq))

        bound = set(outer)
        # atoms fully determined by the outer environment are checked first
        pre = [c for c in conjuncts
               if is_atom(c) and free_vars(c, self._fv) <= bound]
        scheduled = set(map(id, pre))
        steps = []
        for var in todo:
            cand = None
            for c in conjuncts:
                if isinstance(c, Rel) and var in c.args and \
                        all(a == var or a in bound for a in c.args):
                    args = tuple(None if a == var else a for a in c.args)
                    cand = ("rel", c.name, args, c.args.index(var))
                    break
                if isinstance(c, Eq):
                    if c.left == var and c.right in bound:
                        cand = ("eq", c.right)
                        break
                    if c.right == var and c.left in bound:
                        cand = ("eq", c.left)
                        break
            bound.add(var)
            pending = [c for c in conjuncts
                       if is_atom(c) and id(c) not in scheduled and
                       var in free_vars(c, self._fv) and
                       free_vars(c, self._fv) <= bound]
            scheduled.update(map(id, pending))
            steps.append((var, cand, pending))
        leftovers = [c for c in conjuncts if id(c) not in scheduled]
        plan = (pre, steps, leftovers)
        self._plans[key] = plan
        return plan


def eval_formula(structure, phi, env=None):
    """Evaluate ``phi`` in ``structure`` under the given assignment."""
    return Evaluator(structure).eval(phi, env)


# ---------------------------------------------------------------------------
# syntactic complexity

_QF = (0, 0)


def _ranks(phi, cache):
    """Return (s, p): the least levels k with phi in Sigma_k resp. Pi_k.

    (0, 0) means quantifier-free.  And/Or use the finitary closure rules
    (both classes are closed under finite junctions); BigAnd/BigOr use the
    convention for junctions over infinite families, which raises the dual
    level by one.
    """
    got = cache.get(id(phi))
    if got is not None:
        return got
    if isinstance(phi, (Rel, Eq)):
        out = _QF
    elif isinstance(phi, Not):
        s, p = _ranks(phi.body, cache)
        out = (p, s)
    elif isinstance(phi, (And, Or)):
        rs = [_ranks(p, cache) for p in phi.parts]
        out = (max((r[0] for r in rs), default=0),
               max((r[1] for r in rs), default=0))
    elif isinstance(phi, (BigAnd, BigOr)):
        rs = [_ranks(p, cache) for p in phi.parts]
        nonqf = [r for r in rs if r != _QF]
        if not nonqf:
            # a family of quantifier-free members: the conjunction is Pi_1,
            # the disjunction Sigma_1
            out = (2, 1) if isinstance(phi, BigAnd) else (1, 2)
        elif isinstance(phi, BigAnd):
            p = max(r[1] for r in nonqf)
            out = (p + 1, p)
        else:
            s = max(r[0] for r in nonqf)
            out = (s, s + 1)
    elif isinstance(phi, Exists):
        sc, pc = _ranks(phi.body, cache)
        if (sc, pc) == _QF:
            out = (1, 2)
        else:
            s = max(1, min(pc + 1, sc if sc >= 1 else pc + 1))
            out = (s, s + 1)
    elif isinstance(phi, Forall):
        sc, pc = _ranks(phi.body, cache)
        if (sc, pc) == _QF:
            out = (2, 1)
        else:
            p = max(1, min(sc + 1, pc if pc >= 1 else sc + 1))
            out = (p + 1, p)
    else:
        raise EvalError(f"not a formula node: {phi!r}")
    cache[id(phi)] = out
    return out


def classify(phi):
    """Syntactic class of ``phi``: ('qf', 0), ('sigma', k) or ('pi', k).

    When a formula sits at the same level on both sides (for instance a
    finite conjunction mixing Sigma_k and Pi_k parts) it is reported on the
    Pi side.
    """
    s, p = _ranks(phi, {})
    if (s, p) == _QF:
        return ("qf", 0)
    if s < p:
        return ("sigma", s)
    return ("pi", p)


# ---------------------------------------------------------------------------
# atomic types of distinct tuples (one binary relation, loops allowed)


@dataclass(frozen=True)
class AtomicType:
    """Atomic type of a tuple of distinct elements: its E-facts matrix.

    ``facts`` lists E(x_i, x_j) truth values row-major (i outer, j inner,
    both over the tuple positions).  ``index`` is the position of the type
    in the canonical enumeration: the empty type first, then all types of
    each length in turn, types of one length ordered by reading the facts
    vector as a binary number (first listed fact most significant,
    false < true).  Indices start at 1.
    """
    length: int
    facts: tuple

    @property
    def index(self):
        value = 0
        for f in self.facts:
            value = (value << 1) | (1 if f else 0)
        return type_start_index(self.length) + value


def type_start_index(n):
    """Index of the first type of tuple length n."""
    return 1 + sum(1 << (j * j) for j in range(n))


def type_count(n):
    return 1 << (n * n)


def atomic_type_of(graph, tuple_):
    """Atomic type of a tuple of *distinct* vertices of a digraph."""
    t = tuple(tuple_)
    if len(set(t)) != len(t):
        raise PreconditionError(f"tuple {t!r} has repeated entries")
    for v in t:
        if v not in set(graph.universe):
            raise PreconditionError(f"{v!r} is not a vertex")
    facts = tuple(graph.rel("E", (a, b)) for a in t for b in t)
    return AtomicType(len(t), facts)


def type_from_index(m):
    """Inverse of ``AtomicType.index``."""
    if m < 1:
        raise PreconditionError("type indices start at 1")
    n = 0
    while type_start_index(n + 1) <= m:
        n += 1
    value = m - type_start_index(n)
    nbits = n * n
    facts = tuple(bool((value >> (nbits - 1 - i)) & 1) for i in range(nbits))
    return AtomicType(n, facts)


def tuples_of_type(graph, atype):
    """All distinct-vertex tuples of ``graph`` realizing the given type."""
    out = []
    for t in itertools.permutations(graph.universe, atype.length):
        if atomic_type_of(graph, t) == atype:
            out.append(t)
    return out


# ---------------------------------------------------------------------------
# isomorphism


def _refine_colors(s):
    """Colour refinement on a structure; returns element -> colour id."""
    colors = {}
    for e in s.universe:
        profile = []
        for name in sorted(s.signature):
            arity = s.signature[name]
            for pos in range(arity):
                profile.append(sum(1 for t in s.relations[name] if t[pos] == e))
        colors[e] = tuple(profile)
    incident = {e: [] for e in s.universe}
    for name in sorted(s.signature):
        for t in sorted(s.relations[name], key=repr):
            for pos, e in enumerate(t):
                incident[e].append((name, pos, t))
    while True:
        new = {}
        for e in s.universe:
            sig = sorted((name, pos, tuple(colors[x] for x in t))
                         for name, pos, t in incident[e])
            new[e] = (colors[e], tuple(sig))
        # canonicalize to small ids to keep the tuples from growing
        ids = {}
        flat = {}
        for e in sorted(s.universe, key=lambda x: (repr(new[x]), repr(x))):
            flat[e] = ids.setdefault(new[e], len(ids))
        if len(set(flat.values())) == len(set(colors.values())):
            return flat
        colors = flat


def iso_check(a, b, max_size=12):
    """Search for an isomorphism between two structures.

    Returns a dict mapping A's universe onto B's, or None if the structures
    are not isomorphic.  ``max_size`` guards against accidental huge
    searches; pass None to lift the cap.
    """
    if sorted(a.signature.items()) != sorted(b.signature.items()):
        return None
    if len(a.universe) != len(b.universe):
        return None
    if max_size is not None and len(a.universe) > max_size:
        raise PreconditionError(
            f"structures larger than {max_size} elements; pass max_size=None")
    for name in a.signature:
        if len(a.relations[name]) != len(b.relations[name]):
            return None
    ca = _refine_colors(a)
    cb = _refine_colors(b)
    by_color_a = {}
    for e, c in ca.items():
        by_color_a.setdefault(c, []).append(e)
    by_color_b = {}
    for e, c in cb.items():
        by_color_b.setdefault(c, []).append(e)
    if sorted((c, len(v)) for c, v in by_color_a.items()) != \
       sorted((c, len(v)) for c, v in by_color_b.items()):
        return None

    incident_a = {e: [] for e in a.universe}
    for name in a.signature:
        for t in a.relations[name]:
            for e in set(t):
                incident_a[e].append((name, t))

    order = sorted(a.universe, key=lambda e: (len(by_color_a[ca[e]]), repr(ca[e]), repr(e)))
    mapping = {}
    used = set()

    def consistent(e, img):
        for name, t in incident_a[e]:
            if all(x in mapping or x == e for x in t):
                timg = tuple(mapping.get(x, img) if x != e else img for x in t)
                if timg not in b.relations[name]:
                    return False
        # reverse direction: counts per relation among the mapped part must
        # agree, checked fully below once the map is total
        return True

    def backtrack(i):
        if i == len(order):
            return True
        e = order[i]
        for img in sorted(by_color_b[ca[e]], key=repr):
            if img in used:
                continue
            if consistent(e, img):
                mapping[e] = img
                used.add(img)
                if backtrack(i + 1):
                    return True
                del mapping[e]
                used.discard(img)
        return False

    if not backtrack(0):
        return None
    # the forward check plus equal relation sizes makes the map an isomorphism,
    # but verify both directions explicitly
    for name in a.signature:
        fwd = {tuple(mapping[x] for x in t) for t in a.relations[name]}
        if fwd != b.relations[name]:
            return None
    return dict(mapping)
