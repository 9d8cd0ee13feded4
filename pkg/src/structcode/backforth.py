"""Finite-level back-and-forth equivalence with tuple moves.

``bf_equiv`` decides the symmetric relation ~gamma between tuples of finite
structures by memoized game search.  At level 0 two tuples are equivalent
when they satisfy the same atomic formulas; at level gamma+1, every move
tuple on either side must admit a response on the other at level gamma.
Move tuples range over distinct elements outside the current tuple — a
duplicator mirrors repeats and previously played elements — and their
length is capped by the declared move bound, which must cover both
universes.

``phi_tuple`` and ``phi_pair`` generate the level-tagged formulas whose
truth reproduces the game verdict: the tuple formula is specific to one
structure and pinned tuple, the pair formula is uniform in the structure.

``interval_equiv`` checks tuples in finite linear orders interval by
interval, and the two ``lg_*`` certifiers apply the shape machinery of
``fslin`` to produce sound (but deliberately incomplete) verdicts for
tuples of order elements built from a digraph.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .core import (And, BigAnd, BigOr, Eq, Exists, FinLinOrder, Forall, Not,
                   Or, PreconditionError, Rel, conj, disj)
from .fslin import fs_compare, mentions, min_length_in_interval, shape, sort_elements


# ---------------------------------------------------------------------------
# fingerprints: atomic data of a tuple, as a hashable value


def fingerprint(struct, tup):
    eq = tuple(tup.index(x) for x in tup)
    rels = []
    for name in sorted(struct.signature):
        ar = struct.signature[name]
        bits = tuple(struct.rel(name, args)
                     for args in itertools.product(tup, repeat=ar))
        rels.append((name, bits))
    return (eq, tuple(rels))


def _matching_extensions(a, atup, ext, b, btup):
    """All tuples d over b with fingerprint(b, btup+d) = fingerprint(a, atup+ext).

    Yields candidates by depthwise extension, pruning on every atomic fact
    that touches the newest position.
    """
    na = len(atup)
    full = atup + ext

    def facts_ok(chosen, c, i):
        # i = absolute position of c in the b-side tuple under construction
        row = btup + chosen + (c,)
        for name in sorted(b.signature):
            ar = b.signature[name]
            for pos in itertools.product(range(i + 1), repeat=ar):
                if i not in pos:
                    continue
                if a.rel(name, tuple(full[j] for j in pos)) != \
                        b.rel(name, tuple(row[j] for j in pos)):
                    return False
        return True

    def rec(chosen):
        i = na + len(chosen)
        if len(chosen) == len(ext):
            yield chosen
            return
        want = full.index(full[i])
        if want < i:
            # repeated element: the response is forced
            forced = (btup + chosen)[want]
            if facts_ok(chosen, forced, i):
                yield from rec(chosen + (forced,))
            return
        used = set(btup + chosen)
        for c in b.universe:
            if c in used:
                continue
            if facts_ok(chosen, c, i):
                yield from rec(chosen + (c,))

    yield from rec(())


def bf_equiv(a, atup, b, btup, gamma, bound=None):
    """Decide (a, atup) ~gamma (b, btup) by memoized game search."""
    atup, btup = tuple(atup), tuple(btup)
    if len(atup) != len(btup):
        raise PreconditionError("tuples must have equal length")
    need = max(len(a.universe), len(b.universe))
    if bound is None:
        bound = need
    if bound < need:
        raise PreconditionError(
            f"move bound {bound} below max structure size {need}")
    memo = {}

    def go(at, bt, g):
        key = (at, bt, g)
        if key in memo:
            return memo[key]
        memo[key] = True      # coinductive default, sound for finite gamma
        res = fingerprint(a, at) == fingerprint(b, bt)
        if res and g > 0:
            res = _half(a, at, b, bt, g) and _half(b, bt, a, at, g)
        memo[key] = res
        return res

    def _half(src, st, dst, dt, g):
        # every spoiler move on the src side must have a dst response;
        # sorted distinct fresh tuples suffice: permuted moves are answered
        # by the permuted response, repeats and old elements are mirrored
        fresh = sorted(set(src.universe) - set(st), key=repr)
        for ln in range(1, min(bound, len(fresh)) + 1):
            for move in itertools.combinations(fresh, ln):
                if src is a:
                    ok = any(go(st + move, dt + resp, g - 1)
                             for resp in _matching_extensions(src, st, move, dst, dt))
                else:
                    ok = any(go(dt + resp, st + move, g - 1)
                             for resp in _matching_extensions(src, st, move, dst, dt))
                if not ok:
                    return False
        # a dst-side surplus of fresh elements is caught when the roles
        # swap: the longer move then finds no matching extension
        return True

    return go(atup, btup, gamma)


def distinguishing_move(a, atup, b, btup, gamma, bound=None):
    """Evidence for a negative bf_equiv verdict, or None when equivalent.

    Returns ("atomic", fp_a, fp_b) for a level-0 mismatch, otherwise
    ("a"|"b", move) for an unanswerable spoiler move on that side.
    """
    atup, btup = tuple(atup), tuple(btup)
    if bf_equiv(a, atup, b, btup, gamma, bound):
        return None
    fa, fb = fingerprint(a, atup), fingerprint(b, btup)
    if fa != fb:
        return ("atomic", fa, fb)
    for side, src, st, dst, dt in (("a", a, atup, b, btup),
                                   ("b", b, btup, a, atup)):
        fresh = sorted(set(src.universe) - set(st), key=repr)
        for ln in range(1, len(fresh) + 1):
            for move in itertools.combinations(fresh, ln):
                answered = any(
                    bf_equiv(a, atup + (move if side == "a" else resp),
                             b, btup + (resp if side == "a" else move),
                             gamma - 1, bound)
                    for resp in _matching_extensions(src, st, move, dst, dt))
                if not answered:
                    return (side, move)
    return None


# ---------------------------------------------------------------------------
# formula generators


def _var(i):
    return f"x{i + 1}"


def _atomic_diagram(struct, tup, offset=0):
    """Quantifier-free diagram of a tuple over variables x{offset+1}, ..."""
    n = len(tup)
    xs = [_var(offset + i) for i in range(n)]
    parts = []
    for i, j in itertools.combinations(range(n), 2):
        lit = Eq(xs[i], xs[j])
        parts.append(lit if tup[i] == tup[j] else Not(lit))
    for name in sorted(struct.signature):
        ar = struct.signature[name]
        for pos in itertools.product(range(n), repeat=ar):
            lit = Rel(name, tuple(xs[p] for p in pos))
            parts.append(lit if struct.rel(name, tuple(tup[p] for p in pos))
                         else Not(lit))
    return conj(parts)


def phi_tuple(struct, tup, gamma, bound=None):
    """The level-2*gamma formula isolating the ~gamma class of a tuple.

    Evaluating it at a tuple of any structure in the same signature agrees
    with ``bf_equiv`` against (struct, tup).
    """
    tup = tuple(tup)
    if bound is None:
        bound = len(struct.universe)
    if bound < len(struct.universe):
        raise PreconditionError("move bound below structure size")
    memo = {}

    def build(t, g):
        key = (t, g)
        if key in memo:
            return memo[key]
        if g == 0:
            out = _atomic_diagram(struct, t, 0)
            memo[key] = out
            return out
        n = len(t)
        fresh = sorted(set(struct.universe) - set(t), key=repr)
        # the diagram is implied by the nested base cases only when fresh
        # extensions exist; assert it outright so exhausted tuples still
        # carry their atomic constraints
        parts = [_atomic_diagram(struct, t, 0)]
        max_ln = min(bound, len(fresh))
        for ln in range(1, max_ln + 1):
            ys = tuple(_var(n + i) for i in range(ln))
            moves = list(itertools.permutations(fresh, ln))
            for move in moves:
                parts.append(Exists(ys, build(t + move, g - 1)))
            xs = [_var(i) for i in range(n)]
            stale = disj([Eq(u, v) for u, v in itertools.combinations(ys, 2)] +
                         [Eq(y, x) for y in ys for x in xs])
            parts.append(Forall(ys, BigOr(tuple(
                [stale] + [build(t + move, g - 1) for move in moves]))))
        if max_ln < bound:
            # no fresh tuple of length max_ln + 1 exists on this side
            ln = max_ln + 1
            ys = tuple(_var(n + i) for i in range(ln))
            xs = [_var(i) for i in range(n)]
            stale = disj([Eq(u, v) for u, v in itertools.combinations(ys, 2)] +
                         [Eq(y, x) for y in ys for x in xs])
            parts.append(Forall(ys, BigOr((stale,))))
        out = BigAnd(tuple(parts))
        memo[key] = out
        return out

    return build(tup, gamma)


def phi_pair(signature, n, gamma, bound):
    """Uniform formula: a structure satisfies it at (x-tuple, y-tuple) of
    length n each exactly when the two tuples are ~gamma there.
    """
    def xs(length):
        return [_var(i) for i in range(length)]

    def ys(length):
        return [f"y{i + 1}" for i in range(length)]

    def atoms(vs):
        out = [Eq(vs[i], vs[j]) for i, j in itertools.combinations(range(len(vs)), 2)]
        for name in sorted(signature):
            ar = signature[name]
            out += [Rel(name, tuple(vs[p] for p in pos))
                    for pos in itertools.product(range(len(vs)), repeat=ar)]
        return out

    def build(length, g):
        if g == 0:
            parts = []
            for px, py in zip(atoms(xs(length)), atoms(ys(length))):
                parts.append(Or((Not(px), py)))
                parts.append(Or((Not(py), px)))
            return conj(parts)
        parts = []
        for ln in range(1, bound + 1):
            us = tuple(xs(length + ln)[length:])
            vs = tuple(ys(length + ln)[length:])
            inner = build(length + ln, g - 1)
            parts.append(Forall(us, Exists(vs, inner)))
            parts.append(Forall(vs, Exists(us, inner)))
        return BigAnd(tuple(parts))

    return build(n, gamma)


# ---------------------------------------------------------------------------
# linear orders: interval decomposition


def interval_equiv(a, atup, b, btup, gamma):
    """Tuple equivalence in finite linear orders, interval by interval.

    Returns (verdict, per-interval list of booleans).
    """
    atup, btup = tuple(atup), tuple(btup)
    if len(atup) != len(btup):
        raise PreconditionError("tuples must have equal length")
    for t, s in ((atup, a), (btup, b)):
        idx = [s.elements.index(x) for x in t]
        if any(i >= j for i, j in zip(idx, idx[1:])):
            raise PreconditionError("tuples must be strictly increasing")

    def intervals(order, tup):
        elems = list(order.elements)
        cuts = [elems.index(x) for x in tup]
        spans = []
        prev = -1
        for c in cuts + [len(elems)]:
            spans.append(elems[prev + 1:c])
            prev = c
        return [FinLinOrder(span) for span in spans]

    per = []
    for ia, ib in zip(intervals(a, atup), intervals(b, btup)):
        per.append(bf_equiv(ia, (), ib, (), gamma))
    return all(per), per


# ---------------------------------------------------------------------------
# certificates for tuples in L(G)


@dataclass(frozen=True)
class Certificate:
    verdict: str                 # "Equivalent" | "Distinguished" | "Unknown"
    evidence: tuple = ()


def _mention_concat(elems):
    """Concatenated mentions of the sorted tuple, first occurrences only."""
    out = []
    for e in sort_elements(elems):
        for v in mentions(e):
            if v not in out:
                out.append(v)
    return tuple(out)


def lg_certify(g, t1, t2, gamma):
    """Sound, incomplete comparison of two tuples of order elements.

    Equivalent when the shapes agree and the mentioned vertex tuples are
    game-equivalent in G; Distinguished by an atomic order mismatch, by gap
    sizes (level >= 1) or by positional block sizes (level >= 2); Unknown
    otherwise.
    """
    t1, t2 = tuple(t1), tuple(t2)
    if len(t1) != len(t2):
        raise PreconditionError("tuples must have equal length")
    s1, s2 = shape(g, t1), shape(g, t2)
    if s1.order != s2.order:
        return Certificate("Distinguished", ("order", s1.order, s2.order))
    if gamma >= 1 and s1.gaps != s2.gaps:
        return Certificate("Distinguished", ("gaps", s1.gaps, s2.gaps))
    if gamma >= 2 and s1.blocks != s2.blocks:
        return Certificate("Distinguished", ("blocks", s1.blocks, s2.blocks))
    if s1 == s2:
        m1, m2 = _mention_concat(t1), _mention_concat(t2)
        if len(m1) == len(m2) and bf_equiv(g, m1, g, m2, gamma):
            return Certificate("Equivalent", ("shape+mentions", m1, m2))
    return Certificate("Unknown")


def lg_concat_certify(g, pair1, pair2, gamma):
    """Equivalence of concatenated tuples split by length-2 separators.

    Each argument is a pair of tuples with the first wholly left of the
    second.  The verdict is Equivalent only when both halves certify as
    Equivalent and a length-2 element exists between the halves on both
    sides; it is never Distinguished.
    """
    (b1, b2), (c1, c2) = pair1, pair2
    for left, right in ((b1, b2), (c1, c2)):
        if not (left and right):
            raise PreconditionError("both parts must be nonempty")
        if any(fs_compare(x, y) >= 0 for x in left for y in right):
            raise PreconditionError("first part must lie wholly left of second")
    first = lg_certify(g, b1, c1, gamma)
    second = lg_certify(g, b2, c2, gamma)
    if first.verdict == "Equivalent" and second.verdict == "Equivalent":
        ok = True
        for left, right in ((b1, b2), (c1, c2)):
            x = sort_elements(left)[-1]
            y = sort_elements(right)[0]
            k, _ = min_length_in_interval(g, x, y)
            if k != 0:
                ok = False
        if ok:
            return Certificate("Equivalent", ("parts", first.evidence, second.evidence))
    return Certificate("Unknown")
