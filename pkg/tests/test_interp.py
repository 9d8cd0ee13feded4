"""Interpretation checking: built-in constructions and fault detection."""

import pytest

from structcode.core import (Digraph, FinLinOrder, Or, PreconditionError,
                             Structure)
from structcode.interp import (InterpretationSpec, builtin_int_in_nat,
                               check_interpretation, marker_interp, slot_var,
                               trivial_interp)


class TestSlotVar:
    def test_naming(self):
        assert slot_var(1, 1) == "t1_1"
        assert slot_var(2, 3) == "t2_3"


class TestIntInNat:
    def test_passes_small(self):
        carrier, spec, target = builtin_int_in_nat(4)
        rep = check_interpretation(carrier, spec, target, max_arity=3, seed=0)
        assert rep.passed
        assert rep.class_count == 9          # classes for -4 .. 4
        assert rep.iso is not None

    def test_class_count_grows_linearly(self):
        carrier, spec, target = builtin_int_in_nat(6)
        rep = check_interpretation(carrier, spec, target, max_arity=3, seed=0,
                                   congruence_samples=40)
        assert rep.passed and rep.class_count == 13

    def test_fault_injection_detected(self):
        carrier, spec, target = builtin_int_in_nat(4)
        # drop one pair of the equivalence: complementarity must break
        broken = InterpretationSpec(
            domain=spec.domain,
            sim_pos={k: Or((v, v)) for k, v in spec.sim_pos.items()},
            sim_neg={k: Or(()) for k in spec.sim_neg},   # never negative
            rel_pos=spec.rel_pos, rel_neg=spec.rel_neg,
            target_signature=spec.target_signature)
        rep = check_interpretation(carrier, broken, target, max_arity=3)
        assert not rep.passed
        assert any(kind == "sim-not-complementary" for kind, _ in rep.failures)

    def test_wrong_target_detected(self):
        carrier, spec, _ = builtin_int_in_nat(4)
        wrong = FinLinOrder(range(9))        # same size, different signature
        wrong = Structure(range(8), {"plus": 3, "times": 3}, {})
        rep = check_interpretation(carrier, spec, wrong, max_arity=3)
        assert not rep.passed
        assert any(kind == "quotient-not-isomorphic"
                   for kind, _ in rep.failures)


class TestTrivial:
    def test_round_trip(self):
        a = Digraph([0, 1, 2], [(0, 1), (1, 2)])
        b = FinLinOrder("pq")
        spec, rep = trivial_interp(a, b)
        assert rep.passed
        assert rep.class_count == len(a.universe)
        assert sorted(spec.target_signature) == ["E"]

    def test_empty_carrier_rejected(self):
        a = Digraph([0], [])
        with pytest.raises(PreconditionError):
            trivial_interp(a, Structure([], {}, {}))


class TestMarkerInterp:
    def test_round_trip(self):
        for g in (Digraph([0, 1], [(0, 1)]),
                  Digraph([0, 1, 2], [(0, 1), (2, 1), (1, 0)])):
            carrier, spec, target = marker_interp(g)
            rep = check_interpretation(carrier, spec, target, max_arity=2)
            assert rep.passed
            assert rep.class_count == len(g.universe)

    def test_detects_tampered_carrier(self):
        g = Digraph([0, 1], [(0, 1)])
        carrier, spec, target = marker_interp(g)
        # removing one polygon edge orphans a base pair
        edges = sorted(map(tuple, carrier.undirected_edges()))
        from structcode.core import UGraph
        for i in range(len(edges)):
            smaller = UGraph(carrier.vertices, edges[:i] + edges[i + 1:])
            rep = check_interpretation(smaller, spec, target, max_arity=2)
            if not rep.passed:
                return
        pytest.fail("no single-edge deletion was detected")


class TestPrecondition:
    def test_bad_max_arity(self):
        carrier, spec, target = builtin_int_in_nat(2)
        with pytest.raises(PreconditionError):
            check_interpretation(carrier, spec, target, max_arity=0)
