import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from topos4 import algebra
from topos4.algebra import (SetField, powerset_field, field_generate, boolean_closure, evaluate,
                            validates, check_closure_axioms, ClosureAxiomError, CapExceeded,
                            HeytingAlgebra, heyting_validates, is_connected, is_well_connected)
from topos4.formula import parse, letters
from topos4.frames import make_fork, make_chain, make_cluster, make_discrete, FiniteFrame
from topos4.genspace import FiniteTopology
import oracles
from strategies import formulas, preorders

S42 = parse("<>[]p -> []<>p")
GRZ = parse("[]([](p -> []p) -> p) -> p")


def frame_algebra(frame):
    return powerset_field(frame.size, frame.preimage)


@settings(max_examples=300)
@given(preorders(4), formulas(names=("p", "q")), st.data())
def test_evaluation_matches_kripke_semantics(frame, phi, data):
    n = frame.size
    val = {name: data.draw(st.integers(0, frame.full)) for name in ("p", "q")}
    got = evaluate(phi, val, frame_algebra(frame))
    sets = {k: oracles.from_mask(v) for k, v in val.items()}
    want = {w for w in range(n) if oracles.kripke_true(frame.relation, n, phi, sets, w)}
    assert oracles.from_mask(got) == want


@settings(max_examples=100)
@given(preorders(3), formulas(names=("p", "q"), max_leaves=6))
def test_validity_matches_kripke_oracle(frame, phi):
    report = validates(frame_algebra(frame), phi)
    assert report.valid == oracles.kripke_valid(frame.relation, frame.size, phi)
    if not report.valid:
        value = evaluate(phi, report.valuation, frame_algebra(frame))
        assert not value >> report.world & 1


@pytest.mark.parametrize("seed", range(20))
def test_topological_closure_matches_intersection_of_closed_sets(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 5)
    opens = oracles.random_topology_opens(n, rng)
    topo = FiniteTopology(n, [oracles.to_mask(u) for u in opens])
    assert check_closure_axioms(n, topo.closure) is None
    for a in range(1 << n):
        assert oracles.from_mask(topo.closure(a)) == oracles.closure_of(range(n), opens, oracles.from_mask(a))


def test_closure_axiom_violations():
    assert check_closure_axioms(2, lambda a: a) is None
    assert check_closure_axioms(2, lambda a: 0)[0] == "A<=cA"
    assert check_closure_axioms(1, lambda a: 1)[0] == "c0=0"
    # c({0}) = {0,1}, c({1}) = {1,2}, c({2}) = {2}: not idempotent
    table = {0: 0, 1: 0b011, 2: 0b110, 4: 0b100}
    closure = algebra.table_closure(table)
    assert check_closure_axioms(3, closure)[0] == "ccA=cA"
    # c(A) = A except c({0,1}) = everything: not additive
    assert check_closure_axioms(3, lambda a: 7 if a == 3 else a)[0] == "c(AuB)=cAucB"
    with pytest.raises(ClosureAxiomError):
        field_generate(3, closure, [1])


def test_field_generation():
    chain = make_chain(3)
    f = field_generate(3, chain.preimage, [0b100])
    # {2} generates R^-1({2}) = everything; then its complement {0,1}
    assert f.sorted_members() == [0, 0b011, 0b100, 0b111]
    assert len(boolean_closure(3, [0b001, 0b010])) == 8
    g = field_generate(3, chain.preimage, [0b010])
    assert g.is_powerset()
    with pytest.raises(ValueError):
        SetField(3, [0, 1, 7], chain.preimage)


@given(preorders(4), st.lists(st.integers(0, 15), max_size=3))
def test_generated_field_is_closed(frame, gens):
    gens = [g & frame.full for g in gens]
    f = field_generate(frame.size, frame.preimage, gens, check_axioms=False)
    assert f.violation() is None
    for g in gens:
        assert g in f.members
    atoms = f.atoms()
    assert sum(atoms) == frame.full and len(f) == 2 ** len(atoms)


def test_fork_refutes_s42_with_valuation_m():
    report = validates(frame_algebra(make_fork(1)), S42)
    assert not report.valid
    assert report.valuation == {"p": 0b010}
    assert report.world == 0


def test_cluster_refutes_grz_and_chain_validates_it():
    assert not validates(frame_algebra(make_cluster(2)), GRZ).valid
    assert validates(frame_algebra(make_chain(3)), GRZ).valid


@pytest.mark.parametrize("text", ["<><>p -> <>p", "p -> <>p", "<>(p | q) <-> (<>p | <>q)", "<>F <-> F"])
def test_s4_axioms_valid_on_frames(text):
    for n in range(1, 4):
        from topos4.frames import all_preorders
        for frame in all_preorders(n):
            assert validates(frame_algebra(frame), parse(text)).valid


def test_letter_cap(monkeypatch):
    phi = parse("p & q & r & s & t")
    with pytest.raises(CapExceeded):
        validates(frame_algebra(make_cluster(1)), phi)
    assert validates(frame_algebra(make_cluster(1)), parse("p | ~p"), cap=1).valid
    monkeypatch.setenv("TOPOS4_CAP", "5")
    validates(frame_algebra(make_cluster(1)), phi)
    monkeypatch.setenv("TOPOS4_CAP", "1")
    with pytest.raises(CapExceeded):
        validates(frame_algebra(make_cluster(1)), parse("p -> q"))


def test_connectedness():
    assert is_connected(frame_algebra(make_fork(2)))
    assert is_well_connected(frame_algebra(make_fork(2)))
    assert not is_connected(frame_algebra(make_discrete(2)))
    assert not is_well_connected(frame_algebra(make_discrete(2)))
    # the closures of the two maxima meet in the root
    assert is_well_connected(frame_algebra(make_fork(1)))


def test_coarse_field_hides_two_maximal_clusters():
    # The 2-maximal fork with field {empty, X} is connected and validates S4.2 even
    # though it has two maximal clusters; with the full powerset it refutes S4.2.
    fork = make_fork(1)
    coarse = SetField(3, [0, 7], fork.preimage)
    assert is_connected(coarse)
    assert validates(coarse, S42).valid
    assert not validates(frame_algebra(fork), S42).valid


@given(preorders(4))
def test_connected_iff_path_connected_on_powerset(frame):
    from topos4.frames import is_path_connected
    assert is_connected(frame_algebra(frame)) == is_path_connected(frame)


@given(preorders(4))
def test_well_connected_iff_rooted_on_powerset(frame):
    from topos4.frames import roots
    assert is_well_connected(frame_algebra(frame)) == bool(roots(frame))


def test_heyting_algebra_of_fork():
    h = HeytingAlgebra(frame_algebra(make_fork(1)))
    assert h.elements == [0, 0b010, 0b100, 0b110, 0b111]
    assert h.implies(0b010, 0) == 0b100
    report = heyting_validates(h, parse("~p | ~~p"))
    assert not report.valid
    assert heyting_validates(HeytingAlgebra(frame_algebra(make_chain(3))), parse("~p | ~~p")).valid
    assert not heyting_validates(h, parse("p | ~p")).valid


@settings(max_examples=150)
@given(preorders(3), formulas(modal=False, names=("p", "q"), max_leaves=6))
def test_heyting_validity_matches_intuitionistic_kripke(frame, phi):
    h = HeytingAlgebra(frame_algebra(frame))
    assert heyting_validates(h, phi).valid == oracles.intuitionistic_valid(frame.relation, frame.size, phi)


@given(preorders(4))
def test_residuation_holds_on_upsets(frame):
    assert HeytingAlgebra(frame_algebra(frame), check=False).residuation_failure() is None


def test_field_json_round_trip():
    fork = make_fork(1)
    f = field_generate(3, fork.preimage, [0b010])
    data = json.loads(json.dumps(algebra.field_to_json(f)))
    back = algebra.field_from_json(data)
    assert back == f
    assert all(back.closure(a) == f.closure(a) for a in f.members)


@settings(max_examples=150)
@given(preorders(4), formulas(names=("p", "q"), max_leaves=6))
def test_local_validity_agrees_with_global_enumeration(frame, phi):
    field = frame_algebra(frame)
    names = letters(phi)
    local = algebra._validates_locally(frame, field, phi, names)
    assert local.valid == validates(field, phi).valid
    if not local.valid:
        assert not evaluate(phi, local.valuation, field) >> local.world & 1


def test_large_glued_frame_uses_local_check():
    from topos4.genspace import GeneralStructure
    from topos4.frames import disjoint_union
    big, _ = disjoint_union([make_fork(2)] * 4)
    assert big.size == 16
    assert validates(GeneralStructure(big), parse("<>(p | q) <-> (<>p | <>q)")).valid
    assert not validates(GeneralStructure(big), S42).valid
