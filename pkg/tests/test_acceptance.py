"""Acceptance criteria on finite truncations. Each test prints one PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s`, or `python3 tests/test_acceptance.py`.
"""

import itertools
import random
import sys
import time
from fractions import Fraction

import pytest

from topos4 import algebra, constructions as C, frames, genspace
from topos4.algebra import validates, evaluate
from topos4.formula import (Letter, Top, Bottom, Not, And, Or, Implies, Iff, Diamond, Box,
                            parse, godel_translate)
from topos4.frames import FrameMap, check_p_morphism, mask_of, bits
from topos4.genspace import FiniteTopology, GeneralStructure, GluingSpec

SEED = 0
S4_AXIOMS = [parse(t) for t in C.S4_AXIOMS]
S42 = parse("<>[]p -> []<>p")


def report(number, title, ok, detail, elapsed, budget):
    within = elapsed < budget
    verdict = "PASS" if ok and within else "FAIL"
    line = f"{verdict} criterion {number:2d}: {title} | {detail} | {elapsed:.2f}s (budget {budget}s)"
    print(line, flush=True)
    return ok and within


# ---------------------------------------------------------------- helpers

def random_opens(rng, n):
    """Topology generated by a few random subsets under union and intersection."""
    full = (1 << n) - 1
    opens = {0, full} | {rng.randrange(full + 1) for _ in range(rng.randint(0, 4))}
    while True:
        new = {a | b for a in opens for b in opens} | {a & b for a in opens for b in opens}
        if new <= opens:
            return opens
        opens |= new


def random_topology(rng, n):
    return FiniteTopology(n, random_opens(rng, n))


def random_frame(rng, n, density=0.35):
    pairs = [(a, b) for a in range(n) for b in range(n) if rng.random() < density]
    return frames.reflexive_transitive_closure(n, pairs)


def random_formula(rng, depth, names=("p", "q")):
    if depth == 0 or rng.random() < 0.25:
        return rng.choice([Letter(n) for n in names] + [Top(), Bottom()])
    kind = rng.randrange(7)
    if kind < 3:
        return [Not, Box, Diamond][kind](random_formula(rng, depth - 1, names))
    op = [And, Or, Implies, Iff][kind - 3]
    return op(random_formula(rng, depth - 1, names), random_formula(rng, depth - 1, names))


def intuitionistic_formulas(max_size):
    """Every formula over p, q, F with ~, &, |, -> of size at most max_size."""
    by_size = {1: [Letter("p"), Letter("q"), Bottom()]}
    for n in range(2, max_size + 1):
        out = [Not(a) for a in by_size[n - 1]]
        for k in range(1, n - 1):
            for a in by_size[k]:
                for b in by_size[n - 1 - k]:
                    out += [And(a, b), Or(a, b), Implies(a, b)]
        by_size[n] = out
    return [f for n in sorted(by_size) for f in by_size[n]]


# ------------------------------------------------------------ criteria

def criterion_1():
    rng = random.Random(SEED)
    failures = 0
    for _ in range(200):
        space = GeneralStructure(random_topology(rng, rng.randint(1, 5)))
        failures += sum(not validates(space, ax).valid for ax in S4_AXIOMS)
    return failures == 0, f"200 topologies x 4 axioms, {failures} failures"


def criterion_2():
    rng = random.Random(SEED + 2)
    bad = []
    for case in range(100):
        n = rng.randint(1, 6)
        space = GeneralStructure(random_topology(rng, n))
        rep = genspace.check_descriptive(space)
        if not (rep.differentiated and rep.tight):
            bad.append((case, "not tight reduced"))
            continue
        frame_side = genspace.to_frame(space)
        if genspace.to_space(frame_side).base != space.base:
            bad.append((case, "topology"))
        if genspace.to_frame(genspace.to_space(frame_side)).base != frame_side.base:
            bad.append((case, "relation"))
        if genspace.closure_agreement_failure(space) is not None:
            bad.append((case, "closure"))
    return not bad, f"100 spaces, problems {bad[:3]}"


def pullback_commutes(fmap):
    src, tgt = fmap.source, fmap.target
    for a in range(1 << tgt.size):
        pre = fmap.preimage(a)
        if fmap.preimage(tgt.full & ~a) != src.full & ~pre:
            return False
        if fmap.preimage(tgt.preimage(a)) != src.preimage(pre):
            return False
        for b in range(1 << tgt.size):
            if fmap.preimage(a | b) != pre | fmap.preimage(b):
                return False
    return True


def criterion_3():
    rng = random.Random(SEED + 3)
    agree = positives = 0
    for case in range(500):
        source = random_frame(rng, rng.randint(1, 4))
        if case % 2:
            # projection onto the skeleton, or onto a random coarsening
            if case % 4 == 1:
                partition = [c.worlds for c in frames.clusters(source)]
            else:
                labels = [rng.randrange(source.size) for _ in range(source.size)]
                partition = [[w for w in range(source.size) if labels[w] == k] for k in set(labels)]
            target, _ = frames.quotient(source, partition)
            target = frames.reflexive_transitive_closure(target.size, target.relation)
            owner = {w: k for k, c in enumerate(sorted(partition, key=min)) for w in c}
            assignment = [owner[w] for w in range(source.size)]
        else:
            target = random_frame(rng, rng.randint(1, source.size))
            assignment = list(range(target.size)) + [rng.randrange(target.size)
                                                     for _ in range(source.size - target.size)]
            rng.shuffle(assignment)
        fmap = FrameMap(source, target, assignment)
        assert fmap.is_onto()
        relational = check_p_morphism(fmap).ok
        positives += relational
        agree += relational == pullback_commutes(fmap)
    return agree == 500, f"{agree}/500 agree, {positives} p-morphisms"


def criterion_4():
    catalog = [f for n in range(1, 5) for f in frames.all_preorders(n) if frames.roots(f)]
    iso_classes = [f for f in frames.preorders_up_to_iso(4) if frames.roots(f)]
    bad = []
    for frame in catalog:
        rep = C.verify_comb_pmorphism(C.tcomb_labeling(frame, frame.size + 4), frame)
        if not (rep.ok and rep.margin >= 3 and rep.image == set(range(frame.size))):
            bad.append(frame)
    ok = not bad and len(catalog) >= 50
    return ok, (f"{len(catalog)} labelled rooted frames ({len(iso_classes)} up to iso), "
                f"{len(bad)} failures")


def criterion_5():
    construction = C.interval_construction(5)
    rep = C.verify_interval_lemmas(construction)
    lengths = all(rep.max_lengths[n] == Fraction(1, 3 ** (n + 1)) for n in range(6))
    coverage = all(
        set(itertools.product((0, 1), repeat=k + 1)) <= {u.label for u in construction.levels[k]}
        for k in range(5))
    zero = C.label_of_point(0, 8) == [()]
    half = all(C.label_of_point(Fraction(1, 2), k) == [(1,) * i for i in range(k + 1)] for k in range(9))
    ok = rep.ok and lengths and coverage and zero and half
    return ok, f"lengths={lengths} coverage={coverage} root={zero} half={half} lemmas={rep.ok}"


def subspace(structure, worlds):
    """Open subspace on the given points, reindexed, with the trace field."""
    index = {w: i for i, w in enumerate(worlds)}
    u = mask_of(worlds)
    reindex = lambda m: mask_of(index[w] for w in bits(m))
    opens = [reindex(o) for o in structure.topology().opens if o & ~u == 0]
    members = {reindex(a & u) for a in structure.field.members}
    return GeneralStructure(FiniteTopology(len(worlds), opens), members)


def random_part(rng):
    n = rng.randint(1, 5)
    if rng.random() < 0.5:
        base = random_frame(rng, n)
    else:
        base = random_topology(rng, n)
    if rng.random() < 0.5:
        return GeneralStructure(base)
    return genspace.generated_structure(base, [rng.randrange(1 << n) for _ in range(2)])


def random_gluing(rng):
    while True:
        parts = [random_part(rng) for _ in range(rng.randint(2, 3))]
        first = parts[0]
        opens = [o for o in first.topology().opens if o and bin(o).count("1") <= 2]
        if not opens:
            continue
        worlds = bits(rng.choice(opens))
        shared = subspace(first, worlds)
        embeddings = [worlds]
        for part in parts[1:]:
            embeddings.append(rng.sample(range(part.carrier_size), min(len(worlds), part.carrier_size)))
        spec = GluingSpec(parts, shared, embeddings)
        try:
            genspace.validate_gluing(spec)
        except genspace.GluingError:
            continue
        return spec


def criterion_6():
    rng = random.Random(SEED + 6)
    passed = 0
    for _ in range(50):
        spec = random_gluing(rng)
        result = genspace.glue(spec)
        total, _ = genspace.space_sum(spec.parts)
        onto = set(result.rho) == set(range(result.structure.carrier_size))
        passed += onto and genspace.check_interior_map(result.rho, total, result.structure).ok
    return passed == 50, f"{passed}/50 gluings give an onto interior map"


def criterion_7():
    fork_refutes = not validates(GeneralStructure(frames.make_fork(1)), S42).valid
    catalog = [f for n in range(1, 5) for f in frames.all_preorders(n)]
    considered = bad = 0
    for frame in catalog:
        structure = GeneralStructure(frame)
        if not genspace.check_descriptive(structure).descriptive:
            continue
        if not algebra.is_connected(structure.field) or not validates(structure, S42).valid:
            continue
        considered += 1
        bad += len(frames.maximal_clusters(frame)) != 1
    ok = fork_refutes and bad == 0 and considered > 0
    return ok, (f"F_1 refutes={fork_refutes}; {considered} connected descriptive S4.2 frames "
                f"of {len(catalog)}, {bad} with several maximal clusters")


def criterion_8():
    rng = random.Random(SEED + 8)
    triples = attempts = passed = 0
    while triples < 100:
        attempts += 1
        frame = random_frame(rng, rng.randint(1, 8))
        phi = random_formula(rng, 4)
        structure = GeneralStructure(frame)
        val = {n: rng.randrange(1 << frame.size) for n in ("p", "q")}
        refuting = bits(frame.full & ~evaluate(phi, val, structure.field))
        if not refuting:
            continue
        triples += 1
        result = C.cgfp_select(structure, phi, val, rng.choice(refuting))
        passed += result.truth_lemma and result.refuted
    return passed == 100, f"{passed}/100 selections keep the truth lemma ({attempts} draws)"


def criterion_9():
    posets = [f for f in frames.preorders_up_to_iso(4) if frames.is_antisymmetric(f)]
    formulas = intuitionistic_formulas(7)
    translated = [godel_translate(f) for f in formulas]
    mismatches = []
    for poset in posets:
        structure = GeneralStructure(poset)
        heyting = algebra.HeytingAlgebra(structure.field)
        for phi, tr in zip(formulas, translated):
            if algebra.heyting_validates(heyting, phi).valid != validates(structure, tr).valid:
                mismatches.append((poset, phi))
    fork = GeneralStructure(frames.make_fork(1))
    wem = parse("~p | ~~p")
    fork_case = (not algebra.heyting_validates(algebra.HeytingAlgebra(fork.field), wem).valid
                 and not validates(fork, godel_translate(wem)).valid)
    ok = not mismatches and fork_case
    return ok, (f"{len(posets)} posets x {len(formulas)} formulas, {len(mismatches)} mismatches; "
                f"~p | ~~p fails on the 2-fork: {fork_case}")


def criterion_10():
    refuters = [
        C.RefutationFrame(frames.make_chain(2), [1], parse("p -> []p"), {"p": 0b01}, 0),
        C.RefutationFrame(frames.make_fork(1), [1], S42, {"p": 0b010}, 0),
        C.RefutationFrame(frames.make_cluster(2), [0, 1], parse("[]([](p -> []p) -> p) -> p"),
                          {"p": 0b01}, 1),
    ]
    result = C.pipeline_not_s42(refuters)
    rep = C.verify_pipeline(result, refuters)
    rng = random.Random(SEED + 10)
    collapses = 0
    for _ in range(200):
        cluster = frames.make_cluster(rng.randint(1, 5))
        phi = random_formula(rng, 4)
        val = {n: rng.randrange(1 << cluster.size) for n in ("p", "q")}
        before = evaluate(phi, val, algebra.powerset_field(cluster.size, cluster.preimage))
        out = C.cluster_collapse(cluster, phi, val)
        after = evaluate(phi, out.valuation, algebra.powerset_field(out.frame.size, out.frame.preimage))
        collapses += out.preserved and out.pmorphism_ok and out.projection.preimage(after) == before
    ok = rep.ok and collapses == 200
    return ok, (f"connected={rep.connected} refutations={rep.refutations} "
                f"axioms={all(rep.axioms.values())}; collapse preserved {collapses}/200")


CRITERIA = [
    (1, "S4 axioms valid on random finite topologies", criterion_1, 10),
    (2, "frame/space round trip on tight reduced spaces", criterion_2, 10),
    (3, "p-morphism iff pullback is a closure algebra map", criterion_3, 30),
    (4, "t-comb p-morphism on rooted frames", criterion_4, 30),
    (5, "interval construction at depth 5", criterion_5, 10),
    (6, "gluing maps are onto interior maps", criterion_6, 10),
    (7, "S4.2 and connectedness force one maximal cluster", criterion_7, 60),
    (8, "CGFP truth lemma", criterion_8, 10),
    (9, "Goedel translation correspondence", criterion_9, 300),
    (10, "not-S4.2 pipeline and cluster collapse", criterion_10, 30),
]


@pytest.mark.parametrize("number, title, check, budget", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(number, title, check, budget, capsys):
    start = time.perf_counter()
    ok, detail = check()
    elapsed = time.perf_counter() - start
    with capsys.disabled():
        print()
        passed = report(number, title, ok, detail, elapsed, budget)
    assert passed, detail


if __name__ == "__main__":
    results = []
    for number, title, check, budget in CRITERIA:
        start = time.perf_counter()
        ok, detail = check()
        results.append(report(number, title, ok, detail, time.perf_counter() - start, budget))
    sys.exit(0 if all(results) else 1)
