"""Acceptance suite: one test per criterion, each printing a pass line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines; every expected value here is either trivial, derived from an
independent oracle, or a frozen exact constant.
"""

import itertools
import random
import time
from fractions import Fraction

from exmech.deterministic import (
    DetMechanism,
    build_groves_queueing,
    build_majority_referendum,
    condition1_counterexamples,
    construct_queueing_witness,
    find_ba_witness,
    satisfies_condition1,
    satisfies_monotonicity,
    satisfies_unanimity,
    validate_witness,
)
from exmech.domains import (
    build_queueing_pref_1,
    build_queueing_pref_2,
    classical_orderings,
    indifferent_ordering,
    is_separable,
)
from exmech.model import DomainKind, DomainSpec, Environment, enumerate_profiles
from exmech.queueing import QueueingParams
from exmech.stochastic import (
    DominanceBlock,
    Lottery,
    build_mixed_counterexample,
    counterexample_preference,
    dominance_dichotomy,
    find_prob_ba_witness,
    fsd,
    is_completely_mixed,
    phi,
    random_completely_mixed_mechanism,
    random_totally_mixed,
    validate_prob_witness,
)
from exmech.domains import enumerate_strict_orderings

FULL_KINDS = (DomainKind.UNRESTRICTED, DomainKind.STRICT, DomainKind.WEAK_ONLY)
GRID4 = (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))


def small_universe():
    return Environment.create((("a0", "a1"), ("b0", "b1")), ("z0", "z1"))


def all_tables(env):
    profiles = list(enumerate_profiles(env))
    for values in itertools.product(env.outcomes, repeat=len(profiles)):
        yield DetMechanism(env, dict(zip(profiles, values)))


def report(line):
    print(f"\nACCEPTANCE {line}")


def test_criterion_01_characterization_equivalence():
    started = time.monotonic()
    agreements = total = 0
    for mech in all_tables(small_universe()):
        holds = satisfies_condition1(mech)
        for kind in FULL_KINDS:
            total += 1
            agreements += (find_ba_witness(mech, kind) is None) == holds
    elapsed = time.monotonic() - started
    assert agreements == total == 48
    assert elapsed < 60
    report(f"1 characterization-equivalence: PASS ({agreements}/{total} in {elapsed:.1f}s)")


def test_criterion_02_voting_axiom_sweep():
    started = time.monotonic()
    candidates = ("1", "2")
    env = Environment.create((("0",) + candidates,) * 2, candidates)
    qualifying = verdicts = 0
    for mech in all_tables(env):
        if not (satisfies_unanimity(mech) and satisfies_monotonicity(mech)):
            continue
        qualifying += 1
        for kind in FULL_KINDS:
            witness = find_ba_witness(mech, kind)
            assert witness is not None, f"no witness under {kind} for {mech.table}"
            validate_witness(mech, witness)
            verdicts += 1
    elapsed = time.monotonic() - started
    assert qualifying > 0 and verdicts == 3 * qualifying
    assert elapsed < 300
    report(
        f"2 voting-axiom-sweep: PASS ({qualifying} qualifying tables, "
        f"{verdicts} BA verdicts in {elapsed:.1f}s)"
    )


def test_criterion_03_referendum_witness_structure():
    _, mech = build_majority_referendum(1)
    witness = find_ba_witness(mech, DomainKind.UNRESTRICTED)
    assert witness is not None
    validate_witness(mech, witness)
    assert witness.a_minus.count("leave") < 1
    assert witness.b_minus.count("leave") == 1
    report(
        f"3 referendum-witness: PASS (a={witness.a_minus} b={witness.b_minus} "
        f"r={witness.r} l={witness.l})"
    )


def test_criterion_04_groves_condition_failure_shape():
    params = QueueingParams(Fraction(1, 2), Fraction(1, 2), GRID4)
    _, mech = build_groves_queueing(params)
    assert not satisfies_condition1(mech)
    shaped = None
    for cex in condition1_counterexamples(mech):
        if cex.agent != 0:
            continue
        a2, b2 = Fraction(cex.a_minus[0]), Fraction(cex.b_minus[0])
        r1, l1 = Fraction(cex.r), Fraction(cex.l)
        if a2 < r1 < l1 < b2:
            shaped = cex
            break
    assert shaped is not None
    assert mech.outcome_at(0, shaped.r, shaped.a_minus) == shaped.z
    assert mech.outcome_at(0, shaped.l, shaped.a_minus) == shaped.z
    assert mech.outcome_at(0, shaped.r, shaped.b_minus) != mech.outcome_at(
        0, shaped.l, shaped.b_minus
    )
    report(
        f"4 groves-condition-failure: PASS (a2={shaped.a_minus[0]} < r1={shaped.r} "
        f"< l1={shaped.l} < b2={shaped.b_minus[0]})"
    )


def test_criterion_05_queueing_preferences_separable():
    thetas = (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1))
    grids = (
        (Fraction(0), Fraction(1, 2), Fraction(1)),
        GRID4,
        (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1)),
    )
    checked = 0
    for grid in grids:
        for theta in thetas:
            params = QueueingParams(theta, theta, grid)
            env, _ = build_groves_queueing(params)
            assert is_separable(build_queueing_pref_1(params, env))
            assert is_separable(build_queueing_pref_2(params, env))
            checked += 2
    report(f"5 queueing-separability: PASS ({checked} orderings over 3 grids x 5 costs)")


def test_criterion_06_queueing_witness_revalidates():
    params = QueueingParams(Fraction(1, 2), Fraction(1, 4), GRID4)
    witness = construct_queueing_witness(params)
    _, mech = build_groves_queueing(params)
    validate_witness(mech, witness)
    assert (witness.r, witness.l) == ("3/4", "1/2")
    assert witness.a_minus == ("1/4",) and witness.b_minus == ("3/4",)
    report(
        f"6 queueing-witness: PASS (r={witness.r} l={witness.l} "
        f"a={witness.a_minus} b={witness.b_minus})"
    )


def test_criterion_07_counterexample_phi_values_and_witness():
    env, mech = build_mixed_counterexample()
    pref = counterexample_preference()
    lots = {
        (a, b): Lottery(a, mech.dist_at(0, a, (b,)))
        for a in ("a0", "a1")
        for b in ("b0", "b1")
    }
    expected = [
        (("a0", "b0"), ("a0", "z1"), Fraction(2, 3)),
        (("a1", "b0"), ("a0", "z1"), Fraction(1, 3)),
        (("a0", "b0"), ("a1", "z0"), Fraction(2, 3)),
        (("a1", "b0"), ("a1", "z0"), Fraction(1, 3)),
        (("a0", "b0"), ("a0", "z0"), Fraction(1)),
        (("a1", "b0"), ("a0", "z0"), Fraction(1)),
        (("a0", "b0"), ("a1", "z1"), Fraction(1)),
        (("a1", "b0"), ("a1", "z1"), Fraction(1)),
        (("a1", "b1"), ("a0", "z1"), Fraction(3, 4)),
        (("a0", "b1"), ("a0", "z1"), Fraction(1, 2)),
        (("a1", "b1"), ("a1", "z0"), Fraction(3, 4)),
        (("a0", "b1"), ("a1", "z0"), Fraction(1, 2)),
        (("a1", "b1"), ("a0", "z0"), Fraction(1)),
        (("a0", "b1"), ("a0", "z0"), Fraction(1)),
        (("a1", "b1"), ("a1", "z1"), Fraction(1)),
        (("a0", "b1"), ("a1", "z1"), Fraction(1)),
    ]
    for lot_key, target, value in expected:
        assert phi(pref, lots[lot_key], target) == value
    domains = (
        DomainSpec.explicit((pref,)),
        DomainSpec.explicit((indifferent_ordering(1, env.actions[1], env.outcomes),)),
    )
    witness = find_prob_ba_witness(mech, domains)
    assert witness is not None
    assert (witness.agent, witness.r, witness.l) == (0, "a1", "a0")
    assert witness.a_minus == ("b0",) and witness.b_minus == ("b1",)
    validate_prob_witness(mech, witness)
    report("7 mixed-counterexample: PASS (16 contour values, witness l=a0 r=a1 a=b0 b=b1)")


def test_criterion_08_mixed_mechanism_sweep():
    started = time.monotonic()
    rng = random.Random(0)
    env = small_universe()
    clean = 0
    for _ in range(200):
        mech = random_completely_mixed_mechanism(env, rng)
        assert is_completely_mixed(mech)
        if find_prob_ba_witness(mech, DomainKind.STRICT) is None:
            clean += 1
    elapsed = time.monotonic() - started
    assert clean == 200
    assert elapsed < 600
    report(f"8 mixed-mechanism-sweep: PASS (200/200 witness-free in {elapsed:.1f}s)")


def test_criterion_09_dichotomy_blocks_sampled_dominance():
    rng = random.Random(0)
    outcomes = ("z0", "z1")
    pairs = tuple((a, z) for a in ("a0", "a1") for z in outcomes)
    violations = checks = 0
    for ordering in enumerate_strict_orderings(0, pairs):
        for r, l in itertools.permutations(("a0", "a1"), 2):
            verdict = dominance_dichotomy(ordering, r, l)
            for _ in range(100):
                g = random_totally_mixed(outcomes, rng)
                h = random_totally_mixed(outcomes, rng)
                if verdict is DominanceBlock.R_TOP:
                    bad = fsd(ordering, Lottery(l, g), Lottery(r, h)) or fsd(
                        ordering, Lottery(l, h), Lottery(r, g)
                    )
                else:
                    bad = fsd(ordering, Lottery(r, g), Lottery(l, h)) or fsd(
                        ordering, Lottery(r, h), Lottery(l, g)
                    )
                checks += 1
                violations += bad
    assert violations == 0
    report(f"9 dichotomy-blocks-dominance: PASS (0 violations in {checks} sampled pairs)")


def test_criterion_10_classical_domains_never_witness():
    env = small_universe()
    domains = tuple(
        DomainSpec.explicit(classical_orderings(i, env.actions[i], env.outcomes))
        for i in range(env.n)
    )
    clean = total = 0
    for mech in all_tables(env):
        total += 1
        clean += find_ba_witness(mech, domains) is None
    assert clean == total == 16
    report(f"10 classical-domains: PASS ({clean}/{total} tables witness-free)")
