import itertools
from fractions import Fraction

import pytest

from exmech.deterministic import (
    DetMechanism,
    build_groves_queueing,
    build_majority_referendum,
    build_plurality,
    condition1_counterexample,
    condition1_counterexamples,
    construct_queueing_witness,
    det_mech_from_json,
    det_mech_to_json,
    find_ba_witness,
    is_voting_environment,
    nba_by_characterization,
    satisfies_condition1,
    satisfies_monotonicity,
    satisfies_unanimity,
    search_ba_witness,
    validate_witness,
    witness_from_counterexample,
)
from exmech.domains import classical_orderings
from exmech.errors import (
    GridDoesNotSupportWitness,
    InvariantViolation,
    NotVotingEnvironment,
)
from exmech.model import DomainKind, DomainSpec, Environment, enumerate_profiles
from exmech.queueing import QueueingParams, clinic_revenue, QueueingOutcome

FULL_KINDS = (DomainKind.UNRESTRICTED, DomainKind.STRICT, DomainKind.WEAK_ONLY)


def small_env():
    return Environment.create((("a0", "a1"), ("b0", "b1")), ("z0", "z1"))


def all_tables(env):
    profiles = list(enumerate_profiles(env))
    for values in itertools.product(env.outcomes, repeat=len(profiles)):
        yield DetMechanism(env, dict(zip(profiles, values)))


def constant_mech(env, outcome=None):
    outcome = outcome or env.outcomes[0]
    return DetMechanism(env, {p: outcome for p in enumerate_profiles(env)})


def test_mechanism_table_must_be_total():
    env = small_env()
    with pytest.raises(InvariantViolation, match="incomplete"):
        DetMechanism(env, {("a0", "b0"): "z0"})
    with pytest.raises(InvariantViolation, match="not an outcome"):
        DetMechanism(env, {p: "nope" for p in enumerate_profiles(env)})


def test_condition1_holds_for_constant():
    assert satisfies_condition1(constant_mech(small_env()))


def test_condition1_referendum_counterexample_shape():
    _, mech = build_majority_referendum(1)
    cex = condition1_counterexample(mech)
    assert cex is not None
    assert cex.a_minus.count("leave") == 0
    assert cex.b_minus.count("leave") == 1
    # the reported tuple is a genuine failure of tie propagation
    assert mech.outcome_at(cex.agent, cex.r, cex.a_minus) == cex.z
    assert mech.outcome_at(cex.agent, cex.l, cex.a_minus) == cex.z
    assert (
        mech.outcome_at(cex.agent, cex.r, cex.b_minus) != cex.z
        or mech.outcome_at(cex.agent, cex.l, cex.b_minus) != cex.z
    )


def test_condition1_groves_counterexamples():
    params = QueueingParams(Fraction(1, 2), Fraction(1, 2), (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)))
    _, mech = build_groves_queueing(params)
    first = condition1_counterexample(mech)
    assert first is not None
    assert (first.r, first.l, first.a_minus) == ("1/4", "1/2", ("0",))
    shaped = [
        c
        for c in condition1_counterexamples(mech)
        if c.agent == 0
        and Fraction(c.a_minus[0]) < Fraction(c.r) < Fraction(c.l) < Fraction(c.b_minus[0])
    ]
    assert shaped, "expected a counterexample with a2 < r1 < l1 < b2"


def test_nba_by_characterization_kinds():
    mech = constant_mech(small_env())
    for kind in FULL_KINDS:
        assert nba_by_characterization(mech, kind)
    _, referendum = build_majority_referendum(1)
    assert not nba_by_characterization(referendum, "unrestricted")
    with pytest.raises(InvariantViolation):
        nba_by_characterization(mech, DomainKind.EXPLICIT)


def test_find_ba_witness_constant_none():
    mech = constant_mech(small_env())
    for kind in FULL_KINDS:
        assert find_ba_witness(mech, kind) is None


def test_find_ba_witness_referendum():
    _, mech = build_majority_referendum(1)
    witness = find_ba_witness(mech, DomainKind.UNRESTRICTED)
    assert witness is not None
    validate_witness(mech, witness)


def test_find_ba_witness_classical_domains_none():
    env = small_env()
    domains = tuple(
        DomainSpec.explicit(classical_orderings(i, env.actions[i], env.outcomes))
        for i in range(env.n)
    )
    for mech in all_tables(env):
        assert find_ba_witness(mech, domains) is None


def test_characterization_agrees_with_search_wider_universe():
    # all action-set shapes up to three actions per agent, two outcomes
    for shape in ((2, 3), (3, 2), (3, 3)):
        env = Environment.create(
            tuple(tuple(f"x{i}{k}" for k in range(s)) for i, s in enumerate(shape)),
            ("z0", "z1"),
        )
        for mech in all_tables(env):
            holds = satisfies_condition1(mech)
            for kind in FULL_KINDS:
                witness = find_ba_witness(mech, kind)
                assert (witness is None) == holds
                if witness is not None:
                    validate_witness(mech, witness)


def test_witness_from_counterexample_all_kinds():
    env = small_env()
    for mech in all_tables(env):
        cex = condition1_counterexample(mech)
        if cex is None:
            continue
        for kind in FULL_KINDS:
            witness = witness_from_counterexample(mech, cex, kind)
            validate_witness(mech, witness)
            if kind is DomainKind.STRICT:
                assert witness.ordering.is_strict
            if kind is DomainKind.WEAK_ONLY:
                assert not witness.ordering.is_strict


def test_search_stats_and_strict_iii():
    _, mech = build_majority_referendum(1)
    result = search_ba_witness(mech, DomainKind.UNRESTRICTED, strict_iii=True)
    assert result.witness is not None
    validate_witness(mech, result.witness, strict_iii=True)
    assert result.stats["orderings_per_agent"] == [4683, 4683, 4683]


def test_parallel_search_matches_sequential():
    env = small_env()
    table = dict(zip(enumerate_profiles(env), ("z0", "z0", "z0", "z1")))
    mech = DetMechanism(env, table)
    sequential = find_ba_witness(mech, DomainKind.UNRESTRICTED)
    parallel = find_ba_witness(mech, DomainKind.UNRESTRICTED, jobs=2)
    assert sequential == parallel is not None


def test_voting_environment_recognition():
    ref_env, _ = build_majority_referendum(1)
    assert is_voting_environment(ref_env)
    plu_env, _ = build_plurality(2, 2)
    assert is_voting_environment(plu_env)
    assert not is_voting_environment(small_env())
    with pytest.raises(NotVotingEnvironment):
        satisfies_unanimity(constant_mech(small_env()))


def test_unanimity():
    _, plurality = build_plurality(2, 2)
    assert satisfies_unanimity(plurality)
    env, _ = build_plurality(2, 2)
    assert not satisfies_unanimity(constant_mech(env, "1"))
    _, referendum = build_majority_referendum(1)
    assert satisfies_unanimity(referendum)


def test_monotonicity():
    _, plurality = build_plurality(2, 2)
    assert satisfies_monotonicity(plurality)
    env, _ = build_plurality(2, 2)
    assert satisfies_monotonicity(constant_mech(env, "1"))
    _, referendum = build_majority_referendum(1)
    assert satisfies_monotonicity(referendum)


def test_monotonicity_violation():
    env, base = build_plurality(2, 2)
    table = dict(base.table)
    # voting for the winner of ("1", sub=("2",)) flips the outcome
    assert table[("1", "2")] == "1"
    table[("1", "2")] = "2"
    table[("2", "2")] = "1"
    assert not satisfies_monotonicity(DetMechanism(env, table))


def test_referendum_outcomes():
    _, mech = build_majority_referendum(1)
    assert mech.outcome(("leave", "leave", "abstain")) == "leave"
    assert mech.outcome(("leave", "remain", "abstain")) == "remain"
    assert mech.outcome(("abstain", "abstain", "abstain")) == "remain"


def test_plurality_outcomes():
    _, mech = build_plurality(2, 2)
    assert mech.outcome(("1", "1")) == "1"
    assert mech.outcome(("1", "2")) == "1"
    _, reversed_ties = build_plurality(2, 2, tiebreak=("2", "1"))
    assert reversed_ties.outcome(("1", "2")) == "2"


def test_plurality_satisfies_axioms_and_has_witness():
    _, mech = build_plurality(2, 2)
    assert satisfies_unanimity(mech) and satisfies_monotonicity(mech)
    witness = find_ba_witness(mech, DomainKind.UNRESTRICTED)
    assert witness is not None
    validate_witness(mech, witness)


def groves_fixture():
    grid = (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))
    return QueueingParams(Fraction(1, 2), Fraction(1, 4), grid)


def test_groves_table():
    _, mech = build_groves_queueing(groves_fixture())
    assert mech.outcome(("3/4", "1/4")) == "w=0,1|t=1/4,0"
    assert mech.outcome(("1/2", "1/2")) == "w=1,0|t=0,1/2"
    assert mech.outcome(("0", "0")) == "w=1,0|t=0,0"


def test_queueing_witness_construction():
    params = groves_fixture()
    witness = construct_queueing_witness(params)
    assert (witness.agent, witness.r, witness.l) == (0, "3/4", "1/2")
    assert witness.a_minus == ("1/4",) and witness.b_minus == ("3/4",)
    _, mech = build_groves_queueing(params)
    validate_witness(mech, witness)
    # tie at a_minus: both reports above 1/4 serve patient 1 first for 1/4
    assert mech.outcome_at(0, witness.r, witness.a_minus) == "w=0,1|t=1/4,0"
    assert mech.outcome_at(0, witness.l, witness.a_minus) == "w=0,1|t=1/4,0"


def test_queueing_revenue_maximized_at_matching_report():
    params = groves_fixture()
    _, mech = build_groves_queueing(params)
    b2 = Fraction(3, 4)
    revenues = {
        x: clinic_revenue(QueueingOutcome.parse(mech.outcome((str(x), str(b2)))))
        for x in params.grid
        if x <= b2
    }
    assert all(revenues[x] == x for x in revenues)
    assert max(revenues.values()) == revenues[b2]


def test_queueing_witness_grid_requirements():
    grid = (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))
    with pytest.raises(GridDoesNotSupportWitness):
        construct_queueing_witness(QueueingParams(Fraction(0), Fraction(0), grid))
    with pytest.raises(GridDoesNotSupportWitness):
        construct_queueing_witness(
            QueueingParams(Fraction(1, 3), Fraction(0), grid)  # not on the grid
        )
    with pytest.raises(GridDoesNotSupportWitness):
        construct_queueing_witness(
            QueueingParams(Fraction(1, 2), Fraction(0), (Fraction(1, 2), Fraction(3, 4)))
        )


def test_condition1_fails_for_groves_any_grid_with_four_points():
    grids = (
        (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)),
        (Fraction(1, 8), Fraction(1, 3), Fraction(2, 3), Fraction(7, 8), Fraction(1)),
    )
    for grid in grids:
        _, mech = build_groves_queueing(QueueingParams(Fraction(1, 2), Fraction(1, 2), grid))
        assert not satisfies_condition1(mech)


def test_det_mech_json_round_trip():
    env, mech = build_majority_referendum(1)
    data = det_mech_to_json(mech)
    rebuilt = det_mech_from_json(env, data)
    assert rebuilt == mech
