"""Probabilistic mechanisms, first-order stochastic dominance, and anomaly search.

A probabilistic mechanism maps each action profile to an exact-rational
distribution over outcomes.  Lotteries pair one own action with such a
distribution; comparisons between them use first-order stochastic dominance
through upper-contour probabilities: the chance of landing weakly above a
target pair must be at least as large everywhere and strictly larger
somewhere.
"""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import (
    ActionsEqual,
    AgentMismatch,
    InvariantViolation,
    NotStrict,
    ParseError,
    UnknownPair,
)
from .model import (
    BAWitness,
    DomainKind,
    DomainSpec,
    Environment,
    Ordering,
    Pair,
    Profile,
    SubProfile,
    enumerate_profiles,
    full_profile,
    sub_profiles,
)
from .domains import domain_orderings, resolve_domains
from .queueing import parse_fraction


@dataclass(frozen=True)
class Distribution:
    """Exact probability vector over outcome labels; must sum to one.

    Keys should cover the full outcome set explicitly (zeros included) so
    that equality of distributions is plain dict equality.
    """

    probs: dict[str, Fraction]

    def __post_init__(self) -> None:
        probs = {str(z): Fraction(p) for z, p in self.probs.items()}
        object.__setattr__(self, "probs", probs)
        if any(p < 0 for p in probs.values()):
            raise InvariantViolation("negative probability")
        if sum(probs.values()) != 1:
            raise InvariantViolation("probabilities must sum to 1")

    def __getitem__(self, outcome: str) -> Fraction:
        return self.probs.get(outcome, Fraction(0))

    @classmethod
    def uniform(cls, outcomes: Iterable[str]) -> "Distribution":
        outcomes = tuple(outcomes)
        return cls({z: Fraction(1, len(outcomes)) for z in outcomes})

    @classmethod
    def point_mass(cls, outcome: str, outcomes: Iterable[str]) -> "Distribution":
        return cls({z: Fraction(1 if z == outcome else 0) for z in outcomes})


def is_totally_mixed(dist: Distribution) -> bool:
    """Strictly positive probability on every outcome."""
    return all(p > 0 for p in dist.probs.values())


@dataclass(frozen=True)
class Lottery:
    """One own action together with a distribution over outcomes."""

    action: str
    dist: Distribution


@dataclass(frozen=True)
class ProbMechanism:
    """Total map from action profiles to outcome distributions."""

    env: Environment
    table: Mapping[Profile, Distribution]

    def __post_init__(self) -> None:
        table = {tuple(k): v for k, v in self.table.items()}
        object.__setattr__(self, "table", table)
        expected = set(enumerate_profiles(self.env))
        if set(table) - expected:
            raise InvariantViolation("mechanism table has an unknown profile")
        if expected - set(table):
            raise InvariantViolation("mechanism table incomplete")
        outcomes = set(self.env.outcomes)
        for profile, dist in table.items():
            if not isinstance(dist, Distribution):
                raise InvariantViolation(f"value at {profile!r} is not a distribution")
            if set(dist.probs) != outcomes:
                raise InvariantViolation(
                    f"distribution at {profile!r} must cover every outcome exactly"
                )

    def dist(self, profile: Profile) -> Distribution:
        return self.table[tuple(profile)]

    def dist_at(self, agent: int, action: str, sub: SubProfile) -> Distribution:
        return self.table[full_profile(sub, agent, action)]


def is_completely_mixed(mech: ProbMechanism) -> bool:
    """Totally mixed at every profile."""
    return all(is_totally_mixed(d) for d in mech.table.values())


# --- first-order stochastic dominance ----------------------------------------


def phi(ordering: Ordering, lottery: Lottery, target: Pair) -> Fraction:
    """Probability of drawing a pair weakly preferred to `target`.

    Under the lottery the agent gets (action, z) with probability dist(z);
    pairs with any other action never occur.
    """
    try:
        limit = ordering.rank(target)
        action = lottery.action
        total = Fraction(0)
        for z, p in lottery.dist.probs.items():
            if p and ordering.rank((action, z)) <= limit:
                total += p
        return total
    except UnknownPair as exc:
        raise AgentMismatch(str(exc)) from None


def fsd(ordering: Ordering, lhs: Lottery, rhs: Lottery) -> bool:
    """True iff `lhs` first-order stochastically dominates `rhs`.

    The upper-contour probability of `lhs` must weakly exceed that of `rhs`
    at every target pair, strictly at one; irreflexive and asymmetric by
    construction.
    """
    strict = False
    for target in ordering._ranks:
        pl = phi(ordering, lhs, target)
        pr = phi(ordering, rhs, target)
        if pl < pr:
            return False
        if pl > pr:
            strict = True
    return strict


class DominanceBlock(Enum):
    """Which direction of dominance a strict ordering rules out.

    R_TOP: the pair (r, best outcome for r) beats (l, best outcome for l), so
    no l-lottery can dominate an r-lottery when both distributions are
    totally mixed.  L_TOP is the mirror statement.
    """

    R_TOP = "r_top"
    L_TOP = "l_top"


def best_outcome(ordering: Ordering, action: str) -> str:
    """The outcome making (action, outcome) best; unique for strict orderings."""
    outcomes = [z for a, z in ordering.pairs if a == action]
    if not outcomes:
        raise UnknownPair(f"action {action!r} does not appear in the ordering")
    return min(outcomes, key=lambda z: ordering.rank((action, z)))


def dominance_dichotomy(ordering: Ordering, r: str, l: str) -> DominanceBlock:
    """Decide which of the two blocking statements holds for a strict ordering.

    Whichever action carries the globally better top pair can never be
    dominated from the other action under totally mixed distributions: its
    top pair keeps positive upper-contour probability while the other
    action's lotteries assign it zero.
    """
    if not ordering.is_strict:
        raise NotStrict("the dichotomy requires a strict ordering")
    if r == l:
        raise ActionsEqual("need two distinct actions")
    top_r = (r, best_outcome(ordering, r))
    top_l = (l, best_outcome(ordering, l))
    return DominanceBlock.R_TOP if ordering.rank(top_r) < ordering.rank(top_l) else DominanceBlock.L_TOP


# --- exhaustive witness search -------------------------------------------------


def validate_prob_witness(mech: ProbMechanism, witness: BAWitness) -> None:
    """Re-check the probabilistic certificate conditions; raise on failure."""
    env = mech.env
    env.check_agent(witness.agent)
    acts = env.actions[witness.agent]
    if witness.r not in acts or witness.l not in acts:
        raise InvariantViolation("witness actions not in the agent's action set")
    if witness.r == witness.l:
        raise InvariantViolation("witness actions must be distinct")
    subs = set(sub_profiles(env, witness.agent))
    if witness.a_minus not in subs or witness.b_minus not in subs:
        raise InvariantViolation("witness sub-profiles not valid for the environment")
    if witness.a_minus == witness.b_minus:
        raise InvariantViolation("witness sub-profiles must be distinct")
    ordering = witness.ordering
    if ordering.agent != witness.agent:
        raise InvariantViolation("witness ordering tagged for a different agent")
    if ordering.pairs != frozenset(env.pairs_for(witness.agent)):
        raise InvariantViolation("witness ordering does not partition the agent's pairs")
    ga = mech.dist_at(witness.agent, witness.r, witness.a_minus)
    if ga != mech.dist_at(witness.agent, witness.l, witness.a_minus):
        raise InvariantViolation("condition (i) fails: distributions differ at a_minus")
    if not fsd(ordering, Lottery(witness.l, ga), Lottery(witness.r, ga)):
        raise InvariantViolation("condition (ii) fails: protest lottery does not dominate")
    anchor = Lottery(witness.r, mech.dist_at(witness.agent, witness.r, witness.b_minus))
    for x in acts:
        if x == witness.r:
            continue
        other = Lottery(x, mech.dist_at(witness.agent, x, witness.b_minus))
        if not fsd(ordering, anchor, other):
            raise InvariantViolation(f"condition (iii) fails against action {x!r}")


def _prob_scan_task(
    mech: ProbMechanism,
    agent: int,
    r_idx: int,
    l_idx: int,
    subs: tuple[SubProfile, ...],
    orderings: tuple[Ordering, ...],
) -> tuple[int, int, int] | None:
    acts = mech.env.actions[agent]
    r, l = acts[r_idx], acts[l_idx]
    for a_i, a in enumerate(subs):
        ga = mech.dist_at(agent, r, a)
        if ga != mech.dist_at(agent, l, a):
            continue
        for b_i, b in enumerate(subs):
            if b == a:
                continue
            dists = [mech.dist_at(agent, x, b) for x in acts]
            for o_i, ordering in enumerate(orderings):
                if not fsd(ordering, Lottery(l, ga), Lottery(r, ga)):
                    continue
                anchor = Lottery(r, dists[r_idx])
                if all(
                    x == r or fsd(ordering, anchor, Lottery(x, dists[xi]))
                    for xi, x in enumerate(acts)
                ):
                    return a_i, b_i, o_i
    return None


_POOL_STATE: dict = {}


def _pool_init(mech, subs_by_agent, orderings_by_agent) -> None:
    _POOL_STATE.update(mech=mech, subs=subs_by_agent, orderings=orderings_by_agent)


def _pool_task(task: tuple[int, int, int]):
    agent, r_idx, l_idx = task
    s = _POOL_STATE
    return task, _prob_scan_task(
        s["mech"], agent, r_idx, l_idx, s["subs"][agent], s["orderings"][agent]
    )


def search_prob_ba_witness(
    mech: ProbMechanism,
    domains: Sequence[DomainSpec] | DomainSpec | DomainKind | str | None = None,
    *,
    cap: int | None = None,
    jobs: int = 1,
) -> "ProbBASearchResult":
    """Exhaustive probabilistic anomaly search in canonical order.

    Condition (i) is exact distribution equality; (ii) and (iii) use
    first-order stochastic dominance, with (iii) quantified over the other
    actions (dominance is irreflexive, so the anchor action itself is
    exempt).
    """
    env = mech.env
    specs = resolve_domains(env, domains)
    orderings_by_agent = tuple(
        domain_orderings(env, i, specs[i], cap) for i in range(env.n)
    )
    subs_by_agent = tuple(tuple(sub_profiles(env, i)) for i in range(env.n))
    tasks = [
        (i, ri, li)
        for i in range(env.n)
        for ri in range(len(env.actions[i]))
        for li in range(len(env.actions[i]))
        if ri != li
    ]
    stats = {
        "agents": env.n,
        "action_pairs": len(tasks),
        "sub_profiles": [len(s) for s in subs_by_agent],
        "orderings_per_agent": [len(o) for o in orderings_by_agent],
    }

    def to_witness(task, hit) -> BAWitness:
        agent, r_idx, l_idx = task
        a_i, b_i, o_i = hit
        return BAWitness(
            agent=agent,
            r=env.actions[agent][r_idx],
            l=env.actions[agent][l_idx],
            a_minus=subs_by_agent[agent][a_i],
            b_minus=subs_by_agent[agent][b_i],
            ordering=orderings_by_agent[agent][o_i],
        )

    if jobs <= 1:
        for task in tasks:
            agent, r_idx, l_idx = task
            hit = _prob_scan_task(
                mech, agent, r_idx, l_idx, subs_by_agent[agent], orderings_by_agent[agent]
            )
            if hit is not None:
                return ProbBASearchResult(to_witness(task, hit), stats)
        return ProbBASearchResult(None, stats)

    with ProcessPoolExecutor(
        max_workers=jobs,
        initializer=_pool_init,
        initargs=(mech, subs_by_agent, orderings_by_agent),
    ) as pool:
        for task, hit in pool.map(_pool_task, tasks):
            if hit is not None:
                return ProbBASearchResult(to_witness(task, hit), stats)
    return ProbBASearchResult(None, stats)


@dataclass(frozen=True)
class ProbBASearchResult:
    witness: BAWitness | None
    stats: dict


def find_prob_ba_witness(
    mech: ProbMechanism,
    domains: Sequence[DomainSpec] | DomainSpec | DomainKind | str | None = None,
    *,
    cap: int | None = None,
    jobs: int = 1,
) -> BAWitness | None:
    """Canonically first probabilistic anomaly witness, or None."""
    return search_prob_ba_witness(mech, domains, cap=cap, jobs=jobs).witness


# --- builders -----------------------------------------------------------------


def build_relative_frequency(n: int, m: int) -> tuple[Environment, ProbMechanism]:
    """Each candidate is elected with probability (votes received) / n."""
    if n < 2 or m < 2:
        raise InvariantViolation("need at least two voters and two candidates")
    candidates = tuple(str(c) for c in range(1, m + 1))
    env = Environment.create(tuple(candidates for _ in range(n)), candidates)
    table = {
        profile: Distribution(
            {z: Fraction(sum(1 for a in profile if a == z), n) for z in candidates}
        )
        for profile in enumerate_profiles(env)
    }
    return env, ProbMechanism(env, table)


def build_mixed_counterexample() -> tuple[Environment, ProbMechanism]:
    """Completely mixed two-agent mechanism that still admits the anomaly.

    Its two left-column rows carry identical distributions, and a non-strict
    preference over agent 1's pairs turns that tie into a certificate.
    """
    env = Environment.create((("a0", "a1"), ("b0", "b1")), ("z0", "z1"))
    rows = {
        ("a0", "b0"): (Fraction(1, 3), Fraction(2, 3)),
        ("a0", "b1"): (Fraction(1, 2), Fraction(1, 2)),
        ("a1", "b0"): (Fraction(1, 3), Fraction(2, 3)),
        ("a1", "b1"): (Fraction(3, 4), Fraction(1, 4)),
    }
    table = {
        profile: Distribution({"z0": p0, "z1": p1}) for profile, (p0, p1) in rows.items()
    }
    return env, ProbMechanism(env, table)


def counterexample_preference() -> Ordering:
    """Agent 1's non-strict ordering used with the mixed counterexample."""
    return Ordering(
        0,
        (
            frozenset({("a0", "z1"), ("a1", "z0")}),
            frozenset({("a0", "z0"), ("a1", "z1")}),
        ),
    )


def random_totally_mixed(
    outcomes: Sequence[str], rng: random.Random, denominator: int = 12
) -> Distribution:
    """Draw positive rational weights k/denominator and renormalize."""
    ks = [rng.randint(1, denominator - 1) for _ in outcomes]
    total = sum(ks)
    return Distribution({z: Fraction(k, total) for z, k in zip(outcomes, ks)})


def random_completely_mixed_mechanism(
    env: Environment, rng: random.Random, denominator: int = 12
) -> ProbMechanism:
    table = {
        profile: random_totally_mixed(env.outcomes, rng, denominator)
        for profile in enumerate_profiles(env)
    }
    return ProbMechanism(env, table)


# --- JSON ------------------------------------------------------------------------


def prob_mech_to_json(mech: ProbMechanism) -> dict:
    profiles = list(enumerate_profiles(mech.env))
    return {
        "profiles": [list(p) for p in profiles],
        "distributions": [
            [str(mech.dist(p)[z]) for z in mech.env.outcomes] for p in profiles
        ],
    }


def prob_mech_from_json(env: Environment, data: object) -> ProbMechanism:
    if not isinstance(data, dict):
        raise ParseError("mechanism must be a JSON object")
    profiles = data.get("profiles")
    dists = data.get("distributions")
    if not isinstance(profiles, list) or not isinstance(dists, list):
        raise ParseError("mechanism needs parallel 'profiles' and 'distributions' lists")
    if len(profiles) != len(dists):
        raise ParseError("'profiles' and 'distributions' must have equal length")
    table = {}
    for profile, row in zip(profiles, dists):
        if not isinstance(profile, list) or not isinstance(row, list):
            raise ParseError("profiles and distributions must be lists")
        if len(row) != len(env.outcomes):
            raise ParseError("distribution row must list one probability per outcome")
        key = tuple(str(a) for a in profile)
        if key in table:
            raise InvariantViolation(f"profile {key!r} listed twice")
        table[key] = Distribution(
            {z: parse_fraction(p) for z, p in zip(env.outcomes, row)}
        )
    return ProbMechanism(env, table)
