"""Deterministic mechanisms and Brexit-anomaly detection.

A deterministic mechanism is a total table from action profiles to outcomes.
The anomaly certificate for agent i consists of two own actions r, l and two
distinct opponent sub-profiles a, b such that

  (i)   both actions yield the same outcome at a,
  (ii)  the agent strictly prefers the pair (l, outcome) there, and
  (iii) r is a weakly best response at b,

for some admissible ordering.  Two independent routes decide the question:
an exhaustive witness search over enumerable domains, and the
tie-propagation characterization (whenever two actions of an agent tie in
outcome at one sub-profile they must tie, with the same outcome, at every
sub-profile), which is equivalent under the unrestricted, strict and
weak-only domains.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

from .errors import (
    GridDoesNotSupportWitness,
    InvariantViolation,
    NotVotingEnvironment,
    ParseError,
)
from .model import (
    BAWitness,
    DomainKind,
    DomainSpec,
    Environment,
    Ordering,
    Profile,
    SubProfile,
    enumerate_profiles,
    full_profile,
    sub_profiles,
)
from .domains import (
    build_queueing_pref_1,
    domain_rank_vectors,
    resolve_domains,
)
from .queueing import QueueingOutcome, QueueingParams, grid_labels

CHARACTERIZATION_KINDS = (DomainKind.UNRESTRICTED, DomainKind.STRICT, DomainKind.WEAK_ONLY)


@dataclass(frozen=True)
class DetMechanism:
    """Total map from action profiles to a single outcome label."""

    env: Environment
    table: Mapping[Profile, str]

    def __post_init__(self) -> None:
        table = {tuple(k): str(v) for k, v in self.table.items()}
        object.__setattr__(self, "table", table)
        expected = set(enumerate_profiles(self.env))
        if set(table) - expected:
            raise InvariantViolation("mechanism table has an unknown profile")
        if expected - set(table):
            raise InvariantViolation("mechanism table incomplete")
        outcomes = set(self.env.outcomes)
        for profile, value in table.items():
            if value not in outcomes:
                raise InvariantViolation(f"value {value!r} at {profile!r} is not an outcome")

    def outcome(self, profile: Profile) -> str:
        return self.table[tuple(profile)]

    def outcome_at(self, agent: int, action: str, sub: SubProfile) -> str:
        return self.table[full_profile(sub, agent, action)]


# --- tie-propagation characterization ---------------------------------------


@dataclass(frozen=True)
class Condition1Violation:
    """Tie at `a_minus` between r and l that fails to propagate to `b_minus`."""

    agent: int
    r: str
    l: str
    a_minus: SubProfile
    b_minus: SubProfile
    z: str


def condition1_counterexamples(mech: DetMechanism) -> Iterator[Condition1Violation]:
    """Yield every tie-propagation failure in deterministic search order.

    Agents ascending, unordered action pairs by index, then the tying
    sub-profile and the sub-profile where the tie breaks, lexicographically.
    """
    env = mech.env
    for agent in range(env.n):
        acts = env.actions[agent]
        subs = tuple(sub_profiles(env, agent))
        for ri in range(len(acts)):
            for li in range(ri + 1, len(acts)):
                r, l = acts[ri], acts[li]
                for a in subs:
                    z = mech.outcome_at(agent, r, a)
                    if z != mech.outcome_at(agent, l, a):
                        continue
                    for b in subs:
                        if (
                            mech.outcome_at(agent, r, b) != z
                            or mech.outcome_at(agent, l, b) != z
                        ):
                            yield Condition1Violation(agent, r, l, a, b, z)


def condition1_counterexample(mech: DetMechanism) -> Condition1Violation | None:
    return next(condition1_counterexamples(mech), None)


def satisfies_condition1(mech: DetMechanism) -> bool:
    return condition1_counterexample(mech) is None


def nba_by_characterization(mech: DetMechanism, kind: DomainKind | str) -> bool:
    """Anomaly-freeness via tie propagation; valid for the three full domain kinds."""
    if isinstance(kind, str):
        kind = DomainKind(kind)
    if kind not in CHARACTERIZATION_KINDS:
        raise InvariantViolation(
            "characterization applies to unrestricted, strict and weak-only domains"
        )
    return satisfies_condition1(mech)


def witness_from_counterexample(
    mech: DetMechanism,
    cex: Condition1Violation,
    kind: DomainKind = DomainKind.UNRESTRICTED,
) -> BAWitness:
    """Turn a tie-propagation failure into a validated anomaly witness.

    Builds an ordering that puts the agent's best-response pair at `b_minus`
    on top while ranking the protest pair (l, z) strictly above (r, z); for
    the weak-only kind two unconstrained pairs are merged to create an
    indifference.
    """
    if kind not in CHARACTERIZATION_KINDS:
        raise InvariantViolation("witness construction needs one of the three full domain kinds")
    env = mech.env
    agent, r, l, z = cex.agent, cex.r, cex.l, cex.z
    top = (r, mech.outcome_at(agent, r, cex.b_minus))
    ordered = [(l, z), (r, z)] if top == (r, z) else [top, (l, z), (r, z)]
    rest = [p for p in env.pairs_for(agent) if p not in set(ordered)]
    if kind is DomainKind.WEAK_ONLY:
        if len(rest) >= 2:
            classes = [frozenset((p,)) for p in ordered + rest[:-2]]
            classes.append(frozenset(rest[-2:]))
        else:
            # Merge the lone leftover pair into the (r, z) class: (r, z) only
            # ever needs to sit strictly below (l, z) and weakly below the top.
            classes = [frozenset((p,)) for p in ordered[:-1]]
            classes.append(frozenset([ordered[-1]] + rest))
    else:
        classes = [frozenset((p,)) for p in ordered + rest]
    witness = BAWitness(agent, r, l, cex.a_minus, cex.b_minus, Ordering(agent, tuple(classes)))
    validate_witness(mech, witness)
    return witness


# --- witness validation ------------------------------------------------------


def validate_witness(mech: DetMechanism, witness: BAWitness, strict_iii: bool = False) -> None:
    """Re-check the three certificate conditions; raise on the first failure."""
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
    za = mech.outcome_at(witness.agent, witness.r, witness.a_minus)
    if za != mech.outcome_at(witness.agent, witness.l, witness.a_minus):
        raise InvariantViolation("condition (i) fails: outcomes differ at a_minus")
    if not ordering.strictly_prefers((witness.l, za), (witness.r, za)):
        raise InvariantViolation("condition (ii) fails: protest pair not strictly preferred")
    anchor = (witness.r, mech.outcome_at(witness.agent, witness.r, witness.b_minus))
    for x in acts:
        other = (x, mech.outcome_at(witness.agent, x, witness.b_minus))
        if strict_iii:
            if x != witness.r and not ordering.strictly_prefers(anchor, other):
                raise InvariantViolation(f"strict condition (iii) fails against action {x!r}")
        elif not ordering.weakly_prefers(anchor, other):
            raise InvariantViolation(f"condition (iii) fails against action {x!r}")


# --- exhaustive witness search ------------------------------------------------


@dataclass(frozen=True)
class BASearchResult:
    witness: BAWitness | None
    stats: dict


def _scan_task(
    mech: DetMechanism,
    agent: int,
    r_idx: int,
    l_idx: int,
    subs: tuple[SubProfile, ...],
    rank_vectors: tuple[tuple[int, ...], ...],
    pair_index: dict,
    strict_iii: bool,
) -> tuple[int, int, int] | None:
    """First (a, b, ordering) hit for a fixed agent and action pair, or None."""
    acts = mech.env.actions[agent]
    r, l = acts[r_idx], acts[l_idx]
    outcome_at = mech.outcome_at
    for a_i, a in enumerate(subs):
        za = outcome_at(agent, r, a)
        if za != outcome_at(agent, l, a):
            continue
        protest = pair_index[(l, za)]
        baseline = pair_index[(r, za)]
        for b_i, b in enumerate(subs):
            if b == a:
                continue
            anchor = pair_index[(r, outcome_at(agent, r, b))]
            targets = [pair_index[(x, outcome_at(agent, x, b))] for x in acts]
            if strict_iii:
                targets = [t for x, t in zip(acts, targets) if x != r]
            for o_i, rv in enumerate(rank_vectors):
                if rv[protest] >= rv[baseline]:
                    continue
                best = rv[anchor]
                if strict_iii:
                    if all(best < rv[t] for t in targets):
                        return a_i, b_i, o_i
                elif all(best <= rv[t] for t in targets):
                    return a_i, b_i, o_i
    return None


_POOL_STATE: dict = {}


def _pool_init(mech, subs_by_agent, ranks_by_agent, pairs_by_agent, strict_iii) -> None:
    _POOL_STATE.update(
        mech=mech,
        subs=subs_by_agent,
        ranks=ranks_by_agent,
        pairs=pairs_by_agent,
        strict_iii=strict_iii,
    )


def _pool_task(task: tuple[int, int, int]):
    agent, r_idx, l_idx = task
    s = _POOL_STATE
    hit = _scan_task(
        s["mech"], agent, r_idx, l_idx,
        s["subs"][agent], s["ranks"][agent], s["pairs"][agent], s["strict_iii"],
    )
    return task, hit


def search_ba_witness(
    mech: DetMechanism,
    domains: Sequence[DomainSpec] | DomainSpec | DomainKind | str | None = None,
    *,
    cap: int | None = None,
    strict_iii: bool = False,
    jobs: int = 1,
) -> BASearchResult:
    """Exhaustive anomaly search; returns the canonically first witness.

    The search space is ordered by agent, then ordered action pairs (r, l),
    then ordered pairs of distinct sub-profiles (a, b), then orderings in
    domain-enumeration order.  Raises CapExceeded if a full domain kind is
    too large to enumerate.
    """
    env = mech.env
    specs = resolve_domains(env, domains)
    orderings_by_agent = []
    ranks_by_agent = []
    for i in range(env.n):
        orderings, vectors = domain_rank_vectors(env, i, specs[i], cap)
        orderings_by_agent.append(orderings)
        ranks_by_agent.append(vectors)
    subs_by_agent = tuple(tuple(sub_profiles(env, i)) for i in range(env.n))
    pairs_by_agent = tuple(
        {pair: idx for idx, pair in enumerate(env.pairs_for(i))} for i in range(env.n)
    )
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
            hit = _scan_task(
                mech, agent, r_idx, l_idx,
                subs_by_agent[agent], ranks_by_agent[agent], pairs_by_agent[agent],
                strict_iii,
            )
            if hit is not None:
                return BASearchResult(to_witness(task, hit), stats)
        return BASearchResult(None, stats)

    with ProcessPoolExecutor(
        max_workers=jobs,
        initializer=_pool_init,
        initargs=(mech, subs_by_agent, tuple(ranks_by_agent), pairs_by_agent, strict_iii),
    ) as pool:
        for task, hit in pool.map(_pool_task, tasks):
            if hit is not None:
                return BASearchResult(to_witness(task, hit), stats)
    return BASearchResult(None, stats)


def find_ba_witness(
    mech: DetMechanism,
    domains: Sequence[DomainSpec] | DomainSpec | DomainKind | str | None = None,
    *,
    cap: int | None = None,
    strict_iii: bool = False,
    jobs: int = 1,
) -> BAWitness | None:
    """Canonically first anomaly witness, or None when none exists."""
    return search_ba_witness(
        mech, domains, cap=cap, strict_iii=strict_iii, jobs=jobs
    ).witness


# --- voting environments ------------------------------------------------------


def is_voting_environment(env: Environment) -> bool:
    """Each agent abstains (first action) or votes for one of the outcomes."""
    return all(
        len(acts) == len(env.outcomes) + 1
        and acts[0] not in env.outcomes
        and acts[1:] == env.outcomes
        for acts in env.actions
    )


def _require_voting(env: Environment) -> None:
    if not is_voting_environment(env):
        raise NotVotingEnvironment(
            "expected per-agent actions of the form (abstain, candidate..., )"
        )


def satisfies_unanimity(mech: DetMechanism) -> bool:
    """A unanimous vote for a candidate elects that candidate."""
    _require_voting(mech.env)
    n = mech.env.n
    return all(mech.outcome((z,) * n) == z for z in mech.env.outcomes)


def satisfies_monotonicity(mech: DetMechanism) -> bool:
    """Re-voting for the current winner never changes the winner."""
    env = mech.env
    _require_voting(env)
    for agent in range(env.n):
        for sub in sub_profiles(env, agent):
            for action in env.actions[agent]:
                winner = mech.outcome_at(agent, action, sub)
                if mech.outcome_at(agent, winner, sub) != winner:
                    return False
    return True


# --- builders ------------------------------------------------------------------

ABSTAIN = "abstain"
REMAIN, LEAVE = "remain", "leave"


def build_majority_referendum(m: int) -> tuple[Environment, DetMechanism]:
    """Leave-or-remain referendum with 2m+1 voters who may abstain.

    The state flips to leave only when leave votes strictly outnumber remain
    votes; ties and abstention-heavy profiles keep the status quo.
    """
    if m < 1:
        raise InvariantViolation("need m >= 1")
    n = 2 * m + 1
    env = Environment.create(
        tuple((ABSTAIN, REMAIN, LEAVE) for _ in range(n)), (REMAIN, LEAVE)
    )
    table = {}
    for profile in enumerate_profiles(env):
        leave_votes = sum(1 for a in profile if a == LEAVE)
        remain_votes = sum(1 for a in profile if a == REMAIN)
        table[profile] = LEAVE if leave_votes > remain_votes else REMAIN
    return env, DetMechanism(env, table)


def build_plurality(
    n: int, m: int, tiebreak: Sequence[str] | None = None
) -> tuple[Environment, DetMechanism]:
    """Plurality voting with abstention; ties resolved by `tiebreak` order.

    Abstentions are ignored; an all-abstain profile elects the first
    candidate in the tiebreak order.
    """
    if n < 2 or m < 2:
        raise InvariantViolation("need at least two voters and two candidates")
    candidates = tuple(str(c) for c in range(1, m + 1))
    order = tuple(str(c) for c in tiebreak) if tiebreak is not None else candidates
    if sorted(order) != sorted(candidates):
        raise InvariantViolation("tiebreak must order the candidates exactly")
    env = Environment.create(tuple(("0",) + candidates for _ in range(n)), candidates)
    table = {}
    for profile in enumerate_profiles(env):
        counts = {c: 0 for c in candidates}
        for a in profile:
            if a != "0":
                counts[a] += 1
        best = max(counts.values())
        table[profile] = next(c for c in order if counts[c] == best)
    return env, DetMechanism(env, table)


def build_groves_queueing(params: QueueingParams) -> tuple[Environment, DetMechanism]:
    """Discretized pivotal queueing rule over the report grid.

    The higher reporter is served first and pays the other's report; on a tie
    patient 2 is served first.  Outcomes are the reachable waiting/transfer
    assignments, labeled canonically so they decode back to exact rationals.
    """
    labels = grid_labels(params.grid)
    table: dict[Profile, str] = {}
    seen: dict[str, None] = {}
    for x1 in params.grid:
        for x2 in params.grid:
            if x1 > x2:
                outcome = QueueingOutcome((0, 1), (x2, Fraction(0)))
            else:
                outcome = QueueingOutcome((1, 0), (Fraction(0), x1))
            label = outcome.label()
            table[(str(x1), str(x2))] = label
            seen.setdefault(label)
    env = Environment.create((labels, labels), tuple(seen))
    return env, DetMechanism(env, table)


def construct_queueing_witness(params: QueueingParams) -> BAWitness:
    """Build and machine-check the honest-report protest witness.

    Patient 1's true cost must be an interior grid point: the protest action
    is the honest report, the best-response action is the grid point just
    above it, and the tie happens against the grid point just below.
    """
    theta = params.theta1
    below = [g for g in params.grid if g < theta]
    above = [g for g in params.grid if g > theta]
    if not (0 < theta < 1) or theta not in params.grid or not below or not above:
        raise GridDoesNotSupportWitness(
            "need an interior grid point at theta1 with grid points on both sides"
        )
    env, mech = build_groves_queueing(params)
    witness = BAWitness(
        agent=0,
        r=str(above[0]),
        l=str(theta),
        a_minus=(str(below[-1]),),
        b_minus=(str(above[0]),),
        ordering=build_queueing_pref_1(params, env),
    )
    validate_witness(mech, witness)
    return witness


# --- JSON ------------------------------------------------------------------------


def det_mech_to_json(mech: DetMechanism) -> dict:
    profiles = list(enumerate_profiles(mech.env))
    return {
        "profiles": [list(p) for p in profiles],
        "outcomes": [mech.outcome(p) for p in profiles],
    }


def det_mech_from_json(env: Environment, data: object) -> DetMechanism:
    if not isinstance(data, dict):
        raise ParseError("mechanism must be a JSON object")
    profiles = data.get("profiles")
    outcomes = data.get("outcomes")
    if not isinstance(profiles, list) or not isinstance(outcomes, list):
        raise ParseError("mechanism needs parallel 'profiles' and 'outcomes' lists")
    if len(profiles) != len(outcomes):
        raise ParseError("'profiles' and 'outcomes' must have equal length")
    table = {}
    for profile, outcome in zip(profiles, outcomes):
        if not isinstance(profile, list):
            raise ParseError("each profile must be a list of actions")
        key = tuple(str(a) for a in profile)
        if key in table:
            raise InvariantViolation(f"profile {key!r} listed twice")
        table[key] = str(outcome)
    return DetMechanism(env, table)
