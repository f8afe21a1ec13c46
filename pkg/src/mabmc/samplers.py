"""The five Markov chain samplers and the decision-rule framework.

All samplers accept in log domain (accept iff log u < log ratio) and share a
common per-iteration stream discipline: proposal, decision, auxiliary, and
accept draws come from four independent sub-streams of the chain stream.
This makes the decision randomness of MABMC independent of its acceptance
randomness by construction, and it makes a MABMC chain with a constant
decision rule bit-identical to the corresponding single-estimator chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import estimators
from .estimators import MPMC, SVE, draw_mpmc_ratio, draw_sve_ratio
from .model import Model, Observation, ParameterPoint
from .rng import RandomStream

SAMPLER_KINDS = ("MH", "PMC", "MPMC", "SVE", "MABMC")

_PHASE_INIT = 0
_PHASE_PROPOSAL = 1
_PHASE_DECISION = 2
_PHASE_AUX = 3
_PHASE_ACCEPT = 4


class ChainStreams:
    """Per-phase generators for one chain, derived from a single stream."""

    __slots__ = ("init", "proposal", "decision", "aux", "accept")

    def __init__(self, stream: RandomStream):
        self.init = stream.child(_PHASE_INIT).generator()
        self.proposal = stream.child(_PHASE_PROPOSAL).generator()
        self.decision = stream.child(_PHASE_DECISION).generator()
        self.aux = stream.child(_PHASE_AUX).generator()
        self.accept = stream.child(_PHASE_ACCEPT).generator()


@dataclass
class ChainState:
    """Current chain position; joint_aux is the persistent y of joint-space PMC."""

    theta: ParameterPoint
    joint_aux: Optional[Observation] = None


@dataclass
class IterationRecord:
    iteration: int
    theta_before: ParameterPoint
    theta_proposed: ParameterPoint
    decision: Optional[str]
    log_ratio: float
    accept_prob: float
    accepted: bool
    sampler_calls: int


@dataclass
class ChainTrace:
    sampler: str
    seed: int
    stream: int
    records: list[IterationRecord] = field(default_factory=list)

    def thetas(self) -> list:
        """Parameter value after each iteration."""
        out = []
        for r in self.records:
            out.append(r.theta_proposed if r.accepted else r.theta_before)
        return out

    def mean_accept_prob(self) -> float:
        return sum(r.accept_prob for r in self.records) / len(self.records)

    def acceptance_rate(self) -> float:
        return sum(r.accepted for r in self.records) / len(self.records)

    def total_sampler_calls(self) -> int:
        return sum(r.sampler_calls for r in self.records)

    def decision_fractions(self) -> tuple[float, float]:
        """(MPMC fraction, SVE fraction) of recorded decisions."""
        n_m = sum(1 for r in self.records if r.decision == MPMC)
        n_s = sum(1 for r in self.records if r.decision == SVE)
        total = n_m + n_s
        if total == 0:
            return (0.0, 0.0)
        return (n_m / total, n_s / total)


@dataclass(frozen=True)
class DecisionRule:
    """Rule D(theta, theta') in {MPMC, SVE} selecting the acceptance ratio.

    Kinds: "constant-1" (always MPMC), "constant-2" (always SVE), "max-min"
    (the symmetric argmax-min rule), and "invalid-max" (asymmetric argmax,
    a diagnostic negative control that breaks reversibility; not reachable
    from the CLI).
    """

    kind: str

    VALID_KINDS = ("constant-1", "constant-2", "max-min")

    def __post_init__(self) -> None:
        if self.kind not in self.VALID_KINDS + ("invalid-max",):
            raise ValueError(f"unknown decision rule {self.kind!r}")

    @property
    def is_valid(self) -> bool:
        return self.kind in self.VALID_KINDS


def constant_rule(which: int) -> DecisionRule:
    if which not in (1, 2):
        raise ValueError("constant rule index must be 1 (MPMC) or 2 (SVE)")
    return DecisionRule(f"constant-{which}")


def max_min_rule() -> DecisionRule:
    return DecisionRule("max-min")


def invalid_max_rule() -> DecisionRule:
    """Asymmetric argmax rule; breaks detailed balance.  Diagnostics only."""
    return DecisionRule("invalid-max")


# Ratios that are equal in exact arithmetic reach the log-domain comparison
# with rounding noise of order 1e-16; the tolerance makes such ties resolve
# to MPMC deterministically, matching the enumeration oracle.  The predicate
# stays a symmetric function of the r values, so the rule remains valid.
_TIE_TOL = 1e-12


def max_min_choice(log_r1: float, log_r2: float, log_r1_rev: float, log_r2_rev: float) -> str:
    """argmax_i min(r_i, r_i_reversed), ties to MPMC; inputs are log min(a,1)."""
    m1 = min(log_r1, log_r1_rev)
    m2 = min(log_r2, log_r2_rev)
    return MPMC if m1 >= m2 - _TIE_TOL else SVE


def decide(
    rule: DecisionRule,
    model: Model,
    theta: ParameterPoint,
    theta2: ParameterPoint,
    x: Observation,
    gen: np.random.Generator,
) -> str:
    """Choose MPMC or SVE for the attempted move theta -> theta2.

    The max-min rule draws one forward set (y, y', w) and one reversed set
    (y~, y~', w~) of auxiliaries, forms r_i = min(a_i, 1) for both directions,
    and picks argmax_i min(r_i, r_i_reversed).  The draws are consumed here
    and discarded; acceptance later uses fresh ones.  Constant rules consume
    no randomness, which keeps chain streams aligned with the plain samplers.
    """
    if rule.kind == "constant-1":
        return MPMC
    if rule.kind == "constant-2":
        return SVE
    d1 = draw_mpmc_ratio(model, theta, theta2, x, gen)
    d2 = draw_sve_ratio(model, theta, theta2, x, gen)
    if rule.kind == "invalid-max":
        return MPMC if d1.log_ratio >= d2.log_ratio - _TIE_TOL else SVE
    d1r = draw_mpmc_ratio(model, theta2, theta, x, gen)
    d2r = draw_sve_ratio(model, theta2, theta, x, gen)
    return max_min_choice(
        min(d1.log_ratio, 0.0),
        min(d2.log_ratio, 0.0),
        min(d1r.log_ratio, 0.0),
        min(d2r.log_ratio, 0.0),
    )


_DECISION_DRAWS = {"constant-1": 0, "constant-2": 0, "max-min": 6, "invalid-max": 3}


def _accept(log_ratio: float, gen: np.random.Generator) -> tuple[bool, float]:
    if math.isnan(log_ratio):
        raise ValueError("acceptance ratio must never be NaN")
    u = gen.random()
    log_u = math.log(u) if u > 0.0 else float("-inf")
    accepted = log_u < log_ratio
    accept_prob = math.exp(min(log_ratio, 0.0))
    return accepted, accept_prob


def step_mh(model: Model, state: ChainState, streams: ChainStreams) -> tuple[ChainState, IterationRecord]:
    """One Metropolis-Hastings step; requires a tractable normalized likelihood."""
    if not model.exact_likelihood:
        raise ValueError("MH requires tractable likelihood")
    x = model.observed
    theta = state.theta
    theta2, lqf, lqr = model.propose(theta, streams.proposal)
    log_ratio = (
        (model.log_prior(theta2) - model.log_prior(theta))
        + (model.log_likelihood(theta2, x) - model.log_likelihood(theta, x))
        + (lqr - lqf)
    )
    accepted, prob = _accept(log_ratio, streams.accept)
    new_state = ChainState(theta2) if accepted else state
    rec = IterationRecord(0, theta, theta2, None, log_ratio, prob, accepted, 0)
    return new_state, rec


def step_pmc_joint(model: Model, state: ChainState, streams: ChainStreams) -> tuple[ChainState, IterationRecord]:
    """One joint-space pseudo-marginal step on (theta, y)."""
    if state.joint_aux is None:
        raise ValueError("joint-space PMC state must carry an auxiliary value")
    x = model.observed
    theta, y = state.theta, state.joint_aux
    theta2, lqf, lqr = model.propose(theta, streams.proposal)
    y2 = model.sample_likelihood(theta2, streams.aux)
    det = estimators.deterministic_log_ratio_part(model, theta, theta2, x, lqf, lqr)
    log_ratio = det + estimators.mpmc_log_zratio(model, theta, theta2, x, y, y2)
    accepted, prob = _accept(log_ratio, streams.accept)
    new_state = ChainState(theta2, y2) if accepted else state
    rec = IterationRecord(0, theta, theta2, None, log_ratio, prob, accepted, 1)
    return new_state, rec


def step_mpmc(model: Model, state: ChainState, streams: ChainStreams) -> tuple[ChainState, IterationRecord]:
    """One step with the two-auxiliary randomized ratio."""
    theta = state.theta
    theta2, _, _ = model.propose(theta, streams.proposal)
    draw = draw_mpmc_ratio(model, theta, theta2, model.observed, streams.aux)
    accepted, prob = _accept(draw.log_ratio, streams.accept)
    new_state = ChainState(theta2) if accepted else state
    rec = IterationRecord(0, theta, theta2, None, draw.log_ratio, prob, accepted, 2)
    return new_state, rec


def step_sve(model: Model, state: ChainState, streams: ChainStreams) -> tuple[ChainState, IterationRecord]:
    """One exchange step with the single-auxiliary randomized ratio."""
    theta = state.theta
    theta2, _, _ = model.propose(theta, streams.proposal)
    draw = draw_sve_ratio(model, theta, theta2, model.observed, streams.aux)
    accepted, prob = _accept(draw.log_ratio, streams.accept)
    new_state = ChainState(theta2) if accepted else state
    rec = IterationRecord(0, theta, theta2, None, draw.log_ratio, prob, accepted, 1)
    return new_state, rec


def step_mabmc(
    model: Model,
    state: ChainState,
    rule: DecisionRule,
    streams: ChainStreams,
) -> tuple[ChainState, IterationRecord]:
    """One multi-armed-bandit step: decide on an estimator, then accept with it.

    The proposed theta' from the decision stage is reused for acceptance; only
    the auxiliary generation and accept/reject are re-executed, with fresh
    draws independent of the decision draws.
    """
    x = model.observed
    theta = state.theta
    theta2, _, _ = model.propose(theta, streams.proposal)
    chosen = decide(rule, model, theta, theta2, x, streams.decision)
    if chosen == MPMC:
        draw = draw_mpmc_ratio(model, theta, theta2, x, streams.aux)
    else:
        draw = draw_sve_ratio(model, theta, theta2, x, streams.aux)
    accepted, prob = _accept(draw.log_ratio, streams.accept)
    new_state = ChainState(theta2) if accepted else state
    calls = _DECISION_DRAWS[rule.kind] + (2 if chosen == MPMC else 1)
    rec = IterationRecord(0, theta, theta2, chosen, draw.log_ratio, prob, accepted, calls)
    return new_state, rec


def run_chain(
    model: Model,
    sampler: str,
    iterations: int,
    stream: RandomStream,
    rule: Optional[DecisionRule] = None,
    initial: Optional[ParameterPoint] = None,
) -> ChainTrace:
    """Run one chain; the trace is a pure function of (model, arguments, stream)."""
    if sampler not in SAMPLER_KINDS:
        raise ValueError(f"unknown sampler {sampler!r}; expected one of {SAMPLER_KINDS}")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if sampler == "MABMC":
        rule = rule if rule is not None else max_min_rule()
    elif rule is not None:
        raise ValueError(f"decision rules only apply to MABMC, not {sampler}")

    streams = ChainStreams(stream)
    theta0 = initial if initial is not None else model.initial_point()
    if sampler == "PMC":
        y0 = model.sample_aux(model.observed, theta0, streams.init)
        state = ChainState(theta0, y0)
    else:
        state = ChainState(theta0)

    trace = ChainTrace(sampler, stream.seed, stream.stream)
    for t in range(iterations):
        if sampler == "MH":
            state, rec = step_mh(model, state, streams)
        elif sampler == "PMC":
            state, rec = step_pmc_joint(model, state, streams)
        elif sampler == "MPMC":
            state, rec = step_mpmc(model, state, streams)
        elif sampler == "SVE":
            state, rec = step_sve(model, state, streams)
        else:
            state, rec = step_mabmc(model, state, rule, streams)
        rec.iteration = t
        trace.records.append(rec)
    return trace
