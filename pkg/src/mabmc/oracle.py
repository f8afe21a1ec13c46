"""Exact brute-force verification engine for finite models.

Everything here enumerates over the finite parameter and sample spaces in
exact rational arithmetic, so transition probabilities, detailed-balance
residuals, and estimator moments come out as Fractions with no rounding.
The samplers module is the object under test; this module never reuses its
random draws, only its arithmetic definitions re-derived independently.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .estimators import MPMC, SVE
from .model import FiniteModel
from .samplers import DecisionRule, max_min_rule

DEFAULT_ENUMERATION_CAP = 10**8

ONE = Fraction(1)


@dataclass(frozen=True)
class TransitionMatrix:
    """Exact transition probabilities over an ordered finite state list."""

    states: tuple
    probs: tuple  # tuple of tuples of Fractions, row-stochastic

    def __post_init__(self) -> None:
        for i, row in enumerate(self.probs):
            if sum(row) != 1:
                raise ValueError(f"row {i} sums to {sum(row)}, not 1")

    def entry(self, s_from, s_to) -> Fraction:
        return self.probs[self.states.index(s_from)][self.states.index(s_to)]

    def as_floats(self) -> list[list[float]]:
        return [[float(p) for p in row] for row in self.probs]


@dataclass
class BalanceReport:
    """Detailed-balance residuals |pi_i P_ij - pi_j P_ji| over all pairs."""

    max_residual: float
    worst_pair: tuple
    flows: list  # (state_i, state_j, flow_ij, flow_ji, residual) per unordered pair
    exact: bool = True

    @property
    def balanced(self) -> bool:
        return self.max_residual == 0.0


def _det_ratio(model: FiniteModel, theta, theta2) -> Fraction:
    """pi(t') q(t|t') f_{t'}(x) / (pi(t) q(t'|t) f_t(x)) as an exact rational."""
    x = model.observed
    num = model.prior_mass(theta2) * model.proposal_mass(theta, theta2) * model.f_mass(theta2, x)
    den = model.prior_mass(theta) * model.proposal_mass(theta2, theta) * model.f_mass(theta, x)
    return num / den


def _mpmc_ratio(model: FiniteModel, det: Fraction, theta, theta2, y, y2) -> Fraction:
    return det * (
        model.f_mass(theta, y) * model.aux_mass(y2, theta2)
    ) / (model.f_mass(theta2, y2) * model.aux_mass(y, theta))


def _sve_ratio(model: FiniteModel, det: Fraction, theta, theta2, w) -> Fraction:
    return det * model.f_mass(theta, w) / model.f_mass(theta2, w)


def exact_true_ratio(model: FiniteModel, theta, theta2) -> Fraction:
    """The intractable-in-general acceptance ratio a(t, t'), exactly."""
    return _det_ratio(model, theta, theta2) * model.z_constant(theta) / model.z_constant(theta2)


def exact_acceptance(model: FiniteModel, theta, theta2, kind: str) -> Fraction:
    """E min(ratio, 1) for one attempted move, by enumeration.

    For MH the ratio is deterministic; for MPMC/SVE the expectation runs over
    the auxiliary draws weighted by their exact probabilities.
    """
    if kind == "MH":
        x = model.observed
        num = model.prior_mass(theta2) * model.proposal_mass(theta, theta2) * model.likelihood_mass(theta2, x)
        den = model.prior_mass(theta) * model.proposal_mass(theta2, theta) * model.likelihood_mass(theta, x)
        return min(num / den, ONE)
    det = _det_ratio(model, theta, theta2)
    if kind == SVE:
        total = Fraction(0)
        for w in model.outcomes:
            pw = model.likelihood_mass(theta2, w)
            if pw == 0:
                continue
            total += pw * min(_sve_ratio(model, det, theta, theta2, w), ONE)
        return total
    if kind == MPMC:
        total = Fraction(0)
        for y in model.outcomes:
            py = model.aux_mass(y, theta)
            if py == 0:
                continue
            for y2 in model.outcomes:
                py2 = model.likelihood_mass(theta2, y2)
                if py2 == 0:
                    continue
                total += py * py2 * min(_mpmc_ratio(model, det, theta, theta2, y, y2), ONE)
        return total
    raise ValueError(f"unknown estimator kind {kind!r}")


def decision_distribution(
    model: FiniteModel,
    theta,
    theta2,
    rule: DecisionRule,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> Fraction:
    """P(rule chooses MPMC | theta, theta'), by enumerating all decision draws.

    The max-min rule consumes six auxiliary draws (three forward, three
    reversed); the invalid argmax rule consumes the three forward draws only.
    """
    if rule.kind == "constant-1":
        return ONE
    if rule.kind == "constant-2":
        return Fraction(0)

    n = len(model.outcomes)
    terms = n**6 if rule.kind == "max-min" else n**3
    if terms > cap:
        raise ValueError(f"enumeration too large: {terms} terms exceeds cap {cap}")

    det = _det_ratio(model, theta, theta2)
    det_rev = _det_ratio(model, theta2, theta)
    prob_mpmc = Fraction(0)

    if rule.kind == "invalid-max":
        for y, y2, w in itertools.product(model.outcomes, repeat=3):
            p = (
                model.aux_mass(y, theta)
                * model.likelihood_mass(theta2, y2)
                * model.likelihood_mass(theta2, w)
            )
            if p == 0:
                continue
            a1 = _mpmc_ratio(model, det, theta, theta2, y, y2)
            a2 = _sve_ratio(model, det, theta, theta2, w)
            if a1 >= a2:
                prob_mpmc += p
        return prob_mpmc

    for y, y2, w in itertools.product(model.outcomes, repeat=3):
        p_fwd = (
            model.aux_mass(y, theta)
            * model.likelihood_mass(theta2, y2)
            * model.likelihood_mass(theta2, w)
        )
        if p_fwd == 0:
            continue
        r1 = min(_mpmc_ratio(model, det, theta, theta2, y, y2), ONE)
        r2 = min(_sve_ratio(model, det, theta, theta2, w), ONE)
        for yt, yt2, wt in itertools.product(model.outcomes, repeat=3):
            p_rev = (
                model.aux_mass(yt, theta2)
                * model.likelihood_mass(theta, yt2)
                * model.likelihood_mass(theta, wt)
            )
            if p_rev == 0:
                continue
            r1_rev = min(_mpmc_ratio(model, det_rev, theta2, theta, yt, yt2), ONE)
            r2_rev = min(_sve_ratio(model, det_rev, theta2, theta, wt), ONE)
            if min(r1, r1_rev) >= min(r2, r2_rev):
                prob_mpmc += p_fwd * p_rev
    return prob_mpmc


def mabmc_exact_acceptance(
    model: FiniteModel,
    theta,
    theta2,
    rule: Optional[DecisionRule] = None,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> Fraction:
    """E min(ratio_D, 1) for MABMC: decision mixture of the two estimators.

    Factorizes as P(D=MPMC)*E min(a_MPMC,1) + P(D=SVE)*E min(a_SVE,1), valid
    because acceptance draws are independent of decision draws by the
    samplers' stream contract.
    """
    rule = rule if rule is not None else max_min_rule()
    d1 = decision_distribution(model, theta, theta2, rule, cap)
    acc1 = exact_acceptance(model, theta, theta2, MPMC)
    acc2 = exact_acceptance(model, theta, theta2, SVE)
    return d1 * acc1 + (1 - d1) * acc2


def enumerate_transition_matrix(
    model: FiniteModel,
    sampler: str,
    rule: Optional[DecisionRule] = None,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> TransitionMatrix:
    """Exact expected transition probabilities for one sampler.

    MH/MPMC/SVE/MABMC produce a matrix over the parameter space; PMC produces
    one over the joint (theta, y) space.  Self-loop mass is 1 minus the
    off-diagonal row sum.
    """
    if sampler == "PMC":
        return _enumerate_pmc_joint(model)
    if sampler not in ("MH", MPMC, SVE, "MABMC"):
        raise ValueError(f"unknown sampler {sampler!r}")
    if sampler == "MABMC":
        rule = rule if rule is not None else max_min_rule()
    elif rule is not None:
        raise ValueError("decision rules only apply to MABMC")

    states = model.parameters
    rows = []
    for theta in states:
        row = {t2: Fraction(0) for t2 in states}
        off_total = Fraction(0)
        for theta2 in states:
            if theta2 == theta:
                continue
            q = model.proposal_mass(theta2, theta)
            if q == 0:
                continue
            if sampler == "MABMC":
                acc = mabmc_exact_acceptance(model, theta, theta2, rule, cap)
            else:
                acc = exact_acceptance(model, theta, theta2, sampler)
            row[theta2] = q * acc
            off_total += row[theta2]
        row[theta] = 1 - off_total
        rows.append(tuple(row[t2] for t2 in states))
    return TransitionMatrix(states, tuple(rows))


def _enumerate_pmc_joint(model: FiniteModel) -> TransitionMatrix:
    """Joint-space transition matrix on (theta, y) for Alg-2-style PMC."""
    states = tuple((t, y) for t in model.parameters for y in model.outcomes)
    index = {s: i for i, s in enumerate(states)}
    n = len(states)
    probs = [[Fraction(0)] * n for _ in range(n)]
    for theta, y in states:
        i = index[(theta, y)]
        det_cache = {t2: _det_ratio(model, theta, t2) for t2 in model.parameters}
        off_total = Fraction(0)
        for theta2 in model.parameters:
            q = model.proposal_mass(theta2, theta)
            if q == 0:
                continue
            for y2 in model.outcomes:
                if (theta2, y2) == (theta, y):
                    continue
                py2 = model.likelihood_mass(theta2, y2)
                if py2 == 0:
                    continue
                ratio = _mpmc_ratio(model, det_cache[theta2], theta, theta2, y, y2)
                p = q * py2 * min(ratio, ONE)
                probs[i][index[(theta2, y2)]] = p
                off_total += p
        probs[i][i] = 1 - off_total
    return TransitionMatrix(states, tuple(tuple(r) for r in probs))


def joint_posterior(model: FiniteModel) -> dict:
    """Exact posterior on (theta, y): pi(theta|x) * aux(y|x,theta)."""
    post = model.posterior()
    return {
        (t, y): post[t] * model.aux_mass(y, t)
        for t in model.parameters
        for y in model.outcomes
    }


def check_detailed_balance(tm: TransitionMatrix, posterior: dict) -> BalanceReport:
    """Residuals |pi_i P_ij - pi_j P_ji| over all state pairs."""
    if set(posterior.keys()) != set(tm.states):
        raise ValueError("posterior states do not match transition matrix states")
    states = tm.states
    flows = []
    worst = (Fraction(0), (states[0], states[0]))
    for i, si in enumerate(states):
        for j in range(i + 1, len(states)):
            sj = states[j]
            flow_ij = posterior[si] * tm.probs[i][j]
            flow_ji = posterior[sj] * tm.probs[j][i]
            residual = abs(flow_ij - flow_ji)
            flows.append((si, sj, flow_ij, flow_ji, residual))
            if residual > worst[0]:
                worst = (residual, (si, sj))
    return BalanceReport(float(worst[0]), worst[1], flows)


def stationary_distribution(tm: TransitionMatrix) -> dict:
    """Exact left fixed point of an irreducible transition matrix."""
    n = len(tm.states)
    _check_irreducible(tm)
    # solve v (P - I) = 0 with sum(v) = 1: columns of (P^T - I), last row replaced
    a = [[tm.probs[j][i] - (1 if i == j else 0) for j in range(n)] for i in range(n)]
    b = [Fraction(0)] * n
    a[n - 1] = [ONE] * n
    b[n - 1] = ONE
    v = _solve_rational(a, b)
    return {s: v[i] for i, s in enumerate(tm.states)}


def _check_irreducible(tm: TransitionMatrix) -> None:
    n = len(tm.states)
    adj = [[tm.probs[i][j] > 0 for j in range(n)] for i in range(n)]

    def reachable(start, edges):
        seen = {start}
        frontier = [start]
        while frontier:
            u = frontier.pop()
            for v in range(n):
                if edges[u][v] and v not in seen:
                    seen.add(v)
                    frontier.append(v)
        return seen

    fwd = reachable(0, adj)
    back = reachable(0, [[adj[j][i] for j in range(n)] for i in range(n)])
    if len(fwd) != n or len(back) != n:
        raise ValueError("transition matrix is reducible; no unique stationary distribution")


def _solve_rational(a: list, b: list) -> list:
    """Gaussian elimination with exact Fractions."""
    n = len(b)
    m = [list(row) + [b[i]] for i, row in enumerate(a)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            raise ValueError("singular system")
        m[col], m[pivot] = m[pivot], m[col]
        inv = 1 / m[col][col]
        m[col] = [v * inv for v in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                factor = m[r][col]
                m[r] = [v - factor * w for v, w in zip(m[r], m[col])]
    return [m[r][n] for r in range(n)]


def exact_estimator_moments(model: FiniteModel, theta, theta2, kind: str) -> tuple[Fraction, Fraction]:
    """(E[Z-ratio factor], E[(ratio/a - 1)^2]) by exact enumeration."""
    z_ratio = model.z_constant(theta) / model.z_constant(theta2)
    mean = Fraction(0)
    re = Fraction(0)
    if kind == SVE:
        for w in model.outcomes:
            pw = model.likelihood_mass(theta2, w)
            if pw == 0:
                continue
            factor = model.f_mass(theta, w) / model.f_mass(theta2, w)
            mean += pw * factor
            re += pw * (factor / z_ratio - 1) ** 2
    elif kind == MPMC:
        for y in model.outcomes:
            py = model.aux_mass(y, theta)
            if py == 0:
                continue
            for y2 in model.outcomes:
                py2 = model.likelihood_mass(theta2, y2)
                if py2 == 0:
                    continue
                factor = (
                    model.f_mass(theta, y) * model.aux_mass(y2, theta2)
                ) / (model.f_mass(theta2, y2) * model.aux_mass(y, theta))
                mean += py * py2 * factor
                re += py * py2 * (factor / z_ratio - 1) ** 2
    else:
        raise ValueError(f"unknown estimator kind {kind!r}")
    return mean, re


def mpmc_product_densities(model: FiniteModel, theta, theta2) -> tuple[dict, dict]:
    """The two product densities over (y, y') whose chi-square distance is RE(MPMC).

    Returns (p_{theta2}(y') aux(y|theta), p_theta(y) aux(y'|theta2)).
    """
    f = {}
    g = {}
    for y in model.outcomes:
        for y2 in model.outcomes:
            f[(y, y2)] = model.likelihood_mass(theta2, y2) * model.aux_mass(y, theta)
            g[(y, y2)] = model.likelihood_mass(theta, y) * model.aux_mass(y2, theta2)
    return f, g


def average_acceptance(
    model: FiniteModel,
    sampler: str,
    rule: Optional[DecisionRule] = None,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> Fraction:
    """Posterior- and proposal-weighted mean acceptance probability.

    sum_t pi(t|x) sum_t' q(t'|t) E min(ratio(t,t'), 1), including self
    proposals, whose randomized ratio can still reject for MPMC.
    """
    post = model.posterior()
    total = Fraction(0)
    for theta in model.parameters:
        for theta2 in model.parameters:
            q = model.proposal_mass(theta2, theta)
            if q == 0:
                continue
            if sampler == "MABMC":
                acc = mabmc_exact_acceptance(model, theta, theta2, rule, cap)
            else:
                acc = exact_acceptance(model, theta, theta2, sampler)
            total += post[theta] * q * acc
    return total


def write_transition_csv(tm: TransitionMatrix, path) -> None:
    """Machine-readable transition table: one row per ordered state pair."""
    lines = ["from,to,probability,probability_float"]
    for i, si in enumerate(tm.states):
        for j, sj in enumerate(tm.states):
            p = tm.probs[i][j]
            lines.append(f"{si},{sj},{p},{format(float(p), '.10g')}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_balance_report(report: BalanceReport, path) -> None:
    """Plain-text detailed-balance report."""
    lines = [
        "detailed balance report",
        f"max residual: {report.max_residual:.6e}",
        f"worst pair: {report.worst_pair[0]} <-> {report.worst_pair[1]}",
        "",
        "pair flows (state_i, state_j, pi_i*P_ij, pi_j*P_ji, residual):",
    ]
    for si, sj, fij, fji, res in report.flows:
        lines.append(f"  {si} <-> {sj}: {fij} vs {fji} (residual {float(res):.3e})")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
