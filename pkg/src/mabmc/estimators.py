"""Randomized estimators of the acceptance ratio.

Both estimators share the deterministic factor

    pi(t') q(t|t') f_{t'}(x)  /  pi(t) q(t'|t) f_t(x)

and differ in how they estimate the unknown normalizer ratio Z(t)/Z(t'):

  * MPMC draws y from the auxiliary density at t and y' from the likelihood
    at t', and uses f_t(y) pi(y'|x,t') / (f_{t'}(y') pi(y|x,t)).
  * SVE draws a single w from the likelihood at t' and uses f_t(w)/f_{t'}(w).

Both Z-ratio factors are unbiased for Z(t)/Z(t'), and their relative mean
square error equals a Pearson chi-square distance (see oracle module for the
exact finite-space versions).  Estimators never clamp: the ratio may exceed 1;
min(ratio, 1) is applied only at acceptance time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .model import Model, Observation, ParameterPoint

MPMC = "MPMC"
SVE = "SVE"


@dataclass(frozen=True)
class RatioDraw:
    """One randomized acceptance-ratio draw.

    Attributes:
        kind: which estimator produced the draw ("MPMC" or "SVE").
        log_ratio: log of the full acceptance ratio.
        log_zratio: log of the random Z-ratio factor alone.
        aux: auxiliary draws consumed, (y, y') for MPMC and (w,) for SVE.
    """

    kind: str
    log_ratio: float
    log_zratio: float
    aux: tuple

    def __post_init__(self) -> None:
        expected = {MPMC: 2, SVE: 1}.get(self.kind)
        if expected is None:
            raise ValueError(f"unknown estimator kind {self.kind!r}")
        if len(self.aux) != expected:
            raise ValueError(f"{self.kind} draw must record {expected} auxiliary value(s)")
        if math.isnan(self.log_ratio):
            raise ValueError("acceptance ratio must never be NaN")


def deterministic_log_ratio_part(
    model: Model,
    theta: ParameterPoint,
    theta2: ParameterPoint,
    x: Observation,
    log_q_fwd: float,
    log_q_rev: float,
) -> float:
    """Shared non-random factor of the log acceptance ratio.

    Grouped as pairwise differences so that identical numerator and
    denominator terms cancel exactly (theta' = theta gives exactly 0).
    """
    return (
        (model.log_prior(theta2) - model.log_prior(theta))
        + (log_q_rev - log_q_fwd)
        + (model.log_f(theta2, x) - model.log_f(theta, x))
    )


def mpmc_log_zratio(model, theta, theta2, x, y, y2) -> float:
    """log of the MPMC Z-ratio factor for given draws y, y'."""
    return (
        (model.log_f(theta, y) - model.log_f(theta2, y2))
        + (model.log_aux(y2, x, theta2) - model.log_aux(y, x, theta))
    )


def sve_log_zratio(model, theta, theta2, w) -> float:
    """log of the SVE Z-ratio factor for a given draw w."""
    return model.log_f(theta, w) - model.log_f(theta2, w)


def draw_mpmc_ratio(
    model: Model,
    theta: ParameterPoint,
    theta2: ParameterPoint,
    x: Observation,
    gen: np.random.Generator,
) -> RatioDraw:
    """Draw y ~ aux(.|x,theta), y' ~ p_theta2 and assemble the MPMC ratio."""
    y = model.sample_aux(x, theta, gen)
    y2 = model.sample_likelihood(theta2, gen)
    det = deterministic_log_ratio_part(
        model, theta, theta2, x,
        model.log_proposal(theta2, theta), model.log_proposal(theta, theta2),
    )
    log_z = mpmc_log_zratio(model, theta, theta2, x, y, y2)
    return RatioDraw(MPMC, det + log_z, log_z, (y, y2))


def draw_sve_ratio(
    model: Model,
    theta: ParameterPoint,
    theta2: ParameterPoint,
    x: Observation,
    gen: np.random.Generator,
) -> RatioDraw:
    """Draw w ~ p_theta2 and assemble the SVE ratio."""
    w = model.sample_likelihood(theta2, gen)
    det = deterministic_log_ratio_part(
        model, theta, theta2, x,
        model.log_proposal(theta2, theta), model.log_proposal(theta, theta2),
    )
    log_z = sve_log_zratio(model, theta, theta2, w)
    return RatioDraw(SVE, det + log_z, log_z, (w,))


def pearson_chi_square(p: dict, q: dict) -> float:
    """Pearson chi-square distance sum_x (q(x) - p(x))^2 / p(x).

    p and q are finite distributions over the same support, given as mappings
    from outcome to mass.  Works with floats or exact Fractions.  Requires
    p(x) > 0 wherever q(x) > 0.
    """
    keys = set(p) | set(q)
    total = 0
    for k in keys:
        pk = p.get(k, 0)
        qk = q.get(k, 0)
        if pk == 0:
            if qk == 0:
                continue
            raise ValueError(f"chi-square undefined: q has mass at {k!r} where p has none")
        total += (qk - pk) ** 2 / pk
    return total


def empirical_relative_error(draws: Iterable[RatioDraw], true_log_ratio: float) -> float:
    """Sample mean of (ratio/a - 1)^2 against the true ratio a.

    Evaluated stably through expm1 so draws with log ratio near the truth do
    not lose precision.
    """
    draws = list(draws)
    if len(draws) < 2:
        raise ValueError("need at least 2 draws")
    kinds = {d.kind for d in draws}
    if len(kinds) != 1:
        raise ValueError(f"draws mix estimator kinds: {sorted(kinds)}")
    total = 0.0
    for d in draws:
        total += math.expm1(d.log_ratio - true_log_ratio) ** 2
    return total / len(draws)
