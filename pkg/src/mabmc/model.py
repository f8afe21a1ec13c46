"""Interfaces shared by every inference problem.

A Model bundles the five densities the samplers need: prior, unnormalized
likelihood f (the normalizer Z may be unknown), a proposal kernel on the
parameter space, an auxiliary density on the sample space, and a sampler for
the likelihood itself.  All densities are handled in log domain; log values
are finite or -inf (zero mass), never NaN.

Exactness bookkeeping lives on the model rather than on individual values:
``aux_log_density_exact`` is False when ``log_aux`` is only known up to an
additive constant.  Such values may only be combined in differences taken
within the same model, where the constant cancels (the Ising auxiliary is the
one case; see models/ising.py).
"""

from __future__ import annotations

import abc
import math
from bisect import bisect_right
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

ParameterPoint = Any
Observation = Any

_NEG_INF = float("-inf")


def _log(mass: Fraction | float) -> float:
    """log of a nonnegative mass, -inf at zero."""
    value = float(mass)
    if value < 0.0:
        raise ValueError(f"negative probability mass: {mass}")
    return math.log(value) if value > 0.0 else _NEG_INF


class Model(abc.ABC):
    """One inference problem: densities, proposal kernel, and samplers.

    Implementations are immutable after construction and safe to share
    across threads; generators are single-owner and never shared.
    """

    name: str = "model"
    #: normalized likelihood available, so plain Metropolis-Hastings is usable
    exact_likelihood: bool = False
    #: False when log_aux carries an unknown additive constant
    aux_log_density_exact: bool = True
    #: True when sample_likelihood is a documented approximation
    approximate_likelihood_sampler: bool = False

    observed: Observation

    @abc.abstractmethod
    def log_prior(self, theta: ParameterPoint) -> float:
        """log prior mass/density at theta; -inf outside the support."""

    @abc.abstractmethod
    def log_f(self, theta: ParameterPoint, x: Observation) -> float:
        """Unnormalized log-likelihood log f_theta(x)."""

    def log_likelihood(self, theta: ParameterPoint, x: Observation) -> float:
        """Normalized log-likelihood; only when exact_likelihood is True."""
        raise NotImplementedError(f"{self.name} has no tractable likelihood")

    @abc.abstractmethod
    def sample_likelihood(self, theta: ParameterPoint, gen: np.random.Generator) -> Observation:
        """One draw from the likelihood p_theta."""

    @abc.abstractmethod
    def sample_aux(self, x: Observation, theta: ParameterPoint, gen: np.random.Generator) -> Observation:
        """One draw from the auxiliary density given (x, theta)."""

    @abc.abstractmethod
    def log_aux(self, y: Observation, x: Observation, theta: ParameterPoint) -> float:
        """Auxiliary log density of y given (x, theta)."""

    @abc.abstractmethod
    def propose(
        self, theta: ParameterPoint, gen: np.random.Generator
    ) -> tuple[ParameterPoint, float, float]:
        """Draw theta' ~ q(.|theta); returns (theta', log q(theta'|theta), log q(theta|theta'))."""

    @abc.abstractmethod
    def log_proposal(self, theta_to: ParameterPoint, theta_from: ParameterPoint) -> float:
        """log q(theta_to | theta_from)."""

    @abc.abstractmethod
    def initial_point(self) -> ParameterPoint:
        """Deterministic chain starting point."""


class _Categorical:
    """Tiny inverse-CDF sampler over a fixed finite support."""

    __slots__ = ("values", "cdf")

    def __init__(self, masses: dict):
        self.values = tuple(masses.keys())
        cdf: list[float] = []
        acc = 0.0
        for v in self.values:
            acc += float(masses[v])
            cdf.append(acc)
        cdf[-1] = 1.0
        self.cdf = cdf

    def draw(self, gen: np.random.Generator):
        u = gen.random()
        i = bisect_right(self.cdf, u)
        if i >= len(self.values):
            i = len(self.values) - 1
        return self.values[i]


class FiniteModel(Model):
    """A model whose parameter and sample spaces are both small and finite.

    All probabilities are stored as exact rationals so the enumeration oracle
    can reproduce transition probabilities without rounding.  The f density is
    stored as f_theta = scale_theta * p_theta with p normalized, which makes
    the normalizing constant Z(theta) = scale_theta and keeps Z ratios
    nontrivial even though the posterior does not see them.
    """

    exact_likelihood = True

    def __init__(
        self,
        name: str,
        parameters: Sequence[ParameterPoint],
        outcomes: Sequence[Observation],
        prior: dict,
        likelihood: dict,
        scale: dict,
        aux: dict,
        proposal: dict,
        observed: Observation,
    ):
        self.name = name
        self.parameters = tuple(parameters)
        self.outcomes = tuple(outcomes)
        self.prior = {t: Fraction(prior[t]) for t in self.parameters}
        self.likelihood = {
            t: {x: Fraction(likelihood[t][x]) for x in self.outcomes} for t in self.parameters
        }
        self.scale = {t: Fraction(scale[t]) for t in self.parameters}
        self.aux = {x: Fraction(aux[x]) for x in self.outcomes}
        self.proposal = {
            t: {t2: Fraction(proposal[t][t2]) for t2 in self.parameters} for t in self.parameters
        }
        self.observed = observed
        self._validate()

        self._log_prior = {t: _log(p) for t, p in self.prior.items()}
        self._log_p = {
            (t, x): _log(self.likelihood[t][x]) for t in self.parameters for x in self.outcomes
        }
        self._log_f = {
            (t, x): _log(self.scale[t] * self.likelihood[t][x])
            for t in self.parameters
            for x in self.outcomes
        }
        self._log_aux = {x: _log(self.aux[x]) for x in self.outcomes}
        self._log_q = {
            (t, t2): _log(self.proposal[t][t2]) for t in self.parameters for t2 in self.parameters
        }
        self._lik_sampler = {t: _Categorical(self.likelihood[t]) for t in self.parameters}
        self._aux_sampler = _Categorical(self.aux)
        self._prop_sampler = {t: _Categorical(self.proposal[t]) for t in self.parameters}

    def _validate(self) -> None:
        if self.observed not in self.outcomes:
            raise ValueError(f"observed value {self.observed!r} outside the sample space")
        if sum(self.prior.values()) != 1:
            raise ValueError("prior must sum to 1")
        for t in self.parameters:
            if sum(self.likelihood[t].values()) != 1:
                raise ValueError(f"likelihood row for {t!r} must sum to 1")
            if self.scale[t] <= 0:
                raise ValueError(f"scale constant for {t!r} must be positive")
            if sum(self.proposal[t].values()) != 1:
                raise ValueError(f"proposal row for {t!r} must sum to 1")
        if sum(self.aux.values()) != 1:
            raise ValueError("auxiliary distribution must sum to 1")
        for x in self.outcomes:
            if self.aux[x] <= 0:
                # support condition: the auxiliary must cover every outcome
                raise ValueError("auxiliary distribution must have full support")

    # exact-mass accessors used by the enumeration oracle

    def prior_mass(self, theta) -> Fraction:
        return self.prior[theta]

    def likelihood_mass(self, theta, x) -> Fraction:
        return self.likelihood[theta][x]

    def f_mass(self, theta, x) -> Fraction:
        return self.scale[theta] * self.likelihood[theta][x]

    def aux_mass(self, y, theta) -> Fraction:
        return self.aux[y]

    def proposal_mass(self, theta_to, theta_from) -> Fraction:
        return self.proposal[theta_from][theta_to]

    def z_constant(self, theta) -> Fraction:
        """Normalizing constant of f: sum_x f_theta(x)."""
        return self.scale[theta] * sum(self.likelihood[theta].values())

    def posterior(self) -> dict:
        """Exact posterior over parameters given the stored observation."""
        weights = {t: self.prior[t] * self.likelihood[t][self.observed] for t in self.parameters}
        total = sum(weights.values())
        return {t: w / total for t, w in weights.items()}

    # Model interface

    def log_prior(self, theta) -> float:
        return self._log_prior[theta]

    def log_f(self, theta, x) -> float:
        return self._log_f[(theta, x)]

    def log_likelihood(self, theta, x) -> float:
        return self._log_p[(theta, x)]

    def sample_likelihood(self, theta, gen) -> Observation:
        return self._lik_sampler[theta].draw(gen)

    def sample_aux(self, x, theta, gen) -> Observation:
        return self._aux_sampler.draw(gen)

    def log_aux(self, y, x, theta) -> float:
        return self._log_aux[y]

    def propose(self, theta, gen):
        theta2 = self._prop_sampler[theta].draw(gen)
        return theta2, self._log_q[(theta, theta2)], self._log_q[(theta2, theta)]

    def log_proposal(self, theta_to, theta_from) -> float:
        return self._log_q[(theta_from, theta_to)]

    def initial_point(self):
        return self.parameters[0]
