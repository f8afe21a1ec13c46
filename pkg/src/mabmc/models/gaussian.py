"""Normal-likelihood model with the normalizer treated as unknown.

A single observation y with likelihood N(theta, sigma2) and conjugate normal
prior has the closed-form posterior

    N( (mu0/v0 + y/sigma2) / (1/v0 + 1/sigma2),  1 / (1/v0 + 1/sigma2) )

which reduces to N(y/(1+sigma2), sigma2/(1+sigma2)) for the standard-normal
prior.  f_theta(y) = exp(-(y-theta)^2 / (2 sigma2)) pretends the constant
1/sqrt(2 pi sigma2) is unknown; since it does not depend on theta, plain
Metropolis-Hastings stays available as a tractable baseline.
"""

from __future__ import annotations

import math

import numpy as np

from ..model import Model

_LOG_2PI = math.log(2.0 * math.pi)


def _normal_logpdf(value: float, mean: float, variance: float) -> float:
    return -0.5 * (value - mean) ** 2 / variance - 0.5 * math.log(variance) - 0.5 * _LOG_2PI


class GaussianModel(Model):
    """Scalar location inference with everything Gaussian.

    The auxiliary density is N(theta + aux_offset, sigma2): close to the
    likelihood but deliberately shifted, so neither randomized estimator
    dominates the other across proposals.
    """

    exact_likelihood = True

    def __init__(
        self,
        sigma2: float,
        observation: float = 1.0,
        prior_mean: float = 0.0,
        prior_var: float = 1.0,
        proposal_sd: float = 1.0,
        aux_offset: float = 1.0 / 3.0,
    ):
        if sigma2 <= 0:
            raise ValueError(f"sigma2 must be positive, got {sigma2}")
        if prior_var <= 0 or proposal_sd <= 0:
            raise ValueError("prior_var and proposal_sd must be positive")
        self.name = "gaussian"
        self.sigma2 = float(sigma2)
        self.sigma = math.sqrt(self.sigma2)
        self.observed = float(observation)
        self.prior_mean = float(prior_mean)
        self.prior_var = float(prior_var)
        self.proposal_sd = float(proposal_sd)
        self.aux_offset = float(aux_offset)
        self._log_norm = 0.5 * math.log(2.0 * math.pi * self.sigma2)

    def posterior_mean(self) -> float:
        prec = 1.0 / self.prior_var + 1.0 / self.sigma2
        return (self.prior_mean / self.prior_var + self.observed / self.sigma2) / prec

    def posterior_variance(self) -> float:
        return 1.0 / (1.0 / self.prior_var + 1.0 / self.sigma2)

    def log_prior(self, theta: float) -> float:
        return _normal_logpdf(theta, self.prior_mean, self.prior_var)

    def log_f(self, theta: float, x: float) -> float:
        return -0.5 * (x - theta) ** 2 / self.sigma2

    def log_likelihood(self, theta: float, x: float) -> float:
        return self.log_f(theta, x) - self._log_norm

    def sample_likelihood(self, theta: float, gen: np.random.Generator) -> float:
        return theta + self.sigma * gen.standard_normal()

    def sample_aux(self, x: float, theta: float, gen: np.random.Generator) -> float:
        return theta + self.aux_offset + self.sigma * gen.standard_normal()

    def log_aux(self, y: float, x: float, theta: float) -> float:
        return _normal_logpdf(y, theta + self.aux_offset, self.sigma2)

    def propose(self, theta: float, gen: np.random.Generator):
        theta2 = theta + self.proposal_sd * gen.standard_normal()
        log_q = _normal_logpdf(theta2, theta, self.proposal_sd**2)
        return theta2, log_q, log_q

    def log_proposal(self, theta_to: float, theta_from: float) -> float:
        return _normal_logpdf(theta_to, theta_from, self.proposal_sd**2)

    def initial_point(self) -> float:
        return self.prior_mean
