"""Two-parameter finite test problems with enumerable transition kernels.

Both problems put a uniform prior and a uniform proposal on a two-point
parameter space, observe a single data point, and use the uniform
distribution over the sample space as the auxiliary density.  The f density
is scaled per parameter (f = c * p with c_a = 2, c_b = 5) so the normalizer
ratio Z(a)/Z(b) = 2/5 is not trivially 1; the posterior is unchanged.
"""

from fractions import Fraction

from ..model import FiniteModel

F = Fraction

SCALE_A = F(2)
SCALE_B = F(5)


def build_toy_1() -> FiniteModel:
    """Binary sample space; the single-auxiliary estimator wins here.

    p_a = (0.3, 0.7) and p_b = (0.4, 0.6) on {0, 1}, observed x = 1.
    Exact posterior (7/13, 6/13).
    """
    return FiniteModel(
        name="toy1",
        parameters=("a", "b"),
        outcomes=(0, 1),
        prior={"a": F(1, 2), "b": F(1, 2)},
        likelihood={
            "a": {0: F(3, 10), 1: F(7, 10)},
            "b": {0: F(2, 5), 1: F(3, 5)},
        },
        scale={"a": SCALE_A, "b": SCALE_B},
        aux={0: F(1, 2), 1: F(1, 2)},
        proposal={
            "a": {"a": F(1, 2), "b": F(1, 2)},
            "b": {"a": F(1, 2), "b": F(1, 2)},
        },
        observed=1,
    )


def build_toy_2() -> FiniteModel:
    """Three-point sample space; the two-auxiliary estimator wins here.

    p_a = (0.1, 0.8, 0.1) and p_b = (0.8, 0.1, 0.1) on {0, 1, 2}, observed
    x = 2.  Exact posterior (1/2, 1/2).
    """
    return FiniteModel(
        name="toy2",
        parameters=("a", "b"),
        outcomes=(0, 1, 2),
        prior={"a": F(1, 2), "b": F(1, 2)},
        likelihood={
            "a": {0: F(1, 10), 1: F(4, 5), 2: F(1, 10)},
            "b": {0: F(4, 5), 1: F(1, 10), 2: F(1, 10)},
        },
        scale={"a": SCALE_A, "b": SCALE_B},
        aux={0: F(1, 3), 1: F(1, 3), 2: F(1, 3)},
        proposal={
            "a": {"a": F(1, 2), "b": F(1, 2)},
            "b": {"a": F(1, 2), "b": F(1, 2)},
        },
        observed=2,
    )
