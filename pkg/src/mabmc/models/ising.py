"""2-D Ising model on an open-boundary square lattice.

Configurations are n x n arrays of spins in {-1, +1}; the energy is
H(s) = -J * sum over nearest-neighbor pairs of s_i s_j, each bond counted
once, with free boundaries.  The Boltzmann distribution p_beta(s) is
proportional to exp(-beta H(s)).

The likelihood sampler is a Wolff cluster chain run for a fixed burn-in from
a uniform random start; it is a documented approximation of exact sampling
(for beta < 0 the bond probability clips to 0 and the update degenerates to a
single-spin flip, so the approximation is only reasonable near and above 0).
The auxiliary density is the Boltzmann distribution at the maximum
pseudo-likelihood estimate of beta from the observed data; its log density is
known only up to the additive constant -log Z(beta_hat), which cancels in
every ratio the samplers form.
"""

from __future__ import annotations

import math
import warnings
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from ..model import Model


def lattice_neighbors(n: int) -> tuple:
    """Neighbor index lists for row-major sites of an n x n open lattice."""
    out = []
    for r in range(n):
        for c in range(n):
            lst = []
            if r > 0:
                lst.append((r - 1) * n + c)
            if r < n - 1:
                lst.append((r + 1) * n + c)
            if c > 0:
                lst.append(r * n + c - 1)
            if c < n - 1:
                lst.append(r * n + c + 1)
            out.append(tuple(lst))
    return tuple(out)


def lattice_bonds(n: int) -> tuple:
    """All nearest-neighbor site pairs (i < j), 2n(n-1) of them."""
    bonds = []
    for r in range(n):
        for c in range(n):
            i = r * n + c
            if c < n - 1:
                bonds.append((i, i + 1))
            if r < n - 1:
                bonds.append((i, i + n))
    return tuple(bonds)


def interaction_sum(config: np.ndarray) -> int:
    """sum over bonds of s_i s_j for one configuration."""
    config = np.asarray(config)
    horizontal = int(np.sum(config[:, :-1] * config[:, 1:], dtype=np.int64))
    vertical = int(np.sum(config[:-1, :] * config[1:, :], dtype=np.int64))
    return horizontal + vertical


def ising_energy(config: np.ndarray, coupling: float) -> float:
    """H(s) = -J * sum_<ij> s_i s_j with open boundaries."""
    return -coupling * interaction_sum(config)


def neighbor_sums(config: np.ndarray) -> np.ndarray:
    """Sum of the nearest-neighbor spins at every site."""
    config = np.asarray(config)
    out = np.zeros(config.shape, dtype=np.int64)
    out[1:, :] += config[:-1, :]
    out[:-1, :] += config[1:, :]
    out[:, 1:] += config[:, :-1]
    out[:, :-1] += config[:, 1:]
    return out


def bond_probability(beta: float, coupling: float) -> float:
    """Wolff bond-activation probability, clipped to 0 for beta*J <= 0."""
    return max(0.0, -math.expm1(-2.0 * beta * coupling))


def _wolff_run(
    spins: list,
    neighbors: tuple,
    p_add: float,
    updates: int,
    gen: np.random.Generator,
) -> None:
    """Run cluster updates in place on a flat spin list.

    Spins are flipped as sites join the cluster; a flipped site no longer
    matches the cluster's original sign, so membership tests and the final
    flip come for free and each aligned bond is examined at most once.
    """
    m = len(spins)
    seeds = gen.integers(0, m, size=updates).tolist()
    buf = gen.random(8 * updates + 16).tolist()
    bi = 0
    for seed in seeds:
        target = spins[seed]
        spins[seed] = -target
        stack = [seed]
        while stack:
            site = stack.pop()
            for nb in neighbors[site]:
                if spins[nb] == target:
                    if bi >= len(buf):
                        buf = gen.random(4096).tolist()
                        bi = 0
                    u = buf[bi]
                    bi += 1
                    if u < p_add:
                        spins[nb] = -target
                        stack.append(nb)


def wolff_update(config: np.ndarray, beta: float, coupling: float, gen: np.random.Generator) -> np.ndarray:
    """One Wolff cluster flip; leaves the Boltzmann distribution invariant."""
    config = np.asarray(config)
    n = config.shape[0]
    spins = [int(s) for s in config.ravel()]
    _wolff_run(spins, _neighbors_cached(n), bond_probability(beta, coupling), 1, gen)
    return np.array(spins, dtype=np.int8).reshape(n, n)


def sample_config(
    n: int,
    beta: float,
    coupling: float,
    gen: np.random.Generator,
    burn_in: int = 200,
) -> np.ndarray:
    """Approximate draw from p_beta: burn-in cluster updates from a uniform start."""
    spins = (2 * gen.integers(0, 2, size=n * n) - 1).tolist()
    _wolff_run(spins, _neighbors_cached(n), bond_probability(beta, coupling), burn_in, gen)
    return np.array(spins, dtype=np.int8).reshape(n, n)


@lru_cache(maxsize=8)
def _neighbors_cached(n: int) -> tuple:
    return lattice_neighbors(n)


def exact_wolff_kernel(n: int, beta: float, coupling: float) -> np.ndarray:
    """Exact single-update transition matrix over all 2^(n*n) states.

    The Wolff cluster has the law of the seed's connected component under
    independent bond percolation on the aligned bonds, so the kernel is the
    average over seeds and aligned-bond subsets.  Only viable for tiny n.
    """
    m = n * n
    if m > 16:
        raise ValueError("exact kernel enumeration is limited to n*n <= 16 sites")
    bonds = lattice_bonds(n)
    p = bond_probability(beta, coupling)
    size = 1 << m
    kernel = np.zeros((size, size))
    seed_weight = 1.0 / m

    # component structure per aligned-bond set, shared across states
    comp_cache: dict = {}

    def components_by_seed(aligned: tuple) -> list:
        """List of (probability, [component bitmask per seed]) per bond subset."""
        cached = comp_cache.get(aligned)
        if cached is not None:
            return cached
        la = len(aligned)
        p_pow = [p**k for k in range(la + 1)]
        q_pow = [(1.0 - p) ** k for k in range(la + 1)]
        entries = []
        for mask in range(1 << la):
            parent = list(range(m))

            def find(a: int) -> int:
                while parent[a] != a:
                    parent[a] = parent[parent[a]]
                    a = parent[a]
                return a

            k = 0
            for b in range(la):
                if mask >> b & 1:
                    k += 1
                    i, j = aligned[b]
                    ri, rj = find(i), find(j)
                    if ri != rj:
                        parent[ri] = rj
            prob = p_pow[k] * q_pow[la - k]
            comp_masks = [0] * m
            roots: dict = {}
            for site in range(m):
                roots.setdefault(find(site), []).append(site)
            root_mask = {r: sum(1 << s for s in sites) for r, sites in roots.items()}
            for site in range(m):
                comp_masks[site] = root_mask[find(site)]
            entries.append((prob, comp_masks))
        comp_cache[aligned] = entries
        return entries

    for state in range(size):
        spin = [1 if state >> k & 1 else -1 for k in range(m)]
        aligned = tuple((i, j) for i, j in bonds if spin[i] == spin[j])
        if p <= 0.0:
            for seed in range(m):
                kernel[state, state ^ (1 << seed)] += seed_weight
            continue
        for prob, comp_masks in components_by_seed(aligned):
            if prob == 0.0:
                continue
            for seed in range(m):
                kernel[state, state ^ comp_masks[seed]] += seed_weight * prob
    return kernel


def exact_boltzmann(n: int, beta: float, coupling: float) -> np.ndarray:
    """Exact p_beta over all 2^(n*n) states (bit k set means spin +1)."""
    m = n * n
    bonds = lattice_bonds(n)
    log_w = np.empty(1 << m)
    for state in range(1 << m):
        spin = [1 if state >> k & 1 else -1 for k in range(m)]
        inter = sum(spin[i] * spin[j] for i, j in bonds)
        log_w[state] = beta * coupling * inter
    log_w -= log_w.max()
    w = np.exp(log_w)
    return w / w.sum()


# --- maximum pseudo-likelihood estimation -----------------------------------

def _mple_stats(dataset: Iterable[np.ndarray]) -> tuple[float, np.ndarray]:
    """(sum of s_k * n_k, counts of |n_k| in 0..4) over all sites and configs."""
    s1 = 0.0
    counts = np.zeros(5)
    for config in dataset:
        config = np.asarray(config)
        ns = neighbor_sums(config)
        s1 += float(np.sum(config * ns, dtype=np.int64))
        counts += np.bincount(np.abs(ns).ravel(), minlength=5)[:5]
    return s1, counts


def pseudo_loglik_derivatives(dataset: Sequence[np.ndarray], coupling: float, beta: float) -> tuple[float, float]:
    """Gradient and curvature of the pseudo-log-likelihood at beta.

    The conditional law of one spin is P(s_k = s | rest) =
    exp(beta J s n_k) / (2 cosh(beta J n_k)), so the gradient is
    J * sum_k (s_k n_k - n_k tanh(beta J n_k)) and the curvature is
    -J^2 * sum_k n_k^2 / cosh(beta J n_k)^2, nonpositive everywhere.
    """
    s1, counts = _mple_stats(dataset)
    return _pll_derivatives(s1, counts, coupling, beta)


def _pll_derivatives(s1: float, counts: np.ndarray, coupling: float, beta: float) -> tuple[float, float]:
    magnitudes = np.arange(5, dtype=float)
    tanh_terms = magnitudes * np.tanh(beta * coupling * magnitudes)
    grad = coupling * (s1 - float(counts @ tanh_terms))
    sech2 = 1.0 / np.cosh(beta * coupling * magnitudes) ** 2
    curv = -(coupling**2) * float(counts @ (magnitudes**2 * sech2))
    return grad, curv


def mple(
    dataset: Sequence[np.ndarray],
    coupling: float,
    clamp: float | None = None,
    tol: float = 1e-12,
    max_iter: int = 200,
) -> float:
    """Maximize the pseudo-log-likelihood by safeguarded 1-D Newton.

    Returns 0 when every s_k * n_k term vanishes (no information about beta).
    When the gradient never changes sign inside [-clamp, clamp] (for example
    perfectly aligned or perfectly checkerboarded data), the estimate is
    clamped to the boundary with a warning.
    """
    if not len(dataset):
        raise ValueError("dataset must be non-empty")
    if coupling == 0.0:
        return 0.0
    s1, counts = _mple_stats(dataset)
    if float(counts[1:].sum()) == 0.0:
        return 0.0
    if clamp is None:
        clamp = 50.0 / abs(coupling)

    grad_scale = abs(coupling) * float(counts[1:] @ np.arange(1, 5)) + abs(coupling * s1)
    gtol = tol * max(1.0, grad_scale)

    g_hi, _ = _pll_derivatives(s1, counts, coupling, clamp)
    if g_hi >= 0.0:
        warnings.warn("pseudo-likelihood maximizer clamped at the upper bound")
        return clamp
    g_lo, _ = _pll_derivatives(s1, counts, coupling, -clamp)
    if g_lo <= 0.0:
        warnings.warn("pseudo-likelihood maximizer clamped at the lower bound")
        return -clamp

    lo, hi = -clamp, clamp
    beta = 0.0
    for _ in range(max_iter):
        grad, curv = _pll_derivatives(s1, counts, coupling, beta)
        assert curv <= 0.0, "pseudo-log-likelihood must be concave"
        if abs(grad) <= gtol:
            return beta
        if grad > 0.0:
            lo = beta
        else:
            hi = beta
        if curv < 0.0:
            step = beta - grad / curv
        else:
            step = math.nan
        beta_new = step if lo < step < hi else 0.5 * (lo + hi)
        if abs(beta_new - beta) <= 1e-14 * max(1.0, abs(beta)):
            return beta_new
        beta = beta_new
    return beta


# --- dataset container and serialization ------------------------------------

class SpinDataset:
    """Immutable bundle of configurations with the cached energy sum.

    Acceptance ratios touch a dataset only through sum_m H(s_m); caching it
    here keeps the samplers from recomputing energies on every density call.
    """

    __slots__ = ("configs", "total_energy")

    def __init__(self, configs: Sequence[np.ndarray], coupling: float):
        frozen = []
        for c in configs:
            arr = np.asarray(c, dtype=np.int8)
            arr.flags.writeable = False
            frozen.append(arr)
        self.configs = tuple(frozen)
        self.total_energy = float(sum(ising_energy(c, coupling) for c in self.configs))

    def __len__(self) -> int:
        return len(self.configs)

    def __iter__(self):
        return iter(self.configs)


def generate_dataset(
    n: int,
    beta: float,
    coupling: float,
    count: int,
    gen: np.random.Generator,
    burn_in: int = 200,
) -> list[np.ndarray]:
    """Independent approximate draws from p_beta."""
    return [sample_config(n, beta, coupling, gen, burn_in) for _ in range(count)]


def save_dataset(path, dataset: Sequence[np.ndarray], coupling: float) -> None:
    """Plain-text format: header "ising N J count", one row-major line per config."""
    dataset = [np.asarray(c) for c in dataset]
    n = dataset[0].shape[0]
    lines = [f"ising {n} {coupling!r} {len(dataset)}"]
    for config in dataset:
        lines.append(" ".join(str(int(s)) for s in config.ravel()))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_dataset(path) -> tuple[list[np.ndarray], float]:
    """Read a dataset file; returns (configurations, coupling)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    header = lines[0].split()
    if len(header) != 4 or header[0] != "ising":
        raise ValueError(f"bad dataset header: {lines[0]!r}")
    n, coupling, count = int(header[1]), float(header[2]), int(header[3])
    if len(lines) - 1 != count:
        raise ValueError(f"expected {count} configurations, found {len(lines) - 1}")
    configs = []
    for ln in lines[1:]:
        values = np.array([int(v) for v in ln.split()], dtype=np.int8)
        if values.size != n * n or not np.all(np.abs(values) == 1):
            raise ValueError("configuration lines must hold n*n entries of +-1")
        configs.append(values.reshape(n, n))
    return configs, coupling


# --- the model ---------------------------------------------------------------

class IsingModel(Model):
    """Posterior over the inverse temperature beta given observed configurations.

    f_beta(dataset) = exp(-beta * sum_m H(s_m)); normal prior and random-walk
    proposal on beta; auxiliary datasets are drawn at the pseudo-likelihood
    estimate beta_hat and mirror the observed dataset's cardinality.
    """

    exact_likelihood = False
    aux_log_density_exact = False
    approximate_likelihood_sampler = True

    def __init__(
        self,
        dataset: Sequence[np.ndarray],
        coupling: float = 0.1,
        prior_mean: float = 0.0,
        prior_sd: float = 1.0,
        proposal_sd: float = 0.05,
        wolff_burn_in: int = 200,
        boundary: str = "open",
    ):
        if boundary != "open":
            raise ValueError("only open (free) boundaries are supported")
        if not len(dataset):
            raise ValueError("dataset must be non-empty")
        if prior_sd <= 0 or proposal_sd <= 0:
            raise ValueError("prior_sd and proposal_sd must be positive")
        configs = [np.asarray(c) for c in dataset]
        n = configs[0].shape[0]
        if n < 2:
            raise ValueError("lattice side must be at least 2")
        for c in configs:
            if c.shape != (n, n):
                raise ValueError("all configurations must share the same n x n shape")
            if not np.all(np.abs(c) == 1):
                raise ValueError("spins must be +-1")
        self.name = "ising"
        self.n = n
        self.coupling = float(coupling)
        self.prior_mean = float(prior_mean)
        self.prior_var = float(prior_sd) ** 2
        self.proposal_sd = float(proposal_sd)
        self.wolff_burn_in = int(wolff_burn_in)
        self.boundary = boundary
        self.observed = SpinDataset(configs, self.coupling)
        self.mple_estimate = mple(configs, self.coupling)

    def log_prior(self, beta: float) -> float:
        return (
            -0.5 * (beta - self.prior_mean) ** 2 / self.prior_var
            - 0.5 * math.log(2.0 * math.pi * self.prior_var)
        )

    def log_f(self, beta: float, dataset: SpinDataset) -> float:
        return -beta * dataset.total_energy

    def sample_likelihood(self, beta: float, gen: np.random.Generator) -> SpinDataset:
        configs = [
            sample_config(self.n, beta, self.coupling, gen, self.wolff_burn_in)
            for _ in range(len(self.observed))
        ]
        return SpinDataset(configs, self.coupling)

    def sample_aux(self, x: SpinDataset, beta: float, gen: np.random.Generator) -> SpinDataset:
        return self.sample_likelihood(self.mple_estimate, gen)

    def log_aux(self, y: SpinDataset, x: SpinDataset, beta: float) -> float:
        # up to the additive constant -count*log Z(beta_hat), independent of y and beta
        return -self.mple_estimate * y.total_energy

    def propose(self, beta: float, gen: np.random.Generator):
        beta2 = beta + self.proposal_sd * gen.standard_normal()
        log_q = (
            -0.5 * (beta2 - beta) ** 2 / self.proposal_sd**2
            - math.log(self.proposal_sd)
            - 0.5 * math.log(2.0 * math.pi)
        )
        return beta2, log_q, log_q

    def log_proposal(self, beta_to: float, beta_from: float) -> float:
        return (
            -0.5 * (beta_to - beta_from) ** 2 / self.proposal_sd**2
            - math.log(self.proposal_sd)
            - 0.5 * math.log(2.0 * math.pi)
        )

    def initial_point(self) -> float:
        return self.prior_mean
