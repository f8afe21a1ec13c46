import math
import warnings

import numpy as np
import pytest

from mabmc import IsingModel, run_chain
from mabmc.estimators import sve_log_zratio
from mabmc.models.ising import (
    SpinDataset,
    bond_probability,
    exact_boltzmann,
    exact_wolff_kernel,
    generate_dataset,
    interaction_sum,
    ising_energy,
    lattice_bonds,
    load_dataset,
    mple,
    neighbor_sums,
    pseudo_loglik_derivatives,
    sample_config,
    save_dataset,
    wolff_update,
)
from mabmc.rng import RandomStream


def brute_energy(config, coupling):
    """Energy by explicit loop over all site pairs, counting each bond once."""
    n = config.shape[0]
    total = 0
    for r in range(n):
        for c in range(n):
            if c + 1 < n:
                total += config[r, c] * config[r, c + 1]
            if r + 1 < n:
                total += config[r, c] * config[r + 1, c]
    return -coupling * total


def test_energy_all_up_3x3():
    config = np.ones((3, 3), dtype=np.int8)
    assert len(lattice_bonds(3)) == 2 * 3 * 2 == 12
    assert ising_energy(config, 0.1) == pytest.approx(-1.2)
    assert ising_energy(config, 0.1) == pytest.approx(brute_energy(config, 0.1))


def test_energy_checkerboard_2x2():
    config = np.array([[1, -1], [-1, 1]], dtype=np.int8)
    assert ising_energy(config, 0.1) == pytest.approx(0.4)


def test_energy_matches_brute_force_random():
    gen = RandomStream(4, 1).generator()
    for _ in range(25):
        n = int(gen.integers(2, 7))
        config = (2 * gen.integers(0, 2, size=(n, n)) - 1).astype(np.int8)
        assert ising_energy(config, 0.3) == pytest.approx(brute_energy(config, 0.3))


def test_energy_global_flip_symmetry():
    gen = RandomStream(4, 2).generator()
    for _ in range(25):
        config = (2 * gen.integers(0, 2, size=(5, 5)) - 1).astype(np.int8)
        assert ising_energy(config, 0.2) == pytest.approx(ising_energy(-config, 0.2))


def test_single_flip_energy_identity():
    gen = RandomStream(4, 3).generator()
    coupling = 0.15
    for _ in range(25):
        config = (2 * gen.integers(0, 2, size=(4, 4)) - 1).astype(np.int8)
        r, c = int(gen.integers(0, 4)), int(gen.integers(0, 4))
        flipped = config.copy()
        flipped[r, c] *= -1
        delta = ising_energy(flipped, coupling) - ising_energy(config, coupling)
        ns = neighbor_sums(config)
        assert delta == pytest.approx(2 * coupling * config[r, c] * ns[r, c])


def test_wolff_zero_coupling_flips_single_site():
    gen = RandomStream(6, 1).generator()
    assert bond_probability(0.0, 0.1) == 0.0
    assert bond_probability(-1.0, 0.1) == 0.0
    config = np.ones((4, 4), dtype=np.int8)
    new = wolff_update(config, 0.0, 0.1, gen)
    assert int(np.sum(new != config)) == 1


def test_wolff_strong_coupling_spans_aligned_component():
    # p_add = 1 - exp(-10), so from the all-up state one update flips everything
    gen = RandomStream(6, 2).generator()
    config = np.ones((4, 4), dtype=np.int8)
    new = wolff_update(config, 50.0, 0.1, gen)
    assert np.all(new == -1)


def test_wolff_invariance_exact_3x3():
    kernel = exact_wolff_kernel(3, 2.0, 0.1)  # beta * J = 0.2
    pi = exact_boltzmann(3, 2.0, 0.1)
    assert np.abs(kernel.sum(axis=1) - 1.0).max() < 1e-12
    assert np.abs(pi @ kernel - pi).max() < 1e-10


def test_wolff_invariance_exact_zero_coupling():
    kernel = exact_wolff_kernel(2, 0.0, 0.1)
    pi = exact_boltzmann(2, 0.0, 0.1)
    assert np.abs(pi @ kernel - pi).max() < 1e-14


def test_sample_config_zero_coupling_uniform():
    gen = RandomStream(6, 3).generator()
    n = 400
    mags = [sample_config(4, 0.0, 0.1, gen, burn_in=50).mean() for _ in range(n)]
    se = 1.0 / math.sqrt(16 * n)
    assert abs(float(np.mean(mags))) < 4 * se


def test_mple_gradient_identity_at_zero():
    gen = RandomStream(7, 1).generator()
    data = generate_dataset(6, 0.4, 0.1, 20, gen)
    grad, curv = pseudo_loglik_derivatives(data, 0.1, 0.0)
    s1 = sum(float(np.sum(c * neighbor_sums(c), dtype=np.int64)) for c in data)
    assert grad == pytest.approx(0.1 * s1)
    assert curv <= 0.0


def test_mple_concavity_everywhere_sampled():
    gen = RandomStream(7, 2).generator()
    data = generate_dataset(5, 0.3, 0.1, 10, gen)
    for beta in np.linspace(-30.0, 30.0, 41):
        _, curv = pseudo_loglik_derivatives(data, 0.1, float(beta))
        assert curv <= 0.0


def test_mple_near_zero_for_independent_spins():
    estimates = []
    for seed in (1, 2, 3):
        gen = RandomStream(500 + seed, 0).generator()
        data = generate_dataset(10, 0.0, 0.1, 100, gen)
        estimates.append(abs(mple(data, 0.1)))
    assert sorted(estimates)[1] < 0.05


def test_mple_checkerboard_hits_negative_clamp():
    board = (np.indices((4, 4)).sum(axis=0) % 2 * 2 - 1).astype(np.int8)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        estimate = mple([board, board], 0.1)
    assert estimate == -500.0
    assert any("clamped" in str(w.message) for w in caught)
    # gradient stays negative at any finite beta where tanh is unsaturated
    g_low, _ = pseudo_loglik_derivatives([board], 0.1, -20.0)
    assert g_low < 0.0


def test_mple_all_aligned_hits_positive_clamp():
    config = np.ones((4, 4), dtype=np.int8)
    with warnings.catch_warnings(record=True):
        warnings.simplefilter("always")
        assert mple([config], 0.1) == 500.0


def test_mple_zero_information_returns_zero():
    with pytest.raises(ValueError):
        mple([], 0.1)
    assert mple([np.ones((2, 2), dtype=np.int8)], 0.0) == 0.0


def test_mple_recovers_coupling_roughly():
    gen = RandomStream(7, 3).generator()
    data = generate_dataset(10, 0.5, 0.1, 200, gen)
    assert abs(mple(data, 0.1) - 0.5) < 0.25


def test_dataset_round_trip(tmp_path):
    gen = RandomStream(8, 1).generator()
    data = generate_dataset(3, 0.2, 0.1, 4, gen)
    path = tmp_path / "data.txt"
    save_dataset(path, data, 0.1)
    text = path.read_text().splitlines()
    assert text[0] == "ising 3 0.1 4"
    loaded, coupling = load_dataset(path)
    assert coupling == 0.1
    assert len(loaded) == 4
    for a, b in zip(data, loaded):
        assert np.array_equal(a, b)


def test_dataset_bad_inputs(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("wrong 2 0.1 1\n1 1 1 1\n")
    with pytest.raises(ValueError, match="header"):
        load_dataset(path)
    path.write_text("ising 2 0.1 2\n1 1 1 1\n")
    with pytest.raises(ValueError, match="expected 2"):
        load_dataset(path)
    path.write_text("ising 2 0.1 1\n1 1 2 1\n")
    with pytest.raises(ValueError, match=r"\+-1"):
        load_dataset(path)


def _small_model(**kwargs):
    gen = RandomStream(9, 1).generator()
    data = generate_dataset(4, 0.3, 0.1, 5, gen)
    return IsingModel(data, coupling=0.1, **kwargs)


def test_model_validation():
    with pytest.raises(ValueError, match="non-empty"):
        IsingModel([], coupling=0.1)
    with pytest.raises(ValueError, match="at least 2"):
        IsingModel([np.ones((1, 1), dtype=np.int8)])
    with pytest.raises(ValueError, match=r"\+-1"):
        IsingModel([np.full((3, 3), 2, dtype=np.int8)])
    with pytest.raises(ValueError, match="boundar"):
        _small_model(boundary="periodic")
    with pytest.raises(ValueError, match="same"):
        IsingModel([np.ones((3, 3), dtype=np.int8), np.ones((4, 4), dtype=np.int8)])


def test_model_log_f_algebra():
    model = _small_model()
    ds = model.observed
    assert model.log_f(1.0, ds) == pytest.approx(-ds.total_energy)
    assert model.log_f(0.0, ds) == 0.0
    # single all-up 3x3 configuration at beta = 1: log f = -H = 1.2
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # aligned data clamps the MPLE
        allup = IsingModel([np.ones((3, 3), dtype=np.int8)], coupling=0.1)
    assert allup.log_f(1.0, allup.observed) == pytest.approx(1.2)


def test_model_prior_mode():
    model = _small_model(prior_mean=0.3, prior_sd=0.7)
    assert model.log_prior(0.3) > model.log_prior(0.3 + 0.2)
    assert model.log_prior(0.3) > model.log_prior(0.3 - 0.2)
    assert model.log_prior(0.3) == pytest.approx(
        -0.5 * math.log(2 * math.pi * 0.49)
    )


def test_model_has_no_tractable_likelihood():
    model = _small_model()
    with pytest.raises(NotImplementedError):
        model.log_likelihood(0.5, model.observed)
    with pytest.raises(ValueError, match="MH requires"):
        run_chain(model, "MH", 5, RandomStream(1, 1))


def test_sve_zratio_energy_identity():
    model = _small_model()
    gen = RandomStream(9, 2).generator()
    w = model.sample_likelihood(0.4, gen)
    beta, beta2 = 0.15, 0.4
    assert sve_log_zratio(model, beta, beta2, w) == pytest.approx(
        (beta2 - beta) * w.total_energy
    )


def test_sufficient_statistic_dataset_permutation():
    model = _small_model()
    configs = list(model.observed.configs)
    permuted = SpinDataset([configs[-1]] + configs[:-1], model.coupling)
    assert model.log_f(0.7, permuted) == model.log_f(0.7, model.observed)


def test_aux_density_cancellation():
    model = _small_model()
    gen = RandomStream(9, 3).generator()
    y1 = model.sample_likelihood(0.2, gen)
    y2 = model.sample_likelihood(0.2, gen)
    diff = model.log_aux(y1, model.observed, 0.9) - model.log_aux(y2, model.observed, 0.9)
    expected = -model.mple_estimate * (y1.total_energy - y2.total_energy)
    assert diff == pytest.approx(expected)
    assert not model.aux_log_density_exact


def test_aux_sampler_is_likelihood_at_mple():
    model = _small_model()
    a = model.sample_aux(model.observed, 0.7, RandomStream(10, 1).generator())
    b = model.sample_likelihood(model.mple_estimate, RandomStream(10, 1).generator())
    assert all(np.array_equal(x, y) for x, y in zip(a.configs, b.configs))


def test_chain_runs_and_reproduces():
    model = _small_model()
    a = run_chain(model, "SVE", 30, RandomStream(11, 1))
    b = run_chain(model, "SVE", 30, RandomStream(11, 1))
    assert a == b
    assert all(0.0 <= r.accept_prob <= 1.0 for r in a.records)
