import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import gaugetransfer.disorder as disorder_mod
from gaugetransfer.analytic import exact_final_state_from_delta, theta_vector
from gaugetransfer.chain import ChainSpec, GaugeRamp
from gaugetransfer.disorder import (
    DisorderRealization,
    Normal,
    UniformSymmetric,
    disorder_sweep_T,
    ensemble_transfer,
    realization_seed,
    sample_disorder,
    splitmix64,
)
from gaugetransfer.errors import IntegrationError


def test_splitmix64_reference_outputs():
    # published first outputs of the SplitMix64 generator seeded with 0
    assert splitmix64(0x9E3779B97F4A7C15) == 0xE220A8397B1DCDAF
    assert realization_seed(0, 0) == 0xE220A8397B1DCDAF
    assert realization_seed(0, 1) == 0x6E789E6AA1B965F4
    assert realization_seed(0, 2) == 0x06C45D188009454F


def test_distribution_parameters_validated():
    for bad in (0.0, -1.0, float("nan")):
        with pytest.raises(ValueError):
            UniformSymmetric(bad)
        with pytest.raises(ValueError):
            Normal(bad)


def test_realization_shapes():
    with pytest.raises(ValueError):
        DisorderRealization(np.zeros(4), np.zeros(4))
    r = sample_disorder(ChainSpec(3), UniformSymmetric(1.0), 7)
    assert r.delta_n.shape == (6,) and r.e_n.shape == (7,)
    assert np.all(r.e_n == 0.0)
    assert not r.delta_n.flags.writeable


@settings(max_examples=50, deadline=None)
@given(w=st.floats(1e-12, 5.0), seed=st.integers(0, 2**64 - 1), N=st.integers(1, 12))
def test_uniform_samples_inside_open_interval(w, seed, N):
    r = sample_disorder(ChainSpec(N), UniformSymmetric(w), seed, site_energies=True)
    assert np.all(np.abs(r.delta_n) < w) and np.all(np.abs(r.e_n) < w)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**64 - 1), N=st.integers(1, 8))
def test_realizations_are_reproducible(seed, N):
    kind = Normal(0.3)
    a = sample_disorder(ChainSpec(N), kind, seed, site_energies=True)
    b = sample_disorder(ChainSpec(N), kind, seed, site_energies=True)
    assert np.array_equal(a.delta_n, b.delta_n) and np.array_equal(a.e_n, b.e_n)


def test_tiny_width_limit():
    r = sample_disorder(ChainSpec(5), UniformSymmetric(1e-15), 3, site_energies=True)
    assert np.all(np.abs(r.delta_n) < 1e-15) and np.all(np.abs(r.e_n) < 1e-15)


def _pooled(kind, count=10000, N=5):
    chain = ChainSpec(N)
    return np.concatenate([sample_disorder(chain, kind, realization_seed(1, r)).delta_n for r in range(count)])


def test_uniform_pooled_standard_deviation():
    # uniform on (-w, w) has sigma = 2w / sqrt(12); unit-width interval gives 1/sqrt(12)
    samples = _pooled(UniformSymmetric(0.5))
    assert abs(samples.std() - 1 / np.sqrt(12)) / (1 / np.sqrt(12)) < 0.02
    assert abs(samples.mean()) < 0.01


def test_normal_pooled_standard_deviation():
    samples = _pooled(Normal(0.5))
    assert abs(samples.std() - 0.5) / 0.5 < 0.02


def test_no_disorder_ensemble_matches_ordered_chain():
    chain, ramp = ChainSpec(5), GaugeRamp(2.0, 3.33)
    res = ensemble_transfer(chain, ramp, UniformSymmetric(1e-15), 1, base_seed=4)
    assert abs(res.p_hermitian[0] - abs(theta_vector(chain, 3.33)[-1]) ** 2) < 1e-8
    c = exact_final_state_from_delta(chain, ramp)
    assert abs(res.p_transfer[0] - abs(c[-1]) ** 2 / np.sum(np.abs(c) ** 2)) < 1e-8


def test_ensemble_thread_count_does_not_change_results():
    chain, ramp = ChainSpec(5), GaugeRamp(2.0, 3.33)
    serial = ensemble_transfer(chain, ramp, Normal(0.5), 64, base_seed=11)
    parallel = ensemble_transfer(chain, ramp, Normal(0.5), 64, base_seed=11, threads=4)
    for name in ("p_transfer", "p_hermitian", "seeds", "final_norm"):
        assert getattr(serial, name).tobytes() == getattr(parallel, name).tobytes()


def test_ensemble_statistics_small():
    chain, ramp = ChainSpec(5), GaugeRamp(2.0, 3.33)
    res = ensemble_transfer(chain, ramp, UniformSymmetric(0.5), 400, base_seed=1)
    assert res.failure_count == 0
    for p in (res.p_transfer, res.p_hermitian):
        assert np.all((p >= 0.0) & (p <= 1.0))
    assert res.p_transfer.mean() > 0.95
    assert res.p_transfer.mean() - res.p_hermitian.mean() > 0.1
    # Hermitian results are spread out and mostly below the ordered value 0.78
    assert np.mean(res.p_hermitian < 0.78) > 0.5
    summary = res.summary(bins=20)
    assert summary["count"] == 400 and len(summary["transfer"]["histogram"]) == 20
    assert sum(summary["transfer"]["histogram"]) == 400
    counts, edges = res.histogram("hermitian", bins=10)
    assert counts.sum() == 400 and edges[0] == 0.0 and edges[-1] == 1.0


def test_failed_realizations_are_excluded(monkeypatch):
    real_pair = disorder_mod._pair
    bad_seed = realization_seed(5, 2)

    def flaky(chain, ramp, realization):
        if realization.seed == bad_seed:
            raise IntegrationError("forced", 0.0)
        return real_pair(chain, ramp, realization)

    monkeypatch.setattr(disorder_mod, "_pair", flaky)
    res = ensemble_transfer(ChainSpec(3), GaugeRamp(2.0, 2.0), UniformSymmetric(0.2), 6, base_seed=5)
    assert res.failure_count == 1 and res.failed[2]
    summary = res.summary()
    assert summary["failures"] == 1
    assert sum(summary["transfer"]["histogram"]) == 5
    assert np.isfinite(summary["transfer"]["mean"])


def test_count_must_be_positive():
    with pytest.raises(ValueError):
        ensemble_transfer(ChainSpec(2), GaugeRamp(1.0, 1.0), Normal(0.1), 0)


def test_sweep_without_disorder_reduces_to_ordered_chain():
    chain, ramp = ChainSpec(5), GaugeRamp(4.0, 1.0)
    T_grid = np.linspace(0.5, 6.0, 12)
    sweep = disorder_sweep_T(chain, ramp, None, T_grid)
    for k, T in enumerate(T_grid):
        assert abs(sweep.p_hermitian[k] - abs(theta_vector(chain, T)[-1]) ** 2) < 1e-10
        c = exact_final_state_from_delta(chain, GaugeRamp(4.0, T))
        assert abs(sweep.p_transfer[k] - abs(c[-1]) ** 2 / np.sum(np.abs(c) ** 2)) < 1e-10
    assert np.allclose(sweep.kappa_T, T_grid)


def test_sweep_strong_disorder_keeps_gauge_transfer_high():
    chain = ChainSpec(5)
    real = sample_disorder(chain, UniformSymmetric(1.0), realization_seed(1, 0), site_energies=True)
    sweep = disorder_sweep_T(chain, GaugeRamp(4.0, 1.0), real, np.linspace(0.25, 8.0, 60))
    assert np.median(sweep.p_transfer) > 0.99
    assert sweep.p_transfer.mean() > sweep.p_hermitian.mean() + 0.3


def test_sweep_long_chain_hermitian_suppressed():
    chain = ChainSpec(10)
    real = sample_disorder(chain, UniformSymmetric(1.0), realization_seed(1, 0), site_energies=True)
    sweep = disorder_sweep_T(chain, GaugeRamp(4.0, 1.0), real, np.linspace(0.25, 8.0, 40))
    assert sweep.p_hermitian.max() < 0.05
    assert sweep.p_transfer.mean() > 0.85
