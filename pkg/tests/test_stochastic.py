import math

import numpy as np
import pytest

from markedmzi import experiment as ex, stochastic as st

PHI30 = math.radians(30)


@pytest.fixture
def particle30():
    return ex.coincidence_table_analytic(PHI30, "particle")


def test_golden_counts(particle30):
    # frozen output of PCG64 / SeedSequence(42, spawn_key=(t,)); must never change silently
    s0 = st.sample_counts(particle30, st.RunConfig(1000, 1, 42))
    assert [s0.counts[c] for c in particle30.cells] == [271, 0, 288, 0, 231, 254]
    assert s0.total == 1044 and s0.seed_used == 42
    s3 = st.sample_counts(particle30, st.RunConfig(1000, 5, 42), trial=3)
    assert [s3.counts[c] for c in particle30.cells] == [260, 0, 236, 0, 244, 227]


def test_zero_probability_cell_never_counts(particle30):
    for trial in range(50):
        s = st.sample_counts(particle30, st.RunConfig(10**6, 50, 3), trial)
        assert s.counts["D1", "D4"] == 0
        assert s.counts["D2", "D3"] == 0


def test_total_is_sum(particle30):
    s = st.sample_counts(particle30, st.RunConfig(5000, 1, 9))
    assert s.total == sum(s.counts.values())


def test_same_seed_same_sample(particle30):
    cfg = st.RunConfig(10**5, 1, 123)
    assert st.sample_counts(particle30, cfg) == st.sample_counts(particle30, cfg)


def test_trials_get_distinct_streams(particle30):
    cfg = st.RunConfig(10**5, 2, 123)
    assert st.sample_counts(particle30, cfg, 0) != st.sample_counts(particle30, cfg, 1)


def test_law_of_large_numbers(particle30):
    n, trials = 2000, 400
    cfg = st.RunConfig(n, trials, 5)
    samples = st.run_trials(particle30, cfg)
    for c in particle30.cells:
        p = particle30[c]
        mean = np.mean([s.counts[c] for s in samples])
        # sigma of the trial-mean of a Poisson(Np) count
        sigma = math.sqrt(n * p / trials)
        assert abs(mean - n * p) <= 3 * sigma + 1e-12


def test_errorbar_scaling(particle30):
    small = st.estimate_errorbars(particle30, st.RunConfig(10**4, 100, 1))
    large = st.estimate_errorbars(particle30, st.RunConfig(10**6, 100, 1))
    for c in particle30.cells:
        if particle30[c] > 0:
            assert small.std[c] / large.std[c] == pytest.approx(10.0, rel=0.2)


def test_zero_cell_mean_and_std(particle30):
    est = st.estimate_errorbars(particle30, st.RunConfig(10**4, 20, 1))
    assert est.mean["D1", "D4"] == 0.0 and est.std["D1", "D4"] == 0.0


def test_phi30_means_within_three_sigma(particle30):
    est = st.estimate_errorbars(particle30, st.RunConfig(10**5, 100, 1))
    for c in particle30.cells:
        assert abs(est.mean[c] - particle30[c]) <= 3 * est.std[c] + 1e-15
    assert est.trials_used == 100 and est.excluded == 0


def test_degenerate_trials_excluded(particle30):
    cfg = st.RunConfig(1, 200, 11)
    samples = st.run_trials(particle30, cfg)
    empty = sum(s.total == 0 for s in samples)
    assert empty > 0
    est = st.estimate_errorbars(particle30, cfg, samples=samples)
    assert est.excluded == empty
    assert est.trials_used == 200 - empty


def test_needs_two_trials(particle30):
    with pytest.raises(ValueError):
        st.estimate_errorbars(particle30, st.RunConfig(100, 1, 1))


def test_thread_count_does_not_matter(particle30):
    cfg = st.RunConfig(10**4, 40, 77)
    serial = st.estimate_errorbars(particle30, cfg, workers=1)
    threaded = st.estimate_errorbars(particle30, cfg, workers=4)
    assert serial == threaded


def test_trial_order_does_not_matter(particle30):
    cfg = st.RunConfig(10**4, 30, 8)
    reversed_run = [st.sample_counts(particle30, cfg, t) for t in reversed(range(cfg.trials))]
    in_order = sorted(reversed_run, key=lambda s: s.trial)
    assert in_order == st.run_trials(particle30, cfg)


def test_chi_square_accepts_true_model():
    cfg = st.RunConfig(10**5, 100, 1)
    for phi in np.radians(np.linspace(22.5, 45, 16)):
        for mode in ("particle", "wave"):
            table = ex.coincidence_table_analytic(phi, mode, 0.0)
            assert st.chi_square_test(table, cfg).passes(1e-3)


def test_chi_square_rejects_wrong_model():
    cfg = st.RunConfig(10**5, 20, 1)
    truth = ex.coincidence_table_analytic(math.radians(30), "wave", 0.0)
    wrong = ex.coincidence_table_analytic(math.radians(31), "wave", 0.0)
    samples = st.run_trials(truth, cfg)
    assert not st.chi_square_test(wrong, cfg, samples).passes(1e-3)


def test_chi_square_flags_counts_in_forbidden_cell():
    cfg = st.RunConfig(10**4, 5, 1)
    truth = ex.coincidence_table_analytic(math.radians(30), "wave", 0.0)
    forbidden = ex.coincidence_table_analytic(math.radians(45), "wave", 0.0)
    samples = st.run_trials(truth, cfg)
    res = st.chi_square_test(forbidden, cfg, samples)
    assert res.pvalue == 0.0


@pytest.mark.parametrize(
    "kwargs",
    [dict(expected_pairs=0), dict(trials=0), dict(seed=-1), dict(seed=2**64), dict(expected_pairs=1.5)],
)
def test_run_config_validation(kwargs):
    with pytest.raises(ValueError):
        st.RunConfig(**kwargs)


def test_seed_full_64_bit_range(particle30):
    st.sample_counts(particle30, st.RunConfig(100, 1, 2**64 - 1))
