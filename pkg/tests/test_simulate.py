import math

import numpy as np
import pytest

import relochain as rc

from conftest import R_CLOSED


def exact_survival(sigma, law, init, n):
    return rc.survival_exact(rc.build_lifted(sigma, law), init, n)


def test_killed_chain_determinism(sigma_fig):
    law = rc.RelocationLaw.geometric(0.3)
    init = rc.HistoryWindow((0,))
    a = rc.run_killed_chain(sigma_fig, law, init, 50, 5000, rc.RngSpec(99, 3))
    b = rc.run_killed_chain(sigma_fig, law, init, 50, 5000, rc.RngSpec(99, 3))
    np.testing.assert_array_equal(a.curve.p_hat, b.curve.p_hat)
    np.testing.assert_array_equal(a.lifetimes, b.lifetimes)
    c = rc.run_killed_chain(sigma_fig, law, init, 50, 5000, rc.RngSpec(99, 4))
    assert not np.array_equal(a.lifetimes, c.lifetimes)


def test_killed_chain_curve_monotone_and_se(sigma_fig):
    law = rc.RelocationLaw.explicit([0.5, 0.5])
    res = rc.run_killed_chain(sigma_fig, law, rc.HistoryWindow((0, 0)), 40, 20000, rc.RngSpec(1))
    p = res.curve.p_hat
    assert (np.diff(p) <= 0).all()
    np.testing.assert_allclose(res.curve.se, np.sqrt(p * (1 - p) / 20000), atol=1e-15)
    assert p[0] == 1.0


def test_killed_chain_matches_exact_dirac(sigma_fig):
    law = rc.RelocationLaw.dirac(0)
    init = rc.HistoryWindow((0,))
    res = rc.run_killed_chain(sigma_fig, law, init, 10, 40000, rc.RngSpec(7))
    exact = exact_survival(sigma_fig, law, init, 10)
    assert abs(res.curve.p_hat[10] - exact) <= 3 * res.curve.se[10]


def test_killed_chain_decay_rate_at_least_benchmark(sigma_fig):
    # Empirical log-slope of the survival curve over a window where survivors
    # remain plentiful; the persistence rate dominates the benchmark rate.
    law = rc.RelocationLaw.geometric(0.25)
    res = rc.run_killed_chain(sigma_fig, law, rc.HistoryWindow((0,)), 30, 200_000, rc.RngSpec(13))
    p = res.curve.p_hat
    n0, n1 = 10, 30
    slope = (math.log(p[n1]) - math.log(p[n0])) / (n1 - n0)
    se_log = res.curve.se / np.maximum(p, 1e-12)
    slope_se = math.hypot(se_log[n0], se_log[n1]) / (n1 - n0)
    assert slope >= math.log(R_CLOSED) - 3 * slope_se


def test_killed_chain_empirical_measures(sigma_fig):
    law = rc.RelocationLaw.explicit([0.5, 0.5])
    res = rc.run_killed_chain(
        sigma_fig, law, rc.HistoryWindow((0, 0)), 20, 20000, rc.RngSpec(3), checkpoints=(5, 10)
    )
    for n, block in res.empirical.items():
        assert block.shape[1] == 2
        np.testing.assert_allclose(block.sum(axis=1), 1.0, atol=1e-12)
        assert len(block) == int(round(res.curve.p_hat[n] * 20000))


def test_killed_chain_dirac_ratio_stabilizes(sigma_fig):
    # The scaled survival r^-n p(n) approaches a constant for point-mass laws;
    # check the ratio moves little between checkpoints relative to noise.
    law = rc.RelocationLaw.dirac(0)
    res = rc.run_killed_chain(sigma_fig, law, rc.HistoryWindow((0,)), 15, 200_000, rc.RngSpec(21))
    ratios = [res.curve.p_hat[n] / R_CLOSED**n for n in (5, 10, 15)]
    ses = [res.curve.se[n] / R_CLOSED**n for n in (5, 10, 15)]
    assert abs(ratios[2] - ratios[1]) <= 4 * math.hypot(ses[1], ses[2])
    assert abs(ratios[1] - ratios[0]) <= 4 * math.hypot(ses[0], ses[1])


def test_weighted_chain_dirac0_with_h_is_constant(sigma_fig):
    h = rc.perron_triple(sigma_fig).h
    stats = rc.run_weighted_chain(
        sigma_fig, rc.RelocationLaw.dirac(0), h, steps=20_000, burnin=500, thin=10, rng=rc.RngSpec(4)
    )
    assert stats.c2_mean == pytest.approx(math.log(R_CLOSED), abs=1e-12)
    assert np.abs(stats.batch_means - math.log(R_CLOSED)).max() <= 1e-12
    assert stats.c2_se <= 1e-12


def test_weighted_chain_samples_in_simplex(sigma_fig):
    stats = rc.run_weighted_chain(
        sigma_fig, rc.RelocationLaw.geometric(0.05), np.ones(2), steps=60_000, rng=rc.RngSpec(8)
    )
    assert np.abs(stats.theta_samples.sum(axis=1) - 1.0).max() <= 1e-12
    assert (stats.theta_samples >= 0).all()
    assert stats.state_histogram.sum() == stats.steps - stats.burnin


def test_weighted_chain_concentration_direction(sigma_fig):
    stds = []
    for k, eps in enumerate((0.3, 0.1, 0.03, 0.01)):
        stats = rc.run_weighted_chain(
            sigma_fig,
            rc.RelocationLaw.geometric(eps),
            np.ones(2),
            steps=150_000,
            thin=20,
            rng=rc.RngSpec(100, k),
        )
        stds.append(stats.theta_samples[:, 0].std(ddof=1))
    assert stds[0] > stds[1] > stds[2] > stds[3]


def test_weighted_chain_mean_occupation_near_quasi_stationary(sigma_fig, triple_closed):
    _, rho, _ = triple_closed
    stats = rc.run_weighted_chain(
        sigma_fig, rc.RelocationLaw.geometric(0.01), np.ones(2), steps=400_000, rng=rc.RngSpec(30)
    )
    mean_theta = stats.theta_samples.mean(axis=0)
    assert np.abs(mean_theta - rho).sum() / 2 <= 0.02  # total variation


def test_fk_single_step_zero_variance(sigma_fig):
    law = rc.RelocationLaw.explicit([0.5, 0.5])
    init = rc.HistoryWindow((0, 0))
    est = rc.fk_survival_estimate(sigma_fig, law, np.ones(2), init, 1, 200, rc.RngSpec(2))
    expected = rc.defective_kernel_row(init, sigma_fig, law).sum()
    assert est.value == pytest.approx(expected, abs=1e-14)
    assert est.se <= 1e-15


def test_fk_matches_exact_both_tilts(sigma_fig):
    law = rc.RelocationLaw.explicit([0.5, 0.5])
    init = rc.HistoryWindow((0, 0))
    exact = exact_survival(sigma_fig, law, init, 10)
    h = rc.perron_triple(sigma_fig).h
    est1 = rc.fk_survival_estimate(sigma_fig, law, np.ones(2), init, 10, 30_000, rc.RngSpec(5, 0))
    esth = rc.fk_survival_estimate(sigma_fig, law, h, init, 10, 30_000, rc.RngSpec(5, 1))
    assert abs(est1.value - exact) <= 3 * est1.se
    assert abs(esth.value - exact) <= 3 * esth.se
    assert abs(est1.value - esth.value) <= 3 * math.hypot(est1.se, esth.se)


def test_fk_geometric_law_matches_bracket_band(sigma_fig):
    # Unbounded law: no exact finite reference, but the estimate must sit
    # inside the certified radius envelope at a moderate horizon.
    law = rc.RelocationLaw.geometric(0.5)
    init = rc.HistoryWindow((0,))
    est = rc.fk_survival_estimate(sigma_fig, law, np.ones(2), init, 12, 30_000, rc.RngSpec(6))
    br = rc.bracket_radius(sigma_fig, law, delta_tail=1e-9, d_max=16)
    lo_chain = rc.build_lifted(
        sigma_fig, rc.truncate_law(law, 1e-9, 16), mode="lower"
    )
    lo_ref = rc.survival_exact(lo_chain, rc.HistoryWindow((0,) * (lo_chain.d + 1)), 12)
    assert est.value >= lo_ref - 4 * est.se
    assert est.value <= br.hi**12 * 3  # crude envelope: c r^n with c moderate


def test_fk_unbiased_desk_scale(sigma_fig):
    h = rc.perron_triple(sigma_fig).h
    cases = [
        (5, rc.RelocationLaw.explicit([0.5, 0.5]), np.ones(2)),
        (12, rc.RelocationLaw.explicit([0.2, 0.3, 0.5]), h),
        (8, rc.RelocationLaw.dirac(2), np.ones(2)),
    ]
    for n, law, a in cases:
        init = rc.HistoryWindow((0,) * ((law.support_max or 0) + 1))
        exact = exact_survival(sigma_fig, law, init, n)
        hits = 0
        for rep in range(100):
            est = rc.fk_survival_estimate(sigma_fig, law, a, init, n, 2000, rc.RngSpec(1000, rep))
            if abs(est.value - exact) <= 4 * est.se:
                hits += 1
        assert hits >= 99
