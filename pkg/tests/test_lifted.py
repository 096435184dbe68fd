import numpy as np
import pytest

import relochain as rc
from relochain.errors import StateCapExceededError

from conftest import R_CLOSED

# Frozen before the build: power iteration on the explicit 4x4 window chain
# for the two-point law (0.5, 0.5), cross-checked against a dense eigensolve.
R_BOLD_HALF_HALF = 0.7893433926663943


def two_point_law():
    return rc.RelocationLaw.explicit([0.5, 0.5])


def test_build_dirac0_is_sigma(sigma_fig):
    chain = rc.build_lifted(sigma_fig, rc.RelocationLaw.dirac(0))
    assert chain.d == 0 and chain.n_states == 2
    np.testing.assert_array_equal(chain.weights, sigma_fig.entries)


def test_build_two_point_rows(sigma_fig):
    chain = rc.build_lifted(sigma_fig, two_point_law())
    assert chain.n_states == 4
    # window (s0=0, s1=1) has index 1; weights 0.5 sigma[0,t] + 0.5 sigma[1,t]
    np.testing.assert_allclose(chain.weights[1], [0.45, 0.33], atol=1e-15)
    # successor under t: t*2 + 0
    assert chain.window_index(rc.HistoryWindow((0, 0))) == 0
    assert chain.window_index(rc.HistoryWindow((1, 0))) == 2
    assert (chain.weights.sum(axis=1) <= 1 + 1e-12).all()


def test_upper_mode_with_zero_tail_is_exact(sigma_fig):
    trunc = rc.truncate_law(rc.RelocationLaw.dirac(1), 1e-9, d_max=5)
    assert trunc.tail_mass == 0.0
    exact = rc.build_lifted(sigma_fig, trunc, mode="exact")
    upper = rc.build_lifted(sigma_fig, trunc, mode="upper")
    np.testing.assert_array_equal(exact.weights, upper.weights)


def test_state_cap(sigma_fig):
    with pytest.raises(StateCapExceededError) as err:
        rc.build_lifted(sigma_fig, rc.RelocationLaw.dirac(6), state_cap=64)
    assert err.value.best_d is not None


def test_radius_dirac_matches_benchmark(sigma_fig):
    for d in range(4):
        chain = rc.build_lifted(sigma_fig, rc.RelocationLaw.dirac(d))
        res = rc.lifted_spectral_radius(chain)
        assert abs(res.radius - R_CLOSED) <= 1e-10
        assert res.residual <= 1e-10 * res.radius


def test_radius_two_point_oracle(sigma_fig):
    res = rc.lifted_spectral_radius(rc.build_lifted(sigma_fig, two_point_law()))
    assert res.radius == pytest.approx(R_BOLD_HALF_HALF, abs=1e-12)
    assert res.radius - R_CLOSED > 1e-4


def test_survival_examples(sigma_fig):
    chain0 = rc.build_lifted(sigma_fig, rc.RelocationLaw.dirac(0))
    w = rc.HistoryWindow((0, 0))
    assert rc.survival_exact(chain0, w, 0) == 1.0
    assert rc.survival_exact(chain0, w, 1) == pytest.approx(0.80, abs=1e-15)
    assert rc.survival_exact(chain0, w, 2) == pytest.approx(0.6368, abs=1e-15)


def test_survival_rate_converges_to_radius(sigma_fig):
    chain = rc.build_lifted(sigma_fig, two_point_law())
    p = rc.survival_exact(chain, rc.HistoryWindow((0, 0)), 2000)
    assert p ** (1 / 2000) == pytest.approx(R_BOLD_HALF_HALF, abs=1e-3)


def test_structure_check(sigma_fig):
    chain = rc.build_lifted(sigma_fig, two_point_law())
    assert rc.lifted_structure_check(chain) == (True, True)
    chain0 = rc.build_lifted(sigma_fig, rc.RelocationLaw.dirac(0))
    assert rc.lifted_structure_check(chain0) == (True, True)
    # periodic two-cycle support with an even-index law: the lift is reducible
    two_cycle = np.array([[0.0, 0.9], [0.9, 0.0]])
    even_law = rc.RelocationLaw.explicit([0.5, 0.0, 0.5])
    lifted = rc.build_lifted(two_cycle, even_law)
    irreducible, _ = rc.lifted_structure_check(lifted)
    assert not irreducible


def test_bracket_exact_for_bounded(sigma_fig):
    br = rc.bracket_radius(sigma_fig, rc.RelocationLaw.dirac(2))
    assert br.exact and br.lo == br.hi and br.tail_mass == 0.0
    assert abs(br.lo - R_CLOSED) <= 1e-10
    br2 = rc.bracket_radius(sigma_fig, two_point_law())
    assert br2.lo == pytest.approx(R_BOLD_HALF_HALF, abs=1e-12)


def test_bracket_geometric(sigma_fig):
    br = rc.bracket_radius(sigma_fig, rc.RelocationLaw.geometric(0.25), delta_tail=1e-6, d_max=14)
    assert br.lo <= br.hi
    assert br.cap_reached  # 1e-6 needs d = 48
    assert br.d_used == 14
    tail = br.tail_mass
    assert br.hi - br.lo <= 2 * tail / (1 - tail)
    assert br.lo >= R_CLOSED - 1e-12
    assert br.hi <= 0.80 + 1e-12


def test_bracket_lower_lift_monotone_in_depth(sigma_fig):
    law = rc.RelocationLaw.geometric(0.25)
    prev = 0.0
    for d in (4, 6, 8, 10):
        br = rc.bracket_radius(sigma_fig, law, delta_tail=1e-300, d_max=d)
        assert br.lo_lift >= prev - 1e-12
        assert br.lo >= R_CLOSED - 1e-12
        prev = br.lo_lift


def test_tilted_lift_dominates_tilted_benchmark(sigma_fig):
    rng = np.random.default_rng(29)
    law = two_point_law()
    for _ in range(10):
        a = rng.uniform(0.2, 3.0, size=2)
        tilted = rc.tilt(sigma_fig, a)
        r_a = rc.perron_triple(tilted).r
        chain = rc.build_lifted(tilted, law)
        r_bold_a = rc.lifted_spectral_radius(chain).radius
        assert r_bold_a >= r_a - 1e-12


def test_nondirac_strictly_above_benchmark(sigma_fig):
    for masses in ([0.5, 0.5], [0.2, 0.3, 0.5], [0.9, 0.1]):
        law = rc.RelocationLaw.explicit(masses)
        res = rc.lifted_spectral_radius(rc.build_lifted(sigma_fig, law))
        assert res.radius > R_CLOSED


def test_exact_radius_dominates_own_truncations(sigma_fig):
    law = rc.RelocationLaw.explicit([0.2, 0.3, 0.5])
    exact = rc.lifted_spectral_radius(rc.build_lifted(sigma_fig, law)).radius
    for d in (0, 1):
        trunc = rc.truncate_law(law, 1e-300, d_max=d)
        lower = rc.lifted_spectral_radius(rc.build_lifted(sigma_fig, trunc, mode="lower")).radius
        assert exact >= lower - 1e-12
