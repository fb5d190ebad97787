import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from engagemax.beliefs import DecisionProblem, binary_belief, quadratic_entropy
from engagemax.errors import CapabilityError, InfeasibleError, InputError
from engagemax.simplex import solve_lp
from engagemax.static_ri import (BeliefClass, PosteriorDistribution, agent_benchmark, classify_belief,
                                 continuation_region, restricted_value, solve_static_ri, static_ri)

from oracles import E, agent_oracle, restricted_value_oracle, sigmoid

P_LO, P_HI = 1 / (1 + E), E / (1 + E)


def test_posterior_validation():
    with pytest.raises(InputError, match="sum to 1"):
        PosteriorDistribution([[0.5, 0.5], [0.2, 0.8]], [0.5, 0.6])
    with pytest.raises(InputError, match="valid belief"):
        PosteriorDistribution([[0.5, 0.6]], [1.0])
    pi = PosteriorDistribution([[0.8, 0.2], [0.2, 0.8]], [0.5, 0.5])
    np.testing.assert_allclose(pi.mean(), [0.5, 0.5])
    assert pi.binary_support() == (0.2, 0.8)
    assert not pi.is_degenerate([0.5, 0.5])


def test_agent_support_at_uniform_prior(guess):
    # logit closed form: posteriors e/(1+e) and 1/(1+e)
    pi = solve_static_ri(guess, 2.0).sorted_binary()
    np.testing.assert_allclose(pi.beliefs[:, 1], [P_LO, P_HI], atol=1e-10)
    np.testing.assert_allclose(pi.weights, [0.5, 0.5], atol=1e-10)


def test_benchmark_value_and_engagement(guess):
    b = agent_benchmark(guess)
    assert b.continuation
    assert b.value == pytest.approx(0.240229013917, abs=1e-10)
    assert b.engagement == pytest.approx(0.110944071672, abs=1e-10)
    assert b.alpha == pytest.approx(1 / 0.110944071672, rel=1e-9)
    assert b.boundaries == pytest.approx((P_LO, P_HI), abs=1e-9)


@given(st.floats(0.28, 0.72))
def test_benchmark_matches_grid_envelope(t0):
    P = DecisionProblem([[1, -1], [-1, 1]], binary_belief(t0), kappa=2.0)
    v, lo, hi = agent_oracle(t0)
    b = agent_benchmark(P)
    assert b.value == pytest.approx(v, abs=5e-6)
    lo_s, hi_s = b.posterior.binary_support()
    assert abs(lo_s - lo) < 1e-3 and abs(hi_s - hi) < 1e-3


@given(st.floats(0.28, 0.72))
def test_agent_posteriors_are_locally_invariant(t0):
    P = DecisionProblem([[1, -1], [-1, 1]], binary_belief(t0), kappa=2.0)
    lo, hi = agent_benchmark(P).posterior.binary_support()
    assert lo == pytest.approx(P_LO, abs=1e-9) and hi == pytest.approx(P_HI, abs=1e-9)


def test_high_cost_at_uniform_prior_still_learns(guess):
    # the kink at 1/2 makes some information worth buying at any cost
    pi = solve_static_ri(guess, 10.0)
    assert pi.binary_support()[1] == pytest.approx(sigmoid(0.2), abs=1e-9)


def test_high_cost_at_exterior_prior_is_degenerate(guess):
    P = guess.with_prior(0.95)
    sol = static_ri(P, 10.0)
    assert sol.degenerate
    assert sol.posterior.beliefs[0].tolist() == P.prior.tolist()


def test_prior_outside_continuation_stops(guess):
    b = agent_benchmark(guess.with_prior(0.2))
    assert not b.continuation and b.engagement == 0.0
    assert b.value == pytest.approx(0.6)


def test_logit_and_concavification_agree(guess):
    for t0 in (0.35, 0.5, 0.6):
        P = guess.with_prior(t0)
        for c in (0.5, 1.3, 2.0):
            a = static_ri(P, c, method="logit")
            b = static_ri(P, c, method="concavification")
            assert a.value == pytest.approx(b.value, abs=1e-9)
            np.testing.assert_allclose(a.posterior.sorted_binary().beliefs,
                                       b.posterior.sorted_binary().beliefs, atol=1e-7)


def test_non_shannon_binary_uses_concavification(guess):
    P = guess.replace(entropy=quadratic_entropy())
    sol = static_ri(P, 2.0)
    assert sol.method == "concavification"
    assert sol.posterior.barycenter_error(P.prior) < 1e-12
    # 2|s| - 2 c s^2 with s = t - 1/2 peaks at s = 1/(2c)
    assert sol.posterior.binary_support() == pytest.approx((0.25, 0.75), abs=1e-9)
    # cheap information: corner solution at the vertices
    assert static_ri(P, 0.8).posterior.binary_support() == pytest.approx((0.0, 1.0), abs=1e-12)


def test_non_shannon_many_states_is_unsupported():
    P = DecisionProblem(np.eye(3), [1 / 3] * 3, entropy=quadratic_entropy())
    with pytest.raises(CapabilityError):
        static_ri(P, 1.0)


def test_invalid_cost_scale(guess):
    with pytest.raises(InputError, match="cost_scale"):
        static_ri(guess, 0.0)


@given(st.integers(0, 10_000), st.floats(0.2, 3.0))
def test_many_state_solution_is_bayes_plausible_and_kkt(seed, c):
    rng = np.random.default_rng(seed)
    U = rng.normal(size=(3, 4))
    prior = rng.dirichlet(np.ones(4) * 2)
    P = DecisionProblem(U, prior / prior.sum())
    sol = static_ri(P, c)
    assert sol.posterior.barycenter_error(P.prior) < 1e-9
    assert sol.kkt_residual < 1e-8
    # never worse than learning nothing
    assert sol.value >= P.payoff(P.prior) - 1e-12


@given(st.integers(0, 10_000))
def test_many_state_value_beats_random_posteriors(seed):
    rng = np.random.default_rng(seed)
    U = rng.normal(size=(3, 3))
    P = DecisionProblem(U, [1 / 3] * 3)
    c = 1.0
    sol = static_ri(P, c)
    # random Bayes-plausible two-atom posteriors
    for _ in range(20):
        d = rng.normal(size=3)
        d -= d.mean()
        s = 0.3 / np.max(np.abs(d))
        B = np.array([P.prior + s * d, P.prior - s * d])
        pi = PosteriorDistribution(B, [0.5, 0.5])
        v = pi.action_value(P) - c * pi.information(P)
        assert v <= sol.value + 1e-9


def test_continuation_region_endpoints(guess):
    region = continuation_region(guess)
    assert len(region) == 1
    assert region[0].left == pytest.approx(P_LO, abs=1e-9)
    assert region[0].right == pytest.approx(P_HI, abs=1e-9)


@given(st.floats(0.08, 0.92))
def test_restricted_value_matches_chord_oracle(t):
    atoms = [0.0761720988, 0.5, 0.9238279012]
    P = DecisionProblem([[1, -1], [-1, 1]], [0.5, 0.5])
    pi = PosteriorDistribution([[1 - a, a] for a in atoms], [0.25, 0.5, 0.25])
    assert restricted_value(P, binary_belief(t), pi) == pytest.approx(restricted_value_oracle(t, atoms), abs=1e-9)


def test_restricted_value_outside_hull(guess):
    pi = PosteriorDistribution([[0.7, 0.3], [0.3, 0.7]], [0.5, 0.5])
    with pytest.raises(InfeasibleError):
        restricted_value(guess, binary_belief(0.9), pi)


def test_classification(guess):
    b = agent_benchmark(guess)
    pi = b.posterior
    assert classify_belief(guess, binary_belief(P_HI), pi) is BeliefClass.DECISIVE
    assert classify_belief(guess, binary_belief(0.5), pi) is BeliefClass.SUSPENSIVE
    assert classify_belief(guess, binary_belief(0.9), pi) is BeliefClass.STOP


def test_lp_small_problem():
    # max x + y s.t. x + 2y = 1, x, y >= 0 -> x = 1
    res = solve_lp(np.array([1.0, 1.0]), np.array([[1.0, 2.0]]), np.array([1.0]))
    assert res.value == pytest.approx(1.0)
    np.testing.assert_allclose(res.x, [1.0, 0.0])
    with pytest.raises(InfeasibleError):
        solve_lp(np.array([1.0]), np.array([[1.0]]), np.array([-1.0]))
