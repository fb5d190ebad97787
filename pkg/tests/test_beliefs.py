import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from engagemax.beliefs import (SHANNON, DecisionProblem, Rotation, as_belief, binary_belief,
                               check_rotational_symmetry, entropy_gap, is_vertex, quadratic_entropy, u_hat,
                               vertex)
from engagemax.errors import InputError

from oracles import E, gap


def simplex_points(n):
    return st.lists(st.floats(0.01, 1.0), min_size=n, max_size=n).map(lambda v: np.array(v) / np.sum(v))


def test_as_belief_rejects_bad_sum_and_names_field():
    with pytest.raises(InputError, match="prior.*sum to 1"):
        as_belief([0.4, 0.5], name="prior")


def test_as_belief_rejects_negative_and_wrong_size():
    with pytest.raises(InputError, match="nonnegative"):
        as_belief([1.2, -0.2])
    with pytest.raises(InputError, match="expected 3"):
        as_belief([0.5, 0.5], n=3)


def test_beliefs_are_read_only():
    q = binary_belief(0.3)
    with pytest.raises(ValueError):
        q[0] = 1.0


def test_vertices():
    assert is_vertex(vertex(3, 1))
    assert not is_vertex(binary_belief(0.5))


def test_entropy_gaps_of_example_posteriors():
    # closed forms
    assert entropy_gap(SHANNON, binary_belief(E / (1 + E)), binary_belief(0.5)) == pytest.approx(0.110944071672, abs=1e-12)
    assert entropy_gap(SHANNON, binary_belief(4 * E / (1 + 4 * E)), binary_belief(0.5)) == pytest.approx(0.404181105023, abs=1e-12)


@given(st.floats(0.0, 1.0))
def test_shannon_matches_oracle(t):
    assert SHANNON(binary_belief(t)) - SHANNON(binary_belief(0.5)) == pytest.approx(float(gap(t)), abs=1e-14)


@given(simplex_points(3), simplex_points(3), st.floats(0, 1))
def test_negentropy_is_convex(p, q, w):
    m = w * p + (1 - w) * q
    assert SHANNON(m) <= w * SHANNON(p) + (1 - w) * SHANNON(q) + 1e-12


@given(simplex_points(4))
def test_negentropy_bounds(q):
    assert -math.log(4) - 1e-12 <= SHANNON(q) <= 1e-12


@given(simplex_points(3))
def test_gradient_matches_finite_differences(q):
    g = SHANNON.grad(q)
    h = 1e-6
    d = np.array([1.0, -1.0, 0.0])
    fd = (SHANNON(q + h * d) - SHANNON(q - h * d)) / (2 * h)
    assert g @ d == pytest.approx(fd, abs=1e-6)


def test_gradient_undefined_on_boundary():
    with pytest.raises(InputError, match="boundary"):
        SHANNON.grad([1.0, 0.0])


def test_quadratic_entropy_gradient_on_boundary():
    H = quadratic_entropy()
    assert H([1.0, 0.0]) == 1.0
    np.testing.assert_allclose(H.grad([0.25, 0.75]), [0.5, 1.5])


def test_problem_validation():
    with pytest.raises(InputError, match="kappa"):
        DecisionProblem([[1, 0], [0, 1]], [0.5, 0.5], kappa=0)
    with pytest.raises(InputError, match="states"):
        DecisionProblem([[1, 0], [0, 1]], [0.5, 0.5], states=("a",))
    with pytest.raises(InputError, match="prior"):
        DecisionProblem([[1, 0], [0, 1]], [0.5, 0.6])


@given(st.lists(simplex_points(3), min_size=1, max_size=8))
def test_payoff_vectorized_matches_scalar(qs):
    P = DecisionProblem([[1, 0, -1], [0, 1, 0], [-1, 0, 2]], [1 / 3, 1 / 3, 1 / 3])
    vec = P.payoff(np.array(qs))
    assert np.allclose(vec, [u_hat(P, q)[0] for q in qs])


def test_u_hat_ties(guess):
    val, acts = u_hat(guess, [0.5, 0.5])
    assert val == 0.0 and acts == (0, 1)


def test_with_prior_scalar_sets_second_state(guess):
    assert guess.with_prior(0.3).prior.tolist() == [0.7, 0.3]


def test_rotation_must_cycle():
    R = Rotation.from_permutation([1, 2, 0])
    assert R.order == 3
    np.testing.assert_allclose(R.apply([1, 0, 0]), [0, 1, 0])


def test_symmetry_check(guess):
    assert check_rotational_symmetry(SHANNON, guess, Rotation.from_permutation([1, 0]))
    skew = guess.replace(utility=[[1.0, -1.0], [-1.0, 2.0]])
    rep = check_rotational_symmetry(SHANNON, skew, Rotation.from_permutation([1, 0]))
    assert not rep and rep.max_payoff_deviation > 0
