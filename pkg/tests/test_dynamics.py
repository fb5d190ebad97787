import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from engagemax.beliefs import binary_belief
from engagemax.dynamics import (MC_SIGMAS, AuditReport, FixedDeadline, StopAtFirstJump, StopImmediately,
                                audit_feasibility, audit_garbling, audit_stopping, exact_dilution_rate,
                                fsum_mean, garble, garbling_value, mean_se, merge_pair, sample_dilution)
from engagemax.errors import AuditFailure, InputError
from engagemax.principal import solve_principal
from engagemax.static_ri import BeliefClass, PosteriorDistribution, agent_benchmark, classify_belief

from oracles import deadline_value


@pytest.fixture
def star(guess):
    return solve_principal(guess)


def test_exact_rate(guess, star):
    assert exact_dilution_rate(star.pi_star, guess) == pytest.approx(star.alpha_star, rel=1e-12)


def test_sampling_is_reproducible(star):
    a = sample_dilution(star.pi_star, star.alpha_star, 1000, seed=7)
    b = sample_dilution(star.pi_star, star.alpha_star, 1000, seed=7)
    c = sample_dilution(star.pi_star, star.alpha_star, 1000, seed=8)
    assert np.array_equal(a.tau, b.tau) and np.array_equal(a.index, b.index)
    assert not np.array_equal(a.tau, c.tau)


@given(st.integers(0, 2**32), st.integers(0, 500), st.integers(1, 50))
def test_paths_depend_only_on_seed_and_index(seed, start, n):
    pi = PosteriorDistribution([[0.9, 0.1], [0.1, 0.9]], [0.5, 0.5])
    whole = sample_dilution(pi, 2.0, start + n, seed)
    part = sample_dilution(pi, 2.0, n, seed, start=start)
    assert np.array_equal(whole.tau[start:], part.tau)
    assert np.array_equal(whole.index[start:], part.index)


def test_memoryless_jump_times(star):
    ens = sample_dilution(star.pi_star, star.alpha_star, 100_000, seed=3)
    t = 0.3
    rest = ens.tau[ens.tau > t] - t
    ks = stats.kstest(rest, "expon", args=(0, 1 / star.alpha_star))
    crit = 1.628 / math.sqrt(rest.size)  # 1% level, large n
    assert ks.statistic < crit


def test_information_is_linear_until_stopping(star):
    ens = sample_dilution(star.pi_star, star.alpha_star, 50, seed=1)
    for p in ens.paths:
        for t in (0.0, 0.5 * p.jump_time, p.jump_time, 2 * p.jump_time + 1):
            assert p.info_at(t) == pytest.approx(min(t, p.jump_time) * ens.chi, abs=1e-15)
        assert p.info_total == ens.chi * p.jump_time


def test_path_law_classification(guess, star):
    ens = sample_dilution(star.pi_star, star.alpha_star, 2000, seed=2)
    assert classify_belief(guess, ens.prior, star.pi_star) is BeliefClass.SUSPENSIVE
    for q in np.unique(ens.terminal_beliefs, axis=0):
        assert classify_belief(guess, q, star.pi_star) is BeliefClass.DECISIVE


def test_beliefs_before_and_after(star):
    ens = sample_dilution(star.pi_star, star.alpha_star, 10, seed=0)
    i = 0
    p = ens.path(i)
    np.testing.assert_array_equal(p.belief_at(0.5 * p.jump_time), ens.prior)
    np.testing.assert_array_equal(p.belief_at(p.jump_time), ens.terminal_beliefs[i])


def test_feasibility_audit_passes(guess, star):
    ens = sample_dilution(star.pi_star, star.alpha_star, 100_000, seed=0)
    rep = audit_feasibility(ens, guess)
    assert rep.passed, rep.failures()


def test_feasibility_audit_flags_excess_rate(guess, star):
    # jumping twice as fast learns more than capacity allows
    ens = sample_dilution(star.pi_star, 2 * star.alpha_star, 100_000, seed=0)
    rep = audit_feasibility(ens, guess)
    assert not rep["capacity"].passed
    with pytest.raises(AuditFailure):
        rep.raise_if_failed()


def test_stopping_closed_forms(guess, star):
    Eu = star.pi_star.action_value(guess)
    a, k = star.alpha_star, guess.kappa
    assert StopAtFirstJump().closed_form(Eu, a, 0.0, k) == pytest.approx(0.0, abs=1e-9)
    assert StopImmediately().closed_form(Eu, a, 0.0, k) == 0.0
    assert FixedDeadline(0.5).closed_form(Eu, a, 0.0, k) == pytest.approx(deadline_value(Eu, a, 0.0, k, 0.5), abs=1e-15)


def test_stopping_audit_under_principal(guess, star):
    rep = audit_stopping(star.pi_star, star.alpha_star, guess, n=100_000, seed=0)
    assert rep.passed
    rec = rep["recommended"]
    imm = rep["stop-immediately"]
    assert imm.value == 0.0
    assert abs(rec.value - imm.value) <= imm.tolerance
    # the deadline rule is weakly worse in closed form too
    assert rep["deadline-0.5"].bound <= rec.bound + 1e-12


def test_agent_policy_strictly_beats_stopping(guess):
    b = agent_benchmark(guess)
    rep = audit_stopping(b.posterior, b.alpha, guess, n=100_000, seed=0)
    gain = rep["recommended"].value - rep["stop-immediately"].value
    assert gain == pytest.approx(0.240229013917, abs=MC_SIGMAS * 0.004)
    assert rep["recommended"].bound == pytest.approx(0.240229013917, abs=1e-9)


def test_garbling_audit(guess, star):
    rep = audit_garbling(star.pi_star, star.alpha_star, guess, n_garbles=200, seed=0)
    assert rep.passed
    assert rep["identity"].value == pytest.approx(0.0, abs=1e-9)
    assert rep["full"].value == pytest.approx(-guess.kappa / star.alpha_star)


def test_merge_is_strictly_worse(guess, star):
    merged = merge_pair(star.pi_star, 0, 1)
    assert merged.size == 1
    assert garbling_value(guess, merged, star.alpha_star) < 0.0


@given(st.integers(0, 10_000))
def test_garbling_preserves_the_mean(seed):
    rng = np.random.default_rng(seed)
    pi = PosteriorDistribution(rng.dirichlet(np.ones(3), size=4), rng.dirichlet(np.ones(4)))
    M = rng.dirichlet(np.ones(3), size=4)
    hat = garble(pi, M)
    assert np.max(np.abs(hat.mean() - pi.mean())) < 1e-12


def test_garble_rejects_bad_matrix(star):
    with pytest.raises(InputError):
        garble(star.pi_star, np.ones((2, 2)))


def test_sampler_input_checks(star):
    with pytest.raises(InputError):
        sample_dilution(PosteriorDistribution.point(binary_belief(0.5)), 1.0, 10)
    with pytest.raises(InputError):
        sample_dilution(star.pi_star, -1.0, 10)
    with pytest.raises(InputError):
        sample_dilution(star.pi_star, 1.0, 0)


def test_fsum_mean_is_compensated():
    x = np.array([1e16, 1.0, -1e16] * 1000)
    assert fsum_mean(x) == pytest.approx(1 / 3, abs=1e-15)


def test_report_rows():
    rep = AuditReport("x")
    rep.add("a", 1.0, 0.0, 0.1, False)
    assert rep.rows() == [("x", "a", 1.0, 0.0, 0.1, False)]
    assert not rep


def test_csv_export(tmp_path, star, guess):
    ens = sample_dilution(star.pi_star, star.alpha_star, 5, seed=0)
    p = ens.to_csv(tmp_path / "p.csv", guess.states)
    lines = p.read_text().splitlines()
    assert lines[0] == "path_id,jump_time,terminal_L,terminal_R,info_total"
    assert len(lines) == 6
