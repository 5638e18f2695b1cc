import math
from pathlib import Path

import numpy as np
import pytest
from conftest import random_params
from hypothesis import given, settings
from hypothesis import strategies as st

from safeoc.baseline import OptionCritic
from safeoc.core import Transition, new_rng
from safeoc.envs import FourRoomsEnv, parse_map
from safeoc.envs.fourrooms import LEFT, RIGHT
from safeoc.errors import ContractViolation, InvalidInputError
from safeoc.learner import (
    EpisodeAnchor,
    LearnerConfig,
    actor_update,
    critic_update,
    estimate_controllability,
    run_episode,
    td_error,
    termination_update,
)
from safeoc.model import OptionParameters, grad_log_intra_option, intra_option_probs
from safeoc.oracle import chain_value_oracle, exact_delta_moments, finite_difference, load_mdp

FIXTURES = Path(__file__).parent / "fixtures"
CFG = LearnerConfig(psi=0.05, gamma=0.99, alpha_critic=0.1, alpha_theta=0.01, alpha_nu=0.1)


def two_state_params(q_u_s=5.0, q_next=(10.0, 10.0), nu_next=0.0, options=2):
    """State 0 holds q_u(s, option 0, action 0); state 1 holds one-action option values."""
    p = OptionParameters.zeros(2, options, 1, 0.001)
    p.q_u[0, 0, 0] = q_u_s
    p.q_u[1, :, 0] = q_next
    p.nu[1, 0] = nu_next
    return p


def test_td_terminal_branch():
    p = two_state_params(q_u_s=0.0)
    assert td_error(p, CFG, Transition((0,), 0, 50.0, (1,), True), 0) == 50.0


def test_td_full_termination_uses_max():
    p = two_state_params(q_next=(1.0, 10.0), nu_next=800.0)
    assert td_error(p, CFG, Transition((0,), 0, 0.0, (1,), False), 0) == pytest.approx(4.9, abs=1e-12)


def test_td_continuation_uses_current_option():
    p = two_state_params(q_next=(10.0, 99.0), nu_next=-800.0)
    assert td_error(p, CFG, Transition((0,), 0, 0.0, (1,), False), 0) == pytest.approx(4.9, abs=1e-12)


def test_critic_examples():
    p = OptionParameters.zeros(1, 1, 1, 1.0)
    critic_update(p, (0,), 0, 0, 4.9, 0.1)
    assert p.q_u[0, 0, 0] == pytest.approx(0.49)
    before = p.q_u.copy()
    critic_update(p, (0,), 0, 0, 0.0, 0.1)
    assert np.array_equal(before, p.q_u)


def test_critic_converges_to_constant_reward():
    r, alpha, n = 3.0, 0.1, 1000
    p = OptionParameters.zeros(1, 1, 1, 1.0)
    cfg = LearnerConfig(gamma=0.0, alpha_critic=alpha)
    for _ in range(n):
        d = td_error(p, cfg, Transition((0,), 0, r, (0,), False), 0)
        critic_update(p, (0,), 0, 0, d, alpha)
    # geometric closed form r * (1 - (1 - alpha)^n)
    assert p.q_u[0, 0, 0] == pytest.approx(r * (1 - (1 - alpha) ** n), abs=1e-12)
    assert abs(p.q_u[0, 0, 0] - r) < 1e-6


def test_critic_splits_over_features():
    p = OptionParameters.zeros(3, 1, 2, 1.0)
    critic_update(p, (0, 2), 0, 1, 1.0, 0.5)
    assert p.q_u[0, 0, 1] == p.q_u[2, 0, 1] == 0.25 and p.q_u[1].sum() == 0.0


def vanilla_actor(p, alpha_theta, phi, option, action):
    g = grad_log_intra_option(p, option, phi, action)
    q = p.q_u[phi[0], option, action]
    p.theta[phi[0], option] += alpha_theta * q * g.values


def test_actor_psi_zero_is_vanilla(np_rng):
    cfg = LearnerConfig(psi=0.0, alpha_theta=0.3, temperature=0.5)
    for _ in range(20):
        p = random_params(np_rng, temperature=0.5)
        ref = p.copy()
        anchor = EpisodeAnchor((2,), 1, 0, float(np_rng.normal(scale=5)))
        actor_update(p, cfg, (0,), 0, 2, anchor)
        vanilla_actor(ref, 0.3, (0,), 0, 2)
        assert p.same_as(ref)


def test_actor_zero_anchor_delta_has_no_penalty(np_rng):
    cfg = LearnerConfig(psi=0.05, alpha_theta=0.3, temperature=0.5)
    p = random_params(np_rng, temperature=0.5)
    ref = p.copy()
    actor_update(p, cfg, (0,), 0, 2, EpisodeAnchor((2,), 1, 0, 0.0))
    vanilla_actor(ref, 0.3, (0,), 0, 2)
    assert p.same_as(ref)


def test_actor_requires_anchor():
    with pytest.raises(ContractViolation):
        actor_update(OptionParameters.zeros(1, 1, 2, 1.0), CFG, (0,), 0, 0, None)


@pytest.mark.invariant
def test_actor_matches_surrogate_gradient(np_rng):
    """Update / alpha_theta equals the gradient of
    log pi(a|s,w) q_u(s,w,a) - psi delta0^2 log pi(a0|s0,w0) with q_u, delta0 held fixed."""
    for _ in range(100):
        psi = float(np_rng.uniform(0, 0.5))
        tau = float(np_rng.uniform(0.2, 2.0))
        cfg = LearnerConfig(psi=psi, alpha_theta=1e-3, temperature=tau)
        p = random_params(np_rng, features=3, options=2, actions=3, temperature=tau)
        s, w, a = int(np_rng.integers(3)), int(np_rng.integers(2)), int(np_rng.integers(3))
        anchor = EpisodeAnchor((int(np_rng.integers(3)),), int(np_rng.integers(2)), int(np_rng.integers(3)),
                               float(np_rng.normal(scale=2)))
        q = p.q_u[s, w, a]

        def surrogate(theta):
            probe = OptionParameters(theta, p.nu, p.q_u, tau)
            lp = math.log(intra_option_probs(probe, w, (s,))[a])
            lp0 = math.log(intra_option_probs(probe, anchor.omega0, anchor.s0)[anchor.a0])
            return lp * q - psi * anchor.delta0**2 * lp0

        before = p.theta.copy()
        actor_update(p, cfg, (s,), w, a, anchor)
        step = (p.theta - before) / cfg.alpha_theta
        theta = before.copy()
        for entry in np.ndindex(theta.shape):
            assert abs(finite_difference(surrogate, theta, entry, 1e-5) - step[entry]) <= 1e-5


@pytest.mark.invariant
def test_penalty_only_touches_anchor_row(np_rng):
    for _ in range(50):
        cfg = LearnerConfig(psi=0.25, alpha_theta=0.1, temperature=1.0)
        p = random_params(np_rng, features=4, options=3, actions=3)
        anchor = EpisodeAnchor((int(np_rng.integers(4)),), int(np_rng.integers(3)), 1, 3.0)
        with_pen = p.copy()
        actor_update(with_pen, cfg, (0,), 0, 0, anchor)
        without = p.copy()
        actor_update(without, LearnerConfig(psi=0.0, alpha_theta=0.1, temperature=1.0), (0,), 0, 0, anchor)
        diff = with_pen.theta != without.theta
        mask = np.zeros_like(diff)
        mask[anchor.s0[0], anchor.omega0] = True
        assert not np.any(diff & ~mask)
        assert np.any(diff)


def test_termination_zero_advantage():
    p = OptionParameters.zeros(1, 2, 1, 0.001)
    p.q_u[0, :, 0] = 3.0
    before = p.nu.copy()
    termination_update(p, CFG, (0,), 0)
    assert np.array_equal(p.nu, before)


def test_termination_example_exact():
    p = OptionParameters.zeros(1, 2, 1, 1e-3)
    p.q_u[0, 0, 0] = 2.0  # q_omega(0) = 2, q_omega(1) = 0
    # near-greedy policy over options -> v = 2, so make option 1 the greedy one
    p.q_u[0, 1, 0] = 4.0
    termination_update(p, LearnerConfig(alpha_nu=0.1), (0,), 0)
    # advantage = 2 - 4 = -2 -> nu increases by 0.1 * 0.25 * 2
    assert p.nu[0, 0] == pytest.approx(0.05, abs=1e-12)
    p2 = OptionParameters.zeros(1, 2, 1, 1e-3)
    p2.q_u[0, 0, 0] = 2.0
    p2.q_u[0, 1, 0] = -1e9  # v = q_omega(0) ... advantage 0
    termination_update(p2, LearnerConfig(alpha_nu=0.1), (0,), 0)
    assert p2.nu[0, 0] == 0.0


@pytest.mark.invariant
@pytest.mark.parametrize("seed", range(10))
def test_termination_independent_of_psi(seed):
    base = random_params(np.random.default_rng(seed), features=3, options=3, actions=2, temperature=0.7)
    results = []
    for psi in (0.0, 0.05, 0.25):
        p = base.copy()
        termination_update(p, LearnerConfig(psi=psi, alpha_nu=0.1, temperature=0.7), (1,), 2)
        results.append(p.nu)
    assert all(np.array_equal(results[0], r) for r in results[1:])


CORRIDOR = "#####\n#..G#\n#####\n"


def forced_params(env, action, options=2):
    p = OptionParameters.zeros(env.num_features, options, 4, 0.001)
    p.theta[:, :, action] = 1.0
    return p


def test_one_step_episode():
    env = FourRoomsEnv(parse_map("####\n#.G#\n####\n"), slip_prob=0.0)
    p = forced_params(env, RIGHT)
    rec = run_episode(env, p, CFG, new_rng(0))
    assert (rec.discounted_return, rec.steps, rec.terminal) == (50.0, 1, True)


def test_truncation_at_step_cap():
    env = FourRoomsEnv(parse_map(CORRIDOR), slip_prob=0.0)
    p = forced_params(env, LEFT)
    rec = run_episode(env, p, CFG, new_rng(0), step_cap=500)
    assert rec.steps == 500 and not rec.terminal
    assert sum(rec.visits.values()) == 500


def test_truncated_last_step_bootstraps():
    env = FourRoomsEnv(parse_map(CORRIDOR), slip_prob=0.0)
    p = forced_params(env, LEFT, options=1)
    p.q_u[:, 0, LEFT] = 10.0
    cfg = LearnerConfig(gamma=0.5, alpha_critic=1.0, num_options=1)
    run_episode(env, p, cfg, new_rng(0), step_cap=1)
    # state (1,1) or (1,2) bumped the wall: target 0 + 0.5 * 10, never the terminal branch
    touched = p.q_u[:, 0, LEFT]
    assert set(np.round(touched[touched != 10.0], 12)) == {5.0}


def test_anchor_refresh_on_revisit():
    env = FourRoomsEnv(parse_map(CORRIDOR), slip_prob=0.0)
    p = forced_params(env, LEFT, options=1)
    anchors = []
    import safeoc.learner as learner_mod

    real = learner_mod.actor_update

    def spy(params, config, phi, option, action, anchor):
        anchors.append((phi, anchor.s0, anchor.a0, anchor.delta0))
        return real(params, config, phi, option, action, anchor)

    learner_mod.actor_update = spy
    try:
        p.q_u[:, 0, LEFT] = 1.0  # bumping the wall gives delta = 0.99 * 1 - 1 on the first visit
        run_episode(env, p, LearnerConfig(psi=0.1, num_options=1), new_rng(1), step_cap=3)
    finally:
        learner_mod.actor_update = real
    assert all(a[1] == anchors[0][1] for a in anchors)
    assert anchors[0][3] == pytest.approx(0.99 - 1.0)
    # every step revisits (s0, w0): delta0 tracks the latest TD error
    assert anchors[1][3] != anchors[0][3]


@pytest.mark.invariant
def test_psi_zero_matches_vanilla_reference():
    env = FourRoomsEnv()
    cfg = LearnerConfig(psi=0.0, alpha_critic=0.1, alpha_theta=0.01, alpha_nu=0.01)
    safe = cfg.new_params(env.num_features, 4)
    vanilla = OptionCritic(cfg.new_params(env.num_features, 4), cfg.gamma, cfg.alpha_critic,
                           cfg.alpha_theta, cfg.alpha_nu)
    r1, r2 = new_rng(5), new_rng(5)
    for _ in range(20):
        rec = run_episode(env, safe, cfg, r1)
        ret, steps = vanilla.episode(env, r2)
        assert (rec.discounted_return, rec.steps) == (ret, steps)
        assert safe.same_as(vanilla.params)


def test_psi_changes_learning():
    env = FourRoomsEnv()
    a = LearnerConfig(psi=0.0)
    b = LearnerConfig(psi=0.05)
    pa, pb = a.new_params(env.num_features, 4), b.new_params(env.num_features, 4)
    ra, rb = new_rng(3), new_rng(3)
    for _ in range(30):
        run_episode(env, pa, a, ra)
        run_episode(env, pb, b, rb)
    assert not pa.same_as(pb)


def test_controllability_deterministic_converged(fixtures_dir):
    mdp = load_mdp(fixtures_dir / "chain3.txt")
    p = OptionParameters.zeros(mdp.num_states, 1, 1, 1.0)
    for s in range(3):
        p.q_u[s, 0, 0] = chain_value_oracle(50.0, mdp.gamma, 3 - s)
    cfg = LearnerConfig(gamma=mdp.gamma, num_options=1, temperature=1.0)
    for s in range(3):
        c = estimate_controllability(mdp, p, cfg, s, 0, 100, new_rng(0))
        assert c.value == pytest.approx(0.0, abs=1e-20)


def test_controllability_bandit(fixtures_dir):
    mdp = load_mdp(fixtures_dir / "bandit_pm1.txt")
    p = OptionParameters.zeros(mdp.num_states, 1, 1, 1.0)
    c = estimate_controllability(mdp, p, LearnerConfig(gamma=0.0, num_options=1), 0, 0, 1000, new_rng(0))
    assert c.value == -1.0
    assert exact_delta_moments(mdp, p, 0, 0) == (0.0, 1.0)


def test_controllability_matches_enumeration(fixtures_dir, np_rng):
    mdp = load_mdp(fixtures_dir / "random3x2_a.txt")
    p = random_params(np_rng, features=mdp.num_states, options=2, actions=2)
    cfg = LearnerConfig(gamma=mdp.gamma, num_options=2, temperature=1.0)
    c = estimate_controllability(mdp, p, cfg, 0, 1, 20_000, new_rng(1))
    _, m2 = exact_delta_moments(mdp, p, 0, 1)
    assert abs(c.value + m2) <= 3 * c.stderr


def test_controllability_bad_sample_count(fixtures_dir):
    mdp = load_mdp(fixtures_dir / "bandit_pm1.txt")
    with pytest.raises(InvalidInputError):
        estimate_controllability(mdp, OptionParameters.zeros(2, 1, 1, 1.0), LearnerConfig(num_options=1),
                                 0, 0, 0, new_rng(0))


@pytest.mark.invariant
@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), state=st.integers(0, 2), option=st.integers(0, 1))
def test_controllability_never_positive(seed, state, option):
    mdp = load_mdp(FIXTURES / "random3x2_b.txt")
    p = random_params(np.random.default_rng(seed), features=3, options=2, actions=2, scale=5.0)
    cfg = LearnerConfig(gamma=mdp.gamma, num_options=2, temperature=1.0)
    assert estimate_controllability(mdp, p, cfg, state, option, 50, new_rng(seed)).value <= 0.0


@pytest.mark.invariant
def test_chain_converges_to_discounted_return(fixtures_dir):
    mdp = load_mdp(fixtures_dir / "chain3.txt")
    cfg = LearnerConfig(gamma=mdp.gamma, num_options=1, alpha_critic=0.1)
    p = cfg.new_params(mdp.num_features, mdp.num_actions)
    rng = new_rng(0)
    for _ in range(10**4):
        run_episode(mdp, p, cfg, rng)
    for s in range(3):
        assert abs(p.q_u[s, 0, 0] - chain_value_oracle(50.0, mdp.gamma, 3 - s)) < 1e-3


@pytest.mark.invariant
def test_published_step_sizes_stay_finite():
    env = FourRoomsEnv()
    for psi, alpha, alpha_nu in ((0.0, 0.1, 0.01), (0.05, 0.5, 0.1)):
        cfg = LearnerConfig(psi=psi, alpha_critic=alpha, alpha_theta=0.01, alpha_nu=alpha_nu)
        p = cfg.new_params(env.num_features, 4)
        rng = new_rng(0)
        steps = 0
        while steps < 10**6:
            steps += run_episode(env, p, cfg, rng).steps
            assert p.all_finite()
