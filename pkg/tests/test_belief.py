import io

import numpy as np
import pytest

from nestcast.belief import (
    BayesOracle,
    dump_pi,
    pi_init,
    pi_transition,
    pi_update,
    theta1,
    theta2,
    xi_init,
    xi_update,
)
from nestcast.errors import UnknownAtom, ZeroProbabilityObservation
from nestcast.sampling import (
    random_markov_strategy,
    random_model,
    random_sizes,
    random_structured_encoder,
)
from nestcast.strategy import make_executable


def markov_c_hat(exe, model, t, ys, zs):
    return [exe.encode_markov(t, *model.split_index(s), ys, zs) for s in range(model.ns)]


def chain_xi(exe, model, ys, zs):
    xi = xi_init(model)
    for k in range(1, len(ys) + 1):
        c_hat = markov_c_hat(exe, model, k, ys[: k - 1], zs[: k - 1])
        xi = xi_update(xi, ys[k - 1], zs[k - 1], c_hat, model, k)
    return xi


def test_xi_matches_oracle_on_random_instances(rng):
    for _ in range(8):
        model = random_model(rng, **random_sizes(rng))
        exe = make_executable(random_markov_strategy(rng, model), model)
        oracle = BayesOracle(model, exe)
        for t in range(1, model.horizon + 1):
            for ys, zs in oracle.inner_histories(t):
                xi = chain_xi(exe, model, ys, zs)
                assert tuple(xi.weights) == tuple(oracle.uv_given_yz(t, ys, zs))


def test_theta1_matches_oracle(rng):
    for _ in range(8):
        model = random_model(rng, **random_sizes(rng))
        exe = make_executable(random_markov_strategy(rng, model), model)
        oracle = BayesOracle(model, exe)
        for t in range(1, model.horizon + 1):
            for ys, zs in oracle.inner_histories(t):
                xi_prev = chain_xi(exe, model, ys[: t - 1], zs[: t - 1])
                c_hat = markov_c_hat(exe, model, t, ys[: t - 1], zs[: t - 1])
                th = theta1(xi_prev, ys[t - 1], c_hat, model, t)
                ref = oracle.u_given_y_zprev(t, ys, zs[: t - 1])
                assert tuple(th.weights) == tuple(ref)


def test_pi_and_theta2_match_oracle(rng):
    for _ in range(8):
        model = random_model(rng, **random_sizes(rng))
        strategy = random_structured_encoder(rng, model)
        exe = make_executable(strategy, model)
        oracle = BayesOracle(model, exe)
        for t in range(1, model.horizon + 1):
            for zs in sorted({h[1] for h in oracle.inner_histories(t)}):
                node, pi = strategy.root, pi_init(model)
                for k, z in enumerate(zs, start=1):
                    pi = pi_update(pi, z, node.action, model, k, mode=strategy.mode)
                    node = node.children[z]
                assert pi == oracle.uvxi_given_z(t, zs, mode=strategy.mode)
                assert node.pi == pi
                assert tuple(theta2(pi, model).weights) == tuple(oracle.v_given_z(t, zs))


def test_pi_support_bounded_by_inner_histories(rng):
    # at most one atom per inner-symbol history
    for _ in range(5):
        model = random_model(rng, **random_sizes(rng))
        strategy = random_structured_encoder(rng, model)

        def walk(node):
            assert len(node.pi.atoms) <= model.ny ** node.depth
            for child in node.children.values():
                walk(child)

        walk(strategy.root)


def test_pi_transition_probabilities_sum_to_one(binary_t2):
    pi = pi_init(binary_t2)
    c_hat = {key: (0, 0, 1, 1) for key in pi.support()}
    branches = pi_transition(pi, c_hat, binary_t2, 1)
    assert sum(p for p, _ in branches.values()) == 1
    for _, child in branches.values():
        assert child.total() == 1


def test_pi_transition_requires_rule_per_atom(binary_t2):
    pi = pi_init(binary_t2)
    with pytest.raises(UnknownAtom):
        pi_transition(pi, {}, binary_t2, 1)


def test_zero_probability_observation(binary_t1):
    xi = xi_init(binary_t1)
    from nestcast.model import build_special_case

    noiseless = build_special_case(2, 2, 1, nx=4)
    xi0 = xi_init(noiseless)
    # encoder sends the joint index over the noiseless channel; observing
    # y=0, z=1 is impossible
    with pytest.raises(ZeroProbabilityObservation):
        xi_update(xi0, 0, 1, [0, 1, 2, 3], noiseless, 1)


def test_oracle_prior_query(binary_t1):
    exe = make_executable(
        random_markov_strategy(np.random.default_rng(0), binary_t1), binary_t1
    )
    oracle = BayesOracle(binary_t1, exe)
    assert oracle.uv_given_yz(0, (), ()) == tuple(binary_t1.source.initial)


def test_dump_pi_is_deterministic(binary_t1):
    pi = pi_init(binary_t1)
    a, b = io.StringIO(), io.StringIO()
    dump_pi(pi, a)
    dump_pi(pi, b)
    assert a.getvalue() == b.getvalue()
    assert "atom 0" in a.getvalue()
    assert "1/4" in a.getvalue()
