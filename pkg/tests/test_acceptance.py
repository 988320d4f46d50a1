"""Acceptance suite.

Each test verifies one release criterion end to end and prints a single
PASS line (pytest fails the test, and hence the criterion, otherwise).
Run with ``pytest -s tests/test_acceptance.py`` to see the lines.
"""

import itertools
from fractions import Fraction

import numpy as np
import pytest

from nestcast import kernel
from nestcast.belief import (
    BayesOracle,
    pi_init,
    pi_update,
    theta1,
    theta2,
    xi_init,
    xi_update,
)
from nestcast.evaluate import exact_cost, monte_carlo_cost, trajectory_equivalence
from nestcast.model import build_special_case
from nestcast.plan import EvalPlan
from nestcast.sampling import (
    random_markov_strategy,
    random_model,
    random_sizes,
    random_structured_encoder,
)
from nestcast.search import brute_force_markov, coordinator_dp, falsify_structural
from nestcast.strategy import (
    lift_to_coordinator,
    lower_from_coordinator,
    make_executable,
)

from conftest import noisy_binary

FLOAT_TOL = 1e-9


def _ok(n, message):
    print(f"\nCRITERION {n}: PASS - {message}")


def binary_model(rng, horizon):
    return random_model(rng, nu=2, nv=2, nx=2, ny=2, nz=2, horizon=horizon)


def test_criterion_1_filters_match_reference():
    """Belief filters agree with the brute-force reference on 100 random
    instances (alphabets <= 3, horizon <= 3): exactly in rational mode,
    within 1e-9 in float mode."""
    rng = np.random.default_rng(101)
    checked = 0
    for i in range(100):
        model = random_model(rng, **random_sizes(rng))

        # inner filter and inner-decoder belief, against a random
        # unrestricted-table encoder on the Markov domain
        exe = make_executable(random_markov_strategy(rng, model), model)
        oracle = BayesOracle(model, exe)
        for t in range(1, model.horizon + 1):
            for ys, zs in oracle.inner_histories(t):
                xi = xi_init(model)
                for k in range(1, t + 1):
                    c_hat = [
                        exe.encode_markov(k, *model.split_index(s), ys[: k - 1], zs[: k - 1])
                        for s in range(model.ns)
                    ]
                    if k == t:
                        th = theta1(xi, ys[k - 1], c_hat, model, k)
                        ref_u = oracle.u_given_y_zprev(t, ys, zs[: t - 1])
                        assert tuple(th.weights) == tuple(ref_u)
                    xi = xi_update(xi, ys[k - 1], zs[k - 1], c_hat, model, k)
                ref = oracle.uv_given_yz(t, ys, zs)
                assert tuple(xi.weights) == tuple(ref)
                assert all(
                    abs(float(a) - float(b)) <= FLOAT_TOL
                    for a, b in zip(xi.weights, ref)
                )
                checked += 1

        # outer filter and outer-decoder belief, against a random
        # belief-structured encoder, in both arithmetic modes
        strategy = random_structured_encoder(rng, model)
        exe = make_executable(strategy, model)
        oracle = BayesOracle(model, exe)
        for t in range(1, model.horizon + 1):
            for zs in sorted({h[1] for h in oracle.inner_histories(t)}):
                node, pi, pif = strategy.root, pi_init(model), pi_init(model)
                for k, z in enumerate(zs, start=1):
                    # float-keyed view of the node's rational-keyed rules
                    action_f = {
                        xi.key("float"): node.action[key]
                        for key, (xi, _) in node.pi.atoms.items()
                    }
                    pi = pi_update(pi, z, node.action, model, k, mode="rational")
                    pif = pi_update(pif, z, action_f, model, k, mode="float")
                    node = node.children[z]
                assert pi == oracle.uvxi_given_z(t, zs, mode="rational")
                assert tuple(theta2(pi, model).weights) == tuple(oracle.v_given_z(t, zs))
                assert all(
                    abs(float(a) - float(b)) <= FLOAT_TOL
                    for a, b in zip(
                        theta2(pif, model).weights, oracle.v_given_z(t, zs)
                    )
                )
                checked += 1
    _ok(1, f"filters match the enumeration reference on 100 instances ({checked} histories, exact / <=1e-9)")


def test_criterion_2_dp_equals_exhaustive_search():
    """The belief DP and exhaustive Markov search return the exact same
    optimal cost on 50 random binary horizon-1 and 20 random binary
    horizon-2 instances."""
    rng = np.random.default_rng(202)
    for i in range(50):
        model = binary_model(rng, 1)
        dp = coordinator_dp(model)
        brute = brute_force_markov(model)
        assert dp.cost == brute.cost, f"T=1 instance {i}: {dp.cost} != {brute.cost}"
        assert exact_cost(model, dp.strategy).total == dp.cost
    for i in range(20):
        model = binary_model(rng, 2)
        dp = coordinator_dp(model)
        brute = brute_force_markov(model)
        assert dp.cost == brute.cost, f"T=2 instance {i}: {dp.cost} != {brute.cost}"
        assert exact_cost(model, dp.strategy).total == dp.cost
    _ok(2, "belief DP equals exhaustive search exactly on 50 T=1 and 20 T=2 binary instances")


def test_criterion_3_coordinator_translations_preserve_behavior():
    """Markov <-> coordinator translations round-trip exactly and
    preserve trajectories and cost on 50 random binary strategies with
    horizon <= 3."""
    rng = np.random.default_rng(303)
    for i in range(50):
        horizon = 1 + i % 3
        model = binary_model(rng, horizon)
        s = random_markov_strategy(rng, model)
        co = lift_to_coordinator(s, model)
        back = lower_from_coordinator(co, model)
        assert (back.enc, back.dec1, back.dec2) == (s.enc, s.dec1, s.dec2)
        assert exact_cost(model, co).total == exact_cost(model, s).total
        if horizon <= 2:
            verdict = trajectory_equivalence(model, s, co)
            assert verdict.equivalent, verdict.divergence
    _ok(3, "coordinator round trips are identical, trajectory-equivalent, and cost-preserving (50 strategies)")


def test_criterion_4_map_decoders_are_optimal():
    """MAP decoding matches the best decoder found by exhaustive decoder
    enumeration on 50 random horizon-1 instances."""
    rng = np.random.default_rng(404)
    for i in range(50):
        model = random_model(rng, **{**random_sizes(rng), "horizon": 1})
        plan = EvalPlan(model)
        enc = [[int(rng.integers(0, model.nx)) for _ in range(plan.mdom[0])]]
        map_cost = kernel.eval_cost(plan, enc)
        d1, d2 = kernel.map_decoders(plan, enc)
        assert kernel.eval_cost(plan, enc, dec1=d1, dec2=d2) == map_cost
        best = None
        for dec1 in itertools.product(range(model.nuh), repeat=plan.n_i1[0]):
            for dec2 in itertools.product(range(model.nvh), repeat=plan.n_i2[0]):
                cost = kernel.eval_cost(plan, enc, dec1=[list(dec1)], dec2=[list(dec2)])
                if best is None or cost < best:
                    best = cost
        assert map_cost == best, f"instance {i}"
    _ok(4, "MAP decoders achieve the exhaustive-enumeration optimum on 50 T=1 instances")


def test_criterion_5_structured_optimum_never_beaten():
    """10^4 random unrestricted strategies per instance never beat the
    structured optimum on 10 random binary horizon-2 instances."""
    rng = np.random.default_rng(505)
    for i in range(10):
        model = binary_model(rng, 2)
        opt = coordinator_dp(model)
        result = falsify_structural(model, opt.cost, samples=10_000, seed=1000 + i)
        assert not result.falsified, (
            f"instance {i}: {result.counterexample}"
        )
        assert result.best_cost >= opt.cost
    _ok(5, "structured optimum unbeaten by 10x10^4 random unrestricted strategies")


def test_criterion_6_canned_scenarios():
    """The noiseless frozen-pair scenario is lossless under both
    solvers, and the noisy binary-symmetric variant reproduces its
    pinned optimal costs."""
    lossless = build_special_case(2, 2, 1)
    assert coordinator_dp(lossless).cost == 0
    assert brute_force_markov(lossless).cost == 0
    # golden values for the 1/10-1/5 binary-symmetric cascade
    golden = {1: Fraction(3, 5), 2: Fraction(9, 25)}
    for horizon, jstar in golden.items():
        model = noisy_binary(horizon)
        dp = coordinator_dp(model)
        brute = brute_force_markov(model)
        assert dp.cost == brute.cost == jstar, (horizon, dp.cost, brute.cost)
    _ok(6, "lossless scenario gives 0 and the noisy variant reproduces J*=3/5 (T=1), 9/25 (T=2)")


def test_criterion_7_monte_carlo_calibration():
    """On 10 random noisy instances, the Monte Carlo estimate lands
    within 4 standard errors of the exact cost in at least 99 of 100
    seeded replications."""
    rng = np.random.default_rng(707)
    for i in range(10):
        model = binary_model(rng, 2)
        s = random_markov_strategy(rng, model)
        exact = float(exact_cost(model, s).total)
        hits = 0
        for rep in range(100):
            mc = monte_carlo_cost(model, s, 20_000, seed=rep)
            if abs(mc.total - exact) <= 4 * mc.stderr:
                hits += 1
        assert hits >= 99, f"instance {i}: {hits}/100 within 4 stderr"
    _ok(7, "Monte Carlo within 4 stderr of exact in >=99/100 replications on 10 instances")


def test_criterion_8_reports_reproduce_byte_identically(tmp_path):
    """Identical invocations (same manifest) produce byte-identical
    reports."""
    from click.testing import CliRunner

    from nestcast.cli import main
    from nestcast.model import save_model

    path = tmp_path / "model.json"
    save_model(noisy_binary(2), path)
    runner = CliRunner()
    for args in (
        ["solve", str(path)],
        ["falsify", str(path), "--samples", "200", "--seed", "4"],
        ["filter-check", str(path), "--trials", "1"],
    ):
        a = runner.invoke(main, args)
        b = runner.invoke(main, args)
        assert a.exit_code == 0, a.output
        assert a.stdout_bytes == b.stdout_bytes, args
    _ok(8, "solve/falsify/filter-check reports reproduce byte-identically")
