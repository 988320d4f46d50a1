"""Optimal-strategy searches.

Three searches are provided, all exact:

* :func:`brute_force_markov` -- exhaustive enumeration of every
  deterministic Markov encoder (decoders are optimal by construction),
  the ground truth any other solver is checked against;
* :func:`coordinator_dp` -- dynamic programming over reachable outer
  beliefs, returning a structured strategy;
* :func:`falsify_structural` -- randomized search over unrestricted
  general strategies trying to beat a claimed optimum.

Costs are compared as exact rationals; searches never silently
truncate -- hitting a cap raises :class:`~nestcast.errors.CapExceeded`.
"""

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernel
from .belief import _predict, pi_init, pi_transition, theta2
from .errors import CapExceeded
from .model import model_to_dict, validate_model
from .numbers import RATIONAL, check_mode
from .plan import EvalPlan
from .strategy import MarkovStrategy, StructuredNode, StructuredStrategy, map_decode_v

DEFAULT_ENCODER_CAP = 1 << 22
DEFAULT_ACTION_CAP = 1 << 16
DEFAULT_STATE_CAP = 100_000
DEFAULT_SAMPLE_BATCH = 512


@dataclass
class SearchResult:
    cost: Fraction
    strategy: object
    evaluated: int
    backend: str


@dataclass
class FalsificationResult:
    falsified: bool
    samples: int
    opt_cost: Fraction
    best_cost: Fraction
    seed: int
    counterexample: dict = None

    @property
    def verdict(self):
        return "FALSIFIED" if self.falsified else "NOT_FALSIFIED"


def _radix_digits(value, base, length):
    """Most-significant-first digits of ``value`` in ``base``."""
    out = [0] * length
    for i in range(length - 1, -1, -1):
        out[i] = value % base
        value //= base
    return tuple(out)


def _radix_value(digits, base):
    value = 0
    for d in digits:
        value = value * base + d
    return value


def markov_from_digits(model, plan, digits):
    """Rebuild a full MarkovStrategy (with optimal decoder tables) from
    the flat encoder digit vector used by the enumeration kernel."""
    ny, nz, nv = model.ny, model.nz, model.nv
    T = model.horizon
    enc_tables = [list(digits[plan.doffs[t] : plan.doffs[t + 1]]) for t in range(T)]
    dec1_tables, dec2_tables = kernel.map_decoders(plan, enc_tables, domain="markov")

    enc, dec1, dec2 = [], [], []
    for t in range(T):
        table = enc_tables[t]
        stage_enc = {}
        for s in range(model.ns):
            u, v = model.split_index(s)
            for yv in range(ny**t):
                ys = _radix_digits(yv, ny, t)
                for zv in range(nz**t):
                    zs = _radix_digits(zv, nz, t)
                    idx = s * (ny * nz) ** t + yv * nz**t + zv
                    stage_enc[(u, v, ys, zs)] = table[idx]
        enc.append(stage_enc)
        stage_dec1 = {}
        for yv in range(ny ** (t + 1)):
            ys = _radix_digits(yv, ny, t + 1)
            for zv in range(nz**t):
                zs = _radix_digits(zv, nz, t)
                stage_dec1[(ys, zs)] = dec1_tables[t][yv * nz**t + zv]
        dec1.append(stage_dec1)
        stage_dec2 = {}
        for zv in range(nz ** (t + 1)):
            zs = _radix_digits(zv, nz, t + 1)
            stage_dec2[zs] = dec2_tables[t][zv]
        dec2.append(stage_dec2)
    return MarkovStrategy(horizon=T, enc=tuple(enc), dec1=tuple(dec1), dec2=tuple(dec2))


def _enum_worker(args):
    raw, prefix = args
    model = validate_model(raw)
    plan = EvalPlan(model)
    return kernel.enumerate_markov(plan, prefix=prefix)


def brute_force_markov(model, cap=DEFAULT_ENCODER_CAP, workers=1, plan_cap=None):
    """Exhaustive exact minimum over all deterministic Markov strategies.

    Decoders are chosen optimally for each candidate encoder, so the
    result is the Markov-class optimum.  Ties pick the encoder whose
    concatenated digit tables are lexicographically smallest.
    """
    plan = EvalPlan(model) if plan_cap is None else EvalPlan(model, cap=plan_cap)
    n = plan.markov_class_size()
    if n > cap:
        raise CapExceeded("markov encoder enumeration", n, cap)

    if workers > 1 and plan.nx > 1 and plan.doffs[-1] > 1:
        raw = model_to_dict(model)
        prefixes = [((x,),) for x in range(plan.nx)]
        jobs = [(raw, pre[0]) for pre in prefixes]
        best, best_digits, count = None, None, 0
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for b, d, c in pool.map(_enum_worker, jobs):
                count += c
                # jobs are in prefix order, so the first winner is the
                # lexicographically smallest minimizer
                if best is None or b < best:
                    best, best_digits = b, d
    else:
        best, best_digits, count = kernel.enumerate_markov(plan)

    strategy = markov_from_digits(model, plan, best_digits)
    return SearchResult(
        cost=plan.cost_fraction(best),
        strategy=strategy,
        evaluated=count,
        backend=kernel.BACKEND if plan.fits_int64 else "python",
    )


def _u_stage_cost(pi, c_hat, model, t):
    """Expected inner-decoder distortion at stage t, with the MAP
    reconstruction decided per (belief atom, inner symbol)."""
    inner = model.channel.inner
    rho1 = model.distortion.rho1[t - 1]
    nu, nv, ny, nuh = model.nu, model.nv, model.ny, model.nuh
    cost = Fraction(0)
    for key in pi.support():
        _, weights = pi.atoms[key]
        rule = c_hat[key]
        pred = _predict(weights, model, t)
        for y in range(ny):
            marg = [Fraction(0)] * nu
            for s, w in enumerate(pred):
                if w == 0:
                    continue
                p = w * inner[rule[s]][y]
                if p != 0:
                    marg[s // nv] += p
            if not any(marg):
                continue
            best = None
            for uh in range(nuh):
                val = sum(rho1[u][uh] * marg[u] for u in range(nu))
                if best is None or val < best:
                    best = val
            cost += best
    return cost


def _v_stage_cost(pi_next, model, t):
    """Expected outer-decoder distortion at stage t given the updated
    outer belief (conditional on the realized z)."""
    rho2 = model.distortion.rho2[t - 1]
    th = theta2(pi_next, model).weights
    best = None
    for vh in range(model.nvh):
        val = sum(rho2[v][vh] * w for v, w in enumerate(th))
        if best is None or val < best:
            best = val
    return best


def coordinator_dp(
    model,
    mode=RATIONAL,
    action_cap=DEFAULT_ACTION_CAP,
    state_cap=DEFAULT_STATE_CAP,
):
    """Exact dynamic program over reachable outer beliefs.

    States are outer beliefs (finitely many are reachable because every
    belief is a deterministic function of the outer history); actions
    are partial encoders mapping each supported belief atom and source
    pair to a channel input.  Decoders are optimal per belief, so only
    encoder rules are enumerated.  Returns the optimum as a
    :class:`StructuredStrategy`.
    """
    check_mode(mode)
    T = model.horizon
    ns, nx = model.ns, model.nx
    memo = {}
    evaluated = 0

    def solve(t, pi):
        nonlocal evaluated
        if t > T:
            return Fraction(0), None
        state = (t, pi.key())
        hit = memo.get(state)
        if hit is not None:
            return hit
        if len(memo) >= state_cap:
            raise CapExceeded("coordinator DP states", len(memo) + 1, state_cap)
        support = pi.support()
        n_actions = nx ** (len(support) * ns)
        if n_actions > action_cap:
            raise CapExceeded("coordinator DP actions", n_actions, action_cap)

        best = None  # (cost, c_hat, branches)
        for rules in itertools.product(
            itertools.product(range(nx), repeat=ns), repeat=len(support)
        ):
            c_hat = dict(zip(support, rules))
            evaluated += 1
            cost = _u_stage_cost(pi, c_hat, model, t)
            branches = pi_transition(pi, c_hat, model, t, mode=mode)
            for z, (prob, pi_next) in sorted(branches.items()):
                cost += prob * _v_stage_cost(pi_next, model, t)
                sub, _ = solve(t + 1, pi_next)
                cost += prob * sub
            if best is None or cost < best[0]:
                best = (cost, c_hat, branches)

        memo[state] = (best[0], (best[1], best[2]))
        return memo[state]

    root_pi = pi_init(model)
    total, _ = solve(1, root_pi)

    def build(t, pi, vhat):
        node = StructuredNode(pi=pi, depth=t - 1, vhat=vhat)
        if t > T:
            return node
        _, (c_hat, branches) = memo[(t, pi.key())]
        node.action = dict(c_hat)
        for z, (_, pi_next) in sorted(branches.items()):
            vh = map_decode_v(theta2(pi_next, model), model.distortion.rho2[t - 1])
            node.children[z] = build(t + 1, pi_next, vh)
        return node

    strategy = StructuredStrategy(horizon=T, root=build(1, root_pi, None), mode=mode)
    return SearchResult(cost=total, strategy=strategy, evaluated=evaluated, backend="python")


def falsify_structural(
    model,
    opt_cost,
    samples,
    seed,
    plan_cap=None,
):
    """Randomized attack on a claimed optimal cost.

    Samples deterministic general strategies (encoder tables on full
    source paths and both observation histories), evaluates each exactly
    with optimal decoders, and reports the first strategy that beats
    ``opt_cost``, if any.
    """
    plan = EvalPlan(model) if plan_cap is None else EvalPlan(model, cap=plan_cap)
    opt_cost = Fraction(opt_cost)
    opt_num = opt_cost * plan.cost_denom
    rng = np.random.default_rng(seed)
    T, nx = plan.T, plan.nx

    best_num = None
    best_tables = None
    counterexample = None
    for i in range(samples):
        tables = [rng.integers(0, nx, size=plan.fdom[t]).tolist() for t in range(T)]
        num = kernel.eval_cost(plan, tables, domain="full")
        if best_num is None or num < best_num:
            best_num, best_tables = num, tables
        if num < opt_num:
            counterexample = {
                "sample_index": i,
                "tables": tables,
                "cost": plan.cost_fraction(num),
            }
            break

    return FalsificationResult(
        falsified=counterexample is not None,
        samples=(counterexample["sample_index"] + 1) if counterexample else samples,
        opt_cost=opt_cost,
        best_cost=plan.cost_fraction(best_num),
        seed=seed,
        counterexample=counterexample,
    )
