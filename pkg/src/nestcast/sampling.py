"""Random instances and strategies for verification runs.

All sampling is driven by a ``numpy.random.Generator`` so any run is
reproducible from its seed.  Probabilities are sampled as exact
rationals with a small common denominator, keeping the integer-scaled
evaluation plans inside the 64-bit fast path.
"""

import itertools
from fractions import Fraction

import numpy as np

from .belief import pi_init, pi_transition
from .model import validate_model
from .numbers import RATIONAL, format_number
from .strategy import (
    GeneralStrategy,
    MarkovStrategy,
    StructuredNode,
    StructuredStrategy,
)

DEFAULT_DENOM = 8


def _random_row(rng, k, denom):
    """Random stochastic row with denominator ``denom`` (entries may be 0)."""
    counts = rng.multinomial(denom, [1.0 / k] * k)
    return [Fraction(int(c), denom) for c in counts]


def _random_matrix(rng, nrows, ncols, denom):
    return [_random_row(rng, ncols, denom) for _ in range(nrows)]


def _random_distortion(rng, n, nh, denom, rho_max):
    return [
        [Fraction(int(rng.integers(0, denom + 1)), denom) * rho_max for _ in range(nh)]
        for _ in range(n)
    ]


def random_model(
    rng,
    nu=2,
    nv=2,
    nx=2,
    ny=2,
    nz=2,
    horizon=2,
    denom=DEFAULT_DENOM,
    rho_max=Fraction(1),
):
    """Random system instance with exact small-denominator probabilities."""
    ns = nu * nv
    raw = {
        "alphabets": {"U": nu, "V": nv, "X": nx, "Y": ny, "Z": nz},
        "horizon": horizon,
        "source": {
            "initial": [format_number(w) for w in _random_row(rng, ns, denom)],
            "transition": [
                [format_number(w) for w in row] for row in _random_matrix(rng, ns, ns, denom)
            ],
        },
        "channel": {
            "inner": [
                [format_number(w) for w in row] for row in _random_matrix(rng, nx, ny, denom)
            ],
            "outer": [
                [format_number(w) for w in row] for row in _random_matrix(rng, ny, nz, denom)
            ],
        },
        "distortion": {
            "rho_max": format_number(rho_max),
            "rho1": [
                [[format_number(w) for w in row] for row in _random_distortion(rng, nu, nu, denom, rho_max)]
                for _ in range(horizon)
            ],
            "rho2": [
                [[format_number(w) for w in row] for row in _random_distortion(rng, nv, nv, denom, rho_max)]
                for _ in range(horizon)
            ],
        },
    }
    return validate_model(raw)


def random_sizes(rng, max_size=3, max_horizon=3):
    """Random alphabet sizes and horizon, each between 2 and the bound
    (horizon between 1 and its bound)."""
    pick = lambda: int(rng.integers(2, max_size + 1))
    return {
        "nu": pick(),
        "nv": pick(),
        "nx": pick(),
        "ny": pick(),
        "nz": pick(),
        "horizon": int(rng.integers(1, max_horizon + 1)),
    }


def _histories(ny, nz, t):
    for ys in itertools.product(range(ny), repeat=t):
        for zs in itertools.product(range(nz), repeat=t):
            yield ys, zs


def random_markov_strategy(rng, model):
    """Uniform random per-stage tables over the full Markov domains."""
    nu, nv, nx = model.nu, model.nv, model.nx
    ny, nz = model.ny, model.nz
    nuh, nvh = model.nuh, model.nvh
    enc, dec1, dec2 = [], [], []
    for t in range(model.horizon):
        stage_enc = {}
        for ys, zs in _histories(ny, nz, t):
            for u in range(nu):
                for v in range(nv):
                    stage_enc[(u, v, ys, zs)] = int(rng.integers(0, nx))
        enc.append(stage_enc)
        stage1 = {}
        for ys, zs in _histories(ny, nz, t):
            for y in range(ny):
                stage1[(ys + (y,), zs)] = int(rng.integers(0, nuh))
        dec1.append(stage1)
        stage2 = {}
        for zs in itertools.product(range(nz), repeat=t + 1):
            stage2[zs] = int(rng.integers(0, nvh))
        dec2.append(stage2)
    return MarkovStrategy(
        horizon=model.horizon, enc=tuple(enc), dec1=tuple(dec1), dec2=tuple(dec2)
    )


def random_general_strategy(rng, model):
    """Uniform random general strategy.

    The encoder is sampled on (source paths, observation histories); the
    realized channel-input history is then determined recursively, so
    the stored tables carry consistent ``xs`` keys.
    """
    nu, nv, nx = model.nu, model.nv, model.nx
    ny, nz = model.ny, model.nz
    nuh, nvh = model.nuh, model.nvh
    enc, dec1, dec2 = [], [], []
    # (us, vs, ys, zs) -> realized channel-input history
    realized = {((), (), (), ()): ()}
    for t in range(1, model.horizon + 1):
        stage_enc = {}
        nxt = {}
        for (us, vs, ys, zs), xs_prev in realized.items():
            for u in range(nu):
                for v in range(nv):
                    us_t, vs_t = us + (u,), vs + (v,)
                    x = int(rng.integers(0, nx))
                    stage_enc[(us_t, vs_t, xs_prev, ys, zs)] = x
                    if t < model.horizon:
                        for y in range(ny):
                            for z in range(nz):
                                nxt[(us_t, vs_t, ys + (y,), zs + (z,))] = xs_prev + (x,)
        enc.append(stage_enc)
        realized = nxt
        stage1 = {}
        for ys, zs in _histories(ny, nz, t - 1):
            for y in range(ny):
                stage1[(ys + (y,), zs)] = int(rng.integers(0, nuh))
        dec1.append(stage1)
        stage2 = {}
        for zs in itertools.product(range(nz), repeat=t):
            stage2[zs] = int(rng.integers(0, nvh))
        dec2.append(stage2)
    return GeneralStrategy(
        horizon=model.horizon, enc=tuple(enc), dec1=tuple(dec1), dec2=tuple(dec2)
    )


def random_structured_encoder(rng, model, mode=RATIONAL):
    """Random structured strategy: a decision tree over reachable outer
    beliefs with uniformly sampled per-atom encoder rules."""
    ns, nx = model.ns, model.nx
    T = model.horizon

    def grow(pi, depth, vhat):
        node = StructuredNode(pi=pi, depth=depth, vhat=vhat)
        if depth == T:
            return node
        action = {
            key: tuple(int(rng.integers(0, nx)) for _ in range(ns)) for key in pi.support()
        }
        node.action = action
        branches = pi_transition(pi, action, model, depth + 1, mode=mode)
        for z, (_, pi_next) in sorted(branches.items()):
            node.children[z] = grow(pi_next, depth + 1, int(rng.integers(0, model.nvh)))
        return node

    return StructuredStrategy(horizon=T, root=grow(pi_init(model), 0, None), mode=mode)
