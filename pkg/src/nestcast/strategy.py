"""Strategy classes, coordinator translations, and MAP decoders.

Three deterministic strategy classes are represented:

* :class:`GeneralStrategy` -- per-stage tables on full histories
  (source paths, past channel inputs, both output histories);
* :class:`MarkovStrategy` -- encoder reads only the current source pair
  plus both output histories;
* :class:`StructuredStrategy` -- encoder reads the current source pair
  plus the two belief statistics, stored as a decision tree over
  reachable outer beliefs whose edges are outer symbols; decoders are
  implicit (MAP via the theta beliefs).

:class:`CoordinatorStrategy` is the shared-information reformulation of
a Markov strategy: per shared history, a pair of partial functions
(encoder rule on source pairs, inner-decoder rule on inner symbols).

Every strategy can be turned into an *executable*: an object with pure
methods of realized histories, suitable for exact enumeration, Monte
Carlo simulation, and coupled co-execution.
"""

import hashlib
import itertools
import json
from dataclasses import dataclass, field

from .belief import (
    BayesOracle,
    BeliefXi,
    theta1,
    theta2,
    xi_init,
    xi_update,
)
from .errors import UnknownAtom
from .numbers import RATIONAL, format_number, parse_number


def map_decode_u(theta, rho1_t):
    """Reconstruction minimizing expected stage distortion against theta.

    Ties break to the lowest reconstruction index.
    """
    weights = getattr(theta, "weights", theta)
    best, best_val = 0, None
    for uh in range(len(rho1_t[0])):
        val = sum(rho1_t[u][uh] * w for u, w in enumerate(weights))
        if best_val is None or val < best_val:
            best, best_val = uh, val
    return best


def map_decode_v(theta, rho2_t):
    return map_decode_u(theta, rho2_t)


@dataclass
class MarkovStrategy:
    """Per-stage tables; encoder keys are (u, v, ys, zs) with the
    observation histories as tuples of length t-1."""

    horizon: int
    enc: tuple  # per stage: dict (u, v, ys, zs) -> x
    dec1: tuple  # per stage: dict (ys, zs) -> uhat, len(ys) == t, len(zs) == t-1
    dec2: tuple  # per stage: dict zs -> vhat, len(zs) == t

    kind = "markov"


@dataclass
class GeneralStrategy:
    """Encoder keys are (us, vs, xs, ys, zs): full histories including
    past channel inputs."""

    horizon: int
    enc: tuple  # per stage: dict (us, vs, xs, ys, zs) -> x
    dec1: tuple
    dec2: tuple

    kind = "general"


@dataclass
class CoordinatorStrategy:
    """Shared-information form: per shared history, partial functions.

    ``phi[t-1][(ys, zs)] = (enc_rule, dec_rule)`` where ``enc_rule`` is a
    tuple over joint source indices giving the channel input and
    ``dec_rule`` a tuple over inner symbols giving the reconstruction.
    The outer decoder keeps its original tables.
    """

    horizon: int
    phi: tuple  # per stage: dict (ys, zs) -> (tuple over S, tuple over Y)
    dec2: tuple

    kind = "coordinator"


@dataclass
class StructuredNode:
    """A reachable outer-belief node of a structured strategy.

    ``action`` maps each supported inner-belief atom key to the stage
    (depth+1) encoder rule (a tuple over joint source indices); it is
    None at depth == horizon.  ``vhat`` is the reconstruction decided
    from this node's belief (None at the root).
    """

    pi: object
    depth: int
    vhat: object = None
    action: dict = None
    children: dict = field(default_factory=dict)


@dataclass
class StructuredStrategy:
    horizon: int
    root: StructuredNode
    mode: str = RATIONAL

    kind = "structured"


def lift_to_coordinator(s, model):
    """Markov -> coordinator translation; trajectory-identical by
    construction: the partial functions are the original tables sliced at
    each shared history."""
    ny, nz = model.ny, model.nz
    phi = []
    for t in range(1, s.horizon + 1):
        stage = {}
        for ys in itertools.product(range(ny), repeat=t - 1):
            for zs in itertools.product(range(nz), repeat=t - 1):
                rule = tuple(
                    s.enc[t - 1][(u, v, ys, zs)]
                    for u in range(model.nu)
                    for v in range(model.nv)
                )
                dec = tuple(s.dec1[t - 1][(ys + (y,), zs)] for y in range(ny))
                stage[(ys, zs)] = (rule, dec)
        phi.append(stage)
    return CoordinatorStrategy(horizon=s.horizon, phi=tuple(phi), dec2=s.dec2)


def lower_from_coordinator(phi, model):
    """Coordinator -> Markov translation (recursive substitution of the
    issued partial functions along each shared history)."""
    ny, nz = model.ny, model.nz
    enc, dec1 = [], []
    for t in range(1, phi.horizon + 1):
        enc_t, dec1_t = {}, {}
        for ys in itertools.product(range(ny), repeat=t - 1):
            for zs in itertools.product(range(nz), repeat=t - 1):
                rule, dec = phi.phi[t - 1][(ys, zs)]
                for u in range(model.nu):
                    for v in range(model.nv):
                        enc_t[(u, v, ys, zs)] = rule[u * model.nv + v]
                for y in range(ny):
                    dec1_t[(ys + (y,), zs)] = dec[y]
        enc.append(enc_t)
        dec1.append(dec1_t)
    return MarkovStrategy(horizon=phi.horizon, enc=tuple(enc), dec1=tuple(dec1), dec2=phi.dec2)


class Executable:
    """Stage-stepped pure interface on realized histories.

    ``encode(t, us, vs, ys, zs)`` with ``us``/``vs`` of length t and the
    observation histories of length t-1; ``decode_u(t, ys, zs)`` with
    ``ys`` of length t; ``decode_v(t, zs)`` with ``zs`` of length t.
    """

    encoder_is_markov = False

    def encode(self, t, us, vs, ys, zs):
        raise NotImplementedError

    def encode_markov(self, t, u, v, ys, zs):
        raise NotImplementedError

    def decode_u(self, t, ys, zs):
        raise NotImplementedError

    def decode_v(self, t, zs):
        raise NotImplementedError


class _MapDecodeMixin:
    """MAP decoders driven by the brute-force oracle for this encoder."""

    def _oracle(self):
        if getattr(self, "_oracle_obj", None) is None:
            self._oracle_obj = BayesOracle(self.model, self)
        return self._oracle_obj

    def decode_u(self, t, ys, zs):
        theta = self._oracle().u_given_y_zprev(t, ys, zs)
        return map_decode_u(theta, self.model.distortion.rho1[t - 1])

    def decode_v(self, t, zs):
        theta = self._oracle().v_given_z(t, zs)
        return map_decode_v(theta, self.model.distortion.rho2[t - 1])


class MarkovExecutable(_MapDecodeMixin, Executable):
    encoder_is_markov = True

    def __init__(self, strategy, model, decoders="tables"):
        self.strategy = strategy
        self.model = model
        self.decoders = decoders

    def encode_markov(self, t, u, v, ys, zs):
        return self.strategy.enc[t - 1][(u, v, tuple(ys), tuple(zs))]

    def encode(self, t, us, vs, ys, zs):
        return self.encode_markov(t, us[-1], vs[-1], ys, zs)

    def decode_u(self, t, ys, zs):
        if self.decoders == "map":
            return _MapDecodeMixin.decode_u(self, t, ys, zs)
        return self.strategy.dec1[t - 1][(tuple(ys), tuple(zs))]

    def decode_v(self, t, zs):
        if self.decoders == "map":
            return _MapDecodeMixin.decode_v(self, t, zs)
        return self.strategy.dec2[t - 1][tuple(zs)]


class GeneralExecutable(_MapDecodeMixin, Executable):
    def __init__(self, strategy, model, decoders="tables"):
        self.strategy = strategy
        self.model = model
        self.decoders = decoders
        self._x_cache = {}

    def _inputs(self, t, us, vs, ys, zs):
        """Realized channel inputs x_1..x_t along this history."""
        key = (tuple(us[:t]), tuple(vs[:t]), tuple(ys[: t - 1]), tuple(zs[: t - 1]))
        hit = self._x_cache.get(key)
        if hit is not None:
            return hit
        if t == 1:
            xs_prev = ()
        else:
            xs_prev = self._inputs(t - 1, us, vs, ys, zs)
        x = self.strategy.enc[t - 1][
            (tuple(us[:t]), tuple(vs[:t]), xs_prev, tuple(ys[: t - 1]), tuple(zs[: t - 1]))
        ]
        out = xs_prev + (x,)
        self._x_cache[key] = out
        return out

    def encode(self, t, us, vs, ys, zs):
        return self._inputs(t, us, vs, ys, zs)[-1]

    def decode_u(self, t, ys, zs):
        if self.decoders == "map":
            return _MapDecodeMixin.decode_u(self, t, ys, zs)
        return self.strategy.dec1[t - 1][(tuple(ys), tuple(zs))]

    def decode_v(self, t, zs):
        if self.decoders == "map":
            return _MapDecodeMixin.decode_v(self, t, zs)
        return self.strategy.dec2[t - 1][tuple(zs)]


class CoordinatorExecutable(Executable):
    encoder_is_markov = True

    def __init__(self, strategy, model):
        self.strategy = strategy
        self.model = model

    def _partials(self, t, ys, zs):
        return self.strategy.phi[t - 1][(tuple(ys), tuple(zs))]

    def encode_markov(self, t, u, v, ys, zs):
        rule, _ = self._partials(t, ys, zs)
        return rule[u * self.model.nv + v]

    def encode(self, t, us, vs, ys, zs):
        return self.encode_markov(t, us[-1], vs[-1], ys, zs)

    def decode_u(self, t, ys, zs):
        _, dec = self._partials(t, ys[:-1], zs)
        return dec[ys[-1]]

    def decode_v(self, t, zs):
        return self.strategy.dec2[t - 1][tuple(zs)]


class StructuredExecutable(Executable):
    """Runs a structured strategy by maintaining the belief statistics.

    The inner belief is recomputed (memoized) along each realized
    history; the outer belief comes from the strategy's decision tree.
    Decoders are MAP against the theta beliefs.
    """

    encoder_is_markov = True

    def __init__(self, strategy, model):
        self.strategy = strategy
        self.model = model
        self.mode = strategy.mode
        self._xi_cache = {}

    def _node(self, zs):
        node = self.strategy.root
        for z in zs:
            try:
                node = node.children[z]
            except KeyError:
                raise UnknownAtom(f"structured tree lacks branch for outer history {tuple(zs)}")
        return node

    def _rule(self, node, xi):
        key = xi.key(self.mode)
        try:
            return node.action[key]
        except (KeyError, TypeError):
            raise UnknownAtom(f"structured node at depth {node.depth} lacks rule for atom {key}")

    def _xi(self, ys, zs):
        """Inner belief after folding in observations ys, zs (equal length)."""
        ys, zs = tuple(ys), tuple(zs)
        if not ys:
            return xi_init(self.model)
        hit = self._xi_cache.get((ys, zs))
        if hit is not None:
            return hit
        prev = self._xi(ys[:-1], zs[:-1])
        node = self._node(zs[:-1])
        rule = self._rule(node, prev)
        out = xi_update(prev, ys[-1], zs[-1], rule, self.model, t=len(ys))
        self._xi_cache[(ys, zs)] = out
        return out

    def encode_markov(self, t, u, v, ys, zs):
        node = self._node(zs)
        xi = self._xi(ys, zs)
        return self._rule(node, xi)[u * self.model.nv + v]

    def encode(self, t, us, vs, ys, zs):
        return self.encode_markov(t, us[-1], vs[-1], ys, zs)

    def decode_u(self, t, ys, zs):
        node = self._node(zs)
        xi = self._xi(ys[:-1], zs)
        rule = self._rule(node, xi)
        th = theta1(xi, ys[-1], rule, self.model, t)
        return map_decode_u(th, self.model.distortion.rho1[t - 1])

    def decode_v(self, t, zs):
        node = self._node(zs)
        th = theta2(node.pi, self.model)
        return map_decode_v(th, self.model.distortion.rho2[t - 1])


def make_executable(s, model, decoders="tables"):
    """Wrap a strategy value in its stage-stepped runner.

    ``decoders="map"`` replaces stored decoder tables with MAP decoding
    against the brute-force oracle (table-based classes only; structured
    strategies always decode via MAP on the filtered beliefs).
    """
    if isinstance(s, Executable):
        return s
    if isinstance(s, MarkovStrategy):
        return MarkovExecutable(s, model, decoders=decoders)
    if isinstance(s, GeneralStrategy):
        return GeneralExecutable(s, model, decoders=decoders)
    if isinstance(s, CoordinatorStrategy):
        return CoordinatorExecutable(s, model)
    if isinstance(s, StructuredStrategy):
        return StructuredExecutable(s, model)
    raise TypeError(f"not a strategy: {type(s).__name__}")


# ---------------------------------------------------------------------------
# serialization


def _hist_key(ys, zs):
    return {"ys": list(ys), "zs": list(zs)}


def strategy_to_dict(s):
    if isinstance(s, MarkovStrategy):
        return {
            "kind": "markov",
            "horizon": s.horizon,
            "encoder": [
                [
                    {"u": u, "v": v, **_hist_key(ys, zs), "x": x}
                    for (u, v, ys, zs), x in sorted(stage.items())
                ]
                for stage in s.enc
            ],
            "dec1": [
                [{**_hist_key(ys, zs), "uhat": uh} for (ys, zs), uh in sorted(stage.items())]
                for stage in s.dec1
            ],
            "dec2": [
                [{"zs": list(zs), "vhat": vh} for zs, vh in sorted(stage.items())]
                for stage in s.dec2
            ],
        }
    if isinstance(s, GeneralStrategy):
        return {
            "kind": "general",
            "horizon": s.horizon,
            "encoder": [
                [
                    {
                        "us": list(us),
                        "vs": list(vs),
                        "xs": list(xs),
                        "ys": list(ys),
                        "zs": list(zs),
                        "x": x,
                    }
                    for (us, vs, xs, ys, zs), x in sorted(stage.items())
                ]
                for stage in s.enc
            ],
            "dec1": [
                [{**_hist_key(ys, zs), "uhat": uh} for (ys, zs), uh in sorted(stage.items())]
                for stage in s.dec1
            ],
            "dec2": [
                [{"zs": list(zs), "vhat": vh} for zs, vh in sorted(stage.items())]
                for stage in s.dec2
            ],
        }
    if isinstance(s, CoordinatorStrategy):
        return {
            "kind": "coordinator",
            "horizon": s.horizon,
            "phi": [
                [
                    {**_hist_key(ys, zs), "enc": list(rule), "dec": list(dec)}
                    for (ys, zs), (rule, dec) in sorted(stage.items())
                ]
                for stage in s.phi
            ],
            "dec2": [
                [{"zs": list(zs), "vhat": vh} for zs, vh in sorted(stage.items())]
                for stage in s.dec2
            ],
        }
    if isinstance(s, StructuredStrategy):
        return {
            "kind": "structured",
            "horizon": s.horizon,
            "mode": s.mode,
            "root": _node_to_dict(s.root),
        }
    raise TypeError(f"not a strategy: {type(s).__name__}")


def _node_to_dict(node):
    keys = node.pi.support()
    atoms = []
    for key in keys:
        xi, weights = node.pi.atoms[key]
        atoms.append(
            {
                "xi": [format_number(w) for w in xi.weights],
                "joint": [format_number(w) for w in weights],
            }
        )
    out = {
        "depth": node.depth,
        "atoms": atoms,
        "vhat": node.vhat,
        "action": None
        if node.action is None
        else [list(node.action[key]) for key in keys],
        "children": {str(z): _node_to_dict(child) for z, child in sorted(node.children.items())},
    }
    return out


def _node_from_dict(raw, mode):
    from .belief import BeliefPi

    atoms = {}
    keys = []
    for rec in raw["atoms"]:
        xi = BeliefXi(weights=tuple(parse_number(w) for w in rec["xi"]))
        key = xi.key(mode)
        atoms[key] = (xi, tuple(parse_number(w) for w in rec["joint"]))
        keys.append(key)
    node = StructuredNode(
        pi=BeliefPi(atoms),
        depth=raw["depth"],
        vhat=raw["vhat"],
        action=None
        if raw["action"] is None
        else {key: tuple(rule) for key, rule in zip(sorted(keys), raw["action"])},
        children={int(z): _node_from_dict(child, mode) for z, child in raw["children"].items()},
    )
    return node


def strategy_from_dict(raw):
    kind = raw.get("kind")
    horizon = raw["horizon"]

    def dec1_tables(recs):
        return tuple(
            {(tuple(r["ys"]), tuple(r["zs"])): r["uhat"] for r in stage} for stage in recs
        )

    def dec2_tables(recs):
        return tuple({tuple(r["zs"]): r["vhat"] for r in stage} for stage in recs)

    if kind == "markov":
        enc = tuple(
            {(r["u"], r["v"], tuple(r["ys"]), tuple(r["zs"])): r["x"] for r in stage}
            for stage in raw["encoder"]
        )
        return MarkovStrategy(horizon, enc, dec1_tables(raw["dec1"]), dec2_tables(raw["dec2"]))
    if kind == "general":
        enc = tuple(
            {
                (
                    tuple(r["us"]),
                    tuple(r["vs"]),
                    tuple(r["xs"]),
                    tuple(r["ys"]),
                    tuple(r["zs"]),
                ): r["x"]
                for r in stage
            }
            for stage in raw["encoder"]
        )
        return GeneralStrategy(horizon, enc, dec1_tables(raw["dec1"]), dec2_tables(raw["dec2"]))
    if kind == "coordinator":
        phi = tuple(
            {
                (tuple(r["ys"]), tuple(r["zs"])): (tuple(r["enc"]), tuple(r["dec"]))
                for r in stage
            }
            for stage in raw["phi"]
        )
        return CoordinatorStrategy(horizon, phi, dec2_tables(raw["dec2"]))
    if kind == "structured":
        mode = raw.get("mode", RATIONAL)
        return StructuredStrategy(horizon, _node_from_dict(raw["root"], mode), mode=mode)
    raise ValueError(f"unknown strategy kind {kind!r}")


def strategy_hash(s):
    blob = json.dumps(strategy_to_dict(s), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def save_strategy(s, path):
    with open(path, "w") as fh:
        json.dump(strategy_to_dict(s), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_strategy(path):
    with open(path) as fh:
        return strategy_from_dict(json.load(fh))
