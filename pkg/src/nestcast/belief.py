"""Sufficient-statistic filters and the brute-force Bayes oracle.

Three filters are implemented:

* ``xi_*`` -- the inner belief: the conditional law of the current source
  pair given both channel-output histories.
* ``pi_*`` -- the outer belief: a finitely supported distribution over
  (source pair, inner-belief atom) given the outer history only.
* ``theta1`` / ``theta2`` -- the decoder beliefs driving the MAP-style
  reconstructions.

Every filter is a pure function; correctness is defined as exact
agreement with :class:`BayesOracle`, which computes the same conditional
laws by direct enumeration of the model's measure and is independent of
the filter recursions.

Stage handling: ``t`` is the 1-based stage of the observation being
folded in.  For ``t == 1`` the incoming belief already describes the
current pair (it is the prior), so no source-transition prediction is
applied; for ``t >= 2`` the belief describes the previous pair and is
pushed through the transition matrix first.
"""

import threading
from dataclasses import dataclass

from .errors import CapExceeded, UnknownAtom, ZeroProbabilityObservation
from .model import DEFAULT_TRAJECTORY_CAP
from .numbers import canonical_key


@dataclass(frozen=True)
class BeliefXi:
    """A point on the simplex over joint source pairs."""

    weights: tuple

    def key(self, mode=None):
        return canonical_key(self.weights, mode)

    def marginal_u(self, model):
        out = [0] * model.nu
        for s, w in enumerate(self.weights):
            out[s // model.nv] += w
        return tuple(out)

    def marginal_v(self, model):
        out = [0] * model.nv
        for s, w in enumerate(self.weights):
            out[s % model.nv] += w
        return tuple(out)


@dataclass(frozen=True)
class XiAtom:
    """An inner-belief atom inside a BeliefPi, identified by canonical key."""

    key: tuple
    xi: BeliefXi


class BeliefPi:
    """Finitely supported distribution over (source pair, xi atom).

    ``atoms`` maps a canonical atom key to ``(BeliefXi, weights)`` where
    ``weights[s]`` is the joint probability of the source pair ``s`` and
    the atom.  Total weight is 1.
    """

    def __init__(self, atoms):
        self.atoms = dict(atoms)

    def support(self):
        """Atom keys in a deterministic (sorted) order."""
        return sorted(self.atoms)

    def total(self):
        return sum(sum(w) for _, w in self.atoms.values())

    def atom_weight(self, key):
        return sum(self.atoms[key][1])

    def marginal_uv(self):
        ns = len(next(iter(self.atoms.values()))[1])
        out = [0] * ns
        for _, weights in self.atoms.values():
            for s, w in enumerate(weights):
                out[s] += w
        return tuple(out)

    def key(self):
        """Canonical hashable identity (used for DP memoization)."""
        return tuple((k, tuple(w)) for k, w in sorted(self.atoms.items()))

    def __eq__(self, other):
        return isinstance(other, BeliefPi) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())


@dataclass(frozen=True)
class BeliefThetaU:
    weights: tuple


@dataclass(frozen=True)
class BeliefThetaV:
    weights: tuple


def _predict(weights, model, t):
    """Push a belief over the previous pair through the source transition.

    No-op at t == 1, where the belief already describes the current pair.
    """
    if t == 1:
        return tuple(weights)
    trans = model.source.transition
    ns = model.ns
    out = [0] * ns
    for sp, w in enumerate(weights):
        if w == 0:
            continue
        row = trans[sp]
        for s in range(ns):
            if row[s] != 0:
                out[s] += w * row[s]
    return tuple(out)


def _normalize(weights):
    total = sum(weights)
    if total == 0:
        raise ZeroProbabilityObservation("observation has probability zero under this belief")
    return tuple(w / total for w in weights)


def xi_init(model):
    """Initial inner belief: the prior law of the first source pair."""
    return BeliefXi(weights=tuple(model.source.initial))


def xi_update(xi, y, z, c_hat, model, t):
    """One Bayes step of the inner belief.

    ``c_hat`` is the stage-t partial encoder: a sequence mapping the
    joint source index to a channel input.  The likelihood of (y, z) is
    evaluated at the post-prediction (current) pair, matching the
    stage-t channel input x = c_hat(u_t, v_t).
    """
    inner, outer = model.channel.inner, model.channel.outer
    pred = _predict(xi.weights, model, t)
    w = [pred[s] * inner[c_hat[s]][y] * outer[y][z] for s in range(model.ns)]
    return BeliefXi(weights=_normalize(w))


def theta1(xi_prev, y, c_hat, model, t):
    """Inner-decoder belief about U_t after seeing y_t (z_t not yet seen)."""
    inner = model.channel.inner
    pred = _predict(xi_prev.weights, model, t)
    w = _normalize([pred[s] * inner[c_hat[s]][y] for s in range(model.ns)])
    out = [0] * model.nu
    for s, ws in enumerate(w):
        out[s // model.nv] += ws
    return BeliefThetaU(weights=tuple(out))


def pi_init(model):
    """Outer belief before any observation: one atom at the prior."""
    xi0 = xi_init(model)
    return BeliefPi({xi0.key(): (xi0, tuple(model.source.initial))})


def pi_transition(pi, c_hat, model, t, mode=None):
    """All one-step successors of an outer belief.

    ``c_hat`` maps each atom key in the support to a stage-t partial
    encoder on source pairs.  Returns ``{z: (prob, BeliefPi)}`` for every
    outer symbol with positive probability; zero-probability y branches
    inside an atom are skipped.
    """
    inner, outer = model.channel.inner, model.channel.outer
    ns, ny, nz = model.ns, model.ny, model.nz
    results = {}
    for z in range(nz):
        acc = {}  # atom key -> list of joint weights over current pairs
        for key in pi.support():
            _, weights = pi.atoms[key]
            if key not in c_hat:
                raise UnknownAtom(f"no encoder rule for belief atom {key}")
            rule = c_hat[key]
            pred = _predict(weights, model, t)
            for y in range(ny):
                if outer[y][z] == 0:
                    continue
                contrib = [pred[s] * inner[rule[s]][y] * outer[y][z] for s in range(ns)]
                branch_total = sum(contrib)
                if branch_total == 0:
                    continue
                child = BeliefXi(weights=tuple(c / branch_total for c in contrib))
                ckey = child.key(mode)
                if ckey in acc:
                    prev = acc[ckey]
                    acc[ckey] = (prev[0], [a + b for a, b in zip(prev[1], contrib)])
                else:
                    acc[ckey] = (child, list(contrib))
        total = sum(sum(w) for _, w in acc.values())
        if total == 0:
            continue
        atoms = {
            key: (xi, tuple(w / total for w in weights)) for key, (xi, weights) in acc.items()
        }
        results[z] = (total, BeliefPi(atoms))
    return results


def pi_update(pi, z, c_hat, model, t, mode=None):
    """One Bayes step of the outer belief for the realized z."""
    results = pi_transition(pi, c_hat, model, t, mode=mode)
    if z not in results:
        raise ZeroProbabilityObservation(
            f"outer symbol {z} has probability zero under this belief"
        )
    return results[z][1]


def theta2(pi, model):
    """Outer-decoder belief about V_t: the V marginal of the outer belief."""
    joint = [0] * model.ns
    for _, weights in pi.atoms.values():
        for s, w in enumerate(weights):
            joint[s] += w
    out = [0] * model.nv
    for s, w in enumerate(joint):
        out[s % model.nv] += w
    return BeliefThetaV(weights=tuple(out))


class BayesOracle:
    """Brute-force conditional laws by direct enumeration of the measure.

    Builds, per stage, the joint weights of (source state, full
    observation history) under a fixed executable encoder, then answers
    conditional queries by slicing and normalizing.  Independent of the
    filter recursions above.

    If the encoder only reads the current source pair and the observation
    histories (``encoder_is_markov``), past source states are summed out
    on the fly; otherwise full source paths are kept.
    """

    def __init__(self, model, enc, cap=DEFAULT_TRAJECTORY_CAP):
        self.model = model
        count = model.trajectory_count()
        if count > cap:
            raise CapExceeded("oracle enumeration", count, cap)
        if callable(enc) and not hasattr(enc, "encode"):
            self._encode = enc
            self.markov = getattr(enc, "encoder_is_markov", False)
        else:
            self._encode = enc.encode
            self.markov = getattr(enc, "encoder_is_markov", False)
        self._levels = []  # per stage t (1-based): {(ys, zs): weights}
        self._build()

    def _build(self):
        model = self.model
        inner, outer = model.channel.inner, model.channel.outer
        trans = model.source.transition
        ns = model.ns
        T = model.horizon
        if self.markov:
            # weights over the current source pair
            pre = {((), ()): list(model.source.initial)}
        else:
            # weights over full source paths (tuples of joint indices)
            pre = {((), ()): {(s,): w for s, w in enumerate(model.source.initial) if w != 0}}
        for t in range(1, T + 1):
            level = {}
            nxt = {}
            for (ys, zs), weights in pre.items():
                if self.markov:
                    items = [((s,), w) for s, w in enumerate(weights) if w != 0]
                else:
                    items = [(p, w) for p, w in weights.items() if w != 0]
                for path, w in items:
                    s = path[-1]
                    u, v = model.split_index(s)
                    if self.markov:
                        x = self._encode(t, (u,), (v,), ys, zs)
                    else:
                        us = tuple(model.split_index(q)[0] for q in path)
                        vs = tuple(model.split_index(q)[1] for q in path)
                        x = self._encode(t, us, vs, ys, zs)
                    for y, py in enumerate(inner[x]):
                        if py == 0:
                            continue
                        for z, pz in enumerate(outer[y]):
                            if pz == 0:
                                continue
                            hist = (ys + (y,), zs + (z,))
                            wyz = w * py * pz
                            if self.markov:
                                level.setdefault(hist, [0] * ns)[s] += wyz
                            else:
                                level.setdefault(hist, {})
                                level[hist][path] = level[hist].get(path, 0) + wyz
            self._levels.append(level)
            if t < T:
                for hist, weights in level.items():
                    if self.markov:
                        vec = [0] * ns
                        for s, w in enumerate(weights):
                            if w == 0:
                                continue
                            row = trans[s]
                            for sn in range(ns):
                                if row[sn] != 0:
                                    vec[sn] += w * row[sn]
                        nxt[hist] = vec
                    else:
                        ext = {}
                        for path, w in weights.items():
                            row = trans[path[-1]]
                            for sn in range(ns):
                                if row[sn] != 0:
                                    ext[path + (sn,)] = ext.get(path + (sn,), 0) + w * row[sn]
                        nxt[hist] = ext
                pre = nxt

    def _pair_weights(self, t, ys, zs):
        """Unnormalized joint weights of (current pair, given history)."""
        model = self.model
        level = self._levels[t - 1]
        hist = (tuple(ys), tuple(zs))
        if hist not in level:
            raise ZeroProbabilityObservation(f"history {hist} has probability zero")
        weights = level[hist]
        if self.markov:
            return list(weights)
        vec = [0] * model.ns
        for path, w in weights.items():
            vec[path[-1]] += w
        return vec

    def uv_given_yz(self, t, ys, zs):
        """Pr(U_t, V_t | y^t, z^t); with t == 0 returns the prior."""
        if t == 0:
            return tuple(self.model.source.initial)
        return _normalize(self._pair_weights(t, ys, zs))

    def u_given_y_zprev(self, t, ys, zs):
        """Pr(U_t | y^t, z^{t-1}): sum the level over the unseen z_t."""
        model = self.model
        vec = [0] * model.ns
        found = False
        for z in range(model.nz):
            try:
                part = self._pair_weights(t, ys, tuple(zs) + (z,))
            except ZeroProbabilityObservation:
                continue
            found = True
            for s, w in enumerate(part):
                vec[s] += w
        if not found:
            raise ZeroProbabilityObservation(f"history ({ys}, {zs}) has probability zero")
        joint = _normalize(vec)
        out = [0] * model.nu
        for s, w in enumerate(joint):
            out[s // model.nv] += w
        return tuple(out)

    def v_given_z(self, t, zs):
        """Pr(V_t | z^t): sum the level over all inner histories."""
        model = self.model
        zs = tuple(zs)
        vec = [0] * model.ns
        found = False
        for (ys_h, zs_h), _ in self._levels[t - 1].items():
            if zs_h != zs:
                continue
            part = self._pair_weights(t, ys_h, zs_h)
            found = True
            for s, w in enumerate(part):
                vec[s] += w
        if not found:
            raise ZeroProbabilityObservation(f"outer history {zs} has probability zero")
        joint = _normalize(vec)
        out = [0] * model.nv
        for s, w in enumerate(joint):
            out[s % model.nv] += w
        return tuple(out)

    def uvxi_given_z(self, t, zs, mode=None):
        """Pr(U_t, V_t, Xi_t | z^t) as a BeliefPi.

        The inner-belief value for each consistent inner history is
        realized directly from the oracle's own tables.
        """
        model = self.model
        zs = tuple(zs)
        acc = {}
        total = 0
        for (ys_h, zs_h), _ in self._levels[t - 1].items():
            if zs_h != zs:
                continue
            vec = self._pair_weights(t, ys_h, zs_h)
            mass = sum(vec)
            if mass == 0:
                continue
            xi = BeliefXi(weights=tuple(w / mass for w in vec))
            key = xi.key(mode)
            if key in acc:
                prev = acc[key]
                acc[key] = (prev[0], [a + b for a, b in zip(prev[1], vec)])
            else:
                acc[key] = (xi, list(vec))
            total += mass
        if total == 0:
            raise ZeroProbabilityObservation(f"outer history {zs} has probability zero")
        return BeliefPi(
            {key: (xi, tuple(w / total for w in ws)) for key, (xi, ws) in acc.items()}
        )

    def inner_histories(self, t):
        """All positive-probability (ys, zs) histories at stage t."""
        return sorted(self._levels[t - 1])


_oracle_cache = {}
_oracle_lock = threading.Lock()


def oracle_conditional(model, enc, query, given, cap=DEFAULT_TRAJECTORY_CAP):
    """Cached front end over BayesOracle.

    ``query`` is one of ``"uv"`` (needs ``(t, ys, zs)``), ``"uvxi"``
    (``(t, zs)``), ``"u"`` (``(t, ys, zs)`` with len(zs) == t-1), or
    ``"v"`` (``(t, zs)``).
    """
    cache_key = (model.content_hash(), id(enc))
    with _oracle_lock:
        hit = _oracle_cache.get(cache_key)
        if hit is None or hit[0] is not enc:
            hit = (enc, BayesOracle(model, enc, cap=cap))
            _oracle_cache[cache_key] = hit
    oracle = hit[1]
    if query == "uv":
        return oracle.uv_given_yz(*given)
    if query == "uvxi":
        return oracle.uvxi_given_z(*given)
    if query == "u":
        return oracle.u_given_y_zprev(*given)
    if query == "v":
        return oracle.v_given_z(*given)
    raise ValueError(f"unknown oracle query {query!r}")


def dump_pi(pi, out):
    """Write an outer belief as structured text (for golden-file tests)."""
    from .numbers import format_number

    for i, key in enumerate(pi.support()):
        xi, weights = pi.atoms[key]
        out.write(f"atom {i}\n")
        out.write("  xi: " + " ".join(format_number(w) for w in xi.weights) + "\n")
        out.write(f"  weight: {format_number(sum(weights))}\n")
        out.write("  joint: " + " ".join(format_number(w) for w in weights) + "\n")


def dump_belief_trace(model, pis, out):
    """Per-stage dump of a chain of outer beliefs."""
    for t, pi in enumerate(pis):
        out.write(f"t={t}\n")
        dump_pi(pi, out)
