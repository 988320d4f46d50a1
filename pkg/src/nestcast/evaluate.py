"""Exact and Monte Carlo evaluation of expected total distortion.

``exact_cost`` enumerates the induced measure stage by stage (grouping
trajectories by observation history) and sums distortion with exact
arithmetic.  ``monte_carlo_cost`` estimates the same quantity from
seeded episodes; channel noise is realized by inverse-transform sampling
in a fixed symbol order, so two strategies evaluated under the same seed
face the same noise (common random numbers).  The same inverse-CDF
partition, made exhaustive, drives ``trajectory_equivalence``.
"""

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import CapExceeded
from .model import DEFAULT_TRAJECTORY_CAP
from .strategy import make_executable


@dataclass
class CostReport:
    total: object
    per_stage: tuple  # per stage: (inner contribution, outer contribution)
    mode: str  # "exact" or "monte_carlo"
    samples: int = None
    stderr: float = None
    seed: int = None

    def csv_row(self, model_hash="", strategy_hash=""):
        from .numbers import format_number

        cells = [
            model_hash,
            strategy_hash,
            self.mode,
            format_number(self.total),
        ]
        for c1, c2 in self.per_stage:
            cells.append(format_number(c1))
            cells.append(format_number(c2))
        cells.append("" if self.samples is None else str(self.samples))
        cells.append("" if self.stderr is None else repr(self.stderr))
        cells.append("" if self.seed is None else str(self.seed))
        return ",".join(cells)


@dataclass
class Episode:
    us: tuple
    vs: tuple
    xs: tuple
    ys: tuple
    zs: tuple
    uhats: tuple
    vhats: tuple
    seed: int
    cost: float


@dataclass
class EquivalenceVerdict:
    equivalent: bool
    checked: int
    divergence: dict = None

    def __bool__(self):
        return self.equivalent


def _predict_vec(vec, trans, ns):
    out = [0] * ns
    for s, w in enumerate(vec):
        if w == 0:
            continue
        row = trans[s]
        for sn in range(ns):
            if row[sn] != 0:
                out[sn] += w * row[sn]
    return out


def exact_cost(model, s, cap=DEFAULT_TRAJECTORY_CAP):
    """Exact expected total distortion by full enumeration.

    Accepts a strategy value or an executable.  Returns a CostReport
    with a per-stage breakdown; exact Fractions when the model is
    rational.
    """
    count = model.trajectory_count()
    if count > cap:
        raise CapExceeded("exact evaluation", count, cap)
    exe = make_executable(s, model)
    T = model.horizon
    ns, nv = model.ns, model.nv
    inner, outer = model.channel.inner, model.channel.outer
    trans = model.source.transition
    markov = exe.encoder_is_markov

    if markov:
        # weights over the current source pair, keyed by observation history
        pre = {((), ()): list(model.source.initial)}
    else:
        # weights over full source paths
        pre = {((), ()): {(s0,): w for s0, w in enumerate(model.source.initial) if w != 0}}

    per_stage = []
    for t in range(1, T + 1):
        rho1_t = model.distortion.rho1[t - 1]
        rho2_t = model.distortion.rho2[t - 1]
        cost1 = Fraction(0) if isinstance(model.source.initial[0], Fraction) else 0.0
        vacc = {}  # outer history -> weights over V
        nxt = {}
        for (ys, zs), weights in pre.items():
            if markov:
                items = [((s0,), w) for s0, w in enumerate(weights) if w != 0]
            else:
                items = [(p, w) for p, w in weights.items() if w != 0]
            # channel input per source state along this history
            xs = {}
            for path, w in items:
                s0 = path[-1]
                u, v = model.split_index(s0)
                if markov:
                    xs[path] = exe.encode_markov(t, u, v, ys, zs)
                else:
                    us = tuple(model.split_index(q)[0] for q in path)
                    vs = tuple(model.split_index(q)[1] for q in path)
                    xs[path] = exe.encode(t, us, vs, ys, zs)
            for y in range(model.ny):
                wy = [(path, w * inner[xs[path]][y]) for path, w in items]
                wy = [(path, w) for path, w in wy if w != 0]
                if not wy:
                    continue
                uh = exe.decode_u(t, ys + (y,), zs)
                for path, w in wy:
                    cost1 += w * rho1_t[path[-1] // nv][uh]
                for z in range(model.nz):
                    pz = outer[y][z]
                    if pz == 0:
                        continue
                    hist = (ys + (y,), zs + (z,))
                    vkey = zs + (z,)
                    vvec = vacc.setdefault(vkey, [0] * nv)
                    if markov:
                        cell = nxt.setdefault(hist, [0] * ns)
                        for path, w in wy:
                            cell[path[-1]] += w * pz
                            vvec[path[-1] % nv] += w * pz
                    else:
                        cell = nxt.setdefault(hist, {})
                        for path, w in wy:
                            cell[path] = cell.get(path, 0) + w * pz
                            vvec[path[-1] % nv] += w * pz
        cost2 = 0
        for vkey in sorted(vacc):
            vh = exe.decode_v(t, vkey)
            cost2 += sum(w * rho2_t[v][vh] for v, w in enumerate(vacc[vkey]))
        per_stage.append((cost1, cost2))
        if t < T:
            pre = {}
            for hist, cell in nxt.items():
                if markov:
                    pre[hist] = _predict_vec(cell, trans, ns)
                else:
                    ext = {}
                    for path, w in cell.items():
                        row = trans[path[-1]]
                        for sn in range(ns):
                            if row[sn] != 0:
                                ext[path + (sn,)] = ext.get(path + (sn,), 0) + w * row[sn]
                    pre[hist] = ext
    total = sum(c1 + c2 for c1, c2 in per_stage)
    return CostReport(total=total, per_stage=tuple(per_stage), mode="exact")


def _float_rows(rows):
    return np.array([[float(x) for x in row] for row in rows], dtype=np.float64)


def _cumrows(mat):
    cum = np.cumsum(mat, axis=1)
    cum[:, -1] = 1.0
    return cum


def _draw(cum_rows, uniforms):
    return (uniforms[:, None] < cum_rows).argmax(axis=1)


def simulate_episode(model, s, seed):
    """One realized trajectory under a seeded noise stream.

    Draw order per stage is fixed (source pair, inner symbol, outer
    symbol), each by inverse-CDF over ascending symbol indices.
    """
    exe = make_executable(s, model)
    rng = np.random.default_rng(seed)
    init = _cumrows(_float_rows([model.source.initial]))[0]
    trans = _cumrows(_float_rows(model.source.transition))
    inner = _cumrows(_float_rows(model.channel.inner))
    outer = _cumrows(_float_rows(model.channel.outer))
    us, vs, xs, ys, zs, uhats, vhats = [], [], [], [], [], [], []
    cost = 0.0
    s_cur = None
    for t in range(1, model.horizon + 1):
        cdf = init if t == 1 else trans[s_cur]
        s_cur = int((rng.random() < cdf).argmax())
        u, v = model.split_index(s_cur)
        us.append(u)
        vs.append(v)
        x = exe.encode(t, tuple(us), tuple(vs), tuple(ys), tuple(zs))
        xs.append(x)
        y = int((rng.random() < inner[x]).argmax())
        ys.append(y)
        z = int((rng.random() < outer[y]).argmax())
        zs.append(z)
        uh = exe.decode_u(t, tuple(ys), tuple(zs[:-1]))
        vh = exe.decode_v(t, tuple(zs))
        uhats.append(uh)
        vhats.append(vh)
        cost += float(model.distortion.rho1[t - 1][u][uh])
        cost += float(model.distortion.rho2[t - 1][v][vh])
    return Episode(
        us=tuple(us),
        vs=tuple(vs),
        xs=tuple(xs),
        ys=tuple(ys),
        zs=tuple(zs),
        uhats=tuple(uhats),
        vhats=tuple(vhats),
        seed=seed,
        cost=cost,
    )


def monte_carlo_cost(model, s, n, seed):
    """Monte Carlo estimate of the expected total distortion.

    Vectorized over samples; strategy decisions are looked up once per
    distinct realized history (lazy tabulation), so arbitrary executables
    are supported.  Deterministic given (model, strategy, n, seed).
    """
    if n < 1:
        raise ValueError("sample count must be >= 1")
    exe = make_executable(s, model)
    rng = np.random.default_rng(seed)
    ns, nv, ny, nz = model.ns, model.nv, model.ny, model.nz
    init_cum = _cumrows(_float_rows([model.source.initial]))[0]
    trans_cum = _cumrows(_float_rows(model.source.transition))
    inner_cum = _cumrows(_float_rows(model.channel.inner))
    outer_cum = _cumrows(_float_rows(model.channel.outer))
    rho1 = [_float_rows(m) for m in model.distortion.rho1]
    rho2 = [_float_rows(m) for m in model.distortion.rho2]

    totals = np.zeros(n)
    per_stage = []
    h = np.zeros(n, dtype=np.int64)  # encoded realized history per sample
    # stage-local map: h before stage t -> (us, vs, ys, zs) of length t-1
    decode_map = {0: ((), (), (), ())}
    s_cur = None
    for t in range(1, model.horizon + 1):
        if t == 1:
            s_cur = (rng.random(n)[:, None] < init_cum[None, :]).argmax(axis=1)
        else:
            s_cur = _draw(trans_cum[s_cur], rng.random(n))
        u_cur, v_cur = s_cur // nv, s_cur % nv

        enc_keys = h * ns + s_cur
        uniq, inv = np.unique(enc_keys, return_inverse=True)
        xs_uniq = np.empty(len(uniq), dtype=np.int64)
        for i, key in enumerate(uniq):
            hp, s0 = divmod(int(key), ns)
            us, vs, ys, zs = decode_map[hp]
            u0, v0 = divmod(s0, nv)
            xs_uniq[i] = exe.encode(t, us + (u0,), vs + (v0,), ys, zs)
        x = xs_uniq[inv]

        y = _draw(inner_cum[x], rng.random(n))
        z = _draw(outer_cum[y], rng.random(n))

        k1 = h * ny + y
        uniq1, inv1 = np.unique(k1, return_inverse=True)
        uh_uniq = np.empty(len(uniq1), dtype=np.int64)
        for i, key in enumerate(uniq1):
            hp, y0 = divmod(int(key), ny)
            _, _, ys, zs = decode_map[hp]
            uh_uniq[i] = exe.decode_u(t, ys + (y0,), zs)
        uh = uh_uniq[inv1]

        k2 = h * nz + z
        uniq2, inv2 = np.unique(k2, return_inverse=True)
        vh_uniq = np.empty(len(uniq2), dtype=np.int64)
        for i, key in enumerate(uniq2):
            hp, z0 = divmod(int(key), nz)
            _, _, _, zs = decode_map[hp]
            vh_uniq[i] = exe.decode_v(t, zs + (z0,))
        vh = vh_uniq[inv2]

        stage1 = rho1[t - 1][u_cur, uh]
        stage2 = rho2[t - 1][v_cur, vh]
        totals += stage1 + stage2
        per_stage.append((float(stage1.mean()), float(stage2.mean())))

        h = ((h * ns + s_cur) * ny + y) * nz + z
        if t < model.horizon:
            nxt_map = {}
            for hv in np.unique(h):
                hv = int(hv)
                rest, z0 = divmod(hv, nz)
                rest, y0 = divmod(rest, ny)
                hp, s0 = divmod(rest, ns)
                us, vs, ys, zs = decode_map[hp]
                u0, v0 = divmod(s0, nv)
                nxt_map[hv] = (us + (u0,), vs + (v0,), ys + (y0,), zs + (z0,))
            decode_map = nxt_map

    mean = float(totals.mean())
    stderr = float(totals.std(ddof=1) / np.sqrt(n)) if n > 1 else float("inf")
    return CostReport(
        total=mean,
        per_stage=tuple(per_stage),
        mode="monte_carlo",
        samples=n,
        stderr=stderr,
        seed=seed,
    )


def _noise_partition(rows):
    """Common-random-numbers partition of [0, 1) for a stochastic matrix.

    Returns ``(masses, mapping)`` where ``masses[k]`` is the exact width
    of interval k and ``mapping[i][k]`` is the symbol produced when the
    uniform variate falls in interval k and the input symbol is i
    (inverse-CDF over ascending symbol indices).
    """
    points = {Fraction(0), Fraction(1)}
    for row in rows:
        acc = Fraction(0)
        for w in row:
            acc += Fraction(w)
            points.add(acc)
    points = sorted(points)
    intervals = [
        (lo, hi) for lo, hi in zip(points[:-1], points[1:]) if hi > lo
    ]
    masses = [hi - lo for lo, hi in intervals]
    mapping = []
    for row in rows:
        syms = []
        for lo, _ in intervals:
            acc = Fraction(0)
            sym = len(row) - 1
            for j, w in enumerate(row):
                acc += Fraction(w)
                if lo < acc:
                    sym = j
                    break
            syms.append(sym)
        mapping.append(syms)
    return masses, mapping


def trajectory_equivalence(model, a, b, cap=DEFAULT_TRAJECTORY_CAP):
    """Exhaustively co-execute two strategies against every realization.

    Source randomness and channel noise are coupled: both strategies see
    the same source path and the same inverse-CDF noise variates.
    Reports the first divergence in the realized
    (x, y, z, uhat, vhat) sequences, or EQUIVALENT.
    """
    exe_a = make_executable(a, model)
    exe_b = make_executable(b, model)
    T = model.horizon
    masses1, map1 = _noise_partition(model.channel.inner)
    masses2, map2 = _noise_partition(model.channel.outer)

    paths = []

    def walk_paths(t, us, vs, prob):
        if prob == 0:
            return
        if t > T:
            paths.append((us, vs, prob))
            return
        dist = (
            model.source.initial
            if t == 1
            else model.source.transition[model.joint_index(us[-1], vs[-1])]
        )
        for s, w in enumerate(dist):
            if w == 0:
                continue
            u, v = model.split_index(s)
            walk_paths(t + 1, us + (u,), vs + (v,), prob * w)

    walk_paths(1, (), (), Fraction(1))

    count = len(paths) * (len(masses1) * len(masses2)) ** T
    if count > cap:
        raise CapExceeded("equivalence enumeration", count, cap)

    checked = 0
    for us, vs, _ in paths:
        for noise in itertools.product(
            itertools.product(range(len(masses1)), repeat=T),
            itertools.product(range(len(masses2)), repeat=T),
        ):
            k1s, k2s = noise
            checked += 1
            hist = {"a": {"ys": (), "zs": ()}, "b": {"ys": (), "zs": ()}}
            for t in range(1, T + 1):
                realized = {}
                for name, exe in (("a", exe_a), ("b", exe_b)):
                    ys, zs = hist[name]["ys"], hist[name]["zs"]
                    x = exe.encode(t, us[:t], vs[:t], ys, zs)
                    y = map1[x][k1s[t - 1]]
                    z = map2[y][k2s[t - 1]]
                    uh = exe.decode_u(t, ys + (y,), zs)
                    vh = exe.decode_v(t, zs + (z,))
                    hist[name]["ys"] = ys + (y,)
                    hist[name]["zs"] = zs + (z,)
                    realized[name] = (x, y, z, uh, vh)
                if realized["a"] != realized["b"]:
                    fields = ("x", "y", "z", "uhat", "vhat")
                    for f, va, vb in zip(fields, realized["a"], realized["b"]):
                        if va != vb:
                            return EquivalenceVerdict(
                                equivalent=False,
                                checked=checked,
                                divergence={
                                    "stage": t,
                                    "field": f,
                                    "a": va,
                                    "b": vb,
                                    "source": (us, vs),
                                    "noise": (k1s, k2s),
                                },
                            )
    return EquivalenceVerdict(equivalent=True, checked=checked)
