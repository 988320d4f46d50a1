"""Integer-scaled evaluation plan for the hot kernels.

The exact expected cost of a deterministic strategy is a rational whose
denominator depends only on the model, so every probability is scaled to
an integer numerator over a model-wide denominator and the kernels work
in pure integer arithmetic: exact, and fast in the compiled backend.

A plan enumerates every trajectory "combo" (source pair, inner symbol,
outer symbol per stage) once and precomputes, per combo:

* the encoder-independent base weight (source law times outer kernel);
* per stage, the inner symbol and the index into the stage encoder
  table, for both the Markov domain (current pair + observation
  histories) and the full-history domain;
* per stage, the decoder information-set indices (inner: y-history and
  lagged z-history; outer: z-history) and the current source symbols.

Evaluating one encoder is then a flat pass over combos accumulating
decoder information-set weights, followed by a MAP (or table) decoding
pass, all in integers.
"""

import itertools
from math import lcm

from fractions import Fraction

from .errors import CapExceeded

INT64_LIMIT = 1 << 62

DEFAULT_PLAN_CAP = 1_000_000


def _common_denominator(rows):
    d = 1
    for row in rows:
        for x in row:
            d = lcm(d, Fraction(x).denominator)
    return d


def _scale(rows, d):
    return [[int(Fraction(x) * d) for x in row] for row in rows]


class EvalPlan:
    def __init__(self, model, cap=DEFAULT_PLAN_CAP):
        self.model = model
        T = model.horizon
        ns, nv, nx, ny, nz = model.ns, model.nv, model.nx, model.ny, model.nz
        C = (ns * ny * nz) ** T
        if C > cap:
            raise CapExceeded("evaluation plan", C, cap)
        self.T, self.C = T, C
        self.ns, self.nv, self.nx, self.ny, self.nz = ns, nv, nx, ny, nz
        self.nuh, self.nvh = model.nuh, model.nvh
        nu = model.nu
        self.nu = nu

        d_init = _common_denominator([model.source.initial])
        d_trans = _common_denominator(model.source.transition)
        d_inner = _common_denominator(model.channel.inner)
        d_outer = _common_denominator(model.channel.outer)
        d_rho = lcm(
            _common_denominator([r for m in model.distortion.rho1 for r in m]),
            _common_denominator([r for m in model.distortion.rho2 for r in m]),
        )
        init = _scale([model.source.initial], d_init)[0]
        trans = _scale(model.source.transition, d_trans)
        inner = _scale(model.channel.inner, d_inner)
        outer = _scale(model.channel.outer, d_outer)
        self.qys = [inner[x][y] for x in range(nx) for y in range(ny)]
        self.rho1s = [
            [[int(Fraction(x) * d_rho) for x in row] for row in m] for m in model.distortion.rho1
        ]
        self.rho2s = [
            [[int(Fraction(x) * d_rho) for x in row] for row in m] for m in model.distortion.rho2
        ]
        self.weight_denom = d_init * d_trans ** (T - 1) * (d_inner * d_outer) ** T
        self.rho_denom = d_rho
        self.cost_denom = self.weight_denom * d_rho

        # domain sizes
        self.mdom = [ns * (ny * nz) ** (t - 1) for t in range(1, T + 1)]
        self.fdom = [ns**t * (ny * nz) ** (t - 1) for t in range(1, T + 1)]
        self.n_i1 = [ny**t * nz ** (t - 1) for t in range(1, T + 1)]
        self.n_i2 = [nz**t for t in range(1, T + 1)]
        self.off1 = [0]
        for t in range(T):
            self.off1.append(self.off1[-1] + self.n_i1[t] * nu)
        self.off2 = [0]
        for t in range(T):
            self.off2.append(self.off2[-1] + self.n_i2[t] * nv)
        self.doffs = [0]
        for t in range(T):
            self.doffs.append(self.doffs[-1] + self.mdom[t])
        self.foffs = [0]
        for t in range(T):
            self.foffs.append(self.foffs[-1] + self.fdom[t])

        base = []
        ych = [[] for _ in range(T)]
        midx = [[] for _ in range(T)]
        fidx = [[] for _ in range(T)]
        i1 = [[] for _ in range(T)]
        usym = [[] for _ in range(T)]
        i2 = [[] for _ in range(T)]
        vsym = [[] for _ in range(T)]

        stage_space = list(itertools.product(range(ns), range(ny), range(nz)))
        for combo in itertools.product(stage_space, repeat=T):
            w = init[combo[0][0]]
            yidx = zidx = 0
            pathidx = 0
            for t in range(T):
                s, y, z = combo[t]
                if t > 0:
                    w *= trans[combo[t - 1][0]][s]
                w *= outer[y][z]
                # encoder-domain indices use the pre-stage histories
                hist = yidx * nz**t + zidx
                midx[t].append(s * (ny * nz) ** t + hist)
                fidx[t].append((pathidx * ns + s) * (ny * nz) ** t + hist)
                ych[t].append(y)
                # decoder information sets fold in the stage-t inner symbol
                i1[t].append((yidx * ny + y) * nz**t + zidx)
                usym[t].append(s // nv)
                i2[t].append(zidx * nz + z)
                vsym[t].append(s % nv)
                yidx = yidx * ny + y
                zidx = zidx * nz + z
                pathidx = pathidx * ns + s
            base.append(w)

        self.base = base
        self.ych = ych
        self.midx = midx
        self.fidx = fidx
        self.i1 = i1
        self.usym = usym
        self.i2 = i2
        self.vsym = vsym

        rho_peak = sum(
            max(max(row) for row in self.rho1s[t]) + max(max(row) for row in self.rho2s[t])
            for t in range(T)
        )
        self.fits_int64 = self.weight_denom * max(rho_peak, 1) < INT64_LIMIT

        self._np = None

    def as_numpy(self):
        """int64 views of the plan arrays for the compiled backend."""
        if self._np is None:
            if not self.fits_int64:
                raise OverflowError("plan does not fit in 64-bit integers")
            import numpy as np

            self._np = {
                "base": np.array(self.base, dtype=np.int64),
                "ych": np.array(self.ych, dtype=np.int64),
                "midx": np.array(self.midx, dtype=np.int64),
                "fidx": np.array(self.fidx, dtype=np.int64),
                "i1": np.array(self.i1, dtype=np.int64),
                "usym": np.array(self.usym, dtype=np.int64),
                "i2": np.array(self.i2, dtype=np.int64),
                "vsym": np.array(self.vsym, dtype=np.int64),
                "qys": np.array(self.qys, dtype=np.int64),
                "rho1s": np.array(
                    [
                        [self.rho1s[t][u][uh] for u in range(len(self.rho1s[t])) for uh in range(self.nuh)]
                        for t in range(self.T)
                    ],
                    dtype=np.int64,
                ),
                "rho2s": np.array(
                    [
                        [self.rho2s[t][v][vh] for v in range(len(self.rho2s[t])) for vh in range(self.nvh)]
                        for t in range(self.T)
                    ],
                    dtype=np.int64,
                ),
                "n_i1": np.array(self.n_i1, dtype=np.int64),
                "n_i2": np.array(self.n_i2, dtype=np.int64),
                "off1": np.array(self.off1, dtype=np.int64),
                "off2": np.array(self.off2, dtype=np.int64),
                "mdom": np.array(self.mdom, dtype=np.int64),
                "doffs": np.array(self.doffs, dtype=np.int64),
                "foffs": np.array(self.foffs, dtype=np.int64),
                "nu": self.nu,
                "nv": self.nv,
                "nx": self.nx,
                "ny": self.ny,
                "nuh": self.nuh,
                "nvh": self.nvh,
            }
        return self._np

    def cost_fraction(self, numerator):
        return Fraction(numerator, self.cost_denom)

    def markov_class_size(self):
        return self.nx ** sum(self.mdom)
