"""Pure-Python kernel backend.

Same integer algorithms as the compiled backend, with arbitrary
precision (no 64-bit limits).  Used when the extension is unavailable,
when a plan's integers would overflow int64, and as the reference
implementation in the kernel cross-checks and benchmark.
"""

BACKEND = "python"


def _eval(plan, enc_idx, enc, dec1, dec2):
    T, C = plan.T, plan.C
    nu, nv, ny = plan.nu, plan.nv, plan.ny
    nuh, nvh = plan.nuh, plan.nvh
    base, qys, ych = plan.base, plan.qys, plan.ych
    i1, usym, i2, vsym = plan.i1, plan.usym, plan.i2, plan.vsym
    A1 = [[0] * (plan.n_i1[t] * nu) for t in range(T)]
    A2 = [[0] * (plan.n_i2[t] * nv) for t in range(T)]
    for j in range(C):
        w = base[j]
        for t in range(T):
            x = enc[t][enc_idx[t][j]]
            w *= qys[x * ny + ych[t][j]]
        for t in range(T):
            A1[t][i1[t][j] * nu + usym[t][j]] += w
            A2[t][i2[t][j] * nv + vsym[t][j]] += w
    cost = 0
    for t in range(T):
        rho1, rho2 = plan.rho1s[t], plan.rho2s[t]
        a1 = A1[t]
        for g in range(plan.n_i1[t]):
            off = g * nu
            if dec1 is not None:
                uh = dec1[t][g]
            else:
                uh, best = 0, None
                for cand in range(nuh):
                    val = sum(rho1[u][cand] * a1[off + u] for u in range(nu))
                    if best is None or val < best:
                        uh, best = cand, val
            cost += sum(rho1[u][uh] * a1[off + u] for u in range(nu))
        a2 = A2[t]
        for g in range(plan.n_i2[t]):
            off = g * nv
            if dec2 is not None:
                vh = dec2[t][g]
            else:
                vh, best = 0, None
                for cand in range(nvh):
                    val = sum(rho2[v][cand] * a2[off + v] for v in range(nv))
                    if best is None or val < best:
                        vh, best = cand, val
            cost += sum(rho2[v][vh] * a2[off + v] for v in range(nv))
    return cost


def eval_cost(plan, enc, domain="markov", dec1=None, dec2=None):
    """Exact cost numerator for one strategy (over plan.cost_denom).

    ``enc`` holds one table per stage over the chosen encoder domain;
    ``dec1``/``dec2`` are per-stage decoder tables over the information
    sets, or None for MAP decoding.
    """
    enc_idx = plan.midx if domain == "markov" else plan.fidx
    return _eval(plan, enc_idx, enc, dec1, dec2)


def map_decoders(plan, enc, domain="markov"):
    """Optimal decoder tables for a fixed encoder.

    Returns per-stage lists over the decoder information-set indices,
    with the same lowest-index tie-breaking as the evaluation kernels.
    """
    T, C = plan.T, plan.C
    nu, nv, ny = plan.nu, plan.nv, plan.ny
    nuh, nvh = plan.nuh, plan.nvh
    enc_idx = plan.midx if domain == "markov" else plan.fidx
    base, qys, ych = plan.base, plan.qys, plan.ych
    i1, usym, i2, vsym = plan.i1, plan.usym, plan.i2, plan.vsym
    A1 = [[0] * (plan.n_i1[t] * nu) for t in range(T)]
    A2 = [[0] * (plan.n_i2[t] * nv) for t in range(T)]
    for j in range(C):
        w = base[j]
        for t in range(T):
            x = enc[t][enc_idx[t][j]]
            w *= qys[x * ny + ych[t][j]]
        for t in range(T):
            A1[t][i1[t][j] * nu + usym[t][j]] += w
            A2[t][i2[t][j] * nv + vsym[t][j]] += w
    dec1, dec2 = [], []
    for t in range(T):
        rho1, rho2 = plan.rho1s[t], plan.rho2s[t]
        a1, a2 = A1[t], A2[t]
        stage1 = []
        for g in range(plan.n_i1[t]):
            off = g * nu
            uh, best = 0, None
            for cand in range(nuh):
                val = sum(rho1[u][cand] * a1[off + u] for u in range(nu))
                if best is None or val < best:
                    uh, best = cand, val
            stage1.append(uh)
        dec1.append(stage1)
        stage2 = []
        for g in range(plan.n_i2[t]):
            off = g * nv
            vh, best = 0, None
            for cand in range(nvh):
                val = sum(rho2[v][cand] * a2[off + v] for v in range(nv))
                if best is None or val < best:
                    vh, best = cand, val
            stage2.append(vh)
        dec2.append(stage2)
    return dec1, dec2


def enumerate_markov(plan, prefix=()):
    """Exhaustive minimum over all Markov encoder tables (MAP decoders).

    Iterates the concatenated per-stage tables as digits, leftmost most
    significant, starting from the fixed ``prefix``; the first minimizer
    in this order is the lexicographically smallest.  Returns
    ``(best_numerator, best_digits, count)``.
    """
    T, nx = plan.T, plan.nx
    D = plan.doffs[T]
    digits = list(prefix) + [0] * (D - len(prefix))
    npre = len(prefix)
    best, best_digits, count = None, None, 0
    while True:
        enc = [digits[plan.doffs[t] : plan.doffs[t + 1]] for t in range(T)]
        cost = _eval(plan, plan.midx, enc, None, None)
        count += 1
        if best is None or cost < best:
            best, best_digits = cost, tuple(digits)
        k = D - 1
        while k >= npre:
            digits[k] += 1
            if digits[k] < nx:
                break
            digits[k] = 0
            k -= 1
        if k < npre:
            break
    return best, best_digits, count
