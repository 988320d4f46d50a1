"""System model: source, degraded channel, distortion schedule, horizon.

A model instance is immutable after validation and safe for concurrent
reads.  Probabilities are stored as exact ``Fraction`` values regardless
of the arithmetic mode used by later computations.

Conventions used throughout the package:

* source pairs (u, v) are flattened to a joint index ``s = u * nv + v``;
* stages are 1-based, ``t = 1..T``;
* histories are tuples, e.g. ``ys = (y_1, ..., y_t)``.
"""

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction

from .errors import CapExceeded, ModelValidationError
from .numbers import format_number, parse_number

ALPHABET_NAMES = ("U", "V", "X", "Y", "Z", "Uhat", "Vhat")

DEFAULT_TRAJECTORY_CAP = 10**7


@dataclass(frozen=True)
class Alphabet:
    name: str
    size: int

    def __post_init__(self):
        if self.size < 1:
            raise ModelValidationError(
                f"alphabet size must be >= 1, got {self.size}", path=f"alphabets.{self.name}"
            )


@dataclass(frozen=True)
class MarkovSource:
    """First-order time-homogeneous law of the joint pair (U_t, V_t).

    ``initial`` is a distribution over the joint index; ``transition``
    maps a previous joint index to a distribution over the next one.
    """

    initial: tuple
    transition: tuple  # tuple of rows, one per previous joint index


@dataclass(frozen=True)
class DegradedChannel:
    """Kernels of the X -> Y -> Z chain.

    ``inner`` has one row per channel input x (a distribution over Y);
    ``outer`` has one row per inner output y (a distribution over Z).
    The joint kernel is the product inner[x][y] * outer[y][z].
    """

    inner: tuple
    outer: tuple

    def joint(self, x, y, z):
        return self.inner[x][y] * self.outer[y][z]


@dataclass(frozen=True)
class DistortionSchedule:
    """Per-stage distortion matrices, entries in [0, rho_max]."""

    rho1: tuple  # per stage: matrix indexed [u][uhat]
    rho2: tuple  # per stage: matrix indexed [v][vhat]
    rho_max: Fraction


@dataclass(frozen=True)
class SystemModel:
    alphabets: dict
    source: MarkovSource
    channel: DegradedChannel
    distortion: DistortionSchedule
    horizon: int

    @property
    def nu(self):
        return self.alphabets["U"].size

    @property
    def nv(self):
        return self.alphabets["V"].size

    @property
    def nx(self):
        return self.alphabets["X"].size

    @property
    def ny(self):
        return self.alphabets["Y"].size

    @property
    def nz(self):
        return self.alphabets["Z"].size

    @property
    def nuh(self):
        return self.alphabets["Uhat"].size

    @property
    def nvh(self):
        return self.alphabets["Vhat"].size

    @property
    def ns(self):
        return self.nu * self.nv

    def joint_index(self, u, v):
        return u * self.nv + v

    def split_index(self, s):
        return divmod(s, self.nv)

    def trajectory_count(self):
        return (self.ns * self.ny * self.nz) ** self.horizon

    def content_hash(self):
        blob = json.dumps(model_to_dict(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _parse_row(row, size, path):
    if not isinstance(row, (list, tuple)):
        raise ModelValidationError("expected a list of numbers", path=path)
    if len(row) != size:
        raise ModelValidationError(f"expected {size} entries, got {len(row)}", path=path)
    out = []
    for i, value in enumerate(row):
        try:
            x = parse_number(value, path=f"{path}[{i}]")
        except ValueError as exc:
            raise ModelValidationError(str(exc), path=f"{path}[{i}]") from exc
        out.append(x)
    return tuple(out)


def _check_dist(row, path):
    for i, w in enumerate(row):
        if w < 0:
            raise ModelValidationError(f"negative probability {format_number(w)}", path=f"{path}[{i}]")
    total = sum(row)
    if total != 1:
        raise ModelValidationError(
            f"row not stochastic (sums to {format_number(total)})", path=path
        )
    return row


def _parse_matrix(rows, nrows, ncols, path, stochastic=True):
    if not isinstance(rows, (list, tuple)):
        raise ModelValidationError("expected a matrix (list of rows)", path=path)
    if len(rows) != nrows:
        raise ModelValidationError(f"expected {nrows} rows, got {len(rows)}", path=path)
    out = []
    for i, row in enumerate(rows):
        parsed = _parse_row(row, ncols, f"{path}[{i}]")
        if stochastic:
            _check_dist(parsed, f"{path}[{i}]")
        out.append(parsed)
    return tuple(out)


def validate_model(raw):
    """Build a SystemModel from a parsed config dict, checking every invariant.

    Raises ModelValidationError naming the offending index path.
    """
    if not isinstance(raw, dict):
        raise ModelValidationError("model config must be a mapping", path="$")
    for field in ("alphabets", "horizon", "source", "channel", "distortion"):
        if field not in raw:
            raise ModelValidationError("missing required field", path=field)

    alpha_raw = raw["alphabets"]
    alphabets = {}
    for name in ("U", "V", "X", "Y", "Z"):
        if name not in alpha_raw:
            raise ModelValidationError("missing alphabet", path=f"alphabets.{name}")
        size = alpha_raw[name]
        if not isinstance(size, int) or isinstance(size, bool):
            raise ModelValidationError("alphabet size must be an integer", path=f"alphabets.{name}")
        alphabets[name] = Alphabet(name, size)
    # Reconstruction alphabets default to the source alphabets.
    alphabets["Uhat"] = Alphabet("Uhat", alpha_raw.get("Uhat", alphabets["U"].size))
    alphabets["Vhat"] = Alphabet("Vhat", alpha_raw.get("Vhat", alphabets["V"].size))

    horizon = raw["horizon"]
    if not isinstance(horizon, int) or isinstance(horizon, bool) or horizon < 1:
        raise ModelValidationError("horizon must be an integer >= 1", path="horizon")

    nu, nv = alphabets["U"].size, alphabets["V"].size
    ns = nu * nv
    nx, ny, nz = alphabets["X"].size, alphabets["Y"].size, alphabets["Z"].size
    nuh, nvh = alphabets["Uhat"].size, alphabets["Vhat"].size

    src_raw = raw["source"]
    initial = _check_dist(_parse_row(src_raw.get("initial"), ns, "source.initial"), "source.initial")
    transition = _parse_matrix(src_raw.get("transition"), ns, ns, "source.transition")
    source = MarkovSource(initial=initial, transition=transition)

    ch_raw = raw["channel"]
    inner = _parse_matrix(ch_raw.get("inner"), nx, ny, "channel.inner")
    outer = _parse_matrix(ch_raw.get("outer"), ny, nz, "channel.outer")
    channel = DegradedChannel(inner=inner, outer=outer)

    dist_raw = raw["distortion"]
    try:
        rho_max = parse_number(dist_raw.get("rho_max", 1), path="distortion.rho_max")
    except ValueError as exc:
        raise ModelValidationError(str(exc), path="distortion.rho_max") from exc
    if rho_max < 0:
        raise ModelValidationError("rho_max must be >= 0", path="distortion.rho_max")

    def parse_schedule(key, nrows, ncols):
        sched = dist_raw.get(key)
        if not isinstance(sched, (list, tuple)) or len(sched) != horizon:
            raise ModelValidationError(
                f"expected one matrix per stage ({horizon})", path=f"distortion.{key}"
            )
        out = []
        for t, mat in enumerate(sched):
            parsed = _parse_matrix(mat, nrows, ncols, f"distortion.{key}[{t}]", stochastic=False)
            for i, row in enumerate(parsed):
                for j, val in enumerate(row):
                    if val < 0 or val > rho_max:
                        raise ModelValidationError(
                            f"distortion out of range [0, {format_number(rho_max)}]: "
                            f"{format_number(val)}",
                            path=f"distortion.{key}[{t}][{i}][{j}]",
                        )
            out.append(parsed)
        return tuple(out)

    distortion = DistortionSchedule(
        rho1=parse_schedule("rho1", nu, nuh),
        rho2=parse_schedule("rho2", nv, nvh),
        rho_max=rho_max,
    )

    return SystemModel(
        alphabets=alphabets,
        source=source,
        channel=channel,
        distortion=distortion,
        horizon=horizon,
    )


def model_to_dict(model):
    """Lossless serialization; numbers become ints or "p/q" strings."""

    def row(r):
        return [format_number(x) for x in r]

    def matrix(m):
        return [row(r) for r in m]

    return {
        "alphabets": {name: a.size for name, a in model.alphabets.items()},
        "horizon": model.horizon,
        "source": {
            "initial": row(model.source.initial),
            "transition": matrix(model.source.transition),
        },
        "channel": {
            "inner": matrix(model.channel.inner),
            "outer": matrix(model.channel.outer),
        },
        "distortion": {
            "rho_max": format_number(model.distortion.rho_max),
            "rho1": [matrix(m) for m in model.distortion.rho1],
            "rho2": [matrix(m) for m in model.distortion.rho2],
        },
    }


def save_model(model, path):
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path):
    with open(path) as fh:
        return validate_model(json.load(fh))


def _identity_matrix(n):
    one, zero = Fraction(1), Fraction(0)
    return tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n))


def build_special_case(nu, nv, horizon, nx=None, ny=None, nz=None, inner=None, outer=None):
    """Canned terminal-error scenario.

    Uniform initial law, identity source transition (the source pair is
    frozen over time), zero distortion before the final stage, and
    Hamming distortion at the final stage, so the exact cost of any
    strategy equals Pr(U != Uhat_T) + Pr(V != Vhat_T).

    Channels default to noiseless identities (requires ny == nx and
    nz == ny); pass explicit ``inner``/``outer`` matrices otherwise.
    """
    ns = nu * nv
    if nx is None:
        nx = ns
    if ny is None:
        ny = nx
    if nz is None:
        nz = ny
    if inner is None:
        if ny != nx:
            raise ModelValidationError(
                "default noiseless inner channel needs |Y| == |X|", path="channel.inner"
            )
        inner = _identity_matrix(nx)
    else:
        inner = [[parse_number(x) for x in row] for row in inner]
    if outer is None:
        if nz != ny:
            raise ModelValidationError(
                "default noiseless outer channel needs |Z| == |Y|", path="channel.outer"
            )
        outer = _identity_matrix(ny)
    else:
        outer = [[parse_number(x) for x in row] for row in outer]

    uniform = tuple(Fraction(1, ns) for _ in range(ns))
    zero1 = tuple(tuple(Fraction(0) for _ in range(nu)) for _ in range(nu))
    zero2 = tuple(tuple(Fraction(0) for _ in range(nv)) for _ in range(nv))
    # Standard Hamming distortion: 0 when the reconstruction matches.
    ham1 = tuple(tuple(Fraction(0 if u == uh else 1) for uh in range(nu)) for u in range(nu))
    ham2 = tuple(tuple(Fraction(0 if v == vh else 1) for vh in range(nv)) for v in range(nv))

    raw = {
        "alphabets": {"U": nu, "V": nv, "X": nx, "Y": ny, "Z": nz},
        "horizon": horizon,
        "source": {
            "initial": [format_number(w) for w in uniform],
            "transition": [[format_number(x) for x in r] for r in _identity_matrix(ns)],
        },
        "channel": {
            "inner": [[format_number(x) for x in r] for r in inner],
            "outer": [[format_number(x) for x in r] for r in outer],
        },
        "distortion": {
            "rho_max": "1",
            "rho1": [
                [[format_number(x) for x in r] for r in (ham1 if t == horizon - 1 else zero1)]
                for t in range(horizon)
            ],
            "rho2": [
                [[format_number(x) for x in r] for r in (ham2 if t == horizon - 1 else zero2)]
                for t in range(horizon)
            ],
        },
    }
    return validate_model(raw)


def _encode_fn(enc):
    if callable(enc):
        return enc
    return enc.encode


def reachable_trajectory_support(model, enc, cap=DEFAULT_TRAJECTORY_CAP):
    """Exhaustive list of positive-probability trajectories.

    Returns a list of ``(us, vs, ys, zs, prob)`` tuples whose exact
    probabilities sum to 1.  ``enc`` is an executable encoder: either an
    object with an ``encode(t, us, vs, ys, zs)`` method or a bare
    callable with the same signature.
    """
    count = model.trajectory_count()
    if count > cap:
        raise CapExceeded("trajectory enumeration", count, cap)
    encode = _encode_fn(enc)
    T = model.horizon
    inner, outer = model.channel.inner, model.channel.outer
    out = []

    def walk(t, us, vs, ys, zs, prob):
        if prob == 0:
            return
        if t > T:
            out.append((us, vs, ys, zs, prob))
            return
        # draw the source pair for stage t
        if t == 1:
            pair_dist = model.source.initial
        else:
            pair_dist = model.source.transition[model.joint_index(us[-1], vs[-1])]
        for s, ps in enumerate(pair_dist):
            if ps == 0:
                continue
            u, v = model.split_index(s)
            nus, nvs = us + (u,), vs + (v,)
            x = encode(t, nus, nvs, ys, zs)
            for y, py in enumerate(inner[x]):
                if py == 0:
                    continue
                for z, pz in enumerate(outer[y]):
                    if pz == 0:
                        continue
                    walk(t + 1, nus, nvs, ys + (y,), zs + (z,), prob * ps * py * pz)

    walk(1, (), (), (), (), Fraction(1))
    return out
