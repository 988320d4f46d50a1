"""Command-line interface.

Every command prints a deterministic report to stdout (timing, when
requested, goes to stderr) so identical invocations produce
byte-identical output.  Exit codes: 0 success, 3 invalid model,
4 a cap was exceeded, 5 a claimed optimum was falsified.
"""

import sys
import time

import click
import numpy as np

from . import __version__, kernel
from .errors import CapExceeded, ModelValidationError
from .evaluate import exact_cost, monte_carlo_cost
from .model import load_model
from .numbers import FLOAT, RATIONAL, format_number
from .sampling import random_markov_strategy, random_structured_encoder
from .search import (
    DEFAULT_ENCODER_CAP,
    brute_force_markov,
    coordinator_dp,
    falsify_structural,
)
from .strategy import load_strategy, make_executable, save_strategy, strategy_hash

EXIT_VALIDATION = 3
EXIT_CAP = 4
EXIT_FALSIFIED = 5


def _manifest(command, model, **params):
    lines = [
        "manifest:",
        f"  tool: nestcast {__version__}",
        f"  command: {command}",
        f"  model: {model.content_hash()}",
    ]
    for key in sorted(params):
        lines.append(f"  {key}: {params[key]}")
    return "\n".join(lines)


def _load_model_or_exit(path):
    try:
        return load_model(path)
    except (ModelValidationError, ValueError) as exc:
        click.echo(f"invalid model: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)


def _timing(enabled, started):
    if enabled:
        click.echo(f"elapsed: {time.perf_counter() - started:.3f}s", err=True)


@click.group()
@click.version_option(__version__)
def main():
    """Exact solvers and verifiers for two-terminal relay transmission
    of a paired Markov source with layered feedback."""


@main.command()
@click.argument("model_path", type=click.Path(exists=True))
def validate(model_path):
    """Check a model file; print its content hash."""
    model = _load_model_or_exit(model_path)
    click.echo(f"ok {model.content_hash()}")


@main.command()
@click.argument("model_path", type=click.Path(exists=True))
@click.option("--method", type=click.Choice(["dp", "brute", "both"]), default="both")
@click.option("--mode", type=click.Choice([RATIONAL, FLOAT]), default=RATIONAL)
@click.option("--workers", type=int, default=1)
@click.option("--cap-encoders", type=int, default=DEFAULT_ENCODER_CAP)
@click.option("--save-strategy", "save_path", type=click.Path(), default=None)
@click.option("--timing", is_flag=True, help="Print elapsed time to stderr.")
def solve(model_path, method, mode, workers, cap_encoders, save_path, timing):
    """Compute the optimal expected total distortion."""
    model = _load_model_or_exit(model_path)
    started = time.perf_counter()
    click.echo(
        _manifest(
            "solve", model, method=method, mode=mode, workers=workers,
            cap_encoders=cap_encoders,
        )
    )
    try:
        results = {}
        if method in ("dp", "both"):
            results["dp"] = coordinator_dp(model, mode=mode)
        if method in ("brute", "both"):
            results["brute"] = brute_force_markov(
                model, cap=cap_encoders, workers=workers
            )
    except CapExceeded as exc:
        click.echo(f"cap exceeded: {exc}", err=True)
        sys.exit(EXIT_CAP)
    for name in sorted(results):
        r = results[name]
        click.echo(f"{name} cost: {format_number(r.cost)}")
        click.echo(f"{name} evaluated: {r.evaluated}")
    if len(results) == 2:
        agree = results["dp"].cost == results["brute"].cost
        click.echo(f"agreement: {'yes' if agree else 'NO'}")
    if save_path is not None:
        chosen = results.get("dp") or results.get("brute")
        save_strategy(chosen.strategy, save_path)
        click.echo(f"strategy: {strategy_hash(chosen.strategy)}")
    _timing(timing, started)


@main.command()
@click.argument("model_path", type=click.Path(exists=True))
@click.argument("strategy_path", type=click.Path(exists=True))
@click.option("--samples", type=int, default=0, help="Monte Carlo samples (0 = exact only).")
@click.option("--seed", type=int, default=0)
@click.option("--csv", "csv_out", type=click.Path(), default=None)
@click.option("--timing", is_flag=True)
def simulate(model_path, strategy_path, samples, seed, csv_out, timing):
    """Evaluate a saved strategy exactly and optionally by simulation."""
    model = _load_model_or_exit(model_path)
    strategy = load_strategy(strategy_path)
    started = time.perf_counter()
    click.echo(
        _manifest(
            "simulate", model, strategy=strategy_hash(strategy),
            samples=samples, seed=seed,
        )
    )
    exe = make_executable(strategy, model)
    report = exact_cost(model, exe)
    click.echo(f"exact cost: {format_number(report.total)}")
    for t, (c1, c2) in enumerate(report.per_stage, start=1):
        click.echo(f"stage {t}: {format_number(c1)} {format_number(c2)}")
    mhash, shash = model.content_hash(), strategy_hash(strategy)
    rows = [report.csv_row(mhash, shash)]
    if samples > 0:
        mc = monte_carlo_cost(model, strategy, samples, seed)
        click.echo(f"monte carlo cost: {mc.total!r}")
        click.echo(f"monte carlo stderr: {mc.stderr!r}")
        rows.append(mc.csv_row(mhash, shash))
    if csv_out is not None:
        stage_cols = ",".join(
            f"stage{t}_inner,stage{t}_outer" for t in range(1, model.horizon + 1)
        )
        with open(csv_out, "w") as fh:
            fh.write(f"model,strategy,mode,total,{stage_cols},samples,stderr,seed\n")
            for row in rows:
                fh.write(row + "\n")
    _timing(timing, started)


@main.command()
@click.argument("model_path", type=click.Path(exists=True))
@click.option("--samples", type=int, default=10_000)
@click.option("--seed", type=int, default=0)
@click.option("--timing", is_flag=True)
def falsify(model_path, samples, seed, timing):
    """Attack the structured optimum with random general strategies."""
    model = _load_model_or_exit(model_path)
    started = time.perf_counter()
    click.echo(_manifest("falsify", model, samples=samples, seed=seed))
    try:
        opt = coordinator_dp(model)
        result = falsify_structural(model, opt.cost, samples, seed)
    except CapExceeded as exc:
        click.echo(f"cap exceeded: {exc}", err=True)
        sys.exit(EXIT_CAP)
    click.echo(f"claimed optimum: {format_number(result.opt_cost)}")
    click.echo(f"best sampled: {format_number(result.best_cost)}")
    click.echo(f"samples: {result.samples}")
    click.echo(f"verdict: {result.verdict}")
    _timing(timing, started)
    if result.falsified:
        sys.exit(EXIT_FALSIFIED)


@main.command("filter-check")
@click.argument("model_path", type=click.Path(exists=True))
@click.option("--trials", type=int, default=5)
@click.option("--seed", type=int, default=0)
@click.option("--timing", is_flag=True)
def filter_check(model_path, trials, seed, timing):
    """Verify the belief filters against the brute-force reference on
    random strategies for this model."""
    from .belief import (
        BayesOracle,
        pi_init,
        pi_update,
        theta2,
        xi_init,
        xi_update,
    )

    model = _load_model_or_exit(model_path)
    started = time.perf_counter()
    click.echo(_manifest("filter-check", model, trials=trials, seed=seed))
    rng = np.random.default_rng(seed)
    checked = 0
    try:
        for _ in range(trials):
            sm = random_markov_strategy(rng, model)
            exe = make_executable(sm, model)
            oracle = BayesOracle(model, exe)
            for t in range(1, model.horizon + 1):
                for ys, zs in oracle.inner_histories(t):
                    xi = xi_init(model)
                    for k in range(1, t + 1):
                        c_hat = [
                            exe.encode_markov(k, *model.split_index(s), ys[: k - 1], zs[: k - 1])
                            for s in range(model.ns)
                        ]
                        xi = xi_update(xi, ys[k - 1], zs[k - 1], c_hat, model, k)
                    if tuple(xi.weights) != tuple(oracle.uv_given_yz(t, ys, zs)):
                        click.echo("inner filter mismatch")
                        sys.exit(1)
                    checked += 1
            ss = random_structured_encoder(rng, model)
            exe = make_executable(ss, model)
            oracle = BayesOracle(model, exe)
            for t in range(1, model.horizon + 1):
                for zs in sorted({h[1] for h in oracle.inner_histories(t)}):
                    node, pi = ss.root, pi_init(model)
                    for k, z in enumerate(zs, start=1):
                        pi = pi_update(pi, z, node.action, model, k, mode=ss.mode)
                        node = node.children[z]
                    if pi != oracle.uvxi_given_z(t, zs, mode=ss.mode):
                        click.echo("outer filter mismatch")
                        sys.exit(1)
                    if tuple(theta2(pi, model).weights) != tuple(oracle.v_given_z(t, zs)):
                        click.echo("outer decoder belief mismatch")
                        sys.exit(1)
                    checked += 1
    except CapExceeded as exc:
        click.echo(f"cap exceeded: {exc}", err=True)
        sys.exit(EXIT_CAP)
    click.echo(f"checked: {checked}")
    click.echo("verdict: EQUIVALENT")
    _timing(timing, started)


@main.command()
@click.option("--nu", type=int, default=2)
@click.option("--nv", type=int, default=2)
@click.option("--horizon", type=int, default=1)
@click.option("--timing", is_flag=True)
def scenario(nu, nv, horizon, timing):
    """Solve the canned terminal-error scenario with noiseless channels."""
    from .model import build_special_case

    model = build_special_case(nu, nv, horizon)
    started = time.perf_counter()
    click.echo(_manifest("scenario", model, nu=nu, nv=nv, horizon=horizon))
    try:
        dp = coordinator_dp(model)
        brute = brute_force_markov(model)
    except CapExceeded as exc:
        click.echo(f"cap exceeded: {exc}", err=True)
        sys.exit(EXIT_CAP)
    click.echo(f"dp cost: {format_number(dp.cost)}")
    click.echo(f"brute cost: {format_number(brute.cost)}")
    click.echo(f"agreement: {'yes' if dp.cost == brute.cost else 'NO'}")
    click.echo(f"backend: {kernel.BACKEND}")
    _timing(timing, started)


if __name__ == "__main__":
    main()
