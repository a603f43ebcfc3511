"""Command-line experiment harness.

Subcommands: amp (iteration sweeps), se (state-evolution trajectories and
fixed points), spectrum (transformed-matrix and naive-PCA probes), verify
(oracle/invariant smoke suite), gen (instance dump).

One JSON config per invocation, given as the positional argument or --config;
individual fields can be overridden with repeated --set key=value flags (dotted
paths, values parsed as JSON with a string fallback).

Determinism: each sweep task gets the seed
SeedSequence([master_seed, task_index]).generate_state(1, uint64)[0], so the
streams do not depend on scheduling or thread count; worker results are
buffered and written in task-index order.  Every CSV starts with a comment
line carrying the sha256 of the canonical config and the master seed.

Exit codes: 0 success, 2 config error, 3 numeric divergence, 4 verification
failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .amp import AmpConfig, AmpDivergence, amp_step, blockdiag, blockproj, initial_state, \
    matrix_amp_oracle, run_amp
from .model import dump_instance, export_spike_csv, generate
from .priors import BayesOptimal, Gaussian, Identity, Rademacher, SparseRademacher
from .profiles import ProfileError, VarianceProfile, contiguous_partition, scale_to_snr, snr
from .se import QuadratureSpec, SeState, bayes_fixed_point, channel_moments, \
    estimate_overlaps, run_se, se_matrix_mse, se_step
from .spectral import bbp_probe, full_spectrum, naive_pca_probe, transform

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_VERIFY = 4


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Config plumbing
# ---------------------------------------------------------------------------

def canonical_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def apply_overrides(config: dict, pairs: list[str]) -> dict:
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        key, raw = pair.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = config
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"cannot descend into non-object at {part!r} in {key!r}")
        node[parts[-1]] = value
    return config


def parse_prior(spec):
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("prior must be an object with a 'kind' field")
    kind = spec["kind"]
    if kind == "gaussian":
        return Gaussian(variance=float(spec.get("variance", 1.0)))
    if kind == "rademacher":
        return Rademacher()
    if kind == "sparse_rademacher":
        return SparseRademacher(rho=float(spec["rho"]))
    raise ConfigError(f"unknown prior kind {kind!r}")


def parse_profile(spec):
    if not isinstance(spec, dict) or "delta" not in spec:
        raise ConfigError("profile must be an object with a 'delta' matrix")
    try:
        profile = VarianceProfile(np.array(spec["delta"], dtype=np.float64))
    except (ProfileError, ValueError) as exc:
        raise ConfigError(f"bad profile: {exc}") from exc
    fractions = np.asarray(spec.get("fractions", [1.0 / profile.q] * profile.q), dtype=np.float64)
    if fractions.size != profile.q or np.any(fractions <= 0) or abs(fractions.sum() - 1.0) > 1e-9:
        raise ConfigError("fractions must be positive and sum to 1, one per block")
    return profile, fractions


def parse_snr_grid(config) -> list[float]:
    if "snr" in config:
        return [float(config["snr"])]
    grid = config.get("snr_grid")
    if isinstance(grid, list) and grid:
        return [float(v) for v in grid]
    if isinstance(grid, dict):
        start, stop, step = (float(grid[k]) for k in ("start", "stop", "step"))
        if step <= 0 or stop < start:
            raise ConfigError("snr_grid needs step > 0 and stop >= start")
        count = int(round((stop - start) / step)) + 1
        return [round(start + i * step, 12) for i in range(count)]
    raise ConfigError("config needs 'snr' or a nonempty 'snr_grid'")


def parse_common(config):
    n = int(config.get("n", 0))
    if n < 1:
        raise ConfigError("n must be a positive integer")
    prior = parse_prior(config.get("prior", {"kind": "gaussian"}))
    profile, fractions = parse_profile(config.get("profile", {"delta": [[1.0]]}))
    seeds = int(config.get("seeds", 1))
    if seeds < 1:
        raise ConfigError("seeds must be >= 1")
    quad = QuadratureSpec(gh_nodes=int(config.get("gh_nodes", 61)))
    return n, prior, profile, fractions, seeds, quad


def task_seed(master: int, index: int) -> int:
    return int(np.random.SeedSequence([master, index]).generate_state(1, np.uint64)[0])


def fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    return str(v)


def write_csv(path, header_comment, columns, rows):
    with open(path, "w") as fh:
        fh.write(header_comment)
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def run_tasks(tasks, worker, threads):
    """Evaluate worker over enumerate(tasks), preserving task order."""
    if threads <= 1:
        return [worker(i, t) for i, t in enumerate(tasks)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(worker, i, t) for i, t in enumerate(tasks)]
        return [f.result() for f in futures]


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def make_amp_config(config) -> AmpConfig:
    init = config.get("init", {})
    return AmpConfig(
        max_iters=int(config.get("max_iters", 30)),
        tol=float(config.get("tol", 1e-7)),
        init_kind=init.get("kind", "noise"),
        init_eps=float(init.get("eps", 1e-3)),
    )


def cmd_amp(config, out_dir, master_seed, threads) -> int:
    n, prior, profile, fractions, seeds, quad = parse_common(config)
    snr_grid = parse_snr_grid(config)
    try:
        amp_cfg = make_amp_config(config)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    family = Identity() if config.get("family") == "identity" else BayesOptimal(prior)
    partition = contiguous_partition(n, fractions)
    gamma = prior.second_moment

    # SE-predicted matrix MSE per snr, computed once up front so workers stay
    # pure and the CSV is scheduling-independent.
    se_mse = {}
    for lam in snr_grid:
        prof_l = scale_to_snr(profile, fractions, gamma, lam)
        fp = bayes_fixed_point(prior, prof_l, fractions, quad, init_mode="uninformed")
        se_mse[lam] = se_matrix_mse(estimate_overlaps(prior, fp.mu, quad), fractions, gamma)

    tasks = [(lam, s) for lam in snr_grid for s in range(seeds)]

    def worker(index, task):
        lam, _ = task
        seed = task_seed(master_seed, index)
        prof_l = scale_to_snr(profile, fractions, gamma, lam)
        instance = generate(prior, partition, prof_l, seed)
        run = run_amp(instance, family, amp_cfg, quad)
        iter_rows = []
        for k, t in enumerate(run.ts):
            for a in range(partition.q):
                iter_rows.append(("iter", lam, seed, int(t), a,
                                  run.mu_hat[k, a], run.iterate_mu[k, a],
                                  run.sigma2_hat[k, a], run.mse[k], "", ""))
        summary = [("summary", lam, seed, int(run.iters), a,
                    run.mu_hat[-1, a], run.iterate_mu[-1, a],
                    run.sigma2_hat[-1, a], run.mse[-1], se_mse[lam],
                    int(run.converged)) for a in range(partition.q)]
        return iter_rows + summary

    try:
        chunks = run_tasks(tasks, worker, threads)
    except AmpDivergence as exc:
        print(f"amp: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    comment = f"# blockamp={__version__} config={canonical_hash(config)} seed={master_seed}\n"
    cols = ["row", "snr", "seed", "t", "block", "mu_hat", "iterate_mu",
            "sigma2_hat", "mse", "se_mse", "converged"]
    write_csv(os.path.join(out_dir, "amp.csv"), comment, cols,
              [r for chunk in chunks for r in chunk])
    return EXIT_OK


def cmd_se(config, out_dir, master_seed, threads) -> int:
    _ = threads  # the recursion is sequential; sweeps are cheap
    _, prior, profile, fractions, _, quad = parse_common({**config, "n": config.get("n", 1)})
    snr_grid = parse_snr_grid(config)
    gamma = prior.second_moment
    t_max = int(config.get("t_max", 60))
    eps = float(config.get("eps", 1e-6))
    family = BayesOptimal(prior)

    traj_rows, fp_rows = [], []
    for lam in snr_grid:
        prof_l = scale_to_snr(profile, fractions, gamma, lam)
        init = SeState(mu=np.full(profile.q, eps), sigma2=np.full(profile.q, eps))
        for t, state in enumerate(run_se(family, prof_l, fractions, init, quad, t_max=t_max)):
            for a in range(profile.q):
                traj_rows.append((lam, t, a, state.mu[a], state.sigma2[a]))
        for mode in ("uninformed", "informed"):
            fp = bayes_fixed_point(prior, prof_l, fractions, quad, init_mode=mode, eps=eps)
            for a in range(profile.q):
                fp_rows.append((lam, a, fp.mu[a], mode, int(fp.converged), fp.residual))

    comment = f"# blockamp={__version__} config={canonical_hash(config)} seed={master_seed}\n"
    write_csv(os.path.join(out_dir, "se_trajectory.csv"), comment,
              ["snr", "t", "block", "mu", "sigma2"], traj_rows)
    write_csv(os.path.join(out_dir, "se_fixed_points.csv"), comment,
              ["snr", "block", "mu_star", "init_mode", "converged", "residual"], fp_rows)
    return EXIT_OK


def cmd_spectrum(config, out_dir, master_seed, threads) -> int:
    n, prior, profile, fractions, seeds, _ = parse_common(config)
    snr_grid = parse_snr_grid(config)
    with_spectrum = bool(config.get("with_spectrum", False))
    methods = config.get("methods", ["tilde", "naive"])
    gamma = prior.second_moment
    partition = contiguous_partition(n, fractions)
    tasks = [(lam, s) for lam in snr_grid for s in range(seeds)]

    def worker(index, task):
        lam, _ = task
        seed = task_seed(master_seed, index)
        prof_l = scale_to_snr(profile, fractions, gamma, lam)
        instance = generate(prior, partition, prof_l, seed)
        out = []
        for method in methods:
            probe = bbp_probe if method == "tilde" else naive_pca_probe
            rep = probe(instance, **({"gamma2": gamma} if method == "tilde" else {}),
                        with_spectrum=with_spectrum)
            out.append((lam, seed, method, rep))
        return out

    chunks = run_tasks(tasks, worker, threads)
    comment = f"# blockamp={__version__} config={canonical_hash(config)} seed={master_seed}\n"
    report_rows = []
    for chunk in chunks:
        for lam, seed, method, rep in chunk:
            report_rows.append((lam, seed, rep.top_eigenvalue, rep.second_eigenvalue,
                                rep.top_vector_overlap, rep.bulk_edge_gap, method))
            if rep.full_spectrum is not None:
                name = f"spectrum_{method}_snr{lam}_seed{seed}.csv"
                write_csv(os.path.join(out_dir, name), comment, ["index", "eigenvalue"],
                          list(enumerate(rep.full_spectrum)))
    write_csv(os.path.join(out_dir, "spectrum_report.csv"), comment,
              ["snr", "seed", "top_eig", "second_eig", "overlap", "gap", "method"],
              report_rows)
    return EXIT_OK


def cmd_gen(config, out_dir, master_seed, threads) -> int:
    _ = threads
    n, prior, profile, fractions, _, _ = parse_common(config)
    lam = parse_snr_grid(config)[0]
    gamma = prior.second_moment
    prof_l = scale_to_snr(profile, fractions, gamma, lam)
    partition = contiguous_partition(n, fractions)
    instance = generate(prior, partition, prof_l, task_seed(master_seed, 0))
    dump_instance(instance, os.path.join(out_dir, "instance.bin"))
    export_spike_csv(instance, os.path.join(out_dir, "spike.csv"))
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify: oracle/invariant smoke suite
# ---------------------------------------------------------------------------

def _check_embedding():
    prior = Gaussian(1.0)
    profile = VarianceProfile(np.array([[1.0, 3.0], [3.0, 2.0]]))
    fractions = np.array([0.5, 0.5])
    partition = contiguous_partition(200, fractions)
    instance = generate(prior, partition, profile, seed=7)
    family = BayesOptimal(prior)
    quad = QuadratureSpec()
    init = np.random.default_rng(1).normal(size=200) * 0.5
    schedule = run_se(family, profile, fractions,
                      SeState(mu=np.full(2, 0.1), sigma2=np.full(2, 0.25)), quad, t_max=10)
    expanded = np.sqrt(profile.delta_small[partition.assignment][:, partition.assignment])
    noise = instance.observed / expanded
    traj = matrix_amp_oracle(noise, profile, partition, family, schedule,
                             blockdiag(init, partition), t_max=10)
    state = initial_state(init)
    dev = 0.0
    for t in range(10):
        state = amp_step(instance, family, schedule[t].params(), state)
        dev = max(dev, float(np.max(np.abs(blockproj(traj[t + 1], partition) - state.x_curr))))
    return dev


def _check_nishimori():
    # 201 nodes: the identity is exact, the metric is pure quadrature error,
    # which at the default 61 nodes still sits around 1e-6 for discrete
    # priors at large mu.
    quad = QuadratureSpec(gh_nodes=201)
    worst = 0.0
    for prior in (Gaussian(1.0), Rademacher(), SparseRademacher(0.1)):
        for mu in (0.05, 0.4, 1.3):
            ex_f, e_f2 = channel_moments(prior, mu, mu, quad)
            worst = max(worst, abs(ex_f - e_f2))
    return worst


def _check_snr_closed_form():
    profile = VarianceProfile(np.array([[1.0, 3.0], [3.0, 2.0]]))
    return abs(snr(profile, [0.5, 0.5]) - 7.0 / 12.0)


def _check_gaussian_fixed_points():
    quad = QuadratureSpec()
    worst = 0.0
    for lam in (1.5, 2.0, 3.0):
        profile = VarianceProfile(np.array([[1.0 / lam]]))
        fp = bayes_fixed_point(Gaussian(1.0), profile, [1.0], quad)
        worst = max(worst, abs(float(fp.mu[0]) - (lam - 1.0)))
    return worst


def _check_se_tracking():
    # Desk-scale smoke check of SE-vs-AMP agreement over a short horizon with
    # an informed, noise-independent init; the tolerance is a calibration for
    # N=1000, t<=5, not a theorem constant.
    prior = Gaussian(1.0)
    profile = scale_to_snr(VarianceProfile(np.array([[1.0, 3.0], [3.0, 2.0]])),
                           [0.5, 0.5], 1.0, 2.0)
    partition = contiguous_partition(1000, [0.5, 0.5])
    family = BayesOptimal(prior)
    cfg = AmpConfig(max_iters=6, tol=0.0, init_kind="informed", init_eps=0.5)
    devs = []
    for seed in range(5):
        instance = generate(prior, partition, profile, seed=seed)
        run = run_amp(instance, family, cfg)
        se_mu = np.array([run.se_trajectory[t].mu for t in range(len(run.ts))])
        devs.append(run.iterate_mu - se_mu)
    return float(np.max(np.abs(np.mean(devs, axis=0))))


VERIFY_CHECKS = [
    ("embedding_max_deviation", _check_embedding, 1e-10),
    ("nishimori_identity", _check_nishimori, 1e-8),
    ("snr_closed_form", _check_snr_closed_form, 1e-12),
    ("gaussian_fixed_points", _check_gaussian_fixed_points, 1e-6),
    ("se_amp_tracking_smoke", _check_se_tracking, 0.2),
]


def cmd_verify(config, out_dir, master_seed, threads) -> int:
    _ = threads
    enabled = config.get("checks")
    rows = []
    all_ok = True
    for name, fn, tol in VERIFY_CHECKS:
        if enabled is not None and name not in enabled:
            continue
        metric = fn()
        ok = metric <= tol
        all_ok = all_ok and ok
        rows.append((name, "pass" if ok else "fail", metric, tol))
    comment = f"# blockamp={__version__} config={canonical_hash(config)} seed={master_seed}\n"
    write_csv(os.path.join(out_dir, "verify_report.csv"), comment,
              ["name", "status", "metric", "tolerance"], rows)
    for name, status, metric, tol in rows:
        print(f"{name}: {status} (metric={metric:.3e}, tol={tol:.0e})")
    return EXIT_OK if all_ok else EXIT_VERIFY


COMMANDS = {
    "amp": cmd_amp,
    "se": cmd_se,
    "spectrum": cmd_spectrum,
    "verify": cmd_verify,
    "gen": cmd_gen,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blockamp")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("config_path", nargs="?", help="JSON config file")
    parser.add_argument("--config", dest="config_flag", help="JSON config file (alternative)")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override a config field (dotted path)")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="master seed (overrides config)")
    parser.add_argument("--threads", type=int, default=1)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        path = args.config_path or args.config_flag
        config = {}
        if path is not None:
            with open(path) as fh:
                config = json.load(fh)
            if not isinstance(config, dict):
                raise ConfigError("config root must be a JSON object")
        apply_overrides(config, args.overrides)
        master_seed = args.seed if args.seed is not None else int(config.get("seed", 0))
        if master_seed < 0:
            raise ConfigError("seed must be nonnegative")
        threads = max(1, args.threads)
        os.makedirs(args.out, exist_ok=True)
        return COMMANDS[args.command](config, args.out, master_seed, threads)
    except (ConfigError, ProfileError, FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AmpDivergence as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
