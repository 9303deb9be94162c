"""Command-line front end.

Subcommands: assign, discover, analyze, simulate, sweep-r, sweep-storage,
storage.  Every run is driven by one JSON config (--config) whose keys are
mirrored by flags; a flag always wins over the file.  Seeds live in the
config, so identical configs give byte-identical CSV output.

Exit codes: 0 success, 2 config or input validation, 3 resource guard
exceeded, 4 I/O failure.

Probability columns: simulated estimates (and the analytic columns beside
them) are fractions of pairs disjoint from the collusion set, the quantity
the sampler actually measures; the ``analyze`` command reports the
all-pairs ratio as well.  At r = 0 the two coincide.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import codes, kps, resilience, sim
from .errors import GuardError, KPSError
from .field import make_field

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GUARD = 3
EXIT_IO = 4

_POPULATION_FLAGS = {
    "code-space": sim.POP_CODE_SPACE,
    "deployed": sim.POP_DEPLOYED,
    sim.POP_CODE_SPACE: sim.POP_CODE_SPACE,
    sim.POP_DEPLOYED: sim.POP_DEPLOYED,
}


@dataclass
class ExperimentConfig:
    """One experiment description; see README for the JSON schema."""

    kind: str = "mds_rs"
    n: int = 14
    k: int = 2
    q: int = 16
    code_seed: int = 1
    eval_points: list[int] | None = None
    explicit_path: str | None = None
    M: int = 1
    N: int | None = None
    q_prime: int = 64
    r: int = 0
    r_grid: list[int] = dc_field(default_factory=list)
    M_grid: list[int] = dc_field(default_factory=lambda: [1, 2, 3])
    trials: int = 10000
    seed: int = 0
    collusion_sets: int = 100
    population: str = sim.POP_CODE_SPACE
    code_count: int = 50
    variants: list[str] = dc_field(default_factory=lambda: ["mds", "random"])
    id_policy: str = kps.ID_POLICY_RANDOM
    method: str = "exact"
    out: str | None = None
    deployment: str | None = None

    def validate(self) -> None:
        if self.population not in (sim.POP_CODE_SPACE, sim.POP_DEPLOYED):
            raise ValueError(f"unknown population {self.population!r}")
        if self.r_grid and any(
            b <= a for a, b in zip(self.r_grid, self.r_grid[1:])
        ):
            raise ValueError("r_grid must be strictly increasing")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.collusion_sets < 1:
            raise ValueError("collusion_sets must be >= 1")


def load_config(path: str | None, overrides: dict) -> ExperimentConfig:
    data: dict = {}
    if path is not None:
        with open(path) as fh:
            data = json.load(fh)
    cfg = ExperimentConfig()
    known = set(vars(cfg))
    for key, val in data.items():
        if key not in known:
            raise ValueError(f"unknown config key {key!r}")
        setattr(cfg, key, val)
    for key, val in overrides.items():
        if val is not None:
            setattr(cfg, key, val)
    cfg.population = _POPULATION_FLAGS.get(cfg.population, cfg.population)
    cfg.validate()
    return cfg


def build_code(cfg: ExperimentConfig) -> codes.BlockCode:
    if cfg.kind == codes.KIND_MDS_RS:
        return codes.make_rs_code(
            make_field(cfg.q), cfg.n, cfg.k, eval_points=cfg.eval_points
        )
    if cfg.kind == codes.KIND_RANDOM_LINEAR:
        return codes.make_random_linear_code(
            make_field(cfg.q), cfg.n, cfg.k, seed=cfg.code_seed
        )
    if cfg.kind == codes.KIND_EXPLICIT:
        if not cfg.explicit_path:
            raise ValueError("explicit kind requires explicit_path")
        return codes.load_explicit_code(cfg.explicit_path)
    raise ValueError(f"unknown code kind {cfg.kind!r}")


def build_deployment(cfg: ExperimentConfig, code, M=None) -> kps.Deployment:
    m = cfg.M if M is None else M
    n_nodes = cfg.N if cfg.N is not None else min(code.spec.q**code.spec.k, 1000)
    return kps.assign_node_ids(
        n_nodes, m, code, seed=cfg.seed, q_prime=cfg.q_prime,
        id_policy=cfg.id_policy,
    )


class _Out:
    """stdout or a file, chosen by config; newline-stable."""

    def __init__(self, path: str | None):
        self.path = path
        self.lines: list[str] = []

    def write(self, line: str) -> None:
        self.lines.append(line)

    def flush(self) -> None:
        text = "\n".join(self.lines) + ("\n" if self.lines else "")
        if self.path is None:
            sys.stdout.write(text)
        else:
            with open(self.path, "w") as fh:
                fh.write(text)


def _fmt(x: float) -> str:
    return repr(float(x))


# -- commands ------------------------------------------------------------------


def cmd_storage(cfg: ExperimentConfig, out: _Out) -> None:
    bits = kps.storage_bits(cfg.M, cfg.n, cfg.q, cfg.q_prime)
    out.write(f"{bits}")


def cmd_assign(cfg: ExperimentConfig, out: _Out) -> None:
    code = build_code(cfg)
    dep = build_deployment(cfg, code)
    if cfg.deployment is None:
        raise ValueError("assign requires a deployment output path")
    dep.save(cfg.deployment)
    bits = kps.storage_bits(dep.M, dep.n, dep.q, dep.q_prime)
    out.write(f"deployment: {cfg.deployment}")
    out.write(f"nodes: {dep.N}  authorities: {dep.M}  code: {code.code_id}")
    out.write(f"storage_bits_per_node: {bits}")


def cmd_discover(cfg: ExperimentConfig, node_a: int, node_b: int, out: _Out) -> None:
    if cfg.deployment is None:
        raise ValueError("discover requires a deployment file")
    dep = kps.load_deployment(cfg.deployment)
    common = kps.discover_common(
        dep.key_index_of(node_a), dep.key_index_of(node_b)
    )
    out.write(" ".join(str(x) for x in sorted(common)))
    out.write(f"count: {len(common)}")


def _single_report(cfg: ExperimentConfig, code) -> resilience.ResilienceReport:
    n, q, k = code.spec.n, code.spec.q, code.spec.k
    if cfg.method == "mds-average":
        d = resilience.mds_average_pair_count(n, k, q, cfg.r)
        p = d / math.comb(q**k, 2)
        return resilience.ResilienceReport(
            r=cfg.r, D=d, p_re=p,
            p_re_multi=resilience.multi_authority(p, cfg.M),
            method=resilience.METHOD_MDS_AVERAGE,
        )
    rng = np.random.default_rng(cfg.seed)
    space = q**k
    ranks = rng.choice(space, size=cfg.r, replace=False) if cfg.r else []
    msgs = codes.messages_from_ranks(np.asarray(ranks, dtype=np.int64), q, k)
    free = resilience.collusion_free_sets(code.encode_batch(msgs), n, q)
    if cfg.method == "brute-force":
        d = resilience.brute_force_pair_count(code, free)
        method = resilience.METHOD_BRUTE
    else:
        d = resilience.exact_pair_count(code, free)
        method = resilience.METHOD_EXACT
    p = resilience.resilience_probability(d, q, k)
    return resilience.ResilienceReport(
        r=cfg.r, D=d, p_re=p,
        p_re_multi=resilience.multi_authority(p, cfg.M),
        method=method,
    )


def cmd_analyze(cfg: ExperimentConfig, out: _Out) -> None:
    code = build_code(cfg)
    report = _single_report(cfg, code)
    out.write(resilience.ResilienceReport.CSV_HEADER)
    out.write(report.csv_row())


def cmd_simulate(cfg: ExperimentConfig, out: _Out) -> None:
    code = build_code(cfg)
    if cfg.population == sim.POP_DEPLOYED:
        dep = build_deployment(cfg, code)
    else:
        dep = sim.code_space_deployment(code, M=cfg.M)
    tc = sim.TrialConfig(
        trials=cfg.trials, seed=cfg.seed, r=cfg.r, population=cfg.population
    )
    est = sim.simulate_resilience(dep, tc)
    out.write("r,p_hat,stderr,trials,method,code_id,M")
    out.write(
        f"{cfg.r},{_fmt(est.p_hat)},{_fmt(est.stderr)},{est.trials},"
        f"simulated,{code.code_id},{cfg.M}"
    )


def cmd_sweep_r(cfg: ExperimentConfig, out: _Out) -> None:
    """One row per (code variant, r): averaged exact value, the MDS
    closed-form average where applicable, and a simulated estimate."""
    out.write("code_id,kind,r,p_exact,p_mds_avg,p_sim,stderr")
    if not cfg.r_grid:
        return
    field = make_field(cfg.q)
    variants: list[codes.BlockCode] = []
    if "mds" in cfg.variants:
        variants.append(codes.make_rs_code(field, cfg.n, cfg.k))
    if "random" in cfg.variants:
        root = np.random.SeedSequence(cfg.code_seed)
        for child in root.spawn(cfg.code_count):
            variants.append(
                codes.make_random_linear_code(
                    field, cfg.n, cfg.k, seed=int(child.generate_state(1)[0])
                )
            )
    space = cfg.q**cfg.k
    for code in variants:
        dep = sim.code_space_deployment(code)
        sim_seeds = iter(
            np.random.SeedSequence(cfg.seed).spawn(len(cfg.r_grid))
        )
        for r in cfg.r_grid:
            avg = resilience.average_resilience(
                code, r, sets=cfg.collusion_sets, seed=cfg.seed
            )
            tc = sim.TrialConfig(
                trials=cfg.trials,
                seed=int(next(sim_seeds).generate_state(1)[0]),
                r=r,
            )
            est = sim.simulate_resilience(dep, tc)
            if code.spec.kind == codes.KIND_MDS_RS:
                d_avg = resilience.mds_average_pair_count(cfg.n, cfg.k, cfg.q, r)
                mds_col = _fmt(d_avg / math.comb(space - r, 2))
            else:
                mds_col = ""
            out.write(
                f"{code.code_id},{code.spec.kind},{r},"
                f"{_fmt(avg.p_external_pairs)},{mds_col},"
                f"{_fmt(est.p_hat)},{_fmt(est.stderr)}"
            )


def cmd_sweep_storage(cfg: ExperimentConfig, out: _Out) -> None:
    """One row per (M, r): storage bits, the multi-authority analytic value
    from per-part averaged exact resilience, and a simulated estimate."""
    out.write("code_id,M,S_bits,r,p_analytic,p_sim,stderr")
    if not cfg.r_grid:
        return
    code = build_code(cfg)
    for m_idx, m in enumerate(cfg.M_grid):
        bits = kps.storage_bits(m, cfg.n, cfg.q, cfg.q_prime)
        if cfg.population == sim.POP_DEPLOYED:
            dep = build_deployment(cfg, code, M=m)
        else:
            dep = sim.code_space_deployment(code, M=m)
        sim_seeds = iter(
            np.random.SeedSequence(cfg.seed + m_idx).spawn(len(cfg.r_grid))
        )
        for r in cfg.r_grid:
            if cfg.population == sim.POP_DEPLOYED:
                parts = []
                for part in range(m):
                    avg = resilience.average_resilience_words(
                        dep.part_symbols(part), code.spec.d_min, cfg.q,
                        r, sets=cfg.collusion_sets, seed=cfg.seed + part,
                    )
                    parts.append(avg.p_external_pairs)
                p_analytic = resilience.combine_parts(parts)
            else:
                avg = resilience.average_resilience(
                    code, r, sets=cfg.collusion_sets, seed=cfg.seed
                )
                p_analytic = resilience.multi_authority(
                    avg.p_external_pairs, m
                )
            tc = sim.TrialConfig(
                trials=cfg.trials,
                seed=int(next(sim_seeds).generate_state(1)[0]),
                r=r,
                population=cfg.population,
            )
            est = sim.simulate_resilience(dep, tc)
            out.write(
                f"{code.code_id},{m},{bits},{r},{_fmt(p_analytic)},"
                f"{_fmt(est.p_hat)},{_fmt(est.stderr)}"
            )


# -- entry point -------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument(
        "--population", choices=["code-space", "deployed"],
        help="pair/colluder population",
    )
    p.add_argument("--trials", type=int, help="Monte Carlo trials")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--kind", choices=["mds_rs", "random_linear", "explicit"])
    p.add_argument("--M", type=int, dest="M")
    p.add_argument("--N", type=int, dest="N")
    p.add_argument("--q-prime", type=int, dest="q_prime")
    p.add_argument("--r", type=int)
    p.add_argument("--deployment", help="deployment file path")
    p.add_argument("--method", choices=["exact", "brute-force", "mds-average"])


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="mbkps",
        description="Block-code key pre-distribution: assignment, discovery, "
        "and resilience evaluation",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name in (
        "assign", "analyze", "simulate", "sweep-r", "sweep-storage", "storage"
    ):
        _add_common(sub.add_parser(name))
    disc = sub.add_parser("discover")
    _add_common(disc)
    disc.add_argument("node_a", type=int)
    disc.add_argument("node_b", type=int)
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    overrides = {
        key: getattr(args, key, None)
        for key in (
            "seed", "out", "trials", "n", "k", "q", "kind", "M", "N",
            "q_prime", "r", "deployment", "method",
        )
    }
    if getattr(args, "population", None):
        overrides["population"] = _POPULATION_FLAGS[args.population]
    try:
        cfg = load_config(args.config, overrides)
        out = _Out(cfg.out)
        if args.command == "storage":
            cmd_storage(cfg, out)
        elif args.command == "assign":
            cmd_assign(cfg, out)
        elif args.command == "discover":
            cmd_discover(cfg, args.node_a, args.node_b, out)
        elif args.command == "analyze":
            cmd_analyze(cfg, out)
        elif args.command == "simulate":
            cmd_simulate(cfg, out)
        elif args.command == "sweep-r":
            cmd_sweep_r(cfg, out)
        elif args.command == "sweep-storage":
            cmd_sweep_storage(cfg, out)
        out.flush()
    except GuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (KPSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
