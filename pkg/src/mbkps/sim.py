"""Seeded Monte Carlo validation of the analytical results.

Every trial draws a pair of nodes plus r colluding nodes and asks whether
the pair still shares a key unknown to the whole collusion: some coordinate
where the two key-index IDs agree on a symbol no colluder holds there.  The
predicate is evaluated per authority part and the pair survives if any part
does.

Sampling conventions (they matter at desk scale):

* resampled mode (default): the pair and the colluders are drawn disjointly
  each trial, per-part without replacement, so the estimate corresponds to
  ``AveragedResilience.p_external_pairs``;
* fixed-collusion mode (``colluders=`` given): only the pair is resampled,
  uniformly over all population pairs, matching the all-pairs ratio
  D / C(P, 2) exactly in the limit;
* :func:`exhaustive_secure_fraction` enumerates every population pair for a
  fixed collusion set and must equal the exact count ratio bit for bit.

RNG: numpy PCG64 seeded from the config; trials are drawn in vectorized
batches from a single stream, so identical configs give bit-identical
estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .codes import BlockCode, make_random_linear_code, make_rs_code, messages_from_ranks
from .errors import BadConfigError, PopulationTooSmallError
from .field import make_field
from .kps import Deployment

POP_CODE_SPACE = "code_space"
POP_DEPLOYED = "deployed_nodes"

_BATCH = 1 << 14


@dataclass(frozen=True)
class TrialConfig:
    """Monte Carlo setup: trial count, seed, colluder count, population."""

    trials: int
    seed: int
    r: int = 0
    population: str = POP_CODE_SPACE

    def __post_init__(self):
        if self.trials < 1:
            raise BadConfigError(f"need trials >= 1, got {self.trials}")
        if self.r < 0:
            raise BadConfigError(f"need r >= 0, got {self.r}")
        if self.population not in (POP_CODE_SPACE, POP_DEPLOYED):
            raise BadConfigError(f"unknown population {self.population!r}")


@dataclass(frozen=True)
class EmpiricalEstimate:
    """Success fraction with its binomial standard error."""

    p_hat: float
    stderr: float
    trials: int


def _estimate(successes: int, trials: int) -> EmpiricalEstimate:
    p = successes / trials
    return EmpiricalEstimate(
        p_hat=p, stderr=math.sqrt(p * (1.0 - p) / trials), trials=trials
    )


def _population_size(deployment: Deployment, population: str) -> int:
    if population == POP_DEPLOYED:
        return deployment.N
    if deployment.code is None:
        raise BadConfigError(
            "code-space simulation needs a deployment with its code attached"
        )
    return deployment.q ** deployment.k


def _sample_distinct_rows(rng, population: int, trials: int, count: int) -> np.ndarray:
    """(trials, count) draws in [0, population), distinct within each row."""
    if count > population:
        raise PopulationTooSmallError(
            f"cannot draw {count} distinct items from {population}"
        )
    if count * (count - 1) > population:
        # dense draws: rejection would stall, sample each row exactly
        out = np.empty((trials, count), dtype=np.int64)
        for t in range(trials):
            out[t] = rng.choice(population, size=count, replace=False)
        return out
    draws = rng.integers(0, population, size=(trials, count))
    while True:
        s = np.sort(draws, axis=1)
        bad = (s[:, 1:] == s[:, :-1]).any(axis=1)
        if not bad.any():
            return draws
        draws[bad] = rng.integers(0, population, size=(int(bad.sum()), count))


def _secure_any_part(a_sym, b_sym, coll_sym, M: int, n: int) -> np.ndarray:
    """Survival mask for a batch.

    a_sym, b_sym: (T, M*n) key-index symbols of the pair.
    coll_sym: (T, r, M*n) colluder symbols, or None for r = 0.
    """
    eq = a_sym == b_sym
    if coll_sym is None or coll_sym.shape[1] == 0:
        open_coord = eq
    else:
        covered = (coll_sym == a_sym[:, None, :]).any(axis=1)
        open_coord = eq & ~covered
    t = a_sym.shape[0]
    return open_coord.reshape(t, M, n).any(axis=2).any(axis=1)


def _part_words(deployment: Deployment, rows: np.ndarray) -> np.ndarray:
    """Key-index symbols for node rows, shape rows.shape + (M*n,)."""
    return deployment.key_index_matrix[rows]


def _encode_ranks(code: BlockCode, ranks: np.ndarray) -> np.ndarray:
    """Codewords for message ranks of any shape, appended n axis."""
    flat = ranks.reshape(-1)
    msgs = messages_from_ranks(flat, code.spec.q, code.spec.k)
    words = code.encode_batch(msgs)
    return words.reshape(ranks.shape + (code.spec.n,))


def simulate_resilience(
    deployment: Deployment, cfg: TrialConfig, colluders=None
) -> EmpiricalEstimate:
    """Fraction of sampled pairs surviving r colluders.

    With ``colluders`` (a (r, M*n) array of fixed colluder key-index IDs)
    only the pair is resampled, over all distinct population pairs.
    Otherwise the pair and a fresh collusion set are drawn disjointly each
    trial.  Deterministic given (deployment, cfg).
    """
    pop = _population_size(deployment, cfg.population)
    r = cfg.r if colluders is None else int(np.asarray(colluders).shape[0])
    if colluders is None and r + 2 > pop:
        raise PopulationTooSmallError(
            f"population {pop} cannot host a disjoint pair plus {r} colluders"
        )
    if pop < 2:
        raise PopulationTooSmallError(f"population {pop} has no pairs")
    M, n = deployment.M, deployment.n
    rng = np.random.default_rng(cfg.seed)

    fixed = None
    if colluders is not None:
        fixed = np.asarray(colluders, dtype=np.int64)
        if fixed.ndim != 2 or fixed.shape[1] != M * n:
            raise BadConfigError(
                f"colluders must be (r, {M * n}) key-index IDs, got {fixed.shape}"
            )

    successes = 0
    done = 0
    while done < cfg.trials:
        t = min(_BATCH, cfg.trials - done)
        if fixed is not None:
            rows = _sample_distinct_rows(rng, pop, t, 2)
            if cfg.population == POP_DEPLOYED:
                a = _part_words(deployment, rows[:, 0])
                b = _part_words(deployment, rows[:, 1])
            else:
                a, b = _code_space_pair(deployment, rng, rows)
            coll = np.broadcast_to(fixed, (t,) + fixed.shape)
            mask = _secure_any_part(a, b, coll, M, n)
        elif cfg.population == POP_DEPLOYED:
            rows = _sample_distinct_rows(rng, pop, t, r + 2)
            syms = _part_words(deployment, rows)  # (t, r+2, M*n)
            mask = _secure_any_part(
                syms[:, 0], syms[:, 1], syms[:, 2:], M, n
            )
        else:
            a, b, coll = _code_space_draw(deployment, rng, t, r)
            mask = _secure_any_part(a, b, coll, M, n)
        successes += int(mask.sum())
        done += t
    return _estimate(successes, cfg.trials)


def _code_space_draw(deployment: Deployment, rng, t: int, r: int):
    """Per-part draws of r + 2 distinct codewords, mirroring the
    per-authority-distinct ID rule of real deployments."""
    code = deployment.code
    M, n = deployment.M, deployment.n
    space = deployment.q ** deployment.k
    a = np.empty((t, M * n), dtype=np.int64)
    b = np.empty((t, M * n), dtype=np.int64)
    coll = np.empty((t, r, M * n), dtype=np.int64)
    for m in range(M):
        ranks = _sample_distinct_rows(rng, space, t, r + 2)
        words = _encode_ranks(code, ranks)  # (t, r+2, n)
        sl = slice(m * n, (m + 1) * n)
        a[:, sl] = words[:, 0]
        b[:, sl] = words[:, 1]
        coll[:, :, sl] = words[:, 2:]
    return a, b, coll


def _code_space_pair(deployment: Deployment, rng, rows: np.ndarray):
    """Fixed-collusion mode: a pair of distinct whole nodes.  The first
    authority part uses the sampled distinct ranks; further parts draw
    their own distinct pairs."""
    code = deployment.code
    M, n = deployment.M, deployment.n
    space = deployment.q ** deployment.k
    t = rows.shape[0]
    a = np.empty((t, M * n), dtype=np.int64)
    b = np.empty((t, M * n), dtype=np.int64)
    for m in range(M):
        part_rows = rows if m == 0 else _sample_distinct_rows(rng, space, t, 2)
        words = _encode_ranks(code, part_rows)
        sl = slice(m * n, (m + 1) * n)
        a[:, sl] = words[:, 0]
        b[:, sl] = words[:, 1]
    return a, b


def simulate_sharing(deployment: Deployment, cfg: TrialConfig) -> EmpiricalEstimate:
    """Fraction of sampled distinct pairs sharing at least one key (r = 0)."""
    if cfg.r != 0:
        raise BadConfigError(f"sharing simulation requires r = 0, got {cfg.r}")
    return simulate_resilience(deployment, cfg)


def exhaustive_secure_fraction(
    deployment: Deployment, colluders, population: str = POP_CODE_SPACE
) -> float:
    """Evaluate the simulator's survival predicate over every population
    pair for a fixed collusion set; equals exact-count / C(P, 2).

    Code-space population requires M = 1 (the M > 1 node space is a full
    cross product and is not enumerated).
    """
    M, n = deployment.M, deployment.n
    fixed = np.asarray(colluders, dtype=np.int64)
    if fixed.ndim != 2 or fixed.shape[1] != M * n:
        raise BadConfigError(
            f"colluders must be (r, {M * n}) key-index IDs, got {fixed.shape}"
        )
    if population == POP_DEPLOYED:
        words = deployment.key_index_matrix
    else:
        if M != 1:
            raise BadConfigError("code-space exhaustive mode requires M = 1")
        if deployment.code is None:
            raise BadConfigError("deployment has no code attached")
        words = deployment.code.enumerate_codewords()
    rows = words.shape[0]
    secure = 0
    for i in range(rows - 1):
        a = np.broadcast_to(words[i], (rows - 1 - i, words.shape[1]))
        b = words[i + 1 :]
        coll = np.broadcast_to(fixed, (a.shape[0],) + fixed.shape)
        secure += int(_secure_any_part(a, b, coll, M, n).sum())
    return secure / math.comb(rows, 2)


# -- random-code ensembles --------------------------------------------------------


@dataclass
class EnsembleResult:
    """Per-r ensemble averages with the MDS comparison curve."""

    r_grid: list[int]
    code_ids: list[str]
    per_code: list[list[EmpiricalEstimate]]   # [code][r index]
    ensemble: list[EmpiricalEstimate]         # mean over codes, per r
    mds: list[EmpiricalEstimate] | None
    mds_code_id: str | None


def _mean_estimate(estimates: list[EmpiricalEstimate]) -> EmpiricalEstimate:
    p = float(np.mean([e.p_hat for e in estimates]))
    var = float(np.sum([e.stderr**2 for e in estimates])) / len(estimates) ** 2
    return EmpiricalEstimate(
        p_hat=p, stderr=math.sqrt(var), trials=sum(e.trials for e in estimates)
    )


def ensemble_resilience(
    n: int,
    k: int,
    q: int,
    code_count: int,
    r_grid,
    cfg: TrialConfig,
) -> EnsembleResult:
    """Average simulated resilience of ``code_count`` seeded random linear
    codes with the given parameters, plus the matching RS (MDS) curve when
    n <= q.  Code-space population only; all code and trial seeds derive
    from cfg.seed, so the whole result is reproducible."""
    if cfg.population != POP_CODE_SPACE:
        raise BadConfigError("ensembles are defined over the code space")
    if code_count < 1:
        raise BadConfigError(f"need code_count >= 1, got {code_count}")
    r_grid = [int(r) for r in r_grid]
    field = make_field(q)
    root = np.random.SeedSequence(cfg.seed)
    code_seeds = root.spawn(code_count)
    sim_seeds = iter(root.spawn((code_count + 1) * len(r_grid)))

    def run(dep, r) -> EmpiricalEstimate:
        sub = TrialConfig(
            trials=cfg.trials,
            seed=int(next(sim_seeds).generate_state(1)[0]),
            r=r,
            population=POP_CODE_SPACE,
        )
        return simulate_resilience(dep, sub)

    per_code: list[list[EmpiricalEstimate]] = []
    code_ids: list[str] = []
    for ci in range(code_count):
        code = make_random_linear_code(
            field, n, k, seed=int(code_seeds[ci].generate_state(1)[0])
        )
        code_ids.append(code.code_id)
        dep = code_space_deployment(code)
        per_code.append([run(dep, r) for r in r_grid])
    ensemble = [
        _mean_estimate([per_code[c][ri] for c in range(code_count)])
        for ri in range(len(r_grid))
    ]
    mds = None
    mds_id = None
    if n <= q:
        rs = make_rs_code(field, n, k)
        mds_id = rs.code_id
        dep = code_space_deployment(rs)
        mds = [run(dep, r) for r in r_grid]
    return EnsembleResult(
        r_grid=r_grid,
        code_ids=code_ids,
        per_code=per_code,
        ensemble=ensemble,
        mds=mds,
        mds_code_id=mds_id,
    )


def code_space_deployment(code: BlockCode, M: int = 1) -> Deployment:
    """Minimal deployment shell so code-space simulation has a carrier for
    (code, M); its two registry nodes are never sampled in that mode."""
    from .kps import assign_node_ids

    n_nodes = min(2, code.spec.q ** code.spec.k)
    return assign_node_ids(n_nodes, M, code, seed=0, id_policy="sequential")
