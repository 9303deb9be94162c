"""Monte Carlo validation: determinism, analytic agreement, edge cases."""

import math

import numpy as np
import pytest

from mbkps.codes import make_rs_code
from mbkps.errors import BadConfigError, PopulationTooSmallError
from mbkps.field import make_field
from mbkps.kps import assign_node_ids
from mbkps.resilience import (
    CollusionFreeSets,
    average_resilience,
    brute_force_pair_count_words,
    collusion_free_sets,
    exact_pair_count,
    multi_authority,
    sharing_probability,
)
from mbkps.sim import (
    POP_DEPLOYED,
    EmpiricalEstimate,
    TrialConfig,
    code_space_deployment,
    ensemble_resilience,
    exhaustive_secure_fraction,
    simulate_resilience,
    simulate_sharing,
)


@pytest.fixture(scope="module")
def rs34_dep():
    return code_space_deployment(make_rs_code(make_field(4), 3, 2))


@pytest.fixture(scope="module")
def rs58_dep():
    return code_space_deployment(make_rs_code(make_field(8), 5, 2))


# ---------------------------------------------------------------------------
# configuration and validation
# ---------------------------------------------------------------------------

def test_trial_config_validation():
    with pytest.raises(BadConfigError):
        TrialConfig(trials=0, seed=0)
    with pytest.raises(BadConfigError):
        TrialConfig(trials=10, seed=0, r=-1)
    with pytest.raises(BadConfigError):
        TrialConfig(trials=10, seed=0, population="mesh")


def test_population_too_small(rs34_dep):
    cfg = TrialConfig(trials=10, seed=0, r=15)  # 15 + 2 > 16
    with pytest.raises(PopulationTooSmallError):
        simulate_resilience(rs34_dep, cfg)


def test_sharing_requires_r0(rs34_dep):
    with pytest.raises(BadConfigError):
        simulate_sharing(rs34_dep, TrialConfig(trials=10, seed=0, r=1))


# ---------------------------------------------------------------------------
# determinism
# ---------------------------------------------------------------------------

def test_bit_identical_reruns(rs58_dep):
    cfg = TrialConfig(trials=20000, seed=123, r=3)
    a = simulate_resilience(rs58_dep, cfg)
    b = simulate_resilience(rs58_dep, cfg)
    assert a == b
    c = simulate_resilience(rs58_dep, TrialConfig(trials=20000, seed=124, r=3))
    assert a != c


# ---------------------------------------------------------------------------
# agreement with the exact analysis
# ---------------------------------------------------------------------------

def test_sharing_estimate_matches_exact(rs34_dep):
    cfg = TrialConfig(trials=60000, seed=0, r=0)
    est = simulate_sharing(rs34_dep, cfg)
    assert abs(est.p_hat - 0.6) <= 3 * est.stderr
    assert est.stderr == pytest.approx(
        math.sqrt(est.p_hat * (1 - est.p_hat) / est.trials)
    )


def test_fixed_colluder_matches_all_pairs_ratio(rs34_dep):
    # one fixed colluder holding the all-zero codeword: exact value 54/120
    colluders = np.zeros((1, 3), dtype=np.int64)
    cfg = TrialConfig(trials=120000, seed=5, r=1)
    est = simulate_resilience(rs34_dep, cfg, colluders=colluders)
    assert abs(est.p_hat - 0.45) <= 3 * est.stderr


def test_resampled_mode_matches_external_pair_average(rs58_dep):
    code = rs58_dep.code
    avg = average_resilience(code, 4, sets=1500, seed=2)
    cfg = TrialConfig(trials=120000, seed=3, r=4)
    est = simulate_resilience(rs58_dep, cfg)
    assert abs(est.p_hat - avg.p_external_pairs) <= 3 * est.stderr


def test_multi_authority_boost(rs34_dep):
    code = rs34_dep.code
    p1 = sharing_probability(code)
    dep2 = code_space_deployment(code, M=2)
    est = simulate_resilience(dep2, TrialConfig(trials=80000, seed=7, r=0))
    assert abs(est.p_hat - multi_authority(p1, 2)) <= 3 * est.stderr


def test_sharing_approaches_one_with_many_authorities(rs34_dep):
    dep6 = code_space_deployment(rs34_dep.code, M=6)
    est = simulate_resilience(dep6, TrialConfig(trials=20000, seed=1, r=0))
    assert est.p_hat > 0.98  # 1 - 0.4^6 = 0.9959


# ---------------------------------------------------------------------------
# exhaustive evaluation: simulator predicate == analysis count
# ---------------------------------------------------------------------------

def test_exhaustive_equals_exact_ratio(rs34_dep):
    code = rs34_dep.code
    rng = np.random.default_rng(0)
    for r in (0, 1, 2, 5):
        ranks = rng.choice(16, size=r, replace=False)
        msgs = np.stack([ranks // 4, ranks % 4], axis=1) if r else np.zeros((0, 2), dtype=np.int64)
        colluders = code.encode_batch(msgs.astype(np.int64))
        free = collusion_free_sets(colluders, 3, 4)
        exact = exact_pair_count(code, free) / math.comb(16, 2)
        assert exhaustive_secure_fraction(rs34_dep, colluders) == exact


def test_exhaustive_on_deployed_population():
    code = make_rs_code(make_field(8), 5, 2)
    dep = assign_node_ids(30, 1, code, seed=4)
    colluders = dep.key_index_matrix[:3]
    frac = exhaustive_secure_fraction(dep, colluders, population=POP_DEPLOYED)
    free = collusion_free_sets(colluders, 5, 8)
    brute = brute_force_pair_count_words(dep.key_index_matrix, free)
    assert frac == brute / math.comb(30, 2)


def test_shared_predicate_on_hand_vectors():
    # pair (3,2,0) vs (3,0,1) shares only coordinate 0 (symbol 3):
    # a colluder holding 3 there kills the pair, any other colluder does not
    from mbkps.kps import Deployment

    code = make_rs_code(make_field(4), 3, 2, eval_points=(1, 2, 3))
    a, b = code.encode([1, 2]), code.encode([2, 1])
    words = np.stack([a, b])
    two_node = Deployment(
        code=None, M=1, N=2, n=3, k=2, q=4, q_prime=64, id_ranks=None,
        id_symbols=np.array([[1, 2], [2, 1]]), key_index=words,
    )
    harmless = code.encode([0, 1])[None, :]  # symbol at coord 0 differs from 3
    lethal = code.encode([3, 0])[None, :]    # constant codeword (3, 3, 3)
    for colluders, expected in [(harmless, 1), (lethal, 0)]:
        free = collusion_free_sets(colluders, 3, 4)
        assert brute_force_pair_count_words(words, free) == expected
        sim_frac = exhaustive_secure_fraction(
            two_node, colluders, population=POP_DEPLOYED
        )
        assert sim_frac == float(expected)


def test_exhaustive_consistency_on_larger_codes():
    # fixed collusion set: exhaustive enumeration must equal the exact
    # count ratio with no tolerance at all
    for q, n, k, r in [(8, 5, 2, 3), (32, 12, 2, 4)]:
        code = make_rs_code(make_field(q), n, k)
        dep = code_space_deployment(code)
        rng = np.random.default_rng(17)
        space = q**k
        ranks = rng.choice(space, size=r, replace=False)
        from mbkps.codes import messages_from_ranks

        colluders = code.encode_batch(
            messages_from_ranks(np.asarray(ranks, dtype=np.int64), q, k)
        )
        free = collusion_free_sets(colluders, n, q)
        exact = exact_pair_count(code, free) / math.comb(space, 2)
        assert exhaustive_secure_fraction(dep, colluders) == exact


def test_seed_bank_agreement_rate(rs34_dep):
    # across a fixed bank of 200 seeds, at least 99% of the sampled
    # estimates land within 3 standard errors of the exact value
    code = rs34_dep.code
    exact0 = sharing_probability(code)
    within = 0
    for s in range(200):
        est = simulate_resilience(rs34_dep, TrialConfig(trials=3000, seed=s, r=0))
        if abs(est.p_hat - exact0) <= 3 * est.stderr:
            within += 1
    assert within >= 198

    colluders = code.encode_batch(np.array([[0, 0], [1, 2]]))
    free = collusion_free_sets(colluders, 3, 4)
    exact2 = exact_pair_count(code, free) / math.comb(16, 2)
    within2 = 0
    for s in range(200):
        est = simulate_resilience(
            rs34_dep,
            TrialConfig(trials=3000, seed=1000 + s, r=2),
            colluders=colluders,
        )
        if abs(est.p_hat - exact2) <= 3 * est.stderr:
            within2 += 1
    assert within2 >= 198


# ---------------------------------------------------------------------------
# ensembles
# ---------------------------------------------------------------------------

def test_ensemble_deterministic():
    cfg = TrialConfig(trials=2000, seed=9, r=0)
    a = ensemble_resilience(6, 2, 8, code_count=3, r_grid=[0, 2], cfg=cfg)
    b = ensemble_resilience(6, 2, 8, code_count=3, r_grid=[0, 2], cfg=cfg)
    assert a.code_ids == b.code_ids
    assert a.ensemble == b.ensemble
    assert a.mds == b.mds


def test_ensemble_single_code_reduces_to_plain_simulation():
    cfg = TrialConfig(trials=3000, seed=11, r=0)
    res = ensemble_resilience(6, 2, 8, code_count=1, r_grid=[1], cfg=cfg)
    assert res.ensemble == res.per_code[0]


def test_ensemble_includes_mds_curve():
    cfg = TrialConfig(trials=2000, seed=13, r=0)
    res = ensemble_resilience(6, 2, 8, code_count=2, r_grid=[0, 1], cfg=cfg)
    assert res.mds is not None and res.mds_code_id == "rs-6-2-8"
    assert len(res.mds) == 2


def test_ensemble_rejects_deployed_population():
    cfg = TrialConfig(trials=100, seed=0, r=0, population=POP_DEPLOYED)
    with pytest.raises(BadConfigError):
        ensemble_resilience(6, 2, 8, code_count=1, r_grid=[0], cfg=cfg)


# ---------------------------------------------------------------------------
# deployed-population sampling
# ---------------------------------------------------------------------------

def test_deployed_simulation_runs_and_is_deterministic():
    code = make_rs_code(make_field(8), 5, 2)
    dep = assign_node_ids(40, 2, code, seed=21)
    cfg = TrialConfig(trials=5000, seed=2, r=3, population=POP_DEPLOYED)
    a = simulate_resilience(dep, cfg)
    b = simulate_resilience(dep, cfg)
    assert a == b
    assert 0.0 <= a.p_hat <= 1.0


def test_deployed_matches_exhaustive_for_fixed_set():
    code = make_rs_code(make_field(8), 5, 2)
    dep = assign_node_ids(25, 1, code, seed=3)
    colluders = dep.key_index_matrix[5:8]
    exact = exhaustive_secure_fraction(dep, colluders, population=POP_DEPLOYED)
    cfg = TrialConfig(trials=120000, seed=8, r=3, population=POP_DEPLOYED)
    est = simulate_resilience(dep, cfg, colluders=colluders)
    assert abs(est.p_hat - exact) <= 3 * est.stderr


def test_estimate_is_plain_dataclass():
    e = EmpiricalEstimate(p_hat=0.5, stderr=0.01, trials=100)
    assert e.trials == 100
