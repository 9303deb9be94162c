"""Collusion-resilience analysis.

A pair of nodes survives r colluders if the two key-index IDs agree at some
coordinate on a symbol held by no colluder there (a collusion-free symbol).
``exact_pair_count`` counts the surviving unordered pairs over the whole
code space by inclusion-exclusion over coordinate subsets: for a subset S
the pairs agreeing on a collusion-free tuple across all of S number

    V_S = sum over achievable tuples t in prod(U_i) of C(H(S, t), 2)

where H(S, t) is the matching-codeword count and U_i the collusion-free
symbol set at coordinate i.  Any two distinct codewords agree in at most
n - d_min coordinates, so subsets larger than that contribute nothing and
the alternating sum truncates there.

``brute_force_pair_count`` is the independent oracle: a literal scan of all
codeword pairs.  The two must agree exactly, and the test suite holds them
to that.

For MDS codes the per-coordinate symbol distribution is uniform, which
gives the closed-form average ``mds_average_pair_count`` built on the
expected collusion-free symbol count u = q(1 - 1/q)^r.  That average treats
colluder symbols as independent across colluders, so it is approximate for
collusion sets drawn without replacement; ``average_resilience`` measures
the actual mean.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .codes import BlockCode, messages_from_ranks
from .errors import BadLengthError, GuardExceededError

# Ceiling on the number of coordinate subsets the inclusion-exclusion sum
# may visit; callers can override per call.
SUBSET_GUARD = 1 << 20
# Ceiling on codeword count for the quadratic brute-force oracle.
BRUTE_FORCE_GUARD = 1 << 12

METHOD_EXACT = "exact_ie"
METHOD_BRUTE = "brute_force"
METHOD_MDS_AVERAGE = "mds_average"


class CollusionFreeSets:
    """Per-coordinate sets of symbols held by no colluder (one code part).

    Stored as an (n, q) boolean mask: ``free[i, s]`` is True when symbol s
    survives at coordinate i.
    """

    def __init__(self, free: np.ndarray):
        free = np.asarray(free, dtype=bool)
        if free.ndim != 2:
            raise ValueError("free mask must be 2-D (n, q)")
        self.free = free
        self.n, self.q = free.shape

    @classmethod
    def full(cls, n: int, q: int) -> "CollusionFreeSets":
        """No colluders: every symbol is free at every coordinate."""
        return cls(np.ones((n, q), dtype=bool))

    @classmethod
    def from_colluders(cls, colluder_parts, n: int, q: int) -> "CollusionFreeSets":
        return collusion_free_sets(colluder_parts, n, q)

    def sets(self) -> list[set[int]]:
        """The per-coordinate sets as plain Python sets."""
        return [set(np.flatnonzero(self.free[i]).tolist()) for i in range(self.n)]

    def sizes(self) -> np.ndarray:
        return self.free.sum(axis=1)

    def intersect(self, other: "CollusionFreeSets") -> "CollusionFreeSets":
        return CollusionFreeSets(self.free & other.free)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CollusionFreeSets)
            and self.free.shape == other.free.shape
            and bool((self.free == other.free).all())
        )


def collusion_free_sets(colluder_parts, n: int, q: int) -> CollusionFreeSets:
    """Symbols not held by any colluder, per coordinate of one code part."""
    free = np.ones((n, q), dtype=bool)
    for part in colluder_parts:
        arr = np.asarray(part, dtype=np.int64)
        if arr.shape != (n,):
            raise BadLengthError(
                f"colluder part must have {n} symbols, got shape {arr.shape}"
            )
        if arr.size and (arr.min() < 0 or arr.max() >= q):
            raise ValueError(f"colluder symbol outside [0, {q})")
        free[np.arange(n), arr] = False
    return CollusionFreeSets(free)


# -- exact inclusion-exclusion count -------------------------------------------


def exact_pair_count(
    code: BlockCode,
    free: CollusionFreeSets,
    max_subset_size: int | None = None,
    subset_guard: int = SUBSET_GUARD,
) -> int:
    """Exact number of unordered codeword pairs sharing at least one
    collusion-free symbol, by inclusion-exclusion over coordinate subsets.

    ``max_subset_size`` defaults to n - d_min, past which every term is
    zero; passing a larger value changes nothing and is allowed so tests can
    check that truncation is sound.
    """
    n, q = code.spec.n, code.spec.q
    if free.n != n or free.q != q:
        raise BadLengthError(
            f"free-set shape ({free.n}, {free.q}) does not match code ({n}, {q})"
        )
    j_max = n - code.spec.d_min if max_subset_size is None else max_subset_size
    j_max = min(j_max, n)
    if j_max < 1:
        return 0
    total_subsets = sum(math.comb(n, j) for j in range(1, j_max + 1))
    if total_subsets > subset_guard:
        raise GuardExceededError(
            f"{total_subsets} coordinate subsets exceed guard {subset_guard}"
        )
    if code.is_linear:
        return _exact_ie_linear(code, free, j_max)
    return _exact_ie_table(code.table, free, j_max)


def _exact_ie_linear(code: BlockCode, free: CollusionFreeSets, j_max: int) -> int:
    n, q, k = code.spec.n, code.spec.q, code.spec.k
    total = 0
    for j in range(1, j_max + 1):
        sign = 1 if j % 2 == 1 else -1
        layer = 0
        for subset in itertools.combinations(range(n), j):
            rank, image = code.subset_image(subset)
            # tuples achievable by the code that are free at every coordinate
            ok = free.free[np.asarray(subset), :]  # j x q
            hits = int(ok[np.arange(j)[None, :], image].all(axis=1).sum())
            if hits:
                layer += hits * math.comb(q ** (k - rank), 2)
        total += sign * layer
    return total


def _exact_ie_table(words: np.ndarray, free: CollusionFreeSets, j_max: int) -> int:
    n = words.shape[1]
    total = 0
    for j in range(1, j_max + 1):
        sign = 1 if j % 2 == 1 else -1
        layer = 0
        for subset in itertools.combinations(range(n), j):
            proj = words[:, list(subset)]
            uniq, counts = np.unique(proj, axis=0, return_counts=True)
            multi = counts >= 2
            if not multi.any():
                continue
            uniq, counts = uniq[multi], counts[multi]
            ok = free.free[np.asarray(subset), :]
            keep = ok[np.arange(j)[None, :], uniq].all(axis=1)
            layer += int(sum(math.comb(int(c), 2) for c in counts[keep]))
        total += sign * layer
    return total


def exact_pair_count_words(
    words: np.ndarray,
    free: CollusionFreeSets,
    d_min: int,
    subset_guard: int = SUBSET_GUARD,
) -> int:
    """Inclusion-exclusion count over an explicit word population (for
    deployed-network analysis).  ``d_min`` of the parent code still bounds
    how many coordinates two distinct words can share, so the same
    truncation applies.
    """
    words = np.asarray(words, dtype=np.int64)
    n = words.shape[1]
    if free.n != n:
        raise BadLengthError("free-set length does not match word length")
    j_max = min(n - d_min, n)
    if j_max < 1:
        return 0
    total_subsets = sum(math.comb(n, j) for j in range(1, j_max + 1))
    if total_subsets > subset_guard:
        raise GuardExceededError(
            f"{total_subsets} coordinate subsets exceed guard {subset_guard}"
        )
    return _exact_ie_table(words, free, j_max)


# -- brute-force oracle ------------------------------------------------------------


def brute_force_pair_count(code: BlockCode, free: CollusionFreeSets) -> int:
    """Independent oracle: scan all codeword pairs for a shared
    collusion-free symbol.  Quadratic; guarded at 2^12 codewords.
    """
    count = code.num_codewords
    if count > BRUTE_FORCE_GUARD:
        raise GuardExceededError(
            f"{count} codewords exceed brute-force guard {BRUTE_FORCE_GUARD}"
        )
    return brute_force_pair_count_words(code.enumerate_codewords(), free)


def brute_force_pair_count_words(words: np.ndarray, free: CollusionFreeSets) -> int:
    """Pairwise scan over an explicit word population."""
    words = np.asarray(words, dtype=np.int64)
    rows, n = words.shape
    if rows > BRUTE_FORCE_GUARD:
        raise GuardExceededError(
            f"{rows} words exceed brute-force guard {BRUTE_FORCE_GUARD}"
        )
    if free.n != n:
        raise BadLengthError("free-set length does not match word length")
    secure = np.zeros((rows, rows), dtype=bool)
    for i in range(n):
        col = words[:, i]
        ok = free.free[i, col]
        pair_ok = ok[:, None] & ok[None, :]
        secure |= (col[:, None] == col[None, :]) & pair_ok
    iu = np.triu_indices(rows, k=1)
    return int(secure[iu].sum())


# -- probabilities -----------------------------------------------------------------


def resilience_probability(D: int | float, q: int, k: int) -> float:
    """Surviving-pair count over all C(q^k, 2) codeword pairs."""
    total = math.comb(q**k, 2)
    if D > total:
        raise ValueError(f"D = {D} exceeds total pair count {total}")
    return D / total


def multi_authority(p: float, M: int) -> float:
    """Resilience (or sharing) boost from M independent authorities:
    1 - (1 - p)^M.  M = 1 returns p unchanged."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p} outside [0, 1]")
    if M < 1:
        raise ValueError(f"need M >= 1, got {M}")
    if M == 1:
        return float(p)
    return 1.0 - (1.0 - p) ** M


def combine_parts(probs) -> float:
    """Multi-authority combination for per-part probabilities that differ:
    1 - prod(1 - p_m)."""
    out = 1.0
    for p in probs:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"probability {p} outside [0, 1]")
        out *= 1.0 - p
    return 1.0 - out


def expected_free_symbols(q: int, r: int) -> float:
    """Expected collusion-free symbols per coordinate, q(1 - 1/q)^r, under
    uniform independent colluder symbols."""
    if q < 2:
        raise ValueError(f"need q >= 2, got {q}")
    if r < 0:
        raise ValueError(f"need r >= 0, got {r}")
    return q * (1.0 - 1.0 / q) ** r


def mds_average_pair_count(n: int, k: int, q: int, r: int) -> float:
    """Closed-form average surviving-pair count for an MDS code.

    Substitutes u = q(1 - 1/q)^r for each per-coordinate free-set size in
    the inclusion-exclusion sum; with matching counts q^(k-j) at any j < k
    coordinates the layers collapse to

        sum_{j=1}^{k-1} (-1)^(j-1) u^j C(n, j) C(q^(k-j), 2).
    """
    if k < 2:
        raise ValueError(f"need k >= 2, got {k}")
    u = expected_free_symbols(q, r)
    total = 0.0
    for j in range(1, k):
        sign = 1.0 if j % 2 == 1 else -1.0
        total += sign * (u**j) * math.comb(n, j) * math.comb(q ** (k - j), 2)
    return total


def sharing_probability(code: BlockCode) -> float:
    """Probability a random codeword pair shares at least one symbol
    position: the zero-colluder resilience."""
    free = CollusionFreeSets.full(code.spec.n, code.spec.q)
    d = exact_pair_count(code, free)
    return resilience_probability(d, code.spec.q, code.spec.k)


# -- reports and averages ---------------------------------------------------------


@dataclass
class ResilienceReport:
    """One analysis result row.

    ``p_re`` divides by all pairs of the population; ``p_re_multi`` applies
    the M-authority boost.  ``stderr`` is set only for sampled estimates.
    """

    r: int
    D: int | float
    p_re: float
    p_re_multi: float
    method: str
    stderr: float | None = None

    CSV_HEADER = "r,D,P_re,P_re_M,method,stderr"

    def csv_row(self) -> str:
        err = "" if self.stderr is None else repr(float(self.stderr))
        return (
            f"{self.r},{self.D},{self.p_re!r},{self.p_re_multi!r},"
            f"{self.method},{err}"
        )


@dataclass
class AveragedResilience:
    """Mean exact resilience over seeded random collusion sets.

    Two normalizations of the same mean count are kept:

    * ``p_all_pairs`` divides by C(P, 2), every pair of the population
      (pairs overlapping the colluders never survive, so they drag the
      ratio down);
    * ``p_external_pairs`` divides by C(P - r, 2), only pairs disjoint
      from the collusion set, which is what a sampler that draws the pair
      and the colluders disjointly estimates.
    """

    r: int
    sets: int
    population: int
    mean_pair_count: float
    p_all_pairs: float
    p_external_pairs: float


def _averaged(r, sets, population, counts) -> AveragedResilience:
    mean_d = float(np.mean(counts))
    all_pairs = math.comb(population, 2)
    ext_pairs = math.comb(population - r, 2)
    return AveragedResilience(
        r=r,
        sets=sets,
        population=population,
        mean_pair_count=mean_d,
        p_all_pairs=mean_d / all_pairs,
        p_external_pairs=mean_d / ext_pairs if ext_pairs else 0.0,
    )


def average_resilience(
    code: BlockCode, r: int, sets: int, seed: int
) -> AveragedResilience:
    """Mean of the exact count over ``sets`` collusion sets of r distinct
    codewords drawn uniformly without replacement from the code space."""
    n, q, k = code.spec.n, code.spec.q, code.spec.k
    space = q**k
    if r + 2 > space:
        raise ValueError(f"r = {r} leaves no pair in a space of {space}")
    if r == 0:
        d = exact_pair_count(code, CollusionFreeSets.full(n, q))
        return _averaged(0, 1, space, [d])
    rng = np.random.default_rng(seed)
    counts = []
    for _ in range(sets):
        ranks = rng.choice(space, size=r, replace=False)
        msgs = messages_from_ranks(np.asarray(ranks, dtype=np.int64), q, k)
        parts = code.encode_batch(msgs)
        free = collusion_free_sets(parts, n, q)
        counts.append(exact_pair_count(code, free))
    return _averaged(r, sets, space, counts)


def average_resilience_words(
    words: np.ndarray, d_min: int, q: int, r: int, sets: int, seed: int
) -> AveragedResilience:
    """Deployed-population variant: colluders are drawn from the given word
    table (one authority part of a deployment) and pairs are counted over
    that same table."""
    words = np.asarray(words, dtype=np.int64)
    rows, n = words.shape
    if r + 2 > rows:
        raise ValueError(f"r = {r} leaves no pair among {rows} words")
    if r == 0:
        d = exact_pair_count_words(words, CollusionFreeSets.full(n, q), d_min)
        return _averaged(0, 1, rows, [d])
    rng = np.random.default_rng(seed)
    counts = []
    for _ in range(sets):
        idx = rng.choice(rows, size=r, replace=False)
        free = collusion_free_sets(words[idx], n, q)
        counts.append(exact_pair_count_words(words, free, d_min))
    return _averaged(r, sets, rows, counts)
