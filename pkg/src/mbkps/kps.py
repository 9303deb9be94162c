"""Key pre-distribution from block-code codewords.

Each of M authorities gives every node a k-symbol ID, encodes it with the
shared C(n, k)-q code, and the M concatenated codewords form the node's
key-index ID of length M*n.  Symbol value a at coordinate i selects key
number ``a*M*n + i`` from a global pool of M*n*q keys, so every node holds
exactly M*n distinct keys and two nodes share a key exactly where their
key-index IDs agree.  Authority m owns the pool slice whose coordinate
falls in [m*n, (m+1)*n).

Keys here are placeholder pseudo-random integers in [0, q'); the analysis
depends only on indices, never on key values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codes import BlockCode, messages_from_ranks
from .errors import (
    BadLengthError,
    LengthMismatchError,
    PoolTooLargeError,
    TooManyNodesError,
    UnknownNodeError,
)

POOL_GUARD = 1 << 24

ID_POLICY_RANDOM = "random"
ID_POLICY_SEQUENTIAL = "sequential"


@dataclass(frozen=True)
class NodeRecord:
    """One node's identity: per-authority ID parts, key-index ID, key refs."""

    node_index: int
    id_parts: tuple[tuple[int, ...], ...]  # M parts of k symbols
    key_index: tuple[int, ...]             # M*n symbols
    key_refs: frozenset[int]


class Deployment:
    """An assigned network: N nodes keyed by M authorities over one code.

    Construction goes through :func:`assign_node_ids`; deployments loaded
    from a file carry ``code=None`` (the file stores IDs and key-index
    symbols only) and support discovery and simulation but not re-encoding.
    """

    def __init__(
        self,
        code: BlockCode | None,
        M: int,
        N: int,
        n: int,
        k: int,
        q: int,
        q_prime: int,
        id_ranks: np.ndarray | None,
        id_symbols: np.ndarray,
        key_index: np.ndarray,
    ):
        self.code = code
        self.M = M
        self.N = N
        self.n = n
        self.k = k
        self.q = q
        self.q_prime = q_prime
        self._id_ranks = id_ranks          # (M, N) or None for loaded files
        self._id_symbols = id_symbols      # (N, M*k)
        self._key_index = key_index        # (N, M*n)
        for m in range(M):
            part = key_index[:, m * n : (m + 1) * n]
            if np.unique(part, axis=0).shape[0] != N:
                raise ValueError(
                    f"authority {m} assigned duplicate IDs; codewords collide"
                )

    # -- registry ---------------------------------------------------------

    def key_index_of(self, node_index: int) -> np.ndarray:
        if not 0 <= node_index < self.N:
            raise UnknownNodeError(f"node {node_index} not in [0, {self.N})")
        return self._key_index[node_index].copy()

    def record(self, node_index: int) -> NodeRecord:
        if not 0 <= node_index < self.N:
            raise UnknownNodeError(f"node {node_index} not in [0, {self.N})")
        ids = self._id_symbols[node_index]
        ki = self._key_index[node_index]
        parts = tuple(
            tuple(int(x) for x in ids[m * self.k : (m + 1) * self.k])
            for m in range(self.M)
        )
        return NodeRecord(
            node_index=node_index,
            id_parts=parts,
            key_index=tuple(int(x) for x in ki),
            key_refs=frozenset(key_refs(ki, self.M, self.n)),
        )

    def records(self):
        for i in range(self.N):
            yield self.record(i)

    @property
    def key_index_matrix(self) -> np.ndarray:
        """(N, M*n) view of all key-index IDs (do not mutate)."""
        return self._key_index

    def part_symbols(self, m: int) -> np.ndarray:
        """(N, n) key-index symbols contributed by authority m."""
        if not 0 <= m < self.M:
            raise ValueError(f"authority {m} not in [0, {self.M})")
        return self._key_index[:, m * self.n : (m + 1) * self.n]

    # -- persistence ---------------------------------------------------------

    def save(self, path) -> None:
        """Line-based text export; byte-stable and round-trippable."""
        lines = [
            f"{self.N} {self.M} {self.n} {self.k} {self.q} {self.q_prime}"
        ]
        for i in range(self.N):
            fields = [str(i)]
            fields += [str(int(x)) for x in self._id_symbols[i]]
            fields += [str(int(x)) for x in self._key_index[i]]
            lines.append(" ".join(fields))
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def load_deployment(path) -> Deployment:
    """Read a deployment export; the code itself is not stored (code=None)."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 6:
            raise ValueError(f"bad deployment header in {path}")
        N, M, n, k, q, q_prime = (int(x) for x in header)
        id_symbols = np.zeros((N, M * k), dtype=np.int64)
        key_index = np.zeros((N, M * n), dtype=np.int64)
        seen = 0
        for line in fh:
            if not line.strip():
                continue
            vals = [int(x) for x in line.split()]
            if len(vals) != 1 + M * k + M * n:
                raise ValueError(f"bad node line in {path}")
            idx = vals[0]
            if not 0 <= idx < N:
                raise ValueError(f"node index {idx} outside [0, {N})")
            id_symbols[idx] = vals[1 : 1 + M * k]
            key_index[idx] = vals[1 + M * k :]
            seen += 1
    if seen != N:
        raise ValueError(f"expected {N} node lines, found {seen}")
    return Deployment(
        code=None, M=M, N=N, n=n, k=k, q=q, q_prime=q_prime,
        id_ranks=None, id_symbols=id_symbols, key_index=key_index,
    )


def assign_node_ids(
    N: int,
    M: int,
    code: BlockCode,
    seed: int,
    q_prime: int = 64,
    id_policy: str = ID_POLICY_RANDOM,
) -> Deployment:
    """Assign IDs and derive key-index IDs for N nodes under M authorities.

    Each authority independently draws N distinct k-symbol IDs, uniformly
    without replacement, from an authority-specific substream of ``seed``.
    The ``sequential`` policy instead gives node j the j-th message of every
    authority, which is handy for exhaustive desk tests.
    """
    spec = code.spec
    id_space = spec.q ** spec.k
    if N > id_space:
        raise TooManyNodesError(f"{N} nodes exceed ID space q^k = {id_space}")
    if M < 1:
        raise ValueError(f"need at least one authority, got M={M}")
    ranks = np.empty((M, N), dtype=np.int64)
    if id_policy == ID_POLICY_SEQUENTIAL:
        ranks[:] = np.arange(N, dtype=np.int64)
    elif id_policy == ID_POLICY_RANDOM:
        for m, child in enumerate(np.random.SeedSequence(seed).spawn(M)):
            ranks[m] = _sample_distinct_ranks(np.random.default_rng(child), id_space, N)
    else:
        raise ValueError(f"unknown id_policy {id_policy!r}")

    id_symbols = np.empty((N, M * spec.k), dtype=np.int64)
    key_index = np.empty((N, M * spec.n), dtype=np.int64)
    for m in range(M):
        msgs = messages_from_ranks(ranks[m], spec.q, spec.k)
        id_symbols[:, m * spec.k : (m + 1) * spec.k] = msgs
        key_index[:, m * spec.n : (m + 1) * spec.n] = code.encode_batch(msgs)
    return Deployment(
        code=code, M=M, N=N, n=spec.n, k=spec.k, q=spec.q, q_prime=q_prime,
        id_ranks=ranks, id_symbols=id_symbols, key_index=key_index,
    )


def _sample_distinct_ranks(rng, space: int, count: int) -> np.ndarray:
    if space <= 1 << 22:
        return rng.choice(space, size=count, replace=False).astype(np.int64)
    # large ID space: rejection on a set
    picked: set[int] = set()
    out = np.empty(count, dtype=np.int64)
    filled = 0
    while filled < count:
        for v in rng.integers(0, space, size=count - filled):
            v = int(v)
            if v not in picked:
                picked.add(v)
                out[filled] = v
                filled += 1
    return out


def derive_key_index(id_parts, code: BlockCode) -> np.ndarray:
    """Concatenate the codewords of the M ID parts into one M*n vector."""
    parts = [np.asarray(p, dtype=np.int64) for p in id_parts]
    for p in parts:
        if p.shape != (code.spec.k,):
            raise BadLengthError(
                f"each ID part needs {code.spec.k} symbols, got shape {p.shape}"
            )
    return np.concatenate([code.encode(p) for p in parts])


def key_refs(key_index, M: int, n: int) -> set[int]:
    """Key references of a key-index ID: symbol a at coordinate i selects
    key a*M*n + i.  Always M*n distinct values, since i recovers (a, i).
    """
    ki = np.asarray(key_index, dtype=np.int64)
    total = M * n
    if ki.shape != (total,):
        raise BadLengthError(f"key-index length {ki.shape} != M*n = {total}")
    return {int(a) * total + i for i, a in enumerate(ki)}


def discover_common(a, b) -> set[int]:
    """Key refs shared by two nodes: positions where the key-index IDs agree.

    Symmetric, and equal to the intersection of the two nodes' key refs.
    """
    av = np.asarray(a, dtype=np.int64)
    bv = np.asarray(b, dtype=np.int64)
    if av.shape != bv.shape or av.ndim != 1:
        raise LengthMismatchError(
            f"key-index IDs differ in shape: {av.shape} vs {bv.shape}"
        )
    total = av.shape[0]
    agree = np.flatnonzero(av == bv)
    return {int(av[i]) * total + int(i) for i in agree}


def storage_bits(M: int, n: int, q: int, q_prime: int) -> int:
    """Per-node storage: M*n key-index symbols plus M*n keys, in bits.

    Non-power-of-two alphabets round each log up to the next whole bit.
    """
    if min(M, n, q, q_prime) < 1:
        raise ValueError("all arguments must be >= 1")
    return M * n * (q - 1).bit_length() + M * n * (q_prime - 1).bit_length()


def _authority_refs(M: int, n: int, q: int, m: int) -> np.ndarray:
    """Sorted key refs owned by authority m: coordinates [m*n, (m+1)*n)."""
    total = M * n
    coords = np.arange(m * n, (m + 1) * n)
    refs = (np.arange(q)[:, None] * total + coords[None, :]).ravel()
    return np.sort(refs)


@dataclass(frozen=True)
class KeyPool:
    """The global pool of M*n*q placeholder keys, values in [0, q')."""

    M: int
    n: int
    q: int
    q_prime: int
    keys: np.ndarray  # (M*n*q,)

    def authority_indices(self, m: int) -> np.ndarray:
        """Sorted refs owned by authority m."""
        if not 0 <= m < self.M:
            raise ValueError(f"authority {m} not in [0, {self.M})")
        return _authority_refs(self.M, self.n, self.q, m)


def make_key_pool(
    M: int, n: int, q: int, q_prime: int, seed: int
) -> KeyPool:
    """Seeded pool of M*n*q values in [0, q'); authority slices come from
    independent substreams so a single operator can stand in for M
    authorities without correlating their keys.
    """
    size = M * n * q
    if size > POOL_GUARD:
        raise PoolTooLargeError(f"pool size {size} exceeds guard {POOL_GUARD}")
    keys = np.empty(size, dtype=np.int64)
    for m, child in enumerate(np.random.SeedSequence(seed).spawn(M)):
        rng = np.random.default_rng(child)
        idx = _authority_refs(M, n, q, m)
        keys[idx] = rng.integers(0, q_prime, size=idx.size)
    return KeyPool(M=M, n=n, q=q, q_prime=q_prime, keys=keys)
