"""Block codes C(n, k) over GF(q).

Three constructions:

* evaluation-form Reed-Solomon (MDS, d_min = n - k + 1), message symbols
  taken as polynomial coefficients evaluated at n distinct points,
* seeded random linear codes with a full-rank k x n generator,
* explicit codeword tables (covers nonlinear codes).

On top of encoding the module provides exact minimum distance and
``count_matching``: the number of codewords carrying given symbols at given
coordinates, which drives the whole resilience analysis.  For linear codes
that count is q^(k - rank) of the induced linear system; for explicit codes
it is a table scan.  Both paths agree and are cross-checked in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BadMessageLengthError,
    GuardExceededError,
    LengthExceedsFieldError,
    OutOfRangeError,
)
from .field import Field, make_field

# Hard ceiling for any exhaustive codeword enumeration.
ENUMERATION_GUARD = 1 << 20
# Ceiling for quadratic all-pairs scans (explicit-code minimum distance).
PAIR_SCAN_GUARD = 1 << 12

KIND_MDS_RS = "mds_rs"
KIND_RANDOM_LINEAR = "random_linear"
KIND_EXPLICIT = "explicit"


@dataclass(frozen=True)
class CodeSpec:
    """Shape summary of a block code: length, dimension, alphabet, distance."""

    n: int
    k: int
    q: int
    d_min: int
    kind: str


class BlockCode:
    """A C(n, k)-q block code with its encoder.

    Linear kinds carry a full-rank k x n ``generator`` over GF(q); the
    explicit kind carries a ``table`` of codeword rows indexed by message
    rank.  Instances are immutable after construction.
    """

    def __init__(
        self,
        spec: CodeSpec,
        field: Field,
        generator: np.ndarray | None = None,
        table: np.ndarray | None = None,
        eval_points: tuple[int, ...] | None = None,
        code_id: str | None = None,
    ):
        self.spec = spec
        self.field = field
        self.generator = generator
        self.table = table
        self.eval_points = eval_points
        self.code_id = code_id or f"{spec.kind}-{spec.n}-{spec.k}-{spec.q}"
        if generator is not None:
            self.zero_columns = tuple(
                int(j) for j in np.flatnonzero(~generator.any(axis=0))
            )
        elif table is not None:
            self.zero_columns = tuple(
                int(j) for j in np.flatnonzero(~table.any(axis=0))
            )
        else:
            self.zero_columns = ()
        self._image_cache: dict[tuple[int, ...], tuple[int, np.ndarray]] = {}

    # -- basic properties ---------------------------------------------------

    @property
    def is_linear(self) -> bool:
        return self.generator is not None

    @property
    def num_codewords(self) -> int:
        if self.table is not None:
            return int(self.table.shape[0])
        return self.spec.q ** self.spec.k

    def __repr__(self) -> str:
        s = self.spec
        return (
            f"BlockCode({s.kind}, n={s.n}, k={s.k}, q={s.q}, "
            f"d_min={s.d_min})"
        )

    # -- encoding -------------------------------------------------------------

    def encode(self, message) -> np.ndarray:
        """Codeword of a k-symbol message.

        Raises BadMessageLengthError on wrong length and OutOfRangeError on
        symbols outside [0, q).
        """
        msg = np.asarray(message, dtype=np.int64)
        if msg.shape != (self.spec.k,):
            raise BadMessageLengthError(
                f"message must have {self.spec.k} symbols, got shape {msg.shape}"
            )
        return self.encode_batch(msg[None, :])[0]

    def encode_batch(self, messages: np.ndarray) -> np.ndarray:
        """Encode a (B, k) batch of messages into a (B, n) array."""
        messages = np.asarray(messages, dtype=np.int64)
        if messages.ndim != 2 or messages.shape[1] != self.spec.k:
            raise BadMessageLengthError(
                f"expected shape (B, {self.spec.k}), got {messages.shape}"
            )
        if messages.size and (messages.min() < 0 or messages.max() >= self.spec.q):
            raise OutOfRangeError(f"message symbol outside [0, {self.spec.q})")
        if self.generator is not None:
            return gf_matmul(self.field, messages, self.generator)
        ranks = ranks_from_messages(messages, self.spec.q)
        if ranks.size and ranks.max() >= self.table.shape[0]:
            raise OutOfRangeError("message rank beyond explicit table")
        return self.table[ranks].copy()

    # -- enumeration ----------------------------------------------------------

    def enumerate_codewords(self) -> np.ndarray:
        """All q^k codewords in message lexicographic order, shape (q^k, n).

        Raises GuardExceededError above the enumeration guard.
        """
        count = self.num_codewords
        if count > ENUMERATION_GUARD:
            raise GuardExceededError(
                f"{count} codewords exceed enumeration guard {ENUMERATION_GUARD}"
            )
        if self.table is not None:
            return self.table.copy()
        out = np.empty((count, self.spec.n), dtype=np.int64)
        chunk = 1 << 16
        for start in range(0, count, chunk):
            stop = min(start + chunk, count)
            msgs = messages_from_ranks(
                np.arange(start, stop, dtype=np.int64), self.spec.q, self.spec.k
            )
            out[start:stop] = gf_matmul(self.field, msgs, self.generator)
        return out

    # -- distance ---------------------------------------------------------------

    def min_distance(self) -> int:
        """Exact minimum pairwise Hamming distance.

        Computed once at construction (weight scan for linear codes, pairwise
        scan for explicit tables; n - k + 1 for Reed-Solomon).  Codes with
        fewer than two codewords report n + 1, which makes "pairs agree in at
        most n - d_min coordinates" vacuously true.
        """
        return self.spec.d_min

    # -- constrained counting ------------------------------------------------

    def count_matching(self, positions, symbols) -> int:
        """Number of codewords with the given symbols at the given coordinates.

        ``positions`` are distinct coordinates in [0, n); ``symbols`` the
        required values.  With no constraints the count is q^k.  Linear codes
        solve the induced system on the message (q^(k - rank) if consistent,
        else 0); explicit codes scan the table.
        """
        pos = [int(p) for p in positions]
        sym = [int(s) for s in symbols]
        if len(pos) != len(sym):
            raise ValueError("positions and symbols must have equal length")
        if len(set(pos)) != len(pos):
            raise ValueError("positions must be distinct")
        n, q = self.spec.n, self.spec.q
        for p in pos:
            if not 0 <= p < n:
                raise OutOfRangeError(f"position {p} outside [0, {n})")
        for s in sym:
            if not 0 <= s < q:
                raise OutOfRangeError(f"symbol {s} outside [0, {q})")
        if not pos:
            return self.num_codewords
        if self.generator is not None:
            return self._count_matching_linear(pos, sym)
        mask = np.ones(self.table.shape[0], dtype=bool)
        for p, s in zip(pos, sym):
            mask &= self.table[:, p] == s
        return int(mask.sum())

    def _count_matching_linear(self, pos, sym) -> int:
        # x . G[:, pos] = sym  <=>  G[:, pos]^T x^T = sym^T
        a = self.generator[:, pos].T  # j x k
        rhs = np.asarray(sym, dtype=np.int64)[:, None]
        aug = np.concatenate([a, rhs], axis=1)
        _, pivots, _ = gf_row_reduce(self.field, aug)
        if a.shape[1] in pivots:  # pivot in the constants column
            return 0
        rank = len(pivots)
        return self.spec.q ** (self.spec.k - rank)

    def subset_image(self, positions: tuple[int, ...]) -> tuple[int, np.ndarray]:
        """For a linear code: rank r of the projection onto ``positions`` and
        the full image, a (q^r, len(positions)) array of achievable symbol
        tuples.  Cached per code; used by the inclusion-exclusion counter.
        """
        if self.generator is None:
            raise ValueError("subset_image requires a linear code")
        cached = self._image_cache.get(positions)
        if cached is not None:
            return cached
        sub = self.generator[:, list(positions)]  # k x j
        reduced, pivots, rank = gf_row_reduce(self.field, sub)
        basis = reduced[:rank]  # r x j
        coeffs = messages_from_ranks(
            np.arange(self.spec.q**rank, dtype=np.int64), self.spec.q, rank
        )
        image = gf_matmul(self.field, coeffs, basis) if rank else np.zeros(
            (1, len(positions)), dtype=np.int64
        )
        self._image_cache[positions] = (rank, image)
        return rank, image


# -- message rank helpers -----------------------------------------------------


def messages_from_ranks(ranks: np.ndarray, q: int, k: int) -> np.ndarray:
    """Base-q digits of each rank, most significant first, shape (B, k)."""
    out = np.empty((len(ranks), k), dtype=np.int64)
    rem = np.asarray(ranks, dtype=np.int64).copy()
    for pos in range(k - 1, -1, -1):
        out[:, pos] = rem % q
        rem //= q
    return out


def ranks_from_messages(messages: np.ndarray, q: int) -> np.ndarray:
    """Inverse of messages_from_ranks."""
    messages = np.asarray(messages, dtype=np.int64)
    ranks = np.zeros(messages.shape[0], dtype=np.int64)
    for pos in range(messages.shape[1]):
        ranks = ranks * q + messages[:, pos]
    return ranks


# -- linear algebra over GF(q) ---------------------------------------------


def gf_matmul(field: Field, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product over GF(q); a is (B, k), b is (k, n)."""
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    for l in range(a.shape[1]):
        out = field.add(out, field.mul(a[:, l : l + 1], b[l : l + 1, :]))
    return out


def gf_row_reduce(field: Field, mat: np.ndarray):
    """Reduced row echelon form over GF(q); returns (reduced, pivots, rank)."""
    m = np.asarray(mat, dtype=np.int64).copy()
    rows, cols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        pivot_row = None
        for i in range(r, rows):
            if m[i, c] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        if pivot_row != r:
            m[[r, pivot_row]] = m[[pivot_row, r]]
        m[r] = field.mul(m[r], field.inv(int(m[r, c])))
        for i in range(rows):
            if i != r and m[i, c] != 0:
                m[i] = field.sub(m[i], field.mul(int(m[i, c]), m[r]))
        pivots.append(c)
        r += 1
    return m, pivots, r


def gf_rank(field: Field, mat: np.ndarray) -> int:
    return gf_row_reduce(field, mat)[2]


# -- constructors --------------------------------------------------------------


def make_rs_code(
    field: Field, n: int, k: int, eval_points=None
) -> BlockCode:
    """Evaluation-form Reed-Solomon code.

    Codeword symbol j is the degree-(k-1) message polynomial
    m_0 + m_1 x + ... + m_{k-1} x^{k-1} evaluated at ``eval_points[j]``;
    points default to the canonical elements 0..n-1, so n <= q is required.
    The code is MDS with d_min = n - k + 1.
    """
    q = field.q
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    if n > q:
        raise LengthExceedsFieldError(f"RS length {n} exceeds field size {q}")
    if eval_points is None:
        points = tuple(range(n))
    else:
        points = tuple(int(e) for e in eval_points)
        if len(points) != n:
            raise ValueError(f"need {n} evaluation points, got {len(points)}")
        if len(set(points)) != n:
            raise ValueError("evaluation points must be distinct")
        for e in points:
            if not 0 <= e < q:
                raise OutOfRangeError(f"evaluation point {e} outside [0, {q})")
    gen = np.empty((k, n), dtype=np.int64)
    for j, e in enumerate(points):
        for l in range(k):
            gen[l, j] = field.pow(e, l)
    spec = CodeSpec(n=n, k=k, q=q, d_min=n - k + 1, kind=KIND_MDS_RS)
    return BlockCode(
        spec, field, generator=gen, eval_points=points,
        code_id=f"rs-{n}-{k}-{q}",
    )


def make_random_linear_code(field: Field, n: int, k: int, seed: int) -> BlockCode:
    """Random linear code: generator uniform among full-rank k x n matrices
    over GF(q) (rejection sampling), deterministic given ``seed``.  The exact
    minimum distance is found by a full weight scan, so q^k must stay within
    the enumeration guard.
    """
    q = field.q
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    if q**k > ENUMERATION_GUARD:
        raise GuardExceededError(
            f"q^k = {q**k} exceeds enumeration guard {ENUMERATION_GUARD}"
        )
    rng = np.random.default_rng(seed)
    while True:
        gen = rng.integers(0, q, size=(k, n)).astype(np.int64)
        if gf_rank(field, gen) == k:
            break
    return linear_code_from_generator(
        field, gen, kind=KIND_RANDOM_LINEAR, code_id=f"lin-{n}-{k}-{q}-s{seed}"
    )


def linear_code_from_generator(
    field: Field,
    generator,
    kind: str = KIND_RANDOM_LINEAR,
    code_id: str | None = None,
) -> BlockCode:
    """Linear code from an explicit full-rank generator matrix.

    Tagged ``random_linear`` by default; the tag covers any generator-backed
    code that is not evaluation-form RS.
    """
    gen = np.asarray(generator, dtype=np.int64)
    if gen.ndim != 2:
        raise ValueError("generator must be a 2-D matrix")
    k, n = gen.shape
    q = field.q
    if gen.size and (gen.min() < 0 or gen.max() >= q):
        raise OutOfRangeError(f"generator entry outside [0, {q})")
    if q**k > ENUMERATION_GUARD:
        raise GuardExceededError(
            f"q^k = {q**k} exceeds enumeration guard {ENUMERATION_GUARD}"
        )
    if gf_rank(field, gen) != k:
        raise ValueError("generator must have rank k (injective encoder)")
    d_min = _linear_min_weight(field, gen)
    spec = CodeSpec(n=n, k=k, q=q, d_min=d_min, kind=kind)
    return BlockCode(spec, field, generator=gen, code_id=code_id)


def _linear_min_weight(field: Field, gen: np.ndarray) -> int:
    """Minimum Hamming weight over nonzero codewords (equals d_min)."""
    k, n = gen.shape
    q = field.q
    count = q**k
    best = n + 1
    chunk = 1 << 16
    for start in range(1, count, chunk):
        stop = min(start + chunk, count)
        msgs = messages_from_ranks(
            np.arange(start, stop, dtype=np.int64), q, k
        )
        words = gf_matmul(field, msgs, gen)
        w = int((words != 0).sum(axis=1).min())
        if w < best:
            best = w
    return best


def make_explicit_code(
    field: Field, codewords, k: int | None = None, code_id: str | None = None
) -> BlockCode:
    """Code given directly as a table of codeword rows (may be nonlinear).

    Rows are indexed by message rank.  If ``k`` is omitted it is the smallest
    integer with q^k >= number of rows.  Rows must be distinct (injective
    encoder).  A table with fewer than two rows gets d_min = n + 1.
    """
    table = np.asarray(codewords, dtype=np.int64)
    if table.ndim != 2:
        raise ValueError("codewords must form a 2-D table")
    rows, n = table.shape
    q = field.q
    if table.size and (table.min() < 0 or table.max() >= q):
        raise OutOfRangeError(f"codeword symbol outside [0, {q})")
    if rows > PAIR_SCAN_GUARD:
        raise GuardExceededError(
            f"{rows} rows exceed pairwise-scan guard {PAIR_SCAN_GUARD}"
        )
    uniq = np.unique(table, axis=0)
    if uniq.shape[0] != rows:
        raise ValueError("codewords must be distinct")
    if k is None:
        k = 0
        while q**k < rows:
            k += 1
    d_min = _table_min_distance(table)
    spec = CodeSpec(n=n, k=k, q=q, d_min=d_min, kind=KIND_EXPLICIT)
    return BlockCode(spec, field, table=table, code_id=code_id)


def _table_min_distance(table: np.ndarray) -> int:
    rows, n = table.shape
    if rows < 2:
        return n + 1
    best = n + 1
    for i in range(rows - 1):
        d = int((table[i + 1 :] != table[i]).sum(axis=1).min())
        if d < best:
            best = d
    return best


# -- file formats -----------------------------------------------------------


def save_explicit_code(code: BlockCode, path) -> None:
    """Write an explicit code: header "n k q", one codeword per line."""
    words = code.enumerate_codewords()
    s = code.spec
    lines = [f"{s.n} {s.k} {s.q}"]
    lines += [" ".join(str(int(x)) for x in row) for row in words]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_explicit_code(path) -> BlockCode:
    """Read the explicit-code format written by :func:`save_explicit_code`."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise ValueError(f"bad explicit-code header in {path}")
        n, k, q = (int(x) for x in header)
        rows = [[int(x) for x in line.split()] for line in fh if line.strip()]
    table = np.asarray(rows, dtype=np.int64)
    if table.ndim != 2 or table.shape[1] != n:
        raise ValueError(f"codeword rows in {path} do not match n={n}")
    return make_explicit_code(make_field(q), table, k=k)


def save_generator(code: BlockCode, path) -> None:
    """Write a generator matrix: header "G k n q", one row per line."""
    if code.generator is None:
        raise ValueError("code has no generator matrix")
    s = code.spec
    lines = [f"G {s.k} {s.n} {s.q}"]
    lines += [
        " ".join(str(int(x)) for x in row) for row in code.generator
    ]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_generator(path) -> BlockCode:
    """Read the generator format written by :func:`save_generator`."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 4 or header[0] != "G":
            raise ValueError(f"bad generator header in {path}")
        k, n, q = (int(x) for x in header[1:])
        rows = [[int(x) for x in line.split()] for line in fh if line.strip()]
    gen = np.asarray(rows, dtype=np.int64)
    if gen.shape != (k, n):
        raise ValueError(f"generator in {path} does not match k={k}, n={n}")
    return linear_code_from_generator(make_field(q), gen)
