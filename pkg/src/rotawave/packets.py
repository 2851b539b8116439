"""Wavelet-packet and local cosine/sine packet dictionaries.

A :class:`PacketTable` stores every node of a full binary tree of depth
``J``. Level ``j`` is a ``(2**j, n // 2**j)`` array; row ``f`` is node
``(j, f)`` and its two children are ``(j + 1, 2f)`` and ``(j + 1, 2f + 1)``.
For wavelet packets the children are the lowpass and highpass outputs of
one periodized factored step. For local trigonometric packets row ``f`` is
the ``f``-th segment of the signal and the column index is the frequency.
"""

from __future__ import annotations

import csv
import functools
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np
import scipy.fft

from .counting import OpCounter, ensure_counter
from .errors import BadDepth, BellTooWide, InvalidCover, MisalignedBells, ValidationError
from .factorization import Schedule
from .transform1d import _factored_periodic_rows, _inverse_periodic_rows

WAVELET = "wavelet"
COSINE = "cosine"
SINE = "sine"
KINDS = (WAVELET, COSINE, SINE)

# Above this length the type-IV transforms go through scipy's FFT-based
# routine instead of a dense matrix.
FAST_THRESHOLD = 64

INT64_MAX = 2**63 - 1


# ---------------------------------------------------------------------------
# Tables and covers


@dataclass
class PacketTable:
    """Coefficients of every node ``(j, f)`` for ``j = 0..depth``.

    Attributes:
        levels: ``levels[j]`` has shape ``(2**j, n // 2**j)``.
        kind: ``"wavelet"``, ``"cosine"`` or ``"sine"``.
        basis: the schedule for wavelet packets, the bell radius otherwise.
    """

    levels: list[np.ndarray]
    kind: str = WAVELET
    basis: Schedule | int | None = None

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    @property
    def n(self) -> int:
        return self.levels[0].shape[1]

    def block(self, j: int, f: int) -> np.ndarray:
        return self.levels[j][f]

    def nodes(self) -> Iterator[tuple[int, int]]:
        for j, level in enumerate(self.levels):
            for f in range(level.shape[0]):
                yield j, f

    def rows(self) -> Iterator[tuple[int, int, int, float]]:
        """Yield ``(j, f, p, value)`` for every stored coefficient."""
        for j, level in enumerate(self.levels):
            for f, blk in enumerate(level):
                for p, v in enumerate(blk):
                    yield j, f, p, float(v)

    def coefficients(self, cover: "BasisCover") -> np.ndarray:
        """Concatenate the covered blocks in left-to-right interval order."""
        cover.validate(self.depth)
        return np.concatenate([self.block(j, f) for j, f in cover.ordered()])


@dataclass(frozen=True)
class BasisCover:
    """A set of nodes ``(j, f)`` whose dyadic intervals tile ``[0, 1)``."""

    nodes: frozenset = field(default_factory=frozenset)

    def __init__(self, nodes: Iterable[tuple[int, int]]):
        object.__setattr__(self, "nodes", frozenset((int(j), int(f)) for j, f in nodes))

    def __iter__(self):
        return iter(self.ordered())

    def __len__(self) -> int:
        return len(self.nodes)

    def ordered(self) -> list[tuple[int, int]]:
        """Nodes sorted by the left end of their interval."""
        return sorted(self.nodes, key=lambda jf: (jf[1] / 2 ** jf[0], jf[0]))

    def validate(self, depth: int) -> None:
        """Raise :class:`InvalidCover` unless the cover is exact and disjoint."""
        if not self.nodes:
            raise InvalidCover("empty cover")
        pos = 0
        unit = 1 << depth
        for j, f in self.ordered():
            if not 0 <= j <= depth or not 0 <= f < (1 << j):
                raise InvalidCover(f"node {(j, f)} is outside a depth-{depth} tree")
            width = unit >> j
            if f * width != pos:
                raise InvalidCover(f"node {(j, f)} overlaps or leaves a gap at {pos}/{unit}")
            pos += width
        if pos != unit:
            raise InvalidCover("cover does not reach the right end of the interval")

    def is_valid(self, depth: int) -> bool:
        try:
            self.validate(depth)
        except InvalidCover:
            return False
        return True

    @classmethod
    def leaves(cls, depth: int) -> "BasisCover":
        """All nodes at the bottom level."""
        return cls((depth, f) for f in range(1 << depth))

    @classmethod
    def wavelet(cls, depth: int) -> "BasisCover":
        """The logarithmic tree: lowpass-only descent with every highpass kept."""
        return cls([(depth, 0)] + [(j, 1) for j in range(1, depth + 1)])

    @classmethod
    def random(cls, depth: int, rng: np.random.Generator, p_split: float = 0.6) -> "BasisCover":
        out = []

        def grow(j, f):
            if j < depth and rng.random() < p_split:
                grow(j + 1, 2 * f)
                grow(j + 1, 2 * f + 1)
            else:
                out.append((j, f))

        grow(0, 0)
        return cls(out)


def enumerate_covers(depth: int) -> Iterator[BasisCover]:
    """Every disjoint cover of a depth-``depth`` tree (small depths only)."""

    def covers(j, f):
        yield [(j, f)]
        if j < depth:
            for a, b in itertools.product(list(covers(j + 1, 2 * f)), list(covers(j + 1, 2 * f + 1))):
                yield a + b

    for c in covers(0, 0):
        yield BasisCover(c)


def count_bases(depth: int, *, saturate: bool = False):
    """Number of disjoint covers of a binary tree with ``depth`` levels below the root.

    Uses ``B(J) = 1`` and ``B(j) = B(j+1)**2 + 1``. The exact count is a
    Python integer. With ``saturate=True`` the result is clipped to the
    int64 range and returned as ``(value, overflowed)``; depths above 6
    overflow.
    """
    if isinstance(depth, bool) or not isinstance(depth, (int, np.integer)) or depth < 0:
        raise BadDepth(f"depth must be a non-negative integer, got {depth!r}")
    b = 1
    for _ in range(int(depth)):
        b = b * b + 1
    if saturate:
        return (min(b, INT64_MAX), b > INT64_MAX)
    return b


# ---------------------------------------------------------------------------
# Wavelet packets


def _check_depth(n: int, depth: int, minimum: int) -> int:
    if isinstance(depth, bool) or not isinstance(depth, (int, np.integer)):
        raise BadDepth(f"depth must be an integer, got {depth!r}")
    depth = int(depth)
    if depth < minimum:
        raise BadDepth(f"depth must be at least {minimum}, got {depth}")
    if n % (1 << depth):
        raise BadDepth(f"2^{depth} does not divide the signal length {n}")
    return depth


def _as_signal(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or len(x) == 0:
        raise ValidationError("signal must be a non-empty 1-D array")
    if not np.all(np.isfinite(x)):
        raise ValidationError("signal contains non-finite samples")
    return x


def wavelet_packet_table(x, s: Schedule, depth: int, counter: OpCounter | None = None) -> PacketTable:
    """Full wavelet-packet analysis to ``depth`` levels.

    Every node is split by the periodized factored transform, so each level
    costs what one single-level transform of length ``n`` costs.
    """
    counter = ensure_counter(counter)
    counter.reset()
    x = _as_signal(x)
    depth = _check_depth(len(x), depth, 1)
    levels = [x.reshape(1, -1).copy()]
    for _ in range(depth):
        parent = levels[-1]
        c, d = _factored_periodic_rows(parent, s, counter)
        child = np.empty((2 * parent.shape[0], parent.shape[1] // 2))
        child[0::2] = c
        child[1::2] = d
        levels.append(child)
    return PacketTable(levels, WAVELET, s)


def _wavelet_reconstruct(table: PacketTable, cover: BasisCover, s: Schedule, counter: OpCounter) -> np.ndarray:
    nodes = cover.nodes

    def build(j, f):
        if (j, f) in nodes:
            return table.block(j, f)
        c = build(j + 1, 2 * f)
        d = build(j + 1, 2 * f + 1)
        return _inverse_periodic_rows(c, d, s, counter)

    return build(0, 0)


# ---------------------------------------------------------------------------
# Type-IV transforms


@functools.lru_cache(maxsize=64)
def _iv_matrix(n: int, kind: str) -> np.ndarray:
    k = np.arange(n) + 0.5
    fn = np.cos if kind == COSINE else np.sin
    m = np.sqrt(2.0 / n) * fn(np.pi * np.outer(k, k) / n)
    m.flags.writeable = False
    return m


def _iv(v: np.ndarray, kind: str, fast: bool | None) -> np.ndarray:
    """Type-IV transform along the last axis."""
    n = v.shape[-1]
    if fast is None:
        fast = n >= FAST_THRESHOLD
    if fast:
        f = scipy.fft.dct if kind == COSINE else scipy.fft.dst
        return f(v, type=4, norm="ortho", axis=-1)
    return v @ _iv_matrix(n, kind).T


def _as_vector(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or len(v) < 1:
        raise ValidationError("type-IV transforms need a non-empty 1-D vector")
    return v


def dct_iv(v, *, fast: bool | None = None) -> np.ndarray:
    """Orthonormal DCT-IV, ``sqrt(2/n) sum_k v_k cos(pi (j+1/2)(k+1/2) / n)``.

    The transform is its own inverse. Lengths of at least
    ``FAST_THRESHOLD`` go through the FFT-based routine unless ``fast`` is
    given explicitly.
    """
    return _iv(_as_vector(v), COSINE, fast)


def dst_iv(v, *, fast: bool | None = None) -> np.ndarray:
    """Orthonormal DST-IV, ``sqrt(2/n) sum_k v_k sin(pi (j+1/2)(k+1/2) / n)``."""
    return _iv(_as_vector(v), SINE, fast)


# ---------------------------------------------------------------------------
# Bells and folding


def rising_cutoff(t, iterations: int = 2) -> np.ndarray:
    """Iterated-sine rising function ``r`` on ``[-1, 1]``.

    ``r(t)**2 + r(-t)**2 = 1``, ``r = 0`` left of ``-1`` and ``1`` right of ``1``.
    """
    t = np.clip(np.asarray(t, dtype=float), -1.0, 1.0)
    for _ in range(iterations):
        t = np.sin(0.5 * np.pi * t)
    return np.sin(0.25 * np.pi * (1.0 + t))


@dataclass
class BellSet:
    """Bells ``b_k`` on ``[alpha_k - eps_k, alpha_{k+1} + eps_{k+1})``.

    Breakpoints are integers from ``0`` to ``n``; samples sit at the
    half-integers ``i + 1/2``. The outer breakpoints carry radius 0, so the
    first and last bells end sharply at the ends of the signal.

    Attributes:
        breakpoints: ``alpha_0 = 0 < alpha_1 < ... < alpha_K = n``.
        radii: ``eps_k`` per breakpoint.
        values: ``(K, n)`` array of ``b_k`` sampled at every grid point.
    """

    breakpoints: np.ndarray
    radii: np.ndarray
    values: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        a = np.asarray(self.breakpoints)
        e = np.asarray(self.radii)
        if a.ndim != 1 or len(a) < 2 or not np.all(a == np.round(a)):
            raise MisalignedBells("breakpoints must be at least two integers")
        a = a.astype(int)
        if a[0] != 0 or np.any(np.diff(a) <= 0):
            raise MisalignedBells("breakpoints must start at 0 and increase strictly")
        if e.shape != a.shape or np.any(e < 0) or not np.all(e == np.round(e)):
            raise MisalignedBells("need one non-negative integer radius per breakpoint")
        e = e.astype(int)
        if e[0] or e[-1]:
            raise MisalignedBells("outer breakpoints must have radius 0")
        if np.any(e[:-1] + e[1:] > np.diff(a)):
            raise BellTooWide("neighbouring folding regions overlap")
        self.breakpoints, self.radii = a, e
        self.values = self._sample()
        residual = np.max(np.abs(np.sum(self.values**2, axis=0) - 1.0))
        if residual > 1e-12:
            raise MisalignedBells(f"bells are not a partition of unity (residual {residual:.2e})")

    @property
    def n(self) -> int:
        return int(self.breakpoints[-1])

    @property
    def count(self) -> int:
        return len(self.breakpoints) - 1

    @classmethod
    def uniform(cls, n: int, blocks: int, radius: int) -> "BellSet":
        if blocks < 1 or n % blocks:
            raise MisalignedBells(f"{blocks} blocks do not divide length {n}")
        a = np.arange(blocks + 1) * (n // blocks)
        e = np.full(blocks + 1, radius)
        e[0] = e[-1] = 0
        return cls(a, e)

    @classmethod
    def for_cover(cls, n: int, cover: BasisCover, radius: int) -> "BellSet":
        a = [0]
        for j, _ in cover.ordered():
            a.append(a[-1] + (n >> j))
        e = np.full(len(a), radius)
        e[0] = e[-1] = 0
        return cls(np.array(a), e)

    def _sample(self) -> np.ndarray:
        x = np.arange(self.n) + 0.5
        out = np.zeros((self.count, self.n))
        for k in range(self.count):
            lo, hi = self.breakpoints[k], self.breakpoints[k + 1]
            elo, ehi = self.radii[k], self.radii[k + 1]
            rise = rising_cutoff((x - lo) / elo) if elo else (x > lo).astype(float)
            fall = rising_cutoff((hi - x) / ehi) if ehi else (x < hi).astype(float)
            out[k] = rise * fall
        return out


def _fold_plan(bells: BellSet) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Indices and weights of every mirrored pair ``(alpha - u, alpha + u)``."""
    left, right, rp, rm = [], [], [], []
    for alpha, eps in zip(bells.breakpoints[1:-1], bells.radii[1:-1]):
        if not eps:
            continue
        u = np.arange(eps) + 0.5
        rp.append(rising_cutoff(u / eps))
        rm.append(rising_cutoff(-u / eps))
        left.append(alpha - 1 - np.arange(eps))
        right.append(alpha + np.arange(eps))
    if not left:
        e = np.zeros(0)
        return e.astype(int), e.astype(int), e, e
    return np.concatenate(left), np.concatenate(right), np.concatenate(rp), np.concatenate(rm)


def _fold_pairs(y: np.ndarray, plan, kind: str, inverse: bool) -> None:
    """Rotate each mirrored pair in place along the last axis."""
    left, right, rp, rm = plan
    sign = 1.0 if kind == COSINE else -1.0
    if inverse:
        sign = -sign
    a, b = y[..., left].copy(), y[..., right].copy()
    y[..., left] = rp * a - sign * rm * b
    y[..., right] = rp * b + sign * rm * a


def _check_kind(kind: str) -> str:
    if kind not in (COSINE, SINE):
        raise ValidationError(f"kind must be 'cosine' or 'sine', got {kind!r}")
    return kind


def fold(x, bells: BellSet, kind: str = COSINE) -> list[np.ndarray]:
    """Fold ``x`` into one block per bell interval.

    Block ``k`` is ``f#`` restricted to ``[alpha_k, alpha_{k+1})``. The
    reflected parts enter with the parity of the chosen trigonometric
    kernel at each end: cosines are even at the left end and odd at the
    right end, sines the other way round.
    """
    x = _as_signal(x)
    _check_kind(kind)
    if len(x) != bells.n:
        raise MisalignedBells(f"signal length {len(x)} does not match bell span {bells.n}")
    y = x.copy()
    _fold_pairs(y, _fold_plan(bells), kind, inverse=False)
    return np.split(y, bells.breakpoints[1:-1])


def unfold(blocks: Sequence[np.ndarray], bells: BellSet, kind: str = COSINE) -> np.ndarray:
    """Inverse of :func:`fold`."""
    _check_kind(kind)
    widths = np.diff(bells.breakpoints)
    if len(blocks) != len(widths) or any(len(b) != w for b, w in zip(blocks, widths)):
        raise MisalignedBells("block lengths do not match the bell intervals")
    y = np.concatenate([np.asarray(b, dtype=float) for b in blocks])
    _fold_pairs(y, _fold_plan(bells), kind, inverse=True)
    return y


@functools.lru_cache(maxsize=256)
def _uniform_plan(n: int, blocks: int, radius: int):
    return _fold_plan(BellSet.uniform(n, blocks, radius))


def default_radius(n: int, depth: int) -> int:
    return min(8, n >> (depth + 1))


def local_cosine_table(x, depth: int, radius: int | None = None, kind: str = COSINE) -> PacketTable:
    """Local cosine (or sine) packet analysis with fixed-radius bells.

    Level ``j`` splits the signal into ``2**j`` equal segments, folds with
    bells of the given radius at every interior breakpoint and applies the
    type-IV transform to each segment.
    """
    x = _as_signal(x)
    _check_kind(kind)
    n = len(x)
    depth = _check_depth(n, depth, 0)
    if radius is None:
        radius = default_radius(n, depth)
    if radius < 0 or 2 * radius > (n >> depth):
        raise BellTooWide(f"radius {radius} exceeds half the smallest block ({n >> depth})")
    levels = []
    for j in range(depth + 1):
        y = x.copy()
        _fold_pairs(y, _uniform_plan(n, 1 << j, int(radius)), kind, inverse=False)
        levels.append(_iv(y.reshape(1 << j, -1), kind, None))
    return PacketTable(levels, kind, int(radius))


def local_sine_table(x, depth: int, radius: int | None = None) -> PacketTable:
    return local_cosine_table(x, depth, radius, SINE)


# ---------------------------------------------------------------------------
# Reconstruction


def reconstruct_from_cover(
    table: PacketTable,
    cover: BasisCover,
    basis: Schedule | int | None = None,
    counter: OpCounter | None = None,
) -> np.ndarray:
    """Rebuild the level-0 signal from the covered nodes only.

    ``basis`` defaults to what the table was built with: the schedule for
    wavelet packets (biorthogonal schedules invert through their duals),
    the bell radius for local trigonometric packets.
    """
    counter = ensure_counter(counter)
    counter.reset()
    if not isinstance(cover, BasisCover):
        cover = BasisCover(cover)
    cover.validate(table.depth)
    basis = table.basis if basis is None else basis
    if table.kind == WAVELET:
        if not isinstance(basis, Schedule):
            raise ValidationError("wavelet packet reconstruction needs a schedule")
        return _wavelet_reconstruct(table, cover, basis, counter)
    n = table.n
    bells = BellSet.for_cover(n, cover, int(basis))
    blocks = [_iv(table.block(j, f), table.kind, None) for j, f in cover.ordered()]
    return unfold(blocks, bells, table.kind)


# ---------------------------------------------------------------------------
# Measures and I/O


def entropy(x, r: float = 2.0) -> float:
    """``H_r(x) = -sum p_i log2 p_i`` with ``p_i = |x_i|**r / ||x||_r**r``."""
    if not 1.0 <= r < math.inf:
        raise ValidationError("entropy exponent must satisfy 1 <= r < inf")
    a = np.abs(np.asarray(x, dtype=float).ravel()) ** r
    total = a.sum()
    if total == 0:
        return 0.0
    p = a[a > 0] / total
    return float(-(p * np.log2(p)).sum())


def write_table_csv(path: str | Path, table: PacketTable) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["j", "f", "p", "value"])
        for j, f, p, v in table.rows():
            w.writerow([j, f, p, repr(v)])


def read_table_csv(path: str | Path, kind: str = WAVELET, basis=None) -> PacketTable:
    rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    depth = int(rows[:, 0].max())
    n = int((rows[:, 0] == 0).sum())
    levels = [np.zeros((1 << j, n >> j)) for j in range(depth + 1)]
    for j, f, p, v in rows:
        levels[int(j)][int(f), int(p)] = v
    return PacketTable(levels, kind, basis)
