"""One-dimensional two-channel transforms.

``dwt_reference`` convolves and downsamples; ``dwt_factored`` runs a
schedule of rotation/lifting steps on an interleaved buffer. Both produce
``c_k = sum_j H(j - 2k) x(j)`` and ``d_k = sum_j G(j - 2k) x(j)`` and count
every scalar multiply and add they perform.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .counting import OpCounter, ensure_counter
from .errors import BadLevelCount, NonInvertibleEdge, ValidationError
from .factorization import RotationStep, Schedule, StepKind
from .filters import FilterBank, FirFilter


class Edge(enum.Enum):
    PERIODIZE = "periodize"
    MIRROR = "mirror"
    EDGE_MATRICES = "edgemat"

    @classmethod
    def parse(cls, value: "Edge | str") -> "Edge":
        if isinstance(value, Edge):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValidationError(f"unknown edge rule {value!r}") from None


@dataclass
class WaveletCoeffs:
    """Lowpass block ``c`` and highpass block ``d`` of one level."""

    c: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.d = np.asarray(self.d, dtype=float)
        if self.c.shape != self.d.shape or self.c.ndim != 1:
            raise ValidationError("c and d blocks must be 1-D and of equal length")

    def __len__(self) -> int:
        return 2 * len(self.c)

    def interleaved(self) -> np.ndarray:
        out = np.empty(2 * len(self.c))
        out[0::2] = self.c
        out[1::2] = self.d
        return out

    def split(self) -> np.ndarray:
        return np.concatenate([self.c, self.d])

    @classmethod
    def from_interleaved(cls, w: Sequence[float]) -> "WaveletCoeffs":
        w = np.asarray(w, dtype=float)
        if w.ndim != 1 or len(w) % 2:
            raise ValidationError("interleaved coefficients need an even length")
        return cls(w[0::2].copy(), w[1::2].copy())

    @classmethod
    def from_split(cls, w: Sequence[float]) -> "WaveletCoeffs":
        w = np.asarray(w, dtype=float)
        if w.ndim != 1 or len(w) % 2:
            raise ValidationError("split coefficients need an even length")
        h = len(w) // 2
        return cls(w[:h].copy(), w[h:].copy())


@dataclass
class MultilevelCoeffs:
    """Logarithmic tree: coarsest lowpass block plus details, finest first."""

    coarse: np.ndarray
    details: list[np.ndarray] = field(default_factory=list)

    @property
    def levels(self) -> int:
        return len(self.details)

    def flat(self) -> np.ndarray:
        """``[coarse, d_levels, ..., d_1]`` as one vector of the input length."""
        return np.concatenate([self.coarse] + self.details[::-1])

    @classmethod
    def from_flat(cls, w: Sequence[float], levels: int) -> "MultilevelCoeffs":
        w = np.asarray(w, dtype=float)
        n = len(w)
        if levels < 0 or n % (1 << levels):
            raise BadLevelCount(f"length {n} is not divisible by 2^{levels}")
        size = n >> levels
        coarse, pos, details = w[:size].copy(), size, []
        for _ in range(levels):
            details.append(w[pos : pos + size].copy())
            pos += size
            size *= 2
        return cls(coarse, details[::-1])


def _signal(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValidationError("signal must be one-dimensional")
    if len(x) < 2 or len(x) % 2:
        raise ValidationError(f"signal length must be even and at least 2, got {len(x)}")
    if not np.all(np.isfinite(x)):
        raise ValidationError("signal contains non-finite samples")
    return x


def mirror_index(j: np.ndarray, n: int) -> np.ndarray:
    """Whole-sample reflection: ``x(-j) = x(j)`` and ``x(n-1+j) = x(n-1-j)``."""
    if n == 1:
        return np.zeros_like(j)
    period = 2 * n - 2
    j = np.mod(j, period)
    return np.where(j < n, j, period - j)


def _extended(x: np.ndarray, lo: int, hi: int, edge: Edge) -> np.ndarray:
    """Samples ``x(lo) .. x(hi - 1)`` under the edge rule."""
    j = np.arange(lo, hi)
    n = len(x)
    idx = np.mod(j, n) if edge is Edge.PERIODIZE else mirror_index(j, n)
    return x[idx]


# ---------------------------------------------------------------------------
# Reference transform


def _filter_channel(x: np.ndarray, f: FirFilter, edge: Edge) -> np.ndarray:
    n = len(x)
    half = n // 2
    lo, hi = f.support
    ext = _extended(x, lo, 2 * (half - 1) + hi + 1, edge)
    out = np.zeros(half)
    for t, h in zip(f.times(), f.coeffs):
        start = t - lo
        out += h * ext[start : start + 2 * half : 2]
    return out


def _reference_into(x: np.ndarray, bank: FilterBank, edge: Edge, counter: OpCounter) -> WaveletCoeffs:
    if edge is Edge.EDGE_MATRICES:
        from .edges import edge_dwt

        return edge_dwt(x, bank, counter, impl="reference")
    c = _filter_channel(x, bank.analysis_low, edge)
    d = _filter_channel(x, bank.analysis_high, edge)
    half = len(x) // 2
    for f in (bank.analysis_low, bank.analysis_high):
        counter.tally(f.length() * half, (f.length() - 1) * half)
    return WaveletCoeffs(c, d)


def dwt_reference(x, bank: FilterBank, edge: Edge | str = Edge.PERIODIZE, counter: OpCounter | None = None) -> WaveletCoeffs:
    """Convolve with ``H`` and ``G`` and keep every other output.

    Parameters
    ----------
    x : array_like
        Signal of even length ``n >= 2``.
    bank : FilterBank
        Supplies the analysis filters with their absolute tap positions.
    edge : Edge or str
        ``periodize``, ``mirror`` or ``edgemat``.
    counter : OpCounter, optional
        Reset on entry, then incremented once per scalar multiply and add.
    """
    counter = ensure_counter(counter)
    counter.reset()
    return _reference_into(_signal(x), bank, Edge.parse(edge), counter)


# ---------------------------------------------------------------------------
# Factored transform


def apply_step(y: np.ndarray, step: RotationStep, counter: OpCounter, *, inverse: bool = False) -> None:
    """Apply one step (or its adjugate) in place on a periodic buffer.

    The adjugate differs from the inverse only by the per-block determinant,
    which the caller folds into a single scalar. A 2-D ``y`` is treated as a
    stack of independent rows.
    """
    n = y.shape[-1]
    p = step.phase
    a = -step.alpha if inverse else step.alpha
    first = np.arange(p, n, 2)
    second = (first + 1) % n
    kind = step.kind
    if kind in (StepKind.SO2, StepKind.BAR_MIXED):
        b = step.alpha if kind is StepKind.SO2 else step.beta
        if inverse:
            b = -b
        u, v = y[..., first].copy(), y[..., second].copy()
        y[..., first] = u - a * v
        y[..., second] = b * u + v
    elif kind is StepKind.HAT_LOWER:
        y[..., first] -= a * y[..., (first + step.m - 1) % n]
    elif kind is StepKind.HAT_UPPER:
        y[..., second] -= a * y[..., (second - (step.m - 1)) % n]
    else:
        h = (step.m - 1) // 2
        y[..., first] -= a * (y[..., (first - h) % n] + y[..., (first + h) % n])
    half = (y.size // n) * (n // 2)
    counter.tally(step.mults_per_pair() * half, step.adds_per_pair() * half)


def _scale(v: np.ndarray, s: float, counter: OpCounter) -> np.ndarray:
    if s == 1.0:
        return v
    if s == -1.0:
        return -v
    counter.tally(v.size, 0)
    return s * v


def _schedule_span(s: Schedule) -> int:
    """Half-width of the composite operator's support, for mirror padding."""
    reach = 0
    for st in s.steps:
        reach += max(abs(t) for (_, t), _ in st.kernel().entries)
    return reach + max(abs(s.c_offset), abs(s.d_offset)) + 2


def _factored_periodic(x: np.ndarray, s: Schedule, counter: OpCounter) -> WaveletCoeffs:
    c, d = _factored_periodic_rows(x, s, counter)
    return WaveletCoeffs(c, d)


def _factored_periodic_rows(x: np.ndarray, s: Schedule, counter: OpCounter) -> tuple[np.ndarray, np.ndarray]:
    """Periodic analysis along the last axis; returns ``(c, d)`` arrays."""
    n = x.shape[-1]
    y = x.copy()
    for st in s.steps:
        apply_step(y, st, counter)
    k = np.arange(n // 2)
    c = _scale(y[..., (2 * k + s.c_offset) % n], s.scale_c, counter)
    d = _scale(y[..., (2 * k + s.d_offset) % n], s.scale_d, counter)
    return c, d


def _factored_mirror(x: np.ndarray, s: Schedule, counter: OpCounter) -> WaveletCoeffs:
    n = len(x)
    pad = _schedule_span(s)
    pad += pad % 2
    y = _extended(x, -pad, n + pad, Edge.MIRROR)
    for st in s.steps:
        apply_step(y, st, counter)
    k = np.arange(n // 2)
    c = _scale(y[2 * k + s.c_offset + pad], s.scale_c, counter)
    d = _scale(y[2 * k + s.d_offset + pad], s.scale_d, counter)
    return WaveletCoeffs(c, d)


def _factored_into(x: np.ndarray, s: Schedule, edge: Edge, counter: OpCounter) -> WaveletCoeffs:
    if edge is Edge.PERIODIZE:
        return _factored_periodic(x, s, counter)
    if edge is Edge.MIRROR:
        return _factored_mirror(x, s, counter)
    from .edges import edge_dwt

    return edge_dwt(x, s, counter, impl="factored")


def dwt_factored(x, s: Schedule, edge: Edge | str = Edge.PERIODIZE, counter: OpCounter | None = None) -> WaveletCoeffs:
    """Apply the schedule's steps in order, then read out and normalize.

    For periodic edges the counter equals :func:`schedule_cost` exactly.
    Mirror edges run the same steps on a reflected, padded buffer.
    """
    counter = ensure_counter(counter)
    counter.reset()
    return _factored_into(_signal(x), s, Edge.parse(edge), counter)


def _inverse_periodic(w: WaveletCoeffs, s: Schedule, counter: OpCounter) -> np.ndarray:
    return _inverse_periodic_rows(w.c, w.d, s, counter)


def _inverse_periodic_rows(c: np.ndarray, d: np.ndarray, s: Schedule, counter: OpCounter) -> np.ndarray:
    """Periodic synthesis along the last axis."""
    n = 2 * c.shape[-1]
    det = float(np.prod([st.determinant() for st in s.steps])) if s.steps else 1.0
    y = np.empty(c.shape[:-1] + (n,))
    k = np.arange(n // 2)
    y[..., (2 * k + s.c_offset) % n] = _scale(c, 1.0 / (s.scale_c * det), counter)
    y[..., (2 * k + s.d_offset) % n] = _scale(d, 1.0 / (s.scale_d * det), counter)
    for st in reversed(s.steps):
        apply_step(y, st, counter, inverse=True)
    return y


def _analysis_matrix(n: int, s: Schedule, edge: Edge) -> np.ndarray:
    cols = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        cols.append(_factored_into(e, s, edge, OpCounter()).interleaved())
    return np.array(cols).T


def idwt_factored(
    w: WaveletCoeffs,
    s: Schedule,
    edge: Edge | str = Edge.PERIODIZE,
    counter: OpCounter | None = None,
    *,
    best_effort: bool = False,
):
    """Invert :func:`dwt_factored`.

    Periodic edges are inverted exactly by running adjugate steps in reverse
    order; the product of step determinants and the output scales is folded
    into one scalar per channel. Mirror edges are not orthogonal and lose
    information at the boundary, so they raise :class:`NonInvertibleEdge`
    unless ``best_effort`` is set; then the analysis matrix is solved by
    least squares and ``(x, exact)`` is returned, where ``exact`` reports
    whether that matrix was well conditioned.
    """
    counter = ensure_counter(counter)
    counter.reset()
    edge = Edge.parse(edge)
    if not isinstance(w, WaveletCoeffs):
        w = WaveletCoeffs.from_interleaved(w)
    if edge is Edge.PERIODIZE:
        return _inverse_periodic(w, s, counter)
    if edge is Edge.EDGE_MATRICES:
        from .edges import edge_idwt

        return edge_idwt(w, s, counter)
    if not best_effort:
        raise NonInvertibleEdge("mirrored edges are not exactly invertible; pass best_effort=True")
    A = _analysis_matrix(len(w), s, edge)
    x, *_ = np.linalg.lstsq(A, w.interleaved(), rcond=None)
    return x, bool(np.linalg.cond(A) < 1e12)


# ---------------------------------------------------------------------------
# Multi-level


def _check_levels(n: int, levels: int) -> None:
    if levels < 1 or (n % (1 << levels)):
        raise BadLevelCount(f"length {n} is not divisible by 2^{levels}")


def multilevel(
    x, s: Schedule, levels: int, edge: Edge | str = Edge.PERIODIZE, counter: OpCounter | None = None
) -> MultilevelCoeffs:
    """Iterate the factored transform on the lowpass block ``levels`` times."""
    counter = ensure_counter(counter)
    counter.reset()
    x = _signal(x)
    _check_levels(len(x), levels)
    edge = Edge.parse(edge)
    details = []
    c = x
    for _ in range(levels):
        w = _factored_into(c, s, edge, counter)
        details.append(w.d)
        c = w.c
    return MultilevelCoeffs(c, details)


def imultilevel(tree: MultilevelCoeffs, s: Schedule, counter: OpCounter | None = None) -> np.ndarray:
    """Inverse of :func:`multilevel` for periodic edges."""
    counter = ensure_counter(counter)
    counter.reset()
    c = tree.coarse
    for d in reversed(tree.details):
        c = _inverse_periodic(WaveletCoeffs(c, d), s, counter)
    return c


# ---------------------------------------------------------------------------
# Signal I/O


def read_signal_csv(path: str | Path) -> np.ndarray:
    values = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line:
            values.append(float(line.split(",")[0]))
    return np.array(values)


def write_signal_csv(path: str | Path, x: Sequence[float]) -> None:
    Path(path).write_text("".join(f"{v!r}\n" for v in np.asarray(x, dtype=float).tolist()))


def read_signal_bin(path: str | Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < 8:
        raise ValidationError("binary signal is missing its length header")
    (n,) = struct.unpack("<Q", raw[:8])
    if len(raw) != 8 + 8 * n:
        raise ValidationError(f"binary signal declares {n} samples but holds {(len(raw) - 8) // 8}")
    return np.frombuffer(raw[8:], dtype="<f8").astype(float)


def write_signal_bin(path: str | Path, x: Sequence[float]) -> None:
    x = np.asarray(x, dtype="<f8")
    Path(path).write_bytes(struct.pack("<Q", len(x)) + x.tobytes())
