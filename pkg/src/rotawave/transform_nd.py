"""Two- and three-dimensional tensor transforms.

The separable path runs the 1-D steps unnormalized along every axis and
scales each output once. The blocked path applies every step to all axes
at once on ``2 x 2`` squares or ``2 x 2 x 2`` cubes (``3 x 3`` neighbourhoods
for symmetric lifts), where shared products cut the multiply count:

* rotations in 2-D use the trigonometric form, 3 mults and 7 adds per square;
* rotations in 3-D apply that square kernel to two opposing planes and an
  unnormalized rotation to the four connecting lines, 14 mults and 22 adds
  per cube, plus one scaling per point;
* lifts cost 2 mults and 4 adds per square, 6 mults and 12 adds per cube;
* symmetric lifts cost 2 mults and 8 adds per square, 6 mults and 24 adds
  per cube, by caching the products of source samples.

Outputs use the split layout: along each axis the lowpass block comes first.
"""

from __future__ import annotations

import math
import struct
from itertools import product
from pathlib import Path

import numpy as np

from .counting import OpCounter, ensure_counter
from .errors import BadBlockAlignment, ValidationError
from .factorization import RotationStep, Schedule, StepKind
from .transform1d import Edge, dwt_reference
from .filters import FilterBank

# Below this |sin| or |cos| the square kernel's tangent factor is unreliable
# and the step is applied in separable trigonometric form instead.
TRIG_FALLBACK = 1e-8


def _grid(g, dim: int) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.ndim != dim or len(set(g.shape)) != 1:
        raise ValidationError(f"expected a cubic {dim}-D grid, got shape {g.shape}")
    n = g.shape[0]
    if n < 2 or n % 2:
        raise BadBlockAlignment(f"grid side must be even and at least 2, got {n}")
    if not np.all(np.isfinite(g)):
        raise ValidationError("grid contains non-finite samples")
    return g.copy()


def _periodic_only(edge) -> None:
    if Edge.parse(edge) is not Edge.PERIODIZE:
        raise ValidationError("multi-dimensional transforms support periodic edges only")


def _lift_form(step: RotationStep) -> tuple[int, int, float]:
    """``(target parity, source offset, coeff)`` of a hat step: ``x_t += coeff * x_{t+off}``."""
    if step.kind is StepKind.HAT_LOWER:
        return step.phase, step.m - 1, -step.alpha
    return (step.phase + 1) % 2, -(step.m - 1), -step.alpha


def _along(y: np.ndarray, axis: int, idx: np.ndarray) -> tuple:
    sel = [slice(None)] * y.ndim
    sel[axis] = idx
    return tuple(sel)


# ---------------------------------------------------------------------------
# 1-D steps along one axis (separable building block)


def _pair_rotate(y, axis, first, second, a, b, counter, *, trig=None):
    """``(u, v) -> (u - a v, b u + v)`` or, with ``trig = (c, s)``, a normalized rotation."""
    u = y[_along(y, axis, first)].copy()
    v = y[_along(y, axis, second)].copy()
    pairs = u.size
    if trig is None:
        y[_along(y, axis, first)] = u - a * v
        y[_along(y, axis, second)] = b * u + v
        counter.tally(2 * pairs, 2 * pairs)
    else:
        c, s = trig
        y[_along(y, axis, first)] = c * u - s * v
        y[_along(y, axis, second)] = s * u + c * v
        counter.tally(4 * pairs, 2 * pairs)


def _step_along(y: np.ndarray, axis: int, step: RotationStep, counter: OpCounter, inverse: bool = False) -> None:
    """Unnormalized step (or its adjugate) along one axis of a periodic grid."""
    n = y.shape[axis]
    p = step.phase
    first = np.arange(p, n, 2)
    second = (first + 1) % n
    sign = -1.0 if inverse else 1.0
    kind = step.kind
    if kind is StepKind.SO2:
        _pair_rotate(y, axis, first, second, sign * step.alpha, sign * step.alpha, counter)
        return
    if kind is StepKind.BAR_MIXED:
        _pair_rotate(y, axis, first, second, sign * step.alpha, sign * step.beta, counter)
        return
    if kind is StepKind.TILDE_SYM3:
        h = (step.m - 1) // 2
        c = -sign * step.alpha
        t = first
        lo = y[_along(y, axis, (t - h) % n)]
        hi = y[_along(y, axis, (t + h) % n)]
        y[_along(y, axis, t)] += c * (lo + hi)
        counter.tally(t.size * y.size // n, 2 * t.size * y.size // n)
        return
    tp, off, c = _lift_form(step)
    t = np.arange(tp, n, 2)
    y[_along(y, axis, t)] += sign * c * y[_along(y, axis, (t + off) % n)]
    counter.tally(y.size // 2, y.size // 2)


# ---------------------------------------------------------------------------
# Block kernels


def _trig(alpha: float) -> tuple[float, float]:
    r = math.hypot(1.0, alpha)
    return 1.0 / r, alpha / r


def _square_rotate(y, axes, first, second, alpha, counter):
    """Normalized rotation on both ``axes`` of every ``2 x 2`` square."""
    c, s = _trig(alpha)
    if abs(s) < TRIG_FALLBACK or abs(c) < TRIG_FALLBACK:
        for ax in axes:
            _pair_rotate(y, ax, first, second, 0.0, 0.0, counter, trig=(c, s))
        return
    a0, a1 = axes

    def at(i, j):
        sel = [slice(None)] * y.ndim
        sel[a0] = i
        sel[a1] = j
        return tuple(sel)

    def ix(i, j):
        sel = [np.arange(k) for k in y.shape]
        sel[a0] = i
        sel[a1] = j
        return np.ix_(*sel)

    x00 = y[ix(first, first)]
    x01 = y[ix(first, second)]
    x10 = y[ix(second, first)]
    x11 = y[ix(second, second)]
    cc, sc, tn = c * c, s * c, s / c
    d = cc * (x00 - x11) - sc * (x01 + x10)
    td = tn * d
    y[ix(first, first)] = d + x11
    y[ix(first, second)] = td + x01
    y[ix(second, first)] = td + x10
    y[ix(second, second)] = x00 - d
    counter.tally(3 * x00.size, 7 * x00.size)


def _ix(shape, sels: dict) -> tuple:
    full = [np.arange(k) for k in shape]
    for ax, idx in sels.items():
        full[ax] = idx
    return np.ix_(*full)


def _lift_block(y: np.ndarray, step: RotationStep, counter: OpCounter, inverse: bool) -> None:
    """Tensor lift on all axes; each target gets one product of a running sum."""
    n = y.shape[0]
    tp, off, c = _lift_form(step)
    if inverse:
        c = -c
    a = np.arange(tp, n, 2)
    b = (a + off) % n
    sh = y.shape
    if y.ndim == 2:
        g = {(i, j): y[_ix(sh, {0: (a, b)[i], 1: (a, b)[j]})] for i, j in product((0, 1), repeat=2)}
        # index 0 = target side, 1 = source side
        t = c * g[1, 1]
        y_01 = g[0, 1] + t
        y_10 = g[1, 0] + t
        y_00 = g[0, 0] + c * (g[0, 1] + y_10)
        for key, val in {(0, 1): y_01, (1, 0): y_10, (0, 0): y_00}.items():
            y[_ix(sh, {0: (a, b)[key[0]], 1: (a, b)[key[1]]})] = val
        counter.tally(2 * t.size, 4 * t.size)
        return
    g = {k: y[_ix(sh, {ax: (a, b)[k[ax]] for ax in range(3)})] for k in product((0, 1), repeat=3)}
    p = c * g[1, 1, 1]
    q = c * g[1, 1, 0]
    y_011 = g[0, 1, 1] + p
    y_101 = g[1, 0, 1] + p
    y_110 = g[1, 1, 0] + p
    w_010 = g[0, 1, 0] + q
    y_010 = w_010 + c * y_011
    y_001 = g[0, 0, 1] + c * (g[1, 0, 1] + y_011)
    y_100 = g[1, 0, 0] + c * (g[1, 1, 0] + y_101)
    y_000 = g[0, 0, 0] + c * (y_001 + g[1, 0, 0] + w_010)
    out = {(0, 1, 1): y_011, (1, 0, 1): y_101, (1, 1, 0): y_110, (0, 1, 0): y_010,
           (0, 0, 1): y_001, (1, 0, 0): y_100, (0, 0, 0): y_000}
    for k, val in out.items():
        y[_ix(sh, {ax: (a, b)[k[ax]] for ax in range(3)})] = val
    counter.tally(6 * p.size, 12 * p.size)


def _symmetric_block(y: np.ndarray, step: RotationStep, counter: OpCounter, inverse: bool) -> None:
    """Tensor symmetric lift: target samples gain ``c`` times both neighbours along each target axis.

    Products of pure source samples are formed once and reused by every
    neighbouring target (the cached values of the ``3 x 3`` kernel).
    """
    n = y.shape[0]
    h = (step.m - 1) // 2
    c = step.alpha if inverse else -step.alpha
    t = np.arange(step.phase, n, 2)
    s = np.arange((step.phase + 1) % 2, n, 2)
    pos = np.empty(n, dtype=int)
    pos[s] = np.arange(len(s))
    lo, hi = pos[(t - h) % n], pos[(t + h) % n]
    sh = y.shape

    def pair(v, ax):
        return np.take(v, lo, axis=ax) + np.take(v, hi, axis=ax)

    if y.ndim == 2:
        x_ss = y[_ix(sh, {0: s, 1: s})]
        x_ts = y[_ix(sh, {0: t, 1: s})]
        x_st = y[_ix(sh, {0: s, 1: t})]
        x_tt = y[_ix(sh, {0: t, 1: t})]
        P = c * x_ss
        y_ts = x_ts + pair(P, 0)
        y_st = x_st + pair(P, 1)
        # neighbours of (t, t): along axis 0 they are (s, t) samples, along axis 1 updated (t, s)
        y_tt = x_tt + c * (pair(x_st, 0) + pair(y_ts, 1))
        y[_ix(sh, {0: t, 1: s})] = y_ts
        y[_ix(sh, {0: s, 1: t})] = y_st
        y[_ix(sh, {0: t, 1: t})] = y_tt
        counter.tally(2 * P.size, 8 * P.size)
        return
    sets = (s, t)
    g = {k: y[_ix(sh, {ax: sets[k[ax]] for ax in range(3)})] for k in product((0, 1), repeat=3)}
    # key bit 1 = target along that axis
    P = c * g[0, 0, 0]
    Q = c * g[0, 0, 1]
    y_100 = g[1, 0, 0] + pair(P, 0)
    y_010 = g[0, 1, 0] + pair(P, 1)
    y_001 = g[0, 0, 1] + pair(P, 2)
    w_101 = g[1, 0, 1] + pair(Q, 0)
    y_101 = w_101 + c * pair(y_100, 2)
    y_110 = g[1, 1, 0] + c * (pair(g[0, 1, 0], 0) + pair(y_100, 1))
    y_011 = g[0, 1, 1] + c * (pair(g[0, 0, 1], 1) + pair(y_010, 2))
    z = pair(y_110, 2) + pair(g[0, 1, 1], 0) + pair(w_101, 1)
    y_111 = g[1, 1, 1] + c * z
    out = {(1, 0, 0): y_100, (0, 1, 0): y_010, (0, 0, 1): y_001, (1, 0, 1): y_101,
           (1, 1, 0): y_110, (0, 1, 1): y_011, (1, 1, 1): y_111}
    for k, val in out.items():
        y[_ix(sh, {ax: sets[k[ax]] for ax in range(3)})] = val
    counter.tally(6 * P.size, 24 * P.size)


def _blocked_step(y: np.ndarray, step: RotationStep, counter: OpCounter, inverse: bool) -> float:
    """Apply one step on all axes; return the determinant factor an inverse must divide by."""
    n = y.shape[0]
    kind = step.kind
    if kind is StepKind.SO2:
        first = np.arange(step.phase, n, 2)
        second = (first + 1) % n
        alpha = -step.alpha if inverse else step.alpha
        if y.ndim == 2:
            _square_rotate(y, (0, 1), first, second, alpha, counter)
            return 1.0
        _square_rotate(y, (1, 2), first, second, alpha, counter)
        _pair_rotate(y, 0, first, second, alpha, alpha, counter)
        return step.determinant() if inverse else 1.0
    if kind is StepKind.BAR_MIXED:
        for ax in range(y.ndim):
            _step_along(y, ax, step, counter, inverse)
        return step.determinant() ** y.ndim if inverse else 1.0
    if kind is StepKind.TILDE_SYM3:
        _symmetric_block(y, step, counter, inverse)
        return 1.0
    _lift_block(y, step, counter, inverse)
    return 1.0


def _blocked_gain(s: Schedule, ndim: int) -> list[float]:
    """Per-axis scale still owed after the blocked steps, for the c and d channels.

    Blocked rotations are normalized on every axis except axis 0 in 3-D.
    """
    out = []
    for ax in range(ndim):
        if s.parity.value == "orthonormal" and not (ndim == 3 and ax == 0):
            out.append((math.copysign(1.0, s.scale_c), math.copysign(1.0, s.scale_d)))
        else:
            out.append((s.scale_c, s.scale_d))
    return out


# ---------------------------------------------------------------------------
# Read-out and scaling


def _slots(s: Schedule, n: int) -> np.ndarray:
    k = np.arange(n // 2)
    return np.concatenate([(2 * k + s.c_offset) % n, (2 * k + s.d_offset) % n])


def _scale_grid(n: int, gains: list[tuple[float, float]]) -> np.ndarray:
    ndim = len(gains)
    half = n // 2
    scale = np.ones((n,) * ndim)
    for ax, (gc, gd) in enumerate(gains):
        vec = np.concatenate([np.full(half, gc), np.full(half, gd)])
        shape = [1] * ndim
        shape[ax] = n
        scale = scale * vec.reshape(shape)
    return scale


def _apply_scale(w: np.ndarray, scale: np.ndarray, counter: OpCounter) -> np.ndarray:
    counter.tally(int(np.count_nonzero(np.abs(scale) != 1.0)), 0)
    return w * scale


def _readout(y: np.ndarray, s: Schedule) -> np.ndarray:
    n = y.shape[0]
    idx = _slots(s, n)
    return y[np.ix_(*([idx] * y.ndim))]


def _writeback(w: np.ndarray, s: Schedule) -> np.ndarray:
    n = w.shape[0]
    idx = _slots(s, n)
    y = np.empty_like(w)
    y[np.ix_(*([idx] * w.ndim))] = w
    return y


# ---------------------------------------------------------------------------
# Public transforms


def _separable(g, s: Schedule, dim: int, counter: OpCounter) -> np.ndarray:
    y = _grid(g, dim)
    for ax in range(dim):
        for st in s.steps:
            _step_along(y, ax, st, counter)
    gains = [(s.scale_c, s.scale_d)] * dim
    return _apply_scale(_readout(y, s), _scale_grid(y.shape[0], gains), counter)


def _blocked(g, s: Schedule, dim: int, counter: OpCounter) -> np.ndarray:
    y = _grid(g, dim)
    for st in s.steps:
        _blocked_step(y, st, counter, inverse=False)
    return _apply_scale(_readout(y, s), _scale_grid(y.shape[0], _blocked_gain(s, dim)), counter)


def _inverse_blocked(w, s: Schedule, dim: int, counter: OpCounter) -> np.ndarray:
    w = _grid(w, dim)
    n = w.shape[0]
    det = 1.0
    if s.parity.value == "orthonormal":
        if dim == 3:
            det = math.prod(st.determinant() for st in s.steps)
    else:
        det = math.prod(st.determinant() ** dim for st in s.steps if st.kind is StepKind.BAR_MIXED)
    scale = _scale_grid(n, _blocked_gain(s, dim)) * det
    y = _writeback(_apply_scale(w, 1.0 / scale, counter), s)
    for st in reversed(s.steps):
        _blocked_step(y, st, counter, inverse=True)
    return y


def dwt2_separable(g, s: Schedule, edge=Edge.PERIODIZE, counter: OpCounter | None = None) -> np.ndarray:
    """Rows then columns with unnormalized steps, then one scaling per sample."""
    _periodic_only(edge)
    counter = ensure_counter(counter)
    counter.reset()
    return _separable(g, s, 2, counter)


def dwt3_separable(g, s: Schedule, edge=Edge.PERIODIZE, counter: OpCounter | None = None) -> np.ndarray:
    _periodic_only(edge)
    counter = ensure_counter(counter)
    counter.reset()
    return _separable(g, s, 3, counter)


def dwt2_blocked(g, s: Schedule, edge=Edge.PERIODIZE, counter: OpCounter | None = None) -> np.ndarray:
    """Square-kernel 2-D transform; equals :func:`dwt2_separable` up to rounding."""
    _periodic_only(edge)
    counter = ensure_counter(counter)
    counter.reset()
    return _blocked(g, s, 2, counter)


def dwt3_blocked(g, s: Schedule, edge=Edge.PERIODIZE, counter: OpCounter | None = None) -> np.ndarray:
    """Cube-kernel 3-D transform; equals :func:`dwt3_separable` up to rounding."""
    _periodic_only(edge)
    counter = ensure_counter(counter)
    counter.reset()
    return _blocked(g, s, 3, counter)


def idwt2_blocked(w, s: Schedule, edge=Edge.PERIODIZE, counter: OpCounter | None = None) -> np.ndarray:
    _periodic_only(edge)
    counter = ensure_counter(counter)
    counter.reset()
    return _inverse_blocked(w, s, 2, counter)


def idwt3_blocked(w, s: Schedule, edge=Edge.PERIODIZE, counter: OpCounter | None = None) -> np.ndarray:
    _periodic_only(edge)
    counter = ensure_counter(counter)
    counter.reset()
    return _inverse_blocked(w, s, 3, counter)


def dwt_nd_reference(g, bank: FilterBank, counter: OpCounter | None = None) -> np.ndarray:
    """Convolution oracle: :func:`dwt_reference` along every axis in turn."""
    counter = ensure_counter(counter)
    counter.reset()
    y = np.asarray(g, dtype=float).copy()
    for ax in range(y.ndim):
        moved = np.moveaxis(y, ax, -1)
        rows = moved.reshape(-1, moved.shape[-1])
        out = np.empty_like(rows)
        for i, row in enumerate(rows):
            sub = OpCounter()
            out[i] = dwt_reference(row, bank, Edge.PERIODIZE, sub).split()
            counter.tally(*sub.as_tuple())
        y = np.moveaxis(out.reshape(moved.shape), -1, ax)
    return y


# ---------------------------------------------------------------------------
# Predicted costs


def predicted_cost_nd(s: Schedule, n: int, dim: int, kind: str = "blocked") -> tuple[int, int]:
    """Closed-form cost on an ``n^dim`` grid per parity class.

    ``kind`` is ``"blocked"`` (the square/cube tables) or ``"separable"``.
    """
    if dim not in (2, 3):
        raise ValidationError("dim must be 2 or 3")
    L, Lt = s.source_lengths
    N = n**dim
    p = s.parity.value
    J = (L + Lt) // 4
    from fractions import Fraction as F

    tables = {
        (2, "blocked"): {
            "orthonormal": (F(3, 8) * L, F(7, 8) * L),
            "odd-odd": (F(L + Lt, 4), F(L + Lt, 2)),
            "even-odd": (F(L + Lt - 1, 4), F(L + Lt - 1, 2)),
            "even-even": (F(L + Lt + 10, 4), F(L + Lt + 2, 2)),
            "symmetric-odd-odd": (F(J, 2), F(9, 4) * J),
        },
        (2, "separable"): {
            "orthonormal": (F(L + 1), F(L)),
            "odd-odd": (F(L + Lt, 2), F(L + Lt, 2)),
            "even-odd": (F(L + Lt - 1, 2), F(L + Lt - 1, 2)),
            "even-even": (F(L + Lt + 4, 2), F(L + Lt + 2, 2)),
            "symmetric-odd-odd": (F(J), F(2 * J)),
        },
        (3, "blocked"): {
            "orthonormal": (F(7, 8) * L + 1, F(11, 8) * L),
            "odd-odd": (F(3, 8) * (L + Lt), F(3, 4) * (L + Lt)),
            "even-odd": (F(3, 8) * (L + Lt - 1), F(3, 4) * (L + Lt - 1)),
            "even-even": (F(3, 8) * (L + Lt + F(14, 3)), F(3, 4) * (L + Lt)),
            "symmetric-odd-odd": (F(3, 4) * J, F(3 * J)),
        },
        (3, "separable"): {
            "orthonormal": (F(3, 2) * L + 1, F(3, 2) * L),
            "odd-odd": (F(3, 4) * (L + Lt), F(3, 4) * (L + Lt)),
            "even-odd": (F(3, 4) * (L + Lt - 1), F(3, 4) * (L + Lt - 1)),
            "even-even": (F(3, 4) * (L + Lt + F(10, 3)), F(3, 4) * (L + Lt + 2)),
            "symmetric-odd-odd": (F(3, 2) * J, F(3 * J)),
        },
    }
    try:
        m, a = tables[dim, kind][p]
    except KeyError:
        raise ValidationError(f"no cost table for {dim}-D {kind}") from None
    return int(m * N), int(a * N)


def reference_cost_nd(bank_or_schedule, n: int, dim: int) -> tuple[int, int]:
    """Convolution cost ``dim * n^(dim-1)`` times the 1-D convolution cost."""
    from .factorization import reference_cost

    m, a = reference_cost(bank_or_schedule, n)
    lines = dim * n ** (dim - 1)
    return m * lines, a * lines


# ---------------------------------------------------------------------------
# Grid I/O


def read_grid(path: str | Path) -> np.ndarray:
    """Raw little-endian float64 grid behind a header of ``ndim`` then each dimension, all u64."""
    raw = Path(path).read_bytes()
    if len(raw) < 8:
        raise ValidationError("grid file is missing its header")
    (ndim,) = struct.unpack("<Q", raw[:8])
    head = 8 * (1 + ndim)
    if ndim < 1 or len(raw) < head:
        raise ValidationError("grid file has a truncated header")
    dims = struct.unpack(f"<{ndim}Q", raw[8:head])
    count = math.prod(dims)
    if len(raw) != head + 8 * count:
        raise ValidationError(f"grid declares {dims} but holds {(len(raw) - head) // 8} values")
    return np.frombuffer(raw[head:], dtype="<f8").astype(float).reshape(dims)


def write_grid(path: str | Path, g) -> None:
    g = np.ascontiguousarray(g, dtype="<f8")
    Path(path).write_bytes(struct.pack(f"<{g.ndim + 1}Q", g.ndim, *g.shape) + g.tobytes())
