"""Factorization of two-channel filtering into rotation and lifting steps.

Every step is a 2-shift-invariant linear map on the data. A schedule applies
its steps in order, then reads the lowpass output at positions
``2k + c_offset`` and the highpass output at ``2k + d_offset``, each scaled
by a single scalar.

On the filter side a data step ``T`` maps the analysis filters by
``T^{-t}`` and the synthesis filters by ``T``. Reducing ``H`` and ``H~`` to
single points therefore yields the factorization.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import PivotFailure, UnsupportedZeroPattern, ValidationError
from .filters import FilterBank, FirFilter, Parity, alternating_flip

# Relative size below which a reduced coefficient counts as zero.
ZERO_TOL = 1e-9


class StepKind(enum.Enum):
    SO2 = "So2"
    HAT_LOWER = "HatLower"
    HAT_UPPER = "HatUpper"
    TILDE_SYM3 = "TildeSym3"
    BAR_MIXED = "BarMixed"


# ---------------------------------------------------------------------------
# 2-periodic banded operators on sequences indexed by Z


@dataclass(frozen=True)
class Banded:
    """Operator ``(A x)(i) = sum_t c[(i mod 2, t)] x(i + t)``."""

    entries: tuple[tuple[tuple[int, int], float], ...]

    @classmethod
    def from_dict(cls, d: dict) -> "Banded":
        return cls(tuple(sorted(((r % 2, t), float(c)) for (r, t), c in d.items() if c != 0.0)))

    def as_dict(self) -> dict:
        return dict(self.entries)

    def transpose(self) -> "Banded":
        out: dict = {}
        for (r, t), c in self.entries:
            key = ((r + t) % 2, -t)
            out[key] = out.get(key, 0.0) + c
        return Banded.from_dict(out)

    def scaled(self, s: float) -> "Banded":
        return Banded.from_dict({k: s * c for k, c in self.entries})

    def apply(self, seq: dict) -> dict:
        """Apply to a finitely supported sequence given as ``{index: value}``."""
        out: dict = {}
        for (r, t), c in self.entries:
            for j, v in seq.items():
                i = j - t
                if i % 2 == r:
                    out[i] = out.get(i, 0.0) + c * v
        return out

    def matrix(self, n: int) -> np.ndarray:
        """Dense periodized ``n x n`` matrix."""
        A = np.zeros((n, n))
        for (r, t), c in self.entries:
            for i in range(r, n, 2):
                A[i, (i + t) % n] += c
        return A


# ---------------------------------------------------------------------------
# Steps


@dataclass(frozen=True)
class RotationStep:
    """One elementary factor.

    ``shift`` is the absolute position of block starts modulo 2 (blocks sit
    at ``2j + shift``). The data-side actions are

    * ``So2``: pairs ``(u, v) -> (u - a v, a u + v)``;
    * ``HatLower``: first element of an ``m``-block ``-= a * last``;
    * ``HatUpper``: last element ``-= a * first``;
    * ``TildeSym3``: block ends ``-= a * middle`` (``m = 2q + 1``, so every
      target gets ``-a * (x[i-q] + x[i+q])``);
    * ``BarMixed``: pairs ``(u, v) -> (u - a v, b u + v)``.
    """

    kind: StepKind
    alpha: float
    shift: int = 0
    m: int = 2
    beta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))
        if not math.isfinite(self.alpha) or not math.isfinite(self.beta):
            raise ValidationError("step parameters must be finite")
        if self.kind in (StepKind.SO2, StepKind.BAR_MIXED) and self.m != 2:
            raise ValidationError(f"{self.kind.value} acts on pairs (m = 2)")
        if self.kind in (StepKind.HAT_LOWER, StepKind.HAT_UPPER) and (self.m < 2 or self.m % 2):
            raise ValidationError("hat steps need an even block size m >= 2")
        if self.kind is StepKind.TILDE_SYM3 and (self.m < 3 or self.m % 4 != 3):
            raise ValidationError("symmetric steps need block size m = 2q + 1 with q odd")
        if self.kind is StepKind.BAR_MIXED and abs(1.0 + self.alpha * self.beta) < 1e-10:
            raise ValidationError("BarMixed needs 1 + alpha*beta != 0")

    @property
    def phase(self) -> int:
        return self.shift % 2

    # Data-side kernel as a lift description: list of (target parity, offset, coeff)
    def kernel(self) -> Banded:
        p, a = self.phase, self.alpha
        q = p + 1
        if self.kind is StepKind.SO2:
            return Banded.from_dict({(p, 0): 1.0, (p, 1): -a, (q, 0): 1.0, (q, -1): a})
        if self.kind is StepKind.BAR_MIXED:
            return Banded.from_dict({(p, 0): 1.0, (p, 1): -a, (q, 0): 1.0, (q, -1): self.beta})
        if self.kind is StepKind.HAT_LOWER:
            return Banded.from_dict({(p, 0): 1.0, (p, self.m - 1): -a, (q, 0): 1.0})
        if self.kind is StepKind.HAT_UPPER:
            return Banded.from_dict({(p, 0): 1.0, (q, 0): 1.0, (q, -(self.m - 1)): -a})
        h = (self.m - 1) // 2
        return Banded.from_dict({(p, 0): 1.0, (p, h): -a, (p, -h): -a, (q, 0): 1.0})

    def determinant(self) -> float:
        """Per-block determinant; the exact inverse is ``adjugate / determinant``."""
        if self.kind is StepKind.SO2:
            return 1.0 + self.alpha**2
        if self.kind is StepKind.BAR_MIXED:
            return 1.0 + self.alpha * self.beta
        return 1.0

    def adjugate(self) -> Banded:
        p, a = self.phase, self.alpha
        q = p + 1
        if self.kind is StepKind.SO2:
            return Banded.from_dict({(p, 0): 1.0, (p, 1): a, (q, 0): 1.0, (q, -1): -a})
        if self.kind is StepKind.BAR_MIXED:
            return Banded.from_dict({(p, 0): 1.0, (p, 1): a, (q, 0): 1.0, (q, -1): -self.beta})
        return replace(self, alpha=-a).kernel()

    def inverse(self) -> Banded:
        return self.adjugate().scaled(1.0 / self.determinant())

    def mults_per_pair(self) -> int:
        return {StepKind.SO2: 2, StepKind.BAR_MIXED: 2}.get(self.kind, 1)

    def adds_per_pair(self) -> int:
        return {StepKind.SO2: 2, StepKind.BAR_MIXED: 2, StepKind.TILDE_SYM3: 2}.get(self.kind, 1)


def lift_step(target_parity: int, delta: int, coeff: float) -> RotationStep:
    """Step performing ``x[i] += coeff * x[i + delta]`` for ``i = target_parity (mod 2)``."""
    if delta % 2 == 0:
        raise ValidationError("lift offset must be odd")
    if delta > 0:
        return RotationStep(StepKind.HAT_LOWER, -coeff, shift=target_parity % 2, m=delta + 1)
    return RotationStep(StepKind.HAT_UPPER, -coeff, shift=(target_parity + 1) % 2, m=-delta + 1)


def symmetric_lift_step(target_parity: int, q: int, coeff: float) -> RotationStep:
    """Step performing ``x[i] += coeff * (x[i-q] + x[i+q])`` on one parity class."""
    return RotationStep(StepKind.TILDE_SYM3, -coeff, shift=target_parity % 2, m=2 * q + 1)


# ---------------------------------------------------------------------------
# Schedules


@dataclass(frozen=True)
class Schedule:
    """Ordered factorization plus output read-out.

    ``normalization`` is the orthonormal factor ``prod (1 + a_j^2)^(-1/2)``
    (1.0 for biorthogonal schedules). The applied output scales are
    ``scale_c`` and ``scale_d``; they equal ``+-normalization`` in the
    orthonormal case.
    """

    steps: tuple[RotationStep, ...]
    parity: Parity
    source_lengths: tuple[int, int]
    c_offset: int
    d_offset: int
    scale_c: float
    scale_d: float
    normalization: float = 1.0
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        if (self.c_offset - self.d_offset) % 2 == 0:
            raise ValidationError("lowpass and highpass slots must have opposite parity")

    @property
    def final_shift(self) -> int:
        """Index shift of the lowpass read-out: ``c_k = y[2 (k + final_shift) + phase]``."""
        return self.c_offset // 2

    @property
    def alphas(self) -> list[float]:
        return [s.alpha for s in self.steps]

    def operator(self) -> Banded:
        """Composite data-side operator (unscaled), mainly for tests."""
        out = Banded.from_dict({(0, 0): 1.0, (1, 0): 1.0})
        for s in self.steps:
            out = compose(s.kernel(), out)
        return out


def compose(a: Banded, b: Banded) -> Banded:
    """``a @ b`` for 2-periodic banded operators."""
    out: dict = {}
    for (r, t), c in a.entries:
        for (r2, t2), c2 in b.entries:
            if (r + t) % 2 == r2:
                key = (r, t + t2)
                out[key] = out.get(key, 0.0) + c * c2
    return Banded.from_dict(out)


def _trim(seq: dict, tol: float = ZERO_TOL) -> dict:
    if not seq:
        return seq
    big = max(abs(v) for v in seq.values())
    return {k: v for k, v in seq.items() if abs(v) > tol * big}


def _size(seq: dict) -> int:
    return max(seq) - min(seq) + 1 if seq else 0


def _analysis_map(step: RotationStep, seq: dict) -> dict:
    return step.inverse().transpose().apply(seq)


def _synthesis_map(step: RotationStep, seq: dict) -> dict:
    return step.kernel().apply(seq)


def _single_point(seq: dict, what: str, step_count: int) -> tuple[int, float]:
    seq = _trim(seq)
    if len(seq) != 1:
        raise PivotFailure(step_count, f"{what} did not reduce to one point (support {sorted(seq)})")
    (pos, val), = seq.items()
    return pos, val


def _snap_unit(s: float) -> float:
    return math.copysign(1.0, s) if abs(abs(s) - 1.0) <= 1e-12 else s


# ---------------------------------------------------------------------------
# Orthonormal case


def orthonormal_schedule(alphas: Sequence[float], offset: int = 0, name: str = "") -> Schedule:
    """Schedule of ``L/2`` rotations in the standard arrangement.

    Step ``k`` acts on pairs starting at ``offset + k - 1``. For ``L >= 4``
    the lowpass output sits on the first element of the last pair; for a
    single step it sits on the second element (the first-step rule zeroes
    the leading coefficient).
    """
    alphas = [float(a) for a in alphas]
    if not alphas:
        raise ValidationError("need at least one rotation parameter")
    k = len(alphas)
    steps = tuple(RotationStep(StepKind.SO2, a, shift=offset + j) for j, a in enumerate(alphas))
    R = 1.0 / math.prod(math.sqrt(1.0 + a * a) for a in alphas)
    last = offset + k - 1
    c_off, d_off = (last, last + 1) if k > 1 else (last + 1, last)
    sched = Schedule(steps, Parity.ORTHONORMAL, (2 * k, 2 * k), c_off, d_off, R, R, R, name)
    # Orient signs so that sum(H) > 0 and G is the alternating flip of H.
    low = _row_filter(sched, c_off, 1.0)
    sc = R if sum(low.values()) > 0 else -R
    flip_index = (c_off + d_off - 1) // 2
    h = FirFilter.from_mapping({n: sc * v for n, v in low.items()}, tol=0.0)
    g_flip = alternating_flip(h, flip_index, +1)
    g_raw = _row_filter(sched, d_off, 1.0)
    ref_pos = g_flip.offset
    sd = g_flip.at(ref_pos) / g_raw[ref_pos]
    return replace(sched, scale_c=sc, scale_d=math.copysign(R, sd))


def factor_orthonormal(bank: FilterBank) -> Schedule:
    """Rotation schedule reducing an orthonormal bank to one point per channel."""
    if bank.parity is not Parity.ORTHONORMAL:
        raise ValidationError("factor_orthonormal needs an orthonormal bank")
    L = bank.analysis_low.length()
    h = bank.analysis_low.as_mapping()
    g = bank.analysis_high.as_mapping()
    steps: list[RotationStep] = []
    for k in range(1, L // 2 + 1):
        h0 = min(h)
        h1 = max(h)
        if h1 != h0 + 2 * (L // 2 - k) + 1:
            raise PivotFailure(k, "filter did not shrink by two coefficients")
        first, second = h.get(h0, 0.0), h.get(h0 + 1, 0.0)
        scale = max(abs(v) for v in h.values())
        if k == L // 2 and k > 1:
            if abs(first) < 1e-14 * scale:
                raise PivotFailure(k, "leading coefficient vanishes")
            alpha = -second / first
        else:
            if abs(second) < 1e-14 * scale:
                raise PivotFailure(k, "second coefficient vanishes")
            alpha = first / second
        step = RotationStep(StepKind.SO2, alpha, shift=h0)
        steps.append(step)
        h = _trim(_analysis_map(step, h))
        g = _trim(_analysis_map(step, g))
    a, sc = _single_point(h, "lowpass", len(steps))
    b, sd = _single_point(g, "highpass", len(steps))
    R = 1.0 / math.prod(math.sqrt(1.0 + s.alpha**2) for s in steps)
    return Schedule(tuple(steps), Parity.ORTHONORMAL, (L, L), a, b, sc, sd, R, bank.name)


# ---------------------------------------------------------------------------
# Biorthogonal case


def _nearest_opposite(seq: dict, end: int, inward: int) -> int | None:
    lo, hi = min(seq), max(seq)
    j = end + inward
    while lo <= j <= hi:
        if (j - end) % 2 == 1 and j in seq:
            return j
        j += inward
    return None


def _solve_pivot(make, target_map, seq: dict, pos: int) -> float | None:
    """Parameter ``a`` making ``target_map(make(a), seq)[pos]`` vanish (affine in ``a``)."""
    v0 = target_map(make(0.0), seq).get(pos, 0.0)
    v1 = target_map(make(1.0), seq).get(pos, 0.0)
    slope = v1 - v0
    if abs(slope) < 1e-14 * max(abs(v) for v in seq.values()):
        return None
    return -v0 / slope


def _affine_analysis(step: RotationStep, seq: dict) -> dict:
    # The adjugate is affine in the step parameter; zero patterns match the exact map.
    return step.adjugate().transpose().apply(seq)


def _lift_candidates(h: dict, ht: dict):
    """Steps that annihilate one end coefficient of ``H`` or ``H~``."""
    for end, inward in ((min(h), 1), (max(h), -1)):
        j = _nearest_opposite(h, end, inward)
        if j is None:
            continue
        tp, delta = (end + 1) % 2, end - j
        make = lambda c, tp=tp, delta=delta: lift_step(tp, delta, c)
        c = _solve_pivot(make, _affine_analysis, h, end)
        if c is not None:
            yield "analysis", make(c)
    for end, inward in ((min(ht), 1), (max(ht), -1)):
        j = _nearest_opposite(ht, end, inward)
        if j is None:
            continue
        tp, delta = end % 2, j - end
        make = lambda c, tp=tp, delta=delta: lift_step(tp, delta, c)
        c = _solve_pivot(make, _synthesis_map, ht, end)
        if c is not None:
            yield "synthesis", make(c)


def _symmetric_candidates(h: dict, ht: dict):
    for which, seq, mapper in (("analysis", h, _affine_analysis), ("synthesis", ht, _synthesis_map)):
        end = min(seq)
        j = _nearest_opposite(seq, end, 1)
        if j is None:
            continue
        q = j - end
        tp = (end + 1) % 2 if which == "analysis" else end % 2
        make = lambda c, tp=tp, q=q: symmetric_lift_step(tp, q, c)
        c = _solve_pivot(make, mapper, seq, end)
        if c is not None:
            yield which, make(c)


def _reduce_pair(h: dict, ht: dict, candidates) -> list[RotationStep]:
    steps: list[RotationStep] = []
    while _size(h) > 1 or _size(ht) > 1:
        best = None
        for which, step in candidates(h, ht):
            h2 = _trim(_analysis_map(step, h))
            ht2 = _trim(_synthesis_map(step, ht))
            longer_first = 0 if (which == "analysis") == (_size(h) >= _size(ht)) else 1
            key = (_size(h2) + _size(ht2), longer_first, step.m)
            if best is None or key < best[0]:
                best = (key, step, h2, ht2)
        if best is None or best[0][0] >= _size(h) + _size(ht):
            if best is None:
                raise PivotFailure(len(steps) + 1, "no admissible pivot")
            raise UnsupportedZeroPattern(
                f"reduction stalled at step {len(steps) + 1} (lengths {_size(h)}, {_size(ht)})"
            )
        _, step, h, ht = best
        steps.append(step)
        if len(steps) > 4 * (len(h) + len(ht)) + 64:
            raise PivotFailure(len(steps), "reduction does not terminate")
    return steps


def _pair_block(step: RotationStep) -> tuple[int, np.ndarray] | None:
    """Pair start parity and 2x2 block of a lift acting inside one pair."""
    if step.kind not in (StepKind.HAT_LOWER, StepKind.HAT_UPPER) or step.m != 2:
        return None
    blk = np.eye(2)
    if step.kind is StepKind.HAT_LOWER:
        blk[0, 1] = -step.alpha
    else:
        blk[1, 0] = -step.alpha
    return step.phase, blk


def _merge_final_pair(steps: list[RotationStep]) -> list[RotationStep]:
    """Fuse two trailing lifts acting inside the same pair into one mixed step."""
    if len(steps) < 2:
        return steps
    a, b = _pair_block(steps[-2]), _pair_block(steps[-1])
    if a is None or b is None or a[0] != b[0]:
        return steps
    M = b[1] @ a[1]
    if abs(M[0, 1]) == 0.0 or abs(M[1, 0]) == 0.0:
        return steps
    bar = RotationStep(StepKind.BAR_MIXED, -M[0, 1] / M[0, 0], shift=a[0], m=2, beta=M[1, 0] / M[1, 1])
    return steps[:-2] + [bar]


def factor_biorthogonal(bank: FilterBank) -> Schedule:
    """Lifting schedule reducing ``(H, H~)`` to a pair of dual single points.

    Each step removes one end coefficient of ``H`` or of ``H~`` (both ends at
    once for symmetric banks), choosing the step that shortens the pair the
    most; ties go to the longer filter. Internal zeros are skipped by using
    the next coefficient of opposite parity, which widens the step's block.
    For even-even banks two trailing lifts inside one pair are fused into a
    mixed step whose diagonal remainder is absorbed into the output scales.
    """
    if not bank.parity.is_biorthogonal:
        raise ValidationError("factor_biorthogonal needs a biorthogonal bank")
    h = bank.analysis_low.as_mapping()
    ht = bank.synthesis_low.as_mapping()
    if bank.parity is Parity.SYMMETRIC_ODD_ODD:
        steps = _reduce_pair(h, ht, _symmetric_candidates)
    else:
        steps = _reduce_pair(h, ht, _lift_candidates)
    if bank.parity is Parity.EVEN_EVEN:
        steps = _merge_final_pair(steps)
    return _finish_schedule(bank, steps)


def _finish_schedule(bank: FilterBank, steps: Sequence[RotationStep]) -> Schedule:
    h = bank.analysis_low.as_mapping()
    g = bank.analysis_high.as_mapping()
    for s in steps:
        h = _trim(_analysis_map(s, h))
        g = _trim(_analysis_map(s, g))
    a, sc = _single_point(h, "lowpass", len(steps))
    b, sd = _single_point(g, "highpass", len(steps))
    return Schedule(
        tuple(steps), bank.parity, bank.lengths, a, b, _snap_unit(sc), _snap_unit(sd), 1.0, bank.name
    )


def factor(bank: FilterBank) -> Schedule:
    if bank.parity is Parity.ORTHONORMAL:
        return factor_orthonormal(bank)
    return factor_biorthogonal(bank)


# ---------------------------------------------------------------------------
# Schedule -> filters


def _row_filter(s: Schedule, slot: int, scale: float) -> dict:
    """Analysis filter read at ``slot``: ``scale * T^t delta_slot``."""
    seq = {slot: scale}
    for step in reversed(s.steps):
        seq = step.kernel().transpose().apply(seq)
    return _trim(seq, 1e-15)


def _column_filter(s: Schedule, slot: int, scale: float) -> dict:
    """Synthesis filter for ``slot``: ``T^{-1} delta_slot / scale``."""
    seq = {slot: 1.0 / scale}
    for step in reversed(s.steps):
        seq = step.inverse().apply(seq)
    return _trim(seq, 1e-15)


def schedule_to_filters(s: Schedule) -> FilterBank:
    """Recover ``(H, G, H~, G~)`` from a schedule."""
    H = FirFilter.from_mapping(_row_filter(s, s.c_offset, s.scale_c))
    G = FirFilter.from_mapping(_row_filter(s, s.d_offset, s.scale_d))
    Ht = FirFilter.from_mapping(_column_filter(s, s.c_offset, s.scale_c))
    Gt = FirFilter.from_mapping(_column_filter(s, s.d_offset, s.scale_d))
    flip_index = (s.c_offset + s.d_offset - 1) // 2
    if s.parity is Parity.ORTHONORMAL:
        return FilterBank(H, G, H, G, Parity.ORTHONORMAL, flip_index, s.name)
    parity = s.parity
    return FilterBank(H, G, Ht, Gt, parity, flip_index, s.name)


# ---------------------------------------------------------------------------
# Costs


def predicted_cost(s: Schedule, n: int) -> tuple[int, int]:
    """Multiply/add counts of the factored transform on ``n`` points.

    These are the closed forms per parity class; the biorthogonal forms
    besides even-even assume unit output scales.
    """
    if n % 2:
        raise ValidationError("n must be even")
    L, Lt = s.source_lengths
    p = s.parity
    if p is Parity.ORTHONORMAL:
        return ((L // 2 + 1) * n, (L // 2) * n)
    if p is Parity.ODD_ODD:
        v = (L + Lt) * n // 4
        return (v, v)
    if p is Parity.SYMMETRIC_ODD_ODD:
        J = (L + Lt) // 4
        return (J * n // 2, J * n)
    if p is Parity.EVEN_ODD:
        v = (L + Lt - 1) * n // 4
        return (v, v)
    return ((L + Lt + 6) * n // 4, (L + Lt + 2) * n // 4)


def reference_cost(bank_or_schedule, n: int) -> tuple[int, int]:
    """Convolution cost: each output costs ``len`` mults and ``len - 1`` adds."""
    L, Lt = bank_or_schedule.source_lengths if isinstance(bank_or_schedule, Schedule) else bank_or_schedule.lengths
    half = n // 2
    return (half * (L + Lt), half * (L + Lt - 2))


def schedule_cost(s: Schedule, n: int) -> tuple[int, int]:
    """Exact cost of the implemented factored transform on ``n`` periodic points."""
    half = n // 2
    mults = sum(st.mults_per_pair() for st in s.steps) * half
    adds = sum(st.adds_per_pair() for st in s.steps) * half
    mults += normalization_mults(s, n)
    return (mults, adds)


def normalization_mults(s: Schedule, n: int) -> int:
    half = n // 2
    return sum(half for sc in (s.scale_c, s.scale_d) if abs(sc) != 1.0)


def step_count_bound(parity: Parity, L: int, Lt: int) -> int:
    """Number of steps ``J`` per parity class."""
    if parity is Parity.ORTHONORMAL:
        return L // 2
    if parity is Parity.SYMMETRIC_ODD_ODD:
        return (L + Lt) // 4
    if parity is Parity.EVEN_ODD:
        return (L + Lt - 1) // 2
    return (L + Lt) // 2


# ---------------------------------------------------------------------------
# Text format


def format_schedule(s: Schedule) -> str:
    L, Lt = s.source_lengths
    lines = [
        f"parity {s.parity.value}",
        f"L {L}",
        f"Ltilde {Lt}",
        f"final_shift {s.final_shift}",
        f"R {s.normalization!r}",
        f"c_offset {s.c_offset}",
        f"d_offset {s.d_offset}",
        f"scale_c {s.scale_c!r}",
        f"scale_d {s.scale_d!r}",
    ]
    for st in s.steps:
        extra = f" {st.beta!r}" if st.kind is StepKind.BAR_MIXED else ""
        lines.append(f"{st.kind.value} {st.m} {st.alpha!r}{extra} {st.shift}")
    return "\n".join(lines) + "\n"


def parse_schedule(text: str) -> Schedule:
    header: dict[str, str] = {}
    steps: list[RotationStep] = []
    kinds = {k.value: k for k in StepKind}
    for raw in text.splitlines():
        parts = raw.split()
        if not parts:
            continue
        if parts[0] in kinds:
            kind = kinds[parts[0]]
            if kind is StepKind.BAR_MIXED:
                m, a, b, sh = int(parts[1]), float(parts[2]), float(parts[3]), int(parts[4])
            else:
                m, a, b, sh = int(parts[1]), float(parts[2]), 0.0, int(parts[3])
            steps.append(RotationStep(kind, a, sh, m, b))
        else:
            header[parts[0]] = parts[1]
    try:
        parity = Parity(header["parity"])
        return Schedule(
            tuple(steps),
            parity,
            (int(header["L"]), int(header["Ltilde"])),
            int(header["c_offset"]),
            int(header["d_offset"]),
            float(header["scale_c"]),
            float(header["scale_d"]),
            float(header["R"]),
        )
    except KeyError as exc:
        raise ValidationError(f"schedule text is missing {exc}") from exc


def schedule_from_lifts(lifts: Iterable[tuple[int, int, float]]) -> list[RotationStep]:
    """Convert ``(target parity, offset, coeff)`` lifts into steps."""
    return [lift_step(p, d, c) for p, d, c in lifts]
