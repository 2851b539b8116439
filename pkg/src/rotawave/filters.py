"""FIR filters, two-channel filter banks and the relations between them."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import NoConvergence, PreconditionFailure, ValidationError


class Parity(enum.Enum):
    """Length-parity class of a filter bank."""

    ORTHONORMAL = "orthonormal"
    ODD_ODD = "odd-odd"
    SYMMETRIC_ODD_ODD = "symmetric-odd-odd"
    EVEN_ODD = "even-odd"
    EVEN_EVEN = "even-even"

    @property
    def is_biorthogonal(self) -> bool:
        return self is not Parity.ORTHONORMAL


@dataclass(frozen=True)
class FirFilter:
    """Finite filter; coefficient ``i`` sits at time ``offset + i``."""

    coeffs: tuple[float, ...]
    offset: int = 0

    def __post_init__(self):
        c = tuple(float(v) for v in self.coeffs)
        if not c:
            raise ValidationError("filter must have at least one coefficient")
        if not all(math.isfinite(v) for v in c):
            raise ValidationError("filter coefficients must be finite")
        if c[0] == 0.0 or c[-1] == 0.0:
            raise ValidationError("filter support must be trimmed (nonzero end coefficients)")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "offset", int(self.offset))

    @classmethod
    def from_mapping(cls, values: Mapping[int, float], tol: float = 0.0) -> "FirFilter":
        """Build from ``{time: value}``, dropping entries with ``|value| <= tol``."""
        kept = {n: float(v) for n, v in values.items() if abs(v) > tol}
        if not kept:
            raise ValidationError("filter has no nonzero coefficient")
        lo, hi = min(kept), max(kept)
        return cls(tuple(kept.get(n, 0.0) for n in range(lo, hi + 1)), lo)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coeffs)

    def length(self) -> int:
        return len(self.coeffs)

    @property
    def support(self) -> tuple[int, int]:
        return (self.offset, self.offset + len(self.coeffs) - 1)

    def at(self, n: int) -> float:
        i = n - self.offset
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else 0.0

    def as_mapping(self) -> dict[int, float]:
        return {self.offset + i: v for i, v in enumerate(self.coeffs) if v != 0.0}

    def times(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + len(self.coeffs))

    def shifted(self, k: int) -> "FirFilter":
        return FirFilter(self.coeffs, self.offset + k)

    def scaled(self, s: float) -> "FirFilter":
        return FirFilter(tuple(s * v for v in self.coeffs), self.offset)

    def moment(self, p: int, center: float = 0.0) -> float:
        return math.fsum(v * (n - center) ** p for n, v in zip(self.times(), self.coeffs))

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        c = self.array
        return bool(np.max(np.abs(c - c[::-1])) <= tol * np.max(np.abs(c)))

    def allclose(self, other: "FirFilter", tol: float) -> bool:
        lo = min(self.offset, other.offset)
        hi = max(self.support[1], other.support[1])
        return all(abs(self.at(n) - other.at(n)) <= tol for n in range(lo, hi + 1))


def alternating_flip(f: FirFilter, flip_index: int, sign: int) -> FirFilter:
    """Return ``n -> sign * (-1)**n * f(2N+1-n)``."""
    vals = {}
    for n_src, v in f.as_mapping().items():
        n = 2 * flip_index + 1 - n_src
        vals[n] = sign * (-1) ** (n % 2) * v
    return FirFilter.from_mapping(vals)


def highpass_from_lowpass(
    lowpass: FirFilter,
    dual_lowpass: FirFilter,
    flip_index: int,
    orthonormal: bool | None = None,
) -> tuple[FirFilter, FirFilter]:
    """Conjugate highpass pair ``(G, G~)`` by alternating flip.

    Orthonormal banks use ``G(n) = (-1)^n H(2N+1-n)`` and ``G~ = G``.
    Biorthogonal banks use ``G(n) = (-1)^(n+1) H~(2N+1-n)`` and
    ``G~(n) = (-1)^(n+1) H(2N+1-n)``. When ``orthonormal`` is None it is
    inferred from ``dual_lowpass == lowpass``.
    """
    if orthonormal is None:
        orthonormal = lowpass == dual_lowpass
    if orthonormal:
        g = alternating_flip(lowpass, flip_index, +1)
        return g, g
    return (
        alternating_flip(dual_lowpass, flip_index, -1),
        alternating_flip(lowpass, flip_index, -1),
    )


def double_shift_residual(a: FirFilter, b: FirFilter) -> float:
    """``max_k |sum_n a(n) b(n+2k) - delta(k)|`` over all k with overlap."""
    am, bm = a.as_mapping(), b.as_mapping()
    kmin = (a.offset - b.support[1]) // 2 - 1
    kmax = (a.support[1] - b.offset) // 2 + 1
    worst = 0.0
    for k in range(kmin, kmax + 1):
        s = math.fsum(v * bm.get(n + 2 * k, 0.0) for n, v in am.items())
        worst = max(worst, abs(s - (1.0 if k == 0 else 0.0)))
    return worst


def vanishing_moments(f: FirFilter, tol: float, start: int = 0, center: float = 0.0) -> int:
    """Count consecutive vanishing moments ``p = start, start+1, ...``."""
    if tol <= 0:
        raise ValidationError("tol must be positive")
    count = 0
    p = start
    # Beyond the filter length the moment sequence cannot keep vanishing.
    while p < start + f.length() + 1 and abs(f.moment(p, center)) <= tol:
        count += 1
        p += 1
    return count


def free_moment_check(h: FirFilter, M: int, tol: float, center: float = 0.0) -> bool:
    """Check that moment ``M+1`` of a lowpass filter vanishes when 1..M do.

    Raises :class:`PreconditionFailure` when some moment ``1..M`` is nonzero.
    The tolerance for moment ``M+1`` is scaled by the support radius, since
    coefficient errors grow by one power of ``|n|`` per moment order.
    """
    if M < 1 or M % 2 == 0:
        raise ValidationError("M must be a positive odd integer")
    for p in range(1, M + 1):
        m = h.moment(p, center)
        if abs(m) > tol:
            raise PreconditionFailure(f"moment {p} is {m:.3e}, not zero")
    radius = max(abs(n - center) for n in h.times())
    return abs(h.moment(M + 1, center)) <= tol * max(1.0, radius)


def classify_parity(low: FirFilter, dual_low: FirFilter) -> Parity:
    if low == dual_low:
        return Parity.ORTHONORMAL
    la, lb = low.length() % 2, dual_low.length() % 2
    if la == 1 and lb == 1:
        if low.is_symmetric() and dual_low.is_symmetric():
            return Parity.SYMMETRIC_ODD_ODD
        return Parity.ODD_ODD
    if la == 0 and lb == 0:
        return Parity.EVEN_EVEN
    return Parity.EVEN_ODD


def _orthonormal_compatible(declared: Parity, low: FirFilter, dual_low: FirFilter) -> bool:
    if declared is Parity.ORTHONORMAL:
        return low == dual_low and low.length() % 2 == 0
    return classify_parity(low, dual_low) is declared


@dataclass(frozen=True)
class FilterBank:
    """Analysis/synthesis quadruple with its parity class and flip index."""

    analysis_low: FirFilter
    analysis_high: FirFilter
    synthesis_low: FirFilter
    synthesis_high: FirFilter
    parity: Parity
    flip_index: int
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if not _orthonormal_compatible(self.parity, self.analysis_low, self.synthesis_low):
            raise ValidationError(
                f"declared parity {self.parity.value} does not match filter lengths "
                f"({self.analysis_low.length()}, {self.synthesis_low.length()})"
            )

    @classmethod
    def orthonormal(cls, lowpass: FirFilter, flip_index: int | None = None, name: str = "") -> "FilterBank":
        if flip_index is None:
            flip_index = default_flip_index(lowpass, lowpass)
        g, _ = highpass_from_lowpass(lowpass, lowpass, flip_index, orthonormal=True)
        return cls(lowpass, g, lowpass, g, Parity.ORTHONORMAL, flip_index, name)

    @classmethod
    def biorthogonal(
        cls,
        lowpass: FirFilter,
        dual_lowpass: FirFilter,
        flip_index: int | None = None,
        name: str = "",
    ) -> "FilterBank":
        if flip_index is None:
            flip_index = default_flip_index(lowpass, dual_lowpass)
        g, gt = highpass_from_lowpass(lowpass, dual_lowpass, flip_index, orthonormal=False)
        parity = classify_parity(lowpass, dual_lowpass)
        if parity is Parity.ORTHONORMAL:
            raise ValidationError("identical lowpass filters: use FilterBank.orthonormal")
        return cls(lowpass, g, dual_lowpass, gt, parity, flip_index, name)

    @property
    def lengths(self) -> tuple[int, int]:
        return (self.analysis_low.length(), self.synthesis_low.length())


def default_flip_index(low: FirFilter, dual_low: FirFilter) -> int:
    """Flip index placing the highpass support just after the common center.

    The alternating flip mirrors ``H~`` about ``N + 1/2``. Choosing ``N``
    as the floor of the common center makes the highpass center land one
    sample after the lowpass center.
    """
    center = 0.5 * (dual_low.support[0] + dual_low.support[1])
    return int(math.floor(center))


# ---------------------------------------------------------------------------
# Filter design from vanishing moments


def _moment_residual(alphas: np.ndarray, n_high: int, n_low: int, center: float | None = None) -> np.ndarray:
    from .factorization import orthonormal_schedule, schedule_to_filters

    L = 2 * len(alphas)
    bank = schedule_to_filters(orthonormal_schedule(alphas))
    h, g = bank.analysis_low, bank.analysis_high
    center = h.offset + (L / 2 - 1 if center is None else center)
    # Dividing moment p by radius**p keeps the equations comparably scaled.
    radius = L / 2
    res = [g.moment(p, center) / radius**p for p in range(n_high)]
    res += [h.moment(p, center) / radius**p for p in range(1, n_low + 1)]
    return np.asarray(res)


def solve_filter_by_moments(
    L: int,
    highpass_moments: int,
    lowpass_moments: int = 0,
    seeds: Sequence[Sequence[float]] | None = None,
    n_random: int = 64,
    rng: np.random.Generator | None = None,
    tol: float = 1e-9,
    center: float | None = None,
):
    """Find rotation parameters whose filter has the requested moments.

    Unknowns are the ``L/2`` rotation parameters; equations are the highpass
    moments ``0..highpass_moments-1`` and the lowpass moments
    ``1..lowpass_moments`` about ``center``, counted from the first tap
    (default ``L/2 - 1``). Each seed is
    refined by a damped least-squares Newton iteration; explicit seeds are
    tried first, then ``n_random`` uniform draws in ``[-3, 3]^(L/2)``.
    Returns the orthonormal schedule of the first converged seed.
    """
    from scipy.optimize import least_squares

    from .factorization import orthonormal_schedule

    if L < 2 or L % 2:
        raise ValidationError("L must be a positive even integer")
    k = L // 2
    if highpass_moments + math.ceil(lowpass_moments / 2) > k:
        raise ValidationError("moment request exceeds the L/2 degrees of freedom")
    if highpass_moments + lowpass_moments == 0:
        raise ValidationError("request at least one moment")
    rng = np.random.default_rng(0) if rng is None else rng
    starts = [np.asarray(s, dtype=float) for s in (seeds or [])]
    starts += list(rng.uniform(-3.0, 3.0, size=(n_random, k)))
    best = math.inf
    for x0 in starts:
        if x0.shape != (k,):
            raise ValidationError(f"seed must have {k} entries")
        fun = lambda a: _moment_residual(a, highpass_moments, lowpass_moments, center)
        n_eq = highpass_moments + lowpass_moments
        method = "lm" if n_eq >= k else "trf"
        try:
            sol = least_squares(fun, x0, method=method, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
        except (ValueError, FloatingPointError):
            continue
        r = float(np.max(np.abs(sol.fun)))
        best = min(best, r)
        if r <= tol and np.all(np.isfinite(sol.x)):
            return orthonormal_schedule(sol.x)
    raise NoConvergence("moment system did not converge from any seed", best)


# ---------------------------------------------------------------------------
# Text format


def format_filter(name: str, f: FirFilter) -> str:
    lines = [f"name {name}", f"offset {f.offset}"]
    lines += [repr(v) for v in f.coeffs]
    return "\n".join(lines) + "\n"


def parse_filter(text: str) -> tuple[str, FirFilter]:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if len(lines) < 3 or not lines[0].startswith("name") or not lines[1].startswith("offset"):
        raise ValidationError("filter text needs 'name', 'offset' and coefficient lines")
    name = lines[0][4:].strip()
    try:
        offset = int(lines[1].split()[1])
        coeffs = [float(v) for v in lines[2:]]
    except (IndexError, ValueError) as exc:
        raise ValidationError(f"bad filter text: {exc}") from exc
    return name, FirFilter(tuple(coeffs), offset)


def as_filter(values: Iterable[float], offset: int = 0) -> FirFilter:
    return FirFilter(tuple(values), offset)
