"""Boundary edge matrices for orthonormal factored transforms.

On a finite signal the interior steps are applied only to pairs whose two
samples are still exact. The ``L/2 - 1`` samples at each end that miss a
step are the edge state. A small matrix per side maps that state to the
edge coefficients so that

* the lowpass rows continue low-degree polynomials exactly: for
  ``x(j) = j^p`` the edge ``c`` values lie on the same polynomial as the
  interior ones;
* each highpass row annihilates monomials up to a chosen count.

Highpass rows keep some freedom; it is fixed by a grid search minimizing
``||E||_1 + ||E^-1||_1`` (maximum column sum norm).

Rows and columns of both matrices run from the edge inward. Edge values
and the interior use unnormalized steps; the output scales are applied
afterwards, as for the periodic transform.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .counting import OpCounter, ensure_counter
from .errors import (
    EdgeMatricesUnavailable,
    InfeasibleSpec,
    SignalTooShort,
    SingularConstraintSystem,
    ValidationError,
)
from .factorization import Schedule, StepKind, factor
from .filters import FilterBank, Parity


@dataclass(frozen=True)
class GridSpec:
    """Search lattice ``origin + k * size`` restricted to ``[-radius, radius]``."""

    size: float
    origin: float | None = None
    radius: float = 10.5

    def points(self) -> np.ndarray:
        origin = self.size / 2 if self.origin is None else self.origin
        lo = int(np.ceil((-self.radius - origin) / self.size - 1e-9))
        hi = int(np.floor((self.radius - origin) / self.size + 1e-9))
        return origin + self.size * np.arange(lo, hi + 1)


@dataclass(frozen=True)
class EdgeSpec:
    """Constraints for one filter.

    ``left_moments[i]`` is the number of vanishing moments on the ``i``-th
    highpass edge output counted from the left end; ``right_moments`` counts
    from the right end inward.
    """

    poly_degree: int
    left_moments: tuple[int, ...]
    right_moments: tuple[int, ...]
    left_grid: GridSpec = GridSpec(0.1)
    right_grid: GridSpec = GridSpec(0.1)


# Constraint sets and search grids that produce the published matrices.
EDGE_SPECS: dict[str, EdgeSpec] = {
    "daub6": EdgeSpec(1, (1,), (1,)),
    "coif6": EdgeSpec(1, (1,), (1,)),
    "daub8": EdgeSpec(2, (1, 2), (2,), GridSpec(1.0)),
    "coif8": EdgeSpec(2, (1, 2), (2,), GridSpec(1.0)),
    "daub10": EdgeSpec(3, (2, 3), (2, 3), GridSpec(1.0), GridSpec(1.0)),
    "daub12": EdgeSpec(4, (2, 3, 4), (3, 4), GridSpec(3.0, -1.0), GridSpec(1.0)),
    "coif12": EdgeSpec(4, (2, 3, 4), (3, 4), GridSpec(3.0, -1.0), GridSpec(1.0)),
}


@dataclass(frozen=True)
class EdgeSide:
    """One side: the matrix, its inverse and the labels of its rows."""

    matrix: np.ndarray
    inverse: np.ndarray
    labels: tuple[str, ...]
    free_params: tuple[float, ...]


@dataclass(frozen=True)
class EdgeOperatorSet:
    left: EdgeSide
    right: EdgeSide
    schedule: Schedule
    spec: EdgeSpec
    bounds: dict = field(default_factory=dict, compare=False)

    @property
    def size(self) -> int:
        return self.left.matrix.shape[0]


# ---------------------------------------------------------------------------
# Partial interior rotations


def _orthonormal_schedule(bank_or_schedule) -> Schedule:
    s = bank_or_schedule if isinstance(bank_or_schedule, Schedule) else factor(bank_or_schedule)
    if s.parity is not Parity.ORTHONORMAL or any(st.kind is not StepKind.SO2 for st in s.steps):
        raise EdgeMatricesUnavailable("edge matrices are defined for orthonormal rotation schedules only")
    return s


def _phase(s: Schedule, shift: int) -> int:
    """Parity relative to the first step, so every schedule starts on even pairs."""
    return (shift - s.steps[0].shift) % 2


def _pair_plan(s: Schedule, n: int) -> tuple[list[np.ndarray], np.ndarray]:
    """Pairs each step may rotate on ``[0, n)`` and the final exactness mask.

    A pair is rotated only when it lies inside the signal and both samples
    are still exact; otherwise both samples become edge samples.
    """
    valid = np.ones(n, dtype=bool)
    plan = []
    for st in s.steps:
        phase = _phase(s, st.shift)
        first = np.arange(phase, n, 2)
        if phase == 1:
            valid[0] = False
        inside = first + 1 < n
        valid[first[~inside]] = False
        first = first[inside]
        ok = valid[first] & valid[first + 1]
        valid[first[~ok]] = False
        valid[first[~ok] + 1] = False
        plan.append(first[ok])
    return plan, valid


def _rotate_pairs(y: np.ndarray, s: Schedule, plan, counter: OpCounter, inverse: bool = False) -> None:
    steps = list(zip(s.steps, plan))
    for st, first in reversed(steps) if inverse else steps:
        a = -st.alpha if inverse else st.alpha
        u, v = y[first].copy(), y[first + 1].copy()
        y[first] = u - a * v
        y[first + 1] = a * u + v
        counter.tally(2 * u.size, 2 * u.size)


def edge_positions(s: Schedule, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Edge sample positions, each ordered from the end inward."""
    _, valid = _pair_plan(s, n)
    bad = np.flatnonzero(~valid)
    left = bad[bad < n // 2]
    right = bad[bad >= n // 2][::-1]
    return left, right


def _state_matrix(s: Schedule, n: int) -> tuple[np.ndarray, np.ndarray]:
    plan, valid = _pair_plan(s, n)
    Y = np.eye(n)
    _rotate_pairs(Y, s, plan, OpCounter())
    return Y, valid


# ---------------------------------------------------------------------------
# Construction


def _work_length(s: Schedule, degree: int) -> int:
    L = 2 * len(s.steps)
    return 4 * L + 4 * degree + 8


def _monomials(n: int, degree: int, from_right: bool) -> np.ndarray:
    j = np.arange(n, dtype=float)
    if from_right:
        j = (n - 1) - j
    return np.array([j**p for p in range(degree + 1)])


def _interior_poly_values(yv, c_pos, edge_c, degree):
    """Values at ``edge_c`` of the polynomial through the exact interior ``c`` samples."""
    P = np.polynomial.Polynomial.fit(c_pos, yv[c_pos], degree)
    return P(edge_c)


def _side_constraints(s: Schedule, spec: EdgeSpec, side: str):
    n = _work_length(s, spec.poly_degree)
    Y, valid = _state_matrix(s, n)
    left, right = edge_positions(s, n)
    pos = left if side == "left" else right
    m = len(pos)
    cpar = _phase(s, s.c_offset)
    c_pos = np.array([q for q in range(n) if valid[q] and q % 2 == cpar])
    mons = _monomials(n, max(spec.poly_degree, m), side == "right")
    A = Y[pos]
    return n, Y, pos, m, cpar, c_pos, mons, A


def _objective(E: np.ndarray) -> np.ndarray:
    """Sum of 1-norms of a batch of matrices and their inverses (``inf`` when singular)."""
    out = np.full(E.shape[0], np.inf)
    det = np.linalg.det(E)
    scale = np.prod(np.abs(E).sum(axis=2), axis=1)
    ok = np.abs(det) > 1e-12 * np.maximum(scale, 1e-300)
    if np.any(ok):
        inv = np.linalg.inv(E[ok])
        out[ok] = np.abs(E[ok]).sum(axis=1).max(axis=1) + np.abs(inv).sum(axis=1).max(axis=1)
    return out


def _side_system(s: Schedule, spec: EdgeSpec, side: str):
    """Fixed rows, per-row free-parameter bases and row labels of one side."""
    n, Y, pos, m, cpar, c_pos, mons, A = _side_constraints(s, spec, side)
    moments = spec.left_moments if side == "left" else spec.right_moments
    is_c = [q % 2 == cpar for q in pos]
    n_d = m - sum(is_c)
    if len(moments) != n_d:
        raise InfeasibleSpec(f"{side} edge has {n_d} highpass outputs but {len(moments)} moment counts were given")
    if spec.poly_degree + 1 != m:
        raise InfeasibleSpec(f"lowpass rows need polynomial degree {m - 1}, got {spec.poly_degree}")

    Am = A @ mons[: spec.poly_degree + 1].T  # edge state of each monomial
    base = np.zeros((m, m))
    labels = []
    blocks = []  # (row, basis): row = params @ basis
    ci = di = 0
    for r, q in enumerate(pos):
        if is_c[r]:
            targets = [_interior_poly_values(Y @ mons[p], c_pos, np.array([q]), p)[0] for p in range(spec.poly_degree + 1)]
            try:
                base[r] = np.linalg.solve(Am.T, np.array(targets))
            except np.linalg.LinAlgError as exc:
                raise SingularConstraintSystem(f"lowpass row {r} on the {side} edge is not determined") from exc
            labels.append(f"c{ci}")
            ci += 1
            continue
        k = moments[di]
        if k >= m:
            raise InfeasibleSpec(f"{k} vanishing moments on a {m}-point edge make the matrix singular")
        Mk = (A @ mons[:k].T).T  # moment p of each edge column
        dep, free = list(range(k)), list(range(k, m))
        Md = Mk[:, dep]
        if k and abs(np.linalg.det(Md)) < 1e-12 * max(1.0, np.abs(Md).max()) ** k:
            raise SingularConstraintSystem(f"highpass row {r} on the {side} edge has dependent moments")
        # edge-most entries are solved from the moment equations, the rest are free
        basis = np.zeros((len(free), m))
        for i, f in enumerate(free):
            basis[i, f] = 1.0
            if k:
                basis[i, dep] = -np.linalg.solve(Md, Mk[:, f])
        blocks.append((r, basis))
        labels.append(f"d{di}")
        di += 1
    return base, blocks, tuple(labels)


def assemble_side(base: np.ndarray, blocks, params) -> np.ndarray:
    """Edge matrix for given free parameters (a batch when ``params`` is 2-D)."""
    params = np.asarray(params, dtype=float)
    batch = params.ndim == 2
    P = params if batch else params[None]
    E = np.broadcast_to(base, (len(P),) + base.shape).copy()
    col = 0
    for r, b in blocks:
        E[:, r, :] = P[:, col : col + b.shape[0]] @ b
        col += b.shape[0]
    return E if batch else E[0]


def _build_side(s: Schedule, spec: EdgeSpec, side: str) -> EdgeSide:
    base, blocks, labels = _side_system(s, spec, side)
    grid = spec.left_grid if side == "left" else spec.right_grid
    dims = sum(b.shape[0] for _, b in blocks)
    if dims == 0:
        return EdgeSide(base, np.linalg.inv(base), labels, ())
    best_val, best_t = np.inf, None
    for chunk in _chunks(grid.points(), dims):
        vals = _objective(assemble_side(base, blocks, chunk))
        i = int(np.argmin(vals))
        if vals[i] < best_val - 1e-12:
            best_val, best_t = vals[i], chunk[i]
    if best_t is None:
        raise SingularConstraintSystem(f"every grid point gives a singular {side} edge matrix")
    E = assemble_side(base, blocks, best_t)
    return EdgeSide(E, np.linalg.inv(E), labels, tuple(float(t) for t in best_t))


def _chunks(pts: np.ndarray, dims: int, size: int = 200_000):
    """Grid points in lexicographic order, batched; earlier points win ties."""
    total = len(pts) ** dims
    idx = np.arange(total)
    for start in range(0, total, size):
        part = idx[start : start + size]
        digits = np.empty((len(part), dims), dtype=int)
        rem = part
        for d in range(dims - 1, -1, -1):
            digits[:, d] = rem % len(pts)
            rem = rem // len(pts)
        yield pts[digits]


def build_edge_operators(
    bank_or_schedule,
    moment_spec: EdgeSpec | None = None,
    poly_degree: int | None = None,
    grid_dim: int | None = None,
    grid_size: float | None = None,
) -> EdgeOperatorSet:
    """Construct the left and right edge matrices for an orthonormal bank.

    Without ``moment_spec`` the built-in constraints for the bank's name are
    used. ``poly_degree`` and ``grid_size`` override the spec; ``grid_dim``,
    when given, must match the number of free parameters on each side.
    """
    s = _orthonormal_schedule(bank_or_schedule)
    m = len(s.steps) - 1
    if moment_spec is None:
        name = s.name or getattr(bank_or_schedule, "name", "")
        if name not in EDGE_SPECS:
            raise InfeasibleSpec(f"no built-in edge constraints for {name or 'this bank'}; pass moment_spec")
        moment_spec = EDGE_SPECS[name]
    spec = moment_spec
    if poly_degree is not None:
        spec = EdgeSpec(poly_degree, spec.left_moments, spec.right_moments, spec.left_grid, spec.right_grid)
    if grid_size is not None:
        spec = EdgeSpec(
            spec.poly_degree,
            spec.left_moments,
            spec.right_moments,
            GridSpec(grid_size, None, spec.left_grid.radius),
            GridSpec(grid_size, None, spec.right_grid.radius),
        )
    if m == 0:
        empty = EdgeSide(np.zeros((0, 0)), np.zeros((0, 0)), (), ())
        return EdgeOperatorSet(empty, empty, s, spec)
    left = _build_side(s, spec, "left")
    right = _build_side(s, spec, "right")
    if grid_dim is not None:
        for side in (left, right):
            if len(side.free_params) not in (0, grid_dim):
                raise InfeasibleSpec(f"spec leaves {len(side.free_params)} free parameters, not {grid_dim}")
    ops = EdgeOperatorSet(left, right, s, spec)
    ops.bounds.update(edge_bounds(ops))
    return ops


@lru_cache(maxsize=None)
def builtin_edge_operators(name: str) -> EdgeOperatorSet:
    from .library import get_bank

    return build_edge_operators(get_bank(name), EDGE_SPECS[name])


# ---------------------------------------------------------------------------
# Bounds


def _mirror_norm(f: np.ndarray, start: int, n: int) -> float:
    """l2 norm, on the raw samples, of one mirrored-convolution output."""
    from .transform1d import mirror_index

    row = np.zeros(n)
    np.add.at(row, mirror_index(start + np.arange(len(f)), n), f)
    return float(np.linalg.norm(row))


def _mirror_bounds(s: Schedule, n: int, left: np.ndarray, labels: tuple[str, ...]) -> dict[str, float]:
    """``P`` per label for mirroring.

    Each output's support is centred on its (c, d) pair, c before d. The
    right edge is treated as the left edge of the reversed signal with
    reversed filters, so both sides share the left-edge offsets.
    """
    from .factorization import schedule_to_filters

    bank = schedule_to_filters(s)
    h, g = bank.analysis_low.array, bank.analysis_high.array
    L = len(h)
    cpar = _phase(s, s.c_offset)
    first_c = next(q for q in left if q % 2 == cpar)
    first_d = next(q for q in left if q % 2 != cpar)
    off = {"c": first_c + 1 - L // 2, "d": first_d - L // 2}
    out = {}
    for side in ("left", "right"):
        for lab in labels:
            kind, idx = lab[0], int(lab[1:])
            f = h if kind == "c" else g
            if side == "left":
                out[side, lab] = _mirror_norm(f, 2 * idx + off[kind], n)
            else:
                out[side, lab] = _mirror_norm(f[::-1], 2 * (n // 2 - 1 - idx) + off[kind], n)
    return out


def edge_bounds(ops: EdgeOperatorSet) -> dict:
    """l2 bounds per edge output: ``Q`` for the edge matrices, ``P`` for mirroring.

    Keys are ``(side, label)`` with labels ``c0, d0, c1, ...`` counted from
    that end inward; values are ``{"Q": ..., "P": ...}``.
    """
    s = ops.schedule
    if ops.size == 0:
        return {}
    n = _work_length(s, ops.spec.poly_degree)
    Y, _ = _state_matrix(s, n)
    left, right = edge_positions(s, n)
    labels = set(ops.left.labels) | set(ops.right.labels)
    mirror = _mirror_bounds(s, n, left, tuple(sorted(labels)))
    table = {}
    for side, pos, E in (("left", left, ops.left), ("right", right, ops.right)):
        comp = E.matrix @ Y[pos]
        for r, lab in enumerate(E.labels):
            sc = s.scale_c if lab[0] == "c" else s.scale_d
            table[side, lab] = {"Q": float(np.linalg.norm(sc * comp[r])), "P": mirror[side, lab]}
    return table


# ---------------------------------------------------------------------------
# Transform with edge matrices


def _check_length(s: Schedule, n: int) -> None:
    need = 4 * len(s.steps)
    if n < need or n % 2:
        raise SignalTooShort(f"edge matrices need an even length of at least {need}, got {n}")


def _ops_for(bank_or_schedule) -> EdgeOperatorSet:
    s = _orthonormal_schedule(bank_or_schedule)
    name = s.name or getattr(bank_or_schedule, "name", "")
    if name in EDGE_SPECS:
        return builtin_edge_operators(name)
    if len(s.steps) == 1:
        return build_edge_operators(s, EdgeSpec(0, (), ()))
    raise EdgeMatricesUnavailable(f"no edge matrices for {name or 'this schedule'}")


def apply_edge(x, ops: EdgeOperatorSet, side: str) -> np.ndarray:
    """Unnormalized edge coefficients of one side, ordered from the end inward."""
    x = np.asarray(x, dtype=float)
    s = ops.schedule
    _check_length(s, len(x))
    if side not in ("left", "right"):
        raise ValidationError("side must be 'left' or 'right'")
    plan, _ = _pair_plan(s, len(x))
    y = x.copy()
    _rotate_pairs(y, s, plan, OpCounter())
    left, right = edge_positions(s, len(x))
    pos, E = (left, ops.left) if side == "left" else (right, ops.right)
    return E.matrix @ y[pos]


def _apply_matrix(E: np.ndarray, v: np.ndarray, counter: OpCounter) -> np.ndarray:
    nz = np.count_nonzero(E, axis=1)
    counter.tally(int(nz.sum()), int(np.maximum(nz - 1, 0).sum()))
    return E @ v


def _readout(y: np.ndarray, s: Schedule, counter: OpCounter):
    from .transform1d import WaveletCoeffs, _scale

    cpar, dpar = _phase(s, s.c_offset), _phase(s, s.d_offset)
    return WaveletCoeffs(_scale(y[cpar::2], s.scale_c, counter), _scale(y[dpar::2], s.scale_d, counter))


def edge_dwt(x, bank_or_schedule, counter: OpCounter | None = None, impl: str = "factored"):
    """One level with edge matrices; outputs are ordered by sample position.

    ``impl="factored"`` rotates pairs in place; ``impl="reference"`` takes
    interior values from the periodic convolution, which agrees with the
    factored interior because exact samples never see the wrap.
    """
    counter = ensure_counter(counter)
    x = np.asarray(x, dtype=float)
    ops = _ops_for(bank_or_schedule)
    s = ops.schedule
    n = len(x)
    _check_length(s, n)
    left, right = edge_positions(s, n)
    if impl == "factored":
        plan, _ = _pair_plan(s, n)
        y = x.copy()
        _rotate_pairs(y, s, plan, counter)
    elif impl == "reference":
        from .transform1d import Edge, dwt_reference

        bank = bank_or_schedule if isinstance(bank_or_schedule, FilterBank) else None
        if bank is None:
            from .factorization import schedule_to_filters

            bank = schedule_to_filters(s)
        # relative phases act on the signal rotated by the first shift
        s0 = s.steps[0].shift
        w = dwt_reference(np.roll(x, s0), bank, Edge.PERIODIZE, counter)
        k = np.arange(n // 2)
        y = np.empty(n)
        y[(2 * k + s.c_offset) % n] = w.c / s.scale_c
        y[(2 * k + s.d_offset) % n] = w.d / s.scale_d
        y = np.roll(y, -s0)
        Y, _ = _state_matrix(s, n)
        edge = np.concatenate([left, right])
        y[edge] = Y[edge] @ x
    else:
        raise ValidationError("impl must be 'factored' or 'reference'")
    y[left] = _apply_matrix(ops.left.matrix, y[left], counter)
    y[right] = _apply_matrix(ops.right.matrix, y[right], counter)
    return _readout(y, s, counter)


def edge_idwt(w, bank_or_schedule, counter: OpCounter | None = None) -> np.ndarray:
    """Exact inverse of :func:`edge_dwt`."""
    from .transform1d import WaveletCoeffs, _scale

    counter = ensure_counter(counter)
    if not isinstance(w, WaveletCoeffs):
        w = WaveletCoeffs.from_interleaved(w)
    ops = _ops_for(bank_or_schedule)
    s = ops.schedule
    n = len(w)
    _check_length(s, n)
    plan, _ = _pair_plan(s, n)
    left, right = edge_positions(s, n)
    y = np.empty(n)
    cpar, dpar = _phase(s, s.c_offset), _phase(s, s.d_offset)
    y[cpar::2] = _scale(w.c, 1.0 / s.scale_c, counter)
    y[dpar::2] = _scale(w.d, 1.0 / s.scale_d, counter)
    y[left] = _apply_matrix(ops.left.inverse, y[left], counter)
    y[right] = _apply_matrix(ops.right.inverse, y[right], counter)
    steps = list(zip(s.steps, plan))
    for st, first in reversed(steps):
        u, v = y[first].copy(), y[first + 1].copy()
        det = 1.0 + st.alpha**2
        y[first] = (u + st.alpha * v) / det
        y[first + 1] = (v - st.alpha * u) / det
        counter.tally(4 * u.size, 2 * u.size)
    return y


# ---------------------------------------------------------------------------
# Text format


def format_edge_set(ops: EdgeOperatorSet) -> str:
    """Per side: a header line with the dimension, then one line per row."""
    lines = []
    for side, E in (("left", ops.left), ("right", ops.right)):
        lines.append(f"{side} {E.matrix.shape[0]}")
        for row in E.matrix:
            lines.append(" ".join(f"{v:.17g}" for v in row))
    return "\n".join(lines) + "\n"


def parse_edge_set(text: str) -> dict[str, np.ndarray]:
    out = {}
    lines = [ln for ln in text.splitlines() if ln.strip()]
    i = 0
    while i < len(lines):
        head = lines[i].split()
        if len(head) != 2 or head[0] not in ("left", "right"):
            raise ValidationError(f"bad edge-set header: {lines[i]!r}")
        m = int(head[1])
        rows = [list(map(float, ln.split())) for ln in lines[i + 1 : i + 1 + m]]
        if len(rows) != m or any(len(r) != m for r in rows):
            raise ValidationError(f"{head[0]} matrix is not {m} x {m}")
        out[head[0]] = np.array(rows).reshape(m, m)
        i += 1 + m
    return out


def write_edge_set(path: str | Path, ops: EdgeOperatorSet) -> None:
    Path(path).write_text(format_edge_set(ops))
