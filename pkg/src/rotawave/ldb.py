"""Local discriminant basis selection and the hypersphere classifier.

A *dictionary* turns a signal into a :class:`~rotawave.packets.PacketTable`.
Class energy maps are accumulated over those tables, an additive
discriminant scores each node, and bottom-up pruning picks the cover with
the largest total score. Features are the raw coefficients at the most
discriminating coordinates of that cover.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import DegenerateFeatures, EmptyClass, EmptyTestSet, ValidationError
from .packets import (
    COSINE,
    BasisCover,
    PacketTable,
    dct_iv,
    local_cosine_table,
    wavelet_packet_table,
)

EPS = 1e-300


# ---------------------------------------------------------------------------
# Dictionaries


@dataclass
class Dictionary:
    """A named packet analyzer of fixed depth.

    ``analyze`` maps a signal to a table with levels ``0..depth``.
    """

    name: str
    depth: int
    analyze: Callable[[np.ndarray], PacketTable] = field(repr=False)
    orthonormal: bool = True


def make_dictionary(spec: str, depth: int = 0, radius: int | None = None) -> Dictionary:
    """Build a dictionary from ``std``, ``dct4``, ``wp:<filter>`` or ``lct``.

    ``std`` and ``dct4`` are single bases and always have depth 0.
    """
    from .factorization import factor
    from .filters import Parity
    from .library import get_bank

    spec = spec.strip()
    if spec == "std":
        return Dictionary("std", 0, lambda x: PacketTable([np.asarray(x, float).reshape(1, -1)], COSINE, 0))
    if spec == "dct4":
        return Dictionary("dct4", 0, lambda x: PacketTable([dct_iv(x).reshape(1, -1)], COSINE, 0))
    if spec == "lct":
        return Dictionary("lct", depth, lambda x: local_cosine_table(x, depth, radius))
    if spec.startswith("wp:"):
        bank = get_bank(spec[3:])
        s = factor(bank)
        if depth < 1:
            raise ValidationError("wavelet packet dictionaries need depth >= 1")
        return Dictionary(spec, depth, lambda x: wavelet_packet_table(x, s, depth), bank.parity is Parity.ORTHONORMAL)
    raise ValidationError(f"unknown dictionary {spec!r}; use std, dct4, wp:<filter> or lct")


# ---------------------------------------------------------------------------
# Energy maps


@dataclass
class EnergyMap:
    """Per-class tables ``gamma[c][j][k, l]`` and class sizes."""

    gamma: list[list[np.ndarray]]
    sizes: list[int]

    @property
    def classes(self) -> int:
        return len(self.gamma)

    @property
    def depth(self) -> int:
        return len(self.gamma[0]) - 1

    def node(self, c: int, j: int, k: int) -> np.ndarray:
        return self.gamma[c][j][k]


def energy_maps(training: Sequence[Sequence[np.ndarray]], dictionary: Dictionary) -> EnergyMap:
    """``Gamma_c(j,k,l) = sum_i (w_{j,k,l} . x_i)**2 / sum_i ||x_i||**2`` per class."""
    gamma, sizes = [], []
    for c, signals in enumerate(training):
        if len(signals) == 0:
            raise EmptyClass(f"class {c} has no training signals")
        acc = None
        total = 0.0
        for x in signals:
            x = np.asarray(x, dtype=float)
            t = dictionary.analyze(x)
            total += float(x @ x)
            sq = [lvl**2 for lvl in t.levels]
            acc = sq if acc is None else [a + b for a, b in zip(acc, sq)]
        if total == 0:
            raise EmptyClass(f"class {c} has zero total energy")
        gamma.append([a / total for a in acc])
        sizes.append(len(signals))
    return EnergyMap(gamma, sizes)


# ---------------------------------------------------------------------------
# Discriminant measures


def _pairwise(values: Sequence[np.ndarray], d: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> np.ndarray:
    out = np.zeros_like(np.asarray(values[0], dtype=float))
    for i in range(len(values) - 1):
        for j in range(i + 1, len(values)):
            out = out + d(values[i], values[j])
    return out


def _measure(measure: str | tuple) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    if isinstance(measure, str):
        if measure == "entropy_relative":
            def rel(x, y):
                x, y = np.maximum(x, EPS), np.maximum(y, EPS)
                return x * np.log(x / y) + y * np.log(y / x)

            return rel
        if measure.startswith("m"):
            measure = ("mp", float(measure[1:] or 2))
        else:
            raise ValidationError(f"unknown measure {measure!r}")
    kind, p = measure
    if kind != "mp" or p <= 0:
        raise ValidationError(f"unknown measure {measure!r}")
    return lambda x, y: np.abs(x - y) ** p


def coordinate_discriminant(values: Sequence[np.ndarray], measure="m2") -> np.ndarray:
    """Per-coordinate multi-class discriminant, summed over class pairs."""
    if len(values) < 2:
        raise ValidationError("discriminants need at least two classes")
    return _pairwise([np.asarray(v, dtype=float) for v in values], _measure(measure))


def discriminant(maps: EnergyMap, node: tuple[int, int], measure="m2") -> float:
    """Additive discriminant of node ``(j, k)``: the sum over its coordinates."""
    j, k = node
    return float(coordinate_discriminant([maps.node(c, j, k) for c in range(maps.classes)], measure).sum())


# ---------------------------------------------------------------------------
# Selection


@dataclass
class LdbResult:
    """Outcome of :func:`ldb_select`.

    Attributes:
        cover: the chosen basis.
        node_delta: discriminant of every node on its own.
        best_delta: ``Delta_{j,k}`` after pruning (best achievable below the node).
        dictionary: name of the dictionary the maps came from.
    """

    cover: BasisCover
    node_delta: dict[tuple[int, int], float]
    best_delta: dict[tuple[int, int], float]
    dictionary: str = ""

    @property
    def total(self) -> float:
        return self.best_delta[(0, 0)]


def node_deltas(maps: EnergyMap, measure="m2") -> dict[tuple[int, int], float]:
    out = {}
    for j in range(maps.depth + 1):
        per = coordinate_discriminant([maps.gamma[c][j] for c in range(maps.classes)], measure)
        for k, v in enumerate(per.sum(axis=1)):
            out[(j, k)] = float(v)
    return out


def select_from_deltas(node_delta: Mapping[tuple[int, int], float], depth: int) -> tuple[BasisCover, dict]:
    """Bottom-up pruning; a parent is kept when it scores at least its children."""
    best = {}
    keep = {}
    for k in range(1 << depth):
        best[(depth, k)] = node_delta[(depth, k)]
        keep[(depth, k)] = True
    for j in range(depth - 1, -1, -1):
        for k in range(1 << j):
            own = node_delta[(j, k)]
            split = best[(j + 1, 2 * k)] + best[(j + 1, 2 * k + 1)]
            keep[(j, k)] = own >= split
            best[(j, k)] = own if keep[(j, k)] else split
    nodes = []

    def walk(j, k):
        if keep[(j, k)]:
            nodes.append((j, k))
        else:
            walk(j + 1, 2 * k)
            walk(j + 1, 2 * k + 1)

    walk(0, 0)
    return BasisCover(nodes), best


def ldb_select(maps: EnergyMap, measure="m2", dictionary: str = "") -> LdbResult:
    """Choose the cover maximizing the summed node discriminant."""
    delta = node_deltas(maps, measure)
    cover, best = select_from_deltas(delta, maps.depth)
    return LdbResult(cover, delta, best, dictionary)


def rank_features(result: LdbResult, maps: EnergyMap, measure="m2") -> list[tuple[int, int, int]]:
    """Coordinates of the chosen basis, most discriminating first.

    Ties keep ``(j, k, l)`` lexicographic order.
    """
    coords, scores = [], []
    for j, k in sorted(result.cover.nodes):
        per = coordinate_discriminant([maps.node(c, j, k) for c in range(maps.classes)], measure)
        for l, v in enumerate(per):
            coords.append((j, k, l))
            scores.append(v)
    order = np.argsort(-np.asarray(scores), kind="stable")
    return [coords[i] for i in order]


def extract_features(tables: Sequence[PacketTable], coords: Sequence[tuple[int, int, int]]) -> np.ndarray:
    """Raw coefficients at ``coords`` for each table, one row per signal."""
    return np.array([[t.levels[j][k, l] for j, k, l in coords] for t in tables])


def write_ldb_result(path: str | Path, result: LdbResult, ranked: Sequence[tuple[int, int, int]]) -> None:
    with open(path, "w") as fh:
        fh.write("# cover\n")
        for j, k in result.cover.ordered():
            fh.write(f"{j},{k}\n")
        fh.write("# ranked j,k,l\n")
        for j, k, l in ranked:
            fh.write(f"{j},{k},{l}\n")


def read_ldb_result(path: str | Path) -> tuple[BasisCover, list[tuple[int, int, int]]]:
    cover, ranked, section = [], [], None
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            section = "cover" if "cover" in line else "ranked"
            continue
        if not line.strip():
            continue
        vals = tuple(int(v) for v in line.split(","))
        (cover if section == "cover" else ranked).append(vals)
    return BasisCover(cover), ranked


# ---------------------------------------------------------------------------
# Hypersphere classifier


M_RANGE = (2, 10)
R_STEP = 2.0**-7
R_MAX = 5.0


@dataclass
class HypersphereClassifier:
    """Label ``inner_class`` when the first ``m`` scaled features satisfy ``sum x**2 <= r``.

    ``scale`` divides each feature before the test; it is the pooled
    training RMS of that coordinate, which puts the radius grid on a
    fixed scale regardless of signal amplitude.
    """

    m: int
    r: float
    inner_class: int
    outer_class: int
    scale: np.ndarray
    train_error: float = float("nan")

    def squared_radius(self, features) -> np.ndarray:
        f = np.atleast_2d(np.asarray(features, dtype=float))[:, : self.m] / self.scale[: self.m]
        return (f**2).sum(axis=1)

    def predict(self, features) -> np.ndarray:
        inside = self.squared_radius(features) <= self.r
        return np.where(inside, self.inner_class, self.outer_class)

    def dumps(self) -> str:
        lines = [f"m = {self.m}", f"r = {self.r!r}", f"inner_class = {self.inner_class}",
                 f"outer_class = {self.outer_class}", "scale = " + " ".join(repr(float(v)) for v in self.scale)]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "HypersphereClassifier":
        kv = {}
        for line in text.splitlines():
            if "=" in line:
                k, v = line.split("=", 1)
                kv[k.strip()] = v.strip()
        return cls(int(kv["m"]), float(kv["r"]), int(kv["inner_class"]), int(kv["outer_class"]),
                   np.array([float(v) for v in kv["scale"].split()]))


def fit_hypersphere(
    train_features,
    labels,
    m_range: tuple[int, int] = M_RANGE,
    r_step: float = R_STEP,
    r_max: float = R_MAX,
    standardize: bool = True,
) -> HypersphereClassifier:
    """Exhaustive grid search over ``m`` and ``r`` minimizing training error.

    For each ``m`` the inner class is the one whose training points have the
    smaller median squared radius. Ties in error go to the smaller ``m``,
    then the smaller ``r``.
    """
    X = np.atleast_2d(np.asarray(train_features, dtype=float))
    y = np.asarray(labels)
    classes = sorted(set(y.tolist()))
    if len(classes) != 2:
        raise ValidationError(f"the hypersphere classifier needs exactly two classes, got {classes}")
    if X.shape[0] != len(y):
        raise ValidationError("one label per feature row is required")
    if np.ptp(X, axis=0).max(initial=0.0) == 0:
        raise DegenerateFeatures("all training feature vectors are identical")
    lo, hi = m_range
    hi = min(hi, X.shape[1])
    if hi < lo:
        raise ValidationError(f"need at least {lo} features, got {X.shape[1]}")
    scale = np.sqrt((X**2).mean(axis=0)) if standardize else np.ones(X.shape[1])
    scale = np.where(scale > 0, scale, 1.0)
    Z = X / scale
    radii = np.arange(1, int(round(r_max / r_step)) + 1) * r_step
    best = None
    for m in range(lo, hi + 1):
        rho = (Z[:, :m] ** 2).sum(axis=1)
        med = [np.median(rho[y == c]) for c in classes]
        inner = classes[0] if med[0] <= med[1] else classes[1]
        outer = classes[1] if inner == classes[0] else classes[0]
        inside = rho[None, :] <= radii[:, None]
        wrong = np.where(inside, y[None, :] != inner, y[None, :] != outer).sum(axis=1)
        i = int(np.argmin(wrong))
        err = wrong[i] / len(y)
        if best is None or err < best[0]:
            best = (err, m, float(radii[i]), inner, outer)
    err, m, r, inner, outer = best
    return HypersphereClassifier(m, r, inner, outer, scale, err)


def misclassification_rate(classifier, features, labels) -> float:
    """Fraction of ``labels`` the classifier gets wrong."""
    y = np.asarray(labels)
    if len(y) == 0:
        raise EmptyTestSet("no test signals")
    pred = classifier.predict(features) if hasattr(classifier, "predict") else np.asarray([classifier(f) for f in features])
    return float(np.mean(pred != y))
