"""Synthetic two-class radar data.

A distribution ``D_n(alpha)`` places one point source in each of ``n``
annular sectors ``1 <= r <= 10``, ``2 pi i / n <= theta <= 2 pi i / n + alpha``.
Signals are the real part of the summed outgoing waves, observed at
``t = 0`` along an arc of radius ``R`` with fixed arc-length spacing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ValidationError

R_MIN, R_MAX = 1.0, 10.0


@dataclass(frozen=True)
class SourceDistribution:
    """One drawn configuration of point sources.

    Attributes:
        n: number of sources.
        alpha: sector width in radians.
        r, theta: polar coordinates of the sources, sector ``i`` at index ``i - 1``.
        amplitudes: ``1/n`` for every source.
    """

    n: int
    alpha: float
    r: np.ndarray
    theta: np.ndarray

    @property
    def amplitudes(self) -> np.ndarray:
        return np.full(self.n, 1.0 / self.n)

    def in_sectors(self) -> np.ndarray:
        """Membership of each point in its own sector."""
        i = np.arange(1, self.n + 1)
        start = 2 * np.pi * i / self.n
        rel = self.theta - start
        return (self.r >= R_MIN) & (self.r <= R_MAX) & (rel >= -1e-12) & (rel <= self.alpha + 1e-12)


@dataclass(frozen=True)
class RadarConfig:
    """Observation geometry.

    ``spacing`` defaults to ``2 pi / (16 k)`` arc-length units.
    """

    k: float = 100.0
    R: float = 1e4
    samples: int = 2048
    theta0: float = 0.0
    spacing: float | None = None

    @property
    def step(self) -> float:
        return 2 * np.pi / (16 * self.k) if self.spacing is None else self.spacing

    @property
    def window(self) -> float:
        return self.step * self.samples

    def angles(self) -> np.ndarray:
        return self.theta0 + np.arange(self.samples) * self.step / self.R


def sample_distribution(n: int, alpha: float, rng: np.random.Generator) -> SourceDistribution:
    """Draw one source per sector, uniform over the sector's area."""
    if n < 1:
        raise ValidationError(f"need at least one source, got {n}")
    if alpha < 0:
        raise ValidationError("sector width must be non-negative")
    i = np.arange(1, n + 1)
    theta = 2 * np.pi * i / n + alpha * rng.random(n)
    r = np.sqrt(R_MIN**2 + (R_MAX**2 - R_MIN**2) * rng.random(n))
    return SourceDistribution(n, float(alpha), r, theta)


def synthesize_complex(dist: SourceDistribution, cfg: RadarConfig) -> np.ndarray:
    """Far-field sum ``e^{ikR}/R sum A_i e^{ik(r_i^2/(2R) - r_i cos(theta - theta_i))}``."""
    th = cfg.angles()[:, None]
    phase = cfg.k * (dist.r**2 / (2 * cfg.R) - dist.r * np.cos(th - dist.theta))
    s = (dist.amplitudes * np.exp(1j * phase)).sum(axis=1)
    return np.exp(1j * cfg.k * cfg.R) / cfg.R * s


def synthesize_exact_complex(dist: SourceDistribution, cfg: RadarConfig) -> np.ndarray:
    """Exact sum ``sum A_i e^{ik|x - p_i|} / |x - p_i|`` at ``t = 0``."""
    th = cfg.angles()[:, None]
    dx = cfg.R * np.cos(th) - dist.r * np.cos(dist.theta)
    dy = cfg.R * np.sin(th) - dist.r * np.sin(dist.theta)
    dist_ = np.hypot(dx, dy)
    return (dist.amplitudes * np.exp(1j * cfg.k * dist_) / dist_).sum(axis=1)


def synthesize_signal(dist: SourceDistribution, cfg: RadarConfig) -> np.ndarray:
    return synthesize_complex(dist, cfg).real


def synthesize_exact(dist: SourceDistribution, cfg: RadarConfig) -> np.ndarray:
    return synthesize_exact_complex(dist, cfg).real


def far_field_error(dist: SourceDistribution, cfg: RadarConfig) -> float:
    """Largest pointwise relative difference between the two formulas."""
    a = synthesize_complex(dist, cfg)
    b = synthesize_exact_complex(dist, cfg)
    return float(np.max(np.abs(a - b) / np.abs(b)))


@dataclass
class Dataset:
    """Labeled train and test signals, one label per row."""

    train: np.ndarray
    train_labels: np.ndarray
    test: np.ndarray
    test_labels: np.ndarray
    classes: list[tuple[int, float]] = field(default_factory=list)

    def by_class(self, split: str = "train") -> list[np.ndarray]:
        X = self.train if split == "train" else self.test
        y = self.train_labels if split == "train" else self.test_labels
        return [X[y == c] for c in range(len(self.classes))]


def _draw(spec: tuple[int, float], count: int, cfg: RadarConfig, rng: np.random.Generator) -> np.ndarray:
    n, alpha = spec
    return np.array([synthesize_signal(sample_distribution(n, alpha, rng), cfg) for _ in range(count)]).reshape(
        count, cfg.samples
    )


def make_dataset(
    class_specs: Sequence[tuple[int, float]],
    train: int | Sequence[int],
    test: int | Sequence[int],
    cfg: RadarConfig,
    seed: int,
) -> Dataset:
    """Fresh draws for every signal; each class gets its own seeded stream.

    Class ``c`` uses child stream ``c`` of ``SeedSequence(seed)``, so
    identical class specs still produce different signals.
    """
    specs = [(int(n), float(a)) for n, a in class_specs]
    ntr = [train] * len(specs) if np.isscalar(train) else list(train)
    nte = [test] * len(specs) if np.isscalar(test) else list(test)
    if len(ntr) != len(specs) or len(nte) != len(specs):
        raise ValidationError("need one train and one test count per class")
    streams = np.random.SeedSequence(seed).spawn(len(specs))
    Xtr, ytr, Xte, yte = [], [], [], []
    for c, (spec, ss) in enumerate(zip(specs, streams)):
        rng = np.random.default_rng(ss)
        Xtr.append(_draw(spec, ntr[c], cfg, rng))
        Xte.append(_draw(spec, nte[c], cfg, rng))
        ytr.append(np.full(ntr[c], c))
        yte.append(np.full(nte[c], c))
    return Dataset(np.vstack(Xtr), np.concatenate(ytr), np.vstack(Xte), np.concatenate(yte), specs)


def parse_classes(text: str) -> list[tuple[int, float]]:
    """``"2:45,3:45"`` to ``[(2, pi/4), (3, pi/4)]``; widths are in degrees."""
    out = []
    for part in text.split(","):
        try:
            n, deg = part.split(":")
            out.append((int(n), math.radians(float(deg))))
        except ValueError:
            raise ValidationError(f"bad class spec {part!r}; expected n:degrees") from None
    return out


def write_dataset(out: str | Path, ds: Dataset, cfg: RadarConfig, seed: int) -> None:
    """``class<k>/sig<i>.csv`` per signal plus a ``manifest`` text file."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    for split in ("train", "test"):
        for c, X in enumerate(ds.by_class(split)):
            d = out / split / f"class{c}"
            d.mkdir(parents=True, exist_ok=True)
            for i, x in enumerate(X):
                np.savetxt(d / f"sig{i}.csv", x, fmt="%.17g")
    lines = [f"seed = {seed}", f"k = {cfg.k!r}", f"R = {cfg.R!r}", f"samples = {cfg.samples}",
             f"theta0 = {cfg.theta0!r}", f"spacing = {cfg.step!r}"]
    for c, (n, a) in enumerate(ds.classes):
        lines.append(f"class{c} = {n} {a!r} {int((ds.train_labels == c).sum())} {int((ds.test_labels == c).sum())}")
    (out / "manifest").write_text("\n".join(lines) + "\n")


def read_dataset(path: str | Path) -> tuple[Dataset, RadarConfig]:
    path = Path(path)
    kv = {}
    for line in (path / "manifest").read_text().splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            kv[k.strip()] = v.strip()
    cfg = RadarConfig(float(kv["k"]), float(kv["R"]), int(kv["samples"]), float(kv["theta0"]), float(kv["spacing"]))
    specs = []
    parts = {"train": ([], []), "test": ([], [])}
    c = 0
    while f"class{c}" in kv:
        n, a, *_ = kv[f"class{c}"].split()
        specs.append((int(n), float(a)))
        for split, (X, y) in parts.items():
            d = path / split / f"class{c}"
            files = sorted(d.glob("sig*.csv"), key=lambda p: int(p.stem[3:]))
            for f in files:
                X.append(np.loadtxt(f, ndmin=1))
                y.append(c)
        c += 1
    (Xtr, ytr), (Xte, yte) = parts["train"], parts["test"]
    return Dataset(np.array(Xtr), np.array(ytr), np.array(Xte), np.array(yte), specs), cfg


def with_samples(cfg: RadarConfig, samples: int) -> RadarConfig:
    return replace(cfg, samples=samples)
