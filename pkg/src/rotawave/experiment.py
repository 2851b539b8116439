"""End-to-end classification runs and operation-count benchmarks."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from .counting import OpCounter
from .errors import CountMismatch, NumericalError, RotawaveError, ValidationError
from .ldb import (
    HypersphereClassifier,
    LdbResult,
    energy_maps,
    extract_features,
    fit_hypersphere,
    ldb_select,
    make_dictionary,
    misclassification_rate,
    rank_features,
)
from .radar import Dataset, RadarConfig, make_dataset

DEFAULT_DICTS = ("std", "dct4", "wp:coif18", "lct")


@dataclass
class ExperimentSpec:
    """One two-class experiment.

    Sector width ``alpha`` is in degrees. Desk-scale defaults: length 512,
    depth 6, 50 training and 500 test signals per class.
    """

    n_a: int = 2
    n_b: int = 3
    alpha: float = 45.0
    dictionaries: tuple[str, ...] = DEFAULT_DICTS
    depth: int = 6
    train: int = 50
    test: int = 500
    length: int = 512
    m_min: int = 2
    m_max: int = 10
    r_step: float = 2.0**-7
    r_max: float = 5.0
    features: int = 10
    measure: str = "m2"
    seed: int = 42

    def __post_init__(self):
        if isinstance(self.dictionaries, str):
            self.dictionaries = tuple(d.strip() for d in self.dictionaries.split(",") if d.strip())
        self.dictionaries = tuple(self.dictionaries)
        for name in ("n_a", "n_b", "train", "test", "length"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be positive")
        if self.length % (1 << self.depth):
            raise ValidationError(f"length {self.length} is not divisible by 2^{self.depth}")

    def dumps(self) -> str:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(v)
            elif isinstance(v, float):
                v = repr(v)
            out.append(f"{f.name} = {v}")
        return "\n".join(out) + "\n"

    @classmethod
    def loads(cls, text: str) -> "ExperimentSpec":
        kinds = {f.name: f.type for f in fields(cls)}
        kw = {}
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"expected 'key = value', got {line!r}")
            k, v = (p.strip() for p in line.split("=", 1))
            if k not in kinds:
                raise ValidationError(f"unknown experiment key {k!r}")
            t = str(kinds[k])
            if "tuple" in t:
                kw[k] = v
            elif "int" in t:
                kw[k] = int(v)
            elif "float" in t:
                kw[k] = float(v)
            else:
                kw[k] = v
        return cls(**kw)

    def config(self) -> RadarConfig:
        return RadarConfig(samples=self.length)


@dataclass
class DictionaryReport:
    name: str
    train_error: float
    test_error: float
    classifier: HypersphereClassifier
    ldb: LdbResult
    ranked: list
    scatter: np.ndarray = field(repr=False)


@dataclass
class ExperimentReport:
    spec: ExperimentSpec
    rows: list[DictionaryReport]
    seconds: float

    def best_packet(self) -> DictionaryReport | None:
        packets = [r for r in self.rows if r.name not in ("std", "dct4")]
        return min(packets, key=lambda r: r.test_error) if packets else None

    def row(self, name: str) -> DictionaryReport:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def table(self) -> str:
        sp = self.spec
        head = f"D_{sp.n_a} vs D_{sp.n_b}, alpha = {sp.alpha:g} deg, seed {sp.seed}"
        lines = [head, f"{'Method':<12} {'Train %':>8} {'m':>3} {'r':>9} {'Test %':>8}"]
        for r in self.rows:
            c = r.classifier
            lines.append(f"{r.name:<12} {100 * r.train_error:8.2f} {c.m:3d} {c.r:9.5f} {100 * r.test_error:8.2f}")
        return "\n".join(lines) + "\n"

    def csv(self) -> str:
        lines = ["method,train_error,test_error,m,r,inner_class"]
        for r in self.rows:
            c = r.classifier
            lines.append(f"{r.name},{r.train_error!r},{r.test_error!r},{c.m},{c.r!r},{c.inner_class}")
        return "\n".join(lines) + "\n"

    def write(self, out: str | Path) -> None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.txt").write_text(self.table())
        (out / "report.csv").write_text(self.csv())
        (out / "spec.txt").write_text(self.spec.dumps())
        for r in self.rows:
            tag = r.name.replace(":", "_")
            np.savetxt(out / f"scatter_{tag}.csv", r.scatter, delimiter=",", header="label,x1,x2", comments="",
                       fmt=["%d", "%.17g", "%.17g"])
            (out / f"classifier_{tag}.txt").write_text(r.classifier.dumps())


def run_dictionary(ds: Dataset, name: str, spec: ExperimentSpec) -> DictionaryReport:
    depth = 0 if name in ("std", "dct4") else spec.depth
    d = make_dictionary(name, depth)
    maps = energy_maps(ds.by_class("train"), d)
    res = ldb_select(maps, spec.measure, d.name)
    ranked = rank_features(res, maps, spec.measure)
    top = ranked[: max(spec.features, 2)]
    ftr = extract_features([d.analyze(x) for x in ds.train], top)
    fte = extract_features([d.analyze(x) for x in ds.test], top)
    clf = fit_hypersphere(ftr, ds.train_labels, (spec.m_min, spec.m_max), spec.r_step, spec.r_max)
    scatter = np.column_stack([ds.train_labels, ftr[:, :2]])
    return DictionaryReport(
        name,
        misclassification_rate(clf, ftr, ds.train_labels),
        misclassification_rate(clf, fte, ds.test_labels),
        clf,
        res,
        ranked,
        scatter,
    )


def run_experiment(spec: ExperimentSpec) -> ExperimentReport:
    """Generate, analyze, select, rank, fit and evaluate for each dictionary."""
    t0 = time.perf_counter()
    alpha = math.radians(spec.alpha)
    ds = make_dataset([(spec.n_a, alpha), (spec.n_b, alpha)], spec.train, spec.test, spec.config(), spec.seed)
    rows = []
    for name in spec.dictionaries:
        try:
            rows.append(run_dictionary(ds, name, spec))
        except RotawaveError as exc:
            kind = NumericalError if isinstance(exc, NumericalError) else ValidationError
            raise kind(f"dictionary {name!r}: {exc}") from exc
    return ExperimentReport(spec, rows, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# Operation-count benchmark


@dataclass
class BenchRow:
    bank: str
    n: int
    dim: int
    measured: tuple[int, int]
    formula: tuple[int, int]
    convolution: tuple[int, int]

    @property
    def ok(self) -> bool:
        return tuple(self.measured) == tuple(self.formula)


def bench_opcounts(filters: Sequence[str], sizes: Sequence[int], dims: int = 1, *, strict: bool = True) -> list[BenchRow]:
    """Measured factored counts against the closed forms.

    With ``strict`` a :class:`CountMismatch` listing every deviating cell is
    raised after the whole table has been measured.
    """
    from .factorization import factor, predicted_cost, reference_cost
    from .library import get_bank
    from .transform1d import dwt_factored
    from .transform_nd import dwt2_blocked, dwt3_blocked, predicted_cost_nd, reference_cost_nd

    if dims not in (1, 2, 3):
        raise ValidationError("dims must be 1, 2 or 3")
    rows = []
    for name in filters:
        bank = get_bank(name)
        s = factor(bank)
        for n in sizes:
            c = OpCounter()
            if dims == 1:
                dwt_factored(np.zeros(n), s, counter=c)
                formula, conv = predicted_cost(s, n), reference_cost(bank, n)
            else:
                grid = np.zeros((n,) * dims)
                (dwt2_blocked if dims == 2 else dwt3_blocked)(grid, s, counter=c)
                formula, conv = predicted_cost_nd(s, n, dims), reference_cost_nd(bank, n, dims)
            rows.append(BenchRow(name, n, dims, c.as_tuple(), tuple(int(v) for v in formula), tuple(conv)))
    bad = [f"{r.bank} n={r.n} dim={r.dim}: measured {r.measured} formula {r.formula}" for r in rows if not r.ok]
    if strict and bad:
        raise CountMismatch(bad)
    return rows


def format_bench(rows: Sequence[BenchRow]) -> str:
    lines = [f"{'bank':<12} {'n':>4} {'dim':>3} {'mults':>9} {'adds':>9} {'f.mults':>9} {'f.adds':>9} "
             f"{'conv.mults':>10} {'saving':>7} ok"]
    for r in rows:
        saving = 1 - r.measured[0] / r.convolution[0] if r.convolution[0] else 0.0
        lines.append(f"{r.bank:<12} {r.n:4d} {r.dim:3d} {r.measured[0]:9d} {r.measured[1]:9d} {r.formula[0]:9d} "
                     f"{r.formula[1]:9d} {r.convolution[0]:10d} {100 * saving:6.1f}% {'yes' if r.ok else 'NO'}")
    return "\n".join(lines) + "\n"
