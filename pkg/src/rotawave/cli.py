"""Command-line entry point.

Exit codes: 0 on success, 1 for bad input, 2 for numerical failures.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from .counting import OpCounter
from .errors import CountMismatch, NumericalError, ValidationError

DEFAULT_SEED = 42


class _Parser(argparse.ArgumentParser):
    # usage errors are validation failures, not argparse's default status 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("ROTAWAVE_SEED")
    if env is None:
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        raise ValidationError(f"ROTAWAVE_SEED must be an integer, got {env!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"expected comma-separated integers, got {text!r}") from None


def _read_signal(path: str) -> np.ndarray:
    from .transform1d import read_signal_bin, read_signal_csv

    return read_signal_bin(path) if path.endswith(".bin") else read_signal_csv(path)


def _write_signal(path: str, x) -> None:
    from .transform1d import write_signal_bin, write_signal_csv

    (write_signal_bin if path.endswith(".bin") else write_signal_csv)(path, x)


def _bank(name: str):
    """A built-in bank name, or a filter text file holding an orthonormal lowpass."""
    from .filters import FilterBank, parse_filter
    from .library import get_bank

    p = Path(name)
    if p.is_file():
        fname, low = parse_filter(p.read_text())
        return FilterBank.orthonormal(low, name=fname)
    return get_bank(name)


def _report_count(args, counter: OpCounter) -> None:
    if args.count:
        mults, adds = counter.as_tuple()
        print(f"mults {mults}")
        print(f"adds {adds}")


# ---------------------------------------------------------------------------
# Subcommands


def cmd_filters(args) -> int:
    from .filters import double_shift_residual, format_filter, vanishing_moments
    from .library import bank_names, get_bank

    if args.action == "list":
        for name in bank_names():
            b = get_bank(name)
            L, Lt = b.lengths
            print(f"{name:<12} {b.parity.value:<14} L={L} Ltilde={Lt}")
        return 0
    if not args.name:
        raise ValidationError(f"filters {args.action} needs a bank name")
    b = _bank(args.name)
    if args.action == "show":
        part = {"low": b.analysis_low, "high": b.analysis_high,
                "synth-low": b.synthesis_low, "synth-high": b.synthesis_high}[args.part]
        sys.stdout.write(format_filter(b.name or args.name, part))
        return 0
    dsr = double_shift_residual(b.analysis_low, b.synthesis_low)
    moments = vanishing_moments(b.analysis_high, args.tol)
    dual = vanishing_moments(b.synthesis_high, args.tol)
    print(f"parity {b.parity.value}")
    print(f"lengths {b.lengths[0]} {b.lengths[1]}")
    print(f"double_shift_residual {dsr:.3e}")
    print(f"sum_H {float(b.analysis_low.array.sum())!r}")
    print(f"vanishing_moments {moments} {dual}")
    if dsr > args.tol:
        raise ValidationError(f"double-shift residual {dsr:.3e} exceeds {args.tol:g}")
    return 0


def cmd_factor(args) -> int:
    from .factorization import factor, format_schedule, predicted_cost

    s = factor(_bank(args.name))
    sys.stdout.write(format_schedule(s))
    if args.cost:
        mults, adds = predicted_cost(s, args.cost)
        print(f"# cost n={args.cost}: mults {mults} adds {adds}")
    return 0


def cmd_dwt(args) -> int:
    from .edges import edge_dwt
    from .factorization import factor
    from .transform1d import Edge, MultilevelCoeffs, _check_levels, dwt_factored, dwt_reference

    bank = _bank(args.filter)
    x = _read_signal(args.input)
    _check_levels(len(x), args.levels)
    edge = Edge.parse(args.edge)
    s = factor(bank) if args.impl == "fact" or edge is Edge.EDGE_MATRICES else None
    total = OpCounter()
    c, details = x, []
    for _ in range(args.levels):
        step = OpCounter()
        if edge is Edge.EDGE_MATRICES:
            w = edge_dwt(c, bank, step, "factored" if args.impl == "fact" else "reference")
        elif args.impl == "fact":
            w = dwt_factored(c, s, edge, step)
        else:
            w = dwt_reference(c, bank, edge, step)
        total.tally(*step.as_tuple())
        details.append(np.asarray(w.d))
        c = np.asarray(w.c)
    _write_signal(args.output, MultilevelCoeffs(c, details).flat())
    _report_count(args, total)
    return 0


def _grid_transform(args, dim: int) -> int:
    from .factorization import factor
    from .transform1d import Edge
    from .transform_nd import (
        dwt2_blocked,
        dwt2_separable,
        dwt3_blocked,
        dwt3_separable,
        dwt_nd_reference,
        read_grid,
        write_grid,
    )

    bank = _bank(args.filter)
    g = read_grid(args.input)
    if g.ndim != dim or len(set(g.shape)) != 1:
        raise ValidationError(f"expected a cubic {dim}-D grid, got shape {g.shape}")
    n = g.shape[0]
    if args.levels < 1 or n % (1 << args.levels):
        raise ValidationError(f"side {n} is not divisible by 2^{args.levels}")
    if Edge.parse(args.edge) is not Edge.PERIODIZE:
        raise ValidationError("grid transforms support periodize edges only")
    s = factor(bank)
    fn = {
        "sep": dwt2_separable if dim == 2 else dwt3_separable,
        "block": dwt2_blocked if dim == 2 else dwt3_blocked,
    }
    total = OpCounter()
    out = g.copy()
    m = n
    for _ in range(args.levels):
        step = OpCounter()
        corner = (slice(0, m),) * dim
        if args.impl == "ref":
            out[corner] = dwt_nd_reference(out[corner], bank, step)
        else:
            out[corner] = fn[args.impl](out[corner], s, counter=step)
        total.tally(*step.as_tuple())
        m //= 2
    write_grid(args.output, out)
    _report_count(args, total)
    return 0


def cmd_dwt2(args) -> int:
    return _grid_transform(args, 2)


def cmd_dwt3(args) -> int:
    return _grid_transform(args, 3)


def _parse_kv(text: str) -> dict[str, str]:
    kv = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"expected 'key = value', got {line!r}")
        k, v = line.split("=", 1)
        kv[k.strip()] = v.strip()
    return kv


def _edge_spec(text: str):
    from .edges import EdgeSpec, GridSpec

    kv = _parse_kv(text)

    def grid(key):
        if key not in kv:
            return GridSpec(0.1)
        parts = [float(v) for v in kv[key].split(",")]
        return GridSpec(parts[0], parts[1] if len(parts) > 1 else None, parts[2] if len(parts) > 2 else 10.5)

    try:
        return EdgeSpec(
            int(kv["poly_degree"]),
            tuple(_int_list(kv.get("left_moments", ""))),
            tuple(_int_list(kv.get("right_moments", ""))),
            grid("left_grid"),
            grid("right_grid"),
        )
    except KeyError as exc:
        raise ValidationError(f"edge spec is missing {exc}") from exc


def cmd_edges(args) -> int:
    from .edges import build_edge_operators, edge_bounds, format_edge_set

    spec = _edge_spec(Path(args.spec).read_text()) if args.spec else None
    ops = build_edge_operators(_bank(args.filter), spec)
    if args.action == "build":
        text = format_edge_set(ops)
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        return 0
    print(f"{'side':<6} {'row':<4} {'Q':>10} {'P':>10}")
    for (side, lab), b in edge_bounds(ops).items():
        print(f"{side:<6} {lab:<4} {b['Q']:10.4f} {b['P']:10.4f}")
    return 0


def cmd_packets(args) -> int:
    from .factorization import factor
    from .packets import local_cosine_table, local_sine_table, wavelet_packet_table, write_table_csv

    x = _read_signal(args.input)
    counter = OpCounter()
    if args.kind == "wavelet":
        table = wavelet_packet_table(x, factor(_bank(args.filter)), args.depth, counter)
    elif args.kind == "lct":
        table = local_cosine_table(x, args.depth, args.radius)
    else:
        table = local_sine_table(x, args.depth, args.radius)
    write_table_csv(args.output, table)
    if args.kind == "wavelet":
        _report_count(args, counter)
    return 0


def _model_paths(out: Path) -> tuple[Path, Path, Path]:
    return out / "ldb.txt", out / "classifier.txt", out / "dictionary.txt"


def cmd_ldb(args) -> int:
    from .ldb import (
        HypersphereClassifier,
        energy_maps,
        extract_features,
        fit_hypersphere,
        ldb_select,
        make_dictionary,
        misclassification_rate,
        rank_features,
        read_ldb_result,
        write_ldb_result,
    )
    from .radar import read_dataset

    ds, _ = read_dataset(args.data)
    model = Path(args.model)
    ldb_path, clf_path, dict_path = _model_paths(model)
    if args.action == "classify":
        kv = _parse_kv(dict_path.read_text())
        d = make_dictionary(kv["dictionary"], int(kv["depth"]))
        _, ranked = read_ldb_result(ldb_path)
        clf = HypersphereClassifier.loads(clf_path.read_text())
        feats = extract_features([d.analyze(x) for x in ds.test], ranked[: args.features])
        err = misclassification_rate(clf, feats, ds.test_labels)
        print(f"test_error {err!r}")
        return 0
    depth = 0 if args.dict in ("std", "dct4") else args.depth
    d = make_dictionary(args.dict, depth)
    maps = energy_maps(ds.by_class("train"), d)
    res = ldb_select(maps, args.measure, d.name)
    ranked = rank_features(res, maps, args.measure)
    model.mkdir(parents=True, exist_ok=True)
    write_ldb_result(ldb_path, res, ranked)
    dict_path.write_text(f"dictionary = {d.name}\ndepth = {d.depth}\nmeasure = {args.measure}\n")
    print(f"total_delta {res.total!r}")
    print(f"cover_size {len(res.cover)}")
    if args.action == "train":
        top = ranked[: args.features]
        feats = extract_features([d.analyze(x) for x in ds.train], top)
        clf = fit_hypersphere(feats, ds.train_labels)
        clf_path.write_text(clf.dumps())
        print(f"m {clf.m}")
        print(f"r {clf.r!r}")
        print(f"train_error {misclassification_rate(clf, feats, ds.train_labels)!r}")
    return 0


def cmd_radar(args) -> int:
    from .radar import RadarConfig, far_field_error, make_dataset, parse_classes, sample_distribution, write_dataset

    seed = _seed(args.seed)
    if args.action == "farfield":
        cfg = RadarConfig(samples=args.points)
        rng = np.random.default_rng(seed)
        worst = max(far_field_error(sample_distribution(n, np.pi / 4, rng), cfg) for n in (2, 3) for _ in range(args.trials))
        print(f"far_field_error {worst!r}")
        return 0
    cfg = RadarConfig(samples=args.len)
    ds = make_dataset(parse_classes(args.classes), args.train, args.test, cfg, seed)
    write_dataset(args.out, ds, cfg, seed)
    print(f"wrote {len(ds.train_labels)} train and {len(ds.test_labels)} test signals to {args.out}")
    return 0


def cmd_experiment(args) -> int:
    from dataclasses import fields, replace

    from .experiment import ExperimentSpec, run_experiment

    spec = ExperimentSpec.loads(Path(args.spec).read_text()) if args.spec else ExperimentSpec()
    overrides = {f.name: getattr(args, f.name) for f in fields(ExperimentSpec) if getattr(args, f.name, None) is not None}
    if args.seed is None and "seed" not in overrides and not args.spec:
        overrides["seed"] = _seed(None)
    spec = replace(spec, **overrides)
    report = run_experiment(spec)
    sys.stdout.write(report.table())
    print(f"# {report.seconds:.2f} s")
    if args.out:
        report.write(args.out)
    return 0


def cmd_bench(args) -> int:
    from .experiment import bench_opcounts, format_bench
    from .library import bank_names

    names = list(bank_names()) if args.filters == "all" else [v.strip() for v in args.filters.split(",")]
    rows = bench_opcounts(names, _int_list(args.sizes), args.dims, strict=False)
    sys.stdout.write(format_bench(rows))
    bad = [f"{r.bank} n={r.n} dim={r.dim}" for r in rows if not r.ok]
    if bad:
        raise CountMismatch(bad)
    return 0


# ---------------------------------------------------------------------------
# Parser


def _transform_flags(p, impls, default):
    p.add_argument("--filter", required=True, help="built-in bank name or filter text file")
    p.add_argument("--levels", type=int, default=1)
    p.add_argument("--edge", default="periodize", choices=["periodize", "mirror", "edgemat"])
    p.add_argument("--impl", default=default, choices=impls)
    p.add_argument("--count", action="store_true", help="print multiply and add counts")
    p.add_argument("input")
    p.add_argument("output")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="rotawave", description="Factored wavelet transforms, packet dictionaries and LDB classification.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("filters", help="list, show or check filter banks")
    p.add_argument("action", choices=["list", "show", "check"])
    p.add_argument("name", nargs="?")
    p.add_argument("--part", default="low", choices=["low", "high", "synth-low", "synth-high"])
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_filters)

    p = sub.add_parser("factor", help="print the rotation schedule of a bank")
    p.add_argument("name")
    p.add_argument("--cost", type=int, metavar="N", help="also print the predicted cost at length N")
    p.set_defaults(func=cmd_factor)

    p = sub.add_parser("dwt", help="1-D transform of a CSV or .bin signal")
    _transform_flags(p, ["ref", "fact"], "fact")
    p.set_defaults(func=cmd_dwt)
    for dim, fn in ((2, cmd_dwt2), (3, cmd_dwt3)):
        p = sub.add_parser(f"dwt{dim}", help=f"{dim}-D transform of a binary grid")
        _transform_flags(p, ["ref", "sep", "block"], "block")
        p.set_defaults(func=fn)

    p = sub.add_parser("edges", help="build edge matrices or print their bounds")
    p.add_argument("action", choices=["build", "bounds"])
    p.add_argument("filter")
    p.add_argument("--spec", help="key = value constraint file")
    p.add_argument("--out")
    p.set_defaults(func=cmd_edges)

    p = sub.add_parser("packets", help="full packet table as j,f,p,value CSV")
    p.add_argument("--kind", default="wavelet", choices=["wavelet", "lct", "lst"])
    p.add_argument("--filter", default="coif18")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--radius", type=int)
    p.add_argument("--count", action="store_true")
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(func=cmd_packets)

    p = sub.add_parser("ldb", help="select, rank and classify on a radar dataset")
    p.add_argument("action", choices=["train", "rank", "classify"])
    p.add_argument("--data", required=True, help="dataset directory from 'radar gen'")
    p.add_argument("--model", required=True, help="directory for the selection and classifier")
    p.add_argument("--dict", default="wp:coif18")
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--measure", default="m2", choices=["m2", "mp", "entropy_relative"])
    p.add_argument("--features", type=int, default=10)
    p.set_defaults(func=cmd_ldb)

    p = sub.add_parser("radar", help="generate datasets or check the far-field formula")
    rsub = p.add_subparsers(dest="action", required=True)
    g = rsub.add_parser("gen", help="write a train/test dataset directory")
    g.add_argument("out")
    g.add_argument("--classes", default="2:45,3:45", help="n:degrees pairs")
    g.add_argument("--train", type=int, default=50)
    g.add_argument("--test", type=int, default=500)
    g.add_argument("--len", type=int, default=512)
    g.add_argument("--seed", type=int)
    f = rsub.add_parser("farfield", help="worst relative error of the far-field formula")
    f.add_argument("--points", type=int, default=32)
    f.add_argument("--trials", type=int, default=10)
    f.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_radar)

    p = sub.add_parser("experiment", help="run the classification experiment")
    p.add_argument("spec", nargs="?", help="key = value spec file")
    p.add_argument("--out")
    for name, kind in (("n_a", int), ("n_b", int), ("alpha", float), ("dictionaries", str), ("depth", int),
                       ("train", int), ("test", int), ("length", int), ("features", int), ("measure", str),
                       ("seed", int)):
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=kind)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("bench", help="measured against predicted operation counts")
    p.add_argument("--filters", default="all")
    p.add_argument("--sizes", default="8,16,32,64")
    p.add_argument("--dims", type=int, default=1, choices=[1, 2, 3])
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"rotawave: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, OSError, KeyError) as exc:
        print(f"rotawave: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
