"""Acceptance criteria 1-10, one test each.

Every test prints one verdict line; the lines are repeated in an
"acceptance criteria" section at the end of the pytest run.
"""

import math
import time

import numpy as np

from appendix_b import BOUNDS, E as PUBLISHED
from rotawave.counting import OpCounter
from rotawave.edges import builtin_edge_operators, edge_bounds
from rotawave.experiment import DEFAULT_DICTS, ExperimentSpec, run_experiment
from rotawave.factorization import factor, orthonormal_schedule, predicted_cost, reference_cost, schedule_to_filters
from rotawave.filters import solve_filter_by_moments
from rotawave.ldb import EnergyMap, ldb_select
from rotawave.library import TABULATED_ALPHAS, bank_names, get_bank
from rotawave.packets import (
    BellSet,
    dct_iv,
    enumerate_covers,
    fold,
    local_cosine_table,
    unfold,
    wavelet_packet_table,
)
from rotawave.radar import (
    RadarConfig,
    far_field_error,
    sample_distribution,
    synthesize_complex,
    synthesize_exact_complex,
)
from rotawave.transform1d import dwt_factored, dwt_reference, idwt_factored, imultilevel, multilevel
from rotawave.transform_nd import (
    dwt2_blocked,
    dwt2_separable,
    dwt3_blocked,
    dwt3_separable,
    dwt_nd_reference,
    idwt2_blocked,
    idwt3_blocked,
    predicted_cost_nd,
)

H4_TABLE = (0.482962913, 0.836516304, 0.224143868, -0.129409523)
SIZES = (8, 16, 32, 64)


def alpha_deviation(bank, name):
    ours = np.array(factor(bank).alphas)
    table = np.array(TABULATED_ALPHAS[name])
    return min(np.abs(ours - table).max(), np.abs(-ours[::-1] - table).max())


def test_criterion_1_factorization_regression(verdict):
    banks = {name: get_bank(name) for name in TABULATED_ALPHAS}
    t0 = time.perf_counter()
    dev = {name: alpha_deviation(bank, name) for name, bank in banks.items()}
    seconds = time.perf_counter() - t0
    bad = {k: f"{v:.2e}" for k, v in dev.items() if v > 1e-6}
    ok = not bad and seconds < 1.0
    verdict(1, ok, f"{len(dev) - len(bad)}/{len(dev)} lists within 1e-6, {seconds:.2f} s, off: {bad}")


def test_criterion_2_filter_table_regression(verdict):
    h = schedule_to_filters(orthonormal_schedule(TABULATED_ALPHAS["daub4"])).analysis_low.array
    coeff_err = float(np.abs(h - H4_TABLE).max())
    a = np.array(solve_filter_by_moments(4, 2).alphas)
    solver_err = float(np.abs(a - [1 / math.sqrt(3), math.sqrt(3) - 2]).max())
    ok = coeff_err <= 1e-8 and solver_err <= 1e-10
    verdict(2, ok, f"daub4 taps off by {coeff_err:.1e}, solver off by {solver_err:.1e}")


def test_criterion_3_oracle_equivalence(verdict):
    rng = np.random.default_rng(3)
    worst1 = worst2 = worst3 = 0.0
    parities = set()
    for name in bank_names():
        b, s = get_bank(name), factor(get_bank(name))
        parities.add(b.parity)
        for n in (8, 64, 256):
            for _ in range(100):
                x = rng.standard_normal(n)
                w, r = dwt_factored(x, s), dwt_reference(x, b)
                worst1 = max(worst1, np.abs(w.interleaved() - r.interleaved()).max())
        g = rng.standard_normal((16, 16))
        ref = dwt_nd_reference(g, b)
        worst2 = max(worst2, np.abs(dwt2_separable(g, s) - ref).max(), np.abs(dwt2_blocked(g, s) - ref).max())
        c = rng.standard_normal((8, 8, 8))
        ref = dwt_nd_reference(c, b)
        worst3 = max(worst3, np.abs(dwt3_separable(c, s) - ref).max(), np.abs(dwt3_blocked(c, s) - ref).max())
    ok = worst1 <= 1e-9 and worst2 <= 1e-8 and worst3 <= 1e-8 and len(parities) == 5
    verdict(3, ok, f"{len(parities)} parity classes; 1-D {worst1:.1e}, 2-D {worst2:.1e}, 3-D {worst3:.1e}")


def _corner_levels(g, s, levels, fwd):
    out = g.copy()
    m = g.shape[0]
    for _ in range(levels):
        corner = (slice(0, m),) * g.ndim
        out[corner] = fwd(out[corner], s)
        m //= 2
    return out


def _corner_inverse(w, s, levels, inv):
    out = w.copy()
    sizes = [w.shape[0] >> k for k in range(levels)]
    for m in reversed(sizes):
        corner = (slice(0, m),) * w.ndim
        out[corner] = inv(out[corner], s)
    return out


def test_criterion_4_perfect_reconstruction(verdict):
    rng = np.random.default_rng(4)
    worst1 = worst_nd = 0.0
    for name in bank_names():
        s = factor(get_bank(name))
        x = rng.standard_normal(64)
        worst1 = max(worst1, np.abs(idwt_factored(dwt_factored(x, s), s) - x).max())
        worst1 = max(worst1, np.abs(imultilevel(multilevel(x, s, 3), s) - x).max())
        for shape, fwd, inv in (((32, 32), dwt2_blocked, idwt2_blocked), ((16, 16, 16), dwt3_blocked, idwt3_blocked)):
            g = rng.standard_normal(shape)
            worst_nd = max(worst_nd, np.abs(inv(fwd(g, s), s) - g).max())
            w = _corner_levels(g, s, 3, fwd)
            worst_nd = max(worst_nd, np.abs(_corner_inverse(w, s, 3, inv) - g).max())
    ok = worst1 <= 1e-10 and worst_nd <= 1e-9
    verdict(4, ok, f"1-D {worst1:.1e}, 2-D/3-D {worst_nd:.1e}")


def test_criterion_5_operation_counts(verdict):
    bad = {}
    cells = 0
    for name in bank_names():
        s = factor(get_bank(name))
        for n in SIZES:
            for dim in (1, 2, 3):
                c = OpCounter()
                if dim == 1:
                    dwt_factored(np.zeros(n), s, counter=c)
                    want = predicted_cost(s, n)
                else:
                    (dwt2_blocked if dim == 2 else dwt3_blocked)(np.zeros((n,) * dim), s, counter=c)
                    want = predicted_cost_nd(s, n, dim)
                cells += 1
                if c.as_tuple() != want:
                    # one example per bank and dimension
                    bad.setdefault(f"{name} {dim}-D", []).append(f"n={n} {c.as_tuple()} vs {want}")
    # headline ratios as derived quantities
    s6 = factor(get_bank("daub6"))
    c = OpCounter()
    dwt_factored(np.zeros(64), s6, counter=c)
    save1 = 1 - c.mults / reference_cost(get_bank("daub6"), 64)[0]
    c2 = OpCounter()
    dwt2_blocked(np.zeros((64, 64)), s6, counter=c2)
    save2 = 1 - c2.mults / (2 * 6 * 64 * 64)
    total2 = 1 - (c2.mults + c2.adds) / (2 * (6 + 5) * 64 * 64)
    ratios_ok = math.isclose(save1, 1 - (6 / 2 + 1) / 6) and math.isclose(save2, 1 - 3 / 16)
    off = sum(len(v) for v in bad.values())
    examples = "; ".join(f"{k} {v[0]}" for k, v in bad.items())
    detail = (f"{cells - off}/{cells} cells exact; daub6 savings 1-D {100 * save1:.1f}% mults, "
              f"2-D {100 * save2:.1f}% mults, {100 * total2:.1f}% total; off: {examples}")
    verdict(5, not bad and ratios_ok, detail)


def _mismatches(ours, pub):
    count = 0
    for idx, p in np.ndenumerate(pub):
        o = ours[idx]
        if abs(p) < 1e-6 and abs(o) < 1e-6:
            continue
        if abs(o - p) > 1e-4 * max(abs(p), 1e-6):
            count += 1
    return count


def test_criterion_6_edge_matrices(verdict):
    bad_entries = {}
    bad_bounds = {}
    for name in ("daub6", "daub8", "daub10", "daub12", "coif6", "coif8", "coif12"):
        ops = builtin_edge_operators(name)
        for side in ("left", "right"):
            E = getattr(ops, side)
            k = _mismatches(E.matrix, PUBLISHED[name, side]) + _mismatches(E.inverse, PUBLISHED[name, side + "_inv"])
            if k:
                bad_entries[f"{name} {side}"] = k
        b = edge_bounds(ops)
        for key, (P, Q) in BOUNDS[name].items():
            if float(f"{b[key]['P']:.3g}") != P or float(f"{b[key]['Q']:.3g}") != Q:
                bad_bounds.setdefault(name, []).append(key[0][0] + key[1])
    ok = not bad_entries and not bad_bounds
    verdict(6, ok, f"entry mismatches {bad_entries}; bound mismatches {bad_bounds}")


def _tree_sum(delta, nodes, j=0, k=0):
    if (j, k) in nodes:
        return delta[(j, k)]
    return _tree_sum(delta, nodes, j + 1, 2 * k) + _tree_sum(delta, nodes, j + 1, 2 * k + 1)


def test_criterion_7_ldb_optimality(verdict):
    rng = np.random.default_rng(7)
    covers = {J: [set(c.nodes) for c in enumerate_covers(J)] for J in range(4)}
    failures = 0
    for trial in range(1000):
        J = trial % 4
        n = int(rng.choice([8, 16, 32]))
        classes = int(rng.integers(2, 4))
        maps = EnergyMap([[rng.random((1 << j, n >> j)) for j in range(J + 1)] for _ in range(classes)],
                         [1] * classes)
        res = ldb_select(maps)
        brute = max(_tree_sum(res.node_delta, c) for c in covers[J])
        failures += res.total != brute
    verdict(7, failures == 0, f"{1000 - failures}/1000 trials exactly optimal")


def test_criterion_8_dictionary_orthogonality(verdict):
    rng = np.random.default_rng(8)
    inv = max(np.abs(dct_iv(dct_iv(x)) - x).max() for x in (rng.standard_normal(n) for n in (8, 64, 256, 1000, 1024)))
    x = rng.standard_normal(1024)
    energy = float(x @ x)
    lct = max(abs(float((lv**2).sum()) - energy) / energy for lv in local_cosine_table(x, 5, 8).levels)
    wp = 0.0
    for name in ("daub4", "coif18", "daub20"):
        t = wavelet_packet_table(x, factor(get_bank(name)), 5)
        wp = max(wp, max(abs(float((lv**2).sum()) - energy) / energy for lv in t.levels))
    folds = 0.0
    for kind in ("cosine", "sine"):
        for r in (0, 4, 16):
            b = BellSet.uniform(1024, 16, r)
            folds = max(folds, np.abs(unfold(fold(x, b, kind), b, kind) - x).max())
    ok = inv <= 1e-10 and lct <= 1e-9 and wp <= 1e-9 and folds <= 1e-10
    verdict(8, ok, f"DCT-IV {inv:.1e}, LCT {lct:.1e}, packets {wp:.1e}, fold {folds:.1e}")


def test_criterion_9_classification(verdict):
    spec = ExperimentSpec(n_a=2, n_b=3, alpha=45.0, dictionaries=DEFAULT_DICTS, depth=6, train=50, test=500,
                          length=512, seed=42)
    t0 = time.perf_counter()
    report = run_experiment(spec)
    control = run_experiment(ExperimentSpec(n_a=2, n_b=2, alpha=45.0, dictionaries=("std", "wp:coif18"), depth=6,
                                            train=50, test=500, length=512, seed=42))
    seconds = time.perf_counter() - t0
    best = report.best_packet()
    std = report.row("std").test_error
    ctrl = [r.test_error for r in control.rows]
    ok = best.test_error < 0.35 and best.test_error < std and all(0.40 <= e <= 0.60 for e in ctrl) and seconds < 60
    errors = ", ".join(f"{r.name} {100 * r.test_error:.1f}%" for r in report.rows)
    control_text = ", ".join(f"{100 * e:.1f}%" for e in ctrl)
    verdict(9, ok, f"test errors {errors}; control {control_text}; {seconds:.1f} s")


def test_criterion_10_far_field(verdict):
    cfg = RadarConfig(samples=32)
    rng = np.random.default_rng(10)
    worst = scaled = 0.0
    for n in (2, 3):
        for _ in range(20):
            d = sample_distribution(n, math.pi / 4, rng)
            worst = max(worst, far_field_error(d, cfg))
            a, b = synthesize_complex(d, cfg), synthesize_exact_complex(d, cfg)
            scaled = max(scaled, np.abs(a - b).max() / np.abs(b).max())
    detail = f"worst pointwise relative error {worst:.3g}, relative to peak {scaled:.3g}, over 40 seeded draws"
    verdict(10, worst <= 1e-3, detail)
