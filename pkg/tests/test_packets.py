import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rotawave.counting import OpCounter
from rotawave.errors import BadDepth, BellTooWide, InvalidCover, MisalignedBells, ValidationError
from rotawave.factorization import factor, schedule_cost
from rotawave.library import ORTHONORMAL_NAMES, get_bank
from rotawave.packets import (
    BasisCover,
    BellSet,
    PacketTable,
    count_bases,
    dct_iv,
    dst_iv,
    entropy,
    enumerate_covers,
    fold,
    local_cosine_table,
    local_sine_table,
    read_table_csv,
    reconstruct_from_cover,
    rising_cutoff,
    unfold,
    wavelet_packet_table,
    write_table_csv,
)
from rotawave.transform1d import dwt_factored, imultilevel, MultilevelCoeffs


def sched(name):
    return factor(get_bank(name))


def periodic_split(x, bank):
    """Direct periodic convolution: c[k] = sum_t H(t) x[(2k + t) mod n]."""
    n = len(x)
    k = np.arange(n // 2)
    out = []
    for f in (bank.analysis_low, bank.analysis_high):
        out.append(sum(h * x[(2 * k + t) % n] for t, h in zip(f.times(), f.coeffs)))
    return out


def convolution_tree(x, bank, depth):
    levels = [[x]]
    for _ in range(depth):
        nxt = []
        for blk in levels[-1]:
            nxt.extend(periodic_split(blk, bank))
        levels.append(nxt)
    return [np.array(lv) for lv in levels]


# wavelet packets

def test_depth_one_matches_dwt():
    x = np.random.default_rng(0).standard_normal(32)
    s = sched("daub6")
    t = wavelet_packet_table(x, s, 1)
    w = dwt_factored(x, s)
    assert np.array_equal(t.block(1, 0), w.c) and np.array_equal(t.block(1, 1), w.d)


@pytest.mark.parametrize("name", ["haar", "daub4", "coif6", "spline53", "eveneven44"])
def test_delta_table_matches_convolution_tree(name):
    x = np.zeros(32)
    x[0] = 1.0
    t = wavelet_packet_table(x, sched(name), 3)
    oracle = convolution_tree(x, get_bank(name), 3)
    for j in range(4):
        assert np.abs(t.levels[j] - oracle[j]).max() <= 1e-10


@pytest.mark.parametrize("name", ORTHONORMAL_NAMES)
def test_per_level_energy(name):
    x = np.random.default_rng(1).standard_normal(128)
    t = wavelet_packet_table(x, sched(name), 3)
    for level in t.levels:
        assert (level**2).sum() == pytest.approx((x**2).sum(), rel=1e-10)


@pytest.mark.parametrize("name", ["daub4", "coif12", "spline53", "cdf97", "oddodd75"])
def test_cover_round_trips(name):
    s = sched(name)
    rng = np.random.default_rng(2)
    x = rng.standard_normal(64)
    t = wavelet_packet_table(x, s, 3)
    for cover in (BasisCover.leaves(3), BasisCover.wavelet(3), BasisCover.random(3, rng), BasisCover([(0, 0)])):
        assert np.abs(reconstruct_from_cover(t, cover) - x).max() <= 1e-9


def test_wavelet_cover_equals_multilevel_inverse():
    s = sched("daub8")
    x = np.random.default_rng(3).standard_normal(64)
    t = wavelet_packet_table(x, s, 3)
    tree = MultilevelCoeffs(t.block(3, 0), [t.block(1, 1), t.block(2, 1), t.block(3, 1)])
    assert np.abs(reconstruct_from_cover(t, BasisCover.wavelet(3)) - imultilevel(tree, s)).max() <= 1e-12


@pytest.mark.parametrize("name", ["daub4", "coif6"])
def test_every_cover_is_orthonormal(name):
    s = sched(name)
    n, depth = 32, 3
    tables = [wavelet_packet_table(e, s, depth) for e in np.eye(n)]
    for cover in enumerate_covers(depth):
        A = np.array([t.coefficients(cover) for t in tables]).T
        assert np.abs(A @ A.T - np.eye(n)).max() <= 1e-8


def test_packet_cost_is_depth_times_single_level():
    s = sched("daub6")
    c = OpCounter()
    wavelet_packet_table(np.zeros(64), s, 4, c)
    assert c.as_tuple() == tuple(4 * v for v in schedule_cost(s, 64))


def test_depth_errors():
    with pytest.raises(BadDepth):
        wavelet_packet_table(np.zeros(24), sched("haar"), 4)
    with pytest.raises(BadDepth):
        wavelet_packet_table(np.zeros(16), sched("haar"), 0)


# covers

def test_count_bases_small():
    assert [count_bases(j) for j in range(5)] == [1, 2, 5, 26, 677]
    for j in range(4):
        assert sum(1 for _ in enumerate_covers(j)) == count_bases(j)


def test_count_bases_saturates():
    big = count_bases(8)
    assert big == 1 + count_bases(7) ** 2
    value, overflowed = count_bases(8, saturate=True)
    assert overflowed and value == 2**63 - 1
    assert count_bases(5, saturate=True) == (count_bases(5), False)
    with pytest.raises(BadDepth):
        count_bases(-1)


def test_cover_validation():
    assert BasisCover.leaves(2).is_valid(2)
    assert BasisCover([(1, 0), (2, 2), (2, 3)]).is_valid(2)
    for bad in ([(1, 0)], [(1, 0), (1, 1), (2, 1)], [(3, 0)], []):
        with pytest.raises(InvalidCover):
            BasisCover(bad).validate(2)


@given(st.integers(0, 5), st.integers(0, 2**32 - 1))
def test_random_covers_are_valid(depth, seed):
    assert BasisCover.random(depth, np.random.default_rng(seed)).is_valid(depth)


# type-IV transforms

def test_dct_iv_involution_and_norm():
    x = np.random.default_rng(5).standard_normal(32)
    assert np.abs(dct_iv(dct_iv(x)) - x).max() <= 1e-10
    assert np.linalg.norm(dct_iv(x)) == pytest.approx(np.linalg.norm(x), abs=1e-12)


@pytest.mark.parametrize("n", [8, 32, 64, 256])
def test_dct_iv_delta_column(n):
    e = np.zeros(n)
    e[0] = 1.0
    j = np.arange(n)
    col = math.sqrt(2 / n) * np.cos(np.pi * (j + 0.5) * 0.5 / n)
    assert np.abs(dct_iv(e) - col).max() <= 1e-12
    scol = math.sqrt(2 / n) * np.sin(np.pi * (j + 0.5) * 0.5 / n)
    assert np.abs(dst_iv(e) - scol).max() <= 1e-12


@given(st.integers(1, 200), st.integers(0, 2**32 - 1))
def test_fast_and_dense_paths_agree(n, seed):
    x = np.random.default_rng(seed).standard_normal(n)
    for fn in (dct_iv, dst_iv):
        assert np.abs(fn(x, fast=True) - fn(x, fast=False)).max() <= 1e-12
        assert np.abs(fn(fn(x)) - x).max() <= 1e-10


# bells and folding

def test_rising_cutoff_identity():
    t = np.linspace(-1.5, 1.5, 301)
    r = rising_cutoff(t)
    assert np.allclose(r**2 + rising_cutoff(-t) ** 2, 1.0, atol=1e-15)
    assert np.all(r[t <= -1] == 0) and np.allclose(r[t >= 1], 1.0)


def test_bells_partition_unity():
    b = BellSet.uniform(64, 4, 6)
    assert np.allclose((b.values**2).sum(axis=0), 1.0, atol=1e-12)


def test_bell_validation():
    with pytest.raises(MisalignedBells):
        BellSet(np.array([0, 8, 8]), np.array([0, 1, 0]))
    with pytest.raises(BellTooWide):
        BellSet(np.array([0, 4, 8, 12]), np.array([0, 3, 2, 0]))
    with pytest.raises(MisalignedBells):
        BellSet.uniform(30, 4, 1)


def test_rectangular_bells():
    x = np.random.default_rng(7).standard_normal(32)
    b = BellSet.uniform(32, 4, 0)
    blocks = fold(x, b)
    assert all(np.array_equal(blk, x[8 * k : 8 * k + 8]) for k, blk in enumerate(blocks))
    assert np.array_equal(unfold(blocks, b), x)


@pytest.mark.parametrize("kind", ["cosine", "sine"])
@pytest.mark.parametrize("radius", [1, 4, 8])
def test_fold_round_trip_and_energy(kind, radius):
    x = np.random.default_rng(radius).standard_normal(64)
    b = BellSet.uniform(64, 4, radius)
    blocks = fold(x, b, kind)
    assert np.abs(unfold(blocks, b, kind) - x).max() <= 1e-10
    tr = dct_iv if kind == "cosine" else dst_iv
    coeffs = np.concatenate([tr(blk) for blk in blocks])
    assert np.linalg.norm(coeffs) == pytest.approx(np.linalg.norm(x), rel=1e-10)


def test_folding_errors():
    b = BellSet.uniform(16, 2, 2)
    with pytest.raises(MisalignedBells):
        fold(np.zeros(12), b)
    with pytest.raises(ValidationError):
        fold(np.zeros(16), b, "tangent")


# local trigonometric tables

def test_depth_zero_is_plain_dct():
    x = np.random.default_rng(8).standard_normal(64)
    t = local_cosine_table(x, 0)
    assert np.abs(t.block(0, 0) - dct_iv(x)).max() <= 1e-12


def test_pure_tone():
    n, f = 128, 9
    t = np.arange(n)
    x = np.cos(np.pi * (f + 0.5) * (t + 0.5) / n)
    c = local_cosine_table(x, 3).block(0, 0)
    assert c[f] ** 2 >= 0.99 * (x**2).sum()


@pytest.mark.parametrize("kind", ["cosine", "sine"])
def test_lct_parseval_and_round_trip(kind):
    rng = np.random.default_rng(9)
    x = rng.standard_normal(256)
    t = local_cosine_table(x, 4, 8, kind)
    for level in t.levels:
        assert (level**2).sum() == pytest.approx((x**2).sum(), rel=1e-9)
    for cover in (BasisCover.leaves(4), BasisCover.random(4, rng), BasisCover([(0, 0)])):
        assert np.abs(reconstruct_from_cover(t, cover) - x).max() <= 1e-9


def test_local_sine_table_kind():
    assert local_sine_table(np.ones(32), 2).kind == "sine"


def test_lct_rejects_wide_bells():
    with pytest.raises(BellTooWide):
        local_cosine_table(np.zeros(256), 4, 16)


# entropy and I/O

def test_entropy():
    assert entropy(np.array([1.0, 0, 0, 0])) == 0.0
    assert entropy(np.ones(8)) == pytest.approx(3.0)
    with pytest.raises(ValidationError):
        entropy(np.ones(2), 0.5)


def test_table_csv_round_trip(tmp_path):
    s = sched("daub4")
    t = wavelet_packet_table(np.random.default_rng(4).standard_normal(32), s, 2)
    write_table_csv(tmp_path / "t.csv", t)
    assert (tmp_path / "t.csv").read_text().splitlines()[0] == "j,f,p,value"
    back = read_table_csv(tmp_path / "t.csv", basis=s)
    assert all(np.array_equal(a, b) for a, b in zip(back.levels, t.levels))
    assert isinstance(back, PacketTable)
