import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rotawave.counting import OpCounter
from rotawave.errors import BadBlockAlignment, ValidationError
from rotawave.factorization import factor
from rotawave.library import BIORTHOGONAL_NAMES, ORTHONORMAL_NAMES, get_bank
from rotawave.transform1d import dwt_factored, idwt_factored, WaveletCoeffs
from rotawave.transform_nd import (
    dwt2_blocked,
    dwt2_separable,
    dwt3_blocked,
    dwt3_separable,
    dwt_nd_reference,
    idwt2_blocked,
    idwt3_blocked,
    predicted_cost_nd,
    read_grid,
    write_grid,
)

ALL = ORTHONORMAL_NAMES + BIORTHOGONAL_NAMES


def sched(name):
    return factor(get_bank(name))


def counted(fn, g, s):
    c = OpCounter()
    fn(g, s, counter=c)
    return c.as_tuple()


def split1(x, s):
    return dwt_factored(x, s).split()


def test_rank_one_2d():
    rng = np.random.default_rng(0)
    x, y = rng.standard_normal(16), rng.standard_normal(16)
    s = sched("daub6")
    expect = np.outer(split1(x, s), split1(y, s))
    for fn in (dwt2_separable, dwt2_blocked):
        assert np.abs(fn(np.outer(x, y), s) - expect).max() <= 1e-10


def test_rank_one_3d():
    rng = np.random.default_rng(1)
    x, y, z = (rng.standard_normal(8) for _ in range(3))
    s = sched("coif6")
    expect = np.einsum("i,j,k->ijk", split1(x, s), split1(y, s), split1(z, s))
    for fn in (dwt3_separable, dwt3_blocked):
        assert np.abs(fn(np.einsum("i,j,k->ijk", x, y, z), s) - expect).max() <= 1e-9


def test_cost_examples():
    s = sched("daub6")
    assert counted(dwt2_separable, np.zeros((16, 16)), s)[0] == 7 * 256 == 1792
    assert counted(dwt2_blocked, np.zeros((16, 16)), s)[0] == 576
    assert counted(dwt3_blocked, np.zeros((8, 8, 8)), s)[0] == 3200
    assert counted(dwt2_blocked, np.zeros((18, 18)), sched("sym75"))[0] == 486
    assert counted(dwt3_blocked, np.zeros((8, 8, 8)), sched("oddodd53"))[0] == 1536


def test_spline53_uses_the_symmetric_table():
    # spline 5/3 is a symmetric pair, so the cheaper symmetric kernel applies
    assert counted(dwt3_blocked, np.zeros((8, 8, 8)), sched("spline53")) == (768, 3072)


@pytest.mark.parametrize("name", ALL)
def test_blocked_separable_reference_agree(name):
    b, s = get_bank(name), sched(name)
    rng = np.random.default_rng(len(name))
    g = rng.standard_normal((16, 16))
    ref = dwt_nd_reference(g, b)
    assert np.abs(dwt2_separable(g, s) - ref).max() <= 1e-8
    assert np.abs(dwt2_blocked(g, s) - ref).max() <= 1e-8
    c = rng.standard_normal((8, 8, 8))
    ref3 = dwt_nd_reference(c, b)
    assert np.abs(dwt3_separable(c, s) - ref3).max() <= 1e-8
    assert np.abs(dwt3_blocked(c, s) - ref3).max() <= 1e-8


@pytest.mark.parametrize("name", [n for n in ALL if n != "eveneven44"])
@pytest.mark.parametrize("n", [8, 16, 32])
def test_counts_equal_tables(name, n):
    s = sched(name)
    assert counted(dwt2_separable, np.zeros((n, n)), s) == predicted_cost_nd(s, n, 2, "separable")
    blocked = counted(dwt2_blocked, np.zeros((n, n)), s)
    table = predicted_cost_nd(s, n, 2)
    if s.parity.value == "symmetric-odd-odd":
        # 8 adds per square per step against the tabulated 9
        J = len(s.steps)
        assert blocked == (table[0], 2 * J * n * n)
    else:
        assert blocked == table
    if n <= 16:
        assert counted(dwt3_blocked, np.zeros((n,) * 3), s) == predicted_cost_nd(s, n, 3)


def test_even_even_counts_against_tables():
    # measured per-point mults: 2-D 3.75 against 4.5 tabulated, 3-D 5.375 against 4.75
    s = sched("eveneven44")
    assert counted(dwt2_blocked, np.zeros((8, 8)), s) == (240, 256)
    assert predicted_cost_nd(s, 8, 2) == (288, 320)
    assert counted(dwt3_blocked, np.zeros((8, 8, 8)), s) == (2752, 3072)
    assert predicted_cost_nd(s, 8, 3) == (2432, 3072)


def test_round_trip_examples():
    g = np.random.default_rng(11).standard_normal((16, 16))
    s = sched("daub4")
    assert np.abs(idwt2_blocked(dwt2_blocked(g, s), s) - g).max() <= 1e-10
    h = np.random.default_rng(18).standard_normal((18, 18))
    s = sched("spline53")
    assert np.abs(idwt2_blocked(dwt2_blocked(h, s), s) - h).max() <= 1e-9


@pytest.mark.parametrize("name", ALL)
def test_round_trip_all(name):
    s = sched(name)
    rng = np.random.default_rng(3)
    g = rng.standard_normal((16, 16))
    c = rng.standard_normal((8, 8, 8))
    assert np.abs(idwt2_blocked(dwt2_blocked(g, s), s) - g).max() <= 1e-9
    assert np.abs(idwt3_blocked(dwt3_blocked(c, s), s) - c).max() <= 1e-9


def test_delta_grid_gives_tensor_synthesis_wavelet():
    s = sched("daub4")
    n = 16
    w = np.zeros((n, n))
    w[n // 2 + 1, 2] = 1.0  # detail along axis 0, lowpass along axis 1
    got = idwt2_blocked(w, s)

    def column(k):
        e = np.zeros(n)
        e[k] = 1.0
        return idwt_factored(WaveletCoeffs.from_split(e), s)

    assert np.abs(got - np.outer(column(n // 2 + 1), column(2))).max() <= 1e-9


@pytest.mark.parametrize("name", ORTHONORMAL_NAMES)
def test_parseval_2d(name):
    g = np.random.default_rng(9).standard_normal((32, 32))
    assert np.linalg.norm(dwt2_blocked(g, sched(name))) == pytest.approx(np.linalg.norm(g), rel=1e-9)


@given(st.sampled_from(ALL), st.integers(0, 2**32 - 1))
def test_blocked_equals_separable_random(name, seed):
    s = sched(name)
    g = np.random.default_rng(seed).standard_normal((16, 16))
    assert np.abs(dwt2_blocked(g, s) - dwt2_separable(g, s)).max() <= 1e-8


def test_bad_shapes():
    s = sched("daub4")
    with pytest.raises(ValidationError):
        dwt2_blocked(np.zeros((8, 10)), s)
    with pytest.raises((ValidationError, BadBlockAlignment)):
        dwt2_blocked(np.zeros((7, 7)), s)
    with pytest.raises(ValidationError):
        dwt2_blocked(np.zeros((8, 8)), s, edge="mirror")
    with pytest.raises(ValidationError):
        predicted_cost_nd(s, 8, 4)


def test_grid_io(tmp_path):
    g = np.random.default_rng(2).standard_normal((4, 6, 2))
    write_grid(tmp_path / "g.bin", g)
    assert np.array_equal(read_grid(tmp_path / "g.bin"), g)
    (tmp_path / "bad.bin").write_bytes((tmp_path / "g.bin").read_bytes()[:-8])
    with pytest.raises(ValidationError):
        read_grid(tmp_path / "bad.bin")
