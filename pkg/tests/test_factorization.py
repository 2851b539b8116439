import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rotawave.factorization import (
    RotationStep,
    StepKind,
    _trim,
    factor,
    format_schedule,
    orthonormal_schedule,
    parse_schedule,
    predicted_cost,
    reference_cost,
    schedule_cost,
    schedule_to_filters,
    step_count_bound,
)
from rotawave.library import BIORTHOGONAL_NAMES, ORTHONORMAL_NAMES, TABULATED_ALPHAS, get_bank
from rotawave.transform1d import _analysis_matrix, Edge, dwt_factored, dwt_reference

ALL = ORTHONORMAL_NAMES + BIORTHOGONAL_NAMES

# Rotation parameters factored from lowpass filters built by spectral factorization
# of the maximally flat half-band polynomial (roots inside the unit circle).
SPECTRAL_DAUB = {
    4: (0.57735026919, -0.267949192431),
    6: (0.412286595052, 1.831178514534, -0.105889419948),
    8: (0.322275888, 1.23315001546, 3.856627829836, -0.046000097114),
    10: (0.265145142812, 0.93989959893, 2.353886731101, 7.508378657079, -0.020834948931),
    12: (0.225506178564, 0.764329627191, 1.696012993665, 4.114979144726, 14.285739137898, -0.009658363867),
    14: (0.19632871259, 0.64660652179, 1.333037518001, 2.764759660958, 7.035232915034, 27.002817666216,
         -0.004543409986),
    16: (0.173923883866, 0.561733290278, 1.103629935918, 2.074598030482, 4.380557794045, 12.005791399774,
         51.005881659496, -0.002158871007),
}

H4 = (0.482962913, 0.836516304, 0.224143868, -0.129409523)


def test_haar_single_step():
    s = factor(get_bank("haar"))
    assert len(s.steps) == 1 and s.steps[0].alpha == pytest.approx(1.0)
    assert s.normalization == pytest.approx(1 / math.sqrt(2))


def test_daub4_and_daub12_parameters():
    assert factor(get_bank("daub4")).alphas == pytest.approx(TABULATED_ALPHAS["daub4"], abs=1e-8)
    assert factor(get_bank("daub12")).alphas == pytest.approx(TABULATED_ALPHAS["daub12"], abs=1e-6)


@pytest.mark.parametrize("L", sorted(SPECTRAL_DAUB))
def test_daubechies_parameters_match_spectral_oracle(L):
    assert factor(get_bank(f"daub{L}")).alphas == pytest.approx(SPECTRAL_DAUB[L], abs=1e-9)


def test_spline53_steps_and_constant_input():
    b = get_bank("spline53")
    s = factor(b)
    assert [st.kind for st in s.steps] == [StepKind.TILDE_SYM3] * 2
    assert len(s.steps) == (5 + 3) // 4
    w = dwt_factored(np.ones(32), s)
    assert np.abs(w.d).max() < 1e-12
    assert np.abs(dwt_reference(np.ones(32), b).d).max() < 1e-12


def test_cdf97_matches_reference():
    b = get_bank("cdf97")
    s = factor(b)
    assert len(s.steps) <= (9 + 7) // 2
    rng = np.random.default_rng(97)
    for _ in range(64):
        x = rng.standard_normal(64)
        assert np.abs(dwt_factored(x, s).interleaved() - dwt_reference(x, b).interleaved()).max() <= 1e-9


def test_even_even_final_step_is_bar_mixed():
    s = factor(get_bank("eveneven44"))
    last = s.steps[-1]
    assert last.kind is StepKind.BAR_MIXED
    assert abs(1 + last.alpha * last.beta) > 1e-12


def test_daub4_filter_from_schedule():
    b = schedule_to_filters(orthonormal_schedule(TABULATED_ALPHAS["daub4"]))
    assert np.allclose(b.analysis_low.array, H4, atol=1e-8)


def test_single_rotation_is_haar():
    b = schedule_to_filters(orthonormal_schedule([1.0]))
    assert np.allclose(np.abs(b.analysis_low.array), [1 / math.sqrt(2)] * 2, atol=1e-15)
    assert np.allclose(b.analysis_high.array.sum(), 0.0, atol=1e-15)


def test_coif18_from_tabulated_parameters():
    b = schedule_to_filters(orthonormal_schedule(TABULATED_ALPHAS["coif18"]))
    h = b.analysis_low
    assert h.array.sum() == pytest.approx(math.sqrt(2), abs=1e-8)
    center = h.offset + 6
    # tabulated to 10 digits: moments scaled by radius**p vanish to about 1e-9
    g_moments = [abs(b.analysis_high.moment(p, center)) / 9**p for p in range(7)]
    assert max(g_moments[:6]) < 1e-8 and g_moments[6] > 1e-5
    assert max(abs(h.moment(p, center)) / 9**p for p in (1, 2)) < 1e-8


def test_cost_examples():
    assert predicted_cost(factor(get_bank("daub6")), 8) == (32, 24)
    assert predicted_cost(factor(get_bank("sym75")), 16)[0] == 24
    assert predicted_cost(factor(get_bank("haar")), 2) == (4, 2)
    assert reference_cost(get_bank("daub6"), 64) == (384, 320)


@pytest.mark.parametrize("name", [n for n in ALL if n != "eveneven44"])
def test_implemented_cost_equals_formula(name):
    s = factor(get_bank(name))
    for n in (8, 16, 64):
        assert schedule_cost(s, n) == predicted_cost(s, n)


def test_even_even_cost_is_below_formula():
    # one merged lift: the implementation saves one step against the closed form
    s = factor(get_bank("eveneven44"))
    assert schedule_cost(s, 16) == (40, 32)
    assert predicted_cost(s, 16) == (56, 40)


@pytest.mark.parametrize("name", ALL)
def test_step_count(name):
    s = factor(get_bank(name))
    bound = step_count_bound(s.parity, *s.source_lengths)
    if name == "eveneven44":
        assert len(s.steps) == bound - 1
    else:
        assert len(s.steps) == bound


@pytest.mark.parametrize("name", ALL)
def test_filters_of_factor_is_identity(name):
    b = get_bank(name)
    back = schedule_to_filters(factor(b))
    for a, c in ((b.analysis_low, back.analysis_low), (b.analysis_high, back.analysis_high),
                 (b.synthesis_low, back.synthesis_low), (b.synthesis_high, back.synthesis_high)):
        assert a.offset == c.offset and np.allclose(a.array, c.array, atol=1e-8)


@pytest.mark.parametrize("name", ORTHONORMAL_NAMES)
def test_induced_map_is_orthogonal(name):
    s = factor(get_bank(name))
    n = max(32, 2 * s.source_lengths[0])
    n += n % 2
    A = _analysis_matrix(n, s, Edge.PERIODIZE)
    assert np.abs(A @ A.T - np.eye(n)).max() <= 1e-8


@pytest.mark.parametrize("name", ["daub8", "coif12", "daub20"])
def test_each_rotation_adds_one_tap_at_both_ends(name):
    s = factor(get_bank(name))
    for slot in (s.c_offset, s.d_offset):
        seq = {slot: 1.0}
        lo, hi = slot, slot
        for step in reversed(s.steps):
            seq = _trim(step.kernel().transpose().apply(seq), 1e-14)
            assert (min(seq), max(seq)) in ((lo - 1, hi + 1), (lo - 1, hi), (lo, hi + 1))
            lo, hi = min(seq), max(seq)
        assert hi - lo + 1 == s.source_lengths[0]


@pytest.mark.parametrize("name", ALL)
def test_schedule_text_round_trip(name):
    s = factor(get_bank(name))
    t = parse_schedule(format_schedule(s))
    assert t.steps == s.steps and t.parity is s.parity
    assert (t.c_offset, t.d_offset, t.scale_c, t.scale_d) == (s.c_offset, s.d_offset, s.scale_c, s.scale_d)


alphas = st.lists(st.floats(-6, 6).filter(lambda a: abs(a) > 0.05), min_size=1, max_size=6)


@given(alphas)
def test_random_rotations_round_trip(a):
    bank = schedule_to_filters(orthonormal_schedule(a))
    again = schedule_to_filters(factor(bank))
    assert np.allclose(again.analysis_low.array, bank.analysis_low.array, atol=1e-8)
    assert np.allclose(again.analysis_high.array, bank.analysis_high.array, atol=1e-8)


@given(alphas, st.integers(1, 3))
def test_random_rotations_are_orthogonal(a, k):
    s = orthonormal_schedule(a)
    n = 2 * len(a) + 2 * k
    A = _analysis_matrix(n, s, Edge.PERIODIZE)
    assert np.abs(A @ A.T - np.eye(n)).max() <= 1e-8


def test_rotation_step_algebra():
    st_ = RotationStep(StepKind.SO2, 0.7, 0)
    assert st_.determinant() == pytest.approx(1 + 0.49)
    lift = RotationStep(StepKind.HAT_UPPER, 0.3, 0, 2)
    assert lift.determinant() == pytest.approx(1.0)
