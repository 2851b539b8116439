"""Built-in filter banks.

Orthonormal banks are generated from tabulated rotation parameters and then
polished by the moment solver, so their moment conditions hold to machine
precision. Biorthogonal banks are generated from lifting recipes with unit
output scales.
"""

from __future__ import annotations

import functools

from .errors import ValidationError
from .factorization import (
    Schedule,
    lift_step,
    orthonormal_schedule,
    schedule_to_filters,
    symmetric_lift_step,
)
from .filters import FilterBank, FirFilter, Parity, solve_filter_by_moments

# Rotation parameters (first step first) for Daubechies and Coiflet filters.
TABULATED_ALPHAS: dict[str, tuple[float, ...]] = {
    "daub4": (0.5773502691, -0.2679491923),
    "daub6": (0.4122865951, 1.831178514, -0.1058894200),
    "daub8": (0.3222758836, 1.233150027, 3.856627874, -0.04600009616),
    "daub10": (0.2651451339, 0.9398995872, 2.353886784, 7.508378888, -0.02083494630),
    "daub12": (0.2255061720, 0.7643296306, 1.696013010, 4.114979257, 14.28573961, -0.009658362993),
    "daub14": (
        0.1963287126, 0.6466065217, 1.333037518, 2.764759661, 7.035232916, 27.00281769,
        -0.004543409641,
    ),
    "daub16": (
        0.1739238836, 0.5617332940, 1.103629937, 2.074598026, 4.380557848, 12.05139151,
        49.52666172, -0.002443028170,
    ),
    "daub18": (
        0.1561629731, 0.4973943657, 0.9452416623, 1.664172294, 3.114016860, 6.915226655,
        20.60043019, 96.49772819, -0.001033336055,
    ),
    "daub20": (
        0.1417287200, 0.4467987788, 0.8289658876, 1.394189716, 2.402966640, 4.635603726,
        10.98508401, 35.63003753, 183.0054911, -0.0004973444230,
    ),
    "coif6": (-0.2152504427, 0.3779644639, -0.2152504427),
    "coif8": (2.215250436, 0.1504720765, -0.7384168123, -0.451416230),
    "coif12": (-0.3952094767, -0.5625481503, 0.1165449040, 1.317233974, 6.198029576, -0.04396989341),
    "coif18": (
        -0.4874353702, -1.119071133, -0.2570708497, 0.1290348165, 0.4411074710, 2.215422179,
        8.338120664, 15.03636438, -0.009120773147,
    ),
    "coif24": (
        -0.5476023581, -1.457533881, -0.7720754411, -0.1309276144, 0.1710353887, 0.2957793746,
        0.8070747686, 3.126528296, 11.27596534, 12.66598170, 53.96686137, -0.002000409650,
    ),
    "coif30": (
        -0.5914303923, -1.718001035, -1.195010469, -0.4056552189, -0.1316532923, 0.1205373016,
        0.3671126852, 0.4678947012, 1.165968370, 4.100416655, 15.61099604, 11.59905847,
        37.56973541, 197.1316159, -0.0004543371650,
    ),
}

# The length-8 filter with 4 vanishing highpass moments from the L = 8 study
# (a different solution from the classical Daubechies filter).
ALTERNATIVE_DAUB8_ALPHAS = (-2.556583915, -0.1434214911, 0.7958755204, -2.351285662)


def moment_counts(name: str) -> tuple[int, int]:
    """(highpass moments, lowpass moments) targeted by a tabulated filter."""
    L = 2 * len(TABULATED_ALPHAS[name])
    if name.startswith("daub"):
        return L // 2, 0
    if name == "coif8":
        return 3, 2
    return L // 3, L // 3 - 1


def moment_center(name: str) -> int:
    """Tap index, counted from the first tap, about which lowpass moments vanish."""
    L = 2 * len(TABULATED_ALPHAS[name])
    if name.startswith("daub") or name == "coif8":
        return L // 2 - 1
    return L // 3


# Lifting recipes: (target parity, offset, coefficient); symmetric steps use
# ("sym", target parity, q, coefficient).
_LIFT_RECIPES: dict[str, tuple] = {
    "spline53": (("sym", 1, 1, -0.5), ("sym", 0, 1, 0.25)),
    "cdf97": (
        ("sym", 1, 1, -1.586134342059924),
        ("sym", 0, 1, -0.052980118572961),
        ("sym", 1, 1, 0.882911075530934),
        ("sym", 0, 1, 0.443506852043971),
    ),
    "sym75": (("sym", 1, 1, -0.5), ("sym", 0, 1, 0.25), ("sym", 1, 1, -0.125)),
    "oddodd53": ((1, 1, -0.75), (1, -1, -0.25), (0, 1, 0.375), (0, -1, 0.125)),
    # Lifts in the order the greedy reduction finds them, so both output
    # scales come out as 1.
    "oddodd75": (
        (1, 1, -3 / 5),
        (0, 1, 15 / 44),
        (1, -1, -44 / 125),
        (0, -1, 125 / 484),
        (1, 1, -242 / 3125),
        (1, -1, 121 / 3125),
    ),
    # synthesis lowpass is the hat (1, 2, 1), analysis highpass the second difference
    "evenodd43": ((0, -1, -0.5), (1, -1, -2.0), (0, -1, 0.375)),
    "eveneven44": ((1, -1, 1.0 / 3.0), (0, 1, 0.375), (0, -1, 1.125), (1, 1, -4.0 / 9.0)),
}

BIORTHOGONAL_NAMES = tuple(_LIFT_RECIPES)
ORTHONORMAL_NAMES = ("haar",) + tuple(TABULATED_ALPHAS)


def _recipe_steps(recipe):
    steps = []
    for item in recipe:
        if item[0] == "sym":
            _, tp, q, c = item
            steps.append(symmetric_lift_step(tp, q, c))
        else:
            steps.append(lift_step(*item))
    return steps


def _polished_alphas(name: str) -> tuple[float, ...]:
    seed = TABULATED_ALPHAS[name]
    hp, lp = moment_counts(name)
    sched = solve_filter_by_moments(
        2 * len(seed), hp, lp, seeds=[seed], n_random=0, tol=1e-10, center=moment_center(name)
    )
    return tuple(sched.alphas)


@functools.lru_cache(maxsize=None)
def get_bank(name: str) -> FilterBank:
    """Return a built-in bank by name."""
    key = name.lower()
    if key == "haar":
        return schedule_to_filters(orthonormal_schedule([1.0], name="haar"))
    if key in TABULATED_ALPHAS:
        alphas = _polished_alphas(key)
        offset = 0 if key.startswith("daub") else -moment_center(key)
        return schedule_to_filters(orthonormal_schedule(alphas, offset=offset, name=key))
    if key in _LIFT_RECIPES:
        return _bank_from_lifts(key, _recipe_steps(_LIFT_RECIPES[key]))
    raise ValidationError(f"unknown filter bank {name!r}; known: {', '.join(bank_names())}")


def _bank_from_lifts(name: str, steps) -> FilterBank:
    from .factorization import _column_filter, _row_filter

    proto = Schedule(tuple(steps), Parity.ODD_ODD, (1, 1), 0, 1, 1.0, 1.0, 1.0, name)
    h = FirFilter.from_mapping(_row_filter(proto, 0, 1.0))
    ht = FirFilter.from_mapping(_column_filter(proto, 0, 1.0))
    # flip index 0 puts the highpass read-out at position 1, next to the lowpass slot
    return FilterBank.biorthogonal(h, ht, flip_index=0, name=name)


def bank_names() -> tuple[str, ...]:
    return ORTHONORMAL_NAMES + BIORTHOGONAL_NAMES


def tabulated_schedule(name: str) -> Schedule:
    """Schedule built directly from the tabulated parameters (unpolished)."""
    alphas = TABULATED_ALPHAS[name]
    offset = 0 if name.startswith("daub") else -(len(alphas) - 1)
    return orthonormal_schedule(alphas, offset=offset, name=name)
