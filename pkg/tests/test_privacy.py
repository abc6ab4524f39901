"""Privacy accounting: closed form, partial sums, observation gaps, ledgers."""

import math

import numpy as np
import pytest

from cpdnes.compress import QuantizerParams, quantize
from cpdnes.engines import EngineConfig, cpdnes_step, initial_states
from cpdnes.engines import _trial_generator as trial_generator
from cpdnes.compress import StochasticQuantizer
from cpdnes.game import EnergyGameParams
from cpdnes.network import ring
from cpdnes.privacy import (
    AdjacentPair,
    PrivacyLedger,
    adjacent_energy_pair,
    build_ledger,
    delta_closed_form,
    delta_partial_sum,
    dsc_budget,
    single_step_gap,
)
from cpdnes.schedule import StepSchedule

STUDY = StepSchedule(c1=0.4, c2=1.0, c3=0.4, omega1=0.3, omega2=0.6)
HYPERBOLIC = StepSchedule(c1=0.4, c2=1.0, c3=0.4, omega1=0.4, omega2=0.6)


def test_closed_form_coefficient_table():
    # 2 * 15 * 0.16 * sqrt(1) / theta: 0.48, 0.12, 0.08
    k = math.e - 1.0  # ln(k + 1) = 1 isolates the coefficient
    for theta, coeff in ((10.0, 0.48), (40.0, 0.12), (60.0, 0.08)):
        value = delta_closed_form(k, c4=0.16, c5=1.0, C=15.0, n=1, theta=theta)
        assert abs(float(value) - coeff) < 1e-12


def test_closed_form_shape_and_clipping():
    ks = np.array([0, 1, 10, 10**9])
    vals = delta_closed_form(ks, c4=0.16, c5=1.0, C=15.0, n=1, theta=10.0)
    assert vals[0] == 0.0
    assert np.all(np.diff(vals) >= 0)
    assert vals[-1] == 1.0
    with pytest.raises(ValueError):
        delta_closed_form(1, c4=0.0, c5=1.0, C=15.0, n=1, theta=10.0)
    with pytest.raises(ValueError):
        delta_closed_form(1, c4=0.16, c5=1.0, C=15.0, n=0, theta=10.0)


def test_partial_sum_accumulates_the_step_products():
    total = STUDY.product(np.arange(7)).sum()
    expected = min(1.0, 2.0 * 15.0 / 40.0 * total)
    assert delta_partial_sum(STUDY, 7, C=15.0, n=1, theta=40.0) == pytest.approx(expected, rel=1e-12)
    assert delta_partial_sum(STUDY, 0, C=15.0, n=1, theta=40.0) == 0.0
    with pytest.raises(ValueError):
        delta_partial_sum(STUDY, -1, C=15.0, n=1, theta=40.0)


def test_partial_sum_brackets_closed_form_for_hyperbolic_product():
    """The sum of c4/(c5 s + 1) over s < k dominates the integral that yields
    the closed form, and exceeds it by at most the first term.  Checked
    pre-clipping with a wide grid so min(1, .) never binds."""
    theta, C = 4000.0, 15.0
    c4, c5 = 0.16, 1.0
    first_term = 2.0 * C / theta * c4
    for k in (1, 2, 5, 17, 120, 3000):
        closed = float(delta_closed_form(k, c4, c5, C, 1, theta))
        partial = delta_partial_sum(HYPERBOLIC, k, C, 1, theta)
        assert closed <= partial + 1e-15
        assert partial <= closed + first_term + 1e-15


def test_single_step_gap_frozen_value():
    assert single_step_gap(13.0, 17.0, theta=40.0) == pytest.approx(0.1, abs=1e-15)


def test_single_step_gap_clips_per_coordinate_and_overall():
    assert single_step_gap(0.0, 1000.0, theta=10.0) == 1.0
    assert single_step_gap(np.zeros(2), np.full(2, 30.0), theta=40.0) == 1.0
    assert single_step_gap(np.zeros(2), np.full(2, 4.0), theta=40.0) == pytest.approx(0.2)
    assert single_step_gap(17.0, 13.0, theta=40.0) == single_step_gap(13.0, 17.0, theta=40.0)
    with pytest.raises(ValueError):
        single_step_gap(1.0, 2.0, theta=0.0)
    with pytest.raises(ValueError):
        single_step_gap(np.zeros(2), np.zeros(3), theta=1.0)


def test_single_step_gap_matches_quantizer_frequencies():
    # P(q = 40 | y = 17) - P(q = 40 | y = 13) = 0.425 - 0.325 = 0.1
    draws = 1_000_000
    params = QuantizerParams.for_envelope(40.0, 90.0)
    qa, _ = quantize(np.full(draws, 13.0), params, np.random.default_rng(21))
    qb, _ = quantize(np.full(draws, 17.0), params, np.random.default_rng(22))
    diff = np.mean(qb == 40.0) - np.mean(qa == 40.0)
    assert abs(diff - 0.1) < 0.003


def test_dsc_budget_saturates_immediately_for_fine_grids():
    theta = 90.0 / 2**8
    series = dsc_budget(np.arange(10), 0.87, STUDY, C=15.0, n=1, theta=theta)
    assert series[0] == 0.0
    assert series[1] == 1.0  # one step of sensitivity already exceeds the grid
    assert np.all(np.diff(series) >= 0)
    assert dsc_budget(3, 0.87, STUDY, C=15.0, n=1, theta=theta) == 1.0
    with pytest.raises(ValueError):
        dsc_budget(3, 1.0, STUDY, C=15.0, n=1, theta=theta)


def test_dsc_budget_strictly_increasing_before_saturation():
    # a huge grid keeps the budget unclipped long enough to see the growth
    series = dsc_budget(np.arange(60), 0.87, STUDY, C=15.0, n=1, theta=1e6)
    ramp = series[series < 1.0]
    assert np.all(np.diff(ramp) > 0)


def test_dsc_budget_survives_deep_horizons():
    # r^k underflow must clip to 1, not overflow or go non-finite
    series = dsc_budget(np.array([10, 100, 10_000, 100_000]), 0.87, STUDY, C=15.0, n=1, theta=0.3515625)
    assert np.all(series == 1.0)


def test_ledger_modes_and_saturations():
    for theta, sat in ((10.0, 4), (40.0, 313), (60.0, 2573)):
        ledger = build_ledger(STUDY, theta, 5000)
        assert ledger.mode == "partial-sum"
        assert ledger.saturation_iteration() == sat
        assert np.all(np.diff(ledger.delta_series) >= 0)
        assert np.all(ledger.delta_series <= 1.0)
        assert np.allclose(
            ledger.delta_series, np.minimum(1.0, ledger.sensitivity_series / theta), atol=0
        )


def test_ledger_closed_form_mode():
    ledger = build_ledger(HYPERBOLIC, 10.0, 100)
    assert ledger.mode == "closed-form"
    expected = delta_closed_form(np.arange(101), 0.16, 1.0, 15.0, 1, 10.0)
    assert np.allclose(ledger.delta_series, expected, atol=1e-15)
    forced = build_ledger(HYPERBOLIC, 10.0, 100, mode="partial-sum")
    assert forced.mode == "partial-sum"
    with pytest.raises(ValueError):
        build_ledger(STUDY, 10.0, 100, mode="closed-form")
    with pytest.raises(ValueError):
        build_ledger(STUDY, 10.0, 100, mode="bogus")
    with pytest.raises(ValueError):
        build_ledger(STUDY, 10.0, -1)


def test_ledger_never_saturating():
    ledger = build_ledger(STUDY, 1e9, 200)
    assert ledger.saturation_iteration() is None
    assert np.all(ledger.delta_series < 1.0)


def test_ledger_dynamic_scaling_matches_dsc_budget():
    theta = 90.0 / 2**8
    ledger = build_ledger(STUDY, theta, 50, r_base=0.87)
    assert ledger.mode == "partial-sum"
    series = dsc_budget(np.arange(51), 0.87, STUDY, C=15.0, n=1, theta=theta)
    assert np.allclose(ledger.delta_series, series, rtol=1e-12)


def test_ledger_series_shape_guard():
    with pytest.raises(ValueError):
        PrivacyLedger(mode="partial-sum", theta=1.0, delta_series=np.zeros(3), sensitivity_series=np.zeros(4))


def test_adjacent_pair_construction():
    params = EnergyGameParams()
    pair = adjacent_energy_pair(params, 0, 56.5)
    assert pair.changed_player == 0
    x = np.full((5, 1), 40.0)
    ga, gb = pair.game_a.phi(x), pair.game_b.phi(x)
    assert not np.allclose(ga[0], gb[0])
    assert np.allclose(ga[1:], gb[1:], atol=0)
    with pytest.raises(ValueError):
        adjacent_energy_pair(params, 9, 56.5)
    with pytest.raises(ValueError):
        adjacent_energy_pair(params, 0, 56.0)  # must actually differ


def test_adjacent_pair_validation():
    from cpdnes.game import energy_game

    g5 = energy_game(EnergyGameParams())
    g4 = energy_game(EnergyGameParams(demand=(56.0, 40.0, 43.0, 60.0)))
    with pytest.raises(ValueError):
        AdjacentPair(game_a=g5, game_b=g4, changed_player=0)
    with pytest.raises(ValueError):
        AdjacentPair(game_a=g5, game_b=g5, changed_player=7)


def test_coinciding_broadcasts_hide_the_changed_objective():
    """Adjacency in action: run the compressed dynamics on two games that
    differ in one player's demand, feeding both the same dither stream.  On
    rounds where every broadcast coincides (seed 1 gives 40 such rounds in a
    row), the other players' entire state evolution is identical, so the
    observable difference reduces to the quantizer's two-point law."""
    pair = adjacent_energy_pair(EnergyGameParams(), 0, 56.5)
    comp = StochasticQuantizer(theta=10.0)
    horizon = 40
    cfg_a = EngineConfig(
        game=pair.game_a, topology=ring(5), schedule=STUDY,
        variant="cp-dnes", compressor=comp, iterations=horizon,
    )
    cfg_b = EngineConfig(
        game=pair.game_b, topology=ring(5), schedule=STUDY,
        variant="cp-dnes", compressor=comp, iterations=horizon,
    )
    states_a, states_b = initial_states(cfg_a), initial_states(cfg_b)
    rng_a, rng_b, rng_probe = (trial_generator(1) for _ in range(3))
    for k in range(horizon):
        ya = np.stack([p.y for p in states_a])
        yb = np.stack([p.y for p in states_b])
        u = rng_probe.random(ya.shape)
        assert np.array_equal(comp.encode(ya, u), comp.encode(yb, u))
        states_a = cpdnes_step(states_a, k, cfg_a, rng_a)
        states_b = cpdnes_step(states_b, k, cfg_b, rng_b)
    for i in range(1, 5):
        assert np.array_equal(states_a[i].x, states_b[i].x)
        assert np.array_equal(states_a[i].y, states_b[i].y)
    # the changed player itself does move
    assert abs(states_a[0].x[0] - states_b[0].x[0]) > 0.1
