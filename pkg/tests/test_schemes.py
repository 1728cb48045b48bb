import math
from functools import partial

import numpy as np
import pytest

from urllc_diversity.errors import ConvergenceError, DomainError, InfeasibleBudgetError
from urllc_diversity.fading import ChannelModel, asymptotic_lower_bound, snr_cdf, snr_pdf
from urllc_diversity.fbcode import CodeSpec, avg_fb_error, fb_error
from urllc_diversity.schemes import (
    FadingDependent,
    FixedThreshold,
    InfiniteThreshold,
    NaiveThreshold,
    SelectionCombining,
    SwitchAndStay,
    best_antenna_count,
    evaluate,
    fading_threshold,
    generalized_mean,
    naive_threshold,
    optimal_threshold,
    resolve_threshold,
    sc_error_asymptotic,
    sc_error_exact,
    single_antenna_error,
    ssc_error,
)
from urllc_diversity.timing import ProtocolBudget

FIG1_GRID_DB = tuple(float(v) for v in range(4, 21))


def _fig1_budget(**overrides):
    values = {"u": 200, "p": 4, "q": 16, "d": 24, "antennas": 6, "k": 256}
    values.update(overrides)
    return ProtocolBudget(**values)


def _fig1_channel(mean_snr_db=12.0):
    return ChannelModel.from_db(2.0, mean_snr_db)


@pytest.fixture(scope="module")
def fig1_optimum():
    b = _fig1_budget()
    return {
        snr_db: (*optimal_threshold(_fig1_channel(snr_db), b), sc_error_exact(_fig1_channel(snr_db), b))
        for snr_db in FIG1_GRID_DB
    }


def test_infinite_threshold_is_selection_combining():
    rng = np.random.default_rng(7)
    for _ in range(50):
        antennas = int(rng.integers(2, 9))
        p, q = int(rng.integers(1, 6)), int(rng.integers(1, 21))
        b = ProtocolBudget(
            u=(p + q) * antennas + int(rng.integers(1, 301)),
            p=p,
            q=q,
            d=int(rng.integers(1, 41)),
            antennas=antennas,
            k=int(rng.choice([64, 128, 256])),
        )
        ch = ChannelModel.from_db(float(rng.uniform(0.5, 4.0)), float(rng.uniform(0.0, 20.0)))
        result = ssc_error(ch, b, math.inf)
        assert result.error_prob == pytest.approx(sc_error_exact(ch, b), rel=1e-12)
        assert result.t1_terms == (0.0,) * antennas


def test_zero_threshold_transmits_on_first_antenna():
    ch, b = _fig1_channel(), _fig1_budget()
    result = ssc_error(ch, b, 0.0)
    expected = avg_fb_error(CodeSpec(k=256, n=160), partial(snr_pdf, ch))
    assert result.error_prob == pytest.approx(expected, rel=1e-7)
    assert result.t2_term == 0.0
    assert all(term == 0.0 for term in result.t1_terms[1:])


@pytest.mark.parametrize("gamma0", [0.5, 3.6, 8.19, 40.0])
def test_breakdown_sums_to_total(gamma0):
    result = ssc_error(_fig1_channel(), _fig1_budget(), gamma0)
    assert all(term >= 0 for term in result.t1_terms)
    assert result.t2_term >= 0
    assert math.fsum([*result.t1_terms, result.t2_term]) == pytest.approx(result.error_prob, abs=1e-12)
    assert result.n_values == (160, 140, 120, 100, 80, 80, 80)
    assert 0 <= result.error_prob <= 1


def test_ssc_error_is_continuous_in_threshold():
    ch, b = _fig1_channel(), _fig1_budget()
    base = ssc_error(ch, b, 3.6).error_prob
    nudged = ssc_error(ch, b, 3.6 * (1 + 1e-4)).error_prob
    assert abs(nudged - base) <= 1e-2 * base


def test_ssc_error_rejects_negative_threshold():
    with pytest.raises(DomainError):
        ssc_error(_fig1_channel(), _fig1_budget(), -1.0)


def test_sc_error_vanishes_at_high_snr():
    assert sc_error_exact(_fig1_channel(60.0), _fig1_budget()) < 1e-8


def test_sc_error_decreases_with_snr():
    b = _fig1_budget()
    values = [sc_error_exact(_fig1_channel(snr_db), b) for snr_db in (4.0, 8.0, 12.0, 16.0, 20.0)]
    assert all(later <= earlier for earlier, later in zip(values, values[1:]))


def test_sc_asymptotic_rayleigh_closed_form():
    ch = ChannelModel(m=1.0, mean_snr=10.0)
    expected = (1 - math.exp(-(2.0**3.2 - 1.0) / 10.0)) ** 6
    assert sc_error_asymptotic(ch, _fig1_budget()) == pytest.approx(expected, rel=1e-12)


def test_sc_asymptotic_tracks_exact():
    ch, b = _fig1_channel(), _fig1_budget()
    ratio = sc_error_asymptotic(ch, b) / sc_error_exact(ch, b)
    assert 0.5 <= ratio <= 2.0


def test_naive_threshold():
    assert naive_threshold(_fig1_budget()) == pytest.approx(2.0**3.2 - 1.0)
    assert naive_threshold(_fig1_budget(k=80)) == pytest.approx(1.0)
    assert naive_threshold(_fig1_budget(u=260)) == pytest.approx(2.0 ** (256 / 140) - 1.0)


def test_generalized_mean_orders():
    values = [160, 140, 120, 100, 80, 80, 80]
    assert generalized_mean(values, 1.0) == pytest.approx(760 / 7)
    assert generalized_mean(values, math.inf) == 160
    assert generalized_mean(values, -math.inf) == 80
    assert generalized_mean(values, 0.0) == pytest.approx(math.exp(np.mean(np.log(values))))
    assert 159 < generalized_mean(values, 1000.0) <= 160
    assert 80 <= generalized_mean(values, -1000.0) < 81
    with pytest.raises(DomainError):
        generalized_mean([], 1.0)
    with pytest.raises(DomainError):
        generalized_mean([80, 0], 1.0)


def test_fading_threshold_hits_its_target():
    ch, b = _fig1_channel(), _fig1_budget()
    gamma0 = fading_threshold(ch, b, math.inf)
    xi = snr_cdf(ch, 2.0**1.6 - 1.0) ** 5
    assert math.isfinite(gamma0)
    assert fb_error(CodeSpec(k=256, n=160), gamma0) == pytest.approx(xi, rel=1e-3)


@pytest.mark.parametrize("mean_snr_db", [4.0, 12.0, 20.0])
def test_fading_threshold_from_shortest_block_falls_back_to_sc(mean_snr_db):
    assert fading_threshold(_fig1_channel(mean_snr_db), _fig1_budget(), -math.inf) == math.inf


def test_fading_threshold_reports_non_convergence():
    with pytest.raises(ConvergenceError):
        fading_threshold(_fig1_channel(), _fig1_budget(), math.inf, max_iters=1)


def test_resolve_threshold():
    ch, b = _fig1_channel(), _fig1_budget()
    assert resolve_threshold(ch, b, FixedThreshold(gamma0=3.0)) == 3.0
    assert resolve_threshold(ch, b, InfiniteThreshold()) == math.inf
    assert resolve_threshold(ch, b, NaiveThreshold()) == naive_threshold(b)
    assert resolve_threshold(ch, b, FadingDependent()) == fading_threshold(ch, b)


def test_evaluate_selection_combining():
    ch, b = _fig1_channel(), _fig1_budget()
    result = evaluate(ch, b, SelectionCombining())
    assert result.error_prob == sc_error_exact(ch, b)
    assert result.threshold_used == math.inf
    assert result.strategy is None


def test_evaluate_switch_and_stay_carries_strategy():
    strategy = FixedThreshold(gamma0=3.6)
    result = evaluate(_fig1_channel(), _fig1_budget(), SwitchAndStay(strategy=strategy))
    assert result.threshold_used == 3.6
    assert result.strategy == strategy


def test_ssc_never_worse_than_sc(fig1_optimum):
    for snr_db, (_, optimum, sc_error) in fig1_optimum.items():
        assert optimum <= sc_error + 1e-12, snr_db


def test_lower_bound_below_both_schemes(fig1_optimum):
    for snr_db, (_, optimum, sc_error) in fig1_optimum.items():
        bound = asymptotic_lower_bound(_fig1_channel(snr_db), 256, 200, 6)
        assert bound <= min(sc_error, optimum), snr_db


def test_optimum_degenerates_to_sc_at_high_snr(fig1_optimum):
    b = _fig1_budget()
    for snr_db in (17.0, 18.0, 19.0, 20.0):
        gamma0, optimum, sc_error = fig1_optimum[snr_db]
        assert optimum == pytest.approx(sc_error, rel=1e-6), snr_db
        assert gamma0 >= naive_threshold(b)


def test_strategy_ordering_at_12_db(fig1_optimum):
    ch, b = _fig1_channel(), _fig1_budget()
    _, optimum, _ = fig1_optimum[12.0]
    fading = ssc_error(ch, b, fading_threshold(ch, b, math.inf)).error_prob
    naive = ssc_error(ch, b, naive_threshold(b)).error_prob
    assert optimum <= fading <= naive
    assert fading <= 1.5 * 1.1 * optimum


def test_optimum_matches_dense_grid(fig1_optimum):
    ch, b = _fig1_channel(), _fig1_budget()
    _, optimum, _ = fig1_optimum[12.0]
    grid = np.geomspace(2.0 ** (256 / 200) - 1.0, 60.0, 400)
    dense = min(ssc_error(ch, b, gamma0).error_prob for gamma0 in grid)
    assert optimum <= 1.01 * dense


def test_single_antenna_baseline():
    ch = _fig1_channel()
    expected = avg_fb_error(CodeSpec(k=256, n=184), partial(snr_pdf, ch))
    assert single_antenna_error(ch, 256, 200, 16) == pytest.approx(expected, rel=1e-7)
    with pytest.raises(InfeasibleBudgetError) as excinfo:
        single_antenna_error(ch, 256, 16, 16)
    assert excinfo.value.constraint == "u > q"


def test_sc_has_interior_optimum_antenna_count():
    ch = ChannelModel.from_db(1.0, 12.0)
    errors = [
        evaluate(ch, _fig1_budget(antennas=antennas), SelectionCombining()).error_prob
        for antennas in range(2, 10)
    ]
    best = int(np.argmin(errors))
    assert 0 < best < len(errors) - 1
    assert errors[best] < errors[0]
    assert errors[best] < errors[-1]


def test_best_antenna_count_interior():
    ch = ChannelModel.from_db(1.0, 12.0)
    choice = best_antenna_count(ch, 256, 200, 4, 16, 24, SelectionCombining(), 9)
    assert 2 <= choice.antennas < 9
    assert choice.error_prob == min(e for e in choice.errors.values() if e is not None)
    assert set(choice.errors) == set(range(1, 10))


def test_best_antenna_count_large_budget_uses_all_antennas():
    ch = ChannelModel.from_db(1.0, 12.0)
    choice = best_antenna_count(ch, 256, 100_000, 4, 16, 24, SelectionCombining(), 4)
    assert choice.antennas == 4


def test_best_antenna_count_tight_budget_uses_one_antenna():
    ch = ChannelModel.from_db(1.0, 12.0)
    choice = best_antenna_count(ch, 256, 40, 4, 16, 24, SelectionCombining(), 4)
    assert choice.antennas == 1
    assert choice.errors[2] is None


def test_best_antenna_count_without_feasible_choice():
    ch = ChannelModel.from_db(1.0, 12.0)
    with pytest.raises(InfeasibleBudgetError):
        best_antenna_count(ch, 256, 10, 4, 16, 24, SelectionCombining(), 4)
    with pytest.raises(DomainError):
        best_antenna_count(ch, 256, 200, 4, 16, 24, SelectionCombining(), 1)


def test_rates_beyond_float_range_saturate():
    ch = _fig1_channel()
    b = _fig1_budget(u=121, k=2048)
    assert naive_threshold(b) == math.inf
    assert sc_error_asymptotic(ch, b) == 1.0
    assert sc_error_exact(ch, b) == pytest.approx(1.0, abs=1e-6)
    assert asymptotic_lower_bound(ch, 200_000, 121, 6) == 1.0
    gamma0, optimum = optimal_threshold(ch, b)
    assert optimum == pytest.approx(1.0, abs=1e-6)
    assert 0.0 <= gamma0
    result = evaluate(ch, b, SwitchAndStay(strategy=NaiveThreshold()))
    assert result.threshold_used == math.inf
    assert result.error_prob == pytest.approx(1.0, abs=1e-6)


def test_breakdown_sums_to_total_near_certain_error():
    result = ssc_error(_fig1_channel(), _fig1_budget(u=121, k=2048), 1.0)
    assert result.error_prob <= 1.0
    assert math.fsum([*result.t1_terms, result.t2_term]) == pytest.approx(result.error_prob, abs=1e-12)
