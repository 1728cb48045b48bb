import math

import numpy as np
import pytest
from scipy import special, stats

from urllc_diversity.errors import DomainError
from urllc_diversity.fading import (
    ChannelModel,
    asymptotic_lower_bound,
    db_to_linear,
    linear_to_db,
    rate_to_snr,
    sample_snr,
    sample_snr_array,
    sc_cdf,
    sc_pdf,
    snr_cdf,
    snr_pdf,
    snr_quantile,
)
from urllc_diversity.numerics import integrate, reg_lower_gamma


def test_db_conversions():
    assert db_to_linear(10.0) == pytest.approx(10.0)
    assert db_to_linear(12.0) == pytest.approx(15.848931924611133)
    assert linear_to_db(100.0) == pytest.approx(20.0)
    assert linear_to_db(0.0) == -math.inf
    assert linear_to_db(math.inf) == math.inf


def test_channel_validation():
    with pytest.raises(DomainError):
        ChannelModel(m=0.4, mean_snr=1.0)
    with pytest.raises(DomainError):
        ChannelModel(m=1.0, mean_snr=0.0)
    with pytest.raises(DomainError):
        ChannelModel(m=1.0, mean_snr=math.inf)


def test_rayleigh_cdf():
    ch = ChannelModel(m=1.0, mean_snr=10.0)
    assert snr_cdf(ch, 10.0) == pytest.approx(1 - math.exp(-1.0), abs=1e-12)
    assert snr_cdf(ch, 0.0) == 0.0


def test_nakagami_cdf_matches_incomplete_gamma():
    ch = ChannelModel.from_db(2.0, 12.0)
    value = snr_cdf(ch, 8.1896)
    assert value == pytest.approx(reg_lower_gamma(2.0, 2 * 8.1896 / ch.mean_snr), rel=1e-12)
    assert 0 < value < 1


def test_pdf_closed_forms():
    assert snr_pdf(ChannelModel(m=1.0, mean_snr=1.0), 0.0) == pytest.approx(1.0)
    ch = ChannelModel.from_db(2.0, 12.0)
    rate = 2.0 / ch.mean_snr
    expected = rate**2 * 5.0 * math.exp(-rate * 5.0)
    assert snr_pdf(ch, 5.0) == pytest.approx(expected, rel=1e-12)
    assert snr_pdf(ch, math.inf) == 0.0


@pytest.mark.parametrize("m", [1.0, 2.0, 4.0])
def test_pdf_integrates_to_one(m):
    ch = ChannelModel.from_db(m, 12.0)
    assert integrate(lambda x: snr_pdf(ch, x), 0.0, math.inf) == pytest.approx(1.0, abs=1e-9)


def test_negative_snr_rejected():
    ch = ChannelModel(m=1.0, mean_snr=1.0)
    with pytest.raises(DomainError):
        snr_cdf(ch, -1.0)
    with pytest.raises(DomainError):
        snr_pdf(ch, -1.0)


def test_quantile_inverts_cdf():
    ch = ChannelModel.from_db(2.0, 12.0)
    for prob in (0.0, 0.01, 0.5, 0.99):
        assert snr_cdf(ch, snr_quantile(ch, prob)) == pytest.approx(prob, abs=1e-12)
    with pytest.raises(DomainError):
        snr_quantile(ch, 1.0)


def test_sc_cdf_rayleigh():
    ch = ChannelModel(m=1.0, mean_snr=10.0)
    assert sc_cdf(ch, 6, 10.0) == pytest.approx((1 - math.exp(-1.0)) ** 6, rel=1e-12)


def test_sc_cdf_ordering():
    ch = ChannelModel.from_db(2.0, 12.0)
    for x in (0.5, 5.0, 20.0):
        values = [sc_cdf(ch, antennas, x) for antennas in range(1, 8)]
        assert values[0] == pytest.approx(snr_cdf(ch, x))
        assert all(b <= a for a, b in zip(values, values[1:]))


def test_sc_pdf_single_antenna_is_branch_pdf():
    ch = ChannelModel.from_db(2.0, 12.0)
    assert sc_pdf(ch, 1, 3.0) == snr_pdf(ch, 3.0)


def test_sc_pdf_rayleigh_closed_form():
    ch = ChannelModel(m=1.0, mean_snr=10.0)
    for x in (0.5, 5.0, 30.0):
        cdf = 1 - math.exp(-x / 10.0)
        expected = 6 * cdf**5 * math.exp(-x / 10.0) / 10.0
        assert sc_pdf(ch, 6, x) == pytest.approx(expected, rel=1e-10)


def test_sc_pdf_is_cdf_derivative():
    ch = ChannelModel.from_db(2.0, 12.0)
    h = 1e-5
    for x in np.linspace(0.5, 40.0, 12):
        slope = (sc_cdf(ch, 6, x + h) - sc_cdf(ch, 6, x - h)) / (2 * h)
        assert sc_pdf(ch, 6, x) == pytest.approx(slope, abs=1e-6)


def test_sc_pdf_integrates_to_one():
    ch = ChannelModel.from_db(2.0, 12.0)
    assert integrate(lambda x: sc_pdf(ch, 6, x), 0.0, math.inf) == pytest.approx(1.0, abs=1e-9)


def test_antenna_count_validation():
    ch = ChannelModel(m=1.0, mean_snr=1.0)
    with pytest.raises(DomainError):
        sc_cdf(ch, 0, 1.0)
    with pytest.raises(DomainError):
        sc_pdf(ch, 0, 1.0)


def test_asymptotic_lower_bound():
    ch = ChannelModel.from_db(2.0, 12.0)
    expected = snr_cdf(ch, 2.0 ** (256 / 200) - 1.0) ** 6
    assert asymptotic_lower_bound(ch, 256, 200, 6) == pytest.approx(expected)


def test_sample_mean():
    ch = ChannelModel.from_db(2.0, 12.0)
    samples = sample_snr_array(ch, np.random.default_rng(1), 1_000_000)
    assert samples.min() >= 0
    assert samples.mean() == pytest.approx(ch.mean_snr, abs=0.05)


def test_samples_follow_the_cdf():
    ch = ChannelModel.from_db(2.0, 12.0)
    samples = sample_snr_array(ch, np.random.default_rng(2), 1_000_000)
    result = stats.kstest(samples, lambda x: special.gammainc(ch.m, x / ch.scale))
    assert result.statistic <= 0.002


def test_rayleigh_inverse_cdf_oracle():
    ch = ChannelModel(m=1.0, mean_snr=10.0)
    for u in (0.01, 0.3, 0.9):
        assert snr_cdf(ch, -ch.mean_snr * math.log1p(-u)) == pytest.approx(u, abs=1e-12)


def test_sample_snr_scalar():
    value = sample_snr(ChannelModel(m=0.5, mean_snr=2.0), np.random.default_rng(3))
    assert isinstance(value, float)
    assert value >= 0


def test_rate_to_snr_saturates():
    assert rate_to_snr(1.0) == 1.0
    assert rate_to_snr(3.2) == pytest.approx(2.0**3.2 - 1.0)
    assert rate_to_snr(2048.0) == math.inf
    assert snr_cdf(ChannelModel(m=2.0, mean_snr=10.0), math.inf) == 1.0
