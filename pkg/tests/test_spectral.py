import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from repcount.errors import AlphaOutOfRange, ConfigError
from repcount.pca import Waveform
from repcount.spectral import (
    DEFAULT_LADDER,
    FmfConfig,
    Spectrum,
    band_keep_filter,
    dft,
    dominant_bin,
    fmf,
    high_band_count,
    idft,
    kept_energy_fraction,
    max_alpha,
    parse_ladder,
    select_alpha,
)
from repcount.synth import oracle_dft

N = 32


def cosine(k, n=N, amp=1.0):
    return amp * np.cos(2 * np.pi * k * np.arange(n) / n)


def spec_of(x):
    return dft(Waveform(np.asarray(x, dtype=float)))


def test_dft_constant():
    c = dft(Waveform(np.full(10, 3.0))).coefficients
    assert abs(c[0] - 30) <= 1e-9
    assert np.max(np.abs(c[1:])) <= 1e-9


def test_dft_pure_cosine_against_oracle():
    x = cosine(3)
    c = dft(Waveform(x)).coefficients
    ref = np.array(oracle_dft(x))
    assert np.max(np.abs(c - ref)) <= 1e-9
    mags = np.abs(ref)
    assert mags[3] == pytest.approx(16, abs=1e-9)
    assert mags[29] == pytest.approx(16, abs=1e-9)
    assert np.max(np.delete(mags, [3, 29])) <= 1e-9


def test_parseval(rng):
    x = rng.standard_normal(128)
    c = dft(Waveform(x)).coefficients
    assert np.sum(x**2) == pytest.approx(np.sum(np.abs(c) ** 2) / 128, rel=1e-9)


def test_idft_round_trip(rng):
    x = rng.standard_normal(100)
    assert np.max(np.abs(idft(dft(Waveform(x))).samples - x)) <= 1e-9


def test_idft_dc_only():
    c = np.zeros(7, dtype=complex)
    c[0] = 7
    assert np.allclose(idft(Spectrum(c)).samples, 1.0, atol=1e-12)


def test_idft_reports_asymmetric_spectrum(caplog):
    c = np.zeros(8, dtype=complex)
    c[1] = 8
    with caplog.at_level(logging.WARNING, logger="repcount.spectral"):
        _, residue = idft(Spectrum(c), with_residue=True)
    assert residue == pytest.approx(1.0, abs=1e-12)
    assert "imaginary residue" in caplog.text


def test_band_keep_bins_n8():
    s = Spectrum(np.arange(1, 9, dtype=complex))
    out = band_keep_filter(s, 2).coefficients
    assert np.flatnonzero(out).tolist() == [0, 1, 7]


@pytest.mark.parametrize("n", [7, 8, 31, 32])
def test_band_keep_full_band_is_identity(n, rng):
    s = spec_of(rng.standard_normal(n))
    out = band_keep_filter(s, max_alpha(n))
    assert np.array_equal(out.coefficients, s.coefficients)


def test_band_keep_odd_n_ceil_half_is_identity(rng):
    s = spec_of(rng.standard_normal(9))
    assert math.ceil(9 / 2) == max_alpha(9)
    assert np.array_equal(band_keep_filter(s, 5).coefficients, s.coefficients)


def test_band_keep_on_cosine():
    s = spec_of(cosine(3))
    # off-signal bins are rounding noise (<= 1e-9 per the naive-DFT oracle)
    assert np.max(np.abs(band_keep_filter(s, 5).coefficients - s.coefficients)) <= 1e-9
    assert np.max(np.abs(band_keep_filter(s, 3).coefficients)) <= 1e-9


@pytest.mark.parametrize("alpha", [0, 1, 18])
def test_alpha_out_of_range(alpha):
    with pytest.raises(AlphaOutOfRange):
        band_keep_filter(spec_of(cosine(3)), alpha)


def test_high_band_count_examples():
    cfg = FmfConfig()
    assert high_band_count(Spectrum(np.zeros(N)), cfg) == 0
    assert high_band_count(spec_of(cosine(3)), cfg) == 0
    assert high_band_count(spec_of(cosine(3) + cosine(12)), FmfConfig(beta=0.5)) == 1


def test_high_band_count_threshold_is_inclusive():
    c = np.zeros(N, dtype=complex)
    c[2], c[10], c[11] = 10, 2, 1.999
    assert high_band_count(Spectrum(c), FmfConfig(beta=0.2)) == 1


def test_select_alpha_ladder_start():
    # b = 0 and a slow dominant bin: first ladder rung
    assert select_alpha(spec_of(cosine(3, 64)), FmfConfig()) == 15


def test_select_alpha_fixed_override():
    s = spec_of(cosine(3, 64) + cosine(25, 64))
    assert select_alpha(s, FmfConfig(fixed_alpha=20)) == 20
    assert select_alpha(s, FmfConfig(fixed_alpha=1)) == 2
    assert select_alpha(s, FmfConfig(fixed_alpha=500)) == max_alpha(64)


def test_select_alpha_ladder_exhausted():
    c = np.zeros(256, dtype=complex)
    c[2] = c[-2] = 100
    for k in range(70, 80):
        c[k] = c[-k] = 50
    s = Spectrum(c)
    assert high_band_count(s, FmfConfig()) == 10
    assert select_alpha(s, FmfConfig()) == 35


@pytest.mark.parametrize("b, expected", [(0, 15), (1, 15), (2, 20), (3, 20), (4, 25), (6, 25), (7, 35), (99, 35)])
def test_ladder_rungs(b, expected):
    from repcount.spectral import ladder_alpha

    assert ladder_alpha(b, DEFAULT_LADDER) == expected


def test_dominant_guard_keeps_fast_fundamental():
    s = spec_of(cosine(40, 640))
    assert dominant_bin(s) == 40
    assert select_alpha(s, FmfConfig()) == 61
    assert select_alpha(s, FmfConfig(keep_dominant=False)) == 15


def test_config_validation():
    with pytest.raises(ConfigError):
        FmfConfig(ladder=((3, 15), (1, 20), (math.inf, 35)))
    with pytest.raises(ConfigError):
        FmfConfig(ladder=((1, 15), (3, 20)))
    with pytest.raises(ConfigError):
        FmfConfig(ladder=((1, 1), (math.inf, 35)))
    with pytest.raises(ConfigError):
        FmfConfig(beta=1.0)
    with pytest.raises(ConfigError):
        FmfConfig(high_band_start=0.6)


def test_config_dict_round_trip():
    cfg = FmfConfig(beta=0.3, fixed_alpha=20)
    assert FmfConfig.from_dict(cfg.to_dict()) == cfg
    assert parse_ladder([{"max_bands": 2, "alpha": 10}, {"max_bands": None, "alpha": 30}]) == (
        (2.0, 10), (math.inf, 30))
    assert parse_ladder([[2, 10], ["inf", 30]]) == ((2.0, 10), (math.inf, 30))


def test_fmf_clean_sinusoid_passes():
    x = np.sin(2 * np.pi * 5 * np.arange(100) / 100)
    out, trace = fmf(Waveform(x))
    assert np.max(np.abs(out.samples - x)) <= 1e-6
    assert trace.to_dict() == {"alpha": 15, "band_count": 0,
                               "kept_energy_fraction": pytest.approx(1.0, abs=1e-12)}


def test_fmf_constant():
    out, trace = fmf(Waveform(np.full(50, -2.0)))
    assert np.allclose(out.samples, -2.0, atol=1e-12)
    assert trace.kept_energy_fraction == 1.0


def test_fmf_disabled_is_identity(rng):
    w = Waveform(rng.standard_normal(64))
    out, trace = fmf(w, FmfConfig(enabled=False))
    assert out is w
    assert trace.alpha == max_alpha(64) and trace.kept_energy_fraction == 1.0


def test_fmf_denoises_noisy_sinusoid():
    n = 256
    clean = np.sin(2 * np.pi * 5 * np.arange(n) / n)
    # -10 dB relative to the sinusoid's power of 1/2
    sigma = math.sqrt(0.5 / 10)
    worst = 1.0
    for seed in range(100):
        noisy = clean + sigma * np.random.default_rng(seed).standard_normal(n)
        out, _ = fmf(Waveform(noisy))
        worst = min(worst, np.corrcoef(out.samples, clean)[0, 1])
    assert worst >= 0.99


real_waveforms = st.integers(0, 2**32 - 1).flatmap(
    lambda seed: st.tuples(st.just(seed), st.integers(4, 300))
)


@settings(max_examples=200, deadline=None)
@given(real_waveforms)
def test_filter_properties(args):
    seed, n = args
    r = np.random.default_rng(seed)
    x = r.standard_normal(n) * 10.0 ** r.uniform(-3, 3)
    s = spec_of(x)
    alpha = int(r.integers(2, max_alpha(n) + 1))
    once = band_keep_filter(s, alpha)
    c = once.coefficients
    assert np.array_equal(band_keep_filter(once, alpha).coefficients, c)
    # conjugate symmetry survives, so the inverse is real
    assert np.allclose(c[1:], np.conj(c[1:][::-1]), rtol=0, atol=1e-9 * np.abs(s.coefficients).max())
    _, residue = idft(once, with_residue=True)
    assert residue <= 1e-9 * max(1.0, np.abs(x).max())

    fractions = [kept_energy_fraction(s, a) for a in range(2, max_alpha(n) + 1)]
    assert all(b >= a - 1e-15 for a, b in zip(fractions, fractions[1:]))

    out, trace = fmf(Waveform(x))
    assert np.sum(out.samples**2) <= np.sum(x**2) * (1 + 1e-12) + 1e-9
    assert select_alpha(s, FmfConfig()) == select_alpha(spec_of(x.copy()), FmfConfig())
