import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from multifractal.mfdfa import (
    DEFAULT_Q_GRID,
    DegenerateSegmentError,
    FluctuationSurface,
    MfdfaConfig,
    compute_profile,
    default_scale_grid,
    detrend_segment,
    fluctuation_at,
    fluctuation_surface,
    segment_variances,
)
from multifractal.surrogates import RngStream
from multifractal.synth import white_noise


# --- profile ------------------------------------------------------------

def test_profile_examples():
    assert compute_profile([1.0, 2.0, 3.0, 2.0]).values.tolist() == [-1.0, -1.0, 0.0, 0.0]
    assert compute_profile([1, -1, 1, -1]).values.tolist() == [1.0, 0.0, 1.0, 0.0]
    assert np.allclose(compute_profile([3.0] * 8).values, 0.0)


def test_profile_simple_hand_case():
    # mean 2, partial sums of [-1, 0, 1]
    y = compute_profile([1.0, 2.0, 3.0, 1.0, 2.0, 3.0]).values
    assert y.tolist() == [-1.0, -1.0, 0.0, -1.0, -1.0, 0.0]


def test_profile_needs_four_points():
    with pytest.raises(ValueError):
        compute_profile([1.0, 2.0, 3.0])


@given(st.lists(st.floats(min_value=-1e3, max_value=1e3, allow_nan=False),
                min_size=4, max_size=200))
def test_profile_endpoint_vanishes(values):
    prof = compute_profile(values)
    bound = 1e-9 * len(values) * max(np.max(np.abs(values)), 1e-30)
    assert abs(prof.values[-1]) <= max(bound, 1e-30)


# --- detrending ---------------------------------------------------------

def test_detrend_exact_linear():
    _, var = detrend_segment([2.0, 4.0, 6.0, 8.0], 1)
    assert var == pytest.approx(0.0, abs=1e-24)


def test_detrend_exact_quadratic():
    _, var = detrend_segment([1.0, 4.0, 9.0, 16.0, 25.0], 2)
    assert var == pytest.approx(0.0, abs=1e-20)


def test_detrend_mean_only():
    # order 0: mean 0.5, residuals +-0.5
    coeffs, var = detrend_segment([0.0, 1.0, 0.0, 1.0, 0.0, 1.0], 0)
    assert var == pytest.approx(0.25, abs=1e-12)
    assert coeffs[0] == pytest.approx(0.5, abs=1e-12)


def test_detrend_coefficients_in_index_basis():
    # y = 3 + 2*i on i = 1..6
    seg = 3.0 + 2.0 * np.arange(1, 7)
    coeffs, var = detrend_segment(seg, 1)
    assert np.allclose(coeffs, [3.0, 2.0], atol=1e-9)
    assert var < 1e-20


def test_detrend_too_short():
    with pytest.raises(ValueError):
        detrend_segment([1.0, 2.0, 3.0], 2)


@given(st.lists(st.floats(min_value=-10, max_value=10, allow_nan=False),
                min_size=5, max_size=30),
       st.integers(min_value=0, max_value=2))
def test_detrend_optimality(values, m):
    """Perturbing any fitted coefficient never lowers the residual sum."""
    coeffs, var = detrend_segment(values, m)
    y = np.asarray(values)
    i = np.arange(1, len(y) + 1, dtype=float)
    base = np.sum((y - np.polynomial.polynomial.polyval(i, coeffs)) ** 2)
    for j in range(m + 1):
        for delta in (1e-3, -1e-3):
            c = coeffs.copy()
            c[j] += delta
            perturbed = np.sum((y - np.polynomial.polynomial.polyval(i, c)) ** 2)
            assert perturbed >= base - 1e-9 * max(base, 1.0)


# --- segmentation -------------------------------------------------------

def brute_force_variances(y, s, m):
    """Direct transcription of the two-ended segmentation definition."""
    n = len(y)
    n_s = n // s
    out = []
    for p in range(1, n_s + 1):  # forward: Y[(p-1)s + i], i = 1..s
        seg = [y[(p - 1) * s + i - 1] for i in range(1, s + 1)]
        out.append(_poly_resid_var(seg, m))
    for p in range(n_s + 1, 2 * n_s + 1):  # reversed end: Y[N - (p-N_s)s + i]
        seg = [y[n - (p - n_s) * s + i - 1] for i in range(1, s + 1)]
        out.append(_poly_resid_var(seg, m))
    return np.array(out)


def _poly_resid_var(seg, m):
    i = np.arange(1, len(seg) + 1, dtype=float)
    coef = np.polynomial.polynomial.polyfit(i, seg, m)
    resid = np.asarray(seg) - np.polynomial.polynomial.polyval(i, coef)
    return float(np.mean(resid**2))


def test_segment_variances_against_brute_force():
    rng = np.random.default_rng(0)
    y = compute_profile(rng.standard_normal(50))
    got = segment_variances(y, 7, 2)
    want = brute_force_variances(y.values, 7, 2)
    assert got.shape == (2 * (50 // 7),)
    assert np.allclose(got, want, rtol=1e-9, atol=1e-12)


def test_segment_variances_indexing_n10_s4():
    """N=10, s=4: forward [1..4],[5..8]; backward [7..10],[3..6]."""
    y = compute_profile(np.arange(10.0) ** 3 % 7)
    got = segment_variances(y, 4, 1)
    v = y.values
    want = [
        _poly_resid_var(v[0:4], 1),
        _poly_resid_var(v[4:8], 1),
        _poly_resid_var(v[6:10], 1),
        _poly_resid_var(v[2:6], 1),
    ]
    assert np.allclose(got, want, rtol=1e-9)


def test_segment_variances_two_ends_permute_when_aligned():
    # N = 2s: both passes cover the same two segments
    rng = np.random.default_rng(1)
    y = compute_profile(rng.standard_normal(16))
    got = segment_variances(y, 8, 2)
    assert np.allclose(np.sort(got[:2]), np.sort(got[2:]), rtol=1e-9)


def test_segment_variances_polynomial_profile_is_exact():
    from multifractal.mfdfa import ProfileSeries

    i = np.arange(24, dtype=float)
    prof = ProfileSeries(0.5 * i**2 - 3 * i + 1, 24)
    assert np.allclose(segment_variances(prof, 6, 2), 0.0, atol=1e-18)


def test_segment_coverage():
    """Forward and backward passes jointly cover every index."""
    n = 22
    for s in (4, 5, 6, 11):
        n_s = n // s
        covered = np.zeros(n, dtype=bool)
        for p in range(n_s):
            covered[p * s:(p + 1) * s] = True
        for p in range(n_s):
            covered[n - (p + 1) * s: n - p * s] = True
        assert covered.all()


# --- fluctuation function -------------------------------------------------

def test_fluctuation_identical_variances():
    for q in (-5.0, -1.0, 0.0, 2.0, 7.5):
        assert fluctuation_at([4.0, 4.0, 4.0], q) == pytest.approx(2.0, rel=1e-12)


def test_fluctuation_hand_values():
    # power mean: {(1/2)(1 + 4)}^(1/2); log form: exp((ln1 + ln4)/4)
    assert fluctuation_at([1.0, 4.0], 2.0) == pytest.approx(np.sqrt(2.5), rel=1e-12)
    assert fluctuation_at([1.0, 4.0], 0.0) == pytest.approx(np.sqrt(2.0), rel=1e-12)


def test_fluctuation_brute_force_cross_check():
    rng = np.random.default_rng(2)
    v = rng.uniform(0.1, 5.0, size=12)
    for q in (-8.0, -3.0, -0.5, 1.0, 2.0, 6.0):
        direct = (np.mean(v ** (q / 2.0))) ** (1.0 / q)
        assert fluctuation_at(v, q) == pytest.approx(direct, rel=1e-10)
    direct0 = np.exp(np.mean(np.log(v)) / 2.0)
    assert fluctuation_at(v, 0.0) == pytest.approx(direct0, rel=1e-10)


def test_fluctuation_degenerate_zero_variance():
    with pytest.raises(DegenerateSegmentError):
        fluctuation_at([0.0, 1.0], -2.0)
    with pytest.raises(DegenerateSegmentError):
        fluctuation_at([0.0, 1.0], 0.0)
    with pytest.raises(DegenerateSegmentError):
        fluctuation_at([0.0, 0.0], 2.0)
    # harmless for positive q
    assert fluctuation_at([0.0, 1.0], 2.0) == pytest.approx(np.sqrt(0.5), rel=1e-12)


def test_fluctuation_extreme_variances_stay_finite():
    v = np.array([1e-280, 1e-3, 1e2])
    for q in (-10.0, 10.0):
        out = fluctuation_at(v, q)
        assert np.isfinite(out) and out > 0


# --- config and surface ---------------------------------------------------

def test_config_q_grid_must_contain_0_and_2():
    with pytest.raises(ValueError):
        MfdfaConfig(q_grid=np.array([-1.0, 1.0, 3.0]))
    with pytest.raises(ValueError):
        MfdfaConfig(q_grid=np.array([0.0, 1.0]))


def test_config_scale_bounds():
    cfg = MfdfaConfig(detrend_order=2, scale_grid=np.array([3, 8, 16]))
    with pytest.raises(ValueError, match="m\\+2"):
        cfg.scales_for(400)
    cfg2 = MfdfaConfig(scale_grid=np.array([8, 16, 200]))
    with pytest.raises(ValueError, match="N/4"):
        cfg2.scales_for(400)


def test_default_scale_grid_properties():
    grid = default_scale_grid(16384)
    assert grid[0] == 6
    assert grid[-1] == 16384 // 5
    assert (np.diff(grid) > 0).all()
    assert len(grid) <= 30


def test_default_q_grid():
    assert 0.0 in DEFAULT_Q_GRID
    assert 2.0 in DEFAULT_Q_GRID
    assert DEFAULT_Q_GRID[0] == -10.0 and DEFAULT_Q_GRID[-1] == 10.0
    assert np.allclose(np.diff(DEFAULT_Q_GRID), 0.5)


def test_surface_white_noise_h2_slope():
    x = white_noise(4096, RngStream(0))
    surf = fluctuation_surface(x, MfdfaConfig())
    col = surf.F[np.flatnonzero(surf.q_grid == 2.0)[0]]
    slope = np.polyfit(np.log(surf.scale_grid), np.log(col), 1)[0]
    assert 0.4 < slope < 0.6


def test_surface_monotone_in_q():
    for seed in range(5):
        x = white_noise(512, RngStream(seed))
        surf = fluctuation_surface(x, MfdfaConfig(scale_grid=np.array([6, 10, 16, 25, 40, 64, 100])))
        for j in range(len(surf.scale_grid)):
            col = surf.F[:, j]
            assert (np.diff(col) >= -1e-12 * col[:-1]).all()


def test_surface_degenerate_cells_flagged():
    # long constant stretches force zero segment variances
    x = np.concatenate([np.zeros(128), white_noise(64, RngStream(3)), np.zeros(64)])
    with pytest.warns(UserWarning, match="degenerate"):
        surf = fluctuation_surface(x, MfdfaConfig(scale_grid=np.array([8, 16, 32, 61])))
    assert surf.degenerate
    qs = np.array([q for q, _ in surf.degenerate])
    assert (qs <= 0).all()
    assert np.isnan(surf.F).any()


def test_surface_tsv_roundtrip():
    x = white_noise(512, RngStream(1))
    surf = fluctuation_surface(x, MfdfaConfig(scale_grid=np.array([8, 16, 32, 64, 100])))
    text = surf.to_tsv()
    back = FluctuationSurface.from_tsv(text)
    assert (back.scale_grid == surf.scale_grid).all()
    assert np.allclose(back.q_grid, surf.q_grid)
    assert np.allclose(back.F, surf.F, rtol=1e-9)


def test_surface_counts():
    x = white_noise(100, RngStream(9))
    surf = fluctuation_surface(x, MfdfaConfig(scale_grid=np.array([5, 10, 25])))
    assert surf.segment_counts.tolist() == [2 * (100 // 5), 2 * (100 // 10), 2 * (100 // 25)]
