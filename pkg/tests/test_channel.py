import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from udnsim.channel import (
    DeadLinkError,
    RadioConfig,
    beam_grid,
    beam_response,
    beamspace_transform,
    dbm_to_watt,
    effective_gain,
    pathloss_db,
    sample_blockage,
    sample_multipath,
    sample_paths,
    select_beam,
    steering_vector,
    watt_to_dbm,
)

# 20 log10(4 pi 28e9 / c), evaluated at 30 digits with mpmath.
OFFSET_28GHZ = 61.3909438487277582


def dft_matrix(n):
    """Columns are grid steering vectors, built element by element."""
    u = np.empty((n, n), dtype=complex)
    for m in range(n):
        psi = -1 + 2 * m / n
        for k in range(n):
            u[k, m] = complex(math.cos(math.pi * k * psi), math.sin(math.pi * k * psi)) / math.sqrt(n)
    return u


# --- path loss ----------------------------------------------------------------

@pytest.mark.parametrize("d, los, expected", [
    (1, True, 61.39),
    (1, False, 61.39),
    (100, True, 101.59),
])
def test_pathloss_examples(d, los, expected):
    assert pathloss_db(d, los, 28e9) == pytest.approx(expected, abs=0.01)


def test_pathloss_clamps_below_one_meter():
    assert pathloss_db(0.3, False) == pathloss_db(1.0, False)


@pytest.mark.parametrize("d", [0.0, -5.0])
def test_pathloss_rejects_non_positive(d):
    with pytest.raises(ValueError):
        pathloss_db(d, True)


@given(st.floats(1.0, 1e4), st.floats(1e-3, 100.0))
def test_pathloss_monotone_and_nlos_dominates(d, step):
    assert pathloss_db(d + step, True) > pathloss_db(d, True)
    assert pathloss_db(d + step, False) > pathloss_db(d, False)
    if d >= 1.001:
        assert pathloss_db(d, False) > pathloss_db(d, True)
    assert pathloss_db(d, False) >= pathloss_db(d, True)


def test_pathloss_vectorized_matches_scalar():
    d = np.array([1.0, 10.0, 123.4])
    los = np.array([True, False, True])
    out = pathloss_db(d, los)
    assert out == pytest.approx([pathloss_db(x, l) for x, l in zip(d, los)], abs=0)


# --- power conversion -----------------------------------------------------------

def test_dbm_examples():
    assert dbm_to_watt(0) == pytest.approx(1e-3, rel=1e-15)
    assert dbm_to_watt(-104) == pytest.approx(3.981e-14, rel=1e-3)
    assert dbm_to_watt(24) == pytest.approx(0.2512, rel=1e-3)
    assert dbm_to_watt(-math.inf) == 0.0


@given(st.floats(-200, 100))
def test_dbm_round_trip(x):
    assert watt_to_dbm(dbm_to_watt(x)) == pytest.approx(x, rel=1e-12, abs=1e-12)


# --- blockage -------------------------------------------------------------------

def test_blockage_at_zero_distance_is_los(rng):
    assert all(sample_blockage(0.0, 100.0, rng) for _ in range(1000))


def test_blockage_infinite_decay_is_los(rng):
    assert np.all(sample_blockage(np.full(1000, 450.0), math.inf, rng))


def test_blockage_frequency_at_decay_length(rng):
    los = sample_blockage(np.full(100_000, 100.0), 100.0, rng)
    assert los.mean() == pytest.approx(math.exp(-1), abs=0.01)


# --- steering vectors and beamspace ---------------------------------------------

@pytest.mark.parametrize("n", [1, 4, 64])
def test_broadside_steering(n):
    a = steering_vector(n, 0.0)
    assert np.allclose(a, 1 / math.sqrt(n))
    assert np.linalg.norm(a) == pytest.approx(1.0)


def test_single_antenna_steering():
    assert steering_vector(1, 0.7) == pytest.approx([1.0])


def test_grid_steering_orthogonal():
    n = 16
    grid = beam_grid(n)
    for m1 in range(n):
        for m2 in range(n):
            a1 = steering_vector(n, math.asin(grid[m1]))
            a2 = steering_vector(n, math.asin(grid[m2]))
            ip = sum(a1[k].conjugate() * a2[k] for k in range(n))
            assert abs(ip - (1.0 if m1 == m2 else 0.0)) < 1e-10


def test_beamspace_matches_explicit_dft(rng):
    n = 64
    u = dft_matrix(n)
    h = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    assert np.allclose(beamspace_transform(h), u.conj().T @ h, atol=1e-12)


@pytest.mark.parametrize("m", [0, 1, 17, 32, 63])
def test_beamspace_on_grid_is_one_hot(m):
    n = 64
    h = steering_vector(n, math.asin(beam_grid(n)[m]))
    expected = np.zeros(n)
    expected[m] = 1.0
    assert np.max(np.abs(beamspace_transform(h) - expected)) < 1e-10


def test_beamspace_zero_vector():
    assert np.all(beamspace_transform(np.zeros(8)) == 0)


@settings(max_examples=100)
@given(st.lists(st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)), min_size=1, max_size=80))
def test_beamspace_preserves_norm(vals):
    h = np.array([complex(a, b) for a, b in vals])
    norm = np.linalg.norm(h)
    assert np.linalg.norm(beamspace_transform(h)) == pytest.approx(norm, rel=1e-10, abs=1e-300)


# --- beam selection and effective gain -----------------------------------------

def test_select_beam_single_user_on_grid():
    n = 32
    h = steering_vector(n, math.asin(beam_grid(n)[9]))
    assert select_beam([beamspace_transform(h)]) == 9


def test_select_beam_dl_anchor_rule():
    b = np.zeros((2, 16))
    b[0, 3] = math.sqrt(2.0)
    b[1, 7] = 1.0
    assert select_beam(b, "dl") == 3
    assert select_beam(b[::-1], "dl") == 3


def test_select_beam_ul_sum_rule():
    b = np.zeros((2, 16))
    b[0, 3] = 1.0
    b[0, 7] = 0.9
    b[1, 7] = 0.9
    assert select_beam(b, "ul") == 7
    assert select_beam(b, "dl") == 3


def test_select_beam_tie_goes_low():
    b = np.zeros(8)
    b[2] = b[5] = 1.0
    assert select_beam([b]) == 2


def test_select_beam_dead_link():
    with pytest.raises(DeadLinkError):
        select_beam(np.zeros((2, 8)))


def test_effective_gain_aligned_and_orthogonal(rng):
    n = 64
    g = 0.3 - 0.2j
    h = g * math.sqrt(n) * steering_vector(n, math.asin(beam_grid(n)[5]))
    assert effective_gain(h, 5) == pytest.approx(np.linalg.norm(h) ** 2, rel=1e-12)
    assert effective_gain(h, 6) == pytest.approx(0.0, abs=1e-20)
    assert effective_gain(h, 5, array_gain=32) == pytest.approx(32 * abs(g) ** 2 * n, rel=1e-12)


def test_effective_gain_los_100m_on_grid():
    n = 64
    amp = math.sqrt(10 ** (-pathloss_db(100, True) / 10))
    h = amp * math.sqrt(n) * steering_vector(n, math.asin(beam_grid(n)[20]))
    # 64 * 10^(-10.159)
    assert effective_gain(h, 20) == pytest.approx(4.436960772575e-09, rel=1e-9)


def test_effective_gain_bounded_by_energy(rng):
    cfg = RadioConfig()
    for _ in range(50):
        ch = sample_multipath(rng.uniform(1, 200), bool(rng.random() < 0.5), cfg, rng)
        beam = ch.selected_beam
        assert effective_gain(ch.vector_channel, beam) <= np.linalg.norm(ch.vector_channel) ** 2 * (1 + 1e-12)


# --- multipath ------------------------------------------------------------------

def test_blocked_link_without_nlos_is_dead(rng):
    ch = sample_multipath(50.0, False, RadioConfig(n_nlos_paths=0), rng)
    assert np.all(ch.vector_channel == 0)
    assert ch.effective_gain == 0.0
    assert len(ch.path_gains) == 0


def test_realization_shapes(rng):
    cfg = RadioConfig()
    los = sample_multipath(30.0, True, cfg, rng)
    nlos = sample_multipath(30.0, False, cfg, rng)
    assert len(los.path_gains) == len(los.path_angles) == 3
    assert len(nlos.path_gains) == len(nlos.path_angles) == 2
    assert los.vector_channel.shape == (64,)
    assert los.effective_gain >= 0


def test_multipath_deterministic():
    cfg = RadioConfig()
    a = sample_multipath(42.0, True, cfg, np.random.default_rng(3))
    b = sample_multipath(42.0, True, cfg, np.random.default_rng(3))
    assert a.vector_channel.tobytes() == b.vector_channel.tobytes()
    assert a.selected_beam == b.selected_beam


def test_multipath_clamps_short_links(rng, caplog):
    ch = sample_multipath(0.2, True, RadioConfig(n_nlos_paths=0), rng)
    assert ch.link_distance == 1.0
    assert "clamped" in caplog.text


def test_los_only_energy_at_one_meter(rng):
    cfg = RadioConfig(n_nlos_paths=0)
    energy = np.mean([np.linalg.norm(sample_multipath(1.0, True, cfg, rng).vector_channel) ** 2
                      for _ in range(20_000)])
    assert energy == pytest.approx(64 * 10 ** (-6.139094384872776), rel=0.02)


def test_nlos_path_power(rng):
    cfg = RadioConfig(n_nlos_paths=1)
    gains, _ = sample_paths(np.full(100_000, 40.0), False, cfg, rng)
    expected = 10 ** (-pathloss_db(40.0, False) / 10)
    assert np.mean(np.abs(gains[:, 1]) ** 2) == pytest.approx(expected, rel=0.02)
    assert np.all(gains[:, 0] == 0)


def test_angles_within_half_plane(rng):
    _, angles = sample_paths(np.full(1000, 10.0), True, RadioConfig(), rng)
    assert np.all(np.abs(angles) <= math.pi / 2)


def test_beam_response_matches_vector_path(rng):
    cfg = RadioConfig()
    n = cfg.n_tx_sbs
    d = rng.uniform(1, 300, size=40)
    gains, angles = sample_paths(d, True, cfg, rng)
    k = np.arange(n)
    h = (gains[..., None] * np.exp(1j * np.pi * np.sin(angles)[..., None] * k)).sum(axis=-2)
    full = beamspace_transform(h)
    beams = rng.integers(0, n, size=40)
    fast = beam_response(gains, angles, n, beams)
    assert np.allclose(fast, full[np.arange(40), beams], rtol=1e-9, atol=1e-18)


def test_beam_response_on_grid_angle():
    n = 64
    theta = math.asin(beam_grid(n)[40])
    gains = np.array([[1.0 + 0j]])
    angles = np.array([[theta]])
    assert abs(beam_response(gains, angles, n, np.array([40]))[0]) == pytest.approx(math.sqrt(n))
    assert abs(beam_response(gains, angles, n, np.array([41]))[0]) < 1e-9
