import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cogres.core import ReservoirConfig, ReservoirWeights, TimeSeries
from cogres.errors import DegenerateReservoirError, DimensionError, DivergenceError
from cogres.reservoir import (
    check_echo_state,
    estimate_spectral_radius,
    init_reservoir,
    run_reservoir,
    scale_to_radius,
    uniform_weights,
)


def dense_radius(a):
    return float(np.max(np.abs(np.linalg.eigvals(a))))


def test_radius_diagonal():
    assert estimate_spectral_radius(np.diag([0.5, -2.0])) == pytest.approx(2.0, rel=1e-12)


def test_radius_zero_matrix():
    assert estimate_spectral_radius(np.zeros((4, 4))) == 0.0


def test_radius_nilpotent():
    shift = np.eye(5, k=-1)
    assert estimate_spectral_radius(shift) == 0.0


def test_radius_random_8x8_matches_dense_oracle():
    a = np.random.default_rng(8).uniform(-1, 1, (8, 8))
    assert estimate_spectral_radius(a) == pytest.approx(dense_radius(a), rel=1e-8)


@pytest.mark.parametrize("n", [3, 17, 32, 64, 111])
def test_radius_complex_dominant_pair(n):
    # random non-symmetric matrices usually have a complex dominant pair
    a = np.random.default_rng(n).standard_normal((n, n))
    assert estimate_spectral_radius(a) == pytest.approx(dense_radius(a), rel=1e-9)


def test_rotation_matrix_radius():
    th = 0.3
    rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]]) * 1.7
    assert estimate_spectral_radius(rot) == pytest.approx(1.7, rel=1e-12)


def test_radius_rejects_non_square():
    with pytest.raises(DimensionError):
        estimate_spectral_radius(np.zeros((2, 3)))


def test_init_reservoir_hits_published_radius():
    w = init_reservoir(ReservoirConfig(size=111, spectral_target=1.45, seed=1), 111)
    assert w.w_in.shape == (111, 111) and w.w_res.shape == (111, 111)
    assert 1.45 * (1 - 1e-9) <= w.achieved_radius <= 1.45 * (1 + 1e-9)
    assert dense_radius(w.w_res) == pytest.approx(1.45, rel=1e-9)


def test_init_reservoir_deterministic():
    cfg = ReservoirConfig(size=20, seed=99)
    a, b = init_reservoir(cfg, 7), init_reservoir(cfg, 7)
    np.testing.assert_array_equal(a.w_in, b.w_in)
    np.testing.assert_array_equal(a.w_res, b.w_res)
    c = init_reservoir(cfg.replace(seed=100), 7)
    assert not np.array_equal(a.w_in, c.w_in)


def test_uniform_generator_statistics():
    rng = np.random.default_rng(42)
    w_res = uniform_weights(rng, (5, 5))
    w_in = uniform_weights(rng, (5, 3))
    for m in (w_res, w_in):
        assert np.all((m >= -1) & (m <= 1))
    big = uniform_weights(np.random.default_rng(42), 10**6)
    assert abs(big.mean()) < 0.01
    assert np.all((big >= -1) & (big <= 1))


def test_input_scaling_applied():
    base = init_reservoir(ReservoirConfig(size=6, seed=3), 2)
    scaled = init_reservoir(ReservoirConfig(size=6, seed=3, input_scaling=0.25), 2)
    np.testing.assert_allclose(scaled.w_in, 0.25 * base.w_in, rtol=0, atol=0)


def test_degenerate_reservoir():
    with pytest.raises(DegenerateReservoirError):
        scale_to_radius(np.zeros((3, 3)), 1.0)


def _weights(w_in, w_res):
    return ReservoirWeights(np.asarray(w_in, float), np.asarray(w_res, float), 1.0, 1.0)


@pytest.mark.parametrize("form", ["leak_outside", "leak_inside"])
def test_zero_input_fixed_point(form):
    cfg = ReservoirConfig(size=10, update_form=form, seed=1)
    w = init_reservoir(cfg, 3)
    s = run_reservoir(w, TimeSeries(np.zeros((25, 3))), cfg)
    assert np.all(s.states == 0)


def test_leak_one_no_recurrence_is_memoryless():
    rng = np.random.default_rng(0)
    w_in = rng.uniform(-1, 1, (4, 2))
    w = _weights(w_in, np.zeros((4, 4)))
    x = rng.standard_normal((30, 2))
    cfg = ReservoirConfig(size=4, leak=1.0)
    s = run_reservoir(w, TimeSeries(x), cfg)
    np.testing.assert_array_equal(s.states, np.tanh(x @ w_in.T))


def test_two_neuron_hand_trace():
    w = _weights([[1.0], [0.0]], [[0.0, 0.5], [0.5, 0.0]])
    cfg = ReservoirConfig(size=2, leak=0.5, update_form="leak_outside")
    s = run_reservoir(w, TimeSeries(np.array([[1.0], [-1.0]])), cfg).states
    # h(1) = 0.5 * tanh([1, 0])
    h1 = (0.5 * math.tanh(1.0), 0.0)
    # h(2) = 0.5 h(1) + 0.5 tanh([-1 + 0.5 h1[1], 0 + 0.5 h1[0]])
    h2 = (
        0.5 * h1[0] + 0.5 * math.tanh(-1.0 + 0.5 * h1[1]),
        0.5 * h1[1] + 0.5 * math.tanh(0.0 + 0.5 * h1[0]),
    )
    assert np.max(np.abs(s[0] - h1)) <= 1e-15
    assert np.max(np.abs(s[1] - h2)) <= 1e-15


def test_leak_inside_hand_trace():
    w = _weights([[1.0], [0.0]], [[0.0, 0.5], [0.5, 0.0]])
    cfg = ReservoirConfig(size=2, leak=0.25, update_form="leak_inside")
    s = run_reservoir(w, TimeSeries(np.array([[1.0], [-1.0]])), cfg).states
    h1 = (math.tanh(0.25), 0.0)
    h2 = (math.tanh(-0.25 + 0.75 * 0.5 * h1[1]), math.tanh(0.75 * 0.5 * h1[0]))
    np.testing.assert_allclose(s[0], h1, rtol=0, atol=1e-15)
    np.testing.assert_allclose(s[1], h2, rtol=0, atol=1e-15)


def test_leak_zero_limits():
    cfg = ReservoirConfig(size=6, leak=0.0, seed=2)
    w = init_reservoir(cfg, 2)
    h0 = np.random.default_rng(1).uniform(-1, 1, 6)
    x = TimeSeries(np.random.default_rng(2).standard_normal((12, 2)))
    s = run_reservoir(w, x, cfg, h0).states
    assert np.all(s == h0)
    inside = cfg.replace(update_form="leak_inside")
    s2 = run_reservoir(w, x, inside, h0).states
    h = h0
    for t in range(12):
        h = np.tanh(w.w_res @ h)
        np.testing.assert_allclose(s2[t], h, atol=1e-14)


def test_dimension_checks():
    cfg = ReservoirConfig(size=3)
    w = init_reservoir(cfg, 2)
    with pytest.raises(DimensionError):
        run_reservoir(w, TimeSeries(np.zeros((4, 3))), cfg)
    with pytest.raises(DimensionError):
        run_reservoir(w, TimeSeries(np.zeros((4, 2))), cfg, np.zeros(4))


def test_linear_divergence_names_timestep():
    w = _weights([[1.0]], [[100.0]])
    cfg = ReservoirConfig(size=1, leak=1.0, activation="linear")
    with pytest.raises(DivergenceError) as info:
        run_reservoir(w, TimeSeries(np.ones((200, 1))), cfg)
    assert info.value.timestep == 51


def test_initial_state_recorded():
    cfg = ReservoirConfig(size=3)
    w = init_reservoir(cfg, 1)
    s = run_reservoir(w, TimeSeries(np.ones((2, 1))), cfg)
    assert np.all(s.initial_state == 0) and s.n_timepoints == 2


@settings(max_examples=25, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    scale=st.floats(0.1, 1e3),
    leak=st.floats(0.0, 1.0),
    form=st.sampled_from(["leak_outside", "leak_inside"]),
)
def test_tanh_states_bounded(seed, scale, leak, form):
    cfg = ReservoirConfig(size=8, leak=leak, update_form=form, seed=seed % 1000)
    w = init_reservoir(cfg, 3)
    x = np.random.default_rng(seed).standard_normal((40, 3)) * scale
    s = run_reservoir(w, TimeSeries(x), cfg).states
    # float64 tanh rounds to exactly +-1 once |arg| > ~19
    assert np.all(np.abs(s) <= 1) and np.all(np.isfinite(s))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), leak=st.floats(0.0, 1.0))
def test_tanh_states_strictly_inside_for_moderate_inputs(seed, leak):
    cfg = ReservoirConfig(size=8, leak=leak, seed=seed % 1000)
    w = init_reservoir(cfg, 3)
    x = np.random.default_rng(seed).uniform(-1, 1, (40, 3))
    s = run_reservoir(w, TimeSeries(x), cfg).states
    assert np.all(np.abs(s) < 1)


def test_echo_state_contracting():
    cfg = ReservoirConfig(size=50, leak=1.0, spectral_target=0.9, seed=4)
    ok, gap = check_echo_state(init_reservoir(cfg, 3), cfg, probe_len=500, tol=1e-6, seed=1)
    assert ok and gap < 1e-6


def test_echo_state_no_recurrence():
    w = _weights(np.ones((3, 1)), np.zeros((3, 3)))
    cfg = ReservoirConfig(size=3, leak=1.0)
    ok, gap = check_echo_state(w, cfg, probe_len=10)
    assert ok and gap == 0.0


def test_echo_state_linear_expanding():
    cfg = ReservoirConfig(size=50, leak=1.0, spectral_target=1.45, activation="linear", seed=4)
    ok, gap = check_echo_state(init_reservoir(cfg, 3), cfg, probe_len=500)
    assert not ok and gap > 1.0


def test_echo_state_probe_length():
    cfg = ReservoirConfig(size=3)
    with pytest.raises(ValueError):
        check_echo_state(init_reservoir(cfg, 1), cfg, probe_len=5)
