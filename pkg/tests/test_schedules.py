import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rydmis import (
    FieldLimits,
    QaoaParams,
    VqaaParams,
    miscalibrate,
    monotone_cubic_interpolate,
    qaoa_schedule,
    stretch_duration,
    vqaa_schedule,
)
from rydmis.errors import BoundViolation, DurationTooShort, NonMonotoneTimes
from rydmis.params import TWO_PI, rad_per_us
from rydmis.schedules import export_waveform_csv, schedule_from_json, schedule_to_json


class TestMonotoneInterpolation:
    def test_constant(self):
        f = monotone_cubic_interpolate([0, 1, 2], [3.0, 3.0, 3.0])
        t = np.linspace(0, 2, 100)
        assert np.allclose(f(t), 3.0)

    def test_two_knots_monotone(self):
        f = monotone_cubic_interpolate([0, 1], [0.0, 1.0])
        assert 0.0 <= float(f(0.5)) <= 1.0
        t = np.linspace(0, 1, 50)
        assert np.all(np.diff(f(t)) >= 0)

    def test_no_overshoot(self):
        f = monotone_cubic_interpolate([0, 1, 2], [0.0, 2.0, 1.0])
        t = np.linspace(0, 2, 10_000)
        vals = f(t)
        assert vals.max() <= 2.0 + 1e-12
        assert vals.min() >= 0.0 - 1e-12

    def test_non_monotone_times(self):
        with pytest.raises(NonMonotoneTimes):
            monotone_cubic_interpolate([0, 1, 1], [0, 1, 2])

    @given(
        st.lists(st.floats(-5, 5, allow_nan=False), min_size=2, max_size=8),
        st.integers(0, 1000),
    )
    @settings(max_examples=80, deadline=None)
    def test_range_bound_property(self, values, probe):
        times = list(range(len(values)))
        f = monotone_cubic_interpolate(times, values)
        t = times[0] + (times[-1] - times[0]) * probe / 1000.0
        v = float(f(t))
        assert min(values) - 1e-9 <= v <= max(values) + 1e-9


@pytest.fixture
def wide_limits():
    return FieldLimits(omega_max=TWO_PI * 2.0, delta_max_abs=TWO_PI * 10.0)


class TestVqaa:
    def test_paper_shape(self, wide_limits):
        u = TWO_PI * 8.832
        p = VqaaParams(
            duration=4.0,
            omega_knots=(TWO_PI * 2.0,) * 3,
            delta_knots=(-2 * TWO_PI, -TWO_PI, 0.0, TWO_PI * 4.0, TWO_PI * 8.0),
        )
        s = vqaa_schedule(p, wide_limits)
        assert float(s.omega(0.0)) == 0.0
        assert float(s.omega(4.0)) == 0.0
        assert s.kind == "vqaa"
        assert len(s.breakpoints) == 3

    def test_dense_grid_within_knot_extrema(self, wide_limits):
        rng = np.random.default_rng(3)
        p = VqaaParams(
            duration=3.0,
            omega_knots=tuple(rng.uniform(0, TWO_PI * 2, 3)),
            delta_knots=tuple(rng.uniform(-TWO_PI * 10, TWO_PI * 10, 5)),
        )
        s = vqaa_schedule(p, wide_limits)
        t = np.linspace(0, 3.0, 10_000)
        w = s.omega(t)
        d = s.delta(t)
        assert w.max() <= max(p.omega_knots) + 1e-9
        assert w.min() >= 0.0 - 1e-9
        assert d.max() <= max(p.delta_knots) + 1e-9
        assert d.min() >= min(p.delta_knots) - 1e-9

    def test_bound_violation_names_knot(self, wide_limits):
        p = VqaaParams(3.0, (TWO_PI * 3.0,), (0.0, 0.0, 0.0))
        with pytest.raises(BoundViolation, match="omega knot 0"):
            vqaa_schedule(p, wide_limits)

    def test_duration_below_window(self):
        limits = FieldLimits(t_min=0.5, t_max=3.0)
        p = VqaaParams(0.4, (TWO_PI,), (0.0, 0.0, 0.0))
        with pytest.raises(BoundViolation, match="duration"):
            vqaa_schedule(p, limits)

    def test_continuity(self, wide_limits):
        p = VqaaParams(2.0, (TWO_PI, TWO_PI * 1.5, TWO_PI), (0.0,) * 5)
        s = vqaa_schedule(p, wide_limits)
        t = np.linspace(0, 2.0, 5000)
        jumps = np.abs(np.diff(s.omega(t)))
        assert jumps.max() < 0.05    # Lipschitz-scale bound for smooth spline

    def test_vector_round_trip(self):
        p = VqaaParams(2.5, (1.0, 2.0), (0.1, 0.2, 0.3, 0.4))
        assert VqaaParams.from_vector(p.to_vector()) == p

    def test_deterministic_sampling(self, wide_limits):
        p = VqaaParams(2.0, (TWO_PI,), (0.0, TWO_PI, TWO_PI * 2))
        a = vqaa_schedule(p, wide_limits).sample_waveform(256)
        b = vqaa_schedule(p, wide_limits).sample_waveform(256)
        assert np.array_equal(a[1], b[1]) and np.array_equal(a[2], b[2])


class TestQaoa:
    def test_depth1_segments(self):
        q = QaoaParams((0.633,), (0.633,), omega_mix=TWO_PI)
        s = qaoa_schedule(q)
        init = math.pi / (2 * TWO_PI)
        assert s.duration == pytest.approx(init + 2 * 0.633)
        # free evolution has Omega 0 and the declared detuning
        t_cost_mid = init + 0.3
        assert float(s.omega(t_cost_mid)) == 0.0
        assert float(s.delta(t_cost_mid)) == q.delta_cost
        t_mix_mid = init + 0.633 + 0.3
        assert float(s.omega(t_mix_mid)) == TWO_PI
        assert float(s.delta(t_mix_mid)) == 0.0

    def test_pure_init_pulse(self):
        q = QaoaParams((), (), omega_mix=TWO_PI * 2)
        s = qaoa_schedule(q)
        assert s.duration == pytest.approx(math.pi / (2 * TWO_PI * 2))

    def test_tied_depth5(self):
        q = QaoaParams.tied(5, 0.1, 0.2, omega_mix=TWO_PI)
        s = qaoa_schedule(q)
        expected = math.pi / (2 * TWO_PI) + 5 * 0.3
        assert s.duration == pytest.approx(expected)

    def test_duration_sum_exact(self):
        q = QaoaParams((0.11, 0.07), (0.05, 0.21), omega_mix=TWO_PI)
        s = qaoa_schedule(q)
        assert s.duration == math.pi / (2 * TWO_PI) + 0.11 + 0.07 + 0.05 + 0.21

    def test_too_short(self):
        with pytest.raises(DurationTooShort):
            qaoa_schedule(QaoaParams((0.01,), (0.1,)))


class TestMiscalibration:
    def test_identity(self):
        s = vqaa_schedule(VqaaParams(2.0, (TWO_PI,), (0.0, TWO_PI, TWO_PI)))
        m = miscalibrate(s, 1.0, 0.0)
        t = np.linspace(0, 2, 100)
        assert np.allclose(m.omega(t), s.omega(t))
        assert np.allclose(m.delta(t), s.delta(t))

    def test_measured_miscalibration(self):
        # drive built at 1 MHz / -0.5 MHz lands at 1.08 MHz / -0.775 MHz
        q = QaoaParams((0.633,), (0.633,), omega_mix=rad_per_us(1.0),
                       delta_cost=rad_per_us(-0.5))
        s = qaoa_schedule(q)
        m = miscalibrate(s, 1.08, rad_per_us(-0.275))
        init = math.pi / (2 * q.omega_mix)
        assert float(m.omega(init / 2)) == pytest.approx(rad_per_us(1.08))
        assert float(m.delta(init + 0.3)) == pytest.approx(rad_per_us(-0.775))

    def test_zero_scale_flagged(self):
        s = vqaa_schedule(VqaaParams(2.0, (TWO_PI,), (0.0, 0.0, 0.0)))
        with pytest.warns(UserWarning, match="degenerate"):
            m = miscalibrate(s, 0.0, 0.0)
        assert float(m.omega(1.0)) == 0.0


class TestStretch:
    def test_vqaa_stretch_rescales_times(self):
        p = VqaaParams(2.0, (TWO_PI,), (-TWO_PI, 0.0, TWO_PI))
        s = vqaa_schedule(p)
        s2 = stretch_duration(s, 4.0)
        assert s2.duration == 4.0
        t = np.linspace(0, 1, 64)
        assert np.allclose(s.omega(t * 2.0), s2.omega(t * 4.0))

    def test_raw_stretch(self):
        q = QaoaParams((0.1,), (0.1,), omega_mix=TWO_PI)
        s = qaoa_schedule(q)
        s2 = stretch_duration(s, 2 * s.duration)
        assert float(s2.omega(2 * s.duration * 0.99)) == float(s.omega(s.duration * 0.99))


class TestSerialization:
    def test_vqaa_json_round_trip(self, tmp_path):
        p = VqaaParams(3.0, (TWO_PI, TWO_PI * 0.5), (0.0, TWO_PI, -TWO_PI, TWO_PI * 2))
        s = vqaa_schedule(p)
        path = tmp_path / "sched.json"
        schedule_to_json(s, path)
        back = schedule_from_json(path)
        assert back.vqaa is not None
        assert back.vqaa.duration == p.duration
        assert np.allclose(back.vqaa.omega_knots, p.omega_knots)
        assert np.allclose(back.vqaa.delta_knots, p.delta_knots)

    def test_waveform_export(self, tmp_path):
        s = qaoa_schedule(QaoaParams((0.1,), (0.1,), omega_mix=TWO_PI))
        path = tmp_path / "wave.csv"
        export_waveform_csv(s, path, n_points=11)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "t_us,omega_mhz,delta_mhz"
        assert len(lines) == 12
