"""Control-protocol parametrizations.

Two families of time-dependent drives (Omega, delta), both rendered as a
:class:`Schedule`:

* smooth quasi-adiabatic schedules built from knot values interpolated by
  monotone cubic splines (guaranteeing intermediate values never cross the
  knot extrema), with Omega pinned to zero at both ends;
* layered sequences alternating free evolution at constant detuning with
  resonant pulses, optionally initialised by a pi/2 pulse.

Field callables are small picklable objects so schedules can cross process
boundaries and be serialized.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import BoundViolation, DurationTooShort, NonMonotoneTimes
from .params import TWO_PI, mhz, rad_per_us

MIN_SEGMENT_US = 0.02    # ramp time of the pulse-shaping device


@dataclass(frozen=True)
class FieldLimits:
    """Box bounds enforced at schedule construction (hard errors, no
    silent clamping)."""

    omega_max: float = TWO_PI * 2.0
    delta_max_abs: float = TWO_PI * 10.0
    t_min: float | None = None
    t_max: float | None = None


class SplineField:
    """Monotone cubic (Fritsch-Carlson) interpolant of knot values."""

    def __init__(self, times, values):
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if len(times) != len(values) or len(times) < 2:
            raise ValueError("need equally many times and values, at least 2")
        if not np.all(np.diff(times) > 0):
            raise NonMonotoneTimes("knot times must be strictly increasing")
        self.times = times
        self.values = values
        self._interp = PchipInterpolator(times, values)

    def __call__(self, t):
        return self._interp(np.clip(t, self.times[0], self.times[-1]))

    def __getstate__(self):
        return {"times": self.times, "values": self.values}

    def __setstate__(self, state):
        self.__init__(state["times"], state["values"])


class PiecewiseConstantField:
    """Right-continuous step function over contiguous segments."""

    def __init__(self, boundaries, values):
        self.boundaries = np.asarray(boundaries, dtype=float)   # len = nseg + 1
        self.values = np.asarray(values, dtype=float)

    def __call__(self, t):
        idx = np.searchsorted(self.boundaries, t, side="right") - 1
        idx = np.clip(idx, 0, len(self.values) - 1)
        return self.values[idx]


class TransformedField:
    """scale * f(t * dilation) + shift, for miscalibration and stretching."""

    def __init__(self, inner, scale=1.0, shift=0.0, dilation=1.0):
        self.inner = inner
        self.scale = scale
        self.shift = shift
        self.dilation = dilation

    def __call__(self, t):
        return self.scale * self.inner(np.asarray(t) * self.dilation) + self.shift


def monotone_cubic_interpolate(times, values):
    """C1 monotone piecewise-cubic interpolant through the given knots.

    Monotone on every inter-knot interval, so the interpolant's range is
    contained in [min(values), max(values)].
    """
    return SplineField(times, values)


@dataclass(frozen=True)
class Schedule:
    """Time-dependent control fields over [0, T] (rad/µs, µs)."""

    duration: float
    omega_fn: object
    delta_fn: object
    kind: str = "raw"                        # vqaa | qaoa | raw
    breakpoints: tuple = ()                  # interior non-smooth times
    vqaa: "VqaaParams | None" = None
    qaoa: "QaoaParams | None" = None

    def omega(self, t):
        return self.omega_fn(t)

    def delta(self, t):
        return self.delta_fn(t)

    def sample_waveform(self, n_points: int = 1000):
        """(t_us, omega_mhz, delta_mhz) arrays at uniform resolution."""
        t = np.linspace(0.0, self.duration, n_points)
        return t, np.vectorize(mhz)(self.omega_fn(t)), np.vectorize(mhz)(self.delta_fn(t))


@dataclass(frozen=True)
class VqaaParams:
    """Knot parametrization of a quasi-adiabatic schedule.

    Omega takes the m free interior values (endpoints pinned to 0) and
    delta its m+2 values, all on the uniform time grid T*(i-1)/(m+1),
    i = 1..m+2; with the duration this is a (2m+3)-dimensional space.
    """

    duration: float
    omega_knots: tuple
    delta_knots: tuple

    def __post_init__(self):
        if len(self.delta_knots) != len(self.omega_knots) + 2:
            raise ValueError("delta needs exactly two more knots than omega")

    @property
    def m(self) -> int:
        return len(self.omega_knots)

    def knot_times(self) -> np.ndarray:
        return np.linspace(0.0, self.duration, self.m + 2)

    @staticmethod
    def from_vector(theta) -> "VqaaParams":
        """Decode the flat optimizer vector [T, omega_1..m, delta_1..m+2]."""
        theta = list(theta)
        m = (len(theta) - 3) // 2
        if len(theta) != 2 * m + 3:
            raise ValueError(f"vector length {len(theta)} is not 2m+3")
        return VqaaParams(
            duration=float(theta[0]),
            omega_knots=tuple(theta[1 : 1 + m]),
            delta_knots=tuple(theta[1 + m :]),
        )

    def to_vector(self) -> list[float]:
        return [self.duration, *self.omega_knots, *self.delta_knots]


def vqaa_schedule(p: VqaaParams, limits: FieldLimits = FieldLimits()) -> Schedule:
    """Build the spline schedule of a knot parametrization.

    Knot values outside the declared limits (or a duration outside the
    declared window) are hard errors naming the offending knot; the
    monotone interpolation then guarantees the continuous fields never
    cross the bounds between knots.
    """
    if limits.t_min is not None and p.duration < limits.t_min:
        raise BoundViolation(f"duration {p.duration} below minimum {limits.t_min}")
    if limits.t_max is not None and p.duration > limits.t_max:
        raise BoundViolation(f"duration {p.duration} above maximum {limits.t_max}")
    for i, w in enumerate(p.omega_knots):
        if not 0.0 <= w <= limits.omega_max:
            raise BoundViolation(
                f"omega knot {i}: {w} outside [0, {limits.omega_max}]"
            )
    for i, d in enumerate(p.delta_knots):
        if abs(d) > limits.delta_max_abs:
            raise BoundViolation(
                f"delta knot {i}: {d} outside +-{limits.delta_max_abs}"
            )
    times = p.knot_times()
    omega = SplineField(times, [0.0, *p.omega_knots, 0.0])
    delta = SplineField(times, p.delta_knots)
    return Schedule(
        duration=p.duration,
        omega_fn=omega,
        delta_fn=delta,
        kind="vqaa",
        breakpoints=tuple(times[1:-1]),
        vqaa=p,
    )


@dataclass(frozen=True)
class QaoaParams:
    """Layered sequence: p repetitions of free evolution at constant
    detuning (t_cost) followed by a resonant pulse (t_mix), optionally
    initialised with a pi/2 resonant pulse."""

    t_cost: tuple
    t_mix: tuple
    omega_mix: float = TWO_PI * 2.0
    delta_cost: float = -TWO_PI * 4.0
    init_pulse: bool = True

    def __post_init__(self):
        if len(self.t_cost) != len(self.t_mix):
            raise ValueError("need equally many cost and mix durations")

    @property
    def depth(self) -> int:
        return len(self.t_cost)

    @staticmethod
    def tied(depth: int, t_cost: float, t_mix: float, **kwargs) -> "QaoaParams":
        """All layers share the depth-1 durations (the two-parameter form)."""
        return QaoaParams((t_cost,) * depth, (t_mix,) * depth, **kwargs)


def qaoa_schedule(q: QaoaParams) -> Schedule:
    """Piecewise-constant schedule of a layered parametrization.

    The initial pi/2 pulse lasts pi/(2*omega_mix) at the mixing amplitude;
    every declared layer duration must respect the hardware minimum.
    """
    for name, durs in (("t_cost", q.t_cost), ("t_mix", q.t_mix)):
        for j, d in enumerate(durs):
            if d < MIN_SEGMENT_US:
                raise DurationTooShort(
                    f"{name}[{j}] = {d} µs below minimum {MIN_SEGMENT_US} µs"
                )
    segments = []   # (duration, omega, delta)
    if q.init_pulse:
        segments.append((math.pi / (2.0 * q.omega_mix), q.omega_mix, 0.0))
    for tc, tm in zip(q.t_cost, q.t_mix):
        segments.append((tc, 0.0, q.delta_cost))
        segments.append((tm, q.omega_mix, 0.0))
    bounds = np.concatenate([[0.0], np.cumsum([s[0] for s in segments])])
    omega = PiecewiseConstantField(bounds, [s[1] for s in segments])
    delta = PiecewiseConstantField(bounds, [s[2] for s in segments])
    return Schedule(
        duration=float(bounds[-1]),
        omega_fn=omega,
        delta_fn=delta,
        kind="qaoa",
        breakpoints=tuple(bounds[1:-1]),
        qaoa=q,
    )


def miscalibrate(s: Schedule, omega_scale: float, delta_shift: float) -> Schedule:
    """Systematic drive miscalibration: Omega -> scale * Omega,
    delta -> delta + shift.  Bound crossings are reported as warnings,
    never clipped."""
    if omega_scale == 0.0:
        warnings.warn("omega_scale = 0: schedule is degenerate (no drive)",
                      stacklevel=2)
    out = Schedule(
        duration=s.duration,
        omega_fn=TransformedField(s.omega_fn, scale=omega_scale),
        delta_fn=TransformedField(s.delta_fn, shift=delta_shift),
        kind="raw",
        breakpoints=s.breakpoints,
    )
    limits = FieldLimits()
    grid = np.linspace(0.0, out.duration, 2001)
    w, d = np.atleast_1d(out.omega_fn(grid)), np.atleast_1d(out.delta_fn(grid))
    if w.max(initial=0.0) > limits.omega_max or w.min(initial=0.0) < 0.0:
        warnings.warn("miscalibrated Omega exceeds hardware bounds", stacklevel=2)
    if np.abs(d).max(initial=0.0) > limits.delta_max_abs:
        warnings.warn("miscalibrated delta exceeds hardware bounds", stacklevel=2)
    return out


def stretch_duration(s: Schedule, new_duration: float,
                     limits: FieldLimits | None = None) -> Schedule:
    """Time-dilate a schedule to a new total duration (field values kept,
    knot/segment times rescaled proportionally)."""
    if s.vqaa is not None:
        p = replace(s.vqaa, duration=new_duration)
        lim = limits or FieldLimits(t_min=None, t_max=None)
        return vqaa_schedule(p, replace(lim, t_min=None, t_max=None))
    ratio = s.duration / new_duration
    return Schedule(
        duration=new_duration,
        omega_fn=TransformedField(s.omega_fn, dilation=ratio),
        delta_fn=TransformedField(s.delta_fn, dilation=ratio),
        kind="raw",
        breakpoints=tuple(b / ratio for b in s.breakpoints),
    )


# -- serialization ------------------------------------------------------------


def schedule_to_json(s: Schedule, path):
    """Schedule file: knot values in MHz for vqaa, segment table for qaoa."""
    if s.kind == "vqaa" and s.vqaa is not None:
        doc = {
            "kind": "vqaa",
            "T_us": s.vqaa.duration,
            "omega_knots_mhz": [mhz(w) for w in s.vqaa.omega_knots],
            "delta_knots_mhz": [mhz(d) for d in s.vqaa.delta_knots],
        }
    elif s.kind == "qaoa" and s.qaoa is not None:
        doc = {
            "kind": "qaoa",
            "T_us": s.duration,
            "omega_knots_mhz": [mhz(s.qaoa.omega_mix)],
            "delta_knots_mhz": [mhz(s.qaoa.delta_cost)],
            "t_cost_us": list(s.qaoa.t_cost),
            "t_mix_us": list(s.qaoa.t_mix),
            "init_pulse": s.qaoa.init_pulse,
        }
    else:
        t, w, d = s.sample_waveform(512)
        doc = {
            "kind": "raw",
            "T_us": s.duration,
            "times_us": t.tolist(),
            "omega_knots_mhz": w.tolist(),
            "delta_knots_mhz": d.tolist(),
        }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def schedule_from_json(path, limits: FieldLimits | None = None) -> Schedule:
    """Load a schedule file; bounds were validated at construction time, so
    loading is permissive unless explicit limits are given."""
    with open(path) as fh:
        doc = json.load(fh)
    if doc["kind"] == "vqaa":
        p = VqaaParams(
            duration=doc["T_us"],
            omega_knots=tuple(rad_per_us(w) for w in doc["omega_knots_mhz"]),
            delta_knots=tuple(rad_per_us(d) for d in doc["delta_knots_mhz"]),
        )
        permissive = FieldLimits(omega_max=math.inf, delta_max_abs=math.inf)
        return vqaa_schedule(p, limits or permissive)
    if doc["kind"] == "qaoa":
        q = QaoaParams(
            t_cost=tuple(doc["t_cost_us"]),
            t_mix=tuple(doc["t_mix_us"]),
            omega_mix=rad_per_us(doc["omega_knots_mhz"][0]),
            delta_cost=rad_per_us(doc["delta_knots_mhz"][0]),
            init_pulse=doc.get("init_pulse", True),
        )
        return qaoa_schedule(q)
    times = np.asarray(doc["times_us"])
    omega = SplineField(times, [rad_per_us(w) for w in doc["omega_knots_mhz"]])
    delta = SplineField(times, [rad_per_us(d) for d in doc["delta_knots_mhz"]])
    return Schedule(duration=doc["T_us"], omega_fn=omega, delta_fn=delta, kind="raw")


def export_waveform_csv(s: Schedule, path, n_points: int = 1000):
    t, w, d = s.sample_waveform(n_points)
    with open(path, "w") as fh:
        fh.write("t_us,omega_mhz,delta_mhz\n")
        for row in zip(t, w, d):
            fh.write(f"{row[0]!r},{row[1]!r},{row[2]!r}\n")
