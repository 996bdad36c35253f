"""Piecewise-linear T-periodic input signals."""

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class PeriodicSignal:
    """Piecewise-linear signal repeated with period ``period``.

    ``times`` must start at 0 and end at ``period``; the first and last
    values must agree so the periodic extension is continuous (hence
    globally Lipschitz).  ``values`` has shape (len(times), ncomponents).
    """

    period: float
    times: np.ndarray
    values: np.ndarray

    def __init__(self, period, times, values):
        times = np.asarray(times, dtype=float).ravel()
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        problems = []
        if not period > 0:
            problems.append(f"period must be positive, got {period}")
        if times.size < 2:
            problems.append("a signal needs at least two knots")
        elif values.shape[0] != times.size:
            problems.append(
                f"{times.size} knot times but {values.shape[0]} knot values")
        else:
            if np.any(np.diff(times) <= 0):
                problems.append("knot times must be strictly increasing")
            if times[0] != 0.0 or not np.isclose(times[-1], period, rtol=0, atol=1e-12):
                problems.append(
                    f"knots must span [0, {period}], got [{times[0]}, {times[-1]}]")
            if not np.allclose(values[0], values[-1], rtol=0, atol=1e-12):
                problems.append("first and last knot values differ (not periodic)")
            if not np.all(np.isfinite(values)):
                problems.append("knot values must be finite")
        if problems:
            raise ValidationError(problems)
        times = times.copy()
        times[-1] = period
        times.flags.writeable = False
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "period", float(period))
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, value, period=1.0):
        value = np.atleast_1d(np.asarray(value, dtype=float))
        return cls(period, [0.0, period], np.vstack([value, value]))

    @property
    def ncomponents(self):
        return self.values.shape[1]

    def __call__(self, t):
        """Value at time ``t`` (scalar -> 1-D array, array -> 2-D array)."""
        t = np.asarray(t, dtype=float)
        tau = np.mod(t, self.period)
        out = np.stack([np.interp(tau, self.times, self.values[:, c])
                        for c in range(self.ncomponents)], axis=-1)
        return out

    def lipschitz_constant(self):
        slopes = np.diff(self.values, axis=0) / np.diff(self.times)[:, None]
        return float(np.abs(slopes).max(initial=0.0))

    def scaled(self, factor):
        return PeriodicSignal(self.period, self.times, factor * self.values)

    def __eq__(self, other):
        if not isinstance(other, PeriodicSignal):
            return NotImplemented
        return (self.period == other.period
                and np.array_equal(self.times, other.times)
                and np.array_equal(self.values, other.values))

    __hash__ = None


def merged_knots(signals, period):
    """Sorted union of the knot times of ``signals`` over one period."""
    ts = [np.array([0.0, period])]
    ts += [s.times for s in signals if s is not None]
    t = np.unique(np.concatenate(ts))
    keep = np.concatenate([[True], np.diff(t) > 1e-12 * period])
    return t[keep]
