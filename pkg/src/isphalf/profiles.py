"""Scalar decay profiles for potential entries.

Two representations are supported: finite sums of decaying exponentials
(the primary, semi-analytic one) and uniformly sampled values with a
declared exponential tail beyond the grid.  Both evaluate anywhere on
[0, inf) and expose half-line oscillatory transforms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError


class ScalarProfile:
    """Common interface: complex-valued function of x >= 0 with exponential decay."""

    def __call__(self, x):
        raise NotImplementedError

    def halfline_transform(self, z):
        """Integral of f(x) e^{i z x} over [0, inf), elementwise in z."""
        raise NotImplementedError

    def halfline_transform_from(self, x0, z):
        """Integral of f(x) e^{i z x} over [x0, inf)."""
        raise NotImplementedError

    @property
    def is_zero(self) -> bool:
        return False

    def scaled(self, factor: complex) -> "ScalarProfile":
        """Profile multiplied by a constant."""
        raise NotImplementedError

    def decay_bound(self, x_probe: np.ndarray) -> np.ndarray:
        """|f| evaluated on a probe grid, for envelope checks."""
        return np.abs(self(x_probe))


@dataclass(frozen=True)
class ExpSumProfile(ScalarProfile):
    """x -> sum_k gamma_k * exp(-a_k x), all a_k > 0.

    Satisfies the exponential-envelope condition exactly and keeps every
    half-line transform in closed form, which is why generated fixtures
    and the solvable example class use it throughout.
    """

    terms: tuple[tuple[complex, float], ...] = ()

    def __post_init__(self):
        for gamma, a in self.terms:
            if not a > 0:
                raise ValidationError("ExpSumProfile.a", f"decay rate must be positive, got {a}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for gamma, a in self.terms:
            out += gamma * np.exp(-a * x)
        return out

    def halfline_transform(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        for gamma, a in self.terms:
            out = out + gamma / (a - 1j * z)
        return out

    def halfline_transform_from(self, x0, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(np.broadcast(z, np.asarray(x0)).shape, dtype=complex)
        for gamma, a in self.terms:
            out = out + gamma * np.exp(-(a - 1j * z) * x0) / (a - 1j * z)
        return out

    @property
    def is_zero(self) -> bool:
        return all(gamma == 0 for gamma, _ in self.terms)

    def scaled(self, factor):
        return ExpSumProfile(tuple((factor * g, a) for g, a in self.terms))

    def min_rate(self) -> float:
        return min((a for _, a in self.terms), default=np.inf)


ZERO_PROFILE = ExpSumProfile(())


@dataclass(frozen=True)
class SampledProfile(ScalarProfile):
    """Uniform samples on [0, x_max] with linear interpolation in between
    and a declared exponential tail value(x_max) * e^{-tail_rate (x - x_max)}
    beyond the grid."""

    dx: float
    values: np.ndarray = field(repr=False)
    tail_rate: float = 1.0

    def __post_init__(self):
        if not self.dx > 0:
            raise ValidationError("SampledProfile.dx", "step must be positive")
        if not self.tail_rate > 0:
            raise ValidationError("SampledProfile.tail_rate", "tail rate must be positive")
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))
        if self.values.ndim != 1 or len(self.values) < 2:
            raise ValidationError("SampledProfile.values", "need a 1-d array of >= 2 samples")

    @property
    def x_max(self) -> float:
        return self.dx * (len(self.values) - 1)

    @property
    def x_grid(self) -> np.ndarray:
        return self.dx * np.arange(len(self.values))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        inside = np.clip(x, 0.0, self.x_max)
        out = np.interp(inside, self.x_grid, self.values.real).astype(complex)
        out += 1j * np.interp(inside, self.x_grid, self.values.imag)
        tail = x > self.x_max
        if np.any(tail):
            out = np.where(tail, self.values[-1] * np.exp(-self.tail_rate * (x - self.x_max)), out)
        return out

    def halfline_transform(self, z):
        return self.halfline_transform_from(0.0, z)

    def halfline_transform_from(self, x0, z):
        # transform of the piecewise-linear part (exact per segment) plus the
        # analytic tail; exactness per segment keeps the result one-sided in z.
        from .quadrature import segment_transform_sum

        z = np.atleast_1d(np.asarray(z, dtype=complex))
        x0 = float(x0)
        grid = self.x_grid
        vals = self.values
        if x0 >= self.x_max:
            amp = self.values[-1] * np.exp(-self.tail_rate * (x0 - self.x_max))
            out = amp * np.exp(1j * z * x0) / (self.tail_rate - 1j * z)
            return out
        if x0 > 0:
            i0 = int(np.searchsorted(grid, x0))
            first = np.array([x0, grid[i0]]) if grid[i0] > x0 else np.array([x0])
            head_x = np.concatenate([first, grid[i0 + 1 :]]) if grid[i0] > x0 else grid[i0:]
            head_v = self(head_x)
            grid, vals = head_x, head_v
        out = segment_transform_sum(grid, vals, z)
        out += vals[-1] * np.exp(1j * z * self.x_max) / (self.tail_rate - 1j * z)
        return out

    @property
    def is_zero(self) -> bool:
        return bool(np.all(self.values == 0))

    def scaled(self, factor):
        return SampledProfile(self.dx, factor * self.values, self.tail_rate)


def as_profile(obj) -> ScalarProfile:
    """Coerce None (structural zero) or a profile into a ScalarProfile."""
    if obj is None:
        return ZERO_PROFILE
    if isinstance(obj, ScalarProfile):
        return obj
    raise ValidationError("profile", f"cannot interpret {type(obj).__name__} as a profile")
