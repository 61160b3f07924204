"""Attenuation kernels and their frame-invariance normalization.

A kernel K(|x - x'|) weights how strongly the displacement gradient at a
neighbor x' contributes to the nonlocal strain measure at x.  Every kernel
exposes the one-sided moment

    interval_integral(L) = integral_0^L K(s) ds

in closed form; the frame multipliers c_minus = 1 / (2 * moment(l_minus)) and
c_plus = 1 / (2 * moment(l_plus)) normalize the two half-horizon integrals so
that a rigid translation produces zero strain and a uniform gradient is
reproduced exactly, whatever the horizon asymmetry.
"""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass
from typing import Callable, ClassVar

import numpy as np

__all__ = [
    "Kernel",
    "ExponentialKernel",
    "PowerLawKernel",
    "LocalDelta",
    "FrameMultipliers",
    "KernelError",
    "exponential",
    "power_law",
    "local",
    "make_kernel",
    "frame_multipliers",
    "check_admissible",
    "KERNEL_KINDS",
]

# Below this internal length the exponential kernel is numerically a delta;
# the factory collapses it to the exact local limit instead.
LOCAL_L0_FLOOR = 1e-9


class KernelError(ValueError):
    """Invalid kernel parameters, or an evaluation the kernel does not define."""


class Kernel(abc.ABC):
    """Uniform kernel interface: eval, interval_integral, is_singular_at_origin."""

    kind: ClassVar[str]

    @abc.abstractmethod
    def eval(self, distance: float) -> float:
        """Kernel value at the given separation distance (>= 0)."""

    @abc.abstractmethod
    def interval_integral(self, length):
        """One-sided moment integral_0^L K(s) ds, exact.  Accepts arrays."""

    @property
    @abc.abstractmethod
    def is_singular_at_origin(self) -> bool:
        """True when K(s) is unbounded (or distributional) as s -> 0."""

    def describe(self) -> str:
        """Compact parameter string used in result tables."""
        return self.kind


@dataclass(frozen=True)
class FrameMultipliers:
    """Normalization constants for the two half-horizon integrals.

    A side whose horizon length is exactly zero gets ``math.inf``: the product
    c * integral tends to phi'(x)/2 there, and callers must switch to that
    boundary-limit branch instead of multiplying through.
    """

    c_minus: float
    c_plus: float


@dataclass(frozen=True)
class ExponentialKernel(Kernel):
    """K(s) = exp(-s / l0) with internal length l0."""

    l0: float
    kind: ClassVar[str] = "exponential"

    def __post_init__(self) -> None:
        if not self.l0 > LOCAL_L0_FLOOR:
            raise KernelError(
                f"exponential internal length must exceed {LOCAL_L0_FLOOR:g} "
                f"(got {self.l0!r}); use exponential() to collapse tiny "
                "lengths to the local limit"
            )

    def eval(self, distance: float) -> float:
        _require_nonnegative_distance(distance)
        return math.exp(-distance / self.l0)

    def interval_integral(self, length):
        _require_nonnegative_length(length)
        # l0 * (1 - exp(-L/l0)), written with expm1 so short intervals
        # keep full relative accuracy.
        return self.l0 * -np.expm1(-np.asarray(length) / self.l0)

    @property
    def is_singular_at_origin(self) -> bool:
        return False

    def describe(self) -> str:
        return f"l0={self.l0:g}"


@dataclass(frozen=True)
class PowerLawKernel(Kernel):
    """K(s) = s^(-alpha) / Gamma(1 - alpha) for 0 < alpha < 1.

    The Gamma normalization makes the one-sided moment L^(1-alpha) /
    Gamma(2 - alpha), so the alpha -> 1 limit concentrates unit mass at the
    origin; that degenerate case is the LocalDelta kernel, reachable through
    the power_law() factory.
    """

    alpha: float
    kind: ClassVar[str] = "power_law"

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise KernelError(
                f"power-law exponent must lie in (0, 1) (got {self.alpha!r}); "
                "alpha = 1 is the local limit, use power_law()"
            )

    def eval(self, distance: float) -> float:
        _require_nonnegative_distance(distance)
        if distance == 0.0:
            raise KernelError("power-law kernel is singular at coincident points")
        return distance ** (-self.alpha) / math.gamma(1.0 - self.alpha)

    def interval_integral(self, length):
        _require_nonnegative_length(length)
        return np.asarray(length) ** (1.0 - self.alpha) / math.gamma(2.0 - self.alpha)

    @property
    def is_singular_at_origin(self) -> bool:
        return True

    def describe(self) -> str:
        return f"alpha={self.alpha:g}"


@dataclass(frozen=True)
class LocalDelta(Kernel):
    """Degenerate local limit: the kernel acts as the identity on the gradient.

    Each one-sided moment carries unit mass however short the interval, which
    is the alpha -> 1 limit of the power-law moments and makes both frame
    multipliers exactly 1/2.
    """

    kind: ClassVar[str] = "local"

    def eval(self, distance: float) -> float:
        _require_nonnegative_distance(distance)
        if distance == 0.0:
            raise KernelError("delta kernel has no pointwise value at zero separation")
        return 0.0

    def interval_integral(self, length):
        _require_nonnegative_length(length)
        return np.where(np.asarray(length) > 0.0, 1.0, 0.0)[()]

    @property
    def is_singular_at_origin(self) -> bool:
        return True

    def describe(self) -> str:
        return "local"


def exponential(l0: float) -> Kernel:
    """Exponential kernel; lengths at or below the floor collapse to LocalDelta."""
    if not l0 > 0.0:
        raise KernelError(f"exponential internal length must be positive (got {l0!r})")
    if l0 <= LOCAL_L0_FLOOR:
        return LocalDelta()
    return ExponentialKernel(l0)


def power_law(alpha: float) -> Kernel:
    """Power-law kernel; alpha = 1 collapses to LocalDelta."""
    if not 0.0 < alpha <= 1.0:
        raise KernelError(f"power-law exponent must lie in (0, 1] (got {alpha!r})")
    if alpha == 1.0:
        return LocalDelta()
    return PowerLawKernel(alpha)


def local() -> Kernel:
    return LocalDelta()


KERNEL_KINDS: dict[str, Callable[..., Kernel]] = {
    "exponential": exponential,
    "power_law": power_law,
    "local": local,
}


def make_kernel(kind: str, **params: float) -> Kernel:
    """Build a kernel from its registry name, e.g. make_kernel('exponential', l0=0.005)."""
    try:
        factory = KERNEL_KINDS[kind]
    except KeyError:
        known = ", ".join(sorted(KERNEL_KINDS))
        raise KernelError(f"unknown kernel kind {kind!r} (known: {known})") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise KernelError(f"bad parameters for kernel {kind!r}: {exc}") from None


def frame_multipliers(kernel: Kernel, l_minus: float, l_plus: float) -> FrameMultipliers:
    """Normalization constants for a (possibly clipped) horizon pair.

    Parameters
    ----------
    kernel : Kernel
    l_minus, l_plus : float
        Trailing and leading horizon lengths after any domain clipping.
        Both must be >= 0 and at least one positive.  A zero-length side is
        reported as ``math.inf`` (see FrameMultipliers).
    """
    if l_minus < 0.0 or l_plus < 0.0:
        raise KernelError("horizon lengths must be non-negative")
    if l_minus == 0.0 and l_plus == 0.0:
        raise KernelError("degenerate horizon: both side lengths are zero")
    c_minus = math.inf if l_minus == 0.0 else 0.5 / float(kernel.interval_integral(l_minus))
    c_plus = math.inf if l_plus == 0.0 else 0.5 / float(kernel.interval_integral(l_plus))
    return FrameMultipliers(c_minus, c_plus)


def check_admissible(kernel: Kernel, horizon_length: float, samples: int = 64) -> None:
    """Verify positive, non-increasing decay over (0, horizon_length].

    The built-in kernels satisfy this by construction; the sampled check is
    what stands between a custom registered kernel and the assembly routines,
    which assume monotone attenuation.
    """
    if isinstance(kernel, LocalDelta):
        return
    if not horizon_length > 0.0:
        raise KernelError("admissibility check needs a positive horizon length")
    lo = horizon_length * 1e-9 if kernel.is_singular_at_origin else 0.0
    grid = np.linspace(lo, horizon_length, samples) if lo == 0.0 else np.geomspace(
        lo, horizon_length, samples
    )
    values = np.array([kernel.eval(float(s)) for s in grid])
    # A sharply peaked kernel may underflow to exact zero far from the
    # origin; that tail is still admissible.  What is not: vanishing near
    # the origin, negative values, or growth.
    if not values[0] > 0.0:
        raise KernelError(f"kernel {kernel.describe()} is not positive near the origin")
    if np.any(values < 0.0):
        raise KernelError(f"kernel {kernel.describe()} is negative on the horizon")
    if np.any(np.diff(values) > 0.0):
        raise KernelError(f"kernel {kernel.describe()} does not decay monotonically")


def _require_nonnegative_distance(distance: float) -> None:
    if distance < 0.0:
        raise KernelError(f"separation distance must be >= 0 (got {distance!r})")


def _require_nonnegative_length(length) -> None:
    if np.any(np.asarray(length) < 0.0):
        raise KernelError("interval length must be >= 0")
