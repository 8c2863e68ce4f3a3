"""Extended-interval algebra and the D_K kernel geometry.

Intervals are stored as ``[left, right]`` with no ordering requirement, so
negative scaling and Hukuhara differences stay inside the set. Bulk code
works on float arrays whose last axis holds ``(left, right)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

__all__ = [
    "ExtendedInterval",
    "Kernel",
    "UNIT_INTERVAL",
    "CONSTANT_INTERVAL",
    "support_value",
    "interval_add",
    "hukuhara_diff",
    "scalar_mul",
    "inner_product_k",
    "dk_distance_sq",
    "linear_combination",
    "as_bounds",
    "support",
    "inner_product_arrays",
    "dk_distance_sq_arrays",
    "midpoints",
    "ranges",
]


@dataclass(frozen=True)
class ExtendedInterval:
    """A pair of finite reals ``[left, right]``; ``right < left`` is allowed."""

    left: float
    right: float

    def __post_init__(self):
        left, right = float(self.left), float(self.right)
        if not (math.isfinite(left) and math.isfinite(right)):
            raise ValueError(f"interval bounds must be finite, got [{left}, {right}]")
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.left + self.right)

    @property
    def range(self) -> float:
        return self.right - self.left

    @property
    def is_reversed(self) -> bool:
        return self.right < self.left

    def __add__(self, other: "ExtendedInterval") -> "ExtendedInterval":
        return interval_add(self, other)

    def __sub__(self, other: "ExtendedInterval") -> "ExtendedInterval":
        return hukuhara_diff(self, other)

    def __rmul__(self, k: float) -> "ExtendedInterval":
        return scalar_mul(k, self)

    def __iter__(self):
        yield self.left
        yield self.right

    def __repr__(self) -> str:
        return f"[{self.left:g}, {self.right:g}]"


CONSTANT_INTERVAL = ExtendedInterval(1.0, 1.0)
UNIT_INTERVAL = ExtendedInterval(-0.5, 0.5)


@dataclass(frozen=True)
class Kernel:
    """Symmetric kernel on {-1, 1}: ``a = K(1,1)``, ``b = K(1,-1)``, ``c = K(-1,-1)``.

    Construction requires a positive semidefinite matrix with ``a, c > 0``.
    The singular members (``ac = b^2``, e.g. the midpoint kernel
    ``(1/4, -1/4, 1/4)`` and the range kernel ``(1, 1, 1)``) give a
    pseudo-distance; ``is_definite`` tells them apart.
    """

    a: float
    b: float
    c: float

    def __post_init__(self):
        a, b, c = float(self.a), float(self.b), float(self.c)
        if not all(math.isfinite(v) for v in (a, b, c)):
            raise ValueError("kernel parameters must be finite")
        if not (a > 0 and c > 0 and a * c - b * b >= 0):
            raise ValueError(
                f"kernel ({a:g}, {b:g}, {c:g}) is not positive semidefinite: "
                "need a > 0, c > 0 and a*c - b^2 >= 0"
            )
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @classmethod
    def parse(cls, text: str) -> "Kernel":
        parts = [p for p in text.replace(" ", "").split(",") if p]
        if len(parts) != 3:
            raise ValueError(f"kernel must be 'a,b,c', got {text!r}")
        return cls(*(float(p) for p in parts))

    @property
    def matrix(self) -> np.ndarray:
        """Kernel matrix in support coordinates ``(s(+1), s(-1))``."""
        return np.array([[self.a, self.b], [self.b, self.c]])

    @property
    def schur(self) -> float:
        """``(ac - b^2) / a``."""
        return (self.a * self.c - self.b * self.b) / self.a

    @property
    def is_definite(self) -> bool:
        return self.a * self.c - self.b * self.b > 0

    @property
    def point_scale(self) -> float:
        """Factor ``a - 2b + c`` by which D_K^2 scales squared point errors."""
        return self.a - 2.0 * self.b + self.c

    def as_tuple(self) -> tuple:
        return (self.a, self.b, self.c)

    def __str__(self) -> str:
        return f"{self.a:g},{self.b:g},{self.c:g}"


IntervalLike = Union[ExtendedInterval, Sequence[float]]


def _iv(x: IntervalLike) -> ExtendedInterval:
    if isinstance(x, ExtendedInterval):
        return x
    left, right = x
    return ExtendedInterval(left, right)


def support_value(iv: IntervalLike, u: int) -> float:
    """Support function value at direction ``u``.

    ``s(+1) = right`` and ``s(-1) = -left``. The sup/inf branches of the
    definition agree on this closed form for ordered and reversed bounds.
    """
    iv = _iv(iv)
    if u == 1:
        return iv.right
    if u == -1:
        return -iv.left
    raise ValueError(f"direction must be +1 or -1, got {u!r}")


def interval_add(x: IntervalLike, y: IntervalLike) -> ExtendedInterval:
    x, y = _iv(x), _iv(y)
    return ExtendedInterval(x.left + y.left, x.right + y.right)


def hukuhara_diff(x: IntervalLike, y: IntervalLike) -> ExtendedInterval:
    x, y = _iv(x), _iv(y)
    return ExtendedInterval(x.left - y.left, x.right - y.right)


def scalar_mul(k: float, x: IntervalLike) -> ExtendedInterval:
    # bounds are not re-sorted for k < 0
    x = _iv(x)
    return ExtendedInterval(k * x.left, k * x.right)


def inner_product_k(x: IntervalLike, y: IntervalLike, kernel: Kernel) -> float:
    x, y = _iv(x), _iv(y)
    return (
        kernel.a * (x.right * y.right)
        - kernel.b * (x.right * y.left + x.left * y.right)
        + kernel.c * (x.left * y.left)
    )


def _square_form(dl, dr, kernel: Kernel):
    # a (dR - (b/a) dL)^2 + (ac - b^2)/a dL^2: both terms are nonnegative, so
    # no cancellation, and the singular midpoint/range kernels come out exact
    return kernel.a * (dr - (kernel.b / kernel.a) * dl) ** 2 + kernel.schur * dl ** 2


def dk_distance_sq(x: IntervalLike, y: IntervalLike, kernel: Kernel) -> float:
    """``<d, d>_K`` for the Hukuhara difference ``d = x - y``."""
    d = hukuhara_diff(x, y)
    return float(_square_form(d.left, d.right, kernel))


def linear_combination(row, theta) -> ExtendedInterval:
    """Interval combination ``sum_j theta_j * row_j``."""
    bounds = as_bounds(row)
    theta = np.asarray(theta, dtype=float)
    if bounds.ndim != 2 or bounds.shape[0] != theta.shape[0]:
        raise ValueError(
            f"row has {bounds.shape[0] if bounds.ndim == 2 else '?'} entries "
            f"but theta has {theta.shape[0]}"
        )
    left, right = theta @ bounds
    return ExtendedInterval(left, right)


# -- array forms ------------------------------------------------------------


def as_bounds(x) -> np.ndarray:
    """Coerce intervals (or nested sequences of them) to a float ``(..., 2)`` array."""
    if isinstance(x, ExtendedInterval):
        return np.array([x.left, x.right])
    if isinstance(x, np.ndarray):
        arr = x.astype(float, copy=False)
    else:
        seq = list(x)
        if seq and isinstance(seq[0], ExtendedInterval):
            arr = np.array([[iv.left, iv.right] for iv in seq], dtype=float)
        elif seq and not np.isscalar(seq[0]) and not isinstance(seq[0], ExtendedInterval):
            arr = np.array([as_bounds(s) for s in seq], dtype=float)
        else:
            arr = np.asarray(seq, dtype=float)
    if arr.shape[-1:] != (2,):
        raise ValueError(f"last axis must hold (left, right), got shape {arr.shape}")
    return arr


def support(bounds: np.ndarray) -> np.ndarray:
    """Map ``(..., 2)`` bounds to support coordinates ``(s(+1), s(-1)) = (R, -L)``."""
    return np.stack([bounds[..., 1], -bounds[..., 0]], axis=-1)


def inner_product_arrays(x: np.ndarray, y: np.ndarray, kernel: Kernel) -> np.ndarray:
    xl, xr = x[..., 0], x[..., 1]
    yl, yr = y[..., 0], y[..., 1]
    return kernel.a * (xr * yr) - kernel.b * (xr * yl + xl * yr) + kernel.c * (xl * yl)


def dk_distance_sq_arrays(x: np.ndarray, y: np.ndarray, kernel: Kernel) -> np.ndarray:
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    return _square_form(d[..., 0], d[..., 1], kernel)


def midpoints(bounds: np.ndarray) -> np.ndarray:
    return 0.5 * (bounds[..., 0] + bounds[..., 1])


def ranges(bounds: np.ndarray) -> np.ndarray:
    return bounds[..., 1] - bounds[..., 0]
