"""Uniform midpoint grids, quadrature, and unitary position/momentum transforms.

Everything else in the package is built on the primitives here:

- ``Axis``: a uniform grid of ``n`` points (power of two) placed at cell
  midpoints, so no sample ever sits at exactly 0 on a symmetric box.
- ``dual_axis``: the conjugate momentum grid.  It is itself a midpoint grid,
  symmetric about 0, with step ``2*pi/(n*step)``.
- ``to_momentum`` / ``to_position``: the discrete realization of the unitary
  transform ``f~(p) = (2*pi)**-0.5 * integral dq exp(-i*p*q) f(q)`` (hbar = 1).
  Centering phases are applied explicitly so the discrete transform agrees
  with the continuum convention at the grid points, not merely up to phase,
  and the round trip is exact to rounding.
- Riemann midpoint quadrature and 4D -> 2D marginalization.
- Atomic (point-mass) 2D distributions with exact rational weights.
- A small self-describing binary serialization for fields.

All field values are immutable after construction and all operations are
pure functions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

__all__ = [
    "Axis",
    "dual_axis",
    "Field1D",
    "Field2D",
    "Field4D",
    "AtomicDistribution2D",
    "integrate_1d",
    "integrate_2d",
    "integrate_4d",
    "marginalize_4d",
    "MARGINAL_KEYS",
    "to_momentum",
    "to_position",
    "fine_samples",
    "probability_defect",
    "save_field",
    "load_field",
]

MARGINAL_KEYS = ("qq", "qp", "pq", "pp")

# summed-over array axes and output transpose for each kept pair of
# (q1, q2, p1, p2); "pq" leaves (q2, p1) which must be flipped to (p1, q2)
_MARGINAL_RULES = {
    "qq": ((2, 3), False),
    "qp": ((1, 2), False),
    "pq": ((0, 3), True),
    "pp": ((0, 1), False),
}


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Axis:
    """Uniform midpoint grid on ``[x_min, x_max]`` with ``n`` points.

    Points are ``x_j = x_min + (j + 1/2) * step`` with
    ``step = (x_max - x_min)/n``, strictly inside the interval.  ``source``
    is ``None`` for position axes and the originating position axis for
    momentum axes produced by :func:`dual_axis`.
    """

    n: int
    x_min: float
    x_max: float
    source: "Axis | None" = None

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 4 or not _is_power_of_two(self.n):
            raise ValueError(f"axis size must be a power of two >= 4, got {self.n}")
        if not self.x_max > self.x_min:
            raise ValueError(f"need x_max > x_min, got [{self.x_min}, {self.x_max}]")

    @property
    def step(self) -> float:
        return (self.x_max - self.x_min) / self.n

    @property
    def points(self) -> np.ndarray:
        x = self.x_min + (np.arange(self.n) + 0.5) * self.step
        x.setflags(write=False)
        return x

    @property
    def is_momentum(self) -> bool:
        return self.source is not None

    def spec(self) -> dict:
        return {"n": self.n, "x_min": self.x_min, "x_max": self.x_max}

    def same_grid(self, other: "Axis") -> bool:
        return (
            self.n == other.n
            and np.isclose(self.x_min, other.x_min)
            and np.isclose(self.x_max, other.x_max)
        )


def dual_axis(axis: Axis) -> Axis:
    """Momentum grid conjugate to ``axis``.

    The momentum step is ``dp = 2*pi/(n*step)`` and the points are
    ``(k + 1/2 - n/2) * dp``: a midpoint grid symmetric about 0, so sign
    functions are unambiguous on both representations.  ``step * dp * n``
    equals ``2*pi`` exactly, which is what makes the transform unitary.
    """
    if axis.is_momentum:
        raise ValueError("axis is already a momentum axis")
    p_max = np.pi / axis.step
    return Axis(axis.n, -p_max, p_max, source=axis)


def _freeze(values: np.ndarray) -> np.ndarray:
    values.setflags(write=False)
    return values


@dataclass(frozen=True)
class Field1D:
    axis: Axis
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values)
        if v.shape != (self.axis.n,):
            raise ValueError(f"values shape {v.shape} does not match axis n={self.axis.n}")
        object.__setattr__(self, "values", _freeze(v))


@dataclass(frozen=True)
class Field2D:
    axes: tuple[Axis, Axis]
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values)
        if v.shape != tuple(a.n for a in self.axes):
            raise ValueError(f"values shape {v.shape} does not match axes")
        object.__setattr__(self, "values", _freeze(v))

    @property
    def steps(self) -> tuple[float, float]:
        return tuple(a.step for a in self.axes)


@dataclass(frozen=True)
class Field4D:
    """Dense field over (q1, q2, p1, p2) in that axis order."""

    axes: tuple[Axis, Axis, Axis, Axis]
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values)
        if v.shape != tuple(a.n for a in self.axes):
            raise ValueError(f"values shape {v.shape} does not match axes")
        object.__setattr__(self, "values", _freeze(v))

    @property
    def steps(self) -> tuple[float, float, float, float]:
        return tuple(a.step for a in self.axes)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.steps))


@dataclass(frozen=True)
class AtomicDistribution2D:
    """Finite point-mass distribution with exact rational weights.

    ``atoms`` maps (x, y) points to positive weights summing to exactly 1.
    Used for delta-function marginals, where quadrature would be meaningless
    and exact arithmetic is both possible and required.
    """

    atoms: tuple[tuple[tuple[float, float], Fraction], ...]
    labels: tuple[str, str] = ("q", "q")

    def __post_init__(self) -> None:
        pts = [p for p, _ in self.atoms]
        if len(set(pts)) != len(pts):
            raise ValueError("atomic points must be pairwise distinct")
        weights = [w for _, w in self.atoms]
        if any(w <= 0 for w in weights):
            raise ValueError("atomic weights must be positive")
        if sum(weights, Fraction(0)) != 1:
            raise ValueError("atomic weights must sum to exactly 1")

    def marginal(self, index: int) -> dict[float, Fraction]:
        """Exact one-variable marginal: coordinate -> total weight."""
        out: dict[float, Fraction] = {}
        for (pt, w) in self.atoms:
            c = pt[index]
            out[c] = out.get(c, Fraction(0)) + w
        return out


def integrate_1d(f: Field1D) -> float:
    return float(np.sum(f.values) * f.axis.step)


def integrate_2d(f: Field2D) -> float:
    """Midpoint Riemann sum over both axes."""
    s1, s2 = f.steps
    return float(np.sum(f.values) * s1 * s2)


def integrate_4d(f: Field4D) -> float:
    return float(np.sum(f.values) * f.cell_volume)


def marginalize_4d(rho: Field4D, keep: str) -> Field2D:
    """Project a 4D density onto one of the four two-variable marginals.

    ``keep`` is one of ``"qq"``, ``"qp"``, ``"pq"``, ``"pp"``, naming the
    retained (first, second) variables of (q1, q2, p1, p2).  The dropped
    axes are summed and multiplied by their steps, so the total integral is
    preserved exactly.
    """
    if keep not in _MARGINAL_RULES:
        raise ValueError(f"keep must be one of {MARGINAL_KEYS}, got {keep!r}")
    summed_axes, flip = _MARGINAL_RULES[keep]
    weight = float(np.prod([rho.axes[i].step for i in summed_axes]))
    vals = rho.values.sum(axis=summed_axes) * weight
    kept = tuple(i for i in range(4) if i not in summed_axes)
    axes = (rho.axes[kept[0]], rho.axes[kept[1]])
    if flip:
        vals = vals.T
        axes = (axes[1], axes[0])
    return Field2D(axes, vals)


# ---------------------------------------------------------------------------
# position <-> momentum transforms
# ---------------------------------------------------------------------------


def _axes_of(f):
    if isinstance(f, Field1D):
        return (f.axis,)
    return f.axes


def _rebuild(f, axes, values):
    if isinstance(f, Field1D):
        return Field1D(axes[0], values)
    if isinstance(f, Field2D):
        return Field2D(axes, values)
    return Field4D(axes, values)


def _shape_for(ndim: int, axis_index: int, n: int) -> list[int]:
    sh = [1] * ndim
    sh[axis_index] = n
    return sh


def to_momentum(f, axis_index: int = 0):
    """Transform one axis of a complex field to its momentum representation.

    Realizes ``f~(p_k) = step/sqrt(2*pi) * sum_j exp(-i*p_k*x_j) f(x_j)``
    via an FFT with explicit centering phases.  Parseval holds exactly:
    ``sum |f~|^2 dp == sum |f|^2 dx`` up to rounding, and
    ``to_position(to_momentum(f))`` is the identity.
    """
    axes = _axes_of(f)
    ax = axes[axis_index]
    if ax.is_momentum:
        raise ValueError("axis is already in momentum representation")
    mom = dual_axis(ax)
    x, p = ax.points, mom.points
    n = ax.n
    j = np.arange(n)
    pre = np.exp(-1j * p[0] * ax.step * j)
    post = np.exp(-1j * p * x[0]) * (ax.step / np.sqrt(2.0 * np.pi))
    vals = np.asarray(f.values, dtype=complex)
    ndim = vals.ndim
    sh = _shape_for(ndim, axis_index, n)
    out = np.fft.fft(vals * pre.reshape(sh), axis=axis_index) * post.reshape(sh)
    new_axes = tuple(mom if i == axis_index else a for i, a in enumerate(axes))
    return _rebuild(f, new_axes, out)


def to_position(f, axis_index: int = 0):
    """Inverse of :func:`to_momentum` along ``axis_index``."""
    axes = _axes_of(f)
    mom = axes[axis_index]
    if not mom.is_momentum:
        raise ValueError("axis is not in momentum representation")
    ax = mom.source
    x, p = ax.points, mom.points
    n = ax.n
    k = np.arange(n)
    pre = np.exp(1j * k * mom.step * x[0])
    post = np.exp(1j * p[0] * x) * (mom.step * n / np.sqrt(2.0 * np.pi))
    vals = np.asarray(f.values, dtype=complex)
    ndim = vals.ndim
    sh = _shape_for(ndim, axis_index, n)
    out = np.fft.ifft(vals * pre.reshape(sh), axis=axis_index) * post.reshape(sh)
    new_axes = tuple(ax if i == axis_index else a for i, a in enumerate(axes))
    return _rebuild(f, new_axes, out)


def fine_samples(values: np.ndarray, axis: Axis, axis_index: int = 0) -> np.ndarray:
    """Evaluate the band-limited extension of a sampled function on the
    half-step lattice ``f_r = x_min + r*step/2``, ``r = 0..2n-1``.

    Odd ``r`` recover the original samples exactly; even ``r`` are the cell
    edges.  This is the canonical evaluation within the discrete model (the
    trigonometric sum over the n momentum components), used by the Wigner
    construction, which needs function values at half-step offsets without
    interpolation artifacts.
    """
    if axis.is_momentum:
        raise ValueError("fine sampling is defined on position axes")
    mom = dual_axis(axis)
    p = mom.points
    n = axis.n
    x = axis.points
    j = np.arange(n)
    vals = np.asarray(values, dtype=complex)
    sh = _shape_for(vals.ndim, axis_index, n)
    ft = np.fft.fft(vals * np.exp(-1j * p[0] * axis.step * j).reshape(sh), axis=axis_index)
    ft = ft * np.exp(-1j * p * (x[0] - axis.x_min)).reshape(sh)
    # sum_k e^{i p_k r step/2} via zero-padded inverse FFT of length 2n
    pad_shape = list(vals.shape)
    pad_shape[axis_index] = 2 * n
    pad = np.zeros(pad_shape, dtype=complex)
    sl = [slice(None)] * vals.ndim
    sl[axis_index] = slice(0, n)
    pad[tuple(sl)] = ft
    r = np.arange(2 * n)
    sh2 = _shape_for(vals.ndim, axis_index, 2 * n)
    out = np.fft.ifft(pad, axis=axis_index) * (2 * n)
    out = out * (np.exp(1j * p[0] * r * axis.step / 2) / n).reshape(sh2)
    return out


def probability_defect(f) -> tuple[float, float]:
    """(most negative value, |1 - total integral|) of a candidate density."""
    v = np.asarray(f.values)
    neg = float(min(v.min(), 0.0))
    if isinstance(f, Field1D):
        total = integrate_1d(f)
    elif isinstance(f, Field2D):
        total = integrate_2d(f)
    else:
        total = integrate_4d(f)
    return neg, abs(1.0 - total)


# ---------------------------------------------------------------------------
# serialization: <base>.json metadata sidecar + <base>.bin row-major values
# ---------------------------------------------------------------------------

_FIELD_KINDS = {1: Field1D, 2: Field2D, 4: Field4D}


def save_field(f, base: str | Path) -> None:
    base = Path(base)
    axes = _axes_of(f)
    meta = {
        "ndim": len(axes),
        "dtype": str(np.asarray(f.values).dtype),
        "axes": [a.spec() for a in axes],
        "momentum": [a.is_momentum for a in axes],
        "sources": [a.source.spec() if a.is_momentum else None for a in axes],
        "order": "C",
    }
    base.parent.mkdir(parents=True, exist_ok=True)
    base.with_suffix(".json").write_text(json.dumps(meta, indent=1))
    np.ascontiguousarray(f.values).tofile(base.with_suffix(".bin"))


def load_field(base: str | Path):
    base = Path(base)
    meta = json.loads(base.with_suffix(".json").read_text())
    axes = []
    for spec, is_mom, src in zip(meta["axes"], meta["momentum"], meta["sources"]):
        if is_mom:
            axes.append(dual_axis(Axis(**src)))
        else:
            axes.append(Axis(**spec))
    values = np.fromfile(base.with_suffix(".bin"), dtype=np.dtype(meta["dtype"]))
    values = values.reshape([a.n for a in axes])
    cls = _FIELD_KINDS[meta["ndim"]]
    if cls is Field1D:
        return Field1D(axes[0], values)
    return cls(tuple(axes), values)
