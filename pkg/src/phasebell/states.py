"""Pure states on the 2D configuration grid and their phase-space objects.

Provides wavefunction containers, a small catalog of states (Gaussians,
harmonic-oscillator products, random low-mode superpositions, and the
explicit entangled family built from a regularized inverse-square-root
profile), the four mixed position/momentum amplitudes and the probability
marginals they induce, the factorized-state product density, and the Wigner
transform.

Conventions: hbar = 1, momentum amplitudes via the unitary transform in
:mod:`phasebell.grids`.  All probability marginals of a pure state are
automatically mutually consistent; this is exact on the grid because the
discrete transform is exactly unitary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import (
    Axis,
    Field1D,
    Field2D,
    Field4D,
    dual_axis,
    fine_samples,
    load_field,
    to_momentum,
)

__all__ = [
    "WaveFunction1D",
    "WaveFunction2D",
    "MixedRepresentations",
    "MarginalQuartet",
    "RegularizedSqrtProfile",
    "gaussian_1d",
    "oscillator_1d",
    "flip_1d",
    "product_state",
    "gaussian_state",
    "oscillator_product",
    "random_superposition",
    "violating_state",
    "mixed_representations",
    "quantum_marginals",
    "product_density",
    "wigner_function",
    "wigner_value",
    "load_state",
]

_NORM_TOL = 1e-9


@dataclass(frozen=True)
class WaveFunction1D:
    """Normalized complex amplitude on one position axis."""

    axis: Axis
    values: np.ndarray
    label: str = "state"

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.axis.n,):
            raise ValueError("values shape does not match axis")
        nrm = np.sum(np.abs(v) ** 2) * self.axis.step
        if abs(nrm - 1.0) > _NORM_TOL:
            raise ValueError(f"state not normalized: |psi|^2 integrates to {nrm}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def momentum_values(self) -> np.ndarray:
        return to_momentum(Field1D(self.axis, self.values)).values


@dataclass(frozen=True)
class WaveFunction2D:
    """Normalized complex amplitude psi(q1, q2) on a tensor grid."""

    axes: tuple[Axis, Axis]
    values: np.ndarray
    label: str = "state"

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=complex)
        if v.shape != tuple(a.n for a in self.axes):
            raise ValueError("values shape does not match axes")
        nrm = np.sum(np.abs(v) ** 2) * self.axes[0].step * self.axes[1].step
        if abs(nrm - 1.0) > _NORM_TOL:
            raise ValueError(f"state not normalized: |psi|^2 integrates to {nrm}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def as_field(self) -> Field2D:
        return Field2D(self.axes, self.values)


def _normalized(values: np.ndarray, *steps: float) -> np.ndarray:
    nrm2 = np.sum(np.abs(values) ** 2) * float(np.prod(steps))
    if nrm2 <= 0:
        raise ValueError("cannot normalize an identically zero state")
    return values / np.sqrt(nrm2)


def gaussian_1d(axis: Axis, center: float = 0.0, width: float = 1.0,
                momentum: float = 0.0, label: str | None = None) -> WaveFunction1D:
    """Gaussian wave packet exp(-(x-c)^2/(2 w^2)); width 1 is the ground state."""
    x = axis.points
    v = np.exp(-((x - center) ** 2) / (2.0 * width**2)) * np.exp(1j * momentum * x)
    if label is None:
        label = f"gauss(c={center},w={width},k={momentum})"
    return WaveFunction1D(axis, _normalized(v.astype(complex), axis.step), label)


def oscillator_1d(axis: Axis, m: int, label: str | None = None) -> WaveFunction1D:
    """m-th harmonic oscillator eigenfunction (unit mass and frequency).

    Built with the stable two-term recurrence; accurate for the small m we
    need (catalog states and random superpositions).
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    x = axis.points
    h0 = np.pi**-0.25 * np.exp(-(x**2) / 2.0)
    if m == 0:
        v = h0
    else:
        prev, cur = np.zeros_like(h0), h0
        for k in range(m):
            prev, cur = cur, np.sqrt(2.0 / (k + 1)) * x * cur - np.sqrt(k / (k + 1)) * prev
        v = cur
    if label is None:
        label = f"oscillator(m={m})"
    return WaveFunction1D(axis, _normalized(v.astype(complex), axis.step), label)


def flip_1d(phi: WaveFunction1D, indicator: np.ndarray) -> WaveFunction1D:
    """Apply (2*chi - 1) pointwise: negate the state outside the set."""
    sgn = 2.0 * np.asarray(indicator, dtype=float) - 1.0
    return WaveFunction1D(phi.axis, phi.values * sgn, label=f"flip[{phi.label}]")


def product_state(phi1: WaveFunction1D, phi2: WaveFunction1D) -> WaveFunction2D:
    vals = np.outer(phi1.values, phi2.values)
    return WaveFunction2D((phi1.axis, phi2.axis), vals,
                          label=f"{phi1.label} x {phi2.label}")


def gaussian_state(axes: tuple[Axis, Axis], centers=(0.0, 0.0), widths=(1.0, 1.0),
                   momenta=(0.0, 0.0)) -> WaveFunction2D:
    return product_state(
        gaussian_1d(axes[0], centers[0], widths[0], momenta[0]),
        gaussian_1d(axes[1], centers[1], widths[1], momenta[1]),
    )


def oscillator_product(axes: tuple[Axis, Axis], m1: int, m2: int) -> WaveFunction2D:
    return product_state(oscillator_1d(axes[0], m1), oscillator_1d(axes[1], m2))


def random_superposition(axes: tuple[Axis, Axis], seed: int, modes: int = 6) -> WaveFunction2D:
    """Random superposition of low oscillator products, normalized on the grid.

    Deterministic given the seed; gives smooth generic entangled states for
    the randomized property suites.
    """
    rng = np.random.default_rng(seed)
    coef = rng.normal(size=(modes, modes)) + 1j * rng.normal(size=(modes, modes))
    basis1 = np.stack([oscillator_1d(axes[0], m).values for m in range(modes)])
    basis2 = np.stack([oscillator_1d(axes[1], m).values for m in range(modes)])
    vals = np.einsum("mn,mi,nj->ij", coef, basis1, basis2)
    vals = _normalized(vals, axes[0].step, axes[1].step)
    return WaveFunction2D(axes, vals, label=f"random(seed={seed},modes={modes})")


# ---------------------------------------------------------------------------
# the explicit violating family
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegularizedSqrtProfile:
    """Cutoff profile h(q) = theta(L - q) / sqrt((q + 1) * ln(L + 1)).

    Normalized so the integral of h^2 over [0, inf) is exactly 1 for every
    cutoff L.  ``a`` and ``b`` are the even and odd unit-norm 1D components
    h(|q|)/sqrt(2) and sgn(q) h(|q|)/sqrt(2); they are mutually orthogonal,
    and every member of the violating family is (a x a +/- e^{i pi/4} b x b)
    / sqrt(2).
    """

    L: float
    sign: int = +1

    def __post_init__(self) -> None:
        if self.L <= 0:
            raise ValueError("cutoff L must be positive")
        if self.sign not in (+1, -1):
            raise ValueError("sign must be +1 or -1")

    def h(self, q: np.ndarray) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        inside = (q >= 0) & (q <= self.L)
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = 1.0 / np.sqrt(np.log(self.L + 1.0) * (q + 1.0))
        return np.where(inside, vals, 0.0)

    def a(self, q: np.ndarray) -> np.ndarray:
        return self.h(np.abs(q)) / np.sqrt(2.0)

    def b(self, q: np.ndarray) -> np.ndarray:
        return np.sign(q) * self.h(np.abs(q)) / np.sqrt(2.0)


def violating_state(axes: tuple[Axis, Axis], L: float, sign: int = +1,
                    allow_truncation: bool = False) -> tuple[WaveFunction2D, float]:
    """Sample the entangled sqrt-profile state on the grid.

    Returns the renormalized state together with the raw discretization
    deficit ``|1 - norm^2|`` before renormalization.  The box must contain
    [-L, L] on both axes unless ``allow_truncation`` is set.
    """
    prof = RegularizedSqrtProfile(L, sign)
    for ax in axes:
        if (ax.x_min > -L or ax.x_max < L) and not allow_truncation:
            raise ValueError(
                f"box [{ax.x_min}, {ax.x_max}] does not contain [-{L}, {L}]; "
                "pass allow_truncation=True to truncate"
            )
    x1, x2 = axes[0].points, axes[1].points
    h1, h2 = prof.h(np.abs(x1)), prof.h(np.abs(x2))
    cross = np.outer(np.sign(x1), np.sign(x2))
    coef = 1.0 + sign * np.exp(1j * np.pi / 4.0) * cross
    vals = coef * np.outer(h1, h2) / (2.0 * np.sqrt(2.0))
    raw = np.sum(np.abs(vals) ** 2) * axes[0].step * axes[1].step
    deficit = abs(1.0 - raw)
    vals = vals / np.sqrt(raw)
    sgn = "+" if sign > 0 else "-"
    return WaveFunction2D(axes, vals, label=f"psi{sgn}(L={L})"), deficit


# ---------------------------------------------------------------------------
# mixed representations and marginals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MixedRepresentations:
    """The four amplitudes <q1,q2|psi>, <q1,p2|psi>, <p1,q2|psi>, <p1,p2|psi>."""

    qq: Field2D
    qp: Field2D
    pq: Field2D
    pp: Field2D

    def items(self):
        return (("qq", self.qq), ("qp", self.qp), ("pq", self.pq), ("pp", self.pp))


@dataclass(frozen=True)
class MarginalQuartet:
    """The four two-variable probability densities of one configuration.

    Members are either grid densities or atomic distributions.  For
    quantum-derived quartets the pairwise one-variable consistency holds to
    rounding; for atomic quartets it holds exactly.
    """

    sigma_qq: object
    sigma_qp: object
    sigma_pq: object
    sigma_pp: object
    provenance: str = "unspecified"

    def items(self):
        return (
            ("qq", self.sigma_qq),
            ("qp", self.sigma_qp),
            ("pq", self.sigma_pq),
            ("pp", self.sigma_pp),
        )

    def member(self, key: str):
        return dict(self.items())[key]


def mixed_representations(psi: WaveFunction2D) -> MixedRepresentations:
    qq = psi.as_field()
    qp = to_momentum(qq, 1)
    pq = to_momentum(qq, 0)
    pp = to_momentum(pq, 1)
    return MixedRepresentations(qq, qp, pq, pp)


def quantum_marginals(psi: WaveFunction2D) -> MarginalQuartet:
    """|amplitude|^2 of each mixed representation."""
    reps = mixed_representations(psi)
    dens = {k: Field2D(f.axes, np.abs(f.values) ** 2) for k, f in reps.items()}
    return MarginalQuartet(dens["qq"], dens["qp"], dens["pq"], dens["pp"],
                           provenance=f"quantum:{psi.label}")


def product_density(phi1: WaveFunction1D, phi2: WaveFunction1D) -> Field4D:
    """Nonnegative 4D density attached to a factorized state.

    The outer product |phi1(q1)|^2 |phi2(q2)|^2 |phi1~(p1)|^2 |phi2~(p2)|^2.
    Its four marginals coincide with the quantum marginals of phi1 x phi2,
    so every sign-pattern functional of it obeys the classical bound.
    """
    dq1 = np.abs(phi1.values) ** 2
    dq2 = np.abs(phi2.values) ** 2
    dp1 = np.abs(phi1.momentum_values()) ** 2
    dp2 = np.abs(phi2.momentum_values()) ** 2
    vals = (
        dq1[:, None, None, None]
        * dq2[None, :, None, None]
        * dp1[None, None, :, None]
        * dp2[None, None, None, :]
    )
    axes = (phi1.axis, phi2.axis, dual_axis(phi1.axis), dual_axis(phi2.axis))
    return Field4D(axes, vals)


# ---------------------------------------------------------------------------
# Wigner transform
# ---------------------------------------------------------------------------


def _fine_grid_2d(psi: WaveFunction2D) -> np.ndarray:
    f = fine_samples(psi.values, psi.axes[0], 0)
    return fine_samples(f, psi.axes[1], 1)


def _offset_indices(n: int):
    m = np.arange(-n, n)
    base = 2 * np.arange(n)[:, None] + 1
    ip = base + m[None, :]
    im = base - m[None, :]
    ok = (ip >= 0) & (ip < 2 * n) & (im >= 0) & (im < 2 * n)
    return ip.clip(0, 2 * n - 1), im.clip(0, 2 * n - 1), ok


def wigner_function(psi: WaveFunction2D) -> Field4D:
    """Wigner quasi-density on the (q1, q2, p1, p2) grid.

    The separation-coordinate integral runs over the doubled (half-step)
    lattice: even offsets read the position samples directly, odd offsets
    read the cell-edge values of the band-limited extension, so no
    interpolation enters.  Marginals over momenta reproduce |psi(q)|^2
    exactly on the grid; marginals over positions reproduce the momentum
    density up to wraparound terms that vanish for states supported in the
    central half of the box.
    """
    n1, n2 = psi.axes[0].n, psi.axes[1].n
    d1, d2 = psi.axes[0].step, psi.axes[1].step
    pf = _fine_grid_2d(psi)
    ip1, im1, ok1 = _offset_indices(n1)
    ip2, im2, ok2 = _offset_indices(n2)
    W = np.empty((n1, n2, n1, n2), dtype=float)
    pref = (d1 / (2.0 * np.pi)) * (d2 / (2.0 * np.pi))
    for j2 in range(n2):
        # slab over (q1, m1, m2) at fixed q2
        A = pf[:, ip2[j2]]  # (2*n1, 2*n2)
        B = pf[:, im2[j2]]
        C = np.conj(A[ip1]) * B[im1]  # (n1, 2*n1, 2*n2)
        C *= ok1[:, :, None]
        C *= ok2[j2][None, None, :]
        C = np.fft.ifftshift(C, axes=(1, 2))
        E = np.fft.ifft(np.fft.ifft(C, axis=1), axis=2) * (4 * n1 * n2)
        blk = np.fft.fftshift(E[:, 1::2, 1::2], axes=(1, 2))
        W[:, j2] = pref * blk.real
    axes = (psi.axes[0], psi.axes[1], dual_axis(psi.axes[0]), dual_axis(psi.axes[1]))
    return Field4D(axes, W)


def wigner_value(psi: WaveFunction2D, q1: float, q2: float,
                 p1: float, p2: float) -> float:
    """Evaluate the Wigner transform at a single phase-space point.

    q1 and q2 must lie on the half-step lattice of their axes (grid points,
    cell edges, or the origin of a symmetric box); p1 and p2 are arbitrary.
    Used for checks at points the midpoint output grid cannot represent,
    e.g. the exact origin.
    """
    pf = _fine_grid_2d(psi)
    idx = []
    for q, ax in ((q1, psi.axes[0]), (q2, psi.axes[1])):
        r = (q - ax.x_min) / (ax.step / 2.0)
        ri = int(round(r))
        if abs(r - ri) > 1e-9 or not (0 < ri < 2 * ax.n):
            raise ValueError(f"{q} is not an interior half-step lattice point")
        idx.append(ri)
    n1, n2 = psi.axes[0].n, psi.axes[1].n
    d1, d2 = psi.axes[0].step, psi.axes[1].step
    m1 = np.arange(-n1, n1)
    m2 = np.arange(-n2, n2)
    v1 = (idx[0] + m1 >= 0) & (idx[0] + m1 < 2 * n1) & (idx[0] - m1 >= 0) & (idx[0] - m1 < 2 * n1)
    v2 = (idx[1] + m2 >= 0) & (idx[1] + m2 < 2 * n2) & (idx[1] - m2 >= 0) & (idx[1] - m2 < 2 * n2)
    m1, m2 = m1[v1], m2[v2]
    C = np.conj(pf[np.ix_(idx[0] + m1, idx[1] + m2)]) * pf[np.ix_(idx[0] - m1, idx[1] - m2)]
    phase = np.exp(1j * p1 * m1 * d1)[:, None] * np.exp(1j * p2 * m2 * d2)[None, :]
    val = np.sum(C * phase) * d1 * d2 / (4.0 * np.pi**2)
    return float(val.real)


def load_state(base, normalize: bool = True, label: str = "loaded") -> WaveFunction2D:
    """Reconstruct a wavefunction from a serialized complex 2D field."""
    f = load_field(base)
    if not isinstance(f, Field2D):
        raise ValueError("serialized state must be a 2D field")
    vals = np.asarray(f.values, dtype=complex)
    if normalize:
        vals = _normalized(vals, f.axes[0].step, f.axes[1].step)
    return WaveFunction2D(f.axes, vals, label=label)
