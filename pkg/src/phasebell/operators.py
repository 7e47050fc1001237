"""Finite-dimensional realization of the indicator projectors and their algebra.

On the n-point grid the position-set projector is a diagonal 0/1 mask and
the momentum-set projector is the unitary transform conjugate of one, so
both are exact orthogonal projectors up to rounding.  With one position-set
and one momentum-set projector per axis, the combination

    P = chi1 + chi2 + chi1'*chi2' - chi1*chi2 - chi1*chi2' - chi1'*chi2

is self-adjoint (cross-axis factors commute) but *not* a projector:

    P^2 = P - [chi1, chi1'] (x) [chi2, chi2'],

an exact identity of projector algebra that the discrete model preserves to
rounding.  Because the commutator expectation R[phi] = <phi| i[chi,chi'] |phi>
changes sign under phi -> (2*chi - 1) phi, factorized states with
sign-aligned R values make <P(1-P)> = -R1*R2 strictly negative, so P has
spectrum outside [0, 1].  This module builds the dense matrices, a
matrix-free application for large grids, the commutator functional, the
negativity witness search, and spectral bounds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigsh

from .bell import SignPattern
from .grids import Axis, dual_axis, to_momentum, to_position, Field2D
from .states import WaveFunction1D, WaveFunction2D, flip_1d, gaussian_1d, product_state

__all__ = [
    "ProjectorSpec",
    "transform_matrix",
    "build_projector",
    "build_bell_combination",
    "bell_square_residual",
    "commutator_expectation",
    "commutator_matrix",
    "apply_bell_combination",
    "bell_combination_expectation",
    "bell_combination_operator",
    "spectrum_bounds",
    "SpectrumResult",
    "negativity_witness",
    "WitnessResult",
    "pattern_specs",
]


@dataclass(frozen=True)
class ProjectorSpec:
    """One indicator projector: an axis, a representation, and a subset."""

    axis: Axis
    representation: str  # "position" | "momentum"
    subset: object

    def __post_init__(self) -> None:
        if self.representation not in ("position", "momentum"):
            raise ValueError("representation must be 'position' or 'momentum'")
        if self.axis.is_momentum:
            raise ValueError("spec axis must be the position axis; momentum is derived")

    @property
    def working_axis(self) -> Axis:
        return dual_axis(self.axis) if self.representation == "momentum" else self.axis


def pattern_specs(axes: tuple[Axis, Axis], pattern: SignPattern):
    """(chi1, chi2, chi1', chi2') projector specs realizing a sign pattern."""
    return (
        ProjectorSpec(axes[0], "position", pattern.set_q1),
        ProjectorSpec(axes[1], "position", pattern.set_q2),
        ProjectorSpec(axes[0], "momentum", pattern.set_p1),
        ProjectorSpec(axes[1], "momentum", pattern.set_p2),
    )


def transform_matrix(axis: Axis) -> np.ndarray:
    """Unitary position -> momentum matrix in the quadrature-weighted basis."""
    p = dual_axis(axis).points
    x = axis.points
    return np.exp(-1j * np.outer(p, x)) / np.sqrt(axis.n)


def build_projector(spec: ProjectorSpec, strict: bool = True) -> np.ndarray:
    """Dense 1D-factor projector matrix.

    Position specs give a diagonal mask; momentum specs conjugate the mask
    with the unitary transform.  ``strict`` rejects empty or full sets
    (improper projectors are allowed only for the degenerate identity/zero
    checks).
    """
    ax = spec.working_axis
    ind = np.asarray(spec.subset.indicator(ax.points), dtype=float)
    if strict and (ind.all() or not ind.any()):
        raise ValueError("projector set must be proper (nonempty with nonempty complement)")
    if spec.representation == "position":
        return np.diag(ind.astype(complex))
    U = transform_matrix(spec.axis)
    return U.conj().T @ (ind[:, None] * U)


def _check_pair_axes(chi1, chi2, chip1, chip2) -> None:
    if not (chi1.axis.same_grid(chip1.axis) and chi2.axis.same_grid(chip2.axis)):
        raise ValueError("chi1/chi1' must share axis 1 and chi2/chi2' axis 2")
    if chi1.representation != "position" or chi2.representation != "position":
        raise ValueError("chi1 and chi2 must be position-representation specs")
    if chip1.representation != "momentum" or chip2.representation != "momentum":
        raise ValueError("chi1' and chi2' must be momentum-representation specs")


def build_bell_combination(chi1: ProjectorSpec, chi2: ProjectorSpec,
                           chip1: ProjectorSpec, chip2: ProjectorSpec,
                           strict: bool = True) -> np.ndarray:
    """Dense matrix of the projector combination on the tensor grid."""
    _check_pair_axes(chi1, chi2, chip1, chip2)
    n1, n2 = chi1.axis.n, chi2.axis.n
    A = build_projector(chi1, strict)
    B = build_projector(chi2, strict)
    Ap = build_projector(chip1, strict)
    Bp = build_projector(chip2, strict)
    I1, I2 = np.eye(n1, dtype=complex), np.eye(n2, dtype=complex)
    P = (
        np.kron(A, I2)
        + np.kron(I1, B)
        + np.kron(Ap, Bp)
        - np.kron(A, B)
        - np.kron(A, Bp)
        - np.kron(Ap, B)
    )
    return P


def commutator_matrix(chi: ProjectorSpec, chi_prime: ProjectorSpec,
                      strict: bool = True) -> np.ndarray:
    """[chi, chi'] on one 1D factor (anti-Hermitian)."""
    A = build_projector(chi, strict)
    Ap = build_projector(chi_prime, strict)
    return A @ Ap - Ap @ A


def bell_square_residual(chi1: ProjectorSpec, chi2: ProjectorSpec,
                         chip1: ProjectorSpec, chip2: ProjectorSpec) -> float:
    """Max-norm residual of P^2 - P + [chi1,chi1'] (x) [chi2,chi2'].

    Exact projector algebra makes this identically zero; only rounding
    survives discretization, at any resolution.
    """
    P = build_bell_combination(chi1, chi2, chip1, chip2)
    C1 = commutator_matrix(chi1, chip1)
    C2 = commutator_matrix(chi2, chip2)
    resid = P @ P - P + np.kron(C1, C2)
    return float(np.abs(resid).max())


# ---------------------------------------------------------------------------
# commutator functional and the negativity witness
# ---------------------------------------------------------------------------


def commutator_expectation(phi: WaveFunction1D, chi: ProjectorSpec,
                           chi_prime: ProjectorSpec) -> float:
    """R[phi] = <phi| i [chi, chi'] |phi>; real because i[.,.] is Hermitian."""
    C = commutator_matrix(chi, chi_prime)
    v = phi.values
    val = 1j * (v.conj() @ (C @ v)) * phi.axis.step
    if abs(val.imag) > 1e-10:
        raise AssertionError(f"commutator expectation not real: {val}")
    return float(val.real)


@dataclass(frozen=True)
class WitnessResult:
    psi: WaveFunction2D
    value: float          # <psi| P (1 - P) |psi>
    predicted: float      # -R1 * R2
    r1: float
    r2: float
    achieved: bool

    def to_json_dict(self) -> dict:
        return {
            "witness_value": self.value,
            "predicted_minus_r1_r2": self.predicted,
            "r1": self.r1,
            "r2": self.r2,
            "state": self.psi.label,
            "achieved": self.achieved,
        }


_WITNESS_CENTERS = (-2.0, -1.0, 0.0, 1.0, 2.0)
_WITNESS_WIDTHS = (0.5, 1.0, 2.0)


def _witness_catalog(axis: Axis, chi: ProjectorSpec):
    """Gaussians over a fixed center/width lattice, plus their sign flips."""
    ind = np.asarray(chi.subset.indicator(axis.points))
    for c in _WITNESS_CENTERS:
        for w in _WITNESS_WIDTHS:
            phi = gaussian_1d(axis, center=c, width=w)
            yield phi
            yield flip_1d(phi, ind)


def negativity_witness(chi1: ProjectorSpec, chi2: ProjectorSpec,
                       chip1: ProjectorSpec, chip2: ProjectorSpec) -> WitnessResult:
    """Search a deterministic Gaussian catalog for <P(1-P)> < 0.

    For factorized states the expectation equals -R1*R2, and sign-flipping
    either factor flips the sign of its R, so the search succeeds as soon as
    both axes yield a nonzero commutator expectation.  Returns the best
    candidate found (flagged) if strict negativity is not achieved.
    """
    _check_pair_axes(chi1, chi2, chip1, chip2)
    best: tuple[float, WaveFunction1D, float, WaveFunction1D, float] | None = None
    cands1 = [(phi, commutator_expectation(phi, chi1, chip1))
              for phi in _witness_catalog(chi1.axis, chi1)]
    cands2 = [(phi, commutator_expectation(phi, chi2, chip2))
              for phi in _witness_catalog(chi2.axis, chi2)]
    for phi1, r1 in cands1:
        for phi2, r2 in cands2:
            prod = r1 * r2
            if best is None or prod > best[0]:
                best = (prod, phi1, r1, phi2, r2)
    assert best is not None
    prod, phi1, r1, phi2, r2 = best
    psi = product_state(phi1, phi2)
    pattern = SignPattern(chi1.subset, chi2.subset, chip1.subset, chip2.subset)
    w = apply_bell_combination(psi, pattern)
    dv = psi.axes[0].step * psi.axes[1].step
    p_mean = np.sum(psi.values.conj() * w).real * dv
    p2_mean = np.sum(np.abs(w) ** 2) * dv
    value = float(p_mean - p2_mean)
    return WitnessResult(psi=psi, value=value, predicted=float(-prod),
                         r1=float(r1), r2=float(r2), achieved=value < 0.0)


# ---------------------------------------------------------------------------
# matrix-free application and spectra
# ---------------------------------------------------------------------------


def _mask_axis(values: np.ndarray, ind: np.ndarray, axis: int) -> np.ndarray:
    sh = [1, 1]
    sh[axis] = len(ind)
    return values * ind.reshape(sh)


def _momentum_project(values: np.ndarray, axes, ind: np.ndarray, axis: int) -> np.ndarray:
    f = Field2D(axes, values)
    g = to_momentum(f, axis)
    g = Field2D(g.axes, _mask_axis(g.values, ind, axis))
    return to_position(g, axis).values


def apply_bell_combination(psi: WaveFunction2D, pattern: SignPattern) -> np.ndarray:
    """Apply the projector combination to a state without building matrices."""
    axes = psi.axes
    v = psi.values
    iq1 = np.asarray(pattern.set_q1.indicator(axes[0].points), dtype=float)
    iq2 = np.asarray(pattern.set_q2.indicator(axes[1].points), dtype=float)
    ip1 = np.asarray(pattern.set_p1.indicator(dual_axis(axes[0]).points), dtype=float)
    ip2 = np.asarray(pattern.set_p2.indicator(dual_axis(axes[1]).points), dtype=float)
    out = _mask_axis(v, iq1, 0) + _mask_axis(v, iq2, 1)
    chip2_v = _momentum_project(v, axes, ip2, 1)
    out += _momentum_project(chip2_v, axes, ip1, 0)
    out -= _mask_axis(_mask_axis(v, iq1, 0), iq2, 1)
    out -= _mask_axis(chip2_v, iq1, 0)
    out -= _momentum_project(_mask_axis(v, iq2, 1), axes, ip1, 0)
    return out


def bell_combination_expectation(psi: WaveFunction2D, pattern: SignPattern) -> float:
    w = apply_bell_combination(psi, pattern)
    dv = psi.axes[0].step * psi.axes[1].step
    val = np.sum(psi.values.conj() * w) * dv
    return float(val.real)


def bell_combination_operator(axes: tuple[Axis, Axis], pattern: SignPattern) -> LinearOperator:
    """Matrix-free LinearOperator for large grids (uniform weights cancel)."""
    n1, n2 = axes[0].n, axes[1].n
    iq1 = np.asarray(pattern.set_q1.indicator(axes[0].points), dtype=float)
    iq2 = np.asarray(pattern.set_q2.indicator(axes[1].points), dtype=float)
    ip1 = np.asarray(pattern.set_p1.indicator(dual_axis(axes[0]).points), dtype=float)
    ip2 = np.asarray(pattern.set_p2.indicator(dual_axis(axes[1]).points), dtype=float)

    def matvec(vec):
        v = np.asarray(vec, dtype=complex).reshape(n1, n2)
        out = _mask_axis(v, iq1, 0) + _mask_axis(v, iq2, 1)
        chip2_v = _momentum_project(v, axes, ip2, 1)
        out += _momentum_project(chip2_v, axes, ip1, 0)
        out -= _mask_axis(_mask_axis(v, iq1, 0), iq2, 1)
        out -= _mask_axis(chip2_v, iq1, 0)
        out -= _momentum_project(_mask_axis(v, iq2, 1), axes, ip1, 0)
        return out.ravel()

    return LinearOperator((n1 * n2, n1 * n2), matvec=matvec, dtype=complex)


@dataclass(frozen=True)
class SpectrumResult:
    lambda_min: float
    lambda_max: float
    residual: float  # max ||P v - lambda v|| over the two extremal pairs
    method: str

    def to_json_dict(self) -> dict:
        return {
            "lambda_min": self.lambda_min,
            "lambda_max": self.lambda_max,
            "eigen_residual": self.residual,
            "method": self.method,
        }


def spectrum_bounds(op, dense_limit: int = 4096) -> SpectrumResult:
    """Extreme eigenvalues of a Hermitian operator.

    Dense matrices up to ``dense_limit`` get a full eigendecomposition;
    anything else goes through the iterative extremal solver.
    """
    if isinstance(op, np.ndarray):
        herm = float(np.abs(op - op.conj().T).max())
        if herm > 1e-10:
            raise ValueError(f"operator not Hermitian: residual {herm}")
        if op.shape[0] <= dense_limit:
            vals, vecs = np.linalg.eigh(op)
            resid = 0.0
            for idx in (0, -1):
                v = vecs[:, idx]
                resid = max(resid, float(np.abs(op @ v - vals[idx] * v).max()))
            return SpectrumResult(float(vals[0]), float(vals[-1]), resid, "dense")
        op = LinearOperator(op.shape, matvec=op.__matmul__, dtype=complex)
    lo_val, lo_vec = eigsh(op, k=1, which="SA")
    hi_val, hi_vec = eigsh(op, k=1, which="LA")
    resid = 0.0
    for val, vec in ((lo_val[0], lo_vec[:, 0]), (hi_val[0], hi_vec[:, 0])):
        resid = max(resid, float(np.abs(op @ vec - val * vec).max()))
    return SpectrumResult(float(lo_val[0]), float(hi_val[0]), resid, "iterative")
