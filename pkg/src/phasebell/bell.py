"""Sign patterns, the Bell functional, and its classical and quantum behavior.

A sign pattern is a choice of four measurable sets, one per variable
(q1, q2, p1, p2).  Their indicator functions chi define four +/-1 valued
sign functions

    r(q1,q2) = s1(q1) s2(q2),   s(q1,p2) = s1(q1) s2'(p2),
    t(p1,q2) = s1'(p1) s2(q2),  u(p1,p2) = -s1'(p1) s2'(p2),

with s = 2*chi - 1, so that r + s + t + u = +/-2 at every phase-space point.
Weighting the four marginals of any nonnegative normalized phase-space
density by r, s, t, u therefore yields |S| <= 2.  This module evaluates S
for grid and atomic marginal quartets (exactly, in rational arithmetic, for
the atomic case), constructs the two-atom quartet that violates the bound
classically with S = 4, and evaluates the quantum value for the entangled
sqrt-profile states, including the semi-analytic large-cutoff route that
approaches 2*sqrt(2).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.integrate import quad

from .grids import Axis, AtomicDistribution2D, Field2D
from .states import MarginalQuartet, WaveFunction2D, quantum_marginals

__all__ = [
    "HalfLine",
    "IntervalUnion",
    "MaskSet",
    "SignPattern",
    "theta_pattern",
    "BellReport",
    "bell_functions",
    "indicator_polynomial",
    "classical_p_value",
    "bell_value",
    "classical_counterexample_quartet",
    "aligned_pattern",
    "quantum_bell_value",
    "asymptotic_bell_value",
    "AsymptoticBellValue",
    "momentum_cross_overlap",
]

_THRESHOLD_GAP = 1e-9  # thresholds must stay this far from samples and atoms


class HalfLine:
    """The set {x > c} (or {x < c} when ``greater`` is False)."""

    def __init__(self, threshold: float, greater: bool = True):
        self.threshold = float(threshold)
        self.greater = bool(greater)

    def indicator(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        self._check_clearance(x)
        inside = x > self.threshold if self.greater else x < self.threshold
        return inside.astype(np.int8)

    def _check_clearance(self, x: np.ndarray) -> None:
        if np.any(np.abs(x - self.threshold) < _THRESHOLD_GAP):
            raise ValueError(
                f"threshold {self.threshold} coincides with an evaluation point; "
                "move it off the grid/atom locations"
            )

    def complement(self) -> "HalfLine":
        return HalfLine(self.threshold, not self.greater)

    def validate_on(self, axis: Axis) -> None:
        if not (axis.x_min < self.threshold < axis.x_max):
            raise ValueError("half-line threshold must cut the working axis")
        self._check_clearance(axis.points)

    def describe(self) -> dict:
        op = ">" if self.greater else "<"
        return {"kind": "halfline", "set": f"x {op} {self.threshold}"}


class IntervalUnion:
    """A finite union of closed intervals; endpoints must avoid samples."""

    def __init__(self, intervals):
        ivs = sorted((float(a), float(b)) for a, b in intervals)
        if not ivs or any(a >= b for a, b in ivs):
            raise ValueError("intervals must be nonempty with lo < hi")
        for (a1, b1), (a2, b2) in zip(ivs, ivs[1:]):
            if a2 <= b1:
                raise ValueError("intervals must be disjoint")
        self.intervals = tuple(ivs)

    def indicator(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        for a, b in self.intervals:
            if np.any(np.abs(x - a) < _THRESHOLD_GAP) or np.any(np.abs(x - b) < _THRESHOLD_GAP):
                raise ValueError("interval endpoint coincides with an evaluation point")
        out = np.zeros(x.shape, dtype=np.int8)
        for a, b in self.intervals:
            out |= ((x > a) & (x < b)).astype(np.int8)
        return out

    def validate_on(self, axis: Axis) -> None:
        ind = self.indicator(axis.points)
        if ind.all() or not ind.any():
            raise ValueError("set must be proper on the working axis")

    def describe(self) -> dict:
        return {"kind": "intervals", "set": list(self.intervals)}


class MaskSet:
    """Explicit boolean mask bound to one axis."""

    def __init__(self, axis: Axis, mask):
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (axis.n,):
            raise ValueError("mask length must equal axis size")
        self.axis = axis
        self.mask = mask

    def indicator(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape == (self.axis.n,) and np.allclose(x, self.axis.points):
            return self.mask.astype(np.int8)
        raise ValueError("mask sets evaluate only on their own axis points")

    def complement(self) -> "MaskSet":
        return MaskSet(self.axis, ~self.mask)

    def validate_on(self, axis: Axis) -> None:
        if not axis.same_grid(self.axis):
            raise ValueError("mask bound to a different axis")
        if self.mask.all() or not self.mask.any():
            raise ValueError("set must be proper on the working axis")

    def describe(self) -> dict:
        return {"kind": "mask", "set": "".join("1" if b else "0" for b in self.mask)}


def _complement(s):
    if hasattr(s, "complement"):
        return s.complement()
    raise ValueError(f"cannot complement {type(s).__name__}")


@dataclass(frozen=True)
class SignPattern:
    """Four indicator sets, one per variable (q1, q2, p1, p2)."""

    set_q1: object
    set_q2: object
    set_p1: object
    set_p2: object

    def items(self):
        return (
            ("q1", self.set_q1),
            ("q2", self.set_q2),
            ("p1", self.set_p1),
            ("p2", self.set_p2),
        )

    def complemented(self, which=("q1", "q2", "p1", "p2")) -> "SignPattern":
        sets = {k: s for k, s in self.items()}
        for k in which:
            sets[k] = _complement(sets[k])
        return SignPattern(sets["q1"], sets["q2"], sets["p1"], sets["p2"])

    def describe(self) -> dict:
        return {k: s.describe() for k, s in self.items()}


def theta_pattern(thresholds=(0.0, 0.0, 0.0, 0.0)) -> SignPattern:
    """Half-line pattern {x > c} on every variable (default thresholds 0)."""
    return SignPattern(*(HalfLine(c) for c in thresholds))


def _sign_of(s, x) -> np.ndarray:
    return 2.0 * s.indicator(x) - 1.0


def bell_functions(pattern: SignPattern):
    """The four +/-1 valued functions (r, s, t, u); u carries the minus sign."""

    def r(q1, q2):
        return _sign_of(pattern.set_q1, q1) * _sign_of(pattern.set_q2, q2)

    def s(q1, p2):
        return _sign_of(pattern.set_q1, q1) * _sign_of(pattern.set_p2, p2)

    def t(p1, q2):
        return _sign_of(pattern.set_p1, p1) * _sign_of(pattern.set_q2, q2)

    def u(p1, p2):
        return -_sign_of(pattern.set_p1, p1) * _sign_of(pattern.set_p2, p2)

    return r, s, t, u


def indicator_polynomial(c1: int, c2: int, cp1: int, cp2: int) -> int:
    """c1 + c2 + cp1*cp2 - c1*c2 - c1*cp2 - cp1*c2 for indicator bits.

    Takes only the values 0 and 1 over all sixteen bit assignments, and
    satisfies r + s + t + u = 2 - 4*P pointwise.
    """
    return c1 + c2 + cp1 * cp2 - c1 * c2 - c1 * cp2 - cp1 * c2


def classical_p_value(pattern: SignPattern, point) -> int:
    """Evaluate the indicator polynomial at one phase-space point."""
    q1, q2, p1, p2 = point
    bits = (
        int(pattern.set_q1.indicator(q1)),
        int(pattern.set_q2.indicator(q2)),
        int(pattern.set_p1.indicator(p1)),
        int(pattern.set_p2.indicator(p2)),
    )
    return indicator_polynomial(*bits)


# ---------------------------------------------------------------------------
# the Bell functional
# ---------------------------------------------------------------------------

# variable pair entering each marginal, and the sign of the term
_TERM_SETS = {
    "qq": ("set_q1", "set_q2", +1),
    "qp": ("set_q1", "set_p2", +1),
    "pq": ("set_p1", "set_q2", +1),
    "pp": ("set_p1", "set_p2", -1),
}


@dataclass(frozen=True)
class BellReport:
    """Value and per-term breakdown of the Bell functional."""

    S: float
    terms: dict
    pattern: dict
    provenance: str
    exact: Fraction | None = None
    cross_check: float | None = None

    def to_json_dict(self) -> dict:
        d = {
            "S": self.S,
            "terms": self.terms,
            "pattern": self.pattern,
            "provenance": self.provenance,
        }
        if self.exact is not None:
            d["S_exact"] = str(self.exact)
        if self.cross_check is not None:
            d["operator_route_S"] = self.cross_check
            d["route_disagreement"] = abs(self.S - self.cross_check)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=1)


def _grid_term(sigma: Field2D, set_a, set_b, sign: int) -> float:
    set_a.validate_on(sigma.axes[0])
    set_b.validate_on(sigma.axes[1])
    sa = _sign_of(set_a, sigma.axes[0].points)
    sb = _sign_of(set_b, sigma.axes[1].points)
    s1, s2 = sigma.steps
    return float(sign * np.sum(np.outer(sa, sb) * sigma.values) * s1 * s2)


def _atomic_term(sigma: AtomicDistribution2D, set_a, set_b, sign: int) -> Fraction:
    total = Fraction(0)
    for (x, y), w in sigma.atoms:
        sa = 2 * int(set_a.indicator(x)) - 1
        sb = 2 * int(set_b.indicator(y)) - 1
        total += w * sa * sb
    return sign * total


def bell_value(quartet: MarginalQuartet, pattern: SignPattern) -> BellReport:
    """Evaluate S = <r> + <s> + <t> + <u> over a marginal quartet.

    Grid members are integrated by midpoint quadrature; atomic members are
    summed exactly in rational arithmetic.  When all four members are atomic
    the report also carries the exact rational value.
    """
    terms: dict[str, float] = {}
    exact_terms: dict[str, Fraction] = {}
    for key, sigma in quartet.items():
        name_a, name_b, sign = _TERM_SETS[key]
        set_a, set_b = getattr(pattern, name_a), getattr(pattern, name_b)
        if isinstance(sigma, AtomicDistribution2D):
            ex = _atomic_term(sigma, set_a, set_b, sign)
            exact_terms[key] = ex
            terms[key] = float(ex)
        elif isinstance(sigma, Field2D):
            terms[key] = _grid_term(sigma, set_a, set_b, sign)
        else:
            raise ValueError(f"unsupported marginal type {type(sigma).__name__}")
    S = sum(terms.values())
    exact = sum(exact_terms.values()) if len(exact_terms) == 4 else None
    return BellReport(S=S, terms=terms, pattern=pattern.describe(),
                      provenance=quartet.provenance, exact=exact)


# ---------------------------------------------------------------------------
# classical counterexample: the two-atom quartet with S = 4
# ---------------------------------------------------------------------------


def classical_counterexample_quartet(
    a1: float, a2: float, ap1: float, ap2: float,
    b1: float, b2: float, bp1: float, bp2: float,
) -> MarginalQuartet:
    """Two-atom marginal quartet that no nonnegative density reproduces.

    Each marginal puts weight 1/2 on two points; the momentum-momentum
    member pairs the primed momentum of one axis with the unprimed momentum
    of the other, which is what drives the functional to 4 under an aligned
    pattern.  Mutual consistency of the four members holds exactly.
    """
    for u, v, name in ((a1, ap1, "a1"), (a2, ap2, "a2"), (b1, bp1, "b1"), (b2, bp2, "b2")):
        if u == v:
            raise ValueError(f"primed and unprimed {name} must differ")
    half = Fraction(1, 2)
    return MarginalQuartet(
        sigma_qq=AtomicDistribution2D((((a1, a2), half), ((ap1, ap2), half))),
        sigma_qp=AtomicDistribution2D((((a1, b2), half), ((ap1, bp2), half))),
        sigma_pq=AtomicDistribution2D((((b1, a2), half), ((bp1, ap2), half))),
        sigma_pp=AtomicDistribution2D((((b1, bp2), half), ((bp1, b2), half))),
        provenance="classical-constructed",
    )


def aligned_pattern(a1, a2, ap1, ap2, b1, b2, bp1, bp2) -> SignPattern:
    """Half-line pattern positive on the unprimed atoms, negative on primed."""

    def cut(u, v):
        return HalfLine(0.5 * (u + v), greater=u > v)

    return SignPattern(cut(a1, ap1), cut(a2, ap2), cut(b1, bp1), cut(b2, bp2))


# ---------------------------------------------------------------------------
# quantum values
# ---------------------------------------------------------------------------


def quantum_bell_value(psi: WaveFunction2D, pattern: SignPattern,
                       cross_check: bool = True) -> BellReport:
    """Bell functional of the quantum marginals of a pure state.

    Optionally cross-checks the marginal route against 2 - 4<P> where P is
    the projector combination applied matrix-free; the two routes are the
    same discrete object, so they must agree to rounding.
    """
    report = bell_value(quantum_marginals(psi), pattern)
    if cross_check:
        from .operators import bell_combination_expectation

        s_op = 2.0 - 4.0 * bell_combination_expectation(psi, pattern)
        report = BellReport(S=report.S, terms=report.terms, pattern=report.pattern,
                            provenance=report.provenance, exact=report.exact,
                            cross_check=float(s_op))
    return report


# ---------------------------------------------------------------------------
# large-cutoff value of the sqrt-profile family
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AsymptoticBellValue:
    S: float
    overlap: float
    abs_error: float  # propagated quadrature error estimate on S
    L: float
    sign: int


def _momentum_kernel_primitive(x: float, M: float) -> float:
    # int_1^M dy / (x^2 + y^2 - 2), branch split at x = sqrt(2)
    d = x * x - 2.0
    if d > 1e-14:
        c = np.sqrt(d)
        return float((np.arctan(M / c) - np.arctan(1.0 / c)) / c)
    if d < -1e-14:
        c = np.sqrt(-d)
        return float(0.5 / c * np.log(((M - c) * (1.0 + c)) / ((M + c) * (1.0 - c))))
    return 1.0 - 1.0 / M


def momentum_cross_overlap(L: float) -> tuple[float, float]:
    """The overlap J with <a| theta(p) |b> = -i J for the sqrt-profile pair.

    The momentum half-line projector acts on the even/odd pair (a, b)
    through the principal-value kernel 1/(q - q'); by parity the
    same-parity matrix elements are exactly 1/2 and the cross element
    reduces to the smooth double integral

        J = (2 pi)^-1 * iint_[0,L]^2 h(u) h(v) / (u + v) du dv,

    which the substitution x = sqrt(u+1) turns into a single well-behaved
    1D integral.  No oscillatory quadrature is involved, so cutoffs up to
    1e9 and beyond are cheap.  Returns (J, quadrature error estimate).
    """
    if L <= 1.0:
        raise ValueError("cutoff must exceed 1")
    M = float(np.sqrt(L + 1.0))
    val, err = quad(
        _momentum_kernel_primitive, 1.0, M, args=(M,),
        points=[np.sqrt(2.0)], limit=400, epsabs=1e-12, epsrel=1e-12,
    )
    pref = 2.0 / (np.pi * np.log(L + 1.0))
    return pref * val, pref * err


def asymptotic_bell_value(L: float, sign: int = +1) -> AsymptoticBellValue:
    """Bell functional of the sqrt-profile state via its 1D reduction.

    In the even/odd decomposition the expectation of the projector
    combination needs only five 1D overlaps.  The position-side ones and
    the same-parity momentum ones are exactly 1/2; the remaining
    momentum-side cross overlap J gives

        S = sign * ( sqrt(2)/2 + 2*sqrt(2) * J * (1 + J) ),

    which tends to sign * 2*sqrt(2) as J -> 1/2 for L -> infinity.  No 2D
    or 4D grids are involved.
    """
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    J, jerr = momentum_cross_overlap(L)
    S = np.sqrt(2.0) / 2.0 + 2.0 * np.sqrt(2.0) * J * (1.0 + J)
    dS = 2.0 * np.sqrt(2.0) * (1.0 + 2.0 * J) * jerr
    return AsymptoticBellValue(S=float(sign * S), overlap=float(J),
                               abs_error=float(dS), L=float(L), sign=sign)
