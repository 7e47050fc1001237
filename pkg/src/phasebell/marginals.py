"""Consistency checking and the complete solution family of the three-marginal problem.

Given three consistent two-variable densities forming a chain
(sigma_qq(q1,q2), sigma_pq(p1,q2), sigma_pp(p1,p2)), a particular
nonnegative 4D density reproducing all three is the chain product

    rho0 = sigma_qq * sigma_pq * sigma_pp / (sigma_q * sigma_p)

on the support set E where all three densities are nonzero (and zero
elsewhere).  Every other nonnegative solution is rho0 + lambda * Delta,
where Delta is generated from an arbitrary seed field F supported in E
through a projection that cancels all three marginals, and lambda ranges
over the exact interval fixed by the extreme ratios Delta/rho0 over E.
This module implements the construction, the admissible-lambda interval,
the representation of arbitrary solutions (seed F = rho1 recovers any given
solution at lambda = 1), and deterministic random seed fields.

By symmetry the same machinery covers any of the four chains obtained by
dropping one member of a marginal quartet; adapters relabel axes to the
canonical chain and back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .grids import (
    AtomicDistribution2D,
    Axis,
    Field1D,
    Field2D,
    Field4D,
    integrate_2d,
    integrate_4d,
    save_field,
)
from .states import MarginalQuartet

__all__ = [
    "MarginalTriple",
    "triple_from_quartet",
    "quartet_chain_layouts",
    "ConsistencyReport",
    "check_consistency",
    "one_variable_marginals",
    "ChainBase",
    "particular_density",
    "perturbation_from_seed",
    "MixingRange",
    "mixing_range",
    "general_density",
    "SolutionFamily",
    "represent",
    "random_seed_field",
    "save_solution_family",
]

DEFAULT_SUPPORT_EPS = 1e-12  # column liveness, relative to each 1D denominator's peak
MASS_DEFICIT_LIMIT = 1e-8


@dataclass(frozen=True)
class MarginalTriple:
    """Chain of three two-variable densities sharing one variable pairwise.

    Canonical variable names follow the (q1,q2)/(p1,q2)/(p1,p2) chain; the
    adapters in :func:`triple_from_quartet` map the other three drop choices
    onto this layout.
    """

    sigma_qq: Field2D  # (v1, v2)
    sigma_pq: Field2D  # (v3, v2)
    sigma_pp: Field2D  # (v3, v4)
    labels: tuple[str, str, str, str] = ("q1", "q2", "p1", "p2")

    def __post_init__(self) -> None:
        if not self.sigma_qq.axes[1].same_grid(self.sigma_pq.axes[1]):
            raise ValueError("first and second members must share their second axis")
        if not self.sigma_pq.axes[0].same_grid(self.sigma_pp.axes[0]):
            raise ValueError("second and third members must share their first axis")

    @property
    def axes(self) -> tuple[Axis, Axis, Axis, Axis]:
        return (
            self.sigma_qq.axes[0],
            self.sigma_qq.axes[1],
            self.sigma_pp.axes[0],
            self.sigma_pp.axes[1],
        )

    def items(self):
        return (("qq", self.sigma_qq), ("pq", self.sigma_pq), ("pp", self.sigma_pp))


def quartet_chain_layouts() -> dict[str, tuple[tuple[str, str, str], tuple[int, int, int, int]]]:
    """For each dropped marginal: the chain members and the axis permutation
    taking the chain's (v1,v2,v3,v4) order back to (q1,q2,p1,p2)."""
    return {
        "qp": (("qq", "pq", "pp"), (0, 1, 2, 3)),
        "pq": (("qq", "qp", "pp"), (1, 0, 3, 2)),
        "qq": (("qp", "pp", "pq"), (0, 3, 2, 1)),
        "pp": (("pq", "qq", "qp"), (2, 1, 0, 3)),
    }


def _transposed(f: Field2D) -> Field2D:
    return Field2D((f.axes[1], f.axes[0]), f.values.T.copy())


def triple_from_quartet(quartet: MarginalQuartet, drop: str = "qp") -> tuple[MarginalTriple, tuple[int, int, int, int]]:
    """Select three members of a quartet as a canonical chain.

    Returns the triple plus the permutation that rearranges a solution's
    chain-ordered axes into (q1, q2, p1, p2).
    """
    layouts = quartet_chain_layouts()
    if drop not in layouts:
        raise ValueError(f"drop must be one of {sorted(layouts)}")
    (k1, k2, k3), perm = layouts[drop]
    members = dict(quartet.items())
    for k in (k1, k2, k3):
        if not isinstance(members[k], Field2D):
            raise ValueError("the chain solver works on grid marginals only")
    var = {"qq": ("q1", "q2"), "qp": ("q1", "p2"), "pq": ("p1", "q2"), "pp": ("p1", "p2")}
    first, second, third = members[k1], members[k2], members[k3]
    v_first, v_second, v_third = var[k1], var[k2], var[k3]
    # orient each member so adjacent members share the chain variable
    shared12 = set(v_first) & set(v_second)
    if v_first[1] not in shared12:
        first, v_first = _transposed(first), v_first[::-1]
    if v_second[1] not in shared12:
        second, v_second = _transposed(second), v_second[::-1]
    shared23 = set(v_second) & set(v_third)
    if v_third[0] not in shared23:
        third, v_third = _transposed(third), v_third[::-1]
    labels = (v_first[0], v_first[1], v_third[0], v_third[1])
    return MarginalTriple(first, second, third, labels), perm


# ---------------------------------------------------------------------------
# consistency
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConsistencyReport:
    entries: tuple[dict, ...]
    all_pass: bool

    def to_json_dict(self) -> dict:
        return {"all_pass": self.all_pass, "entries": list(self.entries)}


def _grid_one_var(sigma: Field2D, keep: int) -> np.ndarray:
    other = 1 - keep
    vals = sigma.values.sum(axis=other) * sigma.axes[other].step
    return vals


def _entry(name: str, residual: float, tol: float, note: str = "") -> dict:
    return {"check": name, "residual": residual, "tolerance": tol,
            "passed": bool(residual <= tol), "note": note}


def _compare_pair(name, sig_a, keep_a, sig_b, keep_b, tol, entries):
    """One-variable marginal comparison between two quartet members."""
    if isinstance(sig_a, AtomicDistribution2D) and isinstance(sig_b, AtomicDistribution2D):
        ma, mb = sig_a.marginal(keep_a), sig_b.marginal(keep_b)
        resid = 0.0 if ma == mb else 1.0
        entries.append(_entry(name, resid, 0.0, "exact atomic comparison"))
    elif isinstance(sig_a, Field2D) and isinstance(sig_b, Field2D):
        va, vb = _grid_one_var(sig_a, keep_a), _grid_one_var(sig_b, keep_b)
        step = sig_a.axes[keep_a].step
        resid = float(np.abs(va - vb).sum() * step)
        entries.append(_entry(name, resid, tol, "L1 norm"))
    else:
        entries.append(_entry(name, math.nan, tol, "skipped: mixed atomic/grid pair"))


def check_consistency(marginals, tol: float = 1e-8) -> ConsistencyReport:
    """Nonnegativity, normalization, and pairwise one-variable consistency.

    Accepts a quartet or a triple.  Failures are report entries, never
    exceptions.
    """
    entries: list[dict] = []
    for key, sigma in marginals.items():
        if isinstance(sigma, AtomicDistribution2D):
            entries.append(_entry(f"{key}:normalization", 0.0, tol, "exact"))
        else:
            neg = float(max(0.0, -sigma.values.min()))
            entries.append(_entry(f"{key}:nonnegativity", neg, tol))
            entries.append(_entry(f"{key}:normalization", abs(1.0 - integrate_2d(sigma)), tol))
    members = dict(marginals.items())
    if isinstance(marginals, MarginalQuartet):
        pairs = [
            ("q1: qq vs qp", "qq", 0, "qp", 0),
            ("q2: qq vs pq", "qq", 1, "pq", 1),
            ("p2: qp vs pp", "qp", 1, "pp", 1),
            ("p1: pq vs pp", "pq", 0, "pp", 0),
        ]
    else:
        pairs = [
            ("shared-2: first vs second", "qq", 1, "pq", 1),
            ("shared-3: second vs third", "pq", 0, "pp", 0),
        ]
    for name, ka, ia, kb, ib in pairs:
        _compare_pair(name, members[ka], ia, members[kb], ib, tol, entries)
    ok = all(e["passed"] for e in entries if not math.isnan(e["residual"]))
    return ConsistencyReport(tuple(entries), ok)


def one_variable_marginals(triple: MarginalTriple, tol: float = 1e-8) -> tuple[Field1D, Field1D]:
    """The shared-variable 1D marginals (sigma_q, sigma_p) of the chain.

    Each is computed from both parents; the two routes must agree within
    ``tol`` and their average is returned.
    """
    q_a = _grid_one_var(triple.sigma_qq, 1)
    q_b = _grid_one_var(triple.sigma_pq, 1)
    p_a = _grid_one_var(triple.sigma_pq, 0)
    p_b = _grid_one_var(triple.sigma_pp, 0)
    ax_q = triple.sigma_qq.axes[1]
    ax_p = triple.sigma_pp.axes[0]
    dq = float(np.abs(q_a - q_b).sum() * ax_q.step)
    dp = float(np.abs(p_a - p_b).sum() * ax_p.step)
    if dq > tol or dp > tol:
        raise ValueError(f"inconsistent chain: one-variable residuals {dq:.3e}, {dp:.3e}")
    return Field1D(ax_q, 0.5 * (q_a + q_b)), Field1D(ax_p, 0.5 * (p_a + p_b))


# ---------------------------------------------------------------------------
# the particular solution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChainBase:
    """Particular solution with the support set and chain data it was built from."""

    rho: Field4D
    support: np.ndarray  # boolean, same shape as rho
    triple: MarginalTriple
    sigma_q: Field1D
    sigma_p: Field1D
    eps: tuple[float, float]  # absolute liveness thresholds on (sigma_q, sigma_p)
    mass_deficit: float

    def marginal_residuals(self) -> dict[str, float]:
        """L1 distance of the three reconstructed chain marginals."""
        out = {}
        vals = self.rho.values
        steps = self.rho.steps
        recon = {
            "qq": vals.sum(axis=(2, 3)) * steps[2] * steps[3],
            "pq": vals.sum(axis=(0, 3)).T * steps[0] * steps[3],
            "pp": vals.sum(axis=(0, 1)) * steps[0] * steps[1],
        }
        cell = {"qq": steps[0] * steps[1], "pq": steps[2] * steps[1], "pp": steps[2] * steps[3]}
        for key, sigma in self.triple.items():
            out[key] = float(np.abs(recon[key] - sigma.values).sum() * cell[key])
        return out


def _divide_where(num: np.ndarray, den: np.ndarray, mask: np.ndarray) -> np.ndarray:
    out = np.zeros_like(num, dtype=float)
    np.divide(num, den, out=out, where=mask)
    return out


def particular_density(triple: MarginalTriple, eps_rel: float = DEFAULT_SUPPORT_EPS,
                       deficit_limit: float = MASS_DEFICIT_LIMIT) -> ChainBase:
    """Chain-product particular solution of the three-marginal constraints.

    The support set keeps cells where all three marginals are strictly
    positive (which discards no mass) and where both shared-variable
    denominators exceed a relative liveness threshold (which discards only
    rounding-level mass; the deficit is measured and gates the build).  The
    chain product is evaluated through conditional densities, which are
    bounded by 1/step, so exponentially small denominators never amplify
    noise.
    """
    sigma_q, sigma_p = one_variable_marginals(triple)
    s_qq, s_pq, s_pp = triple.sigma_qq.values, triple.sigma_pq.values, triple.sigma_pp.values
    eps_q = eps_rel * float(sigma_q.values.max())
    eps_p = eps_rel * float(sigma_p.values.max())
    live_q = sigma_q.values > eps_q
    live_p = sigma_p.values > eps_p
    # conditionals sigma_pq(.|v2) and sigma_pp(.|v3); zero on dead columns
    cond_pq = _divide_where(s_pq, sigma_q.values[None, :], live_q[None, :] & (s_pq > 0))
    cond_pp = _divide_where(s_pp, sigma_p.values[:, None], live_p[:, None] & (s_pp > 0))
    # support over (v1, v2, v3, v4); sigma_pq is indexed (v3, v2)
    support = (
        ((s_qq > 0) & live_q[None, :])[:, :, None, None]
        & ((s_pq > 0) & live_p[:, None]).T[None, :, :, None]
        & (s_pp > 0)[None, None, :, :]
    )
    vals = (
        s_qq[:, :, None, None]
        * cond_pq.T[None, :, :, None]
        * cond_pp[None, None, :, :]
    )
    vals = np.where(support, vals, 0.0)
    rho = Field4D(triple.axes, vals)
    deficit = abs(1.0 - integrate_4d(rho))
    if deficit > deficit_limit:
        raise ValueError(
            f"support thresholding discarded too much mass: deficit {deficit:.3e} "
            f"exceeds {deficit_limit:.1e}"
        )
    return ChainBase(rho=rho, support=support, triple=triple, sigma_q=sigma_q,
                     sigma_p=sigma_p, eps=(eps_q, eps_p), mass_deficit=deficit)


# ---------------------------------------------------------------------------
# the perturbation family
# ---------------------------------------------------------------------------


def perturbation_from_seed(seed_field: Field4D, base: ChainBase) -> Field4D:
    """Marginal-free perturbation direction generated by an arbitrary seed.

    The seed must vanish outside the support set.  The returned field has
    all three chain marginals and its total integral equal to zero: the
    subtracted counterterms cancel bracketwise under each projection.  Each
    counterterm is computed with the particular solution's matching
    marginal factor cancelled algebraically, so only the bounded
    conditional densities and the seed's own marginals enter, and the
    cancellation survives discretization at rounding level.
    """
    F = seed_field.values
    if np.any((F != 0.0) & ~base.support):
        raise ValueError("seed field has support outside the admissible set")
    d1, d2, d3, d4 = base.rho.steps
    triple = base.triple
    sq, sp = base.sigma_q.values, base.sigma_p.values
    s_qq, s_pq, s_pp = triple.sigma_qq.values, triple.sigma_pq.values, triple.sigma_pp.values
    live_q = sq > base.eps[0]
    live_p = sp > base.eps[1]
    m_qq = F.sum(axis=(2, 3)) * d3 * d4               # (v1, v2)
    m_pq = F.sum(axis=(0, 3)).T * d1 * d4             # (v3, v2)
    m_pp = F.sum(axis=(0, 1)) * d1 * d2               # (v3, v4)
    m_q = F.sum(axis=(0, 2, 3)) * d1 * d3 * d4        # (v2,)
    m_p = F.sum(axis=(0, 1, 3)) * d1 * d2 * d4        # (v3,)
    # bounded conditionals (each <= 1/step of the summed variable)
    cond_qq = _divide_where(s_qq, sq[None, :], live_q[None, :] & (s_qq > 0))      # (v1,v2)
    cond_pq_q = _divide_where(s_pq, sq[None, :], live_q[None, :] & (s_pq > 0))    # (v3,v2)
    cond_pq_p = _divide_where(s_pq, sp[:, None], live_p[:, None] & (s_pq > 0))    # (v3,v2)
    cond_pp = _divide_where(s_pp, sp[:, None], live_p[:, None] & (s_pp > 0))      # (v3,v4)
    # rho0 * M_qq / sigma_qq and partners, with the common factor cancelled
    t_qq = (m_qq[:, :, None, None]
            * cond_pq_q.T[None, :, :, None] * cond_pp[None, None, :, :])
    t_pq = (cond_qq[:, :, None, None]
            * m_pq.T[None, :, :, None] * cond_pp[None, None, :, :])
    t_pp = (cond_qq[:, :, None, None]
            * cond_pq_p.T[None, :, :, None] * m_pp[None, None, :, :])
    t_q = (cond_qq[:, :, None, None]
           * (cond_pq_q * m_q[None, :]).T[None, :, :, None] * cond_pp[None, None, :, :])
    t_p = (cond_qq[:, :, None, None]
           * cond_pq_p.T[None, :, :, None] * (cond_pp * m_p[:, None])[None, None, :, :])
    delta = F - (t_qq + t_pq + t_pp - t_q - t_p)
    return Field4D(base.rho.axes, np.where(base.support, delta, 0.0))


@dataclass(frozen=True)
class MixingRange:
    """Admissible interval for the mixing weight of one perturbation."""

    m_plus: float   # sup of Delta/rho0 over the support
    m_minus: float  # -inf of Delta/rho0 over the support
    degenerate: bool = False

    @property
    def lo(self) -> float:
        if self.degenerate:
            return -math.inf
        return -1.0 / self.m_plus if self.m_plus > 0 else (0.0 if math.isinf(self.m_plus) else -math.inf)

    @property
    def hi(self) -> float:
        if self.degenerate:
            return math.inf
        return 1.0 / self.m_minus if self.m_minus > 0 else (0.0 if math.isinf(self.m_minus) else math.inf)

    def contains(self, lam: float, slack: float = 1e-9) -> bool:
        if self.degenerate:
            return True
        # slack scales down with narrow intervals so that overshooting a
        # nearly-degenerate interval is still rejected
        width = self.hi - self.lo
        s = slack * min(1.0, width)
        return self.lo - s <= lam <= self.hi + s

    def to_json_dict(self) -> dict:
        return {"m_plus": self.m_plus, "m_minus": self.m_minus,
                "lambda_lo": self.lo, "lambda_hi": self.hi,
                "degenerate": self.degenerate}


def mixing_range(delta: Field4D, base: ChainBase, zero_tol: float = 0.0) -> MixingRange:
    """Extreme ratios of the perturbation against the particular solution.

    Both extremes are strictly positive whenever the perturbation is not
    identically zero, because its total integral vanishes.  An identically
    zero perturbation yields the full line, flagged degenerate.  The
    discrete sup/inf runs over the support cells (grid semantics: the
    continuum extremes may exceed these).
    """
    mask = base.support & (base.rho.values > 0)
    if not np.any(np.abs(delta.values[mask]) > zero_tol):
        return MixingRange(math.inf, math.inf, degenerate=True)
    ratio = _divide_where(delta.values, base.rho.values, mask)
    vals = ratio[mask]
    return MixingRange(float(vals.max()), float(-vals.min()))


def general_density(base: ChainBase, delta: Field4D, lam: float,
                    force: bool = False) -> Field4D:
    """rho0 + lambda * Delta; rejects weights outside the admissible interval."""
    rng = mixing_range(delta, base)
    if not rng.contains(lam) and not force:
        raise ValueError(
            f"lambda={lam} outside admissible interval [{rng.lo}, {rng.hi}]"
        )
    return Field4D(base.rho.axes, base.rho.values + lam * delta.values)


@dataclass(frozen=True)
class SolutionFamily:
    """(rho0, Delta, m+, m-) packaging of the general chain solution."""

    base: ChainBase
    delta: Field4D
    rng: MixingRange
    seed_provenance: str = "seed"

    def density(self, lam: float) -> Field4D:
        return general_density(self.base, self.delta, lam)


def represent(rho1: Field4D, triple: MarginalTriple, base: ChainBase | None = None,
              marginal_tol: float = 1e-6) -> SolutionFamily:
    """Exhibit a given nonnegative solution as a member of the family.

    Feeding the solution itself in as seed makes the perturbation exactly
    rho1 - rho0, with m- <= 1 so that weight 1 is admissible and returns
    rho1.  Preconditions: rho1 is nonnegative, reproduces the chain
    marginals, and is supported in the support set.
    """
    if base is None:
        base = particular_density(triple)
    if rho1.values.min() < -1e-12:
        raise ValueError("candidate solution must be nonnegative")
    off_mass = float(np.where(base.support, 0.0, rho1.values).sum()) * rho1.cell_volume
    if off_mass > MASS_DEFICIT_LIMIT:
        raise ValueError(
            f"candidate carries mass {off_mass:.3e} outside the admissible set"
        )
    steps = rho1.steps
    recon = {
        "qq": rho1.values.sum(axis=(2, 3)) * steps[2] * steps[3],
        "pq": rho1.values.sum(axis=(0, 3)).T * steps[0] * steps[3],
        "pp": rho1.values.sum(axis=(0, 1)) * steps[0] * steps[1],
    }
    cell = {"qq": steps[0] * steps[1], "pq": steps[2] * steps[1], "pp": steps[2] * steps[3]}
    for key, sigma in triple.items():
        resid = float(np.abs(recon[key] - sigma.values).sum() * cell[key])
        if resid > marginal_tol:
            raise ValueError(f"candidate does not reproduce marginal {key}: L1 {resid:.3e}")
    seed = Field4D(rho1.axes, np.where(base.support, rho1.values, 0.0))
    delta = perturbation_from_seed(seed, base)
    rng = mixing_range(delta, base)
    return SolutionFamily(base=base, delta=delta, rng=rng, seed_provenance="represented-solution")


def random_seed_field(seed: int, base: ChainBase, correlation_length: float = 1.5,
                      core_rel: float = 1e-6) -> Field4D:
    """Deterministic nonnegative random field supported in the support set.

    Uniform noise smoothed by a separable Gaussian kernel of the given
    correlation length (in grid cells), masked to the cells where the
    particular solution carries at least ``core_rel`` of its peak, and
    normalized to unit mass.  Restricting to that core keeps the resulting
    admissible-weight interval away from the degenerate near-infinite-ratio
    regime that seeds on exponentially negligible cells would produce
    (arbitrary admissible seeds are still accepted by
    :func:`perturbation_from_seed`).
    """
    rng = np.random.default_rng(seed)
    shape = base.rho.values.shape
    noise = rng.random(shape)
    smooth = ndimage.gaussian_filter(noise, sigma=correlation_length, mode="constant")
    core = base.support & (base.rho.values > core_rel * base.rho.values.max())
    vals = np.where(core, np.maximum(smooth, 0.0), 0.0)
    total = vals.sum() * base.rho.cell_volume
    if total > 0:
        vals = vals / total
    return Field4D(base.rho.axes, vals)


def save_solution_family(family: SolutionFamily, directory: str | Path) -> Path:
    """Serialize rho0 and Delta plus a JSON manifest; returns the manifest path."""
    import json

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_field(family.base.rho, directory / "rho0")
    save_field(family.delta, directory / "delta")
    manifest = {
        "eps": list(family.base.eps),
        "mass_deficit": family.base.mass_deficit,
        "mixing": family.rng.to_json_dict(),
        "seed_provenance": family.seed_provenance,
        "marginal_residuals": family.base.marginal_residuals(),
        "labels": list(family.base.triple.labels),
    }
    path = directory / "family.json"
    path.write_text(json.dumps(manifest, indent=1))
    return path
