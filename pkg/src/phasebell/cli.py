"""Command-line entry point: every headline claim as a named experiment.

Subcommands
-----------
classical-counterexample
    Two-atom marginal quartet with an aligned sign pattern: the functional
    reaches 4, twice the bound obeyed by genuine phase-space densities.
quantum-violation
    Large-cutoff sweep of the entangled sqrt-profile family (1D reduction),
    plus a grid-route cross-check at a moderate cutoff.
operator-checks
    Projector-algebra identities, the negativity witness, and spectral
    bounds of the projector combination.
three-marginal
    Chain-product particular solution, random perturbation families,
    admissible-weight intervals, and representation round-trips.
wigner
    Wigner transform marginal identities and negativity probes.
selftest
    Small fast battery across all of the above.

Every run writes a JSON report (validated against the shipped schema) and
exits 0 only if all checks pass.  ``--format csv`` additionally exports
tabular results.  The default output directory is taken from the
PHASEBELL_OUT environment variable when set.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import bell, marginals, operators, reports, states
from .grids import Axis, dual_axis, marginalize_4d

DEFAULT_ATOMS = (0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0)


def _axes(n: int, box: float) -> tuple[Axis, Axis]:
    ax = Axis(n, -box, box)
    return (ax, ax)


def _out_dir(args) -> Path:
    if args.out:
        return Path(args.out)
    return Path(os.environ.get("PHASEBELL_OUT", "."))


def _finish(report: reports.ExperimentReport, args) -> int:
    out = _out_dir(args)
    d = report.write(out / f"{report.command}.json")
    if args.format == "csv":
        reports.write_csv_tables(d, out)
    for line in report.summary_lines():
        print(line)
    print(f"report: {out / (report.command + '.json')}")
    return 0 if d["passed"] else 1


def _state_from_spec(args, axes) -> tuple[states.WaveFunction2D, float]:
    if args.state == "gaussian":
        return states.gaussian_state(axes), 0.0
    if args.state == "ho01":
        return states.oscillator_product(axes, 0, 1), 0.0
    if args.state == "random":
        return states.random_superposition(axes, seed=args.seed), 0.0
    if args.state in ("psi-plus", "psi-minus"):
        sign = +1 if args.state == "psi-plus" else -1
        return states.violating_state(axes, args.L, sign)
    raise ValueError(f"unknown state spec {args.state!r}")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_classical_counterexample(args) -> int:
    atoms = tuple(args.atoms)
    report = reports.ExperimentReport(
        "classical-counterexample",
        {"atoms": atoms, "misalign": args.misalign, "seed": args.seed},
    )
    quartet = bell.classical_counterexample_quartet(*atoms)
    pattern = bell.aligned_pattern(*atoms)
    if args.misalign != "none":
        pattern = pattern.complemented((args.misalign,))
    cons = marginals.check_consistency(quartet)
    report.results["consistency"] = cons.to_json_dict()
    report.check("marginals exactly consistent", cons.all_pass)
    rep = bell.bell_value(quartet, pattern)
    report.results["bell"] = rep.to_json_dict()
    if args.misalign == "none":
        report.check("S equals 4 exactly", rep.exact == 4, value=str(rep.exact))
        report.check("classical bound violated", rep.S > 2.0, value=rep.S, tolerance=2.0)
    else:
        report.check("|S| within trivial range", abs(rep.S) <= 4.0, value=rep.S)
    return _finish(report, args)


def cmd_quantum_violation(args) -> int:
    sign = +1 if args.sign == "+" else -1
    L_list = args.L or [1e2, 1e4, 1e6, 1e8]
    report = reports.ExperimentReport(
        "quantum-violation",
        {
            "L": list(L_list), "sign": args.sign, "grid_check_L": args.grid_check_L,
            "n": args.n, "box": args.box, "seed": args.seed,
        },
    )
    rows = []
    values = []
    for L in L_list:
        try:
            res = bell.asymptotic_bell_value(L, sign)
            rows.append({"L": L, "S": res.S, "overlap": res.overlap,
                         "abs_error": res.abs_error, "status": "ok"})
            values.append(res)
        except Exception as exc:  # quadrature failure: mark row, keep going
            rows.append({"L": L, "S": float("nan"), "overlap": float("nan"),
                         "abs_error": float("inf"), "status": f"error: {exc}"})
    report.tables["cutoff_sweep"] = rows
    svals = [r.S for r in values]
    increasing = all(b > a for a, b in zip(svals, svals[1:]))
    trend = "increasing" if sign > 0 else "decreasing"
    if sign < 0:
        increasing = all(b < a for a, b in zip(svals, svals[1:]))
    report.check(f"S strictly {trend} over the sweep", increasing and len(values) == len(L_list),
                 value=", ".join(f"{s:.5f}" for s in svals))
    good = [r for r in values if r.abs_error <= 1e-3]
    if good:
        largest = max(good, key=lambda r: r.L)
        report.check("bound violated at largest converged cutoff",
                     abs(largest.S) > 2.0, value=largest.S, tolerance=2.0,
                     detail=f"L={largest.L:g}, quadrature error {largest.abs_error:.2e}")
        report.results["limit_target"] = {"two_sqrt_two": 2.0 * math.sqrt(2.0),
                                          "gap_at_largest": 2.0 * math.sqrt(2.0) - abs(largest.S)}
    else:
        report.check("bound violated at largest converged cutoff", False,
                     detail="no cutoff converged below 1e-3")
    mirror = bell.asymptotic_bell_value(L_list[0], -sign)
    first = values[0].S if values else float("nan")
    report.check("opposite sign mirrors the value", abs(mirror.S + first) < 1e-12,
                 value=mirror.S)
    # grid-route cross-check at a moderate cutoff
    axes = _axes(args.n, args.box)
    psi, deficit = states.violating_state(axes, args.grid_check_L, sign)
    grid_rep = bell.quantum_bell_value(psi, bell.theta_pattern())
    oneD = bell.asymptotic_bell_value(args.grid_check_L, sign)
    agree = abs(grid_rep.S - oneD.S)
    report.results["grid_route"] = {
        "L": args.grid_check_L, "S_grid": grid_rep.S, "S_1d": oneD.S,
        "difference": agree, "state_norm_deficit": deficit,
        "operator_route_S": grid_rep.cross_check,
    }
    report.check("grid route agrees with 1D reduction", agree <= 1e-3,
                 value=agree, tolerance=1e-3, detail=f"L={args.grid_check_L}")
    report.check("marginal route agrees with operator route",
                 abs(grid_rep.S - grid_rep.cross_check) <= 1e-6,
                 value=abs(grid_rep.S - grid_rep.cross_check), tolerance=1e-6)
    return _finish(report, args)


def cmd_operator_checks(args) -> int:
    report = reports.ExperimentReport(
        "operator-checks",
        {"n": args.n, "box": args.box, "refinement": args.refinement, "seed": args.seed},
    )
    rows = []
    for n in args.refinement:
        axes = _axes(n, args.box)
        specs = operators.pattern_specs(axes, bell.theta_pattern())
        resid = operators.bell_square_residual(*specs)
        rows.append({"n": n, "square_identity_residual": resid})
        report.check(f"square identity residual at n={n}", resid <= 1e-10,
                     value=resid, tolerance=1e-10)
    report.tables["refinement"] = rows
    axes = _axes(args.n, args.box)
    # commuting (all-position) pattern: spectrum must collapse to {0, 1}
    pos_pattern = bell.theta_pattern()
    chi1, chi2, chip1, chip2 = operators.pattern_specs(axes, pos_pattern)
    chip1_pos = operators.ProjectorSpec(axes[0], "position", bell.HalfLine(0.25))
    chip2_pos = operators.ProjectorSpec(axes[1], "position", bell.HalfLine(0.25))
    A = operators.build_projector(chi1)
    B = operators.build_projector(chi2)
    Ap = operators.build_projector(chip1_pos)
    Bp = operators.build_projector(chip2_pos)
    n1, n2 = axes[0].n, axes[1].n
    I1, I2 = np.eye(n1), np.eye(n2)
    P_comm = (np.kron(A, I2) + np.kron(I1, B) + np.kron(Ap, Bp)
              - np.kron(A, B) - np.kron(A, Bp) - np.kron(Ap, B))
    vals = np.linalg.eigvalsh(P_comm)
    dist = float(np.minimum(np.abs(vals), np.abs(vals - 1.0)).max())
    report.check("all-position spectrum within {0,1}", dist <= 1e-10,
                 value=dist, tolerance=1e-10)
    # negativity witness and spectrum of the genuine mixed-representation case
    wit = operators.negativity_witness(chi1, chi2, chip1, chip2)
    report.results["witness"] = wit.to_json_dict()
    report.check("witness strictly negative", wit.value < 0.0, value=wit.value)
    report.check("witness equals -R1*R2", abs(wit.value - wit.predicted) <= 1e-10,
                 value=abs(wit.value - wit.predicted), tolerance=1e-10)
    P = operators.build_bell_combination(chi1, chi2, chip1, chip2)
    spec = operators.spectrum_bounds(P)
    report.results["spectrum"] = spec.to_json_dict()
    report.check("operator positivity fails (lambda_min < 0)", spec.lambda_min < 0.0,
                 value=spec.lambda_min)
    report.check("eigenpair residual small", spec.residual <= 1e-8,
                 value=spec.residual, tolerance=1e-8)
    return _finish(report, args)


def cmd_three_marginal(args) -> int:
    report = reports.ExperimentReport(
        "three-marginal",
        {
            "state": args.state, "L": args.L, "n": args.n, "box": args.box,
            "seed": args.seed, "families": args.families, "epsilon": args.epsilon,
            "drop_marginal": args.drop_marginal, "tamper": args.tamper,
        },
    )
    axes = _axes(args.n, args.box)
    psi, deficit = _state_from_spec(args, axes)
    report.results["state"] = {"label": psi.label, "norm_deficit": deficit}
    quartet = states.quantum_marginals(psi)
    if args.tamper:
        other = states.gaussian_state(axes, widths=(0.5, 2.0))
        wrong = states.quantum_marginals(other)
        quartet = states.MarginalQuartet(
            quartet.sigma_qq, quartet.sigma_qp, quartet.sigma_pq, wrong.sigma_pp,
            provenance="tampered",
        )
    cons = marginals.check_consistency(quartet)
    report.results["consistency"] = cons.to_json_dict()
    if not report.check("marginals consistent", cons.all_pass):
        print("consistency failed; aborting", file=sys.stderr)
        return _finish(report, args)
    triple, _ = marginals.triple_from_quartet(quartet, drop=args.drop_marginal)
    base = marginals.particular_density(triple, eps_rel=args.epsilon)
    resid = base.marginal_residuals()
    report.results["rho0"] = {"mass_deficit": base.mass_deficit, "marginal_residuals": resid}
    report.check("particular solution reproduces the chain",
                 max(resid.values()) <= 1e-5, value=max(resid.values()), tolerance=1e-5)
    rows = []
    worst = {"proj": 0.0, "scan": 0.0, "interior_min": 0.0, "boundary": 0.0,
             "forced_neg": -math.inf, "roundtrip": 0.0, "m_minus_excess": -math.inf}
    rng = np.random.default_rng(args.seed)
    d1, d2, d3, d4 = base.rho.steps
    rejected_all = True
    for k in range(args.families):
        F = marginals.random_seed_field(int(args.seed) + 7 * k + 1, base)
        delta = marginals.perturbation_from_seed(F, base)
        dv = delta.values
        proj = max(
            float(np.abs(dv.sum(axis=(2, 3)) * d3 * d4).sum() * d1 * d2),
            float(np.abs(dv.sum(axis=(0, 3)) * d1 * d4).sum() * d2 * d3),
            float(np.abs(dv.sum(axis=(0, 1)) * d1 * d2).sum() * d3 * d4),
        )
        mix = marginals.mixing_range(delta, base)
        ratio = np.zeros_like(dv)
        np.divide(dv, base.rho.values, out=ratio, where=base.support)
        scan_plus = float(ratio[base.support].max())
        scan_minus = float(-ratio[base.support].min())
        scan_err = max(abs(scan_plus - mix.m_plus), abs(scan_minus - mix.m_minus))
        lam = float(rng.uniform(mix.lo, mix.hi))
        interior = marginals.general_density(base, delta, lam)
        interior_min = float(interior.values.min())
        boundary = marginals.general_density(base, delta, mix.hi)
        boundary_min = float(boundary.values[base.support].min())
        try:
            marginals.general_density(base, delta, 1.1 * mix.hi)
            rejected_all = False
        except ValueError:
            pass
        forced = marginals.general_density(base, delta, 1.1 * mix.hi, force=True)
        forced_min = float(forced.values.min())
        fam = marginals.represent(boundary, triple, base)
        recon = fam.density(1.0)
        rt = float(np.abs(recon.values - boundary.values).max())
        worst["proj"] = max(worst["proj"], proj)
        worst["scan"] = max(worst["scan"], scan_err)
        worst["interior_min"] = min(worst["interior_min"], interior_min)
        worst["boundary"] = max(worst["boundary"], abs(boundary_min))
        worst["forced_neg"] = max(worst["forced_neg"], forced_min)
        worst["roundtrip"] = max(worst["roundtrip"], rt)
        worst["m_minus_excess"] = max(worst["m_minus_excess"], fam.rng.m_minus - 1.0)
        rows.append({"family": k, "delta_projection_L1": proj, "m_plus": mix.m_plus,
                     "m_minus": mix.m_minus, "lambda": lam, "interior_min": interior_min,
                     "roundtrip_max_err": rt})
    report.tables["families"] = rows
    report.check("perturbations leave all three marginals fixed",
                 worst["proj"] <= 1e-9, value=worst["proj"], tolerance=1e-9)
    report.check("interval endpoints match exhaustive scan",
                 worst["scan"] <= 1e-12, value=worst["scan"], tolerance=1e-12)
    report.check("interior weights keep the density nonnegative",
                 worst["interior_min"] >= -1e-12, value=worst["interior_min"], tolerance=-1e-12)
    report.check("boundary weight drives the minimum to zero",
                 worst["boundary"] <= 1e-9, value=worst["boundary"], tolerance=1e-9)
    report.check("weights outside the interval are rejected", rejected_all)
    report.check("overshooting the interval goes negative",
                 worst["forced_neg"] < 0.0, value=worst["forced_neg"])
    report.check("representation round-trip recovers the solution",
                 worst["roundtrip"] <= 1e-8, value=worst["roundtrip"], tolerance=1e-8)
    report.check("represented seeds have m_minus <= 1",
                 worst["m_minus_excess"] <= 1e-9, value=worst["m_minus_excess"], tolerance=1e-9)
    return _finish(report, args)


def cmd_wigner(args) -> int:
    report = reports.ExperimentReport(
        "wigner", {"state": args.state, "L": args.L, "n": args.n, "box": args.box,
                   "seed": args.seed},
    )
    axes = _axes(args.n, args.box)
    psi, _ = _state_from_spec(args, axes)
    W = states.wigner_function(psi)
    quartet = states.quantum_marginals(psi)
    resid = {k: integrate_2d_abs_diff(marginalize_4d(W, k), quartet.member(k))
             for k in ("qq", "qp", "pq", "pp")}
    report.results["marginal_residuals"] = resid
    report.check("position marginal reproduced", resid["qq"] <= 1e-6,
                 value=resid["qq"], tolerance=1e-6)
    report.check("momentum marginal reproduced", resid["pp"] <= 1e-6,
                 value=resid["pp"], tolerance=1e-6)
    report.check("mixed marginals reproduced", max(resid["qp"], resid["pq"]) <= 1e-6,
                 value=max(resid["qp"], resid["pq"]), tolerance=1e-6)
    wmin = float(W.values.min())
    report.results["min_value"] = wmin
    if args.state == "gaussian":
        report.check("gaussian transform nonnegative", wmin >= -1e-10,
                     value=wmin, tolerance=-1e-10)
    if args.state == "ho01":
        origin = states.wigner_value(psi, 0.0, 0.0, 0.0, 0.0)
        target = -1.0 / math.pi**2
        report.results["origin_value"] = origin
        report.check("negative at the origin", wmin < 0.0 and origin < 0.0, value=origin)
        report.check("origin value within 2%", abs(origin - target) <= 0.02 * abs(target),
                     value=origin, tolerance=0.02 * abs(target),
                     detail=f"target {target:.6f}")
    return _finish(report, args)


def integrate_2d_abs_diff(a, b) -> float:
    s1, s2 = a.steps
    return float(np.abs(a.values - b.values).sum() * s1 * s2)


def cmd_selftest(args) -> int:
    report = reports.ExperimentReport("selftest", {"seed": args.seed})
    # classical violation, exact
    quartet = bell.classical_counterexample_quartet(*DEFAULT_ATOMS)
    rep = bell.bell_value(quartet, bell.aligned_pattern(*DEFAULT_ATOMS))
    report.check("classical S = 4", rep.exact == 4, value=str(rep.exact))
    # boolean bridge, exhaustive
    ok = True
    for bits in range(16):
        c = [(bits >> i) & 1 for i in range(4)]
        P = bell.indicator_polynomial(*c)
        signs = [2 * x - 1 for x in c]
        rstu = signs[0] * signs[1] + signs[0] * signs[3] + signs[2] * signs[1] - signs[2] * signs[3]
        ok &= P in (0, 1) and rstu == 2 - 4 * P
    report.check("boolean bridge over all 16 cases", ok)
    # transform round trip
    ax = Axis(64, -10.0, 10.0)
    g = states.gaussian_1d(ax)
    from .grids import Field1D, to_momentum, to_position

    back = to_position(to_momentum(Field1D(ax, g.values)))
    report.check("transform round trip", float(np.abs(back.values - g.values).max()) < 1e-12,
                 value=float(np.abs(back.values - g.values).max()), tolerance=1e-12)
    # bell bound on a random density
    rng = np.random.default_rng(args.seed)
    axes = _axes(16, 8.0)
    from .grids import Field4D, integrate_4d

    vals = rng.random((16, 16, 16, 16))
    rho = Field4D((axes[0], axes[1], dual_axis(axes[0]), dual_axis(axes[1])), vals)
    rho = Field4D(rho.axes, vals / integrate_4d(rho))
    q = states.MarginalQuartet(
        marginalize_4d(rho, "qq"), marginalize_4d(rho, "qp"),
        marginalize_4d(rho, "pq"), marginalize_4d(rho, "pp"), provenance="random",
    )
    S = bell.bell_value(q, bell.theta_pattern((0.1, -0.2, 0.3, -0.4))).S
    report.check("bound holds for a genuine density", abs(S) <= 2.0 + 1e-9, value=S)
    # operator identity at n=16
    specs = operators.pattern_specs(_axes(16, 8.0), bell.theta_pattern())
    resid = operators.bell_square_residual(*specs)
    report.check("square identity at n=16", resid <= 1e-10, value=resid, tolerance=1e-10)
    # asymptotic trend, coarse
    s1 = bell.asymptotic_bell_value(1e2).S
    s2 = bell.asymptotic_bell_value(1e4).S
    report.check("asymptotic value increases", s2 > s1, value=f"{s1:.4f} -> {s2:.4f}")
    return _finish(report, args)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, n: int, box: float) -> None:
    p.add_argument("--n", type=int, default=n, help="grid points per axis (power of two)")
    p.add_argument("--box", type=float, default=box, help="half-width of the box per axis")
    p.add_argument("--seed", type=int, default=7, help="random seed")
    p.add_argument("--out", type=str, default=None, help="output directory")
    p.add_argument("--format", choices=("json", "csv"), default="json",
                   help="csv additionally exports tables")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="phasebell", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("classical-counterexample", help="two-atom quartet with S = 4")
    p.add_argument("--atoms", type=float, nargs=8, default=list(DEFAULT_ATOMS),
                   metavar=("A1", "A2", "A1P", "A2P", "B1", "B2", "B1P", "B2P"))
    p.add_argument("--misalign", choices=("none", "q1", "q2", "p1", "p2"), default="none",
                   help="complement the pattern on one axis before evaluating")
    _add_common(p, n=16, box=8.0)
    p.set_defaults(func=cmd_classical_counterexample)

    p = sub.add_parser("quantum-violation", help="cutoff sweep toward 2*sqrt(2)")
    p.add_argument("--L", type=float, action="append", default=None,
                   help="cutoff (repeatable; default 1e2 1e4 1e6 1e8)")
    p.add_argument("--sign", choices=("+", "-"), default="+")
    p.add_argument("--grid-check-L", type=float, default=2.0, dest="grid_check_L",
                   help="cutoff for the 2D grid cross-check")
    _add_common(p, n=1024, box=32.0)
    p.set_defaults(func=cmd_quantum_violation)

    p = sub.add_parser("operator-checks", help="projector algebra and spectra")
    p.add_argument("--refinement", type=int, nargs="+", default=[16, 32])
    _add_common(p, n=32, box=10.0)
    p.set_defaults(func=cmd_operator_checks)

    p = sub.add_parser("three-marginal", help="chain solver and solution family")
    p.add_argument("--state", choices=("gaussian", "random", "psi-plus", "ho01"),
                   default="gaussian")
    p.add_argument("--L", type=float, default=10.0, help="cutoff for psi-plus")
    p.add_argument("--families", type=int, default=20, help="random seed fields per state")
    p.add_argument("--epsilon", type=float, default=marginals.DEFAULT_SUPPORT_EPS,
                   help="relative support threshold")
    p.add_argument("--drop-marginal", choices=("qq", "qp", "pq", "pp"), default="qp",
                   dest="drop_marginal")
    p.add_argument("--tamper", action="store_true",
                   help="replace one marginal with a mismatched state (must abort)")
    _add_common(p, n=16, box=8.0)
    p.set_defaults(func=cmd_three_marginal)

    p = sub.add_parser("wigner", help="Wigner transform checks")
    p.add_argument("--state", choices=("gaussian", "ho01", "psi-plus", "random"),
                   default="gaussian")
    p.add_argument("--L", type=float, default=3.0, help="cutoff for psi-plus")
    _add_common(p, n=32, box=8.0)
    p.set_defaults(func=cmd_wigner)

    p = sub.add_parser("selftest", help="fast battery across all modules")
    _add_common(p, n=16, box=8.0)
    p.set_defaults(func=cmd_selftest)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
