"""End-to-end reproduction of the three model examples (quadratic bound, Herbort, D'Angelo)."""
from __future__ import annotations

import math
from pathlib import Path


from . import lipschitz as L
from . import reports
from . import typeoracle as T
from .disc import DiscContext, build_scurve, dyadic_grid, estimate_k0, quadratic_bound_profile, s_of_t
from .registry import builtin_domains


def herbort_closed_form(v, t):
    """``max_θ`` of ``|p(tv)|²`` summed, for ``p = (z1³, z1z2, z2³)``."""
    a, b = abs(v[0]), abs(v[1])
    return a**6 * t**6 + (a * b) ** 2 * t**4 + b**6 * t**6


HERBORT_DIRS = {"e1": (1, 0, 0), "e2": (0, 1, 0), "diag": (1, 1, 0)}


def _row(example, domain, quantity, value, expected, ok):
    return {"example": example, "domain": domain, "quantity": quantity, "value": value,
            "expected": expected, "verdict": "PASS" if ok else "FAIL"}


def reproduce_s2(outdir: Path, cfg) -> tuple:
    outdir = Path(outdir)
    doms = builtin_domains()
    dc = cfg.disc_config()
    rows = []

    # pseudoconvex: S(t) ≲ t² at a strongly pseudoconvex point
    ball = doms["ball"]
    ctx = DiscContext(ball, config=dc)
    prof = quadratic_bound_profile(ctx)
    rows.append(_row("pseudoconvex", "ball", "max S/t^2 (depth 16)", prof[-1], 1.0,
                     abs(prof[-1] - 1.0) < 1e-6 and prof[-1] <= prof[0] * (1 + 1e-9)))
    est = estimate_k0(ctx)
    rows.append(_row("pseudoconvex", "ball", "k0", int(est.k0), 2, est.k0 == 2))

    # Herbort: closed-form S and direction-dependent contact orders
    he = doms["herbort"]
    expected_k0 = {"e1": 6, "e2": 6, "diag": 4}
    for label, v in HERBORT_DIRS.items():
        ctx = DiscContext(he, v=v, config=dc)
        curve = build_scurve(ctx, dyadic_grid(ctx, 4, 20), with_r=True)
        reports.write_text(outdir / f"herbort_{label}_scurve.csv", curve.to_csv())
        err = max(abs(s - herbort_closed_form(ctx.v, t)) / herbort_closed_form(ctx.v, t)
                  for t, s in zip(curve.t_grid, curve.s_values))
        rows.append(_row("herbort", "herbort", f"S rel err {label}", err, 0.0, err <= 1e-6))
        exact = T.line_type(he.exact_poly, ctx.P, v)
        ok = curve.k0 == expected_k0[label] and exact == expected_k0[label]
        rows.append(_row("herbort", "herbort", f"k0 {label}", curve.k0, expected_k0[label], ok))
    reports.write_text(outdir / "plot_scurve.py",
                       reports.plot_script("herbort_diag_scurve.csv", "t", ["S", "R"], "Herbort S(t)"))
    ctx = DiscContext(he, v=HERBORT_DIRS["diag"], config=dc)
    f = L.make_conjugate_completion(he, None, 0.1)
    gain = L.verify_main_theorem(f, ctx, 0.1, cfg.levels, cfg.fill, cfg.n_samples, cfg.delta0)
    reports.write_text(outdir / "herbort_diag_gain.csv", gain.to_csv())
    reports.write_text(outdir / "plot_gain.py",
                       reports.plot_script("herbort_diag_gain.csv", "delta", ["sup", "mean"],
                                           "gain ratio"))
    rows.append(_row("herbort", "herbort", "gain band diag (alpha=0.1)", gain.band, "<= 10", gain.verdict == "PASS"))
    rows.append(_row("herbort", "herbort", "gain C diag (alpha=0.1)", gain.constant, "finite",
                     math.isfinite(gain.constant)))
    hl = L.hl_growth_check(f, he, None, cfg.hl_samples, cfg.seed)
    rows.append(_row("herbort", "herbort", "HL decade ratio", hl.ratio, "<= 4", hl.passed))

    # D'Angelo: a singular curve of infinite contact, finite line type
    da = doms["dangelo"]
    P = da.base_points[0]
    ctr = T.compose_order(da.exact_poly, T.parse_curve("z^3; z^2; 0", 3))
    rows.append(_row("dangelo", "dangelo", "ord(r o F) for F = (z^3; z^2; 0)", ctr.to_dict()["ord"], "inf",
                     not ctr.finite))
    sweep = T.line_type_sweep(da.exact_poly, P, cfg.n_dirs)
    rows.append(_row("dangelo", "dangelo", "max line type", int(sweep.max_order), 6, sweep.max_order == 6))
    curves = [T.HoloCurve.line(P, v) for v in T.rational_tangent_basis(da.exact_poly, P)]
    curves.append(T.parse_curve("z; z; 0", 3))
    audit = T.parity_audit(da.exact_poly, P, curves)
    rows.append(_row("dangelo", "dangelo", "parity violations", len(audit.violations), 0, audit.passed))
    # S along e1 is t^4 exactly
    ctx = DiscContext(da, v=(1, 0, 0), config=dc)
    s = s_of_t(ctx, 1e-2)
    rows.append(_row("dangelo", "dangelo", "S(1e-2)/1e-8 along e1", s / 1e-8, 1.0, abs(s / 1e-8 - 1) <= 1e-6))
    ok = all(r["verdict"] == "PASS" for r in rows)
    return rows, ok


__all__ = ["reproduce_s2", "herbort_closed_form"]
