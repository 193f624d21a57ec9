"""``tanlip`` command-line interface."""
from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import expr as E
from . import geometry as G
from . import lipschitz as L
from . import reports
from . import typeoracle as T
from .config import ConfigError, RunConfig
from .disc import DiscContext, DiscError, build_scurve, dyadic_grid, estimate_k0, r_of_t, s_of_t
from .registry import RegistryError, get_domain, load_registry

EXIT_PASS, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def parse_complex_list(text: str) -> list:
    """``"1,1j,0.5-2j"`` → list of complex; ``i`` is accepted for ``j``."""
    out = []
    for part in text.split(","):
        part = part.strip().replace("i", "j").replace(" ", "")
        if not part:
            raise UsageError(f"empty component in {text!r}")
        try:
            out.append(complex(part))
        except ValueError as exc:
            raise UsageError(f"cannot read {part!r} as a complex number") from exc
    return out


def _cvec(v) -> list:
    return [[float(x.real), float(x.imag)] for x in np.asarray(v, dtype=complex)]


# ------------------------------------------------------------- helpers

def _domain(args):
    return get_domain(args.domain, load_registry(args.registry))


def _point(args, dom):
    if getattr(args, "at", None):
        return G.as_point(parse_complex_list(args.at), dom.dimension)
    idx = getattr(args, "point", None) or 0
    if not 0 <= idx < len(dom.base_points):
        raise UsageError(f"--point {idx} out of range (domain has {len(dom.base_points)} base points)")
    return dom.base_points[idx]


def _context(args, dom, cfg):
    P = _point(args, dom)
    v = parse_complex_list(args.dir) if getattr(args, "dir", None) else None
    if v is not None and len(v) != dom.dimension:
        raise UsageError(f"--dir needs {dom.dimension} components")
    return DiscContext(dom, P=P, v=v, config=cfg.disc_config())


def _ctx_dict(ctx) -> dict:
    return {"P": _cvec(ctx.P), "v": _cvec(ctx.v), "nu": _cvec(ctx.nu), "t_max": ctx.t_max}


def _test_function(dom, alpha):
    return L.make_completion(dom, alpha)


def _config(args) -> RunConfig:
    overrides = {
        "seed": getattr(args, "seed", None),
        "M": getattr(args, "M", None),
        "levels": getattr(args, "levels", None),
        "fill": getattr(args, "fill", None),
        "n_samples": getattr(args, "samples", None),
        "n_dirs": getattr(args, "n_dirs", None),
        "n_configs": getattr(args, "configs", None),
        "hl_samples": getattr(args, "hl_samples", None),
        "delta0": getattr(args, "delta0", None),
    }
    return RunConfig.from_env(**overrides)


def _verdict(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


# ------------------------------------------------------- subcommands
# Each returns (report, csv_text or None, plot triple or None).

def cmd_eval(args, cfg):
    dom = _domain(args)
    r = E.parse(args.expr, dom.dimension) if args.expr else dom.expr
    z = _point(args, dom)
    val = E.evaluate(r, list(z))
    grad = G.dbar_gradient(r, z)
    row = {"point": _cvec(z), "value": [val.real, val.imag], "dbar_gradient": _cvec(grad),
           "real_gradient_norm": 2 * float(np.linalg.norm(grad))}
    return reports.make_report("eval", cfg.to_dict(), [row], "PASS", {"expr": E.unparse(r)}), None, None


def cmd_normal(args, cfg):
    dom = _domain(args)
    P = _point(args, dom)
    nu = G.outward_normal(dom.expr, P)
    row = {"point": _cvec(P), "normal": _cvec(nu)}
    return reports.make_report("normal", cfg.to_dict(), [row], "PASS"), None, None


def cmd_frame(args, cfg):
    dom = _domain(args)
    P = _point(args, dom)
    frame = G.tangent_frame(dom.expr, P)
    chart = G.normalize_chart(dom.expr, P)
    resid = max((G.tangency_residual(dom.expr, P, b) for b in frame.tangent_basis), default=0.0)
    row = {"frame": frame.to_dict(), "chart": chart.to_dict(), "tangency_residual": resid}
    return reports.make_report("frame", cfg.to_dict(), [row], _verdict(resid <= 1e-12)), None, None


def _t_grid(args, ctx):
    if args.t:
        return [float(x) for x in args.t.split(",")]
    return dyadic_grid(ctx, args.j_lo, args.j_hi)


def cmd_scurve(args, cfg):
    dom = _domain(args)
    ctx = _context(args, dom, cfg)
    grid = _t_grid(args, ctx)
    curve = build_scurve(ctx, grid, with_r=not args.no_r)
    s_vals = curve.s_values if args.form == "raw" else [s_of_t(ctx, t, "graph") for t in curve.t_grid]
    rows = [{"t": t, "S": s, "R": r} for t, s, r in zip(curve.t_grid, s_vals, curve.r_values)]
    csv = reports.dumps_csv(["t", "S", "R"], [[t, s, r] for t, s, r in zip(curve.t_grid, s_vals, curve.r_values)])
    consts = {"k0": curve.k0, "c_limit": curve.c_limit, "form": args.form, **_ctx_dict(ctx)}
    rep = reports.make_report("scurve", cfg.to_dict(), rows, _verdict(curve.k0 != "undetermined"), consts)
    return rep, csv, ("t", ["S", "R"], f"S and R on {dom.name}")


def cmd_rcurve(args, cfg):
    dom = _domain(args)
    ctx = _context(args, dom, cfg)
    grid = _t_grid(args, ctx)
    rows, ok = [], True
    for t in grid:
        a = r_of_t(ctx, t, "definition")
        b = r_of_t(ctx, t, "inverse")
        diff = abs(a.value - b.value)
        agree = diff <= 10 * ctx.tol_R(max(a.value, b.value))
        ok &= agree
        rows.append({"t": t, "R_definition": a.value, "R_inverse": b.value, "diff": diff,
                     "clamped": a.clamped, "agree": agree})
    csv = reports.dumps_csv(["t", "R_definition", "R_inverse", "diff"],
                            [[r["t"], r["R_definition"], r["R_inverse"], r["diff"]] for r in rows])
    rep = reports.make_report("rcurve", cfg.to_dict(), rows, _verdict(ok), _ctx_dict(ctx))
    return rep, csv, ("t", ["R_definition", "R_inverse"], f"R on {dom.name}")


def cmd_k0(args, cfg):
    dom = _domain(args)
    ctx = _context(args, dom, cfg)
    est = estimate_k0(ctx)
    row = est.to_dict()
    try:
        exact = T.line_type(dom.exact_poly, ctx.P, ctx.v)
        row["line_type"] = "inf" if math.isinf(exact) else int(exact)
        ok = est.determined and est.k0 == exact
    except (T.TypeOracleError, E.ExprError) as exc:
        row["line_type"] = None
        row["line_type_error"] = str(exc)
        ok = est.determined
    csv = reports.dumps_csv(["t", "S"], list(zip(est.t_grid, est.s_values)))
    rep = reports.make_report("k0", cfg.to_dict(), [row], _verdict(ok), _ctx_dict(ctx))
    return rep, csv, ("t", ["S"], f"S(t) on {dom.name}")


def cmd_type(args, cfg):
    dom = _domain(args)
    F = T.parse_curve(args.curve, dom.dimension)
    rep = T.compose_order(dom.exact_poly, F)
    row = {"curve": F.describe(), **rep.to_dict()}
    ok = (not rep.finite) or not dom.flags.get("pseudoconvex_asserted") or (
        rep.ord_rF % 2 == 0 and rep.leading_coefficient_sign == "positive")
    return reports.make_report("type", cfg.to_dict(), [row], _verdict(ok), {"ord": row["ord"]}), None, None


def cmd_sweep(args, cfg):
    dom = _domain(args)
    P = _point(args, dom)
    res = T.line_type_sweep(dom.exact_poly, P, cfg.n_dirs)
    key = lambda o: "inf" if math.isinf(o) else int(o)  # noqa: E731
    rows = [{"direction": _cvec([complex(x) for x in d]), "order": key(o)} for d, o in zip(res.directions, res.orders)]
    ok = all(math.isinf(o) or o % 2 == 0 for o in res.orders)
    return reports.make_report("sweep", cfg.to_dict(), rows, _verdict(ok), res.to_dict()), None, None


def cmd_parity(args, cfg):
    dom = _domain(args)
    P = T.rational_point(_point(args, dom))
    curves = [T.parse_curve(c, dom.dimension) for c in (args.curves or "").split("|") if c.strip()]
    if not curves:
        curves = [T.HoloCurve.line(P, v) for v in T.rational_tangent_basis(dom.exact_poly, P)]
    audit = T.parity_audit(dom.exact_poly, P, curves)
    rep = reports.make_report("parity", cfg.to_dict(), audit.entries, _verdict(audit.passed),
                              {"violations": len(audit.violations)})
    return rep, None, None


def cmd_deriv_audit(args, cfg):
    dom = _domain(args)
    f = _test_function(dom, args.alpha)
    audit = L.lemma_audit(f, dom, cfg.n_configs, cfg.seed, cfg.M)
    consts = {"worst_first_ratio": audit.worst_first, "worst_second_ratio": audit.worst_second,
              "worst_quadrature_rel_err": audit.worst_quadrature, "test_function": f.to_dict()}
    cols = ["delta", "first", "first_bound", "first_ratio", "quad_rel_err", "second", "second_bound", "second_ratio"]
    csv = reports.dumps_csv(cols, [[r[c] for c in cols] for r in audit.rows])
    return reports.make_report("deriv-audit", cfg.to_dict(), audit.rows, _verdict(audit.passed()), consts), csv, None


def cmd_hl_check(args, cfg):
    dom = _domain(args)
    f = _test_function(dom, args.alpha)
    hl = L.hl_growth_check(f, dom, None, cfg.hl_samples, cfg.seed)
    rows = [{"decade": d, "sup": s, "count": c} for d, s, c in zip(hl.decades, hl.sups, hl.counts)]
    consts = {"constant": hl.constant, "decade_ratio": hl.ratio, "test_function": f.to_dict()}
    csv = reports.dumps_csv(["decade_lo", "decade_hi", "sup", "count"],
                            [[d[0], d[1], s, c] for d, s, c in zip(hl.decades, hl.sups, hl.counts)])
    return reports.make_report("hl-check", cfg.to_dict(), rows, _verdict(hl.passed), consts), csv, None


def _gain(args, cfg):
    dom = _domain(args)
    ctx = _context(args, dom, cfg)
    f = _test_function(dom, args.alpha)
    rep = L.verify_main_theorem(f, ctx, args.alpha, cfg.levels, cfg.fill, cfg.n_samples, cfg.delta0)
    return dom, ctx, f, rep


def cmd_gain(args, cfg):
    dom, ctx, f, rep = _gain(args, cfg)
    consts = {"C": rep.constant, "band": rep.band, "k0": rep.k0, "alpha": rep.alpha,
              "test_function": f.to_dict(), **_ctx_dict(ctx)}
    out = reports.make_report("gain", cfg.to_dict(), rep.rows, rep.verdict, consts)
    return out, rep.to_csv(), ("delta", ["sup", "mean"], f"gain ratio on {dom.name}")


def cmd_box(args, cfg):
    dom, ctx, f, rep = _gain(args, cfg)
    rows, scaled = [], []
    for r in rep.rows:
        s = r["S_alpha"]
        terms = tuple(r[k] / s if s else 0.0 for k in ("I", "II", "III"))
        scaled.append(terms)
        rows.append({"delta": r["delta"], "I": r["I"], "II": r["II"], "III": r["III"], "total": r["total"],
                     "I_scaled": terms[0], "II_scaled": terms[1], "III_scaled": terms[2],
                     "triangle_ok": r["triangle_ok"]})
    bands = [L.band_ratio([t[i] for t in scaled]) for i in range(3)]
    ok = all(r["triangle_ok"] for r in rows) and all(b <= 10 for b in bands)
    consts = {"bands": {"I": bands[0], "II": bands[1], "III": bands[2]}, **_ctx_dict(ctx)}
    cols = ["delta", "I", "II", "III", "total", "I_scaled", "II_scaled", "III_scaled"]
    csv = reports.dumps_csv(cols, [[r[c] for c in cols] for r in rows])
    return reports.make_report("box", cfg.to_dict(), rows, _verdict(ok), consts), csv, None


def cmd_reproduce(args, cfg):
    if args.target != "s2":
        raise UsageError(f"unknown reproduction target {args.target!r}")
    from .reproduce import reproduce_s2

    outdir = Path(args.outdir)
    summary, ok = reproduce_s2(outdir, cfg)
    rep = reports.make_report("reproduce s2", cfg.to_dict(), summary, _verdict(ok), {"outdir": str(outdir)})
    reports.write_text(outdir / "summary.json", reports.dumps_json({**rep, "constants": {}}))
    cols = ["example", "domain", "quantity", "value", "expected", "verdict"]
    csv = reports.dumps_csv(cols, [[r[c] for c in cols] for r in summary])
    reports.write_text(outdir / "summary.csv", csv)
    return rep, None, None


COMMANDS = {
    "eval": cmd_eval, "normal": cmd_normal, "frame": cmd_frame, "scurve": cmd_scurve, "rcurve": cmd_rcurve,
    "k0": cmd_k0, "type": cmd_type, "sweep": cmd_sweep, "parity": cmd_parity, "deriv-audit": cmd_deriv_audit,
    "hl-check": cmd_hl_check, "gain": cmd_gain, "box": cmd_box, "reproduce": cmd_reproduce,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tanlip", description="Tangential Lipschitz gain on model domains.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")
    sub.required = True

    def add(name, help_, *, point=True, direction=False, out=True):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--domain", required=name != "reproduce", help="domain name")
        sp.add_argument("--registry", help="registry JSON with extra domains")
        sp.add_argument("--seed", type=int, help="RNG seed (TANLIP_SEED overrides)")
        sp.add_argument("--json", help="write the JSON report here instead of stdout")
        if point:
            g = sp.add_mutually_exclusive_group()
            g.add_argument("--point", type=int, help="base point index (default 0)")
            g.add_argument("--at", help="explicit point, comma-separated complex coordinates")
        if direction:
            sp.add_argument("--dir", help="complex tangent direction, e.g. 1,1,0")
        if out:
            sp.add_argument("--out", help="CSV artifact path")
            sp.add_argument("--plot", help="write a plot script for the CSV artifact")
        return sp

    sp = add("eval", "evaluate the defining function (or --expr) and its gradient", out=False)
    sp.add_argument("--expr", help="expression to evaluate instead of the defining function")
    add("normal", "outward unit normal", out=False)
    add("frame", "complex tangent frame and normalized chart", out=False)
    for name in ("scurve", "rcurve"):
        sp = add(name, f"{name[0].upper()}(t) on a dyadic grid", direction=True)
        sp.add_argument("--t", help="comma-separated t values (default: dyadic grid)")
        sp.add_argument("--j-lo", type=int, default=4)
        sp.add_argument("--j-hi", type=int, default=20)
        if name == "scurve":
            sp.add_argument("--form", choices=["raw", "graph"], default="raw")
            sp.add_argument("--no-r", action="store_true", help="skip the R column")
    add("k0", "numeric and exact contact order", direction=True)
    sp = add("type", "order of contact of a holomorphic curve", point=False, out=False)
    sp.add_argument("--curve", required=True, help='components separated by ";", e.g. "z^3; z^2; 0"')
    sp = add("sweep", "line-type sweep over tangent directions", out=False)
    sp.add_argument("--n-dirs", type=int)
    sp = add("parity", "parity audit of contact orders", out=False)
    sp.add_argument("--curves", help='curves separated by "|" (default: tangent axis lines)')
    sp = add("deriv-audit", "Cauchy derivative estimate audit", point=False)
    sp.add_argument("--alpha", type=float, default=0.1)
    sp.add_argument("--configs", type=int)
    sp.add_argument("--M", type=int)
    sp = add("hl-check", "derivative growth profile near the boundary", point=False)
    sp.add_argument("--alpha", type=float, default=0.1)
    sp.add_argument("--hl-samples", type=int)
    for name in ("gain", "box"):
        sp = add(name, "tangential gain sweep" if name == "gain" else "box decomposition at the gain argmax",
                 direction=True)
        sp.add_argument("--alpha", type=float, default=0.1)
        sp.add_argument("--levels", type=int)
        sp.add_argument("--delta0", type=float)
        sp.add_argument("--samples", type=int)
        sp.add_argument("--fill", type=float)
    sp = sub.add_parser("reproduce", help="end-to-end reproduction of the model examples")
    sp.add_argument("target", help="reproduction target (s2)")
    sp.add_argument("--outdir", default="tanlip-s2")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--json", help="write the JSON report here instead of stdout")
    return p


def run_command(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "plot", None) and not getattr(args, "out", None):
            raise UsageError("--plot requires --out")
        cfg = _config(args)
        report, csv, plot = COMMANDS[args.command](args, cfg)
        text = reports.dumps_json(report)
        if getattr(args, "json", None):
            reports.write_text(args.json, text)
        else:
            sys.stdout.write(text)
        if csv is not None and getattr(args, "out", None):
            reports.write_text(args.out, csv)
            if getattr(args, "plot", None) and plot is not None:
                rel = os.path.relpath(os.path.abspath(args.out), os.path.dirname(os.path.abspath(args.plot)))
                reports.write_text(args.plot, reports.plot_script(rel, *plot))
    except UsageError as exc:
        sys.stderr.write(f"tanlip: usage error: {exc}\n")
        return EXIT_ERROR
    except (ValueError, KeyError, ConfigError, RegistryError, DiscError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        sys.stderr.write(f"tanlip: error: {msg}\n")
        return EXIT_ERROR
    return EXIT_PASS if report["verdict"] == "PASS" else EXIT_FAIL


def main(argv=None):
    sys.exit(run_command(argv))
