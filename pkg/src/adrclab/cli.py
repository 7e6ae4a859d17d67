"""Command-line surface: design, tf, check-equivalence, bode, margins,
simulate, sweep, advise.

Exit codes: 0 success, 1 property violated (equivalence check failed or every
sweep/simulate item failed), 2 usage/validation error.  All file outputs are
written atomically (temp file + rename) into --out, the ADRC_LAB_OUT
environment variable, or the current directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import replace

import numpy as np

from .design import DesignParams, make_variant, synthesize
from .loopan import (DEFAULT_BAND, DEFAULT_POINTS, PLANTS, PlantModel,
                     bode, build_loopset, margins, write_bode_csv)
from .ratpoly import RationalTf
from .sim import Scenario, simulate, sweep
from .sim.scenario import preset_scenarios
from .tfsynth import (check_equivalence, realizability_report, synth_tfset,
                      verify_closed_forms)

# design presets for the tabulated first/second-order closed forms
TF_PRESETS = {
    "table2": dict(n=1, b0=1.0, wcl=3.0, keso=8.0),
    "table3": dict(n=2, b0=1.0, wcl=3.0, keso=8.0),
}

# loop-analysis presets: comparative error frequency responses on the
# first-order dead-time plant and the second-order plant
LOOP_PRESETS = {
    "fig4a": (dict(n=1, b0=1.0, wcl=3.0, keso=8.0), "P1"),
    "fig4b": (dict(n=2, b0=1.0, wcl=3.0, keso=8.0), "P2"),
}


class UsageError(Exception):
    pass


def _out_dir(args) -> str:
    out = args.out or os.environ.get("ADRC_LAB_OUT") or "."
    os.makedirs(out, exist_ok=True)
    return out


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".adrclab-")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and obj != obj:
        return None  # NaN is not valid JSON
    return obj


def _write_json(path: str, payload: dict, config: dict) -> None:
    payload = dict(payload)
    payload["config"] = _jsonable(config)
    _atomic_write(path, json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def _design_config(args) -> dict:
    return {"n": args.n, "b0": args.b0, "wcl": args.wcl, "keso": args.keso}


def _make_params(args) -> DesignParams:
    try:
        return DesignParams(n=args.n, b0=args.b0, omega_cl=args.wcl, k_eso=args.keso)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _plant(args) -> PlantModel:
    if args.plant in PLANTS:
        return PLANTS[args.plant]
    if args.plant == "custom":
        if not args.num or not args.den:
            raise UsageError("custom plant requires --num and --den")
        num = [float(x) for x in args.num.split(",")]
        den = [float(x) for x in args.den.split(",")]
        return PlantModel(RationalTf.from_coeffs(num, den, delay=args.delay),
                          "custom")
    raise UsageError(f"unknown plant {args.plant!r}")


def _add_design_flags(p, preset_default=None):
    p.add_argument("--n", type=int, default=None, help="plant order (1..5)")
    p.add_argument("--b0", type=float, default=None, help="plant gain estimate")
    p.add_argument("--wcl", type=float, default=None,
                   help="closed-loop bandwidth [rad/s]")
    p.add_argument("--keso", type=float, default=None,
                   help="observer/controller bandwidth ratio (> 1)")


def _require_design(args):
    for name in ("n", "b0", "wcl", "keso"):
        if getattr(args, name) is None:
            raise UsageError(f"--{name} is required (or use a preset)")


def cmd_design(args) -> int:
    _require_design(args)
    p = _make_params(args)
    d = synthesize(p)
    print("controller gains k:", list(d.k))
    print("observer gains l:  ", list(d.l))
    print("closed-loop matrix A_CL:")
    for row in d.a_cl:
        print("  ", " ".join(f"{v: .6g}" for v in row))
    out = _out_dir(args)
    _write_json(os.path.join(out, "design.json"),
                {"k": list(d.k), "l": list(d.l), "a_cl": d.a_cl},
                _design_config(args))
    return 0


def _apply_tf_preset(args):
    if args.preset:
        if args.preset not in TF_PRESETS:
            raise UsageError(f"unknown preset {args.preset!r} "
                             f"(expected one of {sorted(TF_PRESETS)})")
        for key, val in TF_PRESETS[args.preset].items():
            if getattr(args, key) is None:
                setattr(args, key, val)


def cmd_tf(args) -> int:
    _apply_tf_preset(args)
    _require_design(args)
    p = _make_params(args)
    d = synthesize(p)
    try:
        variant = make_variant(d, args.case)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    tfset = synth_tfset(d, variant)
    out = _out_dir(args)
    cfg = {**_design_config(args), "case": args.case}
    for name, g in (("g_fb", tfset.g_fb), ("g_pf_bar", tfset.g_pf_bar),
                    ("g_ff", tfset.g_ff), ("g_pf_mod", tfset.g_pf_mod)):
        _write_json(os.path.join(out, f"{name}.json"), g.to_dict(), cfg)
    _write_json(os.path.join(out, "g_r.json"),
                {"coeffs": list(tfset.g_r.coeffs)}, cfg)

    report = realizability_report(tfset)
    lines = [f"order n = {report['order']}"]
    for name, entry in report["tfs"].items():
        note = f"  [{entry['note']}]" if "note" in entry else ""
        lines.append(f"{name}: degrees {entry['degrees']}, "
                     f"{entry['properness']}"
                     f"{' (not realizable)' if not entry['realizable'] else ''}"
                     f"{note}")
    lines.append("feedback path free integrator: "
                 f"{report['feedback_has_free_integrator']}")
    lines.append("modular structure:")
    for mod, desc in report["modules"].items():
        lines.append(f"  {mod}: {desc}")
    if p.n in (1, 2):
        chk = verify_closed_forms(d)
        lines.append("closed-form cross-check: "
                     f"derived-form deviation {chk['num_and_derived_den_deviation']:.3e}"
                     f" (match: {chk['matches_derived_form']})")
        if not chk["printed_den_consistent"]:
            lines.append("closed-form cross-check: printed denominator variant "
                         "does NOT match the derived one")
            lines.append("  " + chk.get("note", ""))
    text = "\n".join(lines) + "\n"
    _atomic_write(os.path.join(out, "report.txt"), text)
    print(text, end="")
    return 0


def cmd_check_equivalence(args) -> int:
    _require_design(args)
    p = _make_params(args)
    d = synthesize(p)
    if args.perturb_l != 1.0:
        # test hook: scale l without rebuilding A_CL, so the two derivation
        # paths disagree and the check must fail
        d = replace(d, l=tuple(g * args.perturb_l for g in d.l))
    res = check_equivalence(d)
    print(f"coefficientwise deviation: {res['coeff_deviation']:.3e}")
    print(f"grid deviation:            {res['grid_deviation']:.3e} "
          f"(worst at omega = {res['grid_worst_omega']:.6g} rad/s)")
    if res["equivalent"]:
        print("equivalence holds (threshold 1e-9)")
        return 0
    print("EQUIVALENCE VIOLATED")
    return 1


_TF_CHOICES = {
    "ol": "g_ol", "yd": "g_yd", "un": "g_un",
    "er-oA": "g_er_o_case_a", "er-oB": "g_er_o_case_b", "er-e": "g_er_e",
}


def _loopset(args):
    if getattr(args, "preset", None):
        if args.preset not in LOOP_PRESETS:
            raise UsageError(f"unknown preset {args.preset!r} "
                             f"(expected one of {sorted(LOOP_PRESETS)})")
        design, plant = LOOP_PRESETS[args.preset]
        for key, val in design.items():
            if getattr(args, key) is None:
                setattr(args, key, val)
        if args.plant is None:
            args.plant = plant
    if args.plant is None:
        args.plant = "P2"
    _require_design(args)
    p = _make_params(args)
    d = synthesize(p)
    tfset = synth_tfset(d)
    return build_loopset(tfset, d, _plant(args))


def cmd_bode(args) -> int:
    ls = _loopset(args)
    ev = getattr(ls, _TF_CHOICES[args.tf])
    grid = np.logspace(np.log10(args.wmin), np.log10(args.wmax), args.points)
    data = bode(ev, grid)
    out = _out_dir(args)
    path = os.path.join(out, f"bode_{args.tf}.csv")
    tmp = path + ".tmp"
    write_bode_csv(tmp, data)
    os.replace(tmp, path)
    print(f"wrote {path} ({args.points} rows)")
    return 0


def cmd_margins(args) -> int:
    ls = _loopset(args)
    m = margins(ls.g_ol, band=(args.wmin, args.wmax), points=args.points)
    out = _out_dir(args)
    # config deliberately omits any scheme notion: margins depend on the open
    # loop only and are identical for the output- and error-based schemes.
    cfg = {**_design_config(args), "plant": args.plant,
           "band": [args.wmin, args.wmax], "points": args.points}
    _write_json(os.path.join(out, "margins.json"), m.to_dict(), cfg)
    for key, val in m.to_dict().items():
        print(f"{key}: {val}")
    return 0


def _parse_values(spec: str) -> list[float]:
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise UsageError("--values range must be start:stop:count")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        return list(np.linspace(start, stop, count))
    return [float(x) for x in spec.split(",")]


def _scenario_from_args(args) -> Scenario:
    presets = preset_scenarios()
    if args.preset:
        if args.preset not in presets:
            raise UsageError(f"unknown preset {args.preset!r} "
                             f"(expected one of {sorted(presets)})")
        sc = presets[args.preset]
    else:
        _require_design(args)
        sc = Scenario(plant=_plant(args), params=_make_params(args))
    overrides = {}
    if args.tend is not None:
        overrides["t_end"] = args.tend
    if args.dt is not None:
        overrides["dt"] = args.dt
    try:
        return replace(sc, **overrides) if overrides else sc
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _split_scheme(label: str) -> tuple[str, str]:
    if label == "eadrc":
        return "eadrc", "A"
    if label.startswith("oadrc-"):
        return "oadrc", label.split("-", 1)[1]
    raise UsageError(f"unknown scheme {label!r} (use eadrc or oadrc-<case>)")


def cmd_simulate(args) -> int:
    sc = _scenario_from_args(args)
    if args.schemes:
        labels = args.schemes.split(",")
    elif args.preset == "fig10":
        labels = ["oadrc-A", "oadrc-A1", "oadrc-A2", "oadrc-B"]
    else:
        labels = ["oadrc-A", "oadrc-B", "eadrc"]
    out = _out_dir(args)
    all_metrics = {}
    n_ok = 0
    for label in labels:
        scheme, case = _split_scheme(label)
        trace = simulate(sc.with_scheme(scheme, case))
        path = os.path.join(out, f"trace_{label}.csv")
        tmp = path + ".tmp"
        trace.to_csv(tmp)
        os.replace(tmp, path)
        all_metrics[label] = dict(trace.metrics, diverged=trace.diverged)
        if trace.diverged:
            print(f"{label}: DIVERGED at t = {trace.t[-1]:.4g} s")
        else:
            n_ok += 1
            print(f"{label}: overshoot {trace.metrics['overshoot_pct']:.3g}%, "
                  f"iae {trace.metrics['iae']:.4g}, "
                  f"control energy {trace.metrics['control_energy']:.4g}")
    cfg = {"preset": args.preset, "schemes": labels,
           "t_end": sc.t_end, "dt": sc.dt, "plant": sc.plant.label,
           "params": {"n": sc.params.n, "b0": sc.params.b0,
                      "omega_cl": sc.params.omega_cl, "k_eso": sc.params.k_eso}}
    _write_json(os.path.join(out, "metrics.json"), {"schemes": all_metrics}, cfg)
    return 0 if n_ok else 1


def cmd_sweep(args) -> int:
    sc = _scenario_from_args(args)
    scheme, case = _split_scheme(args.scheme)
    sc = sc.with_scheme(scheme, case)
    param = {"keso": "k_eso", "omega_cl": "omega_cl", "wcl": "omega_cl"}.get(args.param)
    if param is None:
        raise UsageError("--param must be keso or wcl")
    values = _parse_values(args.values)
    items = sweep(sc, param, values)
    out = _out_dir(args)
    summary = []
    n_ok = 0
    for item in items:
        entry = {"value": item.value}
        if item.trace is not None and not item.trace.diverged:
            n_ok += 1
            path = os.path.join(out, f"sweep_{args.param}_{item.value:g}.csv")
            tmp = path + ".tmp"
            item.trace.to_csv(tmp)
            os.replace(tmp, path)
            entry["metrics"] = item.trace.metrics
        else:
            entry["error"] = item.error or "diverged"
        summary.append(entry)
    cfg = {"preset": args.preset, "param": args.param, "values": values,
           "scheme": args.scheme, "dt": sc.dt, "t_end": sc.t_end}
    _write_json(os.path.join(out, "sweep_summary.json"), {"items": summary}, cfg)
    print(f"{n_ok}/{len(items)} sweep points succeeded")
    return 0 if n_ok else 1


ADVICE = {
    # (derivatives, transient_shaping, prefer_simplicity) -> (scheme, rationale)
    "all": ("oadrc case B",
            "All reference derivatives are available: feeding them through the "
            "derivative gain path gives the best reference tracking, especially "
            "for dynamic references."),
    "some": ("oadrc intermediate case (A_m)",
             "Some reference derivatives are available: use the ones you have; "
             "each additional derivative term improves tracking of dynamic "
             "references."),
}


def cmd_advise(args) -> int:
    if args.derivatives in ADVICE:
        scheme, rationale = ADVICE[args.derivatives]
    elif args.transient_shaping == "yes":
        scheme = "oadrc case A"
        rationale = ("No reference derivatives, but transient shaping matters: "
                     "the pre-filter path of the output-based scheme lets you "
                     "shape the transient response (lower overshoot) even "
                     "without derivative information.")
    else:
        scheme = "eadrc"
        rationale = ("No reference derivatives and no transient-shaping "
                     "requirement: the error-based scheme is the simplest, most "
                     "compact structure (feedback path only, no pre-filter) and "
                     "recovers derivative information through its observer.")
        if args.prefer_simplicity == "yes":
            rationale += " Its implementation simplicity matches your priority."
    print(f"recommended scheme: {scheme}")
    print(rationale)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="adrclab",
        description="Linear ADRC design, transfer-function synthesis, loop "
                    "analysis and closed-loop simulation. TF JSON files use "
                    "ascending powers of s: {num: [c0..], den: [c0..], delay}.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        _add_design_flags(p)
        p.add_argument("--out", default=None, help="output directory "
                       "(default: $ADRC_LAB_OUT or cwd)")

    p = sub.add_parser("design", help="synthesize gains and A_CL")
    common(p)
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("tf", help="derive all transfer functions + realizability report")
    common(p)
    p.add_argument("--case", default="B", help="derivative case (A, A1, ..., B)")
    p.add_argument("--preset", default=None, help="table2 | table3")
    p.set_defaults(func=cmd_tf)

    p = sub.add_parser("check-equivalence",
                       help="verify the error-based scheme equals the feedback path")
    common(p)
    p.add_argument("--perturb-l", type=float, default=1.0,
                   help="test hook: scale observer gains to force a failure")
    p.set_defaults(func=cmd_check_equivalence)

    def loop_flags(p):
        common(p)
        p.add_argument("--preset", default=None, help="fig4a | fig4b")
        p.add_argument("--plant", default=None,
                       help="P1 | P2 | P3 | custom (default P2)")
        p.add_argument("--num", default=None, help="custom plant numerator c0,c1,...")
        p.add_argument("--den", default=None, help="custom plant denominator c0,c1,...")
        p.add_argument("--delay", type=float, default=0.0, help="custom plant dead time [s]")
        p.add_argument("--wmin", type=float, default=DEFAULT_BAND[0])
        p.add_argument("--wmax", type=float, default=DEFAULT_BAND[1])
        p.add_argument("--points", type=int, default=DEFAULT_POINTS)

    p = sub.add_parser("bode", help="frequency response CSV of a loop transfer function")
    loop_flags(p)
    p.add_argument("--tf", choices=sorted(_TF_CHOICES), default="ol")
    p.set_defaults(func=cmd_bode)

    p = sub.add_parser("margins", help="gain/phase margins of the open loop")
    loop_flags(p)
    p.set_defaults(func=cmd_margins)

    def sim_flags(p):
        common(p)
        p.add_argument("--plant", default="P2", help="P1 | P2 | P3 | custom")
        p.add_argument("--num", default=None)
        p.add_argument("--den", default=None)
        p.add_argument("--delay", type=float, default=0.0)
        p.add_argument("--preset", default=None,
                       help="fig5 | fig5b | fig6 | fig6-slowref | fig7 | fig10")
        p.add_argument("--tend", type=float, default=None)
        p.add_argument("--dt", type=float, default=None)

    p = sub.add_parser("simulate", help="closed-loop time-domain simulation")
    sim_flags(p)
    p.add_argument("--schemes", default=None,
                   help="comma list, e.g. oadrc-A,oadrc-B,eadrc")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="repeat a simulation over a tuning range")
    sim_flags(p)
    p.add_argument("--param", required=True, help="keso | wcl")
    p.add_argument("--values", required=True,
                   help="comma list or start:stop:count range")
    p.add_argument("--scheme", default="eadrc")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("advise", help="recommend a scheme from three questions")
    p.add_argument("--derivatives", required=True, choices=["none", "some", "all"],
                   help="which reference derivatives are available")
    p.add_argument("--transient-shaping", required=True, choices=["yes", "no"],
                   dest="transient_shaping",
                   help="is shaping the transient response a requirement")
    p.add_argument("--prefer-simplicity", required=True, choices=["yes", "no"],
                   dest="prefer_simplicity",
                   help="is implementation simplicity the priority")
    p.set_defaults(func=cmd_advise)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
