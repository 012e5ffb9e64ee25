"""Command-line entry point: `spikelab <subcommand> ...`.

Exit codes: 0 success, 1 a reproduced criterion failed, 2 bad arguments or config.
"""
import argparse
import json
import logging
import math
import os
import sys
import warnings

import numpy as np

from . import __version__

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _emit(payload, out=None):
    text = json.dumps({"version": __version__, **payload}, indent=2, sort_keys=True) + "\n"
    if out:
        os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _model_args(p):
    p.add_argument("--D", type=float, default=1e-5, help="inhibitor diffusivity")
    p.add_argument("--epsilon", type=float, default=None,
                   help="activator length scale (default: sigma * sqrt(D))")
    p.add_argument("--sigma", type=float, default=0.05, help="used when --epsilon is absent")
    p.add_argument("--mu2", type=float, default=1.0, help="precursor curvature mu''(0)")


def _params(args):
    from .reduced import ModelParams

    eps = args.epsilon if args.epsilon is not None else args.sigma * math.sqrt(args.D)
    return ModelParams(epsilon=eps, D=args.D, mu_second=args.mu2)


def _complex_list(vals):
    return [{"re": float(np.real(v)), "im": float(np.imag(v))} for v in vals]


# ------------------------------------------------------------------ commands
def cmd_groundstate(args):
    from .ground_state import integrals, solve_ground_state, write_constants_json, write_profile_csv

    prof = solve_ground_state(args.r_max, args.n, args.tol)
    c = integrals(prof)
    if args.outdir:
        os.makedirs(args.outdir, exist_ok=True)
        write_profile_csv(prof, os.path.join(args.outdir, "profile.csv"))
        write_constants_json(prof, c, os.path.join(args.outdir, "constants.json"))
        _emit({"command": "groundstate", "files": ["profile.csv", "constants.json"]},
              os.path.join(args.outdir, "manifest.json"))
    _emit({
        "command": "groundstate",
        "w0": prof.w0,
        "int_w2": c.int_w2,
        "int_w3": c.int_w3,
        "c1": c.c1,
        "c2": c.c2,
        "residual_sup": prof.residual_sup,
        "r_max": prof.r_max,
        "n": int(prof.r_grid.size - 1),
    }, args.out)
    return EXIT_OK


def cmd_equilibrium(args):
    from . import reduced

    p = _params(args)
    rc = reduced.make_constants(p, args.k)
    if args.with_centre:
        e = reduced.equilibrium_radius_centre(args.k, p, rc)
        asym = reduced.asymptotic_radius_centre(args.k, p, rc)
    else:
        e = reduced.equilibrium_radius(args.k, p, rc)
        asym = reduced.asymptotic_radius(args.k, p, rc)
    window = reduced.radius_window(p)
    _emit({
        "command": "equilibrium",
        "k": args.k,
        "with_centre": args.with_centre,
        "R_numeric": e.radius,
        "R_asymptotic": asym,
        "R_critical": reduced.critical_radius(args.k, p, rc, args.with_centre, seed=e.radius),
        "residual": e.residual,
        "nondegeneracy": e.nondegeneracy,
        "sigma": p.sigma,
        "xi": rc.xi,
        "in_window": None if window is None else bool(window[0] <= e.radius <= window[1]),
    }, args.out)
    return EXIT_OK


def cmd_stability(args):
    from . import reduced, stability

    p = _params(args)
    if args.with_centre:
        rep = stability.classify_centre(args.k)
    else:
        rep = stability.classify(args.k, p)
    payload = {
        "command": "stability",
        "k": args.k,
        "with_centre": args.with_centre,
        "mu": [0.0 if abs(m) < 1e-15 else float(m) for m in rep.mu_values],
        "verdict": rep.verdict.value,
        "witness": rep.witness,
        "warning": rep.warning,
        "oracle_signs": rep.oracle_signs,
    }
    if args.oracle:
        orc = stability.hessian_oracle(args.k, p, reduced.make_constants(p, max(args.k, 2)),
                                       with_centre=args.with_centre)
        payload["oracle_signs"] = orc.signs
        payload["oracle_eigenvalues"] = [float(v) for v in orc.scaled]
        payload["oracle_radius"] = orc.radius
    _emit(payload, args.out)
    return EXIT_OK


def _float_list(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def cmd_nlep(args):
    from . import nlep
    from .ground_state import solve_ground_state

    prof = solve_ground_state()
    op = nlep.build_operator(prof, args.mode, args.gamma, n=args.n)
    spec = nlep.nlep_spectrum(op, args.count, prof) if args.gamma else nlep.local_spectrum(op, args.count, prof)
    payload = {
        "command": "nlep",
        "mode": args.mode,
        "gamma": args.gamma,
        "n": args.n,
        "eigenvalues": _complex_list(spec.values),
    }
    if args.mode == 1 and not args.gamma:
        payload["zero_mode_correlation"] = nlep.zero_mode_correlation(prof, spec)
    if args.tau_scan:
        entries = nlep.nlep_tau_scan(prof, args.tau_scan)
        payload["tau_scan"] = [{
            "tau": e.tau,
            "converged": e.converged,
            "lambda": None if e.lam is None else {"re": float(np.real(e.lam)), "im": float(np.imag(e.lam))},
            "max_real": e.max_real,
            "iterations": e.iterations,
            "note": e.note,
        } for e in entries]
        payload["tau_crossing"] = nlep.crossing_tau(entries)
    _emit(payload, args.out)
    return EXIT_OK


def cmd_simulate(args):
    from . import pde

    cfg = pde.load_config(args.config)
    res = pde.run(cfg, outdir=args.outdir)
    last = res.track.snapshots[-1]
    _emit({
        "command": "simulate",
        "outdir": args.outdir,
        "snapshots": len(res.track.snapshots),
        "t_final": res.state.t,
        "final_count": len(last.spikes),
        "final_asymmetry": last.asymmetry,
    }, args.out)
    return EXIT_OK


def cmd_reproduce(args):
    from . import acceptance

    results = acceptance.run_all(args.only)
    table = acceptance.format_table(results)
    sys.stdout.write(table + "\n")
    if args.json:
        _emit({
            "command": "reproduce",
            "criteria": [{"id": r.cid, "name": r.name, "status": r.status, "detail": r.detail, "note": r.note}
                         for r in results],
        }, args.json)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def _id_list(text):
    try:
        ids = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated criterion ids, got {text!r}") from None
    if any(i < 1 or i > 10 for i in ids):
        raise argparse.ArgumentTypeError("criterion ids run from 1 to 10")
    return ids


def build_parser():
    ap = argparse.ArgumentParser(prog="spikelab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"spikelab {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("groundstate", help="solve for w and print its constants")
    p.add_argument("--r-max", type=float, default=20.0)
    p.add_argument("--n", type=int, default=4000)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--outdir", help="also write profile.csv and constants.json here")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_groundstate)

    p = sub.add_parser("equilibrium", help="polygon radius from the reduced balance equation")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--with-centre", action="store_true")
    _model_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_equilibrium)

    p = sub.add_parser("stability", help="mu spectrum and verdict for a k-polygon")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--with-centre", action="store_true")
    p.add_argument("--oracle", action="store_true", help="add the reduced-potential Hessian signs")
    _model_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("nlep", help="local or nonlocal radial spectrum")
    p.add_argument("--mode", type=int, default=0)
    p.add_argument("--gamma", type=float, default=2.0)
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--count", type=int, default=6)
    p.add_argument("--tau-scan", type=_float_list, default=None, help="comma-separated tau values")
    p.add_argument("--out")
    p.set_defaults(func=cmd_nlep)

    p = sub.add_parser("simulate", help="run the time stepper from a key = value config file")
    p.add_argument("config")
    p.add_argument("--outdir", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reproduce", help="run the acceptance ladder and print a pass/fail table")
    p.add_argument("--only", type=_id_list, default=None, help="comma-separated criterion ids")
    p.add_argument("--json", help="also write the table as JSON here")
    p.set_defaults(func=cmd_reproduce)
    return ap


def main(argv=None):
    from .errors import ConfigError, SpikelabError

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        with warnings.catch_warnings():
            if not args.verbose:
                warnings.simplefilter("ignore")
            return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        sys.stderr.write(f"spikelab: {exc}\n")
        return EXIT_CONFIG
    except SpikelabError as exc:
        sys.stderr.write(f"spikelab: {type(exc).__name__}: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
