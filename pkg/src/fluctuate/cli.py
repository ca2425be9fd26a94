"""Command-line interface: ``fluctuate <command> [options]``.

Exit status is 0 on success, 2 for invalid input or an unsupported regime,
3 for numerical failures and 1 when ``selftest`` reports a failing check.
Data goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .errors import DomainError, NumericError, ValidationError
from .model import RAW_KEYS, LpsmParams, ModelParams

LPSM_FLAGS = ("gamma", "theta", "q")


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _clean(obj, digits):
    """Make ``obj`` JSON-safe: infinities become strings, floats are rounded."""
    if isinstance(obj, dict):
        return {str(k): _clean(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v, digits) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v, digits) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x if digits >= 17 else float(f"{x:.{digits}g}")
    return obj


def _emit(args, text):
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _envelope(args, params, result, t0):
    env = {
        "command": args.command,
        "parameters": params,
        "result": result,
        "version": __version__,
        "wall_time": time.perf_counter() - t0,
    }
    return json.dumps(_clean(env, args.digits), indent=None) + "\n"


def _csv(header, rows, digits):
    fmt = f"{{:.{digits}g}}"

    def cell(v):
        if isinstance(v, (float, np.floating)):
            return fmt.format(float(v))
        return str(v)

    lines = [",".join(header)] + [",".join(cell(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# parameter handling
# ---------------------------------------------------------------------------


def _add_param_flags(p, raw=True, lpsm=True):
    if raw:
        g = p.add_argument_group("raw rates")
        for key in RAW_KEYS:
            g.add_argument(f"--{key}", type=float, dest=f"raw_{key}")
    if lpsm:
        g = p.add_argument_group("limit-law parameters")
        for key in LPSM_FLAGS:
            g.add_argument(f"--{key}", type=float, dest=f"lpsm_{key}")


def _given(args, prefix, keys):
    return {k: getattr(args, prefix + k) for k in keys if getattr(args, prefix + k, None) is not None}


def _params(args, want=None):
    """Build ModelParams or LpsmParams from the flags; a mixed set is an error."""
    raw = _given(args, "raw_", RAW_KEYS)
    lp = _given(args, "lpsm_", LPSM_FLAGS)
    if raw and lp:
        raise ValidationError(f"raw rates {sorted(raw)} cannot be combined with {sorted(lp)}")
    if not raw and not lp:
        raise ValidationError("no model parameters given")
    if raw:
        if want == "lpsm":
            raise ValidationError("this command needs --gamma/--theta/--q")
        return ModelParams.from_dict(raw)
    if want == "raw":
        raise ValidationError("this command needs --alpha/--beta/--nu/--delta/--N [--N0]")
    return LpsmParams.from_dict(lp)


def _regime_params(args):
    """Parameters for commands taking ``--regime exact|lpsm``."""
    regime = getattr(args, "regime", None)
    want = {"lpsm": "lpsm", "exact": "raw", "neutral": "raw"}.get(regime)
    p = _params(args, want)
    if regime == "neutral" and abs(p.gamma - 1.0) > 1e-8:
        raise DomainError(f"neutral regime needs gamma = 1, got {p.gamma!r}")
    return p


def _grid(text):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"cannot parse grid {text!r}") from None
    if not vals:
        raise ValidationError("empty grid")
    return vals


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_pmf(args, t0):
    from .exact import coefficients_neutral, pmf_B, pmf_from_coefficients
    from .lpsm import pmf_V

    regime = args.regime
    p = _params(args, "lpsm" if regime == "lpsm" else "raw" if regime in ("exact", "neutral") else None)
    if regime is None:
        regime = "lpsm" if isinstance(p, LpsmParams) else "exact"
    if regime == "lpsm":
        pmf = pmf_V(p, args.nmax if args.nmax is not None else 1000)
    elif regime == "neutral":
        if abs(p.gamma - 1.0) > 1e-8:
            raise DomainError(f"neutral regime needs gamma = 1, got {p.gamma!r}")
        nmax = args.nmax if args.nmax is not None else 1000
        pmf = pmf_from_coefficients(coefficients_neutral(p, nmax), nmax)
    else:
        pmf = pmf_B(p, nmax=args.nmax, eps=args.eps)
    if args.format == "csv":
        return pmf.to_csv(args.digits)
    return _envelope(args, p.to_dict(), pmf.to_dict(), t0)


def cmd_moments(args, t0):
    from .exact import mean_B, variance_B
    from .lpsm import moments_V

    p = _regime_params(args)
    if isinstance(p, LpsmParams):
        res = moments_V(p)
    else:
        res = {"mean": mean_B(p), "variance": variance_B(p)}
    return _envelope(args, p.to_dict(), res, t0)


def cmd_p0(args, t0):
    from .exact import log_gf_B
    from .lpsm import p0_contour_theta, resistance_p0, resistance_probability

    p = _regime_params(args)
    if isinstance(p, LpsmParams):
        res = {"p0": resistance_p0(p), "resistance_probability": resistance_probability(p)}
        if args.target_p0 is not None:
            c = p0_contour_theta(p.gamma, p.q, args.target_p0)
            res["contour"] = {"p0_target": c.p0_target, "theta_exact": c.exact, "theta_approx": c.approx}
    else:
        lg = log_gf_B(p, 0.0)
        res = {"p0": math.exp(lg), "resistance_probability": -math.expm1(lg)}
        if args.target_p0 is not None:
            raise ValidationError("--target-p0 needs the limit-law parameters")
    return _envelope(args, p.to_dict(), res, t0)


def cmd_mode(args, t0):
    from .lpsm import mode_V

    p = _params(args, "lpsm")
    return _envelope(args, p.to_dict(), mode_V(p).to_dict(), t0)


def cmd_boundary(args, t0):
    from .lpsm import boundary_theta

    if args.lpsm_gamma is None:
        raise ValidationError("boundary needs --gamma (and optionally --q)")
    q = args.lpsm_q if args.lpsm_q is not None else 0.0
    r = boundary_theta(args.lpsm_gamma, q)
    return _envelope(args, {"gamma": r.gamma, "q": r.q},
                     {"theta_exact": r.exact, "theta_approx": r.approx}, t0)


def cmd_tail(args, t0):
    from .exact import pmf_B
    from .lpsm import pmf_V
    from .tail import tail_expansion

    p = _params(args)
    exp = tail_expansion(p)
    res = exp.to_dict()
    if args.compare_pmf:
        ns = [int(v) for v in _grid(args.n_grid)]
        if min(ns) < 1:
            raise ValidationError("--n-grid values must be at least 1")
        top = max(ns)
        pmf = pmf_V(p, top) if isinstance(p, LpsmParams) else pmf_B(p, nmax=top)
        rows = []
        for n in ns:
            ex = float(pmf.probs[n])
            asym = exp.evaluate(n)
            rows.append((n, ex, asym, ex / asym if asym != 0 else math.inf))
        if args.format == "csv":
            return _csv(("n", "exact", "asymptotic", "ratio"), rows, args.digits)
        res["comparison"] = [dict(zip(("n", "exact", "asymptotic", "ratio"), r)) for r in rows]
    return _envelope(args, p.to_dict(), res, t0)


def cmd_limit(args, t0):
    from .limits import large_N_law, large_theta_law

    if args.family == "large-theta":
        p = _params(args, "lpsm")
        law = large_theta_law(p.gamma, p.q, p.theta)
    else:
        p = _params(args, "raw")
        law = large_N_law(p)
    res = law.to_dict()
    if args.s_grid:
        s = _grid(args.s_grid)
        vals = law.exponent(np.array(s))
        res["exponent"] = [{"s": a, "value": float(b)} for a, b in zip(s, np.atleast_1d(vals))]
    return _envelope(args, p.to_dict(), res, t0)


def _sim_config(args):
    from .sim import FULLY_STOCHASTIC, SEMI_DETERMINISTIC, SimConfig

    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            return SimConfig.from_dict(json.load(fh))
    p = _params(args, "raw")
    mode = FULLY_STOCHASTIC if args.mode == "fully-stochastic" else SEMI_DETERMINISTIC
    return SimConfig(p, args.trajectories, args.seed, mode, max_events=args.max_events)


def cmd_simulate(args, t0):
    from .sim import simulate

    cfg = _sim_config(args)
    summary = simulate(cfg)
    if args.format == "csv":
        return summary.to_csv()
    return _envelope(args, cfg.to_dict(), summary.to_dict(), t0)


def cmd_compare(args, t0):
    from .exact import pmf_B
    from .lpsm import pmf_V
    from .sim import FULLY_STOCHASTIC, chi_square_test, simulate, tv_distance

    cfg = _sim_config(args)
    summary = simulate(cfg)
    reference = args.reference or ("lpsm" if cfg.mode == FULLY_STOCHASTIC else "exact")
    p = cfg.params
    if reference == "lpsm":
        ref = pmf_V(LpsmParams(p.gamma, p.theta, p.q), max(1000, int(summary.counts.size)))
    else:
        ref = pmf_B(p)
    tv = tv_distance(summary, ref)
    summary.tv_distance_vs = (reference, tv)
    try:
        chi = chi_square_test(summary, ref)
    except DomainError as exc:
        chi = {"error": str(exc)}
    res = {"reference": reference, "tv_distance": tv, "chi_square": chi,
           "n_trajectories": summary.n_trajectories, "flagged": summary.flagged,
           "mean": summary.mean, "variance": summary.variance}
    return _envelope(args, cfg.to_dict(), res, t0)


def cmd_selftest(args, t0):
    from .checks import selftest

    results = selftest(quick=not args.full)
    for r in results:
        print(r.line())
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="fluctuate", description="Mutant-count distributions.")
    ap.add_argument("--version", action="version", version=f"fluctuate {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, raw=True, lpsm=True):
        p = sub.add_parser(name, help=help_)
        _add_param_flags(p, raw, lpsm)
        p.add_argument("--digits", type=int, default=17, help="significant digits of floats (default 17)")
        p.add_argument("--out", help="write output to FILE instead of stdout")
        p.set_defaults(func=fn)
        return p

    p = add("pmf", cmd_pmf, "probability table")
    p.add_argument("--regime", choices=("exact", "neutral", "lpsm"))
    p.add_argument("--nmax", type=int)
    p.add_argument("--eps", type=float, default=1e-8)
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = add("moments", cmd_moments, "mean and variance")
    p.add_argument("--regime", choices=("exact", "neutral", "lpsm"))
    p = add("p0", cmd_p0, "probability of no mutants")
    p.add_argument("--regime", choices=("exact", "neutral", "lpsm"))
    p.add_argument("--target-p0", type=float)
    add("mode", cmd_mode, "most probable mutant count", raw=False)
    add("boundary", cmd_boundary, "theta where p1 = p0", raw=False)

    p = add("tail", cmd_tail, "tail asymptotics")
    p.add_argument("--compare-pmf", action="store_true")
    p.add_argument("--n-grid", default="10,100,1000")
    p.add_argument("--format", choices=("csv", "json"), default="json")

    p = add("limit", cmd_limit, "limit laws")
    p.add_argument("--family", choices=("large-theta", "large-n"), default="large-theta")
    p.add_argument("--s-grid")

    for name, fn, help_ in (("simulate", cmd_simulate, "Monte Carlo ensemble"),
                            ("compare", cmd_compare, "simulation against theory")):
        p = add(name, fn, help_, lpsm=False)
        p.add_argument("--mode", choices=("semi-deterministic", "fully-stochastic"),
                       default="semi-deterministic")
        p.add_argument("--trajectories", type=int, default=10000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--max-events", type=int, default=10 ** 8)
        p.add_argument("--config", help="SimConfig JSON file")
        if name == "simulate":
            p.add_argument("--format", choices=("csv", "json"), default="json")
        else:
            p.add_argument("--reference", choices=("exact", "lpsm"))

    p = sub.add_parser("selftest", help="run identity and oracle checks")
    p.add_argument("--full", action="store_true", help="1000 cases per identity and 1e5 trajectories")
    p.set_defaults(func=cmd_selftest, digits=17, out=None)
    return ap


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "digits", 17) < 1 or args.digits > 17:
        print("error: --digits must lie in 1..17", file=sys.stderr)
        return 2
    t0 = time.perf_counter()
    try:
        out = args.func(args, t0)
    except (ValidationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if isinstance(out, int):
        return out
    _emit(args, out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
