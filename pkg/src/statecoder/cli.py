"""``statecoder`` command line.

Exit codes: 0 success, 1 infeasible or empty request, 2 malformed input.
Every command echoes its resolved configuration (JSON outputs carry it under
``"config"``; CSV outputs print it to stderr) so that a run can be repeated.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import bound_eval, coding_sim, gaussian_dpc, optimizer
from .channel_model import (AuxScheme, ChannelFormatError, GpAux, StateChannel, example_channel,
                            load_aux, section3_scheme)

EXIT_OK, EXIT_INFEASIBLE, EXIT_MALFORMED = 0, 1, 2
COVERING_EPSILON = 0.35
GRIDS = {"coarse": (-0.05, 0.0, 0.05, 0.1),
         "fine": tuple(np.round(np.arange(-0.1, 0.1501, 0.025), 3))}


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _load_channel(source: str) -> StateChannel:
    if source == "example":
        return example_channel()
    try:
        return StateChannel.load(source)
    except FileNotFoundError:
        raise CliError(f"channel file not found: {source}", EXIT_MALFORMED) from None
    except ChannelFormatError as exc:
        raise CliError(str(exc), EXIT_MALFORMED) from None


def _load_scheme(args, ch: StateChannel):
    """Scheme requested by --preset or --aux, or None."""
    if getattr(args, "preset", None) == "section3":
        aux = section3_scheme()
    elif getattr(args, "aux", None):
        try:
            aux = load_aux(args.aux)
        except FileNotFoundError:
            raise CliError(f"aux file not found: {args.aux}", EXIT_MALFORMED) from None
        except (ChannelFormatError, json.JSONDecodeError) as exc:
            raise CliError(f"{args.aux}: {exc}", EXIT_MALFORMED) from None
    else:
        return None
    try:
        (aux.as_aux_scheme() if isinstance(aux, GpAux) else aux).check_channel(ch)
    except ChannelFormatError as exc:
        raise CliError(str(exc), EXIT_MALFORMED) from None
    return aux


def _echo(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"}


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


# --------------------------------------------------------------------------
# commands


def cmd_bounds(args) -> int:
    ch = _load_channel(args.channel)
    aux = _load_scheme(args, ch)
    result: dict = {"config": _echo(args), "reports": {}}
    reports = result["reports"]
    if args.appendix_b_witness:
        if args.channel != "example":
            raise CliError("the 3-letter witness is defined on the example channel", EXIT_MALFORMED)
        aux = optimizer.appendix_b_witness()
    if aux is not None:
        if isinstance(aux, GpAux):
            reports["gp"] = bound_eval.gp_rate(ch, aux).to_dict()
            if args.thm1:
                reports["thm1"] = bound_eval.thm1_rate(ch, aux.as_aux_scheme()).to_dict()
        else:
            reports["thm1"] = bound_eval.thm1_rate(ch, aux).to_dict()
    if args.optimize:
        if args.budget < 1:
            raise CliError("--budget must be at least 1", EXIT_INFEASIBLE)
        t0 = time.perf_counter()
        if args.thm1:
            best, rep = optimizer.maximize_thm1(ch, args.cards, args.budget, seed=args.seed)
            reports["thm1_optimized"] = {**rep.to_dict(), "aux": best.to_dict()}
        else:
            best, rep = optimizer.maximize_gp(ch, args.card, args.budget, seed=args.seed)
            reports["gp_optimized"] = {**rep.to_dict(), "aux": best.to_dict()}
        result["seconds"] = time.perf_counter() - t0
    if args.deterministic:
        try:
            cap = bound_eval.deterministic_capacity(ch)
        except bound_eval.PremiseError as exc:
            raise CliError(f"channel outside the deterministic class: {exc}", EXIT_INFEASIBLE) from None
        reports["deterministic"] = {"value": cap.value, "x_given_s": cap.x_given_s.tolist(),
                                    "cutset": bound_eval.cutset_upper(ch, cap.x_given_s)}
    if not reports:
        raise CliError("nothing to evaluate: give --aux, --preset, --appendix-b-witness, "
                       "--optimize or --deterministic", EXIT_MALFORMED)
    if args.format == "csv":
        print("report,term,value")
        for name, rep in reports.items():
            for term, value in rep.get("terms", {"value": rep.get("value")}).items():
                print(f'{name},"{term}",{value!r}')
            if "overall" in rep:
                print(f"{name},overall,{rep['overall']!r}")
    elif args.format == "pretty":
        for name, rep in reports.items():
            print(f"[{name}]")
            for term, value in rep.get("terms", {"value": rep.get("value")}).items():
                print(f"  {term:<60s} {value: .9f}")
            if "overall" in rep:
                print(f"  {'min':<60s} {rep['overall']: .9f}")
    else:
        _emit(result, args.out)
    return EXIT_OK


def _sim_scheme(args, ch) -> AuxScheme:
    aux = _load_scheme(args, ch)
    if aux is None:
        raise CliError("simulate needs --preset or --aux", EXIT_MALFORMED)
    return aux.as_aux_scheme() if isinstance(aux, GpAux) else aux


def cmd_simulate(args) -> int:
    if args.trials < 1:
        raise CliError("--trials must be at least 1", EXIT_INFEASIBLE)
    ch = _load_channel(args.channel)
    aux = _sim_scheme(args, ch)
    try:
        n_list = [int(v) for v in args.n_list.split(",") if v.strip()]
    except ValueError:
        raise CliError(f"bad --n-list {args.n_list!r}", EXIT_MALFORMED) from None
    if not n_list:
        raise CliError("--n-list is empty", EXIT_INFEASIBLE)
    T0, T1, T2 = coding_sim.margin_rates(ch, aux, args.rate, args.margin)
    T0 = T0 if args.T0 is None else args.T0
    T1 = T1 if args.T1 is None else args.T1
    T2 = T2 if args.T2 is None else args.T2
    echo = {**_echo(args), "T0": T0, "T1": T1, "T2": T2}
    print("# config: " + json.dumps(echo), file=sys.stderr)
    results = []
    for n in n_list:
        try:
            cfg = coding_sim.SimConfig(n=n, R=args.rate, T0=T0, T1=T1, T2=T2, epsilon=args.epsilon,
                                       epsilon_prime=args.epsilon_prime, trials=args.trials,
                                       seed=args.seed, mode=args.mode)
            results.append(coding_sim.run_trials(ch, aux, cfg))
        except coding_sim.SizeGuardError as exc:
            raise CliError(str(exc), EXIT_INFEASIBLE) from None
        except ValueError as exc:
            raise CliError(str(exc), EXIT_MALFORMED) from None
    text = coding_sim.results_to_csv(results)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_appendix_b(args) -> int:
    opt = optimizer.appendix_b_maximize()
    payload = {"config": _echo(args), "t": opt.t, "s4": opt.s4, "value": opt.value,
               "case": opt.case,
               "cases": {str(k): (None if v is None else list(v)) for k, v in opt.cases.items()}}
    if args.grid_step:
        gt, gs, gv = optimizer.appendix_b_grid(args.grid_step)
        payload["grid"] = {"step": args.grid_step, "t": gt, "s4": gs, "value": gv}
    _emit(payload, args.out)
    return EXIT_OK


def cmd_gaussian(args) -> int:
    try:
        params = gaussian_dpc.GaussianCompound(args.alpha, args.g1, args.g2, args.Q0, args.Q1, args.P)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_MALFORMED) from None
    _emit({"config": _echo(args), **gaussian_dpc.report(params)}, args.out)
    return EXIT_OK


def cmd_covering(args) -> int:
    if args.trials < 1:
        raise CliError("--trials must be at least 1", EXIT_INFEASIBLE)
    ch = _load_channel(args.channel)
    aux = _sim_scheme(args, ch)
    it = bound_eval.information_terms(ch, aux)
    offsets = GRIDS[args.grid]
    T1 = [max(0.0, it.i_u_s_w + d) for d in offsets]
    T2 = [max(0.0, it.i_v_s_w + d) for d in offsets]
    try:
        table = coding_sim.covering_experiment(ch, aux, args.n, T1, T2, trials=args.trials,
                                               epsilon=args.epsilon, seed=args.seed)
    except coding_sim.SizeGuardError as exc:
        raise CliError(str(exc), EXIT_INFEASIBLE) from None
    payload = {"config": _echo(args), "n": table.n, "epsilon": table.epsilon, "trials": table.trials,
               "T1": list(table.T1), "T2": list(table.T2), "success": table.success.tolist(),
               "conditions": table.conditions, "monotone": table.is_monotone()}
    if args.format == "csv":
        print("# config: " + json.dumps(payload["config"]), file=sys.stderr)
        sys.stdout.write(table.to_csv())
    else:
        _emit(payload, args.out)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def _cards(text: str) -> tuple[int, int, int]:
    try:
        cards = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected W,U,V integers, got {text!r}") from None
    if len(cards) != 3:
        raise argparse.ArgumentTypeError("expected three cardinalities W,U,V")
    return cards


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="statecoder", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def scheme_args(sp):
        sp.add_argument("--channel", default="example", help='"example" or a channel JSON file')
        sp.add_argument("--preset", choices=["section3"], help="built-in scheme on the example channel")
        sp.add_argument("--aux", help="auxiliary-scheme JSON file")

    b = sub.add_parser("bounds", help="evaluate or optimize rate bounds")
    scheme_args(b)
    b.add_argument("--appendix-b-witness", action="store_true", help="use the 3-letter optimal GP scheme")
    b.add_argument("--thm1", action="store_true", help="use the three-layer bound")
    b.add_argument("--optimize", action="store_true")
    b.add_argument("--card", type=int, default=3, help="max |U| for single-layer optimization")
    b.add_argument("--cards", type=_cards, default=(1, 2, 2), help="W,U,V for three-layer optimization")
    b.add_argument("--budget", type=int, default=200)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--deterministic", action="store_true", help="deterministic-class capacity")
    b.add_argument("--format", choices=["json", "csv", "pretty"], default="json")
    b.add_argument("--out")
    b.set_defaults(func=cmd_bounds)

    s = sub.add_parser("simulate", help="Monte Carlo error rates over blocklengths")
    scheme_args(s)
    s.add_argument("--rate", type=float, required=True)
    s.add_argument("--n-list", default="8,16,24")
    s.add_argument("--margin", type=float, default=0.03, help="slack above each covering threshold")
    s.add_argument("--T0", type=float)
    s.add_argument("--T1", type=float)
    s.add_argument("--T2", type=float)
    s.add_argument("--epsilon", type=float)
    s.add_argument("--epsilon-prime", type=float)
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--mode", choices=["auto", "explicit", "lazy"], default="auto")
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    a = sub.add_parser("appendix-b", help="reduced binary-example optimization")
    a.add_argument("--grid-step", type=float, help="also report a brute-force grid maximum")
    a.add_argument("--out")
    a.set_defaults(func=cmd_appendix_b)

    g = sub.add_parser("gaussian", help="compound Gaussian power split")
    g.add_argument("--alpha", type=float, required=True)
    g.add_argument("--g1", type=float, required=True)
    g.add_argument("--g2", type=float, required=True)
    g.add_argument("--P", type=float, required=True)
    g.add_argument("--Q0", type=float, default=1.0)
    g.add_argument("--Q1", type=float, default=1.0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gaussian)

    c = sub.add_parser("covering", help="empirical success of the satellite-pair search")
    scheme_args(c)
    c.add_argument("--grid", choices=sorted(GRIDS), default="coarse",
                   help="offsets of (T1, T2) from their single-layer thresholds")
    c.add_argument("--n", type=int, default=24)
    c.add_argument("--trials", type=int, default=200)
    c.add_argument("--epsilon", type=float, default=COVERING_EPSILON)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--format", choices=["json", "csv"], default="json")
    c.add_argument("--out")
    c.set_defaults(func=cmd_covering)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_MALFORMED if exc.code else EXIT_OK
    try:
        return args.func(args)
    except CliError as exc:
        print(f"statecoder: error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
