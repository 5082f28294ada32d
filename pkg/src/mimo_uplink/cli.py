"""Command-line interface.

Exit codes: 0 success, 2 usage or validation error, 3 numerical failure.
Powers are linear unless ``--db`` is given, which converts inputs and the
printed power columns only.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from . import dof, model, montecarlo, power, records, selftest, split
from .model import DomainError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3

AXES = ("P", "M", "T", "K", "alpha")


def db_to_linear(x: float) -> float:
    return 10.0 ** (x / 10.0)


def linear_to_db(x: Optional[float]) -> Optional[float]:
    if x is None:
        return None
    return 10.0 * math.log10(x) if x > 0 else -math.inf


@dataclass
class SweepSpec:
    axis: str
    values: list
    fixed: dict
    receiver: str = "zf"
    trials: int = 10_000
    seed: int = 0
    alpha: Optional[float] = None
    empirical: bool = False

    def __post_init__(self):
        if self.axis not in AXES:
            raise DomainError(f"axis must be one of {AXES}")
        if not self.values:
            raise DomainError("sweep values must be non-empty")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise DomainError("sweep values must be strictly increasing")


@dataclass
class Output:
    columns: list
    rows: list = field(default_factory=list)
    failed: bool = False


def _emit(out: Output, args) -> None:
    text = records.render(out.rows, out.columns, args.json)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _power_in(args, value: float) -> float:
    return db_to_linear(value) if args.db else value


def _power_col(args, name: str) -> str:
    return f"{name}_dB" if args.db else name


def _power_out(args, value):
    return linear_to_db(value) if args.db else value


# -- split ------------------------------------------------------------------

def cmd_split(args) -> Output:
    P = _power_in(args, args.p)
    closed = split.optimal_split_closed_form(P, args.t, args.k)
    grid = split.optimal_split_grid(P, args.t, args.k, args.resolution)
    data_frac, rho_over_p = split.asymptotic_split_high_snr(args.t, args.k)
    _, rho_low = split.asymptotic_split_low_snr(P, args.t, args.k)
    gamma = None if args.t == 2 * args.k else split.gamma_aux(P, args.t, args.k)
    cols = [_power_col(args, "P"), "T", "K", "alpha_train", "rho_star", "E", "P_d",
            "alpha_train_grid", "rho_star_grid", "rel_diff", "gamma",
            "high_snr_data_fraction", "high_snr_rho_over_P", "low_snr_rho"]
    row = {
        cols[0]: _power_out(args, P), "T": args.t, "K": args.k,
        "alpha_train": closed.alpha_train, "rho_star": closed.rho_star,
        "E": closed.E, "P_d": closed.P_d,
        "alpha_train_grid": grid.alpha_train, "rho_star_grid": grid.rho_star,
        "rel_diff": abs(closed.rho_star - grid.rho_star) / grid.rho_star,
        "gamma": gamma, "high_snr_data_fraction": data_frac,
        "high_snr_rho_over_P": rho_over_p, "low_snr_rho": rho_low,
    }
    return Output(cols, [row])


# -- rates ------------------------------------------------------------------

RATE_COLUMNS = ["axis", "value", "M", "K", "T", "P", "alpha_train", "E", "P_d", "rho",
                "rate_mrc", "rate_zf", "total_rate_mrc", "total_rate_zf",
                "receiver", "empirical_rate", "empirical_stderr", "note"]


def _sweep_values(args) -> list:
    if args.values:
        vals = list(args.values)
    elif args.range:
        start, stop, points = args.range
        if int(points) != points or points < 1:
            raise DomainError("--range POINTS must be a positive integer")
        if args.linear:
            vals = np.linspace(start, stop, int(points)).tolist()
        else:
            if start <= 0 or stop <= 0:
                raise DomainError("geometric --range needs positive endpoints")
            vals = np.geomspace(start, stop, int(points)).tolist()
    else:
        raise DomainError("give --values or --range")
    if args.axis in ("M", "K", "T"):
        if any(v != int(v) for v in vals):
            raise DomainError(f"{args.axis} values must be integers")
        vals = [int(v) for v in vals]
    elif args.axis == "P" and args.db:
        vals = [db_to_linear(v) for v in vals]
    return vals


def _rate_row(spec: SweepSpec, value, threads) -> dict:
    fixed = dict(spec.fixed)
    alpha = spec.alpha
    if spec.axis == "alpha":
        alpha = value
    else:
        fixed[spec.axis] = value
    M, K, T, P = fixed["M"], fixed["K"], fixed["T"], fixed["P"]
    row: dict[str, Any] = {"axis": spec.axis, "value": value, "M": M, "K": K, "T": T, "P": P,
                           "receiver": spec.receiver}
    try:
        params = model.validate_params(model.SystemParams(M, K, T, P))
        if alpha is None:
            if not P > 0:
                raise DomainError("P > 0 needed to optimize the split")
            sp = split.optimal_split_closed_form(P, T, K).as_energy_split()
        else:
            sp = model.EnergySplit.from_alpha(alpha, P, T, K)
    except DomainError as exc:
        row["note"] = str(exc)
        return row
    rho = model.effective_snr(sp.P_d, sp.E, K)
    mrc = model.rate_mrc(rho, M, K, T)
    zf = model.rate_zf(rho, M, K, T)
    row.update(alpha_train=sp.alpha_train, E=sp.E, P_d=sp.P_d, rho=rho,
               rate_mrc=mrc.per_user_rate, rate_zf=zf.per_user_rate,
               total_rate_mrc=mrc.total_rate, total_rate_zf=zf.total_rate)
    if spec.empirical:
        receiver = "mmse" if spec.receiver == "mmse-empirical" else spec.receiver
        try:
            emp = montecarlo.empirical_rate(receiver, params, sp, spec.trials, spec.seed, threads)
        except DomainError as exc:
            row["note"] = str(exc)
        else:
            row.update(empirical_rate=emp.mean_per_user_rate, empirical_stderr=emp.std_error)
    return row


def cmd_rates(args) -> Output:
    fixed = {"M": args.m, "K": args.k, "T": args.t,
             "P": _power_in(args, args.p) if args.p is not None else None}
    missing = [f"--{k.lower()}" for k, v in fixed.items() if v is None and k != args.axis]
    if missing:
        raise DomainError(f"{', '.join(missing)} required unless swept")
    if args.axis == "alpha" and args.alpha is not None:
        raise DomainError("--alpha conflicts with --axis alpha")
    spec = SweepSpec(args.axis, _sweep_values(args), fixed, args.receiver, args.trials,
                     args.seed, args.alpha,
                     args.empirical or args.receiver == "mmse-empirical")
    if spec.trials < 100 and spec.empirical:
        raise DomainError("--trials must be >= 100")
    rows = [_rate_row(spec, v, args.threads) for v in spec.values]
    cols = list(RATE_COLUMNS)
    if args.db:
        cols[cols.index("P")] = "P_dB"
        for r in rows:
            r["P_dB"] = linear_to_db(r.pop("P"))
            if spec.axis == "P":
                r["value"] = r["P_dB"]
    return Output(cols, rows)


# -- dof --------------------------------------------------------------------

_DOF_SCHEMES = {"zf": "zf_equal_power", "mrc": "mrc_equal_power", "mac": "coherent_mac"}


def cmd_dof(args) -> Output:
    model.validate_params(model.SystemParams(args.m, args.k, args.t, 1.0), needs_training=False)
    scheme = _DOF_SCHEMES[args.scheme]
    grid = 2.0 ** np.arange(args.p_min_log2, args.p_max_log2 + 0.5 * args.step, args.step)
    theory = dof.dof_total(args.m, args.k, args.t)
    est = dof.dof_slope_estimate(scheme, args.m, args.k, args.t, grid,
                                 trials=args.trials, seed=args.seed, threads=args.threads)
    if scheme == "mrc_equal_power" and est.slope <= 0.1 and theory.dof_total > 0.1:
        print(f"warning: MRC rate saturates (slope {est.slope:.4g}); "
              f"it does not reach the DoF {theory.dof_total:g}", file=sys.stderr)
    cols = ["M", "K", "T", "scheme", "k_star", "dof_closed_form", "slope", "abs_error"]
    row = {"M": args.m, "K": args.k, "T": args.t, "scheme": scheme,
           "k_star": theory.k_star, "dof_closed_form": theory.dof_total,
           "slope": est.slope, "abs_error": abs(est.slope - theory.dof_total)}
    return Output(cols, [row])


# -- power ------------------------------------------------------------------

def cmd_power(args) -> Output:
    rows = power.power_sweep(args.r, args.k, args.t, args.receiver, args.m, threads=args.threads or 1)
    cols = ["M", _power_col(args, "P_exact"), _power_col(args, "P_asymptotic"), "ratio", "error"]
    out = Output(cols)
    for r in rows:
        out.rows.append({"M": r.M, cols[1]: _power_out(args, r.P_exact),
                         cols[2]: _power_out(args, r.P_asymptotic),
                         "ratio": r.ratio, "error": r.error})
    out.failed = any(r.error for r in rows)
    return out


# -- simulate ---------------------------------------------------------------

def cmd_simulate(args) -> Output:
    P = _power_in(args, args.p)
    params = model.validate_params(model.SystemParams(args.m, args.k, args.t, P))
    if args.equal_power:
        sp = model.EnergySplit.equal_power(P, args.t, args.k)
    elif args.alpha is not None:
        sp = model.EnergySplit.from_alpha(args.alpha, P, args.t, args.k)
    else:
        if not P > 0:
            raise DomainError("P > 0 needed to optimize the split")
        sp = split.optimal_split_closed_form(P, args.t, args.k).as_energy_split()
    rho = model.effective_snr(sp.P_d, sp.E, args.k)
    bound = None
    if args.receiver == "mrc":
        bound = model.rate_mrc(rho, args.m, args.k, args.t).per_user_rate
    elif args.receiver == "zf":
        bound = model.rate_zf(rho, args.m, args.k, args.t).per_user_rate
    if args.trials < 100:
        raise DomainError("--trials must be >= 100")
    per_trial, resamples = montecarlo.trial_rates(args.receiver, args.m, args.k, args.t, [sp],
                                                  args.trials, args.seed, args.threads)
    values = per_trial[:, 0]
    mean = float(np.mean(values))
    se = float(np.std(values, ddof=1) / math.sqrt(args.trials))
    if args.per_trial:
        text = records.render_csv(({"trial": i, "rate": float(v)} for i, v in enumerate(values)),
                                  ["trial", "rate"])
        with open(args.per_trial, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    cols = ["M", "K", "T", _power_col(args, "P"), "receiver", "alpha_train", "E", "P_d", "rho",
            "bound_rate", "empirical_rate", "empirical_stderr", "trials", "seed", "resamples"]
    row = {"M": args.m, "K": args.k, "T": args.t, cols[3]: _power_out(args, P),
           "receiver": args.receiver, "alpha_train": sp.alpha_train, "E": sp.E, "P_d": sp.P_d,
           "rho": rho, "bound_rate": bound, "empirical_rate": mean, "empirical_stderr": se,
           "trials": args.trials, "seed": args.seed, "resamples": resamples}
    return Output(cols, [row])


# -- parser -----------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, seeded: bool = False) -> None:
    p.add_argument("--out", help="write output to FILE instead of stdout")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--csv", action="store_true", help="CSV with a header row (default)")
    fmt.add_argument("--json", action="store_true", help="JSON lines instead of CSV")
    p.add_argument("--db", action="store_true", help="powers given and printed in dB")
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker threads (default ${montecarlo.THREADS_ENV} or 1)")
    if seeded:
        p.add_argument("--trials", type=int, default=10_000)
        p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mimo-uplink",
        description="Training-based massive-MIMO uplink: energy split, rate bounds, "
                    "DoF and power scaling, with Monte Carlo checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("split", help="optimal training/data energy split")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--resolution", type=float, default=1e-4, help="grid step of the oracle")
    _add_common(p)

    p = sub.add_parser("rates", help="MRC/ZF rate bounds over a sweep")
    p.add_argument("--axis", choices=AXES, default="P")
    p.add_argument("--values", type=float, nargs="+")
    p.add_argument("--range", type=float, nargs=3, metavar=("START", "STOP", "POINTS"))
    p.add_argument("--linear", action="store_true", help="linear instead of geometric --range")
    p.add_argument("--m", type=int, help="required unless it is the sweep axis")
    p.add_argument("--k", type=int, help="required unless it is the sweep axis")
    p.add_argument("--t", type=int, help="required unless it is the sweep axis")
    p.add_argument("--p", type=float, help="required unless it is the sweep axis")
    p.add_argument("--alpha", type=float, help="fixed training fraction (default: optimal)")
    p.add_argument("--receiver", choices=("mrc", "zf", "mmse-empirical"), default="zf")
    p.add_argument("--empirical", action="store_true", help="add Monte Carlo columns")
    _add_common(p, seeded=True)

    p = sub.add_parser("dof", help="total DoF and its high-SNR slope estimate")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--scheme", choices=tuple(_DOF_SCHEMES), default="zf")
    p.add_argument("--p-min-log2", type=float, default=10.0)
    p.add_argument("--p-max-log2", type=float, default=30.0)
    p.add_argument("--step", type=float, default=1.0, help="grid step in octaves")
    _add_common(p, seeded=True)

    p = sub.add_parser(
        "power", help="power needed for a fixed per-user rate",
        description=f"Exact solve: geometric bisection on [{power.P_LOW:g}, {power.P_HIGH:g}] "
                    f"for up to {power.BISECTION_ITERATIONS} steps, rate tolerance "
                    f"{power.RATE_RTOL:g} relative.")
    p.add_argument("--r", type=float, required=True, help="target per-user rate (bits/use)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--receiver", choices=("mrc", "zf"), default="mrc")
    p.add_argument("--m", type=int, nargs="+", required=True)
    _add_common(p)

    p = sub.add_parser("simulate", help="Monte Carlo ergodic rate at one point")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--receiver", choices=montecarlo.RECEIVERS, default="zf")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--alpha", type=float)
    group.add_argument("--equal-power", action="store_true")
    p.add_argument("--per-trial", metavar="FILE", help="write per-trial rates as CSV")
    _add_common(p, seeded=True)

    sub.add_parser("selftest", help="fast property checks")
    return parser


_COMMANDS = {"split": cmd_split, "rates": cmd_rates, "dof": cmd_dof,
             "power": cmd_power, "simulate": cmd_simulate}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "selftest":
        return EXIT_OK if selftest.run() else 1
    try:
        out = _COMMANDS[args.command](args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    _emit(out, args)
    return EXIT_NUMERIC if out.failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
