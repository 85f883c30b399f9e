"""Command-line front end.

Every subcommand writes a table (CSV by default, JSON with ``--out json``)
to stdout or to ``-o PATH``. Exit status: 0 success, 1 numerical failure,
2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import List, Optional, Sequence

from . import __version__
from .cascade import DEFAULT_SEED, CascadeConfig, run_trials
from .cascade.engine import MEDIUM_RULES, participation_ratio
from .config import Settings, load_config
from .conformance import conformance_report, summarize
from .design import backside_estimate, suppression_factor, trap_estimates
from .errors import CascadeLimitError, ConfigError, DomainError, QuadratureError, UnknownMaterialError
from .event import ChipGeometry, phonon_escape_rate, simulate_event
from .markers import UNBOUNDED
from . import rates

SEED_ENV = "QPC_SEED"

CASCADE_COLUMNS = [
    "ep_over_gap", "participation", "trials", "n_qp_mean", "n_qp_norm_mean",
    "n_qp_norm_stderr", "e_qp_frac", "e_subgap_frac", "e_electron_frac",
]
RATES_COLUMNS = ["material", "quantity", "energy_K", "rate_integral_per_ns", "rate_fit_per_ns", "rel_residual"]
EVENT_COLUMNS = ["stage", "t_start_us", "duration_us", "size_mm", "t1_us", "t1_bound", "model_duration_us", "density_ratio"]


class UsageError(Exception):
    pass


# --- output -------------------------------------------------------------------


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if not math.isfinite(value):
            return "unbounded" if value > 0 else "n/a"
        return repr(value)
    if value is UNBOUNDED:
        return str(value)
    return str(value)


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return "unbounded" if value > 0 else None
    if value is UNBOUNDED:
        return str(value)
    return value


def render(rows: Sequence[dict], columns: Sequence[str], fmt: str) -> str:
    if fmt == "json":
        data = [{c: _json_value(r.get(c)) for c in columns} for r in rows]
        return json.dumps(data, indent=2, ensure_ascii=False) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def _emit(args, rows, columns):
    text = render(rows, columns, args.out)
    if args.output and args.output != "-":
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- parser -------------------------------------------------------------------


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _default_seed() -> int:
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return DEFAULT_SEED
    try:
        return _seed(env)
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"{SEED_ENV}: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("output and run options")
    g.add_argument("--out", choices=("csv", "json"), default="csv", help="output format (default csv)")
    g.add_argument("-o", "--output", metavar="PATH", help="write to PATH instead of stdout")
    g.add_argument("--seed", type=_seed, default=None,
                   help=f"64-bit seed (default ${SEED_ENV} or {DEFAULT_SEED})")
    g.add_argument("--workers", type=_positive_int, default=None, help="worker threads (default: all CPUs)")
    g.add_argument("--config", "--geometry", dest="config", metavar="FILE",
                   help="key = value file with geometry, material and circuit overrides")

    parser = argparse.ArgumentParser(
        prog="qpcascade",
        description="Radiation-induced quasiparticle cascades in superconducting qubit chips.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("rates", parents=[common], help="Kaplan and power-balance scattering rates")
    p.add_argument("--material", action="append", choices=("Al", "n-Al", "Cu", "AlSi-wirebond", "trap-0.5K"),
                   help="material (repeatable; default Al, n-Al and Cu)")
    p.add_argument("--lengths", action="store_true", help="emit the scattering length table instead")
    p.add_argument("--model", choices=("canonical", "table"), default="canonical",
                   help="rate constants for --lengths (default canonical)")

    p = sub.add_parser("cascade", parents=[common], help="Monte Carlo down-conversion efficiency")
    p.add_argument("--ep-over-gap", type=float, nargs="+", default=[100.0], metavar="X",
                   help="initial phonon energy in units of the gap (default 100)")
    p.add_argument("--trials", type=_positive_int, default=10_000)
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--participation", type=float, help="superconductor participation ratio in [0, 1]")
    grp.add_argument("--ts-um", type=float, help="superconductor thickness (with --tn-um)")
    p.add_argument("--tn-um", type=float, help="normal-metal thickness (with --ts-um)")
    p.add_argument("--gap-k", type=float, default=None, help="gap in K (default aluminum)")
    p.add_argument("--medium-rule", choices=MEDIUM_RULES, default="thickness",
                   help="how a pair-breaking phonon picks its film (default thickness)")
    p.add_argument("--rejoin", action="store_true",
                   help="let phonons emitted by normal-metal electrons re-enter the common pool")
    p.add_argument("--kernel", choices=("cython", "python"), default=None, help="force a kernel")

    p = sub.add_parser("event", parents=[common], help="five-stage radiation event timeline")
    p.add_argument("--energy-mev", type=float, default=0.2)
    p.add_argument("--design", choices=("present", "improved"), default="present")
    p.add_argument("--efficiency", type=float, default=None, help="down-conversion efficiency (default 0.57)")
    p.add_argument("--frequency-ghz", type=float, default=None, help="qubit frequency (default 5)")

    p = sub.add_parser("design", help="improved-design estimators")
    dsub = p.add_subparsers(dest="action", metavar="ACTION")
    d = dsub.add_parser("participation", parents=[common], help="participation ratio of a bilayer")
    d.add_argument("--ts-um", type=float, default=0.1)
    d.add_argument("--tn-um", type=float, default=6.0)
    d.add_argument("--constant", type=float, default=1.65)
    d = dsub.add_parser("backside", parents=[common], help="damping by a lossy backside metal")
    d.add_argument("--r-eff-ohm", type=float, default=None)
    d.add_argument("--qubit-c-ff", type=float, default=None)
    d.add_argument("--coupling-fraction", type=float, default=None)
    d.add_argument("--f-ghz", type=float, default=None)
    d.add_argument("--series-l-nh", type=float, default=None)
    d = dsub.add_parser("trap", parents=[common], help="quasiparticle trap relaxation and diffusion")
    d.add_argument("--tc-trap-k", type=float, default=0.5)
    d.add_argument("--offset-k", type=float, default=1.0)
    d.add_argument("--v-e-mm-per-ns", type=float, default=2.03)
    d.add_argument("--mean-free-path-um", type=float, default=0.1)
    d.add_argument("--model", choices=("table", "fit"), default="table")

    p = sub.add_parser("escape", parents=[common], help="phonon escape through wirebonds")
    p.add_argument("--v-p-um-per-ns", type=float, default=None, help="phonon velocity (default aluminum)")

    p = sub.add_parser("conformance", parents=[common], help="computed values against published numbers")
    p.add_argument("--trials", type=_positive_int, default=20_000, help="cascade trials per point")
    return parser


# --- subcommands --------------------------------------------------------------


def _settings(args) -> Settings:
    return load_config(args.config) if args.config else Settings()


def _rates_rows(settings: Settings, names: List[str]):
    rows = []

    def add(material, quantity, energy, integral, fit):
        residual = (fit - integral) / integral if integral else float("nan")
        rows.append(dict(material=material, quantity=quantity, energy_K=energy,
                         rate_integral_per_ns=integral, rate_fit_per_ns=fit, rel_residual=residual))

    for name in names:
        mat = settings.material(name)
        if mat.is_superconductor:
            g = mat.gap_K
            for w in (1.05, 1.1, 1.2, 1.5, 2.0, 3.0, 5.0):
                add(name, "qp_scatter", w * g,
                    rates.qp_scatter_rate_integral(w * g, mat).rate_per_ns,
                    rates.qp_scatter_rate_fit(w * g, mat).rate_per_ns)
            for w in (2.1, 2.5, 3.0, 4.0, 5.0, 10.0, 20.0, 50.0):
                add(name, "pairbreak", w * g,
                    rates.phonon_pairbreak_rate_integral(w * g, mat).rate_per_ns,
                    rates.phonon_pairbreak_rate_fit(w * g, mat).rate_per_ns)
        else:
            # power balance next to the tabulated rounded constants
            tau = rates.ROUNDED_POWER_NS.get(name)
            for t in (0.5, 1.0, 2.0, 4.0, 20.0):
                pr = rates.power_rates(t, mat)
                add(name, "power_phonon", t, pr.phonon.rate_per_ns, t / tau[0] if tau else float("nan"))
                add(name, "power_electron", t, pr.electron.rate_per_ns, t**3 / tau[1] if tau else float("nan"))
    return rows


def cmd_rates(args):
    settings = _settings(args)
    names = args.material or ["Al", "n-Al", "Cu"]
    if args.lengths:
        films = {"Cu": (settings.material("Cu"), 3.0), "Al": (settings.material("Al"), 0.1)}
        table = rates.length_table(films=films, model=args.model)
        cols = ["material", "energy_K", "film_thickness_um", "carrier", "carrier_rate_per_ns",
                "diffusion_length_um", "phonon_rate_per_ns", "phonon_length_um", "model"]
        _emit(args, [{c: getattr(r, c) for c in cols} for r in table], cols)
        return 0
    _emit(args, _rates_rows(settings, names), RATES_COLUMNS)
    return 0


def cmd_cascade(args):
    settings = _settings(args)
    gap = args.gap_k if args.gap_k is not None else settings.material("Al").gap_K
    if (args.ts_um is None) != (args.tn_um is None):
        raise UsageError("--ts-um and --tn-um must be given together")
    if args.ts_um is not None:
        participation = participation_ratio(args.ts_um, args.tn_um)
    elif args.participation is not None:
        participation = args.participation
    else:
        participation = 1.0
    cfg = CascadeConfig(
        gap_K=gap,
        participation_s=participation,
        trials=args.trials,
        seed=args.seed,
        medium_rule=args.medium_rule,
        normal_phonons_rejoin=args.rejoin,
        workers=args.workers,
        kernel=args.kernel,
    )
    rows = []
    for x in args.ep_over_gap:
        if not x > 0:
            raise UsageError(f"--ep-over-gap values must be positive, got {x}")
        rows.append(run_trials(x * gap, cfg).summary_row())
    _emit(args, rows, CASCADE_COLUMNS)
    return 0


def cmd_event(args):
    settings = _settings(args)
    kw = {"deposit_energy_MeV": args.energy_mev, "design": args.design}
    if args.efficiency is not None:
        kw["conversion_efficiency"] = args.efficiency
    if args.frequency_ghz is not None:
        kw["qubit_frequency_GHz"] = args.frequency_ghz
    cfg = settings.event_config(**kw)
    base = ChipGeometry.improved() if args.design == "improved" else ChipGeometry()
    geom = settings.chip_geometry(base)
    mats = {"superconductor": settings.material("Al"), "trap": settings.material("trap-0.5K")}
    timeline = simulate_event(cfg, geom, mats)
    _emit(args, timeline.rows(), EVENT_COLUMNS)
    return 0


def cmd_design(args):
    settings = _settings(args)
    if args.action == "participation":
        x = participation_ratio(args.ts_um, args.tn_um, args.constant)
        row = dict(ts_um=args.ts_um, tn_um=args.tn_um, constant=args.constant, participation=x,
                   suppression=suppression_factor(args.ts_um, args.tn_um, args.constant))
    elif args.action == "backside":
        kw = {
            k: v
            for k, v in (
                ("r_eff_ohm", args.r_eff_ohm),
                ("qubit_c_fF", args.qubit_c_ff),
                ("coupling_fraction", args.coupling_fraction),
                ("f_GHz", args.f_ghz),
                ("series_l_nH", args.series_l_nh),
            )
            if v is not None
        }
        c = settings.backside_circuit(**kw)
        est = backside_estimate(c)
        row = dict(r_eff_ohm=c.r_eff_ohm, qubit_c_fF=c.qubit_c_fF, coupling_fraction=c.coupling_fraction,
                   f_GHz=c.f_GHz, q=est.q, inductor_impedance_ohm=est.inductor_impedance_ohm)
    else:
        t = trap_estimates(args.tc_trap_k, args.offset_k, args.v_e_mm_per_ns, args.mean_free_path_um, args.model)
        row = dict(tc_trap_K=args.tc_trap_k, energy_offset_K=args.offset_k, scatter_time_us=t.scatter_time_us,
                   diffusion_constant_um2_per_ns=t.diffusion_constant_um2_per_ns,
                   diffusion_length_um=t.diffusion_length_um)
    _emit(args, [row], list(row))
    return 0


def cmd_escape(args):
    settings = _settings(args)
    geom = settings.chip_geometry()
    v_p = args.v_p_um_per_ns if args.v_p_um_per_ns is not None else settings.material("Al").v_p_um_per_ns
    rate = phonon_escape_rate(geom, v_p)
    wb = geom.wirebonds
    row = dict(n_wirebonds=wb.count, wire_radius_um=wb.wire_radius_um, wire_length_mm=wb.wire_length_mm,
               mean_free_path_um=wb.mean_free_path_um, volume_um3=geom.substrate_volume_um3,
               v_p_um_per_ns=v_p, rate_per_ns=rate, escape_time_ms=1e-6 / rate)
    _emit(args, [row], list(row))
    return 0


def cmd_conformance(args):
    entries = conformance_report(trials=args.trials, seed=args.seed, workers=args.workers)
    cols = ["location", "quantity", "quoted", "computed", "rel_diff", "tolerance", "status", "note"]
    _emit(args, [e.row() for e in entries], cols)
    counts = summarize(entries)
    print(", ".join(f"{v} {k}" for k, v in counts.items()), file=sys.stderr)
    return 0


COMMANDS = {
    "rates": cmd_rates,
    "cascade": cmd_cascade,
    "event": cmd_event,
    "design": cmd_design,
    "escape": cmd_escape,
    "conformance": cmd_conformance,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        parser.print_usage(sys.stderr)
        print("run 'qpcascade --help' for the subcommand grammar", file=sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    if args.command == "design" and args.action is None:
        print("usage: qpcascade design {participation,backside,trap} [options]", file=sys.stderr)
        return 2
    try:
        if args.seed is None:
            args.seed = _default_seed()
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError, UnknownMaterialError) as exc:
        print(f"qpcascade {args.command}: error: {_message(exc)}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"qpcascade {args.command}: invalid input: {exc}", file=sys.stderr)
        return 2
    except (QuadratureError, CascadeLimitError, ArithmeticError) as exc:
        print(f"qpcascade {args.command}: numerical failure: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"qpcascade {args.command}: {exc}", file=sys.stderr)
        return 2


def _message(exc):
    return exc.args[0] if exc.args else str(exc)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
