"""Command line entry points; every subcommand writes JSON (or CSV) and exits 0, or 2 on partial failure."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import math
import sys

import numpy as np

from . import radial, schematic
from .errors import FewBodyError
from .observables import report
from .scan import (ChannelEnergy, fit_power_law, find_threshold, mass_scan, scaling_factor,
                   sweep_strength, write_csv, write_json, _json_default)
from .svm import SvmConfig, grow_basis, refine_basis
from .system import (PairPotential, SystemSpec, WidthConvention, characteristic_energy,
                     reduced_strength)

HEAVY_N = 7
THRESHOLD_COLUMNS = ["n", "state", "v0_over_Es", "v0_reduced", "a_over_b", "msr", "r_d", "method"]


def _load_config(args, **overrides) -> SvmConfig:
    data = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            data = json.load(fh)
    known = {f.name for f in dataclasses.fields(SvmConfig)}
    unknown = set(data) - known
    if unknown:
        raise SystemExit(f"unknown config keys: {sorted(unknown)}")
    data.update({k: v for k, v in overrides.items() if v is not None})
    if getattr(args, "seed", None) is not None:
        data["seed"] = args.seed
    return SvmConfig(**data)


def _emit(obj, out: str | None) -> None:
    if out:
        write_json(obj, out)
    else:
        json.dump(obj, sys.stdout, indent=2, default=_json_default)
        sys.stdout.write("\n")


def _check_heavy(n: int, args) -> None:
    if n >= HEAVY_N and not args.heavy:
        raise SystemExit(f"N = {n} takes hours on a desktop; pass --heavy to run it anyway")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="output file (JSON, or CSV where noted)")
    p.add_argument("--config", default=None, help="JSON file with SvmConfig fields")


# ------------------------------------------------------------------ commands

def cmd_scatlen(args) -> int:
    pot = PairPotential(args.v0, args.b, WidthConvention(args.convention))
    if args.mass_ratio is not None:
        mu = args.mass_ratio / (1.0 + args.mass_ratio)
    else:
        mu = args.mu
    res = radial.scattering_length(pot, mu)
    levels = radial.bound_energies(pot, mu)
    es = 1.0 / args.b**2
    _emit({"a_over_b": res.scattering_length / args.b if not res.diverged else None,
           "diverged": res.diverged,
           "bound_energies_over_Es": [e / es for e in levels],
           "node_count": res.node_count}, args.out)
    return 0


def _depth(args, mu: float) -> float:
    if args.unitarity:
        return radial.critical_strength(1, mu, b=args.b)
    if args.a_over_b is not None:
        branch = 1 if args.a_over_b > 0 else 0
        return radial.strength_for_scattering_length(args.a_over_b, branch, mu, b=args.b)
    if args.v0 is None:
        raise SystemExit("give one of --v0, --a-over-b, --unitarity")
    return args.v0


def cmd_solve(args) -> int:
    _check_heavy(args.n, args)
    cfg = _load_config(args, target_states=args.states, basis_max=args.basis_max,
                       threshold_mode=args.threshold_mode or None)
    if args.mass_ratio is not None and args.mass_ratio != 1.0:
        mu = args.mass_ratio / (1.0 + args.mass_ratio)
        spec = SystemSpec.with_light(args.n, args.mass_ratio, _depth(args, mu), args.b)
    else:
        spec = SystemSpec.identical(args.n, _depth(args, 0.5), args.b)
    ens = refine_basis(grow_basis(spec, cfg), cfg)
    es = characteristic_energy(spec)
    record = {
        "spec": spec.to_dict(),
        "cfg": dataclasses.asdict(cfg),
        "energies_over_Es": list(ens.energies / es),
        "v0_reduced": reduced_strength(spec.potential.v0, spec.potential.b, spec.heavy_mass),
        "basis_alphas": ens.alphas.tolist(),
        "history": [h.tolist() for h in ens.history],
        "observables": report(ens).to_dict(),
    }
    _emit(record, args.out)
    return 0


def cmd_scan(args) -> int:
    _check_heavy(args.n, args)
    cfg = _load_config(args, target_states=args.states, basis_max=args.basis_max)
    grid = np.linspace(args.v0_start, args.v0_stop, args.points)
    recs = sweep_strength(args.n, grid, cfg, args.b, args.mass_ratio)
    if args.out:
        write_csv(recs, args.out)
        write_json([r.to_dict() for r in recs], args.out.rsplit(".", 1)[0] + ".json")
    else:
        writer = csv.DictWriter(sys.stdout, fieldnames=list(recs[0].csv_row()) if recs else [])
        writer.writeheader()
        for r in recs:
            writer.writerow(r.csv_row())
    return 0 if all(r.ok for r in recs) else 2


def cmd_threshold(args) -> int:
    cfg = _load_config(args, basis_max=args.basis_max, threshold_mode=True)
    rows, failed = [], False
    # each N starts at, and knows about, the ground threshold of the previous N
    v_start, known = args.v_bound, args.channel_threshold
    for n in sorted(args.n):
        _check_heavy(n, args)
        ground = None
        for state in sorted(args.states):
            try:
                ch = ChannelEnergy(n, cfg, args.b, known_threshold=known)
                res = find_threshold(n, state, cfg, v_bound=v_start, b=args.b, channel=ch)
            except FewBodyError as exc:
                logging.error("N=%d state %d: %s", n, state, exc)
                failed = True
                continue
            rows.append(res)
            if state == 0:
                ground = res.v0
        if ground is not None:
            v_start, known = ground, ground
    out_rows = [{"n": r.n, "state": r.state, "v0_over_Es": r.v0, "v0_reduced": r.v0_reduced,
                 "a_over_b": r.a_over_b, "msr": r.msr, "r_d": r.r_d, "method": r.method}
                for r in rows]
    if args.out and args.out.endswith(".csv"):
        with open(args.out, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=THRESHOLD_COLUMNS)
            writer.writeheader()
            writer.writerows(out_rows)
    else:
        _emit([r.to_dict() for r in rows], args.out)
    return 2 if failed else 0


def cmd_scaling(args) -> int:
    cfg = _load_config(args, basis_max=args.basis_max, threshold_mode=True)
    _emit(scaling_factor(cfg, args.b).to_dict(), args.out)
    return 0


def cmd_fit(args) -> int:
    radii = {}
    with open(args.input) as fh:
        for row in csv.DictReader(fh):
            if int(row["state"]) == args.state:
                radii[int(row["n"])] = float(row["msr"])
    fit = fit_power_law(radii, tuple(args.range) if args.range else None)
    _emit(fit.to_dict(), args.out)
    return 0


def cmd_mass_scan(args) -> int:
    _check_heavy(args.n_plus_1, args)
    cfg = _load_config(args, basis_max=args.basis_max)
    recs = mass_scan(args.n_plus_1, args.ratios, cfg, args.b)
    _emit([r.to_dict() for r in recs], args.out)
    return 0 if all(r.error is None for r in recs) else 2


def cmd_schematic(args) -> int:
    if args.mode == "oscillator":
        out = []
        for n in args.n:
            v = schematic.oscillator_threshold_strength(n, args.omega)
            b0, b1 = schematic.threshold_brackets(n)
            out.append({"N": n, "V_th": v,
                        "E0": schematic.oscillator_energy(n, 0, args.omega, v),
                        "E1": schematic.oscillator_energy(n, 1, args.omega, v),
                        "E1_single_quantum": schematic.oscillator_energy(
                            n, 1, args.omega, v, schematic.SINGLE_QUANTUM),
                        "msr0": schematic.oscillator_msr(n, 0, args.omega),
                        "bracket0_times_N": b0 * n, "bracket1_times_N": b1 * n})
        _emit(out, args.out)
        return 0
    if len(args.v0_reduced) != len(args.n) or len(args.r2) != len(args.n) \
            or len(args.r2_excited) != len(args.n):
        raise SystemExit("--n, --v0-reduced, --r2 and --r2-excited need equal lengths")
    rows = [schematic.halo_row(n, v, r0, r1).to_dict()
            for n, v, r0, r1 in zip(args.n, args.v0_reduced, args.r2, args.r2_excited)]
    _emit(rows, args.out)
    return 0


# -------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fewbody", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scatlen", help="two-body scattering length and bound states")
    p.add_argument("--v0", type=float, required=True, help="depth in E_s")
    p.add_argument("--b", type=float, default=1.0)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--mu", type=float, default=0.5)
    g.add_argument("--mass-ratio", type=float, default=None)
    p.add_argument("--convention", default="EXP_R2_OVER_B2",
                   choices=[c.value for c in WidthConvention])
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_scatlen)

    p = sub.add_parser("solve", help="SVM solve for one system")
    p.add_argument("--n", type=int, required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--v0", type=float)
    g.add_argument("--a-over-b", type=float)
    g.add_argument("--unitarity", action="store_true")
    p.add_argument("--mass-ratio", type=float, default=None)
    p.add_argument("--states", type=int, default=1)
    p.add_argument("--basis-max", type=int, default=None)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--threshold-mode", action="store_true")
    p.add_argument("--heavy", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("scan", help="strength sweep, CSV output")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--v0-start", type=float, required=True)
    p.add_argument("--v0-stop", type=float, required=True)
    p.add_argument("--points", type=int, default=5)
    p.add_argument("--states", type=int, default=2)
    p.add_argument("--mass-ratio", type=float, default=None)
    p.add_argument("--basis-max", type=int, default=None)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--heavy", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("threshold", help="binding thresholds (CSV if --out ends in .csv)")
    p.add_argument("--n", type=int, nargs="+", required=True)
    p.add_argument("--states", type=int, nargs="+", default=[0])
    p.add_argument("--v-bound", type=float, default=None, help="bound starting depth in E_s")
    p.add_argument("--channel-threshold", type=float, default=None,
                   help="(N-1)-body threshold depth; the channel is zero on its shallow side")
    p.add_argument("--basis-max", type=int, default=None)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--heavy", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("scaling-factor", help="trimer scaling factor at unitarity")
    p.add_argument("--basis-max", type=int, default=300)
    p.add_argument("--b", type=float, default=1.0)
    _common(p)
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("fit-powerlaw", help="fit <r^2>_th = C (N-1)^p to a threshold CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--state", type=int, default=0)
    p.add_argument("--range", type=int, nargs=2, default=None)
    _common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("mass-scan", help="vary the mass of one particle at heavy-light unitarity")
    p.add_argument("--n-plus-1", type=int, required=True)
    p.add_argument("--ratios", type=float, nargs="+", default=[1.0, 0.5, 0.2, 0.1])
    p.add_argument("--basis-max", type=int, default=None)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--heavy", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_mass_scan)

    p = sub.add_parser("schematic", help="oscillator and folding estimates")
    p.add_argument("mode", choices=["oscillator", "folding"])
    p.add_argument("--n", type=int, nargs="+", default=[3, 4, 5, 6])
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--v0-reduced", type=float, nargs="+",
                   default=[-1.066, -0.853, -0.704, -0.607])
    p.add_argument("--r2", type=float, nargs="+", default=[43.6, 8.0, 5.6, 3.7])
    p.add_argument("--r2-excited", type=float, nargs="+", default=[47.1, 19.7, 12.2, 4.9])
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_schematic)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except FewBodyError as exc:
        logging.error("%s: %s", type(exc).__name__, exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
