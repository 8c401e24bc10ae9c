"""Command-line entry point: codebook inspection, single-frame runs,
figure-preset sweeps, and scenario analysis."""

from __future__ import annotations

import argparse
import json
import subprocess
import sys

import numpy as np

from . import __version__
from . import access as ac
from . import experiments as ex
from . import training as tr
from .channel import beam_widths, far_field_min_distance
from .config import ConfigError, scenario_from
from .protocol import compile_scenario, run_frame

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NONCONVERGED = 3


def build_id() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True, text=True, timeout=5, check=True,
        ).stdout.strip()
        return f"risra-{__version__}+g{out}"
    except Exception:
        return f"risra-{__version__}"


def _scenario_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value scenario file")
    p.add_argument("--preset", help="named scenario preset (table1, fig4, ...)")
    p.add_argument("--override", action="append", default=[], metavar="K=V",
                   help="scenario override, repeatable")


def _csv_comments(cfg, seed) -> list[str]:
    return [
        f"build {build_id()}",
        f"master seed {seed}",
        "config " + json.dumps(cfg.to_dict(), sort_keys=True),
        "noise_dbm default comes from companion material, not the "
        "reference parameter set",
    ]


def cmd_codebook(args) -> int:
    cfg = scenario_from(args.preset, args.config, args.override)
    sc = compile_scenario(cfg)
    geom, radio = sc.geom, sc.radio

    if args.kind == "train":
        if args.stat:
            stats = tr.codebook_statistics(geom, radio, args.epsilon)
            n = getattr(stats, f"{args.stat}_bound")
            print(f"n_tr ({args.stat}, epsilon={args.epsilon:g}): {n}  "
                  f"[median={stats.median_bound} maximum={stats.max_bound} "
                  f"taylor={stats.taylor_bound}]")
        else:
            n = args.n or sc.n_tr
        codebook = tr.design_training_codebook(geom, radio, cfg.theta_ap, n)
        print(f"training codebook: {len(codebook)} configurations, "
              f"sample period {(np.pi / 2) / len(codebook):.6g} rad")
    elif args.kind == "access":
        bound = ac.access_lower_bound(geom, radio, cfg.tau)
        n = args.n or max(int(round(cfg.kappa)), bound)
        codebook = ac.design_access_codebook(geom, radio, cfg.theta_ap, cfg.tau, n)
        print(f"access codebook: {len(codebook)} configurations, lower bound {bound}, "
              f"tau={cfg.tau:g}, x_tau={ac.solve_x_tau(cfg.tau):.4f}")
    else:  # ack-precoding
        from .access import DecodeResult
        from .ack import design_ack_precoding
        base = ac.design_access_codebook(geom, radio, cfg.theta_ap, cfg.tau, sc.n_ac)
        slots = ([int(s) for s in args.slots.split(",")] if args.slots
                 else list(range(sc.n_ac)))
        fake = DecodeResult(frozenset(slots), frozenset(slots), {s: s for s in slots})
        design = design_ack_precoding(fake, base, geom, radio, cfg.theta_ap,
                                      cfg.gamma_ack, cfg.l_ack)
        codebook = design.codebook
        print(f"precoding ACK codebook: 1 configuration at "
              f"{float(codebook.angles[0]):.6g} rad (mean of {len(slots)} slots)")

    if args.out:
        header = "n,theta_rad," + ",".join(f"phase_{m}" for m in range(geom.m_x))
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            for line in _csv_comments(cfg, cfg.seed):
                fh.write(f"# {line}\n")
            fh.write(header + "\n")
            for i in range(len(codebook)):
                phases = ",".join(f"{p:.9g}" for p in codebook.dl_phases[i])
                fh.write(f"{i},{float(codebook.angles[i]):.9g},{phases}\n")
        print(f"wrote {len(codebook)} rows to {args.out}")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = scenario_from(args.preset, args.config, args.override)
    seed = args.seed if args.seed is not None else cfg.seed
    sc = compile_scenario(cfg)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0,)))
    outcome = run_frame(sc, rng, trace=True)
    t = outcome.timing
    print(f"scenario: policy={cfg.policy} ack={cfg.ack_mode} kappa={cfg.kappa:g} "
          f"n_tr={sc.n_tr} n_ac={sc.n_ac} seed={seed}")
    print(f"contenders: {outcome.k}")
    for ue in sorted(outcome.access_sets):
        print(f"  ue {ue}: slots {list(outcome.access_sets[ue].slots)}")
    print(f"decoded: {sorted(outcome.decoded.decoded_ues)} "
          f"(slots {sorted(outcome.decoded.decode_slots)})")
    if outcome.acked is not None:
        print(f"acked: {sorted(outcome.acked.acked)}")
    print(f"timing: T_tr={t.t_tr:g} T_ac={t.t_ac:g} T_ack={t.t_ack:g} total={t.total:g}")
    print("note: noise_dbm default comes from companion material "
          f"(sigma^2 = {cfg.noise_dbm:g} dBm)")
    record = {
        "k": outcome.k,
        "decoded": sorted(outcome.decoded.decoded_ues),
        "acked": sorted(outcome.acked.acked) if outcome.acked else None,
        "duration": t.total,
        "seed": seed,
        "build": build_id(),
    }
    print("record " + json.dumps(record, sort_keys=True))
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = scenario_from(args.preset_scenario, args.config, args.override)
    seed = args.seed if args.seed is not None else cfg.seed
    trials = args.trials if args.trials is not None else cfg.trials
    policies = [args.policy] if args.policy else None
    if policies is None and any(o.split("=", 1)[0].strip() == "policy"
                                for o in args.override):
        policies = [cfg.policy]  # an explicit policy override restricts rows
    rows = ex.run_preset(args.preset, trials, seed, threads=args.threads,
                         policies=policies)
    out = args.out or f"{args.preset}.csv"
    ex.write_csv(rows, out, _csv_comments(cfg, seed))
    print(f"wrote {len(rows)} rows to {out}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    cfg = scenario_from(args.preset, args.config, args.override)
    sc = compile_scenario(cfg)
    geom, radio = sc.geom, sc.radio
    bw = beam_widths(geom, radio)
    print(f"wavelength: {radio.wavelength:.6g} m; panel {geom.panel_width:.4g} x "
          f"{geom.panel_height:.4g} m ({geom.m_x}x{geom.m_z} elements)")
    print(f"far-field minimum distance: {far_field_min_distance(geom, radio):.4g} m "
          f"(d_min = {cfg.d_min_m:g} m)")
    print(f"beam widths (sin-space): FNBW={bw.fnbw:.6g} HPBW={bw.hpbw:.6g} "
          f"coverage={bw.coverage_count}")
    print(f"access lower bound (tau={cfg.tau:g}): "
          f"{ac.access_lower_bound(geom, radio, cfg.tau)}; n_ac={sc.n_ac}")
    e_beta = ac.expected_ul_pathloss(geom, radio, cfg.gain_ap, cfg.gain_ue,
                                     cfg.d_ap_m, cfg.d_min_m, cfg.d_max_m)
    rho_min = ac.min_ue_power(geom, radio, cfg.gain_ap, cfg.gain_ue, cfg.d_ap_m,
                              cfg.d_min_m, cfg.d_max_m, cfg.gamma_ac, cfg.tau,
                              cfg.noise_power)
    print(f"expected uplink pathloss: {e_beta:.6g}")
    print(f"minimum UE power for the threshold: {rho_min:.6g} W "
          f"({10 * np.log10(rho_min * 1000):.2f} dBm); configured {cfg.rho_ue:.6g} W")
    print(f"training: n_tr={sc.n_tr}, L_tr={sc.training.symbols_per_slot}, "
          f"delta_tol={sc.delta_tol:.6g} (se_target={cfg.se_target:g})")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="risra",
                                     description="RIS-assisted random access simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("codebook", help="design and export a configuration codebook")
    p.add_argument("kind", choices=["train", "access", "ack-precoding"])
    _scenario_args(p)
    p.add_argument("--n", type=int, help="explicit codebook size")
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--stat", choices=["median", "maximum", "taylor"],
                   help="size the training codebook from the bandwidth statistics")
    p.add_argument("--slots", help="decoded slots for ack-precoding (comma list)")
    p.add_argument("--out", help="CSV output path")
    p.set_defaults(func=cmd_codebook)

    p = sub.add_parser("run", help="trace a single frame")
    _scenario_args(p)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a figure-preset Monte Carlo sweep")
    p.add_argument("--preset", required=True,
                   choices=sorted(ex.SWEEP_PRESETS))
    p.add_argument("--preset-scenario", help="scenario preset overriding the sweep base")
    p.add_argument("--config")
    p.add_argument("--override", action="append", default=[], metavar="K=V")
    p.add_argument("--policy", help="restrict to a single policy")
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("analyze", help="print scenario-level analysis")
    _scenario_args(p)
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except tr.AnalysisConvergenceError as err:
        print(f"numerical non-convergence: {err}", file=sys.stderr)
        return EXIT_NONCONVERGED


if __name__ == "__main__":
    sys.exit(main())
