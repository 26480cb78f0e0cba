"""Command-line front end: ``kerrcat <command> [action] --config FILE --out DIR``.

Every run validates the config first (exit 2 and nothing written on error),
then writes ``manifest_<command>.json`` marked incomplete, computes, writes its CSV/JSON
artifacts and marks the manifest complete. Module errors exit with status 1.
"""

import argparse
import math
import os
import sys

import numpy as np

from . import channel, dynamics, gates, model, readout
from .bench import drb as drb_mod
from .bench import gst as gst_mod
from .bench.noise import GateNoiseModel
from .config import ConfigError, config_hash, load_config
from .errors import KerrCatError
from .io import Manifest, read_csv, read_lines, write_csv, write_json, write_lines


# spectrum

def cmd_spectrum(cfg, args, man):
    s = cfg.spectrum
    rep = model.spectrum_vs_detuning(s.eps2_K, 1.0, s.delta_grid_K, dim=s.dim, m=s.levels, threshold=s.threshold_K)
    rows = [(d, k, e) for d, lev in zip(rep.deltas, rep.levels) for k, e in enumerate(lev)]
    write_csv(man.file("spectrum.csv"), ["delta_K", "level", "energy_K"], rows)
    points = [{"delta_K": d, "pair_gaps_K": g, "degenerate_pairs": f}
              for d, g, f in zip(rep.deltas, rep.pair_gaps, rep.degenerate)]
    flagged = [float(d) for d, f in zip(rep.deltas, rep.degenerate) if f]
    write_json(man.file("degeneracy.json"), {"eps2_K": s.eps2_K, "threshold_K": rep.threshold,
                                             "points": points, "degenerate_deltas_K": flagged})
    return ["spectrum.csv", "degeneracy.json"], {"degenerate_deltas_K": flagged}


# lifetimes

def _fit_row(fit, cfg):
    t = cfg.time_to_us(fit.T)
    return t, cfg.time_to_us(fit.sigma_T), fit.lower_bound


def cmd_lifetimes(cfg, args, man):
    lc = cfg.lifetimes
    noise = cfg.noise_params(kappa1_only=lc.kappa1_only)
    rows, traj_rows = [], []
    for d in lc.delta_grid_K:
        p = cfg.kerr_params(delta_K=d)
        kw = dict(seed=cfg.seed, n_points=lc.n_points, n_samples=lc.n_samples, threads=args.threads,
                  return_trajectory=True)
        fz, tz = dynamics.bit_flip_time(p, noise, cfg.time_to_internal(lc.t_max_z_us), **kw)
        fy, ty = dynamics.phase_flip_time(p, noise, cfg.time_to_internal(lc.t_max_y_us), **kw)
        rows.append((d, cfg.hamiltonian.nbar, p.dim) + _fit_row(fz, cfg) + _fit_row(fy, cfg))
        for kind, tr in (("T_z", tz), ("T_y", ty)):
            for name in sorted(tr.observables):
                for t, v in zip(tr.times, tr[name]):
                    traj_rows.append((d, kind, cfg.time_to_us(t), name, float(v)))
    write_csv(man.file("lifetimes.csv"),
              ["delta_K", "nbar", "dim", "T_z_us", "sigma_T_z_us", "T_z_lower_bound",
               "T_y_us", "sigma_T_y_us", "T_y_lower_bound"], rows)
    write_csv(man.file("trajectories.csv"), ["delta_K", "experiment", "t_us", "observable", "value"], traj_rows)
    return ["lifetimes.csv", "trajectories.csv"], None


# initialization

def cmd_init(cfg, args, man):
    ic = cfg.init
    p = cfg.kerr_params()
    noise = cfg.noise_params() if ic.dissipation else None
    tr = dynamics.initialization_sim(p, noise, cfg.time_to_internal(ic.ramp_us), cfg.time_to_internal(ic.relax_us),
                                     n_points=ic.n_points)
    names = ["p_plus", "p_minus", "leakage", "n"]
    rows = [(cfg.time_to_us(t),) + tuple(float(tr[k][i]) for k in names) for i, t in enumerate(tr.times)]
    write_csv(man.file("init_trajectory.csv"), ["t_us"] + names, rows)
    return ["init_trajectory.csv"], {"final_leakage": float(tr["leakage"][-1])}


# chevrons

def cmd_chevron(cfg, args, man):
    cc = cfg.chevron
    p = cfg.kerr_params()
    frame = model.cat_frame(p)
    cx = gates.chevron_x(p, cc.delta0_grid_K, cc.t_gate_grid_K, initial=cc.initial, frame=frame,
                         threads=args.threads)
    write_csv(man.file("chevron_x.csv"), ["t_gate_K", "delta0_K", "expZ"],
              [(tg, d0, cx[i, j]) for i, tg in enumerate(cc.t_gate_grid_K) for j, d0 in enumerate(cc.delta0_grid_K)])
    cz = gates.chevron_z(p, cc.phase_grid, cc.duration_grid_K, cc.omega_K, frame=frame, threads=args.threads)
    write_csv(man.file("chevron_z.csv"), ["duration_K", "phase_rad", "expY"],
              [(t, ph, cz[i, j]) for i, t in enumerate(cc.duration_grid_K) for j, ph in enumerate(cc.phase_grid)])
    names = ["chevron_x.csv", "chevron_z.csv"]
    if cc.optimize:
        pulse, fid, ch = gates.optimize_x_gate(p, frame=frame, threads=args.threads)
        write_json(man.file("x_gate.json"), {"delta0_K": pulse.delta0, "t_gate_K": pulse.t_gate,
                                             "t_gate_ns": 1e3 * cfg.time_to_us(pulse.t_gate),
                                             "process_fidelity": fid, "channel": ch.to_dict()})
        names.append("x_gate.json")
    return names, None


# readout

def cmd_readout(cfg, args, man):
    rc = cfg.readout
    flip = rc.flip_prob if rc.flip_prob is not None else readout.flip_prob_from_tz(rc.t_read_us, rc.t_z_us)
    c = readout.CqrParams(eps_cqr=cfg.mhz_to_internal(rc.eps_cqr_MHz), kappa_r=cfg.mhz_to_internal(rc.kappa_r_MHz),
                          t_read=cfg.time_to_internal(rc.t_read_us), noise_sigma=rc.noise_sigma,
                          flip_prob_per_read=flip)
    a = math.sqrt(cfg.hamiltonian.nbar)
    report = {"snr": readout.snr(c, a), "misassignment": readout.misassignment(c, a), "flip_prob_per_read": flip,
              "qndness_analytic": readout.qndness_analytic(c, a), "steady_pointer": readout.cqr_steady_state(c, a)}
    names = []
    if args.analytic:
        report["qndness"] = report["qndness_analytic"]
    else:
        records, q = readout.simulate_readout(c, rc.true_state, rc.shots, cfg.seed, a_expect=a)
        report["qndness"] = q
        write_csv(man.file("readout_histogram.csv"), ["shot", "pointer_re", "pointer_im", "label"],
                  [(k, r.pointer.real, r.pointer.imag, r.label) for k, r in enumerate(records)])
        names.append("readout_histogram.csv")
    write_json(man.file("qndness.json"), report)
    return names + ["qndness.json"], {"qndness": report["qndness"]}


# channel algebra

def cmd_twirl(cfg, args, man):
    g = channel.ErrorGenerator(cfg.twirl.h, cfg.twirl.p)
    ptm = channel.ptm_exp(channel.build_error_generator(g))
    dtw = channel.dihedral_twirl(ptm)
    report = {
        "generator": g.to_dict(),
        "ptm": ptm,
        "pauli_twirled_ptm": channel.pauli_twirl(ptm),
        "twirled_rates_formula": channel.twirled_probabilities(g),
        "twirled_rates_bruteforce": channel.pauli_rates_from_ptm(ptm),
        "infidelity": channel.pauli_channel_infidelity(g),
        "dihedral_twirl_diag": np.diag(dtw),
        "generator_gram_condition": channel.generator_gram_condition(),
    }
    write_json(man.file("twirl.json"), report)
    return ["twirl.json"], None


# dihedral RB

def _drb_noise(cfg):
    d = cfg.drb
    return GateNoiseModel(errors={"Z": channel.pauli_channel_ptm(d.p_x, d.p_y, d.p_z)}, noisy_identity=d.noisy_identity)


def _shots(args, shots):
    return None if args.analytic else shots


def cmd_drb(cfg, args, man):
    d = cfg.drb
    if args.action == "sample":
        lines = []
        for b in (1, 2):
            for n in d.depths:
                for s in range(d.samples_per_depth):
                    lines.append(f"{b} {n} {s} " + drb_mod.drb_sample(n, b, cfg.seed, s).to_line())
        write_lines(man.file("circuits.txt"), lines)
        return ["circuits.txt"], {"n_circuits": len(lines)}
    if args.action == "run":
        tables = drb_mod.drb_run(_drb_noise(cfg), d.depths, d.samples_per_depth, _shots(args, d.shots), cfg.seed,
                                 threads=args.threads)
        rows = [(b, n, s, v) for b in (1, 2) for n, vals in zip(tables[b]["depths"], tables[b]["samples"])
                for s, v in enumerate(vals)]
        write_csv(man.file("survival.csv"), ["basis", "depth", "sample", "survival"], rows)
        return ["survival.csv"], None
    if args.action == "fit":
        src = args.input or man.file("survival.csv")
        tables = _read_survival(src)
        res = drb_mod.drb_fit(tables, d.scale_bit, d.scale_ph, d.ph_mode)
        write_json(man.file("drb_result.json"), res.to_dict())
        return ["drb_result.json"], {"eta": res.to_dict()["eta"]}
    if args.action == "calibrate":
        samples = d.calibration_samples
        sb, sp, rows = drb_mod.drb_scaling_calibration(
            d.calibration_grid, seed=cfg.seed, depths=tuple(d.calibration_depths),
            shots=_shots(args, d.shots) if samples else None, samples_per_depth=samples,
            bit_fraction=d.calibration_bit_fraction, ph_mode=d.ph_mode, threads=args.threads)
        write_json(man.file("slopes.json"), {"scale_bit": sb, "scale_ph": sp, "ph_mode": d.ph_mode, "rows": rows})
        return ["slopes.json"], {"scale_bit": sb, "scale_ph": sp}
    raise ValueError(f"unknown drb action {args.action!r}")


def _read_survival(path):
    if not os.path.exists(path):
        raise FileNotFoundError(f"{path}: no survival table; run 'drb run' first or pass --input")
    acc = {1: {}, 2: {}}
    for r in read_csv(path):
        acc[int(r["basis"])].setdefault(int(r["depth"]), []).append(float(r["survival"]))
    tables = {}
    for b, by_depth in acc.items():
        depths = sorted(by_depth)
        tables[b] = {"depths": depths, "S": [float(np.mean(by_depth[n])) for n in depths]}
        if len({len(v) for v in by_depth.values()}) == 1:
            tables[b]["samples"] = [by_depth[n] for n in depths]
    return tables


# gate set tomography

def _gst_noise(cfg):
    gc = cfg.gst

    def err(h, p):
        return channel.ptm_exp(channel.build_error_generator(channel.ErrorGenerator(h, p)))

    return GateNoiseModel(errors={"X": err(gc.x_h, gc.x_p), "Z": err(gc.z_h, gc.z_p)})


def cmd_gst(cfg, args, man):
    gc = cfg.gst
    circ_path = man.file("gst_circuits.txt")
    if args.action == "generate":
        circs = gst_mod.gst_generate(tuple(gc.max_lengths))
        write_lines(circ_path, [c.to_line() for c in circs])
        return ["gst_circuits.txt"], {"n_circuits": len(circs)}
    if args.action == "simulate":
        if os.path.exists(circ_path):
            circs = [gst_mod.GstCircuit.from_line(ln) for ln in read_lines(circ_path)]
        else:
            circs = gst_mod.gst_generate(tuple(gc.max_lengths))
        ds = gst_mod.gst_simulate(circs, _gst_noise(cfg), _shots(args, gc.shots), cfg.seed, threads=args.threads)
        write_csv(man.file("gst_dataset.csv"), ["circuit_id", "circuit", "n0", "n1"],
                  [(k, c.to_line(), a, b) for k, (c, a, b) in enumerate(zip(ds.circuits, ds.n0, ds.n1))])
        return ["gst_dataset.csv"], {"n_circuits": len(circs)}
    if args.action == "estimate":
        src = args.input or man.file("gst_dataset.csv")
        if not os.path.exists(src):
            raise FileNotFoundError(f"{src}: no dataset; run 'gst simulate' first or pass --input")
        rows = read_csv(src)
        circs = [gst_mod.GstCircuit.from_line(r["circuit"]) for r in rows]
        n0 = np.array([float(r["n0"]) for r in rows])
        n1 = np.array([float(r["n1"]) for r in rows])
        ds = gst_mod.GstDataset(circs, n0, n1)
        res = gst_mod.lgst_estimate(ds, refine=gc.refine)
        gates_out = {}
        for lab, g in res.gates.items():
            entry = {"ptm": g, "process_fidelity": gates.process_fidelity(g, gst_mod.IDEAL[lab])}
            try:
                gen, resid = channel.decompose_generator(channel.ptm_log(g @ np.linalg.inv(gst_mod.IDEAL[lab])))
                entry["error_generator"] = gen.to_dict()
                entry["generator_residual"] = resid
            except KerrCatError as exc:
                entry["error_generator"] = None
                entry["generator_error"] = str(exc)
            gates_out[lab] = entry
        write_json(man.file("gst_estimate.json"), {"gates": gates_out, "fiducial_condition": res.condition,
                                                   "refined": gc.refine})
        return ["gst_estimate.json"], None
    raise ValueError(f"unknown gst action {args.action!r}")


COMMANDS = {
    "spectrum": (cmd_spectrum, None, "energy levels along a detuning sweep"),
    "lifetimes": (cmd_lifetimes, None, "T_z and T_y from Lindblad idling"),
    "init": (cmd_init, None, "cat preparation by ramping the two-photon drive"),
    "chevron": (cmd_chevron, None, "X and Z gate chevrons"),
    "readout": (cmd_readout, None, "cat-quadrature readout and QNDness"),
    "twirl": (cmd_twirl, None, "error-generator and twirl report"),
    "drb": (cmd_drb, ("sample", "run", "fit", "calibrate"), "dihedral randomized benchmarking"),
    "gst": (cmd_gst, ("generate", "simulate", "estimate"), "gate set tomography"),
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (defaults apply when omitted)")
    common.add_argument("--out", help="output directory (default: config output_dir or ./out)")
    common.add_argument("--seed", type=int, help="master seed, overrides the config")
    common.add_argument("--threads", type=int, default=1, help="worker threads; results do not depend on it")
    common.add_argument("--analytic", action="store_true", help="exact probabilities instead of finite shots")
    parser = argparse.ArgumentParser(prog="kerrcat", description="Kerr-cat qubit simulations")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, actions, helptext) in COMMANDS.items():
        sp = sub.add_parser(name, parents=[common], help=helptext)
        if actions:
            sp.add_argument("action", choices=actions)
            sp.add_argument("--input", help="input table (default: the file in --out)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("kerrcat: --threads must be at least 1", file=sys.stderr)
        return 2
    if args.seed is not None and args.seed < 0:
        print("kerrcat: --seed must be non-negative", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        for msg in exc.messages:
            print(msg, file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg = cfg.model_copy(update={"seed": args.seed})
    out = args.out or cfg.output_dir or "out"
    os.makedirs(out, exist_ok=True)
    fn, actions, _ = COMMANDS[args.command]
    label = args.command + (f" {args.action}" if actions else "")
    man = Manifest(out, label, config_hash(cfg), cfg.seed)
    try:
        names, summary = fn(cfg, args, man)
    except (KerrCatError, FileNotFoundError, ValueError) as exc:
        man.fail(f"{type(exc).__name__}: {exc}")
        print(f"kerrcat {label}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    man.complete(names, summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
