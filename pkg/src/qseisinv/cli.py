"""Command-line front end.

Subcommands:
  synth      generate a synthetic truth/prior/observed bundle
  invert     train the hybrid model on observed data and write estimates
  gradcheck  compare the four gradient engines on one quantum node
  forward    run the physics decoder on stored impedance files

Every command writes delimited-text outputs plus rendered figures into
--out, along with a manifest and a re-runnable resolved config. All
randomness flows from the single seed; re-running with the same seed
and --threads 1 reproduces the numeric outputs byte for byte (figures
and manifest timestamps aside).

Exit codes: 0 success, 1 usage/config error, 2 runtime/numeric error.
"""
from __future__ import annotations

import argparse
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .embedding import EmbeddingError, EmbeddingSpec
from .encoder import init_parameters
from .figures import (
    save_gather_comparison,
    save_impedance_profiles,
    save_loss_curve,
    save_section_images,
)
from .forward import ImpedanceModel, SeismicGather, forward_model, ricker
from .gradients import (
    jacobian_adjoint,
    jacobian_finite_difference,
    jacobian_parameter_shift,
    spsa_loss_gradient,
)
from .inversion import (
    InversionConfig,
    InversionTask,
    TrainingError,
    evaluate,
    train,
)
from .qnode import QNodeSpec, qnode_forward
from .synthetic import post_stack_bundle, pre_stack_bundle, section_bundles
from .textio import (
    ConfigError,
    InputFileError,
    dump_config,
    load_config,
    read_matrix,
    resolve_config,
    write_manifest,
    write_matrix,
)

_ANSATZ_FLAG = {
    "rx": ("basic-entangler", "x"),
    "ry": ("basic-entangler", "y"),
    "rz": ("basic-entangler", "z"),
    "none": ("none", "x"),
}


class _Parser(argparse.ArgumentParser):
    # usage errors exit 1, not argparse's default 2
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qseisinv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_data=False):
        p.add_argument("--config", type=Path, help="key = value config file")
        p.add_argument("--out", type=Path, required=True, help="output directory")
        if needs_data:
            p.add_argument("--data", type=Path, required=True, help="input directory")
        p.add_argument("--seed", type=int, help="override rng_seed")
        p.add_argument(
            "--grad",
            choices=["parameter-shift", "adjoint", "finite-difference", "spsa"],
            help="override grad_method",
        )
        p.add_argument("--ansatz", choices=sorted(_ANSATZ_FLAG), help="override ansatz")
        p.add_argument("--qubits", type=int, help="override n_qubits (0 = derive)")
        p.add_argument("--epochs", type=int, help="override epochs")
        p.add_argument("--lr", type=float, help="override learning_rate")
        p.add_argument("--lambda", dest="reg", type=float, help="override reg_weight")
        p.add_argument("--angles", help="override angles, e.g. 5,15,25")
        p.add_argument("--freq", type=float, help="override wavelet_frequency")
        p.add_argument("--threads", type=int, help="thread cap (1 = sequential)")
        p.add_argument(
            "--no-figures", action="store_true", help="skip figure rendering"
        )

    common(sub.add_parser("synth", help="generate synthetic data files"))
    common(sub.add_parser("invert", help="invert observed data"), needs_data=True)
    common(sub.add_parser("gradcheck", help="compare gradient engines"))
    common(sub.add_parser("forward", help="decoder only"), needs_data=True)
    return parser


def _resolved_config(args) -> dict:
    cfg = load_config(args.config) if args.config else resolve_config({})
    overrides = {
        "rng_seed": args.seed,
        "grad_method": args.grad,
        "n_qubits": args.qubits,
        "epochs": args.epochs,
        "learning_rate": args.lr,
        "reg_weight": args.reg,
        "wavelet_frequency": args.freq,
        "threads": args.threads,
    }
    for key, value in overrides.items():
        if value is not None:
            cfg[key] = value
    if args.angles is not None:
        cfg["angles"] = tuple(float(a) for a in args.angles.split(","))
    if args.ansatz is not None:
        cfg["ansatz"], cfg["rotation_axis"] = _ANSATZ_FLAG[args.ansatz]
    if cfg["threads"] < 1:
        raise ConfigError("threads must be >= 1")
    return cfg


def _inversion_config(cfg: dict) -> InversionConfig:
    try:
        return _build_inversion_config(cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _build_inversion_config(cfg: dict) -> InversionConfig:
    return InversionConfig(
        epochs=cfg["epochs"],
        learning_rate=cfg["learning_rate"],
        reg_weight=cfg["reg_weight"],
        rng_seed=cfg["rng_seed"],
        grad_method=cfg["grad_method"],
        fd_delta=cfg["fd_delta"],
        spsa_epsilon=cfg["spsa_epsilon"],
        spsa_num_samples=cfg["spsa_num_samples"],
        n_layers=cfg["n_layers"],
        rotation_axis=cfg["rotation_axis"],
        ansatz=cfg["ansatz"],
        n_qubits=cfg["n_qubits"],
        angles=cfg["angles"],
        wavelet_frequency=cfg["wavelet_frequency"],
        dt=cfg["dt"],
        gamma=cfg["gamma"],
        prior_window=cfg["prior_window"],
        bounds_margin=cfg["bounds_margin"],
        patience=cfg["patience"],
    )


def _suffix(i: int, n: int) -> str:
    return "" if n == 1 else f"_s{i}"


def _write_common(out: Path, cfg: dict, command: str, extra: dict) -> None:
    (out / "config_resolved.cfg").write_text(dump_config(cfg))
    entries = {
        "command": command,
        "version": __version__,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "seed": cfg["rng_seed"],
        "mode": cfg["mode"],
        "threads": cfg["threads"],
        "config_resolved": str(out / "config_resolved.cfg"),
    }
    entries.update(extra)
    write_manifest(out / "manifest.txt", entries)


def _synth_bundles(cfg: dict):
    mode = cfg["mode"]
    if mode == "post-stack-1d":
        return [
            post_stack_bundle(
                n_samples=cfg["n_samples"],
                dt=cfg["dt"],
                frequency=cfg["wavelet_frequency"],
                zp_values=cfg["zp_values"],
                boundaries=cfg["boundaries"],
                prior_window=cfg["prior_window"],
                noise_sigma=cfg["noise_sigma"],
                seed=cfg["rng_seed"],
            )
        ]
    if mode == "pre-stack-1d":
        return [
            pre_stack_bundle(
                n_samples=cfg["n_samples"],
                dt=cfg["dt"],
                frequency=cfg["wavelet_frequency"],
                zp_values=cfg["zp_values"],
                zs_values=cfg["zs_values"],
                boundaries=cfg["boundaries"],
                angles=cfg["angles"],
                gamma=cfg["gamma"],
                prior_window=cfg["prior_window"],
                noise_sigma=cfg["noise_sigma"],
                seed=cfg["rng_seed"],
            )
        ]
    if mode in ("post-stack-2d", "simultaneous-2d"):
        n_sections = 1 if mode == "post-stack-2d" else cfg["n_sections"]
        ramps = cfg["wedge_ramps"]
        if len(ramps) < 2 * n_sections:
            raise ConfigError("wedge_ramps needs two values per section")
        pairs = [(ramps[2 * i], ramps[2 * i + 1]) for i in range(n_sections)]
        return section_bundles(
            n_sections=n_sections,
            n_samples=cfg["n_samples"],
            n_traces=cfg["n_traces"],
            dt=cfg["dt"],
            frequency=cfg["wavelet_frequency"],
            zp_values=cfg["zp_values"],
            top=cfg["wedge_top"],
            ramps=pairs,
            prior_window=cfg["prior_window"],
            noise_sigma=cfg["noise_sigma"],
            seed=cfg["rng_seed"],
        )
    raise ConfigError(f"unknown mode {mode!r}")


def cmd_synth(args) -> int:
    cfg = _resolved_config(args)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    bundles = _synth_bundles(cfg)
    n = len(bundles)
    outputs = {}
    noise_stats = []
    for i, b in enumerate(bundles):
        suf = _suffix(i, n)
        write_matrix(out / f"truth_zp{suf}.csv", b.truth.zp)
        write_matrix(out / f"prior_zp{suf}.csv", b.prior.zp)
        if b.truth.zs is not None:
            write_matrix(out / f"truth_zs{suf}.csv", b.truth.zs)
            write_matrix(out / f"prior_zs{suf}.csv", b.prior.zs)
        write_matrix(out / f"observed{suf}.csv", b.observed.data)
        outputs[f"observed{suf}"] = str(out / f"observed{suf}.csv")
        if cfg["noise_sigma"] > 0.0:
            clean = _synth_clean(b, cfg)
            noise_stats.append(float(np.std(b.observed.data - clean)))
        if not args.no_figures:
            if b.truth.zp.ndim == 1:
                save_impedance_profiles(
                    out / f"model{suf}.png", cfg["dt"],
                    {"true": b.truth, "prior": b.prior}, title="synthetic model",
                )
                save_gather_comparison(
                    out / f"gather{suf}.png", b.observed, title="observed data"
                )
            else:
                save_section_images(
                    out / f"model{suf}.png", cfg["dt"],
                    {"true zp": b.truth.zp, "prior zp": b.prior.zp},
                    title="synthetic section",
                )
                save_section_images(
                    out / f"gather{suf}.png", cfg["dt"],
                    {"observed": b.observed.data}, title="observed section",
                )
    extra = {"sections": n, **outputs}
    if noise_stats:
        extra["noise_sigma_target"] = cfg["noise_sigma"]
        extra["noise_sigma_measured"] = ",".join("%.6g" % v for v in noise_stats)
    _write_common(out, cfg, "synth", extra)
    print(f"synth: wrote {n} section(s) to {out}")
    return 0


def _synth_clean(bundle, cfg):
    wavelet = ricker(cfg["wavelet_frequency"], cfg["dt"])
    if bundle.truth.zp.ndim == 1:
        angles = bundle.observed.angles
        return forward_model(bundle.truth, angles, wavelet, cfg["gamma"]).data
    from .synthetic import section_gather

    return section_gather(bundle.truth.zp, wavelet).data


def _load_task(cfg: dict, data: Path):
    mode = cfg["mode"]
    n = cfg["n_sections"] if mode == "simultaneous-2d" else 1
    observed, priors, truths = [], [], []
    for i in range(n):
        suf = _suffix(i, n)
        data_arr = read_matrix(data / f"observed{suf}.csv")
        prior_zp = read_matrix(data / f"prior_zp{suf}.csv")
        if mode in ("post-stack-1d", "pre-stack-1d"):
            prior_zp = prior_zp[:, 0]
        zs = None
        if mode == "pre-stack-1d":
            zs = read_matrix(data / f"prior_zs{suf}.csv")[:, 0]
        angles = cfg["angles"] if mode == "pre-stack-1d" else (0.0,) * data_arr.shape[1]
        observed.append(SeismicGather(data_arr, angles, cfg["dt"]))
        priors.append(ImpedanceModel(prior_zp, zs))
        truths.append(_maybe_truth(data, suf, mode))
    return InversionTask(observed, priors, mode), truths


def _maybe_truth(data: Path, suf: str, mode: str):
    zp_path = data / f"truth_zp{suf}.csv"
    if not zp_path.exists():
        return None
    zp = read_matrix(zp_path)
    if mode in ("post-stack-1d", "pre-stack-1d"):
        zp = zp[:, 0]
    zs = None
    zs_path = data / f"truth_zs{suf}.csv"
    if zs_path.exists():
        zs = read_matrix(zs_path)
        if mode in ("post-stack-1d", "pre-stack-1d"):
            zs = zs[:, 0]
    return ImpedanceModel(zp, zs)


def cmd_invert(args) -> int:
    cfg = _resolved_config(args)
    inv_cfg = _inversion_config(cfg)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    task, truths = _load_task(cfg, args.data)
    result = train(task, inv_cfg)

    n = len(task.observed)
    misfit_rows = []
    for i in range(n):
        suf = _suffix(i, n)
        model = result.models[i]
        write_matrix(out / f"estimated_zp{suf}.csv", model.zp)
        if model.zs is not None:
            write_matrix(out / f"estimated_zs{suf}.csv", model.zs)
        write_matrix(out / f"predicted{suf}.csv", result.predicted[i].data)
        report = evaluate(
            model,
            truths[i] if truths[i] is not None else model,
            result.predicted[i],
            task.observed[i],
        )
        for j, value in enumerate(report.seismic_rmse):
            misfit_rows.append(
                (f"seismic{suf}[{task.observed[i].angles[j]:g}deg]", value)
            )
        if truths[i] is not None:
            misfit_rows.append((f"zp{suf}", report.zp_rmse))
            if report.zs_rmse is not None:
                misfit_rows.append((f"zs{suf}", report.zs_rmse))
        if not args.no_figures:
            _invert_figures(out, suf, cfg, task, result, truths, i)
    write_matrix(out / "loss_curve.csv", result.loss_history)
    if not args.no_figures:
        save_loss_curve(out / "loss_curve.png", result.loss_history)
    with open(out / "misfit.csv", "w") as fh:
        fh.write("# quantity,rmse\n")
        for name, value in misfit_rows:
            fh.write(f"{name},%.17g\n" % value)
    _write_common(
        out, cfg, "invert",
        {
            "data_dir": str(args.data),
            "n_qubits": result.n_qubits,
            "quantum_parameters": result.state.n_quantum_parameters,
            "epochs_run": len(result.loss_history),
            "evaluations_per_epoch": result.evals_per_epoch,
            "total_evaluations": result.total_evaluations,
            "wall_time_s": "%.3f" % result.wall_time_s,
            "final_loss": "%.17g" % result.loss_history[-1],
        },
    )
    print(
        f"invert: {len(result.loss_history)} epochs, final loss "
        f"{result.loss_history[-1]:.6g}, outputs in {out}"
    )
    return 0


def _invert_figures(out, suf, cfg, task, result, truths, i) -> None:
    model = result.models[i]
    if model.zp.ndim == 1:
        curves = {}
        if truths[i] is not None:
            curves["true"] = truths[i]
        curves["prior"] = task.priors[i]
        curves["estimate"] = model
        save_impedance_profiles(
            out / f"impedance{suf}.png", cfg["dt"], curves, title="inverted impedance"
        )
        save_gather_comparison(
            out / f"seismic{suf}.png", task.observed[i], result.predicted[i],
            title="observed vs predicted",
        )
    else:
        panels = {}
        if truths[i] is not None:
            panels["true zp"] = truths[i].zp
        panels["estimate zp"] = model.zp
        save_section_images(
            out / f"impedance{suf}.png", cfg["dt"], panels, title="inverted section"
        )
        save_section_images(
            out / f"seismic{suf}.png", cfg["dt"],
            {"observed": task.observed[i].data, "predicted": result.predicted[i].data},
            title="observed vs predicted",
        )


def cmd_forward(args) -> int:
    cfg = _resolved_config(args)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    data = args.data
    mode = cfg["mode"]
    n = cfg["n_sections"] if mode == "simultaneous-2d" else 1
    wavelet = ricker(cfg["wavelet_frequency"], cfg["dt"])
    outputs = {}
    for i in range(n):
        suf = _suffix(i, n)
        stem = "truth" if (data / f"truth_zp{suf}.csv").exists() else "estimated"
        model = _read_model(data, stem, suf, mode)
        if model.zp.ndim == 1:
            gather = forward_model(model, cfg["angles"], wavelet, cfg["gamma"])
        else:
            from .synthetic import section_gather

            gather = section_gather(model.zp, wavelet)
        write_matrix(out / f"predicted{suf}.csv", gather.data)
        outputs[f"predicted{suf}"] = str(out / f"predicted{suf}.csv")
        if not args.no_figures:
            if model.zp.ndim == 1:
                save_gather_comparison(
                    out / f"seismic{suf}.png", gather, title="forward model"
                )
            else:
                save_section_images(
                    out / f"seismic{suf}.png", cfg["dt"], {"predicted": gather.data},
                    title="forward model",
                )
    _write_common(out, cfg, "forward", {"data_dir": str(data), **outputs})
    print(f"forward: wrote predicted data to {out}")
    return 0


def _read_model(data: Path, stem: str, suf: str, mode: str) -> ImpedanceModel:
    zp = read_matrix(data / f"{stem}_zp{suf}.csv")
    zs_path = data / f"{stem}_zs{suf}.csv"
    zs = read_matrix(zs_path) if zs_path.exists() else None
    if mode in ("post-stack-1d", "pre-stack-1d"):
        zp = zp[:, 0]
        zs = zs[:, 0] if zs is not None else None
    return ImpedanceModel(zp, zs)


def cmd_gradcheck(args) -> int:
    cfg = _resolved_config(args)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    n_qubits = cfg["n_qubits"] or 4
    spec = QNodeSpec(
        n_qubits,
        EmbeddingSpec("amplitude", n_qubits),
        cfg["n_layers"],
        cfg["rotation_axis"],
        cfg["ansatz"],
    )
    rng = np.random.default_rng(cfg["rng_seed"])
    x = rng.normal(size=2 ** n_qubits)
    weights = rng.normal(size=n_qubits)
    theta, _ = init_parameters(spec, 1, cfg["rng_seed"])

    def scalar_loss(t):
        return float(weights @ qnode_forward(spec, t, x))

    rows = []
    t0 = time.perf_counter()
    adj = jacobian_adjoint(spec, theta, x=x)
    ref = (adj.values.T @ weights).reshape(theta.shape)
    rows.append(("adjoint", 0.0, adj.n_evaluations, adj.n_sweeps,
                 (time.perf_counter() - t0) * 1e3))

    t0 = time.perf_counter()
    ps = jacobian_parameter_shift(spec, theta, x=x)
    g = (ps.values.T @ weights).reshape(theta.shape)
    rows.append(("parameter-shift", float(np.max(np.abs(g - ref))) if g.size else 0.0,
                 ps.n_evaluations, 0, (time.perf_counter() - t0) * 1e3))

    t0 = time.perf_counter()
    fd = jacobian_finite_difference(spec, theta, x=x, delta=cfg["fd_delta"])
    g = (fd.values.T @ weights).reshape(theta.shape)
    rows.append(("finite-difference", float(np.max(np.abs(g - ref))) if g.size else 0.0,
                 fd.n_evaluations, 0, (time.perf_counter() - t0) * 1e3))

    t0 = time.perf_counter()
    if theta.size:
        sp = spsa_loss_gradient(
            scalar_loss, theta, cfg["spsa_epsilon"], cfg["spsa_num_samples"],
            np.random.default_rng(cfg["rng_seed"]),
        )
        sp_diff = float(np.max(np.abs(sp.values - ref)))
        sp_evals = sp.n_evaluations
    else:
        sp_diff, sp_evals = 0.0, 0
    rows.append(("spsa", sp_diff, sp_evals, 0, (time.perf_counter() - t0) * 1e3))

    header = f"{'method':<18} {'max|diff| vs adjoint':>20} {'evals':>6} {'sweeps':>7} {'wall ms':>9}"
    print(header)
    for name, diff, evals, sweeps, ms in rows:
        print(f"{name:<18} {diff:>20.3e} {evals:>6d} {sweeps:>7d} {ms:>9.2f}")
    with open(out / "gradcheck.csv", "w") as fh:
        fh.write("# method,max_abs_diff_vs_adjoint,evaluations,sweeps,wall_ms\n")
        for name, diff, evals, sweeps, ms in rows:
            fh.write(f"{name},%.17g,{evals},{sweeps},%.3f\n" % (diff, ms))
    _write_common(
        out, cfg, "gradcheck",
        {"n_qubits": n_qubits, "quantum_parameters": theta.size,
         "table": str(out / "gradcheck.csv")},
    )
    return 0


_COMMANDS = {
    "synth": cmd_synth,
    "invert": cmd_invert,
    "gradcheck": cmd_gradcheck,
    "forward": cmd_forward,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (InputFileError, TrainingError, EmbeddingError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
