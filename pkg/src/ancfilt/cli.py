"""Command-line front end: run / sweep / synth / compare.

Exit codes: 0 success, 1 usage or configuration error, 2 I/O error,
3 filter divergence. Summaries go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .anc import ALGORITHMS, AlgoConfig, run_anc, sweep
from .filters import DivergenceError
from .signal_io import (
    CLEAN_KINDS,
    NOISE_KINDS,
    SynthSpec,
    WavFormatError,
    default_channel,
    read_wav,
    synth_anc_scenario,
    write_csv,
    write_wav,
)

# Table row order and labels for the comparison output.
COMPARE_ORDER = (("lms", "LMS"), ("nlms", "NLMS"), ("ap", "APA"),
                 ("feds", "FEDS"), ("fap", "FAPA"), ("rls", "RLS"))


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="ancfilt", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    run_p = sub.add_parser("run", help="run one algorithm and write its artifacts")
    _add_algo_flags(run_p, require_algo=True)
    _add_scenario_flags(run_p)
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.set_defaults(handler=cmd_run)

    sweep_p = sub.add_parser("sweep", help="rerun one algorithm over a parameter grid")
    _add_algo_flags(sweep_p, require_algo=True)
    _add_scenario_flags(sweep_p)
    sweep_p.add_argument("--param", required=True, choices=("m", "l", "mu", "p"))
    sweep_p.add_argument("--values", help="comma-separated parameter values")
    sweep_p.add_argument("--range", dest="value_range", help="start:stop[:step], inclusive")
    sweep_p.add_argument("--out", required=True)
    sweep_p.set_defaults(handler=cmd_sweep)

    synth_p = sub.add_parser("synth", help="generate a deterministic synthetic scenario")
    _add_synth_flags(synth_p, prefix="")
    synth_p.add_argument("--out", required=True)
    synth_p.set_defaults(handler=cmd_synth)

    cmp_p = sub.add_parser("compare", help="run all six algorithms at default parameters")
    _add_scenario_flags(cmp_p)
    cmp_p.add_argument("--m", type=int, default=8, help="filter order for every algorithm")
    cmp_p.add_argument("--out", required=True)
    cmp_p.set_defaults(handler=cmd_compare)

    return parser


def _add_algo_flags(p, require_algo: bool):
    p.add_argument("--algo", required=require_algo, choices=ALGORITHMS)
    p.add_argument("--m", type=int, default=8, help="filter order M")
    p.add_argument("--mu", type=float, help="step size")
    p.add_argument("--lam", type=float, help="RLS forgetting factor")
    p.add_argument("--delta", type=float, help="NLMS regularizer")
    p.add_argument("--eps", type=float, help="AP regularizer")
    p.add_argument("--k", type=int, help="AP projection order K")
    p.add_argument("--l", type=int, help="FEDS/FAP window length L")
    p.add_argument("--p", type=int, help="FEDS/FAP updates per sample P")
    p.add_argument("--delta-init", type=float, help="RLS inverse-correlation init scale")


def _add_scenario_flags(p):
    p.add_argument("--primary", help="primary-sensor WAV (signal + noise)")
    p.add_argument("--reference", help="reference-sensor WAV (noise only)")
    p.add_argument("--clean", help="clean source WAV, used for scoring only")
    _add_synth_flags(p, prefix="synth-")


def _add_synth_flags(p, prefix: str):
    p.add_argument(f"--{prefix}channel", help="comma-separated FIR channel taps")
    p.add_argument(f"--{prefix}channel-order", type=int, default=8,
                   help="order of the built-in default channel")
    p.add_argument(f"--{prefix}num-samples", type=int, default=100_000)
    p.add_argument(f"--{prefix}noise", choices=NOISE_KINDS, default="ar1")
    p.add_argument(f"--{prefix}ar-coeff", type=float, default=0.95)
    p.add_argument(f"--{prefix}clean-kind", choices=CLEAN_KINDS, default="ar2")
    p.add_argument(f"--{prefix}input-snr", type=float, default=-10.218)
    p.add_argument(f"--{prefix}seed", type=int, default=12345)
    p.add_argument(f"--{prefix}sample-rate", type=int, default=8000)
    if prefix:
        p.add_argument("--synth", action="store_true",
                       help="synthesize the scenario instead of reading WAVs")


def _synth_spec_from(args, prefix: str) -> SynthSpec:
    get = lambda name: getattr(args, (prefix + name).replace("-", "_"))
    channel = get("channel")
    if channel:
        try:
            taps = tuple(float(t) for t in channel.split(","))
        except ValueError as exc:
            raise UsageError(f"bad --channel value: {exc}") from exc
    else:
        taps = default_channel(get("channel-order"))
    try:
        return SynthSpec(
            channel_taps=taps,
            num_samples=get("num-samples"),
            noise_kind=get("noise"),
            clean_kind=get("clean-kind"),
            input_snr_db=get("input-snr"),
            seed=get("seed"),
            sample_rate=get("sample-rate"),
            noise_ar_coeff=get("ar-coeff"),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _load_scenario(args):
    """Returns (primary, reference, clean or None)."""
    if args.primary or args.reference:
        if not (args.primary and args.reference):
            raise UsageError("--primary and --reference must be given together")
        primary = read_wav(args.primary)
        reference = read_wav(args.reference)
        clean = read_wav(args.clean) if args.clean else None
        return primary, reference, clean
    if not args.synth:
        raise UsageError("give --primary/--reference WAVs or --synth")
    clean, primary, reference = synth_anc_scenario(_synth_spec_from(args, "synth-"))
    return primary, reference, clean


def _config_from(args) -> AlgoConfig:
    try:
        return AlgoConfig(
            algorithm=args.algo,
            num_taps=args.m,
            mu=args.mu,
            forgetting=args.lam,
            delta=args.delta,
            eps=args.eps,
            proj_order=args.k,
            window_len=args.l,
            iterations=args.p,
            delta_init=args.delta_init,
        ).resolved()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _fmt(value) -> str:
    return "NA" if value is None else f"{value:.4f}"


def cmd_run(args) -> int:
    config = _config_from(args)
    primary, reference, clean = _load_scenario(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result = run_anc(config, primary, reference, clean)

    clipped = write_wav(result.denoised, out / "denoised.wav")
    if clipped:
        print(f"warning: {clipped} samples clipped in denoised.wav", file=sys.stderr)
    n = np.arange(len(result.mse_curve), dtype=float)
    write_csv({"n": n, "mse": result.mse_curve, "mse_smooth": result.mse_smooth}, out / "mse.csv")
    taps = {"n": result.snapshot_indices.astype(float)}
    for k in range(config.num_taps):
        taps[f"tap_{k}"] = result.coeff_trajectory[:, k]
    write_csv(taps, out / "taps.csv")
    print(
        f"algo={config.algorithm} M={config.num_taps} "
        f"snr_in={_fmt(result.snr_in)} snr_out={_fmt(result.snr_out)} snri={_fmt(result.snri)}"
    )
    return 0


def _parse_values(args):
    as_float = args.param == "mu"
    if (args.values is None) == (args.value_range is None):
        raise UsageError("give exactly one of --values or --range")
    if args.values is not None:
        try:
            raw = [float(v) for v in args.values.split(",") if v.strip()]
        except ValueError as exc:
            raise UsageError(f"bad --values: {exc}") from exc
    else:
        parts = args.value_range.split(":")
        if len(parts) not in (2, 3):
            raise UsageError("--range must be start:stop[:step]")
        try:
            start, stop = float(parts[0]), float(parts[1])
            step = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError as exc:
            raise UsageError(f"bad --range: {exc}") from exc
        if step <= 0:
            raise UsageError("--range step must be positive")
        raw = list(np.arange(start, stop + step * 1e-9, step))
    if not raw:
        raise UsageError("empty parameter range")
    return raw if as_float else [int(v) for v in raw]


def cmd_sweep(args) -> int:
    values = _parse_values(args)
    base = _config_from(args)
    primary, reference, clean = _load_scenario(args)
    if clean is None:
        raise UsageError("sweep requires --clean (or a synthetic scenario)")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    rows = sweep(base, args.param, values, primary, reference, clean)
    table = {
        "param_value": [r.value for r in rows],
        "snri": [float("nan") if r.snri is None else r.snri for r in rows],
        "snr_out": [float("nan") if r.snr_out is None else r.snr_out for r in rows],
    }
    write_csv(table, out / "sweep.csv")
    for row in rows:
        if row.error:
            print(f"{args.param}={row.value:g}: {row.error}", file=sys.stderr)
    scored = [r for r in rows if r.snri is not None]
    if scored:
        best = max(scored, key=lambda r: r.snri)
        print(f"argmax {args.param}={best.value:g} snri={best.snri:.4f}")
    return 0


def cmd_synth(args) -> int:
    spec = _synth_spec_from(args, "")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    clean, primary, reference = synth_anc_scenario(spec)
    write_wav(clean, out / "clean.wav")
    write_wav(primary, out / "primary.wav")
    write_wav(reference, out / "reference.wav")
    lines = [
        "channel_taps=" + ",".join(repr(t) for t in spec.channel_taps),
        f"num_samples={spec.num_samples}",
        f"noise_kind={spec.noise_kind}",
        f"noise_ar_coeff={spec.noise_ar_coeff!r}",
        f"clean_kind={spec.clean_kind}",
        f"input_snr_db={spec.input_snr_db!r}",
        f"seed={spec.seed}",
        f"sample_rate={spec.sample_rate}",
    ]
    (out / "spec.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote clean.wav primary.wav reference.wav spec.txt to {out}")
    return 0


def cmd_compare(args) -> int:
    primary, reference, clean = _load_scenario(args)
    if clean is None:
        raise UsageError("compare requires --clean")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    labels = []
    snris = []
    successes = 0
    for algo, label in COMPARE_ORDER:
        config = AlgoConfig(algorithm=algo, num_taps=args.m)
        try:
            result = run_anc(config, primary, reference, clean)
        except DivergenceError as exc:
            print(f"{label}: {exc}", file=sys.stderr)
            labels.append(label)
            snris.append("diverged")
            continue
        successes += 1
        labels.append(label)
        snris.append(result.snri)
    write_csv({"algorithm": labels, "snri": snris}, out / "table.csv")
    print("algorithm,snri")
    for label, snri in zip(labels, snris):
        print(f"{label},{snri if isinstance(snri, str) else f'{snri:.4f}'}")
    return 0 if successes else 3


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, WavFormatError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
