#!/usr/bin/env python3
"""Run all six algorithms on the default synthetic scenario and print SNRIs.

Writes per-algorithm learning curves and the summary table as CSV when an
output directory is given.
"""

import argparse
import time
from pathlib import Path

import numpy as np

from ancfilt.anc import AlgoConfig, run_anc
from ancfilt.signal_io import SynthSpec, default_channel, synth_anc_scenario, write_csv

ORDER = ("lms", "nlms", "ap", "feds", "fap", "rls")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--num-samples", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=12345)
    ap.add_argument("--input-snr", type=float, default=-10.218)
    ap.add_argument("--out", help="directory for mse_<algo>.csv and summary.csv")
    args = ap.parse_args()

    spec = SynthSpec(
        channel_taps=default_channel(8),
        num_samples=args.num_samples,
        seed=args.seed,
        input_snr_db=args.input_snr,
    )
    clean, primary, reference = synth_anc_scenario(spec)
    print(f"scenario: {args.num_samples} samples, input SNR {args.input_snr} dB, seed {args.seed}")

    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    rows = []
    for algo in ORDER:
        t0 = time.perf_counter()
        result = run_anc(AlgoConfig(algo), primary, reference, clean)
        dt = time.perf_counter() - t0
        rows.append((algo, result.snri))
        print(f"{algo:>5}: snri={result.snri:7.3f} dB  (snr_out={result.snr_out:7.3f}, {dt:.1f}s)")
        if out:
            n = np.arange(len(result.mse_curve), dtype=float)
            write_csv(
                {"n": n, "mse": result.mse_curve, "mse_smooth": result.mse_smooth},
                out / f"mse_{algo}.csv",
            )
    if out:
        write_csv(
            {"algorithm": [a for a, _ in rows], "snri": [s for _, s in rows]},
            out / "summary.csv",
        )
        print(f"wrote CSVs to {out}")


if __name__ == "__main__":
    main()
