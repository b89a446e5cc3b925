#!/usr/bin/env python3
"""SNRI versus filter order for the greedy and cyclic window filters.

The synthetic channel has order 8, so the curve should peak near M=8:
shorter filters undermodel the channel, longer ones adapt more slowly and
carry extra coefficient noise.
"""

import argparse
from pathlib import Path

from ancfilt.anc import AlgoConfig, sweep
from ancfilt.signal_io import SynthSpec, default_channel, synth_anc_scenario, write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--num-samples", type=int, default=30_000)
    ap.add_argument("--seed", type=int, default=777)
    ap.add_argument("--orders", default="1:14", help="start:stop, inclusive")
    ap.add_argument("--iterations", type=int, default=1, help="updates per sample P")
    ap.add_argument("--noise", default="white", choices=("white", "ar1"))
    ap.add_argument("--out", default="sweep_out")
    args = ap.parse_args()

    start, stop = (int(v) for v in args.orders.split(":"))
    values = list(range(start, stop + 1))
    spec = SynthSpec(
        channel_taps=default_channel(8),
        num_samples=args.num_samples,
        noise_kind=args.noise,
        seed=args.seed,
    )
    clean, primary, reference = synth_anc_scenario(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    for mode in ("feds", "fap"):
        base = AlgoConfig(mode, window_len=25, iterations=args.iterations, mu=0.002)
        rows = sweep(base, "m", values, primary, reference, clean)
        write_csv(
            {
                "m": [r.value for r in rows],
                "snri": [float("nan") if r.snri is None else r.snri for r in rows],
            },
            out / f"snri_vs_order_{mode}.csv",
        )
        best = max((r for r in rows if r.snri is not None), key=lambda r: r.snri)
        print(f"{mode}: peak snri={best.snri:.3f} dB at M={int(best.value)}")
    print(f"wrote CSVs to {out}")


if __name__ == "__main__":
    main()
