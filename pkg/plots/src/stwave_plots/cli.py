"""Command-line figure generation from benchmark result files."""

from __future__ import annotations

import argparse
import sys

from .figures import make_boxplot, make_temporal_cut, make_trajectory


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stwave-plots",
                                description="figures from benchmark outputs")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("boxplot", help="MSE boxplot per method at one SNR")
    b.add_argument("--csv", required=True)
    b.add_argument("--snr", type=float, required=True)
    b.add_argument("--out", required=True)

    c = sub.add_parser("cut", help="temporal-cut image panels")
    c.add_argument("--volume", action="append", required=True,
                   help="repeatable; panels appear in the given order")
    c.add_argument("--t-index", type=int, default=None,
                   help="defaults to round(0.5748 * n)")
    c.add_argument("--label", action="append", default=None)
    c.add_argument("--out", required=True)

    t = sub.add_parser("trajectory", help="raw vs denoised pixel trajectories")
    t.add_argument("--raw", required=True)
    t.add_argument("--denoised", required=True)
    t.add_argument("--pixel", action="append", required=True,
                   help="repeatable, formatted k1,k2")
    t.add_argument("--out", required=True)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "boxplot":
            data = make_boxplot(args.csv, args.snr, args.out)
            print(f"wrote {args.out}: medians "
                  + ", ".join(f"{m}={v:.4g}" for m, v in zip(data.methods, data.medians)))
        elif args.command == "cut":
            data = make_temporal_cut(args.volume, args.out,
                                     t_index=args.t_index, labels=args.label)
            print(f"wrote {args.out}: {len(data.panels)} panels at index {data.t_index}")
        else:
            pixels = [tuple(int(v) for v in s.split(",")) for s in args.pixel]
            data = make_trajectory(args.raw, args.denoised, pixels, args.out)
            print(f"wrote {args.out}: {len(data.pixels)} pixel trajectories")
        return 0
    except OSError as exc:
        print(f"stwave-plots: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"stwave-plots: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
