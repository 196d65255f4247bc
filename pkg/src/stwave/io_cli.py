"""Volume file format, result schemas, and the command-line interface.

Volume files are a fixed little-endian binary layout:

    magic   6 bytes  b"STVOL1"
    version u16      currently 1
    d       u16      spatial dimension (1 or 2)
    N       u32      spatial side length (dyadic)
    n       u32      number of time samples (dyadic)
    payload n * N**d float64, time index slowest, then k1, then k2

Study results are CSV files with columns ``method,snr,rep,mse,runtime_s``
plus a JSON metadata sidecar (same path with suffix ``.meta.json``) echoing
every configuration field that affects the numbers.

Exit codes: 0 success, 2 bad flags, 3 I/O or format error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import struct
import sys
from pathlib import Path

import numpy as np

from .estimators import (
    DELTA_DEFAULT,
    DELTA_MIN,
    EstimatorConfig,
    METHODS,
    block_length,
    block_levels,
    denoise,
    linear_levels,
)
from .noise import epsilon_from_sigma, mad_sigma_volume
from .simulation import (
    MseRecord,
    STUDY_DELTA,
    SimConfig,
    deviation_check,
    rate_experiment,
    run_study,
    study_metadata,
)
from .wavelets import SpaceTimeVolume, WAVELETS, get_wavelet

MAGIC = b"STVOL1"
VERSION = 1
_HEADER = struct.Struct("<6sHHII")


class VolumeFormatError(ValueError):
    """Malformed volume file; ``code`` is one of 'magic', 'version',
    'shape', 'truncated'."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def write_volume(volume: SpaceTimeVolume, path) -> None:
    """Write a volume; ``read_volume(write_volume(v))`` is bit-identical."""
    payload = np.ascontiguousarray(volume.data, dtype="<f8")
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, VERSION, volume.d, volume.N, volume.n))
        f.write(payload.tobytes())


def read_volume(path) -> SpaceTimeVolume:
    with open(path, "rb") as f:
        head = f.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise VolumeFormatError("truncated", f"{path}: header incomplete")
        magic, version, d, N, n = _HEADER.unpack(head)
        if magic != MAGIC:
            raise VolumeFormatError("magic", f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise VolumeFormatError("version", f"{path}: unsupported version {version}")
        if d not in (1, 2) or N < 2 or (N & (N - 1)) or n < 2 or (n & (n - 1)):
            raise VolumeFormatError(
                "shape", f"{path}: invalid dimensions d={d}, N={N}, n={n}")
        count = n * N**d
        raw = f.read(8 * count)
        if len(raw) < 8 * count:
            raise VolumeFormatError(
                "truncated", f"{path}: payload has {len(raw)} bytes, expected {8 * count}")
        if f.read(1):
            raise VolumeFormatError("truncated", f"{path}: trailing bytes after payload")
    data = np.frombuffer(raw, dtype="<f8").astype(np.float64)
    return SpaceTimeVolume(d=d, N=N, n=n, data=data)


# ---------------------------------------------------------------------------
# Result schema
# ---------------------------------------------------------------------------

RESULT_COLUMNS = ("method", "snr", "rep", "mse", "runtime_s")


def _sidecar_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".meta.json")


def write_results(records: list[MseRecord], metadata: dict, csv_path) -> None:
    """Write study records as CSV plus the JSON metadata sidecar."""
    with open(csv_path, "w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(RESULT_COLUMNS)
        for r in records:
            wr.writerow([r.method, repr(r.snr), r.rep, repr(r.mse), repr(r.runtime_s)])
    with open(_sidecar_path(csv_path), "w") as f:
        json.dump(metadata, f, indent=2, sort_keys=True)
        f.write("\n")


def read_results(csv_path) -> tuple[list[MseRecord], dict | None]:
    records = []
    with open(csv_path, newline="") as f:
        rd = csv.DictReader(f)
        if rd.fieldnames is None or tuple(rd.fieldnames) != RESULT_COLUMNS:
            raise ValueError(f"{csv_path}: expected columns {','.join(RESULT_COLUMNS)}")
        for row in rd:
            records.append(MseRecord(method=row["method"], snr=float(row["snr"]),
                                     rep=int(row["rep"]), mse=float(row["mse"]),
                                     runtime_s=float(row["runtime_s"])))
    side = _sidecar_path(csv_path)
    metadata = json.loads(side.read_text()) if side.exists() else None
    return records, metadata


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def _parse_sigma(text: str) -> float | str:
    if text == "auto":
        return "auto"
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("--sigma must be 'auto' or a number") from None
    if value < 0:
        raise argparse.ArgumentTypeError("--sigma must be >= 0")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stwave",
                                description="space-time wavelet denoising toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("denoise", help="denoise a volume file")
    d.add_argument("--input", required=True)
    d.add_argument("--output", required=True)
    d.add_argument("--method", choices=METHODS, default="block")
    d.add_argument("--sigma", type=_parse_sigma, default="auto",
                   help="noise level, or 'auto' for MAD estimation")
    d.add_argument("--delta", type=float, default=DELTA_DEFAULT)
    d.add_argument("--practical", action="store_true",
                   help="allow delta below the theoretical floor")
    d.add_argument("--wavelet", choices=sorted(WAVELETS), default="sym8")
    d.add_argument("--mode", choices=("hard", "soft"), default="hard")
    d.add_argument("--s1", type=float, default=2.0, help="linear method smoothness")
    d.add_argument("--s2", type=float, default=2.0)

    s = sub.add_parser("simulate", help="run the replication study")
    s.add_argument("--N", type=int, default=32)
    s.add_argument("--n", type=int, default=64)
    s.add_argument("--M", type=int, default=20)
    s.add_argument("--snr", type=float, action="append",
                   help="repeatable; default 7 5 3")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--full-scale", action="store_true",
                   help="N=64, n=128, M=100, SNR 7/5/3")
    s.add_argument("--delta", type=float, default=STUDY_DELTA,
                   help="block threshold constant (study default is the "
                        "practical regime; values at or below the "
                        "theoretical floor imply --practical)")
    s.add_argument("--practical", action="store_true")
    s.add_argument("--wavelet", choices=sorted(WAVELETS), default="sym8")

    r = sub.add_parser("rate", help="fit the risk-vs-noise rate")
    r.add_argument("--d", type=int, choices=(1, 2), default=1)
    r.add_argument("--s1", type=float, default=2.0)
    r.add_argument("--s2", type=float, default=2.0)
    r.add_argument("--eps", type=float, action="append", required=True,
                   help="repeatable; must span >= 3 octaves")
    r.add_argument("--reps", type=int, default=50)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out", required=True)

    v = sub.add_parser("deviation", help="check the block-energy tail bound")
    v.add_argument("--delta", type=float, action="append", required=True)
    v.add_argument("--eps", type=float, action="append", required=True)
    v.add_argument("--trials", type=int, default=100_000)
    v.add_argument("--seed", type=int, default=0)

    return p


def _denoise_summary(args, vol: SpaceTimeVolume, sigma: float) -> dict:
    out = {"method": args.method, "sigma": sigma, "wavelet": args.wavelet,
           "mode": args.mode, "epsilon": None, "j1": None, "m2": None,
           "L_eps": None, "threshold": None, "delta": None}
    max_j = int(math.log2(vol.N)) - 1
    max_m = int(math.log2(vol.n)) - 1
    if args.method in ("block", "linear"):
        eps = epsilon_from_sigma(sigma, vol.d, vol.N, vol.n)
        out["epsilon"] = eps
        if args.method == "block":
            out["delta"] = args.delta
            if eps > 0:
                L = block_length(eps)
                out["L_eps"] = L
                out["threshold"] = args.delta**2 * eps**2 * L
                out["j1"], out["m2"] = block_levels(eps, max_j, max_m)
            else:
                out["j1"], out["m2"] = max_j, max_m
        else:
            out["j1"], out["m2"] = linear_levels(eps, args.s1, args.s2, vol.d,
                                                 max_j, max_m)
    else:
        n_coefs = vol.n if args.method == "pixel1d" else float(vol.N) ** vol.d
        out["threshold"] = sigma * math.sqrt(2.0 * math.log(n_coefs))
    return out


def _cmd_denoise(args) -> int:
    vol = read_volume(args.input)
    sigma = mad_sigma_volume(vol, args.wavelet) if args.sigma == "auto" else args.sigma
    config = EstimatorConfig(method=args.method, delta=args.delta,
                             practical=args.practical, threshold_mode=args.mode,
                             s1=args.s1, s2=args.s2)
    est = denoise(vol, config, sigma, args.wavelet, args.wavelet)
    if not np.isfinite(est.data).all():
        raise ArithmeticError("denoised volume contains non-finite values")
    write_volume(est, args.output)
    print(json.dumps(_denoise_summary(args, vol, sigma)))
    return 0


def _cmd_simulate(args) -> int:
    practical = args.practical or args.delta <= DELTA_MIN
    kw = dict(seed=args.seed, delta=args.delta, practical=practical,
              wavelet_space=args.wavelet, wavelet_time=args.wavelet)
    if args.full_scale:
        config = SimConfig.full_scale(**kw)
    else:
        snr = tuple(args.snr) if args.snr else (7.0, 5.0, 3.0)
        config = SimConfig(N=args.N, n=args.n, M=args.M, snr_list=snr, **kw)
    records = run_study(config)
    write_results(records, study_metadata(config), args.out)
    print(json.dumps({"rows": len(records), "out": str(args.out)}))
    return 0


def _cmd_rate(args) -> int:
    res = rate_experiment(args.s1, args.s2, args.d, args.eps, args.reps, args.seed)
    with open(args.out, "w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(["epsilon", "mean_risk"])
        for e, risk in zip(res.eps_grid, res.risks):
            wr.writerow([repr(e), repr(risk)])
    meta = {"slope": res.slope, "theoretical_slope": res.theoretical_slope,
            "d": args.d, "s1": args.s1, "s2": args.s2, "reps": res.reps,
            "shape": list(res.shape), "delta": res.delta, "seed": args.seed}
    with open(_sidecar_path(args.out), "w") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")
    print(json.dumps({"slope": res.slope, "theoretical_slope": res.theoretical_slope}))
    return 0


def _cmd_deviation(args) -> int:
    all_pass = True
    for delta in args.delta:
        for eps in args.eps:
            res = deviation_check(delta, eps, args.trials, args.seed)
            all_pass &= res.passed
            print(f"delta={delta:g} eps={eps:g} L={res.L_eps} "
                  f"p_hat={res.p_hat:.3e} bound={res.bound:.3e} "
                  f"{'PASS' if res.passed else 'FAIL'}")
    return 0 if all_pass else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"denoise": _cmd_denoise, "simulate": _cmd_simulate,
                "rate": _cmd_rate, "deviation": _cmd_deviation}
    try:
        return handlers[args.command](args)
    except (VolumeFormatError, OSError) as exc:
        print(f"stwave: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"stwave: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"stwave: numeric failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
