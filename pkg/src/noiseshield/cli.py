"""Command-line surface: keygen, embed, extract, simulate, localize,
calibrate, and batch eval.

Every stochastic command takes --seed and is fully deterministic given it.
Structured results go to stdout as JSON; failures exit nonzero with a
machine-readable JSON error on stderr. Set NOISESHIELD_LOG to adjust log
verbosity.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import pipeline
from .bitcodec import (
    RepeatFactors,
    WatermarkKey,
    WatermarkPayload,
    bit_accuracy,
    random_payload,
)
from .calibration import ThresholdTable, derive_thresholds, sample_distributions
from .channel import (
    ChannelSpec,
    RegionMask,
    TemporalEdit,
    apply_channel,
    edits_from_json,
    random_block_region,
    tamper_spatial,
    tamper_temporal,
)
from .formats import (
    read_bits_file,
    read_latent_file,
    write_bits_file,
    write_latent_file,
    write_pgm,
)
from .metrics import mask_metrics
from .spatial import write_mask_file
from .temporal import temporal_accuracy
from .tensors import BitGrid4D, SeededRng, Shape4

log = logging.getLogger("noiseshield")

GROUND_TRUTH_SCHEMA = "noiseshield/ground-truth@1"

# Stream ids per purpose, so one --seed drives independent substreams.
STREAM_PAYLOAD = 1
STREAM_NOISE = 2
STREAM_TEMPORAL = 3
STREAM_SPATIAL = 4
STREAM_CALIBRATION = 1 << 20


def _parse_ints(text: str, n: int, what: str) -> tuple[int, ...]:
    parts = text.split(",")
    if len(parts) != n:
        raise ValueError(f"{what} needs {n} comma-separated integers, got {text!r}")
    return tuple(int(p) for p in parts)


def _shape(text: str) -> Shape4:
    return Shape4(*_parse_ints(text, 4, "--shape"))


def _factors(text: str) -> RepeatFactors:
    return RepeatFactors(*_parse_ints(text, 4, "--factors"))


def _emit(obj: dict) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _outdir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _payload_grid(payload: WatermarkPayload, shape: Shape4, factors: RepeatFactors):
    return BitGrid4D(Shape4(*factors.payload_shape(shape)), payload.bits)


def cmd_keygen(args) -> None:
    key = WatermarkKey.generate()
    key.save(args.out)
    _emit({"key_file": str(args.out)})


def cmd_embed(args) -> None:
    key = WatermarkKey.load(args.key)
    shape, factors = _shape(args.shape), _factors(args.factors)
    out = _outdir(args.out)
    payload = random_payload(
        factors.n_bits(shape), SeededRng(args.seed, STREAM_PAYLOAD)
    )
    noise, _tp = pipeline.embed(
        payload, key, shape, factors, SeededRng(args.seed, STREAM_NOISE)
    )
    noise_path, payload_path = out / "noise.vslt", out / "payload.vsbt"
    write_latent_file(noise, noise_path)
    write_bits_file(_payload_grid(payload, shape, factors), payload_path)
    manifest = {
        "shape": list(shape.dims),
        "factors": list(factors.dims),
        "seed": args.seed,
        "n_bits": payload.n_bits,
    }
    (out / "embed.json").write_text(json.dumps(manifest, indent=2) + "\n")
    _emit({"noise": str(noise_path), "payload": str(payload_path), **manifest})


def cmd_extract(args) -> None:
    key = WatermarkKey.load(args.key)
    factors = _factors(args.factors)
    latent = read_latent_file(args.latent)
    if args.frames:
        payload = pipeline.extract_synced(latent, key, factors, args.frames)
    else:
        payload = pipeline.extract(latent, key, factors)
    result = {
        "n_bits": payload.n_bits,
        "bits_hex": np.packbits(payload.bits).tobytes().hex(),
    }
    if args.reference:
        ref = WatermarkPayload(read_bits_file(args.reference).bits.reshape(-1))
        result["bit_accuracy"] = bit_accuracy(payload, ref)
    if args.out:
        grid_shape = (
            Shape4(args.frames, *latent.shape.dims[1:]) if args.frames else latent.shape
        )
        write_bits_file(_payload_grid(payload, grid_shape, factors), args.out)
        result["payload_file"] = str(args.out)
    _emit(result)


def _parse_region(text: str, shape: Shape4) -> RegionMask:
    """Region syntax: f0:f1,y0:y1,x0:x1 (half-open bounds)."""
    spans = text.split(",")
    if len(spans) != 3:
        raise ValueError(f"--region needs f0:f1,y0:y1,x0:x1, got {text!r}")
    bounds = []
    for span in spans:
        lo, _, hi = span.partition(":")
        bounds.append((int(lo), int(hi)))
    return RegionMask.rectangle(shape, *bounds)


def cmd_simulate(args) -> None:
    latent = read_latent_file(args.latent)
    out = _outdir(args.out)
    rng = SeededRng(args.seed)
    spec = ChannelSpec.parse(args.channel, seed=args.seed)

    edits: list[TemporalEdit] = []
    if args.edits:
        text = Path(args.edits).read_text() if os.path.exists(args.edits) else args.edits
        edits = edits_from_json(text)
    tampered, positions = tamper_temporal(
        latent, edits, rng.with_stream(STREAM_TEMPORAL)
    )

    if args.mask:
        mask_grid = read_bits_file(args.mask)
        region = RegionMask(mask_grid.bits[:, 0])
    elif args.region:
        region = _parse_region(args.region, tampered.shape)
    else:
        region = RegionMask(
            np.zeros((tampered.shape.f, tampered.shape.h, tampered.shape.w), np.uint8)
        )
    if region.mask.any():
        tampered = tamper_spatial(tampered, region, rng.with_stream(STREAM_SPATIAL))

    tampered = apply_channel(tampered, spec)

    tampered_path = out / "tampered.vslt"
    gt_mask_path = out / "gt_mask.vsbt"
    write_latent_file(tampered, tampered_path)
    write_mask_file(region.mask, gt_mask_path)
    ground_truth = {
        "schema": GROUND_TRUTH_SCHEMA,
        "positions": [int(p) for p in positions],
        "mask_file": gt_mask_path.name,
        "edits": [e.to_dict() for e in edits],
        "channel": spec.to_dict(),
    }
    (out / "ground_truth.json").write_text(json.dumps(ground_truth, indent=2) + "\n")
    _emit({"tampered": str(tampered_path), "ground_truth": str(out / "ground_truth.json")})


def _load_gt_mask(path) -> np.ndarray:
    return read_bits_file(path).bits[:, 0]


def _upscale_mask(mask: np.ndarray, s: int) -> np.ndarray:
    if s == 1:
        return mask
    return np.repeat(np.repeat(mask, s, axis=1), s, axis=2)


def _align_gt_mask(gt_mask: np.ndarray, pred_shape: tuple) -> np.ndarray:
    """Ground truth may be written at latent or pixel resolution; upscale it
    to the prediction's grid when it is an exact integer factor smaller."""
    if gt_mask.shape == pred_shape:
        return gt_mask
    if gt_mask.shape[0] == pred_shape[0] and gt_mask.shape[1] and gt_mask.shape[2]:
        s_h, rem_h = divmod(pred_shape[1], gt_mask.shape[1])
        s_w, rem_w = divmod(pred_shape[2], gt_mask.shape[2])
        if rem_h == 0 and rem_w == 0 and s_h == s_w and s_h >= 1:
            return _upscale_mask(gt_mask, s_h)
    raise ValueError(
        f"ground-truth mask shape {gt_mask.shape} incompatible with "
        f"prediction {pred_shape}"
    )


def cmd_localize(args) -> None:
    key = WatermarkKey.load(args.key)
    factors = _factors(args.factors)
    latent = read_latent_file(args.latent)
    table = ThresholdTable.load(args.thresholds)
    out = _outdir(args.out)

    # Templates are rebuilt at the original frame count; default to the
    # analyzed video's frame count unless told otherwise.
    f_orig = args.frames if args.frames else latent.shape.f
    if args.payload:
        payload = WatermarkPayload(read_bits_file(args.payload).bits.reshape(-1))
    else:
        payload = pipeline.extract_synced(latent, key, factors, f_orig)
    tp_shape = Shape4(f_orig, latent.shape.c, latent.shape.h, latent.shape.w)
    tp = pipeline.template_bits(payload, key, tp_shape, factors)

    result = pipeline.localize(latent, tp, table)
    positions_path = out / "positions.json"
    positions_path.write_text(
        json.dumps({"positions": [int(p) for p in result.positions]}, indent=2) + "\n"
    )
    mask_path = out / "mask.vsbt"
    write_mask_file(result.mask, mask_path)
    if args.pgm:
        for q in range(result.mask.shape[0]):
            write_pgm(out / f"mask_{q:03d}.pgm", result.mask[q] * 255)

    summary: dict = {
        "positions": [int(p) for p in result.positions],
        "mask": str(mask_path),
        "tampered_fraction": float(result.mask.mean()),
    }
    if args.gt:
        gt = json.loads(Path(args.gt).read_text())
        summary["temporal_accuracy"] = temporal_accuracy(
            result.positions, np.array(gt["positions"], dtype=np.int64)
        )
    if args.gt_mask:
        gt_mask = _align_gt_mask(_load_gt_mask(args.gt_mask), result.mask.shape)
        m = mask_metrics(
            result.mask,
            _upscale_mask(result.soft_tamper, table.upscale),
            gt_mask,
        )
        summary["mask_metrics"] = m.to_dict()
    _emit(summary)


def cmd_calibrate(args) -> None:
    key = WatermarkKey.load(args.key)
    shape, factors = _shape(args.shape), _factors(args.factors)
    spec = ChannelSpec.parse(args.channel, seed=args.seed)
    wm, orig = sample_distributions(
        args.n, shape, factors, key, spec, args.levels,
        SeededRng(args.seed, STREAM_CALIBRATION),
    )
    table = derive_thresholds(wm, orig, args.k, args.t_temp, args.tau, args.upscale)
    table.meta.update({"shape": list(shape.dims), "factors": list(factors.dims)})
    table.save(args.out)
    _emit(json.loads(table.to_json()))


def cmd_eval(args) -> None:
    cfg = json.loads(Path(args.config).read_text())
    shape = Shape4(*cfg["shape"])
    factors = RepeatFactors(*cfg["factors"])
    key = WatermarkKey.load(cfg["key_file"])
    table = ThresholdTable.load(cfg["thresholds_file"])
    channel_cfg = cfg.get("channel", {"kind": "identity"})
    temporal_kind = cfg.get("temporal")
    spatial_cfg = cfg.get("spatial")
    seed = int(cfg.get("seed", 0))
    out = _outdir(cfg.get("out_dir", args.out or "eval_out"))

    records = []
    for item in range(int(cfg["n_items"])):
        item_seed = seed + item
        rng = SeededRng(item_seed)
        payload = random_payload(
            factors.n_bits(shape), rng.with_stream(STREAM_PAYLOAD)
        )
        noise, tp = pipeline.embed(
            payload, key, shape, factors, rng.with_stream(STREAM_NOISE)
        )

        edits: list[TemporalEdit] = []
        gen = rng.with_stream(STREAM_TEMPORAL).generator()
        if temporal_kind == "swap":
            edits = [TemporalEdit("swap", int(gen.integers(0, shape.f - 1)))]
        elif temporal_kind == "drop":
            edits = [TemporalEdit("drop", int(gen.integers(0, shape.f)))]
        elif temporal_kind == "insert":
            edits = [
                TemporalEdit("insert", int(gen.integers(0, shape.f + 1)), "gaussian")
            ]
        elif temporal_kind not in (None, "none"):
            raise ValueError(f"unknown temporal tamper kind {temporal_kind!r}")
        tampered, positions = tamper_temporal(
            noise, edits, rng.with_stream(STREAM_TEMPORAL)
        )

        if spatial_cfg:
            region = random_block_region(
                tampered.shape,
                int(spatial_cfg.get("align", 4)),
                rng.with_stream(STREAM_SPATIAL),
            )
            tampered = tamper_spatial(
                tampered, region, rng.with_stream(STREAM_SPATIAL)
            )
        else:
            region = RegionMask(
                np.zeros(
                    (tampered.shape.f, tampered.shape.h, tampered.shape.w), np.uint8
                )
            )

        spec = ChannelSpec.from_dict({**channel_cfg, "seed": item_seed})
        tampered = apply_channel(tampered, spec)

        extracted = pipeline.extract(tampered, key, factors)
        result = pipeline.localize(tampered, tp, table)
        record = {
            "item": item,
            "seed": item_seed,
            "bit_accuracy": bit_accuracy(extracted, payload),
            "temporal_accuracy": temporal_accuracy(result.positions, positions),
        }
        if region.mask.any():
            m = mask_metrics(
                result.mask,
                _upscale_mask(result.soft_tamper, table.upscale),
                _align_gt_mask(region.mask, result.mask.shape),
            )
            record.update(m.to_dict())
        records.append(record)

    numeric = sorted({k for r in records for k in r if k not in ("item", "seed")})
    means = {k: float(np.mean([r[k] for r in records if k in r])) for k in numeric}
    report = {"n_items": len(records), "means": means, "items": records}
    (out / "report.json").write_text(json.dumps(report, indent=2) + "\n")
    with open(out / "report.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["item", "seed", *numeric])
        writer.writeheader()
        for r in records:
            writer.writerow(r)
    _emit(report)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noiseshield",
        description="Watermark codec and tamper localization for latent tensors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="generate a fresh watermark key")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("embed", help="create watermarked noise and payload files")
    p.add_argument("--key", required=True)
    p.add_argument("--shape", default="16,4,32,32")
    p.add_argument("--factors", default="8,1,4,4")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("extract", help="recover the payload from a latent file")
    p.add_argument("--latent", required=True)
    p.add_argument("--key", required=True)
    p.add_argument("--factors", default="8,1,4,4")
    p.add_argument("--reference", help="payload file to score accuracy against")
    p.add_argument(
        "--frames",
        type=int,
        help="original frame count; re-synchronizes frames edited out of place",
    )
    p.add_argument("--out", help="write the extracted payload here")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("simulate", help="apply channel/tamper to a latent file")
    p.add_argument("--latent", required=True)
    p.add_argument("--channel", default="identity")
    p.add_argument("--edits", help="temporal edits as JSON text or file")
    p.add_argument("--mask", help="region mask bits file (f,1,h,w)")
    p.add_argument("--region", help="rectangle f0:f1,y0:y1,x0:x1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("localize", help="temporal + spatial tamper localization")
    p.add_argument("--latent", required=True)
    p.add_argument("--key", required=True)
    p.add_argument("--factors", default="8,1,4,4")
    p.add_argument("--thresholds", required=True)
    p.add_argument("--payload", help="known payload file; extracted if omitted")
    p.add_argument("--frames", type=int, help="original frame count if it differs")
    p.add_argument("--gt", help="ground-truth positions JSON")
    p.add_argument("--gt-mask", dest="gt_mask", help="ground-truth mask bits file")
    p.add_argument("--pgm", action="store_true", help="also write per-frame PGMs")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_localize)

    p = sub.add_parser("calibrate", help="estimate thresholds from synthetic runs")
    p.add_argument("--key", required=True)
    p.add_argument("--shape", default="16,4,32,32")
    p.add_argument("--factors", default="8,1,4,4")
    p.add_argument("--channel", default="identity")
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--k", type=int, default=99)
    p.add_argument("--t-temp", dest="t_temp", type=float, default=0.55)
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--upscale", type=int, default=1)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("eval", help="batch evaluation from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="output directory override")
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("NOISESHIELD_LOG", "WARNING"))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (ValueError, OSError) as exc:
        json.dump(
            {"error": type(exc).__name__, "message": str(exc)},
            sys.stderr,
        )
        sys.stderr.write("\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
