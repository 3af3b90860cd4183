"""Adapter CLI: generate, invert, and tamper, mirroring the core's flags.

The default backend is the deterministic mock (no model downloads); pass
--real to run the diffusers backend, which needs the 'real' extra and a GPU
to be practical.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import mock_backend
from .formats import read_latent, write_bits, write_latent
from .profiles import get_profile
from .tamper import (
    apply_distortion,
    apply_frame_edits,
    crop_drop,
    ground_truth,
)
from .video import load_video, save_video


def _emit(obj: dict) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _backend(real: bool):
    if real:
        from . import diffusers_backend

        return diffusers_backend
    return mock_backend


def cmd_generate(args) -> None:
    profile = get_profile(args.profile)
    latents = read_latent(args.noise)
    profile.check_latent_shape(latents.shape)
    backend = _backend(args.real)
    if args.real:
        frames = backend.generate_frames(latents, profile, args.prompt, args.seed)
    else:
        frames = backend.generate_frames(latents, profile)
    save_video(args.out, frames)
    meta = {
        "profile": profile.name,
        "model_id": profile.model_id,
        "prompt": args.prompt,
        "frames": int(frames.shape[0]),
        "resolution": int(frames.shape[1]),
        "video": str(args.out),
    }
    Path(str(args.out) + ".json").write_text(json.dumps(meta, indent=2) + "\n")
    _emit(meta)


def cmd_invert(args) -> None:
    profile = get_profile(args.profile)
    frames = load_video(args.video)
    backend = _backend(args.real)
    latents = backend.invert_frames(frames, profile)
    write_latent(args.out, latents)
    _emit({"latent": str(args.out), "shape": list(latents.shape)})


def cmd_tamper(args) -> None:
    frames = load_video(args.video)
    rng = np.random.default_rng(args.seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    edits = json.loads(args.edits) if args.edits else []
    frames, positions = apply_frame_edits(frames, edits, rng)

    pixel_ops: list[dict] = []
    mask_file = None
    if args.crop_drop:
        ratio_text, _, mode = args.crop_drop.partition(":")
        mode = mode or "drop"
        frames, mask = crop_drop(frames, float(ratio_text), mode, rng, args.fill)
        pixel_ops.append({"op": "crop_drop", "ratio": float(ratio_text), "mode": mode})
        mask_file = "gt_mask.vsbt"
        write_bits(out_dir / mask_file, mask[:, None])
    for spec in args.distort or []:
        name, _, param = spec.partition(":")
        frames = apply_distortion(frames, name, float(param) if param else 0.0, rng)
        pixel_ops.append({"op": name, "param": float(param) if param else 0.0})

    video_path = out_dir / ("tampered" + Path(args.video).suffix)
    save_video(video_path, frames)
    gt = ground_truth(positions, mask_file, edits, pixel_ops)
    (out_dir / "ground_truth.json").write_text(json.dumps(gt, indent=2) + "\n")
    _emit({"tampered": str(video_path), "ground_truth": str(out_dir / "ground_truth.json")})


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noiseshield-adapter",
        description="Video-pipeline adapter for the noiseshield core.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="denoise watermarked noise into a video")
    p.add_argument("--noise", required=True, help="initial latent (VSLT)")
    p.add_argument("--profile", default="mock-256")
    p.add_argument("--prompt", default="")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--real", action="store_true", help="use the diffusers backend")
    p.add_argument("--out", required=True, help="video output path (.npz/.gif/.mp4)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("invert", help="recover the initial latent from a video")
    p.add_argument("--video", required=True)
    p.add_argument("--profile", default="mock-256")
    p.add_argument("--real", action="store_true")
    p.add_argument("--out", required=True, help="latent output path (VSLT)")
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("tamper", help="pixel-space tamper and distortions")
    p.add_argument("--video", required=True)
    p.add_argument("--edits", help="frame edits JSON, core syntax")
    p.add_argument("--crop-drop", dest="crop_drop", help="ratio[:crop|drop]")
    p.add_argument("--fill", default="black", choices=["black", "flip"])
    p.add_argument("--distort", action="append", help="name:param, repeatable")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_tamper)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
