"""Command-line interface.

Exit codes: 0 success, 2 input or validation error, 3 numeric or fit failure.
"""
import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from . import io, synth
from .atag import AtagCorrespondence, AtagParams, atag_field
from .errors import AtagWarpError, InputError, NumericError
from .geometry import ArmChain
from .metrics import pixel_stats, ssim
from .pipeline import (
    DEFAULT_TORSO_LANDMARKS, INPAINT_EXTENDED, INPAINT_LITERAL, SLEEVES_OVER_TORSO,
    TORSO_OVER_SLEEVES, WarpConfig, run_warp, split_by_parse, split_garment, warp_sleeve,
    warp_torso,
)
from .raster import SourceMap, backward_warp

log = logging.getLogger("atagwarp")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3

INPUT_FLAGS = {
    "model_image": "--model-image",
    "person_image": "--person-image",
    "model_landmarks": "--model-keypoints",
    "person_landmarks": "--person-keypoints",
    "garment_mask": "--garment-mask",
    "model_parse": "--model-parse",
    "person_parse": "--person-parse",
    "person_upper_mask": "--person-upper-mask",
    "target_mask": "--target-mask",
}


@dataclass
class JobConfig:
    paths: dict
    warp: WarpConfig = field(default_factory=WarpConfig)
    out: Path = Path("out")

    def validate(self):
        missing = [k for k, p in self.paths.items() if not Path(p).is_file()]
        if missing:
            raise InputError("input files not found: "
                             + ", ".join(f"{k}={self.paths[k]}" for k in missing))
        return self

    def as_dict(self):
        return {"inputs": {k: str(v) for k, v in sorted(self.paths.items())},
                "parameters": self.warp.as_dict(), "out": str(self.out)}


def _add_input_args(p):
    g = p.add_argument_group("inputs")
    g.add_argument("--sample", type=Path,
                   help="sample directory holding the standard file names")
    g.add_argument("--config", type=Path, help="JSON job file; flags override it")
    for dest, flag in INPUT_FLAGS.items():
        g.add_argument(flag, dest=dest, type=Path)


def _add_param_args(p):
    g = p.add_argument_group("parameters")
    g.add_argument("--a", type=float, default=None, help="logistic steepness (1/rad), default 8")
    g.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="TPS regularisation, default 1e-3")
    g.add_argument("--conf-threshold", type=float, default=None, help="default 0.3")
    g.add_argument("--composite-order", choices=[SLEEVES_OVER_TORSO, TORSO_OVER_SLEEVES],
                   default=None)
    g.add_argument("--inpaint-mode", choices=[INPAINT_LITERAL, INPAINT_EXTENDED], default=None)
    g.add_argument("--torso-landmarks", default=None,
                   help="comma-separated keypoint names for the torso TPS")


def _job_from_args(args):
    doc = {}
    if args.config is not None:
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read job config {args.config}: {exc}") from exc
    paths = {}
    if args.sample is not None:
        paths.update(io.sample_paths(args.sample))
    for k, v in doc.get("inputs", {}).items():
        if k not in INPUT_FLAGS:
            raise InputError(f"unknown input {k!r} in job config")
        paths[k] = Path(v)
    for k in INPUT_FLAGS:
        v = getattr(args, k, None)
        if v is not None:
            paths[k] = v

    prm = dict(doc.get("parameters", {}))
    for key, attr in (("a", "a"), ("lambda", "lam"), ("conf_threshold", "conf_threshold"),
                      ("composite_order", "composite_order"), ("inpaint_mode", "inpaint_mode")):
        v = getattr(args, attr, None)
        if v is not None:
            prm[key] = v
    if getattr(args, "torso_landmarks", None):
        prm["torso_landmarks"] = [s.strip() for s in args.torso_landmarks.split(",") if s.strip()]
    atag = AtagParams(a=float(prm.get("a", 8.0)),
                      flexion_warn_limit=math.radians(float(prm.get("flexion_warn_limit_deg", 145.0))))
    warp = WarpConfig(
        atag=atag,
        lam=float(prm.get("lambda", 1e-3)),
        conf_threshold=float(prm.get("conf_threshold", 0.3)),
        torso_landmarks=tuple(prm.get("torso_landmarks", DEFAULT_TORSO_LANDMARKS)),
        composite_order=prm.get("composite_order", SLEEVES_OVER_TORSO),
        inpaint_mode=prm.get("inpaint_mode", INPAINT_LITERAL),
    )
    out = args.out if args.out is not None else Path(doc.get("out", "out"))
    return JobConfig(paths, warp, Path(out)).validate()


def _write_json(path, doc):
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True, allow_nan=False,
                                     default=_json_default) + "\n")


def _json_default(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    raise TypeError(f"not JSON serialisable: {type(v)}")


def _finite(v):
    return None if v is None or not math.isfinite(v) else v


# -- commands -------------------------------------------------------------------

def cmd_warp(args):
    job = _job_from_args(args)
    inputs = io.load_inputs(job.paths)
    result = run_warp(inputs, job.warp)
    out = job.out
    (out / "parts").mkdir(parents=True, exist_ok=True)
    io.save_image(out / "warped.png", result.warped_garment)
    io.save_mask(out / "warp_mask.png", result.warp_mask)
    io.save_mask(out / "occluded.png", result.occluded)
    io.save_mask(out / "inpaint_mask.png", result.inpaint_mask)
    io.save_image(out / "preview.png", result.preview)
    for part, w in result.per_part.items():
        io.save_image(out / "parts" / f"{part}.png", w.image)
        io.save_mask(out / "parts" / f"{part}_valid.png", w.valid)
        io.save_mask(out / "parts" / f"{part}_holes.png", w.holes)
    report = result.report()
    report["job"] = job.as_dict()
    _write_json(out / "report.json", report)
    for note in result.warnings:
        log.warning(note)
    ssim_txt = "n/a" if result.ssim_vs_source is None else f"{result.ssim_vs_source:.4f}"
    print(f"wrote {out} (warp mask {int(result.warp_mask.sum())} px, "
          f"occluded {int(result.occluded.sum())} px, ssim vs source {ssim_txt})")
    return EXIT_OK


def _single_part(args, part):
    job = _job_from_args(args)
    inputs = io.load_inputs(job.paths)
    parts = split_garment(inputs.model_image, inputs.garment_mask, inputs.model_parse)
    region = split_by_parse(inputs.target_region, inputs.person_parse)[part]
    if part == "torso":
        w = warp_torso(inputs, job.warp, parts, region)
        notes = []
    else:
        notes = []
        w = warp_sleeve(inputs, job.warp, part, parts, region, notes)
        if w.skipped:
            raise InputError(w.skipped)
    out = job.out
    out.mkdir(parents=True, exist_ok=True)
    io.save_image(out / f"{part}.png", w.image)
    io.save_mask(out / f"{part}_valid.png", w.valid)
    io.save_mask(out / f"{part}_holes.png", w.holes)
    _write_json(out / "report.json", {"job": job.as_dict(), "part": part,
                                      "stats": w.stats(), "warnings": notes})
    print(f"wrote {out / (part + '.png')} ({int(w.valid.sum())} valid px, "
          f"{int(w.holes.sum())} holes)")
    return EXIT_OK


def cmd_warp_sleeve(args):
    return _single_part(args, "lsleeve" if args.side == "left" else "rsleeve")


def cmd_warp_torso(args):
    return _single_part(args, "torso")


def _parse_chain(text, side="left"):
    try:
        v = [float(t) for t in text.split(",")]
    except ValueError as exc:
        raise InputError(f"chain must be six numbers ax,ay,bx,by,cx,cy: {text!r}") from exc
    if len(v) != 6:
        raise InputError(f"chain must be six numbers ax,ay,bx,by,cx,cy: {text!r}")
    return ArmChain.from_points(v[0:2], v[2:4], v[4:6], side)


def _parse_size(text):
    try:
        h, w = (int(t) for t in text.split(","))
    except ValueError as exc:
        raise InputError(f"size must be H,W: {text!r}") from exc
    if h <= 0 or w <= 0:
        raise InputError(f"size must be positive: {text!r}")
    return h, w


def _draw_chain(img, chain, colour=(0, 0, 0)):
    im = Image.fromarray(img)
    d = ImageDraw.Draw(im)
    pts = [tuple(chain.shoulder), tuple(chain.elbow), tuple(chain.wrist)]
    d.line(pts, fill=colour, width=1)
    for x, y in pts:
        d.ellipse([x - 2, y - 2, x + 2, y + 2], outline=colour)
    return np.asarray(im)


def demo_rect(source, target, shape, half_width=12.0, params=AtagParams()):
    """Render the strip along ``source``, warp it onto ``target``.

    Returns ``(source_img, source_mask, warped, valid, measurements)``.
    """
    src_img, src_mask = synth.arm_rectangle(source, shape, half_width)
    corr = AtagCorrespondence(target, source)
    smap = atag_field(np.ones(shape, dtype=bool), corr, params)
    warped, valid, _ = backward_warp(src_img, src_mask, smap)
    warped[~valid] = 235
    meas = {}
    for bone, tl, sl in (("upper", target.upper_length, source.upper_length),
                         ("lower", target.lower_length, source.lower_length)):
        src_len = synth.band_length(src_mask, source, bone)
        tgt_len = synth.band_length(valid, target, bone)
        meas[bone] = {
            "source_band_px": src_len,
            "target_band_px": tgt_len,
            "measured_ratio": tgt_len / src_len if src_len else None,
            "bone_length_ratio": tl / sl,
        }
    return src_img, src_mask, warped, valid, meas


def cmd_demo_rect(args):
    if args.source is None and args.target is None:
        source, target = synth.default_demo_chains()
    elif args.source is None or args.target is None:
        raise InputError("give both --source and --target, or neither for the default demo")
    else:
        source, target = _parse_chain(args.source), _parse_chain(args.target)
    shape = _parse_size(args.size)
    params = AtagParams(a=args.a if args.a is not None else 8.0)
    src_img, _, warped, _, meas = demo_rect(source, target, shape, args.half_width, params)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    gap = np.full((shape[0], 6, 3), 255, dtype=np.uint8)
    panel = np.concatenate([_draw_chain(src_img, source), gap,
                            _draw_chain(warped, target)], axis=1)
    io.save_image(out / "demo_rect.png", panel)
    io.save_image(out / "source.png", src_img)
    io.save_image(out / "warped.png", warped)
    _write_json(out / "demo_rect.json", {
        "source": source.as_array().tolist(), "target": target.as_array().tolist(),
        "size": list(shape), "a": params.a, "bands": meas})
    for bone, m in meas.items():
        print(f"{bone}: band {m['source_band_px']:.2f} -> {m['target_band_px']:.2f} px, "
              f"ratio {m['measured_ratio']:.3f} (bone ratio {m['bone_length_ratio']:.3f})")
    return EXIT_OK


def field_images(smap, step=12, scale=None):
    """Displacement-magnitude heatmap and an arrow plot of a SourceMap."""
    from matplotlib import colormaps

    disp = smap.displacement()
    mag = np.hypot(disp[..., 0], disp[..., 1])
    defined = smap.defined
    top = scale if scale else (float(mag[defined].max()) if defined.any() else 0.0)
    norm = np.zeros_like(mag)
    if top > 0:
        norm[defined] = np.clip(mag[defined] / top, 0.0, 1.0)
    rgba = colormaps["viridis"](norm)
    heat = np.rint(rgba[..., :3] * 255).astype(np.uint8)
    heat[~defined] = 0

    h, w = smap.shape
    im = Image.new("RGB", (w, h), (245, 245, 245))
    d = ImageDraw.Draw(im)
    for y in range(step // 2, h, step):
        for x in range(step // 2, w, step):
            if not defined[y, x]:
                continue
            dx, dy = disp[y, x]
            d.line([(x, y), (x + dx, y + dy)], fill=(200, 30, 30))
            d.point((x, y), fill=(0, 0, 0))
    return heat, np.asarray(im), mag


def cmd_field(args):
    if args.source is not None or args.target is not None:
        if args.source is None or args.target is None:
            raise InputError("chain mode needs both --source and --target")
        source, target = _parse_chain(args.source), _parse_chain(args.target)
        shape = _parse_size(args.size)
        params = AtagParams(a=args.a if args.a is not None else 8.0)
        smap = atag_field(np.ones(shape, dtype=bool), AtagCorrespondence(target, source), params)
        meta = {"mode": "chains", "source": source.as_array().tolist(),
                "target": target.as_array().tolist(), "a": params.a}
    else:
        job = _job_from_args(args)
        inputs = io.load_inputs(job.paths)
        parts = split_garment(inputs.model_image, inputs.garment_mask, inputs.model_parse)
        region = split_by_parse(inputs.target_region, inputs.person_parse)[args.part]
        if args.part == "torso":
            w = warp_torso(inputs, job.warp, parts, region)
        else:
            w = warp_sleeve(inputs, job.warp, args.part, parts, region)
            if w.skipped:
                raise InputError(w.skipped)
        smap = w.source_map
        meta = {"mode": "sample", "part": args.part, "job": job.as_dict()}
    heat, quiver, mag = field_images(smap, step=args.step)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    io.save_image(out / "field_magnitude.png", heat)
    io.save_image(out / "field_quiver.png", quiver)
    np.savez_compressed(out / "field.npz", coords=smap.coords, defined=smap.defined)
    defined = smap.defined
    meta["mean_displacement_px"] = float(mag[defined].mean()) if defined.any() else 0.0
    meta["max_displacement_px"] = float(mag[defined].max()) if defined.any() else 0.0
    _write_json(out / "field.json", meta)
    print(f"wrote field images to {out} (max displacement {meta['max_displacement_px']:.2f} px)")
    return EXIT_OK


def evaluate_sample(directory, config=None):
    """Warp a self-pair and score it against the person's own garment pixels.

    For a self-pair the person already wears the garment, so the person image
    inside the target region is the ground truth; uncovered pixels stay black
    in the warp and lower the score.
    """
    inputs = io.load_sample(directory)
    if inputs.model_image.shape != inputs.person_image.shape:
        raise InputError(f"{directory}: model and person frames differ; identity scoring "
                         "needs matching frames")
    result = run_warp(inputs, config or WarpConfig())
    roi = inputs.target_region
    truth = inputs.person_image.copy()
    truth[~roi] = 0
    if not roi.any():
        raise InputError(f"{directory}: empty target region")
    stats = pixel_stats(result.warped_garment, truth, roi)
    return {"ssim": ssim(result.warped_garment, truth, roi=roi), **stats,
            "occluded_px": int(result.occluded.sum()),
            "warp_mask_px": int(result.warp_mask.sum())}


def cmd_eval_identity(args):
    root = Path(args.directory)
    if not root.is_dir():
        raise InputError(f"not a directory: {root}")
    samples = sorted(p for p in root.iterdir() if (p / io.SAMPLE_FILES["model_image"]).is_file())
    if not samples:
        raise InputError(f"no sample directories under {root}")
    job_args = argparse.Namespace(config=None, sample=None, out=None,
                                  **{k: None for k in INPUT_FLAGS},
                                  a=args.a, lam=args.lam, conf_threshold=args.conf_threshold,
                                  composite_order=None, inpaint_mode=None, torso_landmarks=None)
    config = _job_from_args(job_args).warp
    rows = []
    for d in samples:
        r = evaluate_sample(d, config)
        flag = "ok" if r["ssim"] >= args.threshold else "below_threshold"
        rows.append({"sample": d.name, "ssim": r["ssim"], "mae": r["mae"], "rmse": r["rmse"],
                     "psnr": _finite(r["psnr"]), "occluded_px": r["occluded_px"],
                     "warp_mask_px": r["warp_mask_px"], "flag": flag})
    out = args.out or (root / "identity_eval.csv")
    with open(out, "w", newline="") as fh:
        wr = csv.DictWriter(fh, fieldnames=list(rows[0]))
        wr.writeheader()
        wr.writerows(rows)
    bad = [r["sample"] for r in rows if r["flag"] != "ok"]
    print(f"wrote {out}: {len(rows)} samples, {len(bad)} below {args.threshold}"
          + (f" ({', '.join(bad)})" if bad else ""))
    return EXIT_OK


def cmd_make_samples(args):
    out = args.out
    for i in range(args.count):
        seed = args.seed + i
        if args.kind == "identity":
            s = synth.identity_sample(seed, with_target_mask=not args.no_target_mask)
        else:
            s = synth.pose_pair(seed)
        io.save_sample(out / f"{args.kind}_{seed:04d}", s)
    print(f"wrote {args.count} {args.kind} samples to {out}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="atagwarp",
                                description="Part-based garment warping between poses.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    w = sub.add_parser("warp", help="warp a garment from the model onto the person")
    _add_input_args(w)
    _add_param_args(w)
    w.add_argument("--out", type=Path)
    w.set_defaults(func=cmd_warp)

    s = sub.add_parser("warp-sleeve", help="warp a single sleeve")
    _add_input_args(s)
    _add_param_args(s)
    s.add_argument("--side", choices=["left", "right"], required=True)
    s.add_argument("--out", type=Path)
    s.set_defaults(func=cmd_warp_sleeve)

    t = sub.add_parser("warp-torso", help="warp the torso part only")
    _add_input_args(t)
    _add_param_args(t)
    t.add_argument("--out", type=Path)
    t.set_defaults(func=cmd_warp_torso)

    d = sub.add_parser("demo-rect", help="warp a textured strip between two arm poses")
    d.add_argument("--source", help="model chain ax,ay,bx,by,cx,cy")
    d.add_argument("--target", help="person chain ax,ay,bx,by,cx,cy")
    d.add_argument("--size", default="160,220", help="frame H,W")
    d.add_argument("--half-width", type=float, default=12.0)
    d.add_argument("--a", type=float, default=None)
    d.add_argument("--out", type=Path, required=True)
    d.set_defaults(func=cmd_demo_rect)

    f = sub.add_parser("field", help="visualise a backward displacement field")
    _add_input_args(f)
    _add_param_args(f)
    f.add_argument("--part", choices=["torso", "lsleeve", "rsleeve"], default="lsleeve")
    f.add_argument("--source", help="chain mode: model chain ax,ay,bx,by,cx,cy")
    f.add_argument("--target", help="chain mode: person chain ax,ay,bx,by,cx,cy")
    f.add_argument("--size", default="160,220", help="chain mode frame H,W")
    f.add_argument("--step", type=int, default=12, help="arrow spacing in px")
    f.add_argument("--out", type=Path, required=True)
    f.set_defaults(func=cmd_field)

    e = sub.add_parser("eval-identity", help="score a directory of sample pairs")
    e.add_argument("directory", type=Path)
    e.add_argument("--out", type=Path)
    e.add_argument("--threshold", type=float, default=0.99)
    e.add_argument("--a", type=float, default=None)
    e.add_argument("--lambda", dest="lam", type=float, default=None)
    e.add_argument("--conf-threshold", type=float, default=None)
    e.set_defaults(func=cmd_eval_identity)

    m = sub.add_parser("make-samples", help="write synthetic sample directories")
    m.add_argument("out", type=Path)
    m.add_argument("--count", type=int, default=20)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--kind", choices=["identity", "pose"], default="identity")
    m.add_argument("--no-target-mask", action="store_true")
    m.set_defaults(func=cmd_make_samples)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except AtagWarpError as exc:  # pragma: no cover - every subclass is one of the two
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
