"""Command-line front end.

Subcommands:
    pyramid  -- decompose one image and write every level plus a reconstruction
    blend    -- composite two same-size images (direct, mix, or glpb)
    scan     -- index a corpus tree and print its class/subtype/magnification table
    augment  -- balance and multiply a corpus into an output directory + manifest

Exit codes are stable: 0 success, 2 unreadable/undecodable input (also
argparse usage errors), 3 too many pyramid levels, 4 dimension mismatch,
5 insufficient patients for pairing, 6 patient missing from the fold file,
1 when every planned entry failed.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .blend import (
    BlendMask,
    BlendSpec,
    direct_blend,
    make_half_mask,
    mix_blend,
    pyramid_blend,
    seam_energy,
)
from .dataset import (
    PairingPolicy,
    apply_fold,
    execute_plan,
    fold_assignments,
    load_folds,
    plan_balancing,
    plan_multiplication,
    scan_dataset,
    write_manifest,
)
from .errors import (
    DecodeError,
    DimMismatch,
    InsufficientPatients,
    TargetDimMismatch,
    TooManyLevels,
    UnassignedPatient,
    UnreadableRoot,
)
from .imgio import load_image, save_image
from .pyramid import (
    BINOMIAL_KERNEL,
    Image,
    build_gaussian,
    build_laplacian,
    collapse,
    default_levels,
    reduce,
)

EXIT_OK = 0
EXIT_ALL_FAILED = 1
EXIT_IO = 2
EXIT_LEVELS = 3
EXIT_DIMS = 4
EXIT_PATIENTS = 5
EXIT_FOLD = 6


def _orientation(mask_kind: str) -> str:
    return "horizontal" if mask_kind == "half_horizontal" else "vertical"


def _load(path: str, resize_half: bool) -> Image:
    img = load_image(path)
    return reduce(img, BINOMIAL_KERNEL) if resize_half else img


def cmd_pyramid(args: argparse.Namespace) -> int:
    img = _load(args.input, args.resize_half)
    levels = args.levels if args.levels is not None else default_levels(img.width, img.height)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    gp = build_gaussian(img, BINOMIAL_KERNEL, levels)
    lp = build_laplacian(img, BINOMIAL_KERNEL, levels)
    for l, level in enumerate(gp.levels):
        save_image(level, out_dir / f"gauss_{l}.png")
    for l, band in enumerate(lp.band_levels):
        # bands are signed; shift into displayable range
        save_image(Image(0.5 + band.planes / 2.0), out_dir / f"laplace_{l}.png")
    save_image(lp.top, out_dir / f"laplace_{levels}.png")
    save_image(collapse(lp, BINOMIAL_KERNEL), out_dir / "recon.png")
    print(f"wrote {levels + 1} gaussian, {levels} band + 1 residual levels and recon.png to {out_dir}")
    return EXIT_OK


def _blend_mask(args: argparse.Namespace, width: int, height: int) -> BlendMask:
    if args.mask_file is not None:
        m = load_image(args.mask_file)
        planes = m.planes.mean(axis=0, keepdims=True) if m.channels != 1 else m.planes
        return BlendMask(Image(planes))
    return make_half_mask(width, height, _orientation(args.mask))


def cmd_blend(args: argparse.Namespace) -> int:
    a = _load(args.a, args.resize_half)
    b = _load(args.b, args.resize_half)
    orientation = _orientation(args.mask)
    span = a.width if orientation == "vertical" else a.height
    spec = BlendSpec(
        method=args.method,
        mask_kind="custom" if args.mask_file is not None else args.mask,
        transition_width=args.transition if args.transition is not None else span // 2,
        n_levels=args.levels,
    )
    if spec.method == "direct":
        out = direct_blend(a, b, _blend_mask(args, a.width, a.height))
    elif spec.method == "mix":
        out = mix_blend(a, b, orientation, spec.transition_width)
    else:
        levels = spec.n_levels if spec.n_levels is not None else default_levels(a.width, a.height)
        out = pyramid_blend(a, b, _blend_mask(args, a.width, a.height), BINOMIAL_KERNEL, levels)
    save_image(out, args.out)
    print(f"seam energy ({orientation}): {seam_energy(out, orientation):.6f}")
    return EXIT_OK


def cmd_scan(args: argparse.Namespace) -> int:
    index = scan_dataset(args.root)
    for path in index.malformed:
        print(f"warning: unrecognized file: {path}", file=sys.stderr)

    stats = index.subtype_stats()
    patients = index.patients_by_class()
    mags = index.magnifications()
    mag_counts: dict[tuple[str, str, int], int] = {}
    for r in index.records:
        key = (r.class_label, r.subtype, r.magnification)
        mag_counts[key] = mag_counts.get(key, 0) + 1

    mag_header = " ".join(f"{m:>6}x" for m in mags)
    print(f"{'class':<10} {'subtype':<8} {mag_header} {'images':>8} {'patients':>9}".rstrip())
    for cls in ("benign", "malignant"):
        cls_total = 0
        for (c, subtype), (n_img, n_pat) in sorted(stats.items()):
            if c != cls:
                continue
            per_mag = " ".join(f"{mag_counts.get((cls, subtype, m), 0):>7}" for m in mags)
            print(f"{cls:<10} {subtype:<8} {per_mag} {n_img:>8} {n_pat:>9}".rstrip())
            cls_total += n_img
        per_mag = " ".join(f"{index.class_mag_counts().get((cls, m), 0):>7}" for m in mags)
        print(f"{cls:<10} {'total':<8} {per_mag} {cls_total:>8} {len(patients[cls]):>9}".rstrip())
    print(f"\n{len(index.records)} images, {len(index.patients())} patients, "
          f"{len(index.malformed)} unrecognized files")
    return EXIT_OK


def cmd_augment(args: argparse.Namespace) -> int:
    index = scan_dataset(args.root)
    if index.malformed:
        print(f"warning: {len(index.malformed)} unrecognized files skipped", file=sys.stderr)

    train = index
    if args.folds is not None:
        folds = load_folds(args.folds)
        if args.fold not in folds:
            print(f"error: fold {args.fold} not present in {args.folds}", file=sys.stderr)
            return EXIT_IO
        train, _test = apply_fold(index, fold_assignments(folds[args.fold]))

    policy = PairingPolicy(
        same_magnification=not args.cross_magnification,
        same_subtype=args.same_subtype,
        restrict_to_patients=frozenset(train.patients()) if args.folds else None,
    )

    balance_plan = None
    records = []
    out_dir = Path(args.out)
    if args.balance:
        balance_plan = plan_balancing(
            train,
            policy,
            args.method,
            args.seed,
            n_levels=args.levels,
            transition_width=args.transition,
            randomize_sides=args.randomize_sides,
        )
        records.extend(
            execute_plan(balance_plan, out_dir, args.workers, resize_half=args.resize_half)
        )
    multiply_plan = plan_multiplication(
        train,
        balance_plan,
        args.factor,
        args.multiply_method,
        policy,
        args.seed,
        n_levels=args.levels,
        transition_width=args.transition,
        randomize_sides=args.randomize_sides,
    )
    if multiply_plan.entries:
        records.extend(
            execute_plan(multiply_plan, out_dir, args.workers, resize_half=args.resize_half)
        )

    out_dir.mkdir(parents=True, exist_ok=True)
    manifest_path = out_dir / "manifest.jsonl"
    write_manifest(records, manifest_path)

    ok = [r for r in records if r.status == "ok"]
    failed = [r for r in records if r.status == "failed"]
    final = {c: len(train.records_for(c)) for c in ("benign", "malignant")}
    for r in ok:
        final[r.class_label] += 1
    n_balance = len(balance_plan.entries) if balance_plan is not None else 0
    print(f"planned {len(records)} entries (balance {n_balance}, multiply {len(multiply_plan.entries)})")
    print(f"succeeded {len(ok)}, failed {len(failed)}")
    print(f"final counts: benign {final['benign']}, malignant {final['malignant']}")
    print(f"manifest: {manifest_path}")
    if failed:
        for r in failed[:10]:
            print(f"failed: {r.output}: {r.error}", file=sys.stderr)
        if len(failed) > 10:
            print(f"... and {len(failed) - 10} more failures", file=sys.stderr)
    if records and not ok:
        return EXIT_ALL_FAILED
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glpb",
        description="Pyramid-based image blending and balanced dataset augmentation.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pyramid", help="write every pyramid level of an image")
    p.add_argument("input", help="input image (PNG)")
    p.add_argument("--levels", type=int, default=None, help="pyramid depth (default: auto)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--resize-half", action="store_true", help="halve the input first")
    p.set_defaults(func=cmd_pyramid)

    p = sub.add_parser("blend", help="composite two same-size images")
    p.add_argument("a", help="image supplying the mask's 0 side")
    p.add_argument("b", help="image supplying the mask's 1 side")
    p.add_argument("--method", choices=("direct", "mix", "glpb"), default="glpb")
    p.add_argument("--mask", choices=("half_vertical", "half_horizontal"), default="half_vertical")
    p.add_argument("--mask-file", default=None, help="custom mask image (overrides --mask)")
    p.add_argument("--transition", type=int, default=None,
                   help="mix transition width in pixels (default: half the axis)")
    p.add_argument("--levels", type=int, default=None, help="glpb pyramid depth (default: auto)")
    p.add_argument("--out", required=True, help="output image path")
    p.add_argument("--resize-half", action="store_true", help="halve both inputs first")
    p.set_defaults(func=cmd_blend)

    p = sub.add_parser("scan", help="index a corpus and print its distribution table")
    p.add_argument("root", help="corpus root directory")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("augment", help="balance and multiply a corpus")
    p.add_argument("root", help="corpus root directory")
    p.add_argument("--out", required=True, help="output directory for synthetics + manifest")
    p.add_argument("--folds", default=None, help="JSON fold file (patient-wise train/test)")
    p.add_argument("--fold", type=int, default=0, help="fold index to use (default 0)")
    p.add_argument("--balance", action="store_true", help="equalize class counts first")
    p.add_argument("--factor", type=int, default=1,
                   help="multiply the balanced set to this many times its size")
    p.add_argument("--method", choices=("glpb", "mix", "direct", "jitter"), default="glpb",
                   help="method for balancing entries")
    p.add_argument("--multiply-method", choices=("jitter", "glpb", "mix", "direct"),
                   default="jitter", help="method for multiplication entries")
    p.add_argument("--levels", type=int, default=None, help="blend pyramid depth (default: auto)")
    p.add_argument("--transition", type=int, default=None, help="mix transition width")
    p.add_argument("--seed", type=int, default=0, help="global seed (default 0)")
    p.add_argument("--workers", type=int, default=1, help="parallel workers for execution")
    p.add_argument("--resize-half", action="store_true",
                   help="halve every source before processing")
    p.add_argument("--same-subtype", action="store_true",
                   help="only pair images of the same tumor subtype")
    p.add_argument("--cross-magnification", action="store_true",
                   help="allow pairs from different magnifications")
    p.add_argument("--randomize-sides", action="store_true",
                   help="randomize which source feeds each mask side")
    p.set_defaults(func=cmd_augment)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "factor", 1) < 1:
        parser.error("--factor must be >= 1")
    if getattr(args, "workers", 1) < 1:
        parser.error("--workers must be >= 1")
    try:
        return args.func(args)
    except TooManyLevels as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LEVELS
    except (DimMismatch, TargetDimMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIMS
    except InsufficientPatients as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PATIENTS
    except UnassignedPatient as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FOLD
    except (DecodeError, UnreadableRoot, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
