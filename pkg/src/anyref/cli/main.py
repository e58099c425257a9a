"""Command line entry point: ``anyref <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from contextlib import contextmanager
from pathlib import Path

from .. import evalkit
from ..anyres import default_catalog, select_grid, tile, token_count
from ..encoders import dump_feature_map
from ..geometry import Dims, NormBox, UndefinedIoUError, normalize_shape
from ..promptgen import EmptyAnnotationError, gen_dense_detection, gen_dense_referring
from ..schedule import plan
from .config import Config, ConfigError
from .corpus import SchemaError, load_corpus, load_predictions
from .pipeline import Models, encode_image, run_pipeline, write_jsonl
from .ppm import ImageReadError, read_ppm, write_ppm
from .synth import gen_synthetic_corpus


class CLIError(Exception):
    pass


def warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


@contextmanager
def output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w") as fh:
            yield fh


def load_config(args) -> Config:
    cfg = Config.load(args.config) if args.config else Config()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if getattr(args, "tokens_per_image", None) is not None:
        overrides["tokens_per_image"] = args.tokens_per_image
    return cfg.replace(**overrides) if overrides else cfg


def check_budget(cfg: Config) -> bool:
    """Warn for every catalog grid whose token count exceeds the budget."""
    ok = True
    for grid in default_catalog(cfg.max_cells):
        n = token_count(grid, cfg.tokens_per_image)
        if n > cfg.token_budget:
            warn(f"grid {grid} needs {n} tokens, over the budget of {cfg.token_budget}")
            ok = False
    return ok


# -- subcommands -----------------------------------------------------------


def cmd_preprocess(args, cfg):
    check_budget(cfg)
    if args.image:
        images = [("image", args.image)]
    else:
        images = [(img.image_id, img.image_path) for img in load_corpus(args.corpus)]
    catalog = default_catalog(cfg.max_cells)
    with output(args.out) as fh:
        for image_id, path in images:
            try:
                raster = read_ppm(path)
            except ImageReadError as e:
                fh.write(json.dumps({"image_id": image_id, "error": str(e)}) + "\n")
                continue
            dims = Dims(raster.shape[1], raster.shape[0])
            grid = select_grid(dims, catalog, cfg.cell_size)
            n = token_count(grid, cfg.tokens_per_image)
            rec = {"image_id": image_id, "width": dims.width, "height": dims.height,
                   "grid": [grid.rows, grid.cols], "canvas": [grid.cols * cfg.cell_size, grid.rows * cfg.cell_size],
                   "token_count": n, "within_budget": n <= cfg.token_budget}
            if args.tiles_dir:
                tiles = Path(args.tiles_dir)
                tiles.mkdir(parents=True, exist_ok=True)
                global_view, patches, _ = tile(raster, grid, cfg.cell_size)
                write_ppm(tiles / f"{image_id}_global.ppm", global_view)
                for k, p in enumerate(patches):
                    write_ppm(tiles / f"{image_id}_patch{k}.ppm", p)
            fh.write(json.dumps(rec) + "\n")
    return 0


def cmd_encode(args, cfg):
    image = read_ppm(args.image)
    enc = encode_image(image, cfg, Models.from_config(cfg))
    with output(args.out) as fh:
        for name, fm in (("global", enc.global_map), ("merged", enc.merged), ("fused", enc.fused)):
            fh.write(json.dumps({"name": name, **json.loads(dump_feature_map(fm))}) + "\n")
    return 0


def cmd_refer(args, cfg):
    check_budget(cfg)
    records = run_pipeline(load_corpus(args.corpus), cfg, threads=args.threads)
    with output(args.out) as fh:
        errors = write_jsonl(records, fh)
    if errors:
        warn(f"{errors} image(s) failed; see error entries")
    print(f"processed {len(records)} image(s), {errors} error(s)", file=sys.stderr)
    return 0


def cmd_gen_dense(args, cfg):
    kinds = {"both": (gen_dense_referring, gen_dense_detection),
             "refer": (gen_dense_referring,), "detect": (gen_dense_detection,)}[args.kind]
    with output(args.out) as fh:
        for img in load_corpus(args.corpus):
            for gen in kinds:
                try:
                    sample = gen(img)
                except EmptyAnnotationError as e:
                    warn(f"skipping: {e}")
                    break
                fh.write(sample.to_json(img.image_id) + "\n")
    return 0


def cmd_gen_corpus(args, cfg):
    if not args.out:
        raise CLIError("gen-corpus needs --out DIR")
    try:
        records = gen_synthetic_corpus(args.n, cfg.seed, args.out, args.width, args.height)
    except OSError as e:
        raise CLIError(f"cannot write corpus to {args.out}: {e.strerror or e}") from None
    print(f"wrote {len(records)} image(s) to {Path(args.out) / 'corpus.jsonl'}", file=sys.stderr)
    return 0


def _resolve(preds, corpus):
    by_id = {img.image_id: img for img in corpus}
    out = []
    for p in preds:
        img = by_id.get(p.image_id)
        if img is None:
            raise CLIError(f"prediction refers to unknown image_id {p.image_id!r}")
        try:
            obj = img.objects[int(p.item_id)]
        except (ValueError, IndexError):
            raise CLIError(f"{p.image_id}: item_id {p.item_id!r} is not an object index") from None
        out.append((p, img, obj))
    return out


def _pred_box(p):
    if p.box is not None:
        return p.box
    if p.text:
        for m in evalkit.parse_grounded_text(p.text):
            if isinstance(m.shape, NormBox):
                return m.shape
    return None


def ref_type(obj) -> str:
    if obj.polygon is not None:
        return "free-form"
    return "point" if obj.box.area == 0 else "box"


def cmd_eval(args, cfg):
    preds = load_predictions(args.preds)
    corpus = load_corpus(args.gt)
    if args.metric == "rec":
        pb, gb, dims, missing = [], [], [], 0
        for p, img, obj in _resolve(preds, corpus):
            box = _pred_box(p)
            if box is None:
                missing += 1
                continue
            pb.append(box)
            gb.append(normalize_shape(obj.box, img.dims))
            dims.append(img.dims)
        if not pb:
            report = evalkit.EvalReport("rec_acc@0.5", 0, missing)
        else:
            rep = evalkit.eval_rec(pb, gb, dims)
            report = evalkit.EvalReport(rep.metric, rep.numerator, rep.denominator + missing)
    elif args.metric == "roc":
        labels, gts = [], []
        for p, img, obj in _resolve(preds, corpus):
            labels.append(p.category if p.category is not None else (p.text or ""))
            gts.append((obj.category, p.ref_type or ref_type(obj)))
        report = evalkit.eval_roc(labels, gts)
    else:
        gts, dims, pmap = {}, {}, {}
        for img in corpus:
            for obj in img.objects:
                key = f"{img.image_id}\t{obj.category}"
                gts.setdefault(key, []).append(normalize_shape(obj.box, img.dims))
                dims[key] = img.dims
        for p in preds:
            if p.category is not None and p.box is not None:
                pmap.setdefault(f"{p.image_id}\t{p.category}", p.box)
            elif p.text:
                for m in evalkit.parse_grounded_text(p.text):
                    if isinstance(m.shape, NormBox):
                        pmap.setdefault(f"{p.image_id}\t{m.span}", m.shape)
        if args.images_with_preds_only:
            keep = {p.image_id for p in preds}
            gts = {k: v for k, v in gts.items() if k.split("\t", 1)[0] in keep}
        report = evalkit.eval_phrase_grounding(pmap, gts, dims)
    text = report.to_json(indent=2)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
    return 0


def cmd_schedule(args, cfg):
    with output(args.out) as fh:
        fh.write(json.dumps(plan(), indent=2) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--seed", type=int, help="override the global seed")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", help="output file (directory for gen-corpus); default stdout")

    parser = argparse.ArgumentParser(prog="anyref", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", parents=[common], help="select grids and report token counts")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--corpus")
    src.add_argument("--image")
    p.add_argument("--tiles-dir", help="also write global view and patches as PPM")
    p.add_argument("--tokens-per-image", type=int)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("encode", parents=[common], help="dump global, merged and fused feature maps")
    p.add_argument("--image", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("refer", parents=[common], help="run the full pipeline over a corpus")
    p.add_argument("corpus")
    p.add_argument("--tokens-per-image", type=int)
    p.set_defaults(func=cmd_refer)

    p = sub.add_parser("gen-dense", parents=[common], help="dense referring/detection QA samples")
    p.add_argument("corpus")
    p.add_argument("--kind", choices=["both", "refer", "detect"], default="both")
    p.set_defaults(func=cmd_gen_dense)

    p = sub.add_parser("gen-corpus", parents=[common], help="write a synthetic corpus")
    p.add_argument("-n", type=int, default=10)
    p.add_argument("--width", type=int, default=1024)
    p.add_argument("--height", type=int, default=768)
    p.set_defaults(func=cmd_gen_corpus)

    for metric in ("rec", "roc", "ground"):
        p = sub.add_parser(f"eval-{metric}", parents=[common], help=f"{metric} metric report")
        p.add_argument("preds")
        p.add_argument("gt")
        if metric == "ground":
            p.add_argument("--images-with-preds-only", action="store_true",
                           help="ignore ground-truth phrases of images without any prediction")
        p.set_defaults(func=cmd_eval, metric=metric, images_with_preds_only=False)

    p = sub.add_parser("schedule", parents=[common], help="print the stage trainability plan")
    p.set_defaults(func=cmd_schedule)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        return args.func(args, cfg)
    except (CLIError, ConfigError, SchemaError, ImageReadError, FileNotFoundError, UndefinedIoUError,
            evalkit.PairingError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
