"""Stage orchestration for the end-to-end pipeline.

Every stage reads artifacts produced by earlier stages from disk and writes
its own next to them, so external producers (for example a deep model
exporting map blobs) can replace any stage that honors the file formats.
Stage reports record counts, timings, and sha256 digests of inputs and
outputs; a stage verifies the digests recorded by its producer before
consuming, which makes intermediate tampering detectable and reruns
comparable.

Expected input layout per category:

    <input>/<category>/train/good/*.png   training normals
    <input>/<category>/test/*.png         test images
    <input>/<category>/ground_truth/*.png optional masks, nonzero = anomalous
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from .amap import read_amap, write_amap
from .augment import augment_tile
from .binarize import coarse_mask
from .config import CategoryConfig
from .errors import (
    IncompleteInputError,
    NotFoundError,
    PreconditionError,
    RefinementError,
    TilebinError,
)
from .geometry import (
    crop_tile,
    manifest_records,
    plan_tiles,
    read_tile_manifest,
    tile_key,
    write_tile_manifest,
)
from .images import load_image, load_mask, save_image, save_mask
from .merger import merge_from_blobs, merged_blob_name
from .metrics import aupro, class_f1, f1_max, image_score, seg_f1, write_metrics_report
from .refine import NullSegmenter, SocketSegmenter, refine_mask
from .scorers import FileScorer, IdentityScorer, fit_stat_scorer, score_tile

log = logging.getLogger(__name__)

STAGES = ("tile", "augment", "score", "merge", "binarize", "refine", "eval")
SEGMENTER_ENV = "TILEBIN_SEGMENTER"
IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff")


class CategoryIO:
    """All input and output paths of one category."""

    def __init__(self, input_root: str | Path, output_root: str | Path, category: str):
        self.category = category
        self.output_root = Path(output_root)
        self.input = Path(input_root) / category
        self.out = self.output_root / category
        self.test_images = self.input / "test"
        self.train_images = self.input / "train" / "good"
        self.gt_dir = self.input / "ground_truth"
        self.tiles_test = self.out / "tiles" / "test"
        self.tiles_train = self.out / "tiles" / "train"
        self.test_manifest = self.out / "tiles" / "test_manifest.jsonl"
        self.train_manifest = self.out / "tiles" / "train_manifest.jsonl"
        self.augment_manifest = self.out / "tiles" / "train" / "augment_manifest.jsonl"
        self.maps = self.out / "maps"
        self.merged = self.out / "merged"
        self.coarse = self.out / "masks" / "coarse"
        self.refined = self.out / "masks" / "refined"
        self.reports = self.out / "reports"

    def relative(self, path: Path) -> str:
        # artifacts are keyed relative to the output root so digests compare
        # across runs; input files (outside the root) keep their full path
        try:
            return Path(path).relative_to(self.output_root).as_posix()
        except ValueError:
            return Path(path).as_posix()


def list_images(directory: Path) -> list[Path]:
    if not directory.is_dir():
        return []
    return sorted(p for p in directory.iterdir() if p.suffix.lower() in IMAGE_EXTENSIONS)


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _parallel(worker, items, workers: int) -> list:
    if workers <= 1:
        return [worker(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, items))


def _require(path: Path, what: str) -> Path:
    if not path.exists():
        raise PreconditionError(f"missing {what}: {path}")
    return path


def _verify_chain(io: CategoryIO, producer: str, files: list[Path]) -> None:
    """Check consumed files against the digests the producer stage recorded."""
    report_path = io.reports / f"{producer}.json"
    if not report_path.is_file():
        return
    recorded = json.loads(report_path.read_text(encoding="utf-8")).get("outputs", {})
    for f in files:
        rel = io.relative(f)
        if rel in recorded and _sha256(f) != recorded[rel]:
            raise PreconditionError(f"{rel} changed since the {producer} stage produced it")


def _write_report(io: CategoryIO, stage: str, counts: dict, inputs: list[Path],
                  outputs: list[Path], started: float, extra: dict | None = None) -> dict:
    report = {
        "stage": stage,
        "category": io.category,
        "counts": counts,
        "seconds": round(time.perf_counter() - started, 6),
        "inputs": {io.relative(p): _sha256(p) for p in sorted(set(inputs))},
        "outputs": {io.relative(p): _sha256(p) for p in sorted(set(outputs))},
    }
    if extra:
        report.update(extra)
    io.reports.mkdir(parents=True, exist_ok=True)
    (io.reports / f"{stage}.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return report


# --- stages ------------------------------------------------------------------


def stage_tile(cfg: CategoryConfig, io: CategoryIO, *, train: bool = False,
               workers: int = 1) -> dict:
    started = time.perf_counter()
    src = io.train_images if train else io.test_images
    tiles_dir = io.tiles_train if train else io.tiles_test
    manifest_path = io.train_manifest if train else io.test_manifest
    images = list_images(src)

    def work(path: Path):
        img = load_image(path)
        h, w = img.shape[:2]
        plan = plan_tiles(w, h, cfg.window, cfg.overlap_fraction)
        records = manifest_records(path.stem, plan)
        written = []
        for rec in records:
            tile = crop_tile(img, rec.rect, cfg.window)
            out_path = tiles_dir / f"{tile_key(rec.image_id, rec.row_index, rec.col_index)}.png"
            save_image(out_path, tile)
            written.append(out_path)
        return records, written

    results = _parallel(work, images, workers)
    all_records = [rec for records, _ in results for rec in records]
    outputs = [p for _, written in results for p in written]
    write_tile_manifest(manifest_path, all_records)
    outputs.append(manifest_path)
    counts = {"images": len(images), "tiles": len(all_records)}
    # train and test tiling keep separate reports so neither digest record
    # clobbers the other
    return _write_report(io, "tile_train" if train else "tile", counts,
                         images, outputs, started)


def stage_augment(cfg: CategoryConfig, io: CategoryIO, *, seed: int | None = None,
                  workers: int = 1) -> dict:
    started = time.perf_counter()
    _require(io.train_manifest, "train tile manifest (run `tile --train` first)")
    records = read_tile_manifest(io.train_manifest)
    _verify_chain(io, "tile_train", [
        io.tiles_train / f"{tile_key(r.image_id, r.row_index, r.col_index)}.png"
        for r in records
    ])
    params = replace(cfg.augment, seed=cfg.augment.seed if seed is None else seed)

    def work(indexed):
        index, rec = indexed
        key = tile_key(rec.image_id, rec.row_index, rec.col_index)
        tile = load_image(io.tiles_train / f"{key}.png")
        out, record = augment_tile(tile, index, params)
        out_path = io.tiles_train / f"{key}__aug.png"
        save_image(out_path, out)
        return out_path, {
            "tile": f"{key}.png",
            "applied": record.applied,
            "lambda": record.lam,
            "noise_seed": list(record.noise_seed),
        }

    results = _parallel(work, list(enumerate(records)), workers)
    outputs = [path for path, _ in results]
    with io.augment_manifest.open("w", encoding="utf-8") as fh:
        for _, entry in results:
            fh.write(json.dumps(entry) + "\n")
    outputs.append(io.augment_manifest)
    inputs = [io.tiles_train / e["tile"] for _, e in results] + [io.train_manifest]
    counts = {
        "tiles": len(records),
        "augmented": sum(1 for _, e in results if e["applied"]),
    }
    return _write_report(io, "augment", counts, inputs, outputs, started,
                         extra={"params": asdict(params)})


def _build_scorer(cfg: CategoryConfig, io: CategoryIO):
    kind = cfg.scorer.kind
    if kind == "identity":
        return IdentityScorer()
    if kind == "file":
        return FileScorer(cfg.scorer.directory)
    _require(io.train_manifest, "train tile manifest (stat scorer fits on train tiles)")
    train_records = read_tile_manifest(io.train_manifest)
    if not train_records:
        raise PreconditionError(f"stat scorer needs train tiles for {io.category}, found none")

    def samples():
        for rec in train_records:
            key = tile_key(rec.image_id, rec.row_index, rec.col_index)
            yield load_image(io.tiles_train / f"{key}.png"), (rec.row_index, rec.col_index)

    return fit_stat_scorer(samples(), cfg.model_resolution)


def stage_score(cfg: CategoryConfig, io: CategoryIO, *, workers: int = 1) -> dict:
    started = time.perf_counter()
    _require(io.test_manifest, "test tile manifest (run `tile` first)")
    records = read_tile_manifest(io.test_manifest)
    tile_paths = [
        io.tiles_test / f"{tile_key(r.image_id, r.row_index, r.col_index)}.png" for r in records
    ]
    for p in tile_paths:
        _require(p, "test tile")
    _verify_chain(io, "tile", tile_paths + [io.test_manifest])
    scorer = _build_scorer(cfg, io)

    def work(pair):
        rec, tile_path = pair
        tile = load_image(tile_path)
        values = score_tile(scorer, tile, rec)
        out_path = io.maps / f"{tile_key(rec.image_id, rec.row_index, rec.col_index)}.amap"
        write_amap(out_path, np.asarray(values, dtype=np.float32))
        return out_path

    outputs = _parallel(work, list(zip(records, tile_paths)), workers)
    counts = {"tiles": len(records), "maps": len(outputs)}
    return _write_report(io, "score", counts, tile_paths + [io.test_manifest], outputs, started,
                         extra={"scorer": cfg.scorer.kind})


def _records_by_image(records):
    grouped: dict[str, list] = {}
    for rec in records:
        grouped.setdefault(rec.image_id, []).append(rec)
    return dict(sorted(grouped.items()))


def stage_merge(cfg: CategoryConfig, io: CategoryIO, *, workers: int = 1) -> dict:
    started = time.perf_counter()
    _require(io.test_manifest, "test tile manifest")
    records = read_tile_manifest(io.test_manifest)
    grouped = _records_by_image(records)
    map_paths = [
        io.maps / f"{tile_key(r.image_id, r.row_index, r.col_index)}.amap" for r in records
    ]
    for p in map_paths:
        _require(p, "tile anomaly map")
    _verify_chain(io, "score", map_paths)

    def work(item):
        image_id, recs = item
        try:
            merged = merge_from_blobs(recs, io.maps, cfg.overlap_fraction)
        except (NotFoundError, IncompleteInputError) as exc:
            raise PreconditionError(f"{image_id}: {exc}") from exc
        out_path = io.merged / merged_blob_name(image_id)
        write_amap(out_path, merged.astype(np.float32))
        return out_path

    outputs = _parallel(work, list(grouped.items()), workers)
    counts = {"images": len(grouped), "tile_maps": len(records)}
    return _write_report(io, "merge", counts, map_paths + [io.test_manifest], outputs, started)


def stage_binarize(cfg: CategoryConfig, io: CategoryIO, *, workers: int = 1) -> dict:
    started = time.perf_counter()
    _require(io.test_manifest, "test tile manifest")
    image_ids = sorted(_records_by_image(read_tile_manifest(io.test_manifest)))
    merged_paths = [io.merged / merged_blob_name(i) for i in image_ids]
    for p in merged_paths:
        _require(p, "merged anomaly map")
    _verify_chain(io, "merge", merged_paths)

    def work(image_id):
        values = read_amap(io.merged / merged_blob_name(image_id))
        fused, stat_t, adaptive_t = coarse_mask(values, cfg.mebin)
        out_path = io.coarse / f"{image_id}.png"
        save_mask(out_path, fused)
        return out_path, {"image_id": image_id, "mean3std": stat_t, "adaptive": adaptive_t}

    results = _parallel(work, image_ids, workers)
    outputs = [p for p, _ in results]
    counts = {"images": len(image_ids)}
    return _write_report(io, "binarize", counts, merged_paths, outputs, started,
                         extra={"thresholds": [t for _, t in results]})


def _build_segmenter(cfg: CategoryConfig):
    endpoint = os.environ.get(SEGMENTER_ENV)
    if endpoint:
        return SocketSegmenter(endpoint, variant=cfg.segmenter_variant)
    log.warning("no segmenter endpoint configured (%s); refinement falls back to "
                "the null segmenter and keeps coarse components", SEGMENTER_ENV)
    return NullSegmenter()


def stage_refine(cfg: CategoryConfig, io: CategoryIO, *, workers: int = 1) -> dict:
    started = time.perf_counter()
    _require(io.test_manifest, "test tile manifest")
    image_ids = sorted(_records_by_image(read_tile_manifest(io.test_manifest)))
    sources = {p.stem: p for p in list_images(io.test_images)}
    coarse_paths = []
    for image_id in image_ids:
        coarse_paths.append(_require(io.coarse / f"{image_id}.png", "coarse mask"))
        if image_id not in sources:
            raise PreconditionError(f"missing test image for {image_id}")
    _verify_chain(io, "binarize", coarse_paths)
    segmenter = _build_segmenter(cfg)
    mode = cfg.resolved_refine_mode()

    def work(image_id):
        mask = load_mask(io.coarse / f"{image_id}.png")
        image = load_image(sources[image_id])
        try:
            refined = refine_mask(mask, image, segmenter, mode, image_path=str(sources[image_id]))
        except RefinementError as exc:
            log.warning("%s: refinement failed (%s); keeping the coarse mask", image_id, exc)
            refined = mask
        out_path = io.refined / f"{image_id}.png"
        save_mask(out_path, refined)
        return out_path

    outputs = _parallel(work, image_ids, workers)
    counts = {"images": len(image_ids)}
    inputs = coarse_paths + [sources[i] for i in image_ids]
    return _write_report(io, "refine", counts, inputs, outputs, started,
                         extra={"mode": mode.value})


def stage_eval(cfg: CategoryConfig, io: CategoryIO) -> tuple[dict, dict]:
    """Returns (stage report, metric row for the combined report)."""
    started = time.perf_counter()
    _require(io.test_manifest, "test tile manifest")
    image_ids = sorted(_records_by_image(read_tile_manifest(io.test_manifest)))

    preds, gts, maps, labels, scores, per_image = [], [], [], [], [], []
    inputs = []
    for image_id in image_ids:
        mask_path = _require(io.refined / f"{image_id}.png", "refined mask")
        map_path = _require(io.merged / merged_blob_name(image_id), "merged anomaly map")
        pred = load_mask(mask_path)
        values = read_amap(map_path)
        gt_path = io.gt_dir / f"{image_id}.png"
        gt = load_mask(gt_path) if gt_path.is_file() else np.zeros(pred.shape, dtype=bool)
        score = image_score(values, "max")
        preds.append(pred)
        gts.append(gt)
        maps.append(values)
        labels.append(bool(gt.any()))
        scores.append(score)
        per_image.append({"image_id": image_id, "anomalous": bool(gt.any()),
                          "score": score})
        inputs.extend([mask_path, map_path])
    _verify_chain(io, "refine", [io.refined / f"{i}.png" for i in image_ids])

    detail: dict = {"images": per_image}
    if image_ids:
        seg = seg_f1(preds, gts)
        best_f1, best_t = f1_max(maps, gts)
        detail["seg_f1"] = {"value": seg.value, "undefined": seg.undefined,
                            "tp": seg.tp, "fp": seg.fp, "fn": seg.fn}
        detail["f1_max"] = {"value": best_f1, "threshold": best_t}
        try:
            cls_value, cls_t = class_f1(scores, labels)
            detail["class_f1"] = {"value": cls_value, "threshold": cls_t}
        except TilebinError as exc:
            detail["class_f1"] = {"value": None, "reason": str(exc)}
        try:
            detail["aupro_0.05"] = {"value": aupro(maps, gts, 0.05)}
        except TilebinError as exc:
            detail["aupro_0.05"] = {"value": None, "reason": str(exc)}
        row = {
            "category": io.category,
            "AucPro_0.05": detail["aupro_0.05"]["value"],
            "ClassF1": detail["class_f1"]["value"],
            "SegF1": seg.value,
        }
    else:
        row = {"category": io.category, "AucPro_0.05": None, "ClassF1": None, "SegF1": None}

    counts = {"images": len(image_ids)}
    report = _write_report(io, "eval", counts, inputs, [], started, extra={"metrics": detail})
    return report, row


# --- drivers -----------------------------------------------------------------


def run_stage(stage: str, configs: dict[str, CategoryConfig], input_root, output_root, *,
              seed: int | None = None, workers: int = 1, train: bool = False) -> dict:
    """Run exactly one stage for every configured category."""
    if stage not in STAGES:
        raise TilebinError(f"unknown stage {stage!r}; expected one of {STAGES}")
    reports = {}
    rows = []
    for name, cfg in configs.items():
        io = CategoryIO(input_root, output_root, name)
        if stage == "tile":
            reports[name] = stage_tile(cfg, io, train=train, workers=workers)
        elif stage == "augment":
            reports[name] = stage_augment(cfg, io, seed=seed, workers=workers)
        elif stage == "score":
            reports[name] = stage_score(cfg, io, workers=workers)
        elif stage == "merge":
            reports[name] = stage_merge(cfg, io, workers=workers)
        elif stage == "binarize":
            reports[name] = stage_binarize(cfg, io, workers=workers)
        elif stage == "refine":
            reports[name] = stage_refine(cfg, io, workers=workers)
        else:
            reports[name], row = stage_eval(cfg, io)
            rows.append(row)
    if rows:
        write_metrics_report(Path(output_root) / "metrics.csv", rows)
    return reports


def run_all(configs: dict[str, CategoryConfig], input_root, output_root, *,
            seed: int | None = None, workers: int = 1, train: bool = False) -> dict:
    """Run the whole chain per category; augmentation only in training mode."""
    summary: dict = {"categories": {}}
    rows = []
    for name, cfg in configs.items():
        io = CategoryIO(input_root, output_root, name)
        stage_reports = {}
        if train or cfg.scorer.kind == "stat":
            # the stat scorer fits on train tiles, so they are needed even
            # outside training mode
            stage_reports["tile_train"] = stage_tile(cfg, io, train=True, workers=workers)
        if train:
            stage_reports["augment"] = stage_augment(cfg, io, seed=seed, workers=workers)
        stage_reports["tile"] = stage_tile(cfg, io, train=False, workers=workers)
        stage_reports["score"] = stage_score(cfg, io, workers=workers)
        stage_reports["merge"] = stage_merge(cfg, io, workers=workers)
        stage_reports["binarize"] = stage_binarize(cfg, io, workers=workers)
        stage_reports["refine"] = stage_refine(cfg, io, workers=workers)
        stage_reports["eval"], row = stage_eval(cfg, io)
        rows.append(row)
        summary["categories"][name] = stage_reports
    write_metrics_report(Path(output_root) / "metrics.csv", rows)
    summary["metrics"] = rows
    out = Path(output_root) / "summary.json"
    out.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return summary
