"""End-to-end runs: calibrate, subtract, clean, binarize, segment, classify.

Each stage's output can be dumped as a self-contained checkpoint and a run
can resume from any dumped stage with bit-identical final output. Seeds for
the per-frame k-means calls derive from (run seed, frame index), so results
do not depend on execution order or resume point.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .calibration import rotate_and_crop
from .config import RunConfig
from .descriptor import covariance, feature_tensor
from .evaluation import Detection, write_detections
from .frames import FrameSequence, load_sequence
from .ontology import ClassLabel, OntologyLibrary, classify, load_library
from .preprocess import binarize_sequence, clean_frame, mean_background, subtract_gray
from .segmentation import Region, segment_frame

__all__ = ["PipelineError", "PipelineRun", "run_pipeline", "build_ontology_from_labels",
           "STAGES", "compute_regions", "calibrate_frames", "clean_frames"]

STAGES = ("calibrated", "cleaned", "binary", "regions")


class PipelineError(RuntimeError):
    """A stage failure annotated with the frame it happened on."""

    def __init__(self, stage: str, frame: int | None, cause: Exception):
        where = f"stage {stage}" if frame is None else f"stage {stage}, frame {frame}"
        super().__init__(f"{where}: {cause}")
        self.stage = stage
        self.frame = frame
        self.cause = cause


@dataclass
class PipelineRun:
    detections: list[Detection] = field(default_factory=list)
    per_frame_counts: dict[int, dict[str, int]] = field(default_factory=dict)
    refine_capped_frames: list[int] = field(default_factory=list)
    detections_path: Path | None = None
    counts_path: Path | None = None


def calibrate_frames(seq: FrameSequence, cfg: RunConfig) -> list[np.ndarray]:
    if cfg.calibration is None:
        return [np.asarray(f, dtype=np.float64) for f in seq.frames]
    out = []
    for i, frame in enumerate(seq.frames):
        try:
            out.append(rotate_and_crop(frame, cfg.calibration))
        except ValueError as exc:
            raise PipelineError("calibrated", i, exc) from exc
    return out


def clean_frames(calibrated: list[np.ndarray], cfg: RunConfig) -> list[np.ndarray]:
    seq = FrameSequence(tuple(calibrated), tuple(f"frame-{i}" for i in range(len(calibrated))))
    bg = mean_background(seq)
    cleaned = []
    for i, frame in enumerate(calibrated):
        try:
            cleaned.append(clean_frame(subtract_gray(frame, bg), cfg.clean))
        except ValueError as exc:
            raise PipelineError("cleaned", i, exc) from exc
    return cleaned


def compute_regions(binary: list[np.ndarray], cfg: RunConfig) -> tuple[list[list[Region]], list[int]]:
    """Segment every binary frame; returns per-frame regions and capped frames."""
    per_frame = []
    capped = []
    for i, mask in enumerate(binary):
        try:
            regions, hit_cap = segment_frame(mask, cfg.segmentation,
                                             (cfg.seed, i), frame_index=i)
        except ValueError as exc:
            raise PipelineError("regions", i, exc) from exc
        if hit_cap:
            capped.append(i)
        per_frame.append(regions)
    return per_frame, capped


def _classify_regions(per_frame: list[list[Region]], cleaned: list[np.ndarray],
                      lib: OntologyLibrary, cfg: RunConfig) -> PipelineRun:
    run = PipelineRun()
    for i, regions in enumerate(per_frame):
        counts = {ClassLabel.CAR.value: 0, ClassLabel.TRUCK.value: 0}
        for region in regions:
            left, top, width, height = region.bbox
            if width < 3 or height < 3:
                continue  # too thin for the 3x3 derivative support
            crop = cleaned[i][top:top + height, left:left + width]
            try:
                desc = covariance(feature_tensor(crop, cfg.feature_set),
                                  sample=cfg.sample_covariance)
                result = classify(lib, desc, cfg.eps)
            except ValueError as exc:
                raise PipelineError("classify", i, exc) from exc
            run.detections.append(Detection(i, region.bbox, result.label,
                                            result.distance, result.margin))
            if result.label.value in counts:
                counts[result.label.value] += 1
        run.per_frame_counts[i] = counts
    return run


def _checkpoint_path(out_dir: Path, stage: str) -> Path:
    return out_dir / "stages" / f"{stage}.npz"


def _regions_to_jsonable(per_frame: list[list[Region]]) -> list:
    return [[{"frame_index": r.frame_index, "bbox": list(r.bbox),
              "mask": r.mask.astype(int).tolist()} for r in regions]
            for regions in per_frame]


def _regions_from_jsonable(data: list) -> list[list[Region]]:
    out = []
    for regions in data:
        frame_regions = []
        for raw in regions:
            mask = np.array(raw["mask"], dtype=np.uint8)
            left, top, width, height = raw["bbox"]
            count = int(mask.sum())
            frame_regions.append(Region(int(raw["frame_index"]),
                                        (left, top, width, height), mask,
                                        count, count / (width * height)))
        out.append(frame_regions)
    return out


def _dump_stage(out_dir: Path, stage: str, payload: dict[str, np.ndarray],
                regions: list[list[Region]] | None = None) -> None:
    path = _checkpoint_path(out_dir, stage)
    path.parent.mkdir(parents=True, exist_ok=True)
    arrays = dict(payload)
    if regions is not None:
        blob = json.dumps(_regions_to_jsonable(regions)).encode()
        arrays["regions_json"] = np.frombuffer(blob, dtype=np.uint8)
    np.savez(path, **arrays)


def _load_stage(out_dir: Path, stage: str) -> dict:
    path = _checkpoint_path(out_dir, stage)
    if not path.is_file():
        raise FileNotFoundError(f"no checkpoint for stage {stage!r} at {path}")
    with np.load(path) as data:
        loaded = {key: data[key] for key in data.files}
    if "regions_json" in loaded:
        loaded["regions"] = _regions_from_jsonable(
            json.loads(loaded.pop("regions_json").tobytes().decode()))
    return loaded


def run_pipeline(cfg: RunConfig, out_dir: str | Path | None = None,
                 dump_stages: tuple[str, ...] = (),
                 resume_stage: str | None = None) -> PipelineRun:
    """Run the full pipeline and write detections.jsonl and counts.json.

    ``dump_stages`` writes named checkpoints under ``out/stages/``;
    ``resume_stage`` starts from such a checkpoint instead of recomputing.
    """
    for stage in (*dump_stages, *((resume_stage,) if resume_stage else ())):
        if stage not in STAGES:
            raise ValueError(f"unknown stage {stage!r}; choices: {STAGES}")
    out = Path(out_dir) if out_dir is not None else cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)

    if cfg.ontology_path is None or not Path(cfg.ontology_path).is_file():
        raise FileNotFoundError(f"ontology file not found: {cfg.ontology_path}")
    lib = load_library(cfg.ontology_path)
    if lib.feature_set != cfg.feature_set:
        raise ValueError(
            f"library feature set {lib.feature_set.value} does not match "
            f"configured {cfg.feature_set.value}")
    expected_norm = "sample" if cfg.sample_covariance else "population"
    if lib.normalization != expected_norm:
        raise ValueError(
            f"library normalization {lib.normalization} does not match "
            f"configured {expected_norm}")

    resume_order = {stage: i for i, stage in enumerate(STAGES)}
    start = resume_order[resume_stage] + 1 if resume_stage else 0

    calibrated = cleaned = binary = None
    per_frame = None
    capped: list[int] = []

    if resume_stage:
        loaded = _load_stage(out, resume_stage)
        if resume_stage == "calibrated":
            calibrated = list(loaded["calibrated"])
        elif resume_stage == "cleaned":
            cleaned = list(loaded["cleaned"])
        elif resume_stage == "binary":
            cleaned = list(loaded["cleaned"])
            binary = list(loaded["binary"])
        elif resume_stage == "regions":
            cleaned = list(loaded["cleaned"])
            per_frame = loaded["regions"]

    if start <= 0:
        if cfg.input_path is None:
            raise ValueError("config has no input path")
        try:
            seq = load_sequence(cfg.input_path)
        except ValueError as exc:
            raise PipelineError("load", None, exc) from exc
        calibrated = calibrate_frames(seq, cfg)
        if "calibrated" in dump_stages:
            _dump_stage(out, "calibrated", {"calibrated": np.stack(calibrated)})
    if start <= 1 and cleaned is None:
        cleaned = clean_frames(calibrated, cfg)
        if "cleaned" in dump_stages:
            _dump_stage(out, "cleaned", {"cleaned": np.stack(cleaned)})
    if start <= 2 and binary is None and per_frame is None:
        binary = binarize_sequence(cleaned, cfg.clean)
        if "binary" in dump_stages:
            _dump_stage(out, "binary", {"cleaned": np.stack(cleaned),
                                        "binary": np.stack(binary)})
    if per_frame is None:
        per_frame, capped = compute_regions(binary, cfg)
        if "regions" in dump_stages:
            _dump_stage(out, "regions", {"cleaned": np.stack(cleaned)},
                        regions=per_frame)

    run = _classify_regions(per_frame, cleaned, lib, cfg)
    run.refine_capped_frames = capped

    run.detections_path = out / "detections.jsonl"
    write_detections(run.detections, run.detections_path)
    run.counts_path = out / "counts.json"
    counts_doc = {str(k): run.per_frame_counts[k] for k in sorted(run.per_frame_counts)}
    run.counts_path.write_text(json.dumps(counts_doc, indent=2) + "\n")
    return run


def build_ontology_from_labels(cfg: RunConfig, label_rows,
                               out_path: str | Path | None = None) -> OntologyLibrary:
    """Build a library from (frame_index, region_id, label) rows.

    Region ids are indices into the refined region list of each frame, the
    same ordering the pipeline and the annotation server report.
    """
    if cfg.input_path is None:
        raise ValueError("config has no input path")
    seq = load_sequence(cfg.input_path)
    calibrated = calibrate_frames(seq, cfg)
    cleaned = clean_frames(calibrated, cfg)
    binary = binarize_sequence(cleaned, cfg.clean)
    per_frame, _ = compute_regions(binary, cfg)

    normalization = "sample" if cfg.sample_covariance else "population"
    lib = OntologyLibrary(cfg.feature_set, normalization)
    source = str(cfg.input_path)
    for frame_index, region_id, label in label_rows:
        if not 0 <= frame_index < len(per_frame):
            raise ValueError(f"label references missing frame {frame_index}")
        regions = per_frame[frame_index]
        if not 0 <= region_id < len(regions):
            raise ValueError(
                f"label references missing region {region_id} in frame {frame_index}")
        region = regions[region_id]
        left, top, width, height = region.bbox
        if width < 3 or height < 3:
            raise ValueError(
                f"region {region_id} in frame {frame_index} is too thin to describe")
        crop = cleaned[frame_index][top:top + height, left:left + width]
        desc = covariance(feature_tensor(crop, cfg.feature_set),
                          sample=cfg.sample_covariance)
        lib.add_entry(label, desc,
                      provenance={"source": source, "frame": frame_index,
                                  "bbox": list(region.bbox)})
    if out_path is not None:
        from .ontology import save_library
        save_library(lib, out_path)
    return lib
