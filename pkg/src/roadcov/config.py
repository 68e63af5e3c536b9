"""Run configuration: one INI-style key=value file holds every default.

Relative paths inside the file resolve against the file's own directory so
a run directory can be moved wholesale.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .calibration import Calibration
from .descriptor import DEFAULT_EPS, FeatureSet
from .preprocess import CleanParams
from .segmentation import SegmentationParams

__all__ = ["RunConfig", "load_config", "save_config"]


@dataclass
class RunConfig:
    input_path: Path | None = None
    ontology_path: Path | None = None
    labels_path: Path | None = None
    out_dir: Path = Path("out")
    calibration: Calibration | None = None
    clean: CleanParams = field(default_factory=CleanParams)
    segmentation: SegmentationParams = field(default_factory=SegmentationParams)
    feature_set: FeatureSet = FeatureSet.CODE_DEFAULT
    eps: float = DEFAULT_EPS
    sample_covariance: bool = False
    iou_threshold: float = 0.5
    seed: int = 0
    base_dir: Path = field(default_factory=Path.cwd)

    def resolve(self, path: str | Path) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p


def _parse_crop(text: str) -> tuple[int, int, int, int]:
    parts = [int(v) for v in text.split(",")]
    if len(parts) != 4:
        raise ValueError(f"crop must be 'left,top,width,height', got {text!r}")
    return tuple(parts)  # type: ignore[return-value]


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    parser = configparser.ConfigParser(interpolation=None)
    with open(path) as handle:
        parser.read_file(handle)
    cfg = RunConfig(base_dir=path.parent.resolve())

    if parser.has_section("paths"):
        section = parser["paths"]
        if section.get("input"):
            cfg.input_path = cfg.resolve(section["input"])
        if section.get("ontology"):
            cfg.ontology_path = cfg.resolve(section["ontology"])
        if section.get("labels"):
            cfg.labels_path = cfg.resolve(section["labels"])
        if section.get("out"):
            cfg.out_dir = cfg.resolve(section["out"])

    if parser.has_section("calibration"):
        section = parser["calibration"]
        angle = section.getfloat("angle_deg", 0.0)
        crop_text = section.get("crop", "")
        if crop_text:
            cfg.calibration = Calibration(angle, _parse_crop(crop_text))
        elif angle != 0.0:
            raise ValueError("calibration with a nonzero angle needs a crop rectangle")

    if parser.has_section("clean"):
        section = parser["clean"]
        override = section.get("binary_threshold", "")
        cfg.clean = CleanParams(
            floor=section.getfloat("floor", 10.0),
            median_window=section.getint("median_window", 5),
            edge_gain=section.getfloat("edge_gain", 10.0),
            canny_high=section.getfloat("canny_high", 0.2),
            binary_threshold_override=float(override) if override else None,
        )

    if parser.has_section("segmentation"):
        section = parser["segmentation"]
        cfg.segmentation = SegmentationParams(
            min_component_px=section.getint("min_component_px", 60),
            split_fill_max=section.getfloat("split_fill_max", 0.45),
            split_area_min=section.getfloat("split_area_min", 1400.0),
            regroup_fill_min=section.getfloat("regroup_fill_min", 0.80),
            regroup_area_max=section.getfloat("regroup_area_max", 340.0),
            delete_area_max=section.getfloat("delete_area_max", 200.0),
            connectivity=section.getint("connectivity", 8),
            max_refine_iterations=section.getint("max_refine_iterations", 8),
        )

    if parser.has_section("descriptor"):
        section = parser["descriptor"]
        cfg.feature_set = FeatureSet(section.get("feature_set", "CODE_DEFAULT"))
        cfg.eps = section.getfloat("eps", DEFAULT_EPS)
        cfg.sample_covariance = section.getboolean("sample_covariance", False)

    if parser.has_section("evaluation"):
        cfg.iou_threshold = parser["evaluation"].getfloat("iou_threshold", 0.5)

    if parser.has_section("run"):
        cfg.seed = parser["run"].getint("seed", 0)
    return cfg


def _relative_to_base(cfg: RunConfig, value: Path) -> str:
    try:
        return str(value.relative_to(cfg.base_dir))
    except ValueError:
        return str(value)


def save_config(cfg: RunConfig, path: str | Path) -> None:
    lines = ["[paths]"]
    if cfg.input_path:
        lines.append(f"input = {_relative_to_base(cfg, cfg.input_path)}")
    if cfg.ontology_path:
        lines.append(f"ontology = {_relative_to_base(cfg, cfg.ontology_path)}")
    if cfg.labels_path:
        lines.append(f"labels = {_relative_to_base(cfg, cfg.labels_path)}")
    lines.append(f"out = {_relative_to_base(cfg, cfg.out_dir)}")

    if cfg.calibration is not None:
        left, top, width, height = cfg.calibration.crop
        lines += ["", "[calibration]",
                  f"angle_deg = {cfg.calibration.angle_degrees!r}",
                  f"crop = {left},{top},{width},{height}"]

    clean = cfg.clean
    lines += ["", "[clean]",
              f"floor = {clean.floor!r}",
              f"median_window = {clean.median_window}",
              f"edge_gain = {clean.edge_gain!r}",
              f"canny_high = {clean.canny_high!r}"]
    if clean.binary_threshold_override is not None:
        lines.append(f"binary_threshold = {clean.binary_threshold_override!r}")

    seg = cfg.segmentation
    lines += ["", "[segmentation]",
              f"min_component_px = {seg.min_component_px}",
              f"split_fill_max = {seg.split_fill_max!r}",
              f"split_area_min = {seg.split_area_min!r}",
              f"regroup_fill_min = {seg.regroup_fill_min!r}",
              f"regroup_area_max = {seg.regroup_area_max!r}",
              f"delete_area_max = {seg.delete_area_max!r}",
              f"connectivity = {seg.connectivity}",
              f"max_refine_iterations = {seg.max_refine_iterations}"]

    lines += ["", "[descriptor]",
              f"feature_set = {cfg.feature_set.value}",
              f"eps = {cfg.eps!r}",
              f"sample_covariance = {'true' if cfg.sample_covariance else 'false'}"]

    lines += ["", "[evaluation]", f"iou_threshold = {cfg.iou_threshold!r}"]
    lines += ["", "[run]", f"seed = {cfg.seed}"]
    Path(path).write_text("\n".join(lines) + "\n")
