"""Scoring detections against ground truth.

Detections and truth boxes are matched per frame by greedy best-IoU
assignment. A detection's true nature is the label of its matched truth
box, or junk when nothing matches (an unmatched detection is a
segmentation artifact by definition). Sensitivity is the fraction of true
vehicles labeled correctly; specificity is the fraction of junk-involved
outcomes where junk was called junk. Detections labeled Multiple stay out
of both, since that class has no per-vehicle denominator.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .ontology import ClassLabel

__all__ = ["TruthBox", "Detection", "ClassCounts", "EvaluationReport",
           "bbox_iou", "match_detections", "sensitivity", "specificity",
           "evaluate_detections", "format_report",
           "load_ground_truth", "save_ground_truth",
           "read_detections", "write_detections"]

GT_HEADER = ("frame", "left", "top", "width", "height", "label")


@dataclass(frozen=True)
class TruthBox:
    bbox: tuple[int, int, int, int]  # (left, top, width, height)
    label: ClassLabel


@dataclass(frozen=True)
class Detection:
    frame: int
    bbox: tuple[int, int, int, int]
    label: ClassLabel
    distance: float | None = None
    margin: float | None = None


def bbox_iou(a: tuple[int, int, int, int], b: tuple[int, int, int, int]) -> float:
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    ix = max(0, min(ax + aw, bx + bw) - max(ax, bx))
    iy = max(0, min(ay + ah, by + bh) - max(ay, by))
    inter = ix * iy
    union = aw * ah + bw * bh - inter
    return inter / union if union > 0 else 0.0


def match_detections(detections: list, truths: list,
                     iou_threshold: float = 0.5) -> list[tuple[int, int]]:
    """Greedy best-IoU assignment within one frame.

    Pairs are taken in descending IoU order (index order breaks ties); each
    detection matches at most one truth box and vice versa, and only pairs
    at or above the threshold count. Returns (detection_idx, truth_idx).
    """
    det_boxes = [d.bbox if isinstance(d, Detection) else d for d in detections]
    truth_boxes = [t.bbox if isinstance(t, TruthBox) else t for t in truths]
    candidates = []
    for i, db in enumerate(det_boxes):
        for j, tb in enumerate(truth_boxes):
            iou = bbox_iou(db, tb)
            if iou >= iou_threshold:
                candidates.append((-iou, i, j))
    candidates.sort()
    used_det: set[int] = set()
    used_truth: set[int] = set()
    pairs = []
    for _, i, j in candidates:
        if i in used_det or j in used_truth:
            continue
        used_det.add(i)
        used_truth.add(j)
        pairs.append((i, j))
    pairs.sort()
    return pairs


def sensitivity(correct: int, total: int) -> float | None:
    """Correctly identified vehicles over all true vehicles; None when untestable."""
    if total == 0:
        return None
    return correct / total


def specificity(correct_junk: int, junk_as_class: int) -> float | None:
    """Correct junk calls over all junk-involved outcomes; None when untestable."""
    if correct_junk + junk_as_class == 0:
        return None
    return correct_junk / (junk_as_class + correct_junk)


@dataclass
class ClassCounts:
    total: int = 0
    correctly_identified: int = 0
    junk_as_class: int = 0
    correct_junk: int = 0

    @property
    def sensitivity(self) -> float | None:
        return sensitivity(self.correctly_identified, self.total)

    @property
    def specificity(self) -> float | None:
        return specificity(self.correct_junk, self.junk_as_class)


@dataclass
class EvaluationReport:
    classes: dict[str, ClassCounts] = field(default_factory=dict)
    per_frame_counts: dict[int, dict[str, int]] = field(default_factory=dict)
    total_detections: int = 0
    matched_detections: int = 0

    def to_json_dict(self) -> dict:
        return {
            "classes": {
                name: {
                    "total": c.total,
                    "correctly_identified": c.correctly_identified,
                    "junk_as_class": c.junk_as_class,
                    "correct_junk": c.correct_junk,
                    "sensitivity": c.sensitivity,
                    "specificity": c.specificity,
                }
                for name, c in self.classes.items()
            },
            "per_frame_counts": {str(k): v for k, v in sorted(self.per_frame_counts.items())},
            "total_detections": self.total_detections,
            "matched_detections": self.matched_detections,
        }


def evaluate_detections(detections: list[Detection],
                        truth: dict[int, list[TruthBox]],
                        iou_threshold: float = 0.5) -> EvaluationReport:
    """Score detections against per-frame ground truth."""
    report = EvaluationReport(classes={
        ClassLabel.CAR.value: ClassCounts(),
        ClassLabel.TRUCK.value: ClassCounts(),
    })
    by_frame: dict[int, list[Detection]] = {}
    for det in detections:
        by_frame.setdefault(det.frame, []).append(det)

    frames = sorted(set(by_frame) | set(truth))
    correct_junk = 0
    for frame in frames:
        dets = by_frame.get(frame, [])
        boxes = truth.get(frame, [])
        pairs = dict(match_detections(dets, boxes, iou_threshold))
        report.total_detections += len(dets)
        report.matched_detections += len(pairs)
        report.per_frame_counts[frame] = {
            ClassLabel.CAR.value: sum(d.label == ClassLabel.CAR for d in dets),
            ClassLabel.TRUCK.value: sum(d.label == ClassLabel.TRUCK for d in dets),
        }
        for label in (ClassLabel.CAR, ClassLabel.TRUCK):
            report.classes[label.value].total += sum(t.label == label for t in boxes)
        for i, det in enumerate(dets):
            nature = boxes[pairs[i]].label if i in pairs else ClassLabel.JUNK
            if det.label == ClassLabel.MULTIPLE or nature == ClassLabel.MULTIPLE:
                continue
            if det.label in (ClassLabel.CAR, ClassLabel.TRUCK):
                counts = report.classes[det.label.value]
                if nature == det.label:
                    counts.correctly_identified += 1
                elif nature == ClassLabel.JUNK:
                    counts.junk_as_class += 1
            elif det.label == ClassLabel.JUNK and nature == ClassLabel.JUNK:
                correct_junk += 1
    for counts in report.classes.values():
        counts.correct_junk = correct_junk
    return report


def format_report(report: EvaluationReport) -> str:
    lines = [f"{'class':<8} {'total':>6} {'correct':>8} {'junk-as':>8} "
             f"{'sensitivity':>12} {'specificity':>12}"]
    for name, c in report.classes.items():
        sens = "-" if c.sensitivity is None else f"{c.sensitivity:.4f}"
        spec = "-" if c.specificity is None else f"{c.specificity:.4f}"
        lines.append(f"{name:<8} {c.total:>6} {c.correctly_identified:>8} "
                     f"{c.junk_as_class:>8} {sens:>12} {spec:>12}")
    lines.append(f"detections: {report.total_detections} "
                 f"(matched {report.matched_detections})")
    return "\n".join(lines)


def load_ground_truth(path: str | Path) -> dict[int, list[TruthBox]]:
    """CSV rows frame,left,top,width,height,label; header optional."""
    truth: dict[int, list[TruthBox]] = {}
    with open(path, newline="") as handle:
        for record in csv.reader(handle):
            if not record or record[0].strip().startswith("#"):
                continue
            if record[0].strip() == GT_HEADER[0]:
                continue
            if len(record) != 6:
                raise ValueError(f"{path}: bad ground-truth row {record!r}")
            frame = int(record[0])
            bbox = tuple(int(v) for v in record[1:5])
            truth.setdefault(frame, []).append(TruthBox(bbox, ClassLabel(record[5].strip())))
    return truth


def save_ground_truth(truth: dict[int, list[TruthBox]], path: str | Path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(GT_HEADER)
        for frame in sorted(truth):
            for box in truth[frame]:
                writer.writerow([frame, *box.bbox, box.label.value])


def _json_safe(value: float | None) -> float | None:
    if value is None or not math.isfinite(value):
        return None
    return value


def write_detections(detections: list[Detection], path: str | Path) -> None:
    """One JSON object per line: {frame, bbox, label, distance, margin}."""
    with open(path, "w") as handle:
        for det in detections:
            left, top, width, height = det.bbox
            handle.write(json.dumps({
                "frame": det.frame,
                "bbox": {"left": left, "top": top, "width": width, "height": height},
                "label": det.label.value,
                "distance": _json_safe(det.distance),
                "margin": _json_safe(det.margin),
            }) + "\n")


def read_detections(path: str | Path) -> list[Detection]:
    detections = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        raw = json.loads(line)
        bbox = raw["bbox"]
        detections.append(Detection(
            int(raw["frame"]),
            (bbox["left"], bbox["top"], bbox["width"], bbox["height"]),
            ClassLabel(raw["label"]),
            raw.get("distance"),
            raw.get("margin"),
        ))
    return detections
