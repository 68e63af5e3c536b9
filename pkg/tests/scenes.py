"""Shared scene fixtures for pipeline-level tests.

The benchmark scene mirrors the reference composition: 16 car instances
and 2 truck instances spread over the evaluated frames, plus a handful of
labeled vehicles in the first five frames that seed the ontology.
"""

from roadcov.evaluation import bbox_iou
from roadcov.ontology import ClassLabel
from roadcov.synthetic import SceneSpec, VehicleTrack

LIBRARY_FRAMES = 5


def benchmark_scene() -> SceneSpec:
    vehicles = (
        # library passes (frames 0-4): one car, one truck entering clipped
        VehicleTrack(entry_frame=0, lane_y=20, speed=65, size_class="car",
                     contrast=112, start_x=62),
        VehicleTrack(entry_frame=0, lane_y=90, speed=130, size_class="truck",
                     contrast=96, start_x=-50),
        # evaluated passes: 4 cars x 4 fully visible frames = 16 instances
        VehicleTrack(entry_frame=8, lane_y=20, speed=65, size_class="car",
                     contrast=105, start_x=62),
        VehicleTrack(entry_frame=15, lane_y=55, speed=65, size_class="car",
                     contrast=118, start_x=62),
        VehicleTrack(entry_frame=24, lane_y=20, speed=65, size_class="car",
                     contrast=99, start_x=62),
        VehicleTrack(entry_frame=33, lane_y=55, speed=65, size_class="car",
                     contrast=124, start_x=62),
        # one truck x 2 fully visible frames = 2 instances
        VehicleTrack(entry_frame=40, lane_y=90, speed=130, size_class="truck",
                     contrast=102, start_x=80),
    )
    return SceneSpec(width=320, height=120, n_frames=50, background_seed=11,
                     noise_sigma=2.0, vehicles=vehicles)


def small_scene() -> SceneSpec:
    """A 12-frame scene with one car pass and one truck pass, for quick tests."""
    vehicles = (
        VehicleTrack(entry_frame=0, lane_y=15, speed=65, size_class="car",
                     contrast=110, start_x=62),
        VehicleTrack(entry_frame=1, lane_y=80, speed=130, size_class="truck",
                     contrast=100, start_x=80),
        VehicleTrack(entry_frame=6, lane_y=45, speed=65, size_class="car",
                     contrast=120, start_x=62),
    )
    return SceneSpec(width=320, height=120, n_frames=12, background_seed=3,
                     noise_sigma=1.5, vehicles=vehicles)


def auto_label_regions(per_frame_regions, truth, frames, iou_threshold=0.5):
    """Label rows (frame, region_id, label) by best IoU against ground truth.

    Stands in for the human annotator: regions overlapping a truth box take
    its label, everything else is Junk.
    """
    rows = []
    for frame in frames:
        for region_id, region in enumerate(per_frame_regions[frame]):
            best_label, best_iou = ClassLabel.JUNK, 0.0
            for box in truth.get(frame, []):
                iou = bbox_iou(region.bbox, box.bbox)
                if iou > best_iou:
                    best_label, best_iou = box.label, iou
            if best_iou < iou_threshold:
                best_label = ClassLabel.JUNK
            rows.append((frame, region_id, best_label))
    return rows
