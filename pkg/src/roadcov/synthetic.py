"""Deterministic synthetic highway scenes with exact ground truth.

Scenes render textured road backgrounds and simple vehicles (rounded
rectangles with a windshield band, trucks with a cab/trailer break) moving
along horizontal lanes. The generator doubles as the test oracle: every
rendered vehicle's bounding box is known exactly, and identical
(spec, seed) pairs produce bit-identical frames. Presets cover the classic
failure modes: overlapping vehicles, a pole occluder, lane-line
bleed-through, and a between-classes vehicle size.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .filters import gaussian_blur
from .frames import FrameSequence
from .ontology import ClassLabel
from .evaluation import TruthBox

__all__ = ["VehicleTrack", "SceneSpec", "generate", "preset_scene", "PRESETS",
           "load_scene_spec", "save_scene_spec", "write_scene",
           "CAR_SIZE", "TRUCK_SIZE"]

CAR_SIZE = (30, 15)    # (width, height) px
TRUCK_SIZE = (70, 22)
ROAD_BASE = 90.0


@dataclass(frozen=True)
class VehicleTrack:
    entry_frame: int
    lane_y: int
    speed: float            # px/frame toward +x
    size_class: str         # "car" | "truck"
    contrast: float = 110.0
    start_x: float = 0.0    # left edge at entry_frame
    width: int | None = None
    height: int | None = None

    def __post_init__(self):
        if self.size_class not in ("car", "truck"):
            raise ValueError(f"unknown size class {self.size_class!r}")
        if self.speed < 1.0:
            raise ValueError("vehicles must move at >= 1 px/frame")

    @property
    def size(self) -> tuple[int, int]:
        base = CAR_SIZE if self.size_class == "car" else TRUCK_SIZE
        return (self.width or base[0], self.height or base[1])


@dataclass(frozen=True)
class SceneSpec:
    width: int
    height: int
    n_frames: int
    background_seed: int = 0
    noise_sigma: float = 0.0
    vehicles: tuple[VehicleTrack, ...] = ()
    pole_column: int | None = None
    pole_width: int = 4
    lane_lines: tuple[int, ...] = ()

    def __post_init__(self):
        if self.width < 8 or self.height < 8 or self.n_frames < 1:
            raise ValueError("scene too small")
        for v in self.vehicles:
            w, h = v.size
            if v.lane_y < 0 or v.lane_y + h > self.height:
                raise ValueError(f"vehicle at lane_y={v.lane_y} does not fit vertically")


def _background(spec: SceneSpec) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence((spec.background_seed,)))
    texture = gaussian_blur(rng.normal(0.0, 14.0, (spec.height, spec.width)), 3.0)
    gray = ROAD_BASE + texture
    bg = np.stack([gray + 4.0, gray, gray - 4.0], axis=-1)
    for y in spec.lane_lines:
        if 0 <= y < spec.height:
            bg[y, :, :] = 190.0
    if spec.pole_column is not None:
        bg[:, spec.pole_column:spec.pole_column + spec.pole_width, :] = 60.0
    return np.clip(bg, 0.0, 255.0)


def _render_vehicle(img: np.ndarray, track: VehicleTrack, x_left: int) -> tuple | None:
    """Draw the vehicle; returns the clipped rendered bbox or None if offscreen."""
    frame_h, frame_w = img.shape[:2]
    w, h = track.size
    x0, x1 = x_left, x_left + w          # [x0, x1)
    y0, y1 = track.lane_y, track.lane_y + h
    cx0, cx1 = max(0, x0), min(frame_w, x1)
    if cx0 >= cx1:
        return None
    body = ROAD_BASE + track.contrast
    band = ROAD_BASE + 0.45 * track.contrast

    mask = np.ones((h, w), dtype=bool)
    for corner in range(2):  # 2 px rounded corners
        cut = 2 - corner
        mask[corner, :cut] = mask[corner, w - cut:] = False
        mask[h - 1 - corner, :cut] = mask[h - 1 - corner, w - cut:] = False
    values = np.full((h, w), body)
    if track.size_class == "car":
        wind0 = int(w * 0.62)
        values[:, wind0:wind0 + max(3, w // 8)] = band
        values[h - 2:, :] = body - 0.2 * track.contrast  # skirt shadow
    else:
        cab_w = max(10, int(w * 0.2))
        values[:, cab_w:cab_w + 2] = band                 # cab/trailer break
        values[:2, cab_w + 2:] = body - 0.25 * track.contrast  # trailer roof line
        values[:, :4] = band                               # windshield at the nose

    sub_mask = mask[:, cx0 - x0:cx1 - x0]
    sub_vals = values[:, cx0 - x0:cx1 - x0]
    region = img[y0:y1, cx0:cx1, :]
    for c in range(3):
        plane = region[:, :, c]
        plane[sub_mask] = sub_vals[sub_mask]
    return (cx0, y0, cx1 - cx0, y1 - y0)


def generate(spec: SceneSpec, seed: int) -> tuple[FrameSequence, dict[int, list[TruthBox]]]:
    """Render the scene; ground-truth boxes exactly bound rendered vehicles.

    Vehicles clipped by the frame edge are marked Junk in the ground truth,
    matching how partially visible vehicles get labeled by hand.
    """
    bg = _background(spec)
    frames = []
    truth: dict[int, list[TruthBox]] = {}
    for t in range(spec.n_frames):
        img = bg.copy()
        boxes: list[TruthBox] = []
        for track in spec.vehicles:
            if t < track.entry_frame:
                continue
            x = int(round(track.start_x + track.speed * (t - track.entry_frame)))
            rendered = _render_vehicle(img, track, x)
            if rendered is None:
                continue
            w, _ = track.size
            fully_visible = x >= 0 and x + w <= spec.width
            label = (ClassLabel.CAR if track.size_class == "car" else ClassLabel.TRUCK) \
                if fully_visible else ClassLabel.JUNK
            boxes.append(TruthBox(rendered, label))
        if spec.pole_column is not None:
            img[:, spec.pole_column:spec.pole_column + spec.pole_width, :] = 60.0
        if spec.noise_sigma > 0:
            rng = np.random.default_rng(np.random.SeedSequence((seed, t)))
            img = img + rng.normal(0.0, spec.noise_sigma, img.shape)
        img = np.clip(np.rint(img), 0.0, 255.0)
        img.setflags(write=False)
        frames.append(img)
        if boxes:
            truth[t] = boxes
    ids = tuple(f"synthetic-{t:04d}.ppm" for t in range(spec.n_frames))
    return FrameSequence(tuple(frames), ids), truth


def write_scene(spec: SceneSpec, seed: int, out_dir: str | Path) -> tuple[Path, Path]:
    """Render to disk: PPM frames + manifest + gt.csv. Returns (manifest, gt) paths."""
    from .evaluation import save_ground_truth
    from .images import encode_netpbm

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    seq, truth = generate(spec, seed)
    for frame, name in zip(seq.frames, seq.source_ids):
        (out / name).write_bytes(encode_netpbm(frame))
    manifest = out / "manifest.txt"
    manifest.write_text("".join(f"{name}\n" for name in seq.source_ids))
    gt_path = out / "gt.csv"
    save_ground_truth(truth, gt_path)
    return manifest, gt_path


def preset_scene(name: str) -> SceneSpec:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choices: {sorted(PRESETS)}") from None


def _base_scene(**overrides) -> SceneSpec:
    defaults = dict(width=320, height=120, n_frames=50, background_seed=7,
                    noise_sigma=2.0)
    defaults.update(overrides)
    return SceneSpec(**defaults)


def _preset_overlap() -> SceneSpec:
    # Two cars near-abreast merge into one region: the split rule's terrain.
    return _base_scene(vehicles=(
        VehicleTrack(5, 20, 16, "car", 110, start_x=2),
        VehicleTrack(5, 40, 16, "car", 118, start_x=30),
    ))


def _preset_pole() -> SceneSpec:
    return _base_scene(pole_column=150, vehicles=(
        VehicleTrack(5, 30, 12, "car", 112, start_x=2),
    ))


def _preset_lane_lines() -> SceneSpec:
    return _base_scene(lane_lines=(38, 78), vehicles=(
        VehicleTrack(5, 22, 14, "car", 108, start_x=2),
    ))


def _preset_midsize() -> SceneSpec:
    # A station-wagon-like size between the two classes.
    return _base_scene(vehicles=(
        VehicleTrack(5, 30, 14, "car", 112, start_x=2, width=46, height=18),
    ))


PRESETS = {
    "overlap": _preset_overlap,
    "pole": _preset_pole,
    "lane_lines": _preset_lane_lines,
    "midsize": _preset_midsize,
}


def save_scene_spec(spec: SceneSpec, path: str | Path) -> None:
    lines = ["[scene]",
             f"width = {spec.width}",
             f"height = {spec.height}",
             f"n_frames = {spec.n_frames}",
             f"background_seed = {spec.background_seed}",
             f"noise_sigma = {spec.noise_sigma}"]
    if spec.pole_column is not None:
        lines.append(f"pole_column = {spec.pole_column}")
        lines.append(f"pole_width = {spec.pole_width}")
    if spec.lane_lines:
        lines.append("lane_lines = " + ",".join(str(y) for y in spec.lane_lines))
    for i, v in enumerate(spec.vehicles):
        lines += ["", f"[vehicle.{i}]",
                  f"entry_frame = {v.entry_frame}",
                  f"lane_y = {v.lane_y}",
                  f"speed = {v.speed}",
                  f"size_class = {v.size_class}",
                  f"contrast = {v.contrast}",
                  f"start_x = {v.start_x}"]
        if v.width is not None:
            lines.append(f"width = {v.width}")
        if v.height is not None:
            lines.append(f"height = {v.height}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_scene_spec(path: str | Path) -> SceneSpec:
    import configparser

    parser = configparser.ConfigParser(interpolation=None)
    with open(path) as handle:
        parser.read_file(handle)
    scene = parser["scene"]
    vehicles = []
    for section in parser.sections():
        if not section.startswith("vehicle"):
            continue
        v = parser[section]
        vehicles.append(VehicleTrack(
            entry_frame=v.getint("entry_frame"),
            lane_y=v.getint("lane_y"),
            speed=v.getfloat("speed"),
            size_class=v.get("size_class"),
            contrast=v.getfloat("contrast", 110.0),
            start_x=v.getfloat("start_x", 0.0),
            width=v.getint("width", fallback=None),
            height=v.getint("height", fallback=None),
        ))
    lane_lines = tuple(int(s) for s in scene.get("lane_lines", "").split(",") if s.strip())
    pole = scene.getint("pole_column", fallback=None)
    return SceneSpec(
        width=scene.getint("width"),
        height=scene.getint("height"),
        n_frames=scene.getint("n_frames"),
        background_seed=scene.getint("background_seed", 0),
        noise_sigma=scene.getfloat("noise_sigma", 0.0),
        vehicles=tuple(vehicles),
        pole_column=pole,
        pole_width=scene.getint("pole_width", 4),
        lane_lines=lane_lines,
    )
