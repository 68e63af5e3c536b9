"""The annotation HTTP service.

Serves calibrated frames and proposed regions, accepts labels, and builds
the ontology on commit. One process owns the label file (guarded by a lock
file); within the process a mutex serializes writers while readers run
concurrently against immutable snapshots.
"""

from __future__ import annotations

import math
import threading
from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI, HTTPException, Response
from fastapi.middleware.cors import CORSMiddleware

from ..calibration import Calibration, angle_from_baseline
from ..config import RunConfig, save_config
from ..descriptor import covariance, feature_tensor
from ..frames import load_sequence
from ..images import encode_netpbm, to_uint8
from ..ontology import (ClassLabel, OntologyLibrary, append_label_row, classify,
                        load_library, read_label_rows, save_library)
from ..pipeline import calibrate_frames, clean_frames, compute_regions
from ..preprocess import binarize_sequence
from .models import (BBox, CalibrationState, CalibrationUpdate, CommitResponse,
                     LabelRecord, LabelRequest, LabelResponse, LabelUndoRequest,
                     Meta, Point, RegionInfo)

__all__ = ["create_app", "AnnotationServer"]


class AnnotationServer:
    """Mutable state behind the endpoints."""

    def __init__(self, cfg: RunConfig, config_path: Path | None = None):
        if cfg.input_path is None:
            raise ValueError("config has no input path")
        self.cfg = cfg
        self.config_path = config_path
        self.sequence = load_sequence(cfg.input_path)
        self.lock = threading.Lock()
        self.calibration_points: tuple | None = None
        self._pipeline_cache: dict | None = None
        self.labels_path = cfg.labels_path or (cfg.out_dir / "labels.csv")
        self.labels: list[tuple[int, int, ClassLabel]] = []
        if Path(self.labels_path).is_file():
            self.labels = read_label_rows(self.labels_path)
        self.library: OntologyLibrary | None = None
        if cfg.ontology_path and Path(cfg.ontology_path).is_file():
            self.library = load_library(cfg.ontology_path)
        self._lock_file: Path | None = None

    # -- single-writer guard ------------------------------------------------
    def acquire_label_lock(self):
        lock_path = Path(str(self.labels_path) + ".lock")
        lock_path.parent.mkdir(parents=True, exist_ok=True)
        try:
            lock_path.touch(exist_ok=False)
        except FileExistsError:
            raise RuntimeError(
                f"label file {self.labels_path} is owned by another process "
                f"(remove {lock_path} if that process is gone)") from None
        self._lock_file = lock_path

    def release_label_lock(self):
        if self._lock_file is not None and self._lock_file.exists():
            self._lock_file.unlink()
        self._lock_file = None

    # -- pipeline snapshots --------------------------------------------------
    def _pipeline(self) -> dict:
        """Calibrated/cleaned/binary/regions for the current calibration."""
        with self.lock:
            if self._pipeline_cache is None:
                calibrated = calibrate_frames(self.sequence, self.cfg)
                cleaned = clean_frames(calibrated, self.cfg)
                binary = binarize_sequence(cleaned, self.cfg.clean)
                regions, _ = compute_regions(binary, self.cfg)
                self._pipeline_cache = {
                    "calibrated": calibrated,
                    "cleaned": cleaned,
                    "regions": regions,
                }
            return self._pipeline_cache

    def frame_count(self) -> int:
        return len(self.sequence)

    def frame_bytes(self, index: int) -> bytes:
        frames = self._pipeline()["calibrated"]
        return encode_netpbm(to_uint8(frames[index]))

    def regions_for(self, index: int) -> list[RegionInfo]:
        data = self._pipeline()
        out = []
        for region_id, region in enumerate(data["regions"][index]):
            left, top, width, height = region.bbox
            info = RegionInfo(region_id=region_id,
                              bbox=BBox(left=left, top=top, width=width, height=height),
                              fill_fraction=region.fill_fraction,
                              pixel_count=region.pixel_count)
            if self.library is not None and width >= 3 and height >= 3:
                crop = data["cleaned"][index][top:top + height, left:left + width]
                desc = covariance(feature_tensor(crop, self.cfg.feature_set),
                                  sample=self.cfg.sample_covariance)
                result = classify(self.library, desc, self.cfg.eps)
                info.suggested_label = result.label.value
                info.distance = result.distance
                info.margin = None if math.isinf(result.margin) else result.margin
            out.append(info)
        return out

    def set_calibration(self, update: CalibrationUpdate) -> None:
        angle = angle_from_baseline((update.p1.x, update.p1.y),
                                    (update.p2.x, update.p2.y))
        crop = (update.crop.left, update.crop.top, update.crop.width,
                update.crop.height)
        with self.lock:
            self.cfg.calibration = Calibration(angle, crop)
            self.calibration_points = (update.p1, update.p2)
            self._pipeline_cache = None
            if self.config_path is not None:
                save_config(self.cfg, self.config_path)

    def calibration_state(self) -> CalibrationState:
        state = CalibrationState()
        if self.calibration_points is not None:
            state.p1, state.p2 = self.calibration_points
        if self.cfg.calibration is not None:
            left, top, width, height = self.cfg.calibration.crop
            state.crop = BBox(left=left, top=top, width=width, height=height)
            state.angle_degrees = self.cfg.calibration.angle_degrees
        return state

    def add_label(self, request: LabelRequest) -> int:
        regions = self._pipeline()["regions"]
        if not 0 <= request.frame < len(regions):
            raise HTTPException(404, f"frame {request.frame} does not exist")
        if not 0 <= request.region_id < len(regions[request.frame]):
            raise HTTPException(
                404, f"region {request.region_id} does not exist in frame {request.frame}")
        with self.lock:
            label = ClassLabel(request.label)
            self.labels.append((request.frame, request.region_id, label))
            append_label_row(self.labels_path, request.frame, request.region_id, label)
            return len(self.labels)

    def undo_label(self, request: LabelUndoRequest) -> int:
        with self.lock:
            for i in range(len(self.labels) - 1, -1, -1):
                frame, region_id, _ = self.labels[i]
                if frame == request.frame and region_id == request.region_id:
                    del self.labels[i]
                    self._rewrite_labels()
                    return len(self.labels)
        raise HTTPException(404, "no matching label to undo")

    def _rewrite_labels(self) -> None:
        path = Path(self.labels_path)
        if path.exists():
            path.unlink()
        for frame, region_id, label in self.labels:
            append_label_row(path, frame, region_id, label)

    def commit(self) -> CommitResponse:
        if self.cfg.ontology_path is None:
            raise HTTPException(409, "config has no ontology path to write")
        data = self._pipeline()
        with self.lock:
            normalization = "sample" if self.cfg.sample_covariance else "population"
            lib = OntologyLibrary(self.cfg.feature_set, normalization)
            for frame, region_id, label in self.labels:
                regions = data["regions"]
                if not (0 <= frame < len(regions)
                        and 0 <= region_id < len(regions[frame])):
                    raise HTTPException(
                        409, f"label ({frame}, {region_id}) no longer matches a region")
                region = regions[frame][region_id]
                left, top, width, height = region.bbox
                if width < 3 or height < 3:
                    continue
                crop = data["cleaned"][frame][top:top + height, left:left + width]
                desc = covariance(feature_tensor(crop, self.cfg.feature_set),
                                  sample=self.cfg.sample_covariance)
                lib.add_entry(label, desc,
                              provenance={"source": str(self.cfg.input_path),
                                          "frame": frame,
                                          "bbox": list(region.bbox)})
            save_library(lib, self.cfg.ontology_path)
            self.library = lib
            return CommitResponse(entries_written=len(lib),
                                  ontology_path=str(self.cfg.ontology_path))


def create_app(cfg: RunConfig, config_path: Path | None = None) -> FastAPI:
    server = AnnotationServer(cfg, config_path)

    @asynccontextmanager
    async def lifespan(_: FastAPI):
        server.acquire_label_lock()
        try:
            yield
        finally:
            server.release_label_lock()

    app = FastAPI(title="roadcov annotation service", lifespan=lifespan)
    app.state.server = server
    # the browser client is served statically from anywhere local
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])

    @app.get("/api/meta", response_model=Meta)
    def meta():
        lib = server.library
        return Meta(n_frames=server.frame_count(),
                    width=server.sequence.width,
                    height=server.sequence.height,
                    feature_set=server.cfg.feature_set.value,
                    classes=[c.value for c in ClassLabel],
                    ontology_entries=0 if lib is None else len(lib),
                    labels=len(server.labels))

    @app.get("/api/frames/{index}")
    def frame(index: int):
        if not 0 <= index < server.frame_count():
            raise HTTPException(404, f"frame {index} does not exist")
        return Response(content=server.frame_bytes(index),
                        media_type="image/x-portable-pixmap")

    @app.get("/api/frames/{index}/regions", response_model=list[RegionInfo])
    def regions(index: int):
        if not 0 <= index < server.frame_count():
            raise HTTPException(404, f"frame {index} does not exist")
        return server.regions_for(index)

    @app.get("/api/calibration", response_model=CalibrationState)
    def get_calibration():
        return server.calibration_state()

    @app.put("/api/calibration", response_model=CalibrationState)
    def put_calibration(update: CalibrationUpdate):
        try:
            server.set_calibration(update)
        except ValueError as exc:
            raise HTTPException(422, str(exc)) from exc
        return server.calibration_state()

    @app.post("/api/labels", response_model=LabelResponse)
    def post_label(request: LabelRequest):
        rows = server.add_label(request)
        return LabelResponse(recorded=LabelRecord(frame=request.frame,
                                                  region_id=request.region_id,
                                                  label=request.label),
                             rows=rows)

    @app.delete("/api/labels")
    def delete_label(request: LabelUndoRequest):
        rows = server.undo_label(request)
        return {"rows": rows}

    @app.post("/api/commit", response_model=CommitResponse)
    def commit():
        return server.commit()

    return app
