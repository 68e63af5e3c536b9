"""Request/response schemas for the annotation service."""

from __future__ import annotations

from pydantic import BaseModel, field_validator

from ..ontology import ClassLabel


class Point(BaseModel):
    x: float
    y: float


class BBox(BaseModel):
    left: int
    top: int
    width: int
    height: int


class CalibrationState(BaseModel):
    p1: Point | None = None
    p2: Point | None = None
    crop: BBox | None = None
    angle_degrees: float | None = None


class CalibrationUpdate(BaseModel):
    p1: Point
    p2: Point
    crop: BBox


class RegionInfo(BaseModel):
    region_id: int
    bbox: BBox
    fill_fraction: float
    pixel_count: int
    suggested_label: str | None = None
    distance: float | None = None
    margin: float | None = None


class LabelRequest(BaseModel):
    frame: int
    region_id: int
    label: str

    @field_validator("label")
    @classmethod
    def label_known(cls, value: str) -> str:
        ClassLabel(value)  # raises on unknown labels
        return value


class LabelUndoRequest(BaseModel):
    frame: int
    region_id: int


class LabelRecord(BaseModel):
    frame: int
    region_id: int
    label: str


class LabelResponse(BaseModel):
    recorded: LabelRecord
    rows: int


class Meta(BaseModel):
    n_frames: int
    width: int
    height: int
    feature_set: str
    classes: list[str]
    ontology_entries: int
    labels: int


class CommitResponse(BaseModel):
    entries_written: int
    ontology_path: str
