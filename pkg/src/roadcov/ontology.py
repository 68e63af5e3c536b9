"""The labeled library of covariance descriptors and 1-NN classification.

Every library entry pairs a class label with a covariance descriptor plus
provenance; a query region takes the label of its nearest entry under the
SPD distance. The margin between the winning class and the best entry of a
different class is kept because near-equidistant queries do occur and
downstream consumers want them flagged.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .descriptor import DEFAULT_EPS, CovarianceDescriptor, FeatureSet, spd_distance

__all__ = ["ClassLabel", "OntologyEntry", "OntologyLibrary", "ClassificationResult",
           "OntologyFormatError", "classify", "save_library", "load_library",
           "read_label_rows", "append_label_row", "FORMAT_VERSION"]

FORMAT_VERSION = 1
LABEL_HEADER = ("frame_index", "region_id", "label")


class ClassLabel(str, Enum):
    CAR = "Car"
    TRUCK = "Truck"
    MULTIPLE = "Multiple"
    JUNK = "Junk"


class OntologyFormatError(ValueError):
    """A library file that cannot be parsed or fails validation."""


@dataclass
class OntologyEntry:
    entry_id: int
    label: ClassLabel
    descriptor: CovarianceDescriptor
    provenance: dict
    note: str = ""


@dataclass
class OntologyLibrary:
    feature_set: FeatureSet
    normalization: str = "population"
    entries: list[OntologyEntry] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def add_entry(self, label: ClassLabel, descriptor: CovarianceDescriptor,
                  provenance: dict | None = None, note: str = "") -> int:
        """Append an entry and return its id (insertion-ordered, unique)."""
        if descriptor.feature_set != self.feature_set:
            raise ValueError(
                f"descriptor feature set {descriptor.feature_set.value} does not "
                f"match library {self.feature_set.value}")
        if descriptor.normalization != self.normalization:
            raise ValueError(
                f"descriptor normalization {descriptor.normalization} does not "
                f"match library {self.normalization}")
        entry_id = self.entries[-1].entry_id + 1 if self.entries else 0
        self.entries.append(OntologyEntry(entry_id, ClassLabel(label), descriptor,
                                          dict(provenance or {}), note))
        return entry_id


@dataclass(frozen=True)
class ClassificationResult:
    label: ClassLabel
    nearest_id: int
    distance: float
    runner_up_distance: float  # best entry of a different class; inf if none
    margin: float


def classify(lib: OntologyLibrary, query: CovarianceDescriptor,
             eps: float = DEFAULT_EPS) -> ClassificationResult:
    """Label of the nearest library entry; exact ties go to the lowest id."""
    if not lib.entries:
        raise ValueError("empty library")
    scored = [(spd_distance(entry.descriptor, query, eps), entry.entry_id, entry.label)
              for entry in lib.entries]
    distance, nearest_id, label = min(scored, key=lambda t: (t[0], t[1]))
    others = [d for d, _, lab in scored if lab != label]
    runner_up = min(others) if others else math.inf
    return ClassificationResult(label, nearest_id, distance, runner_up,
                                runner_up - distance)


def save_library(lib: OntologyLibrary, path: str | Path) -> None:
    """Write the library as versioned JSON; matrices round-trip losslessly."""
    doc = {
        "version": FORMAT_VERSION,
        "feature_set": lib.feature_set.value,
        "normalization": lib.normalization,
        "entries": [
            {
                "id": entry.entry_id,
                "label": entry.label.value,
                "n_pixels": entry.descriptor.n_pixels,
                "matrix": [[float(v) for v in row] for row in entry.descriptor.matrix],
                "provenance": entry.provenance,
                "note": entry.note,
            }
            for entry in lib.entries
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_library(path: str | Path) -> OntologyLibrary:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise OntologyFormatError(
            f"{path}: parse error at byte {exc.pos}: {exc.msg}") from exc
    try:
        version = doc["version"]
        if version != FORMAT_VERSION:
            raise OntologyFormatError(
                f"{path}: unsupported library version {version} "
                f"(expected {FORMAT_VERSION})")
        fs = FeatureSet(doc["feature_set"])
        normalization = doc.get("normalization", "population")
        lib = OntologyLibrary(fs, normalization)
        seen_ids = set()
        for raw in doc["entries"]:
            entry_id = int(raw["id"])
            if entry_id in seen_ids:
                raise OntologyFormatError(f"{path}: duplicate entry id {entry_id}")
            seen_ids.add(entry_id)
            descriptor = CovarianceDescriptor(
                np.array(raw["matrix"], dtype=np.float64), fs,
                int(raw["n_pixels"]), normalization)
            lib.entries.append(OntologyEntry(entry_id, ClassLabel(raw["label"]),
                                             descriptor, dict(raw.get("provenance", {})),
                                             str(raw.get("note", ""))))
    except OntologyFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise OntologyFormatError(f"{path}: invalid library file: {exc}") from exc
    lib.entries.sort(key=lambda e: e.entry_id)
    return lib


def read_label_rows(path: str | Path) -> list[tuple[int, int, ClassLabel]]:
    """Rows of a (frame_index, region_id, label) CSV; header optional."""
    rows = []
    with open(path, newline="") as handle:
        for record in csv.reader(handle):
            if not record or record[0].strip().startswith("#"):
                continue
            if record[0].strip() == LABEL_HEADER[0]:
                continue
            if len(record) != 3:
                raise ValueError(f"{path}: bad label row {record!r}")
            rows.append((int(record[0]), int(record[1]), ClassLabel(record[2].strip())))
    return rows


def append_label_row(path: str | Path, frame_index: int, region_id: int,
                     label: ClassLabel) -> None:
    path = Path(path)
    new_file = not path.exists() or path.stat().st_size == 0
    with open(path, "a", newline="") as handle:
        writer = csv.writer(handle)
        if new_file:
            writer.writerow(LABEL_HEADER)
        writer.writerow([frame_index, region_id, ClassLabel(label).value])
