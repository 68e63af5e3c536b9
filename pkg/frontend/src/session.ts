// Annotation session state: the current frame, applied labels with their
// undo stack, keyboard mapping, and the calibration draft built from two
// baseline clicks plus a crop drag. No DOM here; main.ts wires events.

import type { BBox, Point } from "./api.js";

export const KEY_LABELS: Record<string, string | "ignore"> = {
  "1": "Car",
  "2": "Truck",
  "3": "Multiple",
  "4": "Junk",
  "0": "ignore",
};

export function keyToLabel(key: string): string | "ignore" | null {
  return KEY_LABELS[key] ?? null;
}

export interface AppliedLabel {
  frame: number;
  regionId: number;
  label: string;
}

export class LabelHistory {
  private applied: AppliedLabel[] = [];

  record(frame: number, regionId: number, label: string): AppliedLabel {
    const entry = { frame, regionId, label };
    this.applied.push(entry);
    return entry;
  }

  /** The label an undo should target, without removing it yet. */
  peek(): AppliedLabel | null {
    return this.applied.length ? this.applied[this.applied.length - 1]! : null;
  }

  pop(): AppliedLabel | null {
    return this.applied.pop() ?? null;
  }

  get count(): number {
    return this.applied.length;
  }
}

// Calibration draft: click the road baseline twice, then drag the crop.
export type CalibrationPhase = "need-first-click" | "need-second-click" | "need-crop" | "ready";

export function previewAngleDegrees(p1: Point, p2: Point): number | null {
  const dx = p2.x - p1.x;
  const dy = p2.y - p1.y;
  if (dx === 0) return null; // vertical baseline; the server refuses it too
  return (-Math.atan(dy / dx) * 180) / Math.PI + 0; // +0 canonicalizes -0
}

export function normalizedRect(a: Point, b: Point): BBox {
  const left = Math.round(Math.min(a.x, b.x));
  const top = Math.round(Math.min(a.y, b.y));
  return {
    left,
    top,
    width: Math.max(1, Math.round(Math.abs(b.x - a.x))),
    height: Math.max(1, Math.round(Math.abs(b.y - a.y))),
  };
}

export class CalibrationDraft {
  p1: Point | null = null;
  p2: Point | null = null;
  crop: BBox | null = null;
  private dragStart: Point | null = null;

  get phase(): CalibrationPhase {
    if (!this.p1) return "need-first-click";
    if (!this.p2) return "need-second-click";
    if (!this.crop) return "need-crop";
    return "ready";
  }

  click(point: Point): void {
    if (!this.p1) {
      this.p1 = point;
    } else if (!this.p2) {
      this.p2 = point;
    }
  }

  beginCrop(point: Point): void {
    if (this.phase === "need-crop" || this.phase === "ready") {
      this.dragStart = point;
    }
  }

  dragCrop(point: Point): BBox | null {
    if (!this.dragStart) return null;
    return normalizedRect(this.dragStart, point);
  }

  endCrop(point: Point): BBox | null {
    if (!this.dragStart) return null;
    this.crop = normalizedRect(this.dragStart, point);
    this.dragStart = null;
    return this.crop;
  }

  angleDegrees(): number | null {
    if (!this.p1 || !this.p2) return null;
    return previewAngleDegrees(this.p1, this.p2);
  }

  reset(): void {
    this.p1 = this.p2 = this.crop = null;
    this.dragStart = null;
  }

  payload(): { p1: Point; p2: Point; crop: BBox } | null {
    if (this.phase !== "ready" || this.angleDegrees() === null) return null;
    return { p1: this.p1!, p2: this.p2!, crop: this.crop! };
  }
}
