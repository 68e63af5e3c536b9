// Pure geometry and styling for the region overlays. Kept free of DOM
// calls so alignment is testable: a displayed rectangle must equal the
// API's bbox coordinates exactly (scaled by the zoom factor).

import type { BBox, RegionInfo } from "./api.js";

export interface CanvasRect {
  x: number;
  y: number;
  w: number;
  h: number;
}

// A winner barely ahead of another class is worth a second look; the
// threshold is in distance units of the SPD metric.
export const AMBIGUITY_MARGIN = 0.05;

export function regionToCanvasRect(bbox: BBox, scale: number): CanvasRect {
  return {
    x: bbox.left * scale,
    y: bbox.top * scale,
    w: bbox.width * scale,
    h: bbox.height * scale,
  };
}

export function isAmbiguous(margin: number | null): boolean {
  return margin !== null && margin <= AMBIGUITY_MARGIN;
}

const LABEL_COLORS: Record<string, string> = {
  Car: "#35c04b",
  Truck: "#3584e4",
  Multiple: "#c061cb",
  Junk: "#9a9996",
};

export const WARNING_COLOR = "#f5c211";
export const UNLABELED_COLOR = "#e8eaed";
export const SELECTED_COLOR = "#ff7800";

export function strokeFor(region: RegionInfo, selected: boolean): string {
  if (selected) return SELECTED_COLOR;
  if (isAmbiguous(region.margin)) return WARNING_COLOR;
  if (region.suggested_label && LABEL_COLORS[region.suggested_label]) {
    return LABEL_COLORS[region.suggested_label]!;
  }
  return UNLABELED_COLOR;
}

export function overlayCaption(region: RegionInfo): string {
  const parts = [`#${region.region_id}`];
  if (region.suggested_label) {
    parts.push(region.suggested_label);
    if (region.distance !== null) parts.push(region.distance.toFixed(2));
  }
  if (isAmbiguous(region.margin)) parts.push("≈tie");
  return parts.join(" ");
}

export function drawOverlays(
  ctx: CanvasRenderingContext2D,
  regions: RegionInfo[],
  selectedId: number | null,
  scale: number,
): void {
  ctx.save();
  ctx.font = `${Math.max(10, 10 * scale)}px system-ui, sans-serif`;
  ctx.textBaseline = "bottom";
  for (const region of regions) {
    const rect = regionToCanvasRect(region.bbox, scale);
    const color = strokeFor(region, region.region_id === selectedId);
    ctx.strokeStyle = color;
    ctx.lineWidth = region.region_id === selectedId ? 3 : 2;
    ctx.strokeRect(rect.x + 0.5, rect.y + 0.5, rect.w, rect.h);
    ctx.fillStyle = color;
    ctx.fillText(overlayCaption(region), rect.x + 2, rect.y - 2);
  }
  ctx.restore();
}
