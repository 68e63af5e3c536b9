import { describe, expect, it } from "vitest";

import type { RegionInfo } from "../src/api.js";
import {
  AMBIGUITY_MARGIN,
  WARNING_COLOR,
  isAmbiguous,
  overlayCaption,
  regionToCanvasRect,
  strokeFor,
} from "../src/overlay.js";

function region(overrides: Partial<RegionInfo> = {}): RegionInfo {
  return {
    region_id: 0,
    bbox: { left: 10, top: 20, width: 30, height: 15 },
    fill_fraction: 0.9,
    pixel_count: 405,
    suggested_label: null,
    distance: null,
    margin: null,
    ...overrides,
  };
}

describe("regionToCanvasRect", () => {
  it("is the identity at scale 1", () => {
    const rect = regionToCanvasRect({ left: 7, top: 9, width: 31, height: 22 }, 1);
    expect(rect).toEqual({ x: 7, y: 9, w: 31, h: 22 });
  });

  it("scales every coordinate uniformly", () => {
    const rect = regionToCanvasRect({ left: 7, top: 9, width: 31, height: 22 }, 2);
    expect(rect).toEqual({ x: 14, y: 18, w: 62, h: 44 });
  });
});

describe("ambiguity flag", () => {
  it("flags margins at or below the threshold", () => {
    expect(isAmbiguous(0.0)).toBe(true);
    expect(isAmbiguous(AMBIGUITY_MARGIN)).toBe(true);
    expect(isAmbiguous(AMBIGUITY_MARGIN * 10)).toBe(false);
    expect(isAmbiguous(null)).toBe(false);
  });

  it("near-equidistant regions get the warning stroke", () => {
    const ambiguous = region({ suggested_label: "Car", margin: 0.001 });
    expect(strokeFor(ambiguous, false)).toBe(WARNING_COLOR);
    expect(overlayCaption(ambiguous)).toContain("≈tie");
  });

  it("clear winners use their class color", () => {
    const clear = region({ suggested_label: "Car", margin: 2.0 });
    expect(strokeFor(clear, false)).not.toBe(WARNING_COLOR);
  });
});
