// Contract tests against a live annotation server. Point SERVE_URL at a
// running `roadcov serve` instance (run-integration.sh does the whole
// dance); without it the suite is skipped so unit tests stay hermetic.

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { regionToCanvasRect } from "../src/overlay.js";
import { decodePpm } from "../src/ppm.js";

const serveUrl = process.env.SERVE_URL ?? "";
const live = describe.skipIf(!serveUrl);

const client = new ApiClient(serveUrl);

live("live annotation server", () => {
  it("reports sane metadata", async () => {
    const meta = await client.meta();
    expect(meta.n_frames).toBeGreaterThan(0);
    expect(meta.classes).toEqual(["Car", "Truck", "Multiple", "Junk"]);
  });

  it("calibration PUT then GET round-trips", async () => {
    const meta = await client.meta();
    const p1 = { x: 0, y: Math.floor(meta.height / 2) };
    const p2 = { x: meta.width - 1, y: Math.floor(meta.height / 2) };
    const crop = { left: 0, top: 0, width: meta.width, height: meta.height };
    const put = await client.putCalibration(p1, p2, crop);
    expect(put.angle_degrees).toBe(0);
    const got = await client.getCalibration();
    expect(got.p1).toEqual({ x: p1.x, y: p1.y });
    expect(got.p2).toEqual({ x: p2.x, y: p2.y });
    expect(got.crop).toEqual(crop);
    expect(got.angle_degrees).toBe(0);
  });

  it("frames decode to the advertised dimensions", async () => {
    const meta = await client.meta();
    const image = decodePpm(await client.frameBytes(0));
    expect(image.width).toBe(meta.width);
    expect(image.height).toBe(meta.height);
  });

  it("label post then undo restores the row count", async () => {
    const meta = await client.meta();
    let frame = -1;
    let regionId = -1;
    for (let i = 0; i < meta.n_frames; i++) {
      const regions = await client.regions(i);
      if (regions.length > 0) {
        frame = i;
        regionId = regions[0]!.region_id;
        break;
      }
    }
    expect(frame).toBeGreaterThanOrEqual(0);
    const posted = await client.postLabel(frame, regionId, "Car");
    const undone = await client.undoLabel(frame, regionId);
    expect(undone.rows).toBe(posted.rows - 1);
  });

  it("overlay rects align exactly with API bboxes on a known frame", async () => {
    const meta = await client.meta();
    let checked = 0;
    for (let i = 0; i < meta.n_frames && checked === 0; i++) {
      const regions = await client.regions(i);
      for (const region of regions) {
        const rect = regionToCanvasRect(region.bbox, 1);
        expect(rect.x).toBe(region.bbox.left);
        expect(rect.y).toBe(region.bbox.top);
        expect(rect.w).toBe(region.bbox.width);
        expect(rect.h).toBe(region.bbox.height);
        // boxes must lie inside the frame the server advertises
        expect(rect.x).toBeGreaterThanOrEqual(0);
        expect(rect.y).toBeGreaterThanOrEqual(0);
        expect(rect.x + rect.w).toBeLessThanOrEqual(meta.width);
        expect(rect.y + rect.h).toBeLessThanOrEqual(meta.height);
        checked += 1;
      }
    }
    expect(checked).toBeGreaterThan(0);
  });

  it("unknown regions are 404", async () => {
    await expect(client.postLabel(0, 9999, "Car")).rejects.toThrow(/404/);
  });
});
