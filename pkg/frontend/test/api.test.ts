import { describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

describe("ApiClient", () => {
  it("fetches meta from the base url", async () => {
    const fetchFn = vi.fn().mockResolvedValue(jsonResponse({ n_frames: 3 }));
    const client = new ApiClient("http://host:1", fetchFn);
    const meta = await client.meta();
    expect(meta.n_frames).toBe(3);
    expect(fetchFn).toHaveBeenCalledWith("http://host:1/api/meta", undefined);
  });

  it("puts calibration with the documented body shape", async () => {
    const fetchFn = vi.fn().mockResolvedValue(jsonResponse({ angle_degrees: 0 }));
    const client = new ApiClient("", fetchFn);
    await client.putCalibration(
      { x: 0, y: 1 }, { x: 2, y: 1 }, { left: 0, top: 0, width: 5, height: 5 });
    const [url, init] = fetchFn.mock.calls[0]!;
    expect(url).toBe("/api/calibration");
    expect(init.method).toBe("PUT");
    expect(JSON.parse(init.body)).toEqual({
      p1: { x: 0, y: 1 },
      p2: { x: 2, y: 1 },
      crop: { left: 0, top: 0, width: 5, height: 5 },
    });
  });

  it("posts labels with region_id naming", async () => {
    const fetchFn = vi.fn().mockResolvedValue(jsonResponse({ rows: 1 }));
    const client = new ApiClient("", fetchFn);
    await client.postLabel(3, 1, "Truck");
    const [, init] = fetchFn.mock.calls[0]!;
    expect(JSON.parse(init.body)).toEqual({ frame: 3, region_id: 1, label: "Truck" });
  });

  it("undo issues a DELETE", async () => {
    const fetchFn = vi.fn().mockResolvedValue(jsonResponse({ rows: 0 }));
    const client = new ApiClient("", fetchFn);
    await client.undoLabel(3, 1);
    const [url, init] = fetchFn.mock.calls[0]!;
    expect(url).toBe("/api/labels");
    expect(init.method).toBe("DELETE");
  });

  it("surfaces server detail messages on errors", async () => {
    // a fresh Response per call: bodies are single-use
    const fetchFn = vi.fn().mockImplementation(async () =>
      jsonResponse({ detail: "region 9 does not exist in frame 0" }, 404));
    const client = new ApiClient("", fetchFn);
    await expect(client.postLabel(0, 9, "Car")).rejects.toThrow(ApiError);
    await expect(client.postLabel(0, 9, "Car")).rejects.toThrow(/region 9/);
  });
});
