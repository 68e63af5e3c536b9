// Typed client for the annotation service. Mirrors the server's JSON
// schemas; every call goes through the documented HTTP API and nothing
// else, so the client works against any conforming server.

export interface Point {
  x: number;
  y: number;
}

export interface BBox {
  left: number;
  top: number;
  width: number;
  height: number;
}

export interface CalibrationState {
  p1: Point | null;
  p2: Point | null;
  crop: BBox | null;
  angle_degrees: number | null;
}

export interface RegionInfo {
  region_id: number;
  bbox: BBox;
  fill_fraction: number;
  pixel_count: number;
  suggested_label: string | null;
  distance: number | null;
  margin: number | null;
}

export interface Meta {
  n_frames: number;
  width: number;
  height: number;
  feature_set: string;
  classes: string[];
  ontology_entries: number;
  labels: number;
}

export interface LabelResponse {
  recorded: { frame: number; region_id: number; label: string };
  rows: number;
}

export interface CommitResponse {
  entries_written: number;
  ontology_path: string;
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(`${status}: ${message}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly fetchFn: FetchLike;

  constructor(
    readonly baseUrl: string = "",
    fetchFn?: FetchLike,
  ) {
    this.fetchFn = fetchFn ?? ((input, init) => globalThis.fetch(input, init));
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return response;
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    return (await this.request(path, init)).json() as Promise<T>;
  }

  meta(): Promise<Meta> {
    return this.json<Meta>("/api/meta");
  }

  async frameBytes(index: number): Promise<Uint8Array> {
    const response = await this.request(`/api/frames/${index}`);
    return new Uint8Array(await response.arrayBuffer());
  }

  regions(index: number): Promise<RegionInfo[]> {
    return this.json<RegionInfo[]>(`/api/frames/${index}/regions`);
  }

  getCalibration(): Promise<CalibrationState> {
    return this.json<CalibrationState>("/api/calibration");
  }

  putCalibration(p1: Point, p2: Point, crop: BBox): Promise<CalibrationState> {
    return this.json<CalibrationState>("/api/calibration", {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ p1, p2, crop }),
    });
  }

  postLabel(frame: number, regionId: number, label: string): Promise<LabelResponse> {
    return this.json<LabelResponse>("/api/labels", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ frame, region_id: regionId, label }),
    });
  }

  undoLabel(frame: number, regionId: number): Promise<{ rows: number }> {
    return this.json<{ rows: number }>("/api/labels", {
      method: "DELETE",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ frame, region_id: regionId }),
    });
  }

  commit(): Promise<CommitResponse> {
    return this.json<CommitResponse>("/api/commit", { method: "POST" });
  }
}
