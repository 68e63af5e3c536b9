// DOM wiring for the annotator: frame canvas with region overlays,
// keyboard labeling (1-4 apply a class, 0 ignores, u undoes, arrows step
// frames), a calibration mode driven by two clicks plus a crop drag, and
// a commit button that writes the ontology server-side.

import { ApiClient, type Meta, type RegionInfo } from "./api.js";
import { drawOverlays, regionToCanvasRect } from "./overlay.js";
import { decodePpm } from "./ppm.js";
import { CalibrationDraft, LabelHistory, keyToLabel } from "./session.js";

// same-origin by default; ?api=http://127.0.0.1:8700 targets a remote service
const api = new ApiClient(new URLSearchParams(location.search).get("api") ?? "");

const canvas = document.getElementById("frame") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const frameLabel = document.getElementById("frame-label")!;
const regionList = document.getElementById("region-list")!;
const banner = document.getElementById("banner")!;
const angleField = document.getElementById("angle-field")!;
const statusField = document.getElementById("status-field")!;
const calibrateButton = document.getElementById("calibrate-btn") as HTMLButtonElement;
const commitButton = document.getElementById("commit-btn") as HTMLButtonElement;
const undoButton = document.getElementById("undo-btn") as HTMLButtonElement;

let meta: Meta | null = null;
let frameIndex = 0;
let regions: RegionInfo[] = [];
let selectedRegion: number | null = null;
let calibrating = false;
const draft = new CalibrationDraft();
const history = new LabelHistory();

function showError(message: string): void {
  banner.textContent = message;
  banner.classList.add("visible");
  setTimeout(() => banner.classList.remove("visible"), 4000);
}

function setStatus(message: string): void {
  statusField.textContent = message;
}

async function refreshFrame(): Promise<void> {
  try {
    const bytes = await api.frameBytes(frameIndex);
    const image = decodePpm(bytes);
    canvas.width = image.width;
    canvas.height = image.height;
    ctx.putImageData(new ImageData(image.rgba, image.width, image.height), 0, 0);
    regions = await api.regions(frameIndex);
    drawOverlays(ctx, regions, selectedRegion, 1);
    renderRegionList();
    frameLabel.textContent = `frame ${frameIndex} / ${meta ? meta.n_frames - 1 : "?"}`;
  } catch (err) {
    showError(String(err));
  }
}

function renderRegionList(): void {
  regionList.replaceChildren(
    ...regions.map((region) => {
      const item = document.createElement("li");
      const rect = regionToCanvasRect(region.bbox, 1);
      item.textContent =
        `#${region.region_id} [${rect.x},${rect.y} ${rect.w}×${rect.h}] ` +
        `fill ${(region.fill_fraction * 100).toFixed(0)}%` +
        (region.suggested_label ? ` → ${region.suggested_label}` : "");
      if (region.region_id === selectedRegion) item.classList.add("selected");
      item.addEventListener("click", () => {
        selectedRegion = region.region_id;
        void refreshFrame();
      });
      return item;
    }),
  );
}

async function applyLabel(label: string): Promise<void> {
  if (selectedRegion === null) {
    showError("select a region first (click it in the list or image)");
    return;
  }
  try {
    const response = await api.postLabel(frameIndex, selectedRegion, label);
    history.record(frameIndex, selectedRegion, label);
    setStatus(`labeled region ${selectedRegion} as ${label} (${response.rows} rows)`);
  } catch (err) {
    showError(String(err));
  }
}

async function undoLast(): Promise<void> {
  const last = history.peek();
  if (!last) {
    showError("nothing to undo");
    return;
  }
  try {
    const response = await api.undoLabel(last.frame, last.regionId);
    history.pop();
    setStatus(`undid label on frame ${last.frame} region ${last.regionId} (${response.rows} rows)`);
  } catch (err) {
    showError(String(err));
  }
}

function canvasPoint(event: MouseEvent): { x: number; y: number } {
  const rect = canvas.getBoundingClientRect();
  return { x: event.clientX - rect.left, y: event.clientY - rect.top };
}

canvas.addEventListener("click", (event) => {
  const point = canvasPoint(event);
  if (calibrating && (draft.phase === "need-first-click" || draft.phase === "need-second-click")) {
    draft.click(point);
    const angle = draft.angleDegrees();
    angleField.textContent = angle === null ? "—" : `${angle.toFixed(2)}°`;
    setStatus(draft.phase === "need-second-click"
      ? "click the second baseline point"
      : "drag the crop rectangle");
    return;
  }
  // selection: topmost region whose bbox contains the click
  const hit = regions.findLast((region) => {
    const r = regionToCanvasRect(region.bbox, 1);
    return point.x >= r.x && point.x < r.x + r.w && point.y >= r.y && point.y < r.y + r.h;
  });
  selectedRegion = hit ? hit.region_id : null;
  void refreshFrame();
});

canvas.addEventListener("mousedown", (event) => {
  if (calibrating && draft.phase === "need-crop") draft.beginCrop(canvasPoint(event));
});

canvas.addEventListener("mousemove", (event) => {
  if (!calibrating) return;
  const preview = draft.dragCrop(canvasPoint(event));
  if (preview) {
    void refreshFrame().then(() => {
      ctx.strokeStyle = "#ff7800";
      ctx.setLineDash([6, 4]);
      ctx.strokeRect(preview.left + 0.5, preview.top + 0.5, preview.width, preview.height);
      ctx.setLineDash([]);
    });
  }
});

canvas.addEventListener("mouseup", async (event) => {
  if (!calibrating) return;
  const crop = draft.endCrop(canvasPoint(event));
  if (!crop) return;
  const payload = draft.payload();
  if (!payload) {
    showError("vertical baseline; click along the travel direction");
    draft.reset();
    return;
  }
  try {
    const state = await api.putCalibration(payload.p1, payload.p2, payload.crop);
    calibrating = false;
    calibrateButton.textContent = "calibrate";
    angleField.textContent = state.angle_degrees === null ? "—" : `${state.angle_degrees.toFixed(2)}°`;
    setStatus("calibration stored; frames re-rendered");
    await refreshFrame();
  } catch (err) {
    showError(String(err));
    draft.reset();
  }
});

calibrateButton.addEventListener("click", () => {
  calibrating = !calibrating;
  draft.reset();
  calibrateButton.textContent = calibrating ? "cancel calibration" : "calibrate";
  setStatus(calibrating ? "click the first baseline point" : "");
});

commitButton.addEventListener("click", async () => {
  try {
    const response = await api.commit();
    setStatus(`ontology written: ${response.entries_written} entries → ${response.ontology_path}`);
  } catch (err) {
    showError(String(err));
  }
});

undoButton.addEventListener("click", () => void undoLast());

document.addEventListener("keydown", (event) => {
  if (event.key === "ArrowRight" || event.key === "n") {
    if (meta && frameIndex < meta.n_frames - 1) {
      frameIndex += 1;
      selectedRegion = null;
      void refreshFrame();
    }
  } else if (event.key === "ArrowLeft" || event.key === "p") {
    if (frameIndex > 0) {
      frameIndex -= 1;
      selectedRegion = null;
      void refreshFrame();
    }
  } else if (event.key === "u") {
    void undoLast();
  } else {
    const label = keyToLabel(event.key);
    if (label === "ignore") {
      setStatus(`ignored region ${selectedRegion ?? "?"}`);
    } else if (label) {
      void applyLabel(label);
    }
  }
});

async function start(): Promise<void> {
  try {
    meta = await api.meta();
    const calibration = await api.getCalibration();
    angleField.textContent = calibration.angle_degrees === null
      ? "—"
      : `${calibration.angle_degrees.toFixed(2)}°`;
    setStatus(`${meta.n_frames} frames, ${meta.ontology_entries} ontology entries, ` +
      `${meta.labels} labels on file`);
    await refreshFrame();
  } catch (err) {
    showError(`server unreachable: ${String(err)}`);
  }
}

void start();
