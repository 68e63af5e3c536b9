import numpy as np
import pytest
from fastapi.testclient import TestClient

from roadcov.config import RunConfig, load_config, save_config
from roadcov.evaluation import load_ground_truth
from roadcov.frames import load_sequence
from roadcov.images import decode_netpbm
from roadcov.ontology import append_label_row, load_library
from roadcov.pipeline import (build_ontology_from_labels, calibrate_frames,
                              clean_frames, compute_regions)
from roadcov.preprocess import binarize_sequence
from roadcov.service.app import create_app
from roadcov.synthetic import write_scene

from scenes import LIBRARY_FRAMES, auto_label_regions, small_scene


@pytest.fixture()
def workspace(tmp_path):
    frames_dir = tmp_path / "frames"
    write_scene(small_scene(), seed=5, out_dir=frames_dir)
    cfg = RunConfig(base_dir=tmp_path,
                    input_path=frames_dir,
                    ontology_path=tmp_path / "ontology.json",
                    labels_path=tmp_path / "labels.csv",
                    out_dir=tmp_path / "out",
                    seed=5)
    config_path = tmp_path / "run.cfg"
    save_config(cfg, config_path)
    return tmp_path, load_config(config_path), config_path


@pytest.fixture()
def client(workspace):
    tmp_path, cfg, config_path = workspace
    app = create_app(cfg, config_path=config_path)
    with TestClient(app) as c:
        yield c


class TestMetaAndFrames:
    def test_meta_reports_dimensions(self, client):
        meta = client.get("/api/meta").json()
        assert meta["n_frames"] == small_scene().n_frames
        assert meta["width"] == 320
        assert meta["height"] == 120
        assert meta["classes"] == ["Car", "Truck", "Multiple", "Junk"]

    def test_frame_bytes_decode(self, client):
        response = client.get("/api/frames/0")
        assert response.status_code == 200
        assert response.headers["content-type"].startswith("image/x-portable-pixmap")
        img = decode_netpbm(response.content)
        assert img.shape == (120, 320, 3)

    def test_frame_out_of_range_is_404(self, client):
        assert client.get("/api/frames/999").status_code == 404

    def test_regions_have_bboxes(self, client):
        regions = client.get("/api/frames/1/regions").json()
        assert len(regions) >= 1
        first = regions[0]
        assert set(first["bbox"]) == {"left", "top", "width", "height"}
        assert 0.0 <= first["fill_fraction"] <= 1.0
        assert first["suggested_label"] is None  # no ontology yet


class TestCalibrationRoundTrip:
    def test_put_then_get_equals(self, client):
        payload = {"p1": {"x": 0, "y": 100}, "p2": {"x": 200, "y": 100},
                   "crop": {"left": 10, "top": 20, "width": 200, "height": 80}}
        put = client.put("/api/calibration", json=payload)
        assert put.status_code == 200
        got = client.get("/api/calibration").json()
        assert got["p1"] == {"x": 0.0, "y": 100.0}
        assert got["p2"] == {"x": 200.0, "y": 100.0}
        assert got["crop"] == payload["crop"]
        assert got["angle_degrees"] == 0.0

    def test_calibration_changes_served_frames(self, client):
        full = decode_netpbm(client.get("/api/frames/0").content)
        client.put("/api/calibration", json={
            "p1": {"x": 0, "y": 50}, "p2": {"x": 100, "y": 50},
            "crop": {"left": 0, "top": 0, "width": 160, "height": 60}})
        cropped = decode_netpbm(client.get("/api/frames/0").content)
        assert cropped.shape == (60, 160, 3)
        assert np.array_equal(cropped, full[:60, :160])

    def test_calibration_persisted_to_config(self, workspace):
        tmp_path, cfg, config_path = workspace
        app = create_app(cfg, config_path=config_path)
        with TestClient(app) as c:
            c.put("/api/calibration", json={
                "p1": {"x": 0, "y": 0}, "p2": {"x": 50, "y": 0},
                "crop": {"left": 0, "top": 0, "width": 100, "height": 100}})
        reloaded = load_config(config_path)
        assert reloaded.calibration is not None
        assert reloaded.calibration.crop == (0, 0, 100, 100)

    def test_vertical_baseline_rejected(self, client):
        response = client.put("/api/calibration", json={
            "p1": {"x": 5, "y": 0}, "p2": {"x": 5, "y": 50},
            "crop": {"left": 0, "top": 0, "width": 10, "height": 10}})
        assert response.status_code == 422


class TestLabels:
    def test_post_appends_row(self, client, workspace):
        tmp_path, _, _ = workspace
        regions = client.get("/api/frames/1/regions").json()
        assert regions
        response = client.post("/api/labels", json={
            "frame": 1, "region_id": regions[0]["region_id"], "label": "Truck"})
        assert response.status_code == 200
        assert response.json()["rows"] == 1
        lines = (tmp_path / "labels.csv").read_text().strip().splitlines()
        assert lines[-1] == f"1,{regions[0]['region_id']},Truck"

    def test_post_then_undo_round_trip(self, client, workspace):
        tmp_path, _, _ = workspace
        regions = client.get("/api/frames/1/regions").json()
        client.post("/api/labels", json={
            "frame": 1, "region_id": regions[0]["region_id"], "label": "Car"})
        before = (tmp_path / "labels.csv").read_text()
        client.post("/api/labels", json={
            "frame": 1, "region_id": regions[0]["region_id"], "label": "Junk"})
        response = client.request("DELETE", "/api/labels", json={
            "frame": 1, "region_id": regions[0]["region_id"]})
        assert response.status_code == 200
        assert (tmp_path / "labels.csv").read_text() == before

    def test_unknown_region_is_404(self, client):
        assert client.post("/api/labels", json={
            "frame": 1, "region_id": 999, "label": "Car"}).status_code == 404

    def test_unknown_label_is_422(self, client):
        assert client.post("/api/labels", json={
            "frame": 1, "region_id": 0, "label": "Bicycle"}).status_code == 422

    def test_undo_without_match_is_404(self, client):
        assert client.request("DELETE", "/api/labels", json={
            "frame": 0, "region_id": 0}).status_code == 404


class TestCommit:
    def test_commit_builds_ontology_and_suggests(self, client, workspace):
        tmp_path, cfg, _ = workspace
        labeled = 0
        for frame in range(LIBRARY_FRAMES):
            for region in client.get(f"/api/frames/{frame}/regions").json():
                label = "Car" if region["bbox"]["width"] < 50 else "Truck"
                client.post("/api/labels", json={
                    "frame": frame, "region_id": region["region_id"], "label": label})
                labeled += 1
        assert labeled > 0
        response = client.post("/api/commit")
        assert response.status_code == 200
        body = response.json()
        assert body["entries_written"] == labeled
        lib = load_library(tmp_path / "ontology.json")
        assert len(lib) == labeled
        # suggestions now flow from the committed library
        regions = client.get("/api/frames/6/regions").json()
        assert any(r["suggested_label"] is not None for r in regions)


class TestSingleWriter:
    def test_second_server_on_same_labels_rejected(self, workspace):
        tmp_path, cfg, config_path = workspace
        app1 = create_app(cfg, config_path=config_path)
        with TestClient(app1):
            cfg2 = load_config(config_path)
            app2 = create_app(cfg2, config_path=config_path)
            with pytest.raises(RuntimeError, match="another process"):
                with TestClient(app2):
                    pass

    def test_lock_released_on_shutdown(self, workspace):
        tmp_path, cfg, config_path = workspace
        app = create_app(cfg, config_path=config_path)
        with TestClient(app):
            pass
        cfg2 = load_config(config_path)
        with TestClient(create_app(cfg2, config_path=config_path)):
            pass  # no lock collision after clean shutdown
