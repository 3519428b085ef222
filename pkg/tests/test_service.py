import numpy as np
import pytest
from fastapi.testclient import TestClient
from PIL import Image

from iqpool.attributes import ssim_map
from iqpool.service import create_app

FAST_POOLINGS = ["mean", "std", "weighted_percentile_n10"]


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


@pytest.fixture()
def image_pair(tmp_path, rng):
    base = rng.uniform(20, 230, (24, 24))
    noisy = np.clip(base + rng.normal(0, 12, base.shape), 0, 255)
    ref, dist = tmp_path / "ref.png", tmp_path / "dist.png"
    Image.fromarray(base.astype(np.uint8), mode="L").save(ref)
    Image.fromarray(noisy.astype(np.uint8), mode="L").save(dist)
    return str(ref), str(dist)


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok"}


def test_strategies_lists_catalog(client):
    body = client.get("/strategies").json()
    assert len(body["poolings"]) == 28
    assert "weighted_percentile_n20" in body["poolings"]
    assert set(body["attributes"]) >= {"squared_error", "ssim"}


class TestPoolEndpoint:
    def test_scores_match_library(self, client, image_pair):
        ref, dist = image_pair
        resp = client.post(
            "/pool",
            json={
                "reference_path": ref,
                "distorted_path": dist,
                "attributes": ["ssim"],
                "poolings": ["mean"],
            },
        )
        assert resp.status_code == 200
        body = resp.json()
        assert len(body["scores"]) == 1
        item = body["scores"][0]
        assert item["attribute"] == "ssim"
        assert item["polarity"] == "quality"
        from iqpool.dataset import load_image

        expected = float(np.mean(ssim_map(load_image(ref), load_image(dist)).values))
        assert item["value"] == pytest.approx(expected, rel=1e-12)

    def test_full_catalog_by_default(self, client, image_pair):
        ref, dist = image_pair
        resp = client.post("/pool", json={"reference_path": ref, "distorted_path": dist})
        assert resp.status_code == 200
        assert len(resp.json()["scores"]) == 2 * 28

    def test_unknown_attribute_is_400(self, client, image_pair):
        ref, dist = image_pair
        resp = client.post(
            "/pool",
            json={"reference_path": ref, "distorted_path": dist, "attributes": ["nope"]},
        )
        assert resp.status_code == 400
        assert "nope" in resp.json()["detail"]

    def test_missing_file_is_400(self, client, tmp_path):
        resp = client.post(
            "/pool",
            json={"reference_path": str(tmp_path / "a.png"),
                  "distorted_path": str(tmp_path / "b.png")},
        )
        assert resp.status_code == 400

    def test_bad_window_is_400(self, client, image_pair):
        ref, dist = image_pair
        resp = client.post(
            "/pool",
            json={"reference_path": ref, "distorted_path": dist,
                  "window": {"side": 4}},
        )
        assert resp.status_code == 400


class TestSynthBenchFlow:
    def test_end_to_end(self, client, tmp_path):
        synth = client.post(
            "/synth", json={"out_dir": str(tmp_path / "ds"), "seed": 3, "size": 48}
        )
        assert synth.status_code == 200
        body = synth.json()
        assert body["records"] == 60

        bench = client.post(
            "/bench",
            json={
                "manifests": [body["manifest"]],
                "out_dir": str(tmp_path / "out"),
                "attributes": ["ssim"],
                "poolings": FAST_POOLINGS,
            },
        )
        assert bench.status_code == 200
        bench_body = bench.json()
        assert bench_body["records_used"] == 60
        assert bench_body["skipped"] == 0
        assert bench_body["rows"] == 4 * 1 * len(FAST_POOLINGS)
        assert any(p.endswith("correlations.csv") for p in bench_body["outputs"])

        sig = client.post(
            "/significance",
            json={"correlations_csv": str(tmp_path / "out" / "correlations.csv")},
        )
        assert sig.status_code == 200
        sig_body = sig.json()
        assert len(sig_body["rows"]) == len(FAST_POOLINGS) * (len(FAST_POOLINGS) - 1) // 2
        assert all(len(r["codeword"]) == 9 for r in sig_body["rows"])
        assert len(sig_body["col_sums"]) == 9
        assert len(sig_body["db_sums"]) == 3

    def test_bench_missing_manifest_is_400(self, client, tmp_path):
        resp = client.post(
            "/bench",
            json={"manifests": [str(tmp_path / "none.csv")], "out_dir": str(tmp_path / "o")},
        )
        assert resp.status_code == 400

    def test_significance_rejects_arbitrary_csv(self, client, tmp_path):
        junk = tmp_path / "junk.csv"
        junk.write_text("a,b\n1,2\n", encoding="utf-8")
        resp = client.post("/significance", json={"correlations_csv": str(junk)})
        assert resp.status_code == 400
