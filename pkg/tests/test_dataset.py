import numpy as np
import pytest
from PIL import Image

from iqpool.bench import score_record
from iqpool.dataset import (
    EvalRecord,
    ScoreCache,
    group_records,
    load_image,
    load_manifest,
    params_hash,
    save_manifest,
)
from iqpool.attributes import WindowConfig
from iqpool.errors import DecodeError, ManifestSchemaError, RecordError
from iqpool.pooling import catalog, select_specs

HEADER = "database_id,reference_path,distorted_path,distortion_type,mos,mos_is_dmos\n"


def write_manifest(path, body=""):
    path.write_text(HEADER + body, encoding="utf-8")
    return path


class TestLoadManifest:
    def test_empty_data_section(self, tmp_path):
        records = load_manifest(write_manifest(tmp_path / "m.csv"))
        assert records == []

    def test_single_row_resolved(self, tmp_path):
        m = write_manifest(tmp_path / "m.csv", "live,ref.png,dist.png,jpeg,42.5,false\n")
        (rec,) = load_manifest(m)
        assert rec.reference_path == str(tmp_path / "ref.png")
        assert rec.distorted_path == str(tmp_path / "dist.png")
        assert rec.mos == 42.5
        assert rec.mos_is_dmos is False

    def test_absolute_paths_kept(self, tmp_path):
        m = write_manifest(tmp_path / "m.csv", f"db,/abs/r.png,/abs/d.png,noise,1.0,true\n")
        (rec,) = load_manifest(m)
        assert rec.reference_path == "/abs/r.png"
        assert rec.mos_is_dmos is True

    def test_unparseable_mos_names_row(self, tmp_path):
        m = write_manifest(tmp_path / "m.csv", "db,r.png,d.png,noise,abc,false\n")
        with pytest.raises(RecordError) as err:
            load_manifest(m)
        assert err.value.row == 2
        assert "row 2" in str(err.value)

    def test_missing_column(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("database_id,reference_path\n", encoding="utf-8")
        with pytest.raises(ManifestSchemaError):
            load_manifest(bad)

    def test_comments_and_blank_lines_ignored(self, tmp_path):
        body = "# a comment\n\ndb,r.png,d.png,noise,3.0,false\n# trailing\n"
        m = tmp_path / "m.csv"
        m.write_text("# leading comment\n" + HEADER + body, encoding="utf-8")
        assert len(load_manifest(m)) == 1

    def test_round_trip(self, tmp_path):
        records = [
            EvalRecord("db", "/a/r.png", "/a/d1.png", "noise", 1.25, False),
            EvalRecord("db", "/a/r.png", "/a/d2.png", "blur", 0.1 + 0.2, True),
        ]
        path = save_manifest(records, tmp_path / "rt.csv")
        assert load_manifest(path) == records


class TestLoadImage:
    def test_white_png(self, tmp_path):
        p = tmp_path / "w.png"
        Image.fromarray(np.full((1, 1), 255, dtype=np.uint8), mode="L").save(p)
        img = load_image(p)
        assert img.pixels.tolist() == [[255.0]]

    def test_grayscale_passthrough(self, tmp_path):
        data = np.arange(16, dtype=np.uint8).reshape(4, 4) * 16
        p = tmp_path / "g.png"
        Image.fromarray(data, mode="L").save(p)
        assert np.array_equal(load_image(p).pixels, data.astype(np.float64))

    def test_rgb_converted(self, tmp_path):
        data = np.zeros((2, 2, 3), dtype=np.uint8)
        data[..., 0] = 255
        p = tmp_path / "rgb.png"
        Image.fromarray(data, mode="RGB").save(p)
        assert load_image(p).pixels == pytest.approx(0.299 * 255.0, abs=1e-9)

    def test_bmp_supported(self, tmp_path):
        data = np.full((3, 3), 99, dtype=np.uint8)
        p = tmp_path / "img.bmp"
        Image.fromarray(data, mode="L").save(p)
        assert np.all(load_image(p).pixels == 99.0)

    def test_truncated_file(self, tmp_path):
        good = tmp_path / "ok.png"
        Image.fromarray(np.zeros((8, 8), dtype=np.uint8), mode="L").save(good)
        bad = tmp_path / "trunc.png"
        bad.write_bytes(good.read_bytes()[:30])
        with pytest.raises(DecodeError):
            load_image(bad)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_image(tmp_path / "nope.png")


class TestGroupRecords:
    def test_empty(self):
        assert group_records([]) == {}

    def test_two_types(self):
        recs = [
            EvalRecord("db", "r", "d1", "noise", 1.0),
            EvalRecord("db", "r", "d2", "blur", 2.0),
            EvalRecord("db", "r", "d3", "noise", 3.0),
        ]
        groups = group_records(recs)
        assert len(groups) == 2
        assert len(groups[("db", "noise")]) == 2
        assert len(groups[("db", "blur")]) == 1

    def test_many_types(self):
        recs = [EvalRecord("tid", "r", f"d{i}", f"type_{i % 24}", float(i)) for i in range(48)]
        assert len(group_records(recs)) == 24

    def test_partition_preserves_order_and_union(self):
        recs = [EvalRecord("db", "r", f"d{i}", "t" if i % 2 else "u", float(i)) for i in range(6)]
        groups = group_records(recs)
        rebuilt = [r for members in groups.values() for r in members]
        assert sorted(rebuilt, key=lambda r: r.mos) == recs


class TestScoreCache:
    def test_round_trip_bit_identical(self, tmp_path):
        cache = ScoreCache(tmp_path / "cache.jsonl")
        value = 0.1 + 0.2  # not exactly representable intent
        cache.put("rec", "ssim", "mean", "abcd", value)
        assert cache.get("rec", "ssim", "mean", "abcd") == (value, False)
        reloaded = ScoreCache(tmp_path / "cache.jsonl")
        hit = reloaded.get("rec", "ssim", "mean", "abcd")
        assert hit is not None and hit[0] == value

    def test_parameter_hash_miss(self, tmp_path):
        cache = ScoreCache(tmp_path / "cache.jsonl")
        cache.put("rec", "ssim", "mean", params_hash({"a": 1}), 1.0)
        assert cache.get("rec", "ssim", "mean", params_hash({"a": 2})) is None

    def test_coherent_with_recomputation(self, tmp_path, synth_manifest):
        rec = load_manifest(synth_manifest)[0]
        specs = select_specs(["mean", "weighted_percentile_n10"], catalog())
        window = WindowConfig()
        cache = ScoreCache(tmp_path / "scores.jsonl")
        fresh = score_record(rec, ("ssim",), specs, window, cache)
        assert len(cache) == 2
        cached = score_record(rec, ("ssim",), specs, window, cache)
        assert cached == fresh  # bit-identical values via the cache


def test_params_hash_stable():
    assert params_hash({"b": 2, "a": 1}) == params_hash({"a": 1, "b": 2})
    assert params_hash({"a": 1}) != params_hash({"a": 1.5})
