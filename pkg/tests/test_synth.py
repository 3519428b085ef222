from collections import defaultdict
from pathlib import Path

from iqpool.dataset import load_manifest
from iqpool.synth import FAMILIES, generate_synthetic_dataset


def cell_key(record):
    stem = Path(record.distorted_path).stem  # dist_<ref>_<family>_<severity>
    _, ref_idx, family, severity = stem.split("_")
    return (ref_idx, family), int(severity)


class TestSyntheticDataset:
    def test_shape(self, synth_manifest):
        records = load_manifest(synth_manifest)
        assert len(records) == 4 * 3 * 5
        assert {r.distortion_type for r in records} == set(FAMILIES)
        refs = {Path(r.reference_path).name for r in records}
        assert len(refs) == 4

    def test_mos_strictly_decreasing_per_cell(self, synth_manifest):
        cells = defaultdict(dict)
        for rec in load_manifest(synth_manifest):
            key, severity = cell_key(rec)
            cells[key][severity] = rec.mos
        assert len(cells) == 12
        for key, by_severity in cells.items():
            mos = [by_severity[s] for s in sorted(by_severity)]
            assert all(a > b for a, b in zip(mos, mos[1:])), key

    def test_all_mos_distinct(self, synth_manifest):
        mos = [r.mos for r in load_manifest(synth_manifest)]
        assert len(set(mos)) == len(mos)

    def test_deterministic(self, tmp_path):
        m1 = generate_synthetic_dataset(tmp_path / "a", seed=11, size=48)
        m2 = generate_synthetic_dataset(tmp_path / "b", seed=11, size=48)
        assert m1.read_bytes() == m2.read_bytes()
        img = "dist_0_noise_3.png"
        assert (tmp_path / "a" / img).read_bytes() == (tmp_path / "b" / img).read_bytes()

    def test_seed_changes_content(self, tmp_path):
        m1 = generate_synthetic_dataset(tmp_path / "a", seed=1, size=48)
        m2 = generate_synthetic_dataset(tmp_path / "b", seed=2, size=48)
        assert m1.read_bytes() != m2.read_bytes()
