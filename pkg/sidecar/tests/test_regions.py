import json

import numpy as np
import pytest

from splatprep.encoder import MockImageEncoder
from splatprep.regions import embed_regions, region_crop, write_embeddings
from splatprep.track import color_track

from conftest import two_view_images


@pytest.fixture
def views_and_maps():
    images = two_view_images()
    return images, color_track(images)


class TestRegionCrop:
    def test_masked_crop_flattens_background(self):
        img = np.zeros((6, 6, 3), dtype=np.uint8)
        img[2:4, 2:4] = 200
        mask = np.zeros((6, 6), dtype=bool)
        mask[2:4, 2:5] = True  # bbox wider than the bright patch
        crop = region_crop(img, mask, masked=True)
        assert crop.shape == (2, 3, 3)
        assert np.all(crop[:, :2] == 200)

    def test_plain_crop_keeps_background(self):
        img = np.zeros((6, 6, 3), dtype=np.uint8)
        img[2:4, 2:4] = 200
        mask = np.zeros((6, 6), dtype=bool)
        mask[2:4, 2:5] = True
        crop = region_crop(img, mask, masked=False)
        assert np.all(crop[:, 2] == 0)

    def test_empty_mask_rejected(self):
        with pytest.raises(ValueError, match="empty mask"):
            region_crop(np.zeros((4, 4, 3), dtype=np.uint8), np.zeros((4, 4), dtype=bool))


class TestEmbedRegions:
    def test_all_embeddings_unit_norm(self, views_and_maps):
        images, maps = views_and_maps
        payload = embed_regions(images, maps, encoder=MockImageEncoder(dim=32))
        assert payload["dim"] == 32
        for rec in payload["records"]:
            assert abs(np.linalg.norm(rec["values"]) - 1.0) <= 1e-5

    def test_absent_label_produces_no_record(self, views_and_maps):
        images, maps = views_and_maps
        maps = [m.copy() for m in maps]
        only_in_view0 = int(maps[1].max())
        maps[1][maps[1] == only_in_view0] = 0
        payload = embed_regions(images, maps, encoder=MockImageEncoder(dim=8))
        assert not any(
            r["view"] == 1 and r["label"] == only_in_view0 for r in payload["records"]
        )

    def test_record_count_matches_presence(self, views_and_maps):
        images, maps = views_and_maps
        payload = embed_regions(images, maps, encoder=MockImageEncoder(dim=8))
        presence = sum(
            1
            for v, m in enumerate(maps)
            for label in np.unique(m)
            if label != 0
        )
        assert len(payload["records"]) == presence

    def test_deterministic(self, views_and_maps):
        images, maps = views_and_maps
        a = embed_regions(images, maps, encoder=MockImageEncoder(dim=8))
        b = embed_regions(images, maps, encoder=MockImageEncoder(dim=8))
        assert a == b

    def test_masked_and_plain_crops_differ(self):
        # needs a non-rectangular region: for an exact rectangle the bbox
        # crop equals the masked crop and both modes coincide
        img = np.random.default_rng(0).integers(0, 255, (10, 10, 3)).astype(np.uint8)
        labels = np.zeros((10, 10), dtype=np.uint16)
        labels[2:8, 2:8] = 1
        labels[2:5, 2:5] = 0  # notch the corner
        enc = MockImageEncoder(dim=8)
        masked = embed_regions([img], [labels], encoder=enc, masked=True)
        plain = embed_regions([img], [labels], encoder=enc, masked=False)
        assert masked != plain

    def test_size_mismatch_rejected(self, views_and_maps):
        images, maps = views_and_maps
        with pytest.raises(ValueError, match="sizes differ"):
            embed_regions(images, [m[:-1] for m in maps])

    def test_written_file_is_engine_shaped_json(self, views_and_maps, tmp_path):
        images, maps = views_and_maps
        payload = embed_regions(images, maps, encoder=MockImageEncoder(dim=8))
        write_embeddings(tmp_path / "emb.json", payload)
        loaded = json.loads((tmp_path / "emb.json").read_text())
        assert set(loaded) == {"dim", "records"}
        assert all(set(r) == {"view", "label", "values"} for r in loaded["records"])
