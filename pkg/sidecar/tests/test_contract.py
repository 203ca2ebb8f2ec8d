"""Sidecar contract: /embed serves unit-norm vectors of the configured
dimension, and every emitted file passes the engine's format validators
when pushed through the engine's own CLI pipeline."""
import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from splatprep.cli import main as splatprep_main
from splatprep.server import create_app

semsplat_cli = pytest.importorskip("semsplat.cli")
semsplat_formats = pytest.importorskip("semsplat.formats")


def test_embed_contract_unit_norm_configured_dim():
    for dim in (8, 512):
        client = TestClient(create_app(dim=dim))
        vectors = np.asarray(
            client.post("/embed", json={"texts": ["table", "chair"]}).json()["embeddings"]
        )
        assert vectors.shape == (2, dim)
        assert np.allclose(np.linalg.norm(vectors, axis=1), 1.0, atol=1e-5)


def test_emitted_files_pass_engine_validators(image_paths, tmp_path):
    """track -> engine associate -> embed-regions -> engine bank, end to end
    through both CLIs, with only files crossing the boundary."""
    maps_dir = tmp_path / "maps"
    voted_dir = tmp_path / "voted"
    rc = splatprep_main(
        ["track", *map(str, image_paths), "--out", str(maps_dir), "--replicates", "5"]
    )
    assert rc == 0

    replicated = sorted(maps_dir.glob("view*_rep*.png"))
    assert len(replicated) == 10
    rc = semsplat_cli.main(
        ["associate", *map(str, replicated), "--views", "2", "--out", str(voted_dir)]
    )
    assert rc == 0
    voted = sorted(voted_dir.glob("voted_view*.png"))
    assert len(voted) == 2

    emb_path = tmp_path / "embeddings.json"
    rc = splatprep_main(
        [
            "embed-regions", *map(str, image_paths),
            "--maps", *map(str, voted),
            "--out", str(emb_path), "--dim", "32",
        ]
    )
    assert rc == 0

    # cross-check: one record per present (view, label) pair, as reported by
    # the engine's own consistency accounting
    from semsplat.association import consistency_report

    report = consistency_report([semsplat_formats.read_label_map(p) for p in voted])
    presence = sum(1 for counts in report.values() for c in counts if c > 0)
    payload = json.loads(emb_path.read_text())
    assert len(payload["records"]) == presence

    bank_path = tmp_path / "scene.bank"
    rc = semsplat_cli.main(
        [
            "bank", *map(str, voted),
            "--embeddings", str(emb_path),
            "--out", str(bank_path),
        ]
    )
    assert rc == 0
    bank = semsplat_formats.read_bank(bank_path)
    assert bank.dim == 32
    assert len(bank) == len(report)
