import numpy as np
import pytest

from semsplat.association import ReplicatedSequence, compact_labels, vote
from semsplat.bank import build_bank, label_image
from semsplat.formats import SceneBundle, assign_features
from semsplat.query import QuerySpec
from semsplat.scene import Embedding
from semsplat.synthetic import axis_camera, three_object_scene

E2E_DIM = 16
E2E_SEED = 8


def basis_embedding(i: int, dim: int = E2E_DIM) -> Embedding:
    v = np.zeros(dim)
    v[i] = 1.0
    return Embedding(v)


class E2EPipeline:
    """Three-object synthetic scene pushed through associate -> bank ->
    assign, with analytic ground truth for any axis-aligned camera."""

    def __init__(self):
        self.scene = three_object_scene()
        mk = lambda p: axis_camera(p, fx=200.0, fy=200.0, width=176, height=176)
        self.cameras = [mk((-0.05, 0.0, 0.0)), mk((0.05, 0.0, 0.0))]
        self.held_out = mk((0.0, 0.02, 0.0))

        raw_maps = [self.scene.truth_label_map(c) for c in self.cameras]
        seq = ReplicatedSequence(maps=tuple(tuple([m] * 5) for m in raw_maps))
        self.voted = vote(seq)
        self.remapped, self.table = compact_labels(self.voted)
        self.num_objects = len(self.table)

        # mutually orthogonal object embeddings, identical across views
        embeddings = {
            (view, new): basis_embedding(new - 1)
            for new in self.table.values()
            for view in (0, 1)
        }
        self.bank = build_bank(self.remapped, embeddings, seed=E2E_SEED, dim=E2E_DIM)
        self.reject_radius = 0.5 / (self.bank.lattice_m - 1)

        images = [label_image(m, self.bank) for m in self.remapped]
        cloud = self.scene.pixel_aligned_cloud(self.cameras)
        self.cloud = assign_features(cloud, self.cameras, images)

        # canon embeddings orthogonal to every object and query embedding
        self.canonical = tuple(basis_embedding(8 + i) for i in range(4))
        self.queries = [
            QuerySpec(query_embedding=basis_embedding(k - 1), canonical_embeddings=self.canonical)
            for k in range(1, self.num_objects + 1)
        ]

    def truth_classes(self, cam) -> np.ndarray:
        lut = np.zeros(65536, dtype=np.int32)
        for old, new in self.table.items():
            lut[old] = new
        return lut[self.scene.truth_label_map(cam).labels]

    def bundle(self, name: str = "e2e") -> SceneBundle:
        return SceneBundle(
            name=name,
            gaussians=self.cloud,
            cameras=self.cameras,
            label_maps=list(self.remapped),
            bank=self.bank,
            seed=E2E_SEED,
            pixel_aligned=True,
        )


@pytest.fixture(scope="session")
def e2e() -> E2EPipeline:
    return E2EPipeline()
