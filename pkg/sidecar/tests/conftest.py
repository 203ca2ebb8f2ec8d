import numpy as np
import pytest
from PIL import Image


def two_view_images():
    """Two 64x48 views of a red and a green rectangle over a dark backdrop,
    shifted two pixels horizontally between views."""
    views = []
    for shift in (0, 2):
        img = np.full((48, 64, 3), 20, dtype=np.uint8)
        img[8:20, 10 + shift : 26 + shift] = (200, 40, 40)
        img[28:40, 34 + shift : 54 + shift] = (40, 200, 40)
        views.append(img)
    return views


@pytest.fixture
def image_paths(tmp_path):
    paths = []
    for v, img in enumerate(two_view_images()):
        path = tmp_path / f"view{v}.png"
        Image.fromarray(img).save(path)
        paths.append(path)
    return paths
