import cv2
import numpy as np
import pytest

from photocraft.color import Image
from photocraft.errors import IoError
from photocraft.image_io import read_image, write_png

from conftest import natural_image


def test_png_16bit_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    img = natural_image(rng, 16, 12)
    path = tmp_path / "img.png"
    write_png(img, path)
    back = read_image(path)
    assert back.data.shape == img.data.shape
    assert np.max(np.abs(back.data.astype(np.float64) - img.data.astype(np.float64))) <= 1.0 / 65535.0


def test_png_8bit_read(tmp_path):
    rgb = np.array([[[10, 20, 30], [250, 128, 0]]], dtype=np.uint8)
    path = tmp_path / "img8.png"
    cv2.imwrite(str(path), rgb[:, :, ::-1])
    img = read_image(path)
    assert img.data.shape == (1, 2, 3)
    assert img.data[0, 0, 0] == pytest.approx(10 / 255.0, abs=1e-6)
    assert img.data[0, 1, 1] == pytest.approx(128 / 255.0, abs=1e-6)


def test_jpeg_read(tmp_path):
    rng = np.random.default_rng(5)
    quantized = (natural_image(rng, 24, 24).data * 255).astype(np.uint8)
    path = tmp_path / "img.jpg"
    cv2.imwrite(str(path), quantized[:, :, ::-1])
    img = read_image(path)
    assert img.data.shape == (24, 24, 3)
    assert float(img.data.max()) <= 1.0
    assert float(img.data.min()) >= 0.0


def test_grayscale_png_read(tmp_path):
    gray = np.array([[0, 128, 255]], dtype=np.uint8)
    path = tmp_path / "gray.png"
    cv2.imwrite(str(path), gray)
    img = read_image(path)
    assert img.data.shape == (1, 3, 3)
    assert np.allclose(img.data[0, 1], 128 / 255.0, atol=1e-6)


def test_missing_file_raises(tmp_path):
    with pytest.raises(IoError):
        read_image(tmp_path / "nope.png")


def test_write_round_trip_preserves_written_bytes(tmp_path):
    rng = np.random.default_rng(9)
    img = natural_image(rng, 8, 8)
    a, b = tmp_path / "a.png", tmp_path / "b.png"
    write_png(img, a)
    write_png(img, b)
    assert a.read_bytes() == b.read_bytes()
