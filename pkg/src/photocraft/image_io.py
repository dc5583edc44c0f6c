"""PNG/JPEG image files <-> normalized float images.

PNG reads support 8- and 16-bit depth; JPEG is read-only. Written PNGs are
16-bit so reward-relevant precision survives a round trip.
"""

from __future__ import annotations

import os

import cv2
import numpy as np

from .color import Image
from .errors import IoError


def read_image(path: str | os.PathLike) -> Image:
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise IoError(f"cannot decode image: {path}")
    if raw.ndim == 2:
        raw = raw[:, :, None].repeat(3, axis=2)
    if raw.shape[2] == 4:
        raw = raw[:, :, :3]
    if raw.dtype == np.uint8:
        scale = 255.0
    elif raw.dtype == np.uint16:
        scale = 65535.0
    else:
        raise IoError(f"unsupported sample type {raw.dtype} in {path}")
    rgb = raw[:, :, ::-1].astype(np.float64) / scale
    return Image(rgb)


def write_png(img: Image, path: str | os.PathLike) -> None:
    quantized = np.round(img.data.astype(np.float64) * 65535.0).astype(np.uint16)
    bgr = quantized[:, :, ::-1]
    if not cv2.imwrite(str(path), bgr):
        raise IoError(f"cannot write PNG: {path}")
