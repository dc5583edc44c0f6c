"""Color-space conversions, white-point estimation, and correlated color temperature."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AllBlackImage, OutOfLocus


@dataclass(frozen=True, eq=False)
class Chromaticity:
    """CIE 1931 (x, y) chromaticity coordinate."""

    x: float
    y: float

    def __post_init__(self):
        if not (self.x > 0.0 and self.y > 0.0 and self.x + self.y < 1.0):
            raise ValueError(f"invalid chromaticity ({self.x}, {self.y})")

    def __eq__(self, other):
        return isinstance(other, Chromaticity) and (self.x, self.y) == (other.x, other.y)


D65 = Chromaticity(0.3127, 0.3290)


@dataclass(frozen=True, eq=False)
class Image:
    """H x W x 3 raster of nonlinear sRGB values in [0, 1], float32, immutable.

    Channel values are clamped on construction, so every public operation
    returns an in-range image.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"image data must have shape (H, W, 3), got {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        if not np.all(np.isfinite(arr)):
            raise ValueError("image data must be finite")
        arr = np.clip(arr.astype(np.float32), 0.0, 1.0)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @classmethod
    def uniform(cls, width: int, height: int, rgb) -> "Image":
        arr = np.empty((height, width, 3), dtype=np.float32)
        arr[:] = np.asarray(rgb, dtype=np.float32)
        return cls(arr)


@dataclass(frozen=True, eq=False)
class LabImage:
    """H x W x 3 raster of CIE L*a*b* values, float64 working precision."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"lab data must have shape (H, W, 3), got {arr.shape}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


def srgb_to_linear(c):
    """sRGB electro-optical transfer: encoded [0,1] to linear light [0,1]."""
    arr = np.clip(np.asarray(c, dtype=np.float64), 0.0, 1.0)
    out = np.where(arr <= 0.04045, arr / 12.92, ((arr + 0.055) / 1.055) ** 2.4)
    return float(out) if out.ndim == 0 else out


def linear_to_srgb(v):
    """Inverse of srgb_to_linear; input clamped to [0,1]."""
    arr = np.clip(np.asarray(v, dtype=np.float64), 0.0, 1.0)
    out = np.where(arr <= 0.0031308, arr * 12.92, 1.055 * arr ** (1.0 / 2.4) - 0.055)
    return float(out) if out.ndim == 0 else out


def whitepoint_xyz(c: Chromaticity) -> np.ndarray:
    """XYZ tristimulus of a white point, normalized to Y = 1."""
    return np.array([c.x / c.y, 1.0, (1.0 - c.x - c.y) / c.y], dtype=np.float64)


def _rgb_xyz_matrix() -> np.ndarray:
    # Derived from the sRGB primaries and the D65 white so that (1,1,1)
    # maps exactly onto the white point used for Lab normalization.
    primaries = ((0.64, 0.33), (0.30, 0.60), (0.15, 0.06))
    p = np.array(
        [
            [px / py for px, py in primaries],
            [1.0, 1.0, 1.0],
            [(1.0 - px - py) / py for px, py in primaries],
        ],
        dtype=np.float64,
    )
    scale = np.linalg.solve(p, whitepoint_xyz(D65))
    return p * scale


RGB_TO_XYZ = _rgb_xyz_matrix()
XYZ_TO_RGB = np.linalg.inv(RGB_TO_XYZ)

_LAB_DELTA = 6.0 / 29.0


def _lab_f(t: np.ndarray) -> np.ndarray:
    cube = _LAB_DELTA**3
    return np.where(t > cube, np.cbrt(t), t / (3.0 * _LAB_DELTA**2) + 4.0 / 29.0)


def _lab_f_inv(f: np.ndarray) -> np.ndarray:
    return np.where(f > _LAB_DELTA, f**3, 3.0 * _LAB_DELTA**2 * (f - 4.0 / 29.0))


def rgb_to_lab(img: Image, white_point: Chromaticity = D65) -> LabImage:
    """Per-pixel linearize -> XYZ (sRGB primaries) -> L*a*b* relative to white_point."""
    lin = srgb_to_linear(img.data)
    xyz = lin @ RGB_TO_XYZ.T
    f = _lab_f(xyz / whitepoint_xyz(white_point))
    lab = np.empty_like(f)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return LabImage(lab)


def lab_to_rgb(lab: LabImage, white_point: Chromaticity = D65) -> Image:
    """Inverse of rgb_to_lab; out-of-gamut results are clamped per channel."""
    fy = (lab.data[..., 0] + 16.0) / 116.0
    fx = fy + lab.data[..., 1] / 500.0
    fz = fy - lab.data[..., 2] / 200.0
    xyz = _lab_f_inv(np.stack([fx, fy, fz], axis=-1)) * whitepoint_xyz(white_point)
    lin = xyz @ XYZ_TO_RGB.T
    return Image(linear_to_srgb(lin))


def estimate_white_chromaticity(img: Image) -> Chromaticity:
    """Gray-world white estimate: mean linear RGB mapped to XYZ, normalized to (x, y)."""
    mean_lin = srgb_to_linear(img.data).reshape(-1, 3).mean(axis=0)
    xyz = RGB_TO_XYZ @ mean_lin
    if xyz[1] < 1e-6:
        raise AllBlackImage("mean luminance below 1e-6")
    total = float(xyz.sum())
    return Chromaticity(float(xyz[0]) / total, float(xyz[1]) / total)


def chromaticity_to_cct(c: Chromaticity) -> float:
    """McCamy cubic CCT estimate in kelvin.

    Valid near the 1500-40000 K locus neighborhood; chromaticities at or
    below the singular line y = 0.1858, or whose estimate falls outside
    [1500, 40000] K, raise OutOfLocus.
    """
    den = c.y - 0.1858
    if den <= 1e-6:
        raise OutOfLocus(f"chromaticity ({c.x}, {c.y}) below the CCT locus region")
    n = (c.x - 0.3320) / den
    cct = -449.0 * n**3 + 3525.0 * n**2 - 6823.3 * n + 5520.33
    if not 1500.0 <= cct <= 40000.0:
        raise OutOfLocus(f"estimated CCT {cct:.0f} K outside [1500, 40000]")
    return cct


def kelvin_to_mired(kelvin: float) -> float:
    return 1e6 / kelvin


def mired_to_kelvin(mired: float) -> float:
    return 1e6 / mired


def planckian_chromaticity(kelvin: float) -> Chromaticity:
    """Cubic-spline approximation of the Planckian locus, valid 1667-25000 K."""
    if not 1667.0 <= kelvin <= 25000.0:
        raise OutOfLocus(f"{kelvin:.0f} K outside the approximated locus range")
    t = 1.0 / kelvin
    if kelvin <= 4000.0:
        x = -0.2661239e9 * t**3 - 0.2343589e6 * t**2 + 0.8776956e3 * t + 0.179910
    else:
        x = -3.0258469e9 * t**3 + 2.1070379e6 * t**2 + 0.2226347e3 * t + 0.240390
    if kelvin <= 2222.0:
        y = -1.1063814 * x**3 - 1.34811020 * x**2 + 2.18555832 * x - 0.20219683
    elif kelvin <= 4000.0:
        y = -0.9549476 * x**3 - 1.37418593 * x**2 + 2.09137015 * x - 0.16748867
    else:
        y = 3.0817580 * x**3 - 5.8733867 * x**2 + 3.75112997 * x - 0.37001483
    return Chromaticity(x, y)


_BRADFORD = np.array(
    [
        [0.8951, 0.2664, -0.1614],
        [-0.7502, 1.7135, 0.0367],
        [0.0389, -0.0685, 1.0296],
    ],
    dtype=np.float64,
)


def bradford_adaptation(source: Chromaticity, target: Chromaticity) -> np.ndarray:
    """3x3 matrix mapping linear sRGB under `source` white to linear sRGB under `target`."""
    rho_s = _BRADFORD @ whitepoint_xyz(source)
    rho_t = _BRADFORD @ whitepoint_xyz(target)
    adapt_xyz = np.linalg.inv(_BRADFORD) @ np.diag(rho_t / rho_s) @ _BRADFORD
    return XYZ_TO_RGB @ adapt_xyz @ RGB_TO_XYZ
