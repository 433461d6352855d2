"""Raster input, Gaussian smoothing and Canny edges with gradient slopes.

Coordinates follow raster order: ``x`` is the column, ``y`` the row and
``y`` grows downward.  ``tau`` is ``Gy / Gx`` in that frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy import ndimage

try:
    import cv2
except ImportError:  # pragma: no cover - scipy fallback
    cv2 = None

from .errors import UnsupportedFormat

MIN_SIDE = 8
INF_GX = 1e-12

_SOBEL_DIFF = np.array([-1.0, 0.0, 1.0])
_SOBEL_SMOOTH = np.array([1.0, 2.0, 1.0])


@dataclass(frozen=True)
class GrayImage:
    """Single-channel image; ``data`` is a (height, width) array in [0, 255]."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 2:
            raise ValueError(f"GrayImage needs a 2-D array, got shape {arr.shape}")
        if arr.shape[0] < MIN_SIDE or arr.shape[1] < MIN_SIDE:
            raise ValueError(f"image must be at least {MIN_SIDE}x{MIN_SIDE}, got {arr.shape[1]}x{arr.shape[0]}")
        object.__setattr__(self, "data", arr)

    @property
    def width(self):
        return self.data.shape[1]

    @property
    def height(self):
        return self.data.shape[0]


class EdgePoint(NamedTuple):
    x: int
    y: int
    tau: float


@dataclass
class EdgeMap:
    """Array form of the edge list, in row-major order.

    The pipeline works on this rather than on a list of :class:`EdgePoint`.
    """

    xs: np.ndarray
    ys: np.ndarray
    gx: np.ndarray
    gy: np.ndarray
    shape: tuple

    def __len__(self):
        return len(self.xs)

    @property
    def tau(self):
        return slope(self.gx, self.gy)

    def points(self):
        return [EdgePoint(int(x), int(y), float(t)) for x, y, t in zip(self.xs, self.ys, self.tau)]


def slope(gx, gy):
    """``gy / gx`` with a signed infinity where ``|gx| < 1e-12``."""
    gx = np.asarray(gx, dtype=float)
    gy = np.asarray(gy, dtype=float)
    small = np.abs(gx) < INF_GX
    with np.errstate(divide="ignore", invalid="ignore"):
        out = gy / np.where(small, 1.0, gx)
    return np.where(small, np.where(gy < 0, -np.inf, np.inf), out)


# ---------------------------------------------------------------------------
# input


def to_grayscale(image) -> GrayImage:
    """Luminance conversion (0.299 R + 0.587 G + 0.114 B, rounded).

    Accepts a path, a PIL image, a :class:`GrayImage` or an array shaped
    (H, W), (H, W, 1), (H, W, 3) or (H, W, 4).
    """
    if isinstance(image, GrayImage):
        return image
    if isinstance(image, (str, Path)):
        return read_image(image)
    if hasattr(image, "mode") and hasattr(image, "size"):
        image = np.asarray(image)
    arr = np.asarray(image)
    if arr.dtype.kind not in "uif" or arr.size == 0:
        raise UnsupportedFormat(f"cannot interpret array of dtype {arr.dtype}")
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[:, :, 0]
    if arr.ndim == 2:
        return GrayImage(arr)
    if arr.ndim == 3 and arr.shape[2] in (3, 4):
        rgb = arr[:, :, :3].astype(float)
        lum = 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]
        return GrayImage(np.clip(np.floor(lum + 0.5), 0, 255).astype(np.uint8))
    raise UnsupportedFormat(f"unsupported channel layout {arr.shape}")


def read_image(path) -> GrayImage:
    """Load PNG or binary PGM/PPM from disk as grayscale."""
    from PIL import Image, UnidentifiedImageError

    path = Path(path)
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode in ("L", "RGB", "RGBA"):
                arr = np.asarray(im)
            elif im.mode in ("I", "I;16", "I;16B"):
                arr = np.asarray(im).astype(float)
                if arr.max() > 255:
                    arr = arr * (255.0 / 65535.0)
            elif im.mode in ("P", "LA", "1"):
                arr = np.asarray(im.convert("RGB"))
            else:
                raise UnsupportedFormat(f"{path}: unsupported image mode {im.mode}")
    except (UnidentifiedImageError, OSError) as exc:
        raise UnsupportedFormat(f"{path}: {exc}") from exc
    return to_grayscale(arr)


def write_image(img, path):
    """Write a grayscale image as PNG or PGM, chosen by suffix."""
    from PIL import Image

    data = img.data if isinstance(img, GrayImage) else np.asarray(img)
    arr = np.clip(np.rint(data), 0, 255).astype(np.uint8)
    path = Path(path)
    fmt = "PPM" if path.suffix.lower() in (".pgm", ".ppm", ".pnm") else None
    Image.fromarray(arr, mode="L").save(path, format=fmt)


# ---------------------------------------------------------------------------
# smoothing and Canny


def gaussian_kernel(sigma):
    radius = int(math.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=float)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def gaussian_smooth(img, sigma: float = 1.0) -> GrayImage:
    """Separable Gaussian blur, radius ceil(3 sigma), mirrored borders."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return GrayImage(_smooth(to_grayscale(img).data, sigma, np.float64))


def _smooth(data, sigma, dtype):
    k = gaussian_kernel(sigma).astype(dtype)
    data = np.asarray(data, dtype=dtype)
    if cv2 is not None:
        return cv2.sepFilter2D(data, -1, k, k, borderType=cv2.BORDER_REFLECT)
    out = ndimage.correlate1d(data, k, axis=0, mode="reflect")
    return ndimage.correlate1d(out, k, axis=1, mode="reflect")


def sobel(data):
    """Sobel derivatives along x (columns) and y (rows, downward)."""
    data = np.asarray(data)
    if data.dtype.kind != "f":
        data = data.astype(np.float64)
    diff = _SOBEL_DIFF.astype(data.dtype)
    smooth = _SOBEL_SMOOTH.astype(data.dtype)
    if cv2 is not None:
        gx = cv2.sepFilter2D(data, -1, diff, smooth, borderType=cv2.BORDER_REFLECT)
        gy = cv2.sepFilter2D(data, -1, smooth, diff, borderType=cv2.BORDER_REFLECT)
        return gx, gy
    gx = ndimage.correlate1d(data, diff, axis=1, mode="reflect")
    gx = ndimage.correlate1d(gx, smooth, axis=0, mode="reflect")
    gy = ndimage.correlate1d(data, diff, axis=0, mode="reflect")
    gy = ndimage.correlate1d(gy, smooth, axis=1, mode="reflect")
    return gx, gy


def auto_thresholds(mag, percentile=70.0, low_ratio=0.4):
    """High = given percentile of the nonzero magnitudes, low = ``low_ratio * high``."""
    nz = mag[mag > 1e-6]
    if nz.size == 0:
        return 0.0, 0.0
    high = float(np.percentile(nz, percentile))
    return low_ratio * high, high


_TAN22 = math.tan(math.radians(22.5))


def _non_max_suppression(mag, gx, gy, floor=0.0):
    """Boolean map of pixels that are gradient maxima along one of 4 directions.

    Only pixels with ``mag > floor`` are examined.
    """
    h, w = mag.shape
    pad = np.zeros((h + 2, w + 2), dtype=mag.dtype)
    pad[1:-1, 1:-1] = mag
    flat = pad.ravel()
    W = w + 2
    ys, xs = np.nonzero(mag > floor)
    p = (ys + 1) * W + (xs + 1)
    m = mag[ys, xs]
    ax = np.abs(gx[ys, xs])
    ay = np.abs(gy[ys, xs])
    same = (gx[ys, xs] * gy[ys, xs]) > 0
    # step along the gradient: horizontal, vertical or one of the diagonals
    horiz = ay <= _TAN22 * ax
    vert = ax <= _TAN22 * ay
    step = np.where(horiz, 1, np.where(vert, W, np.where(same, W + 1, W - 1)))
    keep = (m > flat[p + step]) & (m >= flat[p - step])
    out = np.zeros((h, w), dtype=bool)
    out[ys[keep], xs[keep]] = True
    return out


def _hysteresis(weak, strong):
    if cv2 is not None:
        n, labels = cv2.connectedComponents(weak.view(np.uint8), connectivity=8)
    else:
        labels, n = ndimage.label(weak, structure=np.ones((3, 3), dtype=bool))
        n += 1
    if n <= 1:
        return weak
    good = np.zeros(n, dtype=bool)
    good[labels[strong]] = True
    good[0] = False
    return good[labels]


def canny_map(img, low=None, high=None, sigma=1.0) -> EdgeMap:
    """Smooth, then Canny; thresholds default to the automatic rule."""
    gray = to_grayscale(img)
    if sigma and sigma > 0:
        smooth = _smooth(gray.data, sigma, np.float32)
    else:
        smooth = gray.data.astype(np.float32)
    gx, gy = sobel(smooth)
    mag = np.hypot(gx, gy)
    if low is None or high is None:
        auto_low, auto_high = auto_thresholds(mag)
        high = auto_high if high is None else high
        low = min(auto_low, high) if low is None else low
    weak = _non_max_suppression(mag, gx, gy, floor=max(low, 1e-6) * (1 - 1e-6))
    weak &= mag >= low
    strong = weak & (mag >= high)
    edges = _hysteresis(weak, strong)
    ys, xs = np.nonzero(edges)
    return EdgeMap(
        xs.astype(np.int32), ys.astype(np.int32),
        gx[ys, xs].astype(float), gy[ys, xs].astype(float), gray.data.shape,
    )


def canny_edges(img, low: float, high: float) -> list[EdgePoint]:
    """Canny on an already smoothed image; one :class:`EdgePoint` per pixel."""
    if not 0 < low < high:
        raise ValueError("need 0 < low < high")
    return canny_map(img, low, high, sigma=0).points()
