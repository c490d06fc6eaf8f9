# -*- coding:utf-8 -*-
"""
素描预处理 Deterministic image-to-sketch operators

grayscale → separable Gaussian blur → extended difference-of-Gaussians
(XDoG).  Every operator is a pure function of its input pixels and
parameters.
"""
import csv
import math
import os
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Tuple, Type, Union

import numpy as np
from loguru import logger
from PIL import Image, UnidentifiedImageError

from .constants import (
    DEFAULT_IMAGE_SIZE, IMAGE_SUFFIXES, LUMA_WEIGHTS, MANIFEST_COLUMNS, SKETCH_EPSILON, SKETCH_K,
    SKETCH_MANIFEST_FILE, SKETCH_PHI, SKETCH_SIGMA, SKETCH_TAU
)
from .exceptions import ConfigError, EmptyDataset, FormatError
from .field import field
from .record import Record
from .record_config import RecordConfig
from .types import SketchMode, optional

"""输出的白色"""
WHITE = 255


class ImageBuffer:
    """8-bit raster, pixels stored row-major as ``H×W×C`` with C ∈ {1, 3}"""

    pixels: np.ndarray

    __slots__ = ('pixels',)

    def __init__(self, pixels):
        pixels = np.asarray(pixels)
        if pixels.ndim == 2:
            pixels = pixels[:, :, np.newaxis]
        if pixels.ndim != 3 or pixels.shape[2] not in (1, 3):
            raise FormatError('an image needs 1 or 3 channels, got shape {shape}', shape=pixels.shape)
        if pixels.shape[0] < 1 or pixels.shape[1] < 1:
            raise FormatError('image dimensions must be positive, got {shape}', shape=pixels.shape)
        if pixels.dtype != np.uint8:
            if np.any(pixels < 0) or np.any(pixels > 255) or np.any(pixels != np.floor(pixels)):
                raise FormatError('pixel values must be integers in [0, 255]')
            pixels = pixels.astype(np.uint8)
        self.pixels = np.ascontiguousarray(pixels)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]

    @property
    def plane(self) -> np.ndarray:
        """``H×W`` view of a single-channel image"""
        if self.channels != 1:
            raise FormatError('expected a single-channel image, got {channels} channels', channels=self.channels)
        return self.pixels[:, :, 0]

    def to_bytes(self) -> bytes:
        return self.pixels.tobytes()

    def to_pil(self) -> Image.Image:
        if self.channels == 1:
            return Image.fromarray(self.plane, mode='L')
        return Image.fromarray(self.pixels, mode='RGB')

    @classmethod
    def from_pil(cls, image: Image.Image) -> 'ImageBuffer':
        if image.mode not in ('L', 'RGB'):
            image = image.convert('L' if image.mode in ('1', 'I', 'F', 'I;16') else 'RGB')
        return cls(np.asarray(image, dtype=np.uint8))

    def __eq__(self, other):
        if not isinstance(other, ImageBuffer):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and np.array_equal(self.pixels, other.pixels)

    def __repr__(self):
        return f'ImageBuffer(width={self.width}, height={self.height}, channels={self.channels})'


class SketchParams(Record):
    """XDoG 参数"""

    record_config = RecordConfig(frozen=True, extra='forbid')

    sigma: float = field(default=SKETCH_SIGMA, gt=0.0, description='inner Gaussian scale in pixels')

    k: float = field(default=SKETCH_K, gt=1.0, description='ratio of the outer to the inner scale')

    tau: float = field(default=SKETCH_TAU, gt=0.0, le=1.0, description='weight of the outer Gaussian')

    epsilon: float = field(default=SKETCH_EPSILON, ge=0.0, le=1.0, description='white threshold')

    phi: float = field(default=SKETCH_PHI, gt=0.0, description='sharpness of the soft threshold')


def _round_half_up(values: np.ndarray) -> np.ndarray:
    return np.floor(values + 0.5)


def to_grayscale(img: ImageBuffer) -> ImageBuffer:
    """luma = round-half-up(0.299R + 0.587G + 0.114B); single-channel input is returned as is"""
    if img.channels == 1:
        return img
    if img.channels != 3:
        raise FormatError('cannot convert a {channels}-channel image to grayscale', channels=img.channels)
    rgb = img.pixels.astype(np.float64)
    luma = rgb @ np.asarray(LUMA_WEIGHTS, dtype=np.float64)
    return ImageBuffer(np.clip(_round_half_up(luma), 0, 255).astype(np.uint8))


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 1-D kernel of radius ⌈3σ⌉."""
    if not sigma > 0:
        raise ConfigError('sigma must be positive, got {sigma}', sigma=sigma)
    radius = int(math.ceil(3.0 * sigma))
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-0.5 * (offsets / sigma) ** 2)
    return kernel / kernel.sum()


def _convolve_rows(plane: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    radius = kernel.size // 2
    padded = np.pad(plane, ((0, 0), (radius, radius)), mode='edge')
    width = plane.shape[1]
    out = np.zeros_like(plane)
    for offset, weight in enumerate(kernel):
        out += weight * padded[:, offset:offset + width]
    return out


def gaussian_blur(img: Union[ImageBuffer, np.ndarray], sigma: float) -> np.ndarray:
    """Separable Gaussian blur with edge clamping; returns a float64 ``H×W`` plane.

    An ``ImageBuffer`` is blurred on its grayscale plane.
    """
    if isinstance(img, ImageBuffer):
        plane = to_grayscale(img).plane.astype(np.float64)
    else:
        plane = np.asarray(img, dtype=np.float64)
        if plane.ndim != 2:
            raise FormatError('expected a 2-D plane, got shape {shape}', shape=plane.shape)
    kernel = gaussian_kernel(sigma)
    horizontal = _convolve_rows(plane, kernel)
    return _convolve_rows(horizontal.T, kernel).T


def xdog_response(img: ImageBuffer, params: SketchParams) -> np.ndarray:
    """D = blur(u, σ) − τ·blur(u, kσ) on u = gray/255, divided by max(D) when that is positive"""
    u = to_grayscale(img).plane.astype(np.float64) / 255.0
    response = gaussian_blur(u, params.sigma) - params.tau * gaussian_blur(u, params.k * params.sigma)
    peak = response.max()
    if peak > 0:
        response = response / peak
    return response


def xdog_sketch(img: ImageBuffer, params: optional[SketchParams] = None) -> ImageBuffer:
    """White where D ≥ ε, otherwise round(255·(1 + tanh(φ(D − ε)))/2).

    A plane without spatial variation has no edges and comes out all white.
    """
    params = params or SketchParams()
    gray = to_grayscale(img)
    if np.ptp(gray.plane) == 0:
        return ImageBuffer(np.full(gray.plane.shape, WHITE, dtype=np.uint8))
    response = xdog_response(gray, params)
    soft = _round_half_up(255.0 * (1.0 + np.tanh(params.phi * (response - params.epsilon))) / 2.0)
    out = np.where(response >= params.epsilon, WHITE, soft)
    return ImageBuffer(np.clip(out, 0, WHITE).astype(np.uint8))


class SketchOperator(ABC):
    """预处理算子 S"""

    operator_name: str

    def __init__(self, params: optional[SketchParams] = None):
        self.params = params or SketchParams()

    @property
    def name(self) -> str:
        return self.operator_name

    @abstractmethod
    def apply(self, img: ImageBuffer) -> ImageBuffer: ...

    def __call__(self, img: ImageBuffer) -> ImageBuffer:
        return self.apply(img)

    def __repr__(self):
        return f'{self.__class__.__name__}(name={self.name!r})'


class OriginalOperator(SketchOperator):

    operator_name = 'original'

    def apply(self, img: ImageBuffer) -> ImageBuffer:
        return img


class GrayscaleOperator(SketchOperator):

    operator_name = 'grayscale'

    def apply(self, img: ImageBuffer) -> ImageBuffer:
        return to_grayscale(img)


class XdogOperator(SketchOperator):

    operator_name = 'sketch'

    def apply(self, img: ImageBuffer) -> ImageBuffer:
        return xdog_sketch(img, self.params)


SKETCH_OPERATORS: Dict[str, Type[SketchOperator]] = {
    OriginalOperator.operator_name: OriginalOperator,
    GrayscaleOperator.operator_name: GrayscaleOperator,
    XdogOperator.operator_name: XdogOperator,
}


def matching_operator(mode: str, params: optional[SketchParams] = None) -> SketchOperator:
    """匹配算子"""
    try:
        return SKETCH_OPERATORS[mode](params)
    except KeyError:
        raise ConfigError("unknown sketch mode '{mode}', expected one of {modes}",
                          mode=mode, modes=sorted(SKETCH_OPERATORS))


def load_image(path: str) -> ImageBuffer:
    try:
        with Image.open(path) as image:
            image.load()
            return ImageBuffer.from_pil(image)
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as e:
        raise FormatError('cannot decode {path}: {reason}', path=path, reason=str(e))


def save_png(img: ImageBuffer, path: str):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    img.to_pil().save(path, format='PNG')


def image_features(img: ImageBuffer, size: int = DEFAULT_IMAGE_SIZE) -> np.ndarray:
    """Bilinear downscale to ``size×size``, flattened row-major and scaled to [0, 1]."""
    if size < 1:
        raise ConfigError('image size must be positive, got {size}', size=size)
    resized = img.to_pil().resize((size, size), resample=Image.BILINEAR)
    return np.asarray(resized, dtype=np.float64).reshape(-1) / 255.0


class ManifestRow(Record):
    """清单中的一行"""

    record_config = RecordConfig(frozen=True)

    input: str
    output: optional[str] = None
    mode: str
    status: str


class SketchManifest(Record):

    rows: List[ManifestRow] = field(default_factory=list)

    """解码失败等非致命问题"""
    warnings: List[str] = field(default_factory=list)

    @property
    def converted(self) -> int:
        return sum(1 for row in self.rows if row.status == 'ok')

    @property
    def failed(self) -> int:
        return sum(1 for row in self.rows if row.status == 'failed')

    def write_csv(self, path: str, constants: optional[Dict[str, Any]] = None):
        with open(path, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f)
            constants = constants or {}
            writer.writerow(list(MANIFEST_COLUMNS) + list(constants))
            for row in self.rows:
                writer.writerow([row.input, row.output or '', row.mode, row.status] + list(constants.values()))


def _collect_images(in_dir: str) -> List[str]:
    """image paths relative to ``in_dir``, sorted; other files are skipped with a warning"""
    found = []
    for root, dirs, files in os.walk(in_dir):
        dirs.sort()
        for name in sorted(files):
            relative = os.path.relpath(os.path.join(root, name), in_dir).replace(os.sep, '/')
            if os.path.splitext(name)[1].lower() in IMAGE_SUFFIXES:
                found.append(relative)
            else:
                logger.warning('skipping non-image file {}', relative)
    return sorted(found)


def sketchify_dataset(in_dir: str, out_dir: str, params: optional[SketchParams] = None,
                      mode: SketchMode = 'sketch', workers: int = 1,
                      stamp: optional[Dict[str, Any]] = None) -> SketchManifest:
    """Convert every PNG/PPM under ``in_dir`` into a PNG under ``out_dir``, mirroring the tree.

    Writes ``manifest.csv`` (``input,output,mode,status`` plus one column per ``stamp`` key, sorted by input
    path) into ``out_dir``.
    """
    if mode not in ('grayscale', 'sketch'):
        raise ConfigError("sketchify mode must be 'grayscale' or 'sketch', got '{mode}'", mode=mode)
    if not os.path.isdir(in_dir):
        raise EmptyDataset(in_dir)
    operator = matching_operator(mode, params)
    images = _collect_images(in_dir)
    if not images:
        raise EmptyDataset(in_dir)
    os.makedirs(out_dir, exist_ok=True)

    def convert(relative: str) -> Tuple[ManifestRow, optional[str]]:
        output = os.path.splitext(relative)[0] + '.png'
        try:
            img = load_image(os.path.join(in_dir, relative))
        except FormatError as e:
            logger.warning('{}', e.message())
            return ManifestRow(input=relative, output=None, mode=mode, status='failed'), e.message()
        save_png(operator.apply(img), os.path.join(out_dir, output))
        return ManifestRow(input=relative, output=output, mode=mode, status='ok'), None

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(convert, images))
    else:
        results = [convert(relative) for relative in images]
    manifest = SketchManifest(rows=[row for row, _ in results],
                              warnings=[warning for _, warning in results if warning])
    manifest.write_csv(os.path.join(out_dir, SKETCH_MANIFEST_FILE), stamp)
    logger.info('{}: {} converted, {} failed', mode, manifest.converted, manifest.failed)
    return manifest
