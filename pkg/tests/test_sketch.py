# -*- coding:utf-8 -*-
import csv
import math
import os

import numpy as np
import pytest
from PIL import Image

from fairsketch import (
    ConfigError, EmptyDataset, FormatError, ImageBuffer, SketchParams, ValidationError, gaussian_blur,
    image_features, load_image, matching_operator, save_png, sketchify_dataset, to_grayscale, xdog_sketch
)
from fairsketch.sketch import gaussian_kernel, xdog_response


def random_rgb(seed, height=20, width=24):
    rng = np.random.default_rng(seed)
    return ImageBuffer(rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8))


def step_edge(size=32):
    pixels = np.zeros((size, size), dtype=np.uint8)
    pixels[:, size // 2:] = 255
    return ImageBuffer(pixels)


def scalar_blur(plane, sigma):
    kernel = gaussian_kernel(sigma)
    radius = kernel.size // 2
    height, width = len(plane), len(plane[0])
    out = [[0.0] * width for _ in range(height)]
    for y in range(height):
        for x in range(width):
            total = 0.0
            for i in range(kernel.size):
                for j in range(kernel.size):
                    yy = min(max(y + i - radius, 0), height - 1)
                    xx = min(max(x + j - radius, 0), width - 1)
                    total += kernel[i] * kernel[j] * plane[yy][xx]
            out[y][x] = total
    return out


def scalar_xdog(img, params):
    """pixel-by-pixel reference of the sketch operator"""
    u = [[value / 255.0 for value in row] for row in to_grayscale(img).plane.tolist()]
    narrow, wide = scalar_blur(u, params.sigma), scalar_blur(u, params.k * params.sigma)
    response = [[a - params.tau * b for a, b in zip(ra, rb)] for ra, rb in zip(narrow, wide)]
    peak = max(max(row) for row in response)
    out = []
    for row in response:
        line = []
        for d in row:
            d = d / peak if peak > 0 else d
            if d >= params.epsilon:
                line.append(255)
            else:
                line.append(int(math.floor(255.0 * (1.0 + math.tanh(params.phi * (d - params.epsilon))) / 2.0 + 0.5)))
        out.append(line)
    return np.array(out)


class TestImageBuffer:

    def test_channels(self):
        assert ImageBuffer(np.zeros((2, 3), dtype=np.uint8)).channels == 1
        assert len(random_rgb(0).to_bytes()) == 20 * 24 * 3
        with pytest.raises(FormatError):
            ImageBuffer(np.zeros((2, 3, 4), dtype=np.uint8))
        with pytest.raises(FormatError):
            ImageBuffer(np.zeros((0, 3), dtype=np.uint8))


class TestGrayscale:

    def test_luma_rounding(self):
        img = ImageBuffer(np.array([[[255, 0, 0], [0, 255, 0], [0, 0, 255], [10, 20, 30]]], dtype=np.uint8))
        # 76.245, 149.685, 29.07, 18.15
        assert to_grayscale(img).plane.tolist() == [[76, 150, 29, 18]]

    def test_idempotent(self):
        gray = to_grayscale(random_rgb(1))
        assert to_grayscale(gray) == gray
        replicated = ImageBuffer(np.repeat(gray.pixels, 3, axis=2))
        assert to_grayscale(replicated) == gray


class TestBlur:

    @pytest.mark.parametrize('sigma', [0.3, 1.0, 1.6, 2.5, 7.0])
    def test_kernel_normalized(self, sigma):
        kernel = gaussian_kernel(sigma)
        assert abs(kernel.sum() - 1.0) <= 1e-9
        assert kernel.size == 2 * int(np.ceil(3 * sigma)) + 1
        assert np.allclose(kernel, kernel[::-1])

    def test_constant_invariance(self):
        plane = np.full((9, 13), 0.37)
        assert np.all(np.abs(gaussian_blur(plane, 2.0) - 0.37) <= 1e-9)

    def test_rejects_bad_sigma(self):
        with pytest.raises(ConfigError):
            gaussian_blur(np.zeros((3, 3)), 0.0)

    def test_impulse_response(self):
        impulse = np.zeros((15, 15))
        impulse[7, 7] = 1.0
        kernel = gaussian_kernel(1.0)
        blurred = gaussian_blur(impulse, 1.0)
        assert np.allclose(blurred[4:11, 4:11], np.outer(kernel, kernel), atol=1e-12)
        assert np.allclose(blurred[7, 4:11] / kernel[3], kernel, atol=1e-12)

    def test_image_input(self):
        blurred = gaussian_blur(step_edge(), 1.0)
        assert blurred.shape == (32, 32)
        assert blurred[:, 0].max() < 1e-9 and blurred[:, -1].min() > 255 - 1e-9


class TestXdog:

    def test_constant_image_is_white(self):
        flat = ImageBuffer(np.full((10, 10, 3), 90, dtype=np.uint8))
        assert np.all(xdog_sketch(flat).plane == 255)

    def test_step_edge(self):
        sketch = xdog_sketch(step_edge()).plane
        near = sketch[:, 12:20]
        far = np.concatenate([sketch[:, :4], sketch[:, -4:]], axis=1)
        assert near.min() < far.min()
        assert np.all(sketch[:, -4:] == 255)

    def test_matches_scalar_reference(self):
        params = SketchParams()
        for img in (step_edge(16), random_rgb(4, height=10, width=12)):
            sketch = xdog_sketch(img, params).plane.astype(int)
            assert np.abs(sketch - scalar_xdog(img, params)).max() <= 1

    def test_response_scaled_to_unit_peak(self):
        params = SketchParams()
        for img in (step_edge(), random_rgb(3)):
            response = xdog_response(img, params)
            assert response.max() == pytest.approx(1.0)
        # 平坦的亮区在缩放后越过 ε
        response = xdog_response(step_edge(), params)
        assert np.all(response[:, -4:] >= params.epsilon)

    def test_colour_invariance(self):
        for seed in range(5):
            colour = random_rgb(seed)
            gray = to_grayscale(colour)
            replicated = ImageBuffer(np.repeat(gray.pixels, 3, axis=2))
            assert xdog_sketch(colour) == xdog_sketch(replicated)

    def test_deterministic_range(self):
        img = random_rgb(8)
        params = SketchParams(sigma=0.8, k=2.0, tau=0.95, epsilon=0.05, phi=20.0)
        first = xdog_sketch(img, params)
        assert first == xdog_sketch(img, params)
        assert first.channels == 1
        assert first.pixels.dtype == np.uint8

    def test_params_validated(self):
        with pytest.raises(ValidationError):
            SketchParams(k=1.0)
        with pytest.raises(ValidationError):
            SketchParams(tau=1.5)
        with pytest.raises(ValidationError):
            SketchParams(blur=3)


class TestOperators:

    def test_registry(self):
        img = random_rgb(2)
        assert matching_operator('original').apply(img) is img
        assert matching_operator('grayscale')(img) == to_grayscale(img)
        assert matching_operator('sketch', SketchParams()).name == 'sketch'
        with pytest.raises(ConfigError):
            matching_operator('cartoon')

    def test_features(self):
        gray = to_grayscale(random_rgb(3))
        features = image_features(gray, size=8)
        assert features.shape == (64,)
        assert features.min() >= 0.0 and features.max() <= 1.0
        assert image_features(random_rgb(3), size=8).shape == (192,)


class TestSketchifyDataset:

    def test_mirrors_tree(self, tmp_path):
        src = tmp_path / 'in'
        (src / 'sub').mkdir(parents=True)
        save_png(random_rgb(0), str(src / 'b.png'))
        save_png(random_rgb(1), str(src / 'sub' / 'a.png'))
        Image.fromarray(random_rgb(2).pixels).save(str(src / 'c.ppm'))
        (src / 'notes.txt').write_text('not an image')
        (src / 'broken.png').write_bytes(b'\x89PNG garbage')

        manifest = sketchify_dataset(str(src), str(tmp_path / 'out'), workers=2)
        assert manifest.converted == 3
        assert manifest.failed == 1
        assert len(manifest.warnings) == 1
        assert load_image(str(tmp_path / 'out' / 'sub' / 'a.png')).channels == 1
        assert os.path.exists(str(tmp_path / 'out' / 'c.png'))

        with open(str(tmp_path / 'out' / 'manifest.csv'), newline='') as f:
            rows = list(csv.reader(f))
        assert rows[0] == ['input', 'output', 'mode', 'status']
        assert [row[0] for row in rows[1:]] == ['b.png', 'broken.png', 'c.ppm', 'sub/a.png']
        assert rows[2] == ['broken.png', '', 'sketch', 'failed']

    def test_stamp_columns(self, tmp_path):
        src = tmp_path / 'in'
        src.mkdir()
        save_png(random_rgb(0), str(src / 'a.png'))
        sketchify_dataset(str(src), str(tmp_path / 'out'), mode='grayscale',
                          stamp={'config_hash': 'abc123', 'seed': 5})
        with open(str(tmp_path / 'out' / 'manifest.csv'), newline='') as f:
            rows = list(csv.reader(f))
        assert rows == [['input', 'output', 'mode', 'status', 'config_hash', 'seed'],
                        ['a.png', 'a.png', 'grayscale', 'ok', 'abc123', '5']]

    def test_empty_directory(self, tmp_path):
        (tmp_path / 'empty').mkdir()
        (tmp_path / 'empty' / 'readme.md').write_text('x')
        with pytest.raises(EmptyDataset):
            sketchify_dataset(str(tmp_path / 'empty'), str(tmp_path / 'out'))

    def test_grayscale_mode(self, tmp_path):
        save_png(random_rgb(5), str(tmp_path / 'in' / 'x.png'))
        sketchify_dataset(str(tmp_path / 'in'), str(tmp_path / 'out'), mode='grayscale')
        assert load_image(str(tmp_path / 'out' / 'x.png')) == to_grayscale(random_rgb(5))
