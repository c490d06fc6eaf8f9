# -*- coding:utf-8 -*-
import csv
import os

import numpy as np
import pytest
from PIL import Image

from fairsketch.metrics import PredictionRecord


def make_log(rng: np.random.Generator, n: int, num_classes: int = 2, with_score: bool = False):
    y_true = rng.integers(0, num_classes, size=n)
    y_pred = rng.integers(0, num_classes, size=n)
    z = rng.integers(0, 2, size=n)
    records = []
    for i in range(n):
        score = float(rng.random()) if with_score else None
        records.append(PredictionRecord(id=f'r{i}', y_true=int(y_true[i]), y_pred=int(y_pred[i]),
                                        score=score, z=int(z[i])))
    return records


@pytest.fixture
def log_factory():
    return make_log


@pytest.fixture
def small_log():
    """8 hand-checked binary records, four per group"""
    rows = [
        # id, y_true, y_pred, z
        ('a', 1, 1, 1), ('b', 1, 0, 1), ('c', 0, 1, 1), ('d', 0, 0, 1),
        ('e', 1, 1, 0), ('f', 1, 1, 0), ('g', 0, 0, 0), ('h', 0, 1, 0),
    ]
    return [PredictionRecord(id=i, y_true=t, y_pred=p, z=z) for i, t, p, z in rows]


def write_png_corpus(root: str, count: int = 60, size: int = 16, seed: int = 0) -> str:
    """RGB squares plus ``attributes.csv`` (filename,label,group); labels balanced within each group."""
    rng = np.random.default_rng(seed)
    image_dir = os.path.join(root, 'images')
    os.makedirs(image_dir, exist_ok=True)
    rows = []
    for i in range(count):
        group = i % 2
        label = (i // 2) % 2
        pixels = rng.integers(0, 256, size=(size, size, 3), dtype=np.uint8)
        # label-dependent bright block, group-dependent tint
        if label:
            pixels[: size // 2, : size // 2] = 230
        pixels[..., 0] = np.clip(pixels[..., 0].astype(int) + 20 * group, 0, 255)
        name = f'img{i:03d}.png'
        Image.fromarray(pixels, mode='RGB').save(os.path.join(image_dir, name))
        rows.append((name, 1 if label else -1, group))
    with open(os.path.join(image_dir, 'attributes.csv'), 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(['filename', 'label', 'group'])
        writer.writerows(rows)
    return image_dir


@pytest.fixture
def png_corpus(tmp_path):
    return write_png_corpus(str(tmp_path))
