# -*- coding:utf-8 -*-
"""
损失函数 Losses with analytic gradients w.r.t. the predicted probabilities

``total = CE + λ·(|soft SPD| − spd_ideal)²`` where soft SPD is the gap in
mean positive-class probability between the protected and the unprotected
members of one mini-batch.
"""
from typing import Dict, Tuple

import numpy as np

from .constants import PROTECTED, UNPROTECTED, DEFAULT_LAMBDA
from .exceptions import MissingGroupInBatch, ShapeError
from .field import field
from .globals import GlobalSetting
from .record import Record
from .record_config import RecordConfig
from .types import optional

"""多分类行和容差"""
SIMPLEX_TOL = 1e-9


class LossWeights(Record):
    """公平损失权重"""

    record_config = RecordConfig(frozen=True, extra='forbid')

    """λ, written ``lambda`` in config documents"""
    lam: float = field(default=DEFAULT_LAMBDA, alias='lambda', ge=0.0,
                       description='weight of the fairness term')

    spd_ideal: float = field(default=0.0, ge=0.0, le=1.0, description='target |SPD| of the penalty')

    """多分类时惩罚作用的类别"""
    positive_class: int = field(default=1, ge=0)


class BatchPrediction:
    """一个小批次的预测概率, 标签与群体

    ``probs`` is ``(B,)`` positive-class probabilities for a sigmoid head or
    ``(B, K)`` rows on the simplex for a softmax head.
    """

    probs: np.ndarray
    labels: np.ndarray
    z: np.ndarray

    __slots__ = ('probs', 'labels', 'z')

    def __init__(self, probs, labels, z):
        self.probs = np.asarray(probs, dtype=np.float64)
        self.labels = np.asarray(labels)
        self.z = np.asarray(z)
        self._check()

    def _check(self):
        probs = self.probs
        if probs.ndim not in (1, 2):
            raise ShapeError('probs must be (B,) or (B, K), got shape {shape}', shape=probs.shape)
        batch = probs.shape[0]
        if batch < 1:
            raise ShapeError('a batch needs at least one example')
        if self.labels.shape != (batch,) or self.z.shape != (batch,):
            raise ShapeError('labels {labels} and z {z} must both have shape ({batch},)',
                             labels=self.labels.shape, z=self.z.shape, batch=batch)
        if not np.all(np.isfinite(probs)) or probs.min() < 0.0 or probs.max() > 1.0:
            raise ShapeError('probabilities must lie in [0, 1]')
        if not np.all(np.isin(self.z, (UNPROTECTED, PROTECTED))):
            raise ShapeError('z entries must be 0 or 1')
        if probs.ndim == 2:
            if np.any(np.abs(probs.sum(axis=1) - 1.0) > SIMPLEX_TOL):
                raise ShapeError('multiclass probability rows must sum to 1')
        classes = self.num_classes
        if np.any(self.labels < 0) or np.any(self.labels >= classes) or np.any(self.labels != np.floor(self.labels)):
            raise ShapeError('labels must be class indices below {classes}', classes=classes)
        self.labels = self.labels.astype(np.int64)

    @property
    def size(self) -> int:
        return self.probs.shape[0]

    @property
    def is_binary(self) -> bool:
        return self.probs.ndim == 1

    @property
    def num_classes(self) -> int:
        return 2 if self.is_binary else self.probs.shape[1]

    def positive_probs(self, positive_class: int = 1) -> np.ndarray:
        if self.is_binary:
            return self.probs if positive_class == 1 else 1.0 - self.probs
        return self.probs[:, positive_class]


class LossValue:
    """损失值与梯度"""

    value: float
    grad_probs: np.ndarray

    """命名分量: ce, fair, weighted_fair"""
    parts: Dict[str, float]

    __slots__ = ('value', 'grad_probs', 'parts')

    def __init__(self, value: float, grad_probs: np.ndarray, parts: optional[Dict[str, float]] = None):
        self.value = float(value)
        self.grad_probs = grad_probs
        self.parts = dict(parts or {})

    def __repr__(self):
        return f'LossValue(value={self.value!r}, parts={self.parts!r})'


def cross_entropy_loss(batch: BatchPrediction) -> LossValue:
    """−(1/B) Σ log p(true class), probabilities clamped below at ``PROB_EPS``"""
    eps = GlobalSetting.get_prob_eps()
    size = batch.size
    rows = np.arange(size)
    if batch.is_binary:
        positive = batch.labels == 1
        p_true = np.where(positive, batch.probs, 1.0 - batch.probs)
    else:
        p_true = batch.probs[rows, batch.labels]
    active = p_true >= eps
    clamped = np.maximum(p_true, eps)
    value = -np.mean(np.log(clamped))
    # d(-log p_true)/d p_true, zero where the clamp holds
    d_true = np.where(active, -1.0 / (size * clamped), 0.0)
    if batch.is_binary:
        grad = np.where(positive, d_true, -d_true)
    else:
        grad = np.zeros_like(batch.probs)
        grad[rows, batch.labels] = d_true
    return LossValue(value, grad, {'ce': float(value)})


def soft_group_positive_rate(batch: BatchPrediction, group: int, positive_class: int = 1) -> Tuple[float, np.ndarray]:
    """Mean positive-class probability over the members of ``group``."""
    member = batch.z == group
    count = int(member.sum())
    if not count:
        raise MissingGroupInBatch(group)
    positive = batch.positive_probs(positive_class)
    rate = float(positive[member].mean())
    grad = np.zeros_like(batch.probs)
    sign = -1.0 if batch.is_binary and positive_class != 1 else 1.0
    if batch.is_binary:
        grad[member] = sign / count
    else:
        grad[member, positive_class] = 1.0 / count
    return rate, grad


def fairness_loss(batch: BatchPrediction, weights: LossWeights) -> LossValue:
    """(|rate(z=1) − rate(z=0)| − spd_ideal)²; zero when a group is absent from the batch."""
    try:
        rate1, grad1 = soft_group_positive_rate(batch, PROTECTED, weights.positive_class)
        rate0, grad0 = soft_group_positive_rate(batch, UNPROTECTED, weights.positive_class)
    except MissingGroupInBatch:
        return LossValue(0.0, np.zeros_like(batch.probs), {'fair': 0.0})
    soft_spd = rate1 - rate0
    gap = abs(soft_spd) - weights.spd_ideal
    value = gap * gap
    grad = 2.0 * gap * np.sign(soft_spd) * (grad1 - grad0)
    return LossValue(value, grad, {'fair': value, 'soft_spd': soft_spd})


def total_loss(batch: BatchPrediction, weights: LossWeights) -> LossValue:
    ce = cross_entropy_loss(batch)
    fair = fairness_loss(batch, weights)
    weighted = weights.lam * fair.value
    return LossValue(
        ce.value + weighted,
        ce.grad_probs + weights.lam * fair.grad_probs,
        {'ce': ce.value, 'fair': fair.value, 'weighted_fair': weighted},
    )
