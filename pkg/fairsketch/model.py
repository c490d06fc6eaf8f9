# -*- coding:utf-8 -*-
"""
小型全连接分类器 Small fully-connected classifier

ReLU hidden layers, a sigmoid head when the last layer has one unit and a
softmax head otherwise.  Forward and backward passes are written out by
hand so the loss gradient w.r.t. the probabilities flows straight into the
weight updates.
"""
import math
from abc import ABC, abstractmethod
from typing import Callable, Dict, List, Sequence, Tuple, Type

import numpy as np
from loguru import logger

from .constants import ADAM_BETA1, ADAM_BETA2, ADAM_EPS, DEFAULT_BATCH_SIZE, DEFAULT_LAMBDA, DEFAULT_LEARNING_RATE
from .data import LabeledExample, SplitSet, TrainingBatch, epoch_seed, minibatches, stack_examples
from .exceptions import ConfigError, MismatchedCache, MissingGroup, NonFiniteLoss, ShapeError
from .field import field
from .globals import GlobalSetting
from .loss import BatchPrediction, LossWeights, cross_entropy_loss, fairness_loss, total_loss
from .metrics import PredictionRecord, spd_from_arrays
from .record import Record
from .record_config import RecordConfig
from .types import Activation, OptimizerName, optional

SIGMOID_HEAD: Activation = 'relu_hidden_sigmoid_out'
SOFTMAX_HEAD: Activation = 'relu_hidden_softmax_out'

"""uint64 种子上限"""
MAX_SEED = 2 ** 64 - 1

Layer = Tuple[np.ndarray, np.ndarray]


class ModelParams:
    """网络参数: ``layers[i] = (W out×in, b out)``"""

    layers: List[Layer]
    activation: Activation

    __slots__ = ('layers', 'activation')

    def __init__(self, layers: Sequence[Layer], activation: Activation):
        if activation not in (SIGMOID_HEAD, SOFTMAX_HEAD):
            raise ConfigError("unknown activation '{activation}'", activation=activation)
        self.layers = [(np.asarray(w, dtype=np.float64), np.asarray(b, dtype=np.float64)) for w, b in layers]
        self.activation = activation
        if not self.layers:
            raise ShapeError('a network needs at least one layer')
        for index, (w, b) in enumerate(self.layers):
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise ShapeError('layer {index}: weights {w} and biases {b} do not match',
                                 index=index, w=w.shape, b=b.shape)
            if index and w.shape[1] != self.layers[index - 1][0].shape[0]:
                raise ShapeError('layer {index} expects {got} inputs but the previous layer has {want} outputs',
                                 index=index, got=w.shape[1], want=self.layers[index - 1][0].shape[0])
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ShapeError('layer {index} holds non-finite parameters', index=index)
        if activation == SIGMOID_HEAD and self.layers[-1][0].shape[0] != 1:
            raise ShapeError('a sigmoid head needs exactly one output unit')

    @property
    def layer_dims(self) -> List[int]:
        return [self.layers[0][0].shape[1]] + [w.shape[0] for w, _ in self.layers]

    @property
    def signature(self) -> Tuple:
        return (self.activation,) + tuple(w.shape for w, _ in self.layers)

    def copy(self) -> 'ModelParams':
        return ModelParams([(w.copy(), b.copy()) for w, b in self.layers], self.activation)

    def arrays(self) -> List[np.ndarray]:
        """W0, b0, W1, b1, ... in layer order"""
        return [array for layer in self.layers for array in layer]

    def __eq__(self, other):
        if not isinstance(other, ModelParams):
            return NotImplemented
        return (self.signature == other.signature
                and all(np.array_equal(a, b) for a, b in zip(self.arrays(), other.arrays())))

    def __repr__(self):
        return f'ModelParams(layer_dims={self.layer_dims}, activation={self.activation!r})'


class TrainConfig(Record):
    """训练配置"""

    record_config = RecordConfig(frozen=True, extra='forbid')

    layer_dims: List[int] = field(min_length=2, ge=1, description='input width, hidden widths, output width')

    lam: float = field(default=DEFAULT_LAMBDA, alias='lambda', ge=0.0, description='weight of the fairness term')

    spd_ideal: float = field(default=0.0, ge=0.0, le=1.0)

    positive_class: int = field(default=1, ge=0)

    learning_rate: float = field(default=DEFAULT_LEARNING_RATE, gt=0.0)

    batch_size: int = field(default=DEFAULT_BATCH_SIZE, ge=1)

    epochs: int = field(default=10, ge=1)

    seed: int = field(default=0, ge=0, le=MAX_SEED)

    optimizer: OptimizerName = 'sgd'

    """为空时由输出层宽度决定"""
    activation: optional[Activation] = None

    @property
    def loss_weights(self) -> LossWeights:
        return LossWeights(lam=self.lam, spd_ideal=self.spd_ideal, positive_class=self.positive_class)


class EpochRecord(Record):
    """一个 epoch 的训练摘要"""

    record_config = RecordConfig(frozen=True)

    epoch: int = field(ge=1)

    """训练集上的总目标"""
    train_loss: float

    train_ce: float

    """λ 加权后的公平项"""
    train_fair: float

    val_accuracy: optional[float] = None

    """验证集硬 SPD; 验证集为空或缺少群体时为空"""
    val_spd: optional[float] = None


class TrainHistory(Record):

    epochs: List[EpochRecord] = field(default_factory=list)

    def __len__(self):
        return len(self.epochs)

    def __iter__(self):
        return iter(self.epochs)

    @property
    def last(self) -> optional[EpochRecord]:
        return self.epochs[-1] if self.epochs else None


class ForwardCache:
    """前向缓存: layer inputs, pre-activations and the output probabilities"""

    inputs: List[np.ndarray]
    pre_activations: List[np.ndarray]
    probs: np.ndarray
    signature: Tuple

    __slots__ = ('inputs', 'pre_activations', 'probs', 'signature')

    def __init__(self, inputs, pre_activations, probs, signature):
        self.inputs = inputs
        self.pre_activations = pre_activations
        self.probs = probs
        self.signature = signature


def sigmoid(x: np.ndarray) -> np.ndarray:
    # tanh form stays finite for any input
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def softmax(x: np.ndarray) -> np.ndarray:
    shifted = x - x.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def default_activation(layer_dims: Sequence[int]) -> Activation:
    return SIGMOID_HEAD if layer_dims[-1] == 1 else SOFTMAX_HEAD


def init_params(layer_dims: Sequence[int], seed: int, activation: optional[Activation] = None) -> ModelParams:
    """uniform(−1/√in, 1/√in) weights and zero biases drawn from one seeded generator"""
    layer_dims = [int(d) for d in layer_dims]
    if len(layer_dims) < 2:
        raise ConfigError('layer_dims needs an input and an output width, got {dims}', dims=layer_dims)
    if any(d < 1 for d in layer_dims):
        raise ConfigError('layer widths must be positive, got {dims}', dims=layer_dims)
    rng = np.random.default_rng(seed)
    layers: List[Layer] = []
    for fan_in, fan_out in zip(layer_dims[:-1], layer_dims[1:]):
        bound = 1.0 / math.sqrt(fan_in)
        layers.append((rng.uniform(-bound, bound, size=(fan_out, fan_in)), np.zeros(fan_out)))
    return ModelParams(layers, activation or default_activation(layer_dims))


def forward(params: ModelParams, features) -> Tuple[np.ndarray, ForwardCache]:
    """Probabilities ``(B,)`` for a sigmoid head, ``(B, K)`` for softmax."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim == 1:
        x = x[np.newaxis, :]
    expected = params.layers[0][0].shape[1]
    if x.ndim != 2 or x.shape[1] != expected:
        raise ShapeError('features have shape {shape}, the network expects {expected} columns',
                         shape=x.shape, expected=expected)
    inputs: List[np.ndarray] = []
    pre_activations: List[np.ndarray] = []
    a = x
    last = len(params.layers) - 1
    for index, (w, b) in enumerate(params.layers):
        inputs.append(a)
        z = a @ w.T + b
        pre_activations.append(z)
        a = np.maximum(z, 0.0) if index < last else z
    if params.activation == SIGMOID_HEAD:
        probs = sigmoid(a[:, 0])
    else:
        probs = softmax(a)
    return probs, ForwardCache(inputs, pre_activations, probs, params.signature)


def backward(params: ModelParams, cache: ForwardCache, grad_probs) -> List[Layer]:
    """Gradients ``[(dW, db), ...]`` of a loss given its gradient w.r.t. the probabilities."""
    if cache.signature != params.signature:
        raise MismatchedCache('cache was built for {cached}, parameters are {current}',
                              cached=cache.signature, current=params.signature)
    grad_probs = np.asarray(grad_probs, dtype=np.float64)
    if grad_probs.shape != cache.probs.shape:
        raise MismatchedCache('gradient shape {got} does not match the cached probabilities {want}',
                              got=grad_probs.shape, want=cache.probs.shape)
    probs = cache.probs
    if params.activation == SIGMOID_HEAD:
        delta = (grad_probs * probs * (1.0 - probs))[:, np.newaxis]
    else:
        delta = probs * (grad_probs - np.sum(grad_probs * probs, axis=1, keepdims=True))
    grads: List[Layer] = [None] * len(params.layers)  # type: ignore
    for index in range(len(params.layers) - 1, -1, -1):
        w, _ = params.layers[index]
        grads[index] = (delta.T @ cache.inputs[index], delta.sum(axis=0))
        if index:
            delta = (delta @ w) * (cache.pre_activations[index - 1] > 0.0)
    return grads


def predict_proba(params: ModelParams, features) -> np.ndarray:
    return forward(params, features)[0]


def predict(params: ModelParams, features) -> np.ndarray:
    """threshold 0.5 for a sigmoid head, argmax for softmax"""
    probs = predict_proba(params, features)
    if params.activation == SIGMOID_HEAD:
        return (probs >= 0.5).astype(np.int64)
    return probs.argmax(axis=1).astype(np.int64)


def evaluate(params: ModelParams, examples: Sequence[LabeledExample]) -> List[PredictionRecord]:
    """Prediction records for ``examples`` (scores for a sigmoid head only)."""
    if not examples:
        return []
    features, labels, z = stack_examples(examples)
    probs = predict_proba(params, features)
    preds = predict(params, features)
    records = []
    for i, example in enumerate(examples):
        records.append(PredictionRecord(
            id=example.id,
            y_true=int(labels[i]),
            y_pred=int(preds[i]),
            score=float(probs[i]) if params.activation == SIGMOID_HEAD else None,
            z=int(z[i]),
        ))
    return records


class Optimizer(ABC):
    """优化器基类"""

    optimizer_name: str

    def __init__(self, learning_rate: float, **kwargs):
        self.learning_rate = learning_rate

    @abstractmethod
    def step(self, params: ModelParams, grads: Sequence[Layer]) -> ModelParams:
        """Update ``params`` in place."""

    @classmethod
    def build(cls, config: TrainConfig) -> 'Optimizer':
        return cls(config.learning_rate)


class SgdOptimizer(Optimizer):

    optimizer_name = 'sgd'

    def step(self, params: ModelParams, grads: Sequence[Layer]) -> ModelParams:
        for (w, b), (dw, db) in zip(params.layers, grads):
            w -= self.learning_rate * dw
            b -= self.learning_rate * db
        return params


class AdamOptimizer(Optimizer):
    """Adam, bias-corrected first and second moments per parameter array"""

    optimizer_name = 'adam'

    def __init__(self, learning_rate: float, beta1: float = ADAM_BETA1, beta2: float = ADAM_BETA2,
                 eps: float = ADAM_EPS, **kwargs):
        super().__init__(learning_rate)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: List[np.ndarray] = []
        self.v: List[np.ndarray] = []

    def step(self, params: ModelParams, grads: Sequence[Layer]) -> ModelParams:
        arrays = params.arrays()
        grad_arrays = [g for layer in grads for g in layer]
        if not self.m:
            self.m = [np.zeros_like(a) for a in arrays]
            self.v = [np.zeros_like(a) for a in arrays]
        self.t += 1
        correction1 = 1.0 - self.beta1 ** self.t
        correction2 = 1.0 - self.beta2 ** self.t
        for array, grad, m, v in zip(arrays, grad_arrays, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * grad
            v *= self.beta2
            v += (1.0 - self.beta2) * grad * grad
            array -= self.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + self.eps)
        return params


OPTIMIZERS: Dict[str, Type[Optimizer]] = {
    SgdOptimizer.optimizer_name: SgdOptimizer,
    AdamOptimizer.optimizer_name: AdamOptimizer,
}


def matching_optimizer(config: TrainConfig) -> Optimizer:
    try:
        return OPTIMIZERS[config.optimizer].build(config)
    except KeyError:
        raise ConfigError("unknown optimizer '{name}'", name=config.optimizer)


def _objective(params: ModelParams, features, labels, z, weights: LossWeights) -> Tuple[float, float, float]:
    probs = predict_proba(params, features)
    batch = BatchPrediction(probs, labels, z)
    ce = cross_entropy_loss(batch).value
    weighted_fair = weights.lam * fairness_loss(batch, weights).value
    return ce + weighted_fair, ce, weighted_fair


def _validation(params: ModelParams, examples: Sequence[LabeledExample],
                positive_class: int) -> Tuple[optional[float], optional[float]]:
    if not examples:
        return None, None
    features, labels, z = stack_examples(examples)
    preds = predict(params, features)
    val_accuracy = float(np.mean(preds == labels))
    try:
        val_spd = spd_from_arrays(preds, z, positive_class)
    except MissingGroup:
        val_spd = None
    return val_accuracy, val_spd


def _check_finite(value: float, grads: Sequence[Layer], epoch: int, batch: int):
    if not math.isfinite(value):
        raise NonFiniteLoss(epoch, batch, value)
    for dw, db in grads:
        if not (np.all(np.isfinite(dw)) and np.all(np.isfinite(db))):
            raise NonFiniteLoss(epoch, batch, float('nan'))


def train(splits: SplitSet, config: TrainConfig,
          on_epoch: optional[Callable[[EpochRecord], None]] = None) -> Tuple[ModelParams, TrainHistory]:
    """Deterministic mini-batch training on CE + λ·fairness penalty."""
    train_set = list(splits.train)
    if not train_set:
        raise ConfigError('the training split is empty')
    if config.batch_size > len(train_set):
        raise ConfigError('batch_size {batch_size} exceeds the {size} training examples',
                          batch_size=config.batch_size, size=len(train_set))
    features, labels, z = stack_examples(train_set)
    if features.shape[1] != config.layer_dims[0]:
        raise ConfigError('layer_dims starts with {dims} inputs but features have {width} columns',
                          dims=config.layer_dims[0], width=features.shape[1])
    if labels.max() >= max(config.layer_dims[-1], 2):
        raise ConfigError('label {label} does not fit an output layer of width {width}',
                          label=int(labels.max()), width=config.layer_dims[-1])

    params = init_params(config.layer_dims, config.seed, config.activation)
    optimizer = matching_optimizer(config)
    weights = config.loss_weights
    history = TrainHistory()
    for epoch in range(1, config.epochs + 1):
        for index, batch in enumerate(minibatches(train_set, config.batch_size, epoch_seed(config.seed, epoch)), 1):
            probs, cache = forward(params, batch.features)
            if not np.all(np.isfinite(probs)):
                raise NonFiniteLoss(epoch, index, float('nan'))
            loss = total_loss(BatchPrediction(probs, batch.labels, batch.z), weights)
            grads = backward(params, cache, loss.grad_probs)
            _check_finite(loss.value, grads, epoch, index)
            optimizer.step(params, grads)

        train_loss, train_ce, train_fair = _objective(params, features, labels, z, weights)
        if not math.isfinite(train_loss):
            raise NonFiniteLoss(epoch, index, train_loss)
        val_accuracy, val_spd = _validation(params, splits.val, config.positive_class)
        record = EpochRecord(epoch=epoch, train_loss=train_loss, train_ce=train_ce, train_fair=train_fair,
                             val_accuracy=val_accuracy, val_spd=val_spd)
        history.epochs.append(record)
        logger.info('epoch {}/{}: loss={:.6f} ce={:.6f} fair={:.6f} val_acc={} val_spd={}',
                    epoch, config.epochs, train_loss, train_ce, train_fair,
                    'n/a' if val_accuracy is None else f'{val_accuracy:.4f}',
                    'n/a' if val_spd is None else f'{val_spd:.4f}')
        if on_epoch is not None:
            on_epoch(record)
    return params, history


def _relu_pattern(cache: ForwardCache) -> List[np.ndarray]:
    return [z > 0.0 for z in cache.pre_activations[:-1]]


def _loss_and_pattern(params: ModelParams, batch: TrainingBatch,
                      weights: LossWeights) -> Tuple[float, List[np.ndarray]]:
    probs, cache = forward(params, batch.features)
    return total_loss(BatchPrediction(probs, batch.labels, batch.z), weights).value, _relu_pattern(cache)


def _same_pattern(left: Sequence[np.ndarray], right: Sequence[np.ndarray]) -> bool:
    return all(np.array_equal(a, b) for a, b in zip(left, right))


def gradient_check(params: ModelParams, batch: TrainingBatch, weights: LossWeights) -> float:
    """Largest relative error between backward() and central differences over every parameter.

    The denominator is floored at ``GRAD_CHECK_FLOOR`` so parameters with a
    vanishing gradient compare on an absolute scale.  A coordinate whose ±h
    step switches any hidden ReLU on or off sits on a kink of the loss and is
    left out of the comparison.
    """
    h = GlobalSetting.get_fd_step()
    floor = GlobalSetting.get_grad_check_floor()
    probs, cache = forward(params, batch.features)
    loss = total_loss(BatchPrediction(probs, batch.labels, batch.z), weights)
    analytic = [g for layer in backward(params, cache, loss.grad_probs) for g in layer]
    pattern = _relu_pattern(cache)
    perturbed = params.copy()
    worst = 0.0
    skipped = 0
    for array, grad in zip(perturbed.arrays(), analytic):
        flat = array.reshape(-1)
        flat_grad = grad.reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + h
            plus, plus_pattern = _loss_and_pattern(perturbed, batch, weights)
            flat[i] = original - h
            minus, minus_pattern = _loss_and_pattern(perturbed, batch, weights)
            flat[i] = original
            if not (_same_pattern(pattern, plus_pattern) and _same_pattern(pattern, minus_pattern)):
                skipped += 1
                continue
            numeric = (plus - minus) / (2.0 * h)
            error = abs(flat_grad[i] - numeric) / max(abs(flat_grad[i]), abs(numeric), floor)
            worst = max(worst, error)
    if skipped:
        logger.debug('gradient check left out {} coordinates at a ReLU kink', skipped)
    return worst
