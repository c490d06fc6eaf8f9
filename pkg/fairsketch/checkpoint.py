# -*- coding:utf-8 -*-
"""
模型检查点 Versioned JSON container for ModelParams

::

    {"format": "fairsketch-checkpoint", "version": 1,
     "activation": "relu_hidden_sigmoid_out", "layer_dims": [4, 8, 1],
     "weights": [[[...], ...], ...], "biases": [[...], ...], "meta": {...}}

``weights[i]`` is the row-major ``out×in`` matrix of layer ``i``.
"""
import json
import os
from typing import Any, Dict, List

from .constants import CHECKPOINT_FORMAT, CHECKPOINT_VERSION
from .decorators import field_validator, record_validator
from .exceptions import FairSketchError, FormatError, ValidationError
from .field import field
from .model import ModelParams
from .record import Record
from .record_config import RecordConfig
from .types import Activation, optional


class Checkpoint(Record):

    record_config = RecordConfig(frozen=True, extra='forbid', allow_inf_nan=False)

    format: str = CHECKPOINT_FORMAT

    version: int = CHECKPOINT_VERSION

    activation: Activation

    layer_dims: List[int] = field(min_length=2, ge=1)

    weights: List[List[List[float]]]

    biases: List[List[float]]

    """config hash, seed, run name"""
    meta: Dict[str, Any] = field(default_factory=dict)

    @field_validator('format')
    def _known_format(cls, value):
        if value != CHECKPOINT_FORMAT:
            raise ValueError(f'not a {CHECKPOINT_FORMAT} document')
        return value

    @field_validator('version')
    def _known_version(cls, value):
        if value != CHECKPOINT_VERSION:
            raise ValueError(f'unsupported checkpoint version {value}')
        return value

    @record_validator
    def _layers_match(self):
        if len(self.weights) != len(self.layer_dims) - 1 or len(self.biases) != len(self.weights):
            raise ValueError('layer_dims, weights and biases disagree on the number of layers')

    @classmethod
    def from_params(cls, params: ModelParams, meta: optional[Dict[str, Any]] = None) -> 'Checkpoint':
        return cls(
            activation=params.activation,
            layer_dims=params.layer_dims,
            weights=[w.tolist() for w, _ in params.layers],
            biases=[b.tolist() for _, b in params.layers],
            meta=dict(meta or {}),
        )

    def to_params(self) -> ModelParams:
        params = ModelParams(list(zip(self.weights, self.biases)), self.activation)
        if params.layer_dims != list(self.layer_dims):
            raise FormatError('checkpoint declares layer_dims {declared} but holds {actual}',
                              declared=list(self.layer_dims), actual=params.layer_dims)
        return params


def save_checkpoint(params: ModelParams, path: str, meta: optional[Dict[str, Any]] = None) -> Checkpoint:
    checkpoint = Checkpoint.from_params(params, meta)
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(checkpoint.to_json_str(indent=1))
    return checkpoint


def load_checkpoint(path: str) -> ModelParams:
    """Read a checkpoint written by ``save_checkpoint``; any defect is a FormatError."""
    try:
        with open(path, encoding='utf-8') as f:
            document = json.load(f)
    except (OSError, ValueError) as e:
        raise FormatError('cannot read checkpoint {path}: {reason}', path=path, reason=str(e))
    try:
        return Checkpoint.from_object(document).to_params()
    except ValidationError as e:
        raise FormatError('invalid checkpoint {path}: {reason}', path=path, reason=e.first_message())
    except FormatError:
        raise
    except FairSketchError as e:
        raise FormatError('invalid checkpoint {path}: {reason}', path=path, reason=e.message())
