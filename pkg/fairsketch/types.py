# -*- coding:utf-8 -*-
from typing import (
    Optional, Union, Literal
)


optional = Optional

number = Union[int, float]

ExtraValues = Literal['allow', 'ignore', 'forbid']

SerializeMode = Literal['python', 'json']

FprMode = Literal['standard', 'as_written']

Condition = Literal['original', 'grayscale', 'sketch']

SketchMode = Literal['grayscale', 'sketch']

Activation = Literal['relu_hidden_sigmoid_out', 'relu_hidden_softmax_out']

OptimizerName = Literal['sgd', 'adam']

DatasetKind = Literal['attribute_manifest', 'features_csv', 'synthetic']

GroupFlag = Literal[0, 1]
