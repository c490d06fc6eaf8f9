# -*- coding:utf-8 -*-
import json
import os
import re
from typing import Dict, List, Literal

import numpy as np
import pytest

from fairsketch import JsonSchema, Record, RecordConfig, ValidationError, field, field_validator, record_validator
from fairsketch.checkpoint import Checkpoint
from fairsketch.config import ExperimentConfig
from fairsketch.types import optional


class Point(Record):
    """一个点"""

    record_config = RecordConfig(frozen=True, extra='forbid')

    x: float = field(ge=0.0)
    y: float = 0.0
    label: optional[str] = None


class Shape(Record):

    name: str = field(min_length=1)
    points: List[Point] = field(default_factory=list)
    weights: optional[np.ndarray] = None
    tags: Dict[str, int] = field(default_factory=dict)
    kind: Literal['open', 'closed'] = 'open'
    scale: float = field(default=1.0, alias='scaleFactor', gt=0.0)

    @field_validator('name')
    def _lower(cls, value):
        return value.lower()

    @record_validator
    def _closed_needs_points(self):
        if self.kind == 'closed' and len(self.points) < 3:
            raise ValueError('a closed shape needs three points')


class Loose(Record):

    record_config = RecordConfig(extra='allow')

    a: int


class TestRecord:

    def test_coerces_strings_and_nested_records(self):
        shape = Shape(name='Tri', points=[{'x': '1.5', 'y': 2}, Point(x=0)], tags={'k': '3'}, scaleFactor='2')
        assert shape.name == 'tri'
        assert shape.points[0] == Point(x=1.5, y=2.0)
        assert shape.tags == {'k': 3}
        assert shape.scale == 2.0

    def test_collects_every_error(self):
        with pytest.raises(ValidationError) as info:
            Shape(name='', points=[{'x': -1}], kind='square', scaleFactor=0)
        types = sorted(e.exception_type for e in info.value.errors())
        assert types == ['greater_than', 'greater_than_equal', 'literal_error', 'too_short']
        assert info.value.exit_code == 2

    def test_missing_required_field(self):
        with pytest.raises(ValidationError) as info:
            Point(y=1.0)
        error = info.value.errors()[0]
        assert error.exception_type == 'missing'
        assert error.loc == ['x']

    def test_extra_policies(self):
        with pytest.raises(ValidationError) as info:
            Point(x=1, z=2)
        assert info.value.errors()[0].exception_type == 'extra_forbidden'
        loose = Loose(a=1, note='kept')
        assert loose.record_extra == {'note': 'kept'}
        assert Loose(a=1) != loose

    def test_frozen(self):
        point = Point(x=1)
        with pytest.raises(ValidationError):
            point.x = 2.0
        assert hash(point) == hash(Point(x=1.0))
        assert point.replace(y=3).y == 3.0

    def test_record_validator(self):
        with pytest.raises(ValidationError, match='three points'):
            Shape(name='s', kind='closed')

    def test_int_rejects_fractional_float(self):
        with pytest.raises(ValidationError) as info:
            Checkpoint(activation='relu_hidden_sigmoid_out', layer_dims=[1.5, 1], weights=[[[0.0]]], biases=[[0.0]])
        assert info.value.errors()[0].exception_type == 'int_from_float'

    def test_arrays(self):
        source = [1, 2, 3]
        shape = Shape(name='s', weights=source)
        assert shape.weights.dtype == np.float64
        assert not shape.weights.flags.writeable
        with pytest.raises(ValidationError):
            Shape(name='s', weights=[1.0, float('nan')])
        with pytest.raises(ValidationError):
            Shape(name='s', weights=[[1.0], [2.0]])

    def test_to_dict_and_json(self):
        shape = Shape(name='S', points=[{'x': 1}], weights=[0.5], scaleFactor=3)
        python = shape.to_dict()
        assert isinstance(python['weights'], np.ndarray)
        assert python['scaleFactor'] == 3.0
        document = json.loads(shape.to_json_str())
        assert document['weights'] == [0.5]
        assert document['points'] == [{'x': 1.0, 'y': 0.0, 'label': None}]
        assert 'label' not in shape.to_dict(mode='json', exclude_none=True)['points'][0]
        assert Shape.from_json_str(shape.to_json_str()) == shape

    def test_empty_string_counts_as_none(self):
        assert Point(x=1, label='').label is None


class TestJsonSchema:

    def test_point_schema(self):
        schema = JsonSchema.generate(Point)
        assert schema['$schema'].endswith('2020-12/schema')
        assert schema['required'] == ['x']
        assert schema['additionalProperties'] is False
        assert schema['properties']['x'] == {'type': 'number', 'minimum': 0.0}
        assert schema['properties']['label'] == {'anyOf': [{'type': 'string'}, {'type': 'null'}]}

    def test_experiment_schema(self):
        schema = JsonSchema.generate(ExperimentConfig)
        assert schema['properties']['train'] == {'$ref': '#/$defs/TrainConfig'}
        train = schema['$defs']['TrainConfig']
        assert 'lambda' in train['properties']
        assert train['properties']['learning_rate']['exclusiveMinimum'] == 0.0
        assert schema['properties']['condition']['enum'] == ['original', 'grayscale', 'sketch']
        json.dumps(schema)


class TestPythonFloor:

    def test_builtin_generic_annotations(self):
        class Tally(Record):
            counts: dict[str, int] = field(default_factory=dict)
            weights: list[float] = field(default_factory=list)
            note: str | None = None

        tally = Tally(counts={'a': '2'}, weights=['0.5', 1])
        assert tally.counts == {'a': 2}
        assert tally.weights == [0.5, 1.0]
        assert tally.note is None
        with pytest.raises(ValidationError):
            Tally(counts={'a': 'many'})

    def test_setup_declares_floor(self):
        setup_py = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'setup.py')
        with open(setup_py, encoding='utf-8') as f:
            floor = re.search(r"python_requires='>=3\.(\d+)'", f.read())
        assert floor is not None and int(floor.group(1)) >= 10
