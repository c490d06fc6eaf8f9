# -*- coding:utf-8 -*-
from typing import Any, Dict, Union, get_args

import numpy as np

from .field import Field
from .type_parser import type_parser


class JsonSchema:
    """JSON schemas"""

    schema_draft = 'https://json-schema.org/draft/2020-12/schema'

    _SIMPLE_TYPES = {
        str: {'type': 'string'},
        bool: {'type': 'boolean'},
        int: {'type': 'integer'},
        float: {'type': 'number'},
    }

    def __init__(self):
        self.schema_definition: Dict[str, Any] = {}

    @classmethod
    def generate(cls, record_cls) -> Dict[str, Any]:
        """生成记录类的 JSON schema; nested records go to ``$defs``"""
        generator = cls()
        schema = generator.record_schema(record_cls)
        schema = {'$schema': cls.schema_draft, **schema}
        if generator.schema_definition:
            schema['$defs'] = generator.schema_definition
        return schema

    def record_schema(self, record_cls) -> Dict[str, Any]:
        config = record_cls.record_config
        properties: Dict[str, Any] = {}
        required = []
        field: Field
        for field in record_cls.record_fields.values():
            if field.exclude:
                continue
            prop = self.annotation_schema(field.annotation)
            for key, schema_key in (('ge', 'minimum'), ('gt', 'exclusiveMinimum'),
                                    ('le', 'maximum'), ('lt', 'exclusiveMaximum'),
                                    ('min_length', 'minItems'), ('max_length', 'maxItems')):
                value = getattr(field, key)
                if value is not None:
                    prop[schema_key] = value
            if field.description:
                prop['description'] = field.description
            if field.default is not None and field.has_default and field.default_factory is None:
                prop['default'] = _json_default(field.default)
            properties[field.output_name] = prop
            if field.required:
                required.append(field.output_name)
        schema: Dict[str, Any] = {
            'title': config.title or record_cls.__name__,
            'type': 'object',
            'properties': properties,
        }
        if config.description or record_cls.__doc__:
            schema['description'] = config.description or record_cls.__doc__.strip().splitlines()[0]
        if required:
            schema['required'] = required
        if config.extra == 'forbid':
            schema['additionalProperties'] = False
        return schema

    def annotation_schema(self, annotation) -> Dict[str, Any]:
        if annotation in self._SIMPLE_TYPES:
            return dict(self._SIMPLE_TYPES[annotation])
        if type_parser.is_optional(annotation):
            args = type_parser.non_none_args(annotation)
            inner = self.annotation_schema(args[0] if len(args) == 1 else Union[args])
            return {'anyOf': [inner, {'type': 'null'}]}
        if type_parser.is_union(annotation):
            return {'anyOf': [self.annotation_schema(a) for a in get_args(annotation)]}
        if type_parser.is_literal(annotation):
            return {'enum': list(get_args(annotation))}
        if type_parser.is_record(annotation):
            name = annotation.__name__
            if name not in self.schema_definition:
                self.schema_definition[name] = {}
                self.schema_definition[name] = self.record_schema(annotation)
            return {'$ref': f'#/$defs/{name}'}
        if type_parser.is_ndarray(annotation):
            return {'type': 'array', 'items': {'type': 'number'}}
        if type_parser.is_dict(annotation):
            args = get_args(annotation)
            values = self.annotation_schema(args[1]) if len(args) >= 2 else {}
            return {'type': 'object', 'additionalProperties': values}
        if type_parser.is_tuple(annotation):
            args = get_args(annotation)
            if not args or Ellipsis in args:
                return {'type': 'array', 'items': self.annotation_schema(args[0]) if args else {}}
            return {'type': 'array', 'prefixItems': [self.annotation_schema(a) for a in args],
                    'minItems': len(args), 'maxItems': len(args)}
        if type_parser.is_list(annotation):
            args = get_args(annotation)
            return {'type': 'array', 'items': self.annotation_schema(args[0]) if args else {}}
        return {}


def _json_default(value):
    if isinstance(value, tuple):
        return [_json_default(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    if hasattr(value, 'to_dict'):
        return value.to_dict(mode='json')
    return value
