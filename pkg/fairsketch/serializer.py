# -*- coding:utf-8 -*-
import collections.abc
import math
import warnings
from abc import ABC
from typing import Any, Dict, List, Type, get_args

import numpy as np

from .constants import _RECORD_FIELDS_NAME, _RECORD_CONFIG_NAME, _POST_INIT_NAME, SerMode, _T
from .exceptions import ErrorDetail, ValidationError, SerializationError, RecordCustomError
from .field import Field
from .record_config import RecordConfig
from .type_parser import type_parser
from .types import optional
from .utils import isinstance_safe, _format_type
from .validator import validate_iter_with_catch


class RecordDeserializer:
    """记录反序列化器"""

    name: str
    record_cls: Type[_T]
    fields: Dict[str, Field]

    def __init__(self, record_cls: Type[_T], fields: optional[Dict[str, Field]] = None):
        self.record_cls = record_cls
        self.name = record_cls.__name__
        self.fields = fields if fields is not None else getattr(record_cls, _RECORD_FIELDS_NAME, {})

    def deserialize(self, input: Any, context: optional[Any] = None, instance: _T = None) -> _T:
        """反序列化"""
        if instance is None:
            instance: _T = self.record_cls.__new__(self.record_cls)  # type: ignore

        object.__setattr__(instance, '__record_extra__', {})
        self.deserialize_init(input, instance)
        self.run_record_validators(instance)
        self.call_post_init(instance, context)
        return instance

    def deserialize_init(self, input: Any, instance: _T):
        is_mapping: bool = isinstance_safe(input, collections.abc.Mapping)
        config: RecordConfig = getattr(self.record_cls, _RECORD_CONFIG_NAME, None) or RecordConfig()
        decorators = getattr(self.record_cls, '__record_decorators__', None)
        errs: List[ErrorDetail] = []
        consumed = set()
        field_name: str
        field: Field
        for field_name, field in self.fields.items():
            missing = True
            field_value = None
            for key in field.input_names:
                if is_mapping and key in input:
                    field_value, missing = input[key], False
                    consumed.add(key)
                    break
                if not is_mapping and hasattr(input, key):
                    field_value, missing = getattr(input, key), False
                    break
            if missing:
                if field.required:
                    errs.append(ErrorDetail([field.output_name], None, 'missing', 'Field required'))
                    continue
                field_value = field.get_default_value()
            elif field_value is None and field.required:
                errs.append(ErrorDetail([field.output_name], field_value, 'missing', 'Field required'))
                continue
            if field_value is not None:
                field_value = validate_iter_with_catch(field_value, field.validator, [field.output_name], errs)
            if decorators is not None and not errs:
                for info in decorators.field_validators.get(field_name, ()):
                    field_value = self._run_field_validator(info.func, field_value, field, errs)

            object.__setattr__(instance, field_name, field_value)

        if is_mapping:
            for key, value in input.items():
                if key in consumed or key in self.fields:
                    continue
                if config.extra == 'ignore':
                    continue
                elif config.extra == 'forbid':
                    errs.append(ErrorDetail([key], value, 'extra_forbidden', 'Extra inputs are not permitted'))
                else:
                    instance.__record_extra__[key] = value

        if errs:
            raise ValidationError(title=self.name, line_errors=errs)

    def _run_field_validator(self, func, value, field: Field, errs: List[ErrorDetail]):
        try:
            return func(self.record_cls, value)
        except RecordCustomError as e:
            errs.append(ErrorDetail([field.output_name], value, e.exception_type, e.message(), e.context))
        except (ValueError, TypeError) as e:
            errs.append(ErrorDetail([field.output_name], value, 'value_error', str(e)))
        return value

    def run_record_validators(self, instance: _T):
        decorators = getattr(self.record_cls, '__record_decorators__', None)
        if decorators is None:
            return
        for info in decorators.record_validators:
            try:
                info.func(instance)
            except RecordCustomError as e:
                raise ValidationError(self.name, [ErrorDetail([], None, e.exception_type, e.message(), e.context)])
            except ValueError as e:
                raise ValidationError(self.name, [ErrorDetail([], None, 'value_error', str(e))])

    @staticmethod
    def call_post_init(instance: _T, context: optional[Any] = None):
        if hasattr(instance, _POST_INIT_NAME):
            getattr(instance, _POST_INIT_NAME)(context)


class SerParameter:
    """序列化参数"""

    mode: SerMode
    by_alias: bool
    exclude_none: bool
    error_messages: List[str]

    __slots__ = ('mode', 'by_alias', 'exclude_none', 'error_messages')

    def __init__(self, mode: SerMode = SerMode.python, by_alias: bool = True, exclude_none: bool = False):
        self.mode = mode
        self.by_alias = by_alias
        self.exclude_none = exclude_none
        self.error_messages = []

    def fallback_error(self, expect_type, value):
        self.error_messages.append(
            f'Expected `{_format_type(expect_type)}` but got `{_format_type(type(value))}`'
            f' - serialized value may not be as expected'
        )

    def check_error(self, errors: str = 'warn'):
        if errors == 'ignore' or not self.error_messages:
            return
        error_msg = 'Record serializer warnings:\n  ' + '\n  '.join(self.error_messages)
        if errors == 'error':
            raise SerializationError(error_msg)
        warnings.warn(error_msg)


class RecordSerializer:
    """记录序列化器"""

    name: str
    record_cls: Type[_T]
    fields: Dict[str, Field]

    def __init__(self, record_cls: Type[_T], fields: optional[Dict[str, Field]] = None):
        self.record_cls = record_cls
        self.name = record_cls.__name__
        self.fields = fields if fields is not None else getattr(record_cls, _RECORD_FIELDS_NAME, {})

    def to_python(
        self,
        value,
        /,
        mode: str = 'python',
        by_alias: bool = True,
        exclude_none: bool = False,
        errors: str = 'warn',
    ) -> dict:
        """序列化到Python对象，JSON模式为任意语言可识别的JSON dict"""
        parameter = SerParameter(mode=SerMode(mode), by_alias=by_alias, exclude_none=exclude_none)
        out_dict = self.dump(value, parameter)
        parameter.check_error(errors)
        return out_dict

    def dump(self, value, parameter: SerParameter) -> dict:
        out_dict: dict = {}
        for field_name, field in self.fields.items():
            if field.exclude:
                continue
            serialize_value = getattr(value, field_name, None)
            if parameter.exclude_none and serialize_value is None:
                continue
            if parameter.mode is SerMode.python:
                out_value = field.serializer.to_python(serialize_value, parameter)
            else:
                out_value = field.serializer.serialize(serialize_value, parameter)
            out_dict[field.output_name if parameter.by_alias else field_name] = out_value
        return out_dict


class Serializer(ABC):

    serializer_name: str
    annotation: Any

    def __init__(self, **kwargs): ...

    @property
    def name(self) -> str:
        return self.serializer_name

    def to_python(self, value, parameter: SerParameter):
        return value

    def serialize(self, value, parameter: SerParameter):
        return self.to_python(value, parameter)

    @classmethod
    def build(cls, annotation, **kwargs) -> 'Serializer':
        return cls(**kwargs)


class AnySerializer(Serializer):

    serializer_name = 'any'
    annotation = Any

    def to_python(self, value, parameter: SerParameter) -> Any:
        return value

    def serialize(self, value, parameter: SerParameter) -> Any:
        return serialize_any_to_json_value(value, parameter)


class FloatSerializer(Serializer):
    """非有限值在 JSON 模式下写为 null"""

    serializer_name = 'float'
    annotation = float

    def to_python(self, value, parameter: SerParameter):
        if value is not None and not isinstance_safe(value, (int, float, np.integer, np.floating)):
            parameter.fallback_error(float, value)
            return value
        return None if value is None else float(value)

    def serialize(self, value, parameter: SerParameter):
        value = self.to_python(value, parameter)
        if isinstance_safe(value, float) and not math.isfinite(value):
            return None
        return value


class IntegerSerializer(Serializer):

    serializer_name = 'int'
    annotation = int

    def to_python(self, value, parameter: SerParameter):
        if value is not None and not isinstance_safe(value, (int, np.integer)):
            parameter.fallback_error(int, value)
            return value
        return None if value is None else int(value)


class ArraySerializer(Serializer):
    """数组: python 模式保留 ndarray, JSON 模式写为行优先的嵌套列表"""

    serializer_name = 'ndarray'
    annotation = np.ndarray

    def serialize(self, value, parameter: SerParameter):
        if value is None:
            return None
        return np.asarray(value, dtype=np.float64).tolist()


class OptionalSerializer(Serializer):

    serializer_name = 'optional'

    def __init__(self, serializer: Serializer, **kwargs):
        super().__init__(**kwargs)
        self.serializer = serializer

    def to_python(self, value, parameter: SerParameter):
        return None if value is None else self.serializer.to_python(value, parameter)

    def serialize(self, value, parameter: SerParameter):
        return None if value is None else self.serializer.serialize(value, parameter)

    @classmethod
    def build(cls, annotation, **kwargs) -> 'OptionalSerializer':
        args = type_parser.non_none_args(annotation)
        inner = matching_serializer(args[0]) if len(args) == 1 else GLOBAL_SERIALIZERS[Any]
        return cls(inner)


class CollectionSerializer(Serializer):
    """list / tuple: JSON 模式下都写为列表"""

    serializer_name = 'collection'

    def __init__(self, item_serializers: List[Serializer], variadic: bool = True, as_tuple: bool = False, **kwargs):
        super().__init__(**kwargs)
        self.item_serializers = item_serializers
        self.variadic = variadic
        self.as_tuple = as_tuple

    def _item_serializer(self, index: int) -> Serializer:
        if self.variadic or index >= len(self.item_serializers):
            return self.item_serializers[0]
        return self.item_serializers[index]

    def to_python(self, value, parameter: SerParameter):
        if value is None:
            return None
        items = [self._item_serializer(i).to_python(v, parameter) for i, v in enumerate(value)]
        return tuple(items) if self.as_tuple else items

    def serialize(self, value, parameter: SerParameter):
        if value is None:
            return None
        return [self._item_serializer(i).serialize(v, parameter) for i, v in enumerate(value)]

    @classmethod
    def build(cls, annotation, **kwargs) -> 'CollectionSerializer':
        args = [a for a in get_args(annotation) if a is not Ellipsis]
        as_tuple = type_parser.is_tuple(annotation)
        variadic = not as_tuple or not get_args(annotation) or Ellipsis in get_args(annotation)
        serializers = [matching_serializer(a) for a in args] or [GLOBAL_SERIALIZERS[Any]]
        return cls(serializers, variadic=variadic, as_tuple=as_tuple)


class DictSerializer(Serializer):

    serializer_name = 'dict'

    def __init__(self, value_serializer: Serializer, **kwargs):
        super().__init__(**kwargs)
        self.value_serializer = value_serializer

    def to_python(self, value, parameter: SerParameter):
        if value is None:
            return None
        return {k: self.value_serializer.to_python(v, parameter) for k, v in value.items()}

    def serialize(self, value, parameter: SerParameter):
        if value is None:
            return None
        return {str(k): self.value_serializer.serialize(v, parameter) for k, v in value.items()}

    @classmethod
    def build(cls, annotation, **kwargs) -> 'DictSerializer':
        args = get_args(annotation)
        return cls(matching_serializer(args[1]) if len(args) >= 2 else GLOBAL_SERIALIZERS[Any])


class RecordFieldSerializer(Serializer):
    """嵌套记录"""

    serializer_name = 'record'

    def __init__(self, annotation, **kwargs):
        super().__init__(**kwargs)
        self.annotation = annotation

    def to_python(self, value, parameter: SerParameter):
        if value is None:
            return None
        return value.__record_serializer__.dump(value, parameter)

    def serialize(self, value, parameter: SerParameter):
        return self.to_python(value, parameter)

    @classmethod
    def build(cls, annotation, **kwargs) -> 'RecordFieldSerializer':
        return cls(annotation)


def matching_serializer(annotation, **kwargs) -> Serializer:
    """匹配序列化器"""
    annotation = type_parser.repair_type(annotation)
    if type_parser.is_optional(annotation):
        return OptionalSerializer.build(annotation)
    if type_parser.is_record(annotation):
        return RecordFieldSerializer.build(annotation)
    if type_parser.is_ndarray(annotation):
        return GLOBAL_SERIALIZERS[np.ndarray]
    if type_parser.is_dict(annotation):
        return DictSerializer.build(annotation)
    if type_parser.is_tuple(annotation) or type_parser.is_list(annotation):
        return CollectionSerializer.build(annotation)
    if type_parser.is_literal(annotation) or type_parser.is_union(annotation):
        return GLOBAL_SERIALIZERS[Any]
    return GLOBAL_SERIALIZERS.get(annotation, GLOBAL_SERIALIZERS[Any])


def serialize_any_to_json_value(value, parameter: SerParameter) -> Any:
    """序列化任意数据到任意语言可理解对象，并且可解析到json输出到文件"""
    if value is None or isinstance_safe(value, (str, bool, int)):
        return value
    if isinstance_safe(value, float):
        return value if math.isfinite(value) else None
    if isinstance_safe(value, np.ndarray):
        return value.tolist()
    if isinstance_safe(value, np.generic):
        return serialize_any_to_json_value(value.item(), parameter)
    if hasattr(value, '__record_serializer__'):
        return value.__record_serializer__.dump(value, parameter)
    if isinstance_safe(value, collections.abc.Mapping):
        return {str(k): serialize_any_to_json_value(v, parameter) for k, v in value.items()}
    if isinstance_safe(value, (list, tuple, set, frozenset)):
        return [serialize_any_to_json_value(v, parameter) for v in value]
    parameter.fallback_error('json value', value)
    return value


GLOBAL_SERIALIZERS: Dict[Any, Serializer] = {
    Any: AnySerializer(),
    float: FloatSerializer(),
    int: IntegerSerializer(),
    np.ndarray: ArraySerializer(),
}
