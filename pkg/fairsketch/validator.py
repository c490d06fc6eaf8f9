# -*- coding:utf-8 -*-
import collections.abc
import math
from abc import ABC, abstractmethod
from typing import (
    Any, Dict, List, Literal, Mapping, Optional, Tuple, Union, get_args
)

import numpy as np

from .constants import _T
from .exceptions import RecordCustomError, ErrorDetail, ValidationError, ValidatorBuildingError
from .type_parser import type_parser
from .types import optional, number
from .utils import _format_type, isinstance_safe

"""数值约束参数名"""
_BOUND_KEYS = ('ge', 'gt', 'le', 'lt')


class Validator(ABC):
    """验证器基类"""

    validator_name: str
    annotation: Any

    def __init__(self, **kwargs): ...

    @abstractmethod
    def validate(self, value): ...

    @property
    def name(self) -> str:
        return self.validator_name

    def __repr__(self):
        return f"{self.__class__.__name__}(name={self.name!r})"

    @classmethod
    def build(cls, annotation: _T, **kwargs) -> 'Validator':
        return cls(**kwargs)


class AnyValidator(Validator):
    """任意类型验证器"""

    validator_name = 'any'
    annotation = Any

    def validate(self, value):
        return value


class StringValidator(Validator):
    """字符串验证器"""

    validator_name = 'str'
    annotation = str
    numbers_types = (int, float, np.integer, np.floating)

    def __init__(self, allow_number: bool = True, strip_whitespace: bool = False,
                 min_length: optional[int] = None, max_length: optional[int] = None, **kwargs):
        super().__init__(**kwargs)
        self.allow_number = allow_number
        self.strip_whitespace = strip_whitespace
        self.min_length = min_length
        self.max_length = max_length

    def validate(self, value) -> str:
        if isinstance_safe(value, str):
            result = value
        elif isinstance_safe(value, (bytes, bytearray)):
            try:
                result = bytes(value).decode('utf-8')
            except UnicodeDecodeError:
                raise RecordCustomError('string_unicode', 'Input should be a valid string, unable to decode bytes')
        elif self.allow_number and isinstance_safe(value, self.numbers_types) and not isinstance_safe(value, bool):
            result = str(value)
        else:
            raise RecordCustomError('string_type', 'Input should be a valid string')
        if self.strip_whitespace:
            result = result.strip()
        check_collection_length(str, len(result), self.min_length, self.max_length)
        return result


class BoolValidator(Validator):
    """布尔验证器"""

    validator_name: str = 'bool'
    annotation = bool

    def validate(self, value) -> bool:
        if isinstance_safe(value, (bool, np.bool_)):
            return bool(value)
        elif isinstance_safe(value, (int, np.integer)) and value in (0, 1):
            return bool(value)
        elif isinstance_safe(value, str):
            return self.str_to_bool(value)
        raise RecordCustomError('bool_parsing', 'Input should be a valid boolean')

    @staticmethod
    def str_to_bool(value: str) -> bool:
        if value.strip().lower() in ('0', 'false', 'f', 'n', 'no', 'off'):
            return False
        elif value.strip().lower() in ('1', 'true', 't', 'y', 'yes', 'on'):
            return True
        raise RecordCustomError('bool_parsing', 'Input should be a valid boolean, unable to interpret string')


class IntegerValidator(Validator):
    """整型验证器

    Class indices and counts never get rounded: ``2.0`` is accepted as ``2``
    but ``2.5`` is an error.
    """

    validator_name: str = 'int'
    annotation = int

    def validate(self, value) -> int:
        if isinstance_safe(value, bool):
            return int(value)
        if isinstance_safe(value, (int, np.integer)):
            return int(value)
        if isinstance_safe(value, str):
            text = value.strip()
            try:
                return int(text)
            except ValueError:
                pass
            try:
                return self.float_to_int(float(text))
            except (ValueError, RecordCustomError):
                raise RecordCustomError('int_parsing', 'Input should be a valid integer, unable to parse string')
        if isinstance_safe(value, (float, np.floating)):
            return self.float_to_int(float(value))
        raise RecordCustomError('int_type', 'Input should be a valid integer')

    @staticmethod
    def float_to_int(value: float) -> int:
        if not math.isfinite(value) or value != int(value):
            raise RecordCustomError('int_from_float', 'Input should be a valid integer, got a number with a fractional part')
        return int(value)


class FloatValidator(Validator):
    """浮点验证器"""

    validator_name: str = 'float'
    annotation = float

    def __init__(self, allow_inf_nan: bool = True, **kwargs):
        super().__init__(**kwargs)
        self.allow_inf_nan = allow_inf_nan

    def validate(self, value) -> float:
        if isinstance_safe(value, bool):
            raise RecordCustomError('float_type', 'Input should be a valid number')
        if isinstance_safe(value, (int, float, np.integer, np.floating)):
            result = float(value)
        elif isinstance_safe(value, str):
            try:
                result = float(value.strip())
            except ValueError:
                raise RecordCustomError('float_parsing', 'Input should be a valid number, unable to parse string')
        else:
            raise RecordCustomError('float_type', 'Input should be a valid number')
        if not self.allow_inf_nan and not math.isfinite(result):
            raise RecordCustomError('finite_number', 'Input should be a finite number')
        return result


class BoundedValidator(Validator):
    """数值范围验证器 (ge / gt / le / lt)"""

    validator_name = 'bounded'

    def __init__(self, validator: Validator, ge: optional[number] = None, gt: optional[number] = None,
                 le: optional[number] = None, lt: optional[number] = None, **kwargs):
        super().__init__(**kwargs)
        self.validator = validator
        self.annotation = validator.annotation
        self.ge, self.gt, self.le, self.lt = ge, gt, le, lt

    def validate(self, value):
        value = self.validator.validate(value)
        if self.ge is not None and not value >= self.ge:
            raise RecordCustomError('greater_than_equal', 'Input should be greater than or equal to {ge}',
                                    {'ge': self.ge})
        if self.gt is not None and not value > self.gt:
            raise RecordCustomError('greater_than', 'Input should be greater than {gt}', {'gt': self.gt})
        if self.le is not None and not value <= self.le:
            raise RecordCustomError('less_than_equal', 'Input should be less than or equal to {le}',
                                    {'le': self.le})
        if self.lt is not None and not value < self.lt:
            raise RecordCustomError('less_than', 'Input should be less than {lt}', {'lt': self.lt})
        return value

    @property
    def name(self) -> str:
        return self.validator.name


class OptionalValidator(Validator):
    """可空类型验证器

    An empty string counts as missing, which is how CSV encodes an absent
    optional cell.
    """

    validator_name = 'optional'
    annotation = Optional
    validator: Validator

    def __init__(self, validator: Validator, empty_as_none: bool = True, **kwargs):
        super().__init__(**kwargs)
        self.validator = validator
        self.empty_as_none = empty_as_none

    def validate(self, value) -> optional[Any]:
        if value is None or (self.empty_as_none and isinstance_safe(value, str) and not value.strip()):
            return None
        return self.validator.validate(value)

    @classmethod
    def build(cls, annotation: _T, **kwargs):
        args = type_parser.non_none_args(annotation)
        inner = args[0] if len(args) == 1 else Union[args]  # type: ignore
        empty_as_none = kwargs.pop('empty_as_none', True)
        return cls(validator=matching_validator(inner, **kwargs), empty_as_none=empty_as_none)

    @property
    def name(self) -> str:
        return f"{self.validator_name}[{self.validator.name}]"


class UnionValidator(Validator):
    """联合类型验证器: first member that validates wins"""

    validator_name = 'union'
    annotation = Union
    validators: List[Validator]

    def __init__(self, validators: List[Validator], **kwargs):
        super().__init__(**kwargs)
        self.validators = validators

    def validate(self, value):
        err: optional[ErrorDetail] = None
        for validator in self.validators:
            errs: List[ErrorDetail] = []
            v = validate_iter_with_catch(value, validator, [], errs)
            if not errs:
                return v
            err = errs[-1]
        raise RecordCustomError(err.exception_type, err.msg)

    @classmethod
    def build(cls, annotation: _T, **kwargs):
        args = get_args(annotation)
        if not args:
            raise ValidatorBuildingError(f"Union annotation needs at least one member to build {cls.__name__}")
        return cls(validators=[matching_validator(sub, **kwargs) for sub in args])

    @property
    def name(self) -> str:
        return f"{self.validator_name}[{', '.join([val.name for val in self.validators])}]"


class LiteralValidator(Validator):
    """字面量类型验证器

    Integer literals also accept their textual form, so ``"1"`` read from a
    CSV cell matches ``Literal[0, 1]``.
    """

    validator_name = 'literal'
    annotation = Literal
    expected_values: Tuple[Any, ...]

    def __init__(self, *expected: Any, **kwargs):
        super().__init__(**kwargs)
        self.expected_values = expected
        self.int_values = all(isinstance(v, int) and not isinstance(v, bool) for v in expected)

    def validate(self, value):
        if not isinstance_safe(value, bool) and value in self.expected_values:
            for expected in self.expected_values:
                if expected == value:
                    return expected
        if self.int_values and isinstance_safe(value, (str, float, np.integer, np.floating)):
            try:
                maybe_int = IntegerValidator().validate(value)
            except RecordCustomError:
                maybe_int = None
            if maybe_int in self.expected_values:
                return maybe_int
        raise RecordCustomError('literal_error', 'Input should be {expected}',
                                {'expected': self.format_expected_values})

    @classmethod
    def build(cls, annotation, **kwargs):
        if not type_parser.is_literal(annotation):
            raise ValidatorBuildingError(f"Literal annotation required to build {cls.__name__}")
        return cls(*get_args(annotation))

    @property
    def name(self) -> str:
        return f'{self.validator_name}[{", ".join([f"{value!r}" for value in self.expected_values])}]'

    @property
    def format_expected_values(self):
        return ' or '.join([f"{value!r}" for value in self.expected_values])


class RecordValidator(Validator):
    """嵌套记录验证器"""

    validator_name = 'record'

    def __init__(self, annotation: _T, **kwargs):
        super().__init__(**kwargs)
        self.annotation = annotation

    def validate(self, value):
        if isinstance_safe(value, self.annotation):
            return value
        if isinstance_safe(value, Mapping):
            return self.annotation.from_object(dict(value))
        raise RecordCustomError('record_type', 'Input should be a mapping or an instance of {record}',
                                {'record': _format_type(self.annotation)})

    @property
    def name(self) -> str:
        return _format_type(self.annotation)

    @classmethod
    def build(cls, annotation: _T, **kwargs) -> 'RecordValidator':
        if not type_parser.is_record(annotation):
            raise ValidatorBuildingError(f'{annotation} is not a record class')
        return cls(annotation=annotation)


class ArrayValidator(Validator):
    """numpy 数组验证器: coerces any numeric sequence to a float64 array"""

    validator_name = 'ndarray'
    annotation = np.ndarray

    def __init__(self, ndim: optional[int] = 1, allow_inf_nan: bool = False,
                 min_length: optional[int] = None, max_length: optional[int] = None, **kwargs):
        super().__init__(**kwargs)
        self.ndim = ndim
        self.allow_inf_nan = allow_inf_nan
        self.min_length = min_length
        self.max_length = max_length

    def validate(self, value) -> np.ndarray:
        if isinstance_safe(value, (str, bytes, Mapping)):
            raise RecordCustomError('array_type', 'Input should be a numeric array')
        try:
            array = np.array(value, dtype=np.float64)
        except (TypeError, ValueError):
            raise RecordCustomError('array_type', 'Input should be a numeric array')
        if self.ndim is not None and array.ndim != self.ndim:
            raise RecordCustomError('array_ndim', 'Input should have {ndim} dimension(s), got {got}',
                                    {'ndim': self.ndim, 'got': array.ndim})
        if not self.allow_inf_nan and not np.all(np.isfinite(array)):
            raise RecordCustomError('finite_number', 'Array entries should be finite numbers')
        check_collection_length(np.ndarray, len(array), self.min_length, self.max_length)
        array.setflags(write=False)
        return array


class DictValidator(Validator):
    """字典验证器"""

    validator_name = 'dict'
    annotation = dict
    key_validator: Validator
    value_validator: Validator

    def __init__(self, key_validator: Validator, value_validator: Validator, min_length: optional[int] = None,
                 max_length: optional[int] = None, **kwargs):
        super().__init__(**kwargs)
        self.key_validator = key_validator
        self.value_validator = value_validator
        self.min_length = min_length
        self.max_length = max_length

    def validate(self, value) -> dict:
        if not isinstance_safe(value, Mapping):
            raise RecordCustomError('dict_type', 'Input should be a valid mapping')
        check_collection_length(self.annotation, len(value), self.min_length, self.max_length)
        if self.key_validator.annotation is Any and self.value_validator.annotation is Any:
            return dict(value)
        errs: List[ErrorDetail] = []
        new_dict: dict = dict()
        for key, dict_value in value.items():
            validated_key = validate_iter_with_catch(key, self.key_validator, [key, '[key]'], errs)
            validated_value = validate_iter_with_catch(dict_value, self.value_validator, [key], errs)
            new_dict[validated_key] = validated_value
        if errs:
            raise ValidationError(title=self.name, line_errors=errs)
        return new_dict

    @classmethod
    def build(cls, annotation: _T, **kwargs) -> 'DictValidator':
        lengths, bounds = _split_length_kwargs(kwargs)
        annotation_args = get_args(annotation)
        key_validator = matching_validator(annotation_args[0]) if annotation_args else BASE_VALIDATORS[Any]
        value_validator = (matching_validator(annotation_args[1], **bounds) if len(annotation_args) >= 2
                           else BASE_VALIDATORS[Any])
        return cls(key_validator, value_validator, **lengths)

    @property
    def name(self) -> str:
        return f'{self.validator_name}[{self.key_validator.name}, {self.value_validator.name}]'


class ListValidator(Validator):
    """列表验证器; numeric bounds apply to every item"""

    validator_name = 'list'
    annotation = list
    item_validator: Validator

    def __init__(self, item_validator: Validator, min_length: optional[int] = None,
                 max_length: optional[int] = None, **kwargs):
        super().__init__(**kwargs)
        self.item_validator = item_validator
        self.min_length = min_length
        self.max_length = max_length

    def validate(self, value) -> list:
        collection = extract_collection(value, 'list_type', 'list')
        check_collection_length(self.annotation, len(collection), self.min_length, self.max_length)
        if self.item_validator.annotation is Any:
            return list(collection)
        errs: List[ErrorDetail] = []
        result: list = [
            validate_iter_with_catch(item, self.item_validator, [i], errs)
            for i, item in enumerate(collection)
        ]
        if errs:
            raise ValidationError(title=self.name, line_errors=errs)
        return result

    @classmethod
    def build(cls, annotation: _T, **kwargs) -> 'ListValidator':
        lengths, bounds = _split_length_kwargs(kwargs)
        args = get_args(annotation)
        item_validator = matching_validator(args[0] if args else Any, **bounds)
        return cls(item_validator=item_validator, **lengths)

    @property
    def name(self) -> str:
        return f'{self.validator_name}[{self.item_validator.name}]'


class TupleValidator(Validator):
    """元组验证器: ``Tuple[X, ...]`` is variadic, ``Tuple[X, Y]`` positional"""

    validator_name = 'tuple'
    annotation = tuple

    def __init__(self, validators: List[Validator], variadic: bool = False, min_length: optional[int] = None,
                 max_length: optional[int] = None, **kwargs):
        super().__init__(**kwargs)
        self.validators = validators
        self.variadic = variadic
        self.min_length = min_length
        self.max_length = max_length

    def validate(self, value) -> tuple:
        collection = extract_collection(value, 'tuple_type', 'tuple')
        check_collection_length(self.annotation, len(collection), self.min_length, self.max_length)
        if not self.variadic and len(collection) != len(self.validators):
            raise RecordCustomError('tuple_length', 'Tuple should have {expected} items, not {got}',
                                    {'expected': len(self.validators), 'got': len(collection)})
        errs: List[ErrorDetail] = []
        result = tuple(
            validate_iter_with_catch(item, self.validators[0] if self.variadic else self.validators[i], [i], errs)
            for i, item in enumerate(collection)
        )
        if errs:
            raise ValidationError(title=self.name, line_errors=errs)
        return result

    @classmethod
    def build(cls, annotation: _T, **kwargs) -> 'TupleValidator':
        lengths, bounds = _split_length_kwargs(kwargs)
        args = list(get_args(annotation))
        variadic = not args or Ellipsis in args
        if Ellipsis in args:
            args.remove(Ellipsis)
        validators = [matching_validator(sub, **bounds) for sub in args] or [BASE_VALIDATORS[Any]]
        if variadic and len(validators) > 1:
            raise ValidatorBuildingError('A variadic tuple can only have one item type')
        return cls(validators=validators, variadic=variadic, **lengths)

    @property
    def name(self) -> str:
        return f'{self.validator_name}[{", ".join([val.name for val in self.validators])}]'


class IsInstanceValidator(Validator):
    """实例验证器 (fallback for arbitrary classes)"""

    validator_name = 'is-instance'

    def __init__(self, annotation: _T, **kwargs):
        super().__init__(**kwargs)
        self.annotation = annotation

    def validate(self, value):
        if isinstance_safe(value, self.annotation):
            return value
        raise RecordCustomError('is_instance_of', 'Input should be an instance of {cls}',
                                {'cls': _format_type(self.annotation)})

    @classmethod
    def build(cls, annotation: _T, **kwargs) -> 'IsInstanceValidator':
        return cls(annotation=annotation)

    @property
    def name(self) -> str:
        return f'{self.validator_name}[{_format_type(self.annotation)}]'


def _split_length_kwargs(kwargs: dict) -> Tuple[dict, dict]:
    lengths = {k: kwargs[k] for k in ('min_length', 'max_length') if kwargs.get(k) is not None}
    rest = {k: v for k, v in kwargs.items() if k not in ('min_length', 'max_length')}
    return lengths, rest


def matching_validator(annotation: _T, **kwargs) -> Validator:
    """匹配验证器

    ``kwargs`` carries field metadata: numeric bounds (``ge``/``gt``/``le``/
    ``lt``), ``min_length``/``max_length``, ``allow_inf_nan`` and
    ``empty_as_none``.  Containers forward bounds to their items.
    """
    annotation = type_parser.repair_type(annotation)
    kwargs = {k: v for k, v in kwargs.items() if v is not None}
    # Optional原型为Union, 必须先于Union匹配
    if type_parser.is_optional(annotation):
        return OptionalValidator.build(annotation, **kwargs)
    kwargs.pop('empty_as_none', None)
    if type_parser.is_union(annotation):
        return UnionValidator.build(annotation, **kwargs)
    if type_parser.is_literal(annotation):
        return LiteralValidator.build(annotation)
    if type_parser.is_record(annotation):
        return RecordValidator.build(annotation)
    if type_parser.is_ndarray(annotation):
        return ArrayValidator(**_without_bounds(kwargs))
    if type_parser.is_dict(annotation):
        return DictValidator.build(annotation, **kwargs)
    if type_parser.is_tuple(annotation):
        return TupleValidator.build(annotation, **kwargs)
    if type_parser.is_list(annotation):
        return ListValidator.build(annotation, **kwargs)

    bounds = {k: kwargs[k] for k in _BOUND_KEYS if k in kwargs}
    validator_cls = MATCH_VALIDATOR.get(annotation)
    if validator_cls is None:
        validator = IsInstanceValidator.build(annotation)
    elif len(kwargs) == len(bounds) and annotation in BASE_VALIDATORS:
        validator = BASE_VALIDATORS[annotation]
    else:
        validator = validator_cls(**_without_bounds(kwargs))
    if bounds:
        return BoundedValidator(validator, **bounds)
    return validator


def _without_bounds(kwargs: dict) -> dict:
    return {k: v for k, v in kwargs.items() if k not in _BOUND_KEYS}


def validate_iter_with_catch(
    v,
    val: Validator,
    loc: List[Any],
    errs: List[ErrorDetail],
    exception_type: optional[str] = None,
    errmsg: optional[str] = None
) -> optional[Any]:
    """捕捉异常: validate ``v`` and collect failures under ``loc``"""
    try:
        return val.validate(v)
    except ValidationError as e:
        for error in e.errors():
            error.loc[:0] = loc
        errs.extend(e.line_errors)
    except RecordCustomError as e:
        errs.append(ErrorDetail(
            loc=list(loc),
            input_value=v,
            exception_type=e.exception_type,
            msg=e.message(),
            ctx=e.context,
        ))
    except (ValueError, TypeError) as e:
        errs.append(ErrorDetail(
            loc=list(loc),
            input_value=v,
            exception_type=exception_type or type(e),
            msg=errmsg or str(e),
        ))
    return v


def check_collection_length(annotation, length: int, min_length: optional[int], max_length: optional[int]):
    """检查集合长度"""
    annotation_texts = {
        list: 'List',
        tuple: 'Tuple',
        dict: 'Dictionary',
        str: 'String',
        np.ndarray: 'Array',
    }
    annotation_text = annotation_texts.get(annotation, 'Collection')
    if min_length is not None and length < min_length:
        raise RecordCustomError(
            'too_short',
            f'{annotation_text} should have at least {min_length} item(s), not {length}'
        )
    elif max_length is not None and length > max_length:
        raise RecordCustomError(
            'too_long',
            f'{annotation_text} should have at most {max_length} item(s), not {length}'
        )


def extract_collection(v, exception_type: str = 'collection_type', type_text: str = 'collection'):
    """尝试将其作为一个可迭代可获取长度的东西，但排除字符串和映射类型"""
    if isinstance_safe(v, (list, tuple)):
        return v
    if isinstance_safe(v, np.ndarray):
        return v.tolist()
    elif (not isinstance_safe(v, (str, bytes, bytearray, Mapping))
          and isinstance_safe(v, collections.abc.Collection)):
        return list(v)
    raise RecordCustomError(exception_type, f'Input should be a valid {type_text}')


BASE_VALIDATORS: Dict[Any, Validator] = {
    Any: AnyValidator(),
    str: StringValidator(),
    bool: BoolValidator(),
    int: IntegerValidator(),
    float: FloatValidator(),
}

MATCH_VALIDATOR = {
    Any: AnyValidator,
    str: StringValidator,
    bool: BoolValidator,
    int: IntegerValidator,
    float: FloatValidator,
}
