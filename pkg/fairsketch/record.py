# -*- coding:utf-8 -*-
import inspect
import json
import sys
import typing
from dataclasses import Field as DataclassField
from types import MemberDescriptorType
from typing import Any, ClassVar, Dict, Type

from .constants import (_T, _RECORD_CONFIG_NAME, _RECORD_FIELDS_NAME, _RECORD_DECORATORS_NAME,
                        _RECORD_SERIALIZER_NAME, _RECORD_DESERIALIZER_NAME)
from .decorators import RecordDecoratorInfo
from .exceptions import ErrorDetail, ValidationError
from .field import Field, MISSING
from .record_config import RecordConfig
from .serializer import RecordSerializer, RecordDeserializer, matching_serializer
from .type_parser import type_parser
from .types import optional, SerializeMode
from .utils import record_repr, is_valid_field_name
from .validator import matching_validator


def _resolve_annotations(cls) -> Dict[str, Any]:
    # Resolve string annotations against the defining module; fall back to
    # the raw annotation when a forward reference cannot be resolved yet.
    raw = inspect.get_annotations(cls)
    module = sys.modules.get(cls.__module__)
    _globals = module.__dict__ if module else {}
    resolved = {}
    for name, annotation in raw.items():
        if isinstance(annotation, str):
            try:
                annotation = eval(annotation, _globals, dict(vars(cls)))
            except NameError:
                pass
        resolved[name] = annotation
    return resolved


def _generate_field(cls, field_name: str, annotation: Any, config: RecordConfig) -> Field:
    # 如果默认值不是从Field派生的，则它只是一个普通的默认值。将其转换为Field()。
    field_or_default = cls.__dict__.get(field_name, MISSING)
    if isinstance(field_or_default, Field):
        """已是Field对象"""
        field = field_or_default
    elif isinstance(field_or_default, DataclassField):
        """原始数据类字段"""
        field = Field(default=field_or_default.default,
                      default_factory=(None if field_or_default.default_factory is MISSING
                                       else field_or_default.default_factory),
                      repr=field_or_default.repr)
    else:
        if isinstance(field_or_default, MemberDescriptorType):
            # 这是__slots__中的字段，因此它没有默认值。
            field_or_default = MISSING
        field = Field(default=field_or_default)

    field.name = field_name
    field.set_annotation(annotation)
    if field.required is None:
        field.required = not field.has_default
    field.frozen = field.frozen or config.frozen

    # For real fields, disallow mutable defaults for known types.
    if isinstance(field.default, (list, dict, set)):
        raise ValueError(
            f'mutable default {type(field.default)} for field {field.name} is not allowed: use default_factory')

    # 组装验证器参数传递
    options = field.validator_options()
    if annotation is float or type_parser.non_none_args(annotation) == (float,):
        options.setdefault('allow_inf_nan', config.allow_inf_nan)
    if config.str_strip_whitespace and annotation is str:
        options.setdefault('strip_whitespace', True)
    # 查找对应类型的验证器
    field.validator = matching_validator(annotation, **options)
    # 查找对应类型到序列化器
    field.serializer = matching_serializer(annotation)
    return field


def generate_record(cls: Type[_T]) -> Type[_T]:
    """生成记录类"""

    # Derived class fields overwrite base class fields, but the order is
    # defined by the base class, which is found first.
    # 派生类字段覆盖基类字段，但顺序由基类定义，该基类首先找到。
    record_fields: Dict[str, Field] = {}

    config = cls.__dict__.get(_RECORD_CONFIG_NAME)
    if not isinstance(config, RecordConfig):
        inherited = getattr(cls, _RECORD_CONFIG_NAME, None)
        config = inherited if isinstance(inherited, RecordConfig) else RecordConfig()
        setattr(cls, _RECORD_CONFIG_NAME, config)

    for base in cls.__mro__[-1:0:-1]:
        base_fields = base.__dict__.get(_RECORD_FIELDS_NAME)
        if base_fields:
            record_fields.update(base_fields)

    for name, annotation in _resolve_annotations(cls).items():
        if type_parser.is_class_var(annotation) or name.startswith('_'):
            continue
        record_fields[name] = _generate_field(cls, name, annotation, config)
        # 实例上的值由反序列化器写入, 类上不留 Field
        if name in cls.__dict__:
            delattr(cls, name)

    for field_name, value in cls.__dict__.items():
        if isinstance(value, Field):
            raise TypeError(f'{field_name!r} is a field but has no type annotation')

    # 记住我们班上的所有字段（包括基数）。这还将该类标记为记录类。
    setattr(cls, _RECORD_FIELDS_NAME, record_fields)
    setattr(cls, _RECORD_DECORATORS_NAME, RecordDecoratorInfo.build(cls))
    setattr(cls, _RECORD_DESERIALIZER_NAME, RecordDeserializer(cls))
    setattr(cls, _RECORD_SERIALIZER_NAME, RecordSerializer(cls))

    if config.frozen and config.eq:
        cls.__hash__ = Record.__frozen_hash__
    return cls


class RecordMeta(type):

    def __new__(mcs, name, bases, dct, **kwargs):
        if not bases:
            # 这是正在创建的记录类本身，不需要任何逻辑
            return super().__new__(mcs, name, bases, dct, **kwargs)
        _cls = super().__new__(mcs, name, bases, dct, **kwargs)
        return generate_record(_cls)


class Record(metaclass=RecordMeta):
    """Base class for validated records 用于创建带验证的记录类的基类

    Subclasses declare typed fields; construction validates every field,
    collects all failures and raises them together as one
    ``ValidationError``.
    """

    """记录配置"""
    record_config: ClassVar[RecordConfig] = RecordConfig()

    """在记录类上定义的字段的元数据"""
    record_fields: ClassVar[Dict[str, Field]] = {}

    __record_deserializer__: ClassVar[RecordDeserializer]

    __record_serializer__: ClassVar[RecordSerializer]

    __record_decorators__: ClassVar[RecordDecoratorInfo]

    def __init__(self, /, **kwargs):
        """隐藏特定代码的回溯信息，以便在发生异常时，使回溯信息更加简洁和有意义。"""
        __tracebackhide__ = True
        self.__record_deserializer__.deserialize(kwargs, instance=self)

    @property
    def record_extra(self) -> Dict[str, Any]:
        """Keys kept because the config says ``extra='allow'``."""
        return self.__dict__.get('__record_extra__') or {}

    def record_post_init(self, context: optional[Any] = None):
        """
        Override this method to perform additional initialization after `__init__``.
        重写此方法以在`__init__`之后执行附加初始化。
        """
        pass

    def to_dict(
        self,
        *,
        mode: SerializeMode = 'python',
        by_alias: bool = True,
        exclude_none: bool = False,
        errors: str = 'warn'
    ) -> Dict[str, Any]:
        return self.__record_serializer__.to_python(
            self,
            mode=mode,
            by_alias=by_alias,
            exclude_none=exclude_none,
            errors=errors
        )

    def to_json_str(
        self,
        *,
        indent: optional[int] = None,
        ensure_ascii: bool = True,
        by_alias: bool = True,
        exclude_none: bool = False,
        sort_keys: bool = False,
        errors: str = 'warn'
    ) -> str:
        return json.dumps(self.to_dict(mode='json', by_alias=by_alias, exclude_none=exclude_none, errors=errors),
                          indent=indent, ensure_ascii=ensure_ascii, sort_keys=sort_keys)

    @classmethod
    def from_object(cls: Type[_T], obj: Any, *, context: optional[Any] = None) -> _T:
        """来自任意的对象反序列化 (mapping or attribute bearer)"""
        return cls.__record_deserializer__.deserialize(obj, context=context)

    @classmethod
    def from_json_str(cls: Type[_T], text: str) -> _T:
        return cls.from_object(json.loads(text))

    def replace(self: _T, **changes) -> _T:
        """A validated copy with ``changes`` applied."""
        data = self.to_dict(mode='python', by_alias=False)
        data.update(self.record_extra)
        data.update(changes)
        return self.__class__.from_object(data)

    def __str__(self):
        return f"{self.__class__.__name__}({record_repr(self, ', ')})"

    def __repr__(self) -> str:
        return self.__str__()

    def __eq__(self, other):
        if not self.record_config.eq or other.__class__ is not self.__class__:
            return NotImplemented
        return (self.to_dict(mode='json', errors='ignore') == other.to_dict(mode='json', errors='ignore')
                and self.record_extra == other.record_extra)

    def __frozen_hash__(self):
        return hash((self.__class__.__name__, self.to_json_str(sort_keys=True, errors='ignore')))

    def __setattr__(self, key, value) -> None:
        if not is_valid_field_name(key):
            object.__setattr__(self, key, value)
            return
        self._check_frozen(key, value)
        return super().__setattr__(key, value)

    def _check_frozen(self, key, value):
        if self.record_config.frozen:
            typ = 'frozen_instance'
        elif getattr(self.record_fields.get(key), 'frozen', False):
            typ = 'frozen_field'
        else:
            return
        err: ErrorDetail = ErrorDetail([key], value, typ, 'Instance is frozen')
        raise ValidationError(title=self.__class__.__name__, line_errors=[err])


# 供类型检查器使用
RecordType = typing.TypeVar('RecordType', bound=Record)
