# -*- coding:utf-8 -*-
import dataclasses
from typing import Any, Callable, Optional

from .types import optional, number
from .utils import _recursive_repr, _format_type

"""未设置默认值的哨兵"""
MISSING = dataclasses.MISSING


class Field:
    """字段"""

    """字段名"""
    name: str

    """注解"""
    annotation: optional[type]

    """验证器"""
    validator: Any

    """序列化器"""
    serializer: Any

    """默认值"""
    default: Any

    """默认工厂"""
    default_factory: optional[Callable]

    """是否必填; computed from the default when left as None"""
    required: optional[bool]

    """是否显示"""
    repr: bool

    """别名, 同时用于输入与输出 (e.g. ``lambda``)"""
    alias: optional[str]

    """数值约束"""
    ge: optional[number]
    gt: optional[number]
    le: optional[number]
    lt: optional[number]

    """最短 / 最长"""
    min_length: optional[int]
    max_length: optional[int]

    """描述, 写入 JSON schema"""
    description: optional[str]

    """排除序列化"""
    exclude: bool

    """是否冻结"""
    frozen: bool

    """验证器额外参数"""
    validator_kwargs: optional[dict]

    __slots__ = (
        'name',
        'annotation',
        'validator',
        'serializer',
        'default',
        'default_factory',
        'required',
        'repr',
        'alias',
        'ge',
        'gt',
        'le',
        'lt',
        'min_length',
        'max_length',
        'description',
        'exclude',
        'frozen',
        'validator_kwargs',
    )

    def __init__(self, **kwargs):
        for k in self.__slots__:
            setattr(self, k, kwargs.get(k, _DEFAULT_FIELD_VALUES.get(k)))

        if self.default is not MISSING and self.default_factory is not None:
            raise ValueError('cannot specify both default and default_factory')

    def set_annotation(self, annotation):
        if annotation is Optional:
            raise RuntimeError("Optional 必须添加内部类型")
        self.annotation = annotation

    @property
    def has_default(self) -> bool:
        return self.default is not MISSING or self.default_factory is not None

    @property
    def input_names(self) -> tuple:
        """Keys accepted on input: the alias first, then the field name."""
        return (self.alias, self.name) if self.alias else (self.name,)

    @property
    def output_name(self) -> str:
        return self.alias or self.name

    def validator_options(self) -> dict:
        options = dict(self.validator_kwargs or {})
        for key in ('ge', 'gt', 'le', 'lt', 'min_length', 'max_length'):
            value = getattr(self, key)
            if value is not None:
                options[key] = value
        return options

    @_recursive_repr
    def __repr__(self):
        return (f"Field(name={self.name!r}, "
                f"annotation={_format_type(self.annotation)}, "
                f"default={self.default!r}, "
                f"required={self.required!r}, "
                f"alias={self.alias!r}, "
                f"description={self.description!r})")

    def get_default_value(self):
        if self.default_factory is not None:
            return self.default_factory()
        if self.default is MISSING:
            return None
        return self.default


def field(
    default=MISSING,
    *,
    default_factory: optional[Callable] = None,
    alias: optional[str] = None,
    ge: optional[number] = None,
    gt: optional[number] = None,
    le: optional[number] = None,
    lt: optional[number] = None,
    min_length: optional[int] = None,
    max_length: optional[int] = None,
    description: optional[str] = None,
    **kwargs
) -> Field:
    """Declare a record field with a default and validation metadata.

    It is an error to specify both default and default_factory.
    """
    return Field(default=default, default_factory=default_factory, alias=alias, ge=ge, gt=gt, le=le, lt=lt,
                 min_length=min_length, max_length=max_length, description=description, **kwargs)


_DEFAULT_FIELD_VALUES: dict = dict(
    name=None,
    annotation=None,
    validator=None,
    serializer=None,
    default=MISSING,
    default_factory=None,
    required=None,
    repr=True,
    alias=None,
    ge=None,
    gt=None,
    le=None,
    lt=None,
    min_length=None,
    max_length=None,
    description=None,
    exclude=False,
    frozen=False,
    validator_kwargs=None,
)
