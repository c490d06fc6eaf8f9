# -*- coding:utf-8 -*-
from dataclasses import dataclass, field as dataclass_field
from typing import Any, Callable, Dict, List, Tuple, Type, Union

from .field import Field

"""装饰器在函数上留下的标记"""
_FIELD_VALIDATOR_MARK = '__record_field_validator__'
_RECORD_VALIDATOR_MARK = '__record_validator__'


@dataclass
class Decorator:
    """基础的装饰器信息"""

    class_name: str
    func: Callable[..., Any]


@dataclass
class FieldValidatorDecoratorInfo(Decorator):
    """自定义字段验证装饰器: ``func(cls, value) -> value``"""

    fields: Tuple[str, ...]


@dataclass
class RecordValidatorDecoratorInfo(Decorator):
    """自定义记录验证装饰器: ``func(self) -> None``, runs once every field is set"""


@dataclass
class RecordDecoratorInfo:
    """记录类装饰器信息"""

    field_validators: Dict[str, List[FieldValidatorDecoratorInfo]] = dataclass_field(default_factory=dict)

    record_validators: List[RecordValidatorDecoratorInfo] = dataclass_field(default_factory=list)

    @classmethod
    def build(cls, record_cls: Type[Any]) -> 'RecordDecoratorInfo':
        decorator_info = cls()
        seen = set()
        # 子类优先, 同名方法只收集一次
        for klass in record_cls.__mro__:
            for attr_name, attr in vars(klass).items():
                if attr_name in seen:
                    continue
                func = getattr(attr, '__func__', attr)
                fields = getattr(func, _FIELD_VALIDATOR_MARK, None)
                if fields is not None:
                    seen.add(attr_name)
                    info = FieldValidatorDecoratorInfo(klass.__name__, func, fields)
                    for name in fields:
                        decorator_info.field_validators.setdefault(name, []).append(info)
                elif getattr(func, _RECORD_VALIDATOR_MARK, False):
                    seen.add(attr_name)
                    decorator_info.record_validators.append(RecordValidatorDecoratorInfo(klass.__name__, func))
        known = getattr(record_cls, 'record_fields', {})
        unknown = [name for name in decorator_info.field_validators if name not in known]
        if unknown:
            raise TypeError(f'`@field_validator` on {record_cls.__name__} names unknown field(s) {unknown}')
        return decorator_info


def field_validator(field: Union[str, Field], *fields: Union[str, Field]):
    """自定义字段验证

    The decorated function becomes a classmethod receiving the already
    type-checked value; it returns the value to store or raises
    ``ValueError``.
    """
    names = [f.name if isinstance(f, Field) else f for f in (field, *fields)]
    if not all(isinstance(name, str) for name in names):
        raise RuntimeError(
            '`@field_validator` 字段应作为单独的字符串或字段参数传递。 '
            "E.g. usage should be `@field_validator('<field_name_1>', '<field_name_2>', ...)`"
        )

    def decorator(func):
        func = getattr(func, '__func__', func)
        setattr(func, _FIELD_VALIDATOR_MARK, tuple(names))
        return classmethod(func)

    return decorator


def record_validator(func: Callable[..., Any]):
    """自定义记录验证: cross-field checks, raise ``ValueError`` to reject"""
    setattr(func, _RECORD_VALIDATOR_MARK, True)
    return func
