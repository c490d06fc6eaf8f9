# -*- coding:utf-8 -*-
import types
from collections.abc import Mapping, Sequence
from typing import (
    Any,
    ClassVar,
    Dict,
    List,
    Literal,
    Optional,
    Tuple,
    Union,
    get_args,
    get_origin,
)

import numpy as np

from .constants import _RECORD_FIELDS_NAME
from .utils import isinstance_safe, issubclass_safe


class TypeParser:
    """类型解析器"""

    """必须有子类型的类型"""
    __required_subtype_types__: ClassVar[list] = [Optional, Union, ClassVar, Literal]

    def is_any(self, annotation) -> bool:
        """是否任意类型的"""
        return annotation is Any

    def is_union(self, annotation) -> bool:
        """是否联合类型的 (typing.Union 或 X | Y)"""
        origin = get_origin(annotation)
        return origin is Union or origin is types.UnionType

    def is_optional(self, annotation) -> bool:
        """是否可为空: a union that admits None"""
        return self.is_union(annotation) and type(None) in get_args(annotation)

    def is_literal(self, annotation) -> bool:
        """是否字面量类型的"""
        return get_origin(annotation) is Literal

    def is_class_var(self, annotation) -> bool:
        """是否为类共享类型的"""
        return annotation is ClassVar or get_origin(annotation) is ClassVar

    def is_list(self, annotation) -> bool:
        """是否列表类型的"""
        origin = get_origin(annotation) or annotation
        return origin in (list, List) or issubclass_safe(origin, Sequence) and origin not in (str, bytes, tuple)

    def is_tuple(self, annotation) -> bool:
        """是否元组类型的"""
        origin = get_origin(annotation) or annotation
        return origin in (tuple, Tuple)

    def is_dict(self, annotation) -> bool:
        """是否字典类型的"""
        origin = get_origin(annotation) or annotation
        return origin in (dict, Dict) or issubclass_safe(origin, Mapping)

    def is_ndarray(self, annotation) -> bool:
        """是否为 numpy 数组"""
        return annotation is np.ndarray or get_origin(annotation) is np.ndarray

    def is_record(self, obj) -> bool:
        """是否为记录类 (or an instance of one)"""
        cls = obj if isinstance_safe(obj, type) else type(obj)
        return hasattr(cls, _RECORD_FIELDS_NAME)

    def non_none_args(self, annotation) -> Tuple[Any, ...]:
        return tuple(a for a in get_args(annotation) if a is not type(None))

    def repair_type(self, annotation):
        """检查类型是否合法"""
        if annotation in self.__required_subtype_types__:
            raise RuntimeError(f"{annotation} 必须包含子类型")
        return annotation


"""类型解析器实例（减少类开支）"""
type_parser = TypeParser()
