# -*- coding:utf-8 -*-
import dataclasses

from .types import optional, ExtraValues


@dataclasses.dataclass
class RecordConfig:
    """记录类配置"""

    """标题, JSON schema 使用; 默认为类名"""
    title: optional[str] = None

    """描述"""
    description: optional[str] = None

    """
    *`allow`-允许任何额外的属性, kept in ``record_extra``。
    *`forbid`-禁止任何额外的属性。
    *`ignore`-忽略任何额外的属性。
    """
    extra: ExtraValues = 'ignore'

    """记录是否是伪不可变的"""
    frozen: bool = False

    """是否允许无穷大和NaN值浮动字段"""
    allow_inf_nan: bool = True

    """是否为str类型去掉前导和尾部空白"""
    str_strip_whitespace: bool = False

    """相等比较基于字段值"""
    eq: bool = True

    def __post_init__(self):
        if self.extra not in ('allow', 'ignore', 'forbid'):
            raise ValueError(f'extra must be allow, ignore or forbid, got {self.extra!r}')
