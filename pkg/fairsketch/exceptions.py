# -*- coding:utf-8 -*-
import json
from typing import (
    Any, List, Union
)
from .constants import ExitCode
from .types import optional
from .utils import camel_to_snake, _format_type, isinstance_safe


def _format_exception_type(exception_type: Union[str, type]) -> str:
    if isinstance_safe(exception_type, str):
        return exception_type
    if isinstance_safe(exception_type, type):
        return camel_to_snake(exception_type.__name__)
    return camel_to_snake(exception_type.__class__.__name__)


class ErrorDetail:
    """错误详情"""

    """键名索引列表"""
    loc: List[Any]

    """输入值"""
    input_value: Any

    """异常类型"""
    exception_type: str

    """错误信息"""
    msg: str

    """上下文信息"""
    ctx: optional[dict[str, Any]]

    __slots__ = ('loc', 'input_value', 'exception_type', 'msg', 'ctx')

    def __init__(self, loc: List[Any], input_value: Any, exception_type: Union[str, type], msg: str,
                 ctx: optional[dict[str, Any]] = None):
        self.loc = loc
        self.input_value = input_value
        self.exception_type = _format_exception_type(exception_type)
        self.msg = msg
        self.ctx = ctx

    def __str__(self):
        return json.dumps(self.to_dict(), indent=4, ensure_ascii=False, default=repr)

    def __repr__(self):
        return self.__str__()

    def to_dict(self) -> dict:
        return {
            'loc': self.loc,
            'input_value': self.input_value,
            'exception_type': self.exception_type,
            'msg': self.msg,
            'ctx': self.ctx
        }


class ValidationError(ValueError):
    """All field failures of one record construction, raised together."""

    title: str
    line_errors: List[ErrorDetail]

    exit_code: int = ExitCode.INVALID_INPUT

    def __init__(self, title: str, line_errors: List[ErrorDetail], *args):
        super().__init__(*args)
        self.title = title
        self.line_errors = line_errors or []

    def errors(self) -> List[ErrorDetail]:
        return self.line_errors

    def error_count(self) -> int:
        return len(self.line_errors)

    def json(self) -> str:
        return json.dumps([e.to_dict() for e in self.line_errors], indent=4, ensure_ascii=False, default=repr)

    def __str__(self):
        plural = 's' if len(self.line_errors) > 1 else ''
        return f'{len(self.line_errors)} validation error{plural} for {self.title}\n{self.format_line_errors()}'

    def __repr__(self):
        return self.__str__()

    def first_message(self) -> str:
        if not self.line_errors:
            return self.title
        error = self.line_errors[0]
        return f"{'.'.join(str(e) for e in error.loc)}: {error.msg}"

    def format_line_errors(self):
        text = ""
        length = len(self.line_errors)
        for index, error in enumerate(self.line_errors):
            enter_line = '' if index == length - 1 else '\n'
            end_text = (f"["
                        f"exception_type={error.exception_type}, "
                        f"input_value={error.input_value!r}, "
                        f"input_type={_format_type(type(error.input_value))}"
                        f"]")
            text += f"{'.'.join([str(e) for e in error.loc])}\n  {error.msg} {end_text}{enter_line}"
        return text


class RecordCustomError(ValueError):
    """Raised by validators; turned into an ErrorDetail by the caller."""

    exception_type: str
    msg: str
    context: optional[dict]

    def __init__(self, exception_type: str, msg: str, context: optional[dict] = None, *args):
        super().__init__(*args)
        self.exception_type = exception_type
        self.msg = msg
        self.context = context

    def message(self):
        return format_message(self.msg, self.context)

    def __str__(self):
        return self.message()

    def __repr__(self):
        msg = self.message()
        if self.context is not None:
            context_repr = {k: repr(v) for k, v in self.context.items()}
            return f"{msg} [type={self.exception_type}, context={context_repr}]"
        return f"{msg} [type={self.exception_type}, context=None]"


def format_message(msg: str, context: optional[dict]) -> str:
    if not context:
        return msg
    message = msg
    for key, value in context.items():
        placeholder = f"{{{key}}}"
        message = message.replace(placeholder, value if isinstance(value, str) else str(value))
    return message


class ValidatorBuildingError(TypeError):

    def __init__(self, msg: str, *args):
        super().__init__(*args)
        self.msg = msg

    def __str__(self):
        return self.msg

    def __repr__(self):
        return self.__str__()


class SerializationError(ValueError):
    """序列化异常"""

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


class FairSketchError(Exception):
    """领域异常基类

    ``msg`` is a template filled from ``context``; ``exit_code`` is what the
    command line returns when the error reaches it.
    """

    exception_type: str = 'fair_sketch_error'
    exit_code: int = ExitCode.INVALID_INPUT
    msg: str
    context: dict

    def __init__(self, msg: str, context: optional[dict] = None, exception_type: optional[str] = None):
        self.msg = msg
        self.context = dict(context or {})
        if exception_type is not None:
            self.exception_type = exception_type
        super().__init__(self.message())

    def message(self) -> str:
        return format_message(self.msg, self.context)

    def named(self, metric: str) -> 'FairSketchError':
        """Attach the metric that raised this error (used by audit)."""
        self.context['metric'] = metric
        if not self.msg.startswith('{metric}'):
            self.msg = '{metric}: ' + self.msg
        self.args = (self.message(),)
        return self

    def __str__(self):
        return self.message()

    def __repr__(self):
        return f"{self.__class__.__name__}({self.message()!r}, type={self.exception_type})"


class EmptyLog(FairSketchError):
    exception_type = 'empty_log'

    def __init__(self, source: str = 'input'):
        super().__init__('prediction log {source} contains no records', {'source': source})


class MalformedRecord(FairSketchError):
    exception_type = 'malformed_record'

    def __init__(self, reason: str, line: optional[int] = None, record_id: optional[str] = None):
        if line is not None:
            msg = 'record on line {line} is malformed: {reason}'
        else:
            msg = 'record {record_id} is malformed: {reason}'
        super().__init__(msg, {'line': line, 'record_id': record_id, 'reason': reason})

    @property
    def line(self) -> optional[int]:
        return self.context.get('line')


class MissingGroup(FairSketchError):
    exception_type = 'missing_group'

    def __init__(self, group: int, where: str = 'records'):
        super().__init__('group z={group} is absent from the {where}', {'group': group, 'where': where})


class UndefinedRate(FairSketchError):
    exception_type = 'undefined_rate'

    def __init__(self, rate: str, group: int, label: str):
        super().__init__('{rate} is undefined for group z={group}: no records with {label}',
                         {'rate': rate, 'group': group, 'label': label})


class ShapeError(FairSketchError):
    exception_type = 'shape_error'

    def __init__(self, msg: str, **context):
        super().__init__(msg, context)


class MissingGroupInBatch(FairSketchError):
    exception_type = 'missing_group_in_batch'

    def __init__(self, group: int):
        super().__init__('group z={group} has no member in the batch', {'group': group})


class ConfigError(FairSketchError):
    exception_type = 'config_error'

    def __init__(self, msg: str, **context):
        super().__init__(msg, context)


class MismatchedCache(FairSketchError):
    exception_type = 'mismatched_cache'

    def __init__(self, msg: str, **context):
        super().__init__(msg, context)


class NonFiniteLoss(FairSketchError):
    exception_type = 'non_finite_loss'
    exit_code = ExitCode.NUMERICAL_FAILURE

    def __init__(self, epoch: int, batch: int, value: float):
        super().__init__('loss became {value} at epoch {epoch}, batch {batch}',
                         {'epoch': epoch, 'batch': batch, 'value': value})


class FormatError(FairSketchError):
    exception_type = 'format_error'

    def __init__(self, msg: str, **context):
        super().__init__(msg, context)


class EmptyDataset(FairSketchError):
    exception_type = 'empty_dataset'

    def __init__(self, path: str):
        super().__init__('no images found under {path}', {'path': path})


class UnknownAttribute(FairSketchError):
    exception_type = 'unknown_attribute'

    def __init__(self, name: str, available: optional[List[str]] = None):
        super().__init__("unknown attribute '{name}'", {'name': name, 'available': list(available or [])})


class CountMismatch(FairSketchError):
    exception_type = 'count_mismatch'

    def __init__(self, declared: int, actual: int):
        super().__init__('header declares {declared} rows but {actual} were found',
                         {'declared': declared, 'actual': actual})


class IncompatibleRuns(FairSketchError):
    exception_type = 'incompatible_runs'

    def __init__(self, msg: str, **context):
        super().__init__(msg, context)


class DegenerateCellWarning(UserWarning):
    """0/0 precision or recall reported as 0"""


class SkippedCellWarning(UserWarning):
    """An undefined one-vs-rest cell left out of a macro average"""
