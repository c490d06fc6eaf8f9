# -*- coding:utf-8 -*-
"""
群体公平指标 Group fairness metrics

Every metric works on the one-vs-rest reduction of ``positive_class`` and
compares the protected group (z=1) with the unprotected group (z=0).
Multiclass logs are audited as the unweighted macro average of the per-class
scores.
"""
import warnings
from typing import Any, Dict, Iterable, List, NamedTuple, Sequence, Tuple

import numpy as np
from loguru import logger

from .constants import GROUPS, PROTECTED, UNPROTECTED
from .exceptions import (
    ConfigError, DegenerateCellWarning, EmptyLog, FairSketchError, MalformedRecord, MissingGroup,
    SkippedCellWarning, UndefinedRate
)
from .field import field
from .record import Record
from .record_config import RecordConfig
from .types import FprMode, GroupFlag, optional
from .decorators import record_validator


class PredictionRecord(Record):
    """一条预测记录 One evaluated example"""

    record_config = RecordConfig(extra='allow', frozen=True)

    id: str = field(min_length=1)

    """真实类别"""
    y_true: int = field(ge=0)

    """预测类别"""
    y_pred: int = field(ge=0)

    """正类置信度, 仅二分类"""
    score: optional[float] = field(default=None, ge=0.0, le=1.0)

    """敏感属性 0 = unprotected, 1 = protected"""
    z: GroupFlag


class GroupConfusion(Record):
    """单个群体的一对多混淆计数"""

    record_config = RecordConfig(frozen=True)

    tp: int = field(ge=0)
    fp: int = field(ge=0)
    tn: int = field(ge=0)
    fn: int = field(ge=0)
    n: int = field(ge=0)

    @record_validator
    def _counts_partition(self):
        if self.tp + self.fp + self.tn + self.fn != self.n:
            raise ValueError(f'tp+fp+tn+fn = {self.tp + self.fp + self.tn + self.fn} but n = {self.n}')

    @property
    def positives(self) -> int:
        return self.tp + self.fn

    @property
    def negatives(self) -> int:
        return self.fp + self.tn

    @property
    def positive_rate(self) -> float:
        return (self.tp + self.fp) / self.n if self.n else float('nan')

    @property
    def tpr(self) -> float:
        return self.tp / self.positives if self.positives else float('nan')

    @property
    def fpr(self) -> float:
        return self.fp / self.negatives if self.negatives else float('nan')

    @property
    def error_rate(self) -> float:
        return (self.fp + self.fn) / self.n if self.n else float('nan')


class GroupPRF(Record):
    """群体的 precision / recall / F1"""

    record_config = RecordConfig(frozen=True)

    precision: float = field(ge=0.0, le=1.0)
    recall: float = field(ge=0.0, le=1.0)
    f1: float = field(ge=0.0, le=1.0)

    """是否出现 0/0 单元 (reported as 0)"""
    degenerate: bool = False

    def __iter__(self):
        return iter((self.precision, self.recall, self.f1))


class FairnessReport(Record):
    """一次审计的全部指标"""

    record_config = RecordConfig(frozen=True)

    spd: float = field(ge=0.0, le=1.0)
    eod: float = field(ge=0.0, le=1.0)
    deo: float = field(ge=0.0, le=1.0)
    aod: float = field(ge=-0.5, le=1.0)
    accuracy: float = field(ge=0.0, le=1.0)
    per_group: Dict[int, GroupPRF] = field(default_factory=dict)
    fpr_mode: FprMode = 'standard'
    num_classes: int = field(default=2, ge=1)
    positive_class: int = field(default=1, ge=0)
    n_records: int = field(default=0, ge=0)

    """宏平均时跳过的单元, e.g. ``eod[class=3]``"""
    skipped: List[str] = field(default_factory=list)

    """config hash, seed and source of the audited log"""
    meta: Dict[str, Any] = field(default_factory=dict)

    @record_validator
    def _aod_range(self):
        if self.fpr_mode == 'standard' and self.aod < 0.0:
            raise ValueError('aod must be non-negative in standard mode')
        if self.fpr_mode == 'as_written' and self.aod > 0.5:
            raise ValueError('aod must lie in [-0.5, 0.5] in as_written mode')

    @property
    def is_binary(self) -> bool:
        return self.num_classes <= 2


class LogArrays(NamedTuple):
    """记录序列的数组视图"""

    ids: List[str]
    y_true: np.ndarray
    y_pred: np.ndarray
    z: np.ndarray
    num_classes: int


def as_arrays(records: Iterable[Any], positive_class: int = 1, num_classes: optional[int] = None) -> LogArrays:
    """Collect records into integer arrays and check class indices.

    ``num_classes`` defaults to one more than the largest index seen (at
    least two).  An index outside ``[0, num_classes)`` is a malformed record.
    """
    records = list(records)
    if not records:
        raise EmptyLog()
    ids = [str(r.id) for r in records]
    y_true = np.fromiter((r.y_true for r in records), dtype=np.int64, count=len(records))
    y_pred = np.fromiter((r.y_pred for r in records), dtype=np.int64, count=len(records))
    z = np.fromiter((r.z for r in records), dtype=np.int64, count=len(records))
    if num_classes is None:
        num_classes = max(2, int(max(y_true.max(), y_pred.max())) + 1)
    for i in range(len(records)):
        for name, value in (('y_true', y_true[i]), ('y_pred', y_pred[i])):
            if not 0 <= value < num_classes:
                raise MalformedRecord(f'{name}={value} is not a class index below {num_classes}',
                                      record_id=ids[i])
        if z[i] not in GROUPS:
            raise MalformedRecord(f'z={z[i]} is not 0 or 1', record_id=ids[i])
    if not 0 <= positive_class < num_classes:
        raise ConfigError('positive_class {positive_class} is not a class of a {num_classes}-class log',
                          positive_class=positive_class, num_classes=num_classes)
    return LogArrays(ids, y_true, y_pred, z, num_classes)


def confusion_from_arrays(y_true: np.ndarray, y_pred: np.ndarray, z: np.ndarray,
                          positive_class: int = 1) -> Dict[int, GroupConfusion]:
    """Per-group one-vs-rest counts; groups without records are left out."""
    actual = np.asarray(y_true) == positive_class
    predicted = np.asarray(y_pred) == positive_class
    z = np.asarray(z)
    confusion: Dict[int, GroupConfusion] = {}
    for group in GROUPS:
        member = z == group
        n = int(member.sum())
        if not n:
            continue
        confusion[group] = GroupConfusion(
            tp=int((member & actual & predicted).sum()),
            fp=int((member & ~actual & predicted).sum()),
            tn=int((member & ~actual & ~predicted).sum()),
            fn=int((member & actual & ~predicted).sum()),
            n=n,
        )
    return confusion


def group_confusion(records: Sequence[Any], positive_class: int = 1,
                    num_classes: optional[int] = None) -> Dict[int, GroupConfusion]:
    log = as_arrays(records, positive_class, num_classes)
    return confusion_from_arrays(log.y_true, log.y_pred, log.z, positive_class)


def _both_groups(confusion: Dict[int, GroupConfusion]) -> Tuple[GroupConfusion, GroupConfusion]:
    for group in (PROTECTED, UNPROTECTED):
        if group not in confusion:
            raise MissingGroup(group)
    return confusion[PROTECTED], confusion[UNPROTECTED]


def _defined(rate: str, value: float, group: int, label: str) -> float:
    if np.isnan(value):
        raise UndefinedRate(rate, group, label)
    return value


def _tpr_pair(confusion: Dict[int, GroupConfusion], positive_class: int) -> Tuple[float, float]:
    protected, unprotected = _both_groups(confusion)
    label = f'y={positive_class}'
    return (_defined('TPR', protected.tpr, PROTECTED, label),
            _defined('TPR', unprotected.tpr, UNPROTECTED, label))


def _fpr_pair(confusion: Dict[int, GroupConfusion], positive_class: int) -> Tuple[float, float]:
    protected, unprotected = _both_groups(confusion)
    label = f'y!={positive_class}'
    return (_defined('FPR', protected.fpr, PROTECTED, label),
            _defined('FPR', unprotected.fpr, UNPROTECTED, label))


def spd_from_confusion(confusion: Dict[int, GroupConfusion]) -> float:
    protected, unprotected = _both_groups(confusion)
    return abs(protected.positive_rate - unprotected.positive_rate)


def eod_from_confusion(confusion: Dict[int, GroupConfusion], positive_class: int = 1) -> float:
    tpr1, tpr0 = _tpr_pair(confusion, positive_class)
    return abs(tpr1 - tpr0)


def deo_from_confusion(confusion: Dict[int, GroupConfusion], positive_class: int = 1) -> float:
    tpr1, tpr0 = _tpr_pair(confusion, positive_class)
    fpr1, fpr0 = _fpr_pair(confusion, positive_class)
    return max(abs(tpr1 - tpr0), abs(fpr1 - fpr0))


def aod_from_confusion(confusion: Dict[int, GroupConfusion], positive_class: int = 1,
                       fpr_mode: FprMode = 'standard') -> float:
    tpr1, tpr0 = _tpr_pair(confusion, positive_class)
    fpr1, fpr0 = _fpr_pair(confusion, positive_class)
    if fpr_mode == 'standard':
        return 0.5 * (abs(tpr1 - tpr0) + abs(fpr1 - fpr0))
    if fpr_mode == 'as_written':
        protected, unprotected = _both_groups(confusion)
        return 0.5 * (abs(tpr1 - tpr0) - abs(protected.error_rate - unprotected.error_rate))
    raise ConfigError("fpr_mode must be 'standard' or 'as_written', got '{fpr_mode}'", fpr_mode=fpr_mode)


def spd_from_arrays(y_pred: np.ndarray, z: np.ndarray, positive_class: int = 1) -> float:
    """|P(ŷ=pos|z=1) − P(ŷ=pos|z=0)| straight from prediction and group arrays."""
    y_pred = np.asarray(y_pred)
    z = np.asarray(z)
    rates = {}
    for group in (PROTECTED, UNPROTECTED):
        member = z == group
        if not member.any():
            raise MissingGroup(group)
        rates[group] = float(np.mean(y_pred[member] == positive_class))
    return abs(rates[PROTECTED] - rates[UNPROTECTED])


def statistical_parity_difference(records: Sequence[Any], positive_class: int = 1) -> float:
    return spd_from_confusion(group_confusion(records, positive_class))


def equal_opportunity_difference(records: Sequence[Any], positive_class: int = 1) -> float:
    return eod_from_confusion(group_confusion(records, positive_class), positive_class)


def equalized_odds_difference(records: Sequence[Any], positive_class: int = 1) -> float:
    """Max over y ∈ {positive, non-positive} of the group gap in P(ŷ=pos | y)."""
    return deo_from_confusion(group_confusion(records, positive_class), positive_class)


def average_odds_difference(records: Sequence[Any], positive_class: int = 1,
                            fpr_mode: FprMode = 'standard') -> float:
    """
    standard:   ½(|ΔTPR| + |ΔFPR|) with FPR = fp / (fp + tn)
    as_written: ½(|ΔTPR| − |ΔERR|) with ERR = P(ŷ ≠ y), which can be negative
    """
    return aod_from_confusion(group_confusion(records, positive_class), positive_class, fpr_mode)


def accuracy(records: Sequence[Any]) -> float:
    log = as_arrays(records)
    return float(np.mean(log.y_true == log.y_pred))


def _prf(confusion: GroupConfusion) -> Tuple[float, float, float, bool]:
    degenerate = False
    predicted = confusion.tp + confusion.fp
    if predicted:
        precision = confusion.tp / predicted
    else:
        precision, degenerate = 0.0, True
    if confusion.positives:
        recall = confusion.tp / confusion.positives
    else:
        recall, degenerate = 0.0, True
    if precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    else:
        f1, degenerate = 0.0, True
    return precision, recall, f1, degenerate


def prf_from_arrays(log: LogArrays, positive_class: int = 1) -> Dict[int, GroupPRF]:
    classes = [positive_class] if log.num_classes <= 2 else list(range(log.num_classes))
    per_class = [confusion_from_arrays(log.y_true, log.y_pred, log.z, c) for c in classes]
    result: Dict[int, GroupPRF] = {}
    for group in GROUPS:
        if group not in per_class[0]:
            continue
        cells = np.array([_prf(confusion[group]) for confusion in per_class], dtype=np.float64)
        degenerate = bool(cells[:, 3].any())
        if degenerate:
            warnings.warn(f'group z={group} has a 0/0 precision, recall or F1 cell; reported as 0',
                          DegenerateCellWarning, stacklevel=3)
        precision, recall, f1 = cells[:, :3].mean(axis=0)
        result[group] = GroupPRF(precision=float(precision), recall=float(recall), f1=float(f1),
                                 degenerate=degenerate)
    return result


def per_group_prf(records: Sequence[Any], positive_class: int = 1) -> Dict[int, GroupPRF]:
    """Binary logs: P/R/F1 of ``positive_class``. Multiclass: macro average over classes."""
    return prf_from_arrays(as_arrays(records, positive_class), positive_class)


def _named(metric: str, compute, *args):
    try:
        return compute(*args)
    except FairSketchError as e:
        raise e.named(metric)


def _macro(metric: str, compute, per_class: List[Dict[int, GroupConfusion]], skipped: List[str], *args) -> float:
    values = []
    last_error: optional[FairSketchError] = None
    for c, confusion in enumerate(per_class):
        try:
            values.append(compute(confusion, c, *args))
        except UndefinedRate as e:
            last_error = e
            skipped.append(f'{metric.lower()}[class={c}]')
            warnings.warn(f'{metric}: skipped class {c}, {e.message()}', SkippedCellWarning, stacklevel=3)
    if not values:
        raise last_error.named(metric)
    return float(np.mean(values))


def audit(records: Sequence[Any], positive_class: int = 1, fpr_mode: FprMode = 'standard',
          num_classes: optional[int] = None, meta: optional[Dict[str, Any]] = None) -> FairnessReport:
    """All four fairness metrics, accuracy and per-group P/R/F1 in one report."""
    if fpr_mode not in ('standard', 'as_written'):
        raise ConfigError("fpr_mode must be 'standard' or 'as_written', got '{fpr_mode}'", fpr_mode=fpr_mode)
    log = as_arrays(records, positive_class, num_classes)
    skipped: List[str] = []
    if log.num_classes <= 2:
        confusion = confusion_from_arrays(log.y_true, log.y_pred, log.z, positive_class)
        spd = _named('SPD', spd_from_confusion, confusion)
        eod = _named('EOD', eod_from_confusion, confusion, positive_class)
        deo = _named('DEO', deo_from_confusion, confusion, positive_class)
        aod = _named('AOD', aod_from_confusion, confusion, positive_class, fpr_mode)
    else:
        per_class = [confusion_from_arrays(log.y_true, log.y_pred, log.z, c) for c in range(log.num_classes)]
        # 缺失群体在宏平均中也是硬错误
        _named('SPD', _both_groups, per_class[0])
        spd = float(np.mean([spd_from_confusion(confusion) for confusion in per_class]))
        eod = _macro('EOD', eod_from_confusion, per_class, skipped)
        deo = _macro('DEO', deo_from_confusion, per_class, skipped)
        aod = _macro('AOD', aod_from_confusion, per_class, skipped, fpr_mode)
    report = FairnessReport(
        spd=spd,
        eod=eod,
        deo=deo,
        aod=aod,
        accuracy=float(np.mean(log.y_true == log.y_pred)),
        per_group=prf_from_arrays(log, positive_class),
        fpr_mode=fpr_mode,
        num_classes=log.num_classes,
        positive_class=positive_class,
        n_records=len(log.ids),
        skipped=skipped,
        meta=dict(meta or {}),
    )
    logger.debug('audited {} records ({} classes): spd={:.4f} eod={:.4f} deo={:.4f} aod={:.4f}',
                 report.n_records, report.num_classes, spd, eod, deo, aod)
    return report
