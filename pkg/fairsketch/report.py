# -*- coding:utf-8 -*-
"""
结果表 Side-by-side comparison of finished runs

Binary runs get one row each with ``ACC↑ SPD↓ DEO↓``.  Multiclass runs get
one row per group with ``Precision↑ Recall↑ F1↑`` followed by the run-level
``SPD↓ EOD↓ AOD↓``.  With more than one run the best value of every column
is flagged.
"""
import csv
import json
import math
import os
from typing import Any, Dict, List, Sequence, Tuple

from .constants import CONFIG_FILE, PROTECTED, REPORT_FILE, UNPROTECTED
from .exceptions import FormatError, IncompatibleRuns, ValidationError
from .field import field
from .globals import GlobalSetting
from .metrics import FairnessReport
from .record import Record
from .types import optional

"""(列名, 越大越好)"""
BINARY_COLUMNS: Tuple[Tuple[str, bool], ...] = (('ACC', True), ('SPD', False), ('DEO', False))

MULTICLASS_COLUMNS: Tuple[Tuple[str, bool], ...] = (
    ('Precision', True), ('Recall', True), ('F1', True), ('SPD', False), ('EOD', False), ('AOD', False),
)

DEFAULT_GROUP_NAMES = {UNPROTECTED: 'unprotected', PROTECTED: 'protected'}

STAMP_COLUMNS = ('config_hash', 'seed')


class RunSummary(Record):
    """一个运行目录"""

    run: str

    condition: str = '-'

    """训练时是否带公平项"""
    with_fairness: optional[bool] = None

    report: FairnessReport

    group_names: Dict[int, str] = field(default_factory=lambda: dict(DEFAULT_GROUP_NAMES))

    @property
    def label(self) -> str:
        if self.with_fairness is None:
            return self.condition
        return f"{self.condition} {'+' if self.with_fairness else '-'}L_fair"

    @property
    def stamp(self) -> Dict[str, Any]:
        return {key: self.report.meta.get(key) for key in STAMP_COLUMNS}


class ResultRow(Record):

    run: str
    label: str

    """多分类时的群体名"""
    group: optional[str] = None

    values: Dict[str, float] = field(default_factory=dict)

    best: List[str] = field(default_factory=list)

    """产生该行的运行的 config_hash 与 seed"""
    stamp: Dict[str, Any] = field(default_factory=dict)


def load_run(run_dir: str) -> RunSummary:
    """Summary of a run directory holding ``report.json`` and, after training, ``config.json``."""
    report_path = os.path.join(run_dir, REPORT_FILE)
    try:
        with open(report_path, encoding='utf-8') as f:
            report = FairnessReport.from_object(json.load(f))
    except OSError as e:
        raise FormatError('cannot read {path}: {reason}', path=report_path, reason=str(e))
    except ValueError as e:
        reason = e.first_message() if isinstance(e, ValidationError) else str(e)
        raise FormatError('invalid report {path}: {reason}', path=report_path, reason=reason)

    meta = report.meta
    group_names = dict(DEFAULT_GROUP_NAMES)
    config_path = os.path.join(run_dir, CONFIG_FILE)
    if os.path.exists(config_path):
        with open(config_path, encoding='utf-8') as f:
            names = json.load(f).get('config', {}).get('group_names') or {}
        group_names.update({int(k): v for k, v in names.items()})
    return RunSummary(
        run=meta.get('name') or os.path.basename(os.path.normpath(run_dir)),
        condition=meta.get('condition') or '-',
        with_fairness=meta.get('with_fairness'),
        report=report,
        group_names=group_names,
    )


class ResultTable:
    """比较表"""

    def __init__(self, runs: Sequence[RunSummary]):
        if not runs:
            raise IncompatibleRuns('no runs to compare')
        first = runs[0].report
        for summary in runs[1:]:
            other = summary.report
            if other.is_binary != first.is_binary or other.num_classes != first.num_classes:
                raise IncompatibleRuns('run {run} has {got} classes but {first_run} has {want}',
                                       run=summary.run, got=other.num_classes,
                                       first_run=runs[0].run, want=first.num_classes)
            if other.fpr_mode != first.fpr_mode:
                raise IncompatibleRuns('run {run} uses fpr_mode {got}, {first_run} uses {want}',
                                       run=summary.run, got=other.fpr_mode,
                                       first_run=runs[0].run, want=first.fpr_mode)
        self.runs = list(runs)
        self.is_binary = first.is_binary
        self.columns = BINARY_COLUMNS if self.is_binary else MULTICLASS_COLUMNS
        self.rows = self._build_rows()
        self._flag_best()

    @classmethod
    def from_run_dirs(cls, run_dirs: Sequence[str]) -> 'ResultTable':
        return cls([load_run(run_dir) for run_dir in run_dirs])

    def _build_rows(self) -> List[ResultRow]:
        rows = []
        for summary in self.runs:
            report = summary.report
            if self.is_binary:
                rows.append(ResultRow(run=summary.run, label=summary.label, stamp=summary.stamp,
                                      values={'ACC': report.accuracy, 'SPD': report.spd, 'DEO': report.deo}))
                continue
            for group in sorted(report.per_group):
                prf = report.per_group[group]
                rows.append(ResultRow(
                    run=summary.run,
                    label=summary.label,
                    stamp=summary.stamp,
                    group=summary.group_names.get(group, str(group)),
                    values={'Precision': prf.precision, 'Recall': prf.recall, 'F1': prf.f1,
                            'SPD': report.spd, 'EOD': report.eod, 'AOD': report.aod},
                ))
        return rows

    def _flag_best(self):
        if len(self.runs) < 2:
            return
        decimals = GlobalSetting.get_report_decimals()
        for name, higher_is_better in self.columns:
            values = [row.values[name] for row in self.rows if not math.isnan(row.values[name])]
            if not values:
                continue
            # 按显示精度比较, 打印相同的值同样标记
            best = round(max(values) if higher_is_better else min(values), decimals)
            for row in self.rows:
                value = row.values[name]
                if not math.isnan(value) and round(value, decimals) == best:
                    row.best.append(name)

    @property
    def headers(self) -> List[str]:
        leading = ['run', 'condition'] if self.is_binary else ['run', 'condition', 'group']
        return leading + [f"{name}{'↑' if up else '↓'}" for name, up in self.columns]

    def _cells(self, row: ResultRow, flag: bool) -> List[str]:
        decimals = GlobalSetting.get_report_decimals()
        cells = [row.run, row.label] if self.is_binary else [row.run, row.label, row.group or '']
        for name, _ in self.columns:
            value = row.values[name]
            text = 'nan' if math.isnan(value) else f'{value:.{decimals}f}'
            if flag and name in row.best:
                text += '*'
            cells.append(text)
        return cells

    def render_text(self) -> str:
        """Aligned plain-text table; ``*`` marks the best value of a column."""
        lines = [self.headers] + [self._cells(row, flag=True) for row in self.rows]
        widths = [max(len(line[i]) for line in lines) for i in range(len(self.headers))]
        return '\n'.join('  '.join(cell.ljust(width) for cell, width in zip(line, widths)).rstrip()
                         for line in lines)

    def write_csv(self, path: str):
        with open(path, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(self.headers + ['best'] + list(STAMP_COLUMNS))
            for row in self.rows:
                stamp = [row.stamp.get(key) for key in STAMP_COLUMNS]
                writer.writerow(self._cells(row, flag=False) + [';'.join(row.best)] + stamp)


def render_report(report: FairnessReport, group_names: optional[Dict[int, str]] = None) -> str:
    """Plain-text view of a single audit."""
    names = group_names or DEFAULT_GROUP_NAMES
    decimals = GlobalSetting.get_report_decimals()

    def fmt(value: float) -> str:
        return 'nan' if math.isnan(value) else f'{value:.{decimals}f}'

    lines = [
        f'records   {report.n_records}',
        f'classes   {report.num_classes}',
        f'accuracy  {fmt(report.accuracy)}',
        f'SPD↓      {fmt(report.spd)}',
        f'EOD↓      {fmt(report.eod)}',
        f'DEO↓      {fmt(report.deo)}',
        f'AOD↓      {fmt(report.aod)}  ({report.fpr_mode})',
    ]
    for group in sorted(report.per_group):
        precision, recall, f1 = report.per_group[group]
        lines.append(f'{names.get(group, str(group)):<12} P={fmt(precision)} R={fmt(recall)} F1={fmt(f1)}')
    if report.skipped:
        lines.append(f"skipped   {', '.join(report.skipped)}")
    return '\n'.join(lines)
