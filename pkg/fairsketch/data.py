# -*- coding:utf-8 -*-
"""
数据读取与划分 Data ingestion, the balanced split protocol and mini-batching
"""
import csv
import json
import math
import os
from typing import Any, Dict, Iterator, List, Sequence, Tuple, Union

import numpy as np
from loguru import logger

from .constants import DEFAULT_SPLIT_RATIOS, GROUPS, PREDICTION_LOG_COLUMNS, PROTECTED, UNPROTECTED
from .decorators import record_validator
from .exceptions import (
    ConfigError, CountMismatch, EmptyDataset, EmptyLog, FormatError, MalformedRecord, MissingGroup, ShapeError,
    UnknownAttribute, ValidationError
)
from .field import field
from .metrics import PredictionRecord
from .record import Record
from .record_config import RecordConfig
from .types import GroupFlag, optional

"""JSON-lines 扩展名"""
JSONL_SUFFIXES = ('.jsonl', '.ndjson', '.json')

"""比例之和容差"""
RATIO_TOL = 1e-9


class LabeledExample(Record):
    """带标签样本: a feature vector, an image path or both"""

    record_config = RecordConfig(frozen=True)

    id: str = field(min_length=1)

    features: optional[np.ndarray] = None

    image_path: optional[str] = None

    label: int = field(ge=0)

    z: GroupFlag

    @record_validator
    def _has_input(self):
        if self.features is None and self.image_path is None:
            raise ValueError('an example needs features or an image_path')


class SplitSet(Record):
    """train / val / test 划分"""

    train: List[LabeledExample] = field(default_factory=list)
    val: List[LabeledExample] = field(default_factory=list)
    test: List[LabeledExample] = field(default_factory=list)
    seed: int = field(default=0, ge=0)
    ratios: Tuple[float, float, float] = DEFAULT_SPLIT_RATIOS

    """为平衡群体而丢弃的样本 id"""
    discarded: List[str] = field(default_factory=list, repr=False)

    def __iter__(self):
        return iter((self.train, self.val, self.test))

    @property
    def sizes(self) -> Tuple[int, int, int]:
        return len(self.train), len(self.val), len(self.test)


class TrainingBatch:
    """一个小批次"""

    ids: List[str]
    features: np.ndarray
    labels: np.ndarray
    z: np.ndarray

    __slots__ = ('ids', 'features', 'labels', 'z')

    def __init__(self, ids: List[str], features: np.ndarray, labels: np.ndarray, z: np.ndarray):
        self.ids = ids
        self.features = features
        self.labels = labels
        self.z = z

    def __len__(self):
        return len(self.ids)

    def __repr__(self):
        return f'TrainingBatch(size={len(self.ids)})'


def stack_examples(examples: Sequence[LabeledExample]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """features ``(n, d)``, labels ``(n,)`` and z ``(n,)`` of examples that carry features"""
    if not examples:
        raise ShapeError('cannot stack an empty example list')
    missing = [e.id for e in examples if e.features is None]
    if missing:
        raise ShapeError('examples without features: {ids}', ids=missing[:5])
    widths = {e.features.shape[0] for e in examples}
    if len(widths) != 1:
        raise ShapeError('feature vectors have different lengths {widths}', widths=sorted(widths))
    features = np.vstack([e.features for e in examples])
    labels = np.fromiter((e.label for e in examples), dtype=np.int64, count=len(examples))
    z = np.fromiter((e.z for e in examples), dtype=np.int64, count=len(examples))
    return features, labels, z


def epoch_seed(seed: int, epoch: int) -> int:
    """Shuffling seed of one epoch, derived from the run seed."""
    return int(np.random.SeedSequence([seed, epoch]).generate_state(1, dtype=np.uint64)[0])


def minibatches(examples: Sequence[LabeledExample], batch_size: int, epoch_seed: int) -> List[TrainingBatch]:
    """Seeded shuffle cut into batches of ``batch_size``; the final short batch is kept."""
    if batch_size < 1:
        raise ConfigError('batch_size must be at least 1, got {batch_size}', batch_size=batch_size)
    examples = list(examples)
    if not examples:
        return []
    features, labels, z = stack_examples(examples)
    order = np.random.default_rng(epoch_seed).permutation(len(examples))
    batches = []
    for start in range(0, len(order), batch_size):
        index = order[start:start + batch_size]
        batches.append(TrainingBatch([examples[i].id for i in index], features[index], labels[index], z[index]))
    return batches


def _blank_to_none(row: Dict[str, Any]) -> Dict[str, Any]:
    return {k: (None if isinstance(v, str) and not v.strip() else v) for k, v in row.items() if k is not None}


def _iter_log_rows(path: str) -> Iterator[Tuple[int, Dict[str, Any]]]:
    if path.lower().endswith(JSONL_SUFFIXES):
        with open(path, 'r', encoding='utf-8') as f:
            for line_no, line in enumerate(f, 1):
                if not line.strip():
                    continue
                try:
                    row = json.loads(line)
                except json.JSONDecodeError as e:
                    raise MalformedRecord(f'invalid JSON ({e.msg})', line=line_no)
                if not isinstance(row, dict):
                    raise MalformedRecord('expected a JSON object', line=line_no)
                yield line_no, row
        return
    with open(path, 'r', encoding='utf-8', newline='') as f:
        reader = csv.DictReader(f)
        header = reader.fieldnames or []
        missing = [c for c in PREDICTION_LOG_COLUMNS if c not in header and c != 'score']
        if header and missing:
            raise FormatError('prediction log {path} lacks columns {missing}', path=path, missing=missing)
        for row in reader:
            if None in row:
                raise MalformedRecord('more cells than header columns', line=reader.line_num)
            yield reader.line_num, row


def load_prediction_log(path: str) -> List[PredictionRecord]:
    """CSV with header ``id,y_true,y_pred,score,z`` or JSON lines, one record per row."""
    records: List[PredictionRecord] = []
    unknown = set()
    for line_no, row in _iter_log_rows(path):
        try:
            record = PredictionRecord.from_object(_blank_to_none(row))
        except ValidationError as e:
            raise MalformedRecord(e.first_message(), line=line_no)
        unknown.update(record.record_extra)
        records.append(record)
    if not records:
        raise EmptyLog(path)
    if unknown:
        logger.debug('{}: kept unknown columns {}', path, sorted(unknown))
    logger.debug('loaded {} prediction records from {}', len(records), path)
    return records


def write_prediction_log(records: Sequence[PredictionRecord], path: str, constants: optional[Dict[str, Any]] = None):
    """``constants`` become extra columns repeated on every row (config hash, seed)."""
    constants = dict(constants or {})
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(PREDICTION_LOG_COLUMNS + tuple(constants))
        for r in records:
            writer.writerow([r.id, r.y_true, r.y_pred, '' if r.score is None else repr(r.score), r.z]
                            + list(constants.values()))


def _to_number(value: str, line: int, column: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise MalformedRecord(f"column '{column}' holds {value!r}, not a number", line=line)


def _class_index(value: str, line: int, column: str) -> int:
    number = _to_number(value, line, column)
    if number == -1:
        # ±1 属性编码
        return 0
    if number < 0 or number != int(number):
        raise MalformedRecord(f"column '{column}' holds {value!r}, not a class index", line=line)
    return int(number)


def _group_flag(value: str, line: int, column: str, positive_values: optional[Sequence[str]],
                threshold: optional[float]) -> int:
    if threshold is not None:
        return int(_to_number(value, line, column) >= threshold)
    if positive_values is not None:
        normalized = {str(v).strip() for v in positive_values}
        if value.strip() in normalized:
            return PROTECTED
        try:
            return int(any(float(value) == float(v) for v in normalized))
        except ValueError:
            return UNPROTECTED
    number = _to_number(value, line, column)
    if number == 1:
        return PROTECTED
    if number in (0, -1):
        return UNPROTECTED
    raise MalformedRecord(f"column '{column}' holds {value!r}; set z_positive_values or z_threshold", line=line)


def _read_attribute_table(path: str) -> Tuple[List[str], List[Tuple[int, List[str]]]]:
    """header (id column first) and data rows with their line numbers"""
    with open(path, 'r', encoding='utf-8', newline='') as f:
        lines = f.read().splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise EmptyDataset(path)
    first = lines[0].strip()
    if first.isdigit():
        # CelebA: 行数, 属性名, 然后 `filename ±1 ...`
        declared = int(first)
        if len(lines) < 2:
            raise FormatError('{path}: missing the attribute name line', path=path)
        names = lines[1].split()
        rows = []
        for line_no, line in enumerate(lines[2:], 3):
            if not line.strip():
                continue
            cells = line.split()
            if len(cells) != len(names) + 1:
                raise MalformedRecord(f'expected {len(names) + 1} cells, found {len(cells)}', line=line_no)
            rows.append((line_no, cells))
        if len(rows) != declared:
            raise CountMismatch(declared, len(rows))
        return ['filename'] + names, rows
    reader = csv.reader(lines)
    header = [h.strip() for h in next(reader)]
    rows = []
    for cells in reader:
        if not any(c.strip() for c in cells):
            continue
        if len(cells) != len(header):
            raise MalformedRecord(f'expected {len(header)} cells, found {len(cells)}', line=reader.line_num)
        rows.append((reader.line_num, [c.strip() for c in cells]))
    return header, rows


def load_attribute_manifest(
    path: str,
    label_attr: Union[str, Sequence[str]],
    z_attr: str,
    z_positive_values: optional[Sequence[str]] = None,
    *,
    z_threshold: optional[float] = None,
    id_column: optional[str] = None,
    image_root: optional[str] = None,
) -> List[LabeledExample]:
    """Labeled image examples from a CelebA attribute file or a generic CSV.

    ``label_attr`` names one attribute column (±1 becomes 1/0) or a list of
    one-hot columns whose argmax is the class.  ``z`` is 1 when the
    ``z_attr`` value is in ``z_positive_values``, is at least
    ``z_threshold``, or equals 1 when neither is given.
    """
    header, rows = _read_attribute_table(path)
    label_columns = [label_attr] if isinstance(label_attr, str) else list(label_attr)
    if not label_columns:
        raise ConfigError('label_attr names no column')
    id_name = id_column or header[0]
    for name in (*label_columns, z_attr, id_name):
        if name not in header:
            raise UnknownAttribute(name, header)
    position = {name: i for i, name in enumerate(header)}
    root = image_root if image_root is not None else os.path.dirname(os.path.abspath(path))
    examples: List[LabeledExample] = []
    for line_no, cells in rows:
        if len(label_columns) == 1:
            label = _class_index(cells[position[label_columns[0]]], line_no, label_columns[0])
        else:
            scores = [_to_number(cells[position[c]], line_no, c) for c in label_columns]
            label = int(np.argmax(scores))
        z = _group_flag(cells[position[z_attr]], line_no, z_attr, z_positive_values, z_threshold)
        identifier = cells[position[id_name]]
        try:
            examples.append(LabeledExample(id=identifier, image_path=os.path.join(root, identifier),
                                           label=label, z=z))
        except ValidationError as e:
            raise MalformedRecord(e.first_message(), line=line_no)
    if not examples:
        raise EmptyDataset(path)
    logger.debug('loaded {} labeled examples from {}', len(examples), path)
    return examples


def load_features_csv(path: str, id_column: str = 'id', label_column: str = 'label',
                      z_column: str = 'z') -> List[LabeledExample]:
    """Tabular examples: ``id,label,z`` followed by numeric feature columns."""
    header, rows = _read_attribute_table(path)
    for name in (id_column, label_column, z_column):
        if name not in header:
            raise UnknownAttribute(name, header)
    position = {name: i for i, name in enumerate(header)}
    feature_columns = [h for h in header if h not in (id_column, label_column, z_column)]
    if not feature_columns:
        raise FormatError('{path} has no feature columns', path=path)
    examples = []
    for line_no, cells in rows:
        try:
            examples.append(LabeledExample(
                id=cells[position[id_column]],
                features=[_to_number(cells[position[c]], line_no, c) for c in feature_columns],
                label=cells[position[label_column]],
                z=cells[position[z_column]],
            ))
        except ValidationError as e:
            raise MalformedRecord(e.first_message(), line=line_no)
    if not examples:
        raise EmptyDataset(path)
    return examples


def make_proxy_dataset(n: int, seed: int, noise_features: int = 2) -> List[LabeledExample]:
    """Synthetic data where z drives the label and one feature leaks z.

    z ~ Bernoulli(0.5); y ~ Bernoulli(0.7) for z=1 and Bernoulli(0.3) for
    z=0; feature 0 is ``z + N(0, 0.5²)``, feature 1 is ``2y − 1 + N(0, 1)``,
    the rest are pure noise.
    """
    if n < 2:
        raise ConfigError('a proxy dataset needs at least 2 examples, got {n}', n=n)
    rng = np.random.default_rng(seed)
    z = rng.integers(0, 2, size=n)
    y = (rng.random(n) < np.where(z == PROTECTED, 0.7, 0.3)).astype(np.int64)
    proxy = z + rng.normal(0.0, 0.5, size=n)
    signal = 2.0 * y - 1.0 + rng.normal(0.0, 1.0, size=n)
    noise = rng.normal(0.0, 1.0, size=(n, noise_features))
    features = np.column_stack([proxy, signal, noise])
    width = len(str(n - 1))
    return [LabeledExample(id=f's{i:0{width}d}', features=features[i], label=int(y[i]), z=int(z[i]))
            for i in range(n)]


def _check_ratios(ratios: Sequence[float]) -> Tuple[float, float, float]:
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3:
        raise ConfigError('split ratios need train, val and test parts, got {ratios}', ratios=list(ratios))
    if any(r < 0 or not math.isfinite(r) for r in ratios):
        raise ConfigError('split ratios must be non-negative, got {ratios}', ratios=list(ratios))
    if abs(sum(ratios) - 1.0) > RATIO_TOL:
        raise ConfigError('split ratios must sum to 1, got {ratios}', ratios=list(ratios))
    return ratios  # type: ignore


def split_sizes(total: int, ratios: Sequence[float]) -> List[int]:
    """Largest-remainder sizes; ties in the remainder go to the earlier split."""
    raw = [r * total for r in ratios]
    sizes = [int(math.floor(x)) for x in raw]
    leftover = total - sum(sizes)
    order = sorted(range(len(raw)), key=lambda i: (-(raw[i] - sizes[i]), i))
    for i in order[:leftover]:
        sizes[i] += 1
    return sizes


def balanced_split(examples: Sequence[LabeledExample], seed: int,
                   ratios: Sequence[float] = DEFAULT_SPLIT_RATIOS) -> SplitSet:
    """Equalize the z groups by seeded down-sampling, then split each group.

    Every split ends up with group counts at most one apart, and every split
    size is within one example of its ratio of the balanced total.
    """
    ratios = _check_ratios(ratios)
    by_group: Dict[int, List[LabeledExample]] = {
        group: sorted((e for e in examples if e.z == group), key=lambda e: e.id) for group in GROUPS
    }
    for group in (PROTECTED, UNPROTECTED):
        if not by_group[group]:
            raise MissingGroup(group, 'dataset')
    rng = np.random.default_rng(seed)
    m = min(len(members) for members in by_group.values())
    discarded: List[str] = []
    for group in GROUPS:
        members = by_group[group]
        if len(members) > m:
            keep = np.sort(rng.choice(len(members), size=m, replace=False))
            kept = set(keep.tolist())
            discarded.extend(members[i].id for i in range(len(members)) if i not in kept)
            by_group[group] = [members[i] for i in keep]
            logger.info('balancing: discarded {} of {} examples with z={}', len(members) - m, len(members), group)
    shuffled = {group: [by_group[group][i] for i in rng.permutation(m)] for group in GROUPS}

    sizes = split_sizes(2 * m, ratios)
    parts: List[List[LabeledExample]] = []
    cursor = {group: 0 for group in GROUPS}
    odd_turn = PROTECTED
    for size in sizes:
        share = {PROTECTED: size // 2, UNPROTECTED: size // 2}
        if size % 2:
            share[odd_turn] += 1
            odd_turn = UNPROTECTED if odd_turn == PROTECTED else PROTECTED
        part: List[LabeledExample] = []
        for group in (PROTECTED, UNPROTECTED):
            part.extend(shuffled[group][cursor[group]:cursor[group] + share[group]])
            cursor[group] += share[group]
        parts.append(part)
    logger.debug('split sizes {} from {} balanced examples', sizes, 2 * m)
    return SplitSet(train=parts[0], val=parts[1], test=parts[2], seed=seed, ratios=ratios, discarded=discarded)
