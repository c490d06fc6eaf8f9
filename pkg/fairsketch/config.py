# -*- coding:utf-8 -*-
"""
实验配置 Experiment config documents

A config is one JSON object, validated by ``ExperimentConfig`` with
``extra='forbid'`` so a mistyped key is an error rather than a silent
default.  ``fairsketch train --schema`` prints the JSON schema.
"""
import json
import os
from typing import Any, Dict, List, Tuple, Union

from loguru import logger

from .constants import DEFAULT_IMAGE_SIZE, DEFAULT_SPLIT_RATIOS, PROTECTED, UNPROTECTED
from .data import LabeledExample, load_attribute_manifest, load_features_csv, make_proxy_dataset
from .decorators import field_validator, record_validator
from .exceptions import ConfigError, FormatError, ValidationError
from .field import field
from .model import TrainConfig
from .record import Record
from .record_config import RecordConfig
from .sketch import SketchParams, image_features, load_image, matching_operator
from .types import Condition, DatasetKind, FprMode, optional
from .utils import config_hash

"""相对路径按配置文件所在目录解析"""
_PATH_KEYS = ('path', 'image_root')


class DatasetConfig(Record):
    """数据集小节"""

    record_config = RecordConfig(frozen=True, extra='forbid')

    kind: DatasetKind

    """属性文件或特征表; synthetic 时为空"""
    path: optional[str] = None

    """一个属性列, 或多个 one-hot 列"""
    label_attr: optional[Union[str, List[str]]] = None

    z_attr: optional[str] = None

    z_positive_values: optional[List[str]] = None

    """数值列二值化阈值, e.g. age ≥ 60"""
    z_threshold: optional[float] = None

    id_column: optional[str] = None

    image_root: optional[str] = None

    """图像已由 sketchify 转换"""
    preconverted: bool = False

    n: optional[int] = field(default=None, ge=2, description='size of a synthetic dataset')

    seed: optional[int] = field(default=None, ge=0, description='generator seed, defaults to the train seed')

    @field_validator('path', 'image_root')
    def _path_exists(cls, value):
        if value is not None and not os.path.exists(value):
            raise ValueError(f'path does not exist: {value}')
        return value

    @record_validator
    def _kind_requirements(self):
        if self.kind == 'synthetic':
            if self.n is None:
                raise ValueError('a synthetic dataset needs n')
            return
        if self.path is None:
            raise ValueError(f'a {self.kind} dataset needs a path')
        if self.kind == 'attribute_manifest' and (self.label_attr is None or self.z_attr is None):
            raise ValueError('an attribute manifest needs label_attr and z_attr')
        if self.z_positive_values is not None and self.z_threshold is not None:
            raise ValueError('give z_positive_values or z_threshold, not both')


class ExperimentConfig(Record):
    """一次实验: dataset × condition × training"""

    record_config = RecordConfig(frozen=True, extra='forbid')

    name: str = field(min_length=1)

    dataset: DatasetConfig

    condition: Condition = 'original'

    sketch: SketchParams = field(default_factory=SketchParams)

    train: TrainConfig

    fpr_mode: FprMode = 'standard'

    image_size: int = field(default=DEFAULT_IMAGE_SIZE, ge=1, description='classifier input is image_size²')

    """为真时 train.layer_dims[0] 由特征宽度决定"""
    infer_input_width: bool = True

    split_ratios: Tuple[float, float, float] = DEFAULT_SPLIT_RATIOS

    group_names: Dict[int, str] = field(
        default_factory=lambda: {UNPROTECTED: 'unprotected', PROTECTED: 'protected'})

    output_dir: str = 'runs'

    @property
    def seed(self) -> int:
        return self.train.seed

    @property
    def with_fairness(self) -> bool:
        return self.train.lam > 0

    @property
    def config_hash(self) -> str:
        return config_hash(self.to_dict(mode='json'))

    @property
    def run_dir(self) -> str:
        return os.path.join(self.output_dir, self.name)

    def with_overrides(self, seed: optional[int] = None, condition: optional[Condition] = None,
                       lam: optional[float] = None, output_dir: optional[str] = None) -> 'ExperimentConfig':
        """Command-line overrides, validated like the document itself."""
        train = self.train
        train_changes = {}
        if seed is not None:
            train_changes['seed'] = seed
        if lam is not None:
            train_changes['lam'] = lam
        if train_changes:
            train = train.replace(**train_changes)
        changes: Dict[str, Any] = {'train': train}
        if condition is not None:
            changes['condition'] = condition
        if output_dir is not None:
            changes['output_dir'] = output_dir
        return self.replace(**changes)


def _resolve_paths(document: Dict[str, Any], base: str) -> Dict[str, Any]:
    dataset = document.get('dataset')
    if isinstance(dataset, dict):
        dataset = dict(dataset)
        for key in _PATH_KEYS:
            value = dataset.get(key)
            if isinstance(value, str) and value and not os.path.isabs(value):
                dataset[key] = os.path.normpath(os.path.join(base, value))
        document = dict(document, dataset=dataset)
    return document


def load_experiment_config(path: str) -> ExperimentConfig:
    """Read and validate a JSON config; dataset paths are relative to the config file."""
    try:
        with open(path, encoding='utf-8') as f:
            document = json.load(f)
    except OSError as e:
        raise ConfigError('cannot read config {path}: {reason}', path=path, reason=str(e))
    except ValueError as e:
        raise FormatError('config {path} is not valid JSON: {reason}', path=path, reason=str(e))
    if not isinstance(document, dict):
        raise FormatError('config {path} must hold a JSON object', path=path)
    document = _resolve_paths(document, os.path.dirname(os.path.abspath(path)))
    config = ExperimentConfig.from_object(document)
    logger.debug('loaded config {} ({})', config.name, config.config_hash[:12])
    return config


def _image_file(example: LabeledExample, preconverted: bool) -> str:
    path = example.image_path
    if preconverted and not os.path.exists(path):
        # sketchify 总是输出 PNG
        return os.path.splitext(path)[0] + '.png'
    return path


def load_examples(config: ExperimentConfig) -> List[LabeledExample]:
    """Labeled feature vectors for ``config``, images passed through the condition's operator."""
    dataset = config.dataset
    if dataset.kind == 'synthetic':
        seed = config.seed if dataset.seed is None else dataset.seed
        return make_proxy_dataset(dataset.n, seed)
    if dataset.kind == 'features_csv':
        if isinstance(dataset.label_attr, list):
            raise ConfigError('a features table has a single label column')
        return load_features_csv(dataset.path, id_column=dataset.id_column or 'id',
                                 label_column=dataset.label_attr or 'label', z_column=dataset.z_attr or 'z')

    examples = load_attribute_manifest(
        dataset.path, dataset.label_attr, dataset.z_attr, dataset.z_positive_values,
        z_threshold=dataset.z_threshold, id_column=dataset.id_column, image_root=dataset.image_root,
    )
    operator = matching_operator('original' if dataset.preconverted else config.condition, config.sketch)
    featurized = []
    for example in examples:
        image = operator.apply(load_image(_image_file(example, dataset.preconverted)))
        featurized.append(example.replace(features=image_features(image, config.image_size)))
    widths = {example.features.size for example in featurized}
    if len(widths) != 1:
        raise FormatError('images yield feature vectors of different widths {widths}; '
                          'mixing grayscale and colour files is not supported', widths=sorted(widths))
    logger.info('{} images featurized under condition {}', len(featurized), config.condition)
    return featurized


def resolve_train_config(config: ExperimentConfig, feature_width: int) -> TrainConfig:
    train = config.train
    if train.layer_dims[0] == feature_width:
        return train
    if not config.infer_input_width:
        raise ConfigError('layer_dims starts with {dims} inputs but features have {width} columns',
                          dims=train.layer_dims[0], width=feature_width)
    logger.info('input width set to {} from the features', feature_width)
    try:
        return train.replace(layer_dims=[feature_width] + list(train.layer_dims[1:]))
    except ValidationError as e:
        raise ConfigError('{reason}', reason=e.first_message())
