# -*- coding:utf-8 -*-
__version__ = '0.1.0'

from .globals import GlobalSetting
from .record_config import RecordConfig
from .field import Field, field
from .type_parser import TypeParser
from .exceptions import (ValidationError, ErrorDetail, RecordCustomError, FairSketchError, EmptyLog,
                         MalformedRecord, MissingGroup, UndefinedRate, ShapeError, MissingGroupInBatch,
                         ConfigError, MismatchedCache, NonFiniteLoss, FormatError, EmptyDataset,
                         UnknownAttribute, CountMismatch, IncompatibleRuns, DegenerateCellWarning,
                         SkippedCellWarning)
from .decorators import field_validator, record_validator
from .record import Record
from .json_schema import JsonSchema
from .metrics import (PredictionRecord, FairnessReport, GroupConfusion, GroupPRF, audit, group_confusion,
                      statistical_parity_difference, equal_opportunity_difference, equalized_odds_difference,
                      average_odds_difference, accuracy, per_group_prf)
from .loss import LossWeights, BatchPrediction, LossValue, cross_entropy_loss, fairness_loss, total_loss
from .data import (LabeledExample, SplitSet, TrainingBatch, load_prediction_log, write_prediction_log,
                   load_attribute_manifest, load_features_csv, make_proxy_dataset, balanced_split, minibatches,
                   epoch_seed)
from .model import (ModelParams, TrainConfig, TrainHistory, EpochRecord, init_params, forward, backward, train,
                    gradient_check, predict_proba, predict, evaluate)
from .checkpoint import Checkpoint, save_checkpoint, load_checkpoint
from .sketch import (ImageBuffer, SketchParams, SketchOperator, to_grayscale, gaussian_blur, xdog_sketch,
                     matching_operator, sketchify_dataset, load_image, save_png, image_features)
from .config import ExperimentConfig, DatasetConfig, load_experiment_config, load_examples
from .report import ResultTable


__all__ = [
    '__version__',
    'GlobalSetting',
    'RecordConfig',
    'Field',
    'field',
    'TypeParser',
    'ValidationError',
    'ErrorDetail',
    'RecordCustomError',
    'FairSketchError',
    'EmptyLog',
    'MalformedRecord',
    'MissingGroup',
    'UndefinedRate',
    'ShapeError',
    'MissingGroupInBatch',
    'ConfigError',
    'MismatchedCache',
    'NonFiniteLoss',
    'FormatError',
    'EmptyDataset',
    'UnknownAttribute',
    'CountMismatch',
    'IncompatibleRuns',
    'DegenerateCellWarning',
    'SkippedCellWarning',
    'field_validator',
    'record_validator',
    'Record',
    'JsonSchema',
    'PredictionRecord',
    'FairnessReport',
    'GroupConfusion',
    'GroupPRF',
    'audit',
    'group_confusion',
    'statistical_parity_difference',
    'equal_opportunity_difference',
    'equalized_odds_difference',
    'average_odds_difference',
    'accuracy',
    'per_group_prf',
    'LossWeights',
    'BatchPrediction',
    'LossValue',
    'cross_entropy_loss',
    'fairness_loss',
    'total_loss',
    'LabeledExample',
    'SplitSet',
    'TrainingBatch',
    'load_prediction_log',
    'write_prediction_log',
    'load_attribute_manifest',
    'load_features_csv',
    'make_proxy_dataset',
    'balanced_split',
    'minibatches',
    'epoch_seed',
    'ModelParams',
    'TrainConfig',
    'TrainHistory',
    'EpochRecord',
    'init_params',
    'forward',
    'backward',
    'train',
    'gradient_check',
    'predict_proba',
    'predict',
    'evaluate',
    'Checkpoint',
    'save_checkpoint',
    'load_checkpoint',
    'ImageBuffer',
    'SketchParams',
    'SketchOperator',
    'to_grayscale',
    'gaussian_blur',
    'xdog_sketch',
    'matching_operator',
    'sketchify_dataset',
    'load_image',
    'save_png',
    'image_features',
    'ExperimentConfig',
    'DatasetConfig',
    'load_experiment_config',
    'load_examples',
    'ResultTable',
]
