# -*- coding:utf-8 -*-
import enum
from typing import TypeVar

"""用于类型标注 Used for type annotation"""
_T = TypeVar('_T')


# The name of an attribute on the class where we store the Field
# objects.  Also used to check if a class is a Record.
_RECORD_FIELDS_NAME = 'record_fields'

# The name of an attribute on the class that stores the RecordConfig.
_RECORD_CONFIG_NAME = 'record_config'

_RECORD_SERIALIZER_NAME = '__record_serializer__'

_RECORD_DESERIALIZER_NAME = '__record_deserializer__'

# 记录类装饰器名
_RECORD_DECORATORS_NAME = '__record_decorators__'

# The name of the function, that if it exists, is called at the end of
# __init__.
_POST_INIT_NAME = 'record_post_init'


class SerMode(enum.Enum):

    """到python dict, 数组保留为 numpy.ndarray"""
    python = 'python'

    """到json兼容的dict"""
    json = 'json'


"""敏感属性 z 的取值 (protected / unprotected)"""
PROTECTED = 1
UNPROTECTED = 0
GROUPS = (UNPROTECTED, PROTECTED)

"""70% 训练, 15% 验证, 15% 测试"""
DEFAULT_SPLIT_RATIOS = (0.7, 0.15, 0.15)

"""CelebA 64, ISIC 32"""
DEFAULT_BATCH_SIZE = 64
DEFAULT_LEARNING_RATE = 1e-3
DEFAULT_LAMBDA = 1.0

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

"""灰度权重 (R, G, B)"""
LUMA_WEIGHTS = (0.299, 0.587, 0.114)

"""XDoG 默认参数"""
SKETCH_SIGMA = 1.0
SKETCH_K = 1.6
SKETCH_TAU = 0.98
SKETCH_EPSILON = 0.1
SKETCH_PHI = 10.0

DEFAULT_IMAGE_SIZE = 32

IMAGE_SUFFIXES = ('.png', '.ppm')

PREDICTION_LOG_COLUMNS = ('id', 'y_true', 'y_pred', 'score', 'z')

MANIFEST_COLUMNS = ('input', 'output', 'mode', 'status')

CHECKPOINT_FORMAT = 'fairsketch-checkpoint'
CHECKPOINT_VERSION = 1

"""运行目录中的文件名"""
CHECKPOINT_FILE = 'checkpoint.json'
HISTORY_FILE = 'history.csv'
PREDICTIONS_FILE = 'predictions.csv'
REPORT_FILE = 'report.json'
CONFIG_FILE = 'config.json'
TABLE_FILE = 'table.csv'
SKETCH_MANIFEST_FILE = 'manifest.csv'


class ExitCode(enum.IntEnum):
    """命令行退出码 (stable contract)"""

    OK = 0

    INVALID_INPUT = 2

    NUMERICAL_FAILURE = 3
