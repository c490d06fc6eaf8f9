# -*- coding:utf-8 -*-
"""
命令行 ``fairsketch sketchify | train | audit | report``

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""
import argparse
import csv
import json
import os
import sys
from typing import Any, Dict, List, Sequence, Tuple

from loguru import logger

from . import __version__
from .checkpoint import save_checkpoint
from .config import ExperimentConfig, load_examples, load_experiment_config, resolve_train_config
from .constants import (
    CHECKPOINT_FILE, CONFIG_FILE, HISTORY_FILE, PREDICTIONS_FILE, REPORT_FILE, TABLE_FILE, ExitCode
)
from .data import balanced_split, load_prediction_log, write_prediction_log
from .exceptions import ConfigError, FairSketchError, ValidationError
from .json_schema import JsonSchema
from .metrics import audit
from .model import EpochRecord, TrainHistory, evaluate, train
from .report import ResultTable, render_report
from .sketch import SketchParams, sketchify_dataset
from .types import optional
from .utils import config_hash

LOG_FORMAT = '{time:YYYY-MM-DD HH:mm:ss} | {level:<8} | {message}'


def setup_logging(verbose: bool = False):
    logger.remove()
    logger.add(sys.stderr, level='DEBUG' if verbose else 'INFO', format=LOG_FORMAT)


def _write_json(document: Dict[str, Any], path: str):
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(document, f, indent=2, sort_keys=True)
        f.write('\n')


def _write_history(history: TrainHistory, path: str, constants: Dict[str, Any]):
    columns = list(EpochRecord.record_fields)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(columns + list(constants))
        for record in history:
            row = record.to_dict(mode='json')
            writer.writerow(['' if row[c] is None else row[c] for c in columns] + list(constants.values()))


def _sketch_options(args) -> Tuple[optional[SketchParams], optional[int]]:
    if not args.config:
        return None, args.seed
    config = load_experiment_config(args.config)
    return config.sketch, config.seed if args.seed is None else args.seed


def cmd_sketchify(args) -> int:
    params, seed = _sketch_options(args)
    options = {'mode': args.mode, 'sketch': (params or SketchParams()).to_dict(mode='json')}
    stamp = {'config_hash': config_hash(options), 'seed': seed}
    manifest = sketchify_dataset(args.input, args.output, params, mode=args.mode,
                                 workers=args.workers, stamp=stamp)
    print(f'{manifest.converted} converted')
    if manifest.failed:
        print(f'{manifest.failed} failed')
    return ExitCode.OK


def _experiment(args) -> ExperimentConfig:
    if not args.config:
        raise ConfigError('train needs --config')
    config = load_experiment_config(args.config)
    return config.with_overrides(seed=args.seed, condition=args.condition, lam=args.lam,
                                 output_dir=args.output_dir)


def cmd_train(args) -> int:
    if args.schema:
        print(json.dumps(JsonSchema.generate(ExperimentConfig), indent=2, ensure_ascii=False))
        return ExitCode.OK
    config = _experiment(args)
    digest = config.config_hash
    stamp = {'config_hash': digest, 'seed': config.seed}
    run_dir = args.run_dir or config.run_dir
    os.makedirs(run_dir, exist_ok=True)
    logger.info('run {} (config {}, seed {}) -> {}', config.name, digest[:12], config.seed, run_dir)

    examples = load_examples(config)
    splits = balanced_split(examples, config.seed, config.split_ratios)
    logger.info('split sizes train/val/test = {}, discarded {}', splits.sizes, len(splits.discarded))
    if not splits.train:
        raise ConfigError('the training split is empty')
    train_config = resolve_train_config(config, splits.train[0].features.size)
    params, history = train(splits, train_config)

    meta = dict(stamp, name=config.name, condition=config.condition, with_fairness=config.with_fairness,
                **{'lambda': train_config.lam})
    save_checkpoint(params, os.path.join(run_dir, CHECKPOINT_FILE), meta)
    _write_history(history, os.path.join(run_dir, HISTORY_FILE), stamp)
    predictions = evaluate(params, splits.test)
    write_prediction_log(predictions, os.path.join(run_dir, PREDICTIONS_FILE), stamp)
    report = audit(predictions, train_config.positive_class, config.fpr_mode,
                   num_classes=max(2, train_config.layer_dims[-1]), meta=meta)
    _write_json(report.to_dict(mode='json'), os.path.join(run_dir, REPORT_FILE))
    _write_json(dict(stamp, config=config.to_dict(mode='json')), os.path.join(run_dir, CONFIG_FILE))
    print(render_report(report, config.group_names))
    return ExitCode.OK


def cmd_audit(args) -> int:
    records = load_prediction_log(args.log)
    options = {'source': os.path.abspath(args.log), 'positive_class': args.positive_class,
               'fpr_mode': args.fpr_mode}
    meta = dict(options, config_hash=config_hash(options), seed=args.seed)
    report = audit(records, args.positive_class, args.fpr_mode, num_classes=args.num_classes, meta=meta)
    out_dir = args.out or os.path.dirname(os.path.abspath(args.log))
    os.makedirs(out_dir, exist_ok=True)
    _write_json(report.to_dict(mode='json'), os.path.join(out_dir, REPORT_FILE))
    print(render_report(report))
    return ExitCode.OK


def cmd_report(args) -> int:
    table = ResultTable.from_run_dirs(args.runs)
    out_dir = args.out or os.getcwd()
    os.makedirs(out_dir, exist_ok=True)
    table.write_csv(os.path.join(out_dir, TABLE_FILE))
    print(table.render_text())
    return ExitCode.OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='fairsketch', description='fairness-aware classification toolkit')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument('--seed', type=int, default=None, help='override the config seed')
    parser.add_argument('--config', default=None, help='experiment config (JSON)')
    parser.add_argument('--verbose', action='store_true', help='debug logging')
    commands = parser.add_subparsers(dest='command', required=True)

    sketchify = commands.add_parser('sketchify', help='convert an image tree to grayscale or sketches')
    sketchify.add_argument('--in', dest='input', required=True, help='input directory')
    sketchify.add_argument('--out', dest='output', required=True, help='output directory')
    sketchify.add_argument('--mode', choices=('sketch', 'grayscale'), default='sketch')
    sketchify.add_argument('--workers', type=int, default=1)
    sketchify.set_defaults(handler=cmd_sketchify)

    train_cmd = commands.add_parser('train', help='split, train and audit one configuration')
    train_cmd.add_argument('--schema', action='store_true', help='print the config JSON schema and exit')
    train_cmd.add_argument('--condition', choices=('original', 'grayscale', 'sketch'), default=None)
    train_cmd.add_argument('--lambda', dest='lam', type=float, default=None, help='fairness weight')
    train_cmd.add_argument('--output-dir', default=None, help='override output_dir')
    train_cmd.add_argument('--run-dir', default=None, help='write artifacts here instead of output_dir/name')
    train_cmd.set_defaults(handler=cmd_train)

    audit_cmd = commands.add_parser('audit', help='fairness metrics of a prediction log')
    audit_cmd.add_argument('log', help='CSV or JSON-lines prediction log')
    audit_cmd.add_argument('--positive-class', type=int, default=1)
    audit_cmd.add_argument('--fpr-mode', choices=('standard', 'as_written'), default='standard')
    audit_cmd.add_argument('--num-classes', type=int, default=None)
    audit_cmd.add_argument('--out', default=None, help='directory for report.json')
    audit_cmd.set_defaults(handler=cmd_audit)

    report_cmd = commands.add_parser('report', help='compare finished runs')
    report_cmd.add_argument('runs', nargs='+', help='run directories')
    report_cmd.add_argument('--out', default=None, help='directory for table.csv')
    report_cmd.set_defaults(handler=cmd_report)
    return parser


def main(argv: optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    try:
        return int(args.handler(args))
    except ValidationError as e:
        logger.error('invalid input: {}', e.first_message())
        return int(e.exit_code)
    except FairSketchError as e:
        logger.error('{}', e.message())
        return int(e.exit_code)


def run(argv: optional[List[str]] = None):
    sys.exit(main(argv))
