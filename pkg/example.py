# -*- coding:utf-8 -*-
"""合成数据上的对照: 不带 / 带公平项"""
from loguru import logger

from fairsketch import TrainConfig, audit, balanced_split, evaluate, make_proxy_dataset, train
from fairsketch.report import render_report

splits = balanced_split(make_proxy_dataset(4000, seed=0), seed=0)

for lam in (0.0, 1.0):
    config = TrainConfig(layer_dims=[4, 8, 1], lam=lam, learning_rate=1e-3, batch_size=64, epochs=30, seed=0)
    params, history = train(splits, config, on_epoch=lambda record: logger.debug('{}', record))
    report = audit(evaluate(params, splits.test), meta={'lambda': lam})
    logger.info('lambda={} final train loss {:.4f}', lam, history.last.train_loss)
    print(render_report(report))
