# -*- coding:utf-8 -*-
import numpy as np
import pytest

from fairsketch import (
    ConfigError, LossWeights, MismatchedCache, ModelParams, NonFiniteLoss, ShapeError, TrainConfig,
    TrainingBatch, backward, balanced_split, evaluate, forward, gradient_check, init_params, load_checkpoint,
    make_proxy_dataset, predict, save_checkpoint, statistical_parity_difference, train
)
from fairsketch import model as model_module
from fairsketch.exceptions import FormatError
from fairsketch.loss import LossValue
from fairsketch.model import SIGMOID_HEAD, SOFTMAX_HEAD


def random_batch(rng, size, width, classes):
    z = np.array([0, 1] * (size // 2))
    return TrainingBatch(
        ids=[f'b{i}' for i in range(size)],
        features=rng.normal(size=(size, width)),
        labels=rng.integers(0, classes, size=size),
        z=z,
    )


def proxy_splits(n, seed):
    return balanced_split(make_proxy_dataset(n, seed), seed)


class TestNetwork:

    def test_init_is_reproducible(self):
        first = init_params([4, 8, 1], seed=9)
        assert first == init_params([4, 8, 1], seed=9)
        assert first != init_params([4, 8, 1], seed=10)
        assert first.activation == SIGMOID_HEAD
        assert init_params([4, 3], seed=0).activation == SOFTMAX_HEAD
        w, b = first.layers[0]
        assert np.all(np.abs(w) <= 0.5) and not b.any()

    @pytest.mark.parametrize('dims', [[4], [4, 0, 1], []])
    def test_init_rejects(self, dims):
        with pytest.raises(ConfigError):
            init_params(dims, seed=0)

    def test_params_check_chain(self):
        with pytest.raises(ShapeError):
            ModelParams([(np.zeros((3, 2)), np.zeros(3)), (np.zeros((1, 4)), np.zeros(1))], SIGMOID_HEAD)
        with pytest.raises(ShapeError):
            ModelParams([(np.full((1, 2), np.inf), np.zeros(1))], SIGMOID_HEAD)

    def test_forward_shapes(self):
        rng = np.random.default_rng(0)
        probs, _ = forward(init_params([5, 4, 1], 0), rng.normal(size=(7, 5)))
        assert probs.shape == (7,)
        probs, _ = forward(init_params([5, 4, 3], 0), rng.normal(size=(7, 5)))
        assert probs.shape == (7, 3)
        assert np.all(np.abs(probs.sum(axis=1) - 1.0) <= 1e-9)
        with pytest.raises(ShapeError):
            forward(init_params([5, 4, 1], 0), rng.normal(size=(7, 6)))

    def test_backward_rejects_foreign_cache(self):
        rng = np.random.default_rng(1)
        _, cache = forward(init_params([3, 2, 1], 0), rng.normal(size=(4, 3)))
        with pytest.raises(MismatchedCache):
            backward(init_params([3, 4, 1], 0), cache, np.zeros(4))
        with pytest.raises(MismatchedCache):
            backward(init_params([3, 2, 1], 0), cache, np.zeros(5))

    def test_predict(self):
        params = ModelParams([(np.array([[1.0, -1.0]]), np.array([0.0]))], SIGMOID_HEAD)
        assert predict(params, [[2.0, 0.0], [0.0, 2.0], [1.0, 1.0]]).tolist() == [1, 0, 1]


class TestGradientCheck:

    @pytest.mark.parametrize('dims', [[4, 8, 1], [6, 4, 4, 2]])
    @pytest.mark.parametrize('lam', [0.0, 0.5, 1.0])
    def test_matches_finite_differences(self, dims, lam):
        weights = LossWeights(lam=lam)
        for seed in range(50):
            rng = np.random.default_rng(seed)
            params = init_params(dims, seed)
            batch = random_batch(rng, 8, dims[0], max(dims[-1], 2))
            assert gradient_check(params, batch, weights) < 1e-5

    def test_dead_hidden_layer(self):
        # every layer-1 unit is off, so layer 2 sits exactly on the ReLU kink at zero
        rng = np.random.default_rng(4)
        params = ModelParams([
            (-np.ones((4, 6)), np.zeros(4)),
            (rng.uniform(-0.5, 0.5, size=(4, 4)), np.zeros(4)),
            (rng.uniform(-0.5, 0.5, size=(2, 4)), rng.uniform(-0.5, 0.5, size=2)),
        ], SOFTMAX_HEAD)
        batch = TrainingBatch(ids=[f'd{i}' for i in range(6)], features=np.abs(rng.normal(size=(6, 6))) + 0.1,
                              labels=np.array([0, 1, 1, 0, 1, 0]), z=np.array([0, 1] * 3))
        _, cache = forward(params, batch.features)
        assert not cache.pre_activations[1].any()
        for lam in (0.0, 0.5, 1.0):
            assert gradient_check(params, batch, LossWeights(lam=lam)) < 1e-5

    def test_zero_network(self):
        params = ModelParams([(np.zeros((1, 3)), np.zeros(1))], SIGMOID_HEAD)
        batch = random_batch(np.random.default_rng(0), 4, 3, 2)
        assert gradient_check(params, batch, LossWeights()) < 1e-5


class TestTrain:

    def test_deterministic(self):
        splits = proxy_splits(200, 1)
        config = TrainConfig(layer_dims=[4, 6, 1], epochs=3, batch_size=16, seed=5)
        params_a, history_a = train(splits, config)
        params_b, history_b = train(splits, config)
        assert params_a == params_b
        assert history_a == history_b
        assert len(history_a) == 3
        assert history_a.last.val_accuracy is not None

    def test_convex_loss_is_monotone(self):
        splits = proxy_splits(300, 2)
        config = TrainConfig(layer_dims=[4, 1], lam=0.0, optimizer='sgd', learning_rate=1e-3,
                             batch_size=len(splits.train), epochs=20, seed=0)
        _, history = train(splits, config)
        losses = [record.train_loss for record in history]
        assert all(later <= earlier + 1e-9 for earlier, later in zip(losses, losses[1:]))

    def test_config_errors(self):
        splits = proxy_splits(100, 3)
        with pytest.raises(ConfigError):
            train(splits, TrainConfig(layer_dims=[4, 1], batch_size=len(splits.train) + 1))
        with pytest.raises(ConfigError):
            train(splits, TrainConfig(layer_dims=[5, 1]))

    def test_non_finite_loss(self, monkeypatch):
        def exploding(batch, weights):
            return LossValue(float('nan'), np.zeros_like(batch.probs))

        monkeypatch.setattr(model_module, 'total_loss', exploding)
        with pytest.raises(NonFiniteLoss) as info:
            train(proxy_splits(100, 4), TrainConfig(layer_dims=[4, 1], batch_size=10))
        assert info.value.context['epoch'] == 1
        assert info.value.context['batch'] == 1
        assert info.value.exit_code == 3

    def test_bias_mitigation(self):
        lowered = 0
        drops = []
        for seed in range(10):
            splits = proxy_splits(4000, seed)
            results = {}
            for lam in (0.0, 1.0):
                config = TrainConfig(layer_dims=[4, 8, 1], lam=lam, learning_rate=1e-3, batch_size=64,
                                     epochs=100, seed=seed)
                params, _ = train(splits, config)
                predictions = evaluate(params, splits.test)
                accuracy = np.mean([p.y_pred == p.y_true for p in predictions])
                results[lam] = (statistical_parity_difference(predictions), accuracy)
            lowered += results[1.0][0] < results[0.0][0]
            drops.append(results[0.0][1] - results[1.0][1])
        assert lowered >= 9
        assert np.mean(drops) <= 0.10


class TestCheckpoint:

    def test_save_and_load(self, tmp_path):
        params = init_params([3, 5, 2], seed=4)
        path = str(tmp_path / 'run' / 'checkpoint.json')
        checkpoint = save_checkpoint(params, path, {'seed': 4})
        assert checkpoint.meta == {'seed': 4}
        assert load_checkpoint(path) == params

    def test_rejects_bad_documents(self, tmp_path):
        path = tmp_path / 'checkpoint.json'
        path.write_text('{"format": "other", "version": 1}')
        with pytest.raises(FormatError):
            load_checkpoint(str(path))
        path.write_text('not json')
        with pytest.raises(FormatError):
            load_checkpoint(str(path))
        path.write_text('{"format": "fairsketch-checkpoint", "version": 1, "activation": "relu_hidden_sigmoid_out",'
                        ' "layer_dims": [2, 1], "weights": [[[1.0, 2.0, 3.0]]], "biases": [[0.0]]}')
        with pytest.raises(FormatError):
            load_checkpoint(str(path))
