# -*- coding:utf-8 -*-
import numpy as np
import pytest

from fairsketch import (
    ConfigError, CountMismatch, EmptyLog, FormatError, LabeledExample, MalformedRecord, MissingGroup,
    UnknownAttribute, ValidationError, balanced_split, load_attribute_manifest, load_features_csv,
    load_prediction_log, make_proxy_dataset, minibatches, write_prediction_log
)
from fairsketch.data import epoch_seed, split_sizes


def labeled(rng, n, p_protected):
    z = (rng.random(n) < p_protected).astype(int)
    return [LabeledExample(id=f'e{i:04d}', features=[float(i)], label=int(rng.integers(0, 2)), z=int(z[i]))
            for i in range(n)]


class TestPredictionLog:

    def test_csv(self, tmp_path):
        path = tmp_path / 'log.csv'
        path.write_text('id,y_true,y_pred,score,z,source\n'
                        'a,1,1,0.9,1,cam\n'
                        'b,0,1,,0,cam\n')
        records = load_prediction_log(str(path))
        assert [r.id for r in records] == ['a', 'b']
        assert records[0].score == 0.9
        assert records[1].score is None
        assert records[0].record_extra == {'source': 'cam'}

    def test_jsonl(self, tmp_path):
        path = tmp_path / 'log.jsonl'
        path.write_text('{"id": "a", "y_true": 2, "y_pred": 0, "z": 1}\n\n{"id": "b", "y_true": 0, "y_pred": 0, "z": 0}\n')
        records = load_prediction_log(str(path))
        assert [(r.y_true, r.z) for r in records] == [(2, 1), (0, 0)]

    def test_malformed_line(self, tmp_path):
        path = tmp_path / 'log.csv'
        path.write_text('id,y_true,y_pred,score,z\na,1,1,,1\nb,1,1,,2\n')
        with pytest.raises(MalformedRecord) as info:
            load_prediction_log(str(path))
        assert info.value.line == 3
        path.write_text('id,y_true,y_pred,score,z\na,1,1,1.5,1\n')
        with pytest.raises(MalformedRecord):
            load_prediction_log(str(path))

    def test_empty_and_missing_columns(self, tmp_path):
        path = tmp_path / 'log.csv'
        path.write_text('id,y_true,y_pred,score,z\n')
        with pytest.raises(EmptyLog):
            load_prediction_log(str(path))
        path.write_text('id,y_pred,z\na,1,1\n')
        with pytest.raises(FormatError):
            load_prediction_log(str(path))

    def test_write_then_read(self, tmp_path, small_log):
        path = str(tmp_path / 'out.csv')
        write_prediction_log(small_log, path, {'seed': 7})
        records = load_prediction_log(path)
        assert [r.y_pred for r in records] == [r.y_pred for r in small_log]
        assert records[0].record_extra == {'seed': '7'}


class TestAttributeManifest:

    def test_celeba(self, tmp_path):
        path = tmp_path / 'list_attr.txt'
        path.write_text('3\nSmiling Male Young\n'
                        '000001.jpg 1 -1 1\n'
                        '000002.jpg -1 1 1\n'
                        '000003.jpg -1 -1 -1\n')
        examples = load_attribute_manifest(str(path), 'Smiling', 'Male', image_root='/data/img')
        assert [(e.id, e.label, e.z) for e in examples] == [
            ('000001.jpg', 1, 0), ('000002.jpg', 0, 1), ('000003.jpg', 0, 0)]
        assert examples[0].image_path.replace('\\', '/') == '/data/img/000001.jpg'

    def test_count_mismatch(self, tmp_path):
        path = tmp_path / 'list_attr.txt'
        path.write_text('4\nSmiling Male\n1.jpg 1 1\n2.jpg -1 -1\n')
        with pytest.raises(CountMismatch) as info:
            load_attribute_manifest(str(path), 'Smiling', 'Male')
        assert info.value.context == {'declared': 4, 'actual': 2}

    def test_unknown_attribute(self, tmp_path):
        path = tmp_path / 'list_attr.txt'
        path.write_text('1\nSmiling Male\n1.jpg 1 1\n')
        with pytest.raises(UnknownAttribute):
            load_attribute_manifest(str(path), 'Bald', 'Male')

    def test_generic_csv(self, tmp_path):
        path = tmp_path / 'meta.csv'
        path.write_text('image,MEL,NV,BCC,age,sex\n'
                        'x1,0,1,0,70,female\n'
                        'x2,1,0,0,35,male\n')
        by_age = load_attribute_manifest(str(path), ['MEL', 'NV', 'BCC'], 'age', z_threshold=60)
        assert [(e.label, e.z) for e in by_age] == [(1, 1), (0, 0)]
        assert by_age[0].image_path.endswith('x1')
        by_sex = load_attribute_manifest(str(path), ['MEL', 'NV', 'BCC'], 'sex', ['female'])
        assert [e.z for e in by_sex] == [1, 0]


class TestFeatures:

    def test_features_csv(self, tmp_path):
        path = tmp_path / 'table.csv'
        path.write_text('id,label,z,f0,f1\na,1,0,0.5,2\nb,0,1,1.5,-1\n')
        examples = load_features_csv(str(path))
        assert examples[1].features.tolist() == [1.5, -1.0]
        assert examples[1].z == 1

    def test_proxy_dataset(self):
        examples = make_proxy_dataset(2000, seed=0)
        assert examples == make_proxy_dataset(2000, seed=0)
        z = np.array([e.z for e in examples])
        y = np.array([e.label for e in examples])
        proxy = np.array([e.features[0] for e in examples])
        assert y[z == 1].mean() > y[z == 0].mean() + 0.2
        assert np.corrcoef(proxy, z)[0, 1] > 0.5
        assert examples[0].features.shape == (4,)

    def test_example_needs_input(self):
        with pytest.raises(ValidationError):
            LabeledExample(id='a', label=0, z=0)


class TestBalancedSplit:

    def test_split_sizes(self):
        assert split_sizes(10, (0.7, 0.15, 0.15)) == [7, 2, 1]
        assert split_sizes(20, (0.8, 0.0, 0.2)) == [16, 0, 4]
        assert sum(split_sizes(33, (0.7, 0.15, 0.15))) == 33

    def test_protocol_on_random_datasets(self):
        rng = np.random.default_rng(42)
        for trial in range(200):
            examples = labeled(rng, int(rng.integers(4, 120)), float(rng.uniform(0.15, 0.85)))
            counts = [sum(e.z == g for e in examples) for g in (0, 1)]
            if min(counts) == 0:
                with pytest.raises(MissingGroup):
                    balanced_split(examples, trial)
                continue
            splits = balanced_split(examples, trial)
            assert splits == balanced_split(examples, trial)
            m = min(counts)
            ids = [e.id for part in splits for e in part]
            assert len(ids) == len(set(ids)) == 2 * m
            assert sorted(ids + list(splits.discarded)) == sorted(e.id for e in examples)
            for part, ratio in zip(splits, splits.ratios):
                protected = sum(e.z for e in part)
                assert abs(protected - (len(part) - protected)) <= 1
                assert abs(len(part) - ratio * 2 * m) <= 1

    def test_zero_ratio(self):
        examples = labeled(np.random.default_rng(0), 50, 0.5)
        splits = balanced_split(examples, 0, (0.8, 0.0, 0.2))
        assert splits.val == []
        assert len(splits.test) > 0

    def test_bad_ratios(self):
        examples = labeled(np.random.default_rng(0), 10, 0.5)
        with pytest.raises(ConfigError):
            balanced_split(examples, 0, (0.5, 0.5, 0.5))
        with pytest.raises(ConfigError):
            balanced_split(examples, 0, (1.2, -0.1, -0.1))


class TestMinibatches:

    def test_permutation_and_short_batch(self):
        examples = labeled(np.random.default_rng(1), 23, 0.5)
        batches = minibatches(examples, 5, epoch_seed(3, 1))
        assert [len(b) for b in batches] == [5, 5, 5, 5, 3]
        ids = [i for b in batches for i in b.ids]
        assert sorted(ids) == sorted(e.id for e in examples)
        again = minibatches(examples, 5, epoch_seed(3, 1))
        assert [b.ids for b in again] == [b.ids for b in batches]
        other = minibatches(examples, 5, epoch_seed(3, 2))
        assert [b.ids for b in other] != [b.ids for b in batches]

    def test_rejects_zero_batch(self):
        with pytest.raises(ConfigError):
            minibatches(labeled(np.random.default_rng(1), 3, 0.5), 0, 0)
