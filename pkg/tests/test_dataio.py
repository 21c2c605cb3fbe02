import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minibatch_accel.dataio import (
    Dataset,
    Example,
    LibsvmParseError,
    censor,
    parse_libsvm,
    split,
    synthesize,
    write_libsvm,
)
from minibatch_accel.losses import LossModel, dataset_loss
from minibatch_accel.vectors import SparseVector, dot


def roundtrip(dataset: Dataset) -> Dataset:
    buf = io.StringIO()
    write_libsvm(dataset, buf)
    return parse_libsvm(buf.getvalue())


class TestParse:
    def test_basic_line(self):
        ds = parse_libsvm("+1 1:0.5 3:-2\n")
        assert len(ds) == 1
        assert ds.dimension == 3
        ex = ds[0]
        assert ex.label == 1
        assert ex.features.indices.tolist() == [1, 3]
        assert ex.features.values.tolist() == [0.5, -2.0]

    def test_label_only_line(self):
        ds = parse_libsvm("-1\n+1 2:1\n")
        assert ds[0].features.nnz == 0
        assert ds.dimension == 2

    def test_zero_label_maps_to_minus_one_with_warning(self):
        with pytest.warns(UserWarning, match="zero labels"):
            ds = parse_libsvm("0 1:2\n")
        assert ds[0].label == -1

    def test_comments_and_blank_lines(self):
        ds = parse_libsvm("# header\n\n+1 1:1 # trailing\n\n-1 2:3\n")
        assert len(ds) == 2

    def test_crlf_accepted(self):
        ds = parse_libsvm("+1 1:1\r\n-1 2:2\r\n")
        assert len(ds) == 2

    def test_non_numeric_label(self):
        with pytest.raises(LibsvmParseError) as err:
            parse_libsvm("+1 1:1\nspam 1:1\n")
        assert err.value.lineno == 2

    def test_non_numeric_value(self):
        with pytest.raises(LibsvmParseError) as err:
            parse_libsvm("+1 1:1\n-1 1:x\n")
        assert err.value.lineno == 2

    def test_non_increasing_indices(self):
        with pytest.raises(LibsvmParseError) as err:
            parse_libsvm("+1 2:1 2:2\n")
        assert err.value.lineno == 1
        with pytest.raises(LibsvmParseError):
            parse_libsvm("+1 3:1 2:2\n")

    def test_bad_pair_token(self):
        with pytest.raises(LibsvmParseError) as err:
            parse_libsvm("+1 1\n")
        assert err.value.lineno == 1

    def test_unsupported_label(self):
        with pytest.raises(LibsvmParseError):
            parse_libsvm("3 1:1\n")

    def test_empty_input(self):
        with pytest.raises(LibsvmParseError):
            parse_libsvm("")
        with pytest.raises(LibsvmParseError):
            parse_libsvm("# only a comment\n")

    def test_line_numbers_count_skipped_lines(self):
        with pytest.raises(LibsvmParseError) as err:
            parse_libsvm("# c\n\n+1 1:1\nbad\n")
        assert err.value.lineno == 4


class TestWrite:
    def test_example_round_trip(self):
        ds = parse_libsvm("+1 1:0.5 3:-2\n-1\n")
        again = roundtrip(ds)
        assert len(again) == len(ds)
        for a, b in zip(ds.examples, again.examples):
            assert a.label == b.label
            assert a.features.indices.tolist() == b.features.indices.tolist()
            assert a.features.values.tolist() == b.features.values.tolist()

    def test_writes_lf_and_sign(self):
        ds = parse_libsvm("+1 1:2\n-1 2:0.25\n")
        buf = io.StringIO()
        write_libsvm(ds, buf)
        assert buf.getvalue() == "+1 1:2.0\n-1 2:0.25\n"


datasets = st.lists(
    st.tuples(
        st.sampled_from([-1, 1]),
        st.lists(
            st.tuples(st.integers(min_value=1, max_value=12),
                      st.floats(min_value=-1e12, max_value=1e12,
                                allow_nan=False).filter(lambda v: v != 0.0)),
            max_size=6, unique_by=lambda pair: pair[0],
        ),
    ),
    min_size=1, max_size=20,
)


class TestRoundTripProperty:
    @given(datasets)
    @settings(max_examples=200, deadline=None)
    def test_parse_write_identity(self, rows):
        examples = []
        for label, pairs in rows:
            pairs = sorted(pairs)
            idx = np.array([i for i, _ in pairs], dtype=np.int64)
            vals = np.array([v for _, v in pairs])
            examples.append(Example(SparseVector(idx, vals, 12), label))
        ds = Dataset(tuple(examples), 12)
        again = roundtrip(ds)
        assert len(again) == len(ds)
        for a, b in zip(ds.examples, again.examples):
            assert a.label == b.label
            assert a.features.indices.tolist() == b.features.indices.tolist()
            assert a.features.values.tolist() == b.features.values.tolist()


class TestParserFuzz:
    @given(st.text(max_size=200))
    @settings(max_examples=300, deadline=None)
    def test_arbitrary_text_never_crashes(self, text):
        # outcome is either a parsed dataset or the typed, line-numbered error
        import warnings as w
        try:
            with w.catch_warnings():
                w.simplefilter("ignore")
                ds = parse_libsvm(text)
        except LibsvmParseError as err:
            assert err.lineno >= 0
        else:
            assert len(ds) >= 1

    def test_extreme_magnitudes_round_trip(self):
        ds = parse_libsvm("+1 1:1e-308 2:1e308 3:-2.2250738585072014e-308\n")
        again = roundtrip(ds)
        assert again[0].features.values.tolist() == ds[0].features.values.tolist()


class TestSplit:
    def test_paper_fractions(self):
        ds, _ = synthesize(100, 4, seed=0)
        train, val, test = split(ds, (0.5, 0.25, 0.25), seed=1)
        assert (len(train), len(val), len(test)) == (50, 25, 25)

    def test_deterministic(self):
        ds, _ = synthesize(60, 4, seed=0)
        a = split(ds, (0.5, 0.25, 0.25), seed=7)
        b = split(ds, (0.5, 0.25, 0.25), seed=7)
        for x, y in zip(a, b):
            assert [id(e) for e in x.examples] == [id(e) for e in y.examples]

    def test_disjoint_partition(self):
        ds, _ = synthesize(64, 4, seed=0)
        train, val, test = split(ds, (0.5, 0.25, 0.25), seed=3)
        seen = set()
        for part in (train, val, test):
            for ex in part.examples:
                assert id(ex) not in seen
                seen.add(id(ex))
        assert len(seen) == 64

    def test_all_train(self):
        ds, _ = synthesize(10, 4, seed=0)
        train, val, test = split(ds, (1.0, 0.0, 0.0), seed=0)
        assert (len(train), len(val), len(test)) == (10, 0, 0)

    def test_bad_fractions(self):
        ds, _ = synthesize(10, 4, seed=0)
        with pytest.raises(ValueError):
            split(ds, (0.9, 0.2, 0.2), seed=0)
        with pytest.raises(ValueError):
            split(ds, (-0.1, 0.5, 0.5), seed=0)


class TestSynthesize:
    def test_margin_guarantee_and_zero_loss(self):
        ds, planted = synthesize(500, 12, margin=1.5, label_noise=0.0, seed=4)
        for ex in ds.examples:
            assert ex.label * dot(ex.features, planted) >= 1.5 * (1 - 1e-12)
        model = LossModel("smoothed_hinge", 1.0)
        assert dataset_loss(model, planted.array, ds) == 0.0

    def test_unit_norm_features(self):
        ds, _ = synthesize(100, 9, margin=2.0, seed=5)
        for ex in ds.examples:
            assert math.sqrt(float(np.sum(ex.features.values ** 2))) == pytest.approx(1.0, rel=1e-12)

    def test_heavy_noise_halves_accuracy(self):
        ds, planted = synthesize(10000, 10, margin=1.0, label_noise=0.5, seed=6)
        correct = sum(
            1 for ex in ds.examples if ex.label * dot(ex.features, planted) > 0
        )
        assert abs(correct / len(ds) - 0.5) <= 0.05

    def test_same_seed_identical(self):
        a, wa = synthesize(50, 6, margin=1.0, label_noise=0.2, seed=9)
        b, wb = synthesize(50, 6, margin=1.0, label_noise=0.2, seed=9)
        assert np.array_equal(wa.array, wb.array)
        for x, y in zip(a.examples, b.examples):
            assert x.label == y.label
            assert np.array_equal(x.features.indices, y.features.indices)
            assert np.array_equal(x.features.values, y.features.values)

    def test_validation(self):
        with pytest.raises(ValueError):
            synthesize(0, 4)
        with pytest.raises(ValueError):
            synthesize(4, 4, label_noise=1.5)


class TestCensor:
    def test_already_clean_unchanged(self):
        ds, planted = synthesize(80, 8, margin=1.5, label_noise=0.0, seed=10)
        kept = censor(ds, planted)
        assert len(kept) == len(ds)
        assert [id(e) for e in kept.examples] == [id(e) for e in ds.examples]

    def test_small_margin_removed(self):
        ex_keep = Example(SparseVector([1], [1.0], 2), 1)   # margin w[0] = 2
        ex_drop = Example(SparseVector([2], [1.0], 2), 1)   # margin w[1] = 0.3
        ds = Dataset((ex_keep, ex_drop), 2)
        kept = censor(ds, np.array([2.0, 0.3]))
        assert len(kept) == 1
        assert kept[0] is ex_keep

    def test_post_censor_loss_exactly_zero(self):
        ds, planted = synthesize(400, 8, margin=1.2, label_noise=0.3, seed=11)
        rng = np.random.default_rng(0)
        predictor = planted.array + 0.2 * rng.standard_normal(8)
        kept = censor(ds, predictor)
        model = LossModel("smoothed_hinge", 1.0)
        assert dataset_loss(model, predictor, kept) == 0.0

    def test_order_preserving_subsequence(self):
        ds, planted = synthesize(300, 8, margin=1.2, label_noise=0.4, seed=12)
        kept = censor(ds, planted)
        ids = [id(e) for e in ds.examples]
        kept_ids = [id(e) for e in kept.examples]
        positions = [ids.index(k) for k in kept_ids]
        assert positions == sorted(positions)

    def test_empty_result_rejected(self):
        ds, _ = synthesize(20, 8, margin=1.0, seed=13)
        with pytest.raises(ValueError, match="removed every example"):
            censor(ds, np.zeros(8))
