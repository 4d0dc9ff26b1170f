import json

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from bursty.classify import (
    ClassificationReport,
    evaluate,
    fit_evaluate,
    posterior,
    predict,
    resolve_penalty,
    sensitivity_grid,
    train_nb,
)
from bursty.corpus import TermDocumentMatrix, split
from bursty.errors import DomainError, SingleClass
from bursty.simulate import SimConfig, draw_alpha, sample_dm_corpus
from bursty.weights import PenaltyParams


def two_class_corpus(seed, per_class=120, m=60, shift=12):
    """Dirichlet-multinomial documents for two classes whose concentration
    vectors differ by swapping their leading ``shift`` entries."""
    base = draw_alpha(SimConfig(m=m, alpha_gamma=(0.5, 0.3), seed=seed))
    other = base.copy()
    other[:shift], other[shift:2 * shift] = base[shift:2 * shift], base[:shift].copy()
    parts = [
        sample_dm_corpus(SimConfig(m=m, d=per_class, alpha=tuple(a), doc_length=(150, 0.5), seed=seed + k))
        for k, a in enumerate((base, other))
    ]
    counts = sp.vstack([p.counts for p in parts]).tocsr()
    labels = ("a",) * per_class + ("b",) * per_class
    docs = tuple(f"{lab}{j}" for j, lab in enumerate(labels))
    return TermDocumentMatrix(parts[0].vocab, docs, counts, labels).compact()


class TestTrain:
    def test_separable(self):
        x = np.array([[3.0, 0], [2.0, 0], [0, 4.0], [0, 1.0]])
        model = train_nb(x, ["a", "a", "b", "b"])
        assert predict(model, np.array([[1.0, 0], [0, 5.0]])) == ["a", "b"]

    def test_uninformative_features_follow_prior(self):
        x = np.ones((5, 3))
        model = train_nb(x, ["a", "b", "b", "b", "a"])
        assert predict(model, np.ones((4, 3))) == ["b"] * 4

    def test_theta_normalized(self):
        rng = np.random.default_rng(0)
        model = train_nb(rng.random((30, 8)), rng.choice(["a", "b", "c"], 30), smoothing=0.3)
        np.testing.assert_allclose(np.exp(model.log_theta).sum(axis=1), 1.0, atol=1e-10)

    def test_smoothing_formula(self):
        x = np.array([[1.0, 3.0], [2.0, 0.0]])
        model = train_nb(x, ["a", "b"], smoothing=0.5)
        np.testing.assert_allclose(np.exp(model.log_theta), [[1.5 / 5, 3.5 / 5], [2.5 / 3, 0.5 / 3]], rtol=1e-14)
        np.testing.assert_allclose(np.exp(model.log_prior), [0.5, 0.5])

    def test_scaled_features_and_smoothing(self):
        rng = np.random.default_rng(1)
        x = rng.random((40, 10))
        y = ["a", "b"] * 20
        test = rng.random((15, 10))
        base = train_nb(x, y, smoothing=1.0)
        for c in (0.5, 2.0, 10.0):
            scaled = train_nb(c * x, y, smoothing=c)
            np.testing.assert_allclose(scaled.log_theta, base.log_theta, rtol=1e-12, atol=1e-13)
            assert predict(scaled, c * test) == predict(base, test)

    def test_blocks_match_full(self):
        rng = np.random.default_rng(2)
        x = rng.random((10, 4))
        y = list("aabbaabbab")
        full = train_nb(x, y)
        blocks = [(slice(0, 4), x[:4]), (slice(4, 10), sp.csr_matrix(x[4:]))]
        np.testing.assert_allclose(train_nb(blocks, y).log_theta, full.log_theta, rtol=1e-14)

    def test_single_class(self):
        with pytest.raises(SingleClass):
            train_nb(np.ones((3, 2)), ["a", "a", "a"])

    def test_negative_features(self):
        with pytest.raises(DomainError):
            train_nb(np.array([[1.0, -0.1], [0.0, 1.0]]), ["a", "b"])

    @pytest.mark.parametrize("smoothing", [0.0, -1.0])
    def test_bad_smoothing(self, smoothing):
        with pytest.raises(DomainError):
            train_nb(np.ones((2, 2)), ["a", "b"], smoothing)

    def test_width_mismatch(self):
        model = train_nb(np.ones((2, 2)), ["a", "b"])
        with pytest.raises(DomainError):
            predict(model, np.ones((1, 3)))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_posterior_sums_to_one(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.random((12, 5)) * 40
        model = train_nb(x, ["a", "b", "c"] * 4)
        np.testing.assert_allclose(posterior(model, rng.random((6, 5)) * 400).sum(axis=1), 1.0, atol=1e-10)


class TestVocabularyPermutation:
    def test_predictions_unchanged(self):
        m = two_class_corpus(3)
        train, test = split(m, 0.6, seed=0)
        penalty = resolve_penalty(train)
        perm = np.random.default_rng(0).permutation(train.m)

        def permuted(mat):
            return TermDocumentMatrix(
                tuple(mat.vocab[i] for i in perm), mat.docs, mat.counts[:, perm], mat.labels
            )

        plain = fit_evaluate(train, test, "sigmoid_lambda", penalty)
        moved = fit_evaluate(permuted(train), permuted(test), "sigmoid_lambda", penalty)
        np.testing.assert_array_equal(plain.confusion, moved.confusion)


class TestReport:
    def test_perfect(self):
        rep = ClassificationReport.from_predictions(list("abca"), list("abca"))
        assert rep.accuracy == 1.0
        assert np.all(rep.f1 == 1.0)

    def test_known_confusion(self):
        rep = ClassificationReport.from_confusion(("x", "y"), [[3, 1], [2, 4]])
        assert rep.precision.tolist() == [3 / 5, 4 / 5]
        assert rep.recall.tolist() == [3 / 4, 4 / 6]
        assert rep.accuracy == 0.7
        assert rep.weighted()["recall"] == pytest.approx(0.7, rel=1e-15)

    def test_empty_predicted_class(self):
        rep = ClassificationReport.from_predictions(["a", "b"], ["a", "a"])
        assert rep.precision[1] == 0.0 and rep.f1[1] == 0.0

    @settings(max_examples=50)
    @given(st.lists(st.tuples(st.sampled_from("abc"), st.sampled_from("abcd")), min_size=1, max_size=60))
    def test_metrics_recomputed_from_confusion(self, pairs):
        y_true, y_pred = zip(*pairs)
        rep = ClassificationReport.from_predictions(y_true, y_pred)
        again = ClassificationReport.from_confusion(rep.classes, rep.confusion)
        for name in ("precision", "recall", "f1", "support"):
            np.testing.assert_array_equal(getattr(rep, name), getattr(again, name))
        assert rep.accuracy == np.trace(rep.confusion) / len(pairs)
        for arr in (rep.precision, rep.recall, rep.f1):
            assert np.all((arr >= 0) & (arr <= 1))
        w = rep.support / rep.support.sum()
        assert rep.weighted()["f1"] == pytest.approx(float(w @ rep.f1), abs=1e-15)

    def test_json_and_text(self):
        rep = ClassificationReport.from_confusion(("neg", "pos"), [[5, 1], [0, 4]], {"scheme": "tfidf"})
        obj = json.loads(json.dumps(rep.to_json()))
        assert obj["schema"] == "bursty.classification"
        assert obj["classes"]["pos"]["support"] == 4
        text = rep.to_text()
        assert "weighted avg" in text and "accuracy" in text and "0.9000" in text

    def test_evaluate_union_of_classes(self):
        model = train_nb(np.eye(2), ["a", "b"])
        rep = evaluate(model, np.eye(2), ["a", "z"])
        assert rep.classes == ("a", "b", "z")
        assert rep.support.tolist() == [1, 0, 1]


class TestFitEvaluate:
    def test_better_than_chance(self):
        train, test = split(two_class_corpus(0), 0.6, seed=1)
        for scheme in ("tfidf", "sigmoid-lambda"):
            assert fit_evaluate(train, test, scheme).accuracy > 0.8

    def test_requires_alignment(self):
        train, test = split(two_class_corpus(0), 0.6, seed=1)
        narrowed = train.compact()
        shuffled = TermDocumentMatrix(test.vocab[::-1], test.docs, test.counts[:, ::-1], test.labels)
        with pytest.raises(DomainError):
            fit_evaluate(narrowed, shuffled)

    def test_auto_mu(self):
        train, _ = split(two_class_corpus(0), 0.6, seed=1)
        assert resolve_penalty(train).mu == train.n / train.d


class TestSensitivityGrid:
    def test_single_cell_matches_direct(self):
        train, test = split(two_class_corpus(1), 0.6, seed=2)
        grid = sensitivity_grid(train, test, [60.0], [2.0])
        direct = fit_evaluate(train, test, "sigmoid_lambda", PenaltyParams(60.0, 2.0))
        assert grid.accuracy[0, 0] == direct.accuracy

    @pytest.mark.parametrize("seed", range(10))
    def test_stability_over_grid(self, seed):
        corpus = two_class_corpus(seed, per_class=300, m=250, shift=40)
        train, test = split(corpus, 0.6, seed=seed)
        grid = sensitivity_grid(
            train, test, [30, 60, 90, 120, 150, 180], [0.5, 1, 2, 3, 4, 5], workers=4
        )
        assert grid.accuracy.shape == (6, 6)
        assert grid.accuracy.max() - grid.accuracy.min() <= 0.05

    def test_csv_and_peak(self):
        train, test = split(two_class_corpus(1), 0.6, seed=2)
        grid = sensitivity_grid(train, test, [40, 80], [1, 3])
        lines = grid.to_csv().splitlines()
        assert lines[1] == "mu,sigma2,accuracy" and len(lines) == 6
        assert grid.peak()[2] == grid.accuracy.max()

    def test_empty_grid(self):
        train, test = split(two_class_corpus(1), 0.6, seed=2)
        with pytest.raises(DomainError):
            sensitivity_grid(train, test, [], [1.0])
