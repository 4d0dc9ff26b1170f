import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from bursty.corpus import TermDocumentMatrix, compute_stats
from bursty.errors import DomainError, InvalidPenalty
from bursty.plr import LOG_SQRT_2PI, plr_approx
from bursty.weights import (
    LambdaConstants,
    PenaltyParams,
    btf_idf,
    lambda_ij,
    sigmoid,
    tf_icf,
    tf_idf,
    weigh_collection,
    weight_blocks,
)


def _matrix(rows):
    arr = np.asarray(rows, dtype=np.int64)
    d, m = arr.shape
    return TermDocumentMatrix(
        tuple(f"w{i}" for i in range(m)), tuple(f"d{j}" for j in range(d)), sp.csr_matrix(arr)
    )


def lambda_ij_transcribed(n_ij, n_j, b_i, n_i, n, d, mu, sigma2):
    """Straight-line evaluation of the per-document contribution, term by
    term as written, with plain ``math`` calls."""
    b_ij = 1 if n_ij > 0 else 0
    n_not = n - n_i
    eta2 = mu * mu / sigma2
    r = n_i - b_i + 1
    tficf = n_ij * math.log(n / n_i)
    btfidf = b_ij * math.log(d / b_i)
    log_fact = math.lgamma(n_ij + 1) - (b_ij * math.log(n_ij) if b_ij else 0.0)
    value = tficf - btfidf + log_fact
    value += (n_ij - b_ij) * math.log((b_i + n_not) / (d * sigma2))
    value += n_j * math.log(n / (b_i + n_not))
    value -= (b_ij + 1 / (2 * d)) * math.log(mu)
    value += (1 / (2 * d)) * (
        (eta2 - 2 * r + 1) * math.log(max(1.0, eta2 - r)) - (eta2 - 1.5) * math.log(eta2) + r
    )
    return value


TOY = [[3, 1, 0, 2], [0, 4, 1, 1], [1, 2, 2, 0]]  # 3 documents x 4 terms


class TestPenaltyParams:
    def test_eta2(self):
        p = PenaltyParams(50.0, 4.0)
        assert p.eta2 == 625.0
        assert p.shape == 625.0 and p.rate == 12.5

    @pytest.mark.parametrize("mu,sigma2", [(0, 1), (-1, 1), (1, 0), (1, -2), (math.inf, 1)])
    def test_invalid(self, mu, sigma2):
        with pytest.raises(InvalidPenalty):
            PenaltyParams(mu, sigma2)


class TestTfIdfFamily:
    def test_tf_idf_full_document_frequency(self):
        assert tf_idf(5, 4, 4) == 0.0

    def test_tf_idf_zero_count(self):
        assert tf_idf(0, 1, 4) == 0.0

    def test_tf_idf_value(self):
        assert tf_idf(3, 1, 4) == pytest.approx(4.1589, abs=1e-4)
        assert tf_idf(3, 1, 4) == pytest.approx(3 * math.log(4), rel=1e-15)

    def test_btf_idf(self):
        assert btf_idf(5, 1, 4) == pytest.approx(1.3863, abs=1e-4)
        assert btf_idf(0, 1, 4) == 0.0
        assert btf_idf(5, 4, 4) == 0.0

    def test_tf_icf(self):
        assert tf_icf(2, 10, 1000) == pytest.approx(9.2103, abs=1e-4)
        assert tf_icf(0, 10, 1000) == 0.0
        assert tf_icf(7, 1000, 1000) == 0.0

    @given(st.integers(1, 50), st.integers(1, 50))
    def test_binary_counts_agree(self, b, extra):
        d = b + extra
        assert tf_idf(1, b, d) == btf_idf(1, b, d)

    @given(st.integers(0, 100), st.integers(1, 20), st.integers(0, 20))
    def test_monotone(self, k, b, extra):
        d = b + extra
        assert tf_idf(k + 1, b, d) >= tf_idf(k, b, d)
        assert btf_idf(k + 1, b, d) >= btf_idf(k, b, d)
        assert tf_icf(k + 1, b, d + 100) >= tf_icf(k, b, d + 100)


class TestSigmoid:
    def test_zero(self):
        assert sigmoid(0.0) == 0.5

    @given(st.floats(-700, 700))
    def test_symmetry(self, x):
        assert sigmoid(-x) == pytest.approx(1 - sigmoid(x), abs=1e-15)

    def test_saturation(self):
        with np.errstate(over="raise"):
            assert sigmoid(1000.0) == 1.0
            assert sigmoid(-1000.0) == 0.0

    def test_array(self):
        out = sigmoid(np.array([-2.0, 0.0, 2.0]))
        assert out.shape == (3,)


class TestLambda:
    def test_toy_against_transcription(self):
        m = _matrix(TOY)
        s = compute_stats(m)
        penalty = PenaltyParams(s.n / s.d, 1.0)
        for i in range(m.m):
            for j in range(m.d):
                got = lambda_ij(m.count(i, j), m.doc_lengths[j], s.term(i), s.d, penalty)
                want = lambda_ij_transcribed(
                    m.count(i, j), m.doc_lengths[j], s.b[i], s.n_i[i], s.n, s.d, penalty.mu, 1.0
                )
                assert got == pytest.approx(want, rel=1e-12, abs=1e-12)

    def test_guard_clamped(self):
        m = _matrix(TOY)
        s = compute_stats(m)
        penalty = PenaltyParams(2.0, 1.0)  # eta2 = 4 <= r for several terms
        const = LambdaConstants.from_stats(s, penalty)
        assert const.guard_active.any()
        for i in range(m.m):
            got = lambda_ij(0, 5, s.term(i), s.d, penalty)
            want = lambda_ij_transcribed(0, 5, s.b[i], s.n_i[i], s.n, s.d, 2.0, 1.0)
            assert got == pytest.approx(want, rel=1e-12)

    def test_absent_term_blocks(self):
        m = _matrix(TOY)
        s = compute_stats(m)
        penalty = PenaltyParams(10.0, 1.0)
        term = s.term(2)
        area = term.b + term.n_not
        eta2, r, d = penalty.eta2, term.r, s.d
        const = (eta2 - 2 * r + 1) * math.log(eta2 - r) - (eta2 - 1.5) * math.log(eta2) + r
        want = 6 * math.log(s.n / area) + (const - math.log(10.0)) / (2 * d)
        assert lambda_ij(0, 6, term, d, penalty) == pytest.approx(want, rel=1e-13)

    def test_invalid_penalty(self):
        with pytest.raises(InvalidPenalty):
            lambda_ij(1, 5, compute_stats(_matrix(TOY)).term(0), 3, PenaltyParams(0.0, 1.0))

    @settings(max_examples=40, deadline=None)
    @given(
        st.lists(st.lists(st.integers(0, 6), min_size=4, max_size=4).filter(lambda r: sum(r) > 0),
                 min_size=2, max_size=8),
        st.floats(5.0, 60.0),
        st.floats(0.2, 3.0),
    )
    def test_identity_with_closed_form(self, rows, mu, sigma2):
        m = _matrix(rows).compact()
        s = compute_stats(m)
        penalty = PenaltyParams(mu, sigma2)
        lam = weigh_collection(m, "lambda", penalty).to_dense()
        for i in range(m.m):
            if s.b[i] < 1 or s.n_i[i] >= s.n or penalty.eta2 - s.term(i).r <= 1:
                continue
            _, counts = m.term_column(i)
            closed = plr_approx(s.term(i), s.d, counts, penalty)
            total = 2 * math.fsum(lam[:, i]) - LOG_SQRT_2PI
            assert abs(closed - total) < 1e-9 * max(1.0, abs(closed))


class TestWeighCollection:
    def test_tfidf_cells(self):
        m = _matrix(TOY)
        s = compute_stats(m)
        w = weigh_collection(m, "tfidf")
        for i in range(m.m):
            for j in range(m.d):
                assert w.get(i, j) == pytest.approx(tf_idf(m.count(i, j), s.b[i], s.d), abs=1e-15)

    def test_shapes_agree(self):
        m = _matrix(TOY)
        penalty = PenaltyParams(5.0, 1.0)
        shapes = {weigh_collection(m, sch, penalty).shape
                  for sch in ("tfidf", "btfidf", "tficf", "lambda", "sigmoid_lambda")}
        assert shapes == {(3, 4)}

    def test_sigmoid_composition(self):
        m = _matrix(TOY)
        penalty = PenaltyParams(5.0, 1.0)
        lam = weigh_collection(m, "lambda", penalty).to_dense()
        sig = weigh_collection(m, "sigmoid-lambda", penalty).to_dense()
        np.testing.assert_array_equal(sig, sigmoid(lam))

    def test_sigmoid_open_interval(self):
        m = _matrix(TOY)
        sig = weigh_collection(m, "sigmoid_lambda", PenaltyParams(5.0, 1.0)).to_dense()
        assert np.all((sig > 0) & (sig < 1))

    def test_nonnegative_count_schemes(self):
        m = _matrix(TOY)
        for scheme in ("tfidf", "btfidf", "tficf"):
            assert weigh_collection(m, scheme).to_dense().min() >= 0

    def test_blocks_match_full(self):
        m = _matrix(TOY)
        penalty = PenaltyParams(5.0, 1.0)
        full = weigh_collection(m, "lambda", penalty).to_dense()
        stacked = np.vstack([b for _, b in weight_blocks(m, "lambda", penalty=penalty, block_size=2)])
        np.testing.assert_array_equal(full, stacked)

    def test_lambda_needs_penalty(self):
        with pytest.raises(InvalidPenalty):
            weigh_collection(_matrix(TOY), "lambda")

    def test_unknown_scheme(self):
        with pytest.raises(DomainError):
            weigh_collection(_matrix(TOY), "bm25")

    def test_csv_layout(self):
        text = weigh_collection(_matrix([[1, 1], [2, 0]]), "tfidf").to_csv()
        lines = text.splitlines()
        assert lines[1] == "term,doc,weight"
