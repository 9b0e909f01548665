import math
import time
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import h2, mutual_information_bits
from ratiolist.channel import Channel, bec, bsc, noiseless, useless
from ratiolist.information import (
    binary_divergence,
    binary_entropy,
    blahut_arimoto,
    converse_ratio_rhs,
    converse_tradeoff_rhs,
    fano_list_rhs,
    identification_list_bound,
    mutual_information,
    mutual_information_nats,
)


def test_binary_entropy_examples():
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0) == 0.0
    assert binary_entropy(1) == 0.0
    # 30-digit reference value
    assert binary_entropy(0.11) == pytest.approx(0.49991595816452799564, abs=1e-15)
    with pytest.raises(ValueError):
        binary_entropy(1.2)


def test_binary_divergence_examples():
    assert binary_divergence(0.3, 0.3) == 0.0
    assert binary_divergence(0, 0.5) == pytest.approx(math.log(2), rel=1e-15)
    want = 0.2 * math.log(4) + 0.8 * math.log(0.8 / 0.95)
    assert binary_divergence(0.2, 0.05) == pytest.approx(want, rel=1e-14)
    assert binary_divergence(0.5, 0.0) == math.inf
    assert binary_divergence(0.0, 0.0) == 0.0
    assert binary_divergence(1.0, 1.0) == 0.0
    with pytest.raises(ValueError):
        binary_divergence(-0.1, 0.5)


def test_binary_divergence_grid_nonnegative():
    grid = np.round(np.arange(0, 1.0001, 0.01), 10)
    for p in grid:
        for q in grid:
            d = binary_divergence(p, q)
            assert d >= 0
            assert (d == 0) == (p == q)


def test_mutual_information_examples():
    assert mutual_information([1 / 3] * 3, noiseless(3)) == pytest.approx(math.log2(3), abs=1e-14)
    assert mutual_information([0.2, 0.8], useless(2, 3)) == 0.0
    assert mutual_information([0.5, 0.5], bsc(0.11)) == pytest.approx(1 - h2(0.11), abs=1e-14)
    with pytest.raises(ValueError):
        mutual_information([1.0], bsc(0.1))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_mutual_information_matches_oracle_and_is_label_free(nx, ny, seed):
    g = np.random.default_rng(seed)
    w = g.random((nx, ny)) * (g.random((nx, ny)) < 0.8)
    w[:, -1] += 0.01
    w /= w.sum(axis=1, keepdims=True)
    px = g.dirichlet(np.ones(nx))
    ch = Channel(w)
    got = mutual_information(px, ch)
    assert got == pytest.approx(mutual_information_bits(px.tolist(), w.tolist()), abs=1e-12)
    perm = g.permutation(ny)
    assert mutual_information(px, Channel(w[:, perm])) == pytest.approx(got, abs=1e-12)
    assert mutual_information_nats(px, ch) == pytest.approx(got * math.log(2), abs=1e-12)


@pytest.mark.parametrize("p", [0, 0.05, 0.11, 0.25, 0.5])
def test_blahut_arimoto_bsc(p):
    res = blahut_arimoto(bsc(p))
    assert abs(res.capacity_bits - (1 - h2(p))) <= 1e-6
    assert res.gap >= 0 and res.converged


@pytest.mark.parametrize("e", [0.1, 0.3, 0.7])
def test_blahut_arimoto_bec(e):
    assert abs(blahut_arimoto(bec(e)).capacity_bits - (1 - e)) <= 1e-6


def test_blahut_arimoto_noiseless_ternary():
    assert abs(blahut_arimoto(noiseless(3)).capacity_bits - math.log2(3)) <= 1e-9


def test_blahut_arimoto_z_channel():
    # Z channel closed form: C = log2(1 + (1-q) q^(q/(1-q))), q = Pr(1 -> 0)
    q = 0.25
    want = math.log2(1 + (1 - q) * q ** (q / (1 - q)))
    res = blahut_arimoto(Channel([[1, 0], [q, 1 - q]]))
    assert abs(res.capacity_bits - want) <= 1e-8
    assert 0 <= res.capacity_bits <= 1


def test_blahut_arimoto_certificate_brackets_capacity():
    g = np.random.default_rng(5)
    for _ in range(10):
        w = g.random((3, 4))
        w /= w.sum(axis=1, keepdims=True)
        res = blahut_arimoto(Channel(w), tol=1e-7)
        assert res.gap <= 1e-7
        assert mutual_information(res.optimal_input, Channel(w)) == pytest.approx(res.capacity_bits, abs=1e-12)
        assert res.capacity_bits <= math.log2(3) + 1e-12


def test_blahut_arimoto_reports_nonconvergence():
    w = np.array([[0.6, 0.3, 0.1], [0.1, 0.3, 0.6], [0.3, 0.4, 0.3]])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = blahut_arimoto(Channel(w), tol=1e-15, max_iter=3)
    assert not res.converged and res.iterations == 3
    assert any(issubclass(c.category, RuntimeWarning) for c in caught)
    with pytest.raises(ValueError):
        blahut_arimoto(bsc(0.1), tol=0)


def test_blahut_arimoto_is_fast():
    t = time.perf_counter()
    blahut_arimoto(bsc(0.25))
    assert time.perf_counter() - t < 1.0


def test_fano_list_rhs_examples():
    assert fano_list_rhs(0, 2, 0) == 0
    assert fano_list_rhs(1, 2, 5.0) == 0
    want = h2(0.1) * math.log(2) + 0.1 * math.log(15) + 0.9 * math.log(2)
    assert fano_list_rhs(0.1, 16, math.log(2)) == pytest.approx(want, rel=1e-14)
    with pytest.raises(ValueError):
        fano_list_rhs(0.1, 1, 0)
    with pytest.raises(ValueError):
        fano_list_rhs(0.1, 4, -1)


@given(st.floats(0, 1), st.integers(2, 1000), st.floats(0, 50))
def test_fano_list_rhs_nonnegative(pe, k, e):
    assert fano_list_rhs(pe, k, e) >= 0


def test_identification_list_bound_examples():
    assert identification_list_bound(0.5, 0.1, 0.2) == pytest.approx(1 / 6, abs=1e-15)
    assert identification_list_bound(0.5, 0.0, 10.0) == pytest.approx(1 - 0.5 / 10.5, abs=1e-15)
    assert identification_list_bound(0.5, 0.1, 0.1 + 1e-12) == pytest.approx(0.0, abs=1e-11)
    with pytest.raises(ValueError):
        identification_list_bound(0.5, 0.2, 0.2)


def test_converse_ratio_rhs_examples():
    assert converse_ratio_rhs(0.0, 1, 0.0, 0.0) == 1.0
    assert converse_ratio_rhs(7.5, 10, 0.0, 0.0) == pytest.approx(8.5 / 10)
    got = converse_ratio_rhs(34.66, 100, 0.1, 0.1)
    assert got == pytest.approx((34.66 + 1) / 81, rel=1e-14)
    assert round(got, 4) == 0.4402
    for eps, zeta in ((1.0, 0.0), (0.0, 1.0)):
        with pytest.raises(ValueError):
            converse_ratio_rhs(1.0, 10, eps, zeta)


def test_converse_tradeoff_rhs():
    assert converse_tradeoff_rhs(2.0, 6.0) == pytest.approx(0.5)
