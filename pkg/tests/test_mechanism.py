import math

import numpy as np
import pytest
from scipy import stats

from gdpaudit.game import build_neighbors
from gdpaudit.mechanism import (
    Dataset,
    DomainSpec,
    MarginalWorkload,
    NoisyMarginals,
    build_workload,
    generate,
    measure,
    noise_scale,
)

DOM = DomainSpec.binary(3)


def test_domain_spec_validation():
    assert DOM.size == 8 and DOM.shape == (2, 2, 2)
    with pytest.raises(ValueError):
        DomainSpec(())
    with pytest.raises(ValueError):
        DomainSpec((("x", 1),))


def test_dataset_rejects_out_of_domain():
    with pytest.raises(ValueError):
        Dataset(DOM, [[0, 2, 0]])


@pytest.mark.parametrize("order,cliques", [
    (1, ((0,), (1,), (2,))),
    (2, ((0, 1), (1, 2))),
    (3, ((0, 1, 2),)),
])
def test_build_workload(order, cliques):
    assert build_workload(DOM, order).cliques == cliques


def test_build_workload_rejects_large_order():
    with pytest.raises(ValueError):
        build_workload(DOM, 4)


def test_workload_validation():
    with pytest.raises(ValueError):
        MarginalWorkload(((0,), (0,)))
    with pytest.raises(ValueError):
        MarginalWorkload(((0,), (1, 2)))


def test_noise_scale_examples():
    assert noise_scale(0.5, 1) == 1.0
    assert noise_scale(0.10125, 3) == pytest.approx(math.sqrt(3 / 0.2025))
    assert noise_scale(0.10125, 3) == pytest.approx(3.849, abs=1e-3)


@pytest.mark.parametrize("order", [1, 2, 3])
@pytest.mark.parametrize("rho", [0.01, 0.10125, 2.0])
def test_budget_accounting(order, rho):
    wl = build_workload(DOM, order)
    d_out, _ = build_neighbors(DOM, 10)
    m = measure(d_out, wl, rho, np.random.default_rng(0))
    assert sum(1 / (2 * m.sigma**2) for _ in m.tables) == pytest.approx(rho, rel=1e-14)


def test_measure_shapes_and_rejects():
    wl = build_workload(DOM, 2)
    d_out, _ = build_neighbors(DOM, 10)
    m = measure(d_out, wl, 0.5, np.random.default_rng(1))
    assert [t.shape for t in m.tables] == [(2, 2), (2, 2)]
    for bad in (0.0, -1.0):
        with pytest.raises(ValueError):
            measure(d_out, wl, bad, np.random.default_rng(1))


def test_measure_is_unbiased():
    wl = build_workload(DOM, 1)
    _, d_in = build_neighbors(DOM, 10)
    rng = np.random.default_rng(2024)
    n = 100_000
    acc = np.zeros(6)
    for _ in range(n):
        acc += measure(d_in, wl, 0.10125, rng).flat()
    mean = acc / n
    sigma = noise_scale(0.10125, 3)
    truth = np.array([10, 1, 10, 1, 10, 1], dtype=float)
    assert np.all(np.abs(mean - truth) <= 3 * sigma / math.sqrt(n))


def test_measure_deterministic():
    wl = build_workload(DOM, 1)
    d_out, _ = build_neighbors(DOM, 10)
    a = measure(d_out, wl, 0.1, np.random.default_rng(7))
    b = measure(d_out, wl, 0.1, np.random.default_rng(7))
    assert a == b


def _marg(tables, cliques, sigma=1.0):
    return NoisyMarginals(tuple(cliques), tuple(np.asarray(t, float) for t in tables), sigma)


def test_generate_concentrated_mass():
    m = _marg([[0, 5.0], [3.0, -1.0], [-2.0, 4.0]], [(0,), (1,), (2,)])
    out = generate(m, 25, np.random.default_rng(0), DOM)
    assert len(out) == 25
    assert np.all(out.records == [1, 0, 1])


def test_generate_empty():
    m = _marg([[1, 1.0]] * 3, [(0,), (1,), (2,)])
    assert len(generate(m, 0, np.random.default_rng(0), DOM)) == 0


def test_generate_all_negative_falls_back_to_uniform():
    m = _marg([[-1.0, -2.0]] * 3, [(0,), (1,), (2,)])
    out = generate(m, 40_000, np.random.default_rng(3), DOM)
    freq = out.records.mean(axis=0)
    assert np.all(np.abs(freq - 0.5) < 0.01)


@pytest.mark.parametrize("order", [1, 2, 3])
def test_generate_uniform_tables_chi2(order):
    wl = build_workload(DOM, order)
    tables = [np.full((2,) * order, 7.0) for _ in wl.cliques]
    out = generate(_marg(tables, wl.cliques), 100_000, np.random.default_rng(11), DOM)
    counts = out.histogram().ravel()
    assert stats.chisquare(counts).pvalue > 0.01


def test_generate_chain_factorization():
    t01 = np.array([[4.0, 1.0], [2.0, 3.0]])
    t12 = np.array([[1.0, 3.0], [5.0, -2.0]])
    m = _marg([t01, t12], [(0, 1), (1, 2)])
    out = generate(m, 200_000, np.random.default_rng(5), DOM)
    p01 = t01 / t01.sum()
    c12 = np.clip(t12, 0, None)
    c12 = c12 / c12.sum(axis=1, keepdims=True)
    expected = p01[:, :, None] * c12[None, :, :]
    emp = out.histogram() / len(out)
    assert np.max(np.abs(emp - expected)) < 0.005


def test_generate_zero_mass_parent_is_uniform():
    t01 = np.array([[5.0, 5.0], [0.0, 0.0]])
    t12 = np.array([[-1.0, -1.0], [1.0, 0.0]])  # parent a1 = 0 has no mass
    m = _marg([t01, t12], [(0, 1), (1, 2)])
    out = generate(m, 50_000, np.random.default_rng(6), DOM).records
    given0 = out[out[:, 1] == 0, 2]
    given1 = out[out[:, 1] == 1, 2]
    assert abs(given0.mean() - 0.5) < 0.02
    assert np.all(given1 == 0)


def test_generate_conforms_and_is_deterministic():
    wl = build_workload(DOM, 2)
    _, d_in = build_neighbors(DOM, 10)
    m = measure(d_in, wl, 0.1, np.random.default_rng(9))
    a = generate(m, 50, np.random.default_rng(1), DOM)
    b = generate(m, 50, np.random.default_rng(1), DOM)
    assert a == b and len(a) == 50
    assert np.all((a.records >= 0) & (a.records < 2))


def test_generate_rejects_non_path():
    m = _marg([np.ones((2, 2)), np.ones((2, 2))], [(0, 2), (1, 2)])
    with pytest.raises(ValueError):
        generate(m, 5, np.random.default_rng(0))


@pytest.mark.parametrize("order", [1, 2, 3])
def test_whitebox_shift_matches_implied_mu(order):
    """Worst-case pair moves exactly one cell per clique by one."""
    rho = 0.10125
    wl = build_workload(DOM, order)
    d_out, d_in = build_neighbors(DOM, 10)
    zero = np.random.default_rng(0)
    m_out = measure(d_out, wl, rho, zero)
    m_in = measure(d_in, wl, rho, np.random.default_rng(0))
    shift = m_in.flat() - m_out.flat()
    assert np.allclose(np.sort(shift)[-len(wl):], 1.0)
    assert np.count_nonzero(np.abs(shift) > 1e-9) == len(wl)
    mu = np.linalg.norm(shift) / m_in.sigma
    assert mu == pytest.approx(math.sqrt(2 * rho), rel=1e-9)
