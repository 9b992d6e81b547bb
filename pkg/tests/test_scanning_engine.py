"""Engine behavior: measures, sweeps, record tables, closure, budgets,
counting, and agreement with the flat box oracle."""

import math
from fractions import Fraction

import numpy as np
import pytest

import oracles
from badapprox import (
    BudgetExceeded,
    EmptyRange,
    FormMatrix,
    NormConvention,
    Subspace,
    brute_force_measure,
    count_near_annulus,
    count_near_shell,
    golden_line,
    measure,
    measure_sweep,
    neighborhood_lattice_points,
    rational_subspace,
    record_table,
)

INC = NormConvention.INCLUSIVE_UPPER
STR = NormConvention.STRICT_UPPER


def random_subjects(seed=99, count=8):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        m, n = rng.integers(1, 3, size=2)
        out.append(FormMatrix((rng.random((m, n)) - 0.5) * 4))
    for _ in range(count):
        d = int(rng.integers(2, 4))
        k = int(rng.integers(1, d))
        q, _ = np.linalg.qr(rng.standard_normal((d, k)))
        out.append(Subspace(q))
    return out


def test_half_integer_form():
    th = FormMatrix([[0.5]])
    b1 = measure(th, 1)
    assert b1.value == 0.5 and tuple(b1.witness) == (1,)
    b2 = measure(th, 2)
    assert b2.value == 0.0 and tuple(b2.witness) == (2,)
    tab = record_table(th, 10)
    assert tab.contains_integer_points
    assert [(r.t, r.value, tuple(r.witness)) for r in tab.records] == [
        (1, 0.5, (1,)),
        (2, 0.0, (2,)),
    ]


def test_golden_first_values():
    g = golden_line()
    b1 = measure(g, 1)
    assert tuple(b1.witness) == (1, 1)
    assert b1.value == pytest.approx(0.32491969623290645, abs=1e-15)
    b2 = measure(g, 2)
    assert tuple(b2.witness) == (1, 2)
    assert b2.value == pytest.approx(0.20081141588622725, abs=1e-15)


def test_strict_equals_inclusive_shifted():
    for sub in random_subjects(seed=17, count=4):
        sweep_inc = measure_sweep(sub, 24, convention=INC)
        sweep_str = measure_sweep(sub, 25, convention=STR)
        for t in range(2, 26):
            assert sweep_str.value_at(t) == sweep_inc.value_at(t - 1)
            assert tuple(sweep_str.witness_at(t)) == tuple(sweep_inc.witness_at(t - 1))


def test_empty_range():
    th = FormMatrix([[0.3]])
    with pytest.raises(EmptyRange):
        measure(th, 1, convention=STR)
    with pytest.raises(EmptyRange):
        measure(th, 0)


def test_record_table_invariants():
    for sub in random_subjects(seed=31, count=3):
        for conv in (INC, STR):
            tab = record_table(sub, 30, convention=conv)
            ts = [r.t for r in tab.records]
            vs = [r.value for r in tab.records]
            assert ts == sorted(ts) and len(set(ts)) == len(ts)
            assert all(vs[i] > vs[i + 1] for i in range(len(vs) - 1))
            shift = 1 if conv is STR else 0
            for r in tab.records:
                assert int(np.abs(r.witness).max()) == r.t - shift
            assert tab.t_max_scanned == 30
            # the table's step function reproduces the sweep
            sweep = measure_sweep(sub, 30, convention=conv)
            start = 2 if conv is STR else 1
            for t in range(start, 31):
                assert tab.value_at(t) == sweep.value_at(t)


def test_rational_subspace_closes_exactly():
    sp = rational_subspace(np.array([[1, 1]]))
    tab = record_table(sp, 10)
    assert tab.contains_integer_points
    assert [(r.t, r.value, tuple(r.witness)) for r in tab.records] == [(1, 0.0, (1, 1))]
    assert tab.t_max_scanned == 10


def test_float_line_near_rational_does_not_close():
    """A float basis through (3, 1) is not exactly rational: distances at
    multiples of (3, 1) are tiny but must stay positive (no snapping)."""
    v = np.array([[3.0], [1.0]]) / np.sqrt(10.0)
    sp = Subspace(v)
    tab = record_table(sp, 50)
    assert not tab.contains_integer_points
    assert all(r.value > 0.0 for r in tab.records)


def test_matrix_near_zero_rechecked_exactly():
    """float(0.1) * 10 rounds to 1.0 in float64, but the exact product is not
    an integer; the scan must not report a false integer relation."""
    th = FormMatrix([[0.1]])
    tab = record_table(th, 10)
    assert not tab.contains_integer_points
    exact = float(abs(Fraction(0.1) * 10 - 1))
    assert tab.records[-1].value == pytest.approx(exact, rel=1e-12)
    assert tab.records[-1].value > 0.0
    bf = brute_force_measure(th, 10)
    assert bf.value == tab.records[-1].value


def test_zero_witness_improves_lexicographically():
    """After closure the champion witness can still drop to a lex-smaller zero
    point in a later shell; measure and sweep must track the box oracle."""
    sp = rational_subspace(np.array([[-1, -2, -2], [-1, -1, 3]]))
    fn = lambda p: oracles.subspace_values_with_span(sp.basis, sp.int_span, p)
    bv, bw = oracles.box_best_per_t(fn, 3, 12)
    sweep = measure_sweep(sp, 12)
    for t in range(1, 13):
        assert sweep.value_at(t) == bv[t]
        assert tuple(sweep.witness_at(t)) == bw[t]
    assert tuple(measure(sp, 2).witness) == (1, 2, 2)
    assert tuple(measure(sp, 3).witness) == (1, 1, -3)
    assert tuple(measure(sp, 12).witness) == (0, 1, 5)


def test_budget_exceeded_carries_partial():
    g = golden_line()
    full = record_table(g, 2000)
    with pytest.raises(BudgetExceeded) as info:
        record_table(g, 2000, node_budget=60)
    part = info.value.partial
    assert part is not None
    assert part.t_max_scanned < 2000
    got = [(r.t, r.value, tuple(r.witness)) for r in part.records]
    want = [(r.t, r.value, tuple(r.witness)) for r in full.records[: len(got)]]
    assert got == want
    assert len(got) >= 1


def test_sweep_vs_box_oracle_matrix():
    th = FormMatrix(np.array([[0.7548776662466927, 0.5698402909980532]]))
    bv, bw = oracles.box_best_per_t(lambda p: oracles.matrix_values(th.entries, p), 2, 35)
    sweep = measure_sweep(th, 35)
    for t in range(1, 36):
        assert abs(sweep.value_at(t) - bv[t]) <= 1e-9
        assert tuple(sweep.witness_at(t)) == bw[t]
    bf = brute_force_measure(th, 35)
    assert bf.value == sweep.value_at(35)
    assert tuple(bf.witness) == tuple(sweep.witness_at(35))


def test_count_near_shell_and_annulus():
    sp = rational_subspace(np.array([[1, 0]]))  # the x-axis in R^2
    psi = lambda t: 0.4 / np.asarray(t, dtype=np.float64) ** 0  # constant 0.4
    # shell |z|_sup = T intersected with distance <= 0.4: the two axis points
    for T in (1, 2, 5):
        assert count_near_shell(sp, psi, T) == 2
    # dyadic annulus T/2 < |z| <= T: shells 3, 4, 5 at two axis points each
    assert count_near_annulus(sp, psi, 5) == 6


def test_neighborhood_lattice_points_axis_line():
    sp = rational_subspace(np.array([[1, 0]]))
    psi = lambda t: np.full_like(np.asarray(t, dtype=np.float64), 0.3)
    pts = neighborhood_lattice_points(sp, psi, 4, shift=None, scale=1.0)
    expect = sorted([(k, 0) for k in range(-4, 5)])
    assert [tuple(p) for p in pts] == expect
    # scaled-down copy shrinks the box and the tube together
    half = neighborhood_lattice_points(sp, psi, 4, shift=None, scale=0.5)
    assert [tuple(p) for p in half] == sorted([(k, 0) for k in range(-2, 3)])
    shifted = neighborhood_lattice_points(sp, psi, 4, shift=[0.4, 0.4], scale=0.5)
    assert all(abs(z[0] - 0.4) <= 2.0 for z in shifted)


def test_measure_accepts_only_known_subjects():
    from badapprox.errors import ShapeError

    with pytest.raises(ShapeError):
        measure(np.eye(2), 5)
