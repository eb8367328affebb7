import math

import numpy as np
import pytest

from phgsolve.errors import DimensionMismatch, InvalidIndexEntry, TermBeyondRemainder
from phgsolve.series_core import (
    FORCING,
    SCHWARTZ,
    IndexEntry,
    PhgExpansion,
    PhgTerm,
    add_term,
    extended_union,
    predicted_index_set,
    validate_index_set,
)


def keys(E):
    return [(round(e.s.real, 9), e.k) for e in E]


def is_closed(E):
    for e in E:
        if e.k >= 1 and not E.contains(e.s, e.k - 1):
            return False
        if e.s.real + 1 < E.horizon and not E.contains(e.s + 1, e.k):
            return False
    return True


def random_index_set(rng, horizon=5.0):
    entries = [IndexEntry(float(rng.integers(0, 4)), int(rng.integers(0, 3))) for _ in range(rng.integers(0, 4))]
    return validate_index_set(entries, horizon)


# ==================== validate_index_set ====================


def test_validate_shift_closure():
    E = validate_index_set([IndexEntry(2, 0)], 4)
    assert keys(E) == [(2, 0), (3, 0)]


def test_validate_log_closure_then_shift():
    E = validate_index_set([IndexEntry(2, 1)], 4)
    assert keys(E) == [(2, 0), (2, 1), (3, 0), (3, 1)]


def test_validate_empty():
    E = validate_index_set([], 5)
    assert E.is_empty()
    assert E.horizon == 5


def test_negative_log_rejected():
    with pytest.raises(InvalidIndexEntry):
        IndexEntry(1, -1)


def test_infinite_horizon_rejected():
    with pytest.raises(InvalidIndexEntry):
        validate_index_set([IndexEntry(0, 0)], math.inf)


def test_validate_idempotent_and_closed(rng):
    for _ in range(30):
        E = random_index_set(rng)
        again = validate_index_set(E.entries, E.horizon)
        assert keys(again) == keys(E)
        assert is_closed(E)


def test_nearby_exponents_identified():
    E = validate_index_set([IndexEntry(1.0, 0), IndexEntry(1.0 + 1e-12, 1)], 2)
    assert keys(E) == [(1, 0), (1, 1)]


# ==================== extended_union ====================


def test_extended_union_same_exponents():
    E = validate_index_set([IndexEntry(1, 0), IndexEntry(2, 0)], 3)
    U = extended_union(E, E)
    assert keys(U) == [(1, 0), (1, 1), (2, 0), (2, 1)]


def test_extended_union_with_empty():
    E = validate_index_set([IndexEntry(1, 0), IndexEntry(2, 0)], 3)
    assert keys(extended_union(E, validate_index_set([], 3))) == keys(E)


def test_extended_union_log_sum():
    E = validate_index_set([IndexEntry(1, 0), IndexEntry(2, 0)], 4)
    F = validate_index_set([IndexEntry(2, 1), IndexEntry(3, 1), IndexEntry(2, 0), IndexEntry(3, 0)], 4)
    assert extended_union(E, F).contains(2, 2)


def test_extended_union_commutative_associative(rng):
    for _ in range(20):
        A, B, C = (random_index_set(rng) for _ in range(3))
        assert keys(extended_union(A, B)) == keys(extended_union(B, A))
        left = extended_union(extended_union(A, B), C)
        right = extended_union(A, extended_union(B, C))
        assert keys(left) == keys(right)


# ==================== predicted_index_set ====================


def test_predicted_zero_orders_is_identity():
    F = validate_index_set([IndexEntry(4, 0)], 8)
    assert keys(predicted_index_set(F, lambda s: 0, FORCING, 8)) == keys(F)


def test_predicted_single_order():
    F = validate_index_set([IndexEntry(1, 0)], 4)
    ord_fn = lambda s: 1 if abs(s - 2) < 1e-9 else 0
    E = predicted_index_set(F, ord_fn, FORCING, 4)
    assert keys(E) == [(1, 0), (2, 0), (2, 1), (3, 0), (3, 1)]


def test_predicted_schwartz_skips_starting_point():
    spec = [IndexEntry(2, 0)]
    ord_fn = lambda s: 1 if abs(s - 2) < 1e-9 else 0
    E = predicted_index_set(spec, ord_fn, SCHWARTZ, 4)
    assert keys(E) == [(2, 0), (3, 0)]
    assert keys(predicted_index_set(spec, ord_fn, FORCING, 4)) == [(2, 0), (2, 1), (3, 0), (3, 1)]


def test_predicted_divergence_pattern():
    # ord = 1 exactly at s = n - 1 = 2 (n = 3)
    ord_fn = lambda s: 1 if abs(s - 2) < 1e-9 else 0
    F = validate_index_set([IndexEntry(0, 0)], 5)
    E = predicted_index_set(F, ord_fn, FORCING, 5)
    assert E.max_log(1) == 0
    assert E.max_log(2) == 1
    assert E.max_log(4) == 1


def test_predicted_identity_on_random_sets(rng):
    for _ in range(20):
        F = random_index_set(rng)
        assert keys(predicted_index_set(F, lambda s: 0)) == keys(F)


# ==================== expansions ====================


def test_add_term_cancellation():
    e = PhgExpansion.from_terms([PhgTerm(2, 0, [-1.0])], 1, 5)
    assert add_term(e, PhgTerm(2, 0, [1.0])).is_zero()


def test_add_term_to_empty():
    e = add_term(PhgExpansion.empty(1, 5), PhgTerm(3, 1, [1.0]))
    assert [(t.s.real, t.k) for t in e] == [(3, 1)]


def test_add_term_vector_merge():
    e = PhgExpansion.from_terms([PhgTerm(2, 0, [1.0, 0.0])], 2, 5)
    merged = add_term(e, PhgTerm(2, 0, [0.0, 1.0]))
    np.testing.assert_allclose(merged.coefficient(2, 0), [1.0, 1.0])


def test_add_term_beyond_remainder():
    with pytest.raises(TermBeyondRemainder):
        add_term(PhgExpansion.empty(1, 2), PhgTerm(2, 0, [1.0]))


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        PhgExpansion.from_terms([PhgTerm(0, 0, [1.0, 2.0])], 1, 3)


def test_canonical_order_and_shift():
    e = PhgExpansion.from_terms(
        [PhgTerm(2, 1, [1.0]), PhgTerm(1, 0, [2.0]), PhgTerm(2, 0, [3.0])], 1, 4
    )
    assert [(t.s.real, t.k) for t in e] == [(1, 0), (2, 0), (2, 1)]
    shifted = e.shift(1.5)
    assert shifted.remainder_order == 5.5
    assert shifted.leading_exponent() == 2.5


def test_truncate_and_index_set():
    e = PhgExpansion.from_terms([PhgTerm(1, 0, [1.0]), PhgTerm(3, 2, [1.0])], 1, 5)
    assert len(e.truncate(2)) == 1
    assert keys(e.index_set(4)) == [(1, 0), (2, 0), (3, 0), (3, 1), (3, 2)]


def test_evaluate_matches_closed_form():
    e = PhgExpansion.from_terms([PhgTerm(2, 1, [3.0])], 1, 5)
    rho = np.array([0.1, 0.5])
    np.testing.assert_allclose(e.evaluate(rho)[:, 0], 3.0 * rho ** 2 * np.log(rho))
