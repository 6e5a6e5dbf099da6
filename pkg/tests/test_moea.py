import math

import numpy as np
import pytest
from conftest import peel_oracle, peel_oracle_fast
from hypothesis import given
from hypothesis import strategies as st

from phasenas.moea import (
    RankedIndividual,
    crowding_distance,
    dominates,
    environmental_selection,
    fast_nondominated_sort,
    tournament_select,
)


def test_dominates():
    assert dominates((0.1, 100), (0.2, 200))
    assert not dominates((0.1, 200), (0.2, 100))
    assert not dominates((0.2, 100), (0.1, 200))
    assert not dominates((0.1, 100), (0.1, 100))


def test_sort_single_front():
    assert fast_nondominated_sort([(1, 3), (2, 2), (3, 1)]) == [[0, 1, 2]]


def test_sort_total_order():
    assert fast_nondominated_sort([(1, 1), (2, 2), (3, 3)]) == [[0], [1], [2]]


def test_sort_matches_oracle_200(rng):
    pts = rng.integers(0, 30, size=(200, 2)).astype(float).tolist()
    assert fast_nondominated_sort(pts) == peel_oracle(pts)


@given(st.lists(st.tuples(st.integers(0, 8), st.integers(0, 8), st.integers(0, 8)),
                min_size=1, max_size=40))
def test_sort_matches_oracle_three_objectives(pts):
    assert fast_nondominated_sort(pts) == peel_oracle(pts)


def test_crowding_small_fronts():
    assert crowding_distance([(1, 1)]).tolist() == [math.inf]
    assert crowding_distance([(1, 2), (2, 1)]).tolist() == [math.inf, math.inf]


def test_crowding_three_points():
    d = crowding_distance([(1, 3), (2, 2), (3, 1)])
    # middle point: (3-1)/(3-1) + (3-1)/(3-1)
    assert d[0] == d[2] == math.inf and d[1] == pytest.approx(2.0)


def test_crowding_zero_range_objective():
    d = crowding_distance([(1, 5), (1, 5), (1, 5)])
    assert d.tolist() == [0.0, 0.0, 0.0]


def _ind(rank, crowd):
    return RankedIndividual(None, None, rank, crowd)


def test_tournament_rank_wins(rng):
    pop = [_ind(0, 0.0), _ind(1, math.inf)]
    assert all(tournament_select(pop, rng) == 0 for _ in range(50))


def test_tournament_crowding_breaks_rank_tie(rng):
    pop = [_ind(0, 1.0), _ind(0, math.inf)]
    assert all(tournament_select(pop, rng) == 1 for _ in range(50))


def test_tournament_singleton(rng):
    assert tournament_select([_ind(3, 0.0)], rng) == 0


def test_tournament_full_tie_is_a_coin(rng):
    pop = [_ind(0, 1.0), _ind(0, 1.0)]
    picks = [tournament_select(pop, rng) for _ in range(2000)]
    assert 0.45 < np.mean(picks) < 0.55


def test_selection_keeps_whole_single_front():
    pts = [(1, 4), (2, 3), (3, 2), (4, 1)]
    assert sorted(environmental_selection(pts, 4)) == [0, 1, 2, 3]


def test_selection_drops_most_crowded_interior_point():
    # both ranges are 10; interior crowding by hand:
    # idx1 = 1.2/10 + 1.2/10 = 0.24, idx2 = 4/10 + 4/10 = 0.8, idx3 = 8.8/10 + 8.8/10 = 1.76
    pts = [(0, 10), (1, 9), (1.2, 8.8), (5, 5), (10, 0)]
    assert crowding_distance(pts)[1:4] == pytest.approx([0.24, 0.8, 1.76])
    assert sorted(environmental_selection(pts, 4)) == [0, 2, 3, 4]


def test_selection_elitism(rng):
    for _ in range(50):
        pts = rng.random((30, 2))
        front0 = fast_nondominated_sort(pts)[0]
        if len(front0) <= 15:
            assert set(front0) <= set(environmental_selection(pts, 15))


def test_selection_ties_follow_input_order():
    pts = [(1, 1)] * 6
    assert environmental_selection(pts, 3) == [0, 1, 2]


def test_selection_size_and_determinism(rng):
    pts = rng.random((80, 2))
    a = environmental_selection(pts, 40)
    assert len(a) == len(set(a)) == 40
    assert a == environmental_selection(pts.copy(), 40)


def test_fast_oracle_agrees_with_slow_oracle(rng):
    for _ in range(20):
        pts = rng.integers(0, 6, size=(40, 2)).tolist()
        assert peel_oracle_fast(pts) == peel_oracle(pts)
