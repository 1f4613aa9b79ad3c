import pytest
from hypothesis import given, strategies as st

from bridgebid.auction import Contract
from bridgebid.core import Seat, Vulnerability
from bridgebid.scoring import (BoardResult, DuplicateScore, Team, declarer_score, duplicate_score,
                               imp, score_contract, team_match_imp, trick_points)


def test_trick_points():
    assert trick_points(1, 4) == 40
    assert trick_points(3, 4) == 100
    assert trick_points(4, 2) == 120
    assert trick_points(5, 0) == 100
    assert trick_points(2, 3, 1) == 120
    assert trick_points(1, 4, 2) == 160


def test_sides_get_opposite_signs():
    r = duplicate_score(BoardResult(Contract(4, 3, 0, Seat.E), 10, True))
    assert r == DuplicateScore(-620, 620)
    assert r.for_side(1) == 620


def test_score_contract_uses_declarer_vulnerability():
    c = Contract(3, 4, 0, Seat.W)
    assert score_contract(c, 9, Vulnerability.NS).ew_points == 400
    assert score_contract(c, 9, Vulnerability.EW).ew_points == 600


def test_passed_out_scores_zero():
    assert score_contract(Contract(), 0, Vulnerability.BOTH) == DuplicateScore(0, 0)


def test_board_result_validation():
    with pytest.raises(ValueError):
        BoardResult(Contract(1, 0, 0, Seat.N), 14)
    with pytest.raises(ValueError):
        BoardResult(Contract(), 3)


def test_team_match_swing():
    t1 = DuplicateScore(420, -420)  # team A NS made game
    t2 = DuplicateScore(170, -170)  # team B NS stopped in a partscore, team A sat EW
    assert team_match_imp(t1, t2) == imp(420 - 170) == 6
    assert team_match_imp(t1, t2, Team.B) == -6


def test_same_result_both_tables_is_a_push():
    s = DuplicateScore(-100, 100)
    assert team_match_imp(s, s) == 0


@given(st.integers(1, 7), st.integers(0, 4), st.integers(0, 2), st.integers(0, 13), st.booleans())
def test_made_contracts_score_positive(level, strain, dbl, tricks, vul):
    s = declarer_score(level, strain, dbl, tricks, vul)
    assert (s > 0) == (tricks >= level + 6)
    assert s % 10 == 0


@given(st.integers(1, 7), st.integers(0, 4), st.integers(0, 2), st.integers(0, 12), st.booleans())
def test_extra_trick_never_hurts(level, strain, dbl, tricks, vul):
    assert declarer_score(level, strain, dbl, tricks + 1, vul) > declarer_score(level, strain, dbl, tricks, vul)


@given(st.integers(1, 7), st.integers(0, 4), st.integers(0, 12))
def test_doubling_a_failing_contract_costs_more(level, strain, tricks):
    if tricks < level + 6:
        for vul in (False, True):
            assert declarer_score(level, strain, 1, tricks, vul) < declarer_score(level, strain, 0, tricks, vul)
