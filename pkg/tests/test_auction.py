import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bridgebid.auction import (DOUBLE, PASS, REDOUBLE, AuctionState, Contract, IllegalBidError,
                               bid_str, contract_bid, format_auction, max_auction_length,
                               parse_auction, parse_bid)
from bridgebid.core import Seat

from oracles import oracle_contract, oracle_legal_mask, oracle_terminal


def run(text, dealer=Seat.N):
    return AuctionState.from_bids(dealer, parse_auction(text))


def test_bid_ordering_and_names():
    assert contract_bid(1, 0) == 0
    assert contract_bid(7, 4) == 34
    assert [bid_str(b) for b in (0, 4, 34, PASS, DOUBLE, REDOUBLE)] == ["1C", "1N", "7N", "P", "X", "XX"]
    assert parse_bid("3nt") == contract_bid(3, 4)
    with pytest.raises(ValueError):
        parse_bid("8S")


def test_four_passes_end_with_no_contract():
    s = run("P P P P")
    assert s.is_terminal()
    assert s.final_contract().passed_out


def test_three_passes_after_a_bid():
    s = run("1S P P P")
    assert s.is_terminal()
    c = s.final_contract()
    assert (c.level, c.strain, c.declarer) == (1, 3, Seat.N)


def test_declarer_is_first_to_name_the_strain():
    c = run("1H P 2H P 4H P P P", Seat.E).final_contract()
    assert c.declarer == Seat.E
    c = run("P 1D P 1H P 2H P 4H P P P").final_contract()
    assert c.declarer == Seat.W and str(c) == "4H by W"


def test_doubling_rules():
    s = run("1C")
    assert s.is_legal(DOUBLE) and not s.is_legal(REDOUBLE)
    s = run("1C P")
    assert not s.is_legal(DOUBLE)
    s = run("1C X")
    assert s.is_legal(REDOUBLE) and not s.is_legal(DOUBLE)
    s = run("1C X P P")
    assert s.is_legal(REDOUBLE)
    c = run("1C X XX P P P").final_contract()
    assert c.doubling == 2


def test_new_bid_clears_doubling():
    c = run("1C X 1D P P P").final_contract()
    assert c.doubling == 0


def test_illegal_bids_raise():
    for text, bid in (("1S", contract_bid(1, 0)), ("", DOUBLE), ("1S P", DOUBLE), ("1S X P", REDOUBLE)):
        with pytest.raises(IllegalBidError):
            run(text).apply(bid)
    with pytest.raises(IllegalBidError):
        run("P P P P").apply(PASS)


def test_longest_auction():
    bids = [PASS, PASS, PASS]
    for b in range(35):
        bids += [b, PASS, PASS, DOUBLE, PASS, PASS, REDOUBLE, PASS, PASS]
    bids.append(PASS)
    s = AuctionState.from_bids(Seat.N, bids)
    assert s.is_terminal()
    assert len(bids) == max_auction_length() + 1
    assert max_auction_length() == 318


def test_contract_parse():
    c = Contract.parse("3NX", Seat.E)
    assert (c.level, c.strain, c.doubling, c.declarer) == (3, 4, 1, Seat.E)
    assert Contract.parse("6sxx").doubling == 2
    with pytest.raises(ValueError):
        Contract.parse("X")


def test_format_round_trip():
    text = "1C X XX P 1H P P P"
    assert format_auction(parse_auction(text)) == text


def test_state_is_immutable():
    s = run("1C")
    with pytest.raises(AttributeError):
        s.doubling = 1


def test_exhaustive_short_auctions_against_oracle():
    # every legal prefix of length <= 5 (length-6 coverage is in the acceptance suite)
    frontier = [()]
    for depth in range(5):
        nxt = []
        for bids in frontier:
            s = AuctionState.from_bids(Seat.E, bids)
            assert s.legal_mask == oracle_legal_mask(1, bids), bids
            for b in range(38):
                if s.legal_mask >> b & 1:
                    t = bids + (b,)
                    if not oracle_terminal(t):
                        nxt.append(t)
        frontier = nxt


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 3), st.lists(st.integers(0, 10 ** 6), min_size=1, max_size=60))
def test_random_walks_match_oracle(dealer, picks):
    s = AuctionState.start(Seat(dealer))
    for p in picks:
        if s.is_terminal():
            break
        legal = sorted(s.legal_bids())
        s = s.apply(legal[p % len(legal)])
    assert s.is_terminal() == oracle_terminal(s.bids)
    if s.is_terminal():
        c = s.final_contract()
        want = oracle_contract(dealer, s.bids)
        assert (None if c.passed_out else (c.level, c.strain, c.doubling, int(c.declarer))) == want
    else:
        assert s.legal_mask == oracle_legal_mask(dealer, s.bids)
