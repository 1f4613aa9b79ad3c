import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bridgebid.auction import DOUBLE, PASS, REDOUBLE, AuctionState, parse_auction
from bridgebid.core import Rng, Seat, generate_deal, hand_to_bits
from bridgebid.encoding import (ENN_INPUT_DIM, HISTORY_DIM, PNN_INPUT_DIM, auction_enn_inputs,
                                build_enn_input, build_pnn_input, decode_history, encode_history,
                                history_slots)


def test_dimensions():
    assert HISTORY_DIM == 318
    assert ENN_INPUT_DIM == 372
    assert PNN_INPUT_DIM == 424


def test_slot_layout():
    assert history_slots(parse_auction("P P P")) == [0, 1, 2]
    assert history_slots(parse_auction("1C")) == [3]
    assert history_slots(parse_auction("7N")) == [3 + 9 * 34]
    assert history_slots(parse_auction("1S X P P XX P P")) == [30, 33, 34, 35, 36, 37, 38]


def test_impossible_patterns_rejected():
    v = np.zeros(HISTORY_DIM, dtype=np.uint8)
    v[1] = 1  # a second pass without the first
    with pytest.raises(ValueError):
        decode_history(v)
    v = np.zeros(HISTORY_DIM, dtype=np.uint8)
    v[[3, 9]] = 1  # redouble with no double
    with pytest.raises(ValueError):
        decode_history(v)
    with pytest.raises(ValueError):
        decode_history(np.zeros(10))


def test_enn_input_layout():
    deal = generate_deal(Rng(0), 3)
    state = AuctionState.from_bids(deal.dealer, [PASS])
    seat = state.to_act
    x = build_enn_input(deal, seat, state)
    assert x.shape == (ENN_INPUT_DIM,)
    assert np.array_equal(x[:52], hand_to_bits(deal.hands[seat]))
    assert x[54] == 1 and x[54:].sum() == 1
    with pytest.raises(ValueError):
        build_enn_input(deal, Seat((seat + 1) % 4), state)


def test_auction_inputs_match_stepwise_inputs():
    deal = generate_deal(Rng(0), 11)
    bids = parse_auction("1C X XX P 1H P P P")
    rows = auction_enn_inputs(deal, bids)
    state = AuctionState.start(deal.dealer)
    for i, b in enumerate(bids):
        assert np.array_equal(rows[i], build_enn_input(deal, state.to_act, state))
        state = state.apply(b)


def test_pnn_input_checks_estimate_range():
    x = np.zeros(ENN_INPUT_DIM)
    assert build_pnn_input(x, np.full(52, 0.25)).shape == (PNN_INPUT_DIM,)
    with pytest.raises(ValueError):
        build_pnn_input(x, np.full(52, 1.5))


@settings(max_examples=300, deadline=None)
@given(st.lists(st.integers(0, 10 ** 6), max_size=80))
def test_round_trip_random_walks(picks):
    s = AuctionState.start(Seat.N)
    for p in picks:
        legal = sorted(s.legal_bids())
        nxt = s.apply(legal[p % len(legal)])
        if nxt.is_terminal():
            break
        s = nxt
    v = encode_history(s.bids)
    assert int(v.sum()) == len(s.bids)
    assert decode_history(v) == list(s.bids)
