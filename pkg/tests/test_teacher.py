import pytest

from bridgebid.auction import AuctionState, PASS, bid_str, parse_auction
from bridgebid.core import Rng, Seat, generate_deal, parse_hand
from bridgebid.teacher import is_balanced, teacher_auction, teacher_bid


def opening(hand_text):
    return bid_str(teacher_bid(parse_hand(hand_text), AuctionState.start(Seat.N)))


def after(hand_text, auction):
    state = AuctionState.from_bids(Seat.N, parse_auction(auction))
    return bid_str(teacher_bid(parse_hand(hand_text), state))


@pytest.mark.parametrize("hand,call", [
    ("AKJ.KQ2.Q43.J432", "1N"),     # 16 balanced
    ("AKJ.KQ2.AQ4.Q432", "2N"),     # 21 balanced
    ("AKQJ2.KQ2.AQ4.AK", "2C"),     # 26
    ("AQ932.K42.Q43.J4", "1S"),     # five spades, 12
    ("Q93.AKJ42.Q43.J4", "1H"),
    ("KQJ932.42.843.J4", "2S"),     # weak two
    ("Q93.J42.Q43.J432", "P"),
])
def test_openings(hand, call):
    assert opening(hand) == call


def test_balanced_shapes():
    assert is_balanced((4, 3, 3, 3)) and is_balanced((5, 3, 3, 2)) and is_balanced((4, 4, 3, 2))
    assert not is_balanced((5, 4, 3, 1)) and not is_balanced((6, 3, 2, 2))


def test_simple_raise():
    # partner opened 1S, we have three spades and 7 points
    assert after("K93.Q842.J843.J4", "1S P") == "2S"


def test_no_bid_with_nothing():
    assert after("932.8642.8543.J4", "1S P") == "P"


def test_every_call_is_legal_and_deterministic():
    rng = Rng(9)
    for i in range(300):
        deal = generate_deal(rng, i)
        bids = teacher_auction(deal)
        assert AuctionState.from_bids(deal.dealer, bids).is_terminal()
        assert teacher_auction(deal) == bids


def test_calls_depend_only_on_own_hand():
    deal = generate_deal(Rng(2), 0)
    bids = teacher_auction(deal)
    state = AuctionState.start(deal.dealer)
    for b in bids:
        assert teacher_bid(deal.hands[state.to_act], state) == b
        state = state.apply(b)
