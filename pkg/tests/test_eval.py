import numpy as np
import pytest

from bridgebid.auction import parse_auction
from bridgebid.core import Rng, Seat, generate_deal, hand_to_bits
from bridgebid.data import GameRecord
from bridgebid.dda import DoubleDummyTable
from bridgebid.eval import (GapHistogram, dda_gap_histogram, duplicate_match, enn_accuracy,
                            importance_std_study, pnn_accuracy, study_deck)
from bridgebid.nn import SIGMOID_52, SOFTMAX_38, MlpArchitecture, MlpModel
from bridgebid.training import BiddingSystem


def hcp_tricks(deal, declarer, strain):
    # a cheap deterministic stand-in for double dummy results
    from bridgebid.core import hcp
    side = hcp(deal.hands[declarer]) + hcp(deal.hands[(declarer + 2) % 4])
    return max(0, min(13, side // 3 + strain % 2))


def tiny(seed):
    return BiddingSystem.init(np.random.default_rng(seed), 2, 8, 2, 8, dtype=np.float64)


@pytest.fixture(scope="module")
def deals():
    return [generate_deal(Rng(0, 7), i) for i in range(25)]


def test_self_match_is_zero(deals):
    a = tiny(0)
    for mode in ("argmax", "sample"):
        rep = duplicate_match(a, a.copy(), deals, mode, 3, hcp_tricks)
        assert rep.imps == [0] * len(deals)


def test_match_is_antisymmetric(deals):
    a, b = tiny(0), tiny(1)
    for mode in ("argmax", "sample"):
        ab = duplicate_match(a, b, deals, mode, 5, hcp_tricks)
        ba = duplicate_match(b, a, deals, mode, 5, hcp_tricks)
        assert ab.imps == [-x for x in ba.imps]
    assert "avg_imp" in ab.to_text()
    assert ab.to_csv().count("\n") == len(deals) + 1
    with pytest.raises(ValueError):
        duplicate_match(a, b, [])


def fixed_model(head, out):
    """A network whose output ignores its input: zero weights, chosen biases."""
    n_in = 372 if head == SIGMOID_52 else 424
    m = MlpModel.zeros(MlpArchitecture(n_in, 1, 1, 0, head))
    m.b[-1][:] = out
    return m


def test_enn_accuracy_by_hand():
    logits = np.full(52, -5.0)
    logits[:13] = 5.0  # always predicts the thirteen clubs
    m = fixed_model(SIGMOID_52, logits)
    X = np.zeros((2, 372), np.uint8)
    X[1, 54] = 1  # one call made
    Y = np.zeros((2, 52), np.uint8)
    Y[0, :13] = 1
    Y[1, 6:19] = 1
    r = enn_accuracy(m, X, Y)
    assert r.overall == pytest.approx((1 + 7 / 13) / 2)
    assert r.by_length == {0: 1.0, 1: pytest.approx(7 / 13)}
    assert r.accuracy[0] == 0.5 and r.accuracy[12] == 1.0
    assert r.recall[0] == 1.0 and 20 not in r.accuracy and 18 in r.recall


def test_pnn_accuracy_by_hand():
    logits = np.zeros(38)
    logits[35] = 4.0
    m = fixed_model(SOFTMAX_38, logits)
    X = np.zeros((4, 424))
    r = pnn_accuracy(m, X, np.array([35, 35, 35, 4]))
    assert r.overall == 0.75
    assert r.accuracy == {35: 0.75}
    assert r.recall == {35: 1.0, 4: 0.0}


def test_gap_histogram():
    deal = generate_deal(Rng(0), 0)
    recs = [GameRecord(deal, tuple(parse_auction("1N P P P")), t) for t in (7, 8, 9)]
    recs.append(GameRecord(deal, tuple(parse_auction("P P P P"))))

    class Fixed:
        def solve(self, d, decl, strain):
            return 8

    h = dda_gap_histogram(recs, Fixed())
    assert h.total == 3 and h.skipped == 1
    assert h.share(0, 0) == pytest.approx(1 / 3)
    assert h.share(-1, 1) == 1.0
    assert "+1" in h.to_text()
    assert np.isnan(GapHistogram(np.zeros(27)).share(0, 0))


class HcpTable:
    def ddt(self, deal):
        t = np.array([[hcp_tricks(deal, d, s) for s in range(5)] for d in range(4)])
        return DoubleDummyTable(t)


def test_importance_study_shape_and_stream():
    rep = importance_std_study(3, 4, "partner", 1, HcpTable())
    assert rep.per_deck.shape == (3, 4, 5) and len(rep.stds) == 60
    assert np.all(np.diff(rep.stds) >= 0)
    again = importance_std_study(3, 4, "partner", 1, HcpTable())
    assert np.array_equal(rep.per_deck, again.per_deck)
    one = importance_std_study(1, 4, "partner", 1, HcpTable(), decks=[2])
    assert np.array_equal(one.per_deck[0], rep.per_deck[2])
    assert "q50" in rep.to_text()


def test_importance_study_keeps_the_right_hands():
    seen = []

    class Spy:
        def ddt(self, deal):
            seen.append(deal.hands)
            return DoubleDummyTable(np.zeros((4, 5), dtype=int))

    importance_std_study(1, 3, "opponent", 0, Spy())
    perm = study_deck(Rng(0, 5), 0)
    from bridgebid.core import hand_from_cards
    north = hand_from_cards(perm[:13])
    south = hand_from_cards(perm[26:39])
    assert all(h[Seat.N] == north and h[Seat.S] == south for h in seen)
    assert len({h[Seat.E] for h in seen}) > 1
    with pytest.raises(ValueError):
        importance_std_study(1, 1, "dummy", 0, Spy())
