import numpy as np
import pytest
from hypothesis import given, strategies as st

from bridgebid.core import (Deal, Rng, Seat, Vulnerability, bits_to_hand, canonical_deal_text,
                            format_hand, generate_deal, generate_mini_deal, hand_from_cards,
                            hand_to_bits, hcp, parse_card, parse_hand, read_deals,
                            relative_vulnerability, suit_lengths)


def test_card_indexing():
    assert parse_card("C2") == 0
    assert parse_card("CA") == 12
    assert parse_card("D2") == 13
    assert parse_card("SA") == 51


def test_hand_text_round_trip():
    text = "AKQJ.T98.765.432"
    h = parse_hand(text)
    assert format_hand(h) == text
    assert hcp(h) == 10
    assert suit_lengths(h) == (3, 3, 3, 4)


def test_void_is_written_empty():
    h = parse_hand("AKQJT98765432...")
    assert suit_lengths(h) == (0, 0, 0, 13)
    assert parse_hand(format_hand(h)) == h


@pytest.mark.parametrize("bad", ["AKQ.JT9", "AKX.-.-.-", "AA.K.Q.J"])
def test_bad_hands_rejected(bad):
    with pytest.raises(ValueError):
        parse_hand(bad)


def test_relative_vulnerability():
    assert relative_vulnerability(Vulnerability.NS, Seat.N) == (1, 0)
    assert relative_vulnerability(Vulnerability.NS, Seat.E) == (0, 1)
    assert relative_vulnerability(Vulnerability.BOTH, Seat.W) == (1, 1)
    assert relative_vulnerability(Vulnerability.NONE, Seat.S) == (0, 0)


def test_generated_deal_partitions_the_deck():
    d = generate_deal(Rng(3), 5)
    assert d.is_full
    assert sum(bin(h).count("1") for h in d.hands) == 52
    assert d.hands[0] | d.hands[1] | d.hands[2] | d.hands[3] == (1 << 52) - 1


def test_generation_is_reproducible_and_keyed():
    assert generate_deal(Rng(1), 9) == generate_deal(Rng(1), 9)
    assert generate_deal(Rng(1), 9).hands != generate_deal(Rng(1), 10).hands
    assert generate_deal(Rng(1), 9).hands != generate_deal(Rng(2), 9).hands
    assert generate_deal(Rng(1, 0), 9).hands != generate_deal(Rng(1, 7), 9).hands


def test_dealer_policies():
    assert [generate_deal(Rng(0), i, "rotate").dealer for i in range(4)] == list(Seat)
    d = generate_deal(Rng(0), 3, Seat.S, Vulnerability.EW)
    assert d.dealer == Seat.S and d.vul == Vulnerability.EW


def test_deal_text_round_trip():
    deals = [generate_deal(Rng(4), i) for i in range(20)]
    text = "\n".join(d.to_text() for d in deals)
    assert read_deals(text.splitlines()) == deals


@pytest.mark.parametrize("line", [
    "DEAL 1 dealer=N vul=none N=AKQJ.T98.765.432",
    "DEAL 1 dealer=Q vul=none N=AKQJ.T98.765.432 E=-.-.-.- S=-.-.-.- W=-.-.-.-",
    "HAND 1 dealer=N vul=none a b c d",
])
def test_malformed_deal_lines(line):
    with pytest.raises(ValueError):
        Deal.from_text(line)


def test_overlapping_hands_rejected():
    with pytest.raises(ValueError):
        Deal(0, Seat.N, Vulnerability.NONE, (1, 1, 2, 4))


def test_unequal_hands_rejected():
    with pytest.raises(ValueError):
        Deal(0, Seat.N, Vulnerability.NONE, (1, 2, 4, 8 | 16))


def test_mini_deal_sizes():
    d = generate_mini_deal(np.random.default_rng(0), 4)
    assert d.cards_per_hand == 4 and not d.is_full


def test_canonical_text_ignores_metadata():
    d = generate_deal(Rng(0), 0)
    e = Deal(99, Seat((d.dealer + 1) % 4), Vulnerability.BOTH, d.hands)
    assert canonical_deal_text(d) == canonical_deal_text(e)


@given(st.sets(st.integers(0, 51), max_size=52))
def test_bits_round_trip(cards):
    h = hand_from_cards(cards)
    bits = hand_to_bits(h)
    assert bits.sum() == len(cards)
    assert bits_to_hand(bits) == h


def test_rng_streams_are_independent():
    a = Rng(0, 1).generator(0).random(4)
    b = Rng(0, 2).generator(0).random(4)
    assert not np.allclose(a, b)
    assert np.array_equal(Rng(0, 1).generator(0, 5).random(3), Rng(0, 1).generator(0, 5).random(3))
