"""Cards, seats, deals and reproducible deal generation.

Cards are indexed 0..51 as clubs 2..A, diamonds 2..A, hearts 2..A,
spades 2..A.  A hand is a plain ``int`` used as a 52-bit membership mask.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

RANKS = "23456789TJQKA"
SUITS = "CDHS"
SUIT_SYMBOLS = "♣♦♥♠"
FULL_DECK = (1 << 52) - 1
SUIT_MASK = (1 << 13) - 1


class Seat(enum.IntEnum):
    N = 0
    E = 1
    S = 2
    W = 3

    @property
    def partner(self) -> "Seat":
        return Seat((self + 2) % 4)

    @property
    def next(self) -> "Seat":
        """Left-hand opponent, i.e. the next seat clockwise."""
        return Seat((self + 1) % 4)

    @property
    def side(self) -> int:
        """0 for North-South, 1 for East-West."""
        return self % 2


def partner(seat: Seat) -> Seat:
    return Seat(seat).partner


def next_seat(seat: Seat) -> Seat:
    return Seat(seat).next


class Vulnerability(str, enum.Enum):
    NONE = "none"
    NS = "ns"
    EW = "ew"
    BOTH = "both"

    def is_vulnerable(self, seat: Seat) -> bool:
        if self is Vulnerability.BOTH:
            return True
        if self is Vulnerability.NONE:
            return False
        return (self is Vulnerability.NS) == (Seat(seat).side == 0)


VULNERABILITIES = (Vulnerability.NONE, Vulnerability.NS, Vulnerability.EW, Vulnerability.BOTH)


def relative_vulnerability(vul: Vulnerability, seat: Seat) -> tuple[int, int]:
    """Two-bit code (own side vulnerable, opponents vulnerable).

    ``(0, 1)`` is favourable vulnerability, ``(1, 0)`` unfavourable.
    """
    vul = Vulnerability(vul)
    own = int(vul.is_vulnerable(seat))
    opp = int(vul.is_vulnerable(Seat(seat).next))
    return own, opp


# -- cards and hands ---------------------------------------------------------

def card_suit(card: int) -> int:
    return card // 13


def card_rank(card: int) -> int:
    return card % 13


def make_card(suit: int, rank: int) -> int:
    return 13 * suit + rank


def card_str(card: int) -> str:
    return SUITS[card // 13] + RANKS[card % 13]


def parse_card(text: str) -> int:
    text = text.strip().upper()
    if len(text) != 2 or text[0] not in SUITS or text[1] not in RANKS:
        raise ValueError(f"bad card {text!r}")
    return make_card(SUITS.index(text[0]), RANKS.index(text[1]))


def hand_from_cards(cards: Iterable[int]) -> int:
    mask = 0
    for c in cards:
        if not 0 <= c < 52:
            raise ValueError(f"card index out of range: {c}")
        mask |= 1 << int(c)
    return mask


def hand_cards(hand: int) -> list[int]:
    return [i for i in range(52) if hand >> i & 1]


def hand_size(hand: int) -> int:
    return bin(hand).count("1")


def suit_holding(hand: int, suit: int) -> int:
    """13-bit rank mask of ``hand`` in ``suit`` (bit 0 = the two)."""
    return (hand >> (13 * suit)) & SUIT_MASK


def hand_to_bits(hand: int) -> np.ndarray:
    return np.array([(hand >> i) & 1 for i in range(52)], dtype=np.uint8)


def bits_to_hand(bits: Sequence[int]) -> int:
    return hand_from_cards(i for i, b in enumerate(bits) if b)


def format_hand(hand: int) -> str:
    """Dot-separated spades.hearts.diamonds.clubs, ranks high to low."""
    parts = []
    for suit in (3, 2, 1, 0):
        h = suit_holding(hand, suit)
        parts.append("".join(RANKS[r] for r in range(12, -1, -1) if h >> r & 1))
    return ".".join(parts)


def parse_hand(text: str) -> int:
    parts = text.strip().split(".")
    if len(parts) != 4:
        raise ValueError(f"hand needs four dot-separated suits: {text!r}")
    mask = 0
    for suit, part in zip((3, 2, 1, 0), parts):
        if part == "-":
            continue
        for ch in part.upper():
            if ch not in RANKS:
                raise ValueError(f"bad rank {ch!r} in {text!r}")
            bit = 1 << make_card(suit, RANKS.index(ch))
            if mask & bit:
                raise ValueError(f"duplicate card in {text!r}")
            mask |= bit
    return mask


def hcp(hand: int) -> int:
    """Milton high-card points (A=4, K=3, Q=2, J=1)."""
    total = 0
    for suit in range(4):
        h = suit_holding(hand, suit)
        total += 4 * (h >> 12 & 1) + 3 * (h >> 11 & 1) + 2 * (h >> 10 & 1) + (h >> 9 & 1)
    return total


def suit_lengths(hand: int) -> tuple[int, int, int, int]:
    return tuple(hand_size(suit_holding(hand, s)) for s in range(4))  # type: ignore[return-value]


# -- deals -------------------------------------------------------------------

@dataclass(frozen=True)
class Deal:
    """Four disjoint, equal-sized hands plus dealer and vulnerability.

    Full deals hold 13 cards per seat; smaller equal-sized "mini-deals"
    are accepted because the double dummy solver is tested on them.
    """

    id: int
    dealer: Seat
    vul: Vulnerability
    hands: tuple[int, int, int, int]

    def __post_init__(self):
        object.__setattr__(self, "dealer", Seat(self.dealer))
        object.__setattr__(self, "vul", Vulnerability(self.vul))
        object.__setattr__(self, "hands", tuple(int(h) for h in self.hands))
        if len(self.hands) != 4:
            raise ValueError("a deal needs four hands")
        seen = 0
        for h in self.hands:
            if h & seen:
                raise ValueError("hands overlap")
            if h >> 52:
                raise ValueError("card index out of range")
            seen |= h
        sizes = {hand_size(h) for h in self.hands}
        if len(sizes) != 1:
            raise ValueError(f"unequal hand sizes {sorted(sizes)}")

    @property
    def cards_per_hand(self) -> int:
        return hand_size(self.hands[0])

    @property
    def is_full(self) -> bool:
        return self.cards_per_hand == 13

    def hand(self, seat: Seat) -> int:
        return self.hands[seat]

    def to_text(self) -> str:
        hands = " ".join(f"{s.name}={format_hand(self.hands[s])}" for s in Seat)
        return f"DEAL {self.id} dealer={self.dealer.name} vul={self.vul.value} {hands}"

    @classmethod
    def from_text(cls, line: str) -> "Deal":
        tokens = line.split()
        if len(tokens) != 8 or tokens[0] != "DEAL":
            raise ValueError(f"not a DEAL record: {line!r}")
        fields = {}
        for tok in tokens[2:]:
            key, sep, value = tok.partition("=")
            if not sep or key in fields:
                raise ValueError(f"bad field {tok!r}")
            fields[key] = value
        if set(fields) != {"dealer", "vul", "N", "E", "S", "W"}:
            raise ValueError(f"missing or unknown fields in {line!r}")
        try:
            dealer = Seat[fields["dealer"]]
        except KeyError:
            raise ValueError(f"bad dealer {fields['dealer']!r}") from None
        deal = cls(
            id=int(tokens[1]),
            dealer=dealer,
            vul=Vulnerability(fields["vul"]),
            hands=tuple(parse_hand(fields[s.name]) for s in Seat),
        )
        if not deal.is_full:
            raise ValueError("deal does not partition the 52 cards")
        return deal


def canonical_deal_text(deal: Deal) -> str:
    """Hands only; dealer/vulnerability/id do not affect trick counts."""
    return " ".join(format_hand(h) for h in deal.hands)


# -- reproducible randomness ------------------------------------------------

STREAM_DEALS = 0
STREAM_INIT = 1
STREAM_BIDS = 2
STREAM_SPLIT = 3
STREAM_POOL = 4
STREAM_STUDY = 5
STREAM_TRAIN = 6
STREAM_EVAL = 7


@dataclass(frozen=True)
class Rng:
    """Seed plus stream id naming a family of counter-based generators.

    ``generator(*keys)`` returns a fresh Philox generator; the same
    ``(seed, stream, keys)`` always yields the same sequence.
    """

    seed: int
    stream: int = STREAM_DEALS

    def generator(self, *keys: int) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream, *(int(k) for k in keys)))
        return np.random.Generator(np.random.Philox(ss))

    def with_stream(self, stream: int) -> "Rng":
        return Rng(self.seed, stream)


def generate_deal(rng: Rng, id: int, dealer_policy="random", vul_policy="random") -> Deal:
    """Deal 52 shuffled cards into four hands.

    ``dealer_policy`` is a :class:`Seat`, ``"rotate"`` (seat ``id % 4``) or
    ``"random"``; ``vul_policy`` is a :class:`Vulnerability` or ``"random"``.
    """
    gen = rng.generator(id)
    perm = gen.permutation(52)
    hands = tuple(hand_from_cards(perm[13 * i: 13 * i + 13]) for i in range(4))
    if dealer_policy == "rotate":
        dealer = Seat(id % 4)
    elif dealer_policy == "random":
        dealer = Seat(int(gen.integers(4)))
    else:
        dealer = Seat(dealer_policy)
    if vul_policy == "random":
        vul = VULNERABILITIES[int(gen.integers(4))]
    else:
        vul = Vulnerability(vul_policy)
    return Deal(id=id, dealer=dealer, vul=vul, hands=hands)


def generate_mini_deal(gen: np.random.Generator, n_cards: int, id: int = 0) -> Deal:
    """Random deal of ``n_cards`` per seat drawn from the full deck."""
    if not 1 <= n_cards <= 13:
        raise ValueError("n_cards must be in 1..13")
    perm = gen.permutation(52)[: 4 * n_cards]
    hands = tuple(hand_from_cards(perm[n_cards * i: n_cards * (i + 1)]) for i in range(4))
    return Deal(id=id, dealer=Seat.N, vul=Vulnerability.NONE, hands=hands)


def read_deals(lines: Iterable[str]) -> list[Deal]:
    deals = []
    for line in lines:
        line = line.strip()
        if line and not line.startswith("#"):
            deals.append(Deal.from_text(line))
    return deals
