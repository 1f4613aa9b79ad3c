"""The bidding state machine: legality, termination, contract and declarer.

Bids are integers 0..37.  Contract bids are ``5 * (level - 1) + strain``
with strains ordered clubs, diamonds, hearts, spades, notrump; 35 is pass,
36 double and 37 redouble.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .core import Seat

N_BIDS = 38
N_CONTRACT_BIDS = 35
PASS = 35
DOUBLE = 36
REDOUBLE = 37

CLUBS, DIAMONDS, HEARTS, SPADES, NOTRUMP = range(5)
STRAIN_NAMES = "CDHSN"

UNDOUBLED, DOUBLED, REDOUBLED = 0, 1, 2

MAX_AUCTION_LENGTH = 3 + (1 + 8) * N_CONTRACT_BIDS
_CONTRACT_MASK = (1 << N_CONTRACT_BIDS) - 1
_SEATS = tuple(Seat)


def max_auction_length() -> int:
    """Longest history a player may have to act on (318)."""
    return MAX_AUCTION_LENGTH


def contract_bid(level: int, strain: int) -> int:
    if not (1 <= level <= 7 and 0 <= strain <= 4):
        raise ValueError(f"no contract bid {level}{strain}")
    return 5 * (level - 1) + strain


def bid_level(bid: int) -> int:
    return bid // 5 + 1


def bid_strain(bid: int) -> int:
    return bid % 5


def is_contract_bid(bid: int) -> bool:
    return 0 <= bid < N_CONTRACT_BIDS


def bid_str(bid: int) -> str:
    if bid == PASS:
        return "P"
    if bid == DOUBLE:
        return "X"
    if bid == REDOUBLE:
        return "XX"
    if not 0 <= bid < N_CONTRACT_BIDS:
        raise ValueError(f"bad bid index {bid}")
    return f"{bid // 5 + 1}{STRAIN_NAMES[bid % 5]}"


def parse_bid(token: str) -> int:
    t = token.strip().upper()
    if t in ("P", "PASS"):
        return PASS
    if t in ("X", "D", "DBL"):
        return DOUBLE
    if t in ("XX", "R", "RDBL"):
        return REDOUBLE
    if t.endswith("NT"):
        t = t[:-1]
    if len(t) == 2 and t[0] in "1234567" and t[1] in STRAIN_NAMES:
        return contract_bid(int(t[0]), STRAIN_NAMES.index(t[1]))
    raise ValueError(f"bad bid token {token!r}")


def parse_auction(text: str) -> list[int]:
    return [parse_bid(t) for t in text.split()]


def format_auction(bids: Iterable[int]) -> str:
    return " ".join(bid_str(b) for b in bids)


class IllegalBidError(ValueError):
    """Raised by :meth:`AuctionState.apply`; ``reason`` names the rule broken."""

    def __init__(self, reason: str, bid: int):
        super().__init__(f"{reason}: {bid}")
        self.reason = reason
        self.bid = bid


@dataclass(frozen=True)
class Contract:
    """Final contract; ``level == 0`` means the deal was passed out."""

    level: int = 0
    strain: int = 0
    doubling: int = UNDOUBLED
    declarer: Optional[Seat] = None

    @property
    def passed_out(self) -> bool:
        return self.level == 0

    @property
    def tricks_needed(self) -> int:
        return self.level + 6

    def __str__(self) -> str:
        if self.passed_out:
            return "passed-out"
        dbl = ("", "X", "XX")[self.doubling]
        return f"{self.level}{STRAIN_NAMES[self.strain]}{dbl} by {Seat(self.declarer).name}"

    @classmethod
    def parse(cls, text: str, declarer: Seat = Seat.N) -> "Contract":
        """Parse e.g. ``"4H"``, ``"3NX"``, ``"6SXX"``."""
        t = text.strip().upper().replace("NT", "N")
        doubling = UNDOUBLED
        if t.endswith("XX"):
            doubling, t = REDOUBLED, t[:-2]
        elif t.endswith("X"):
            doubling, t = DOUBLED, t[:-1]
        bid = parse_bid(t)
        if not is_contract_bid(bid):
            raise ValueError(f"bad contract {text!r}")
        return cls(bid_level(bid), bid_strain(bid), doubling, Seat(declarer))


PASSED_OUT = Contract()


class AuctionState:
    """Immutable auction prefix with derived bookkeeping.

    Use :meth:`start` and :meth:`apply`; every instance is legal by
    construction.
    """

    __slots__ = ("dealer", "bids", "to_act", "last_contract", "last_contract_seat",
                 "doubling", "consecutive_passes", "terminal", "legal_mask")

    @classmethod
    def start(cls, dealer: Seat) -> "AuctionState":
        s = object.__new__(cls)
        sa = object.__setattr__
        sa(s, "dealer", Seat(dealer))
        sa(s, "bids", ())
        sa(s, "to_act", s.dealer)
        sa(s, "last_contract", -1)
        sa(s, "last_contract_seat", -1)
        sa(s, "doubling", UNDOUBLED)
        sa(s, "consecutive_passes", 0)
        sa(s, "legal_mask", _CONTRACT_MASK | (1 << PASS))
        sa(s, "terminal", False)
        return s

    @classmethod
    def from_bids(cls, dealer: Seat, bids: Iterable[int]) -> "AuctionState":
        s = cls.start(dealer)
        for b in bids:
            s = s.apply(b)
        return s

    def __setattr__(self, name, value):
        if hasattr(self, "terminal"):
            raise AttributeError("AuctionState is immutable")
        object.__setattr__(self, name, value)

    def __eq__(self, other):
        return (isinstance(other, AuctionState) and self.dealer == other.dealer
                and self.bids == other.bids)

    def __hash__(self):
        return hash((self.dealer, self.bids))

    def __repr__(self):
        return f"AuctionState(dealer={self.dealer.name}, bids={format_auction(self.bids)!r})"

    def __len__(self):
        return len(self.bids)

    def legal_bids(self) -> frozenset[int]:
        if self.terminal:
            raise ValueError("auction is over")
        m = self.legal_mask
        return frozenset(b for b in range(N_BIDS) if m >> b & 1)

    def is_legal(self, bid: int) -> bool:
        return 0 <= bid < N_BIDS and bool(self.legal_mask >> bid & 1)

    def is_terminal(self) -> bool:
        return self.terminal

    def _reject(self, bid: int):
        if self.terminal:
            raise IllegalBidError("terminal state", bid)
        if not 0 <= bid < N_BIDS:
            raise IllegalBidError("unknown bid", bid)
        if bid < N_CONTRACT_BIDS:
            raise IllegalBidError("too-low contract", bid)
        if bid == DOUBLE:
            raise IllegalBidError("illegal double", bid)
        raise IllegalBidError("illegal redouble", bid)

    def apply(self, bid: int) -> "AuctionState":
        bid = int(bid)
        if bid < 0 or not self.legal_mask >> bid & 1:
            self._reject(bid)
        seat = self.to_act
        to_act = (seat + 1) % 4
        last, last_seat, doubling = self.last_contract, self.last_contract_seat, self.doubling
        passes = 0
        if bid == PASS:
            passes = self.consecutive_passes + 1
        elif bid == DOUBLE:
            doubling = DOUBLED
        elif bid == REDOUBLE:
            doubling = REDOUBLED
        else:
            last, last_seat, doubling = bid, seat, UNDOUBLED
        terminal = passes >= 4 or (passes == 3 and last >= 0)
        if terminal:
            mask = 0
        else:
            mask = (_CONTRACT_MASK ^ ((1 << (last + 1)) - 1)) | (1 << PASS)
            if last >= 0:
                same_side = (last_seat - to_act) % 2 == 0
                if doubling == UNDOUBLED and not same_side:
                    mask |= 1 << DOUBLE
                elif doubling == DOUBLED and same_side:
                    mask |= 1 << REDOUBLE
        s = object.__new__(AuctionState)
        sa = object.__setattr__
        sa(s, "dealer", self.dealer)
        sa(s, "bids", self.bids + (bid,))
        sa(s, "to_act", _SEATS[to_act])
        sa(s, "last_contract", last)
        sa(s, "last_contract_seat", last_seat)
        sa(s, "doubling", doubling)
        sa(s, "consecutive_passes", passes)
        sa(s, "legal_mask", mask)
        sa(s, "terminal", terminal)
        return s

    def seat_of(self, index: int) -> Seat:
        """Seat that made the ``index``-th call."""
        return Seat((self.dealer + index) % 4)

    def final_contract(self) -> Contract:
        if not self.terminal:
            raise ValueError("auction is not over")
        if self.last_contract < 0:
            return PASSED_OUT
        strain = self.last_contract % 5
        side = self.last_contract_seat % 2
        declarer = None
        for i, b in enumerate(self.bids):
            seat = (self.dealer + i) % 4
            if b < N_CONTRACT_BIDS and b % 5 == strain and seat % 2 == side:
                declarer = Seat(seat)
                break
        return Contract(self.last_contract // 5 + 1, strain, self.doubling, declarer)


def legal_bids(state: AuctionState) -> frozenset[int]:
    return state.legal_bids()


def apply(state: AuctionState, bid: int) -> AuctionState:
    return state.apply(bid)


def is_terminal(state: AuctionState) -> bool:
    return state.terminal


def final_contract(state: AuctionState) -> Contract:
    return state.final_contract()
