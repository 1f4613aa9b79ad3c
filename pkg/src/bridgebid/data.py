"""Game records, training instances, splits and the synthetic teacher corpus.

Record format, one game per blank-line separated block::

    DEAL 17 dealer=N vul=ns N=AK2.QJ3.T98.7654 E=... S=... W=...
    AUCTION 1S P 2S P 4S P P P
    TRICKS 10

``TRICKS`` (declarer's tricks) is optional and absent for passed-out games.
"""
from __future__ import annotations

import collections
import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .auction import AuctionState, Contract, IllegalBidError, format_auction, parse_bid
from .core import STREAM_SPLIT, Deal, Rng, Seat, generate_deal, hand_to_bits
from .encoding import ENN_INPUT_DIM, HAND_DIM, VUL_DIM, auction_enn_inputs
from .teacher import teacher_auction

log = logging.getLogger(__name__)

ILLEGAL_AUCTION = "illegal-auction"
INCOMPLETE_AUCTION = "incomplete-auction"
BAD_DEAL = "bad-deal"
BAD_TRICKS = "bad-tricks"
UNREADABLE = "unreadable"


@dataclass(frozen=True)
class GameRecord:
    deal: Deal
    auction: tuple[int, ...]
    declarer_tricks: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "auction", tuple(int(b) for b in self.auction))
        state = AuctionState.from_bids(self.deal.dealer, self.auction)
        if not state.is_terminal():
            raise ValueError("auction is not complete")
        if self.declarer_tricks is not None:
            if state.final_contract().passed_out:
                raise ValueError("a passed-out game has no tricks")
            if not 0 <= self.declarer_tricks <= 13:
                raise ValueError("tricks out of range")

    @property
    def contract(self) -> Contract:
        return AuctionState.from_bids(self.deal.dealer, self.auction).final_contract()

    def to_text(self) -> str:
        lines = [self.deal.to_text(), "AUCTION " + format_auction(self.auction)]
        if self.declarer_tricks is not None:
            lines.append(f"TRICKS {self.declarer_tricks}")
        return "\n".join(lines)


class RecordList(list):
    """Parsed records; ``skipped`` counts dropped blocks by reason."""

    def __init__(self, records=(), skipped=None):
        super().__init__(records)
        self.skipped = collections.Counter(skipped or {})


def _parse_block(lines: list[str]):
    deal = auction = tricks = None
    for line in lines:
        key, _, rest = line.partition(" ")
        if key == "DEAL" and deal is None:
            try:
                deal = Deal.from_text(line)
            except ValueError:
                return None, BAD_DEAL
        elif key == "AUCTION" and auction is None:
            try:
                auction = [parse_bid(t) for t in rest.split()]
            except ValueError:
                return None, ILLEGAL_AUCTION
        elif key == "TRICKS" and tricks is None:
            try:
                tricks = int(rest)
            except ValueError:
                return None, BAD_TRICKS
        else:
            return None, UNREADABLE
    if deal is None or auction is None:
        return None, UNREADABLE
    try:
        state = AuctionState.from_bids(deal.dealer, auction)
    except IllegalBidError:
        return None, ILLEGAL_AUCTION
    if not state.is_terminal():
        return None, INCOMPLETE_AUCTION
    if tricks is not None and (state.final_contract().passed_out or not 0 <= tricks <= 13):
        return None, BAD_TRICKS
    return GameRecord(deal, tuple(auction), tricks), None


def parse_records(stream: Iterable[str] | str) -> RecordList:
    """Read records, dropping invalid ones with a counted reason."""
    if isinstance(stream, str):
        stream = stream.splitlines()
    out = RecordList()
    block: list[str] = []

    def flush():
        if block:
            rec, why = _parse_block(block)
            if rec is None:
                out.skipped[why] += 1
                log.debug("dropped record (%s): %s", why, block[0])
            else:
                out.append(rec)
            block.clear()

    for raw in stream:
        line = raw.strip()
        if not line:
            flush()
        elif not line.startswith("#"):
            block.append(line)
    flush()
    return out


def format_records(records: Iterable[GameRecord]) -> str:
    return "\n\n".join(r.to_text() for r in records) + "\n"


# -- instances ---------------------------------------------------------------

@dataclass(frozen=True)
class EnnInstance:
    input: np.ndarray
    target: np.ndarray


@dataclass(frozen=True)
class PnnInstance:
    input: np.ndarray
    label: int


def _estimate(enn, X: np.ndarray) -> np.ndarray:
    if enn is None:
        return np.zeros((len(X), 52))
    if hasattr(enn, "predict_proba"):
        return enn.predict_proba(X)
    return enn.forward(X)


def record_arrays(record: GameRecord):
    """ENN inputs (L, 372), partner hands (L, 52) and labels (L,) of a game."""
    X = auction_enn_inputs(record.deal, record.auction)
    parts = [hand_to_bits(record.deal.hands[Seat((record.deal.dealer + i + 2) % 4)])
             for i in range(len(record.auction))]
    return X, np.array(parts, dtype=np.uint8).reshape(len(X), 52), np.array(record.auction)


def make_instances(record: GameRecord, enn=None) -> tuple[list[EnnInstance], list[PnnInstance]]:
    """One ENN and one PNN instance per call in the auction.

    The PNN input carries ``enn``'s estimate of partner's hand, or zeros
    when no estimator is given.
    """
    X, Y, labels = record_arrays(record)
    est = _estimate(enn, X)
    enn_inst = [EnnInstance(X[i], Y[i]) for i in range(len(X))]
    pnn_inst = [PnnInstance(np.concatenate([X[i].astype(np.float64), est[i]]), int(labels[i]))
                for i in range(len(X))]
    return enn_inst, pnn_inst


def dataset_arrays(records: Sequence[GameRecord]):
    """Stacked ENN inputs, partner-hand targets and bid labels of many games."""
    if not records:
        return (np.zeros((0, ENN_INPUT_DIM), np.uint8), np.zeros((0, 52), np.uint8),
                np.zeros(0, np.int64))
    parts = [record_arrays(r) for r in records]
    return (np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]),
            np.concatenate([p[2] for p in parts]).astype(np.int64))


def pnn_inputs(X_enn: np.ndarray, enn=None, dtype=np.float32) -> np.ndarray:
    est = _estimate(enn, X_enn)
    return np.concatenate([X_enn.astype(dtype), est.astype(dtype)], axis=1)


def history_length(X: np.ndarray) -> np.ndarray:
    """Number of calls already made, read off the encoded history."""
    off = HAND_DIM + VUL_DIM
    return np.asarray(X)[:, off:off + 318].astype(np.int64).sum(axis=1)


# -- splitting ---------------------------------------------------------------

@dataclass(frozen=True)
class SplitSpec:
    train: float = 0.7
    val: float = 0.1
    test: float = 0.2

    def __post_init__(self):
        if min(self.train, self.val, self.test) < 0 or abs(self.train + self.val + self.test - 1) > 1e-9:
            raise ValueError("split fractions must be non-negative and sum to 1")


def split(records: Sequence, spec: SplitSpec = SplitSpec(), rng: Rng | int = 0):
    """Assign whole games to train/val/test at random."""
    if isinstance(rng, int):
        rng = Rng(rng, STREAM_SPLIT)
    n = len(records)
    order = rng.generator(0).permutation(n)
    n_train = int(round(spec.train * n))
    n_val = int(round(spec.val * n))
    n_val = min(n_val, n - n_train)
    pick = lambda idx: [records[i] for i in sorted(idx)]
    return (pick(order[:n_train]), pick(order[n_train:n_train + n_val]),
            pick(order[n_train + n_val:]))


# -- synthetic corpus --------------------------------------------------------

def synth_teacher_games(n: int, rng: Rng | int = 0, fill_tricks: bool = True,
                        solver=None, start: int = 0) -> list[GameRecord]:
    """``n`` random deals bid by the teacher at all four seats.

    With ``fill_tricks`` the declarer's tricks are the double dummy result
    for the final contract.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    if isinstance(rng, int):
        rng = Rng(rng)
    if fill_tricks and solver is None:
        from .dda import default_solver
        solver = default_solver()
    out = []
    for i in range(start, start + n):
        deal = generate_deal(rng, i)
        bids = teacher_auction(deal)
        tricks = None
        if fill_tricks:
            c = AuctionState.from_bids(deal.dealer, bids).final_contract()
            if not c.passed_out:
                tricks = solver.solve(deal, c.declarer, c.strain)
        out.append(GameRecord(deal, tuple(bids), tricks))
    return out
