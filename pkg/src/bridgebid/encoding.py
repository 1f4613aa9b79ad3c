"""Fixed-width feature vectors for the estimation and policy networks.

History layout (318 bits): slots 0-2 hold up to three leading passes.
Contract bid ``k`` owns the nine-slot block starting at ``3 + 9k``::

    +0 the bid   +1,+2 passes   +3 double   +4,+5 passes
    +6 redouble  +7,+8 passes

Each call fills exactly one slot, left to right, so slot order equals
call order.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .auction import DOUBLE, MAX_AUCTION_LENGTH, N_CONTRACT_BIDS, PASS, REDOUBLE, AuctionState
from .core import Deal, Seat, hand_to_bits, relative_vulnerability

HISTORY_DIM = MAX_AUCTION_LENGTH
HAND_DIM = 52
VUL_DIM = 2
ENN_INPUT_DIM = HAND_DIM + VUL_DIM + HISTORY_DIM
PNN_INPUT_DIM = ENN_INPUT_DIM + 52

_PASS_OFFSETS = {0: 1, 1: 4, 2: 7}  # doubling phase -> first pass offset


def history_slots(bids: Sequence[int]) -> list[int]:
    """Slot index of every call in ``bids`` (dealer first)."""
    slots = []
    base = -1
    phase = 0
    passes = 0
    for b in bids:
        b = int(b)
        if b == PASS:
            if base < 0:
                if passes >= 3:
                    raise ValueError("four leading passes end the auction")
                slots.append(passes)
            else:
                if passes >= 2:
                    raise ValueError("third trailing pass ends the auction")
                slots.append(base + _PASS_OFFSETS[phase] + passes)
            passes += 1
        elif b == DOUBLE:
            if base < 0 or phase != 0:
                raise ValueError("double without an undoubled contract")
            slots.append(base + 3)
            phase, passes = 1, 0
        elif b == REDOUBLE:
            if base < 0 or phase != 1:
                raise ValueError("redouble without a double")
            slots.append(base + 6)
            phase, passes = 2, 0
        elif 0 <= b < N_CONTRACT_BIDS:
            new_base = 3 + 9 * b
            if new_base <= base:
                raise ValueError("contract bids must increase")
            base, phase, passes = new_base, 0, 0
            slots.append(base)
        else:
            raise ValueError(f"bad bid index {b}")
    return slots


def encode_history(bids: Sequence[int]) -> np.ndarray:
    v = np.zeros(HISTORY_DIM, dtype=np.uint8)
    v[history_slots(bids)] = 1
    return v


def _slot_bid(pos: int) -> int:
    if pos < 3:
        return PASS
    k, off = divmod(pos - 3, 9)
    if off == 0:
        return k
    if off == 3:
        return DOUBLE
    if off == 6:
        return REDOUBLE
    return PASS


def decode_history(v) -> list[int]:
    """Inverse of :func:`encode_history`; rejects unreachable patterns."""
    v = np.asarray(v)
    if v.shape != (HISTORY_DIM,):
        raise ValueError(f"history vector must have {HISTORY_DIM} entries")
    if not np.isin(v, (0, 1)).all():
        raise ValueError("history vector must be binary")
    bids = [_slot_bid(int(p)) for p in np.flatnonzero(v)]
    try:
        slots = history_slots(bids)
        state = AuctionState.from_bids(Seat.N, bids)
    except ValueError as exc:
        raise ValueError(f"unreachable history pattern: {exc}") from None
    if slots != list(np.flatnonzero(v)) or state.terminal:
        raise ValueError("unreachable history pattern")
    return bids


def build_enn_input(deal: Deal, seat: Seat, state: AuctionState) -> np.ndarray:
    """``[hand | vulnerability | history]`` as a 372-long uint8 vector."""
    if state.terminal:
        raise ValueError("no decision at a terminal auction")
    if Seat(seat) != state.to_act:
        raise ValueError(f"{Seat(seat).name} is not to act")
    x = np.zeros(ENN_INPUT_DIM, dtype=np.uint8)
    x[:HAND_DIM] = hand_to_bits(deal.hands[seat])
    x[HAND_DIM:HAND_DIM + VUL_DIM] = relative_vulnerability(deal.vul, seat)
    x[HAND_DIM + VUL_DIM + np.asarray(history_slots(state.bids), dtype=np.intp)] = 1
    return x


def build_pnn_input(enn_input, estimate) -> np.ndarray:
    enn_input = np.asarray(enn_input)
    estimate = np.asarray(estimate, dtype=np.float64)
    if enn_input.shape[-1] != ENN_INPUT_DIM or estimate.shape[-1] != 52:
        raise ValueError("bad feature dimensions")
    if not np.all((estimate >= 0.0) & (estimate <= 1.0)):
        raise ValueError("partner estimate must lie in [0, 1]")
    return np.concatenate([enn_input.astype(np.float64), estimate], axis=-1)


def auction_enn_inputs(deal: Deal, bids: Sequence[int]) -> np.ndarray:
    """ENN inputs at every decision point of an auction, shape ``(L, 372)``.

    Row ``i`` is the view of the player making call ``i`` before calling.
    A terminal auction yields one row per call including the final pass.
    """
    bids = list(bids)
    slots = history_slots(bids[:-1]) if bids else []
    n = len(bids)
    out = np.zeros((n, ENN_INPUT_DIM), dtype=np.uint8)
    hand_bits = [hand_to_bits(h) for h in deal.hands]
    vul_bits = [relative_vulnerability(deal.vul, s) for s in Seat]
    off = HAND_DIM + VUL_DIM
    for i in range(n):
        seat = (deal.dealer + i) % 4
        out[i, :HAND_DIM] = hand_bits[seat]
        out[i, HAND_DIM:off] = vul_bits[seat]
        if i:
            out[i, off + np.asarray(slots[:i], dtype=np.intp)] = 1
    return out
