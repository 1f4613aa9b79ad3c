"""A small deterministic natural bidding system used as a stand-in expert.

Every call depends only on the caller's hand and the auction so far, so a
network that sees the same inputs can in principle imitate it exactly.
The system is deliberately plain: five-card majors, a 15-17 notrump,
simple raises, one-level overcalls and takeout doubles, and game when the
partnership's known points reach 25.  All point ranges live in ``RANGES``.
"""
from __future__ import annotations

from .auction import DOUBLE, NOTRUMP, PASS, AuctionState, contract_bid
from .core import hcp, suit_holding, suit_lengths

C, D, H, S, NT = range(5)
MAJORS = (H, S)

RANGES = {
    "open_min": 12,
    "strong_2c": 22,
    "nt_1": (15, 17),
    "nt_2": (20, 21),
    "weak_two": (6, 10),
    "respond_min": 6,
    "raise_2": (6, 9),
    "raise_3": (10, 12),
    "raise_4": 13,
    "resp_1nt": (6, 10),
    "resp_2nt": (11, 12),
    "resp_3nt": 13,
    "new_suit_2": 11,
    "after_1nt": {"2nt": (8, 9), "3nt": (10, 15), "4nt": (16, 17), "6nt": 18},
    "after_2nt": {"3nt": (5, 10), "4nt": (11, 12), "6nt": 13},
    "overcall": (8, 16),
    "overcall_2": 11,
    "overcall_nt": (15, 18),
    "takeout_x": 12,
    "advance_raise": 8,
    "advance_game": 13,
    "game": 25,
    "penalty_x": 15,
}

# minimum points promised by a call, keyed by the role it was made in
SHOWN = {"open": 12, "open_nt1": 15, "open_nt2": 20, "open_2c": 22, "weak_two": 6,
         "raise_2": 6, "raise_3": 10, "new_1": 6, "new_2": 11, "resp_1nt": 6,
         "resp_2nt": 11, "resp_3nt": 13, "overcall": 8, "overcall_nt": 15, "takeout_x": 12}


def is_balanced(lengths) -> bool:
    ls = sorted(lengths)
    return ls[0] >= 2 and ls[1] >= 3 or ls == [2, 3, 4, 4] or ls == [2, 3, 3, 5]


def _in(x, rng) -> bool:
    return rng[0] <= x <= rng[1]


def _cheapest(state: AuctionState, strain: int, max_level: int = 7):
    for level in range(1, max_level + 1):
        b = contract_bid(level, strain)
        if state.is_legal(b):
            return b
    return None


def _at(state: AuctionState, level: int, strain: int):
    b = contract_bid(level, strain)
    return b if state.is_legal(b) else None


def _first(*bids):
    for b in bids:
        if b is not None:
            return b
    return PASS


def _game(strain: int) -> int:
    return 3 if strain == NT else 4 if strain in MAJORS else 5


class _View:
    """What the caller knows: own hand and the calls made so far."""

    def __init__(self, hand: int, state: AuctionState):
        self.hand = hand
        self.state = state
        self.hcp = hcp(hand)
        self.len = suit_lengths(hand)
        self.bal = is_balanced(self.len)
        self.me = state.to_act
        self.calls = [(state.seat_of(i), b) for i, b in enumerate(state.bids)]
        self.opening = next(((i, s, b) for i, (s, b) in enumerate(self.calls) if b < 35), None)

    def own(self, seat):
        return [b for s, b in self.calls if s == seat and b != PASS]

    @property
    def partner(self):
        return (self.me + 2) % 4

    def longest(self, suits):
        best = None
        for s in suits:
            if best is None or self.len[s] > self.len[best]:
                best = s
        return best

    def honours(self, suit) -> int:
        h = suit_holding(self.hand, suit)
        return sum(h >> r & 1 for r in (12, 11, 10))


def teacher_bid(hand: int, state: AuctionState) -> int:
    """The teacher's call for the player to act holding ``hand``."""
    if state.is_terminal():
        raise ValueError("auction is over")
    v = _View(hand, state)
    bid = _choose(v)
    return bid if state.is_legal(bid) else PASS


def _choose(v: _View) -> int:
    if v.opening is None:
        return _open(v)
    _, opener, _ = v.opening
    pen = _penalty_double(v)
    if pen is not None:
        return pen
    mine, partners = v.own(v.me), v.own(v.partner)
    if opener % 2 == v.me % 2:
        if opener == v.me:
            if len(mine) == 1 and partners and _first_after(v, v.me, mine[0]):
                return _opener_rebid(v, mine[0], partners[0])
            return PASS
        if not mine:
            return _respond(v, partners[0])
        if len(mine) == 1 and len(partners) >= 2 and _first_after(v, v.partner, partners[1]):
            return _responder_rebid(v, partners, mine[0])
        return PASS
    if not mine and not partners:
        return _compete(v)
    if partners and not mine:
        return _advance(v, partners[0])
    return PASS


def _first_after(v: _View, seat, bid) -> bool:
    """Is this my first turn since ``seat`` made ``bid``?"""
    idx = max(i for i, (s, b) in enumerate(v.calls) if s == seat and b == bid)
    return all(s != v.me for s, _ in v.calls[idx + 1:])


def _open(v: _View) -> int:
    r, x, ln = RANGES, v.hcp, v.len
    if x >= r["strong_2c"]:
        return contract_bid(2, C)
    if v.bal and _in(x, r["nt_2"]):
        return contract_bid(2, NT)
    if v.bal and _in(x, r["nt_1"]):
        return contract_bid(1, NT)
    if x >= r["open_min"]:
        if max(ln[S], ln[H]) >= 5:
            return contract_bid(1, S if ln[S] >= ln[H] else H)
        if ln[D] > ln[C] or (ln[D] == ln[C] and ln[D] >= 4):
            return contract_bid(1, D)
        return contract_bid(1, C)
    if _in(x, r["weak_two"]):
        for s in (S, H, D):
            if ln[s] >= 6:
                return contract_bid(2, s)
    return PASS


def _respond(v: _View, op: int) -> int:
    st, x, ln, r = v.state, v.hcp, v.len, RANGES
    level, s = op // 5 + 1, op % 5
    if op == contract_bid(1, NT):
        return _over_notrump(v, r["after_1nt"], 2)
    if op == contract_bid(2, NT):
        return _over_notrump(v, r["after_2nt"], 3)
    if op == contract_bid(2, C):
        return _first(_at(st, 2, D))
    if level == 2:
        # weak two
        if x >= 16 and ln[s] >= 3:
            return _first(_at(st, _game(s if s in MAJORS else NT), s if s in MAJORS else NT))
        return PASS
    if level != 1 or x < r["respond_min"]:
        return PASS
    if s in MAJORS and ln[s] >= 3:
        if _in(x, r["raise_2"]):
            return _first(_cheapest(st, s, 2))
        if _in(x, r["raise_3"]):
            return _first(_cheapest(st, s, 3))
        return _first(_at(st, 4, s))
    for t in ((S, H) if ln[S] > ln[H] else (H, S)):
        if ln[t] >= 4 and _at(st, 1, t) is not None:
            return contract_bid(1, t)
    if s in (C, D) and ln[s] >= 5 and x <= r["raise_3"][1]:
        return _first(_cheapest(st, s, 2 if _in(x, r["raise_2"]) else 3))
    if _in(x, r["resp_1nt"]) and x <= 10:
        return _first(_at(st, 1, NT))
    if v.bal and x >= r["resp_3nt"]:
        return _first(_at(st, 3, NT))
    if v.bal and _in(x, r["resp_2nt"]):
        return _first(_at(st, 2, NT))
    if x >= r["new_suit_2"]:
        t = v.longest([u for u in (S, H, D, C) if u != s])
        if ln[t] >= 4:
            return _first(_cheapest(st, t, 2), _at(st, 3, NT) if x >= r["resp_3nt"] else None)
    return PASS


def _over_notrump(v: _View, table, base_level: int) -> int:
    st, x, ln = v.state, v.hcp, v.len
    if base_level == 2 and x >= 10:
        for t in (S, H):
            if ln[t] >= 6:
                return _first(_at(st, 4, t))
    if "2nt" in table and _in(x, table["2nt"]):
        return _first(_cheapest(st, NT, 2))
    if _in(x, table["3nt"]):
        return _first(_cheapest(st, NT, 3))
    if _in(x, table["4nt"]):
        return _first(_at(st, 4, NT))
    if x >= table["6nt"]:
        return _first(_at(st, 6, NT))
    return PASS


def _shown(v: _View, bid: int, role_first: bool) -> int:
    """Minimum points the partner showed with the response ``bid``."""
    if bid == PASS:
        return 0
    level, s = bid // 5 + 1, bid % 5
    if s == NT:
        return {1: SHOWN["resp_1nt"], 2: SHOWN["resp_2nt"]}.get(level, SHOWN["resp_3nt"])
    return SHOWN["new_1"] if level == 1 else SHOWN["new_2"]


def _opener_rebid(v: _View, op: int, resp: int) -> int:
    st, x, ln, r = v.state, v.hcp, v.len, RANGES
    s = op % 5
    if op == contract_bid(2, C):
        if v.bal:
            return _first(_cheapest(st, NT, 3))
        t = v.longest((S, H, D, C))
        return _first(_cheapest(st, t, 3))
    if op // 5 + 1 >= 2 or s == NT or resp >= 35:
        return PASS
    rl, rs = resp // 5 + 1, resp % 5
    if rs == s:
        pts = x + (SHOWN["raise_3"] if rl >= 3 else SHOWN["raise_2"])
        if rl < _game(s if s in MAJORS else NT) and pts >= r["game"]:
            return _first(_at(st, 4, s) if s in MAJORS else _cheapest(st, NT, 3))
        return PASS
    if rs == NT:
        if rl >= 3:
            return PASS
        if rl == 2:
            return _first(_at(st, 3, NT)) if x >= 14 else PASS
        if v.bal and x >= 18:
            return _first(_at(st, 3, NT))
        if v.bal and x == 17:
            return _first(_at(st, 2, NT))
        if ln[s] >= 6:
            return _first(_cheapest(st, s, 2))
        return PASS
    if rl == 1:
        if ln[rs] >= 4:
            if x >= 19:
                return _first(_at(st, 4, rs))
            if x >= 16:
                return _first(_cheapest(st, rs, 3))
            return _first(_cheapest(st, rs, 2))
        if v.bal and x <= 14:
            return _first(_at(st, 1, NT))
        if v.bal and x >= 18:
            return _first(_at(st, 2, NT))
        if ln[s] >= 6:
            return _first(_cheapest(st, s, 2))
        return _first(_at(st, 1, NT))
    if rl == 2:
        if ln[s] >= 6:
            return _first(_cheapest(st, s, 3))
        if ln[rs] >= 4:
            return _first(_at(st, 4, rs) if rs in MAJORS and x >= 15 else _cheapest(st, rs, 3))
        if v.bal:
            return _first(_cheapest(st, NT, 3 if x >= 15 else 2))
    return PASS


def _responder_rebid(v: _View, partners, first: int) -> int:
    st, x, ln, r = v.state, v.hcp, v.len, RANGES
    op, rebid = partners[0], partners[1]
    if op == contract_bid(2, C):
        s = rebid % 5
        if rebid < 35 and s in MAJORS and ln[s] >= 3:
            return _first(_at(st, 4, s))
        return _first(_at(st, 3, NT))
    if rebid >= 35:
        return PASS
    level, s = rebid // 5 + 1, rebid % 5
    pts = x + SHOWN["open"]
    if level >= _game(s):
        return PASS
    if pts < r["game"]:
        return PASS
    if s == first % 5 and s in MAJORS:
        return _first(_at(st, 4, s))
    if s == NT:
        for t in MAJORS:
            if ln[t] >= 6:
                return _first(_at(st, 4, t))
        return _first(_at(st, 3, NT))
    if s in MAJORS and ln[s] >= 3:
        return _first(_at(st, 4, s))
    return _first(_at(st, 3, NT))


def _compete(v: _View) -> int:
    st, x, ln, r = v.state, v.hcp, v.len, RANGES
    last = v.state.last_contract
    os_ = last % 5
    if _in(x, r["overcall_nt"]) and v.bal and os_ != NT and v.honours(os_) >= 1:
        b = _at(st, 1, NT)
        if b is not None:
            return b
    if _in(x, r["overcall"]):
        cands = [u for u in (S, H, D, C) if u != os_ and ln[u] >= 5]
        if cands:
            t = v.longest(cands)
            b = _cheapest(st, t, 2)
            if b is not None and (b // 5 == 0 or (x >= r["overcall_2"] and ln[t] >= 6)):
                return b
    if os_ != NT and x >= r["takeout_x"] and ln[os_] <= 2 and st.is_legal(DOUBLE) \
            and all(ln[u] >= 3 for u in range(4) if u != os_):
        return DOUBLE
    return PASS


def _advance(v: _View, pbid: int) -> int:
    st, x, ln, r = v.state, v.hcp, v.len, RANGES
    _, _, ob = v.opening
    os_ = ob % 5
    if pbid == DOUBLE:
        if st.bids[-1] != PASS:
            return PASS
        t = v.longest([u for u in (S, H, D, C) if u != os_])
        if x >= 10 and v.bal and os_ != NT:
            return _first(_cheapest(st, NT, 3 if x >= 13 else 2), _cheapest(st, t, 3))
        return _first(_cheapest(st, t, 3))
    if pbid >= 35:
        return PASS
    ps = pbid % 5
    if ps == NT and pbid // 5 == 0:
        return _over_notrump(v, r["after_1nt"], 2)
    if ps != NT and ln[ps] >= 3:
        if x >= r["advance_game"] and ps in MAJORS:
            return _first(_at(st, 4, ps))
        if x >= r["advance_raise"]:
            return _first(_cheapest(st, ps, 3))
    return PASS


def _penalty_double(v: _View):
    """Double an undoubled opposing game with trumps or a strong hand."""
    st = v.state
    last = st.last_contract
    if last < 0 or not st.is_legal(DOUBLE):
        return None
    level, s = last // 5 + 1, last % 5
    if level < _game(s):
        return None
    if s == NT:
        return DOUBLE if v.hcp >= RANGES["penalty_x"] else None
    if v.len[s] >= 4 and v.honours(s) >= 2:
        return DOUBLE
    return None


def teacher_auction(deal, max_calls: int = 319) -> list[int]:
    """Bid ``deal`` to the end with the teacher at all four seats."""
    state = AuctionState.start(deal.dealer)
    while not state.is_terminal():
        if len(state.bids) >= max_calls:
            raise RuntimeError("teacher auction did not terminate")
        state = state.apply(teacher_bid(deal.hands[state.to_act], state))
    return list(state.bids)
