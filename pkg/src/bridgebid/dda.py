"""Double dummy analysis: perfect-information trick counts.

The search is a boolean alpha-beta ("can North-South take at least
``target`` tricks?") driven by zero-window probes around a guess.  Hands
are stored as per-suit 13-bit holdings.  Cards that are adjacent among the
cards still in play are interchangeable, so only one of each run is tried.

Every search result carries the set of cards whose ranks it depended on.
Trick-boundary positions are stored in the transposition table with only
those cards, so one entry answers for all positions that differ in the
placement of low cards.  Entries hold lower/upper bounds on North-South's
remaining tricks and are tagged with a generation number so a new
deal/strain never needs a clear.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
from numba import njit
from sklearn.base import BaseEstimator, TransformerMixin

from .auction import NOTRUMP, Contract
from .core import Deal, Seat, Vulnerability, canonical_deal_text, suit_holding
from .scoring import declarer_score

STRAINS = (0, 1, 2, 3, 4)
DEFAULT_TT_BITS = 22

_POP = np.array([bin(i).count("1") for i in range(1 << 13)], dtype=np.int64)
_TOP = np.array([i.bit_length() - 1 for i in range(1 << 13)], dtype=np.int64)
_H1 = np.int64(-7046029254386353131)  # 0x9E3779B97F4A7C15 as signed
_H2 = np.int64(-4417276706812531889)  # 0xC2B2AE3D27D4EB4F as signed


@njit(cache=True)
def _low_rank(x):
    return _TOP[x & -x]


@njit(cache=True)
def _last_trick(hands, leader, trump, work, d):
    """North-South's share of the final trick; marks the winner if it won on rank."""
    suits = np.empty(4, dtype=np.int64)
    win_seat = leader
    win_suit = -1
    win_rank = -1
    for i in range(4):
        seat = (leader + i) & 3
        for s in range(4):
            h = hands[seat, s]
            if h:
                r = _TOP[h]
                suits[i] = s
                if i == 0:
                    win_suit = s
                    win_rank = r
                elif (s == win_suit and r > win_rank) or (s == trump and win_suit != trump):
                    win_seat = seat
                    win_suit = s
                    win_rank = r
                break
    same = 0
    for i in range(4):
        if suits[i] == win_suit:
            same += 1
    if same >= 2:
        work[d, 4, win_suit] |= 1 << win_rank
    return 1 if (win_seat & 1) == 0 else 0


@njit(cache=True)
def _cash(hands, side_seat, trump, work, d, off, forced):
    """Tricks ``side_seat`` can cash at once when on lead.

    Winners are cashed from the top while partner plays low; a suit in
    which partner is forced to overtake ends the run, so at most one such
    suit is counted, last.  With ``forced >= 0`` that suit must be played
    first.  The lowest card relied on in each counted suit is recorded in
    ``work[d, 5, off + suit]``.
    """
    o1 = (side_seat + 1) & 3
    o2 = (side_seat + 3) & 3
    pd = side_seat ^ 2
    total = 0
    blocked_best = 0
    blocked_suit = -1
    blocked_low = 0
    for i in range(5):
        if i == 0:
            if forced < 0:
                continue
            s = forced
        else:
            s = i - 1
            if s == forced:
                continue
        h = hands[side_seat, s]
        w = 0
        if h:
            opp = hands[o1, s] | hands[o2, s]
            if opp == 0:
                w = _POP[h]
            else:
                w = _POP[h >> (_TOP[opp] + 1)]
            if w and trump < 4 and s != trump:
                if hands[o1, trump] != 0 and _POP[hands[o1, s]] < w:
                    w = _POP[hands[o1, s]]
                if hands[o2, trump] != 0 and _POP[hands[o2, s]] < w:
                    w = _POP[hands[o2, s]]
        if w == 0:
            if i == 0:
                return 0
            continue
        mine = h
        ph = hands[pd, s]
        blocked = False
        cnt = 0
        top = 0
        for _ in range(w):
            top = _TOP[mine]
            mine ^= 1 << top
            cnt += 1
            if ph:
                low = ph & -ph
                ph ^= low
                if low > (1 << top):
                    blocked = True
                    break
        if blocked:
            if i == 0:
                work[d, 5, off + s] |= 1 << top
                return cnt
            if cnt > blocked_best:
                blocked_best = cnt
                blocked_suit = s
                blocked_low = top
        else:
            total += cnt
            work[d, 5, off + s] |= 1 << top
    if blocked_suit >= 0:
        work[d, 5, off + blocked_suit] |= 1 << blocked_low
    return total + blocked_best


@njit(cache=True)
def _min_tricks(hands, leader, trump, work, d):
    """Sure tricks for the side on lead, relevant cards into ``work[d, 4]``.

    Either the leader cashes its own winners, or it leads low to a suit
    headed by partner who then cashes.
    """
    for k in range(8, 16):
        work[d, 5, k] = 0
    best = _cash(hands, leader, trump, work, d, 8, -1)
    pd = leader ^ 2
    o1 = (leader + 1) & 3
    o2 = (leader + 3) & 3
    for s in range(4):
        h = hands[leader, s]
        ph = hands[pd, s]
        if h == 0 or ph == 0:
            continue
        pt = _TOP[ph]
        if (h & -h) > (1 << pt) or _TOP[hands[o1, s] | hands[o2, s] | 1] > pt:
            continue
        for k in range(12, 16):
            work[d, 5, k] = 0
        q = _cash(hands, pd, trump, work, d, 12, s)
        if q > best:
            best = q
            for k in range(4):
                work[d, 5, 8 + k] = work[d, 5, 12 + k]
    for k in range(4):
        work[d, 4, k] |= work[d, 5, 8 + k]
    return best


def _compress_table(bits):
    out = np.zeros(1 << (2 * bits), dtype=np.int64)
    for alive in range(1 << bits):
        for h in range(1 << bits):
            if h & ~alive:
                continue
            v = j = 0
            for r in range(bits):
                if (alive >> r) & 1:
                    v |= ((h >> r) & 1) << j
                    j += 1
            out[(alive << bits) | h] = v
    return out


# bits of a holding packed down to its positions among the live cards,
# split as the low 7 and high 6 ranks
_PACK7 = _compress_table(7)
_PACK6 = _compress_table(6)
# bit i moved to bit 2i
_SPREAD = np.array([sum(((x >> i) & 1) << (2 * i) for i in range(13)) for x in range(1 << 13)],
                   dtype=np.int64)


@njit(cache=True)
def _owner_digits(h, alive):
    lo = _PACK7[((alive & 127) << 7) | (h & 127)]
    hi = _PACK6[((alive >> 7) << 6) | (h >> 7)]
    return _SPREAD[lo | (hi << _POP[alive & 127])]


@njit(cache=True)
def _position_codes(hands, work, d):
    """Owner sequence of each suit from the top (base 4) and suit sizes.

    ``work[d, 5, s]`` gets the owners, ``work[d, 5, 4 + s]`` the number of
    cards left in suit ``s``.  Returns the packed per-hand suit lengths.
    """
    lengths = np.int64(0)
    for s in range(4):
        h0 = hands[0, s]
        h1 = hands[1, s]
        h2 = hands[2, s]
        h3 = hands[3, s]
        alive = h0 | h1 | h2 | h3
        work[d, 5, 4 + s] = _POP[alive]
        if alive:
            work[d, 5, s] = (_owner_digits(h1, alive) + 2 * _owner_digits(h2, alive)
                             + 3 * _owner_digits(h3, alive))
        else:
            work[d, 5, s] = 0
        lengths = (lengths << 16) | (_POP[h0] << 12) | (_POP[h1] << 8) | (_POP[h2] << 4) | _POP[h3]
    return lengths


@njit(cache=True)
def _tt_chain(n_heads, lengths, leader, key):
    h = (lengths * _H1) ^ ((leader * (1 << 34) + key + 1) * _H2)
    return (h >> 24) & (n_heads - 1)


@njit(cache=True)
def _pattern_key(work, d, pattern):
    """Chain key: the pattern plus the owners of each suit's top cards.

    ``pattern`` holds two bits per suit: how many top cards (capped at 3)
    an entry depends on.  Returns -1 when the position has too few cards.
    """
    sig = 0
    for s in range(4):
        c = (pattern >> (2 * s)) & 3
        cnt = work[d, 5, 4 + s]
        code = 0
        if c:
            if cnt < c:
                return -1
            code = work[d, 5, s] >> (2 * (cnt - c))
        sig = sig * 64 + code
    return (pattern << 24) | sig


@njit(cache=True)
def _rank_from_top(alive, r):
    """Position of rank ``r`` counted from the top of ``alive`` (0 = top)."""
    return _POP[alive >> (r + 1)]


@njit(cache=True)
def _rank_at_top_index(alive, idx):
    a = alive
    for _ in range(idx):
        a ^= 1 << _TOP[a]
    return _TOP[a] if a else -1


@njit(cache=True)
def _gen_moves(hands, seat, pos, leader, lead_suit, win_seat, win_suit, win_rank,
               trump, hint, work, d):
    """Fill candidate (suit, rank) arrays with ordering scores; return count."""
    n = 0
    partner = seat ^ 2
    lho = (seat + 1) & 3
    follow = pos > 0 and hands[seat, lead_suit] != 0
    partner_winning = pos > 0 and (win_seat & 1) == (seat & 1)
    for s in range(4):
        if follow and s != lead_suit:
            continue
        h = hands[seat, s]
        if h == 0:
            continue
        alive = hands[0, s] | hands[1, s] | hands[2, s] | hands[3, s] | hands[4, s]
        others = alive & ~h
        length = _POP[h]
        top_alive = _TOP[alive]
        x = h
        while x:
            r = _TOP[x]
            x ^= 1 << r
            # keep r only if it heads its run of equivalent cards
            higher_own = h >> (r + 1)
            if higher_own != 0:
                # nearest own card above r; r is a duplicate if no other card lies between
                nxt = r + 1
                while not (h >> nxt) & 1:
                    nxt += 1
                between = others & (((1 << nxt) - 1) ^ ((1 << (r + 1)) - 1))
                if between == 0:
                    continue
            b = r
            while True:
                lower = h & ((1 << b) - 1)
                if lower == 0:
                    break
                nb = _TOP[lower]
                if others & ((1 << b) - 1) & ~((1 << (nb + 1)) - 1):
                    break
                b = nb
            score = 0
            if pos == 0:
                if r == top_alive:
                    score = 60 + length
                    if trump < 4 and s != trump:
                        for o in (lho, (seat + 3) & 3):
                            if hands[o, s] == 0 and hands[o, trump] != 0:
                                score = -40
                elif hands[partner, s] != 0 and _TOP[hands[partner, s]] == top_alive:
                    score = 45 - r
                else:
                    score = 20 - r + length
                    if trump < 4 and s == trump and (seat & 1) == (leader & 1):
                        score += 5
            else:
                beats = (s == win_suit and r > win_rank) or (s == trump and win_suit != trump)
                if pos == 3:
                    if partner_winning:
                        score = 30 - r
                        if beats:
                            score -= 20
                    else:
                        score = (100 - r) if beats else (30 - r)
                    if s == trump and not beats:
                        score -= 15
                    if s != lead_suit and s != trump:
                        score += length
                else:
                    lho_top = -1
                    lho_ruff = False
                    if hands[lho, lead_suit] != 0:
                        lho_top = _TOP[hands[lho, lead_suit]]
                    elif trump < 4 and lead_suit != trump and hands[lho, trump] != 0:
                        lho_ruff = True
                    if s == lead_suit:
                        safe = r > lho_top and not lho_ruff
                    elif s == trump:
                        safe = True
                        if hands[lho, lead_suit] == 0 and hands[lho, trump] != 0 \
                                and _TOP[hands[lho, trump]] > r:
                            safe = False
                    else:
                        safe = False
                    if partner_winning:
                        cur_safe = (win_suit == lead_suit and win_rank > lho_top and not lho_ruff) \
                            or (win_suit == trump and lead_suit != trump and
                                (hands[lho, lead_suit] != 0 or hands[lho, trump] == 0 or
                                 _TOP[hands[lho, trump]] < win_rank))
                        if cur_safe:
                            score = (10 - r) if beats else (50 - r)
                        else:
                            score = (70 - r) if (beats and safe) else (25 - r)
                    else:
                        if beats and safe:
                            score = 90 - r
                        elif beats:
                            score = 40 - r
                        else:
                            score = 35 - r if pos == 1 else 20 - r
                    if s != lead_suit and s != trump:
                        score += length
            if s * 16 + _rank_from_top(alive, r) == hint:
                score += 1000
            work[d, 0, n] = s
            work[d, 1, n] = r
            work[d, 2, n] = score
            work[d, 3, n] = b
            n += 1
    # insertion sort by score, descending
    for i in range(1, n):
        ks = work[d, 0, i]
        kr = work[d, 1, i]
        kc = work[d, 2, i]
        kb = work[d, 3, i]
        j = i - 1
        while j >= 0 and work[d, 2, j] < kc:
            work[d, 0, j + 1] = work[d, 0, j]
            work[d, 1, j + 1] = work[d, 1, j]
            work[d, 2, j + 1] = work[d, 2, j]
            work[d, 3, j + 1] = work[d, 3, j]
            j -= 1
        work[d, 0, j + 1] = ks
        work[d, 1, j + 1] = kr
        work[d, 2, j + 1] = kc
        work[d, 3, j + 1] = kb
    return n



# transposition table layout --------------------------------------------------
# An entry stores bounds for a trick-boundary position together with, per
# suit, how many top cards (k) its result depended on.  Another position
# matches when the suit lengths of every hand and the leader agree and the
# owners of those top-k cards agree; lower cards are irrelevant.
#
# tt[j] = (lengths, tag, kn, next, owner codes of suits 0-1, of suits 2-3,
#          lb | ub << 8 | (move + 1) << 16, 0)
# head[h, 0:2] = (first entry of chain h, generation)
# head[w, 2:9] = (lengths, leader or -1 if shared, generation, 256-bit set
#                 of patterns stored for that lengths/leader)
# ctl = (use_tt, use_bounds, use_ordering, pool fill, generation, 0, 0, 0,
#        nodes, probes, cutoffs, ...)
# work[depth] rows 0-3 hold moves, row 4 the relevant-card marks (column 8
# caches the packed lengths) and row 5 the position codes.

@njit(cache=True)
def _tt_matches(tt, j, kn, work, d):
    for s in range(4):
        k = (kn >> (4 * s)) & 15
        if k:
            stored = (tt[j, 4 + (s >> 1)] >> (32 * (s & 1))) & 0xFFFFFFFF
            if ((work[d, 5, s] ^ stored) >> (2 * (work[d, 5, 4 + s] - k))) != 0:
                return False
    return True


@njit(cache=True)
def _tt_probe(hands, leader, need, head, tt, ctl, work, d):
    """Look up the current trick-boundary position.

    Entries are chained by suit lengths, leader and the owners of the top
    cards they depend on, so every subset of suits is tried as "ignored".
    Returns 1 or 0 on a cutoff (with the entry's relevant cards in
    ``work[d, 4]``) and otherwise ``-2 - hint`` where hint is a move or -1.
    """
    gen = ctl[4]
    lengths = _position_codes(hands, work, d)
    work[d, 4, 8] = lengths
    w = _tt_chain(head.shape[0], lengths, leader, -1)
    if head[w, 4] != gen:
        return -1
    if head[w, 3] >= 0 and (head[w, 2] != lengths or head[w, 3] != leader):
        return -1
    hint = -1
    for word in range(4):
        m = head[w, 5 + word]
        i = 0
        while m != 0:
            while (m & 255) == 0:
                m = (m >> 8) & 0x00FFFFFFFFFFFFFF
                i += 8
            if (m & 1) == 0:
                m = (m >> 1) & 0x7FFFFFFFFFFFFFFF
                i += 1
                continue
            m = (m >> 1) & 0x7FFFFFFFFFFFFFFF
            pattern = 64 * word + i
            i += 1
            key = _pattern_key(work, d, pattern)
            if key < 0:
                continue
            h = _tt_chain(head.shape[0], lengths, leader, key)
            if head[h, 1] != gen:
                continue
            tag = leader * (1 << 34) + key
            j = head[h, 0]
            while j >= 0:
                if tt[j, 0] == lengths and tt[j, 1] == tag:
                    kn = tt[j, 2]
                    if _tt_matches(tt, j, kn, work, d):
                        v = tt[j, 6]
                        lb = v & 255
                        ub = (v >> 8) & 255
                        if lb >= need or ub < need:
                            for s in range(4):
                                k = (kn >> (4 * s)) & 15
                                if k:
                                    alive = hands[0, s] | hands[1, s] | hands[2, s] | hands[3, s]
                                    work[d, 4, s] |= 1 << _rank_at_top_index(alive, k - 1)
                            return 1 if lb >= need else 0
                        if hint < 0:
                            hint = (v >> 16) - 1
                j = tt[j, 3]
    return -2 - hint


@njit(cache=True)
def _index_reset(head, w, lengths, leader, gen):
    head[w, 2] = lengths
    head[w, 3] = leader
    head[w, 4] = gen
    for k in range(4):
        head[w, 5 + k] = 0


@njit(cache=True)
def _tt_save(hands, leader, head, tt, ctl, work, d, lb, ub, move):
    gen = ctl[4]
    lengths = work[d, 4, 8]
    kn = 0
    pattern = 0
    for s in range(4):
        if work[d, 4, s]:
            alive = hands[0, s] | hands[1, s] | hands[2, s] | hands[3, s]
            k = _POP[alive >> _low_rank(work[d, 4, s])]
            kn |= k << (4 * s)
            pattern |= min(k, 3) << (2 * s)
    key = _pattern_key(work, d, pattern)
    tag = leader * (1 << 34) + key
    w = _tt_chain(head.shape[0], lengths, leader, -1)
    bit = np.int64(1) << (pattern & 63)
    if head[w, 4] != gen:
        _index_reset(head, w, lengths, leader, gen)
    elif head[w, 3] >= 0 and (head[w, 2] != lengths or head[w, 3] != leader):
        # two positions share the slot, which then keeps the union of patterns
        head[w, 3] = -1
    head[w, 5 + (pattern >> 6)] |= bit
    h = _tt_chain(head.shape[0], lengths, leader, key)
    if head[h, 1] == gen:
        j = head[h, 0]
        while j >= 0:
            if tt[j, 0] == lengths and tt[j, 1] == tag and tt[j, 2] == kn \
                    and _tt_matches(tt, j, kn, work, d):
                v = tt[j, 6]
                old_lb = v & 255
                old_ub = (v >> 8) & 255
                if old_lb > lb:
                    lb = old_lb
                if old_ub < ub:
                    ub = old_ub
                if move < 0:
                    move = (v >> 16) - 1
                tt[j, 6] = lb | (ub << 8) | ((move + 1) << 16)
                return
            j = tt[j, 3]
    else:
        head[h, 0] = -1
        head[h, 1] = gen
    slot = ctl[3]
    if slot >= tt.shape[0]:
        # pool exhausted: forget this generation's entries
        ctl[4] += 1
        gen = ctl[4]
        head[h, 0] = -1
        head[h, 1] = gen
        _index_reset(head, w, lengths, leader, gen)
        head[w, 5 + (pattern >> 6)] |= bit
        slot = 0
    ctl[3] = slot + 1
    tt[slot, 0] = lengths
    tt[slot, 1] = tag
    tt[slot, 2] = kn
    tt[slot, 3] = head[h, 0]
    tt[slot, 4] = work[d, 5, 0] | (work[d, 5, 1] << 32)
    tt[slot, 5] = work[d, 5, 2] | (work[d, 5, 3] << 32)
    tt[slot, 6] = lb | (ub << 8) | ((move + 1) << 16)
    head[h, 0] = slot


@njit
def _search(hands, leader, pos, lead_suit, win_seat, win_suit, win_rank,
            ns_tricks, tricks_left, target, trump, head, tt, ctl, work):
    """Can North-South reach ``target`` tricks?

    On return ``work[depth, 4, :4]`` holds, per suit, bits of the cards
    whose ranks the answer depended on.  Every card ranking at or above the
    lowest such bit counts as relevant; lower cards may be permuted among
    hands with equal suit lengths without changing the answer.
    """
    ctl[8] += 1
    seat = (leader + pos) & 3
    d = 4 * tricks_left + pos
    for s in range(4):
        work[d, 4, s] = 0
    hint = -1
    use_tt = ctl[0] != 0
    if pos == 0:
        if ns_tricks >= target:
            return True
        if ns_tricks + tricks_left < target:
            return False
        if tricks_left == 1:
            return ns_tricks + _last_trick(hands, leader, trump, work, d) >= target
        if ctl[1] != 0:
            q = _min_tricks(hands, leader, trump, work, d)
            # trumps above every opposing trump each win the trick they fall on
            sure = 0
            side = 0
            low = 0
            if trump < 4:
                alive = hands[0, trump] | hands[1, trump] | hands[2, trump] | hands[3, trump]
                if alive:
                    side = 0 if (hands[0, trump] | hands[2, trump]) & (1 << _TOP[alive]) else 1
                    mine_a = hands[side, trump]
                    mine_b = hands[side + 2, trump]
                    theirs = hands[side ^ 1, trump] | hands[side ^ 3, trump]
                    seg = alive & ~((1 << (_TOP[theirs] + 1)) - 1) if theirs else alive
                    a = _POP[seg & mine_a]
                    b = _POP[seg & mine_b]
                    sure = max(a, b, (a + b + 1) // 2)
                    low = _low_rank(seg)
            if sure > q and side == (leader & 1):
                q = sure
                for s in range(4):
                    work[d, 4, s] = 0
                work[d, 4, trump] = 1 << low
            if leader & 1:
                if ns_tricks + tricks_left - q < target:
                    return False
            elif ns_tricks + q >= target:
                return True
            for s in range(4):
                work[d, 4, s] = 0
            if sure and side != (leader & 1):
                if side == 0:
                    if ns_tricks + sure >= target:
                        work[d, 4, trump] = 1 << low
                        return True
                elif ns_tricks + tricks_left - sure < target:
                    work[d, 4, trump] = 1 << low
                    return False
        if use_tt:
            ctl[9] += 1
            got = _tt_probe(hands, leader, target - ns_tricks, head, tt, ctl, work, d)
            if got >= 0:
                ctl[10] += 1
                return got == 1
            hint = -2 - got
    if ctl[2] != 0:
        n = _gen_moves(hands, seat, pos, leader, lead_suit, win_seat, win_suit, win_rank,
                       trump, hint, work, d)
    else:
        n = _plain_moves(hands, seat, pos, lead_suit, work, d)
    maximizing = (seat & 1) == 0
    result = not maximizing
    best = -1
    for i in range(n):
        s = work[d, 0, i]
        r = work[d, 1, i]
        bit = 1 << r
        hands[seat, s] ^= bit
        hands[4, s] |= bit
        if pos == 0:
            nls, nws, nwsu, nwr = s, seat, s, r
        elif (s == win_suit and r > win_rank) or (s == trump and win_suit != trump):
            nls, nws, nwsu, nwr = lead_suit, seat, s, r
        else:
            nls, nws, nwsu, nwr = lead_suit, win_seat, win_suit, win_rank
        by_rank = False
        if pos == 3:
            by_rank = _POP[hands[4, nwsu]] >= 2
            t0 = hands[4, 0]
            t1 = hands[4, 1]
            t2 = hands[4, 2]
            t3 = hands[4, 3]
            hands[4, 0] = 0
            hands[4, 1] = 0
            hands[4, 2] = 0
            hands[4, 3] = 0
            won = 1 if (nws & 1) == 0 else 0
            res = _search(hands, nws, 0, -1, -1, -1, -1, ns_tricks + won, tricks_left - 1,
                          target, trump, head, tt, ctl, work)
            c = d - 7
            hands[4, 0] = t0
            hands[4, 1] = t1
            hands[4, 2] = t2
            hands[4, 3] = t3
        else:
            res = _search(hands, leader, pos + 1, nls, nws, nwsu, nwr, ns_tricks,
                          tricks_left, target, trump, head, tt, ctl, work)
            c = d + 1
        hands[4, s] ^= bit
        hands[seat, s] ^= bit
        if res == maximizing:
            for k in range(4):
                work[d, 4, k] = work[c, 4, k]
            if by_rank:
                work[d, 4, nwsu] |= 1 << nwr
            result = res
            best = i
            break
        for k in range(4):
            work[d, 4, k] |= work[c, 4, k]
        if by_rank:
            work[d, 4, nwsu] |= 1 << nwr
    if best < 0:
        # every move was needed: runs of equivalent cards headed by a
        # relevant card must stay equivalent, so they become relevant too
        for i in range(n):
            s = work[d, 0, i]
            ms = work[d, 4, s]
            if ms and work[d, 1, i] >= _low_rank(ms):
                work[d, 4, s] = ms | (1 << work[d, 3, i])
    if pos == 0 and use_tt:
        need = target - ns_tricks
        move = -1
        if best >= 0:
            s = work[d, 0, best]
            alive = hands[0, s] | hands[1, s] | hands[2, s] | hands[3, s]
            move = s * 16 + _rank_from_top(alive, work[d, 1, best])
        if result:
            _tt_save(hands, leader, head, tt, ctl, work, d, need, tricks_left, move)
        else:
            _tt_save(hands, leader, head, tt, ctl, work, d, 0, need - 1, move)
    return result


@njit(cache=True)
def _plain_moves(hands, seat, pos, lead_suit, work, d):
    n = 0
    follow = pos > 0 and hands[seat, lead_suit] != 0
    for s in range(4):
        if follow and s != lead_suit:
            continue
        h = hands[seat, s]
        for r in range(13):
            if (h >> r) & 1:
                work[d, 0, n] = s
                work[d, 1, n] = r
                work[d, 3, n] = r
                n += 1
    return n


@njit
def _solve_ns(hands, leader, trump, guess, head, tt, ctl):
    n_tricks = 0
    for s in range(4):
        n_tricks += _POP[hands[0, s]]
    # row 4 holds the cards of the trick in progress
    hands = np.concatenate((hands, np.zeros((1, 4), dtype=np.int64)))
    work = np.zeros((4 * n_tricks + 8, 6, 16), dtype=np.int64)
    lo = 0
    hi = n_tricks
    g = guess
    while lo < hi:
        t = g
        if t <= lo:
            t = lo + 1
        if t > hi:
            t = hi
        if _search(hands, leader, 0, -1, -1, -1, -1, 0, n_tricks, t, trump,
                   head, tt, ctl, work):
            lo = t
            g = t + 1
        else:
            hi = t - 1
            g = t - 1
    return lo


def deal_holdings(deal: Deal) -> np.ndarray:
    """``(4, 4)`` int64 array of 13-bit suit holdings, [seat, suit]."""
    return np.array([[suit_holding(h, s) for s in range(4)] for h in deal.hands], dtype=np.int64)


@dataclass
class DoubleDummyTable:
    """Declarer-side tricks, ``tricks[declarer, strain]``; strains C, D, H, S, NT."""

    tricks: np.ndarray

    def __getitem__(self, key):
        declarer, strain = key
        return int(self.tricks[int(declarer), int(strain)])

    def to_text(self) -> str:
        lines = ["    C  D  H  S  N"]
        for seat in Seat:
            lines.append(f"{seat.name} " + "".join(f"{int(t):3d}" for t in self.tricks[seat]))
        return "\n".join(lines)

    def flat(self) -> list[int]:
        return [int(t) for t in self.tricks.reshape(-1)]


class DoubleDummySolver:
    """Reusable solver owning one transposition table.

    ``use_tt``, ``use_bounds`` and ``use_ordering`` switch the pruning aids
    off for soundness checks; none of them changes a result.
    """

    def __init__(self, tt_bits: int = DEFAULT_TT_BITS, use_tt: bool = True,
                 use_bounds: bool = True, use_ordering: bool = True):
        size = 1 << max(int(tt_bits), 4)
        self.head = np.zeros((max(size // 4, 16), 9), dtype=np.int64)
        self.tt = np.zeros((size, 8), dtype=np.int64)
        self.ctl = np.zeros(16, dtype=np.int64)
        self.ctl[:3] = (use_tt, use_bounds, use_ordering)

    @property
    def stats(self) -> np.ndarray:
        """Search counters: nodes, table probes, table cutoffs."""
        return self.ctl[8:]

    def _new_generation(self):
        # entries of older generations are unreachable, so the pool restarts
        self.ctl[4] += 1
        self.ctl[3] = 0
        return int(self.ctl[4])

    def _ns_tricks(self, holdings, leader, strain, guess):
        return int(_solve_ns(holdings, int(leader), int(strain), int(guess), self.head, self.tt,
                             self.ctl))

    def solve(self, deal: Deal, declarer: Seat, strain: int) -> int:
        """Tricks the declaring side takes with best play; LHO of declarer leads."""
        declarer = Seat(declarer)
        if not 0 <= strain <= 4:
            raise ValueError(f"bad strain {strain}")
        holdings = deal_holdings(deal)
        n = deal.cards_per_hand
        self._new_generation()
        ns = self._ns_tricks(holdings, declarer.next, strain, n // 2)
        return ns if declarer.side == 0 else n - ns

    def ddt(self, deal: Deal) -> DoubleDummyTable:
        holdings = deal_holdings(deal)
        n = deal.cards_per_hand
        out = np.zeros((4, 5), dtype=np.int64)
        for strain in STRAINS:
            self._new_generation()
            guess = n // 2
            for declarer in (Seat.N, Seat.S, Seat.E, Seat.W):
                ns = self._ns_tricks(holdings, declarer.next, strain, guess)
                guess = ns
                out[declarer, strain] = ns if declarer.side == 0 else n - ns
        return DoubleDummyTable(out)


_default_solver: Optional[DoubleDummySolver] = None


def default_solver() -> DoubleDummySolver:
    global _default_solver
    if _default_solver is None:
        _default_solver = DoubleDummySolver()
    return _default_solver


def solve(deal: Deal, declarer: Seat, strain: int) -> int:
    return default_solver().solve(deal, declarer, strain)


def ddt(deal: Deal) -> DoubleDummyTable:
    return default_solver().ddt(deal)


# -- trick rules exposed for callers and tests --------------------------------

def legal_plays(hand: int, lead_suit: Optional[int]) -> list[int]:
    """Cards (0..51) a player holding ``hand`` may play to a trick."""
    cards = [c for c in range(52) if hand >> c & 1]
    if lead_suit is None:
        return cards
    follow = [c for c in cards if c // 13 == lead_suit]
    return follow or cards


def trick_winner(plays: Iterable[tuple[Seat, int]], trump: int) -> Seat:
    """Winner of a completed trick given ``(seat, card)`` pairs in play order."""
    plays = list(plays)
    if len(plays) != 4:
        raise ValueError("a trick has four cards")
    best_seat, best_card = plays[0]
    for seat, card in plays[1:]:
        s, bs = card // 13, best_card // 13
        if (s == bs and card > best_card) or (trump != NOTRUMP and s == trump and bs != trump):
            best_seat, best_card = seat, card
    return Seat(best_seat)


# -- optimal contracts ----------------------------------------------------------

def best_contract(table: DoubleDummyTable, side: int, vul: Vulnerability) -> tuple[Optional[Contract], int]:
    """Highest-scoring makeable undoubled contract for ``side`` (0 = NS).

    Sacrifices are not considered.  Returns ``(None, 0)`` if nothing makes.
    """
    best, best_score = None, 0
    seats = (Seat.N, Seat.S) if side == 0 else (Seat.E, Seat.W)
    for declarer in seats:
        vulnerable = Vulnerability(vul).is_vulnerable(declarer)
        for strain in STRAINS:
            tricks = table[declarer, strain]
            level = tricks - 6
            for lvl in range(1, min(level, 7) + 1):
                score = declarer_score(lvl, strain, 0, tricks, vulnerable)
                if score > best_score:
                    best, best_score = Contract(lvl, strain, 0, declarer), score
    return best, best_score


# -- on-disk cache and estimator wrapper ----------------------------------------

class DDTCache:
    """Append-only ``<deal-hash> <20 ints>`` file keyed by the hands."""

    def __init__(self, path, solver: Optional[DoubleDummySolver] = None):
        self.path = Path(path)
        self.solver = solver or default_solver()
        self._rows: dict[str, np.ndarray] = {}
        if self.path.exists():
            for line in self.path.read_text().splitlines():
                parts = line.split()
                if len(parts) == 21:
                    self._rows[parts[0]] = np.array(parts[1:], dtype=np.int64).reshape(4, 5)

    @staticmethod
    def key(deal: Deal) -> str:
        import hashlib
        return hashlib.sha1(canonical_deal_text(deal).encode()).hexdigest()[:20]

    def get(self, deal: Deal) -> DoubleDummyTable:
        k = self.key(deal)
        if k not in self._rows:
            table = self.solver.ddt(deal)
            self._rows[k] = table.tricks
            with self.path.open("a") as fh:
                fh.write(k + " " + " ".join(map(str, table.flat())) + "\n")
        return DoubleDummyTable(self._rows[k].copy())

    def __len__(self):
        return len(self._rows)


class DDTTransformer(TransformerMixin, BaseEstimator):
    """Map a sequence of deals to an ``(n, 20)`` array of DDT entries."""

    def __init__(self, tt_bits: int = DEFAULT_TT_BITS):
        self.tt_bits = tt_bits

    def fit(self, X=None, y=None):
        self.solver_ = DoubleDummySolver(self.tt_bits)
        return self

    def transform(self, X) -> np.ndarray:
        solver = getattr(self, "solver_", None) or DoubleDummySolver(self.tt_bits)
        return np.array([solver.ddt(d).flat() for d in X], dtype=np.int64).reshape(len(X), 20)


def time_ddt(deals: Iterable[Deal], solver: Optional[DoubleDummySolver] = None) -> list[float]:
    solver = solver or DoubleDummySolver()
    times = []
    for deal in deals:
        t0 = time.perf_counter()
        solver.ddt(deal)
        times.append(time.perf_counter() - t0)
    return times
