"""Evaluation: duplicate matches, network accuracy, and double dummy studies."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import STREAM_STUDY, Deal, Rng, Seat, Vulnerability, hand_from_cards
from .data import history_length
from .nn import top_k_mask
from .scoring import team_match_imp, score_contract, DuplicateScore


@dataclass
class MatchReport:
    n_deals: int
    avg_imp: float
    imps: list
    ci_half_width: float

    def to_text(self) -> str:
        return (f"deals {self.n_deals:8d}\navg_imp {self.avg_imp:+10.4f}\n"
                f"ci95 +-{self.ci_half_width:9.4f}\n")

    def to_csv(self) -> str:
        return "deal,imp\n" + "".join(f"{i},{v}\n" for i, v in enumerate(self.imps))


def _ci(values) -> float:
    n = len(values)
    if n < 2:
        return math.inf
    return 1.959963984540054 * float(np.std(values, ddof=1)) / math.sqrt(n)


def duplicate_match(a, b, deals: Sequence[Deal], mode: str = "argmax", rng: Rng | int = 0,
                    tricks_fn=None) -> MatchReport:
    """Team match of system ``a`` against ``b`` on the same deals.

    Table 1 seats ``a`` North-South, table 2 seats it East-West.  Both
    tables of a deal draw their sampling noise from the same per-deal
    substream, so swapping ``a`` and ``b`` negates every result.
    """
    from .training import TrickOracle, bid_table

    if not deals:
        raise ValueError("no deals")
    if isinstance(rng, int):
        rng = Rng(rng, 7)
    if tricks_fn is None:
        tricks_fn = TrickOracle()
    imps = []
    for deal in deals:
        scores = []
        for ns, ew in ((a, b), (b, a)):
            state = bid_table(ns, ew, deal, rng.generator(deal.id), mode)
            c = state.final_contract()
            if c.passed_out:
                scores.append(DuplicateScore(0, 0))
            else:
                scores.append(score_contract(c, tricks_fn(deal, c.declarer, c.strain), deal.vul))
        imps.append(team_match_imp(scores[0], scores[1]))
    return MatchReport(len(imps), float(np.mean(imps)), imps, _ci(imps))


@dataclass
class AccuracyReport:
    overall: float
    by_length: dict
    accuracy: dict
    recall: dict
    n: int = 0

    def to_text(self) -> str:
        lines = [f"overall {self.overall:.4f} n={self.n}"]
        lines += [f"length {k:4d} {v:.4f}" for k, v in sorted(self.by_length.items())]
        return "\n".join(lines) + "\n"


def _as_arrays(model, X, Y):
    if Y is None:
        inst = list(X)
        if hasattr(inst[0], "target"):
            X = np.array([i.input for i in inst])
            Y = np.array([i.target for i in inst])
        else:
            X = np.array([i.input for i in inst])
            Y = np.array([i.label for i in inst])
    X = np.asarray(X)
    if len(X) == 0:
        raise ValueError("no instances")
    dtype = model.dtype if hasattr(model, "dtype") else np.float64
    P = np.concatenate([model.forward(X[s:s + 4096].astype(dtype)) for s in range(0, len(X), 4096)])
    return X, np.asarray(Y), P


def _by_length(X, hits) -> dict:
    lengths = history_length(X[:, :372])
    return {int(k): float(hits[lengths == k].mean()) for k in np.unique(lengths)}


def enn_accuracy(model, X, Y=None) -> AccuracyReport:
    """Top-13 overlap with partner's true hand, divided by 13.

    Ties among probabilities go to the lower card index.  Per card,
    ``accuracy`` is the hit rate when the card is predicted and ``recall``
    the hit rate when partner holds it; undefined entries are left out.
    """
    X, Y, P = _as_arrays(model, X, Y)
    pred = top_k_mask(P, 13).astype(bool)
    Y = Y.astype(bool)
    hits = (pred & Y).sum(axis=1) / 13.0
    acc, rec = {}, {}
    for c in range(52):
        if pred[:, c].any():
            acc[c] = float((pred[:, c] & Y[:, c]).sum() / pred[:, c].sum())
        if Y[:, c].any():
            rec[c] = float((pred[:, c] & Y[:, c]).sum() / Y[:, c].sum())
    return AccuracyReport(float(hits.mean()), _by_length(X, hits), acc, rec, len(X))


def pnn_accuracy(model, X, labels=None) -> AccuracyReport:
    """Top-1 agreement with the recorded call, overall, by length and per call."""
    X, y, P = _as_arrays(model, X, labels)
    pred = P.argmax(axis=1)
    hits = (pred == y).astype(float)
    acc, rec = {}, {}
    for b in range(38):
        if (pred == b).any():
            acc[b] = float(hits[pred == b].mean())
        if (y == b).any():
            rec[b] = float(hits[y == b].mean())
    return AccuracyReport(float(hits.mean()), _by_length(X, hits), acc, rec, len(X))


# -- double dummy studies ----------------------------------------------------------

@dataclass
class GapHistogram:
    counts: np.ndarray  # index g + 13 counts gap g
    skipped: int = 0

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def share(self, lo: int, hi: int) -> float:
        if self.total == 0:
            return float("nan")
        return float(self.counts[lo + 13:hi + 14].sum() / self.total)

    def to_text(self) -> str:
        rows = [f"{g:+3d} {int(c):8d}" for g, c in zip(range(-13, 14), self.counts)]
        return "\n".join(rows) + f"\nzero {self.share(0, 0):.4f}\nwithin1 {self.share(-1, 1):.4f}\n"


def dda_gap_histogram(records, solver=None) -> GapHistogram:
    """Double dummy tricks minus recorded tricks for the final contract."""
    if solver is None:
        from .dda import default_solver
        solver = default_solver()
    counts = np.zeros(27, dtype=np.int64)
    skipped = 0
    for r in records:
        c = r.contract
        if c.passed_out or r.declarer_tricks is None:
            skipped += 1
            continue
        gap = solver.solve(r.deal, c.declarer, c.strain) - r.declarer_tricks
        counts[gap + 13] += 1
    return GapHistogram(counts, skipped)


@dataclass
class StdStudyReport:
    vary: str
    stds: np.ndarray  # sorted, one per (deck, declarer, strain)
    per_deck: np.ndarray = field(repr=False, default=None)  # (decks, 4, 5)

    def quantile(self, q: float) -> float:
        return float(np.quantile(self.stds, q))

    def to_text(self) -> str:
        qs = " ".join(f"q{int(q * 100)}={self.quantile(q):.3f}" for q in (0.1, 0.25, 0.5, 0.75, 0.9))
        return f"vary {self.vary} n={len(self.stds)} {qs}\n"


def study_deck(rng: Rng, k: int) -> np.ndarray:
    """The ``k``-th fixed deck: a permutation whose quarters are N, E, S, W."""
    return rng.generator(k).permutation(52)


def importance_std_study(n_decks: int, n_samples: int, vary: str = "partner", rng: Rng | int = 0,
                         solver=None, progress=None, decks: Optional[Sequence[int]] = None
                         ) -> StdStudyReport:
    """Spread of double dummy results when one of North's neighbours is redealt.

    ``vary="partner"`` keeps North and East and redeals South (West gets
    the rest); ``vary="opponent"`` keeps North and South and redeals East.
    Decks come from one stream shared by both variants; ``decks`` picks
    deck indices other than ``range(n_decks)``.
    """
    if n_decks <= 0 or n_samples <= 0:
        raise ValueError("sizes must be positive")
    if vary not in ("partner", "opponent"):
        raise ValueError(f"unknown variant {vary!r}")
    if isinstance(rng, int):
        rng = Rng(rng, STREAM_STUDY)
    if solver is None:
        from .dda import default_solver
        solver = default_solver()
    moving = Seat.S if vary == "partner" else Seat.E
    fixed_other = Seat.E if vary == "partner" else Seat.S
    decks = list(range(n_decks)) if decks is None else list(decks)
    per_deck = np.zeros((len(decks), 4, 5))
    for row, k in enumerate(decks):
        perm = study_deck(rng, k)
        hands = [perm[13 * i:13 * i + 13] for i in range(4)]
        north = hand_from_cards(hands[Seat.N])
        other = hand_from_cards(hands[fixed_other])
        pool = np.concatenate([hands[moving], hands[Seat.W]])
        gen = Rng(rng.seed, STREAM_STUDY).generator(k, 1 + (vary == "opponent"))
        tables = []
        for j in range(n_samples):
            p = gen.permutation(pool)
            h = [0, 0, 0, 0]
            h[Seat.N] = north
            h[fixed_other] = other
            h[moving] = hand_from_cards(p[:13])
            h[Seat.W] = hand_from_cards(p[13:])
            deal = Deal(k, Seat.N, Vulnerability.NONE, tuple(h))
            tables.append(solver.ddt(deal).tricks)
            if progress:
                progress(k, j)
        per_deck[row] = np.std(np.array(tables, dtype=np.float64), axis=0)
    return StdStudyReport(vary, np.sort(per_deck.reshape(-1)), per_deck)
