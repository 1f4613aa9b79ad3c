"""Supervised pre-training and self-play policy-gradient training.

A bidding system is a pair of networks shared by both players of a
partnership: the estimator guesses partner's cards from the caller's view
and the policy maps that view plus the estimate to a distribution over the
38 calls.  Illegal calls are masked out and the rest renormalized.
"""
from __future__ import annotations

import hashlib
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .auction import N_BIDS, AuctionState, Contract
from .core import STREAM_BIDS, STREAM_EVAL, STREAM_POOL, STREAM_TRAIN, Deal, Rng, Seat, generate_deal, hand_to_bits
from .data import SplitSpec, dataset_arrays, pnn_inputs, split
from .encoding import ENN_INPUT_DIM, PNN_INPUT_DIM, build_enn_input
from .nn import (SIGMOID_52, SOFTMAX_38, MlpArchitecture, MlpModel, NetworkEstimator,
                 OptimizerState, apply_update)
from .scoring import score_contract

log = logging.getLogger(__name__)

NS, EW = 0, 1


@dataclass
class BiddingSystem:
    enn: MlpModel
    pnn: MlpModel

    def __post_init__(self):
        if self.enn.arch.output != SIGMOID_52 or self.enn.arch.input_dim != ENN_INPUT_DIM:
            raise ValueError("estimator must map 372 inputs to 52 sigmoids")
        if self.pnn.arch.output != SOFTMAX_38 or self.pnn.arch.input_dim != PNN_INPUT_DIM:
            raise ValueError("policy must map 424 inputs to a 38-way softmax")

    def copy(self) -> "BiddingSystem":
        return BiddingSystem(self.enn.copy(), self.pnn.copy())

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(self.enn.to_bytes())
        h.update(self.pnn.to_bytes())
        return h.hexdigest()[:16]

    def save(self, directory, config_hash: str = ""):
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        self.enn.save(d / "enn.bin")
        self.pnn.save(d / "pnn.bin")
        (d / "manifest.txt").write_text(
            f"enn enn.bin\npnn pnn.bin\nconfig_hash {config_hash}\nfingerprint {self.fingerprint()}\n")

    @classmethod
    def load(cls, directory) -> "BiddingSystem":
        d = Path(directory)
        return cls(MlpModel.load(d / "enn.bin"), MlpModel.load(d / "pnn.bin"))

    @classmethod
    def init(cls, rng: np.random.Generator, enn_layers=4, enn_width=256, pnn_layers=4,
             pnn_width=256, skip_every=2, dtype=np.float32) -> "BiddingSystem":
        enn = MlpModel.init(MlpArchitecture(ENN_INPUT_DIM, enn_layers, enn_width, skip_every,
                                            SIGMOID_52), rng, dtype)
        pnn = MlpModel.init(MlpArchitecture(PNN_INPUT_DIM, pnn_layers, pnn_width, skip_every,
                                            SOFTMAX_38), rng, dtype)
        return cls(enn, pnn)

    def decide(self, deal: Deal, state: AuctionState):
        """Inputs and masked call distribution for the player to act."""
        x = build_enn_input(deal, state.to_act, state)
        est = self.enn.forward(x.astype(self.enn.dtype))
        s = np.concatenate([x.astype(self.pnn.dtype), est.astype(self.pnn.dtype)])
        p = self.pnn.forward(s).astype(np.float64)
        mask = np.array([state.legal_mask >> b & 1 for b in range(N_BIDS)], dtype=bool)
        q = np.where(mask, p, 0.0)
        total = q.sum()
        if not total > 0 or not np.isfinite(total):
            log.warning("no probability on legal calls; using uniform")
            q = mask / mask.sum()
        else:
            q = q / total
        return x, s, q, mask


def masked_policy(system: BiddingSystem, deal: Deal, state: AuctionState) -> np.ndarray:
    return system.decide(deal, state)[2]


def sample_bid(system: BiddingSystem, deal: Deal, seat: Seat, state: AuctionState,
               rng: np.random.Generator, mode: str = "sample") -> int:
    """Call for ``seat`` drawn from (or the mode of) the masked policy."""
    if state.is_terminal():
        raise ValueError("auction is over")
    if Seat(seat) != state.to_act:
        raise ValueError(f"{Seat(seat).name} is not to act")
    q = system.decide(deal, state)[2]
    return _pick(q, rng, mode)


def _pick(q: np.ndarray, rng, mode: str) -> int:
    if mode == "argmax":
        return int(np.argmax(q))
    if mode != "sample":
        raise ValueError(f"unknown mode {mode!r}")
    c = np.cumsum(q)
    i = int(np.searchsorted(c, rng.random() * c[-1], side="right"))
    i = min(i, len(q) - 1)
    while q[i] == 0:
        i -= 1
    return i


# -- episodes ------------------------------------------------------------------

class TrickOracle:
    """Double dummy tricks per (deal, declarer, strain), memoized.

    With ``path`` the memo is also kept in an append-only text file of
    ``<deal-hash> <declarer> <strain> <tricks>`` lines.
    """

    def __init__(self, solver=None, path=None):
        if solver is None:
            from .dda import default_solver
            solver = default_solver()
        self.solver = solver
        self.cache: dict = {}
        self.path = Path(path) if path else None
        self._disk: dict = {}
        if self.path and self.path.exists():
            for line in self.path.read_text().splitlines():
                parts = line.split()
                if len(parts) == 4:
                    self._disk[(parts[0], int(parts[1]), int(parts[2]))] = int(parts[3])

    def __call__(self, deal: Deal, declarer: Seat, strain: int) -> int:
        key = (deal.hands, int(declarer), int(strain))
        if key not in self.cache:
            if self.path is None:
                self.cache[key] = self.solver.solve(deal, declarer, strain)
            else:
                from .dda import DDTCache
                dkey = (DDTCache.key(deal), int(declarer), int(strain))
                if dkey not in self._disk:
                    self._disk[dkey] = self.solver.solve(deal, declarer, strain)
                    with self.path.open("a") as fh:
                        fh.write(f"{dkey[0]} {dkey[1]} {dkey[2]} {self._disk[dkey]}\n")
                self.cache[key] = self._disk[dkey]
        return self.cache[key]


def table_score(deal: Deal, contract: Contract, tricks_fn) -> int:
    """North-South duplicate score of ``contract`` played double dummy."""
    if contract.passed_out:
        return 0
    tricks = tricks_fn(deal, contract.declarer, contract.strain)
    return score_contract(contract, tricks, deal.vul).ns_points


@dataclass
class EpisodeTrace:
    pnn_inputs: list = field(default_factory=list)
    bids: list = field(default_factory=list)
    masks: list = field(default_factory=list)
    enn_inputs: list = field(default_factory=list)
    partner_hands: list = field(default_factory=list)
    reward: float = 0.0
    contract: Contract = Contract()
    auction: tuple = ()

    @property
    def M(self) -> int:
        return len(self.bids)


def bid_table(ns: BiddingSystem, ew: BiddingSystem, deal: Deal, rng, mode: str = "sample",
              record_side: Optional[int] = None, trace: Optional[EpisodeTrace] = None):
    """Run one auction; optionally record the decisions of one side."""
    state = AuctionState.start(deal.dealer)
    while not state.is_terminal():
        seat = state.to_act
        system = ns if seat % 2 == 0 else ew
        x, s, q, mask = system.decide(deal, state)
        b = _pick(q, rng, mode)
        if trace is not None and seat % 2 == record_side:
            trace.pnn_inputs.append(s)
            trace.bids.append(b)
            trace.masks.append(mask)
            trace.enn_inputs.append(x)
            trace.partner_hands.append(hand_to_bits(deal.hands[(seat + 2) % 4]))
        state = state.apply(b)
    return state


def play_episode(target: BiddingSystem, opponent: BiddingSystem, deal: Deal, target_side: int,
                 rng, tricks_fn=None, mode: str = "sample") -> EpisodeTrace:
    """Bid one table and score it double dummy from the target side's view."""
    if tricks_fn is None:
        tricks_fn = TrickOracle()
    trace = EpisodeTrace()
    ns, ew = (target, opponent) if target_side == NS else (opponent, target)
    state = bid_table(ns, ew, deal, rng, mode, record_side=target_side, trace=trace)
    trace.contract = state.final_contract()
    trace.auction = state.bids
    score = table_score(deal, trace.contract, tricks_fn)
    trace.reward = float(score if target_side == NS else -score)
    return trace


# -- the policy-gradient step ------------------------------------------------------

def policy_direction(pnn: MlpModel, traces: Sequence[EpisodeTrace], reward_scale: float):
    """(1/B) sum_t r_t (1/M_t) sum_i grad log pi(b_i | s_i), masked policy."""
    rows, labels, masks, weights = [], [], [], []
    B = len(traces)
    for t in traces:
        r = t.reward * reward_scale
        if t.M == 0 or r == 0:
            continue
        rows += t.pnn_inputs
        labels += t.bids
        masks += t.masks
        weights += [-r / (t.M * B)] * t.M
    if not rows:
        return None
    _, grad = pnn.loss_and_grad(np.array(rows, dtype=pnn.dtype), np.array(labels),
                                mask=np.array(masks), weights=np.array(weights))
    # the loss is -log pi, so the weighted loss gradient is already the ascent direction
    return grad


def reinforce_update(system: BiddingSystem, traces: Sequence[EpisodeTrace], pnn_opt: OptimizerState,
                     enn_opt: Optional[OptimizerState] = None, reward_scale: float = 1e-3) -> bool:
    """One ascent step for the policy and one descent step for the estimator."""
    if not traces:
        raise ValueError("empty batch")
    direction = policy_direction(system.pnn, traces, reward_scale)
    ok = True
    if direction is not None:
        if not all(np.all(np.isfinite(g)) for g in direction):
            log.warning("non-finite policy gradient; batch skipped")
            return False
        ok = apply_update(system.pnn, pnn_opt, direction, 1.0)
    if enn_opt is not None:
        X = np.array([x for t in traces for x in t.enn_inputs], dtype=system.enn.dtype)
        Y = np.array([y for t in traces for y in t.partner_hands], dtype=system.enn.dtype)
        if len(X):
            _, g = system.enn.loss_and_grad(X, Y)
            ok = apply_update(system.enn, enn_opt, g, -1.0 / len(X)) and ok
    return ok


# -- training loops ----------------------------------------------------------------

@dataclass
class SLConfig:
    enn_layers: int = 4
    enn_width: int = 256
    pnn_layers: int = 4
    pnn_width: int = 256
    skip_every: int = 2
    optimizer: str = "adam"
    learning_rate: float = 1e-4
    batch_size: int = 256
    max_epochs: int = 20
    patience: int = 3
    seed: int = 0


def train_sl(records, config: SLConfig = SLConfig(), spec: SplitSpec = SplitSpec()):
    """Fit the estimator, then the policy on features from the fitted estimator.

    Returns the system and a dict of held-out metrics.
    """
    from .eval import enn_accuracy, pnn_accuracy

    if not records:
        raise ValueError("no records")
    train, val, test = split(records, spec, Rng(config.seed).with_stream(3))
    if not train or not test:
        raise ValueError("a split partition is empty")
    t0 = time.perf_counter()
    Xe, Ye, yl = dataset_arrays(train)
    Xv, Yv, ylv = dataset_arrays(val)
    Xt, Yt, ylt = dataset_arrays(test)
    common = dict(skip_every=config.skip_every, optimizer=config.optimizer,
                  learning_rate=config.learning_rate, batch_size=config.batch_size,
                  max_epochs=config.max_epochs, patience=config.patience)
    enn = NetworkEstimator(head=SIGMOID_52, hidden_layers=config.enn_layers,
                           hidden_width=config.enn_width, random_state=config.seed, **common)
    enn.fit(Xe.astype(np.float32), Ye, Xv.astype(np.float32) if len(Xv) else None, Yv)
    pnn = NetworkEstimator(head=SOFTMAX_38, hidden_layers=config.pnn_layers,
                           hidden_width=config.pnn_width, random_state=config.seed + 1, **common)
    P, Pv, Pt = (pnn_inputs(X, enn) for X in (Xe, Xv, Xt))
    pnn.fit(P, yl, Pv if len(Pv) else None, ylv)
    system = BiddingSystem(enn.model_, pnn.model_)
    metrics = {
        "enn": enn_accuracy(enn.model_, Xt, Yt),
        "pnn": pnn_accuracy(pnn.model_, Pt, ylt),
        "enn_history": enn.history_,
        "pnn_history": pnn.history_,
        "n_games": (len(train), len(val), len(test)),
        "seconds": time.perf_counter() - t0,
    }
    return system, metrics


@dataclass
class RLConfig:
    batch: int = 100
    pool_period: int = 100
    total_batches: int = 1000
    optimizer: str = "adam"
    learning_rate: float = 1e-5
    enn_learning_rate: Optional[float] = None
    reward_scale: float = 1e-3
    eval_every: int = 0
    eval_deals: int = 100
    seed: int = 0


def train_rl(initial: BiddingSystem, config: RLConfig = RLConfig(), tricks_fn=None,
             curve_path=None, progress: Optional[Callable[[int, BiddingSystem], None]] = None):
    """Self-play against a growing pool of frozen earlier versions.

    Each batch draws an opponent from the pool, bids every deal twice (the
    target at North-South, then at East-West), takes one policy step from
    the sampled calls and one estimator step on the true partner hands.
    Every ``pool_period`` batches the current system joins the pool.
    Returns the trained system, the pool and the training curve.
    """
    from .eval import duplicate_match

    if tricks_fn is None:
        tricks_fn = TrickOracle()
    rng = Rng(config.seed)
    target = initial.copy()
    pool = [initial.copy()]
    pnn_opt = OptimizerState.for_model(target.pnn, config.optimizer, config.learning_rate)
    enn_lr = config.learning_rate if config.enn_learning_rate is None else config.enn_learning_rate
    enn_opt = OptimizerState.for_model(target.enn, config.optimizer, enn_lr)
    pick = rng.with_stream(STREAM_POOL)
    deals = rng.with_stream(STREAM_TRAIN)
    bids = rng.with_stream(STREAM_BIDS)
    eval_deals = [generate_deal(rng.with_stream(STREAM_EVAL), i) for i in range(config.eval_deals)] \
        if config.eval_every else []
    curve = []
    fh = open(curve_path, "a") if curve_path else None
    try:
        for k in range(config.total_batches):
            opponent = pool[int(pick.generator(k).integers(len(pool)))]
            traces = []
            for j in range(config.batch):
                deal = generate_deal(deals, k * config.batch + j)
                for side in (NS, EW):
                    traces.append(play_episode(target, opponent, deal, side,
                                               bids.generator(k, j, side), tricks_fn))
            reinforce_update(target, traces, pnn_opt, enn_opt, config.reward_scale)
            if (k + 1) % config.pool_period == 0:
                pool.append(target.copy())
            if config.eval_every and (k + 1) % config.eval_every == 0:
                rep = duplicate_match(target, initial, eval_deals, "argmax", tricks_fn=tricks_fn)
                curve.append((k + 1, rep.avg_imp, rep.n_deals))
                if fh:
                    fh.write(f"{k + 1} {rep.avg_imp:.6f} {rep.n_deals}\n")
                    fh.flush()
            if progress:
                progress(k + 1, target)
    finally:
        if fh:
            fh.close()
    return target, pool, curve
