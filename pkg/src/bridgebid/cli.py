"""Command-line entry point: ``bridgebid <subcommand> [options]``.

Exit status is 0 on success, 1 on usage errors (bad flags, unknown config
keys) and 2 on data errors (unreadable or invalid input files).
"""
from __future__ import annotations

import argparse
import logging
import multiprocessing
import os
import sys
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import __version__

log = logging.getLogger("bridgebid")

USAGE_ERROR = 1
DATA_ERROR = 2


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


# -- configuration -----------------------------------------------------------------

# key: (default, type, description)
CONFIG_KEYS: dict[str, tuple] = {
    "seed": (0, int, "master seed for every random stream"),
    "n_deals": (100, int, "deals for deal-gen and teacher-gen"),
    "dealer": ("random", str, "dealer policy: random, rotate or a seat letter"),
    "vul": ("random", str, "vulnerability policy: random, none, ns, ew or both"),
    "tt_bits": (22, int, "log2 of the double dummy transposition table size"),
    "enn_layers": (4, int, "estimator hidden layers"),
    "enn_width": (256, int, "estimator hidden width"),
    "pnn_layers": (4, int, "policy hidden layers"),
    "pnn_width": (256, int, "policy hidden width"),
    "skip_every": (2, int, "skip connection period in hidden layers"),
    "optimizer": ("adam", str, "sgd or adam"),
    "sl_learning_rate": (1e-4, float, "supervised step size"),
    "sl_batch_size": (256, int, "supervised mini-batch size"),
    "sl_max_epochs": (20, int, "supervised epoch cap"),
    "sl_patience": (3, int, "epochs without validation gain before stopping"),
    "split_train": (0.7, float, "share of games used for training"),
    "split_val": (0.1, float, "share of games used for validation"),
    "split_test": (0.2, float, "share of games held out for testing"),
    "rl_batch": (100, int, "deals per self-play mini-batch"),
    "rl_batches": (1000, int, "self-play mini-batches"),
    "pool_period": (100, int, "mini-batches between pool snapshots"),
    "rl_learning_rate": (1e-5, float, "policy step size in self-play"),
    "reward_scale": (1e-3, float, "multiplier turning duplicate points into rewards"),
    "eval_every": (0, int, "mini-batches between curve points (0 = no curve)"),
    "eval_deals": (100, int, "deals per curve point"),
    "match_deals": (1000, int, "deals in eval-match"),
    "match_mode": ("argmax", str, "argmax or sample"),
    "study_decks": (50, int, "fixed decks in analyze-importance"),
    "study_samples": (200, int, "redeals per deck in analyze-importance"),
}


def parse_config_text(text: str) -> dict:
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise UsageError(f"config line {n}: expected key=value")
        if key not in CONFIG_KEYS:
            raise UsageError(f"config line {n}: unknown key {key!r}")
        kind = CONFIG_KEYS[key][1]
        try:
            out[key] = kind(value)
        except ValueError:
            raise UsageError(f"config line {n}: bad value {value!r} for {key}") from None
    return out


def effective_config(path: Optional[str], overrides: dict) -> dict:
    cfg = {k: v[0] for k, v in CONFIG_KEYS.items()}
    if path:
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise DataError(f"cannot read config: {e}") from None
        cfg.update(parse_config_text(text))
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    return cfg


def format_config(cfg: dict) -> str:
    return "".join(f"{k}={cfg[k]}\n" for k in CONFIG_KEYS)


def config_template() -> str:
    return "".join(f"# {doc}\n{k}={default}\n" for k, (default, _, doc) in CONFIG_KEYS.items())


# -- helpers -----------------------------------------------------------------------

def _out_dir(args, cfg) -> Optional[Path]:
    if not args.out:
        return None
    d = Path(args.out)
    d.mkdir(parents=True, exist_ok=True)
    (d / "config.txt").write_text(format_config(cfg))
    (d / "VERSION").write_text(f"bridgebid {__version__}\n")
    return d


def _emit(args, cfg, text: str, name: str):
    sys.stdout.write(text)
    d = _out_dir(args, cfg)
    if d is not None:
        (d / name).write_text(text)


def _read_deals(path):
    from .core import read_deals
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as e:
        raise DataError(f"cannot read {path}: {e}") from None
    try:
        deals = read_deals(lines)
    except ValueError as e:
        raise DataError(f"{path}: {e}") from None
    if not deals:
        raise DataError(f"{path}: no deals")
    return deals


def _read_records(path):
    from .data import parse_records
    try:
        with open(path) as fh:
            records = parse_records(fh)
    except OSError as e:
        raise DataError(f"cannot read {path}: {e}") from None
    if records.skipped:
        log.warning("skipped records: %s", dict(records.skipped))
    if not records:
        raise DataError(f"{path}: no usable records")
    return records


def _load_system(path):
    from .training import BiddingSystem
    try:
        return BiddingSystem.load(path)
    except (OSError, ValueError) as e:
        raise DataError(f"cannot load system {path}: {e}") from None


def _seat(text):
    from .core import Seat
    try:
        return Seat[text.upper()]
    except KeyError:
        raise UsageError(f"bad seat {text!r}") from None


def _strain(text):
    from .auction import STRAIN_NAMES
    t = text.upper().replace("NT", "N")
    if len(t) != 1 or t not in STRAIN_NAMES:
        raise UsageError(f"bad strain {text!r}")
    return STRAIN_NAMES.index(t)


_WORKER_BITS = None


def _worker_init(bits):
    global _WORKER_BITS
    _WORKER_BITS = bits


def _ddt_job(deal):
    return _solver(_WORKER_BITS).ddt(deal).tricks


def _solve_job(job):
    deal, declarer, strain = job
    return _solver(_WORKER_BITS).solve(deal, declarer, strain)


_SOLVERS: dict = {}


def _solver(bits):
    from .dda import DoubleDummySolver
    if bits not in _SOLVERS:
        _SOLVERS[bits] = DoubleDummySolver(bits)
    return _SOLVERS[bits]


def parallel_map(fn: Callable, items: Sequence, threads: int, tt_bits: int) -> list:
    """Order-preserving map over worker processes (in-process for one thread)."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        _worker_init(tt_bits)
        return [fn(x) for x in items]
    ctx = multiprocessing.get_context("fork")
    with ctx.Pool(min(threads, len(items)), initializer=_worker_init, initargs=(tt_bits,)) as pool:
        return pool.map(fn, items, chunksize=1)


# -- subcommands -------------------------------------------------------------------

def cmd_deal_gen(args, cfg):
    from .core import Rng, generate_deal
    dealer = cfg["dealer"]
    if dealer not in ("random", "rotate"):
        dealer = _seat(dealer)
    n = args.n if args.n is not None else cfg["n_deals"]
    if n <= 0:
        raise UsageError("--n must be positive")
    rng = Rng(cfg["seed"])
    try:
        deals = [generate_deal(rng, i, dealer, cfg["vul"]) for i in range(n)]
    except ValueError as e:
        raise UsageError(str(e)) from None
    _emit(args, cfg, "".join(d.to_text() + "\n" for d in deals), "deals.txt")


def cmd_score(args, cfg):
    from .auction import Contract
    from .core import Vulnerability
    from .scoring import declarer_score
    try:
        contract = Contract.parse(args.contract, _seat(args.declarer))
        vul = Vulnerability(args.vul.lower())
    except ValueError as e:
        raise UsageError(str(e)) from None
    if not 0 <= args.tricks <= 13:
        raise UsageError("--tricks must be in 0..13")
    score = declarer_score(contract.level, contract.strain, contract.doubling, args.tricks,
                           vul.is_vulnerable(contract.declarer))
    _emit(args, cfg, f"{score}\n", "score.txt")


def cmd_imp(args, cfg):
    from .scoring import imp
    _emit(args, cfg, f"{imp(args.diff)}\n", "imp.txt")


def cmd_dda(args, cfg):
    deals = _read_deals(args.deal_file)
    declarer, strain = _seat(args.declarer), _strain(args.strain)
    tricks = parallel_map(_solve_job, [(d, declarer, strain) for d in deals], args.threads,
                          cfg["tt_bits"])
    _emit(args, cfg, "".join(f"{d.id} {t}\n" for d, t in zip(deals, tricks)), "tricks.txt")


def cmd_ddt(args, cfg):
    from .dda import DoubleDummyTable
    deals = _read_deals(args.deal_file)
    tables = parallel_map(_ddt_job, deals, args.threads, cfg["tt_bits"])
    text = "".join(f"DEAL {d.id}\n{DoubleDummyTable(t).to_text()}\n" for d, t in zip(deals, tables))
    _emit(args, cfg, text, "ddt.txt")


def cmd_teacher_gen(args, cfg):
    from .auction import AuctionState
    from .core import Rng, generate_deal
    from .data import GameRecord, format_records
    from .teacher import teacher_auction
    n = args.n if args.n is not None else cfg["n_deals"]
    if n <= 0:
        raise UsageError("--n must be positive")
    rng = Rng(cfg["seed"])
    games = []
    for i in range(n):
        deal = generate_deal(rng, i)
        games.append((deal, teacher_auction(deal)))
    tricks = [None] * n
    if args.tricks:
        jobs, where = [], []
        for i, (deal, bids) in enumerate(games):
            c = AuctionState.from_bids(deal.dealer, bids).final_contract()
            if not c.passed_out:
                jobs.append((deal, c.declarer, c.strain))
                where.append(i)
        for i, t in zip(where, parallel_map(_solve_job, jobs, args.threads, cfg["tt_bits"])):
            tricks[i] = t
    records = [GameRecord(d, tuple(b), t) for (d, b), t in zip(games, tricks)]
    _emit(args, cfg, format_records(records), "games.txt")


def _sl_config(cfg):
    from .training import SLConfig
    return SLConfig(enn_layers=cfg["enn_layers"], enn_width=cfg["enn_width"],
                    pnn_layers=cfg["pnn_layers"], pnn_width=cfg["pnn_width"],
                    skip_every=cfg["skip_every"], optimizer=cfg["optimizer"],
                    learning_rate=cfg["sl_learning_rate"], batch_size=cfg["sl_batch_size"],
                    max_epochs=cfg["sl_max_epochs"], patience=cfg["sl_patience"], seed=cfg["seed"])


def cmd_train_sl(args, cfg):
    from .data import SplitSpec
    from .training import train_sl
    records = _read_records(args.records)
    try:
        spec = SplitSpec(cfg["split_train"], cfg["split_val"], cfg["split_test"])
        system, metrics = train_sl(records, _sl_config(cfg), spec)
    except ValueError as e:
        raise DataError(str(e)) from None
    text = (f"games {metrics['n_games']}\nseconds {metrics['seconds']:.1f}\n"
            f"enn_top13 {metrics['enn'].overall:.4f}\npnn_top1 {metrics['pnn'].overall:.4f}\n")
    d = _out_dir(args, cfg)
    sys.stdout.write(text)
    if d is not None:
        system.save(d / "system", _config_hash(cfg))
        (d / "metrics.txt").write_text(text)
        (d / "enn_by_length.txt").write_text(metrics["enn"].to_text())
        (d / "pnn_by_length.txt").write_text(metrics["pnn"].to_text())


def _config_hash(cfg) -> str:
    import hashlib
    return hashlib.sha256(format_config(cfg).encode()).hexdigest()[:16]


def cmd_train_rl(args, cfg):
    from .training import RLConfig, TrickOracle, train_rl
    initial = _load_system(args.system)
    config = RLConfig(batch=cfg["rl_batch"], pool_period=cfg["pool_period"],
                      total_batches=cfg["rl_batches"], optimizer=cfg["optimizer"],
                      learning_rate=cfg["rl_learning_rate"], reward_scale=cfg["reward_scale"],
                      eval_every=cfg["eval_every"], eval_deals=cfg["eval_deals"], seed=cfg["seed"])
    oracle = TrickOracle(_solver(cfg["tt_bits"]), args.tricks_cache)
    d = _out_dir(args, cfg)
    curve_path = d / "curve.txt" if d is not None else None
    if curve_path is not None and curve_path.exists():
        curve_path.unlink()

    def progress(k, _):
        log.info("batch %d/%d", k, config.total_batches)

    target, pool, curve = train_rl(initial, config, oracle, curve_path, progress)
    sys.stdout.write(f"fingerprint {target.fingerprint()}\npool {len(pool)}\n")
    sys.stdout.write("".join(f"{k} {v:.6f} {n}\n" for k, v, n in curve))
    if d is not None:
        target.save(d / "system", _config_hash(cfg))


def cmd_eval_match(args, cfg):
    from .core import STREAM_EVAL, Rng, generate_deal
    from .eval import duplicate_match
    from .training import TrickOracle
    a, b = _load_system(args.a), _load_system(args.b)
    if args.deal_file:
        deals = _read_deals(args.deal_file)
    else:
        n = cfg["match_deals"]
        if n <= 0:
            raise UsageError("match_deals must be positive")
        deals = [generate_deal(Rng(cfg["seed"], STREAM_EVAL), i) for i in range(n)]
    if cfg["match_mode"] not in ("argmax", "sample"):
        raise UsageError(f"bad match_mode {cfg['match_mode']!r}")
    oracle = TrickOracle(_solver(cfg["tt_bits"]), args.tricks_cache)
    rep = duplicate_match(a, b, deals, cfg["match_mode"], Rng(cfg["seed"], STREAM_EVAL), oracle)
    _emit(args, cfg, rep.to_text(), "match.txt")
    d = _out_dir(args, cfg)
    if d is not None:
        (d / "imps.csv").write_text(rep.to_csv())


def cmd_eval_acc(args, cfg):
    from .data import dataset_arrays, pnn_inputs
    from .eval import enn_accuracy, pnn_accuracy
    system = _load_system(args.system)
    X, Y, labels = dataset_arrays(_read_records(args.records))
    enn = enn_accuracy(system.enn, X, Y)
    pnn = pnn_accuracy(system.pnn, pnn_inputs(X, system.enn, system.pnn.dtype), labels)
    text = f"enn_top13 {enn.overall:.4f} n={enn.n}\npnn_top1 {pnn.overall:.4f} n={pnn.n}\n"
    _emit(args, cfg, text, "accuracy.txt")
    d = _out_dir(args, cfg)
    if d is not None:
        (d / "enn_by_length.txt").write_text(enn.to_text())
        (d / "pnn_by_length.txt").write_text(pnn.to_text())


def cmd_analyze_gap(args, cfg):
    from .eval import GapHistogram
    records = _read_records(args.records)
    jobs, counts, skipped = [], np.zeros(27, dtype=np.int64), 0
    for r in records:
        c = r.contract
        if c.passed_out or r.declarer_tricks is None:
            skipped += 1
        else:
            jobs.append((r.deal, c.declarer, c.strain))
    wanted = [r.declarer_tricks for r in records if not r.contract.passed_out and r.declarer_tricks is not None]
    for t, got in zip(parallel_map(_solve_job, jobs, args.threads, cfg["tt_bits"]), wanted):
        counts[t - got + 13] += 1
    _emit(args, cfg, GapHistogram(counts, skipped).to_text(), "gap.txt")


def _study_job(job):
    from .core import STREAM_STUDY, Rng
    from .eval import importance_std_study
    seed, k, samples, vary = job
    return importance_std_study(1, samples, vary, Rng(seed, STREAM_STUDY), _solver(_WORKER_BITS),
                                decks=[k]).per_deck[0]


def cmd_analyze_importance(args, cfg):
    from .eval import StdStudyReport
    n, m = cfg["study_decks"], cfg["study_samples"]
    if n <= 0 or m <= 0:
        raise UsageError("study sizes must be positive")
    text = ""
    for vary in ("partner", "opponent"):
        per = parallel_map(_study_job, [(cfg["seed"], k, m, vary) for k in range(n)],
                           args.threads, cfg["tt_bits"])
        per = np.array(per)
        text += StdStudyReport(vary, np.sort(per.reshape(-1)), per).to_text()
    _emit(args, cfg, text, "importance.txt")


def cmd_predict(args, cfg):
    from .auction import N_BIDS, AuctionState, IllegalBidError, bid_str, parse_auction
    system = _load_system(args.system)
    deals = _read_deals(args.deal_file)
    matches = [d for d in deals if args.deal_id is None or d.id == args.deal_id]
    if not matches:
        raise DataError(f"deal {args.deal_id} not found")
    deal = matches[0]
    try:
        state = AuctionState.from_bids(deal.dealer, parse_auction(args.auction or ""))
    except IllegalBidError as e:
        raise DataError(str(e)) from None
    except ValueError as e:
        raise UsageError(str(e)) from None
    if state.is_terminal():
        raise DataError("auction is already over")
    _, s, q, mask = system.decide(deal, state)
    raw = system.pnn.forward(s)
    lines = [f"seat {state.to_act.name}\n"]
    lines += [f"{bid_str(b):>4} {float(raw[b]):.6f} {int(mask[b])} {float(q[b]):.6f}\n"
              for b in range(N_BIDS)]
    _emit(args, cfg, "".join(lines), "predict.txt")


# -- argument parsing --------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(USAGE_ERROR)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key=value config file")
    common.add_argument("--seed", type=int, help="overrides the config seed")
    common.add_argument("--out", help="output directory")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="worker processes for deal-parallel stages")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="bridgebid", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"bridgebid {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, fn, help):
        sp = sub.add_parser(name, parents=[common], help=help)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("deal-gen", cmd_deal_gen, "generate random deals")
    sp.add_argument("--n", type=int)
    sp = add("score", cmd_score, "duplicate score of a contract result")
    sp.add_argument("--contract", required=True, help="e.g. 2N, 4HX")
    sp.add_argument("--tricks", type=int, required=True)
    sp.add_argument("--vul", default="none", help="none, ns, ew or both")
    sp.add_argument("--declarer", default="N")
    sp = add("imp", cmd_imp, "IMPs for a point difference")
    sp.add_argument("--diff", type=int, required=True)
    sp = add("dda", cmd_dda, "double dummy tricks for one declarer and strain")
    sp.add_argument("--deal-file", required=True)
    sp.add_argument("--declarer", required=True)
    sp.add_argument("--strain", required=True, help="C, D, H, S or N")
    sp = add("ddt", cmd_ddt, "double dummy table per deal")
    sp.add_argument("--deal-file", required=True)
    sp = add("teacher-gen", cmd_teacher_gen, "deals bid by the rule-based teacher")
    sp.add_argument("--n", type=int)
    sp.add_argument("--tricks", action="store_true", help="add double dummy tricks")
    sp = add("train-sl", cmd_train_sl, "supervised training from game records")
    sp.add_argument("--records", required=True)
    sp = add("train-rl", cmd_train_rl, "self-play training from a saved system")
    sp.add_argument("--system", required=True)
    sp.add_argument("--tricks-cache", help="file memoizing double dummy results")
    sp = add("eval-match", cmd_eval_match, "duplicate match between two systems")
    sp.add_argument("--a", required=True)
    sp.add_argument("--b", required=True)
    sp.add_argument("--deal-file")
    sp.add_argument("--tricks-cache")
    sp = add("eval-acc", cmd_eval_acc, "network accuracy on game records")
    sp.add_argument("--system", required=True)
    sp.add_argument("--records", required=True)
    sp = add("analyze-gap", cmd_analyze_gap, "double dummy minus recorded tricks")
    sp.add_argument("--records", required=True)
    add("analyze-importance", cmd_analyze_importance, "partner vs opponent redeal spread")
    sp = add("predict", cmd_predict, "policy output for one decision")
    sp.add_argument("--system", required=True)
    sp.add_argument("--deal-file", required=True)
    sp.add_argument("--deal-id", type=int)
    sp.add_argument("--auction", default="", help='calls so far, e.g. "1S P"')
    sub.add_parser("config-template", help="print every config key with its default").set_defaults(
        fn=lambda args, cfg: sys.stdout.write(config_template()), config=None, seed=None, out=None,
        threads=1, verbose=False)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if not getattr(args, "fn", None):
        parser.print_usage(sys.stderr)
        return USAGE_ERROR
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.threads < 1:
            raise UsageError("--threads must be at least 1")
        cfg = effective_config(args.config, {"seed": args.seed})
        args.fn(args, cfg)
    except UsageError as e:
        sys.stderr.write(f"bridgebid: usage error: {e}\n")
        return USAGE_ERROR
    except DataError as e:
        sys.stderr.write(f"bridgebid: data error: {e}\n")
        return DATA_ERROR
    return 0


if __name__ == "__main__":
    sys.exit(main())
