"""Duplicate bridge scoring and conversion of score swings to IMPs."""
from __future__ import annotations

import bisect
import enum
from dataclasses import dataclass

from .auction import DOUBLED, NOTRUMP, REDOUBLED, UNDOUBLED, Contract
from .core import Seat, Vulnerability

# upper bound of each IMP band; |diff| above the last bound scores 24
IMP_BOUNDS = (10, 40, 80, 120, 160, 210, 260, 310, 360, 420, 490, 590, 740, 890,
              1090, 1290, 1490, 1740, 1990, 2240, 2490, 2990, 3490, 3990)


@dataclass(frozen=True)
class BoardResult:
    contract: Contract
    tricks: int = 0
    declarer_vulnerable: bool = False

    def __post_init__(self):
        if not 0 <= self.tricks <= 13:
            raise ValueError(f"tricks out of range: {self.tricks}")
        if self.contract.passed_out and self.tricks:
            raise ValueError("a passed-out board has no tricks")


@dataclass(frozen=True)
class DuplicateScore:
    ns_points: int
    ew_points: int

    def for_side(self, side: int) -> int:
        return self.ns_points if side == 0 else self.ew_points


def trick_points(level: int, strain: int, doubling: int = UNDOUBLED) -> int:
    if strain == NOTRUMP:
        base = 40 + 30 * (level - 1)
    elif strain >= 2:
        base = 30 * level
    else:
        base = 20 * level
    return base * (1, 2, 4)[doubling]


def _undertrick_penalty(down: int, vulnerable: bool, doubling: int) -> int:
    if doubling == UNDOUBLED:
        return down * (100 if vulnerable else 50)
    if vulnerable:
        pen = 200 + 300 * (down - 1)
    else:
        pen = 0
        for i in range(1, down + 1):
            pen += 100 if i == 1 else 200 if i <= 3 else 300
    return pen if doubling == DOUBLED else 2 * pen


def declarer_score(level: int, strain: int, doubling: int, tricks: int, vulnerable: bool) -> int:
    """Signed score for the declaring side."""
    need = level + 6
    if tricks < need:
        return -_undertrick_penalty(need - tricks, vulnerable, doubling)
    points = trick_points(level, strain, doubling)
    score = points
    if points >= 100:
        score += 500 if vulnerable else 300
    else:
        score += 50
    if level == 6:
        score += 750 if vulnerable else 500
    elif level == 7:
        score += 1500 if vulnerable else 1000
    score += (0, 50, 100)[doubling]
    over = tricks - need
    if doubling == UNDOUBLED:
        score += over * (20 if strain < 2 else 30)
    elif doubling == DOUBLED:
        score += over * (200 if vulnerable else 100)
    else:
        score += over * (400 if vulnerable else 200)
    return score


def duplicate_score(result: BoardResult) -> DuplicateScore:
    c = result.contract
    if c.passed_out:
        return DuplicateScore(0, 0)
    s = declarer_score(c.level, c.strain, c.doubling, result.tricks, result.declarer_vulnerable)
    if Seat(c.declarer).side == 0:
        return DuplicateScore(s, -s)
    return DuplicateScore(-s, s)


def score_contract(contract: Contract, tricks: int, vul: Vulnerability) -> DuplicateScore:
    """Score a contract on a board with the given deal vulnerability."""
    if contract.passed_out:
        return DuplicateScore(0, 0)
    return duplicate_score(BoardResult(contract, tricks, Vulnerability(vul).is_vulnerable(contract.declarer)))


def imp(score_diff: int) -> int:
    sign = -1 if score_diff < 0 else 1
    return sign * bisect.bisect_left(IMP_BOUNDS, abs(score_diff))


class Team(str, enum.Enum):
    """Team A sits NS at table 1 and EW at table 2; team B the reverse."""

    A = "A"
    B = "B"


def team_match_imp(table1: DuplicateScore, table2: DuplicateScore, team: Team = Team.A) -> int:
    swing = imp(table1.ns_points + table2.ew_points)
    return swing if Team(team) is Team.A else -swing
