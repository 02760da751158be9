"""Preference matrices for dueling-bandit environments.

A preference matrix p is a square matrix of win probabilities: p[i, j] is the
probability that arm i beats arm j in a single duel. Valid matrices satisfy
p[i, j] + p[j, i] = 1 with a diagonal of 1/2. Tournament scores (Borda,
Copeland) and the Condorcet winner are derived here; Borda scores sum each
row excluding the diagonal.

Indices are zero-based throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    AsymmetricPairError,
    BadDiagonalError,
    DuelbenchError,
    EntryOutOfRangeError,
    MeanOutOfRangeError,
    NotSquareError,
    TooFewArmsError,
)

# Validation tolerances; generators produce exact complements, loaders admit
# round-tripped 12-significant-digit CSV values.
DIAGONAL_TOL = 1e-9
SYMMETRY_TOL = 1e-9


def validate_preferences(p: np.ndarray) -> np.ndarray:
    """Check matrix shape and the win-probability invariants.

    Returns a float64 C-contiguous copy. Raises the narrowest matching
    error: shape problems first, then entry range, diagonal, symmetry.
    """
    p = np.ascontiguousarray(p, dtype=np.float64)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise NotSquareError(f"expected a square matrix, got shape {p.shape}")
    k = p.shape[0]
    if k < 2:
        raise TooFewArmsError(f"need at least 2 arms, got {k}")
    bad = ~np.isfinite(p) | (p < 0.0) | (p > 1.0)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise EntryOutOfRangeError(f"entry [{i},{j}] = {p[i, j]!r} outside [0, 1]")
    off = np.abs(np.diagonal(p) - 0.5)
    if off.max() > DIAGONAL_TOL:
        i = int(np.argmax(off))
        raise BadDiagonalError(f"diagonal [{i},{i}] = {p[i, i]!r}, expected 0.5")
    gap = np.abs(p + p.T - 1.0)
    if gap.max() > SYMMETRY_TOL:
        i, j = np.unravel_index(int(np.argmax(gap)), gap.shape)
        raise AsymmetricPairError(
            f"p[{i},{j}] + p[{j},{i}] = {p[i, j] + p[j, i]!r}, expected 1"
        )
    return p


@dataclass(frozen=True)
class TournamentSummary:
    borda: np.ndarray
    copeland: np.ndarray
    condorcet_winner: int | None


@dataclass(frozen=True)
class PreferenceMatrix:
    """Validated win-probability matrix. `p` is read-only after construction."""

    p: np.ndarray

    def __post_init__(self):
        p = validate_preferences(self.p)
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @property
    def k(self) -> int:
        return self.p.shape[0]

    def borda_scores(self) -> np.ndarray:
        """Row sums without the diagonal contribution."""
        return self.p.sum(axis=1) - np.diagonal(self.p)

    def copeland_scores(self) -> np.ndarray:
        """Number of opponents each arm beats with probability > 1/2."""
        wins = self.p > 0.5
        np.fill_diagonal(wins, False)
        return wins.sum(axis=1).astype(np.int64)

    def condorcet_winner(self) -> int | None:
        """Arm that beats every other arm, or None if the tournament cycles."""
        scores = self.copeland_scores()
        winners = np.flatnonzero(scores == self.k - 1)
        return int(winners[0]) if winners.size else None

    def summary(self) -> TournamentSummary:
        return TournamentSummary(
            borda=self.borda_scores(),
            copeland=self.copeland_scores(),
            condorcet_winner=self.condorcet_winner(),
        )


def savage_matrix(k: int) -> PreferenceMatrix:
    """Ordered tournament where beating weaker arms gets progressively easier.

    In one-based terms p[i, j] = 1/2 + j/(2k) for i < j, so arm 1 is the
    Condorcet winner and Copeland scores descend one per arm.
    """
    if k < 2:
        raise TooFewArmsError(f"need at least 2 arms, got {k}")
    p = np.full((k, k), 0.5)
    for i in range(k):
        for j in range(i + 1, k):
            p[i, j] = 0.5 + (j + 1) / (2.0 * k)
            p[j, i] = 1.0 - p[i, j]
    return PreferenceMatrix(p)


def bvs_matrix(k: int = 20) -> PreferenceMatrix:
    """Deceptive tournament: the Condorcet winner has the worst Borda score.

    Arm 1 (zero-based 0) beats everyone, but only barely (0.51); every other
    arm crushes all arms after it with certainty.
    """
    if k < 2:
        raise TooFewArmsError(f"need at least 2 arms, got {k}")
    p = np.full((k, k), 0.5)
    for j in range(1, k):
        p[0, j] = 0.51
        p[j, 0] = 1.0 - 0.51
    for i in range(1, k):
        for j in range(i + 1, k):
            p[i, j] = 1.0
            p[j, i] = 0.0
    return PreferenceMatrix(p)


def preference_from_utilities(mu: np.ndarray) -> PreferenceMatrix:
    """Matrix induced by Bernoulli utility means under the linear link.

    p[i, j] = (mu_i - mu_j + 1) / 2, which equals the win probability of a
    duel judged on independent Bernoulli draws with ties split evenly.
    """
    mu = np.asarray(mu, dtype=np.float64)
    if mu.ndim != 1 or mu.size < 2:
        raise TooFewArmsError(f"need a vector of at least 2 means, got shape {mu.shape}")
    if (~np.isfinite(mu) | (mu < 0.0) | (mu > 1.0)).any():
        raise MeanOutOfRangeError(f"means must lie in [0, 1], got {mu!r}")
    k = mu.size
    p = np.full((k, k), 0.5)
    for i in range(k):
        for j in range(i + 1, k):
            p[i, j] = (mu[i] - mu[j] + 1.0) / 2.0
            p[j, i] = 1.0 - p[i, j]
    return PreferenceMatrix(p)


def save_matrix_csv(m: PreferenceMatrix, path: str | Path) -> None:
    """Plain CSV, no header, 12 significant digits per entry."""
    lines = [",".join(f"{x:.12g}" for x in row) for row in m.p]
    Path(path).write_text("\n".join(lines) + "\n")


def load_matrix_csv(path: str | Path) -> PreferenceMatrix:
    try:
        raw = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except ValueError as exc:
        raise DuelbenchError(f"cannot parse matrix CSV {path}: {exc}") from exc
    return PreferenceMatrix(raw)
