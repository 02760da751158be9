"""Error taxonomy shared across duelbench modules.

Every raiser is a ValueError subclass so callers that do not care about the
fine-grained category can catch ValueError; the harness maps any of these to
a nonzero exit code plus a one-line diagnostic.
"""

from __future__ import annotations


class DuelbenchError(ValueError):
    """Base class for all validation failures raised by this package."""


class NotSquareError(DuelbenchError):
    """Preference matrix is not a square 2-D array."""


class TooFewArmsError(DuelbenchError):
    """Fewer than two arms."""


class EntryOutOfRangeError(DuelbenchError):
    """Preference entry outside [0, 1]."""


class BadDiagonalError(DuelbenchError):
    """Diagonal entry of a preference matrix differs from 1/2."""


class AsymmetricPairError(DuelbenchError):
    """p[i, j] + p[j, i] differs from 1."""


class MeanOutOfRangeError(DuelbenchError):
    """Bernoulli utility mean outside [0, 1]."""


class ArmOutOfRangeError(DuelbenchError):
    """Arm index outside [0, k)."""


class StepOutOfRangeError(DuelbenchError):
    """Time step outside the range an adversarial sequence covers."""


class ZeroProbabilityError(DuelbenchError):
    """Importance weight would divide by a zero sampling probability."""


class NegativeTauError(DuelbenchError):
    """Gain-spread constant came out negative (gmin exceeds what gmax allows)."""


class HorizonTooSmallError(DuelbenchError):
    """Horizon too short for the requested run."""


class MissingCheckpointError(DuelbenchError):
    """Requested time step is not on the recorded checkpoint grid."""


class GridMismatchError(DuelbenchError):
    """Run records do not share a common checkpoint grid."""


class ConfigInvalidError(DuelbenchError):
    """Experiment config file failed to parse or references unknown values."""


class ArmCountMismatchError(DuelbenchError):
    """Two components disagree about the number of arms."""
