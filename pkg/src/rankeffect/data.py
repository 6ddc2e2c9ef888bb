"""Observation matrix with missingness and the per-component index bookkeeping.

Data layout: a ``2d x n`` matrix whose first ``d`` rows hold the group-1
measurements on the ``d`` response variables and whose last ``d`` rows hold
the group-2 measurements; columns are subjects.  A subject may be observed in
both groups on a variable (a *complete* case for that variable), in exactly
one group (an *incomplete* case), or in neither.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptySubject,
    NonFiniteObservedValue,
)

__all__ = [
    "MaskedSample",
    "PatternIndex",
    "Hypothesis",
    "build_masked_sample",
    "derive_pattern_index",
    "check_assumptions",
]


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class MaskedSample:
    """Validated ``2d x n`` observation matrix with per-cell observedness.

    ``values`` holds NaN at every masked cell so that accidental reads of
    unobserved data poison any arithmetic instead of silently passing.
    """

    d: int
    n: int
    values: np.ndarray   # (2d, n) float64, NaN where not observed
    observed: np.ndarray  # (2d, n) bool

    def group_row(self, group: int, component: int) -> int:
        """Row index of ``component`` (0-based) in ``group`` (1 or 2)."""
        return component + (group - 1) * self.d


def build_masked_sample(values, observed) -> MaskedSample:
    """Validate raw arrays and construct an immutable :class:`MaskedSample`.

    Parameters
    ----------
    values : array_like, shape (2d, n)
        Measurements; entries at masked cells are ignored.
    observed : array_like, shape (2d, n)
        Boolean mask, ``True`` where a value is present.

    Raises
    ------
    DimensionMismatch
        Shapes disagree, the row count is odd, or sizes are below the
        minimum (d >= 1, n >= 2).
    EmptySubject
        Some column has no observed cell.
    NonFiniteObservedValue
        An observed cell holds NaN or infinity.
    """
    values = np.asarray(values, dtype=float)
    observed = np.asarray(observed, dtype=bool)
    if values.ndim != 2 or observed.shape != values.shape:
        raise DimensionMismatch(
            f"values {values.shape} and observed {observed.shape} must be equal 2-d shapes"
        )
    rows, n = values.shape
    if rows % 2 != 0 or rows < 2:
        raise DimensionMismatch(f"row count {rows} is not twice a positive dimension")
    d = rows // 2
    if n < 2:
        raise DimensionMismatch(f"need at least 2 subjects, got {n}")
    empty = ~observed.any(axis=0)
    if empty.any():
        raise EmptySubject(int(np.flatnonzero(empty)[0]))
    if not np.isfinite(values[observed]).all():
        raise NonFiniteObservedValue("observed cells must be finite")
    cleaned = np.where(observed, values, np.nan)
    return MaskedSample(d=d, n=n, values=_freeze(cleaned), observed=_freeze(observed.copy()))


@dataclass(frozen=True)
class PatternIndex:
    """Per-component index sets and counts derived from the observedness mask.

    For component ``l`` the three boolean rows partition the subjects that
    are observed on ``l`` in at least one group: observed in both groups
    (complete), in group 1 only, or in group 2 only.
    """

    d: int
    n: int
    complete_mask: np.ndarray  # (d, n) bool
    g1_only_mask: np.ndarray   # (d, n) bool
    g2_only_mask: np.ndarray   # (d, n) bool
    n_complete: np.ndarray     # (d,) counts per component
    n1_only: np.ndarray
    n2_only: np.ndarray
    is_simple_pattern: bool = field(default=False)

    @property
    def m1(self) -> np.ndarray:
        """Group-1 observation counts per component (complete + group-1 only)."""
        return self.n_complete + self.n1_only

    @property
    def m2(self) -> np.ndarray:
        return self.n_complete + self.n2_only

    @property
    def pooled_counts(self) -> np.ndarray:
        """Total observation count per component over both groups."""
        return 2 * self.n_complete + self.n1_only + self.n2_only

    def complete_set(self, component: int) -> np.ndarray:
        return np.flatnonzero(self.complete_mask[component])

    def g1_only_set(self, component: int) -> np.ndarray:
        return np.flatnonzero(self.g1_only_mask[component])

    def g2_only_set(self, component: int) -> np.ndarray:
        return np.flatnonzero(self.g2_only_mask[component])


def derive_pattern_index(sample: MaskedSample) -> PatternIndex:
    """Classify every (subject, component) pair as complete/one-sided/absent.

    The treatment-level layout (each subject either fully paired or observed
    in exactly one group on all components) is detected and reported via
    ``is_simple_pattern``; it makes the cheaper covariance estimator valid.
    """
    d = sample.d
    obs1 = sample.observed[:d]
    obs2 = sample.observed[d:]
    complete = obs1 & obs2
    g1_only = obs1 & ~obs2
    g2_only = ~obs1 & obs2
    simple = bool(
        (complete == complete[0]).all()
        and (g1_only == g1_only[0]).all()
        and (g2_only == g2_only[0]).all()
    )
    return PatternIndex(
        d=d,
        n=sample.n,
        complete_mask=_freeze(complete),
        g1_only_mask=_freeze(g1_only),
        g2_only_mask=_freeze(g2_only),
        n_complete=_freeze(complete.sum(axis=1)),
        n1_only=_freeze(g1_only.sum(axis=1)),
        n2_only=_freeze(g2_only.sum(axis=1)),
        is_simple_pattern=simple,
    )


@dataclass(frozen=True)
class Hypothesis:
    """Null of no tendency: every component effect equals one half."""

    alpha: float = 0.05

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")

    def null_vector(self, d: int) -> np.ndarray:
        return np.full(d, 0.5)


def check_assumptions(idx: PatternIndex, min_group_size: int = 5) -> list[str]:
    """Advisory checks on the sample-size allocation; never raises.

    Returns one warning per (group, component) whose observation count is
    below ``min_group_size``, and one per covariance part that exists but
    cannot contribute a variance term (exactly one case, so the n-1
    denominator vanishes).
    """
    warnings = []
    for l in range(idx.d):
        for g, m in ((1, idx.m1[l]), (2, idx.m2[l])):
            if m < min_group_size:
                warnings.append(
                    f"component {l}: group {g} has only {m} observations "
                    f"(fewer than {min_group_size}); asymptotic approximations may be poor"
                )
        if idx.n_complete[l] == 1:
            warnings.append(
                f"component {l}: a single complete case; the paired covariance part "
                "is inestimable and will contribute zero"
            )
        for g, cnt in ((1, idx.n1_only[l]), (2, idx.n2_only[l])):
            if cnt == 1:
                warnings.append(
                    f"component {l}: a single group-{g}-only case; its covariance part "
                    "is inestimable and will contribute zero"
                )
    return warnings
