"""Covariance estimation for the scaled effect vector.

Two estimators of the asymptotic covariance of ``sqrt(n) * (p_hat - p)``:

* :func:`covariance_simple` for treatment-level missingness, built from
  rank differences as a sum of three scaled empirical covariance matrices
  (paired cases, group-1-only cases, group-2-only cases);
* :func:`covariance_general` for per-cell missingness, which assembles each
  entry from nine cross-covariance terms over intersections of the
  per-component index sets, using placement values.

On treatment-level data the general estimator collapses to the simple one
entry by entry; that reduction is the key regression check.

:func:`covariance_from_marginals` evaluates the (in practice unobservable)
variant that uses the true marginal distributions instead of their
empirical counterparts; it exists to validate consistency empirically.
"""

from dataclasses import dataclass

import numpy as np

from .data import MaskedSample, PatternIndex
from .errors import InestimableComponent, NoEstimablePart, PatternMismatch
from .ranks import RankTable, placements

__all__ = [
    "CovarianceEstimate",
    "covariance_simple",
    "covariance_general",
    "covariance_from_marginals",
]


@dataclass(frozen=True)
class CovarianceEstimate:
    """Symmetric d x d estimate with trace diagnostics and provenance."""

    v_hat: np.ndarray
    trace: float
    trace_sq: float        # trace of v_hat squared
    nu_hat: float          # trace^2 / trace_sq; NaN if v_hat == 0
    estimator: str         # "simple" | "general" | "oracle"
    parts: dict | None = None            # additive parts for the 3-term forms
    term_values: np.ndarray | None = None  # (d, d, 9) per-entry terms, general form
    degenerate: tuple[str, ...] = ()


def _diagnostics(v: np.ndarray) -> tuple[float, float, float]:
    trace = float(np.trace(v))
    trace_sq = float(np.sum(v * v))  # == tr(V^2) for symmetric V
    nu = trace * trace / trace_sq if trace_sq > 0 else float("nan")
    return trace, trace_sq, nu


def _mirror(upper: np.ndarray) -> np.ndarray:
    """Fill the lower triangle from the upper one for exact symmetry."""
    return np.triu(upper) + np.triu(upper, 1).T


def _scatter(x: np.ndarray) -> np.ndarray:
    """Sum of outer products of mean-centered columns, exactly symmetric."""
    centered = x - x.mean(axis=1, keepdims=True)
    return _mirror(centered @ centered.T)


def covariance_simple(
    sample: MaskedSample,
    idx: PatternIndex,
    ranks: RankTable,
) -> CovarianceEstimate:
    """Three-part rank-difference estimator for treatment-level missingness.

    Each part is a scaled empirical covariance of the per-subject vectors of
    (overall minus internal) rank differences; a part whose case count is 1
    cannot contribute a variance and is replaced by zero with a flag, which
    is how analyses with, say, a single one-sided subject still proceed.

    Raises
    ------
    PatternMismatch
        The data does not have treatment-level missingness.
    NoEstimablePart
        No part has at least two cases.
    """
    if not idx.is_simple_pattern:
        raise PatternMismatch("covariance_simple requires treatment-level missingness")
    d, n = idx.d, idx.n
    n_c = int(idx.n_complete[0])
    n_1 = int(idx.n1_only[0])
    n_2 = int(idx.n2_only[0])
    m1 = float(n_c + n_1)
    m2 = float(n_c + n_2)
    scale_denom = m1 * m1 * m2 * m2

    b = ranks.overall - ranks.internal  # (2d, n)
    parts: dict[str, np.ndarray] = {}
    flags: list[str] = []
    zero = np.zeros((d, d))

    comp = idx.complete_set(0)
    if n_c >= 2:
        diff = b[d:, comp] - b[:d, comp]  # group-2 minus group-1 rank differences
        parts["complete"] = n * n_c / (scale_denom * (n_c - 1)) * _scatter(diff)
    else:
        parts["complete"] = zero
        if n_c == 1:
            flags.append("complete part degenerate (single paired case); contributed zero")

    for g, cnt, rows, cols in (
        (1, n_1, slice(0, d), idx.g1_only_set(0)),
        (2, n_2, slice(d, 2 * d), idx.g2_only_set(0)),
    ):
        key = f"group{g}"
        if cnt >= 2:
            parts[key] = n * cnt / (scale_denom * (cnt - 1)) * _scatter(b[rows, cols])
        else:
            parts[key] = zero
            if cnt == 1:
                flags.append(
                    f"group-{g} incomplete part degenerate (single case); contributed zero"
                )

    if n_c < 2 and n_1 < 2 and n_2 < 2:
        raise NoEstimablePart(
            f"no covariance part has two cases (complete={n_c}, g1={n_1}, g2={n_2})"
        )
    v = parts["complete"] + parts["group1"] + parts["group2"]
    trace, trace_sq, nu = _diagnostics(v)
    v.setflags(write=False)
    return CovarianceEstimate(
        v_hat=v,
        trace=trace,
        trace_sq=trace_sq,
        nu_hat=nu,
        estimator="simple",
        parts=parts,
        degenerate=tuple(flags),
    )


# The nine cross-covariance terms of the general-pattern entry (l, r).
# Columns: left variable, right variable, sign, left denominator, right
# denominator; variables are "z" (complete-case weighted difference), "y2"
# (group-2 one-sided placement) or "y1"; denominators are taken per
# component ("nc", "m1", "m2").
_TERMS = (
    ("z", "z", +1, "nc", "nc"),
    ("z", "y2", +1, "nc", "m2"),
    ("z", "y1", -1, "nc", "m1"),
    ("y2", "z", +1, "m2", "nc"),
    ("y2", "y2", +1, "m2", "m2"),
    ("y2", "y1", -1, "m2", "m1"),
    ("y1", "z", -1, "m1", "nc"),
    ("y1", "y2", -1, "m1", "m2"),
    ("y1", "y1", +1, "m1", "m1"),
)


def covariance_general(
    sample: MaskedSample,
    idx: PatternIndex,
    ranks: RankTable,
) -> CovarianceEstimate:
    """Nine-term placement-based estimator for per-cell missingness.

    Entry (l, r) sums signed cross-covariances of the complete-case weighted
    difference and the one-sided placements, each computed over the
    intersection of the two components' index sets with an ``e/(e-1)`` bias
    factor (``e`` the intersection size) and divided by the per-component
    case counts.  Intersections with a single subject contribute zero and
    are flagged; empty ones are structurally absent.  The result is exactly
    symmetric but not forced to be positive semidefinite.
    """
    d, n = idx.d, idx.n
    for l in range(d):
        if idx.m1[l] == 0 or idx.m2[l] == 0:
            raise InestimableComponent(l, group=1 if idx.m1[l] == 0 else 2)
    place = placements(ranks, idx)
    y = place.y_hat
    theta1 = idx.n_complete / idx.m1
    theta2 = idx.n_complete / idx.m2

    # Per-component value rows (NaN outside the owning index set) and masks.
    values = {
        "z": theta2[:, None] * y[d:] - theta1[:, None] * y[:d],
        "y1": y[:d],
        "y2": y[d:],
    }
    masks = {"z": idx.complete_mask, "y1": idx.g1_only_mask, "y2": idx.g2_only_mask}
    denoms = {
        "nc": idx.n_complete.astype(float),
        "m1": idx.m1.astype(float),
        "m2": idx.m2.astype(float),
    }

    v = np.zeros((d, d))
    term_values = np.zeros((d, d, 9))
    flags: list[str] = []
    for l in range(d):
        for r in range(l, d):
            entry = 0.0
            for j, (left, right, sign, dl, dr) in enumerate(_TERMS):
                members = masks[left][l] & masks[right][r]
                e = int(members.sum())
                if e <= 1:
                    if e == 1:
                        flags.append(
                            f"term C{j + 1} for components ({l},{r}) has a single "
                            "subject; contributed zero"
                        )
                    continue
                a = values[left][l, members]
                b = values[right][r, members]
                c_hat = e / (e - 1) * float(np.dot(a - a.mean(), b - b.mean()))
                term_values[l, r, j] = c_hat
                term_values[r, l, j] = c_hat
                entry += sign * c_hat / (denoms[dl][l] * denoms[dr][r])
            v[l, r] = v[r, l] = n * entry
    trace, trace_sq, nu = _diagnostics(v)
    v.setflags(write=False)
    term_values.setflags(write=False)
    return CovarianceEstimate(
        v_hat=v,
        trace=trace,
        trace_sq=trace_sq,
        nu_hat=nu,
        estimator="general",
        term_values=term_values,
        degenerate=tuple(flags),
    )


def covariance_from_marginals(
    sample: MaskedSample,
    idx: PatternIndex,
    marginal_cdfs,
) -> CovarianceEstimate:
    """Three-part estimator using true marginal CDFs instead of placements.

    ``marginal_cdfs[l]`` is a pair ``(F1, F2)`` of vectorized CDF callables
    for component ``l`` in groups 1 and 2.  For distributions with atoms,
    pass the normalized CDF (the average of the left- and right-continuous
    versions).  Not computable from data alone; used to validate that the
    rank-based estimator converges to it.
    """
    if not idx.is_simple_pattern:
        raise PatternMismatch("the oracle form is defined for treatment-level missingness")
    d, n = idx.d, idx.n
    n_c = int(idx.n_complete[0])
    n_1 = int(idx.n1_only[0])
    n_2 = int(idx.n2_only[0])
    m1 = float(n_c + n_1)
    m2 = float(n_c + n_2)
    theta1 = n_c / m1
    theta2 = n_c / m2

    y = np.full_like(sample.values, np.nan)
    for l in range(d):
        f1, f2 = marginal_cdfs[l]
        obs1 = sample.observed[l]
        obs2 = sample.observed[d + l]
        y[l, obs1] = np.asarray(f2(sample.values[l, obs1]), dtype=float)
        y[d + l, obs2] = np.asarray(f1(sample.values[d + l, obs2]), dtype=float)

    parts: dict[str, np.ndarray] = {}
    zero = np.zeros((d, d))
    comp = idx.complete_set(0)
    if n_c >= 2:
        z = theta2 * y[d:, comp] - theta1 * y[:d, comp]
        parts["complete"] = n / (n_c * (n_c - 1)) * _scatter(z)
    else:
        parts["complete"] = zero
    for key, cnt, m_own, rows, cols in (
        ("group1", n_1, m1, slice(0, d), idx.g1_only_set(0)),
        ("group2", n_2, m2, slice(d, 2 * d), idx.g2_only_set(0)),
    ):
        if cnt >= 2:
            parts[key] = n * cnt / (m_own * m_own * (cnt - 1)) * _scatter(y[rows, cols])
        else:
            parts[key] = zero
    v = parts["complete"] + parts["group1"] + parts["group2"]
    trace, trace_sq, nu = _diagnostics(v)
    v.setflags(write=False)
    return CovarianceEstimate(
        v_hat=v,
        trace=trace,
        trace_sq=trace_sq,
        nu_hat=nu,
        estimator="oracle",
        parts=parts,
    )
