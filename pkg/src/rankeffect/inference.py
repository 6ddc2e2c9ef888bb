"""Joint hypothesis tests on the effect vector.

Two statistics against the no-tendency null (all component effects equal
one half): a Wald-type quadratic form referred to chi-square with ``d``
degrees of freedom, and a trace-normalized (ANOVA-type) form referred to an
F distribution with estimated numerator degrees of freedom and infinite
denominator degrees of freedom, which is evaluated through the chi-square
identity ``P(F(nu, inf) >= f) = P(chi2_nu >= nu * f)``.  The Wald statistic
is known to be liberal in small samples; the ANOVA-type statistic is the
small-sample workhorse.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .covariance import CovarianceEstimate, covariance_general, covariance_simple
from .data import MaskedSample, PatternIndex
from .effects import METHODS, EffectEstimate, estimate_effects, restrict_method
from .errors import (
    DomainError,
    EverythingFiltered,
    InestimableComponent,
    NoEstimablePart,
    PatternMismatch,
    ZeroCovariance,
    ZeroTrace,
)
from .ranks import build_rank_table
from .tolerances import TOL

__all__ = [
    "TestReport",
    "MethodAnalysis",
    "chisq_upper_tail",
    "wald_test",
    "anova_test",
    "analyze",
    "run_all_methods",
]


def chisq_upper_tail(x: float, k: float) -> float:
    """Upper tail probability of a chi-square variable with ``k`` df at ``x``.

    Equals the regularized upper incomplete gamma function Q(k/2, x/2);
    ``k`` may be any positive real, as required by the estimated degrees of
    freedom of the ANOVA-type statistic.
    """
    if not (x >= 0.0) or not math.isfinite(x):
        raise DomainError(f"x must be finite and >= 0, got {x}")
    if not (k > 0.0) or not math.isfinite(k):
        raise DomainError(f"k must be finite and > 0, got {k}")
    return float(special.gammaincc(k / 2.0, x / 2.0))


@dataclass(frozen=True)
class TestReport:
    """Outcome of one test: statistic, reference distribution, decision."""

    statistic: float
    df: float
    p_value: float
    alpha: float
    reject: bool
    family: str   # "wald" | "anova"
    method: str   # "all" | "complete" | "incomplete"
    flags: tuple[str, ...] = ()


def _skipped(family: str, method: str, alpha: float, reason: str) -> TestReport:
    return TestReport(
        statistic=float("nan"),
        df=float("nan"),
        p_value=float("nan"),
        alpha=alpha,
        reject=False,
        family=family,
        method=method,
        flags=(f"inestimable: {reason}",),
    )


def wald_test(
    p_hat: EffectEstimate,
    cov: CovarianceEstimate,
    n: int,
    alpha: float = 0.05,
) -> TestReport:
    """Quadratic form of the deviation against the inverse covariance.

    When the covariance estimate is singular, its Moore-Penrose
    pseudo-inverse is used (eigenvalues below ``TOL.pinv_rank_rel * trace/d``
    in magnitude dropped) and the reported degrees of freedom shrink to the
    effective rank; the fallback is flagged.

    Raises
    ------
    ZeroCovariance
        The covariance estimate vanishes but the effect deviates from the
        null point, leaving the statistic undefined.
    """
    dev = p_hat.deviation
    d = dev.size
    v = cov.v_hat
    flags = list(cov.degenerate)
    if cov.trace <= 0.0:
        rank = 0
    else:
        eigvals, eigvecs = np.linalg.eigh((v + v.T) / 2.0)
        cutoff = TOL.pinv_rank_rel * cov.trace / d
        kept = np.abs(eigvals) > cutoff
        rank = int(kept.sum())
    if rank == 0:
        if np.abs(dev).max() <= TOL.null_deviation:
            flags.append("zero-covariance-null")
            return TestReport(0.0, 0.0, 1.0, alpha, False, "wald", p_hat.method, tuple(flags))
        raise ZeroCovariance(
            "covariance estimate is zero while the effect deviates from one half"
        )
    proj = eigvecs[:, kept].T @ dev
    stat = float(n * np.sum(proj * proj / eigvals[kept]))
    if rank < d:
        flags.append(f"singular covariance: pseudo-inverse with rank {rank}")
    if stat < 0.0:
        # possible when the general-pattern estimate is indefinite
        flags.append("negative quadratic form clamped to zero for the p-value")
    p = chisq_upper_tail(max(stat, 0.0), float(rank))
    return TestReport(stat, float(rank), p, alpha, p <= alpha, "wald", p_hat.method, tuple(flags))


def anova_test(
    p_hat: EffectEstimate,
    cov: CovarianceEstimate,
    n: int,
    alpha: float = 0.05,
) -> TestReport:
    """Trace-normalized quadratic form with estimated degrees of freedom.

    Raises
    ------
    ZeroTrace
        The covariance trace vanishes but the effect deviates from the null
        point.
    """
    dev = p_hat.deviation
    flags = list(cov.degenerate)
    if cov.trace <= 0.0:
        if np.abs(dev).max() <= TOL.null_deviation:
            flags.append("zero-covariance-null")
            return TestReport(0.0, 0.0, 1.0, alpha, False, "anova", p_hat.method, tuple(flags))
        raise ZeroTrace("covariance trace is zero while the effect deviates from one half")
    stat = float(n / cov.trace * np.sum(dev * dev))
    nu = cov.nu_hat
    p = chisq_upper_tail(nu * stat, nu)
    return TestReport(stat, nu, p, alpha, p <= alpha, "anova", p_hat.method, tuple(flags))


@dataclass(frozen=True)
class MethodAnalysis:
    """Everything one case-restriction method produced, or why it was skipped."""

    method: str
    effects: EffectEstimate | None
    covariance: CovarianceEstimate | None
    n: int
    wald: TestReport
    anova: TestReport
    skipped: str | None = None


def _select_covariance(sample, idx, ranks, pattern: str):
    if pattern == "simple" or (pattern == "auto" and idx.is_simple_pattern):
        return covariance_simple(sample, idx, ranks)
    return covariance_general(sample, idx, ranks)


def analyze(
    sample: MaskedSample,
    idx: PatternIndex,
    alpha: float = 0.05,
    methods: tuple[str, ...] = METHODS,
    pattern: str = "auto",
) -> list[MethodAnalysis]:
    """Run the full pipeline for each requested case-restriction method.

    ``pattern`` selects the covariance estimator: ``"auto"`` picks the
    cheaper treatment-level form whenever the (restricted) data allows it,
    ``"simple"`` insists on it (raising :class:`PatternMismatch` otherwise)
    and ``"general"`` always uses the nine-term form.  Methods whose
    restriction is inestimable yield placeholder reports instead of
    aborting the run.
    """
    if pattern not in ("auto", "simple", "general"):
        raise ValueError(f"unknown pattern {pattern!r}")
    if pattern == "simple" and not idx.is_simple_pattern:
        raise PatternMismatch(
            "pattern mismatch: data does not have treatment-level missingness"
        )
    # inestimability of the unrestricted data is a dataset problem and fails
    # hard; methods below only soft-skip when their *restriction* causes it
    for l in range(idx.d):
        if idx.m1[l] == 0 or idx.m2[l] == 0:
            raise InestimableComponent(l, group=1 if idx.m1[l] == 0 else 2)
    out = []
    for method in methods:
        try:
            sub, sub_idx = restrict_method(sample, idx, method)
            ranks = build_rank_table(sub, sub_idx)
            eff = estimate_effects(sub, sub_idx, ranks, method=method)
            cov = _select_covariance(sub, sub_idx, ranks, pattern)
            wald = wald_test(eff, cov, sub.n, alpha)
            anova = anova_test(eff, cov, sub.n, alpha)
            out.append(MethodAnalysis(method, eff, cov, sub.n, wald, anova))
        except (
            EverythingFiltered,
            InestimableComponent,
            NoEstimablePart,
            ZeroCovariance,
            ZeroTrace,
        ) as exc:
            reason = str(exc)
            out.append(
                MethodAnalysis(
                    method,
                    None,
                    None,
                    0,
                    _skipped("wald", method, alpha, reason),
                    _skipped("anova", method, alpha, reason),
                    skipped=reason,
                )
            )
    return out


def run_all_methods(
    sample: MaskedSample,
    idx: PatternIndex,
    alpha: float = 0.05,
    methods: tuple[str, ...] = METHODS,
    pattern: str = "auto",
) -> list[TestReport]:
    """Flat list of Wald and ANOVA reports for each case-restriction method."""
    reports = []
    for item in analyze(sample, idx, alpha=alpha, methods=methods, pattern=pattern):
        reports.append(item.wald)
        reports.append(item.anova)
    return reports
