"""Data generators and the Monte Carlo harness for size and power studies.

Samples are drawn from a 2d-variate normal with a block covariance
(within-group equicorrelation, constant cross-group correlation) and then
transformed: rounded to the nearest integer (discrete data), exponentiated
(skewed data) or divided by an independent half-normal per subject, the
elliptical one-degree-of-freedom construction of a multivariate Cauchy
(heavy tails).  Group 2 receives a location shift.  Missingness follows
either the treatment-level layout (complete block, group-1-only block,
group-2-only block) or, for two response variables, one of three allocation
designs over all 15 nonempty per-cell observedness patterns.

Replicates use counter-based seeding, so results are reproducible and
independent of execution order.
"""

import os
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .data import MaskedSample, build_masked_sample, derive_pattern_index
from .errors import NotPositiveDefinite, ScenarioError
from .inference import run_all_methods

__all__ = [
    "DISTRIBUTIONS",
    "Scenario",
    "MethodTally",
    "SimulationResult",
    "build_sigma",
    "draw_sample",
    "run_scenario",
    "run_grid",
    "builtin_grid",
    "BUILTIN_GRIDS",
]

DISTRIBUTIONS = ("normal", "lognormal", "cauchy")
PATTERNS = ("simple", "design1", "design2", "design3")


def build_sigma(d, rho1, rho2, rho12, sigma1_sq, sigma2_sq) -> np.ndarray:
    """Block covariance/scale matrix for the 2d-variate generator.

    Within-group blocks are equicorrelated with the group variance;
    the cross-group block is constant at ``rho12 * sigma1 * sigma2``.

    Raises
    ------
    NotPositiveDefinite
        The parameter combination does not yield a valid covariance.
    """
    eye = np.eye(d)
    ones = np.ones((d, d))
    s1 = float(sigma1_sq)
    s2 = float(sigma2_sq)
    sigma = np.block([
        [s1 * eye + rho1 * s1 * (ones - eye), rho12 * np.sqrt(s1 * s2) * ones],
        [rho12 * np.sqrt(s1 * s2) * ones, s2 * eye + rho2 * s2 * (ones - eye)],
    ])
    try:
        np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite(
            f"correlations ({rho1}, {rho2}, {rho12}) with variances "
            f"({sigma1_sq}, {sigma2_sq}) do not give a positive definite matrix"
        ) from None
    return sigma


def _cell_patterns(d: int) -> list[np.ndarray]:
    """All nonempty per-cell observedness patterns, complete case first.

    Pattern ``p`` (counting down from ``2**(2d) - 1``) observes row ``i``
    iff bit ``i`` of ``p`` is set; the descending order puts the fully
    observed pattern at position 0 and fixes an arbitrary but stable order
    for the rest.
    """
    rows = 2 * d
    return [
        np.array([(p >> i) & 1 == 1 for i in range(rows)])
        for p in range(2**rows - 1, 0, -1)
    ]


def _int_exact(x: float, what: str) -> int:
    if abs(x - round(x)) > 1e-9:
        raise ScenarioError(f"{what} = {x} is not an integer")
    return int(round(x))


@dataclass(frozen=True)
class Scenario:
    """One Monte Carlo configuration.

    ``sizes`` depends on ``pattern``:

    * ``"simple"``: ``(n_complete, n_group1_only, n_group2_only)``;
    * ``"design1"``: ``(n,)`` total, split evenly over the 15 patterns;
    * ``"design2"``: ``(n, a)`` total and complete-case proportion, the
      remainder split evenly over the other 14 patterns;
    * ``"design3"``: ``(n_complete,)`` complete cases, with 100 subjects in
      each of the other 14 patterns.

    Designs require ``d == 2``.
    """

    distribution: str
    d: int
    rho: tuple[float, float, float]
    sigma_sq: tuple[float, float]
    delta: tuple[float, ...]
    pattern: str
    sizes: tuple[float, ...]
    replications: int = 1000
    seed: int = 0
    alpha: float = 0.05
    methods: tuple[str, ...] = ("all",)
    label: str = ""

    def validate(self) -> None:
        if self.distribution not in DISTRIBUTIONS:
            raise ScenarioError(
                f"distribution {self.distribution!r} not one of {DISTRIBUTIONS}"
            )
        if self.pattern not in PATTERNS:
            raise ScenarioError(f"pattern {self.pattern!r} not one of {PATTERNS}")
        if self.d < 1:
            raise ScenarioError(f"d must be >= 1, got {self.d}")
        if len(self.delta) != self.d:
            raise ScenarioError(f"delta must have length d={self.d}, got {len(self.delta)}")
        if self.replications < 1:
            raise ScenarioError(f"replications must be >= 1, got {self.replications}")
        if not 0.0 < self.alpha < 1.0:
            raise ScenarioError(f"alpha must lie in (0, 1), got {self.alpha}")
        build_sigma(self.d, *self.rho, *self.sigma_sq)
        self.pattern_counts()

    def pattern_counts(self) -> list[int]:
        """Subjects per observedness pattern, in the documented pattern order."""
        if self.pattern == "simple":
            if len(self.sizes) != 3:
                raise ScenarioError("simple pattern needs sizes (n_c, n_1, n_2)")
            counts = [_int_exact(s, "size") for s in self.sizes]
            if any(c < 0 for c in counts) or sum(counts) < 2:
                raise ScenarioError(f"invalid simple-pattern sizes {self.sizes}")
            return counts
        if self.d != 2:
            raise ScenarioError("pattern designs are defined for d = 2")
        if self.pattern == "design1":
            (n,) = self.sizes
            n = _int_exact(n, "n")
            if n % 15 != 0:
                raise ScenarioError(f"design1 total n = {n} must be divisible by 15")
            return [n // 15] * 15
        if self.pattern == "design2":
            n, a = self.sizes
            n = _int_exact(n, "n")
            if not 0.0 < a < 1.0:
                raise ScenarioError(f"design2 proportion a = {a} must lie in (0, 1)")
            n_complete = _int_exact(n * a, "n * a")
            per_pattern = _int_exact((n - n_complete) / 14.0, "n * (1 - a) / 14")
            return [n_complete] + [per_pattern] * 14
        (n_complete,) = self.sizes
        return [_int_exact(n_complete, "n_complete")] + [100] * 14


def draw_sample(scenario: Scenario, replicate_index: int) -> MaskedSample:
    """One replicate's masked sample; deterministic given (seed, index)."""
    d = scenario.d
    sigma = build_sigma(d, *scenario.rho, *scenario.sigma_sq)
    chol = np.linalg.cholesky(sigma)
    counts = scenario.pattern_counts()
    n = sum(counts)
    mu = np.concatenate([np.zeros(d), np.asarray(scenario.delta, dtype=float)])

    rng = np.random.default_rng(
        np.random.SeedSequence(scenario.seed, spawn_key=(replicate_index,))
    )
    z = rng.standard_normal((2 * d, n))
    if scenario.distribution == "cauchy":
        halfnorm = np.abs(rng.standard_normal(n))
        x = (chol @ z) / halfnorm[None, :] + mu[:, None]
    else:
        w = chol @ z + mu[:, None]
        x = np.rint(w) if scenario.distribution == "normal" else np.exp(w)

    observed = np.zeros((2 * d, n), dtype=bool)
    if scenario.pattern == "simple":
        n_c, n_1, _ = counts
        observed[:, :n_c] = True
        observed[:d, n_c:n_c + n_1] = True
        observed[d:, n_c + n_1:] = True
    else:
        start = 0
        for pat, cnt in zip(_cell_patterns(d), counts):
            observed[:, start:start + cnt] = pat[:, None]
            start += cnt
    return build_masked_sample(x, observed)


@dataclass(frozen=True)
class MethodTally:
    """Rejection bookkeeping for one (test family, case restriction) pair."""

    rejections: int
    evaluated: int
    skipped: int
    flagged: int

    @property
    def rate(self) -> float:
        return self.rejections / self.evaluated if self.evaluated else float("nan")

    @property
    def mc_se(self) -> float:
        """Binomial Monte Carlo standard error of the rejection rate."""
        if not self.evaluated:
            return float("nan")
        r = self.rate
        return float(np.sqrt(r * (1.0 - r) / self.evaluated))


@dataclass(frozen=True)
class SimulationResult:
    scenario: Scenario
    tallies: dict[str, MethodTally]  # key "<family>:<method>"
    failures: int
    elapsed_s: float = field(compare=False, default=0.0)


def run_scenario(scenario: Scenario) -> SimulationResult:
    """Draw, estimate and test ``replications`` times; tally rejections.

    Per-replicate exceptions are counted as failures and never abort the
    run; methods skipped as inestimable are tallied separately from
    evaluated replicates.
    """
    scenario.validate()
    start = time.perf_counter()
    keys = [f"{fam}:{meth}" for meth in scenario.methods for fam in ("wald", "anova")]
    counters = {k: [0, 0, 0, 0] for k in keys}  # rej, eval, skip, flagged
    failures = 0
    for r in range(scenario.replications):
        try:
            sample = draw_sample(scenario, r)
            idx = derive_pattern_index(sample)
            reports = run_all_methods(
                sample, idx, alpha=scenario.alpha, methods=scenario.methods
            )
        except Exception:
            failures += 1
            continue
        for rep in reports:
            c = counters[f"{rep.family}:{rep.method}"]
            if any(f.startswith("inestimable") for f in rep.flags):
                c[2] += 1
                continue
            c[1] += 1
            c[0] += int(rep.reject)
            c[3] += int(bool(rep.flags))
    tallies = {k: MethodTally(*v) for k, v in counters.items()}
    return SimulationResult(
        scenario=scenario,
        tallies=tallies,
        failures=failures,
        elapsed_s=time.perf_counter() - start,
    )


def _derived_seed(master_seed: int, index: int) -> int:
    return int(np.random.SeedSequence(master_seed, spawn_key=(index,)).generate_state(1)[0])


def _worker_count(n_tasks: int) -> int:
    raw = os.environ.get("RANK_EFFECT_THREADS", "1")
    try:
        cap = max(1, int(raw))
    except ValueError:
        cap = 1
    return min(cap, n_tasks)


def run_grid(scenarios, master_seed: int | None = None) -> list[SimulationResult]:
    """Run scenarios in order, optionally re-seeding each from a master seed.

    With ``master_seed`` given, scenario ``i`` runs under a seed derived
    from ``(master_seed, i)``, so a grid is reproducible regardless of how
    its scenarios were configured.  ``RANK_EFFECT_THREADS`` (default 1) caps
    process-level parallelism; results are identical either way.
    """
    scenarios = list(scenarios)
    for s in scenarios:
        s.validate()
    if master_seed is not None:
        scenarios = [
            replace(s, seed=_derived_seed(master_seed, i)) for i, s in enumerate(scenarios)
        ]
    workers = _worker_count(len(scenarios))
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run_scenario, scenarios))
    return [run_scenario(s) for s in scenarios]


_SIMPLE_SETTINGS = {
    1: (10, 30, 30),
    2: (30, 10, 10),
    3: (30, 30, 10),
    4: (10, 10, 30),
}
_POWER_SHIFTS = ((0.0, 0.3), (0.3, 0.3), (0.6, 0.6), (0.9, 0.9), (0.3, 0.6), (0.3, 0.9))


def _table3(reps: int, dims) -> list[Scenario]:
    out = []
    for setting, sizes in _SIMPLE_SETTINGS.items():
        for rho in ((0.1, 0.1, 0.1), (0.1, 0.9, 0.5)):
            for sig in ((1.0, 1.0), (1.0, 5.0)):
                for d in dims:
                    out.append(Scenario(
                        distribution="normal", d=d, rho=rho, sigma_sq=sig,
                        delta=(0.0,) * d, pattern="simple", sizes=sizes,
                        replications=reps, methods=("all", "complete", "incomplete"),
                        label=f"setting{setting} rho={rho} sigma2={sig} d={d}",
                    ))
    return out


def _table6(reps: int, dims) -> list[Scenario]:
    del dims  # power study is bivariate
    out = []
    for setting, sizes in _SIMPLE_SETTINGS.items():
        for sig in ((1.0, 1.0), (1.0, 5.0)):
            for delta in _POWER_SHIFTS:
                out.append(Scenario(
                    distribution="normal", d=2, rho=(0.1, 0.1, 0.1), sigma_sq=sig,
                    delta=delta, pattern="simple", sizes=sizes,
                    replications=reps, methods=("all", "complete", "incomplete"),
                    label=f"setting{setting} sigma2={sig} delta={delta}",
                ))
    return out


def _design_grid(pattern: str, size_values, size_name: str):
    def build(reps: int, dims) -> list[Scenario]:
        del dims
        out = []
        for sv in size_values:
            for rho in ((-0.1, -0.1, -0.1), (0.1, 0.1, 0.1)):
                for sig in ((1.0, 1.0), (1.0, 5.0)):
                    for dist in DISTRIBUTIONS:
                        out.append(Scenario(
                            distribution=dist, d=2, rho=rho, sigma_sq=sig,
                            delta=(0.0, 0.0), pattern=pattern,
                            sizes=sv if isinstance(sv, tuple) else (sv,),
                            replications=reps,
                            label=f"{size_name}={sv} rho={rho} sigma2={sig} {dist}",
                        ))
        return out

    return build

BUILTIN_GRIDS = {
    "table3": _table3,
    "table6": _table6,
    "design1": _design_grid("design1", (75, 150, 300), "n"),
    "design2": _design_grid("design2", ((210, 0.2), (210, 0.4), (210, 0.6), (210, 0.8)), "n,a"),
    "design3": _design_grid("design3", (5, 10, 20), "n1"),
}


def builtin_grid(name: str, reps: int = 1000, dims=(2, 3, 5)) -> list[Scenario]:
    """Scenario list for one of the named built-in study grids."""
    if name not in BUILTIN_GRIDS:
        raise ScenarioError(
            f"unknown builtin grid {name!r}; valid names: {', '.join(sorted(BUILTIN_GRIDS))}"
        )
    return BUILTIN_GRIDS[name](reps, dims)
