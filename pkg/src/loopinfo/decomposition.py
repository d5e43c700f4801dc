"""Directed-information rate of the feedback channel and its decomposition.

The rate is the log-spectral integral of the generalized sensitivity ratio
sqrt(S_Y/S_W). It splits into a control term (the Bode sensitivity integral
of the loop) plus a nonnegative disturbance-transmission term; for white
noises and unit feedback the split collapses to the closed forms
sum of ln max(1, |pole|) and (1/2) ln(1 + sigma_v^2/sigma_w^2).
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import (
    ConsistencyError,
    DegenerateLoopError,
    InvalidInputError,
    LogDomainError,
    SingularityError,
    UnstableLoopError,
)
from .lti import (
    ClosedLoop,
    LoopModel,
    TransferFunction,
    close_loop,
    freq_response_array,
    is_stabilizing,
    pole_placement_controller,
    tf,
)
from .spectral import (
    NEAR_SINGULAR_FLOOR,
    FrequencyGrid,
    NoiseSpec,
    SpectrumSamples,
    colored,
    log_integral,
    noise_psd,
    output_psd,
    sensitivity_ratio,
    white,
)

# The two algebraically equal disturbance-integrand forms must agree this
# closely, and the entropy-difference route must match the direct rate.
CROSS_CHECK_TOL = 1e-10


@dataclass(frozen=True)
class RateInputs:
    """A stabilized loop plus the evaluation grid for all rate integrals."""

    model: LoopModel
    grid: FrequencyGrid = field(default_factory=FrequencyGrid)

    def __post_init__(self):
        report = is_stabilizing(self.model)
        if report.degenerate:
            raise DegenerateLoopError("1 - P*K*H is identically zero")
        if not report.is_stabilizing:
            raise UnstableLoopError(
                "rate computation needs a stabilized loop",
                poles=report.offending_poles,
            )

    @cached_property
    def closed_loop(self) -> ClosedLoop:
        return close_loop_checked(self.model)


def close_loop_checked(model: LoopModel) -> ClosedLoop:
    cl = close_loop(model)
    if not cl.is_stable:
        raise UnstableLoopError(
            "closed loop is unstable",
            poles=[p for p in cl.closed_loop_poles if abs(p) >= 1.0 - 1e-9],
        )
    return cl


@dataclass(frozen=True)
class DecompositionReport:
    """The three integrals of the rate decomposition, all in nats/sample.

    residual = total_rate - control_term - disturbance_term, which is zero in
    exact arithmetic because the identity holds pointwise per frequency.
    convergence_estimate is the change in total_rate under grid doubling.
    """

    total_rate: float
    control_term: float
    disturbance_term: float
    residual: float
    bode_analytic: float
    grid_points: int
    convergence_estimate: float

    def __post_init__(self):
        if self.disturbance_term < -1e-12:
            raise ConsistencyError(
                f"disturbance term must be nonnegative, got {self.disturbance_term!r}"
            )
        if self.total_rate < self.control_term - 1e-8:
            raise ConsistencyError(
                "total rate fell below the control term: "
                f"{self.total_rate!r} < {self.control_term!r}"
            )

    def as_dict(self) -> dict:
        return {
            "total_rate": self.total_rate,
            "control_term": self.control_term,
            "disturbance_term": self.disturbance_term,
            "residual": self.residual,
            "bode_analytic": self.bode_analytic,
            "grid_points": self.grid_points,
            "convergence_estimate": self.convergence_estimate,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.as_dict(), **kwargs)


def gaussian_entropy_rate(s: SpectrumSamples) -> float:
    """Entropy rate (nats/sample) of a stationary Gaussian process with PSD s."""
    return 0.5 * math.log(2.0 * math.pi * math.e) + 0.5 * log_integral(s)


def _loop_spectra(model: LoopModel, cl: ClosedLoop, grid: FrequencyGrid):
    sw = noise_psd(model.channel_noise, grid)
    sv = noise_psd(model.output_disturbance, grid)
    sy = output_psd(cl, sw, sv)
    return sw, sv, sy


def directed_info_rate(inputs: RateInputs) -> float:
    """I(Z -> Y) per sample: the log integral of sqrt(S_Y/S_W)."""
    cl = inputs.closed_loop
    sw, _, sy = _loop_spectra(inputs.model, cl, inputs.grid)
    return log_integral(sensitivity_ratio(sy, sw))


@dataclass(frozen=True)
class _Integrands:
    """Per-frequency integrand samples for one grid, plus the smallest
    PSD-scale quantity a log is taken of (for near-singularity detection)."""

    grid: FrequencyGrid
    log_ratio: np.ndarray
    log_fwy: np.ndarray
    disturbance: np.ndarray
    disturbance_alt: np.ndarray
    min_scale: float


def _integrands(model: LoopModel, cl: ClosedLoop, grid: FrequencyGrid) -> _Integrands:
    sw, sv, sy = _loop_spectra(model, cl, grid)
    ratio = sensitivity_ratio(sy, sw)

    omegas = grid.omegas
    fwy2 = np.abs(freq_response_array(cl.f_wy, omegas)) ** 2
    fvy2 = np.abs(freq_response_array(cl.f_vy, omegas)) ** 2
    h2 = np.abs(freq_response_array(model.feedback_filter, omegas)) ** 2

    for label, vals in (("sensitivity ratio", ratio.values**2), ("|f_wy|^2", fwy2)):
        nonpos = vals <= 0.0
        if np.any(nonpos):
            k = int(np.argmax(nonpos))
            raise LogDomainError(
                f"{label} vanishes at omega={omegas[k]!r}",
                omega=float(omegas[k]),
                value=float(vals[k]),
            )

    denom = fwy2 * sw.values
    tiny = denom <= 1e-300
    if np.any(tiny):
        k = int(np.argmax(tiny))
        raise SingularityError(
            f"|f_wy|^2 * S_W vanishes at omega={omegas[k]!r}",
            omega=float(omegas[k]),
        )

    return _Integrands(
        grid=grid,
        log_ratio=np.log(ratio.values),
        log_fwy=0.5 * np.log(fwy2),
        disturbance=0.5 * np.log1p(h2 * sv.values / sw.values),
        disturbance_alt=0.5 * np.log1p(fvy2 * sv.values / denom),
        min_scale=float(min(np.min(ratio.values**2), np.min(fwy2))),
    )


def bode_term_analytic(cl: ClosedLoop, plant: TransferFunction) -> float:
    """Discrete-time Bode sensitivity value: sum of ln max(1, |lambda|) over
    the plant poles. Matches the quadrature of log|f_wy| when the loop gain
    is strictly proper, the rest of the loop is stable, and nothing unstable
    cancels. cl is accepted for the stability precondition it documents; the
    value depends on the plant poles alone."""
    del cl
    return float(sum(math.log(max(1.0, abs(p))) for p in plant.poles()))


def white_noise_disturbance_term(sigma_v2: float, sigma_w2: float) -> float:
    """(1/2) ln(1 + sigma_v^2/sigma_w^2): disturbance term for white noises, H = 1."""
    if not np.isfinite(sigma_w2) or sigma_w2 <= 0.0:
        raise InvalidInputError(f"channel noise variance must be > 0, got {sigma_w2!r}")
    if not np.isfinite(sigma_v2) or sigma_v2 < 0.0:
        raise InvalidInputError(f"disturbance variance must be >= 0, got {sigma_v2!r}")
    return 0.5 * math.log1p(sigma_v2 / sigma_w2)


def decompose(inputs: RateInputs) -> DecompositionReport:
    """Split the directed-information rate into control + disturbance terms.

    Both disturbance-integrand forms (the F-ratio form and the simplified
    |H|^2 form) are evaluated and must agree within 1e-10; the report carries
    the simplified form. Near-singular integrands (samples below 1e-12)
    trigger one 4x grid refinement before a hard error.
    """
    model = inputs.model
    cl = inputs.closed_loop
    grid = inputs.grid

    parts = _integrands(model, cl, grid)
    if parts.min_scale < NEAR_SINGULAR_FLOOR:
        warnings.warn(
            "near-singular log integrand; refining the grid 4x",
            RuntimeWarning,
            stacklevel=2,
        )
        grid = grid.doubled().doubled()
        parts = _integrands(model, cl, grid)
        if parts.min_scale < NEAR_SINGULAR_FLOOR:
            raise SingularityError(
                "log integrand stays near-singular after 4x grid refinement; "
                "a closed-loop zero is too close to the unit circle"
            )

    fine = _integrands(model, cl, grid.doubled())

    total = float(np.mean(parts.log_ratio))
    control = float(np.mean(parts.log_fwy))
    disturbance = float(np.mean(parts.disturbance))
    disturbance_alt = float(np.mean(parts.disturbance_alt))
    if abs(disturbance - disturbance_alt) > CROSS_CHECK_TOL:
        raise ConsistencyError(
            "the two disturbance-integrand forms disagree: "
            f"{disturbance!r} vs {disturbance_alt!r}"
        )

    estimate = max(
        abs(float(np.mean(fine.log_ratio)) - total),
        abs(float(np.mean(fine.log_fwy)) - control),
        abs(float(np.mean(fine.disturbance)) - disturbance),
    )

    return DecompositionReport(
        total_rate=total,
        control_term=control,
        disturbance_term=disturbance,
        residual=total - control - disturbance,
        bode_analytic=bode_term_analytic(cl, model.plant),
        grid_points=grid.n_points,
        convergence_estimate=estimate,
    )


@dataclass(frozen=True)
class IndependenceReport:
    """Disturbance terms of one loop under several stabilizing controllers."""

    disturbance_terms: tuple[float, ...]
    max_deviation: float
    passed: bool
    tolerance: float = 1e-9

    def as_dict(self) -> dict:
        return {
            "disturbance_terms": list(self.disturbance_terms),
            "max_deviation": self.max_deviation,
            "passed": self.passed,
            "tolerance": self.tolerance,
        }


def controller_independence_check(
    model: LoopModel,
    alt_controllers: Sequence[TransferFunction],
    grid: FrequencyGrid | None = None,
) -> IndependenceReport:
    """Recompute the disturbance term with each controller swapped in.

    The simplified integrand contains no controller, so the terms must agree;
    PASS iff the max pairwise deviation is below 1e-9. A non-stabilizing
    alternative raises, naming its position in the list.
    """
    grid = grid or FrequencyGrid()
    terms = []
    for i, k in enumerate(alt_controllers):
        candidate = replace(model, controller=k)
        report = is_stabilizing(candidate)
        if not report.is_stabilizing:
            raise UnstableLoopError(
                f"controller #{i} (num={k.num.coeffs}, den={k.den.coeffs}) "
                "does not stabilize the loop",
                poles=report.offending_poles,
            )
        terms.append(decompose(RateInputs(candidate, grid)).disturbance_term)
    deviation = max(terms) - min(terms) if terms else 0.0
    return IndependenceReport(
        disturbance_terms=tuple(terms),
        max_deviation=deviation,
        passed=deviation < 1e-9,
    )


def export_integrands(inputs: RateInputs, target) -> None:
    """Write per-frequency integrand samples as CSV: columns omega, log_Syw,
    log_Fwy, disturbance_integrand."""
    parts = _integrands(inputs.model, inputs.closed_loop, inputs.grid)
    own = isinstance(target, (str, bytes)) or hasattr(target, "__fspath__")
    fh = open(target, "w", newline="") if own else target
    try:
        writer = csv.writer(fh)
        writer.writerow(["omega", "log_Syw", "log_Fwy", "disturbance_integrand"])
        for row in zip(
            inputs.grid.omegas, parts.log_ratio, parts.log_fwy, parts.disturbance
        ):
            writer.writerow([f"{x:.12g}" for x in row])
    finally:
        if own:
            fh.close()


def integrands_csv_string(inputs: RateInputs) -> str:
    buf = io.StringIO()
    export_integrands(inputs, buf)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Randomized loop generation for the identity / proof-chain suites.


def _random_poles(rng: np.random.Generator, count: int, lo: float, hi: float):
    """count poles with magnitudes in [lo, hi], conjugate-closed."""
    poles: list[complex] = []
    while len(poles) < count:
        r = rng.uniform(lo, hi)
        if count - len(poles) >= 2 and rng.random() < 0.4:
            th = rng.uniform(0.15, math.pi - 0.15)
            poles.extend([r * complex(math.cos(th), math.sin(th)),
                          r * complex(math.cos(th), -math.sin(th))])
        else:
            poles.append(complex(rng.choice([-1.0, 1.0]) * r))
    return poles


def _poly_from_poles(poles) -> list[float]:
    """Ascending delay-variable coefficients of prod (1 - p*d)."""
    c = np.array([1.0 + 0j])
    for p in poles:
        c = np.convolve(c, np.array([1.0, -p]))
    return [float(x) for x in c.real]


def _random_noise(rng: np.random.Generator, allow_zero: bool) -> NoiseSpec:
    variance = 0.0 if (allow_zero and rng.random() < 0.15) else rng.uniform(0.3, 3.0)
    if variance > 0.0 and rng.random() < 0.4:
        c = rng.uniform(-0.6, 0.6)
        shape = tf([1.0], [1.0, -c]) if rng.random() < 0.5 else tf([1.0, -c])
        return colored(variance, shape)
    return white(variance)


def random_stabilized_loop(rng: np.random.Generator) -> LoopModel:
    """Draw a random loop: stable or unstable plant (stabilized by pole
    placement when needed), random stable feedback filter, random noise
    specs. Closed-loop poles and controller poles are kept away from the
    unit circle so spectra stay nonsingular."""
    n = int(rng.integers(1, 4))
    unstable_plant = rng.random() < 0.5
    if unstable_plant:
        n_unstable = int(rng.integers(1, n + 1))
        poles = _random_poles(rng, n_unstable, 1.1, 2.5) + _random_poles(
            rng, n - n_unstable, 0.0, 0.7
        )
    else:
        poles = _random_poles(rng, n, 0.0, 0.7)
    rng.shuffle(poles)

    num = [0.0, float(rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0]))]
    if n >= 2 and rng.random() < 0.5:
        num.append(float(rng.uniform(-0.8, 0.8)))
    plant = tf(num, _poly_from_poles(poles))

    if rng.random() < 0.4:
        feedback = tf([1.0])
    else:
        feedback = tf([1.0, float(rng.uniform(-0.9, 0.9))],
                      [1.0, float(rng.uniform(-0.5, 0.5))])

    path = plant * feedback
    while True:
        if not unstable_plant and rng.random() < 0.3:
            controller = tf([0.0]) if rng.random() < 0.3 else tf(
                [float(rng.uniform(-0.3, 0.3))]
            )
        else:
            m = path.den.degree
            targets = _random_poles(rng, 2 * m - 1, 0.0, 0.5)
            try:
                controller = pole_placement_controller(path, targets)
            except InvalidInputError:
                continue
            if any(abs(abs(p) - 1.0) < 0.05 for p in controller.poles()):
                continue

        model = LoopModel(
            plant=plant,
            controller=controller,
            feedback_filter=feedback,
            channel_noise=_random_noise(rng, allow_zero=False),
            output_disturbance=_random_noise(rng, allow_zero=True),
        )
        if is_stabilizing(model).is_stabilizing:
            return model


@dataclass(frozen=True)
class SuiteCase:
    """One randomized-suite evaluation: the loop, its decomposition, and the
    gap in the entropy-difference route to the same rate."""

    model: LoopModel
    report: DecompositionReport
    proof_chain_gap: float


def run_identity_suite(
    n_cases: int, seed: int = 0, grid: FrequencyGrid | None = None
) -> list[SuiteCase]:
    """Decompose n_cases random stabilized loops, cross-checking on each that
    the rate equals the entropy-rate difference h(Y) - h(W)."""
    grid = grid or FrequencyGrid()
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(n_cases):
        model = random_stabilized_loop(rng)
        inputs = RateInputs(model, grid)
        report = decompose(inputs)
        cl = inputs.closed_loop
        sw, _, sy = _loop_spectra(model, cl, grid)
        chain = gaussian_entropy_rate(sy) - gaussian_entropy_rate(sw)
        cases.append(
            SuiteCase(
                model=model,
                report=report,
                proof_chain_gap=abs(report.total_rate - chain),
            )
        )
    return cases
