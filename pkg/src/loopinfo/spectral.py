"""Power spectral densities and log-spectral integrals on a uniform grid.

Spectra are sampled arrays over [-pi, pi), not symbolic objects, so the
analytic path and the Welch-estimated path share one integral engine. The
normalization convention throughout: the grid mean of a PSD equals the
process variance, i.e. (1/2pi) * integral of S over [-pi, pi).
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import (
    DivisionDomainError,
    InvalidInputError,
    LogDomainError,
    SingularityError,
    UnstableLoopError,
)
from .lti import (
    STABILITY_MARGIN,
    ClosedLoop,
    TransferFunction,
    freq_response_array,
)

DEFAULT_GRID_POINTS = 4096

# Below this, a log integrand sample is treated as near-singular: integrable
# in principle, but the fixed grid cannot certify accuracy.
NEAR_SINGULAR_FLOOR = 1e-12


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform samples of [-pi, pi), power-of-two count."""

    n_points: int = DEFAULT_GRID_POINTS

    def __post_init__(self):
        n = self.n_points
        if n < 64 or (n & (n - 1)) != 0:
            raise InvalidInputError(
                f"grid size must be a power of two >= 64, got {n}"
            )

    @cached_property
    def omegas(self) -> np.ndarray:
        w = -np.pi + 2.0 * np.pi * np.arange(self.n_points) / self.n_points
        w.flags.writeable = False
        return w

    def doubled(self) -> "FrequencyGrid":
        return FrequencyGrid(2 * self.n_points)


@dataclass(frozen=True, eq=False)
class SpectrumSamples:
    """Nonnegative, even-symmetric PSD samples on a FrequencyGrid."""

    grid: FrequencyGrid
    values: np.ndarray

    def __init__(self, grid: FrequencyGrid, values):
        v = np.asarray(values, dtype=float)
        if v.shape != (grid.n_points,):
            raise InvalidInputError(
                f"expected {grid.n_points} samples, got shape {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("spectrum contains non-finite values")
        if np.any(v < 0.0):
            k = int(np.argmin(v))
            raise InvalidInputError(
                f"negative PSD value {v[k]!r} at omega={grid.omegas[k]!r}"
            )
        mirrored = np.roll(v[::-1], 1)
        if not np.allclose(v, mirrored, rtol=1e-9, atol=1e-300):
            raise InvalidInputError("spectrum is not even-symmetric on the grid")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class NoiseSpec:
    """Stationary Gaussian source model: flat PSD, or white noise through a
    stable shaping filter.

    variance is the white PSD level, or the driving variance ahead of the
    shaping filter. Zero variance is allowed (a silent source); operations
    that need a strictly positive spectrum reject it at call time.
    """

    kind: str
    variance: float
    shaping: TransferFunction | None = None

    def __post_init__(self):
        if self.kind not in ("white", "colored"):
            raise InvalidInputError(f"noise kind must be white|colored, got {self.kind!r}")
        if not np.isfinite(self.variance) or self.variance < 0.0:
            raise InvalidInputError(f"noise variance must be >= 0, got {self.variance!r}")
        if self.kind == "colored":
            if self.shaping is None:
                raise InvalidInputError("colored noise needs a shaping filter")
            unstable = [p for p in self.shaping.poles() if abs(p) >= 1.0 - STABILITY_MARGIN]
            if unstable:
                raise InvalidInputError(
                    f"shaping filter has poles on/outside the unit circle: {unstable}"
                )
        elif self.shaping is not None:
            raise InvalidInputError("white noise takes no shaping filter")


def white(variance: float) -> NoiseSpec:
    return NoiseSpec("white", variance)


def colored(variance: float, shaping: TransferFunction) -> NoiseSpec:
    return NoiseSpec("colored", variance, shaping)


def noise_psd(spec: NoiseSpec, grid: FrequencyGrid) -> SpectrumSamples:
    """PSD of the source on the grid: sigma^2, or sigma^2 * |G|^2."""
    if spec.kind == "white":
        return SpectrumSamples(grid, np.full(grid.n_points, spec.variance))
    g = freq_response_array(spec.shaping, grid.omegas)
    mag = np.abs(g)
    if np.any(mag <= 1e-9):
        k = int(np.argmin(mag))
        raise SingularityError(
            f"shaping filter vanishes on the unit circle near omega={grid.omegas[k]!r}",
            omega=float(grid.omegas[k]),
        )
    return SpectrumSamples(grid, spec.variance * mag**2)


def output_psd(
    cl: ClosedLoop, sw: SpectrumSamples, sv: SpectrumSamples
) -> SpectrumSamples:
    """Loop-output PSD: |F_wy|^2 * S_W + |F_vy|^2 * S_V."""
    if sw.grid != sv.grid:
        raise InvalidInputError(
            f"mismatched grids: {sw.grid.n_points} vs {sv.grid.n_points} points"
        )
    if not cl.is_stable:
        raise UnstableLoopError(
            "output PSD is defined only for a stable loop",
            poles=[p for p in cl.closed_loop_poles if abs(p) >= 1.0 - STABILITY_MARGIN],
        )
    omegas = sw.grid.omegas
    fwy = np.abs(freq_response_array(cl.f_wy, omegas)) ** 2
    fvy = np.abs(freq_response_array(cl.f_vy, omegas)) ** 2
    return SpectrumSamples(sw.grid, fwy * sw.values + fvy * sv.values)


def sensitivity_ratio(sa: SpectrumSamples, sb: SpectrumSamples) -> SpectrumSamples:
    """Generalized sensitivity sqrt(S_a / S_b), pointwise on the grid."""
    if sa.grid != sb.grid:
        raise InvalidInputError(
            f"mismatched grids: {sa.grid.n_points} vs {sb.grid.n_points} points"
        )
    tiny = sb.values <= 1e-300
    if np.any(tiny):
        k = int(np.argmax(tiny))
        raise DivisionDomainError(
            f"denominator spectrum vanishes at omega={sb.grid.omegas[k]!r}",
            omega=float(sb.grid.omegas[k]),
        )
    return SpectrumSamples(sa.grid, np.sqrt(sa.values / sb.values))


def log_integral(s: SpectrumSamples) -> float:
    """(1/2pi) * integral of log s(omega) over [-pi, pi).

    Uniform-grid trapezoid rule, which by periodicity reduces to the plain
    mean of the log samples and converges spectrally for integrands analytic
    near the unit circle.
    """
    v = s.values
    bad = v <= 0.0
    if np.any(bad):
        k = int(np.argmax(bad))
        raise LogDomainError(
            f"nonpositive integrand {v[k]!r} at omega={s.grid.omegas[k]!r}",
            omega=float(s.grid.omegas[k]),
            value=float(v[k]),
        )
    if np.any(v < NEAR_SINGULAR_FLOOR):
        warnings.warn(
            "log integrand has near-singular samples (< 1e-12); "
            "the fixed grid cannot certify accuracy",
            RuntimeWarning,
            stacklevel=2,
        )
    return float(np.mean(np.log(v)))


def log_integral_convergence(
    sample: Callable[[FrequencyGrid], SpectrumSamples], grid: FrequencyGrid
) -> tuple[float, float]:
    """Integral on the grid plus the doubled-grid convergence estimate.

    sample must evaluate the same spectrum on any requested grid. Returns
    (value at grid, |value at doubled grid - value at grid|).
    """
    coarse = log_integral(sample(grid))
    fine = log_integral(sample(grid.doubled()))
    return coarse, abs(fine - coarse)


def spectrum_to_csv(s: SpectrumSamples, target) -> None:
    """Write the spectrum as CSV (columns omega, value) to a path or file object."""
    own = isinstance(target, (str, bytes)) or hasattr(target, "__fspath__")
    fh = open(target, "w", newline="") if own else target
    try:
        writer = csv.writer(fh)
        writer.writerow(["omega", "value"])
        for w, v in zip(s.grid.omegas, s.values):
            writer.writerow([f"{w:.12g}", f"{v:.12g}"])
    finally:
        if own:
            fh.close()


def spectrum_csv_string(s: SpectrumSamples) -> str:
    buf = io.StringIO()
    spectrum_to_csv(s, buf)
    return buf.getvalue()
