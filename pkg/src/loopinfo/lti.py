"""Rational transfer-function algebra for the feedback loop.

Everything is expressed in the unit-delay variable d = z^{-1}: a coefficient
list [c0, c1, c2] means c0 + c1*d + c2*d**2. Reading that same list as
descending powers of z gives the z-plane polynomial, which is where poles,
zeros and stability live. Causality means the denominator has a nonzero
constant term.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import (
    ConsistencyError,
    DegenerateLoopError,
    InvalidInputError,
    SingularityError,
)

if TYPE_CHECKING:
    from .spectral import NoiseSpec

# Stability margin: a pole counts as stable only if |z| < 1 - STABILITY_MARGIN.
STABILITY_MARGIN = 1e-9
# Two roots within this z-plane distance are treated as a pole/zero cancellation.
CANCEL_TOL = 1e-9


def _strip_trailing_zeros(coeffs: Sequence[float]) -> tuple[float, ...]:
    c = list(float(x) for x in coeffs)
    while len(c) > 1 and c[-1] == 0.0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial in the delay variable, ascending coefficients."""

    coeffs: tuple[float, ...]

    def __init__(self, coeffs: Sequence[float]):
        if len(coeffs) == 0:
            raise InvalidInputError("polynomial needs at least one coefficient")
        c = _strip_trailing_zeros(coeffs)
        if not all(np.isfinite(x) for x in c):
            raise InvalidInputError(f"non-finite polynomial coefficients: {c}")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return self.coeffs == (0.0,)

    def __call__(self, x: complex) -> complex:
        return complex(npoly.polyval(x, self.coeffs))

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(npoly.polymul(self.coeffs, other.coeffs))

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(npoly.polyadd(self.coeffs, other.coeffs))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(npoly.polysub(self.coeffs, other.coeffs))

    def scaled(self, a: float) -> "Polynomial":
        return Polynomial(tuple(a * c for c in self.coeffs))


def poly_roots(p: Polynomial) -> list[complex]:
    """Roots of p read as a z-plane polynomial (ascending-in-d = descending-in-z).

    Delay factors (zero constant term) put roots at infinity, which are
    omitted; every returned root is finite. Uses the companion-matrix
    eigensolver under the hood.
    """
    if not all(np.isfinite(c) for c in p.coeffs):
        raise InvalidInputError("non-finite coefficients")
    if p.degree == 0:
        return []
    return [complex(r) for r in np.roots(p.coeffs)]


def _poly_from_z_roots(z_roots, constant: float) -> Polynomial:
    """Rebuild ascending-d coefficients as constant * prod(1 - z_i*d).

    Anchoring at the constant term keeps the polynomial's value exact when a
    root is dropped during cancellation — the remaining factors are untouched.
    """
    c = np.array([1.0 + 0j])
    for z in z_roots:
        c = np.convolve(c, np.array([1.0, -z]))
    c = constant * c
    imag_mag = float(np.max(np.abs(c.imag)))
    scale = float(np.max(np.abs(c))) or 1.0
    if imag_mag > 1e-9 * scale:
        raise ConsistencyError(
            "pole/zero cancellation left a complex coefficient residue "
            f"({imag_mag:.3e}); roots were not conjugate-closed"
        )
    return Polynomial(c.real)


def _reduce_pair(num: Polynomial, den: Polynomial) -> tuple[Polynomial, Polynomial]:
    """Cancel common roots (z-plane distance < CANCEL_TOL), normalize den(0) = 1."""
    if den.is_zero:
        raise InvalidInputError("denominator is the zero polynomial")
    if den.coeffs[0] == 0.0:
        raise InvalidInputError(
            "denominator constant term is zero; the map is not causal/well-posed"
        )
    if num.is_zero:
        return Polynomial((0.0,)), Polynomial((1.0,))

    # pure-delay prefactor of the numerator: num = d^delay * q with q(0) != 0
    delay = next(i for i, c in enumerate(num.coeffs) if c != 0.0)
    q = Polynomial(num.coeffs[delay:])
    nroots = poly_roots(q)
    droots = poly_roots(den)
    cancel_n: list[int] = []
    cancel_d: list[int] = []
    for j, zb in enumerate(droots):
        best = None
        best_dist = CANCEL_TOL
        for i, za in enumerate(nroots):
            if i in cancel_n:
                continue
            dist = abs(za - zb)
            if dist < best_dist:
                best, best_dist = i, dist
        if best is not None:
            cancel_n.append(best)
            cancel_d.append(j)

    if cancel_d:
        keep_n = [a for i, a in enumerate(nroots) if i not in cancel_n]
        keep_d = [b for j, b in enumerate(droots) if j not in cancel_d]
        reduced = _poly_from_z_roots(keep_n, q.coeffs[0])
        num = Polynomial((0.0,) * delay + reduced.coeffs)
        den = _poly_from_z_roots(keep_d, den.coeffs[0])

    d0 = den.coeffs[0]
    return num.scaled(1.0 / d0), den.scaled(1.0 / d0)


@dataclass(frozen=True)
class TransferFunction:
    """Reduced rational map num(d)/den(d) with den(0) = 1.

    Construction cancels pole/zero pairs closer than CANCEL_TOL in the z-plane
    and rescales, so two equal systems built along different routes compare
    equal coefficient-wise to rounding.
    """

    num: Polynomial
    den: Polynomial

    def __init__(self, num, den):
        if not isinstance(num, Polynomial):
            num = Polynomial(num)
        if not isinstance(den, Polynomial):
            den = Polynomial(den)
        num, den = _reduce_pair(num, den)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __mul__(self, other: "TransferFunction") -> "TransferFunction":
        return TransferFunction(self.num * other.num, self.den * other.den)

    def reciprocal(self) -> "TransferFunction":
        if self.num.is_zero:
            raise InvalidInputError("cannot invert the zero system")
        return TransferFunction(self.den, self.num)

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    @property
    def relative_degree(self) -> int:
        """Number of pure delays around the map (index of first nonzero num coeff)."""
        if self.num.is_zero:
            return 0
        return next(i for i, c in enumerate(self.num.coeffs) if c != 0.0)

    def poles(self) -> list[complex]:
        """z-plane poles, including origin poles from delay excess."""
        p = poly_roots(self.den)
        excess = self.num.degree - self.den.degree
        if excess > 0 and not self.num.is_zero:
            p += [0j] * excess
        return p

    def zeros(self) -> list[complex]:
        """z-plane zeros, including origin zeros from denominator degree excess."""
        if self.num.is_zero:
            return []
        z = poly_roots(self.num)
        excess = self.den.degree - self.num.degree
        if excess > 0:
            z += [0j] * excess
        return z


def tf(num: Sequence[float], den: Sequence[float] = (1.0,)) -> TransferFunction:
    """Shorthand constructor from ascending delay-variable coefficient lists."""
    return TransferFunction(Polynomial(num), Polynomial(den))


TF_ONE = tf([1.0])
TF_ZERO = tf([0.0])


def freq_response(tf_: TransferFunction, omega: float) -> complex:
    """Evaluate num(e^{-j omega}) / den(e^{-j omega})."""
    e = cmath.exp(-1j * omega)
    d = tf_.den(e)
    if abs(d) < 1e-12:
        raise SingularityError(
            f"denominator vanishes on the unit circle at omega={omega!r}", omega=omega
        )
    return tf_.num(e) / d


def freq_response_array(tf_: TransferFunction, omegas: np.ndarray) -> np.ndarray:
    """Vectorized unit-circle response over an array of frequencies."""
    e = np.exp(-1j * np.asarray(omegas, dtype=float))
    num = npoly.polyval(e, tf_.num.coeffs)
    den = npoly.polyval(e, tf_.den.coeffs)
    bad = np.abs(den) < 1e-12
    if np.any(bad):
        w = float(np.asarray(omegas)[bad][0])
        raise SingularityError(
            f"denominator vanishes on the unit circle at omega={w!r}", omega=w
        )
    return num / den


@dataclass(frozen=True)
class LoopModel:
    """The full loop interconnection: u -> P -> (+v) -> H -> z -> (+w) -> y -> K -> u.

    Positive-feedback convention: the return difference is 1 - P*K*H, so the
    usual negative-feedback loop is obtained by negating the controller. The
    loop gain must be strictly proper (at least one sample of delay around the
    loop) for the sample-by-sample recursion to be well posed.
    """

    plant: TransferFunction
    controller: TransferFunction
    feedback_filter: TransferFunction
    channel_noise: "NoiseSpec"
    output_disturbance: "NoiseSpec"
    initial_state: tuple[float, ...] = field(default=())

    def __post_init__(self):
        feedthrough = (
            self.plant.num.coeffs[0]
            * self.controller.num.coeffs[0]
            * self.feedback_filter.num.coeffs[0]
        )
        if feedthrough != 0.0:
            raise InvalidInputError(
                "loop gain P*K*H must be strictly proper "
                "(at least one of P, K, H needs a leading zero numerator coefficient)"
            )
        object.__setattr__(self, "initial_state", tuple(float(x) for x in self.initial_state))

    def loop_gain_raw(self) -> tuple[Polynomial, Polynomial]:
        """Unreduced numerator/denominator of L = P*K*H."""
        num = self.plant.num * self.controller.num * self.feedback_filter.num
        den = self.plant.den * self.controller.den * self.feedback_filter.den
        return num, den


@dataclass(frozen=True)
class ClosedLoop:
    """Closed-loop maps of a LoopModel.

    f_wy: channel noise w -> loop output y, equal to 1/(1 - L).
    f_vy: output disturbance v -> loop output y, equal to H/(1 - L).
    sensitivity: same rational function as f_wy.
    char_poly: reduced numerator of 1 - L (delay-variable form); origin poles
    coming from delay excess appear in closed_loop_poles but have no
    delay-variable encoding.
    """

    f_wy: TransferFunction
    f_vy: TransferFunction
    sensitivity: TransferFunction
    char_poly: Polynomial
    closed_loop_poles: tuple[complex, ...]
    is_stable: bool


def close_loop(model: LoopModel) -> ClosedLoop:
    """Form the closed-loop transfer functions and pole set."""
    num_l, den_l = model.loop_gain_raw()
    char_raw = den_l - num_l
    if char_raw.is_zero:
        raise DegenerateLoopError("1 - P*K*H is identically zero")
    one_minus_l = TransferFunction(char_raw, den_l)
    f_wy = one_minus_l.reciprocal()
    f_vy = model.feedback_filter * f_wy
    poles = tuple(f_wy.poles())
    stable = all(abs(p) < 1.0 - STABILITY_MARGIN for p in poles)
    return ClosedLoop(
        f_wy=f_wy,
        f_vy=f_vy,
        sensitivity=f_wy,
        char_poly=one_minus_l.num,
        closed_loop_poles=poles,
        is_stable=stable,
    )


@dataclass(frozen=True)
class StabilityReport:
    """Outcome of the internal-stability check.

    closed_loop_poles come from the unreduced return difference, so modes
    hidden by pole/zero cancellation between the P, K, H factors still show
    up. unstable_cancellations lists unstable factor poles that a factor zero
    cancels within CANCEL_TOL; any such loop is rejected as unstabilizable.
    """

    is_stabilizing: bool
    closed_loop_poles: tuple[complex, ...]
    offending_poles: tuple[complex, ...]
    unstable_cancellations: tuple[complex, ...]
    degenerate: bool = False


def is_stabilizing(model: LoopModel) -> StabilityReport:
    """Check internal stability of the loop; never raises."""
    num_l, den_l = model.loop_gain_raw()
    char_raw = den_l - num_l
    if char_raw.is_zero:
        return StabilityReport(False, (), (), (), degenerate=True)

    # delay excess around the loop shows up as z-plane poles at the origin
    loop_order = max(num_l.degree if not num_l.is_zero else 0, den_l.degree)
    origin = loop_order - char_raw.degree
    poles = tuple(poly_roots(char_raw)) + (0j,) * origin
    unstable = tuple(p for p in poles if abs(p) >= 1.0 - STABILITY_MARGIN)

    factors = (model.plant, model.controller, model.feedback_filter)
    product_zeros: list[complex] = []
    for f in factors:
        if not f.num.is_zero:
            product_zeros.extend(poly_roots(f.num))
    cancelled: list[complex] = []
    for f in factors:
        for p in f.poles():
            if abs(p) < 1.0 - STABILITY_MARGIN:
                continue
            if any(abs(p - z) < CANCEL_TOL for z in product_zeros):
                cancelled.append(p)

    ok = not unstable and not cancelled
    return StabilityReport(
        is_stabilizing=ok,
        closed_loop_poles=poles,
        offending_poles=tuple(unstable) + tuple(cancelled),
        unstable_cancellations=tuple(cancelled),
    )


def pole_placement_controller(
    path: TransferFunction, target_poles: Sequence[complex]
) -> TransferFunction:
    """Controller K placing the closed-loop poles of 1 - path*K at target_poles.

    Solves the Diophantine equation den*x - num*y = char over coefficient
    vectors, with char(d) the product of (1 - lambda*d) factors. The path is
    whatever K multiplies in the loop gain (P itself, or P*H). For a path of
    denominator degree n the controller has degree n - 1 and exactly 2n - 1
    poles must be supplied (conjugate-closed).

    Raises InvalidInputError if the path is static, the pole count is wrong,
    or the Sylvester system is singular (non-coprime path).
    """
    n = path.den.degree
    if n < 1:
        raise InvalidInputError("pole placement needs a path with at least one pole")
    if path.num.degree > n:
        raise InvalidInputError(
            "path numerator delay-degree exceeds denominator degree; "
            "absorb the extra delay into the path before placement"
        )
    want = 2 * n - 1
    targets = [complex(p) for p in target_poles]
    if len(targets) != want:
        raise InvalidInputError(f"expected {want} target poles, got {len(targets)}")

    char = np.array([1.0 + 0j])
    for lam in targets:
        char = npoly.polymul(char, np.array([1.0, -lam]))
    if np.max(np.abs(char.imag)) > 1e-9 * max(np.max(np.abs(char)), 1.0):
        raise InvalidInputError("target poles are not conjugate-closed")
    char = char.real

    size = 2 * n
    dp = np.zeros(size)
    dp[: len(path.den.coeffs)] = path.den.coeffs
    npv = np.zeros(size)
    npv[: len(path.num.coeffs)] = path.num.coeffs

    a = np.zeros((size, size))
    for j in range(n):  # columns for x (den of K), degree n-1
        a[j : j + n + 1, j] = dp[: n + 1]
    for j in range(n):  # columns for y (num of K), degree n-1
        a[j : j + n + 1, n + j] = -npv[: n + 1]
    rhs = np.zeros(size)
    rhs[: len(char)] = char

    try:
        sol = np.linalg.solve(a, rhs)
    except np.linalg.LinAlgError as exc:
        raise InvalidInputError(f"pole placement system is singular: {exc}") from exc
    x, y = sol[:n], sol[n:]
    if abs(x[0]) < 1e-12:
        raise InvalidInputError("placement produced a non-causal controller")
    return TransferFunction(Polynomial(y), Polynomial(x))
