"""Rayleigh-Lamb dispersion solver for the zeroth symmetric and antisymmetric modes.

Roots of the real characteristic equations are bracketed by a sign-change scan
in phase velocity and refined by bisection. Each branch is traced upward in
frequency, warm-started from the previous bin's phase velocity.
"""

import logging
from collections.abc import Sequence

import numpy as np
from scipy import optimize

from wavelocate.core.errors import InvalidParameter, NoRootFound
from wavelocate.core.interfaces import DispersionModel
from wavelocate.core.models import (
    DispersionSpec,
    DispersionTable,
    FloatArray,
    FrequencyGrid,
    Mode,
    PlateMaterial,
)

logger = logging.getLogger(__name__)

SCAN_POINTS = 2000
WARM_POINTS = 64
WARM_SPANS = (0.05, 0.5)
MAX_KH = 200.0  # keeps cosh/sinh of the evanescent terms finite
BISECT_RTOL = 1e-10
JUMP_FACTOR = 3.0
JUMP_WINDOW = 5


def _cos_term(s: FloatArray, h: float) -> FloatArray:
    """cos(sqrt(s) h), continued to cosh for s < 0."""
    r = np.sqrt(np.abs(s))
    return np.where(s >= 0, np.cos(r * h), np.cosh(r * h))


def _sinc_term(s: FloatArray, h: float) -> FloatArray:
    """sin(sqrt(s) h) / sqrt(s), continued to sinh for s < 0 and to h at s = 0."""
    r = np.sqrt(np.abs(s))
    safe_r = np.where(r > 0, r, 1.0)
    ratio = np.where(s >= 0, np.sin(r * h), np.sinh(r * h)) / safe_r
    return np.where(r > 0, ratio, h)


def _psin_term(s: FloatArray, h: float) -> FloatArray:
    """sqrt(s) sin(sqrt(s) h), continued to -sqrt(-s) sinh(sqrt(-s) h) for s < 0."""
    r = np.sqrt(np.abs(s))
    return np.where(s >= 0, r * np.sin(r * h), -r * np.sinh(r * h))


def characteristic_terms(
    mode: Mode, omega: float, kappa: FloatArray, material: PlateMaterial
) -> tuple[FloatArray, FloatArray]:
    """The two real terms whose sum vanishes on a Rayleigh-Lamb branch.

    Symmetric:      (q^2 - k^2)^2 sin(qh) cos(ph) + 4 k^2 p q sin(ph) cos(qh)
    Antisymmetric:  (q^2 - k^2)^2 cos(qh) sin(ph) + 4 k^2 p q sin(qh) cos(ph)

    with h the half thickness, each divided by the factor (q or p) that makes
    it real whether p and q are real or imaginary.
    """
    h = material.thickness / 2
    kappa = np.asarray(kappa, dtype=np.float64)
    k2 = kappa**2
    p2 = (omega / material.longitudinal_velocity) ** 2 - k2
    q2 = (omega / material.shear_velocity) ** 2 - k2
    lead = (q2 - k2) ** 2
    with np.errstate(over="ignore", invalid="ignore"):
        if mode is Mode.S0:
            first = lead * _sinc_term(q2, h) * _cos_term(p2, h)
            second = 4 * k2 * _psin_term(p2, h) * _cos_term(q2, h)
        else:
            first = lead * _cos_term(q2, h) * _sinc_term(p2, h)
            second = 4 * k2 * _psin_term(q2, h) * _cos_term(p2, h)
    return first, second


def rayleigh_lamb_residual(
    mode: Mode, omega: float, kappa: FloatArray, material: PlateMaterial
) -> FloatArray:
    """Characteristic function normalized by the magnitude of its terms, in [-1, 1]."""
    first, second = characteristic_terms(mode, omega, kappa, material)
    scale = np.abs(first) + np.abs(second)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(scale > 0, (first + second) / scale, 0.0)


def _sign_changes(values: FloatArray) -> FloatArray:
    finite = np.isfinite(values[:-1]) & np.isfinite(values[1:])
    crossing = values[:-1] * values[1:] <= 0
    both_zero = (values[:-1] == 0) & (values[1:] == 0)
    return np.nonzero(finite & crossing & ~both_zero)[0]


def find_branch_jumps(kappa: FloatArray) -> list[int]:
    """Indices of steps larger than JUMP_FACTOR times the local median step."""
    steps = np.abs(np.diff(kappa))
    if steps.size < 3:
        return []
    jumps = []
    for i, step in enumerate(steps):
        local = np.median(steps[max(0, i - JUMP_WINDOW) : i + JUMP_WINDOW + 1])
        if local > 0 and step > JUMP_FACTOR * local:
            jumps.append(i)
    return jumps


class RayleighLambModel(DispersionModel):
    """S0/A0 wavenumbers of a free isotropic plate."""

    def __init__(self, material: PlateMaterial, modes: Sequence[str] = ("S0", "A0")) -> None:
        """Initialize the solver.

        Args:
            material: Plate material.
            modes: Subset of {"S0", "A0"} to retain, in output order.
        """
        try:
            self._modes = [Mode(m) for m in modes]
        except ValueError:
            raise InvalidParameter(
                f"plate.modes must be a subset of S0, A0, got {list(modes)}"
            ) from None
        if not self._modes or len(set(self._modes)) != len(self._modes):
            raise InvalidParameter(f"plate.modes must be non-empty and unique, got {list(modes)}")
        self._material = material

    @classmethod
    def from_spec(cls, spec: DispersionSpec, material: PlateMaterial) -> "RayleighLambModel":
        return cls(material, spec.modes)

    @property
    def name(self) -> str:
        return "rayleigh_lamb"

    def compute(self, grid: FrequencyGrid) -> DispersionTable:
        """Solve every retained mode on the grid (kappa = 0 at omega = 0, odd extension)."""
        freqs = grid.frequencies
        magnitudes = np.abs(freqs)
        nonzero = magnitudes > 1e-9 * grid.spacing
        positive = np.unique(magnitudes[nonzero])
        lookup = np.searchsorted(positive, magnitudes[nonzero])
        signs = np.sign(freqs[nonzero])

        kappa = np.zeros((len(self._modes), grid.num_points))
        for row, mode in enumerate(self._modes):
            branch = self._trace_branch(mode, 2 * np.pi * positive)
            kappa[row, nonzero] = signs * branch[lookup]
            logger.debug("traced %s over %d positive bins", mode.value, positive.size)

        return DispersionTable(grid, tuple(m.value for m in self._modes), kappa)

    def _trace_branch(self, mode: Mode, omegas: FloatArray) -> FloatArray:
        """Wavenumbers of one branch at ascending positive angular frequencies."""
        kappa = np.empty_like(omegas)
        c_prev: float | None = None

        for i, omega in enumerate(omegas):
            bracket = None
            if c_prev is not None:
                for span in WARM_SPANS:
                    bracket = self._nearest_bracket(mode, float(omega), c_prev, span)
                    if bracket is not None:
                        break
            if bracket is None:
                bracket = self._lowest_bracket(mode, float(omega))
            if bracket is None:
                raise NoRootFound(
                    f"no {mode.value} root bracketed at {omega / (2 * np.pi):.6g} Hz; "
                    "check material constants and grid resolution"
                )
            c_prev = self._refine(mode, float(omega), *bracket)
            kappa[i] = omega / c_prev

        jumps = find_branch_jumps(kappa)
        if jumps:
            where = omegas[jumps[0]] / (2 * np.pi)
            raise NoRootFound(f"{mode.value} branch jumps near {where:.6g} Hz (mode hopping)")
        return kappa

    def _residual_at(self, mode: Mode, omega: float, speeds: FloatArray) -> FloatArray:
        return rayleigh_lamb_residual(mode, omega, omega / speeds, self._material)

    def _lowest_bracket(self, mode: Mode, omega: float) -> tuple[float, float] | None:
        """Bracket of the slowest root: the fundamental mode of its family."""
        h = self._material.thickness / 2
        c_lo = max(0.01 * self._material.shear_velocity, omega * h / MAX_KH)
        c_hi = 1.2 * self._material.longitudinal_velocity
        speeds = np.geomspace(c_lo, c_hi, SCAN_POINTS)
        idx = _sign_changes(self._residual_at(mode, omega, speeds))
        if idx.size == 0:
            return None
        return float(speeds[idx[0]]), float(speeds[idx[0] + 1])

    def _nearest_bracket(
        self, mode: Mode, omega: float, c_prev: float, span: float
    ) -> tuple[float, float] | None:
        """Bracket of the root closest to the previous bin's phase velocity."""
        speeds = c_prev * np.geomspace(1 / (1 + span), 1 + span, WARM_POINTS)
        idx = _sign_changes(self._residual_at(mode, omega, speeds))
        if idx.size == 0:
            return None
        mids = 0.5 * (speeds[idx] + speeds[idx + 1])
        best = idx[np.argmin(np.abs(mids - c_prev))]
        return float(speeds[best]), float(speeds[best + 1])

    def _refine(self, mode: Mode, omega: float, lo: float, hi: float) -> float:
        def residual(c: float) -> float:
            return float(self._residual_at(mode, omega, np.array([c]))[0])

        return float(optimize.bisect(residual, lo, hi, xtol=1e-12, rtol=BISECT_RTOL, maxiter=200))


def solve_rayleigh_lamb(
    material: PlateMaterial, grid: FrequencyGrid, modes: Sequence[str] = ("S0", "A0")
) -> DispersionTable:
    """Rayleigh-Lamb wavenumbers of the requested zeroth-order modes on a grid."""
    return RayleighLambModel(material, modes).compute(grid)
