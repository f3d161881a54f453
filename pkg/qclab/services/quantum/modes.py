"""Plane-wave mode basis of a periodic cubic box.

Mode functions are the c-number coefficients multiplying the ladder operators in the
field expansion: sign "+" pairs with the annihilator, sign "-" (the complex conjugate)
with the creator. Units are Gaussian, with the 1/c factors of the Maxwell equations.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np

from ...core.exceptions import InvalidArgumentError
from ...models.schemas import (
    AmplitudeConvention,
    FieldKind,
    ModeSetSpec,
    Sign,
    SpacetimePoint,
)

logger = logging.getLogger(__name__)

AXES = ("x", "y", "z", "t")
Z_HAT = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True, eq=False)
class Mode:
    n: Tuple[int, int, int]
    k: np.ndarray
    omega: float
    pol_index: int
    pol: np.ndarray
    amplitude: float
    c: float

    @property
    def k_hat(self) -> np.ndarray:
        return self.k / np.linalg.norm(self.k)

    def field_vector(self, field: FieldKind) -> np.ndarray:
        """Coefficient 3-vector of the "+" mode function at the phase origin"""
        if field is FieldKind.E:
            return 1j * self.amplitude * self.pol
        if field is FieldKind.B:
            return 1j * self.amplitude * np.cross(self.k_hat, self.pol)
        return (self.c * self.amplitude / self.omega) * self.pol + 0j


@dataclass(frozen=True, eq=False)
class ModeSet:
    box_length: float
    c: float
    hbar: float
    convention: AmplitudeConvention
    modes: Tuple[Mode, ...]

    def __len__(self) -> int:
        return len(self.modes)

    @property
    def min_wavelength(self) -> float:
        return float(min(2 * np.pi / np.linalg.norm(m.k) for m in self.modes))

    @property
    def longest_period(self) -> float:
        return float(max(2 * np.pi / m.omega for m in self.modes))

    @property
    def box_centre(self) -> np.ndarray:
        return np.full(3, self.box_length / 2)

    def subset(self, indices: Iterable[int]) -> "ModeSet":
        return ModeSet(
            box_length=self.box_length,
            c=self.c,
            hbar=self.hbar,
            convention=self.convention,
            modes=tuple(self.modes[i] for i in indices),
        )


def polarization_vectors(k: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Deterministic transverse pair: pol1 along k x z, pol2 along k x pol1"""
    if k[0] == 0.0 and k[1] == 0.0:
        return np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
    pol1 = np.cross(k, Z_HAT)
    pol1 /= np.linalg.norm(pol1)
    pol2 = np.cross(k, pol1)
    pol2 /= np.linalg.norm(pol2)
    return pol1, pol2


def build_mode_set(
    box_length: float,
    entries: Sequence[Tuple[Sequence[int], int]],
    c: float = 1.0,
    convention: AmplitudeConvention = AmplitudeConvention.UNIT,
    hbar: float = 1.0,
) -> ModeSet:
    """Build the ordered mode set for `(n, pol_index)` entries"""
    if box_length <= 0 or c <= 0 or hbar <= 0:
        raise InvalidArgumentError("box_length, c and hbar must be positive")

    modes = []
    seen = set()
    for n, pol_index in entries:
        n = tuple(int(v) for v in n)
        if n == (0, 0, 0):
            raise InvalidArgumentError("zero wavevector n=(0,0,0) is not a mode")
        if pol_index not in (1, 2):
            raise InvalidArgumentError(f"pol_index must be 1 or 2, got {pol_index}")
        if (n, pol_index) in seen:
            raise InvalidArgumentError(f"duplicate mode entry n={n} pol_index={pol_index}")
        seen.add((n, pol_index))

        k = (2 * np.pi / box_length) * np.asarray(n, dtype=float)
        omega = c * float(np.linalg.norm(k))
        pol = polarization_vectors(k)[pol_index - 1]
        if convention is AmplitudeConvention.PHYSICAL:
            amplitude = float(np.sqrt(2 * np.pi * hbar * omega / box_length**3))
        else:
            amplitude = 1.0
        for array in (k, pol):
            array.setflags(write=False)
        modes.append(
            Mode(n=n, k=k, omega=omega, pol_index=pol_index, pol=pol, amplitude=amplitude, c=c)
        )

    logger.debug(f"Built mode set with {len(modes)} modes, L={box_length}, c={c}")
    return ModeSet(
        box_length=box_length, c=c, hbar=hbar, convention=convention, modes=tuple(modes)
    )


def mode_set_from_spec(spec: ModeSetSpec) -> ModeSet:
    entries = [(entry.n, entry.pol_index) for entry in spec.modes]
    return build_mode_set(
        spec.box_length, entries, c=spec.c, convention=spec.convention, hbar=spec.hbar
    )


def _phase(mode: Mode, sign: Sign, point: SpacetimePoint) -> complex:
    phi = float(mode.k @ point.position) - mode.omega * point.t
    return complex(np.exp(1j * phi)) if sign is Sign.PLUS else complex(np.exp(-1j * phi))


def derivative_factor(mode: Mode, sign: Sign, axis: str) -> complex:
    """Multiplier that differentiating the mode phase along `axis` produces"""
    if axis not in AXES:
        raise InvalidArgumentError(f"axis must be one of {AXES}, got {axis!r}")
    rate = -mode.omega if axis == "t" else float(mode.k["xyz".index(axis)])
    return 1j * rate if sign is Sign.PLUS else -1j * rate


def mode_function(
    mode: Mode, field: FieldKind, sign: Sign, point: SpacetimePoint
) -> np.ndarray:
    vector = mode.field_vector(field)
    if sign is Sign.MINUS:
        vector = vector.conj()
    return vector * _phase(mode, sign, point)


def mode_derivative(
    mode: Mode,
    field: FieldKind,
    sign: Sign,
    point: SpacetimePoint,
    axis: str,
    order: int = 1,
) -> np.ndarray:
    """Exact derivative of the mode function along x, y, z or t"""
    return mode_function(mode, field, sign, point) * derivative_factor(mode, sign, axis) ** order
