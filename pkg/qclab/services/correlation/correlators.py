"""Correlation tensors as plane-wave sums in their slot-1 coordinates.

A CorrelatorField stores the value at the slot-1 point (r, t) as
sum_k C_k exp(i(q_k . r - nu_k t)), every other slot pinned at a fixed point. The slot-1
field operator is a single sum over modes, so each mode contributes one term whose
coefficient is a trace of the state against that mode's ladder operator times the
fixed-slot operator product.
"""

import itertools
import logging
import re
from dataclasses import dataclass, field
from functools import reduce
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ...core.exceptions import InvalidArgumentError, NormalOrderingError, PreconditionError
from ...models.schemas import Convention, FieldKind, Sign, SpacetimePoint
from ..quantum.fields import LEVI_CIVITA, field_operator
from ..quantum.fock import DensityOperator, FockSpace, ladder
from ..quantum.modes import ModeSet, mode_function

logger = logging.getLogger(__name__)

ORIGIN = SpacetimePoint()
TRANSVERSE_TOL = 1e-12

Slot = Tuple[FieldKind, Sign]


@dataclass(frozen=True)
class SlotPattern:
    slots: Tuple[Slot, ...]

    def __post_init__(self) -> None:
        if not self.slots:
            raise InvalidArgumentError("a slot pattern needs at least one slot")
        if len(self.slots) not in (2, 4):
            raise InvalidArgumentError(f"rank must be 2 or 4, got {len(self.slots)}")
        signs = [sign for _, sign in self.slots]
        if Sign.PLUS in signs and Sign.MINUS in signs[signs.index(Sign.PLUS) :]:
            raise NormalOrderingError(f"normal ordering violated in {self}")

    @classmethod
    def parse(cls, text: str) -> "SlotPattern":
        """Parse a compact pattern such as "E-E-B+B+" """
        tokens = re.findall(r"([EBA])([+-])", text.replace(" ", ""))
        if "".join(f + s for f, s in tokens) != text.replace(" ", ""):
            raise InvalidArgumentError(f"cannot parse slot pattern {text!r}")
        return cls(tuple((FieldKind(f), Sign(s)) for f, s in tokens))

    @property
    def rank(self) -> int:
        return len(self.slots)

    @property
    def is_balanced(self) -> bool:
        return sum(1 if s is Sign.MINUS else -1 for _, s in self.slots) == 0

    @property
    def fixed(self) -> Tuple[Slot, ...]:
        return self.slots[1:]

    def with_first(self, slot: Slot) -> "SlotPattern":
        return SlotPattern((slot,) + self.fixed)

    def __str__(self) -> str:
        return "".join(f.value + s.value for f, s in self.slots)


NAMED_PATTERNS: Dict[Convention, Dict[str, SlotPattern]] = {
    Convention.PRINTED_22: {
        "E": SlotPattern.parse("E-E-E+E+"),
        "H": SlotPattern.parse("B-B-B+B+"),
        "M": SlotPattern.parse("E-E-B+B+"),
        "N": SlotPattern.parse("B-B-E+E+"),
    },
    Convention.DERIVATION_13: {
        "E": SlotPattern.parse("E-E+E+E+"),
        "H": SlotPattern.parse("B-B+B+B+"),
        "M": SlotPattern.parse("E-B+B+B+"),
        "N": SlotPattern.parse("B-E+E+E+"),
    },
}


@dataclass(frozen=True, eq=False)
class CorrelatorField:
    label: str
    pattern: Optional[SlotPattern]
    fixed_points: Tuple[SpacetimePoint, ...]
    q: np.ndarray = field(repr=False)
    nu: np.ndarray = field(repr=False)
    coefficients: np.ndarray = field(repr=False)

    @property
    def rank(self) -> int:
        return self.coefficients.ndim - 1

    @property
    def term_count(self) -> int:
        return len(self.nu)

    def max_term_norm(self) -> float:
        if self.term_count == 0:
            return 0.0
        return float(np.max(np.linalg.norm(self.coefficients.reshape(self.term_count, -1), axis=1)))

    def replace(self, label: str, coefficients: np.ndarray) -> "CorrelatorField":
        return CorrelatorField(
            label, self.pattern, self.fixed_points, self.q, self.nu, coefficients
        )

    def conjugate(self) -> "CorrelatorField":
        """Field whose value is the complex conjugate of this one's everywhere"""
        return CorrelatorField(
            f"{self.label}*", None, self.fixed_points, -self.q, -self.nu, self.coefficients.conj()
        )


def merge_terms(
    q: np.ndarray, nu: np.ndarray, coefficients: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sum terms sharing a (q, nu) key, keeping first-appearance order"""
    index: Dict[Tuple[float, ...], int] = {}
    for row, key in enumerate(zip(*q.T, nu)):
        index.setdefault(tuple(float(v) for v in key), row)
    keys = list(index)
    slot_of = {key: i for i, key in enumerate(keys)}
    merged = np.zeros((len(keys),) + coefficients.shape[1:], dtype=complex)
    for row, key in enumerate(zip(*q.T, nu)):
        merged[slot_of[tuple(float(v) for v in key)]] += coefficients[row]
    rows = list(index.values())
    return q[rows].reshape(-1, 3), nu[rows], merged


def combine(parts: Sequence[Tuple[complex, CorrelatorField]], label: str) -> CorrelatorField:
    """Termwise weighted sum of fields of equal rank"""
    ranks = {cf.rank for _, cf in parts}
    if len(ranks) != 1:
        raise InvalidArgumentError(f"cannot combine fields of ranks {sorted(ranks)}")
    q = np.concatenate([cf.q for _, cf in parts]).reshape(-1, 3)
    nu = np.concatenate([cf.nu for _, cf in parts])
    coefficients = np.concatenate([weight * cf.coefficients for weight, cf in parts])
    q, nu, coefficients = merge_terms(q, nu, coefficients)
    return CorrelatorField(label, None, parts[0][1].fixed_points, q, nu, coefficients)


class FixedSlotProducts:
    """Cache of fixed-slot operator products keyed by slot string and points"""

    def __init__(self, space: FockSpace, ms: ModeSet) -> None:
        self.space = space
        self.ms = ms
        self._products: Dict[Tuple, np.ndarray] = {}

    def get(self, slots: Sequence[Slot], points: Sequence[SpacetimePoint]) -> np.ndarray:
        key = (tuple(slots), tuple(points))
        if key not in self._products:
            operators = [
                field_operator(self.space, self.ms, kind, sign, p).components
                for (kind, sign), p in zip(slots, points)
            ]
            # (3, ..., 3, dim, dim) with one Cartesian axis per fixed slot
            self._products[key] = reduce(lambda acc, op: acc[..., None, :, :] @ op, operators)
        return self._products[key]


def correlator_field(
    rho: DensityOperator,
    space: FockSpace,
    ms: ModeSet,
    pattern: SlotPattern,
    fixed_points: Sequence[SpacetimePoint],
    products: Optional[FixedSlotProducts] = None,
) -> CorrelatorField:
    """Trace-path correlator with slot-1 dependence kept symbolic"""
    if len(fixed_points) != pattern.rank - 1:
        raise InvalidArgumentError(
            f"pattern {pattern} needs {pattern.rank - 1} fixed points, got {len(fixed_points)}"
        )
    products = products or FixedSlotProducts(space, ms)
    fixed = products.get(pattern.fixed, fixed_points)

    kind, sign = pattern.slots[0]
    ladders = np.stack(
        [ladder(space, m)[0 if sign is Sign.PLUS else 1] for m in range(space.mode_count)]
    )
    rho_ladder = np.einsum("ij,mjk->mik", rho.matrix, ladders)
    traces = np.einsum("mij,...ji->m...", rho_ladder, fixed)
    slot1 = np.stack([mode_function(mode, kind, sign, ORIGIN) for mode in ms.modes])
    coefficients = np.einsum("mj,m...->mj...", slot1, traces)

    direction = 1.0 if sign is Sign.PLUS else -1.0
    q = direction * np.stack([mode.k for mode in ms.modes])
    nu = direction * np.array([mode.omega for mode in ms.modes])
    q, nu, coefficients = merge_terms(q, nu, coefficients)
    return CorrelatorField(str(pattern), pattern, tuple(fixed_points), q, nu, coefficients)


def evaluate(cf: CorrelatorField, p1: SpacetimePoint) -> np.ndarray:
    phases = np.exp(1j * (cf.q @ p1.position - cf.nu * p1.t))
    return np.einsum("k,k...->...", phases, cf.coefficients)


def evaluate_many(cf: CorrelatorField, points: Sequence[SpacetimePoint]) -> np.ndarray:
    """Values at several slot-1 points, stacked along a leading axis"""
    r = np.array([p.r for p in points], dtype=float).reshape(-1, 3)
    t = np.array([p.t for p in points], dtype=float)
    phases = np.exp(1j * (r @ cf.q.T - np.outer(t, cf.nu)))
    return np.einsum("pk,k...->p...", phases, cf.coefficients)


def named_tensors(
    convention: Convention,
    rho: DensityOperator,
    space: FockSpace,
    ms: ModeSet,
    fixed_points: Sequence[SpacetimePoint],
    products: Optional[FixedSlotProducts] = None,
) -> Dict[str, CorrelatorField]:
    """The four tensors E, H, M, N of one ordering convention"""
    products = products or FixedSlotProducts(space, ms)
    named = {}
    for name, pattern in NAMED_PATTERNS[convention].items():
        cf = correlator_field(rho, space, ms, pattern, fixed_points, products)
        named[name] = cf.replace(name, cf.coefficients)
    return named


def combined_from_named(named: Dict[str, CorrelatorField]) -> Dict[str, CorrelatorField]:
    return {
        "Ebb": combine([(1.0, named["E"]), (1.0, named["H"])], "Ebb"),
        "Sbb": combine([(1.0, named["M"]), (-1.0, named["N"])], "Sbb"),
    }


def combined_ES(
    convention: Convention,
    rho: DensityOperator,
    space: FockSpace,
    ms: ModeSet,
    fixed_points: Sequence[SpacetimePoint],
    products: Optional[FixedSlotProducts] = None,
) -> Dict[str, CorrelatorField]:
    """Energy coherence tensor Ebb = E + H and energy-flow tensor Sbb = M - N"""
    return combined_from_named(named_tensors(convention, rho, space, ms, fixed_points, products))


def first_order_tensors(
    rho: DensityOperator, space: FockSpace, ms: ModeSet, fixed_point: SpacetimePoint
) -> Dict[str, CorrelatorField]:
    """Rank-2 tensors E_jk = <E-E+> + <B-B+> and S_jk = <E-B+> - <B-E+>"""
    products = FixedSlotProducts(space, ms)
    points = (fixed_point,)

    def build(text: str) -> CorrelatorField:
        return correlator_field(rho, space, ms, SlotPattern.parse(text), points, products)

    return {
        "E": combine([(1.0, build("E-E+")), (1.0, build("B-B+"))], "E_jk"),
        "S": combine([(1.0, build("E-B+")), (-1.0, build("B-E+"))], "S_jk"),
    }


def classical_signal(
    amplitudes: Sequence[complex], ms: ModeSet, kind: FieldKind, sign: Sign, p: SpacetimePoint
) -> np.ndarray:
    """Classical analytic signal of a coherent state, conjugated for the "-" sign"""
    signal = sum(
        alpha * mode_function(mode, kind, Sign.PLUS, p) for alpha, mode in zip(amplitudes, ms.modes)
    )
    return np.conj(signal) if sign is Sign.MINUS else signal


def coherent_factorized(
    amplitudes: Sequence[complex],
    ms: ModeSet,
    pattern: SlotPattern,
    points: Sequence[SpacetimePoint],
) -> np.ndarray:
    """Correlator of a coherent product state as an outer product of classical signals"""
    if len(amplitudes) != len(ms):
        raise InvalidArgumentError(f"expected {len(ms)} amplitudes, got {len(amplitudes)}")
    if len(points) != pattern.rank:
        raise InvalidArgumentError(f"pattern {pattern} needs {pattern.rank} points")
    vectors = [
        classical_signal(amplitudes, ms, kind, sign, p)
        for (kind, sign), p in zip(pattern.slots, points)
    ]
    return reduce(np.multiply.outer, vectors)


def wick_gaussian(
    moments: np.ndarray,
    ms: ModeSet,
    pattern: SlotPattern,
    points: Sequence[SpacetimePoint],
) -> np.ndarray:
    """Gaussian pairing sum for zero-mean phase-insensitive states.

    `moments[m, m']` is <a_m^dagger a_m'>. Unbalanced patterns give exact zero.
    """
    shape = (3,) * pattern.rank
    if not pattern.is_balanced:
        return np.zeros(shape, dtype=complex)

    creators = [i for i, (_, s) in enumerate(pattern.slots) if s is Sign.MINUS]
    annihilators = [i for i, (_, s) in enumerate(pattern.slots) if s is Sign.PLUS]

    def mode_vectors(i: int) -> np.ndarray:
        kind, sign = pattern.slots[i]
        return np.stack([mode_function(mode, kind, sign, points[i]) for mode in ms.modes])

    vectors = [mode_vectors(i) for i in range(pattern.rank)]
    letters = "abcd"[: pattern.rank]
    result = np.zeros(shape, dtype=complex)
    for permutation in itertools.permutations(annihilators):
        operands: List[np.ndarray] = []
        subscripts: List[str] = []
        for i, j in zip(creators, permutation):
            operands.append(np.einsum("mx,mn,ny->xy", vectors[i], moments, vectors[j]))
            subscripts.append(letters[i] + letters[j])
        result += np.einsum(f"{','.join(subscripts)}->{letters}", *operands)
    return result


def _scaled(cf: CorrelatorField, factors: np.ndarray, label: str) -> CorrelatorField:
    expanded = factors.reshape((-1,) + (1,) * cf.rank)
    return cf.replace(label, expanded * cf.coefficients)


def slot1_derivative(cf: CorrelatorField, axis: str, order: int = 1) -> CorrelatorField:
    if axis == "t":
        factors = -1j * cf.nu
    elif axis in ("x", "y", "z"):
        factors = 1j * cf.q[:, "xyz".index(axis)]
    else:
        raise InvalidArgumentError(f"axis must be x, y, z or t, got {axis!r}")
    label = f"d{axis}^{order} {cf.label}" if order > 1 else f"d{axis} {cf.label}"
    return _scaled(cf, factors**order, label)


def slot1_curl(cf: CorrelatorField) -> CorrelatorField:
    coefficients = 1j * np.einsum("jkl,nk,nl...->nj...", LEVI_CIVITA, cf.q, cf.coefficients)
    return cf.replace(f"curl {cf.label}", coefficients)


def slot1_divergence(cf: CorrelatorField) -> CorrelatorField:
    coefficients = 1j * np.einsum("nj,nj...->n...", cf.q, cf.coefficients)
    return cf.replace(f"div {cf.label}", coefficients)


def slot1_inverse_curl(cf: CorrelatorField) -> CorrelatorField:
    """Divergence-free potential whose slot-1 curl reproduces `cf` exactly"""
    for q, coefficient in zip(cf.q, cf.coefficients):
        norm = float(np.linalg.norm(coefficient))
        if norm == 0.0:
            continue
        q_norm = float(np.linalg.norm(q))
        if q_norm == 0.0:
            raise PreconditionError("inverse curl undefined for a zero wavevector term")
        longitudinal = float(np.linalg.norm(np.einsum("j,j...->...", q, coefficient)))
        if longitudinal > TRANSVERSE_TOL * q_norm * norm:
            raise PreconditionError(
                f"inverse curl needs a transverse field, term q={q.tolist()} has "
                f"longitudinal part {longitudinal:.3e}"
            )
    q_squared = np.einsum("nj,nj->n", cf.q, cf.q)
    safe = np.where(q_squared == 0.0, 1.0, q_squared)
    coefficients = 1j * np.einsum("jkl,nk,nl...->nj...", LEVI_CIVITA, cf.q, cf.coefficients)
    coefficients /= safe.reshape((-1,) + (1,) * cf.rank)
    return CorrelatorField(f"A[{cf.label}]", None, cf.fixed_points, cf.q, cf.nu, coefficients)


def fields_agree(a: CorrelatorField, b: CorrelatorField) -> Tuple[float, float]:
    """(max coefficient difference, max coefficient norm) over a joint key list"""
    joint = combine([(1.0, a), (-1.0, b)], f"{a.label} - {b.label}")
    return joint.max_term_norm(), max(a.max_term_norm(), b.max_term_norm())


def joint_terms(
    fields: Iterable[CorrelatorField],
) -> Tuple[np.ndarray, np.ndarray, List[np.ndarray]]:
    """Express several fields on one shared, ordered key list (missing keys get zeros)"""
    fields = list(fields)
    q = np.concatenate([cf.q for cf in fields]).reshape(-1, 3)
    nu = np.concatenate([cf.nu for cf in fields])
    q, nu, _ = merge_terms(q, nu, np.zeros((len(nu), 1), dtype=complex))
    position = {tuple(float(v) for v in key): i for i, key in enumerate(zip(*q.T, nu))}
    aligned = []
    for cf in fields:
        coefficients = np.zeros((len(nu),) + cf.coefficients.shape[1:], dtype=complex)
        for key, coefficient in zip(zip(*cf.q.T, cf.nu), cf.coefficients):
            coefficients[position[tuple(float(v) for v in key)]] += coefficient
        aligned.append(coefficients)
    return q, nu, aligned
