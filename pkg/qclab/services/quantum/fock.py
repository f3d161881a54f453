"""Truncated multimode Fock spaces, ladder operators and test-state density operators.

Basis states are occupation tuples enumerated lexicographically, so the first mode is
the most significant tensor factor and every operator is built as a Kronecker product
in mode order.
"""

import itertools
import logging
from dataclasses import dataclass, field
from functools import lru_cache, reduce
from typing import List, Sequence, Tuple

import numpy as np
from scipy import linalg, sparse
from scipy.stats import geom, poisson

from ...core.config import settings
from ...core.exceptions import InvalidArgumentError, SpaceTooLargeError, StateError
from ...models.schemas import StateKind, StateSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FockSpace:
    mode_count: int
    cutoffs: Tuple[int, ...]
    basis: Tuple[Tuple[int, ...], ...] = field(repr=False, compare=False)
    dim: int

    def index_of(self, occupations: Sequence[int]) -> int:
        """Position of an occupation tuple in the basis"""
        index = 0
        for n, cutoff in zip(occupations, self.cutoffs):
            index = index * (cutoff + 1) + n
        return index


@dataclass(frozen=True, eq=False)
class DensityOperator:
    space: FockSpace
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        m = self.matrix
        if m.shape != (self.space.dim, self.space.dim):
            raise StateError(f"density matrix shape {m.shape} does not match dim {self.space.dim}")
        if np.max(np.abs(m - m.conj().T)) > settings.HERMITIAN_TOL:
            raise StateError("density matrix is not Hermitian")
        trace = np.trace(m).real
        if abs(trace - 1.0) > settings.TRACE_TOL:
            raise StateError(f"density matrix trace is {trace!r}, expected 1")
        smallest = linalg.eigvalsh(m, subset_by_index=[0, 0])[0]
        if smallest < -settings.PSD_TOL:
            raise StateError(f"density matrix has negative eigenvalue {smallest!r}")
        m.setflags(write=False)


def build_fock_space(mode_count: int, cutoffs: Sequence[int]) -> FockSpace:
    """Create the truncated Fock space with per-mode maximum occupations"""
    if mode_count < 1:
        raise InvalidArgumentError(f"mode_count must be >= 1, got {mode_count}")
    if len(cutoffs) != mode_count:
        raise InvalidArgumentError(f"expected {mode_count} cutoffs, got {len(cutoffs)}")
    if any(c < 1 for c in cutoffs):
        raise InvalidArgumentError(f"every cutoff must be >= 1, got {list(cutoffs)}")

    dim = int(np.prod([c + 1 for c in cutoffs]))
    if dim > settings.MAX_FOCK_DIM:
        raise SpaceTooLargeError(
            f"space too large: dim {dim} exceeds the maximum {settings.MAX_FOCK_DIM}"
        )

    basis = tuple(itertools.product(*(range(c + 1) for c in cutoffs)))
    return FockSpace(mode_count=mode_count, cutoffs=tuple(cutoffs), basis=basis, dim=dim)


@lru_cache(maxsize=64)
def _ladder_matrices(cutoffs: Tuple[int, ...], mode_index: int) -> Tuple[np.ndarray, np.ndarray]:
    single = sparse.diags(np.sqrt(np.arange(1, cutoffs[mode_index] + 1)), offsets=1)
    factors = [
        single if m == mode_index else sparse.identity(c + 1) for m, c in enumerate(cutoffs)
    ]
    annihilate = reduce(lambda a, b: sparse.kron(a, b, format="csr"), factors)
    annihilate = annihilate.toarray().astype(complex)
    create = annihilate.conj().T.copy()
    annihilate.setflags(write=False)
    create.setflags(write=False)
    return annihilate, create


def ladder(space: FockSpace, mode_index: int) -> Tuple[np.ndarray, np.ndarray]:
    """Return (annihilate, create) for one mode as dense dim x dim matrices"""
    if not 0 <= mode_index < space.mode_count:
        raise InvalidArgumentError(
            f"mode index {mode_index} out of range for {space.mode_count} modes"
        )
    return _ladder_matrices(space.cutoffs, mode_index)


def _check_per_mode(space: FockSpace, values: Sequence, name: str) -> None:
    if len(values) != space.mode_count:
        raise StateError(f"{name}: {len(values)} entries for {space.mode_count} modes")


def _coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    discarded = poisson.sf(cutoff, abs(alpha) ** 2)
    if discarded > settings.TRUNCATION_THRESHOLD:
        raise StateError(
            f"cutoff too small: coherent amplitude {alpha} discards probability "
            f"{discarded:.3e} at cutoff {cutoff}"
        )
    # displacement series on the vacuum: c_n = c_{n-1} * alpha / sqrt(n)
    coefficients = np.empty(cutoff + 1, dtype=complex)
    coefficients[0] = np.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, cutoff + 1):
        coefficients[n] = coefficients[n - 1] * alpha / np.sqrt(n)
    return coefficients / np.linalg.norm(coefficients)


def _thermal_populations(mean_photons: float, cutoff: int) -> np.ndarray:
    p = 1.0 / (1.0 + mean_photons)
    discarded = geom.sf(cutoff + 1, p)
    if discarded > settings.TRUNCATION_THRESHOLD:
        raise StateError(
            f"cutoff too small: thermal occupation {mean_photons} discards probability "
            f"{discarded:.3e} at cutoff {cutoff}; thermal tails are held to the same truncation "
            f"threshold as coherent states ({settings.TRUNCATION_THRESHOLD:g}, QCLAB_TRUNCATION_THRESHOLD)"
        )
    populations = geom.pmf(np.arange(1, cutoff + 2), p)
    return populations / populations.sum()


def _state_vector(space: FockSpace, spec: StateSpec) -> np.ndarray:
    if spec.kind is StateKind.VACUUM:
        vector = np.zeros(space.dim, dtype=complex)
        vector[0] = 1.0
        return vector

    if spec.kind is StateKind.FOCK:
        _check_per_mode(space, spec.occupations, "occupations")
        for n, cutoff in zip(spec.occupations, space.cutoffs):
            if n > cutoff:
                raise StateError(f"fock occupation {n} exceeds cutoff {cutoff}")
        vector = np.zeros(space.dim, dtype=complex)
        vector[space.index_of(spec.occupations)] = 1.0
        return vector

    if spec.kind is StateKind.COHERENT:
        _check_per_mode(space, spec.amplitudes, "amplitudes")
        factors = [
            _coherent_amplitudes(complex(re, im), cutoff)
            for (re, im), cutoff in zip(spec.amplitudes, space.cutoffs)
        ]
        return reduce(np.kron, factors)

    if spec.kind is StateKind.PURE_SUPERPOSITION:
        vector = sum(
            complex(re, im) * _state_vector(space, component)
            for (re, im), component in zip(spec.coefficients, spec.components)
        )
        norm = np.linalg.norm(vector)
        if norm == 0.0:
            raise StateError("superposition has zero norm")
        return vector / norm

    raise StateError(f"'{spec.kind.value}' is not a pure state")


def _density_matrix(space: FockSpace, spec: StateSpec) -> np.ndarray:
    if spec.kind is StateKind.THERMAL:
        _check_per_mode(space, spec.mean_photons, "mean_photons")
        populations = [
            _thermal_populations(nbar, cutoff)
            for nbar, cutoff in zip(spec.mean_photons, space.cutoffs)
        ]
        return np.diag(reduce(np.kron, populations)).astype(complex)

    if spec.kind is StateKind.MIXTURE:
        return sum(
            weight * _density_matrix(space, component)
            for weight, component in zip(spec.weights, spec.components)
        )

    vector = _state_vector(space, spec)
    return np.outer(vector, vector.conj())


def make_state(space: FockSpace, spec: StateSpec) -> DensityOperator:
    """Build the density operator of `spec`; invariants are checked on construction"""
    try:
        rho = DensityOperator(space=space, matrix=_density_matrix(space, spec))
    except StateError as e:
        logger.error(f"Failed to build {spec.kind.value} state: {e}")
        raise
    logger.debug(f"Built {spec.kind.value} state on dim {space.dim}")
    return rho


def trace_expect(rho: DensityOperator, op: np.ndarray) -> complex:
    """Tr(rho op)"""
    if op.shape != rho.matrix.shape:
        raise InvalidArgumentError(
            f"dimension mismatch: operator {op.shape} vs state {rho.matrix.shape}"
        )
    return complex(np.einsum("ij,ji->", rho.matrix, op))


def normal_moment_matrix(rho: DensityOperator) -> np.ndarray:
    """N[m, m'] = Tr(rho a_m^dagger a_m'), the first-order moments over modes"""
    count = rho.space.mode_count
    moments = np.empty((count, count), dtype=complex)
    ladders: List[Tuple[np.ndarray, np.ndarray]] = [ladder(rho.space, m) for m in range(count)]
    for m, (_, create) in enumerate(ladders):
        for m2, (annihilate, _) in enumerate(ladders):
            moments[m, m2] = trace_expect(rho, create @ annihilate)
    return moments
