"""Bilinear density algebra on energy and energy-flow coherence tensors.

Every density is linear in the tensors (e, s) and separately linear in their conjugates
(ec, sc). Arguments carry a leading term axis and flattened passive indices: e and s
have shape (A, 3, P), ec and sc have shape (B, 3, P), and results have leading shape
(A, B). The passive axis is always summed. Evaluating at a single point uses A = B = 1;
exact box integrals use the full term-by-term pair table.
"""

from typing import Callable

import numpy as np

from ..quantum.fields import LEVI_CIVITA

Bilinear = Callable[..., np.ndarray]

DELTA = np.eye(3)


def energy_density(e: np.ndarray, s: np.ndarray, ec: np.ndarray, sc: np.ndarray) -> np.ndarray:
    """W = sum(Ebb* Ebb + Sbb* Sbb)"""
    return np.einsum("ajz,bjz->ab", e, ec) + np.einsum("ajz,bjz->ab", s, sc)


def flow_density(
    e: np.ndarray, s: np.ndarray, ec: np.ndarray, sc: np.ndarray, c: float
) -> np.ndarray:
    """T_k = c eps_klj (Sbb_l Ebb*_j + Sbb*_l Ebb_j)"""
    return c * (
        np.einsum("klj,alz,bjz->abk", LEVI_CIVITA, s, ec)
        + np.einsum("klj,blz,ajz->abk", LEVI_CIVITA, sc, e)
    )


def momentum_density(
    e: np.ndarray, s: np.ndarray, ec: np.ndarray, sc: np.ndarray, c: float
) -> np.ndarray:
    """Tm_i = (1/c) eps_ipj (Sbb_p Ebb*_j + Sbb*_p Ebb_j)"""
    return (
        np.einsum("ipj,apz,bjz->abi", LEVI_CIVITA, s, ec)
        + np.einsum("ipj,bpz,ajz->abi", LEVI_CIVITA, sc, e)
    ) / c


def stress_density(e: np.ndarray, s: np.ndarray, ec: np.ndarray, sc: np.ndarray) -> np.ndarray:
    """Symmetric stress analogue with the trace term summed over the repeated index"""
    outer = np.einsum("apz,biz->abpi", e, ec) + np.einsum("apz,biz->abpi", s, sc)
    trace = np.einsum("abll->ab", outer)
    return outer + outer.swapaxes(-1, -2) - np.einsum("ab,pi->abpi", trace, DELTA)


def spin_density(
    s: np.ndarray, a: np.ndarray, sc: np.ndarray, ac: np.ndarray, c: float
) -> np.ndarray:
    """(1/c) eps_pti (Sbb_t A*_i + Sbb*_t A_i)"""
    return (
        np.einsum("pti,atz,biz->abp", LEVI_CIVITA, s, ac)
        + np.einsum("pti,btz,aiz->abp", LEVI_CIVITA, sc, a)
    ) / c


def potential_gradient_density(
    s: np.ndarray, ga: np.ndarray, sc: np.ndarray, gac: np.ndarray, c: float
) -> np.ndarray:
    """(1/c)(Sbb_l d_i A*_l + Sbb*_l d_i A_l), gradients carrying the leading axis i"""
    return (
        np.einsum("alz,bilz->abi", s, gac) + np.einsum("blz,ailz->abi", sc, ga)
    ) / c


def surface_tensor(s: np.ndarray, a: np.ndarray, sc: np.ndarray, ac: np.ndarray) -> np.ndarray:
    """G_ki = Sbb_k A*_i + Sbb*_k A_i"""
    return np.einsum("akz,biz->abki", s, ac) + np.einsum("bkz,aiz->abki", sc, a)


def flatten_terms(coefficients: np.ndarray) -> np.ndarray:
    """(K, 3, *passive) -> (K, 3, P)"""
    return coefficients.reshape(coefficients.shape[0], 3, -1)


def at_point(fn: Bilinear, e: np.ndarray, s: np.ndarray, *args: float) -> np.ndarray:
    """Density at a single point from the tensor values there"""
    e, s = flatten_terms(e[None]), flatten_terms(s[None])
    return fn(e, s, e.conj(), s.conj(), *args)[0, 0]


def derivative_at_point(
    fn: Bilinear, e: np.ndarray, s: np.ndarray, de: np.ndarray, ds: np.ndarray, *args: float
) -> np.ndarray:
    """Product rule: d f(e, s, e*, s*) = f(de, ds, e*, s*) + f(e, s, de*, ds*)"""
    e, s = flatten_terms(e[None]), flatten_terms(s[None])
    de, ds = flatten_terms(de[None]), flatten_terms(ds[None])
    return (fn(de, ds, e.conj(), s.conj(), *args) + fn(e, s, de.conj(), ds.conj(), *args))[0, 0]
