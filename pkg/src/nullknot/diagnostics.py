"""Pointwise null and shear diagnostics in four redundant formulations.

Inputs follow the evaluation contract of :mod:`nullknot.core`: ``F`` has
shape ``(..., 3)`` complex, ``J[..., i, j] = d_j F_i``, ``V`` is the unit
Poynting direction and ``JV[..., i, j] = d_j V_i``.

On null fields the formulations are tied together by exact identities. With
``c1 = V.[(E.grad)B + (B.grad)E]`` and ``c2 = V.[(E.grad)E - (B.grad)B]``:

    F . curl F           = c1 - i c2
    (EiEj - BiBj) djVi   = -c2
    (EiBj + EjBi) djVi   = -c1

The tetrad shear uses the signature (+, -, -, -), ``k = (1, V)/sqrt 2`` and
``m = (0, F / (rho sqrt 2))`` with ``rho = sqrt(W)``, so that ``m . mbar = -1``.
Then ``sigma = m^i m^j d_j k_i = -F_i F_j d_j V_i / (2 sqrt(2) W)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFlowError, NotNullError

EPS = 1e-30
W_REL_FLOOR = 1e-12
NULL_TOL = 1e-9
VERDICT_TOL = 1e-6


@dataclass
class NullResiduals:
    dot_EB: np.ndarray
    energy_imbalance: np.ndarray
    rs_null: np.ndarray

    def relative(self, F):
        """``|F.F| / |F|^2`` with an ``EPS`` floor."""
        return np.abs(self.rs_null) / np.maximum(np.sum(np.abs(F) ** 2, axis=-1), EPS)


@dataclass
class ShearResiduals:
    rs_shear: np.ndarray
    comp_sym: np.ndarray  # (..., 2)
    foliation: np.ndarray  # (..., 2) = (c1, c2)
    tetrad_sigma: np.ndarray
    # scale-free versions used for verdicts
    rel_rs: np.ndarray
    rel_comp: np.ndarray
    rel_foliation: np.ndarray
    rel_sigma: np.ndarray

    def verdicts(self, tol: float = VERDICT_TOL) -> np.ndarray:
        """Boolean ``(..., 4)``: is each formulation nonzero (shear present)?"""
        return np.stack([self.rel_rs > tol, self.rel_comp > tol, self.rel_foliation > tol, self.rel_sigma > tol], axis=-1)


def null_residuals(F) -> NullResiduals:
    F = np.asarray(F, dtype=complex)
    E, B = F.real, F.imag
    return NullResiduals(
        dot_EB=np.sum(E * B, axis=-1),
        energy_imbalance=np.sum(E * E, axis=-1) - np.sum(B * B, axis=-1),
        rs_null=np.sum(F * F, axis=-1),
    )


def curl(J):
    """Curl from a Jacobian ``J[..., i, j] = d_j X_i``."""
    return np.stack([J[..., 2, 1] - J[..., 1, 2], J[..., 0, 2] - J[..., 2, 0], J[..., 1, 0] - J[..., 0, 1]], axis=-1)


def _directional(J, X):
    """``(X . grad) Y`` for ``J = jac(Y)``."""
    return np.einsum("...ij,...j->...i", J, X)


def energy_density(F):
    return 0.5 * np.sum(np.abs(F) ** 2, axis=-1)


def _check_w(F, w_ref):
    W = energy_density(F)
    ref = np.max(W) if w_ref is None else float(w_ref)
    if np.any(W <= W_REL_FLOOR * ref) or np.any(W == 0):
        raise DegenerateFlowError("energy density below threshold; V undefined")
    return W


def tetrad_shear(F, J, V, JV, w_ref=None, null_tol: float = NULL_TOL):
    """Complex tetrad shear ``sigma = m^mu m^nu d_nu k_mu`` (see module docstring)."""
    F = np.asarray(F, dtype=complex)
    W = _check_w(F, w_ref)
    nr = null_residuals(F).relative(F)
    if np.any(nr > null_tol):
        raise NotNullError(f"tetrad needs a null field (|F.F|/|F|^2 = {np.max(nr):.2e})")
    rho = np.sqrt(W)
    m = F / (rho[..., None] * np.sqrt(2.0))
    # lowered spatial components of k: k_i = -V_i / sqrt 2
    dk = -np.asarray(JV, dtype=float) / np.sqrt(2.0)
    return np.einsum("...i,...j,...ij->...", m, m, dk)


def shear_residuals(F, J, V, JV, w_ref=None, null_tol: float = NULL_TOL) -> ShearResiduals:
    """All four shear formulations plus their scale-free magnitudes.

    The tetrad shear is only defined on null inputs; elsewhere it is NaN.
    """
    F = np.asarray(F, dtype=complex)
    J = np.asarray(J, dtype=complex)
    V = np.asarray(V, dtype=float)
    JV = np.asarray(JV, dtype=float)
    W = _check_w(F, w_ref)
    E, B = F.real, F.imag
    JE, JB = J.real, J.imag

    cF = curl(J)
    rs = np.sum(F * cF, axis=-1)
    comp0 = np.einsum("...i,...j,...ij->...", E, E, JV) - np.einsum("...i,...j,...ij->...", B, B, JV)
    comp1 = np.einsum("...i,...j,...ij->...", E, B, JV) + np.einsum("...i,...j,...ij->...", B, E, JV)
    c1 = np.sum(V * (_directional(JB, E) + _directional(JE, B)), axis=-1)
    c2 = np.sum(V * (_directional(JE, E) - _directional(JB, B)), axis=-1)

    nF = np.linalg.norm(F, axis=-1)
    nJ = np.sqrt(np.sum(np.abs(J) ** 2, axis=(-2, -1)))
    nJV = np.sqrt(np.sum(JV**2, axis=(-2, -1)))
    rel_rs = np.abs(rs) / (nF * np.linalg.norm(cF, axis=-1) + EPS)
    # |F| |J| keeps the scale honest when V is constant and JV is pure rounding
    fj = nF * nJ
    rel_comp = np.maximum(np.abs(comp0), np.abs(comp1)) / np.maximum(2 * W * nJV + fj, EPS)
    rel_fol = np.maximum(np.abs(c1), np.abs(c2)) / np.maximum(fj, EPS)

    nr = null_residuals(F).relative(F)
    null = nr <= null_tol
    rho2 = np.where(null, W, np.nan)
    m_scale = 1.0 / (2.0 * rho2)
    sigma = -np.einsum("...i,...j,...ij->...", F, F, JV) * m_scale / np.sqrt(2.0)
    rel_sigma = np.abs(sigma) / np.maximum(nJV + nJ / np.maximum(nF, EPS), EPS)
    return ShearResiduals(
        rs_shear=rs,
        comp_sym=np.stack([comp0, comp1], axis=-1),
        foliation=np.stack([c1, c2], axis=-1),
        tetrad_sigma=sigma,
        rel_rs=rel_rs,
        rel_comp=rel_comp,
        rel_foliation=rel_fol,
        rel_sigma=rel_sigma,
    )


def shear_relative(F, J):
    """``|F . curl F| / (|F| |curl F| + EPS)`` without needing V."""
    F = np.asarray(F, dtype=complex)
    cF = curl(np.asarray(J, dtype=complex))
    return np.abs(np.sum(F * cF, axis=-1)) / (np.linalg.norm(F, axis=-1) * np.linalg.norm(cF, axis=-1) + EPS)


def summarize(values) -> dict:
    """max / mean / selected percentiles of a residual sample, NaNs ignored."""
    v = np.asarray(values, dtype=float).ravel()
    v = v[np.isfinite(v)]
    if v.size == 0:
        return {"count": 0, "max": None, "mean": None, "p50": None, "p90": None, "p99": None}
    p50, p90, p99 = np.percentile(v, [50, 90, 99])
    return {
        "count": int(v.size),
        "max": float(v.max()),
        "mean": float(v.mean()),
        "p50": float(p50),
        "p90": float(p90),
        "p99": float(p99),
    }
