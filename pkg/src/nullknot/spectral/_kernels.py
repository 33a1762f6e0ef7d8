"""Per-mode kernels for the spectral propagator.

Each kernel exists twice: a numba ``@njit(parallel=True)`` version and a
vectorized numpy version. The numba path is used when numba imports and
``NULLKNOT_DISABLE_NUMBA`` is unset (or ``0``); setting it to ``1`` forces
the numpy path. ``NULLKNOT_THREADS`` caps numba's thread pool.

All kernels are elementwise over Fourier modes, so the two paths agree to
rounding and results do not depend on the thread count.
"""

from __future__ import annotations

import os
import warnings

import numpy as np

# numba probes TBB first and warns when the installed version is too old;
# it then falls back to another threading layer, which is all we need
warnings.filterwarnings("ignore", message=".*TBB threading layer.*")


def _flag(name, default="0"):
    return os.environ.get(name, default).strip().lower() in ("1", "true", "yes", "on")


try:  # pragma: no cover - exercised implicitly
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _flag("NULLKNOT_DISABLE_NUMBA")

if HAVE_NUMBA and os.environ.get("NULLKNOT_THREADS"):
    try:
        numba.set_num_threads(max(1, min(int(os.environ["NULLKNOT_THREADS"]), numba.config.NUMBA_NUM_THREADS)))
    except ValueError:
        pass


# numpy reference path ----------------------------------------------------


def _khat(kx, ky, kz):
    KX, KY, KZ = np.meshgrid(kx, ky, kz, indexing="ij")
    kk = np.sqrt(KX * KX + KY * KY + KZ * KZ)
    safe = np.where(kk > 0, kk, 1.0)
    return KX / safe, KY / safe, KZ / safe, kk


def rotate_modes_np(Fh, kx, ky, kz, dt):
    ux, uy, uz, kk = _khat(kx, ky, kz)
    th = kk * dt
    c = np.cos(th)[..., None]
    s = np.sin(th)[..., None]
    u = np.stack([ux, uy, uz], axis=-1)
    udotv = np.sum(u * Fh, axis=-1, keepdims=True)
    uxv = np.cross(u, Fh)
    out = c * Fh + s * uxv + (1.0 - c) * u * udotv
    out[kk == 0] = Fh[kk == 0]
    return out


def project_modes_np(Fh, kx, ky, kz):
    ux, uy, uz, kk = _khat(kx, ky, kz)
    u = np.stack([ux, uy, uz], axis=-1)
    udotv = np.sum(u * Fh, axis=-1, keepdims=True)
    return Fh - u * udotv


def divergence_modes_np(Fh, kx, ky, kz):
    """``k . F_hat`` per mode (the spectral divergence without the factor i)."""
    KX, KY, KZ = np.meshgrid(kx, ky, kz, indexing="ij")
    return KX * Fh[..., 0] + KY * Fh[..., 1] + KZ * Fh[..., 2]


# numba path --------------------------------------------------------------

if HAVE_NUMBA:

    @njit(parallel=True, cache=True)
    def rotate_modes_nb(Fh, kx, ky, kz, dt):
        n0, n1, n2 = Fh.shape[0], Fh.shape[1], Fh.shape[2]
        out = np.empty_like(Fh)
        for i in prange(n0):
            for j in range(n1):
                for l in range(n2):
                    a, b, d = kx[i], ky[j], kz[l]
                    vx, vy, vz = Fh[i, j, l, 0], Fh[i, j, l, 1], Fh[i, j, l, 2]
                    kk = np.sqrt(a * a + b * b + d * d)
                    if kk == 0.0:
                        out[i, j, l, 0] = vx
                        out[i, j, l, 1] = vy
                        out[i, j, l, 2] = vz
                        continue
                    ux, uy, uz = a / kk, b / kk, d / kk
                    c = np.cos(kk * dt)
                    s = np.sin(kk * dt)
                    ud = ux * vx + uy * vy + uz * vz
                    cx = uy * vz - uz * vy
                    cy = uz * vx - ux * vz
                    cz = ux * vy - uy * vx
                    out[i, j, l, 0] = c * vx + s * cx + (1.0 - c) * ux * ud
                    out[i, j, l, 1] = c * vy + s * cy + (1.0 - c) * uy * ud
                    out[i, j, l, 2] = c * vz + s * cz + (1.0 - c) * uz * ud
        return out

    @njit(parallel=True, cache=True)
    def project_modes_nb(Fh, kx, ky, kz):
        n0, n1, n2 = Fh.shape[0], Fh.shape[1], Fh.shape[2]
        out = np.empty_like(Fh)
        for i in prange(n0):
            for j in range(n1):
                for l in range(n2):
                    a, b, d = kx[i], ky[j], kz[l]
                    vx, vy, vz = Fh[i, j, l, 0], Fh[i, j, l, 1], Fh[i, j, l, 2]
                    kk = np.sqrt(a * a + b * b + d * d)
                    if kk == 0.0:
                        out[i, j, l, 0] = vx
                        out[i, j, l, 1] = vy
                        out[i, j, l, 2] = vz
                        continue
                    ux, uy, uz = a / kk, b / kk, d / kk
                    ud = ux * vx + uy * vy + uz * vz
                    out[i, j, l, 0] = vx - ux * ud
                    out[i, j, l, 1] = vy - uy * ud
                    out[i, j, l, 2] = vz - uz * ud
        return out

    @njit(parallel=True, cache=True)
    def divergence_modes_nb(Fh, kx, ky, kz):
        n0, n1, n2 = Fh.shape[0], Fh.shape[1], Fh.shape[2]
        out = np.empty((n0, n1, n2), dtype=Fh.dtype)
        for i in prange(n0):
            for j in range(n1):
                for l in range(n2):
                    out[i, j, l] = kx[i] * Fh[i, j, l, 0] + ky[j] * Fh[i, j, l, 1] + kz[l] * Fh[i, j, l, 2]
        return out


def rotate_modes(Fh, kx, ky, kz, dt, use_numba=None):
    if USE_NUMBA if use_numba is None else (use_numba and HAVE_NUMBA):
        return rotate_modes_nb(np.ascontiguousarray(Fh), kx, ky, kz, float(dt))
    return rotate_modes_np(Fh, kx, ky, kz, dt)


def project_modes(Fh, kx, ky, kz, use_numba=None):
    if USE_NUMBA if use_numba is None else (use_numba and HAVE_NUMBA):
        return project_modes_nb(np.ascontiguousarray(Fh), kx, ky, kz)
    return project_modes_np(Fh, kx, ky, kz)


def divergence_modes(Fh, kx, ky, kz, use_numba=None):
    if USE_NUMBA if use_numba is None else (use_numba and HAVE_NUMBA):
        return divergence_modes_nb(np.ascontiguousarray(Fh), kx, ky, kz)
    return divergence_modes_np(Fh, kx, ky, kz)
