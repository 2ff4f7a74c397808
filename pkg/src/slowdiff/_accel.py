"""Hot numeric loops: numba-jitted kernels with a pure-numpy fallback.

Every O(N*Q) or O(N^2) inner loop of the package lives here in two
implementations with identical semantics:

* ``*_numba`` -- explicit loops compiled with ``@njit(cache=True)``,
* ``*_numpy`` -- vectorized broadcasting fallback.

The active backend is chosen once at import time from the environment:
``SLOWDIFF_NUMBA=0`` (or ``false``/``no``/``off``) selects the numpy path;
anything else selects numba when it is importable.  The public names
(``conv_grad``, ``gauss_density``, ...) are bound to the active backend,
and ``BACKEND`` records which one won.  ``benchmarks/bench_kernels.py``
imports both suffixed variants to compare them.

All functions take C-contiguous float64 arrays: ``pos`` of shape (N, d),
``w`` of shape (N,), query points of shape (Q, d).  Kernel terms arrive as
parallel arrays ``coeffs``/``exps`` where each term means
``c * |x|**e / e`` (``e == 0`` means ``c * log|x|``).

Determinism: all reductions run in a fixed sequential order, so results
are bit-reproducible run to run on a given backend.  ``SLOWDIFF_THREADS``
caps numba's thread pool (0/unset = all cores, 1 = sequential); the
kernels below are single-threaded either way, so any cap is honoured.
"""

from __future__ import annotations

import os
import warnings

import numpy as np

_TWO_PI = 2.0 * np.pi


def _env_flag(name: str, default: bool) -> bool:
    raw = os.environ.get(name, "").strip().lower()
    if not raw:
        return default
    return raw not in ("0", "false", "no", "off")


# ---------------------------------------------------------------------------
# pure-numpy implementations
# ---------------------------------------------------------------------------

def _powerlaw_slope_numpy(r, coeffs, exps):
    """sum_t c_t * r**(e_t - 2); the radial factor of the kernel gradient."""
    s = np.zeros_like(r)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for c, e in zip(coeffs, exps):
            if e == 2.0:
                s += c
            elif e == 1.0:
                s += c / r
            else:
                s += c * r ** (e - 2.0)
    return s


def conv_grad_numpy(pos, w, queries, coeffs, exps):
    """sum_j w_j grad K(q - x_j), skipping summands with q == x_j exactly."""
    diff = queries[:, None, :] - pos[None, :, :]
    r2 = np.einsum("qjk,qjk->qj", diff, diff)
    r = np.sqrt(r2)
    s = _powerlaw_slope_numpy(r, coeffs, exps)
    s[r2 == 0.0] = 0.0
    return np.einsum("qj,qjk->qk", s * w[None, :], diff)


def interaction_terms_numpy(pos, w, coeffs, exps):
    """Unordered-pair energy terms w_i w_j K(x_i - x_j), i < j."""
    n = pos.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    diff = pos[iu] - pos[ju]
    r = np.sqrt(np.einsum("pk,pk->p", diff, diff))
    val = np.zeros_like(r)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for c, e in zip(coeffs, exps):
            if e == 0.0:
                val += c * np.log(r)
            else:
                val += (c / e) * r ** e
    return (w[iu] * w[ju]) * val


def gauss_density_numpy(pos, w, queries, eps, cutoff=0.0):
    norm = (_TWO_PI * eps * eps) ** (-0.5 * pos.shape[1])
    diff = queries[:, None, :] - pos[None, :, :]
    r2 = np.einsum("qjk,qjk->qj", diff, diff)
    phi = norm * np.exp(-r2 / (2.0 * eps * eps))
    if cutoff > 0.0:
        phi[r2 > cutoff * cutoff] = 0.0
    return phi @ w


def gauss_density_grad_numpy(pos, w, queries, eps, cutoff=0.0):
    norm = (_TWO_PI * eps * eps) ** (-0.5 * pos.shape[1])
    diff = queries[:, None, :] - pos[None, :, :]
    r2 = np.einsum("qjk,qjk->qj", diff, diff)
    phi = norm * np.exp(-r2 / (2.0 * eps * eps))
    if cutoff > 0.0:
        phi[r2 > cutoff * cutoff] = 0.0
    coef = -(phi * w[None, :]) / (eps * eps)
    return np.einsum("qj,qjk->qk", coef, diff)


def weighted_phi_matrix_numpy(pos, w, eps):
    """Matrix of w_j * phi_eps(x_i - x_j); row sums are the blob density."""
    norm = (_TWO_PI * eps * eps) ** (-0.5 * pos.shape[1])
    diff = pos[:, None, :] - pos[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", diff, diff)
    return (norm * np.exp(-r2 / (2.0 * eps * eps))) * w[None, :]


def blob_velocity_numpy(pos, w, coeffs, exps, eps, m):
    """Gradient-flow velocity of the discrete interaction + blob entropy.

    Returns ``(v, bad_particle, log_power)`` where ``bad_particle`` is -1
    on success, else the first particle whose density power u**(m-2)
    would overflow (log power > 700).
    """
    n, d = pos.shape
    norm = (_TWO_PI * eps * eps) ** (-0.5 * d)
    diff = pos[:, None, :] - pos[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", diff, diff)
    phi = norm * np.exp(-r2 / (2.0 * eps * eps))
    u = phi @ w
    lg = (m - 2.0) * np.log(u)
    bad = np.nonzero(lg > 700.0)[0]
    if bad.size:
        i = int(bad[0])
        return np.zeros((n, d)), i, float(lg[i])
    p = np.exp(lg)
    r = np.sqrt(r2)
    s = _powerlaw_slope_numpy(r, coeffs, exps)
    g = s - phi * (p[:, None] + p[None, :]) / (eps * eps)
    g[r2 == 0.0] = 0.0
    v = -np.einsum("ij,ijk->ik", g * w[None, :], diff)
    return v, -1, 0.0


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

_use_numba = _env_flag("SLOWDIFF_NUMBA", True)

if _use_numba:
    try:
        import numba
        from numba import njit
    except ImportError:
        warnings.warn("numba unavailable; falling back to the numpy backend")
        _use_numba = False

if _use_numba:
    _threads = os.environ.get("SLOWDIFF_THREADS", "").strip()
    if _threads and _threads != "0":
        try:
            numba.set_num_threads(max(1, min(int(_threads), numba.config.NUMBA_NUM_THREADS)))
        except (ValueError, RuntimeError):
            warnings.warn("ignoring invalid SLOWDIFF_THREADS=%r" % _threads)

    @njit(cache=True)
    def conv_grad_numba(pos, w, queries, coeffs, exps):
        nq, d = queries.shape
        n = pos.shape[0]
        nt = coeffs.shape[0]
        out = np.zeros((nq, d))
        for q in range(nq):
            for j in range(n):
                r2 = 0.0
                for k in range(d):
                    dx = queries[q, k] - pos[j, k]
                    r2 += dx * dx
                if r2 == 0.0:
                    continue
                r = np.sqrt(r2)
                s = 0.0
                for t in range(nt):
                    e = exps[t]
                    if e == 2.0:
                        s += coeffs[t]
                    elif e == 1.0:
                        s += coeffs[t] / r
                    else:
                        s += coeffs[t] * r ** (e - 2.0)
                ws = w[j] * s
                for k in range(d):
                    out[q, k] += ws * (queries[q, k] - pos[j, k])
        return out

    @njit(cache=True)
    def interaction_terms_numba(pos, w, coeffs, exps):
        n, d = pos.shape
        nt = coeffs.shape[0]
        terms = np.empty(n * (n - 1) // 2)
        idx = 0
        for i in range(n):
            for j in range(i + 1, n):
                r2 = 0.0
                for k in range(d):
                    dx = pos[i, k] - pos[j, k]
                    r2 += dx * dx
                r = np.sqrt(r2)
                val = 0.0
                for t in range(nt):
                    e = exps[t]
                    if e == 0.0:
                        val += coeffs[t] * np.log(r)
                    else:
                        val += (coeffs[t] / e) * r ** e
                terms[idx] = (w[i] * w[j]) * val
                idx += 1
        return terms

    @njit(cache=True)
    def gauss_density_numba(pos, w, queries, eps, cutoff=0.0):
        nq, d = queries.shape
        n = pos.shape[0]
        norm = (_TWO_PI * eps * eps) ** (-0.5 * d)
        inv2e2 = 1.0 / (2.0 * eps * eps)
        c2 = cutoff * cutoff
        out = np.empty(nq)
        for q in range(nq):
            acc = 0.0
            for j in range(n):
                r2 = 0.0
                for k in range(d):
                    dx = queries[q, k] - pos[j, k]
                    r2 += dx * dx
                if c2 > 0.0 and r2 > c2:
                    continue
                acc += w[j] * np.exp(-r2 * inv2e2)
            out[q] = acc * norm
        return out

    @njit(cache=True)
    def gauss_density_grad_numba(pos, w, queries, eps, cutoff=0.0):
        nq, d = queries.shape
        n = pos.shape[0]
        norm = (_TWO_PI * eps * eps) ** (-0.5 * d)
        inv2e2 = 1.0 / (2.0 * eps * eps)
        inve2 = 1.0 / (eps * eps)
        c2 = cutoff * cutoff
        out = np.zeros((nq, d))
        for q in range(nq):
            for j in range(n):
                r2 = 0.0
                for k in range(d):
                    dx = queries[q, k] - pos[j, k]
                    r2 += dx * dx
                if c2 > 0.0 and r2 > c2:
                    continue
                coef = -w[j] * norm * np.exp(-r2 * inv2e2) * inve2
                for k in range(d):
                    out[q, k] += coef * (queries[q, k] - pos[j, k])
        return out

    @njit(cache=True)
    def weighted_phi_matrix_numba(pos, w, eps):
        n, d = pos.shape
        norm = (_TWO_PI * eps * eps) ** (-0.5 * d)
        inv2e2 = 1.0 / (2.0 * eps * eps)
        out = np.empty((n, n))
        for i in range(n):
            out[i, i] = norm * w[i]
            for j in range(i + 1, n):
                r2 = 0.0
                for k in range(d):
                    dx = pos[i, k] - pos[j, k]
                    r2 += dx * dx
                p = norm * np.exp(-r2 * inv2e2)
                out[i, j] = p * w[j]
                out[j, i] = p * w[i]
        return out

    @njit(cache=True)
    def blob_velocity_numba(pos, w, coeffs, exps, eps, m):
        n, d = pos.shape
        nt = coeffs.shape[0]
        norm = (_TWO_PI * eps * eps) ** (-0.5 * d)
        inv2e2 = 1.0 / (2.0 * eps * eps)
        inve2 = 1.0 / (eps * eps)
        # pass 1: symmetric Gaussian matrix and blob density at particles
        phi = np.empty((n, n))
        for i in range(n):
            phi[i, i] = norm
            for j in range(i + 1, n):
                r2 = 0.0
                for k in range(d):
                    dx = pos[i, k] - pos[j, k]
                    r2 += dx * dx
                p = norm * np.exp(-r2 * inv2e2)
                phi[i, j] = p
                phi[j, i] = p
        u = np.empty(n)
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += w[j] * phi[i, j]
            u[i] = acc
        # density powers u**(m-2), guarded in log space
        p = np.empty(n)
        for i in range(n):
            lg = (m - 2.0) * np.log(u[i])
            if lg > 700.0:
                return np.zeros((n, d)), i, lg
            p[i] = np.exp(lg)
        # pass 2: pairwise forces (antisymmetric, accumulated once per pair)
        v = np.zeros((n, d))
        for i in range(n):
            for j in range(i + 1, n):
                r2 = 0.0
                for k in range(d):
                    dx = pos[i, k] - pos[j, k]
                    r2 += dx * dx
                if r2 == 0.0:
                    continue
                r = np.sqrt(r2)
                s = 0.0
                for t in range(nt):
                    e = exps[t]
                    if e == 2.0:
                        s += coeffs[t]
                    elif e == 1.0:
                        s += coeffs[t] / r
                    else:
                        s += coeffs[t] * r ** (e - 2.0)
                g = s - phi[i, j] * (p[i] + p[j]) * inve2
                for k in range(d):
                    dx = pos[i, k] - pos[j, k]
                    v[i, k] -= w[j] * g * dx
                    v[j, k] += w[i] * g * dx
        return v, -1, 0.0


if _use_numba:
    BACKEND = "numba"
    conv_grad = conv_grad_numba
    interaction_terms = interaction_terms_numba
    gauss_density = gauss_density_numba
    gauss_density_grad = gauss_density_grad_numba
    weighted_phi_matrix = weighted_phi_matrix_numba
    blob_velocity = blob_velocity_numba
else:
    BACKEND = "numpy"
    conv_grad = conv_grad_numpy
    interaction_terms = interaction_terms_numpy
    gauss_density = gauss_density_numpy
    gauss_density_grad = gauss_density_grad_numpy
    weighted_phi_matrix = weighted_phi_matrix_numpy
    blob_velocity = blob_velocity_numpy
