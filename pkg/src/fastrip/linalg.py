"""Cyclic Jacobi eigenvalues for batches of small Hermitian matrices."""

import numpy as np

from .errors import NoConvergence, SizeGuard

JACOBI_TOL = 1e-12
MAX_SWEEPS = 60
MAX_COLUMNS = 64


def _off_norm(G):
    off = G.copy()
    idx = np.arange(G.shape[-1])
    off[..., idx, idx] = 0
    return np.sqrt(np.sum(np.abs(off) ** 2, axis=(-2, -1)))


def jacobi_eigvalsh(G, tol=JACOBI_TOL, max_sweeps=MAX_SWEEPS):
    """Eigenvalues of Hermitian ``G`` (shape ``(..., m, m)``), ascending.

    Each ``(p, q)`` rotation first removes the phase of ``G[p, q]`` and then
    applies the classical real Jacobi rotation, for every matrix in the
    batch at once. Sweeps stop when the off-diagonal Frobenius norm is below
    ``tol`` times the Frobenius norm for every matrix.
    """
    G = np.array(G, dtype=np.result_type(G, np.float64), copy=True)
    m = G.shape[-1]
    if G.shape[-2] != m:
        raise ValueError(f"expected square matrices, got shape {G.shape}")
    complex_case = np.iscomplexobj(G)
    scale = np.sqrt(np.sum(np.abs(G) ** 2, axis=(-2, -1)))
    threshold = tol * np.maximum(scale, np.finfo(float).tiny)

    for _ in range(max_sweeps):
        if np.all(_off_norm(G) <= threshold):
            return np.sort(np.diagonal(G, axis1=-2, axis2=-1).real, axis=-1)
        for p in range(m - 1):
            for q in range(p + 1, m):
                _rotate(G, p, q, complex_case)
    if np.all(_off_norm(G) <= threshold):
        return np.sort(np.diagonal(G, axis1=-2, axis2=-1).real, axis=-1)
    raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")


def _rotate(G, p, q, complex_case):
    g_pq = G[..., p, q]
    mag = np.abs(g_pq)
    active = mag > 0
    if not np.any(active):
        return
    a_pp = G[..., p, p].real
    a_qq = G[..., q, q].real
    safe = np.where(active, mag, 1.0)
    with np.errstate(over="ignore"):
        # theta = inf only when g_pq is negligible; t then becomes 0
        theta = (a_qq - a_pp) / (2.0 * safe)
        t = np.sign(theta) / (np.abs(theta) + np.hypot(theta, 1.0))
    t = np.where(theta == 0, 1.0, t)
    t = np.where(active, t, 0.0)
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    if complex_case:
        phase = np.where(active, np.conj(g_pq) / safe, 1.0)
    else:
        phase = np.where(active, np.sign(g_pq), 1.0)
    # R = [[c, s], [-s*phase, c*phase]] acting on columns p, q; G <- R^* G R
    col_p = G[..., :, p].copy()
    col_q = G[..., :, q].copy()
    G[..., :, p] = c[..., None] * col_p - (s * phase)[..., None] * col_q
    G[..., :, q] = s[..., None] * col_p + (c * phase)[..., None] * col_q
    row_p = G[..., p, :].copy()
    row_q = G[..., q, :].copy()
    cphase = np.conj(phase) if complex_case else phase
    G[..., p, :] = c[..., None] * row_p - (s * cphase)[..., None] * row_q
    G[..., q, :] = s[..., None] * row_p + (c * cphase)[..., None] * row_q
    G[..., p, q] = 0
    G[..., q, p] = 0


def extremal_singular_values(M):
    """``(sigma_min, sigma_max)`` of ``M`` (shape ``(..., k, s)``).

    Computed from the extreme Jacobi eigenvalues of the Gram matrix
    ``M^* M``; negative rounding residue is clipped to zero.
    """
    M = np.asarray(M)
    if M.shape[-1] > MAX_COLUMNS:
        raise SizeGuard(f"at most {MAX_COLUMNS} columns supported, got {M.shape[-1]}")
    gram = np.swapaxes(M.conj(), -1, -2) @ M
    eig = jacobi_eigvalsh(gram)
    eig = np.clip(eig, 0.0, None)
    return np.sqrt(eig[..., 0]), np.sqrt(eig[..., -1])
