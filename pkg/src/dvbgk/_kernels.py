"""Hot numerical kernels: moment-matching Newton and periodic spline advection.

Each kernel has a numba ``@njit`` implementation and a vectorized numpy
fallback; :mod:`dvbgk.backend` picks one at import time.  The public entry
points are :func:`newton_conservative` and :func:`spline_advect`.
"""

import numpy as np

from .backend import HAVE_NUMBA

if HAVE_NUMBA:
    from numba import njit

_MAX_HALVINGS = 8


def sample_maxwellian_rows(params, V, V2):
    """Sample Maxwellians with per-row parameters on the velocity grid.

    params: (Nc, d+2) columns [rho, U_1..U_d, T]; V: (Nq, d); V2: (Nq,) = |v|^2.
    Returns (Nc, Nq) values rho/(2 pi T)^{d/2} exp(-|v-U|^2 / (2T)).
    """
    d = V.shape[1]
    rho = params[:, 0]
    U = params[:, 1 : 1 + d]
    T = params[:, -1]
    usq = np.einsum("nd,nd->n", U, U)
    # |v - U|^2 = |v|^2 - 2 v.U + |U|^2
    arg = V2[None, :] - 2.0 * (U @ V.T) + usq[:, None]
    coef = rho / (2.0 * np.pi * T) ** (0.5 * d)
    return coef[:, None] * np.exp(-arg / (2.0 * T[:, None]))


def _targets_and_scales(macro, d):
    """Raw moment targets (rho, rho U, rho(|U|^2 + d T)) and residual scales."""
    rho = macro[:, 0]
    U = macro[:, 1 : 1 + d]
    T = macro[:, -1]
    usq = np.einsum("nd,nd->n", U, U)
    tgt = np.empty_like(macro)
    tgt[:, 0] = rho
    tgt[:, 1 : 1 + d] = rho[:, None] * U
    tgt[:, -1] = rho * (usq + d * T)
    scale = np.empty_like(macro)
    scale[:, 0] = rho
    scale[:, 1 : 1 + d] = (rho * np.sqrt(T))[:, None]
    scale[:, -1] = rho * d * T  # thermal scale keeps the T-residual relative
    return tgt, scale


def _newton_numpy(macro, V, V2, w, tol, max_iter):
    Nc = macro.shape[0]
    Nq, d = V.shape
    m = d + 2
    B = np.concatenate([np.ones((Nq, 1)), V, V2[:, None]], axis=1)
    Bw = B * w[:, None]
    tgt, scale = _targets_and_scales(macro, d)

    params = macro.copy()
    iters = np.zeros(Nc, dtype=np.int64)
    active = np.arange(Nc)

    for _ in range(max_iter):
        if active.size == 0:
            break
        p = params[active]
        M = sample_maxwellian_rows(p, V, V2)
        r = M @ Bw - tgt[active]
        rn = np.max(np.abs(r) / scale[active], axis=1)
        keep = rn >= tol
        active = active[keep]
        if active.size == 0:
            break
        p, M, r, rn = p[keep], M[keep], r[keep], rn[keep]
        iters[active] += 1

        U = p[:, 1 : 1 + d]
        T = p[:, -1]
        # dM/d(rho, U_i, T) assembled against the weighted moment basis
        c = V[None, :, :] - U[:, None, :]
        csq = np.einsum("nqd,nqd->nq", c, c)
        dM = np.empty((p.shape[0], Nq, m))
        dM[:, :, 0] = M / p[:, 0][:, None]
        dM[:, :, 1 : 1 + d] = M[:, :, None] * c / T[:, None, None]
        dM[:, :, -1] = M * (csq / (2.0 * T[:, None] ** 2) - d / (2.0 * T[:, None]))
        J = np.einsum("nqj,qi->nij", dM, Bw)
        delta = np.linalg.solve(J, r[:, :, None])[:, :, 0]

        s = np.ones(p.shape[0])
        cand = p - delta
        for _h in range(_MAX_HALVINGS):
            bad_state = (cand[:, 0] <= 0.0) | (cand[:, -1] <= 0.0)
            Mc = sample_maxwellian_rows(np.where(bad_state[:, None], p, cand), V, V2)
            rn_new = np.max(np.abs(Mc @ Bw - tgt[active]) / scale[active], axis=1)
            worse = bad_state | ((rn_new > rn) & (rn_new >= tol))
            if not worse.any():
                break
            s = np.where(worse, 0.5 * s, s)
            cand = np.where(worse[:, None], p - s[:, None] * delta, cand)
        params[active] = cand

    M_all = sample_maxwellian_rows(params, V, V2)
    resid = np.max(np.abs(M_all @ Bw - tgt) / scale, axis=1)
    return params, M_all, iters, resid, resid < tol


if HAVE_NUMBA:

    @njit(cache=True)
    def _solve_small(A, b):
        """In-place Gaussian elimination with partial pivoting for m<=5 systems."""
        m = A.shape[0]
        for k in range(m):
            piv = k
            big = abs(A[k, k])
            for i in range(k + 1, m):
                if abs(A[i, k]) > big:
                    big = abs(A[i, k])
                    piv = i
            if piv != k:
                for j in range(m):
                    tmp = A[k, j]
                    A[k, j] = A[piv, j]
                    A[piv, j] = tmp
                tmp = b[k]
                b[k] = b[piv]
                b[piv] = tmp
            inv = 1.0 / A[k, k]
            for i in range(k + 1, m):
                f = A[i, k] * inv
                if f != 0.0:
                    for j in range(k, m):
                        A[i, j] -= f * A[k, j]
                    b[i] -= f * b[k]
        for k in range(m - 1, -1, -1):
            acc = b[k]
            for j in range(k + 1, m):
                acc -= A[k, j] * b[j]
            b[k] = acc / A[k, k]
        return b

    @njit(cache=True)
    def _cell_moments(pr, V, V2, w, Mrow, mom):
        """Sample one Maxwellian row and accumulate its weighted moments."""
        Nq, d = V.shape
        m = d + 2
        rho = pr[0]
        T = pr[m - 1]
        usq = 0.0
        for a in range(d):
            usq += pr[1 + a] * pr[1 + a]
        coef = rho / (2.0 * np.pi * T) ** (0.5 * d)
        inv2T = 1.0 / (2.0 * T)
        for i in range(m):
            mom[i] = 0.0
        for q in range(Nq):
            dot = 0.0
            for a in range(d):
                dot += V[q, a] * pr[1 + a]
            val = coef * np.exp(-(V2[q] - 2.0 * dot + usq) * inv2T)
            Mrow[q] = val
            wv = w[q] * val
            mom[0] += wv
            for a in range(d):
                mom[1 + a] += wv * V[q, a]
            mom[m - 1] += wv * V2[q]

    @njit(cache=True)
    def _newton_numba(macro, V, V2, w, tol, max_iter):
        Nc = macro.shape[0]
        Nq, d = V.shape
        m = d + 2
        params = macro.copy()
        M_out = np.empty((Nc, Nq))
        iters = np.zeros(Nc, dtype=np.int64)
        resid = np.empty(Nc)
        ok = np.zeros(Nc, dtype=np.bool_)

        tgt = np.empty(m)
        scale = np.empty(m)
        mom = np.empty(m)
        momc = np.empty(m)
        r = np.empty(m)
        J = np.empty((m, m))
        delta = np.empty(m)
        pc = np.empty(m)
        Mc = np.empty(Nq)
        cvec = np.empty(d)

        for n in range(Nc):
            p = params[n]
            rho_t = macro[n, 0]
            T_t = macro[n, m - 1]
            usq_t = 0.0
            for a in range(d):
                usq_t += macro[n, 1 + a] * macro[n, 1 + a]
            tgt[0] = rho_t
            for a in range(d):
                tgt[1 + a] = rho_t * macro[n, 1 + a]
            tgt[m - 1] = rho_t * (usq_t + d * T_t)
            scale[0] = rho_t
            sm = rho_t * np.sqrt(T_t)
            for a in range(d):
                scale[1 + a] = sm
            scale[m - 1] = rho_t * d * T_t

            _cell_moments(p, V, V2, w, M_out[n], mom)
            rn = 0.0
            for i in range(m):
                r[i] = mom[i] - tgt[i]
                v = abs(r[i]) / scale[i]
                if v > rn:
                    rn = v

            it = 0
            while rn >= tol and it < max_iter:
                it += 1
                # Jacobian of the weighted moments w.r.t. (rho, U, T)
                T = p[m - 1]
                inv_rho = 1.0 / p[0]
                invT = 1.0 / T
                for i in range(m):
                    for j in range(m):
                        J[i, j] = 0.0
                for q in range(Nq):
                    val = M_out[n, q]
                    csq = 0.0
                    for a in range(d):
                        cvec[a] = V[q, a] - p[1 + a]
                        csq += cvec[a] * cvec[a]
                    g0 = val * inv_rho
                    gT = val * (csq * 0.5 * invT * invT - 0.5 * d * invT)
                    wq = w[q]
                    for i in range(m):
                        if i == 0:
                            bi = 1.0
                        elif i == m - 1:
                            bi = V2[q]
                        else:
                            bi = V[q, i - 1]
                        bw = wq * bi
                        J[i, 0] += bw * g0
                        for a in range(d):
                            J[i, 1 + a] += bw * val * cvec[a] * invT
                        J[i, m - 1] += bw * gT
                for i in range(m):
                    delta[i] = r[i]
                _solve_small(J, delta)

                s = 1.0
                accepted = False
                rn_new = rn
                for _h in range(_MAX_HALVINGS):
                    for i in range(m):
                        pc[i] = p[i] - s * delta[i]
                    if pc[0] > 0.0 and pc[m - 1] > 0.0:
                        _cell_moments(pc, V, V2, w, Mc, momc)
                        rn_new = 0.0
                        for i in range(m):
                            v = abs(momc[i] - tgt[i]) / scale[i]
                            if v > rn_new:
                                rn_new = v
                        if rn_new <= rn or rn_new < tol:
                            accepted = True
                            break
                    s *= 0.5
                if not accepted:
                    break
                for i in range(m):
                    p[i] = pc[i]
                    mom[i] = momc[i]
                    r[i] = mom[i] - tgt[i]
                M_out[n, :] = Mc
                rn = rn_new

            resid[n] = rn
            iters[n] = it
            ok[n] = rn < tol
        return params, M_out, iters, resid, ok


def newton_conservative(macro, V, V2, w, tol=1e-12, max_iter=50):
    """Fit Maxwellian parameters so discrete moments match ``macro`` exactly.

    macro: (Nc, d+2) rows [rho, U, T] of target moments.  Returns
    (params, M, iters, resid, ok) where M holds the fitted Maxwellian values
    and resid the final scaled residual per cell.
    """
    macro = np.ascontiguousarray(macro, dtype=np.float64)
    if HAVE_NUMBA:
        return _newton_numba(macro, V, V2, w, tol, max_iter)
    return _newton_numpy(macro, V, V2, w, tol, max_iter)


# ---------------------------------------------------------------------------
# Periodic cubic-spline advection (uniform shift per column)
# ---------------------------------------------------------------------------


def _bspline_weights(t):
    """Cubic B-spline evaluation weights for fractional offset t in [0,1)."""
    omt = 1.0 - t
    wm1 = omt * omt * omt / 6.0
    w0 = (3.0 * t * t * t - 6.0 * t * t + 4.0) / 6.0
    w1 = (-3.0 * t * t * t + 3.0 * t * t + 3.0 * t + 1.0) / 6.0
    w2 = t * t * t / 6.0
    return wm1, w0, w1, w2


def _spline_numpy(values, shifts):
    """values: (Ncols, N); shifts in grid units; returns advected copy."""
    Ncols, N = values.shape
    # cyclic collocation solve (1/6, 2/3, 1/6) via its circulant spectrum
    kern = np.zeros(N)
    kern[0] = 2.0 / 3.0
    kern[1] = 1.0 / 6.0
    kern[-1] = 1.0 / 6.0
    lam = np.fft.rfft(kern)
    coef = np.fft.irfft(np.fft.rfft(values, axis=1) / lam[None, :], n=N, axis=1)

    z = -shifts  # departure offset: g(x_i) = f(x_i - s)
    base = np.floor(z).astype(np.int64)
    t = z - base
    wm1, w0, w1, w2 = _bspline_weights(t)
    cols = np.arange(Ncols)[:, None]
    i = np.arange(N)[None, :]
    out = np.zeros_like(values)
    for k, wk in ((-1, wm1), (0, w0), (1, w1), (2, w2)):
        idx = (i + base[:, None] + k) % N
        out += wk[:, None] * coef[cols, idx]
    return out


if HAVE_NUMBA:

    @njit(cache=True)
    def _spline_numba(values, shifts):
        Ncols, N = values.shape
        out = np.empty_like(values)
        coef = np.empty(N)
        work = np.empty(N)
        # Thomas coefficients for the non-cyclic part; Sherman-Morrison corners
        a = 1.0 / 6.0
        b = 2.0 / 3.0
        gamma = -b
        bb = np.empty(N)
        bb[0] = b - gamma
        bb[N - 1] = b - a * a / gamma
        for i in range(1, N - 1):
            bb[i] = b
        cp = np.empty(N)
        # forward-elimination multipliers (same for every column)
        cp[0] = a / bb[0]
        for i in range(1, N):
            bb[i] = bb[i] - a * cp[i - 1]
            cp[i] = a / bb[i]
        # solve T x2 = u, u = (gamma, 0, ..., 0, a)
        x2 = np.zeros(N)
        x2[0] = gamma / bb[0]
        for i in range(1, N - 1):
            x2[i] = (0.0 - a * x2[i - 1]) / bb[i]
        x2[N - 1] = (a - a * x2[N - 2]) / bb[N - 1]
        for i in range(N - 2, -1, -1):
            x2[i] -= cp[i] * x2[i + 1]
        corr = 1.0 + x2[0] + a * x2[N - 1] / gamma

        for col in range(Ncols):
            # Thomas solve T x1 = f
            work[0] = values[col, 0] / bb[0]
            for i in range(1, N):
                work[i] = (values[col, i] - a * work[i - 1]) / bb[i]
            for i in range(N - 2, -1, -1):
                work[i] -= cp[i] * work[i + 1]
            fact = (work[0] + a * work[N - 1] / gamma) / corr
            for i in range(N):
                coef[i] = work[i] - fact * x2[i]

            z = -shifts[col]
            base = int(np.floor(z))
            t = z - base
            omt = 1.0 - t
            wm1 = omt * omt * omt / 6.0
            w0 = (3.0 * t * t * t - 6.0 * t * t + 4.0) / 6.0
            w1 = (-3.0 * t * t * t + 3.0 * t * t + 3.0 * t + 1.0) / 6.0
            w2 = t * t * t / 6.0
            for i in range(N):
                j = i + base
                out[col, i] = (
                    wm1 * coef[(j - 1) % N]
                    + w0 * coef[j % N]
                    + w1 * coef[(j + 1) % N]
                    + w2 * coef[(j + 2) % N]
                )
        return out


def spline_advect(values, shifts):
    """Advect each row of ``values`` periodically by ``shifts`` grid units.

    Interpolation is the C^2 periodic cubic spline through the row values;
    evaluation happens at the departure points ``x_i - shift``.
    """
    values = np.ascontiguousarray(values, dtype=np.float64)
    shifts = np.ascontiguousarray(shifts, dtype=np.float64)
    if HAVE_NUMBA:
        return _spline_numba(values, shifts)
    return _spline_numpy(values, shifts)
