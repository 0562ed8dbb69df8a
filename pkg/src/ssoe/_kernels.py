"""Numba kernels for the lagged state-space recursions.

State histories are stored as ``(K, L + T)`` matrices where ``L = max(lags)``.
Column ``L + t`` (zero based ``t``) holds the state after observation ``t + 1``;
columns ``0 .. L - 1`` are the pre-sample states at times ``1 - L .. 0``.
"""

import numpy as np
from numba import njit

TREND_NONE, TREND_ADD, TREND_MUL = 0, 1, 2
SEASON_NONE, SEASON_ADD, SEASON_MUL = 0, 1, 2
ERROR_ADD, ERROR_MUL = 1, 2


# --------------------------------------------------------------------------
# Linear (pure additive) engine
# --------------------------------------------------------------------------


@njit(cache=True)
def _linear_step(v, w, F, g, offset, const, rank_one, e, out):
    K = w.size
    if rank_one:
        s = 0.0
        for j in range(K):
            s += v[j]
        for j in range(K):
            out[j] = F[j, 0] * s + g[j] * e + offset[j]
    else:
        for i in range(K):
            acc = 0.0
            for j in range(K):
                acc += F[i, j] * v[j]
            out[i] = acc + g[i] * e + offset[i]


@njit(cache=True)
def linear_filter(y, w, F, g, lags, offset, const, pre, rank_one):
    T = y.size
    K = w.size
    L = pre.shape[1]
    hist = np.empty((K, L + T))
    hist[:, :L] = pre
    fitted = np.empty(T)
    resid = np.empty(T)
    v = np.empty(K)
    out = np.empty(K)
    for t in range(T):
        col = L + t
        yhat = const
        for j in range(K):
            v[j] = hist[j, col - lags[j]]
            yhat += w[j] * v[j]
        e = y[t] - yhat
        fitted[t] = yhat
        resid[t] = e
        _linear_step(v, w, F, g, offset, const, rank_one, e, out)
        for j in range(K):
            hist[j, col] = out[j]
    return fitted, resid, hist


@njit(cache=True)
def linear_generate(eps, w, F, g, lags, offset, const, pre, rank_one):
    n, T = eps.shape
    K = w.size
    L = pre.shape[1]
    ys = np.empty((n, T))
    hist = np.empty((n, K, L + T))
    v = np.empty(K)
    out = np.empty(K)
    for p in range(n):
        hist[p, :, :L] = pre
        for t in range(T):
            col = L + t
            yhat = const
            for j in range(K):
                v[j] = hist[p, j, col - lags[j]]
                yhat += w[j] * v[j]
            e = eps[p, t]
            ys[p, t] = yhat + e
            _linear_step(v, w, F, g, offset, const, rank_one, e, out)
            for j in range(K):
                hist[p, j, col] = out[j]
    return ys, hist


# --------------------------------------------------------------------------
# ETS taxonomy engine (lags 1, 1, m)
# --------------------------------------------------------------------------


@njit(cache=True)
def _ets_parts(level, trend, season, ttype, stype, phi):
    """Return (one-step prediction, level-trend combination, damped trend)."""
    if ttype == TREND_ADD:
        bd = phi * trend
        mu = level + bd
    elif ttype == TREND_MUL:
        bd = trend ** phi
        mu = level * bd
    else:
        bd = 0.0
        mu = level
    if stype == SEASON_ADD:
        yhat = mu + season
    elif stype == SEASON_MUL:
        yhat = mu * season
    else:
        yhat = mu
    return yhat, mu, bd


@njit(cache=True)
def _ets_update(level, season, mu, bd, e, ttype, stype, alpha, beta, gamma):
    # e is the additive-scale error y - yhat for both error types
    if stype == SEASON_MUL:
        e_lt = e / season
    else:
        e_lt = e
    new_level = mu + alpha * e_lt
    if ttype == TREND_ADD:
        new_trend = bd + beta * e_lt
    elif ttype == TREND_MUL:
        new_trend = bd + beta * e_lt / level
    else:
        new_trend = 0.0
    if stype == SEASON_ADD:
        new_season = season + gamma * e
    elif stype == SEASON_MUL:
        new_season = season + gamma * e / mu
    else:
        new_season = 0.0
    return new_level, new_trend, new_season


@njit(cache=True)
def _ets_bad(level, trend, season, yhat, etype, ttype, stype):
    if not np.isfinite(yhat):
        return True
    if etype == ERROR_MUL and yhat <= 0.0:
        return True
    if (ttype == TREND_MUL or stype == SEASON_MUL) and level <= 0.0:
        return True
    if ttype == TREND_MUL and trend <= 0.0:
        return True
    if stype == SEASON_MUL and season <= 0.0:
        return True
    return False


@njit(cache=True)
def ets_filter(y, etype, ttype, stype, alpha, beta, gamma, phi, m, pre):
    """Run the taxonomy recursion. Returns fitted, residuals, history, ok."""
    T = y.size
    K = pre.shape[0]
    L = pre.shape[1]
    hist = np.empty((K, L + T))
    hist[:, :L] = pre
    fitted = np.empty(T)
    resid = np.empty(T)
    it = 1
    iseas = 2 if ttype != TREND_NONE else 1
    ok = True
    for t in range(T):
        col = L + t
        level = hist[0, col - 1]
        trend = hist[it, col - 1] if ttype != TREND_NONE else 0.0
        season = hist[iseas, col - m] if stype != SEASON_NONE else 0.0
        yhat, mu, bd = _ets_parts(level, trend, season, ttype, stype, phi)
        if _ets_bad(level, trend, season, yhat, etype, ttype, stype):
            ok = False
            fitted[t:] = np.nan
            resid[t:] = np.nan
            hist[:, col:] = np.nan
            break
        e = y[t] - yhat
        fitted[t] = yhat
        resid[t] = e / yhat if etype == ERROR_MUL else e
        nl, nt, ns = _ets_update(level, season, mu, bd, e, ttype, stype,
                                 alpha, beta, gamma)
        hist[0, col] = nl
        if ttype != TREND_NONE:
            hist[it, col] = nt
        if stype != SEASON_NONE:
            hist[iseas, col] = ns
    return fitted, resid, hist, ok


@njit(cache=True)
def ets_generate(eps, etype, ttype, stype, alpha, beta, gamma, phi, m, pre):
    """Generate paths; ``eps`` are additive errors or relative errors per etype.

    Paths that leave the admissible region are filled with NaN from that point.
    """
    n, T = eps.shape
    K = pre.shape[0]
    L = pre.shape[1]
    ys = np.empty((n, T))
    hist = np.empty((n, K, L + T))
    it = 1
    iseas = 2 if ttype != TREND_NONE else 1
    for p in range(n):
        hist[p, :, :L] = pre
        for t in range(T):
            col = L + t
            level = hist[p, 0, col - 1]
            trend = hist[p, it, col - 1] if ttype != TREND_NONE else 0.0
            season = hist[p, iseas, col - m] if stype != SEASON_NONE else 0.0
            yhat, mu, bd = _ets_parts(level, trend, season, ttype, stype, phi)
            if not np.isfinite(yhat):
                ys[p, t:] = np.nan
                hist[p, :, col:] = np.nan
                break
            if etype == ERROR_MUL:
                e = yhat * eps[p, t]
            else:
                e = eps[p, t]
            ys[p, t] = yhat + e
            nl, nt, ns = _ets_update(level, season, mu, bd, e, ttype, stype,
                                     alpha, beta, gamma)
            hist[p, 0, col] = nl
            if ttype != TREND_NONE:
                hist[p, it, col] = nt
            if stype != SEASON_NONE:
                hist[p, iseas, col] = ns
    return ys, hist


@njit(cache=True)
def ets_neg_loglik(y, etype, ttype, stype, alpha, beta, gamma, phi, m, pre, floor):
    """Negative concentrated log-likelihood without storing the history.

    Returns inf for inadmissible paths and ``-1e8`` when the residual
    variance is at or below ``floor``.
    """
    T = y.size
    K = pre.shape[0]
    L = pre.shape[1]
    lev = pre[0, L - 1]
    tr = pre[1, L - 1] if ttype != TREND_NONE else 0.0
    iseas = 2 if ttype != TREND_NONE else 1
    ring = np.empty(m)
    if stype != SEASON_NONE:
        for k in range(m):
            ring[k] = pre[iseas, L - m + k]
    sse = 0.0
    slog = 0.0
    for t in range(T):
        k = t % m
        season = ring[k] if stype != SEASON_NONE else 0.0
        yhat, mu, bd = _ets_parts(lev, tr, season, ttype, stype, phi)
        if _ets_bad(lev, tr, season, yhat, etype, ttype, stype):
            return np.inf
        e = y[t] - yhat
        if etype == ERROR_MUL:
            r = e / yhat
            slog += np.log(np.abs(yhat))
        else:
            r = e
        sse += r * r
        nl, nt, ns = _ets_update(lev, season, mu, bd, e, ttype, stype, alpha, beta, gamma)
        lev = nl
        tr = nt
        if stype != SEASON_NONE:
            ring[k] = ns
    s2 = sse / T
    if not np.isfinite(s2):
        return np.inf
    if s2 <= floor:
        return -1e8
    ll = -0.5 * T * (np.log(2 * np.pi) + 1.0 + np.log(s2))
    if etype == ERROR_MUL:
        ll -= slog
    return -ll


@njit(cache=True)
def head_block(hist, lags):
    """Tail of a pass mapped onto the pre-sample layout of the reversed pass."""
    K, width = hist.shape
    L = 0
    for j in range(K):
        if lags[j] > L:
            L = lags[j]
    block = np.empty((K, L))
    for j in range(K):
        lj = lags[j]
        for k in range(1, L + 1):
            kk = k if k < lj else lj
            block[j, L - k] = hist[j, width - 1 - lj + kk]
    return block


@njit(cache=True)
def arima_backcast(y, w, F, g, lags, offset, const, pre, rank_one, iterations, eta):
    """Forward/backward sweeps for ARIMA; the pre-sample block is rebuilt from
    back-forecast observations with zero pre-sample shocks.
    Returns the block, all NaN if a sweep diverges."""
    K = w.size
    L = pre.shape[1]
    y_rev = y[::-1].copy()
    block = pre.copy()
    zeros = np.zeros((1, L))
    for _ in range(iterations):
        fitted, resid, hist = linear_filter(y, w, F, g, lags, offset, const, block, rank_one)
        if not np.all(np.isfinite(fitted)):
            return np.full((K, L), np.nan)
        tail = head_block(hist, lags)
        fitted, resid, hist = linear_filter(y_rev, w, F, g, lags, offset, const, tail, rank_one)
        if not np.all(np.isfinite(fitted)):
            return np.full((K, L), np.nan)
        final = hist[:, hist.shape[1] - L:].copy()
        ahead, _ = linear_generate(zeros, w, F, g, lags, offset, const, final, rank_one)
        for j in range(K):
            for k in range(L):
                block[j, k] = eta[j] * ahead[0, L - 1 - k]
    return block
