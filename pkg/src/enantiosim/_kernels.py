"""Fixed-step RK4 propagation kernels for small dense Hilbert spaces.

The Hamiltonian reaches the kernels in a lowered form: a list of single-entry
coupling terms, each
    H[i, j] += coef * env(t)^pow * exp(i (rate t + phase)),   plus conjugate,
with the static level energies already folded into the term rates (propagation
runs in the frame of the static diagonal, which is exact and keeps the
integrator norm-safe).  Envelopes are addressed through a small table so each
is evaluated once per stage; slots past ``n_base`` hold pointwise products of
two base envelopes.

All kernels are deterministic: fixed step, fixed evaluation order.
"""

from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def deco(func):
            return func

        return deco


# Envelope kind codes (must match pulses.py).
_ENV_ZERO = 0
_ENV_SQUARE = 1
_ENV_COS_RAMP = 2
_ENV_GAUSSIAN = 3
_ENV_COS_SQUARED = 4
_ENV_SCHEDULE = 5

TWO_PI = 2.0 * math.pi


@njit(cache=True, nogil=True)
def _env_eval(kind, p0, p1, p2, sched_row, sched_n, t):
    if kind == _ENV_SQUARE:
        # p0 amplitude, p1 t_lo, p2 t_hi
        if p1 <= t < p2:
            return p0
        return 0.0
    if kind == _ENV_COS_RAMP:
        # p0 amplitude, p1 period, p2 start
        if p2 <= t < p2 + p1:
            return 0.5 * p0 * (1.0 - math.cos(TWO_PI * (t - p2) / p1))
        return 0.0
    if kind == _ENV_GAUSSIAN:
        # p0 amplitude, p1 width, p2 center; truncated at 3 widths
        if p2 - 3.0 * p1 <= t < p2 + 3.0 * p1:
            x = (t - p2) / p1
            return p0 * math.exp(-x * x)
        return 0.0
    if kind == _ENV_COS_SQUARED:
        # p0 amplitude, p1 period, p2 start
        if p2 <= t < p2 + p1:
            c = 1.0 - math.cos(TWO_PI * (t - p2) / p1)
            return 0.25 * p0 * c * c
        return 0.0
    if kind == _ENV_SCHEDULE:
        # p0 bin width; bins start at t = 0
        if t < 0.0:
            return 0.0
        idx = int(t / p0)
        if idx >= sched_n:
            return 0.0
        return sched_row[idx]
    return 0.0


@njit(cache=True, nogil=True)
def _fill_env_values(
    env_vals, t, t_mid, env_kind, env_params, sched_values, sched_n, prod_pairs
):
    # Piecewise-constant envelopes are resolved at the step midpoint so that
    # every RK4 stage of a step sees the same bin: a stage landing exactly on
    # a bin edge must not read the neighboring bin.
    n_base = env_kind.shape[0]
    for e in range(n_base):
        kind = env_kind[e]
        te = t_mid if (kind == _ENV_SQUARE or kind == _ENV_SCHEDULE) else t
        env_vals[e] = _env_eval(
            kind,
            env_params[e, 0],
            env_params[e, 1],
            env_params[e, 2],
            sched_values[e],
            sched_n[e],
            te,
        )
    for p in range(prod_pairs.shape[0]):
        env_vals[n_base + p] = env_vals[prod_pairs[p, 0]] * env_vals[prod_pairs[p, 1]]


@njit(cache=True, nogil=True)
def _assemble(H, t, term_i, term_j, coef, rate, phase, env_id, env_pow, env_vals):
    dim = H.shape[0]
    for a in range(dim):
        for b in range(dim):
            H[a, b] = 0.0 + 0.0j
    for k in range(term_i.shape[0]):
        ev = env_vals[env_id[k]]
        if ev == 0.0:
            continue
        if env_pow[k] == 2:
            ev = ev * ev
        ang = rate[k] * t + phase[k]
        z = coef[k] * ev * complex(math.cos(ang), math.sin(ang))
        H[term_i[k], term_j[k]] += z
        H[term_j[k], term_i[k]] += z.conjugate()


@njit(cache=True, nogil=True)
def _schrodinger_rhs(out, H, psi):
    dim = psi.shape[0]
    for a in range(dim):
        acc = 0.0 + 0.0j
        for b in range(dim):
            acc += H[a, b] * psi[b]
        out[a] = -1.0j * acc


@njit(cache=True, nogil=True)
def _lindblad_rhs(out, H, rho, ch_from, ch_to, ch_rate, scratch):
    dim = rho.shape[0]
    # scratch = H @ rho
    for a in range(dim):
        for b in range(dim):
            acc = 0.0 + 0.0j
            for c in range(dim):
                acc += H[a, c] * rho[c, b]
            scratch[a, b] = acc
    # out = -i (H rho - rho H) = -i (scratch - scratch^dagger) for Hermitian H, rho
    for a in range(dim):
        for b in range(dim):
            out[a, b] = -1.0j * (scratch[a, b] - scratch[b, a].conjugate())
    # jump channels |to><from| with rate g:
    #   out[to,to] += g rho[from,from];  out -= g/2 {|from><from|, rho}
    for c in range(ch_from.shape[0]):
        f = ch_from[c]
        d = ch_to[c]
        g = ch_rate[c]
        out[d, d] += g * rho[f, f]
        for b in range(dim):
            out[f, b] -= 0.5 * g * rho[f, b]
            out[b, f] -= 0.5 * g * rho[b, f]


@njit(cache=True, nogil=True)
def rk4_schrodinger(
    psi0,
    t_start,
    h,
    n_steps,
    record_steps,
    term_i,
    term_j,
    coef,
    rate,
    phase,
    env_id,
    env_pow,
    env_kind,
    env_params,
    sched_values,
    sched_n,
    prod_pairs,
):
    dim = psi0.shape[0]
    n_env = env_kind.shape[0] + prod_pairs.shape[0]
    env_vals = np.zeros(n_env)
    H = np.zeros((dim, dim), dtype=np.complex128)
    k1 = np.zeros(dim, dtype=np.complex128)
    k2 = np.zeros(dim, dtype=np.complex128)
    k3 = np.zeros(dim, dtype=np.complex128)
    k4 = np.zeros(dim, dtype=np.complex128)
    tmp = np.zeros(dim, dtype=np.complex128)
    psi = psi0.copy()

    recorded = np.zeros((record_steps.shape[0], dim), dtype=np.complex128)
    rec = 0
    if record_steps[rec] == 0:
        recorded[rec] = psi
        rec += 1

    for step in range(n_steps):
        t = t_start + step * h
        t_mid = t + 0.5 * h

        _fill_env_values(env_vals, t, t_mid, env_kind, env_params, sched_values, sched_n, prod_pairs)
        _assemble(H, t, term_i, term_j, coef, rate, phase, env_id, env_pow, env_vals)
        _schrodinger_rhs(k1, H, psi)

        th = t + 0.5 * h
        _fill_env_values(env_vals, th, t_mid, env_kind, env_params, sched_values, sched_n, prod_pairs)
        _assemble(H, th, term_i, term_j, coef, rate, phase, env_id, env_pow, env_vals)
        for a in range(dim):
            tmp[a] = psi[a] + 0.5 * h * k1[a]
        _schrodinger_rhs(k2, H, tmp)
        for a in range(dim):
            tmp[a] = psi[a] + 0.5 * h * k2[a]
        _schrodinger_rhs(k3, H, tmp)

        tf = t + h
        _fill_env_values(env_vals, tf, t_mid, env_kind, env_params, sched_values, sched_n, prod_pairs)
        _assemble(H, tf, term_i, term_j, coef, rate, phase, env_id, env_pow, env_vals)
        for a in range(dim):
            tmp[a] = psi[a] + h * k3[a]
        _schrodinger_rhs(k4, H, tmp)

        for a in range(dim):
            psi[a] = psi[a] + (h / 6.0) * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a])

        if rec < record_steps.shape[0] and record_steps[rec] == step + 1:
            recorded[rec] = psi
            rec += 1

    return recorded


@njit(cache=True, nogil=True)
def rk4_lindblad(
    rho0,
    t_start,
    h,
    n_steps,
    record_steps,
    ch_from,
    ch_to,
    ch_rate,
    term_i,
    term_j,
    coef,
    rate,
    phase,
    env_id,
    env_pow,
    env_kind,
    env_params,
    sched_values,
    sched_n,
    prod_pairs,
):
    dim = rho0.shape[0]
    n_env = env_kind.shape[0] + prod_pairs.shape[0]
    env_vals = np.zeros(n_env)
    H = np.zeros((dim, dim), dtype=np.complex128)
    k1 = np.zeros((dim, dim), dtype=np.complex128)
    k2 = np.zeros((dim, dim), dtype=np.complex128)
    k3 = np.zeros((dim, dim), dtype=np.complex128)
    k4 = np.zeros((dim, dim), dtype=np.complex128)
    tmp = np.zeros((dim, dim), dtype=np.complex128)
    scratch = np.zeros((dim, dim), dtype=np.complex128)
    rho = rho0.copy()

    recorded = np.zeros((record_steps.shape[0], dim, dim), dtype=np.complex128)
    rec = 0
    if record_steps[rec] == 0:
        recorded[rec] = rho
        rec += 1

    for step in range(n_steps):
        t = t_start + step * h
        t_mid = t + 0.5 * h

        _fill_env_values(env_vals, t, t_mid, env_kind, env_params, sched_values, sched_n, prod_pairs)
        _assemble(H, t, term_i, term_j, coef, rate, phase, env_id, env_pow, env_vals)
        _lindblad_rhs(k1, H, rho, ch_from, ch_to, ch_rate, scratch)

        th = t + 0.5 * h
        _fill_env_values(env_vals, th, t_mid, env_kind, env_params, sched_values, sched_n, prod_pairs)
        _assemble(H, th, term_i, term_j, coef, rate, phase, env_id, env_pow, env_vals)
        for a in range(dim):
            for b in range(dim):
                tmp[a, b] = rho[a, b] + 0.5 * h * k1[a, b]
        _lindblad_rhs(k2, H, tmp, ch_from, ch_to, ch_rate, scratch)
        for a in range(dim):
            for b in range(dim):
                tmp[a, b] = rho[a, b] + 0.5 * h * k2[a, b]
        _lindblad_rhs(k3, H, tmp, ch_from, ch_to, ch_rate, scratch)

        tf = t + h
        _fill_env_values(env_vals, tf, t_mid, env_kind, env_params, sched_values, sched_n, prod_pairs)
        _assemble(H, tf, term_i, term_j, coef, rate, phase, env_id, env_pow, env_vals)
        for a in range(dim):
            for b in range(dim):
                tmp[a, b] = rho[a, b] + h * k3[a, b]
        _lindblad_rhs(k4, H, tmp, ch_from, ch_to, ch_rate, scratch)

        for a in range(dim):
            for b in range(dim):
                rho[a, b] = rho[a, b] + (h / 6.0) * (
                    k1[a, b] + 2.0 * k2[a, b] + 2.0 * k3[a, b] + k4[a, b]
                )

        if rec < record_steps.shape[0] and record_steps[rec] == step + 1:
            recorded[rec] = rho
            rec += 1

    return recorded
