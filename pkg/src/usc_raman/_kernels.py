"""Compiled RK4 steppers for the dressed interaction-picture equations.

The drive operator is passed in CSR form (``indptr``, ``indices``,
``data``); it is real and only couples the b ladder to the Rabi sector.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _phases(energies, t, out):
    for j in range(energies.size):
        out[j] = np.cos(energies[j] * t) + 1j * np.sin(energies[j] * t)


@njit(cache=True)
def _drive(Op, wp, Os, ws, t):
    return Op * np.cos(wp * t) + Os * np.cos(ws * t)


@njit(cache=True)
def _schrodinger_rhs(t, phi, indptr, indices, data, Op, wp, Os, ws, p, tmp, out):
    f = _drive(Op, wp, Os, ws, t)
    n = phi.size
    for j in range(n):
        tmp[j] = p[j].conjugate() * phi[j]
    for j in range(n):
        acc = 0j
        for k in range(indptr[j], indptr[j + 1]):
            acc += data[k] * tmp[indices[k]]
        out[j] = -1j * f * p[j] * acc


@njit(cache=True)
def schrodinger_advance(phi, t0, dt, n_steps, energies, indptr, indices, data, Op, wp, Os, ws):
    """Advance ``phi`` in place by ``n_steps`` RK4 steps starting at ``t0``."""
    n = phi.size
    p0 = np.empty(n, np.complex128)
    p1 = np.empty(n, np.complex128)
    p2 = np.empty(n, np.complex128)
    h = np.empty(n, np.complex128)
    tmp = np.empty(n, np.complex128)
    k1 = np.empty(n, np.complex128)
    k2 = np.empty(n, np.complex128)
    k3 = np.empty(n, np.complex128)
    k4 = np.empty(n, np.complex128)
    y = np.empty(n, np.complex128)
    half = 0.5 * dt
    _phases(energies, t0, p0)
    _phases(energies, half, h)
    for s in range(n_steps):
        t = t0 + s * dt
        for j in range(n):
            p1[j] = p0[j] * h[j]
            p2[j] = p1[j] * h[j]
        _schrodinger_rhs(t, phi, indptr, indices, data, Op, wp, Os, ws, p0, tmp, k1)
        for j in range(n):
            y[j] = phi[j] + half * k1[j]
        _schrodinger_rhs(t + half, y, indptr, indices, data, Op, wp, Os, ws, p1, tmp, k2)
        for j in range(n):
            y[j] = phi[j] + half * k2[j]
        _schrodinger_rhs(t + half, y, indptr, indices, data, Op, wp, Os, ws, p1, tmp, k3)
        for j in range(n):
            y[j] = phi[j] + dt * k3[j]
        _schrodinger_rhs(t + dt, y, indptr, indices, data, Op, wp, Os, ws, p2, tmp, k4)
        for j in range(n):
            phi[j] += (dt / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
            p0[j] = p2[j]


@njit(cache=True)
def _master_rhs(t, rho, indptr, indices, data, Op, wp, Os, ws, gain, decay, p, w, x, out):
    # out = -i [H_I, rho] + D(rho); H_I = f P V P^*, D is diagonal in the dressed basis
    n = p.size
    f = _drive(Op, wp, Os, ws, t)
    for m in range(n):
        pc = p[m].conjugate()
        for c in range(n):
            w[m, c] = pc * rho[m, c]
    for j in range(n):
        fp = f * p[j]
        for c in range(n):
            x[j, c] = 0j
        for k in range(indptr[j], indptr[j + 1]):
            m = indices[k]
            v = data[k] * fp
            for c in range(n):
                x[j, c] += v * w[m, c]
    for j in range(n):
        for c in range(n):
            out[j, c] = -1j * (x[j, c] - x[c, j].conjugate()) - decay[j, c] * rho[j, c]
    for j in range(n):
        acc = 0j
        for k in range(n):
            acc += gain[j, k] * rho[k, k].real
        out[j, j] += acc


@njit(cache=True)
def master_advance(rho, t0, dt, n_steps, energies, indptr, indices, data, Op, wp, Os, ws,
                   gain, decay, avg):
    """Advance ``rho`` in place by ``n_steps`` RK4 steps starting at ``t0``.

    The Schrodinger-picture state (dressed basis) at the end of every step
    is accumulated into ``avg``.  Hermiticity is restored after each step.
    """
    n = energies.size
    p0 = np.empty(n, np.complex128)
    p1 = np.empty(n, np.complex128)
    p2 = np.empty(n, np.complex128)
    h = np.empty(n, np.complex128)
    w = np.empty((n, n), np.complex128)
    x = np.empty((n, n), np.complex128)
    k1 = np.empty((n, n), np.complex128)
    k2 = np.empty((n, n), np.complex128)
    k3 = np.empty((n, n), np.complex128)
    k4 = np.empty((n, n), np.complex128)
    y = np.empty((n, n), np.complex128)
    half = 0.5 * dt
    _phases(energies, t0, p0)
    _phases(energies, half, h)
    for s in range(n_steps):
        t = t0 + s * dt
        for j in range(n):
            p1[j] = p0[j] * h[j]
            p2[j] = p1[j] * h[j]
        _master_rhs(t, rho, indptr, indices, data, Op, wp, Os, ws, gain, decay, p0, w, x, k1)
        for j in range(n):
            for c in range(n):
                y[j, c] = rho[j, c] + half * k1[j, c]
        _master_rhs(t + half, y, indptr, indices, data, Op, wp, Os, ws, gain, decay, p1, w, x, k2)
        for j in range(n):
            for c in range(n):
                y[j, c] = rho[j, c] + half * k2[j, c]
        _master_rhs(t + half, y, indptr, indices, data, Op, wp, Os, ws, gain, decay, p1, w, x, k3)
        for j in range(n):
            for c in range(n):
                y[j, c] = rho[j, c] + dt * k3[j, c]
        _master_rhs(t + dt, y, indptr, indices, data, Op, wp, Os, ws, gain, decay, p2, w, x, k4)
        for j in range(n):
            for c in range(n):
                rho[j, c] += (dt / 6.0) * (k1[j, c] + 2.0 * k2[j, c] + 2.0 * k3[j, c] + k4[j, c])
        for j in range(n):
            rho[j, j] = rho[j, j].real
            for c in range(j + 1, n):
                v = 0.5 * (rho[j, c] + rho[c, j].conjugate())
                rho[j, c] = v
                rho[c, j] = v.conjugate()
        for j in range(n):
            p0[j] = p2[j]
        for j in range(n):
            pj = p0[j].conjugate()
            for c in range(n):
                avg[j, c] += pj * rho[j, c] * p0[c]
