"""Hot numeric kernels with numba and pure-numpy implementations.

Two kernels dominate the runtime of sweeps and oracle runs:

* ``poly_roots_batch`` - all complex roots of many small real polynomials
  (companion-matrix eigenvalues followed by guarded Newton polishing);
* ``integrate`` - adaptive RK4 with step-doubling error control for the
  semiclassical density-matrix + cavity-field equations.

The active implementation follows ``_accel.BACKEND``. Both are importable
explicitly through :data:`numba_impl` and :data:`numpy_impl` so tests and
benchmarks can compare them in one process.
"""

from __future__ import annotations

from types import SimpleNamespace

import numpy as np

from . import _accel

# Layout of the parameter vector consumed by the equation-of-motion kernels.
P_DELTA_P, P_DELTA_AC, P_DELTA1, P_G, P_GN, P_OMEGA1 = 0, 1, 2, 3, 4, 5
P_GAMMA31, P_GAMMA32, P_GAMMA12, P_R, P_KAPPA, P_LINDBLAD_PUMP = 6, 7, 8, 9, 10, 11
P_SRC_RE, P_SRC_IM = 12, 13
N_PARAMS = 14
STATE_SIZE = 10  # rho (row-major 3x3) followed by alpha


# ---------------------------------------------------------------- polynomials

def _roots_loop(coeffs, polish):
    n, m = coeffs.shape
    out = np.empty((n, m - 1), dtype=np.complex128)
    for k in range(n):
        for i in range(m - 1):
            out[k, i] = np.nan + 0j
        d = m - 1
        while d > 0 and coeffs[k, d] == 0.0:
            d -= 1
        if d == 0:
            continue
        lead = coeffs[k, d]
        comp = np.zeros((d, d), dtype=np.complex128)
        for i in range(1, d):
            comp[i, i - 1] = 1.0
        for i in range(d):
            comp[i, d - 1] = -coeffs[k, i] / lead
        z = np.linalg.eigvals(comp)
        for i in range(d):
            x = z[i]
            for _ in range(polish):
                p = coeffs[k, d] + 0j
                dp = 0j
                for j in range(d - 1, -1, -1):
                    dp = dp * x + p
                    p = p * x + coeffs[k, j]
                if dp == 0:
                    break
                xn = x - p / dp
                pn = coeffs[k, d] + 0j
                for j in range(d - 1, -1, -1):
                    pn = pn * xn + coeffs[k, j]
                if abs(pn) < abs(p):
                    x = xn
                else:
                    break
            out[k, i] = x
    return out


def _horner(coeffs, x):
    p = np.zeros(x.shape, dtype=np.complex128)
    for j in range(coeffs.shape[1] - 1, -1, -1):
        p = p * x + coeffs[:, j, None]
    return p


def _roots_numpy(coeffs, polish):
    n, m = coeffs.shape
    out = np.full((n, m - 1), np.nan + 0j, dtype=np.complex128)
    nz = coeffs != 0.0
    degree = np.where(nz.any(axis=1), m - 1 - np.argmax(nz[:, ::-1], axis=1), 0)
    for d in np.unique(degree):
        if d == 0:
            continue
        rows = np.nonzero(degree == d)[0]
        c = coeffs[rows, : d + 1]
        comp = np.zeros((rows.size, d, d), dtype=np.complex128)
        idx = np.arange(1, d)
        comp[:, idx, idx - 1] = 1.0
        comp[:, :, d - 1] = -c[:, :d] / c[:, d, None]
        z = np.linalg.eigvals(comp)
        deriv = c[:, 1:] * np.arange(1, d + 1)
        for _ in range(polish):
            p = _horner(c, z)
            dp = _horner(deriv, z)
            ok = dp != 0
            step = np.where(ok, p / np.where(ok, dp, 1.0), 0.0)
            zn = z - step
            better = np.abs(_horner(c, zn)) < np.abs(p)
            z = np.where(better, zn, z)
        out[rows, :d] = z
    return out


# ------------------------------------------------------------ equations of motion

def _rhs_loop(y, p):
    dp = p[P_DELTA_P]
    dac = p[P_DELTA_AC]
    d1 = p[P_DELTA1]
    g = p[P_G]
    gn = p[P_GN]
    om = p[P_OMEGA1]
    g31 = p[P_GAMMA31]
    g32 = p[P_GAMMA32]
    g12 = p[P_GAMMA12]
    r = p[P_R]
    kap = p[P_KAPPA]
    lindblad = p[P_LINDBLAD_PUMP] != 0.0
    a = y[9]

    h = np.zeros((3, 3), dtype=np.complex128)
    h[1, 1] = -(dp - d1)
    h[2, 2] = -dp
    h[0, 2] = -g * np.conj(a)
    h[2, 0] = -g * a
    h[1, 2] = -om
    h[2, 1] = -om

    gam = g31 + g32
    dy = np.empty(10, dtype=np.complex128)
    for i in range(3):
        for j in range(3):
            acc = 0j
            for k in range(3):
                acc += h[i, k] * y[3 * k + j] - y[3 * i + k] * h[k, j]
            damp = 0.0
            if i == 2:
                damp += 0.5 * gam
            if j == 2:
                damp += 0.5 * gam
            if i + j == 1:  # rho_12 and rho_21 only
                damp += g12
            if lindblad and ((i == 0) != (j == 0)):
                damp += 0.5 * r
            dy[3 * i + j] = -1j * acc - damp * y[3 * i + j]
    dy[0] += g31 * y[8] - r * y[0]
    dy[4] += g32 * y[8]
    dy[8] += r * y[0]
    dy[9] = (1j * (dp - dac) - kap) * a + 1j * gn * y[6] + (p[P_SRC_RE] + 1j * p[P_SRC_IM])
    return dy


def _damping_matrix(p):
    gam = p[P_GAMMA31] + p[P_GAMMA32]
    ex = np.array([0.0, 0.0, 0.5 * gam])
    damp = ex[:, None] + ex[None, :]
    damp[0, 1] += p[P_GAMMA12]
    damp[1, 0] += p[P_GAMMA12]
    if p[P_LINDBLAD_PUMP] != 0.0:
        ground1 = np.array([1.0, 0.0, 0.0])
        damp += 0.5 * p[P_R] * (ground1[:, None] != ground1[None, :])
    return damp


def _rhs_numpy(y, p):
    rho = y[:9].reshape(3, 3)
    a = y[9]
    dp, dac = p[P_DELTA_P], p[P_DELTA_AC]
    g, om = p[P_G], p[P_OMEGA1]
    h = -np.array(
        [[0.0, 0.0, g * np.conj(a)],
         [0.0, dp - p[P_DELTA1], om],
         [g * a, om, dp]],
        dtype=np.complex128,
    )
    drho = -1j * (h @ rho - rho @ h) - _damping_matrix(p) * rho
    r = p[P_R]
    drho[0, 0] += p[P_GAMMA31] * rho[2, 2] - r * rho[0, 0]
    drho[1, 1] += p[P_GAMMA32] * rho[2, 2]
    drho[2, 2] += r * rho[0, 0]
    dalpha = ((1j * (dp - dac) - p[P_KAPPA]) * a + 1j * p[P_GN] * rho[2, 0]
              + complex(p[P_SRC_RE], p[P_SRC_IM]))
    return np.append(drho.ravel(), dalpha)


def _identity(func):
    return func


def _make_integrator(rhs, jit=_identity):
    @jit
    def _rk4(y, f0, h, p):
        k2 = rhs(y + 0.5 * h * f0, p)
        k3 = rhs(y + 0.5 * h * k2, p)
        k4 = rhs(y + h * k3, p)
        return y + (h / 6.0) * (f0 + 2.0 * k2 + 2.0 * k3 + k4)

    @jit
    def _converged(y, f, tol_ss):
        fr = 0.0
        for i in range(9):
            v = abs(f[i])
            if v > fr:
                fr = v
        return fr <= tol_ss and abs(f[9]) <= tol_ss * max(1.0, abs(y[9]))

    def integrate(y0, p, t_max, h0, tol_step, tol_ss, rec_dt, max_rec):
        y = y0.copy()
        t = 0.0
        h = h0
        h_min = 1e-12 * max(1.0, t_max)
        rec_t = np.empty(max_rec)
        rec_y = np.empty((max_rec, y0.shape[0]), dtype=np.complex128)
        n_rec = 0
        next_rec = 0.0
        n_steps = 0
        converged = False
        f0 = rhs(y, p)
        while True:
            if rec_dt > 0.0 and t >= next_rec and n_rec < max_rec:
                rec_t[n_rec] = t
                rec_y[n_rec] = y
                n_rec += 1
                next_rec += rec_dt
            if _converged(y, f0, tol_ss):
                converged = True
                break
            if t >= t_max:
                break
            if t + h > t_max:
                h = t_max - t
            y_full = _rk4(y, f0, h, p)
            y_half = _rk4(y, f0, 0.5 * h, p)
            y_two = _rk4(y_half, rhs(y_half, p), 0.5 * h, p)
            err = 0.0
            ymax = 1.0
            for i in range(y.shape[0]):
                e = abs(y_two[i] - y_full[i])
                if e > err:
                    err = e
                a = abs(y[i])
                if a > ymax:
                    ymax = a
            err /= 15.0
            scale = tol_step * ymax
            if err <= scale or h <= h_min:
                t += h
                y = y_two + (y_two - y_full) / 15.0
                f0 = rhs(y, p)
                n_steps += 1
            if err > 0.0:
                fac = 0.9 * (scale / err) ** 0.2
                fac = min(2.0, max(0.2, fac))
            else:
                fac = 2.0
            h = max(h * fac, h_min)
        if rec_dt > 0.0 and n_rec < max_rec and (n_rec == 0 or rec_t[n_rec - 1] < t):
            rec_t[n_rec] = t
            rec_y[n_rec] = y
            n_rec += 1
        return y, t, converged, n_steps, rec_t[:n_rec], rec_y[:n_rec]

    return integrate


numpy_impl = SimpleNamespace(
    name="numpy",
    poly_roots_batch=_roots_numpy,
    rhs=_rhs_numpy,
    integrate=_make_integrator(_rhs_numpy),
)

if _accel.NUMBA_AVAILABLE:
    import numba

    _rhs_nb = _accel.njit(_rhs_loop)
    numba_impl = SimpleNamespace(
        name="numba",
        poly_roots_batch=_accel.njit(_roots_loop),
        rhs=_rhs_nb,
        # closures over dispatchers cannot be cached on disk
        integrate=numba.njit(_make_integrator(_rhs_nb, jit=numba.njit)),
    )
else:  # pragma: no cover
    numba_impl = None

_impl = numba_impl if _accel.USE_NUMBA else numpy_impl
BACKEND = _impl.name


def poly_roots_batch(coeffs, polish: int = 3):
    """Roots of each row of ``coeffs`` (ascending powers), NaN-padded per row."""
    coeffs = np.ascontiguousarray(np.atleast_2d(coeffs), dtype=np.float64)
    if coeffs.shape[1] < 2:
        raise ValueError("need at least a linear polynomial")
    return _impl.poly_roots_batch(coeffs, polish)


def rhs(y, p):
    return _impl.rhs(np.asarray(y, dtype=np.complex128), np.asarray(p, dtype=np.float64))


def integrate(y0, p, t_max, h0=1e-2, tol_step=1e-10, tol_ss=1e-9, rec_dt=0.0, max_rec=0):
    """Integrate the equations of motion until steady state or ``t_max``.

    Returns ``(y, t, converged, n_steps, rec_t, rec_y)``.
    """
    return _impl.integrate(
        np.ascontiguousarray(y0, dtype=np.complex128),
        np.ascontiguousarray(p, dtype=np.float64),
        float(t_max), float(h0), float(tol_step), float(tol_ss),
        float(rec_dt), int(max_rec),
    )
