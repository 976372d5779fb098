"""Fixed-step RK4 integration kernels for the device models.

These are the hot loops: a pattern-learning run takes tens of millions of
RK4 steps, so the kernels are compiled with numba when it is available and
fall back to the identical plain-Python code otherwise.  All state is passed
as scalars / preallocated float64 arrays so both paths compute the same
arithmetic.
"""
import math

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


# window kinds (keep in sync with device.WindowSpec.KINDS)
WIN_ZHA = 0
WIN_JOGLEKAR = 1
WIN_PRODROMAKIS = 2
WIN_BIOLEK = 3
WIN_STRUKOV = 4
WIN_NONE = 5


@njit(cache=True)
def window_factor(kind, p, j, x, direction):
    """Boundary window on the normalized state x = w/D, in [0, j].

    `direction` is the signed drive moving the state: > 0 means x is being
    pushed up.  Only the direction-aware kinds (zha, biolek) use it.
    """
    if x < 0.0:
        x = 0.0
    elif x > 1.0:
        x = 1.0
    if kind == WIN_NONE:
        return j
    if kind == WIN_ZHA:
        s = 0.0 if direction > 0.0 else 1.0
        t = x - s
        return j * (1.0 - (0.25 * t * t + 0.75) ** p)
    if kind == WIN_JOGLEKAR:
        t = 2.0 * x - 1.0
        return j * (1.0 - t ** (2 * p))
    if kind == WIN_PRODROMAKIS:
        t = (x - 0.5) * (x - 0.5) + 0.75
        return j * (1.0 - t ** p)
    if kind == WIN_BIOLEK:
        s = 0.0 if direction > 0.0 else 1.0
        t = x - s
        return j * (1.0 - t ** (2 * p))
    # strukov: parabola, zero at both bounds, max j/4 at midpoint
    return j * x * (1.0 - x)


@njit(cache=True)
def joule_current(a0, i0, q, i):
    """Odd power-law drive a0*(i/i0)^(2q-1); exactly odd in i."""
    x = i / i0
    n = 2 * q - 1
    m = abs(x) ** n
    return a0 * m if x >= 0.0 else -(a0 * m)


@njit(cache=True)
def _memristance(w, d, r_on, r_off):
    x = w / d
    if x < 0.0:
        x = 0.0
    elif x > 1.0:
        x = 1.0
    return r_on * x + r_off * (1.0 - x)


@njit(cache=True)
def dopant_rate(w, i_dev, r_on, d, mu_v, a0, i0, q, wk, wp, wj):
    """dw/dt of the dopant-drift device in its own frame (i_dev signed)."""
    g = joule_current(a0, i0, q, i_dev)
    f = window_factor(wk, wp, wj, w / d, i_dev)
    return mu_v * (r_on / d) * g * f


@njit(cache=True)
def dopant_device_step(w, orient, v, duration, dt, r_on, r_off, d, mu_v, a0, i0, q, wk, wp, wj):
    """Advance one dopant-drift device under constant terminal voltage.

    RK4 with substep h <= dt; the current is recomputed from the stage state
    at every stage (i = v / R(w)).  Returns the new w, clamped to [0, d].
    """
    if duration <= 0.0 or v == 0.0:
        return w
    n = int(math.ceil(duration / dt - 1e-9))
    if n < 1:
        n = 1
    h = duration / n
    for _ in range(n):
        i1 = orient * v / _memristance(w, d, r_on, r_off)
        k1 = dopant_rate(w, i1, r_on, d, mu_v, a0, i0, q, wk, wp, wj)
        wa = w + 0.5 * h * k1
        i2 = orient * v / _memristance(wa, d, r_on, r_off)
        k2 = dopant_rate(wa, i2, r_on, d, mu_v, a0, i0, q, wk, wp, wj)
        wb = w + 0.5 * h * k2
        i3 = orient * v / _memristance(wb, d, r_on, r_off)
        k3 = dopant_rate(wb, i3, r_on, d, mu_v, a0, i0, q, wk, wp, wj)
        wc = w + h * k3
        i4 = orient * v / _memristance(wc, d, r_on, r_off)
        k4 = dopant_rate(wc, i4, r_on, d, mu_v, a0, i0, q, wk, wp, wj)
        w += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        if w < 0.0:
            w = 0.0
        elif w > d:
            w = d
    return w


@njit(cache=True)
def dopant_branch_rates(w1, w2, o1, o2, r_series, v, r_on, r_off, d, mu_v, a0, i0, q, wk, wp, wj):
    """Rates for the two devices of one bridge branch sharing current i."""
    i = v / (_memristance(w1, d, r_on, r_off) + _memristance(w2, d, r_on, r_off) + r_series)
    k1 = dopant_rate(w1, o1 * i, r_on, d, mu_v, a0, i0, q, wk, wp, wj)
    k2 = dopant_rate(w2, o2 * i, r_on, d, mu_v, a0, i0, q, wk, wp, wj)
    return k1, k2


@njit(cache=True)
def dopant_branch_step(w1, w2, o1, o2, r_series, v, duration, dt,
                       r_on, r_off, d, mu_v, a0, i0, q, wk, wp, wj):
    """Advance one bridge branch (two devices + series resistor) under
    constant differential voltage v for `duration`, RK4 substeps <= dt."""
    if duration <= 0.0 or v == 0.0:
        return w1, w2
    n = int(math.ceil(duration / dt - 1e-9))
    if n < 1:
        n = 1
    h = duration / n
    for _ in range(n):
        a1, b1 = dopant_branch_rates(w1, w2, o1, o2, r_series, v,
                                     r_on, r_off, d, mu_v, a0, i0, q, wk, wp, wj)
        a2, b2 = dopant_branch_rates(w1 + 0.5 * h * a1, w2 + 0.5 * h * b1, o1, o2, r_series, v,
                                     r_on, r_off, d, mu_v, a0, i0, q, wk, wp, wj)
        a3, b3 = dopant_branch_rates(w1 + 0.5 * h * a2, w2 + 0.5 * h * b2, o1, o2, r_series, v,
                                     r_on, r_off, d, mu_v, a0, i0, q, wk, wp, wj)
        a4, b4 = dopant_branch_rates(w1 + h * a3, w2 + h * b3, o1, o2, r_series, v,
                                     r_on, r_off, d, mu_v, a0, i0, q, wk, wp, wj)
        w1 += h * (a1 + 2.0 * a2 + 2.0 * a3 + a4) / 6.0
        w2 += h * (b1 + 2.0 * b2 + 2.0 * b3 + b4) / 6.0
        if w1 < 0.0:
            w1 = 0.0
        elif w1 > d:
            w1 = d
        if w2 < 0.0:
            w2 = 0.0
        elif w2 > d:
            w2 = d
    return w1, w2


@njit(cache=True)
def _vteam_resistance(w, w_on, w_off, r_on, r_off):
    x = (w - w_on) / (w_off - w_on)
    if x < 0.0:
        x = 0.0
    elif x > 1.0:
        x = 1.0
    return r_on + (r_off - r_on) * x


@njit(cache=True)
def vteam_rate(w, v_dev, v_on, v_off, k_on, k_off, a_on, a_off, w_on, w_off, wk, wp, wj):
    """dw/dt of a threshold (voltage-controlled) device; dead zone between
    the two thresholds contributes exactly zero."""
    if v_dev <= v_on:
        r = k_on * ((v_dev / v_on) - 1.0) ** a_on
    elif v_dev >= v_off:
        r = k_off * ((v_dev / v_off) - 1.0) ** a_off
    else:
        return 0.0
    x = (w - w_on) / (w_off - w_on)
    return r * window_factor(wk, wp, wj, x, r)


@njit(cache=True)
def vteam_device_step(w, orient, v, duration, dt,
                      v_on, v_off, k_on, k_off, a_on, a_off, w_on, w_off, r_on, r_off, wk, wp, wj):
    if duration <= 0.0:
        return w
    v_dev = orient * v
    if v_on < v_dev < v_off:
        return w  # dead zone: bitwise unchanged
    n = int(math.ceil(duration / dt - 1e-9))
    if n < 1:
        n = 1
    h = duration / n
    for _ in range(n):
        k1 = vteam_rate(w, v_dev, v_on, v_off, k_on, k_off, a_on, a_off, w_on, w_off, wk, wp, wj)
        k2 = vteam_rate(w + 0.5 * h * k1, v_dev, v_on, v_off, k_on, k_off, a_on, a_off, w_on, w_off, wk, wp, wj)
        k3 = vteam_rate(w + 0.5 * h * k2, v_dev, v_on, v_off, k_on, k_off, a_on, a_off, w_on, w_off, wk, wp, wj)
        k4 = vteam_rate(w + h * k3, v_dev, v_on, v_off, k_on, k_off, a_on, a_off, w_on, w_off, wk, wp, wj)
        w += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        if w < w_on:
            w = w_on
        elif w > w_off:
            w = w_off
    return w


@njit(cache=True)
def vteam_branch_rates(w1, w2, o1, o2, r_series, v,
                       v_on, v_off, k_on, k_off, a_on, a_off, w_on, w_off, r_on, r_off, wk, wp, wj):
    """Branch current splits the differential voltage across both devices;
    each device sees its own resistive share, signed by its orientation."""
    m1 = _vteam_resistance(w1, w_on, w_off, r_on, r_off)
    m2 = _vteam_resistance(w2, w_on, w_off, r_on, r_off)
    i = v / (m1 + m2 + r_series)
    k1 = vteam_rate(w1, o1 * i * m1, v_on, v_off, k_on, k_off, a_on, a_off, w_on, w_off, wk, wp, wj)
    k2 = vteam_rate(w2, o2 * i * m2, v_on, v_off, k_on, k_off, a_on, a_off, w_on, w_off, wk, wp, wj)
    return k1, k2


@njit(cache=True)
def vteam_branch_step(w1, w2, o1, o2, r_series, v, duration, dt,
                      v_on, v_off, k_on, k_off, a_on, a_off, w_on, w_off, r_on, r_off, wk, wp, wj):
    if duration <= 0.0 or v == 0.0:
        return w1, w2
    n = int(math.ceil(duration / dt - 1e-9))
    if n < 1:
        n = 1
    h = duration / n
    for _ in range(n):
        a1, b1 = vteam_branch_rates(w1, w2, o1, o2, r_series, v,
                                    v_on, v_off, k_on, k_off, a_on, a_off, w_on, w_off, r_on, r_off, wk, wp, wj)
        a2, b2 = vteam_branch_rates(w1 + 0.5 * h * a1, w2 + 0.5 * h * b1, o1, o2, r_series, v,
                                    v_on, v_off, k_on, k_off, a_on, a_off, w_on, w_off, r_on, r_off, wk, wp, wj)
        a3, b3 = vteam_branch_rates(w1 + 0.5 * h * a2, w2 + 0.5 * h * b2, o1, o2, r_series, v,
                                    v_on, v_off, k_on, k_off, a_on, a_off, w_on, w_off, r_on, r_off, wk, wp, wj)
        a4, b4 = vteam_branch_rates(w1 + h * a3, w2 + h * b3, o1, o2, r_series, v,
                                    v_on, v_off, k_on, k_off, a_on, a_off, w_on, w_off, r_on, r_off, wk, wp, wj)
        w1 += h * (a1 + 2.0 * a2 + 2.0 * a3 + a4) / 6.0
        w2 += h * (b1 + 2.0 * b2 + 2.0 * b3 + b4) / 6.0
        if w1 < w_on:
            w1 = w_on
        elif w1 > w_off:
            w1 = w_off
        if w2 < w_on:
            w2 = w_on
        elif w2 > w_off:
            w2 = w_off
    return w1, w2


@njit(cache=True)
def dopant_sine_sweep(w0, orient, amp, freq, duration, dt, sample_every,
                      r_on, r_off, d, mu_v, a0, i0, q, wk, wp, wj,
                      t_out, v_out, i_out, w_out, r_out):
    """Drive one dopant-drift device with amp*sin(2*pi*freq*t) and record
    (t, v, i, w, R) every `sample_every` steps.  The drive is evaluated at
    the RK4 stage times, so the integration is full fourth order.

    Returns the number of samples written.
    """
    two_pi_f = 2.0 * math.pi * freq
    n = int(round(duration / dt))
    w = w0
    idx = 0
    for k in range(n + 1):
        t = k * dt
        if k % sample_every == 0:
            r = _memristance(w, d, r_on, r_off)
            v = amp * math.sin(two_pi_f * t)
            t_out[idx] = t
            v_out[idx] = v
            i_out[idx] = v / r
            w_out[idx] = w
            r_out[idx] = r
            idx += 1
        if k == n:
            break
        h = dt
        v0 = amp * math.sin(two_pi_f * t)
        vh = amp * math.sin(two_pi_f * (t + 0.5 * h))
        v1 = amp * math.sin(two_pi_f * (t + h))
        i1 = orient * v0 / _memristance(w, d, r_on, r_off)
        k1 = dopant_rate(w, i1, r_on, d, mu_v, a0, i0, q, wk, wp, wj)
        wa = w + 0.5 * h * k1
        i2 = orient * vh / _memristance(wa, d, r_on, r_off)
        k2 = dopant_rate(wa, i2, r_on, d, mu_v, a0, i0, q, wk, wp, wj)
        wb = w + 0.5 * h * k2
        i3 = orient * vh / _memristance(wb, d, r_on, r_off)
        k3 = dopant_rate(wb, i3, r_on, d, mu_v, a0, i0, q, wk, wp, wj)
        wc = w + h * k3
        i4 = orient * v1 / _memristance(wc, d, r_on, r_off)
        k4 = dopant_rate(wc, i4, r_on, d, mu_v, a0, i0, q, wk, wp, wj)
        w += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        if w < 0.0:
            w = 0.0
        elif w > d:
            w = d
    return idx


@njit(cache=True)
def vteam_sine_sweep(w0, orient, amp, freq, duration, dt, sample_every,
                     v_on, v_off, k_on, k_off, a_on, a_off, w_on, w_off, r_on, r_off, wk, wp, wj,
                     t_out, v_out, i_out, w_out, r_out):
    two_pi_f = 2.0 * math.pi * freq
    n = int(round(duration / dt))
    w = w0
    idx = 0
    for k in range(n + 1):
        t = k * dt
        if k % sample_every == 0:
            r = _vteam_resistance(w, w_on, w_off, r_on, r_off)
            v = amp * math.sin(two_pi_f * t)
            t_out[idx] = t
            v_out[idx] = v
            i_out[idx] = v / r
            w_out[idx] = w
            r_out[idx] = r
            idx += 1
        if k == n:
            break
        h = dt
        v0 = orient * amp * math.sin(two_pi_f * t)
        vh = orient * amp * math.sin(two_pi_f * (t + 0.5 * h))
        v1 = orient * amp * math.sin(two_pi_f * (t + h))
        k1 = vteam_rate(w, v0, v_on, v_off, k_on, k_off, a_on, a_off, w_on, w_off, wk, wp, wj)
        k2 = vteam_rate(w + 0.5 * h * k1, vh, v_on, v_off, k_on, k_off, a_on, a_off, w_on, w_off, wk, wp, wj)
        k3 = vteam_rate(w + 0.5 * h * k2, vh, v_on, v_off, k_on, k_off, a_on, a_off, w_on, w_off, wk, wp, wj)
        k4 = vteam_rate(w + h * k3, v1, v_on, v_off, k_on, k_off, a_on, a_off, w_on, w_off, wk, wp, wj)
        w += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        if w < w_on:
            w = w_on
        elif w > w_off:
            w = w_off
    return idx
