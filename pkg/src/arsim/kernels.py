"""Scalar numeric kernels shared by the geometry, atmosphere and performance layers.

Every function here is compiled with numba unless ``ARSIM_DISABLE_NUMBA`` is
set, in which case the same source runs as plain Python. Headings are in
radians, counter-clockwise from the +x (east) axis.
"""
import math

import numpy as np

from arsim._jit import HAVE_NUMBA, njit

TWO_PI = 2.0 * math.pi
# arcs within this many radians of a full turn are snapped to zero
ARC_SNAP = 1e-10

# segment kinds
SEG_L = 0
SEG_S = 1
SEG_R = 2

# word order doubles as the tie-break order
WORD_NAMES = ("LSL", "RSR", "LSR", "RSL", "RLR", "LRL")
WORD_SEGMENTS = np.array(
    [
        [SEG_L, SEG_S, SEG_L],
        [SEG_R, SEG_S, SEG_R],
        [SEG_L, SEG_S, SEG_R],
        [SEG_R, SEG_S, SEG_L],
        [SEG_R, SEG_L, SEG_R],
        [SEG_L, SEG_R, SEG_L],
    ],
    dtype=np.int64,
)

G0 = 9.80665
R_AIR = 287.05287
ISA_T0 = 288.15
ISA_P0 = 101325.0
ISA_LAPSE = 0.0065
KT = 0.514444
FT = 0.3048


@njit
def mod2pi(x):
    y = x - TWO_PI * math.floor(x / TWO_PI)
    if y >= TWO_PI - ARC_SNAP or y < 0.0:
        y = 0.0
    return y


@njit
def dubins_word(word, alpha, beta, d):
    """Normalised segment lengths (t, p, q) of one Dubins word.

    Returns ``(ok, t, p, q)`` for unit turn radius; ``ok`` is False when the
    word has no solution for this configuration.
    """
    sa = math.sin(alpha)
    sb = math.sin(beta)
    ca = math.cos(alpha)
    cb = math.cos(beta)
    c_ab = math.cos(alpha - beta)
    if word == 0:  # LSL
        p2 = 2.0 + d * d - 2.0 * c_ab + 2.0 * d * (sa - sb)
        if p2 < -1e-12:
            return False, 0.0, 0.0, 0.0
        tmp = math.atan2(cb - ca, d + sa - sb)
        return True, mod2pi(-alpha + tmp), math.sqrt(max(p2, 0.0)), mod2pi(beta - tmp)
    if word == 1:  # RSR
        p2 = 2.0 + d * d - 2.0 * c_ab + 2.0 * d * (sb - sa)
        if p2 < -1e-12:
            return False, 0.0, 0.0, 0.0
        tmp = math.atan2(ca - cb, d - sa + sb)
        return True, mod2pi(alpha - tmp), math.sqrt(max(p2, 0.0)), mod2pi(-beta + tmp)
    if word == 2:  # LSR
        p2 = -2.0 + d * d + 2.0 * c_ab + 2.0 * d * (sa + sb)
        if p2 < -1e-12:
            return False, 0.0, 0.0, 0.0
        p = math.sqrt(max(p2, 0.0))
        tmp = math.atan2(-ca - cb, d + sa + sb) - math.atan2(-2.0, p)
        return True, mod2pi(-alpha + tmp), p, mod2pi(-mod2pi(beta) + tmp)
    if word == 3:  # RSL
        p2 = -2.0 + d * d + 2.0 * c_ab - 2.0 * d * (sa + sb)
        if p2 < -1e-12:
            return False, 0.0, 0.0, 0.0
        p = math.sqrt(max(p2, 0.0))
        tmp = math.atan2(ca + cb, d - sa - sb) - math.atan2(2.0, p)
        return True, mod2pi(alpha - tmp), p, mod2pi(beta - tmp)
    if word == 4:  # RLR
        c = (6.0 - d * d + 2.0 * c_ab + 2.0 * d * (sa - sb)) / 8.0
        if abs(c) > 1.0:
            return False, 0.0, 0.0, 0.0
        p = TWO_PI - math.acos(c)
        t = mod2pi(alpha - math.atan2(ca - cb, d - sa + sb) + 0.5 * p)
        return True, t, p, mod2pi(alpha - beta - t + p)
    # LRL
    c = (6.0 - d * d + 2.0 * c_ab + 2.0 * d * (sb - sa)) / 8.0
    if abs(c) > 1.0:
        return False, 0.0, 0.0, 0.0
    p = TWO_PI - math.acos(c)
    t = mod2pi(-alpha - math.atan2(ca - cb, d + sa - sb) + 0.5 * p)
    return True, t, p, mod2pi(beta - alpha - t + p)


@njit
def dubins_normalise(sx, sy, spsi, gx, gy, gpsi, radius):
    dx = gx - sx
    dy = gy - sy
    dist = math.hypot(dx, dy)
    theta = 0.0
    if dist > 0.0:
        theta = mod2pi(math.atan2(dy, dx))
    return mod2pi(spsi - theta), mod2pi(gpsi - theta), dist / radius


@njit
def dubins_best(sx, sy, spsi, gx, gy, gpsi, radius):
    """Shortest Dubins word between two poses.

    Returns ``(word, t, p, q)`` with segment lengths in metres; ties go to the
    earlier word in ``WORD_NAMES``.
    """
    alpha, beta, d = dubins_normalise(sx, sy, spsi, gx, gy, gpsi, radius)
    best = -1
    best_len = math.inf
    bt = 0.0
    bp = 0.0
    bq = 0.0
    for w in range(6):
        ok, t, p, q = dubins_word(w, alpha, beta, d)
        if ok:
            total = t + p + q
            if total < best_len:
                best = w
                best_len = total
                bt = t
                bp = p
                bq = q
    return best, bt * radius, bp * radius, bq * radius


@njit
def dubins_word_length(word, sx, sy, spsi, gx, gy, gpsi, radius):
    alpha, beta, d = dubins_normalise(sx, sy, spsi, gx, gy, gpsi, radius)
    ok, t, p, q = dubins_word(word, alpha, beta, d)
    if not ok:
        return math.inf
    return (t + p + q) * radius


@njit
def advance_segment(x, y, psi, kind, length, radius):
    """Pose after travelling ``length`` metres along one segment."""
    if kind == SEG_S:
        return x + length * math.cos(psi), y + length * math.sin(psi), psi
    if kind == SEG_L:
        npsi = psi + length / radius
        nx = x + radius * (math.sin(npsi) - math.sin(psi))
        ny = y - radius * (math.cos(npsi) - math.cos(psi))
        return nx, ny, mod2pi(npsi)
    npsi = psi - length / radius
    nx = x - radius * (math.sin(npsi) - math.sin(psi))
    ny = y + radius * (math.cos(npsi) - math.cos(psi))
    return nx, ny, mod2pi(npsi)


@njit
def dubins_sample(x, y, psi, k0, k1, k2, l0, l1, l2, radius, s):
    if s <= l0:
        return advance_segment(x, y, psi, k0, s, radius)
    x, y, psi = advance_segment(x, y, psi, k0, l0, radius)
    s -= l0
    if s <= l1:
        return advance_segment(x, y, psi, k1, s, radius)
    x, y, psi = advance_segment(x, y, psi, k1, l1, radius)
    return advance_segment(x, y, psi, k2, min(s - l1, l2), radius)


@njit
def ramp_time(dist, v0, vt, accel):
    """Time and exit speed covering ``dist`` while slewing speed v0 -> vt.

    Speed changes linearly at ``accel`` until it reaches ``vt`` and then holds.
    ``accel <= 0`` means the target speed is taken instantly.
    """
    if dist <= 0.0:
        return 0.0, v0
    if accel <= 0.0 or v0 == vt:
        return dist / vt, vt
    dv = vt - v0
    a = accel if dv > 0.0 else -accel
    d_ramp = (vt * vt - v0 * v0) / (2.0 * a)
    if dist >= d_ramp:
        return abs(dv) / accel + (dist - d_ramp) / vt, vt
    v_end = math.sqrt(max(v0 * v0 + 2.0 * a * dist, 0.0))
    return (v_end - v0) / a, v_end


@njit
def ramp_distance(tau, v0, vt, accel):
    """Distance and speed after ``tau`` seconds of the ``ramp_time`` profile."""
    if tau <= 0.0:
        return 0.0, v0
    if accel <= 0.0 or v0 == vt:
        return vt * tau, vt
    dv = vt - v0
    a = accel if dv > 0.0 else -accel
    t_ramp = abs(dv) / accel
    if tau >= t_ramp:
        return (vt * vt - v0 * v0) / (2.0 * a) + vt * (tau - t_ramp), vt
    return v0 * tau + 0.5 * a * tau * tau, v0 + a * tau


@njit
def isa_troposphere(h):
    t_air = ISA_T0 - ISA_LAPSE * h
    p = ISA_P0 * (t_air / ISA_T0) ** (G0 / (R_AIR * ISA_LAPSE))
    return t_air, p, p / (R_AIR * t_air)


@njit
def polar_index(hdot):
    """0 = IC (climb), 1 = AP (descent), 2 = CR, selected by vertical speed."""
    if hdot >= 1.0:
        return 0
    if hdot <= -1.0:
        return 1
    return 2


@njit
def thrust_kernel(mass, wing_area, cd0, cd2, rho, v, vdot, gamma, hdot):
    qs = 0.5 * rho * v * v * wing_area
    cl = mass * G0 * math.cos(gamma) / qs
    drag = (cd0 + cd2 * cl * cl) * qs
    return drag + mass * (G0 * hdot / v + vdot)


@njit
def fuel_kernel(cf1, cf2, cf3, cf4, idle_ft, v, h, hdot, thrust):
    h_ft = h / FT
    if hdot >= 0.0 or h_ft < idle_ft:
        eta = cf1 * (1.0 + (v / KT) / cf2) / 1000.0
        return eta * max(thrust, 0.0)
    return max(cf3 * (1.0 - h_ft / cf4), 0.0)


@njit
def _dubins_lengths_loop(poses, radius):
    n = poses.shape[0]
    out = np.empty(n)
    for i in range(n):
        w, t, p, q = dubins_best(
            poses[i, 0], poses[i, 1], poses[i, 2], poses[i, 3], poses[i, 4], poses[i, 5], radius
        )
        out[i] = t + p + q
    return out


def _np_mod2pi(x):
    y = np.mod(x, TWO_PI)
    return np.where((y >= TWO_PI - ARC_SNAP) | (y < 0.0), 0.0, y)


def dubins_lengths_numpy(poses, radius):
    """Vectorised shortest-length evaluation, used when numba is off."""
    poses = np.asarray(poses, dtype=float)
    dx = poses[:, 3] - poses[:, 0]
    dy = poses[:, 4] - poses[:, 1]
    dist = np.hypot(dx, dy)
    theta = np.where(dist > 0.0, _np_mod2pi(np.arctan2(dy, dx)), 0.0)
    a = _np_mod2pi(poses[:, 2] - theta)
    b = _np_mod2pi(poses[:, 5] - theta)
    d = dist / radius
    sa, sb, ca, cb = np.sin(a), np.sin(b), np.cos(a), np.cos(b)
    c_ab = np.cos(a - b)
    cands = []
    with np.errstate(invalid="ignore"):
        p2 = 2.0 + d * d - 2.0 * c_ab + 2.0 * d * (sa - sb)
        tmp = np.arctan2(cb - ca, d + sa - sb)
        cands.append(np.where(p2 >= -1e-12, _np_mod2pi(-a + tmp) + np.sqrt(np.maximum(p2, 0)) + _np_mod2pi(b - tmp), np.inf))
        p2 = 2.0 + d * d - 2.0 * c_ab + 2.0 * d * (sb - sa)
        tmp = np.arctan2(ca - cb, d - sa + sb)
        cands.append(np.where(p2 >= -1e-12, _np_mod2pi(a - tmp) + np.sqrt(np.maximum(p2, 0)) + _np_mod2pi(-b + tmp), np.inf))
        p2 = -2.0 + d * d + 2.0 * c_ab + 2.0 * d * (sa + sb)
        p = np.sqrt(np.maximum(p2, 0))
        tmp = np.arctan2(-ca - cb, d + sa + sb) - np.arctan2(-2.0, p)
        cands.append(np.where(p2 >= -1e-12, _np_mod2pi(-a + tmp) + p + _np_mod2pi(-_np_mod2pi(b) + tmp), np.inf))
        p2 = -2.0 + d * d + 2.0 * c_ab - 2.0 * d * (sa + sb)
        p = np.sqrt(np.maximum(p2, 0))
        tmp = np.arctan2(ca + cb, d - sa - sb) - np.arctan2(2.0, p)
        cands.append(np.where(p2 >= -1e-12, _np_mod2pi(a - tmp) + p + _np_mod2pi(b - tmp), np.inf))
        c = (6.0 - d * d + 2.0 * c_ab + 2.0 * d * (sa - sb)) / 8.0
        p = TWO_PI - np.arccos(np.clip(c, -1.0, 1.0))
        t = _np_mod2pi(a - np.arctan2(ca - cb, d - sa + sb) + 0.5 * p)
        cands.append(np.where(np.abs(c) <= 1.0, t + p + _np_mod2pi(a - b - t + p), np.inf))
        c = (6.0 - d * d + 2.0 * c_ab + 2.0 * d * (sb - sa)) / 8.0
        p = TWO_PI - np.arccos(np.clip(c, -1.0, 1.0))
        t = _np_mod2pi(-a - np.arctan2(ca - cb, d + sa - sb) + 0.5 * p)
        cands.append(np.where(np.abs(c) <= 1.0, t + p + _np_mod2pi(b - a - t + p), np.inf))
    return np.min(np.stack(cands), axis=0) * radius


def dubins_lengths(poses, radius):
    """Shortest Dubins lengths for an ``(n, 6)`` array of start/goal poses."""
    poses = np.ascontiguousarray(poses, dtype=np.float64)
    if HAVE_NUMBA:
        return _dubins_lengths_loop(poses, float(radius))
    return dubins_lengths_numpy(poses, radius)
