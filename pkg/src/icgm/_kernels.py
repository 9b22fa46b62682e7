"""Compiled inner loops.

Arrays are indexed [i - lo_i, j - lo_j]: the first axis runs along e1.
"""
import numpy as np
from numba import njit

from .rng import site_exp

INF = np.inf


@njit(cache=True)
def forward_passage(w):
    n1, n2 = w.shape
    g = np.empty((n1, n2))
    for i in range(n1):
        for j in range(n2):
            if i == 0 and j == 0:
                g[i, j] = w[i, j]
            elif i == 0:
                g[i, j] = w[i, j] + g[i, j - 1]
            elif j == 0:
                g[i, j] = w[i, j] + g[i - 1, j]
            else:
                left = g[i - 1, j]
                down = g[i, j - 1]
                g[i, j] = w[i, j] + (left if left > down else down)
    return g


@njit(cache=True)
def terminal_increments(w):
    """I[y] = G(y) - G(y - e1), J[y] = G(y) - G(y - e2), base at [0, 0].

    Computed by the increment recursion so that min(I, J) = w exactly.
    """
    n1, n2 = w.shape
    inc_i = np.empty((n1, n2))
    inc_j = np.empty((n1, n2))
    for i in range(n1):
        for j in range(n2):
            if i == 0 and j == 0:
                inc_i[i, j] = INF
                inc_j[i, j] = INF
            elif j == 0:
                inc_i[i, j] = w[i, j]
                inc_j[i, j] = INF
            elif i == 0:
                inc_i[i, j] = INF
                inc_j[i, j] = w[i, j]
            else:
                d = inc_i[i, j - 1] - inc_j[i - 1, j]
                if d > 0:
                    inc_i[i, j] = w[i, j] + d
                    inc_j[i, j] = w[i, j]
                else:
                    inc_i[i, j] = w[i, j]
                    inc_j[i, j] = w[i, j] - d
    return inc_i, inc_j


@njit(cache=True)
def trace_min_increment(inc_i, inc_j, start_i, start_j, steps, tie_e1):
    """Follow the smaller increment from a start cell for ``steps`` steps.

    Stops early if both increments are infinite (target reached).  Returns
    the visited cells and the number of exact ties met.
    """
    out = np.empty((steps + 1, 2), dtype=np.int64)
    out[0, 0] = start_i
    out[0, 1] = start_j
    i, j = start_i, start_j
    n1, n2 = inc_i.shape
    ties = 0
    for n in range(1, steps + 1):
        if i >= n1 or j >= n2:
            return out[:n], ties
        hi = inc_i[i, j]
        vj = inc_j[i, j]
        if hi == INF and vj == INF:
            return out[:n], ties
        if hi < vj:
            i += 1
        elif vj < hi:
            j += 1
        else:
            ties += 1
            if tie_e1:
                i += 1
            else:
                j += 1
        out[n, 0] = i
        out[n, 1] = j
    return out, ties


@njit(cache=True)
def trace_interface(g, steps):
    """Dual path from cell (0, 0): step e1 iff G(p+e1) < G(p+e2), ties -> e1.

    Returns visited cells (integer coordinates p, the dual site being
    p + (1/2, 1/2)) and the tie count.  Stops at the array edge.
    """
    n1, n2 = g.shape
    out = np.empty((steps + 1, 2), dtype=np.int64)
    out[0, 0] = 0
    out[0, 1] = 0
    i, j = 0, 0
    ties = 0
    for n in range(1, steps + 1):
        if i + 1 >= n1 or j + 1 >= n2:
            return out[:n], ties
        right = g[i + 1, j]
        up = g[i, j + 1]
        if right < up:
            i += 1
        elif up < right:
            j += 1
        else:
            ties += 1
            i += 1
        out[n, 0] = i
        out[n, 1] = j
    return out, ties


@njit(cache=True)
def weights_from_rates(key, i0, j0, a_vals, b_vals):
    n1 = a_vals.shape[0]
    n2 = b_vals.shape[0]
    w = np.empty((n1, n2))
    for r in range(n1):
        for c in range(n2):
            w[r, c] = site_exp(key, i0 + r, j0 + c) / (a_vals[r] + b_vals[c])
    return w


@njit(cache=True)
def ne_busemann_field(key, i0, j0, a_vals, b_vals, north, east):
    """Busemann increments in a box from north-east boundary values.

    ``north[r]`` is the horizontal increment on the edge leaving
    (i0 + r, j0 + n2) and ``east[c]`` the vertical increment on the edge
    leaving (i0 + n1, j0 + c).  Bulk weights come from ``key``.  Returns
    (hor, ver) arrays over the box.
    """
    n1 = a_vals.shape[0]
    n2 = b_vals.shape[0]
    hor = np.empty((n1, n2))
    ver = np.empty((n1, n2))
    above = north.copy()
    for c in range(n2 - 1, -1, -1):
        right = east[c]
        for r in range(n1 - 1, -1, -1):
            w = site_exp(key, i0 + r, j0 + c) / (a_vals[r] + b_vals[c])
            d = above[r] - right
            if d > 0:
                h = w + d
                v = w
            else:
                h = w
                v = w - d
            hor[r, c] = h
            ver[r, c] = v
            above[r] = h
            right = v
    return hor, ver


@njit(cache=True)
def ne_busemann_bits(key, i0, j0, a_vals, b_vals, north, east, tie_e1):
    """Like :func:`ne_busemann_field` but keeps only the step choice.

    Bit set means the geodesic steps e1 from that cell.  Storage is one bit
    per cell, packed along the first axis, so very tall boxes fit.
    """
    n1 = a_vals.shape[0]
    n2 = b_vals.shape[0]
    words = (n1 + 63) // 64
    bits = np.zeros((n2, words), dtype=np.uint64)
    above = north.copy()
    one = np.uint64(1)
    ties = 0
    for c in range(n2 - 1, -1, -1):
        right = east[c]
        for r in range(n1 - 1, -1, -1):
            w = site_exp(key, i0 + r, j0 + c) / (a_vals[r] + b_vals[c])
            d = above[r] - right
            if d > 0:
                h = w + d
                v = w
                go_e1 = False
            else:
                h = w
                v = w - d
                go_e1 = d < 0 or tie_e1
                if d == 0:
                    ties += 1
            if go_e1:
                bits[c, r >> 6] |= one << np.uint64(r & 63)
            above[r] = h
            right = v
    return bits, ties


@njit(cache=True)
def trace_bits(bits, n1, start_r, start_c, steps):
    """Trace a path through a bit field; stops on leaving the box."""
    n2 = bits.shape[0]
    out = np.empty((steps + 1, 2), dtype=np.int64)
    r, c = start_r, start_c
    out[0, 0] = r
    out[0, 1] = c
    one = np.uint64(1)
    for n in range(1, steps + 1):
        if (bits[c, r >> 6] >> np.uint64(r & 63)) & one:
            r += 1
        else:
            c += 1
        out[n, 0] = r
        out[n, 1] = c
        if r >= n1 or c >= n2:
            return out[:n + 1]
    return out


@njit(cache=True)
def exp_line(key, i0, j0, di, dj, n, rates):
    """Exponentials along a line of sites i0 + k*di, j0 + k*dj with given rates."""
    out = np.empty(n)
    for k in range(n):
        out[k] = site_exp(key, i0 + k * di, j0 + k * dj) / rates[k]
    return out


@njit(cache=True)
def star_pair_path(t, t_max, steps):
    """Trace (I, J) through a swap-time table T (cells [I-1, J-1]).

    From (1, 1) the pair moves to whichever neighbouring pair swaps first,
    as long as that swap happens no later than ``t_max``.  Returns visited
    cells, their swap times, and a flag set when the table edge was hit
    before ``t_max``.
    """
    n1, n2 = t.shape
    cells = np.empty((steps + 1, 2), dtype=np.int64)
    times = np.empty(steps + 1)
    i, j = 0, 0
    cells[0, 0] = 0
    cells[0, 1] = 0
    times[0] = t[0, 0]
    count = 1
    hit_edge = False
    while count <= steps:
        if i + 1 >= n1 or j + 1 >= n2:
            hit_edge = True
            break
        right = t[i + 1, j]
        up = t[i, j + 1]
        if right <= up:
            nxt = right
            ni, nj = i + 1, j
        else:
            nxt = up
            ni, nj = i, j + 1
        if nxt > t_max:
            break
        i, j = ni, nj
        cells[count, 0] = i
        cells[count, 1] = j
        times[count] = nxt
        count += 1
    return cells[:count], times[:count], hit_edge
