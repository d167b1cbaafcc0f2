# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Semantics mirror ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, rint

cnp.import_array()


def locate_many(double[:, ::1] points, double side, cnp.int64_t[:, :, ::1] lut,
                cnp.int64_t[::1] lut_offset, double[:, ::1] mins, double[:, ::1] maxs,
                double eps):
    cdef Py_ssize_t n = points.shape[0]
    out_arr = np.full(n, -1, dtype=np.int64)
    cdef cnp.int64_t[::1] out = out_arr
    cdef Py_ssize_t i, a
    cdef int dx, dy, dz
    cdef cnp.int64_t b0, b1, b2, c0, c1, c2, zid, best
    cdef cnp.int64_t s0 = lut.shape[0], s1 = lut.shape[1], s2 = lut.shape[2]
    cdef double px, py, pz
    for i in range(n):
        px = points[i, 0]
        py = points[i, 1]
        pz = points[i, 2]
        b0 = <cnp.int64_t>rint(px / side) + lut_offset[0]
        b1 = <cnp.int64_t>rint(py / side) + lut_offset[1]
        b2 = <cnp.int64_t>rint(pz / side) + lut_offset[2]
        best = -1
        for dx in range(-1, 2):
            c0 = b0 + dx
            if c0 < 0 or c0 >= s0:
                continue
            for dy in range(-1, 2):
                c1 = b1 + dy
                if c1 < 0 or c1 >= s1:
                    continue
                for dz in range(-1, 2):
                    c2 = b2 + dz
                    if c2 < 0 or c2 >= s2:
                        continue
                    zid = lut[c0, c1, c2]
                    if zid < 0:
                        continue
                    if best >= 0 and zid >= best:
                        continue
                    if (mins[zid, 0] - eps <= px and px <= maxs[zid, 0] + eps and
                            mins[zid, 1] - eps <= py and py <= maxs[zid, 1] + eps and
                            mins[zid, 2] - eps <= pz and pz <= maxs[zid, 2] + eps):
                        best = zid
        out[i] = best
    return out_arr


def distance_matrix(double[:, ::1] pos):
    cdef Py_ssize_t n = pos.shape[0]
    out_arr = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double dx, dy, dz, d
    for i in range(n):
        for j in range(i + 1, n):
            dx = pos[i, 0] - pos[j, 0]
            dy = pos[i, 1] - pos[j, 1]
            dz = pos[i, 2] - pos[j, 2]
            d = sqrt(dx * dx + dy * dy + dz * dz)
            out[i, j] = d
            out[j, i] = d
    return out_arr


def greedy_select(cred, interferes, Py_ssize_t m, double alpha):
    cdef double[::1] c = np.ascontiguousarray(cred, dtype=np.float64)
    cdef cnp.uint8_t[:, ::1] f = np.ascontiguousarray(interferes, dtype=np.uint8)
    cdef Py_ssize_t n = c.shape[0]
    if n == 0 or m <= 0:
        return [], []
    cdef Py_ssize_t target = m if m < n else n
    cdef Py_ssize_t i, best_i, l
    cdef double beta, w, best_w
    taken_arr = np.zeros(n, dtype=np.uint8)
    clear_arr = np.zeros(n, dtype=np.int64)
    cdef cnp.uint8_t[::1] taken = taken_arr
    cdef cnp.int64_t[::1] clear = clear_arr
    chosen = [0]
    weights = [float("nan")]
    taken[0] = 1
    for i in range(n):
        clear[i] = 1 - f[i, 0]
    l = 1
    while l < target:
        beta = (1.0 - alpha) / l
        best_i = -1
        best_w = 0.0
        for i in range(n):
            if taken[i]:
                continue
            w = alpha * c[i] + beta * clear[i]
            if best_i < 0 or w > best_w:
                best_i = i
                best_w = w
        chosen.append(best_i)
        weights.append(best_w)
        taken[best_i] = 1
        for i in range(n):
            clear[i] += 1 - f[i, best_i]
        l += 1
    return chosen, weights
