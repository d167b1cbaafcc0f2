"""Reference (numpy / pure Python) implementations of the hot kernels.

Must stay result-identical to ``_ckernels.pyx``.
"""

import itertools

import numpy as np

_OFFSETS = list(itertools.product((-1, 0, 1), repeat=3))


def _locate_loop(points, side, lut, lut_offset, mins, maxs, eps):
    # Per-point loop; numpy call overhead dominates for a handful of points.
    shape = lut.shape
    off = [int(v) for v in lut_offset]
    out = []
    for x, y, z in points.tolist():
        b = (round(x / side) + off[0], round(y / side) + off[1], round(z / side) + off[2])
        best = -1
        for dx, dy, dz in _OFFSETS:
            i, j, k = b[0] + dx, b[1] + dy, b[2] + dz
            if not (0 <= i < shape[0] and 0 <= j < shape[1] and 0 <= k < shape[2]):
                continue
            zid = int(lut[i, j, k])
            if zid < 0 or (0 <= best < zid):
                continue
            lo, hi = mins[zid], maxs[zid]
            if (lo[0] - eps <= x <= hi[0] + eps and lo[1] - eps <= y <= hi[1] + eps
                    and lo[2] - eps <= z <= hi[2] + eps):
                best = zid
        out.append(best)
    return np.asarray(out, dtype=np.int64)


def locate_many(points, side, lut, lut_offset, mins, maxs, eps):
    n = points.shape[0]
    if n <= 16:
        return _locate_loop(points, side, lut, lut_offset, mins, maxs, eps)
    best = np.full(n, -1, dtype=np.int64)
    base = np.rint(points / side).astype(np.int64) + lut_offset
    shape = np.asarray(lut.shape, dtype=np.int64)
    for off in _OFFSETS:
        cell = base + np.asarray(off, dtype=np.int64)
        valid = np.all((cell >= 0) & (cell < shape), axis=1)
        if not valid.any():
            continue
        rows = np.nonzero(valid)[0]
        zid = lut[cell[rows, 0], cell[rows, 1], cell[rows, 2]]
        keep = zid >= 0
        rows, zid = rows[keep], zid[keep]
        p = points[rows]
        inside = np.all((mins[zid] - eps <= p) & (p <= maxs[zid] + eps), axis=1)
        rows, zid = rows[inside], zid[inside]
        cur = best[rows]
        better = (cur < 0) | (zid < cur)
        best[rows[better]] = zid[better]
    return best


def distance_matrix(pos):
    diff = pos[:, None, :] - pos[None, :, :]
    sq = diff[..., 0] * diff[..., 0] + diff[..., 1] * diff[..., 1] + diff[..., 2] * diff[..., 2]
    return np.sqrt(sq)


def greedy_select(cred, interferes, m, alpha):
    """Greedy reporter admission over candidates given in ranking order.

    Index 0 is the ranking head and is always admitted first. ``interferes`` is
    an (n, n) 0/1 matrix. Returns (admitted indices, weights); the head's weight
    slot is NaN. Ties fall to the lower ranking index.
    """
    n = len(cred)
    if n == 0 or m <= 0:
        return [], []
    chosen = [0]
    weights = [float("nan")]
    taken = [False] * n
    taken[0] = True
    clear = [0] * n
    for i in range(n):
        clear[i] = 1 - int(interferes[i][0])
    while len(chosen) < min(m, n):
        beta = (1.0 - alpha) / len(chosen)
        best_i = -1
        best_w = 0.0
        for i in range(n):
            if taken[i]:
                continue
            w = alpha * cred[i] + beta * clear[i]
            if best_i < 0 or w > best_w:
                best_i, best_w = i, w
        chosen.append(best_i)
        weights.append(best_w)
        taken[best_i] = True
        for i in range(n):
            clear[i] += 1 - int(interferes[i][best_i])
    return chosen, weights
