"""Independent reference implementations used only by the tests.

These deliberately take different arithmetic routes from the library code
(integer cross-multiplication instead of rationals, plain loops instead of
vectorized numpy) so that agreement means something.
"""

from functools import cmp_to_key

import numpy as np

FOOTNOTE_GRIDS = [(1, 1), (1, 2), (1, 3), (1, 4), (1, 5), (1, 6), (2, 2), (2, 3)]


def catalog_oracle(max_cells):
    base = [g for g in FOOTNOTE_GRIDS if g[0] * g[1] <= max_cells]
    out = list(base)
    for r, c in base:
        if r != c and (c, r) not in out:
            out.append((c, r))
    return out


def select_grid_oracle(W, H, grids, S):
    """Brute-force enumeration with integer-only rational comparisons.

    fitted area = num/den; effective = min(fitted, W*H); wasted = canvas - fitted.
    """
    cands = []
    for order, (r, c) in enumerate(grids):
        cw, ch = c * S, r * S
        if cw * H <= ch * W:  # width-limited
            num, den = cw * cw * H, W
        else:
            num, den = ch * ch * W, H
        if num >= W * H * den:
            eff = (W * H, 1)
        else:
            eff = (num, den)
        waste = (cw * ch * den - num, den)
        cands.append(((r, c), eff, waste, r * c, order))

    def frac_cmp(a, b):
        lhs, rhs = a[0] * b[1], b[0] * a[1]
        return (lhs > rhs) - (lhs < rhs)

    def cmp(x, y):
        e = frac_cmp(x[1], y[1])
        if e:
            return -e  # larger effective first
        w = frac_cmp(x[2], y[2])
        if w:
            return w
        if x[3] != y[3]:
            return x[3] - y[3]
        return x[4] - y[4]

    return sorted(cands, key=cmp_to_key(cmp))[0][0]


def effective_area_oracle(W, H, grid, S):
    r, c = grid
    s = min(c * S / W, r * S / H)
    return min(s * W * s * H, W * H)


def box_mask_oracle(x0, y0, x1, y1, width, height):
    """Pixel centers in the half-open box [x0, x1) x [y0, y1)."""
    m = np.zeros((height, width), dtype=bool)
    for j in range(height):
        for i in range(width):
            cx, cy = i + 0.5, j + 0.5
            m[j, i] = x0 <= cx < x1 and y0 <= cy < y1
    return m


def iou_oracle(a, b):
    ix = max(0.0, min(a[2], b[2]) - max(a[0], b[0]))
    iy = max(0.0, min(a[3], b[3]) - max(a[1], b[1]))
    inter = ix * iy
    area_a = (a[2] - a[0]) * (a[3] - a[1])
    area_b = (b[2] - b[0]) * (b[3] - b[1])
    return inter / (area_a + area_b - inter)


def rec_counter_oracle(preds, gts, dims, thr=0.5):
    """Count IoU >= thr after cell-centre denormalization, one pair at a time."""
    hits = 0
    for p, g, (w, h) in zip(preds, gts, dims):
        scale = (w / 1000, h / 1000, w / 1000, h / 1000)
        pp = [(v + 0.5) * s for v, s in zip(p, scale)]
        gg = [(v + 0.5) * s for v, s in zip(g, scale)]
        if iou_oracle(pp, gg) >= thr:
            hits += 1
    return hits


def mlp_oracle(x, W1, b1, W2, b2):
    """Straight-line loops over one cell vector."""
    c_raw, c_hidden = len(W1), len(W1[0])
    hidden = []
    for j in range(c_hidden):
        s = b1[j]
        for i in range(c_raw):
            s += x[i] * W1[i][j]
        hidden.append(max(s, 0.0))
    out = []
    for k in range(len(b2)):
        s = b2[k]
        for j in range(c_hidden):
            s += hidden[j] * W2[j][k]
        out.append(s)
    return out
