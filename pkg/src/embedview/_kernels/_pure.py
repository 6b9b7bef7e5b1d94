"""NumPy fallback kernels.

These mirror the compiled loops operation-for-operation: the IIR passes
vectorize across scanlines but keep the sequential order along the scan
axis, and the splatter uses ``np.add.at`` / ``np.multiply.at`` so per-pixel
accumulation happens in the same point order as the compiled loop. Output
is bit-identical to the extension.
"""

import numpy as np

_SPLAT_CHUNK = 65536


def deriche_axis1(x, n, m, d):
    """Forward+backward 4th-order IIR along axis 1 of a 2D float64 array.

    ``n`` are the causal numerator taps, ``m`` the anticausal taps, ``d``
    the shared denominator. Returns the summed two-sided response.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    cols = x.shape[1]
    yp = np.zeros_like(x)
    ym = np.zeros_like(x)

    for i in range(cols):
        acc = n[0] * x[:, i]
        if i >= 1:
            acc = acc + n[1] * x[:, i - 1]
        if i >= 2:
            acc = acc + n[2] * x[:, i - 2]
        if i >= 3:
            acc = acc + n[3] * x[:, i - 3]
        if i >= 1:
            acc = acc - d[0] * yp[:, i - 1]
        if i >= 2:
            acc = acc - d[1] * yp[:, i - 2]
        if i >= 3:
            acc = acc - d[2] * yp[:, i - 3]
        if i >= 4:
            acc = acc - d[3] * yp[:, i - 4]
        yp[:, i] = acc

    for i in range(cols - 1, -1, -1):
        acc = np.zeros(x.shape[0])
        if i + 1 < cols:
            acc = acc + m[0] * x[:, i + 1]
        if i + 2 < cols:
            acc = acc + m[1] * x[:, i + 2]
        if i + 3 < cols:
            acc = acc + m[2] * x[:, i + 3]
        if i + 4 < cols:
            acc = acc + m[3] * x[:, i + 4]
        if i + 1 < cols:
            acc = acc - d[0] * ym[:, i + 1]
        if i + 2 < cols:
            acc = acc - d[1] * ym[:, i + 2]
        if i + 3 < cols:
            acc = acc - d[2] * ym[:, i + 3]
        if i + 4 < cols:
            acc = acc - d[3] * ym[:, i + 4]
        ym[:, i] = acc

    return yp + ym


def splat(sx, sy, rgb, alpha, radius, width, height, threads=1):
    """Accumulate anti-aliased discs into weighted-OIT planes.

    Coverage of each pixel is the fraction of its 2x2 subsamples inside the
    disc. Returns (cr, cg, cb, a_sum, revealage), all (height, width)
    float64; revealage starts at 1 and multiplies (1 - alpha*coverage) per
    point in input order. ``threads`` is accepted for API parity and
    ignored (the result is thread-count independent by construction).
    """
    sx = np.asarray(sx, dtype=np.float64)
    sy = np.asarray(sy, dtype=np.float64)
    rgb = np.asarray(rgb, dtype=np.float64)
    npts = len(sx)

    cr = np.zeros(height * width)
    cg = np.zeros(height * width)
    cb = np.zeros(height * width)
    a_sum = np.zeros(height * width)
    rev = np.ones(height * width)

    span = int(np.floor(2.0 * radius + 0.5)) + 1
    r2 = radius * radius
    off = np.arange(span, dtype=np.int64)

    for start in range(0, npts, _SPLAT_CHUNK):
        end = min(start + _SPLAT_CHUNK, npts)
        x = sx[start:end]
        y = sy[start:end]
        finite = np.isfinite(x) & np.isfinite(y)

        bx = np.ceil(x - radius - 0.75).astype(np.int64)
        by = np.ceil(y - radius - 0.75).astype(np.int64)
        px = bx[:, None] + off[None, :]                     # (c, span)
        py = by[:, None] + off[None, :]

        # coverage, broadcast to (c, span_y, span_x)
        cov = np.zeros((end - start, span, span))
        for sub_y in (0.25, 0.75):
            dy = py + sub_y - y[:, None]
            dy2 = (dy * dy)[:, :, None]
            for sub_x in (0.25, 0.75):
                dx = px + sub_x - x[:, None]
                dx2 = (dx * dx)[:, None, :]
                cov += (dx2 + dy2 <= r2)
        cov *= 0.25

        inb = (
            finite[:, None, None]
            & (px[:, None, :] >= 0) & (px[:, None, :] < width)
            & (py[:, :, None] >= 0) & (py[:, :, None] < height)
        )
        sel = inb & (cov > 0)
        if not sel.any():
            continue
        pix = (py[:, :, None] * width + px[:, None, :])
        pix = np.broadcast_to(pix, sel.shape)[sel]
        a = alpha * cov[sel]
        pt = np.broadcast_to(
            np.arange(start, end)[:, None, None], sel.shape
        )[sel]

        np.add.at(cr, pix, a * rgb[pt, 0])
        np.add.at(cg, pix, a * rgb[pt, 1])
        np.add.at(cb, pix, a * rgb[pt, 2])
        np.add.at(a_sum, pix, a)
        np.multiply.at(rev, pix, 1.0 - a)

    shape = (height, width)
    return (
        cr.reshape(shape), cg.reshape(shape), cb.reshape(shape),
        a_sum.reshape(shape), rev.reshape(shape),
    )
