# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot loops: recursive Gaussian IIR passes and OIT point splatting.

Arithmetic and iteration order deliberately match `_pure.py` so the two
backends return bit-identical arrays. The splatter optionally parallelizes
over horizontal pixel bands; every pixel is owned by exactly one band and
each band scans points in input order, so the accumulation sequence per
pixel (and therefore the result, bit for bit) is independent of the thread
count.
"""

import numpy as np

cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport ceil, floor, isfinite

cnp.import_array()


def deriche_axis1(object x_in, object n_in, object m_in, object d_in):
    """Forward+backward 4th-order IIR along axis 1 of a 2D float64 array."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] x = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] n = np.ascontiguousarray(n_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] m = np.ascontiguousarray(m_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] d = np.ascontiguousarray(d_in, dtype=np.float64)

    cdef Py_ssize_t rows = x.shape[0]
    cdef Py_ssize_t cols = x.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] yp = np.zeros((rows, cols))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ym = np.zeros((rows, cols))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((rows, cols))

    cdef double n0 = n[0], n1 = n[1], n2 = n[2], n3 = n[3]
    cdef double m1 = m[0], m2 = m[1], m3 = m[2], m4 = m[3]
    cdef double d1 = d[0], d2 = d[1], d3 = d[2], d4 = d[3]
    cdef Py_ssize_t r, i
    cdef double acc

    for r in range(rows):
        for i in range(cols):
            acc = n0 * x[r, i]
            if i >= 1:
                acc = acc + n1 * x[r, i - 1]
            if i >= 2:
                acc = acc + n2 * x[r, i - 2]
            if i >= 3:
                acc = acc + n3 * x[r, i - 3]
            if i >= 1:
                acc = acc - d1 * yp[r, i - 1]
            if i >= 2:
                acc = acc - d2 * yp[r, i - 2]
            if i >= 3:
                acc = acc - d3 * yp[r, i - 3]
            if i >= 4:
                acc = acc - d4 * yp[r, i - 4]
            yp[r, i] = acc

        for i in range(cols - 1, -1, -1):
            acc = 0.0
            if i + 1 < cols:
                acc = acc + m1 * x[r, i + 1]
            if i + 2 < cols:
                acc = acc + m2 * x[r, i + 2]
            if i + 3 < cols:
                acc = acc + m3 * x[r, i + 3]
            if i + 4 < cols:
                acc = acc + m4 * x[r, i + 4]
            if i + 1 < cols:
                acc = acc - d1 * ym[r, i + 1]
            if i + 2 < cols:
                acc = acc - d2 * ym[r, i + 2]
            if i + 3 < cols:
                acc = acc - d3 * ym[r, i + 3]
            if i + 4 < cols:
                acc = acc - d4 * ym[r, i + 4]
            ym[r, i] = acc

        for i in range(cols):
            out[r, i] = yp[r, i] + ym[r, i]

    return out


cdef void _splat_band(const double* sx, const double* sy, const double* rgb,
                      double alpha, double radius, Py_ssize_t npts,
                      Py_ssize_t width, Py_ssize_t height,
                      Py_ssize_t row0, Py_ssize_t row1,
                      double* cr, double* cg, double* cb,
                      double* a_sum, double* rev) noexcept nogil:
    cdef Py_ssize_t span = <Py_ssize_t> floor(2.0 * radius + 0.5) + 1
    cdef double r2 = radius * radius
    cdef Py_ssize_t p, ix, iy, bx, by, iy_lo, iy_hi, ix_lo, ix_hi, pix
    cdef double cx, cy, cov, a, dx, dy, dx2a, dx2b, dy2a, dy2b
    cdef int hits

    for p in range(npts):
        cx = sx[p]
        cy = sy[p]
        if not (isfinite(cx) and isfinite(cy)):
            continue
        bx = <Py_ssize_t> ceil(cx - radius - 0.75)
        by = <Py_ssize_t> ceil(cy - radius - 0.75)
        iy_lo = by if by > row0 else row0
        iy_hi = by + span if by + span < row1 else row1
        if iy_lo >= iy_hi:
            continue
        ix_lo = bx if bx > 0 else 0
        ix_hi = bx + span if bx + span < width else width
        if ix_lo >= ix_hi:
            continue
        for iy in range(iy_lo, iy_hi):
            dy = (<double> iy + 0.25) - cy
            dy2a = dy * dy
            dy = (<double> iy + 0.75) - cy
            dy2b = dy * dy
            for ix in range(ix_lo, ix_hi):
                dx = (<double> ix + 0.25) - cx
                dx2a = dx * dx
                dx = (<double> ix + 0.75) - cx
                dx2b = dx * dx
                hits = 0
                if dx2a + dy2a <= r2:
                    hits = hits + 1
                if dx2b + dy2a <= r2:
                    hits = hits + 1
                if dx2a + dy2b <= r2:
                    hits = hits + 1
                if dx2b + dy2b <= r2:
                    hits = hits + 1
                if hits == 0:
                    continue
                cov = hits * 0.25
                a = alpha * cov
                pix = iy * width + ix
                cr[pix] += a * rgb[3 * p]
                cg[pix] += a * rgb[3 * p + 1]
                cb[pix] += a * rgb[3 * p + 2]
                a_sum[pix] += a
                rev[pix] *= 1.0 - a


def splat(object sx_in, object sy_in, object rgb_in, double alpha,
          double radius, Py_ssize_t width, Py_ssize_t height,
          int threads=1):
    """Accumulate anti-aliased discs into weighted-OIT planes.

    Returns (cr, cg, cb, a_sum, revealage) as (height, width) float64,
    bit-identical for any ``threads`` value.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] sx = np.ascontiguousarray(sx_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] sy = np.ascontiguousarray(sy_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] rgb = np.ascontiguousarray(rgb_in, dtype=np.float64)

    cdef Py_ssize_t npts = sx.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] cr = np.zeros((height, width))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] cg = np.zeros((height, width))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] cb = np.zeros((height, width))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a_sum = np.zeros((height, width))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] rev = np.ones((height, width))

    cdef const double* psx = &sx[0] if npts else NULL
    cdef const double* psy = &sy[0] if npts else NULL
    cdef const double* prgb = &rgb[0, 0] if npts else NULL
    cdef double* pcr = &cr[0, 0]
    cdef double* pcg = &cg[0, 0]
    cdef double* pcb = &cb[0, 0]
    cdef double* pa = &a_sum[0, 0]
    cdef double* prev = &rev[0, 0]

    if npts == 0:
        return cr, cg, cb, a_sum, rev

    cdef int nbands = threads if threads > 1 else 1
    if nbands > height:
        nbands = <int> height
    cdef Py_ssize_t b, r0, r1

    if nbands <= 1:
        with nogil:
            _splat_band(psx, psy, prgb, alpha, radius, npts, width, height,
                        0, height, pcr, pcg, pcb, pa, prev)
    else:
        # serial degradation when built without OpenMP: same bands, same result
        for b in prange(nbands, nogil=True, num_threads=nbands,
                        schedule='static'):
            _splat_band(psx, psy, prgb, alpha, radius, npts, width, height,
                        (b * height) // nbands,
                        ((b + 1) * height) // nbands,
                        pcr, pcg, pcb, pa, prev)

    return cr, cg, cb, a_sum, rev
