# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled evolution kernels.

Same API and semantics as ``_kernels_py``; see that module for the data
layout. Loops that do not call back into Python (advection and cellwise
scattering) carry most of the speedup.
"""

from itertools import product

from .errors import LabelCollisionError, MalformedClassifierError


def norm2(dict entries):
    cdef double total = 0.0
    cdef double complex a
    for v in entries.values():
        a = v
        total += a.real * a.real + a.imag * a.imag
    return total


def inner(dict a, dict b):
    cdef double complex total = 0
    cdef double complex av, bv
    if len(b) < len(a):
        for key, v in b.items():
            w = a.get(key)
            if w is not None:
                av = w
                bv = v
                total += av.conjugate() * bv
        return complex(total)
    for key, v in a.items():
        w = b.get(key)
        if w is not None:
            av = v
            bv = w
            total += av.conjugate() * bv
    return complex(total)


def prune(dict entries, double epsilon):
    cdef dict out = {}
    cdef double complex v
    if epsilon <= 0.0:
        for k, val in entries.items():
            v = val
            if v.real != 0.0 or v.imag != 0.0:
                out[k] = val
        return out
    cdef double eps2 = epsilon * epsilon
    for k, val in entries.items():
        v = val
        if v.real * v.real + v.imag * v.imag > eps2:
            out[k] = val
    return out


def permute(dict entries, f):
    cdef dict out = {}
    for label, amp in entries.items():
        image = f(label)
        if image in out:
            raise LabelCollisionError(
                f"labels map to the same image {image!r}; the rule is not injective"
            )
        out[image] = amp
    return out


def scatter(dict entries, classify, compose, columns_of):
    cdef dict out = {}
    cdef double complex amp, acc
    cdef Py_ssize_t j, ncols
    cdef tuple cols
    for label, a in entries.items():
        amp = a
        cls, jj = classify(label)
        j = jj
        cols = tuple(columns_of(cls))
        ncols = len(cols)
        if j < 0 or j >= ncols:
            raise MalformedClassifierError(
                f"local index {j} out of range for class {cls!r} of dim {ncols}"
            )
        for i, m in cols[j]:
            key = compose(cls, i)
            prev = out.get(key)
            acc = <double complex>m * amp
            if prev is not None:
                acc = acc + <double complex>prev
            out[key] = complex(acc)
    return _drop_zeros(out)


cdef dict _drop_zeros(dict out):
    cdef dict res = {}
    cdef double complex v
    for k, val in out.items():
        v = val
        if v.real != 0.0 or v.imag != 0.0:
            res[k] = val
    return res


def scatter_cells(dict entries, columns):
    cdef dict out = {}
    cdef double complex w, amp
    cdef Py_ssize_t k, n
    cdef bint simple
    cdef list cols = list(columns)
    cdef list coords, choices, cells
    for config, a in entries.items():
        amp = a
        n = len(config)
        if n == 0:
            prev = out.get(config)
            out[config] = complex(amp + (<double complex>prev if prev is not None else 0))
            continue
        coords = []
        choices = []
        simple = True
        for c, idx in config:
            coords.append(c)
            ch = cols[idx]
            choices.append(ch)
            if len(ch) != 1:
                simple = False
        if simple:
            w = amp
            cells = []
            for k in range(n):
                i, m = choices[k][0]
                w = w * <double complex>m
                cells.append((coords[k], i))
            key = tuple(cells)
            prev = out.get(key)
            if prev is not None:
                w = w + <double complex>prev
            out[key] = complex(w)
            continue
        for combo in product(*choices):
            w = amp
            cells = []
            for k in range(n):
                i, m = combo[k]
                w = w * <double complex>m
                cells.append((coords[k], i))
            key = tuple(cells)
            prev = out.get(key)
            if prev is not None:
                w = w + <double complex>prev
            out[key] = complex(w)
    return _drop_zeros(out)


cdef tuple _shift_1d(tuple config, long[:] strides, long[:] dims, long[:] moves,
                     object period):
    cdef dict cells = {}
    cdef Py_ssize_t j, nsub = strides.shape[0]
    cdef long idx, d, coord, target, per = 0
    cdef bint wrap = period is not None
    if wrap:
        per = period
    for c, ix in config:
        coord = c
        idx = ix
        for j in range(nsub):
            d = (idx // strides[j]) % dims[j]
            if d:
                target = coord + moves[j]
                if wrap:
                    target = target % per
                    if target < 0:
                        target += per
                cells[target] = cells.get(target, 0) + d * strides[j]
    return tuple(sorted(cells.items()))


cdef tuple _shift_2d(tuple config, long[:] strides, long[:] dims, long[:] mx,
                     long[:] my, object period):
    cdef dict cells = {}
    cdef Py_ssize_t j, nsub = strides.shape[0]
    cdef long idx, d, tx, ty, px = 0, py = 0
    cdef bint wrap = period is not None
    if wrap:
        px = period[0]
        py = period[1]
    for c, ix in config:
        idx = ix
        for j in range(nsub):
            d = (idx // strides[j]) % dims[j]
            if d:
                tx = <long>c[0] + mx[j]
                ty = <long>c[1] + my[j]
                if wrap:
                    tx = tx % px
                    ty = ty % py
                    if tx < 0:
                        tx += px
                    if ty < 0:
                        ty += py
                t = (tx, ty)
                cells[t] = cells.get(t, 0) + d * strides[j]
    return tuple(sorted(cells.items()))


cdef inline long[:] _longs(seq):
    import array
    return array.array("l", seq)


def shift_configuration(tuple config, strides, dims, moves, period):
    cdef long[:] st = _longs(strides)
    cdef long[:] dm = _longs(dims)
    if moves and isinstance(moves[0], tuple):
        return _shift_2d(config, st, dm, _longs([m[0] for m in moves]),
                         _longs([m[1] for m in moves]), period)
    return _shift_1d(config, st, dm, _longs(moves), period)


def advect(dict entries, strides, dims, moves, period):
    cdef dict out = {}
    cdef long[:] st = _longs(strides)
    cdef long[:] dm = _longs(dims)
    cdef long[:] mx, my
    cdef bint two_d = bool(moves) and isinstance(moves[0], tuple)
    cdef tuple key
    if two_d:
        mx = _longs([m[0] for m in moves])
        my = _longs([m[1] for m in moves])
    else:
        mx = _longs(moves)
    for config, amp in entries.items():
        if two_d:
            key = _shift_2d(config, st, dm, mx, my, period)
        else:
            key = _shift_1d(config, st, dm, mx, period)
        if key in out:
            raise LabelCollisionError(f"advection collision at {key!r}")
        out[key] = amp
    return out
