"""Pure-Python evolution kernels.

Reference implementation of the hot loops. ``_ckernels.pyx`` mirrors every
function here with the same signature and semantics; ``_backend`` picks one
at import time. States are plain ``dict`` objects mapping hashable labels to
``complex`` amplitudes.

Configurations (QLGA basis labels) are tuples of ``(coord, cell_index)``
pairs sorted by coordinate, with quiescent cells (index 0) omitted. A
coordinate is an ``int`` on 1D lattices and an ``(x, y)`` tuple on 2D ones.
"""

from itertools import product

from .errors import LabelCollisionError, MalformedClassifierError

__all__ = [
    "norm2",
    "inner",
    "prune",
    "permute",
    "scatter",
    "scatter_cells",
    "shift_configuration",
    "advect",
]


def norm2(entries):
    total = 0.0
    for a in entries.values():
        total += a.real * a.real + a.imag * a.imag
    return total


def inner(a, b):
    if len(b) < len(a):
        total = 0j
        for key, bv in b.items():
            av = a.get(key)
            if av is not None:
                total += av.conjugate() * bv
        return total
    total = 0j
    for key, av in a.items():
        bv = b.get(key)
        if bv is not None:
            total += av.conjugate() * bv
    return total


def prune(entries, epsilon):
    if epsilon <= 0.0:
        return {k: v for k, v in entries.items() if v != 0}
    return {k: v for k, v in entries.items() if abs(v) > epsilon}


def permute(entries, f):
    out = {}
    for label, amp in entries.items():
        image = f(label)
        if image in out:
            raise LabelCollisionError(
                f"labels map to the same image {image!r}; the rule is not injective"
            )
        out[image] = amp
    return out


def scatter(entries, classify, compose, columns_of):
    """Apply a block-diagonal unitary given column-sparse blocks.

    ``classify(label) -> (class_id, j)``; ``compose(class_id, i) -> label``;
    ``columns_of(class_id)[j]`` is a sequence of ``(i, m_ij)`` nonzeros.
    """
    out = {}
    get = out.get
    for label, amp in entries.items():
        cls, j = classify(label)
        cols = columns_of(cls)
        if j < 0 or j >= len(cols):
            raise MalformedClassifierError(
                f"local index {j} out of range for class {cls!r} of dim {len(cols)}"
            )
        for i, m in cols[j]:
            key = compose(cls, i)
            out[key] = get(key, 0j) + m * amp
    return {k: v for k, v in out.items() if v != 0}


def scatter_cells(entries, columns):
    """Apply the same local unitary at every active cell of every configuration.

    ``columns[idx]`` lists ``(i, m)`` nonzeros of column ``idx``. The local
    unitary must fix the quiescent index 0, so active cells stay active and
    the coordinate set of each configuration is preserved.
    """
    out = {}
    get = out.get
    for config, amp in entries.items():
        if not config:
            out[config] = get(config, 0j) + amp
            continue
        coords = [c for c, _ in config]
        choices = [columns[idx] for _, idx in config]
        if all(len(ch) == 1 for ch in choices):
            w = amp
            cells = []
            for c, ch in zip(coords, choices):
                i, m = ch[0]
                w *= m
                cells.append((c, i))
            key = tuple(cells)
            out[key] = get(key, 0j) + w
            continue
        for combo in product(*choices):
            w = amp
            for _, m in combo:
                w *= m
            key = tuple(zip(coords, [i for i, _ in combo]))
            out[key] = get(key, 0j) + w
    return {k: v for k, v in out.items() if v != 0}


def _wrap(coord, period):
    if period is None:
        return coord
    if isinstance(coord, tuple):
        return (coord[0] % period[0], coord[1] % period[1])
    return coord % period


def shift_configuration(config, strides, dims, moves, period):
    """Move every nonzero subcell digit of every cell by its displacement."""
    cells = {}
    nsub = len(strides)
    two_d = bool(moves) and isinstance(moves[0], tuple)
    for coord, idx in config:
        for j in range(nsub):
            s = strides[j]
            d = (idx // s) % dims[j]
            if d:
                mv = moves[j]
                if two_d:
                    target = (coord[0] + mv[0], coord[1] + mv[1])
                else:
                    target = coord + mv
                if period is not None:
                    target = _wrap(target, period)
                cells[target] = cells.get(target, 0) + d * s
    return tuple(sorted(cells.items()))


def advect(entries, strides, dims, moves, period):
    out = {}
    for config, amp in entries.items():
        key = shift_configuration(config, strides, dims, moves, period)
        if key in out:
            raise LabelCollisionError(f"advection collision at {key!r}")
        out[key] = amp
    return out
