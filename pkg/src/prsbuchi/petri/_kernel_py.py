"""Pure-Python marking kernels. Markings are int tuples; ``OMEGA`` (-1) is omega."""
from __future__ import annotations

OMEGA = -1


def fire(m, pre, post):
    out = []
    for v, a, b in zip(m, pre, post):
        if v < a:
            return None
        out.append(v - a + b)
    return tuple(out)


def successors(m, pres, posts):
    out = []
    for ti in range(len(pres)):
        r = fire(m, pres[ti], posts[ti])
        if r is not None:
            out.append((ti, r))
    return out


def leq(a, b):
    for x, y in zip(a, b):
        if x > y:
            return False
    return True


def pre_image(m, pre, post):
    """Least marking from which the transition fires and reaches at least ``m``."""
    return tuple((v - b if v > b else 0) + a for v, a, b in zip(m, pre, post))


def covered(m, basis):
    for b in basis:
        if leq(b, m):
            return True
    return False


def insert_minimal(basis, m):
    """Add ``m`` to an antichain of minimal elements; False if already covered."""
    for b in basis:
        if leq(b, m):
            return False
    basis[:] = [b for b in basis if not leq(m, b)]
    basis.append(m)
    return True


def omega_fire(m, pre, post):
    out = []
    for v, a, b in zip(m, pre, post):
        if v == OMEGA:
            out.append(OMEGA)
        elif v < a:
            return None
        else:
            out.append(v - a + b)
    return tuple(out)


def omega_leq(a, b):
    for x, y in zip(a, b):
        if y == OMEGA:
            continue
        if x == OMEGA or x > y:
            return False
    return True


def accelerate(m, ancestors):
    """Set to omega every place that strictly grows over a covered ancestor."""
    cur = list(m)
    for anc in ancestors:
        if anc != tuple(cur) and omega_leq(anc, cur):
            for i, (x, y) in enumerate(zip(anc, cur)):
                if y != OMEGA and x != OMEGA and x < y:
                    cur[i] = OMEGA
    return tuple(cur)
