# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled marking kernels; same contract as ``_kernel_py``."""

cdef enum:
    C_OMEGA = -1
OMEGA = -1


cpdef object fire(tuple m, tuple pre, tuple post):
    cdef Py_ssize_t i, n = len(m)
    cdef long v, a
    out = [0] * n
    for i in range(n):
        v = m[i]
        a = pre[i]
        if v < a:
            return None
        out[i] = v - a + <long>post[i]
    return tuple(out)


cpdef list successors(tuple m, tuple pres, tuple posts):
    cdef Py_ssize_t ti
    cdef list out = []
    for ti in range(len(pres)):
        r = fire(m, pres[ti], posts[ti])
        if r is not None:
            out.append((ti, r))
    return out


cpdef bint leq(tuple a, tuple b):
    cdef Py_ssize_t i
    for i in range(len(a)):
        if <long>a[i] > <long>b[i]:
            return False
    return True


cpdef tuple pre_image(tuple m, tuple pre, tuple post):
    cdef Py_ssize_t i, n = len(m)
    cdef long v, b
    out = [0] * n
    for i in range(n):
        v = m[i]
        b = post[i]
        out[i] = (v - b if v > b else 0) + <long>pre[i]
    return tuple(out)


cpdef bint covered(tuple m, list basis):
    cdef tuple b
    for b in basis:
        if leq(b, m):
            return True
    return False


cpdef bint insert_minimal(list basis, tuple m):
    cdef tuple b
    for b in basis:
        if leq(b, m):
            return False
    basis[:] = [b for b in basis if not leq(m, b)]
    basis.append(m)
    return True


cpdef object omega_fire(tuple m, tuple pre, tuple post):
    cdef Py_ssize_t i, n = len(m)
    cdef long v, a
    out = [0] * n
    for i in range(n):
        v = m[i]
        if v == C_OMEGA:
            out[i] = C_OMEGA
            continue
        a = pre[i]
        if v < a:
            return None
        out[i] = v - a + <long>post[i]
    return tuple(out)


cpdef bint omega_leq(tuple a, tuple b):
    cdef Py_ssize_t i
    cdef long x, y
    for i in range(len(a)):
        y = b[i]
        if y == C_OMEGA:
            continue
        x = a[i]
        if x == C_OMEGA or x > y:
            return False
    return True


cpdef tuple accelerate(tuple m, ancestors):
    cdef list cur = list(m)
    cdef Py_ssize_t i
    cdef long x, y
    for anc in ancestors:
        if anc != tuple(cur) and omega_leq(anc, tuple(cur)):
            for i in range(len(cur)):
                x = anc[i]
                y = cur[i]
                if y != C_OMEGA and x != C_OMEGA and x < y:
                    cur[i] = C_OMEGA
    return tuple(cur)
