# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled graph kernels; same contracts as _pykernels."""
from libc.stdlib cimport malloc, calloc, free


def girth(const int[:, ::1] perms, int start):
    cdef Py_ssize_t ng = perms.shape[0], n = perms.shape[1]
    cdef int *dist = <int *> malloc(n * sizeof(int))
    cdef int *queue = <int *> malloc(n * sizeof(int))
    cdef Py_ssize_t head = 0, tail = 0, i, s
    cdef int g, h, result = -1
    if dist == NULL or queue == NULL:
        free(dist); free(queue)
        raise MemoryError()
    for i in range(n):
        dist[i] = -1
    dist[start] = 0
    queue[tail] = start
    tail += 1
    while head < tail and result < 0:
        g = queue[head]
        head += 1
        for s in range(ng):
            h = perms[s, g]
            if h == start:
                result = dist[g] + 1
                break
            if dist[h] < 0:
                dist[h] = dist[g] + 1
                queue[tail] = h
                tail += 1
    free(dist)
    free(queue)
    return result


def collision_depth(const int[:, ::1] perms, int start):
    cdef Py_ssize_t ng = perms.shape[0], n = perms.shape[1]
    cdef char *seen = <char *> calloc(n, 1)
    cdef int *level = <int *> malloc(n * sizeof(int))
    cdef int *nxt = <int *> malloc(n * sizeof(int))
    cdef int *tmp
    cdef Py_ssize_t nl = 1, nn, i, s
    cdef int g, h, L = 0, result = -1
    if seen == NULL or level == NULL or nxt == NULL:
        free(seen); free(level); free(nxt)
        raise MemoryError()
    level[0] = start
    while result < 0:
        L += 1
        nn = 0
        for i in range(nl):
            g = level[i]
            for s in range(ng):
                h = perms[s, g]
                if seen[h]:
                    result = L
                    break
                seen[h] = 1
                nxt[nn] = h
                nn += 1
            if result >= 0:
                break
        tmp = level
        level = nxt
        nxt = tmp
        nl = nn
    free(seen)
    free(level)
    free(nxt)
    return result


def orbit_size(const int[:, ::1] perms, int start):
    cdef Py_ssize_t ng = perms.shape[0], n = perms.shape[1]
    cdef char *seen = <char *> calloc(n, 1)
    cdef int *stack = <int *> malloc(n * sizeof(int))
    cdef Py_ssize_t top = 0, count = 1, s
    cdef int g, h
    if seen == NULL or stack == NULL:
        free(seen); free(stack)
        raise MemoryError()
    seen[start] = 1
    stack[top] = start
    top += 1
    while top > 0:
        top -= 1
        g = stack[top]
        for s in range(ng):
            h = perms[s, g]
            if not seen[h]:
                seen[h] = 1
                count += 1
                stack[top] = h
                top += 1
    free(seen)
    free(stack)
    return count


cdef inline bint _member(int x, int *B, int k):
    cdef int i
    for i in range(k):
        if B[i] == x:
            return True
    return False


def min_expansion(const int[:, ::1] perms, int max_size):
    cdef Py_ssize_t ng = perms.shape[0]
    cdef int n = perms.shape[1]
    cdef int B[64]
    cdef int k, i, j, s, out, worst
    cdef long best_num = -1, best_den = 1
    best_B = None
    if max_size > 64:
        raise ValueError("max_size too large")
    if max_size > n:
        max_size = n
    for k in range(1, max_size + 1):
        for i in range(k):
            B[i] = i
        while True:
            worst = 0
            for s in range(ng):
                out = 0
                for j in range(k):
                    if not _member(perms[s, B[j]], B, k):
                        out += 1
                if out > worst:
                    worst = out
            if best_num < 0 or worst * best_den < best_num * k:
                best_num = worst
                best_den = k
                best_B = tuple(B[j] for j in range(k))
                if worst == 0:
                    return (0, k, best_B)
            # next combination in lexicographic order
            i = k - 1
            while i >= 0 and B[i] == n - k + i:
                i -= 1
            if i < 0:
                break
            B[i] += 1
            for j in range(i + 1, k):
                B[j] = B[j - 1] + 1
    return (int(best_num), int(best_den), best_B)
