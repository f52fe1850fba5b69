"""Pure-Python graph kernels over permutation arrays.

A group with n elements is given by one permutation per generator:
perms[s][i] is the index of g_i * s (right action) or s * g_i (left action,
for expansion).  All functions are deterministic.
"""
from collections import deque
from itertools import combinations


def girth(perms, start):
    """Length of the shortest nonempty positive word equal to the identity."""
    rows = [list(map(int, r)) for r in perms]
    n = len(rows[0])
    dist = [-1] * n
    dist[start] = 0
    queue = deque([start])
    while queue:
        g = queue.popleft()
        for r in rows:
            h = r[g]
            if h == start:
                return dist[g] + 1
            if dist[h] < 0:
                dist[h] = dist[g] + 1
                queue.append(h)
    return -1


def collision_depth(perms, start):
    """Least L with two distinct nonempty positive words of length <= L equal."""
    rows = [list(map(int, r)) for r in perms]
    seen = set()
    level = [start]
    L = 0
    while True:
        L += 1
        nxt = []
        for g in level:
            for r in rows:
                h = r[g]
                if h in seen:
                    return L
                seen.add(h)
                nxt.append(h)
        level = nxt


def orbit_size(perms, start):
    rows = [list(map(int, r)) for r in perms]
    seen = {start}
    stack = [start]
    while stack:
        g = stack.pop()
        for r in rows:
            h = r[g]
            if h not in seen:
                seen.add(h)
                stack.append(h)
    return len(seen)


def min_expansion(perms, max_size):
    """Minimise max_a |aB \\ B| / |B| over nonempty B with |B| <= max_size.

    Returns (numerator, size, B) for the first minimiser in size-then-
    lexicographic order."""
    rows = [list(map(int, r)) for r in perms]
    n = len(rows[0])
    best = None
    for k in range(1, max_size + 1):
        for B in combinations(range(n), k):
            Bs = set(B)
            worst = 0
            for r in rows:
                out = 0
                for b in B:
                    if r[b] not in Bs:
                        out += 1
                if out > worst:
                    worst = out
            if best is None or worst * best[1] < best[0] * k:
                best = (worst, k, B)
                if worst == 0:
                    return best
    return best
