# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementations of the hot kernels (see _pykernels for the
reference semantics; the two must agree exactly)."""

from libc.stdlib cimport free, malloc

BACKEND_NAME = "c"

ctypedef unsigned long long u64


cdef int _lca(int a, int b, int* base, int* match, int* p, char* on_path, int n):
    cdef int i
    for i in range(n):
        on_path[i] = 0
    while True:
        a = base[a]
        on_path[a] = 1
        if match[a] == -1:
            break
        a = p[match[a]]
    while True:
        b = base[b]
        if on_path[b]:
            return b
        b = p[match[b]]


cdef void _mark_path(int v, int b, int child, int* base, int* match, int* p,
                     char* blossom):
    while base[v] != b:
        blossom[base[v]] = 1
        blossom[base[match[v]]] = 1
        p[v] = child
        child = match[v]
        v = p[match[v]]


def max_matching(int n, adj):
    """Maximum cardinality matching (general graphs, blossom contraction)."""
    cdef int m_edges = 0
    cdef int i, j, v, to, u, root, head, tail, curbase, pv, ppv
    for i in range(n):
        m_edges += len(adj[i])
    cdef int* indptr = <int*> malloc((n + 1) * sizeof(int))
    cdef int* indices = <int*> malloc(max(m_edges, 1) * sizeof(int))
    cdef int* match = <int*> malloc(n * sizeof(int))
    cdef int* p = <int*> malloc(n * sizeof(int))
    cdef int* base = <int*> malloc(n * sizeof(int))
    cdef int* q = <int*> malloc(max(n, 1) * sizeof(int))
    cdef char* used = <char*> malloc(n * sizeof(char))
    cdef char* blossom = <char*> malloc(n * sizeof(char))
    cdef char* on_path = <char*> malloc(n * sizeof(char))
    if not (indptr and indices and match and p and base and q and used
            and blossom and on_path):
        raise MemoryError()
    try:
        indptr[0] = 0
        for i in range(n):
            row = adj[i]
            for j in range(len(row)):
                indices[indptr[i] + j] = row[j]
            indptr[i + 1] = indptr[i] + len(row)
        for i in range(n):
            match[i] = -1
        # greedy init
        for v in range(n):
            if match[v] == -1:
                for j in range(indptr[v], indptr[v + 1]):
                    u = indices[j]
                    if match[u] == -1:
                        match[v] = u
                        match[u] = v
                        break
        for root in range(n):
            if match[root] != -1:
                continue
            for i in range(n):
                used[i] = 0
                p[i] = -1
                base[i] = i
            used[root] = 1
            head = 0
            tail = 0
            q[tail] = root
            tail += 1
            found = False
            while head < tail and not found:
                v = q[head]
                head += 1
                for j in range(indptr[v], indptr[v + 1]):
                    to = indices[j]
                    if base[v] == base[to] or match[v] == to:
                        continue
                    if to == root or (match[to] != -1 and p[match[to]] != -1):
                        curbase = _lca(v, to, base, match, p, on_path, n)
                        for i in range(n):
                            blossom[i] = 0
                        _mark_path(v, curbase, to, base, match, p, blossom)
                        _mark_path(to, curbase, v, base, match, p, blossom)
                        for i in range(n):
                            if blossom[base[i]]:
                                base[i] = curbase
                                if not used[i]:
                                    used[i] = 1
                                    q[tail] = i
                                    tail += 1
                    elif p[to] == -1:
                        p[to] = v
                        if match[to] == -1:
                            u = to
                            while u != -1:
                                pv = p[u]
                                ppv = match[pv]
                                match[u] = pv
                                match[pv] = u
                                u = ppv
                            found = True
                            break
                        else:
                            used[match[to]] = 1
                            q[tail] = match[to]
                            tail += 1
        return [match[i] for i in range(n)]
    finally:
        free(indptr); free(indices); free(match); free(p); free(base)
        free(q); free(used); free(blossom); free(on_path)


def embed_backtrack(host_masks, guest_masks, order, forbidden_masks):
    """Injective edge-preserving guest->host map avoiding forbidden edges."""
    cdef int n_h = len(host_masks)
    cdef int n_g = len(guest_masks)
    if n_g > n_h:
        return None
    if n_g == 0:
        return []
    if n_h > 63:
        raise ValueError("compiled embed kernel capped at 63 host vertices")
    cdef u64 full = (<u64>1 << n_h) - 1
    cdef u64* allowed = <u64*> malloc(n_h * sizeof(u64))
    cdef u64* cand_stack = <u64*> malloc((n_g + 1) * sizeof(u64))
    cdef int* images = <int*> malloc(n_g * sizeof(int))
    cdef int* prev_flat = <int*> malloc(max(n_g * n_g, 1) * sizeof(int))
    cdef int* prev_ptr = <int*> malloc((n_g + 1) * sizeof(int))
    if not (allowed and cand_stack and images and prev_flat and prev_ptr):
        raise MemoryError()
    cdef int i, v, g, x, cnt
    cdef u64 c, low, used, gm
    try:
        for v in range(n_h):
            allowed[v] = (<u64>host_masks[v]) & ~(<u64>forbidden_masks[v])
        pos_of = {}
        for i in range(n_g):
            pos_of[order[i]] = i
        prev_ptr[0] = 0
        cnt = 0
        for i in range(n_g):
            g = order[i]
            gm = <u64>guest_masks[g]
            while gm:
                low = gm & (~gm + 1)
                gm ^= low
                x = pos_of[_bit_index(low)]
                if x < i:
                    prev_flat[cnt] = x
                    cnt += 1
            prev_ptr[i + 1] = cnt
        i = 0
        used = 0
        cand_stack[0] = _candidates(0, used, full, allowed, images,
                                    prev_flat, prev_ptr)
        while True:
            c = cand_stack[i]
            if c:
                low = c & (~c + 1)
                cand_stack[i] = c ^ low
                v = _bit_index(low)
                images[i] = v
                if i + 1 == n_g:
                    out = [-1] * n_g
                    for x in range(n_g):
                        out[order[x]] = images[x]
                    return out
                used |= low
                i += 1
                cand_stack[i] = _candidates(i, used, full, allowed, images,
                                            prev_flat, prev_ptr)
            else:
                i -= 1
                if i < 0:
                    return None
                used &= ~((<u64>1) << images[i])
    finally:
        free(allowed); free(cand_stack); free(images)
        free(prev_flat); free(prev_ptr)


cdef inline int _bit_index(u64 low):
    cdef int b = 0
    while low > 1:
        low >>= 1
        b += 1
    return b


cdef inline u64 _candidates(int i, u64 used, u64 full, u64* allowed,
                            int* images, int* prev_flat, int* prev_ptr):
    cdef u64 c = full & ~used
    cdef int j
    for j in range(prev_ptr[i], prev_ptr[i + 1]):
        c &= allowed[images[prev_flat[j]]]
        if not c:
            return 0
    return c


def clique_factor(masks, int k):
    """Exact partition of all vertices into K_k's, or None (proved)."""
    cdef int n = len(masks)
    if n % k != 0:
        return None
    if n > 63:
        raise ValueError("compiled clique_factor kernel capped at 63 vertices")
    cdef u64* cmasks = <u64*> malloc(max(n, 1) * sizeof(u64))
    if not cmasks:
        raise MemoryError()
    cdef int i
    for i in range(n):
        cmasks[i] = <u64>masks[i]
    failed = set()
    solution = []
    try:
        if _cf_solve(((<u64>1) << n) - 1, cmasks, k, failed, solution):
            return solution
        return None
    finally:
        free(cmasks)


cdef bint _cf_solve(u64 mask, u64* masks, int k, set failed, list solution):
    if mask == 0:
        return True
    if mask in failed:
        return False
    cdef u64 low = mask & (~mask + 1)
    cdef int v = _bit_index(low)
    subs = []
    _cf_grow(0, masks[v] & mask, 0, k, masks, subs)
    cdef u64 s
    for s_obj in subs:
        s = <u64>s_obj
        part = [v]
        _append_bits(s, part)
        part.sort()
        solution.append(tuple(part))
        if _cf_solve(mask & ~(s | low), masks, k, failed, solution):
            return True
        solution.pop()
    failed.add(mask)
    return False


cdef void _cf_grow(u64 cur, u64 cand, int size, int k, u64* masks, list out):
    if size == k - 1:
        out.append(cur)
        return
    cdef u64 c = cand
    cdef u64 low
    cdef int u
    while c:
        low = c & (~c + 1)
        c ^= low
        u = _bit_index(low)
        _cf_grow(cur | low, c & masks[u], size + 1, k, masks, out)


cdef void _append_bits(u64 mask, list out):
    cdef u64 low
    while mask:
        low = mask & (~mask + 1)
        out.append(_bit_index(low))
        mask ^= low


def enum_cliques(masks, int k):
    """All k-cliques, each once, lexicographic."""
    cdef int n = len(masks)
    if n > 63:
        raise ValueError("compiled enum_cliques kernel capped at 63 vertices")
    out = []
    if k == 1:
        return [(v,) for v in range(n)]
    cdef u64* cmasks = <u64*> malloc(max(n, 1) * sizeof(u64))
    if not cmasks:
        raise MemoryError()
    cdef int v
    try:
        for v in range(n):
            cmasks[v] = <u64>masks[v]
        cur = []
        for v in range(n):
            cur.append(v)
            _ec_grow(cur, cmasks[v] & ~(((<u64>1) << (v + 1)) - 1),
                     k, cmasks, out)
            cur.pop()
        return out
    finally:
        free(cmasks)


cdef void _ec_grow(list cur, u64 cand, int k, u64* masks, list out):
    if len(cur) == k:
        out.append(tuple(cur))
        return
    cdef u64 c = cand
    cdef u64 low, mask_hi
    cdef int v
    while c:
        low = c & (~c + 1)
        c ^= low
        v = _bit_index(low)
        cur.append(v)
        if v >= 63:
            mask_hi = 0
        else:
            mask_hi = ~(((<u64>1) << (v + 1)) - 1)
        _ec_grow(cur, cand & masks[v] & mask_hi, k, masks, out)
        cur.pop()
