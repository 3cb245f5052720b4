# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled metric kernels.

Statement-for-statement twin of _kernels_py.py: identical traversal and
accumulation order over the same CSR arrays, so results are bit-equal to
the pure-Python backend. The heavy loops run without the GIL, which lets
the betweenness driver fan sources out across real threads.
"""

from libc.math cimport sqrt
from libc.stdlib cimport free, malloc

BACKEND = "compiled"


cdef void _brandes_sources(
    Py_ssize_t n,
    const long long* fptr, const long long* fidx,
    const long long* rptr, const long long* ridx,
    const long long* sources, Py_ssize_t n_sources,
    double* acc,
    long long* dist, double* sigma, double* delta, long long* order,
) noexcept nogil:
    cdef Py_ssize_t si, i, e
    cdef long long s, v, w, dv, dw, head, tail
    cdef double sv, coeff
    for si in range(n_sources):
        s = sources[si]
        for i in range(n):
            dist[i] = -1
            sigma[i] = 0.0
            delta[i] = 0.0
        dist[s] = 0
        sigma[s] = 1.0
        order[0] = s
        head = 0
        tail = 1
        while head < tail:
            v = order[head]
            head += 1
            dv = dist[v]
            sv = sigma[v]
            for e in range(fptr[v], fptr[v + 1]):
                w = fidx[e]
                if dist[w] < 0:
                    dist[w] = dv + 1
                    order[tail] = w
                    tail += 1
                if dist[w] == dv + 1:
                    sigma[w] += sv
        for i in range(tail - 1, -1, -1):
            w = order[i]
            dw = dist[w]
            coeff = (1.0 + delta[w]) / sigma[w]
            for e in range(rptr[w], rptr[w + 1]):
                v = ridx[e]
                if dist[v] == dw - 1:
                    delta[v] += sigma[v] * coeff
            if w != s:
                acc[w] += delta[w]


def betweenness_accumulate(Py_ssize_t n,
                           long long[::1] fwd_indptr, long long[::1] fwd_indices,
                           long long[::1] rev_indptr, long long[::1] rev_indices,
                           long long[::1] sources, double[::1] scores):
    """Shortest-path betweenness contributions of the given source nodes.

    Directed, unweighted, unnormalized; accumulated into `scores` in place.
    """
    cdef Py_ssize_t n_sources = sources.shape[0]
    if n == 0 or n_sources == 0:
        return
    cdef long long* dist = <long long*> malloc(n * sizeof(long long))
    cdef double* sigma = <double*> malloc(n * sizeof(double))
    cdef double* delta = <double*> malloc(n * sizeof(double))
    cdef long long* order = <long long*> malloc(n * sizeof(long long))
    if dist == NULL or sigma == NULL or delta == NULL or order == NULL:
        free(dist); free(sigma); free(delta); free(order)
        raise MemoryError()
    cdef const long long* fidx = NULL
    cdef const long long* ridx = NULL
    if fwd_indices.shape[0] > 0:
        fidx = &fwd_indices[0]
    if rev_indices.shape[0] > 0:
        ridx = &rev_indices[0]
    try:
        with nogil:
            _brandes_sources(
                n, &fwd_indptr[0], fidx, &rev_indptr[0], ridx,
                &sources[0], n_sources, &scores[0],
                dist, sigma, delta, order,
            )
    finally:
        free(dist); free(sigma); free(delta); free(order)


def closeness_all(Py_ssize_t n, long long[::1] indptr, long long[::1] indices,
                  double[::1] out):
    """Component-corrected directed closeness for every node.

    For r nodes reachable from v at total distance T:
    (r / (n - 1)) * (r / T); zero when nothing is reachable.
    """
    if n == 0:
        return
    cdef long long* dist = <long long*> malloc(n * sizeof(long long))
    cdef long long* order = <long long*> malloc(n * sizeof(long long))
    if dist == NULL or order == NULL:
        free(dist); free(order)
        raise MemoryError()
    cdef const long long* idx = NULL
    if indices.shape[0] > 0:
        idx = &indices[0]
    cdef Py_ssize_t s, i
    cdef long long v, w, dv, head, tail, total, reached, e
    try:
        with nogil:
            for s in range(n):
                for i in range(n):
                    dist[i] = -1
                dist[s] = 0
                order[0] = s
                head = 0
                tail = 1
                total = 0
                while head < tail:
                    v = order[head]
                    head += 1
                    dv = dist[v]
                    for e in range(indptr[v], indptr[v + 1]):
                        w = idx[e]
                        if dist[w] < 0:
                            dist[w] = dv + 1
                            total += dv + 1
                            order[tail] = w
                            tail += 1
                reached = tail - 1
                if reached == 0 or n <= 1:
                    out[s] = 0.0
                else:
                    out[s] = (reached / (n - 1.0)) * (reached / <double>total)
    finally:
        free(dist); free(order)


def eigenvector_iterate(Py_ssize_t n, long long[::1] indptr, long long[::1] indices,
                        double[::1] out, double start_value, double tol,
                        long long max_iter):
    """Regularized power iteration on the undirected adjacency view.

    Iterates x <- (I + A) x with L2 normalization each step; the identity
    shift makes the dominant eigenvector of bipartite components reachable.
    Writes max-normalized scores into `out`; returns (iterations, converged).
    """
    if n == 0:
        return 0, True
    cdef double* x = <double*> malloc(n * sizeof(double))
    cdef double* y = <double*> malloc(n * sizeof(double))
    if x == NULL or y == NULL:
        free(x); free(y)
        raise MemoryError()
    cdef const long long* idx = NULL
    if indices.shape[0] > 0:
        idx = &indices[0]
    cdef Py_ssize_t i, v
    cdef long long e, iterations = 0
    cdef double norm, acc, change, diff, peak
    cdef bint converged = False
    try:
        with nogil:
            for i in range(n):
                x[i] = start_value
            norm = 0.0
            for i in range(n):
                norm += x[i] * x[i]
            norm = sqrt(norm)
            for i in range(n):
                x[i] = x[i] / norm
            while iterations < max_iter:
                iterations += 1
                for v in range(n):
                    acc = x[v]
                    for e in range(indptr[v], indptr[v + 1]):
                        acc += x[idx[e]]
                    y[v] = acc
                norm = 0.0
                for i in range(n):
                    norm += y[i] * y[i]
                norm = sqrt(norm)
                change = 0.0
                for i in range(n):
                    y[i] = y[i] / norm
                    diff = y[i] - x[i]
                    if diff < 0.0:
                        diff = -diff
                    if diff > change:
                        change = diff
                    x[i] = y[i]
                if change < tol:
                    converged = True
                    break
            peak = 0.0
            for i in range(n):
                if x[i] > peak:
                    peak = x[i]
            if peak > 0.0:
                for i in range(n):
                    x[i] = x[i] / peak
            for i in range(n):
                out[i] = x[i]
    finally:
        free(x); free(y)
    return iterations, converged


def layout_iterate(double[::1] px, double[::1] py, long long[::1] deg,
                   long long[::1] esrc, long long[::1] edst,
                   long long iterations, double k_r, double k_g,
                   double damping, double cap):
    """Force-directed iteration: linear edge attraction, degree-weighted
    pair repulsion, distance-proportional gravity, damped capped steps.

    Positions are updated in place. Returns (iterations_run, last max
    displacement); stops early once the layout is numerically frozen.
    """
    cdef Py_ssize_t n = px.shape[0]
    cdef Py_ssize_t m = esrc.shape[0]
    if n == 0:
        return 0, 0.0
    cdef double* dx = <double*> malloc(n * sizeof(double))
    cdef double* dy = <double*> malloc(n * sizeof(double))
    if dx == NULL or dy == NULL:
        free(dx); free(dy)
        raise MemoryError()
    cdef Py_ssize_t i, j, e
    cdef long long it, iterations_run = 0
    cdef long long u, v
    cdef double xi, yi, wi, ddx, ddy, d2, d, f, fx, fy, g
    cdef double mx, my, step, scale, max_disp = 0.0
    try:
        with nogil:
            for it in range(iterations):
                iterations_run += 1
                for i in range(n):
                    dx[i] = 0.0
                    dy[i] = 0.0
                for i in range(n):
                    xi = px[i]
                    yi = py[i]
                    wi = k_r * (deg[i] + 1.0)
                    for j in range(i + 1, n):
                        ddx = xi - px[j]
                        ddy = yi - py[j]
                        d2 = ddx * ddx + ddy * ddy
                        if d2 < 1e-12:
                            d2 = 1e-12
                        d = sqrt(d2)
                        f = wi * (deg[j] + 1.0) / d
                        fx = ddx / d * f
                        fy = ddy / d * f
                        dx[i] += fx
                        dy[i] += fy
                        dx[j] -= fx
                        dy[j] -= fy
                for e in range(m):
                    u = esrc[e]
                    v = edst[e]
                    ddx = px[v] - px[u]
                    ddy = py[v] - py[u]
                    dx[u] += ddx
                    dy[u] += ddy
                    dx[v] -= ddx
                    dy[v] -= ddy
                for i in range(n):
                    g = k_g * (deg[i] + 1.0)
                    dx[i] -= px[i] * g
                    dy[i] -= py[i] * g
                max_disp = 0.0
                for i in range(n):
                    mx = dx[i] * damping
                    my = dy[i] * damping
                    step = sqrt(mx * mx + my * my)
                    if step > cap:
                        scale = cap / step
                        mx *= scale
                        my *= scale
                        step = cap
                    px[i] += mx
                    py[i] += my
                    if step > max_disp:
                        max_disp = step
                if max_disp < 1e-12:
                    break
    finally:
        free(dx); free(dy)
    return iterations_run, max_disp
