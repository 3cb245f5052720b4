"""Pure-Python metric kernels: the fallback when the compiled extension
is unavailable.

Mirrors _kernels.pyx statement for statement. Both backends walk the same
CSR arrays in the same order, so every floating-point operation rounds
identically and results are bit-equal between them.
"""

from __future__ import annotations

from math import sqrt

BACKEND = "pure-python"


def betweenness_accumulate(n, fwd_indptr, fwd_indices, rev_indptr, rev_indices,
                           sources, scores):
    """Shortest-path betweenness contributions of the given source nodes.

    Directed, unweighted, unnormalized; accumulated into `scores` in place.
    """
    fptr = fwd_indptr.tolist()
    fidx = fwd_indices.tolist()
    rptr = rev_indptr.tolist()
    ridx = rev_indices.tolist()
    acc = scores.tolist()

    dist = [0] * n
    sigma = [0.0] * n
    delta = [0.0] * n
    order = [0] * n

    for s in sources.tolist():
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

    scores[:] = acc


def closeness_all(n, indptr, indices, out):
    """Component-corrected directed closeness for every node.

    For r nodes reachable from v at total distance T:
    (r / (n - 1)) * (r / T); zero when nothing is reachable.
    """
    ptr = indptr.tolist()
    idx = indices.tolist()
    result = out.tolist()

    dist = [0] * n
    order = [0] * n

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
            for e in range(ptr[v], ptr[v + 1]):
                w = idx[e]
                if dist[w] < 0:
                    dist[w] = dv + 1
                    total += dv + 1
                    order[tail] = w
                    tail += 1
        reached = tail - 1
        if reached == 0 or n <= 1:
            result[s] = 0.0
        else:
            result[s] = (reached / (n - 1.0)) * (reached / total)

    out[:] = result


def eigenvector_iterate(n, indptr, indices, out, start_value, tol, max_iter):
    """Regularized power iteration on the undirected adjacency view.

    Iterates x <- (I + A) x with L2 normalization each step; the identity
    shift makes the dominant eigenvector of bipartite components reachable.
    Writes max-normalized scores into `out`; returns (iterations, converged).
    """
    if n == 0:
        return 0, True
    ptr = indptr.tolist()
    idx = indices.tolist()

    x = [start_value] * n
    norm = 0.0
    for i in range(n):
        norm += x[i] * x[i]
    norm = sqrt(norm)
    for i in range(n):
        x[i] = x[i] / norm

    y = [0.0] * n
    iterations = 0
    converged = False
    while iterations < max_iter:
        iterations += 1
        for v in range(n):
            acc = x[v]
            for e in range(ptr[v], ptr[v + 1]):
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
    out[:] = x
    return iterations, converged


def layout_iterate(px, py, deg, esrc, edst, iterations, k_r, k_g, damping, cap):
    """Force-directed iteration: linear edge attraction, degree-weighted
    pair repulsion, distance-proportional gravity, damped capped steps.

    Positions are updated in place. Returns (iterations_run, last max
    displacement); stops early once the layout is numerically frozen.
    """
    n = len(px)
    m = len(esrc)
    if n == 0:
        return 0, 0.0
    x = px.tolist()
    y = py.tolist()
    degree = deg.tolist()
    src = esrc.tolist()
    dst = edst.tolist()

    dx = [0.0] * n
    dy = [0.0] * n
    iterations_run = 0
    max_disp = 0.0

    for _ in range(iterations):
        iterations_run += 1
        for i in range(n):
            dx[i] = 0.0
            dy[i] = 0.0
        for i in range(n):
            xi = x[i]
            yi = y[i]
            wi = k_r * (degree[i] + 1.0)
            for j in range(i + 1, n):
                ddx = xi - x[j]
                ddy = yi - y[j]
                d2 = ddx * ddx + ddy * ddy
                if d2 < 1e-12:
                    d2 = 1e-12
                d = sqrt(d2)
                f = wi * (degree[j] + 1.0) / d
                fx = ddx / d * f
                fy = ddy / d * f
                dx[i] += fx
                dy[i] += fy
                dx[j] -= fx
                dy[j] -= fy
        for e in range(m):
            u = src[e]
            v = dst[e]
            ddx = x[v] - x[u]
            ddy = y[v] - y[u]
            dx[u] += ddx
            dy[u] += ddy
            dx[v] -= ddx
            dy[v] -= ddy
        for i in range(n):
            g = k_g * (degree[i] + 1.0)
            dx[i] -= x[i] * g
            dy[i] -= y[i] * g
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
            x[i] += mx
            y[i] += my
            if step > max_disp:
                max_disp = step
        if max_disp < 1e-12:
            break

    px[:] = x
    py[:] = y
    return iterations_run, max_disp
