"""Shared test fixtures: closed-form problems and independent oracles."""
import math

import numpy as np

from omdkit.mirror import MirrorMap
from omdkit.offline import SmoothProblem


# ---------------------------------------------------------------- offline problems

def quad_ball_problem(weights=(1.0, 0.2, 0.5), target=(0.4, -0.3, 0.2)):
    """Anisotropic quadratic over the unit ball; optimum at `target`, value 0.

    G(f) = 1/2 (f-p)^T diag(w) (f-p), smoothness constant max(w), alpha = 1.
    """
    w = np.asarray(weights, dtype=float)
    p = np.asarray(target, dtype=float)
    assert np.linalg.norm(p) < 1.0
    m = MirrorMap.euclidean_ball(len(p), radius=1.0)
    r_sq = 0.5 * float(p @ p)  # divergence from optimum to g0 = 0
    return SmoothProblem(
        gradient=lambda f: w * (f - p),
        holder_const=float(w.max()),
        alpha=1.0,
        mirror_map=m,
        divergence_radius=math.sqrt(r_sq),
        value=lambda f: float(0.5 * (f - p) @ (w * (f - p))),
    ), 0.0


def holder_half_problem(target=(0.3, -0.2, 0.1, 0.0)):
    """G(f) = sum (2/3)|f_i - c_i|^{3/2} over the unit ball; optimum c, value 0.

    Gradient is sign(f-c) sqrt(|f-c|), Holder-1/2 with constant sqrt(2 sqrt(n))
    in the euclidean norm pair.
    """
    c = np.asarray(target, dtype=float)
    n = len(c)
    m = MirrorMap.euclidean_ball(n, radius=1.0)
    H = math.sqrt(2.0 * math.sqrt(n))
    r_sq = 0.5 * float(c @ c)
    return SmoothProblem(
        gradient=lambda f: np.sign(f - c) * np.sqrt(np.abs(f - c)),
        holder_const=H,
        alpha=0.5,
        mirror_map=m,
        divergence_radius=math.sqrt(r_sq),
        value=lambda f: float((2.0 / 3.0) * np.sum(np.abs(f - c) ** 1.5)),
    ), 0.0


def huber_vertex_problem(n=5, knee=0.05, radius=None):
    """Sum of Huber penalties pulling to the first simplex vertex; optimum e_1, value 0.

    Gradients are coordinatewise in [-1, 1], so the Holder-0 constant is 2 in
    the ell_inf dual norm. Entropy map over the simplex. `radius` defaults to
    log n (the divergence bound reading of the step-size scale).
    """
    target = np.zeros(n)
    target[0] = 1.0
    m = MirrorMap.entropy_simplex(n)

    def value(f):
        d = np.abs(f - target)
        small = d <= knee
        return float(np.sum(np.where(small, d**2 / (2 * knee), d - knee / 2)))

    return SmoothProblem(
        gradient=lambda f: np.clip((f - target) / knee, -1.0, 1.0),
        holder_const=2.0,
        alpha=0.0,
        mirror_map=m,
        divergence_radius=radius if radius is not None else math.log(n),
        value=value,
    ), 0.0


# ---------------------------------------------------------------- oracles

def lp_game_value(A):
    """Exact minimax value of the zero-sum matrix game min_f max_x f^T A x."""
    from scipy.optimize import linprog

    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    # variables: (f_1..f_n, v); minimize v subject to A^T f <= v, sum f = 1
    c = np.zeros(n + 1)
    c[-1] = 1.0
    A_ub = np.hstack([A.T, -np.ones((A.shape[1], 1))])
    b_ub = np.zeros(A.shape[1])
    A_eq = np.zeros((1, n + 1))
    A_eq[0, :n] = 1.0
    bounds = [(0, None)] * n + [(None, None)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=bounds, method="highs")
    assert res.success
    return float(res.fun)


def augmenting_path_max_flow(nodes, edges, source, sink):
    """Exact max flow for unit-capacity undirected edges (BFS augmenting paths)."""
    from collections import deque

    cap = {}
    adj = [[] for _ in range(nodes)]
    for u, v in edges:
        if v not in adj[u]:
            adj[u].append(v)
        if u not in adj[v]:
            adj[v].append(u)
        cap[(u, v)] = cap.get((u, v), 0) + 1
        cap[(v, u)] = cap.get((v, u), 0) + 1
    flow = 0
    while True:
        parent = {source: None}
        queue = deque([source])
        while queue and sink not in parent:
            u = queue.popleft()
            for v in adj[u]:
                if v not in parent and cap.get((u, v), 0) > 0:
                    parent[v] = u
                    queue.append(v)
        if sink not in parent:
            return flow
        v = sink
        while parent[v] is not None:
            u = parent[v]
            cap[(u, v)] -= 1
            cap[(v, u)] = cap.get((v, u), 0) + 1
            v = u
        flow += 1


def random_connected_graph(rng, max_edges=50):
    """Random connected multigraph-free graph with distinct source/sink."""
    nodes = int(rng.integers(4, 15))
    edges = set()
    order = rng.permutation(nodes)
    for i in range(1, nodes):
        u = int(order[i])
        v = int(order[int(rng.integers(0, i))])
        edges.add((min(u, v), max(u, v)))
    target = int(rng.integers(nodes - 1, min(max_edges, nodes * (nodes - 1) // 2) + 1))
    attempts = 0
    while len(edges) < target and attempts < 200:
        u, v = rng.integers(0, nodes, size=2)
        u, v = int(u), int(v)
        attempts += 1
        if u != v:
            edges.add((min(u, v), max(u, v)))
    source, sink = 0, nodes - 1
    return nodes, sorted(edges), source, sink


def golden_section_min(fn, lo, hi, tol=1e-12):
    """Golden-section minimizer for a strictly unimodal function on [lo, hi]."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol * max(1.0, abs(a) + abs(b)):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)
