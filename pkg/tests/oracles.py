"""Independent numerical oracles used by the tests.

These deliberately avoid the code paths they check: the eigensolver is a
hand-rolled cyclic Jacobi iteration (not numpy.linalg), and the reconstruction
minimizer is a plain golden-section search.
"""

from __future__ import annotations

import math

import numpy as np


def jacobi_eigh(matrix: np.ndarray, sweeps: int = 100, tol: float = 1e-14):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues, eigenvectors) sorted by descending eigenvalue,
    eigenvectors in columns.
    """
    A = np.array(matrix, dtype=float, copy=True)
    n = A.shape[0]
    V = np.eye(n)
    scale = np.abs(A).max() or 1.0
    for _ in range(sweeps):
        off = np.max(np.abs(A - np.diag(np.diag(A))))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                if tau >= 0:
                    t = 1.0 / (tau + math.hypot(tau, 1.0))
                else:
                    t = -1.0 / (-tau + math.hypot(tau, 1.0))
                c = 1.0 / math.hypot(t, 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                A = rot.T @ A @ rot
                V = V @ rot
    evals = np.diag(A).copy()
    order = np.argsort(-evals)
    return evals[order], V[:, order]


def golden_section_min(fn, lo: float, hi: float, iterations: int = 200):
    """Minimize a unimodal function on [lo, hi]; returns (argmin, min)."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = float(lo), float(hi)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iterations):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
        if b - a <= 1e-14 * (1.0 + abs(a) + abs(b)):
            break
    x = 0.5 * (a + b)
    return x, fn(x)


def cosine_ref(a, b) -> float:
    """Loop-based cosine similarity (no numpy reductions)."""
    dot = na = nb = 0.0
    for x, y in zip(a, b):
        dot += float(x) * float(y)
        na += float(x) * float(x)
        nb += float(y) * float(y)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / math.sqrt(na) / math.sqrt(nb)


def random_graph_payload(rng: np.random.Generator, max_nodes: int = 200, max_edges: int = 800):
    """A random connected-ish directed graph document for propagation tests."""
    n_nodes = int(rng.integers(5, max_nodes + 1))
    n_edges = int(rng.integers(n_nodes, min(max_edges, 4 * n_nodes) + 1))
    n_rels = int(rng.integers(1, 5))
    kinds = ["device", "stream", "variable"]
    entities = []
    for i in range(n_nodes):
        kind = kinds[int(rng.integers(len(kinds)))]
        raw = {"id": f"n{i}", "kind": kind, "label": f"Node {i}"}
        if kind == "variable":
            raw["column"] = f"n{i}"
        entities.append(raw)
    relations = [
        {
            "name": f"r{j}",
            "d": float(rng.uniform(0.5, 5.0)),
            "o": int(rng.integers(0, 6)),
        }
        for j in range(n_rels)
    ]
    seen = set()
    triples = []
    for _ in range(n_edges):
        h = int(rng.integers(n_nodes))
        t = int(rng.integers(n_nodes))
        r = int(rng.integers(n_rels))
        key = (h, r, t)
        if key in seen:
            continue
        seen.add(key)
        triples.append([f"n{h}", f"r{r}", f"n{t}"])
    return {"entities": entities, "relations": relations, "triples": triples}
