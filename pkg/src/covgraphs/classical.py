"""Classical (commutative) oracles and embeddings.

Everything here is ground truth for the quantum constructions restricted to
commutative systems, written with boolean/integer arithmetic wherever possible
so the oracles do not share the floating-point failure modes of the path they
check.  Relations are boolean matrices rel[i][j] over (input, output) pairs;
stochastic matrices are column-stochastic with p[j][i] the probability of
output j given input i; graphs are symmetric boolean adjacency matrices
(confusability graphs carry all loops, simple graphs none).
"""

from __future__ import annotations

import numpy as np

from .cpmaps import CpMorphism, apply, from_kraus
from .errors import ShapeMismatch
from .graphs import QuantumGraph, graph_from_blocks
from .relations import QuantumRelation
from .systems import System, classical_system


def check_stochastic(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 2:
        raise ShapeMismatch("stochastic matrix must be 2-dimensional")
    if np.any(p < -1e-12):
        raise ShapeMismatch("stochastic matrix must be nonnegative")
    colsums = p.sum(axis=0)
    if np.any(np.abs(colsums - 1.0) > 1e-12):
        raise ShapeMismatch("columns must sum to one")
    return p


def embed_channel(p, src: System | None = None, tgt: System | None = None) -> CpMorphism:
    """Column-stochastic matrix as a channel between commutative systems."""
    p = check_stochastic(p)
    n, m = p.shape
    src = src if src is not None else classical_system(m)
    tgt = tgt if tgt is not None else classical_system(n)
    kraus = {}
    for i in range(m):
        for j in range(n):
            kraus[(i, j)] = [np.array([[np.sqrt(p[j, i])]])] if p[j, i] > 0 else []
    return from_kraus(kraus, src, tgt)


def extract_channel(f: CpMorphism) -> np.ndarray:
    """Stochastic matrix of a channel between commutative systems."""
    if any(d != 1 for d in f.source.dims) or any(d != 1 for d in f.target.dims):
        raise ShapeMismatch("extract_channel needs commutative systems")
    m, n = f.source.nfactors, f.target.nfactors
    p = np.zeros((n, m))
    for i in range(m):
        basis = [np.zeros((1, 1), dtype=complex) for _ in range(m)]
        basis[i][0, 0] = 1.0
        out = apply(f, basis)
        p[:, i] = [blk[0, 0].real for blk in out]
    return p


def embed_relation(rel, src: System | None = None, tgt: System | None = None) -> QuantumRelation:
    rel = np.asarray(rel, dtype=bool)
    m, n = rel.shape
    src = src if src is not None else classical_system(m)
    tgt = tgt if tgt is not None else classical_system(n)
    blocks = {
        (i, j): np.eye(1, dtype=complex) for i in range(m) for j in range(n) if rel[i, j]
    }
    return QuantumRelation(src, tgt, blocks, validate=False)


def extract_relation(p: QuantumRelation) -> np.ndarray:
    m, n = p.source.nfactors, p.target.nfactors
    rel = np.zeros((m, n), dtype=bool)
    for (i, j), blk in p.blocks.items():
        rel[i, j] = blk[0, 0].real > 0.5
    return rel


def embed_graph(adj, sys: System | None = None) -> QuantumGraph:
    adj = np.asarray(adj, dtype=bool)
    if adj.shape[0] != adj.shape[1] or not np.array_equal(adj, adj.T):
        raise ShapeMismatch("graph adjacency must be square and symmetric")
    sys = sys if sys is not None else classical_system(adj.shape[0])
    blocks = {
        (i, j): np.eye(1, dtype=complex)
        for i in range(adj.shape[0])
        for j in range(adj.shape[1])
        if adj[i, j]
    }
    return graph_from_blocks(sys, blocks)


def extract_graph(g: QuantumGraph) -> np.ndarray:
    return extract_relation(g.relation)


def support_pattern(p) -> np.ndarray:
    """Underlying relation of a stochastic matrix: rel[i, j] iff p[j, i] > 0."""
    p = np.asarray(p, dtype=float)
    return (p.T > 0)


def oracle_confusability(p) -> np.ndarray:
    """adj[i, i'] iff some output j has p[j,i] p[j,i'] > 0; all loops present."""
    rel = support_pattern(check_stochastic(p))
    m = rel.shape[0]
    adj = np.zeros((m, m), dtype=bool)
    for i in range(m):
        for ip in range(m):
            adj[i, ip] = bool(np.any(rel[i] & rel[ip]))
    return adj


def oracle_compose(r, s) -> np.ndarray:
    """Composite S ∘ R of boolean relations (R first): boolean matrix product."""
    r = np.asarray(r, dtype=bool)
    s = np.asarray(s, dtype=bool)
    if r.shape[1] != s.shape[0]:
        raise ShapeMismatch("relation shapes do not compose")
    return (r.astype(int) @ s.astype(int)) > 0


def oracle_converse(r) -> np.ndarray:
    return np.asarray(r, dtype=bool).T


def oracle_stochastic_hom(p, adj_a, adj_b) -> bool:
    """Homomorphism test for confusability graphs through a stochastic matrix:
    whenever outputs of x and z can collide along an edge of the target graph,
    x and z must be adjacent in the source graph."""
    rel = support_pattern(check_stochastic(p))
    adj_a = np.asarray(adj_a, dtype=bool)
    adj_b = np.asarray(adj_b, dtype=bool)
    m = rel.shape[0]
    for x in range(m):
        for z in range(m):
            hit = False
            for y in np.flatnonzero(rel[x]):
                for zt in np.flatnonzero(rel[z]):
                    if adj_b[y, zt]:
                        hit = True
                        break
                if hit:
                    break
            if hit and not adj_a[x, z]:
                return False
    return True


def oracle_reversible(p) -> bool:
    """Brute-force decoder existence: build the support-membership decoder and
    check it decodes exactly; equivalently the input supports are disjoint."""
    p = check_stochastic(p)
    rel = support_pattern(p)
    m, n = rel.shape
    owner = [-1] * n
    for j in range(n):
        inputs = np.flatnonzero(rel[:, j])
        if len(inputs) > 1:
            return False
        if len(inputs) == 1:
            owner[j] = int(inputs[0])
    d = np.zeros((m, n))
    for j in range(n):
        d[owner[j] if owner[j] >= 0 else 0, j] = 1.0
    return bool(np.all((d @ p) == np.eye(m)) or np.allclose(d @ p, np.eye(m), atol=0))


def oracle_source_graph(p_src, n_a: int, n_b: int) -> np.ndarray:
    """Confusability graph of a classical source on the O_A alphabet.

    `p_src` is column-stochastic from |S| inputs to n_a * n_b outputs indexed
    (a, b) -> a * n_b + b.  Distinct a, a' are adjacent iff NO side-information
    value b and distinct source symbols s, s' have p(a,b|s) p(a',b|s') > 0;
    loops are always present.
    """
    p = check_stochastic(p_src)
    ns = p.shape[1]
    if p.shape[0] != n_a * n_b:
        raise ShapeMismatch("source matrix rows must factor as n_a * n_b")
    adj = np.eye(n_a, dtype=bool)
    for a in range(n_a):
        for ap in range(n_a):
            if a == ap:
                continue
            collision = False
            for b in range(n_b):
                for s in range(ns):
                    for sp in range(ns):
                        if s != sp and p[a * n_b + b, s] > 0 and p[ap * n_b + b, sp] > 0:
                            collision = True
            adj[a, ap] = not collision
    return adj
