"""Covariant zero-error source-channel coding.

A source is a reversible channel C: S -> O_A ⊗ O_B splitting a message system
between Alice (O_A) and Bob's side information (O_B).  Its confusability graph
on O_A is the complement of the support of the positive element obtained by
conjugating the complete simple graph of S with the doubled dilation of C and
partial-tracing the O_B and environment legs.  An encoding E: O_A -> A is
valid for a communication channel N: A -> B precisely when it is a graph
homomorphism from the source graph to the confusability graph of N; the
equivalent operational test is reversibility of ((N∘E) ⊗ id_{O_B}) ∘ C, and
both are computed on every call.

Leg-ordering convention: product systems order factor pairs (a, b) with the
left factor major, and product legs as left ⊗ right; all doubled-dilation
contractions pair a conjugated leg with its primal partner through
numpy.einsum in `_source_span_vectors`, which is the one site owning the
pairing.
"""

from __future__ import annotations

import numpy as np

from . import linalg
from .cpmaps import (
    CpMorphism,
    compose,
    cp_norm_diff,
    from_kraus,
    identity_channel,
    is_channel,
    to_kraus,
)
from .errors import (
    GroupMismatch,
    NotValid,
    RoundTripFailure,
    SourceInvalid,
    SystemMismatch,
    TheoremViolation,
)
from .graphs import (
    QuantumGraph,
    classify,
    confusability_of,
    discrete_graph,
    graphs_equal,
    is_homomorphism,
    is_reversible,
    reverse_channel,
)
from .groups import AlgebraAction
from .linalg import TOL_PROJ, TOL_SPEC
from .relations import QuantumRelation, relation_defect
from .systems import QuantumSet, System, system, total_matrix_dim


class TensorSystem:
    """Product of two systems: factor pairs, multiplied weights, diagonal action."""

    def __init__(self, left: System, right: System):
        if left.group != right.group:
            raise GroupMismatch("tensor factors must carry the same group")
        self.left = left
        self.right = right
        group = left.group
        na, nb = left.nfactors, right.nfactors
        dims = tuple(
            left.dims[a] * right.dims[b] for a in range(na) for b in range(nb)
        )
        weights = tuple(
            left.weights[a] * right.weights[b] for a in range(na) for b in range(nb)
        )
        perms = []
        units = []
        for g in group.elements:
            p = []
            us = []
            for a in range(na):
                for b in range(nb):
                    p.append(left.action.perms[g][a] * nb + right.action.perms[g][b])
                    us.append(linalg.kron(left.action.unitaries[g][a],
                                          right.action.unitaries[g][b]))
            perms.append(tuple(p))
            units.append(tuple(us))
        action = AlgebraAction(group, dims, tuple(perms), tuple(units))
        self.product = System(QuantumSet(dims), action, weights)

    def pair_index(self, a: int, b: int) -> int:
        return a * self.right.nfactors + b


def tensor_system(a: System, b: System) -> TensorSystem:
    return TensorSystem(a, b)


def tensor_cp(f: CpMorphism, g: CpMorphism,
              source_ts: TensorSystem | None = None,
              target_ts: TensorSystem | None = None) -> CpMorphism:
    """Tensor product of CP morphisms: Kronecker products of Kraus maps."""
    src = source_ts if source_ts is not None else tensor_system(f.source, g.source)
    tgt = target_ts if target_ts is not None else tensor_system(f.target, g.target)
    kf = to_kraus(f)
    kg = to_kraus(g)
    kraus = {}
    for (ia, ja) in kf:
        for (ib, jb) in kg:
            ops = [linalg.kron(m, n) for m in kf[(ia, ja)] for n in kg[(ib, jb)]]
            kraus[(src.pair_index(ia, ib), tgt.pair_index(ja, jb))] = ops
    return from_kraus(kraus, src.product, tgt.product)


class Source:
    """Covariant source: a reversible channel S -> O_A ⊗ O_B."""

    def __init__(self, s_system: System, oa_system: System, ob_system: System,
                 channel: CpMorphism, tol: float = TOL_PROJ):
        self.s_system = s_system
        self.oa_system = oa_system
        self.ob_system = ob_system
        self.tensor = tensor_system(oa_system, ob_system)
        if channel.source != s_system or channel.target != self.tensor.product:
            raise SourceInvalid("source channel must map S to the O_A ⊗ O_B product")
        if not is_channel(channel, tol):
            raise SourceInvalid("source map is not a channel")
        if not graphs_equal(confusability_of(channel), discrete_graph(s_system), tol):
            raise SourceInvalid("source channel is not reversible")
        self.channel = channel


def _simple_complete_ops(sys: System, u: int, up: int, tol: float = TOL_PROJ):
    """Operator basis of the (u, u') block of the complete simple graph 1 - Δ̃."""
    d, e = sys.dims[u], sys.dims[up]
    blk = np.eye(d * e, dtype=complex)
    if u == up:
        v = linalg.vec(np.eye(d, dtype=complex)) / np.sqrt(d)
        blk = blk - np.outer(v, v.conj())
    return [linalg.unvec(v, d, e) for v in linalg.projection_basis(blk, tol)]


def _source_span_vectors(src: Source, tol: float = TOL_SPEC):
    """Vectors spanning the partial-traced doubled-dilation element per O_A pair.

    For every O_B factor b, source pair (u, u'), Kraus pair (k, k') and basis
    operator c of the complete simple graph of S, contributes
    sqrt(w_b) vec( Tr_b( M_{u,(a,b),k} c M_{u',(a',b),k'}† ) ) to the O_A pair
    (a, a').
    """
    s_sys = src.s_system
    oa, ob = src.oa_system, src.ob_system
    ts = src.tensor
    kraus = to_kraus(src.channel, tol)
    vecs = {
        (a, ap): []
        for a in range(oa.nfactors)
        for ap in range(oa.nfactors)
    }
    for u in range(s_sys.nfactors):
        for up in range(s_sys.nfactors):
            c_ops = _simple_complete_ops(s_sys, u, up)
            if not c_ops:
                continue
            for b in range(ob.nfactors):
                wb = ob.weights[b]
                for a in range(oa.nfactors):
                    da = oa.dims[a]
                    db = ob.dims[b]
                    ms = kraus[(u, ts.pair_index(a, b))]
                    if not ms:
                        continue
                    for ap in range(oa.nfactors):
                        dap = oa.dims[ap]
                        mps = kraus[(up, ts.pair_index(ap, b))]
                        if not mps:
                            continue
                        for c in c_ops:
                            for m in ms:
                                mc = m @ c
                                for mp in mps:
                                    y = mc @ mp.conj().T
                                    y4 = y.reshape(da, db, dap, db)
                                    g = np.sqrt(wb) * np.einsum("abcb->ac", y4)
                                    vecs[(a, ap)].append(linalg.vec(g))
    return vecs


def source_confusability_graph(src: Source, tol: float = TOL_PROJ) -> QuantumGraph:
    """Confusability graph of the source on O_A: the complement of the support
    of the partial-traced doubled-dilation element."""
    oa = src.oa_system
    vecs = _source_span_vectors(src)
    # The natural magnitude unit of the traced doubled element is the squared
    # Kraus scale of the source channel; treat anything far below it as the
    # roundoff image of an exact zero.
    unit = max(
        float(np.trace(blk).real) for blk in src.channel.blocks.values()
    )
    span_tol = max(tol * 1e-2, TOL_SPEC)
    floor = span_tol * max(unit, 1e-300)
    blocks = {}
    for (a, ap), vs in vecs.items():
        n = oa.dims[a] * oa.dims[ap]
        span = linalg.orthonormal_span(vs, dim=n, tol=span_tol, floor=floor)
        blocks[(a, ap)] = np.eye(n, dtype=complex) - span
    rel = QuantumRelation(oa, oa, blocks, validate=False)
    graph = QuantumGraph(oa, rel, tol=tol, validate=True)
    flags = classify(graph, tol)
    if not flags["is_confusability"]:
        raise SourceInvalid("source graph failed the confusability gate")
    return graph


def _composite(src: Source, n_chan: CpMorphism, e_chan: CpMorphism) -> CpMorphism:
    """((N ∘ E) ⊗ id_{O_B}) ∘ C, typed S -> B ⊗ O_B."""
    ne = compose(n_chan, e_chan)
    lifted = tensor_cp(ne, identity_channel(src.ob_system),
                       source_ts=src.tensor,
                       target_ts=tensor_system(n_chan.target, src.ob_system))
    return compose(lifted, src.channel)


def encoding_is_valid(e_chan: CpMorphism, src: Source, n_chan: CpMorphism,
                      tol: float = TOL_PROJ) -> bool:
    """Both sides of the coding theorem, asserted to agree.

    (a) e_chan is a graph homomorphism from the source graph to the
        confusability graph of n_chan;
    (b) the composite ((N∘E) ⊗ id) ∘ C is reversible.
    """
    if e_chan.source != src.oa_system:
        raise SystemMismatch("encoder must start on O_A")
    if e_chan.target != n_chan.source:
        raise SystemMismatch("encoder must feed the communication channel")
    hom = is_homomorphism(e_chan, source_confusability_graph(src, tol),
                          confusability_of(n_chan), tol)
    rev = is_reversible(_composite(src, n_chan, e_chan), tol)
    if hom != rev:
        raise TheoremViolation(
            f"homomorphism test ({hom}) and composite reversibility ({rev}) disagree"
        )
    return hom


def decoder_for(e_chan: CpMorphism, src: Source, n_chan: CpMorphism,
                tol: float = TOL_PROJ) -> CpMorphism:
    """Decoding channel D: B ⊗ O_B -> S completing a valid encoding."""
    if not encoding_is_valid(e_chan, src, n_chan, tol):
        raise NotValid("encoding is not valid for this source and channel")
    return reverse_channel(_composite(src, n_chan, e_chan), tol)


def verify_scheme(src: Source, n_chan: CpMorphism, e_chan: CpMorphism,
                  d_chan: CpMorphism, tol: float = TOL_PROJ) -> bool:
    """Full pipeline D ∘ ((N∘E) ⊗ id) ∘ C must be the identity channel on S."""
    comp = _composite(src, n_chan, e_chan)
    if d_chan.source != comp.target or d_chan.target != src.s_system:
        raise SystemMismatch("decoder must map B ⊗ O_B to S")
    pipeline = compose(d_chan, comp)
    ident = identity_channel(src.s_system)
    return cp_norm_diff(pipeline, ident) <= tol * max(1.0, ident.norm())


def source_from_graph(g: QuantumGraph, tol: float = TOL_PROJ) -> Source:
    """A source whose confusability graph is g.

    S is two classical points; O_B is the full matrix algebra on the
    O_A-algebra viewed as a Hilbert space; the two dilation components embed
    the identity and the complement projection of g.  Writing P for the
    complement projection, block (a, ǎ) of P acting on vec(Hom(A_ǎ, A_a)),
    the Kraus vectors of the source channel are, per O_A factor a and
    environment index m in A_a,

        M_0[a, m][n; (a, p, q)]  =  c0 δ_{n p} δ_{q m}
        M_1[a, m][n; (ǎ, p, q)]  =  c1 P_{(a, ǎ)}[(p, n), (q, m)]
        M_1[a, m][n; ζ]          =  c1 δ_{n m}

    with (ǎ, p, q) indexing the O_B leg and ζ one extra invariant O_B
    direction; the ζ term keeps the second component nonzero (P may vanish,
    e.g. for the complete graph) without touching the traced element, since
    the first component has no ζ support.  The simplicity of P makes the two
    components orthogonal (so the source is reversible) and the O_B
    contraction of the cross terms reproduces exactly the operators of P,
    which is the round-trip gate.
    """
    flags = classify(g, tol)
    if not flags["is_confusability"]:
        raise SourceInvalid("source_from_graph needs a confusability graph")
    oa = g.system
    group = oa.group
    from .groups import trivial_action

    s_sys = system((1, 1), trivial_action(group, (1, 1)))
    nz = total_matrix_dim(oa) + 1
    ob = system((nz,), _hs_conjugation_action(oa, extra=1))
    ts = tensor_system(oa, ob)

    # Complement projection blocks, rebuilt rank-exactly from eigenvectors so
    # that a numerically-full graph block yields an exactly-zero complement.
    pperp = {}
    for key, blk in g.relation.blocks.items():
        comp_basis = linalg.projection_basis(np.eye(blk.shape[0], dtype=complex) - blk)
        if comp_basis:
            w = np.column_stack(comp_basis)
            pperp[key] = w @ w.conj().T
        else:
            pperp[key] = np.zeros_like(blk)

    def zoff(af: int) -> int:
        return int(sum(d * d for d in oa.dims[:af]))

    kraus = {(u, ts.pair_index(a, 0)): [] for u in range(2) for a in range(oa.nfactors)}
    raw = {0: [], 1: []}
    for a, da in enumerate(oa.dims):
        t0 = np.zeros((da, nz, da), dtype=complex)
        for p in range(da):
            for q in range(da):
                t0[p, zoff(a) + p * da + q, q] = 1.0
        t1 = np.zeros((da, nz, da), dtype=complex)
        for av, dav in enumerate(oa.dims):
            blk = pperp[(a, av)].reshape(dav, da, dav, da)
            for n in range(da):
                for m in range(da):
                    for p in range(dav):
                        for q in range(dav):
                            t1[n, zoff(av) + p * dav + q, m] = blk[p, n, q, m]
        for n in range(da):
            t1[n, nz - 1, n] = 1.0
        raw[0].append((a, t0))
        raw[1].append((a, t1))

    # Normalize each component into an isometry-normalized dilation so that
    # the two-point source map is a channel: Σ_a w_(a,0) Σ_m ||M||² = 1.
    for u in (0, 1):
        total = sum(
            oa.weights[a] * float(nz) * float(np.linalg.norm(t) ** 2)
            for a, t in raw[u]
        )
        if total <= 0:
            raise SourceInvalid("degenerate dilation component")
        c = 1.0 / np.sqrt(total)
        for a, t in raw[u]:
            da = oa.dims[a]
            ops = [c * t[:, :, m].reshape(da * nz, 1) for m in range(da)]
            kraus[(u, ts.pair_index(a, 0))] = ops

    chan = from_kraus(kraus, s_sys, ts.product)
    src = Source(s_sys, oa, ob, chan, tol=tol)
    got = source_confusability_graph(src, tol)
    defect = relation_defect(got.relation, g.relation)
    if defect > 1e-7:
        raise RoundTripFailure(f"source graph round trip defect {defect:.2e}")
    return src


def _hs_conjugation_action(oa: System, extra: int = 0) -> AlgebraAction:
    """Conjugation action on the O_A algebra as a Hilbert space, in the plain
    Hilbert-Schmidt basis of matrix units (one block per factor), optionally
    padded by invariant directions."""
    nz = total_matrix_dim(oa) + extra
    group = oa.group
    perms = tuple((0,) for _ in range(group.order))
    units = []

    def zoff(af: int) -> int:
        return int(sum(d * d for d in oa.dims[:af]))

    for gel in group.elements:
        u = np.zeros((nz, nz), dtype=complex)
        for a, da in enumerate(oa.dims):
            ua = oa.action.unitaries[gel][a]
            tgt = oa.action.perms[gel][a]
            # E_pq -> ua E_pq ua† placed at factor tgt.
            for p in range(da):
                for q in range(da):
                    img = np.outer(ua[:, p], ua[:, q].conj())
                    u[zoff(tgt):zoff(tgt) + da * da, zoff(a) + p * da + q] = img.reshape(-1)
        for k in range(total_matrix_dim(oa), nz):
            u[k, k] = 1.0
        units.append((u,))
    return AlgebraAction(group, (nz,), perms, tuple(units))


def kron_flat(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return linalg.kron(x, y)


def tensor_element(ts: TensorSystem, x, y) -> list:
    """Elementary tensor x ⊗ y as an element of the product system."""
    x = ts.left.check_element(x)
    y = ts.right.check_element(y)
    return [
        linalg.kron(x[a], y[b])
        for a in range(ts.left.nfactors)
        for b in range(ts.right.nfactors)
    ]
