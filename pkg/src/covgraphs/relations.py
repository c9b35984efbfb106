"""Quantum relations: the possibilistic shadow of CP morphisms.

A relation A -> B stores one orthogonal projection per factor pair (i, j),
acting on vec(Hom(K_j, H_i)): the subspace spans the adjoints of the Kraus
maps of any CP representative.  Composition is computed by basis products and
span closure, matching the defining span formula directly rather than by
iterated supports.  A helper exposes the "physical" subspaces in Hom(H_i, K_j)
by adjointing.
"""

from __future__ import annotations

import numpy as np

from . import linalg
from .cpmaps import CpMorphism, dagger as cp_dagger, is_channel
from .errors import (
    CharacterizationMismatch,
    NoChannel,
    ShapeMismatch,
    SystemMismatch,
)
from .linalg import TOL_PROJ, TOL_SPEC
from .systems import System


class QuantumRelation:
    """Immutable family of projections on the vectorized operator spaces."""

    def __init__(self, source: System, target: System, blocks: dict,
                 tol: float = TOL_PROJ, validate: bool = True):
        self.source = source
        self.target = target
        full = {}
        for i in range(source.nfactors):
            for j in range(target.nfactors):
                n = source.dims[i] * target.dims[j]
                blk = blocks.get((i, j))
                if blk is None:
                    blk = np.zeros((n, n), dtype=complex)
                else:
                    blk = linalg.as_complex(blk).copy()
                    if blk.shape != (n, n):
                        raise ShapeMismatch(f"relation block ({i},{j}) has wrong shape")
                blk.setflags(write=False)
                full[(i, j)] = blk
        for key in blocks:
            if key not in full:
                raise ShapeMismatch(f"relation block index {key} out of range")
        self.blocks = full
        self._ops_cache = {}
        if validate:
            for key, blk in full.items():
                defect = linalg.check_projection(blk)
                if defect > tol * 100:
                    raise ShapeMismatch(
                        f"relation block {key} is not a projection (defect {defect:.2e})"
                    )

    def block(self, i: int, j: int) -> np.ndarray:
        return self.blocks[(i, j)]

    def block_ops(self, i: int, j: int, tol: float = TOL_PROJ):
        """Orthonormal operator basis of block (i, j), as maps K_j -> H_i."""
        cached = self._ops_cache.get((i, j, tol))
        if cached is None:
            d, e = self.source.dims[i], self.target.dims[j]
            cached = [
                linalg.unvec(v, d, e)
                for v in linalg.projection_basis(self.blocks[(i, j)], tol)
            ]
            self._ops_cache[(i, j, tol)] = cached
        return cached

    def physical_ops(self, i: int, j: int, tol: float = TOL_PROJ):
        """The subspace L_ij in Hom(H_i, K_j): adjoints of the stored basis."""
        return [a.conj().T for a in self.block_ops(i, j, tol)]

    def rank(self, i: int, j: int) -> int:
        return int(round(float(np.trace(self.blocks[(i, j)]).real)))


def support_of(f: CpMorphism, tol: float = TOL_SPEC) -> QuantumRelation:
    """Underlying relation: blockwise support projection of the Choi blocks."""
    blocks = {
        key: linalg.support_projection(linalg.hermitize(blk), tol)
        for key, blk in f.blocks.items()
    }
    return QuantumRelation(f.source, f.target, blocks, validate=False)


def discrete(sys: System) -> QuantumRelation:
    """Identity relation: diagonal blocks project onto span{vec(I_d)}."""
    blocks = {}
    for i, d in enumerate(sys.dims):
        v = linalg.vec(np.eye(d, dtype=complex)) / np.sqrt(d)
        blocks[(i, i)] = np.outer(v, v.conj())
    return QuantumRelation(sys, sys, blocks, validate=False)


def complete(src: System, tgt: System | None = None) -> QuantumRelation:
    tgt = src if tgt is None else tgt
    blocks = {
        (i, j): np.eye(src.dims[i] * tgt.dims[j], dtype=complex)
        for i in range(src.nfactors)
        for j in range(tgt.nfactors)
    }
    return QuantumRelation(src, tgt, blocks, validate=False)


def zero_relation(src: System, tgt: System | None = None) -> QuantumRelation:
    return QuantumRelation(src, tgt if tgt is not None else src, {}, validate=False)


def compose(q: QuantumRelation, p: QuantumRelation, tol: float = TOL_SPEC) -> QuantumRelation:
    """Composite q ∘ p (p first): spans of operator products over the middle."""
    if p.target != q.source:
        raise SystemMismatch("compose: target of p must equal source of q")
    blocks = {}
    for i, d in enumerate(p.source.dims):
        for k, ek in enumerate(q.target.dims):
            vecs = []
            for j in range(p.target.nfactors):
                a_ops = p.block_ops(i, j)
                b_ops = q.block_ops(j, k)
                for a in a_ops:
                    for b in b_ops:
                        vecs.append(linalg.vec(a @ b))
            # Factors are Hilbert-Schmidt-normalized, so genuine products sit
            # well above roundoff; the absolute floor keeps exact zeros zero.
            blocks[(i, k)] = linalg.orthonormal_span(vecs, dim=d * ek, tol=tol, floor=tol)
    return QuantumRelation(p.source, q.target, blocks, validate=False)


def converse(p: QuantumRelation) -> QuantumRelation:
    """Block (j, i) is the image of block (i, j) under a -> a†."""
    blocks = {}
    for (i, j), blk in p.blocks.items():
        d, e = p.source.dims[i], p.target.dims[j]
        blocks[(j, i)] = linalg.adjoint_image(blk, d, e)
    return QuantumRelation(p.target, p.source, blocks, validate=False)


def leq(p: QuantumRelation, q: QuantumRelation, tol: float = TOL_PROJ) -> bool:
    """p ≤ q iff q̃ p̃ = p̃ blockwise."""
    if p.source != q.source or p.target != q.target:
        raise SystemMismatch("leq: relations must share source and target")
    for key, pb in p.blocks.items():
        qb = q.blocks[key]
        if linalg.frob(qb @ pb - pb) > tol * max(1.0, linalg.frob(pb)):
            return False
    return True


def relations_equal(p: QuantumRelation, q: QuantumRelation, tol: float = TOL_PROJ) -> bool:
    if p.source != q.source or p.target != q.target:
        raise SystemMismatch("relations_equal: type mismatch")
    return relation_defect(p, q) <= tol


def relation_defect(p: QuantumRelation, q: QuantumRelation) -> float:
    return max(linalg.frob(p.blocks[k] - q.blocks[k]) for k in p.blocks)


def marginal(p: QuantumRelation) -> list:
    """Weighted partial trace onto the source side.

    Per source factor s: Σ_t w_t Tr_outer(p̃_st), an operator on H_s; this is
    the positive element whose invertibility characterizes relations of
    channels, and whose value is a projection for partial functions.
    """
    out = []
    for s, d in enumerate(p.source.dims):
        acc = np.zeros((d, d), dtype=complex)
        for t, e in enumerate(p.target.dims):
            acc += p.target.weights[t] * linalg.trace_outer(p.blocks[(s, t)], e, d)
        out.append(linalg.hermitize(acc))
    return out


def relation_as_cp(p: QuantumRelation) -> CpMorphism:
    """Canonical CP morphism of a relation: blocks w_i p̃_ij.

    This weighting is the one under which the discrete relation becomes the
    identity channel, partial functions become non-counital
    star-cohomomorphisms and functions become channels.
    """
    blocks = {
        (i, j): p.source.weights[i] * blk for (i, j), blk in p.blocks.items()
    }
    return CpMorphism(p.source, p.target, blocks, validate=False)


def channel_exists(p: QuantumRelation, tol: float = TOL_SPEC) -> bool:
    """Invertibility of the weighted source marginal on every factor.

    This is the partial-trace criterion for a relation to underlie a channel.
    Invertibility is necessary; the constructive branch below additionally
    verifies exact support, which is where sufficiency can fail for
    unbalanced genuinely-quantum relations (see channel_from_relation).
    """
    for m in marginal(p):
        w = np.linalg.eigvalsh(m)
        if float(w[0]) <= tol * max(1.0, float(w[-1])):
            return False
    return True


def channel_from_relation(p: QuantumRelation, tol: float = TOL_SPEC) -> CpMorphism:
    """Constructive inverse: a channel whose underlying relation is p.

    Conjugates each block by the inverse square root of the marginal t (the
    marginal of the relation read as a CP morphism), which always yields a
    channel; the conjugation preserves the support exactly when t is
    compatible with the blocks (classical relations, spans of balanced
    unitary/isometry families, functions, graph-type relations).  The output's
    support is verified and a failure raises, since a silent support change
    would return a channel for a different relation.
    """
    marg = marginal(p)
    blocks = {}
    for i, d in enumerate(p.source.dims):
        w = np.linalg.eigvalsh(marg[i])
        if float(w[0]) <= tol * max(1.0, float(w[-1])):
            raise NoChannel(f"marginal on source factor {i} is singular")
        s = linalg.inv_sqrt_psd(marg[i], tol)
        wi = p.source.weights[i]
        for j, e in enumerate(p.target.dims):
            conj = linalg.kron(np.eye(e), s)
            blocks[(i, j)] = wi * (conj @ p.blocks[(i, j)] @ conj.conj().T)
    f = CpMorphism(p.source, p.target, blocks, validate=False)
    defect = relation_defect(support_of(f), p)
    if defect > 1e-7:
        raise NoChannel(
            f"marginal is invertible but no exactly-supported channel was found "
            f"(support defect {defect:.2e})"
        )
    return f


def partial_function_flags(p: QuantumRelation, tol: float = TOL_PROJ):
    """Decide partial-function-ness and function-ness three ways each.

    Partial function (coinjectivity p∘p† ≤ Δ) is checked against the isometry
    criterion on a splitting of p̃ and against the cohomomorphism equations of
    the canonical CP morphism; function-ness (cosurjectivity Δ ≤ p†∘p) against
    the unit-marginal isometry condition and the channel property.  The
    characterizations are theorems, so disagreement raises.

    Returns (is_partial_function, is_function, witnesses).
    """
    from .cpmaps import _hom_defects

    witnesses = {}

    # (1) coinjectivity via relation composition.
    pf1 = leq(compose(p, converse(p)), discrete(p.target), tol)

    # (2) isometry condition on the splitting: for each source factor i the
    # row-stacked map Φ_i = [sqrt(e_j) a_ijr]_{(j,r)} must satisfy Φ†Φ = I,
    # i.e. a_ijr† a_ij's = δ_jj' δ_rs I / e_j.
    iso_defect = 0.0
    ops = {
        (i, j): p.block_ops(i, j)
        for i in range(p.source.nfactors)
        for j in range(p.target.nfactors)
    }
    for i in range(p.source.nfactors):
        cols = [
            (j, a) for j in range(p.target.nfactors) for a in ops[(i, j)]
        ]
        for r, (j, a) in enumerate(cols):
            for s, (jp, b) in enumerate(cols):
                g = a.conj().T @ b
                if j == jp and r == s:
                    g = g - np.eye(p.target.dims[j]) / p.target.dims[j]
                iso_defect = max(iso_defect, linalg.frob(g))
    pf2 = iso_defect < tol
    witnesses["partial_isometry_defect"] = iso_defect

    # (3) non-counital cohomomorphism equations for the canonical CP morphism.
    fcp = relation_as_cp(p)
    _, (mult, _, star) = _hom_defects(cp_dagger(fcp))
    pf3 = max(mult, star) < tol
    witnesses["cohom_defects"] = (mult, star)

    if not (pf1 == pf2 == pf3):
        raise CharacterizationMismatch(
            f"partial-function characterizations disagree: {(pf1, pf2, pf3)}, {witnesses}"
        )
    if not pf1:
        return False, False, witnesses

    # Function characterizations (meaningful given partial-function-ness).
    fn1 = leq(discrete(p.source), compose(converse(p), p), tol)
    marg_defect = max(
        linalg.frob(m - np.eye(p.source.dims[i])) for i, m in enumerate(marginal(p))
    )
    fn2 = marg_defect < tol
    witnesses["function_marginal_defect"] = marg_defect
    fn3 = is_channel(fcp, tol)
    if not (fn1 == fn2 == fn3):
        raise CharacterizationMismatch(
            f"function characterizations disagree: {(fn1, fn2, fn3)}, {witnesses}"
        )
    return True, fn1, witnesses
