"""CP morphisms and channels between systems.

A CP morphism f: A -> B is stored by its Choi blocks: for each factor pair
(i, j) a Hermitian PSD matrix on vec(Hom(K_j, H_i)), whose support spans the
vectorized *adjoints* of the Kraus maps H_i -> K_j.  The normalization is
pinned so that

  * a Kraus family {M_ijk} gives block (i,j) = Σ_k |vec(M†)><vec(M†)|,
  * the identity channel has the rank-1 blocks |vec(I_d)><vec(I_d)|,
  * a classical column-stochastic matrix p embeds with 1x1 blocks exactly
    p_ji.

Channels preserve the separable standard functional: for every source factor
i, Σ_{j,k} w_j M_ijk† M_ijk = w_i I.
"""

from __future__ import annotations

import numpy as np

from . import linalg
from .errors import (
    NegativeSpectrum,
    ShapeMismatch,
    SystemMismatch,
)
from .linalg import TOL_PROJ, TOL_SPEC
from .systems import System, functional, inner, multiply, phi_basis


def _block_shape(src: System, tgt: System, i: int, j: int):
    n = src.dims[i] * tgt.dims[j]
    return (n, n)


class CpMorphism:
    """Immutable CP morphism given by source, target and Choi blocks."""

    def __init__(self, source: System, target: System, blocks: dict, validate: bool = True):
        self.source = source
        self.target = target
        full = {}
        for i in range(source.nfactors):
            for j in range(target.nfactors):
                blk = blocks.get((i, j))
                if blk is None:
                    blk = np.zeros(_block_shape(source, target, i, j), dtype=complex)
                else:
                    blk = linalg.as_complex(blk).copy()
                    if blk.shape != _block_shape(source, target, i, j):
                        raise ShapeMismatch(
                            f"Choi block ({i},{j}) has shape {blk.shape}, "
                            f"expected {_block_shape(source, target, i, j)}"
                        )
                blk.setflags(write=False)
                full[(i, j)] = blk
        for key in blocks:
            if key not in full:
                raise ShapeMismatch(f"block index {key} out of range")
        self.blocks = full
        if validate:
            scale = max(1.0, self.norm())
            for key, blk in full.items():
                if linalg.frob(blk - blk.conj().T) > 100 * TOL_PROJ * scale:
                    raise ShapeMismatch(f"Choi block {key} is not Hermitian")
                wmin = float(np.min(np.linalg.eigvalsh(linalg.hermitize(blk))))
                if wmin < -100 * TOL_SPEC * scale:
                    raise NegativeSpectrum(f"Choi block {key}: eigenvalue {wmin:.3e}")

    def norm(self) -> float:
        return max((linalg.frob(b) for b in self.blocks.values()), default=0.0)

    def block(self, i: int, j: int) -> np.ndarray:
        return self.blocks[(i, j)]


class KrausFamily(dict):
    """Maps factor pairs (i, j) to lists of e_j x d_i matrices H_i -> K_j."""


def from_kraus(kraus: KrausFamily | dict, src: System, tgt: System) -> CpMorphism:
    blocks = {}
    for (i, j), ops in kraus.items():
        if not (0 <= i < src.nfactors and 0 <= j < tgt.nfactors):
            raise ShapeMismatch(f"Kraus index {(i, j)} out of range")
        d, e = src.dims[i], tgt.dims[j]
        n = d * e
        acc = np.zeros((n, n), dtype=complex)
        for m in ops:
            m = linalg.as_complex(m)
            if m.shape != (e, d):
                raise ShapeMismatch(
                    f"Kraus map for pair {(i, j)} has shape {m.shape}, expected ({e},{d})"
                )
            v = linalg.vec(m.conj().T)
            acc += np.outer(v, v.conj())
        blocks[(i, j)] = acc
    return CpMorphism(src, tgt, blocks, validate=False)


def to_kraus(f: CpMorphism, tol: float = TOL_SPEC) -> KrausFamily:
    """Minimal Kraus family: one map per retained eigenpair of each block."""
    out = KrausFamily()
    for (i, j), blk in f.blocks.items():
        d, e = f.source.dims[i], f.target.dims[j]
        scale = linalg.frob(blk)
        if scale == 0.0:
            out[(i, j)] = []
            continue
        w, v = linalg.canonical_eigh(blk)
        top = float(w[0])
        if w.size and float(w[-1]) < -tol * max(top, scale):
            raise NegativeSpectrum(f"block {(i, j)} has eigenvalue {w[-1]:.3e}")
        ops = []
        for k in range(w.size):
            if w[k] > tol * top:
                ops.append(linalg.unvec(np.sqrt(w[k]) * v[:, k], d, e).conj().T)
        out[(i, j)] = ops
    return out


def apply(f: CpMorphism, x) -> list:
    """Apply the CP morphism to an algebra element of the source."""
    x = f.source.check_element(x)
    out = []
    for j, e in enumerate(f.target.dims):
        acc = np.zeros((e, e), dtype=complex)
        for i, d in enumerate(f.source.dims):
            blk = f.blocks[(i, j)]
            if d == 1 and e == 1:
                acc[0, 0] += blk[0, 0].conjugate() * x[i][0, 0]
                continue
            b4 = blk.reshape(e, d, e, d)
            # block = Σ |vec M†><vec M†| gives Σ M x M† = einsum below.
            acc += np.einsum("iajb,ab->ij", b4.conj(), x[i])
        out.append(acc)
    return out


def identity_channel(sys: System) -> CpMorphism:
    kraus = {(i, i): [np.eye(d, dtype=complex)] for i, d in enumerate(sys.dims)}
    return from_kraus(kraus, sys, sys)


def zero_cp(src: System, tgt: System) -> CpMorphism:
    return CpMorphism(src, tgt, {}, validate=False)


def add(f: CpMorphism, g: CpMorphism, cf: float = 1.0, cg: float = 1.0) -> CpMorphism:
    if f.source != g.source or f.target != g.target:
        raise SystemMismatch("can only add CP morphisms with equal types")
    blocks = {k: cf * f.blocks[k] + cg * g.blocks[k] for k in f.blocks}
    return CpMorphism(f.source, f.target, blocks, validate=False)


def compose(g: CpMorphism, f: CpMorphism, tol: float = TOL_SPEC) -> CpMorphism:
    """Composite g ∘ f (f first)."""
    if f.target != g.source:
        raise SystemMismatch("compose: target of f must equal source of g")
    kf = to_kraus(f, tol)
    kg = to_kraus(g, tol)
    kraus = {}
    for i in range(f.source.nfactors):
        for k in range(g.target.nfactors):
            ops = []
            for j in range(f.target.nfactors):
                for m in kf[(i, j)]:
                    for n in kg[(j, k)]:
                        ops.append(n @ m)
            kraus[(i, k)] = ops
    return from_kraus(kraus, f.source, g.target)


def dagger(f: CpMorphism) -> CpMorphism:
    """Hermitian adjoint with respect to the functional inner products.

    Block (j, i) of f† is the weighted adjoint image of block (i, j):
    (w_j / w_i) times the vec-space image under a -> a†, so that
    functional adjointness <y, f(x)>_B = <f†(y), x>_A holds.
    """
    blocks = {}
    for (i, j), blk in f.blocks.items():
        d, e = f.source.dims[i], f.target.dims[j]
        w = f.target.weights[j] / f.source.weights[i]
        blocks[(j, i)] = w * linalg.adjoint_image(blk, d, e)
    return CpMorphism(f.target, f.source, blocks, validate=False)


def choi_marginal(f: CpMorphism) -> list:
    """Per source factor i: Σ_j w_j Tr_outer(block_ij) = Σ_{j,k} w_j M† M."""
    out = []
    for i, d in enumerate(f.source.dims):
        acc = np.zeros((d, d), dtype=complex)
        for j, e in enumerate(f.target.dims):
            acc += f.target.weights[j] * linalg.trace_outer(f.blocks[(i, j)], e, d)
        out.append(acc)
    return out


def is_channel(f: CpMorphism, tol: float = TOL_PROJ) -> bool:
    """Counit preservation: Σ_{j,k} w_j M†M = w_i I per source factor.

    Both the Choi-marginal form and functional preservation on a spanning set
    are evaluated; the verdict is their conjunction.
    """
    scale = max(1.0, f.norm())
    marg = choi_marginal(f)
    defect = max(
        linalg.frob(m - f.source.weights[i] * np.eye(f.source.dims[i]))
        for i, m in enumerate(marg)
    )
    if defect >= tol * scale:
        return False
    for (_, _, _, u) in phi_basis(f.source):
        lhs = functional(f.target, apply(f, u))
        rhs = functional(f.source, u)
        if abs(lhs - rhs) >= tol * scale * 10:
            return False
    return True


def is_star_homomorphism(f: CpMorphism, tol: float = TOL_PROJ) -> bool:
    """Multiplicative, unital and star-preserving on a spanning set."""
    return _hom_defects(f)[0] < tol


def is_star_cohomomorphism(f: CpMorphism, tol: float = TOL_PROJ) -> bool:
    """Comultiplicative, counital and star-preserving; equivalently the dagger
    is a star-homomorphism.  Implies is_channel."""
    return _hom_defects(dagger(f))[0] < tol


def _hom_defects(f: CpMorphism):
    """(max over all three equations, (multiplicativity, unit, star))."""
    basis = phi_basis(f.source)
    images = [apply(f, u) for (_, _, _, u) in basis]
    mult = star = 0.0
    for (ka, (_, _, _, ua)) in enumerate(basis):
        fa = images[ka]
        star = max(
            star,
            _elt_diff([m.conj().T for m in fa], apply(f, [m.conj().T for m in ua])),
        )
        for (kb, (_, _, _, ub)) in enumerate(basis):
            lhs = apply(f, multiply(f.source, ua, ub))
            rhs = multiply(f.target, fa, images[kb])
            mult = max(mult, _elt_diff(lhs, rhs))
    unit = _elt_diff(apply(f, f.source.identity()), f.target.identity())
    return max(mult, unit, star), (mult, unit, star)


def _elt_diff(x, y) -> float:
    return max(linalg.frob(a - b) for a, b in zip(x, y))


def cp_norm_diff(f: CpMorphism, g: CpMorphism) -> float:
    if f.source != g.source or f.target != g.target:
        raise SystemMismatch("cannot compare CP morphisms of different types")
    return max(linalg.frob(f.blocks[k] - g.blocks[k]) for k in f.blocks)


def channelize(f: CpMorphism, tol: float = TOL_SPEC) -> CpMorphism:
    """Rescale a CP morphism into a channel by conjugating each source factor
    with the inverse square root of its Choi marginal (must be invertible)."""
    marg = choi_marginal(f)
    blocks = {}
    for i, d in enumerate(f.source.dims):
        m = marg[i] / f.source.weights[i]
        s = linalg.inv_sqrt_psd(linalg.hermitize(m), tol)
        for j, e in enumerate(f.target.dims):
            conj = linalg.kron(np.eye(e), s)
            blocks[(i, j)] = conj @ f.blocks[(i, j)] @ conj.conj().T
    return CpMorphism(f.source, f.target, blocks, validate=False)


def adjointness_defect(f: CpMorphism, rng, n_probes: int = 8) -> float:
    """Gate for the dagger formula: <y, f(x)>_B = <f†(y), x>_A on random pairs."""
    from .systems import random_element

    fd = dagger(f)
    worst = 0.0
    for _ in range(n_probes):
        x = random_element(f.source, rng)
        y = random_element(f.target, rng)
        lhs = inner(f.target, y, apply(f, x))
        rhs = inner(f.source, apply(fd, y), x)
        worst = max(worst, abs(lhs - rhs))
    return worst
