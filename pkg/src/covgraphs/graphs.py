"""Quantum G-graphs: confusability graphs, realization, homomorphisms, reversal.

A quantum graph is a symmetric relation on one system.  Confusability graphs
contain the discrete graph; simple graphs are orthogonal to it; complements
swap the two classes.  The two workhorse theorems realized here are:

  * every confusability graph is the confusability graph of a channel into a
    single matrix-factor environment (realize_channel), and
  * a channel is reversible precisely when its confusability graph is
    discrete, with an explicit reverse channel (reverse_channel).
"""

from __future__ import annotations

import numpy as np

from . import linalg
from .cpmaps import CpMorphism, apply, from_kraus, is_channel
from .errors import (
    NotAChannel,
    NotConfusability,
    NotReversible,
    PsdViolation,
    ShapeMismatch,
    SystemMismatch,
)
from .groups import AlgebraAction
from .linalg import TOL_PROJ, TOL_SPEC
from .relations import (
    QuantumRelation,
    converse,
    compose as rel_compose,
    discrete,
    leq,
    marginal,
    relation_defect,
    relations_equal,
    support_of,
)
from .systems import System, basis_offset, coords, phi_basis, system, total_matrix_dim


class QuantumGraph:
    """Symmetric quantum relation on a single system."""

    def __init__(self, sys: System, relation: QuantumRelation, tol: float = TOL_PROJ,
                 validate: bool = True):
        if relation.source != sys or relation.target != sys:
            raise SystemMismatch("graph relation must live on the given system")
        if validate:
            defect = relation_defect(relation, converse(relation))
            if defect > tol * 100:
                raise ShapeMismatch(f"graph relation is not symmetric (defect {defect:.2e})")
        self.system = sys
        self.relation = relation

    def block(self, i: int, j: int) -> np.ndarray:
        return self.relation.blocks[(i, j)]


def graph_from_blocks(sys: System, blocks: dict, tol: float = TOL_PROJ) -> QuantumGraph:
    return QuantumGraph(sys, QuantumRelation(sys, sys, blocks, tol=tol), tol=tol)


def discrete_graph(sys: System) -> QuantumGraph:
    return QuantumGraph(sys, discrete(sys), validate=False)


def complete_graph(sys: System) -> QuantumGraph:
    from .relations import complete

    return QuantumGraph(sys, complete(sys), validate=False)


def classify(g: QuantumGraph, tol: float = TOL_PROJ) -> dict:
    """Confusability iff Δ ≤ Γ; simple iff Δ̃ Γ̃ = 0 blockwise."""
    delta = discrete(g.system)
    is_conf = leq(delta, g.relation, tol)
    simple_defect = max(
        linalg.frob(delta.blocks[key] @ g.relation.blocks[key]) for key in delta.blocks
    )
    return {"is_confusability": is_conf, "is_simple": simple_defect < tol}


def complement(g: QuantumGraph) -> QuantumGraph:
    blocks = {
        key: np.eye(blk.shape[0]) - blk for key, blk in g.relation.blocks.items()
    }
    return QuantumGraph(g.system, QuantumRelation(g.system, g.system, blocks, validate=False),
                        validate=False)


def graphs_equal(a: QuantumGraph, b: QuantumGraph, tol: float = TOL_PROJ) -> bool:
    return relations_equal(a.relation, b.relation, tol)


def confusability_of(f: CpMorphism, tol: float = TOL_SPEC) -> QuantumGraph:
    """Underlying relation of f† ∘ f, computed as ℜ(f)† ∘ ℜ(f)."""
    rf = support_of(f, tol)
    rel = rel_compose(converse(rf), rf, tol)
    # Symmetrize against numerical drift; the result is symmetric by theorem.
    blocks = {}
    for (i, j), blk in rel.blocks.items():
        d, e = f.source.dims[i], f.source.dims[j]
        other = linalg.adjoint_image(rel.blocks[(j, i)], e, d)
        blocks[(i, j)] = linalg.support_projection(linalg.hermitize((blk + other) / 2), tol)
    return QuantumGraph(f.source, QuantumRelation(f.source, f.source, blocks, validate=False),
                        validate=False)


def _graph_as_cp(g: QuantumGraph, tau: float) -> CpMorphism:
    """CP morphism with Choi blocks w_i (Δ̃ + τ(Γ̃ − Δ̃)); self-adjoint for the
    functional inner product, with the discrete part equal to the identity
    channel's Choi."""
    delta = discrete(g.system)
    blocks = {}
    for (i, j), blk in g.relation.blocks.items():
        d = delta.blocks[(i, j)]
        blocks[(i, j)] = g.system.weights[i] * (d + tau * (blk - d))
    return CpMorphism(g.system, g.system, blocks, validate=False)


def _superop_matrix(f: CpMorphism) -> np.ndarray:
    """Matrix of the map x -> f(x) in the φ-orthonormal basis of the source."""
    basis = phi_basis(f.source)
    n = total_matrix_dim(f.source)
    out = np.zeros((n, n), dtype=complex)
    for k, (_, _, _, u) in enumerate(basis):
        out[:, k] = coords(f.target, apply(f, u))
    return out


def realize_channel(g: QuantumGraph, tau: float | None = None, tol: float = TOL_PROJ):
    """Channel into a matrix-factor environment whose confusability graph is g.

    Blends the graph projection with the discrete part, f = Δ + τ(Γ − Δ),
    checks that the blend is positive definite as an operator on the algebra,
    and emits the channel x -> (1/w_E) f̂^{1/2} L̂_{w x} f̂^{1/2} whose Kraus
    maps are columns of the operator square root.  The environment is the
    algebra itself as a Hilbert space, with the action by conjugation; for the
    trivial group this is a plain Hilbert space.

    Returns (channel, environment_system).
    """
    flags = classify(g, tol)
    if not flags["is_confusability"]:
        raise NotConfusability("realize_channel needs a confusability graph")

    a_sys = g.system
    n = total_matrix_dim(a_sys)

    def blend_matrix(t: float) -> np.ndarray:
        return _superop_matrix(_graph_as_cp(g, t))

    if tau is None:
        tau = 0.5
        for _ in range(40):
            fmat = linalg.hermitize(blend_matrix(tau))
            if float(np.linalg.eigvalsh(fmat)[0]) > 1e-3:
                break
            tau /= 2
        else:
            raise PsdViolation("no feasible blend parameter found")
    else:
        if not (0.0 < tau <= 1.0):
            raise PsdViolation("blend parameter must lie in (0, 1]")
        fmat = linalg.hermitize(blend_matrix(tau))
        if float(np.linalg.eigvalsh(fmat)[0]) <= 0.0:
            raise PsdViolation(f"blend parameter {tau} is infeasible")

    fhalf = linalg.psd_sqrt(fmat, tol=TOL_SPEC)

    # Environment: the source algebra as a Hilbert space, one matrix factor.
    env_action = _conjugation_action(a_sys)
    env = system((n,), env_action)
    w_env = float(n)

    kraus = {}
    for i, d in enumerate(a_sys.dims):
        ops = []
        off = basis_offset(a_sys, i)
        for a in range(d):
            m = np.zeros((n, d), dtype=complex)
            for xi in range(d):
                m[:, xi] = fhalf[:, off + xi * d + a]
            ops.append(m / np.sqrt(w_env))
        kraus[(i, 0)] = ops
    f = from_kraus(kraus, a_sys, env)
    return f, env


def _conjugation_action(a_sys: System) -> AlgebraAction:
    """Action of the group on the algebra-as-Hilbert-space by conjugation."""
    from .groups import act

    n = total_matrix_dim(a_sys)
    group = a_sys.group
    perms = tuple((0,) for _ in range(group.order))
    units = []
    basis = phi_basis(a_sys)
    for gel in group.elements:
        u = np.zeros((n, n), dtype=complex)
        for k, (_, _, _, el) in enumerate(basis):
            u[:, k] = coords(a_sys, act(a_sys.action, gel, el))
        units.append((u,))
    return AlgebraAction(group, (n,), perms, tuple(units))


def is_homomorphism(f: CpMorphism, g_a: QuantumGraph, g_b: QuantumGraph,
                    tol: float = TOL_PROJ) -> bool:
    """Channel f is a homomorphism of confusability graphs iff
    ℜ(f)† ∘ Γ_B ∘ ℜ(f) ≤ Γ_A."""
    if f.source != g_a.system or f.target != g_b.system:
        raise SystemMismatch("homomorphism check: systems do not match")
    rf = support_of(f)
    pullback = rel_compose(converse(rf), rel_compose(g_b.relation, rf))
    return leq(pullback, g_a.relation, tol)


def is_simple_homomorphism(f: CpMorphism, g_a: QuantumGraph, g_b: QuantumGraph,
                           tol: float = TOL_PROJ) -> bool:
    """Simple-graph homomorphism: ℜ(f) ∘ Γ_A ∘ ℜ(f)† ≤ Γ_B."""
    if f.source != g_a.system or f.target != g_b.system:
        raise SystemMismatch("homomorphism check: systems do not match")
    rf = support_of(f)
    push = rel_compose(rf, rel_compose(g_a.relation, converse(rf)))
    return leq(push, g_b.relation, tol)


def is_reversible(f: CpMorphism, tol: float = TOL_PROJ) -> bool:
    """A channel is reversible iff its confusability graph is discrete."""
    if not is_channel(f, tol):
        raise NotAChannel("reversibility is defined for channels")
    gamma = confusability_of(f)
    return relation_defect(gamma.relation, discrete(f.source)) <= tol


def reverse_channel(f: CpMorphism, tol: float = TOL_PROJ) -> CpMorphism:
    """Left inverse of a reversible channel.

    Writes q = ℜ(f†), whose weighted marginal α_j (a projection, by the
    partial-function property of q) marks the decodable subspace of each
    output factor.  The reverse Choi blocks are

        g̃_(j,i) = w_j q̃_(j,i)  +  (w_j / dim(A)) I_{H_i*} ⊗ (I - α_j),

    the first term decoding the reachable part, the second routing the
    unreachable part uniformly; g is a channel and g ∘ f = id.
    """
    if not is_channel(f, tol):
        raise NotAChannel("reverse_channel needs a channel")
    if not is_reversible(f, tol):
        raise NotReversible("confusability graph is not discrete")
    q = converse(support_of(f))
    alphas = marginal(q)
    d_a = sum(w * d for w, d in zip(f.source.weights, f.source.dims))
    blocks = {}
    for j, e in enumerate(f.target.dims):
        alpha = alphas[j]
        if linalg.check_projection(alpha) > 1e-6:
            raise NotReversible("marginal of the converse relation is not a projection")
        w_j = f.target.weights[j]
        for i, d in enumerate(f.source.dims):
            blocks[(j, i)] = w_j * q.blocks[(j, i)] + (w_j / d_a) * linalg.kron(
                np.eye(d), np.eye(e) - alpha
            )
    return CpMorphism(f.target, f.source, blocks, validate=False)
