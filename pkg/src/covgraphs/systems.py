"""Finite quantum sets and G-C*-algebras with their separable standard functional.

A system is a finite direct sum of matrix factors ``⊕_i B(H_i)`` carrying a
group action and per-factor weights.  The separable standard functional is the
unnormalized weighted trace

    φ(x) = Σ_i w_i Tr(x_i),   w_i = d_i,

which is the unique choice making the induced Frobenius structure separable
(m ∘ m† = id) and standard; with it the commutative reduction turns channels
into exactly column-stochastic matrices and the identity map into a channel.
Algebra elements are plain lists of per-factor complex matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import ActionShapeMismatch, ShapeMismatch
from .groups import AlgebraAction, FiniteGroup, trivial_action, trivial_group
from .linalg import TOL_PROJ


@dataclass(frozen=True)
class QuantumSet:
    factor_dims: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.factor_dims)
        if not dims or any(d < 1 for d in dims):
            raise ShapeMismatch("a quantum set needs at least one factor of dim >= 1")
        object.__setattr__(self, "factor_dims", dims)


@dataclass(frozen=True)
class System:
    qset: QuantumSet
    action: AlgebraAction
    weights: tuple

    def __post_init__(self):
        dims = self.qset.factor_dims
        if self.action.dims != dims:
            raise ActionShapeMismatch("action factor dims do not match the quantum set")
        w = tuple(float(x) for x in self.weights)
        if len(w) != len(dims) or any(x <= 0 for x in w):
            raise ShapeMismatch("need one positive weight per factor")
        for g in self.action.group.elements:
            for i in range(len(dims)):
                if abs(w[self.action.perms[g][i]] - w[i]) > 1e-12:
                    raise ActionShapeMismatch("weights must be constant on action orbits")
        object.__setattr__(self, "weights", w)

    @property
    def dims(self) -> tuple:
        return self.qset.factor_dims

    @property
    def nfactors(self) -> int:
        return len(self.dims)

    @property
    def group(self) -> FiniteGroup:
        return self.action.group

    def identity(self) -> list:
        return [np.eye(d, dtype=complex) for d in self.dims]

    def zero(self) -> list:
        return [np.zeros((d, d), dtype=complex) for d in self.dims]

    def check_element(self, x) -> list:
        if len(x) != self.nfactors:
            raise ShapeMismatch("element has wrong number of factor blocks")
        out = []
        for d, blk in zip(self.dims, x):
            b = linalg.as_complex(blk)
            if b.shape != (d, d):
                raise ShapeMismatch(f"factor block has shape {b.shape}, expected ({d},{d})")
            out.append(b)
        return out

    def __eq__(self, other):
        return (
            isinstance(other, System)
            and self.dims == other.dims
            and self.weights == other.weights
            and self.action == other.action
        )


def separable_standard(qset: QuantumSet, action: AlgebraAction | None = None) -> System:
    """System with the canonical weights w_i = d_i."""
    if action is None:
        action = trivial_action(trivial_group(), qset.factor_dims)
    return System(qset, action, tuple(float(d) for d in qset.factor_dims))


def system(dims, action: AlgebraAction | None = None) -> System:
    return separable_standard(QuantumSet(tuple(dims)), action)


def classical_system(n: int, action: AlgebraAction | None = None) -> System:
    return system((1,) * n, action)


def functional(sys: System, x) -> complex:
    """φ(x) = Σ_i w_i Tr(x_i); G-invariant by the orbit condition on weights."""
    x = sys.check_element(x)
    return complex(sum(w * np.trace(b) for w, b in zip(sys.weights, x)))


def trace_end(sys: System, f) -> complex:
    """Canonical positive faithful trace on the endomorphism algebra."""
    return functional(sys, f)


def system_dimension(sys: System) -> float:
    """Quantum dimension, defined (and tested) as trace_end of the identity."""
    return trace_end(sys, sys.identity()).real


def inner(sys: System, x, y) -> complex:
    """φ-inner product <x, y> = φ(x† y)."""
    x = sys.check_element(x)
    y = sys.check_element(y)
    return complex(
        sum(w * np.trace(a.conj().T @ b) for w, a, b in zip(sys.weights, x, y))
    )


def phi_basis(sys: System):
    """φ-orthonormal basis of the algebra: matrix units E_pq / sqrt(w_i).

    Returns a list of (factor, p, q, element) in a fixed deterministic order;
    the coordinate index of (i, p, q) is offset(i) + p*d_i + q.  Cached on the
    system (immutable).
    """
    cached = getattr(sys, "_phi_basis_cache", None)
    if cached is not None:
        return cached
    out = []
    for i, d in enumerate(sys.dims):
        s = 1.0 / np.sqrt(sys.weights[i])
        for p in range(d):
            for q in range(d):
                e = sys.zero()
                e[i] = e[i].copy()
                e[i][p, q] = s
                out.append((i, p, q, e))
    object.__setattr__(sys, "_phi_basis_cache", out)
    return out


def basis_offset(sys: System, i: int) -> int:
    return int(sum(d * d for d in sys.dims[:i]))


def total_matrix_dim(sys: System) -> int:
    return int(sum(d * d for d in sys.dims))


def coords(sys: System, x) -> np.ndarray:
    """Coordinates of an algebra element in the φ-orthonormal basis."""
    x = sys.check_element(x)
    parts = [np.sqrt(w) * b.reshape(-1) for w, b in zip(sys.weights, x)]
    return np.concatenate(parts)


def element_from_coords(sys: System, v: np.ndarray) -> list:
    v = np.asarray(v, dtype=complex).reshape(-1)
    if v.size != total_matrix_dim(sys):
        raise ShapeMismatch("coordinate vector has wrong length")
    out = []
    pos = 0
    for d, w in zip(sys.dims, sys.weights):
        out.append(v[pos:pos + d * d].reshape(d, d) / np.sqrt(w))
        pos += d * d
    return out


def multiply(sys: System, x, y) -> list:
    x = sys.check_element(x)
    y = sys.check_element(y)
    return [a @ b for a, b in zip(x, y)]


def adjoint_element(sys: System, x) -> list:
    return [b.conj().T for b in sys.check_element(x)]


def random_element(sys: System, rng, hermitian: bool = False) -> list:
    out = []
    for d in sys.dims:
        m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        if hermitian:
            m = linalg.hermitize(m)
        out.append(m)
    return out


def ssfa_defects(sys: System, rng=None, n_probes: int = 6) -> dict:
    """Numerical validity checks for the separable standard Frobenius data.

    Returns the worst Frobenius defect per axiom (associativity, unitality,
    Frobenius, separability, standardness, invariance) on a probe set.
    """
    if rng is None:
        rng = np.random.default_rng(7)
    basis = phi_basis(sys)
    one = sys.identity()

    def rand():
        return random_element(sys, rng)

    assoc = unital = 0.0
    for _ in range(n_probes):
        x, y, z = rand(), rand(), rand()
        lhs = multiply(sys, multiply(sys, x, y), z)
        rhs = multiply(sys, x, multiply(sys, y, z))
        assoc = max(assoc, _diff(lhs, rhs))
        unital = max(unital, _diff(multiply(sys, one, x), x), _diff(multiply(sys, x, one), x))

    # Comultiplication in φ-coordinates: m†(x) = Σ_{kl} <u_k u_l, x> u_k ⊗ u_l.
    # Separability (m ∘ m† = id) probed on the basis.
    sep = 0.0
    for (_, _, _, u) in basis:
        acc = sys.zero()
        for (_, _, _, a) in basis:
            for (_, _, _, b) in basis:
                c = inner(sys, multiply(sys, a, b), u)
                if c != 0:
                    ab = multiply(sys, a, b)
                    acc = [t + c * s for t, s in zip(acc, ab)]
        sep = max(sep, _diff(acc, u))

    # Frobenius: (id ⊗ m)(m† ⊗ id) = m† m = (m ⊗ id)(id ⊗ m†), probed via
    # matrix elements <u_a ⊗ u_b, . (u_c ⊗ u_d)> on random index quadruples:
    #   mid   = <u_a u_b, u_c u_d>
    #   left  = Σ_l <u_a u_l, u_c> <u_b, u_l u_d>
    #   right = Σ_k <u_a, u_c u_k> <u_k u_b, u_d>
    frobdef = 0.0
    nb = len(basis)
    for _ in range(n_probes * 4):
        a, b, c, d = (int(rng.integers(0, nb)) for _ in range(4))
        ua, ub, uc, ud = (basis[k][3] for k in (a, b, c, d))
        mid = inner(sys, multiply(sys, ua, ub), multiply(sys, uc, ud))
        left = sum(
            inner(sys, multiply(sys, ua, ul[3]), uc)
            * inner(sys, ub, multiply(sys, ul[3], ud))
            for ul in basis
        )
        right = sum(
            inner(sys, ua, multiply(sys, uc, uk[3]))
            * inner(sys, multiply(sys, uk[3], ub), ud)
            for uk in basis
        )
        frobdef = max(frobdef, abs(mid - left), abs(mid - right))

    # Standardness: equality of left and right traces of the induced
    # self-duality for every linear map, equivalent to (C C†)ᵀ = C† C with
    # C[k,l] = conj(φ(u_k u_l)).
    cmat = np.array(
        [
            [complex(functional(sys, multiply(sys, uk[3], ul[3]))).conjugate() for ul in basis]
            for uk in basis
        ]
    )
    std = linalg.frob((cmat @ cmat.conj().T).T - cmat.conj().T @ cmat)

    # φ-invariance under the action, on the basis.
    from .groups import act

    invdef = 0.0
    for g in sys.group.elements:
        for (_, _, _, u) in basis:
            invdef = max(invdef, abs(functional(sys, act(sys.action, g, u)) - functional(sys, u)))

    return {
        "associativity": assoc,
        "unitality": unital,
        "separability": sep,
        "frobenius": frobdef,
        "standardness": std,
        "invariance": invdef,
    }


def check_ssfa(sys: System, tol: float = TOL_PROJ):
    defects = ssfa_defects(sys)
    bad = {k: v for k, v in defects.items() if v > tol * 10}
    if bad:
        raise ShapeMismatch(f"SSFA checks failed: {bad}")
    return defects


def _adj(x):
    return [b.conj().T for b in x]


def _diff(x, y) -> float:
    return max(linalg.frob(a - b) for a, b in zip(x, y))
