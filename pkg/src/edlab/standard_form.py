"""Standard form of a block algebra and the commutator bounds.

The standard form of ``sum_k M_{n_k}`` is realized on the blockwise
Hilbert-Schmidt space ``sum_k M_{n_k}`` with inner product
``<xi|eta> = sum_k Tr[xi_k^dagger eta_k]``. The algebra acts by left
multiplication, ``J`` is the blockwise adjoint and the self-dual cone is the
set of blockwise PSD matrices. Consequently ``J x J`` is right
multiplication by ``x^dagger`` and the representing vector of a normal state
is the blockwise square root of its densities.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import operator_core as oc
from .algebra import AlgebraElement, NormalState, VonNeumannAlgebra, state_expectation
from .exceptions import AlgebraMismatchError, DimensionError, NotHermitianError

__all__ = [
    "StandardFormSpace",
    "GnsVector",
    "NormalFunctional",
    "PolarDecomposition",
    "gns_vector",
    "left_action",
    "right_action_via_J",
    "commutator_functional",
    "functional_norm",
    "polar_decompose",
    "c_bound",
    "d_bound",
    "d_bound_trace_oracle",
]


class StandardFormSpace:
    """Blockwise Hilbert-Schmidt space of a block algebra.

    Vectors are tuples of ``n_k x n_k`` matrices. :meth:`flatten` maps them
    to coordinates in an orthonormal basis (row-major per block), which is
    the representation used by dilations.
    """

    def __init__(self, algebra: VonNeumannAlgebra):
        self.algebra = algebra
        self.block_dims = algebra.block_dims
        self.dim = sum(n * n for n in self.block_dims)
        self._offsets = np.cumsum([0] + [n * n for n in self.block_dims])

    def __eq__(self, other):
        return isinstance(other, StandardFormSpace) and other.algebra == self.algebra

    def __hash__(self):
        return hash(self.algebra)

    def _check(self, xi) -> tuple[np.ndarray, ...]:
        xi = tuple(np.asarray(b, dtype=complex) for b in xi)
        if tuple(b.shape for b in xi) != tuple((n, n) for n in self.block_dims):
            raise DimensionError("vector blocks do not match the algebra")
        return xi

    def flatten(self, xi) -> np.ndarray:
        return np.concatenate([b.reshape(-1) for b in self._check(xi)])

    def unflatten(self, v) -> tuple[np.ndarray, ...]:
        v = np.asarray(v, dtype=complex).reshape(-1)
        if v.shape[0] != self.dim:
            raise DimensionError(f"vector has length {v.shape[0]}, expected {self.dim}")
        return tuple(
            v[self._offsets[k]:self._offsets[k + 1]].reshape(n, n)
            for k, n in enumerate(self.block_dims)
        )

    def inner(self, xi, eta) -> complex:
        return complex(np.vdot(self.flatten(xi), self.flatten(eta)))

    def norm(self, xi) -> float:
        return float(np.linalg.norm(self.flatten(xi)))

    def J(self, xi) -> tuple[np.ndarray, ...]:
        """Modular conjugation: blockwise adjoint (anti-linear)."""
        return tuple(b.conj().T for b in self._check(xi))

    def in_cone(self, xi, tol: float = 1e-9) -> bool:
        for b in self._check(xi):
            if oc.fro(b - b.conj().T) > tol * max(1.0, oc.fro(b)):
                return False
            if np.linalg.eigvalsh((b + b.conj().T) / 2)[0] < -tol:
                return False
        return True

    def left_matrix(self, x: AlgebraElement) -> np.ndarray:
        """Matrix of ``xi -> x xi`` in flattened coordinates."""
        if x.algebra != self.algebra:
            raise AlgebraMismatchError("element belongs to another algebra")
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for k, (b, n) in enumerate(zip(x.blocks, self.block_dims)):
            lo, hi = self._offsets[k], self._offsets[k + 1]
            out[lo:hi, lo:hi] = np.kron(b, np.eye(n))
        return out

    def right_matrix(self, x: AlgebraElement) -> np.ndarray:
        """Matrix of ``xi -> xi x`` in flattened coordinates."""
        if x.algebra != self.algebra:
            raise AlgebraMismatchError("element belongs to another algebra")
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for k, (b, n) in enumerate(zip(x.blocks, self.block_dims)):
            lo, hi = self._offsets[k], self._offsets[k + 1]
            out[lo:hi, lo:hi] = np.kron(np.eye(n), b.T)
        return out


@dataclass(frozen=True)
class GnsVector:
    """Cone vector ``xi_rho`` representing a normal state."""

    space: StandardFormSpace
    blocks: tuple

    @property
    def flat(self) -> np.ndarray:
        return self.space.flatten(self.blocks)


def gns_vector(state: NormalState) -> GnsVector:
    space = StandardFormSpace(state.algebra)
    return GnsVector(space, tuple(oc.psd_sqrt(d) for d in state.densities))


def left_action(x: AlgebraElement, xi: Sequence[np.ndarray]) -> tuple[np.ndarray, ...]:
    """``pi(x) xi``: blockwise left multiplication."""
    if len(xi) != len(x.blocks):
        raise DimensionError("vector and element have different block counts")
    return tuple(b @ v for b, v in zip(x.blocks, xi))


def right_action_via_J(x: AlgebraElement, xi: Sequence[np.ndarray]) -> tuple[np.ndarray, ...]:
    """``J pi(x) J xi``, which acts blockwise as ``xi_k -> xi_k x_k^dagger``."""
    if len(xi) != len(x.blocks):
        raise DimensionError("vector and element have different block counts")
    return tuple(v @ b.conj().T for b, v in zip(x.blocks, xi))


class NormalFunctional:
    """Functional ``x -> sum_k Tr[x_k T_k]`` given by block densities ``T_k``."""

    def __init__(self, algebra: VonNeumannAlgebra, densities):
        densities = [oc.as_matrix(t, square=True) for t in densities]
        if tuple(t.shape[0] for t in densities) != algebra.block_dims:
            raise DimensionError("densities do not match the algebra blocks")
        for t in densities:
            t.setflags(write=False)
        self.algebra = algebra
        self.densities = tuple(densities)

    def __call__(self, x: AlgebraElement) -> complex:
        if x.algebra != self.algebra:
            raise AlgebraMismatchError("element belongs to another algebra")
        return complex(sum(np.trace(b @ t) for b, t in zip(x.blocks, self.densities)))

    def adjoint(self) -> "NormalFunctional":
        """``omega*(x) = conj(omega(x^dagger))``; density ``T^dagger``."""
        return NormalFunctional(self.algebra, [t.conj().T for t in self.densities])

    def is_hermitian(self, tol: float = 1e-9) -> bool:
        return all(
            oc.fro(t - t.conj().T) <= tol * max(1.0, oc.fro(t)) for t in self.densities
        )

    def norm(self) -> float:
        return functional_norm(self)


@dataclass(frozen=True)
class PolarDecomposition:
    """``omega(x) = |omega|(x W)`` with ``W`` a partial isometry in the algebra."""

    isometry: AlgebraElement
    absolute_value: NormalFunctional

    def support(self) -> AlgebraElement:
        """Support projection ``W^dagger W`` of ``|omega|``."""
        w = self.isometry
        return w.adjoint() @ w


def commutator_functional(a: AlgebraElement, b: AlgebraElement,
                          state: NormalState) -> NormalFunctional:
    """Functional ``x -> <xi_rho| x J(-i[A,B])J xi_rho>``.

    With the concrete standard form the density of block ``k`` is
    ``sqrt(D_k) C_k sqrt(D_k)`` where ``C = -i[A, B]``.
    """
    _same_algebra(a, b, state)
    for name, obs in (("A", a), ("B", b)):
        if not obs.is_self_adjoint():
            raise NotHermitianError(f"observable {name} is not self-adjoint")
    xi = gns_vector(state).blocks
    dens = []
    for ak, bk, root in zip(a.blocks, b.blocks, xi):
        c = -1j * oc.commutator(ak, bk)
        t = root @ c @ root
        dens.append((t + t.conj().T) / 2)
    return NormalFunctional(state.algebra, dens)


def functional_norm(omega: NormalFunctional) -> float:
    """Norm of a normal functional: sum of blockwise trace norms."""
    return float(sum(oc.trace_norm(t) for t in omega.densities))


def polar_decompose(omega: NormalFunctional) -> PolarDecomposition:
    """Polar decomposition ``T_k = W_k |T_k|`` blockwise.

    Hermitian functionals use the spectral sign, which makes ``W``
    self-adjoint. Other functionals fall back to the SVD polar form with
    ``|T| = (T^dagger T)^{1/2}``; in both cases ``W`` vanishes on the kernel
    of ``|T|``.
    """
    hermitian = omega.is_hermitian()
    ws, abss = [], []
    for t in omega.densities:
        if hermitian:
            sign, mag = oc.operator_abs(t)
        else:
            u, s, vh = np.linalg.svd(t)
            thr = oc.ZERO_TOL * max(1.0, float(s[0]) if s.size else 0.0)
            keep = s > thr
            sign = u[:, keep] @ vh[keep, :]
            v = vh.conj().T
            mag = (v[:, keep] * s[keep]) @ v[:, keep].conj().T
        ws.append(sign)
        abss.append(mag)
    return PolarDecomposition(
        AlgebraElement(omega.algebra, ws), NormalFunctional(omega.algebra, abss)
    )


def c_bound(a: AlgebraElement, b: AlgebraElement, state: NormalState) -> float:
    """``(1/2) |<rho, -i[A, B]>|``."""
    _same_algebra(a, b, state)
    comm = -1j * (a @ b - b @ a)
    return 0.5 * abs(state_expectation(state, comm))


def d_bound(a: AlgebraElement, b: AlgebraElement, state: NormalState) -> float:
    """Half the norm of :func:`commutator_functional`."""
    return 0.5 * functional_norm(commutator_functional(a, b, state))


def d_bound_trace_oracle(a, b, ambient_density) -> float:
    """``(1/2) Tr|sqrt(rho) (-i[A,B]) sqrt(rho)|`` for ambient matrices.

    Valid only for the full matrix algebra; ``a`` and ``b`` may be passed
    as ambient arrays or as elements of a full algebra.
    """
    mats = []
    for obs in (a, b):
        if isinstance(obs, AlgebraElement):
            if not obs.algebra.is_full:
                raise DimensionError("trace formula requires the full matrix algebra")
            obs = obs.embed()
        mats.append(oc.hermitian(obs))
    root = oc.psd_sqrt(ambient_density)
    c = -1j * oc.commutator(*mats)
    return 0.5 * oc.trace_norm(root @ c @ root)


def _same_algebra(a: AlgebraElement, b: AlgebraElement, state: NormalState) -> None:
    if not (a.algebra == b.algebra == state.algebra):
        raise AlgebraMismatchError("observables and state belong to different algebras")
