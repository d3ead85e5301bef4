"""Finite-dimensional von Neumann algebras as block algebras.

An algebra is ``U (sum_k M_{n_k} (x) 1_{m_k}) U^dagger`` acting on an ambient
space of dimension ``sum_k n_k m_k``. Elements and normal states are stored
blockwise, so they do not depend on the ambient representation; the ambient
picture is produced on demand with :meth:`VonNeumannAlgebra.embed` and
:meth:`VonNeumannAlgebra.extend_state`.
"""

from __future__ import annotations

from typing import Iterator, Sequence

import numpy as np

from . import operator_core as oc
from .exceptions import (
    AlgebraMismatchError,
    DimensionError,
    MembershipError,
    NotPositiveError,
)

__all__ = [
    "VonNeumannAlgebra",
    "AlgebraElement",
    "NormalState",
    "state_expectation",
]

STATE_TOL = 1e-9


def _frozen(m) -> np.ndarray:
    arr = np.array(m, dtype=complex)
    arr.setflags(write=False)
    return arr


class VonNeumannAlgebra:
    """Block algebra ``sum_k M_{n_k} (x) 1_{m_k}`` with an ambient basis change.

    Parameters
    ----------
    blocks : sequence of (int, int)
        ``(block_dim, multiplicity)`` pairs.
    basis_change : array_like, optional
        Unitary taking the canonical block basis to the ambient basis.
        Defaults to the identity.
    """

    def __init__(self, blocks: Sequence[tuple[int, int]], basis_change=None):
        blocks = tuple((int(n), int(m)) for n, m in blocks)
        if not blocks or any(n < 1 or m < 1 for n, m in blocks):
            raise DimensionError(f"invalid block structure {blocks!r}")
        self.blocks = blocks
        self.ambient_dim = sum(n * m for n, m in blocks)
        if basis_change is None:
            self.basis_change = _frozen(np.eye(self.ambient_dim))
            self._identity_basis = True
        else:
            u = oc.as_matrix(basis_change, square=True, name="basis_change")
            if u.shape[0] != self.ambient_dim:
                raise DimensionError(
                    f"basis_change has dimension {u.shape[0]}, "
                    f"expected {self.ambient_dim}"
                )
            if oc.fro(u.conj().T @ u - np.eye(self.ambient_dim)) > 1e-10 * self.ambient_dim:
                raise DimensionError("basis_change is not unitary")
            self.basis_change = _frozen(u)
            self._identity_basis = bool(np.array_equal(u, np.eye(self.ambient_dim)))
        offsets = np.cumsum([0] + [n * m for n, m in blocks])
        self._offsets = tuple(int(o) for o in offsets)

    @classmethod
    def full(cls, n: int) -> "VonNeumannAlgebra":
        """The full matrix algebra ``M_n`` on ``C^n``."""
        return cls([(n, 1)])

    def __repr__(self):
        extra = "" if self._identity_basis else ", rotated"
        return f"VonNeumannAlgebra({list(self.blocks)}{extra})"

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, VonNeumannAlgebra):
            return NotImplemented
        return self.blocks == other.blocks and np.array_equal(
            self.basis_change, other.basis_change
        )

    def __hash__(self):
        return hash(self.blocks)

    @property
    def block_dims(self) -> tuple[int, ...]:
        return tuple(n for n, _ in self.blocks)

    @property
    def is_full(self) -> bool:
        """True for ``M_n`` with multiplicity one (all of ``B(H)``)."""
        return len(self.blocks) == 1 and self.blocks[0][1] == 1

    @property
    def dimension(self) -> int:
        """Linear dimension of the algebra."""
        return sum(n * n for n in self.block_dims)

    # -- elements -------------------------------------------------------

    def element(self, blocks) -> "AlgebraElement":
        return AlgebraElement(self, blocks)

    def identity(self) -> "AlgebraElement":
        return AlgebraElement(self, [np.eye(n) for n in self.block_dims])

    def zero(self) -> "AlgebraElement":
        return AlgebraElement(self, [np.zeros((n, n)) for n in self.block_dims])

    def matrix_units(self) -> Iterator[tuple[int, int, int, "AlgebraElement"]]:
        """Yield ``(k, p, q, e^{(k)}_{pq})`` over a basis of the algebra."""
        for k, n in enumerate(self.block_dims):
            for p in range(n):
                for q in range(n):
                    yield k, p, q, self.unit(k, p, q)

    def unit(self, k: int, p: int, q: int) -> "AlgebraElement":
        blocks = [np.zeros((n, n), dtype=complex) for n in self.block_dims]
        blocks[k][p, q] = 1.0
        return AlgebraElement(self, blocks)

    # -- ambient picture ------------------------------------------------

    def _to_ambient(self, canonical: np.ndarray) -> np.ndarray:
        if self._identity_basis:
            return canonical
        u = self.basis_change
        return u @ canonical @ u.conj().T

    def _to_canonical(self, ambient: np.ndarray) -> np.ndarray:
        if self._identity_basis:
            return ambient
        u = self.basis_change
        return u.conj().T @ ambient @ u

    def _check_ambient(self, x) -> np.ndarray:
        x = oc.as_matrix(x, square=True, name="ambient operator")
        if x.shape[0] != self.ambient_dim:
            raise DimensionError(
                f"ambient operator has dimension {x.shape[0]}, expected {self.ambient_dim}"
            )
        return x

    def _diagonal_blocks(self, ambient: np.ndarray) -> Iterator[np.ndarray]:
        y = self._to_canonical(ambient)
        for k in range(len(self.blocks)):
            lo, hi = self._offsets[k], self._offsets[k + 1]
            yield y[lo:hi, lo:hi]

    def _block_diag(self, mats: Sequence[np.ndarray]) -> np.ndarray:
        out = np.zeros((self.ambient_dim, self.ambient_dim), dtype=complex)
        for k, mat in enumerate(mats):
            lo, hi = self._offsets[k], self._offsets[k + 1]
            out[lo:hi, lo:hi] = mat
        return out

    def embed(self, x: "AlgebraElement") -> np.ndarray:
        """Ambient matrix ``U (sum_k x_k (x) 1_{m_k}) U^dagger``."""
        self._own(x)
        mats = [np.kron(xk, np.eye(m)) for xk, (_, m) in zip(x.blocks, self.blocks)]
        return self._to_ambient(self._block_diag(mats))

    def conditional_expectation(self, ambient) -> "AlgebraElement":
        """Trace-preserving projection of an ambient operator onto the algebra.

        Block ``k`` is the normalized partial trace over the multiplicity
        factor of the ``k``-th diagonal block in the canonical basis.
        """
        ambient = self._check_ambient(ambient)
        out = []
        for yk, (n, m) in zip(self._diagonal_blocks(ambient), self.blocks):
            out.append(oc.partial_trace(yk, (n, m), 2) / m)
        return AlgebraElement(self, out)

    def contains(self, ambient, tol: float = 1e-9) -> bool:
        """Membership test through the conditional expectation."""
        ambient = self._check_ambient(ambient)
        back = self.embed(self.conditional_expectation(ambient))
        return oc.fro(back - ambient) <= tol * max(1.0, oc.fro(ambient))

    def restrict_state(self, ambient_density, tol: float = STATE_TOL) -> "NormalState":
        """Normal state ``x -> Tr[rho~ embed(x)]`` of an ambient density."""
        rho = oc.hermitian(self._check_ambient(ambient_density), tol, name="density")
        w = np.linalg.eigvalsh(rho)
        if w[0] < -tol:
            raise NotPositiveError(f"density has eigenvalue {w[0]:.3e}")
        if abs(np.trace(rho).real - 1.0) > tol:
            raise NotPositiveError(f"density has trace {np.trace(rho).real!r}")
        out = [
            oc.partial_trace(yk, (n, m), 2)
            for yk, (n, m) in zip(self._diagonal_blocks(rho), self.blocks)
        ]
        return NormalState(self, out, tol=tol)

    def extend_state(self, state: "NormalState") -> np.ndarray:
        """Canonical ambient density ``U (sum_k D_k (x) 1_{m_k}/m_k) U^dagger``."""
        self._own(state)
        mats = [
            np.kron(dk, np.eye(m) / m) for dk, (_, m) in zip(state.densities, self.blocks)
        ]
        return self._to_ambient(self._block_diag(mats))

    def state_from_vector(self, psi) -> "NormalState":
        """Restriction of the ambient vector state ``|psi><psi|``."""
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        if psi.shape[0] != self.ambient_dim:
            raise DimensionError(
                f"vector has dimension {psi.shape[0]}, expected {self.ambient_dim}"
            )
        norm = np.linalg.norm(psi)
        if norm == 0:
            raise NotPositiveError("zero vector")
        psi = psi / norm
        return self.restrict_state(np.outer(psi, psi.conj()))

    def element_from_ambient(self, ambient, tol: float = 1e-9) -> "AlgebraElement":
        """Block form of an ambient operator that must lie in the algebra."""
        ambient = self._check_ambient(ambient)
        x = self.conditional_expectation(ambient)
        if oc.fro(self.embed(x) - ambient) > tol * max(1.0, oc.fro(ambient)):
            raise MembershipError("operator does not belong to the algebra")
        return x

    def maximally_mixed(self) -> "NormalState":
        """Restriction of the normalized ambient trace."""
        d = self.ambient_dim
        return NormalState(
            self, [np.eye(n) * (m / d) for n, m in self.blocks]
        )

    def _own(self, obj) -> None:
        if obj.algebra != self:
            raise AlgebraMismatchError(f"{type(obj).__name__} belongs to another algebra")


class AlgebraElement:
    """An element of a block algebra, stored as its list of blocks."""

    __array_priority__ = 100

    def __init__(self, algebra: VonNeumannAlgebra, blocks):
        blocks = list(blocks)
        if len(blocks) != len(algebra.blocks):
            raise DimensionError(
                f"expected {len(algebra.blocks)} blocks, got {len(blocks)}"
            )
        out = []
        for b, n in zip(blocks, algebra.block_dims):
            b = oc.as_matrix(b, square=True, name="block")
            if b.shape[0] != n:
                raise DimensionError(f"block has dimension {b.shape[0]}, expected {n}")
            out.append(_frozen(b))
        self.algebra = algebra
        self.blocks = tuple(out)

    def __repr__(self):
        return f"AlgebraElement({self.algebra!r}, dims={self.algebra.block_dims})"

    def _same(self, other: "AlgebraElement") -> None:
        if not isinstance(other, AlgebraElement):
            raise TypeError(f"expected AlgebraElement, got {type(other).__name__}")
        if other.algebra != self.algebra:
            raise AlgebraMismatchError("elements belong to different algebras")

    def _map(self, fn) -> "AlgebraElement":
        return AlgebraElement(self.algebra, [fn(b) for b in self.blocks])

    def __add__(self, other):
        if np.isscalar(other):
            return self + self.algebra.identity() * other
        self._same(other)
        return AlgebraElement(self.algebra, [a + b for a, b in zip(self.blocks, other.blocks)])

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1) * other

    def __rsub__(self, other):
        return (-1) * self + other

    def __neg__(self):
        return self._map(lambda b: -b)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return self._map(lambda b: b * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self._map(lambda b: b / scalar)

    def __matmul__(self, other):
        self._same(other)
        return AlgebraElement(self.algebra, [a @ b for a, b in zip(self.blocks, other.blocks)])

    def adjoint(self) -> "AlgebraElement":
        return self._map(lambda b: b.conj().T)

    @property
    def H(self) -> "AlgebraElement":
        return self.adjoint()

    def is_self_adjoint(self, tol: float = oc.HERMITIAN_TOL) -> bool:
        return all(
            oc.fro(b - b.conj().T) <= tol * max(1.0, oc.fro(b)) for b in self.blocks
        )

    def norm(self) -> float:
        """Frobenius norm of the block tuple."""
        return float(np.sqrt(sum(oc.fro(b) ** 2 for b in self.blocks)))

    def operator_norm(self) -> float:
        return max(float(np.linalg.norm(b, 2)) for b in self.blocks)

    def allclose(self, other: "AlgebraElement", atol: float = 1e-9) -> bool:
        self._same(other)
        return (self - other).norm() <= atol

    def embed(self) -> np.ndarray:
        return self.algebra.embed(self)


class NormalState:
    """Normal state given by PSD block densities ``D_k`` of total trace one.

    ``normalized=False`` admits unnormalized positive functionals, used for
    the outputs of an instrument's predual map.
    """

    def __init__(self, algebra: VonNeumannAlgebra, densities, *, tol: float = STATE_TOL,
                 normalized: bool = True):
        densities = list(densities)
        if len(densities) != len(algebra.blocks):
            raise DimensionError(
                f"expected {len(algebra.blocks)} densities, got {len(densities)}"
            )
        out = []
        for d, n in zip(densities, algebra.block_dims):
            d = oc.hermitian(d, tol, name="block density")
            if d.shape[0] != n:
                raise DimensionError(f"density has dimension {d.shape[0]}, expected {n}")
            w = np.linalg.eigvalsh(d)
            if w[0] < -tol:
                raise NotPositiveError(f"block density has eigenvalue {w[0]:.3e}")
            out.append(_frozen(d))
        self.algebra = algebra
        self.densities = tuple(out)
        self.trace = float(sum(np.trace(d).real for d in out))
        if normalized and abs(self.trace - 1.0) > tol:
            raise NotPositiveError(f"state has total trace {self.trace!r}")

    def __repr__(self):
        return f"NormalState({self.algebra!r}, trace={self.trace:.6g})"

    def __call__(self, x: AlgebraElement) -> complex:
        return state_expectation(self, x)

    def normalized(self) -> "NormalState":
        return NormalState(self.algebra, [d / self.trace for d in self.densities])

    def mix(self, other: "NormalState", weight: float) -> "NormalState":
        """Convex combination ``weight * self + (1 - weight) * other``."""
        if other.algebra != self.algebra:
            raise AlgebraMismatchError("states belong to different algebras")
        return NormalState(
            self.algebra,
            [weight * a + (1 - weight) * b for a, b in zip(self.densities, other.densities)],
        )

    def ambient(self) -> np.ndarray:
        return self.algebra.extend_state(self)


def state_expectation(state: NormalState, x: AlgebraElement) -> complex:
    """Pairing ``sum_k Tr[D_k x_k]``."""
    if state.algebra != x.algebra:
        raise AlgebraMismatchError("state and element belong to different algebras")
    return complex(sum(np.trace(d @ b) for d, b in zip(state.densities, x.blocks)))
