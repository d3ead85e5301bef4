"""Constructors for instruments, states, observables and meter models.

Random generators take a seed (anything accepted by
``numpy.random.default_rng``, or a ``Generator``) and are deterministic in it.
"""

from __future__ import annotations

import numpy as np
import scipy.stats

from . import operator_core as oc
from .algebra import AlgebraElement, NormalState, VonNeumannAlgebra
from .instrument import KrausInstrument, MeasuringProcess

__all__ = [
    "rng_from",
    "pauli",
    "projective_instrument",
    "trivial_instrument",
    "sequential_instrument",
    "random_unitary",
    "random_instrument",
    "random_state",
    "random_observable",
    "random_algebra",
    "random_measuring_process",
    "controlled_shift_process",
    "controlled_flip_process",
]

EIGEN_MERGE_TOL = 1e-9


def rng_from(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


_PAULI = {"I": oc.PAULI_I, "X": oc.PAULI_X, "Y": oc.PAULI_Y, "Z": oc.PAULI_Z}


def pauli(word: str) -> np.ndarray:
    """Tensor product of Pauli matrices, e.g. ``pauli("XI")``."""
    out = np.ones((1, 1), dtype=complex)
    for ch in word.upper():
        out = np.kron(out, _PAULI[ch])
    return out


def _spectral_groups(observable: AlgebraElement) -> list[tuple[float, AlgebraElement]]:
    """Distinct eigenvalues (descending) with their spectral projections."""
    pairs = []
    for k, b in enumerate(observable.blocks):
        w, u = oc.spectral_decompose(b)
        for i, v in enumerate(w):
            pairs.append((float(v), k, u[:, i]))
    scale = max(1.0, max(abs(v) for v, *_ in pairs))
    groups: list[list] = []
    for v, k, vec in sorted(pairs, key=lambda t: -t[0]):
        if groups and abs(groups[-1][0] - v) <= EIGEN_MERGE_TOL * scale:
            groups[-1][1].append((k, vec))
        else:
            groups.append([v, [(k, vec)]])
    alg = observable.algebra
    out = []
    for v, members in groups:
        blocks = [np.zeros((n, n), dtype=complex) for n in alg.block_dims]
        for k, vec in members:
            blocks[k] += np.outer(vec, vec.conj())
        out.append((v, AlgebraElement(alg, blocks)))
    return out


def projective_instrument(observable: AlgebraElement) -> KrausInstrument:
    """Von Neumann-Luders measurement of a self-adjoint element.

    Outcomes are the distinct eigenvalues in descending order; the Kraus
    operator of each is the embedded spectral projection.
    """
    groups = _spectral_groups(observable)
    alg = observable.algebra
    return KrausInstrument(alg, [v for v, _ in groups], [[p.embed()] for _, p in groups])


def trivial_instrument(algebra: VonNeumannAlgebra, label: float = 0.0) -> KrausInstrument:
    """Single outcome ``label`` with the identity channel."""
    return KrausInstrument(algebra, [label], [[np.eye(algebra.ambient_dim)]])


def sequential_instrument(first: KrausInstrument, second: KrausInstrument) -> KrausInstrument:
    """Measure ``first`` then ``second``; outcomes are label pairs ``(s, t)``."""
    if first.algebra != second.algebra:
        raise ValueError("instruments belong to different algebras")
    labels, kraus = [], []
    for s, ops1 in zip(first.labels, first.kraus):
        for t, ops2 in zip(second.labels, second.kraus):
            labels.append((s, t))
            kraus.append([l @ k for k in ops1 for l in ops2])
    return KrausInstrument(first.algebra, labels, kraus)


def random_unitary(seed, n: int) -> np.ndarray:
    rng = rng_from(seed)
    return scipy.stats.unitary_group.rvs(n, random_state=rng)


def _ginibre(rng, rows: int, cols: int) -> np.ndarray:
    return rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))


def random_instrument(seed, algebra: VonNeumannAlgebra, n_outcomes: int, kraus_rank: int = 2,
                      label_dim: int = 1, labels=None) -> KrausInstrument:
    """Random CP instrument for ``algebra``.

    For every source block ``k`` a Haar-like isometry ``C^{n_k} -> sum C^{n_l}``
    is cut into pieces ``a_{s,i,l}``; each piece is lifted to ambient Kraus
    operators ``a (x) b_j`` with ``sum_j b_j^dagger b_j = 1_{m_k}`` so that dual
    maps stay inside the algebra.
    """
    rng = rng_from(seed)
    blocks = algebra.blocks
    dims = algebra.block_dims
    offsets = np.cumsum([0] + [n * m for n, m in blocks])
    weights = rng.uniform(0.2, 1.0, size=n_outcomes)
    kraus: list[list[np.ndarray]] = [[] for _ in range(n_outcomes)]
    u = algebra.basis_change
    d = algebra.ambient_dim
    rows_per = sum(dims)
    for k, (nk, mk) in enumerate(blocks):
        g = _ginibre(rng, n_outcomes * kraus_rank * rows_per, nk)
        for s in range(n_outcomes):
            seg = slice(s * kraus_rank * rows_per, (s + 1) * kraus_rank * rows_per)
            g[seg] *= weights[s]
        iso, _ = np.linalg.qr(g)
        row = 0
        for s in range(n_outcomes):
            for _ in range(kraus_rank):
                for l, (nl, ml) in enumerate(blocks):
                    a = iso[row:row + nl, :]
                    row += nl
                    for j in range(mk):
                        b = np.zeros((ml, mk))
                        b[j % ml, j] = 1.0
                        kc = np.zeros((d, d), dtype=complex)
                        kc[offsets[l]:offsets[l + 1], offsets[k]:offsets[k + 1]] = np.kron(a, b)
                        kraus[s].append(u @ kc @ u.conj().T)
    if labels is None:
        labels = _random_labels(rng, n_outcomes, label_dim)
    return KrausInstrument(algebra, labels, kraus)


def _random_labels(rng, n: int, label_dim: int):
    while True:
        if label_dim == 1:
            labels = [float(v) for v in np.round(rng.uniform(-2.0, 2.0, size=n), 6)]
        else:
            labels = [tuple(float(v) for v in row)
                      for row in np.round(rng.uniform(-2.0, 2.0, size=(n, 2)), 6)]
        if len(set(labels)) == n:
            return labels


def random_state(seed, algebra: VonNeumannAlgebra, rank: int | None = None) -> NormalState:
    """Random normal state; block ranks are random unless ``rank`` is given."""
    rng = rng_from(seed)
    weights = rng.dirichlet(np.ones(len(algebra.blocks)))
    dens = []
    for w, n in zip(weights, algebra.block_dims):
        r = rank if rank is not None else int(rng.integers(1, n + 1))
        r = min(max(r, 1), n)
        g = _ginibre(rng, n, r)
        rho = g @ g.conj().T
        dens.append(w * rho / np.trace(rho).real)
    return NormalState(algebra, dens)


def random_observable(seed, algebra: VonNeumannAlgebra, norm_bound: float = 1.0) -> AlgebraElement:
    """Random self-adjoint element with operator norm at most ``norm_bound``."""
    rng = rng_from(seed)
    blocks = []
    for n in algebra.block_dims:
        g = _ginibre(rng, n, n)
        blocks.append((g + g.conj().T) / 2)
    x = AlgebraElement(algebra, blocks)
    scale = x.operator_norm()
    if scale == 0:
        return x
    return x * (norm_bound * rng.uniform(0.5, 1.0) / scale)


def random_algebra(seed, ambient_dim: int, proper: bool = True) -> VonNeumannAlgebra:
    """Random block structure on ``ambient_dim`` with a random basis change.

    ``proper=False`` returns the full matrix algebra (still rotated).
    """
    rng = rng_from(seed)
    if proper:
        options = _block_structures(ambient_dim)
        options = [o for o in options if o != ((ambient_dim, 1),)] or options
        blocks = options[int(rng.integers(len(options)))]
    else:
        blocks = ((ambient_dim, 1),)
    return VonNeumannAlgebra(blocks, random_unitary(rng, ambient_dim))


def _block_structures(d: int) -> list[tuple[tuple[int, int], ...]]:
    """All multisets of ``(n, m)`` pairs with ``sum n m = d`` (sorted)."""
    pairs = [(n, m) for n in range(1, d + 1) for m in range(1, d + 1) if n * m <= d]
    out: set = set()

    def rec(rem, start, acc):
        if rem == 0:
            out.add(tuple(acc))
            return
        for i in range(start, len(pairs)):
            n, m = pairs[i]
            if n * m <= rem:
                rec(rem - n * m, i, acc + [pairs[i]])

    rec(d, 0, [])
    return sorted(out)


def random_measuring_process(seed, system_dim: int, n_outcomes: int = 2,
                             probe_dim: int | None = None, label_dim: int = 1) -> MeasuringProcess:
    """Random unitary coupling, random probe state and meter PVM.

    The meter splits a random orthonormal probe basis into ``n_outcomes``
    non-empty groups, so ``probe_dim >= n_outcomes``.
    """
    rng = rng_from(seed)
    p = probe_dim or max(n_outcomes, 2)
    if p < n_outcomes:
        raise ValueError("probe_dim must be at least n_outcomes")
    u = random_unitary(rng, system_dim * p)
    g = _ginibre(rng, p, int(rng.integers(1, p + 1)))
    sigma = g @ g.conj().T
    sigma /= np.trace(sigma).real
    basis = random_unitary(rng, p)
    assign = np.concatenate([np.arange(n_outcomes), rng.integers(0, n_outcomes, p - n_outcomes)])
    projs = []
    for s in range(n_outcomes):
        cols = basis[:, assign == s]
        projs.append(cols @ cols.conj().T)
    labels = _random_labels(rng, n_outcomes, label_dim)
    return MeasuringProcess(sigma, labels, projs, u)


def controlled_shift_process(observable: AlgebraElement) -> MeasuringProcess:
    """Meter that copies the eigenvalue index of ``observable`` into a probe.

    The probe starts in ``|0>``; ``U = sum_i P_i (x) X^i`` with ``X`` the
    cyclic shift, and the meter reads the probe in its computational basis.
    For a qubit observable this is the CNOT meter.
    """
    groups = _spectral_groups(observable)
    p = len(groups)
    shift = np.roll(np.eye(p), 1, axis=0)
    u = sum(np.kron(proj.embed(), np.linalg.matrix_power(shift, i))
            for i, (_, proj) in enumerate(groups))
    sigma = np.zeros((p, p))
    sigma[0, 0] = 1.0
    projs = [np.diag(np.eye(p)[i]) for i in range(p)]
    return MeasuringProcess(sigma, [v for v, _ in groups], projs, u)


def controlled_flip_process(algebra: VonNeumannAlgebra | None = None) -> MeasuringProcess:
    """CNOT meter for ``sigma_z`` on a qubit (the algebra argument is ``M_2``)."""
    algebra = algebra or VonNeumannAlgebra.full(2)
    return controlled_shift_process(algebra.element([oc.PAULI_Z]))

