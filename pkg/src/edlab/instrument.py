"""CP instruments with finite outcome sets, measuring processes and dilations.

An instrument is stored as ambient Kraus operators ``K_{s,j}`` together with
the algebra it is an instrument for. Its dual map

    I(x, Delta) = sum_{s in Delta, j} K_{s,j}^dagger embed(x) K_{s,j}

must land back in the algebra; this is checked on every matrix unit when the
instrument is constructed, so an ill-matched Kraus family fails early.
"""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Real
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.linalg

from . import operator_core as oc
from .algebra import AlgebraElement, NormalState, VonNeumannAlgebra
from .exceptions import (
    AlgebraMismatchError,
    DimensionError,
    MembershipError,
    OutcomeSpaceError,
)
from .standard_form import StandardFormSpace

__all__ = [
    "OutcomeSpace",
    "KrausInstrument",
    "MeasuringProcess",
    "MinimalDilation",
    "Marginals",
    "instrument_from_measuring_process",
    "measuring_process_from_instrument",
    "minimal_dilation",
    "statistically_equivalent",
    "marginal_structures",
    "choi_matrix",
    "spectral_projection",
]

IDENTITY_TOL = 1e-9
DILATION_CUTOFF = 1e-10


def _as_label(label):
    if isinstance(label, (tuple, list, np.ndarray)):
        return tuple(float(v) for v in label)
    return float(label)


class OutcomeSpace:
    """Finite set of distinct outcome labels, scalars or real pairs."""

    def __init__(self, labels: Iterable):
        labels = tuple(_as_label(lab) for lab in labels)
        if not labels:
            raise OutcomeSpaceError("outcome space is empty")
        arity = {len(lab) if isinstance(lab, tuple) else 1 for lab in labels}
        if len(arity) != 1 or not arity <= {1, 2}:
            raise OutcomeSpaceError(f"labels must all be scalars or all pairs: {labels!r}")
        if any(isinstance(lab, tuple) and len(lab) == 1 for lab in labels):
            raise OutcomeSpaceError("one-element tuples are not valid labels")
        if len(set(labels)) != len(labels):
            raise OutcomeSpaceError(f"outcome labels are not distinct: {labels!r}")
        self.labels = labels
        self.dim = 2 if isinstance(labels[0], tuple) else 1

    def __len__(self):
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __eq__(self, other):
        return isinstance(other, OutcomeSpace) and self.labels == other.labels

    def __repr__(self):
        return f"OutcomeSpace({list(self.labels)})"

    def index(self, label) -> int:
        try:
            return self.labels.index(_as_label(label))
        except ValueError:
            raise OutcomeSpaceError(f"unknown outcome label {label!r}") from None

    def resolve(self, delta) -> list[int]:
        """Indices of an outcome subset.

        ``None`` means the whole space; a single label or an iterable of
        labels selects those outcomes.
        """
        if delta is None:
            return list(range(len(self.labels)))
        if isinstance(delta, (Real, np.number)):
            return [self.index(delta)]
        if isinstance(delta, tuple) and self.dim == 2 and len(delta) == 2 \
                and all(isinstance(v, (Real, np.number)) for v in delta):
            return [self.index(delta)]
        idx = sorted({self.index(lab) for lab in delta})
        return idx


class KrausInstrument:
    """CP instrument for ``(algebra, outcomes)`` given by ambient Kraus operators.

    Parameters
    ----------
    algebra : VonNeumannAlgebra
    outcomes : OutcomeSpace or sequence of labels
    kraus : sequence of sequences of array_like
        ``kraus[s]`` lists the Kraus operators of outcome ``s``.
    tol : float
        Tolerance for completeness and for the membership of dual maps.
    """

    def __init__(self, algebra: VonNeumannAlgebra, outcomes, kraus, tol: float = IDENTITY_TOL,
                 check: bool = True):
        if not isinstance(outcomes, OutcomeSpace):
            outcomes = OutcomeSpace(outcomes)
        kraus = [list(ops) for ops in kraus]
        if len(kraus) != len(outcomes):
            raise OutcomeSpaceError(
                f"{len(kraus)} Kraus lists for {len(outcomes)} outcomes"
            )
        d = algebra.ambient_dim
        frozen = []
        for ops in kraus:
            row = []
            for k in ops:
                k = oc.as_matrix(k, square=True, name="Kraus operator")
                if k.shape[0] != d:
                    raise DimensionError(f"Kraus operator has dimension {k.shape[0]}, expected {d}")
                k = k.copy()
                k.setflags(write=False)
                row.append(k)
            frozen.append(tuple(row))
        self.algebra = algebra
        self.outcomes = outcomes
        self.kraus = tuple(frozen)
        self.tol = tol
        if check:
            self._validate()

    def __repr__(self):
        return f"KrausInstrument({self.algebra!r}, outcomes={list(self.outcomes.labels)})"

    def _validate(self) -> None:
        d = self.algebra.ambient_dim
        total = sum((k.conj().T @ k for ops in self.kraus for k in ops), np.zeros((d, d)))
        dev = oc.fro(total - np.eye(d))
        if dev > self.tol * max(1.0, np.sqrt(d)):
            raise MembershipError(f"Kraus operators are not complete: deviation {dev:.3e}")
        for s in range(len(self.outcomes)):
            for _, _, _, unit in self.algebra.matrix_units():
                out = self._dual_ambient(unit.embed(), [s])
                if not self.algebra.contains(out, self.tol):
                    raise MembershipError(
                        f"dual map of outcome {self.outcomes.labels[s]!r} leaves the algebra"
                    )

    @property
    def labels(self):
        return self.outcomes.labels

    def _dual_ambient(self, ambient: np.ndarray, idx: Sequence[int]) -> np.ndarray:
        d = self.algebra.ambient_dim
        out = np.zeros((d, d), dtype=complex)
        for s in idx:
            for k in self.kraus[s]:
                out += k.conj().T @ ambient @ k
        return out

    def _own(self, obj) -> None:
        if obj.algebra != self.algebra:
            raise AlgebraMismatchError(f"{type(obj).__name__} belongs to another algebra")

    def dual_apply(self, x: AlgebraElement, delta=None) -> AlgebraElement:
        """Heisenberg-picture map ``I(x, Delta)`` as an element of the algebra."""
        return self._dual_indexed(x, self.outcomes.resolve(delta))

    def _dual_indexed(self, x: AlgebraElement, idx: Sequence[int]) -> AlgebraElement:
        self._own(x)
        out = self._dual_ambient(x.embed(), idx)
        return self.algebra.element_from_ambient(out, self.tol)

    def predual_apply(self, state: NormalState, delta=None) -> NormalState:
        """Schrodinger-picture map ``I(Delta) rho`` (unnormalized)."""
        self._own(state)
        rho = state.ambient()
        d = self.algebra.ambient_dim
        out = np.zeros((d, d), dtype=complex)
        for s in self.outcomes.resolve(delta):
            for k in self.kraus[s]:
                out += k @ rho @ k.conj().T
        out = (out + out.conj().T) / 2
        blocks = [
            oc.partial_trace(yk, (n, m), 2)
            for yk, (n, m) in zip(self.algebra._diagonal_blocks(out), self.algebra.blocks)
        ]
        return NormalState(self.algebra, blocks, normalized=False)

    def outcome_probability(self, state: NormalState, delta=None) -> float:
        p = self.predual_apply(state, delta).trace
        return float(min(1.0, max(0.0, p)))

    def post_state(self, state: NormalState, delta=None) -> NormalState:
        """Normalized post-measurement state; ``I(S) rho`` if ``Delta`` has probability 0."""
        out = self.predual_apply(state, delta)
        if out.trace > 1e-14:
            return out.normalized()
        return self.predual_apply(state, None).normalized()

    def joint_probability(self, state: NormalState, observable: AlgebraElement,
                          gamma=None, delta=None) -> float:
        """``Pr{x in Delta} * Pr{M in Gamma | post-measurement state}``.

        ``gamma`` is ``None`` (the whole line), a closed interval
        ``(lo, hi)`` or a predicate on eigenvalues.
        """
        self._own(observable)
        prob = self.outcome_probability(state, delta)
        if gamma is None:
            return prob
        if prob == 0.0:
            return 0.0
        post = self.post_state(state, delta)
        proj = spectral_projection(observable, gamma)
        return prob * float(post(proj).real)

    def povm(self) -> list[AlgebraElement]:
        """Effects ``Pi(s) = I(1, {s})`` in outcome order."""
        one = self.algebra.identity()
        return [self._dual_indexed(one, [s]) for s in range(len(self.outcomes))]

    def moment_operator(self, n: int) -> AlgebraElement:
        """``Pi^(n) = sum_s s^n Pi(s)`` for scalar outcome labels."""
        if self.outcomes.dim != 1:
            raise OutcomeSpaceError("moment operators need scalar outcome labels")
        out = self.algebra.zero()
        for lab, eff in zip(self.outcomes.labels, self.povm()):
            out = out + eff * (lab ** n)
        return out

    def channel(self, x: AlgebraElement) -> AlgebraElement:
        """Full-set dual map ``I(x, S)``."""
        return self.dual_apply(x, None)

    def relabel(self, labels) -> "KrausInstrument":
        return KrausInstrument(self.algebra, labels, self.kraus, self.tol, check=False)

    def kraus_count(self) -> int:
        return sum(len(ops) for ops in self.kraus)


def spectral_projection(observable: AlgebraElement, gamma) -> AlgebraElement:
    """Spectral projection of a self-adjoint element onto eigenvalues in ``gamma``."""
    if callable(gamma):
        accept: Callable[[float], bool] = gamma
    else:
        lo, hi = gamma
        accept = lambda v: lo <= v <= hi  # noqa: E731
    blocks = []
    for b in observable.blocks:
        w, u = oc.spectral_decompose(b)
        keep = np.array([bool(accept(float(v))) for v in w], dtype=bool)
        blocks.append(u[:, keep] @ u[:, keep].conj().T)
    return AlgebraElement(observable.algebra, blocks)


def choi_matrix(instr: KrausInstrument, delta=None) -> np.ndarray:
    """Choi matrix ``sum_{ij} |i><j| (x) I(|i><j|)`` of the ambient dual map."""
    d = instr.algebra.ambient_dim
    idx = instr.outcomes.resolve(delta)
    out = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1.0
            out += np.kron(e, instr._dual_ambient(e, idx))
    return out


class MeasuringProcess:
    """Measurement model ``(K, sigma, F, U)`` on ``system (x) probe``.

    Parameters
    ----------
    probe_state : array_like
        Density matrix ``sigma`` of the probe.
    meter_labels : sequence
        Outcome labels of the meter PVM.
    meter_projections : sequence of array_like
        Mutually orthogonal projections ``F(s)`` on the probe summing to one.
    unitary : array_like
        Coupling ``U`` on ``C^system_dim (x) C^probe_dim`` (system first).
    """

    def __init__(self, probe_state, meter_labels, meter_projections, unitary, tol: float = 1e-10):
        sigma = oc.hermitian(probe_state, name="probe state")
        p = sigma.shape[0]
        if np.linalg.eigvalsh(sigma)[0] < -1e-9 or abs(np.trace(sigma).real - 1) > 1e-9:
            raise DimensionError("probe state must be PSD with unit trace")
        outcomes = meter_labels if isinstance(meter_labels, OutcomeSpace) else OutcomeSpace(meter_labels)
        projs = [oc.hermitian(f, name="meter projection") for f in meter_projections]
        if len(projs) != len(outcomes):
            raise OutcomeSpaceError("one meter projection per label is required")
        for i, f in enumerate(projs):
            if f.shape[0] != p:
                raise DimensionError("meter projection does not match the probe dimension")
            for j, g in enumerate(projs):
                target = f if i == j else np.zeros_like(f)
                if oc.fro(f @ g - target) > 1e-9:
                    raise DimensionError("meter projections are not orthogonal projections")
        if oc.fro(sum(projs) - np.eye(p)) > 1e-9:
            raise DimensionError("meter projections do not sum to the identity")
        u = oc.as_matrix(unitary, square=True, name="unitary")
        if u.shape[0] % p:
            raise DimensionError("unitary dimension is not a multiple of the probe dimension")
        if oc.fro(u.conj().T @ u - np.eye(u.shape[0])) > tol * max(1.0, u.shape[0]):
            raise DimensionError("coupling is not unitary")
        self.probe_dim = p
        self.system_dim = u.shape[0] // p
        self.probe_state = sigma
        self.outcomes = outcomes
        self.meter_projections = tuple(projs)
        self.unitary = u

    def __repr__(self):
        return (f"MeasuringProcess(system_dim={self.system_dim}, probe_dim={self.probe_dim}, "
                f"outcomes={list(self.outcomes.labels)})")

    def kraus_operators(self) -> list[list[np.ndarray]]:
        """``sqrt(p_l) (1 (x) <f_j|) U (1 (x) |e_l>)`` grouped by outcome."""
        d, p = self.system_dim, self.probe_dim
        w, e = np.linalg.eigh(self.probe_state)
        u4 = self.unitary.reshape(d, p, d, p)
        out = []
        for f in self.meter_projections:
            fw, fv = np.linalg.eigh(f)
            basis = fv[:, fw > 0.5]
            ops = []
            for j in range(basis.shape[1]):
                for l, weight in enumerate(w):
                    if weight <= 1e-14:
                        continue
                    k = np.einsum("b,ibjc,c->ij", basis[:, j].conj(), u4, e[:, l])
                    ops.append(np.sqrt(weight) * k)
            out.append(ops)
        return out

    def first_moment(self, axis: int | None = None) -> np.ndarray:
        """Meter moment ``F^(1) = sum_s s F(s)`` (component ``axis`` for pairs)."""
        labels = self.outcomes.labels
        if self.outcomes.dim == 2:
            if axis is None:
                raise OutcomeSpaceError("pair-valued meter needs an axis")
            vals = [lab[axis] for lab in labels]
        else:
            vals = list(labels)
        return sum(v * f for v, f in zip(vals, self.meter_projections))

    def instrument(self, algebra: VonNeumannAlgebra, tol: float = IDENTITY_TOL) -> KrausInstrument:
        return instrument_from_measuring_process(self, algebra, tol)


def instrument_from_measuring_process(mp: MeasuringProcess, algebra: VonNeumannAlgebra,
                                      tol: float = IDENTITY_TOL) -> KrausInstrument:
    """Instrument ``x -> (id (x) sigma)[U^dagger (x (x) F(Delta)) U]`` on ``algebra``.

    Raises :class:`MembershipError` if the process does not map the algebra
    into itself.
    """
    if mp.system_dim != algebra.ambient_dim:
        raise DimensionError(
            f"process acts on dimension {mp.system_dim}, algebra on {algebra.ambient_dim}"
        )
    return KrausInstrument(algebra, mp.outcomes, mp.kraus_operators(), tol)


def measuring_process_from_instrument(instr: KrausInstrument) -> MeasuringProcess:
    """Measuring process realizing ``instr``.

    The probe records the Kraus index ``(s, j)``; ``U`` extends the isometry
    ``psi (x) |0> -> sum_{s,j} K_{s,j} psi (x) |s, j>``.
    """
    d = instr.algebra.ambient_dim
    flat = [(s, k) for s, ops in enumerate(instr.kraus) for k in ops]
    p = max(len(flat), 1)
    iso = np.zeros((d * p, d), dtype=complex)
    for r, (_, k) in enumerate(flat):
        # column psi -> sum_r K_r psi (x) |r>
        iso[r::p, :] = k
    comp = scipy.linalg.null_space(iso.conj().T)
    u = np.zeros((d * p, d * p), dtype=complex)
    cols_probe0 = [i * p for i in range(d)]
    other = [c for c in range(d * p) if c not in set(cols_probe0)]
    u[:, cols_probe0] = iso
    u[:, other] = comp
    projs = []
    for s in range(len(instr.outcomes)):
        diag = np.array([1.0 if flat[r][0] == s else 0.0 for r in range(p)])
        projs.append(np.diag(diag).astype(complex))
    sigma = np.zeros((p, p), dtype=complex)
    sigma[0, 0] = 1.0
    return MeasuringProcess(sigma, instr.outcomes, projs, u, tol=1e-9)


def statistically_equivalent(a, b, algebra: VonNeumannAlgebra | None = None,
                             tol: float = IDENTITY_TOL) -> bool:
    """True iff the dual maps of ``a`` and ``b`` agree on all matrix units and outcomes.

    ``a`` and ``b`` may be instruments or measuring processes; processes
    need ``algebra``.
    """
    ia, ib = (_to_instrument(obj, algebra, tol) for obj in (a, b))
    if ia.algebra != ib.algebra:
        raise AlgebraMismatchError("instruments live on different algebras")
    if set(ia.outcomes.labels) != set(ib.outcomes.labels):
        raise OutcomeSpaceError("outcome spaces differ")
    for lab in ia.outcomes.labels:
        sa, sb = ia.outcomes.index(lab), ib.outcomes.index(lab)
        for _, _, _, unit in ia.algebra.matrix_units():
            emb = unit.embed()
            diff = ia._dual_ambient(emb, [sa]) - ib._dual_ambient(emb, [sb])
            if oc.fro(diff) > tol:
                return False
    return True


def _to_instrument(obj, algebra, tol) -> KrausInstrument:
    if isinstance(obj, KrausInstrument):
        if algebra is not None and obj.algebra != algebra:
            raise AlgebraMismatchError("instrument belongs to another algebra")
        return obj
    if isinstance(obj, MeasuringProcess):
        if algebra is None:
            raise AlgebraMismatchError("a measuring process needs an algebra")
        return instrument_from_measuring_process(obj, algebra, tol)
    raise TypeError(f"cannot compare {type(obj).__name__}")


@dataclass(frozen=True)
class _Sector:
    outcome: int
    block: int
    block_dim: int
    rank: int
    offset: int


class MinimalDilation:
    """Dilation ``(K, E, pi, V)`` of an instrument over its standard-form space.

    ``K`` decomposes into sectors labelled by (outcome ``s``, block ``k``),
    each isomorphic to ``C^{n_k} (x) C^{r_{s,k}}``; ``pi(x)`` acts as
    ``x_k (x) 1`` on the sector and ``E(s)`` projects onto the sectors of
    outcome ``s``.
    """

    def __init__(self, instrument: KrausInstrument, space: StandardFormSpace,
                 isometry: np.ndarray, sectors: Sequence[_Sector]):
        self.instrument = instrument
        self.space = space
        self.isometry = isometry
        self.sectors = tuple(sectors)
        self.dim = isometry.shape[0]
        self.labels = instrument.outcomes.labels

    @property
    def V(self) -> np.ndarray:
        return self.isometry

    def __repr__(self):
        return f"MinimalDilation(dim={self.dim}, outcomes={len(self.labels)})"

    def pi(self, x: AlgebraElement) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for sec in self.sectors:
            lo, hi = sec.offset, sec.offset + sec.block_dim * sec.rank
            out[lo:hi, lo:hi] = np.kron(x.blocks[sec.block], np.eye(sec.rank))
        return out

    def E(self, delta=None) -> np.ndarray:
        """Projection ``E(Delta)`` for an outcome subset given by labels."""
        return self._E_indexed(self.instrument.outcomes.resolve(delta))

    def _E_indexed(self, idx) -> np.ndarray:
        idx = set(idx)
        diag = np.zeros(self.dim)
        for sec in self.sectors:
            if sec.outcome in idx:
                diag[sec.offset:sec.offset + sec.block_dim * sec.rank] = 1.0
        return np.diag(diag).astype(complex)

    def pvm(self) -> list[np.ndarray]:
        return [self._E_indexed([s]) for s in range(len(self.labels))]

    def first_moment(self, axis: int | None = None) -> np.ndarray:
        """``E^(1) = sum_s s E(s)``; ``axis`` picks a component of pair labels."""
        vals = _label_values(self.instrument.outcomes, axis)
        diag = np.zeros(self.dim)
        for sec in self.sectors:
            diag[sec.offset:sec.offset + sec.block_dim * sec.rank] = vals[sec.outcome]
        return np.diag(diag).astype(complex)

    def reconstruct(self, x: AlgebraElement, delta=None) -> np.ndarray:
        """``V^dagger pi(x) E(Delta) V`` on the standard-form space."""
        v = self.isometry
        return v.conj().T @ self.pi(x) @ self.E(delta) @ v

    def minimality_rank(self) -> int:
        """Rank of ``span{pi(x) E(s) V xi}`` over matrix units and outcomes."""
        v = self.isometry
        cols = []
        alg = self.instrument.algebra
        for s in range(len(self.labels)):
            ev = self._E_indexed([s]) @ v
            for _, _, _, unit in alg.matrix_units():
                cols.append(self.pi(unit) @ ev)
        stacked = np.hstack(cols)
        return int(np.linalg.matrix_rank(stacked, tol=1e-8 * max(1.0, np.linalg.norm(stacked, 2))))


def _label_values(outcomes: OutcomeSpace, axis: int | None) -> list[float]:
    if outcomes.dim == 1:
        if axis not in (None, 0):
            raise OutcomeSpaceError("scalar labels have no second component")
        return list(outcomes.labels)
    if axis is None:
        raise OutcomeSpaceError("pair labels need an axis")
    return [lab[axis] for lab in outcomes.labels]


def minimal_dilation(instr: KrausInstrument, cutoff: float = DILATION_CUTOFF) -> MinimalDilation:
    """Minimal dilation built from the Gram matrix of ``A (x) H_std``.

    The Gram form ``<a (x) xi, b (x) eta> = <xi| pi_std(I(a^dagger b)) eta>``
    vanishes between different outcomes, different blocks and different row
    indices of matrix units, so it splits into one Gram matrix per
    (outcome, block) pair with entries ``pi_std(I(e_qt, s))``. Each is
    factored spectrally and its null space dropped (eigenvalues below
    ``cutoff`` times the largest eigenvalue overall).
    """
    alg = instr.algebra
    space = StandardFormSpace(alg)
    D = space.dim
    grams = []
    for s in range(len(instr.outcomes)):
        for k, n in enumerate(alg.block_dims):
            g = np.zeros((n * D, n * D), dtype=complex)
            for q in range(n):
                for t in range(n):
                    y = instr._dual_indexed(alg.unit(k, q, t), [s])
                    g[q * D:(q + 1) * D, t * D:(t + 1) * D] = space.left_matrix(y)
            g = (g + g.conj().T) / 2
            grams.append((s, k, n, np.linalg.eigh(g)))
    lam_max = max(float(w[-1]) for *_, (w, _) in grams)
    thr = cutoff * max(lam_max, 1e-300)
    blocks_v, sectors, offset = [], [], 0
    for s, k, n, (w, q) in grams:
        keep = w > thr
        r = int(np.count_nonzero(keep))
        if r == 0:
            continue
        coords = np.sqrt(w[keep])[:, None] * q[:, keep].conj().T  # r x (n*D)
        v = np.zeros((n * r, D), dtype=complex)
        for p in range(n):
            v[p * r:(p + 1) * r, :] = coords[:, p * D:(p + 1) * D]
        blocks_v.append(v)
        sectors.append(_Sector(s, k, n, r, offset))
        offset += n * r
    isometry = np.vstack(blocks_v) if blocks_v else np.zeros((0, D), dtype=complex)
    return MinimalDilation(instr, space, isometry, sectors)


@dataclass(frozen=True)
class Marginals:
    """Marginal instruments and moments of a pair-valued instrument."""

    x: KrausInstrument
    y: KrausInstrument
    povm_x: dict
    povm_y: dict
    first_x: AlgebraElement
    second_x: AlgebraElement
    first_y: AlgebraElement
    second_y: AlgebraElement


def _marginal(instr: KrausInstrument, axis: int) -> KrausInstrument:
    values: list[float] = []
    groups: dict[float, list] = {}
    for lab, ops in zip(instr.outcomes.labels, instr.kraus):
        v = lab[axis]
        if v not in groups:
            values.append(v)
            groups[v] = []
        groups[v].extend(ops)
    return KrausInstrument(instr.algebra, values, [groups[v] for v in values], instr.tol,
                           check=False)


def marginal_structures(instr: KrausInstrument) -> Marginals:
    """x- and y-marginals ``Pi_x(Delta) = sum_{s in Delta} sum_t Pi(s, t)`` etc."""
    if instr.outcomes.dim != 2:
        raise OutcomeSpaceError("marginals need pair-valued outcome labels")
    mx, my = _marginal(instr, 0), _marginal(instr, 1)
    return Marginals(
        x=mx,
        y=my,
        povm_x=dict(zip(mx.outcomes.labels, mx.povm())),
        povm_y=dict(zip(my.outcomes.labels, my.povm())),
        first_x=mx.moment_operator(1),
        second_x=mx.moment_operator(2),
        first_y=my.moment_operator(1),
        second_y=my.moment_operator(2),
    )
