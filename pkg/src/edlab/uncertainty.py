"""Error, disturbance and the uncertainty relations between them.

Quantities are computed from the abstract moment formulas by default; the
``*_via_dilation`` and ``*_via_process`` functions evaluate the same
numbers through a minimal dilation or a measuring process, which the tests
use as independent routes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import operator_core as oc
from .algebra import AlgebraElement, NormalState
from .exceptions import AlgebraMismatchError, NotPositiveError, OutcomeSpaceError
from .instrument import (
    KrausInstrument,
    MeasuringProcess,
    MinimalDilation,
    instrument_from_measuring_process,
    marginal_structures,
    minimal_dilation,
)
from .standard_form import (
    c_bound,
    commutator_functional,
    d_bound,
    gns_vector,
    left_action,
    polar_decompose,
)

__all__ = [
    "MARGIN_TOL",
    "RADICAND_TOL",
    "UncertaintyReport",
    "ProofVectors",
    "std_dev",
    "noise_operator",
    "noise_operator_moments",
    "disturbance_operator_moments",
    "error",
    "disturbance_operator",
    "disturbance",
    "error_via_dilation",
    "disturbance_via_dilation",
    "error_via_process",
    "disturbance_via_process",
    "ozawa_margin",
    "branciard_margin",
    "check_ozawa",
    "check_branciard",
    "check_strengthened",
    "heisenberg_product_deficit",
    "branciard_geometric",
    "proof_vectors",
    "simultaneous_errors",
    "check_simultaneous",
    "appleby_error",
    "evaluate",
]

#: Slack against which relation margins are judged.
MARGIN_TOL = 1e-8
#: Negative squared quantities down to ``-RADICAND_TOL * scale`` are rounding noise.
RADICAND_TOL = 1e-10


def _root(value: float, scale: float = 1.0, what: str = "quantity") -> float:
    if value < -RADICAND_TOL * max(1.0, scale):
        raise NotPositiveError(f"{what} has negative square {value:.3e}")
    return math.sqrt(max(value, 0.0))


def _expect(state: NormalState, x: AlgebraElement) -> float:
    return float(state(x).real)


def _scale(*xs: AlgebraElement) -> float:
    return max([1.0] + [x.operator_norm() ** 2 for x in xs])


def std_dev(a: AlgebraElement, state: NormalState) -> float:
    """``sqrt(rho(A^2) - rho(A)^2)``."""
    if a.algebra != state.algebra:
        raise AlgebraMismatchError("observable and state belong to different algebras")
    mean = _expect(state, a)
    return _root(_expect(state, a @ a) - mean * mean, _scale(a), "standard deviation")


def _require_scalar(instr: KrausInstrument) -> None:
    if instr.outcomes.dim != 1:
        raise OutcomeSpaceError("this quantity needs scalar outcome labels")


def noise_operator_moments(a: AlgebraElement, instr: KrausInstrument) -> AlgebraElement:
    """Noise operator straight from the moment operators (reference form)."""
    _require_scalar(instr)
    first, second = instr.moment_operator(1), instr.moment_operator(2)
    return second - a @ first - first @ a + a @ a


def disturbance_operator_moments(b: AlgebraElement, instr: KrausInstrument) -> AlgebraElement:
    """Disturbance operator straight from the dual channel (reference form)."""
    ib = instr.channel(b)
    return instr.channel(b @ b) - b @ ib - ib @ b + b @ b


def _gram_sum(algebra, factors) -> AlgebraElement:
    """``sum M^dagger M`` over ambient factors, projected into the algebra."""
    d = algebra.ambient_dim
    acc = np.zeros((d, d), dtype=complex)
    for m in factors:
        acc += m.conj().T @ m
    return algebra.conditional_expectation(acc)


def noise_operator(a: AlgebraElement, instr: KrausInstrument) -> AlgebraElement:
    """``Pi^(2) - A Pi^(1) - Pi^(1) A + A^2``.

    Evaluated as ``sum_{s,j} (K_j (s - A))^dagger (K_j (s - A))``, which equals
    the moment form because the effects sum to one. The Gram form has no
    cancellation, so a vanishing error comes out at rounding level instead
    of at its square root.
    """
    _require_scalar(instr)
    instr._own(a)
    amb = a.embed()
    eye = np.eye(instr.algebra.ambient_dim)
    return _gram_sum(instr.algebra, (
        k @ (float(lab) * eye - amb)
        for lab, ops in zip(instr.outcomes.labels, instr.kraus) for k in ops
    ))


def error(a: AlgebraElement, state: NormalState, instr: KrausInstrument) -> float:
    """Noise-operator based error ``sqrt(<rho, N>)``."""
    n = noise_operator(a, instr)
    return _root(_expect(state, n), _scale(a, n), "error")


def disturbance_operator(b: AlgebraElement, instr: KrausInstrument) -> AlgebraElement:
    """``I(B^2, S) - B I(B, S) - I(B, S) B + B^2``.

    Evaluated as ``sum_j [B, K_j]^dagger [B, K_j]`` over all Kraus operators,
    equal by completeness and free of cancellation.
    """
    instr._own(b)
    amb = b.embed()
    return _gram_sum(instr.algebra, (
        amb @ k - k @ amb for ops in instr.kraus for k in ops
    ))


def disturbance(b: AlgebraElement, state: NormalState, instr: KrausInstrument) -> float:
    n = disturbance_operator(b, instr)
    return _root(_expect(state, n), _scale(b, n), "disturbance")


def _flat_gns(dil: MinimalDilation, state: NormalState) -> np.ndarray:
    return dil.space.flatten(gns_vector(state).blocks)


def error_via_dilation(a: AlgebraElement, state: NormalState, dil: MinimalDilation,
                       axis: int | None = None) -> float:
    """``|| (E^(1) V - V A) xi_rho ||`` in the dilation space."""
    xi = _flat_gns(dil, state)
    v = dil.isometry
    vec = dil.first_moment(axis) @ v @ xi - v @ dil.space.left_matrix(a) @ xi
    return float(np.linalg.norm(vec))


def disturbance_via_dilation(b: AlgebraElement, state: NormalState, dil: MinimalDilation) -> float:
    """``|| (pi(B) V - V B) J xi_rho ||``; ``J xi_rho = xi_rho`` for cone vectors."""
    xi = _flat_gns(dil, state)
    v = dil.isometry
    vec = dil.pi(b) @ v @ xi - v @ dil.space.left_matrix(b) @ xi
    return float(np.linalg.norm(vec))


def _process_norm(mp: MeasuringProcess, state: NormalState, op: np.ndarray) -> float:
    """``<rho~ (x) sigma, X^2>^(1/2)`` as ``(sum_l p_l ||X (sqrt(rho~) (x) e_l)||_F^2)^(1/2)``.

    ``(p_l, e_l)`` are the eigenpairs of the probe state, so no square root
    of a probe-sized matrix is needed.
    """
    instrument_from_measuring_process(mp, state.algebra)
    root = oc.psd_sqrt(state.ambient())
    w, e = np.linalg.eigh(mp.probe_state)
    total = 0.0
    for weight, vec in zip(w, e.T):
        if weight > 1e-14:
            total += weight * oc.fro(op @ np.kron(root, vec[:, None])) ** 2
    return math.sqrt(total)


def error_via_process(a: AlgebraElement, state: NormalState, mp: MeasuringProcess,
                      axis: int | None = None) -> float:
    """``<rho~ (x) sigma, (U^dagger (1 (x) F^(1)) U - A (x) 1)^2>^(1/2)``."""
    u = mp.unitary
    noise = u.conj().T @ np.kron(np.eye(mp.system_dim), mp.first_moment(axis)) @ u \
        - np.kron(a.embed(), np.eye(mp.probe_dim))
    return _process_norm(mp, state, noise)


def disturbance_via_process(b: AlgebraElement, state: NormalState, mp: MeasuringProcess) -> float:
    """``<rho~ (x) sigma, (U^dagger (B (x) 1) U - B (x) 1)^2>^(1/2)``."""
    u = mp.unitary
    bb = np.kron(b.embed(), np.eye(mp.probe_dim))
    return _process_norm(mp, state, u.conj().T @ bb @ u - bb)


# -- relations on numbers -------------------------------------------------

def ozawa_margin(eps_a, eta_b, sigma_a, sigma_b, bound) -> float:
    return eps_a * eta_b + eps_a * sigma_b + sigma_a * eta_b - bound


def branciard_margin(eps_a, eta_b, sigma_a, sigma_b, bound) -> float:
    """``e^2 sB^2 + sA^2 n^2 + 2 e n sqrt(sA^2 sB^2 - X^2) - X^2`` for bound ``X``."""
    radicand = sigma_a ** 2 * sigma_b ** 2 - bound ** 2
    root = math.sqrt(max(radicand, 0.0))
    return (eps_a ** 2 * sigma_b ** 2 + sigma_a ** 2 * eta_b ** 2
            + 2 * eps_a * eta_b * root - bound ** 2)


def _ed_quantities(a, b, state, instr):
    return (error(a, state, instr), disturbance(b, state, instr),
            std_dev(a, state), std_dev(b, state))


def check_ozawa(a, b, state, instr) -> float:
    """Margin of ``eA nB + eA sB + sA nB >= C``."""
    return ozawa_margin(*_ed_quantities(a, b, state, instr), c_bound(a, b, state))


def check_branciard(a, b, state, instr) -> float:
    """Margin of the Branciard form with the commutator bound ``C``."""
    return branciard_margin(*_ed_quantities(a, b, state, instr), c_bound(a, b, state))


def check_strengthened(a, b, state, instr) -> float:
    """Margin of the Branciard form with the functional-norm bound ``D``."""
    return branciard_margin(*_ed_quantities(a, b, state, instr), d_bound(a, b, state))


def heisenberg_product_deficit(a, b, state, instr) -> float:
    """``eps(A) eta(B) - C``; negative values violate the naive product relation."""
    return error(a, state, instr) * disturbance(b, state, instr) - c_bound(a, b, state)


def branciard_geometric(a, b, m, n, tol: float = 1e-10) -> float:
    """Margin of the geometric inequality for real vectors with ``m`` orthogonal to ``n``.

    Complex inputs are treated as real vectors with ``(x, y) = Re <x|y>``.
    """
    vecs = [np.asarray(v).reshape(-1) for v in (a, b, m, n)]
    a, b, m, n = vecs

    def inner(x, y):
        return float(np.real(np.vdot(x, y)))

    scale = max(1.0, float(np.linalg.norm(m) * np.linalg.norm(n)))
    if abs(inner(m, n)) > tol * scale:
        raise ValueError(f"m and n are not orthogonal: (m, n) = {inner(m, n):.3e}")
    am = float(np.linalg.norm(a - m))
    bn = float(np.linalg.norm(b - n))
    na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    ab = inner(a, b)
    root = math.sqrt(max(na ** 2 * nb ** 2 - ab ** 2, 0.0))
    return am ** 2 * nb ** 2 + na ** 2 * bn ** 2 + 2 * am * bn * root - ab ** 2


@dataclass(frozen=True)
class ProofVectors:
    """Vectors ``a, b, m, n`` in the dilation space, real inner product ``Re<x|y>``."""

    a: np.ndarray
    b: np.ndarray
    m: np.ndarray
    n: np.ndarray

    @staticmethod
    def inner(x, y) -> float:
        return float(np.real(np.vdot(x, y)))

    @property
    def mn(self) -> float:
        return self.inner(self.m, self.n)

    @property
    def ab(self) -> float:
        return self.inner(self.a, self.b)

    def sq(self, name: str) -> float:
        """Squared norm of ``a``, ``b``, ``a-m`` or ``b-n``."""
        vec = {
            "a": self.a,
            "b": self.b,
            "a-m": self.a - self.m,
            "b-n": self.b - self.n,
        }[name]
        return float(np.real(np.vdot(vec, vec)))

    def geometric_margin(self) -> float:
        return branciard_geometric(self.a, self.b, self.m, self.n, tol=1e-8)


def proof_vectors(a: AlgebraElement, b: AlgebraElement, state: NormalState,
                  instr: KrausInstrument, dilation: MinimalDilation | None = None) -> ProofVectors:
    """The four vectors behind the strengthened relation.

    ``a = V(A - rho(A)) J W xi``, ``b = -i V(B - rho(B)) J xi``,
    ``m = (E^(1) - rho(A)) V J W xi`` and ``n = -i(pi(B) - rho(B)) V J xi``,
    where ``W`` is the self-adjoint partial isometry of the polar
    decomposition of the commutator functional. For pair-valued outcomes
    ``m`` uses the x-moment and ``n`` uses ``E_y^(1)`` in place of ``pi(B)``.
    """
    dil = dilation or minimal_dilation(instr)
    space = dil.space
    xi = gns_vector(state)
    w = polar_decompose(commutator_functional(a, b, state)).isometry
    jwxi = space.flatten(space.J(left_action(w, xi.blocks)))
    jxi = space.flatten(space.J(xi.blocks))
    mean_a, mean_b = _expect(state, a), _expect(state, b)
    v = dil.isometry
    eye_k = np.eye(dil.dim)
    vec_a = v @ space.left_matrix(a - mean_a) @ jwxi
    vec_b = -1j * (v @ space.left_matrix(b - mean_b) @ jxi)
    if instr.outcomes.dim == 1:
        ex = dil.first_moment()
        ny = dil.pi(b)
    else:
        ex = dil.first_moment(0)
        ny = dil.first_moment(1)
    vec_m = (ex - mean_a * eye_k) @ v @ jwxi
    vec_n = -1j * ((ny - mean_b * eye_k) @ v @ jxi)
    return ProofVectors(vec_a, vec_b, vec_m, vec_n)


def simultaneous_errors(a: AlgebraElement, b: AlgebraElement, state: NormalState,
                        instr: KrausInstrument) -> tuple[float, float]:
    """Errors of ``A`` and ``B`` read from the x- and y-marginals."""
    marg = marginal_structures(instr)
    na = noise_operator(a, marg.x)
    nb = noise_operator(b, marg.y)
    return (_root(_expect(state, na), _scale(a, na), "error of A"),
            _root(_expect(state, nb), _scale(b, nb), "error of B"))


def check_simultaneous(a, b, state, instr) -> float:
    """Margin of the strengthened relation for a joint measurement."""
    eps_a, eps_b = simultaneous_errors(a, b, state, instr)
    return branciard_margin(eps_a, eps_b, std_dev(a, state), std_dev(b, state),
                            d_bound(a, b, state))


def appleby_error(a: AlgebraElement, instr: KrausInstrument) -> float:
    """State-independent error: ``sqrt`` of the top eigenvalue of the noise operator.

    ``<rho, N>`` is affine in ``rho``, so its supremum over pure states is
    the largest eigenvalue of ``N`` over all blocks.
    """
    n = noise_operator(a, instr)
    top = max(float(oc.spectral_decompose(blk).eigenvalues[0]) for blk in n.blocks)
    return _root(top, _scale(a, n), "state-independent error")


@dataclass
class UncertaintyReport:
    """All quantities of one scenario and the margins of each relation."""

    name: str
    mode: str
    sigma_A: float
    sigma_B: float
    epsilon_A: float
    second_error: float
    C_bound: float
    D_bound: float
    margins: dict
    heisenberg_product_deficit: float
    checked: tuple = ()
    tolerance: float = MARGIN_TOL
    extras: dict = field(default_factory=dict)

    @property
    def eta_B(self) -> float | None:
        return self.second_error if self.mode == "error_disturbance" else None

    @property
    def epsilon_B(self) -> float | None:
        return self.second_error if self.mode == "simultaneous" else None

    @property
    def passed(self) -> bool:
        return all(self.margins[r] >= -self.tolerance for r in self.checked)

    @property
    def ordering_ok(self) -> bool:
        """``D >= C``, ``D <= sA sB`` and ``sA sB >= C`` up to 1e-9."""
        prod = self.sigma_A * self.sigma_B
        return (self.D_bound >= self.C_bound - 1e-9
                and self.D_bound <= prod + 1e-9
                and prod >= self.C_bound - 1e-9)

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "mode": self.mode,
            "sigma_A": self.sigma_A,
            "sigma_B": self.sigma_B,
            "epsilon_A": self.epsilon_A,
            "C_bound": self.C_bound,
            "D_bound": self.D_bound,
            "margins": dict(self.margins),
            "heisenberg_product_deficit": self.heisenberg_product_deficit,
            "checked": list(self.checked),
            "tolerance": self.tolerance,
            "passed": self.passed,
        }
        out["eta_B" if self.mode == "error_disturbance" else "epsilon_B"] = self.second_error
        out.update(self.extras)
        return out


ED_RELATIONS = ("ozawa", "branciard", "strengthened")
SIM_RELATIONS = ("ozawa", "branciard", "simultaneous")


def evaluate(a: AlgebraElement, b: AlgebraElement, state: NormalState, instr: KrausInstrument,
             name: str = "scenario", relations=None, tolerance: float = MARGIN_TOL) -> UncertaintyReport:
    """Compute every quantity for one scenario and collect the margins.

    The mode follows the instrument: scalar labels give the error-disturbance
    relations, pair labels the joint-measurement ones.
    """
    sa, sb = std_dev(a, state), std_dev(b, state)
    c, d = c_bound(a, b, state), d_bound(a, b, state)
    extras = {}
    if instr.outcomes.dim == 1:
        mode = "error_disturbance"
        eps_a, second = error(a, state, instr), disturbance(b, state, instr)
        strong_name = "strengthened"
        extras["epsilon_appleby_A"] = appleby_error(a, instr)
        default = ED_RELATIONS
    else:
        mode = "simultaneous"
        eps_a, second = simultaneous_errors(a, b, state, instr)
        strong_name = "simultaneous"
        default = SIM_RELATIONS
    margins = {
        "ozawa": ozawa_margin(eps_a, second, sa, sb, c),
        "branciard": branciard_margin(eps_a, second, sa, sb, c),
        strong_name: branciard_margin(eps_a, second, sa, sb, d),
    }
    checked = tuple(relations) if relations is not None else default
    unknown = set(checked) - set(margins)
    if unknown:
        raise ValueError(f"relations {sorted(unknown)} do not apply in {mode} mode")
    return UncertaintyReport(
        name=name,
        mode=mode,
        sigma_A=sa,
        sigma_B=sb,
        epsilon_A=eps_a,
        second_error=second,
        C_bound=c,
        D_bound=d,
        margins=margins,
        heisenberg_product_deficit=eps_a * second - c,
        checked=checked,
        tolerance=tolerance,
        extras=extras,
    )
