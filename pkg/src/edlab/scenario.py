"""Declarative scenarios, seeded sweeps and report emission.

A scenario file is YAML holding either a list of scenario mappings or a
mapping with a ``scenarios`` list. Each scenario names an algebra, a state,
two observables ``A`` and ``B`` and an instrument; an entry of the form
``{builtin: NAME}`` pulls in a shipped scenario. Complex numbers are written
as ``[re, im]``; a matrix is a list of rows.

Example
-------
.. code-block:: yaml

    scenarios:
      - name: qubit-sz
        algebra: M2
        state: {vector: [1, 0]}
        A: Z
        B: X
        instrument: {builder: projective, observable: A}
      - builtin: example-1-1
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np
import yaml

from . import builders
from . import operator_core as oc
from .algebra import AlgebraElement, NormalState, VonNeumannAlgebra
from .exceptions import EdlabError, ScenarioError
from .instrument import (
    IDENTITY_TOL,
    KrausInstrument,
    MeasuringProcess,
    instrument_from_measuring_process,
    measuring_process_from_instrument,
)
from .standard_form import d_bound_trace_oracle
from .uncertainty import MARGIN_TOL, UncertaintyReport, evaluate

__all__ = [
    "MODES",
    "FORMATS",
    "CSV_COLUMNS",
    "Scenario",
    "SweepConfig",
    "SweepResult",
    "BUILTINS",
    "builtin_names",
    "builtin_scenarios",
    "parse_complex_matrix",
    "parse_pauli_expression",
    "resolve_scenario",
    "load_scenarios",
    "run_scenario",
    "sweep_scenario",
    "run_sweep",
    "emit",
]

MODES = ("error_disturbance", "simultaneous")
FORMATS = ("text", "json", "csv")
CSV_COLUMNS = (
    "name", "sigma_A", "sigma_B", "epsilon_A", "eta_or_epsilon_B", "C", "D",
    "margin_ozawa", "margin_branciard", "margin_strengthened", "deficit",
)


@dataclass
class Scenario:
    """A resolved scenario: module objects ready for :func:`run_scenario`.

    ``process`` is set when the instrument was given as a measuring process;
    :meth:`measuring_process` falls back to a constructed realization.
    """

    name: str
    algebra: VonNeumannAlgebra
    state: NormalState
    A: AlgebraElement
    B: AlgebraElement
    instrument: KrausInstrument
    process: MeasuringProcess | None = None
    relations: tuple | None = None
    tolerance: float = MARGIN_TOL
    identity_tolerance: float = IDENTITY_TOL

    @property
    def mode(self) -> str:
        return MODES[self.instrument.outcomes.dim - 1]

    def measuring_process(self) -> MeasuringProcess:
        return self.process or measuring_process_from_instrument(self.instrument)


# -- parsing helpers ------------------------------------------------------

def _parse_scalar(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2 or not all(isinstance(t, (int, float)) for t in v):
            raise ValueError(f"complex numbers are written [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValueError(f"expected a number, got {v!r}")
    return complex(v)


def parse_complex_vector(data) -> np.ndarray:
    if not isinstance(data, (list, tuple)) or not data:
        raise ValueError("a vector is a non-empty list of entries")
    return np.array([_parse_scalar(v) for v in data], dtype=complex)


def parse_complex_matrix(data) -> np.ndarray:
    """Matrix from a list of rows whose entries are numbers or ``[re, im]``."""
    if not isinstance(data, (list, tuple)) or not data:
        raise ValueError("a matrix is a non-empty list of rows")
    rows = [parse_complex_vector(row) for row in data]
    if len({len(r) for r in rows}) != 1:
        raise ValueError("matrix rows have different lengths")
    return np.array(rows)


_TERM = re.compile(
    r"\s*([+-])?\s*((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*([IXYZ]+)\s*"
)


def parse_pauli_expression(expr: str) -> np.ndarray:
    """Real combination of Pauli words, e.g. ``"0.5*XI - ZZ"``."""
    pos, total, width = 0, None, None
    expr = expr.strip()
    while pos < len(expr):
        m = _TERM.match(expr, pos)
        if not m or m.end() == pos or (pos > 0 and not m.group(1)):
            raise ValueError(f"cannot parse Pauli expression {expr!r} at position {pos}")
        sign = -1.0 if m.group(1) == "-" else 1.0
        coeff = sign * (float(m.group(2)) if m.group(2) else 1.0)
        word = m.group(3)
        if width is not None and len(word) != width:
            raise ValueError(f"Pauli words of different lengths in {expr!r}")
        width = len(word)
        term = coeff * builders.pauli(word)
        total = term if total is None else total + term
        pos = m.end()
    if total is None:
        raise ValueError("empty Pauli expression")
    return total


# -- resolution -----------------------------------------------------------

class _Resolver:
    """Turns one scenario mapping into module objects, tracking the field path."""

    def __init__(self, name: str, identity_tol: float):
        self.name = name
        self.tol = identity_tol

    def fail(self, where: str, err) -> ScenarioError:
        return ScenarioError(self.name, where, str(err))

    def guard(self, where: str, fn: Callable, *args):
        try:
            return fn(*args)
        except ScenarioError:
            raise
        except (EdlabError, ValueError, TypeError, KeyError, IndexError) as err:
            raise self.fail(where, err) from None

    # algebra
    def algebra(self, spec) -> VonNeumannAlgebra:
        return self.guard("algebra", self._algebra, spec)

    def _algebra(self, spec) -> VonNeumannAlgebra:
        if isinstance(spec, str):
            return _named_algebra(spec)
        if isinstance(spec, dict):
            if "builtin" in spec:
                return _named_algebra(spec["builtin"])
            blocks = spec.get("blocks")
            if blocks is None:
                raise ValueError("needs 'blocks' or 'builtin'")
            basis = spec.get("basis_change")
            if basis is not None:
                basis = parse_complex_matrix(basis)
            return VonNeumannAlgebra([tuple(b) for b in blocks], basis)
        raise ValueError(f"unsupported algebra spec {spec!r}")

    # state
    def state(self, spec, alg: VonNeumannAlgebra) -> NormalState:
        return self.guard("state", self._state, spec, alg)

    def _state(self, spec, alg) -> NormalState:
        if isinstance(spec, str):
            spec = {"builtin": spec}
        if not isinstance(spec, dict):
            raise ValueError(f"unsupported state spec {spec!r}")
        if "vector" in spec:
            return alg.state_from_vector(parse_complex_vector(spec["vector"]))
        if "densities" in spec:
            return NormalState(alg, [parse_complex_matrix(d) for d in spec["densities"]])
        if "ambient_density" in spec:
            return alg.restrict_state(parse_complex_matrix(spec["ambient_density"]))
        if "builtin" in spec:
            kind = spec["builtin"]
            if kind == "maximally_mixed":
                return alg.maximally_mixed()
            if kind == "random":
                return builders.random_state(int(spec.get("seed", 0)), alg, spec.get("rank"))
            raise ValueError(f"unknown state builtin {kind!r}")
        raise ValueError("needs one of vector, densities, ambient_density, builtin")

    # observables
    def observable(self, where: str, spec, alg) -> AlgebraElement:
        x = self.guard(where, self._observable, spec, alg)
        if not x.is_self_adjoint():
            raise self.fail(where, "observable is not self-adjoint")
        return x

    def _observable(self, spec, alg) -> AlgebraElement:
        if isinstance(spec, str):
            spec = {"pauli": spec}
        if not isinstance(spec, dict):
            raise ValueError(f"unsupported observable spec {spec!r}")
        if "pauli" in spec:
            expr = spec["pauli"]
            if isinstance(expr, dict):
                expr = " + ".join(f"{float(c)!r}*{w}" for w, c in expr.items())
                expr = expr.replace("+ -", "- ")
            return alg.element_from_ambient(parse_pauli_expression(expr), tol=self.tol)
        if "blocks" in spec:
            return alg.element([parse_complex_matrix(b) for b in spec["blocks"]])
        if "ambient" in spec:
            return alg.element_from_ambient(parse_complex_matrix(spec["ambient"]), tol=self.tol)
        raise ValueError("needs one of pauli, blocks, ambient")

    # instruments
    def instrument(self, spec, alg, obs: dict) -> tuple[KrausInstrument, MeasuringProcess | None]:
        return self.guard("instrument", self._instrument, spec, alg, obs)

    def _instrument(self, spec, alg, obs):
        if not isinstance(spec, dict):
            raise ValueError(f"unsupported instrument spec {spec!r}")
        if "kraus" in spec:
            k = spec["kraus"]
            ops = [[parse_complex_matrix(m) for m in group] for group in k["operators"]]
            return KrausInstrument(alg, _labels(k["labels"]), ops, tol=self.tol), None
        if "measuring_process" in spec:
            mp = self._process(spec["measuring_process"], alg, obs)
            return instrument_from_measuring_process(mp, alg, self.tol), mp
        if "builder" in spec:
            return self._built(spec, alg, obs), None
        raise ValueError("needs one of kraus, measuring_process, builder")

    def _pick(self, ref, alg, obs) -> AlgebraElement:
        if isinstance(ref, str) and ref in obs:
            return obs[ref]
        return self._observable(ref, alg)

    def _process(self, spec, alg, obs) -> MeasuringProcess:
        if "builder" in spec:
            kind = spec["builder"]
            if kind == "controlled_shift":
                return builders.controlled_shift_process(
                    self._pick(spec.get("observable", "A"), alg, obs))
            if kind == "controlled_flip":
                return builders.controlled_flip_process()
            if kind == "from_instrument":
                return measuring_process_from_instrument(self._built(spec["instrument"], alg, obs))
            raise ValueError(f"unknown measuring-process builder {kind!r}")
        return MeasuringProcess(
            parse_complex_matrix(spec["probe_state"]),
            _labels(spec["labels"]),
            [parse_complex_matrix(f) for f in spec["projections"]],
            parse_complex_matrix(spec["unitary"]),
        )

    def _built(self, spec, alg, obs) -> KrausInstrument:
        kind = spec["builder"]
        if kind == "projective":
            return builders.projective_instrument(self._pick(spec.get("observable", "A"), alg, obs))
        if kind == "trivial":
            return builders.trivial_instrument(alg, float(spec.get("label", 0.0)))
        if kind == "random":
            return builders.random_instrument(
                int(spec.get("seed", 0)), alg, int(spec.get("outcomes", 2)),
                kraus_rank=int(spec.get("kraus_rank", 2)),
                label_dim=int(spec.get("label_dim", 1)),
                labels=_labels(spec["labels"]) if "labels" in spec else None,
            )
        if kind == "sequential":
            return builders.sequential_instrument(
                self._built(spec["first"], alg, obs), self._built(spec["second"], alg, obs))
        raise ValueError(f"unknown instrument builder {kind!r}")


def _labels(raw) -> list:
    return [tuple(float(t) for t in v) if isinstance(v, (list, tuple)) else float(v) for v in raw]


_FULL = re.compile(r"^M(\d+)$")
_AMPLIFIED = re.compile(r"^M(\d+)xI(\d+)$")


def _named_algebra(name: str) -> VonNeumannAlgebra:
    """``"M4"`` is the full algebra, ``"M2xI2"`` is ``M_2 (x) 1`` on ``C^4``."""
    if m := _FULL.match(name):
        return VonNeumannAlgebra.full(int(m.group(1)))
    if m := _AMPLIFIED.match(name):
        return VonNeumannAlgebra([(int(m.group(1)), int(m.group(2)))])
    raise ValueError(f"unknown algebra name {name!r} (use Mn or MnxIm)")


def _tolerances(spec: dict, override: float | None) -> tuple[float, float]:
    tol = spec.get("tolerance", {})
    if isinstance(tol, (int, float)):
        tol = {"margin": tol}
    margin = float(tol.get("margin", MARGIN_TOL))
    identity = float(tol.get("identity", IDENTITY_TOL))
    if override is not None:
        margin = override
    return margin, identity


def resolve_scenario(spec: dict, tolerance: float | None = None) -> Scenario:
    """Resolve one scenario mapping; ``tolerance`` overrides the margin tolerance."""
    if not isinstance(spec, dict):
        raise ScenarioError("?", "scenario", "each scenario must be a mapping")
    name = str(spec.get("name", "unnamed"))
    try:
        margin_tol, identity_tol = _tolerances(spec, tolerance)
    except (TypeError, ValueError, AttributeError) as err:
        raise ScenarioError(name, "tolerance", str(err)) from None
    r = _Resolver(name, identity_tol)
    for key in ("algebra", "state", "A", "B", "instrument"):
        if key not in spec:
            raise ScenarioError(name, key, "missing")
    alg = r.algebra(spec["algebra"])
    state = r.state(spec["state"], alg)
    obs = {"A": r.observable("A", spec["A"], alg), "B": r.observable("B", spec["B"], alg)}
    instr, process = r.instrument(spec["instrument"], alg, obs)
    mode = MODES[instr.outcomes.dim - 1]
    if spec.get("mode", mode) != mode:
        raise ScenarioError(name, "mode",
                            f"{spec['mode']!r} does not match the instrument labels ({mode})")
    relations = spec.get("relations")
    if relations is not None:
        relations = tuple(relations)
    sc = Scenario(name, alg, state, obs["A"], obs["B"], instr, process, relations,
                  margin_tol, identity_tol)
    if relations is not None:
        r.guard("relations", run_scenario, sc)
    return sc


# -- builtins -------------------------------------------------------------

_SINGLET = [0, 1 / math.sqrt(2), -1 / math.sqrt(2), 0]

BUILTINS: dict[str, tuple[str, list[dict]]] = {
    "example-1-1": (
        "sx(x)1, sy(x)1 in the singlet: D = 0 on M4, D = 1 on M2(x)1",
        [
            {"name": "example-1-1/M4", "algebra": "M4", "state": {"vector": _SINGLET},
             "A": "XI", "B": "YI", "instrument": {"builder": "trivial"}},
            {"name": "example-1-1/M2", "algebra": "M2xI2", "state": {"vector": _SINGLET},
             "A": "XI", "B": "YI", "instrument": {"builder": "trivial"}},
        ],
    ),
    "trivial-instrument-tight": (
        "identity channel with constant outcome 0; A = sx, B = sy, rho = |z+>; tight",
        [{"name": "trivial-instrument-tight", "algebra": "M2", "state": {"vector": [1, 0]},
          "A": "X", "B": "Y", "instrument": {"builder": "trivial"}}],
    ),
    "projective-spin": (
        "projective sz measurement; A = sz, B = sx, rho = |y+>; error of A is zero",
        [{"name": "projective-spin", "algebra": "M2",
          "state": {"vector": [[0.7071067811865476, 0], [0, 0.7071067811865476]]},
          "A": "Z", "B": "X", "instrument": {"builder": "projective", "observable": "A"}}],
    ),
    "controlled-flip-meter": (
        "CNOT probe meter for sz; A = sz, B = sx, rho = |x+>",
        [{"name": "controlled-flip-meter", "algebra": "M2",
          "state": {"vector": [0.7071067811865476, 0.7071067811865476]},
          "A": "Z", "B": "X",
          "instrument": {"measuring_process": {"builder": "controlled_flip"}}}],
    ),
    "simultaneous-sequential": (
        "sx then sy projective measurements as a joint measurement of A = sx, B = sy",
        [{"name": "simultaneous-sequential", "algebra": "M2", "state": {"vector": [1, 0]},
          "A": "X", "B": "Y", "mode": "simultaneous",
          "instrument": {"builder": "sequential",
                         "first": {"builder": "projective", "observable": "X"},
                         "second": {"builder": "projective", "observable": "Y"}}}],
    ),
    "subalgebra-random": (
        "seeded random instrument on M2(x)1 inside M4 with a random state",
        [{"name": "subalgebra-random", "algebra": "M2xI2",
          "state": {"builtin": "random", "seed": 7},
          "A": "0.8*XI + 0.3*ZI", "B": "YI",
          "instrument": {"builder": "random", "seed": 7, "outcomes": 3}}],
    ),
}


def builtin_names() -> list[str]:
    return list(BUILTINS)


def builtin_scenarios(name: str, tolerance: float | None = None) -> list[Scenario]:
    if name not in BUILTINS:
        raise ScenarioError(name, "builtin", f"unknown builtin; known: {', '.join(BUILTINS)}")
    return [resolve_scenario(spec, tolerance) for spec in BUILTINS[name][1]]


def load_scenarios(source, tolerance: float | None = None) -> list[Scenario]:
    """Scenarios from a YAML path, YAML text or already-parsed data."""
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source
                                    and Path(source).exists()):
        text = Path(source).read_text()
        data = yaml.safe_load(text)
    elif isinstance(source, str):
        data = yaml.safe_load(source)
    else:
        data = source
    if isinstance(data, dict) and "scenarios" in data:
        data = data["scenarios"]
    if isinstance(data, dict):
        data = [data]
    if not isinstance(data, list):
        raise ScenarioError("?", "scenarios", "expected a list of scenarios")
    out: list[Scenario] = []
    for entry in data:
        if isinstance(entry, dict) and set(entry) <= {"builtin", "tolerance"} and "builtin" in entry:
            tol = tolerance if tolerance is not None else entry.get("tolerance")
            out.extend(builtin_scenarios(entry["builtin"], tol))
        else:
            out.append(resolve_scenario(entry, tolerance))
    return out


def run_scenario(s: Scenario) -> UncertaintyReport:
    return evaluate(s.A, s.B, s.state, s.instrument, name=s.name,
                    relations=s.relations, tolerance=s.tolerance)


# -- sweeps ---------------------------------------------------------------

@dataclass(frozen=True)
class SweepConfig:
    """Seeded random sweep; item ``i`` draws from ``default_rng([seed, i])``.

    Ambient dimensions range over ``2..dim_max`` and outcome counts over
    ``1..outcomes_max``. With ``subalgebras`` half of the items use a random
    proper block structure instead of the full matrix algebra.
    """

    seed: int
    count: int
    dim_max: int = 4
    outcomes_max: int = 5
    kraus_rank: int = 2
    subalgebras: bool = False
    mode: str = "error_disturbance"
    tolerance: float = MARGIN_TOL

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.count < 0 or self.dim_max < 2 or self.outcomes_max < 1 or self.kraus_rank < 1:
            raise ValueError("invalid sweep configuration")


@dataclass
class SweepResult:
    reports: list[UncertaintyReport]
    summary: dict = field(default_factory=dict)


def sweep_scenario(cfg: SweepConfig, index: int) -> Scenario:
    """The deterministic random scenario at position ``index`` of a sweep."""
    rng = np.random.default_rng([cfg.seed, index])
    dim = int(rng.integers(2, cfg.dim_max + 1))
    if cfg.subalgebras and rng.random() < 0.5:
        alg = builders.random_algebra(rng, dim, proper=True)
    else:
        alg = VonNeumannAlgebra.full(dim)
    n_out = int(rng.integers(1, cfg.outcomes_max + 1))
    label_dim = 2 if cfg.mode == "simultaneous" else 1
    a = builders.random_observable(rng, alg)
    b = builders.random_observable(rng, alg)
    state = builders.random_state(rng, alg)
    instr = builders.random_instrument(rng, alg, n_out, kraus_rank=cfg.kraus_rank,
                                       label_dim=label_dim)
    return Scenario(f"sweep-{cfg.seed}-{index}", alg, state, a, b, instr,
                    tolerance=cfg.tolerance)


def _sweep_item(args) -> tuple[int, UncertaintyReport]:
    cfg, index = args
    sc = sweep_scenario(cfg, index)
    report = run_scenario(sc)
    if sc.algebra.is_full:
        oracle = d_bound_trace_oracle(sc.A.embed(), sc.B.embed(), sc.state.ambient())
        report.extras["D_oracle_deviation"] = abs(report.D_bound - oracle)
    return index, report


def run_sweep(cfg: SweepConfig, jobs: int = 1) -> SweepResult:
    """Run a sweep; ``jobs > 1`` evaluates items in worker processes.

    Results are always ordered by index, so output does not depend on
    ``jobs``.
    """
    items = [(cfg, i) for i in range(cfg.count)]
    if jobs > 1 and cfg.count > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_item, items, chunksize=max(1, cfg.count // (4 * jobs))))
    else:
        results = [_sweep_item(it) for it in items]
    reports = [r for _, r in sorted(results, key=lambda t: t[0])]
    return SweepResult(reports, summarize(reports, cfg))


def summarize(reports: list[UncertaintyReport], cfg: SweepConfig | None = None) -> dict:
    relations = sorted({r for rep in reports for r in rep.margins})
    mins = {r: min(rep.margins[r] for rep in reports if r in rep.margins) for r in relations}
    deviations = [rep.extras["D_oracle_deviation"] for rep in reports
                  if "D_oracle_deviation" in rep.extras]
    out = {
        "count": len(reports),
        "min_margins": mins,
        "heisenberg_violations": sum(rep.heisenberg_product_deficit < -rep.tolerance
                                     for rep in reports),
        "max_D_oracle_deviation": max(deviations) if deviations else None,
        "full_algebra_cases": len(deviations),
        "ordering_violations": sum(not rep.ordering_ok for rep in reports),
        "failed": sum(not rep.passed for rep in reports),
    }
    if cfg is not None:
        out["config"] = {
            "seed": cfg.seed, "count": cfg.count, "dim_max": cfg.dim_max,
            "outcomes_max": cfg.outcomes_max, "kraus_rank": cfg.kraus_rank,
            "subalgebras": cfg.subalgebras, "mode": cfg.mode,
        }
    return out


# -- emission -------------------------------------------------------------

def _csv_row(rep: UncertaintyReport) -> list:
    strong = rep.margins.get("strengthened", rep.margins.get("simultaneous"))
    values = [rep.sigma_A, rep.sigma_B, rep.epsilon_A, rep.second_error, rep.C_bound,
              rep.D_bound, rep.margins["ozawa"], rep.margins["branciard"], strong,
              rep.heisenberg_product_deficit]
    return [rep.name] + [repr(float(v)) for v in values]


def _text(reports: list[UncertaintyReport], summary: dict | None) -> str:
    lines = []
    for rep in reports:
        second = "eta_B" if rep.mode == "error_disturbance" else "epsilon_B"
        lines.append(f"[{'PASS' if rep.passed else 'FAIL'}] {rep.name} ({rep.mode})")
        lines.append(f"  sigma_A = {rep.sigma_A:.10g}  sigma_B = {rep.sigma_B:.10g}")
        lines.append(f"  epsilon_A = {rep.epsilon_A:.10g}  {second} = {rep.second_error:.10g}")
        lines.append(f"  C = {rep.C_bound:.10g}  D = {rep.D_bound:.10g}")
        for rel, val in rep.margins.items():
            mark = "*" if rel in rep.checked else " "
            lines.append(f"  {mark} margin_{rel} = {val:.6e}")
        lines.append(f"  heisenberg deficit = {rep.heisenberg_product_deficit:.6e}")
    if summary is not None:
        lines.append("summary:")
        for key, val in summary.items():
            if key != "config":
                lines.append(f"  {key}: {val}")
    return "\n".join(lines) + ("\n" if lines else "")


def emit(reports, format: str = "text", summary: dict | None = None) -> bytes:
    """Serialize reports as ``text``, ``json`` (sorted keys) or ``csv``."""
    if isinstance(reports, UncertaintyReport):
        reports = [reports]
    reports = list(reports)
    if format == "json":
        doc: dict[str, Any] = {"reports": [r.to_dict() for r in reports]}
        if summary is not None:
            doc["summary"] = summary
        return (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode()
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for rep in reports:
            w.writerow(_csv_row(rep))
        return buf.getvalue().encode()
    if format == "text":
        return _text(reports, summary).encode()
    raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")
