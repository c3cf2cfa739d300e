"""Small circuits that break one assumption of the variance bounds each.

Every fixture bundles a circuit, an observable, an initial state and a check of
the claimed pathology. ``fixtures/*.json`` holds the same data in the circuit
file format (generated by :func:`write_fixture_files`) so the fixtures can be
fed to the command-line tools.

``light_cone_demo`` is a class-valid three-qubit circuit whose last rotation
decides between a light-cone of one and three qubits; it is used to check the
bound arithmetic on a two-point cone distribution.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable

import numpy as np

from . import sampling
from .circuit import Gate, ParameterizedCircuit, ProductState, parse_state, validate_circuit_class
from .estimator import orthogonality
from .oracle import DenseSimulator, moment_suite
from .pauli import Observable

__all__ = [
    "Fixture",
    "FixtureResult",
    "FIXTURES",
    "COUNTEREXAMPLES",
    "get_fixture",
    "load_fixture_file",
    "run_fixture",
    "run_counterexamples",
    "write_fixture_files",
    "range_a_variance",
]


@dataclass(frozen=True)
class Fixture:
    name: str
    description: str
    circuit: ParameterizedCircuit
    observable: Observable
    state: str = "zero"

    @property
    def rho(self) -> ProductState:
        return parse_state(self.state, self.circuit.n)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "state": self.state,
            "observable": [[c, p.label()] for c, p in self.observable],
            "circuit": self.circuit.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Fixture":
        return cls(
            d["name"],
            d["description"],
            ParameterizedCircuit.from_dict(d["circuit"]),
            Observable.from_labels([(float(c), lab) for c, lab in d["observable"]]),
            d.get("state", "zero"),
        )


def _rot(axis, q, i):
    return Gate.rotation(axis, q, i)


def _non_adjacent() -> Fixture:
    gates = (_rot("Y", 0, 0), _rot("Y", 1, 1), Gate("CNOT", (0, 1)), _rot("X", 0, 2), _rot("X", 1, 3))
    return Fixture(
        "non_adjacent_layers",
        "Orthogonal Y and X layers separated by a CNOT; L = 0 for H = XZ from |00>.",
        ParameterizedCircuit(2, gates, 4),
        Observable.from_labels([(1.0, "XZ")]),
    )


def _pure_ry() -> Fixture:
    gates = (_rot("Y", 0, 0), _rot("Y", 1, 1), Gate("CNOT", (0, 1)), _rot("Y", 0, 2), _rot("Y", 1, 3))
    return Fixture(
        "pure_ry",
        "Only Y rotations and CNOTs keep amplitudes real, so every Y expectation is 0.",
        ParameterizedCircuit(2, gates, 4),
        Observable.from_labels([(1.0, "YI")]),
    )


def _t_gate() -> Fixture:
    gates = (_rot("Y", 0, 0), _rot("X", 0, 1), Gate("T", (0,)))
    return Fixture(
        "t_gate",
        "A trailing T gate correlates the X and Y terms: E[L_X L_Y] = 1/8.",
        ParameterizedCircuit(1, gates, 2),
        Observable.from_labels([(1.0, "X"), (1.0, "Y")]),
    )


def _range_a() -> Fixture:
    gates = (_rot("X", 0, 0), _rot("X", 1, 1), _rot("Y", 0, 2), _rot("Y", 1, 3))
    return Fixture(
        "range_a",
        "L = cos(t0) cos(t2) for H = ZI; angles drawn from [-pi/a, pi/a] give Var[L] <= 5/a^4.",
        ParameterizedCircuit(2, gates, 4),
        Observable.from_labels([(1.0, "ZI")]),
    )


def _z_rotation() -> Fixture:
    gates = (_rot("Z", 0, 0), _rot("Y", 1, 1), _rot("Y", 0, 2), _rot("Z", 1, 3), Gate("CNOT", (0, 1)))
    return Fixture(
        "initial_z_rotation",
        "A first-layer Z rotation acting on |0> is idle; L = 0 for H = YX and Omega = 0.",
        ParameterizedCircuit(2, gates, 4),
        Observable.from_labels([(1.0, "YX")]),
    )


def _dependent() -> Fixture:
    gates = (_rot("Y", 0, 0), _rot("Y", 1, 0), _rot("Z", 0, 1), _rot("Z", 1, 1))
    return Fixture(
        "dependent_parameters",
        "Both qubits share their angles, so the terms of H = XI - IX cancel exactly.",
        ParameterizedCircuit(2, gates, 2),
        Observable.from_labels([(1.0, "XI"), (-1.0, "IX")]),
    )


def _light_cone_demo() -> Fixture:
    gates = (
        _rot("Y", 0, 0), _rot("Y", 1, 1), _rot("Y", 2, 2),
        _rot("Z", 0, 3), _rot("Z", 1, 4), _rot("Z", 2, 5),
        Gate("CNOT", (1, 2)), Gate("CNOT", (0, 1)),
        _rot("Y", 0, 6),
    )
    return Fixture(
        "light_cone_demo",
        "Z on qubit 0 stays local when the last Y rotation is idle and spreads to all "
        "three qubits through the CNOT ladder when it is a quarter turn.",
        ParameterizedCircuit(3, gates, 7),
        Observable.from_labels([(1.0, "ZII")]),
    )


FIXTURES: dict[str, Callable[[], Fixture]] = {
    "non_adjacent_layers": _non_adjacent,
    "pure_ry": _pure_ry,
    "t_gate": _t_gate,
    "range_a": _range_a,
    "initial_z_rotation": _z_rotation,
    "dependent_parameters": _dependent,
    "light_cone_demo": _light_cone_demo,
}
COUNTEREXAMPLES = (
    "non_adjacent_layers",
    "pure_ry",
    "t_gate",
    "range_a",
    "initial_z_rotation",
    "dependent_parameters",
)


def get_fixture(name: str) -> Fixture:
    try:
        return FIXTURES[name]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}") from None


def load_fixture_file(name: str) -> Fixture:
    """Read a shipped fixture from the package's ``fixtures`` directory."""
    text = resources.files("pqcbounds").joinpath("fixtures", f"{name}.json").read_text()
    return Fixture.from_dict(json.loads(text))


def write_fixture_files(directory: str | Path) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    out = []
    for name in FIXTURES:
        path = directory / f"{name}.json"
        path.write_text(json.dumps(get_fixture(name).to_dict(), indent=1) + "\n")
        out.append(path)
    return out


# checks -----------------------------------------------------------------------

@dataclass
class FixtureResult:
    name: str
    passed: bool
    claim: str
    details: dict = field(default_factory=dict)


def _max_abs_loss(f: Fixture, n_theta: int, seed: int) -> float:
    sim = DenseSimulator(f.circuit, f.rho)
    thetas = next(sampling.uniform_angles(seed, n_theta, f.circuit.m))
    return float(np.max(np.abs(sim.loss(thetas, f.observable))))


def range_a_variance(a: float) -> float:
    """Closed-form ``Var[cos t0 cos t2]`` for angles uniform on ``[-pi/a, pi/a]``."""
    b = math.pi / a
    m1 = math.sin(b) / b
    m2 = 0.5 + math.sin(2 * b) / (4 * b)
    return m2 * m2 - m1**4


def run_fixture(name: str, seed: int = 0, n_theta: int = 100, n_samples: int | None = None) -> FixtureResult:
    """Check the pathology claimed for fixture ``name``."""
    f = get_fixture(name)
    report = validate_circuit_class(f.circuit)
    if name in ("non_adjacent_layers", "pure_ry", "dependent_parameters"):
        worst = _max_abs_loss(f, n_theta, seed)
        return FixtureResult(
            name, worst < 1e-12, "|L(theta)| < 1e-12 on random angles",
            {"max_abs_loss": worst, "validation": str(report)},
        )
    if name == "initial_z_rotation":
        worst = _max_abs_loss(f, n_theta, seed)
        omega = orthogonality(f.rho, f.circuit.first_layer_axes)
        return FixtureResult(
            name, worst < 1e-12 and omega == 0.0, "|L(theta)| < 1e-12 and Omega(rho) = 0",
            {"max_abs_loss": worst, "omega": omega, "validation": str(report)},
        )
    if name == "t_gate":
        n = n_samples or 1_000_000
        rep = moment_suite(f.circuit, f.observable, f.rho, n, seed=seed)
        est, se = next(iter(rep.cross_moments.values()))
        z = (est - 0.125) / se
        return FixtureResult(
            name, abs(z) < 4, "E[L_X L_Y] = 1/8 within 4 standard errors",
            {"estimate": est, "se": se, "z": z, "n_samples": n, "validation": str(report)},
        )
    if name == "range_a":
        n = n_samples or 100_000
        details, ok = {}, True
        for a in (2, 4):
            rep = moment_suite(f.circuit, f.observable, f.rho, n, range_scale=1.0 / a, seed=seed)
            var, se = rep.loss_variance
            cap = 5.0 / a**4
            details[f"a={a}"] = {"variance": var, "se": se, "cap": cap, "closed_form": range_a_variance(a)}
            ok &= var <= cap
        return FixtureResult(name, ok, "Var[L] <= 5/a^4 for a in {2, 4}", details)
    raise KeyError(f"{name!r} has no pathology check")


def run_counterexamples(seed: int = 0) -> list[FixtureResult]:
    return [run_fixture(name, seed=seed) for name in COUNTEREXAMPLES]
