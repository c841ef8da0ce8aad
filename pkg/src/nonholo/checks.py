"""Property checks over sampled admissible states, shared by ``verify``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .appell import acceleration_energy_gradient, projected_coefficients
from .errors import NotCaplyginError
from .integrator import accelerations
from .oracle import ideality_check, power_of_reactions, solve_with_multipliers
from .scenarios import Scenario
from .voronec import (
    assemble_voronec,
    assemble_voronec_beta,
    b_coefficients,
    beta_coefficients,
    check_caplygin,
    dependent_accelerations,
)

EQUIVALENCE = ("voronec", "voronec-direct", "appell", "oracle")


@dataclass(frozen=True)
class CheckResult:
    name: str
    max_violation: float
    tolerance: float
    note: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.max_violation < self.tolerance)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        note = f"  {self.note}" if self.note else ""
        return f"{self.name:<24s} max={self.max_violation:.3e}  tol={self.tolerance:.0e}  {status}{note}"


def equivalence(scenario: Scenario, states) -> CheckResult:
    worst = 0.0
    for st in states:
        accs = [accelerations(scenario.model, f, st) for f in EQUIVALENCE]
        for i in range(len(accs)):
            for j in range(i + 1, len(accs)):
                worst = max(worst, float(np.max(np.abs(accs[i] - accs[j]))))
    return CheckResult("equivalence", worst, 1e-9)


def dependent_block(scenario: Scenario, states) -> CheckResult:
    worst = 0.0
    m = scenario.model.m
    for st in states:
        sol = solve_with_multipliers(scenario.model, st)
        ud = accelerations(scenario.model, "voronec", st)
        dep = dependent_accelerations(scenario.model, st, ud)
        worst = max(worst, float(np.max(np.abs(dep - sol.qddot[m:]))))
    return CheckResult("dependent-accelerations", worst, 1e-9)


def linear_reduction(scenario: Scenario, states) -> CheckResult:
    """B-path against beta-path reduced systems, and ``B1 == 0``."""
    model = scenario.model
    worst = 0.0
    for st in states:
        via_b = assemble_voronec(model, st)
        via_beta = assemble_voronec_beta(model, st)
        split = b_coefficients(model, st)
        worst = max(
            worst,
            float(np.max(np.abs(via_b.rhs - via_beta.rhs))),
            float(np.max(np.abs(via_b.mass_red - via_beta.mass_red))),
            float(np.max(np.abs(split.B1))),
        )
    return CheckResult("linear-reduction", worst, 1e-10)


def ideality(scenario: Scenario, states) -> CheckResult:
    worst = 0.0
    for st in states:
        R = solve_with_multipliers(scenario.model, st).reaction
        worst = max(worst, ideality_check(scenario.model, st, R), abs(power_of_reactions(scenario.model, st, R)))
    return CheckResult("ideality", worst, 1e-10)


def appell_identity(scenario: Scenario, states, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for st in states:
        ud = rng.uniform(-1.0, 1.0, scenario.model.m)
        coeffs = projected_coefficients(scenario.model, st)
        dS = acceleration_energy_gradient(scenario.model, st, ud)
        worst = max(worst, float(np.max(np.abs(dS - coeffs.left_side(st.u, ud)))))
    return CheckResult("appell-identity", worst, 1e-8)


def mass_symmetry(scenario: Scenario, states) -> CheckResult:
    worst = 0.0
    for st in states:
        C = projected_coefficients(scenario.model, st).C
        M = assemble_voronec(scenario.model, st).mass_red
        np.linalg.cholesky(C)
        worst = max(worst, float(np.max(np.abs(C - C.T))), float(np.max(np.abs(M - C))))
    return CheckResult("mass-symmetry", worst, 1e-12)


def beta_zero(scenario: Scenario, states) -> CheckResult:
    worst = max(float(np.max(np.abs(beta_coefficients(scenario.model, st.q)))) for st in states)
    return CheckResult("beta-zero", worst, 1e-12)


def caplygin(scenario: Scenario, states) -> CheckResult:
    worst = 0.0
    for st in states:
        try:
            check_caplygin(scenario.model, st)
        except NotCaplyginError as exc:
            return CheckResult("caplygin", float("inf"), 1e-9, note=str(exc))
        diff = accelerations(scenario.model, "caplygin", st) - accelerations(scenario.model, "voronec", st)
        worst = max(worst, float(np.max(np.abs(diff))))
    return CheckResult("caplygin", worst, 1e-9)


CHECKS = {
    "equivalence": equivalence,
    "dependent-accelerations": dependent_block,
    "linear-reduction": linear_reduction,
    "ideality": ideality,
    "appell-identity": appell_identity,
    "mass-symmetry": mass_symmetry,
    "beta-zero": beta_zero,
    "caplygin": caplygin,
}


def default_checks(scenario: Scenario) -> list[str]:
    names = ["equivalence", "dependent-accelerations", "ideality", "appell-identity", "mass-symmetry"]
    if scenario.model.constraints.linear:
        names.append("linear-reduction")
    if scenario.integrable:
        names.append("beta-zero")
    return names


def run_checks(scenario: Scenario, names, samples: int, seed: int) -> list[CheckResult]:
    states = scenario.samples(samples, seed)
    results = []
    for name in names:
        fn = CHECKS[name]
        if name == "appell-identity":
            results.append(fn(scenario, states, seed))
        else:
            results.append(fn(scenario, states))
    return results
