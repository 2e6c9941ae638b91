"""Result containers shared by the estimation entry points."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import ModelOrder, VarParams, classify_strict, companion_eigenvalues


@dataclass
class EstimationResult:
    """Outcome of one estimation run.

    The order label always comes from the strict modulus-1 cut on the
    companion eigenvalues of theta_hat, the same rule the Monte Carlo
    harness uses, so labels are comparable across entry points.
    """

    theta_hat: VarParams
    order: ModelOrder
    eigenvalues: list
    objective_value: float
    start_used: str
    objective_at_start: float
    converged: bool
    iterations: int
    sa_objective: float | None = None
    notes: dict = field(default_factory=dict)

    @classmethod
    def build(cls, theta_hat: VarParams, objective_value: float, start_used: str,
              objective_at_start: float, converged: bool, iterations: int,
              sa_objective: float | None = None, notes: dict | None = None) -> "EstimationResult":
        eigs = companion_eigenvalues(theta_hat)
        return cls(
            theta_hat=theta_hat,
            order=classify_strict(theta_hat),
            eigenvalues=[[float(np.real(e)), float(np.imag(e))] for e in eigs],
            objective_value=float(objective_value),
            start_used=start_used,
            objective_at_start=float(objective_at_start),
            converged=bool(converged),
            iterations=int(iterations),
            sa_objective=None if sa_objective is None else float(sa_objective),
            notes=notes or {},
        )

    def to_json_dict(self) -> dict:
        out = {
            "theta_hat": self.theta_hat.to_json_dict(),
            "order": {"n1": self.order.n1, "n2": self.order.n2, "p": self.order.p},
            "label": self.order.label,
            "eigenvalues": self.eigenvalues,
            "objective_value": self.objective_value,
            "objective_at_start": self.objective_at_start,
            "start_used": self.start_used,
            "converged": self.converged,
            "iterations": self.iterations,
        }
        if self.sa_objective is not None:
            out["sa_objective"] = self.sa_objective
        if self.notes:
            out["notes"] = self.notes
        return out
