import math
from dataclasses import dataclass, field
from typing import Dict, Any, Tuple

FIT_RESULT_SCHEMA = "nv-magnetometry/fit-result@1"


@dataclass(frozen=True)
class FitResult:
    """Outcome of a least-squares fit.

    `values` and `uncertainties` are keyed by parameter name, in the order
    given by `names`. Fixed parameters have zero uncertainty. A failed or
    non-converged fit keeps its best-so-far values and sets
    `converged=False`; `message` says why.
    """

    names: Tuple[str, ...]
    values: Dict[str, float]
    uncertainties: Dict[str, float]
    residual_norm: float
    iterations: int
    converged: bool
    message: str = ""
    provenance: Dict[str, Any] = field(default_factory=dict)

    def __getitem__(self, name: str) -> float:
        return self.values[name]

    def relative_error(self, name: str, truth: float) -> float:
        return abs(self.values[name] - truth) / abs(truth)

    @classmethod
    def failure(cls, names, initial: Dict[str, float], message: str,
                provenance=None) -> "FitResult":
        names = tuple(names)
        return cls(
            names=names,
            values={name: float(initial.get(name, math.nan))
                    for name in names},
            uncertainties={name: math.nan for name in names},
            residual_norm=math.nan,
            iterations=0,
            converged=False,
            message=message,
            provenance=dict(provenance or {}),
        )

    def to_document(self) -> Dict[str, Any]:
        def clean(value):
            # NaN and infinities are not valid JSON
            return value if math.isfinite(value) else None

        return {
            "schema": FIT_RESULT_SCHEMA,
            "parameters": [
                {
                    "name": name,
                    "value": clean(self.values[name]),
                    "uncertainty": clean(self.uncertainties[name]),
                }
                for name in self.names
            ],
            "residual_norm": clean(self.residual_norm),
            "iterations": self.iterations,
            "converged": self.converged,
            "message": self.message,
            "provenance": self.provenance,
        }

    @classmethod
    def from_document(cls, document: Dict[str, Any]) -> "FitResult":
        def restore(value):
            return math.nan if value is None else float(value)

        parameters = document["parameters"]
        return cls(
            names=tuple(item["name"] for item in parameters),
            values={item["name"]: restore(item["value"])
                    for item in parameters},
            uncertainties={item["name"]: restore(item["uncertainty"])
                           for item in parameters},
            residual_norm=restore(document["residual_norm"]),
            iterations=int(document["iterations"]),
            converged=bool(document["converged"]),
            message=document.get("message", ""),
            provenance=document.get("provenance", {}),
        )
