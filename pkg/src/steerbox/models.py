"""Hidden-variable model certificates and feasibility verdicts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from .boxes import BITS, Box, all_settings
from .errors import BoxValidationError

Number = Union[Fraction, float]

QUBIT_DISC_TOL = 1e-10
WEIGHT_SUM_TOL = 1e-12
RECONSTRUCTION_TOL = 1e-10

UNCONSTRAINED = "unconstrained"
QUBIT_MUB = "qubit-mub"


def disc_violation(q0_in0, q0_in1) -> float:
    """How far (q(0|0), q(0|1)) sits outside the two-MUB qubit disc.

    A qubit state measured along two mutually unbiased axes has Bloch
    components (2q(0|0)-1, 2q(0|1)-1) inside the unit disc; returns the
    (float) excess of the squared radius over 1, clipped at 0.
    """
    r2 = float((2 * q0_in0 - 1) ** 2 + (2 * q0_in1 - 1) ** 2)
    return max(0.0, r2 - 1.0)


@dataclass(frozen=True)
class HiddenVariableModel:
    """A d-term decomposition p(ab|xy) = sum_l w_l r_l(a|x) q_l(b|y).

    `untrusted` names the side whose responses r are arbitrary; the other
    side's responses q are the trusted boxes, possibly constrained to be
    realizable by a qubit measured along two mutually unbiased axes.
    Responses are stored as probability of outcome 0 per input:
    untrusted_responses[l] = (r_l(0|in0), r_l(0|in1)) and likewise for
    trusted_boxes.
    """

    untrusted: str  # 'alice' | 'bob'
    trusted_kind: str  # UNCONSTRAINED | QUBIT_MUB
    weights: tuple[Number, ...]
    untrusted_responses: tuple[tuple[Number, Number], ...]
    trusted_boxes: tuple[tuple[Number, Number], ...]
    exact: bool = False

    def __post_init__(self):
        d = len(self.weights)
        if d < 1 or len(self.untrusted_responses) != d or len(self.trusted_boxes) != d:
            raise BoxValidationError("model arrays must share one length >= 1")
        if self.untrusted not in ("alice", "bob"):
            raise BoxValidationError(f"unknown untrusted side {self.untrusted!r}")
        if self.trusted_kind not in (UNCONSTRAINED, QUBIT_MUB):
            raise BoxValidationError(f"unknown trusted kind {self.trusted_kind!r}")
        total = sum(self.weights)
        if self.exact:
            if total != 1 or any(w < 0 for w in self.weights):
                raise BoxValidationError("weights must be a probability vector")
        elif abs(total - 1) > WEIGHT_SUM_TOL or any(w < -WEIGHT_SUM_TOL for w in self.weights):
            raise BoxValidationError("weights must be a probability vector")
        slack = 0 if self.exact else 1e-12
        for probs in self.untrusted_responses + self.trusted_boxes:
            for v in probs:
                if v < -slack or v > 1 + slack:
                    raise BoxValidationError(f"response probability {v} outside [0, 1]")

    @property
    def dimension(self) -> int:
        return len(self.weights)

    def trusted_disc_violations(self) -> list[float]:
        return [disc_violation(q0, q1) for q0, q1 in self.trusted_boxes]

    def qubit_realizable(self, tol: float = QUBIT_DISC_TOL) -> bool:
        return all(v <= tol for v in self.trusted_disc_violations())

    def box(self) -> Box:
        """Reconstruct the joint table this model generates."""
        zero = Fraction(0) if self.exact else 0.0
        one = Fraction(1) if self.exact else 1.0
        entries = []
        for x, y, a, b in all_settings():
            acc = zero
            for w, r, q in zip(self.weights, self.untrusted_responses, self.trusted_boxes):
                if self.untrusted == "alice":
                    ra = r[x] if a == 0 else one - r[x]
                    qb = q[y] if b == 0 else one - q[y]
                else:
                    ra = q[x] if a == 0 else one - q[x]
                    qb = r[y] if b == 0 else one - r[y]
                acc += w * ra * qb
            entries.append(acc)
        return Box(tuple(entries), exact=self.exact)

    def residual_against(self, box: Box) -> float:
        mine = self.box()
        return math.fsum(
            (float(u) - float(v)) ** 2 for u, v in zip(mine.p, box.p)
        )

    def reconstructs_exactly(self, box: Box) -> bool:
        return self.exact and box.exact and self.box().p == box.p

    def padded(self, d: int) -> "HiddenVariableModel":
        """Same model with zero-weight terms appended up to dimension d."""
        if d < self.dimension:
            raise ValueError("cannot pad to a smaller dimension")
        extra = d - self.dimension
        zero = Fraction(0) if self.exact else 0.0
        half = Fraction(1, 2) if self.exact else 0.5
        return HiddenVariableModel(
            untrusted=self.untrusted,
            trusted_kind=self.trusted_kind,
            weights=self.weights + (zero,) * extra,
            untrusted_responses=self.untrusted_responses + ((half, half),) * extra,
            trusted_boxes=self.trusted_boxes + ((half, half),) * extra,
            exact=self.exact,
        )

    def to_json_dict(self) -> dict:
        def enc(v):
            return f"{Fraction(v).numerator}/{Fraction(v).denominator}" if self.exact else float(v)

        return {
            "untrusted": self.untrusted,
            "trusted_kind": self.trusted_kind,
            "exact": self.exact,
            "weights": [enc(w) for w in self.weights],
            "untrusted_responses": [[enc(v) for v in pair] for pair in self.untrusted_responses],
            "trusted_boxes": [[enc(v) for v in pair] for pair in self.trusted_boxes],
        }


@dataclass(frozen=True)
class ResidualStats:
    min_residual: float
    starts: int
    seed: int
    found_at_start: Optional[int] = None

    def to_json_dict(self) -> dict:
        return {
            "min_residual": self.min_residual,
            "starts": self.starts,
            "seed": self.seed,
            "found_at_start": self.found_at_start,
        }


@dataclass(frozen=True)
class CaseVerdict:
    """One enumerated structural case for a dimension-2 decomposition.

    `decided` is False only when the exact elimination could not settle the
    case either way; an undecided case is never counted as feasible and
    blocks exact-infeasibility claims.
    """

    label: str
    family: str  # 'two-deterministic' | 'four-to-two' | 'three-to-two'
    strategies: tuple[tuple[int, int], ...]
    grouping: tuple[tuple[int, ...], ...]
    feasible: bool
    trace: str
    certificate: Optional[HiddenVariableModel] = None
    decided: bool = True

    def to_json_dict(self) -> dict:
        return {
            "label": self.label,
            "family": self.family,
            "strategies": [list(s) for s in self.strategies],
            "grouping": [list(g) for g in self.grouping],
            "feasible": self.feasible,
            "decided": self.decided,
            "trace": self.trace,
            "certificate": self.certificate.to_json_dict() if self.certificate else None,
        }


@dataclass(frozen=True)
class CaseReport:
    """Exact verdicts for every enumerated dimension-2 case structure.

    Covers models built from distinct deterministic untrusted strategies
    whose trusted boxes take at most two values, with each strategy tied to
    a single trusted box.  Mixed assignments (one strategy splitting its
    weight across both trusted boxes) fall outside the enumeration, so
    `any_feasible == False` does not by itself exclude every dimension-2
    model; a feasible case is always a valid certificate.
    """

    untrusted: str
    trusted_kind: str
    product_at_d1: bool
    cases: tuple[CaseVerdict, ...]

    @property
    def any_feasible(self) -> bool:
        return self.product_at_d1 or any(c.feasible for c in self.cases)

    @property
    def all_decided(self) -> bool:
        return all(c.decided for c in self.cases)

    def feasible_cases(self) -> list[CaseVerdict]:
        return [c for c in self.cases if c.feasible]

    def by_family(self, family: str) -> list[CaseVerdict]:
        return [c for c in self.cases if c.family == family]

    def to_json_dict(self) -> dict:
        return {
            "untrusted": self.untrusted,
            "trusted_kind": self.trusted_kind,
            "product_at_d1": self.product_at_d1,
            "cases": [c.to_json_dict() for c in self.cases],
        }


@dataclass(frozen=True)
class FeasibilityResult:
    """Outcome of a dimension-restricted decomposition query.

    `verdict` is 'feasible', 'infeasible-numeric', or 'infeasible-exact'.
    Feasible verdicts carry a certificate whose reconstruction error is at
    most 1e-10 (exactly zero for exact certificates).  Numeric infeasibility
    is evidence from multi-start search, never a proof; the exact tag is
    granted only when the enumerated exact case analysis agrees with the
    numeric search.
    """

    verdict: str
    certificate: Optional[HiddenVariableModel] = None
    residual_stats: Optional[ResidualStats] = None
    case_report: Optional[CaseReport] = None
    provenance: str = "numeric"

    def __post_init__(self):
        if self.verdict not in ("feasible", "infeasible-numeric", "infeasible-exact"):
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if self.verdict == "feasible" and self.certificate is None:
            raise ValueError("feasible verdicts require a certificate")

    @property
    def feasible(self) -> bool:
        return self.verdict == "feasible"

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "provenance": self.provenance,
            "certificate": self.certificate.to_json_dict() if self.certificate else None,
            "residual_stats": self.residual_stats.to_json_dict() if self.residual_stats else None,
            "case_report": self.case_report.to_json_dict() if self.case_report else None,
        }
