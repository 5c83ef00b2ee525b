"""Two-input/two-output bipartite boxes and their elementary analysis.

A box is the joint conditional distribution p(ab|xy) with x, y, a, b all
binary.  Entries are stored flat in lexicographic (x, y, a, b) order, either
as `fractions.Fraction` (exact mode) or `float`.  Outcome 0 corresponds to
the +1 eigenvalue in quantum constructions, so correlators carry (-1)^a
signs with a = 0 meaning +1.

Exact mode is used for every table whose entries are rational (all the
built-in reference tables are); floating mode covers families with
irrational entries.  All types are immutable and all operations are pure.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import BoxValidationError, SignalingBoxError

Number = Union[Fraction, float]

FLOAT_NORMALIZATION_TOL = 1e-12
DEFAULT_NS_TOL = 1e-9

BITS = (0, 1)


def _index(x: int, y: int, a: int, b: int) -> int:
    return 8 * x + 4 * y + 2 * a + b


def all_settings() -> Iterable[tuple[int, int, int, int]]:
    """All 16 index tuples (x, y, a, b) in lexicographic order."""
    return itertools.product(BITS, BITS, BITS, BITS)


@dataclass(frozen=True)
class SinglePartyBox:
    """Conditional distribution q(out|in) for one party, binary in/out.

    `q` is flat in (input, output) order; exact entries are Fractions.
    """

    q: tuple[Number, Number, Number, Number]
    exact: bool = True

    def __post_init__(self):
        for inp in BITS:
            s = self.q[2 * inp] + self.q[2 * inp + 1]
            if self.exact:
                ok = s == 1 and all(self.q[2 * inp + o] >= 0 for o in BITS)
            else:
                ok = abs(s - 1) <= FLOAT_NORMALIZATION_TOL and all(
                    self.q[2 * inp + o] >= -FLOAT_NORMALIZATION_TOL for o in BITS
                )
            if not ok:
                raise BoxValidationError(
                    f"single-party box not normalized/nonnegative at input {inp}: {self.q}"
                )

    def value(self, inp: int, out: int) -> Number:
        return self.q[2 * inp + out]

    def prob0(self, inp: int) -> Number:
        """Probability of outcome 0 for the given input."""
        return self.q[2 * inp]

    @staticmethod
    def from_prob0(p0_in0: Number, p0_in1: Number, exact: bool = True) -> "SinglePartyBox":
        one = Fraction(1) if exact else 1.0
        return SinglePartyBox((p0_in0, one - p0_in0, p0_in1, one - p0_in1), exact=exact)

    @staticmethod
    def deterministic(alpha: int, beta: int) -> "SinglePartyBox":
        """The response out = alpha*in XOR beta."""
        q = [Fraction(0)] * 4
        for inp in BITS:
            q[2 * inp + ((alpha * inp) ^ beta)] = Fraction(1)
        return SinglePartyBox(tuple(q), exact=True)

    @staticmethod
    def uniform() -> "SinglePartyBox":
        return SinglePartyBox((Fraction(1, 2),) * 4, exact=True)


@dataclass(frozen=True)
class Box:
    """Joint table p(ab|xy), 16 entries flat in (x, y, a, b) order."""

    p: tuple[Number, ...]
    exact: bool = True

    def __post_init__(self):
        if len(self.p) != 16:
            raise BoxValidationError(f"box needs 16 entries, got {len(self.p)}")
        for x, y in itertools.product(BITS, BITS):
            s = sum(self.p[_index(x, y, a, b)] for a in BITS for b in BITS)
            if self.exact:
                if s != 1:
                    raise BoxValidationError(f"block (x={x}, y={y}) sums to {s}, not 1")
            elif abs(s - 1) > FLOAT_NORMALIZATION_TOL:
                raise BoxValidationError(f"block (x={x}, y={y}) sums to {s}, not 1")
        for v in self.p:
            if self.exact:
                if v < 0:
                    raise BoxValidationError(f"negative entry {v}")
            elif v < -FLOAT_NORMALIZATION_TOL:
                raise BoxValidationError(f"negative entry {v}")

    def value(self, x: int, y: int, a: int, b: int) -> Number:
        return self.p[_index(x, y, a, b)]

    def to_float(self) -> "Box":
        if not self.exact:
            return self
        return Box(tuple(float(v) for v in self.p), exact=False)

    @staticmethod
    def from_function(fn, exact: bool = True) -> "Box":
        return Box(tuple(fn(x, y, a, b) for x, y, a, b in all_settings()), exact=exact)

    @staticmethod
    def uniform() -> "Box":
        return Box((Fraction(1, 4),) * 16, exact=True)


@dataclass(frozen=True)
class Relabeling:
    """Local reversible relabeling of inputs and (input-conditioned) outputs.

    Alice flips her input when `flip_x` and maps a -> a XOR alpha*x XOR beta
    (x the relabeled input); Bob's parameters are the analogues.  The output
    flips alone are involutions; composing with an input flip generally is
    not, so `inverse` is provided for exact undo.
    """

    flip_x: int = 0
    alpha: int = 0
    beta: int = 0
    flip_y: int = 0
    gamma: int = 0
    epsilon: int = 0

    def inverse(self) -> "Relabeling":
        return Relabeling(
            self.flip_x,
            self.alpha,
            self.beta ^ (self.alpha & self.flip_x),
            self.flip_y,
            self.gamma,
            self.epsilon ^ (self.gamma & self.flip_y),
        )

    @staticmethod
    def identity() -> "Relabeling":
        return Relabeling()

    @staticmethod
    def all() -> Iterable["Relabeling"]:
        """The 64 relabelings (8 per side)."""
        for fx, al, be, fy, ga, ep in itertools.product(BITS, repeat=6):
            yield Relabeling(fx, al, be, fy, ga, ep)


def apply_lro(box: Box, r: Relabeling) -> Box:
    """Relabeled box p'(ab|xy) = p(a^alpha*x^beta, b^gamma*y^eps | x^fx, y^fy)."""
    values = tuple(
        box.p[
            _index(
                x ^ r.flip_x,
                y ^ r.flip_y,
                a ^ (r.alpha & x) ^ r.beta,
                b ^ (r.gamma & y) ^ r.epsilon,
            )
        ]
        for x, y, a, b in all_settings()
    )
    return Box(values, exact=box.exact)


def deterministic_box(alpha: int, beta: int, gamma: int, epsilon: int) -> Box:
    """The vertex with a = alpha*x XOR beta and b = gamma*y XOR epsilon."""
    for v in (alpha, beta, gamma, epsilon):
        if v not in BITS:
            raise ValueError("deterministic box parameters must be bits")
    return Box.from_function(
        lambda x, y, a, b: Fraction(1)
        if a == (alpha * x) ^ beta and b == (gamma * y) ^ epsilon
        else Fraction(0)
    )


def deterministic_boxes() -> list[Box]:
    """The 16 vertices, lexicographic in (alpha, beta, gamma, epsilon)."""
    return [
        deterministic_box(al, be, ga, ep)
        for al, be, ga, ep in itertools.product(BITS, repeat=4)
    ]


def pr_box() -> Box:
    """The canonical extremal nonlocal box: a XOR b = x*y, uniform otherwise."""
    return Box.from_function(
        lambda x, y, a, b: Fraction(1, 2) if (a ^ b) == (x & y) else Fraction(0)
    )


def mix(boxes: Sequence[Box], weights: Sequence[Number]) -> Box:
    """Convex mixture; exact iff every box and weight is exact."""
    exact = all(b.exact for b in boxes) and all(isinstance(w, Fraction) for w in weights)
    total = sum(weights)
    if exact:
        if total != 1 or any(w < 0 for w in weights):
            raise BoxValidationError("mixture weights must be a probability vector")
    elif abs(total - 1) > FLOAT_NORMALIZATION_TOL or any(w < -FLOAT_NORMALIZATION_TOL for w in weights):
        raise BoxValidationError("mixture weights must be a probability vector")
    zero = Fraction(0) if exact else 0.0
    entries = []
    for i in range(16):
        acc = zero
        for b, w in zip(boxes, weights):
            acc += w * (b.p[i] if exact else float(b.p[i]))
        entries.append(acc)
    return Box(tuple(entries), exact=exact)


def _candidate_marginals(box: Box, side: str) -> tuple[list, list]:
    """Marginals computed with the other input fixed to 0 and to 1."""
    cand = []
    for other in BITS:
        if side == "alice":
            q = [
                sum(box.p[_index(inp, other, out, b)] for b in BITS)
                for inp in BITS
                for out in BITS
            ]
        else:
            q = [
                sum(box.p[_index(other, inp, a, out)] for a in BITS)
                for inp in BITS
                for out in BITS
            ]
        cand.append(q)
    return cand[0], cand[1]


def is_nosignaling(box: Box, tol: float = DEFAULT_NS_TOL) -> bool:
    """True iff both parties' marginals are independent of the remote input."""
    for side in ("alice", "bob"):
        m0, m1 = _candidate_marginals(box, side)
        if box.exact:
            if m0 != m1:
                return False
        elif any(abs(u - v) > tol for u, v in zip(m0, m1)):
            return False
    return True


def marginal(box: Box, side: str, tol: float = DEFAULT_NS_TOL) -> SinglePartyBox:
    """Single-party marginal; raises SignalingBoxError when input-dependent."""
    if side not in ("alice", "bob"):
        raise ValueError("side must be 'alice' or 'bob'")
    m0, m1 = _candidate_marginals(box, side)
    if box.exact:
        if m0 != m1:
            raise SignalingBoxError(f"{side} marginal depends on the remote input")
    elif any(abs(u - v) > tol for u, v in zip(m0, m1)):
        raise SignalingBoxError(f"{side} marginal depends on the remote input")
    return SinglePartyBox(tuple(m0), exact=box.exact)


def correlator(box: Box, x: int, y: int) -> float:
    """<A_x B_y> = sum (-1)^(a XOR b) p(ab|xy); exact for exact boxes."""
    val = sum(
        (1 if (a ^ b) == 0 else -1) * box.p[_index(x, y, a, b)]
        for a in BITS
        for b in BITS
    )
    return val


def chsh_value(box: Box, alpha: int, beta: int, gamma: int) -> float:
    """One of the 8 facet functionals, signs set by (alpha, beta, gamma)."""

    def sgn(e: int) -> int:
        return 1 if e % 2 == 0 else -1

    return (
        sgn(gamma) * correlator(box, 0, 0)
        + sgn(beta ^ gamma) * correlator(box, 0, 1)
        + sgn(alpha ^ gamma) * correlator(box, 1, 0)
        + sgn(alpha ^ beta ^ gamma ^ 1) * correlator(box, 1, 1)
    )


def chsh_max(box: Box):
    """Maximum of the 8 functionals; the box's CHSH score."""
    return max(
        chsh_value(box, al, be, ga) for al, be, ga in itertools.product(BITS, repeat=3)
    )


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------

_SCENARIO = {"inputs_a": 2, "inputs_b": 2, "outputs_a": 2, "outputs_b": 2}


def _fraction_str(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def box_to_json_dict(box: Box) -> dict:
    nested = []
    for x in BITS:
        plane = []
        for y in BITS:
            block = []
            for a in BITS:
                row = []
                for b in BITS:
                    v = box.p[_index(x, y, a, b)]
                    row.append(_fraction_str(v) if box.exact else float(v))
                block.append(row)
            plane.append(block)
        nested.append(plane)
    return {
        "scenario": dict(_SCENARIO),
        "mode": "rational" if box.exact else "float",
        "p": nested,
    }


def box_from_json_dict(data: dict) -> Box:
    try:
        scenario = data["scenario"]
        mode = data["mode"]
        nested = data["p"]
    except (KeyError, TypeError) as exc:
        raise BoxValidationError(f"malformed box object: missing {exc}") from exc
    if dict(scenario) != _SCENARIO:
        raise BoxValidationError(f"unsupported scenario {scenario}")
    if mode not in ("rational", "float"):
        raise BoxValidationError(f"unknown mode {mode!r}")
    entries = []
    try:
        for x, y, a, b in all_settings():
            raw = nested[x][y][a][b]
            if mode == "rational":
                entries.append(Fraction(str(raw)))
            else:
                entries.append(float(raw))
    except (IndexError, ValueError, ZeroDivisionError, TypeError) as exc:
        raise BoxValidationError(f"malformed probability table: {exc}") from exc
    return Box(tuple(entries), exact=(mode == "rational"))


def nearly_equal(b1: Box, b2: Box, tol: float = 1e-12) -> bool:
    if b1.exact and b2.exact:
        return b1.p == b2.p
    return all(abs(float(u) - float(v)) <= tol for u, v in zip(b1.p, b2.p))


def max_deviation(b1: Box, b2: Box) -> float:
    return max(abs(float(u) - float(v)) for u, v in zip(b1.p, b2.p))


def residual_sq(b1: Box, b2: Box) -> float:
    return math.fsum((float(u) - float(v)) ** 2 for u, v in zip(b1.p, b2.p))
