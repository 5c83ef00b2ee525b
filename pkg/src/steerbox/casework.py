"""Exact enumeration of structured dimension-2 decompositions.

A dimension-2 model with nondeterministic untrusted responses refines to a
model whose untrusted responses are deterministic and whose trusted boxes
take at most two values.  When every deterministic strategy is tied to a
single trusted box, the refinement lands in one of 25 structures:

* 6 "two-deterministic" cases: two distinct strategies, one box each;
* 7 "four-to-two" cases: all four strategies with boxes grouped 3+1 or 2+2;
* 12 "three-to-two" cases: three distinct strategies with one equal pair.

Each case is decided exactly over the rationals by elimination: zero
entries of the box force trusted-box entries to zero (all case weights are
strictly positive by construction), forced values propagate into other
entries, and the surviving linear or bilinear system is solved exactly.

Mixed assignments, where one deterministic strategy carries weight on both
trusted boxes, fall outside this enumeration; an all-infeasible report
therefore bounds only the structured families, while any feasible case is
a complete certificate.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .boxes import BITS, Box, marginal
from .errors import NonRationalBoxError, SignalingBoxError, ConfigError
from .exactlp import solve_linear_system
from .models import (
    QUBIT_MUB,
    UNCONSTRAINED,
    CaseReport,
    CaseVerdict,
    HiddenVariableModel,
    disc_violation,
)

F0 = Fraction(0)
F1 = Fraction(1)

STRATEGIES = ((0, 0), (0, 1), (1, 0), (1, 1))  # response u_out = alpha*u_in XOR beta

QUAD_GROUPINGS = {
    "a": ((0, 1, 2), (3,)),
    "b": ((0, 1, 3), (2,)),
    "c": ((0, 2, 3), (1,)),
    "d": ((1, 2, 3), (0,)),
    "e": ((0, 1), (2, 3)),
    "f": ((0, 2), (1, 3)),
    "g": ((0, 3), (1, 2)),
}

TRIPLE_SETS = ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3))
TRIPLE_PAIRINGS = (((0, 1), (2,)), ((1, 2), (0,)), ((0, 2), (1,)))


def _strategy_output(strategy: tuple[int, int], u_in: int) -> int:
    alpha, beta = strategy
    return (alpha * u_in) ^ beta


@dataclass
class _Affine:
    """const + coef * t, exact."""

    const: Fraction
    coef: Fraction = F0

    def __add__(self, other):
        return _Affine(self.const + other.const, self.coef + other.coef)

    def at(self, t: Fraction) -> Fraction:
        return self.const + self.coef * t

    @property
    def is_const(self) -> bool:
        return self.coef == 0


class _CaseProblem:
    """One enumerated case on a fixed box orientation."""

    def __init__(self, val, fmt, strategies, grouping, trusted_kind):
        self.val = val  # val(u_in, t_in, u_out, t_out) -> Fraction
        self.fmt = fmt  # entry formatter in original box coordinates
        self.strategies = strategies  # tuple of (alpha, beta)
        self.grouping = grouping  # tuple of position tuples
        self.trusted_kind = trusted_kind
        self.d = len(strategies)
        self.group_of = {}
        for g, members in enumerate(grouping):
            for pos in members:
                self.group_of[pos] = g
        # forced trusted probabilities: (group, t_in) -> Fraction 0 or 1 (value of q(0|t_in))
        self.forced: dict[tuple[int, int], Fraction] = {}
        self.weights: Optional[list[_Affine]] = None
        self.t_interval: Optional[tuple[Optional[Fraction], Optional[Fraction]]] = None
        self.had_free_direction = False

    def contrib(self, u_in: int, u_out: int) -> list[int]:
        return [
            i for i, s in enumerate(self.strategies) if _strategy_output(s, u_in) == u_out
        ]

    # -- stage A: propagate zero entries -----------------------------------

    def propagate_zeros(self) -> Optional[str]:
        for zx, zy, za, zb in itertools.product(BITS, repeat=4):
            if self.val(zx, zy, za, zb) != 0:
                continue
            source = self.fmt(zx, zy, za, zb)
            for pos in self.contrib(zx, za):
                g = self.group_of[pos]
                forced_value = F0 if zb == 0 else F1  # value of q_g(0|zy)
                prev = self.forced.get((g, zy))
                if prev is not None and prev != forced_value:
                    return (
                        f"satisfying {source}=0 forces the group-{g} trusted box to "
                        f"probability 0 for both outcomes at input {zy}"
                    )
                if prev is None:
                    self.forced[(g, zy)] = forced_value
                    conflict = self._scan_forced_entries(source)
                    if conflict:
                        return conflict
        return None

    def _scan_forced_entries(self, source: str) -> Optional[str]:
        for ex, ey, ea, eb in itertools.product(BITS, repeat=4):
            target = self.val(ex, ey, ea, eb)
            if target == 0:
                continue
            all_zero = True
            for pos in self.contrib(ex, ea):
                fval = self.forced.get((self.group_of[pos], ey))
                q_eb = None if fval is None else (fval if eb == 0 else F1 - fval)
                if q_eb != F0:
                    all_zero = False
                    break
            if all_zero and self.contrib(ex, ea):
                return (
                    f"satisfying {source}=0 forces {self.fmt(ex, ey, ea, eb)}=0, "
                    f"but the box has {self.fmt(ex, ey, ea, eb)}={target}"
                )
            if not self.contrib(ex, ea):
                return (
                    f"{self.fmt(ex, ey, ea, eb)}={target} cannot be produced: no "
                    f"strategy outputs {ea} on input {ex}"
                )
        return None

    # -- stage B: weight system ---------------------------------------------

    def solve_weights(self, marg_u) -> Optional[str]:
        rows = []
        rhs = []
        for u_in in BITS:
            rows.append([F1 if pos in self.contrib(u_in, 0) else F0 for pos in range(self.d)])
            rhs.append(marg_u.prob0(u_in))
        rows.append([F1] * self.d)
        rhs.append(F1)
        status, sol, null = solve_linear_system(rows, rhs)
        if status == "inconsistent":
            return "the untrusted marginal admits no weights for these strategies"
        if status == "unique":
            self.weights = [_Affine(v) for v in sol]
            self.t_interval = None
            bad = [i for i, v in enumerate(sol) if v <= 0]
            if bad:
                i = bad[0]
                return (
                    f"weights are forced to p({''.join(map(str, self.strategies[i]))})"
                    f"={sol[i]}, but every strategy in the case must have positive weight"
                )
            return None
        if len(null) > 1:
            return None  # handled by the polynomial fallback
        direction = null[0]
        self.weights = [_Affine(c, n) for c, n in zip(sol, direction)]
        lo, hi = None, None
        for w in self.weights:
            if w.coef == 0:
                if w.const <= 0:
                    return (
                        "weights are forced nonpositive for one strategy, but every "
                        "strategy in the case must have positive weight"
                    )
            elif w.coef > 0:
                bound = -w.const / w.coef
                lo = bound if lo is None or bound > lo else lo
            else:
                bound = -w.const / w.coef
                hi = bound if hi is None or bound < hi else hi
        if lo is not None and hi is not None and lo >= hi:
            return "no strictly positive weights exist for these strategies"
        self.t_interval = (lo, hi)
        return None

    # -- stage C: interval bounds with forced values ------------------------

    def _weight_range(self, positions) -> tuple[Fraction, Fraction]:
        total = _Affine(F0)
        for pos in positions:
            total = total + self.weights[pos]
        if total.is_const or self.t_interval is None:
            v = total.const
            return v, v
        lo, hi = self.t_interval
        # Closed endpoints are sound for bounding.
        candidates = []
        for bound in (lo, hi):
            if bound is not None:
                candidates.append(total.at(bound))
        if lo is None or hi is None:
            # Weight sums are probabilities, hence bounded in [0, 1] anyway.
            candidates.extend([F0, F1])
        return min(candidates), max(candidates)

    def bound_check(self) -> Optional[str]:
        if self.weights is None:
            return None
        for ex, ey, ea, eb in itertools.product(BITS, repeat=4):
            target = self.val(ex, ey, ea, eb)
            lo_total, hi_total = F0, F0
            for pos in self.contrib(ex, ea):
                fval = self.forced.get((self.group_of[pos], ey))
                w_lo, w_hi = self._weight_range([pos])
                if fval is None:
                    hi_total += w_hi
                else:
                    q_eb = fval if eb == 0 else F1 - fval
                    lo_total += w_lo * q_eb
                    hi_total += w_hi * q_eb
            if target > hi_total:
                return (
                    f"after the forced zero entries, {self.fmt(ex, ey, ea, eb)} can be "
                    f"at most {hi_total} < {target}"
                )
            if target < lo_total:
                return (
                    f"after the forced zero entries, {self.fmt(ex, ey, ea, eb)} is at "
                    f"least {lo_total} > {target}"
                )
        return None

    # -- stage D: exact solve of the remaining system -----------------------

    def _equations(self):
        """Equations for trusted outcome 0: (t_in, coeffs per group, rhs)."""
        eqs = []
        for t_in in BITS:
            for u_in, u_out in itertools.product(BITS, BITS):
                if not self.contrib(u_in, u_out):
                    continue
                group_coeff = {}
                for pos in self.contrib(u_in, u_out):
                    g = self.group_of[pos]
                    group_coeff[g] = group_coeff.get(g, _Affine(F0)) + self.weights[pos]
                eqs.append((t_in, group_coeff, self.val(u_in, t_in, u_out, 0)))
        return eqs

    def solve_remaining(self):
        """Returns (error_trace, solution) where solution is (t, qvalues).

        qvalues maps (group, t_in) -> Fraction.  `t` is None when the weight
        system was already unique.
        """
        if self.weights is None:
            return "UNDECIDED: the weight system has several free parameters", None
        unique_t = self.t_interval is None and all(w.is_const for w in self.weights)
        if unique_t:
            return self._solve_with_t(None)
        return self._solve_param()

    def _solve_with_t(self, t: Optional[Fraction]):
        weights = [w.at(t) if t is not None else w.const for w in self.weights]
        qvalues = dict(self.forced)
        for t_in in BITS:
            unknown = [g for g in range(len(self.grouping)) if (g, t_in) not in qvalues]
            rows, rhs = [], []
            for u_in, u_out in itertools.product(BITS, BITS):
                contrib = self.contrib(u_in, u_out)
                if not contrib:
                    continue
                coeff = {g: F0 for g in unknown}
                value = self.val(u_in, t_in, u_out, 0)
                for pos in contrib:
                    g = self.group_of[pos]
                    w = weights[pos]
                    if (g, t_in) in qvalues:
                        value -= w * qvalues[(g, t_in)]
                    else:
                        coeff[g] += w
                rows.append([coeff[g] for g in unknown])
                rhs.append(value)
            if unknown:
                status, sol, null = solve_linear_system(rows, rhs)
                if status == "inconsistent":
                    return (
                        f"the eliminated trusted-box system at input {t_in} is inconsistent",
                        None,
                    )
                if status == "underdetermined":
                    self.had_free_direction = True
                    sol = list(sol)
                    for vec in null:
                        # Pick the free direction's shift keeping every
                        # coordinate in [0, 1], as central as possible.
                        lo, hi = None, None
                        for s_val, c in zip(sol, vec):
                            if c == 0:
                                continue
                            b1 = -s_val / c
                            b2 = (1 - s_val) / c
                            lo_i, hi_i = (b1, b2) if b1 <= b2 else (b2, b1)
                            lo = lo_i if lo is None or lo_i > lo else lo
                            hi = hi_i if hi is None or hi_i < hi else hi
                        if lo is not None and hi is not None and lo > hi:
                            return (
                                f"the free direction of the trusted-box system at "
                                f"input {t_in} cannot stay inside [0, 1]",
                                None,
                            )
                        idx = next(i for i, c in enumerate(vec) if c != 0)
                        target = (Fraction(1, 2) - sol[idx]) / vec[idx]
                        if lo is not None and target < lo:
                            target = lo
                        if hi is not None and target > hi:
                            target = hi
                        sol = [s + target * c for s, c in zip(sol, vec)]
                for g, v in zip(unknown, sol):
                    qvalues[(g, t_in)] = v
            else:
                for row_vals, target in zip(rows, rhs):
                    if target != 0:
                        return (
                            f"the eliminated trusted-box system at input {t_in} is inconsistent",
                            None,
                        )
        for (g, t_in), v in qvalues.items():
            if not 0 <= v <= 1:
                return (
                    f"the group-{g} trusted box needs probability {v} at input {t_in}, "
                    f"outside [0, 1]",
                    None,
                )
        return None, (t, qvalues)

    def _solve_param(self):
        """Pin the free weight parameter from equations, then finish exactly."""
        eqs = self._equations()
        qvalues = dict(self.forced)
        progress = True
        while progress:
            progress = False
            for t_in, group_coeff, rhs in eqs:
                unknown = [g for g in group_coeff if (g, t_in) not in qvalues]
                known_affine = _Affine(F0)
                for g, coeff in group_coeff.items():
                    if (g, t_in) in qvalues:
                        q = qvalues[(g, t_in)]
                        known_affine = known_affine + _Affine(coeff.const * q, coeff.coef * q)
                if len(unknown) == 1:
                    g = unknown[0]
                    coeff = group_coeff[g]
                    if coeff.is_const and known_affine.is_const and coeff.const != 0:
                        qvalues[(g, t_in)] = (rhs - known_affine.const) / coeff.const
                        progress = True
                elif not unknown:
                    # rhs == known_affine(t): affine condition on t.
                    if known_affine.coef != 0:
                        t_star = (rhs - known_affine.const) / known_affine.coef
                        return self._finish_with_t(t_star, qvalues)
                    if known_affine.const != rhs:
                        return (
                            f"the eliminated system forces "
                            f"{known_affine.const} = {rhs} at input {t_in}",
                            None,
                        )
        unresolved = any(
            (g, t_in) not in qvalues
            for t_in, group_coeff, _ in eqs
            for g in group_coeff
        )
        if unresolved:
            return self._polynomial_fallback(qvalues)
        # Every equation holds identically in t: any interior weight works.
        t_star = self._interior_t()
        if t_star is None:
            return "no strictly positive weights exist for these strategies", None
        return self._finish_with_t(t_star, qvalues)

    def _interior_t(self) -> Optional[Fraction]:
        lo, hi = self.t_interval if self.t_interval else (None, None)
        if lo is not None and hi is not None:
            return (lo + hi) / 2 if lo < hi else None
        if lo is not None:
            return lo + 1
        if hi is not None:
            return hi - 1
        return F0

    def _t_in_range(self, t: Fraction) -> bool:
        lo, hi = self.t_interval if self.t_interval else (None, None)
        if lo is not None and t <= lo:
            return False
        if hi is not None and t >= hi:
            return False
        return True

    def _finish_with_t(self, t: Fraction, qvalues):
        if not self._t_in_range(t):
            return (
                "the eliminated system pins the free weight outside the strictly "
                "positive range",
                None,
            )
        saved_forced = self.forced
        self.forced = dict(qvalues)
        try:
            return self._solve_with_t(t)
        finally:
            self.forced = saved_forced

    def _polynomial_fallback(self, qvalues):
        """Exact bilinear solve via sympy for the rare undecided layouts."""
        import sympy

        t = sympy.Symbol("t")
        symbols = {}
        for t_in in BITS:
            for g in range(len(self.grouping)):
                if (g, t_in) not in qvalues:
                    symbols[(g, t_in)] = sympy.Symbol(f"q{g}{t_in}")
        eqs = []
        for t_in, group_coeff, rhs in self._equations():
            expr = -sympy.Rational(rhs)
            for g, coeff in group_coeff.items():
                q = (
                    sympy.Rational(qvalues[(g, t_in)])
                    if (g, t_in) in qvalues
                    else symbols[(g, t_in)]
                )
                expr += (sympy.Rational(coeff.const) + sympy.Rational(coeff.coef) * t) * q
            eqs.append(sympy.expand(expr))
        variables = [t] + list(symbols.values())
        try:
            solutions = sympy.solve(eqs, variables, dict=True)
        except NotImplementedError:
            return "UNDECIDED: the bilinear elimination exceeded the exact solver", None
        if not solutions:
            return "the eliminated bilinear system has no solution at all", None
        for sol in solutions:
            free = set()
            for v in sol.values():
                free |= sympy.sympify(v).free_symbols
            free |= {v for v in variables if v not in sol}
            sample_grid = [sympy.Rational(1, 2), sympy.Rational(1, 4), sympy.Rational(3, 4), sympy.S.Zero, sympy.S.One]
            substitutions = [dict(zip(sorted(free, key=str), combo))
                             for combo in itertools.product(sample_grid, repeat=len(free))] if free else [{}]
            for sub in substitutions:
                full = {}
                for var in variables:
                    expr = sympy.sympify(sol.get(var, var)).subs(sub)
                    full[var] = sympy.nsimplify(sympy.simplify(expr))
                if not all(sympy.sympify(v).is_real for v in full.values()):
                    continue
                if not all(sympy.sympify(v).is_rational for v in full.values()):
                    continue
                t_val = Fraction(str(full[t]))
                if self.t_interval is not None and not self._t_in_range(t_val):
                    continue
                trial = dict(qvalues)
                ok = True
                for key, sym in symbols.items():
                    v = Fraction(str(full[sym]))
                    if not 0 <= v <= 1:
                        ok = False
                        break
                    trial[key] = v
                if not ok:
                    continue
                err, packed = self._finish_with_t(t_val, trial)
                if err is None:
                    return None, packed
        return (
            "UNDECIDED: the bilinear system has solutions but none of the sampled "
            "rational points is admissible",
            None,
        )

    # -- assembling the verdict ---------------------------------------------

    def verify_and_certify(self, t, qvalues, untrusted_label):
        weights = [w.at(t) if t is not None else w.const for w in self.weights]
        if any(w <= 0 for w in weights):
            return "the solved weights are not strictly positive", None
        for ex, ey, ea, eb in itertools.product(BITS, repeat=4):
            acc = F0
            for pos in self.contrib(ex, ea):
                q0 = qvalues[(self.group_of[pos], ey)]
                acc += weights[pos] * (q0 if eb == 0 else F1 - q0)
            if acc != self.val(ex, ey, ea, eb):
                return (
                    f"the solved model misses {self.fmt(ex, ey, ea, eb)}: "
                    f"{acc} != {self.val(ex, ey, ea, eb)}",
                    None,
                )
        group_boxes = []
        for g in range(len(self.grouping)):
            pair = (qvalues[(g, 0)], qvalues[(g, 1)])
            group_boxes.append(pair)
            if self.trusted_kind == QUBIT_MUB and disc_violation(*pair) > 0:
                prefix = "UNDECIDED: " if self.had_free_direction else ""
                return (
                    f"{prefix}a model exists with unconstrained trusted boxes, but the "
                    f"group-{g} box {pair} is not realizable by a qubit under two "
                    f"mutually unbiased measurements",
                    None,
                )
        group_weights = []
        responses = []
        for g, members in enumerate(self.grouping):
            wg = sum(weights[pos] for pos in members)
            group_weights.append(wg)
            responses.append(
                tuple(
                    sum(weights[pos] for pos in members if _strategy_output(self.strategies[pos], u_in) == 0)
                    / wg
                    for u_in in BITS
                )
            )
        model = HiddenVariableModel(
            untrusted=untrusted_label,
            trusted_kind=self.trusted_kind,
            weights=tuple(group_weights),
            untrusted_responses=tuple(responses),
            trusted_boxes=tuple(group_boxes),
            exact=True,
        )
        return None, model


def _case_list():
    cases = []
    for i, j in itertools.combinations(range(4), 2):
        label = f"pair-{STRATEGIES[i][0]}{STRATEGIES[i][1]}-{STRATEGIES[j][0]}{STRATEGIES[j][1]}"
        cases.append((label, "two-deterministic", (STRATEGIES[i], STRATEGIES[j]), ((0,), (1,))))
    for label, grouping in QUAD_GROUPINGS.items():
        cases.append((label, "four-to-two", STRATEGIES, grouping))
    labels = iter("abcdefghijkl")
    for triple in TRIPLE_SETS:
        strategies = tuple(STRATEGIES[i] for i in triple)
        for grouping in TRIPLE_PAIRINGS:
            cases.append((next(labels), "three-to-two", strategies, grouping))
    return cases


def enumerate_d2_cases(
    box: Box, untrusted: str = "alice", trusted_kind: str = QUBIT_MUB
) -> CaseReport:
    """Decide all 25 structured dimension-2 cases exactly for a rational box."""
    if not box.exact:
        raise NonRationalBoxError("the exact case engine requires a rational-mode box")
    if untrusted not in ("alice", "bob"):
        raise ConfigError(f"unknown untrusted side {untrusted!r}")
    if trusted_kind not in (UNCONSTRAINED, QUBIT_MUB):
        raise ConfigError(f"unknown trusted kind {trusted_kind!r}")

    marg_alice = marginal(box, "alice")  # raises SignalingBoxError when signaling
    marg_bob = marginal(box, "bob")
    if untrusted == "alice":
        val = box.value
        marg_u, marg_t = marg_alice, marg_bob

        def fmt(u_in, t_in, u_out, t_out):
            return f"P({u_out}{t_out}|{u_in}{t_in})"

    else:
        def val(u_in, t_in, u_out, t_out):
            return box.value(t_in, u_in, t_out, u_out)

        marg_u, marg_t = marg_bob, marg_alice

        def fmt(u_in, t_in, u_out, t_out):
            return f"P({t_out}{u_out}|{t_in}{u_in})"

    product = all(
        box.value(x, y, a, b) == marg_alice.value(x, a) * marg_bob.value(y, b)
        for x, y, a, b in itertools.product(BITS, repeat=4)
    )

    verdicts = []
    for label, family, strategies, grouping in _case_list():
        problem = _CaseProblem(val, fmt, strategies, grouping, trusted_kind)
        trace = problem.propagate_zeros()
        if trace is None:
            trace = problem.solve_weights(marg_u)
        if trace is None:
            trace = problem.bound_check()
        certificate = None
        if trace is None:
            trace, solution = problem.solve_remaining()
            if trace is None:
                t, qvalues = solution
                trace, certificate = problem.verify_and_certify(t, qvalues, untrusted)
        feasible = certificate is not None
        if feasible:
            trace = "an exact model exists; certificate attached"
        verdicts.append(
            CaseVerdict(
                label=label,
                family=family,
                strategies=strategies,
                grouping=grouping,
                feasible=feasible,
                trace=trace,
                certificate=certificate,
                decided=not trace.startswith("UNDECIDED"),
            )
        )
    return CaseReport(
        untrusted=untrusted,
        trusted_kind=trusted_kind,
        product_at_d1=product,
        cases=tuple(verdicts),
    )
