"""Exact feasibility LP over the rationals.

Phase-1 simplex with Bland's rule on a dense Fraction tableau.  Sized for
this package's problems (tens of variables/constraints), where exactness
matters more than speed: vertex decompositions come out bit-exact and the
same input always yields the same decomposition.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


def solve_equality_feasibility(
    rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]
) -> Optional[list[Fraction]]:
    """Find x >= 0 with A x = b exactly, or None if the system is infeasible.

    Runs phase-1 simplex: minimize the sum of artificial variables.  Bland's
    rule guarantees termination and determinism.  Redundant rows are fine;
    they leave zero-level artificials in the basis.
    """
    m = len(rows)
    if m == 0:
        return []
    n = len(rows[0])
    a = [[Fraction(v) for v in row] for row in rows]
    b = [Fraction(v) for v in rhs]
    for i in range(m):
        if b[i] < 0:
            a[i] = [-v for v in a[i]]
            b[i] = -b[i]

    # Tableau columns: n structural + m artificial + rhs.
    tab = [a[i] + [ONE if j == i else ZERO for j in range(m)] + [b[i]] for i in range(m)]
    basis = [n + i for i in range(m)]
    # Objective row: minimize sum of artificials, expressed in reduced costs.
    cost = [ZERO] * (n + m) + [ZERO]
    for i in range(m):
        for j in range(n + m + 1):
            cost[j] -= tab[i][j]

    total = n + m
    while True:
        enter = next((j for j in range(total) if cost[j] < 0), None)
        if enter is None:
            break
        # Ratio test, Bland tie-break on the smallest basis index.
        leave = None
        best = None
        for i in range(m):
            if tab[i][enter] > 0:
                ratio = tab[i][-1] / tab[i][enter]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave is None:
            # Phase-1 objective is bounded below by 0, so this cannot happen.
            raise RuntimeError("unbounded phase-1 simplex")
        piv = tab[leave][enter]
        tab[leave] = [v / piv for v in tab[leave]]
        for i in range(m):
            if i != leave and tab[i][enter] != 0:
                f = tab[i][enter]
                tab[i] = [u - f * v for u, v in zip(tab[i], tab[leave])]
        if cost[enter] != 0:
            f = cost[enter]
            cost = [u - f * v for u, v in zip(cost, tab[leave])]
        basis[leave] = enter

    if -cost[-1] != 0:
        return None
    x = [ZERO] * n
    for i, var in enumerate(basis):
        if var < n:
            x[var] = tab[i][-1]
        elif tab[i][-1] != 0:
            return None
    return x


def solve_linear_system(
    rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]
) -> tuple[str, Optional[list[Fraction]], list[list[Fraction]]]:
    """Exact Gaussian elimination for A x = b (no sign constraints).

    Returns (status, particular_solution, nullspace_basis) with status one of
    'unique', 'underdetermined', 'inconsistent'.
    """
    m = len(rows)
    n = len(rows[0]) if m else 0
    aug = [[Fraction(v) for v in row] + [Fraction(rhs[i])] for i, row in enumerate(rows)]
    pivots: list[int] = []
    r = 0
    for c in range(n):
        pivot = next((i for i in range(r, m) if aug[i][c] != 0), None)
        if pivot is None:
            continue
        aug[r], aug[pivot] = aug[pivot], aug[r]
        pv = aug[r][c]
        aug[r] = [v / pv for v in aug[r]]
        for i in range(m):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [u - f * v for u, v in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if aug[i][n] != 0:
            return "inconsistent", None, []
    x = [ZERO] * n
    for i, c in enumerate(pivots):
        x[c] = aug[i][n]
    free = [c for c in range(n) if c not in pivots]
    null = []
    for fc in free:
        vec = [ZERO] * n
        vec[fc] = ONE
        for i, c in enumerate(pivots):
            vec[c] = -aug[i][fc]
        null.append(vec)
    status = "unique" if not free else "underdetermined"
    return status, x, null
