"""One- and two-qubit states, projective measurements, and Born-rule boxes.

Floating-point work uses numpy.  A small complex-rational layer (matrices of
(re, im) Fraction pairs) backs the exact path, so tables whose amplitudes
are Gaussian-rational come out as exact `Fraction` boxes; this covers the
built-in reference state together with z/x/y measurement axes.

The Hermitian eigensolver is a cyclic Jacobi iteration on the complex
matrix; at dimensions 2 and 4 it converges in a handful of sweeps.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .boxes import BITS, Box, all_settings
from .errors import InvalidAssemblageError, InvalidStateError, RangeError

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
JACOBI_OFFDIAG_TOL = 1e-13

F0 = Fraction(0)
F1 = Fraction(1)
FH = Fraction(1, 2)

# ---------------------------------------------------------------------------
# Complex-rational matrices: nested tuples of (re, im) Fraction pairs
# ---------------------------------------------------------------------------

CRat = tuple[Fraction, Fraction]
CRatMatrix = tuple[tuple[CRat, ...], ...]


def _cadd(u: CRat, v: CRat) -> CRat:
    return (u[0] + v[0], u[1] + v[1])


def _cmul(u: CRat, v: CRat) -> CRat:
    return (u[0] * v[0] - u[1] * v[1], u[0] * v[1] + u[1] * v[0])


def crat_matrix(rows: Sequence[Sequence]) -> CRatMatrix:
    """Build from entries that are Fractions, ints, or (re, im) pairs."""
    out = []
    for row in rows:
        r = []
        for v in row:
            if isinstance(v, tuple):
                r.append((Fraction(v[0]), Fraction(v[1])))
            else:
                r.append((Fraction(v), F0))
        out.append(tuple(r))
    return tuple(out)


def crat_matmul(a: CRatMatrix, b: CRatMatrix) -> CRatMatrix:
    n, k, m = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = (F0, F0)
            for t in range(k):
                acc = _cadd(acc, _cmul(a[i][t], b[t][j]))
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def crat_kron(a: CRatMatrix, b: CRatMatrix) -> CRatMatrix:
    na, nb = len(a), len(b)
    out = []
    for i in range(na):
        for k in range(nb):
            row = []
            for j in range(na):
                for l in range(nb):
                    row.append(_cmul(a[i][j], b[k][l]))
            out.append(tuple(row))
    return tuple(out)


def crat_trace(a: CRatMatrix) -> CRat:
    acc = (F0, F0)
    for i in range(len(a)):
        acc = _cadd(acc, a[i][i])
    return acc


def crat_to_numpy(a: CRatMatrix) -> np.ndarray:
    return np.array([[complex(v[0], v[1]) for v in row] for row in a], dtype=complex)


# ---------------------------------------------------------------------------
# States and measurements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, PSD matrix of dimension 2 or 4.

    `exact` optionally carries the same matrix as complex rationals, enabling
    exact Born-rule tables.
    """

    matrix: np.ndarray
    exact: Optional[CRatMatrix] = field(default=None, compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape not in ((2, 2), (4, 4)):
            raise InvalidStateError(f"dimension {m.shape} unsupported")
        if np.max(np.abs(m - m.conj().T)) > HERMITICITY_TOL:
            raise InvalidStateError("matrix is not Hermitian")
        if abs(np.trace(m).real - 1) > TRACE_TOL or abs(np.trace(m).imag) > TRACE_TOL:
            raise InvalidStateError(f"trace {np.trace(m)} is not 1")
        if np.min(np.linalg.eigvalsh(m)) < -PSD_TOL:
            raise InvalidStateError("matrix has a negative eigenvalue")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @staticmethod
    def from_exact(rows: Sequence[Sequence]) -> "DensityMatrix":
        exact = crat_matrix(rows)
        return DensityMatrix(crat_to_numpy(exact), exact=exact)


@dataclass(frozen=True)
class Measurement:
    """Binary projective qubit measurement along a unit Bloch vector.

    Outcome 0 is the +1 projector (I + n.sigma)/2.  `exact_bloch` is set when
    the components are rational with unit norm, in which case the projectors
    are complex-rational.
    """

    bloch: tuple[float, float, float]
    exact_bloch: Optional[tuple[Fraction, Fraction, Fraction]] = field(
        default=None, compare=False
    )

    def __post_init__(self):
        n = math.sqrt(sum(c * c for c in self.bloch))
        if abs(n - 1) > 1e-12:
            raise RangeError(f"Bloch vector norm {n} is not 1")

    def projector(self, outcome: int) -> np.ndarray:
        nx, ny, nz = self.bloch
        sign = 1 if outcome == 0 else -1
        return 0.5 * np.array(
            [
                [1 + sign * nz, sign * (nx - 1j * ny)],
                [sign * (nx + 1j * ny), 1 - sign * nz],
            ],
            dtype=complex,
        )

    def exact_projector(self, outcome: int) -> Optional[CRatMatrix]:
        if self.exact_bloch is None:
            return None
        nx, ny, nz = self.exact_bloch
        s = F1 if outcome == 0 else -F1
        return (
            ((FH + s * nz / 2, F0), (s * nx / 2, -s * ny / 2)),
            ((s * nx / 2, s * ny / 2), (FH - s * nz / 2, F0)),
        )

    @staticmethod
    def from_bloch(bloch: Sequence[float]) -> "Measurement":
        vec = tuple(float(c) for c in bloch)
        exact = None
        try:
            fr = tuple(Fraction(c).limit_denominator(10**6) for c in bloch)
            if all(float(f) == float(c) for f, c in zip(fr, bloch)) and sum(
                f * f for f in fr
            ) == 1:
                exact = fr
        except (ValueError, OverflowError):
            pass
        return Measurement(vec, exact_bloch=exact)

    @staticmethod
    def z() -> "Measurement":
        return Measurement((0.0, 0.0, 1.0), exact_bloch=(F0, F0, F1))

    @staticmethod
    def x() -> "Measurement":
        return Measurement((1.0, 0.0, 0.0), exact_bloch=(F1, F0, F0))

    @staticmethod
    def y() -> "Measurement":
        return Measurement((0.0, 1.0, 0.0), exact_bloch=(F0, F1, F0))

    @staticmethod
    def from_angles(theta: float, phi: float) -> "Measurement":
        return Measurement(
            (
                math.sin(theta) * math.cos(phi),
                math.sin(theta) * math.sin(phi),
                math.cos(theta),
            )
        )


def one_way_discordant_state() -> DensityMatrix:
    """The separable two-qubit mixture (|00><00| + |+1><+1|)/2, exact.

    Bob's side is classical in the z basis while Alice's conditional states
    |0> and |+> are nonorthogonal, so the state is quantum-classical but not
    classical-quantum.
    """
    q = Fraction(1, 4)
    rows = [
        [FH, F0, F0, F0],
        [F0, q, F0, q],
        [F0, F0, F0, F0],
        [F0, q, F0, q],
    ]
    return DensityMatrix.from_exact(rows)


def _sandwich_alice(rho4: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """<v|_A rho |v>_A: the unnormalized Bob operator after Alice projects."""
    r = rho4.reshape(2, 2, 2, 2)
    return np.einsum("i,ikjl,j->kl", vec.conj(), r, vec)


def _sandwich_bob(rho4: np.ndarray, vec: np.ndarray) -> np.ndarray:
    r = rho4.reshape(2, 2, 2, 2)
    return np.einsum("k,ikjl,l->ij", vec.conj(), r, vec)


def partial_trace(state: DensityMatrix, keep: str) -> DensityMatrix:
    """Reduced state on the kept side ('alice' or 'bob')."""
    if state.dim != 4:
        raise InvalidStateError("partial trace needs a two-qubit state")
    r = state.matrix.reshape(2, 2, 2, 2)
    if keep == "alice":
        red = np.einsum("ikjk->ij", r)
    elif keep == "bob":
        red = np.einsum("kikj->ij", r)
    else:
        raise ValueError("keep must be 'alice' or 'bob'")
    return DensityMatrix(red)


@dataclass(frozen=True)
class Assemblage:
    """Unnormalized conditional Bob operators sigma_{a|x}, indexed (x, a)."""

    operators: tuple[tuple[np.ndarray, np.ndarray], ...]

    def __post_init__(self):
        totals = []
        for x in BITS:
            for a in BITS:
                op = self.operators[x][a]
                if np.max(np.abs(op - op.conj().T)) > HERMITICITY_TOL:
                    raise InvalidAssemblageError(f"sigma({a}|{x}) not Hermitian")
                if np.min(np.linalg.eigvalsh(op)) < -PSD_TOL:
                    raise InvalidAssemblageError(f"sigma({a}|{x}) not PSD")
            totals.append(self.operators[x][0] + self.operators[x][1])
        if np.max(np.abs(totals[0] - totals[1])) > 1e-12:
            raise InvalidAssemblageError("sum over outcomes depends on the input")

    def element(self, x: int, a: int) -> np.ndarray:
        return self.operators[x][a]

    def reduced_state(self) -> DensityMatrix:
        return DensityMatrix(self.operators[0][0] + self.operators[0][1])


def assemblage(state: DensityMatrix, alice: Sequence[Measurement]) -> Assemblage:
    """sigma_{a|x} left on Bob's side after Alice measures x and sees a."""
    if state.dim != 4:
        raise InvalidStateError("assemblage needs a two-qubit state")
    ops = []
    for x in BITS:
        pair = []
        for a in BITS:
            proj = alice[x].projector(a)
            vals, vecs = np.linalg.eigh(proj)
            vec = vecs[:, np.argmax(vals)]
            pair.append(_sandwich_alice(state.matrix, vec))
        ops.append(tuple(pair))
    return Assemblage(tuple(ops))


def box_from_assemblage(asm: Assemblage, bob: Sequence[Measurement]) -> Box:
    """p(ab|xy) = Tr(Pi_{b|y} sigma_{a|x})."""
    entries = []
    for x, y, a, b in all_settings():
        val = np.trace(bob[y].projector(b) @ asm.element(x, a)).real
        entries.append(max(val, 0.0))
    return Box(tuple(entries), exact=False)


def born_box(
    state: DensityMatrix,
    alice: Sequence[Measurement],
    bob: Sequence[Measurement],
    mode: str = "auto",
) -> Box:
    """Joint table Tr[(Pi_{a|x} x Pi_{b|y}) rho].

    mode 'auto' computes exactly whenever the state and all four measurement
    axes carry exact data; 'float'/'rational' force a path ('rational'
    raises if exact data is missing).
    """
    if state.dim != 4:
        raise InvalidStateError("born_box needs a two-qubit state")
    exact_ready = state.exact is not None and all(
        m.exact_bloch is not None for m in list(alice) + list(bob)
    )
    if mode not in ("auto", "float", "rational"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "rational" and not exact_ready:
        raise InvalidStateError("exact data unavailable for rational-mode table")
    if mode != "float" and exact_ready:
        entries = []
        for x, y, a, b in all_settings():
            op = crat_kron(alice[x].exact_projector(a), bob[y].exact_projector(b))
            tr = crat_trace(crat_matmul(op, state.exact))
            entries.append(tr[0])
        return Box(tuple(entries), exact=True)
    entries = []
    for x, y, a, b in all_settings():
        op = np.kron(alice[x].projector(a), bob[y].projector(b))
        entries.append(max(np.trace(op @ state.matrix).real, 0.0))
    return Box(tuple(entries), exact=False)


# ---------------------------------------------------------------------------
# Box families
# ---------------------------------------------------------------------------


def noisy_chsh_box(visibility: float) -> Box:
    """Isotropic-correlation family (2 + (-1)^(a+b+xy) sqrt(2) V)/8."""
    v = float(visibility)
    if not 0 <= v <= 1:
        raise RangeError(f"visibility {visibility} outside [0, 1]")
    if v == 0:
        return Box.uniform()
    s = math.sqrt(2.0) * v
    return Box.from_function(
        lambda x, y, a, b: (2 + (1 if (a + b + x * y) % 2 == 0 else -1) * s) / 8,
        exact=False,
    )


def bb84_box(visibility) -> Box:
    """Diagonal-basis family (1 + (-1)^(a+b+xy) delta_{x,y} V)/4.

    A Fraction visibility yields an exact rational table.
    """
    exact = isinstance(visibility, Fraction)
    v = visibility if exact else float(visibility)
    if not 0 <= v <= 1:
        raise RangeError(f"visibility {visibility} outside [0, 1]")
    quarter = Fraction(1, 4) if exact else 0.25
    four = Fraction(4) if exact else 4.0

    def entry(x, y, a, b):
        if x != y:
            return quarter
        sign = 1 if (a + b + x * y) % 2 == 0 else -1
        return (1 + sign * v) / four

    return Box.from_function(entry, exact=exact)


# ---------------------------------------------------------------------------
# Hermitian eigensolver
# ---------------------------------------------------------------------------


def eigensystem(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and orthonormal eigenvectors (columns).

    Cyclic complex Jacobi rotations, sweeping until the off-diagonal
    Frobenius norm drops below 1e-13.  Raises on non-Hermitian input.
    """
    a = np.array(matrix, dtype=complex)
    n = a.shape[0]
    if a.shape != (n, n) or np.max(np.abs(a - a.conj().T)) > 1e-10:
        raise InvalidStateError("eigensystem requires a Hermitian matrix")
    v = np.eye(n, dtype=complex)
    for _ in range(100):
        off = math.sqrt(sum(abs(a[p, q]) ** 2 for p in range(n) for q in range(n) if p != q))
        if off < JACOBI_OFFDIAG_TOL:
            break
        for p in range(n):
            for q in range(p + 1, n):
                if abs(a[p, q]) < JACOBI_OFFDIAG_TOL / (n * n):
                    continue
                # Unitary 2x2 rotation annihilating the (p, q) entry.
                apq = a[p, q]
                phase = apq / abs(apq)
                theta = 0.5 * math.atan2(2 * abs(apq), (a[p, p] - a[q, q]).real)
                c = math.cos(theta)
                s = math.sin(theta) * phase
                rot = np.eye(n, dtype=complex)
                rot[p, p] = c
                rot[p, q] = -s
                rot[q, p] = np.conj(s)
                rot[q, q] = c
                a = rot.conj().T @ a @ rot
                v = v @ rot
    vals = np.real(np.diag(a))
    order = np.argsort(-vals)
    return vals[order], v[:, order]
