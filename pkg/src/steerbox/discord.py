"""Directed quantum discord for two-qubit states.

Discord in a direction is quantum mutual information minus the classical
correlation extracted by the best binary projective measurement on the
measuring side.  The minimization runs a coarse Bloch-angle grid followed
by coordinate golden-section refinement from the best grid cells.

Entropies are in bits throughout.  The minimization is restricted to binary
projective measurements, the standard practice for two-qubit states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import InvalidStateError
from .quantum import DensityMatrix, Measurement, eigensystem, partial_trace

EIGENVALUE_CLAMP = -1e-10
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def von_neumann_entropy(state) -> float:
    """S(rho) = -Tr(rho log2 rho) in bits.

    Accepts a DensityMatrix or a raw Hermitian PSD matrix with unit trace.
    Eigenvalues in [-1e-10, 0) are clamped to zero before the log.
    """
    matrix = state.matrix if isinstance(state, DensityMatrix) else np.asarray(state)
    vals, _ = eigensystem(matrix)
    total = 0.0
    for v in vals:
        if v < EIGENVALUE_CLAMP:
            raise InvalidStateError(f"eigenvalue {v} below PSD tolerance")
        if v > 1e-15:
            total -= v * math.log2(v)
    return total


@dataclass(frozen=True)
class DiscordSearchConfig:
    grid_theta: int = 60
    grid_phi: int = 120
    refine_tol: float = 1e-8
    multistart: int = 5


@dataclass(frozen=True)
class DiscordResult:
    """Directed discord with its ingredients and the minimizing measurement."""

    direction: str  # 'ab' (measure Alice) or 'ba' (measure Bob)
    discord: float
    mutual_information: float
    classical_correlation: float
    argmin: Measurement

    def __post_init__(self):
        if abs(self.discord - (self.mutual_information - self.classical_correlation)) > 1e-9:
            raise ValueError("discord must equal mutual information minus classical correlation")
        if self.discord < -1e-9 or self.classical_correlation < -1e-9:
            raise ValueError("discord and classical correlation must be nonnegative")


def _outcome_vectors(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    up = np.array([c, np.exp(1j * phi) * s])
    down = np.array([s, -np.exp(1j * phi) * c])
    return up, down


def _conditional_entropy_factory(state: DensityMatrix, measured_side: str) -> Callable:
    r4 = state.matrix.reshape(2, 2, 2, 2)

    def objective(theta: float, phi: float) -> float:
        total = 0.0
        for vec in _outcome_vectors(theta, phi):
            if measured_side == "alice":
                sig = np.einsum("i,ikjl,j->kl", vec.conj(), r4, vec)
            else:
                sig = np.einsum("k,ikjl,l->ij", vec.conj(), r4, vec)
            p = np.trace(sig).real
            if p > 1e-14:
                total += p * von_neumann_entropy(sig / p)
        return total

    return objective


def _golden_section(fn, lo: float, hi: float, tol: float) -> tuple[float, float]:
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = fn(d)
    mid = (a + b) / 2
    return mid, fn(mid)


def conditional_entropy_min(
    state: DensityMatrix,
    measured_side: str,
    cfg: Optional[DiscordSearchConfig] = None,
) -> tuple[float, Measurement]:
    """min over binary projective measurements of sum_i p_i S(rho_cond_i).

    Coarse grid over Bloch angles, then coordinate golden-section refinement
    (to cfg.refine_tol on each angle) from the best cfg.multistart cells.
    Refinement never increases the objective.
    """
    if state.dim != 4:
        raise InvalidStateError("conditional entropy needs a two-qubit state")
    if measured_side not in ("alice", "bob"):
        raise ValueError("measured_side must be 'alice' or 'bob'")
    cfg = cfg or DiscordSearchConfig()
    objective = _conditional_entropy_factory(state, measured_side)

    thetas = np.linspace(0.0, math.pi, cfg.grid_theta)
    phis = np.linspace(0.0, 2 * math.pi, cfg.grid_phi, endpoint=False)
    scored = []
    for th in thetas:
        for ph in phis:
            scored.append((objective(th, ph), th, ph))
    # Deterministic reduction: best value, ties by smaller theta then phi.
    scored.sort(key=lambda t: (t[0], t[1], t[2]))

    dth = thetas[1] - thetas[0]
    dph = phis[1] - phis[0]
    best_val, best_th, best_ph = scored[0]
    for _, th0, ph0 in scored[: cfg.multistart]:
        th, ph = th0, ph0
        val = None
        for _ in range(12):
            th, _ = _golden_section(
                lambda t: objective(t, ph),
                max(0.0, th - dth),
                min(math.pi, th + dth),
                cfg.refine_tol,
            )
            ph, new_val = _golden_section(
                lambda q: objective(th, q), ph - dph, ph + dph, cfg.refine_tol
            )
            if val is not None and abs(val - new_val) < 1e-14:
                val = new_val
                break
            val = new_val
        if val < best_val:
            best_val, best_th, best_ph = val, th, ph
    return best_val, Measurement.from_angles(best_th, best_ph % (2 * math.pi))


def mutual_information(state: DensityMatrix) -> float:
    """I = S(rho_A) + S(rho_B) - S(rho_AB)."""
    return (
        von_neumann_entropy(partial_trace(state, "alice"))
        + von_neumann_entropy(partial_trace(state, "bob"))
        - von_neumann_entropy(state)
    )


def discord(
    state: DensityMatrix,
    direction: str,
    cfg: Optional[DiscordSearchConfig] = None,
) -> DiscordResult:
    """Directed discord: 'ab' measures Alice, 'ba' measures Bob."""
    if direction not in ("ab", "ba"):
        raise ValueError("direction must be 'ab' or 'ba'")
    measured = "alice" if direction == "ab" else "bob"
    unmeasured = "bob" if direction == "ab" else "alice"
    info = mutual_information(state)
    smin, argmin = conditional_entropy_min(state, measured, cfg)
    classical = von_neumann_entropy(partial_trace(state, unmeasured)) - smin
    # Guard tiny negative round-off without masking real violations.
    value = info - classical
    if -1e-9 <= value < 0:
        value = 0.0
    if -1e-9 <= classical < 0:
        classical = 0.0
    return DiscordResult(
        direction=direction,
        discord=value,
        mutual_information=info,
        classical_correlation=classical,
        argmin=argmin,
    )


# ---------------------------------------------------------------------------
# Classical-quantum / quantum-classical structure tests
# ---------------------------------------------------------------------------


def _dephase(state: DensityMatrix, side: str, basis: np.ndarray) -> np.ndarray:
    out = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        vec = basis[:, i]
        proj = np.outer(vec, vec.conj())
        full = np.kron(proj, np.eye(2)) if side == "alice" else np.kron(np.eye(2), proj)
        out += full @ state.matrix @ full
    return out


def _candidate_bases(state: DensityMatrix, side: str) -> list[np.ndarray]:
    """Bases that could make `side` classical: eigenbases of the reduced
    state and of the correlation operators probed by each Pauli on the
    other side.  For a genuinely classical side one of these is
    nondegenerate unless the state is a product with a maximally mixed
    marginal, which is classical in every basis."""
    paulis = [
        np.array([[0, 1], [1, 0]], dtype=complex),
        np.array([[0, -1j], [1j, 0]], dtype=complex),
        np.array([[1, 0], [0, -1]], dtype=complex),
    ]
    r4 = state.matrix.reshape(2, 2, 2, 2)
    candidates = [partial_trace(state, side).matrix]
    for op in paulis:
        if side == "bob":
            probe = np.einsum("ij,ikjl->kl", op, r4)
        else:
            probe = np.einsum("kl,ikjl->ij", op, r4)
        probe = (probe + probe.conj().T) / 2
        candidates.append(probe)
    bases = []
    for cand in candidates:
        vals, vecs = eigensystem(cand)
        if abs(vals[0] - vals[1]) > 1e-9:
            bases.append(vecs)
    return bases


def _is_classical_on(state: DensityMatrix, side: str, tol: float) -> bool:
    if state.dim != 4:
        raise InvalidStateError("structure test needs a two-qubit state")
    bases = _candidate_bases(state, side)
    if not bases:
        # Every probe is proportional to the identity: classical iff the
        # state is a product with a maximally mixed marginal on `side`.
        other = "alice" if side == "bob" else "bob"
        red = partial_trace(state, other).matrix
        if side == "bob":
            prod = np.kron(red, np.eye(2) / 2)
        else:
            prod = np.kron(np.eye(2) / 2, red)
        return bool(np.max(np.abs(prod - state.matrix)) <= tol)
    return any(
        np.max(np.abs(_dephase(state, side, basis) - state.matrix)) <= tol
        for basis in bases
    )


def is_quantum_classical(state: DensityMatrix, tol: float = 1e-9) -> bool:
    """True iff some orthonormal basis on Bob's side makes the state a
    mixture of Alice operators tagged by that basis (zero discord B->A)."""
    return _is_classical_on(state, "bob", tol)


def is_classical_quantum(state: DensityMatrix, tol: float = 1e-9) -> bool:
    """Mirror test with Alice's side classical (zero discord A->B)."""
    return _is_classical_on(state, "alice", tol)
