"""State-space design route: estimator plus full state feedback.

Builds the combined plant/estimator system for the pendulum cart, extracts
its implied feedback transfer function, and derives the two limiting
single-loop compensators that the equivalent classical configuration would
require.  Both come out unusable (one improper and unstable, one resting on
a right-half-plane cancellation), which is the point of the exercise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .plant import StateSpace
from .poly import Polynomial
from .tf import RationalTF

RANK_TOL = 1e-9
FACTOR_MATCH_TOL = 1e-6


@dataclass(frozen=True)
class RankedMatrix:
    matrix: np.ndarray
    rank: int


@dataclass(frozen=True)
class GainMatrices:
    """State-feedback row K and observer column Gobs."""

    K: np.ndarray  # 1 x n
    Gobs: np.ndarray  # n x 1


@dataclass(frozen=True)
class CombinedSystem:
    """Plant driven through its own state estimator, stacked as one system."""

    Atil: np.ndarray  # 2n x 2n
    Btil: np.ndarray  # 2n x 1
    Ctil: np.ndarray  # 1 x 2n


def _match_distance(got, want) -> float:
    """Worst nearest-neighbour gap between two eigenvalue multisets.

    Sorting is unreliable when members share real parts to rounding error.
    """
    pool = list(np.asarray(got, dtype=complex))
    worst = 0.0
    for w in np.asarray(want, dtype=complex):
        j = int(np.argmin([abs(w - g) for g in pool]))
        worst = max(worst, abs(w - pool.pop(j)))
    return worst


def _rank(m: np.ndarray) -> int:
    sv = np.linalg.svd(m, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.sum(sv > RANK_TOL * sv[0]))


def controllability_matrix(ss: StateSpace) -> RankedMatrix:
    """Columns [A^3 B | A^2 B | A B | B], highest power leftmost."""
    A, B = ss.A, ss.B
    n = A.shape[0]
    cols = [B]
    for _ in range(n - 1):
        cols.append(A @ cols[-1])
    m = np.hstack(cols[::-1])
    return RankedMatrix(matrix=m, rank=_rank(m))


def observability_matrix(ss: StateSpace) -> RankedMatrix:
    """Rows [C A^3; C A^2; C A; C], highest power on top."""
    A, C = ss.A, ss.C
    n = A.shape[0]
    rows = [C]
    for _ in range(n - 1):
        rows.append(rows[-1] @ A)
    m = np.vstack(rows[::-1])
    return RankedMatrix(matrix=m, rank=_rank(m))


def place_poles(A: np.ndarray, B: np.ndarray, desired) -> np.ndarray:
    """State-feedback row gain via Ackermann's formula.

    Returns K with eig(A - B K) at the desired locations.  The desired set
    must be closed under conjugation and (A, B) must be controllable.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float).reshape(A.shape[0], 1)
    n = A.shape[0]
    if len(desired) != n:
        raise ValueError(f"need exactly {n} desired poles, got {len(desired)}")
    phi = Polynomial.from_roots(desired)  # rejects non-conjugate-closed sets

    cols = [B]
    for _ in range(n - 1):
        cols.append(A @ cols[-1])
    ctrl = np.hstack(cols)
    if _rank(ctrl) < n:
        raise ValueError("pair (A, B) is not controllable")

    # phi(A) by Horner; phi is monic of degree n
    phi_A = np.zeros_like(A)
    for c in reversed(phi.coeffs):
        phi_A = phi_A @ A + c * np.eye(n)
    last_row = np.linalg.solve(ctrl.T, np.eye(n)[:, -1])
    return (last_row @ phi_A).reshape(1, n)


def gain_design(ss: StateSpace, system_poles, estimator_poles) -> GainMatrices:
    """Place the feedback poles directly and the observer poles by duality."""
    K = place_poles(ss.A, ss.B, system_poles)
    Gobs = place_poles(ss.A.T, ss.C.T, estimator_poles).T
    for closed, want in (
        (ss.A - ss.B @ K, system_poles),
        (ss.A - Gobs @ ss.C, estimator_poles),
    ):
        if _match_distance(np.linalg.eigvals(closed), want) > 1e-6:
            raise RuntimeError("pole placement failed its eigenvalue check")
    return GainMatrices(K=K, Gobs=Gobs)


def combined_system(ss: StateSpace, gains: GainMatrices) -> CombinedSystem:
    """Stack true state over estimated state.

    The true state evolves under A with input -K xhat + u; the estimate adds
    the output-injection correction.  Blocks: [[A, -BK], [GC, A-BK-GC]],
    input enters both halves, output reads the true cart position.
    """
    A, B, C = ss.A, ss.B, ss.C
    K, G = gains.K, gains.Gobs
    n = A.shape[0]
    Atil = np.block([[A, -B @ K], [G @ C, A - B @ K - G @ C]])
    Btil = np.vstack([B, B])
    Ctil = np.hstack([C, np.zeros((1, n))])
    return CombinedSystem(Atil=Atil, Btil=Btil, Ctil=Ctil)


# ---------------------------------------------------------------------------
# resolvent to transfer function
# ---------------------------------------------------------------------------


def ss_to_tf(A: np.ndarray, B: np.ndarray, C: np.ndarray, D: float = 0.0) -> RationalTF:
    """Transfer function C (sI - A)^-1 B + D by the Leverrier-Faddeev recurrence.

    No pole-zero cancellation is performed; the denominator is the full
    characteristic polynomial (monic).  Coefficients smaller than 1e-12 of
    the largest in their polynomial are structured zeros of the recurrence
    carrying float dust and are snapped to exact zero.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("A must be square")
    B = np.asarray(B, dtype=float).reshape(n, 1)
    C = np.asarray(C, dtype=float).reshape(1, n)

    den_desc = np.empty(n + 1)
    den_desc[0] = 1.0
    num_desc = np.empty(n)
    Mk = np.eye(n)
    for k in range(1, n + 1):
        num_desc[k - 1] = (C @ Mk @ B).item()
        AM = A @ Mk
        ck = -np.trace(AM) / k
        den_desc[k] = ck
        Mk = AM + ck * np.eye(n)

    den = _snap_dust(den_desc[::-1])
    num = _snap_dust(num_desc[::-1])
    num_poly = Polynomial(num) + Polynomial(den) * float(D)
    return RationalTF(num_poly, Polynomial(den))


def _snap_dust(coeffs, rel: float = 1e-12):
    c = np.array(coeffs, dtype=float)
    if c.size:
        c[np.abs(c) < rel * np.max(np.abs(c))] = 0.0
    return c


def common_factors(tf: RationalTF, tol: float = FACTOR_MATCH_TOL) -> tuple[complex, ...]:
    """Roots shared by numerator and denominator, matched within tol.

    Report only; nothing is cancelled.  Each denominator root can absorb at
    most one numerator root.
    """
    if tf.num.is_zero:
        return ()
    pool = list(tf.den.roots())
    shared = []
    for z in tf.num.roots():
        if not pool:
            break
        j = int(np.argmin([abs(z - p) for p in pool]))
        if abs(z - pool[j]) <= tol * (1.0 + abs(z)):
            shared.append(pool.pop(j))
    return tuple(shared)


def remove_factor(tf: RationalTF, factor: Polynomial, rel_tol: float = 1e-9) -> RationalTF:
    """Divide numerator and denominator by a structurally known factor.

    Exact polynomial division with a remainder check; root matching cannot
    be trusted here because repeated roots split by far more than their
    coefficient accuracy.
    """
    out = []
    for poly in (tf.num, tf.den):
        q, r = divmod(poly, factor)
        r_norm = max((abs(c) for c in r.coeffs), default=0.0)
        scale = max(abs(c) for c in poly.coeffs)
        if r_norm > rel_tol * max(scale, 1.0):
            raise ValueError("factor does not divide both sides of the transfer function")
        out.append(q)
    return RationalTF(out[0], out[1])


# ---------------------------------------------------------------------------
# equivalent single-loop compensators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EquivalentCompensator:
    """One limiting factorization of the implied loop, with its verdict."""

    raw: RationalTF
    reduced: RationalTF
    cancelled_factor: Polynomial
    proper: bool
    stable: bool
    plant_cancellations: tuple[complex, ...]
    rhp_cancellation: bool


def _numerator_ratio(Q: RationalTF, G: RationalTF) -> float | None:
    """Scalar lam with n_Q = lam * n_G, or None when not proportional."""
    if Q.num.is_zero:
        return 0.0
    if G.num.is_zero or Q.num.degree != G.num.degree:
        return None
    lam = Q.num.leading / G.num.leading
    diff = Q.num - G.num * lam
    scale = max(abs(c) for c in Q.num.coeffs)
    if max(abs(c) for c in diff.coeffs) <= 1e-8 * max(scale, 1.0):
        return lam
    return None


def _verdict(raw: RationalTF, reduced: RationalTF, cancelled: Polynomial, G: RationalTF) -> EquivalentCompensator:
    loop = RationalTF(reduced.num * G.num, reduced.den * G.den)
    shared = common_factors(loop)
    return EquivalentCompensator(
        raw=raw,
        reduced=reduced,
        cancelled_factor=cancelled,
        proper=reduced.is_proper,
        stable=reduced.is_zero or reduced.is_stable(),
        plant_cancellations=shared,
        rhp_cancellation=any(r.real > 1e-7 for r in shared),
    )


def equivalent_Kb(Q: RationalTF, G: RationalTF) -> EquivalentCompensator:
    """Feedback-only factorization 1/Q - 1/G.

    The raw difference keeps every factor; when Q and G share their
    numerator up to a scalar (they share zeros by construction) the common
    numerator factor is divided out structurally.
    """
    if Q.num.is_zero:
        raise ValueError("Q must be nonzero")
    raw = RationalTF(Q.den * G.num - G.den * Q.num, Q.num * G.num)
    lam = _numerator_ratio(Q, G)
    if lam:
        reduced = RationalTF(Q.den - G.den * lam, G.num * lam)
        cancelled = G.num
    else:
        reduced, cancelled = raw, Polynomial((1.0,))
    return _verdict(raw, reduced, cancelled, G)


def equivalent_Kf(Q: RationalTF, G: RationalTF) -> EquivalentCompensator:
    """Forward-only factorization (Q/G) / (1 - Q).

    d_Q always cancels; the shared-numerator factor goes the same way as in
    the feedback case, leaving lam * d_G / (d_Q - n_Q).
    """
    raw = RationalTF(
        Q.num * G.den * Q.den, Q.den * (G.num * (Q.den - Q.num))
    )
    lam = _numerator_ratio(Q, G)
    if lam is not None:
        reduced = RationalTF(G.den * lam, Q.den - Q.num)
        cancelled = G.num * Q.den if lam else Q.den
    else:
        reduced = RationalTF(Q.num * G.den, G.num * (Q.den - Q.num))
        cancelled = Q.den
    return _verdict(raw, reduced, cancelled, G)
