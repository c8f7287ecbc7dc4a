"""Compatibility checkers: trace conditions and involutivity of the wave geometry.

Substituting the implicit ansatz into the fluid system and expanding around
the chart origin yields algebraic conditions on the profile Jacobian df/dr
and the wave covectors lam^A(u):

    initial:  tr(A^mu (df/dr) lam) = 0
    higher:   tr(A^mu (df/dr) eta_(a1 (df/dr) ... eta_as) (df/dr) lam) = 0

with eta_a the state-derivative slice of the covector component along the
a-th non-pivot coordinate, symmetrized over the a-indices, s = 1..k-1.  The
higher conditions are stated in the basis where the k x k pivot block of
lam is the identity; the checker normalizes the supplied data to that basis
at each evaluation state (exact product-rule transport of the derivative
slices), which reduces to the raw formula when the pivot block is constant.

All traces contract against the four fluid equations.  Writing
L_A = lam^A_0 I4 + lam^A_j A^j, a chain matrix M (4 x k) contributes the
residual vector sum_A L_A M[:, A]; that form is used throughout (it is
algebraically identical to assembling the per-equation coefficient
matrices).

The rank-2 bilinear reduction eliminates the profile: with Gamma the
wave-kernel frame and a single shared normalization coordinate, wave-pair
admissibility reads tr(A^mu Gamma (eta_a Gamma - I2 tr(eta_a Gamma)) lam)
over the remaining p-1 coordinate slices.

The involutivity checker tests the classical closure conditions of the
characteristics construction: commutators of the kernel fields staying in
their own span, and directional derivatives of each covector staying in the
span of the pair.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, combinations_with_replacement, permutations
from typing import Callable, Sequence

import numpy as np

from . import linalg
from .fluid import GasParams, StateVec, coefficient_matrices

__all__ = [
    "AnsatzConfig",
    "InvolutivityReport",
    "trace_condition_initial",
    "trace_condition_higher",
    "bilinear_rank2_condition",
    "involutivity_check",
    "config_from_family",
]

SPAN_RANK_TOL = 1e-7


@dataclass(frozen=True)
class AnsatzConfig:
    """Wave covectors (with derivatives) and profile Jacobian for one ansatz.

    waves / waves_jac / profile_jac follow the batched catalog conventions;
    k is the wave count.
    """

    k: int
    waves: Callable
    waves_jac: Callable
    profile_jac: Callable
    gas: GasParams = GasParams()
    explicit_a_rate: Callable | None = None  # da/dt on the initial section


def config_from_family(spec) -> AnsatzConfig:
    return AnsatzConfig(k=spec.n_waves, waves=spec.waves, waves_jac=spec.waves_jac,
                        profile_jac=spec.profile_jac, gas=spec.gas,
                        explicit_a_rate=spec.initial_a_rate)


def _state_data(cfg: AnsatzConfig, state, r):
    u = np.asarray(state.as_array if isinstance(state, StateVec) else state,
                   dtype=float).reshape(1, 4)
    lam = cfg.waves(u)[0]
    eta = cfg.waves_jac(u)[0]
    fr = None
    if r is not None:
        fr = cfg.profile_jac(np.asarray(r, dtype=float).reshape(1, cfg.k),
                             np.zeros(1))[0]
    return u[0], lam, eta, fr


def _dispersion_stack(u, gas):
    """L_A factory: lam (k,4) -> stack of lam0 I4 + lam_j A^j."""
    a1, a2, a3 = coefficient_matrices(StateVec.from_array(u), gas)
    eye = np.eye(4)

    def stack(lam):
        return np.stack([lam[A, 0] * eye + lam[A, 1] * a1 + lam[A, 2] * a2 + lam[A, 3] * a3
                         for A in range(lam.shape[0])])
    return stack


def _equation_residual(lmats, m):
    """Residual 4-vector of tr(A^mu M lam): sum_A L_A M[:, A]."""
    return np.einsum("aij,ja->i", lmats, m)


def _pivot_columns(lam, k):
    """Deterministic pivot choice: best |det| block, spatial columns preferred."""
    spatial = [c for c in combinations(range(1, 4), k)]
    with_time = [c for c in combinations(range(4), k) if 0 in c]
    for group in (spatial, with_time):
        best, best_det = None, -1.0
        for cols in group:
            block = lam[:, cols]
            d = abs(linalg.determinant(block)) if k > 1 else abs(block[0, 0])
            if d > best_det * (1.0 + 1e-12):
                best, best_det = cols, d
        if best_det > 1e-10 * (1.0 + np.max(np.abs(lam))) ** k:
            return best
    raise ValueError("wave covectors have no invertible pivot block")


def _normalize(lam, eta, fr, k):
    """Transform the ansatz data to the basis with identity pivot block.

    The covectors become lam~ = inv(Lambda) lam and the non-pivot derivative
    slices pick up the pivot block's own state dependence,

        eta~_a = inv (d lam_a / du) - inv (d Lambda / du) inv lam_a.

    The profile Jacobian transports with the block frozen at the evaluation
    state (f~ = f_r Lambda), matching the construction's chart where the
    pivot components of the invariants are the pivot coordinates themselves.
    """
    pivots = _pivot_columns(lam, k)
    others = [i for i in range(4) if i not in pivots]
    block = lam[:, list(pivots)]
    inv = linalg.inverse(block) if k > 1 else np.array([[1.0 / block[0, 0]]])
    lam_t = inv @ lam
    fr_t = None if fr is None else fr @ block
    slices = []
    for a in others:
        s = np.empty((k, 4))
        for alpha in range(4):
            dblock = eta[:, list(pivots), alpha]
            s[:, alpha] = (-inv @ dblock @ inv @ lam[:, a] + inv @ eta[:, a, alpha])
        slices.append(s)
    return lam_t, slices, fr_t, others


def trace_condition_initial(cfg: AnsatzConfig, state, r):
    """Residuals of tr(A^mu (df/dr) lam), one per fluid equation.

    Profiles carrying an explicit time dependence of the sound speed
    contribute their initial-section rate da/dt to the first equation.
    """
    u, lam, _, fr = _state_data(cfg, state, r)
    lmats = _dispersion_stack(u, cfg.gas)(lam)
    res = _equation_residual(lmats, fr)
    if cfg.explicit_a_rate is not None:
        res = res.copy()
        res[0] += cfg.explicit_a_rate(u)
    return res


def trace_condition_higher(cfg: AnsatzConfig, state, r, s: int):
    """Symmetrized higher trace residuals at order s (1 <= s <= k-1).

    Returns (residuals, index_tuples): residuals has one 4-vector row per
    symmetrized multi-index of non-pivot coordinate slices.  Empty for
    k = 1, where the conditions hold identically.
    """
    if cfg.k == 1:
        return np.zeros((0, 4)), []
    if not 1 <= s <= cfg.k - 1:
        raise ValueError(f"order s must satisfy 1 <= s <= k-1 = {cfg.k - 1}, got {s}")
    u, lam, eta, fr = _state_data(cfg, state, r)
    lam_t, slices, fr_t, coords = _normalize(lam, eta, fr, cfg.k)
    lmats = _dispersion_stack(u, cfg.gas)(lam_t)

    residuals, labels = [], []
    for combo in combinations_with_replacement(range(len(slices)), s):
        acc = np.zeros((4, cfg.k))
        perms = set(permutations(combo))
        for perm in perms:
            m = fr_t
            for a in perm:
                m = m @ slices[a] @ fr_t
            acc += m
        acc /= len(perms)
        residuals.append(_equation_residual(lmats, acc))
        labels.append(tuple(coords[a] for a in combo))
    return np.asarray(residuals), labels


def bilinear_rank2_condition(cfg: AnsatzConfig, state):
    """Profile-independent admissibility residuals for a rank-2 wave pair.

    Normalizes both covectors on one shared coordinate, inserts the
    wave-kernel frame Gamma for the eliminated profile factor, and returns
    a (4, 3) array: four equations x three remaining coordinate slices.

    The reduction is sharp for acoustic pairs (one-dimensional kernels pin
    Gamma up to scale) and for constant covectors; when a vortex root is
    involved its two-dimensional kernel makes the eliminated factor
    representative-dependent, so a nonzero report there is inconclusive and
    the trace conditions remain the authoritative admissibility test.
    """
    if cfg.k != 2:
        raise ValueError("bilinear reduction applies to wave pairs (k = 2)")
    u, lam, eta, _ = _state_data(cfg, state, None)
    sv = StateVec.from_array(u)
    stack = _dispersion_stack(u, cfg.gas)

    # kernel frame: one representative kernel vector per wave (for the
    # two-dimensional vortex kernels, project a fixed reference direction)
    from .fluid import wave_kernel
    gamma = np.empty((4, 2))
    refs = (np.ones(4), np.array([1.0, -2.0, 3.0, -4.0]))
    for A in range(2):
        basis = wave_kernel(sv, (lam[A, 0], lam[A, 1:]), cfg.gas)
        vec = basis[:, 0]
        if basis.shape[1] > 1:
            for ref in refs:
                cand = basis @ (basis.T @ ref)
                if np.linalg.norm(cand) > 1e-6:
                    vec = cand
                    break
        gamma[:, A] = vec / np.linalg.norm(vec)

    # shared normalization coordinate: maximize the smaller |component|
    scores = [min(abs(lam[0, i]), abs(lam[1, i])) for i in range(4)]
    i0 = int(np.argmax(scores))
    if scores[i0] < 1e-12:
        raise ValueError("wave pair admits no shared normalization coordinate")

    lam_h = lam / lam[:, i0][:, None]
    eta_h = np.empty_like(eta)
    for A in range(2):
        c = lam[A, i0]
        eta_h[A] = (eta[A] * c - np.outer(lam[A], eta[A, i0])) / c**2
    lmats = stack(lam_h)

    out = np.empty((4, 3))
    eye2 = np.eye(2)
    for col, a in enumerate(i for i in range(4) if i != i0):
        ka = eta_h[:, a, :] @ gamma          # (2, 2)
        wa = gamma @ (ka - eye2 * np.trace(ka))
        out[:, col] = _equation_residual(lmats, wa)
    return out


@dataclass
class InvolutivityReport:
    """Span-membership outcome for each unordered field pair."""

    pairs: list
    commutator_in_span: dict
    lie_derivative_in_span: dict
    details: dict = field(default_factory=dict)


def _directional_fd(fn, u, direction, step):
    """Richardson-stabilized central difference of fn along direction."""
    def central(h):
        return (np.asarray(fn(u + h * direction)) - np.asarray(fn(u - h * direction))) / (2 * h)
    d1 = central(step)
    d2 = central(0.5 * step)
    scale = np.max(np.abs(d2)) + 1e-30
    if np.max(np.abs(d1 - d2)) > 1e-5 * scale:
        return (4.0 * d2 - d1) / 3.0
    return d2


def _jacobian_fd(fn, u, step):
    cols = [_directional_fd(fn, u, e, step) for e in np.eye(4)]
    return np.stack(cols, axis=1)


def _in_span(vectors, candidate, rel_tol=SPAN_RANK_TOL):
    base = np.vstack(vectors)
    scale = np.max(np.abs(candidate)) + np.max(np.abs(base))
    if np.max(np.abs(candidate)) <= 1e-12 * scale:
        return True
    aug = np.vstack([base, candidate])
    return linalg.numerical_rank(aug, rel_tol) == linalg.numerical_rank(base, rel_tol)


def involutivity_check(gammas: Sequence[Callable], lambdas: Sequence[Callable],
                       state, fd_step: float = 1e-6) -> InvolutivityReport:
    """Closure conditions of the wave geometry at one state.

    (i) each commutator [gamma_A, gamma_B] must lie in span{gamma_A,
    gamma_B}; (ii) each directional derivative of lam^A along gamma_B must
    lie in span{lam^A, lam^B}.  Derivatives are central differences with
    Richardson refinement on disagreement.
    """
    u = np.asarray(state.as_array if isinstance(state, StateVec) else state,
                   dtype=float).reshape(4)
    k = len(gammas)
    pairs = [(a, b) for a in range(k) for b in range(k) if a != b]
    comm_ok, lie_ok, details = {}, {}, {}
    for a, b in pairs:
        if a < b:
            ja = _jacobian_fd(gammas[a], u, fd_step)
            jb = _jacobian_fd(gammas[b], u, fd_step)
            ga, gb = np.asarray(gammas[a](u)), np.asarray(gammas[b](u))
            comm = jb @ ga - ja @ gb
            ok = _in_span([ga, gb], comm)
            comm_ok[(a, b)] = comm_ok[(b, a)] = ok
            details[("commutator", a, b)] = comm
        lie = _directional_fd(lambdas[a], u, np.asarray(gammas[b](u)), fd_step)
        la, lb = np.asarray(lambdas[a](u)), np.asarray(lambdas[b](u))
        lie_ok[(a, b)] = _in_span([la, lb], lie)
        details[("lie", a, b)] = lie
    return InvolutivityReport(pairs=pairs, commutator_in_span=comm_ok,
                              lie_derivative_in_span=lie_ok, details=details)
