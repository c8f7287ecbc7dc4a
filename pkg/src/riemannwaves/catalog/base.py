"""FamilySpec: the runnable description of one closed-form solution family.

A family bundles
  * the wave covectors lam^A(u) with analytic derivatives,
  * the profile f(r) with analytic Jacobian (optionally carrying an explicit
    time dependence, e.g. the time-only sound-speed law),
  * parameter values, structural constraints, singular-time formulas,
  * a default evaluation window and a default catastrophe-probe ray.

Evaluation is batched: ``evaluate_batch(t, xs)`` returns invariants, states,
exact Jacobi matrices, implicit-function determinants and per-point status
codes; ``evaluate`` wraps a single point and raises on failure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..fluid import GasParams
from ..solver import (
    STATUS_NEAR_CATASTROPHE,
    STATUS_NO_CONVERGENCE,
    STATUS_OK,
    CatastropheError,
    ConvergenceError,
    initial_guess,
    jacobi_batch,
    newton_batch,
)

__all__ = [
    "ConstraintError",
    "ValidityError",
    "STATUS_INVALID",
    "STATUS_LABELS",
    "EvalResult",
    "FamilySpec",
    "PotentialWave",
    "RotationalWave",
    "CustomWave",
    "stack_waves",
]

STATUS_INVALID = 3

STATUS_LABELS = {
    STATUS_OK: "ok",
    STATUS_NO_CONVERGENCE: "no_convergence",
    STATUS_NEAR_CATASTROPHE: "near_catastrophe",
    STATUS_INVALID: "invalid",
}

SINGULAR_TIME_PAD = 1e-6  # exclude |t - T| < pad * max(1, |T|)


class ConstraintError(ValueError):
    """Family parameters violate a structural constraint."""


class ValidityError(ValueError):
    """Requested point lies outside the family's validity window."""


@dataclass(frozen=True)
class PotentialWave:
    """Acoustic covector (eps*a + u.e, -e) for constant unit e."""

    e: np.ndarray
    epsilon: int = 1

    def lam(self, u):
        n = u.shape[0]
        out = np.empty((n, 4))
        out[:, 0] = self.epsilon * u[:, 0] + u[:, 1:] @ self.e
        out[:, 1:] = -self.e
        return out

    def jac(self, u):
        n = u.shape[0]
        out = np.zeros((n, 4, 4))
        out[:, 0, 0] = self.epsilon
        out[:, 0, 1:] = self.e
        return out


@dataclass(frozen=True)
class RotationalWave:
    """Vortex covector (-u.lsp, lsp) for a constant spatial part lsp."""

    lsp: np.ndarray

    def lam(self, u):
        n = u.shape[0]
        out = np.empty((n, 4))
        out[:, 0] = -(u[:, 1:] @ self.lsp)
        out[:, 1:] = self.lsp
        return out

    def jac(self, u):
        n = u.shape[0]
        out = np.zeros((n, 4, 4))
        out[:, 0, 1:] = -self.lsp
        return out


@dataclass(frozen=True)
class CustomWave:
    """Covector with arbitrary state dependence (lam_fn: (N,4)->(N,4))."""

    lam_fn: Callable
    jac_fn: Callable

    def lam(self, u):
        return self.lam_fn(u)

    def jac(self, u):
        return self.jac_fn(u)


def stack_waves(wave_list):
    """Combine per-wave callables into batched (N,k,4) / (N,k,4,4) maps."""

    def waves(u):
        return np.stack([w.lam(u) for w in wave_list], axis=1)

    def waves_jac(u):
        return np.stack([w.jac(u) for w in wave_list], axis=1)

    return waves, waves_jac


@dataclass
class EvalResult:
    """Batched evaluation output; arrays share the leading point dimension."""

    t: np.ndarray
    x: np.ndarray          # (N, 3)
    r: np.ndarray          # (N, n_waves)
    state: np.ndarray      # (N, 4)
    jac: np.ndarray        # (N, 4, 4)
    cond_det: np.ndarray   # (N,)
    status: np.ndarray     # (N,) int8


@dataclass
class FamilySpec:
    """A validated, runnable solution family."""

    id: str
    rank: int
    n_waves: int
    description: str
    params: dict
    gas: GasParams
    profile: Callable            # (r (N,k), t (N,)) -> (N,4)
    profile_jac: Callable        # (r, t) -> (N,4,k)
    waves: Callable              # (N,4) -> (N,k,4)
    waves_jac: Callable          # (N,4) -> (N,k,4,4)
    singular_time_values: tuple = ()
    extra_time_deriv: Callable | None = None
    initial_a_rate: Callable | None = None   # da/dt on the t=0 section, fn of state
    guess_fn: Callable | None = None          # (t, x, branch) -> r0
    closed_form: Callable | None = None       # (t, x, branch) -> (r, state)
    custom_eval: Callable | None = None       # full replacement for the Newton path
    validity_fn: Callable | None = None       # (t, x) -> bool mask (pre-solve)
    probe_x: np.ndarray | None = None
    default_window: dict = field(default_factory=dict)
    branches: tuple = ()
    notes: str = ""

    # -- informational -----------------------------------------------------

    def singular_times(self):
        """Closed-form gradient-catastrophe / singularity times (may be empty)."""
        return list(self.singular_time_values)

    # -- validity ----------------------------------------------------------

    def validity_mask(self, t, x):
        """Geometric validity of points before solving (singular-time pad, extras)."""
        t = np.asarray(t, dtype=float)
        ok = np.ones(t.shape, dtype=bool)
        for ts in self.singular_time_values:
            ok &= np.abs(t - ts) >= SINGULAR_TIME_PAD * max(1.0, abs(ts))
        if self.validity_fn is not None:
            ok &= self.validity_fn(t, np.asarray(x, dtype=float))
        return ok

    # -- evaluation --------------------------------------------------------

    def evaluate_batch(self, t, x, branch=None, guess=None,
                       ignore_validity=False) -> EvalResult:
        """Solve the family at points (t_i, x_i); never raises per-point.

        t: (N,), x: (N,3).  Points outside validity come back with status
        "invalid"; Newton failures and near-catastrophe points keep their
        diagnostic status.  A solved point whose sound speed is nonpositive
        is downgraded to "invalid".  ignore_validity skips the geometric
        pre-check (used by the catastrophe probe, which deliberately walks
        into the excluded band around a singular time).
        """
        t = np.atleast_1d(np.asarray(t, dtype=float))
        x = np.asarray(x, dtype=float).reshape(len(t), 3)
        if branch is not None and self.branches and branch not in self.branches:
            raise ValidityError(f"unknown branch {branch!r}; options: {self.branches}")

        n = len(t)
        k = self.n_waves
        res = EvalResult(
            t=t, x=x,
            r=np.full((n, k), np.nan),
            state=np.full((n, 4), np.nan),
            jac=np.full((n, 4, 4), np.nan),
            cond_det=np.full(n, np.nan),
            status=np.full(n, STATUS_INVALID, dtype=np.int8),
        )
        valid = np.ones(n, dtype=bool) if ignore_validity else self.validity_mask(t, x)
        if not valid.any():
            return res
        idx = np.nonzero(valid)[0]
        X = np.column_stack([t[idx], x[idx]])

        if self.custom_eval is not None:
            r, u, jac, cond, status = self.custom_eval(t[idx], x[idx], branch)
        else:
            if guess is not None:
                r0 = np.asarray(guess, dtype=float).reshape(n, k)[idx]
            elif self.guess_fn is not None:
                r0 = self.guess_fn(t[idx], x[idx], branch)
            else:
                r0 = initial_guess(self.profile, self.waves, X, k)
            r, u, status, cond = newton_batch(self.profile, self.profile_jac,
                                              self.waves, self.waves_jac, X, r0)
            jac = jacobi_batch(self.profile, self.profile_jac, self.waves,
                               self.waves_jac, X, r, self.extra_time_deriv)

        solved = status == STATUS_OK
        bad_a = solved & ~(u[:, 0] > 0.0)
        status = status.copy()
        status[bad_a] = STATUS_INVALID

        res.r[idx] = r
        res.state[idx] = u
        res.jac[idx] = jac
        res.cond_det[idx] = cond
        res.status[idx] = status
        return res

    def evaluate(self, t, x, branch=None, guess=None):
        """Single-point evaluation; raises on invalid/unconverged points."""
        res = self.evaluate_batch(np.array([t]), np.array(x, dtype=float).reshape(1, 3),
                                  branch=branch,
                                  guess=None if guess is None else np.asarray(guess)[None, :])
        code = int(res.status[0])
        if code == STATUS_INVALID:
            raise ValidityError(f"point (t={t}, x={np.asarray(x)}) outside validity window of {self.id}")
        if code == STATUS_NEAR_CATASTROPHE:
            raise CatastropheError(f"{self.id}: implicit-function determinant {res.cond_det[0]:.3e}")
        if code == STATUS_NO_CONVERGENCE:
            raise ConvergenceError(f"{self.id}: Newton failed at (t={t}, x={np.asarray(x)})")
        return res

    # -- helpers for the verifier ------------------------------------------

    def default_grid_window(self):
        win = {"t": (0.0, 0.5), "x1": (-1.0, 1.0), "x2": (-1.0, 1.0), "x3": (-1.0, 1.0)}
        win.update(self.default_window)
        return win

    def probe_ray(self):
        if self.probe_x is not None:
            return np.asarray(self.probe_x, dtype=float)
        win = self.default_grid_window()
        return np.array([0.5 * (win[a][0] + win[a][1]) for a in ("x1", "x2", "x3")])
