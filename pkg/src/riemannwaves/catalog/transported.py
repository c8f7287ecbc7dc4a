"""Evaluator for the mixed family whose third invariant rides a transport equation.

Structure: one acoustic wave along x3 with amplitude f, two vortex modes in
the (x1, x2) plane sharing a single phase function.  The invariants are

    r1 = ((1 + 1/kappa) f(r1) + a0 + u30) t - x3          (implicit, scalar),
    r3: transported, dr3/dt + u3 dr3/dx3 = 0, r3(0, x) = x (or Psi of the
        closed-form invariant when f is linear),
    r2 = t - u1(r2, r3) x1 - u2(r2, r3) x2                (implicit, scalar),

with fields a = f(r1)/kappa + a0, u3 = f(r1) + u30 and the planar velocity
(u1, u2) on the unit circle given by the variant's phase profile.

For linear f the transported invariant has the closed form

    G = (1 - (1+1/kappa) A1 t)^(-kappa/(kappa+1))
        * (x3 + (kappa a0 - u30) t - (B1 + kappa a0)/A1),

verified against backward characteristic integration; nonlinear f variants
integrate the characteristics (RK4) together with the x3-sensitivity so the
exact Jacobi matrix stays available.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..solver import STATUS_NO_CONVERGENCE, STATUS_OK
from .base import STATUS_INVALID

__all__ = ["PlanarVelocity", "TransportedEvaluator", "RotatingPolarizationEvaluator"]

_NEWTON_TOL = 1e-13
_NEWTON_ITERS = 60


@dataclass(frozen=True)
class PlanarVelocity:
    """(u1, u2) = (sin theta, sign*cos theta) for a two-argument phase theta."""

    theta: object            # Fn2: phase of the planar velocity
    cos_sign: float = -1.0   # u2 = cos_sign * cos(theta)
    post_valid: Callable | None = None  # (r2, r3) -> bool mask

    def fields(self, p, q):
        th = self.theta(p, q)
        return np.sin(th), self.cos_sign * np.cos(th)

    def partials(self, p, q):
        th = self.theta(p, q)
        tp, tq = self.theta.dp(p, q), self.theta.dq(p, q)
        c, s = np.cos(th), np.sin(th)
        # d(sin th), d(cos_sign cos th)
        return c * tp, c * tq, -self.cos_sign * s * tp, -self.cos_sign * s * tq


def _scalar_newton(g, dg, r0, tol=_NEWTON_TOL, iters=_NEWTON_ITERS):
    """Vectorized damped Newton for scalar equations g(r) = 0."""
    r = np.array(r0, dtype=float)
    val = g(r)
    for _ in range(iters):
        if np.all(np.abs(val) <= tol):
            break
        d = dg(r)
        d = np.where(np.abs(d) < 1e-14, np.sign(d) * 1e-14 + (d == 0) * 1e-14, d)
        step = val / d
        r_new = r - step
        val_new = g(r_new)
        for _ in range(20):
            worse = np.abs(val_new) > np.abs(val)
            if not worse.any():
                break
            step = np.where(worse, 0.5 * step, step)
            r_new = r - step
            val_new = g(r_new)
        r, val = r_new, val_new
    return r, np.abs(val) <= tol


class TransportedEvaluator:
    """Callable implementing FamilySpec.custom_eval for this family."""

    def __init__(self, fprof, planar: PlanarVelocity, a0, u30, kappa,
                 r3_closed=None, psi=None, ode_steps=240):
        self.f = fprof
        self.planar = planar
        self.a0 = float(a0)
        self.u30 = float(u30)
        self.kappa = float(kappa)
        self.r3_closed = r3_closed  # (t, x3) -> (G, dG/dt, dG/dx3), linear-f only
        self.psi = psi
        self.ode_steps = ode_steps

    # -- pieces -------------------------------------------------------------

    def phase1(self, r1):
        return (1.0 + 1.0 / self.kappa) * self.f(r1) + self.a0 + self.u30

    def solve_r1(self, t, x3):
        g = lambda r: r - self.phase1(r) * t + x3
        dg = lambda r: 1.0 - (1.0 + 1.0 / self.kappa) * self.f.d(r) * t
        r0 = self.phase1(np.zeros_like(t)) * t - x3
        return _scalar_newton(g, dg, r0)

    def u3_field(self, t, x3):
        r1, ok = self.solve_r1(t, x3)
        return self.f(r1) + self.u30, r1, ok

    def r3_by_characteristics(self, t, x3):
        """Backward foot X(0) of dx/ds = u3(s, x) from (t, x3), plus sensitivities."""
        steps = self.ode_steps
        x = np.array(x3, dtype=float)
        jall = np.ones_like(x)   # dX(0)/dx3 accumulated via variational equation
        tcur = np.array(t, dtype=float)
        hval = -tcur / steps     # per-point backward step

        def rhs(s, y):
            u3, r1, _ = self.u3_field(s, y)
            d1 = 1.0 - (1.0 + 1.0 / self.kappa) * self.f.d(r1) * s
            du3dx = self.f.d(r1) * (-1.0 / d1)
            return u3, du3dx

        for i in range(steps):
            s = tcur + i * hval
            h = hval
            k1, a1 = rhs(s, x)
            k2, a2 = rhs(s + 0.5 * h, x + 0.5 * h * k1)
            k3, a3 = rhs(s + 0.5 * h, x + 0.5 * h * k2)
            k4, a4 = rhs(s + h, x + h * k3)
            x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            # variational RK4 with the same nodes (linear equation dJ/ds = a J)
            j1 = a1
            j2 = a2 * (1 + 0.5 * h * j1)
            j3 = a3 * (1 + 0.5 * h * j2)
            j4 = a4 * (1 + h * j3)
            jall = jall * (1 + (h / 6.0) * (j1 + 2 * j2 + 2 * j3 + j4))
        u3_here, _, _ = self.u3_field(t, x3)
        return x, -u3_here * jall, jall

    def solve_r3(self, t, x3):
        if self.r3_closed is not None:
            g, dgdt, dgdx = self.r3_closed(t, x3)
            if self.psi is not None:
                dpsi = self.psi.d(g)
                return self.psi(g), dpsi * dgdt, dpsi * dgdx
            return g, dgdt, dgdx
        return self.r3_by_characteristics(t, x3)

    def solve_r2(self, t, x1, x2, r3):
        u1 = lambda r: self.planar.fields(r, r3)[0]
        u2 = lambda r: self.planar.fields(r, r3)[1]

        def g(r):
            a, b = self.planar.fields(r, r3)
            return r - t + a * x1 + b * x2

        def dg(r):
            dp1, _, dp2, _ = self.planar.partials(r, r3)
            return 1.0 + dp1 * x1 + dp2 * x2

        r0 = np.array(t, dtype=float)
        return _scalar_newton(g, dg, r0)

    # -- FamilySpec.custom_eval ---------------------------------------------

    def __call__(self, t, x, branch=None):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        x1, x2, x3 = x[:, 0], x[:, 1], x[:, 2]
        n = len(t)

        r1, ok1 = self.solve_r1(t, x3)
        r3, dr3_dt, dr3_dx3 = self.solve_r3(t, x3)
        r2, ok2 = self.solve_r2(t, x1, x2, r3)

        f1 = self.f(r1)
        df1 = self.f.d(r1)
        u1f, u2f = self.planar.fields(r2, r3)
        u = np.column_stack([f1 / self.kappa + self.a0, u1f, u2f, f1 + self.u30])

        # invariant gradients over (t, x1, x2, x3)
        d1 = 1.0 - (1.0 + 1.0 / self.kappa) * df1 * t
        grad_r1 = np.zeros((n, 4))
        grad_r1[:, 0] = self.phase1(r1) / d1
        grad_r1[:, 3] = -1.0 / d1

        grad_r3 = np.zeros((n, 4))
        grad_r3[:, 0] = dr3_dt
        grad_r3[:, 3] = dr3_dx3

        u1p, u1q, u2p, u2q = self.planar.partials(r2, r3)
        d2 = 1.0 + u1p * x1 + u2p * x2
        grad_r2 = np.zeros((n, 4))
        gq = u1q * x1 + u2q * x2
        grad_r2[:, 0] = (1.0 - gq * dr3_dt) / d2
        grad_r2[:, 1] = -u1f / d2
        grad_r2[:, 2] = -u2f / d2
        grad_r2[:, 3] = -gq * dr3_dx3 / d2

        jac = np.zeros((n, 4, 4))
        jac[:, 0, :] = (df1 / self.kappa)[:, None] * grad_r1
        jac[:, 1, :] = u1p[:, None] * grad_r2 + u1q[:, None] * grad_r3
        jac[:, 2, :] = u2p[:, None] * grad_r2 + u2q[:, None] * grad_r3
        jac[:, 3, :] = df1[:, None] * grad_r1

        cond = d1 * d2
        status = np.where(ok1 & ok2, STATUS_OK, STATUS_NO_CONVERGENCE).astype(np.int8)
        if self.planar.post_valid is not None:
            good = self.planar.post_valid(r2, r3)
            status = np.where(good, status, STATUS_INVALID).astype(np.int8)
        bad = ~np.isfinite(u).all(axis=1)
        status[bad] = STATUS_NO_CONVERGENCE

        r = np.column_stack([r1, r2, r3])
        return r, u, jac, cond, status


class RotatingPolarizationEvaluator:
    """Acoustic wave with rotating planar polarization plus a convected u3.

    a = F(r1)/kappa + a0, u1 = sin F, u2 = -cos F with the scalar invariant
    r1 = a t - x1 cos F - x2 sin F.  The first three fluid equations close on
    any F; the third velocity component must then ride the planar flow,
    D u3 = 0 with D = d/dt + u1 d/dx1 + u2 d/dx2 (no x3 dependence is
    admissible).  No algebraic combination of the vortex invariants is
    convected here, so u3 = g(m) with m traced backward along the planar
    characteristics (initial data: the charted combination
    x1 sin F - x2 cos F at t = 0).  Backward RK4 carries the 2x2 variational
    matrix so the exact Jacobi matrix stays available.
    """

    def __init__(self, fprof, gprof, a0, kappa, ode_steps=100):
        self.F = fprof
        self.g = gprof
        self.a0 = float(a0)
        self.kappa = float(kappa)
        self.ode_steps = ode_steps

    def solve_r1(self, t, x1, x2):
        a_of = lambda r: self.F(r) / self.kappa + self.a0

        def trig(r):
            fv = self.F(r)
            return np.cos(fv), np.sin(fv)

        def g(r):
            c, s = trig(r)
            return r - a_of(r) * t + x1 * c + x2 * s

        def dg(r):
            c, s = trig(r)
            df = self.F.d(r)
            return 1.0 - df / self.kappa * t - (x1 * s - x2 * c) * df

        r0 = a_of(np.zeros_like(t)) * t - x1 * np.cos(self.F(np.zeros_like(t))) \
            - x2 * np.sin(self.F(np.zeros_like(t)))
        return _scalar_newton(g, dg, r0)

    def _field(self, t, x1, x2):
        """(velocity, velocity-gradient 2x2, r1, delta) at points of one time slice."""
        r1, ok = self.solve_r1(t, x1, x2)
        fv, df = self.F(r1), self.F.d(r1)
        c, s = np.cos(fv), np.sin(fv)
        delta = 1.0 - df / self.kappa * t - (x1 * s - x2 * c) * df
        v = np.stack([s, -c], axis=-1)
        # dv/dx = (dF-direction) x (grad r1); grad r1 = (-c, -s)/delta
        coef = -df / delta
        grad = np.empty(v.shape[:-1] + (2, 2))
        grad[..., 0, 0] = coef * c * c
        grad[..., 0, 1] = coef * c * s
        grad[..., 1, 0] = coef * s * c
        grad[..., 1, 1] = coef * s * s
        return v, grad, r1, delta, ok

    def _foot(self, t, x1, x2):
        """Backward planar characteristics: foot y(0) and M = dy/d(x1,x2)."""
        steps = self.ode_steps
        y = np.stack([x1, x2], axis=-1).astype(float)
        m = np.broadcast_to(np.eye(2), y.shape[:-1] + (2, 2)).copy()
        tcur = np.asarray(t, dtype=float)
        h = -tcur / steps

        def stage(s, yv, mv):
            v, a, _, _, _ = self._field(s, yv[..., 0], yv[..., 1])
            return v, a @ mv

        for i in range(steps):
            s = tcur + i * h
            hv = h[..., None]
            hm = h[..., None, None]
            v1, k1 = stage(s, y, m)
            v2, k2 = stage(s + 0.5 * h, y + 0.5 * hv * v1, m + 0.5 * hm * k1)
            v3, k3 = stage(s + 0.5 * h, y + 0.5 * hv * v2, m + 0.5 * hm * k2)
            v4, k4 = stage(s + h, y + hv * v3, m + hm * k3)
            y = y + (hv / 6.0) * (v1 + 2 * v2 + 2 * v3 + v4)
            m = m + (hm / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        return y, m

    def _m0(self, y):
        """Initial convected chart m0 = y1 sin F0 - y2 cos F0 and its gradient."""
        zero = np.zeros(y.shape[0])
        r10, _ = self.solve_r1(zero, y[:, 0], y[:, 1])
        fv, df = self.F(r10), self.F.d(r10)
        c, s = np.cos(fv), np.sin(fv)
        delta0 = 1.0 - (y[:, 0] * s - y[:, 1] * c) * df
        val = y[:, 0] * s - y[:, 1] * c
        # d(val)/dy through both the explicit y and F(r1(0, y))
        dr_dy1, dr_dy2 = -c / delta0, -s / delta0
        common = (y[:, 0] * c + y[:, 1] * s) * df
        d1 = s + common * dr_dy1
        d2 = -c + common * dr_dy2
        return val, d1, d2

    def __call__(self, t, x, branch=None):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        x1, x2 = x[:, 0], x[:, 1]
        n = len(t)

        r1, ok = self.solve_r1(t, x1, x2)
        fv, df = self.F(r1), self.F.d(r1)
        c, s = np.cos(fv), np.sin(fv)
        a = fv / self.kappa + self.a0
        delta = 1.0 - df / self.kappa * t - (x1 * s - x2 * c) * df

        y, mmat = self._foot(t, x1, x2)
        m, d1, d2 = self._m0(y)
        grad_m = np.empty((n, 2))
        grad_m[:, 0] = d1 * mmat[:, 0, 0] + d2 * mmat[:, 1, 0]
        grad_m[:, 1] = d1 * mmat[:, 0, 1] + d2 * mmat[:, 1, 1]
        dm_dt = -(grad_m[:, 0] * s + grad_m[:, 1] * (-c))

        u3 = self.g(m)
        dg = self.g.d(m)
        u = np.column_stack([a, s, -c, u3])

        grad_r1 = np.zeros((n, 4))
        grad_r1[:, 0] = a / delta
        grad_r1[:, 1] = -c / delta
        grad_r1[:, 2] = -s / delta

        jac = np.zeros((n, 4, 4))
        jac[:, 0, :] = (df / self.kappa)[:, None] * grad_r1
        jac[:, 1, :] = (df * c)[:, None] * grad_r1
        jac[:, 2, :] = (df * s)[:, None] * grad_r1
        jac[:, 3, 0] = dg * dm_dt
        jac[:, 3, 1] = dg * grad_m[:, 0]
        jac[:, 3, 2] = dg * grad_m[:, 1]

        r2 = -c * t - x2
        r3 = -s * t + x1
        r = np.column_stack([r1, r2, r3])
        status = np.where(ok & np.isfinite(u).all(axis=1) & np.isfinite(jac).all(axis=(1, 2)),
                          STATUS_OK, STATUS_NO_CONVERGENCE).astype(np.int8)
        return r, u, jac, delta, status

    # -- invariants chart (profile view of the transported solution) ---------

    def invariants_to_point(self, r):
        """(t, x1, x2) of the point whose invariant triple is r; x3 is free."""
        r1 = r[:, 0]
        fv = self.F(r1)
        c, s = np.cos(fv), np.sin(fv)
        a = fv / self.kappa + self.a0
        t = (r1 + r[:, 2] * c - r[:, 1] * s) / a
        x1 = r[:, 2] + s * t
        x2 = -r[:, 1] - c * t
        return t, x1, x2

    def profile_chart(self, r):
        """State u = f(r) and the wave-decomposition matrix Phi (N, 4, 3).

        The solution is x3-independent, so (t, x1, x2) -> (r1, r2, r3) is a
        chart and both u and the coefficients of the exact gradient over the
        wave covectors, du = Phi lam, are functions of the invariant triple;
        Phi plays the profile-Jacobian role in the compatibility checks.
        """
        t, x1, x2 = self.invariants_to_point(r)
        x = np.column_stack([x1, x2, np.zeros_like(x1)])
        _, u, jac, _, _ = self(t, x)

        # covector block over (t, x1, x2): rows (a, u2, -u1), (u2, 0, -1), (-u1, 1, 0)
        lam_block = np.empty((len(r), 3, 3))
        lam_block[:, 0, 0], lam_block[:, 0, 1], lam_block[:, 0, 2] = u[:, 0], u[:, 2], -u[:, 1]
        lam_block[:, 1, 0], lam_block[:, 1, 1], lam_block[:, 1, 2] = u[:, 2], 0.0, -1.0
        lam_block[:, 2, 0], lam_block[:, 2, 1], lam_block[:, 2, 2] = -u[:, 1], 1.0, 0.0
        phi = np.linalg.solve(np.swapaxes(lam_block, 1, 2), np.swapaxes(jac[:, :, :3], 1, 2))
        return u, np.swapaxes(phi, 1, 2)

