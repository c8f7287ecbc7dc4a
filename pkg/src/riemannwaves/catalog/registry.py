"""Family registry: builders, defaults, constraints for all solution families.

Parameter names follow the conventional symbols (A1, B1, C1, gamma, e1, m2,
modulus_k, branch, ...).  Every builder validates its structural constraints
(unit directions, locked angles, modulus bounds, nondegeneracy) and returns
a runnable FamilySpec; violations raise ConstraintError naming the
constraint.
"""

from __future__ import annotations

import numpy as np

from ..fluid import GasParams
from . import profiles as pf
from .base import (
    ConstraintError,
    CustomWave,
    FamilySpec,
    PotentialWave,
    RotationalWave,
    stack_waves,
)
from .transported import PlanarVelocity, RotatingPolarizationEvaluator, TransportedEvaluator

__all__ = ["REGISTRY_IDS", "make_family", "family_defaults", "family_info", "registry_entries"]

ANGLE_TOL = 1e-10


def _vec3(value, name):
    v = np.asarray(value, dtype=float).reshape(3)
    if not np.all(np.isfinite(v)):
        raise ConstraintError(f"{name} must be a finite 3-vector")
    return v


def _unit3(value, name):
    v = _vec3(value, name)
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > 1e-9:
        raise ConstraintError(f"{name} must be a unit vector (|{name}| = {norm:.3g})")
    return v / norm


def _check_angle(e_i, e_j, kappa, names):
    dot = float(e_i @ e_j)
    if abs(dot + 1.0 / kappa) > ANGLE_TOL:
        raise ConstraintError(
            f"angle constraint violated: {names[0]}.{names[1]} = {dot:.12g}, required -1/kappa = {-1.0/kappa:.12g}")


def _acoustic_profile(preset, a, b, who):
    if preset == "linear":
        return pf.linear(a)
    if preset == "kink":
        return pf.kink(a, b)
    if preset == "expkink":
        return pf.expkink(a, b)
    raise ConstraintError(f"unknown profile preset {preset!r} for {who}")


# ---------------------------------------------------------------------------
# rank-1 acoustic simple wave
# ---------------------------------------------------------------------------

def _defaults_r1_e(gas):
    return {"A1": 0.25, "B1": 1.0, "e1": (1.0, 0.0, 0.0), "epsilon": 1, "profile": "linear"}


def _build_r1_e(p, gas):
    kappa = gas.kappa
    e1 = _unit3(p["e1"], "e1")
    eps = int(p["epsilon"])
    prof = _acoustic_profile(p["profile"], p["A1"], p["B1"], "R1_E")
    wave = PotentialWave(e=e1, epsilon=eps)
    waves, waves_jac = stack_waves([wave])

    def profile(r, t):
        amp = prof(r[:, 0])
        return np.column_stack([amp, kappa * amp[:, None] * e1])

    def profile_jac(r, t):
        d = prof.d(r[:, 0])
        out = np.empty((len(r), 4, 1))
        out[:, 0, 0] = d
        out[:, 1:, 0] = kappa * d[:, None] * e1
        return out

    tsing = ((1.0 + kappa) * p["A1"]) ** -1.0 if p["A1"] != 0 else None

    def closed_form(t, x, branch=None):
        denom = (1.0 + kappa) * p["A1"] * t - 1.0
        r = (x @ e1) / denom
        return r[:, None], profile(r[:, None], t)

    return FamilySpec(
        id="R1_E", rank=1, n_waves=1,
        description="rank-1 acoustic simple wave (linear or kink amplitude)",
        params=p, gas=gas,
        profile=profile, profile_jac=profile_jac, waves=waves, waves_jac=waves_jac,
        singular_time_values=(tsing,) if tsing is not None else (),
        closed_form=closed_form if p["profile"] == "linear" else None,
        probe_x=-e1,
        default_window={"t": (0.0, 0.5)},
    )


# ---------------------------------------------------------------------------
# rank-1 vortex wave
# ---------------------------------------------------------------------------

def _defaults_r1_s(gas):
    return {"a0": 1.0, "C": 1.0, "A1": 1.0, "A2": 1.0,
            "e1": (1.0, 0.0, 0.0), "m1": (0.0, 1.0, 0.0), "profile": "sech"}


def _build_r1_s(p, gas):
    e1 = _unit3(p["e1"], "e1")
    m1 = _vec3(p["m1"], "m1")
    exm = np.cross(e1, m1)
    if abs(exm[2]) < 1e-12:
        raise ConstraintError("(e1 x m1)_3 must be nonzero so u3 can close the circulation")
    if p["profile"] != "sech":
        raise ConstraintError(f"unknown profile preset {p['profile']!r} for R1_S")
    p1, p2 = pf.sech_bump(p["A1"]), pf.sech_bump(p["A2"])
    c, a0 = p["C"], p["a0"]
    if not a0 > 0:
        raise ConstraintError("a0 must be positive")
    wave = RotationalWave(lsp=-exm)
    waves, waves_jac = stack_waves([wave])

    def profile(r, t):
        s = r[:, 0]
        u1, u2 = p1(s), p2(s)
        u3 = (c - exm[0] * u1 - exm[1] * u2) / exm[2]
        return np.column_stack([np.full_like(s, a0), u1, u2, u3])

    def profile_jac(r, t):
        s = r[:, 0]
        d1, d2 = p1.d(s), p2.d(s)
        out = np.zeros((len(s), 4, 1))
        out[:, 1, 0] = d1
        out[:, 2, 0] = d2
        out[:, 3, 0] = -(exm[0] * d1 + exm[1] * d2) / exm[2]
        return out

    return FamilySpec(
        id="R1_S", rank=1, n_waves=1,
        description="rank-1 vortex wave with bounded sech profiles",
        params=p, gas=gas,
        profile=profile, profile_jac=profile_jac, waves=waves, waves_jac=waves_jac,
        default_window={"t": (0.0, 3.0)},
    )


# ---------------------------------------------------------------------------
# two acoustic waves, angle-locked (linear superposition)
# ---------------------------------------------------------------------------

def _angled_pair(kappa):
    cosphi = -1.0 / kappa
    sinphi = np.sqrt(1.0 - cosphi**2)
    return (1.0, 0.0, 0.0), (cosphi, sinphi, 0.0)


def _defaults_r2_e1e2(gas):
    e1, e2 = _angled_pair(gas.kappa)
    return {"A1": 0.25, "A2": 0.25, "B1": 1.0, "B2": 1.0,
            "e1": e1, "e2": e2, "profile": "linear"}


def _build_r2_e1e2(p, gas):
    kappa = gas.kappa
    e1, e2 = _unit3(p["e1"], "e1"), _unit3(p["e2"], "e2")
    _check_angle(e1, e2, kappa, ("e1", "e2"))
    prof1 = _acoustic_profile(p["profile"], p["A1"], p["B1"], "R2_E1E2")
    prof2 = _acoustic_profile(p["profile"], p["A2"], p["B2"], "R2_E1E2")
    waves, waves_jac = stack_waves([PotentialWave(e=e1), PotentialWave(e=e2)])

    def profile(r, t):
        a1v, a2v = prof1(r[:, 0]), prof2(r[:, 1])
        a = a1v + a2v
        u = kappa * (a1v[:, None] * e1 + a2v[:, None] * e2)
        return np.column_stack([a, u])

    def profile_jac(r, t):
        d1, d2 = prof1.d(r[:, 0]), prof2.d(r[:, 1])
        out = np.empty((len(r), 4, 2))
        out[:, 0, 0], out[:, 0, 1] = d1, d2
        out[:, 1:, 0] = kappa * d1[:, None] * e1
        out[:, 1:, 1] = kappa * d2[:, None] * e2
        return out

    tsing = tuple(((1.0 + kappa) * p[f"A{i}"]) ** -1.0 for i in (1, 2) if p[f"A{i}"] != 0)

    def closed_form(t, x, branch=None):
        r = np.empty((len(t), 2))
        for i, (ai, ei) in enumerate(((p["A1"], e1), (p["A2"], e2))):
            r[:, i] = -(x @ ei) / (1.0 - (1.0 + kappa) * ai * t)
        return r, profile(r, t)

    return FamilySpec(
        id="R2_E1E2", rank=2, n_waves=2,
        description="two acoustic waves superposed linearly; angle-locked directions",
        params=p, gas=gas,
        profile=profile, profile_jac=profile_jac, waves=waves, waves_jac=waves_jac,
        singular_time_values=tsing,
        closed_form=closed_form if p["profile"] == "linear" else None,
        probe_x=-(e1 + e2),
        default_window={"t": (0.0, 0.45)},
    )


# ---------------------------------------------------------------------------
# acoustic + vortex double wave
# ---------------------------------------------------------------------------

def _defaults_r2_e1s2(gas):
    phi = np.pi / 3.0
    return {"A1": 0.25, "B1": 1.0, "A2": 0.25, "B2": 1.0, "D2": 1.0,
            "C1": 1.0, "C2": 1.0, "a0": 1.0,
            "e1": (np.cos(phi), np.sin(phi), 0.0), "profile": "linear"}


def _e1s2_geometry(e1, c1, c2):
    """Derived coupling data: s covector direction, u2-line (1, E2, C1) and offset."""
    if abs(e1[1]) < 1e-12:
        raise ConstraintError("e1_2 must be nonzero for the vortex coupling")
    denom = c1 * e1[0] - e1[2]
    if abs(denom) < 1e-12:
        raise ConstraintError("C1 e1_1 - e1_3 must be nonzero")
    s = np.array([
        -(e1[0] * e1[2] + c1 * (1.0 - e1[0] ** 2)),
        -e1[1] * (e1[2] - c1 * e1[0]),
        1.0 - e1[2] ** 2 + c1 * e1[0] * e1[2],
    ])
    e2cap = -(c1 * e1[2] + e1[0]) / e1[1]
    f2 = -c2 / (e1[1] * denom)
    return s, np.array([1.0, e2cap, c1]), f2


def _build_r2_e1s2(p, gas):
    kappa = gas.kappa
    e1 = _unit3(p["e1"], "e1")
    s, dline, f2 = _e1s2_geometry(e1, p["C1"], p["C2"])
    a0 = p["a0"]
    if p["profile"] == "linear":
        pa, q = pf.linear(p["A1"]), pf.linear(p["A2"])
    elif p["profile"] == "soliton":
        pa, q = pf.bump(p["A1"], p["B1"]), pf.coshwell(p["A2"], p["B2"], p["D2"])
    else:
        raise ConstraintError(f"unknown profile preset {p['profile']!r} for R2_E1S2")
    offset = np.array([0.0, f2 * 1.0, 0.0])  # u2-line offset: (0, F2, 0)
    waves, waves_jac = stack_waves([PotentialWave(e=e1), RotationalWave(lsp=s)])

    def profile(r, t):
        av, qv = pa(r[:, 0]), q(r[:, 1])
        u = kappa * av[:, None] * e1 + qv[:, None] * dline + offset
        return np.column_stack([av + a0, u])

    def profile_jac(r, t):
        da, dq = pa.d(r[:, 0]), q.d(r[:, 1])
        out = np.empty((len(r), 4, 2))
        out[:, 0, 0], out[:, 0, 1] = da, 0.0
        out[:, 1:, 0] = kappa * da[:, None] * e1
        out[:, 1:, 1] = dq[:, None] * dline
        return out

    c0 = a0 + f2 * e1[1]  # constant part of the acoustic phase
    if p["profile"] == "linear":
        tsing = (((1.0 + kappa) * p["A1"]) ** -1.0,)
        probe_x = -0.5 * e1

        def closed_form(t, x, branch=None):
            r1 = (c0 * t - x @ e1) / (1.0 - (1.0 + kappa) * p["A1"] * t)
            r2 = p["C2"] * t + x @ s
            r = np.column_stack([r1, r2])
            return r, profile(r, t)
    else:
        tsing = ((1.0 + p["B1"]) ** 1.5 / ((1.0 + kappa) * p["A1"] * p["B1"]),)
        # ray whose branch folds at r1 = 0 exactly at the closed-form time
        probe_x = float(((1.0 + kappa) * pa(np.zeros(1))[0] + c0) * tsing[0]) * e1
        closed_form = None

    return FamilySpec(
        id="R2_E1S2", rank=2, n_waves=2,
        description="acoustic + vortex double wave (trigonometric or solitary)",
        params=p, gas=gas,
        profile=profile, profile_jac=profile_jac, waves=waves, waves_jac=waves_jac,
        singular_time_values=tsing,
        closed_form=closed_form,
        probe_x=probe_x,
        default_window={"t": (0.0, 0.45)},
    )


# ---------------------------------------------------------------------------
# two vortex waves from a degenerate stream function (power-law)
# ---------------------------------------------------------------------------

def _defaults_r2_s1s2_ma(gas):
    return {"n": 2, "a0": 1.0, "D1": 1.0, "branch": "plus"}


def _build_r2_s1s2_ma(p, gas):
    n = int(p["n"])
    if n == 1:
        raise ConstraintError("power n must be an integer different from 1")
    a0, d1 = p["a0"], p["D1"]
    if not a0 > 0:
        raise ConstraintError("a0 must be positive")
    waves, waves_jac = stack_waves([RotationalWave(lsp=np.array([1.0, 0, 0])),
                                    RotationalWave(lsp=np.array([0, 1.0, 0]))])

    def w_of(r):
        return r[:, 0] / r[:, 1]

    def profile(r, t):
        w = w_of(r)
        u1 = (1.0 - n) * w**n
        u2 = -n * w ** (n - 1)
        u3 = d1 * r[:, 0]
        return np.column_stack([np.full(len(r), a0), u1, u2, u3])

    def profile_jac(r, t):
        w = w_of(r)
        dw1 = 1.0 / r[:, 1]
        dw2 = -w / r[:, 1]
        du1 = (1.0 - n) * n * w ** (n - 1)
        du2 = -n * (n - 1) * w ** (n - 2)
        out = np.zeros((len(r), 4, 2))
        out[:, 1, 0], out[:, 1, 1] = du1 * dw1, du1 * dw2
        out[:, 2, 0], out[:, 2, 1] = du2 * dw1, du2 * dw2
        out[:, 3, 0] = d1
        return out

    def sheet_w(t, x, branch):
        branch = branch or p.get("branch", "plus")
        x1, x2 = x[:, 0], x[:, 1]
        disc = x2 * x2 + 4.0 * t * x1
        root = np.sqrt(np.maximum(disc, 0.0))
        if branch == "plus":        # u2 = (x2 + root)/t
            sigma = -1.0
        elif branch == "minus":     # u2 = (x2 - root)/t
            sigma = 1.0
        elif branch == "auto":      # sheet continuous as t -> 0+
            sigma = np.where(x2 >= 0, 1.0, -1.0)
        else:
            raise ConstraintError(f"unknown branch {branch!r}")
        return (-x2 + sigma * root) / (2.0 * t)

    def guess_fn(t, x, branch):
        w = sheet_w(t, x, branch)
        r1 = x[:, 0] + w * w * t
        r2 = x[:, 1] + 2.0 * w * t
        return np.column_stack([r1, r2])

    def closed_form(t, x, branch=None):
        r = guess_fn(t, x, branch)
        return r, profile(r, t)

    def validity_fn(t, x):
        disc = x[:, 1] ** 2 + 4.0 * t * x[:, 0]
        return (t > 1e-6) & (disc > 1e-10)

    spec = FamilySpec(
        id="R2_S1S2_MA", rank=2, n_waves=2,
        description="two vortex waves from a degenerate stream function (power-law, two sheets)",
        params=p, gas=gas,
        profile=profile, profile_jac=profile_jac, waves=waves, waves_jac=waves_jac,
        singular_time_values=(0.0,),
        guess_fn=guess_fn,
        closed_form=closed_form if n == 2 else None,
        validity_fn=validity_fn,
        branches=("plus", "minus", "auto"),
        default_window={"t": (0.5, 1.5), "x1": (0.5, 1.5), "x2": (-0.5, 0.5), "x3": (-1.0, 1.0)},
        notes="branch 'plus': u2 = (x2 + sqrt((x2)^2 + 4 t x1))/t sheet; validity restricted to t > 0",
    )
    spec.params["_stream"] = pf.npower_stream(n)
    return spec


# ---------------------------------------------------------------------------
# two vortex waves, additive velocity split
# ---------------------------------------------------------------------------

def _defaults_r2_s1s2_add(gas):
    return {"a0": 1.0, "C1": 1.0, "C2": 1.0,
            "A1": 0.25, "B1": 1.0, "A2": 0.25, "B2": 1.0, "A3": 0.25, "B3": 1.0,
            "e1": (0.0, 0.0, 1.0), "m1": (0.0, -1.0, 0.0),
            "e2": (0.0, 1.0, 0.0), "m2": (-1.0, 0.0, 1.0),
            "profile": "kink"}


def _build_r2_s1s2_add(p, gas):
    a0, c1, c2 = p["a0"], p["C1"], p["C2"]
    if not a0 > 0:
        raise ConstraintError("a0 must be positive")
    l1 = np.cross(_unit3(p["e1"], "e1"), _vec3(p["m1"], "m1"))
    l2 = np.cross(_unit3(p["e2"], "e2"), _vec3(p["m2"], "m2"))
    if abs(l1[0]) < 1e-12 or abs(l2[0]) < 1e-12:
        raise ConstraintError("first components of e_i x m_i must be nonzero")
    eta_den = l1[0] * l2[2] - l1[2] * l2[0]
    if abs(eta_den) < 1e-12:
        raise ConstraintError("wave directions degenerate: l1_1 l2_3 - l1_3 l2_1 = 0")
    eta = (l2[0] * l1[1] - l1[0] * l2[1]) / eta_den
    if p["profile"] != "kink":
        raise ConstraintError(f"unknown profile preset {p['profile']!r} for R2_S1S2_ADD")
    q21 = pf.kink(p["A2"], p["B2"])
    q31 = pf.kink(p["A3"], p["B3"])
    q22 = pf.kink(p["A1"], p["B1"])
    waves, waves_jac = stack_waves([RotationalWave(lsp=-l1), RotationalWave(lsp=-l2)])

    def parts(r):
        return q21(r[:, 0]), q31(r[:, 0]), q22(r[:, 1])

    def profile(r, t):
        v21, v31, v22 = parts(r)
        u1 = (c1 - l1[1] * v21 - l1[2] * v31) / l1[0] \
            - ((l2[2] * eta + l2[1]) * v22 - c2) / l2[0]
        u2 = v21 + v22
        u3 = v31 + eta * v22
        return np.column_stack([np.full(len(r), a0), u1, u2, u3])

    def profile_jac(r, t):
        d21, d31, d22 = q21.d(r[:, 0]), q31.d(r[:, 0]), q22.d(r[:, 1])
        out = np.zeros((len(r), 4, 2))
        out[:, 1, 0] = -(l1[1] * d21 + l1[2] * d31) / l1[0]
        out[:, 1, 1] = -(l2[2] * eta + l2[1]) * d22 / l2[0]
        out[:, 2, 0], out[:, 2, 1] = d21, d22
        out[:, 3, 0], out[:, 3, 1] = d31, eta * d22
        return out

    return FamilySpec(
        id="R2_S1S2_ADD", rank=2, n_waves=2,
        description="two vortex waves, additive velocity split, kink profiles",
        params=p, gas=gas,
        profile=profile, profile_jac=profile_jac, waves=waves, waves_jac=waves_jac,
        default_window={"t": (0.0, 3.0)},
    )


# ---------------------------------------------------------------------------
# two angle-locked acoustic waves + transverse vortex mode
# ---------------------------------------------------------------------------

def _defaults_r2_e1e2s3(gas):
    c = np.sqrt((1.0 + 1.0 / gas.kappa) / 2.0)
    s = np.sqrt(1.0 - c * c)
    return {"A1": 0.25, "D1": 1.0, "u30": 1.0,
            "e1": (c, s, 0.0), "e2": (-c, s, 0.0), "profile": "kink13"}


def _build_r2_e1e2s3(p, gas):
    kappa = gas.kappa
    e1, e2 = _unit3(p["e1"], "e1"), _unit3(p["e2"], "e2")
    _check_angle(e1, e2, kappa, ("e1", "e2"))
    if abs(e1[2]) > 1e-12 or abs(e2[2]) > 1e-12:
        raise ConstraintError("e1 and e2 must lie in the x1-x2 plane")
    a1c, u30 = p["A1"], p["u30"]
    if p["profile"] != "kink13":
        raise ConstraintError(f"unknown profile preset {p['profile']!r} for R2_E1E2S3")
    u13 = pf.kink(p["D1"], 1.0)
    wdir = (e1 - e2)[:2]
    wdir = wdir / np.linalg.norm(wdir)
    waves, waves_jac = stack_waves([
        PotentialWave(e=e1), PotentialWave(e=e2),
        RotationalWave(lsp=np.array([0.0, 0.0, 1.0])),
    ])

    def profile(r, t):
        base = kappa * a1c * (r[:, :1] * e1 + r[:, 1:2] * e2)
        w = u13(r[:, 2])
        return np.column_stack([a1c * (r[:, 0] + r[:, 1]),
                                base[:, 0] + w * wdir[0],
                                base[:, 1] + w * wdir[1],
                                np.full(len(r), u30)])

    def profile_jac(r, t):
        out = np.zeros((len(r), 4, 3))
        out[:, 0, 0] = out[:, 0, 1] = a1c
        out[:, 1:3, 0] = kappa * a1c * e1[:2]
        out[:, 1:3, 1] = kappa * a1c * e2[:2]
        dw = u13.d(r[:, 2])
        out[:, 1, 2] = dw * wdir[0]
        out[:, 2, 2] = dw * wdir[1]
        return out

    tval = ((1.0 + kappa) * a1c) ** -1.0

    def closed_form(t, x, branch=None):
        r3 = x[:, 2] - u30 * t
        w = u13(r3)
        denom = 1.0 - (1.0 + kappa) * a1c * t
        r1 = (float(e1[:2] @ wdir) * w * t - x @ e1) / denom
        r2 = (float(e2[:2] @ wdir) * w * t - x @ e2) / denom
        r = np.column_stack([r1, r2, r3])
        return r, profile(r, t)

    return FamilySpec(
        id="R2_E1E2S3", rank=2, n_waves=3,
        description="two angle-locked acoustic waves plus a transverse vortex mode",
        params=p, gas=gas,
        profile=profile, profile_jac=profile_jac, waves=waves, waves_jac=waves_jac,
        singular_time_values=(tval,),
        closed_form=closed_form,
        probe_x=-(e1 + e2),
        default_window={"t": (0.0, 0.45)},
    )


# ---------------------------------------------------------------------------
# acoustic wave with two stationary shear modes
# ---------------------------------------------------------------------------

def _defaults_r2_e1s2s3(gas):
    return {"A1": 0.25, "C2": 1.0, "C3": 1.0, "C": 1.0, "b": 2.0,
            "l2": (1.0, 1.0, 1.0), "l31": 1.0}


def _build_r2_e1s2s3(p, gas):
    kappa = gas.kappa
    a1c = p["A1"]
    l2 = _vec3(p["l2"], "l2")
    l31 = float(p["l31"])
    b = float(p["b"])
    if abs(l2[0]) < 1e-12 or abs(l2[2]) < 1e-12 or abs(l31) < 1e-12:
        raise ConstraintError("l2_1, l2_3 and l3_1 must be nonzero")
    if abs(b * l2[0] - l31) < 1e-12:
        raise ConstraintError("b l2_1 - l3_1 must be nonzero (waves degenerate)")
    l3 = np.array([l31, b * l2[1], b * l2[2]])
    cconst = p["C2"] / l2[0] + p["C3"] / l31
    cc = p["C"]
    e1 = np.array([1.0, 0.0, 0.0])
    waves, waves_jac = stack_waves([
        PotentialWave(e=e1), RotationalWave(lsp=-l2), RotationalWave(lsp=-l3),
    ])

    def profile(r, t):
        shear = cc * (l31 * r[:, 1] - l2[0] * r[:, 2])
        return np.column_stack([
            a1c * r[:, 0],
            kappa * a1c * r[:, 0] + cconst,
            shear,
            -(l2[1] / l2[2]) * shear,
        ])

    def profile_jac(r, t):
        out = np.zeros((len(r), 4, 3))
        out[:, 0, 0] = a1c
        out[:, 1, 0] = kappa * a1c
        out[:, 2, 1], out[:, 2, 2] = cc * l31, -cc * l2[0]
        out[:, 3, 1], out[:, 3, 2] = -(l2[1] / l2[2]) * cc * l31, (l2[1] / l2[2]) * cc * l2[0]
        return out

    tval = ((1.0 + kappa) * a1c) ** -1.0

    def closed_form(t, x, branch=None):
        denom = 1.0 - (1.0 + kappa) * a1c * t
        r1 = (cconst * t - x[:, 0]) / denom
        u1 = kappa * a1c * r1 + cconst
        r2 = l2[0] * u1 * t - x @ l2
        r3 = l31 * u1 * t - x @ l3
        r = np.column_stack([r1, r2, r3])
        return r, profile(r, t)

    def validity_fn(t, x):
        denom = 1.0 - (1.0 + kappa) * a1c * t
        return (cconst * t - x[:, 0]) / np.where(np.abs(denom) < 1e-12, np.nan, denom) > 0

    return FamilySpec(
        id="R2_E1S2S3", rank=2, n_waves=3,
        description="acoustic wave with two stationary planar shear modes",
        params=p, gas=gas,
        profile=profile, profile_jac=profile_jac, waves=waves, waves_jac=waves_jac,
        singular_time_values=(tval,),
        closed_form=closed_form,
        validity_fn=validity_fn,
        probe_x=np.array([-0.5, 0.0, 0.0]),
        default_window={"t": (0.05, 0.45), "x1": (-1.0, -0.1)},
    )


# ---------------------------------------------------------------------------
# three vortex directions, nilpotent coupling, snoidal profiles
# ---------------------------------------------------------------------------

def _defaults_r2_s1s2s3(gas):
    return {"a0": 1.0, "A1": 0.5, "B1": 1.0, "A2": 0.5, "B2": 1.0,
            "beta": 1.0, "n": 2, "modulus_k": np.sqrt(0.5), "profile": "snoidal"}


def _build_r2_s1s2s3(p, gas):
    a0 = p["a0"]
    if not a0 > 0:
        raise ConstraintError("a0 must be positive")
    k = float(p["modulus_k"])
    if not 0.0 < k * k < 1.0:
        raise ConstraintError(f"elliptic modulus must satisfy 0 < k^2 < 1, got k^2 = {k*k:.6g}")
    n = float(p["n"])
    if abs(n - 1.0) < 1e-12:
        raise ConstraintError("profile weight n must differ from 1 (rank drops)")
    if p["profile"] != "snoidal":
        raise ConstraintError(f"unknown profile preset {p['profile']!r} for R2_S1S2S3")
    bperp = pf.snwell(p["A1"], p["B1"], p["beta"], k)   # b(r2, r3) along r2 + n r3
    gdiag = pf.snkink(p["A2"], p["B2"], p["beta"], k)   # g(r2 - r3)
    waves, waves_jac = stack_waves([RotationalWave(lsp=np.array([1.0, 0, 0])),
                                    RotationalWave(lsp=np.array([0, 1.0, 0])),
                                    RotationalWave(lsp=np.array([0, 0, 1.0]))])

    def profile(r, t):
        u1 = bperp(r[:, 1] + n * r[:, 2])
        g = gdiag(r[:, 1] - r[:, 2])
        return np.column_stack([np.full(len(r), a0), u1, g, g])

    def profile_jac(r, t):
        db = bperp.d(r[:, 1] + n * r[:, 2])
        dg = gdiag.d(r[:, 1] - r[:, 2])
        out = np.zeros((len(r), 4, 3))
        out[:, 1, 1], out[:, 1, 2] = db, n * db
        out[:, 2, 1], out[:, 2, 2] = dg, -dg
        out[:, 3, 1], out[:, 3, 2] = dg, -dg
        return out

    return FamilySpec(
        id="R2_S1S2S3", rank=2, n_waves=3,
        description="three vortex directions, nilpotent coupling, snoidal profiles",
        params=p, gas=gas,
        profile=profile, profile_jac=profile_jac, waves=waves, waves_jac=waves_jac,
        default_window={"t": (0.0, 3.0)},
    )


# ---------------------------------------------------------------------------
# three acoustic waves, pairwise angle-locked
# ---------------------------------------------------------------------------

def _defaults_r3_e1e2e3(gas):
    s2 = (2.0 / 3.0) * (1.0 + 1.0 / gas.kappa)
    s, c = np.sqrt(s2), np.sqrt(1.0 - s2)
    ang = 2.0 * np.pi / 3.0
    return {"A1": 0.25, "A2": 0.25, "A3": 0.25, "B1": 1.0, "B2": 1.0, "B3": 1.0,
            "e1": (s, 0.0, c),
            "e2": (s * np.cos(ang), s * np.sin(ang), c),
            "e3": (s * np.cos(2 * ang), s * np.sin(2 * ang), c),
            "profile": "linear"}


def _build_r3_e1e2e3(p, gas):
    kappa = gas.kappa
    evecs = [_unit3(p[f"e{i}"], f"e{i}") for i in (1, 2, 3)]
    for i in range(3):
        for j in range(i + 1, 3):
            _check_angle(evecs[i], evecs[j], kappa, (f"e{i+1}", f"e{j+1}"))
    profs = [_acoustic_profile(p["profile"], p[f"A{i}"], p[f"B{i}"], "R3_E1E2E3")
             for i in (1, 2, 3)]
    waves, waves_jac = stack_waves([PotentialWave(e=e) for e in evecs])

    def profile(r, t):
        amps = [prof(r[:, i]) for i, prof in enumerate(profs)]
        a = amps[0] + amps[1] + amps[2]
        u = kappa * sum(amp[:, None] * e for amp, e in zip(amps, evecs))
        return np.column_stack([a, u])

    def profile_jac(r, t):
        out = np.empty((len(r), 4, 3))
        for i, (prof, e) in enumerate(zip(profs, evecs)):
            d = prof.d(r[:, i])
            out[:, 0, i] = d
            out[:, 1:, i] = kappa * d[:, None] * e
        return out

    if p["profile"] in ("linear", "kink"):
        tsing = tuple(((1.0 + kappa) * p[f"A{i}"]) ** -1.0 for i in (1, 2, 3))
    else:  # expkink: catastrophe on the r=0 sheet happens at negative time
        tsing = tuple(-2.0**2.5 / ((1.0 + kappa) * p[f"A{i}"] * p[f"B{i}"]) for i in (1, 2, 3))

    def closed_form(t, x, branch=None):
        r = np.empty((len(t), 3))
        for i, e in enumerate(evecs):
            r[:, i] = -(x @ e) / (1.0 - (1.0 + kappa) * p[f"A{i+1}"] * t)
        return r, profile(r, t)

    esum = evecs[0] + evecs[1] + evecs[2]
    return FamilySpec(
        id="R3_E1E2E3", rank=3, n_waves=3,
        description="three acoustic waves, pairwise angle-locked (linear, kink or exp-kink)",
        params=p, gas=gas,
        profile=profile, profile_jac=profile_jac, waves=waves, waves_jac=waves_jac,
        singular_time_values=tsing,
        closed_form=closed_form if p["profile"] == "linear" else None,
        probe_x=-esum / max(np.linalg.norm(esum), 1e-9),
        default_window={"t": (0.0, 0.45)},
    )


# ---------------------------------------------------------------------------
# acoustic + two vortex waves with a transported third invariant
# ---------------------------------------------------------------------------

def _defaults_r3_e1s2s3_v1(gas):
    return {"A1": 0.25, "B1": 1.0, "C1": 1.0, "A2": 1.0, "B2": 1.0,
            "D1": 0.5, "a0": 1.0, "u30": 1.0, "profile": "linear"}


def _build_r3_e1s2s3_v1(p, gas):
    kappa = gas.kappa
    a0, u30 = p["a0"], p["u30"]
    if not a0 > 0:
        raise ConstraintError("a0 must be positive")

    preset = p["profile"]
    r3_closed = psi = None
    if preset == "linear":
        fprof = pf.linear(p["A1"])

        def fshift(s):
            return p["A1"] * np.asarray(s, float) + p["B1"]
        fprof = pf.Fn1(f"affine(A={p['A1']:g},B={p['B1']:g})", fshift,
                       lambda s: np.full_like(np.asarray(s, float), p["A1"]))
        planar = PlanarVelocity(theta=pf.kink2(p["D1"]), cos_sign=-1.0)
        nu = kappa / (kappa + 1.0)
        beta = (1.0 + 1.0 / kappa) * p["A1"]
        shift = (p["B1"] + kappa * a0) / p["A1"]
        drift = kappa * a0 - u30

        def r3_closed(t, x3):
            e = 1.0 - beta * t
            core = x3 + drift * t - shift
            g = e ** -nu * core
            dgdx = e ** -nu
            dgdt = nu * beta * e ** (-nu - 1.0) * core + e ** -nu * drift
            return g, dgdt, dgdx
        psi = pf.Fn1("identity", lambda s: np.asarray(s, float),
                     lambda s: np.ones_like(np.asarray(s, float)))
        tsing = (((1.0 + 1.0 / kappa) * p["A1"]) ** -1.0,)
    elif preset == "concentric":
        fprof = pf.coshbump(p["A1"], p["B1"], p["C1"])
        theta = pf.theta_concentric(p["A2"], p["B2"], p["D1"])

        def post_valid(r2, r3):
            r2sq = r2 * r2 + r3 * r3
            y = 0.5 * np.log(np.abs(p["D1"] * r2sq))
            return (r2sq > 0.25) & (np.abs(np.cos(y)) > 0.2)
        planar = PlanarVelocity(theta=theta, cos_sign=-1.0, post_valid=post_valid)
        tsing = ()
    elif preset == "solitary":
        fprof = pf.coshbump(p["A1"], p["B1"], p["C1"])
        planar = PlanarVelocity(theta=pf.theta_solitary(p["D1"]), cos_sign=+1.0)
        tsing = ()
    else:
        raise ConstraintError(f"unknown profile preset {preset!r} for R3_E1S2S3_v1")

    ev = TransportedEvaluator(fprof, planar, a0, u30, kappa,
                              r3_closed=r3_closed, psi=psi)

    e1 = np.array([0.0, 0.0, 1.0])

    def lam2_fn(u):
        out = np.zeros((len(u), 4))
        out[:, 0] = 1.0
        out[:, 1] = -u[:, 1]
        out[:, 2] = -u[:, 2]
        return out

    def lam2_jac(u):
        out = np.zeros((len(u), 4, 4))
        out[:, 1, 1] = -1.0
        out[:, 2, 2] = -1.0
        return out

    waves, waves_jac = stack_waves([
        PotentialWave(e=e1),
        CustomWave(lam_fn=lam2_fn, jac_fn=lam2_jac),
        RotationalWave(lsp=np.array([0.0, 0.0, 1.0])),
    ])

    def profile(r, t):
        f1 = fprof(r[:, 0])
        u1, u2 = planar.fields(r[:, 1], r[:, 2])
        return np.column_stack([f1 / kappa + a0, u1, u2, f1 + u30])

    def profile_jac(r, t):
        df = fprof.d(r[:, 0])
        u1p, u1q, u2p, u2q = planar.partials(r[:, 1], r[:, 2])
        out = np.zeros((len(r), 4, 3))
        out[:, 0, 0] = df / kappa
        out[:, 3, 0] = df
        out[:, 1, 1], out[:, 1, 2] = u1p, u1q
        out[:, 2, 1], out[:, 2, 2] = u2p, u2q
        return out

    win = {"t": (0.0, 1.0)} if preset == "linear" else \
          {"t": (0.0, 1.0), "x1": (-1.0, 1.0), "x2": (-1.0, 1.0), "x3": (1.0, 2.5)}
    return FamilySpec(
        id="R3_E1S2S3_v1", rank=2, n_waves=3,
        description="acoustic + two vortex waves with a transported third invariant",
        params=p, gas=gas,
        profile=profile, profile_jac=profile_jac, waves=waves, waves_jac=waves_jac,
        singular_time_values=tsing,
        custom_eval=ev,
        probe_x=np.array([0.3, 0.3, -0.5]),
        default_window=win,
        notes="r3 transported along dx3/dt = u3; closed form used for the linear amplitude",
    )


# ---------------------------------------------------------------------------
# acoustic + two vortex waves, rotating polarization
# ---------------------------------------------------------------------------

def _defaults_r3_e1s2s3_v2(gas):
    return {"A1": 0.5, "B1": 0.5, "C1": 1.0, "D1": 1.0, "a0": 1.0, "profile": "periodic"}


def _build_r3_e1s2s3_v2(p, gas):
    kappa = gas.kappa
    a0 = p["a0"]
    if not a0 > 0:
        raise ConstraintError("a0 must be positive")
    if p["profile"] != "periodic":
        raise ConstraintError(f"unknown profile preset {p['profile']!r} for R3_E1S2S3_v2")
    if not abs(p["B1"]) < 1.0:
        raise ConstraintError("|B1| < 1 required for the periodic amplitude")
    fprof = pf.periodic_well(p["A1"], p["B1"], p["C1"])
    gprof = pf.kink(p["D1"], 1.0)

    def lam1_fn(u):
        out = np.zeros((len(u), 4))
        out[:, 0] = u[:, 0]
        out[:, 1] = u[:, 2]
        out[:, 2] = -u[:, 1]
        return out

    def lam1_jac(u):
        out = np.zeros((len(u), 4, 4))
        out[:, 0, 0] = 1.0
        out[:, 1, 2] = 1.0
        out[:, 2, 1] = -1.0
        return out

    waves, waves_jac = stack_waves([
        CustomWave(lam_fn=lam1_fn, jac_fn=lam1_jac),
        RotationalWave(lsp=np.array([0.0, -1.0, 0.0])),
        RotationalWave(lsp=np.array([1.0, 0.0, 0.0])),
    ])

    ev = RotatingPolarizationEvaluator(fprof, gprof, a0, kappa)

    def profile(r, t):
        return ev.profile_chart(r)[0]

    def profile_jac(r, t):
        return ev.profile_chart(r)[1]

    return FamilySpec(
        id="R3_E1S2S3_v2", rank=2, n_waves=3,
        description="acoustic + two vortex waves with rotating polarization",
        params=p, gas=gas,
        profile=profile, profile_jac=profile_jac, waves=waves, waves_jac=waves_jac,
        custom_eval=ev,
        default_window={"t": (0.0, 0.6)},
        notes="u3 is convected by the planar flow (no algebraic vortex chart is "
              "convected here); traced by backward characteristics",
    )


# ---------------------------------------------------------------------------
# free-streaming velocity with time-only sound speed
# ---------------------------------------------------------------------------

def _defaults_rk_time_a(gas):
    return {"A1": 1.0, "B1": 1.0, "C1": 1.0, "D1": 1.0, "profile": "quadratic"}


def _build_rk_time_a(p, gas):
    kappa = gas.kappa
    a1c = p["A1"]
    if not a1c > 0:
        raise ConstraintError("A1 must be positive")
    if p["profile"] == "quadratic":
        b1, c1 = p["B1"], p["C1"]
        if b1 < 0:
            raise ConstraintError("B1 must be nonnegative")
        ch = np.sqrt(b1)
        df_mat = np.array([[c1, ch], [-ch, c1]])
        rank = 3 if abs(c1) > 1e-12 or abs(b1) > 1e-12 else 2
        stream = pf.quadratic_stream(ch)
    elif p["profile"] == "nilpotent":
        b1, c1 = 0.0, 0.0
        d1 = p["D1"]
        df_mat = np.array([[0.0, d1], [0.0, 0.0]])
        rank = 1

        def _hess(pp, qq):
            shape = np.broadcast(np.asarray(pp, float), np.asarray(qq, float)).shape
            return np.zeros(shape), np.full(shape, d1), np.zeros(shape)
        stream = pf.Fn2(f"shear(D1={d1:g})",
                        lambda pp, qq: 0.5 * d1 * np.asarray(qq, float) ** 2,
                        lambda pp, qq: np.zeros_like(np.asarray(pp, float)),
                        lambda pp, qq: d1 * np.asarray(qq, float),
                        hessian=_hess)
    else:
        raise ConstraintError(f"unknown profile preset {p['profile']!r} for RK_TIME_A")

    # sound-speed polynomial P(t) = 1 + tr(Df) t + det(Df) t^2
    trd = float(np.trace(df_mat))
    detd = float(np.linalg.det(df_mat))

    def pol(t):
        return 1.0 + trd * t + detd * t * t

    def dpol(t):
        return trd + 2.0 * detd * t

    def a_of_t(t):
        return a1c * pol(t) ** (-1.0 / kappa)

    def da_dt(t):
        return a1c * (-1.0 / kappa) * pol(t) ** (-1.0 / kappa - 1.0) * dpol(t)

    waves, waves_jac = stack_waves([RotationalWave(lsp=np.array([1.0, 0, 0])),
                                    RotationalWave(lsp=np.array([0, 1.0, 0]))])

    def profile(r, t):
        vel = r @ df_mat.T
        return np.column_stack([a_of_t(t), vel[:, 0], vel[:, 1], np.zeros(len(r))])

    def profile_jac(r, t):
        out = np.zeros((len(r), 4, 2))
        out[:, 1:3, :] = df_mat
        return out

    def extra_time_deriv(t):
        out = np.zeros((len(t), 4))
        out[:, 0] = da_dt(t)
        return out

    roots = np.roots([detd, trd, 1.0]) if abs(detd) > 1e-14 else \
        (np.array([-1.0 / trd]) if abs(trd) > 1e-14 else np.array([]))
    tsing = tuple(float(r.real) for r in np.atleast_1d(roots)
                  if abs(np.imag(r)) < 1e-12)

    def closed_form(t, x, branch=None):
        # linear profile: solve (I + t Df) r = x_12 directly
        n = len(t)
        r = np.empty((n, 2))
        for i in range(n):
            r[i] = np.linalg.solve(np.eye(2) + t[i] * df_mat, x[i, :2])
        return r, profile(r, t)

    spec = FamilySpec(
        id="RK_TIME_A", rank=rank, n_waves=2,
        description="free-streaming velocity with time-only sound speed (quadratic or nilpotent stream)",
        params=p, gas=gas,
        profile=profile, profile_jac=profile_jac, waves=waves, waves_jac=waves_jac,
        singular_time_values=tsing,
        extra_time_deriv=extra_time_deriv,
        initial_a_rate=lambda u: -(trd / kappa) * u[..., 0],
        closed_form=closed_form,
        default_window={"t": (0.0, 2.0)},
        notes="velocity Jacobian has constant invariants; u3 = 0 and fields ignore x3",
    )
    spec.params["_df_matrix"] = df_mat
    spec.params["_stream"] = stream
    return spec


# ---------------------------------------------------------------------------
# registry table
# ---------------------------------------------------------------------------

_REGISTRY = {
    "R1_E": (_build_r1_e, _defaults_r1_e),
    "R1_S": (_build_r1_s, _defaults_r1_s),
    "R2_E1E2": (_build_r2_e1e2, _defaults_r2_e1e2),
    "R2_E1S2": (_build_r2_e1s2, _defaults_r2_e1s2),
    "R2_S1S2_MA": (_build_r2_s1s2_ma, _defaults_r2_s1s2_ma),
    "R2_S1S2_ADD": (_build_r2_s1s2_add, _defaults_r2_s1s2_add),
    "R2_E1E2S3": (_build_r2_e1e2s3, _defaults_r2_e1e2s3),
    "R2_E1S2S3": (_build_r2_e1s2s3, _defaults_r2_e1s2s3),
    "R2_S1S2S3": (_build_r2_s1s2s3, _defaults_r2_s1s2s3),
    "R3_E1E2E3": (_build_r3_e1e2e3, _defaults_r3_e1e2e3),
    "R3_E1S2S3_v1": (_build_r3_e1s2s3_v1, _defaults_r3_e1s2s3_v1),
    "R3_E1S2S3_v2": (_build_r3_e1s2s3_v2, _defaults_r3_e1s2s3_v2),
    "RK_TIME_A": (_build_rk_time_a, _defaults_rk_time_a),
}

REGISTRY_IDS = tuple(_REGISTRY)


def family_defaults(fid: str, gamma: float | None = None) -> dict:
    if fid not in _REGISTRY:
        raise KeyError(f"unknown family id {fid!r}; known: {', '.join(REGISTRY_IDS)}")
    gas = GasParams() if gamma is None else GasParams(gamma=gamma)
    d = {"gamma": gas.gamma}
    d.update(_REGISTRY[fid][1](gas))
    return d


def make_family(fid: str, overrides: dict | None = None, **kw) -> FamilySpec:
    """Build a validated FamilySpec; overrides merge over per-gamma defaults."""
    if fid not in _REGISTRY:
        raise KeyError(f"unknown family id {fid!r}; known: {', '.join(REGISTRY_IDS)}")
    merged = dict(overrides or {})
    merged.update(kw)
    gamma = float(merged.pop("gamma", 5.0 / 3.0))
    gas = GasParams(gamma=gamma)
    params = _REGISTRY[fid][1](gas)
    unknown = set(merged) - set(params)
    if unknown:
        raise ConstraintError(f"unknown parameters for {fid}: {sorted(unknown)}")
    params.update(merged)
    params["gamma"] = gamma
    spec = _REGISTRY[fid][0](params, gas)
    return spec


def family_info(fid: str) -> dict:
    spec = make_family(fid)
    return {
        "id": fid,
        "rank": spec.rank,
        "waves": spec.n_waves,
        "description": spec.description,
        "defaults": {k: (list(v) if isinstance(v, (tuple, np.ndarray)) else v)
                     for k, v in family_defaults(fid).items()},
        "singular_times": spec.singular_times(),
    }


def registry_entries():
    return [family_info(fid) for fid in REGISTRY_IDS]
