"""Closed-form rank-k solution families of the isentropic fluid system.

The registry holds one entry per family: wave composition, profile presets,
parameter defaults and structural constraints, singular-time formulas, and
validity windows.  ``make_family`` builds a validated FamilySpec,
``FamilySpec.evaluate`` solves it at spacetime points, and the helper
operations (time-only sound-speed law, Monge-Ampere residual) live alongside.
"""

from .base import (
    ConstraintError,
    ValidityError,
    FamilySpec,
    STATUS_LABELS,
)
from .registry import (
    REGISTRY_IDS,
    family_defaults,
    family_info,
    make_family,
    registry_entries,
)
from .ops import monge_ampere_residual, rankk_sound_speed

__all__ = [
    "ConstraintError",
    "ValidityError",
    "FamilySpec",
    "STATUS_LABELS",
    "REGISTRY_IDS",
    "family_defaults",
    "family_info",
    "make_family",
    "registry_entries",
    "monge_ampere_residual",
    "rankk_sound_speed",
]
