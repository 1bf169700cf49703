"""Exact Chevalley bases, extended Dynkin diagram involutions, and
numerically certified affine Toda / loop-algebra Lax flows."""

__version__ = "1.0.0"

from .chevalley import ChevalleyAlgebra, AlgebraElement, cached_algebra
from .rootsystem import RootSystem, build_root_system
from .coxeter import CoxeterAutomorphism, GradingProjector, LoopElement
from .involution import (CartanInvolution, DiagramInvolution,
                         compact_conjugation, enumerate_involutions,
                         find_certificate, lift_involution)
from .laxflow import FieldGrid, FlowSpec, integrate_flow
from .toda import CyclicData, TodaField, reconstruct_omega

__all__ = [
    "ChevalleyAlgebra", "AlgebraElement", "cached_algebra",
    "RootSystem", "build_root_system",
    "CoxeterAutomorphism", "GradingProjector", "LoopElement",
    "CartanInvolution", "DiagramInvolution", "compact_conjugation",
    "enumerate_involutions", "find_certificate", "lift_involution",
    "FieldGrid", "FlowSpec", "integrate_flow",
    "CyclicData", "TodaField", "reconstruct_omega",
]
