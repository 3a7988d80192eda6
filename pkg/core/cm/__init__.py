# core/cm/__init__.py
from core.cm.pencil import BiForm, DivClass, PencilFamily, cm_degree, fiber_at, make_pencil, nefness_probe

__all__ = ["BiForm", "DivClass", "PencilFamily", "cm_degree", "fiber_at", "make_pencil", "nefness_probe"]
