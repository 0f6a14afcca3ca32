"""Active-sensing output feedback for a rate-sensing mass-damper plant."""
from .dynamics import State, SystemParams, closed_loop_field, linearized_a, reference_orbit

__version__ = "0.1.0"

__all__ = ["State", "SystemParams", "closed_loop_field", "linearized_a", "reference_orbit"]
