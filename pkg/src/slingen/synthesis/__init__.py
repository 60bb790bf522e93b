from .families import Family, UnsupportedHLAC, detect_family
from .pme import PME, BlockEquation, generate_pme
from .invariants import LoopInvariant, Task, enumerate_invariants

__all__ = [
    "BlockEquation",
    "Family",
    "LoopInvariant",
    "PME",
    "Task",
    "UnsupportedHLAC",
    "detect_family",
    "enumerate_invariants",
    "generate_pme",
]
