"""ISA profiles for code emission."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class IsaProfile:
    """What the backend may assume about the target vector ISA."""

    name: str                 # "scalar" | "vec256"
    nu: int
    vector_type: str          # C type of a vector value ("" for scalar)
    headers: tuple[str, ...]
    alignment: int            # bytes; 1 means no guarantee used
    flags: tuple[str, ...]    # required compile flags
    mnemonics: dict = field(default_factory=dict, hash=False, compare=False)


SCALAR = IsaProfile(
    name="scalar",
    nu=4,
    vector_type="",
    headers=("math.h",),
    alignment=1,
    flags=("-O2", "-ffp-contract=off"),
)

VEC256 = IsaProfile(
    name="vec256",
    nu=4,
    vector_type="__m256d",
    headers=("math.h", "immintrin.h"),
    alignment=1,              # unaligned load/store mnemonics throughout
    flags=("-O2", "-mavx2", "-ffp-contract=off"),
    mnemonics={
        "load": "_mm256_loadu_pd",
        "store": "_mm256_storeu_pd",
        "maskload": "_mm256_maskload_pd",
        "maskstore": "_mm256_maskstore_pd",
        "add": "_mm256_add_pd",
        "sub": "_mm256_sub_pd",
        "mul": "_mm256_mul_pd",
        "div": "_mm256_div_pd",
        "sqrt": "_mm256_sqrt_pd",
        "broadcast": "_mm256_set1_pd",
        "set": "_mm256_set_pd",
        "blend": "_mm256_blend_pd",
    },
)

_PROFILES = {p.name: p for p in (SCALAR, VEC256)}


def profile_by_name(name: str) -> IsaProfile:
    try:
        return _PROFILES[name]
    except KeyError:
        raise ValueError(f"unknown ISA profile {name!r}; "
                         f"choose from {sorted(_PROFILES)}") from None
