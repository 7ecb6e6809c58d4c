"""
Synthetic fixture module: lattice and real-zone point processes with planted hotspots.
"""

from .generator import (
    SynthFixture,
    SynthSpec,
    block_indices,
    block_interior,
    generate,
    generate_on_zones,
    lattice_zones,
    write_fixture,
)

__all__ = [
    "SynthFixture",
    "SynthSpec",
    "block_indices",
    "block_interior",
    "generate",
    "generate_on_zones",
    "lattice_zones",
    "write_fixture",
]
