"""The dihedral group D8 generated by X(pi) and Z(pi/4).

An element ``(k, b)`` is the operator ``Z(k pi/4) X^b``: the optional X(pi)
acts first in time, then the Z rotation. Composition follows from
``X Z(theta) = Z(-theta) X`` up to a global phase.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .pauli import ptm_from_unitary, rotation


@dataclass(frozen=True, order=True)
class DihedralElement:
    k: int
    b: int

    def __post_init__(self):
        object.__setattr__(self, "k", int(self.k) % 8)
        if self.b not in (0, 1):
            raise ValueError("b must be 0 or 1")
        object.__setattr__(self, "b", int(self.b))

    @property
    def label(self):
        return f"{self.k},{self.b}"

    @property
    def index(self):
        return 2 * self.k + self.b


IDENTITY = DihedralElement(0, 0)


def all_elements():
    return [DihedralElement(k, b) for k in range(8) for b in (0, 1)]


def dihedral_compose(g1, g2):
    """Operator product ``g1 g2`` (``g2`` acts first)."""
    return DihedralElement(g1.k + (-1) ** g1.b * g2.k, g1.b ^ g2.b)


def dihedral_inverse(g):
    return g if g.b else DihedralElement(-g.k, 0)


def element_unitary(g):
    u = rotation("Z", g.k * math.pi / 4)
    if g.b:
        u = u @ rotation("X", math.pi)
    return u


@lru_cache(maxsize=None)
def _ptm_cached(k, b):
    m = ptm_from_unitary(element_unitary(DihedralElement(k, b)))
    m = np.where(np.abs(m) < 1e-15, 0.0, m)
    m.setflags(write=False)
    return m


def element_ptm(g):
    return _ptm_cached(g.k, g.b)


# characters used to weight survival: basis 1 watches Z (bit flips), basis 2 watches X (phase flips)
_CHARACTERS = {
    1: {"I": 1, "Z": 1, "X": -1, "Y": -1},
    2: {"I": 1, "X": 1, "Y": -1, "Z": -1},
}


def character(basis, pauli):
    return _CHARACTERS[basis][pauli]
