import itertools
import math

import numpy as np
import pytest

from kerrcat import dihedral
from kerrcat.dihedral import IDENTITY, DihedralElement
from kerrcat.pauli import rotation

ELEMENTS = dihedral.all_elements()


def same_up_to_phase(u, v):
    ov = np.trace(u.conj().T @ v) / 2
    return abs(abs(ov) - 1) < 1e-12


def test_group_has_sixteen_elements():
    assert len(ELEMENTS) == 16 == len(set(ELEMENTS))
    assert sorted(g.index for g in ELEMENTS) == list(range(16))


@pytest.mark.parametrize("g1,g2", list(itertools.product(ELEMENTS, ELEMENTS)))
def test_composition_matches_unitaries(g1, g2):
    prod = dihedral.dihedral_compose(g1, g2)
    assert same_up_to_phase(dihedral.element_unitary(g1) @ dihedral.element_unitary(g2),
                            dihedral.element_unitary(prod))
    assert np.max(np.abs(dihedral.element_ptm(g1) @ dihedral.element_ptm(g2) - dihedral.element_ptm(prod))) < 1e-12


def test_associativity():
    for a, b, c in itertools.product(ELEMENTS, repeat=3):
        left = dihedral.dihedral_compose(dihedral.dihedral_compose(a, b), c)
        assert left == dihedral.dihedral_compose(a, dihedral.dihedral_compose(b, c))


@pytest.mark.parametrize("g", ELEMENTS)
def test_inverse(g):
    inv = dihedral.dihedral_inverse(g)
    assert dihedral.dihedral_compose(g, inv) == IDENTITY
    assert dihedral.dihedral_compose(inv, g) == IDENTITY


def test_examples():
    x = DihedralElement(0, 1)
    assert dihedral.dihedral_compose(x, x) == IDENTITY
    z8 = DihedralElement(1, 0)
    acc = IDENTITY
    for _ in range(8):
        acc = dihedral.dihedral_compose(z8, acc)
    assert acc == IDENTITY
    assert dihedral.dihedral_compose(x, z8) == DihedralElement(7, 1)
    assert DihedralElement(9, 0) == z8


def test_element_unitary_convention():
    g = DihedralElement(2, 1)
    assert same_up_to_phase(dihedral.element_unitary(g), rotation("Z", math.pi / 2) @ rotation("X", math.pi))


def test_invalid_bit():
    with pytest.raises(ValueError):
        DihedralElement(0, 2)


def test_characters():
    assert [dihedral.character(1, p) for p in "IXYZ"] == [1, -1, -1, 1]
    assert [dihedral.character(2, p) for p in "IXYZ"] == [1, 1, -1, -1]
