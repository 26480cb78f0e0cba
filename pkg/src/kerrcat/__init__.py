"""Simulation toolkit for detuned Kerr-cat qubits.

Modules: ``fock`` (oscillator operators), ``model`` (Hamiltonian, spectrum,
logical frame), ``dynamics`` (Schrodinger and Lindblad evolution, lifetimes),
``gates`` (X and Z gates, chevrons), ``readout`` (cat-quadrature readout),
``channel`` (PTM error generators and twirls), ``bench`` (dihedral RB and GST)
and ``cli``.
"""

__version__ = "0.1.0"
