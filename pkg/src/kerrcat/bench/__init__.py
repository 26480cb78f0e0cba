"""Benchmarking protocols: dihedral randomized benchmarking and gate set tomography."""

from ..dihedral import DihedralElement, dihedral_compose, dihedral_inverse, element_ptm  # noqa: F401
from ..fitting import fit_exponential  # noqa: F401
from .drb import Circuit, DrbResult, drb_expected, drb_fit, drb_run, drb_sample, drb_scaling_calibration  # noqa: F401
from .gst import GstDataset, gst_generate, gst_simulate, lgst_estimate  # noqa: F401
from .noise import GateNoiseModel  # noqa: F401
