"""Simulated device: ideal gates followed by per-label error channels, plus SPAM."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import ModelError

Z_STATE = np.array([1.0, 0.0, 0.0, 1.0])
# swaps the X and Z Pauli components, taking Z-basis SPAM to X-basis SPAM
_XZ_SWAP = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=float)


@dataclass
class GateNoiseModel:
    """Error channels keyed by gate label and SPAM in the Pauli representation.

    ``errors[label]`` is a PTM applied right after the ideal gate; missing
    labels are noiseless. ``rho`` is ``(Tr rho, <X>, <Y>, <Z>)`` of the prepared
    state and ``meas`` is ``(Tr M, Tr XM, Tr YM, Tr ZM)`` of the outcome-0
    effect ``M``, so ``p0 = meas . rho / 2``.
    """

    errors: dict = field(default_factory=dict)
    rho: np.ndarray = field(default_factory=lambda: Z_STATE.copy())
    meas: np.ndarray = field(default_factory=lambda: Z_STATE.copy())
    noisy_identity: bool = True
    noisy_virtual_x: bool = False
    ideal_fiducials: bool = True

    def __post_init__(self):
        self.errors = {k: np.asarray(v, dtype=float) for k, v in self.errors.items()}
        for label, m in self.errors.items():
            if m.shape != (4, 4) or np.max(np.abs(m[0] - [1, 0, 0, 0])) > 1e-9:
                raise ModelError(f"error channel for {label!r} is not a trace-preserving PTM")
        self.rho = np.asarray(self.rho, dtype=float)
        self.meas = np.asarray(self.meas, dtype=float)
        p = 0.5 * float(self.meas @ self.rho)
        if not -1e-9 <= p <= 1 + 1e-9:
            raise ModelError("SPAM vectors give a probability outside [0, 1]")

    def error(self, label):
        return self.errors.get(label, np.eye(4))

    def spam(self, basis=1):
        """``(rho, meas)`` for the Z basis (1) or the X basis (2)."""
        if basis == 1:
            return self.rho, self.meas
        if basis == 2:
            return _XZ_SWAP @ self.rho, _XZ_SWAP @ self.meas
        raise ValueError("basis must be 1 or 2")
