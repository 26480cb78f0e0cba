"""Experiment configuration: schema, validation and unit conversion.

Configs are JSON files in laboratory units (MHz, microseconds, kHz, 1/s).
Everything is converted to internal units (K = 1, times in 1/K) here and only
here. Every block has defaults, so an empty object ``{}`` is a valid config.
"""

import json
import math
import re

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid")


class Units(_Block):
    K_MHz: float = Field(1.2, gt=0, description="Kerr coefficient K/2pi in MHz")
    T1_us: float = Field(40.0, gt=0, description="single-photon lifetime")


class Hamiltonian(_Block):
    delta_K: float = 2.0
    nbar: float = Field(5.2, gt=0, description="mean photon number; sets eps2 = nbar - delta/2")
    dim: int | None = Field(None, ge=2)

    @model_validator(mode="after")
    def _eps2_nonneg(self):
        if self.nbar - self.delta_K / 2 < 0:
            raise ValueError("nbar - delta_K/2 (the two-photon drive eps2/K) must be non-negative")
        return self


class Noise(_Block):
    kappa1_per_s: float | None = Field(None, ge=0, description="overrides 1/T1 when set")
    n_th: float = Field(0.04, ge=0, lt=0.5)
    kappa2_per_s: float = Field(7e6, ge=0)
    kappa_phi_per_s: float = Field(100.0, ge=0)
    xi_kHz: float = Field(40.0, ge=0)


class SpectrumCfg(_Block):
    eps2_K: float = Field(4.2, ge=0)
    delta_grid_K: list[float] = Field(default_factory=lambda: [0.0, 1.0, 2.0])
    levels: int = Field(8, ge=2)
    threshold_K: float = Field(1e-2, gt=0)
    dim: int = Field(40, ge=4)


class LifetimesCfg(_Block):
    delta_grid_K: list[float] = Field(default_factory=lambda: [0.0, 2.0])
    t_max_z_us: float = Field(1000.0, gt=0)
    t_max_y_us: float = Field(12.0, gt=0)
    n_points: int = Field(40, ge=4)
    n_samples: int = Field(16, ge=1)
    kappa1_only: bool = False


class InitCfg(_Block):
    ramp_us: float = Field(2.5, gt=0)
    relax_us: float = Field(400.0, ge=0)
    n_points: int = Field(40, ge=2)
    dissipation: bool = True


class ChevronCfg(_Block):
    delta0_grid_K: list[float] = Field(default_factory=lambda: [0.0, 4.0, 8.0, 12.0, 16.0])
    t_gate_grid_K: list[float] = Field(default_factory=lambda: [2.0, 3.0, 4.0])
    phase_grid: list[float] = Field(default_factory=lambda: [-1.5, -0.75, 0.0, 0.75, 1.5])
    duration_grid_K: list[float] = Field(default_factory=lambda: [0.0, 10.0, 20.0, 30.0])
    omega_K: float = Field(0.02, ge=0)
    initial: str = "ground"
    optimize: bool = False

    @field_validator("initial")
    @classmethod
    def _initial(cls, v):
        if v not in ("ground", "excited"):
            raise ValueError("must be 'ground' or 'excited'")
        return v


class ReadoutCfg(_Block):
    eps_cqr_MHz: float = Field(0.1, ge=0)
    kappa_r_MHz: float = Field(0.4, gt=0)
    t_read_us: float = Field(1.0, ge=0)
    noise_sigma: float = Field(0.3, ge=0)
    flip_prob: float | None = Field(None, ge=0, le=0.5)
    t_z_us: float = Field(1200.0, gt=0, description="used for the flip probability when flip_prob is null")
    shots: int = Field(2000, ge=2)
    true_state: int = 1

    @field_validator("true_state")
    @classmethod
    def _state(cls, v):
        if v not in (1, -1):
            raise ValueError("must be +1 or -1")
        return v


class TwirlCfg(_Block):
    h: list[float] = Field(default_factory=lambda: [0.003, 0.0, 0.004], min_length=3, max_length=3)
    p: list[float] = Field(default_factory=lambda: [1e-4, 1e-4, 0.008], min_length=3, max_length=3)

    @field_validator("p")
    @classmethod
    def _p(cls, v):
        if any(x < 0 for x in v):
            raise ValueError("stochastic rates must be non-negative")
        return v


class DrbCfg(_Block):
    depths: list[int] = Field(default_factory=lambda: [1, 50, 100, 200, 400, 800, 1200, 1600, 2000])
    samples_per_depth: int = Field(50, ge=1)
    shots: int = Field(1024, ge=1)
    p_x: float = Field(1e-5, ge=0)
    p_y: float = Field(1e-5, ge=0)
    p_z: float = Field(1e-3, ge=0)
    noisy_identity: bool = True
    scale_bit: float = Field(1.07, gt=0)
    scale_ph: float = Field(1.02, gt=0)
    ph_mode: str = "twirl"
    calibration_grid: list[float] = Field(default_factory=lambda: [0.005, 0.01, 0.015, 0.02, 0.025, 0.03])
    calibration_depths: list[int] = Field(default_factory=lambda: [1, 2, 4, 8, 16, 32, 64, 128])
    calibration_samples: int | None = Field(None, ge=1, description="null averages over all circuits exactly")
    calibration_bit_fraction: float = Field(0.02, ge=0, le=1)

    @field_validator("depths")
    @classmethod
    def _depths(cls, v):
        if any(n < 1 for n in v) or len(set(v)) < 3:
            raise ValueError("need at least three distinct positive depths")
        return v

    @field_validator("ph_mode")
    @classmethod
    def _mode(cls, v):
        if v not in ("twirl", "simple"):
            raise ValueError("must be 'twirl' or 'simple'")
        return v


class GstCfg(_Block):
    max_lengths: list[int] = Field(default_factory=lambda: [0, 1, 2, 4, 8, 16, 32, 64, 128])
    shots: int = Field(1024, ge=1)
    z_h: list[float] = Field(default_factory=lambda: [0.003, 0.0, 0.004], min_length=3, max_length=3)
    z_p: list[float] = Field(default_factory=lambda: [1e-4, 1e-4, 0.008], min_length=3, max_length=3)
    x_h: list[float] = Field(default_factory=lambda: [0.0, 0.0, 0.0], min_length=3, max_length=3)
    x_p: list[float] = Field(default_factory=lambda: [1e-4, 1e-4, 0.01], min_length=3, max_length=3)
    refine: bool = True


class ExperimentConfig(_Block):
    seed: int = Field(20240601, ge=0)
    units: Units = Field(default_factory=Units)
    hamiltonian: Hamiltonian = Field(default_factory=Hamiltonian)
    noise: Noise = Field(default_factory=Noise)
    spectrum: SpectrumCfg = Field(default_factory=SpectrumCfg)
    lifetimes: LifetimesCfg = Field(default_factory=LifetimesCfg)
    init: InitCfg = Field(default_factory=InitCfg)
    chevron: ChevronCfg = Field(default_factory=ChevronCfg)
    readout: ReadoutCfg = Field(default_factory=ReadoutCfg)
    twirl: TwirlCfg = Field(default_factory=TwirlCfg)
    drb: DrbCfg = Field(default_factory=DrbCfg)
    gst: GstCfg = Field(default_factory=GstCfg)
    output_dir: str | None = None

    # unit conversion to K = 1

    @property
    def k_rad_s(self):
        return 2 * math.pi * self.units.K_MHz * 1e6

    def time_to_internal(self, t_us):
        return t_us * 1e-6 * self.k_rad_s

    def time_to_us(self, t):
        return t / (1e-6 * self.k_rad_s)

    def rate_to_internal(self, per_s):
        return per_s / self.k_rad_s

    def mhz_to_internal(self, f_mhz):
        """Frequency ``f`` (as ``f/2pi`` in MHz) in units of K."""
        return f_mhz / self.units.K_MHz

    def kerr_params(self, delta_K=None, nbar=None, dim="config"):
        from .model import KerrCatParams

        d = self.hamiltonian.delta_K if delta_K is None else delta_K
        n = self.hamiltonian.nbar if nbar is None else nbar
        return KerrCatParams(delta=d, eps2=n - d / 2, kerr=1.0, dim=self.hamiltonian.dim if dim == "config" else dim)

    def noise_params(self, kappa1_only=False):
        from .dynamics import NoiseParams

        per_s = self.noise.kappa1_per_s
        if per_s is None:
            per_s = 1.0 / (self.units.T1_us * 1e-6)
        k1 = self.rate_to_internal(per_s)
        if kappa1_only:
            return NoiseParams(kappa1=k1)
        return NoiseParams(
            kappa1=k1,
            n_th=self.noise.n_th,
            kappa2=self.rate_to_internal(self.noise.kappa2_per_s),
            kappa_phi=self.rate_to_internal(self.noise.kappa_phi_per_s),
            xi=self.noise.xi_kHz / (1000.0 * self.units.K_MHz),
        )


class ConfigError(Exception):
    """Invalid configuration; ``messages`` holds one diagnostic per problem."""

    def __init__(self, messages):
        super().__init__("\n".join(messages))
        self.messages = messages


def _locate(text, loc):
    """Best-effort 1-based line of the JSON key at the end of ``loc``."""
    keys = [k for k in loc if isinstance(k, str)]
    if not keys or not text:
        return None
    line_starts = [0] + [m.end() for m in re.finditer("\n", text)]
    pos = 0
    for key in keys:
        m = re.compile(r'"%s"\s*:' % re.escape(key)).search(text, pos)
        if m is None:
            return None
        pos = m.start()
    return sum(1 for s in line_starts if s <= pos)


def load_config(path=None, text=None):
    """Parse and validate a config file (or ``text``); ``None`` gives all defaults."""
    source = "<defaults>"
    if path is not None:
        source = str(path)
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError([f"{source}: cannot read config: {exc.strerror}"]) from exc
    if text is None:
        return ExperimentConfig()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"{source}:{exc.lineno}: invalid JSON: {exc.msg}"]) from exc
    if not isinstance(raw, dict):
        raise ConfigError([f"{source}:1: top level must be a JSON object"])
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as exc:
        msgs = []
        for err in exc.errors():
            where = ".".join(str(x) for x in err["loc"]) or "(root)"
            line = _locate(text, err["loc"])
            prefix = f"{source}:{line}" if line else source
            msgs.append(f"{prefix}: {where}: {err['msg']}")
        raise ConfigError(msgs) from exc


def config_hash(cfg):
    import hashlib

    blob = json.dumps(cfg.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
