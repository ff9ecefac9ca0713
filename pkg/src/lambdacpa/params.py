"""Parameter containers for the atom-cavity system.

All rates are dimensionless, measured in units of the total excited-state
decay rate Gamma = gamma31 + gamma32, which is pinned to 1.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass

from .errors import AsymmetricCavity, VariantMismatch

_GAMMA_TOL = 1e-9


class ModelVariant(str, enum.Enum):
    FULL = "full"
    REDUCED = "reduced"
    TWO_LEVEL = "two-level"
    TWO_LEVEL_BARE = "two-level-bare"

    @property
    def is_two_level(self) -> bool:
        return self in (ModelVariant.TWO_LEVEL, ModelVariant.TWO_LEVEL_BARE)

    @classmethod
    def parse(cls, value) -> "ModelVariant":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {
            "fullthreelevel": cls.FULL,
            "reducedthreelevel": cls.REDUCED,
            "twolevelpumped": cls.TWO_LEVEL,
            "two-level-pumped": cls.TWO_LEVEL,
            "twolevelbare": cls.TWO_LEVEL_BARE,
        }
        if key in aliases:
            return aliases[key]
        return cls(key)


@dataclass(frozen=True)
class SystemParams:
    """Fixed physical rates and couplings.

    Defaults reproduce the parameter set used for every figure:
    g*sqrt(N) = 10, g = 0.02, kappa = 1, kappa*tau = 0.01, gamma12 = 0.001,
    gamma31 = gamma32 = 1/2, delta1 = 0.
    """

    gamma31: float = 0.5
    gamma32: float = 0.5
    gamma12: float = 0.001
    kappa_l: float = 1.0
    kappa_r: float = 1.0
    tau: float = 0.01
    g: float = 0.02
    n_atoms: float = 250_000.0
    omega1: float = 1.0
    r_pump: float = 0.0
    delta1: float = 0.0
    delta_ac: float = 0.0

    def __post_init__(self):
        for name in ("gamma31", "gamma32", "gamma12", "kappa_l", "kappa_r", "g",
                     "omega1", "r_pump"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be a finite non-negative rate, got {value}")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not self.n_atoms >= 1:
            raise ValueError(f"n_atoms must be >= 1, got {self.n_atoms}")
        if abs(self.gamma31 + self.gamma32 - 1.0) > _GAMMA_TOL:
            raise ValueError(
                "gamma31 + gamma32 sets the unit of rates and must equal 1, "
                f"got {self.gamma31 + self.gamma32}"
            )

    # derived quantities

    @property
    def gamma(self) -> float:
        return self.gamma31 + self.gamma32

    @property
    def symmetric(self) -> bool:
        return self.kappa_l == self.kappa_r

    @property
    def kappa(self) -> float:
        """Mean mirror decay rate; the cavity field decays at this rate."""
        return 0.5 * (self.kappa_l + self.kappa_r)

    @property
    def kappa_tau(self) -> float:
        return self.kappa * self.tau

    @property
    def g2n(self) -> float:
        return self.g * self.g * self.n_atoms

    @property
    def g_sqrt_n(self) -> float:
        return self.g * math.sqrt(self.n_atoms)

    @property
    def linear_bound(self) -> float:
        """Upper input intensity of the linear excitation regime, kappa*tau*Gamma^2/(4 g^2)."""
        return 0.25 * self.kappa_tau * self.gamma ** 2 / self.g ** 2

    def require_symmetric(self) -> float:
        if not self.symmetric:
            raise AsymmetricCavity(
                f"symmetric cavity required, got kappa_l={self.kappa_l}, kappa_r={self.kappa_r}"
            )
        return self.kappa_l

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)

    def two_level(self) -> "SystemParams":
        """The degenerate two-level system: omega1 = 0, gamma31 = Gamma, gamma32 = 0."""
        return dataclasses.replace(self, omega1=0.0, gamma31=self.gamma, gamma32=0.0)

    @classmethod
    def from_collective(cls, g_sqrt_n: float = 10.0, g: float = 0.02, kappa: float = 1.0,
                        kappa_tau: float = 0.01, **kw) -> "SystemParams":
        return cls(g=g, n_atoms=(g_sqrt_n / g) ** 2, kappa_l=kappa, kappa_r=kappa,
                   tau=kappa_tau / kappa, **kw)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def check_variant(params: SystemParams, variant: ModelVariant) -> ModelVariant:
    variant = ModelVariant.parse(variant)
    if variant.is_two_level and (params.omega1 != 0.0 or params.gamma32 != 0.0):
        raise VariantMismatch(
            f"{variant.value} needs omega1 = 0 and gamma32 = 0 "
            f"(got omega1={params.omega1}, gamma32={params.gamma32}); "
            "use SystemParams.two_level()"
        )
    if variant is ModelVariant.TWO_LEVEL_BARE and params.r_pump != 0.0:
        raise VariantMismatch("two-level-bare has no incoherent pump; set r_pump = 0")
    return variant


def default_variant(params: SystemParams) -> ModelVariant:
    """Reduced three-level model, or the pumped two-level model when degenerate."""
    if params.omega1 == 0.0 and params.gamma32 == 0.0:
        return ModelVariant.TWO_LEVEL
    return ModelVariant.REDUCED


@dataclass(frozen=True)
class ProbeDrive:
    """Probe beams: alpha_in,r = amp_in and alpha_in,l = amp_in * exp(i phi)."""

    delta_p: float
    amp_in: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if not self.amp_in >= 0:
            raise ValueError(f"amp_in must be >= 0, got {self.amp_in}")
        object.__setattr__(self, "phi", math.fmod(self.phi, 2 * math.pi) % (2 * math.pi))

    @classmethod
    def from_intensity(cls, delta_p: float, i_in: float, phi: float = 0.0) -> "ProbeDrive":
        if i_in < 0:
            raise ValueError(f"input intensity must be >= 0, got {i_in}")
        return cls(delta_p=delta_p, amp_in=math.sqrt(i_in), phi=phi)

    @property
    def i_in(self) -> float:
        return self.amp_in * self.amp_in

    @property
    def alpha_in_l(self) -> complex:
        return self.amp_in * complex(math.cos(self.phi), math.sin(self.phi))

    @property
    def alpha_in_r(self) -> complex:
        return complex(self.amp_in)

    def source(self, params: SystemParams) -> complex:
        """Cavity driving term sqrt(kappa_l/tau) a_in,l + sqrt(kappa_r/tau) a_in,r."""
        return (math.sqrt(params.kappa_l / params.tau) * self.alpha_in_l
                + math.sqrt(params.kappa_r / params.tau) * self.alpha_in_r)
