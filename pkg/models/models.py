from typing import Any, Dict, List, Optional, Tuple, Type

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from models.errors import LabError


def validated(model: Type[BaseModel], error: Type[LabError], **data) -> BaseModel:
    """Build a model, turning pydantic validation failures into a lab error."""
    try:
        return model(**data)
    except ValidationError as e:
        messages = "; ".join(err["msg"] for err in e.errors())
        raise error(f"Invalid {model.__name__}: {messages}") from e


# profiles: partitions and anisotropies
class Partition(BaseModel):
    model_config = ConfigDict(frozen=True)

    parts: Tuple[int, ...] = ()

    @field_validator("parts", mode="before")
    @classmethod
    def strip_zeros(cls, value):
        return tuple(int(p) for p in value if int(p) != 0)

    @field_validator("parts")
    @classmethod
    def weakly_decreasing(cls, value):
        if any(p < 0 for p in value):
            raise ValueError("parts must be positive integers")
        if any(value[i] < value[i + 1] for i in range(len(value) - 1)):
            raise ValueError("parts must be weakly decreasing")
        return value

    @property
    def weight(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    def multiplicities(self) -> List[Tuple[int, int]]:
        """Distinct parts in decreasing order, each with its multiplicity."""
        out: List[Tuple[int, int]] = []
        for p in self.parts:
            if out and out[-1][0] == p:
                out[-1] = (p, out[-1][1] + 1)
            else:
                out.append((p, 1))
        return out

    def boxes(self) -> List[Tuple[int, int]]:
        return [(i + 1, j + 1) for i, p in enumerate(self.parts) for j in range(p)]

    def label(self) -> str:
        return "(" + ",".join(str(p) for p in self.parts) + ")"


class Anisotropy(BaseModel):
    model_config = ConfigDict(frozen=True)

    r2: float
    r1: float

    @model_validator(mode="after")
    def signs(self):
        if not (self.r2 < 0 < self.r1):
            raise ValueError(f"anisotropy needs r2 < 0 < r1, got ({self.r2}, {self.r1})")
        return self


# profiles: piecewise-linear slope +-1 functions
class Profile(BaseModel):
    """
    Interlacing corners of a profile f(c) ~ |c - center|.

    minima are stored descending (s_0^up, s_1^up, ..., s_n^up) and maxima
    descending (s_1^down, ..., s_n^down), so that
    minima[0] > maxima[0] > minima[1] > ... > maxima[n-1] > minima[n].
    """

    model_config = ConfigDict(frozen=True)

    minima: Tuple[float, ...]
    maxima: Tuple[float, ...] = ()
    center: float

    @model_validator(mode="after")
    def interlacing(self):
        if len(self.minima) != len(self.maxima) + 1:
            raise ValueError("a profile needs exactly one more minimum than maxima")
        corners = []
        for i, m in enumerate(self.maxima):
            corners.extend([self.minima[i], m])
        corners.append(self.minima[-1])
        if any(corners[i] <= corners[i + 1] for i in range(len(corners) - 1)):
            raise ValueError(f"corners do not strictly interlace: {corners}")
        expected = sum(self.minima) - sum(self.maxima)
        scale = max(1.0, max(abs(c) for c in corners))
        if abs(expected - self.center) > 1e-9 * scale * len(corners):
            raise ValueError(f"center {self.center} differs from sum(minima) - sum(maxima) = {expected}")
        return self

    @property
    def n(self) -> int:
        return len(self.maxima)

    def to_json(self) -> Dict[str, Any]:
        return {"center": self.center, "minima": list(self.minima), "maxima": list(self.maxima)}


class QuantizationReport(BaseModel):
    band_multipliers: Optional[List[int]] = None
    gap_multipliers: Optional[List[int]] = None
    band_unit: float
    gap_unit: float
    renormalized: bool
    deviations: List[float] = []

    @field_validator("band_multipliers", "gap_multipliers")
    @classmethod
    def positive(cls, value):
        if value is not None and any(m <= 0 for m in value):
            raise ValueError("multipliers must be positive integers")
        return value

    @property
    def passed(self) -> bool:
        return self.band_multipliers is not None and self.gap_multipliers is not None


# multiphase: classical solutions and fields
class PhaseParams(BaseModel):
    """s ascending: s[0] = s_n^up < s[1] = s_n^down < ... < s[2n] = s_0^up; chi[i-1] is chi_i."""

    model_config = ConfigDict(frozen=True)

    s: Tuple[float, ...]
    chi: Tuple[float, ...] = ()
    eps: float = Field(gt=0)

    @model_validator(mode="after")
    def ordering(self):
        if len(self.s) % 2 != 1:
            raise ValueError("s needs 2n+1 entries")
        if len(self.chi) != len(self.s) // 2:
            raise ValueError(f"expected {len(self.s) // 2} phases, got {len(self.chi)}")
        if any(self.s[i] >= self.s[i + 1] for i in range(len(self.s) - 1)):
            raise ValueError(f"s must be strictly increasing, got {self.s}")
        return self

    @property
    def n(self) -> int:
        return len(self.s) // 2

    def up(self, i: int) -> float:
        return self.s[2 * (self.n - i)]

    def down(self, i: int) -> float:
        return self.s[2 * (self.n - i) + 1]

    def band(self, i: int) -> float:
        return self.up(i - 1) - self.down(i)

    def gap(self, i: int) -> float:
        return self.down(i) - self.up(i)

    @property
    def center(self) -> float:
        return sum(self.s[0::2]) - sum(self.s[1::2])

    def with_phase(self, i: int, value: float) -> "PhaseParams":
        chi = list(self.chi)
        chi[i - 1] = value
        return self.model_copy(update={"chi": tuple(chi)})

    @classmethod
    def from_profile(cls, profile: Profile, eps: float, chi: Optional[List[float]] = None) -> "PhaseParams":
        s: List[float] = []
        for i in range(profile.n, 0, -1):
            s.extend([profile.minima[i], profile.maxima[i - 1]])
        s.append(profile.minima[0])
        return cls(s=tuple(s), chi=tuple(chi or [0.0] * profile.n), eps=eps)

    def to_profile(self) -> Profile:
        n = self.n
        return Profile(
            minima=tuple(self.up(i) for i in range(n + 1)),
            maxima=tuple(self.down(i) for i in range(1, n + 1)),
            center=self.center,
        )


class GridField(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    samples: np.ndarray
    time: float = 0.0

    @field_validator("samples")
    @classmethod
    def at_least_two(cls, value):
        value = np.asarray(value, dtype=float)
        if value.ndim != 1 or value.size < 2:
            raise ValueError("a grid field needs at least two samples")
        return value

    @property
    def x(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.samples.size) / self.samples.size


class FourierField(BaseModel):
    """Zero mode a and modes V_1..V_K of a real field; V_{-k} = conj(V_k)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    a: float
    modes: np.ndarray = Field(default_factory=lambda: np.zeros(0, dtype=complex))

    @field_validator("modes")
    @classmethod
    def complex_vector(cls, value):
        return np.atleast_1d(np.asarray(value, dtype=complex))

    @property
    def K(self) -> int:
        return self.modes.size

    def mode(self, k: int) -> complex:
        if k == 0:
            return complex(self.a)
        if abs(k) > self.K:
            return 0j
        return self.modes[k - 1] if k > 0 else np.conj(self.modes[-k - 1])


# spectral: truncated Lax operators
class LaxTruncation(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dim: int = Field(ge=2)
    eps: float
    matrix: np.ndarray


class SpectralLadder(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    up: np.ndarray
    weights: np.ndarray
    eps: float
    vectors: Optional[np.ndarray] = None
    min_step: Optional[float] = None


# fock: graded blocks of the quantum Lax operator
class FockBasis(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    degree: int = Field(ge=0)
    partitions: List[Tuple[int, ...]]
    norms: List[Any]


class GradeBlock(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grade: int = Field(ge=0)
    basis: List[Tuple[Tuple[int, ...], int]]
    weights: List[Any]
    matrix: Any


class OperatorBlock(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    degree: int = Field(ge=0)
    label: str
    partitions: List[Tuple[int, ...]]
    weights: List[Any]
    matrix: Any


# correspondence: Bohr-Sommerfeld states and the end-to-end report
class BSState(BaseModel):
    model_config = ConfigDict(frozen=True)

    partition: Partition
    profile: Profile
    band_multipliers: List[int]
    gap_multipliers: List[int]
    classical_energy: float


class DegreeComparison(BaseModel):
    degree: int
    quantum: List[float]
    classical: List[float]
    deviation: float
    generating_deviation: float
    passed: bool


class Theorem1Report(BaseModel):
    eps: float
    hbar: float
    a: float
    tol: float
    degrees: List[DegreeComparison]
    max_deviation: float
    negative_control: Optional[Dict[str, Any]] = None
    passed: bool


# cli: one run's configuration
class RunConfig(BaseModel):
    eps: float = Field(default=1.0, ge=0)
    hbar: float = Field(default=2.0, gt=0)
    a: float = 0.0
    dim: int = Field(default=512, ge=2)
    degree: int = Field(default=4, ge=0)
    samples: int = Field(default=256, ge=2)
    tol: float = Field(default=1e-8, gt=0)
    threads: Optional[int] = Field(default=None, ge=1)
    output: Optional[str] = None
    format: str = Field(default="json", pattern="^(json|csv)$")


class EigenState(BaseModel):
    """One labeled joint eigenvector of a degree block."""

    partition: Partition
    energy: float
    moments: List[float]
    resolvent: complex
    vector: List[float]
