"""
Pydantic models for experiment configuration and report files.

Complex numbers cross every file boundary as [re, im] pairs; the point at
infinity of the Riemann sphere is the string "inf".
"""
import cmath
import math
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator

SCHEMA_VERSION = 1

INFINITY = complex(math.inf, 0.0)

ComplexPair = List[float]
PointSpec = Union[ComplexPair, Literal["inf"]]


def is_infinite(p: complex) -> bool:
    """True for the point at infinity marker"""
    return cmath.isinf(p)


def encode_complex(z: complex) -> List[float]:
    """Encode a complex number as [re, im]"""
    z = complex(z)
    return [z.real, z.imag]


def decode_complex(pair) -> complex:
    """Decode [re, im] (or a bare real number) into a complex number"""
    if isinstance(pair, (int, float)):
        return complex(pair)
    if len(pair) != 2:
        raise ValueError(f"Expected [re, im], got {pair!r}")
    return complex(float(pair[0]), float(pair[1]))


def encode_point(p: complex):
    """Encode a point of CP^1: "inf" or [re, im]"""
    return "inf" if is_infinite(p) else encode_complex(p)


def decode_point(spec) -> complex:
    """Decode a point of CP^1 from "inf" or [re, im]"""
    if isinstance(spec, str):
        if spec.strip().lower() == "inf":
            return INFINITY
        raise ValueError(f"Unknown point marker {spec!r}")
    return decode_complex(spec)


class NumericalSettings(BaseModel):
    """Tolerances and step sizes shared by the whole pipeline"""
    ode_rtol: float = Field(1e-10, gt=0, description="Relative tolerance of the adaptive integrator")
    ode_atol: float = Field(1e-12, gt=0, description="Absolute tolerance of the adaptive integrator")
    fd_step: float = Field(1e-5, gt=0, description="Finite-difference step of the character-map Jacobian")
    rank_threshold: float = Field(1e-6, gt=0, description="Singular values below threshold*sigma_max count as zero")
    parabolic_tol: float = Field(1e-8, gt=0, description="Tolerance on |tr^2 - 4| for peripheral monodromy")
    irreducibility_tol: float = Field(1e-6, gt=0, description="Tolerance on |tr[A,B] - 2| for non-elementarity")
    relation_tol: float = Field(1e-8, gt=0, description="Tolerance of the ordered peripheral product against +-Id")
    min_clearance: float = Field(1e-6, gt=0, description="Smallest allowed distance between a path and a pole")
    schwarzian_fd_ratio: float = Field(1e-4, gt=0, description="Schwarzian stencil step as a fraction of local clearance")
    loop_radius_fraction: float = Field(0.4, gt=0, lt=0.5, description="Lasso radius as a fraction of the nearest-obstacle distance")

    def fingerprint_payload(self) -> dict:
        """Settings as a plain dict with a stable key order"""
        return {key: getattr(self, key) for key in sorted(type(self).model_fields)}


class StarGrid(BaseModel):
    """Center plus +- perturbations of every coordinate"""
    center: List[ComplexPair]
    moduli_radius: float = Field(0.1, ge=0)
    accessory_radius: float = Field(0.5, ge=0)

    def expand(self) -> List[List[complex]]:
        """Center first, then +-moduli directions, then +-accessory directions"""
        center = [decode_complex(c) for c in self.center]
        half = len(center) // 2
        points = [list(center)]
        for k in range(len(center)):
            radius = self.moduli_radius if k < half else self.accessory_radius
            for sign in (1.0, -1.0):
                point = list(center)
                point[k] = point[k] + sign * radius
                points.append(point)
        return points


class GridSpec(BaseModel):
    """Grid of chart points for a scan"""
    points: List[List[ComplexPair]] = Field(default_factory=list)
    star: Optional[StarGrid] = None

    def expand(self) -> List[List[complex]]:
        """Explicit points first, then the star points, in order"""
        expanded = [[decode_complex(c) for c in point] for point in self.points]
        if self.star is not None:
            expanded.extend(self.star.expand())
        return expanded


class FoliationOptions(BaseModel):
    """Sampling for the local-model checks"""
    leaves: int = Field(100, ge=1, description="Random horizontal leaves pushed through the gluing map")
    windings: List[int] = Field(default_factory=lambda: [-2, -1, 0, 1, 2])
    tolerance: float = Field(1e-9, gt=0)
    start: ComplexPair = Field(default_factory=lambda: [0.5, 0.0], description="Leaf start u0")
    section_probe: bool = Field(True, description="Also push the developed map near each finite puncture into the model")
    section_depths: int = Field(8, ge=2)


class ProbeOptions(BaseModel):
    """Injectivity probe around the chart point"""
    radius: float = Field(1e-2, gt=0)
    samples: int = Field(50, ge=0)


class ExperimentConfig(BaseModel):
    """Experiment configuration loaded from a JSON file"""
    schema_version: Literal[1] = SCHEMA_VERSION
    n: Optional[int] = Field(None, ge=3, description="Number of punctures (needed when only theta is given)")
    punctures: Optional[List[PointSpec]] = Field(None, description="Raw punctures, [re, im] pairs or \"inf\"")
    theta: Optional[List[ComplexPair]] = Field(None, description="Chart point: moduli followed by accessory parameters")
    accessory: Optional[List[ComplexPair]] = Field(None, description="Accessory parameters when punctures are given")
    basepoint: Optional[ComplexPair] = None
    settings: NumericalSettings = Field(default_factory=NumericalSettings)
    seed: int = Field(0, ge=0)
    output_format: Optional[Literal["json", "csv"]] = Field(None, description="Report format; scans default to csv, everything else to json")
    grid: GridSpec = Field(default_factory=GridSpec)
    foliation: FoliationOptions = Field(default_factory=FoliationOptions)
    probe: ProbeOptions = Field(default_factory=ProbeOptions)

    @model_validator(mode="after")
    def check_surface(self):
        """Either punctures, or n (theta defaults to the origin of the chart)"""
        if self.punctures is None and self.n is None:
            if self.theta is None:
                raise ValueError("Config needs 'punctures', 'n' or 'theta'")
            if len(self.theta) % 2:
                raise ValueError("theta must have even length 2n-6")
            self.n = len(self.theta) // 2 + 3
        if self.punctures is not None:
            if self.n is not None and self.n != len(self.punctures):
                raise ValueError(f"n={self.n} disagrees with {len(self.punctures)} punctures")
            self.n = len(self.punctures)
        return self

    @field_validator("punctures")
    @classmethod
    def check_points(cls, v):
        """Reject malformed point entries early"""
        if v is None:
            return v
        for spec in v:
            decode_point(spec)
        return v


class ReportMetadata(BaseModel):
    """Non-deterministic data kept apart from the results"""
    generated_at: str
    command: str


class RelationModel(BaseModel):
    kind: Literal["Id", "MinusId", "Fail"]
    defect: float


class TraceReport(BaseModel):
    """Peripheral traces, relation and non-elementarity at one chart point"""
    schema_version: Literal[1] = SCHEMA_VERSION
    command: Literal["traces"] = "traces"
    settings: NumericalSettings
    n: int
    punctures: List[PointSpec]
    theta: List[ComplexPair]
    loop_order: List[int] = Field(default_factory=list, description="Puncture index of each loop, in traversal order")
    raw_traces: List[ComplexPair]
    peripheral_traces: List[ComplexPair]
    parabolic_defects: List[float]
    relation: RelationModel
    nonelementary: bool
    commutator_defect: float
    character: List[ComplexPair]
    passed: bool
    failures: List[str] = Field(default_factory=list)
    metadata: Optional[ReportMetadata] = None

    def csv_rows(self) -> List[List]:
        """One row per loop, in loop order"""
        header = ["puncture", "trace_re", "trace_im", "raw_trace_re", "raw_trace_im", "parabolic_defect"]
        rows = [header]
        order = self.loop_order or list(range(len(self.peripheral_traces)))
        for index, trace, raw, defect in zip(order, self.peripheral_traces, self.raw_traces, self.parabolic_defects):
            rows.append([index, trace[0], trace[1], raw[0], raw[1], defect])
        return rows


class JacobianReportModel(BaseModel):
    """Rank, holomorphy, fibre and injectivity results at one chart point"""
    schema_version: Literal[1] = SCHEMA_VERSION
    command: Literal["jacobian"] = "jacobian"
    settings: NumericalSettings
    n: int
    theta: List[ComplexPair]
    zero_dimensional: bool = False
    singular_values: List[float] = Field(default_factory=list)
    rank: int = 0
    expected_rank: int
    condition_ratio: Optional[float] = None
    fd_step: float
    cauchy_riemann_defect: Optional[float] = None
    fiber_rank: Optional[int] = None
    moduli_rank: Optional[int] = None
    injectivity_pairs: int = 0
    injectivity_violations: int = 0
    injectivity_resampled: int = 0
    injectivity_exhausted: int = 0
    seed: int
    passed: bool
    metadata: Optional[ReportMetadata] = None

    def csv_rows(self) -> List[List]:
        """One row for theta, laid out like a scan row"""
        header = []
        row = []
        for k, (re, im) in enumerate(self.theta):
            header += [f"theta{k}_re", f"theta{k}_im"]
            row += [re, im]
        header += [f"sigma{k}" for k in range(len(self.singular_values))]
        row += list(self.singular_values)
        header += ["rank", "expected_rank", "condition_ratio", "cauchy_riemann_defect",
                   "fiber_rank", "injectivity_violations", "injectivity_exhausted"]
        row += [self.rank, self.expected_rank, self.condition_ratio, self.cauchy_riemann_defect,
                self.fiber_rank, self.injectivity_violations, self.injectivity_exhausted]
        return [header, row]


class ScanRow(BaseModel):
    """One grid point of a scan"""
    index: int
    theta: List[ComplexPair]
    singular_values: List[float] = Field(default_factory=list)
    rank: Optional[int] = None
    cauchy_riemann_defect: Optional[float] = None
    fiber_rank: Optional[int] = None
    flagged: bool = False
    error: Optional[str] = None


class ScanReport(BaseModel):
    """All rows of a scan, in grid order"""
    schema_version: Literal[1] = SCHEMA_VERSION
    command: Literal["scan"] = "scan"
    settings: NumericalSettings
    n: int
    rows: List[ScanRow] = Field(default_factory=list)
    metadata: Optional[ReportMetadata] = None

    def csv_rows(self) -> List[List]:
        """Header plus one row per theta; columns sized by the largest theta"""
        dim = 2 * self.n - 6
        header = ["index"]
        for k in range(dim):
            header += [f"theta{k}_re", f"theta{k}_im"]
        header += [f"sigma{k}" for k in range(dim)]
        header += ["rank", "cauchy_riemann_defect", "fiber_rank", "flagged", "error"]
        rows = [header]
        for row in self.rows:
            line = [row.index]
            for k in range(dim):
                pair = row.theta[k] if k < len(row.theta) else ["", ""]
                line += list(pair)
            line += [row.singular_values[k] if k < len(row.singular_values) else "" for k in range(dim)]
            line += [row.rank, row.cauchy_riemann_defect, row.fiber_rank, row.flagged, row.error or ""]
            rows.append(line)
        return rows


class WindingSweepEntry(BaseModel):
    windings: int
    v_before: ComplexPair
    v_after: ComplexPair
    closed_form_shift: ComplexPair
    numeric_residual: float


class SectionProbeModel(BaseModel):
    """Developed map near one finite puncture, read in the local model"""
    puncture_index: int
    distances: List[float]
    u_moduli: List[float]
    ratio_drift: float
    monotone: bool
    max_v: float


class FoliationReport(BaseModel):
    """Local-model checks: leaf monodromy, gluing conjugacy, diagonal section"""
    schema_version: Literal[1] = SCHEMA_VERSION
    command: Literal["foliation"] = "foliation"
    tolerance: float
    seed: int
    winding_sweep: List[WindingSweepEntry]
    conjugacy_max_residual: float
    conjugacy_samples: int
    diagonal_max_v: float
    glue_min_separation: float
    section_probes: List[SectionProbeModel] = Field(default_factory=list)
    passed: bool
    metadata: Optional[ReportMetadata] = None

    def csv_rows(self) -> List[List]:
        """One row per winding number of the sweep"""
        rows = [["windings", "v_before_re", "v_before_im", "v_after_re", "v_after_im", "numeric_residual"]]
        for entry in self.winding_sweep:
            rows.append([entry.windings, *entry.v_before, *entry.v_after, entry.numeric_residual])
        return rows
