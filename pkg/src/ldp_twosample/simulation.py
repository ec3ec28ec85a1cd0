"""Data-generating scenarios and Monte-Carlo size/power estimation.

Replication ``r`` of a run keyed by ``seed`` uses ``StreamKey(seed, r)``. Its
substream 0 draws the raw data and substream 1 drives the test. Results are
therefore identical for any worker count, and configurations that share a
seed see the same raw data (common random numbers).
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .adaptive import adaptive_density_test
from .density import DEFAULT_KAPPA, BinningSpec, Transform
from .exceptions import ParameterError
from .mechanisms import Mechanism, PrivacyConfig
from .procedures import Calibration, TestResult, check_combination, density_test, multinomial_test
from .sampling import StreamKey, derive_stream, sample_categorical, sample_std_gaussian_vector
from .statistics import StatisticKind

CSV_COLUMNS = (
    "scenario", "mechanism", "statistic", "calibration", "k", "d", "kappa", "alpha", "gamma",
    "n1", "n2", "B", "reps", "rejection_rate", "std_error", "seed",
)
# CI-scale defaults; FULL_* match the full-scale study
DESK_REPS = 500
DESK_B = 299
FULL_REPS = 2000
FULL_B = 999


class ScenarioKind(str, enum.Enum):
    UNIFORM_NULL = "uniform_null"
    POWERLAW_NULL = "powerlaw_null"
    PERTURBED_UNIFORM = "perturbed_uniform"
    POWERLAW_ALT = "powerlaw_alt"
    GAUSSIAN_NULL = "gaussian_null"
    GAUSSIAN_LOCATION = "gaussian_location"
    GAUSSIAN_SCALE = "gaussian_scale"

    @property
    def multinomial(self) -> bool:
        return self in _MULTINOMIAL

    @property
    def null(self) -> bool:
        return self in (ScenarioKind.UNIFORM_NULL, ScenarioKind.POWERLAW_NULL, ScenarioKind.GAUSSIAN_NULL)


_MULTINOMIAL = {ScenarioKind.UNIFORM_NULL, ScenarioKind.POWERLAW_NULL,
                ScenarioKind.PERTURBED_UNIFORM, ScenarioKind.POWERLAW_ALT}


@dataclass(frozen=True)
class ScenarioSpec:
    kind: ScenarioKind
    k: int | None = None
    d: int | None = None
    eta: float = 0.0
    exponents: tuple[float, float] = (2.45, 2.3)
    location: float = 0.5
    scale_factor: float = 5.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ScenarioKind(self.kind))
        object.__setattr__(self, "exponents", tuple(self.exponents))
        if self.kind.multinomial:
            if self.k is None or int(self.k) != self.k or self.k < 2:
                raise ParameterError(f"multinomial scenario needs integer k >= 2, got {self.k}")
            if self.kind is ScenarioKind.PERTURBED_UNIFORM:
                if self.k % 2:
                    raise ParameterError("perturbed uniform needs an even k")
                lo, hi = 1.0 / self.k - self.eta, 1.0 / self.k + self.eta
                if not (0.0 < lo and hi < 1.0):
                    raise ParameterError(f"1/k +- eta must lie in (0, 1), got eta={self.eta}")
        elif self.d is None or int(self.d) != self.d or self.d < 1:
            raise ParameterError(f"Gaussian scenario needs integer d >= 1, got {self.d}")

    @property
    def name(self) -> str:
        return self.kind.value

    def to_dict(self) -> dict:
        out = {"kind": self.kind.value}
        if self.kind.multinomial:
            out["k"] = self.k
        else:
            out["d"] = self.d
        if self.kind is ScenarioKind.PERTURBED_UNIFORM:
            out["eta"] = self.eta
        if self.kind is ScenarioKind.POWERLAW_ALT:
            out["exponents"] = list(self.exponents)
        if self.kind is ScenarioKind.GAUSSIAN_LOCATION:
            out["location"] = self.location
        if self.kind is ScenarioKind.GAUSSIAN_SCALE:
            out["scale_factor"] = self.scale_factor
        return out

    @classmethod
    def from_dict(cls, data: dict) -> ScenarioSpec:
        data = dict(data)
        kind = data.pop("kind")
        return cls(ScenarioKind(kind), **data)


def _normalized(w: np.ndarray) -> np.ndarray:
    p = w / w.sum()
    # pin the total to 1 so categorical sampling accepts it
    p[-1] = 1.0 - p[:-1].sum()
    return p


def scenario_prob_vectors(spec: ScenarioSpec) -> tuple[np.ndarray, np.ndarray]:
    if not spec.kind.multinomial:
        raise ParameterError(f"{spec.kind.value} is not a multinomial scenario")
    k = spec.k
    m = np.arange(1, k + 1, dtype=np.float64)  # 1-based labels fix the sign pattern
    if spec.kind is ScenarioKind.UNIFORM_NULL:
        p = np.full(k, 1.0 / k)
        return p, p.copy()
    if spec.kind is ScenarioKind.POWERLAW_NULL:
        p = _normalized(1.0 / m)
        return p, p.copy()
    if spec.kind is ScenarioKind.PERTURBED_UNIFORM:
        sign = (-1.0) ** m
        return 1.0 / k + sign * spec.eta, 1.0 / k - sign * spec.eta
    a, b = spec.exponents
    return _normalized(m**a), _normalized(m**b)


def _correlated_gaussian(n: int, d: int, stream) -> np.ndarray:
    # covariance 0.5 J + 0.5 I via a shared factor
    g0 = sample_std_gaussian_vector(1, stream, size=n)
    g = sample_std_gaussian_vector(d, stream, size=n)
    return math.sqrt(0.5) * g0 + math.sqrt(0.5) * g


def sample_scenario(spec: ScenarioSpec, n1: int, n2: int, key: StreamKey):
    """Raw two-sample data: category arrays or ``(n, d)`` point matrices."""
    sy, sz = derive_stream(key.child(0)), derive_stream(key.child(1))
    if spec.kind.multinomial:
        p_y, p_z = scenario_prob_vectors(spec)
        return sample_categorical(p_y, sy, size=n1), sample_categorical(p_z, sz, size=n2)
    d = spec.d
    if spec.kind is ScenarioKind.GAUSSIAN_NULL:
        return sample_std_gaussian_vector(d, sy, size=n1), sample_std_gaussian_vector(d, sz, size=n2)
    y, z = _correlated_gaussian(n1, d, sy), _correlated_gaussian(n2, d, sz)
    if spec.kind is ScenarioKind.GAUSSIAN_LOCATION:
        return y + spec.location, z - spec.location
    return y, math.sqrt(spec.scale_factor) * z


class Mode(str, enum.Enum):
    MULTINOMIAL = "multinomial"
    DENSITY = "density"
    ADAPTIVE = "adaptive"


@dataclass(frozen=True)
class TestConfig:
    """Everything a single test needs besides the data."""

    __test__ = False

    mechanism: Mechanism
    statistic: StatisticKind = StatisticKind.L2U
    calibration: Calibration = Calibration.PERMUTATION
    alpha: float = 1.0
    gamma: float = 0.05
    B: int = DESK_B
    mode: Mode = Mode.MULTINOMIAL
    kappa: int = DEFAULT_KAPPA
    transform: Transform = Transform.GAUSS_CDF

    def __post_init__(self):
        mech, stat, cal = check_combination(self.mechanism, self.statistic, self.calibration)
        object.__setattr__(self, "mechanism", mech)
        object.__setattr__(self, "statistic", stat)
        object.__setattr__(self, "calibration", cal)
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "transform", Transform(self.transform))
        if self.mode is Mode.ADAPTIVE and cal is not Calibration.PERMUTATION:
            raise ParameterError("the adaptive test is permutation-calibrated only")
        if not 0.0 < self.gamma <= 1.0:
            raise ParameterError(f"gamma must lie in (0, 1], got {self.gamma}")
        if not self.alpha > 0:
            raise ParameterError(f"alpha must be positive, got {self.alpha}")

    def to_dict(self) -> dict:
        return {f.name: (v.value if isinstance(v, enum.Enum) else v)
                for f in dataclasses.fields(self) for v in [getattr(self, f.name)]}


def _mode_for(spec: ScenarioSpec, config: TestConfig) -> Mode:
    if spec.kind.multinomial:
        if config.mode is not Mode.MULTINOMIAL:
            raise ParameterError(f"{spec.name} is multinomial; mode must be multinomial")
        return Mode.MULTINOMIAL
    if config.mode is Mode.MULTINOMIAL:
        raise ParameterError(f"{spec.name} is continuous; use density or adaptive mode")
    return config.mode


def run_replication(spec: ScenarioSpec, config: TestConfig, n1: int, n2: int,
                    key: StreamKey) -> TestResult:
    mode = _mode_for(spec, config)
    y, z = sample_scenario(spec, n1, n2, key.child(0))
    test_key = key.child(1)
    if mode is Mode.MULTINOMIAL:
        cfg = PrivacyConfig(config.mechanism, config.alpha, spec.k)
        return multinomial_test(y, z, spec.k, cfg, config.statistic, config.calibration,
                                config.gamma, config.B, test_key)
    if mode is Mode.DENSITY:
        bspec = BinningSpec(spec.d, config.kappa, config.transform)
        cfg = PrivacyConfig(config.mechanism, config.alpha, max(bspec.k, 2))
        return density_test(y, z, bspec, cfg, config.statistic, config.gamma, config.B, test_key,
                            calibration=config.calibration)
    return adaptive_density_test(y, z, config.alpha, config.gamma, config.B, config.mechanism,
                                 test_key, stat=config.statistic, transform=config.transform)


@dataclass
class PowerEstimate:
    rejection_rate: float
    replications: int
    std_error: float
    scenario: ScenarioSpec
    config: TestConfig
    n1: int
    n2: int
    seed: int
    p_values: np.ndarray = field(repr=False, default=None)
    statistics: np.ndarray = field(repr=False, default=None)

    def row(self) -> dict:
        spec, cfg = self.scenario, self.config
        k = spec.k if spec.kind.multinomial else (cfg.kappa**spec.d if cfg.mode is Mode.DENSITY else None)
        return {
            "scenario": spec.name,
            "mechanism": cfg.mechanism.value,
            "statistic": cfg.statistic.value,
            "calibration": cfg.calibration.value,
            "k": k,
            "d": None if spec.kind.multinomial else spec.d,
            "kappa": cfg.kappa if cfg.mode is Mode.DENSITY else None,
            "alpha": cfg.alpha,
            "gamma": cfg.gamma,
            "n1": self.n1,
            "n2": self.n2,
            "B": cfg.B if cfg.calibration is Calibration.PERMUTATION else 0,
            "reps": self.replications,
            "rejection_rate": self.rejection_rate,
            "std_error": self.std_error,
            "seed": self.seed,
        }


def binomial_se(rate: float, reps: int) -> float:
    return math.sqrt(rate * (1.0 - rate) / reps)


def run_replications(spec: ScenarioSpec, config: TestConfig, n1: int, n2: int, reps: int,
                     seed: int, workers: int = 1) -> list[TestResult]:
    if int(reps) != reps or reps < 1:
        raise ParameterError(f"reps must be a positive integer, got {reps}")

    def one(r: int) -> TestResult:
        return run_replication(spec, config, n1, n2, StreamKey(seed, r))

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(one, range(reps)))
    return [one(r) for r in range(reps)]


def estimate_power(spec: ScenarioSpec, config: TestConfig, n1: int, n2: int, reps: int,
                   seed: int = 0, workers: int = 1) -> PowerEstimate:
    """Rejection rate over ``reps`` independent datasets, with its binomial SE."""
    results = run_replications(spec, config, n1, n2, reps, seed, workers)
    rate = sum(r.reject for r in results) / reps
    return PowerEstimate(rate, reps, binomial_se(rate, reps), spec, config, n1, n2, seed,
                         np.array([r.p_value for r in results]),
                         np.array([r.statistic for r in results]))


def empirical_size(p_values, gamma: float, calibration) -> float:
    p = np.asarray(p_values)
    if Calibration.parse(calibration) is Calibration.PERMUTATION:
        rejected = p <= gamma
    else:
        # strict exceedance of the quantile is a strict tail-probability comparison
        rejected = (p < gamma) | (gamma >= 1.0)
    return float(np.mean(rejected))


def estimate_size_curve(spec: ScenarioSpec, config: TestConfig, gamma_grid, n1: int, n2: int,
                        reps: int, seed: int = 0, workers: int = 1) -> list[tuple[float, float, float]]:
    """``(nominal gamma, empirical size, SE)`` for each grid point, from one run."""
    if not spec.kind.null:
        raise ParameterError("size curves need a null scenario")
    est = estimate_power(spec, config, n1, n2, reps, seed, workers)
    out = []
    for g in gamma_grid:
        size = empirical_size(est.p_values, g, config.calibration)
        out.append((float(g), size, binomial_se(size, reps)))
    return out


# ---------------------------------------------------------------------------
# sweeps and CSV output

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".6g")


class ResultWriter:
    """CSV result table; one provenance comment line, header, then rows."""

    def __init__(self, stream, provenance: dict | None = None):
        self.stream = stream
        if provenance is not None:
            stream.write("# " + json.dumps(provenance, sort_keys=True) + "\n")
        self._writer = csv.writer(stream, lineterminator="\n")
        self._writer.writerow(CSV_COLUMNS)

    def write(self, row: dict):
        self._writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
        self.stream.flush()


def table_to_string(rows, provenance: dict | None = None) -> str:
    buf = io.StringIO()
    w = ResultWriter(buf, provenance)
    for r in rows:
        w.write(r)
    return buf.getvalue()


def _as_list(value):
    return list(value) if isinstance(value, (list, tuple)) else [value]


@dataclass
class SweepConfig:
    """Cross product of scenarios, mechanisms, statistics, budgets and sizes.

    ``n`` entries are equal group sizes or ``[n1, n2]`` pairs.
    """

    scenarios: list[ScenarioSpec]
    mechanisms: list[str]
    statistics: list[str] = field(default_factory=lambda: ["l2"])
    calibrations: list[str] = field(default_factory=lambda: ["perm"])
    alphas: list[float] = field(default_factory=lambda: [1.0])
    n: list = field(default_factory=lambda: [200])
    reps: int = DESK_REPS
    B: int = DESK_B
    gamma: float = 0.05
    mode: str | None = None
    kappa: int = DEFAULT_KAPPA
    transform: str = Transform.GAUSS_CDF.value

    @classmethod
    def from_dict(cls, data: dict) -> SweepConfig:
        data = dict(data)
        known = {f.name for f in dataclasses.fields(cls)} | {"scenario", "mechanism", "statistic",
                                                              "calibration", "alpha"}
        unknown = set(data) - known
        if unknown:
            raise ParameterError(f"unknown sweep config keys: {sorted(unknown)}")
        for single, plural in (("scenario", "scenarios"), ("mechanism", "mechanisms"),
                               ("statistic", "statistics"), ("calibration", "calibrations"),
                               ("alpha", "alphas")):
            if single in data:
                data[plural] = data.pop(single)
        scen = [s if isinstance(s, ScenarioSpec) else ScenarioSpec.from_dict(s)
                for s in _as_list(data.pop("scenarios"))]
        out = cls(scenarios=scen, **{k: v for k, v in data.items()})
        for name in ("mechanisms", "statistics", "calibrations", "alphas", "n"):
            setattr(out, name, _as_list(getattr(out, name)))
        return out

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["scenarios"] = [s.to_dict() for s in self.scenarios]
        return d

    def combinations(self):
        for spec, mech, stat, cal, alpha, n in itertools.product(
                self.scenarios, self.mechanisms, self.statistics, self.calibrations, self.alphas, self.n):
            n1, n2 = (n, n) if np.ndim(n) == 0 else tuple(n)
            mode = self.mode or (Mode.MULTINOMIAL if spec.kind.multinomial else Mode.DENSITY)
            cfg = TestConfig(mech, stat, cal, float(alpha), self.gamma, self.B, mode, self.kappa,
                             self.transform)
            yield spec, cfg, int(n1), int(n2)


def run_sweep(config: SweepConfig | dict, seed: int = 0, out=None, workers: int = 1,
              provenance: bool = True) -> list[dict]:
    """One ``PowerEstimate`` row per combination, in config order.

    Rows are written to ``out`` (a text stream) as they complete.
    """
    if isinstance(config, dict):
        config = SweepConfig.from_dict(config)
    combos = list(config.combinations())  # validate everything before computing
    writer = None
    if out is not None:
        meta = {"command": "sweep", "seed": seed, "config": config.to_dict()} if provenance else None
        writer = ResultWriter(out, meta)
    rows = []
    for spec, cfg, n1, n2 in combos:
        row = estimate_power(spec, cfg, n1, n2, config.reps, seed, workers).row()
        rows.append(row)
        if writer is not None:
            writer.write(row)
    return rows
