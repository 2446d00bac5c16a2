# Defines run-config schemas (Pydantic) and the crossing/verdict report schemas written by the CLI

import json
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from quantum.channels import ChannelFamily, ChannelParams
from quantum.measures import Thresholds
from quantum.states import PureStateSpec, WernerSpec, make_pure, make_werner

MEASURE_COLUMNS = ('fidelity', 'n_value', 'bell', 's2', 's3', 'concurrence', 'tau_qsl')

MeasureName = Literal['fidelity', 'n_value', 'bell', 's2', 's3', 'concurrence', 'tau_qsl']
BellIndex = Literal['phi_plus', 'phi_minus', 'psi_plus', 'psi_minus']


# ─────────────────────────────
# RUN CONFIG
# ─────────────────────────────

class ChannelParamsConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    gamma: Optional[float] = Field(None, gt=0, description="Coupling strength gamma (inverse time)")
    Gamma: Optional[float] = Field(None, gt=0, description="Reservoir line width Gamma (inverse time)")
    a: Optional[float] = Field(None, gt=0, description="RTN switching rate (inverse time)")
    gamma_vec: Optional[Tuple[float, float, float]] = Field(None, description="Depolarizing couplings gamma_i")
    Gamma_vec: Optional[Tuple[float, float, float]] = Field(None, description="Depolarizing line widths Gamma_i")


class FamilyConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    kind: Literal['amplitude_damping', 'phase_damping', 'depolarizing', 'rtn']
    regime: Literal['markovian', 'non_markovian']
    params: ChannelParamsConfig


class PureStateConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    kind: Literal['pure'] = 'pure'
    alpha: complex = Field(..., description="Amplitude of |00>; a number or [re, im]")
    beta: complex = Field(..., description="Amplitude of |11>; a number or [re, im]")

    @field_validator('alpha', 'beta', mode='before')
    @classmethod
    def pair_to_complex(cls, value):
        if isinstance(value, (list, tuple)):
            if len(value) != 2:
                raise ValueError('complex amplitude must be [re, im]')
            return complex(float(value[0]), float(value[1]))
        return value

    def to_spec(self) -> PureStateSpec:
        return PureStateSpec(alpha=self.alpha, beta=self.beta)


class WernerStateConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    kind: Literal['werner'] = 'werner'
    p: float = Field(..., ge=0, le=1, description="Weight of the Bell state")
    bell_index: BellIndex = 'phi_plus'

    def to_spec(self) -> WernerSpec:
        return WernerSpec(p=self.p, bell_index=self.bell_index)


InitialState = Annotated[Union[PureStateConfig, WernerStateConfig], Field(discriminator='kind')]


class ThresholdOverrides(BaseModel):
    model_config = ConfigDict(extra='forbid')

    f_classical: Optional[float] = Field(None, gt=0, lt=1)
    f_lhv: Optional[float] = Field(None, gt=0, lt=1)
    bell_classical: Optional[float] = Field(None, gt=0)
    steering_zero: Optional[float] = Field(None, ge=0)
    concurrence_zero: Optional[float] = Field(None, ge=0)
    margin: Optional[float] = Field(None, ge=0)

    def to_thresholds(self) -> Thresholds:
        return Thresholds(**self.model_dump(exclude_none=True))


class SweepConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    initial_state: InitialState
    family: Optional[FamilyConfig] = None
    t_max: float = Field(..., gt=0, description="End of the sweep axis (units of 1/rate, or p for static sweeps)")
    n_points: int = Field(2000, ge=2, description="Grid points including both ends")
    measures: List[MeasureName] = Field(default_factory=lambda: list(MEASURE_COLUMNS))
    noise_sides: Literal['one', 'both'] = 'one'


class RunConfig(SweepConfig):
    comment: str = Field(..., min_length=1, description="Figure or table row this config reproduces")
    name: Optional[str] = None
    mode: Literal['trajectory', 'static_werner'] = 'trajectory'
    time_axis: Literal['gamma', 'Gamma', 'Gamma_1'] = 'gamma'
    thresholds: ThresholdOverrides = Field(default_factory=ThresholdOverrides)
    steering_eigen_mode: Literal['singular_values', 'eigenvalues'] = 'singular_values'
    qsl_generator: Literal['literal', 'symmetrized'] = 'literal'
    qsl_denominator: Literal['instantaneous', 'time_averaged'] = 'instantaneous'
    dp_prefactor: Literal['per_axis', 'global'] = 'per_axis'
    literal_pd_kraus: bool = Field(False, description="Debug: dephasing E0 = diag(1, sqrt(p)), breaks completeness")
    output_dir: Optional[str] = None

    @model_validator(mode='after')
    def check_mode(self):
        if self.mode == 'static_werner':
            if self.family is not None:
                raise ValueError('static_werner sweeps take no channel family')
            if self.initial_state.kind != 'werner':
                raise ValueError('static_werner sweeps need a werner initial_state (its bell_index is used)')
            if self.t_max > 1:
                raise ValueError(f'static_werner sweeps run over p in [0, 1]; t_max={self.t_max}')
            if 'tau_qsl' in self.measures:
                self.measures = [m for m in self.measures if m != 'tau_qsl']
            return self

        if self.family is None:
            raise ValueError('trajectory sweeps need a channel family')
        self.channel_family()
        self.time_scale()
        return self

    @classmethod
    def from_file(cls, path) -> 'RunConfig':
        path = Path(path)
        data = json.loads(path.read_text(encoding='utf-8'))
        data.setdefault('name', path.stem)
        return cls.model_validate(data)

    def channel_family(self) -> ChannelFamily:
        prm = self.family.params
        return ChannelFamily(
            kind=self.family.kind,
            regime=self.family.regime,
            params=ChannelParams(
                gamma=prm.gamma, Gamma=prm.Gamma, a=prm.a,
                gamma_vec=prm.gamma_vec, Gamma_vec=prm.Gamma_vec,
            ),
            dp_prefactor=self.dp_prefactor,
            literal_pd_kraus=self.literal_pd_kraus,
        )

    def time_scale(self) -> float:
        """Rate r such that the sweep axis is r*t."""
        if self.mode == 'static_werner':
            return 1.0
        prm = self.family.params
        if self.time_axis == 'gamma':
            scale = prm.gamma
        elif self.time_axis == 'Gamma':
            scale = prm.Gamma
        else:
            scale = prm.Gamma_vec[0] if prm.Gamma_vec else None
        if scale is None:
            raise ValueError(f"time_axis '{self.time_axis}' needs the matching channel parameter")
        return float(scale)

    def initial_rho(self) -> np.ndarray:
        if self.initial_state.kind == 'pure':
            return make_pure(self.initial_state.to_spec())
        return make_werner(self.initial_state.to_spec())

    def threshold_values(self) -> Thresholds:
        return self.thresholds.to_thresholds()


# ─────────────────────────────
# REPORTS
# ─────────────────────────────

class CrossingEvent(BaseModel):
    time: float
    direction: Literal['death', 'revival']
    kind: Literal['threshold', 'minimum'] = 'threshold'


class MeasureCrossings(BaseModel):
    measure: str
    column: str
    threshold: float
    initially_alive: bool
    events: List[CrossingEvent]

    def threshold_events(self) -> List[CrossingEvent]:
        return [e for e in self.events if e.kind == 'threshold']

    def revivals(self) -> List[CrossingEvent]:
        return [e for e in self.events if e.direction == 'revival']

    def first_death(self) -> Optional[float]:
        """None when the measure never dies; 0 when it is dead from the start."""
        if not self.initially_alive:
            return 0.0
        deaths = [e.time for e in self.events if e.direction == 'death']
        return deaths[0] if deaths else None

    def alive_at(self, time: float) -> bool:
        alive = self.initially_alive
        for e in self.threshold_events():
            if e.time <= time:
                alive = e.direction == 'revival'
        return alive


class CrossingReport(BaseModel):
    name: Optional[str] = None
    axis: Literal['t', 'p'] = 't'
    measures: List[MeasureCrossings]  # strongest first

    def get(self, measure: str) -> MeasureCrossings:
        for m in self.measures:
            if m.measure == measure:
                return m
        raise KeyError(measure)

    def has_revivals(self) -> bool:
        return any(m.revivals() for m in self.measures)


class Violation(BaseModel):
    chain: Literal['decay', 'revival']
    stronger: str
    weaker: str
    stronger_time: Optional[float] = None
    weaker_time: Optional[float] = None


class HierarchyVerdict(BaseModel):
    decay_order_ok: bool
    revival_order_ok: Optional[bool] = None
    label: Literal['decay', 'both']
    violations: List[Violation] = Field(default_factory=list)
