from dataclasses import dataclass
import logging
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from . import kernel
from ..errors import SimulationError
from ..network import Hill, MassAction, ParameterVector, ReactionNetwork, RepressiveHill, State
from ..observables import compile_observables, Observable, ObservableTables

logger = logging.getLogger(__name__)

# Type Definitions ---------------------------------------------------------------------------------

@dataclass(frozen=True)
class RngStream:
    """
    A reproducible random stream. `(seed, stream_index)` fully determines the sequence.
    """
    seed: int
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        entropy = [int(self.seed) & 0xFFFF_FFFF_FFFF_FFFF, int(self.stream_index)]
        return np.random.default_rng(np.random.SeedSequence(entropy))


class Event(NamedTuple):
    time: float
    reaction: int
    state: State


@dataclass(frozen=True)
class SensitivityAccumulators:
    """
    Accumulator values at one time. Per-observable arrays are indexed `[observable, parameter]`.
    """
    Z: np.ndarray
    int_Z: np.ndarray
    R: np.ndarray
    int_a: np.ndarray
    int_f: np.ndarray
    int_fZ: np.ndarray
    int_fcZ: np.ndarray
    centering: Optional[np.ndarray] = None


class CompiledNetwork(NamedTuple):
    kinds: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    exponents: np.ndarray
    species: np.ndarray
    reactants: np.ndarray
    net: np.ndarray


def compile_network(net: ReactionNetwork) -> CompiledNetwork:
    m = net.num_reactions
    kinds = np.zeros(m, dtype=np.int64)
    p1 = np.zeros(m, dtype=np.int64)
    p2 = np.zeros(m, dtype=np.int64)
    exponents = np.ones(m)
    species = np.zeros(m, dtype=np.int64)
    for j, reaction in enumerate(net.reactions):
        law = reaction.rate_law
        p1[j] = law.param_index
        if isinstance(law, MassAction):
            kinds[j] = kernel.KIND_MASS_ACTION
            continue
        exponents[j] = law.exponent
        species[j] = law.species_index
        if isinstance(law, Hill):
            kinds[j] = kernel.KIND_HILL
        else:
            assert isinstance(law, RepressiveHill)
            kinds[j] = kernel.KIND_REPRESSIVE_HILL
            p2[j] = law.threshold_index
    return CompiledNetwork(
        kinds=kinds,
        p1=p1,
        p2=p2,
        exponents=exponents,
        species=species,
        reactants=net.reactant_matrix,
        net=net.stoichiometry)


@dataclass(frozen=True)
class TrajectoryRecord:
    times: np.ndarray
    states: np.ndarray
    acc: np.ndarray
    counts: np.ndarray
    layout: kernel.Layout
    terminal_time: float
    absorbed: bool
    parameters: np.ndarray
    c: np.ndarray
    mass_action_reactions: tuple
    centering: Optional[np.ndarray] = None
    events: Optional[List[Event]] = None

    def __len__(self):
        return len(self.times)

    def accumulators(self, index: int = -1) -> SensitivityAccumulators:
        """
        The accumulator snapshot at checkpoint `index`.
        """
        row = self.acc[index]
        shape = (self.layout.num_observables, self.layout.num_params)
        return SensitivityAccumulators(
            Z=row[self.layout.z].copy(),
            int_Z=row[self.layout.int_z].copy(),
            R=self.counts[index].copy(),
            int_a=row[self.layout.int_a].copy(),
            int_f=row[self.layout.int_f].copy(),
            int_fZ=row[self.layout.int_fz].reshape(shape),
            int_fcZ=row[self.layout.int_fcz].reshape(shape),
            centering=self.centering)

    @property
    def checkpoints(self) -> List[tuple]:
        return [(t, self.states[i], self.accumulators(i)) for i, t in enumerate(self.times)]

    def weights(self) -> np.ndarray:
        """
        Z_k at each checkpoint, shape (checkpoints, parameters).
        """
        return self.acc[:, self.layout.z]

    def compensated(self) -> np.ndarray:
        """
        Y_j = R_j - int a_j at each checkpoint, shape (checkpoints, reactions).
        """
        return self.counts - self.acc[:, self.layout.int_a]

    def reduced_weights(self) -> np.ndarray:
        """
        The mass-action form sum_{j: param(j) = k} (R_j - int a_j) / c_k of each weight process.
        NaN for parameters that also govern a non mass-action reaction.
        """
        compensated = self.compensated()
        result = np.full((len(self.times), len(self.parameters)), np.nan)
        for pos, (k, reactions) in enumerate(zip(self.parameters, self.mass_action_reactions)):
            if reactions is None:
                continue
            result[:, pos] = compensated[:, list(reactions)].sum(axis=1)/self.c[k]
        return result

# Simulation Plans ---------------------------------------------------------------------------------

class SimulationPlan(NamedTuple):
    """
    Everything the kernel needs besides the random stream. Plans are picklable and shared by all
    trajectories of an ensemble.
    """
    compiled: CompiledNetwork
    tables: ObservableTables
    x0: np.ndarray
    c: np.ndarray
    parameters: np.ndarray
    param_pos: np.ndarray
    center: np.ndarray
    has_centering: bool
    checkpoints: np.ndarray
    t_end: float
    mass_action_reactions: tuple


def checkpoint_grid(t_end: float, checkpoints: Optional[Sequence[float]] = None) -> np.ndarray:
    """
    Validate checkpoints and make sure the grid ends at `t_end`.
    """
    if not t_end > 0.0:
        raise ValueError("t_end must be positive")
    grid = np.unique(np.asarray(list(checkpoints or []), dtype=np.float64))
    if len(grid) and (grid[0] <= 0.0 or grid[-1] > t_end):
        raise ValueError("checkpoints must lie in (0, t_end]")
    if not len(grid) or grid[-1] != t_end:
        grid = np.append(grid, t_end)
    return grid


def make_plan(
    net: ReactionNetwork,
    c: ParameterVector,
    x0: State,
    t_end: float,
    checkpoints: Optional[Sequence[float]] = None,
    observables: Sequence[Observable] = (),
    params_of_interest: Sequence[int] = (),
    centering: Optional[Sequence[float]] = None
) -> SimulationPlan:
    c = np.asarray(c, dtype=np.float64)
    if c.shape != (net.num_parameters,):
        raise ValueError(f"expected {net.num_parameters} parameter values")
    x0 = net.state(x0)
    parameters = np.asarray(list(params_of_interest), dtype=np.int64)
    param_pos = np.full(net.num_parameters, -1, dtype=np.int64)
    for pos, k in enumerate(parameters):
        param_pos[net.parameter_index(int(k))] = pos
    if centering is not None and len(centering) != len(observables):
        raise ValueError("one centering constant per observable is required")
    center = np.zeros(len(observables)) if centering is None else np.asarray(centering, float)
    mass_action_reactions = tuple(
        tuple(net.reactions_of(int(k))) if net.is_mass_action_in(int(k)) else None
        for k in parameters)
    return SimulationPlan(
        compiled=compile_network(net),
        tables=compile_observables(observables, net.num_species),
        x0=x0,
        c=c,
        parameters=parameters,
        param_pos=param_pos,
        center=center,
        has_centering=centering is not None,
        checkpoints=checkpoint_grid(t_end, checkpoints),
        t_end=float(t_end),
        mass_action_reactions=mass_action_reactions)


_STATUS_MESSAGES = {
    kernel.STATUS_BAD_INTENSITY: "non-finite total intensity",
    kernel.STATUS_BAD_ACCUMULATOR: "non-finite accumulator",
    kernel.STATUS_ZERO_INTENSITY_JUMP: "jump of a reaction with zero intensity",
    kernel.STATUS_NEGATIVE_STATE: "negative molecule count",
}

def run_plan(
    plan: SimulationPlan,
    rng: RngStream,
    record_events: bool = False,
    replay_events: Optional[Sequence[Event]] = None
) -> TrajectoryRecord:
    """
    Run one trajectory of a plan.
    """
    cn = plan.compiled
    tb = plan.tables
    replay = replay_events is not None
    events = list(replay_events or [])
    replay_times = np.array([e.time for e in events], dtype=np.float64)
    replay_reactions = np.array([e.reaction for e in events], dtype=np.int64)
    status, fail_time, snap_x, snap_acc, snap_counts, n_events, ev_t, ev_j, ev_x = \
        kernel.simulate_kernel(
            rng.generator(),
            plan.x0,
            plan.c,
            cn.kinds,
            cn.p1,
            cn.p2,
            cn.exponents,
            cn.species,
            cn.reactants,
            cn.net,
            plan.param_pos,
            len(plan.parameters),
            tb.weights,
            tb.offsets,
            tb.is_table,
            tb.radix,
            tb.strides,
            tb.ptr,
            tb.keys,
            tb.values,
            tb.defaults,
            plan.center,
            plan.checkpoints,
            record_events,
            replay,
            replay_times,
            replay_reactions)
    if status in _STATUS_MESSAGES:
        raise SimulationError(_STATUS_MESSAGES[status], fail_time)
    absorbed = status == kernel.STATUS_ABSORBED
    recorded = None
    if record_events:
        recorded = [Event(float(ev_t[i]), int(ev_j[i]), ev_x[i].copy()) for i in range(n_events)]
    return TrajectoryRecord(
        times=plan.checkpoints.copy(),
        states=snap_x,
        acc=snap_acc,
        counts=snap_counts,
        layout=kernel.Layout(len(plan.parameters), len(cn.kinds), len(tb.offsets)),
        terminal_time=plan.t_end,
        absorbed=absorbed,
        parameters=plan.parameters,
        c=plan.c,
        mass_action_reactions=plan.mass_action_reactions,
        centering=plan.center.copy() if plan.has_centering else None,
        events=recorded)

# Interface Functions ------------------------------------------------------------------------------

def simulate(
    net: ReactionNetwork,
    c: ParameterVector,
    x0: State,
    t_end: float,
    checkpoints: Optional[Sequence[float]] = None,
    observables: Sequence[Observable] = (),
    params_of_interest: Sequence[int] = (),
    centering: Optional[Sequence[float]] = None,
    rng: RngStream = RngStream(0),
    record_events: bool = False
) -> TrajectoryRecord:
    """
    Simulate one exact CTMC trajectory and its sensitivity accumulators.

    Accumulators are snapshotted at every checkpoint (t_end is always the last one). A trajectory
    that reaches a state with zero total intensity is frozen there and flagged `absorbed`.
    """
    plan = make_plan(net, c, x0, t_end, checkpoints, observables, params_of_interest, centering)
    record = run_plan(plan, rng, record_events=record_events)
    if record.absorbed:
        logger.warning("Trajectory %d was absorbed before t=%g", rng.stream_index, t_end)
    return record


def event_stream(
    net: ReactionNetwork,
    c: ParameterVector,
    x0: State,
    t_end: float,
    rng: RngStream
) -> List[Event]:
    """
    The ordered (jump time, reaction index, pre-jump state) events of one trajectory.
    """
    plan = make_plan(net, c, x0, t_end)
    record = run_plan(plan, rng, record_events=True)
    assert record.events is not None
    return record.events


def replay(
    net: ReactionNetwork,
    c: ParameterVector,
    x0: State,
    events: Sequence[Event],
    t_end: float,
    checkpoints: Optional[Sequence[float]] = None,
    observables: Sequence[Observable] = (),
    params_of_interest: Sequence[int] = (),
    centering: Optional[Sequence[float]] = None
) -> TrajectoryRecord:
    """
    Re-run the accumulator updates over a recorded event stream.
    """
    plan = make_plan(net, c, x0, t_end, checkpoints, observables, params_of_interest, centering)
    return run_plan(plan, RngStream(0), replay_events=events)
