from .ssa import (
    checkpoint_grid,
    compile_network,
    Event,
    event_stream,
    make_plan,
    replay,
    RngStream,
    run_plan,
    SensitivityAccumulators,
    SimulationPlan,
    simulate,
    TrajectoryRecord
)
