from .modelfile import (
    load_model,
    ModelFile,
    packaged_models,
    parse_model,
    read_model,
    SCHEMA_VERSION,
    serialize_model
)
from .report import (
    load_report,
    report_from_dict,
    report_to_dict,
    trajectory_frame,
    write_report_bundle,
    write_trajectory
)
