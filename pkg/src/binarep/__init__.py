"""Event-camera stream tooling: bit-packed event frames, rival frame
representations, seeded stream corruptions, and robustness reports."""

from .corruptions import (
    CorruptionKind,
    CorruptionSpec,
    background_activity,
    occlusion,
    severity_param,
)
from .events import (
    EVENT_DTYPE,
    Event,
    EventStream,
    SensorGeometry,
    WindowPlan,
    plan_windows,
    slice_stream,
)
from .metrics import (
    FrameStats,
    RadScore,
    compare_representations,
    frame_stats,
    relative_accuracy_drop,
)
from .render import render_png
from .representations import (
    BinaRepFrame,
    BinaryFrameStack,
    RepTensor,
    TensorLayout,
    assemble_tensor,
    bina_rep,
    binary_event_images,
    event_histogram,
    voxel_grid,
)
from .stream_io import encode_nmnist, parse_csv, parse_nmnist, write_csv
from .tensorfile import read_tensor, read_tensor_file, write_tensor, write_tensor_file

__version__ = "0.1.0"

__all__ = [
    "BinaRepFrame",
    "BinaryFrameStack",
    "CorruptionKind",
    "CorruptionSpec",
    "EVENT_DTYPE",
    "Event",
    "EventStream",
    "FrameStats",
    "RadScore",
    "RepTensor",
    "SensorGeometry",
    "TensorLayout",
    "WindowPlan",
    "assemble_tensor",
    "background_activity",
    "bina_rep",
    "binary_event_images",
    "compare_representations",
    "encode_nmnist",
    "event_histogram",
    "frame_stats",
    "occlusion",
    "parse_csv",
    "parse_nmnist",
    "plan_windows",
    "read_tensor",
    "read_tensor_file",
    "relative_accuracy_drop",
    "render_png",
    "severity_param",
    "slice_stream",
    "voxel_grid",
    "write_csv",
    "write_tensor",
    "write_tensor_file",
]
