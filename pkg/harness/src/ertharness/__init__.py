"""Training harness proving that exported .ert tensor datasets learn."""

from .data import Dataset, Sample, load_manifest, relabel
from .errors import DatasetError
from .model import SmallConvNet
from .tensorfile import read_ert
from .training import TrainedModel, evaluate_on, train_eval, train_model

__all__ = [
    "Dataset",
    "DatasetError",
    "Sample",
    "SmallConvNet",
    "TrainedModel",
    "evaluate_on",
    "load_manifest",
    "read_ert",
    "relabel",
    "train_eval",
    "train_model",
]

__version__ = "0.1.0"
