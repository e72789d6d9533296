"""Dataset loading from a conversion manifest.

A dataset directory holds a manifest.csv (with at least `sample`, `path`,
and `label` columns) next to the .ert tensor files it references. Labels
are directory-style strings; they are mapped to contiguous class ids in
sorted order so the mapping is reproducible.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DatasetError
from .tensorfile import read_ert


@dataclass(frozen=True)
class Sample:
    sample_id: str
    tensor: np.ndarray  # float32, channels x H x W
    label: int


@dataclass(frozen=True)
class Dataset:
    samples: list[Sample]
    label_names: tuple[str, ...]

    @property
    def num_classes(self) -> int:
        return len(self.label_names)

    @property
    def channels(self) -> int:
        return self.samples[0].tensor.shape[0]

    def __len__(self) -> int:
        return len(self.samples)


def load_manifest(manifest_path) -> Dataset:
    """Read every tensor named by a manifest into one labelled dataset."""
    manifest_path = Path(manifest_path)
    if manifest_path.is_dir():
        manifest_path = manifest_path / "manifest.csv"
    root = manifest_path.parent

    try:
        with open(manifest_path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise DatasetError(f"{manifest_path}: {exc}") from exc
    if not rows:
        raise DatasetError(f"{manifest_path}: manifest has no rows")
    for column in ("sample", "path", "label"):
        if column not in rows[0]:
            raise DatasetError(f"{manifest_path}: manifest lacks a {column!r} column")

    labels = sorted({row["label"] for row in rows})
    if any(not name for name in labels):
        raise DatasetError(f"{manifest_path}: every sample needs a non-empty label")
    class_ids = {name: i for i, name in enumerate(labels)}

    samples = []
    for row in rows:
        tensor = read_ert(root / row["path"]).astype(np.float32)
        samples.append(Sample(row["sample"], tensor, class_ids[row["label"]]))

    shapes = {s.tensor.shape for s in samples}
    if len(shapes) != 1:
        raise DatasetError(
            f"{manifest_path}: tensors disagree on shape: {sorted(shapes)}"
        )
    return Dataset(samples, tuple(labels))


def relabel(dataset: Dataset, labels: list[int]) -> Dataset:
    """Same tensors, new integer labels (for null-model baselines)."""
    if len(labels) != len(dataset):
        raise DatasetError("label list length does not match the dataset")
    samples = [
        Sample(s.sample_id, s.tensor, int(label))
        for s, label in zip(dataset.samples, labels)
    ]
    return Dataset(samples, dataset.label_names)
