"""Deterministic train/eval loop over an in-memory dataset.

All randomness (split, batch order, weight init) is derived from the one
seed argument, so a run is reproducible on a given machine. Accuracy is
top-1, reported in percent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from torch import nn
from torch.nn import functional as F

from .data import Dataset
from .errors import DatasetError
from .model import SmallConvNet


def to_batch(dataset: Dataset, resize: int | None) -> tuple[torch.Tensor, torch.Tensor]:
    """Stack a dataset into (inputs, labels), optionally resized to a square."""
    x = torch.from_numpy(np.stack([s.tensor for s in dataset.samples]))
    if resize is not None:
        if resize < 4:
            raise DatasetError(f"resize must be >= 4, got {resize}")
        x = F.interpolate(x, size=(resize, resize), mode="bilinear", align_corners=False)
    y = torch.tensor([s.label for s in dataset.samples], dtype=torch.long)
    return x, y


def stratified_split(labels: np.ndarray, val_fraction: float, rng) -> tuple[np.ndarray, np.ndarray]:
    """Per-class shuffled index split; every class lands in both parts."""
    train_idx, val_idx = [], []
    for label in np.unique(labels):
        members = rng.permutation(np.flatnonzero(labels == label))
        cut = max(1, int(round(len(members) * val_fraction)))
        if cut >= len(members):
            raise DatasetError(f"class {label} has too few samples to split")
        val_idx.extend(members[:cut])
        train_idx.extend(members[cut:])
    return np.sort(np.asarray(train_idx)), np.sort(np.asarray(val_idx))


@dataclass
class TrainedModel:
    """A fitted classifier plus everything needed to score other datasets."""

    model: nn.Module
    resize: int | None
    val_ids: tuple[str, ...]
    accuracy: float  # top-1 validation accuracy, percent


def train_model(
    dataset: Dataset,
    epochs: int = 10,
    lr: float = 0.001,
    seed: int = 0,
    resize: int | None = None,
    val_fraction: float = 0.25,
    batch_size: int = 32,
    verbose: bool = True,
) -> TrainedModel:
    """Fit the classifier on a stratified train split, score the held-out rest."""
    labels = np.array([s.label for s in dataset.samples])
    if len(np.unique(labels)) < 2:
        raise DatasetError("training needs at least two classes")
    if not 0 < val_fraction < 1:
        raise DatasetError(f"val fraction must be in (0, 1), got {val_fraction}")

    rng = np.random.default_rng(seed)
    torch.manual_seed(seed)

    x, y = to_batch(dataset, resize)
    train_idx, val_idx = stratified_split(labels, val_fraction, rng)

    model = SmallConvNet(dataset.channels, int(labels.max()) + 1)
    optimizer = torch.optim.Adam(model.parameters(), lr=lr)
    loss_fn = nn.CrossEntropyLoss()

    model.train()
    for epoch in range(epochs):
        order = train_idx[rng.permutation(len(train_idx))]
        for start in range(0, len(order), batch_size):
            batch = order[start : start + batch_size]
            optimizer.zero_grad()
            loss = loss_fn(model(x[batch]), y[batch])
            loss.backward()
            optimizer.step()

    accuracy = _top1(model, x[val_idx], y[val_idx])
    if verbose:
        print(f"top-1 accuracy: {accuracy:.2f}% ({len(val_idx)} validation samples)")
    val_ids = tuple(dataset.samples[i].sample_id for i in val_idx)
    return TrainedModel(model, resize, val_ids, accuracy)


def train_eval(
    dataset: Dataset,
    epochs: int = 10,
    lr: float = 0.001,
    seed: int = 0,
    **kwargs,
) -> float:
    """Train and return top-1 validation accuracy in percent."""
    return train_model(dataset, epochs=epochs, lr=lr, seed=seed, **kwargs).accuracy


def evaluate_on(trained: TrainedModel, dataset: Dataset) -> float:
    """Score a trained model on another dataset's copies of its validation samples.

    The datasets are matched by sample id, so corrupted variants are scored
    on exactly the samples the model never trained on.
    """
    wanted = set(trained.val_ids)
    keep = [i for i, s in enumerate(dataset.samples) if s.sample_id in wanted]
    if not keep:
        raise DatasetError("dataset shares no sample ids with the validation split")
    x, y = to_batch(dataset, trained.resize)
    return _top1(trained.model, x[keep], y[keep])


def _top1(model: nn.Module, x: torch.Tensor, y: torch.Tensor) -> float:
    model.eval()
    with torch.no_grad():
        predicted = model(x).argmax(dim=1)
        return float((predicted == y).float().mean()) * 100.0
