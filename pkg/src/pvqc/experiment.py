"""Training loop, multi-seed orchestration and result files."""

from __future__ import annotations

import csv
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import data, models, neural
from .prng import derive
from .qstate import MAX_QUBITS, AnsatzConfig

log = logging.getLogger(__name__)

FAMILIES = ("moons", "circles", "blobs")
EVAL_CHUNK = 128

# PRNG stream ids per purpose; each seed owns all four streams
STREAM_DATA, STREAM_SPLIT, STREAM_MODEL, STREAM_SHUFFLE = 1, 2, 3, 4


@dataclass(frozen=True)
class ExperimentConfig:
    family: str
    variant: str
    noise: float = 0.0
    factor: float = 0.5
    n_features: int = 2
    class_sep: float = 1.0
    n_qubits: int = 4
    depth: int = 2
    epochs: int = 40
    batch_size: int = 20
    n_train: int = 200
    n_test: int = 100
    lr_circuit: float = 0.01
    lr_observable: float = 0.1
    lr_controller: float = 0.01
    latent_dim: int = models.LATENT_DIM
    obs_dtype: str = "float64"
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    output_dir: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        self.validate()

    def validate(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown task family {self.family!r}; expected one of {FAMILIES}")
        if self.variant not in models.VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; valid kinds: {', '.join(models.VARIANTS)}")
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}]")
        if self.depth < 1 or self.epochs < 0:
            raise ValueError("depth must be >= 1 and epochs >= 0")
        if self.batch_size < 1 or self.n_train % self.batch_size:
            raise ValueError(f"batch size {self.batch_size} must divide n_train {self.n_train}")
        if self.n_test < 1:
            raise ValueError("n_test must be >= 1")
        if self.noise < 0:
            raise ValueError("noise must be non-negative")
        if self.family == "circles" and not 0 < self.factor < 1:
            raise ValueError("circles factor must be in (0, 1)")
        if self.family == "blobs" and self.n_features < 2:
            raise ValueError("blobs need at least 2 features")
        if self.family != "blobs" and self.n_features != 2:
            raise ValueError(f"{self.family} has exactly 2 features")
        if self.obs_dtype not in ("float64", "float32"):
            raise ValueError("obs_dtype must be float64 or float32")
        if not self.seeds:
            raise ValueError("at least one seed is required")

    @property
    def task_id(self) -> str:
        if self.family == "blobs":
            return f"blobs-d{self.n_features}"
        return f"{self.family}-noise{self.noise:g}"

    @property
    def config_id(self) -> str:
        return f"{self.task_id}_{self.variant}"

    @property
    def ansatz(self) -> AnsatzConfig:
        return AnsatzConfig(self.n_qubits, self.depth)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["seeds"] = list(self.seeds)
        return out


@dataclass
class RunHistory:
    seed: int
    train_loss: list[float] = field(default_factory=list)
    test_acc: list[float] = field(default_factory=list)
    seconds: float = 0.0


def make_dataset(cfg: ExperimentConfig, seed: int) -> data.Dataset:
    n = cfg.n_train + cfg.n_test
    n += n % 2
    rng = derive(seed, STREAM_DATA)
    if cfg.family == "moons":
        return data.make_moons(n, cfg.noise, rng)
    if cfg.family == "circles":
        return data.make_circles(n, cfg.noise, rng, factor=cfg.factor)
    return data.make_blob_classification(n, cfg.n_features, rng, class_sep=cfg.class_sep)


def build_for(cfg: ExperimentConfig, seed: int) -> models.Model:
    rates = models.LearningRates(cfg.lr_circuit, cfg.lr_observable, cfg.lr_controller)
    return models.build_model(
        cfg.variant,
        cfg.ansatz,
        cfg.n_features,
        derive(seed, STREAM_MODEL),
        rates=rates,
        latent_dim=cfg.latent_dim,
        obs_dtype=np.dtype(cfg.obs_dtype),
    )


def evaluate(model: models.Model, test: data.Dataset) -> float:
    """Fraction of samples whose thresholded prediction (p >= 0.5 -> 1) matches."""
    if len(test) == 0:
        raise ValueError("cannot evaluate on an empty test set")
    preds = np.concatenate(
        [models.predict(model, test.features[i:i + EVAL_CHUNK]) for i in range(0, len(test), EVAL_CHUNK)]
    )
    return float(np.mean(preds == test.labels))


def train_one_seed(cfg: ExperimentConfig, seed: int, on_epoch=None) -> RunHistory:
    """Train one model from scratch; ``on_epoch(epoch, model)`` is called after each epoch."""
    start = time.perf_counter()
    ds = make_dataset(cfg, seed)
    train, test, _ = data.split_and_standardize(ds, cfg.n_train, cfg.n_test, derive(seed, STREAM_SPLIT))
    model = build_for(cfg, seed)
    shuffle = derive(seed, STREAM_SHUFFLE)
    history = RunHistory(seed)
    for epoch in range(1, cfg.epochs + 1):
        order = shuffle.permutation(cfg.n_train)
        total = 0.0
        for lo in range(0, cfg.n_train, cfg.batch_size):
            idx = order[lo:lo + cfg.batch_size]
            p, cache = models.model_forward(model, train.features[idx])
            loss, _ = neural.bce_loss(p, train.labels[idx])
            total += float(np.sum(loss))
            grads = models.model_backward(model, cache, train.labels[idx])
            models.model_step(model, grads, len(idx))
        history.train_loss.append(total / cfg.n_train)
        history.test_acc.append(evaluate(model, test))
        if on_epoch is not None:
            on_epoch(epoch, model)
        log.debug("%s seed=%d epoch=%d loss=%.4f acc=%.3f", cfg.config_id, seed, epoch,
                  history.train_loss[-1], history.test_acc[-1])
    history.seconds = time.perf_counter() - start
    return history


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    histories: list[RunHistory]
    loss_mean: np.ndarray
    loss_std: np.ndarray
    acc_mean: np.ndarray
    acc_std: np.ndarray

    @property
    def final_acc(self) -> tuple[float, float]:
        if not len(self.acc_mean):
            return float("nan"), float("nan")
        return float(self.acc_mean[-1]), float(self.acc_std[-1])


def _mean_std(values: np.ndarray, ddof: int) -> tuple[np.ndarray, np.ndarray]:
    # shifted by the first seed: exact zeros when every seed agrees
    shifted = values - values[:1]
    return values[0] + shifted.mean(axis=0), shifted.std(axis=0, ddof=ddof)


def aggregate(cfg: ExperimentConfig, histories: list[RunHistory]) -> ExperimentResult:
    """Per-epoch mean and sample standard deviation across seeds."""
    if not histories:
        raise ValueError("need at least one run to aggregate")
    loss = np.array([h.train_loss for h in histories], dtype=np.float64).reshape(len(histories), -1)
    acc = np.array([h.test_acc for h in histories], dtype=np.float64).reshape(len(histories), -1)
    ddof = 1 if len(histories) > 1 else 0
    loss_mean, loss_std = _mean_std(loss, ddof)
    acc_mean, acc_std = _mean_std(acc, ddof)
    return ExperimentResult(cfg, histories, loss_mean, loss_std, acc_mean, acc_std)


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def write_outputs(result: ExperimentResult, out_dir) -> list[Path]:
    """History CSV, summary CSV and manifest JSON for one configuration."""
    cfg = result.config
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    hist_path = out / f"history_{cfg.config_id}.csv"
    summary_path = out / f"summary_{cfg.config_id}.csv"
    manifest_path = out / f"manifest_{cfg.config_id}.json"
    with hist_path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["variant", "task", "seed", "epoch", "train_loss", "test_acc"])
        for h in result.histories:
            for epoch, (loss, acc) in enumerate(zip(h.train_loss, h.test_acc), start=1):
                writer.writerow([cfg.variant, cfg.task_id, h.seed, epoch, _fmt(loss), _fmt(acc)])
    with summary_path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["variant", "task", "epoch", "loss_mean", "loss_std", "acc_mean", "acc_std"])
        for i in range(len(result.loss_mean)):
            writer.writerow([
                cfg.variant, cfg.task_id, i + 1,
                _fmt(result.loss_mean[i]), _fmt(result.loss_std[i]),
                _fmt(result.acc_mean[i]), _fmt(result.acc_std[i]),
            ])
    manifest = cfg.to_dict()
    manifest["config_id"] = cfg.config_id
    manifest["task"] = cfg.task_id
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return [hist_path, summary_path, manifest_path]


def _job(args):
    cfg, seed = args
    return train_one_seed(cfg, seed)


def run_many(configs: list[ExperimentConfig], workers: int = 1, out_dir=None) -> list[ExperimentResult]:
    """Run every (config, seed) pair, aggregate per config and write files.

    Results are identical for any ``workers`` value; only wall-clock changes.
    """
    jobs = [(cfg, seed) for cfg in configs for seed in cfg.seeds]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            histories = list(pool.map(_job, jobs))
    else:
        histories = [_job(job) for job in jobs]
    results = []
    pos = 0
    for cfg in configs:
        chunk = histories[pos:pos + len(cfg.seeds)]
        pos += len(cfg.seeds)
        result = aggregate(cfg, chunk)
        target = out_dir if out_dir is not None else cfg.output_dir
        if target is not None:
            write_outputs(result, target)
        results.append(result)
    return results


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    return run_many([cfg], workers=workers)[0]
