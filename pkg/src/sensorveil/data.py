"""Sensor recordings: CSV ingest, windowing, splits, pairing, synthesis.

The CSV schema is one sample per row, `user_id,trial_id,activity,<channels...>`,
at a fixed sampling rate, rows grouped contiguously by (user_id, trial_id).
A dataset manifest (JSON) records everything downstream commands need:
label set, the required/sensitive/neutral partition, window geometry, split
strategy, seeds, and the train-split standardization statistics.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .fsio import write_text


class SchemaError(ValueError):
    """CSV header or channel layout does not match the declared schema."""


class IngestionError(ValueError):
    """A data row is malformed or groups are not contiguous."""


class LabelError(ValueError):
    """An activity label is not in the declared label set."""


class ConfigurationError(ValueError):
    """A named user, trial, or label does not exist in the data."""


# ---------------------------------------------------------------------------
# core types

@dataclass
class TimeSeries:
    user_id: str
    trial_id: str
    rate_hz: float
    channels: list[str]
    samples: np.ndarray   # [T, M]
    activity: list[str]   # per-sample labels, length T


@dataclass
class LabeledWindow:
    values: np.ndarray    # [M, W]
    activity: str
    user_id: str
    trial_id: str

    @property
    def n_channels(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class InferencePartition:
    """The three-way split of activity labels an app is allowed to see."""
    required: tuple
    sensitive: tuple
    neutral: tuple

    def __post_init__(self):
        object.__setattr__(self, "required", tuple(self.required))
        object.__setattr__(self, "sensitive", tuple(self.sensitive))
        object.__setattr__(self, "neutral", tuple(self.neutral))
        sets = [set(self.required), set(self.sensitive), set(self.neutral)]
        total = sum(len(s) for s in sets)
        if len(sets[0] | sets[1] | sets[2]) != total:
            raise ConfigurationError("partition sets must be pairwise disjoint")

    def category(self, label: str) -> str:
        if label in self.required:
            return "required"
        if label in self.sensitive:
            return "sensitive"
        if label in self.neutral:
            return "neutral"
        raise ConfigurationError(f"label {label!r} is not assigned to any partition set")

    def validate_labels(self, labels) -> None:
        assigned = set(self.required) | set(self.sensitive) | set(self.neutral)
        missing = [l for l in labels if l not in assigned]
        if missing:
            raise ConfigurationError(f"labels {missing} missing from the partition")
        unknown = sorted(assigned - set(labels))
        if unknown:
            raise ConfigurationError(f"partition names unknown labels {unknown}")

    def to_dict(self):
        return {"required": list(self.required), "sensitive": list(self.sensitive),
                "neutral": list(self.neutral)}


@dataclass
class ReplacementPair:
    window: LabeledWindow
    target: np.ndarray    # [M, W]


@dataclass(frozen=True)
class SubjectSplit:
    """Held-out users go entirely to test; unseen-user generalization."""
    held_out_users: tuple
    validation_fraction: float = 0.2

    def __post_init__(self):
        object.__setattr__(self, "held_out_users", tuple(self.held_out_users))
        if not 0.0 <= self.validation_fraction < 1.0:
            raise ConfigurationError("validation_fraction must be in [0, 1)")


@dataclass(frozen=True)
class TrialSplit:
    """Every user appears in train and test with disjoint trials.

    held_out_trial is either one trial id applied to every user or a
    user -> trial mapping.
    """
    held_out_trial: object
    validation_fraction: float = 0.2

    def __post_init__(self):
        if not 0.0 <= self.validation_fraction < 1.0:
            raise ConfigurationError("validation_fraction must be in [0, 1)")

    def trial_for(self, user_id: str) -> str:
        if isinstance(self.held_out_trial, str):
            return self.held_out_trial
        return self.held_out_trial[user_id]


@dataclass
class CsvSchema:
    channels: list[str]
    labels: list[str]
    rate_hz: float


# ---------------------------------------------------------------------------
# CSV ingest / export

def load_csv(path, schema: CsvSchema) -> list[TimeSeries]:
    """Parse a sample-per-row CSV into per-(user, trial) series.

    Rows for one (user_id, trial_id) must be contiguous; a group that
    reappears after ending is an ingestion error, as is any cell that does
    not parse as a finite number.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        expected = ["user_id", "trial_id", "activity"] + list(schema.channels)
        if header != expected:
            raise SchemaError(f"{path}: header {header} does not match schema {expected}")

        label_set = set(schema.labels)
        series: list[TimeSeries] = []
        seen: set = set()
        key = None
        rows: list[list[float]] = []
        acts: list[str] = []

        def flush():
            if key is not None:
                series.append(TimeSeries(key[0], key[1], schema.rate_hz,
                                         list(schema.channels),
                                         np.array(rows, dtype=np.float64).reshape(len(rows), len(schema.channels)),
                                         list(acts)))

        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(expected):
                raise IngestionError(f"{path}: line {line_no}: expected {len(expected)} cells, got {len(row)}")
            user, trial, act = row[0], row[1], row[2]
            if act not in label_set:
                raise LabelError(f"{path}: line {line_no}: unknown activity label {act!r}")
            values = []
            for name, cell in zip(schema.channels, row[3:]):
                try:
                    v = float(cell)
                except ValueError:
                    raise IngestionError(f"{path}: line {line_no}: channel {name!r} cell "
                                         f"{cell!r} is not numeric") from None
                if not np.isfinite(v):
                    raise IngestionError(f"{path}: line {line_no}: channel {name!r} is not finite")
                values.append(v)
            k = (user, trial)
            if k != key:
                if k in seen:
                    raise IngestionError(f"{path}: line {line_no}: rows for user {user!r} "
                                         f"trial {trial!r} reappear after the group ended")
                flush()
                seen.add(k)
                key, rows, acts = k, [], []
            rows.append(values)
            acts.append(act)
        flush()
    return series


def write_csv(path, series_list) -> None:
    """Inverse of load_csv; floats use shortest round-trip formatting."""
    if not series_list:
        raise ValueError("nothing to write")
    channels = series_list[0].channels
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["user_id", "trial_id", "activity"] + list(channels))
    for s in series_list:
        if s.channels != channels:
            raise SchemaError("all series must share one channel layout")
        for row, act in zip(s.samples, s.activity):
            writer.writerow([s.user_id, s.trial_id, act] + [repr(float(v)) for v in row])
    write_text(path, buf.getvalue())


def magnitude(series: TimeSeries, channel_groups) -> TimeSeries:
    """Collapse each named (x, y, z) channel triple to its euclidean norm.

    The combined channel replaces the triple at the position of its first
    member; ungrouped channels pass through unchanged.
    """
    index = {name: i for i, name in enumerate(series.channels)}
    grouped: dict[int, tuple] = {}
    consumed: set[int] = set()
    for gi, triple in enumerate(channel_groups):
        if len(triple) != 3:
            raise SchemaError(f"channel group {triple} is not a triple")
        try:
            cols = tuple(index[name] for name in triple)
        except KeyError as exc:
            raise SchemaError(f"channel {exc.args[0]!r} not present in series") from None
        grouped[cols[0]] = (gi, cols)
        consumed.update(cols)

    new_channels: list[str] = []
    new_cols: list[np.ndarray] = []
    for i, name in enumerate(series.channels):
        if i in grouped:
            gi, cols = grouped[i]
            triple = tuple(channel_groups[gi])
            new_channels.append(_magnitude_name(triple, gi))
            block = series.samples[:, cols]
            new_cols.append(np.sqrt((block ** 2).sum(axis=1)))
        elif i not in consumed:
            new_channels.append(name)
            new_cols.append(series.samples[:, i])
    return TimeSeries(series.user_id, series.trial_id, series.rate_hz,
                      new_channels, np.column_stack(new_cols), list(series.activity))


def _magnitude_name(triple, gi) -> str:
    prefix = ""
    for chars in zip(*triple):
        if len(set(chars)) == 1:
            prefix += chars[0]
        else:
            break
    prefix = prefix.rstrip("_-. ")
    return f"{prefix}_mag" if prefix else f"mag{gi}"


# ---------------------------------------------------------------------------
# windowing and splits

def extract_windows(series: TimeSeries, width: int, stride: int,
                    label_rule: str = "pure") -> list[LabeledWindow]:
    """Slice fixed-width windows at offsets 0, stride, 2*stride, ...

    A window's activity is the majority per-sample label; under the default
    'pure' rule, windows whose majority label does not cover every sample are
    dropped, under 'majority' they are kept.
    """
    if width < 1 or stride < 1:
        raise ValueError("width and stride must be positive")
    if label_rule not in ("pure", "majority"):
        raise ValueError(f"unknown label_rule {label_rule!r}")
    out = []
    T = series.samples.shape[0]
    for start in range(0, T - width + 1, stride):
        labels = series.activity[start:start + width]
        counts = Counter(labels)
        label, top = max(counts.items(), key=lambda kv: (kv[1], kv[0]))
        if label_rule == "pure" and top < width:
            continue
        out.append(LabeledWindow(series.samples[start:start + width].T.copy(),
                                 label, series.user_id, series.trial_id))
    return out


def split_windows(windows, strategy, seed):
    """Partition windows into (train, validation, test) per the strategy."""
    users = sorted({w.user_id for w in windows})
    if isinstance(strategy, SubjectSplit):
        unknown = [u for u in strategy.held_out_users if u not in users]
        if unknown:
            raise ConfigurationError(f"held-out users {unknown} not in the data")
        held = set(strategy.held_out_users)
        test = [w for w in windows if w.user_id in held]
        pool = [w for w in windows if w.user_id not in held]
    elif isinstance(strategy, TrialSplit):
        trials_by_user: dict[str, set] = {}
        for w in windows:
            trials_by_user.setdefault(w.user_id, set()).add(w.trial_id)
        for u in users:
            t = strategy.trial_for(u)
            if t not in trials_by_user[u]:
                raise ConfigurationError(f"user {u!r} has no trial {t!r}")
        test = [w for w in windows if w.trial_id == strategy.trial_for(w.user_id)]
        pool = [w for w in windows if w.trial_id != strategy.trial_for(w.user_id)]
    else:
        raise ConfigurationError(f"unknown split strategy {strategy!r}")

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(pool))
    n_val = int(round(strategy.validation_fraction * len(pool)))
    val_idx = set(order[:n_val].tolist())
    validation = [pool[i] for i in sorted(val_idx)]
    train = [pool[i] for i in range(len(pool)) if i not in val_idx]
    return train, validation, test


def build_replacement_pairs(windows, partition: InferencePartition, seed,
                            prefer_same_user: bool = True):
    """Pair every window with its training target.

    Sensitive windows get the values of a uniformly drawn neutral window
    (same-user donors preferred); required and neutral windows are their own
    target. No target carries sensitive-labeled content.
    """
    neutral_global = [w for w in windows if partition.category(w.activity) == "neutral"]
    neutral_by_user: dict[str, list] = {}
    for w in neutral_global:
        neutral_by_user.setdefault(w.user_id, []).append(w)

    rng = np.random.default_rng(seed)
    pairs = []
    for w in windows:
        cat = partition.category(w.activity)
        if cat == "sensitive":
            pool = neutral_by_user.get(w.user_id, []) if prefer_same_user else []
            if not pool:
                pool = neutral_global
            if not pool:
                raise ConfigurationError("sensitive windows present but no neutral windows to draw from")
            donor = pool[int(rng.integers(len(pool)))]
            pairs.append(ReplacementPair(w, donor.values.copy()))
        else:
            pairs.append(ReplacementPair(w, w.values.copy()))
    return pairs


# ---------------------------------------------------------------------------
# one-hot encoding and standardization

def encode_inputs(windows, stats=None) -> np.ndarray:
    """Stack windows into a design matrix [n, M*W], optionally standardized."""
    if stats is not None:
        windows_values = [standardize_values(w.values, stats) for w in windows]
    else:
        windows_values = [w.values for w in windows]
    return np.stack([v.ravel() for v in windows_values]).astype(np.float64)


def one_hot(names, universe) -> np.ndarray:
    index = {name: i for i, name in enumerate(universe)}
    out = np.zeros((len(names), len(universe)))
    for r, name in enumerate(names):
        if name not in index:
            raise ConfigurationError(f"{name!r} not in {list(universe)}")
        out[r, index[name]] = 1.0
    return out


def activity_onehot(windows, labels) -> np.ndarray:
    return one_hot([w.activity for w in windows], labels)


def user_onehot(windows, users) -> np.ndarray:
    return one_hot([w.user_id for w in windows], users)


def attribute_onehot(windows, attributes: dict) -> np.ndarray:
    """Binary user attribute (e.g. a gender stand-in) as a 2-class one-hot."""
    try:
        vals = [int(attributes[w.user_id]) for w in windows]
    except KeyError as exc:
        raise ConfigurationError(f"user {exc.args[0]!r} has no attribute entry") from None
    return one_hot([str(v) for v in vals], ["0", "1"])


@dataclass
class ChannelStats:
    mean: np.ndarray  # [M]
    std: np.ndarray   # [M]

    def to_dict(self):
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["mean"], dtype=np.float64),
                   np.asarray(d["std"], dtype=np.float64))


def channel_stats(windows) -> ChannelStats:
    """Per-channel mean and std over every sample of the given windows."""
    stacked = np.concatenate([w.values for w in windows], axis=1)  # [M, n*W]
    std = stacked.std(axis=1)
    return ChannelStats(stacked.mean(axis=1), np.maximum(std, 1e-12))


def standardize_values(values, stats: ChannelStats):
    return (values - stats.mean[:, None]) / stats.std[:, None]


def destandardize_values(values, stats: ChannelStats):
    return values * stats.std[:, None] + stats.mean[:, None]


# ---------------------------------------------------------------------------
# synthetic data

def generate_synthetic(n_users: int, n_activities: int, windows_per_pair: int,
                       width: int, n_channels: int, seed,
                       rate_hz: float = 32.0, noise_scale: float = 0.08,
                       n_trials: int = 3) -> list[LabeledWindow]:
    """Multi-user activity windows with separable structure.

    Each activity has a fixed waveform (distinct fundamental frequency plus a
    harmonic); each user has a persistent signature (amplitude scale, harmonic
    phase offset, a low-frequency additive bias, and a DC offset). Users of
    even index carry a high-band ripple at one frequency, odd users at
    another, giving a learnable binary attribute. The only per-window
    randomness is the additive Gaussian noise.
    """
    if min(n_users, n_activities, windows_per_pair, width, n_channels) < 1:
        raise ValueError("all counts must be positive")
    rng = np.random.default_rng(seed)

    harmonic_weight = rng.uniform(0.25, 0.65, size=n_activities)
    act_freq = 1.0 + 0.8 * np.arange(n_activities)

    span = max(n_users - 1, 1)
    amp = 0.82 + 0.36 * np.arange(n_users) / span
    harm_phase = 2 * np.pi * np.arange(n_users) / n_users + rng.uniform(-0.1, 0.1, n_users)
    bias_freq = 0.15 + 0.30 * np.arange(n_users) / span
    bias_amp = 0.30 + rng.uniform(-0.05, 0.05, n_users)
    bias_phase = rng.uniform(0, 2 * np.pi, n_users)
    offset = -0.25 + 0.5 * np.arange(n_users) / span
    ripple_freq = np.where(np.arange(n_users) % 2 == 0, 0.30 * rate_hz, 0.36 * rate_hz)
    ripple_phase = rng.uniform(0, 2 * np.pi, n_users)
    ripple_amp = 0.22

    t = np.arange(width) / rate_hz
    ch = np.arange(n_channels)
    fund_gain = 1.0 / (1.0 + 0.30 * ch)
    harm_gain = 1.0 + 0.20 * ch
    bias_gain = 1.0 / (1.0 + 0.15 * ch)
    ripple_gain = 1.0 / (1.0 + 0.10 * ch)

    windows = []
    for u in range(n_users):
        for a in range(n_activities):
            base = np.sin(2 * np.pi * act_freq[a] * t)
            harm = np.sin(4 * np.pi * act_freq[a] * t + harm_phase[u])
            bias = bias_amp[u] * np.sin(2 * np.pi * bias_freq[u] * t + bias_phase[u])
            ripple = ripple_amp * np.sin(2 * np.pi * ripple_freq[u] * t + ripple_phase[u])
            clean = (amp[u] * (fund_gain[:, None] * base
                               + harmonic_weight[a] * harm_gain[:, None] * harm)
                     + bias_gain[:, None] * bias
                     + offset[u]
                     + ripple_gain[:, None] * ripple)
            for w in range(windows_per_pair):
                values = clean + noise_scale * rng.standard_normal((n_channels, width))
                windows.append(LabeledWindow(values, f"act{a}", f"u{u}",
                                             f"t{w % n_trials}"))
    return windows


def synthetic_attributes(n_users: int) -> dict:
    return {f"u{u}": u % 2 for u in range(n_users)}


def windows_to_series(windows, rate_hz: float, channels=None) -> list[TimeSeries]:
    """Concatenate windows per (user, trial) so a CSV round-trip at stride=W
    reproduces them exactly."""
    if channels is None:
        channels = [f"ch{i}" for i in range(windows[0].n_channels)]
    groups: dict[tuple, list] = {}
    for w in windows:
        groups.setdefault((w.user_id, w.trial_id), []).append(w)
    series = []
    for (user, trial), ws in sorted(groups.items()):
        samples = np.concatenate([w.values.T for w in ws], axis=0)
        activity = [w.activity for w in ws for _ in range(w.width)]
        series.append(TimeSeries(user, trial, rate_hz, list(channels), samples, activity))
    return series


# ---------------------------------------------------------------------------
# manifest

MANIFEST_VERSION = 1


@dataclass
class Manifest:
    """Single source of truth for a prepared dataset."""
    data_file: str
    rate_hz: float
    channels: list
    labels: list
    users: list
    partition: InferencePartition
    window_width: int
    train_stride: int
    eval_stride: int
    split: dict            # {"strategy": "subject"|"trial", ...}
    seed: int
    standardization: ChannelStats
    label_rule: str = "pure"
    channel_groups: list = field(default_factory=list)
    user_attributes: dict | None = None

    def to_dict(self):
        return {
            "manifest_version": MANIFEST_VERSION,
            "data_file": self.data_file,
            "rate_hz": self.rate_hz,
            "channels": list(self.channels),
            "labels": list(self.labels),
            "users": list(self.users),
            "partition": self.partition.to_dict(),
            "window_width": self.window_width,
            "train_stride": self.train_stride,
            "eval_stride": self.eval_stride,
            "split": self.split,
            "seed": self.seed,
            "standardization": self.standardization.to_dict(),
            "label_rule": self.label_rule,
            "channel_groups": [list(g) for g in self.channel_groups],
            "user_attributes": self.user_attributes,
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("manifest_version") != MANIFEST_VERSION:
            raise ConfigurationError(f"unsupported manifest version {d.get('manifest_version')}")
        part = d["partition"]
        return cls(
            data_file=d["data_file"], rate_hz=d["rate_hz"], channels=d["channels"],
            labels=d["labels"], users=d["users"],
            partition=InferencePartition(part["required"], part["sensitive"], part["neutral"]),
            window_width=d["window_width"], train_stride=d["train_stride"],
            eval_stride=d["eval_stride"], split=d["split"], seed=d["seed"],
            standardization=ChannelStats.from_dict(d["standardization"]),
            label_rule=d.get("label_rule", "pure"),
            channel_groups=d.get("channel_groups", []),
            user_attributes=d.get("user_attributes"),
        )

    def save(self, path):
        write_text(path, json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n")

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def split_strategy(self):
        kind = self.split.get("strategy")
        if kind == "subject":
            return SubjectSplit(tuple(self.split["held_out_users"]),
                                self.split.get("validation_fraction", 0.2))
        if kind == "trial":
            held = self.split["held_out_trial"]
            return TrialSplit(held, self.split.get("validation_fraction", 0.2))
        raise ConfigurationError(f"unknown split strategy {kind!r}")

    def schema(self) -> CsvSchema:
        return CsvSchema(list(self.channels), list(self.labels), self.rate_hz)


def load_manifest_windows(manifest: Manifest, base_dir, data_file=None, stride=None):
    """Load the manifest's CSV and slice evaluation-stride windows."""
    path = Path(base_dir) / (data_file or manifest.data_file)
    series = load_csv(path, manifest.schema())
    stride = stride or manifest.eval_stride
    windows = []
    for s in series:
        windows.extend(extract_windows(s, manifest.window_width, stride, manifest.label_rule))
    return windows
