"""Datasets, CSV ingestion, generators and seeded train/validation/test splits.

Synthetic 4-D surrogate
-----------------------
Features ``(r_A, r_B, r_B2, r_X)`` are drawn uniformly from the box

    r_A in [1.0, 2.0],  r_B, r_B2 in [0.5, 1.2],  r_X in [1.2, 2.2]

(ionic-radius-like magnitudes). With the tolerance-like ratio
``t = (r_A + r_X) / (sqrt(2) * ((r_B + r_B2)/2 + r_X))`` and
``mu = (r_B + r_B2) / (2 r_X)`` the label is

    y = 1  iff  t - mu/2 + 0.15 sin(6 (r_B - r_B2)) > 0.64

which splits the box roughly in half along a curved, non-axis-aligned
surface.
"""
import csv
from dataclasses import dataclass, field
import hashlib
import json
from pathlib import Path

import numpy as np
from scipy.stats import unitary_group

from .qstate import feature_map_encode

SYNTH_LOW = np.array([1.0, 0.5, 0.5, 1.2])
SYNTH_HIGH = np.array([2.0, 1.2, 1.2, 2.2])
SYNTH_THRESHOLD = 0.64
TWO_PI_OPEN = 2.0 * np.pi * (1.0 - 1e-6)


class DataError(ValueError):
    pass


class IngestionError(DataError):
    pass


class MissingFileError(IngestionError, FileNotFoundError):
    pass


class GenerationError(DataError):
    pass


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    name: str = "dataset"
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y).astype(int).reshape(-1)
        if X.shape[0] != y.size:
            raise DataError(f"{X.shape[0]} feature rows but {y.size} labels")
        if not np.all(np.isfinite(X)):
            raise DataError("features must be finite")
        if not np.all((y == 0) | (y == 1)):
            raise DataError("labels must be 0 or 1")
        if not (np.any(y == 0) and np.any(y == 1)):
            raise DataError("dataset must contain both classes")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def feature_dim(self):
        return self.X.shape[1]

    def __len__(self):
        return self.y.size

    def to_json(self):
        return json.dumps({"name": self.name, "provenance": self.provenance,
                           "X": self.X.tolist(), "y": self.y.tolist()})

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        return cls(np.array(doc["X"]), np.array(doc["y"]), doc["name"], doc.get("provenance", {}))


@dataclass(frozen=True)
class DataSplit:
    train: np.ndarray
    validation: np.ndarray
    test: np.ndarray

    def digest(self):
        h = hashlib.sha256()
        for part in (self.train, self.validation, self.test):
            h.update(np.asarray(part, dtype=np.int64).tobytes())
            h.update(b"|")
        return h.hexdigest()


@dataclass(frozen=True)
class TrainValidation:
    """What the search is allowed to see: no test rows."""
    X_train: np.ndarray
    y_train: np.ndarray
    X_valid: np.ndarray
    y_valid: np.ndarray


def train_validation(dataset, split):
    return TrainValidation(dataset.X[split.train], dataset.y[split.train],
                           dataset.X[split.validation], dataset.y[split.validation])


def test_set(dataset, split):
    return dataset.X[split.test], dataset.y[split.test]


def load_csv(path, label_column, feature_columns=None, name=None):
    """Read a headered CSV with a {0, 1} label column.

    Columns are located by name, so their order in the file does not matter.
    ``feature_columns=None`` takes every column except the label.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"dataset file not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise IngestionError(f"{path}: empty file") from None
        if label_column not in header:
            raise IngestionError(f"{path}: no label column {label_column!r}")
        if feature_columns is None:
            feature_columns = [h for h in header if h != label_column]
        missing = [c for c in feature_columns if c not in header]
        if missing:
            raise IngestionError(f"{path}: missing feature columns {missing}")
        if not feature_columns:
            raise IngestionError(f"{path}: no feature columns")
        cols = [header.index(c) for c in feature_columns]
        lab = header.index(label_column)
        X, y = [], []
        for lineno, row in enumerate(reader, start=2):
            if not any(cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise IngestionError(f"{path}: row {lineno} has {len(row)} cells, expected {len(header)}")
            feats = []
            for c in cols:
                cell = row[c].strip()
                if not cell:
                    raise IngestionError(f"{path}: missing value at row {lineno}, column {header[c]!r}")
                try:
                    feats.append(float(cell))
                except ValueError:
                    raise IngestionError(
                        f"{path}: non-numeric value {cell!r} at row {lineno}, column {header[c]!r}"
                    ) from None
            cell = row[lab].strip()
            try:
                label = float(cell)
            except ValueError:
                label = None
            if label not in (0.0, 1.0):
                raise IngestionError(
                    f"{path}: label {cell!r} at row {lineno}, column {label_column!r} is not 0 or 1"
                )
            X.append(feats)
            y.append(int(label))
    if not y:
        raise IngestionError(f"{path}: no data rows")
    try:
        return Dataset(np.array(X), np.array(y), name or path.stem,
                       {"source": str(path), "label_column": label_column,
                        "feature_columns": list(feature_columns)})
    except DataError as exc:
        raise IngestionError(f"{path}: {exc}") from None


def parity_observable(n):
    """Diagonal of Z tensor ... tensor Z."""
    idx = np.arange(1 << n)
    pop = np.array([bin(i).count("1") for i in idx])
    return 1.0 - 2.0 * (pop % 2)


def adhoc_unitary(n, seed):
    return unitary_group.rvs(1 << n, random_state=np.random.default_rng((seed, 1)))


def zz_phase(X):
    """Diagonal phase ``sum_i x_i Z_i + sum_{i<j} (pi - x_i)(pi - x_j) Z_i Z_j``."""
    X = np.atleast_2d(X)
    n = X.shape[1]
    bits = (np.arange(1 << n)[:, None] >> np.arange(n)) & 1
    z = 1.0 - 2.0 * bits  # (2**n, n) Z eigenvalues
    phase = X @ z.T
    for i in range(n):
        for j in range(i + 1, n):
            phase += np.outer((np.pi - X[:, i]) * (np.pi - X[:, j]), z[:, i] * z[:, j])
    return phase


def zz_feature_states(X):
    """Second-order map ``U(x) H U(x) H |0>`` with ``U(x) = exp(i zz_phase(x))``."""
    X = np.atleast_2d(X)
    n = X.shape[1]
    H1 = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    Hn = H1
    for _ in range(n - 1):
        Hn = np.kron(Hn, H1)
    u = np.exp(1j * zz_phase(X))
    plus = np.full(1 << n, 2.0 ** (-n / 2))
    return u * ((u * plus) @ Hn.T)


FEATURE_MAPS = ("zz", "product")


def adhoc_expectation(X, V, feature_map="product"):
    """``<psi(x)| V^dagger Z..Z V |psi(x)>`` for each row of ``X``.

    ``psi`` is the product encoding used by the kernels (``"product"``) or
    the second-order ZZ map (``"zz"``). Labels from the product map lie in
    the span of the encoding-only kernel's features.
    """
    X = np.atleast_2d(X)
    if feature_map == "zz":
        psi = zz_feature_states(X)
    elif feature_map == "product":
        psi = feature_map_encode(X)
    else:
        raise ValueError(f"feature_map must be one of {FEATURE_MAPS}")
    rotated = psi @ V.T
    return np.abs(rotated) ** 2 @ parity_observable(X.shape[1])


def adhoc_generate(n=3, gap=0.3, count=200, seed=0, grid_size=None, feature_map="product"):
    """Labelled grid points in ``[0, 2pi)^n`` separated by a parity-observable gap.

    A Haar-random unitary ``V`` (from ``seed``) rotates the feature state;
    points with expectation ``>= gap`` are class 1 and ``<= -gap`` class 0.
    Distinct grid points are drawn in seeded random order until each class
    holds half of ``count``.
    """
    if n not in (2, 3):
        raise ValueError("ad hoc data is defined for n = 2 or 3")
    if not gap > 0:
        raise ValueError("gap must be positive")
    if count < 2:
        raise ValueError("count must be at least 2")
    grid_size = grid_size or (100 if n == 2 else 30)
    rng = np.random.default_rng(seed)
    V = adhoc_unitary(n, seed)
    want = {1: (count + 1) // 2, 0: count // 2}
    taken = {0: [], 1: []}
    order = rng.permutation(grid_size**n)
    step = 2.0 * np.pi / grid_size
    for start in range(0, order.size, 4096):
        chunk = order[start:start + 4096]
        pts = np.stack(np.unravel_index(chunk, (grid_size,) * n), axis=1) * step
        e = adhoc_expectation(pts, V, feature_map)
        for p, v in zip(pts, e):
            cls = 1 if v >= gap else 0 if v <= -gap else None
            if cls is not None and len(taken[cls]) < want[cls]:
                taken[cls].append(p)
        if all(len(taken[c]) == want[c] for c in (0, 1)):
            break
    else:
        raise GenerationError(
            f"grid of {grid_size}^{n} points yields too few samples beyond gap {gap} for count {count}"
        )
    X = np.array(taken[0] + taken[1])
    y = np.array([0] * want[0] + [1] * want[1])
    perm = rng.permutation(y.size)
    return Dataset(X[perm], y[perm], f"adhoc{n}d",
                   {"generator": "adhoc", "n": n, "gap": gap, "count": count, "seed": seed,
                    "grid_size": grid_size, "feature_map": feature_map})


def synthetic_4d_label(X):
    rA, rB, rB2, rX = np.atleast_2d(X).T
    t = (rA + rX) / (np.sqrt(2.0) * ((rB + rB2) / 2 + rX))
    mu = (rB + rB2) / (2 * rX)
    return (t - 0.5 * mu + 0.15 * np.sin(6 * (rB - rB2)) > SYNTH_THRESHOLD).astype(int)


def synthetic_4d_generate(count=1500, seed=0):
    if count < 4:
        raise ValueError("count must be at least 4")
    rng = np.random.default_rng(seed)
    X = rng.uniform(SYNTH_LOW, SYNTH_HIGH, size=(count, 4))
    return Dataset(X, synthetic_4d_label(X), "synthetic4d",
                   {"generator": "synthetic4d", "count": count, "seed": seed})


def split(dataset, n_train=100, n_valid=100, seed=0):
    """Seeded random (unstratified) split; the remainder becomes the test set."""
    n = len(dataset)
    if n < n_train + n_valid + 1:
        raise DataError(f"dataset of {n} rows is too small for {n_train}/{n_valid} + test")
    perm = np.random.default_rng(seed).permutation(n)
    return DataSplit(perm[:n_train], perm[n_train:n_train + n_valid], perm[n_train + n_valid:])


SCALING_MODES = ("none", "to_0_2pi", "standardize")


def scale_features(dataset, mode, fit_indices=None):
    """Per-feature affine rescaling fitted on ``fit_indices`` (default: all rows).

    ``to_0_2pi`` sends the fitted minimum to 0 and maximum to just under 2*pi;
    ``standardize`` gives zero mean and unit variance.
    """
    if mode not in SCALING_MODES:
        raise ValueError(f"unknown scaling mode {mode!r}; expected one of {SCALING_MODES}")
    if mode == "none":
        return dataset
    ref = dataset.X if fit_indices is None else dataset.X[np.asarray(fit_indices)]
    if mode == "to_0_2pi":
        lo, hi = ref.min(axis=0), ref.max(axis=0)
        span = hi - lo
        if np.any(span == 0):
            raise DataError(f"constant feature(s) {np.flatnonzero(span == 0).tolist()} cannot be scaled")
        X = (dataset.X - lo) / span * TWO_PI_OPEN
        params = {"offset": lo.tolist(), "span": span.tolist()}
    else:
        mean, std = ref.mean(axis=0), ref.std(axis=0)
        if np.any(std == 0):
            raise DataError(f"zero-variance feature(s) {np.flatnonzero(std == 0).tolist()}")
        X = (dataset.X - mean) / std
        params = {"mean": mean.tolist(), "std": std.tolist()}
    prov = dict(dataset.provenance, scaling={"mode": mode, **params})
    return Dataset(X, dataset.y, dataset.name, prov)
