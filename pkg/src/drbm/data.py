"""Dataset loading and preprocessing.

Loaders produce one uniform representation: a float64 feature matrix with
every entry in [0, 1], integer labels, a class count, and a split name.  The
range and label invariants are checked at construction rather than assumed.

Supported sources:

* MNIST-style IDX image/label files (big-endian binary, magics 2051/2049,
  optionally gzip-compressed).  The training file splits into a leading
  training part and a trailing validation part of 10,000 rows.
* USPS-style delimited text, one example per line, label first, then the
  pixel values.  Values are rescaled to [0, 1] from the file's own range and
  a validation fold is carved with a fixed shuffle (seed 0).
* 20-Newsgroups-style directory trees (one directory per category, one file
  per document), turned into binary bag-of-words features over the most
  frequent training-set words.
* Generic label-first CSV, already in [0, 1].

Preprocessed datasets can be cached to a versioned .npz file.
"""

from __future__ import annotations

import gzip
import os
import re
import struct
from collections import Counter
from dataclasses import dataclass

import numpy as np

MNIST_IMAGE_MAGIC = 2051
MNIST_LABEL_MAGIC = 2049
SPLIT_SEED = 0  # fixed shuffle seed for carving validation folds
CACHE_FORMAT = "drbm-dataset-cache"
CACHE_VERSION = 1


class DataFormatError(ValueError):
    """An input file does not match its expected format."""


@dataclass(frozen=True, eq=False)
class Dataset:
    """An immutable split: features in [0, 1], labels in [0, n_classes)."""

    features: np.ndarray
    labels: np.ndarray
    n_classes: int
    split_name: str

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels)
        if feats.ndim != 2:
            raise ValueError(f"features must be 2-d, got shape {feats.shape}")
        if labels.ndim != 1 or labels.shape[0] != feats.shape[0]:
            raise ValueError(
                f"labels shape {labels.shape} does not match {feats.shape[0]} rows"
            )
        if feats.size and (feats.min() < 0.0 or feats.max() > 1.0):
            raise ValueError("features must lie in [0, 1]")
        labels = labels.astype(np.intp)
        if labels.size and (labels.min() < 0 or labels.max() >= self.n_classes):
            raise ValueError(f"labels must lie in [0, {self.n_classes})")
        if self.n_classes < 2:
            raise ValueError("need at least 2 classes")
        if feats.flags.writeable or not feats.flags.c_contiguous:
            feats = np.array(feats, order="C")
            feats.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.features.shape[0]

    def take(self, indices, split_name=None) -> "Dataset":
        return Dataset(
            self.features[indices],
            self.labels[indices],
            self.n_classes,
            split_name or self.split_name,
        )


# ---------------------------------------------------------------------------
# IDX (MNIST)

def _open_maybe_gzip(path):
    if str(path).endswith(".gz"):
        return gzip.open(path, "rb")
    return open(path, "rb")


def _read_exact(fh, count, path, offset):
    data = fh.read(count)
    if len(data) != count:
        raise DataFormatError(
            f"{path}: truncated at offset {offset + len(data)} "
            f"(wanted {count} bytes, got {len(data)})"
        )
    return data


def load_idx_images(path) -> np.ndarray:
    """Raw IDX image tensor (n, rows, cols) of uint8."""
    with _open_maybe_gzip(path) as fh:
        header = _read_exact(fh, 16, path, 0)
        magic, count, rows, cols = struct.unpack(">IIII", header)
        if magic != MNIST_IMAGE_MAGIC:
            raise DataFormatError(
                f"{path}: bad image magic 0x{magic:08x} at offset 0"
            )
        body = _read_exact(fh, count * rows * cols, path, 16)
        if fh.read(1):
            raise DataFormatError(f"{path}: trailing bytes after offset {16 + len(body)}")
    return np.frombuffer(body, dtype=np.uint8).reshape(count, rows, cols)


def load_idx_labels(path) -> np.ndarray:
    """Raw IDX label vector (n,) of uint8."""
    with _open_maybe_gzip(path) as fh:
        header = _read_exact(fh, 8, path, 0)
        magic, count = struct.unpack(">II", header)
        if magic != MNIST_LABEL_MAGIC:
            raise DataFormatError(
                f"{path}: bad label magic 0x{magic:08x} at offset 0"
            )
        body = _read_exact(fh, count, path, 8)
        if fh.read(1):
            raise DataFormatError(f"{path}: trailing bytes after offset {8 + len(body)}")
    return np.frombuffer(body, dtype=np.uint8)


def _idx_dataset(images_path, labels_path, split_name, n_classes=10):
    images = load_idx_images(images_path)
    labels = load_idx_labels(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise DataFormatError(
            f"{images_path} has {images.shape[0]} images but {labels_path} "
            f"has {labels.shape[0]} labels"
        )
    feats = images.reshape(images.shape[0], -1).astype(np.float64) / 255.0
    feats.setflags(write=False)  # lets Dataset adopt the array without a copy
    return Dataset(feats, labels.astype(np.intp), n_classes, split_name)


def load_mnist(
    train_images_path,
    train_labels_path,
    test_images_path,
    test_labels_path,
    valid_size: int = 10_000,
):
    """(train, valid, test): the training file keeps its order and its last
    ``valid_size`` rows become the validation split."""
    full = _idx_dataset(train_images_path, train_labels_path, "train")
    test = _idx_dataset(test_images_path, test_labels_path, "test")
    n = len(full)
    if not 0 < valid_size < n:
        raise DataFormatError(
            f"cannot carve {valid_size} validation rows out of {n}"
        )
    train = Dataset(full.features[: n - valid_size], full.labels[: n - valid_size], 10, "train")
    valid = Dataset(full.features[n - valid_size :], full.labels[n - valid_size :], 10, "valid")
    return train, valid, test


# ---------------------------------------------------------------------------
# USPS-style label-first numeric text

def _open_maybe_gzip_text(path):
    if str(path).endswith(".gz"):
        return gzip.open(path, "rt")
    return open(path)


def _parse_numeric_rows(path):
    rows = []
    width = None
    with _open_maybe_gzip_text(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if width is None:
                width = len(parts)
                if width < 2:
                    raise DataFormatError(
                        f"{path}: line {lineno}: need a label plus at least one value"
                    )
            elif len(parts) != width:
                raise DataFormatError(
                    f"{path}: line {lineno}: expected {width} columns, got {len(parts)}"
                )
            try:
                rows.append([float(v) for v in parts])
            except ValueError:
                raise DataFormatError(
                    f"{path}: line {lineno}: non-numeric value"
                ) from None
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    return np.asarray(rows, dtype=np.float64)


def _usps_split(path, split_name):
    arr = _parse_numeric_rows(path)
    raw_labels = arr[:, 0]
    labels = raw_labels.astype(np.intp)
    if np.any(labels != raw_labels) or labels.min() < 0 or labels.max() > 9:
        raise DataFormatError(f"{path}: labels must be integers in 0..9")
    values = arr[:, 1:]
    lo, hi = values.min(), values.max()
    feats = np.zeros_like(values) if hi == lo else (values - lo) / (hi - lo)
    return Dataset(feats, labels, 10, split_name)


def load_usps(train_path, test_path, valid_size: int | None = None):
    """(train, valid, test) from label-first delimited text files.

    Pixel values are affinely rescaled to [0, 1] from each file's own value
    range.  The validation fold is the last ``valid_size`` rows of the
    training file after a fixed shuffle (seed 0); by default that is 1,458
    rows for the standard 7,291-row file and a fifth of the rows otherwise.
    """
    full = _usps_split(train_path, "train")
    test = _usps_split(test_path, "test")
    n = len(full)
    if valid_size is None:
        valid_size = 1458 if n == 7291 else max(1, round(n * 1458 / 7291))
    if not 0 < valid_size < n:
        raise DataFormatError(f"cannot carve {valid_size} validation rows out of {n}")
    order = np.random.default_rng(SPLIT_SEED).permutation(n)
    train = full.take(order[: n - valid_size], "train")
    valid = full.take(order[n - valid_size :], "valid")
    return train, valid, test


# ---------------------------------------------------------------------------
# 20-Newsgroups-style bag of words

_TOKEN = re.compile(r"[a-z]+")
_TRAIN_DIR_NAMES = ("20news-bydate-train", "train")
_TEST_DIR_NAMES = ("20news-bydate-test", "test")


def tokenize(text: str) -> list:
    """Lowercase, split on non-alphabetic characters, drop 1-letter tokens."""
    return [t for t in _TOKEN.findall(text.lower()) if len(t) >= 2]


def _iter_documents(tree):
    categories = sorted(
        d for d in os.listdir(tree) if os.path.isdir(os.path.join(tree, d))
    )
    if not categories:
        raise DataFormatError(f"{tree}: no category directories")
    for category in categories:
        cat_dir = os.path.join(tree, category)
        names = sorted(
            f for f in os.listdir(cat_dir) if os.path.isfile(os.path.join(cat_dir, f))
        )
        if not names:
            raise DataFormatError(f"{cat_dir}: empty category directory")
        for name in names:
            with open(os.path.join(cat_dir, name), "rb") as fh:
                text = fh.read().decode("latin-1")
            yield category, set(tokenize(text))


def _find_tree(root, names, role):
    for name in names:
        candidate = os.path.join(root, name)
        if os.path.isdir(candidate):
            return candidate
    raise DataFormatError(
        f"{root}: no {role} tree (looked for {', '.join(names)})"
    )


def build_vocabulary(train_tree, vocab_size: int) -> list:
    """Top words by training-set document frequency; ties at the boundary go
    to the lexicographically smaller word."""
    df = Counter()
    for _, words in _iter_documents(train_tree):
        df.update(words)
    ranked = sorted(df.items(), key=lambda kv: (-kv[1], kv[0]))
    return [w for w, _ in ranked[:vocab_size]]


def _bag_of_words(tree, vocabulary, categories, split_name):
    index = {w: i for i, w in enumerate(vocabulary)}
    cat_index = {c: i for i, c in enumerate(categories)}
    documents = []
    for category, words in _iter_documents(tree):
        if category not in cat_index:
            raise DataFormatError(f"{tree}: unknown category {category!r}")
        present = [index[w] for w in words if w in index]
        documents.append((cat_index[category], present))
    # fill a preallocated matrix; building row-by-row would double the peak
    # footprint on corpus-sized inputs
    feats = np.zeros((len(documents), len(vocabulary)))
    labels = np.empty(len(documents), dtype=np.intp)
    for i, (label, present) in enumerate(documents):
        labels[i] = label
        feats[i, present] = 1.0
    feats.setflags(write=False)
    return Dataset(feats, labels, len(categories), split_name)


def load_20news(
    corpus_root,
    vocab_size: int = 5000,
    valid_fraction: float = 0.15,
):
    """((train, valid, test), vocabulary) from a bydate-style directory pair.

    The vocabulary comes strictly from the training tree.  Features are
    binary word presence.  The validation fold is carved from the training
    documents by a fixed shuffle (seed 0); its size is ``valid_fraction`` of
    them (the original benchmark's exact fold size is not recoverable, so it
    is exposed as a parameter).
    """
    train_tree = _find_tree(corpus_root, _TRAIN_DIR_NAMES, "training")
    test_tree = _find_tree(corpus_root, _TEST_DIR_NAMES, "test")
    categories = sorted(
        d for d in os.listdir(train_tree) if os.path.isdir(os.path.join(train_tree, d))
    )
    if len(categories) < 2:
        raise DataFormatError(f"{train_tree}: need at least two categories")
    vocabulary = build_vocabulary(train_tree, vocab_size)
    full = _bag_of_words(train_tree, vocabulary, categories, "train")
    test = _bag_of_words(test_tree, vocabulary, categories, "test")
    n = len(full)
    valid_size = max(1, round(n * valid_fraction))
    if valid_size >= n:
        raise DataFormatError(f"validation fraction {valid_fraction} leaves no training rows")
    order = np.random.default_rng(SPLIT_SEED).permutation(n)
    train = full.take(order[: n - valid_size], "train")
    valid = full.take(order[n - valid_size :], "valid")
    return (train, valid, test), vocabulary


# ---------------------------------------------------------------------------
# Generic CSV and toy data

def load_csv_dataset(path, n_classes: int | None = None, split_name: str = "train") -> Dataset:
    """Label-first CSV with features already in [0, 1]."""
    try:
        arr = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from None
    if arr.shape[1] < 2:
        raise DataFormatError(f"{path}: need a label column plus features")
    labels = arr[:, 0]
    if np.any(labels != labels.astype(np.intp)):
        raise DataFormatError(f"{path}: labels must be integers")
    labels = labels.astype(np.intp)
    if n_classes is None:
        n_classes = int(labels.max()) + 1 if labels.size else 2
        n_classes = max(n_classes, 2)
    feats = arr[:, 1:]
    if feats.size and (feats.min() < 0.0 or feats.max() > 1.0):
        raise DataFormatError(f"{path}: features must lie in [0, 1]")
    return Dataset(feats, labels, n_classes, split_name)


def save_csv_dataset(dataset: Dataset, path) -> None:
    """Inverse of :func:`load_csv_dataset`."""
    arr = np.column_stack([dataset.labels.astype(np.float64), dataset.features])
    np.savetxt(path, arr, delimiter=",", fmt="%.17g")


def toy_two_class() -> Dataset:
    """Eight linearly separable points in two dimensions, two classes."""
    feats = np.array(
        [
            [0.05, 0.10], [0.10, 0.20], [0.20, 0.05], [0.15, 0.15],
            [0.90, 0.85], [0.80, 0.95], [0.95, 0.80], [0.85, 0.90],
        ]
    )
    labels = np.array([0, 0, 0, 0, 1, 1, 1, 1])
    return Dataset(feats, labels, 2, "train")


def make_blobs_dataset(
    n_per_class: int,
    n_classes: int = 3,
    n_features: int = 4,
    spread: float = 0.08,
    seed: int = 0,
    split_name: str = "train",
) -> Dataset:
    """Well-separated Gaussian blobs clipped to [0, 1], for demos and tests."""
    rng = np.random.default_rng(seed)
    centers = rng.uniform(0.15, 0.85, size=(n_classes, n_features))
    feats = []
    labels = []
    for k in range(n_classes):
        pts = rng.normal(centers[k], spread, size=(n_per_class, n_features))
        feats.append(np.clip(pts, 0.0, 1.0))
        labels.append(np.full(n_per_class, k))
    return Dataset(np.vstack(feats), np.concatenate(labels), n_classes, split_name)


# ---------------------------------------------------------------------------
# Cache

def save_dataset_cache(dataset: Dataset, path) -> None:
    """Store a preprocessed split as a versioned .npz archive."""
    np.savez_compressed(
        path,
        format=CACHE_FORMAT,
        version=CACHE_VERSION,
        features=dataset.features,
        labels=dataset.labels,
        n_classes=dataset.n_classes,
        split_name=dataset.split_name,
    )


def load_dataset_cache(path) -> Dataset:
    with np.load(path, allow_pickle=False) as archive:
        if str(archive["format"]) != CACHE_FORMAT:
            raise DataFormatError(f"{path}: not a dataset cache")
        if int(archive["version"]) != CACHE_VERSION:
            raise DataFormatError(
                f"{path}: unsupported cache version {int(archive['version'])}"
            )
        return Dataset(
            archive["features"],
            archive["labels"],
            int(archive["n_classes"]),
            str(archive["split_name"]),
        )
