"""Matrix logistic regression, spike-noise gradient oracle and noise analysis."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.special import expit

from . import linalg
from .errors import DimensionMismatch, ShapeMismatch


@dataclass
class LogisticProblem:
    """``f(X) = mean_i log(1 + exp(-y_i <A_i, X>))`` over stacked ``A_i``.

    ``features`` has shape (n, m, k); labels are +-1.
    """

    features: np.ndarray
    labels: np.ndarray
    test_features: Optional[np.ndarray] = None
    test_labels: Optional[np.ndarray] = None
    x_true: Optional[np.ndarray] = None

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.float64)
        if self.features.ndim != 3 or len(self.features) != len(self.labels):
            raise DimensionMismatch("features must be (n, m, k) with one label per sample")
        if not np.all(np.abs(self.labels) == 1):
            raise ValueError("labels must be -1 or +1")
        self._flat = self.features.reshape(len(self.labels), -1)
        if self.test_features is not None:
            self.test_features = np.asarray(self.test_features, dtype=np.float64)
            self.test_labels = np.asarray(self.test_labels, dtype=np.float64)
            self._test_flat = self.test_features.reshape(len(self.test_labels), -1)

    @property
    def shape(self) -> tuple:
        return self.features.shape[1:]

    @property
    def n(self) -> int:
        return len(self.labels)

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != self.shape:
            raise ShapeMismatch(f"X has shape {x.shape}, problem expects {self.shape}")
        return x

    def margins(self, x, index_set=None) -> np.ndarray:
        x = self._check(x)
        flat, y = self._flat, self.labels
        if index_set is not None:
            flat, y = flat[index_set], y[index_set]
        return y * (flat @ x.ravel())

    def loss(self, x, index_set=None) -> float:
        return float(np.mean(np.logaddexp(0.0, -self.margins(x, index_set))))

    def test_loss(self, x) -> float:
        if self.test_features is None:
            raise ValueError("problem has no test split")
        x = self._check(x)
        z = self.test_labels * (self._test_flat @ x.ravel())
        return float(np.mean(np.logaddexp(0.0, -z)))

    def grad(self, x, index_set=None) -> np.ndarray:
        x = self._check(x)
        flat, y = self._flat, self.labels
        if index_set is not None:
            flat, y = flat[index_set], y[index_set]
        weights = -y * expit(-y * (flat @ x.ravel()))
        return (weights @ flat / len(y)).reshape(self.shape)

    def sample_grads(self, x, index_set=None) -> np.ndarray:
        """Per-sample gradients stacked along axis 0."""
        x = self._check(x)
        idx = np.arange(self.n) if index_set is None else np.asarray(index_set)
        y = self.labels[idx]
        weights = -y * expit(-y * (self._flat[idx] @ x.ravel()))
        return weights[:, None, None] * self.features[idx]

    @property
    def lipschitz(self) -> float:
        return smoothness_bounds(self).lf_bound


@dataclass
class QuadraticProblem:
    """``f(X) = 0.5 ||X - target||_F^2``; a test instance with a closed-form optimum."""

    target: np.ndarray

    @property
    def shape(self):
        return self.target.shape

    def loss(self, x, index_set=None) -> float:
        return 0.5 * float(np.sum((np.asarray(x) - self.target) ** 2))

    def grad(self, x, index_set=None) -> np.ndarray:
        return np.asarray(x, dtype=np.float64) - self.target

    @property
    def lipschitz(self) -> float:
        return 1.0


@dataclass(frozen=True)
class SpikeNoiseSpec:
    ell: float
    rank: int = 1

    def __post_init__(self):
        if self.ell < 0:
            raise ValueError("spike magnitude must be non-negative")
        if self.rank < 1:
            raise ValueError("rank must be positive")


@dataclass(frozen=True)
class SmoothnessBounds:
    m_bound: float
    b_bound: float
    lf_bound: float


def gen_weight_reg_dataset(
    d: int, n_train: int, n_test: int, sigma_noise: float, rng: np.random.Generator
) -> LogisticProblem:
    """Gaussian ground truth and features; labels ``sign(<A_i, X~> + xi_i)``."""
    if min(d, n_train, n_test) < 1:
        raise ValueError("d, n_train and n_test must be positive")
    x_true = rng.standard_normal((d, d))
    feats = rng.standard_normal((n_train + n_test, d, d))
    noise = sigma_noise * rng.standard_normal(n_train + n_test)
    score = feats.reshape(n_train + n_test, -1) @ x_true.ravel() + noise
    labels = np.where(score >= 0, 1.0, -1.0)
    return LogisticProblem(
        features=feats[:n_train],
        labels=labels[:n_train],
        test_features=feats[n_train:],
        test_labels=labels[n_train:],
        x_true=x_true,
    )


def loss(problem: LogisticProblem, x, index_set=None) -> float:
    return problem.loss(x, index_set)


def grad(problem: LogisticProblem, x, index_set=None) -> np.ndarray:
    return problem.grad(x, index_set)


def smoothness_bounds(problem: LogisticProblem) -> SmoothnessBounds:
    """Upper bounds on the gradient norms and the Frobenius smoothness constant.

    ``M <= mean ||A_i||_2``, ``B <= mean ||A_i||_F`` and
    ``L_F <= sigma_max(A~)^2 / (4 n)`` with ``A~`` the row-stacked ``vec(A_i)``.
    """
    feats = problem.features
    if len(feats) == 0:
        raise ValueError("empty problem")
    spec = np.linalg.norm(feats, ord=2, axis=(1, 2))
    frob = np.linalg.norm(feats, axis=(1, 2))
    top = np.linalg.norm(problem._flat, ord=2)
    return SmoothnessBounds(float(spec.mean()), float(frob.mean()), float(top**2 / (4 * len(feats))))


def spike_noise(shape, spec: SpikeNoiseSpec, rng: np.random.Generator) -> np.ndarray:
    """``ell * U V^T`` with independent uniform Stiefel factors."""
    m, n = shape
    if spec.rank > min(m, n):
        raise DimensionMismatch(f"rank {spec.rank} exceeds min{tuple(shape)}")
    u = linalg.sample_stiefel(m, spec.rank, rng).matrix
    v = linalg.sample_stiefel(n, spec.rank, rng).matrix
    return spec.ell * (u @ v.T)


def spike_noisy_grad(
    problem, x, spec: SpikeNoiseSpec, rng: np.random.Generator, index_set=None
) -> np.ndarray:
    g = problem.grad(x, index_set)
    if spec.ell == 0:
        return g
    return g + spike_noise(g.shape, spec, rng)


@dataclass
class NoiseRecord:
    index: int
    noise_singular_values: np.ndarray
    d_spec: float
    d_chord: float
    d_spec_left: float
    d_spec_right: float
    d_chord_left: float
    d_chord_right: float


def signal_noise_decompose(
    stoch_grads: Sequence[np.ndarray], signal: np.ndarray, r: int
) -> list[NoiseRecord]:
    """Compare each noise matrix ``g - G`` with the signal's top-r subspaces.

    Distances are the max over the left and right singular subspaces.
    """
    signal = linalg.as_matrix(signal, "signal")
    if signal.ndim != 2 or not 1 <= r <= min(signal.shape):
        raise DimensionMismatch(f"need 1 <= r <= min{signal.shape}, got r={r}")
    us, _, vs = linalg.svd_compact(signal)
    us, vs = us[:, :r], vs[:, :r]
    records = []
    for i, g in enumerate(stoch_grads):
        g = np.asarray(g, dtype=np.float64)
        if g.shape != signal.shape:
            raise ShapeMismatch(f"gradient {i} has shape {g.shape}, signal has {signal.shape}")
        un, sn, vn = linalg.svd_compact(g - signal)
        sl, cl = linalg.subspace_distance(un[:, :r], us)
        sr, cr = linalg.subspace_distance(vn[:, :r], vs)
        records.append(NoiseRecord(i, sn[:r].copy(), max(sl, sr), max(cl, cr), sl, sr, cl, cr))
    return records


def dump_problem(problem: LogisticProblem, path) -> None:
    """Write the dataset as an uncompressed ``.npz`` of float64 arrays."""
    arrays = {"features": problem.features, "labels": problem.labels}
    for name in ("test_features", "test_labels", "x_true"):
        value = getattr(problem, name)
        if value is not None:
            arrays[name] = value
    with open(Path(path), "wb") as fh:
        np.savez(fh, **arrays)


def load_problem(path) -> LogisticProblem:
    with np.load(Path(path)) as data:
        return LogisticProblem(**{k: data[k] for k in data.files})
