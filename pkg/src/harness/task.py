"""
Synthetic M-class softmax-regression task.

Features are Gaussian around per-class means. The model is a flat parameter vector of
length M * (d_feat + 1): the M x d_feat weight matrix row by row, then M biases.
"""

from dataclasses import dataclass
from typing import Any

import numpy as np

from src.aggregation.models import ReferenceDirection, ReferenceSource
from src.client.mechanism import sign_of
from src.exceptions import DomainError
from src.ring.prg import Prg, seed_from_int


def model_dimension(d_feat: int, num_classes: int) -> int:
    return num_classes * (d_feat + 1)


def _unpack(w: np.ndarray, d_feat: int, num_classes: int) -> tuple[np.ndarray, np.ndarray]:
    if len(w) != model_dimension(d_feat, num_classes):
        raise DomainError(f"Model has {len(w)} parameters, expected {model_dimension(d_feat, num_classes)}")
    weights = w[: num_classes * d_feat].reshape(num_classes, d_feat)
    return weights, w[num_classes * d_feat :]


def logits(w: np.ndarray, x: np.ndarray, num_classes: int) -> np.ndarray:
    weights, bias = _unpack(w, x.shape[1], num_classes)
    return x @ weights.T + bias


def softmax_gradient(w: Any, x: np.ndarray, y: np.ndarray, num_classes: int) -> np.ndarray:
    """Mean cross-entropy gradient over (x, y); zeros for an empty dataset."""
    w_arr = np.asarray(w, dtype=np.float64)
    if len(x) == 0:
        return np.zeros_like(w_arr)
    z = logits(w_arr, x, num_classes)
    z -= z.max(axis=1, keepdims=True)
    probs = np.exp(z)
    probs /= probs.sum(axis=1, keepdims=True)
    probs[np.arange(len(y)), y] -= 1.0
    probs /= len(y)
    return np.concatenate([(probs.T @ x).ravel(), probs.sum(axis=0)])


def predict(w: Any, x: np.ndarray, num_classes: int) -> np.ndarray:
    return np.argmax(logits(np.asarray(w, dtype=np.float64), x, num_classes), axis=1)


def accuracy(w: Any, x: np.ndarray, y: np.ndarray, num_classes: int) -> float:
    if len(y) == 0:
        raise DomainError("Accuracy on an empty split")
    return float(np.mean(predict(w, x, num_classes) == y))


def apply_trigger(x: np.ndarray, num_features: int, value: float) -> np.ndarray:
    """Overwrite the leading num_features features with a constant."""
    triggered = np.array(x, dtype=np.float64, copy=True)
    triggered[:, :num_features] = value
    return triggered


def attack_success_rate(
    w: Any,
    x: np.ndarray,
    y: np.ndarray,
    num_classes: int,
    num_features: int,
    value: float,
    target_label: int,
) -> float:
    """Share of triggered test points, true label other than the target, classified as the target."""
    keep = y != target_label
    if not np.any(keep):
        return 0.0
    preds = predict(w, apply_trigger(x[keep], num_features, value), num_classes)
    return float(np.mean(preds == target_label))


@dataclass(eq=False)
class SyntheticTask:
    """Train, test and calibration splits plus the generating (Bayes) classifier."""

    d_feat: int
    num_classes: int
    class_means: np.ndarray
    true_weights: np.ndarray
    x_train: np.ndarray
    y_train: np.ndarray
    x_test: np.ndarray
    y_test: np.ndarray
    x_calibration: np.ndarray
    y_calibration: np.ndarray

    @property
    def dimension(self) -> int:
        return model_dimension(self.d_feat, self.num_classes)

    def initial_model(self) -> np.ndarray:
        return np.zeros(self.dimension, dtype=np.float64)

    @classmethod
    def generate(
        cls,
        d_feat: int,
        num_classes: int,
        num_train: int,
        num_test: int,
        num_calibration: int,
        seed: int,
        class_separation: float = 2.0,
        noise_std: float = 1.0,
    ) -> "SyntheticTask":
        """
        Draw class means, then three disjoint labeled splits.

        The generating classifier scores class c as mu_c . x - |mu_c|^2 / 2, which is
        Bayes-optimal for equal priors and isotropic noise.
        """
        if d_feat < 1 or num_classes < 2:
            raise DomainError("Need d_feat >= 1 and at least two classes")
        rng = Prg(seed_from_int(seed), 0, "task").numpy_generator()
        means = class_separation * rng.standard_normal((num_classes, d_feat))

        def draw(n: int) -> tuple[np.ndarray, np.ndarray]:
            labels = rng.integers(0, num_classes, size=n)
            return means[labels] + noise_std * rng.standard_normal((n, d_feat)), labels.astype(np.int64)

        x_train, y_train = draw(num_train)
        x_test, y_test = draw(num_test)
        x_cal, y_cal = draw(num_calibration)
        true_weights = np.concatenate([means.ravel(), -0.5 * np.sum(means**2, axis=1)])
        return cls(
            d_feat=d_feat,
            num_classes=num_classes,
            class_means=means,
            true_weights=true_weights,
            x_train=x_train,
            y_train=y_train,
            x_test=x_test,
            y_test=y_test,
            x_calibration=x_cal,
            y_calibration=y_cal,
        )


def root_direction(x_calibration: np.ndarray, y_calibration: np.ndarray, w: Any, num_classes: int) -> ReferenceDirection:
    """Sign of the calibration-set gradient at w."""
    if len(y_calibration) == 0:
        raise DomainError("Calibration set is empty")
    gradient = softmax_gradient(w, x_calibration, y_calibration, num_classes)
    return ReferenceDirection(signs=sign_of(gradient), source=ReferenceSource.ROOT_DATA)
