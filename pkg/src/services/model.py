"""Class-weighted L2 logistic regression: weights, training, prediction and model bundles."""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize, sparse
from scipy.special import expit
from sklearn.utils.class_weight import compute_class_weight

from src.errors import ClassWeightError, ModelFormatError, TrainingError
from src.services.vectorize import VARIANTS, MaxAbsScale, TfidfModel

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


@dataclass(frozen=True)
class TrainedModel:
    """Weights and bias of a fitted classifier plus the settings that produced it."""
    weights: np.ndarray
    bias: float
    C: float
    class_weights: Tuple[float, float]
    tol: float
    max_iter: int
    seed: int
    n_iter: int = 0
    converged: bool = True
    initial_grad_norm: float = 0.0
    final_grad_norm: float = 0.0
    objective_history: List[float] = field(default_factory=list, repr=False)

    @property
    def dim(self) -> int:
        return int(self.weights.shape[0])

    def to_dict(self) -> Dict:
        return {
            'dim': self.dim,
            'weights': self.weights.tolist(),
            'bias': self.bias,
            'C': self.C,
            'class_weights': list(self.class_weights),
            'tol': self.tol,
            'max_iter': self.max_iter,
            'seed': self.seed,
            'n_iter': self.n_iter,
            'converged': self.converged,
            'initial_grad_norm': self.initial_grad_norm,
            'final_grad_norm': self.final_grad_norm,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'TrainedModel':
        weights = np.asarray(data['weights'], dtype=np.float64)
        if weights.shape[0] != int(data['dim']):
            raise ModelFormatError(f"weight vector has {weights.shape[0]} entries, header says {data['dim']}")
        return cls(
            weights=weights,
            bias=float(data['bias']),
            C=float(data['C']),
            class_weights=tuple(float(w) for w in data['class_weights']),
            tol=float(data['tol']),
            max_iter=int(data['max_iter']),
            seed=int(data['seed']),
            n_iter=int(data.get('n_iter', 0)),
            converged=bool(data.get('converged', True)),
            initial_grad_norm=float(data.get('initial_grad_norm', 0.0)),
            final_grad_norm=float(data.get('final_grad_norm', 0.0)),
        )


@dataclass(frozen=True)
class VariantBundle:
    """Everything needed to score new functions with one variant."""
    variant: str
    model: TrainedModel
    tfidf: Optional[TfidfModel] = None
    scale: Optional[MaxAbsScale] = None


def compute_class_weights(labels: Sequence[int]) -> Tuple[float, float]:
    """Balanced weights n_total / (2 * n_class) for classes 0 and 1."""
    y = np.asarray(labels, dtype=np.int64)
    present = set(np.unique(y).tolist())
    if present != {0, 1}:
        raise ClassWeightError(f"balanced class weights need labels 0 and 1, got {sorted(present)}")
    w_neg, w_pos = compute_class_weight(class_weight='balanced', classes=np.array([0, 1]), y=y)
    return float(w_neg), float(w_pos)


def _with_bias_column(X) -> sparse.csr_matrix:
    X = sparse.csr_matrix(X, dtype=np.float64)
    return sparse.hstack([X, sparse.csr_matrix(np.ones((X.shape[0], 1)))], format='csr')


def logistic_objective(params: np.ndarray, X, signs: np.ndarray, sample_weights: np.ndarray, C: float):
    """
    Regularised weighted logistic loss and its gradient.

    params is (w, b) with b last and X already carries the constant column,
    so J = 1/2 |params|^2 + C * sum_i s_i * log(1 + exp(-t_i * x_i . params)).
    """
    margins = signs * (X @ params)
    value = 0.5 * params.dot(params) + C * sample_weights.dot(np.logaddexp(0.0, -margins))
    coef = -C * sample_weights * signs * expit(-margins)
    grad = params + X.T @ coef
    return value, grad


def _hessian_product(params: np.ndarray, vector: np.ndarray, X, signs, sample_weights, C):
    p = expit(signs * (X @ params))
    curvature = C * sample_weights * p * (1.0 - p)
    return vector + X.T @ (curvature * (X @ vector))


def train_logreg(
    X,
    y: Sequence[int],
    C: float = 1.0,
    class_weights: Optional[Tuple[float, float]] = None,
    tol: float = 1e-4,
    max_iter: int = 2000,
    seed: int = 42
) -> TrainedModel:
    """
    Fit class-weighted L2 logistic regression with a regularised bias.

    Stops once the gradient infinity-norm falls to tol times its value at
    the zero start, or after max_iter iterations. Deterministic; the seed is
    recorded but the solvers do not randomise.
    """
    X = sparse.csr_matrix(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] != y.shape[0]:
        raise TrainingError(f"{X.shape[0]} feature rows but {y.shape[0]} labels")
    if not np.all(np.isfinite(X.data)):
        raise TrainingError("feature matrix contains non-finite values")
    if set(np.unique(y).tolist()) != {0, 1}:
        raise TrainingError("training labels must contain both classes")
    if class_weights is None:
        class_weights = compute_class_weights(y)

    X_aug = _with_bias_column(X)
    signs = 2.0 * y - 1.0
    sample_weights = np.where(y == 1, class_weights[1], class_weights[0]).astype(np.float64)
    args = (X_aug, signs, sample_weights, C)

    params = np.zeros(X_aug.shape[1], dtype=np.float64)
    value, grad = logistic_objective(params, *args)
    initial_norm = float(np.max(np.abs(grad)))
    gtol = tol * initial_norm
    history = [float(value)]

    last = {}

    def objective(p):
        v, g = logistic_objective(p, *args)
        if not np.isfinite(v):
            raise TrainingError("objective diverged (non-finite value)")
        last['x'], last['f'] = p.copy(), v
        return v, g

    def record(xk, *_):
        if 'x' in last and np.array_equal(xk, last['x']):
            history.append(float(last['f']))
        else:
            history.append(float(logistic_objective(xk, *args)[0]))

    n_iter = 0
    final_norm = initial_norm
    if initial_norm > 0:
        result = optimize.minimize(
            objective,
            params,
            method='L-BFGS-B',
            jac=True,
            callback=record,
            options={'gtol': gtol, 'ftol': 0.0, 'maxiter': max_iter, 'maxfun': max(15000, 20 * max_iter)},
        )
        params, n_iter = result.x, int(result.nit)
        final_norm = float(np.max(np.abs(logistic_objective(params, *args)[1])))

        if final_norm > gtol and n_iter < max_iter:
            # Line search gave up early; finish with a trust-region Newton run
            logger.debug(f"L-BFGS-B stopped after {n_iter} iterations ({result.message}); continuing with trust-ncg")
            result = optimize.minimize(
                objective,
                params,
                method='trust-ncg',
                jac=True,
                hessp=lambda p, v: _hessian_product(p, v, *args),
                callback=record,
                options={'gtol': gtol, 'maxiter': max_iter - n_iter},
            )
            params, n_iter = result.x, n_iter + int(result.nit)
            final_norm = float(np.max(np.abs(logistic_objective(params, *args)[1])))

    if not np.all(np.isfinite(params)):
        raise TrainingError("solver produced non-finite coefficients")

    converged = final_norm <= gtol
    if not converged:
        logger.warning(
            f"Logistic regression did not converge in {n_iter} iterations "
            f"(gradient {final_norm:.3g} > {gtol:.3g})"
        )
    logger.debug(f"Trained logistic regression: dim={X.shape[1]} iterations={n_iter} gradient={final_norm:.3g}")

    return TrainedModel(
        weights=params[:-1].copy(),
        bias=float(params[-1]),
        C=C,
        class_weights=(float(class_weights[0]), float(class_weights[1])),
        tol=tol,
        max_iter=max_iter,
        seed=seed,
        n_iter=n_iter,
        converged=converged,
        initial_grad_norm=initial_norm,
        final_grad_norm=final_norm,
        objective_history=history,
    )


def decision_function(model: TrainedModel, X) -> np.ndarray:
    """Raw margins w . x + b for every row."""
    X = sparse.csr_matrix(X, dtype=np.float64)
    if X.shape[1] != model.dim:
        raise TrainingError(f"feature dimension {X.shape[1]} does not match model dimension {model.dim}")
    return np.asarray(X @ model.weights).ravel() + model.bias


def predict_proba(model: TrainedModel, X) -> np.ndarray:
    """Probability of the vulnerable class, sigma(w . x + b), one value per row."""
    return expit(decision_function(model, X))


def save_model(bundle: VariantBundle, path) -> Path:
    """Write a variant bundle as JSON."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        'format_version': FORMAT_VERSION,
        'variant': bundle.variant,
        'model': bundle.model.to_dict(),
        'tfidf': bundle.tfidf.to_dict() if bundle.tfidf else None,
        'scale': bundle.scale.to_dict() if bundle.scale else None,
    }
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(payload, f)
    logger.info(f"Saved {bundle.variant} model ({bundle.model.dim} features) to {path}")
    return path


def load_model(path) -> VariantBundle:
    """Read a bundle written by save_model."""
    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            payload = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ModelFormatError(f"cannot read model bundle {path}: {e}") from e

    if not isinstance(payload, dict) or payload.get('format_version') != FORMAT_VERSION:
        raise ModelFormatError(f"{path}: unsupported model bundle format")
    if payload.get('variant') not in VARIANTS:
        raise ModelFormatError(f"{path}: unknown variant {payload.get('variant')!r}")

    try:
        return VariantBundle(
            variant=payload['variant'],
            model=TrainedModel.from_dict(payload['model']),
            tfidf=TfidfModel.from_dict(payload['tfidf']) if payload.get('tfidf') else None,
            scale=MaxAbsScale.from_dict(payload['scale']) if payload.get('scale') else None,
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ModelFormatError(f"{path}: malformed model bundle ({e})") from e
