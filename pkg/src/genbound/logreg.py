"""Gaussian-mixture binary classification with logistic-regression training
and an empirically estimated per-sample-MI bound.

Training minimizes the logistic surrogate (1/n) sum log(1 + exp(-y w.x))
by full-batch gradient descent.  All reductions over training samples sort
their contributions first, so the trained weights are bit-identical under
any permutation of the dataset — which is what justifies estimating the
information of a single sample index only.  The 0-1 classification loss is
bounded, hence 1/2-sub-Gaussian, so the estimated bound is
sqrt(I_hat(W;Z_1) / 2) with I_hat from the kNN estimator, clamped at 0.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError
from .gp_example import gaussian_q
from .mi_estimate import REVISED_KSG, SampleCloud, knn_mi
from .seeding import chunk_sizes, map_chunks, substream

SUB_GAUSSIAN_R = 0.5  # Hoeffding, from the 0-1 loss; never configurable

DEFAULT_STEP = 0.1
DEFAULT_GRAD_TOL = 1e-6
DEFAULT_MAX_ITER = 10_000
_SEPARABLE_NORM = 50.0
_TRAIN_CHUNK = 2048
_RESAMPLE_ROUNDS = 8


@dataclass(frozen=True)
class DataModel:
    """Feature dimension d, the two class means, the shared covariance."""

    d: int
    mu_plus: np.ndarray
    mu_minus: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        mu_p = np.asarray(self.mu_plus, dtype=float)
        mu_m = np.asarray(self.mu_minus, dtype=float)
        s = np.asarray(self.sigma, dtype=float)
        if mu_p.shape != (self.d,) or mu_m.shape != (self.d,):
            raise DomainError("class means must have shape (d,)")
        if s.shape != (self.d, self.d) or not np.allclose(s, s.T):
            raise DomainError("covariance must be symmetric (d, d)")
        try:
            chol = np.linalg.cholesky(s)
        except np.linalg.LinAlgError as exc:
            raise DomainError("covariance must be positive definite") from exc
        object.__setattr__(self, "mu_plus", mu_p)
        object.__setattr__(self, "mu_minus", mu_m)
        object.__setattr__(self, "sigma", s)
        object.__setattr__(self, "_chol", chol)


def paper_model():
    """The experiment's mixture: d=2, means +-(1,1), covariance 4I."""
    return DataModel(d=2, mu_plus=np.array([1.0, 1.0]),
                     mu_minus=np.array([-1.0, -1.0]), sigma=4.0 * np.eye(2))


def generate_dataset(model, n, rng):
    """n labeled pairs: Y uniform on {-1, +1}, X ~ N(mu_Y, Sigma)."""
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    x, y = _generate_batch(model, 1, n, rng)
    return x[0], y[0]


def _generate_batch(model, batch, n, rng):
    y = np.where(rng.random((batch, n)) < 0.5, -1.0, 1.0)
    noise = rng.standard_normal((batch, n, model.d)) @ model._chol.T
    means = np.where(y[:, :, None] > 0, model.mu_plus[None, None, :],
                     model.mu_minus[None, None, :])
    return means + noise, y


def _sigmoid(m):
    out = np.empty_like(m)
    pos = m >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-m[pos]))
    e = np.exp(m[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _sorted_mean(contrib, axis):
    """Permutation-invariant mean: sort contributions before reducing."""
    return np.sort(contrib, axis=axis).mean(axis=axis)


@dataclass(frozen=True)
class TrainedModel:
    """Fitted weights plus training metadata."""

    w: np.ndarray
    iterations: int
    objective: float
    grad_norm: float
    converged: bool
    objective_history: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if not np.all(np.isfinite(self.w)):
            raise DomainError("trained weights must be finite")


def _margins(x, y, w):
    # einsum keeps the contraction in numpy's C loop: bit-identical between
    # the single and batched trainers, unlike BLAS-backed matmul
    return y * np.einsum("nd,d->n", x, w)


def logistic_objective(w, x, y):
    """(1/n) sum log(1 + exp(-y w.x)), reduced permutation-invariantly."""
    m = _margins(np.asarray(x, float), np.asarray(y, float), np.asarray(w, float))
    return float(_sorted_mean(np.logaddexp(0.0, -m), axis=0))


def train_logreg(dataset, step=DEFAULT_STEP, grad_tol=DEFAULT_GRAD_TOL,
                 max_iter=DEFAULT_MAX_ITER, keep_history=False):
    """Full-batch gradient descent from w = 0 at a fixed step size, stopping
    when the gradient norm drops below ``grad_tol`` or at the iteration cap
    (in which case ``converged`` is False — recorded, not fatal)."""
    x, y = dataset
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or x.shape[0] == 0 or x.shape[0] != y.shape[0]:
        raise DomainError("dataset must be a nonempty (n, d), (n,) pair")
    n, d = x.shape
    w = np.zeros(d)
    history = [logistic_objective(w, x, y)] if keep_history else None
    grad = np.empty(d)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        margins = _margins(x, y, w)
        s = _sigmoid(-margins)
        coef = -(s * y)
        for j in range(d):
            grad[j] = _sorted_mean(coef * x[:, j], axis=0)
        gnorm = float(np.linalg.norm(grad))
        if gnorm < grad_tol:
            iterations -= 1
            break
        w = w - step * grad
        if keep_history:
            history.append(logistic_objective(w, x, y))
    margins = _margins(x, y, w)
    s = _sigmoid(-margins)
    final_grad = np.array([_sorted_mean(-(s * y) * x[:, j], axis=0)
                           for j in range(d)])
    gnorm = float(np.linalg.norm(final_grad))
    return TrainedModel(
        w=w, iterations=iterations, objective=logistic_objective(w, x, y),
        grad_norm=gnorm, converged=gnorm < grad_tol,
        objective_history=np.array(history) if keep_history else None)


def _train_batch(x, y, step=DEFAULT_STEP, grad_tol=DEFAULT_GRAD_TOL,
                 max_iter=DEFAULT_MAX_ITER):
    """Train many replicate datasets at once: x (B, n, d), y (B, n).

    Same arithmetic as train_logreg (sorted reductions included), with
    converged replicates frozen in place.  Returns (W, converged,
    iterations).
    """
    b, n, d = x.shape
    w = np.zeros((b, d))
    active = np.arange(b)
    iterations = np.zeros(b, dtype=np.int64)
    xa, ya = x, y
    for it in range(max_iter):
        margins = ya * np.einsum("bnd,bd->bn", xa, w[active])
        s = _sigmoid(-margins)
        coef = -(s * ya)
        grad = np.stack(
            [_sorted_mean(coef * xa[:, :, j], axis=1) for j in range(d)],
            axis=1)
        gnorm = np.linalg.norm(grad, axis=1)
        done = gnorm < grad_tol
        if done.any():
            still = ~done
            iterations[active[done]] = it
            active = active[still]
            if active.size == 0:
                break
            xa, ya, grad = xa[still], ya[still], grad[still]
        w[active] = w[active] - step * grad
    else:
        iterations[active] = max_iter
    converged = np.ones(b, dtype=bool)
    if active.size:
        converged[active] = False
        iterations[active] = max_iter
    return w, converged, iterations


def classify(w, x):
    """Predicted label: +1 when w.x >= 0 (ties resolve to +1), else -1."""
    x = np.asarray(x, dtype=float)
    score = x @ np.asarray(w, dtype=float)
    return np.where(score >= 0, 1.0, -1.0)


def zero_one_loss(w, z):
    """1 when the predicted label differs from the true one, else 0."""
    x, y = z
    return float(classify(w, np.asarray(x, dtype=float)) != y)


def population_error(model, w):
    """Closed-form 0-1 population risk of the linear rule under the mixture:
    (1/2) Q(w.mu_plus / s) + (1/2) Q(-w.mu_minus / s), s = sqrt(w' Sigma w).

    Serves as the double-entry oracle for the held-out estimate; w = 0
    always predicts +1 and errs with probability 1/2.
    """
    w = np.asarray(w, dtype=float)
    s_sq = float(w @ model.sigma @ w)
    if s_sq <= 0:
        return 0.5
    s = math.sqrt(s_sq)
    return float(0.5 * gaussian_q(float(w @ model.mu_plus) / s)
                 + 0.5 * gaussian_q(-float(w @ model.mu_minus) / s))


def _error_rates(w, x, y):
    """0-1 error rate of each replicate's rule on its own (n-sample) data."""
    scores = np.einsum("bnd,bd->bn", x, w)
    pred = np.where(scores >= 0, 1.0, -1.0)
    return (pred != y).mean(axis=1)


def empirical_gen_error(model, n, trials, test_size, seed, threads=1):
    """Average (held-out error - training error) over independently trained
    replicates: returns (estimate, standard error)."""
    if trials < 100:
        raise DomainError(f"need at least 100 trials, got {trials}")
    if test_size < 10_000:
        raise DomainError(f"need test_size >= 10000, got {test_size}")
    sizes = chunk_sizes(trials, _TRAIN_CHUNK)

    def run_chunk(ci):
        rng = substream(seed, 0, ci)
        x, y = _generate_batch(model, sizes[ci], n, rng)
        w, _, _ = _train_batch(x, y)
        train_err = _error_rates(w, x, y)
        test_rng = substream(seed, 1, ci)
        test_err = np.empty(sizes[ci])
        for j in range(sizes[ci]):
            tx, ty = _generate_batch(model, 1, test_size, test_rng)
            test_err[j] = _error_rates(w[j:j + 1], tx, ty)[0]
        gap = test_err - train_err
        return gap.sum(), (gap * gap).sum()

    parts = map_chunks(run_chunk, len(sizes), threads)
    total = sum(p[0] for p in parts)
    total_sq = sum(p[1] for p in parts)
    mean = total / trials
    var = max(total_sq - trials * mean * mean, 0.0) / (trials - 1)
    return mean, math.sqrt(var / trials)


def collect_hypotheses(model, n, runs, seed, threads=1):
    """Train ``runs`` replicates on fresh datasets.

    Returns (W, X, Y, resampled_count) with W of shape (runs, d) and the
    datasets of shape (runs, n, d) / (runs, n).  Separable or
    non-converging draws (diverging weight norm at the iteration cap) are
    replaced from a fresh substream, with a counter.
    """
    sizes = chunk_sizes(runs, _TRAIN_CHUNK)

    def run_chunk(ci):
        rng = substream(seed, 2, ci)
        x, y = _generate_batch(model, sizes[ci], n, rng)
        w, converged, _ = _train_batch(x, y)
        resampled = 0
        bad = ~converged & (np.linalg.norm(w, axis=1) > _SEPARABLE_NORM)
        for round_ in range(_RESAMPLE_ROUNDS):
            if not bad.any():
                break
            resampled += int(bad.sum())
            redo_rng = substream(seed, 3, ci, round_)
            x_new, y_new = _generate_batch(model, int(bad.sum()), n, redo_rng)
            x[bad], y[bad] = x_new, y_new
            w_new, conv_new, _ = _train_batch(x_new, y_new)
            w[bad] = w_new
            nb = np.zeros_like(bad)
            nb[bad] = ~conv_new & (np.linalg.norm(w_new, axis=1) > _SEPARABLE_NORM)
            bad = nb
        return w, x, y, resampled

    parts = map_chunks(run_chunk, len(sizes), threads)
    w = np.concatenate([p[0] for p in parts])
    x = np.concatenate([p[1] for p in parts])
    y = np.concatenate([p[2] for p in parts])
    resampled = sum(p[3] for p in parts)
    return w, x, y, resampled


def estimate_ismi_bound(model, n, runs, k, seed, threads=1,
                        variant=REVISED_KSG, sample_index=0):
    """Estimated bound sqrt(I_hat(W; Z_1) / 2) from ``runs`` trainings.

    The trainer is order-invariant, so every per-sample term is equal and a
    single index suffices; ``sample_index`` picks which one (an
    exchangeability check uses a second index).  Returns (bound, metadata).
    """
    if runs < 1000:
        raise DomainError(f"need at least 1000 training runs, got {runs}")
    w, x, y, resampled = collect_hypotheses(model, n, runs, seed, threads)
    z = np.hstack([x[:, sample_index, :], y[:, sample_index][:, None]])
    cloud = SampleCloud(w=w, z=z, k=k)
    mi_hat = knn_mi(cloud, variant=variant)
    bound = math.sqrt(max(mi_hat, 0.0) / 2.0)
    metadata = {
        "estimator_variant": variant,
        "k": k,
        "N": runs,
        "mi_hat": mi_hat,
        "resampled_trials": resampled,
        "sub_gaussian_R": SUB_GAUSSIAN_R,
        "sample_index": sample_index,
    }
    return bound, metadata


def independence_control_bound(model, n, runs, k, seed, variant=REVISED_KSG):
    """Control run with W drawn independently of the data: the estimated
    bound should collapse to ~0."""
    rng = substream(seed, 4)
    x, y = _generate_batch(model, runs, n, rng)
    w = rng.standard_normal((runs, model.d))
    cloud = SampleCloud(w=w, z=np.hstack([x[:, 0, :], y[:, 0][:, None]]), k=k)
    mi_hat = knn_mi(cloud, variant=variant)
    return math.sqrt(max(mi_hat, 0.0) / 2.0)


def experiment_row(model, n, runs, k, trials, test_size, seed, threads=1):
    """One CSV row of the logistic-regression experiment at sample count n."""
    gen_emp, gen_emp_se = empirical_gen_error(model, n, trials, test_size,
                                              seed, threads)
    bound, meta = estimate_ismi_bound(model, n, runs, k, seed, threads)
    return {
        "n": n,
        "N": runs,
        "k": k,
        "gen_emp": gen_emp,
        "gen_emp_se": gen_emp_se,
        "mi_hat": meta["mi_hat"],
        "ismi_bound_hat": bound,
        "resampled_trials": meta["resampled_trials"],
        "estimator_variant": meta["estimator_variant"],
    }
