"""Built-in test problems with known regularity, plus dataset ingestion.

Synthetic instances declare exact regularity parameters so that every
convergence envelope can be checked against runs. Classification-style
losses (least squares, logistic, LASSO, box-constrained dual SVM) accept
either loaded datasets or the synthetic design generators, which stand
in for the UCI Sonar/Madelon shapes at desk scale.

Losses are written summed over samples (not averaged), matching the
declared smoothness constants L = lambda_max(A^T A) and, for logistic,
L = lambda_max(A^T A)/4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import ProximalOracle, RegularityParams, Vector


class DatasetFormatError(ValueError):
    """A dataset file failed to parse; the message pinpoints the line."""


@dataclass(frozen=True)
class ProblemInstance:
    """A problem oracle bundled with everything its guarantees need.

    ``regularity`` is present exactly for the synthetic instances whose
    constants are known in closed form; ``x_star_distance`` gives the
    distance to the minimizer set when it has a usable form. The
    ``validation_radius`` bounds the region on which the declared
    regularity was verified (and should be sampled).
    """

    name: str
    oracle: ProximalOracle
    x0: Vector
    regularity: Optional[RegularityParams] = None
    f_star: Optional[float] = None
    x_star_distance: Optional[Callable[[Vector], float]] = None
    seed: Optional[int] = None
    validation_radius: float = 1.0
    notes: tuple[str, ...] = ()

    @property
    def dimension(self) -> int:
        return self.oracle.dimension

    def gap0(self) -> Optional[float]:
        if self.f_star is None:
            return None
        return float(self.oracle.value(self.x0)) - self.f_star


def sample_validation_points(
    instance: ProblemInstance, count: int, seed: int = 0
) -> list[Vector]:
    """Points drawn uniformly from the ball where regularity was declared."""
    rng = np.random.default_rng(seed)
    n = instance.dimension
    points = []
    for _ in range(count):
        direction = rng.standard_normal(n)
        norm = np.linalg.norm(direction)
        if norm == 0.0:
            direction[0] = 1.0
            norm = 1.0
        radius = instance.validation_radius * rng.uniform() ** (1.0 / n)
        points.append(direction / norm * radius)
    return points


def _unit_vector(rng: np.random.Generator, n: int) -> Vector:
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)


def make_quadratic(n: int, kappa_target: float, seed: int = 0) -> ProblemInstance:
    """Strongly convex quadratic f(x) = x^T A x / 2 with controlled spectrum.

    The spectrum of A is log-spaced in [1, kappa_target], so the spectral
    condition number equals ``kappa_target``. The declared sharpness
    constant is lambda_min / 2, the largest mu with
    mu ||x||^2 <= f(x) - f* everywhere.
    """
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    if kappa_target < 1:
        raise ValueError(f"kappa_target must be >= 1, got {kappa_target}")
    rng = np.random.default_rng(seed)
    eigenvalues = np.geomspace(1.0, kappa_target, n)
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    A = (q * eigenvalues) @ q.T
    A = 0.5 * (A + A.T)

    def value(x: Vector) -> float:
        return 0.5 * float(x @ (A @ x))

    def grad(x: Vector) -> Vector:
        return A @ x

    x0 = _unit_vector(rng, n)
    reg = RegularityParams(
        s=2.0, L=float(eigenvalues[-1]), r=2.0, mu=float(eigenvalues[0]) / 2.0,
        f_star=0.0,
    )
    return ProblemInstance(
        name=f"quadratic(n={n},kappa={kappa_target:g},seed={seed})",
        oracle=ProximalOracle(dimension=n, value=value, smooth_gradient=grad),
        x0=x0,
        regularity=reg,
        f_star=0.0,
        x_star_distance=lambda x: float(np.linalg.norm(x)),
        seed=seed,
        validation_radius=1.0,
    )


def make_norm_power(n: int, r: float, radius: float = 1.0, seed: int = 0) -> ProblemInstance:
    """f(x) = ||x||^r, sharp with (r, mu = 1) and smooth on the given ball.

    For r > 2 smoothness is local: L = r (r - 1) radius^(r - 2) on the
    ball of the given radius, and tau = 1 - 2/r > 0.
    """
    if r < 2:
        raise ValueError(f"exponent must be >= 2, got {r}")
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    rng = np.random.default_rng(seed)

    def value(x: Vector) -> float:
        return float(np.linalg.norm(x)) ** r

    def grad(x: Vector) -> Vector:
        nrm = float(np.linalg.norm(x))
        if nrm == 0.0:
            return np.zeros_like(x)
        return r * nrm ** (r - 2.0) * x

    x0 = _unit_vector(rng, n) * radius
    reg = RegularityParams(
        s=2.0, L=r * (r - 1.0) * radius ** (r - 2.0), r=r, mu=1.0, f_star=0.0
    )
    return ProblemInstance(
        name=f"norm_power(n={n},r={r:g},radius={radius:g},seed={seed})",
        oracle=ProximalOracle(dimension=n, value=value, smooth_gradient=grad),
        x0=x0,
        regularity=reg,
        f_star=0.0,
        x_star_distance=lambda x: float(np.linalg.norm(x)),
        seed=seed,
        validation_radius=radius,
    )


def make_sharp_norm(n: int, seed: int = 0) -> ProblemInstance:
    """f(x) = ||x||: the prototypical nonsmooth sharp instance.

    Subgradients have norm at most 1 (s = 1, L = 1) and the sharpness
    bound holds with equality (r = 1, mu = 1). The zero subgradient is
    returned at the kink.
    """
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    rng = np.random.default_rng(seed)

    def value(x: Vector) -> float:
        return float(np.linalg.norm(x))

    def grad(x: Vector) -> Vector:
        nrm = float(np.linalg.norm(x))
        if nrm == 0.0:
            return np.zeros_like(x)
        return x / nrm

    x0 = _unit_vector(rng, n)
    reg = RegularityParams(s=1.0, L=1.0, r=1.0, mu=1.0, f_star=0.0)
    return ProblemInstance(
        name=f"sharp_norm(n={n},seed={seed})",
        oracle=ProximalOracle(dimension=n, value=value, smooth_gradient=grad),
        x0=x0,
        regularity=reg,
        f_star=0.0,
        x_star_distance=lambda x: float(np.linalg.norm(x)),
        seed=seed,
        validation_radius=1.0,
    )


_RANK_TOL = 1e-10


def _quadratic_form_oracle(A: np.ndarray, b: np.ndarray):
    """Shared machinery for least-squares-type smooth parts, via A^T A."""
    G = A.T @ A
    h = A.T @ b
    c0 = 0.5 * float(b @ b)

    def smooth(x: Vector) -> float:
        return 0.5 * float(x @ (G @ x)) - float(h @ x) + c0

    def grad(x: Vector) -> Vector:
        return G @ x - h

    return G, h, smooth, grad


def make_least_squares(A: np.ndarray, b: np.ndarray) -> ProblemInstance:
    """f(x) = ||A x - b||^2 / 2 with spectral regularity when A^T A is full rank."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if b.shape != (m,):
        raise ValueError(f"target shape {b.shape} does not match design {A.shape}")
    G, h, smooth, grad = _quadratic_form_oracle(A, b)
    eigenvalues = np.linalg.eigvalsh(G)
    lam_max = float(eigenvalues[-1])
    lam_min = float(eigenvalues[0])
    oracle = ProximalOracle(dimension=n, value=smooth, smooth_gradient=grad)
    if lam_min > _RANK_TOL * max(lam_max, 1.0):
        x_star = np.linalg.solve(G, h)
        f_star = smooth(x_star)
        reg = RegularityParams(s=2.0, L=lam_max, r=2.0, mu=lam_min / 2.0, f_star=f_star)
        dist = lambda x: float(np.linalg.norm(x - x_star))
    else:
        x_star, *_ = np.linalg.lstsq(A, b, rcond=None)
        f_star = smooth(x_star)
        reg = None
        dist = None
    return ProblemInstance(
        name=f"least_squares(m={m},n={n})",
        oracle=oracle,
        x0=np.zeros(n),
        regularity=reg,
        f_star=f_star,
        x_star_distance=dist,
        validation_radius=max(1.0, 2.0 * float(np.linalg.norm(x_star))),
    )


def _sigmoid(t: np.ndarray) -> np.ndarray:
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _map_labels(y: np.ndarray) -> np.ndarray:
    """Map a two-valued label vector onto {-1, +1} (low -> -1, high -> +1)."""
    values = np.unique(y)
    if set(values.tolist()) <= {-1.0, 1.0}:
        return y.astype(float)
    if values.size != 2:
        raise ValueError(
            f"classification labels must take exactly two values, got {values}"
        )
    return np.where(y == values[0], -1.0, 1.0)


def _is_separable(A: np.ndarray, y: np.ndarray, max_passes: int = 2000) -> bool:
    """Certain detection of linear separability via the perceptron.

    Returns True only when a separating direction was actually found;
    False means "not detected", which is inconclusive for hard margins.
    """
    Ay = A * y[:, None]
    w = np.zeros(A.shape[1] + 1)
    X = np.hstack([Ay, y[:, None]])  # homogeneous coordinate for the bias
    for _ in range(max_passes):
        margins = X @ w
        bad = margins <= 0
        if not bad.any():
            return True
        w = w + X[bad].sum(axis=0)
    return False


def make_logistic(A: np.ndarray, y: np.ndarray) -> ProblemInstance:
    """Summed logistic loss over +-1 labels; L = lambda_max(A^T A)/4.

    The optimum is not known in closed form; tests obtain it from a long
    reference run. Perfectly separable data admits no finite minimizer;
    when the (cheap, certain-only) separability probe detects this, the
    instance carries a note.
    """
    A = np.asarray(A, dtype=float)
    y = _map_labels(np.asarray(y, dtype=float))
    m, n = A.shape

    def value(x: Vector) -> float:
        margins = y * (A @ x)
        return float(np.logaddexp(0.0, -margins).sum())

    def grad(x: Vector) -> Vector:
        margins = y * (A @ x)
        return -(A.T @ (y * _sigmoid(-margins)))

    lam_max = float(np.linalg.eigvalsh(A.T @ A)[-1])
    notes = ()
    if lam_max > 0 and _is_separable(A, y):
        notes = ("separable data: the infimum is approached but not attained",)
    return ProblemInstance(
        name=f"logistic(m={m},n={n})",
        oracle=ProximalOracle(dimension=n, value=value, smooth_gradient=grad),
        x0=np.zeros(n),
        regularity=None,
        f_star=None,
        notes=notes,
    )


def soft_threshold(v: Vector, threshold: float) -> Vector:
    """Proximal operator of threshold * ||.||_1."""
    return np.sign(v) * np.maximum(np.abs(v) - threshold, 0.0)


def make_lasso(A: np.ndarray, b: np.ndarray, lam: float = 1.0) -> ProblemInstance:
    """Composite LASSO: ||A x - b||^2 / 2 + lam ||x||_1 with soft-threshold prox."""
    if lam <= 0:
        raise ValueError(f"lam must be positive, got {lam}")
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    _, _, smooth, grad = _quadratic_form_oracle(A, b)

    def value(x: Vector) -> float:
        return smooth(x) + lam * float(np.abs(x).sum())

    def nonsmooth(x: Vector) -> float:
        return lam * float(np.abs(x).sum())

    def prox(v: Vector, t: float) -> Vector:
        return soft_threshold(v, lam * t)

    return ProblemInstance(
        name=f"lasso(m={m},n={n},lam={lam:g})",
        oracle=ProximalOracle(
            dimension=n, value=value, smooth_gradient=grad,
            prox=prox, nonsmooth_value=nonsmooth,
        ),
        x0=np.zeros(n),
    )


def make_dual_svm(A: np.ndarray, y: np.ndarray, regularization: float = 1.0) -> ProblemInstance:
    """Dual of the squared-norm-regularized hinge loss: a box-constrained QP.

    minimize alpha^T K alpha / 2 - sum(alpha) over the box [0, 1]^m with
    K_ij = y_i y_j <a_i, a_j> / regularization; the prox is the clamp
    onto the box.
    """
    if regularization <= 0:
        raise ValueError(f"regularization must be positive, got {regularization}")
    A = np.asarray(A, dtype=float)
    y = _map_labels(np.asarray(y, dtype=float))
    m, n = A.shape
    K = np.outer(y, y) * (A @ A.T) / regularization
    K = 0.5 * (K + K.T)

    def smooth(alpha: Vector) -> float:
        return 0.5 * float(alpha @ (K @ alpha)) - float(alpha.sum())

    def grad(alpha: Vector) -> Vector:
        return K @ alpha - 1.0

    def prox(v: Vector, t: float) -> Vector:
        return np.clip(v, 0.0, 1.0)

    def nonsmooth(alpha: Vector) -> float:
        inside = np.all(alpha >= -1e-9) and np.all(alpha <= 1.0 + 1e-9)
        return 0.0 if inside else math.inf

    def value(alpha: Vector) -> float:
        return smooth(alpha) + nonsmooth(alpha)

    return ProblemInstance(
        name=f"dual_svm(m={m},n={n},reg={regularization:g})",
        oracle=ProximalOracle(
            dimension=m, value=value, smooth_gradient=grad,
            prox=prox, nonsmooth_value=nonsmooth,
        ),
        x0=np.zeros(m),
    )


def synthetic_regression(
    m: int, n: int, cond: float = 100.0, seed: int = 0, noise: float = 0.1
) -> tuple[np.ndarray, np.ndarray]:
    """Design matrix with controlled conditioning plus noisy linear targets.

    The singular values of A are log-spaced so that the condition number
    of A^T A equals ``cond``. Stands in for the benchmark datasets at
    matched shapes.
    """
    rng = np.random.default_rng(seed)
    u, _ = np.linalg.qr(rng.standard_normal((m, n)))
    v, _ = np.linalg.qr(rng.standard_normal((n, n)))
    singulars = np.geomspace(1.0, math.sqrt(cond), n)
    A = (u * singulars) @ v.T
    x_true = rng.standard_normal(n) / math.sqrt(n)
    b = A @ x_true + noise * rng.standard_normal(m)
    return A, b


def synthetic_classification(
    m: int, n: int, cond: float = 100.0, seed: int = 0, flip: float = 0.1
) -> tuple[np.ndarray, np.ndarray]:
    """Controlled-conditioning design with planted, partially flipped labels."""
    rng = np.random.default_rng(seed)
    A, _ = synthetic_regression(m, n, cond=cond, seed=seed, noise=0.0)
    w = rng.standard_normal(n)
    y = np.where(A @ w >= 0.0, 1.0, -1.0)
    flips = rng.uniform(size=m) < flip
    y[flips] = -y[flips]
    return A, y


def load_dataset(
    path: str, fmt: str = "csv", dimension: Optional[int] = None
) -> tuple[np.ndarray, np.ndarray]:
    """Read a dense design matrix and target vector from disk.

    ``csv``: comma-separated numeric rows, last column is the target, no
    header. ``libsvm``: "label idx:val ..." lines with 1-based, strictly
    increasing indices; the dimension is the largest index seen unless
    given. Two-valued targets are mapped onto {-1, +1} (low -> -1);
    targets already in {-1, +1}, or with more than two values, pass
    through unchanged.
    """
    if fmt == "csv":
        X, y = _load_csv(path)
    elif fmt == "libsvm":
        X, y = _load_libsvm(path, dimension)
    else:
        raise ValueError(f"unknown dataset format {fmt!r}")
    values = np.unique(y)
    if values.size == 2 and not set(values.tolist()) <= {-1.0, 1.0}:
        y = np.where(y == values[0], -1.0, 1.0)
    return X, y


def _load_csv(path: str) -> tuple[np.ndarray, np.ndarray]:
    rows: list[list[float]] = []
    width = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            try:
                row = [float(p) for p in parts]
            except ValueError as exc:
                raise DatasetFormatError(f"{path}:{lineno}: {exc}") from None
            if len(row) < 2:
                raise DatasetFormatError(
                    f"{path}:{lineno}: need at least one feature and a target"
                )
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise DatasetFormatError(
                    f"{path}:{lineno}: expected {width} columns, got {len(row)}"
                )
            rows.append(row)
    if not rows:
        raise DatasetFormatError(f"{path}: empty dataset")
    data = np.asarray(rows, dtype=float)
    return data[:, :-1], data[:, -1]


def _load_libsvm(path: str, dimension: Optional[int]) -> tuple[np.ndarray, np.ndarray]:
    labels: list[float] = []
    rows: list[dict[int, float]] = []
    max_index = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            try:
                label = float(parts[0])
            except ValueError as exc:
                raise DatasetFormatError(f"{path}:{lineno}: bad label: {exc}") from None
            entries: dict[int, float] = {}
            previous = 0
            for token in parts[1:]:
                if ":" not in token:
                    raise DatasetFormatError(
                        f"{path}:{lineno}: expected idx:val, got {token!r}"
                    )
                idx_text, val_text = token.split(":", 1)
                try:
                    idx = int(idx_text)
                    val = float(val_text)
                except ValueError as exc:
                    raise DatasetFormatError(f"{path}:{lineno}: {exc}") from None
                if idx < 1:
                    raise DatasetFormatError(
                        f"{path}:{lineno}: indices are 1-based, got {idx}"
                    )
                if idx <= previous:
                    raise DatasetFormatError(
                        f"{path}:{lineno}: indices must be strictly increasing"
                    )
                previous = idx
                entries[idx] = val
                max_index = max(max_index, idx)
            labels.append(label)
            rows.append(entries)
    if not rows:
        raise DatasetFormatError(f"{path}: empty dataset")
    d = dimension if dimension is not None else max_index
    if max_index > d:
        raise DatasetFormatError(
            f"{path}: feature index {max_index} exceeds dimension {d}"
        )
    X = np.zeros((len(rows), d))
    for i, entries in enumerate(rows):
        for idx, val in entries.items():
            X[i, idx - 1] = val
    return X, np.asarray(labels, dtype=float)


def reference_solve(
    oracle: ProximalOracle,
    x0: Vector,
    L0: float = 1.0,
    max_iters: int = 10**6,
    grad_map_tol: float = 1e-12,
) -> tuple[Vector, float, int]:
    """High-accuracy proximal-gradient run used to pin reference optima.

    Plain backtracking proximal gradient, stopped when the gradient
    mapping norm L_hat ||x - prox_step(x)|| drops below ``grad_map_tol``
    or after ``max_iters`` accepted steps. Returns (point, objective,
    iterations used).
    """
    x = np.array(x0, dtype=float)
    L_hat = float(L0)
    f0_x = oracle.smooth_value(x)
    for it in range(1, max_iters + 1):
        g = np.asarray(oracle.smooth_gradient(x), dtype=float)
        while True:
            if oracle.prox is not None:
                cand = np.asarray(oracle.prox(x - g / L_hat, 1.0 / L_hat), dtype=float)
            else:
                cand = x - g / L_hat
            d = cand - x
            f0_cand = oracle.smooth_value(cand)
            if f0_cand <= f0_x + float(np.dot(g, d)) + 0.5 * L_hat * float(np.dot(d, d)):
                break
            L_hat *= 2.0
            if L_hat > 1e300:
                break
        grad_map = L_hat * float(np.linalg.norm(cand - x))
        x = cand
        f0_x = f0_cand
        L_hat = max(L_hat / 2.0, 1e-280)
        if grad_map <= grad_map_tol:
            return x, f0_x + oracle.psi(x), it
    return x, f0_x + oracle.psi(x), max_iters
