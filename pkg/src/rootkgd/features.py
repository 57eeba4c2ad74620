"""PCA monitoring model and reconstruction-based fault contributions.

A model is fit once on normal-operation data (z-scored by its own training
mean/std), after which all evaluation functions are pure: squared prediction
error and Hotelling statistics per sample, per-variable reconstruction
contributions, and windowed contribution rates over a fault episode.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

logger = logging.getLogger(__name__)

#: Residual diagonal entries at or below this are treated as "no residual
#: information": the variable's contribution is defined as 0.
RESIDUAL_DIAG_FLOOR = 1e-12

NORMALIZATION_ORDERS = ("per_sample", "post_average")
STATISTICS = ("spe", "t2")


@dataclass(frozen=True)
class DataMatrix:
    """Samples-by-variables matrix with named, uniquely-labeled columns."""

    values: np.ndarray
    columns: tuple[str, ...]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "columns", tuple(self.columns))
        if values.ndim != 2:
            raise ValueError(f"expected a 2-D matrix, got shape {values.shape}")
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError(f"matrix must be non-empty, got shape {values.shape}")
        if values.shape[1] != len(self.columns):
            raise ValueError(
                f"{values.shape[1]} data columns but {len(self.columns)} column names"
            )
        if len(set(self.columns)) != len(self.columns):
            raise ValueError("column names must be unique")
        if not np.isfinite(values).all():
            raise ValueError("matrix contains non-finite entries")

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_variables(self) -> int:
        return self.values.shape[1]

    def select(self, columns: Sequence[str]) -> "DataMatrix":
        """Column subset in the requested order."""
        index = {c: i for i, c in enumerate(self.columns)}
        missing = [c for c in columns if c not in index]
        if missing:
            raise ValueError(f"columns not present in data: {missing}")
        idx = [index[c] for c in columns]
        return DataMatrix(self.values[:, idx], tuple(columns))


@dataclass(frozen=True)
class PcaModel:
    """Fitted PCA decomposition with cached projection matrices.

    ``proj_pc`` and ``proj_res`` project onto the principal and residual
    subspaces and always sum to the identity; ``d_matrix`` is the
    inverse-eigenvalue-weighted principal projector used by the Hotelling
    statistic.
    """

    columns: tuple[str, ...]
    mean: np.ndarray
    std: np.ndarray
    loadings_principal: np.ndarray
    loadings_residual: np.ndarray
    eig_principal: np.ndarray
    eig_residual: np.ndarray
    n_pc: int
    r_pc: float
    proj_pc: np.ndarray
    proj_res: np.ndarray
    d_matrix: np.ndarray

    @property
    def n_variables(self) -> int:
        return len(self.columns)

    def standardize(self, sample: np.ndarray) -> np.ndarray:
        sample = np.asarray(sample, dtype=float)
        if sample.shape != (self.n_variables,):
            raise ValueError(
                f"sample has shape {sample.shape}, model expects ({self.n_variables},)"
            )
        if not np.isfinite(sample).all():
            raise ValueError("sample contains non-finite entries")
        return (sample - self.mean) / self.std

    def standardize_matrix(self, data: DataMatrix) -> np.ndarray:
        if data.columns != self.columns:
            raise ValueError("data columns do not match the model's training columns")
        return (data.values - self.mean) / self.std


@dataclass(frozen=True)
class ContributionVector:
    """Nonnegative per-variable fault contributions aligned to a roster."""

    scores: np.ndarray
    roster: tuple[str, ...]

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=float)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "roster", tuple(self.roster))
        if scores.shape != (len(self.roster),):
            raise ValueError("scores and roster lengths differ")
        if not np.isfinite(scores).all():
            raise ValueError("contribution scores contain non-finite entries")
        if (scores < 0).any():
            raise ValueError("contribution scores must be nonnegative")

    def get(self, name: str) -> float:
        try:
            return float(self.scores[self.roster.index(name)])
        except ValueError:
            raise KeyError(name) from None

    def normalized(self) -> "ContributionVector":
        total = self.scores.sum()
        if total <= 0:
            raise ValueError("cannot normalize an all-zero contribution vector")
        return ContributionVector(self.scores / total, self.roster)

    def relabel(self, mapping: dict[str, str]) -> "ContributionVector":
        """Rename roster entries (e.g. CSV column -> entity id); order kept."""
        return ContributionVector(self.scores, tuple(mapping.get(r, r) for r in self.roster))

    def restrict(self, names: Sequence[str]) -> "ContributionVector":
        """Project onto a sub-roster and renormalize to sum 1."""
        index = {r: i for i, r in enumerate(self.roster)}
        missing = [n for n in names if n not in index]
        if missing:
            raise ValueError(f"names not present in roster: {missing}")
        sub = self.scores[[index[n] for n in names]]
        return ContributionVector(sub, tuple(names)).normalized()


def fit_pca(normal_data: DataMatrix, r_pc: float) -> PcaModel:
    """Fit a PCA model on normal data, retaining principal components until
    the cumulative eigenvalue sum reaches ``r_pc`` of the total variance.

    The data is z-scored by its own mean and (sample) standard deviation;
    constant columns are rejected. Loading signs are fixed so the
    largest-magnitude entry of each column is positive, making repeated fits
    byte-identical.
    """
    if not 0 < r_pc <= 1:
        raise ValueError(f"r_pc must be in (0, 1], got {r_pc}")
    X = normal_data.values
    m, n = X.shape
    if m < 2:
        raise ValueError(f"need at least 2 samples to fit, got {m}")
    if n < 2:
        raise ValueError(f"need at least 2 variables to fit, got {n}")

    mean = X.mean(axis=0)
    std = X.std(axis=0, ddof=1)
    constant = np.flatnonzero(std <= 0)
    if constant.size:
        names = [normal_data.columns[i] for i in constant]
        raise ValueError(f"constant columns cannot be standardized: {names}")

    Z = (X - mean) / std
    cov = Z.T @ Z / (m - 1)
    evals, evecs = np.linalg.eigh(cov)
    evals = evals[::-1]
    evecs = evecs[:, ::-1]
    for j in range(n):
        col = evecs[:, j]
        if col[np.argmax(np.abs(col))] < 0:
            evecs[:, j] = -col

    total = evals.sum()
    cumulative = np.cumsum(evals)
    k = int(np.searchsorted(cumulative, r_pc * total, side="left")) + 1
    k = min(k, n)
    if evals[k - 1] <= RESIDUAL_DIAG_FLOOR * max(evals[0], 1.0):
        raise ValueError(
            f"principal eigenvalue {k} is numerically zero; lower r_pc or drop "
            "collinear columns"
        )

    # Contiguous copies so projections recomputed after a save/load round
    # trip are bit-identical to the ones computed here.
    P = np.ascontiguousarray(evecs[:, :k])
    P_res = np.ascontiguousarray(evecs[:, k:])
    proj_pc = P @ P.T
    proj_res = P_res @ P_res.T
    d_matrix = P @ np.diag(1.0 / evals[:k]) @ P.T

    return PcaModel(
        columns=normal_data.columns,
        mean=mean,
        std=std,
        loadings_principal=P,
        loadings_residual=P_res,
        eig_principal=evals[:k].copy(),
        eig_residual=evals[k:].copy(),
        n_pc=k,
        r_pc=float(r_pc),
        proj_pc=proj_pc,
        proj_res=proj_res,
        d_matrix=d_matrix,
    )


def spe(model: PcaModel, sample: np.ndarray) -> float:
    """Squared prediction error of one sample: residual-space energy."""
    z = model.standardize(sample)
    return float(z @ model.proj_res @ z)


def t2(model: PcaModel, sample: np.ndarray) -> float:
    """Hotelling statistic of one sample: eigenvalue-weighted principal energy."""
    z = model.standardize(sample)
    return float(z @ model.d_matrix @ z)


def _rbc(z: np.ndarray, matrix: np.ndarray, columns: tuple[str, ...]) -> np.ndarray:
    diag = np.diag(matrix)
    usable = diag > RESIDUAL_DIAG_FLOOR
    if not usable.all():
        flagged = [columns[i] for i in np.flatnonzero(~usable)]
        logger.warning(
            "variables with near-zero reconstruction denominator scored as 0: %s", flagged
        )
    proj = matrix @ z
    scores = np.zeros_like(z)
    scores[usable] = proj[usable] ** 2 / diag[usable]
    return scores


def rbc_spe(model: PcaModel, sample: np.ndarray) -> ContributionVector:
    """Per-variable reconstruction contribution to the SPE statistic.

    Score of variable i equals the SPE drop achieved by optimally correcting
    the sample along coordinate axis i (raw, not normalized).
    """
    z = model.standardize(sample)
    return ContributionVector(_rbc(z, model.proj_res, model.columns), model.columns)


def rbc_t2(model: PcaModel, sample: np.ndarray) -> ContributionVector:
    """Per-variable reconstruction contribution to the Hotelling statistic."""
    z = model.standardize(sample)
    return ContributionVector(_rbc(z, model.d_matrix, model.columns), model.columns)


def contribution_rate(
    model: PcaModel,
    fault_window: DataMatrix,
    statistic: str = "spe",
    order: str = "per_sample",
) -> ContributionVector:
    """Average contribution over a fault window, normalized to sum 1.

    ``order`` controls whether each sample's raw contributions are normalized
    before averaging ("per_sample", the default, so no single large-error
    sample dominates) or only once after averaging ("post_average"). Rows
    whose contributions are identically zero are skipped.
    """
    if statistic not in STATISTICS:
        raise ValueError(f"statistic must be one of {STATISTICS}, got {statistic!r}")
    if order not in NORMALIZATION_ORDERS:
        raise ValueError(f"order must be one of {NORMALIZATION_ORDERS}, got {order!r}")
    if fault_window.n_samples < 1:
        raise ValueError("fault window is empty")

    Z = model.standardize_matrix(fault_window)
    matrix = model.proj_res if statistic == "spe" else model.d_matrix
    diag = np.diag(matrix)
    usable = diag > RESIDUAL_DIAG_FLOOR
    raw = np.zeros_like(Z)
    proj = Z @ matrix
    raw[:, usable] = proj[:, usable] ** 2 / diag[usable]

    row_sums = raw.sum(axis=1)
    live = row_sums > 0
    if not live.any():
        raise ValueError("every sample in the window has zero contribution")

    if order == "per_sample":
        normalized = raw[live] / row_sums[live, None]
        mean = normalized.mean(axis=0)
    else:
        mean = raw[live].mean(axis=0)
    return ContributionVector(mean / mean.sum(), model.columns)


def save_model(model: PcaModel, path: str | Path) -> None:
    """Persist a model as JSON (row-major loadings with explicit dimensions)."""
    n = model.n_variables
    payload = {
        "columns": list(model.columns),
        "mean": model.mean.tolist(),
        "std": model.std.tolist(),
        "eig_principal": model.eig_principal.tolist(),
        "eig_residual": model.eig_residual.tolist(),
        "loadings_principal": {
            "rows": n,
            "cols": model.n_pc,
            "data": model.loadings_principal.reshape(-1).tolist(),
        },
        "loadings_residual": {
            "rows": n,
            "cols": n - model.n_pc,
            "data": model.loadings_residual.reshape(-1).tolist(),
        },
        "n_pc": model.n_pc,
        "r_pc": model.r_pc,
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> PcaModel:
    """Load a model saved by save_model; projection matrices are recomputed."""
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid model file: {exc}") from exc
    try:
        columns = tuple(payload["columns"])
        n = len(columns)
        lp = payload["loadings_principal"]
        lr = payload["loadings_residual"]
        P = np.asarray(lp["data"], dtype=float).reshape(lp["rows"], lp["cols"])
        P_res = np.asarray(lr["data"], dtype=float).reshape(lr["rows"], lr["cols"])
        model = PcaModel(
            columns=columns,
            mean=np.asarray(payload["mean"], dtype=float),
            std=np.asarray(payload["std"], dtype=float),
            loadings_principal=P,
            loadings_residual=P_res,
            eig_principal=np.asarray(payload["eig_principal"], dtype=float),
            eig_residual=np.asarray(payload["eig_residual"], dtype=float),
            n_pc=int(payload["n_pc"]),
            r_pc=float(payload["r_pc"]),
            proj_pc=P @ P.T,
            proj_res=P_res @ P_res.T,
            d_matrix=P @ np.diag(1.0 / np.asarray(payload["eig_principal"], dtype=float)) @ P.T,
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{path}: malformed model file ({exc})") from exc
    if model.mean.shape != (n,) or model.std.shape != (n,):
        raise ValueError(f"{path}: model dimensions are inconsistent")
    return model
