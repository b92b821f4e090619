"""Shot sampling from detection models and CSV shot records."""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ShotBatch",
    "sample",
    "split_blocks",
    "save_csv",
    "load_csv",
]

_HEADERS = {1: "x1,p1", 2: "x1,p1,x2,p2"}


@dataclass(frozen=True)
class ShotBatch:
    """Measured quadrature records: one row per shot, columns x1,p1[,x2,p2].

    ``gains`` holds the effective chain gain per channel, which is what the
    envelope normalization divides out.
    """

    data: np.ndarray
    gains: tuple
    seed: int | None = None

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2 or data.shape[1] not in (2, 4):
            raise ValueError(f"shot array must be (N, 2) or (N, 4), got {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("shot array contains non-finite values")
        gains = tuple(float(g) for g in self.gains)
        if len(gains) != data.shape[1] // 2:
            raise ValueError(
                f"need one gain per channel, got {len(gains)} for "
                f"{data.shape[1] // 2} channels"
            )
        if any(g <= 0 for g in gains):
            raise ValueError("gains must be positive")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "gains", gains)

    @property
    def n_shots(self):
        return self.data.shape[0]

    @property
    def n_channels(self):
        return self.data.shape[1] // 2


def _factor(cov):
    """Square root factor L with L @ L.T == cov, tolerant of tiny negatives."""
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        vals, vecs = np.linalg.eigh(cov)
        floor = -1e-10 * max(1.0, float(vals.max()))
        if float(vals.min()) < floor:
            raise ValueError(
                f"covariance has a negative eigenvalue {vals.min()} beyond "
                "the roundoff floor"
            ) from None
        return vecs * np.sqrt(np.clip(vals, 0.0, None))


def sample(model, n_shots, seed, chunks=1):
    """Draw measurement shots from a detection model.

    Shots are generated in ``chunks`` independent streams seeded as
    (seed, chunk_index), so a fixed seed gives a bit-identical batch and
    chunked generation is reproducible regardless of scheduling.
    """
    if n_shots <= 0:
        raise ValueError(f"n_shots must be positive, got {n_shots}")
    if chunks < 1 or n_shots % chunks:
        raise ValueError(f"chunks must divide n_shots, got {chunks} for {n_shots}")
    mean = model.measured.mean
    factor = _factor(model.measured.cov)
    per = n_shots // chunks
    parts = []
    for idx in range(chunks):
        rng = np.random.default_rng(np.random.SeedSequence([seed, idx]))
        z = rng.standard_normal((per, mean.size))
        parts.append(mean + z @ factor.T)
    return ShotBatch(np.vstack(parts), model.effective_gains, seed=seed)


def split_blocks(batch, n_blocks):
    """Split a batch into equal contiguous blocks."""
    if n_blocks < 1 or batch.n_shots % n_blocks:
        raise ValueError(
            f"n_blocks must divide the shot count, got {n_blocks} for "
            f"{batch.n_shots} shots"
        )
    size = batch.n_shots // n_blocks
    return [
        ShotBatch(batch.data[i * size : (i + 1) * size], batch.gains)
        for i in range(n_blocks)
    ]


def save_csv(batch, path):
    """Write a batch as CSV with header x1,p1[,x2,p2] and full-precision floats."""
    lines = [_HEADERS[batch.n_channels]]
    for row in batch.data:
        lines.append(",".join(repr(float(v)) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def load_csv(path, gains, seed=None):
    """Read a shot CSV written by :func:`save_csv` (or an external record)."""
    with open(path) as fh:
        header = fh.readline().strip()
        if header not in _HEADERS.values():
            raise ValueError(
                f"unrecognized shot CSV header {header!r}; expected one of "
                f"{sorted(_HEADERS.values())}"
            )
        n_cols = len(header.split(","))
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.size == 0:
        raise ValueError("shot CSV contains no rows")
    if data.shape[1] != n_cols:
        raise ValueError(
            f"shot CSV rows have {data.shape[1]} columns, header says {n_cols}"
        )
    return ShotBatch(data, gains, seed=seed)
