"""Configuration and result records shared by the analytic, simulation and CLI layers."""

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .detkit import as_eigenvalues, jacobi_eigh

BETA_SNAP_TOL = 1e-9


@dataclass(frozen=True)
class SystemConfig:
    """Antenna counts, bandwidth ratio eta = Ws/Wc and source power."""
    n_t: int
    n_r: int
    eta: float
    p_s: float = 1.0

    def __post_init__(self):
        for name in ("n_t", "n_r"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise ValueError(f"eta must be positive and finite, got {self.eta!r}")
        if not (self.p_s > 0 and math.isfinite(self.p_s)):
            raise ValueError(f"p_s must be positive and finite, got {self.p_s!r}")

    @property
    def n_min(self):
        return min(self.n_t, self.n_r)

    @property
    def n_max(self):
        return max(self.n_t, self.n_r)

    @property
    def delta_n(self):
        return abs(self.n_t - self.n_r)

    @property
    def beta(self):
        """2/eta, snapped to the nearest integer when within 1e-9 of it."""
        b = 2.0 / self.eta
        r = round(b)
        return float(r) if abs(b - r) < BETA_SNAP_TOL else b


def exponential_correlation(n, r):
    """Sigma = [r^|i-j|] and its ascending eigenvalues."""
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    if not 0 < r < 1:
        raise ValueError(f"r must lie in (0, 1), got {r!r}")
    i = np.arange(int(n))
    sigma = float(r) ** np.abs(i[:, None] - i[None, :])
    w, _ = jacobi_eigh(sigma)
    return sigma, tuple(float(v) for v in w)


@dataclass(frozen=True)
class CorrelationSpec:
    """Spatial correlation on the side with fewer antennas.

    kind is "none", "eigenvalues" or "exponential".  Use the constructors.
    """
    kind: str = "none"
    eigenvalues: Optional[Tuple[float, ...]] = None
    r: Optional[float] = None

    @classmethod
    def uncorrelated(cls):
        return cls("none")

    @classmethod
    def from_eigenvalues(cls, values):
        return cls("eigenvalues", eigenvalues=as_eigenvalues(values))

    @classmethod
    def exponential(cls, r):
        if not 0 < r < 1:
            raise ValueError(f"r must lie in (0, 1), got {r!r}")
        return cls("exponential", r=float(r))

    @classmethod
    def parse(cls, text):
        """Parse 'none', 'exp:<r>' or 'eig:<v1,v2,...>'."""
        text = text.strip()
        if text == "none":
            return cls.uncorrelated()
        head, _, body = text.partition(":")
        if head == "exp" and body:
            return cls.exponential(float(body))
        if head == "eig" and body:
            return cls.from_eigenvalues(float(v) for v in body.split(","))
        raise ValueError(f"unrecognised correlation spec {text!r}")

    def __str__(self):
        if self.kind == "exponential":
            return f"exp:{self.r!r}"
        if self.kind == "eigenvalues":
            return "eig:" + ",".join(repr(v) for v in self.eigenvalues)
        return "none"

    @property
    def is_correlated(self):
        return self.kind != "none"

    def matrix(self, n):
        """The n x n correlation matrix."""
        if self.kind == "exponential":
            return exponential_correlation(n, self.r)[0]
        if self.kind == "eigenvalues":
            self._check_len(n)
            return np.diag(self.eigenvalues)
        return np.eye(n)

    def sigma(self, n):
        """Ascending eigenvalues of the n x n correlation matrix."""
        if self.kind == "exponential":
            return exponential_correlation(n, self.r)[1]
        if self.kind == "eigenvalues":
            self._check_len(n)
            return self.eigenvalues
        return (1.0,) * n

    def _check_len(self, n):
        if len(self.eigenvalues) != n:
            raise ValueError(f"expected {n} eigenvalues, got {len(self.eigenvalues)}")


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


CSV_COLUMNS = ("snr_db", "ed_exact", "ed_asymptotic", "ed_mc", "mc_std_error")


@dataclass
class DistortionCurve:
    """Distortion values on an SNR grid in dB.  Absent columns stay None."""
    snr_db: np.ndarray
    ed_exact: Optional[np.ndarray] = None
    ed_asymptotic: Optional[np.ndarray] = None
    ed_mc: Optional[np.ndarray] = None
    mc_std_error: Optional[np.ndarray] = None
    label: str = field(default="", compare=False)

    def __post_init__(self):
        self.snr_db = np.asarray(self.snr_db, dtype=float)
        if np.any(np.diff(self.snr_db) <= 0):
            raise ValueError("snr_db must be strictly ascending")
        for name in CSV_COLUMNS[1:]:
            col = getattr(self, name)
            if col is not None:
                col = np.asarray(col, dtype=float)
                if col.shape != self.snr_db.shape:
                    raise ValueError(f"column {name} has shape {col.shape}, grid has {self.snr_db.shape}")
                setattr(self, name, col)

    @property
    def columns(self):
        return [c for c in CSV_COLUMNS if getattr(self, c) is not None]

    def to_csv(self):
        buf = io.StringIO()
        cols = self.columns
        buf.write(",".join(cols) + "\n")
        data = [getattr(self, c) for c in cols]
        for row in zip(*data):
            buf.write(",".join("%.17g" % v for v in row) + "\n")
        return buf.getvalue()

    def write_csv(self, path):
        with open(path, "w", newline="\n", encoding="ascii") as fh:
            fh.write(self.to_csv())

    @classmethod
    def from_csv(cls, text):
        rows = list(csv.reader(io.StringIO(text)))
        header = rows[0]
        unknown = set(header) - set(CSV_COLUMNS)
        if unknown or "snr_db" not in header:
            raise ValueError(f"bad header {header}")
        cols = {h: np.array([float(r[i]) for r in rows[1:]]) for i, h in enumerate(header)}
        return cls(**cols)

    @classmethod
    def read_csv(cls, path):
        with open(path, encoding="ascii") as fh:
            return cls.from_csv(fh.read())


def snr_grid_db(start, stop, step):
    """Inclusive dB grid start, start+step, ..., up to stop (with float slack)."""
    if not step > 0:
        raise ValueError("step must be positive")
    if stop < start:
        raise ValueError("stop must not be below start")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return np.array([start + k * step for k in range(n)], dtype=float)


def as_grid(values: Sequence[float]):
    g = np.asarray(values, dtype=float)
    if g.ndim != 1 or g.size == 0:
        raise ValueError("grid must be a non-empty 1-D sequence")
    return g
