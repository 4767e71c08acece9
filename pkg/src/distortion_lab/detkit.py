"""Determinants: a small LU kernel, closed-form Gamma determinants, Vandermonde products."""

import math
import sys

import numpy as np

from . import specfun
from .errors import PoleError

MAX_DIM = 64


def _as_square(m):
    a = np.array(m, dtype=complex if np.iscomplexobj(m) else float, copy=True)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected square matrix (or stack of them), got shape {a.shape}")
    n = a.shape[-1]
    if n < 1:
        raise ValueError("matrix dimension must be at least 1")
    if n > MAX_DIM:
        raise ValueError(f"matrix dimension {n} exceeds the limit of {MAX_DIM}")
    return a


def _lu_inplace(a):
    """Gaussian elimination with partial pivoting over a stack of matrices.

    Returns (sign, diag) where sign is +-1 per matrix from the row swaps and
    diag holds the pivots.  `a` is overwritten.
    """
    n = a.shape[-1]
    batch = a.shape[:-2]
    sign = np.ones(batch)
    idx = np.indices(batch) if batch else ()
    for k in range(n - 1):
        col = np.abs(a[..., k:, k])
        p = np.argmax(col, axis=-1) + k
        swap = p != k
        if np.any(swap):
            rows_k = a[..., k, :].copy()
            rows_p = a[(*idx, p)] if batch else a[p]
            a[..., k, :] = rows_p
            if batch:
                a[(*idx, p)] = rows_k
            else:
                a[p] = rows_k
            sign = np.where(swap, -sign, sign)
        piv = a[..., k, k]
        safe = np.where(piv == 0, 1, piv)
        f = a[..., k + 1:, k] / safe[..., None]
        f = np.where((piv == 0)[..., None], 0, f)
        a[..., k + 1:, k:] -= f[..., :, None] * a[..., k, None, k:]
    return sign, np.diagonal(a, axis1=-2, axis2=-1)


def det(m):
    """Determinant by LU with partial pivoting.

    Works on a single matrix or on a stack with shape (..., n, n).  Real
    input gives real output.
    """
    a = _as_square(m)
    sign, diag = _lu_inplace(a)
    out = sign * np.prod(diag, axis=-1)
    return out if out.ndim else out[()]


def slogdet(m):
    """(sign, log|det|) without overflow.  Sign is a unit complex for complex input."""
    a = _as_square(m)
    sign, diag = _lu_inplace(a)
    mag = np.abs(diag)
    with np.errstate(divide="ignore"):
        logabs = np.sum(np.log(mag), axis=-1)
    phase = np.prod(np.where(mag == 0, 0, diag / np.where(mag == 0, 1, mag)), axis=-1)
    s = sign * phase
    if not np.iscomplexobj(a):
        s = s.real
    return (s if s.ndim else s[()]), (logabs if logabs.ndim else logabs[()])


class SignedLog:
    """A real number kept as sign * exp(log_abs), for long Gamma products.

    A plain float product rides alongside; while it stays finite and normal
    it is what value() returns, so products of exact Gammas stay exact.
    """

    __slots__ = ("sign", "log_abs", "direct")

    def __init__(self, sign=1.0, log_abs=0.0):
        self.sign = sign
        self.log_abs = log_abs
        self.direct = sign * math.exp(log_abs) if log_abs == 0.0 else None

    @classmethod
    def of(cls, x):
        if x == 0:
            return cls(0.0, -math.inf)
        out = cls(math.copysign(1.0, x), math.log(abs(x)))
        out.direct = float(x)
        return out

    def _scale_direct(self, factor, power):
        if self.direct is None:
            return
        try:
            d = self.direct * factor ** power if power >= 0 else self.direct / factor ** -power
        except (OverflowError, ZeroDivisionError):
            d = math.inf
        self.direct = d if math.isfinite(d) and abs(d) >= sys.float_info.min else None

    def mul_gamma(self, x, power=1):
        """Multiply by Gamma(x)**power (negative powers divide)."""
        lg = specfun.ln_gamma(x)
        s = specfun.gamma_sign(x)
        self.log_abs += power * lg
        if s < 0 and power % 2:
            self.sign = -self.sign
        if self.direct is not None:
            g = specfun.gamma(x) if lg < 700 else math.inf
            self._scale_direct(g, power) if math.isfinite(g) else setattr(self, "direct", None)
        return self

    def mul(self, x, power=1):
        if x == 0:
            if power < 0:
                raise ZeroDivisionError("division by zero in signed-log product")
            self.sign = 0.0
            self.log_abs = -math.inf
            self.direct = 0.0
            return self
        self.log_abs += power * math.log(abs(x))
        if x < 0 and power % 2:
            self.sign = -self.sign
        self._scale_direct(x, power)
        return self

    def mul_signed_log(self, other):
        self.sign *= other.sign
        self.log_abs += other.log_abs
        if self.direct is not None and other.direct is not None:
            self._scale_direct(other.direct, 1)
        else:
            self.direct = None
        return self

    def value(self):
        if self.sign == 0:
            return 0.0
        if self.direct is not None:
            return self.direct
        return self.sign * math.exp(self.log_abs)


def _require_int(m, lo, name="m"):
    if int(m) != m or m < lo:
        raise ValueError(f"{name} must be an integer >= {lo}, got {m!r}")
    return int(m)


def hankel_gamma_det(a, m):
    """det[Gamma(a+i+j-1)]_{i,j=1..m} = prod_k Gamma(k) Gamma(a+k)."""
    m = _require_int(m, 1)
    for s in range(1, 2 * m):
        if specfun._is_pole(a + s):
            raise PoleError(f"entry Gamma({a + s}) is a pole")
    acc = SignedLog()
    for k in range(1, m + 1):
        acc.mul_gamma(k).mul_gamma(a + k)
    return acc.value()


def hankel_gamma_pair_det(a, b, m):
    """det[Gamma(a+i+j-1) Gamma(b-i-j+1)]_{i,j=1..m} in closed form."""
    m = _require_int(m, 2)
    for s in range(1, 2 * m):
        if specfun._is_pole(a + s) or specfun._is_pole(b - s):
            raise PoleError(f"entry at i+j-1={s} hits a Gamma pole")
    acc = SignedLog()
    acc.mul_gamma(a + 1).mul_gamma(b - 1).mul_gamma(a + b, m - 1)
    for k in range(2, m + 1):
        acc.mul_gamma(k).mul_gamma(a + k)
        acc.mul_gamma(b - 2 * k + 2).mul_gamma(b - 2 * k + 1)
        acc.mul_gamma(a + b - k + 1, -1).mul_gamma(b - k + 1, -1)
    return acc.value()


def toeplitz_gamma_det(a, m):
    """det[Gamma(a+i-j)]_{i,j=1..m} = (-1)^(m(m-1)/2) prod_k Gamma(k) Gamma(a+k-m)."""
    m = _require_int(m, 1)
    for s in range(1 - m, m):
        if specfun._is_pole(a + s):
            raise PoleError(f"entry Gamma({a + s}) is a pole")
    acc = SignedLog(sign=(-1.0) ** (m * (m - 1) // 2))
    for k in range(1, m + 1):
        acc.mul_gamma(k).mul_gamma(a + k - m)
    return acc.value()


def vandermonde_det(x):
    """prod_{m<n} (x_n - x_m)."""
    x = [float(v) for v in x]
    if not x:
        raise ValueError("need at least one node")
    acc = SignedLog()
    for n in range(len(x)):
        for m in range(n):
            acc.mul(x[n] - x[m])
    return acc.value()


def jacobi_eigh(a, tol=1e-15, max_sweeps=100):
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues ascending, eigenvectors as columns).
    """
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    if a.shape != (n, n) or not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(1.0, np.abs(a).max())):
        raise ValueError("jacobi_eigh needs a real symmetric matrix")
    v = np.eye(n)
    scale = np.sum(a * a)
    for _ in range(max_sweeps):
        off = 2.0 * np.sum(np.triu(a, 1) ** 2)
        if off <= tol * tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                g = 100.0 * abs(apq)
                if abs(a[p, p]) + g == abs(a[p, p]) and abs(a[q, q]) + g == abs(a[q, q]):
                    # below rounding of both diagonal entries
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.hypot(t, 1.0)
                s = t * c
                rot_p = c * a[:, p] - s * a[:, q]
                rot_q = s * a[:, p] + c * a[:, q]
                a[:, p], a[:, q] = rot_p, rot_q
                rot_p = c * a[p, :] - s * a[q, :]
                rot_q = s * a[p, :] + c * a[q, :]
                a[p, :], a[q, :] = rot_p, rot_q
                vp = c * v[:, p] - s * v[:, q]
                vq = s * v[:, p] + c * v[:, q]
                v[:, p], v[:, q] = vp, vq
    else:
        raise ArithmeticError("Jacobi iteration did not converge")
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def as_eigenvalues(values):
    """Validate an eigenvalue list: positive and strictly ascending."""
    vals = tuple(float(v) for v in values)
    if not vals:
        raise ValueError("eigenvalue list is empty")
    if any(not v > 0 for v in vals):
        raise ValueError(f"eigenvalues must be positive, got {vals}")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ValueError(f"eigenvalues must be strictly ascending, got {vals}")
    return vals
