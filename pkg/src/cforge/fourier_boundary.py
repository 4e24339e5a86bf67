"""Closed boundary curves as trigonometric polynomials.

A boundary is stored as a sparse set of complex coefficients ``c_k`` for
``k`` in ``[-m, n]``, representing ``z(t) = sum_k c_k e^{ikt}`` on
``[0, 2*pi)``.  This module evaluates, differentiates and fits such curves,
provides the continuous argument along the curve, the signed curvature, and
the corner-gap integral used to quantify how fast Fourier partial sums
converge at a corner point.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import FitError, InputError, QuadratureError, WindingError

__all__ = [
    "FourierCurve",
    "CornerGapQuery",
    "eval_curve",
    "derivative_curve",
    "fit_from_samples",
    "unwrap_arg",
    "corner_gap_F",
    "curvature",
    "load_curve",
    "save_curve",
]

# |z| below this at a grid node counts as "curve passes through the origin"
ORIGIN_TOL = 1e-12


@dataclass(frozen=True)
class FourierCurve:
    """Closed curve ``z(t) = sum c_k e^{ikt}``, ``k`` in ``[-m, n]``.

    Coefficients are stored sparsely: ``ks`` holds the integer indices in
    increasing order and ``cs`` the matching complex values.  Zero values
    inside the support are allowed; the stored extremes define ``m`` and
    ``n``, so there is never a silent zero-padding mismatch.
    """

    ks: tuple
    cs: tuple

    def __post_init__(self):
        ks = tuple(int(k) for k in self.ks)
        cs = tuple(complex(c) for c in self.cs)
        if len(ks) != len(cs):
            raise InputError("index/coefficient length mismatch")
        if len(ks) == 0:
            raise InputError("curve needs at least one coefficient")
        if len(set(ks)) != len(ks):
            raise InputError("duplicate coefficient index")
        order = np.argsort(ks)
        ks = tuple(ks[i] for i in order)
        cs = tuple(cs[i] for i in order)
        if not any(k != 0 and c != 0 for k, c in zip(ks, cs)):
            raise InputError("curve is a single point (no oscillating term)")
        object.__setattr__(self, "ks", ks)
        object.__setattr__(self, "cs", cs)

    @property
    def m(self) -> int:
        """Largest negative degree present (0 if none)."""
        return max(0, -min(self.ks))

    @property
    def n(self) -> int:
        """Largest positive degree present (0 if none)."""
        return max(0, max(self.ks))

    @property
    def coeffs(self) -> dict:
        return {k: c for k, c in zip(self.ks, self.cs)}

    def coeff(self, k: int) -> complex:
        """Coefficient ``c_k`` (0 outside the stored support)."""
        try:
            return self.cs[self.ks.index(int(k))]
        except ValueError:
            return 0.0

    def __call__(self, t):
        return eval_curve(self, t)

    @staticmethod
    def from_coeffs(coeffs: dict) -> "FourierCurve":
        items = sorted(coeffs.items())
        return FourierCurve(tuple(k for k, _ in items), tuple(v for _, v in items))


@dataclass(frozen=True)
class CornerGapQuery:
    """Arguments of the corner-gap integral: partial-sum index ``n``,
    integration limit ``eps`` in ``(0, pi]``, corner exponent ``alpha``
    in ``(0, 2)``."""

    n: int
    eps: float
    alpha: float

    def __post_init__(self):
        if self.n < 1:
            raise InputError("n must be a positive integer")
        if not 0.0 < self.eps <= math.pi:
            raise InputError("eps must lie in (0, pi]")
        if not 0.0 < self.alpha < 2.0:
            raise InputError("alpha must lie in (0, 2)")


def eval_curve(curve: FourierCurve, t):
    """Evaluate ``z(t) = sum c_k e^{ikt}``; ``t`` may be a scalar or array."""
    t_arr = np.asarray(t, dtype=float)
    out = np.zeros(t_arr.shape, dtype=complex)
    for k, c in zip(curve.ks, curve.cs):
        out += c * np.exp(1j * k * t_arr)
    if np.isscalar(t) or t_arr.ndim == 0:
        return complex(out)
    return out


def derivative_curve(curve: FourierCurve, order: int = 1) -> FourierCurve:
    """Coefficient-wise derivative: ``c_k -> (ik)^order c_k``, constant dropped."""
    if order < 1:
        raise InputError("order must be >= 1")
    ks, cs = [], []
    for k, c in zip(curve.ks, curve.cs):
        if k == 0:
            continue
        ks.append(k)
        cs.append((1j * k) ** order * c)
    return FourierCurve(tuple(ks), tuple(cs))


def fit_from_samples(points, m: int, n: int) -> FourierCurve:
    """Least-squares trigonometric fit of support ``[-m, n]``.

    ``points`` are samples of the curve at uniformly spaced parameters
    ``t_i = 2*pi*i/len(points)``.  With at least ``m + n + 1`` samples the
    uniform-grid least-squares solution equals the discrete Fourier
    projection; with exactly ``m + n + 1`` samples it interpolates.

    Raises ``FitError`` when the fit is underdetermined.
    """
    pts = np.asarray(points, dtype=complex).ravel()
    count = len(pts)
    if m < 0 or n < 0:
        raise InputError("m and n must be non-negative")
    if count < m + n + 1:
        raise FitError(
            f"need at least {m + n + 1} samples for support [-{m}, {n}], got {count}"
        )
    dft = np.fft.fft(pts) / count
    ks = tuple(range(-m, n + 1))
    cs = tuple(dft[k % count] for k in ks)
    return FourierCurve(ks, cs)


def unwrap_arg(curve: FourierCurve, grid_size: int):
    """Continuous branch of ``arg z(t)`` on the uniform grid of ``grid_size``.

    The branch is chosen per node by the smallest jump (threshold pi between
    neighbours), so an under-resolved grid fails loudly through the final
    winding check instead of slipping a branch silently.  Fails when the
    curve passes within ``ORIGIN_TOL`` of the origin or when the total
    winding about the origin is not exactly one turn.
    """
    if grid_size < 2:
        raise InputError("grid_size must be >= 2")
    t = 2.0 * np.pi * np.arange(grid_size) / grid_size
    z = eval_curve(curve, t)
    scale = max(abs(c) for c in curve.cs)
    if np.min(np.abs(z)) < ORIGIN_TOL * max(1.0, scale):
        raise WindingError("curve passes through (or too close to) the origin")
    a = np.unwrap(np.angle(z))
    closing = np.angle(z[0]) - np.angle(z[-1])
    closing = (closing + np.pi) % (2.0 * np.pi) - np.pi
    winding = (a[-1] - a[0] + closing) / (2.0 * np.pi)
    if abs(winding - round(winding)) > 1e-9:
        raise WindingError(f"winding about origin did not close: {winding}")
    if round(winding) != 1:
        raise WindingError(
            f"winding about origin is {int(round(winding))}, expected 1 "
            "(counterclockwise Jordan curve enclosing the origin)"
        )
    return a


def corner_gap_F(query: CornerGapQuery) -> float:
    """Corner-gap integral measuring the Fourier partial-sum defect at a corner.

    Computes ``2^(alpha+1) * int_0^eps sin(t/2)^alpha *
    cos(alpha*(t-pi)/2) * sin(n*t)/t dt`` by adaptive quadrature with
    relative tolerance 1e-10.  The integrand is extended by its limit value
    0 at ``t = 0``, so the removable singularity never enters the rule.
    """
    n, eps, alpha = query.n, query.eps, query.alpha

    def integrand(t):
        if t == 0.0:
            return 0.0
        return (
            math.sin(0.5 * t) ** alpha
            * math.cos(0.5 * alpha * (t - math.pi))
            * math.sin(n * t)
            / t
        )

    val, err = quad(integrand, 0.0, eps, epsabs=0.0, epsrel=1e-12, limit=800)
    scale = 2.0 ** (alpha + 1.0)
    if err > 1e-10 * max(abs(val), 1e-300):
        raise QuadratureError(
            f"corner-gap quadrature did not converge (error estimate {err:.3e})",
            estimate=scale * val,
        )
    return scale * val


def curvature(curve: FourierCurve, t: float) -> float:
    """Signed curvature ``Im[conj(z') z''] / |z'|^3`` at parameter ``t``."""
    d1 = eval_curve(derivative_curve(curve, 1), t)
    d2 = eval_curve(derivative_curve(curve, 2), t)
    d1 = np.asarray(d1, dtype=complex)
    d2 = np.asarray(d2, dtype=complex)
    speed = np.abs(d1)
    if np.any(speed < 1e-12):
        raise InputError("curvature undefined: |z'(t)| vanishes (cusp)")
    kappa = (np.conj(d1) * d2).imag / speed**3
    if kappa.ndim == 0:
        return float(kappa)
    return kappa


# ---------------------------------------------------------------------------
# persistence: CSV `k,re,im` and JSON {"coeffs": [{"k":..,"re":..,"im":..}]}


def save_curve(curve: FourierCurve, path: str) -> None:
    """Write the curve to ``path`` (.csv or .json decides the format)."""
    if str(path).endswith(".json"):
        payload = {
            "coeffs": [
                {"k": k, "re": c.real, "im": c.imag}
                for k, c in zip(curve.ks, curve.cs)
            ]
        }
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("k,re,im\n")
        for k, c in zip(curve.ks, curve.cs):
            fh.write(f"{k},{format(c.real, '.17g')},{format(c.imag, '.17g')}\n")


def load_curve(path: str) -> FourierCurve:
    """Read a curve written by :func:`save_curve` (format sniffed from content)."""
    text = open(path, "r", encoding="utf-8").read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            payload = json.loads(text)
            rows = [(int(e["k"]), complex(e["re"], e["im"])) for e in payload["coeffs"]]
        except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            raise InputError(f"malformed curve JSON {path}: {exc}") from exc
    else:
        rows = []
        try:
            reader = csv.reader(text.splitlines())
            header = next(reader)
            if [h.strip().lower() for h in header] != ["k", "re", "im"]:
                raise ValueError(f"expected header k,re,im, got {header}")
            for rec in reader:
                if not rec:
                    continue
                rows.append((int(rec[0]), complex(float(rec[1]), float(rec[2]))))
        except (ValueError, IndexError, StopIteration) as exc:
            raise InputError(f"malformed curve CSV {path}: {exc}") from exc
    if not rows:
        raise InputError(f"no coefficients in {path}")
    return FourierCurve(tuple(k for k, _ in rows), tuple(c for _, c in rows))
