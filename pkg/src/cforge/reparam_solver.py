"""Boundary reparametrization solver.

Given a closed Fourier-polynomial boundary enclosing the origin, solve for
the correction ``q(t)`` that turns the curve parameter into the boundary
argument ``theta(t)`` of the conformal map of the unit disk onto the
enclosed domain, then extract the Taylor coefficients of that map by
quadrature of ``z(t(theta)) e^{-ik theta}``.

The correction solves a second-kind integral equation whose kernel is the
parameter derivative of the argument of the chord quotient
``(z(tau)-z(t)) / (e^{i tau}-e^{i t})``.  The quotient is expanded through
the finite geometric-sum factorization of ``e^{ik tau} - e^{ik t}``, so the
diagonal ``tau = t`` is a regular point and no limits are taken.  Truncating
``q`` at ``M`` modes and projecting yields a dense ``2M x 2M`` block system;
the right-hand side combines the conjugate function of ``ln|z|`` (the
separated cotangent part) with the remaining continuous-kernel integral.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.linalg.lapack import dgecon

from .errors import (
    InputError,
    NonMonotoneThetaError,
    SingularSystemError,
    SolverError,
)
from .fourier_boundary import FourierCurve, eval_curve, unwrap_arg

__all__ = [
    "BlockSystem",
    "ReparamSolution",
    "PolynomialMap",
    "kernel_K",
    "kernel_L",
    "conjugate_periodic",
    "assemble_system",
    "solve_reparam",
    "correspondence_inverse",
    "invert_theta",
    "taylor_from_correspondence",
    "taylor_coeffs",
    "save_polynomial_map",
    "load_polynomial_map",
]

# chord quotient magnitudes below this mean a degenerate / self-crossing curve
QUOTIENT_TOL = 1e-13


@dataclass(frozen=True)
class BlockSystem:
    """Dense blocks of the truncated system ``[[AA, AB], [BA, BB]] x = [F; G]``."""

    AA: np.ndarray
    AB: np.ndarray
    BA: np.ndarray
    BB: np.ndarray
    F: np.ndarray
    G: np.ndarray

    @property
    def M(self) -> int:
        return self.AA.shape[0]

    def matrix(self) -> np.ndarray:
        return np.block([[self.AA, self.AB], [self.BA, self.BB]])

    def rhs(self) -> np.ndarray:
        return np.concatenate([self.F, self.G])


@dataclass(frozen=True)
class ReparamSolution:
    """Truncated correction ``q`` and the sampled boundary correspondence.

    ``alpha``/``beta`` hold the cosine/sine coefficients of ``q`` (mean
    zero by construction), ``theta_grid`` the values of
    ``theta(t) = arg z(t) + q(t)`` at ``grid_size`` uniform parameters.
    ``monotone`` records whether ``theta`` is strictly increasing; only
    monotone solutions are accepted downstream.
    """

    M: int
    alpha: np.ndarray
    beta: np.ndarray
    theta_grid: np.ndarray
    grid_size: int
    monotone: bool
    condition: float = float("nan")

    def q(self, t):
        """Evaluate the correction ``q(t)`` from its coefficients."""
        t = np.asarray(t, dtype=float)
        p = np.arange(1, self.M + 1)
        return np.cos(np.multiply.outer(t, p)) @ self.alpha + np.sin(
            np.multiply.outer(t, p)
        ) @ self.beta

    def theta(self, t):
        """Trigonometric interpolant of ``theta`` at arbitrary parameters."""
        return np.asarray(t, dtype=float) + _periodic_interp(
            self.theta_grid - _grid(self.grid_size), t
        )

    def theta_prime(self, t):
        return 1.0 + _periodic_interp(
            self.theta_grid - _grid(self.grid_size), t, derivative=True
        )


@dataclass(frozen=True)
class PolynomialMap:
    """Taylor polynomial ``Z(zeta) = sum_{k<=D} c_k zeta^k`` of the disk map.

    ``neg_residual`` is the l2 mass found in the negative-frequency
    coefficients of the mapped boundary, computed by the same quadrature
    as the Taylor coefficients.  A small residual certifies that the
    boundary values extend analytically into the disk; it is always
    populated.
    """

    coeffs: np.ndarray
    neg_residual: float
    solver_M: int = 0
    solver_P: int = 0

    def __post_init__(self):
        object.__setattr__(
            self, "coeffs", np.asarray(self.coeffs, dtype=complex).copy()
        )
        if len(self.coeffs) < 2:
            raise InputError("polynomial map needs degree >= 1")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, zeta):
        """Horner evaluation at ``zeta`` (scalar or array)."""
        zeta = np.asarray(zeta, dtype=complex)
        out = np.full(zeta.shape, self.coeffs[-1], dtype=complex)
        for c in self.coeffs[-2::-1]:
            out = out * zeta + c
        if out.ndim == 0:
            return complex(out)
        return out

    def derivative_coeffs(self) -> np.ndarray:
        k = np.arange(1, len(self.coeffs))
        return self.coeffs[1:] * k


def _grid(P: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(P) / P


def periodic_interpolator(values: np.ndarray):
    """Spectral interpolant of periodic samples on the uniform grid.

    Returns ``(ev, ev_prime)`` evaluating the trigonometric interpolant and
    its derivative at arbitrary parameters (scalar or array).  The spectrum
    is computed once; evaluation runs Horner in ``e^{it}``.
    """
    values = np.asarray(values, dtype=float)
    P = len(values)
    vh = np.fft.fft(values) / P
    half = P // 2
    mean = vh[0].real
    coef = 2.0 * vh[1:half]
    nyquist = vh[half].real if P % 2 == 0 and half >= 1 else 0.0

    def _horner(t, c):
        w = np.exp(1j * t)
        s = np.zeros_like(w)
        for cv in c[::-1]:
            s = (s + cv) * w
        return s

    def ev(t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        out = mean + _horner(t, coef).real
        if P % 2 == 0:
            out += nyquist * np.cos(half * t)
        return float(out[0]) if scalar else out

    def ev_prime(t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        p = np.arange(1, half)
        out = _horner(t, 1j * p * coef).real
        if P % 2 == 0:
            out += -half * nyquist * np.sin(half * t)
        return float(out[0]) if scalar else out

    return ev, ev_prime


def _periodic_interp(values: np.ndarray, t, derivative: bool = False):
    ev, ev_prime = periodic_interpolator(values)
    return ev_prime(t) if derivative else ev(t)


def _chord_quotient_grids(curve: FourierCurve, P: int):
    """Chord quotient ``W`` and its tau-derivative on the P x P uniform grid.

    Row index runs over tau, column index over t.  Uses the factorization
    ``(z(tau)-z(t))/(e^{i tau}-e^{i t}) = e^{-it} W(tau,t)`` with

        W = sum_{k>=1} c_k e^{ikt} S_k(tau-t) - sum_{j>=1} c_{-j} e^{-ij tau} S_j(tau-t),

    ``S_p(x) = sum_{l<p} e^{ilx}``, so W is polynomial in ``e^{i tau}`` and
    regular on the diagonal (W(t,t) = -i z'(t)).  The t-only factor e^{-it}
    does not affect tau-derivatives of log W and is dropped.
    """
    tau = _grid(P)
    idx = np.arange(P)
    D = (idx[:, None] - idx[None, :]) % P
    maxp = max(abs(k) for k in curve.ks)
    E = np.exp(1j * np.multiply.outer(np.arange(max(maxp, 1)), tau))
    W = np.zeros((P, P), dtype=complex)
    Wt = np.zeros((P, P), dtype=complex)
    for k, c in zip(curve.ks, curve.cs):
        if k == 0 or c == 0:
            continue
        p = abs(k)
        S = E[:p].sum(axis=0)
        Sd = (1j * np.arange(p)[:, None] * E[:p]).sum(axis=0)
        if k > 0:
            f = c * np.exp(1j * k * tau)[None, :]
            W += f * S[D]
            Wt += f * Sd[D]
        else:
            g = c * np.exp(-1j * p * tau)[:, None]
            W -= g * S[D]
            Wt -= g * (Sd[D] - 1j * p * S[D])
    return W, Wt


def _kernel_value(curve: FourierCurve, tau: float, t: float):
    """Scalar ``W'_tau / W`` via the same factorization as the grid path."""
    x = float(tau) - float(t)
    W = 0.0 + 0.0j
    Wt = 0.0 + 0.0j
    for k, c in zip(curve.ks, curve.cs):
        if k == 0 or c == 0:
            continue
        p = abs(k)
        l = np.arange(p)
        S = np.exp(1j * l * x).sum()
        Sd = (1j * l * np.exp(1j * l * x)).sum()
        if k > 0:
            f = c * np.exp(1j * k * t)
            W += f * S
            Wt += f * Sd
        else:
            g = c * np.exp(-1j * p * tau)
            W -= g * S
            Wt -= g * (Sd - 1j * p * S)
    scale = max(abs(c) for c in curve.cs)
    if abs(W) < QUOTIENT_TOL * max(1.0, scale):
        raise SolverError(
            "chord quotient vanished: curve is degenerate or self-intersecting"
        )
    return Wt / W


def kernel_K(curve: FourierCurve, tau: float, t: float) -> float:
    """Imaginary part of the log-derivative of the chord quotient.

    Equals ``Im[z'(tau)/(z(tau)-z(t))] - 1/2`` off the diagonal and stays
    finite at ``tau = t`` thanks to the factorized form.
    """
    return float(_kernel_value(curve, tau, t).imag)


def kernel_L(curve: FourierCurve, tau: float, t: float) -> float:
    """Real part of the log-derivative of the chord quotient."""
    return float(_kernel_value(curve, tau, t).real)


def conjugate_periodic(a, b):
    """Conjugate-function coefficients: ``cos pt -> sin pt``, ``sin pt -> -cos pt``.

    ``a`` and ``b`` are the cosine and sine coefficients for ``p >= 1`` (any
    constant term is handled by the caller; the conjugate of a constant is 0).
    Returns the (cosine, sine) coefficient arrays of the conjugate.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise InputError("coefficient arrays must have equal length")
    return -b.copy(), a.copy()


def assemble_system(curve: FourierCurve, M: int, P: int) -> BlockSystem:
    """Project the integral equation onto ``cos(lt), sin(lt)``, ``l <= M``.

    The kernel is sampled on the ``P x P`` uniform grid and both integrals
    of every entry are evaluated with the periodic trapezoid rule (which is
    the spectrally accurate choice for periodic integrands).  Requires
    ``P >= 4M``; the curve must wind once around the origin.
    """
    if M < 1:
        raise InputError("M must be >= 1")
    if P < 4 * M:
        raise InputError(f"grid size P={P} must be at least 4M={4 * M}")
    W, Wt = _chord_quotient_grids(curve, P)
    scale = max(abs(c) for c in curve.cs)
    if np.min(np.abs(W)) < QUOTIENT_TOL * max(1.0, scale):
        raise SolverError(
            "chord quotient vanished on the grid: curve is degenerate "
            "or self-intersecting"
        )
    quot = Wt / W
    Kg = quot.imag
    Lg = quot.real

    tau = _grid(P)
    p = np.arange(1, M + 1)
    C = np.cos(np.multiply.outer(p, tau))
    S = np.sin(np.multiply.outer(p, tau))
    KT = Kg.T
    w = 4.0 / P**2  # (1/pi^2) * (2 pi / P)^2
    AA = np.eye(M) - w * (C @ KT @ C.T)
    AB = -w * (C @ KT @ S.T)
    BA = -w * (S @ KT @ C.T)
    BB = np.eye(M) - w * (S @ KT @ S.T)

    # right-hand side: conjugate of ln|z| plus the continuous-kernel part
    u = np.log(np.abs(eval_curve(curve, tau)))
    a = (2.0 / P) * (C @ u)
    b = (2.0 / P) * (S @ u)
    conj_a, conj_b = conjugate_periodic(a, b)
    rl = (2.0 / P) * (u @ Lg)  # (1/pi) int ln|z(tau)| L(tau, t) dtau at t_j
    F = -conj_a + (2.0 / P) * (C @ rl)
    G = -conj_b + (2.0 / P) * (S @ rl)
    for block in (AA, AB, BA, BB, F, G):
        if not np.all(np.isfinite(block)):
            raise SolverError("non-finite entries in the projected system")
    return BlockSystem(AA=AA, AB=AB, BA=BA, BB=BB, F=F, G=G)


def solve_reparam(curve: FourierCurve, M: int, P: int) -> ReparamSolution:
    """Solve the block system and build ``theta(t) = arg z(t) + q(t)``.

    The mean of ``q`` is zero by construction (the constant mode is excluded
    from the system), which also removes the rotational eigenfunction and
    makes the truncated system uniquely solvable.  Non-monotone ``theta`` is
    flagged, never repaired: it signals an under-resolved M.
    """
    system = assemble_system(curve, M, P)
    A = system.matrix()
    lu, piv = lu_factor(A)
    rcond, _ = dgecon(lu, np.linalg.norm(A, 1), norm="1")
    cond = float(1.0 / rcond) if rcond > 0 else float("inf")
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularSystemError(
            f"block system numerically singular (condition {cond:.3e})",
            condition=cond,
        )
    x = lu_solve((lu, piv), system.rhs())
    alpha, beta = x[:M], x[M:]
    argz = unwrap_arg(curve, P)
    t = _grid(P)
    pr = np.arange(1, M + 1)
    q = np.cos(np.multiply.outer(t, pr)) @ alpha + np.sin(
        np.multiply.outer(t, pr)
    ) @ beta
    theta = argz + q
    closing = theta[0] + 2.0 * np.pi - theta[-1]
    monotone = bool(np.all(np.diff(theta) > 0.0) and closing > 0.0)
    return ReparamSolution(
        M=M,
        alpha=alpha,
        beta=beta,
        theta_grid=theta,
        grid_size=P,
        monotone=monotone,
        condition=cond,
    )


def correspondence_inverse(theta_grid: np.ndarray):
    """Monotone inverse ``t(theta)`` of a strictly increasing correspondence.

    ``theta_grid`` holds ``theta`` at ``len(theta_grid)`` uniform parameters.
    Each query is bracketed on the grid, bisected, and polished with Newton
    steps on the trigonometric interpolant of ``theta(t) - t``; the inverse
    satisfies ``t(theta + 2 pi) = t(theta) + 2 pi``.
    """
    theta_grid = np.asarray(theta_grid, dtype=float)
    P = len(theta_grid)
    t_grid = _grid(P)
    theta0 = theta_grid[0]
    v_ev, v_prime = periodic_interpolator(theta_grid - t_grid)

    def theta_of(t):
        return np.asarray(t, dtype=float) + v_ev(t)

    def theta_prime(t):
        return 1.0 + v_prime(t)

    def inverse(theta):
        theta = np.asarray(theta, dtype=float)
        scalar = theta.ndim == 0
        th = np.atleast_1d(theta).astype(float)
        turns = np.floor((th - theta0) / (2.0 * np.pi))
        th_red = th - 2.0 * np.pi * turns
        j = np.clip(np.searchsorted(theta_grid, th_red) - 1, 0, P - 1)
        lo = t_grid[j]
        hi = lo + 2.0 * np.pi / P
        for _ in range(30):
            mid = 0.5 * (lo + hi)
            below = theta_of(mid) < th_red
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        t = 0.5 * (lo + hi)
        for _ in range(3):
            step = (theta_of(t) - th_red) / theta_prime(t)
            t = np.clip(t - step, lo - 2.0 / P, hi + 2.0 / P)
        t = t + 2.0 * np.pi * turns
        return float(t[0]) if scalar else t

    return inverse


def invert_theta(sol: ReparamSolution):
    """Monotone inverse ``t(theta)`` of an accepted solution (callable)."""
    if not sol.monotone:
        raise NonMonotoneThetaError(
            "cannot invert a rejected (non-monotone) correspondence"
        )
    return correspondence_inverse(sol.theta_grid)


def taylor_from_correspondence(
    curve: FourierCurve, theta_grid: np.ndarray, D: int
) -> PolynomialMap:
    """Taylor coefficients of the disk map with boundary correspondence
    ``theta_grid`` (values at uniform curve parameters).

    Evaluates ``c_k = (1/2 pi) int z(t(theta)) e^{-ik theta} dtheta`` on a
    uniform theta grid of at least ``4 D`` nodes; the same samples give the
    negative-frequency coefficients whose l2 norm becomes ``neg_residual``.
    The output is gauge-fixed by the rotation making ``c_1`` real positive.
    """
    if D < 1:
        raise InputError("D must be >= 1")
    inverse = correspondence_inverse(theta_grid)
    Q = max(4 * D, 256)
    theta0 = float(theta_grid[0])
    thetas = theta0 + 2.0 * np.pi * np.arange(Q) / Q
    samples = eval_curve(curve, inverse(thetas))
    spectrum = np.fft.fft(samples) / Q
    k_pos = np.arange(D + 1)
    coeffs = spectrum[k_pos] * np.exp(-1j * k_pos * theta0)
    k_neg = np.arange(1, D + 1)
    neg = spectrum[(-k_neg) % Q] * np.exp(1j * k_neg * theta0)
    phase = np.angle(coeffs[1]) if abs(coeffs[1]) > 0 else 0.0
    coeffs = coeffs * np.exp(-1j * k_pos * phase)
    return PolynomialMap(coeffs=coeffs, neg_residual=float(np.linalg.norm(neg)))


def taylor_coeffs(curve: FourierCurve, sol: ReparamSolution, D: int) -> PolynomialMap:
    """Taylor coefficients of an accepted solve (see
    :func:`taylor_from_correspondence`), stamped with the solver resolution."""
    if not sol.monotone:
        raise NonMonotoneThetaError(
            "cannot extract coefficients from a rejected correspondence"
        )
    pmap = taylor_from_correspondence(curve, sol.theta_grid, D)
    return PolynomialMap(
        coeffs=pmap.coeffs,
        neg_residual=pmap.neg_residual,
        solver_M=sol.M,
        solver_P=sol.grid_size,
    )


# ---------------------------------------------------------------------------
# persistence: CSV `k,re,im` (k >= 0) plus JSON sidecar with diagnostics


def save_polynomial_map(pmap: PolynomialMap, path: str) -> None:
    """Write coefficients to ``path`` and diagnostics to ``path + '.meta.json'``."""
    import json

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("k,re,im\n")
        for k, c in enumerate(pmap.coeffs):
            fh.write(f"{k},{format(c.real, '.17g')},{format(c.imag, '.17g')}\n")
    sidecar = {
        "neg_residual": pmap.neg_residual,
        "M": pmap.solver_M,
        "P": pmap.solver_P,
        "gauge": "argc1=0",
    }
    with open(str(path) + ".meta.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_polynomial_map(path: str) -> PolynomialMap:
    import csv as _csv
    import json
    import os

    rows = {}
    with open(path, "r", encoding="utf-8") as fh:
        reader = _csv.reader(fh)
        header = next(reader)
        if [h.strip().lower() for h in header] != ["k", "re", "im"]:
            raise InputError(f"expected header k,re,im in {path}")
        for rec in reader:
            if not rec:
                continue
            rows[int(rec[0])] = complex(float(rec[1]), float(rec[2]))
    if not rows or min(rows) < 0:
        raise InputError(f"polynomial map {path} must have k >= 0")
    coeffs = np.zeros(max(rows) + 1, dtype=complex)
    for k, c in rows.items():
        coeffs[k] = c
    meta_path = str(path) + ".meta.json"
    meta = {}
    if os.path.exists(meta_path):
        meta = json.load(open(meta_path, "r", encoding="utf-8"))
    return PolynomialMap(
        coeffs=coeffs,
        neg_residual=float(meta.get("neg_residual", float("nan"))),
        solver_M=int(meta.get("M", 0)),
        solver_P=int(meta.get("P", 0)),
    )
