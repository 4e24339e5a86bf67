"""Quantitative quality checks for computed maps, and the SVG renderer.

The deviation report turns "does the image boundary lie on the target
curve" into numbers (sup and mean distance over a boundary grid); the
univalence check counts zeros of the core derivative inside the disk by
the argument principle (0 means locally injective); the renderer draws the
image of a polar net of the disk as a deterministic standalone SVG.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InputError
from .fourier_boundary import FourierCurve, derivative_curve, eval_curve
from .pipelines import ComposedMap, evaluate_composed
from .reparam_solver import PolynomialMap

__all__ = [
    "DeviationReport",
    "boundary_deviation",
    "univalence_check",
    "render_polar_net",
]


@dataclass(frozen=True)
class DeviationReport:
    """Numbers backing an accept/reject decision for a computed map."""

    sup_deviation: float
    mean_deviation: float
    neg_residual: float
    univalence_winding: int
    monotone_theta: bool
    corner_angle_measured: float | None = None

    def __post_init__(self):
        if self.sup_deviation + 1e-15 < self.mean_deviation:
            raise InputError("sup deviation cannot be below mean deviation")

    def passed(self, tol: float) -> bool:
        return (
            self.sup_deviation <= tol
            and self.univalence_winding == 0
            and self.monotone_theta
        )


def _threads() -> int:
    env = os.environ.get("CFORGE_THREADS", "")
    try:
        n = int(env)
    except ValueError:
        n = 0
    return max(1, n) if n else 1


def _nearest_distance(points, target, grid: int):
    """Distance from each point to the target curve.

    Nearest point over a 16x finer parameter grid of the target, then one
    Newton step on the squared-distance stationarity condition when the
    target is a Fourier curve (parametric callables skip the refinement).
    """
    fine = 16 * grid
    s = 2.0 * np.pi * np.arange(fine) / fine
    if isinstance(target, FourierCurve):
        tgt = eval_curve(target, s)
        dcurve = derivative_curve(target, 1)
        d2curve = derivative_curve(target, 2)
    else:
        tgt = np.asarray(target(s), dtype=complex)
        dcurve = d2curve = None

    def block(chunk):
        d = np.abs(chunk[:, None] - tgt[None, :])
        j = np.argmin(d, axis=1)
        best = d[np.arange(len(chunk)), j]
        if dcurve is None:
            return best
        # one Newton step on g(s) = Re[(z(s)-p) conj(z'(s))] = 0
        s0 = s[j]
        for _ in range(1):
            zs = eval_curve(target, s0)
            zp = eval_curve(dcurve, s0)
            zpp = eval_curve(d2curve, s0)
            diff = zs - chunk
            g = (diff * np.conj(zp)).real
            gp = (np.abs(zp) ** 2 + (diff * np.conj(zpp)).real)
            ok = np.abs(gp) > 1e-30
            step = np.where(ok, g / np.where(ok, gp, 1.0), 0.0)
            step = np.clip(step, -2.0 * np.pi / fine, 2.0 * np.pi / fine)
            s0 = s0 - step
        refined = np.abs(eval_curve(target, s0) - chunk)
        return np.minimum(best, refined)

    n_threads = _threads()
    chunks = np.array_split(points, max(1, len(points) // 512))
    if n_threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            parts = list(pool.map(block, chunks))
    else:
        parts = [block(c) for c in chunks]
    return np.concatenate(parts)


def boundary_deviation(
    cmap: ComposedMap, target, grid: int = 256
) -> DeviationReport:
    """Distance of the image boundary from the target curve.

    Evaluates the composed map at ``grid`` points of the unit circle and
    measures each image's distance to the target (a FourierCurve, or any
    2 pi-periodic parametric callable).  Also runs the univalence winding
    check on the core and copies the solver diagnostics carried by the map.
    """
    if grid < 256:
        raise InputError("deviation grid must be at least 256")
    zeta = np.exp(2j * np.pi * np.arange(grid) / grid)
    images = evaluate_composed(cmap, zeta)
    dist = _nearest_distance(images, target, grid)
    winding = univalence_check(cmap.core, max(8 * cmap.core.degree, 256))
    solver = cmap.provenance.get("solver", {})
    corner = cmap.provenance.get("corner")
    angle = None
    if corner is not None:
        from .pipelines import measure_corner_angle

        angle = measure_corner_angle(cmap)
    return DeviationReport(
        sup_deviation=float(np.max(dist)),
        mean_deviation=float(np.mean(dist)),
        neg_residual=float(cmap.core.neg_residual),
        univalence_winding=winding,
        monotone_theta=bool(solver.get("monotone", True)),
        corner_angle_measured=angle,
    )


def univalence_check(core: PolynomialMap, grid: int) -> int:
    """Winding of ``Z'(e^{i theta})`` about 0 = number of zeros of ``Z'``
    in the disk.  Zero means the core is locally injective.

    Fails when ``|Z'|`` drops below 1e-12 at a node (zero on the circle is
    inconclusive).
    """
    if grid < 8 * core.degree:
        raise InputError("univalence grid must be at least 8 * degree")
    theta = 2.0 * np.pi * np.arange(grid) / grid
    zeta = np.exp(1j * theta)
    dcoeffs = core.derivative_coeffs()
    vals = np.zeros(grid, dtype=complex)
    for c in dcoeffs[::-1]:
        vals = vals * zeta + c
    if np.min(np.abs(vals)) < 1e-12:
        raise InputError(
            "derivative vanishes on the unit circle; winding inconclusive"
        )
    ang = np.unwrap(np.angle(vals))
    closing = np.angle(vals[0]) - np.angle(vals[-1])
    closing = (closing + np.pi) % (2.0 * np.pi) - np.pi
    return int(round((ang[-1] - ang[0] + closing) / (2.0 * np.pi)))


# ---------------------------------------------------------------------------
# SVG polar net


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def _path(points, warn: str | None = None) -> str:
    coords = " ".join(f"{_fmt(p.real)},{_fmt(-p.imag)}" for p in points)
    warn_attr = f' data-warning="{warn}"' if warn else ""
    return f'<polyline fill="none" points="{coords}"{warn_attr}/>'


def render_polar_net(
    cmap: ComposedMap, spokes: int = 8, circles: int = 4, samples: int = 256
) -> str:
    """Standalone SVG of the polar-net image under the map.

    Draws the images of ``circles`` concentric circles (radii j/(circles+1))
    and ``spokes`` radii of the unit disk, plus the image of the unit circle
    as the boundary.  Output is deterministic: fixed path order (circles by
    radius, spokes by angle, boundary last), floats at 12 significant
    digits.  A stage-domain failure truncates that path and annotates it
    instead of aborting the figure.
    """
    if spokes < 1 or circles < 1:
        raise InputError("need at least one spoke and one circle")
    paths = []
    all_pts = []

    def traced(zeta_arr):
        try:
            pts = evaluate_composed(cmap, zeta_arr)
            return pts, None
        except DomainError:
            pass
        pts = []
        warn = None
        for i, zv in enumerate(zeta_arr):
            try:
                pts.append(evaluate_composed(cmap, zv))
            except DomainError:
                warn = f"stage-domain-error at sample {i}"
                break
        return np.asarray(pts, dtype=complex), warn

    for j in range(1, circles + 1):
        r = j / (circles + 1.0)
        zeta = r * np.exp(2j * np.pi * np.arange(samples + 1) / samples)
        pts, warn = traced(zeta)
        paths.append(_path(pts, warn))
        if len(pts):
            all_pts.append(pts)
    for j in range(spokes):
        ang = 2.0 * np.pi * j / spokes
        radii = np.linspace(0.0, 1.0, samples)
        pts, warn = traced(radii * np.exp(1j * ang))
        paths.append(_path(pts, warn))
        if len(pts):
            all_pts.append(pts)
    zeta = np.exp(2j * np.pi * np.arange(samples + 1) / samples)
    pts, warn = traced(zeta)
    paths.append(_path(pts, warn))
    if len(pts):
        all_pts.append(pts)

    pool = np.concatenate(all_pts) if all_pts else np.array([-1.0 - 1j, 1.0 + 1j])
    x0, x1 = float(np.min(pool.real)), float(np.max(pool.real))
    y0, y1 = float(np.min(-pool.imag)), float(np.max(-pool.imag))
    mx = 0.05 * max(x1 - x0, y1 - y0, 1e-12)
    view = (x0 - mx, y0 - mx, (x1 - x0) + 2 * mx, (y1 - y0) + 2 * mx)
    width = (x1 - x0) + 2 * mx
    body = "\n".join(paths)
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="{_fmt(view[0])} {_fmt(view[1])} {_fmt(view[2])} {_fmt(view[3])}">\n'
        f'<g stroke="black" stroke-width="{_fmt(width / 400.0)}">\n'
        f"{body}\n"
        "</g>\n"
        "</svg>\n"
    )
