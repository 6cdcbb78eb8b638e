"""Theoretical robustness intervals, Monte Carlo sweeps, and template ranking.

The theoretical interval for a template is the [min, max] of the noise-free
path robustness of the pure winding field, evaluated on a dense deterministic
grid of defect centers over the template's central unit sampling square.
Sweeps sample centers uniformly from the same square (counter-based on the
base seed), optionally add uniform angle noise per realization, and record
per-sample charge and robustness.

Sample values are computed from the synthesis formulas evaluated at the path
vertices only; because both the field and the noise are pointwise functions
of (spec, vertex), this matches synthesizing the full grid bit for bit.
Everything is a pure function of the config, so results are independent of
parallelism and scheduling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import OrientationField, PeriodMode, canonicalize, wrap_diff
from .errors import QuantizationFailure, SweepFailure
from .synthesis import _validate_charge, counter_uniform, derive_seed
from .templates import Placement, Template, builtin_template, center_placement

# Stream tags for sub-seed derivation.
_STREAM_CENTER_X = 1
_STREAM_CENTER_Y = 2
_STREAM_NOISE = 3

_VERTEX_EXCLUSION = 1e-9
_ORACLE_CHUNK = 200_000


@dataclass(frozen=True)
class IntervalEstimate:
    """[lower, upper] robustness over sampled defect-center positions."""

    lower: float
    upper: float
    n_oracle_samples: int


@dataclass(frozen=True)
class SweepConfig:
    templates: tuple
    n_centers: int = 10_000
    noise_amplitudes: tuple = (0.0, 0.2)
    n_noise_realizations: int = 10
    base_seed: int = 0
    nx: int = 32
    ny: int = 32
    h: float = 1.0
    mode: PeriodMode = PeriodMode.NEMATIC
    charge: Fraction = Fraction(1, 2)
    phase: float = 0.0
    oracle_density: int = 200

    def __post_init__(self):
        resolved = tuple(
            t if isinstance(t, Template) else builtin_template(t) for t in self.templates
        )
        object.__setattr__(self, "templates", resolved)
        object.__setattr__(self, "noise_amplitudes", tuple(float(a) for a in self.noise_amplitudes))
        object.__setattr__(self, "charge", Fraction(self.charge))
        if self.n_centers < 1:
            raise ValueError("n_centers must be >= 1")
        if any(a < 0 for a in self.noise_amplitudes):
            raise ValueError("noise amplitudes must be >= 0")
        if self.n_noise_realizations < 1:
            raise ValueError("n_noise_realizations must be >= 1")
        _validate_charge(self.charge, self.mode)
        for t in self.templates:
            verts = t.boundary.vertices
            span_x = max(v[0] for v in verts) - min(v[0] for v in verts)
            span_y = max(v[1] for v in verts) - min(v[1] for v in verts)
            if self.nx < span_x + 3 or self.ny < span_y + 3:
                raise ValueError(
                    f"grid {self.nx}x{self.ny} cannot hold template {t.name!r} "
                    f"with a 1-cell margin")


@dataclass
class SampleBlock:
    """All samples for one (template, noise amplitude) pair."""

    template: str
    amplitude: float
    sample_index: np.ndarray
    center_x: np.ndarray
    center_y: np.ndarray
    charge: np.ndarray
    robustness: np.ndarray
    normalized: np.ndarray

    def summary(self) -> dict:
        r = self.robustness
        return {
            "min": float(np.min(r)),
            "max": float(np.max(r)),
            "mean": float(np.mean(r)),
            "stddev": float(np.std(r)),
        }

    def normalized_summary(self) -> dict:
        r = self.normalized
        return {
            "min": float(np.min(r)),
            "max": float(np.max(r)),
            "mean": float(np.mean(r)),
            "stddev": float(np.std(r)),
        }


@dataclass
class SweepResult:
    config: SweepConfig
    blocks: dict
    oracles: dict
    agreement: dict
    placements: dict

    def block(self, template_name: str, amplitude: float) -> SampleBlock:
        return self.blocks[(template_name, float(amplitude))]

    def iter_blocks(self):
        for key in sorted(self.blocks):
            yield self.blocks[key]


@dataclass(frozen=True)
class RankedEntry:
    template: str
    resolution: float
    n_samples: int
    min_normalized: float
    mean_normalized: float
    min_robustness: float
    mean_robustness: float


@dataclass
class RankReport:
    """Templates per amplitude, ordered by worst-case normalized robustness."""

    per_amplitude: dict

    def ranking(self, amplitude: float):
        return self.per_amplitude[float(amplitude)]

    def top(self, amplitude: float) -> str:
        return self.per_amplitude[float(amplitude)][0].template


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    lower: float
    upper: float
    n_oracle_samples: int
    r_min: float
    analytic_lower_bound: float


def _clean_vertex_angles(verts_xy: np.ndarray, centers_xy: np.ndarray, q: float, phase: float, mode: PeriodMode):
    """Winding-field angles at path vertices for a batch of centers.

    ``verts_xy``: (nv, 2) vertex positions; ``centers_xy``: (..., 2).
    Returns an (..., nv) array, canonicalized.  Identical to sampling
    ``synth_defect_field`` at those vertices.
    """
    dx = verts_xy[:, 0] - centers_xy[..., 0:1]
    dy = verts_xy[:, 1] - centers_xy[..., 1:2]
    return canonicalize(q * np.arctan2(dy, dx) + phase, mode)


def _path_stats(theta: np.ndarray, mode: PeriodMode):
    """Winding sums and robustness over the last axis (closed-path vertices).

    Returns (raw_sum, charge_numerator, residual, robustness); the charge
    numerator counts half-turns for nematic fields, full turns for polar.
    """
    p = mode.period
    diffs = wrap_diff(np.roll(theta, -1, axis=-1) - theta, mode)
    raw = np.sum(diffs, axis=-1)
    unit = math.pi if mode is PeriodMode.NEMATIC else 2.0 * math.pi
    k = np.rint(raw / unit)
    residual = raw - k * unit
    robustness = np.min(p / 2.0 - np.abs(diffs), axis=-1)
    return raw, k.astype(np.int64), residual, robustness


def _check_residuals(residual: np.ndarray):
    bad = float(np.max(np.abs(residual)))
    if bad >= 1e-6:
        raise QuantizationFailure(f"winding residual {bad} above tolerance")


def _oracle_axis(center: float, density: int) -> np.ndarray:
    # Odd point count keeps the square boundary and its midpoint (the template
    # centroid) on-grid, where the extreme robustness values sit; grids nest
    # under density doubling.
    d_eff = density if density % 2 == 1 else density + 1
    return np.linspace(center - 0.5, center + 0.5, d_eff)


def analytic_path_robustness(template: Template, centers, q, mode: PeriodMode = PeriodMode.NEMATIC) -> np.ndarray:
    """Noise-free robustness of the pure winding field for the given centers.

    Vectorized over an (..., 2) array of centers in template coordinates.
    """
    verts = np.asarray(template.boundary.vertices, dtype=float)
    centers = np.asarray(centers, dtype=float)
    theta = _clean_vertex_angles(verts, centers, float(Fraction(q)), 0.0, mode)
    _, _, _, robustness = _path_stats(theta, mode)
    return robustness


def theoretical_interval(
    template: Template,
    q,
    mode: PeriodMode = PeriodMode.NEMATIC,
    oracle_density: int = 200,
) -> IntervalEstimate:
    """Exact-robustness interval over the template's central sampling square.

    Evaluates the analytic noise-free robustness on an inclusive
    density x density grid of defect centers (centers within 1e-9 of a path
    vertex are excluded) and returns the min and max.
    """
    if oracle_density < 2:
        raise ValueError("oracle_density must be >= 2 per axis")
    verts = np.asarray(template.boundary.vertices, dtype=float)
    cx, cy = template.centroid
    xs = _oracle_axis(cx, oracle_density)
    ys = _oracle_axis(cy, oracle_density)
    gx, gy = np.meshgrid(xs, ys)
    centers = np.column_stack([gx.ravel(), gy.ravel()])

    lower = math.inf
    upper = -math.inf
    kept = 0
    for start in range(0, len(centers), _ORACLE_CHUNK):
        chunk = centers[start:start + _ORACLE_CHUNK]
        d2 = np.min(
            (chunk[:, 0:1] - verts[:, 0]) ** 2 + (chunk[:, 1:2] - verts[:, 1]) ** 2,
            axis=1,
        )
        chunk = chunk[d2 > _VERTEX_EXCLUSION**2]
        if len(chunk) == 0:
            continue
        r = analytic_path_robustness(template, chunk, q, mode)
        kept += len(chunk)
        lower = min(lower, float(np.min(r)))
        upper = max(upper, float(np.max(r)))
    return IntervalEstimate(lower=lower, upper=upper, n_oracle_samples=kept)


def _draw_centers(config: SweepConfig, placement: Placement):
    """Uniform center offsets in the placed template's central unit square.

    Centers that land exactly on a grid vertex (where the winding field is
    undefined) are redrawn, up to 100 times per sample.
    """
    n = config.n_centers
    pcx, pcy = placement.template.centroid
    pcx += placement.offset[0]
    pcy += placement.offset[1]
    ux = counter_uniform(derive_seed(config.base_seed, _STREAM_CENTER_X, 0), np.arange(n)) - 0.5
    uy = counter_uniform(derive_seed(config.base_seed, _STREAM_CENTER_Y, 0), np.arange(n)) - 0.5
    cx = (pcx + ux) * config.h
    cy = (pcy + uy) * config.h

    def degenerate(cx, cy):
        ci = np.rint(cx / config.h)
        cj = np.rint(cy / config.h)
        return (ci * config.h == cx) & (cj * config.h == cy) & (ci >= 0) & (ci < config.nx) & (cj >= 0) & (cj < config.ny)

    bad = degenerate(cx, cy)
    retry = 0
    while np.any(bad):
        retry += 1
        if retry > 100:
            raise SweepFailure("could not draw a non-degenerate defect center in 100 retries")
        idx = np.nonzero(bad)[0]
        ux = counter_uniform(derive_seed(config.base_seed, _STREAM_CENTER_X, retry), idx) - 0.5
        uy = counter_uniform(derive_seed(config.base_seed, _STREAM_CENTER_Y, retry), idx) - 0.5
        cx[idx] = (pcx + ux) * config.h
        cy[idx] = (pcy + uy) * config.h
        bad[:] = False
        bad[idx] = degenerate(cx[idx], cy[idx])
    return cx, cy


def run_sweep(config: SweepConfig) -> SweepResult:
    """Monte Carlo sweep over defect centers and noise realizations.

    For each template, centers are sampled in its central unit square (the
    same center set is reused across all noise amplitudes, so noisy and clean
    robustness are paired per sample index).  Noise keys derive from
    (base_seed, center index, realization index), so any sample can be
    recomputed in isolation.
    """
    blocks = {}
    oracles = {}
    agreement = {}
    placements = {}
    q = float(config.charge)
    target_k = int(config.charge * 2) if config.mode is PeriodMode.NEMATIC else int(config.charge)

    for template in config.templates:
        dummy = OrientationField(
            nx=config.nx, ny=config.ny, h=config.h, mode=config.mode,
            angles=np.zeros((config.ny, config.nx)),
        )
        placement = center_placement(template, dummy)
        placement.validate_in(dummy, margin=1)
        placements[template.name] = placement.offset

        verts = np.asarray(placement.path().vertices, dtype=float) * config.h
        vflat = np.array([j * config.nx + i for i, j in placement.path().vertices])
        cx, cy = _draw_centers(config, placement)
        centers = np.column_stack([cx, cy])
        theta_clean = _clean_vertex_angles(verts, centers, q, config.phase, config.mode)

        for amplitude in config.noise_amplitudes:
            if amplitude == 0.0:
                theta = theta_clean[:, None, :]
                nreal = 1
            else:
                nreal = config.n_noise_realizations
                seeds = derive_seed(
                    config.base_seed,
                    _STREAM_NOISE,
                    np.arange(config.n_centers)[:, None],
                    np.arange(nreal)[None, :],
                )
                u = counter_uniform(seeds[:, :, None], vflat[None, None, :])
                theta = canonicalize(theta_clean[:, None, :] + amplitude * (2.0 * u - 1.0), config.mode)

            _, k, residual, robustness = _path_stats(theta, config.mode)
            _check_residuals(residual)

            n_samples = config.n_centers * nreal
            charge_values = (k / 2.0) if config.mode is PeriodMode.NEMATIC else k.astype(float)
            block = SampleBlock(
                template=template.name,
                amplitude=float(amplitude),
                sample_index=np.arange(n_samples),
                center_x=np.repeat(cx, nreal),
                center_y=np.repeat(cy, nreal),
                charge=charge_values.reshape(-1),
                robustness=robustness.reshape(-1),
                normalized=robustness.reshape(-1) / template.resolution,
            )
            blocks[(template.name, float(amplitude))] = block
            agreement[(template.name, float(amplitude))] = float(np.mean(k.reshape(-1) == target_k))

        oracles[template.name] = theoretical_interval(template, config.charge, config.mode, config.oracle_density)

    return SweepResult(config=config, blocks=blocks, oracles=oracles, agreement=agreement, placements=placements)


def normalize_and_rank(result: SweepResult) -> RankReport:
    """Rank templates by worst-case robustness normalized by resolution.

    The winner per amplitude maximizes the minimum normalized robustness;
    ties break alphabetically for reproducibility.
    """
    resolutions = {t.name: t.resolution for t in result.config.templates}
    per_amplitude = {}
    for amplitude in result.config.noise_amplitudes:
        entries = []
        for template in result.config.templates:
            block = result.block(template.name, amplitude)
            entries.append(RankedEntry(
                template=template.name,
                resolution=resolutions[template.name],
                n_samples=len(block.robustness),
                min_normalized=float(np.min(block.normalized)),
                mean_normalized=float(np.mean(block.normalized)),
                min_robustness=float(np.min(block.robustness)),
                mean_robustness=float(np.mean(block.robustness)),
            ))
        entries.sort(key=lambda e: (-e.min_normalized, e.template))
        per_amplitude[float(amplitude)] = entries
    return RankReport(per_amplitude=per_amplitude)


def convergence_study(
    q,
    sizes,
    mode: PeriodMode = PeriodMode.NEMATIC,
    h: float = 1.0,
    oracle_density: int = 200,
):
    """Oracle intervals for square(n) templates plus the view-angle bound.

    The analytic lower bound is P/2 - |q|*arcsin(min(1, h/R_min)) with R_min
    the smallest center-to-nearest-edge distance over the sampling square,
    i.e. (n-1)/2 * h.  The bound is only sharp where R_min >= h; the rows are
    reported as-is and any assertions are left to callers.
    """
    q = Fraction(q)
    _validate_charge(q, mode)
    p = mode.period
    rows = []
    for n in sizes:
        template = builtin_template(f"square({n})")
        interval = theoretical_interval(template, q, mode, oracle_density)
        r_min = max(0.0, (n - 1) / 2.0 * h)
        arg = 1.0 if r_min <= h else h / r_min
        bound = max(0.0, p / 2.0 - abs(float(q)) * math.asin(arg))
        rows.append(ConvergenceRow(
            n=int(n),
            lower=interval.lower,
            upper=interval.upper,
            n_oracle_samples=interval.n_oracle_samples,
            r_min=r_min,
            analytic_lower_bound=bound,
        ))
    return rows
