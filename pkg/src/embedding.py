"""
Embedding maps f: D -> B_d given by scaled vectors of rational maps.

Values, first and second derivatives are computed from coefficient-level
derivative chains. Validation checks the analytic-disc axioms numerically
(sphere attachment, nonvanishing derivative, injectivity on a mesh,
transversality) and reports failures instead of raising.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Optional, Tuple

import numpy as np

import config
from src.complex_rational import Moebius, RationalMap, rat_compose, rat_derivative, rat_eval
from src.exceptions import DimensionMismatch, MalformedInput, NotACrossing, ParamOutOfRange, PoleError
from src.utils import complex_to_pair

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EmbeddingMap:
    """Candidate analytic disc f = scale * (f_1, ..., f_d)."""
    dim: int
    scale: float
    components: Tuple[RationalMap, ...]

    def __post_init__(self):
        components = tuple(self.components)
        if self.dim < 1 or len(components) != self.dim:
            raise DimensionMismatch(f"dim = {self.dim} but {len(components)} components given")
        if not self.scale > 0:
            raise ParamOutOfRange(f"scale must be positive, got {self.scale}")
        object.__setattr__(self, 'components', components)
        object.__setattr__(self, 'scale', float(self.scale))

    @cached_property
    def first_derivatives(self) -> Tuple[RationalMap, ...]:
        return tuple(rat_derivative(c) for c in self.components)

    @cached_property
    def second_derivatives(self) -> Tuple[RationalMap, ...]:
        return tuple(rat_derivative(c) for c in self.first_derivatives)

    def to_json(self) -> Dict:
        return {'dim': self.dim, 'scale': self.scale, 'components': [c.to_json() for c in self.components]}

    @classmethod
    def from_json(cls, data: Dict) -> 'EmbeddingMap':
        if not isinstance(data, dict) or 'components' not in data:
            raise MalformedInput("EmbeddingMap JSON needs 'dim', 'scale' and 'components'")
        components = tuple(RationalMap.from_json(c) for c in data['components'])
        try:
            dim = int(data.get('dim', len(components)))
            scale = float(data.get('scale', 1.0))
        except (TypeError, ValueError) as e:
            raise MalformedInput(f"Invalid dim/scale in EmbeddingMap JSON: {e}")
        return cls(dim, scale, components)


def _stack(maps, scale: float, z) -> np.ndarray:
    return scale * np.stack([np.asarray(rat_eval(c, z)) for c in maps], axis=-1)


def emb_eval(f: EmbeddingMap, z) -> np.ndarray:
    """f(z); shape (d,) for scalar z, (..., d) for arrays."""
    return _stack(f.components, f.scale, z)


def emb_deriv1(f: EmbeddingMap, z) -> np.ndarray:
    return _stack(f.first_derivatives, f.scale, z)


def emb_deriv2(f: EmbeddingMap, z) -> np.ndarray:
    return _stack(f.second_derivatives, f.scale, z)


def vector_inner(u: np.ndarray, v: np.ndarray):
    """<u, v> = sum u_j conj(v_j) over the last axis."""
    return np.sum(u * np.conj(v), axis=-1)


def emb_inner(f: EmbeddingMap, z, w):
    """<f(z), f(w)> = sum scale^2 f_j(z) conj(f_j(w))."""
    value = vector_inner(emb_eval(f, z), emb_eval(f, w))
    return complex(value) if np.ndim(value) == 0 else value


def transversality_pairing(f: EmbeddingMap, xi):
    """<f(xi), f'(xi) xi>, vectorized over boundary points."""
    xi = np.asarray(xi, dtype=complex)
    value = vector_inner(emb_eval(f, xi), emb_deriv1(f, xi) * xi[..., None])
    return complex(value) if np.ndim(value) == 0 else value


def precompose(f: EmbeddingMap, m: Moebius) -> EmbeddingMap:
    """The embedding f o m."""
    inner = m.as_rational()
    return EmbeddingMap(f.dim, f.scale, tuple(rat_compose(c, inner) for c in f.components))


@dataclass
class ValidationReport:
    """Outcome of the analytic-disc checks with per-check numeric evidence."""
    sphere_attachment_ok: bool
    max_boundary_deviation: float
    interior_ok: bool
    max_interior_norm_sq: float
    derivative_nonvanishing_ok: bool
    min_derivative_norm: float
    injectivity_ok: bool
    worst_collision: Optional[Dict]
    transversality_ok: bool
    min_transversality: float
    pole_free_ok: bool = True
    pole_point: Optional[List[float]] = None
    grid_size: int = 0
    injectivity_seeds: int = 0

    @property
    def passed(self) -> bool:
        return (self.pole_free_ok and self.sphere_attachment_ok and self.derivative_nonvanishing_ok
                and self.injectivity_ok and self.transversality_ok)

    def failed_checks(self) -> List[str]:
        checks = {
            'pole_free': self.pole_free_ok,
            'sphere_attachment': self.sphere_attachment_ok,
            'derivative_nonvanishing': self.derivative_nonvanishing_ok,
            'injectivity': self.injectivity_ok,
            'transversality': self.transversality_ok,
        }
        return [name for name, ok in checks.items() if not ok]

    def to_dict(self) -> Dict:
        return {
            'passed': self.passed,
            'grid_size': self.grid_size,
            'pole_free': {'ok': self.pole_free_ok, 'pole_point': self.pole_point},
            'sphere_attachment': {
                'ok': self.sphere_attachment_ok,
                'max_boundary_deviation': self.max_boundary_deviation,
                'interior_ok': self.interior_ok,
                'max_interior_norm_sq': self.max_interior_norm_sq,
            },
            'derivative_nonvanishing': {'ok': self.derivative_nonvanishing_ok,
                                        'min_derivative_norm': self.min_derivative_norm},
            'injectivity': {'ok': self.injectivity_ok, 'worst_collision': self.worst_collision,
                            'seeds_refined': self.injectivity_seeds},
            'transversality': {'ok': self.transversality_ok, 'min_a': self.min_transversality},
        }


def _closed_disc_mesh(n_radii: int, n_angles: int) -> np.ndarray:
    radii = np.linspace(0.0, 1.0, n_radii + 1)[1:]
    thetas = 2.0 * np.pi * np.arange(n_angles) / n_angles
    mesh = (radii[:, None] * np.exp(1j * thetas)[None, :]).ravel()
    return np.concatenate([[0j], mesh])


def _interior_mesh(n_radii: int, n_angles: int) -> Tuple[np.ndarray, float]:
    radii = np.linspace(0.05, 0.95, n_radii)
    thetas = 2.0 * np.pi * np.arange(n_angles) / n_angles
    mesh = (radii[:, None] * np.exp(1j * thetas)[None, :]).ravel()
    spacing = max(radii[1] - radii[0] if n_radii > 1 else 0.0, 2.0 * np.pi * radii[-1] / n_angles)
    return np.concatenate([[0j], mesh]), float(spacing)


def _refine_collision(f: EmbeddingMap, z: complex, w: complex) -> Tuple[complex, complex, float]:
    """Gauss-Newton on the 4 real unknowns (z, w) for f(z) = f(w)."""
    for _ in range(config.VALIDATION_CONFIG['refinement_iterations']):
        residual = emb_eval(f, z) - emb_eval(f, w)
        norm = float(np.linalg.norm(residual))
        if norm <= config.tolerance('injectivity_collision') * 1e-3:
            break
        dz = emb_deriv1(f, z)
        dw = emb_deriv1(f, w)
        jac = np.stack([dz, 1j * dz, -dw, -1j * dw], axis=1)
        jac_real = np.vstack([jac.real, jac.imag])
        rhs = -np.concatenate([residual.real, residual.imag])
        step = np.linalg.lstsq(jac_real, rhs, rcond=None)[0]
        z = z + complex(step[0], step[1])
        w = w + complex(step[2], step[3])
        if abs(z) > 1.0 or abs(w) > 1.0:
            break
    try:
        norm = float(np.linalg.norm(emb_eval(f, z) - emb_eval(f, w)))
    except PoleError:
        norm = float('inf')
    return z, w, norm


def _injectivity_scan(f: EmbeddingMap) -> Tuple[bool, Optional[Dict], int]:
    mesh, spacing = _interior_mesh(config.VALIDATION_CONFIG['mesh_radii'], config.VALIDATION_CONFIG['mesh_angles'])
    values = emb_eval(f, mesh)
    speed = float(np.max(np.linalg.norm(emb_deriv1(f, mesh), axis=-1)))
    norms = np.sum(np.abs(values) ** 2, axis=-1)
    dist_sq = norms[:, None] + norms[None, :] - 2.0 * np.real(values @ values.conj().T)
    dist = np.sqrt(np.maximum(dist_sq, 0.0))
    gap = np.abs(mesh[:, None] - mesh[None, :])
    upper = np.triu(np.ones_like(gap, dtype=bool), k=1)
    flagged = upper & (gap > 4.0 * spacing) & (dist < 2.0 * speed * spacing)
    rows, cols = np.nonzero(flagged)
    order = np.argsort(dist[rows, cols], kind='stable')[:config.VALIDATION_CONFIG['max_injectivity_seeds']]

    margin = 1.0 - config.tolerance('injectivity_boundary_margin')
    min_gap = config.tolerance('injectivity_min_gap')
    worst = None
    for k in order:
        z, w, norm = _refine_collision(f, complex(mesh[rows[k]]), complex(mesh[cols[k]]))
        genuine = abs(z - w) > min_gap and abs(z) <= margin and abs(w) <= margin
        logger.debug(f"injectivity seed {k}: |z-w| = {abs(z - w):.3e}, residual = {norm:.3e}")
        if genuine and (worst is None or norm < worst['residual']):
            worst = {'z': complex_to_pair(z), 'w': complex_to_pair(w), 'residual': norm,
                     'separation': abs(z - w)}
    ok = worst is None or worst['residual'] > config.tolerance('injectivity_collision')
    return ok, worst, len(order)


def validate(f: EmbeddingMap, grid_size: int = None) -> ValidationReport:
    """
    Check the analytic-disc axioms for f numerically.

    Args:
        f: Candidate embedding
        grid_size: Number of boundary samples (>= 256)

    Returns:
        ValidationReport; failures are reported, never raised
    """
    grid_size = grid_size or config.VALIDATION_CONFIG['default_grid_size']
    if grid_size < config.VALIDATION_CONFIG['min_grid_size']:
        raise ParamOutOfRange(f"grid_size must be at least {config.VALIDATION_CONFIG['min_grid_size']}, got {grid_size}")

    boundary = np.exp(2j * np.pi * np.arange(grid_size) / grid_size)
    try:
        boundary_values = emb_eval(f, boundary)
        interior = np.concatenate([r * boundary for r in config.VALIDATION_CONFIG['interior_radii']])
        interior_values = emb_eval(f, interior)
        closed_mesh = np.concatenate([
            _closed_disc_mesh(config.VALIDATION_CONFIG['mesh_radii'], config.VALIDATION_CONFIG['mesh_angles']),
            boundary
        ])
        derivative_values = emb_deriv1(f, closed_mesh)
        pairing = transversality_pairing(f, boundary)
    except PoleError as e:
        logger.warning(f"Validation hit a pole: {e}")
        return ValidationReport(False, float('inf'), False, float('inf'), False, 0.0, False, None, False, 0.0,
                                pole_free_ok=False, pole_point=e.details.get('z'), grid_size=grid_size)

    deviation = float(np.max(np.abs(np.sum(np.abs(boundary_values) ** 2, axis=-1) - 1.0)))
    interior_norm = float(np.max(np.sum(np.abs(interior_values) ** 2, axis=-1)))
    interior_ok = interior_norm < 1.0
    sphere_ok = deviation <= config.tolerance('sphere_attachment') and interior_ok

    min_derivative = float(np.min(np.linalg.norm(derivative_values, axis=-1)))
    derivative_ok = min_derivative >= config.tolerance('derivative_min')

    min_a = float(np.min(pairing.real))
    transversal_ok = min_a > 0.0

    try:
        injective_ok, worst, seeds = _injectivity_scan(f)
    except PoleError as e:
        logger.warning(f"Injectivity scan hit a pole: {e}")
        injective_ok, worst, seeds = False, {'pole': e.details.get('z')}, 0

    report = ValidationReport(
        sphere_attachment_ok=sphere_ok,
        max_boundary_deviation=deviation,
        interior_ok=interior_ok,
        max_interior_norm_sq=interior_norm,
        derivative_nonvanishing_ok=derivative_ok,
        min_derivative_norm=min_derivative,
        injectivity_ok=injective_ok,
        worst_collision=worst,
        transversality_ok=transversal_ok,
        min_transversality=min_a,
        grid_size=grid_size,
        injectivity_seeds=seeds
    )
    logger.info(f"Validation finished: passed={report.passed}, failed={report.failed_checks()}")
    return report


@dataclass
class BoundaryPairData:
    """
    Expansion constants of f at a pair of boundary points.

    The pair (xi, zeta) is moved to (1, -1) by ``reduction``; with
    h = f o reduction the constants are A = <h(1), h'(1)>,
    B = -<h(-1), h'(-1)>, C = ||h'(1)||^2, D = ||h'(-1)||^2,
    E = <h'(1), h'(-1)>, F = <h(1), h''(1)>/2, G = <h(-1), h''(-1)>/2.
    """
    A: float
    B: float
    C: float
    D: float
    E: complex
    F: complex
    G: complex
    xi: complex
    zeta: complex
    reduction: Moebius
    is_crossing: bool = True
    crossing_residual: float = 0.0

    def to_dict(self) -> Dict:
        return {
            'A': self.A, 'B': self.B, 'C': self.C, 'D': self.D,
            'E': complex_to_pair(self.E), 'F': complex_to_pair(self.F), 'G': complex_to_pair(self.G),
            'xi': complex_to_pair(self.xi), 'zeta': complex_to_pair(self.zeta),
            'reduction': self.reduction.to_json(),
            'is_crossing': self.is_crossing,
            'crossing_residual': self.crossing_residual,
        }


def reduction_to_pair(xi: complex, zeta: complex) -> Moebius:
    """Automorphism with 1 -> xi, -1 -> zeta and i -> midpoint of the positive arc from xi to zeta."""
    start = np.angle(xi)
    arc = (np.angle(zeta) - start) % (2.0 * np.pi)
    midpoint = np.exp(1j * (start + arc / 2.0))
    return Moebius.from_boundary_triples((1.0, 1j, -1.0), (xi, midpoint, zeta))


def boundary_pair_data(f: EmbeddingMap, xi: complex, zeta: complex,
                       require_crossing: bool = True) -> BoundaryPairData:
    """
    Read the expansion constants A..G of f at the boundary pair (xi, zeta).

    Args:
        f: Embedding map
        xi: Boundary point playing the role of 1
        zeta: Boundary point playing the role of -1
        require_crossing: Raise unless f(xi) = f(zeta) within tolerance

    Returns:
        BoundaryPairData in the reduced coordinates

    Raises:
        NotACrossing: if the points coincide or (when required) do not cross
    """
    xi, zeta = complex(xi), complex(zeta)
    for point in (xi, zeta):
        if abs(abs(point) - 1.0) > config.tolerance('boundary_point'):
            raise ParamOutOfRange(f"Boundary point {point} is not unimodular")
    xi, zeta = xi / abs(xi), zeta / abs(zeta)
    if abs(xi - zeta) < config.tolerance('class_identity'):
        raise NotACrossing("A crossing pair needs two distinct boundary points",
                           {'xi': complex_to_pair(xi), 'zeta': complex_to_pair(zeta)})

    residual = float(np.linalg.norm(emb_eval(f, xi) - emb_eval(f, zeta)))
    crossing = residual <= config.tolerance('crossing_pair')
    if require_crossing and not crossing:
        raise NotACrossing(f"f(xi) and f(zeta) differ by {residual:.3e}",
                           {'xi': complex_to_pair(xi), 'zeta': complex_to_pair(zeta), 'residual': residual})

    mu = reduction_to_pair(xi, zeta)
    h = f if mu.is_identity() else precompose(f, mu)
    h1, hm1 = emb_eval(h, 1.0), emb_eval(h, -1.0)
    d1, dm1 = emb_deriv1(h, 1.0), emb_deriv1(h, -1.0)
    s1, sm1 = emb_deriv2(h, 1.0), emb_deriv2(h, -1.0)

    return BoundaryPairData(
        A=float(np.real(vector_inner(h1, d1))),
        B=float(-np.real(vector_inner(hm1, dm1))),
        C=float(np.real(vector_inner(d1, d1))),
        D=float(np.real(vector_inner(dm1, dm1))),
        E=complex(vector_inner(d1, dm1)),
        F=complex(vector_inner(h1, s1)) / 2.0,
        G=complex(vector_inner(hm1, sm1)) / 2.0,
        xi=xi,
        zeta=zeta,
        reduction=mu,
        is_crossing=crossing,
        crossing_residual=residual
    )
