"""
Second fundamental form of a map and the operators derived from it.

(∇F*)(X, Y) is evaluated with the closed coordinate formula

    (∇F*)(X,Y)^γ = X^i Y^j (∂_i∂_j F^γ + ᴺΓ^γ_ab ∂_iF^a ∂_jF^b − ᴹΓ^k_ij ∂_kF^γ)

and everything else (shape operator, normal connection, mean curvatures,
tension field, umbilicity) is built on it or on target covariant
derivatives of scenario vector fields.
"""

from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from scipy import linalg

from clairaut_maps.checks.tolerance import ResidualTolerance
from clairaut_maps.geometry import VectorField, projector
from clairaut_maps.models import CheckResult, FrameSplit, NotHorizontal, VNotNormal

from .smooth_map import SmoothMap

import logging
logger = logging.getLogger(__name__)

MEMBERSHIP_TOL = 1e-8


def _split(F: SmoothMap, point: Sequence[float], split: Optional[FrameSplit]) -> FrameSplit:
    return split if split is not None else F.split(point)


def range_projector(F: SmoothMap, point: Sequence[float], split: Optional[FrameSplit] = None) -> np.ndarray:
    """g2-orthogonal projector onto rangeF* at F(point)."""
    split = _split(F, point, split)
    return projector(split.range, F.target_metric(point))


def normal_projector(F: SmoothMap, point: Sequence[float], split: Optional[FrameSplit] = None) -> np.ndarray:
    """g2-orthogonal projector onto (rangeF*)⊥ at F(point)."""
    return np.eye(F.n) - range_projector(F, point, split)


def second_fundamental_tensor(F: SmoothMap, point: Sequence[float]) -> np.ndarray:
    """Array [γ, i, j] of (∇F*)(∂_i, ∂_j) on the full tangent space."""
    p = np.asarray(point, dtype=float)
    jac = F.differential(p)
    gamma_n = F.target_at(p).christoffel(F(p))
    gamma_m = F.source.christoffel(p)
    tensor = (F.component_hessians(p)
              + np.einsum('gab,ai,bj->gij', gamma_n, jac, jac)
              - np.einsum('gk,kij->gij', jac, gamma_m))
    return 0.5 * (tensor + np.transpose(tensor, (0, 2, 1)))


def require_horizontal(F: SmoothMap, point: Sequence[float], vector: np.ndarray,
                       split: Optional[FrameSplit] = None, tol: float = MEMBERSHIP_TOL):
    """
    Raises:
        NotHorizontal: if ``vector`` has a kerF* component above tolerance
    """
    split = _split(F, point, split)
    if split.kernel_dim == 0:
        return
    coefficients = split.kernel.T @ F.source.metric(point) @ vector
    magnitude = float(np.linalg.norm(coefficients))
    if magnitude > tol * max(1.0, float(np.linalg.norm(vector))):
        raise NotHorizontal(
            f"Vector {list(vector)} at {list(point)} has kernel component {magnitude:.3e}")


def require_normal(F: SmoothMap, point: Sequence[float], vector: np.ndarray,
                   split: Optional[FrameSplit] = None, tol: float = MEMBERSHIP_TOL):
    """
    Raises:
        VNotNormal: if ``vector`` has a rangeF* component above tolerance
    """
    split = _split(F, point, split)
    coefficients = split.range.T @ F.target_metric(point) @ vector
    magnitude = float(np.linalg.norm(coefficients))
    if magnitude > tol * max(1.0, float(np.linalg.norm(vector))):
        raise VNotNormal(
            f"Vector {list(vector)} at F({list(point)}) has range component {magnitude:.3e}")


def second_fundamental_form(F: SmoothMap, point: Sequence[float], x: np.ndarray, y: np.ndarray,
                            split: Optional[FrameSplit] = None, check: bool = True) -> np.ndarray:
    """
    (∇F*)(X, Y) for horizontal X, Y.

    Raises:
        NotHorizontal: if X or Y has a kernel component
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if check:
        split = _split(F, point, split)
        require_horizontal(F, point, x, split)
        require_horizontal(F, point, y, split)
    return np.einsum('gij,i,j->g', second_fundamental_tensor(F, point), x, y)


def shape_operator(F: SmoothMap, point: Sequence[float], field: VectorField, x: np.ndarray,
                   split: Optional[FrameSplit] = None) -> np.ndarray:
    """
    S_V F*X = −(rangeF* part of ∇ᴺ_{F*X} V) for a normal field V on the target.

    Raises:
        VNotNormal: if V(F(point)) has a range component
    """
    split = _split(F, point, split)
    q = F(point)
    require_normal(F, point, field.value(q), split)
    nabla = F.target_at(point).covariant_derivative(q, field, F.push_forward(point, x))
    return -range_projector(F, point, split) @ nabla


def shape_operator_dual(F: SmoothMap, point: Sequence[float], v: np.ndarray, x: np.ndarray,
                        split: Optional[FrameSplit] = None) -> np.ndarray:
    """
    S_V F*X from g2(S_V F*X, F*Y) = g2(V, (∇F*)(X, Y)), needing V only at F(point).
    """
    split = _split(F, point, split)
    g2 = F.target_metric(point)
    tensor = second_fundamental_tensor(F, point)
    jac = F.differential(point)
    result = np.zeros(F.n)
    for a in range(split.rank):
        h = split.horizontal[:, a]
        form = np.einsum('gij,i,j->g', tensor, x, h)
        result += float(v @ g2 @ form) * (jac @ h)
    return result


def normal_connection(F: SmoothMap, point: Sequence[float], x: np.ndarray, field: VectorField,
                      split: Optional[FrameSplit] = None) -> np.ndarray:
    """∇^{F⊥}_X V: the (rangeF*)⊥ part of ∇ᴺ_{F*X} V."""
    split = _split(F, point, split)
    q = F(point)
    nabla = F.target_at(point).covariant_derivative(q, field, F.push_forward(point, x))
    return normal_projector(F, point, split) @ nabla


def mean_curvature_range(F: SmoothMap, point: Sequence[float],
                         split: Optional[FrameSplit] = None) -> np.ndarray:
    """H2: average of the normal part of (∇F*)(Xa, Xa) over an orthonormal horizontal basis."""
    split = _split(F, point, split)
    if split.rank == 0:
        return np.zeros(F.n)
    tensor = second_fundamental_tensor(F, point)
    trace = np.einsum('gij,ia,ja->g', tensor, split.horizontal, split.horizontal)
    return normal_projector(F, point, split) @ trace / split.rank


def mean_curvature_fiber(F: SmoothMap, point: Sequence[float],
                         split: Optional[FrameSplit] = None) -> np.ndarray:
    """
    H: mean curvature of the fibre through ``point`` as a submanifold of M.

    Along a fibre F*U vanishes identically, so (∇F*)(U, U) = −F*(∇ᴹ_U U); the
    horizontal part of ∇ᴹ_U U is recovered by solving against F* restricted
    to (kerF*)⊥.
    """
    split = _split(F, point, split)
    if split.kernel_dim == 0:
        return np.zeros(F.m)
    tensor = second_fundamental_tensor(F, point)
    trace = np.einsum('gij,ia,ja->g', tensor, split.kernel, split.kernel) / split.kernel_dim
    images = F.differential(point) @ split.horizontal
    coefficients = linalg.lstsq(images, -trace)[0]
    return split.horizontal @ coefficients


def tension_field(F: SmoothMap, point: Sequence[float],
                  split: Optional[FrameSplit] = None) -> np.ndarray:
    """τ(F): trace of (∇F*) over an orthonormal basis of T_pM."""
    split = _split(F, point, split)
    basis = np.hstack([split.kernel, split.horizontal])
    return np.einsum('gij,ia,ja->g', second_fundamental_tensor(F, point), basis, basis)


def tension_field_from_mean_curvatures(F: SmoothMap, point: Sequence[float],
                                       split: Optional[FrameSplit] = None) -> np.ndarray:
    """τ(F) = −dim(kerF*)·F*(H) + dim(rangeF*)·H2."""
    split = _split(F, point, split)
    fiber = mean_curvature_fiber(F, point, split)
    return (-split.kernel_dim * F.push_forward(point, fiber)
            + split.rank * mean_curvature_range(F, point, split))


def normality_defect(F: SmoothMap, point: Sequence[float],
                     split: Optional[FrameSplit] = None) -> float:
    """max |g2((∇F*)(Xa, Xb), F*Xc)| over an orthonormal horizontal basis."""
    split = _split(F, point, split)
    if split.rank == 0:
        return 0.0
    tensor = second_fundamental_tensor(F, point)
    images = F.differential(point) @ split.horizontal
    forms = np.einsum('gij,ia,jb->gab', tensor, split.horizontal, split.horizontal)
    pairings = np.einsum('gab,gh,hc->abc', forms, F.target_metric(point), images)
    return float(np.max(np.abs(pairings)))


def umbilical_defect(F: SmoothMap, point: Sequence[float],
                     split: Optional[FrameSplit] = None) -> float:
    """max ‖(∇F*)(Xa, Xb)⊥ − δab H2‖ over an orthonormal horizontal basis."""
    split = _split(F, point, split)
    if split.rank == 0:
        return 0.0
    g2 = F.target_metric(point)
    normal = normal_projector(F, point, split)
    tensor = second_fundamental_tensor(F, point)
    h2 = mean_curvature_range(F, point, split)
    worst = 0.0
    for a in range(split.rank):
        for b in range(split.rank):
            form = normal @ np.einsum('gij,i,j->g', tensor, split.horizontal[:, a],
                                      split.horizontal[:, b])
            gap = form - (1.0 if a == b else 0.0) * h2
            worst = max(worst, float(np.sqrt(max(gap @ g2 @ gap, 0.0))))
    return worst


def normal_coefficients(F: SmoothMap, point: Sequence[float],
                        split: Optional[FrameSplit] = None) -> List[List[float]]:
    """g2((∇F*)(Xa, Xa), Nb) for each horizontal Xa and normal basis vector Nb."""
    split = _split(F, point, split)
    g2 = F.target_metric(point)
    tensor = second_fundamental_tensor(F, point)
    rows = []
    for a in range(split.rank):
        h = split.horizontal[:, a]
        form = np.einsum('gij,i,j->g', tensor, h, h)
        rows.append([float(form @ g2 @ split.normal[:, b]) for b in range(split.normal_dim)])
    return rows


def second_fundamental_check(F: SmoothMap, points: Sequence[Sequence[float]],
                             tolerance: float = 1e-9) -> CheckResult:
    """Symmetry and normality of (∇F*) on horizontal pairs."""
    matcher = ResidualTolerance(tolerance)
    symmetry: List[float] = []
    normality: List[float] = []
    coefficients: List[List[List[float]]] = []
    for p in points:
        split = F.split(p)
        tensor = second_fundamental_tensor(F, p)
        forms = np.einsum('gij,ia,jb->gab', tensor, split.horizontal, split.horizontal)
        symmetry.append(float(np.max(np.abs(forms - np.transpose(forms, (0, 2, 1))))) if split.rank else 0.0)
        normality.append(normality_defect(F, p, split))
        coefficients.append(normal_coefficients(F, p, split))
    summaries = [matcher.summarize('symmetry', symmetry),
                 matcher.summarize('normality', normality)]
    values: Dict[str, Any] = {'map': F.name, 'normal_coefficients': coefficients[0] if coefficients else []}
    return matcher.build_result('second_fundamental_form',
                                'Eq (2.3): (∇F*)(X,Y) has no component in rangeF*',
                                summaries, values=values)


def umbilical_check(F: SmoothMap, points: Sequence[Sequence[float]],
                    tolerance: float = 1e-8) -> CheckResult:
    """Lemma 2.1 criterion: (∇F*)(X, Y) = g1(X, Y) H2 on horizontal pairs."""
    matcher = ResidualTolerance(tolerance)
    defects = [umbilical_defect(F, p) for p in points]
    h2 = [mean_curvature_range(F, p) for p in points]
    summary = matcher.summarize('umbilical', defects)
    return matcher.build_result('umbilical', 'Lemma 2.1: (∇F*)(X,Y) = g1(X,Y)H2', [summary],
                                values={'map': F.name,
                                        'mean_curvature_range': [float(c) for c in h2[0]] if h2 else []})


def tension_check(F: SmoothMap, points: Sequence[Sequence[float]],
                  tolerance: float = 1e-8) -> CheckResult:
    """Agreement of the direct trace with −r·F*(H) + (m−r)·H2."""
    matcher = ResidualTolerance(tolerance)
    gaps: List[float] = []
    norms: List[float] = []
    for p in points:
        split = F.split(p)
        direct = tension_field(F, p, split)
        assembled = tension_field_from_mean_curvatures(F, p, split)
        g2 = F.target_metric(p)
        gap = direct - assembled
        gaps.append(float(np.sqrt(max(gap @ g2 @ gap, 0.0))))
        norms.append(float(np.sqrt(max(direct @ g2 @ direct, 0.0))))
    summary = matcher.summarize('two_route', gaps)
    harmonic = bool(norms) and max(norms) < tolerance
    return matcher.build_result('tension_field', 'Lemma 3.2: τ(F) = −rF*(H) + (m−r)H2', [summary],
                                values={'map': F.name, 'max_tension_norm': max(norms) if norms else 0.0,
                                        'harmonic': harmonic})
