"""Commuting Lax flows on the twisted loop algebra and their certification.

The element xi = sum lambda^j xi_j evolves by d xi/dz = [xi, A(xi)] with
A(xi) = lambda * xi_d + r * xi_{d-1} (r = 1/2 for the G/T case).  The real
flows are X = F_z + F_zbar, Y = i(F_z - F_zbar) where F_z = [xi, A] and
F_zbar is its reality dual; they commute, so integrating an x-row and then
the y-columns yields a well-defined planar field up to O(h^4).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .chevalley import AlgebraElement, ChevalleyAlgebra
from .coxeter import (GradingProjector, LoopElement, cyclic_flags,
                      g1_indices, loop_bracket)
from .involution import AntilinearConjugation


class FlowDomainError(ValueError):
    """Invalid flow parameters (degree, grid, grading)."""


@dataclass
class ResidualReport:
    name: str
    sup: float
    order: Optional[float] = None
    drift: Optional[float] = None
    details: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.sup < 0:
            raise ValueError("residual norms must be nonnegative")


def conjugation_matrix(conj: AntilinearConjugation) -> np.ndarray:
    """Float matrix of the linear part of an antilinear conjugation."""
    return np.array(conj.linear_part.matrix(), dtype=float)


@dataclass
class FlowSpec:
    alg: ChevalleyAlgebra
    conj: AntilinearConjugation
    d: int
    xi0: LoopElement
    lx: float = 1.0
    ly: float = 1.0
    h: float = 0.01
    r: float = 0.5
    blowup_bound: float = 1e12

    def __post_init__(self):
        k = self.alg.rs.coxeter_number
        if self.d % k != 1 % k:
            raise FlowDomainError(f"d = {self.d} must be 1 mod k = {k}")
        if self.xi0.d != self.d:
            raise FlowDomainError("initial loop element has wrong degree bound")


@dataclass
class FieldGrid:
    alg: ChevalleyAlgebra
    d: int
    h: float
    r: float
    xi: np.ndarray                    # (nx+1, ny+1, 2d+1, dim)
    conj_matrix: np.ndarray
    projection_defect: float = 0.0
    truncated_at: Optional[Tuple[int, int]] = None

    @property
    def nx(self) -> int:
        return self.xi.shape[0] - 1

    @property
    def ny(self) -> int:
        return self.xi.shape[1] - 1

    def loop_at(self, ix: int, iy: int) -> LoopElement:
        return LoopElement(self.alg, self.d, self.xi[ix, iy].copy())

    def coefficient(self, j: int) -> np.ndarray:
        """Grid of the lambda^j coefficient, shape (nx+1, ny+1, dim)."""
        return self.xi[:, :, j + self.d, :]

    def reality_defect(self) -> float:
        worst = 0.0
        for j in range(0, self.d + 1):
            want = np.einsum("kl,xyl->xyk", self.conj_matrix,
                             np.conj(self.coefficient(j)))
            worst = max(worst, float(np.max(np.abs(self.coefficient(-j) - want))))
        return worst

    def grading_defect(self) -> float:
        proj = GradingProjector(self.alg)
        worst = 0.0
        for j in range(-self.d, self.d + 1):
            bad = self.coefficient(j)[..., ~proj.mask(j)]
            if bad.size:
                worst = max(worst, float(np.max(np.abs(bad))))
        return worst


# -- vector fields ---------------------------------------------------


def _bracket_batch(struct: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.einsum("ijk,...i,...j->...k", struct, u, v)


def _f_z(state: np.ndarray, struct: np.ndarray, d: int, r: float) -> np.ndarray:
    """F_z = [xi, lambda xi_d + r xi_{d-1}], truncated to |j| <= d (the
    lambda^{d+1} coefficient is [xi_d, xi_d] = 0)."""
    xd = state[..., 2 * d, :]
    xdm1 = state[..., 2 * d - 1, :]
    out = np.zeros_like(state)
    for j in range(-d, d + 1):
        acc = r * _bracket_batch(struct, state[..., j + d, :], xdm1)
        if -d <= j - 1:
            acc = acc + _bracket_batch(struct, state[..., j - 1 + d, :], xd)
        out[..., j + d, :] = acc
    return out


def _conj_dual(f: np.ndarray, conj_matrix: np.ndarray, d: int) -> np.ndarray:
    """The loop element with coefficient j equal to conj(f_{-j})."""
    out = np.empty_like(f)
    for j in range(-d, d + 1):
        out[..., j + d, :] = np.einsum("kl,...l->...k", conj_matrix,
                                       np.conj(f[..., d - j, :]))
    return out


def _xy_fields(state: np.ndarray, struct: np.ndarray, conj_matrix: np.ndarray,
               d: int, r: float) -> Tuple[np.ndarray, np.ndarray]:
    fz = _f_z(state, struct, d, r)
    fzb = _conj_dual(fz, conj_matrix, d)
    return fz + fzb, 1j * (fz - fzb)


def lax_field(xi: LoopElement, conj: AntilinearConjugation,
              r: float = 0.5) -> Tuple[LoopElement, LoopElement]:
    """(X(xi), Y(xi)) as loop elements of the same degree bound."""
    alg = xi.alg
    k = alg.rs.coxeter_number
    if xi.d % k != 1 % k:
        raise FlowDomainError(f"d = {xi.d} must be 1 mod k = {k}")
    struct = alg.structure_tensor()
    cm = conjugation_matrix(conj)
    x, y = _xy_fields(xi.coeffs[np.newaxis], struct, cm, xi.d, r)
    return (LoopElement(alg, xi.d, x[0]), LoopElement(alg, xi.d, y[0]))


def _rk4(state: np.ndarray, h: float,
         f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    k1 = f(state)
    k2 = f(state + 0.5 * h * k1)
    k3 = f(state + 0.5 * h * k2)
    k4 = f(state + h * k3)
    return state + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _grading_mask(alg: ChevalleyAlgebra, d: int) -> np.ndarray:
    proj = GradingProjector(alg)
    return np.stack([proj.mask(j) for j in range(-d, d + 1)])


def integrate_flow(spec: FlowSpec) -> FieldGrid:
    """RK4 along the x-row through the origin, then along every column.

    Each step is re-projected onto the twisted grading (defect recorded);
    any coefficient magnitude above the blow-up bound truncates the grid
    with the location recorded.
    """
    alg, d, r, h = spec.alg, spec.d, spec.r, spec.h
    struct = alg.structure_tensor()
    cm = conjugation_matrix(spec.conj)
    nx = round(spec.lx / h)
    ny = round(spec.ly / h)
    mask = _grading_mask(alg, d)
    xi = np.zeros((nx + 1, ny + 1, 2 * d + 1, alg.dim), dtype=complex)

    defect = 0.0
    truncated: Optional[Tuple[int, int]] = None

    def project(state: np.ndarray) -> np.ndarray:
        nonlocal defect
        bad = np.where(mask, 0, state)
        if bad.size:
            defect = max(defect, float(np.max(np.abs(bad))))
        return np.where(mask, state, 0)

    state = project(spec.xi0.coeffs.astype(complex))
    if float(np.max(np.abs(state))) > spec.blowup_bound:
        grid = FieldGrid(alg, d, h, r, xi, cm, defect, (0, 0))
        return grid
    xi[0, 0] = state

    x_rhs = lambda s: _xy_fields(s, struct, cm, d, r)[0]
    y_rhs = lambda s: _xy_fields(s, struct, cm, d, r)[1]

    for ix in range(1, nx + 1):
        state = project(_rk4(state, h, x_rhs))
        if float(np.max(np.abs(state))) > spec.blowup_bound:
            truncated = (ix, 0)
            break
        xi[ix, 0] = state

    if truncated is None:
        col = xi[:, 0].copy()
        for iy in range(1, ny + 1):
            col = project(_rk4(col, h, y_rhs))
            peak = np.max(np.abs(col), axis=(1, 2))
            if float(np.max(peak)) > spec.blowup_bound:
                truncated = (int(np.argmax(peak)), iy)
                break
            xi[:, iy] = col

    return FieldGrid(alg, d, h, r, xi, cm, defect, truncated)


# -- certification ---------------------------------------------------


def conserved_drift(grid: FieldGrid,
                    lam_samples: Sequence[complex] = (1.0,)) -> ResidualReport:
    """Grid drift of the Killing sum and of adjoint trace powers."""
    alg = grid.alg
    kmat = np.array(alg.killing_gram(), dtype=float)
    q = np.zeros(grid.xi.shape[:2], dtype=complex)
    for j in range(-grid.d, grid.d + 1):
        q += np.einsum("xyi,ij,xyj->xy", grid.coefficient(j), kmat,
                       grid.coefficient(-j))
    scale = max(1.0, float(abs(q[0, 0])))
    drift = float(np.max(np.abs(q - q[0, 0]))) / scale

    struct = alg.structure_tensor()
    details: Dict[str, float] = {"killing_sum_drift": drift}
    for li, lam in enumerate(lam_samples):
        v = grid.xi  # (nx,ny,2d+1,dim)
        powers = lam ** np.arange(-grid.d, grid.d + 1)
        ev = np.einsum("p,xypi->xyi", powers, v)
        ad = np.einsum("ijk,xyi->xykj", struct, ev)
        t2 = np.trace(ad @ ad, axis1=2, axis2=3)
        t4 = np.trace(ad @ ad @ ad @ ad, axis1=2, axis2=3)
        for name, t in (("tr2", t2), ("tr4", t4)):
            s = max(1.0, float(abs(t[0, 0])))
            details[f"{name}_drift_lam{li}"] = float(np.max(np.abs(t - t[0, 0]))) / s
    sup = max(details.values())
    return ResidualReport("conserved_drift", sup=sup, drift=drift, details=details)


def commutation_defect(spec: FlowSpec, probe: Tuple[float, float]) -> float:
    """|flow x-then-y minus y-then-x| at the probe point."""
    px, py = probe
    if not (0 <= px <= spec.lx and 0 <= py <= spec.ly):
        raise FlowDomainError("probe outside grid")
    alg, d, r, h = spec.alg, spec.d, spec.r, spec.h
    struct = alg.structure_tensor()
    cm = conjugation_matrix(spec.conj)
    nx, ny = round(px / h), round(py / h)
    x_rhs = lambda s: _xy_fields(s, struct, cm, d, r)[0]
    y_rhs = lambda s: _xy_fields(s, struct, cm, d, r)[1]

    def run(first, n1, second, n2):
        s = spec.xi0.coeffs.astype(complex)
        for _ in range(n1):
            s = _rk4(s, h, first)
        for _ in range(n2):
            s = _rk4(s, h, second)
        return s

    a = run(x_rhs, nx, y_rhs, ny)
    b = run(y_rhs, ny, x_rhs, nx)
    return float(np.max(np.abs(a - b)))


def _fd4(arr: np.ndarray, axis: int, h: float) -> np.ndarray:
    """4th-order central first derivative; output trimmed by 2 on `axis`
    and on the other spatial axis for alignment with mixed use."""
    a = np.moveaxis(arr, axis, 0)
    out = (a[:-4] - 8 * a[1:-3] + 8 * a[3:-1] - a[4:]) / (12.0 * h)
    return np.moveaxis(out, 0, axis)


def _trim(arr: np.ndarray, axis: int, n: int = 2) -> np.ndarray:
    sl = [slice(None)] * arr.ndim
    sl[axis] = slice(n, arr.shape[axis] - n)
    return arr[tuple(sl)]


def dz_dzbar(arr: np.ndarray, h: float) -> Tuple[np.ndarray, np.ndarray]:
    """(d/dz, d/dzbar) of a grid array (x first axis, y second), 4th-order
    central differences; output trimmed by 2 on both spatial axes."""
    dx = _trim(_fd4(arr, 0, h), 1)
    dy = _trim(_fd4(arr, 1, h), 0)
    return 0.5 * (dx - 1j * dy), 0.5 * (dx + 1j * dy)


def _phi_parts(grid: FieldGrid, lam: complex) -> Tuple[np.ndarray, np.ndarray]:
    d, r = grid.d, grid.r
    phi_z = lam * grid.coefficient(d) + r * grid.coefficient(d - 1)
    phi_zb = grid.coefficient(-d) / lam + np.conj(r) * grid.coefficient(-(d - 1))
    return phi_z, phi_zb


def _mc_sup(grid: FieldGrid, lam_samples: Sequence[complex]) -> float:
    struct = grid.alg.structure_tensor()
    worst = 0.0
    for lam in lam_samples:
        phi_z, phi_zb = _phi_parts(grid, lam)
        dzb_phi_z = dz_dzbar(phi_z, grid.h)[1]
        dz_phi_zb = dz_dzbar(phi_zb, grid.h)[0]
        comm = _bracket_batch(struct, _trim(_trim(phi_z, 0), 1),
                              _trim(_trim(phi_zb, 0), 1))
        res = dz_phi_zb - dzb_phi_z + comm
        worst = max(worst, float(np.max(np.abs(res))))
    return worst


def mc_residual(grids: Union[FieldGrid, Sequence[FieldGrid]],
                lam_samples: Sequence[complex]) -> ResidualReport:
    """Maurer-Cartan residual of the adapted connection form, sup over the
    interior grid and the lambda samples; with two grid resolutions the
    measured convergence order is included."""
    if isinstance(grids, FieldGrid):
        grids = [grids]
    grids = sorted(grids, key=lambda g: -g.h)
    sups = [_mc_sup(g, lam_samples) for g in grids]
    order = None
    if len(grids) >= 2 and sups[-1] > 0:
        h0, h1 = grids[-2].h, grids[-1].h
        order = float(np.log(sups[-2] / sups[-1]) / np.log(h0 / h1))
    details = {f"sup_h{g.h:g}": s for g, s in zip(grids, sups)}
    return ResidualReport("mc_residual", sup=sups[-1], order=order, details=details)


@dataclass
class AdaptedReport:
    ok: bool
    max_deviation: float
    cyclic: bool


def adapted_check(grid: FieldGrid, lam: complex = 1.0,
                  phi_z: Optional[np.ndarray] = None,
                  phi_zb: Optional[np.ndarray] = None,
                  tol: float = 1e-12) -> AdaptedReport:
    """Confirm a stored (or supplied) connection form is the adapted
    combination of the stored xi; flags a non-cyclic top coefficient."""
    want_z, want_zb = _phi_parts(grid, lam)
    dev = 0.0
    if phi_z is not None:
        dev = max(dev, float(np.max(np.abs(phi_z - want_z))))
    if phi_zb is not None:
        dev = max(dev, float(np.max(np.abs(phi_zb - want_zb))))
    xd = AlgebraElement.from_dense(grid.alg, grid.xi[0, 0, 2 * grid.d])
    try:
        cyclic, _ = cyclic_flags(xd)
    except Exception:
        cyclic = False
    return AdaptedReport(dev <= tol, dev, cyclic)


# -- seed elements ---------------------------------------------------


def vacuum_coefficients(alg: ChevalleyAlgebra, t: float = 1.0) -> List[float]:
    """r_j > 0 with |r_j|^2 = t m_j (alpha_j, alpha_j)/2, which makes
    [W, conj W] = -sum |r_j|^2 H_{alpha_j} = -t sum m_j alpha_j-sharp = 0."""
    rs = alg.rs
    out = []
    for j, root in enumerate(rs.extended_simple_roots()):
        mark = 1 if j == 0 else rs.marks[j - 1]
        sq = rs.root_eval(root, rs.killing_dual(root))  # (alpha, alpha)
        out.append(float(np.sqrt(t * mark * float(sq) / 2.0)))
    return out


def cyclic_from_coefficients(alg: ChevalleyAlgebra,
                             r: Sequence[complex]) -> AlgebraElement:
    """W = sum_j r_j R_{alpha_j} over the extended simple set."""
    ext = alg.rs.extended_simple_roots()
    if len(r) != len(ext):
        raise ValueError("need N+1 coefficients")
    coeffs = {alg.root_vector_index(root): complex(c)
              for root, c in zip(ext, r) if c != 0}
    return AlgebraElement(alg, coeffs)


def vacuum_loop(alg: ChevalleyAlgebra, conj: AntilinearConjugation,
                d: int = 1, t: float = 1.0) -> LoopElement:
    """xi = lambda^d W + lambda^{-d} conj(W), a fixed point of the flows."""
    w = cyclic_from_coefficients(alg, vacuum_coefficients(alg, t))
    wbar = conj.apply(w)
    return LoopElement.from_elements(alg, d, {d: w, -d: wbar})


def random_graded_loop(alg: ChevalleyAlgebra, conj: AntilinearConjugation,
                       d: int, seed: int = 0,
                       amplitude: float = 0.25) -> LoopElement:
    """Random seed of degree bound d with a cyclic top coefficient, exact
    grading, and exact reality.

    Coefficients for 0 <= j < d are random in g_{j mod k}; xi_0 is
    symmetrized to be conj-fixed and the negative degrees are the conj
    images of the positive ones.
    """
    rng = np.random.default_rng(seed)
    proj = GradingProjector(alg)
    cm = conjugation_matrix(conj)
    xi = LoopElement.zero(alg, d)
    top = cyclic_from_coefficients(
        alg, amplitude * (0.5 + rng.random(alg.rank + 1)) *
        np.exp(2j * np.pi * rng.random(alg.rank + 1)))
    xi.coeffs[2 * d] = top.to_dense()
    for j in range(0, d):
        v = amplitude * (rng.standard_normal(alg.dim) +
                         1j * rng.standard_normal(alg.dim))
        xi.coeffs[j + d] = np.where(proj.mask(j), v, 0)
    xi.coeffs[d] = 0.5 * (xi.coeffs[d] + cm @ np.conj(xi.coeffs[d]))
    for j in range(1, d + 1):
        xi.coeffs[d - j] = cm @ np.conj(xi.coeffs[d + j])
    return xi


def random_cyclic_loop(alg: ChevalleyAlgebra, conj: AntilinearConjugation,
                       d: int = 1, seed: int = 0,
                       amplitude: float = 0.25) -> LoopElement:
    """Random cyclic seed: xi_d cyclic in g_1 with coefficients of the
    given amplitude, xi_0 a small i*t Cartan part, reality enforced."""
    rng = np.random.default_rng(seed)
    ext = alg.rs.extended_simple_roots()
    r = amplitude * (0.5 + rng.random(len(ext))) * \
        np.exp(2j * np.pi * rng.random(len(ext)))
    w = cyclic_from_coefficients(alg, r)
    parts = {d: w, -d: conj.apply(w)}
    h0 = 1j * amplitude * rng.standard_normal(alg.rank)
    x0 = AlgebraElement(alg, {i: h0[i] for i in range(alg.rank)})
    parts[0] = x0
    xi = LoopElement.from_elements(alg, d, parts)
    # xi_0 in i*t is conj-fixed for conjugations acting as -1 on the real
    # Cartan; verify rather than assume
    cm = conjugation_matrix(conj)
    if LoopElement(alg, d, xi.coeffs).reality_defect(cm) > 1e-12:
        parts[0] = AlgebraElement(alg, {})
        xi = LoopElement.from_elements(alg, d, parts)
    return xi
