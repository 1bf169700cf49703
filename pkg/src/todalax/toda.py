"""Affine Toda field equation, Toda frames and the formal Killing recursion.

A cyclic element W = sum r_j R_{alpha_j} over the extended simple roots,
together with an i*t-valued field Omega, yields the Toda frame connection
phi = (Omega_z + Ad_{exp Omega} W) dz + (-Omega_zbar + Ad_{exp -Omega}
conj(W)) dzbar.  Flatness of phi for all lambda is equivalent to the
affine Toda field equation; this module evaluates its residuals in two
algebraically identical forms, reconstructs Omega from integrated Lax
flow grids, and runs the gauge recursion that produces adapted formal
Killing fields.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import cumulative_simpson

from .chevalley import ChevalleyAlgebra
from .coxeter import GradingProjector, ad_exp_cartan_multipliers
from .involution import AntilinearConjugation
from .laxflow import (FieldGrid, ResidualReport, _bracket_batch,
                      cyclic_from_coefficients, dz_dzbar, _trim)


class TodaDomainError(ValueError):
    """Inconsistent Toda inputs (grading, reality, grid shapes)."""


# -- cyclic data -----------------------------------------------------


@dataclass
class CyclicData:
    """A cyclic element with its conjugation bookkeeping.

    masses are m_j = r_j conj(r_{rho(j)}) with rho the reality
    permutation of the conjugation (the identity for the compact form,
    giving the classical positive masses |r_j|^2); the direction vectors
    D_j make the dual form of the Toda equation match the bracket form
    exactly: [W-part_j, conj(W)-part] = m_j D_j with D_j = s H_{alpha_j}
    where s is the conjugation sign on the paired root vector.
    """

    alg: ChevalleyAlgebra
    conj: AntilinearConjugation
    r: Tuple[complex, ...]

    def __post_init__(self):
        rs = self.alg.rs
        ext = rs.extended_simple_roots()
        if len(self.r) != len(ext):
            raise TodaDomainError("need one coefficient per extended node")
        self.W = cyclic_from_coefficients(self.alg, self.r)
        # reality permutation rho and signs: conj(R_{alpha_j}) = s_j R_{-alpha_rho(j)}
        index = {(-root).coeffs: j for j, root in enumerate(ext)}
        self.rho: List[int] = []
        self.signs: List[complex] = []
        for root in ext:
            img = self.conj.apply(self.alg.root_vector(root))
            if len(img.coeffs) != 1:
                raise TodaDomainError("conjugation does not permute root spaces")
            (idx, val), = img.coeffs.items()
            beta = self.alg.basis_root(idx)
            if beta is None or beta.coeffs not in index:
                raise TodaDomainError(
                    "conjugation does not preserve the extended simple set")
            self.rho.append(index[beta.coeffs])
            self.signs.append(complex(val))
        self.masses = tuple(
            complex(self.r[j]) * np.conj(self.r[self.rho[j]])
            for j in range(len(ext)))
        # D_j in Cartan coordinates: s_{rho(j)} * coroot(alpha_j)
        n = rs.rank
        self.directions = np.zeros((len(ext), n), dtype=complex)
        for j, root in enumerate(ext):
            h = rs.coroot(root)
            self.directions[j] = [complex(self.signs[self.rho[j]]) * float(c)
                                  for c in h.coeffs]
        # pairing rows over the extended simple set
        self.pairings = np.array(
            [[rs.cartan_pairing(root, l) for l in range(n)] for root in ext],
            dtype=float)

    @property
    def is_cyclic(self) -> bool:
        vals = np.abs(np.array(self.r, dtype=complex))
        top = vals.max() if vals.size else 0.0
        return bool(top > 0 and np.all(vals > 1e-12 * top))

    def mass_reality_defect(self) -> float:
        """sup_j |m_{rho(j)} - conj(m_j)| (the generalized Toda hypothesis)."""
        return max(abs(self.masses[self.rho[j]] - np.conj(self.masses[j]))
                   for j in range(len(self.masses)))

    def r_invariant(self) -> complex:
        """r_0 * prod_j r_j^{m_j} with the diagram marks as exponents."""
        marks = (1,) + tuple(self.alg.rs.marks)
        out = complex(1.0)
        for j, c in enumerate(self.r):
            out *= complex(c) ** marks[j]
        return out


@dataclass
class TodaField:
    """An i*t-valued field on a uniform grid (real coordinates in the
    coroot basis H_1..H_N, so that conj(Omega) = -Omega exactly)."""

    alg: ChevalleyAlgebra
    h: float
    omega: np.ndarray                       # (nx+1, ny+1, rank), real
    omega_z: Optional[np.ndarray] = None    # stored exactly when known
    omega_zbar: Optional[np.ndarray] = None
    loop_defect: float = 0.0
    reality_defect: float = 0.0

    def __post_init__(self):
        if np.max(np.abs(np.imag(self.omega))) > 1e-10:
            raise TodaDomainError("Omega must be i*t-valued (real coordinates)")
        self.omega = np.real(self.omega).astype(float)

    def derivatives(self) -> Tuple[np.ndarray, np.ndarray, int]:
        """(Omega_z, Omega_zbar, margin): stored exact values when
        available, else 4th-order finite differences (margin 2)."""
        if self.omega_z is not None and self.omega_zbar is not None:
            return self.omega_z, self.omega_zbar, 0
        oz, ozb = dz_dzbar(self.omega.astype(complex), self.h)
        return _pad2(oz), _pad2(ozb), 2


def _pad2(arr: np.ndarray) -> np.ndarray:
    out = np.zeros((arr.shape[0] + 4, arr.shape[1] + 4) + arr.shape[2:],
                   dtype=arr.dtype)
    out[2:-2, 2:-2] = arr
    return out


def _interior(arr: np.ndarray, margin: int) -> np.ndarray:
    if margin == 0:
        return arr
    return arr[margin:-margin, margin:-margin]


# -- the two right-hand sides ----------------------------------------


def _alpha_eval(data: CyclicData, omega: np.ndarray) -> np.ndarray:
    """alpha_j(Omega) over the grid, shape (..., N+1)."""
    return np.einsum("jl,...l->...j", data.pairings, omega)


def dual_rhs(omega: np.ndarray, data: CyclicData) -> np.ndarray:
    """sum_j m_j e^{2 alpha_j(Omega)} D_j in Cartan coordinates."""
    expo = np.exp(2.0 * _alpha_eval(data, omega))
    masses = np.array(data.masses, dtype=complex)
    return np.einsum("...j,j,jl->...l", expo, masses, data.directions)


def _ad_exp_apply(alg: ChevalleyAlgebra, omega: np.ndarray, vec: np.ndarray,
                  sign: float = 1.0) -> np.ndarray:
    """Ad_{exp(sign * Omega)} applied to a fixed algebra vector, per node."""
    p, root_slice = ad_exp_cartan_multipliers(alg)
    out = np.broadcast_to(vec, omega.shape[:-1] + (alg.dim,)).astype(complex).copy()
    mult = np.exp(sign * np.einsum("al,...l->...a", p, omega.astype(complex)))
    out[..., root_slice] = out[..., root_slice] * mult
    return out


def adw_field(omega: np.ndarray, data: CyclicData) -> np.ndarray:
    """Ad_{exp Omega} W on the grid."""
    return _ad_exp_apply(data.alg, omega, data.W.to_dense(), 1.0)


def adw_bar_field(omega: np.ndarray, data: CyclicData) -> np.ndarray:
    """Ad_{exp -Omega} conj(W) on the grid."""
    wbar = data.conj.apply(data.W).to_dense()
    return _ad_exp_apply(data.alg, omega, wbar, -1.0)


def bracket_rhs(omega: np.ndarray, data: CyclicData) -> np.ndarray:
    """[Ad_{exp Omega} W, Ad_{exp -Omega} conj(W)] per node; returned in
    Cartan coordinates (the off-Cartan part, which vanishes identically,
    is dropped after being measured)."""
    alg = data.alg
    struct = alg.structure_tensor()
    b = _bracket_batch(struct, adw_field(omega, data), adw_bar_field(omega, data))
    return b[..., :alg.rank], float(np.max(np.abs(b[..., alg.rank:])))


def toda_bracket_form(omega_field: TodaField, data: CyclicData) -> ResidualReport:
    """Pointwise agreement of the bracket form with the dual-vector form
    of the Toda right-hand side (algebraically identical)."""
    cart, off = bracket_rhs(omega_field.omega, data)
    dual = dual_rhs(omega_field.omega, data)
    scale = max(1.0, float(np.max(np.abs(dual))))
    sup = float(np.max(np.abs(cart - dual))) / scale
    return ResidualReport("toda_rhs_agreement", sup=sup,
                          details={"off_cartan": off})


def _laplacian(arr: np.ndarray, h: float) -> np.ndarray:
    """2nd-order 5-point Laplacian, trimmed by 1."""
    c = arr[1:-1, 1:-1]
    return (arr[2:, 1:-1] + arr[:-2, 1:-1] + arr[1:-1, 2:] + arr[1:-1, :-2]
            - 4 * c) / (h * h)


def toda_residual(fields: Union[TodaField, Sequence[TodaField]],
                  data: CyclicData) -> ResidualReport:
    """sup | 2 Omega_zzbar - sum_j m_j e^{2 alpha_j(Omega)} D_j | at
    interior nodes; with two resolutions the measured order is included.
    Uses 4 Omega_zzbar = Laplacian(Omega)."""
    if isinstance(fields, TodaField):
        fields = [fields]
    fields = sorted(fields, key=lambda f: -f.h)
    sups = []
    for f in fields:
        lhs = 0.5 * _laplacian(f.omega.astype(complex), f.h)
        rhs = dual_rhs(f.omega, data)[1:-1, 1:-1]
        sups.append(float(np.max(np.abs(lhs - rhs))))
    order = None
    if len(fields) >= 2 and sups[-1] > 0:
        order = float(np.log(sups[-2] / sups[-1]) /
                      np.log(fields[-2].h / fields[-1].h))
    details = {f"sup_h{f.h:g}": s for f, s in zip(fields, sups)}
    return ResidualReport("toda_residual", sup=sups[-1], order=order,
                          details=details)


def toda_frame_form(omega_field: TodaField, data: CyclicData,
                    lam_samples: Sequence[complex] = (1.0,)) -> ResidualReport:
    """Maurer-Cartan residual of the Toda-frame connection, and its
    agreement with -2 Omega_zzbar + bracket (the integrability identity)."""
    alg = data.alg
    struct = alg.structure_tensor()
    om = omega_field.omega
    oz, ozb, margin = omega_field.derivatives()
    adw = adw_field(om, data)
    adwb = adw_bar_field(om, data)
    oz_vec = np.zeros(om.shape[:2] + (alg.dim,), dtype=complex)
    ozb_vec = np.zeros_like(oz_vec)
    oz_vec[..., :alg.rank] = oz
    ozb_vec[..., :alg.rank] = ozb
    worst = 0.0
    details: Dict[str, float] = {}
    for i, lam in enumerate(lam_samples):
        phi_z = oz_vec + lam * adw
        phi_zb = -ozb_vec + adwb / lam
        dzb_phi_z = dz_dzbar(phi_z, omega_field.h)[1]
        dz_phi_zb = dz_dzbar(phi_zb, omega_field.h)[0]
        comm = _bracket_batch(struct, _trim(_trim(phi_z, 0), 1),
                              _trim(_trim(phi_zb, 0), 1))
        res = dz_phi_zb - dzb_phi_z + comm
        res = _interior(res, margin)
        s = float(np.max(np.abs(res)))
        details[f"lam_{i}"] = s
        worst = max(worst, s)
    return ResidualReport("toda_frame_mc", sup=worst, details=details)


def normalization_check(data: CyclicData, c: np.ndarray) -> ResidualReport:
    """Grid of c_0 prod_j c_j^{m_j} (marks as integer exponents): relative
    spread and agreement with the r-invariant of the data."""
    if np.min(np.abs(c)) == 0:
        return ResidualReport("normalization", sup=np.inf,
                              details={"non_cyclic": 1.0})
    marks = np.array((1,) + tuple(data.alg.rs.marks), dtype=int)
    prod = np.prod(c ** marks, axis=-1)
    ref = prod.flat[0]
    spread = float(np.max(np.abs(prod - ref))) / abs(ref)
    agree = abs(ref - data.r_invariant()) / abs(ref)
    return ResidualReport("normalization", sup=spread,
                          details={"r_invariant_agreement": float(agree)})


# -- Omega reconstruction -------------------------------------------


def _cumint(values: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Cumulative integral along an axis (composite Simpson, 4th order)."""
    return cumulative_simpson(values, dx=h, axis=axis, initial=0.0)


def reconstruct_omega(grid: FieldGrid, grading_tol: float = 1e-8,
                      loop_tol: float = 1e-6) -> TodaField:
    """Omega with Omega_z = xi_{d-1}/2, integrated from the origin.

    x-then-y and y-then-x path integrations are compared (loop defect);
    the i*t part is kept and the discarded defect recorded.
    """
    alg = grid.alg
    n = alg.rank
    xdm1 = grid.coefficient(grid.d - 1)
    off = float(np.max(np.abs(xdm1[..., n:])))
    if off > grading_tol:
        raise TodaDomainError(
            f"xi_(d-1) has off-Cartan part {off:g} (not a g_0 field)")
    oz = 0.5 * xdm1[..., :n]
    # reality: Omega_zbar = -xi_{1-d}/2 must equal conj(Omega_z)
    ozb = -0.5 * grid.coefficient(-(grid.d - 1))[..., :n]
    reality_defect = float(np.max(np.abs(ozb - np.conj(oz))))
    ox = 2.0 * np.real(oz)       # Omega_x
    oy = -2.0 * np.imag(oz)      # Omega_y
    h = grid.h
    # x-row then y-columns
    row = _cumint(ox[:, :1, :], h, axis=0)
    om1 = row + _cumint(oy, h, axis=1)
    # y-column then x-rows
    col = _cumint(oy[:1, :, :], h, axis=1)
    om2 = col + _cumint(ox, h, axis=0)
    loop_defect = float(np.max(np.abs(om1 - om2)))
    if loop_defect > loop_tol:
        raise TodaDomainError(f"path integration loop defect {loop_defect:g}")
    return TodaField(alg, h, om1, omega_z=oz, omega_zbar=np.conj(oz),
                     loop_defect=loop_defect, reality_defect=reality_defect)


def grid_cyclic_data(grid: FieldGrid, conj: AntilinearConjugation) -> CyclicData:
    """CyclicData with W = xi_d at the origin (so Omega(0,0) = 0)."""
    alg = grid.alg
    ext = alg.rs.extended_simple_roots()
    w0 = grid.xi[0, 0, 2 * grid.d]
    r = tuple(complex(w0[alg.root_vector_index(root)]) for root in ext)
    return CyclicData(alg, conj, r)


def g1_coefficient_grid(grid: FieldGrid) -> np.ndarray:
    """c_j(x,y): the extended-simple-root coefficients of xi_d."""
    alg = grid.alg
    idx = [alg.root_vector_index(root)
           for root in alg.rs.extended_simple_roots()]
    return grid.coefficient(grid.d)[..., idx]


def w_constancy(grid: FieldGrid, omega_field: TodaField) -> ResidualReport:
    """Relative grid drift of Ad_{exp -Omega} xi_d (constant = W for a
    Toda frame)."""
    alg = grid.alg
    p, root_slice = ad_exp_cartan_multipliers(alg)
    mult = np.exp(-np.einsum("al,xyl->xya", p,
                             omega_field.omega.astype(complex)))
    w = grid.coefficient(grid.d).copy()
    w[..., root_slice] = w[..., root_slice] * mult
    ref = w[0, 0]
    scale = max(1.0, float(np.max(np.abs(ref))))
    drift = float(np.max(np.abs(w - ref))) / scale
    return ResidualReport("w_constancy", sup=drift, drift=drift)


# -- Jacobi fields ---------------------------------------------------


def jacobi_residual(y: Dict[int, np.ndarray], omega_dot: np.ndarray,
                    omega_field: TodaField, data: CyclicData,
                    extra_margin: int = 0) -> ResidualReport:
    """Finite-difference residuals of the two Jacobi equations and the
    eliminated elliptic equation for Omega-dot.

    y maps Laurent degree -> (nx+1, ny+1, dim) arrays; omega_dot is a
    Cartan-coordinate grid (complex allowed).  extra_margin widens the
    discarded border when y itself carries finite-difference edge noise
    (grids built by the recursion report their margin).
    """
    alg = data.alg
    struct = alg.structure_tensor()
    h = omega_field.h
    oz, ozb, margin = omega_field.derivatives()
    margin = margin + extra_margin
    adw = adw_field(omega_field.omega, data)
    adwb = adw_bar_field(omega_field.omega, data)
    oz_vec = np.zeros(adw.shape, dtype=complex)
    ozb_vec = np.zeros(adw.shape, dtype=complex)
    oz_vec[..., :alg.rank] = oz
    ozb_vec[..., :alg.rank] = ozb
    od_vec = np.zeros(adw.shape, dtype=complex)
    od_vec[..., :alg.rank] = omega_dot
    od_z, od_zb = dz_dzbar(od_vec, h)

    degrees = sorted(y)
    zero = np.zeros_like(adw)
    worst = 0.0
    details: Dict[str, float] = {}
    t2 = lambda a: _trim(_trim(a, 0), 1)
    for j in degrees:
        yj = y[j]
        yjm = y.get(j - 1, zero)
        yjp = y.get(j + 1, zero)
        yz, yzb = dz_dzbar(yj, h)
        r1 = yz \
            + t2(_bracket_batch(struct, oz_vec, yj)) \
            + t2(_bracket_batch(struct, adw, yjm)) \
            - (od_z if j == 0 else 0) \
            - (t2(_bracket_batch(struct, od_vec, adw)) if j == 1 else 0)
        r2 = yzb \
            + t2(_bracket_batch(struct, -ozb_vec, yj)) \
            + t2(_bracket_batch(struct, adwb, yjp)) \
            + (od_zb if j == 0 else 0) \
            + (t2(_bracket_batch(struct, od_vec, adwb)) if j == -1 else 0)
        r1 = _interior(r1, margin)
        r2 = _interior(r2, margin)
        s = float(max(np.max(np.abs(r1)), np.max(np.abs(r2))))
        details[f"deg_{j}"] = s
        worst = max(worst, s)

    # eliminated elliptic equation for Omega-dot
    lap = 0.5 * _laplacian(od_vec, h)  # 2 Omega-dot_zzbar
    el = lap \
        + _bracket_batch(struct, adw,
                         _bracket_batch(struct, od_vec, adwb))[1:-1, 1:-1] \
        + _bracket_batch(struct, adwb,
                         _bracket_batch(struct, od_vec, adw))[1:-1, 1:-1]
    details["elliptic"] = float(np.max(np.abs(_interior(el, max(margin, 1)))))
    return ResidualReport("jacobi", sup=worst, details=details)


def build_Yl(y: Dict[int, np.ndarray], l: int,
             alg: ChevalleyAlgebra) -> Tuple[Dict[int, np.ndarray], np.ndarray]:
    """Y^l = (1/2) Y_{-kl} + sum_{-kl<j<=1} lambda^{j+kl} Y_j, together
    with Omega-dot^l = (1/2) Y_{-kl} (a t^C-valued grid)."""
    k = alg.rs.coxeter_number
    if -k * l not in y:
        raise TodaDomainError(f"series must reach degree {-k * l}")
    low = y[-k * l]
    if np.max(np.abs(low[..., alg.rank:])) > 1e-8 * max(1.0, np.max(np.abs(low))):
        raise TodaDomainError("Y_{-kl} is not t^C-valued")
    out: Dict[int, np.ndarray] = {0: 0.5 * low.copy()}
    for j, arr in y.items():
        if -k * l < j <= 1:
            out[j + k * l] = out.get(j + k * l, 0) + arr
    return out, 0.5 * low[..., :alg.rank]


# -- the formal Killing recursion ------------------------------------


@dataclass
class RecursionResult:
    xi: Dict[int, np.ndarray]            # Laurent degree -> (nx+1,ny+1,dim)
    x_coeffs: Dict[int, np.ndarray]      # degree -> gl(m) matrix grids
    margin: int
    lax_report: ResidualReport
    top_defect: float                    # |xi_1 - Ad_{exp Omega} W|
    projection_defect: float             # gl(m) -> g^C projection residual
    v_component: float                   # centralizer part of the recursion
                                         # right-hand sides; discarded by the
                                         # pseudo-inverse, its cancellation is
                                         # certified by the Lax residual
    noncyclic_nodes: np.ndarray          # boolean grid


def _fd_z_mat(arr: np.ndarray, h: float) -> Tuple[np.ndarray, int]:
    """d/dz of a matrix grid, 4th order, same shape with a margin of 2."""
    dz, _ = dz_dzbar(arr, h)
    out = np.zeros_like(arr)
    out[2:-2, 2:-2] = dz
    return out, 2


def formal_killing_recursion(omega_field: TodaField, data: CyclicData,
                             m_order: int,
                             rank_tol: float = 1e-9) -> RecursionResult:
    """Solve for X_{-1..-M} in V-perp, form Y = (1+X)^{-1} A (1+X) with
    A = Ad_{exp Omega} W in the adjoint gl(m) embedding, project back to
    g^C, and grade lambda*Y into the twisted loop algebra.

    Nodes where ad_A has a kernel larger than the Cartan rank (the
    non-cyclic locus) are flagged and excluded from the residual.
    """
    if m_order < 1:
        raise TodaDomainError("recursion order must be >= 1")
    alg = data.alg
    dim = alg.dim
    struct = alg.structure_tensor()
    om = omega_field.omega
    oz, ozb, margin = omega_field.derivatives()
    h = omega_field.h

    a_g = adw_field(om, data)                       # (nx,ny,dim)
    abar_g = adw_bar_field(om, data)
    a_mat = np.einsum("ijk,xyi->xykj", struct, a_g)  # ad_{A} per node

    # eigen-decomposition of the semisimple ad_A
    evals, p = np.linalg.eig(a_mat)
    # pinv instead of inv: defective nodes (the non-cyclic locus) must not
    # abort the whole grid, they are flagged and excluded below
    pinv = np.linalg.pinv(p)
    gaps = evals[..., :, None] - evals[..., None, :]
    gap_scale = np.max(np.abs(gaps), axis=(-2, -1), keepdims=True)
    kernel_mask = np.abs(gaps) <= rank_tol * np.maximum(gap_scale, 1e-300)
    inv_gaps = np.where(kernel_mask, 0.0, 1.0 / np.where(kernel_mask, 1.0, gaps))

    eig_scale = np.max(np.abs(evals), axis=-1, keepdims=True)
    noncyclic = np.sum(np.abs(evals) <= rank_tol * np.maximum(eig_scale, 1e-300),
                       axis=-1) > alg.rank

    def to_eig(mgrid):
        return pinv @ mgrid @ p

    def from_eig(mgrid):
        return p @ mgrid @ pinv

    def proj_perp(mgrid):
        return from_eig(np.where(kernel_mask, 0.0, to_eig(mgrid)))

    def proj_v(mgrid):
        return from_eig(np.where(kernel_mask, to_eig(mgrid), 0.0))

    def ad_a_solve(mgrid):
        """X in V-perp with [A, X] = (V-perp part of mgrid); the size of
        the discarded V-component is returned alongside."""
        e = to_eig(mgrid)
        bad = np.where(kernel_mask, e, 0.0)
        return from_eig(inv_gaps * e), float(np.max(np.abs(from_eig(bad))))

    oz_vec = np.zeros(om.shape[:2] + (dim,), dtype=complex)
    oz_vec[..., :alg.rank] = oz
    oz_mat = np.einsum("ijk,xyi->xykj", struct, oz_vec)

    x: Dict[int, np.ndarray] = {}
    v_component = 0.0
    x[-1], bad = ad_a_solve(2.0 * oz_mat)
    v_component = max(v_component, bad)
    for j in range(-1, -m_order, -1):
        dzx, dm = _fd_z_mat(x[j], h)
        margin = margin + dm  # each level differentiates the previous one
        dprime = dzx - (oz_mat @ x[j] - x[j] @ oz_mat)
        rhs = 2.0 * proj_perp(x[j] @ oz_mat) - dprime
        for s in range(-1, j, -1):
            l = j - s
            if l <= -1:
                rhs = rhs - 2.0 * (proj_v(x[s] @ oz_mat) @ x[l])
        x[j - 1], bad = ad_a_solve(rhs)
        v_component = max(v_component, bad)

    # Y = (1 + X)^-1 A (1 + X), truncated at degree -m_order
    def series_mult(a: Dict[int, np.ndarray], b: Dict[int, np.ndarray]):
        out: Dict[int, np.ndarray] = {}
        for i, ai in a.items():
            for j2, bj in b.items():
                if i + j2 >= -m_order:
                    out[i + j2] = out.get(i + j2, 0) + ai @ bj
        return out

    eye = np.broadcast_to(np.eye(dim, dtype=complex),
                          om.shape[:2] + (dim, dim)).copy()
    one_plus_x = {0: eye, **x}
    inv_series: Dict[int, np.ndarray] = {0: eye}
    powx: Dict[int, np.ndarray] = {0: eye}
    sign = 1
    for _ in range(m_order):
        powx = series_mult(powx, x)
        sign = -sign
        for dgr, arr in powx.items():
            inv_series[dgr] = inv_series.get(dgr, 0) + sign * arr
    y_mat = series_mult(series_mult(inv_series, {0: a_mat}), one_plus_x)

    # project gl(m) -> g^C via the trace form against the adjoint basis
    ad_basis = np.transpose(struct, (0, 2, 1))   # ad_{e_i}[k, j] = C[i, j, k]
    kgram = np.array(alg.killing_gram(), dtype=float)
    kinv = np.linalg.inv(kgram)
    proj_defect = 0.0
    xi: Dict[int, np.ndarray] = {}
    gmask = GradingProjector(alg)
    for dgr, mat in y_mat.items():
        t = np.einsum("iab,xyba->xyi", ad_basis, mat)
        coords = np.einsum("ij,xyj->xyi", kinv, t)
        back = np.einsum("xyi,iab->xyab", coords, ad_basis)
        proj_defect = max(proj_defect, float(np.max(np.abs(back - mat))))
        lam_deg = dgr + 1                       # xi-tilde = pi-sigma(lambda Y)
        xi[lam_deg] = np.where(gmask.mask(lam_deg), coords, 0)

    top_defect = float(np.max(np.abs(_interior(xi[1] - a_g, max(margin, 1)))))

    # Lax residual of xi-tilde against phi = (Omega_z + lambda A) dz + ...
    ozb_vec = np.zeros_like(oz_vec)
    ozb_vec[..., :alg.rank] = ozb
    res_margin = margin + 2
    ok = ~noncyclic
    details: Dict[str, float] = {}
    worst = 0.0
    zero = np.zeros_like(a_g)
    for dgr in sorted(xi):
        if dgr < -m_order + 2:
            continue  # corrupted by truncation
        yj = xi[dgr]
        yjm = xi.get(dgr - 1, zero)
        yjp = xi.get(dgr + 1, zero)
        yz, yzb = dz_dzbar(yj, h)
        tr2 = lambda a: _trim(_trim(a, 0), 1)
        r1 = yz - tr2(_bracket_batch(struct, yj, oz_vec)
                      + _bracket_batch(struct, yjm, a_g))
        r2 = yzb - tr2(_bracket_batch(struct, yj, -ozb_vec)
                       + _bracket_batch(struct, yjp, abar_g))
        sel = _interior(tr2(ok[..., None] * 1.0), res_margin - 2)
        r1 = _interior(r1, res_margin - 2) * sel
        r2 = _interior(r2, res_margin - 2) * sel
        s = float(max(np.max(np.abs(r1)), np.max(np.abs(r2))))
        details[f"deg_{dgr}"] = s
        worst = max(worst, s)
    report = ResidualReport("killing_lax", sup=worst, details=details)
    return RecursionResult(xi, x, res_margin, report, top_defect,
                           proj_defect, v_component, noncyclic)
