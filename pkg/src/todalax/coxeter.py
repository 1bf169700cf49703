"""Coxeter automorphism, Z_k grading and twisted loop-algebra elements.

The Coxeter automorphism sigma acts on a Chevalley basis diagonally:
identity on the Cartan subalgebra and multiplication by exp(2*pi*i*h/k)
on the root space of a root of height h, with k the Coxeter number.  The
induced Z_k grading g = sum g_j (heights mod k) supports the cyclic
elements and twisted loop algebra used by the flows.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from .chevalley import AlgebraElement, ChevalleyAlgebra, Sparse
from .rootsystem import CartanVector


class GradingError(ValueError):
    """An element fails a required grading constraint."""


def basis_heights(alg: ChevalleyAlgebra) -> np.ndarray:
    """Integer height of each basis vector (0 on the Cartan part)."""
    out = np.zeros(alg.dim, dtype=int)
    for i in range(alg.rank, alg.dim):
        out[i] = alg.basis_root(i).height
    return out


class CoxeterAutomorphism:
    """sigma = Ad of exp((2 pi i / k) * sum of the dual basis)."""

    def __init__(self, alg: ChevalleyAlgebra):
        self.alg = alg
        self.k = alg.rs.coxeter_number
        self.height_mod = basis_heights(alg) % self.k
        self.phases = np.exp(2j * np.pi * self.height_mod / self.k)

    def apply_vector(self, v: np.ndarray, power: int = 1) -> np.ndarray:
        if power % self.k == 0:
            return np.array(v, dtype=complex)
        return v * np.exp(2j * np.pi * power * self.height_mod / self.k)

    def apply(self, x: AlgebraElement, power: int = 1) -> AlgebraElement:
        return AlgebraElement.from_dense(self.alg, self.apply_vector(x.to_dense(), power))

    def order_defect(self) -> float:
        """max |sigma^k - id| on the basis (exactly zero by construction
        up to floating phase roundoff)."""
        v = np.ones(self.alg.dim, dtype=complex)
        for _ in range(self.k):
            v = self.apply_vector(v)
        return float(np.max(np.abs(v - 1)))


class GradingProjector:
    """The k spectral projections of sigma; pi_j keeps basis vectors of
    height congruent to j mod k."""

    def __init__(self, alg: ChevalleyAlgebra):
        self.alg = alg
        self.k = alg.rs.coxeter_number
        hm = basis_heights(alg) % self.k
        self.masks = [hm == j for j in range(self.k)]

    def mask(self, j: int) -> np.ndarray:
        return self.masks[j % self.k]

    def project_vector(self, v: np.ndarray, j: int) -> np.ndarray:
        return np.where(self.mask(j), v, 0)

    def project(self, x: AlgebraElement, j: int) -> AlgebraElement:
        m = self.mask(j)
        return AlgebraElement(self.alg, {i: c for i, c in x.coeffs.items() if m[i]})

    def component_dims(self) -> List[int]:
        return [int(m.sum()) for m in self.masks]


def coxeter(alg: ChevalleyAlgebra) -> CoxeterAutomorphism:
    return CoxeterAutomorphism(alg)


def grade_decompose(x: AlgebraElement) -> List[AlgebraElement]:
    """Split x into its k graded components (they sum back to x)."""
    proj = GradingProjector(x.alg)
    return [proj.project(x, j) for j in range(proj.k)]


def ad_exp_cartan(s: CartanVector, x: AlgebraElement) -> AlgebraElement:
    """Ad_{exp S} for S in the Cartan subalgebra: multiplies the root-alpha
    component by exp(alpha(S)), fixes the Cartan part."""
    alg = x.alg
    rs = alg.rs
    out: Sparse = {}
    for i, c in x.coeffs.items():
        r = alg.basis_root(i)
        if r is None:
            out[i] = c
        else:
            expo = sum(complex(s.coeffs[l]) * rs.cartan_pairing(r, l)
                       for l in range(rs.rank))
            out[i] = c * np.exp(expo)
    return AlgebraElement(alg, out)


def ad_exp_cartan_multipliers(alg: ChevalleyAlgebra,
                              pairing_matrix: Optional[np.ndarray] = None):
    """Vectorised form of ad_exp_cartan for grids.

    Returns (P, root_slice) where P has shape (n_roots, rank) with
    P[a, l] = <alpha_a, alpha_l^v>; for Cartan coefficient array c of
    shape (..., rank) the multiplier on the root block is
    exp(c @ P.T) and the Cartan block is fixed.
    """
    n_roots = alg.dim - alg.rank
    p = np.zeros((n_roots, alg.rank))
    for a in range(n_roots):
        r = alg.basis_root(alg.rank + a)
        for l in range(alg.rank):
            p[a, l] = alg.rs.cartan_pairing(r, l)
    return p, slice(alg.rank, alg.dim)


def g1_indices(alg: ChevalleyAlgebra) -> List[int]:
    """Basis indices spanning g_1: the simple and lowest root spaces."""
    k = alg.rs.coxeter_number
    return [i for i in range(alg.rank, alg.dim)
            if alg.basis_root(i).height % k == 1 % k]


def is_cyclic(x: AlgebraElement, tol: float = 1e-12) -> bool:
    """True iff every one of the N+1 root-space components of x in g_1 is
    nonzero (relative to the largest, at tolerance tol)."""
    ok, _ = cyclic_flags(x, tol)
    return ok


def cyclic_flags(x: AlgebraElement, tol: float = 1e-12):
    """(is_cyclic, per-node flags); raises GradingError when x is not
    supported in g_1."""
    alg = x.alg
    idx = g1_indices(alg)
    allowed = set(idx)
    for i, c in x.coeffs.items():
        if c != 0 and i not in allowed:
            raise GradingError("element is not supported in g_1")
    vals = [abs(complex(x.coeffs.get(i, 0))) for i in idx]
    top = max(vals) if vals else 0.0
    flags = [v > tol * top if top > 0 else False for v in vals]
    return all(flags), flags


# -- twisted loop elements -------------------------------------------


@dataclass
class LoopElement:
    """Laurent polynomial sum_{|j| <= d} lambda^j xi_j with values in g^C.

    Stored densely: coeffs[j + d] is the coefficient vector of lambda^j.
    """

    alg: ChevalleyAlgebra
    d: int
    coeffs: np.ndarray  # shape (2d+1, dim), complex

    @classmethod
    def zero(cls, alg: ChevalleyAlgebra, d: int) -> "LoopElement":
        return cls(alg, d, np.zeros((2 * d + 1, alg.dim), dtype=complex))

    @classmethod
    def from_elements(cls, alg: ChevalleyAlgebra, d: int,
                      parts: Dict[int, AlgebraElement]) -> "LoopElement":
        out = cls.zero(alg, d)
        for j, x in parts.items():
            if abs(j) > d:
                raise ValueError(f"degree {j} exceeds bound {d}")
            out.coeffs[j + d] = x.to_dense()
        return out

    def coefficient(self, j: int) -> np.ndarray:
        if abs(j) > self.d:
            return np.zeros(self.alg.dim, dtype=complex)
        return self.coeffs[j + self.d]

    def element(self, j: int) -> AlgebraElement:
        return AlgebraElement.from_dense(self.alg, self.coefficient(j))

    def evaluate(self, lam: complex) -> np.ndarray:
        powers = lam ** np.arange(-self.d, self.d + 1)
        return powers @ self.coeffs

    def __add__(self, other: "LoopElement") -> "LoopElement":
        d = max(self.d, other.d)
        out = LoopElement.zero(self.alg, d)
        out.coeffs[d - self.d: d + self.d + 1] += self.coeffs
        out.coeffs[d - other.d: d + other.d + 1] += other.coeffs
        return out

    def scale(self, s: complex) -> "LoopElement":
        return LoopElement(self.alg, self.d, self.coeffs * s)

    def __sub__(self, other: "LoopElement") -> "LoopElement":
        return self + other.scale(-1)

    def shift(self, n: int) -> "LoopElement":
        """Multiply by lambda^n (degree bound grows by |n|)."""
        d = self.d + abs(n)
        out = LoopElement.zero(self.alg, d)
        out.coeffs[n + d - self.d: n + d + self.d + 1] = self.coeffs
        return out

    def norm(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0

    def grading_defect(self) -> float:
        """sup over j of the part of xi_j outside g_{j mod k}."""
        proj = GradingProjector(self.alg)
        worst = 0.0
        for j in range(-self.d, self.d + 1):
            v = self.coefficient(j)
            bad = v[~proj.mask(j)]
            if bad.size:
                worst = max(worst, float(np.max(np.abs(bad))))
        return worst

    def reality_defect(self, conj_matrix: np.ndarray) -> float:
        """sup over j of |xi_{-j} - conj(xi_j)| for the given antilinear
        conjugation (matrix of its linear part)."""
        worst = 0.0
        for j in range(0, self.d + 1):
            want = conj_matrix @ np.conj(self.coefficient(j))
            worst = max(worst, float(np.max(np.abs(self.coefficient(-j) - want))))
        return worst


def loop_bracket(a: LoopElement, b: LoopElement,
                 struct: Optional[np.ndarray] = None) -> LoopElement:
    """Coefficient-wise convolution of brackets; degree bound d_a + d_b."""
    if a.alg is not b.alg:
        raise ValueError("loop elements of different algebras")
    alg = a.alg
    if struct is None:
        struct = alg.structure_tensor()
    d = a.d + b.d
    out = LoopElement.zero(alg, d)
    for i in range(-a.d, a.d + 1):
        ai = a.coefficient(i)
        if not np.any(ai):
            continue
        for j in range(-b.d, b.d + 1):
            bj = b.coefficient(j)
            if not np.any(bj):
                continue
            out.coeffs[i + j + d] += np.einsum("ijk,i,j->k", struct, ai, bj)
    return out
