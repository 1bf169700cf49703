"""Chevalley basis with exact integer structure constants.

The basis is {H_1..H_N} (simple coroots) followed by one root vector R_alpha
per root.  Constants are fixed by the extraspecial-pair convention: for each
positive non-simple root gamma, the pair (eps, eta) with eps + eta = gamma
and eps minimal in the (height, lex) order gets c_{eps,eta} = +(p+1); every
other constant follows from the standard two- and four-root identities for
an invariant inner product.  The resulting table satisfies
c_{-a,-b} = -c_{a,b} and |c_{a,b}| = p+1.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from .rootsystem import CartanVector, Root, RootSystem, build_root_system

Sparse = Dict[int, object]  # basis index -> scalar


class ChevalleyAlgebra:
    """g^C in a Chevalley basis, with exact sparse structure constants."""

    def __init__(self, rs: RootSystem):
        self.rs = rs
        self.rank = rs.rank
        pos = rs.positive_roots
        self.n_pos = len(pos)
        self.root_list: List[Root] = pos + [-r for r in pos]
        self.dim = self.rank + len(self.root_list)
        self._root_index = {r.coeffs: self.rank + i
                            for i, r in enumerate(self.root_list)}
        self._inner_cache: Dict[Tuple[tuple, tuple], Fraction] = {}
        # height first, then "earlier simple roots weigh more": makes
        # alpha_1 < alpha_2 < ... and fixes c_{alpha_1,alpha_2} = +1 in A_2.
        self._order_key = {r.coeffs: (r.height, tuple(-c for c in r.coeffs))
                           for r in pos}
        self.extraspecial: Dict[tuple, Tuple[Root, Root]] = {}
        self._special_N: Dict[Tuple[tuple, tuple], int] = {}
        self._build_constants()
        self._bracket_cache: Dict[Tuple[int, int], Sparse] = {}
        self._kappa_cache: Dict[Tuple[int, int], int] = {}
        self._struct_tensor: Optional[np.ndarray] = None

    # -- basis bookkeeping -------------------------------------------

    def root_vector_index(self, root: Root) -> int:
        return self._root_index[root.coeffs]

    def basis_root(self, index: int) -> Optional[Root]:
        """The root of a root-vector basis index, or None for Cartan indices."""
        if index < self.rank:
            return None
        return self.root_list[index - self.rank]

    def basis_labels(self) -> List[str]:
        out = [f"H{i + 1}" for i in range(self.rank)]
        for r in self.root_list:
            out.append("R[" + ",".join(str(c) for c in r.coeffs) + "]")
        return out

    # -- structure constants -----------------------------------------

    def _inner(self, a: Root, b: Root) -> Fraction:
        key = (a.coeffs, b.coeffs)
        v = self._inner_cache.get(key)
        if v is None:
            v = self.rs.realization_inner(a, b)
            self._inner_cache[key] = v
            self._inner_cache[(b.coeffs, a.coeffs)] = v
        return v

    def string_down(self, alpha: Root, beta: Root) -> int:
        """p = max{n >= 0 : beta - n*alpha is a root}."""
        p = 0
        probe = beta - alpha
        while self.rs.is_root(probe):
            p += 1
            probe = probe - alpha
        return p

    def _build_constants(self) -> None:
        rs = self.rs
        pos_by_height: Dict[int, List[Root]] = {}
        for r in rs.positive_roots:
            pos_by_height.setdefault(r.height, []).append(r)
        for h in sorted(pos_by_height):
            if h == 1:
                continue
            for gamma in pos_by_height[h]:
                pairs = []
                for alpha in rs.positive_roots:
                    if alpha.height * 2 > h:
                        break
                    beta = gamma - alpha
                    if rs.is_root(beta) and beta.is_positive \
                            and self._order_key[alpha.coeffs] < self._order_key[beta.coeffs]:
                        pairs.append((alpha, beta))
                pairs.sort(key=lambda ab: self._order_key[ab[0].coeffs])
                eps, eta = pairs[0]
                self.extraspecial[gamma.coeffs] = (eps, eta)
                self._special_N[(eps.coeffs, eta.coeffs)] = self.string_down(eps, eta) + 1
                for alpha, beta in pairs[1:]:
                    self._special_N[(alpha.coeffs, beta.coeffs)] = \
                        self._derive_special(alpha, beta, eps, eta)

    def _derive_special(self, alpha: Root, beta: Root, eps: Root, eta: Root) -> int:
        gamma = alpha + beta
        total = Fraction(0)
        d1 = eta - alpha
        if self.rs.is_root(d1):
            total += Fraction(self.structure_constant(eta, -alpha)
                              * self.structure_constant(eps, -beta),
                              1) / self._inner(d1, d1)
        d2 = eps - alpha
        if self.rs.is_root(d2):
            total += Fraction(self.structure_constant(-alpha, eps)
                              * self.structure_constant(eta, -beta),
                              1) / self._inner(d2, d2)
        n_eps_eta = self._special_N[(eps.coeffs, eta.coeffs)]
        val = self._inner(gamma, gamma) * total / n_eps_eta
        assert val.denominator == 1 and val != 0
        n = int(val)
        assert abs(n) == self.string_down(alpha, beta) + 1
        return n

    def structure_constant(self, a: Root, b: Root) -> int:
        """c_{a,b} with [R_a, R_b] = c_{a,b} R_{a+b}; requires a+b a root."""
        g = a + b
        assert self.rs.is_root(g)
        if a.is_positive and b.is_positive:
            if self._order_key[a.coeffs] < self._order_key[b.coeffs]:
                return self._special_N[(a.coeffs, b.coeffs)]
            return -self._special_N[(b.coeffs, a.coeffs)]
        if not a.is_positive and not b.is_positive:
            return -self.structure_constant(-a, -b)
        if not a.is_positive:
            return -self.structure_constant(b, a)
        # a positive, b negative
        if g.is_positive:
            ratio = self._inner(g, g) / self._inner(a, a)
            val = -ratio * self.structure_constant(-b, g)
            assert val.denominator == 1
            return int(val)
        return -self.structure_constant(-a, -b)

    # -- bracket ------------------------------------------------------

    def bracket_basis(self, i: int, j: int) -> Sparse:
        """[e_i, e_j] as a sparse integer coefficient dict."""
        if i == j:
            return {}
        key = (i, j)
        cached = self._bracket_cache.get(key)
        if cached is not None:
            return cached
        out: Sparse = {}
        ri, rj = self.basis_root(i), self.basis_root(j)
        if ri is None and rj is None:
            pass
        elif ri is None:
            c = self.rs.cartan_pairing(rj, i)
            if c:
                out[j] = c
        elif rj is None:
            c = self.rs.cartan_pairing(ri, j)
            if c:
                out[i] = -c
        else:
            s = ri + rj
            if all(c == 0 for c in s.coeffs):
                h = self.rs.coroot(ri)
                for l, c in enumerate(h.coeffs):
                    if c:
                        out[l] = c
            elif self.rs.is_root(s):
                out[self._root_index[s.coeffs]] = self.structure_constant(ri, rj)
        self._bracket_cache[key] = out
        self._bracket_cache[(j, i)] = {k: -v for k, v in out.items()}
        return out

    def bracket_sparse(self, x: Sparse, y: Sparse) -> Sparse:
        out: Sparse = {}
        for i, a in x.items():
            if not a:
                continue
            for j, b in y.items():
                if not b:
                    continue
                for k, c in self.bracket_basis(i, j).items():
                    out[k] = out.get(k, 0) + a * b * c
        return {k: v for k, v in out.items() if v != 0}

    # -- Killing form -------------------------------------------------

    def kappa_basis(self, i: int, j: int) -> int:
        """kappa(e_i, e_j) = trace(ad_i ad_j), exact."""
        ri, rj = self.basis_root(i), self.basis_root(j)
        if (ri is None) != (rj is None):
            return 0
        if ri is not None and any(a + b for a, b in zip(ri.coeffs, rj.coeffs)):
            return 0
        key = (i, j) if i <= j else (j, i)
        cached = self._kappa_cache.get(key)
        if cached is None:
            cached = 0
            for b in range(self.dim):
                inner = self.bracket_basis(j, b)
                for m, c in inner.items():
                    cached += c * self.bracket_basis(i, m).get(b, 0)
            self._kappa_cache[key] = cached
        return cached

    def killing_gram(self) -> List[List[int]]:
        return [[self.kappa_basis(i, j) for j in range(self.dim)]
                for i in range(self.dim)]

    # -- matrices ------------------------------------------------------

    def adjoint_basis_matrix(self, i: int, exact: bool = False):
        """Matrix of ad_{e_i} in the Chevalley basis (columns are images)."""
        if exact:
            m = [[0] * self.dim for _ in range(self.dim)]
            for b in range(self.dim):
                for k, c in self.bracket_basis(i, b).items():
                    m[k][b] = c
            return m
        m = np.zeros((self.dim, self.dim), dtype=complex)
        for b in range(self.dim):
            for k, c in self.bracket_basis(i, b).items():
                m[k, b] = c
        return m

    def structure_tensor(self) -> np.ndarray:
        """Dense tensor C with [e_i, e_j] = sum_k C[i,j,k] e_k (float),
        computed once and cached."""
        if self._struct_tensor is None:
            c = np.zeros((self.dim, self.dim, self.dim))
            for i in range(self.dim):
                for j in range(self.dim):
                    for k, v in self.bracket_basis(i, j).items():
                        c[i, j, k] = v
            self._struct_tensor = c
        return self._struct_tensor

    def element(self, coeffs: Optional[Sparse] = None) -> "AlgebraElement":
        return AlgebraElement(self, dict(coeffs or {}))

    def cartan_element(self, x: CartanVector) -> "AlgebraElement":
        return AlgebraElement(self, {i: c for i, c in enumerate(x.coeffs) if c != 0})

    def root_vector(self, root: Root) -> "AlgebraElement":
        return AlgebraElement(self, {self._root_index[root.coeffs]: 1})

    def __repr__(self) -> str:
        return f"ChevalleyAlgebra({self.rs.series}{self.rs.rank}, dim {self.dim})"


@dataclass
class AlgebraElement:
    """Sparse element of a ChevalleyAlgebra.

    Coefficients may be int/Fraction (exact certifications) or
    float/complex (flows); the operations are agnostic.
    """

    alg: ChevalleyAlgebra
    coeffs: Sparse

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return AlgebraElement(self.alg, {k: v for k, v in out.items() if v != 0})

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return self + other.scale(-1)

    def __neg__(self) -> "AlgebraElement":
        return self.scale(-1)

    def scale(self, s) -> "AlgebraElement":
        if s == 0:
            return AlgebraElement(self.alg, {})
        return AlgebraElement(self.alg, {k: s * v for k, v in self.coeffs.items()})

    @property
    def is_zero(self) -> bool:
        return all(v == 0 for v in self.coeffs.values())

    def get(self, index: int):
        return self.coeffs.get(index, 0)

    def to_dense(self) -> np.ndarray:
        v = np.zeros(self.alg.dim, dtype=complex)
        for k, c in self.coeffs.items():
            v[k] = complex(c)
        return v

    @classmethod
    def from_dense(cls, alg: ChevalleyAlgebra, v: np.ndarray,
                   tol: float = 0.0) -> "AlgebraElement":
        return cls(alg, {i: x for i, x in enumerate(v) if abs(x) > tol})

    def norm(self) -> float:
        return float(np.sqrt(sum(abs(complex(v)) ** 2 for v in self.coeffs.values())))


def build_chevalley_basis(rs: RootSystem) -> ChevalleyAlgebra:
    return ChevalleyAlgebra(rs)


_ALG_CACHE: Dict[Tuple[str, int], ChevalleyAlgebra] = {}


def cached_algebra(series: str, rank: int) -> ChevalleyAlgebra:
    key = (series, rank)
    if key not in _ALG_CACHE:
        _ALG_CACHE[key] = build_chevalley_basis(build_root_system(series, rank))
    return _ALG_CACHE[key]


def bracket(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    if a.alg is not b.alg:
        raise ValueError("elements of different algebras")
    return AlgebraElement(a.alg, a.alg.bracket_sparse(a.coeffs, b.coeffs))


def killing_form(a: AlgebraElement, b: AlgebraElement):
    if a.alg is not b.alg:
        raise ValueError("elements of different algebras")
    out = 0
    for i, x in a.coeffs.items():
        for j, y in b.coeffs.items():
            k = a.alg.kappa_basis(i, j)
            if k:
                out += x * y * k
    return out


def adjoint_matrix(a: AlgebraElement, exact: bool = False):
    alg = a.alg
    if exact:
        m = [[Fraction(0)] * alg.dim for _ in range(alg.dim)]
        for i, x in a.coeffs.items():
            for b in range(alg.dim):
                for k, c in alg.bracket_basis(i, b).items():
                    m[k][b] += x * c
        return m
    m = np.zeros((alg.dim, alg.dim), dtype=complex)
    for i, x in a.coeffs.items():
        for b in range(alg.dim):
            for k, c in alg.bracket_basis(i, b).items():
                m[k, b] += complex(x) * c
    return m


@dataclass
class JacobiReport:
    mode: str
    n_checked: int
    violations: List[Tuple[int, int, int]]

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_jacobi(alg: ChevalleyAlgebra, mode: str = "auto",
                  n_samples: int = 10_000, seed: int = 0) -> JacobiReport:
    """Certify [[a,b],c] + [[b,c],a] + [[c,a],b] = 0 on basis triples.

    Exhaustive for dim <= 60 (or mode="exhaustive"); random triples
    otherwise.  Exact integer arithmetic throughout.
    """
    if mode == "auto":
        mode = "exhaustive" if alg.dim <= 60 else "sampled"

    def jacobi_defect(i: int, j: int, k: int) -> Sparse:
        out: Sparse = {}
        for x, y, z in ((i, j, k), (j, k, i), (k, i, j)):
            inner = alg.bracket_basis(x, y)
            for m, c in inner.items():
                for n, d in alg.bracket_basis(m, z).items():
                    out[n] = out.get(n, 0) + c * d
        return {k2: v for k2, v in out.items() if v != 0}

    violations = []
    if mode == "exhaustive":
        n = 0
        for i in range(alg.dim):
            for j in range(i + 1, alg.dim):
                for k in range(j + 1, alg.dim):
                    n += 1
                    if jacobi_defect(i, j, k):
                        violations.append((i, j, k))
        return JacobiReport("exhaustive", n, violations)
    rng = random.Random(seed)
    for _ in range(n_samples):
        i, j, k = (rng.randrange(alg.dim) for _ in range(3))
        if jacobi_defect(i, j, k):
            violations.append((i, j, k))
    return JacobiReport("sampled", n_samples, violations)
