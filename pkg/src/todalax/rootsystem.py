"""Root systems of the simple complex Lie algebras, built exactly.

Roots are stored as integer coefficient vectors over the chosen simple
roots.  All Cartan-level computations (Killing form restricted to the
Cartan subalgebra, duals, dual basis) are exact rational arithmetic; no
floats appear in this module.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from . import exactla

SERIES = ("A", "B", "C", "D", "E", "F", "G")

_RANK_RANGE = {
    "A": (1, None),
    "B": (2, None),
    "C": (3, None),
    "D": (4, None),
    "E": (6, 8),
    "F": (4, 4),
    "G": (2, 2),
}


class InvalidTypeError(ValueError):
    """Raised for a (series, rank) pair that is not a valid simple type."""


@dataclass(frozen=True)
class Root:
    """A root as its integer coefficient vector over the simple roots."""

    coeffs: Tuple[int, ...]

    @property
    def height(self) -> int:
        return sum(self.coeffs)

    def __neg__(self) -> "Root":
        return Root(tuple(-c for c in self.coeffs))

    def __add__(self, other: "Root") -> "Root":
        return Root(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "Root") -> "Root":
        return Root(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    @property
    def is_positive(self) -> bool:
        return self.height > 0


@dataclass(frozen=True)
class CartanVector:
    """Element of the Cartan subalgebra in the simple-coroot basis H_1..H_N.

    Coefficients may be exact (int/Fraction) or complex, depending on the
    calling context.
    """

    coeffs: tuple

    def __add__(self, other: "CartanVector") -> "CartanVector":
        return CartanVector(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "CartanVector") -> "CartanVector":
        return CartanVector(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "CartanVector":
        return CartanVector(tuple(-a for a in self.coeffs))

    def scale(self, s) -> "CartanVector":
        return CartanVector(tuple(s * a for a in self.coeffs))

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)


def _simple_root_vectors(series: str, rank: int) -> List[List[Fraction]]:
    """Simple roots in a standard Euclidean realization (exact entries)."""
    h = Fraction(1, 2)
    if series == "A":
        dim = rank + 1
        return [[Fraction(int(j == i) - int(j == i + 1)) for j in range(dim)]
                for i in range(rank)]
    if series in ("B", "C", "D"):
        vs = [[Fraction(int(j == i) - int(j == i + 1)) for j in range(rank)]
              for i in range(rank - 1)]
        last = [Fraction(0)] * rank
        if series == "B":
            last[rank - 1] = Fraction(1)
        elif series == "C":
            last[rank - 1] = Fraction(2)
        else:
            last[rank - 2] = Fraction(1)
            last[rank - 1] = Fraction(1)
        return vs + [last]
    if series == "E":
        a1 = [h, -h, -h, -h, -h, -h, -h, h]
        a2 = [Fraction(1), Fraction(1)] + [Fraction(0)] * 6
        # alpha_i = e_{i-2} - e_{i-3} for i >= 3 (Bourbaki numbering)
        rest = []
        for i in range(3, 9):
            v = [Fraction(0)] * 8
            v[i - 2] = Fraction(1)
            v[i - 3] = Fraction(-1)
            rest.append(v)
        return ([a1, a2] + rest)[:rank]
    if series == "F":
        return [
            [Fraction(0), Fraction(1), Fraction(-1), Fraction(0)],
            [Fraction(0), Fraction(0), Fraction(1), Fraction(-1)],
            [Fraction(0), Fraction(0), Fraction(0), Fraction(1)],
            [h, -h, -h, -h],
        ]
    if series == "G":
        return [
            [Fraction(1), Fraction(-1), Fraction(0)],
            [Fraction(-2), Fraction(1), Fraction(1)],
        ]
    raise InvalidTypeError(f"unknown series {series!r}")


def validate_type(series: str, rank: int) -> None:
    if series not in _RANK_RANGE:
        raise InvalidTypeError(f"unknown series {series!r}")
    lo, hi = _RANK_RANGE[series]
    if rank < lo or (hi is not None and rank > hi):
        raise InvalidTypeError(f"invalid rank {rank} for series {series}")


@dataclass(frozen=True)
class ExtendedDiagram:
    """Extended Dynkin diagram on nodes 0..N.

    Edges carry the unordered pair of Cartan integers of the two incident
    extended simple roots, which makes automorphism checks independent of
    arrow conventions.
    """

    n_nodes: int
    edges: Dict[FrozenSet[int], Tuple[int, int]] = field(hash=False)

    def edge_attr(self, i: int, j: int) -> Optional[Tuple[int, int]]:
        return self.edges.get(frozenset((i, j)))

    def neighbours(self, i: int) -> List[int]:
        out = []
        for pair in self.edges:
            if i in pair:
                (j,) = pair - {i}
                out.append(j)
        return sorted(out)


class RootSystem:
    """Exact root system for one simple type."""

    def __init__(self, series: str, rank: int):
        validate_type(series, rank)
        self.series = series
        self.rank = rank
        simple_vecs = _simple_root_vectors(series, rank)
        self._simple_vecs = simple_vecs
        # Realization Gram matrix; only length ratios matter downstream.
        self._gram = [[sum(a * b for a, b in zip(u, v)) for v in simple_vecs]
                      for u in simple_vecs]
        n = rank
        self.cartan_matrix = [
            [int(2 * self._gram[i][j] / self._gram[j][j]) for j in range(n)]
            for i in range(n)
        ]
        self.simple_roots = [
            Root(tuple(int(i == j) for j in range(n))) for i in range(n)
        ]
        self._positive = self._generate_by_closure()
        self.roots: List[Root] = self._positive + [-r for r in self._positive]
        self._root_set = frozenset(r.coeffs for r in self.roots)
        highest = max(self._positive, key=lambda r: (r.height, r.coeffs))
        assert sum(1 for r in self._positive if r.height == highest.height) == 1
        self.highest_root = highest
        self.lowest_root = -highest
        self.marks = highest.coeffs  # m_1..m_N; m_0 := 1 by convention
        self.coxeter_number = highest.height + 1
        self._killing_t = self._killing_on_cartan()
        self._sharp_cache: Dict[Tuple[int, ...], CartanVector] = {}

    # -- generation ---------------------------------------------------

    def cartan_pairing(self, root: Root, i: int) -> int:
        """The Cartan integer <root, alpha_i^vee>."""
        return sum(c * self.cartan_matrix[j][i] for j, c in enumerate(root.coeffs))

    def _generate_by_closure(self) -> List[Root]:
        """Positive roots by closure under simple-root addition.

        Uses the root-string test: beta + alpha_i is a root iff
        p - <beta, alpha_i^vee> > 0, with p the length of the downward
        string through beta.
        """
        known = {r.coeffs: r for r in self.simple_roots}
        level = list(self.simple_roots)
        while level:
            nxt = []
            for beta in level:
                for i, alpha in enumerate(self.simple_roots):
                    p = 0
                    probe = beta - alpha
                    while probe.coeffs in known or probe.coeffs == tuple([0] * self.rank):
                        if probe.coeffs == tuple([0] * self.rank):
                            break
                        p += 1
                        probe = probe - alpha
                    if beta.coeffs == alpha.coeffs:
                        continue
                    q = p - self.cartan_pairing(beta, i)
                    cand = beta + alpha
                    if q > 0 and cand.coeffs not in known:
                        known[cand.coeffs] = cand
                        nxt.append(cand)
            level = nxt
        return sorted(known.values(), key=lambda r: (r.height, r.coeffs))

    def generate_by_weyl_orbits(self) -> List[Root]:
        """All roots as the closure of the simple roots under simple
        reflections; an algorithm independent of root strings."""
        seen = {r.coeffs for r in self.simple_roots}
        frontier = list(self.simple_roots)
        while frontier:
            nxt = []
            for beta in frontier:
                for i, alpha in enumerate(self.simple_roots):
                    img = beta - Root(tuple(
                        self.cartan_pairing(beta, i) * c for c in alpha.coeffs))
                    if img.coeffs not in seen:
                        seen.add(img.coeffs)
                        nxt.append(img)
            frontier = nxt
        return sorted((Root(c) for c in seen), key=lambda r: (r.height, r.coeffs))

    # -- membership / basic queries ----------------------------------

    def is_root(self, root: Root) -> bool:
        return root.coeffs in self._root_set

    def height(self, root: Root) -> int:
        if not self.is_root(root):
            raise ValueError(f"{root} is not a root of {self.series}{self.rank}")
        return root.height

    @property
    def positive_roots(self) -> List[Root]:
        return list(self._positive)

    def extended_simple_roots(self) -> List[Root]:
        """alpha_0, alpha_1, .., alpha_N."""
        return [self.lowest_root] + list(self.simple_roots)

    def realization_inner(self, a: Root, b: Root) -> Fraction:
        """W-invariant inner product from the Euclidean realization."""
        return sum(
            Fraction(ca) * Fraction(cb) * self._gram[i][j]
            for i, ca in enumerate(a.coeffs)
            for j, cb in enumerate(b.coeffs)
            if ca and cb
        )

    # -- Killing form on the Cartan subalgebra -----------------------

    def _killing_on_cartan(self) -> List[List[int]]:
        n = self.rank
        evals = [[self.cartan_pairing(r, i) for i in range(n)] for r in self.roots]
        return [[sum(e[i] * e[j] for e in evals) for j in range(n)] for i in range(n)]

    def killing_cartan(self, x: CartanVector, y: CartanVector):
        """kappa(x, y) for Cartan elements in the simple-coroot basis."""
        k = self._killing_t
        return sum(
            x.coeffs[i] * k[i][j] * y.coeffs[j]
            for i in range(self.rank)
            for j in range(self.rank)
        )

    def root_eval(self, root: Root, x: CartanVector):
        """alpha(X) for X in the Cartan subalgebra."""
        return sum(
            self.cartan_pairing(root, i) * x.coeffs[i] for i in range(self.rank)
        )

    def killing_dual(self, root: Root) -> CartanVector:
        """alpha^sharp: kappa(alpha^sharp, H) = alpha(H) for all Cartan H."""
        if root.coeffs in self._sharp_cache:
            return self._sharp_cache[root.coeffs]
        if not self.is_root(root):
            raise ValueError(f"{root} is not a root")
        rhs = [self.cartan_pairing(root, i) for i in range(self.rank)]
        sharp = CartanVector(tuple(exactla.solve(self._killing_t, rhs)))
        self._sharp_cache[root.coeffs] = sharp
        return sharp

    def coroot(self, root: Root) -> CartanVector:
        """H_alpha = (2 / kappa(a#, a#)) a#; has integer coroot coefficients."""
        sharp = self.killing_dual(root)
        norm = self.killing_cartan(sharp, sharp)
        h = sharp.scale(Fraction(2) / norm)
        out = []
        for c in h.coeffs:
            assert c.denominator == 1
            out.append(int(c))
        return CartanVector(tuple(out))

    def dual_basis(self) -> List[CartanVector]:
        """eta_j with alpha_i(eta_j) = delta_ij, exactly."""
        n = self.rank
        m = [[self.cartan_pairing(self.simple_roots[i], l) for l in range(n)]
             for i in range(n)]
        out = []
        for j in range(n):
            rhs = [Fraction(int(i == j)) for i in range(n)]
            out.append(CartanVector(tuple(exactla.solve(m, rhs))))
        return out

    # -- extended diagram --------------------------------------------

    def extended_diagram(self) -> ExtendedDiagram:
        ext = self.extended_simple_roots()
        edges: Dict[FrozenSet[int], Tuple[int, int]] = {}
        for i in range(len(ext)):
            for j in range(i + 1, len(ext)):
                nij = int(2 * self.realization_inner(ext[i], ext[j])
                          / self.realization_inner(ext[j], ext[j]))
                nji = int(2 * self.realization_inner(ext[j], ext[i])
                          / self.realization_inner(ext[i], ext[i]))
                if nij != 0:
                    edges[frozenset((i, j))] = tuple(sorted((nij, nji)))
        return ExtendedDiagram(len(ext), edges)

    def to_json_dict(self) -> dict:
        return {
            "series": self.series,
            "rank": self.rank,
            "cartan_matrix": self.cartan_matrix,
            "roots": [{"coeffs": list(r.coeffs), "height": r.height}
                      for r in self.roots],
            "marks": list(self.marks),
            "coxeter_number": self.coxeter_number,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_json_dict(), **kwargs)

    def __repr__(self) -> str:
        return f"RootSystem({self.series}{self.rank}, {len(self.roots)} roots)"


@lru_cache(maxsize=None)
def build_root_system(series: str, rank: int) -> RootSystem:
    """Construct (and cache) the root system of a valid simple type."""
    return RootSystem(series, rank)


def diagram_automorphisms(diagram: ExtendedDiagram) -> List[Tuple[int, ...]]:
    """All node permutations preserving edge attributes.

    Backtracking on local invariants (multiset of incident edge labels);
    at rank <= 8 this is instantaneous.
    """
    n = diagram.n_nodes
    sig = []
    for i in range(n):
        attrs = sorted(
            (diagram.edge_attr(i, j) for j in diagram.neighbours(i)),
        )
        sig.append((len(attrs), tuple(attrs)))
    candidates = [[j for j in range(n) if sig[j] == sig[i]] for i in range(n)]

    out: List[Tuple[int, ...]] = []
    perm = [-1] * n
    used = [False] * n

    def ok(i: int, img: int) -> bool:
        for j in range(i):
            if diagram.edge_attr(i, j) != diagram.edge_attr(img, perm[j]):
                return False
        return True

    def rec(i: int) -> None:
        if i == n:
            out.append(tuple(perm))
            return
        for img in candidates[i]:
            if not used[img] and ok(i, img):
                used[img] = True
                perm[i] = img
                rec(i + 1)
                used[img] = False
                perm[i] = -1

    rec(0)
    return sorted(out)


def diagram_involutions(diagram: ExtendedDiagram) -> List[Tuple[int, ...]]:
    """The automorphisms with pi^2 = id (the identity included)."""
    return [p for p in diagram_automorphisms(diagram)
            if all(p[p[i]] == i for i in range(len(p)))]
