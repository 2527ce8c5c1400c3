"""Finite simplicial complexes with free simplicial Z_p-actions.

A complex stores its simplices as sorted integer tuples grouped by dimension,
so equality and hashing are canonical.  Actions are vertex permutations of
prime order p; freeness is the setwise-fixed-simplex test, which is exact for
simplicial actions of prime-order cyclic groups (a setwise-fixed simplex
would fix its barycenter).
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass

from .errors import ValidationError
from .fplinalg import betti_numbers, is_prime

Simplex = tuple[int, ...]

# Sentinel connectivity values: the empty complex, and complexes whose
# reduced homology vanishes everywhere (connectivity is unbounded there).
EMPTY_CONNECTIVITY = -2
INFINITE_CONNECTIVITY = math.inf


class SimplicialComplex:
    """Downward-closed family of sorted vertex tuples on 0..vertex_count-1."""

    __slots__ = ("vertex_count", "by_dim", "_hash")

    def __init__(self, vertex_count: int, by_dim, *, validate: bool = True):
        self.vertex_count = int(vertex_count)
        self.by_dim = tuple(tuple(level) for level in by_dim)
        self._hash = None
        if validate:
            self._validate()

    @classmethod
    def from_simplices(cls, vertex_count: int, simplices) -> "SimplicialComplex":
        """Build the downward closure of an arbitrary simplex family."""
        closed: set[Simplex] = set()
        stack = [tuple(sorted(set(s))) for s in simplices]
        for s in stack:
            if not s:
                raise ValidationError("empty vertex tuple is not a simplex")
        while stack:
            s = stack.pop()
            if s in closed:
                continue
            closed.add(s)
            if len(s) > 1:
                for i in range(len(s)):
                    face = s[:i] + s[i + 1:]
                    if face not in closed:
                        stack.append(face)
        if not closed:
            return cls(vertex_count, ())
        top = max(len(s) for s in closed) - 1
        by_dim = [sorted(s for s in closed if len(s) == d + 1) for d in range(top + 1)]
        return cls(vertex_count, by_dim)

    def _validate(self):
        seen: set[Simplex] = set()
        for d, level in enumerate(self.by_dim):
            prev: Simplex | None = None
            for s in level:
                if len(s) != d + 1:
                    raise ValidationError(f"simplex {s} filed under dimension {d}")
                if list(s) != sorted(set(s)):
                    raise ValidationError(f"simplex {s} is not a sorted duplicate-free tuple")
                if s[-1] >= self.vertex_count or s[0] < 0:
                    raise ValidationError(f"simplex {s} exceeds vertex range 0..{self.vertex_count - 1}")
                if prev is not None and s <= prev:
                    raise ValidationError(f"dimension {d} is not sorted/duplicate-free at {s}")
                prev = s
                seen.add(s)
        for level in self.by_dim[1:]:
            for s in level:
                for i in range(len(s)):
                    if s[:i] + s[i + 1:] not in seen:
                        raise ValidationError(f"face {s[:i] + s[i + 1:]} of {s} missing (not downward closed)")
        if self.by_dim and not self.by_dim[-1]:
            raise ValidationError("top dimension level is empty; trim by_dim")

    @property
    def dim(self) -> int:
        return len(self.by_dim) - 1

    def is_empty(self) -> bool:
        return not self.by_dim

    def simplices(self):
        for level in self.by_dim:
            yield from level

    def simplex_set(self) -> frozenset:
        return frozenset(self.simplices())

    def f_vector(self) -> tuple[int, ...]:
        return tuple(len(level) for level in self.by_dim)

    def euler_characteristic(self) -> int:
        return sum((-1) ** d * len(level) for d, level in enumerate(self.by_dim))

    def maximal_simplices(self) -> list[Simplex]:
        maximal = []
        for d, level in enumerate(self.by_dim):
            if d == self.dim:
                maximal.extend(level)
                continue
            above = set(self.by_dim[d + 1])
            for s in level:
                is_face = False
                for v in range(self.vertex_count):
                    if v in s:
                        continue
                    if tuple(sorted(s + (v,))) in above:
                        is_face = True
                        break
                if not is_face:
                    maximal.append(s)
        return sorted(maximal, key=lambda s: (len(s), s))

    def connected_components(self) -> int:
        """Number of connected components of the underlying 1-skeleton."""
        if self.is_empty():
            return 0
        parent = {}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for (v,) in self.by_dim[0]:
            parent[v] = v
        if self.dim >= 1:
            for a, b in self.by_dim[1]:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[ra] = rb
        return len({find(v) for v in parent})

    def __eq__(self, other):
        return (
            isinstance(other, SimplicialComplex)
            and self.vertex_count == other.vertex_count
            and self.by_dim == other.by_dim
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.vertex_count, self.by_dim))
        return self._hash

    def __repr__(self):
        return f"SimplicialComplex(vertices={self.vertex_count}, f={self.f_vector()})"


@dataclass(frozen=True)
class ZpAction:
    """Vertex permutation of order dividing the prime p."""

    p: int
    perm: tuple[int, ...]

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValidationError(f"p={self.p} is not prime")
        n = len(self.perm)
        if sorted(self.perm) != list(range(n)):
            raise ValidationError("perm is not a permutation of 0..n-1")
        cur = list(range(n))
        for _ in range(self.p):
            cur = [self.perm[v] for v in cur]
        if cur != list(range(n)):
            raise ValidationError("perm^p is not the identity")

    def power(self, a: int) -> tuple[int, ...]:
        a %= self.p
        out = list(range(len(self.perm)))
        for _ in range(a):
            out = [self.perm[v] for v in out]
        return tuple(out)

    def apply(self, simplex: Simplex) -> Simplex:
        return tuple(sorted(self.perm[v] for v in simplex))


class FreeZpComplex:
    """A simplicial complex together with a free simplicial Z_p-action."""

    __slots__ = ("complex", "action", "simply_connected_verified")

    def __init__(self, complex: SimplicialComplex, action: ZpAction, *,
                 simply_connected_verified: bool = False, validate: bool = True):
        self.complex = complex
        self.action = action
        # Metadata only (set by join() or by explicit caller assertion);
        # not part of equality.
        self.simply_connected_verified = simply_connected_verified
        if validate:
            self._validate()

    def _validate(self):
        if len(self.action.perm) != self.complex.vertex_count:
            raise ValidationError("permutation length differs from vertex count")
        sset = self.complex.simplex_set()
        perms = [self.action.power(a) for a in range(1, self.action.p)]
        for s in self.complex.simplices():
            image = self.action.apply(s)
            if image not in sset:
                raise ValidationError(f"action is not simplicial: image of {s} missing")
            for pa in perms:
                if tuple(sorted(pa[v] for v in s)) == s:
                    raise ValidationError(f"action is not free: {s} is setwise fixed")

    @property
    def p(self) -> int:
        return self.action.p

    @property
    def dim(self) -> int:
        return self.complex.dim

    def is_empty(self) -> bool:
        return self.complex.is_empty()

    def with_action_power(self, a: int) -> "FreeZpComplex":
        """Same complex acted on by the a-th power of the generator."""
        if not 1 <= a <= self.p - 1:
            raise ValidationError(f"power a={a} outside 1..p-1")
        return FreeZpComplex(self.complex, ZpAction(self.p, self.action.power(a)))

    def vertex_orbits(self) -> list[tuple[int, ...]]:
        """Orbits of the action on vertices of the complex, each starting at
        its smallest member, sorted by that member."""
        present = [s[0] for s in self.complex.by_dim[0]] if not self.complex.is_empty() else []
        seen: set[int] = set()
        orbits = []
        for v in present:
            if v in seen:
                continue
            orbit = [v]
            cur = self.action.perm[v]
            while cur != v:
                orbit.append(cur)
                cur = self.action.perm[cur]
            seen.update(orbit)
            orbits.append(tuple(orbit))
        return orbits

    def __eq__(self, other):
        return (
            isinstance(other, FreeZpComplex)
            and self.complex == other.complex
            and self.action == other.action
        )

    def __hash__(self):
        return hash((self.complex, self.action))

    def __repr__(self):
        return f"FreeZpComplex(p={self.p}, vertices={self.complex.vertex_count}, dim={self.dim})"


@dataclass(frozen=True)
class HomologyProfile:
    """Betti numbers over F_p and the induced homological connectivity.

    homological_connectivity is the largest c with vanishing reduced homology
    in all degrees <= c: -2 for the empty complex, math.inf when reduced
    homology vanishes everywhere, otherwise a finite integer.  This is a
    homological surrogate; it matches homotopy connectivity only on spaces
    where Hurewicz applies (joins, spheres), see index_lower_from_connectivity.
    """

    p: int
    betti: tuple[int, ...]
    reduced: bool
    homological_connectivity: int | float

    def __post_init__(self):
        if any(b < 0 for b in self.betti):
            raise ValidationError("negative betti number")


def connectivity_from_reduced_betti(reduced_betti, empty: bool):
    if empty:
        return EMPTY_CONNECTIVITY
    first_nonzero = None
    for k, b in enumerate(reduced_betti):
        if b != 0:
            first_nonzero = k
            break
    if first_nonzero is None:
        return INFINITE_CONNECTIVITY
    return first_nonzero - 1


def boundary_columns(cx: SimplicialComplex, k: int) -> list[dict[int, int]]:
    """Columns of the boundary operator C_k -> C_{k-1} with Z coefficients."""
    if k <= 0 or k > cx.dim:
        return [dict() for _ in (cx.by_dim[k] if 0 <= k <= cx.dim else ())]
    index = {s: i for i, s in enumerate(cx.by_dim[k - 1])}
    cols = []
    for s in cx.by_dim[k]:
        col: dict[int, int] = {}
        for i in range(len(s)):
            face = s[:i] + s[i + 1:]
            col[index[face]] = 1 if i % 2 == 0 else -1
        cols.append(col)
    return cols


def homology(cx: SimplicialComplex, p: int, reduced: bool = True) -> HomologyProfile:
    """Betti numbers of cx over F_p via boundary-matrix column reduction."""
    if not is_prime(p):
        raise ValidationError(f"coefficient prime p={p} is not prime")
    if cx.is_empty():
        return HomologyProfile(p, (), reduced, EMPTY_CONNECTIVITY)
    chain = [boundary_columns(cx, k) for k in range(cx.dim + 1)]
    if reduced:
        # Augmentation C_0 -> F_p replaces the zero map in degree 0.
        chain[0] = [{0: 1} for _ in cx.by_dim[0]]
    betti = tuple(betti_numbers(chain, p))
    reduced_betti = betti if reduced else (betti[0] - 1,) + betti[1:]
    conn = connectivity_from_reduced_betti(reduced_betti, empty=False)
    return HomologyProfile(p, betti, reduced, conn)


def make_discrete_zp(p: int) -> FreeZpComplex:
    """p isolated vertices cyclically permuted: the 0-dimensional model."""
    if not is_prime(p):
        raise ValidationError(f"p={p} is not prime")
    cx = SimplicialComplex(p, [[(v,) for v in range(p)]])
    return FreeZpComplex(cx, ZpAction(p, tuple((v + 1) % p for v in range(p))))


def join(x: FreeZpComplex, y: FreeZpComplex) -> FreeZpComplex:
    """Combinatorial join: simplices are disjoint unions of a simplex from
    each side (either side may contribute nothing), acted on simultaneously.

    An empty factor is the identity for the join.
    """
    if x.p != y.p:
        raise ValidationError(f"join over mismatched primes {x.p} != {y.p}")
    if y.is_empty():
        return x
    if x.is_empty():
        return y
    nx = x.complex.vertex_count
    xs = [()] + list(x.complex.simplices())
    ys = [()] + list(y.complex.simplices())
    by_dim: dict[int, list[Simplex]] = {}
    for sx in xs:
        for sy in ys:
            if not sx and not sy:
                continue
            s = sx + tuple(v + nx for v in sy)
            by_dim.setdefault(len(s) - 1, []).append(s)
    top = max(by_dim)
    levels = [sorted(by_dim.get(d, [])) for d in range(top + 1)]
    cx = SimplicialComplex(nx + y.complex.vertex_count, levels)
    perm = tuple(x.action.perm) + tuple(v + nx for v in y.action.perm)
    x_connected = (not x.is_empty()) and x.complex.connected_components() == 1
    y_connected = (not y.is_empty()) and y.complex.connected_components() == 1
    return FreeZpComplex(
        cx,
        ZpAction(x.p, perm),
        simply_connected_verified=x_connected and y_connected,
    )


def e_n_zp(n: int, p: int) -> FreeZpComplex:
    """Join of n+1 copies of the discrete Z_p: the standard n-dimensional,
    (n-1)-connected free Z_p-complex.

    Vertex i*p + j is symbol j in copy i; a simplex picks at most one symbol
    per copy.  This matches the iterated binary join with the same numbering.
    """
    if n < 0:
        raise ValidationError(f"n={n} must be nonnegative")
    if not is_prime(p):
        raise ValidationError(f"p={p} is not prime")
    levels = []
    for d in range(n + 1):
        level = []
        for copies in itertools.combinations(range(n + 1), d + 1):
            for symbols in itertools.product(range(p), repeat=d + 1):
                level.append(tuple(copies[i] * p + symbols[i] for i in range(d + 1)))
        levels.append(sorted(level))
    cx = SimplicialComplex((n + 1) * p, levels)
    perm = tuple(i * p + (j + 1) % p for i in range(n + 1) for j in range(p))
    return FreeZpComplex(cx, ZpAction(p, perm))


def subdivide_complex(cx: SimplicialComplex) -> tuple[SimplicialComplex, dict[Simplex, int]]:
    """Barycentric subdivision; returns the new complex and the map sending
    each old simplex to its barycenter's vertex index."""
    if cx.is_empty():
        return cx, {}
    verts = sorted(cx.simplices(), key=lambda s: (len(s), s))
    index = {s: i for i, s in enumerate(verts)}
    # Chains of proper faces; dimensions strictly increase along a chain.
    chains_ending_at: dict[Simplex, list[tuple[int, ...]]] = {}
    for s in verts:
        own = (index[s],)
        ending = [own]
        if len(s) > 1:
            for face in _proper_faces(s):
                for c in chains_ending_at[face]:
                    ending.append(c + (index[s],))
        chains_ending_at[s] = ending
    by_dim: dict[int, set[Simplex]] = {}
    for ending in chains_ending_at.values():
        for c in ending:
            by_dim.setdefault(len(c) - 1, set()).add(tuple(sorted(c)))
    top = max(by_dim)
    levels = [sorted(by_dim.get(d, ())) for d in range(top + 1)]
    return SimplicialComplex(len(verts), levels), index


def _proper_faces(s: Simplex):
    for r in range(1, len(s)):
        yield from itertools.combinations(s, r)


def barycentric_subdivide(x: FreeZpComplex) -> FreeZpComplex:
    """Barycentric subdivision with the induced (still free) action."""
    sd, index = subdivide_complex(x.complex)
    perm = [0] * sd.vertex_count
    for s, i in index.items():
        perm[i] = index[x.action.apply(s)]
    return FreeZpComplex(sd, ZpAction(x.p, tuple(perm)))


# ---------------------------------------------------------------------------
# JSON interchange: {"p", "vertices", "perm", "simplices"} with maximal
# simplices only; the downward closure is recomputed on load.

def complex_to_json_dict(x: FreeZpComplex) -> dict:
    return {
        "p": x.p,
        "vertices": x.complex.vertex_count,
        "perm": list(x.action.perm),
        "simplices": [list(s) for s in x.complex.maximal_simplices()],
    }


def complex_from_json_dict(data: dict) -> FreeZpComplex:
    try:
        p = data["p"]
        vertices = data["vertices"]
        perm = tuple(data["perm"])
        simplices = [tuple(s) for s in data["simplices"]]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed complex JSON: {exc}") from exc
    cx = SimplicialComplex.from_simplices(vertices, simplices) if simplices else SimplicialComplex(vertices, ())
    return FreeZpComplex(cx, ZpAction(p, perm))


def complex_to_json(x: FreeZpComplex) -> str:
    return json.dumps(complex_to_json_dict(x), sort_keys=True)


def complex_from_json(text: str) -> FreeZpComplex:
    return complex_from_json_dict(json.loads(text))


def content_key(x: FreeZpComplex) -> str:
    """Stable content hash used to tie certificates to their space."""
    digest = hashlib.sha256(complex_to_json(x).encode()).hexdigest()
    return f"cpx:{digest[:16]}"
