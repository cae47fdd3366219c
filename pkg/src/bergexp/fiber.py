"""The model fiber Lambda^{0,*}((C^n)^*) (x) C^rank and exact maps on it.

Basis enumeration is fixed once and for all so every matrix in reports
is reproducible bit for bit: antiholomorphic index subsets S run in
binary-counter order (S <-> mask, bit l-1 set iff mode l in S), and the
C^rank index runs fastest.  Index of (mask, e) is ``mask * rank + e``.

Wedge sign convention: inserting mode l into a sorted subset S costs one
transposition per element of S below l, i.e. sign = (-1)^{#{j in S: j < l}}.
"""

from __future__ import annotations

from .scalars import (
    LambdaRational,
    PiLaurent,
    QI,
    scalar_conj,
    scalar_is_zero,
    scalar_to_json,
)

__all__ = ["FiberBasis", "FiberMap", "wedge", "contraction", "degree_projector",
           "number_operator", "endo_from_bundle_matrix"]


class FiberBasis:
    """Fixed orthonormal basis wbar^S (x) e of the model fiber."""

    __slots__ = ("n", "rank", "dim", "degrees")

    def __init__(self, n: int, rank: int = 1):
        if n < 1 or rank < 1:
            raise ValueError("need n >= 1 and rank >= 1")
        self.n = n
        self.rank = rank
        self.dim = (1 << n) * rank
        self.degrees = tuple(bin(i // rank).count("1") for i in range(self.dim))

    def index(self, mask: int, e: int = 0) -> int:
        return mask * self.rank + e

    def mask_of(self, i: int) -> int:
        return i // self.rank

    def e_of(self, i: int) -> int:
        return i % self.rank

    def degree(self, i: int) -> int:
        return self.degrees[i]

    def label(self, i: int) -> str:
        mask, e = self.mask_of(i), self.e_of(i)
        modes = [str(l + 1) for l in range(self.n) if mask >> l & 1]
        form = "1" if not modes else "wb" + "^wb".join(modes)
        return form if self.rank == 1 else f"{form}(x)e{e + 1}"

    def __eq__(self, other):
        return isinstance(other, FiberBasis) and (self.n, self.rank) == (other.n, other.rank)

    def __hash__(self):
        return hash((self.n, self.rank))

    def __repr__(self):
        return f"FiberBasis(n={self.n}, rank={self.rank})"


class FiberMap:
    """Sparse exact matrix on the fiber; entries live in any scalar layer."""

    __slots__ = ("basis", "entries")

    def __init__(self, basis: FiberBasis, entries=None):
        self.basis = basis
        ee = {}
        if entries:
            for (r, c), v in entries.items():
                if not scalar_is_zero(v):
                    ee[(r, c)] = v
        self.entries = ee

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, basis) -> "FiberMap":
        return cls(basis)

    @classmethod
    def identity(cls, basis) -> "FiberMap":
        return cls(basis, {(i, i): QI(1) for i in range(basis.dim)})

    @classmethod
    def single(cls, basis, r: int, c: int, v) -> "FiberMap":
        return cls(basis, {(r, c): v})

    # -- predicates ----------------------------------------------------
    def is_zero(self) -> bool:
        return not self.entries

    def __eq__(self, other):
        if not isinstance(other, FiberMap):
            return NotImplemented
        return self.basis == other.basis and (self - other).is_zero()

    def degree_shift(self):
        """Uniform degree shift of all nonzero entries, or None if mixed."""
        deg = self.basis.degree
        shifts = {deg(r) - deg(c) for (r, c) in self.entries}
        if len(shifts) == 1:
            return shifts.pop()
        return None if shifts else 0

    def has_lambda(self) -> bool:
        return any(isinstance(v, LambdaRational) for v in self.entries.values())

    # -- linear structure ----------------------------------------------
    def __add__(self, other):
        if not isinstance(other, FiberMap):
            return NotImplemented
        out = dict(self.entries)
        for k, v in other.entries.items():
            w = out.get(k)
            w = v if w is None else w + v
            if scalar_is_zero(w):
                out.pop(k, None)
            else:
                out[k] = w
        res = FiberMap.__new__(FiberMap)
        res.basis = self.basis
        res.entries = out
        return res

    def __neg__(self):
        return FiberMap(self.basis, {k: -v for k, v in self.entries.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "FiberMap":
        if scalar_is_zero(s):
            return FiberMap(self.basis)
        return FiberMap(self.basis, {k: v * s for k, v in self.entries.items()})

    def __mul__(self, other):
        """Matrix product self o other (self applied after other)."""
        if not isinstance(other, FiberMap):
            return NotImplemented
        bycol = {}
        for (r, c), v in self.entries.items():
            bycol.setdefault(c, []).append((r, v))
        out = {}
        for (r2, c2), w in other.entries.items():
            for r1, v in bycol.get(r2, ()):
                k = (r1, c2)
                p = v * w
                u = out.get(k)
                out[k] = p if u is None else u + p
        return FiberMap(self.basis, out)

    # -- adjoints and blocks ---------------------------------------------
    def adjoint(self, formal_lambda: bool = False) -> "FiberMap":
        """Conjugate transpose in the orthonormal basis.

        Entries depending on lambda are rejected unless formal_lambda is
        set, in which case lambda is treated as a real parameter (used
        internally when mirroring half-evaluated resolvent chains).
        """
        if not formal_lambda and self.has_lambda():
            raise ValueError("adjoint of a lambda-dependent fiber map")
        return FiberMap(
            self.basis, {(c, r): scalar_conj(v) for (r, c), v in self.entries.items()}
        )

    def project_rows(self, j: int) -> "FiberMap":
        deg = self.basis.degree
        return FiberMap(self.basis, {k: v for k, v in self.entries.items() if deg(k[0]) == j})

    def scale_rows_by_degree(self, factor) -> "FiberMap":
        """factor(d) -> scalar or None (None deletes the rows)."""
        deg = self.basis.degree
        out = {}
        cache = {}
        for (r, c), v in self.entries.items():
            d = deg(r)
            if d not in cache:
                cache[d] = factor(d)
            f = cache[d]
            if f is None:
                continue
            w = v * f
            if not scalar_is_zero(w):
                out[(r, c)] = w
        return FiberMap(self.basis, out)

    def trace(self):
        acc = PiLaurent()
        for (r, c), v in self.entries.items():
            if r == c:
                acc = acc + v
        return acc

    def frobenius_sq(self):
        acc = PiLaurent()
        for v in self.entries.values():
            acc = acc + v * scalar_conj(v)
        return acc

    def map_entries(self, f) -> "FiberMap":
        return FiberMap(self.basis, {k: f(v) for k, v in self.entries.items()})

    # -- export ----------------------------------------------------------
    def to_complex_array(self, pi_val: float):
        import numpy as np

        out = np.zeros((self.basis.dim, self.basis.dim), dtype=complex)
        for (r, c), v in self.entries.items():
            if isinstance(v, QI):
                out[r, c] = v.to_complex()
            elif isinstance(v, PiLaurent):
                out[r, c] = v.to_complex(pi_val)
            else:
                raise ValueError("lambda-dependent entry in numeric export")
        return out

    def to_json(self):
        return {
            "dim": self.basis.dim,
            "entries": {
                f"{r},{c}": scalar_to_json(v) for (r, c), v in sorted(self.entries.items())
            },
        }

    def __repr__(self):
        if self.is_zero():
            return "FiberMap(0)"
        bits = ", ".join(
            f"{self.basis.label(r)}<-{self.basis.label(c)}: {v!r}"
            for (r, c), v in sorted(self.entries.items())
        )
        return f"FiberMap({bits})"


# ---------------------------------------------------------------------------
# elementary maps
# ---------------------------------------------------------------------------


def wedge(basis: FiberBasis, l: int) -> FiberMap:
    """Exterior multiplication by wbar^l, identity on the C^rank factor."""
    if not 1 <= l <= basis.n:
        raise IndexError(f"mode {l} out of range 1..{basis.n}")
    bit = 1 << (l - 1)
    entries = {}
    for mask in range(1 << basis.n):
        if mask & bit:
            continue
        sign = QI(-1 if bin(mask & (bit - 1)).count("1") % 2 else 1)
        for e in range(basis.rank):
            entries[(basis.index(mask | bit, e), basis.index(mask, e))] = sign
    return FiberMap(basis, entries)


def contraction(basis: FiberBasis, l: int) -> FiberMap:
    """Interior product i_{wbar_l}; the adjoint of wedge(l)."""
    return wedge(basis, l).adjoint()


def degree_projector(basis: FiberBasis, j: int) -> FiberMap:
    if not 0 <= j <= basis.n:
        raise IndexError(f"degree {j} out of range 0..{basis.n}")
    return FiberMap(
        basis, {(i, i): QI(1) for i in range(basis.dim) if basis.degree(i) == j}
    )


def number_operator(basis: FiberBasis) -> FiberMap:
    return FiberMap(
        basis, {(i, i): QI(basis.degree(i)) for i in range(basis.dim) if basis.degree(i)}
    )


def endo_from_bundle_matrix(basis: FiberBasis, mat) -> FiberMap:
    """Tensor a rank x rank matrix on C^rank with the identity on forms."""
    entries = {}
    for mask in range(1 << basis.n):
        for a in range(basis.rank):
            for b in range(basis.rank):
                v = mat[a][b]
                if not scalar_is_zero(v):
                    entries[(basis.index(mask, a), basis.index(mask, b))] = v
    return FiberMap(basis, entries)
