"""Closed state class and rewrite engine for the model kernel calculus.

A :class:`KernelState` is a finite sum of monomials

    b^alpha  z^beta  zbar'^gamma  z'^delta  P(Z,Z')  (x)  M

where P(Z,Z') = exp(-pi/2 (|z|^2+|z'|^2-2 z.zbar')) is the Gaussian
reproducing kernel, b_i = -2 d/dz_i + pi zbar_i are the lowering-side
ladder operators acting on the Z variable, primes mark inert monomials
in the second (parameter) variable, and M is an exact :class:`FiberMap`.

The generator set {b_i, b_i^+, z_i, zbar_i, d/dz_i, d/dzbar_i, fiber
maps} acts in closed form on this class via the commutation table

    [b_i, b_j^+] = -4 pi delta_ij,   [g(z,zbar), b_j]   =  2 dg/dz_j,
    [b_i, b_j] = [b_i^+, b_j^+] = 0, [g(z,zbar), b_j^+] = -2 dg/dzbar_j,

together with the kernel identities b_i^+ P = 0 and
zbar_i P = (b_i/(2 pi) + zbar'_i) P.  Derivatives are eliminated on
application through d/dz_i = (pi zbar_i - b_i)/2 and
d/dzbar_i = (b_i^+ - pi z_i)/2.

Each monomial with a degree-homogeneous fiber row block is an
eigenvector of L0 = sum_i b_i b_i^+ + 4 pi N with eigenvalue
4 pi (|alpha| + rowdeg), which is what makes resolvent insertions act
as scalar lambda-rational factors per block.
"""

from __future__ import annotations

from fractions import Fraction

from .fiber import FiberBasis, FiberMap
from .scalars import (
    LAMBDA_INV,
    ONE,
    PiLaurent,
    QI,
    lam_pole_factor,
    pil,
    scalar_conj,
)

__all__ = [
    "KernelState",
    "OperatorExpr",
    "gaussian_moment",
    "compose_at_origin",
    "GEN_KINDS",
]

GEN_KINDS = ("b", "b+", "z", "zbar", "dz", "dzbar", "fiber")


def _bump(t: tuple, i: int, by: int = 1) -> tuple:
    out = list(t)
    out[i] += by
    return tuple(out)


class KernelState:
    """Finite sum of canonical monomials acting on the Gaussian kernel."""

    __slots__ = ("basis", "n", "terms")

    def __init__(self, basis: FiberBasis, terms=None):
        self.basis = basis
        self.n = basis.n
        tt = {}
        if terms:
            for key, M in terms.items():
                if not M.is_zero():
                    tt[key] = M
        self.terms = tt

    # -- constructors ---------------------------------------------------
    @classmethod
    def projector_kernel(cls, basis: FiberBasis) -> "KernelState":
        """P(Z,Z') (x) I_0, the kernel of the L0 ground-state projector."""
        from .fiber import degree_projector

        z = (0,) * basis.n
        return cls(basis, {(z, z, z, z): degree_projector(basis, 0)})

    @classmethod
    def pure(cls, basis, alpha, beta, gamma, delta, M) -> "KernelState":
        return cls(basis, {(tuple(alpha), tuple(beta), tuple(gamma), tuple(delta)): M})

    @classmethod
    def zero(cls, basis) -> "KernelState":
        return cls(basis)

    # -- linear structure -------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "KernelState") -> "KernelState":
        out = dict(self.terms)
        for k, M in other.terms.items():
            w = out.get(k)
            w = M if w is None else w + M
            if w.is_zero():
                out.pop(k, None)
            else:
                out[k] = w
        res = KernelState.__new__(KernelState)
        res.basis, res.n, res.terms = self.basis, self.n, out
        return res

    def __sub__(self, other):
        return self + other.scale(QI(-1))

    def scale(self, s) -> "KernelState":
        return KernelState(self.basis, {k: M.scale(s) for k, M in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, KernelState):
            return NotImplemented
        return (self - other).is_zero()

    def num_terms(self) -> int:
        return len(self.terms)

    # -- generator action --------------------------------------------------
    def apply_b(self, i: int) -> "KernelState":
        return KernelState(
            self.basis,
            {(_bump(a, i), b, g, d): M for (a, b, g, d), M in self.terms.items()},
        )

    def apply_bplus(self, i: int) -> "KernelState":
        # b_i^+ b^alpha = b^alpha b_i^+ + 4 pi alpha_i b^{alpha-e_i};
        # then b_i^+ commutes with z^beta and kills P.
        out = KernelState.zero(self.basis)
        for (a, b, g, d), M in self.terms.items():
            if a[i]:
                out = out + KernelState.pure(
                    self.basis, _bump(a, i, -1), b, g, d, M.scale(pil(4 * a[i], 1))
                )
        return out

    def apply_z(self, i: int) -> "KernelState":
        # z_i b^alpha = b^alpha z_i + 2 alpha_i b^{alpha-e_i}
        out = {}
        for (a, b, g, d), M in self.terms.items():
            _acc(out, (a, _bump(b, i), g, d), M)
            if a[i]:
                _acc(out, (_bump(a, i, -1), b, g, d), M.scale(QI(2 * a[i])))
        return KernelState(self.basis, out)

    def apply_zbar(self, i: int) -> "KernelState":
        # zbar_i commutes with b^alpha; on z^beta P it contributes a
        # b-raise, a z-lower and a parameter raise:
        #   zbar_i z^b P = (1/2pi) b_i z^b P + (b_i/pi-coeff) z^{b-e_i} P
        #                 + z^b zbar'_i P
        out = {}
        for (a, b, g, d), M in self.terms.items():
            _acc(out, (_bump(a, i), b, g, d), M.scale(pil(Fraction(1, 2), -1)))
            if b[i]:
                _acc(out, (a, _bump(b, i, -1), g, d), M.scale(pil(b[i], -1)))
            _acc(out, (a, b, _bump(g, i), d), M)
        return KernelState(self.basis, out)

    def apply_dz(self, i: int) -> "KernelState":
        # d/dz_i = (pi zbar_i - b_i)/2
        zb = self.apply_zbar(i).scale(pil(Fraction(1, 2), 1))
        bb = self.apply_b(i).scale(QI(Fraction(-1, 2)))
        return zb + bb

    def apply_dzbar(self, i: int) -> "KernelState":
        # d/dzbar_i = (b_i^+ - pi z_i)/2
        bp = self.apply_bplus(i).scale(QI(Fraction(1, 2)))
        zz = self.apply_z(i).scale(pil(Fraction(-1, 2), 1))
        return bp + zz

    def apply_fiber(self, F: FiberMap) -> "KernelState":
        return KernelState(self.basis, {k: F * M for k, M in self.terms.items()})

    def apply_gen(self, gen) -> "KernelState":
        kind, arg = gen
        if kind == "b":
            return self.apply_b(arg)
        if kind == "b+":
            return self.apply_bplus(arg)
        if kind == "z":
            return self.apply_z(arg)
        if kind == "zbar":
            return self.apply_zbar(arg)
        if kind == "dz":
            return self.apply_dz(arg)
        if kind == "dzbar":
            return self.apply_dzbar(arg)
        if kind == "fiber":
            return self.apply_fiber(arg)
        raise ValueError(f"unknown generator {kind!r}")

    # -- spectral action ----------------------------------------------------
    def apply_L0(self) -> "KernelState":
        """L0 = sum_i b_i b_i^+ + 4 pi N; eigenvalue 4 pi (|alpha| + rowdeg)."""
        out = {}
        for (a, b, g, d), M in self.terms.items():
            k = sum(a)
            M2 = M.scale_rows_by_degree(lambda deg: pil(4 * (k + deg), 1))
            if not M2.is_zero():
                out[(a, b, g, d)] = M2
        return KernelState(self.basis, out)

    def apply_resolvent_nperp(self) -> "KernelState":
        """(lam - L0)^{-1} P^{Nperp}: per eigenblock factor, kernel killed."""
        out = {}
        for (a, b, g, d), M in self.terms.items():
            k = sum(a)
            M2 = M.scale_rows_by_degree(
                lambda deg: None if k + deg == 0 else lam_pole_factor(k + deg)
            )
            if not M2.is_zero():
                out[(a, b, g, d)] = M2
        return KernelState(self.basis, out)

    def apply_resolvent_at_zero(self) -> "KernelState":
        """(0 - L0)^{-1} P^{Nperp} = -L0^{-1} P^{Nperp}; sign kept explicit."""
        out = {}
        for (a, b, g, d), M in self.terms.items():
            k = sum(a)
            M2 = M.scale_rows_by_degree(
                lambda deg: None if k + deg == 0 else pil(Fraction(-1, 4 * (k + deg)), -1)
            )
            if not M2.is_zero():
                out[(a, b, g, d)] = M2
        return KernelState(self.basis, out)

    def project_N(self) -> "KernelState":
        """Keep the ker(L0) component: |alpha| = 0 and fiber row degree 0."""
        out = {}
        for (a, b, g, d), M in self.terms.items():
            if sum(a):
                continue
            M2 = M.project_rows(0)
            if not M2.is_zero():
                out[(a, b, g, d)] = M2
        return KernelState(self.basis, out)

    def apply_projN_over_lambda(self) -> "KernelState":
        return self.project_N().scale(LAMBDA_INV)

    def drop_params(self) -> "KernelState":
        """Discard monomials carrying primed variables.

        Sound inside a left-to-origin evaluation: no rewrite rule ever
        lowers gamma or delta, and both must vanish at the final
        diagonal evaluation.
        """
        zero = (0,) * self.n
        return KernelState(
            self.basis,
            {k: M for k, M in self.terms.items() if k[2] == zero and k[3] == zero},
        )

    # -- polynomial expansion and evaluation ---------------------------------
    def expand_poly(self) -> dict:
        """Eliminate b's: {(zpow, zbarpow, gamma, delta): FiberMap}.

        Uses b_i(q P) = (-2 dq/dz_i + 2 pi zbar_i q - 2 pi zbar'_i q) P.
        """
        out = {}
        for (a, b, g, d), M in self.terms.items():
            poly = {(b, (0,) * self.n, g, d): ONE}
            for i in range(self.n):
                for _ in range(a[i]):
                    poly = _apply_b_poly(poly, i, self.n)
            for key, c in poly.items():
                Mc = M.scale(c)
                if not Mc.is_zero():
                    w = out.get(key)
                    w = Mc if w is None else w + Mc
                    if w.is_zero():
                        out.pop(key, None)
                    else:
                        out[key] = w
        return {k: v for k, v in out.items() if not v.is_zero()}

    def eval_first_zero(self) -> dict:
        """Kernel at (0, Z'): {(gamma, delta): FiberMap}, P(0,Z') implied."""
        zero = (0,) * self.n
        out = {}
        for (zp, zbp, g, d), M in self.expand_poly().items():
            if zp == zero and zbp == zero:
                w = out.get((g, d))
                out[(g, d)] = M if w is None else w + M
        return {k: v for k, v in out.items() if not v.is_zero()}

    def eval_origin(self) -> FiberMap:
        """Kernel value at (0, 0): set z = zbar = primes = 0 and P = 1."""
        zero = (0,) * self.n
        acc = FiberMap.zero(self.basis)
        for (g, d), M in self.eval_first_zero().items():
            if g == zero and d == zero:
                acc = acc + M
        return acc

    def adjoint_state(self, formal_lambda: bool = False) -> "KernelState":
        """The mirror state S* with S*(V, W) = S(W, V)^dagger.

        Conjugation swaps the roles of variable and parameter monomials;
        conjugated zbar-powers of the old variable re-enter as zbar
        multiplications and are re-canonicalized.
        """
        zero = (0,) * self.n
        out = KernelState.zero(self.basis)
        for (zp, zbp, g, d), M in self.expand_poly().items():
            Mc = FiberMap(
                self.basis,
                {(c, r): scalar_conj(v) for (r, c), v in M.entries.items()},
            )
            if not formal_lambda and Mc.has_lambda():
                raise ValueError("mirror of a lambda-dependent state needs formal_lambda")
            s = KernelState.pure(self.basis, zero, g, zp, zbp, Mc)
            for i in range(self.n):
                for _ in range(d[i]):
                    s = s.apply_zbar(i)
            out = out + s
        return out

    # -- inner products --------------------------------------------------------
    def inner(self, other: "KernelState"):
        """L2 inner product, conjugate linear on the left; fiber parts are
        contracted with trace(M1^dagger M2).  Both states must be free of
        primed variables (they are functions of Z alone, P(Z,0) implied).
        """
        zero = (0,) * self.n
        for st in (self, other):
            for key in st.terms:
                if key[2] != zero or key[3] != zero:
                    raise ValueError("inner product needs prime-free states")
        # expansions are taken at Z' = 0, where primed monomials vanish
        p1 = {k: v for k, v in self.expand_poly().items() if k[2] == zero and k[3] == zero}
        p2 = {k: v for k, v in other.expand_poly().items() if k[2] == zero and k[3] == zero}
        acc = PiLaurent()
        for (z1, zb1, g1, d1), M1 in p1.items():
            for (z2, zb2, g2, d2), M2 in p2.items():
                mom = gaussian_moment(
                    tuple(x + y for x, y in zip(zb1, z2)),
                    tuple(x + y for x, y in zip(z1, zb2)),
                )
                if mom.is_zero():
                    continue
                tr = (M1.adjoint(formal_lambda=True) * M2).trace()
                acc = acc + mom * tr
        return acc

    # -- debug -------------------------------------------------------------------
    def dump(self) -> str:
        lines = []
        for (a, b, g, d) in sorted(self.terms):
            M = self.terms[(a, b, g, d)]
            lines.append(f"b^{a} z^{b} zbar'^{g} z'^{d} :: {M!r}")
        return "\n".join(lines)

    def __repr__(self):
        return f"KernelState({len(self.terms)} terms)"


def _acc(d: dict, key, M: FiberMap):
    w = d.get(key)
    w = M if w is None else w + M
    if w.is_zero():
        d.pop(key, None)
    else:
        d[key] = w


def _apply_b_poly(poly: dict, i: int, n: int) -> dict:
    """One b_i on a polynomial-times-P expression."""
    out = {}
    for (zp, zbp, g, d), c in poly.items():
        if zp[i]:  # -2 d/dz_i
            _pacc(out, (_bump(zp, i, -1), zbp, g, d), c * QI(-2 * zp[i]))
        _pacc(out, (zp, _bump(zbp, i), g, d), c * pil(2, 1))  # +2 pi zbar_i
        _pacc(out, (zp, zbp, _bump(g, i), d), c * pil(-2, 1))  # -2 pi zbar'_i
    return out


def _pacc(d: dict, key, c):
    w = d.get(key)
    w = c if w is None else w + c
    if isinstance(w, PiLaurent) and w.is_zero():
        d.pop(key, None)
    else:
        d[key] = w


def gaussian_moment(beta, gamma) -> PiLaurent:
    """integral over C^n of z^beta zbar^gamma e^{-pi |z|^2}:
    delta_{beta,gamma} * beta! / pi^{|beta|}."""
    beta, gamma = tuple(beta), tuple(gamma)
    if beta != gamma:
        return PiLaurent()
    num = 1
    for bi in beta:
        for t in range(2, bi + 1):
            num *= t
    return pil(num, -sum(beta))


def compose_at_origin(left: KernelState, right: KernelState) -> FiberMap:
    """Exact integral  int L(0,Z) R(0,Z)^dagger dZ  via Gaussian moments.

    With R chosen as the adjoint state of an operator B (so that
    R(0,Z)^dagger = B(Z,0)), this is the kernel of (L-op o B) at (0,0).
    """
    if left.basis != right.basis:
        raise ValueError("mismatched fiber bases")
    L = left.eval_first_zero()
    R = right.eval_first_zero()
    acc = FiberMap.zero(left.basis)
    for (gl, dl), ML in L.items():
        for (gr, dr), MR in R.items():
            mom = gaussian_moment(
                tuple(x + y for x, y in zip(dl, gr)),
                tuple(x + y for x, y in zip(gl, dr)),
            )
            if mom.is_zero():
                continue
            acc = acc + (ML * MR.adjoint(formal_lambda=True)).scale(mom)
    return acc


class OperatorExpr:
    """Sum of scalar-weighted words in the generators.

    A word is a tuple applied right to left (the last generator acts
    first), matching operator composition as written on paper.
    """

    __slots__ = ("basis", "words")

    def __init__(self, basis: FiberBasis, words=None):
        self.basis = basis
        self.words = list(words or [])

    @classmethod
    def zero(cls, basis) -> "OperatorExpr":
        return cls(basis)

    @classmethod
    def from_fiber(cls, basis, F: FiberMap, coeff=None) -> "OperatorExpr":
        if F.is_zero():
            return cls(basis)
        return cls(basis, [(coeff if coeff is not None else QI(1), (("fiber", F),))])

    def __add__(self, other: "OperatorExpr") -> "OperatorExpr":
        return OperatorExpr(self.basis, self.words + other.words)

    def scale(self, s) -> "OperatorExpr":
        return OperatorExpr(self.basis, [(c * s, w) for (c, w) in self.words])

    def is_zero_expr(self) -> bool:
        return not self.words

    def apply(self, state: KernelState) -> KernelState:
        out = KernelState.zero(state.basis)
        for coeff, word in self.words:
            s = state
            for gen in reversed(word):
                s = s.apply_gen(gen)
                if s.is_zero():
                    break
            else:
                out = out + s.scale(coeff)
        return out

    def adjoint(self) -> "OperatorExpr":
        flip = {"b": "b+", "b+": "b", "z": "zbar", "zbar": "z"}
        words = []
        for coeff, word in self.words:
            gens = []
            for kind, arg in reversed(word):
                if kind == "fiber":
                    gens.append(("fiber", arg.adjoint()))
                elif kind in flip:
                    gens.append((flip[kind], arg))
                else:
                    raise ValueError("eliminate derivatives before taking adjoints")
            words.append((scalar_conj(coeff), tuple(gens)))
        return OperatorExpr(self.basis, words)

    def degree_shifts(self) -> set:
        """Possible fiber-degree shifts of the words' fiber factors."""
        shifts = set()
        for _, word in self.words:
            s = 0
            ok = True
            for kind, arg in word:
                if kind == "fiber":
                    sh = arg.degree_shift()
                    if sh is None:
                        ok = False
                        break
                    s += sh
            if ok:
                shifts.add(s)
        return shifts

    def __len__(self):
        return len(self.words)

    def __repr__(self):
        return f"OperatorExpr({len(self.words)} words)"
