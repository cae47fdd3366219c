"""Curvature input data and construction of the model operators.

All tensors are given at the base point in the fixed unitary frames
(w_1..w_n) of (1,0)-vectors and their conjugates; indices are 0-based
in code, 1-based in error messages.

Conventions:

* ``re_mixed[k][l]`` is the rank x rank matrix R^E(w_k, wbar_l); its
  dz-frame counterpart R^E_{k lbar} = R^E(d/dz_k, d/dzbar_l) is half of
  it since w = sqrt(2) d/dz.
* ``re_anti[l][m]`` is R^E(wbar_l, wbar_m), the tensor of the
  degree-raising curvature form; ``re_hol`` is R^E(w_l, w_m) and for a
  metric connection equals -re_anti[l][m]^dagger (validated, derived
  when omitted).
* ``rtx[k][m][l][q]`` is R_{k mbar l qbar} =
  <R^TX(d/dz_k, d/dzbar_m) d/dz_l, d/dzbar_q>, with the Kaehler
  symmetries under k<->l and m<->q and the reality constraint
  conj(R_{k mbar l qbar}) = R_{m kbar q lbar}.  Non-(1,1) components
  vanish identically.
* ``d_r_z[i][l][m]`` / ``d_r_zbar[i][l][m]`` are d/dz_i resp. d/dzbar_i
  at 0 of Z -> R^E_Z(wbar_l, wbar_m) in the parallel-transport
  trivialization; ``d2_r_zz[i][j]``, ``d2_r_zzbar[i][j]``,
  ``d2_r_zbzb[i][j]`` are the corresponding second derivatives
  (d2_r_zzbar is d/dz_i d/dzbar_j: no (i,j) symmetry).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction

from .fiber import FiberBasis, FiberMap, endo_from_bundle_matrix, wedge
from .scalars import QI, PiLaurent, pil, qi, scalar_to_json
from .states import OperatorExpr

__all__ = [
    "CurvatureData",
    "validate",
    "random_data",
    "load_json",
    "dump_json",
    "scalar_curvature",
    "re_lambda_matrix",
    "re_lambda",
    "rdet_mixed",
    "curvature_form",
    "build_O2_plus",
    "build_O2_minus",
    "build_O2_zero",
    "build_O3_plus",
    "build_O3_minus",
    "build_O4_plus",
    "build_O4_minus",
    "OperatorSet",
    "UnavailableOperator",
]


# -- small exact-matrix helpers (rank x rank nested tuples of QI) ----------


def _mz(rank):
    return tuple(tuple(QI(0) for _ in range(rank)) for _ in range(rank))


def _mat(rows):
    return tuple(tuple(_to_qi(v) for v in row) for row in rows)


def _to_qi(v):
    if isinstance(v, QI):
        return v
    if isinstance(v, (int, Fraction)):
        return QI(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return QI(Fraction(str(v[0])), Fraction(str(v[1])))
    raise TypeError(f"cannot read exact complex value from {v!r}")


def _madd(a, b):
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def _mneg(a):
    return tuple(tuple(-x for x in row) for row in a)


def _mscale(a, s):
    return tuple(tuple(x * s for x in row) for row in a)


def _mdag(a):
    rank = len(a)
    return tuple(tuple(a[j][i].conj() for j in range(rank)) for i in range(rank))


def _miszero(a):
    return all(x.is_zero() for row in a for x in row)


def _meq(a, b):
    return all(x == y for ra, rb in zip(a, b) for x, y in zip(ra, rb))


@dataclass(frozen=True)
class CurvatureData:
    """Exact curvature tensors at the base point."""

    n: int
    rank: int
    re_mixed: tuple
    re_anti: tuple
    re_hol: tuple
    d_r_z: tuple
    d_r_zbar: tuple
    d2_r_zz: tuple
    d2_r_zzbar: tuple
    d2_r_zbzb: tuple
    rtx: tuple

    @classmethod
    def build(cls, n, rank, re_mixed=None, re_anti=None, re_hol=None,
              d_r_z=None, d_r_zbar=None, d2_r_zz=None, d2_r_zzbar=None,
              d2_r_zbzb=None, rtx=None) -> "CurvatureData":
        z = _mz(rank)

        def m2(t):
            if t is None:
                return tuple(tuple(z for _ in range(n)) for _ in range(n))
            return tuple(tuple(_mat(t[a][b]) for b in range(n)) for a in range(n))

        def m3(t):
            if t is None:
                return tuple(
                    tuple(tuple(z for _ in range(n)) for _ in range(n)) for _ in range(n)
                )
            return tuple(
                tuple(tuple(_mat(t[i][a][b]) for b in range(n)) for a in range(n))
                for i in range(n)
            )

        def m4(t):
            if t is None:
                return tuple(
                    tuple(
                        tuple(tuple(z for _ in range(n)) for _ in range(n))
                        for _ in range(n)
                    )
                    for _ in range(n)
                )
            return tuple(
                tuple(
                    tuple(tuple(_mat(t[i][j][a][b]) for b in range(n)) for a in range(n))
                    for j in range(n)
                )
                for i in range(n)
            )

        def s4(t):
            if t is None:
                return tuple(
                    tuple(
                        tuple(tuple(QI(0) for _ in range(n)) for _ in range(n))
                        for _ in range(n)
                    )
                    for _ in range(n)
                )
            return tuple(
                tuple(
                    tuple(tuple(_to_qi(t[k][m][l][q]) for q in range(n)) for l in range(n))
                    for m in range(n)
                )
                for k in range(n)
            )

        anti = m2(re_anti)
        if re_hol is None:
            hol = tuple(
                tuple(_mneg(_mdag(anti[l][m])) for m in range(n)) for l in range(n)
            )
        else:
            hol = m2(re_hol)
        return cls(
            n=n, rank=rank, re_mixed=m2(re_mixed), re_anti=anti, re_hol=hol,
            d_r_z=m3(d_r_z), d_r_zbar=m3(d_r_zbar), d2_r_zz=m4(d2_r_zz),
            d2_r_zzbar=m4(d2_r_zzbar), d2_r_zbzb=m4(d2_r_zbzb), rtx=s4(rtx),
        )


def validate(data: CurvatureData) -> list:
    """All symmetry invariants; empty list iff the data is admissible."""
    n = data.n
    bad = []
    for k in range(n):
        for l in range(n):
            if not _meq(_mdag(data.re_mixed[k][l]), data.re_mixed[l][k]):
                bad.append(f"re_mixed hermiticity ({k + 1},{l + 1})")
    for name, t in (("re_anti", data.re_anti), ("re_hol", data.re_hol)):
        for l in range(n):
            for m in range(n):
                if not _meq(t[l][m], _mneg(t[m][l])):
                    bad.append(f"{name} antisymmetry ({l + 1},{m + 1})")
    for l in range(n):
        for m in range(n):
            if not _meq(data.re_hol[l][m], _mneg(_mdag(data.re_anti[l][m]))):
                bad.append(f"re_hol vs re_anti metric-connection relation ({l + 1},{m + 1})")
    for name, t in (("d_r_z", data.d_r_z), ("d_r_zbar", data.d_r_zbar)):
        for i in range(n):
            for l in range(n):
                for m in range(n):
                    if not _meq(t[i][l][m], _mneg(t[i][m][l])):
                        bad.append(f"{name} antisymmetry [{i + 1}]({l + 1},{m + 1})")
    for name, t in (("d2_r_zz", data.d2_r_zz), ("d2_r_zzbar", data.d2_r_zzbar),
                    ("d2_r_zbzb", data.d2_r_zbzb)):
        for i in range(n):
            for j in range(n):
                for l in range(n):
                    for m in range(n):
                        if not _meq(t[i][j][l][m], _mneg(t[i][j][m][l])):
                            bad.append(f"{name} antisymmetry [{i + 1},{j + 1}]({l + 1},{m + 1})")
        if name != "d2_r_zzbar":
            for i in range(n):
                for j in range(n):
                    for l in range(n):
                        for m in range(n):
                            if not _meq(t[i][j][l][m], t[j][i][l][m]):
                                bad.append(f"{name} derivative symmetry ({i + 1},{j + 1})")
    R = data.rtx
    for k in range(n):
        for m in range(n):
            for l in range(n):
                for q in range(n):
                    v = R[k][m][l][q]
                    if v != R[l][m][k][q] or v != R[k][q][l][m]:
                        bad.append(f"rtx pair symmetry ({k + 1},{m + 1},{l + 1},{q + 1})")
                    if v.conj() != R[m][k][q][l]:
                        bad.append(f"rtx reality ({k + 1},{m + 1},{l + 1},{q + 1})")
    return bad


# -- derived scalars and maps -------------------------------------------------


def scalar_curvature(data: CurvatureData) -> QI:
    """r^X = 8 sum_{m,q} R_{m mbar q qbar}."""
    acc = QI(0)
    for m in range(data.n):
        for q in range(data.n):
            acc = acc + data.rtx[m][m][q][q]
    return acc * QI(8)


def re_lambda_matrix(data: CurvatureData):
    """-i sum_q R^E(w_q, wbar_q), a rank x rank matrix."""
    acc = _mz(data.rank)
    for q in range(data.n):
        acc = _madd(acc, data.re_mixed[q][q])
    return _mscale(acc, QI(0, -1))


def re_lambda(data: CurvatureData, basis: FiberBasis) -> FiberMap:
    return endo_from_bundle_matrix(basis, re_lambda_matrix(data))


def rdet_mixed(data: CurvatureData):
    """R^det(w_l, wbar_m) = 4 sum_j R_{l mbar j jbar}; the trace identity
    r^X = 2 sum_j R^det(w_j, wbar_j) is asserted."""
    n = data.n
    out = [[QI(0)] * n for _ in range(n)]
    for l in range(n):
        for m in range(n):
            acc = QI(0)
            for j in range(n):
                acc = acc + data.rtx[l][m][j][j]
            out[l][m] = acc * QI(4)
    tr = QI(0)
    for j in range(n):
        tr = tr + out[j][j]
    if tr * QI(2) != scalar_curvature(data):
        raise AssertionError("r^X = 2 tr R^det consistency failed")
    return tuple(tuple(row) for row in out)


def _riem(data: CurvatureData, A, B, C, D) -> QI:
    """<R^TX(A,B)C,D> for A..D = ('h', i) or ('a', i) in the dz-frame."""
    (ta, ia), (tb, ib), (tc, ic), (td, idd) = A, B, C, D
    if ta == tb or tc == td:
        return QI(0)  # Kaehler: only (1,1)-type survives in each pair
    sign = 1
    if ta == "a":
        ia, ib = ib, ia
        sign = -sign
    if tc == "a":
        ic, idd = idd, ic
        sign = -sign
    v = data.rtx[ia][ib][ic][idd]
    return v if sign == 1 else -v


def _re_pair(data: CurvatureData, A, B):
    """R^E(A, B) as a rank x rank matrix, A, B in the dz-frame."""
    (ta, ia), (tb, ib) = A, B
    half = QI(Fraction(1, 2))
    if ta == "h" and tb == "a":
        return _mscale(data.re_mixed[ia][ib], half)
    if ta == "a" and tb == "h":
        return _mscale(data.re_mixed[ib][ia], -half)
    if ta == "h" and tb == "h":
        return _mscale(data.re_hol[ia][ib], half)
    return _mscale(data.re_anti[ia][ib], half)


def curvature_form(data: CurvatureData, basis: FiberBasis) -> FiberMap:
    """The degree-raising map sum_{l,m} R^E(wbar_l, wbar_m) wbar^l ^ wbar^m ^ ."""
    acc = FiberMap.zero(basis)
    for l in range(data.n):
        for m in range(data.n):
            coef = data.re_anti[l][m]
            if _miszero(coef):
                continue
            acc = acc + endo_from_bundle_matrix(basis, coef) * (
                wedge(basis, l + 1) * wedge(basis, m + 1)
            )
    return acc


# -- operator builders -------------------------------------------------------


def build_O2_plus(data: CurvatureData, basis: FiberBasis) -> OperatorExpr:
    return OperatorExpr.from_fiber(basis, curvature_form(data, basis))


def build_O2_minus(data: CurvatureData, basis: FiberBasis) -> OperatorExpr:
    return build_O2_plus(data, basis).adjoint()


def _deriv_form(data, basis, tensor, i, j=None) -> FiberMap:
    acc = FiberMap.zero(basis)
    for l in range(data.n):
        for m in range(data.n):
            coef = tensor[i][l][m] if j is None else tensor[i][j][l][m]
            if _miszero(coef):
                continue
            acc = acc + endo_from_bundle_matrix(basis, coef) * (
                wedge(basis, l + 1) * wedge(basis, m + 1)
            )
    return acc


def build_O3_plus(data: CurvatureData, basis: FiberBasis) -> OperatorExpr:
    """z_i dR/dz_i(0) + zbar_i dR/dzbar_i(0), R the raising curvature form."""
    words = []
    for i in range(data.n):
        Fz = _deriv_form(data, basis, data.d_r_z, i)
        if not Fz.is_zero():
            words.append((QI(1), (("z", i), ("fiber", Fz))))
        Fzb = _deriv_form(data, basis, data.d_r_zbar, i)
        if not Fzb.is_zero():
            words.append((QI(1), (("zbar", i), ("fiber", Fzb))))
    return OperatorExpr(basis, words)


def build_O3_minus(data: CurvatureData, basis: FiberBasis) -> OperatorExpr:
    return build_O3_plus(data, basis).adjoint()


def build_O4_plus(data: CurvatureData, basis: FiberBasis) -> OperatorExpr:
    """(z_i z_j / 2) d2R/dz_i dz_j + z_i zbar_j d2R/dz_i dzbar_j
    + (zbar_i zbar_j / 2) d2R/dzbar_i dzbar_j, all at 0."""
    half = QI(Fraction(1, 2))
    words = []
    for i in range(data.n):
        for j in range(data.n):
            F = _deriv_form(data, basis, data.d2_r_zz, i, j)
            if not F.is_zero():
                words.append((half, (("z", i), ("z", j), ("fiber", F))))
            F = _deriv_form(data, basis, data.d2_r_zzbar, i, j)
            if not F.is_zero():
                words.append((QI(1), (("z", i), ("zbar", j), ("fiber", F))))
            F = _deriv_form(data, basis, data.d2_r_zbzb, i, j)
            if not F.is_zero():
                words.append((half, (("zbar", i), ("zbar", j), ("fiber", F))))
    return OperatorExpr(basis, words)


def build_O4_minus(data: CurvatureData, basis: FiberBasis) -> OperatorExpr:
    return build_O4_plus(data, basis).adjoint()


def _frame_vectors(n):
    """Real orthonormal frame in dz-components: e_{2p} = dz_p + dzbar_p,
    e_{2p+1} = i dz_p - i dzbar_p (the only reading making a frame)."""
    frame = []
    for p in range(n):
        frame.append(((("h", p), QI(1)), (("a", p), QI(1))))
        frame.append(((("h", p), QI(0, 1)), (("a", p), QI(0, -1))))
    return frame


def _grad_gen(comp):
    """nabla_0 along a dz-frame direction as (ladder generator, coeff)."""
    t, i = comp
    if t == "h":
        return ("b", i), QI(Fraction(-1, 2))
    return ("b+", i), QI(Fraction(1, 2))


def build_O2_zero(data: CurvatureData, basis: FiberBasis) -> OperatorExpr:
    """The degree-preserving second Taylor coefficient of the rescaled
    operator family:

        (1/3) <R(Z,e_i) Z, e_j> nabla_i nabla_j
        - sum_j R^E(w_j, wbar_j) - r^X/6
        + ( <(1/3) R(Z,e_k) e_k + (pi/3) R(z,zbar) Z, e_j>
            - R^E(Z, e_j) ) nabla_j

    with R = R^TX, nabla = nabla_0, real-frame sums expanded into the
    complex ladder generators.
    """
    n = data.n
    frame = _frame_vectors(n)
    # sum_a e_a (x) e_a expanded into dz-frame component pairs; each frame
    # vector is bilinear in the expression (pairing slot and nabla slot),
    # so cross terms between its components are kept.
    frame_tensor = [
        (c1, c2, w1 * w2)
        for ea in frame
        for (c1, w1) in ea
        for (c2, w2) in ea
    ]
    Zcomps = [(("h", k), ("z", k)) for k in range(n)] + [
        (("a", k), ("zbar", k)) for k in range(n)
    ]
    third = QI(Fraction(1, 3))
    words = []

    # second order: (1/3) <R(Z, e_a) Z, e_b> nabla_a nabla_b
    for ca, ca2, wa in frame_tensor:
        ga, cga = _grad_gen(ca2)
        for cb, cb2, wb in frame_tensor:
            gb, cgb = _grad_gen(cb2)
            for u, mu in Zcomps:
                for v, mv in Zcomps:
                    r = _riem(data, u, ca, v, cb)
                    if r.is_zero():
                        continue
                    coeff = r * wa * wb * cga * cgb * third
                    words.append((coeff, (mu, mv, ga, gb)))

    # potential: -sum_j R^E(w_j, wbar_j) - r^X/6
    pot = _mz(data.rank)
    for j in range(n):
        pot = _madd(pot, data.re_mixed[j][j])
    if not _miszero(pot):
        words.append((QI(-1), (("fiber", endo_from_bundle_matrix(basis, pot)),)))
    rX = scalar_curvature(data)
    if not rX.is_zero():
        words.append(
            (rX * QI(Fraction(-1, 6)), (("fiber", FiberMap.identity(basis)),))
        )

    # first order
    for cb, cb2, wb in frame_tensor:
        gb, cgb = _grad_gen(cb2)
        # (1/3) <R(Z, e_k) e_k, e_b>
        for c1, c2, wk in frame_tensor:
            for u, mu in Zcomps:
                r = _riem(data, u, c1, c2, cb)
                if r.is_zero():
                    continue
                coeff = r * wk * wb * cgb * third
                words.append((coeff, (mu, gb)))
        # (pi/3) <R(z, zbar) Z, e_b>
        for k in range(n):
            for m in range(n):
                for u, mu in Zcomps:
                    r = _riem(data, ("h", k), ("a", m), u, cb)
                    if r.is_zero():
                        continue
                    coeff = pil(Fraction(1, 3), 1) * (r * wb * cgb)
                    words.append((coeff, (("z", k), ("zbar", m), mu, gb)))
        # - R^E(Z, e_b)
        for u, mu in Zcomps:
            mat = _re_pair(data, u, cb)
            if _miszero(mat):
                continue
            F = endo_from_bundle_matrix(basis, _mscale(mat, wb * cgb * QI(-1)))
            words.append((QI(1), (mu, ("fiber", F), gb)))

    return OperatorExpr(basis, words)


# -- the operator family used by the engine ----------------------------------


class UnavailableOperator(Exception):
    """Raised when a requested term needs a Taylor coefficient the model
    does not provide (anything outside O2^0, O2^{+-2}, O3^{+-2}, O4^{+-2})."""


class OperatorSet:
    """All available Taylor-coefficient operators for one CurvatureData."""

    #: (order, shift) pairs the model provides
    AVAILABLE = frozenset(
        {(2, -2), (2, 0), (2, 2), (3, -2), (3, 2), (4, -2), (4, 2)}
    )

    def __init__(self, data: CurvatureData, basis: FiberBasis):
        if data.n != basis.n or data.rank != basis.rank:
            raise ValueError("CurvatureData and FiberBasis disagree on (n, rank)")
        bad = validate(data)
        if bad:
            raise ValueError("invalid curvature data: " + "; ".join(bad[:5]))
        self.data = data
        self.basis = basis
        self.parts = {
            (2, 2): build_O2_plus(data, basis),
            (2, -2): build_O2_minus(data, basis),
            (2, 0): build_O2_zero(data, basis),
            (3, 2): build_O3_plus(data, basis),
            (3, -2): build_O3_minus(data, basis),
            (4, 2): build_O4_plus(data, basis),
            (4, -2): build_O4_minus(data, basis),
        }
        self._full = {}
        self._full_adj = {}

    def orders(self):
        return (2, 3, 4)

    def full(self, order: int) -> OperatorExpr:
        if order not in self._full:
            if order not in self.orders():
                raise UnavailableOperator(f"O_{order} is not available")
            acc = OperatorExpr.zero(self.basis)
            for (o, s), expr in self.parts.items():
                if o == order:
                    acc = acc + expr
            self._full[order] = acc
        return self._full[order]

    def full_adjoint(self, order: int) -> OperatorExpr:
        if order not in self._full_adj:
            self._full_adj[order] = self.full(order).adjoint()
        return self._full_adj[order]


# -- random data and JSON i/o -------------------------------------------------


def _rand_frac(rng) -> Fraction:
    return Fraction(rng.randint(-4, 4), rng.randint(1, 3))


def _rand_qi(rng, real=False) -> QI:
    return QI(_rand_frac(rng), 0 if real else _rand_frac(rng))


def random_data(n: int, rank: int, seed: int) -> CurvatureData:
    """Symmetry-valid draw with small rational entries (|num|, den <= 9)."""
    rng = random.Random(seed)

    def rmat(real=False):
        return tuple(tuple(_rand_qi(rng, real) for _ in range(rank)) for _ in range(rank))

    def zmat():
        return _mz(rank)

    # re_mixed: hermitian pairing across (k,l)
    mixed = [[None] * n for _ in range(n)]
    for k in range(n):
        for l in range(k, n):
            m = rmat()
            if k == l:
                m = _mscale(_madd(m, _mdag(m)), QI(Fraction(1, 2)))
            mixed[k][l] = m
            if k != l:
                mixed[l][k] = _mdag(m)
    # re_anti: antisymmetric
    anti = [[zmat() for _ in range(n)] for _ in range(n)]
    for l in range(n):
        for m in range(l + 1, n):
            a = rmat()
            anti[l][m] = a
            anti[m][l] = _mneg(a)

    def anti_lm():
        out = [[zmat() for _ in range(n)] for _ in range(n)]
        for l in range(n):
            for m in range(l + 1, n):
                a = rmat()
                out[l][m] = a
                out[m][l] = _mneg(a)
        return out

    d_r_z = [anti_lm() for _ in range(n)]
    d_r_zbar = [anti_lm() for _ in range(n)]
    d2_zz = [[None] * n for _ in range(n)]
    d2_zbzb = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            a = anti_lm()
            d2_zz[i][j] = a
            d2_zz[j][i] = a
            b = anti_lm()
            d2_zbzb[i][j] = b
            d2_zbzb[j][i] = b
    d2_zzbar = [[anti_lm() for _ in range(n)] for _ in range(n)]

    # rtx: fill symmetry orbits with reality propagation
    rtx = {}

    def orbit(t):
        k, m, l, q = t
        return {(k, m, l, q), (l, m, k, q), (k, q, l, m), (l, q, k, m)}

    def cmap(t):
        k, m, l, q = t
        return (m, k, q, l)

    for k in range(n):
        for m in range(n):
            for l in range(n):
                for q in range(n):
                    t = (k, m, l, q)
                    if t in rtx:
                        continue
                    orb = orbit(t)
                    corb = {cmap(s) for s in orb}
                    v = _rand_qi(rng, real=bool(orb & corb))
                    for s in orb:
                        rtx[s] = v
                    for s in corb:
                        rtx[s] = v.conj()
    rtx_t = tuple(
        tuple(tuple(tuple(rtx[(k, m, l, q)] for q in range(n)) for l in range(n))
              for m in range(n))
        for k in range(n)
    )

    data = CurvatureData.build(
        n, rank,
        re_mixed=mixed, re_anti=anti,
        d_r_z=d_r_z, d_r_zbar=d_r_zbar,
        d2_r_zz=d2_zz, d2_r_zzbar=d2_zzbar, d2_r_zbzb=d2_zbzb,
        rtx=rtx_t,
    )
    bad = validate(data)
    if bad:  # pragma: no cover - generator bug guard
        raise AssertionError("random_data produced invalid tensors: " + bad[0])
    return data


SCHEMA_VERSION = 1


def _qi_json(v: QI):
    return scalar_to_json(v)


def _mat_json(m):
    return [[_qi_json(v) for v in row] for row in m]


def dump_json(data: CurvatureData) -> dict:
    n = data.n
    return {
        "schema_version": SCHEMA_VERSION,
        "n": n,
        "rank": data.rank,
        "re_mixed": [[_mat_json(data.re_mixed[k][l]) for l in range(n)] for k in range(n)],
        "re_anti": [[_mat_json(data.re_anti[k][l]) for l in range(n)] for k in range(n)],
        "re_hol": [[_mat_json(data.re_hol[k][l]) for l in range(n)] for k in range(n)],
        "d_r_z": [[[_mat_json(data.d_r_z[i][l][m]) for m in range(n)] for l in range(n)]
                  for i in range(n)],
        "d_r_zbar": [[[_mat_json(data.d_r_zbar[i][l][m]) for m in range(n)]
                      for l in range(n)] for i in range(n)],
        "d2_r_zz": [[[[_mat_json(data.d2_r_zz[i][j][l][m]) for m in range(n)]
                      for l in range(n)] for j in range(n)] for i in range(n)],
        "d2_r_zzbar": [[[[_mat_json(data.d2_r_zzbar[i][j][l][m]) for m in range(n)]
                         for l in range(n)] for j in range(n)] for i in range(n)],
        "d2_r_zbzb": [[[[_mat_json(data.d2_r_zbzb[i][j][l][m]) for m in range(n)]
                        for l in range(n)] for j in range(n)] for i in range(n)],
        "rtx": [[[[_qi_json(data.rtx[k][m][l][q]) for q in range(n)] for l in range(n)]
                 for m in range(n)] for k in range(n)],
    }


def load_json(obj, strict: bool = True) -> CurvatureData:
    """Read the documented schema; with strict=False, symmetrize instead
    of rejecting (antisymmetrize pairs, hermitianize re_mixed, average
    rtx over its symmetry orbit with conjugation)."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    if obj.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {obj.get('schema_version')!r}")
    n, rank = int(obj["n"]), int(obj["rank"])
    data = CurvatureData.build(
        n, rank,
        re_mixed=obj.get("re_mixed"), re_anti=obj.get("re_anti"),
        re_hol=obj.get("re_hol"),
        d_r_z=obj.get("d_r_z"), d_r_zbar=obj.get("d_r_zbar"),
        d2_r_zz=obj.get("d2_r_zz"), d2_r_zzbar=obj.get("d2_r_zzbar"),
        d2_r_zbzb=obj.get("d2_r_zbzb"), rtx=obj.get("rtx"),
    )
    bad = validate(data)
    if not bad:
        return data
    if strict:
        raise ValueError("curvature data violates symmetries: " + "; ".join(bad[:8]))
    return _symmetrize(data)


def _symmetrize(data: CurvatureData) -> CurvatureData:
    n, rank = data.n, data.rank
    half = QI(Fraction(1, 2))

    def herm2(t):
        return tuple(
            tuple(_mscale(_madd(t[k][l], _mdag(t[l][k])), half) for l in range(n))
            for k in range(n)
        )

    def anti2(t):
        return tuple(
            tuple(_mscale(_madd(t[l][m], _mneg(t[m][l])), half) for m in range(n))
            for l in range(n)
        )

    def anti3(t):
        return tuple(anti2(t[i]) for i in range(n))

    def sym_ij(t):
        return tuple(
            tuple(
                tuple(
                    tuple(_mscale(_madd(t[i][j][l][m], t[j][i][l][m]), half)
                          for m in range(n))
                    for l in range(n)
                )
                for j in range(n)
            )
            for i in range(n)
        )

    def anti4(t):
        return tuple(
            tuple(anti2(t[i][j]) for j in range(n)) for i in range(n)
        )

    quarter = QI(Fraction(1, 4))
    eighth = QI(Fraction(1, 8))
    R = data.rtx

    def rsym(k, m, l, q):
        s = R[k][m][l][q] + R[l][m][k][q] + R[k][q][l][m] + R[l][q][k][m]
        c = R[m][k][q][l] + R[m][l][q][k] + R[q][k][m][l] + R[q][l][m][k]
        return s * eighth + c.conj() * eighth

    rtx = tuple(
        tuple(tuple(tuple(rsym(k, m, l, q) for q in range(n)) for l in range(n))
              for m in range(n))
        for k in range(n)
    )
    anti = anti2(data.re_anti)
    out = CurvatureData(
        n=n, rank=rank,
        re_mixed=herm2(data.re_mixed),
        re_anti=anti,
        re_hol=tuple(tuple(_mneg(_mdag(anti[l][m])) for m in range(n)) for l in range(n)),
        d_r_z=anti3(data.d_r_z), d_r_zbar=anti3(data.d_r_zbar),
        d2_r_zz=anti4(sym_ij(data.d2_r_zz)),
        d2_r_zzbar=anti4(data.d2_r_zzbar),
        d2_r_zbzb=anti4(sym_ij(data.d2_r_zbzb)),
        rtx=rtx,
    )
    bad = validate(out)
    if bad:
        raise ValueError("symmetrization failed: " + "; ".join(bad[:5]))
    return out
