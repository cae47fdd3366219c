"""Resolvent-series term enumeration, structural pruning, and exact
evaluation of diagonal expansion-coefficient blocks.

A term of the series for the 2r-th kernel coefficient is

    L^{eta_1}(lam) O_{r_1} L^{eta_2}(lam) ... O_{r_k} L^{eta_{k+1}}(lam)

with r_1 + ... + r_k = 2r, r_i >= 2, and each slot either the reduced
resolvent channel L^P(lam) = (lam - L0)^{-1} P^{Nperp} or the kernel
channel L^N(lam) = P^N / lam.  The block I_{2j} (...) I_{2j} evaluated
at the diagonal origin is a rational function of lam with poles only at
0 and 4*pi*N; its contour integral over the unit circle is read off as
the residue at 0, term by term and monomial by monomial.

Evaluation strategy: split at the rightmost N slot.  The factors to its
right are mirrored (adjoint operators applied to the ground-state
kernel, lambda treated as a real contour parameter), evaluated at the
outer origin, conjugate-transposed into a seed state, and the remaining
factors are applied leftward with the rewrite engine.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .fiber import FiberBasis, FiberMap, degree_projector
from .geometry import CurvatureData, OperatorSet, UnavailableOperator
from .scalars import LAMBDA_INV, residue_at_origin
from .states import KernelState, compose_at_origin

__all__ = [
    "TermDescriptor",
    "CoefficientReport",
    "enumerate_terms",
    "prune_structural",
    "feasible_shift_paths",
    "required_operators",
    "evaluate_term",
    "evaluate_term_split",
    "coefficient_block",
    "classify_term",
]


@dataclass(frozen=True)
class TermDescriptor:
    """One summand: operator orders (r_1..r_k) and slot channels eta.

    ``eta`` has length k+1 over {"N", "P"}; "P" is the N-perp channel.
    """

    parts: tuple
    eta: tuple

    def __post_init__(self):
        if len(self.eta) != len(self.parts) + 1:
            raise ValueError("eta must have one more slot than parts")
        if any(p < 2 for p in self.parts):
            raise ValueError("operator orders start at 2")
        if any(e not in ("N", "P") for e in self.eta):
            raise ValueError("slots are 'N' or 'P'")

    @property
    def k(self) -> int:
        return len(self.parts)

    def n_positions(self):
        """1-based positions of the N slots."""
        return tuple(i + 1 for i, e in enumerate(self.eta) if e == "N")

    def label(self) -> str:
        return "".join(str(p) for p in self.parts) + "|" + "".join(self.eta)


def _compositions(total: int):
    """Ordered compositions of ``total`` into parts >= 2."""
    if total == 0:
        yield ()
        return
    if total < 2:
        return
    for first in range(2, total + 1):
        for rest in _compositions(total - first):
            yield (first,) + rest


def enumerate_terms(r: int):
    """All descriptors for the 2r-th coefficient (sum r_i = 2r)."""
    out = []
    for parts in _compositions(2 * r):
        for eta in itertools.product("NP", repeat=len(parts) + 1):
            out.append(TermDescriptor(parts, tuple(eta)))
    return out


def feasible_shift_paths(desc: TermDescriptor, j: int, n: int):
    """Degree-shift assignments that can reach the I_{2j} block.

    Each operator carries shifts in {-2, 0, +2}; reading right to left
    from fiber degree 2j, the degree must stay within [0, n], return to
    2j on the left, and vanish at every N slot.  Descriptors with no
    such path contribute a zero block regardless of the operators.
    """
    k = desc.k
    npos = set(desc.n_positions())
    paths = []
    for shifts in itertools.product((-2, 0, 2), repeat=k):
        deg = 2 * j
        if k + 1 in npos and deg != 0:
            continue
        ok = True
        for t in range(k, 0, -1):
            deg += shifts[t - 1]
            if deg < 0 or deg > n:
                ok = False
                break
            if t in npos and deg != 0:
                ok = False
                break
        if ok and deg == 2 * j:
            paths.append(shifts)
    return paths


def prune_structural(j: int, terms, n: int):
    """Retain descriptors that can contribute to the degree-2j block.

    Requires at least one N slot (otherwise the integrand is analytic
    inside the contour), every N slot within the position window
    [j+1, k+1-j], and a feasible degree path.  Conservative: everything
    dropped here evaluates to an exactly zero block.
    """
    out = []
    for d in terms:
        npos = d.n_positions()
        if not npos:
            continue
        if any(not (j + 1 <= i <= d.k + 1 - j) for i in npos):
            continue
        if not feasible_shift_paths(d, j, n):
            continue
        out.append(d)
    return out


def required_operators(terms, j: int, n: int):
    """Union of (order, shift) pairs any retained term can route through.

    Raises :class:`UnavailableOperator` when a feasible path needs a
    Taylor coefficient outside the provided family.
    """
    need = set()
    for d in terms:
        for path in feasible_shift_paths(d, j, n):
            need.update(zip(d.parts, path))
    missing = sorted(need - OperatorSet.AVAILABLE)
    if missing:
        pretty = ", ".join(f"O_{o}^{s:+d}" for o, s in missing)
        raise UnavailableOperator(f"terms require unavailable operators: {pretty}")
    return need


def evaluate_term(desc: TermDescriptor, j: int, ops: OperatorSet) -> FiberMap:
    """Exact I_{2j}-block residue contribution of one descriptor."""
    basis = ops.basis
    zero_block = FiberMap.zero(basis)
    if "N" not in desc.eta:
        return zero_block  # analytic inside the contour
    paths = feasible_shift_paths(desc, j, basis.n)
    if not paths:
        return zero_block  # dies under the degree projections
    missing = {(p, s) for path in paths for p, s in zip(desc.parts, path)} - ops.AVAILABLE
    if missing:
        pretty = ", ".join(f"O_{o}^{s:+d}" for o, s in sorted(missing))
        raise UnavailableOperator(f"term {desc.label()} needs {pretty}")

    k = desc.k
    i0 = max(desc.n_positions())
    proj = degree_projector(basis, 2 * j)

    # right of the rightmost N slot, mirrored onto the ground kernel
    B = KernelState.projector_kernel(basis)
    for t in range(i0, k + 1):
        B = ops.full_adjoint(desc.parts[t - 1]).apply(B)
        B = B.apply_resolvent_nperp()  # slots right of i0 are all P
    B = B.apply_fiber(proj)

    # transpose: keep the variable-constant part, conjugate, re-seed
    seed = {}
    nzero = (0,) * basis.n
    for (g, d), M in B.eval_first_zero().items():
        Mc = FiberMap(
            basis, {(c, r): _conj_entry(v) for (r, c), v in M.entries.items()}
        )
        key = (nzero, g, nzero, nzero)
        if d != nzero:
            continue  # z'-monomials cannot survive the final diagonal
        w = seed.get(key)
        seed[key] = Mc if w is None else w + Mc
    K = KernelState(basis, seed).scale(LAMBDA_INV)

    # remaining factors, leftward
    for t in range(i0 - 1, 0, -1):
        K = ops.full(desc.parts[t - 1]).apply(K).drop_params()
        if desc.eta[t - 1] == "P":
            K = K.apply_resolvent_nperp()
        else:
            K = K.apply_projN_over_lambda()
    K = K.apply_fiber(proj)
    return K.eval_origin().map_entries(residue_at_origin)


def _conj_entry(v):
    from .scalars import scalar_conj

    return scalar_conj(v)


def evaluate_term_split(desc: TermDescriptor, j: int, ops: OperatorSet) -> FiberMap:
    """The A A* route for symmetric single-N terms at lam = 0.

    Builds A = I_{2j} (chain left of the N slot, resolvents specialized
    at 0) P^N as a state and returns the Gaussian composition
    int A(0,Z) A(Z,0) dZ.  Valid for descriptors whose right half is the
    mirror of the left half (the retained r = 2j leading terms).
    """
    basis = ops.basis
    npos = desc.n_positions()
    if len(npos) != 1:
        raise ValueError("split route needs a unique N slot")
    i0 = npos[0]
    if desc.parts[: i0 - 1] != tuple(reversed(desc.parts[i0 - 1:])):
        raise ValueError("split route needs a mirror-symmetric descriptor")
    A = KernelState.projector_kernel(basis)
    for t in range(i0 - 1, 0, -1):
        A = ops.full(desc.parts[t - 1]).apply(A).drop_params()
        if desc.eta[t - 1] != "P":
            raise ValueError("split route needs P slots left of the N")
        A = A.apply_resolvent_at_zero()
    A = A.apply_fiber(degree_projector(basis, 2 * j))
    return compose_at_origin(A, A)


def classify_term(desc: TermDescriptor, j: int, r: int) -> str:
    """Family labels matching the second-coefficient decomposition."""
    if r == 2 * j:
        return "lead"
    if r != 2 * j + 1:
        return "term"
    npos = desc.n_positions()
    i0 = npos[0]
    c3 = [t + 1 for t, p in enumerate(desc.parts) if p == 3]
    c4 = [t + 1 for t, p in enumerate(desc.parts) if p == 4]
    if len(c3) == 2:
        left = sum(1 for t in c3 if t < i0)
        return {2: "I_a", 1: "I_b", 0: "I_c"}[left]
    if len(c4) == 1:
        return "II_a" if c4[0] < i0 else "II_b"
    if len(npos) == 2:
        return "III_ab"
    return "III_a" if i0 == j + 2 else "III_b"


_FAMILY_OF = {
    "lead": "lead", "term": "term",
    "I_a": "I", "I_b": "I", "I_c": "I",
    "II_a": "II", "II_b": "II",
    "III_a": "III", "III_b": "III", "III_ab": "III",
}


@dataclass
class CoefficientReport:
    """Everything the engine knows about one (j, r) block."""

    j: int
    r: int
    n: int
    rank: int
    verdict: str
    descriptors: list = field(default_factory=list)
    contributions: list = field(default_factory=list)  # (desc, label, FiberMap)
    engine_block: FiberMap = None
    family_blocks: dict = field(default_factory=dict)
    closed_blocks: dict = field(default_factory=dict)
    sign_flags: dict = field(default_factory=dict)
    match: bool = True

    def to_json(self, pi_val: float = None) -> dict:
        out = {
            "j": self.j,
            "r": self.r,
            "n": self.n,
            "rank": self.rank,
            "verdict": self.verdict,
            "descriptors": [d.label() for d in self.descriptors],
            "contributions": [
                {"term": d.label(), "family": lab, "block": M.to_json()}
                for d, lab, M in self.contributions
            ],
            "block": self.engine_block.to_json() if self.engine_block else None,
            "closed_form": {k: M.to_json() for k, M in self.closed_blocks.items()}
            or None,
            "sign_flags": self.sign_flags or None,
            "match": self.match,
        }
        return out


def _reconcile(engine: FiberMap, closed: FiberMap):
    """+1 / -1 / None (both zero) or 'mismatch'."""
    if engine.is_zero() and closed.is_zero():
        return None
    if engine == closed:
        return 1
    if engine == -closed:
        return -1
    return "mismatch"


def coefficient_block(
    j: int,
    r: int,
    data: CurvatureData,
    basis: FiberBasis = None,
    ops: OperatorSet = None,
    with_closed: bool = True,
) -> CoefficientReport:
    """Evaluate the degree-2j block of the (p^-r)-coefficient.

    For r = 2j the closed comparison is the leading-block formula; for
    r = 2j + 1 it is the six-term bundle, reconciled per family up to
    one global sign each (the engine's residue convention differs from
    the printed reduced-resolvent products by (-1)^{#Nperp factors}).
    """
    basis = basis or FiberBasis(data.n, data.rank)
    report = CoefficientReport(j=j, r=r, n=data.n, rank=data.rank, verdict="computed")
    terms = enumerate_terms(r)
    retained = prune_structural(j, terms, data.n)
    report.descriptors = retained
    report.engine_block = FiberMap.zero(basis)
    if not retained:
        report.verdict = "structural-zero"
    else:
        required_operators(retained, j, data.n)
        ops = ops or OperatorSet(data, basis)
        fams = {}
        for d in retained:
            M = evaluate_term(d, j, ops)
            lab = classify_term(d, j, r)
            report.contributions.append((d, lab, M))
            report.engine_block = report.engine_block + M
            fam = _FAMILY_OF[lab]
            fams[fam] = fams.get(fam, FiberMap.zero(basis)) + M
        report.family_blocks = fams

    if with_closed:
        from . import closedforms

        if r < 2 * j:
            report.closed_blocks = {"total": FiberMap.zero(basis)}
            report.match = report.engine_block.is_zero()
        elif r == 2 * j:
            lead = closedforms.thm1_block(j, data, basis)
            report.closed_blocks = {"total": lead}
            report.match = report.engine_block == lead
        elif r == 2 * j + 1:
            bundle = closedforms.thm2_bundle(j, data, basis)
            report.closed_blocks = {
                "I": bundle["T_Ia"] + bundle["T_Ia_star"] + bundle["T_Ib"],
                "II": bundle["T_IIa"] + bundle["T_IIa_star"],
                "III": bundle["T_III"],
                "total": bundle["total"],
            }
            ok = True
            for fam in ("I", "II", "III"):
                eng = report.family_blocks.get(fam, FiberMap.zero(basis))
                flag = _reconcile(eng, report.closed_blocks[fam])
                report.sign_flags[fam] = flag
                if flag == "mismatch":
                    ok = False
            report.match = ok
        else:
            report.closed_blocks = {}
    return report
