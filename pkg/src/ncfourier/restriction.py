"""Exact finite-scale checks of the restriction machinery.

Everything here is exact set arithmetic plus dense Schatten norms: the
conjugation-survival fraction delta_F(V), the overlap Gram matrix and its
lower bound by delta, the contraction and lower-bound inequalities for the
embedding maps x -> x h_V^{2/p}, witness-transport restriction consistency,
the quotient periodization intertwiner, and the fundamental-domain
compression/sampling maps with their pairing convergence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .groups import (
    AlgebraElement,
    FiniteGroup,
    GroupError,
    GroupSubset,
    SubgroupEmbedding,
    conjugate_set,
    convolve,
    random_element,
    regular_matrix,
    same_group,
)
from .multipliers import (
    OptimizerConfig,
    Symbol,
    apply_multiplier,
    estimate_norm,
    evaluate_ratio,
    restrict_symbol,
)
from .nclp import lp_norm, matrix_lp_norm, plancherel_trace, polar_parts

__all__ = [
    "DeltaValue",
    "ResidualReport",
    "PreconditionError",
    "delta_exact",
    "gram_matrix",
    "embedding_contraction_residual",
    "embedding_lower_residual",
    "holder_witness",
    "restriction_consistency",
    "quotient_group",
    "periodization_residual",
    "lattice_maps_report",
]


class PreconditionError(ValueError):
    """A stated hypothesis of the inequality under test fails for this input."""


@dataclass(frozen=True)
class DeltaValue:
    """delta_F(V) = |intersection of s V s^{-1} over s in F| / |V|, exact."""

    numerator: int
    denominator: int
    F: GroupSubset
    V: GroupSubset

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def __float__(self):
        return self.numerator / self.denominator

    def __str__(self):
        return f"{self.numerator}/{self.denominator}"


@dataclass
class ResidualReport:
    name: str
    residual: float
    tolerance: float
    context: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "context": self.context,
        }


def delta_exact(F: GroupSubset, V: GroupSubset) -> DeltaValue:
    """Exact survival fraction; empty F means the intersection is V itself."""
    if len(V) == 0:
        raise ValueError("V is empty")
    if not same_group(F.parent, V.parent):
        raise GroupError("F and V live on different groups")
    surviving = set(V.members)
    for s in F.sorted():
        surviving &= conjugate_set(s, V).members
    return DeltaValue(len(surviving), len(V), F, V)


def gram_matrix(F: GroupSubset, V: GroupSubset):
    """Overlap matrix A[s,t] = |Ad_s(V) cap Ad_t(V)|/|V| over F, with the
    smallest eigenvalues of A and of A - delta_F(V) * (all-ones matrix)."""
    if len(V) == 0 or len(F) == 0:
        raise ValueError("F and V must be nonempty")
    elems = F.sorted()
    conjugates = [conjugate_set(s, V).members for s in elems]
    k = len(elems)
    A = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            A[i, j] = A[j, i] = len(conjugates[i] & conjugates[j]) / len(V)
    delta = float(delta_exact(F, V))
    eig_a = float(np.linalg.eigvalsh(A)[0])
    eig_gap = float(np.linalg.eigvalsh(A - delta * np.ones((k, k)))[0])
    return A, eig_a, eig_gap


# ---------------------------------------------------------------------------
# embedding inequalities


def _check_disjoint_translates(
    group: FiniteGroup, lefts, V: GroupSubset, name: str, rights=None
) -> None:
    """Require the sets s V t (t optional) to be pairwise disjoint."""
    seen: dict[int, tuple] = {}
    rights = rights if rights is not None else [group.identity]
    for s in lefts:
        for t in rights:
            for v in V.members:
                g = int(group.mul[group.mul[s, v], t])
                key = (s, t)
                if g in seen and seen[g] != key:
                    raise PreconditionError(
                        f"disjointness condition {name} fails: "
                        f"translates {seen[g]} and {key} meet at element {g}"
                    )
                seen[g] = key


def embedding_contraction_residual(
    emb: SubgroupEmbedding, x: AlgebraElement, V: GroupSubset, p: float
) -> ResidualReport:
    """max(0, ||x h_V^{2/p}||_p - ||x||_p-on-the-subgroup), with exact equality
    asserted at p = 2.

    Preconditions: V symmetric, and the translates s V for s in the ambient
    support of x pairwise disjoint.  At p = 2 that disjointness forces exact
    equality.  For p > 2 the contraction is guaranteed when the translates
    gamma V over the whole subgroup are disjoint (e.g. V inside a fundamental
    domain); with disjointness only over supp(x) the one-sided map can expand
    slightly and the report then carries a positive residual (see the
    dihedral boundary example in the tests).
    """
    if not same_group(x.parent, emb.sub):
        raise GroupError("x must live on the subgroup")
    if not same_group(V.parent, emb.amb):
        raise GroupError("V must live in the ambient group")
    if not V.is_symmetric():
        raise PreconditionError("V is not symmetric")
    x_amb = emb.push(x)
    _check_disjoint_translates(emb.amb, x_amb.support(), V, "(1) sV, s in supp(x)")
    if math.isinf(p):
        amb_mat = regular_matrix(x_amb)  # the p = infinity map is x -> x
    else:
        amb_mat = regular_matrix(x_amb) @ polar_parts(V).h_power(2.0 / p)
    lhs = matrix_lp_norm(amb_mat, p, trace_dim=emb.amb.order)
    rhs = lp_norm(x, p)
    residual = max(0.0, lhs - rhs)
    report = ResidualReport(
        name="embedding-contraction",
        residual=residual,
        tolerance=1e-10,
        context={"p": p, "lhs": lhs, "rhs": rhs, "V": sorted(V.members)},
    )
    if p == 2.0:
        report.context["equality_gap"] = abs(lhs - rhs)
    return report


def holder_witness(x: AlgebraElement, p: float) -> AlgebraElement:
    """y = |x|^{p/q} with 1/q = 1/2 - 1/p, the sharp Holder witness for
    ||x||_p = ||x y||_2 / ||y||_q, computed in the subgroup algebra."""
    q = 1.0 / (0.5 - 1.0 / p)
    mat = regular_matrix(x)
    w, u = np.linalg.eigh(mat.conj().T @ mat)
    w = np.clip(w, 0.0, None)
    powered = (u * np.sqrt(w) ** (p / q)) @ u.conj().T
    # |x|^{p/q} is a function of x* x, hence again an algebra element whose
    # coefficients sit in the identity column of the regular picture
    group = x.parent
    return AlgebraElement(group, powered[:, group.identity].copy())


def embedding_lower_residual(
    emb: SubgroupEmbedding,
    x: AlgebraElement,
    V: GroupSubset,
    p: float,
    y: AlgebraElement,
) -> ResidualReport:
    """Per-V lower bound: ||x h_V^{2/p}||_p >= delta_F(V)^{1/2} ||xy||_2 / ||y||_q
    under the three disjointness hypotheses, reported as a one-sided residual.

    F is the ambient support of x, F_y the inverse support of y; q is the
    L_2-conjugate of p (1/p + 1/q = 1/2).
    """
    if not (2.0 < p < math.inf):
        raise ValueError("lower bound applies for 2 < p < infinity")
    if not same_group(x.parent, emb.sub) or not same_group(y.parent, emb.sub):
        raise GroupError("x and y must live on the subgroup")
    if not V.is_symmetric():
        raise PreconditionError("V is not symmetric")
    group = emb.amb
    q = 1.0 / (0.5 - 1.0 / p)
    x_amb = emb.push(x)
    y_amb = emb.push(y)
    supp_x = x_amb.support()
    supp_y = y_amb.support()
    supp_y_star = [int(group.inv[t]) for t in supp_y]
    _check_disjoint_translates(group, supp_x, V, "(1) sV, s in F")
    _check_disjoint_translates(group, supp_y_star, V, "(2) sV, s in F_y")
    # (3) s V t disjoint across pairs with distinct products st
    seen: dict[int, int] = {}
    for s in supp_x:
        for t in supp_y:
            prod = int(group.mul[s, t])
            for v in V.members:
                g = int(group.mul[group.mul[s, v], t])
                if g in seen and seen[g] != prod:
                    raise PreconditionError(
                        "disjointness condition (3) s1 V t1 cap s2 V t2 fails "
                        f"at element {g}"
                    )
                seen[g] = prod
    F = group.subset(supp_x)
    dval = float(delta_exact(F, V))
    pp = polar_parts(V)
    lhs = matrix_lp_norm(
        regular_matrix(x_amb) @ pp.h_power(2.0 / p), p, trace_dim=group.order
    )
    norm_y = lp_norm(y, q)
    if norm_y == 0:
        raise ValueError("witness y is zero")
    rhs = math.sqrt(dval) * lp_norm(convolve(x, y), 2.0) / norm_y
    return ResidualReport(
        name="embedding-lower-bound",
        residual=max(0.0, rhs - lhs),
        tolerance=1e-9,
        context={"p": p, "delta": dval, "lhs": lhs, "rhs": rhs},
    )


# ---------------------------------------------------------------------------
# restriction consistency by witness transport


def restriction_consistency(
    emb: SubgroupEmbedding, m: Symbol, ps, p: float, cfg: OptimizerConfig
) -> ResidualReport:
    """Certify that the restricted multiplier norm does not exceed the ambient one.

    Runs the optimizer on the subgroup, transports its witness into the
    ambient group (exact ratio equality: the ambient regular representation of
    a subgroup-supported element is [G:H] copies of the subgroup one), then
    reruns the ambient optimizer seeded with the transported witness and
    reports max(0, found_sub - found_amb).
    """
    ps = tuple(float(q) for q in (ps if isinstance(ps, (tuple, list)) else [ps]))
    m_sub = restrict_symbol(m, emb)
    est_sub = estimate_norm(m_sub, ps, p, cfg)
    transported = [emb.push(AlgebraElement(emb.sub, w)).coeffs for w in est_sub.witness]
    ratio_amb = evaluate_ratio(m, transported, ps, p)
    transport_gap = abs(ratio_amb - est_sub.value)
    est_amb = estimate_norm(m, ps, p, cfg, warm_starts=[transported])
    return ResidualReport(
        name="restriction-consistency",
        residual=max(0.0, est_sub.value - est_amb.value),
        tolerance=1e-6,
        context={
            "p": p,
            "ps": list(ps),
            "sub_value": est_sub.value,
            "amb_value": est_amb.value,
            "witness_transport_gap": transport_gap,
        },
    )


# ---------------------------------------------------------------------------
# periodization


def quotient_group(group: FiniteGroup, H: GroupSubset):
    """Quotient by a normal subgroup; returns (quotient, coset_of: index array,
    representative: index array).  Cosets are ordered by their minimal element,
    so the identity coset is index 0."""
    members = sorted(H.members)
    if group.identity not in H.members:
        raise GroupError("H does not contain the identity")
    closed = all(
        int(group.mul[a, b]) in H.members for a in members for b in members
    )
    if not closed or not H.is_symmetric():
        raise GroupError("H is not a subgroup")
    for g in range(group.order):
        if conjugate_set(g, H).members != H.members:
            raise GroupError("H is not normal")
    coset_of = np.full(group.order, -1, dtype=np.int64)
    reps: list[int] = []
    for g in range(group.order):
        if coset_of[g] >= 0:
            continue
        idx = len(reps)
        reps.append(g)
        for h in members:
            coset_of[int(group.mul[g, h])] = idx
    reps_arr = np.array(reps, dtype=np.int64)
    q = len(reps)
    mul = coset_of[group.mul[reps_arr[:, None], reps_arr[None, :]]]
    inv = coset_of[group.inv[reps_arr]]
    quotient = FiniteGroup(q, mul, inv, 0, f"{group.label}/H{len(members)}")
    quotient.validate()
    return quotient, coset_of, reps_arr


def periodize_symbol(m_q: Symbol, coset_of: np.ndarray, group: FiniteGroup) -> Symbol:
    """Lift a symbol on G/H to the H-invariant symbol g -> m_q(gH) on G."""
    ix = np.ix_(*([coset_of] * m_q.arity)) if m_q.arity > 1 else (coset_of,)
    return Symbol(group, m_q.arity, m_q.values[ix])


def periodization_residual(
    group: FiniteGroup,
    H: GroupSubset,
    m_q: Symbol,
    ps,
    trials: int,
    rng: np.random.Generator,
) -> ResidualReport:
    """Check the quotient intertwiner against the periodized multiplier.

    pi embeds the quotient algebra as the corner lambda(g) Pi of the ambient
    algebra, Pi = |H|^{-1} sum_h lambda(h).  With counting measure on both
    sides the exact p-isometry is pi_p = |H|^{1/p} pi, and

        pi_p(T_{m_q}(x_1..x_n)) = T_{m_pi}(pi_{p_1}(x_1), ..., pi_{p_n}(x_n)).

    Reports the max coefficient deviation of that identity over random inputs
    plus the worst p-isometry gap |  ||pi_p(x)||_p - ||x||_p  |.
    """
    ps = tuple(float(q) for q in (ps if isinstance(ps, (tuple, list)) else [ps]))
    quotient, coset_of, _ = quotient_group(group, H)
    if not same_group(m_q.parent, quotient):
        raise GroupError("symbol does not live on G/H")
    n = m_q.arity
    if len(ps) != n:
        raise ValueError("exponent tuple must match arity")
    p = 1.0 / sum(1.0 / q for q in ps)
    m_pi = periodize_symbol(m_q, coset_of, group)
    hsize = len(H)

    def lift(x: AlgebraElement, exponent: float) -> AlgebraElement:
        # pi(x) has coefficient function g -> x(gH)/|H|; pi_p scales by |H|^{1/p}
        coeffs = x.coeffs[coset_of] / hsize
        return AlgebraElement(group, hsize ** (1.0 / exponent) * coeffs)

    worst_intertwine = 0.0
    worst_isometry = 0.0
    for _ in range(trials):
        xs = [random_element(quotient, rng) for _ in range(n)]
        lifted = [lift(x, q) for x, q in zip(xs, ps)]
        lhs = lift(apply_multiplier(m_q, *xs), p)
        rhs = apply_multiplier(m_pi, *lifted)
        worst_intertwine = max(worst_intertwine, float(np.max(np.abs(lhs.coeffs - rhs.coeffs))))
        for x, q in zip(xs, ps):
            worst_isometry = max(
                worst_isometry, abs(lp_norm(lift(x, q), q) - lp_norm(x, q))
            )
        # trace preservation of the unnormalized pi: tau_G(pi(x)) = tau_Q(x)/|H|
        x0 = xs[0]
        tr_gap = abs(
            plancherel_trace(AlgebraElement(group, x0.coeffs[coset_of] / hsize))
            - plancherel_trace(x0) / hsize
        )
        worst_intertwine = max(worst_intertwine, tr_gap)
    return ResidualReport(
        name="periodization-intertwiner",
        residual=worst_intertwine,
        tolerance=1e-10,
        context={
            "isometry_residual": worst_isometry,
            "quotient_order": quotient.order,
            "ps": list(ps),
        },
    )


# ---------------------------------------------------------------------------
# fundamental-domain compression and sampling maps


def _check_fundamental_domain(
    emb: SubgroupEmbedding, X: GroupSubset
) -> None:
    group = emb.amb
    covered: dict[int, int] = {}
    for gamma in emb.map.tolist():
        for xx in X.members:
            g = int(group.mul[gamma, xx])
            if g in covered:
                raise PreconditionError(
                    f"X is not a fundamental domain: element {g} covered twice"
                )
            covered[g] = gamma
    if len(covered) != group.order:
        raise PreconditionError("X is not a fundamental domain: cosets do not cover G")


def lattice_maps_report(
    emb: SubgroupEmbedding,
    X: GroupSubset,
    m: Symbol,
    ps,
    trials: int,
    rng: np.random.Generator,
    pairing_inputs=None,
) -> ResidualReport:
    """Contraction residuals for the compression map x -> |X|^{-2+1/p} h* x h
    (subgroup algebra into the ambient one) and the sampling map

        Psi(x) = sum_gamma tau(h* lambda(gamma^{-1}) h x) lambda(gamma),

    scaled by |X|^{-1-1/p} (ambient algebra onto the subgroup one), plus the
    deviation of the compressed-sampled multiplier pairing <y, S(x_vec)> from
    <y, T_m(x_vec)>.  ``pairing_inputs`` optionally pins (xs, y) on the
    ambient group so deviations are comparable across refinements.
    """
    ps = tuple(float(q) for q in (ps if isinstance(ps, (tuple, list)) else [ps]))
    group, sub = emb.amb, emb.sub
    n = m.arity
    if len(ps) != n:
        raise ValueError("exponent tuple must match arity")
    p = 1.0 / sum(1.0 / q for q in ps)
    _check_fundamental_domain(emb, X)
    h = regular_matrix(X.indicator())
    xsize = len(X)
    m_sub = restrict_symbol(m, emb)

    def compress_map(x: AlgebraElement, exponent: float) -> np.ndarray:
        amb = emb.push(x)
        return xsize ** (-2.0 + 1.0 / exponent) * (
            h.conj().T @ regular_matrix(amb) @ h
        )

    def sample_map(x: AlgebraElement, exponent: float) -> AlgebraElement:
        # tau is tracial, so tau(h* lambda(gamma^{-1}) h x) = tau(lambda(gamma^{-1}) w)
        # with w = h x h*, i.e. the coefficient of w at gamma
        w_mat = h @ regular_matrix(x) @ h.conj().T
        coeffs = np.array(
            [w_mat[int(g), group.identity] for g in emb.map.tolist()], dtype=complex
        )
        return AlgebraElement(sub, xsize ** (-1.0 - 1.0 / exponent) * coeffs)

    worst_phi = 0.0
    worst_psi = 0.0
    for _ in range(trials):
        xs = random_element(sub, rng)
        phi_norm = matrix_lp_norm(compress_map(xs, p), p, trace_dim=group.order)
        worst_phi = max(worst_phi, phi_norm - lp_norm(xs, p))
        xa = random_element(group, rng)
        psi = sample_map(xa, p)
        worst_psi = max(worst_psi, lp_norm(psi, p) - lp_norm(xa, p))

    if pairing_inputs is None:
        xs_in = [random_element(group, rng) for _ in range(n)]
        y_in = random_element(group, rng)
    else:
        xs_in, y_in = pairing_inputs
    sampled = [sample_map(x, q) for x, q in zip(xs_in, ps)]
    t_sub = apply_multiplier(m_sub, *sampled)
    s_mat = xsize ** (-2.0 + 1.0 / p) * (
        h.conj().T @ regular_matrix(emb.push(t_sub)) @ h
    )
    lhs = np.trace(regular_matrix(y_in) @ s_mat) / group.order
    rhs = np.trace(regular_matrix(y_in) @ regular_matrix(apply_multiplier(m, *xs_in))) / group.order
    deviation = abs(lhs - rhs)
    residual = max(worst_phi, worst_psi, 0.0)
    return ResidualReport(
        name="lattice-approximation-maps",
        residual=residual,
        tolerance=1e-9,
        context={
            "compression_residual": max(worst_phi, 0.0),
            "sampling_residual": max(worst_psi, 0.0),
            "pairing_deviation": float(deviation),
            "domain": sorted(X.members),
        },
    )
