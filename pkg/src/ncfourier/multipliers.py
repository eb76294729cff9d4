"""Linear and multilinear Fourier multipliers on finite groups.

A multiplier with symbol m on G^n sends (lambda(f_1), ..., lambda(f_n)) to
sum over tuples of m(s_1,...,s_n) f_1(s_1)...f_n(s_n) lambda(s_1...s_n).
Norm estimation is lower-bound-only: multi-start projected gradient ascent on
the coefficient vectors, with witnesses kept so every reported value is the
evaluated ratio of a concrete input tuple.  No upper-bound certification is
attempted away from the exact p = 2 linear case.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .groups import (
    AlgebraElement,
    FiniteGroup,
    GroupError,
    SubgroupEmbedding,
    convolve,
    parse_subset,
    regular_matrix,
    same_group,
)
from .nclp import lp_norm, matrix_lp_norm

__all__ = [
    "Symbol",
    "OptimizerConfig",
    "NormEstimate",
    "apply_multiplier",
    "estimate_norm",
    "evaluate_ratio",
    "restrict_symbol",
    "consummation_residual",
    "translation_residual",
    "translation_norm_invariance",
    "nested_residual",
    "symbol_from_spec",
    "symbol_from_csv",
    "symbol_to_csv",
]

MAX_TABLE = 2 ** 24


@dataclass(eq=False)
class Symbol:
    """A dense symbol table on G^n (arity n >= 1)."""

    parent: FiniteGroup
    arity: int
    values: np.ndarray

    def __post_init__(self):
        n, N = self.arity, self.parent.order
        if n < 1:
            raise ValueError("arity must be >= 1")
        if N ** n > MAX_TABLE:
            raise ValueError(f"symbol table size {N}^{n} exceeds {MAX_TABLE}")
        self.values = np.asarray(self.values, dtype=complex).reshape((N,) * n)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("symbol values must be finite")

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


def _product_index_grid(group: FiniteGroup, arity: int) -> np.ndarray:
    """Array P of shape (N,)*arity with P[s_1,...,s_n] = s_1 s_2 ... s_n."""
    prod = np.arange(group.order)
    for _ in range(arity - 1):
        prod = group.mul[prod[..., None], np.arange(group.order)]
    return prod


def _coeff_outer(fs: list[np.ndarray]) -> np.ndarray:
    out = fs[0]
    for f in fs[1:]:
        out = out[..., None] * f
    return out


def apply_multiplier(m: Symbol, *fs: AlgebraElement) -> AlgebraElement:
    """Apply T_m to algebra elements; multilinear in each slot."""
    if len(fs) != m.arity:
        raise ValueError(f"symbol has arity {m.arity}, got {len(fs)} arguments")
    for f in fs:
        if not same_group(f.parent, m.parent):
            raise GroupError("arguments live on a different group than the symbol")
    if m.arity == 1:
        return AlgebraElement(m.parent, m.values * fs[0].coeffs)
    grid = _product_index_grid(m.parent, m.arity)
    weights = m.values * _coeff_outer([f.coeffs for f in fs])
    out = np.zeros(m.parent.order, dtype=complex)
    np.add.at(out, grid, weights)
    return AlgebraElement(m.parent, out)


@dataclass
class OptimizerConfig:
    restarts: int = 50
    max_iterations: int = 80
    step_tolerance: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.step_tolerance <= 0:
            raise ValueError("step_tolerance must be > 0")


@dataclass(eq=False)
class NormEstimate:
    """Best found lower bound for a multiplier norm, with its witness.

    ``value`` always equals the evaluated ratio of ``witness`` (self
    certifying); it is a lower bound on the true norm by construction, and
    the gap to the true norm is unquantified away from the exact cases.
    """

    value: float
    witness: list[np.ndarray]
    restarts: int
    iterations: int
    converged: bool
    seed: int
    p: float = 2.0
    ps: tuple[float, ...] = field(default_factory=tuple)
    smoothing_bias: float = 0.0

    def to_json(self) -> str:
        return json.dumps(
            {
                "value": self.value,
                "p": self.p,
                "ps": list(self.ps),
                "restarts": self.restarts,
                "iterations": self.iterations,
                "converged": self.converged,
                "seed": self.seed,
                "lower_bound_only": True,
                "smoothing_bias": self.smoothing_bias,
                "witness": [
                    [[float(z.real), float(z.imag)] for z in w] for w in self.witness
                ],
            }
        )


def evaluate_ratio(
    m: Symbol, witness: list[np.ndarray], ps: tuple[float, ...], p: float
) -> float:
    """||T_m(x_1..x_n)||_p / prod ||x_i||_{p_i} for explicit coefficient vectors."""
    xs = [AlgebraElement(m.parent, w) for w in witness]
    denom = 1.0
    for x, pi in zip(xs, ps):
        nrm = lp_norm(x, pi)
        if nrm == 0.0:
            return 0.0
        denom *= nrm
    out = apply_multiplier(m, *xs)
    return lp_norm(out, p) / denom


def _schatten_gradient(mat: np.ndarray, p: float) -> np.ndarray:
    """Ascent direction of the normalized Schatten p-norm at ``mat``.

    Subdifferential U diag(sigma^(p-1)) V^H from the SVD; constant factors are
    dropped since steps are renormalized.  Degenerate (repeated singular
    value) points are nudged by callers per the restart design.
    """
    u, sigma, vh = np.linalg.svd(mat)
    return (u * sigma ** (p - 1.0)) @ vh


def _normalize(group: FiniteGroup, coeffs: np.ndarray, p: float) -> np.ndarray | None:
    nrm = lp_norm(AlgebraElement(group, coeffs), p)
    if nrm <= 1e-300:
        return None
    return coeffs / nrm


def estimate_norm(
    m: Symbol,
    ps,
    p: float,
    cfg: OptimizerConfig,
    warm_starts: list[list[np.ndarray]] | None = None,
) -> NormEstimate:
    """Estimate ||T_m: L_{p_1} x ... x L_{p_n} -> L_p|| from below.

    Multi-start projected gradient ascent over the coefficient vectors,
    deterministic given ``cfg.seed``.  The linear p = p_1 = 2 case returns
    max|m| exactly with a point-mass witness.  p or p_i equal to 1 are
    optimized at the smoothing exponent 1 + 1e-6 (final ratios are evaluated
    at the true exponents, so the reported value stays a valid lower bound;
    the smoothing only steers the search).
    """
    ps = tuple(float(q) for q in (ps if isinstance(ps, (tuple, list)) else [ps]))
    p = float(p)
    if len(ps) != m.arity:
        raise ValueError("exponent tuple length must match symbol arity")
    if any(q < 1 or math.isinf(q) for q in ps) or p < 1 or math.isinf(p):
        raise ValueError("optimizer handles finite exponents >= 1 only")

    group, n, N = m.parent, m.arity, m.parent.order

    if n == 1 and p == 2.0 and ps[0] == 2.0:
        flat = np.abs(m.values)
        best = int(np.argmax(flat))
        wit = np.zeros(N, dtype=complex)
        wit[best] = 1.0
        return NormEstimate(
            value=float(flat[best]), witness=[wit], restarts=0, iterations=0,
            converged=True, seed=cfg.seed, p=p, ps=ps,
        )

    smooth = 1.0 + 1e-6
    p_opt = max(p, smooth)
    ps_opt = tuple(max(q, smooth) for q in ps)
    bias = 0.0 if (p_opt == p and ps_opt == ps) else 1e-6

    grid = _product_index_grid(group, n) if n > 1 else None
    reg_table = group.mul[:, group.inv]

    def grad_slots(fs: list[np.ndarray]) -> tuple[float, list[np.ndarray]]:
        xs = [AlgebraElement(group, f) for f in fs]
        out = apply_multiplier(m, *xs)
        mat = regular_matrix(out)
        value = matrix_lp_norm(mat, p_opt, trace_dim=N)
        gmat = _schatten_gradient(mat, p_opt)
        # pull the matrix gradient back to the output coefficient vector
        gout = np.zeros(N, dtype=complex)
        np.add.at(gout, reg_table, gmat)
        grads = []
        if n == 1:
            grads.append(np.conj(m.values) * gout)
        else:
            gathered = gout[grid]
            for i in range(n):
                weight = np.conj(m.values) * gathered
                # contract all slots except i
                for j in range(n):
                    if j == i:
                        continue
                    shape = [1] * n
                    shape[j] = N
                    weight = weight * np.conj(fs[j]).reshape(shape)
                axes = tuple(j for j in range(n) if j != i)
                grads.append(np.sum(weight, axis=axes))
        return value, grads

    best_value = -1.0
    best_witness: list[np.ndarray] | None = None
    total_iter = 0
    converged_any = False

    starts: list[tuple[int, list[np.ndarray]]] = []
    for w_idx, w in enumerate(warm_starts or []):
        starts.append((-len(warm_starts or []) + w_idx, [np.asarray(c, dtype=complex) for c in w]))
    for r in range(cfg.restarts):
        rng = np.random.default_rng([cfg.seed, r])
        starts.append(
            (r, [rng.standard_normal(N) + 1j * rng.standard_normal(N) for _ in range(n)])
        )

    for r_idx, fs in starts:
        fs = [_normalize(group, f, q) for f, q in zip(fs, ps_opt)]
        if any(f is None for f in fs):
            continue
        start_ratio = evaluate_ratio(m, fs, ps, p)
        if start_ratio > best_value:
            best_value = start_ratio
            best_witness = [f.copy() for f in fs]
        rng = np.random.default_rng([cfg.seed, max(r_idx, 0), 977])
        step = 0.5
        value, grads = grad_slots(fs)
        run_converged = False
        for it in range(cfg.max_iterations):
            total_iter += 1
            proposal = []
            degenerate = False
            for f, g, q in zip(fs, grads, ps_opt):
                gn = np.linalg.norm(g)
                if gn < 1e-14:
                    degenerate = True
                    gn = 1.0
                cand = f + step * g / gn
                proposal.append(cand)
            if degenerate:
                # repeated singular values flatten the subgradient; nudge
                proposal = [
                    f + 1e-9 * (rng.standard_normal(N) + 1j * rng.standard_normal(N))
                    for f in proposal
                ]
            proposal = [_normalize(group, f, q) for f, q in zip(proposal, ps_opt)]
            if any(f is None for f in proposal):
                break
            new_value, new_grads = grad_slots(proposal)
            if new_value >= value:
                improvement = new_value - value
                fs, value, grads = proposal, new_value, new_grads
                step = min(step * 1.2, 2.0)
                if improvement < cfg.step_tolerance * max(value, 1e-30):
                    run_converged = True
                    break
            else:
                step *= 0.5
                if step < 1e-12:
                    run_converged = True
                    break
        converged_any = converged_any or run_converged
        true_value = evaluate_ratio(m, fs, ps, p)
        if true_value > best_value:
            best_value = true_value
            best_witness = [f.copy() for f in fs]

    if best_witness is None:  # all starts degenerate: zero symbol
        best_witness = [np.zeros(N, dtype=complex) for _ in range(n)]
        best_witness[0][group.identity] = 1.0
        best_value = evaluate_ratio(m, best_witness, ps, p)
    return NormEstimate(
        value=best_value,
        witness=best_witness,
        restarts=cfg.restarts,
        iterations=total_iter,
        converged=converged_any,
        seed=cfg.seed,
        p=p,
        ps=ps,
        smoothing_bias=bias,
    )


# ---------------------------------------------------------------------------
# reduction identities


def restrict_symbol(m: Symbol, emb: SubgroupEmbedding) -> Symbol:
    """Restrict a symbol on G^n to H^n along a subgroup embedding."""
    if not same_group(emb.amb, m.parent):
        raise GroupError("embedding target does not match the symbol's group")
    ix = np.ix_(*([emb.map] * m.arity)) if m.arity > 1 else (emb.map,)
    return Symbol(emb.sub, m.arity, m.values[ix])


def consummate_symbol(m: Symbol, indices, n: int) -> Symbol:
    """Blow a symbol of arity k up to arity n by multiplying grouped arguments.

    ``indices`` are the increasing split points i_1 = 1 < ... < i_k <= n
    (1-based); slot j of m receives the product s_{i_j} ... s_{i_{j+1}-1}.
    """
    indices = [int(i) for i in indices]
    k = m.arity
    if len(indices) != k or indices[0] != 1 or sorted(indices) != indices or indices[-1] > n:
        raise ValueError(f"invalid consummation indices {indices} for arity {k} -> {n}")
    if len(set(indices)) != k:
        raise ValueError("consummation indices must be strictly increasing")
    group = m.parent
    N = group.order
    bounds = indices + [n + 1]
    slot_grids = []
    for j in range(k):
        lo, hi = bounds[j], bounds[j + 1]
        width = hi - lo
        prod = _product_index_grid(group, width)  # shape (N,)*width
        shape = [1] * n
        shape[lo - 1 : hi - 1] = [N] * width
        slot_grids.append(prod.reshape(shape))
    values = m.values[tuple(np.broadcast_to(g, (N,) * n) for g in slot_grids)]
    return Symbol(group, n, values)


def consummation_residual(
    m: Symbol, indices, ps, trials: int, rng: np.random.Generator
) -> float:
    """Max L_2 deviation of T_{m~}(x_1..x_n) from T_m applied to grouped products."""
    ps = tuple(ps)
    n = len(ps)
    m_tilde = consummate_symbol(m, indices, n)
    group = m.parent
    indices = [int(i) for i in indices]
    bounds = indices + [n + 1]
    worst = 0.0
    for _ in range(trials):
        xs = [
            AlgebraElement(
                group,
                rng.standard_normal(group.order) + 1j * rng.standard_normal(group.order),
            )
            for _ in range(n)
        ]
        lhs = apply_multiplier(m_tilde, *xs)
        grouped = []
        for j in range(m.arity):
            acc = xs[bounds[j] - 1]
            for t in range(bounds[j], bounds[j + 1] - 1):
                acc = convolve(acc, xs[t])
            grouped.append(acc)
        rhs = apply_multiplier(m, *grouped)
        worst = max(worst, lp_norm(lhs - rhs, 2.0))
    return worst


def translate_symbol(m: Symbol, i: int, r: int, t: int, rp: int) -> Symbol:
    """Symbol s -> m(r s_1, ..., s_i t, t^{-1} s_{i+1}, ..., s_n r')."""
    group, n, N = m.parent, m.arity, m.parent.order
    if not (1 <= i <= max(n - 1, 1)):
        raise ValueError(f"slot index {i} out of range for arity {n}")
    maps = [np.arange(N) for _ in range(n)]
    maps[0] = group.mul[r, maps[0]]
    if n > 1:
        maps[i - 1] = group.mul[maps[i - 1], t]
        maps[i] = group.mul[int(group.inv[t]), maps[i]]
    maps[n - 1] = group.mul[maps[n - 1], rp]
    return Symbol(group, n, m.values[np.ix_(*maps)] if n > 1 else m.values[maps[0]])


def translated_apply(
    m: Symbol, xs: list[AlgebraElement], r: int, t: int, rp: int, i: int
) -> AlgebraElement:
    """lambda(r)* T_m(lambda(r)x_1, ..., x_i lambda(t), lambda(t)* x_{i+1}, ..., x_n lambda(r')) lambda(r')*."""
    group = m.parent
    n = m.arity
    mod = [x.copy() for x in xs]
    mod[0] = convolve(group.delta_element(r), mod[0])
    if n > 1:
        mod[i - 1] = convolve(mod[i - 1], group.delta_element(t))
        mod[i] = convolve(group.delta_element(int(group.inv[t])), mod[i])
    mod[n - 1] = convolve(mod[n - 1], group.delta_element(rp))
    out = apply_multiplier(m, *mod)
    out = convolve(group.delta_element(int(group.inv[r])), out)
    return convolve(out, group.delta_element(int(group.inv[rp])))


def translation_residual(
    m: Symbol, i: int, r: int, t: int, rp: int, trials: int, rng: np.random.Generator
) -> float:
    """Max L_2 deviation between T of the translated symbol and the conjugated T_m."""
    group, n = m.parent, m.arity
    m_tilde = translate_symbol(m, i, r, t, rp)
    worst = 0.0
    for _ in range(trials):
        xs = [
            AlgebraElement(
                group,
                rng.standard_normal(group.order) + 1j * rng.standard_normal(group.order),
            )
            for _ in range(n)
        ]
        lhs = apply_multiplier(m_tilde, *xs)
        rhs = translated_apply(m, xs, r, t, rp, i)
        worst = max(worst, lp_norm(lhs - rhs, 2.0))
    return worst


def translation_norm_invariance(
    m: Symbol, i: int, r: int, t: int, rp: int, ps, p: float, cfg: OptimizerConfig
) -> float:
    """|found norm of translated symbol - ratio of its transported witness under m|.

    Witness transport is exact (multiplication by lambda(s) is a p-isometry),
    so the two numbers agree to float noise regardless of optimizer quality.
    """
    group, n = m.parent, m.arity
    m_tilde = translate_symbol(m, i, r, t, rp)
    est = estimate_norm(m_tilde, ps, p, cfg)
    moved = [AlgebraElement(group, w) for w in est.witness]
    mod = [x.copy() for x in moved]
    mod[0] = convolve(group.delta_element(r), mod[0])
    if n > 1:
        mod[i - 1] = convolve(mod[i - 1], group.delta_element(t))
        mod[i] = convolve(group.delta_element(int(group.inv[t])), mod[i])
    mod[n - 1] = convolve(mod[n - 1], group.delta_element(rp))
    ratio = evaluate_ratio(m, [x.coeffs for x in mod], tuple(ps), p)
    return abs(ratio - est.value)


def nested_symbol(ms: list[Symbol]) -> Symbol:
    """m~(s_1..s_n) = m_1(s_1...s_{n-1}) m_2(s_2...s_{n-1}) ... m_{n-1}(s_{n-1}) m_n(s_n)."""
    if any(mj.arity != 1 for mj in ms):
        raise ValueError("nested construction takes linear symbols only")
    group = ms[0].parent
    n, N = len(ms), group.order
    if any(not same_group(mj.parent, group) for mj in ms):
        raise GroupError("nested symbols must share one group")
    values = np.ones((N,) * n, dtype=complex)
    for j in range(1, n):  # factor m_j(s_j ... s_{n-1}), 1-based j <= n-1
        width = (n - 1) - (j - 1)
        prod = _product_index_grid(group, width)
        shape = [1] * n
        shape[j - 1 : n - 1] = [N] * width
        values = values * ms[j - 1].values[prod].reshape(shape)
    shape = [1] * n
    shape[n - 1] = N
    values = values * ms[n - 1].values.reshape(shape)
    return Symbol(group, n, values)


def nested_apply(ms: list[Symbol], xs: list[AlgebraElement]) -> AlgebraElement:
    """T_{m_1}(x_1 T_{m_2}(x_2 ... T_{m_{n-1}}(x_{n-1}) ...)) T_{m_n}(x_n)."""
    n = len(ms)
    if n == 1:
        return apply_multiplier(ms[0], xs[0])
    inner = apply_multiplier(ms[n - 2], xs[n - 2])
    for j in range(n - 3, -1, -1):
        inner = apply_multiplier(ms[j], convolve(xs[j], inner))
    return convolve(inner, apply_multiplier(ms[n - 1], xs[n - 1]))


def nested_residual(ms: list[Symbol], trials: int, rng: np.random.Generator) -> float:
    """Max L_2 deviation between the product symbol and the nested composition."""
    group = ms[0].parent
    m_tilde = nested_symbol(ms)
    worst = 0.0
    for _ in range(trials):
        xs = [
            AlgebraElement(
                group,
                rng.standard_normal(group.order) + 1j * rng.standard_normal(group.order),
            )
            for _ in range(len(ms))
        ]
        lhs = apply_multiplier(m_tilde, *xs)
        rhs = nested_apply(ms, xs)
        worst = max(worst, lp_norm(lhs - rhs, 2.0))
    return worst


# ---------------------------------------------------------------------------
# symbol construction and serialization


def symbol_from_spec(group: FiniteGroup, spec: str, arity: int = 1) -> Symbol:
    """Named symbol families: ``gaussian:sigma``, ``indicator:<subset>``, ``random:seed``.

    gaussian uses the word metric from the canonical generators; for arity > 1
    the profile is the product over slots.
    """
    kind, _, rest = spec.partition(":")
    N = group.order
    if kind == "gaussian":
        sigma = float(rest)
        dist = group.word_distances().astype(float)
        one = np.exp(-(dist ** 2) / (2.0 * sigma ** 2))
        values = _coeff_outer([one] * arity) if arity > 1 else one
        return Symbol(group, arity, values)
    if kind == "indicator":
        subset = parse_subset(group, rest)
        one = np.zeros(N)
        one[subset.sorted()] = 1.0
        values = _coeff_outer([one] * arity) if arity > 1 else one
        return Symbol(group, arity, values)
    if kind == "random":
        rng = np.random.default_rng(int(rest))
        shape = (N,) * arity
        return Symbol(group, arity, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    raise ValueError(f"unknown symbol spec {spec!r}")


def symbol_to_csv(m: Symbol, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"s{i + 1}" for i in range(m.arity)] + ["re", "im"])
        for idx in np.ndindex(*m.values.shape):
            z = m.values[idx]
            writer.writerow([*idx, repr(float(z.real)), repr(float(z.imag))])


def symbol_from_csv(group: FiniteGroup, path: str) -> Symbol:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        arity = len(header) - 2
        values = np.zeros((group.order,) * arity, dtype=complex)
        for row in reader:
            idx = tuple(int(tok) for tok in row[:arity])
            values[idx] = complex(float(row[arity]), float(row[arity + 1]))
    return Symbol(group, arity, values)
