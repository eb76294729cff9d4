import math

import numpy as np
import pytest

from ncfourier.groups import AlgebraElement, build_group, convolve, involution, random_element
from ncfourier.nclp import (
    conjugate_exponent,
    dual_pairing,
    lp_norm,
    matrix_lp_norm,
    plancherel_trace,
    polar_parts,
)


def test_conjugate_exponent():
    assert conjugate_exponent(1.0) == math.inf
    assert conjugate_exponent(math.inf) == 1.0
    assert conjugate_exponent(2.0) == 2.0
    assert conjugate_exponent(4.0) == pytest.approx(4.0 / 3.0)
    with pytest.raises(ValueError):
        conjugate_exponent(0.5)


def test_trace_fixtures():
    g = build_group("dihedral:3")
    assert plancherel_trace(g.delta_element(0)) == 1.0
    assert plancherel_trace(g.delta_element(2)) == 0.0
    f = random_element(g, np.random.default_rng(0))
    from ncfourier.groups import regular_matrix

    assert plancherel_trace(f) == pytest.approx(
        np.trace(regular_matrix(f)) / g.order, abs=1e-12
    )


def test_plancherel_identity():
    g = build_group("dihedral:3")
    f = random_element(g, np.random.default_rng(1))
    # (f * f^*)(e) = sum |f(s)|^2 and || lambda(f) ||_2 = || f ||_2
    val = convolve(f, involution(f)).coeffs[g.identity]
    assert val == pytest.approx(np.sum(np.abs(f.coeffs) ** 2), abs=1e-12)
    assert lp_norm(f, 2.0) == pytest.approx(float(np.linalg.norm(f.coeffs)), abs=1e-10)


def test_lp_norm_fixtures():
    g = build_group("cyclic:5")
    for p in (1.0, 1.7, 2.0, 3.0, math.inf):
        assert lp_norm(g.delta_element(0), p) == pytest.approx(1.0, abs=1e-12)
    z2 = build_group("cyclic:2")
    f = AlgebraElement(z2, np.array([1.0, 1.0]))
    # singular values {2, 0}: normalized Schatten-1 norm is (2+0)/2 = 1
    assert lp_norm(f, 1.0) == pytest.approx(1.0, abs=1e-12)
    assert lp_norm(f, math.inf) == pytest.approx(2.0, abs=1e-12)


def test_norm_of_adjoint_matches():
    g = build_group("dihedral:6")
    rng = np.random.default_rng(2)
    for p in (1.3, 2.0, 3.5, 6.0):
        f = random_element(g, rng)
        assert lp_norm(f, p) == pytest.approx(lp_norm(involution(f), p), abs=1e-10)


def test_dual_pairing_fixtures():
    g = build_group("dihedral:3")
    assert dual_pairing(g.delta_element(0), g.delta_element(0)) == 1.0
    assert dual_pairing(g.delta_element(1), g.delta_element(2)) == 0.0


def test_dual_pairing_trace_oracle_and_holder():
    g = build_group("dihedral:3")
    rng = np.random.default_rng(3)
    from ncfourier.groups import regular_matrix

    for p in (1.5, 2.0, 4.0):
        q = conjugate_exponent(p)
        phi, f = random_element(g, rng), random_element(g, rng)
        phi_check = AlgebraElement(g, phi.coeffs[g.inv])  # phi^vee
        lhs = dual_pairing(phi, f)
        rhs = np.trace(regular_matrix(phi_check) @ regular_matrix(f)) / g.order
        assert lhs == pytest.approx(rhs, abs=1e-10)
        assert abs(lhs) <= lp_norm(phi_check, q) * lp_norm(f, p) + 1e-10


def test_polar_fixtures_identity_and_full_group():
    g = build_group("cyclic:2")
    pp = polar_parts(g.subset([0]))
    assert np.allclose(pp.h, np.eye(2))
    assert np.allclose(pp.u, np.eye(2))
    full = polar_parts(g.subset([0, 1]))
    eigs = np.sort(np.abs(full.eigvals))
    assert eigs == pytest.approx([0.0, math.sqrt(2.0)], abs=1e-12)


def test_polar_reproduces_k_and_structure():
    g = build_group("dihedral:6")
    V = g.subset([0, 1, 5])  # {e, r, r^{-1}} is symmetric
    pp = polar_parts(V)
    from ncfourier.groups import regular_matrix

    k = regular_matrix(V.indicator()) / math.sqrt(3)
    assert np.max(np.abs(pp.u @ pp.h - k)) < 1e-10
    assert np.max(np.abs(pp.u @ pp.h - pp.h @ pp.u)) < 1e-10
    support = pp.u @ pp.u
    assert np.max(np.abs(support @ pp.h - pp.h)) < 1e-10
    assert np.min(np.linalg.eigvalsh(pp.h)) > -1e-12


def test_polar_requires_symmetric_nonempty():
    g = build_group("cyclic:4")
    with pytest.raises(ValueError):
        polar_parts(g.subset([1]))  # {1} is not symmetric in Z_4
    with pytest.raises(ValueError):
        polar_parts(g.subset([]))


def test_holder_sharpness_selfadjoint():
    g = build_group("dihedral:3")
    rng = np.random.default_rng(5)
    from ncfourier.groups import regular_matrix

    for p, q in [(3.0, 6.0), (4.0, 4.0), (5.0, 3.0)]:
        r = 1.0 / (1.0 / p + 1.0 / q)
        f = random_element(g, rng)
        x = AlgebraElement(g, (f.coeffs + involution(f).coeffs) / 2.0)
        mat = regular_matrix(x)
        w, u = np.linalg.eigh(mat)
        y = (u * np.abs(w) ** (p / q)) @ u.conj().T
        lhs = matrix_lp_norm(mat @ y, r, trace_dim=g.order)
        rhs = matrix_lp_norm(mat, p, trace_dim=g.order) * matrix_lp_norm(
            y, q, trace_dim=g.order
        )
        assert lhs == pytest.approx(rhs, abs=1e-8)


def test_interpolation_log_convexity():
    g = build_group("dihedral:6")
    rng = np.random.default_rng(6)
    thetas = [0.2, 0.4, 0.6, 0.8]
    for _ in range(10):
        f = random_element(g, rng)
        vals = {th: math.log(lp_norm(f, 1.0 / th)) for th in thetas}
        assert 2 * vals[0.4] <= vals[0.2] + vals[0.6] + 1e-8
        assert 2 * vals[0.6] <= vals[0.4] + vals[0.8] + 1e-8
