import numpy as np
import pytest

from ncfourier.groups import build_group
from ncfourier.multipliers import Symbol, symbol_from_spec
from ncfourier.transference import (
    bump_element,
    compress,
    folner_window,
    hertz_schur_transference_residual,
    schur_bilinear,
)


@pytest.fixture(scope="module")
def z256():
    return build_group("cyclic:256")


def test_folner_window():
    assert folner_window(16, 2).tolist() == [14, 15, 0, 1, 2]


def test_point_mass_schur_action(z256):
    # single lambda(t) inputs isolate one symbol value
    g = z256
    m = symbol_from_spec(g, "random:1", arity=2)
    x = compress(g.delta_element(3), 8, 2.0)
    y = compress(g.delta_element(5), 8, 2.0)
    out = schur_bilinear(m, x, y)
    nz = np.nonzero(np.abs(out) > 1e-14)
    # entries sit on the diagonal band s - t = 8
    assert np.all((nz[0] - nz[1]) % 256 == 8)


def test_delta_zero_inputs_exact(z256):
    g = z256
    m = symbol_from_spec(g, "random:42", arity=2)
    d0 = g.delta_element(0)
    res = hertz_schur_transference_residual(m, 1, 2.0, 2.0, d0, d0, d0)
    assert res.residual == 0.0


def test_constant_symbol_folner_fraction(z256):
    # m == 1: the pairing gap is exactly the Folner overlap defect, shrinking in alpha
    g = z256
    ones = Symbol(g, 2, np.ones((256, 256)))
    x = bump_element(g, 4, 1.5)
    rels = [
        hertz_schur_transference_residual(ones, a, 2.0, 2.0, x, x, x).relative_residual
        for a in (4, 16, 64)
    ]
    assert rels[0] > rels[1] > rels[2]
    assert rels[2] < 0.02


def test_acceptance_fixture_decay(z256):
    g = z256
    m = symbol_from_spec(g, "random:7", arity=2)
    x = bump_element(g, 4, 1.5)
    y = bump_element(g, 4, 1.5)
    z = bump_element(g, 4, 1.5)
    rels = []
    for alpha in (8, 16, 32):
        res = hertz_schur_transference_residual(m, alpha, 2.0, 2.0, x, y, z)
        rels.append(res.relative_residual)
    assert rels[0] >= rels[1] >= rels[2]
    assert rels[2] <= 0.05


def test_exponent_validation(z256):
    g = z256
    m = symbol_from_spec(g, "random:3", arity=2)
    x = g.delta_element(0)
    with pytest.raises(ValueError):
        hertz_schur_transference_residual(m, 100, 2.0, 2.0, x, x, x)  # alpha > L/4
    with pytest.raises(ValueError):
        hertz_schur_transference_residual(m, 8, 1.5, 1.5, x, x, x)  # p < 1 combined


def test_exponent_independence(z256):
    # compression scalings cancel; the residual is the same for any valid pair
    g = z256
    m = symbol_from_spec(g, "random:9", arity=2)
    x = bump_element(g, 3, 1.5)
    r1 = hertz_schur_transference_residual(m, 16, 2.0, 2.0, x, x, x)
    r2 = hertz_schur_transference_residual(m, 16, 4.0, 4.0, x, x, x)
    assert r1.residual == pytest.approx(r2.residual, rel=1e-12)
