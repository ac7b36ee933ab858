import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polysieve.intersective import (
    AuxiliaryBuilder,
    Certified,
    EmpiricalUpTo,
    MissingRootError,
    NotIntersective,
    auxiliary_poly,
    coefficient_bound,
    inheritance_check,
    intersectivity_verdict,
    padic_roots,
    squarefree_factors,
)
from polysieve.polycore import IntPoly


def test_squarefree_decomposition():
    # x^3 - x^2 = x^2 (x - 1)
    parts = squarefree_factors(IntPoly((0, 0, -1, 1)))
    assert sorted((f.coeffs, m) for f, m in parts) == [((-1, 1), 1), ((0, 1), 2)]
    parts = squarefree_factors(IntPoly((0, 0, 1)))
    assert [(f.coeffs, m) for f, m in parts] == [((0, 1), 2)]


def test_padic_roots_examples():
    roots = padic_roots(IntPoly((0, 0, 1)), 3, 2)
    assert len(roots) == 1 and roots[0].root == 0 and roots[0].multiplicity == 2

    roots = padic_roots(IntPoly((-1, 0, 1)), 7, 2)
    assert sorted(r.root for r in roots) == [1, 48]
    assert all(r.multiplicity == 1 for r in roots)

    roots = padic_roots(IntPoly((-2, 0, 1)), 7, 1)
    assert sorted(r.root for r in roots) == [3, 4]


def test_padic_roots_validate_congruence(fixtures):
    for h in fixtures.values():
        for p in (2, 3, 5, 13):
            for r in padic_roots(h, p, 4):
                assert h(r.root) % p**r.precision == 0
                # truncation consistency
                low = padic_roots(h, p, 2)
                assert any(
                    r.residue(2) == l.root and r.multiplicity == l.multiplicity
                    for l in low
                )


def test_padic_roots_two_adic_square():
    # 17 = 1 mod 8 is a 2-adic square; x^2 - 17 has exactly two roots
    roots = padic_roots(IntPoly((-17, 0, 1)), 2, 6)
    rs = sorted(r.root for r in roots)
    assert len(rs) == 2
    assert all((r * r - 17) % 64 == 0 for r in rs)
    assert (rs[0] + rs[1]) % 64 == 0  # negatives of each other


def test_verdict_examples(fixtures):
    assert intersectivity_verdict(fixtures["x2"], 100) == Certified(0)
    v = intersectivity_verdict(IntPoly((-2, 0, 1)), 100)
    assert isinstance(v, NotIntersective)
    # the witness is a checkable certificate: no root modulo it
    mod = v.witness
    assert all((x * x - 2) % mod != 0 for x in range(mod))


def test_verdict_sextic_empirical(fixtures):
    v = intersectivity_verdict(fixtures["sextic"], 10**4)
    assert v == EmpiricalUpTo(10**4)


def test_root_residue_examples():
    b = AuxiliaryBuilder(IntPoly((0, 0, 1)))
    assert b.r_ell(60) == 0
    b = AuxiliaryBuilder(IntPoly((-1, 0, 1)))
    assert b.r_ell(6) == -5
    b2 = AuxiliaryBuilder(IntPoly((-1, 0, 1)), overrides={2: -1})
    assert b2.r_ell(4) == -1


def test_lambda_examples():
    assert AuxiliaryBuilder(IntPoly((0, 0, 1))).lambda_of(12) == 144
    assert AuxiliaryBuilder(IntPoly((-1, 0, 1))).lambda_of(12) == 12
    b = AuxiliaryBuilder(IntPoly((0, 0, -1, 1)), overrides={2: 0})
    assert b.lambda_of(6) == 12


def test_auxiliary_poly_examples():
    assert auxiliary_poly(IntPoly((0, 0, 1)), 5).aux.coeffs == (0, 0, 1)
    b = AuxiliaryBuilder(IntPoly((-1, 0, 1)))
    assert b.context(2).aux.coeffs == (0, -2, 2)
    assert b.context(3).aux.coeffs == (1, -4, 3)


def test_context_invariants(fixtures):
    for name, h in fixtures.items():
        if h.degree < 2:
            continue
        b = AuxiliaryBuilder(h)
        r_h = coefficient_bound(h)
        k = h.degree
        for ell in (1, 2, 6, 12, 30):
            ctx = b.context(ell)
            assert h(ctx.r_ell) % ell == 0
            assert -ell < ctx.r_ell <= 0
            assert ctx.lambda_ell % ell == 0 and ell**k % ctx.lambda_ell == 0
            assert ctx.aux.leading > 0
            assert ctx.aux.max_abs_coeff() <= r_h * ell ** (k - 1)


def test_missing_root_error():
    b = AuxiliaryBuilder(IntPoly((-2, 0, 1)))  # no 5-adic root
    with pytest.raises(MissingRootError):
        b.context(5)


def test_ell_one_degenerate(fixtures):
    for h in fixtures.values():
        ctx = AuxiliaryBuilder(h).context(1)
        assert ctx.r_ell == 0 and ctx.lambda_ell == 1 and ctx.aux == h


def test_coefficient_bound_examples():
    assert coefficient_bound(IntPoly((0, 0, 1))) == 12
    assert coefficient_bound(IntPoly((-1, 0, 1))) == 12
    with pytest.raises(ValueError):
        coefficient_bound(IntPoly((0, 1)))


def test_inheritance_examples():
    rep = inheritance_check(IntPoly((-1, 0, 1)), 1, 2)
    assert rep.ok
    rep = inheritance_check(IntPoly((0, 0, 1)), 3, 5)
    assert rep.ok
    rep = inheritance_check(IntPoly((-1, 0, 1)), 2, 3)
    assert rep.ok


def test_lambda_completely_multiplicative(fixtures):
    rng = random.Random(11)
    for name in ("x2", "x2m1", "x3mx"):
        b = AuxiliaryBuilder(fixtures[name])
        for _ in range(200):
            a = rng.randint(1, 40)
            c = rng.randint(1, 40)
            assert b.lambda_of(a * c) == b.lambda_of(a) * b.lambda_of(c)


def test_certified_root_congruence(fixtures):
    # for certified polynomials with z_p = the integer root, r_ell = root mod ell
    h = fixtures["x2"]
    b = AuxiliaryBuilder(h)
    for ell in range(1, 60):
        assert b.r_ell(ell) % ell == 0


@given(st.integers(1, 120), st.integers(1, 12))
@settings(max_examples=60, deadline=None)
def test_inheritance_property_random(ell, q):
    rep = inheritance_check(IntPoly((-1, 0, 1)), ell, q, sample_count=12)
    assert rep.ok


def test_context_serialization():
    ctx = AuxiliaryBuilder(IntPoly((-1, 0, 1))).context(6)
    blob = ctx.to_jsonable()
    assert blob["ell"] == 6
    assert blob["aux"] == [str(c) for c in ctx.aux.coeffs]
    assert {r["p"] for r in blob["roots"]} == {2, 3}
