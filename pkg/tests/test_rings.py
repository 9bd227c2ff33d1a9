"""Ring layer: frozen values, an independent Smith oracle, and invariants."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from ttglue.rings import (
    GFx,
    Matrix,
    NotACover,
    NotAUnit,
    QQx,
    RingSpec,
    ZZ,
    ZeroElement,
    bezout_cover_certificate,
    cokernel_invariants,
    gcdex_local,
    kernel_basis,
    local_divmod,
    localize,
    powered_bezout,
    smith_normal_form,
    solve_linear,
    unit_decompose,
)


def oracle_snf_int(rows):
    """Plain gcd-elimination Smith diagonal over the integers.

    Deliberately independent of the library: list-of-int arithmetic only.
    """
    mat = [list(r) for r in rows]
    nrows, ncols = len(mat), (len(mat[0]) if mat else 0)
    n = min(nrows, ncols)
    diag = []
    while len(diag) < n and mat and mat[0]:
        nz = [(i, j) for i in range(len(mat)) for j in range(len(mat[0]))
              if mat[i][j] != 0]
        if not nz:
            break
        while True:
            nz = [(i, j) for i in range(len(mat)) for j in range(len(mat[0]))
                  if mat[i][j] != 0]
            i0, j0 = min(nz, key=lambda ij: abs(mat[ij[0]][ij[1]]))
            mat[0], mat[i0] = mat[i0], mat[0]
            for row in mat:
                row[0], row[j0] = row[j0], row[0]
            p = mat[0][0]
            done = True
            for i in range(1, len(mat)):
                q = mat[i][0] // p
                if q:
                    for j in range(len(mat[0])):
                        mat[i][j] -= q * mat[0][j]
                if mat[i][0]:
                    done = False
            for j in range(1, len(mat[0])):
                q = mat[0][j] // p
                if q:
                    for i in range(len(mat)):
                        mat[i][j] -= q * mat[i][0]
                if mat[0][j]:
                    done = False
            if done:
                bad = None
                for i in range(1, len(mat)):
                    for j in range(1, len(mat[0])):
                        if mat[i][j] % p:
                            bad = i
                            break
                    if bad is not None:
                        break
                if bad is None:
                    break
                for j in range(len(mat[0])):
                    mat[0][j] += mat[bad][j]
        diag.append(abs(mat[0][0]))
        mat = [row[1:] for row in mat[1:]]
    while len(diag) < n:
        diag.append(0)
    return diag


Z = ZZ()
QX = QQx()
F5X = GFx(5)


def zmat(rows):
    return Matrix(Z, rows)


def x_poly(*coeffs):
    """Ascending-degree rational polynomial as a QQx element."""
    from fractions import Fraction
    return QX.el(tuple(Fraction(c) for c in coeffs) if coeffs != (0,) else ())


# -- frozen Smith examples ---------------------------------------------------


def test_smith_2468():
    m = zmat([[2, 4], [6, 8]])
    snf = smith_normal_form(m)
    assert [d.num for d in snf.diagonal] == [2, 4]
    assert snf.verify(m)


def test_smith_identity():
    m = Matrix.identity(Z, 3)
    snf = smith_normal_form(m)
    assert [d.num for d in snf.diagonal] == [1, 1, 1]
    assert snf.verify(m)


def test_smith_poly_row():
    x = x_poly(0, 1)
    x2 = x * x
    m = Matrix(QX, [[x, x2]])
    snf = smith_normal_form(m)
    assert len(snf.diagonal) == 1
    assert snf.diagonal[0] == x
    assert snf.verify(m)


def test_smith_zero_matrix():
    m = Matrix.zero(Z, 2, 3)
    snf = smith_normal_form(m)
    assert [d.num for d in snf.diagonal] == [0, 0]
    assert snf.verify(m)


# -- Bezout certificates -----------------------------------------------------


def test_bezout_2_3():
    a, b = bezout_cover_certificate(Z.from_int(2), Z.from_int(3))
    assert a * 2 + b * 3 == Z.one()


def test_bezout_polys():
    x = x_poly(0, 1)
    xm1 = x_poly(-1, 1)
    a, b = bezout_cover_certificate(x, xm1)
    assert a * x + b * xm1 == QX.one()


def test_bezout_not_a_cover():
    with pytest.raises(NotACover):
        bezout_cover_certificate(Z.from_int(2), Z.from_int(4))


def test_powered_bezout():
    a, b = powered_bezout(Z.from_int(2), Z.from_int(3), 4)
    assert a * Z.from_int(16) + b * Z.from_int(81) == Z.one()


# -- localization ------------------------------------------------------------


def test_localize_z_at_6():
    spec = localize(Z, Z.from_int(6))
    assert spec.inverted == frozenset({2, 3})


def test_localize_f5_poly():
    f = F5X.el((4, 0, 1))  # x^2 - 1 over F5
    spec = localize(F5X, f)
    assert spec.inverted == frozenset({(1, 1), (4, 1)})  # x+1 and x+4 = x-1


def test_localize_zero_raises():
    with pytest.raises(ZeroElement):
        localize(Z, Z.zero())


def test_localize_idempotent_monotone():
    s1 = localize(Z, Z.from_int(6))
    s2 = localize(s1, s1.from_int(6))
    assert s1 == s2
    s3 = localize(s1, s1.from_int(10))
    assert s1.inverted <= s3.inverted


# -- linear solving ----------------------------------------------------------


def test_solve_linear_examples():
    m = zmat([[2]])
    assert [v.num for v in solve_linear(m, [Z.from_int(4)])] == [2]
    assert solve_linear(m, [Z.from_int(1)]) is None
    z2 = ZZ(2)
    m2 = Matrix(z2, [[2]])
    sol = solve_linear(m2, [z2.one()])
    assert len(sol) == 1 and sol[0] * 2 == z2.one()


# -- unit decomposition ------------------------------------------------------


def test_unit_decompose_minus_12():
    spec = ZZ(2, 3)
    d = unit_decompose(spec.from_int(-12), spec)
    assert d.torsion == -1
    assert d.exps() == {2: 2, 3: 1}
    assert d.to_element(spec) == spec.from_int(-12)


def test_unit_decompose_one():
    spec = ZZ(2, 3)
    d = unit_decompose(spec.one(), spec)
    assert d.torsion == 1 and d.exps() == {}


def test_unit_decompose_not_a_unit():
    with pytest.raises(NotAUnit):
        unit_decompose(ZZ(2, 3).from_int(5), ZZ(2, 3))


# -- random comparisons against the oracle ------------------------------------


int_entries = st.integers(min_value=-30, max_value=30)


@st.composite
def int_matrices(draw):
    rows = draw(st.integers(min_value=1, max_value=4))
    cols = draw(st.integers(min_value=1, max_value=4))
    return [[draw(int_entries) for _ in range(cols)] for _ in range(rows)]


@settings(max_examples=60, deadline=None)
@given(int_matrices())
def test_smith_matches_oracle(rows):
    m = zmat(rows)
    snf = smith_normal_form(m)
    assert snf.verify(m)
    assert [d.num for d in snf.diagonal] == oracle_snf_int(rows)


@st.composite
def f5_poly_matrices(draw):
    rows = draw(st.integers(min_value=1, max_value=3))
    cols = draw(st.integers(min_value=1, max_value=3))
    def poly():
        deg = draw(st.integers(min_value=-1, max_value=2))
        if deg < 0:
            return F5X.zero()
        cs = [draw(st.integers(min_value=0, max_value=4)) for _ in range(deg + 1)]
        return F5X.el(tuple(cs) if any(cs) else ())
    return [[poly() for _ in range(cols)] for _ in range(rows)]


@settings(max_examples=40, deadline=None)
@given(f5_poly_matrices())
def test_smith_poly_invariants(rows):
    m = Matrix(F5X, rows)
    snf = smith_normal_form(m)
    assert snf.verify(m)
    for i in range(len(snf.diagonal) - 1):
        assert snf.diagonal[i].divides(snf.diagonal[i + 1])


def test_smith_localized_ring():
    spec = ZZ(2)
    m = Matrix(spec, [[spec.from_int(4), spec.from_int(6)],
                      [spec.from_int(10), spec.from_int(14)]])
    snf = smith_normal_form(m)
    assert snf.verify(m)
    # 2 is a unit here, so invariant factors carry only odd parts
    for d in snf.diagonal:
        if not d.is_zero():
            assert d.sfree_part() % 2 == 1


# -- division, gcd, kernels ---------------------------------------------------


def test_local_divmod_clears_denominator():
    spec = ZZ(2)
    a = spec.el(3, {2: 2})  # 3/4
    b = spec.from_int(5)
    q, r = local_divmod(a, b)
    assert q * b + r == a
    assert r.den == () and 0 <= r.num < 5


@settings(max_examples=60, deadline=None)
@given(st.integers(-40, 40), st.integers(-40, 40))
def test_gcdex_local_identities(a, b):
    spec = ZZ(2)
    ea, eb = spec.from_int(a), spec.from_int(b)
    g, s, t, u, v = gcdex_local(ea, eb)
    assert s * ea + t * eb == g
    assert u * ea + v * eb == spec.zero()
    assert s * v - t * u == spec.one()


def test_kernel_and_cokernel():
    m = zmat([[2, 4], [1, 2]])
    k = kernel_basis(m)
    assert k.cols == 1
    assert (m * k).is_zero()
    free, factors = cokernel_invariants(zmat([[2, 0], [0, 3]]))
    assert free == 0 and [f.num for f in factors] == [6]


@settings(max_examples=40, deadline=None)
@given(int_matrices())
def test_solve_roundtrip(rows):
    rng = random.Random(7)
    m = zmat(rows)
    x = [Z.from_int(rng.randint(-5, 5)) for _ in range(m.cols)]
    b = m.apply_vec(x)
    sol = solve_linear(m, b)
    assert sol is not None
    assert m.apply_vec(sol) == b


# -- unit descriptor algebra ---------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(st.integers(-3, 3), st.integers(-3, 3), st.integers(-3, 3),
       st.integers(-3, 3), st.booleans(), st.booleans())
def test_unit_decompose_multiplicative(a2, a3, b2, b3, sa, sb):
    spec = ZZ(2, 3)
    ua = spec.from_int(-1 if sa else 1) * spec.prime_power(2, a2) * spec.prime_power(3, a3)
    ub = spec.from_int(-1 if sb else 1) * spec.prime_power(2, b2) * spec.prime_power(3, b3)
    da, db = unit_decompose(ua, spec), unit_decompose(ub, spec)
    dab = unit_decompose(ua * ub, spec)
    assert dab == da.mul(db, spec)
    assert da.inv(spec).mul(da, spec).to_element(spec) == spec.one()


@settings(max_examples=60, deadline=None)
@given(st.integers(-50, 50), st.integers(-50, 50))
def test_bezout_iff_unit_gcd(a, b):
    spec = ZZ(2)
    ea, eb = spec.from_int(a), spec.from_int(b)
    g = gcdex_local(ea, eb)[0]
    try:
        al, be = bezout_cover_certificate(ea, eb)
        assert g.is_unit() or g == spec.one()
        assert al * ea + be * eb == spec.one()
    except NotACover:
        assert not g.is_unit()
