import pytest

from polysieve.polycore import IntPoly, normalize_positive

X2 = IntPoly((0, 0, 1))
X2M1 = IntPoly((-1, 0, 1))
X3MX = IntPoly((0, -1, 0, 1))
TWO_X2_X = IntPoly((0, 1, 2))
# (x^2-13)(x^2-17)(x^2-221)
SEXTIC = IntPoly((-48841, 0, 6851, 0, -251, 0, 1))

FIXTURES = {
    "x2": X2,
    "x2m1": X2M1,
    "x3mx": X3MX,
    "2x2px": TWO_X2_X,
    "sextic": SEXTIC,
}


@pytest.fixture(scope="session")
def fixtures():
    return dict(FIXTURES)


@pytest.fixture(scope="session")
def normalized_fixtures():
    return {name: normalize_positive(h)[0] for name, h in FIXTURES.items()}


@pytest.fixture(scope="session")
def smooth24():
    from polysieve.harmonic import smooth_weight_build

    return smooth_weight_build(24, 2**16)


def squares_upto(X):
    out = []
    n = 1
    while n * n <= X:
        out.append(n * n)
        n += 1
    return out
