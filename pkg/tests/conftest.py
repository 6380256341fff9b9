import numpy as np
import pytest

from setopt import cone, problem


@pytest.fixture
def orthant2():
    return cone.nonnegative_orthant(2)


@pytest.fixture
def orthant3():
    return cone.nonnegative_orthant(3)


@pytest.fixture
def slanted_cone():
    # polyhedral cone with facets 6z1 - 2z2 >= 0 and -7z1 + 10z2 >= 0
    return cone.validate(np.array([[6.0, -2.0], [-7.0, 10.0]]), np.array([1.0, 1.0]))


@pytest.fixture
def narrow_cone():
    return cone.validate(np.array([[2.0, -6.0], [-6.0, 7.0]]), np.array([-1.0, -0.5]))


ALL_CONE_FIXTURES = ["orthant2", "orthant3", "slanted_cone", "narrow_cone"]


@pytest.fixture(params=ALL_CONE_FIXTURES)
def any_cone(request):
    return request.getfixturevalue(request.param)


def make_scalar_problem(f, df, box=(-10.0, 10.0), name="scalar"):
    """1-D, single-function, single-component problem for hand-checkable tests."""

    def values(x):
        return np.array([[f(x[0])]])

    def jacobians(x):
        return np.array([[[df(x[0])]]])

    return problem.ProblemSpec(name, 1, 1, 1, cone.nonnegative_orthant(1),
                               np.array([box]), values, jacobians)
