import numpy as np
import pytest

from clifford_manifolds import algebra as al
from clifford_manifolds.expansions import (
    LaurentFitError,
    Singularity,
    laurent_fit,
    mittag_leffler_construct,
    reduced_indices,
)
from clifford_manifolds.operators import dirac_fd, laplace_fd
from clifford_manifolds.periodization import (
    Lattice,
    PreconditionError,
    TruncationPolicy,
    cot_series,
    epsilon_series,
)

L42 = Lattice.standard(4, 2, 0)
K6 = TruncationPolicy(6)
A = np.array([0.3, 0.4, 0.2, 0.1])
X = np.array([[0.7, -0.2, 0.5, 0.4], [0.1, 0.9, -0.3, 0.6]])


def test_single_pole_is_cotangent():
    f = mittag_leffler_construct([Singularity.make(A, (0, 0, 0, 0), al.scalar(1.0, 4))], L42, "monogenic", K6)
    assert np.allclose(f(X), cot_series(X - A, L42, "monogenic", K6).value, atol=1e-15)


def test_coefficients_multiply_on_the_right():
    c = al.basis_blade(4, 1, 3)
    f = mittag_leffler_construct([Singularity.make(A, (0, 1, 0, 0), c)], L42, "monogenic", K6)
    e = epsilon_series((0, 1, 0, 0), X - A, L42, "monogenic", K6).value
    assert np.allclose(f(X), al.gp(e, c))


def test_constructed_fields_are_annihilated():
    c = al.scalar(0.5, 4) + al.basis_blade(4, 2, 3)
    sings = [Singularity.make(A, (0, 0, 0, 0), c), Singularity.make([0.8, 0.1, 0.6, 0.3], (1, 0, 0, 0), -c)]
    f = mittag_leffler_construct(sings, Lattice.standard(4, 2, 1), "monogenic", TruncationPolicy(10))
    assert np.linalg.norm(dirac_fd(f, X[0])) < 1e-4
    g = mittag_leffler_construct(
        [Singularity.make(A, (0, 0, 0, 0), al.scalar(1.0, 4))], Lattice.standard(4, 1), "harmonic", TruncationPolicy(20)
    )
    assert abs(laplace_fd(g, X[0])[0]) < 1e-4


def test_construct_preconditions():
    one = al.scalar(1.0, 4)
    with pytest.raises(PreconditionError):
        mittag_leffler_construct(
            [Singularity.make(A, (0,) * 4, one), Singularity.make(A + [1, 0, 0, 0], (0,) * 4, -one)], L42
        )
    with pytest.raises(PreconditionError):
        mittag_leffler_construct([Singularity.make(A, (3, 2, 0, 0), one)], L42)
    with pytest.raises(PreconditionError):
        mittag_leffler_construct([Singularity.make(A, (0, 0, 0), one)], L42)
    with pytest.raises(PreconditionError):
        mittag_leffler_construct([], L42)


def test_torus_poles_need_auxiliary_points():
    L = Lattice.standard(3, 3, 1)
    one = al.scalar(1.0, 3)
    f = mittag_leffler_construct([Singularity.make([0.2, 0.3, 0.4], (0, 0, 0), one)], L, "monogenic", TruncationPolicy(2))
    with pytest.raises(PreconditionError):
        f(np.array([0.6, 0.6, 0.6]))
    with pytest.raises(PreconditionError):
        mittag_leffler_construct(
            [Singularity.make([0.2, 0.3, 0.4], (0, 0, 0), one)], L, aux=[[1.2, 0.3, 0.4]]
        )


def test_reduced_indices():
    assert set(reduced_indices(4, 1, "monogenic")) == {(0, 0, 0, 0), (1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0)}
    harm = reduced_indices(3, 2, "harmonic")
    assert all(mi[-1] <= 1 for mi in harm)
    assert (0, 0, 1) in harm and (0, 0, 2) not in harm
    # the dropped index is a combination of kept ones
    z = np.array([0.31, 0.17, 0.43])
    L = Lattice.standard(3, 1)
    K = TruncationPolicy(20)
    s = sum(epsilon_series(m, z, L, "harmonic", K).value for m in ((2, 0, 0), (0, 2, 0), (0, 0, 2)))
    assert abs(s[0]) < 1e-10


def test_laurent_recovers_planted_coefficients():
    c = 0.7 * al.basis_blade(4, 1, 2) - 0.2 * al.scalar(1.0, 4)
    f = mittag_leffler_construct([Singularity.make(A, (0, 0, 1, 0), c)], L42, "monogenic", K6)
    fit = laurent_fit(f, A, 1, L42, "monogenic", K6)
    for mi, v in fit.coefficients.items():
        assert np.allclose(v, c if mi == (0, 0, 1, 0) else 0.0, atol=1e-6)
    assert fit.condition < 1e8
    assert np.isfinite(fit.ratio) and "inner" in fit.residual


def test_laurent_fit_ill_conditioned():
    f = lambda x: cot_series(x - A, L42, "monogenic", K6).value
    with pytest.raises(LaurentFitError):
        laurent_fit(f, A, 1, L42, "monogenic", K6, n_dirs=20)


def test_laurent_fit_preconditions():
    f = lambda x: cot_series(x - A, L42, "monogenic", K6).value
    with pytest.raises(PreconditionError):
        laurent_fit(f, A, 5, L42)
    with pytest.raises(PreconditionError):
        laurent_fit(f, A, 1, L42, radii=(0.05,))


def test_laurent_fit_serializes():
    K = TruncationPolicy(2)
    f = lambda x: cot_series(x - A, L42, "monogenic", K).value
    d = laurent_fit(f, A, 0, L42, "monogenic", K).to_dict()
    assert "0,0,0,0" in d["coefficients"] and d["condition"] > 0
