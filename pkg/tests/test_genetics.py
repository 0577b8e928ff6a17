import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bayespoly import genetics
from bayespoly.errors import ArityError, DomainError, ParseError, UnsupportedModelError
from bayespoly.genetics import CONSTRAINED_MODELS, MISSING
from bayespoly.genetics import GeneticModel as M

finite = st.floats(-100, 100, allow_nan=False)


@pytest.mark.parametrize("call, g", [("AA", 0), ("AB", 1), ("BA", 1), ("BB", 2), ("NA", MISSING),
                                     (None, MISSING), ("a/b", 1), ("", MISSING)])
def test_encode_genotype(call, g):
    assert genetics.encode_genotype(call) == g


@pytest.mark.parametrize("bad", ["AC", "ABB", "3", "XY"])
def test_encode_genotype_rejects(bad):
    with pytest.raises(ParseError) as exc:
        genetics.encode_genotype(bad)
    assert exc.value.token == bad


def test_design_rows():
    assert genetics.polynomial_design_row(0).tolist() == [1, 0, 0]
    assert genetics.polynomial_design_row(1).tolist() == [1, 1, 1]
    assert genetics.polynomial_design_row(2).tolist() == [1, 2, 4]
    with pytest.raises(DomainError):
        genetics.polynomial_design_row(MISSING)


def test_omega_tables():
    assert genetics.omega(M.GENOTYPIC).tolist() == [[1, 0, 0], [0, 1, 1], [0, 2, 4]]
    assert genetics.omega(M.DOMINANT).tolist() == [[1, 0, 0], [0, 1, 1], [0, 1, 3]]
    assert genetics.omega(M.RECESSIVE).tolist() == [[1, 0, 0], [0, 2, 4], [0, 1, 1]]
    assert genetics.omega(M.ADDITIVE).tolist() == [[1, 0, 0], [0, 1, 1], [0, 0, 1]]
    assert genetics.omega(M.CODOMINANT).tolist() == [[1, 0, 0], [0, 1, 1], [0, 1, 2]]
    for m in genetics.ALTERNATIVE_MODELS:
        w = genetics.omega(m)
        assert w[0].tolist() == [1, 0, 0]
        assert abs(np.linalg.det(w)) > 0.5
    with pytest.raises(UnsupportedModelError):
        genetics.omega(M.NULL)


def test_constraint_contrasts():
    want = {M.ADDITIVE: [0, 0, 1], M.DOMINANT: [0, 1, 3], M.RECESSIVE: [0, 1, 1], M.CODOMINANT: [0, 1, 2]}
    for m, c in want.items():
        assert genetics.constraint_contrast(m).tolist() == c
    for m in (M.GENOTYPIC, M.NULL):
        with pytest.raises(UnsupportedModelError):
            genetics.constraint_contrast(m)


def test_expected_trait_examples():
    assert genetics.expected_trait_triplet(M.GENOTYPIC, [1, 1, 1]).tolist() == [1, 3, 7]
    assert genetics.expected_trait_triplet(M.RECESSIVE, [0, 1]).tolist() == [0, 0, 1]
    assert genetics.expected_trait_triplet(M.CODOMINANT, [0, 1]).tolist() == [0, 1, 0]
    assert genetics.expected_trait_triplet(M.NULL, [2.5]).tolist() == [2.5, 2.5, 2.5]
    with pytest.raises(ArityError):
        genetics.expected_trait_triplet(M.DOMINANT, [1, 2, 3])
    with pytest.raises(ArityError):
        genetics.expected_trait_triplet(M.GENOTYPIC, [1, 2])


def _conforming_beta(model, b0, b1):
    # Solve c . beta = 0 for beta2 (or beta1 when c has no beta2 term).
    c = genetics.constraint_contrast(model)
    if model is M.ADDITIVE:
        return np.array([b0, b1, 0.0])
    return np.array([b0, b1, -c[1] * b1 / c[2]])


@given(st.sampled_from(CONSTRAINED_MODELS), finite, finite)
def test_constrained_beta_maps_to_theta2_zero(model, b0, b1):
    beta = _conforming_beta(model, b0, b1)
    assert genetics.constraint_contrast(model) @ beta == pytest.approx(0.0, abs=1e-12)
    theta = genetics.omega(model) @ beta
    assert theta[2] == pytest.approx(0.0, abs=1e-12)
    poly = genetics.expected_trait_triplet(M.GENOTYPIC, beta)
    sub = genetics.expected_trait_triplet(model, theta[:2])
    assert np.allclose(poly, sub, rtol=0, atol=1e-12 * max(1.0, np.abs(beta).max()))


@given(finite, finite, finite)
def test_genotypic_round_trip(b0, b1, b2):
    beta = np.array([b0, b1, b2])
    gamma = genetics.omega(M.GENOTYPIC) @ beta
    back = genetics.omega_inverse(M.GENOTYPIC) @ gamma
    assert np.allclose(back, beta, rtol=0, atol=1e-12 * max(1.0, np.abs(beta).max()))
    assert np.allclose(genetics.expected_trait_triplet(M.GENOTYPIC, beta),
                       [gamma[0], gamma[0] + gamma[1], gamma[0] + gamma[2]], atol=1e-9)


def test_allele_flip_duality():
    d = genetics.design_coding(M.DOMINANT)
    r = genetics.design_coding(M.RECESSIVE)
    for g in (0, 1, 2):
        assert d[g] == 1 - r[2 - g]
    flipped = genetics.flip_alleles(np.array([0, 1, 2, MISSING], dtype=np.int8))
    assert flipped.tolist() == [2, 1, 0, MISSING]


def test_design_matrix_shapes():
    g = np.array([0, 1, 2, 1])
    assert genetics.design_matrix(M.GENOTYPIC, g).shape == (4, 3)
    assert genetics.design_matrix(M.NULL, g).shape == (4, 1)
    assert genetics.design_matrix(M.RECESSIVE, g)[:, 1].tolist() == [0, 0, 1, 0]
    with pytest.raises(DomainError):
        genetics.design_matrix(M.ADDITIVE, [0, 3])


def test_model_codes_round_trip():
    for m in M:
        assert M.from_short(m.short) is m
    with pytest.raises(ValueError):
        M.from_short("Z")
