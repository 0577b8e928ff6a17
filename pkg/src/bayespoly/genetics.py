"""Genotype coding and the map between polynomial and genetic-model parameters.

The polynomial model writes the expected trait as ``b0 + b1*g + b2*g**2`` for
dosage ``g`` of the B allele. Every genetic model is a linear image
``theta = omega @ beta``: the genotypic model is a bijection, and the four
one-degree-of-freedom models are the slice ``theta[2] == 0``.
"""

from __future__ import annotations

import enum

import numpy as np

from .errors import ArityError, DomainError, ParseError, UnsupportedModelError

MISSING = -1
"""Dosage sentinel for a missing genotype call."""

_MISSING_TOKENS = frozenset({"", "NA", "N/A", "NN", "00", "--", ".", "./.", "-9-9"})


class GeneticModel(enum.IntEnum):
    """The six hypotheses. Integer values fix the tie-break order of selection."""

    ADDITIVE = 0
    DOMINANT = 1
    RECESSIVE = 2
    CODOMINANT = 3
    GENOTYPIC = 4
    NULL = 5

    @property
    def short(self) -> str:
        return _SHORT[self]

    @classmethod
    def from_short(cls, code: str) -> GeneticModel:
        try:
            return _FROM_SHORT[code]
        except KeyError:
            raise ValueError(f"unknown model code {code!r}") from None


_SHORT = {
    GeneticModel.ADDITIVE: "A",
    GeneticModel.DOMINANT: "D",
    GeneticModel.RECESSIVE: "R",
    GeneticModel.CODOMINANT: "C",
    GeneticModel.GENOTYPIC: "G",
    GeneticModel.NULL: "N",
}
_FROM_SHORT = {v: k for k, v in _SHORT.items()}

# Polynomial parameterisation is the genotypic model for evidence purposes.
POLYNOMIAL = GeneticModel.GENOTYPIC

CONSTRAINED_MODELS = (
    GeneticModel.ADDITIVE,
    GeneticModel.DOMINANT,
    GeneticModel.RECESSIVE,
    GeneticModel.CODOMINANT,
)
ALTERNATIVE_MODELS = CONSTRAINED_MODELS + (GeneticModel.GENOTYPIC,)

_OMEGA = {
    GeneticModel.GENOTYPIC: ((1, 0, 0), (0, 1, 1), (0, 2, 4)),
    GeneticModel.DOMINANT: ((1, 0, 0), (0, 1, 1), (0, 1, 3)),
    GeneticModel.RECESSIVE: ((1, 0, 0), (0, 2, 4), (0, 1, 1)),
    GeneticModel.CODOMINANT: ((1, 0, 0), (0, 1, 1), (0, 1, 2)),
    GeneticModel.ADDITIVE: ((1, 0, 0), (0, 1, 1), (0, 0, 1)),
}

# Trait-design coding of each model's slope column, indexed by dosage 0/1/2.
_CODING = {
    GeneticModel.ADDITIVE: (0, 1, 2),
    GeneticModel.DOMINANT: (0, 1, 1),
    GeneticModel.RECESSIVE: (0, 0, 1),
    GeneticModel.CODOMINANT: (0, 1, 0),
}


def encode_genotype(call) -> int:
    """Map an allele-pair call to a B-allele dosage.

    ``AA -> 0``, ``AB``/``BA -> 1``, ``BB -> 2``; ``None`` or a missing marker
    such as ``NA`` gives :data:`MISSING`.
    """
    if call is None:
        return MISSING
    token = str(call).strip()
    if token.upper() in _MISSING_TOKENS:
        return MISSING
    pair = token.upper().replace("/", "").replace("|", "")
    if len(pair) == 2 and set(pair) <= {"A", "B"}:
        return pair.count("B")
    raise ParseError(f"invalid genotype token {token!r}", token=token)


def _check_dosage(g) -> int:
    if isinstance(g, (bool, np.bool_)) or g not in (0, 1, 2):
        raise DomainError(f"dosage must be 0, 1 or 2, got {g!r}")
    return int(g)


def polynomial_design_row(g) -> np.ndarray:
    g = _check_dosage(g)
    return np.array([1.0, g, g * g])


def omega(model: GeneticModel) -> np.ndarray:
    """The 3x3 map ``theta = omega @ beta`` for a non-null model."""
    try:
        return np.array(_OMEGA[GeneticModel(model)], dtype=np.float64)
    except KeyError:
        raise UnsupportedModelError(f"no omega matrix for {GeneticModel(model).name}") from None


def omega_inverse(model: GeneticModel) -> np.ndarray:
    # Exact: every omega has determinant +-1 or +-2 with small integer entries.
    return np.linalg.inv(omega(model))


def constraint_contrast(model: GeneticModel) -> np.ndarray:
    """Vector ``c`` with ``c @ beta == 0`` exactly when beta lies in ``model``."""
    model = GeneticModel(model)
    if model not in CONSTRAINED_MODELS:
        raise UnsupportedModelError(f"{model.name} is not defined by a linear constraint")
    return omega(model)[2].copy()


def design_coding(model: GeneticModel) -> np.ndarray:
    """Slope-column values for dosages (0, 1, 2) in a constrained model's design."""
    model = GeneticModel(model)
    if model not in _CODING:
        raise UnsupportedModelError(f"{model.name} has no single-column coding")
    return np.array(_CODING[model], dtype=np.float64)


def design_matrix(model: GeneticModel, dosages) -> np.ndarray:
    """Explicit regression design for non-missing dosages.

    Polynomial/genotypic use ``(1, g, g^2)``; constrained models use the
    intercept plus their indicator or count column; the null
    model is the intercept only.
    """
    g = np.asarray(dosages, dtype=np.int64)
    if np.any((g < 0) | (g > 2)):
        raise DomainError("design_matrix requires dosages in {0, 1, 2}")
    model = GeneticModel(model)
    ones = np.ones(g.shape[0])
    if model is GeneticModel.NULL:
        return ones[:, None]
    if model is GeneticModel.GENOTYPIC:
        return np.column_stack([ones, g, g * g]).astype(np.float64)
    return np.column_stack([ones, design_coding(model)[g]])


def genotypic_indicator_design(dosages) -> np.ndarray:
    """``(1, x_AB, x_BB)`` design of the two-indicator genotypic regression."""
    g = np.asarray(dosages, dtype=np.int64)
    return np.column_stack([np.ones(g.shape[0]), g == 1, g == 2]).astype(np.float64)


def expected_trait_triplet(model: GeneticModel, params) -> np.ndarray:
    """Expected trait for genotypes (AA, AB, BB) under ``model``.

    ``params`` is ``beta`` (length 3) for the polynomial/genotypic model, a
    two-vector ``(alpha_0, alpha_1)`` for constrained models, or a single
    intercept for the null model. The genotypic model's own parameters are
    ``omega @ beta``.
    """
    model = GeneticModel(model)
    p = np.atleast_1d(np.asarray(params, dtype=np.float64))
    want = 3 if model is GeneticModel.GENOTYPIC else 1 if model is GeneticModel.NULL else 2
    if p.shape != (want,):
        raise ArityError(f"{model.name} takes {want} parameters, got {p.shape[0]}")
    if model is GeneticModel.GENOTYPIC:
        return np.array([polynomial_design_row(g) @ p for g in (0, 1, 2)])
    if model is GeneticModel.NULL:
        return np.full(3, p[0])
    return p[0] + p[1] * design_coding(model)


def flip_alleles(dosages) -> np.ndarray:
    """Swap the coded allele: ``g -> 2 - g``, missing stays missing."""
    g = np.asarray(dosages)
    return np.where(g == MISSING, MISSING, 2 - g).astype(g.dtype)
