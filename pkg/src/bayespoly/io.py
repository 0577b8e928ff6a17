"""Reading genotype and phenotype tables; truth and report TSVs.

Genotype file: tab-separated, header ``snp_id<TAB>sample...``, one SNP per
row, cells ``0``, ``1``, ``2`` or ``NA``. Phenotype file: one header line,
then ``sample_id<TAB>value`` rows. Parse errors carry 1-based line and column
numbers.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np

from .errors import AlignmentError, ParseError
from .genetics import MISSING, GeneticModel

log = logging.getLogger(__name__)

_TAB = ord("\t")
_ZERO = ord("0")


@dataclass(eq=False)
class GenotypeMatrix:
    """Dosage matrix, one int8 row per SNP (``-1`` = missing)."""

    snp_ids: list
    sample_ids: list
    dosages: np.ndarray

    def __post_init__(self):
        self.dosages = np.asarray(self.dosages, dtype=np.int8)
        if self.dosages.shape != (len(self.snp_ids), len(self.sample_ids)):
            raise ParseError(
                f"dosage matrix shape {self.dosages.shape} does not match "
                f"{len(self.snp_ids)} SNPs x {len(self.sample_ids)} samples")
        if len(set(self.snp_ids)) != len(self.snp_ids):
            raise ParseError("duplicate SNP identifiers")

    @property
    def n_snps(self) -> int:
        return len(self.snp_ids)

    @property
    def n_samples(self) -> int:
        return len(self.sample_ids)


def _parse_header(line: bytes) -> list[str]:
    fields = line.rstrip(b"\r\n").decode("utf-8").split("\t")
    if fields[0] != "snp_id":
        raise ParseError(f"genotype header must start with 'snp_id', got {fields[0]!r}", 1, 1)
    samples = fields[1:]
    if not samples:
        raise ParseError("genotype header lists no samples", 1)
    seen = set()
    for col, s in enumerate(samples, start=2):
        if not s:
            raise ParseError("empty sample identifier in header", 1, col)
        if s in seen:
            raise ParseError(f"duplicate sample identifier {s!r}", 1, col, s)
        seen.add(s)
    return samples


def _parse_row(line: bytes, n: int, lineno: int, out: np.ndarray) -> str:
    body = line.rstrip(b"\r\n")
    cut = body.find(b"\t")
    if cut <= 0:
        raise ParseError("row has no SNP identifier or no genotype cells", lineno, 1)
    snp = body[:cut].decode("utf-8")
    rest = body[cut + 1:]
    # Fast path: single-character dosage cells separated by single tabs.
    if len(rest) == 2 * n - 1:
        raw = np.frombuffer(rest, dtype=np.uint8)
        vals = raw[::2] - _ZERO
        if np.all(raw[1::2] == _TAB) and np.all(vals <= 2):
            out[:] = vals
            return snp
    tokens = rest.decode("utf-8").split("\t")
    if len(tokens) != n:
        raise ParseError(f"expected {n} genotype cells, got {len(tokens)}", lineno, None)
    for j, tok in enumerate(tokens):
        if tok == "0":
            out[j] = 0
        elif tok == "1":
            out[j] = 1
        elif tok == "2":
            out[j] = 2
        elif tok == "NA":
            out[j] = MISSING
        else:
            raise ParseError(f"invalid dosage token {tok!r}", lineno, j + 2, tok)
    return snp


def iter_genotype_chunks(path, chunk_size: int = 4096) -> Iterator:
    """Yield ``sample_ids`` first, then ``(snp_ids, dosages)`` blocks of at most ``chunk_size`` rows."""
    with open(path, "rb") as fh:
        first = fh.readline()
        if not first:
            raise ParseError("genotype file is empty", 1)
        samples = _parse_header(first)
        yield samples
        n = len(samples)
        seen = set()
        ids: list = []
        block = np.empty((chunk_size, n), dtype=np.int8)
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            snp = _parse_row(line, n, lineno, block[len(ids)])
            if snp in seen:
                raise ParseError(f"duplicate SNP identifier {snp!r}", lineno, 1, snp)
            seen.add(snp)
            ids.append(snp)
            if len(ids) == chunk_size:
                yield ids, block.copy()
                ids = []
        if ids:
            yield ids, block[:len(ids)].copy()


def load_genotypes(path) -> GenotypeMatrix:
    """Read a whole genotype file into memory."""
    chunks = iter_genotype_chunks(path)
    samples = next(chunks)
    ids, blocks = [], []
    for snp_ids, dos in chunks:
        ids.extend(snp_ids)
        blocks.append(dos)
    dosages = np.concatenate(blocks) if blocks else np.empty((0, len(samples)), dtype=np.int8)
    return GenotypeMatrix(ids, samples, dosages)


def write_genotypes(path, snp_ids, sample_ids, dosages) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(["snp_id", *sample_ids]) + "\n")
        write_genotype_rows(fh, snp_ids, dosages)


_TOKENS = np.array(["0", "1", "2", "NA"])


def write_genotype_rows(fh, snp_ids, dosages) -> None:
    d = np.asarray(dosages)
    toks = _TOKENS[np.where(d < 0, 3, d)]
    for snp, row in zip(snp_ids, toks):
        fh.write(snp + "\t" + "\t".join(row) + "\n")


@dataclass(frozen=True, eq=False)
class AlignedTrait:
    """Trait values in genotype sample order, restricted to samples that have one.

    ``columns`` indexes the kept samples in the genotype matrix.
    """

    values: np.ndarray
    columns: np.ndarray
    n_dropped: int


def read_phenotype(path) -> dict:
    values: dict = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        if not header:
            raise ParseError("phenotype file is empty", 1)
        if len(header.rstrip("\r\n").split("\t")) != 2:
            raise ParseError("phenotype header must have two tab-separated columns", 1)
        for lineno, raw in enumerate(fh, start=2):
            line = raw.rstrip("\r\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(f"expected 2 fields, got {len(parts)}", lineno)
            sid, tok = parts
            if sid in values:
                raise ParseError(f"duplicate sample identifier {sid!r}", lineno, 1, sid)
            try:
                v = float(tok)
            except ValueError:
                raise ParseError(f"non-numeric phenotype value {tok!r}", lineno, 2, tok) from None
            if not math.isfinite(v):
                raise ParseError(f"non-finite phenotype value {tok!r}", lineno, 2, tok)
            values[sid] = v
    return values


def load_phenotype(path, sample_ids) -> AlignedTrait:
    """Read a phenotype file and align it to ``sample_ids``.

    Genotyped samples without a phenotype are dropped (logged as a warning);
    phenotyped samples absent from the genotypes are ignored.
    """
    values = read_phenotype(path)
    cols = [j for j, s in enumerate(sample_ids) if s in values]
    if not cols:
        raise AlignmentError("no sample has both a genotype and a phenotype")
    dropped = len(sample_ids) - len(cols)
    if dropped:
        log.warning("%d genotyped sample(s) have no phenotype and are dropped", dropped)
    trait = np.array([values[sample_ids[j]] for j in cols], dtype=np.float64)
    return AlignedTrait(trait, np.array(cols, dtype=np.int64), dropped)


def write_phenotype(path, sample_ids, values) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("sample_id\tvalue\n")
        fh.writelines(f"{s}\t{format(float(v), '.17g')}\n" for s, v in zip(sample_ids, values))


def write_truth(path, snp_ids, truth) -> None:
    """``snp_id<TAB>causal<TAB>mode`` with mode ``A``/``D``/``R`` or empty."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("snp_id\tcausal\tmode\n")
        for snp, mode in zip(snp_ids, truth.modes):
            causal = mode >= 0
            fh.write(f"{snp}\t{int(causal)}\t{GeneticModel(int(mode)).short if causal else ''}\n")


def read_truth(path):
    """Inverse of :func:`write_truth`; returns ``(snp_ids, TruthTable)``."""
    from .sim import TruthTable

    ids, modes = [], []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\r\n").split("\t")
        if header != ["snp_id", "causal", "mode"]:
            raise ParseError("truth header must be 'snp_id<TAB>causal<TAB>mode'", 1)
        for lineno, raw in enumerate(fh, start=2):
            line = raw.rstrip("\r\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ParseError(f"expected 3 fields, got {len(parts)}", lineno)
            snp, causal, mode = parts
            if causal not in ("0", "1"):
                raise ParseError(f"causal must be 0 or 1, got {causal!r}", lineno, 2, causal)
            ids.append(snp)
            if causal == "1":
                try:
                    modes.append(int(GeneticModel.from_short(mode)))
                except ValueError:
                    raise ParseError(f"invalid mode {mode!r}", lineno, 3, mode) from None
            else:
                modes.append(-1)
    return ids, TruthTable(np.array(modes, dtype=np.int8))
