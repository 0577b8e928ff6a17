"""Scan results: columnar and per-row views plus the results TSV.

Floats are written with 17 significant digits so a write/read round trip
reproduces every value bit for bit.
"""

from __future__ import annotations

import math
from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np

from .errors import ParseError
from .genetics import GeneticModel
from .kernels import FLAG_NAMES

HEADER = ("snp_id", "n", "logml_null", "logml_G", "logml_A", "logml_D", "logml_R", "logml_C",
          "log_bf_max", "best_model", "est_0", "est_1", "est_2", "min_p", "freq_best", "flags")

# (column name, GeneticModel) for the six evidence columns, in file order.
_LOGML_COLUMNS = (
    ("logml_null", GeneticModel.NULL),
    ("logml_G", GeneticModel.GENOTYPIC),
    ("logml_A", GeneticModel.ADDITIVE),
    ("logml_D", GeneticModel.DOMINANT),
    ("logml_R", GeneticModel.RECESSIVE),
    ("logml_C", GeneticModel.CODOMINANT),
)

_FLAG_BY_NAME = {name: bit for bit, name in FLAG_NAMES}


def flags_to_names(bits: int) -> tuple[str, ...]:
    return tuple(name for bit, name in FLAG_NAMES if bits & bit)


def names_to_flags(names) -> int:
    bits = 0
    for name in names:
        try:
            bits |= _FLAG_BY_NAME[name]
        except KeyError:
            raise ParseError(f"unknown flag {name!r}", token=name) from None
    return bits


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class ScanRecord:
    """One SNP's row of a scan."""

    snp_id: str
    n_used: int
    log_ml: dict
    log_bf_max: float
    best_model: GeneticModel
    estimates: tuple
    min_p: float | None
    freq_best: GeneticModel | None
    flags: tuple


@dataclass(eq=False)
class ScanResult:
    """Columnar scan output for ``m`` SNPs.

    ``logml`` and ``pvalues`` columns are indexed by :class:`GeneticModel`
    value and by :data:`bayespoly.freq.P_KEYS` order respectively. ``min_p``,
    ``freq_best`` and ``pvalues`` are ``None`` when the least-squares baseline
    did not run.
    """

    snp_ids: list
    n: np.ndarray
    logml: np.ndarray
    log_bf_max: np.ndarray
    best_model: np.ndarray
    est: np.ndarray
    flags: np.ndarray
    min_p: np.ndarray | None = None
    freq_best: np.ndarray | None = None
    pvalues: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.snp_ids)

    @property
    def has_freq(self) -> bool:
        return self.min_p is not None

    def record(self, i: int) -> ScanRecord:
        best = GeneticModel(int(self.best_model[i]))
        k = 3 if best is GeneticModel.GENOTYPIC else 2
        fb = None
        if self.has_freq and self.freq_best[i] >= 0:
            fb = GeneticModel(int(self.freq_best[i]))
        return ScanRecord(
            snp_id=self.snp_ids[i],
            n_used=int(self.n[i]),
            log_ml={GeneticModel(j): float(self.logml[i, j]) for j in range(6)},
            log_bf_max=float(self.log_bf_max[i]),
            best_model=best,
            estimates=tuple(float(v) for v in self.est[i, :k]),
            min_p=float(self.min_p[i]) if self.has_freq else None,
            freq_best=fb,
            flags=flags_to_names(int(self.flags[i])),
        )

    def records(self) -> Iterator[ScanRecord]:
        for i in range(len(self)):
            yield self.record(i)

    @classmethod
    def concat(cls, parts) -> ScanResult:
        parts = list(parts)
        if not parts:
            return cls.empty()
        has_freq = parts[0].has_freq

        def cat(name):
            return np.concatenate([getattr(p, name) for p in parts]) if has_freq or name not in (
                "min_p", "freq_best", "pvalues") else None

        ids = [s for p in parts for s in p.snp_ids]
        return cls(ids, cat("n"), cat("logml"), cat("log_bf_max"), cat("best_model"), cat("est"),
                   cat("flags"), cat("min_p"), cat("freq_best"), cat("pvalues"))

    @classmethod
    def empty(cls, has_freq: bool = False) -> ScanResult:
        f = np.empty(0)
        return cls([], np.empty(0, np.int64), np.empty((0, 6)), f, np.empty(0, np.int8),
                   np.empty((0, 3)), np.empty(0, np.uint8),
                   f.copy() if has_freq else None,
                   np.empty(0, np.int8) if has_freq else None,
                   np.empty((0, 6)) if has_freq else None)


def _row_tokens(rec: ScanRecord, with_freq: bool) -> list[str]:
    est = list(rec.estimates) + [math.nan] * (3 - len(rec.estimates))
    row = [rec.snp_id, str(rec.n_used)]
    row += [fmt_float(rec.log_ml[m]) for _, m in _LOGML_COLUMNS]
    row += [fmt_float(rec.log_bf_max), rec.best_model.short]
    row += [fmt_float(est[0]), fmt_float(est[1])]
    row.append(fmt_float(est[2]) if len(rec.estimates) == 3 else "")
    if with_freq and rec.min_p is not None:
        row.append(fmt_float(rec.min_p))
        row.append(rec.freq_best.short if rec.freq_best is not None else "")
    else:
        row += ["", ""]
    row.append(",".join(rec.flags))
    return row


def format_rows(result: ScanResult) -> str:
    """TSV body lines (no header) for every SNP in ``result``."""
    lines = []
    for rec in result.records():
        lines.append("\t".join(_row_tokens(rec, result.has_freq)))
    return "".join(line + "\n" for line in lines)


class ResultWriter:
    """Incremental results writer; call :meth:`write` per block, in SNP order."""

    def __init__(self, handle):
        self._fh = handle
        self._fh.write("\t".join(HEADER) + "\n")
        self.rows = 0

    def write(self, result: ScanResult) -> None:
        self._fh.write(format_rows(result))
        self.rows += len(result)


def write_results(records, path) -> None:
    """Write a :class:`ScanResult` (or iterable of :class:`ScanRecord`) as TSV."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(HEADER) + "\n")
        if isinstance(records, ScanResult):
            fh.write(format_rows(records))
        else:
            fh.writelines("\t".join(_row_tokens(rec, True)) + "\n" for rec in records)


def _parse_float(tok: str, line: int, col: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise ParseError(f"expected a number, got {tok!r}", line, col, tok) from None


def read_results(path) -> list[ScanRecord]:
    """Parse a results TSV back into :class:`ScanRecord` objects."""
    out = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if tuple(header) != HEADER:
            raise ParseError("results header does not match the expected columns", 1)
        for lineno, raw in enumerate(fh, start=2):
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            f = line.split("\t")
            if len(f) != len(HEADER):
                raise ParseError(f"expected {len(HEADER)} fields, got {len(f)}", lineno)
            col = {name: i for i, name in enumerate(HEADER)}
            log_ml = {m: _parse_float(f[col[name]], lineno, col[name] + 1) for name, m in _LOGML_COLUMNS}
            best = GeneticModel.from_short(f[col["best_model"]])
            est = [_parse_float(f[col["est_0"]], lineno, 11), _parse_float(f[col["est_1"]], lineno, 12)]
            if f[col["est_2"]] != "":
                est.append(_parse_float(f[col["est_2"]], lineno, 13))
            min_p = None if f[col["min_p"]] == "" else _parse_float(f[col["min_p"]], lineno, 14)
            fb = f[col["freq_best"]]
            flags = tuple(x for x in f[col["flags"]].split(",") if x)
            names_to_flags(flags)
            out.append(ScanRecord(
                snp_id=f[0],
                n_used=int(f[1]),
                log_ml=log_ml,
                log_bf_max=_parse_float(f[col["log_bf_max"]], lineno, 9),
                best_model=best,
                estimates=tuple(est),
                min_p=min_p,
                freq_best=GeneticModel.from_short(fb) if fb else None,
                flags=flags,
            ))
    return out
