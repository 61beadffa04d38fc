"""Text formats: model files, sample files, and delimited vote matrices.

Model file::

    p 4
    0 1 0.5
    2 3 -0.25

Samples file (header optional on input, always written)::

    # n=2 p=3
    +1 -1 +1
    -1 -1 +1
"""

from __future__ import annotations

import csv
import os
import re
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import CouplingMatrix, Dataset


class FormatError(ValueError):
    """Malformed input file; the message names the file and line."""


MISSING = "missing"
_HEADER_RE = re.compile(r"#\s*n\s*=\s*(\d+)\s+p\s*=\s*(\d+)\s*$")
_SPIN_TOKENS = {"+1": 1, "1": 1, "-1": -1}


def atomic_write(path, data: str | bytes) -> None:
    """Write via a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_model(J: CouplingMatrix) -> str:
    lines = [f"p {J.p}"]
    lines += [f"{i} {j} {v:.17g}" for i, j, v in J.edges()]
    return "\n".join(lines) + "\n"


def write_model(path, J: CouplingMatrix) -> None:
    atomic_write(path, format_model(J))


def read_model(path) -> CouplingMatrix:
    p = None
    edges = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if p is None:
                if len(parts) != 2 or parts[0] != "p" or not parts[1].isdigit():
                    raise FormatError(f"{path}:{lineno}: expected header 'p <int>', got {line!r}")
                p = int(parts[1])
                continue
            if len(parts) != 3:
                raise FormatError(f"{path}:{lineno}: expected 'i j value', got {line!r}")
            try:
                i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError:
                raise FormatError(f"{path}:{lineno}: cannot parse edge {line!r}") from None
            if not (0 <= i < j < p):
                raise FormatError(f"{path}:{lineno}: need 0 <= i < j < {p}, got {i} {j}")
            if (i, j) in edges:
                raise FormatError(f"{path}:{lineno}: duplicate edge {i} {j}")
            edges[i, j] = v
    if p is None:
        raise FormatError(f"{path}: missing 'p <int>' header")
    return CouplingMatrix.from_edges(p, [(i, j, v) for (i, j), v in edges.items()])


def format_samples(data: Dataset) -> str:
    tok = np.where(data.spins > 0, "+1", "-1")
    body = "\n".join(" ".join(row) for row in tok)
    return f"# n={data.n} p={data.p}\n" + (body + "\n" if data.n else "")


def write_samples(path, data: Dataset) -> None:
    atomic_write(path, format_samples(data))


def read_samples(path) -> Dataset:
    header = None
    rows = []
    width = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                m = _HEADER_RE.match(line)
                if m and header is None and not rows:
                    header = (int(m.group(1)), int(m.group(2)))
                continue
            toks = line.split()
            if width is None:
                width = len(toks)
            elif len(toks) != width:
                raise FormatError(f"{path}:{lineno}: row has {len(toks)} spins, expected {width}")
            try:
                rows.append([_SPIN_TOKENS[t] for t in toks])
            except KeyError as exc:
                raise FormatError(
                    f"{path}:{lineno}: invalid spin token {exc.args[0]!r} (expected +1 or -1)") from None
    spins = np.array(rows, dtype=np.int8).reshape(len(rows), width or (header[1] if header else 0))
    if header is not None and spins.shape != header:
        raise FormatError(f"{path}: header says n={header[0]} p={header[1]}, "
                          f"found n={spins.shape[0]} p={spins.shape[1]}")
    return Dataset(spins)


_CONFIG_KEYS = {"d_max": int, "sigma_const": float, "s_max": int, "tau": float, "lambda": float,
                "gamma": float, "cap": float, "threads": int, "seed": int}


def read_slide_config(path) -> dict:
    """Parse a ``key = value`` reconstruction config into SlideConfig keyword arguments."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if not sep or key not in _CONFIG_KEYS:
                raise FormatError(f"{path}:{lineno}: expected one of {sorted(_CONFIG_KEYS)} = value, got {line!r}")
            try:
                out["lam" if key == "lambda" else key] = _CONFIG_KEYS[key](value.strip())
            except ValueError:
                raise FormatError(f"{path}:{lineno}: bad value for {key}: {value.strip()!r}") from None
    return out


@dataclass(frozen=True)
class VoteConfig:
    """How to turn a delimited vote table into spins.

    ``token_map`` sends each cell token to +1, -1 or ``MISSING``; missing
    cells become ``missing_value`` (-1: a missing vote counts as Nay).
    """

    token_map: dict = field(default_factory=lambda: {"Yea": 1, "Nay": -1})
    delimiter: str = ","
    missing_value: int = -1
    header: bool = False


_DELIMITER_NAMES = {"comma": ",", "tab": "\t", "\\t": "\t", "space": " ",
                    "semicolon": ";", "pipe": "|"}


def _token_value(value: str, where: str):
    v = value.strip().lower()
    if v in ("+1", "1", "yea", "yes"):
        return 1
    if v in ("-1", "nay", "no"):
        return -1
    if v == MISSING:
        return MISSING
    raise FormatError(f"{where}: token value must be +1, -1 or missing, got {value!r}")


def read_vote_config(path) -> VoteConfig:
    """Parse a ``key = value`` vote config.

    Recognised keys: ``delimiter`` (a character or comma/tab/space/semicolon/
    pipe), ``missing`` (+1 or -1), ``header`` (true/false) and one
    ``token.<TOKEN> = +1|-1|missing`` line per cell token.
    """
    tokens = {}
    kw = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            if "=" not in line:
                raise FormatError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            key = key.strip()
            where = f"{path}:{lineno}"
            if key.startswith("token."):
                tokens[key[len("token."):]] = _token_value(value, where)
            elif key == "delimiter":
                raw_val = value.strip() or value[:1]
                kw["delimiter"] = _DELIMITER_NAMES.get(raw_val.lower(), raw_val)
                if len(kw["delimiter"]) != 1:
                    raise FormatError(f"{where}: delimiter must be one character, got {value!r}")
            elif key == "missing":
                mv = _token_value(value, where)
                if mv == MISSING:
                    raise FormatError(f"{where}: missing must map to +1 or -1")
                kw["missing_value"] = mv
            elif key == "header":
                kw["header"] = value.strip().lower() in ("1", "true", "yes")
            else:
                raise FormatError(f"{where}: unknown key {key!r}")
    if tokens:
        kw["token_map"] = tokens
    return VoteConfig(**kw)


def ingest_vote_matrix(path, token_map=None, missing_policy: int = -1,
                       delimiter: str = ",", header: bool = False) -> Dataset:
    """Read a rectangular vote table; rows become samples, columns variables."""
    if missing_policy not in (1, -1):
        raise ValueError("missing_policy must be +1 or -1")
    token_map = {"Yea": 1, "Nay": -1} if token_map is None else token_map
    rows = []
    width = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter, skipinitialspace=delimiter != " ")
        for rowno, cells in enumerate(reader, 1):
            if header and rowno == 1:
                continue
            if not cells or all(not c.strip() for c in cells):
                continue
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise FormatError(f"{path}: row {rowno} has {len(cells)} columns, expected {width}")
            row = []
            for col, cell in enumerate(cells, 1):
                tok = cell.strip()
                if tok not in token_map:
                    raise FormatError(f"{path}: unknown token {tok!r} at row {rowno}, column {col}")
                v = token_map[tok]
                row.append(missing_policy if v == MISSING or v is None else int(v))
            rows.append(row)
    return Dataset(np.array(rows, dtype=np.int8).reshape(len(rows), width or 0))


def ingest_with_config(path, config: VoteConfig) -> Dataset:
    return ingest_vote_matrix(path, config.token_map, config.missing_value,
                              config.delimiter, config.header)
