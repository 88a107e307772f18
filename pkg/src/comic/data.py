"""Datasets: standardization, synthetic pair generators, file formats, fetching.

Pair files are plain text, one observation per line, whitespace-separated
decimal columns. A dataset directory couples pair files with a pairmeta.txt
whose rows read: id, cause-start, cause-end, effect-start, effect-end,
weight. Generated datasets add a labels.csv sidecar (id, direction).
"""

from __future__ import annotations

import http.client
import math
import os
import tempfile
import urllib.error
import urllib.request
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import ArgumentError, FetchError, NumericError, ParseError
from .rng import RngStream

X_CAUSES_Y = "x_causes_y"
Y_CAUSES_X = "y_causes_x"
UNDECIDED = "undecided"

FAMILIES = ("AN", "AN-s", "LS", "LS-s", "MN-U")

GENERATOR_VERSION = "1"

TUEBINGEN_URL = "https://webdav.tuebingen.mpg.de/cause-effect/"


@dataclass
class PairDataset:
    """N paired scalar observations plus benchmark bookkeeping."""

    x: np.ndarray
    y: np.ndarray
    weight: float = 1.0
    label: str | None = None
    id: str = ""

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.x.ndim != 1 or self.y.ndim != 1 or self.x.size != self.y.size:
            raise ArgumentError("x and y must be 1-D vectors of equal length")
        if self.x.size < 2:
            raise ArgumentError("a pair needs at least 2 observations")
        if self.weight <= 0:
            raise ArgumentError("weight must be positive")
        if self.label not in (None, X_CAUSES_Y, Y_CAUSES_X):
            raise ArgumentError(f"unknown label {self.label!r}")

    @property
    def n(self) -> int:
        return self.x.size


def swap_pair(pair: PairDataset) -> PairDataset:
    """Exchange the two columns, mirroring the label."""
    mirrored = {X_CAUSES_Y: Y_CAUSES_X, Y_CAUSES_X: X_CAUSES_Y, None: None}[pair.label]
    return PairDataset(pair.y.copy(), pair.x.copy(), pair.weight, mirrored, pair.id)


def _sqrt_fraction(f: Fraction) -> float:
    # deterministic: 50-digit decimal sqrt, then one rounding to binary
    with localcontext() as ctx:
        ctx.prec = 50
        root = (Decimal(f.numerator) / Decimal(f.denominator)).sqrt()
    return float(root)


def standardize(v: np.ndarray) -> tuple[np.ndarray, float, float]:
    """Center and scale to population std 1; returns (vector, mean, std).

    Mean and variance are accumulated in exact rational arithmetic and each
    output entry is rounded once from the exact ratio d_i / sqrt(var). The
    result is therefore a deterministic function of the exact input values,
    and affine maps that introduce no per-element rounding (any power-of-two
    rescaling, exactly representable shifts) change nothing downstream.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise ArgumentError("standardize needs a 1-D vector with at least 2 entries")
    if not np.isfinite(v).all():
        raise ArgumentError("standardize requires finite values")
    exact = [Fraction(t) for t in v.tolist()]
    n = len(exact)
    mean = sum(exact) / n
    devs = [t - mean for t in exact]
    var = sum(d * d for d in devs) / n
    if var == 0:
        raise ArgumentError("degenerate variable: zero variance")
    out = np.empty(n)
    for i, d in enumerate(devs):
        if d == 0:
            out[i] = 0.0
        else:
            out[i] = math.copysign(_sqrt_fraction(d * d / var), float(d))
    return out, float(mean), _sqrt_fraction(var)


@dataclass
class GeneratorSpec:
    family: str
    n_pairs: int
    n_samples: int
    seed: int = 0

    def __post_init__(self):
        self.family = normalize_family(self.family)
        if self.n_pairs < 1:
            raise ArgumentError("n_pairs must be >= 1")
        if self.n_samples < 2:
            raise ArgumentError("n_samples must be >= 2")


def normalize_family(name: str) -> str:
    canon = name.strip().upper().replace("_", "-")
    table = {fam.upper(): fam for fam in FAMILIES}
    if canon not in table:
        raise ArgumentError(f"unknown family {name!r}; choose from {', '.join(FAMILIES)}")
    return table[canon]


def _gp_draw(x: np.ndarray, stream: RngStream) -> np.ndarray:
    """Sample a squared-exponential GP (lengthscale 1, signal std 1) at x."""
    diff = x[:, None] - x[None, :]
    k = np.exp(-0.5 * diff * diff)
    eye = np.eye(x.size)
    jitter = 1e-8
    while True:
        try:
            chol = np.linalg.cholesky(k + jitter * eye)
            break
        except np.linalg.LinAlgError:
            jitter *= 10.0
            if jitter > 1e-4:
                raise NumericError(
                    "GP kernel not positive definite even with jitter 1e-4"
                ) from None
    z = stream.generator().standard_normal(x.size)
    return chol @ z


def _sigmoid_draw(stream: RngStream) -> Callable[[np.ndarray], np.ndarray]:
    """Random injective sigmoid-type function t -> a*b*(t+c)/(1+|b*(t+c)|)."""
    gen = stream.generator()
    a = gen.uniform(1.0, 3.0) * (1.0 if gen.random() < 0.5 else -1.0)
    b = gen.uniform(0.5, 2.0)
    c = gen.uniform(-2.0, 2.0)

    def s(t: np.ndarray) -> np.ndarray:
        u = b * (t + c)
        return a * u / (1.0 + np.abs(u))

    return s


def generate_pair(
    spec: GeneratorSpec, pair_index: int, stream: RngStream | None = None
) -> PairDataset:
    """One synthetic cause-effect pair; deterministic in (spec, pair_index)."""
    if not 0 <= pair_index < spec.n_pairs:
        raise ArgumentError(f"pair_index {pair_index} outside [0, {spec.n_pairs})")
    if stream is None:
        stream = RngStream(spec.seed).child("generate", spec.family, pair_index)
    gen = stream.child("noise").generator()
    x = stream.child("x").generator().standard_normal(spec.n_samples)
    fam = spec.family

    if fam in ("AN", "LS"):
        f = _gp_draw(x, stream.child("f"))
    else:
        f = _sigmoid_draw(stream.child("f"))(x)

    if fam == "MN-U":
        noise = gen.uniform(0.5, 1.5, size=spec.n_samples)
        y = f * noise
    else:
        sigma = stream.child("sigma").generator().uniform(0.2, 0.6)
        noise = sigma * gen.standard_normal(spec.n_samples)
        if fam in ("LS", "LS-s"):
            g = _gp_draw(x, stream.child("g")) if fam == "LS" \
                else _sigmoid_draw(stream.child("g"))(x)
            y = f + (np.abs(g) + 0.3) * noise
        else:
            y = f + noise

    return PairDataset(x, y, 1.0, X_CAUSES_Y, id=f"{fam}-{pair_index:04d}")


def generate_dataset(spec: GeneratorSpec) -> list[PairDataset]:
    """All pairs of a spec, with every second pair stored effect-first.

    The alternating swap keeps both ground-truth directions present, which
    the rank-based metrics require; generate_pair itself always returns the
    cause in the first column.
    """
    pairs = []
    for i in range(spec.n_pairs):
        pair = generate_pair(spec, i)
        pairs.append(swap_pair(pair) if i % 2 == 1 else pair)
    return pairs


def _parse_matrix(lines: Sequence[str], path: str, skip_header: bool = False):
    rows = []
    ncols = None
    start = 2 if skip_header else 1
    for lineno, line in enumerate(lines, start=1):
        if skip_header and lineno == 1:
            continue
        if not line.strip():
            continue
        tokens = line.split()
        try:
            values = [float(t) for t in tokens]
        except ValueError:
            raise ParseError(f"{path}: non-numeric token in {tokens}", lineno) from None
        if any(not math.isfinite(t) for t in values):
            raise ParseError(f"{path}: non-finite value", lineno)
        if ncols is None:
            ncols = len(values)
        elif len(values) != ncols:
            raise ParseError(
                f"{path}: expected {ncols} columns, found {len(values)}", lineno
            )
        rows.append(values)
    if ncols is None or len(rows) < 2:
        raise ParseError(f"{path}: fewer than 2 data rows (first data line {start})")
    return np.asarray(rows), ncols


def load_pair_file(
    path: str | Path,
    skip_header: bool = False,
    cause_col: int | None = None,
    effect_col: int | None = None,
    weight: float = 1.0,
    pair_id: str | None = None,
) -> PairDataset:
    """Read one pair file; columns are selectable for multi-column files.

    Without explicit 1-based cause/effect columns the file must have exactly
    two columns; anything wider is rejected as multidimensional.
    """
    path = Path(path)
    lines = path.read_text().splitlines()
    data, ncols = _parse_matrix(lines, path.name, skip_header=skip_header)
    if cause_col is None and effect_col is None:
        if ncols != 2:
            raise ArgumentError(
                f"{path.name}: {ncols} columns but no column selection; "
                "pair is multidimensional"
            )
        first, second, label = 1, 2, None
    else:
        if cause_col is None or effect_col is None or cause_col == effect_col:
            raise ArgumentError("cause and effect columns must differ and both be given")
        if not (1 <= cause_col <= ncols and 1 <= effect_col <= ncols):
            raise ParseError(
                f"{path.name}: meta names columns {cause_col}/{effect_col} "
                f"but file has {ncols}"
            )
        first, second = sorted((cause_col, effect_col))
        label = X_CAUSES_Y if first == cause_col else Y_CAUSES_X
    return PairDataset(
        data[:, first - 1],
        data[:, second - 1],
        weight=weight,
        label=label,
        id=pair_id if pair_id is not None else path.stem,
    )


def write_pair_file(path: str | Path, pair: PairDataset) -> None:
    lines = [f"{a:.17g} {b:.17g}" for a, b in zip(pair.x, pair.y)]
    Path(path).write_text("\n".join(lines) + "\n")


@dataclass
class MetaRow:
    pair_id: str
    cause_first: int
    cause_last: int
    effect_first: int
    effect_last: int
    weight: float

    @property
    def univariate(self) -> bool:
        return self.cause_first == self.cause_last and self.effect_first == self.effect_last


def parse_pairmeta(path: str | Path) -> list[MetaRow]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"missing meta file {path}")
    rows = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        tokens = line.split()
        if len(tokens) != 6:
            raise ParseError(f"{path.name}: expected 6 fields, found {len(tokens)}", lineno)
        try:
            cols = [int(float(t)) for t in tokens[1:5]]
            weight = float(tokens[5])
        except ValueError:
            raise ParseError(f"{path.name}: malformed meta row {line!r}", lineno) from None
        if weight <= 0:
            raise ParseError(f"{path.name}: non-positive weight", lineno)
        rows.append(MetaRow(tokens[0], *cols, weight))
    if not rows:
        raise ParseError(f"{path.name}: empty meta file")
    return rows


def _meta_pair_path(directory: Path, pair_id: str) -> Path:
    candidate = directory / f"pair{pair_id}.txt"
    if candidate.exists():
        return candidate
    return directory / f"{pair_id}.txt"


def load_tuebingen(directory: str | Path) -> list[PairDataset]:
    """Load every univariate pair of a pair/meta directory.

    Keeps the stored column order; the label records which column the meta
    designates as the cause. Pairs whose cause or effect spans more than
    one column are skipped. On the standard cause-effect corpus this
    retains 99 of 108 pairs.
    """
    directory = Path(directory)
    pairs = []
    for row in parse_pairmeta(directory / "pairmeta.txt"):
        if not row.univariate:
            continue
        path = _meta_pair_path(directory, row.pair_id)
        if not path.exists():
            raise FileNotFoundError(f"pair {row.pair_id}: data file {path} missing")
        try:
            pair = load_pair_file(
                path,
                cause_col=row.cause_first,
                effect_col=row.effect_first,
                weight=row.weight,
                pair_id=f"pair{row.pair_id}" if not row.pair_id.startswith("pair") else row.pair_id,
            )
        except ParseError as e:
            raise ParseError(f"pair {row.pair_id}: {e}") from None
        pairs.append(pair)
    return pairs


def write_dataset(directory: str | Path, pairs: Sequence[PairDataset]) -> list[str]:
    """Write pair files, pairmeta.txt and labels.csv; returns file names."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    meta_lines = []
    label_lines = ["id,direction"]
    names = []
    for i, pair in enumerate(pairs, start=1):
        pair_id = f"{i:04d}"
        name = f"pair{pair_id}.txt"
        write_pair_file(directory / name, pair)
        if pair.label == Y_CAUSES_X:
            cause, effect = 2, 1
        else:
            cause, effect = 1, 2
        meta_lines.append(f"{pair_id} {cause} {cause} {effect} {effect} {pair.weight:.17g}")
        label_lines.append(f"pair{pair_id},{pair.label or ''}")
        names.append(name)
    (directory / "pairmeta.txt").write_text("\n".join(meta_lines) + "\n")
    (directory / "labels.csv").write_text("\n".join(label_lines) + "\n")
    return names


def _download(url: str, retries: int, log: Callable[[str], None]) -> bytes:
    last_error: Exception | None = None
    for attempt in range(1, retries + 1):
        try:
            with urllib.request.urlopen(url, timeout=60) as response:
                return response.read()
        except (urllib.error.URLError, http.client.HTTPException, OSError, TimeoutError) as e:
            last_error = e
            log(f"attempt {attempt}/{retries} failed for {url}: {e}")
    raise FetchError(f"could not fetch {url} after {retries} attempts: {last_error}")


def _write_atomic(path: Path, content: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fetch_tuebingen(
    url: str = TUEBINGEN_URL,
    out_dir: str | Path = "tuebingen",
    retries: int = 3,
    log: Callable[[str], None] = lambda msg: None,
) -> int:
    """Download the cause-effect pair corpus; returns count of new files.

    Existing files are kept (idempotent); every download is parsed before
    an atomic write, so no partial or corrupt file ever persists.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    base = url if url.endswith("/") else url + "/"
    written = 0

    meta_path = out / "pairmeta.txt"
    if not meta_path.exists():
        content = _download(base + "pairmeta.txt", retries, log)
        text = content.decode("utf-8", errors="strict")
        fd, tmp = tempfile.mkstemp(dir=out, prefix="pairmeta.")
        os.close(fd)
        Path(tmp).write_text(text)
        try:
            parse_pairmeta(tmp)
        except ParseError:
            os.unlink(tmp)
            raise
        os.replace(tmp, meta_path)
        written += 1
        log("wrote pairmeta.txt")

    for row in parse_pairmeta(meta_path):
        name = f"pair{row.pair_id}.txt"
        target = out / name
        if target.exists():
            continue
        content = _download(base + name, retries, log)
        text = content.decode("utf-8", errors="replace")
        try:
            _parse_matrix(text.splitlines(), name)
        except ParseError:
            log(f"discarding corrupt download {name}")
            raise
        _write_atomic(target, text.encode("utf-8"))
        written += 1
        log(f"wrote {name}")
    return written
