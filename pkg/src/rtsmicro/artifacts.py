"""Run manifest and the CSV, JSON, JSON Lines and SVG files a run leaves behind."""

# Needed so classes can make self references to their type
from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
from collections.abc import Iterable, Mapping, Sequence
from html import escape
from pathlib import Path
from typing import Any

from .config import RunConfig
from .errors import ArtifactError, ConfigError
from .genome import Genome
from .logger import get_logger
from .nsga2 import GenerationRecord
from .pareto import ParetoPoint
from .scenarios import Scenario
from .sim import TraceRecord

logger = get_logger(__name__)

MANIFEST_FILENAME = "manifest.json"
MANIFEST_PREFIX = "# manifest: "

FRONT_COLUMNS = ["generation", "individual_index", "o1", "o2", "genome_bits"]
POPULATION_COLUMNS = FRONT_COLUMNS + ["rank", "crowding"]


def _canonical(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclasses.dataclass(frozen=True)
class RunManifest:
    """
    Configuration snapshot every artifact of a run refers to.

    Args:
        config (RunConfig): configuration the run used.
        opponent (str): "baseline", or the 226-bit genome driving the enemy side.
        out_dir (str): output directory.
        hash (str): sha256 of the canonical JSON of config and opponent.
    """

    config: RunConfig
    opponent: str
    out_dir: str
    hash: str

    @classmethod
    def create(cls, config: RunConfig, out_dir: str | Path, opponent: str = "baseline") -> RunManifest:
        """Build a manifest, hashing the configuration content."""
        digest = hashlib.sha256(_canonical({"config": config.asdict(), "opponent": opponent}).encode("utf-8"))
        return cls(config=config, opponent=opponent, out_dir=str(out_dir), hash=digest.hexdigest())

    @property
    def seeds(self) -> tuple[int, ...]:
        return self.config.seeds

    def asdict(self) -> dict[str, Any]:
        return {
            "hash": self.hash,
            "opponent": self.opponent,
            "out_dir": self.out_dir,
            "config": self.config.asdict(),
        }

    @classmethod
    def fromdict(cls, input: dict[str, Any]) -> RunManifest:
        """
        Create a RunManifest from a dictionary, checking the stored hash.

        Raises:
            ConfigError: when the dictionary is not valid or the hash does not match.
        """
        for k in ["hash", "opponent", "out_dir", "config"]:
            if k not in input:
                raise ConfigError(f"manifest is missing key {k}")
        manifest = cls.create(RunConfig.fromdict(input["config"]), input["out_dir"], input["opponent"])
        if manifest.hash != input["hash"]:
            raise ConfigError("manifest hash does not match its configuration")
        return manifest


def write_manifest(manifest: RunManifest) -> Path:
    path = Path(manifest.out_dir) / MANIFEST_FILENAME
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest.asdict(), indent=2) + "\n", encoding="utf-8")
    logger.info(f"wrote {path}")
    return path


def read_manifest(run_dir: str | Path) -> RunManifest:
    """
    Load the manifest of a run directory.

    Raises:
        FileNotFoundError: if there is no manifest.
        ConfigError: if the manifest is malformed.
    """
    path = Path(run_dir) / MANIFEST_FILENAME
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"manifest '{path}' is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"manifest '{path}' must contain a JSON object")
    return RunManifest.fromdict(data)


# ------------------------------------------------------------
# CSV
# ------------------------------------------------------------


def _cell(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: Path, manifest_hash: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write a CSV file whose first line names the manifest."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, mode="w", encoding="utf-8", newline="") as fp:
        fp.write(f"{MANIFEST_PREFIX}{manifest_hash}\n")
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    logger.debug(f"wrote {path}")
    return path


def read_csv(path: Path) -> tuple[str, list[dict[str, str]]]:
    """
    Read a CSV written by write_csv.

    Returns:
        tuple[str, list[dict[str, str]]]: manifest hash and rows.

    Raises:
        ArtifactError: if the manifest line is missing.
    """
    with open(path, mode="r", encoding="utf-8", newline="") as fp:
        first = fp.readline()
        if not first.startswith(MANIFEST_PREFIX):
            raise ArtifactError(f"'{path}' does not start with a manifest line")
        rows = list(csv.DictReader(line for line in fp if not line.startswith("#")))
    return first[len(MANIFEST_PREFIX) :].strip(), rows


def front_rows(record: GenerationRecord, *, population: bool = False) -> list[list[Any]]:
    """Rows of a generation's front (or whole population) listing, in population order."""
    rows: list[list[Any]] = []
    for index, ind in enumerate(record.population):
        if not population and ind.rank != 0:
            continue
        assert ind.objectives is not None
        row: list[Any] = [record.generation, index, ind.objectives.o1, ind.objectives.o2, str(ind.genome)]
        if population:
            row += [ind.rank, ind.crowding]
        rows.append(row)
    return rows


def front_path(run_dir: Path, seed: int, generation: int) -> Path:
    return run_dir / f"run{seed}" / f"gen{generation}_front.csv"


def read_front(run_dir: Path, seed: int, generation: int) -> list[ParetoPoint]:
    """
    Points of one run's front at one generation.

    Raises:
        ArtifactError: if the file is missing or a row does not parse.
    """
    path = front_path(run_dir, seed, generation)
    if not path.exists():
        raise ArtifactError(f"run {seed} has no front file for generation {generation} ({path})")
    _, rows = read_csv(path)
    try:
        return [
            ParetoPoint(
                o1=float(r["o1"]),
                o2=float(r["o2"]),
                genome=r["genome_bits"],
                run=seed,
                generation=int(r["generation"]),
                index=int(r["individual_index"]),
            )
            for r in rows
        ]
    except (KeyError, TypeError, ValueError) as e:
        raise ArtifactError(f"unreadable front file '{path}': {e}") from e


# ------------------------------------------------------------
# Genomes, scenarios, traces
# ------------------------------------------------------------


def write_genomes(path: Path, genomes: Iterable[Genome]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(f"{g}\n" for g in genomes), encoding="utf-8")
    return path


def read_genome_arg(value: str) -> Genome:
    """
    A genome given on the command line: the bit string itself, or a file holding one.

    Only the first non-empty line of a file is used.
    """
    text = value.strip()
    if text and set(text) <= {"0", "1"}:
        return Genome.fromstring(text)
    lines = [line.strip() for line in Path(value).read_text(encoding="utf-8").splitlines() if line.strip()]
    if not lines:
        raise ArtifactError(f"genome file '{value}' is empty")
    return Genome.fromstring(lines[0])


def write_scenario(path: Path, scenario: Scenario) -> Path:
    """Scenario as JSON with one placement per line."""
    path.parent.mkdir(parents=True, exist_ok=True)
    data = scenario.asdict()
    lines = [json.dumps(p) for p in data["placements"]]
    text = (
        "{\n"
        f'  "label": {json.dumps(data["label"])},\n'
        f'  "seed": {data["seed"]},\n'
        '  "placements": [\n    ' + ",\n    ".join(lines) + "\n  ]\n}\n"
    )
    path.write_text(text, encoding="utf-8")
    return path


def read_scenario(path: Path) -> Scenario:
    """
    Load a scenario file.

    Raises:
        ArtifactError: if the file is not a valid scenario.
    """
    try:
        return Scenario.fromdict(json.loads(path.read_text(encoding="utf-8")))
    except (json.JSONDecodeError, ValueError) as e:
        raise ArtifactError(f"'{path}' is not a valid scenario file: {e}") from e


def write_trace(path: Path, manifest_hash: str, label: str, dt: float, records: Iterable[TraceRecord]) -> Path:
    """JSON Lines replay: a header object, then one object per unit per tick."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, mode="w", encoding="utf-8", newline="\n") as fp:
        fp.write(json.dumps({"manifest": manifest_hash, "scenario": label, "dt": dt}) + "\n")
        for r in records:
            fp.write(json.dumps(dataclasses.asdict(r)) + "\n")
    logger.info(f"wrote {path}")
    return path


# ------------------------------------------------------------
# SVG
# ------------------------------------------------------------

_SIZE = 480
_MARGIN = 48
_PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22"]


def _xy(o1: float, o2: float) -> tuple[float, float]:
    span = _SIZE - 2 * _MARGIN
    return _MARGIN + o1 * span, _SIZE - _MARGIN - o2 * span


def _axes(title: str) -> list[str]:
    x0, y0 = _xy(0.0, 0.0)
    x1, y1 = _xy(1.0, 1.0)
    parts = [
        f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" fill="none" stroke="black"/>',
        f'<text x="{_SIZE / 2}" y="{_MARGIN / 2}" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<text x="{_SIZE / 2}" y="{_SIZE - 10}" text-anchor="middle" font-size="12">o1: damage done</text>',
        f'<text x="14" y="{_SIZE / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {_SIZE / 2})">o2: 1 - damage taken</text>',
    ]
    for tick in (0.0, 0.5, 1.0):
        tx, _ = _xy(tick, 0.0)
        _, ty = _xy(0.0, tick)
        parts.append(f'<text x="{tx}" y="{y0 + 14}" text-anchor="middle" font-size="10">{tick:g}</text>')
        parts.append(f'<text x="{x0 - 6}" y="{ty + 4}" text-anchor="end" font-size="10">{tick:g}</text>')
    return parts


def _svg(path: Path, manifest_hash: str, body: list[str]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    text = "\n".join(
        [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SIZE}" height="{_SIZE}" '
            f'viewBox="0 0 {_SIZE} {_SIZE}">',
            f"<!-- manifest: {manifest_hash} -->",
            *body,
            "</svg>",
        ]
    )
    path.write_text(text + "\n", encoding="utf-8")
    logger.info(f"wrote {path}")
    return path


def write_front_svg(
    path: Path, manifest_hash: str, title: str, series: Mapping[str, Sequence[tuple[float, float]]]
) -> Path:
    """Scatter plot of labelled point sets on [0, 1] x [0, 1], o1 horizontal."""
    body = _axes(title)
    for k, (label, points) in enumerate(series.items()):
        color = _PALETTE[k % len(_PALETTE)]
        for o1, o2 in points:
            x, y = _xy(o1, o2)
            body.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{color}"/>')
        ly = _MARGIN + 14 * (k + 1)
        body.append(
            f'<text x="{_SIZE - _MARGIN - 4}" y="{ly}" text-anchor="end" font-size="10" fill="{color}">'
            f"{escape(label)}</text>"
        )
    return _svg(path, manifest_hash, body)


def write_errorbar_svg(
    path: Path, manifest_hash: str, title: str, crosses: Mapping[str, tuple[float, float, float, float]]
) -> Path:
    """Mean crosses with arm length one standard deviation: label -> (o1_mean, o1_std, o2_mean, o2_std)."""
    body = _axes(title)
    for k, (label, (m1, s1, m2, s2)) in enumerate(crosses.items()):
        color = _PALETTE[k % len(_PALETTE)]
        xa, y = _xy(max(0.0, m1 - s1), m2)
        xb, _ = _xy(min(1.0, m1 + s1), m2)
        x, ya = _xy(m1, max(0.0, m2 - s2))
        _, yb = _xy(m1, min(1.0, m2 + s2))
        body.append(f'<line x1="{xa:.2f}" y1="{y:.2f}" x2="{xb:.2f}" y2="{y:.2f}" stroke="{color}"/>')
        body.append(f'<line x1="{x:.2f}" y1="{ya:.2f}" x2="{x:.2f}" y2="{yb:.2f}" stroke="{color}"/>')
        body.append(f'<text x="{x + 4:.2f}" y="{y - 4:.2f}" font-size="10" fill="{color}">{escape(label)}</text>')
    return _svg(path, manifest_hash, body)
