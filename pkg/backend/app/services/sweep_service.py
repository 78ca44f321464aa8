"""
Sweep orchestration, model comparison and result files.

A sweep evaluates every requested model family at every point of the
experiment's sweep axis. Monte Carlo work is grouped by environment so
all thresholds and slot counts of one environment share a single SINR
sample (common random numbers). Rows are sorted after the fan-out, so
output order never depends on completion order.
"""

import csv
import hashlib
import io
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from app import __version__
from app.core.config import settings
from app.core.errors import CoverageError, NotBracketedError
from app.core.numerics import db_to_linear
from app.models.experiment import ExperimentConfig
from app.models.schemas import CoverageQuery, GapReport, ResultRow
from app.services.analytic_service import analytic_service
from app.services.config_service import emit_config
from app.services.hexgrid_service import build_layout, hexgrid_service, shift_for_reuse
from app.services.montecarlo_service import estimate_from_sinrs, montecarlo_service

logger = logging.getLogger(__name__)

MODEL_ORDER = ("poisson_analytic", "poisson_mc", "hexagonal_mc")
CSV_COLUMNS = (
    "model",
    "sweep_name",
    "sweep_value",
    "threshold_db",
    "gamma",
    "reuse_k",
    "slots",
    "p_outage",
    "p_outage_stderr",
    "p_handover",
    "p_handover_stderr",
    "error",
)

Task = Callable[[], List[ResultRow]]


def default_models(config: ExperimentConfig) -> List[str]:
    models = ["poisson_analytic", "poisson_mc"]
    if config.hex_enabled:
        models.append("hexagonal_mc")
    return models


def _base_row(model: str, config: ExperimentConfig, value: float, point: dict, seed: Optional[int]) -> dict:
    return {
        "model": model,
        "sweep_name": config.sweep_name,
        "sweep_value": value,
        "threshold_db": point["threshold_db"],
        "gamma": point["gamma"],
        "reuse_k": point["reuse_k"],
        "slots": point["slots"],
        "seed": seed,
    }


def _failed(model: str, config: ExperimentConfig, value: float, seed: Optional[int], exc: Exception) -> ResultRow:
    logger.error(f"{model} failed at {config.sweep_name}={value}: {exc}")
    return ResultRow(**_base_row(model, config, value, config.point(value), seed), error=str(exc))


# ---------------------------------------------------------------------------
# Tasks
# ---------------------------------------------------------------------------

def _analytic_task(config: ExperimentConfig, value: float) -> Task:
    def run() -> List[ResultRow]:
        point = config.point(value)
        try:
            env = config.environment(gamma=point["gamma"], reuse_k=point["reuse_k"])
            query = CoverageQuery(env=env, T=float(db_to_linear(point["threshold_db"])), n=point["slots"])
            outage = analytic_service.outage_probability(query)
            handover = analytic_service.handover_probability(query)
        except (CoverageError, ValueError) as exc:
            return [_failed("poisson_analytic", config, value, None, exc)]
        return [
            ResultRow(
                **_base_row("poisson_analytic", config, value, point, None),
                p_outage=outage.value,
                p_handover=handover.value,
                p_outage_quad_error=outage.error,
                p_handover_quad_error=handover.error,
            )
        ]

    return run


def _mc_rows(model: str, config: ExperimentConfig, values: Sequence[float], samples, seed: int, reuse_k=None):
    rows = []
    for value in values:
        point = config.point(value)
        if reuse_k is not None:
            point["reuse_k"] = reuse_k
        T = float(db_to_linear(point["threshold_db"]))
        outage = estimate_from_sinrs(samples, T, 1)
        handover = estimate_from_sinrs(samples, T, point["slots"])
        rows.append(
            ResultRow(
                **_base_row(model, config, value, point, seed),
                p_outage=outage.mean,
                p_outage_stderr=outage.stderr,
                p_handover=handover.mean,
                p_handover_stderr=handover.stderr,
            )
        )
    return rows


def _environment_groups(config: ExperimentConfig) -> List[Tuple[Tuple[float, int], List[float]]]:
    """Sweep values sharing one environment, in sweep order."""
    groups: Dict[Tuple[float, int], List[float]] = {}
    for value in config.sweep_values():
        point = config.point(value)
        groups.setdefault((point["gamma"], point["reuse_k"]), []).append(value)
    return list(groups.items())


def _poisson_mc_task(config: ExperimentConfig, key, values: List[float], seed: int, snapshots) -> Task:
    def run() -> List[ResultRow]:
        gamma, reuse_k = key
        try:
            env = config.environment(gamma=gamma, reuse_k=reuse_k)
            n_slots = max(config.point(v)["slots"] for v in values)
            samples = montecarlo_service.simulate_sinrs(env, config.sim_config(seed, snapshots), n_slots)
            return _mc_rows("poisson_mc", config, values, samples, seed)
        except (CoverageError, ValueError) as exc:
            return [_failed("poisson_mc", config, v, seed, exc) for v in values]

    return run


def _hex_mc_task(config: ExperimentConfig, key, values: List[float], seed: int, snapshots) -> Task:
    def run() -> List[ResultRow]:
        gamma, reuse_k = key
        try:
            if config.sweep_name == "reuse_k":
                shift = shift_for_reuse(reuse_k)
                if shift is None:
                    raise ValueError(f"no hexagonal tiling has reuse factor {reuse_k}")
            else:
                shift = (config.hex_i, config.hex_j)
            layout = build_layout(config.density_per_m2, config.hex_rings, *shift)
            env = config.environment(gamma=gamma, reuse_k=layout.reuse_k)
            n_slots = max(config.point(v)["slots"] for v in values)
            samples = hexgrid_service.simulate_hex_sinrs(layout, env, config.sim_config(seed, snapshots), n_slots)
            return _mc_rows("hexagonal_mc", config, values, samples, seed, reuse_k=layout.reuse_k)
        except (CoverageError, ValueError) as exc:
            return [_failed("hexagonal_mc", config, v, seed, exc) for v in values]

    return run


# ---------------------------------------------------------------------------
# Sweep
# ---------------------------------------------------------------------------

def run_sweep(
    config: ExperimentConfig,
    models: Optional[Iterable[str]] = None,
    workers: Optional[int] = None,
    seed: Optional[int] = None,
    snapshots: Optional[int] = None,
) -> List[ResultRow]:
    """Evaluate every model at every sweep point; failures land in the error column."""
    models = list(models or default_models(config))
    unknown = [m for m in models if m not in MODEL_ORDER]
    if unknown:
        raise ValueError(f"unknown model families: {unknown}")
    seed = config.sim_seed if seed is None else seed
    workers = workers or settings.sweep_workers

    tasks: List[Task] = []
    if "poisson_analytic" in models:
        tasks.extend(_analytic_task(config, v) for v in config.sweep_values())
    for key, values in _environment_groups(config):
        if "poisson_mc" in models:
            tasks.append(_poisson_mc_task(config, key, values, seed, snapshots))
        if "hexagonal_mc" in models:
            tasks.append(_hex_mc_task(config, key, values, seed, snapshots))

    logger.info(f"sweep over {config.sweep_name}: {len(config.sweep_values())} points, models {models}")
    if workers == 1:
        batches = [task() for task in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(lambda task: task(), tasks))

    rows = [row for batch in batches for row in batch]
    rows.sort(key=lambda row: (row.sweep_value, MODEL_ORDER.index(row.model)))
    failures = sum(1 for row in rows if row.error)
    logger.info(f"sweep finished: {len(rows)} rows, {failures} failed")
    return rows


# ---------------------------------------------------------------------------
# Comparison
# ---------------------------------------------------------------------------

def level_crossing(points: Sequence[Tuple[float, float]], level: float) -> float:
    """Abscissa where the piecewise-linear curve through ``points`` first reaches ``level``."""
    points = sorted(points)
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        if y0 == level:
            return x0
        if (y0 - level) * (y1 - level) < 0.0:
            return x0 + (level - y0) * (x1 - x0) / (y1 - y0)
    if points and points[-1][1] == level:
        return points[-1][0]
    raise NotBracketedError(f"curve never crosses {level}")


def compare_models(
    rows: Sequence[ResultRow],
    level: float = 0.5,
    reference: str = "poisson_analytic",
    baseline: str = "hexagonal_mc",
) -> GapReport:
    """
    Horizontal dB distance between two outage-vs-threshold curves at
    ``level``; positive when the baseline needs a higher threshold.
    """

    def curve(model: str) -> List[Tuple[float, float]]:
        return [
            (row.threshold_db, row.p_outage)
            for row in rows
            if row.model == model and not row.error and row.p_outage is not None
        ]

    crossings = {}
    for model in (reference, baseline):
        points = curve(model)
        if not points:
            raise NotBracketedError(f"no usable {model} rows")
        try:
            crossings[model] = level_crossing(points, level)
        except NotBracketedError as exc:
            raise NotBracketedError(f"{model}: {exc}") from exc

    return GapReport(
        level=level,
        reference_model=reference,
        baseline_model=baseline,
        reference_threshold_db=crossings[reference],
        baseline_threshold_db=crossings[baseline],
        gap_db=crossings[baseline] - crossings[reference],
    )


# ---------------------------------------------------------------------------
# Result files
# ---------------------------------------------------------------------------

def provenance(config: Optional[ExperimentConfig], seed: Optional[int] = None) -> Dict[str, str]:
    info = {"version": __version__}
    if config is not None:
        info["config_sha256"] = hashlib.sha256(emit_config(config).encode("utf-8")).hexdigest()
        info["seed"] = str(config.sim_seed if seed is None else seed)
    return info


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".6g") if math.isfinite(value) else str(value)
    return str(value)


def render_csv(rows: Sequence[ResultRow], info: Dict[str, str]) -> str:
    """Provenance comment lines, header row, one line per result."""
    buffer = io.StringIO()
    for key in sorted(info):
        buffer.write(f"# {key}: {info[key]}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([_cell(getattr(row, column)) for column in CSV_COLUMNS])
    return buffer.getvalue()


def render_json(rows: Sequence[ResultRow], info: Dict[str, str]) -> str:
    payload = {"provenance": info, "rows": [row.model_dump() for row in rows]}
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_rows(
    rows: Sequence[ResultRow],
    path: str,
    config: Optional[ExperimentConfig] = None,
    seed: Optional[int] = None,
) -> None:
    """CSV with a provenance comment header, or JSON when the path ends in .json."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    info = provenance(config, seed)
    render = render_json if target.suffix.lower() == ".json" else render_csv
    target.write_text(render(rows, info), encoding="utf-8", newline="")
    logger.info(f"wrote {len(rows)} rows to {target}")


def read_rows(path: str) -> List[ResultRow]:
    source = Path(path)
    if source.suffix.lower() == ".json":
        payload = json.loads(source.read_text(encoding="utf-8"))
        return [ResultRow(**row) for row in payload["rows"]]
    with source.open("r", encoding="utf-8", newline="") as handle:
        lines = [line for line in handle if not line.startswith("#")]
    rows = []
    for record in csv.DictReader(lines):
        data = {key: (value if value != "" else None) for key, value in record.items() if key != "error"}
        rows.append(ResultRow(**data, error=record.get("error") or ""))
    return rows
