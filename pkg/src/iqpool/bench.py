"""Benchmark orchestration: score every (attribute x pooling) cell.

For each dataset record the configured attribute maps are computed and
reduced by every pooling strategy in the grid; scores are then correlated
against subjective scores per (database, distortion type) group and for
each whole database, and pairwise significance codewords are derived.
Failures are skipped and tallied, never silently dropped: every grid cell
appears in the report, error-tagged if it could not be computed.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .attributes import (
    AttributeMap,
    InfoWeightConfig,
    WindowConfig,
    attribute_names,
    center_crop,
    compute_attribute,
    information_weight_map,
)
from .dataset import EvalRecord, ScoreCache, group_records, load_image, load_manifest, params_hash
from .errors import DegenerateWeights, FitDegenerate, InvalidParameter, IQPoolError, UndefinedCorrelation
from .pooling import PoolingKind, PoolingSpec, catalog, pool, select_specs
from .stats import (
    SignificanceCodeword,
    codeword_totals,
    encode_codeword,
    logistic_fit,
    pearson,
    significant_difference,
    spearman,
)

OVERALL = "all"  # reserved distortion-type label for whole-database rows


@dataclass
class BenchConfig:
    manifests: list[str]
    out_dir: str | None = None
    attributes: tuple[str, ...] = ("squared_error", "ssim")
    pooling_ids: list[str] | None = None  # None selects the full catalog
    alpha: float = 0.05
    threads: int = 1
    c2: float = 10.0
    window: WindowConfig = field(default_factory=WindowConfig)
    per_type_significance: bool = False
    overall_best: bool = False
    report_best: bool = True
    cache_path: str | None = None

    def specs(self) -> list[PoolingSpec]:
        grid = catalog(side=self.window.side, gaussian_sigma=self.window.gaussian_sigma, c2=self.c2)
        return select_specs(self.pooling_ids, grid)


@dataclass
class ReportRow:
    database: str
    distortion_type: str
    attribute: str
    pooling: str
    n: int
    pearson: float | None = None       # on logistic-mapped scores
    pearson_raw: float | None = None
    spearman: float | None = None
    degenerate_weights: int = 0
    fit_flag: str = ""
    error: str = ""

    @property
    def abs_pearson(self) -> float | None:
        return None if self.pearson is None else abs(self.pearson)

    @property
    def abs_spearman(self) -> float | None:
        return None if self.spearman is None else abs(self.spearman)


@dataclass
class CodewordRow:
    first: str
    second: str
    distortion_type: str
    codeword: SignificanceCodeword


@dataclass
class BestRow:
    database: str
    distortion_type: str
    attribute: str
    family: str
    metric: str
    pooling: str
    value: float


@dataclass
class CorrelationReport:
    rows: list[ReportRow]
    codeword_rows: list[CodewordRow]
    col_sums: list[int]
    db_sums: list[int]
    best_rows: list[BestRow]
    database_slots: list[str]
    attribute_slots: list[str]
    records_total: int
    records_used: int
    skipped: list[dict]
    parameters: dict


def _spec_payload(spec: PoolingSpec) -> dict:
    payload: dict = {"id": spec.id, "kind": spec.kind.value}
    if spec.p is not None:
        payload["p"] = spec.p
    if spec.c1 is not None:
        payload["c1"] = spec.c1
    if spec.n_bin is not None:
        payload["n_bin"] = spec.n_bin
    if spec.info is not None:
        payload["info"] = {
            "source": spec.info.source.value,
            "c2": spec.info.c2,
            "window_side": spec.info.window.side,
            "masking": spec.info.window.masking.value,
            "gaussian_sigma": spec.info.window.gaussian_sigma,
        }
    return payload


def _cell_params(attribute: str, window: WindowConfig, spec: PoolingSpec) -> str:
    return params_hash(
        {
            "attribute": attribute,
            "window_side": window.side,
            "masking": window.masking.value,
            "gaussian_sigma": window.gaussian_sigma,
            "pooling": _spec_payload(spec),
        }
    )


def _info_key(cfg: InfoWeightConfig) -> tuple:
    return (cfg.source.value, cfg.window.side, cfg.window.masking.value,
            cfg.window.gaussian_sigma, cfg.c2)


def _aligned(attr_map: AttributeMap, weights: np.ndarray) -> tuple[AttributeMap, np.ndarray]:
    shape = (
        min(attr_map.values.shape[0], weights.shape[0]),
        min(attr_map.values.shape[1], weights.shape[1]),
    )
    vals = center_crop(attr_map.values, shape)
    wts = center_crop(weights, shape)
    return AttributeMap(vals, attr_map.polarity, attr_map.value_range), wts


def compute_pair_scores(
    ref,
    dist,
    attributes: tuple[str, ...],
    specs: list[PoolingSpec],
    window: WindowConfig,
) -> tuple[dict[tuple[str, str], tuple[float, bool]], dict[str, str]]:
    """Every (attribute, pooling) cell for one image pair.

    Returns the score table plus each attribute's polarity.  Zero-weight
    information pooling falls back to the mean and is flagged.
    """
    maps = {name: compute_attribute(name, ref, dist, window) for name in attributes}
    info_maps: dict[tuple, np.ndarray] = {}
    for spec in specs:
        if spec.kind is PoolingKind.INFO_WEIGHTED:
            key = _info_key(spec.info)
            if key not in info_maps:
                info_maps[key] = information_weight_map(ref, dist, spec.info)

    scores: dict[tuple[str, str], tuple[float, bool]] = {}
    for attr, amap in maps.items():
        for spec in specs:
            degenerate = False
            if spec.kind is PoolingKind.INFO_WEIGHTED:
                target, weights = _aligned(amap, info_maps[_info_key(spec.info)])
                try:
                    value = pool(target, spec, weights=weights).value
                except DegenerateWeights:
                    value = float(np.mean(target.values))
                    degenerate = True
            else:
                value = pool(amap, spec).value
            scores[(attr, spec.id)] = (value, degenerate)
    polarities = {name: amap.polarity.value for name, amap in maps.items()}
    return scores, polarities


def score_record(
    rec: EvalRecord,
    attributes: tuple[str, ...],
    specs: list[PoolingSpec],
    window: WindowConfig,
    cache: ScoreCache | None = None,
) -> dict[tuple[str, str], tuple[float, bool]]:
    """Pooled scores for one record: (attribute, pooling id) -> (value, degenerate)."""
    hashes = {(a, s.id): _cell_params(a, window, s) for a in attributes for s in specs}
    if cache is not None:
        hits = {key: cache.get(rec.key, key[0], key[1], h) for key, h in hashes.items()}
        if all(v is not None for v in hits.values()):
            return hits
    ref = load_image(rec.reference_path)
    dist = load_image(rec.distorted_path)
    scores, _ = compute_pair_scores(ref, dist, attributes, specs, window)
    if cache is not None:
        for key, (value, degenerate) in scores.items():
            cache.put(rec.key, key[0], key[1], hashes[key], value, degenerate)
    return scores


def _correlate(row: ReportRow, xs: list[float], ys: list[float]) -> None:
    try:
        row.spearman = spearman(xs, ys)
    except UndefinedCorrelation as exc:
        row.error = type(exc).__name__
    try:
        row.pearson_raw = pearson(xs, ys)
    except UndefinedCorrelation as exc:
        row.error = type(exc).__name__

    mapped = xs
    if len(xs) >= 5:
        try:
            fit = logistic_fit(xs, ys)
            mapped = fit.apply(xs)
            if not fit.converged:
                row.fit_flag = "not_converged"
        except FitDegenerate:
            row.fit_flag = "degenerate"
    else:
        row.fit_flag = "no_fit"
    try:
        row.pearson = pearson(mapped, ys)
    except UndefinedCorrelation:
        # Collapsed fit on non-constant scores: fall back to raw scores.
        if row.pearson_raw is not None:
            row.pearson = row.pearson_raw
            row.fit_flag = (row.fit_flag + "+flat_fit").lstrip("+")
        else:
            row.error = row.error or "UndefinedCorrelation"


def _attribute_slots(attributes: tuple[str, ...]) -> list[str]:
    # Fixed layout: squared error, structural similarity, then one extra slot.
    extras = [a for a in attributes if a not in ("squared_error", "ssim")]
    return ["squared_error", "ssim", extras[0] if extras else "plugin"]


def build_codewords(
    row_index: dict[tuple[str, str, str, str], ReportRow],
    pooling_order: list[str],
    db_slots: list[str],
    attr_slots: list[str],
    scopes: list[str],
    alpha: float,
) -> tuple[list[CodewordRow], list[int], list[int]]:
    """Pairwise significance codewords over the fixed 3x3 slot layout."""
    codeword_rows: list[CodewordRow] = []
    for i in range(len(pooling_order)):
        for j in range(i + 1, len(pooling_order)):
            for scope in scopes:
                flags = []
                for slot_db in range(3):
                    for slot_attr in range(3):
                        flag = False
                        if slot_db < len(db_slots):
                            a = row_index.get(
                                (db_slots[slot_db], scope, attr_slots[slot_attr], pooling_order[i])
                            )
                            b = row_index.get(
                                (db_slots[slot_db], scope, attr_slots[slot_attr], pooling_order[j])
                            )
                            if (
                                a is not None
                                and b is not None
                                and a.pearson is not None
                                and b.pearson is not None
                                and a.n > 3
                                and b.n > 3
                            ):
                                flag = significant_difference(
                                    a.pearson, a.n, b.pearson, b.n, alpha
                                )
                        flags.append(flag)
                codeword_rows.append(
                    CodewordRow(pooling_order[i], pooling_order[j], scope, encode_codeword(flags))
                )
    if codeword_rows:
        col_sums, db_sums = codeword_totals([c.codeword for c in codeword_rows])
    else:
        col_sums, db_sums = [0] * 9, [0] * 3
    return codeword_rows, col_sums, db_sums


def significance_from_csv(
    path: str | Path, alpha: float = 0.05, per_type: bool = False
) -> tuple[list[CodewordRow], list[int], list[int], list[str], list[str]]:
    """Rebuild the codeword matrix from an emitted correlations CSV."""
    import csv as _csv

    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = _csv.DictReader(fh)
        required = {"database", "distortion_type", "attribute", "pooling", "n", "pearson"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise InvalidParameter(f"{path}: not a correlations CSV (needs {sorted(required)})")
        raw_rows = list(reader)

    row_index: dict[tuple[str, str, str, str], ReportRow] = {}
    databases: list[str] = []
    attributes: list[str] = []
    pooling_order: list[str] = []
    dtypes: set[str] = set()
    for raw in raw_rows:
        db = raw["database"]
        if db not in databases:
            databases.append(db)
        if raw["attribute"] not in attributes:
            attributes.append(raw["attribute"])
        if raw["pooling"] not in pooling_order:
            pooling_order.append(raw["pooling"])
        if raw["distortion_type"] != OVERALL:
            dtypes.add(raw["distortion_type"])
        row = ReportRow(
            database=db,
            distortion_type=raw["distortion_type"],
            attribute=raw["attribute"],
            pooling=raw["pooling"],
            n=int(raw["n"]),
            pearson=float(raw["pearson"]) if raw["pearson"] else None,
        )
        row_index[(row.database, row.distortion_type, row.attribute, row.pooling)] = row

    db_slots = databases[:3]
    attr_slots = _attribute_slots(tuple(attributes))
    scopes = sorted(dtypes) if per_type else [OVERALL]
    codeword_rows, col_sums, db_sums = build_codewords(
        row_index, pooling_order, db_slots, attr_slots, scopes, alpha
    )
    return codeword_rows, col_sums, db_sums, db_slots, attr_slots


def run_bench(config: BenchConfig) -> CorrelationReport:
    if not config.attributes:
        raise InvalidParameter("attribute set is empty")
    unknown = [a for a in config.attributes if a not in attribute_names()]
    if unknown:
        raise InvalidParameter(f"unknown attributes {unknown}; registered: {attribute_names()}")
    specs = config.specs()
    if not specs:
        raise InvalidParameter("pooling grid is empty")
    if not 0.0 < config.alpha < 1.0:
        raise InvalidParameter(f"alpha must be in (0, 1), got {config.alpha}")

    records: list[EvalRecord] = []
    for manifest in config.manifests:
        records.extend(load_manifest(manifest))
    cache = ScoreCache(config.cache_path) if config.cache_path else None

    def _worker(rec: EvalRecord):
        try:
            return score_record(rec, config.attributes, specs, config.window, cache)
        except (IQPoolError, OSError) as exc:
            return exc

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool_exec:
            results = list(pool_exec.map(_worker, records))
    else:
        results = [_worker(rec) for rec in records]

    used: list[EvalRecord] = []
    scores: list[dict] = []
    skipped: list[dict] = []
    for rec, result in zip(records, results):
        if isinstance(result, Exception):
            skipped.append({"record": rec.key, "reason": f"{type(result).__name__}: {result}"})
        else:
            used.append(rec)
            scores.append(result)
    by_record = dict(zip((r.key for r in used), scores))

    groups = group_records(used)
    databases: list[str] = []
    for rec in used:
        if rec.database_id not in databases:
            databases.append(rec.database_id)
    group_keys: list[tuple[str, str]] = list(groups)
    for db in databases:
        group_keys.append((db, OVERALL))
        groups[(db, OVERALL)] = [r for r in used if r.database_id == db]

    rows: list[ReportRow] = []
    row_index: dict[tuple[str, str, str, str], ReportRow] = {}
    for db, dtype in group_keys:
        members = groups[(db, dtype)]
        ys = [r.mos for r in members]
        for attr in config.attributes:
            for spec in specs:
                cells = [by_record[r.key][(attr, spec.id)] for r in members]
                xs = [c[0] for c in cells]
                row = ReportRow(
                    database=db,
                    distortion_type=dtype,
                    attribute=attr,
                    pooling=spec.id,
                    n=len(members),
                    degenerate_weights=sum(1 for c in cells if c[1]),
                )
                if members:
                    _correlate(row, xs, ys)
                else:
                    row.error = "EmptyGroup"
                rows.append(row)
                row_index[(db, dtype, attr, spec.id)] = row

    db_slots = databases[:3]
    attr_slots = _attribute_slots(config.attributes)
    scopes = [OVERALL]
    if config.per_type_significance:
        scopes = sorted({dtype for _, dtype in groups if dtype != OVERALL})
    pooling_order = [s.id for s in specs]
    codeword_rows, col_sums, db_sums = build_codewords(
        row_index, pooling_order, db_slots, attr_slots, scopes, config.alpha
    )

    best_rows: list[BestRow] = []
    if config.report_best:
        families = {}
        for spec in specs:
            if spec.kind in (
                PoolingKind.MINKOWSKI,
                PoolingKind.QD_WEIGHTED,
                PoolingKind.INFO_WEIGHTED,
                PoolingKind.WEIGHTED_PERCENTILE,
            ):
                families.setdefault(spec.kind.value, []).append(spec.id)
        best_scopes = [OVERALL] if config.overall_best else sorted(
            {dtype for _, dtype in group_keys if dtype != OVERALL}
        )
        for db in databases:
            for scope in best_scopes:
                for attr in config.attributes:
                    for family, members in families.items():
                        for metric in ("pearson", "spearman"):
                            candidates = []
                            for pid in members:
                                row = row_index.get((db, scope, attr, pid))
                                if row is None:
                                    continue
                                value = getattr(row, metric)
                                if value is not None:
                                    candidates.append((abs(value), pid, value))
                            if candidates:
                                best = max(candidates, key=lambda c: c[0])
                                best_rows.append(
                                    BestRow(db, scope, attr, family, metric, best[1], best[2])
                                )

    # Databases whose subjective scale is differential (higher = worse);
    # their raw correlation signs read inverted relative to MOS databases.
    dmos_databases = sorted(
        {db for db in databases if all(r.mos_is_dmos for r in used if r.database_id == db)}
    )
    parameters = {
        "alpha": config.alpha,
        "attributes": list(config.attributes),
        "attribute_slots": attr_slots,
        "c2": config.c2,
        "database_slots": db_slots,
        "dmos_databases": dmos_databases,
        "manifests": list(config.manifests),
        "overall_best": config.overall_best,
        "per_type_significance": config.per_type_significance,
        "poolings": [_spec_payload(s) for s in specs],
        "records_total": len(records),
        "records_used": len(used),
        "row_count": len(rows),
        "skipped": skipped,
        "threads": config.threads,
        "window": {
            "side": config.window.side,
            "masking": config.window.masking.value,
            "gaussian_sigma": config.window.gaussian_sigma,
        },
    }
    return CorrelationReport(
        rows=rows,
        codeword_rows=codeword_rows,
        col_sums=col_sums,
        db_sums=db_sums,
        best_rows=best_rows,
        database_slots=db_slots,
        attribute_slots=attr_slots,
        records_total=len(records),
        records_used=len(used),
        skipped=skipped,
        parameters=parameters,
    )


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_codeword_csv(
    path: Path,
    codeword_rows: list[CodewordRow],
    col_sums: list[int],
    db_sums: list[int],
    db_slots: list[str],
    attr_slots: list[str],
) -> None:
    """Codeword matrix with the paper-style Col. Sum and DB Sum footer rows."""
    slot_names = list(db_slots) + [f"db{i + 1}" for i in range(len(db_slots), 3)]
    digit_headers = [f"{slot_names[d]}:{attr_slots[a]}" for d in range(3) for a in range(3)]
    cw_rows: list[list] = []
    for cw in codeword_rows:
        cw_rows.append([cw.first, cw.second, cw.distortion_type, cw.codeword.digits]
                       + list(cw.codeword.digits))
    if codeword_rows:
        cw_rows.append(["Col. Sum", "", "", ""] + [str(v) for v in col_sums])
        db_sum_cells = [""] * 9
        for d in range(3):
            db_sum_cells[d * 3] = str(db_sums[d])
        cw_rows.append(["DB Sum", "", "", ""] + db_sum_cells)
    _write_csv(path, ["first", "second", "distortion_type", "codeword"] + digit_headers, cw_rows)


def emit_reports(report: CorrelationReport, out_dir: str | Path) -> list[Path]:
    """Write correlations, codewords, plot data and the run manifest.

    Output is deterministic: fixed ordering, repr-format floats, no
    timestamps.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    corr_path = out / "correlations.csv"
    _write_csv(
        corr_path,
        ["database", "distortion_type", "attribute", "pooling", "n", "pearson",
         "pearson_raw", "spearman", "abs_pearson", "abs_spearman",
         "degenerate_weights", "fit_flag", "error"],
        [
            [r.database, r.distortion_type, r.attribute, r.pooling, r.n, r.pearson,
             r.pearson_raw, r.spearman, r.abs_pearson, r.abs_spearman,
             r.degenerate_weights, r.fit_flag, r.error]
            for r in report.rows
        ],
    )
    written.append(corr_path)

    cw_path = out / "codewords.csv"
    write_codeword_csv(
        cw_path,
        report.codeword_rows,
        report.col_sums,
        report.db_sums,
        report.database_slots,
        report.attribute_slots,
    )
    written.append(cw_path)

    plot_dir = out / "plotdata"
    plot_dir.mkdir(exist_ok=True)
    databases = list(dict.fromkeys(r.database for r in report.rows))
    series = list(dict.fromkeys((r.attribute, r.pooling) for r in report.rows))
    for db in databases:
        dtypes = sorted({r.distortion_type for r in report.rows if r.database == db and r.distortion_type != OVERALL})
        dtypes.append(OVERALL)
        index = {
            (r.distortion_type, r.attribute, r.pooling): r
            for r in report.rows
            if r.database == db
        }
        for metric in ("pearson", "spearman"):
            header = ["distortion_type"] + [f"{a}.{p}" for a, p in series]
            prows = []
            for dtype in dtypes:
                cells: list = [dtype]
                for a, p in series:
                    row = index.get((dtype, a, p))
                    cells.append(getattr(row, metric) if row is not None else None)
                prows.append(cells)
            ppath = plot_dir / f"{db}_{metric}.csv"
            _write_csv(ppath, header, prows)
            written.append(ppath)

    if report.best_rows:
        best_path = out / "best_configs.csv"
        _write_csv(
            best_path,
            ["database", "distortion_type", "attribute", "family", "metric", "pooling", "value"],
            [[b.database, b.distortion_type, b.attribute, b.family, b.metric, b.pooling, b.value]
             for b in report.best_rows],
        )
        written.append(best_path)

    run_path = out / "run.json"
    with open(run_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report.parameters, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(run_path)
    return written
