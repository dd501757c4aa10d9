"""File formats: rig calibration JSON, correspondence JSON lines, config, CSV.

Rig calibration: one JSON object ``{"cameras": [{"R": [9 row-major], "t": [3]}, ...]}``.
Correspondences: JSON lines, one object per match
``{"cam0": i, "cam1": j, "b0": [x,y,z], "b1": [x,y,z]}``.
Experiment CSVs: a per-trial file with columns
``setting,trial,rot_err_deg,trans_dir_err_deg,inlier_recall,inlier_precision,runtime_ns``
and a summary file with mean/median/quantiles per setting.  Floats are
written with repr-faithful %.17g so identical runs produce identical bytes.
"""

from __future__ import annotations

import dataclasses
import json
import math
from pathlib import Path

import numpy as np

from .errors import ParseError
from .geometry import CameraExtrinsics, Correspondence, RigCalibration
from .synthetic import ErrorStats, ScenarioConfig

TRIAL_COLUMNS = (
    "setting",
    "trial",
    "rot_err_deg",
    "trans_dir_err_deg",
    "inlier_recall",
    "inlier_precision",
    "runtime_ns",
)
SUMMARY_METRICS = ("rot_err_deg", "trans_dir_err_deg", "inlier_recall", "inlier_precision")
SUMMARY_STATS = ("mean", "q10", "q25", "median", "q75", "q90")


def load_rig(path) -> RigCalibration:
    """Rig calibration from JSON; raises ParseError with context on bad input."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"rig file {path}: {e.msg}", line=e.lineno) from e
    if not isinstance(doc, dict) or "cameras" not in doc:
        raise ParseError(f"rig file {path}: expected an object with a 'cameras' list")
    cams = []
    for k, cam in enumerate(doc["cameras"]):
        try:
            rot = np.array(cam["R"], dtype=float).reshape(3, 3)
            off = np.array(cam["t"], dtype=float).reshape(3)
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"rig file {path}: camera {k}: {e}") from e
        cams.append(CameraExtrinsics(rot, off))
    return RigCalibration(tuple(cams))


def save_rig(rig: RigCalibration, path) -> None:
    doc = {
        "cameras": [
            {"R": [float(x) for x in c.rotation.ravel()], "t": [float(x) for x in c.offset]}
            for c in rig.cameras
        ]
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_correspondences(path) -> list[Correspondence]:
    """Correspondences from JSON lines; errors name the offending line (1-based)."""
    out = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(f"correspondence file {path}: {e.msg}", line=lineno) from e
            try:
                out.append(
                    Correspondence(
                        int(doc["cam0"]),
                        int(doc["cam1"]),
                        np.array(doc["b0"], dtype=float),
                        np.array(doc["b1"], dtype=float),
                    )
                )
            except (KeyError, TypeError, ValueError) as e:
                raise ParseError(f"correspondence file {path}: {e}", line=lineno) from e
    return out


def save_correspondences(correspondences, path) -> None:
    with open(path, "w") as fh:
        for c in correspondences:
            fh.write(
                json.dumps(
                    {
                        "cam0": c.camera_index_0,
                        "cam1": c.camera_index_1,
                        "b0": [float(x) for x in c.bearing_0],
                        "b1": [float(x) for x in c.bearing_1],
                    }
                )
                + "\n"
            )


def read_config_dict(path) -> dict:
    """Flat JSON config file as a dict of known ScenarioConfig fields."""
    fields = {f.name for f in dataclasses.fields(ScenarioConfig)}
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"config file {path}: {e.msg}", line=e.lineno) from e
    if not isinstance(doc, dict):
        raise ParseError(f"config file {path}: expected a flat JSON object")
    for key in doc:
        if key not in fields:
            raise ParseError(f"config file {path}: unknown field '{key}'")
    return doc


def make_config(values: dict) -> ScenarioConfig:
    """ScenarioConfig from a merged key/value dict, with type coercion."""
    fields = {f.name: f for f in dataclasses.fields(ScenarioConfig)}
    coerced = {}
    for key, val in values.items():
        if key not in fields:
            raise ParseError(f"config override: unknown field '{key}'")
        ftype = fields[key].type
        try:
            if ftype in ("int", int):
                coerced[key] = int(val)
            elif ftype in ("float", float):
                coerced[key] = float(val)
            else:
                coerced[key] = val
        except (TypeError, ValueError) as e:
            raise ParseError(f"config field '{key}': {e}") from e
    try:
        return ScenarioConfig(**coerced)
    except ValueError as e:
        raise ParseError(f"invalid config: {e}") from e


def load_config(path, overrides: dict | None = None) -> ScenarioConfig:
    """ScenarioConfig from flat JSON, with optional key=value overrides on top."""
    values = read_config_dict(path) if path is not None else {}
    values.update(overrides or {})
    return make_config(values)


def _fmt(x) -> str:
    if x is None:
        return ""
    xf = float(x)
    if math.isnan(xf):
        return ""
    return "%.17g" % xf


def write_trial_csv(results: list[ErrorStats], path, *, include_runtime: bool = False) -> None:
    """One row per (setting, trial); angular errors in degrees, blanks for NaN.

    ``runtime_ns`` stays blank unless asked for: experiment outputs must be
    byte-identical across reruns, and wall-clock never is.
    """
    lines = [",".join(TRIAL_COLUMNS)]
    for stats in results:
        for j in range(stats.num_trials):
            rot = math.degrees(stats.rot_err[j]) if not math.isnan(stats.rot_err[j]) else None
            trans = (
                math.degrees(stats.trans_err[j]) if not math.isnan(stats.trans_err[j]) else None
            )
            recall = stats.inlier_recall[j] if stats.inlier_recall is not None else None
            precision = stats.inlier_precision[j] if stats.inlier_precision is not None else None
            runtime = (
                stats.runtime_ns[j]
                if include_runtime and stats.runtime_ns is not None
                else None
            )
            lines.append(
                ",".join(
                    [
                        stats.setting,
                        str(j),
                        _fmt(rot),
                        _fmt(trans),
                        _fmt(recall),
                        _fmt(precision),
                        _fmt(runtime),
                    ]
                )
            )
    Path(path).write_text("\n".join(lines) + "\n")


def write_summary_csv(results: list[ErrorStats], path) -> None:
    """Per-setting quantile summary over trials (degrees for the angular metrics)."""
    header = ["setting", "trials", "failures"]
    for metric in SUMMARY_METRICS:
        for stat in SUMMARY_STATS:
            header.append(f"{metric}_{stat}")
    lines = [",".join(header)]
    for stats in results:
        row = [stats.setting, str(stats.num_trials), str(stats.num_failures)]
        metric_values = {
            "rot_err_deg": np.degrees(stats.rot_err),
            "trans_dir_err_deg": np.degrees(stats.trans_err),
            "inlier_recall": stats.inlier_recall,
            "inlier_precision": stats.inlier_precision,
        }
        for metric in SUMMARY_METRICS:
            values = metric_values[metric]
            if values is None:
                row.extend([""] * len(SUMMARY_STATS))
                continue
            finite = values[~np.isnan(values)]
            if len(finite) == 0:
                row.extend([""] * len(SUMMARY_STATS))
                continue
            row.append(_fmt(np.mean(finite)))
            for q in (0.1, 0.25, 0.5, 0.75, 0.9):
                row.append(_fmt(np.quantile(finite, q)))
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")
