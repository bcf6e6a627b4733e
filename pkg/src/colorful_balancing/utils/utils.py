"""JSON file formats: instances, selections, reports and bench specifications."""

import json
import logging
from pathlib import Path
from typing import Any

from colorful_balancing.generators import GenSpec
from colorful_balancing.maxnorm import WalkConfig
from colorful_balancing.model import Coefficients, Instance, NormKind, Selection

logger = logging.getLogger(__name__)

TELEMETRY_LOGGER = "colorful_balancing.telemetry"


def _read_json(path: str | Path, what: str) -> Any:
    file_path = Path(path)
    if not file_path.exists():
        msg = f"{what} file not found: {file_path}"
        raise FileNotFoundError(msg)
    try:
        with file_path.open(encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        msg = f"Invalid JSON in {what.lower()} file: {e}"
        raise json.JSONDecodeError(msg, e.doc, e.pos) from e


def _write_json(data: Any, path: str | Path) -> Path:
    file_path = Path(path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    with file_path.open("w", encoding="utf-8") as f:
        json.dump(data, f, indent=2)
        f.write("\n")
    return file_path


def instance_from_dict(data: Any) -> tuple[Instance, Coefficients | None]:
    """Decode the instance schema ``{"d", "norm", "families"[, "witness"]}``.

    Raises:
        ValueError: If a field is missing or has the wrong shape.

    Examples:
        >>> data = {"d": 1, "norm": "l2", "families": [[[1.0], [-1.0]]]}
        >>> inst, witness = instance_from_dict(data)
        >>> inst.m, witness is None
        (2, True)
    """
    if not isinstance(data, dict):
        msg = f"Instance must be a JSON object, got {type(data).__name__}"
        raise ValueError(msg)
    missing = [key for key in ("d", "norm", "families") if key not in data]
    if missing:
        msg = f"Instance is missing fields: {', '.join(missing)}"
        raise ValueError(msg)
    if not isinstance(data["families"], list):
        msg = "Instance field 'families' must be a list of families"
        raise ValueError(msg)

    inst = Instance.from_families(data["families"], NormKind(data["norm"]), d=int(data["d"]))
    witness = None
    if data.get("witness") is not None:
        if len(data["witness"]) != inst.m:
            msg = f"Witness has {len(data['witness'])} entries for {inst.m} members"
            raise ValueError(msg)
        witness = Coefficients(data["witness"], inst)
    return inst, witness


def instance_to_dict(inst: Instance, witness: Coefficients | None = None) -> dict[str, Any]:
    data: dict[str, Any] = {
        "d": inst.d,
        "norm": inst.norm_kind.value,
        "families": [inst.family(i).T.tolist() for i in range(inst.n)],
    }
    if witness is not None:
        data["witness"] = witness.entries.tolist()
    return data


def load_instance(path: str | Path) -> tuple[Instance, Coefficients | None]:
    """Load an instance and its optional witness from a JSON file.

    Raises:
        FileNotFoundError: If the file does not exist.
        json.JSONDecodeError: If the file is not valid JSON.
        ValueError: If the JSON does not follow the instance schema.
    """
    inst, witness = instance_from_dict(_read_json(path, "Instance"))
    logger.info(f"Loaded instance d={inst.d}, n={inst.n}, m={inst.m} from {path}")
    return inst, witness


def dump_instance(
    inst: Instance, path: str | Path, witness: Coefficients | None = None
) -> Path:
    """Write an instance, with its witness if given, as JSON."""
    file_path = _write_json(instance_to_dict(inst, witness), path)
    logger.info(f"Wrote instance to {file_path}")
    return file_path


def load_selection(path: str | Path) -> Selection:
    """Load a selection: a JSON list of member indices, or a report holding one.

    Raises:
        FileNotFoundError: If the file does not exist.
        json.JSONDecodeError: If the file is not valid JSON.
        ValueError: If no list of integers is found.
    """
    data = _read_json(path, "Selection")
    if isinstance(data, dict):
        data = data.get("selection")
    if not isinstance(data, list) or not all(isinstance(c, int) for c in data):
        msg = "Selection must be a list of integers or an object with a 'selection' list"
        raise ValueError(msg)
    return Selection(tuple(data))


def write_report(data: dict[str, Any], path: str | Path) -> Path:
    """Write a report mapping as JSON."""
    file_path = _write_json(data, path)
    logger.info(f"Wrote report to {file_path}")
    return file_path


def load_bench_spec(path: str | Path) -> tuple[WalkConfig, list[GenSpec]]:
    """Load ``{"config": {...}, "specs": [...]}`` or a bare list of generator specs.

    Raises:
        FileNotFoundError: If the file does not exist.
        json.JSONDecodeError: If the file is not valid JSON.
        ValueError: If the file holds neither form.
    """
    data = _read_json(path, "Bench spec")
    if isinstance(data, list):
        config, specs = {}, data
    elif isinstance(data, dict) and isinstance(data.get("specs"), list):
        config, specs = data.get("config", {}), data["specs"]
    else:
        msg = "Bench spec must be a list of specs or an object with a 'specs' list"
        raise ValueError(msg)
    return WalkConfig.from_dict(config), [GenSpec.from_dict(s) for s in specs]


def attach_telemetry(path: str | Path) -> logging.Handler:
    """Send walk telemetry records, one JSON object per line, to ``path``."""
    handler = logging.FileHandler(Path(path), mode="w", encoding="utf-8")
    handler.setFormatter(logging.Formatter("%(message)s"))
    telemetry = logging.getLogger(TELEMETRY_LOGGER)
    telemetry.setLevel(logging.INFO)
    telemetry.propagate = False
    telemetry.addHandler(handler)
    return handler
