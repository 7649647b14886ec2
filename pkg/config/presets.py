"""Built-in parameter presets and key=value preset files."""

import logging
from pathlib import Path
from typing import Dict, Union

from dotenv import dotenv_values
from pydantic import ValidationError

from models.errors import InvalidParametersError, UnknownPresetError
from models.schemas import Preset, SchemeParams

logger = logging.getLogger(__name__)

PRESET_KEYS = ("q_base", "q_exp", "s", "v", "n", "k", "m", "L", "f")


def _table_row(name: str, q_base: int, q_exp: int, s: int, v: int, n: int, k: int,
               delta: int, security: int, exponent: int) -> Preset:
    return Preset(
        name=name,
        params=SchemeParams(q_base=q_base, q_exp=q_exp, s=s, v=v, n=n, k=k, m=100, L=1000, f=1),
        provenance="proposed parameter set, with its claimed security level and attack complexity",
        stored_delta=delta,
        security_bits=security,
        reported_attack_exponent=exponent,
    )


BUILTIN_PRESETS: Dict[str, Preset] = {
    preset.name: preset
    for preset in (
        _table_row("table1-row1", 2, 5, 32, 31, 100, 50, 50, 113, 1),
        _table_row("table1-row2", 2, 5, 32, 30, 100, 50, 100, 113, 1),
        _table_row("table1-row3", 2, 16, 12, 10, 100, 50, 100, 113, 9),
        _table_row("table1-row4", 2**32 - 5, 1, 6, 4, 120, 60, 120, 128, 25),
        _table_row("table1-row5", 2, 32, 5, 3, 100, 50, 100, 96, 25),
        _table_row("table1-row6", 2**61 - 1, 1, 6, 2, 100, 50, 200, 113, 53),
        Preset(
            name="fig4-xpir",
            params=SchemeParams(q_base=2, q_exp=104, s=6, v=4, n=100, k=50, m=1000),
            provenance="comparison against XPIR (m = 1000 files)",
        ),
        Preset(
            name="fig5-simplepir",
            params=SchemeParams(q_base=2, q_exp=135, s=6, v=4, n=120, k=60, m=1000),
            provenance="comparison against SimplePIR, field size as given in the running text",
        ),
        Preset(
            name="fig5-caption",
            params=SchemeParams(q_base=2, q_exp=104, s=6, v=4, n=120, k=60, m=1000),
            provenance="comparison against SimplePIR, field size as given in the figure caption",
        ),
        Preset(
            name="toy16",
            params=SchemeParams(q_base=2, q_exp=4, s=4, v=2, n=12, k=6, m=40, L=5, f=1),
            provenance="desk-scale instance over GF(16)",
            stored_delta=12,
        ),
        Preset(
            name="toy32",
            params=SchemeParams(q_base=2, q_exp=5, s=4, v=2, n=12, k=6, m=40, L=5, f=1),
            provenance="desk-scale instance over GF(32)",
            stored_delta=12,
        ),
    )
}

TABLE_PRESETS = tuple(f"table1-row{row}" for row in range(1, 7))


def preset_from_mapping(name: str, values: Dict[str, str], provenance: str = "") -> Preset:
    """Validate a key=value mapping into a Preset."""
    unknown = set(values) - set(PRESET_KEYS) - {"name", "provenance", "delta"}
    if unknown:
        raise InvalidParametersError(f"unknown preset keys: {', '.join(sorted(unknown))}")
    try:
        params = SchemeParams(**{key: int(values[key]) for key in PRESET_KEYS if values.get(key) not in (None, "")})
        stored_delta = int(values["delta"]) if values.get("delta") else None
        return Preset(
            name=values.get("name") or name,
            params=params,
            provenance=values.get("provenance") or provenance,
            stored_delta=stored_delta,
        )
    except (ValueError, ValidationError) as e:
        raise InvalidParametersError(f"invalid preset {name}: {e}") from e


def load_preset(name_or_path: Union[str, Path]) -> Preset:
    """Built-in preset by name, or a key=value preset file."""
    key = str(name_or_path)
    if key in BUILTIN_PRESETS:
        return BUILTIN_PRESETS[key]

    path = Path(name_or_path)
    if not path.is_file():
        raise UnknownPresetError(f"unknown preset '{key}' (built-ins: {', '.join(BUILTIN_PRESETS)})")
    values = dotenv_values(path)
    logger.info(f"Loaded preset file {path}")
    return preset_from_mapping(path.stem, dict(values), provenance=f"file {path}")
