"""
Simulator configuration files.

Flat KEY=value text read with python-dotenv; blank lines and # comments
are ignored. Recognized keys:

    WIDTH, HEIGHT                       frame geometry (HEIGHT defaults to 1)
    FRAMES                              frame count L (default 200)
    SPEED                               conveyor speed V in m/min (default: reference speed)
    SEED                                random seed (default 0)
    SCENE_LEVEL, OBJECT_LEVEL           ideal intensities
    NOISE_SIGMA                         additive Gaussian noise
    ILLUMINATION_AMPLITUDE              linear illumination gradient, +/- fraction
    CELL_GAIN_SIGMA                     random per-cell gain spread
    DEFECT_BANDS                        start:stop:gain[,start:stop:gain...]
    SEGMENTS                            start:stop:gain[,...] sensor segment gains
    SHADOWED_COLUMNS                    start:stop[,...] columns the object never covers
    OBJECT_FRACTION_MIN, OBJECT_FRACTION_MAX
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from dotenv import dotenv_values
from pydantic import ValidationError

from ..errors import ModelError
from ..simulation.acquisition import (
    SceneModel,
    SensorSegment,
    defect_band,
    linear_illumination,
    random_cell_gain,
)
from .files import PathLike
from .models import SimulationConfig

logger = logging.getLogger(__name__)

DEFAULT_FRAMES = 200

SCALAR_KEYS = {
    'HEIGHT': 'height',
    'SCENE_LEVEL': 'scene_level',
    'OBJECT_LEVEL': 'object_level',
    'NOISE_SIGMA': 'noise_sigma',
    'OBJECT_FRACTION_MIN': 'object_fraction_min',
    'OBJECT_FRACTION_MAX': 'object_fraction_max',
    'SEED': 'seed',
}
KNOWN_KEYS = set(SCALAR_KEYS) | {
    'WIDTH', 'FRAMES', 'SPEED', 'ILLUMINATION_AMPLITUDE', 'CELL_GAIN_SIGMA',
    'DEFECT_BANDS', 'SEGMENTS', 'SHADOWED_COLUMNS',
}


def _ranges(key: str, value: str, with_gain: bool) -> List[Tuple]:
    parsed = []
    for item in filter(None, (part.strip() for part in value.split(","))):
        fields = item.split(":")
        try:
            if with_gain and len(fields) == 3:
                parsed.append((int(fields[0]), int(fields[1]), float(fields[2])))
            elif not with_gain and len(fields) == 2:
                parsed.append((int(fields[0]), int(fields[1])))
            else:
                raise ValueError(item)
        except ValueError:
            shape = "start:stop:gain" if with_gain else "start:stop"
            raise ModelError(f"{key}: '{item}' is not {shape}")
    return parsed


def _number(key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ModelError(f"{key}: '{value}' is not a number")


def parse_simulation_config(values: Dict[str, Optional[str]]) -> SimulationConfig:
    values = {key.upper(): (value or "").strip() for key, value in values.items()}
    unknown = sorted(set(values) - KNOWN_KEYS)
    if unknown:
        logger.warning(f"Ignoring unknown simulator key(s): {', '.join(unknown)}")
    if not values.get('WIDTH'):
        raise ModelError("Simulator config needs WIDTH")

    fields = {'width': values['WIDTH']}
    fields.update({name: values[key] for key, name in SCALAR_KEYS.items() if values.get(key)})
    width = int(_number('WIDTH', values['WIDTH']))
    seed = int(_number('SEED', values.get('SEED') or "0"))

    if values.get('ILLUMINATION_AMPLITUDE'):
        fields['illumination_profile'] = linear_illumination(
            width, _number('ILLUMINATION_AMPLITUDE', values['ILLUMINATION_AMPLITUDE']))
    if values.get('CELL_GAIN_SIGMA'):
        fields['cell_gain'] = random_cell_gain(width, _number('CELL_GAIN_SIGMA', values['CELL_GAIN_SIGMA']), seed)
    if values.get('SHADOWED_COLUMNS'):
        fields['shadowed_columns'] = _ranges('SHADOWED_COLUMNS', values['SHADOWED_COLUMNS'], with_gain=False)

    try:
        if values.get('SEGMENTS'):
            fields['nonlinearity_segments'] = [
                SensorSegment(start=start, stop=stop, gain=gain)
                for start, stop, gain in _ranges('SEGMENTS', values['SEGMENTS'], with_gain=True)
            ]
        model = SceneModel(**fields)
        for start, stop, gain in _ranges('DEFECT_BANDS', values.get('DEFECT_BANDS', ""), with_gain=True):
            model = defect_band(model, (start, stop), gain)
        return SimulationConfig(
            model=model,
            frame_count=values.get('FRAMES') or DEFAULT_FRAMES,
            speed=values.get('SPEED') or None,
        )
    except ValidationError as e:
        raise ModelError(f"Invalid simulator config: {e}")


def read_simulation_config(path: PathLike) -> SimulationConfig:
    path = Path(path)
    if not path.is_file():
        raise ModelError(f"Simulator config {path} not found")
    config = parse_simulation_config(dotenv_values(path))
    logger.info(
        f"Loaded simulator config {path}: {config.model.width}x{config.model.height}, "
        f"{config.frame_count} frame(s), seed {config.model.seed}"
    )
    return config
