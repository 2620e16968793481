"""
File formats: PGM images, frame stack directories, threshold and flag maps,
speed calibration CSVs and simulator configs.
"""

from .files import atomic_output
from .maps import (
    load_calibration,
    read_flag_map,
    read_real_map,
    read_threshold_map,
    save_calibration,
    write_flag_map,
    write_real_map,
    write_threshold_map,
)
from .models import CalibrationMetadata, Manifest, SimulationConfig
from .pgm import decode_pgm, encode_pgm, read_pgm, write_binary_image, write_pgm
from .sim_config import parse_simulation_config, read_simulation_config
from .speed_csv import (
    load_speed_table,
    open_speed_table,
    read_speed_calibration,
    read_speed_table,
    write_speed_calibration,
    write_speed_table,
)
from .stack import read_manifest, read_masks, read_stack, write_stack

__all__ = [
    'atomic_output',
    'load_calibration',
    'read_flag_map',
    'read_real_map',
    'read_threshold_map',
    'save_calibration',
    'write_flag_map',
    'write_real_map',
    'write_threshold_map',
    'CalibrationMetadata',
    'Manifest',
    'SimulationConfig',
    'decode_pgm',
    'encode_pgm',
    'read_pgm',
    'write_binary_image',
    'write_pgm',
    'parse_simulation_config',
    'read_simulation_config',
    'load_speed_table',
    'open_speed_table',
    'read_speed_calibration',
    'read_speed_table',
    'write_speed_calibration',
    'write_speed_table',
    'read_manifest',
    'read_masks',
    'read_stack',
    'write_stack',
]
