import json
import logging
import os
import stat

import numpy as np
import pytest

from src.errors import BoundsError, FormatError, GeometryError, ManifestError, ModelError, MonotonicityError
from src.imaging.images import BinaryImage, FrameStack, GrayImage, ThresholdMap
from src.simulation.acquisition import generate_stack
from src.speed.compensation import build_table
from src.speed.models import SpeedCalibrationPoint
from src.storage.files import OUTPUT_MODE, atomic_output
from src.storage.maps import (
    ERROR_FILE,
    FLAG_FILE,
    METADATA_FILE,
    THRESHOLD_FILE,
    load_calibration,
    read_flag_map,
    read_real_map,
    read_threshold_map,
    save_calibration,
    write_real_map,
    write_threshold_map,
)
from src.storage.pgm import decode_pgm, encode_pgm, read_pgm, write_binary_image, write_pgm
from src.storage.sim_config import parse_simulation_config, read_simulation_config
from src.storage.speed_csv import (
    open_speed_table,
    read_speed_calibration,
    read_speed_table,
    write_speed_calibration,
    write_speed_table,
)
from src.storage.stack import MANIFEST_FILE, read_manifest, read_masks, read_stack, write_stack
from src.threshold.temporal import PixelFlag, TemporalCalibration, calibrate


class TestPgm:
    def test_file_round_trip(self, tmp_path, rng):
        image = GrayImage(rng.integers(0, 256, size=(7, 13), dtype=np.uint8))
        write_pgm(tmp_path / "image.pgm", image)
        assert read_pgm(tmp_path / "image.pgm") == image

    def test_header_comments(self):
        data = b"P5\n# camera 3\n3 # width\n1\n255\n" + bytes([0, 128, 255])
        np.testing.assert_array_equal(decode_pgm(data).pixels, [[0, 128, 255]])

    def test_trailing_bytes_ignored(self):
        assert decode_pgm(b"P5 2 1 255\n" + bytes([1, 2, 3])).width == 2

    def test_ascii_pgm_rejected(self):
        with pytest.raises(FormatError) as excinfo:
            decode_pgm(b"P2\n2 1\n255\n1 2\n")
        assert excinfo.value.offset == 0
        assert "P2" in str(excinfo.value)

    def test_bad_magic(self):
        with pytest.raises(FormatError):
            decode_pgm(b"GIF89a")

    def test_sixteen_bit_rejected(self):
        with pytest.raises(FormatError) as excinfo:
            decode_pgm(b"P5\n2 2\n65535\n" + bytes(8))
        assert excinfo.value.offset == 7

    def test_truncated_raster(self):
        with pytest.raises(FormatError) as excinfo:
            decode_pgm(b"P5\n2 2\n255\n" + bytes(3))
        assert excinfo.value.offset == 14

    def test_binary_image_written_as_0_255(self, tmp_path):
        write_binary_image(tmp_path / "mask.pgm", BinaryImage(np.array([[0, 1, 1, 0]])))
        np.testing.assert_array_equal(read_pgm(tmp_path / "mask.pgm").pixels, [[0, 255, 255, 0]])

    def test_encode_empty(self):
        with pytest.raises(FormatError):
            encode_pgm(np.zeros((0, 4), dtype=np.uint8))


class TestAtomicOutput:
    def test_failure_keeps_previous_content(self, tmp_path):
        target = tmp_path / "threshold.map"
        target.write_text("old")
        with pytest.raises(RuntimeError):
            with atomic_output(target) as handle:
                handle.write("partial")
                raise RuntimeError("disk full")
        assert target.read_text() == "old"
        assert [path.name for path in tmp_path.iterdir()] == ["threshold.map"]

    def test_creates_parent_directories(self, tmp_path):
        target = tmp_path / "nested" / "out.txt"
        with atomic_output(target) as handle:
            handle.write("done")
        assert target.read_text() == "done"

    @pytest.mark.skipif(os.name != "posix", reason="POSIX permission bits")
    def test_new_files_are_world_readable(self, tmp_path):
        target = tmp_path / "binary.pgm"
        with atomic_output(target, "wb") as handle:
            handle.write(b"P5")
        assert stat.S_IMODE(target.stat().st_mode) == OUTPUT_MODE

    @pytest.mark.skipif(os.name != "posix", reason="POSIX permission bits")
    def test_replaced_file_keeps_its_mode(self, tmp_path):
        target = tmp_path / "threshold.map"
        target.write_text("old")
        target.chmod(0o640)
        with atomic_output(target) as handle:
            handle.write("new")
        assert target.read_text() == "new"
        assert stat.S_IMODE(target.stat().st_mode) == 0o640


class TestStackDirectory:
    def test_round_trip_with_masks(self, tmp_path, clean_model):
        simulated = generate_stack(clean_model, 6)
        manifest_path = write_stack(tmp_path / "stack", simulated.stack, simulated.masks, seed=11)
        assert manifest_path.name == MANIFEST_FILE

        stack = read_stack(manifest_path)
        np.testing.assert_array_equal(stack.frames, simulated.stack.frames)
        assert stack.acquisition_speed == simulated.stack.acquisition_speed
        np.testing.assert_array_equal(read_masks(tmp_path / "stack"), simulated.masks)

        raw = json.loads(manifest_path.read_text())
        assert raw["frameCount"] == 6
        assert raw["seed"] == 11
        assert read_manifest(tmp_path / "stack").frame_names()[0] == "frame_00000.pgm"

    def test_captured_stack_has_no_masks(self, tmp_path):
        write_stack(tmp_path, FrameStack(np.zeros((2, 1, 4), dtype=np.uint8)))
        assert read_masks(tmp_path) is None
        assert "maskPattern" not in json.loads((tmp_path / MANIFEST_FILE).read_text())

    def test_missing_frame(self, tmp_path):
        write_stack(tmp_path, FrameStack(np.zeros((3, 1, 4), dtype=np.uint8)))
        (tmp_path / "frame_00001.pgm").unlink()
        with pytest.raises(ManifestError) as excinfo:
            read_stack(tmp_path)
        assert excinfo.value.frame == "frame_00001.pgm"

    def test_frame_geometry_mismatch(self, tmp_path):
        write_stack(tmp_path, FrameStack(np.zeros((2, 1, 4), dtype=np.uint8)))
        write_pgm(tmp_path / "frame_00001.pgm", GrayImage(np.zeros((1, 5), dtype=np.uint8)))
        with pytest.raises(GeometryError, match="frame_00001.pgm"):
            read_stack(tmp_path)

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(ManifestError):
            read_stack(tmp_path)

    def test_manifest_pattern_needs_index(self, tmp_path):
        (tmp_path / MANIFEST_FILE).write_text(
            json.dumps({"width": 4, "height": 1, "frameCount": 2, "framePattern": "frame.pgm"})
        )
        with pytest.raises(ManifestError):
            read_manifest(tmp_path)

    def test_masks_must_match_frames(self, tmp_path):
        with pytest.raises(GeometryError):
            write_stack(tmp_path, FrameStack(np.zeros((2, 1, 4), dtype=np.uint8)), np.zeros((2, 1, 5), dtype=bool))


class TestMapFiles:
    def test_real_map_is_exact(self, tmp_path, rng):
        values = rng.uniform(0, 255, size=(3, 5))
        write_real_map(tmp_path / "map.txt", values)
        np.testing.assert_array_equal(read_real_map(tmp_path / "map.txt"), values)
        assert (tmp_path / "map.txt").read_text().splitlines()[0] == "5 3"

    def test_threshold_map_file(self, tmp_path):
        threshold_map = ThresholdMap(np.array([[93.679, 0.0, 255.0], [41.0, 199.5, 1.0]]))
        write_threshold_map(tmp_path / THRESHOLD_FILE, threshold_map)
        np.testing.assert_array_equal(read_threshold_map(tmp_path / THRESHOLD_FILE).values, threshold_map.values)
        (tmp_path / "over.map").write_text("2 1\n12.5 300\n")
        with pytest.raises(BoundsError):
            read_threshold_map(tmp_path / "over.map")

    def test_body_count_checked(self, tmp_path):
        (tmp_path / "map.txt").write_text("3 2\n1 2 3\n4 5\n")
        with pytest.raises(FormatError):
            read_real_map(tmp_path / "map.txt")

    def test_bad_header(self, tmp_path):
        (tmp_path / "map.txt").write_text("three two\n")
        with pytest.raises(FormatError):
            read_real_map(tmp_path / "map.txt")

    def test_unknown_flag(self, tmp_path):
        (tmp_path / FLAG_FILE).write_text("3 1\noxe\n")
        with pytest.raises(FormatError):
            read_flag_map(tmp_path / FLAG_FILE)


class TestCalibrationDirectory:
    def test_round_trip(self, tmp_path, clean_model):
        calibration = calibrate(generate_stack(clean_model, 200).stack)
        save_calibration(tmp_path / "calib", calibration)
        assert {path.name for path in (tmp_path / "calib").iterdir()} == {
            THRESHOLD_FILE, ERROR_FILE, FLAG_FILE, METADATA_FILE
        }

        loaded = load_calibration(tmp_path / "calib")
        assert loaded.threshold_map == calibration.threshold_map
        np.testing.assert_array_equal(loaded.error_map, calibration.error_map)
        np.testing.assert_array_equal(loaded.flag_map, calibration.flag_map)
        assert loaded.calibration_speed == calibration.calibration_speed
        assert loaded.frames_used == 200

        metadata = json.loads((tmp_path / "calib" / METADATA_FILE).read_text())
        assert metadata["calibrationSpeed"] == pytest.approx(20.7)
        assert metadata["formatVersion"] == 1

    def test_missing_metadata(self, tmp_path):
        with pytest.raises(FormatError):
            load_calibration(tmp_path)

    def test_shape_mismatch(self, tmp_path):
        calibration = TemporalCalibration(
            threshold_map=ThresholdMap.constant(3, 2, 100.0),
            error_map=np.zeros((2, 3)),
            flag_map=np.full((2, 3), PixelFlag.OK.value),
            calibration_speed=30.0,
            frames_used=200,
        )
        save_calibration(tmp_path, calibration)
        metadata = json.loads((tmp_path / METADATA_FILE).read_text())
        metadata["width"] = 4
        (tmp_path / METADATA_FILE).write_text(json.dumps(metadata))
        with pytest.raises(FormatError):
            load_calibration(tmp_path)


class TestSpeedCsv:
    def test_conveyor_calibration(self, calibration_csv):
        points = read_speed_calibration(calibration_csv)
        assert len(points) == 11
        assert points[3].speed == 36.2
        assert points[3].threshold == pytest.approx(65.239726)
        assert points[0].levels.object_max == pytest.approx(203.810219)

    def test_threshold_only_columns(self, tmp_path):
        (tmp_path / "cal.csv").write_text("V,Threshold\n10,100\n20,50\n")
        points = read_speed_calibration(tmp_path / "cal.csv")
        assert [point.levels for point in points] == [None, None]

    def test_missing_column(self, tmp_path):
        (tmp_path / "cal.csv").write_text("V,Level\n10,100\n")
        with pytest.raises(FormatError):
            read_speed_calibration(tmp_path / "cal.csv")

    def test_bad_row_reported(self, tmp_path):
        (tmp_path / "cal.csv").write_text("V,Threshold\n10,100\n-5,50\n")
        with pytest.raises(FormatError, match="row 2"):
            read_speed_calibration(tmp_path / "cal.csv")

    def test_calibration_round_trip(self, tmp_path, calibration_csv):
        points = read_speed_calibration(calibration_csv)
        write_speed_calibration(tmp_path / "copy.csv", points)
        assert read_speed_calibration(tmp_path / "copy.csv") == points

    def test_table_round_trip(self, tmp_path, calibration_csv):
        table = build_table(read_speed_calibration(calibration_csv))
        write_speed_table(tmp_path / "speed.table", table)
        lines = (tmp_path / "speed.table").read_text().splitlines()
        assert lines[0] == "t,speed"
        assert lines[1] == "0,NEVER"
        assert lines[-1].startswith("point,72.5,")
        assert read_speed_table(tmp_path / "speed.table") == table
        assert open_speed_table(tmp_path / "speed.table") == table
        assert open_speed_table(calibration_csv) == table

    @pytest.mark.parametrize("knots, lines", [
        (["point,20,100", "point,10,120"], (258, 259)),
        (["point,10,100", "point,20,120"], (258, 259)),
        (["point,10,100", "point,20,80", "point,20,60"], (259, 260)),
    ])
    def test_table_knots_out_of_order(self, tmp_path, knots, lines):
        table = build_table([SpeedCalibrationPoint(speed=10, threshold=100),
                             SpeedCalibrationPoint(speed=20, threshold=50)])
        write_speed_table(tmp_path / "speed.table", table)
        rows = (tmp_path / "speed.table").read_text().splitlines()[:257]
        (tmp_path / "speed.table").write_text("\n".join(rows + knots) + "\n")
        with pytest.raises(MonotonicityError) as excinfo:
            read_speed_table(tmp_path / "speed.table")
        assert excinfo.value.rows == lines

    def test_table_missing_rows(self, tmp_path):
        table = build_table([SpeedCalibrationPoint(speed=10, threshold=100),
                             SpeedCalibrationPoint(speed=20, threshold=50)])
        write_speed_table(tmp_path / "speed.table", table)
        lines = (tmp_path / "speed.table").read_text().splitlines()
        (tmp_path / "speed.table").write_text("\n".join(lines[:100] + lines[101:]) + "\n")
        with pytest.raises(FormatError):
            read_speed_table(tmp_path / "speed.table")


class TestSimulationConfig:
    def test_sample_scene(self, calibration_csv):
        config = read_simulation_config(calibration_csv.parent / "line_scan_scene.env")
        model = config.model
        assert (model.width, model.height, model.seed) == (2048, 1, 7)
        assert config.frame_count == 300
        assert config.speed is None
        np.testing.assert_allclose(model.cell_gain[100:110], 0.5)
        assert model.nonlinearity_segments[0].gain == 0.9
        assert model.illumination_profile[0] == pytest.approx(0.7)

    def test_minimal(self):
        config = parse_simulation_config({'WIDTH': '64', 'SPEED': '36.2'})
        assert config.frame_count == 200
        assert config.speed == 36.2
        assert config.model.cell_gain is None

    def test_width_required(self):
        with pytest.raises(ModelError):
            parse_simulation_config({'FRAMES': '10'})

    def test_unknown_key_warned(self, caplog):
        with caplog.at_level(logging.WARNING):
            parse_simulation_config({'WIDTH': '8', 'COLOUR': 'red'})
        assert "COLOUR" in caplog.text

    @pytest.mark.parametrize("values", [
        {'WIDTH': '8', 'SEGMENTS': '4:2:0.9'},
        {'WIDTH': '8', 'SEGMENTS': '4-6'},
        {'WIDTH': '8', 'DEFECT_BANDS': '6:12:0.5'},
        {'WIDTH': '8', 'NOISE_SIGMA': '-1'},
        {'WIDTH': '8', 'FRAMES': '0'},
        {'WIDTH': 'wide'},
    ])
    def test_invalid_values(self, values):
        with pytest.raises(ModelError):
            parse_simulation_config(values)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ModelError):
            read_simulation_config(tmp_path / "absent.env")
