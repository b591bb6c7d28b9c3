import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from inhchan import io as fio
from inhchan.pathloss import MeasurementRecord
from inhchan.pdp import PowerDelayProfile

finite = st.floats(-200.0, 200.0, allow_nan=False)

records = st.builds(
    MeasurementRecord,
    f_ghz=st.floats(0.5, 300.0),
    d3d_m=st.floats(1.0, 1000.0),
    pt_dbm=finite,
    gt_dbi=finite,
    gr_dbi=finite,
    pr_dbm=finite,
    gsym_db=finite,
    condition=st.sampled_from(["LOS", "NLOS_Best", "NLOS"]),
    mode=st.sampled_from(["Directional", "Omnidirectional"]),
)


@given(st.lists(records, max_size=20))
def test_measurement_csv_round_trip_is_byte_stable(recs):
    text = fio.measurements_to_csv(recs)
    parsed, errors = fio.parse_measurements(text)
    assert errors == []
    assert parsed == recs
    assert fio.measurements_to_csv(parsed) == text


def test_missing_column_is_named():
    text = "f_ghz,d3d_m,pt_dbm,gt_dbi,gr_dbi,gsym_db,condition,mode\n"
    with pytest.raises(fio.SchemaError, match="pr_dbm"):
        fio.parse_measurements(text)


def test_invalid_rows_reported_with_line_numbers():
    head = ",".join(fio.MEASUREMENT_COLUMNS)
    text = "\n".join([head, "28,5,0,0,0,-80,0,LOS,omni", "28,0.5,0,0,0,-80,0,LOS,omni", "28,x,0,0,0,-80,0,LOS,omni", "28,5,0,0,0,-80,0,LOS,sideways"])
    recs, errors = fio.parse_measurements(text + "\n")
    assert len(recs) == 1
    assert [line for line, _ in errors] == [3, 4, 5]


def test_pdp_round_trip(tmp_path):
    pdp = PowerDelayProfile(np.arange(5) * 2.5, np.array([-40.1, -np.inf, -90.0, -91.5, -1e-300]), 2.5, -90.0)
    path = tmp_path / "a.csv"
    fio.write_pdp(path, pdp, {"band_ghz": 28.0, "gt_dbi": 15.0})
    back, meta = fio.read_pdp(path)
    np.testing.assert_array_equal(back.delays_ns, pdp.delays_ns)
    np.testing.assert_array_equal(back.powers_dbm, pdp.powers_dbm)
    assert back.resolution_ns == 2.5 and back.noise_floor_dbm == -90.0
    assert meta["band_ghz"] == 28.0
    first = path.read_bytes()
    fio.write_pdp(path, back, meta)
    assert path.read_bytes() == first


@pytest.mark.parametrize(
    "csv_text, sidecar",
    [
        ("delay_ns,power_dbm\n0,-40\n", None),
        ("delay_ns,power_dbm\n0,-40\n", "{not json"),
        ("delay_ns,power_dbm\n0,-40\n", "{}"),
        ("delay,power\n0,-40\n", '{"resolution_ns": 2}'),
        ("delay_ns,power_dbm\n", '{"resolution_ns": 2}'),
        ("delay_ns,power_dbm\n0,abc\n", '{"resolution_ns": 2}'),
        ("delay_ns,power_dbm\n0,-40\n1,-40\n5,-40\n", '{"resolution_ns": 2}'),
    ],
)
def test_pdp_format_errors(tmp_path, csv_text, sidecar):
    path = tmp_path / "bad.csv"
    path.write_text(csv_text)
    if sidecar is not None:
        (tmp_path / "bad.json").write_text(sidecar)
    with pytest.raises(fio.PDPFormatError):
        fio.read_pdp(path)


def test_json_is_sorted_and_rejects_nan(tmp_path):
    fio.write_json(tmp_path / "x.json", {"b": 1, "a": [0.1]})
    assert (tmp_path / "x.json").read_text() == '{\n  "a": [\n    0.1\n  ],\n  "b": 1\n}\n'
    with pytest.raises(ValueError):
        fio.dumps_json({"a": float("nan")})


def test_atomic_write_leaves_no_temp_files(tmp_path):
    fio.write_atomic(tmp_path / "sub" / "f.txt", "hello")
    assert [p.name for p in (tmp_path / "sub").iterdir()] == ["f.txt"]


def test_calibration_filename():
    assert fio.calibration_filename(142, "nlos_best", "dir") == "decay.142.NLOS_Best.Directional.json"
    assert fio.calibration_filename(28.0, "LOS", "omni") == "decay.28.LOS.Omnidirectional.json"


def test_clean_float():
    assert fio.clean_float(None) is None
    assert fio.clean_float(float("inf")) is None
    assert fio.clean_float(np.float64(2.5)) == 2.5
    assert isinstance(json.loads(fio.dumps_json({"x": fio.clean_float(np.float64(1.0))}))["x"], float)
