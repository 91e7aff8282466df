"""CSV/JSON writer contracts: RFC 4180 bytes, stable JSON."""

import json

import numpy as np
import pytest

from topobus.artifacts import (Check, format_cell, write_csv, write_manifest,
                               write_verdict)


class TestFormatCell:
    def test_floats_round_trip(self):
        for x in (0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0):
            assert float(format_cell(x)) == x

    def test_numpy_scalars_render_bare(self):
        assert format_cell(np.float64(0.25)) == "0.25"
        assert format_cell(np.int64(-7)) == "-7"
        assert "np." not in format_cell(np.float64(1.0 / 3.0))

    def test_bool_is_lowercase(self):
        assert format_cell(True) == "true"
        assert format_cell(False) == "false"

    def test_int_and_str_pass_through(self):
        assert format_cell(42) == "42"
        assert format_cell("plain") == "plain"


class TestWriteCsv:
    def test_crlf_and_trailing_newline(self, tmp_path):
        p = tmp_path / "t.csv"
        write_csv(p, ["a", "b"], [(1, 2.5), (3, 4.0)])
        raw = p.read_bytes()
        assert raw == b"a,b\r\n1,2.5\r\n3,4.0\r\n"

    def test_quoting_of_special_characters(self, tmp_path):
        p = tmp_path / "t.csv"
        write_csv(p, ["x"], [("a,b",), ('say "hi"',), ("two\nlines",)])
        body = p.read_bytes().split(b"\r\n")
        assert body[1] == b'"a,b"'
        assert body[2] == b'"say ""hi"""'
        # the embedded newline stays inside one quoted field
        assert b'"two\nlines"' in p.read_bytes()

    def test_numpy_rows_give_plain_numbers(self, tmp_path):
        p = tmp_path / "t.csv"
        grid = np.linspace(0.0, 1.0, 3)
        write_csv(p, ["v"], [(v,) for v in grid])
        text = p.read_text()
        assert "np.float64" not in text
        back = [float(line) for line in text.splitlines()[1:]]
        assert back == list(grid)

    def test_identical_input_identical_bytes(self, tmp_path):
        rows = [(0.1, 17), (2.0 / 3.0, -1)]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_csv(a, ["x", "n"], rows)
        write_csv(b, ["x", "n"], rows)
        assert a.read_bytes() == b.read_bytes()


class TestWriteManifest:
    def test_json_round_trip_with_numpy(self, tmp_path):
        p = tmp_path / "m.json"
        write_manifest(p, {
            "f": np.float64(0.5),
            "n": np.int64(3),
            "arr": np.arange(3.0),
            "nested": {"k": [1, 2]},
        })
        back = json.loads(p.read_text())
        assert back["f"] == 0.5
        assert back["n"] == 3
        assert back["arr"] == [0.0, 1.0, 2.0]

    def test_keys_are_sorted(self, tmp_path):
        p = tmp_path / "m.json"
        write_manifest(p, {"zeta": 1, "alpha": 2})
        text = p.read_text()
        assert text.index('"alpha"') < text.index('"zeta"')

    def test_rejects_unserializable(self, tmp_path):
        with pytest.raises(TypeError):
            write_manifest(tmp_path / "m.json", {"bad": object()})


class TestWriteVerdict:
    def test_all_passing(self, tmp_path):
        p = tmp_path / "v.txt"
        ok = write_verdict(p, [Check("first", True, "d = 1"),
                               Check("second", True)])
        text = p.read_text()
        assert ok is True
        assert "PASS  first  (d = 1)" in text
        assert text.rstrip().endswith("VERDICT: PASS")

    def test_single_failure_flips_verdict(self, tmp_path):
        p = tmp_path / "v.txt"
        ok = write_verdict(p, [Check("good", True), Check("bad", False, "x")])
        assert ok is False
        text = p.read_text()
        assert "FAIL  bad  (x)" in text
        assert text.rstrip().endswith("VERDICT: FAIL")
