"""
Unittests for export module.
"""
import os
import json
import math
import numpy as np
import pytest
from libbandgraph.export import ExporterError
from libbandgraph.export import ReportWriter
from libbandgraph.export import SUFFIX_LENGTH
from libbandgraph.export import csv_text
from libbandgraph.export import digest
from libbandgraph.export import format_float
from libbandgraph.export import json_text


pytestmark = pytest.mark.asyncio


class TestExport:
    """
    Test reports writers.
    """

    def test_format_float(self):
        """
        Test floats are written with 17 significant digits.
        """
        assert format_float(0.1) == "0.10000000000000001"
        assert float(format_float(1 / 3)) == 1 / 3
        assert format_float(math.nan) == "nan"
        assert format_float(-math.inf) == "-inf"

    def test_csv_text(self):
        """
        Test CSV rendering.
        """
        text = csv_text(
            [{"a": 1, "b": True, "c": 0.5, "d": None, "e": 1 - 2j}],
            ["a", "b", "c", "d", "e"])

        lines = text.splitlines()
        assert lines[0] == "a,b,c,d,e"
        assert lines[1] == "1,true,0.5,,1-2j"

    def test_csv_text_empty(self):
        """
        Test CSV rendering without rows.
        """
        assert csv_text([], ["a"]) == "a\n"

        with pytest.raises(ValueError):
            csv_text([])

    def test_json_text(self):
        """
        Test JSON rendering of numpy values.
        """
        text = json_text({
            "b": np.arange(2),
            "a": np.float64(0.5),
            "c": np.complex128(1 + 2j),
            "d": np.bool_(True),
        })

        data = json.loads(text)
        assert data == {"a": 0.5, "b": [0, 1], "c": [1.0, 2.0], "d": True}
        assert text.index('"a"') < text.index('"b"')

    def test_writer_empty(self):
        """
        Test writer needs an output folder.
        """
        with pytest.raises(ValueError):
            ReportWriter(None)

    async def test_save(self, tmpdir):
        """
        Test saving reports.
        """
        writer = ReportWriter(str(tmpdir / "out"))

        path = await writer.save_json("data.json", {"a": 1})
        assert os.path.isfile(path)
        assert writer.outputs[path] == digest(json_text({"a": 1}).encode())

        path = await writer.save_csv("data.csv", [{"a": 1}])
        with open(path, "r", encoding="utf-8") as data:
            assert data.read() == "a\n1\n"

    async def test_never_overwrite(self, tmpdir):
        """
        Test that existing reports get a hash suffix.
        """
        writer = ReportWriter(str(tmpdir))

        first = await writer.save_json("data.json", {"a": 1})
        second = await writer.save_json("data.json", {"a": 2})

        assert first != second
        suffix = digest(json_text({"a": 2}).encode())[:SUFFIX_LENGTH]
        assert os.path.basename(second) == f"data-{suffix}.json"

        with pytest.raises(ExporterError):
            await writer.save_json("data.json", {"a": 2})

    async def test_outputs_hash(self, tmpdir):
        """
        Test outputs hash doesn't depend on the writing order.
        """
        first = ReportWriter(str(tmpdir / "first"))
        await first.save_json("a.json", 1)
        await first.save_json("b.json", 2)

        second = ReportWriter(str(tmpdir / "second"))
        await second.save_json("b.json", 2)
        await second.save_json("a.json", 1)

        assert first.outputs_hash() == second.outputs_hash()
