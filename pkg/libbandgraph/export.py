"""
.. module:: export
    :platform: Linux
    :synopsis: writers of the JSON and CSV reports of a command run
"""
import io
import os
import csv
import json
import math
import hashlib
import logging
import numpy as np
from libbandgraph import BandGraphException

# short hash appended to a report name which already exists
SUFFIX_LENGTH = 12


class ExporterError(BandGraphException):
    """
    Raised when an error occurs during Exporter operations.
    """


def format_float(value: float) -> str:
    """
    Format a float with 17 significant digits, so it parses back to the
    same double.
    """
    value = float(value)
    if math.isnan(value):
        return "nan"

    if math.isinf(value):
        return "inf" if value > 0 else "-inf"

    return f"{value:.17g}"


def _cell(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"

    if isinstance(value, (float, np.floating)):
        return format_float(value)

    if isinstance(value, (complex, np.complexfloating)):
        sign = "-" if value.imag < 0 else "+"
        return f"{format_float(value.real)}{sign}" \
            f"{format_float(abs(value.imag))}j"

    if value is None:
        return ""

    return str(value)


def _plain(value: object) -> object:
    """
    Convert numpy scalars and containers to JSON types.
    """
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}

    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]

    if isinstance(value, np.ndarray):
        return _plain(value.tolist())

    if isinstance(value, (bool, np.bool_)):
        return bool(value)

    if isinstance(value, np.integer):
        return int(value)

    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value) or math.isinf(value):
            return format_float(value)
        return value

    if isinstance(value, (complex, np.complexfloating)):
        return [_plain(value.real), _plain(value.imag)]

    return value


def csv_text(rows: list, columns: list = None) -> str:
    """
    Render rows as CSV. Columns default to the keys of the first row.
    """
    if not rows and not columns:
        raise ValueError("rows and columns are empty")

    columns = columns or list(rows[0].keys())

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(column, None)) for column in columns])

    return buffer.getvalue()


def json_text(data: object) -> str:
    """
    Render data as indented JSON with sorted keys.
    """
    return json.dumps(_plain(data), indent=4, sort_keys=True) + "\n"


def digest(content: bytes) -> str:
    """
    SHA-256 of some content.
    """
    return hashlib.sha256(content).hexdigest()


class ReportWriter:
    """
    Write the reports of a command inside an output folder. Existing
    files are never overwritten: when a name is taken, the file is saved
    with the hash of its content appended to the name.
    """

    def __init__(self, out_dir: str) -> None:
        """
        :param out_dir: output folder, created if missing
        :type out_dir: str
        """
        if not out_dir:
            raise ValueError("out_dir is empty")

        self._logger = logging.getLogger("bandgraph.export")
        self._out_dir = os.path.abspath(out_dir)
        self._outputs = {}

        try:
            os.makedirs(self._out_dir, exist_ok=True)
        except OSError as err:
            raise ExporterError(
                f"Can't create output folder '{out_dir}': {err}") from err

    @property
    def out_dir(self) -> str:
        """
        Absolute path of the output folder.
        """
        return self._out_dir

    @property
    def outputs(self) -> dict:
        """
        Hash of every written file, by path.
        """
        return dict(self._outputs)

    def outputs_hash(self) -> str:
        """
        Hash of the written files, independent from the order of writing.
        """
        hasher = hashlib.sha256()
        for path in sorted(self._outputs):
            hasher.update(os.path.basename(path).encode())
            hasher.update(self._outputs[path].encode())

        return hasher.hexdigest()

    def _target(self, name: str, content: bytes) -> str:
        path = os.path.join(self._out_dir, name)
        if not os.path.exists(path):
            return path

        root, ext = os.path.splitext(name)
        suffixed = f"{root}-{digest(content)[:SUFFIX_LENGTH]}{ext}"
        path = os.path.join(self._out_dir, suffixed)

        if os.path.exists(path):
            raise ExporterError(f"'{path}' already exists")

        self._logger.warning("'%s' already exists, saving as '%s'",
                             name, suffixed)

        return path

    def write(self, name: str, text: str) -> str:
        """
        Save text into ``name``. Returns the path of the saved file.
        """
        if not name:
            raise ValueError("name is empty")

        content = text.encode("utf-8")
        path = self._target(name, content)

        self._logger.info("Exporting report into %s", path)

        try:
            with open(path, "wb") as outfile:
                outfile.write(content)
        except OSError as err:
            raise ExporterError(f"Can't write '{path}': {err}") from err

        self._outputs[path] = digest(content)

        return path

    async def save_json(self, name: str, data: object) -> str:
        """
        Save data as JSON.
        """
        return self.write(name, json_text(data))

    async def save_csv(self, name: str, rows: list, columns: list = None) -> str:
        """
        Save rows as CSV, floats with 17 significant digits.
        """
        return self.write(name, csv_text(rows, columns))
