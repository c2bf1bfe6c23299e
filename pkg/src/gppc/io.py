"""ASCII PCD point clouds, PGM occupancy rasters and JSON reports."""

import json
import logging
import re

import numpy as np

from .errors import IoError, ParseError, UnsupportedData
from .matcher import Template
from .ransac import PointCloud

logger = logging.getLogger(__name__)

PGM_THRESHOLD = 127
_PCD_KEYS = ("VERSION", "FIELDS", "SIZE", "TYPE", "COUNT", "WIDTH", "HEIGHT", "VIEWPOINT", "POINTS", "DATA")


def _read_bytes(path):
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as e:
        raise IoError(f"cannot read {path}: {e.strerror or e}") from e


def _write_bytes(path, data):
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as e:
        raise IoError(f"cannot write {path}: {e.strerror or e}") from e


def _parse_pcd_header(lines):
    header = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, *values = line.split()
        key = key.upper()
        if key not in _PCD_KEYS:
            raise ParseError(f"unknown header entry {key!r}", lineno)
        header[key] = (values, lineno)
        if key == "DATA":
            return header, lineno
    raise ParseError("missing DATA line", len(lines) or None)


def read_pcd(path):
    """Load an ASCII PCD file. Rows with a non-finite x, y or z are dropped."""
    text = _read_bytes(path)
    # binary payloads need not decode; only the header must be text
    lines = text.decode("latin-1").splitlines()
    header, data_line = _parse_pcd_header(lines)

    mode = header["DATA"][0][0].lower() if header["DATA"][0] else ""
    if mode != "ascii":
        raise UnsupportedData(f"DATA {mode or '<missing>'} is not supported; only ascii")
    if "FIELDS" not in header:
        raise ParseError("missing FIELDS line", data_line)
    fields, fields_line = header["FIELDS"]
    fields = [f.lower() for f in fields]
    for axis in "xyz":
        if axis not in fields:
            raise ParseError(f"FIELDS lacks {axis!r}", fields_line)

    counts = [1] * len(fields)
    if "COUNT" in header:
        values, lineno = header["COUNT"]
        try:
            counts = [int(v) for v in values]
        except ValueError:
            raise ParseError("COUNT entries must be integers", lineno) from None
    for key in ("SIZE", "TYPE", "COUNT"):
        if key in header and len(header[key][0]) != len(fields):
            raise ParseError(f"{key} has {len(header[key][0])} entries for {len(fields)} fields",
                             header[key][1])
    if any(c < 1 for c in counts):
        raise ParseError("COUNT entries must be positive", header["COUNT"][1])

    def header_int(key):
        values, lineno = header[key]
        try:
            return int(values[0])
        except (ValueError, IndexError):
            raise ParseError(f"{key} must be an integer", lineno) from None

    if "POINTS" in header:
        n_points = header_int("POINTS")
    elif "WIDTH" in header and "HEIGHT" in header:
        n_points = header_int("WIDTH") * header_int("HEIGHT")
    else:
        raise ParseError("missing POINTS line", data_line)

    ncols = sum(counts)
    starts = np.cumsum([0] + counts[:-1])
    xyz_cols = [int(starts[fields.index(a)]) for a in "xyz"]

    rows, row_lines = [], []
    for lineno in range(data_line + 1, len(lines) + 1):
        parts = lines[lineno - 1].split()
        if not parts:
            continue
        if len(parts) != ncols:
            raise ParseError(f"expected {ncols} values, found {len(parts)}", lineno)
        rows.append(parts)
        row_lines.append(lineno)
    if len(rows) != n_points:
        raise ParseError(f"header declares {n_points} points, found {len(rows)} rows",
                         row_lines[-1] if row_lines else data_line)

    if rows:
        try:
            table = np.array(rows, dtype=np.float64)
        except ValueError:
            for parts, lineno in zip(rows, row_lines):
                try:
                    [float(p) for p in parts]
                except ValueError:
                    raise ParseError(f"non-numeric value in {' '.join(parts)!r}", lineno) from None
            raise
        xyz = table[:, xyz_cols]
    else:
        xyz = np.empty((0, 3))

    finite = np.isfinite(xyz).all(axis=1)
    dropped = int(np.count_nonzero(~finite))
    if dropped:
        logger.warning("%s: dropped %d non-finite point(s)", path, dropped)
    return PointCloud(xyz[finite], frame_label=str(path), dropped_count=dropped)


def write_pcd(cloud, path):
    pts = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=np.float64)
    n = len(pts)
    head = (
        "# .PCD v0.7 - Point Cloud Data file format\n"
        "VERSION 0.7\nFIELDS x y z\nSIZE 8 8 8\nTYPE F F F\nCOUNT 1 1 1\n"
        f"WIDTH {n}\nHEIGHT 1\nVIEWPOINT 0 0 0 1 0 0 0\nPOINTS {n}\nDATA ascii\n"
    )
    # repr-precision keeps the round trip exact
    body = "".join(f"{x!r} {y!r} {z!r}\n" for x, y, z in pts.tolist())
    _write_bytes(path, (head + body).encode("ascii"))


def _pgm_tokens(data):
    """Yield (token, end_offset) over a PGM header, skipping comments."""
    i, n = 0, len(data)
    while i < n:
        c = data[i : i + 1]
        if c == b"#":
            while i < n and data[i : i + 1] not in (b"\n", b"\r"):
                i += 1
        elif c.isspace():
            i += 1
        else:
            j = i
            while j < n and not data[j : j + 1].isspace() and data[j : j + 1] != b"#":
                j += 1
            yield data[i:j], j
            i = j


def read_pgm(path):
    """Occupancy (pixel > 127) of a P2 or P5 image plus ``# key value`` header comments."""
    data = _read_bytes(path)
    header = []
    for tok, end in _pgm_tokens(data):
        header.append(tok)
        if len(header) == 4:
            break
    if not header or header[0] not in (b"P2", b"P5"):
        raise ParseError(f"unsupported PGM magic {header[0] if header else b''!r}", 1)
    if len(header) < 4:
        raise ParseError("truncated PGM header", 1)
    try:
        width, height, maxval = (int(t) for t in header[1:])
    except ValueError:
        raise ParseError("PGM header values must be integers", 1) from None
    if width < 1 or height < 1:
        raise ParseError(f"bad PGM size {width}x{height}", 1)
    if not 0 < maxval <= 255:
        raise ParseError(f"maxval {maxval} not in 1..255", 1)

    meta = {}
    for m in re.finditer(rb"^#\s*(\w+)\s+([^\r\n]*)", data[:end], flags=re.M):
        meta[m.group(1).decode("ascii", "replace")] = m.group(2).decode("ascii", "replace").strip()

    # exactly one whitespace byte separates maxval from the raster
    body = data[end + 1 :]
    n = width * height
    if header[0] == b"P5":
        if len(body) < n:
            raise ParseError(f"P5 raster has {len(body)} bytes, need {n}")
        pixels = np.frombuffer(body, dtype=np.uint8, count=n)
    else:
        try:
            pixels = np.array([int(t) for t in body.split()], dtype=np.int64)
        except ValueError:
            raise ParseError("P2 raster holds a non-integer pixel") from None
        if pixels.size != n:
            raise ParseError(f"P2 raster has {pixels.size} values, need {n}")
    if pixels.max(initial=0) > maxval or pixels.min(initial=0) < 0:
        raise ParseError("pixel value outside 0..maxval")
    mask = (pixels.reshape(height, width) > PGM_THRESHOLD).astype(np.uint8)
    return mask, meta


def read_pgm_template(path, cell_size):
    mask, _ = read_pgm(path)
    if not mask.any():
        raise ParseError(f"{path}: template has no occupied pixel (all values <= {PGM_THRESHOLD})")
    return Template(cell_size, mask)


def write_pgm(raster, path, binary=True, comments=None):
    """Write a GridMap, Template or 0/1 array as 0/255 greyscale.

    GridMap metadata (cell size, origin) and template cell size are stored as
    comments so that :func:`read_pgm` can return them.
    """
    cells = getattr(raster, "cells", None)
    if cells is None:
        cells = getattr(raster, "mask", raster)
    cells = np.asarray(cells)
    if cells.ndim != 2 or not np.isin(cells, (0, 1)).all():
        raise ValueError("raster must be a 2D binary array")
    meta = dict(comments or {})
    if hasattr(raster, "cell_size"):
        meta.setdefault("cell_size", repr(float(raster.cell_size)))
    if hasattr(raster, "origin"):
        meta.setdefault("origin", f"{raster.origin[0]!r} {raster.origin[1]!r}")
    h, w = cells.shape
    pixels = (cells.astype(np.uint8) * 255)
    head = ("P5" if binary else "P2") + "\n"
    head += "".join(f"# {k} {v}\n" for k, v in meta.items())
    head += f"{w} {h}\n255\n"
    if binary:
        payload = head.encode("ascii") + pixels.tobytes()
    else:
        body = "\n".join(" ".join(str(v) for v in row) for row in pixels.tolist())
        payload = (head + body + "\n").encode("ascii")
    _write_bytes(path, payload)


def dumps_json(obj):
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def write_json(obj, path):
    _write_bytes(path, dumps_json(obj).encode("utf-8"))
