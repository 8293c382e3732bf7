"""Text formats: OBJ meshes, landmark traces and flat ``key = value`` configs."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Iterable, Iterator, TextIO, Union

import numpy as np

from .errors import InvariantError, ParseError, TimestampError
from .mesh import MeshTopology, SurfaceMesh

PathLike = Union[str, "os.PathLike[str]"]


def parse_obj(text: str) -> SurfaceMesh:
    """Read ``v`` and ``f`` records; every face must be a quad.

    Without ``f`` lines the result carries no topology.
    """
    verts, faces = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split("#", 1)[0].split()
        if not parts:
            continue
        try:
            if parts[0] == "v":
                if len(parts) < 4:
                    raise ParseError(f"line {lineno}: vertex needs 3 coordinates")
                verts.append([float(p) for p in parts[1:4]])
            elif parts[0] == "f":
                idx = [int(p.split("/")[0]) for p in parts[1:]]
                if len(idx) != 4:
                    raise ParseError(f"line {lineno}: only quad faces are supported, got {len(idx)} corners")
                n = len(verts)
                faces.append([i - 1 if i > 0 else n + i for i in idx])
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"line {lineno}: {exc}") from None
    if not verts:
        raise ParseError("OBJ contains no vertices")
    v = np.array(verts)
    topo = MeshTopology(len(v), np.array(faces)) if faces else None
    return SurfaceMesh(v, topo)


def read_obj(path: PathLike) -> SurfaceMesh:
    with open(path) as f:
        return parse_obj(f.read())


def format_obj(mesh: SurfaceMesh) -> str:
    lines = ["v " + " ".join(repr(c) for c in row) for row in mesh.vertices.tolist()]
    if mesh.topology is not None:
        lines += ["f %d %d %d %d" % tuple(q) for q in (mesh.topology.quads + 1).tolist()]
    return "\n".join(lines) + "\n"


def write_obj(path: PathLike, mesh: SurfaceMesh):
    with open(path, "w") as f:
        f.write(format_obj(mesh))


@dataclass(frozen=True)
class TraceRecord:
    frame_index: int
    timestamp_s: float
    face_flag: float
    vertices: np.ndarray

    def to_line(self) -> str:
        coords = ",".join(f"{c:.9g}" for c in np.asarray(self.vertices, dtype=np.float64).ravel().tolist())
        return (f'{{"frame_index": {int(self.frame_index)}, "timestamp_s": {self.timestamp_s:.9g}, '
                f'"face_flag": {self.face_flag:.9g}, "vertices": [{coords}]}}')

    @classmethod
    def from_line(cls, line: str) -> "TraceRecord":
        try:
            d = json.loads(line)
            flat = np.asarray(d["vertices"], dtype=np.float64)
            rec = cls(int(d["frame_index"]), float(d["timestamp_s"]), float(d["face_flag"]),
                      flat.reshape(-1, 3))
        except (ValueError, KeyError, TypeError) as exc:
            raise ParseError(f"bad trace record: {exc}") from None
        return rec


def iter_trace(stream: TextIO) -> Iterator[TraceRecord]:
    """Yield records, enforcing increasing timestamps and a constant vertex count."""
    prev_t = None
    n = None
    for lineno, line in enumerate(stream, 1):
        if not line.strip():
            continue
        rec = TraceRecord.from_line(line)
        if prev_t is not None and not rec.timestamp_s > prev_t:
            raise TimestampError(f"line {lineno}: timestamp {rec.timestamp_s} does not follow {prev_t}")
        if n is not None and len(rec.vertices) != n:
            raise InvariantError(f"line {lineno}: {len(rec.vertices)} vertices, expected {n}")
        prev_t, n = rec.timestamp_s, len(rec.vertices)
        yield rec


def read_trace(path: PathLike) -> list[TraceRecord]:
    with open(path) as f:
        return list(iter_trace(f))


def write_trace(path: PathLike, records: Iterable[TraceRecord]):
    with open(path, "w") as f:
        for rec in records:
            f.write(rec.to_line() + "\n")


def parse_config(text: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ParseError(f"line {lineno}: empty key")
        out[key] = value
    return out


def format_config(values: dict) -> str:
    return "".join(f"{k} = {v}\n" for k, v in values.items())
