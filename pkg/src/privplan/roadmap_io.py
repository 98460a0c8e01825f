#!/usr/bin/env python3
"""
Guardado y carga de roadmaps

Formato (ver docs/roadmap-format.md): una línea de cabecera

    privplan-roadmap <format_version> sha256=<hex>

seguida de un cuerpo JSON canónico en UTF-8. El checksum cubre el cuerpo
completo, así que un fichero truncado se detecta al cargar.
"""

import hashlib
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np

from .errors import RoadmapChecksumError, RoadmapFormatError, RoadmapVersionError
from .planner import Roadmap, RoadmapEdge, RoadmapParams

logger = logging.getLogger(__name__)

ROADMAP_FORMAT_VERSION = 1
MAGIC = "privplan-roadmap"


def _body(roadmap: Roadmap) -> Dict[str, Any]:
    p = roadmap.params
    return {
        "format_version": ROADMAP_FORMAT_VERSION,
        "params": {
            "n": p.n,
            "conn_radius": p.conn_radius,
            "resolution": p.resolution,
            "privacy_resolution": p.privacy_resolution,
            "seed": p.seed,
            "scene_digest": p.scene_digest,
        },
        "dof": roadmap.dof,
        "nodes": roadmap.nodes.tolist(),
        "edges": [[e.i, e.j, e.base_length, e.violating_length] for e in roadmap.edges],
    }


def dumps_roadmap(roadmap: Roadmap) -> str:
    body = json.dumps(_body(roadmap), sort_keys=True, separators=(",", ":")) + "\n"
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    return f"{MAGIC} {ROADMAP_FORMAT_VERSION} sha256={digest}\n{body}"


def save_roadmap(roadmap: Roadmap, path: Union[str, Path]):
    """Escribe el roadmap; los errores de E/S se propagan como OSError"""
    path = Path(path)
    os.makedirs(path.parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(dumps_roadmap(roadmap))
    logger.info("✓ Roadmap guardado en: %s (%d nodos, %d aristas)", path, roadmap.num_nodes, roadmap.num_edges)


def loads_roadmap(text: str) -> Roadmap:
    """
    Reconstruye un roadmap serializado

    Raises:
        RoadmapVersionError: si la cabecera declara otra versión de formato
        RoadmapChecksumError: si el cuerpo no coincide con el checksum (p.ej. truncado)
        RoadmapFormatError: si el contenido no es un roadmap
    """
    header, newline, body = text.partition("\n")
    fields = header.split(" ")
    if not fields or fields[0] != MAGIC:
        raise RoadmapFormatError("not a roadmap file (missing header)")
    if not newline or len(fields) != 3 or not fields[2].startswith("sha256="):
        raise RoadmapChecksumError("roadmap header is incomplete (truncated file?)")
    try:
        version = int(fields[1])
    except ValueError:
        raise RoadmapFormatError(f"invalid format_version '{fields[1]}'")
    if version != ROADMAP_FORMAT_VERSION:
        raise RoadmapVersionError(
            f"unsupported roadmap format_version {version} (expected {ROADMAP_FORMAT_VERSION})"
        )
    expected = fields[2][len("sha256="):]
    if hashlib.sha256(body.encode("utf-8")).hexdigest() != expected:
        raise RoadmapChecksumError("roadmap checksum mismatch")

    try:
        doc = json.loads(body)
        if doc["format_version"] != ROADMAP_FORMAT_VERSION:
            raise RoadmapVersionError(f"unsupported roadmap format_version {doc['format_version']}")
        params = RoadmapParams(**doc["params"])
        dof = int(doc["dof"])
        nodes = doc["nodes"]
        edges = tuple(RoadmapEdge.annotated(i, j, base, violating) for i, j, base, violating in doc["edges"])
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, RoadmapFormatError):
            raise
        raise RoadmapFormatError(f"malformed roadmap body: {e}")

    array = np.array(nodes, dtype=float).reshape(-1, dof)
    try:
        return Roadmap(array, edges, params)
    except ValueError as e:
        raise RoadmapFormatError(f"inconsistent roadmap: {e}")


def load_roadmap(path: Union[str, Path]) -> Roadmap:
    with open(path, "r", encoding="utf-8", newline="") as f:
        roadmap = loads_roadmap(f.read())
    logger.info("✓ Roadmap cargado desde: %s (%d nodos, %d aristas)", path, roadmap.num_nodes, roadmap.num_edges)
    return roadmap
