import hashlib
import json
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from .errors import ArtifactIOError


def _to_builtin(value):
    # numpy scalars and arrays are not JSON serializable
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError("{} is not JSON serializable".format(type(value)))


def canonical_json(document: Dict[str, Any]) -> str:
    return json.dumps(
        document, sort_keys=True, indent=2, default=_to_builtin
    )


def content_hash(document: Dict[str, Any]) -> str:
    """SHA-256 of the compact canonical JSON form of a document."""

    compact = json.dumps(
        document, sort_keys=True, separators=(",", ":"), default=_to_builtin
    )
    return hashlib.sha256(compact.encode("utf-8")).hexdigest()


def dump_document(document: Dict[str, Any], path) -> Path:
    path = Path(path)
    try:
        path.write_text(canonical_json(document) + "\n", encoding="utf-8")
    except OSError as error:
        raise ArtifactIOError(str(error), path) from error
    return path


def load_document(path, schema: Optional[str] = None) -> Dict[str, Any]:
    """Read a JSON document, checking its schema tag when one is requested.

    Args:
        path: The file to be read.
        schema (Optional[str]): The expected value of the `schema` key.

    Returns:
        Dict[str, Any]: The decoded document.
    """

    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except OSError as error:
        raise ArtifactIOError(str(error), path) from error
    except UnicodeDecodeError as error:
        raise ArtifactIOError(str(error), path) from error
    except json.JSONDecodeError as error:
        raise ArtifactIOError("invalid JSON ({})".format(error), path)
    if not isinstance(document, dict):
        raise ArtifactIOError("not a JSON object", path)

    if schema is not None and document.get("schema") != schema:
        raise ArtifactIOError(
            "expected schema '{}', found '{}'".format(
                schema, document.get("schema")
            ),
            path,
        )
    return document
