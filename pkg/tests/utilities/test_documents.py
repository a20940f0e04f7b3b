import math

import numpy as np
import pytest

from nv_magnetometry.utilities.documents import (
    content_hash,
    dump_document,
    load_document,
)
from nv_magnetometry.utilities.errors import (
    ArtifactIOError,
    DomainError,
    InconsistentInputsError,
    NVMagnetometryError,
)
from nv_magnetometry.utilities.fit_result import FitResult


def test_error_hierarchy():
    assert issubclass(DomainError, ValueError)
    assert issubclass(InconsistentInputsError, DomainError)
    error = ArtifactIOError("broken", "a.json")
    assert isinstance(error, NVMagnetometryError)
    assert str(error) == "a.json: broken"


def test_content_hash_ignores_key_order():
    assert content_hash({"a": 1, "b": [1, 2]}) == content_hash(
        {"b": [1, 2], "a": 1}
    )
    assert content_hash({"a": np.float64(1.5)}) == content_hash({"a": 1.5})


def test_document_schema(tmp_path):
    path = dump_document({"schema": "x@1", "value": 3}, tmp_path / "d.json")
    assert load_document(path, "x@1")["value"] == 3
    with pytest.raises(ArtifactIOError):
        load_document(path, "y@1")


def test_invalid_json(tmp_path):
    path = tmp_path / "d.json"
    path.write_text("{not json")
    with pytest.raises(ArtifactIOError):
        load_document(path)


@pytest.mark.parametrize(
    "content", [b"\xff{\"schema\": \"x@1\"}", b"\x80\x81", b"[1, 2]"]
)
def test_unreadable_document(tmp_path, content):
    path = tmp_path / "d.json"
    path.write_bytes(content)
    with pytest.raises(ArtifactIOError) as info:
        load_document(path, "x@1")
    assert info.value.path == path
    assert str(path) in str(info.value)


def test_fit_result_document():
    result = FitResult(
        names=("a", "b"),
        values={"a": 1.0, "b": 2.0},
        uncertainties={"a": 0.1, "b": math.inf},
        residual_norm=0.5,
        iterations=7,
        converged=True,
        provenance={"seed": 3},
    )
    document = result.to_document()
    assert document["parameters"][1]["uncertainty"] is None

    restored = FitResult.from_document(document)
    assert restored["a"] == 1.0
    assert math.isnan(restored.uncertainties["b"])
    assert restored.iterations == 7
    assert restored.provenance == {"seed": 3}


def test_fit_result_failure():
    result = FitResult.failure(("a", "b"), {"a": 2.0}, "degenerate")
    assert not result.converged
    assert result["a"] == 2.0
    assert math.isnan(result["b"])
    assert result.relative_error("a", 4.0) == pytest.approx(0.5)
