"""The shipped library files conform to the documented JSON schema."""

import json
from pathlib import Path

import pytest

jsonschema = pytest.importorskip("jsonschema")

from conftest import KB_FIXTURE, REPO

SCHEMA_PATH = REPO / "docs" / "library.schema.json"
BUNDLED = REPO / "src" / "circuitlm" / "data" / "library.json"


@pytest.fixture(scope="module")
def validator():
    schema = json.loads(SCHEMA_PATH.read_text(encoding="utf-8"))
    jsonschema.Draft202012Validator.check_schema(schema)
    return jsonschema.Draft202012Validator(schema)


@pytest.mark.parametrize("path", [BUNDLED, KB_FIXTURE],
                         ids=lambda p: Path(p).name)
def test_library_files_conform(validator, path):
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    errors = sorted(validator.iter_errors(data), key=str)
    assert errors == [], "\n".join(str(e) for e in errors)


def test_schema_rejects_bad_records(validator):
    assert not validator.is_valid([])  # empty library
    assert not validator.is_valid([{"key": "x", "pins": []}])
    assert not validator.is_valid([{"key": "x"}])
    assert not validator.is_valid([{
        "key": "x",
        "pins": [{"name": "1", "role": "warp-node"}],
    }])
    assert not validator.is_valid([{
        "key": "x",
        "pins": [{"name": "1"}],
        "specs": {"i2c_address": 0x80},
    }])
    assert validator.is_valid([{
        "key": "x",
        "pins": [{"name": "1"}, {"name": "2", "role": "passive"}],
        "specs": {"i2c_address": 0x44},
    }])
