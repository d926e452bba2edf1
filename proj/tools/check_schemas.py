#!/usr/bin/env python3
"""Validate switchstab JSON artifacts against schemas/*.schema.json.

Usage: check_schemas.py SCHEMA_DIR FILE_OR_DIR...
Each document is matched to a schema through its "kind" field. Exits 1 on
any violation or on a document of unknown kind.
"""
import json
import pathlib
import sys

import jsonschema
from referencing import Registry, Resource

SCHEMA_BY_KIND = {
    "signal": "signal.schema.json",
    "validation": "validation.schema.json",
    "certificate": "certificate.schema.json",
    "limits": "limits.schema.json",
}


def load_registry(schema_dir):
    resources = []
    for path in sorted(schema_dir.glob("*.schema.json")):
        doc = json.loads(path.read_text())
        resources.append((doc["$id"], Resource.from_contents(doc)))
    return Registry().with_resources(resources)


def main(argv):
    if len(argv) < 3:
        print(__doc__, file=sys.stderr)
        return 2
    schema_dir = pathlib.Path(argv[1])
    registry = load_registry(schema_dir)
    validators = {}
    for kind, name in SCHEMA_BY_KIND.items():
        schema = json.loads((schema_dir / name).read_text())
        jsonschema.Draft202012Validator.check_schema(schema)
        validators[kind] = jsonschema.Draft202012Validator(schema, registry=registry)

    files = []
    for arg in argv[2:]:
        p = pathlib.Path(arg)
        files.extend(sorted(p.glob("*.json")) if p.is_dir() else [p])

    failures = 0
    checked = 0
    for path in files:
        doc = json.loads(path.read_text())
        if not isinstance(doc, dict) or "kind" not in doc:
            continue  # input configs carry no kind
        validator = validators.get(doc["kind"])
        if validator is None:
            print(f"{path}: unknown kind {doc['kind']!r}")
            failures += 1
            continue
        errors = list(validator.iter_errors(doc))
        for e in errors:
            where = "/".join(str(p) for p in e.absolute_path) or "<root>"
            print(f"{path}: {where}: {e.message}")
        failures += bool(errors)
        checked += 1
    print(f"{checked} documents checked, {failures} invalid")
    return 1 if failures or checked == 0 else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
