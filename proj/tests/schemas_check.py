"""Validates golden JSON documents against schemas/.

Extra arguments take the form kind=path or kind=path:key, where key names a
top-level array whose items are checked one by one."""
import json, pathlib, sys
from jsonschema import Draft202012Validator
from referencing import Registry, Resource

root = pathlib.Path(sys.argv[1])
schemas = {p.name: json.loads(p.read_text()) for p in (root / "schemas").glob("*.json")}
registry = Registry().with_resources(
    (s["$id"], Resource.from_contents(s)) for s in schemas.values())

def kind_of(name):
    for prefix, schema in [
        ("ingest_", "ingest_report"), ("baselines_", "baseline_set"), ("forecast_", "flexibility_forecast"),
        ("model_", "hvac_model_summary"), ("spectrum_", "spectral_report"), ("feasibility", "feasibility_report"),
        ("plan", "allocation_plan"), ("report", "fulfillment_report"), ("actuals_report", "fulfillment_report"),
        ("event_created", "event_state"), ("vpp_config", "vpp_config")]:
        if name.startswith(prefix):
            return schema
    return None

failed = 0
checked = 0

def check(kind, label, value):
    global failed, checked
    v = Draft202012Validator(schemas[kind + ".schema.json"], registry=registry)
    checked += 1
    for e in list(v.iter_errors(value))[:5]:
        failed += 1
        print(f"{label}: {'/'.join(map(str, e.absolute_path))}: {e.message}")

for doc in sorted((root / "tests" / "golden").rglob("*.json")):
    kind = kind_of(doc.name)
    if kind is not None:
        check(kind, str(doc.relative_to(root)), json.loads(doc.read_text()))

for arg in sys.argv[2:]:
    kind, _, target = arg.partition("=")
    path, _, key = target.partition(":")
    value = json.loads(pathlib.Path(path).read_text())
    if key:
        for i, item in enumerate(value[key]):
            check(kind, f"{path}:{key}[{i}]", item)
    else:
        check(kind, path, value)
print(f"{checked} documents checked")
sys.exit(1 if failed else 0)
