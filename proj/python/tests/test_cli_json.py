"""JSON output of the command-line tool validates against the shipped schemas."""

import json

import jsonschema
import pytest

from conftest import load_schema


def validated(schema_dir, name, text):
    doc = json.loads(text)
    jsonschema.validate(doc, load_schema(schema_dir, name))
    return doc


@pytest.mark.parametrize(
    "net, formula, code",
    [
        ("dl", "forall x . exists y . x -> y", 1),
        ("swap", "forall x . exists y . x -> y", 0),
        ("inc", "forall x y . x -> y | y ->* x", 2),
        ("swap", "box dia top", 0),
    ],
)
def test_check_json(cli, nets, schema_dir, net, formula, code):
    rc, out, err = cli("--format", "json", "check", nets[net], "-e", formula)
    assert rc == code, err
    doc = validated(schema_dir, "check", out)
    assert doc["exit_code"] == code


def test_explore_json(cli, nets, schema_dir):
    rc, out, _ = cli("--format", "json", "explore", nets["swap"])
    doc = validated(schema_dir, "explore", out)
    assert rc == 0 and doc["complete"] and len(doc["nodes"]) == 2 and len(doc["edges"]) == 2
    rc, out, _ = cli("--format", "json", "--cap", "4", "explore", nets["inc"])
    doc = validated(schema_dir, "explore", out)
    assert not doc["complete"] and doc["boundedness"]["verdict"] == "unbounded"


def test_classify_json(cli, schema_dir):
    rc, out, _ = cli("--format", "json", "classify", "-e", "exists x y . x -> y & !(x = y)")
    doc = validated(schema_dir, "classify", out)
    assert rc == 0 and doc["existential"] and doc["forward"]


@pytest.mark.parametrize(
    "kind, args",
    [
        ("union", ["dl", "swap"]),
        ("union-ml", ["dl", "dl"]),
        ("union-positive", ["dl", "swap"]),
        ("star-union", ["swap", "swap"]),
        ("union-lambda", ["dl", "swap"]),
        ("nonreach", ["swap"]),
        ("budget", ["swap"]),
        ("ug", ["dl"]),
    ],
)
def test_contracts_validate_and_replay(cli, nets, schema_dir, tmp_path, kind, args):
    # dl and swap do not share place names with each other, so pair them with themselves when needed.
    sources = [nets[a] for a in args]
    if len(sources) == 2 and args[0] != args[1]:
        sources = [nets["swap"], tmp_path / "swap_copy.net"]
        sources[1].write_text(nets["swap"].read_text().replace("trans u\nin q:1\nout p:1\n", ""))
    out_dir = tmp_path / kind
    rc, _, err = cli("gadget", kind, *sources, "--out", out_dir)
    assert rc == 0, err
    contract = validated(schema_dir, "contract", (out_dir / "contract.json").read_text())
    assert contract["replayable"]
    rc, out, err = cli("--format", "json", "check", "--contract", out_dir / "contract.json")
    doc = validated(schema_dir, "check", out)
    assert doc["matches"] is True, out + err
    assert rc == (0 if contract["expected"] == "holds" else 1)


def test_qbf_and_reach_gadgets(cli, tmp_path, schema_dir):
    rc, _, _ = cli("gadget", "qbf", "E p1 A p2 (p1 | p2)", "--out", tmp_path / "q")
    assert rc == 0
    assert cli("check", "--contract", tmp_path / "q" / "contract.json")[0] == 0
    net = tmp_path / "d.net"
    net.write_text("net d\nplace p init 0\ntrans t\nin p:1\n")
    assert cli("gadget", "reach", net, "--m1", "2", "--m2", "0", "--out", tmp_path / "r")[0] == 0
    validated(schema_dir, "contract", (tmp_path / "r" / "contract.json").read_text())
    assert cli("check", "--contract", tmp_path / "r" / "contract.json")[0] == 0


def test_usage_errors(cli, nets):
    assert cli("check", nets["dl"], "-e", "forall x .")[0] == 3
    assert cli("gadget", "nosuch", nets["dl"], "--out", "x")[0] == 3
    assert cli("check", "/nonexistent.net", "-e", "true")[0] == 4
