import json
import os
import subprocess
import sys

import pytest

from pvcsp import data_path, load_structure
from pvcsp.cli import main
from pvcsp.wl import equiv1

GOLDEN = os.path.join(os.path.dirname(__file__), "golden", "ex1.json")
FILES = {"A": "ex1_A.vcsp", "B": "ex1_B.vcsp", "I": "ex1_I.vcsp"}


def argv(spec):
    cmd, *rest = spec.split()
    return [cmd] + [str(data_path(FILES[x])) if x in FILES else x for x in rest]


def run_json(capsys, args):
    assert main(args + ["--json"]) == 0
    return json.loads(capsys.readouterr().out)


with open(GOLDEN) as fh:
    GOLDENS = json.load(fh)


@pytest.mark.parametrize("spec", sorted(GOLDENS))
def test_golden(capsys, spec):
    out = run_json(capsys, argv(spec))
    for key, expected in GOLDENS[spec].items():
        assert out[key] == expected, key


def test_plain_text_output(capsys):
    assert main(argv("blp I A")) == 0
    assert capsys.readouterr().out.strip() == "2"
    assert main(argv("decide A B I")) == 0
    assert capsys.readouterr().out.strip() == "No"


def test_trace_to_file(tmp_path, capsys):
    path = tmp_path / "trace.jsonl"
    assert main(argv("simulate A B I --tau 2") + ["--trace", str(path)]) == 0
    capsys.readouterr()
    recs = [json.loads(x) for x in path.read_text().splitlines()]
    assert len(recs) == 10 and recs[-1]["verdict"] == "No"


def test_decompose_writes_files(tmp_path, capsys):
    out = run_json(capsys, argv("decompose I A") + ["--out", str(tmp_path)])
    assert out["report"]["ok"]
    assert sorted(os.listdir(tmp_path)) == ["copies.vcsp", "decomposition.json", "twisted.vcsp"]
    copies = load_structure(tmp_path / "copies.vcsp")
    twisted = load_structure(tmp_path / "twisted.vcsp")
    assert equiv1(copies, twisted)


def test_twist_and_power_emit_structures(tmp_path, capsys):
    assert main(argv("power A --m 2")) == 0
    text = capsys.readouterr().out
    assert "R (0+1,0+1) 2" in text
    assert main(argv("twist I --k 1")) == 1  # one variable is too small
    capsys.readouterr()
    path = tmp_path / "pair.vcsp"
    path.write_text("signature\n  R 2\ninstance I\n  universe a b\n  R (a,b) 1\n")
    assert main(["twist", str(path), "--k", "1"]) == 0
    assert "R (0:a,0:b) 2" in capsys.readouterr().out


def test_gen_is_seeded(capsys):
    main(["gen", "template", "--seed", "4"])
    a = capsys.readouterr().out
    main(["gen", "template", "--seed", "4"])
    assert capsys.readouterr().out == a


def test_errors_exit_one(tmp_path, capsys):
    bad = tmp_path / "bad.vcsp"
    bad.write_text("signature\n  R 2\ninstance I\n  universe v\n  R (v,v) -1\n")
    assert main(["opt", str(bad), str(data_path("ex1_A.vcsp"))]) == 1
    assert "error" in capsys.readouterr().err
    assert main(["opt", str(tmp_path / "missing.vcsp"), str(bad)]) == 1


def test_usage_error_exits_two():
    proc = subprocess.run(
        [sys.executable, "-m", "pvcsp.cli", "nonsense"], capture_output=True, text=True
    )
    assert proc.returncode == 2


SCHEMAS = os.path.join(os.path.dirname(__file__), os.pardir, "docs", "cli-schemas.json")
PAIR = "signature\n  R 2\ninstance P\n  universe a b\n  R (a,b) 1\n"
ZERO_INF = "signature\n  R 2\ntemplate K\n  universe 0 1\n  R (0,1) 0\n  R (1,0) 0\n  default R inf\n"

SCHEMA_RUNS = [
    "opt I A",
    "blp I A",
    "sa1 I A",
    "sa1-reduced I A",
    "decide A B I",
    "decide A B I --method oracle --tau 3",
    "wl I",
    "equiv I I",
    "weak-congruent I I",
    "simulate A B I --tau 2",
    "frachom A B",
    "frachom B A",
    "dualfrachom I I",
    "dualfrachom I P",
    "power A --m 2",
    "sympoly A B --m 1",
    "sympoly A B --m 2",
    "blp-power-check I A",
    "decompose I A",
    "twist P --k 2",
    "maxcsp-encode K --c 1/2",
    "gen template --seed 1",
    "gen instance --seed 1",
    "gen connected --seed 1",
    "gen lp --seed 1",
]


@pytest.mark.parametrize("spec", SCHEMA_RUNS)
def test_json_matches_documented_schema(tmp_path, capsys, spec):
    jsonschema = pytest.importorskip("jsonschema")
    with open(SCHEMAS) as fh:
        schema = json.load(fh)
    (tmp_path / "P.vcsp").write_text(PAIR)
    (tmp_path / "K.vcsp").write_text(ZERO_INF)
    args = [str(tmp_path / f"{x}.vcsp") if x in ("P", "K") else x for x in argv(spec)]
    out = run_json(capsys, args)
    sub = {"$schema": schema["$schema"], "$defs": schema["$defs"], "$ref": f"#/$defs/{args[0]}"}
    jsonschema.validate(out, sub)
    # output is stable across runs
    assert run_json(capsys, args) == out
