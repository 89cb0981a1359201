import json
import subprocess
import sys

import pytest

from ascentlab import serialize as sz
from ascentlab.cli import main, parse_ordinal
from ascentlab.foundations import Ordinal
from ascentlab.fixtures import tower, uniform_chain, uniform_path


def run_cli(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


@pytest.fixture()
def cond_file(tmp_path):
    p = tmp_path / "cond.json"
    p.write_text(json.dumps(sz.enc_condition(tower(2))))
    return str(p)


def test_parse_ordinal_forms():
    assert parse_ordinal("5") == Ordinal(0, 5)
    assert parse_ordinal("w1n4") == Ordinal(1, 4)
    assert parse_ordinal("w2") == Ordinal(2, 0)


def test_validate_ok(cond_file, capsys):
    code, rep = run_cli(["validate", cond_file], capsys)
    assert code == 0
    assert rep["clauses"] == {"C1": True, "C2": True, "C3": True, "C4": True}


def test_validate_failing_variant(tmp_path, capsys):
    from ascentlab.conditions import make_bad_extension
    from ascentlab.fixtures import tower as mk
    bad = make_bad_extension(mk(1, "stheta"))
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(sz.enc_condition(bad)))
    code, rep = run_cli(["validate", "--variant", "sx", str(p)], capsys)
    assert code == 1
    assert not rep["clauses"]["C2"]
    assert any("exclusivity" in v or "exclusive" in v for v in rep["violations"])


def test_malformed_input_exit_2(tmp_path, capsys):
    p = tmp_path / "junk.json"
    p.write_text("{\"format\": 99}")
    code = main(["validate", str(p)])
    assert code == 2


def test_extend_roundtrip(cond_file, tmp_path, capsys):
    out = tmp_path / "ext.json"
    code, rep = run_cli(["extend", "--beta", "1", "-o", str(out), cond_file], capsys)
    assert code == 0 and rep["eta"] == "3"
    loaded = sz.dec_condition(json.loads(out.read_text()))
    assert loaded.eta == Ordinal(0, 3)


def test_amalgamate_cli(tmp_path, capsys):
    ch = uniform_chain(3, Ordinal(1, 2))
    p = tmp_path / "chain.json"
    p.write_text(json.dumps(sz.enc_chain(ch)))
    out = tmp_path / "amalgam.json"
    code, rep = run_cli(["amalgamate", str(p), "-o", str(out)], capsys)
    assert code == 0
    assert rep["vanishing"] == ["w1n0"]
    cond = sz.dec_condition(json.loads(out.read_text()))
    assert cond.eta == Ordinal(1, 0)


def test_game_cli(capsys):
    code, rep = run_cli(["game", "--mu", "w1n4", "--opponent", "onestep", "--xi", "0"], capsys)
    assert code == 0
    assert rep["verdict"] == "II_completed"
    assert rep["invariants_ok"]


def test_demo_bad_antichain_cli(capsys):
    code, rep = run_cli(["demo-bad-antichain", "--count", "5", "--search-bound", "32"], capsys)
    assert code == 0
    assert rep["pairwise_incompatible"] == "10/10"


def test_seal_cli(cond_file, capsys):
    code, rep = run_cli(["seal", "--triple", "transpose:1,3", "--xi", "1", cond_file], capsys)
    assert code == 0 and rep["valid"]


def test_absorb_cli(cond_file, capsys):
    code, rep = run_cli(["absorb", "--node", "[5]", "--xi", "1", cond_file], capsys)
    assert code == 0
    assert rep["tau"] in (4, 8, 12)


def test_surgery_and_branches_cli(tmp_path, capsys):
    p = tmp_path / "path.json"
    p.write_text(json.dumps(sz.enc_path_descriptor(uniform_path(3))))
    code, rep = run_cli(["surgery", "--n0", "2", "--path", str(p)], capsys)
    assert code == 0
    assert rep["vanishing"] == ["w1n0"]
    code, rep = run_cli(["derive-branches", "--path", str(p), "--xi", "0"], capsys)
    assert code == 0 and rep["mutually_exclusive"]


def test_vlevels_cli(tmp_path, capsys):
    from ascentlab.amalgam import amalgamate
    out, _ = amalgamate(uniform_chain(2, Ordinal(1, 2)))
    p = tmp_path / "lim.json"
    p.write_text(json.dumps(sz.enc_condition(out)))
    for mode in ("full", "homogeneous"):
        code, rep = run_cli(["vlevels", "--mode", mode, str(p)], capsys)
        assert code == 0
        assert rep["levels"] == ["w1n0"]


def test_roundtrip_all_fixtures():
    objs = [
        sz.enc_condition(tower(3)),
        sz.enc_chain(uniform_chain(2, Ordinal(1, 2))),
        sz.enc_path_descriptor(uniform_path(3)),
    ]
    decoded = [sz.dec_condition(objs[0]), sz.dec_chain(objs[1]), sz.dec_path_descriptor(objs[2])]
    again = [sz.enc_condition(decoded[0]), sz.enc_chain(decoded[1]),
             sz.enc_path_descriptor(decoded[2])]
    assert objs == again
    assert decoded[0] == tower(3)


def test_determinism_byte_identical():
    cmd = [sys.executable, "-m", "ascentlab.cli", "game", "--mu", "6",
           "--opponent", "random", "--seed", "7", "--xi", "1"]
    runs = [subprocess.run(cmd, capture_output=True, text=True).stdout for _ in range(2)]
    assert runs[0] == runs[1]
    assert json.loads(runs[0])["verdict"] == "II_completed"


def test_roundtrip_catalog_conditions():
    from ascentlab.amalgam import amalgamate
    from ascentlab.surgery import branch_surgery
    from ascentlab.foundations import Ordinal
    from ascentlab.game import onestep_opponent, play_game
    amalgam, _ = amalgamate(uniform_chain(2, Ordinal(1, 2)))
    surg = branch_surgery(uniform_path(3), 2)
    two_limit = next(m.cond for m in play_game(Ordinal(2, 1), onestep_opponent(), 0).moves
                     if m.stage == Ordinal(2, 0))
    for cond in (amalgam, surg, two_limit):
        data = sz.enc_condition(cond)
        again = sz.dec_condition(data)
        assert again == cond
        assert sz.enc_condition(again) == data
