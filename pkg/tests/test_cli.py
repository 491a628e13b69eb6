import json
import os
import subprocess
import sys

import pytest

from kleinshuffle.cli import main, parse_region
from kleinshuffle.fuchsian import block
from kleinshuffle.io import format_group
from kleinshuffle.moebius import lower, upper
from fractions import Fraction as F


def test_parse_region():
    assert parse_region("H_1,H*_-1") == (upper(1), lower(-1))
    assert parse_region("H_0.01") == (upper(F(1, 100)),)


def test_shuffle_command(tmp_path, capsys):
    assert main(["shuffle", "--k", "3", "--out", str(tmp_path)]) == 0
    text = (tmp_path / "plan_k3_C1.txt").read_text()
    assert "heights = 4190 7756 11946" in text
    assert "246 456 702" in capsys.readouterr().out


def test_k2_is_usage_error(tmp_path):
    assert main(["shuffle", "--k", "2", "--out", str(tmp_path)]) == 2


def test_unknown_flag():
    assert main(["shuffle", "--nope"]) == 2


def test_env_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("KLEINSHUFFLE_OUT", str(tmp_path))
    assert main(["shuffle", "--k", "4"]) == 0
    assert (tmp_path / "plan_k4_C1.txt").exists()


def test_classify(capsys):
    assert main(["classify", "--k", "5"]) == 0
    assert "24 marked classes, 12 homeomorphism classes" in capsys.readouterr().out


def test_verify_exit_codes(tmp_path):
    g = tmp_path / "torus.txt"
    g.write_text(format_group(block(1)))
    out = str(tmp_path)
    assert main(["verify", str(g), "--region", "H_1,H*_-1", "--out", out]) == 0
    cert = json.loads((tmp_path / "certificate.json").read_text())
    assert cert["result"] == "certificate" and cert["margin"] == "35/36"
    assert main(["verify", str(g), "--region", "H_0.01", "--out", out]) == 1
    v = json.loads((tmp_path / "certificate.json").read_text())
    assert v["result"] == "violation" and v["witness"]
    bad = tmp_path / "bad.txt"
    bad.write_text("garbage\n")
    assert main(["verify", str(bad), "--out", out]) == 2
    assert main(["verify", str(g), "--region", "X_1", "--out", out]) == 2


def test_build_and_forged_plan(tmp_path, capsys):
    out = str(tmp_path)
    assert main(["build", "--k", "3", "--tau", "(23)", "--out", out]) == 0
    assert "not a canonical representative" in capsys.readouterr().out
    assert (tmp_path / "hatgamma_k3_tau_12.txt").exists()
    certs = json.loads((tmp_path / "certificates_k3_tau_12.json").read_text())
    assert certs["shuffle_consistency"][0][:4] == [1, 246, 8, 2]
    plan = (tmp_path / "plan.txt")
    main(["shuffle", "--k", "3", "--out", out])
    text = (tmp_path / "plan_k3_C1.txt").read_text().replace("heights = 4190", "heights = 4191")
    plan.write_text(text)
    assert main(["build", "--plan", str(plan), "--out", out]) == 1
    assert "FAILED" in capsys.readouterr().out


def test_render_small(tmp_path):
    out = str(tmp_path)
    assert main(["render", "--k", "3", "--tau", "(12)", "--depth", "4", "--resolution", "64x64",
                 "--csv", "--out", out]) == 0
    pgm = (tmp_path / "limitset_k3_tau_12.pgm").read_bytes()
    assert pgm.startswith(b"P5\n64 ")
    assert (tmp_path / "limitset_k3.csv").exists()
    assert main(["render", "--k", "3", "--resolution", "0x4", "--out", out]) == 2
    assert main(["render", "--k", "3", "--viewport", "2,1", "--out", out]) == 2


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "kleinshuffle", "classify", "--k", "4"],
                       capture_output=True, text=True, cwd=tmp_path)
    assert r.returncode == 0 and "3 homeomorphism classes" in r.stdout


def test_genera_option(tmp_path, capsys):
    out = str(tmp_path)
    assert main(["shuffle", "--k", "3", "--genera", "3,1,2", "--out", out]) == 0
    assert "genera = 3 1 2" in (tmp_path / "plan_k3_C1.txt").read_text()
    assert main(["shuffle", "--k", "3", "--genera", "1,1,2", "--out", out]) == 2
    assert main(["deform", "--k", "3", "--genera", "2,3,4", "--out", out]) == 2
