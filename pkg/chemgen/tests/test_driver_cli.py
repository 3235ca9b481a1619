import subprocess
import sys

import pytest

from chemgen.cli import main
from chemgen.driver import MoleculeJob, build_geometry, run_job


def read_meta(path):
    fields = {}
    for line in path.read_text().splitlines():
        if " = " in line:
            k, _, v = line.partition(" = ")
            fields[k.strip()] = v.strip()
    return fields


def test_geometry_builders():
    chain = build_geometry("h8", 2.0)
    assert len(chain) == 8
    assert chain[-1][1][2] == pytest.approx(14.0)
    water = build_geometry("h2o", 0.957)
    assert [el for el, _ in water] == ["O", "H", "H"]
    with pytest.raises(ValueError):
        build_geometry("xe2", 1.0)


def test_h2_job_roundtrip(tmp_path):
    job = MoleculeJob("h2", basis="sto-6g", bond=0.7414, localize="er",
                      references=True, out_dir=tmp_path)
    result = run_job(job)
    assert result["dump"].exists() and result["meta"].exists()
    meta = read_meta(result["meta"])
    assert meta["orbital_basis"] == "localized-er"
    assert meta["molecule"] == "h2"
    assert float(meta["ref_fci"]) == pytest.approx(float(meta["ref_ccsd"]),
                                                   abs=1e-8)
    header = result["dump"].read_text().splitlines()[0]
    assert "NORB=   2" in header and "NELEC=  2" in header


def test_h2o_frozen_core_dimensions(tmp_path):
    job = MoleculeJob("h2o", basis="6-31g", bond=0.957, frozen_core=True,
                      out_dir=tmp_path)
    result = run_job(job)
    assert result["n_active"] == 12
    header = result["dump"].read_text().splitlines()[0]
    assert "NORB=  12" in header
    assert "NELEC=  8" in header
    meta = read_meta(result["meta"])
    assert meta["n_frozen"] == "1"


def test_o2_open_shell_flags(tmp_path):
    job = MoleculeJob("o2", basis="sto-6g", bond=1.21, out_dir=tmp_path)
    result = run_job(job)
    header = result["dump"].read_text().splitlines()[0]
    assert "MS2= 2" in header


def test_bond_scan_cli(tmp_path):
    code = main(["--molecule", "h2", "--basis", "sto-6g",
                 "--bond-scan", "0.7:0.9:0.1", "--out", str(tmp_path)])
    assert code == 0
    dumps = sorted(tmp_path.glob("*.fcidump"))
    assert len(dumps) == 3


def test_cli_bad_molecule(tmp_path, capsys):
    assert main(["--molecule", "unobtainium", "--out", str(tmp_path)]) == 2


def test_cli_unknown_element_for_basis(tmp_path):
    # 6-31G table carries H/C/N/O only.
    assert main(["--molecule", "o2", "--basis", "6-31g", "--multiplicity",
                 "3", "--out", str(tmp_path)]) == 0
    assert main(["--molecule", "h2", "--basis", "no-such-basis",
                 "--out", str(tmp_path)]) == 2
