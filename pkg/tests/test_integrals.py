import numpy as np
import pytest

from creservoir.errors import ConsistencyError, ParseError
from creservoir.integrals import (Metadata, load_fcidump, parse_fcidump,
                                  read_metadata, validate, write_fcidump,
                                  write_metadata)

from conftest import DATA, random_hamiltonian, require_data

HEADER = "&FCI NORB=2, NELEC=2, MS2=0,\n ORBSYM=1,1,\n ISYM=1,\n /\n"


def test_core_only_record():
    ham = parse_fcidump(HEADER + " 0.5 0 0 0 0\n")
    assert ham.core_energy == 0.5
    assert np.all(ham.h1 == 0.0)
    assert np.all(ham.h2 == 0.0)
    assert (ham.n_orb, ham.n_alpha, ham.n_beta) == (2, 1, 1)


def test_h1_symmetry_completion():
    ham = parse_fcidump(HEADER + " 1.0 1 2 0 0\n")
    assert ham.h1[0][1] == 1.0
    assert ham.h1[1][0] == 1.0


def test_h2_eightfold_completion():
    ham = parse_fcidump(HEADER + " 0.25 1 2 1 1\n")
    for idx in ((0, 1, 0, 0), (1, 0, 0, 0), (0, 0, 0, 1), (0, 0, 1, 0)):
        assert ham.get_h2(*idx) == 0.25


def test_generated_h2_dump_shape():
    (path,) = require_data("h2_sto6g_er_0.7414.fcidump")
    ham = load_fcidump(path)
    assert ham.n_orb == 2
    assert ham.n_alpha == 1 and ham.n_beta == 1
    assert validate(ham) == []


def test_parse_errors():
    with pytest.raises(ParseError):
        parse_fcidump("no namelist here\n 1.0 0 0 0 0\n")
    with pytest.raises(ParseError):
        parse_fcidump("&FCI NORB=xx, NELEC=2, MS2=0 /\n")
    with pytest.raises(IndexError):
        parse_fcidump(HEADER + " 1.0 3 1 0 0\n")
    with pytest.raises(ParseError):
        parse_fcidump(HEADER + " (1.0,2.0) 1 1 0 0\n")
    with pytest.raises(ConsistencyError):
        parse_fcidump(HEADER + " 1.0 1 2 0 0\n 2.0 2 1 0 0\n")


def test_duplicates_within_tolerance_accepted():
    ham = parse_fcidump(HEADER + " 1.0 1 2 0 0\n 1.000000000005 2 1 0 0\n")
    assert ham.h1[0][1] == pytest.approx(1.0, abs=1e-9)


def test_fortran_d_exponents():
    ham = parse_fcidump(HEADER + " 1.5D-01 1 1 0 0\n")
    assert ham.h1[0][0] == 0.15


def test_validate_reports_h1_asymmetry():
    ham = random_hamiltonian(3, 2, 1, seed=1)
    assert validate(ham) == []
    ham.h1[0, 1] = 1.0
    ham.h1[1, 0] = 0.0
    problems = validate(ham)
    assert len(problems) == 1
    assert "(0,1)" in problems[0]


def test_generated_n2_dump_validates_clean():
    (path,) = require_data("n2_sto6g_er_1.2.fcidump")
    assert validate(load_fcidump(path)) == []


def test_write_parse_roundtrip_exact():
    ham = random_hamiltonian(4, 2, 2, seed=3)
    text = write_fcidump(ham)
    back = parse_fcidump(text)
    assert back.core_energy == ham.core_energy
    np.testing.assert_array_equal(back.h1, ham.h1)
    np.testing.assert_array_equal(back.h2, ham.h2)


def test_roundtrip_of_generated_dump():
    (path,) = require_data("h2_sto6g_er_0.7414.fcidump")
    ham = load_fcidump(path)
    back = parse_fcidump(write_fcidump(ham))
    assert abs(back.core_energy - ham.core_energy) < 1e-14
    assert np.max(np.abs(back.h1 - ham.h1)) < 1e-14
    assert np.max(np.abs(back.h2 - ham.h2)) < 1e-14


def test_parse_is_basis_agnostic():
    canonical, localized = require_data("n2_sto6g_1.2.fcidump",
                                        "n2_sto6g_er_1.2.fcidump")
    h_can = load_fcidump(canonical)
    h_loc = load_fcidump(localized)
    assert (h_can.n_orb, h_can.n_alpha, h_can.n_beta) == (
        h_loc.n_orb, h_loc.n_alpha, h_loc.n_beta)
    assert abs(h_can.core_energy - h_loc.core_energy) < 1e-10


def test_metadata_roundtrip():
    meta = Metadata(molecule="h2", basis="sto-6g", geometry="0.7414",
                    orbital_basis="localized-er",
                    reference_energies={"hf": -1.125, "fci": -1.1459})
    back = read_metadata(write_metadata(meta))
    assert back.molecule == "h2"
    assert back.geometry_value() == pytest.approx(0.7414)
    assert back.reference_energies == meta.reference_energies


def test_metadata_rejects_nonpositive_geometry():
    with pytest.raises(ParseError):
        read_metadata("geometry = -1.0\n")


def test_generated_sidecars_parse():
    (path,) = require_data("h2_sto6g_er_0.7414.meta")
    meta = read_metadata(path.read_text())
    assert meta.orbital_basis == "localized-er"
    assert "fci" in meta.reference_energies
