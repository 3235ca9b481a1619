import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from creservoir.detspace import (SectorBasis, enumerate_sector, hop_sign,
                                 occupied_orbitals, rank_string, unrank_string)
from creservoir.errors import DomainError


def test_sector_dimensions_from_resource_table():
    assert enumerate_sector(10, 5, 5).dim == 63504
    assert enumerate_sector(10, 9, 7).dim == 1200


def test_minimal_sector_exhaustive():
    sec = enumerate_sector(2, 1, 1)
    assert sec.dim == 4
    assert sorted(sec.strings_a.tolist()) == [0b01, 0b10]
    assert sorted(sec.strings_b.tolist()) == [0b01, 0b10]


def test_electron_count_out_of_range():
    with pytest.raises(DomainError):
        enumerate_sector(4, 5, 1)
    with pytest.raises(DomainError):
        enumerate_sector(4, -1, 1)


def test_rank_boundaries():
    sec = enumerate_sector(6, 3, 3)
    lowest = int(sec.strings_a[0])
    highest = int(sec.strings_a[-1])
    assert lowest == 0b000111 and sec.rank("a", lowest) == 0
    assert highest == 0b111000 and sec.rank("a", highest) == sec.dim_a - 1


def test_rank_unrank_roundtrip_exhaustive():
    sec = enumerate_sector(6, 3, 3)
    assert sec.dim_a == 20
    for idx, mask in enumerate(sec.strings_a):
        assert sec.rank("a", int(mask)) == idx
        assert sec.unrank("a", idx) == int(mask)


def test_rank_wrong_popcount():
    sec = enumerate_sector(6, 3, 3)
    with pytest.raises(DomainError):
        sec.rank("a", 0b000011)


@given(st.integers(min_value=1, max_value=8), st.data())
@settings(max_examples=60, deadline=None)
def test_enumeration_counts_and_order(n, data):
    k = data.draw(st.integers(min_value=0, max_value=n))
    sec = SectorBasis(n, k, 0)
    assert len(sec.strings_a) == math.comb(n, k)
    masks = sec.strings_a.astype(np.int64)
    assert np.all(np.diff(masks) > 0) or len(masks) <= 1
    assert all(bin(int(m)).count("1") == k for m in masks)


def test_hop_sign_adjacent_always_positive():
    sec = enumerate_sector(6, 3, 3)
    for mask in sec.strings_a:
        for p in range(5):
            res = hop_sign(int(mask), p, p + 1)
            if res is not None:
                assert res[0] == 1


def test_hop_sign_examples():
    # orbitals 0, 2, 3 occupied; target 3 already occupied
    assert hop_sign(0b1101, 0, 3) is None
    # orbitals 0 and 2 occupied; one occupied orbital strictly between 0 and 3
    sign, new = hop_sign(0b0101, 0, 3)
    assert sign == -1
    assert new == 0b1100


def test_hop_sign_antisymmetry_roundtrip():
    for mask in enumerate_sector(6, 3, 3).strings_a:
        mask = int(mask)
        for p in range(6):
            for q in range(6):
                if p == q:
                    continue
                res = hop_sign(mask, p, q)
                if res is None:
                    continue
                s1, m1 = res
                s2, m2 = hop_sign(m1, q, p)
                assert m2 == mask
                assert s1 * s2 == 1


def test_composite_index_layout():
    sec = enumerate_sector(4, 2, 1)
    assert sec.composite_index(2, 3) == 2 * sec.dim_b + 3
    mask_a, mask_b = int(sec.strings_a[2]), int(sec.strings_b[3])
    assert sec.determinant_index(mask_a, mask_b) == 2 * sec.dim_b + 3


def test_occupied_orbitals_helper():
    assert occupied_orbitals(0b10110) == [1, 2, 4]
    assert unrank_string(rank_string(0b10110), 3) == 0b10110
