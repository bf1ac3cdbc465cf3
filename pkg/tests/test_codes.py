import json

import pytest

from ittm.codes import (
    CodeError, Invalid, NotOrdinal, Unknown, Valid, canonical_code, code_cells, code_tape,
    decode, finite_code, from_json, predicate_code, validate,
)
from ittm.ordinal import OMEGA, godel_pair, parse

WW = parse("w^(w)")


class TestCanonical:
    def test_empty(self):
        c = canonical_code(0, OMEGA)
        assert code_cells(c) == []

    def test_two(self):
        c = canonical_code(2, OMEGA)
        want = sorted([godel_pair(1, 0), godel_pair(2, 0), godel_pair(1, 2)])
        assert code_cells(c) == want

    def test_omega_membership(self):
        c = canonical_code(OMEGA, WW)
        assert all(godel_pair(1 + n, 0) in c for n in range(50))
        assert godel_pair(0, 1) not in c
        assert godel_pair(OMEGA, 0) not in c

    def test_requires_closed_alpha(self):
        with pytest.raises(CodeError):
            canonical_code(2, parse("w^2"))
        with pytest.raises(CodeError):
            canonical_code(OMEGA, OMEGA)


class TestDecode:
    def test_round_trip(self):
        assert decode(canonical_code(5, OMEGA), 1000) == 5

    def test_slow_path_agrees(self):
        for g in range(20):
            assert decode(canonical_code(g, OMEGA), 10**5, fast=False) == g

    def test_two_cycle(self):
        code = finite_code([(1, 2), (2, 1), (1, 0)], OMEGA)
        assert isinstance(decode(code, 100), NotOrdinal)

    def test_omega_fast_path_only(self):
        code = canonical_code(OMEGA, WW)
        assert isinstance(decode(code, 1000, fast=False), Unknown)
        assert decode(code, 1000) == OMEGA

    def test_non_ordinal_set(self):
        # 0 = {1} with 1 = {2}, 2 = {}: collapse {{0}} is not an ordinal
        code = finite_code([(1, 0), (2, 1)], OMEGA)
        assert isinstance(decode(code, 100), NotOrdinal)

    def test_explicit_finite_code(self):
        # 0 = {1, 2}, 2 = {1}, 1 = {}: collapse {0, 1} = 2
        code = finite_code([(1, 0), (2, 0), (1, 2)], OMEGA)
        assert decode(code, 100) == 2


class TestValidate:
    def test_canonical_valid(self):
        assert validate(canonical_code(7, OMEGA), 10) == Valid()

    def test_duplicate_empty_fields(self):
        code = finite_code([(3, 0), (4, 0)], OMEGA)
        assert validate(code, 100) == Invalid("extensionality")

    def test_cycle(self):
        assert validate(finite_code([(1, 2), (2, 1)], OMEGA), 100) == Invalid("ill-founded")

    def test_cycle_beyond_budget(self):
        far = {godel_pair(1000, 1001), godel_pair(1001, 1000)}
        code = predicate_code(lambda c: c in far, OMEGA)
        assert isinstance(validate(code, 1000), Unknown)

    def test_cycle_within_window(self):
        near = {godel_pair(1, 2), godel_pair(2, 1)}
        code = predicate_code(lambda c: c in near, OMEGA)
        assert validate(code, 1000) == Invalid("ill-founded")


def test_json_formats():
    c = canonical_code(5, OMEGA)
    assert c.to_json() == {"canonical": "5", "alpha": "w"}
    assert decode(from_json(json.dumps(c.to_json())), 10) == 5
    f = finite_code([(1, 0)], OMEGA)
    assert f.to_json() == {"alpha": "w", "pairs": [["1", "0"]]}
    assert from_json({"alpha": "w", "pairs": [[1, 0]]}).pairs == f.pairs


def test_code_tape():
    t = code_tape(canonical_code(2, OMEGA))
    assert t.read_only
    assert [c for c in range(10) if t.read(c)] == [2, 5, 6]
    t = code_tape(canonical_code(OMEGA, WW))
    assert t.read(godel_pair(3, 0)) == 1 and t.read(godel_pair(0, 3)) == 0
