import json
import math

import numpy as np
import pytest
from hypothesis import given, settings

from cmvzeros.errors import ModeViolation, ParameterFileError, UnitModulusParameter
from cmvzeros.schur import (
    constant, derived, disk_random, dump_json, generate, load_json, loads_json, save_json, validate,
)
from strategies import sequences


def test_positive_auto():
    s = validate([0.5, 0.5])
    assert s.definiteness == "positive" and s.N == 2


def test_quasi_sign():
    s = validate([2.0])
    assert s.definiteness == "quasi"
    assert s.scalars.eps[1] == -1


def test_unit_modulus_rejected():
    with pytest.raises(UnitModulusParameter) as exc:
        validate([1.0])
    assert exc.value.k == 1
    with pytest.raises(UnitModulusParameter):
        validate([0.3, 1j * (1 + 1e-13)])


def test_positive_mode_violation():
    with pytest.raises(ModeViolation):
        validate([0.5, 1.5], mode="positive")


def test_derived_half():
    d = derived(validate([0.5]))
    assert d.rho[1] == pytest.approx(math.sqrt(0.75), abs=1e-15)
    assert d.eps[1] == 1
    assert d.kappa[1] == pytest.approx(1 / math.sqrt(0.75), abs=1e-15)


def test_derived_two():
    d = derived(validate([2.0]))
    assert d.rho[1] == pytest.approx(math.sqrt(3), abs=1e-15)
    assert d.eps[1] == -1
    assert d.rhohat[1] == pytest.approx(-math.sqrt(3), abs=1e-15)


def test_derived_free():
    d = derived(validate([0.0]))
    assert (d.rho[1], d.kappa[1], d.e[1]) == (1, 1, 1)


@given(sequences(quasi=True))
def test_scalar_identities(s):
    d = s.scalars
    mod2 = np.abs(s.padded[1:]) ** 2
    assert np.allclose(d.rho[1:] ** 2, np.abs(1 - mod2))
    assert np.all(d.rhohat == d.eps * d.rho)
    assert np.allclose(d.kappa[1:] * np.cumprod(d.rho[1:]), 1)
    assert np.all(d.e[1:] == np.cumprod(d.eps[1:]))
    assert np.all(d.eps[1:] == np.where(mod2 < 1, 1, -1))


def test_generate_constant():
    assert np.array_equal(generate({"constant": 0.5}, 3).params, [0.5, 0.5, 0.5])


def test_disk_random_reproducible():
    a = disk_random(0.2, 0.8, 7, 4)
    b = disk_random(0.2, 0.8, 7, 4)
    assert a == b and a.N == 4
    assert np.all((np.abs(a.params) >= 0.2) & (np.abs(a.params) <= 0.8))


def test_json_round_trip(tmp_path):
    s = validate([0.1 + 0.2j, 1.7 - 0.3j, 1 / 3])
    p = tmp_path / "s.json"
    save_json(s, p)
    assert load_json(p) == s
    assert loads_json(dump_json(s)) == s


def test_malformed_file_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "params": [\n    [0.1, 0.2],\n    [0.3]\n  ]\n}\n')
    with pytest.raises(ParameterFileError) as exc:
        load_json(p)
    assert exc.value.line == 4


def test_unit_modulus_in_file(tmp_path):
    p = tmp_path / "unit.json"
    p.write_text(json.dumps({"params": [[0.1, 0], [0, 1]]}, indent=1))
    with pytest.raises(ParameterFileError) as exc:
        load_json(p)
    assert exc.value.line is not None


def test_missing_file(tmp_path):
    with pytest.raises(ParameterFileError):
        load_json(tmp_path / "nope.json")


@settings(max_examples=30)
@given(sequences(quasi=True), )
def test_rotation_keeps_moduli(s):
    r = s.rotated(0.7)
    assert np.allclose(np.abs(r.params), np.abs(s.params))
    assert r.definiteness == s.definiteness


def test_constant_helper():
    assert constant(0.25j, 2).a(2) == 0.25j
    assert constant(0.25j, 2).a(0) == 1
