import math

import pytest

from bellrevival.config import (
    ListSpec,
    Quantity,
    RunConfig,
    load_config,
    parse_config,
    parse_list,
    parse_quantity,
)
from bellrevival.errors import ConfigError

BASE = """
[physical]
omega0 = 5 GHz
g = 0.05 omega0
lambda = 0.001 omega0
J = -0.005 omega0
"""


@pytest.mark.parametrize(
    "text,kind,expected",
    [
        ("5 GHz", "frequency", Quantity(2 * math.pi * 5e9, "rad/s")),
        ("3.2e10", "frequency", Quantity(3.2e10, "rad/s")),
        ("0.066 omega0", "frequency", Quantity(0.066, "omega0")),
        ("0.25 lambda0", "length", Quantity(0.25, "lambda0")),
        ("300 nm", "length", Quantity(300e-9, "m")),
        ("100 us", "time", Quantity(1e-4, "s")),
        ("3.5 TP", "time", Quantity(3.5, "TP")),
        ("400 inv_omega0", "time", Quantity(400.0, "inv_omega0")),
    ],
)
def test_parse_quantity(text, kind, expected):
    got = parse_quantity(text, kind)
    assert got.unit == expected.unit
    assert got.value == pytest.approx(expected.value, rel=1e-15)


@pytest.mark.parametrize("text,kind", [("5 parsec", "length"), ("fast", "time"), ("1 m", "frequency"), ("1 s", "length")])
def test_parse_quantity_rejects(text, kind):
    with pytest.raises(ConfigError):
        parse_quantity(text, kind, "x.y")


def test_parse_list_forms():
    spec = parse_list("linspace(0, 0.5, 3) lambda0", "length")
    assert [q.value for q in spec.quantities()] == [0.0, 0.25, 0.5]
    assert str(spec) == "linspace(0.0, 0.5, 3) lambda0"
    spec = parse_list("logspace(-2, 0, 3)", "number")
    assert [q.value for q in spec.quantities()] == pytest.approx([0.01, 0.1, 1.0])
    spec = parse_list("1 s, 100 us", "time")
    assert [q.value for q in spec.quantities()] == [1.0, 1e-4]
    spec = parse_list("linspace(1, 2, 2) ms", "time")
    assert [q.value for q in spec.quantities()] == [1e-3, 2e-3]
    with pytest.raises(ConfigError):
        parse_list("", "time")


def test_resolution_of_relative_units():
    cfg = parse_config(BASE).validate()
    p = cfg.params()
    assert p.omega0 == pytest.approx(2 * math.pi * 5e9)
    assert p.g == pytest.approx(0.05 * p.omega0, rel=1e-14)
    assert p.lam == pytest.approx(0.001 * p.omega0)
    assert p.J == pytest.approx(-0.005 * p.omega0)
    assert p.d == pytest.approx(p.lambda0 / 2)
    assert Quantity(2.0, "TP").in_si(1.0, 1.0, t_p=3.0) == 6.0
    with pytest.raises(ConfigError):
        Quantity(2.0, "TP").in_si(1.0, 1.0)


def test_lambda_override_holds_g_fixed():
    cfg = parse_config(BASE)
    p = cfg.params(lam=0.5 * cfg.omega0)
    assert p.g == pytest.approx(cfg.params().g)
    assert p.lam == pytest.approx(0.5 * cfg.omega0)


@pytest.mark.parametrize(
    "extra,message",
    [
        ("[physical]\ngamma = 0.1 omega0\n", "exactly one of gamma or g"),
        ("[sweep]\nsamples_per_period = 50\n", "samples_per_period"),
        ("[sweep]\nd_values = 0.3 lambda0, 0.1 lambda0\n", "strictly increasing"),
        ("[sweep]\nlambda_values = 0 omega0, 0.1 omega0\n", "lambda_values"),
        ("[sweep]\ndelta_d_fracs = 0.5, 2\n", "delta_d_fracs"),
        ("[initial]\nstate = ee\n", "initial.state"),
        ("[bath]\nn_modes = 1\n", "bath.n_modes"),
        ("[sensing]\nt_int = 1 s\nn_rep = 1, 2\n", "same length"),
    ],
)
def test_validation_messages(extra, message):
    text = BASE + extra
    if extra.startswith("[physical]"):
        text = BASE + extra.split("\n", 1)[1]
    with pytest.raises(ConfigError, match=message):
        parse_config(text).validate()


def test_structural_errors():
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config(BASE + "[plots]\nx = 1\n")
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config(BASE + "[bath]\nmodes = 3\n")
    with pytest.raises(ConfigError, match="malformed"):
        parse_config("omega0 = 1")
    with pytest.raises(ConfigError, match="integer"):
        parse_config(BASE + "[bath]\nn_modes = 2.5\n")
    with pytest.raises(ConfigError, match="boolean"):
        parse_config(BASE + "[bath]\nuse_k0_phase = maybe\n")
    with pytest.raises(ConfigError, match="together"):
        parse_config(BASE + "[sensing]\nt_int = 1 s\n")
    with pytest.raises(ConfigError, match="cannot read"):
        load_config("/nonexistent/run.ini")


def test_crb_requires_sensing_block():
    with pytest.raises(ConfigError):
        RunConfig().validate("crb")


@pytest.mark.parametrize("command", ["revival", "map", "lifetime", "crb"])
def test_round_trip_of_effective_config(command):
    text = BASE + "[bath]\nspan = 0.2 omega0\n[sweep]\nmin_prominence = 0.01\n[output]\npath = out.csv\n"
    cfg = parse_config(text).with_defaults(command).validate(command)
    again = parse_config(cfg.to_ini())
    assert again == cfg
    assert again.to_ini() == cfg.to_ini()


def test_defaults_per_command():
    cfg = parse_config(BASE)
    assert cfg.with_defaults("revival").sweep.horizon == Quantity(3.5, "TP")
    m = cfg.with_defaults("map").sweep
    assert m.horizon == Quantity(400.0, "inv_omega0")
    assert len(m.d_values.quantities()) == 40 and len(m.lambda_values.quantities()) == 40
    assert isinstance(cfg.with_defaults("lifetime").sweep.delta_d_fracs, ListSpec)
    assert cfg.with_defaults("crb").sensing.n_rep == (100000, 100000000)
