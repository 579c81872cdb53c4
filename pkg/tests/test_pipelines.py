import math

import numpy as np
import pytest

from bellrevival.config import parse_config
from bellrevival.pipelines import _d_fraction, _time_grid, map_cell, run_map, run_revival
from bellrevival.config import Quantity
from bellrevival.observables import TSIRELSON

PHYS = """
[physical]
omega0 = 5 GHz
g = 0.05 omega0
lambda = 0.001 omega0
J = -0.005 omega0
"""


def small_map(d_values):
    text = PHYS + f"""
[sweep]
d_values = {d_values}
lambda_values = logspace(-3, -1, 3) omega0
horizon = 150 inv_omega0
"""
    return run_map(parse_config(text).validate("map"), threads=1)


def test_map_periodicity_is_exact():
    a = small_map("linspace(0, 0.5, 5) lambda0")
    b = small_map("linspace(1, 1.5, 5) lambda0")
    for col in ("N_blp", "N_bell"):
        np.testing.assert_array_equal(a.column(col), b.column(col))


def test_d_fraction_snaps_to_period():
    k0 = 104.79
    lam0 = 2 * math.pi / k0
    assert _d_fraction(Quantity(1.25, "lambda0"), k0) == 0.25
    assert _d_fraction(Quantity(3 * lam0 + 0.25 * lam0, "m"), k0) == pytest.approx(0.25, abs=1e-11)


def test_map_cell_is_mirror_symmetric_about_node():
    t = _time_grid(150, 100)
    left = map_cell(math.pi - 0.4, 0.05, 0.01, -0.005, t)
    right = map_cell(math.pi + 0.4, 0.05, 0.01, -0.005, t)
    assert left == pytest.approx(right, rel=1e-9, abs=1e-12)


def test_map_cell_grid_refinement():
    coarse = map_cell(0.7, 0.05, 0.01, -0.005, _time_grid(200, 100))
    fine = map_cell(0.7, 0.05, 0.01, -0.005, _time_grid(200, 400))
    assert coarse[0] == pytest.approx(fine[0], rel=0.01)
    assert coarse[1] == pytest.approx(fine[1], rel=0.01)


def test_overdamped_cell_has_no_backflow():
    n, nb = map_cell(math.pi, 0.05, 1.0, -0.005, _time_grid(400, 100))
    assert n < 1e-3 and nb < 1e-3


REVIVAL = """
[physical]
omega0 = 5 GHz
gamma = 0.05 omega0
lambda = 0.066 omega0
J = -1e-3 omega0
d = 0.25 lambda0
[bath]
n_modes = 60
[sweep]
horizon = 1.3 TP
"""


@pytest.fixture(scope="module")
def revival_table():
    return run_revival(parse_config(REVIVAL).validate("revival"))


def test_revival_invariants(revival_table):
    tab = revival_table
    B = tab.column("B")
    assert np.all(B <= TSIRELSON + 1e-9)
    np.testing.assert_allclose(tab.column("s2"), 0.5, atol=1e-9)
    assert tab.column("I_AB")[0] == pytest.approx(0.0, abs=1e-12)
    assert tab.column("D")[0] == pytest.approx(1.0)
    assert tab.extras["t_p"] == pytest.approx(2 * math.pi / (2 * 0.066 * 7 / 59))


def test_revival_grid_refinement():
    base = parse_config(REVIVAL).validate("revival")
    fine = parse_config(REVIVAL + "samples_per_period = 400\n").validate("revival")
    a, b = run_revival(base).footer, run_revival(fine).footer
    assert a["N_blp"] == pytest.approx(b["N_blp"], rel=0.01)
    assert a["N_bell"] == pytest.approx(b["N_bell"], rel=0.01)


def test_revival_si_output_units():
    text = REVIVAL.replace("[bath]", "normalized = false\n[bath]")
    tab = run_revival(parse_config(text).validate("revival"))
    w0 = 2 * math.pi * 5e9
    assert tab.footer["T_P"] == pytest.approx(tab.extras["t_p"] / w0)
    assert tab.column("t")[1] == pytest.approx(2 * math.pi / 100 / w0)
