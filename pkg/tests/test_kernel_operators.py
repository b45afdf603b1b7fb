import json
import math

import numpy as np
import pytest
from scipy import stats

from inviscid_damping import data
from inviscid_damping import flow_profile as fp
from inviscid_damping import kernel_operators as ko
from inviscid_damping import wronskian as wr


def sinh_gauss(y):
    return np.sinh(y) * np.exp(-y * y)


def sech(y):
    return 1.0 / np.cosh(y)


def zero(y):
    return np.zeros_like(np.asarray(y, dtype=float))


# -- calT -------------------------------------------------------------------------


def test_calT_gaussian_integral_at_zero():
    assert ko.calT(sinh_gauss, 0.0, 1)[0] == pytest.approx(math.sqrt(math.pi), abs=1e-6)


def test_calT_even_data_vanishes_at_zero():
    assert abs(ko.calT(data.gaussian, 0.0, 1)[0]) < 1e-12


def test_calT_limit_jump():
    c = 0.3
    pv, lp, lm = ko.calT(data.gaussian, c, 1)
    fc = data.gaussian(np.array([fp.critical_point(c)]))[0]
    assert lp - lm == pytest.approx(2j * math.pi * fc / (1 - c * c) ** 2, rel=1e-14)


def test_calT_rejects_large_c():
    with pytest.raises(ValueError):
        ko.calT(data.gaussian, 0.9995, 1)
    with pytest.raises(TypeError):
        ko.calT(np.ones(5), 0.1, 1)


@pytest.mark.property
def test_calT_half_residue(rng):
    for c in rng.uniform(-0.9, 0.9, 5):
        pv, lp, lm = ko.calT(data.bump, float(c), int(rng.integers(1, 4)))
        assert abs(0.5 * (lp + lm) - pv) < 1e-14 * max(1.0, abs(pv))


@pytest.mark.property
def test_calT_matches_excision(rng):
    for _ in range(10):
        s, k = rng.uniform(-1, 1), rng.uniform(0.5, 2)
        f = lambda y, s=s, k=k: np.exp(-k * (y - s) ** 2)
        c = float(rng.uniform(-0.8, 0.8))
        alpha = int(rng.integers(1, 4))
        assert abs(ko.calT(f, c, alpha)[0] - ko.calT_excision(f, c, alpha)) < 1e-4


# -- calT_tilde --------------------------------------------------------------------


def test_calT_tilde_definition_and_zero():
    for c in (0.1, -0.3):
        lhs = ko.calT_tilde(sinh_gauss, c) * c + ko.calT(sinh_gauss, 0.0, 1)[0]
        assert lhs == pytest.approx(ko.calT(sinh_gauss, c, 1)[0], rel=1e-13)
    assert ko.calT_tilde(zero, 0.02) == 0
    with pytest.raises(ValueError):
        ko.calT_tilde(sinh_gauss, 0.6)


def test_calT_tilde_continuous_at_switch():
    s = wr.C_SWITCH
    for side in (1, -1):
        jump = ko.calT_tilde(sinh_gauss, side * s * (1 - 1e-9)) - ko.calT_tilde(sinh_gauss, side * s)
        assert abs(jump) < 1e-5


# -- Gamma -------------------------------------------------------------------------


def test_gamma_at_zero_is_minus_sech():
    y = np.r_[-np.linspace(0.1, 5, 50), np.linspace(0.1, 5, 50)]
    G = ko.gamma_fn(y, 0.0, 1)
    assert np.max(np.abs(G / -sech(y) - 1)) < 1e-6
    assert np.all(G * sech(y) < 0)


def test_gamma_tail_decays():
    sol = ko.real_solution(0.4, 2)
    d = np.linspace(4, 14, 30)
    for side in (1, -1):
        G = sol.gamma(sol.y_c + side * d)[0]
        fit = stats.linregress(d, np.log(np.abs(G)))
        assert fit.slope < 0


@pytest.mark.property
def test_gamma_rayleigh_residual(rng):
    c = float(rng.uniform(-0.8, 0.8))
    alpha = int(rng.integers(1, 4))
    sol = ko.real_solution(c, alpha)
    h = 1e-3
    base = np.r_[np.linspace(sol.y_c - 4, sol.y_c - 0.05, 40), np.linspace(sol.y_c + 0.05, sol.y_c + 4, 40)]
    offs = np.arange(-2, 3) * h
    G = sol.gamma((base[:, None] + offs).ravel())[0].reshape(base.size, 5)
    d2 = (-G[:, 0] + 16 * G[:, 1] - 30 * G[:, 2] + 16 * G[:, 3] - G[:, 4]) / (12 * h * h)
    res = d2 - alpha ** 2 * G[:, 2] - fp.d2u(base) / fp.u_minus_c(base, c) * G[:, 2]
    assert np.max(np.abs(res)) < 1e-4 * np.max(np.abs(G))


# -- mu, Lambda, K ------------------------------------------------------------------


def test_mu_zero_data():
    assert ko.mu(0.3, 2, zero) == 0


def test_mu_small_c_limit_alpha1():
    f = data.odd_gaussian
    lim = -ko.calT(f, 0.0, 1)[0] / (2 * math.pi ** 2)
    err = {}
    for c in (1e-2, -1e-2, 1e-3, -1e-3):
        err[c] = abs(c * ko.mu(c, 1, f) - lim) / abs(lim)
    assert max(err[1e-3], err[-1e-3]) < max(err[1e-2], err[-1e-2])
    assert max(err[1e-3], err[-1e-3]) < 1e-3
    with pytest.raises(ZeroDivisionError):
        ko.mu(0.0, 1, f)


def test_mu_alpha2_bounded():
    cs = np.linspace(-0.95, 0.95, 39)
    for c in cs:
        sol = ko.real_solution(c, 2)
        m = ko.mu(c, 2, data.gaussian)
        T = sol.calT(data.gaussian)[0]
        fc = data.gaussian(np.array([sol.y_c]))[0]
        # the denominator never drops below its c = 0 value A(0, 2)^2 = 9
        assert abs(m) <= (2 * abs(c) * sol.X * abs(T) + abs(sol.A) * abs(fc)) / 9 + 1e-12


def test_mu_equals_lambda1_form():
    for c in (-0.7, 0.2, 0.55):
        sol = ko.real_solution(c, 2)
        D = sol.A ** 2 + 4 * math.pi ** 2 * c * c
        assert ko.mu(c, 2, data.bump) == pytest.approx(-sol.X * ko.lambda1(data.bump, c, 2) / D, rel=1e-13)


def test_lambda2_sech_at_zero():
    assert ko.lambda2(sech, 0.0, 1) == pytest.approx(-8 / 3, abs=1e-6)


def test_lambdas_linear():
    assert ko.lambda1(zero, 0.3, 1) == 0
    assert ko.lambda2(zero, 0.3, 1) == 0
    assert ko.lambda1_tilde(zero, 0.02) == 0


def test_lambda2_tilde_definition():
    T0 = ko.calT(lambda y: fp.d2u(y) * sech(y), 0.0, 1)[0]
    for c in (0.1, -0.2):
        assert c * ko.lambda2_tilde(sech, c) == pytest.approx(ko.lambda2(sech, c, 1) - T0, rel=1e-12)


def test_lambda2_tilde_continuous_near_zero():
    cs = np.linspace(-0.1, 0.1, 11)
    data_ = ko.TildeData([lambda y: fp.d2u(y) * sech(y)])
    vals = np.array([ko.lambda2_tilde(sech, c, data_) for c in cs])
    assert np.all(np.isfinite(vals))
    # modulus of continuity on a 0.02 step stays comparable to the variation over the interval
    assert np.max(np.abs(np.diff(vals))) < 0.25 * max(np.ptp(vals.real) + np.ptp(vals.imag), 1e-12) + 1e-6


def test_lambda_tilde_rejects_large_c():
    with pytest.raises(ValueError):
        ko.lambda1_tilde(sech, 0.7)
    with pytest.raises(ValueError):
        ko.lambda2_tilde(sech, -0.5)


def test_kernel_K_examples():
    cs = np.linspace(-0.95, 0.95, 39)
    vals = np.array([ko.kernel_K(data.gaussian, sech, c, 2) for c in cs])
    l1 = np.trapezoid(np.abs(vals), cs)
    assert math.isfinite(l1) and l1 > 0
    for c in (-0.2, 0.0, 0.24):
        assert ko.kernel_K(data.gaussian, sech, c, 2, "K1") == 0
    assert ko.kernel_K(zero, sech, 0.3, 2) == 0
    with pytest.raises(ValueError):
        ko.kernel_K(data.gaussian, sech, 0.3, 2, "K9")
    with pytest.raises(ValueError):
        ko.kernel_K(data.gaussian, sech, 0.3, 2, "K0")


def test_kernel_K_pieces_sum_for_alpha1():
    f = data.odd_gaussian
    for c in (0.1, 0.3, 0.45):
        full = ko.kernel_K(f, sech, c, 1)
        K1 = ko.kernel_K(f, sech, c, 1, "K1")
        assert ko.chi0(c) * full + K1 == pytest.approx(full, rel=1e-12)


# -- cut-offs ------------------------------------------------------------------------


def test_cutoffs():
    c = np.linspace(-1, 1, 401)
    assert np.array_equal(ko.chi0(c) + ko.chi1(c), np.ones_like(c))
    assert np.all(ko.chi0(c[np.abs(c) <= 0.25]) == 1)
    assert np.all(ko.chi0(c[np.abs(c) >= 0.5]) == 0)
    assert np.array_equal(ko.chi0(c), ko.chi0(-c))


# -- inhomogeneous solution and LAPs ----------------------------------------------


def test_inhomogeneous_zero_data():
    sol = ko.solve_inhomogeneous(fp.spectral_point(0.2 + 0.01j, 1), zero)
    assert np.all(sol.Phi == 0)
    with pytest.raises(ValueError):
        ko.solve_inhomogeneous(fp.spectral_point(0.2, 1), zero)


def test_inhomogeneous_consistency():
    sol = ko.solve_inhomogeneous(fp.spectral_point(0.5 - 0.02j, 2), data.bump)
    assert sol.defect < 1e-8
    # mu coefficient is -T(f)/W
    assert abs(sol.W - wr.wronskian_direct(sol.point)) < 1e-10 * abs(sol.W)


def test_embedding_lap():
    y = np.array([-2.0, -1.0, 1.0, 2.0])
    f = data.odd_gaussian
    got = ko.embedding_lap(f, 1e-3, math.pi / 2, y)
    ref = ko.embedding_lap_limit(f, y, side=1)
    assert np.max(np.abs(got - ref) / np.abs(ref)) < 1e-2


def test_off_eigenvalue_lap():
    y = np.array([-2.0, -1.0, 1.0, 2.0])
    errs = []
    for eps in (1e-2, 1e-3, 1e-4):
        sol = ko.solve_inhomogeneous(fp.spectral_point(complex(0.4, eps), 2), data.gaussian)
        ref = ko.phi_plus_minus(data.gaussian, 0.4, 2, y, 1)
        errs.append(np.max(np.abs(sol.at(y) - ref)) / np.max(np.abs(ref)))
    assert errs[0] > errs[1] > errs[2]
    assert errs[-1] < 1e-3


@pytest.mark.parametrize("delta", [1e-2, 1e-3])
def test_angular_average(delta):
    y = np.array([-2.0, -1.0, 1.0, 2.0])
    f = data.gaussian
    got = ko.angular_average(f, delta, y, n=16)
    ref = 0.5 * f(np.array([0.0]))[0] * sech(y)
    assert np.max(np.abs(got - ref) / np.abs(ref)) < 2e-2


def test_lap_json(tmp_path):
    ko.write_lap_json({"deltas": np.array([1e-2, 1e-3]), "limit": 1 + 2j}, tmp_path / "lap.json")
    doc = json.loads((tmp_path / "lap.json").read_text())
    assert doc["deltas"] == [1e-2, 1e-3]


# -- kernel table --------------------------------------------------------------------


def test_table_invariants(table_a2):
    g, tab = table_a2
    assert np.allclose(tab.chi0_vals + tab.chi1_vals, 1.0, atol=0, rtol=0)
    assert np.all(np.diff(tab.c_grid) > 0) and np.all(np.abs(tab.c_grid) < 1)
    for i in (0, tab.c_grid.size // 3, tab.c_grid.size - 1):
        c = tab.c_grid[i]
        assert tab.A_vals[i] == pytest.approx(wr.a_of(c, 2), abs=1e-9)
        assert tab.mu_vals[0, i] == pytest.approx(ko.mu(c, 2, data.gaussian), rel=1e-9, abs=1e-12)


def test_table_csv(tmp_path, table_a2):
    _, tab = table_a2
    tab.to_csv(tmp_path / "k.csv")
    lines = (tmp_path / "k.csv").read_text().splitlines()
    assert len(lines) == tab.c_grid.size + 1
