import csv
import json
import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from cgl_lab.discretization import BC, Field, Grid, norm_l2, random_field
from cgl_lab.errors import BlowUp
from cgl_lab.evolution import (
    DIAGNOSTIC_COLUMNS,
    Outcome,
    SolverConfig,
    run,
    step,
)
from cgl_lab.params import ParamSet

LINE = Grid.interval(0.0, 1.0, 129)
SMOOTH = ParamSet(1, 0.5, 1, 0.7, 1, 0.3, 0.2, 1, 2)


def sine(grid=LINE, amp=1.0):
    return Field.from_function(grid, lambda x: amp * np.sin(np.pi * x))


class TestConfig:
    @pytest.mark.parametrize("kw", [dict(dt=0.0), dict(dt=-1.0), dict(t_end=-1.0),
                                    dict(diag_stride=0), dict(scheme="rk")])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            SolverConfig(**kw)

    def test_default_steps(self):
        assert SolverConfig().resolved_dt(LINE, SMOOTH) == 1e-3
        h = LINE.spacing[0]
        assert SolverConfig(scheme="cn").resolved_dt(LINE, SMOOTH) == pytest.approx(0.25 * h * h)


class TestLinearFlow:
    def test_zero_data(self):
        r = run(Field.zeros(LINE), SMOOTH, SolverConfig(dt=1e-2, t_end=0.5))
        assert r.outcome is Outcome.COMPLETED
        assert np.all(r.field.values == 0)
        cols = r.log.columns()
        assert np.all(np.nan_to_num(cols[:, 1:]) == 0)

    def test_heat_decay(self):
        k, a, t = 0.5, 1.0, 0.4
        p = ParamSet(a, 0.0, 0.0, 0.0, 0.0, 0.0, k, 2, 4)
        r = run(sine(), p, SolverConfig(dt=1e-2, t_end=t))
        expected = math.exp((k - a * math.pi ** 2) * t) * norm_l2(sine())
        assert norm_l2(r.field) == pytest.approx(expected, abs=1e-8)

    def test_complex_diffusion_modewise(self):
        p = ParamSet(1, 0.7, 0, 0, 0, 0, 0.5, 2, 4)
        u = Field.from_function(LINE, lambda x: np.sin(np.pi * x) + 0.2 * np.sin(3 * np.pi * x))
        r = run(u, p, SolverConfig(dt=1e-2, t_end=0.3))
        x = LINE.axes[0]
        rate = lambda m: np.exp((-(1 + 0.7j) * (m * np.pi) ** 2 + 0.5) * 0.3)
        exact = rate(1) * np.sin(np.pi * x) + 0.2 * rate(3) * np.sin(3 * np.pi * x)
        assert np.max(np.abs(r.field.values - exact)) < 1e-10

    def test_neumann_rectangle_mode(self):
        g = Grid.rectangle(0, 1, 0, 2, 33, 17)
        p = ParamSet(1, 0.7, 0, 0, 0, 0, 0.5, 2, 4)
        u = Field.from_function(g, lambda x, y: np.cos(np.pi * x) * np.cos(np.pi * y / 2), BC.NEUMANN)
        r = run(u, p, SolverConfig(dt=1e-2, t_end=0.3))
        X, Y = g.mesh()
        exact = (np.exp((-(1 + 0.7j) * 1.25 * np.pi ** 2 + 0.5) * 0.3)
                 * np.cos(np.pi * X) * np.cos(np.pi * Y / 2))
        assert np.max(np.abs(r.field.values - exact)) < 1e-10

    def test_crank_nicolson_second_order_in_space(self):
        p = ParamSet(1, 0, 0, 0, 0, 0, 0, 2, 4)
        errs = []
        for n in (33, 65, 129):
            g = Grid.interval(0, 1, n)
            r = run(sine(g), p, SolverConfig(dt=1e-4, t_end=0.1, scheme="cn"))
            exact = math.exp(-math.pi ** 2 * 0.1) * np.sin(np.pi * g.axes[0])
            errs.append(np.max(np.abs(r.field.values - exact)))
        orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(orders > 1.9)


class TestNonlinearFlow:
    def test_orbit_circle(self):
        # b = -1, k = 1, c = 0: |u| = 1 is invariant, one turn takes 2 pi
        p = ParamSet(1, 0.3, -1, 1, 0, 0, 1, 2, 4)
        g = Grid.interval(0, 1, 5)
        u = Field(g, np.ones(5, dtype=complex), BC.NEUMANN)
        r = run(u, p, SolverConfig(dt=2.5e-4, t_end=2 * math.pi, diag_stride=1000))
        v = r.field.values
        assert np.max(np.abs(np.abs(v) - 1.0)) < 1e-8
        assert np.ptp(v.real) == 0 and np.ptp(v.imag) == 0

    def test_embedding_of_ode(self):
        p = ParamSet(1, 0.3, 1, 1, 1, 0, 0, 1, 3)
        z0 = 0.7 + 0.2j
        T = 2 * math.pi

        def ode(_, y):
            z = y[0] + 1j * y[1]
            m = abs(z)
            w = (1 + 1j) * m * z - m ** 3 * z
            return [w.real, w.imag]

        ref = solve_ivp(ode, (0, T), [z0.real, z0.imag], rtol=1e-12, atol=1e-14).y[:, -1]
        g = Grid.interval(0, 1, 5)
        r = run(Field(g, np.full(5, z0), BC.NEUMANN), p, SolverConfig(dt=1e-3, t_end=T))
        assert abs(r.field.values[0] - complex(*ref)) < 1e-6

    def test_gauge_equivariance(self):
        u = Field.from_function(LINE, lambda x: np.sin(np.pi * x) * (1 + 0.5j * x))
        cfg = SolverConfig(dt=1e-3, t_end=0.2)
        phase = np.exp(0.7j)
        a = run(u, SMOOTH, cfg).field.values
        b = run(u * phase, SMOOTH, cfg).field.values
        assert np.max(np.abs(b - phase * a)) < 1e-10

    def test_step_matches_run(self):
        u = random_field(LINE, 8, seed=1)
        cfg = SolverConfig(dt=1e-3, t_end=1e-3)
        assert np.array_equal(step(u, SMOOTH, cfg).values, run(u, SMOOTH, cfg).field.values)

    def test_schemes_agree(self):
        u = sine(Grid.interval(0, 1, 257))
        a = run(u, SMOOTH, SolverConfig(dt=1e-4, t_end=0.05)).field
        b = run(u, SMOOTH, SolverConfig(dt=1e-4, t_end=0.05, scheme="cn")).field
        assert np.max(np.abs(a.values - b.values)) < 1e-4

    def test_mass_balance_small(self):
        u = Field.from_function(Grid.interval(0, 1, 257),
                                lambda x: np.sin(np.pi * x) + 0.3j * np.sin(2 * np.pi * x))
        p = ParamSet(1, 0.5, 1, 0.3, 1, 0.2, 0.5, 2, 4)
        r = run(u, p, SolverConfig(dt=1e-3, t_end=0.2))
        assert np.nanmax(r.log.mass_residual) < 5e-3
        assert np.isnan(r.log.mass_residual[0]) and np.isnan(r.log.mass_residual[-1])


class TestBlowUp:
    params = ParamSet(1, 0, 1, 0, 0, 0, 0, 2, 4)

    def test_detected(self):
        u = sine(Grid.interval(0, 1, 257), 6.0)
        r = run(u, self.params, SolverConfig(dt=1e-3, t_end=1.0))
        assert r.outcome is Outcome.BLOWUP
        assert 0 < r.time < 1.0
        assert r.field.sup > 6.0

    def test_step_raises(self):
        u = sine(Grid.interval(0, 1, 65), 50.0)
        with pytest.raises(BlowUp):
            for _ in range(200):
                u = step(u, self.params, SolverConfig(dt=1e-3, blowup_threshold=100.0))

    def test_initial_above_threshold(self):
        with pytest.raises(ValueError):
            run(sine(amp=10.0), self.params, SolverConfig(blowup_threshold=5.0))


class TestOutputs:
    def test_diagnostics_csv(self, tmp_path):
        r = run(sine(), SMOOTH, SolverConfig(dt=1e-2, t_end=0.1, diag_stride=2))
        path = tmp_path / "d.csv"
        r.log.to_csv(path)
        with open(path) as fh:
            rows = list(csv.reader(fh))
        assert tuple(rows[0]) == DIAGNOSTIC_COLUMNS
        t = [float(row[0]) for row in rows[1:]]
        assert t[0] == 0.0 and t[-1] == pytest.approx(0.1)
        assert np.all(np.diff(t) > 0)
        assert len(t) == 6

    def test_summary_json(self):
        r = run(sine(), SMOOTH, SolverConfig(dt=1e-2, t_end=0.05))
        d = json.loads(r.to_json())
        assert d["outcome"] == "Completed" and d["steps"] == 5 and d["spec_version"] == 1
