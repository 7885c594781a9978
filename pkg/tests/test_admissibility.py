"""Gram-matrix admissibility constants and the global constant formulas."""

import math

import numpy as np
import pytest

from wellposed.admissibility import (
    AdmissibilityReport,
    GlobalConstants,
    PairInterval,
    admissibility_report,
    control_gram,
    global_constants,
    observation_gram,
    pair_constant,
)
from wellposed.errors import DomainError, PreconditionError, StabilityError
from wellposed.heat import HeatConfig, build_heat_system
from wellposed.laxphillips import control_to_state, input_output_map
from wellposed.signals import Signal, lp_norm
from wellposed.spectral import DiagonalGenerator
from wellposed.system import SpectralSystem, m13_sup_scan


def scalar_system(alpha=-1.0, b=1.0, c=1.0, d=0.0):
    gen = DiagonalGenerator(np.array([alpha], dtype=complex), k=1.0,
                            omega=float(np.real(alpha)))
    return SpectralSystem(gen,
                          np.array([[b]], dtype=complex),
                          np.array([[c]], dtype=complex),
                          np.array([[d]], dtype=complex))


def random_system(rng, n_modes, n_inputs=2, n_outputs=2):
    re = -0.3 - 2.0 * rng.random(n_modes)
    im = rng.standard_normal(n_modes)
    gen = DiagonalGenerator(re + 1j * im, k=1.0, omega=float(re.max()))
    b = rng.standard_normal((n_modes, n_inputs)) + 1j * rng.standard_normal((n_modes, n_inputs))
    c = rng.standard_normal((n_outputs, n_modes)) + 1j * rng.standard_normal((n_outputs, n_modes))
    return SpectralSystem(gen, b, c, np.zeros((n_outputs, n_inputs), dtype=complex))


def quadrature_observation_energy(sys, t0, x, dt=1e-4):
    # trapezoid of ||C e^(As) x||^2 over [0, t0]
    s = np.arange(0.0, t0 + dt / 2, dt)
    modes = np.exp(np.outer(s, sys.gen.eigenvalues)) * x
    vals = np.sum(np.abs(modes @ sys.observation.T) ** 2, axis=1)
    return float(np.trapezoid(vals, dx=dt))


class TestObservationGram:
    def test_single_mode_closed_form(self):
        sys = scalar_system()
        gram, m_obs = observation_gram(sys, 1.0)
        expected = (1.0 - math.exp(-2.0)) / 2.0
        assert gram.shape == (1, 1)
        assert m_obs == pytest.approx(0.43233235838169365, rel=1e-15)
        assert m_obs == pytest.approx(expected, rel=1e-15)

    def test_zero_observation_gives_zero(self):
        sys = scalar_system(c=0.0)
        _, m_obs = observation_gram(sys, 1.0)
        assert m_obs == 0.0

    def test_matches_quadrature_on_random_system(self):
        rng = np.random.default_rng(7)
        sys = random_system(rng, 3)
        gram, m_obs = observation_gram(sys, 1.0)
        # eigen-decomposition gives the maximizer, so the sup is attained
        vals, vecs = np.linalg.eigh(0.5 * (gram + gram.conj().T))
        top = vecs[:, -1]
        attained = quadrature_observation_energy(sys, 1.0, top)
        assert attained == pytest.approx(m_obs, rel=1e-6)
        for _ in range(200):
            x = rng.standard_normal(3) + 1j * rng.standard_normal(3)
            x = x / np.linalg.norm(x)
            assert quadrature_observation_energy(sys, 1.0, x) <= m_obs * (1 + 1e-6)

    def test_monotone_in_window(self):
        rng = np.random.default_rng(11)
        sys = random_system(rng, 4)
        values = [observation_gram(sys, t0)[1] for t0 in (0.1, 0.5, 1.0, 2.0, 10.0)]
        assert all(a <= b * (1 + 1e-12) for a, b in zip(values, values[1:]))

    def test_heat_trace_bound(self):
        sys = build_heat_system(HeatConfig(n_modes=32))
        _, m_obs = observation_gram(sys, 1.0)
        n = np.arange(32)
        trace_bound = float(np.sum(1.0 / (np.pi * (1.0 + n**2))))
        assert 0.0 < m_obs <= trace_bound

    def test_rejects_bad_window(self):
        sys = scalar_system()
        with pytest.raises(DomainError):
            observation_gram(sys, 0.0)


class TestControlGram:
    def test_single_mode_closed_form(self):
        sys = scalar_system()
        _, m_ctl = control_gram(sys, 1.0)
        assert m_ctl == pytest.approx(math.sqrt((1.0 - math.exp(-2.0)) / 2.0), rel=1e-15)
        assert m_ctl == pytest.approx(0.65751985, abs=5e-8)

    def test_zero_control_gives_zero(self):
        sys = scalar_system(b=0.0)
        _, m_ctl = control_gram(sys, 1.0)
        assert m_ctl == 0.0

    def test_two_mode_gram_matches_quadrature(self):
        b = np.array([[math.sqrt(1.0 / math.pi)], [-math.sqrt(2.0 / math.pi)]])
        gen = DiagonalGenerator(np.array([-1.0, -2.0], dtype=complex), omega=-1.0)
        sys = SpectralSystem(gen, b.astype(complex),
                             np.zeros((1, 2), dtype=complex),
                             np.zeros((1, 1), dtype=complex))
        gram, m_ctl = control_gram(sys, 1.0)
        dt = 1e-4
        r = np.arange(0.0, 1.0 + dt / 2, dt)
        ker = np.exp(np.outer(sys.gen.eigenvalues, 1.0 - r)) * b  # (2, len(r))
        ref = np.trapezoid(ker[:, None, :] * ker[None, :, :].conj(), dx=dt, axis=2)
        assert np.allclose(gram, ref, rtol=1e-6, atol=1e-10)
        assert m_ctl == pytest.approx(math.sqrt(np.linalg.eigvalsh(ref)[-1]), rel=1e-6)

    def test_reachable_state_bounded_by_constant(self):
        rng = np.random.default_rng(23)
        sys = random_system(rng, 3)
        _, m_ctl = control_gram(sys, 1.0)
        for _ in range(20):
            u = Signal(0.0, 0.05, rng.standard_normal((21, 2)))
            reached = control_to_state(sys, 1.0, u)
            assert np.linalg.norm(reached) <= m_ctl * lp_norm(u, 2.0) * (1 + 1e-9)

    def test_monotone_in_window(self):
        rng = np.random.default_rng(31)
        sys = random_system(rng, 4)
        values = [control_gram(sys, t0)[1] for t0 in (0.1, 0.5, 1.0, 2.0, 10.0)]
        assert all(a <= b * (1 + 1e-12) for a, b in zip(values, values[1:]))


class TestPairConstant:
    def test_wraps_scan_interval(self):
        sys = scalar_system()
        scan = m13_sup_scan(sys, 50.0, 501)
        pair = pair_constant(sys, scan)
        assert isinstance(pair, PairInterval)
        assert pair.lower == scan.grid_sup
        assert pair.upper == scan.upper_bound
        assert pair.lower <= pair.upper

    def test_requires_scan(self):
        with pytest.raises(PreconditionError):
            pair_constant(scalar_system(), None)


class TestGlobalConstants:
    def test_single_mode_values(self):
        m_obs = (1.0 - math.exp(-2.0)) / 2.0
        m_ctl = math.sqrt(m_obs)
        consts = global_constants(m_obs, m_ctl, 1.0, k=1.0, omega=-1.0)
        # the geometric correction for these numbers is exactly one half
        assert consts.m_c == pytest.approx(m_obs + 0.5, rel=1e-14)
        assert consts.m_c == pytest.approx(0.9323323583816936, rel=1e-14)
        expected_b = m_ctl * (1.0 + 1.0 / (1.0 - math.exp(-1.0)))
        assert consts.m_b == pytest.approx(expected_b, rel=1e-14)
        assert consts.m_b == pytest.approx(1.69770, abs=1e-4)
        expected_bc = 1.0 + math.sqrt(consts.m_c) * consts.m_b / (1.0 - math.exp(-1.0))
        assert consts.m_bc == pytest.approx(expected_bc, rel=1e-14)

    def test_zero_local_constants_collapse(self):
        consts = global_constants(0.0, 0.0, 2.5, k=1.0, omega=-1.0)
        assert consts.m_c == 0.0
        assert consts.m_b == 0.0
        assert consts.m_bc == 2.5

    def test_rejects_nonnegative_growth_rate(self):
        with pytest.raises(StabilityError):
            global_constants(1.0, 1.0, 1.0, k=1.0, omega=0.0)

    def test_rejects_bad_parameters(self):
        with pytest.raises(DomainError):
            global_constants(1.0, 1.0, 1.0, k=0.5, omega=-1.0)
        with pytest.raises(DomainError):
            global_constants(1.0, 1.0, 1.0, k=1.0, omega=-1.0, p=0.5)
        with pytest.raises(DomainError):
            global_constants(-1.0, 1.0, 1.0, k=1.0, omega=-1.0)

    def test_uniform_in_time_single_mode(self):
        # int_0^t |e^(-s)|^2 ds = (1 - e^(-2t))/2 stays below M_C for all t
        m_obs = (1.0 - math.exp(-2.0)) / 2.0
        consts = global_constants(m_obs, math.sqrt(m_obs), 1.0, k=1.0, omega=-1.0)
        for t in (2.0, 10.0, 100.0):
            assert (1.0 - math.exp(-2.0 * t)) / 2.0 <= consts.m_c

    def test_long_horizon_reachable_state_bounded(self):
        rng = np.random.default_rng(41)
        sys = random_system(rng, 3)
        _, m_obs = observation_gram(sys, 1.0)
        _, m_ctl = control_gram(sys, 1.0)
        consts = global_constants(m_obs, m_ctl, 1.0, k=sys.gen.k, omega=sys.gen.omega)
        for t in (2.0, 10.0):
            n = int(round(t / 0.05))
            u = Signal(0.0, 0.05, rng.standard_normal((n + 1, 2)))
            reached = control_to_state(sys, t, u)
            assert np.linalg.norm(reached) <= consts.m_b * lp_norm(u, 2.0) * (1 + 1e-9)


class TestReport:
    def test_report_assembly(self):
        sys = scalar_system()
        scan = m13_sup_scan(sys, 50.0, 501)
        report = admissibility_report(sys, 1.0, scan)
        assert isinstance(report, AdmissibilityReport)
        assert report.t0 == 1.0 and report.p == 2.0
        assert report.m_obs == pytest.approx(0.43233235838169365, rel=1e-15)
        assert report.m_pair.upper == scan.upper_bound
        ref = global_constants(report.m_obs, report.m_ctl, report.m_pair.upper,
                               k=1.0, omega=-1.0)
        assert report.constants == ref

    def test_report_needs_scan(self):
        with pytest.raises(PreconditionError):
            admissibility_report(scalar_system(), 1.0, None)

    def test_output_energy_bounded_by_pair_constant(self):
        sys = build_heat_system(HeatConfig(n_modes=16))
        scan = m13_sup_scan(sys, 200.0, 2001)
        pair = pair_constant(sys, scan)
        rng = np.random.default_rng(53)
        t, dt = 3.0, 1e-2
        n = int(round(t / dt))
        # smooth band-limited input keeps the discretization error tiny
        r = dt * np.arange(n + 1)
        u = Signal(0.0, dt, np.stack([np.sin(2.0 * r) * np.exp(-r),
                                      np.cos(3.0 * r) * (r / t) * (1 - r / t)], axis=1))
        y = input_output_map(sys, t, u)
        assert lp_norm(y, 2.0) <= pair.upper * lp_norm(u, 2.0) * (1 + 1e-6) + 1e-9
