import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tunnelqs import (
    BarrierSuppressionError,
    barrier_geometry,
    delay_set,
    keldysh_gamma,
    make_system,
    photon_absorption_delay,
)
from tunnelqs.atomic import AtomicSystem
from tunnelqs.constants import au_time_as, c_au

# subatomic-field fraction F/F_a; the upper end touches barrier suppression
frac_st = st.floats(min_value=1e-6, max_value=1.0)
z_st = st.floats(min_value=1.0, max_value=100.0)


class TestSystem:
    def test_defaults(self):
        s = make_system(18.0)
        assert s.Zeff == 18.0
        assert s.Ip == pytest.approx(162.0)
        assert not s.relativistic

    def test_f_atomic(self):
        s = make_system(1.0)
        assert s.f_atomic == pytest.approx(0.0625, rel=1e-15)
        assert s.tau_atomic == pytest.approx(1.0, rel=1e-15)

    def test_relativistic_ip(self):
        s = make_system(50.0, relativistic=True)
        assert s.Ip == pytest.approx(1294.6261491881955, rel=1e-12)
        # Dirac level sits above Z^2/2
        assert s.Ip > 1250.0

    def test_relativistic_small_z_limit(self):
        s = make_system(1.0, relativistic=True)
        assert s.Ip == pytest.approx(0.5, rel=1e-4)

    def test_explicit_ip(self):
        s = make_system(1.0, Ip=0.579)  # SAE neon-like
        assert s.Ip == 0.579

    def test_validation(self):
        with pytest.raises(ValueError):
            make_system(0.0)
        with pytest.raises(ValueError):
            make_system(1.0, Zeff=-2.0)
        with pytest.raises(ValueError):
            make_system(1.0, Ip=0.0)
        with pytest.raises(ValueError):
            make_system(140.0, relativistic=True)


class TestGeometry:
    def test_frozen_point(self):
        # Z=1, F=0.05 sits exactly at F = 0.8 F_a where d_b meets x_top
        s = make_system(1.0)
        g = barrier_geometry(s, 0.05)
        assert g.delta_z == pytest.approx(0.22360679774997894, rel=1e-14)
        assert g.x_entry == pytest.approx(2.7639320225002106, rel=1e-14)
        assert g.x_exit == pytest.approx(7.236067977499789, rel=1e-14)
        assert g.x_top == pytest.approx(4.472135954999579, rel=1e-14)
        assert g.d_b == pytest.approx(g.x_top, rel=1e-14)
        assert g.d_c == pytest.approx(10.0, rel=1e-14)

    def test_barrier_suppression_limit(self):
        s = make_system(1.0)
        g = barrier_geometry(s, s.f_atomic)
        assert g.delta_z == 0.0
        assert g.x_entry == pytest.approx(g.x_exit, rel=1e-12)
        assert g.d_b == 0.0

    def test_over_barrier_raises(self):
        s = make_system(50.0, relativistic=True)
        with pytest.raises(BarrierSuppressionError) as exc:
            barrier_geometry(s, 9000.0)
        assert exc.value.f == 9000.0
        assert exc.value.f_atomic == pytest.approx(8380.28, rel=1e-4)
        assert "8380.28" in str(exc.value)

    def test_nonpositive_field(self):
        s = make_system(1.0)
        with pytest.raises(ValueError):
            barrier_geometry(s, 0.0)
        with pytest.raises(ValueError):
            barrier_geometry(s, -0.1)

    @given(z=z_st, frac=frac_st)
    @settings(max_examples=200)
    def test_consistency(self, z, frac):
        s = make_system(z)
        g = barrier_geometry(s, frac * s.f_atomic)
        # ordering up to a couple of ulps (all three coincide at F = F_a)
        tol = 4e-16 * g.x_exit
        assert 0.0 <= g.x_entry <= g.x_top + tol
        assert g.x_top <= g.x_exit + tol
        # d_b = x_exit - x_entry, checked in sum form to dodge cancellation
        assert g.x_entry + g.d_b == pytest.approx(g.x_exit, rel=1e-12)
        assert g.x_entry + g.x_exit == pytest.approx(g.d_c, rel=1e-12)
        # x_top is the geometric mean of the turning points
        assert g.x_top * g.x_top == pytest.approx(g.x_entry * g.x_exit,
                                                  rel=1e-12)


class TestDelays:
    def test_argon_one_au(self):
        s = make_system(18.0)
        d = delay_set(s, 1.0)
        assert d.tau_db == pytest.approx(1.1234557302260635, rel=1e-13)
        assert d.tau_db_as == pytest.approx(27.175094574567172, rel=1e-13)
        assert d.tau_a == pytest.approx(0.0030864197530864196, rel=1e-14)

    def test_argon_strong_field(self):
        s = make_system(18.0)
        d = delay_set(s, 50.0 / math.sqrt(2.0))
        assert d.tau_dion == pytest.approx(0.031819805153394644, rel=1e-13)
        assert d.tau_dion_as == pytest.approx(0.7696842796055718, rel=1e-13)

    def test_hydrogen_at_suppression(self):
        # F = F_a: the barrier vanishes and all dwell-type delays collapse
        # onto the atomic time
        s = make_system(1.0)
        d = delay_set(s, 0.0625)
        assert d.tau_ad == pytest.approx(1.0, rel=1e-12)
        assert d.tau_dion == pytest.approx(1.0, rel=1e-12)
        assert d.tau_ti == pytest.approx(1.0, rel=1e-12)
        assert d.tau_db == pytest.approx(0.0, abs=1e-12)
        assert d.tau_ad_as == pytest.approx(au_time_as, rel=1e-12)

    @given(z=z_st, frac=frac_st)
    @settings(max_examples=300)
    def test_identities(self, z, frac):
        s = make_system(z)
        f = frac * s.f_atomic
        d = delay_set(s, f)
        assert d.tau_ad == pytest.approx(d.tau_dion + d.tau_db, rel=1e-11)
        assert d.tau_ti * d.tau_ad == pytest.approx(1.0 / (16.0 * z * f),
                                                    rel=1e-11)
        assert d.tau_backr == pytest.approx(d.tau_ti, rel=1e-12)
        # two algebraic forms of the ionization time
        delta = math.sqrt(s.Ip * s.Ip - 4.0 * z * f)
        assert d.tau_ti == pytest.approx(0.5 / (s.Ip + delta), rel=1e-11)

    @given(z=z_st, frac=frac_st)
    @settings(max_examples=200)
    def test_ranges(self, z, frac):
        s = make_system(z)
        d = delay_set(s, frac * s.f_atomic)
        # tau_ti lives in [tau_a/2, tau_a]; the others are positive and
        # ordered as tau_db, tau_dion < tau_ad
        assert 0.5 * s.tau_atomic <= d.tau_ti <= s.tau_atomic * (1 + 1e-12)
        assert d.tau_db >= 0.0
        assert d.tau_dion > 0.0
        assert d.tau_ad >= d.tau_dion

    @given(z=z_st, frac=st.floats(min_value=1e-8, max_value=0.01))
    @settings(max_examples=200)
    def test_thick_barrier_split(self, z, frac):
        # deep in the thick-barrier regime the Coulomb dwell splits evenly:
        # tau_db tracks tau_dion up to 1 - sqrt(1 - F/F_a)
        s = make_system(z)
        d = delay_set(s, frac * s.f_atomic)
        bound = 1.0 - math.sqrt(1.0 - frac) + 1e-12
        assert abs(d.tau_db - d.tau_dion) / d.tau_dion <= bound

    def test_monotone_in_field(self):
        s = make_system(18.0)
        fields = [0.01 * s.f_atomic, 0.1 * s.f_atomic, 0.5 * s.f_atomic,
                  0.9 * s.f_atomic]
        dsets = [delay_set(s, f) for f in fields]
        for a, b in zip(dsets, dsets[1:]):
            assert b.tau_dion < a.tau_dion
            assert b.tau_db < a.tau_db
            assert b.tau_ti > a.tau_ti


class TestPhotonDelay:
    def test_argon_xuv(self):
        s = make_system(18.0)
        pd = photon_absorption_delay(s, 50.0 / math.sqrt(2.0), omega=3.0)
        assert pd.n_photons == pytest.approx(54.0, rel=1e-14)
        # n tau_1ph telescopes back to the ionization dwell time
        d = delay_set(s, 50.0 / math.sqrt(2.0))
        assert pd.tau_nph == pytest.approx(d.tau_dion, rel=1e-12)

    @given(z=z_st, frac=frac_st,
           omega=st.floats(min_value=0.01, max_value=10.0))
    @settings(max_examples=200)
    def test_sum_rule(self, z, frac, omega):
        s = make_system(z)
        f = frac * s.f_atomic
        pd = photon_absorption_delay(s, f, omega)
        assert pd.n_photons * pd.tau_1ph == pytest.approx(pd.tau_nph,
                                                          rel=1e-12)
        assert pd.tau_nph == pytest.approx(delay_set(s, f).tau_dion,
                                           rel=1e-11)

    def test_omega_validation(self):
        s = make_system(1.0)
        with pytest.raises(ValueError):
            photon_absorption_delay(s, 0.05, omega=0.0)


class TestKeldysh:
    def test_titanium_sapphire(self):
        s = make_system(1.0)
        assert keldysh_gamma(s, 0.05, 0.057) == pytest.approx(1.14, rel=1e-12)

    def test_heavy_ion(self):
        s = make_system(35.0)
        assert keldysh_gamma(s, 100.0, 3.0) == pytest.approx(1.05, rel=1e-12)

    def test_scaling(self):
        s = make_system(2.0)
        g1 = keldysh_gamma(s, 0.1, 0.5)
        assert keldysh_gamma(s, 0.2, 0.5) == pytest.approx(0.5 * g1, rel=1e-12)
        assert keldysh_gamma(s, 0.1, 1.0) == pytest.approx(2.0 * g1, rel=1e-12)


def test_direct_dataclass_is_open():
    # power users can bypass make_system for exotic parameter sets
    s = AtomicSystem(Z=1.0, Zeff=0.9, Ip=0.9)
    assert s.f_atomic == pytest.approx(0.81 / 3.6, rel=1e-14)


def test_clight_in_ip():
    # the Dirac level uses the same c as the quotients
    s = make_system(c_au * 0.5, relativistic=True)
    expected = c_au * c_au * (1.0 - math.sqrt(0.75))
    assert s.Ip == pytest.approx(expected, rel=1e-14)
