"""Hydrogen-like atom in a strong static field: barrier geometry and
tunneling time delays.

The electron leaves through the barrier formed by the Coulomb potential
tilted by a uniform field F along the ionization direction.  The barrier
exists for 0 < F <= F_a = Ip^2/(4 Zeff); beyond F_a ionization is
over-barrier and the quantities below lose their meaning.

Delay fields are in au of time; every delay has an attosecond mirror
obtained by multiplying with ``constants.au_time_as``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import au_time_as, c_au

__all__ = [
    "AtomicSystem",
    "BarrierGeometry",
    "BarrierSuppressionError",
    "DelaySet",
    "PhotonAbsorptionDelay",
    "barrier_geometry",
    "delay_set",
    "keldysh_gamma",
    "make_system",
    "photon_absorption_delay",
]


class BarrierSuppressionError(ValueError):
    """Raised when F exceeds the barrier-suppression field strength F_a."""

    def __init__(self, f: float, f_atomic: float):
        self.f = f
        self.f_atomic = f_atomic
        super().__init__(
            f"F = {f:.6g} au is beyond the barrier-suppression threshold "
            f"F_a = {f_atomic:.6g} au; no tunneling barrier exists"
        )


@dataclass(frozen=True)
class AtomicSystem:
    """Effective one-electron atom.

    Attributes
    ----------
    Z : float
        Nuclear charge.
    Zeff : float
        Effective charge seen by the departing electron.  Equal to Z for a
        bare hydrogen-like ion; smaller for a single-active-electron model
        of a neutral atom.
    Ip : float
        Ionization potential in au.
    relativistic : bool
        True when Ip came from the Dirac ground level instead of Z^2/2.
    """

    Z: float
    Zeff: float
    Ip: float
    relativistic: bool = False

    @property
    def f_atomic(self) -> float:
        """Barrier-suppression field strength F_a = Ip^2/(4 Zeff)."""
        return self.Ip * self.Ip / (4.0 * self.Zeff)

    @property
    def tau_atomic(self) -> float:
        """Atomic time 1/(2 Ip); the F -> F_a limit of the tunneling delays."""
        return 0.5 / self.Ip


def make_system(Z: float, Zeff: float | None = None, relativistic: bool = False,
                Ip: float | None = None) -> AtomicSystem:
    """Build an :class:`AtomicSystem`.

    Parameters
    ----------
    Z : float
        Nuclear charge, > 0.
    Zeff : float, optional
        Effective charge, defaults to Z.
    relativistic : bool
        Use the Dirac point-nucleus ground level for the default Ip,
        Ip = c^2 (1 - sqrt(1 - (Z/c)^2)).  Requires Z < c.
    Ip : float, optional
        Explicit ionization potential; overrides the ground-state default.
        Needed for single-active-electron models where Ip is empirical.
    """
    if not Z > 0.0:
        raise ValueError(f"Z must be positive, got {Z}")
    if Zeff is None:
        Zeff = Z
    if not Zeff > 0.0:
        raise ValueError(f"Zeff must be positive, got {Zeff}")
    if Ip is None:
        if relativistic:
            if Z >= c_au:
                raise ValueError(
                    f"Dirac point-nucleus level undefined for Z = {Z} >= c = {c_au}")
            Ip = c_au * c_au * (1.0 - math.sqrt(1.0 - (Z / c_au) ** 2))
        else:
            Ip = 0.5 * Z * Z
    if not Ip > 0.0:
        raise ValueError(f"Ip must be positive, got {Ip}")
    return AtomicSystem(Z=float(Z), Zeff=float(Zeff), Ip=float(Ip),
                        relativistic=bool(relativistic))


@dataclass(frozen=True)
class BarrierGeometry:
    """Static tunneling barrier for field strength ``f``.

    delta_z is the barrier height sqrt(Ip^2 - 4 Zeff F); x_entry and
    x_exit the inner and outer classical turning points, x_top the
    barrier-maximum position sqrt(Zeff/F).  d_b = x_exit - x_entry is the
    tunnel width and d_c = Ip/F the classical (thick-barrier) width.
    """

    f: float
    delta_z: float
    x_entry: float
    x_exit: float
    x_top: float
    d_b: float
    d_c: float


def _check_field(system: AtomicSystem, f: float) -> None:
    if not f > 0.0:
        raise ValueError(f"field strength must be positive, got {f}")
    if f > system.f_atomic:
        raise BarrierSuppressionError(f, system.f_atomic)


def barrier_geometry(system: AtomicSystem, f: float) -> BarrierGeometry:
    """Turning points and widths of the tunneling barrier at field f.

    Valid for 0 < f <= F_a (closed at the top: delta_z = 0 there).
    Raises :class:`BarrierSuppressionError` beyond F_a.
    """
    _check_field(system, f)
    ip = system.Ip
    # max() only guards the roundoff of Ip^2 - 4 Zeff F at F = F_a
    delta_z = math.sqrt(max(ip * ip - 4.0 * system.Zeff * f, 0.0))
    return BarrierGeometry(
        f=f,
        delta_z=delta_z,
        # (Ip - delta_z)/(2F) rationalized; the difference form loses half
        # the significand in the weak-field limit where delta_z -> Ip
        x_entry=2.0 * system.Zeff / (ip + delta_z),
        x_exit=(ip + delta_z) / (2.0 * f),
        x_top=math.sqrt(system.Zeff / f),
        d_b=delta_z / f,
        d_c=ip / f,
    )


@dataclass(frozen=True)
class DelaySet:
    """Tunneling time delays at one field strength, in au.

    tau_ti and tau_ad are the delays of the instantaneous and delayed
    ionization steps, 1/(2(Ip + delta_z)) and 1/(2(Ip - delta_z)).
    tau_ad splits into the ionization part tau_dion = Ip/(8 Zeff F) and
    the barrier part tau_db = delta_z/(8 Zeff F).  tau_backr is the
    back-reaction delay (Ip - delta_z)/(8 Zeff F), identical to tau_ti.
    tau_a = 1/(2 Ip) is the common F -> F_a limit.
    """

    tau_a: float
    tau_ti: float
    tau_ad: float
    tau_dion: float
    tau_db: float
    tau_backr: float

    # attosecond mirrors
    @property
    def tau_a_as(self) -> float:
        return self.tau_a * au_time_as

    @property
    def tau_ti_as(self) -> float:
        return self.tau_ti * au_time_as

    @property
    def tau_ad_as(self) -> float:
        return self.tau_ad * au_time_as

    @property
    def tau_dion_as(self) -> float:
        return self.tau_dion * au_time_as

    @property
    def tau_db_as(self) -> float:
        return self.tau_db * au_time_as

    @property
    def tau_backr_as(self) -> float:
        return self.tau_backr * au_time_as


def delay_set(system: AtomicSystem, f: float) -> DelaySet:
    """All tunneling delays at field strength f, 0 < f <= F_a.

    tau_ad = 1/(2(Ip - delta_z)) and tau_backr = (Ip - delta_z)/(8 Zeff F)
    are evaluated through Ip - delta_z = 4 Zeff F/(Ip + delta_z), which is
    exact and free of the cancellation that the literal difference suffers
    for F << F_a.
    """
    geom = barrier_geometry(system, f)
    ip = system.Ip
    dz = geom.delta_z
    denom = 8.0 * system.Zeff * f
    return DelaySet(
        tau_a=0.5 / ip,
        tau_ti=0.5 / (ip + dz),
        tau_ad=(ip + dz) / denom,
        tau_dion=ip / denom,
        tau_db=dz / denom,
        tau_backr=0.5 / (ip + dz),
    )


@dataclass(frozen=True)
class PhotonAbsorptionDelay:
    """Delay accumulated over the n-photon absorption that lifts the
    electron to the continuum edge.

    n_photons = Ip/omega is kept real on purpose: rounding it to an
    integer would put a staircase into every scan over omega.
    """

    n_photons: float
    tau_1ph: float
    tau_nph: float


def photon_absorption_delay(system: AtomicSystem, f: float,
                            omega: float) -> PhotonAbsorptionDelay:
    """Per-photon and total absorption delay for photon energy omega.

    tau_nph = n omega/(8 Zeff F) with n = Ip/omega, so the total always
    equals the ionization delay tau_dion regardless of omega.
    """
    if not omega > 0.0:
        raise ValueError(f"omega must be positive, got {omega}")
    if not f > 0.0:
        raise ValueError(f"field strength must be positive, got {f}")
    n = system.Ip / omega
    tau_1 = omega / (8.0 * system.Zeff * f)
    return PhotonAbsorptionDelay(n_photons=n, tau_1ph=tau_1, tau_nph=n * tau_1)


def keldysh_gamma(system: AtomicSystem, f: float, omega: float) -> float:
    """Keldysh adiabaticity parameter gamma = omega sqrt(2 Ip) / F."""
    if not omega > 0.0:
        raise ValueError(f"omega must be positive, got {omega}")
    if not f > 0.0:
        raise ValueError(f"field strength must be positive, got {f}")
    return omega * math.sqrt(2.0 * system.Ip) / f
