"""Physical constants in the unit systems used throughout.

Two unit systems coexist: the nanowire model works in meV and nm,
the cavity/bus dynamics work in hbar = 1 with angular frequencies in
rad/ns (so 2*pi*GHz numerically).  Everything needed to convert
between the two lives here and nowhere else.
"""

from scipy import constants as _sc

# hbar^2 / (2 m_e) in meV nm^2; divides by (m*/m_e) * a^2 to give the
# tight-binding hopping energy.
HBARSQ_OVER_2ME_MEV_NM2 = _sc.hbar**2 / (2.0 * _sc.m_e) / _sc.e * 1e21

# hbar in meV ns: converts angular frequency (rad/ns) to energy (meV).
HBAR_MEV_NS = _sc.hbar / _sc.e * 1e12

# Boltzmann constant in meV / K.
KB_MEV_PER_K = _sc.k / _sc.e * 1e3


def ghz_to_rad_per_ns(f_ghz: float) -> float:
    """Ordinary frequency in GHz -> angular frequency in rad/ns."""
    return 2.0 * _sc.pi * f_ghz


def rad_per_ns_to_mev(omega: float) -> float:
    """Angular frequency in rad/ns -> energy in meV."""
    return HBAR_MEV_NS * omega


def thermal_occupation(omega: float, temperature_k: float) -> float:
    """Bose-Einstein occupation of a mode at angular frequency omega (rad/ns).

    Parameters
    ----------
    omega : float
        Mode angular frequency in rad/ns.
    temperature_k : float
        Temperature in kelvin, must be > 0.
    """
    if temperature_k <= 0.0:
        raise ValueError("temperature must be positive")
    import math

    x = rad_per_ns_to_mev(omega) / (KB_MEV_PER_K * temperature_k)
    return 1.0 / math.expm1(x)
