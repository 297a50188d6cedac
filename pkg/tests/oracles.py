"""Independent arbitrary-precision recomputation of every constant table.

Straight-line mpmath transcriptions of the defining formulas, sharing no
code with the package's log-domain chains.  Used by the acceptance suite
as the ground truth for relative comparisons.
"""

from __future__ import annotations

import mpmath as mp

mp.mp.dps = 50


def l1_moment_mp(p, d):
    return mp.mpf(2) ** d * mp.gamma(mp.mpf(p) + d) / mp.gamma(d)


def lattice_zeta_mp(nu, d):
    """Direct shell sum over |k|_1 = m, Levin-accelerated to full precision."""
    if nu <= d:
        raise ZeroDivisionError(
            f"lattice sum diverges for nu={nu} <= d={d}")

    def shell(m):
        m = int(m)
        total = mp.mpf(0)
        for j in range(1, min(d, m) + 1):
            total += mp.mpf(2) ** j * mp.binomial(d, j) * mp.binomial(m - 1, j - 1)
        return total

    return mp.nsum(lambda m: shell(m) / mp.mpf(m) ** nu, [1, mp.inf], method="l")


def _series_mp(term, n_max=400):
    total = mp.mpf(0)
    for j in range(n_max):
        t = term(j)
        total += t
        if j > 3 and t < total * mp.mpf("1e-40"):
            break
    return total


def kolmogorov_table_mp(d, tau):
    d = mp.mpf(d)
    tau = mp.mpf(tau)
    two = mp.mpf(2)
    C0 = two ** (d + 1 - 2 * tau) * mp.sqrt(mp.gamma(2 * tau + 1))
    C1 = 2 * mp.mpf(3) ** tau * C0
    C2 = 2 * d * C1 + two ** -(tau + 1)
    C3 = d * C2 + two ** -(tau + 2)
    C4 = C2 + C1 / 4
    C5 = mp.mpf(3) ** tau * d * C0 * (2 * d * C4 + two ** -(tau + 3))
    C6 = two ** -(tau + 2) * C4 + C5
    C7 = (mp.mpf(3) / 2 * d * C5 + 81 * two ** -(tau + 3) * d**3 * C4
          + 9 * two ** -(2 * tau + 5) * d**2)
    C8 = 18 * C7
    C9 = 9 * d**2 * C6**2 + 3 * two ** -(2 * tau + 5) * d * C6
    C_bar = max(two ** -(2 * tau + 5) * C8, C9)
    bracket = 3 * d * C_bar + two ** -(2 * tau + 6) * C7
    C_sharp = 9 * d * two ** (4 * tau + 23) / 5 * bracket
    C_hat = 6 * d / 5 * bracket
    return {
        "C0": C0, "C1": C1, "C2": C2, "C3": C3, "C4": C4, "C5": C5,
        "C6": C6, "C7": C7, "C8": C8, "C9": C9,
        "nu_bar": 4 * tau + 10, "nu": 4 * tau + 12,
        "C_bar": C_bar, "C_tilde": d * bracket, "C_sharp": C_sharp,
        "c": 1 / C_sharp, "C_hat": C_hat, "C": C_hat / (3 * C_bar),
    }


def arnold_table_mp(d, tau):
    di = int(d)
    d = mp.mpf(d)
    tau = mp.mpf(tau)
    nu = tau + 1
    I_nu = l1_moment_mp(nu, di)
    I_2nu = l1_moment_mp(2 * nu, di)
    C0 = 4 * mp.sqrt(2) * mp.mpf("1.5") ** (2 * nu + d) * (I_nu + d * I_2nu)
    C1 = 2 * mp.mpf("1.5") ** (nu + d) * I_nu
    C2 = d**4 * mp.mpf(3) ** (8 * (d - 1))
    C3 = d**2 * C1**2 + 6 * d * C1 + 1
    C4 = max(C0, C3)
    C5 = mp.mpf(2) ** (2 * (nu + d) + 11) * 9 * d**2 / 25
    C7 = max(C2, C4)
    C6 = max(32 * d, mp.mpf(10) ** (-nu) * C7)
    C8 = 3 * mp.mpf(5) ** nu * C6
    C9 = 3 * mp.mpf(5) ** (2 * nu + 1) * mp.sqrt(2) / 8 * C6
    C10 = max(mp.mpf(1), (3 * d * mp.mpf(2) ** (5 - d) / 5) ** mp.mpf("0.25"))
    C11 = C5**2 * C9 * C10 / 3
    return {
        "C0": C0, "C1": C1, "C2": C2, "C3": C3, "C4": C4, "C5": C5,
        "C6": C6, "C7": C7, "C8": C8, "C9": C9, "C10": C10, "C11": C11,
        "nu": nu,
    }


def poschel_table_mp(d, tau, nu):
    di = int(d)
    d = mp.mpf(d)
    tau = mp.mpf(tau)
    nu = mp.mpf(nu)
    nu_bar = tau + 1
    beta = 1 - (nu - nu_bar) / (nu * nu_bar)
    c_bar = min(mp.mpf(1), (nu - nu_bar) / (nu * nu_bar) * mp.e)
    two = mp.mpf(2)
    C0 = two ** (d + 1 - 2 * tau) * mp.sqrt(mp.gamma(2 * tau + 1))
    C1 = 4 * mp.e / 3
    C2 = sum(mp.factorial(di - 1) / (mp.factorial(di - 1 - j) * mp.mpf(di - 1) ** (j + 1))
             for j in range(di))
    C3 = 4 * (d + 1) * C0
    C4 = 16 * (d + 1) * C0
    C5 = 16 * (6 * C1 + 1) * C3
    s6 = _series_mp(lambda j: two ** (-2 * nu_bar * (mp.mpf("1.5") ** j - j - 1) - j))
    C6 = 2 * d * C5 * s6
    s7 = _series_mp(lambda j: two ** (-nu_bar * (2 * mp.mpf("1.5") ** j - j - 2)))
    pref = 36 * d * (d + 1) * (6 * C1 + 1)
    C7 = pref * mp.exp(pref / C6 * s7)
    s8 = _series_mp(lambda j: two ** (-nu_bar * (2 * mp.mpf("1.5") ** j - j - 2) - j))
    C8 = C7 * s8
    C9 = max(mp.mpf(1), (6 * C1 + 1) / (2 * C0))
    C10 = 9 * mp.mpf(4) ** nu_bar * max(
        48 * d * (d + 1) ** 2 * C0, mp.mpf(4) ** d * (d + 1) * C2) ** 2
    C11 = mp.exp((mp.mpf(1) / 2) * ((2 * nu_bar / c_bar) ** (1 / beta) + mp.mpf(1) / 20))
    C12 = (2 / c_bar) ** nu * (2 * mp.exp(mp.mpf(1) / 40) * C6) ** (nu / nu_bar)
    C13 = mp.exp((mp.mpf(1) / 2) * ((C0 / (6 * C1 + 1)) ** (1 / nu_bar) + mp.mpf(1) / 20))
    C_big = mp.exp(mp.mpf(1) / 40) * C6
    C_star = max(C6 * C9, C8)
    c = mp.mpf(20) ** (-nu) * min(
        1 / (mp.mpf(4) ** nu_bar * C10),
        mp.mpf(20) ** nu * mp.exp(mp.mpf(1) / 40) / C11,
        mp.exp(mp.mpf(1) / 40) / C12,
        mp.mpf(20) ** nu / C13,
    )
    return {
        "C0": C0, "C1": C1, "C2": C2, "C3": C3, "C4": C4, "C5": C5,
        "C6": C6, "C7": C7, "C8": C8, "C9": C9, "C10": C10,
        "C11": C11, "C12": C12, "C13": C13,
        "C": C_big, "C_star": C_star, "c": c,
        "nu_bar": nu_bar, "nu": nu, "beta": beta, "c_bar": c_bar,
    }


def salamon_zehnder_table_mp(d, tau):
    tau = mp.mpf(tau)
    return {
        "Xi_lower": mp.mpf(5) / 4,
        "Xi_upper": mp.mpf(109),
        "prefactor_2pow_gamma4": mp.mpf(2) ** (8 * tau + 13) * mp.gamma(tau + 1) ** 4,
    }


def sharp_arnold_table_mp(d, tau):
    di = int(d)
    d = mp.mpf(d)
    tau = mp.mpf(tau)
    nu = tau + 1
    I_nu = l1_moment_mp(nu, di)
    I_2nu = l1_moment_mp(2 * nu, di)
    two = mp.mpf(2)
    C0 = 4 * mp.sqrt(2) * mp.mpf("1.5") ** (2 * nu + d) * (I_nu + d * I_2nu)
    C1 = 2 * mp.mpf("1.5") ** (nu + d) * I_nu
    C2 = two ** (3 * d) * d
    C3 = (d**2 * C1**2 + 6 * d * C1 + C2) * mp.sqrt(2)
    C4 = max(C0, C3)
    C6 = max(two ** (2 * nu), 3 * 32 * d / 5)
    C7 = 3 * d * two ** (6 * nu + 2 * d + 3) * mp.sqrt(2) * max(640 * d**2, C4)
    C8 = (two ** (-d) * C6) ** (mp.mpf(1) / 8)
    C9 = C6 * C7 * C8 / (two ** (2 * nu + 7) * d)
    C10 = 3 * two ** d * C8
    return {"C0": C0, "C1": C1, "C2": C2, "C3": C3, "C4": C4,
            "C6": C6, "C7": C7, "C8": C8, "C9": C9, "C10": C10, "nu": nu}


def extension_sharp_table_mp(d, tau):
    di = int(d)
    d = mp.mpf(d)
    tau = mp.mpf(tau)
    nu = tau + 1
    I_nu = l1_moment_mp(nu, di)
    I_2nu = l1_moment_mp(2 * nu, di)
    two = mp.mpf(2)
    C0 = 4 * mp.sqrt(2) * mp.mpf("1.5") ** (2 * nu + d) * (I_nu + d * I_2nu)
    C1 = 2 * mp.mpf("1.5") ** (nu + d) * I_nu
    C2 = two ** (3 * d) * d
    C3 = (d**2 * C1**2 + 6 * d * C1 + C2) * mp.sqrt(2)
    C4 = max(C0, C3)
    C5 = 3 * d**2 * two ** (6 * nu + 2 * d + 11) * max(
        two**7 * d * mp.sqrt(2), mp.mpf(8) ** (-nu) * C4)
    C6 = two ** (nu + 3 * d / 4 + mp.mpf(53) / 8) * d ** (mp.mpf(5) / 4)
    C7 = 2 * mp.e * d * mp.mpf("1.5") ** (d - 1)
    C8 = C5 / (3 * two**d)
    C9 = two ** (3 * (nu + 1)) * d * mp.sqrt(2) * C6
    return {"C0": C0, "C1": C1, "C2": C2, "C3": C3, "C4": C4, "C5": C5,
            "C6": C6, "C7": C7, "C8": C8, "C9": C9, "nu": nu}


def leb_loc_gen_table_mp(d, tau):
    di = int(d)
    tau = mp.mpf(tau)
    nu = tau + 1
    ext = extension_sharp_table_mp(d, tau)
    z = lattice_zeta_mp(nu, di)
    C = mp.mpf(1) / 32 + di * mp.sqrt(di) / ext["C9"] + z
    return {"C": C, "C_hat": 64 * di * C, "C9": ext["C9"], "zeta_nu": z,
            "nu": nu}


TABLES_MP = {
    "Kolmogorov": lambda d, tau, nu=None: kolmogorov_table_mp(d, tau),
    "Arnold": lambda d, tau, nu=None: arnold_table_mp(d, tau),
    "Poschel": lambda d, tau, nu=None: poschel_table_mp(d, tau, nu),
    "SalamonZehnder": lambda d, tau, nu=None: salamon_zehnder_table_mp(d, tau),
    "SharpArnold": lambda d, tau, nu=None: sharp_arnold_table_mp(d, tau),
    "ExtensionSharp": lambda d, tau, nu=None: extension_sharp_table_mp(d, tau),
    "LebLocGen": lambda d, tau, nu=None: leb_loc_gen_table_mp(d, tau),
}
