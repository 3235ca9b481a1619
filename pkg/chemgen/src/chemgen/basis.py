"""Gaussian basis set data (s and p shells only).

STO-6G shells are Stewart's six-Gaussian least-squares expansions of 1s, 2s
and 2p Slater functions (zeta = 1), scaled per atom by the standard
molecular Slater exponents (zeta_1s; zeta_2s = zeta_2p).  STO-3G is carried
as well because its reference energies are independently known and anchor
the integral engine.  6-31G data: Hehre/Ditchfield/Pople split-valence sets
for H, C, N, O.  Contraction coefficients refer to normalized primitives.
"""

# Slater -> 6 Gaussian fits at zeta = 1 (exponents, coefficients).
_STO6G_1S = (
    [23.10303149, 4.235915534, 1.185056519, 0.4070988982, 0.1580884151,
     0.06510953954],
    [0.009163596281, 0.04936149294, 0.1685383049, 0.3705627997, 0.4164915298,
     0.1303340841],
)
_STO6G_2S = (
    [27.68496241, 5.077140627, 1.426786050, 0.2040335729, 0.09260298399,
     0.04416183978],
    [-0.004151277819, -0.02067024148, -0.05150303337, 0.3346271174,
     0.5621061301, 0.1712994697],
)
_STO6G_2P = (
    [5.868285913, 1.530329631, 0.5475665231, 0.2288932733, 0.1046655969,
     0.04948220127],
    [0.007924233646, 0.05144104825, 0.1898400060, 0.4049863191, 0.4012362861,
     0.1051855189],
)

_STO3G_1S = (
    [2.227660584, 0.4057711562, 0.1098175104],
    [0.1543289673, 0.5353281423, 0.4446345422],
)
_STO3G_2S = (
    [0.9942080777, 0.2310313333, 0.07513856067],
    [-0.09996722919, 0.3995128261, 0.7001154689],
)
_STO3G_2P = (
    [0.9942080777, 0.2310313333, 0.07513856067],
    [0.1559162750, 0.6076837186, 0.3919573931],
)

# Standard molecular Slater exponents (1s; 2s/2p) per element.
_ZETA = {
    "H": (1.24, None),
    "He": (1.69, None),
    "Li": (2.69, 0.80),
    "Be": (3.68, 1.15),
    "B": (4.68, 1.50),
    "C": (5.67, 1.72),
    "N": (6.67, 1.95),
    "O": (7.66, 2.25),
    "F": (8.65, 2.55),
}

ATOMIC_NUMBER = {"H": 1, "He": 2, "Li": 3, "Be": 4, "B": 5, "C": 6, "N": 7,
                 "O": 8, "F": 9}


def _scaled(fit, zeta):
    exps, coeffs = fit
    return [e * zeta * zeta for e in exps], list(coeffs)


def _sto_shells(element, n_gauss):
    one_s, two_s, two_p = {
        3: (_STO3G_1S, _STO3G_2S, _STO3G_2P),
        6: (_STO6G_1S, _STO6G_2S, _STO6G_2P),
    }[n_gauss]
    z1, z2 = _ZETA[element]
    shells = [("s",) + tuple(_scaled(one_s, z1))]
    if z2 is not None:
        shells.append(("s",) + tuple(_scaled(two_s, z2)))
        shells.append(("p",) + tuple(_scaled(two_p, z2)))
    return shells


# 6-31G: (shell type, exponents, coefficients); sp shells listed as separate
# s and p entries sharing exponents.
_631G = {
    "H": [
        ("s", [18.7311370, 2.8253937, 0.6401217],
         [0.03349460, 0.23472695, 0.81375733]),
        ("s", [0.1612778], [1.0]),
    ],
    "C": [
        ("s", [3047.5249, 457.36951, 103.94869, 29.210155, 9.2866630,
               3.1639270],
         [0.0018347, 0.0140373, 0.0688426, 0.2321844, 0.4679413, 0.3623120]),
        ("s", [7.8682724, 1.8812885, 0.5442493],
         [-0.1193324, -0.1608542, 1.1434564]),
        ("p", [7.8682724, 1.8812885, 0.5442493],
         [0.0689991, 0.3164240, 0.7443083]),
        ("s", [0.1687144], [1.0]),
        ("p", [0.1687144], [1.0]),
    ],
    "N": [
        ("s", [4173.5110, 627.45790, 142.90210, 40.234330, 12.820210,
               4.3904370],
         [0.0018348, 0.0139950, 0.0685870, 0.2322410, 0.4690700, 0.3604550]),
        ("s", [11.626358, 2.7162800, 0.7722180],
         [-0.1149610, -0.1691180, 1.1458520]),
        ("p", [11.626358, 2.7162800, 0.7722180],
         [0.0675800, 0.3239070, 0.7408950]),
        ("s", [0.2120313], [1.0]),
        ("p", [0.2120313], [1.0]),
    ],
    "O": [
        ("s", [5484.6717, 825.23495, 188.04696, 52.964500, 16.897570,
               5.7996353],
         [0.0018311, 0.0139501, 0.0684451, 0.2327143, 0.4701930, 0.3585209]),
        ("s", [15.539616, 3.5999336, 1.0137618],
         [-0.1107775, -0.1480263, 1.1307670]),
        ("p", [15.539616, 3.5999336, 1.0137618],
         [0.0708743, 0.3397528, 0.7271586]),
        ("s", [0.2700058], [1.0]),
        ("p", [0.2700058], [1.0]),
    ],
}


def shells_for(element: str, basis: str):
    """[(shell_type, exponents, coefficients), ...] for one element."""
    basis = basis.lower().replace("_", "-")
    if basis == "sto-3g":
        return _sto_shells(element, 3)
    if basis == "sto-6g":
        return _sto_shells(element, 6)
    if basis == "6-31g":
        if element not in _631G:
            raise KeyError(f"6-31G data not tabulated for {element}")
        return [(t, list(e), list(c)) for t, e, c in _631G[element]]
    raise KeyError(f"unknown basis {basis!r}")
