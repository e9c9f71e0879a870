"""The instance corpus shipped with the repository, as InstanceFile objects."""
from __future__ import annotations

from fractions import Fraction
from pathlib import Path

from .io import InstanceFile, save_instance
from .multifunction import PolyMultimap
from .polyhedra import Polyhedron

RPLUS = Polyhedron.make(1, [([-1], 0)])
WEDGE = PolyMultimap.make(1, 1, [Polyhedron.make(2, [([0, -1], 0), ([-1, 1], 0)])])  # 0 <= y <= x
ABOVE = PolyMultimap.make(1, 1, [Polyhedron.make(2, [([1, -1], 0)])])  # y >= x
ABOVE_NEG = PolyMultimap.make(1, 1, [Polyhedron.make(2, [([-1, -1], 0)])])  # y >= -x


def _v(*xs):
    return tuple(Fraction(x) for x in xs)


def _mm(name: str, S: PolyMultimap, Omega=None, Theta=None, x=None, y=None) -> InstanceFile:
    x = _v(*(x or (0,) * S.n))
    y = _v(*(y or (0,) * S.m))
    return InstanceFile("multimap", {"S": S, "Omega": Omega, "Theta": Theta, "base": {"x": x, "y": y}}, name)


def hand_built() -> list[InstanceFile]:
    out = [
        _mm("wedge-omega-rplus", WEDGE, RPLUS),
        _mm("wedge-omega-full", WEDGE),
        _mm("identity-2", PolyMultimap.identity(2)),
        _mm("linear-2x2", PolyMultimap.linear([[2, 1], [0, 1]])),
        _mm("diag-relative-to-range", PolyMultimap.linear([[1, 0], [0, 0]]),
            Theta=Polyhedron.make(2, [], [([0, 1], 0)])),
        InstanceFile("linear-operator", {"A": (_v(1, 0), _v(0, 0)), "base": {"x": _v(0, 0)}}, "diag-1-0"),
        InstanceFile("linear-operator", {"A": (_v(1, 2, 0), _v(0, 1, "1/2")), "base": {"x": _v(0, 0, 0)}}, "wide-2x3"),
        InstanceFile("chain", {"S1": ABOVE, "S2": ABOVE, "Omega": RPLUS,
                               "base": {"x": _v(0), "z": _v(0), "y": _v(0)}}, "chain-monotone-halfplanes"),
        InstanceFile("chain", {"S1": PolyMultimap.linear([[1, 2], [0, 1]]), "S2": PolyMultimap.linear([[1, -1]]),
                               "Omega": None, "base": {"x": _v(0, 0), "z": _v(0), "y": _v(0, 0)}}, "chain-linear"),
        InstanceFile("chain", {"S1": ABOVE, "inner": {"A": (_v(1), _v(-1)), "offset": _v(1, 1)}, "Omega": RPLUS,
                               "base": {"x": _v(0), "z": _v(1, 1), "y": _v(0)}}, "chain-smooth-affine"),
        InstanceFile("sum", {"S1": ABOVE, "S2": ABOVE_NEG, "Omega": None,
                             "base": {"x": _v(0), "y": _v(0), "y1": _v(0), "y2": _v(0)}}, "sum-halfplanes"),
        InstanceFile("extremal", {"L1": (Polyhedron.make(2, [([0, 1], 0)]),), "L2": (Polyhedron.make(2, [([0, -1], 0)]),),
                                  "Omega": None, "base": {"x": _v(0), "y": _v(0)}, "eps": Fraction(1, 10)},
                     "extremal-halfplanes"),
        InstanceFile("extremal", {"L1": (Polyhedron.make(2, [([0, -1], 0)]),), "L2": (Polyhedron.make(2, [([-1, 0], 0)]),),
                                  "Omega": None, "base": {"x": _v(0), "y": _v(0)}, "eps": Fraction(0),
                                  "gamma": Fraction(1, 10), "dual": (_v(-1), _v(-1))}, "fuzzy-transversal"),
    ]
    return out


def generated(count: int = 100, seed: int = 0) -> list[InstanceFile]:
    from .oracle.instances import corpus

    return [_mm(inst.name, inst.S, inst.Omega, inst.Theta) for inst in corpus(count, seed)]


def write_corpus(directory, count: int = 100, seed: int = 0) -> list[str]:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    names = []
    for inst in hand_built() + generated(count, seed):
        save_instance(inst, d / f"{inst.name}.json")
        names.append(inst.name)
    return names
