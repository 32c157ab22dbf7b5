"""Built-in models with their expected verdicts."""

from __future__ import annotations

from dataclasses import dataclass, field

from .lie import StructureModel
from .parser import parse

__all__ = ["Fixture", "FIXTURES", "fixture_names", "get_fixture", "load"]


@dataclass(frozen=True)
class Fixture:
    name: str
    text: str
    summary: str
    expected: dict[str, str]  # command -> "pass" | "fail"
    facts: dict = field(default_factory=dict)


_STANDARD_R6 = """\
dim 6
mode invariant
form omega = e14 + e25 + e36
cvform psi = (e1 + i e4)^(e2 + i e5)^(e3 + i e6)
endo J = frame x1 -> x4; x2 -> x5; x3 -> x6; x4 -> -x1; x5 -> -x2; x6 -> -x3
dist D = span(x1, x2, x3)
dist Jplane = span(x1, x4, x3)
"""

_STANDARD_R4 = """\
dim 4
mode invariant
form omega = e12 + e34
form Oplus = e13 - e24
form Ominus = e14 + e23
cvform psi = Oplus + i Ominus
endo J = frame x1 -> x2; x2 -> -x1; x3 -> x4; x4 -> -x3
dist D = span(x1, x3)
"""

_SOLVMANIFOLD = """\
dim 6
mode invariant
param mu = (sqrt(5) - 1)/2
note J as printed sends x5 to -x6, which contradicts J^2 = -1; J below uses x5 -> -x4 and J_printed keeps the printed table
d e3 = -e13 - e25
d e4 = e14 - e26
d e5 = -e15
d e6 = e16
form omega = e12 + e36 + e45
cvform psi = i (e1 + i e2)^(e3 + i e6)^(e4 + i e5)
endo J = frame x1 -> x2; x2 -> -x1; x3 -> x6; x6 -> -x3; x4 -> x5; x5 -> -x4
endo J_printed = frame x1 -> x2; x2 -> -x1; x3 -> x6; x6 -> -x3; x4 -> x5; x5 -> -x6
dist D = span(x2, x3, x4)
form h2a = e12
form h2b = e56
form h2c = e36 + e45
"""

_TORUS = """\
dim 6
mode coordinate
param t = 1
func a(x1) ~ [0, 1, 1]
func b(x2) ~ [0, -1, 2]
func c(x3) ~ [0, 2, -1]
point 0.1, 0.2, 0.3, 0, 0, 0
point 0.5, -0.4, 0.7, 0, 0, 0
point -0.3, 0.8, 0.2, 0, 0, 0
note the printed family repeats dx3 in its second factor; psi uses dx2 as the flat member requires, psi_printed keeps the printed factors
form omega = e14 + e25 + e36
cvform psi = i (e1 + i exp(t b - t c) e4)^(e2 + i exp(t c - t a) e5)^(e3 + i exp(t a - t b) e6)
cvform psi_printed = i (e1 + i exp(t b - t c) e4)^(e3 + i exp(t c - t a) e5)^(e3 + i exp(t a - t b) e6)
endo J = frame x1 -> exp(t c - t b) x4; x2 -> exp(t a - t c) x5; x3 -> exp(t b - t a) x6; x4 -> -exp(t b - t c) x1; x5 -> -exp(t c - t a) x2; x6 -> -exp(t a - t b) x3
endo J0 = frame x1 -> x4; x2 -> x5; x3 -> x6; x4 -> -x1; x5 -> -x2; x6 -> -x3
cvform psi0 = i (e1 + i e4)^(e2 + i e5)^(e3 + i e6)
dist D = span(x4, x5, x6)
"""

_NILMANIFOLD = """\
dim 6
mode invariant
d e5 = e13
d e6 = e12
form omega = e14 + e25 + e36
cvform psi = (e1 + i e4)^(e2 + i e5)^(e3 + i e6)
endo J = frame x1 -> x4; x2 -> x5; x3 -> x6; x4 -> -x1; x5 -> -x2; x6 -> -x3
dist D = span(x3, x4, x5)
"""

_NXN = """\
dim 6
mode invariant
param L = log((3 + sqrt(5))/2)
param r : r^2 = 2, r > 0
note J as printed sends x5 to -x6, which contradicts J^2 = -1; J below uses x5 -> -x4 and J_printed keeps the printed table
note the listed generators of H^5 repeat the same class twice
d e1 = -L e13
d e2 = L e23
d e4 = -L e46
d e5 = L e56
form omega = e12 + e45 + e36
cvform psi = r/2 (1 - i) (e1 + i e2)^(e4 + i e5)^(e3 + i e6)
endo J = frame x1 -> x2; x2 -> -x1; x3 -> x6; x6 -> -x3; x4 -> x5; x5 -> -x4
endo J_printed = frame x1 -> x2; x2 -> -x1; x3 -> x6; x6 -> -x3; x4 -> x5; x5 -> -x6
form primitive_printed = r/(2 L) (e14 + e15 - e24 + e25)
"""

_KODAIRA_THURSTON = """\
dim 4
mode invariant
d e3 = -e12
form omega = e13 + e24
cvform psi = i (e1 + i e3)^(e2 + i e4)
form Oplus = re(psi)
form Ominus = im(psi)
endo J = frame x1 -> x3; x2 -> x4; x3 -> -x1; x4 -> -x2
dist D = span(x2, x3)
"""

_CONFORMAL_TORUS = """\
dim 6
mode coordinate
func f(x1) ~ [0, 1, 1]
point 0.1, 0.2, 0.3, 0, 0, 0
point 0.5, -0.4, 0.7, 0, 0, 0
point -0.3, 0.8, 0.2, 0, 0, 0
form omega = e14 + e25 + e36
cvform psi = exp(f) (e1 + i e4)^(e2 + i e5)^(e3 + i e6)
endo J = frame x1 -> x4; x2 -> x5; x3 -> x6; x4 -> -x1; x5 -> -x2; x6 -> -x3
dist D = span(x1, x2, x3)
"""

_HALF_FLAT_6 = {
    "check-d2": "pass",
    "stable": "pass",
    "su3": "pass",
    "halfflat": "pass",
    "lemma23": "pass",
    "slag": "pass",
}

FIXTURES: dict[str, Fixture] = {
    f.name: f
    for f in [
        Fixture(
            "standard-R6",
            _STANDARD_R6,
            "flat model with the standard positive 3-form",
            {**_HALF_FLAT_6, "cohomology": "pass", "lefschetz": "pass", "connection": "pass"},
            {"betti": [1, 6, 15, 20, 15, 6, 1]},
        ),
        Fixture(
            "standard-R4",
            _STANDARD_R4,
            "flat four-dimensional triple",
            {"check-d2": "pass", "cohomology": "pass", "lefschetz": "pass", "slag": "pass", "su2": "pass", "h2bound": "pass", "connection": "pass"},
            {"betti": [1, 4, 6, 4, 1]},
        ),
        Fixture(
            "solvmanifold-slag",
            _SOLVMANIFOLD,
            "non-nilpotent solvable model with a special Lagrangian leaf",
            {**_HALF_FLAT_6, "cohomology": "pass", "lefschetz": "fail", "connection": "pass"},
            {"betti": [1, 2, 3, 4, 3, 2, 1]},
        ),
        Fixture(
            "torus-family",
            _TORUS,
            "coordinate family on the torus, integrable only at t = 0",
            dict(_HALF_FLAT_6),
            {},
        ),
        Fixture(
            "nilmanifold",
            _NILMANIFOLD,
            "six-dimensional nilmanifold",
            {**_HALF_FLAT_6, "cohomology": "pass", "lefschetz": "fail", "connection": "pass"},
            {"betti": [1, 4, 9, 12, 9, 4, 1]},
        ),
        Fixture(
            "NxN",
            _NXN,
            "product of two solvable three-manifolds with exact Re psi",
            {**_HALF_FLAT_6, "slag": None, "cohomology": "pass", "lefschetz": "pass", "connection": "pass"},
            {"betti": [1, 2, 3, 4, 3, 2, 1]},
        ),
        Fixture(
            "kodaira-thurston",
            _KODAIRA_THURSTON,
            "four-dimensional nilmanifold",
            {"check-d2": "pass", "cohomology": "pass", "lefschetz": "fail", "slag": "pass", "su2": "pass", "h2bound": "pass", "connection": "pass"},
            {"betti": [1, 3, 4, 3, 1]},
        ),
        Fixture(
            "conformal-torus",
            _CONFORMAL_TORUS,
            "flat structure with psi scaled by a non-constant function",
            {"check-d2": "pass", "stable": "pass", "su3": "fail", "halfflat": "fail", "lemma23": "pass", "slag": "pass"},
            {},
        ),
    ]
}
# drop placeholders for commands that do not apply
FIXTURES = {k: Fixture(f.name, f.text, f.summary, {c: v for c, v in f.expected.items() if v}, f.facts) for k, f in FIXTURES.items()}

_ALIASES = {name.lower(): name for name in FIXTURES}

_CACHE: dict[str, StructureModel] = {}


def fixture_names() -> list[str]:
    return list(FIXTURES)


def get_fixture(name: str) -> Fixture:
    key = _ALIASES.get(name.lower())
    if key is None:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(FIXTURES)}")
    return FIXTURES[key]


def load(name: str) -> StructureModel:
    """Parse a fixture (fresh model each call; parsing is cheap)."""
    fx = get_fixture(name)
    return parse(fx.text, name=fx.name)
