"""Reader for the sectioned input files of the ``lambda``, ``coiso`` and ``star`` commands.

::

    [vars]
    x even
    y even fiber
    [poisson]
    x*d_x*d_y
    [submanifold]
    transverse = y
    K = 2
    [order]
    2

``#`` starts a comment.  A variable line is ``name parity [fiber]`` where the
parity is ``even``, ``odd`` or an integer degree.  Without a
``[submanifold]`` section the transverse variables are the ones flagged
``fiber``.  ``K`` defaults to the order plus two (the arity of the
product), so every bracket read by the star product is untruncated.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .derived import SubmanifoldSpec
from .graded import GradedPoly
from .parser import parse_poly


class SpecFileError(ValueError):
    pass


SECTIONS = ("vars", "poisson", "submanifold", "order")


@dataclass
class Problem:
    spec: SubmanifoldSpec
    pi: GradedPoly
    order: int
    source: str = ""


def _sections(text: str) -> dict:
    out: dict = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.fullmatch(r"\[(\w+)\]", line)
        if m:
            current = m.group(1).lower()
            if current not in SECTIONS:
                raise SpecFileError(f"line {lineno}: unknown section [{current}]")
            if current in out:
                raise SpecFileError(f"line {lineno}: section [{current}] repeated")
            out[current] = []
            continue
        if current is None:
            raise SpecFileError(f"line {lineno}: text before the first section")
        out[current].append((lineno, line))
    return out


def _degree(word: str, lineno: int) -> int:
    if word == "even":
        return 0
    if word == "odd":
        return 1
    try:
        return int(word)
    except ValueError:
        raise SpecFileError(f"line {lineno}: parity must be even, odd or an integer, got {word!r}") from None


def _key_value(line: str, lineno: int) -> tuple:
    m = re.fullmatch(r"(\w+)\s*[=:]\s*(.*)", line)
    if not m:
        raise SpecFileError(f"line {lineno}: expected 'key = value'")
    return m.group(1).lower(), m.group(2).strip()


def parse_problem(text: str, source: str = "") -> Problem:
    sec = _sections(text)
    if "vars" not in sec:
        raise SpecFileError("missing [vars] section")
    base, fiber = [], []
    for lineno, line in sec["vars"]:
        words = line.replace(",", " ").split()
        if len(words) not in (2, 3) or (len(words) == 3 and words[2] != "fiber"):
            raise SpecFileError(f"line {lineno}: expected 'name parity [fiber]'")
        name, deg = words[0], _degree(words[1], lineno)
        if len(words) == 3:
            if deg != 0:
                raise SpecFileError(f"line {lineno}: fiber variables must be even")
            fiber.append(name)
        else:
            base.append((name, deg))
    K = None
    transverse = list(fiber)
    for lineno, line in sec.get("submanifold", []):
        key, value = _key_value(line, lineno)
        if key == "transverse":
            names = [v for v in re.split(r"[\s,]+", value) if v]
            if set(names) != set(fiber):
                raise SpecFileError(f"line {lineno}: transverse variables {names} differ from fiber variables {fiber}")
            transverse = names
        elif key == "k":
            K = int(value)
        else:
            raise SpecFileError(f"line {lineno}: unknown key {key!r} in [submanifold]")
    order = 2
    if sec.get("order"):
        lines = sec["order"]
        try:
            order = int(" ".join(l for _, l in lines))
        except ValueError:
            raise SpecFileError(f"line {lines[0][0]}: [order] must be an integer") from None
    if "poisson" not in sec or not sec["poisson"]:
        raise SpecFileError("missing [poisson] section")
    if K is None:
        K = order + 2
    spec = SubmanifoldSpec(tuple(base), tuple(transverse), K)
    expr = " ".join(l for _, l in sec["poisson"])
    pi = parse_poly(spec.b_side, expr)
    return Problem(spec, pi, order, source)


def load_problem(path) -> Problem:
    p = Path(path)
    return parse_problem(p.read_text(), str(p))
