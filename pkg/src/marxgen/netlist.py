"""SPICE netlist export of a designed Marx ladder, plus a small reader.

Node naming: ``0`` is the bottom rail, ``t<k>`` the top of parasitic
capacitor k, ``m<k>`` the node between inductor k and storage capacitor k,
``mL`` the node between the load inductor and the load capacitor.

Stage k's upper branch runs ``t<k> -L- m<k> -C- t<k-1>`` (``t0`` is ground);
SPICE inductor current flows from the first to the second node, i.e. towards
the previous stage for ``i_k`` and towards the load for ``i_L``, matching the
orientation of the state-space model.
"""

import re
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

SIG = 12


class NetlistError(ValueError):
    pass


@dataclass(frozen=True)
class Element:
    name: str
    kind: str  # "C" or "L"
    node1: str
    node2: str
    value: float
    ic: Optional[float] = None


def _fmt(x):
    return f"{x:.{SIG}g}"


def to_spice(spec, k, v0=1.0, title=None, steps=1000):
    """Netlist text for parasitic ratios ``k`` (``c_i = c k_i``)."""
    k = np.asarray(getattr(k, "k", k), dtype=float)
    n, c, ell = spec.n, spec.c, spec.ell
    if k.shape != (n,):
        raise ValueError(f"need {n} capacitor ratios")
    title = title or f"Marx generator, {n} stages, alpha={list(spec.alpha)}"
    lines = [
        f"* {title}",
        f"* c={_fmt(c)} F, ell={_fmt(ell)} H, v0={_fmt(v0)} V, "
        f"transfer time T={_fmt(spec.T)} s",
        "* i_k flows t<k> -> m<k> (towards stage k-1); i_L flows t<n> -> mL",
    ]
    for i in range(1, n + 1):
        prev = "0" if i == 1 else f"t{i - 1}"
        lines.append(f"CS{i} m{i} {prev} {_fmt(c)} IC={_fmt(v0)}")
        lines.append(f"L{i} t{i} m{i} {_fmt(ell)} IC=0")
        lines.append(f"CP{i} t{i} 0 {_fmt(c * k[i - 1])} IC=0")
    lines.append(f"LL t{n} mL {_fmt(n * ell)} IC=0")
    lines.append(f"CL mL 0 {_fmt(c / n)} IC=0")
    lines.append(f".tran {_fmt(spec.T / steps)} {_fmt(spec.T)} UIC")
    lines.append(".end")
    return "\n".join(lines) + "\n"


_ELEMENT = re.compile(
    r"^(?P<name>[CL]\w*)\s+(?P<n1>\w+)\s+(?P<n2>\w+)\s+(?P<val>[-+0-9.eE]+)"
    r"(?:\s+IC=(?P<ic>[-+0-9.eE]+))?\s*$", re.IGNORECASE)
_DIRECTIVE = re.compile(r"^\.(tran|end|ic|option|options|param)\b", re.IGNORECASE)


def parse_spice(text) -> List[Element]:
    """Read back the subset of SPICE written by :func:`to_spice`.

    The first line is the title; ``*`` lines are comments. Anything other
    than C/L elements and the usual dot-directives raises
    :class:`NetlistError`, as does a missing ``.end``.
    """
    lines = text.splitlines()
    if not lines:
        raise NetlistError("empty netlist")
    elements, names, ended = [], set(), False
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("*"):
            continue
        if ended:
            raise NetlistError(f"line {lineno}: content after .end")
        if line.startswith("."):
            if not _DIRECTIVE.match(line):
                raise NetlistError(f"line {lineno}: unknown directive {line!r}")
            ended = line.lower().startswith(".end")
            continue
        m = _ELEMENT.match(line)
        if not m:
            raise NetlistError(f"line {lineno}: cannot parse {line!r}")
        name = m["name"].upper()
        if name in names:
            raise NetlistError(f"line {lineno}: duplicate element {name}")
        names.add(name)
        try:
            value = float(m["val"])
            ic = float(m["ic"]) if m["ic"] is not None else None
        except ValueError as exc:
            raise NetlistError(f"line {lineno}: bad number") from exc
        if not value > 0:
            raise NetlistError(f"line {lineno}: nonpositive value")
        elements.append(Element(name, name[0], m["n1"], m["n2"], value, ic))
    if not ended:
        raise NetlistError("missing .end")
    return elements
