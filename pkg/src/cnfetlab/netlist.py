"""Circuit data model and SPICE-flavoured netlist parser.

One element per line, ``*`` starts a comment, ``.title`` is optional:

    R<name> n+ n- <value>
    C<name> n+ n- <value>
    V<name> n+ n- [DC v] [SIN(off amp freq)] [AC mag phase]
    M<name> d g s <model> [tubes=<int>] [pol=N|P]
    X<name> inA inB out SUMMER [mode=phys|behav] [c=<F>] [cgnd=<F>]
                               [rbias=<ohms>] [vbias=<V>]
    .model <name> cnfet n=<int> m=<int> [pitch=<m>] [lch=<m>] [kTube=<A/V2>]
                               [lambda=<1/V>] [ceff=<F>] [efo=<eV>]

Unit suffixes: f=1e-15 p=1e-12 n=1e-9 u=1e-6 m=1e-3 k=1e3 MEG=1e6 G=1e9
T=1e12, matched case-insensitively (MEG is mega, bare m is milli). Node
``0`` is ground. ``cgnd=`` and the ``.model`` keys ``a=``, ``vpi=`` and
``tempk=`` are accepted so that any programmatically built netlist renders
back to parseable text.

Netlists are immutable after construction and safe to share read-only
across concurrent analyses; the parser is a pure function.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, fields
from typing import Optional, Union

from .cnfet import CntParams, device_capacitances
from .errors import NetlistError

_SUFFIXES = {
    "F": 1e-15, "P": 1e-12, "N": 1e-9, "U": 1e-6, "M": 1e-3,
    "K": 1e3, "MEG": 1e6, "G": 1e9, "T": 1e12,
}

_VALUE_RE = re.compile(
    r"^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)(MEG|[FPNUMKGT])?$",
    re.IGNORECASE,
)


def parse_value(token: str) -> float:
    """Parse a number with an optional engineering suffix."""
    m = _VALUE_RE.match(token.strip())
    if not m:
        raise ValueError(f"not a number: {token!r}")
    value = float(m.group(1))
    suffix = m.group(2)
    if suffix:
        value *= _SUFFIXES[suffix.upper()]
    return value


@dataclass(frozen=True)
class SinSpec:
    offset: float
    amplitude: float
    freq_hz: float

    def __post_init__(self):
        if self.freq_hz <= 0:
            raise ValueError("sinusoid frequency must be > 0")


@dataclass(frozen=True)
class AcSpec:
    magnitude: float
    phase_deg: float = 0.0

    @property
    def complex_value(self) -> complex:
        return self.magnitude * complex(math.cos(math.radians(self.phase_deg)),
                                        math.sin(math.radians(self.phase_deg)))


@dataclass(frozen=True)
class SourceShape:
    """Sum of a DC level, an optional sinusoid and an optional AC tag."""

    dc: float = 0.0
    sin: Optional[SinSpec] = None
    ac: Optional[AcSpec] = None

    def value_at(self, t: float) -> float:
        """Instantaneous transient value (the AC tag never contributes)."""
        v = self.dc
        if self.sin is not None:
            v += self.sin.offset + self.sin.amplitude * math.sin(
                2.0 * math.pi * self.sin.freq_hz * t)
        return v

    def dc_value(self) -> float:
        """Operating-point value; sinusoids contribute their t=0 value."""
        return self.value_at(0.0)

    def negated(self) -> "SourceShape":
        """Inverted replica: DC and sinusoid flip sign, the AC tag is dropped."""
        sin = None
        if self.sin is not None:
            sin = SinSpec(-self.sin.offset, -self.sin.amplitude, self.sin.freq_hz)
        return SourceShape(dc=-self.dc, sin=sin, ac=None)


@dataclass(frozen=True)
class Resistor:
    name: str
    n1: str
    n2: str
    ohms: float

    def __post_init__(self):
        if self.ohms <= 0:
            raise ValueError(f"{self.name}: resistance must be > 0")


@dataclass(frozen=True)
class Capacitor:
    name: str
    n1: str
    n2: str
    farads: float

    def __post_init__(self):
        if self.farads <= 0:
            raise ValueError(f"{self.name}: capacitance must be > 0")


@dataclass(frozen=True)
class VSource:
    name: str
    n1: str
    n2: str
    shape: SourceShape = field(default_factory=SourceShape)


@dataclass(frozen=True)
class Cnfet:
    name: str
    drain: str
    gate: str
    source: str
    model: str
    polarity: str = "N"
    tubes: int = 1

    def __post_init__(self):
        if self.tubes < 1:
            raise ValueError(f"{self.name}: tubes must be >= 1")
        if self.polarity not in ("N", "P"):
            raise ValueError(f"{self.name}: polarity must be N or P")


@dataclass(frozen=True)
class Summer:
    """Capacitive adder: out follows vbias + gain*(inA + inB).

    Physical mode is the real capacitive divider (c_in per input, c_gnd to
    ground, r_bias to the bias level for the DC path); behavioral mode is
    an ideal controlled source with the same divider gain, which exists
    because a DC sweep cannot propagate through ideal capacitors.
    """

    name: str
    in_a: str
    in_b: str
    out: str
    mode: str = "phys"
    c_in: float = 5e-15
    c_gnd: Optional[float] = None
    r_bias: float = 1e10
    v_bias: float = 0.0

    def __post_init__(self):
        if self.mode not in ("phys", "behav"):
            raise ValueError(f"{self.name}: mode must be phys or behav")
        if self.c_in <= 0 or self.r_bias <= 0:
            raise ValueError(f"{self.name}: c and rbias must be > 0")
        if self.c_gnd is None:
            object.__setattr__(self, "c_gnd", 4.0 * self.c_in)
        elif self.c_gnd <= 0:
            raise ValueError(f"{self.name}: cgnd must be > 0")

    @property
    def gain(self) -> float:
        """Divider gain per input; 1/6 for the default c_gnd = 4*c_in."""
        return self.c_in / (2.0 * self.c_in + self.c_gnd)


@dataclass(frozen=True)
class BiasResistor:
    """Norton form of a resistor tied to a fixed bias level.

    Stamps a conductance to ground plus the equivalent bias current, so
    Summer elaboration adds no extra nodes. Internal: produced only by
    elaborate(), not part of the netlist grammar.
    """

    name: str
    node: str
    ohms: float
    volts: float


Element = Union[Resistor, Capacitor, VSource, Cnfet, Summer]


def _element_nodes(e) -> tuple:
    if isinstance(e, (Resistor, Capacitor, VSource)):
        return (e.n1, e.n2)
    if isinstance(e, Cnfet):
        return (e.drain, e.gate, e.source)
    if isinstance(e, Summer):
        return (e.in_a, e.in_b, e.out)
    if isinstance(e, BiasResistor):
        return (e.node,)
    raise TypeError(f"unknown element {e!r}")


@dataclass(frozen=True)
class Netlist:
    elements: tuple
    models: dict
    title: str = ""

    def __post_init__(self):
        if not self.elements:
            raise ValueError("netlist needs at least one element")
        seen = set()
        for e in self.elements:
            if e.name in seen:
                raise ValueError(f"duplicate element name {e.name}")
            seen.add(e.name)

    def element(self, name: str):
        for e in self.elements:
            if e.name == name:
                return e
        raise KeyError(name)


def build_node_index(net: Netlist):
    """Dense node name -> index map; ground is 0, then order of appearance."""
    index = {"0": 0}
    for e in net.elements:
        for node in _element_nodes(e):
            if node not in index:
                index[node] = len(index)
    return len(index), index


def elaborate(net: Netlist) -> list:
    """Lower the netlist to stampable primitives.

    Physical Summers expand to 2 input capacitors + 1 ground capacitor +
    1 bias resistor; behavioral Summers pass through as controlled
    sources. Each CNFET additionally contributes its fixed gate
    capacitances as explicit capacitors so that every analysis sees the
    same dynamic loading.
    """
    prims = []
    for e in net.elements:
        if isinstance(e, Summer) and e.mode == "phys":
            prims.append(Capacitor(e.name + ".cina", e.in_a, e.out, e.c_in))
            prims.append(Capacitor(e.name + ".cinb", e.in_b, e.out, e.c_in))
            prims.append(Capacitor(e.name + ".cgnd", e.out, "0", e.c_gnd))
            prims.append(BiasResistor(e.name + ".rbias", e.out, e.r_bias, e.v_bias))
            continue
        prims.append(e)
        if isinstance(e, Cnfet):
            model = net.models.get(e.model)
            if model is None:
                raise NetlistError(f"device {e.name} references unknown model {e.model!r}")
            cgs, cgd = device_capacitances(model, e.tubes)
            prims.append(Capacitor(e.name + ".cgs", e.gate, e.source, cgs))
            prims.append(Capacitor(e.name + ".cgd", e.gate, e.drain, cgd))
    return prims


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    message: str


def validate_netlist(net: Netlist) -> list:
    """Structural checks; returns an empty list iff the netlist is clean.

    Flags dangling model references, circuits with no internal nodes, and
    floating nodes (no DC path to ground after Summer elaboration; the DC
    graph follows resistors, sources, bias resistors, FET channels and
    behaviorally driven nodes, but not capacitors or FET gates).
    """
    diags = []
    for e in net.elements:
        if isinstance(e, Cnfet) and e.model not in net.models:
            diags.append(Diagnostic("missing-model",
                                    f"{e.name} references unknown model {e.model!r}"))
    if diags:
        return diags  # elaboration below needs resolvable models

    _, index = build_node_index(net)
    if len(index) == 1:
        diags.append(Diagnostic("empty-circuit", "no nodes besides ground"))
        return diags

    adjacency = {node: set() for node in index}
    for prim in elaborate(net):
        if isinstance(prim, (Resistor, VSource)):
            adjacency[prim.n1].add(prim.n2)
            adjacency[prim.n2].add(prim.n1)
        elif isinstance(prim, BiasResistor):
            adjacency[prim.node].add("0")
            adjacency["0"].add(prim.node)
        elif isinstance(prim, Cnfet):
            adjacency[prim.drain].add(prim.source)
            adjacency[prim.source].add(prim.drain)
        elif isinstance(prim, Summer):  # behavioral: out is a driven node
            adjacency[prim.out].add("0")
            adjacency["0"].add(prim.out)

    reached = {"0"}
    frontier = ["0"]
    while frontier:
        node = frontier.pop()
        for nxt in adjacency[node]:
            if nxt not in reached:
                reached.add(nxt)
                frontier.append(nxt)
    for node in index:
        if node not in reached:
            diags.append(Diagnostic("floating-node",
                                    f"node {node!r} has no DC path to ground"))
    return diags


# ---------------------------------------------------------------------------
# parsing

_MODEL_KEYS = {
    "n": ("n", int), "m": ("m", int),
    "pitch": ("pitch", float), "lch": ("lch", float),
    "ktube": ("k_tube", float), "lambda": ("lam", float),
    "ceff": ("c_eff", float), "efo": ("efo", float),
    "a": ("a", float), "vpi": ("v_pi", float), "tempk": ("temperature_k", float),
}


def _parse_kv(tokens, lineno):
    out = {}
    for tok in tokens:
        if "=" not in tok:
            raise NetlistError(f"expected key=value, got {tok!r}", lineno)
        key, val = tok.split("=", 1)
        out[key.lower()] = val
    return out


def _parse_model_line(tokens, lineno):
    if len(tokens) < 3 or tokens[2].lower() != "cnfet":
        raise NetlistError("expected `.model <name> cnfet ...`", lineno)
    name = tokens[1]
    kv = _parse_kv(tokens[3:], lineno)
    kwargs = {}
    for key, raw in kv.items():
        if key not in _MODEL_KEYS:
            raise NetlistError(f"unknown model parameter {key!r}", lineno)
        attr, conv = _MODEL_KEYS[key]
        try:
            kwargs[attr] = conv(parse_value(raw)) if conv is int else parse_value(raw)
        except ValueError as exc:
            raise NetlistError(str(exc), lineno) from exc
    if "n" not in kwargs:
        raise NetlistError("model needs n=<int>", lineno)
    try:
        return name, CntParams(**kwargs)
    except ValueError as exc:
        raise NetlistError(str(exc), lineno) from exc


def _parse_source_shape(rest: str, lineno: int) -> SourceShape:
    dc = 0.0
    sin = None
    ac = None
    text = rest.strip()
    while text:
        upper = text.upper()
        if upper.startswith("DC"):
            m = re.match(r"DC\s+(\S+)", text, re.IGNORECASE)
            if not m:
                raise NetlistError("DC needs a value", lineno)
            dc = _value(m.group(1), lineno)
        elif upper.startswith("SIN"):
            m = re.match(r"SIN\s*\(([^)]*)\)", text, re.IGNORECASE)
            if not m:
                raise NetlistError("malformed SIN(...)", lineno)
            args = m.group(1).split()
            if len(args) != 3:
                raise NetlistError("SIN needs (offset amplitude freq)", lineno)
            vals = [_value(a, lineno) for a in args]
            try:
                sin = SinSpec(*vals)
            except ValueError as exc:
                raise NetlistError(str(exc), lineno) from exc
        elif upper.startswith("AC"):
            m = re.match(r"AC\s+(\S+)\s+(\S+)", text, re.IGNORECASE)
            if not m:
                raise NetlistError("AC needs magnitude and phase", lineno)
            ac = AcSpec(_value(m.group(1), lineno), _value(m.group(2), lineno))
        else:
            raise NetlistError(f"unexpected source token {text.split()[0]!r}", lineno)
        text = text[m.end():].strip()
    return SourceShape(dc=dc, sin=sin, ac=ac)


def _value(token, lineno):
    try:
        return parse_value(token)
    except ValueError as exc:
        raise NetlistError(str(exc), lineno) from exc


def parse_netlist(text: str) -> Netlist:
    """Parse netlist text; unit suffixes resolved, model lines bound to devices."""
    lines = []
    title = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("*"):
            continue
        if stripped.lower().startswith(".title"):
            title = stripped[6:].strip()
            continue
        lines.append((lineno, stripped))

    models = {}
    for lineno, line in lines:
        if line.lower().startswith(".model"):
            name, params = _parse_model_line(line.split(), lineno)
            if name in models:
                raise NetlistError(f"duplicate model {name!r}", lineno)
            models[name] = params

    elements = []
    names = set()
    for lineno, line in lines:
        if line.startswith("."):
            if line.lower().startswith(".model") or line.lower() == ".end":
                continue
            raise NetlistError(f"unknown directive {line.split()[0]!r}", lineno)
        tokens = line.split()
        name = tokens[0]
        kind = name[0].upper()
        try:
            if kind == "R":
                _need(tokens, 4, lineno)
                elem = Resistor(name, tokens[1], tokens[2], _value(tokens[3], lineno))
            elif kind == "C":
                _need(tokens, 4, lineno)
                elem = Capacitor(name, tokens[1], tokens[2], _value(tokens[3], lineno))
            elif kind == "V":
                _need(tokens, 3, lineno)
                shape = _parse_source_shape(line.split(None, 3)[3] if len(tokens) > 3 else "",
                                            lineno)
                elem = VSource(name, tokens[1], tokens[2], shape)
            elif kind == "M":
                _need(tokens, 5, lineno)
                kv = _parse_kv(tokens[5:], lineno)
                tubes = int(parse_value(kv.pop("tubes", "1")))
                pol = kv.pop("pol", "N").upper()
                if kv:
                    raise NetlistError(f"unknown device parameter {next(iter(kv))!r}", lineno)
                if tokens[4] not in models:
                    raise NetlistError(f"unknown model reference {tokens[4]!r}", lineno)
                elem = Cnfet(name, tokens[1], tokens[2], tokens[3], tokens[4],
                             polarity=pol, tubes=tubes)
            elif kind == "X":
                _need(tokens, 5, lineno)
                if tokens[4].upper() != "SUMMER":
                    raise NetlistError(f"unknown subcircuit {tokens[4]!r}", lineno)
                kv = _parse_kv(tokens[5:], lineno)
                mode = kv.pop("mode", "phys").lower()
                c_in = parse_value(kv.pop("c", "5f"))
                c_gnd = parse_value(kv.pop("cgnd")) if "cgnd" in kv else None
                r_bias = parse_value(kv.pop("rbias", "10G"))
                v_bias = parse_value(kv.pop("vbias", "0"))
                if kv:
                    raise NetlistError(f"unknown summer parameter {next(iter(kv))!r}", lineno)
                elem = Summer(name, tokens[1], tokens[2], tokens[3], mode=mode,
                              c_in=c_in, c_gnd=c_gnd, r_bias=r_bias, v_bias=v_bias)
            else:
                raise NetlistError(f"unknown element type {name!r}", lineno)
        except ValueError as exc:
            raise NetlistError(str(exc), lineno) from exc
        if elem.name in names:
            raise NetlistError(f"duplicate name {elem.name}", lineno)
        names.add(elem.name)
        elements.append(elem)

    if not elements:
        raise NetlistError("netlist has no elements")
    return Netlist(elements=tuple(elements), models=models, title=title)


def _need(tokens, count, lineno):
    if len(tokens) < count:
        raise NetlistError(f"{tokens[0]}: expected at least {count - 1} fields", lineno)


# ---------------------------------------------------------------------------
# rendering

def _fmt(x: float) -> str:
    return repr(float(x))


def render_netlist(net: Netlist) -> str:
    """Emit netlist text that parses back to an equal Netlist."""
    out = []
    if net.title:
        out.append(f".title {net.title}")
    defaults = {f.name: f.default for f in fields(CntParams)}
    for name, p in net.models.items():
        line = (f".model {name} cnfet n={p.n} m={p.m} pitch={_fmt(p.pitch)} "
                f"lch={_fmt(p.lch)} kTube={_fmt(p.k_tube)} lambda={_fmt(p.lam)} "
                f"ceff={_fmt(p.c_eff)} efo={_fmt(p.efo)}")
        for key, attr in (("a", "a"), ("vpi", "v_pi"), ("tempk", "temperature_k")):
            if getattr(p, attr) != defaults[attr]:
                line += f" {key}={_fmt(getattr(p, attr))}"
        out.append(line)
    for e in net.elements:
        if isinstance(e, Resistor):
            out.append(f"{e.name} {e.n1} {e.n2} {_fmt(e.ohms)}")
        elif isinstance(e, Capacitor):
            out.append(f"{e.name} {e.n1} {e.n2} {_fmt(e.farads)}")
        elif isinstance(e, VSource):
            parts = [e.name, e.n1, e.n2, f"DC {_fmt(e.shape.dc)}"]
            if e.shape.sin is not None:
                s = e.shape.sin
                parts.append(f"SIN({_fmt(s.offset)} {_fmt(s.amplitude)} {_fmt(s.freq_hz)})")
            if e.shape.ac is not None:
                parts.append(f"AC {_fmt(e.shape.ac.magnitude)} {_fmt(e.shape.ac.phase_deg)}")
            out.append(" ".join(parts))
        elif isinstance(e, Cnfet):
            out.append(f"{e.name} {e.drain} {e.gate} {e.source} {e.model} "
                       f"tubes={e.tubes} pol={e.polarity}")
        elif isinstance(e, Summer):
            line = (f"{e.name} {e.in_a} {e.in_b} {e.out} SUMMER mode={e.mode} "
                    f"c={_fmt(e.c_in)} rbias={_fmt(e.r_bias)} vbias={_fmt(e.v_bias)}")
            if e.c_gnd != 4.0 * e.c_in:
                line += f" cgnd={_fmt(e.c_gnd)}"
            out.append(line)
        else:
            raise TypeError(f"cannot render {e!r}")
    return "\n".join(out) + "\n"
