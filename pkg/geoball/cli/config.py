"""
Run configuration: INI-style sections of key=value tokens.

    [family] name=doubly_warped a=2
    [ray]    t_max=0.8 step=0.01
    [verify]
    checks = theorem1, gauss_bonnet   ; comments start with ; or #

Several tokens may share a line, including the section header line. Parsing
is strict: unknown sections, unknown keys, repeated keys and malformed
values are ParseErrors carrying the line and column.
"""

import re
from dataclasses import dataclass, field

from geoball.errors import ConstraintError, ParseError
from geoball.geodesics import RayOptions
from geoball.manifolds import ChartPoint, build_family
from geoball.verify import CHECKS


def _floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _names(text):
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _bool(text):
    lowered = text.lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


SCHEMA = {
    "family": {
        "name": str, "kappa": float, "a": float, "epsilon": float, "profile": str,
        "r0": float, "delta": float, "safe_radius": float, "base_point": _floats, "chart": str,
    },
    "ray": {"t_max": float, "t0": float, "step": float, "tol": float, "allow_beyond_safe": _bool},
    "quadrature": {
        "level": int, "resolution_check": _bool, "resolution_tol": float, "chunk_size": int, "remote": str,
    },
    "verify": {
        "checks": _names, "kappa_bound": float, "sec_bound": float, "ric_bound": float,
        "tol_identity": float, "tol_margin": float, "tol_eigen": float, "tol_corollary": float,
        "corollary_kappas": _floats,
    },
    "output": {"dir": str, "prefix": str},
}

FAMILY_KEYS = ("name", "kappa", "a", "epsilon", "profile", "r0", "delta", "safe_radius")

_HEADER = re.compile(r"\s*\[([^\]]*)\]")
_TOKEN = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*([^\s=,]+(?:\s*,\s*[^\s=,]+)*)")


@dataclass
class RunConfig:
    family: object
    base_point: ChartPoint
    ray: RayOptions
    level: int = 2
    resolution_check: bool = False
    resolution_tol: float = 1e-7
    chunk_size: int = None
    remote: str = None
    checks: tuple = ()
    kappa_bound: float = None
    sec_bound: float = None
    ric_bound: float = None
    tolerances: dict = field(default_factory=dict)
    corollary_kappas: tuple = (-2.0, -1.0, 0.0, 1.0, 2.0)
    out_dir: str = "."
    prefix: str = ""

    @property
    def beyond_safe_radius(self):
        return self.ray.t_max > self.family.trusted_radius


def tokenize(text):
    """
    Yield (section, key, raw value, line, column) for every token.

    Raises:
        ParseError: malformed header or token
    """
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = re.split(r"[#;]", raw, maxsplit=1)[0]
        pos = 0
        header = _HEADER.match(line)
        if header:
            section = header.group(1).strip()
            if section not in SCHEMA:
                raise ParseError(f"unknown section [{section}]", lineno, header.start(1) + 1)
            pos = header.end()
        while line[pos:].strip():
            token = _TOKEN.match(line, pos)
            if not token:
                column = pos + len(line[pos:]) - len(line[pos:].lstrip()) + 1
                raise ParseError(f"expected key=value, got {line[pos:].strip()!r}", lineno, column)
            if section is None:
                raise ParseError(f"key '{token.group(1)}' outside any section", lineno, token.start(1) + 1)
            yield section, token.group(1), token.group(2), lineno, token.start(1) + 1
            pos = token.end()


def parse_sections(text):
    """Typed values per section; {section: {key: (value, line, column)}}."""
    sections = {name: {} for name in SCHEMA}
    for section, key, raw, line, column in tokenize(text):
        schema = SCHEMA[section]
        if key not in schema:
            raise ParseError(f"unknown key '{key}' in [{section}]; allowed: {sorted(schema)}", line, column)
        if key in sections[section]:
            raise ParseError(f"duplicate key '{key}' in [{section}]", line, column)
        try:
            value = schema[key](raw)
        except ValueError as exc:
            raise ParseError(f"bad value for '{key}': {exc}", line, column) from exc
        sections[section][key] = (value, line, column)
    return sections


def parse_config(text, overrides=None):
    """
    Parse and validate a run configuration.

    Args:
        text: configuration text
        overrides: optional {section: {key: value}} applied after parsing
            (command line flags)

    Returns:
        RunConfig

    Raises:
        ParseError: syntax, unknown keys, unknown family or check names
        ConstraintError: violated family or ray invariant
    """
    sections = parse_sections(text)
    values = {name: {key: v[0] for key, v in entries.items()} for name, entries in sections.items()}
    for name, entries in (overrides or {}).items():
        values[name].update(entries)

    fam = values["family"]
    if "name" not in fam:
        raise ParseError("[family] needs a name")
    spec = {key: fam[key] for key in FAMILY_KEYS if key in fam}
    try:
        family = build_family(spec)
    except ValueError as exc:
        location = sections["family"].get("name", (None, None, None))
        raise ParseError(str(exc), location[1], location[2]) from exc

    if "base_point" in fam:
        coords = fam["base_point"]
        if len(coords) != 3:
            location = sections["family"]["base_point"]
            raise ParseError(f"base_point needs 3 coordinates, got {len(coords)}", location[1], location[2])
        point = ChartPoint(coords, fam.get("chart", family.canonical_chart))
    elif "chart" in fam:
        point = ChartPoint(family.base_point().coords, fam["chart"])
    else:
        point = family.base_point()
    family.check_chart(point)

    ray = values["ray"]
    options = RayOptions(
        t_max=ray.get("t_max", family.trusted_radius),
        step=ray.get("step", 0.01),
        t0=ray.get("t0", 1e-4),
        tol=ray.get("tol", 1e-10),
        allow_beyond_safe=ray.get("allow_beyond_safe", False),
    )
    options.validate(family)

    quad = values["quadrature"]
    level = quad.get("level", family.quadrature_level)
    if level < 1:
        raise ConstraintError(f"quadrature level must be >= 1, got {level}")

    ver = values["verify"]
    checks = tuple(ver.get("checks", ()))
    for name in checks:
        if name != "all" and name not in CHECKS:
            location = sections["verify"].get("checks", (None, None, None))
            raise ParseError(f"unknown check '{name}'; available: {sorted(CHECKS)}", location[1], location[2])
    tolerances = {key: ver[key] for key in ("tol_identity", "tol_margin", "tol_eigen", "tol_corollary") if key in ver}

    out = values["output"]
    return RunConfig(
        family=family,
        base_point=point,
        ray=options,
        level=level,
        resolution_check=quad.get("resolution_check", False),
        resolution_tol=quad.get("resolution_tol", 1e-7),
        chunk_size=quad.get("chunk_size"),
        remote=quad.get("remote"),
        checks=checks,
        kappa_bound=ver.get("kappa_bound"),
        sec_bound=ver.get("sec_bound"),
        ric_bound=ver.get("ric_bound"),
        tolerances=tolerances,
        corollary_kappas=ver.get("corollary_kappas", (-2.0, -1.0, 0.0, 1.0, 2.0)),
        out_dir=out.get("dir", "."),
        prefix=out.get("prefix", ""),
    )
