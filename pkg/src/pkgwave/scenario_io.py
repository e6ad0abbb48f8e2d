"""Scenario and sweep-plan files: a small key/value + section dialect.

Files are line oriented.  `key = value` pairs at the top describe scalar
fields; repeatable `[section]` headers open nested blocks (layer, chip,
material, axis).  Values carry explicit SI suffixes (mm, um, GHz, ...).
Unknown keys are errors, not warnings.

Two scenario forms are accepted:

* preset form: a `preset = <name>` key plus override keys
  (silicon, spreader, chip, wall_offset, separation, antennas, band, ...);
* full form: explicit `[layer]` / `[chip]` sections mirroring the
  PackageScenario fields, with an optional `[material]` registry extension.

Example (preset form)::

    preset = single_chip_walled
    band = 50GHz 70GHz 60GHz
    silicon = 0.1mm
    spreader = 0.85mm

Example (full form)::

    name = two_port_lab
    package_size = 12mm 12mm
    boundary = absorbing_open
    band = 50GHz 70GHz 60GHz
    [layer]
    role = bump_sheet
    material = pec
    thickness = 0.175mm
    [layer]
    role = vacuum_gap
    material = vacuum
    thickness = 3mm
    [chip]
    origin = 2mm 2mm
    size = 8mm 8mm
    antennas = 2x2
"""

from __future__ import annotations

import re
from dataclasses import replace
from pathlib import Path

from . import materials as mat
from .geometry import (
    Band,
    ChipPlacement,
    Layer,
    LayerRole,
    LateralBoundary,
    MonopoleSpec,
    PackageScenario,
    antenna_grid,
    make_scenario,
)
from .materials import Material


class ScenarioFileError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


_UNIT_SCALE = {
    "": 1.0,
    "m": 1.0,
    "mm": 1e-3,
    "um": 1e-6,
    "nm": 1e-9,
    "hz": 1.0,
    "khz": 1e3,
    "mhz": 1e6,
    "ghz": 1e9,
    "thz": 1e12,
    "ohm": 1.0,
}

_QTY_RE = re.compile(r"^([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*([a-zA-Z]*)$")


def parse_quantity(token: str, line: int | None = None) -> float:
    m = _QTY_RE.match(token.strip())
    if not m:
        raise ScenarioFileError(f"cannot parse quantity {token!r}", line)
    value, unit = m.groups()
    key = unit.lower()
    if key not in _UNIT_SCALE:
        raise ScenarioFileError(f"unknown unit {unit!r} in {token!r}", line)
    return float(value) * _UNIT_SCALE[key]


def _parse_blocks(text: str):
    """-> (top: list[(line, key, value)], sections: list[(line, name, pairs)])."""
    top: list[tuple[int, str, str]] = []
    sections: list[tuple[int, str, list[tuple[int, str, str]]]] = []
    current: list[tuple[int, str, str]] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip().lower()
            current = []
            sections.append((lineno, name, current))
            continue
        if "=" not in line:
            raise ScenarioFileError(f"expected 'key = value', got {line!r}", lineno)
        key, value = line.split("=", 1)
        pair = (lineno, key.strip().lower(), value.strip())
        (top if current is None else current).append(pair)
    return top, sections


def _pairs_to_dict(pairs, repeatable=(), line=None):
    d: dict[str, object] = {}
    for ln, k, v in pairs:
        if k in repeatable:
            d.setdefault(k, []).append((ln, v))
        elif k in d:
            raise ScenarioFileError(f"duplicate key {k!r}", ln)
        else:
            d[k] = (ln, v)
    return d


def _pop(d, key, default=None):
    if key in d:
        return d.pop(key)
    return default


_PRESET_KEYS = {
    "preset", "name", "band", "silicon", "spreader", "interconnect", "bump",
    "chip", "wall_offset", "separation", "antennas", "monopole_length",
    "monopole_radius", "port_impedance",
}

_FULL_KEYS = {
    "name", "package_size", "band", "boundary", "wall_offset",
    "monopole_length", "monopole_radius", "port_impedance",
}


def parse_scenario(text: str) -> PackageScenario:
    top, sections = _parse_blocks(text)
    keys = {k for _, k, _ in top}
    if "preset" in keys:
        if sections:
            raise ScenarioFileError("preset-form scenarios take no sections", sections[0][0])
        return _parse_preset_form(top)
    return _parse_full_form(top, sections)


def load_scenario(path: str | Path) -> PackageScenario:
    return parse_scenario(Path(path).read_text())


def _parse_band(value: str, line: int) -> Band:
    parts = [p.strip() for p in value.split(",")] if "," in value else value.split()
    if len(parts) != 3:
        raise ScenarioFileError("band needs three values: f_min f_max f_center", line)
    return Band(*(parse_quantity(p, line) for p in parts))


def _parse_preset_form(top) -> PackageScenario:
    d = _pairs_to_dict(top)
    unknown = set(d) - _PRESET_KEYS
    if unknown:
        ln = d[sorted(unknown)[0]][0]
        raise ScenarioFileError(f"unknown keys {sorted(unknown)}", ln)
    ln, preset = d.pop("preset")
    kwargs: dict = {}
    if "band" in d:
        bl, bv = d.pop("band")
        kwargs["band"] = _parse_band(bv, bl)
    scalar_map = {
        "silicon": "silicon_thickness",
        "spreader": "spreader_thickness",
        "bump": "bump_thickness",
        "chip": "chip_size",
        "wall_offset": "wall_offset",
        "separation": "chip_separation",
        "monopole_length": "monopole_length",
        "monopole_radius": "monopole_radius",
        "port_impedance": "port_impedance",
    }
    for key, kw in scalar_map.items():
        if key in d:
            kl, kv = d.pop(key)
            kwargs[kw] = parse_quantity(kv, kl)
    if "interconnect" in d:
        kl, kv = d.pop("interconnect")
        kwargs["interconnect_thickness"] = None if kv.lower() in ("off", "none") else parse_quantity(kv, kl)
    if "antennas" in d:
        kl, kv = d.pop("antennas")
        kwargs["antennas_per_chip"] = kv
    name = _pop(d, "name")
    try:
        scenario = make_scenario(preset, **kwargs)
    except ValueError as e:
        raise ScenarioFileError(str(e), ln)
    if name is not None:
        scenario = replace(scenario, name=name[1])
    return scenario


def _parse_loss(value: str, line: int) -> mat.LossModel:
    parts = value.split()
    kind = parts[0].lower()
    if kind == "pec":
        return mat.PerfectConductor()
    if kind == "none":
        return mat.Conductivity(0.0)
    if kind == "sigma" and len(parts) == 2:
        return mat.Conductivity(parse_quantity(parts[1], line))
    if kind == "tand" and len(parts) == 3:
        return mat.LossTangent(float(parts[1]), parse_quantity(parts[2], line))
    raise ScenarioFileError(f"cannot parse loss model {value!r}", line)


def _parse_full_form(top, sections) -> PackageScenario:
    d = _pairs_to_dict(top)
    unknown = set(d) - _FULL_KEYS
    if unknown:
        ln = d[sorted(unknown)[0]][0]
        raise ScenarioFileError(f"unknown keys {sorted(unknown)}", ln)

    registry = dict(mat.REGISTRY)
    layers: list[Layer] = []
    chips: list[ChipPlacement] = []

    for ln, name, pairs in sections:
        if name == "material":
            sd = _pairs_to_dict(pairs)
            unknown = set(sd) - {"name", "eps_r", "loss"}
            if unknown:
                raise ScenarioFileError(f"unknown material keys {sorted(unknown)}", ln)
            mname = sd["name"][1]
            eps = float(sd["eps_r"][1]) if "eps_r" in sd else 1.0
            loss = _parse_loss(*reversed(sd["loss"])) if "loss" in sd else mat.Conductivity(0.0)
            registry[mname] = Material(mname, eps, loss)
        elif name == "layer":
            sd = _pairs_to_dict(pairs)
            unknown = set(sd) - {"role", "material", "thickness"}
            if unknown:
                raise ScenarioFileError(f"unknown layer keys {sorted(unknown)}", ln)
            for req in ("role", "material", "thickness"):
                if req not in sd:
                    raise ScenarioFileError(f"layer missing {req!r}", ln)
            try:
                role = LayerRole(sd["role"][1])
            except ValueError:
                raise ScenarioFileError(f"unknown layer role {sd['role'][1]!r}", sd["role"][0])
            mname = sd["material"][1]
            if mname not in registry:
                raise ScenarioFileError(f"unknown material {mname!r}", sd["material"][0])
            layers.append(
                Layer(registry[mname], parse_quantity(sd["thickness"][1], sd["thickness"][0]), role)
            )
        elif name == "chip":
            sd = _pairs_to_dict(pairs, repeatable=("antenna",))
            unknown = set(sd) - {"origin", "size", "antennas", "antenna"}
            if unknown:
                raise ScenarioFileError(f"unknown chip keys {sorted(unknown)}", ln)
            for req in ("origin", "size"):
                if req not in sd:
                    raise ScenarioFileError(f"chip missing {req!r}", ln)
            oln, ov = sd["origin"]
            sln, sv = sd["size"]
            origin = tuple(parse_quantity(p, oln) for p in ov.split())
            size = tuple(parse_quantity(p, sln) for p in sv.split())
            if len(origin) != 2 or len(size) != 2:
                raise ScenarioFileError("origin and size need two values each", ln)
            if "antennas" in sd and "antenna" in sd:
                raise ScenarioFileError("give either an antennas pattern or antenna points", ln)
            if "antennas" in sd:
                aln, av = sd["antennas"]
                try:
                    positions = antenna_grid(origin, size, av)
                except ValueError as e:
                    raise ScenarioFileError(str(e), aln)
            elif "antenna" in sd:
                positions = []
                for aln, av in sd["antenna"]:
                    pt = tuple(parse_quantity(p, aln) for p in av.split())
                    if len(pt) != 2:
                        raise ScenarioFileError("antenna needs two coordinates", aln)
                    positions.append(pt)
                positions = tuple(positions)
            else:
                raise ScenarioFileError("chip has no antennas", ln)
            chips.append(ChipPlacement(origin, size, positions))
        else:
            raise ScenarioFileError(f"unknown section [{name}]", ln)

    for req in ("package_size", "band", "boundary"):
        if req not in d:
            raise ScenarioFileError(f"scenario missing {req!r}")
    pln, pv = d["package_size"]
    pkg = tuple(parse_quantity(p, pln) for p in pv.split())
    if len(pkg) != 2:
        raise ScenarioFileError("package_size needs two values", pln)
    band = _parse_band(*reversed(d["band"]))
    bln, bv = d["boundary"]
    if bv == "pec_walls":
        if "wall_offset" not in d:
            raise ScenarioFileError("pec_walls boundary needs wall_offset", bln)
        boundary = LateralBoundary("pec_walls", parse_quantity(*reversed(d["wall_offset"])))
    elif bv == "absorbing_open":
        if "wall_offset" in d:
            raise ScenarioFileError("wall_offset is only valid with pec_walls", d["wall_offset"][0])
        boundary = LateralBoundary("absorbing_open")
    else:
        raise ScenarioFileError(f"unknown boundary {bv!r}", bln)

    length = (
        parse_quantity(*reversed(d["monopole_length"]))
        if "monopole_length" in d
        else C_DEFAULT_MONOPOLE
    )
    radius = (
        parse_quantity(*reversed(d["monopole_radius"])) if "monopole_radius" in d else 10e-6
    )
    z0 = float(d["port_impedance"][1]) if "port_impedance" in d else 50.0
    name = d["name"][1] if "name" in d else "scenario"
    return PackageScenario(
        name=name,
        stack=tuple(layers),
        chips=tuple(chips),
        lateral_boundary=boundary,
        package_size_xy=pkg,
        band=band,
        port_impedance=z0,
        monopole=MonopoleSpec(length, radius),
    )


C_DEFAULT_MONOPOLE = 0.36e-3


def format_scenario(s: PackageScenario) -> str:
    """Full-form text for a scenario (round-trips through parse_scenario)."""
    # values are written unit-less in base SI units via repr(), which
    # round-trips floats exactly
    out = [f"name = {s.name}"]
    out.append(f"package_size = {s.package_size_xy[0]!r} {s.package_size_xy[1]!r}")
    out.append(f"band = {s.band.f_min!r} {s.band.f_max!r} {s.band.f_center!r}")
    out.append(f"boundary = {s.lateral_boundary.kind}")
    if s.lateral_boundary.kind == "pec_walls":
        out.append(f"wall_offset = {s.lateral_boundary.wall_offset!r}")
    out.append(f"port_impedance = {s.port_impedance!r}")
    out.append(f"monopole_length = {s.monopole.length!r}")
    out.append(f"monopole_radius = {s.monopole.radius!r}")
    custom = {}
    for layer in s.stack:
        m = layer.material
        if m.name not in mat.REGISTRY and m.name not in custom:
            custom[m.name] = m
    for m in custom.values():
        out += ["", "[material]", f"name = {m.name}", f"eps_r = {m.rel_permittivity!r}"]
        if isinstance(m.loss, mat.PerfectConductor):
            out.append("loss = pec")
        elif isinstance(m.loss, mat.Conductivity):
            out.append(f"loss = sigma {m.loss.sigma!r}")
        else:
            out.append(f"loss = tand {m.loss.tan_delta!r} {m.loss.f_ref!r}")
    for layer in s.stack:
        out += [
            "",
            "[layer]",
            f"role = {layer.role.value}",
            f"material = {layer.material.name}",
            f"thickness = {layer.thickness!r}",
        ]
    for chip in s.chips:
        out += [
            "",
            "[chip]",
            f"origin = {chip.origin_xy[0]!r} {chip.origin_xy[1]!r}",
            f"size = {chip.size_xy[0]!r} {chip.size_xy[1]!r}",
        ]
        out += [f"antenna = {x!r} {y!r}" for (x, y) in chip.antenna_positions]
    return "\n".join(out) + "\n"


def save_scenario(s: PackageScenario, path: str | Path) -> None:
    Path(path).write_text(format_scenario(s))
