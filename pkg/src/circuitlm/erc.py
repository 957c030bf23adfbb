"""Deterministic electrical rule checking over the net graph.

Each checker is registered with an id, the rule ids it may emit, and an
enable flag.  ``run_erc`` builds the net graph once, runs every enabled
checker in registration order, and assembles a severity-tiered report.
All faults are findings, never exceptions, and two runs over identical
inputs produce byte-identical serialized reports.

Numeric thresholds live in ErcConfig.  The defaults are engineering
conventions for 5 V / 3.3 V breadboard-class designs: anything under
1 ohm rail-to-rail is a dead short, under 50 ohm draws rail-damaging
current, LEDs want at least 100 ohm in series, and I2C pull-ups are
sane between 1 k and 100 k.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Callable

from .kb import ComponentLibrary, ComponentRecord, PinRole, PinSpec
from .netgraph import (
    OPEN_SENTINEL_OHMS,
    Bridge,
    Net,
    NetGraph,
    NetId,
    build_net_graph,
    min_weight_path,
)
from .schema import CircuitDocument, Part, PinRef
from .violations import Severity, Violation, count_by_severity

# Roles that can actively drive a net push-pull, given the record defines
# a driven-high output level.
_PUSHPULL_ROLES = {
    PinRole.GPIO, PinRole.PWM_CAPABLE_GPIO, PinRole.UART_TX,
    PinRole.SPI_MOSI, PinRole.SPI_MISO, PinRole.SPI_SCK, PinRole.SPI_CS,
}

# Roles whose input stage sees the net voltage, given the record defines
# a maximum tolerated input.
_RECEIVER_ROLES = {
    PinRole.GPIO, PinRole.PWM_CAPABLE_GPIO, PinRole.ANALOG_IN,
    PinRole.I2C_SDA, PinRole.I2C_SCL, PinRole.SPI_MOSI, PinRole.SPI_MISO,
    PinRole.SPI_SCK, PinRole.SPI_CS, PinRole.UART_RX, PinRole.GATE,
    PinRole.OTHER,
}

# Nets that count as "driving" for LED series-resistor tracing.
_LED_DRIVE_ROLES = {PinRole.GPIO, PinRole.PWM_CAPABLE_GPIO, PinRole.POWER_OUT}

# Nets that switch an inductive load.
_INDUCTIVE_DRIVE_ROLES = {PinRole.GPIO, PinRole.PWM_CAPABLE_GPIO, PinRole.DRAIN}


@dataclass(frozen=True)
class ErcConfig:
    short_threshold_ohms: float = 1.0
    low_resistance_ohms: float = 50.0
    min_led_series_ohms: float = 100.0
    pullup_min_ohms: float = 1000.0
    pullup_max_ohms: float = 100000.0
    disabled: tuple[str, ...] = ()

    @classmethod
    def from_file(cls, path: str | Path) -> "ErcConfig":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {f.name for f in fields(cls)}
        kwargs = {k: v for k, v in data.items() if k in known}
        if "disabled" in kwargs:
            kwargs["disabled"] = tuple(kwargs["disabled"])
        return cls(**kwargs)


@dataclass
class ErcReport:
    violations: list[Violation] = field(default_factory=list)
    halted_ood: bool = False

    @property
    def counts(self) -> dict[Severity, int]:
        return count_by_severity(self.violations)

    def count(self, severity: Severity) -> int:
        return self.counts[severity]

    def to_dict(self) -> dict[str, Any]:
        return {
            "violations": [v.to_dict() for v in self.violations],
            "counts": {sev.value: n for sev, n in self.counts.items()},
            "halted_ood": self.halted_ood,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


@dataclass(frozen=True)
class _PinView:
    ref: PinRef
    part: Part
    record: ComponentRecord
    spec: PinSpec


def _net_pin_views(graph: NetGraph, lib: ComponentLibrary,
                   net: Net) -> list[_PinView]:
    parts = {p.id: p for p in graph.parts}
    views = []
    for ref in net.pins:
        part = parts.get(ref.part_id)
        if part is None:
            continue
        record = lib.get(part.type)
        if record is None:
            continue
        spec = record.pin(ref.pin_name)
        if spec is None:
            continue
        views.append(_PinView(ref, part, record, spec))
    return views


def _pushpull_drivers(views: list[_PinView]) -> list[_PinView]:
    return [v for v in views
            if v.spec.role in _PUSHPULL_ROLES
            and v.record.specs.v_out_high is not None]


def _net_label(net: Net) -> str:
    return f"net#{net.id}"


def check_galvanic_short(graph: NetGraph,
                         config: ErcConfig) -> list[Violation]:
    """Rail-to-rail shorts via shortest weighted path between net pairs."""
    violations: list[Violation] = []
    seen: set[tuple[NetId, NetId]] = set()
    for vcc in graph.vcc_nets():
        for gnd in graph.gnd_nets():
            if vcc.id == gnd.id and not vcc.poisoned:
                continue
            pair = (vcc.id, gnd.id)
            if pair in seen:
                continue
            seen.add(pair)
            result = min_weight_path(graph, vcc.id, gnd.id)
            if result is None:
                continue
            path, total = result
            subjects = [_net_label(vcc), _net_label(gnd)]
            subjects += [b.component_id for b in path]
            volts = f"{vcc.voltage:g} V" if vcc.voltage is not None else "supply"
            if total < config.short_threshold_ohms:
                violations.append(Violation(
                    rule_id="galvanic-short",
                    severity=Severity.FATAL,
                    message=(f"{volts} rail shorted to ground "
                             f"({total:g} ohm path)"),
                    subjects=subjects,
                ))
            elif total < config.low_resistance_ohms:
                violations.append(Violation(
                    rule_id="near-short-low-resistance",
                    severity=Severity.MAJOR,
                    message=(f"{volts} rail reaches ground through only "
                             f"{total:g} ohm"),
                    subjects=subjects,
                ))
    return violations


def check_led_series_resistor(graph: NetGraph, lib: ComponentLibrary,
                              config: ErcConfig) -> list[Violation]:
    """Parts needing a series resistor must not see a low-impedance drive."""
    violations: list[Violation] = []
    driving_nets = [
        net for net in graph.nets
        if any(v.spec.role in _LED_DRIVE_ROLES
               for v in _net_pin_views(graph, lib, net))
    ]
    for part in graph.parts:
        record = lib.get(part.type)
        if record is None or not record.specs.needs_series_resistor:
            continue
        anode = next((p for p in record.pins if p.role == PinRole.LED_ANODE),
                     None)
        if anode is None:
            continue
        ref = PinRef(part.id, anode.name)
        net_id = graph.pin_to_net.get(ref)
        if net_id is None:
            continue
        totals = []
        for net in driving_nets:
            result = min_weight_path(graph, net_id, net.id)
            if result is not None:
                totals.append(result[1])
        if totals and all(t < config.min_led_series_ohms for t in totals):
            violations.append(Violation(
                rule_id="led-no-series-resistor",
                severity=Severity.MAJOR,
                message=(f"{part.id!r} is driven without a current-limiting "
                         f"resistor (best path "
                         f"{min(totals):g} ohm, need >= "
                         f"{config.min_led_series_ohms:g})"),
                subjects=[str(ref)],
            ))
    return violations


def _bus_nets(graph: NetGraph, lib: ComponentLibrary,
              role: PinRole) -> list[tuple[Net, list[_PinView]]]:
    buses = []
    for net in graph.nets:
        views = [v for v in _net_pin_views(graph, lib, net)
                 if v.spec.role == role]
        if views:
            buses.append((net, views))
    return buses


def check_pullups(graph: NetGraph, lib: ComponentLibrary,
                  config: ErcConfig) -> list[Violation]:
    """I2C buses with 2+ devices need pull-ups; addresses must not clash."""
    violations: list[Violation] = []
    for role, label in ((PinRole.I2C_SDA, "SDA"), (PinRole.I2C_SCL, "SCL")):
        for net, views in _bus_nets(graph, lib, role):
            devices = sorted({v.part.id for v in views})
            if len(devices) < 2:
                continue
            if any(v.part.attrs.get("onboard_pullups") is True for v in views):
                continue
            pulled = False
            for bridge in graph.passive_bridges:
                if net.id not in (bridge.net_a, bridge.net_b):
                    continue
                if not (config.pullup_min_ohms <= bridge.weight
                        <= config.pullup_max_ohms):
                    continue
                other = (bridge.net_b if bridge.net_a == net.id
                         else bridge.net_a)
                if graph.net(other).kind == "vcc":
                    pulled = True
                    break
            if not pulled:
                violations.append(Violation(
                    rule_id="i2c-missing-pullup",
                    severity=Severity.MAJOR,
                    message=(f"I2C {label} bus with {len(devices)} devices "
                             f"has no pull-up resistor to a supply rail"),
                    subjects=sorted(str(v.ref) for v in views),
                ))
    # Address conflicts are evaluated on SDA membership only; SCL would
    # double-report the same bus.
    for net, views in _bus_nets(graph, lib, PinRole.I2C_SDA):
        by_address: dict[int, list[str]] = {}
        for view in views:
            address = view.part.attrs.get("i2c_address")
            if not isinstance(address, int) or isinstance(address, bool):
                address = view.record.specs.i2c_address
            if address is None:
                continue
            by_address.setdefault(address, []).append(view.part.id)
        for address in sorted(by_address):
            owners = sorted(by_address[address])
            if len(owners) > 1:
                violations.append(Violation(
                    rule_id="i2c-address-conflict",
                    severity=Severity.MAJOR,
                    message=(f"devices {', '.join(owners)} share I2C "
                             f"address 0x{address:02X} on one bus"),
                    subjects=owners,
                ))
    return violations


def check_flyback(graph: NetGraph, lib: ComponentLibrary) -> list[Violation]:
    """Switched inductive loads need a diode across their terminals."""
    violations: list[Violation] = []
    parts = {p.id: p for p in graph.parts}
    for part in graph.parts:
        record = lib.get(part.type)
        if record is None or not record.specs.is_inductive_load:
            continue
        terminals = [p for p in record.pins
                     if p.role == PinRole.INDUCTIVE_TERMINAL]
        if len(terminals) != 2:
            continue
        refs = [PinRef(part.id, t.name) for t in terminals]
        nets = [graph.pin_to_net.get(r) for r in refs]
        if None in nets or nets[0] == nets[1]:
            continue
        terminal_nets = {nets[0], nets[1]}
        driven = any(
            v.spec.role in _INDUCTIVE_DRIVE_ROLES
            for net_id in terminal_nets
            for v in _net_pin_views(graph, lib, graph.net(net_id)))
        if not driven:
            continue
        protected = False
        for bridge in graph.passive_bridges:
            owner = parts.get(bridge.component_id)
            owner_record = lib.get(owner.type) if owner else None
            if owner_record is None or owner_record.category != "diode":
                continue
            if {bridge.net_a, bridge.net_b} == terminal_nets:
                protected = True
                break
        if not protected:
            violations.append(Violation(
                rule_id="missing-flyback-diode",
                severity=Severity.MAJOR,
                message=(f"inductive load {part.id!r} is switched without "
                         f"a flyback diode across its terminals"),
                subjects=[str(r) for r in refs],
            ))
    return violations


def check_logic_levels(graph: NetGraph,
                       lib: ComponentLibrary) -> list[Violation]:
    """Strict overdrive test per net: max driven-high > min tolerated input."""
    violations: list[Violation] = []
    for net in graph.nets:
        if net.kind not in ("signal", "unknown"):
            continue
        views = _net_pin_views(graph, lib, net)
        drivers = _pushpull_drivers(views)
        receivers = [v for v in views
                     if v.spec.role in _RECEIVER_ROLES
                     and v.record.specs.v_in_max is not None]
        if not drivers or not receivers:
            continue
        top = max(drivers, key=lambda v: v.record.specs.v_out_high)
        weakest = min(receivers, key=lambda v: v.record.specs.v_in_max)
        v_out = top.record.specs.v_out_high
        v_in_max = weakest.record.specs.v_in_max
        if v_out > v_in_max:
            violations.append(Violation(
                rule_id="logic-level-overdrive",
                severity=Severity.MAJOR,
                message=(f"{top.ref} drives {v_out:g} V into {weakest.ref} "
                         f"rated for at most {v_in_max:g} V"),
                subjects=[str(top.ref), str(weakest.ref)],
            ))
    return violations


def _directly_driven(views: list[_PinView]) -> bool:
    if _pushpull_drivers(views):
        return True
    return any(v.spec.role in (PinRole.POWER_OUT, PinRole.GROUND)
               for v in views)


def check_floating_and_contention(graph: NetGraph,
                                  lib: ComponentLibrary) -> list[Violation]:
    """Undriven must-drive inputs and multiply-driven nets."""
    violations: list[Violation] = []
    driven_nets = [net for net in graph.nets
                   if _directly_driven(_net_pin_views(graph, lib, net))]
    driven_ids = {net.id for net in driven_nets}

    def reachable_drive(net_id: NetId) -> bool:
        if net_id in driven_ids:
            return True
        # A resistive path (pull-up/pull-down) to a driven net counts.
        return any(min_weight_path(graph, net_id, d.id) is not None
                   for d in driven_nets)

    for part in graph.parts:
        record = lib.get(part.type)
        if record is None:
            continue
        for spec in record.pins:
            if not spec.requires_drive:
                continue
            ref = PinRef(part.id, spec.name)
            net_id = graph.pin_to_net.get(ref)
            if net_id is None or not reachable_drive(net_id):
                violations.append(Violation(
                    rule_id="floating-input",
                    severity=Severity.MINOR,
                    message=f"input {ref} must be driven but floats",
                    subjects=[str(ref)],
                ))

    for net in graph.nets:
        drivers = _pushpull_drivers(_net_pin_views(graph, lib, net))
        if len(drivers) >= 2:
            refs = sorted(str(v.ref) for v in drivers)
            violations.append(Violation(
                rule_id="net-contention",
                severity=Severity.MAJOR,
                message=(f"{len(drivers)} push-pull outputs contend on "
                         f"{_net_label(net)}: {', '.join(refs)}"),
                subjects=refs,
            ))
    return violations


def check_pwm_and_decoupling(graph: NetGraph,
                             lib: ComponentLibrary) -> list[Violation]:
    """PWM-requesting loads on plain GPIOs; missing supply decoupling."""
    violations: list[Violation] = []
    for part in graph.parts:
        if part.attrs.get("drive") != "pwm":
            continue
        record = lib.get(part.type)
        if record is None:
            continue
        offender: tuple[PinRef, PinRef] | None = None
        satisfied = False
        for spec in record.pins:
            ref = PinRef(part.id, spec.name)
            net_id = graph.pin_to_net.get(ref)
            if net_id is None:
                continue
            views = _net_pin_views(graph, lib, graph.net(net_id))
            if any(v.spec.role == PinRole.PWM_CAPABLE_GPIO for v in views):
                satisfied = True
                break
            plain = [v for v in views if v.spec.role == PinRole.GPIO
                     and v.record.specs.v_out_high is not None]
            if plain and offender is None:
                offender = (ref, plain[0].ref)
        if not satisfied and offender is not None:
            violations.append(Violation(
                rule_id="non-pwm-pin",
                severity=Severity.MAJOR,
                message=(f"{offender[0]} requests PWM drive but "
                         f"{offender[1]} is not PWM capable"),
                subjects=[str(offender[0]), str(offender[1])],
            ))

    for part in graph.parts:
        record = lib.get(part.type)
        if record is None or not record.specs.needs_decoupling:
            continue
        parts = {p.id: p for p in graph.parts}
        power_nets = []
        for spec in record.pins:
            if spec.role != PinRole.POWER_IN:
                continue
            net_id = graph.pin_to_net.get(PinRef(part.id, spec.name))
            if net_id is not None:
                power_nets.append((spec.name, net_id))
        if not power_nets:
            continue
        decoupled = False
        for _, net_id in power_nets:
            for bridge in graph.passive_bridges:
                if net_id not in (bridge.net_a, bridge.net_b):
                    continue
                owner = parts.get(bridge.component_id)
                owner_record = lib.get(owner.type) if owner else None
                if owner_record is None or owner_record.category != "capacitor":
                    continue
                other = (bridge.net_b if bridge.net_a == net_id
                         else bridge.net_a)
                if graph.net(other).kind == "gnd":
                    decoupled = True
                    break
            if decoupled:
                break
        if not decoupled:
            pin_name, net_id = power_nets[0]
            violations.append(Violation(
                rule_id="missing-decoupling",
                severity=Severity.WARNING,
                message=(f"{part.id!r} wants a decoupling capacitor from "
                         f"its supply pin {pin_name!r} to ground"),
                subjects=[str(PinRef(part.id, pin_name))],
            ))
    return violations


@dataclass(frozen=True)
class CheckerSpec:
    id: str
    rules: tuple[str, ...]
    run: Callable[[NetGraph, ComponentLibrary, ErcConfig], list[Violation]]
    enabled: bool = True


_REGISTRY: list[CheckerSpec] = [
    CheckerSpec(
        id="shorts",
        rules=("galvanic-short", "near-short-low-resistance"),
        run=lambda g, lib, cfg: check_galvanic_short(g, cfg),
    ),
    CheckerSpec(
        id="led-series",
        rules=("led-no-series-resistor",),
        run=lambda g, lib, cfg: check_led_series_resistor(g, lib, cfg),
    ),
    CheckerSpec(
        id="i2c",
        rules=("i2c-missing-pullup", "i2c-address-conflict"),
        run=lambda g, lib, cfg: check_pullups(g, lib, cfg),
    ),
    CheckerSpec(
        id="flyback",
        rules=("missing-flyback-diode",),
        run=lambda g, lib, cfg: check_flyback(g, lib),
    ),
    CheckerSpec(
        id="logic-levels",
        rules=("logic-level-overdrive",),
        run=lambda g, lib, cfg: check_logic_levels(g, lib),
    ),
    CheckerSpec(
        id="drive",
        rules=("floating-input", "net-contention"),
        run=lambda g, lib, cfg: check_floating_and_contention(g, lib),
    ),
    CheckerSpec(
        id="pwm-decoupling",
        rules=("non-pwm-pin", "missing-decoupling"),
        run=lambda g, lib, cfg: check_pwm_and_decoupling(g, lib),
    ),
]


def registry() -> list[CheckerSpec]:
    return list(_REGISTRY)


def register_checker(spec: CheckerSpec) -> None:
    """Append a third-party checker; ids must be unique."""
    if any(existing.id == spec.id for existing in _REGISTRY):
        raise ValueError(f"checker id {spec.id!r} already registered")
    _REGISTRY.append(spec)


def known_rule_ids() -> set[str]:
    return {rule for spec in _REGISTRY for rule in spec.rules}


def run_erc(doc: CircuitDocument, lib: ComponentLibrary,
            config: ErcConfig | None = None) -> ErcReport:
    """Build the net graph once and run every enabled checker over it."""
    config = config or ErcConfig()
    graph = build_net_graph(doc, lib)
    violations: list[Violation] = []
    for spec in _REGISTRY:
        if not spec.enabled or spec.id in config.disabled:
            continue
        violations.extend(spec.run(graph, lib, config))
    return ErcReport(violations=violations)
