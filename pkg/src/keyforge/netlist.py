"""Conductive netlist derivation from a placement.

Net classes:
  signal_bus  one per device; the continuous conductive rows plus the
              inter-row connector and the supply run to the rear
  return      one per digital/piano key outside ladder groups; ladder
              groups collapse member returns into a single net carrying
              distinct resistive paths
  capacitive  one per analog key
  ground      present iff a socket or a ladder pull-down needs it
  resistor_tap  one per printed pull-down resistor (socket devices)
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .frontend import DeviceSpec
from .geometry import rot2d
from .placement import Placement, PlacedKey


@dataclass(frozen=True)
class NetTerminal:
    position: tuple[float, float]  # device frame, mm
    layer: str                     # "ridge" | "floor"
    key_id: str | None = None


@dataclass
class Net:
    id: str
    net_class: str  # signal_bus | return | capacitive | ground | resistor_tap
    terminals: list[NetTerminal] = field(default_factory=list)
    key_id: str | None = None
    ladder_group: str | None = None
    # resistor_tap metadata: the two nets the printed resistor bridges
    bridges: tuple[str, str] | None = None
    target_ohms: float | None = None


@dataclass
class Netlist:
    nets: list[Net]
    pin_assignments: dict[str, str]

    def net(self, net_id: str) -> Net:
        for n in self.nets:
            if n.id == net_id:
                return n
        raise KeyError(net_id)


class NetlistError(Exception):
    pass


DEFAULT_PULLDOWN_OHMS = 10_000.0

_PIN_TABLES = {
    "flora": {
        "signal": "3V3", "ground": "GND",
        "digital": ["D6", "D9", "D10", "D12", "TX", "RX", "SCL", "SDA"],
        "analog": ["A7", "A9", "A10", "A11"],
    },
    "uno": {
        "signal": "5V", "ground": "GND",
        "digital": [f"D{i}" for i in range(2, 14)],
        "analog": [f"A{i}" for i in range(6)],
    },
    "mega": {
        "signal": "5V", "ground": "GND",
        "digital": [f"D{i}" for i in range(2, 56)],
        "analog": [f"A{i}" for i in range(16)],
    },
}

#: every physical pad of the microcontroller socket, in ring order
FLORA_PAD_RING = ["3V3", "GND", "D6", "D9", "D10", "D12", "TX", "RX",
                  "SCL", "SDA", "A7", "A9", "A10", "A11"]


def _device_terminal(pk: PlacedKey, local: tuple[float, float],
                     layer: str) -> NetTerminal:
    x, y = rot2d(local, pk.rotation_deg) if pk.rotation_deg else local
    return NetTerminal(position=(pk.x_mm + x, pk.y_mm + y), layer=layer,
                       key_id=pk.key.id)


def build_netlist(placement: Placement, spec: DeviceSpec) -> Netlist:
    """Derive nets and controller pin assignments for a legal placement."""
    signal = Net(id="signal", net_class="signal_bus")
    returns: list[Net] = []
    ladders: dict[str, Net] = {}
    caps: list[Net] = []

    for pk in placement.placed:
        for term in pk.blueprint.terminals:
            t = _device_terminal(pk, term.position, term.layer_hint)
            if term.net_role == "signal":
                signal.terminals.append(t)
            elif term.net_role == "return":
                group = pk.key.ladder_group
                if group:
                    net = ladders.get(group)
                    if net is None:
                        net = Net(id=f"ladder_{group}", net_class="return",
                                  ladder_group=group)
                        ladders[group] = net
                    net.terminals.append(t)
                else:
                    returns.append(Net(id=f"return_{pk.key.id}",
                                       net_class="return",
                                       key_id=pk.key.id, terminals=[t]))
            elif term.net_role == "capacitive":
                caps.append(Net(id=f"cap_{pk.key.id}", net_class="capacitive",
                                key_id=pk.key.id, terminals=[t]))

    returns.sort(key=lambda n: min(t.position[0] for t in n.terminals))
    caps.sort(key=lambda n: min(t.position[0] for t in n.terminals))
    ladder_nets = [ladders[g] for g in sorted(ladders)]

    socket = spec.controller.socket
    # printed ground exists only with a socket; ladder pull-downs without a
    # socket live on the external controller side
    need_ground = bool(socket)
    nets: list[Net] = [signal] + returns + ladder_nets + caps
    if need_ground:
        nets.append(Net(id="ground", net_class="ground"))
    if socket:
        for net in returns + ladder_nets:
            nets.append(Net(id=f"pulldown_{net.id}", net_class="resistor_tap",
                            bridges=(net.id, "ground"),
                            target_ohms=DEFAULT_PULLDOWN_OHMS))

    pins = _assign_pins(spec, signal, returns, ladder_nets, caps, need_ground)
    return Netlist(nets=nets, pin_assignments=pins)


def _assign_pins(spec: DeviceSpec, signal: Net, returns: list[Net],
                 ladder_nets: list[Net], caps: list[Net],
                 need_ground: bool) -> dict[str, str]:
    table = _PIN_TABLES[spec.controller.board]
    pins: dict[str, str] = {signal.id: table["signal"]}
    if need_ground:
        pins["ground"] = table["ground"]
    if len(returns) > len(table["digital"]):
        overflow = [n.id for n in returns[len(table["digital"]):]]
        raise NetlistError(
            f"digital pin budget of {spec.controller.board} exceeded by "
            f"{len(overflow)} nets: {', '.join(overflow)}")
    for net, pin in zip(returns, _spread(table["digital"], len(returns),
                                         spec.controller.socket)):
        pins[net.id] = pin
    analog_needed = ladder_nets + caps
    if len(analog_needed) > len(table["analog"]):
        overflow = [n.id for n in analog_needed[len(table["analog"]):]]
        raise NetlistError(
            f"analog pin budget of {spec.controller.board} exceeded by "
            f"{len(overflow)} nets: {', '.join(overflow)}")
    for net, pin in zip(analog_needed, _spread(table["analog"],
                                               len(analog_needed),
                                               spec.controller.socket)):
        pins[net.id] = pin
    return pins


def _spread(pads: list[str], n: int, socket: bool) -> list[str]:
    """Pads for ``n`` nets, listed left-to-right in net order.

    On socket boards the pads sit on a physical ring and the nets are
    sorted by key x position: the picks are spaced evenly over the arc,
    then listed in wrap order (ring position clockwise from the top pad).
    The leftmost net then owns the topmost west pad and approaches it
    around the outside, while nets nearer the ring centre hug the bottom,
    so the printed runs nest instead of crossing.  Without a socket the
    pads are just labels and the first ``n`` are fine.
    """
    if not socket or n >= len(pads):
        return pads[:n]
    if n <= 1:
        chosen = pads[:n]
    else:
        chosen = [pads[round(k * (len(pads) - 1) / (n - 1))]
                  for k in range(n)]
    return sorted(chosen, key=pad_wrap_rank)


def pad_wrap_rank(pin: str) -> tuple[float, str]:
    """Ring position measured clockwise from the top pad (west side first)."""
    if pin in FLORA_PAD_RING:
        top = len(FLORA_PAD_RING) // 2
        return ((top - FLORA_PAD_RING.index(pin)) % len(FLORA_PAD_RING), pin)
    return (0.0, pin)
