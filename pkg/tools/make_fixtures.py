#!/usr/bin/env python3
"""Build the fixture corpus: ERC fault circuits, benchmark prompts, replays.

Every fixture's expected outcome is written down here by design, then the
script verifies the toolkit agrees before writing anything.  Rerunning the
script is idempotent; outputs land under fixtures/.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from circuitlm import erc, kb, schema  # noqa: E402
from circuitlm.violations import Severity  # noqa: E402

FIXTURES = REPO / "fixtures"
CIRCUITS = FIXTURES / "circuits"
REPLAYS = FIXTURES / "replays"
REPLAYS_OOD = FIXTURES / "replays_ood"

_COLORS = ("red", "black", "green", "blue", "orange", "purple")


def part(type_: str, id_: str, index: int, attrs: dict | None = None,
         rotate: float | None = None) -> dict:
    entry = {
        "type": type_,
        "id": id_,
        "top": 60 + (index // 3) * 180,
        "left": 60 + (index % 3) * 260,
        "attrs": attrs or {},
    }
    if rotate is not None:
        entry["rotate"] = rotate
    return entry


def doc(parts: list[dict], wires: list[tuple[str, str]],
        author: str = "circuitlm-fixtures") -> dict:
    connections = []
    for i, (start, end) in enumerate(wires):
        connections.append({
            "startPin": start,
            "endPin": end,
            "color": _COLORS[i % len(_COLORS)],
            "route": [],
        })
    return {"version": 1, "author": author, "parts": parts,
            "connections": connections}


# --------------------------------------------------------------------------
# ERC fault corpus: (name, expected findings) pairs; the *_fixed twin of
# every fault must come out completely clean.
# --------------------------------------------------------------------------

def build_circuits() -> dict[str, tuple[dict, list[tuple[str, str]]]]:
    circuits: dict[str, tuple[dict, list[tuple[str, str]]]] = {}

    def add(name: str, document: dict, expected: list[tuple[str, str]]):
        circuits[name] = (document, expected)

    add("short_vcc_gnd", doc(
        [part("arduino-uno", "arduino", 0)],
        [("arduino:5V", "arduino:GND")]),
        [("galvanic-short", "Fatal")])
    add("short_vcc_gnd_fixed", doc(
        [part("arduino-uno", "arduino", 0),
         part("resistor", "r1", 1, {"resistance": 220}),
         part("led", "led1", 2)],
        [("arduino:5V", "r1:1"), ("r1:2", "led1:A"),
         ("led1:C", "arduino:GND")]),
        [])

    add("near_short", doc(
        [part("arduino-uno", "arduino", 0),
         part("resistor", "r1", 1, {"resistance": 10})],
        [("arduino:5V", "r1:1"), ("r1:2", "arduino:GND")]),
        [("near-short-low-resistance", "Major")])
    add("near_short_fixed", doc(
        [part("arduino-uno", "arduino", 0),
         part("resistor", "r1", 1, {"resistance": 220})],
        [("arduino:5V", "r1:1"), ("r1:2", "arduino:GND")]),
        [])

    add("led_no_series", doc(
        [part("arduino-uno", "arduino", 0), part("led", "led1", 1)],
        [("arduino:D3", "led1:A"), ("led1:C", "arduino:GND")]),
        [("led-no-series-resistor", "Major")])
    add("led_no_series_fixed", doc(
        [part("arduino-uno", "arduino", 0),
         part("resistor", "r1", 1, {"resistance": 220}),
         part("led", "led1", 2)],
        [("arduino:D3", "r1:1"), ("r1:2", "led1:A"),
         ("led1:C", "arduino:GND")]),
        [])

    i2c_parts = [part("esp32-devkit", "esp", 0),
                 part("mpu6050", "imu", 1),
                 part("bmp280", "baro", 2)]
    i2c_wires = [
        ("imu:VCC", "esp:3V3"), ("imu:GND", "esp:GND"),
        ("baro:VCC", "esp:3V3"), ("baro:GND", "esp:GND"),
        ("imu:SDA", "esp:D21"), ("baro:SDA", "esp:D21"),
        ("imu:SCL", "esp:D22"), ("baro:SCL", "esp:D22"),
    ]
    add("i2c_no_pullups", doc(list(i2c_parts), list(i2c_wires)),
        [("i2c-missing-pullup", "Major"), ("i2c-missing-pullup", "Major")])
    add("i2c_no_pullups_fixed", doc(
        i2c_parts + [part("resistor", "rsda", 3, {"resistance": 4700}),
                     part("resistor", "rscl", 4, {"resistance": 4700})],
        i2c_wires + [("rsda:1", "esp:D21"), ("rsda:2", "esp:3V3"),
                     ("rscl:1", "esp:D22"), ("rscl:2", "esp:3V3")]),
        [])

    def twin_imus(second_attrs: dict) -> dict:
        return doc(
            [part("esp32-devkit", "esp", 0),
             part("mpu6050", "imu1", 1),
             part("mpu6050", "imu2", 2, second_attrs),
             part("resistor", "rsda", 3, {"resistance": 4700}),
             part("resistor", "rscl", 4, {"resistance": 4700})],
            [("imu1:VCC", "esp:3V3"), ("imu1:GND", "esp:GND"),
             ("imu2:VCC", "esp:3V3"), ("imu2:GND", "esp:GND"),
             ("imu1:SDA", "esp:D21"), ("imu2:SDA", "esp:D21"),
             ("imu1:SCL", "esp:D22"), ("imu2:SCL", "esp:D22"),
             ("rsda:1", "esp:D21"), ("rsda:2", "esp:3V3"),
             ("rscl:1", "esp:D22"), ("rscl:2", "esp:3V3")])

    add("i2c_addr_conflict", twin_imus({}),
        [("i2c-address-conflict", "Major")])
    add("i2c_addr_conflict_fixed", twin_imus({"i2c_address": 105}), [])

    relay_parts = [part("arduino-uno", "arduino", 0),
                   part("n-mosfet", "q1", 1),
                   part("relay-5v", "k1", 2)]
    relay_wires = [("arduino:5V", "k1:COIL1"), ("k1:COIL2", "q1:D"),
                   ("q1:S", "arduino:GND"), ("q1:G", "arduino:D2")]
    add("missing_flyback", doc(list(relay_parts), list(relay_wires)),
        [("missing-flyback-diode", "Major")])
    add("missing_flyback_fixed", doc(
        relay_parts + [part("diode-1n4007", "d1", 3)],
        relay_wires + [("d1:A", "k1:COIL2"), ("d1:C", "k1:COIL1")]),
        [])

    add("logic_overdrive", doc(
        [part("arduino-uno", "arduino", 0), part("esp32-devkit", "esp", 1)],
        [("arduino:D2", "esp:D34"), ("arduino:GND", "esp:GND")]),
        [("logic-level-overdrive", "Major")])
    add("logic_overdrive_fixed", doc(
        [part("arduino-uno", "arduino", 0), part("esp32-devkit", "esp", 1)],
        [("esp:D15", "arduino:A0"), ("arduino:GND", "esp:GND")]),
        [])

    motor_parts = [part("arduino-uno", "arduino", 0),
                   part("n-mosfet", "q1", 1),
                   part("dc-motor", "m1", 2),
                   part("diode-1n4007", "d1", 3)]
    motor_wires = [("arduino:5V", "m1:1"), ("m1:2", "q1:D"),
                   ("q1:S", "arduino:GND"),
                   ("d1:A", "m1:2"), ("d1:C", "m1:1")]
    add("floating_gate", doc(list(motor_parts), list(motor_wires)),
        [("floating-input", "Minor")])
    add("floating_gate_fixed", doc(
        list(motor_parts), motor_wires + [("q1:G", "arduino:D3")]),
        [])

    add("contention", doc(
        [part("arduino-uno", "arduino", 0)],
        [("arduino:D2", "arduino:D4")]),
        [("net-contention", "Major")])
    add("contention_fixed", doc(
        [part("arduino-uno", "arduino", 0),
         part("resistor", "r1", 1, {"resistance": 10000})],
        [("arduino:D2", "r1:1"), ("r1:2", "arduino:D4")]),
        [])

    def servo_doc(signal_pin: str) -> dict:
        return doc(
            [part("arduino-uno", "arduino", 0),
             part("servo-sg90", "servo", 1, {"drive": "pwm"})],
            [("servo:VCC", "arduino:5V"), ("servo:GND", "arduino:GND"),
             ("servo:SIG", f"arduino:{signal_pin}")])

    add("non_pwm_servo", servo_doc("D2"), [("non-pwm-pin", "Major")])
    add("non_pwm_servo_fixed", servo_doc("D3"), [])

    sht_parts = [part("esp32-devkit", "esp", 0),
                 part("sht31", "sht", 1),
                 part("resistor", "rsda", 2, {"resistance": 4700}),
                 part("resistor", "rscl", 3, {"resistance": 4700})]
    sht_wires = [("sht:VCC", "esp:3V3"), ("sht:GND", "esp:GND"),
                 ("sht:SDA", "esp:D21"), ("sht:SCL", "esp:D22"),
                 ("rsda:1", "esp:D21"), ("rsda:2", "esp:3V3"),
                 ("rscl:1", "esp:D22"), ("rscl:2", "esp:3V3")]
    add("missing_decoupling", doc(list(sht_parts), list(sht_wires)),
        [("missing-decoupling", "Warning")])
    add("missing_decoupling_fixed", doc(
        sht_parts + [part("capacitor", "c1", 4, {"capacitance": 1e-7})],
        sht_wires + [("c1:1", "sht:VCC"), ("c1:2", "esp:GND")]),
        [])

    # Round-trip shape mirroring the interchange format examples, with
    # rotation, extras, and attrs exercised.
    listing = doc(
        [part("arduino-uno", "arduino", 0),
         part("l298n", "l298n", 1, {"note": "drives both motors"},
              rotate=90)],
        [("arduino:5V", "l298n:5V")])
    listing["revision"] = "a"
    add("listing_example", listing, None)  # type: ignore[arg-type]

    # Multi-path resistor mesh for the shortest-path oracle tests.
    add("parallel_paths", doc(
        [part("arduino-uno", "arduino", 0),
         part("resistor", "r1", 1, {"resistance": 100}),
         part("resistor", "r2", 2, {"resistance": 220}),
         part("resistor", "r3", 3, {"resistance": 30}),
         part("resistor", "r4", 4, {"resistance": 15})],
        [("arduino:5V", "r1:1"), ("r1:2", "arduino:GND"),
         ("arduino:5V", "r2:1"), ("r2:2", "arduino:GND"),
         ("arduino:5V", "r3:1"), ("r3:2", "r4:1"),
         ("r4:2", "arduino:GND")]),
        [("near-short-low-resistance", "Major")])

    return circuits


# --------------------------------------------------------------------------
# Benchmark prompts and replay transcripts
# --------------------------------------------------------------------------

def cot_reply(document: dict) -> str:
    steps = [f"{i + 1}. connect {c['startPin']} to {c['endPin']}"
             for i, c in enumerate(document["connections"])]
    types = sorted({p["type"] for p in document["parts"]})
    return (
        "GOALS:\nImplement the requested circuit with the verified parts: "
        + ", ".join(types) + ".\n\n"
        "POWER:\nPower every module from the board rail matching its "
        "supply voltage; common ground throughout.\n\n"
        "SAFETY:\nKeep logic levels matched, limit LED current, protect "
        "switched inductive loads, decouple bare sensor ICs.\n\n"
        "WIRING:\n" + "\n".join(steps) + "\n")


def _bench_docs(circuits) -> list[dict]:
    """(id, difficulty, text, categories, document, expectations)."""
    c = {name: document for name, (document, _) in circuits.items()}
    uart_overdrive = doc(
        [part("arduino-uno", "arduino", 0), part("esp32-devkit", "esp", 1)],
        [("arduino:D1", "esp:RX"), ("arduino:GND", "esp:GND")])
    motor_direct = doc(
        [part("arduino-uno", "arduino", 0),
         part("dc-motor", "m1", 1, {"drive": "pwm"})],
        [("m1:1", "arduino:D3"), ("m1:2", "arduino:GND")])
    pot_read = doc(
        [part("arduino-uno", "arduino", 0), part("potentiometer", "pot", 1)],
        [("pot:1", "arduino:5V"), ("pot:W", "arduino:A0"),
         ("pot:2", "arduino:GND")])
    button_pullup = doc(
        [part("arduino-uno", "arduino", 0), part("push-button", "btn", 1),
         part("resistor", "r1", 2, {"resistance": 10000})],
        [("btn:1", "arduino:D2"), ("btn:2", "arduino:GND"),
         ("r1:1", "arduino:D2"), ("r1:2", "arduino:5V")])
    led_pwm = doc(
        [part("arduino-uno", "arduino", 0),
         part("resistor", "r1", 1, {"resistance": 220}),
         part("led", "led1", 2, {"drive": "pwm"})],
        [("arduino:D3", "r1:1"), ("r1:2", "led1:A"),
         ("led1:C", "arduino:GND")])
    sonar = doc(
        [part("arduino-uno", "arduino", 0), part("hc-sr04", "sonar", 1)],
        [("sonar:VCC", "arduino:5V"), ("sonar:GND", "arduino:GND"),
         ("sonar:TRIG", "arduino:D7"), ("sonar:ECHO", "arduino:D8")])
    buzzer = doc(
        [part("arduino-uno", "arduino", 0), part("buzzer-active", "bz", 1)],
        [("bz:POS", "arduino:D5"), ("bz:NEG", "arduino:GND")])
    pir = doc(
        [part("arduino-uno", "arduino", 0), part("pir-sensor", "pir", 1)],
        [("pir:VCC", "arduino:5V"), ("pir:GND", "arduino:GND"),
         ("pir:OUT", "arduino:D2")])
    dht = doc(
        [part("arduino-uno", "arduino", 0), part("dht22", "dht", 1),
         part("resistor", "r1", 2, {"resistance": 10000})],
        [("dht:VCC", "arduino:5V"), ("dht:GND", "arduino:GND"),
         ("dht:DATA", "arduino:D4"), ("r1:1", "dht:DATA"),
         ("r1:2", "arduino:5V")])
    oled = doc(
        [part("esp32-devkit", "esp", 0),
         part("ssd1306-oled", "oled", 1, {"onboard_pullups": True})],
        [("oled:VCC", "esp:3V3"), ("oled:GND", "esp:GND"),
         ("oled:SDA", "esp:D21"), ("oled:SCL", "esp:D22")])
    l298_arduino = doc(
        [part("arduino-uno", "arduino", 0), part("l298n", "drv", 1),
         part("dc-motor", "m1", 2, {"drive": "pwm"}),
         part("battery-9v", "bat", 3)],
        [("bat:PLUS", "drv:VS"), ("bat:MINUS", "arduino:GND"),
         ("arduino:GND", "drv:GND"), ("arduino:5V", "drv:5V"),
         ("arduino:D5", "drv:ENA"), ("arduino:D2", "drv:IN1"),
         ("arduino:D4", "drv:IN2"), ("m1:1", "drv:OUT1"),
         ("m1:2", "drv:OUT2")])

    def i2c_single(key: str, dev_id: str) -> dict:
        return doc(
            [part("esp32-devkit", "esp", 0), part(key, dev_id, 1),
             part("resistor", "rsda", 2, {"resistance": 4700}),
             part("resistor", "rscl", 3, {"resistance": 4700})],
            [(f"{dev_id}:VCC", "esp:3V3"), (f"{dev_id}:GND", "esp:GND"),
             (f"{dev_id}:SDA", "esp:D21"), (f"{dev_id}:SCL", "esp:D22"),
             ("rsda:1", "esp:D21"), ("rsda:2", "esp:3V3"),
             ("rscl:1", "esp:D22"), ("rscl:2", "esp:3V3")])

    ldr_divider = doc(
        [part("arduino-uno", "arduino", 0),
         part("photoresistor", "ldr", 1, {"resistance": 10000}),
         part("resistor", "r1", 2, {"resistance": 10000})],
        [("arduino:5V", "ldr:1"), ("ldr:2", "arduino:A0"),
         ("r1:1", "arduino:A0"), ("r1:2", "arduino:GND")])
    esp_led = doc(
        [part("esp32-devkit", "esp", 0),
         part("resistor", "r1", 1, {"resistance": 220}),
         part("led", "led1", 2)],
        [("esp:D4", "r1:1"), ("r1:2", "led1:A"), ("led1:C", "esp:GND")])
    radar = doc(
        [part("arduino-uno", "arduino", 0),
         part("servo-sg90", "servo", 1, {"drive": "pwm"}),
         part("hc-sr04", "sonar", 2)],
        [("servo:VCC", "arduino:5V"), ("servo:GND", "arduino:GND"),
         ("servo:SIG", "arduino:D3"), ("sonar:VCC", "arduino:5V"),
         ("sonar:GND", "arduino:GND"), ("sonar:TRIG", "arduino:D7"),
         ("sonar:ECHO", "arduino:D8")])
    nrf = doc(
        [part("esp32-devkit", "esp", 0), part("nrf24l01", "radio", 1)],
        [("radio:VCC", "esp:3V3"), ("radio:GND", "esp:GND"),
         ("radio:CSN", "esp:D5"), ("radio:SCK", "esp:D18"),
         ("radio:MOSI", "esp:D23"), ("radio:MISO", "esp:D19"),
         ("radio:CE", "esp:D15")])
    rover = doc(
        [part("esp32-devkit", "esp", 0), part("l298n", "drv", 1),
         part("dc-motor", "m1", 2, {"drive": "pwm"}),
         part("battery-9v", "bat", 3)],
        [("bat:PLUS", "drv:VS"), ("bat:MINUS", "esp:GND"),
         ("esp:GND", "drv:GND"), ("esp:D2", "drv:ENA"),
         ("esp:D15", "drv:IN1"), ("esp:D4", "drv:IN2"),
         ("m1:1", "drv:OUT1"), ("m1:2", "drv:OUT2")])
    glove_hub = doc(
        [part("esp32-devkit", "esp", 0),
         part("ssd1306-oled", "oled", 1, {"onboard_pullups": True}),
         part("mpu6050", "imu", 2)],
        [("oled:VCC", "esp:3V3"), ("oled:GND", "esp:GND"),
         ("oled:SDA", "esp:D21"), ("oled:SCL", "esp:D22"),
         ("imu:VCC", "esp:3V3"), ("imu:GND", "esp:GND"),
         ("imu:SDA", "esp:D21"), ("imu:SCL", "esp:D22")])
    alarm = doc(
        [part("arduino-uno", "arduino", 0), part("pir-sensor", "pir", 1),
         part("buzzer-active", "bz", 2), part("push-button", "btn", 3),
         part("resistor", "r1", 4, {"resistance": 10000})],
        [("pir:VCC", "arduino:5V"), ("pir:GND", "arduino:GND"),
         ("pir:OUT", "arduino:D2"), ("bz:POS", "arduino:D5"),
         ("bz:NEG", "arduino:GND"), ("btn:1", "arduino:D3"),
         ("btn:2", "arduino:GND"), ("r1:1", "arduino:D3"),
         ("r1:2", "arduino:5V")])

    return [
        # id, difficulty, prompt, stage-1 categories, document,
        # passes, majors, warnings, fence stage-4 reply
        ("p001", "Easy", "Blink an LED with an Arduino Uno.",
         ["Microcontroller", "LED", "Resistor"],
         c["led_no_series_fixed"], True, 0, 0, False),
        ("p002", "Easy",
         "Light an LED from the Arduino 5V rail through a resistor.",
         ["Arduino Uno", "LED", "Resistor"],
         c["short_vcc_gnd_fixed"], True, 0, 0, True),
        ("p003", "Easy",
         "Read a push button on an Arduino digital pin with a pull-up.",
         ["Microcontroller", "Button", "Pull-up Resistor"],
         button_pullup, True, 0, 0, False),
        ("p004", "Easy", "Dim an LED with PWM on an Arduino.",
         ["Microcontroller", "LED", "Current Limiting Resistor"],
         led_pwm, True, 0, 0, False),
        ("p005", "Easy", "Read a potentiometer with an Arduino analog input.",
         ["Microcontroller", "Potentiometer"], pot_read, True, 0, 0, False),
        ("p006", "Easy",
         "Measure distance with an ultrasonic sensor on an Arduino.",
         ["Microcontroller", "Ultrasonic Sensor"], sonar, True, 0, 0, False),
        ("p007", "Easy", "Sound an active buzzer from an Arduino pin.",
         ["Microcontroller", "Buzzer"], buzzer, True, 0, 0, True),
        ("p008", "Easy", "Detect motion with a PIR sensor on an Arduino.",
         ["Microcontroller", "PIR Motion Sensor"], pir, True, 0, 0, False),
        ("p009", "Easy",
         "Read temperature and humidity with a DHT22 on an Arduino.",
         ["Microcontroller", "Temperature Humidity Sensor", "Resistor"],
         dht, True, 0, 0, False),
        ("p010", "Easy", "Show text on an OLED display with an ESP32.",
         ["ESP32", "OLED Display"], oled, True, 0, 0, False),
        ("p011", "Medium",
         "Drive a small DC motor with an L298N module from an Arduino, "
         "with speed control.",
         ["Microcontroller", "Motor Driver", "DC Motor", "Battery"],
         l298_arduino, True, 0, 0, False),
        ("p012", "Medium", "Read orientation from an MPU6050 IMU on an ESP32.",
         ["ESP32", "IMU Sensor", "Pull-up Resistor"],
         i2c_single("mpu6050", "imu"), True, 0, 0, False),
        ("p013", "Medium",
         "Quick climate check: wire an SHT31 to an ESP32 breadboard.",
         ["ESP32", "Precision Humidity Sensor", "Pull-up Resistor"],
         i2c_single("sht31", "sht"), True, 0, 1, False),
        ("p014", "Medium",
         "Switch a relay from an Arduino using a MOSFET, safely.",
         ["Microcontroller", "MOSFET", "Relay", "Flyback Diode"],
         c["missing_flyback_fixed"], True, 0, 0, False),
        ("p015", "Medium", "Drive a servo from an Arduino for a steering arm.",
         ["Microcontroller", "Servo Motor"],
         c["non_pwm_servo_fixed"], True, 0, 0, False),
        ("p016", "Medium",
         "Read ambient light with an LDR divider on an Arduino.",
         ["Microcontroller", "Light Sensor", "Resistor"],
         ldr_divider, True, 0, 0, False),
        ("p017", "Medium",
         "Climate station: SHT31 on an ESP32 with proper decoupling.",
         ["ESP32", "Precision Humidity Sensor", "Pull-up Resistor",
          "Decoupling Capacitor"],
         c["missing_decoupling_fixed"], True, 0, 0, False),
        ("p018", "Medium", "Control an LED from a 3.3V ESP32 pin.",
         ["ESP32", "LED", "Resistor"], esp_led, True, 0, 0, False),
        ("p019", "Medium",
         "Hook an LED directly to an Arduino pin for a quick test.",
         ["Microcontroller", "LED"], c["led_no_series"], False, 1, 0, False),
        ("p020", "Medium", "Send Arduino serial logic into an ESP32 UART.",
         ["Arduino Uno", "ESP32"], uart_overdrive, False, 1, 0, False),
        ("p021", "Hard",
         "Gesture glove: two IMUs on one ESP32 I2C bus with distinct "
         "addresses.",
         ["ESP32", "IMU Sensor", "Pull-up Resistor"],
         c["i2c_addr_conflict_fixed"], True, 0, 0, False),
        ("p022", "Hard",
         "Radar sweep: an ultrasonic sensor on a servo, Arduino controlled.",
         ["Microcontroller", "Servo Motor", "Ultrasonic Sensor"],
         radar, True, 0, 0, False),
        ("p023", "Hard", "Wireless link: NRF24L01 radio on an ESP32 SPI bus.",
         ["ESP32", "Radio Module"], nrf, True, 0, 0, False),
        ("p024", "Hard", "Rover base: ESP32 driving an L298N and a motor.",
         ["ESP32", "Motor Driver", "DC Motor", "Battery"],
         rover, True, 0, 0, False),
        ("p025", "Hard",
         "Glove hub: OLED and IMU sharing one ESP32 I2C bus.",
         ["ESP32", "OLED Display", "IMU Sensor"],
         glove_hub, True, 0, 0, False),
        ("p026", "Hard",
         "Button-armed alarm: PIR sensor and buzzer on an Arduino.",
         ["Microcontroller", "PIR Motion Sensor", "Buzzer", "Button",
          "Resistor"],
         alarm, True, 0, 0, False),
        ("p027", "Hard",
         "Spin a DC motor straight off an Arduino pin with PWM.",
         ["Microcontroller", "DC Motor"], motor_direct, False, 1, 0, False),
        ("p028", "Hard", "Two sensors on an ESP32 I2C bus, no extra parts.",
         ["ESP32", "IMU Sensor", "Pressure Sensor"],
         c["i2c_no_pullups"], False, 2, 0, False),
        ("p029", "Hard",
         "Tie two Arduino outputs together for more drive current.",
         ["Arduino Uno"], c["contention"], False, 1, 0, False),
        ("p030", "Hard", "Servo signal from any free Arduino pin.",
         ["Microcontroller", "Servo Motor"],
         c["non_pwm_servo"], False, 1, 0, False),
    ]


def main() -> None:
    lib = kb.load_default_library()
    provider = kb.TrigramEmbedder()
    for directory in (CIRCUITS, REPLAYS, REPLAYS_OOD):
        directory.mkdir(parents=True, exist_ok=True)

    circuits = build_circuits()
    erc_expected: dict[str, list[dict]] = {}
    for name, (document, expected) in circuits.items():
        text = json.dumps(document, indent=2) + "\n"
        parsed = schema.parse_document(text)
        assert schema.parse_document(schema.serialize_document(parsed)) \
            == parsed, f"{name}: round-trip failed"
        assert schema.validate_against_library(parsed, lib) == [], \
            f"{name}: not library-canonical"
        (CIRCUITS / f"{name}.circuit.json").write_text(text, encoding="utf-8")
        if expected is None:
            continue
        report = erc.run_erc(parsed, lib)
        actual = sorted((v.rule_id, v.severity.value)
                        for v in report.violations)
        wanted = sorted((rule, sev) for rule, sev in expected)
        assert actual == wanted, f"{name}: expected {wanted}, got {actual}"
        erc_expected[name] = [{"rule_id": rule, "severity": sev}
                              for rule, sev in expected]
    (FIXTURES / "erc_expected.json").write_text(
        json.dumps(erc_expected, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {len(circuits)} circuit fixtures "
          f"({len(erc_expected)} with ERC expectations)")

    bench = _bench_docs(circuits)
    prompts = []
    expected_bench: dict[str, dict] = {}
    for (pid, difficulty, text, categories, document, passes, majors,
         warnings, fence) in bench:
        prompts.append({"id": pid, "text": text, "difficulty": difficulty})
        for category in categories:
            result = kb.match_component(category, lib, provider)
            assert result.matched, f"{pid}: category {category!r} is OOD"
        doc_text = json.dumps(document, indent=2)
        parsed = schema.parse_document(doc_text)
        assert schema.validate_against_library(parsed, lib) == [], \
            f"{pid}: replay document is not library-canonical"
        report = erc.run_erc(parsed, lib)
        counts = report.counts
        assert counts[Severity.FATAL] == 0, f"{pid}: unexpected Fatal"
        assert counts[Severity.MAJOR] == majors, \
            f"{pid}: majors {counts[Severity.MAJOR]} != designed {majors}"
        assert counts[Severity.WARNING] == warnings, \
            f"{pid}: warnings {counts[Severity.WARNING]} != {warnings}"
        passed = (counts[Severity.FATAL] == 0 and counts[Severity.MAJOR] == 0)
        assert passed == passes, f"{pid}: pass {passed} != designed {passes}"
        stage4 = f"```json\n{doc_text}\n```" if fence else doc_text
        replay = {"replies": [json.dumps(categories), cot_reply(document),
                              stage4]}
        (REPLAYS / f"{pid}.json").write_text(
            json.dumps(replay, indent=2) + "\n", encoding="utf-8")
        expected_bench[pid] = {"pass": passes, "majors": majors,
                               "warnings": warnings, "difficulty": difficulty}

    (FIXTURES / "prompts.json").write_text(
        json.dumps(prompts, indent=2) + "\n", encoding="utf-8")
    (FIXTURES / "expected.json").write_text(
        json.dumps(expected_bench, indent=2) + "\n", encoding="utf-8")

    ood_query = "Flux Capacitor Array"
    result = kb.match_component(ood_query, lib, provider)
    assert not result.matched, f"{ood_query!r} unexpectedly matched"
    (REPLAYS_OOD / "ood-1.json").write_text(json.dumps({
        "replies": [json.dumps(["Microcontroller", ood_query])],
    }, indent=2) + "\n", encoding="utf-8")

    by_difficulty: dict[str, list[bool]] = {}
    for meta in expected_bench.values():
        by_difficulty.setdefault(meta["difficulty"], []).append(meta["pass"])
    total_pass = sum(meta["pass"] for meta in expected_bench.values())
    print(f"wrote {len(prompts)} prompts, pass rate "
          f"{100.0 * total_pass / len(prompts):.1f}%")
    for difficulty, passes in by_difficulty.items():
        print(f"  {difficulty}: {sum(passes)}/{len(passes)}")


if __name__ == "__main__":
    main()
