import json

import pytest

from circuitlm import erc
from circuitlm.erc import ErcConfig, run_erc
from circuitlm.netgraph import OPEN_SENTINEL_OHMS, build_net_graph
from circuitlm.schema import parse_document
from circuitlm.violations import Severity

from conftest import erc_expectations, load_circuit
from test_netgraph import brute_force_min_path, simple_doc


def findings(report):
    return sorted((v.rule_id, v.severity.value) for v in report.violations)


class TestRunErc:
    def test_empty_document_clean(self, lib):
        doc = parse_document('{"version":1,"author":"t","parts":[],'
                             '"connections":[]}')
        report = run_erc(doc, lib)
        assert report.violations == []
        assert not report.halted_ood

    def test_deterministic_serialization(self, lib):
        doc = load_circuit("i2c_no_pullups")
        first = run_erc(doc, lib).to_json()
        second = run_erc(doc, lib).to_json()
        assert first == second

    def test_counts_consistent(self, lib):
        doc = load_circuit("parallel_paths")
        report = run_erc(doc, lib)
        assert sum(report.counts.values()) == len(report.violations)
        for violation in report.violations:
            assert violation.severity in Severity
            assert violation.rule_id in erc.known_rule_ids()

    def test_disabled_checker_is_skipped(self, lib):
        doc = load_circuit("short_vcc_gnd")
        report = run_erc(doc, lib, ErcConfig(disabled=("shorts",)))
        assert findings(report) == []

    def test_config_from_file(self, tmp_path):
        path = tmp_path / "erc.json"
        path.write_text(json.dumps({"low_resistance_ohms": 10,
                                    "disabled": ["i2c"]}))
        config = ErcConfig.from_file(path)
        assert config.low_resistance_ohms == 10
        assert config.disabled == ("i2c",)
        assert config.short_threshold_ohms == 1.0

    @pytest.mark.parametrize("name,expected",
                             sorted(erc_expectations().items()))
    def test_fault_suite(self, name, expected, lib):
        report = run_erc(load_circuit(name), lib)
        assert findings(report) == sorted(
            (e["rule_id"], e["severity"]) for e in expected)


class TestShorts:
    def test_direct_short_is_fatal(self, lib):
        report = run_erc(load_circuit("short_vcc_gnd"), lib)
        assert findings(report) == [("galvanic-short", "Fatal")]

    def test_resistor_bridge_is_not_short(self, lib):
        doc = simple_doc(
            [("arduino-uno", "a", {}),
             ("resistor", "r1", {"resistance": 220})],
            [("a:5V", "r1:1"), ("r1:2", "a:GND")])
        report = run_erc(doc, lib)
        assert findings(report) == []

    def test_ten_ohm_is_near_short(self, lib):
        report = run_erc(load_circuit("near_short"), lib)
        assert findings(report) == [("near-short-low-resistance", "Major")]

    def test_threshold_boundaries(self, lib):
        # Exactly 1 ohm is a near-short, not a short; exactly 50 is clean.
        for ohms, expected in ((1, [("near-short-low-resistance", "Major")]),
                               (50, []), (0.5, [("galvanic-short", "Fatal")])):
            doc = simple_doc(
                [("arduino-uno", "a", {}),
                 ("resistor", "r1", {"resistance": ohms})],
                [("a:5V", "r1:1"), ("r1:2", "a:GND")])
            assert findings(run_erc(doc, lib)) == expected, ohms

    def test_verdict_matches_path_enumeration(self, lib):
        doc = load_circuit("parallel_paths")
        graph = build_net_graph(doc, lib)
        vcc = graph.vcc_nets()[0]
        gnd = graph.gnd_nets()[0]
        oracle_total = brute_force_min_path(graph, vcc.id, gnd.id)
        report = run_erc(doc, lib)
        config = ErcConfig()
        expect_fatal = oracle_total is not None \
            and oracle_total < config.short_threshold_ohms
        expect_major = oracle_total is not None and not expect_fatal \
            and oracle_total < config.low_resistance_ohms
        assert (report.counts[Severity.FATAL] > 0) == expect_fatal
        assert any(v.rule_id == "near-short-low-resistance"
                   for v in report.violations) == expect_major


class TestLedSeries:
    def test_direct_gpio_drive_flagged(self, lib):
        report = run_erc(load_circuit("led_no_series"), lib)
        assert findings(report) == [("led-no-series-resistor", "Major")]

    def test_series_resistor_clears(self, lib):
        report = run_erc(load_circuit("led_no_series_fixed"), lib)
        assert findings(report) == []

    def test_no_led_vacuous(self, lib):
        doc = simple_doc([("arduino-uno", "a", {})], [("a:D2", "a:A0")])
        assert findings(run_erc(doc, lib)) == []

    def test_boundary_resistance(self, lib):
        # Exactly the minimum series value passes (check is strict <).
        for ohms, expected in ((100, []), (99,
                               [("led-no-series-resistor", "Major")])):
            doc = simple_doc(
                [("arduino-uno", "a", {}),
                 ("resistor", "r1", {"resistance": ohms}),
                 ("led", "led1", {})],
                [("a:D3", "r1:1"), ("r1:2", "led1:A"),
                 ("led1:C", "a:GND")])
            assert findings(run_erc(doc, lib)) == expected, ohms

    def test_repair_monotonicity(self, lib):
        # Adding the resistor removes exactly the LED finding and adds
        # nothing at Major or above.
        before = run_erc(load_circuit("led_no_series"), lib)
        after = run_erc(load_circuit("led_no_series_fixed"), lib)
        assert ("led-no-series-resistor", "Major") in findings(before)
        assert ("led-no-series-resistor", "Major") not in findings(after)
        assert after.counts[Severity.FATAL] == 0
        assert after.counts[Severity.MAJOR] == 0


class TestI2c:
    def test_missing_pullups_both_lines(self, lib):
        report = run_erc(load_circuit("i2c_no_pullups"), lib)
        assert findings(report) == [("i2c-missing-pullup", "Major")] * 2

    def test_pullups_in_range_clear(self, lib):
        assert findings(run_erc(load_circuit("i2c_no_pullups_fixed"),
                                lib)) == []

    def test_onboard_pullups_suppress(self, lib):
        doc = simple_doc(
            [("esp32-devkit", "esp", {}),
             ("ssd1306-oled", "oled", {"onboard_pullups": True})],
            [("oled:VCC", "esp:3V3"), ("oled:GND", "esp:GND"),
             ("oled:SDA", "esp:D21"), ("oled:SCL", "esp:D22")])
        assert findings(run_erc(doc, lib)) == []

    def test_pullup_out_of_range_still_flagged(self, lib):
        doc = simple_doc(
            [("esp32-devkit", "esp", {}), ("mpu6050", "imu", {}),
             ("resistor", "rsda", {"resistance": 100}),
             ("resistor", "rscl", {"resistance": 100})],
            [("imu:VCC", "esp:3V3"), ("imu:GND", "esp:GND"),
             ("imu:SDA", "esp:D21"), ("imu:SCL", "esp:D22"),
             ("rsda:1", "esp:D21"), ("rsda:2", "esp:3V3"),
             ("rscl:1", "esp:D22"), ("rscl:2", "esp:3V3")])
        report = run_erc(doc, lib)
        assert findings(report) == [("i2c-missing-pullup", "Major")] * 2

    def test_address_conflict(self, lib):
        report = run_erc(load_circuit("i2c_addr_conflict"), lib)
        assert findings(report) == [("i2c-address-conflict", "Major")]

    def test_address_attr_override_resolves(self, lib):
        assert findings(run_erc(load_circuit("i2c_addr_conflict_fixed"),
                                lib)) == []


class TestFlyback:
    def test_bare_coil_on_drain_flagged(self, lib):
        report = run_erc(load_circuit("missing_flyback"), lib)
        assert findings(report) == [("missing-flyback-diode", "Major")]

    def test_antiparallel_diode_clears(self, lib):
        assert findings(run_erc(load_circuit("missing_flyback_fixed"),
                                lib)) == []

    def test_no_inductive_load_vacuous(self, lib):
        assert findings(run_erc(load_circuit("led_no_series_fixed"),
                                lib)) == []

    def test_undriven_coil_not_flagged(self, lib):
        doc = simple_doc(
            [("arduino-uno", "a", {}), ("relay-5v", "k1", {})],
            [("a:5V", "k1:COIL1"), ("k1:COIL2", "a:VIN")])
        assert findings(run_erc(doc, lib)) == []


class TestLogicLevels:
    def test_overdrive_flagged(self, lib):
        report = run_erc(load_circuit("logic_overdrive"), lib)
        assert findings(report) == [("logic-level-overdrive", "Major")]

    def test_within_tolerance_clean(self, lib):
        assert findings(run_erc(load_circuit("logic_overdrive_fixed"),
                                lib)) == []

    def test_equal_levels_pass_strict_comparison(self, lib):
        # 5.0 V driver into a 5.0 V-max input: strict > means no finding.
        doc = simple_doc(
            [("arduino-uno", "a", {}), ("hc-sr04", "s", {})],
            [("a:D7", "s:TRIG")])
        graph = build_net_graph(doc, lib)
        assert graph.nets[0].kind == "signal"
        report = run_erc(doc, lib)
        assert findings(report) == []


class TestFloatingAndContention:
    def test_unconnected_required_gate_floats(self, lib):
        report = run_erc(load_circuit("floating_gate"), lib)
        assert findings(report) == [("floating-input", "Minor")]

    def test_driven_gate_clean(self, lib):
        assert findings(run_erc(load_circuit("floating_gate_fixed"),
                                lib)) == []

    def test_pulldown_counts_as_drive(self, lib):
        doc = simple_doc(
            [("arduino-uno", "a", {}), ("n-mosfet", "q1", {}),
             ("resistor", "r1", {"resistance": 10000})],
            [("q1:G", "r1:1"), ("r1:2", "a:GND")])
        assert findings(run_erc(doc, lib)) == []

    def test_input_tied_to_ground_is_driven(self, lib):
        doc = simple_doc(
            [("arduino-uno", "a", {}), ("n-mosfet", "q1", {})],
            [("q1:G", "a:GND")])
        assert findings(run_erc(doc, lib)) == []

    def test_two_outputs_contend(self, lib):
        report = run_erc(load_circuit("contention"), lib)
        assert findings(report) == [("net-contention", "Major")]
        graph = build_net_graph(load_circuit("contention"), lib)
        # Oracle: count of push-pull driver pins on the tied net is 2.
        assert len(graph.nets) == 1

    def test_resistor_isolated_outputs_clean(self, lib):
        assert findings(run_erc(load_circuit("contention_fixed"), lib)) == []


class TestPwmAndDecoupling:
    def test_pwm_on_plain_gpio_flagged(self, lib):
        report = run_erc(load_circuit("non_pwm_servo"), lib)
        assert findings(report) == [("non-pwm-pin", "Major")]

    def test_pwm_capable_pin_clean(self, lib):
        assert findings(run_erc(load_circuit("non_pwm_servo_fixed"),
                                lib)) == []

    def test_missing_decoupling_warns(self, lib):
        report = run_erc(load_circuit("missing_decoupling"), lib)
        assert findings(report) == [("missing-decoupling", "Warning")]

    def test_capacitor_to_ground_clears(self, lib):
        assert findings(run_erc(load_circuit("missing_decoupling_fixed"),
                                lib)) == []


class TestRegistry:
    def test_known_rules_cover_fault_suite(self):
        expected_rules = {e["rule_id"] for rules in erc_expectations().values()
                          for e in rules}
        assert expected_rules <= erc.known_rule_ids()

    def test_register_rejects_duplicate_id(self):
        spec = erc.registry()[0]
        with pytest.raises(ValueError):
            erc.register_checker(spec)

    def test_third_party_checker_runs(self, lib):
        calls = []
        spec = erc.CheckerSpec(
            id="test-noop", rules=("test-noop-rule",),
            run=lambda g, l, c: calls.append(1) or [])
        erc.register_checker(spec)
        try:
            doc = parse_document('{"version":1,"author":"t","parts":[],'
                                 '"connections":[]}')
            run_erc(doc, lib)
            assert calls == [1]
        finally:
            erc._REGISTRY.remove(spec)
