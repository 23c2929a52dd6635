"""Summing amplifier, ADC quantizer, and clocked acquisition."""
import numpy as np
import pytest
from hypothesis import given, strategies as st

from spts.core import CircuitParams, DomainError, GridGeometry, TactileFrame
from spts.firmware import assign_seeds, generate_sensing_matrix
from spts.frontend import (AcquisitionConfig, MeasurementVector, acquire,
                           frame_rate, load_measurements, measure_once,
                           quantize, read_measurements_jsonl,
                           save_measurements, write_measurements_jsonl)


@pytest.fixture
def acq():
    return AcquisitionConfig()


class TestSummingAmplifier:
    def test_inverting_inner_product(self, circuit):
        frame = TactileFrame(GridGeometry(1, 2), np.array([2e-4, 3e-4]))
        v = measure_once(np.array([1.0, -1.0]), frame, circuit)
        # -r_f * (1*2e-4 - 1*3e-4)
        assert v == pytest.approx(4700.0 * 1e-4)

    def test_zero_weights_give_zero(self, circuit):
        frame = TactileFrame(GridGeometry(1, 3), np.full(3, 1e-4))
        assert measure_once(np.zeros(3), frame, circuit) == 0.0

    def test_length_mismatch(self, circuit):
        frame = TactileFrame(GridGeometry(1, 2), np.array([1e-4, 1e-4]))
        with pytest.raises(DomainError):
            measure_once(np.ones(3), frame, circuit)


class TestQuantizer:
    def test_mid_rise_has_no_zero_level(self, acq):
        delta = 2.0 * acq.adc_range / 2**acq.adc_bits
        assert abs(quantize(0.0, acq)) == pytest.approx(delta / 2)

    def test_error_within_half_step(self, acq):
        delta = 2.0 * acq.adc_range / 2**acq.adc_bits
        x = np.linspace(-acq.adc_range + delta, acq.adc_range - delta, 1001)
        q = quantize(x, acq)
        assert np.max(np.abs(q - x)) <= delta / 2 + 1e-12

    def test_idempotent(self, acq):
        x = np.linspace(-9.9, 9.9, 257)
        q = quantize(x, acq)
        np.testing.assert_array_equal(quantize(q, acq), q)

    def test_monotone(self, acq):
        x = np.linspace(-12.0, 12.0, 2001)
        q = quantize(x, acq)
        assert np.all(np.diff(q) >= 0)

    def test_boundary_ties_round_away_from_zero(self, acq):
        delta = 2.0 * acq.adc_range / 2**acq.adc_bits
        assert quantize(delta, acq) == pytest.approx(1.5 * delta)
        assert quantize(-delta, acq) == pytest.approx(-1.5 * delta)

    def test_saturation_clamp(self):
        cfg = AcquisitionConfig(adc_bits=4, adc_range=1.0, saturation=0.5)
        delta = 2.0 * cfg.adc_range / 2**cfg.adc_bits
        # clamp happens before coding, so overdrive lands in the cell holding
        # the saturation level
        assert quantize(10.0, cfg) == quantize(0.5, cfg)
        assert quantize(10.0, cfg) <= 0.5 + delta / 2
        assert quantize(-10.0, cfg) == quantize(-0.5, cfg)
        assert quantize(-10.0, cfg) >= -0.5 - delta / 2

    def test_output_within_range(self, acq):
        q = quantize(np.array([-1e6, 1e6]), acq)
        assert np.all(np.abs(q) <= acq.adc_range)

    @given(st.floats(min_value=-20, max_value=20),
           st.integers(min_value=2, max_value=16))
    def test_levels_are_half_integer_multiples(self, x, bits):
        cfg = AcquisitionConfig(adc_bits=bits)
        delta = 2.0 * cfg.adc_range / 2**bits
        k = quantize(x, cfg) / delta - 0.5
        assert abs(k - round(k)) < 1e-9

    def test_config_validation(self):
        with pytest.raises(DomainError):
            AcquisitionConfig(adc_bits=0)
        with pytest.raises(DomainError):
            AcquisitionConfig(f_clk=0.0)
        with pytest.raises(DomainError):
            AcquisitionConfig(noise_sigma=-1.0)


class TestAcquisition:
    def test_timestamps_follow_measurement_clock(self, circuit, acq):
        geom = GridGeometry(2, 2)
        frame = TactileFrame(geom, np.full(4, 1e-6))
        phi = generate_sensing_matrix(assign_seeds(0, 4), 8)
        y = acquire(frame, phi, circuit, acq)
        np.testing.assert_allclose(y.timestamps, np.arange(8) / acq.f_clk)

    def test_noiseless_high_resolution_matches_linear_model(self, circuit):
        geom = GridGeometry(3, 3)
        cfg = AcquisitionConfig(adc_bits=24)
        rng = np.random.default_rng(5)
        c = rng.uniform(0.0, 2e-7, 9)
        frame = TactileFrame(geom, c)
        phi = generate_sensing_matrix(assign_seeds(5, 9), 12)
        y = acquire(frame, phi, circuit, cfg)
        oracle = -circuit.r_f * (phi.weights @ c)
        lsb = 2.0 * cfg.adc_range / 2**24
        assert np.max(np.abs(y.values - oracle)) <= lsb

    def test_noise_is_reproducible_from_the_generator(self, circuit):
        geom = GridGeometry(2, 2)
        frame = TactileFrame(geom, np.full(4, 1e-6))
        phi = generate_sensing_matrix(assign_seeds(1, 4), 20)
        cfg = AcquisitionConfig(noise_sigma=0.01)
        y1 = acquire(frame, phi, circuit, cfg, rng=np.random.default_rng(3))
        y2 = acquire(frame, phi, circuit, cfg, rng=np.random.default_rng(3))
        np.testing.assert_array_equal(y1.values, y2.values)

    def test_time_varying_scene_is_sampled_per_tick(self, circuit):
        geom = GridGeometry(1, 2)
        cfg = AcquisitionConfig(adc_bits=24)

        def scene(t):
            return TactileFrame(geom, np.full(2, 1e-7 * (1.0 + 1000.0 * t)), t)

        phi = generate_sensing_matrix(assign_seeds(2, 2), 4)
        y = acquire(scene, phi, circuit, cfg)
        oracle = np.array([measure_once(phi.weights[i], scene(i / cfg.f_clk), circuit)
                           for i in range(4)])
        np.testing.assert_allclose(y.values, oracle, atol=2e-6)

    def test_geometry_mismatch(self, circuit, acq):
        frame = TactileFrame(GridGeometry(2, 2), np.zeros(4))
        phi = generate_sensing_matrix(assign_seeds(0, 9), 3)
        with pytest.raises(DomainError):
            acquire(frame, phi, circuit, acq)


class TestFrameRate:
    def test_reference_operating_points(self, acq):
        assert frame_rate(20, acq) == 3500.0
        assert 5330.0 <= frame_rate(13, acq) <= 5440.0

    def test_rejects_zero_measurements(self, acq):
        with pytest.raises(DomainError):
            frame_rate(0, acq)


class TestMeasurementContainers:
    def test_prefix(self):
        mv = MeasurementVector(np.arange(5.0), np.arange(5.0) / 1e3)
        pre = mv.prefix(3)
        assert pre.m == 3
        np.testing.assert_array_equal(pre.values, [0.0, 1.0, 2.0])

    def test_timestamps_must_increase(self):
        with pytest.raises(DomainError):
            MeasurementVector(np.zeros(3), np.array([0.0, 2.0, 1.0]))

    def test_jsonl_roundtrip(self, tmp_path):
        mv = MeasurementVector(np.array([0.5, -1.5]), np.array([0.0, 1e-3]), "id1")
        path = tmp_path / "y.jsonl"
        write_measurements_jsonl(path, mv)
        back = read_measurements_jsonl(path)
        np.testing.assert_array_equal(back.values, mv.values)
        np.testing.assert_array_equal(back.timestamps, mv.timestamps)

    def test_binary_roundtrip(self, tmp_path):
        mv = MeasurementVector(np.array([0.5, -1.5, 2.25]), np.arange(3.0) / 7e4)
        path = tmp_path / "y.bin"
        save_measurements(path, mv)
        back = load_measurements(path)
        np.testing.assert_array_equal(back.values, mv.values)
        np.testing.assert_array_equal(back.timestamps, mv.timestamps)
