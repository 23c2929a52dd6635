"""Acceptance suite: one test per headline behavior, one pass/fail line each.

All statistical checks are fully seeded, so every number below is
deterministic. The shared dictionary is trained once per session from the
reference configuration (see conftest).
"""
import dataclasses
import hashlib
import itertools

import numpy as np
import pytest
from click.testing import CliRunner
from scipy.stats import spearmanr

from spts.cli import main as cli_main
from spts.core import TactileFrame
from spts.dictionary import TrainingCorpus, ksvd, sparse_code
from spts.firmware import LCG_A, LCG_C, assign_seeds, generate_sensing_matrix, lcg_step
from spts.frontend import AcquisitionConfig, acquire, frame_rate, measure_once
from spts.recovery import omp, reconstruct
from spts import experiments


def report(num, ok, detail):
    print(f"criterion {num:>3}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


class TestCriterion01Timing:
    def test_frame_rate_operating_points(self):
        acq = AcquisitionConfig()
        fps20 = frame_rate(20, acq)
        fps13 = frame_rate(13, acq)
        ok = fps20 == 3500.0 and 5330.0 <= fps13 <= 5440.0
        report("1", ok, f"frame_rate(20)={fps20}, frame_rate(13)={fps13:.1f}")


class TestCriterion02BounceFrames:
    def test_frame_count_at_m25(self, default_cfg, trained_psi):
        recons, _ = experiments.bounce_frames(default_cfg, trained_psi, 25, 0)
        ok = len(recons) in (22, 23)
        report("2a", ok, f"M=25 complete frames in 8 ms contact: {len(recons)}")

    def test_frame_count_at_m100(self, default_cfg, trained_psi):
        # 8 ms at 70 kHz is 560 ticks, i.e. floor(560/100) = 5 complete
        # frames; the <= 3 target is unreachable under the same clock that
        # yields 22 frames at M=25, so this check fails by design
        recons, _ = experiments.bounce_frames(default_cfg, trained_psi, 100, 0)
        ok = len(recons) <= 3
        report("2b", ok, f"M=100 complete frames in 8 ms contact: {len(recons)}")


class TestCriterion03Localization:
    def test_mean_com_error_over_50_bounces(self, default_cfg, trained_psi):
        cfg = dataclasses.replace(default_cfg, m_values=(7, 25, 50), trials=50)
        _, summary = experiments.run_localize(cfg, trained_psi)
        e7 = summary["7"]["mean_error_px"]
        e25 = summary["25"]["mean_error_px"]
        e50 = summary["50"]["mean_error_px"]
        ok = e7 <= 2.0 and e25 <= 1.0 and e50 >= e25 - 0.3
        report("3", ok, f"mean CoM error px: M=7 {e7:.3f} (<=2), "
                        f"M=25 {e25:.3f} (<=1), M=50 {e50:.3f} (plateau)")


class TestCriterion04Classification:
    def test_accuracy_sweep(self, default_cfg, trained_psi):
        cfg = dataclasses.replace(default_cfg, m_values=(13, 20), trials=10)
        _, summary = experiments.run_classify_sweep(cfg, trained_psi)
        a13 = summary["13"]["accuracy"]
        a20 = summary["20"]["accuracy"]
        ok = a20 >= 0.90 and a13 >= 0.70 and a20 >= a13
        report("4", ok, f"accuracy: M=20 {a20:.3f} (>=0.90), "
                        f"M=13 {a13:.3f} (>=0.70)")


class TestCriterion05SupportTrend:
    def test_support_accuracy_increases_with_m(self, default_cfg, trained_psi):
        ms = tuple(range(5, 55, 5))
        cfg = dataclasses.replace(default_cfg, m_values=ms, trials=10)
        rows = experiments.run_support_sweep(cfg, trained_psi)
        mean_acc = [float(np.mean([r["accuracy"] for r in rows if r["m"] == m]))
                    for m in ms]
        rho = float(spearmanr(ms, mean_acc).statistic)

        def first_m_reaching(size_class, target=0.95):
            for m in ms:
                acc = np.mean([r["accuracy"] for r in rows
                               if r["m"] == m and r["size_class"] == size_class])
                if acc >= target:
                    return m
            return None

        m_small = first_m_reaching("small")
        m_large = first_m_reaching("large")
        small_no_later = m_small is not None and (m_large is None
                                                  or m_small <= m_large)
        ok = rho >= 0.8 and small_no_later
        report("5", ok, f"Spearman rho {rho:.3f} (>=0.8); 0.95 reached at "
                        f"M={m_small} (small) vs M={m_large} (large)")


class TestCriterion06OmpOracle:
    def test_matches_exhaustive_search(self):
        matched = 0
        for t in range(100):
            rng = np.random.default_rng(np.random.SeedSequence([42, 6, t]))
            a = rng.standard_normal((8, 12))
            a /= np.linalg.norm(a, axis=0)
            idx = rng.choice(12, 2, replace=False)
            coef = np.array([1.0, 0.25]) * rng.choice([-1.0, 1.0], 2)
            y = a[:, idx] @ coef

            # residuals must not increase and no column may repeat
            prev = np.linalg.norm(y)
            support = set()
            for s in (1, 2):
                code = omp(a, y, s, tol=0.0)
                r = float(np.linalg.norm(y - a @ code.dense(12)))
                assert r <= prev + 1e-12
                assert len(set(code.indices.tolist())) == code.indices.size
                prev = r
                support = set(code.indices.tolist())
            assert len(support) == 2

            best = min(
                float(np.linalg.norm(
                    a[:, list(s)] @ np.linalg.lstsq(a[:, list(s)], y,
                                                    rcond=None)[0] - y))
                for s in itertools.combinations(range(12), 2))
            if abs(prev - best) <= 1e-9:
                matched += 1
        ok = matched >= 90
        report("6", ok, f"OMP equals exhaustive best support in "
                        f"{matched}/100 instances (>=90)")


class TestCriterion07KsvdInvariants:
    def test_invariants_and_orthonormal_recovery(self):
        rng = np.random.default_rng(7)
        basis, _ = np.linalg.qr(rng.standard_normal((20, 8)))
        codes = rng.standard_normal((8, 40)) * (rng.random((8, 40)) < 0.3)
        corpus = TrainingCorpus(basis @ codes)
        psi = ksvd(corpus, k=8, s=3, iterations=20, seed=1)

        norm_dev = float(np.max(np.abs(np.linalg.norm(psi.atoms, axis=0) - 1.0)))
        errors = psi.meta["errors"]
        monotone = all(b <= a * (1 + 1e-9) + 1e-12
                       for a, b in zip(errors, errors[1:]))
        worst = max(
            float(np.linalg.norm(psi.atoms @ sparse_code(
                psi, corpus.signals[:, j], 8).dense(8) - corpus.signals[:, j]))
            for j in range(corpus.size))
        ok = norm_dev <= 1e-9 and monotone and worst < 1e-9
        report("7", ok, f"atom norm dev {norm_dev:.1e} (<=1e-9); sweeps "
                        f"monotone {monotone}; orthonormal-corpus residual "
                        f"{worst:.1e} (<1e-9)")


class TestCriterion08ForwardModel:
    def test_acquisition_matches_dense_oracle(self, default_cfg):
        circuit = default_cfg.circuit
        geom = default_cfg.geometry
        acq = AcquisitionConfig(adc_bits=24, noise_sigma=0.0)
        phi = generate_sensing_matrix(assign_seeds(3, geom.n), 30)
        lsb = 2.0 * acq.adc_range / 2**24
        rng = np.random.default_rng(0)
        worst_lsb = 0.0
        worst_super = 0.0
        for _ in range(20):
            c = rng.uniform(0.0, 1.0, geom.n)
            oracle = -circuit.r_f * (phi.weights @ c)
            c *= 0.9 * acq.adc_range / np.max(np.abs(oracle))
            oracle = -circuit.r_f * (phi.weights @ c)
            y = acquire(TactileFrame(geom, c), phi, circuit, acq)
            worst_lsb = max(worst_lsb,
                            float(np.max(np.abs(y.values - oracle))) / lsb)
            # superposition of the analog (pre-quantizer) summing stage
            c2 = c * rng.uniform(0.1, 0.9)
            a = np.array([measure_once(w, TactileFrame(geom, c), circuit)
                          for w in phi.weights])
            b = np.array([measure_once(w, TactileFrame(geom, c2), circuit)
                          for w in phi.weights])
            ab = np.array([measure_once(w, TactileFrame(geom, c + c2), circuit)
                           for w in phi.weights])
            worst_super = max(worst_super,
                              float(np.max(np.abs(ab - (a + b))
                                           / np.abs(ab))))
        ok = worst_lsb <= 1.0 and worst_super <= 1e-12
        report("8", ok, f"max quantized error {worst_lsb:.3f} LSB (<=1); "
                        f"superposition {worst_super:.1e} (<=1e-12)")


class TestCriterion09ExactRecovery:
    def test_dictionary_sparse_frames_recover_exactly(self, default_cfg,
                                                      trained_psi):
        circuit = default_cfg.circuit
        geom = default_cfg.geometry
        acq = AcquisitionConfig(adc_bits=24, noise_sigma=0.0)
        atoms = trained_psi.atoms
        good = 0
        for t in range(100):
            rng = np.random.default_rng(
                np.random.SeedSequence([default_cfg.master_seed, 99, t]))
            # rejection-sample a physical (non-negative) combination with
            # geometrically decaying coefficients
            while True:
                k = int(rng.integers(1, 4))
                idx = rng.choice(atoms.shape[1], size=k, replace=False)
                coef = 0.4 ** np.arange(k) * rng.uniform(0.8, 1.2, size=k)
                c = atoms[:, idx] @ coef
                if np.all(c >= 0):
                    break
            phi = generate_sensing_matrix(assign_seeds(1234 + t, geom.n), 40)
            y0 = -circuit.r_f * (phi.weights @ c)
            c *= 0.9 * acq.adc_range / np.max(np.abs(y0))
            y = acquire(TactileFrame(geom, c), phi, circuit, acq, rng=rng)
            recon = reconstruct(phi, trained_psi, y, circuit, geom)
            rel = float(np.linalg.norm(recon.frame.conductance - c)
                        / np.linalg.norm(c))
            if rel < 1e-6:
                good += 1
        ok = good >= 95
        report("9", ok, f"relative error < 1e-6 in {good}/100 trials (>=95)")


class TestCriterion10Determinism:
    CONFIG = (
        "master_seed: 7\n"
        "dictionary: {iterations: 5}\n"
        "scenario: {shapes: [dot, square, cross]}\n"
        "sweep: {m_values: [7, 13], trials: 2}\n"
        "adapt: {schedule: [4, 8, 16]}\n"
        "vote_window: 3\n"
    )
    COMMANDS = ("dict-train", "classify-sweep", "support-sweep", "bounce",
                "localize", "adapt")

    def test_every_command_is_byte_identical_across_runs(self, tmp_path):
        config = tmp_path / "cfg.yaml"
        config.write_text(self.CONFIG)
        runner = CliRunner()
        digests = []
        for name in ("a", "b"):
            out = tmp_path / name
            for cmd in self.COMMANDS:
                result = runner.invoke(
                    cli_main, [cmd, "--config", str(config), "--out", str(out)],
                    catch_exceptions=False)
                assert result.exit_code == 0, cmd
            digests.append({p.name: hashlib.sha256(p.read_bytes()).hexdigest()
                            for p in sorted(out.iterdir())})
        ok = digests[0] == digests[1]
        report("10", ok, f"{len(digests[0])} output files byte-identical "
                         f"across two full runs of all commands")


class TestCriterion11LcgGroundTruth:
    @pytest.mark.parametrize("seed", [0, 1])
    def test_thousand_iterates(self, seed):
        s_impl = seed
        s_oracle = seed
        mismatches = 0
        for _ in range(1000):
            s_impl = lcg_step(s_impl)
            s_oracle = (LCG_A * s_oracle + LCG_C) % (2**32)  # big-int path
            if s_impl != s_oracle:
                mismatches += 1
        ok = mismatches == 0
        report("11", ok, f"seed {seed}: 1000 iterates, {mismatches} mismatches")
