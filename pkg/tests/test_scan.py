import json
import math

import numpy as np
import pytest

from qdiscord.discord import StepSchedule
from qdiscord.scan import (
    PROFILE_CSV_HEADER,
    SCAN_CSV_HEADER,
    ScanConfig,
    mdms_transition_search,
    profile_to_csv,
    run_scan,
    step_size_profile,
)
from qdiscord.states import bell_state, random_state

# coarse floors keep the unit tests quick; acceptance runs the real defaults
FAST = dict(floor3=0.25 * math.pi, floor4=0.25 * math.pi, polish_starts=4)


class TestScanConfig:
    def test_round_trip(self, tmp_path):
        cfg = ScanConfig(n_states=7, rank="mixed", base_seed=3, workers=2)
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg.to_dict()))
        back = ScanConfig.from_json(str(path))
        assert back == cfg

    def test_rank_resolution(self):
        cfg = ScanConfig(n_states=4, rank="mixed")
        assert [cfg.rank_for(i) for i in range(4)] == [3, 4, 3, 4]

    def test_invalid(self):
        with pytest.raises(ValueError):
            ScanConfig(n_states=0)
        with pytest.raises(ValueError):
            ScanConfig(rank=7)


class TestRunScan:
    def test_single_state_deterministic(self):
        cfg = ScanConfig(n_states=1, rank=3, base_seed=5, **FAST)
        a = run_scan(cfg)
        b = run_scan(cfg)
        assert a.to_csv() == b.to_csv()

    def test_worker_count_invariance(self):
        base = dict(n_states=4, rank=3, base_seed=9, **FAST)
        serial = run_scan(ScanConfig(workers=1, **base))
        parallel = run_scan(ScanConfig(workers=2, **base))
        assert serial.to_csv() == parallel.to_csv()

    def test_rank2_batch_no_deviations(self):
        cfg = ScanConfig(n_states=6, rank=2, base_seed=1, **FAST)
        summary = run_scan(cfg)
        assert summary.stats("dev3").abundance == 0.0
        assert summary.stats("dev4").abundance == 0.0

    def test_csv_shape(self):
        cfg = ScanConfig(n_states=2, rank=4, base_seed=2, **FAST)
        text = run_scan(cfg).to_csv()
        lines = text.strip().split("\n")
        assert lines[0] == SCAN_CSV_HEADER
        assert len(lines) == 3
        first = lines[1].split(",")
        assert first[0] == "0"
        assert first[2] == "4"

    def test_summary_dict(self):
        cfg = ScanConfig(n_states=2, rank=3, base_seed=2, **FAST)
        data = run_scan(cfg).summary_dict()
        assert data["n_states"] == 2
        assert set(data["delta3"]) == {
            "deviant_count",
            "abundance",
            "mean_deviation",
            "sigma_deviation",
        }

    def test_seeds_derive_from_base(self):
        cfg = ScanConfig(n_states=3, rank=3, base_seed=100, **FAST)
        summary = run_scan(cfg)
        assert [r.seed for r in summary.records] == [100, 101, 102]


class TestProfile:
    def test_bell_flat(self):
        steps = StepSchedule(tuple(s * math.pi for s in (0.3, 0.25, 0.2)))
        rows = step_size_profile(bell_state("phi+"), steps)
        for row in rows:
            assert row.delta2 == pytest.approx(1.0, abs=1e-10)
            assert row.delta3 == pytest.approx(1.0, abs=1e-10)
            assert row.delta4 == pytest.approx(1.0, abs=1e-10)

    def test_running_minima_non_increasing(self):
        steps = StepSchedule(tuple(s * math.pi for s in (0.25, 0.2, 0.15, 0.1)))
        rows = step_size_profile(random_state(3, 19), steps)
        for attr in ("run2", "run3"):
            vals = [getattr(r, attr) for r in rows]
            assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))

    def test_box_top_excludes_coarse_steps(self):
        steps = StepSchedule(tuple(s * math.pi for s in (0.3, 0.25, 0.2)))
        rows = step_size_profile(random_state(3, 7), steps)
        assert math.isnan(rows[0].run2)  # 0.3 pi lies above the 0.25 pi box
        assert not math.isnan(rows[1].run2)

    def test_m4_floor_gives_nan(self):
        steps = StepSchedule(tuple(s * math.pi for s in (0.25, 0.2, 0.1)))
        rows = step_size_profile(random_state(3, 3), steps, m4_floor=0.15 * math.pi)
        assert not math.isnan(rows[0].delta4)
        assert math.isnan(rows[2].delta4)

    def test_csv(self):
        steps = StepSchedule((0.3 * math.pi,))
        text = profile_to_csv(step_size_profile(bell_state("psi-"), steps))
        lines = text.strip().split("\n")
        assert lines[0] == PROFILE_CSV_HEADER
        assert len(lines) == 2


class TestTransition:
    def test_threshold_above_everything(self):
        result = mdms_transition_search(
            0.11,
            0.2349602,
            threshold=1.0,
            sweep_points=3,
            lam_max=0.01,
            floor3=0.25 * math.pi,
            polish_starts=4,
        )
        assert result.lambda_star is None
        assert "no deviation" in result.message

    def test_sweep_recorded(self):
        result = mdms_transition_search(
            0.11,
            0.2349602,
            threshold=1.0,
            sweep_points=3,
            lam_max=0.01,
            floor3=0.25 * math.pi,
            polish_starts=4,
        )
        assert len(result.sweep) == 3
        assert result.sweep[0][0] == 0.0
