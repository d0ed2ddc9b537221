"""Scan grid, island extraction, and refinement tests."""

import math

import numpy as np
import pytest

from qmbootstrap.errors import (
    BadParameter,
    MissingInitial,
    UnknownInitialData,
    UnsupportedFamily,
)
from qmbootstrap.matrices import MatrixKind
from qmbootstrap.scanner import (
    GRID_EDGE,
    FeasibleRegion,
    Island,
    ScanAxis,
    ScanConfig,
    ScanPoint,
    evaluate_point,
    extract_islands,
    refine_boundary,
    run_scan,
)


def _axis(lo, hi, step, name="E"):
    return ScanAxis(name=name, lo=lo, hi=hi, step=step)


def _synthetic_points(values, mask_fn):
    return [
        ScanPoint(coords=(v,), min_eigenvalue=0.0 if mask_fn(v) else -1.0, feasible=mask_fn(v))
        for v in values
    ]


class TestScanAxis:
    def test_endpoint_kept_despite_float_fuzz(self):
        vals = _axis(0.5, 7.5, 1e-3).values()
        assert len(vals) == 7001
        assert vals[0] == 0.5
        assert vals[-1] == pytest.approx(7.5, abs=1e-9)

    def test_partial_last_step_dropped(self):
        assert _axis(1.0, 2.0, 0.3).values() == pytest.approx([1.0, 1.3, 1.6, 1.9])

    def test_degenerate_window_is_single_point(self):
        assert _axis(2.0, 2.0, 0.1).values() == [2.0]

    def test_bad_step(self):
        with pytest.raises(BadParameter, match="step"):
            _axis(0.0, 1.0, -0.1).values()

    def test_reversed_window(self):
        with pytest.raises(BadParameter, match="hi"):
            _axis(1.0, 0.0, 0.1).values()

    def test_non_finite(self):
        with pytest.raises(BadParameter, match="finite"):
            _axis(0.0, math.inf, 0.1).values()


class TestConfigValidation:
    def _cfg(self, pot, kind=MatrixKind.HANKEL_X, depth=3, axes=None, **kw):
        axes = axes if axes is not None else (_axis(0.8, 1.2, 0.1),)
        return ScanConfig(potential=pot, matrix_kind=kind, depth=depth, axes=axes, **kw)

    def test_yukawa_not_scannable(self, yukawa):
        with pytest.raises(UnsupportedFamily, match="cannot be scanned"):
            run_scan(self._cfg(yukawa, kind=MatrixKind.MIXED_X_EXP))

    def test_kind_must_match_family(self, harmonic):
        with pytest.raises(BadParameter, match="allowed"):
            run_scan(self._cfg(harmonic, kind=MatrixKind.HANKEL_EXP))

    def test_depth_window(self, harmonic):
        with pytest.raises(BadParameter, match="depth"):
            run_scan(self._cfg(harmonic, depth=11))

    def test_unknown_axis(self, harmonic):
        axes = (_axis(0.8, 1.2, 0.1), _axis(1.0, 2.0, 0.5, name="ex"))
        with pytest.raises(UnknownInitialData, match="ex"):
            run_scan(self._cfg(harmonic, axes=axes))

    def test_missing_axis(self, toda):
        with pytest.raises(MissingInitial, match="ex"):
            run_scan(self._cfg(toda, kind=MatrixKind.HANKEL_EXP))

    def test_axis_order_fixed_by_schema(self, toda):
        axes = (_axis(1.0, 2.0, 0.5, name="ex"), _axis(1.5, 2.0, 0.5))
        with pytest.raises(BadParameter, match="schema order"):
            run_scan(self._cfg(toda, kind=MatrixKind.HANKEL_EXP, axes=axes))

    def test_negative_tol(self, harmonic):
        with pytest.raises(BadParameter, match="tol"):
            run_scan(self._cfg(harmonic, tol=-1.0))

    def test_axes_required(self, harmonic):
        with pytest.raises(BadParameter, match="axis"):
            run_scan(self._cfg(harmonic, axes=()))


class TestEvaluatePoint:
    def _cfg(self, pot, **kw):
        defaults = dict(
            potential=pot,
            matrix_kind=MatrixKind.HANKEL_X,
            depth=3,
            axes=(_axis(0.5, 7.5, 0.5),),
        )
        defaults.update(kw)
        return ScanConfig(**defaults)

    def test_good_point(self, harmonic):
        point = evaluate_point(self._cfg(harmonic), (1.0,))
        assert point.feasible
        assert point.error == ""
        assert point.min_eigenvalue is not None

    def test_divergent_point_recorded_not_raised(self, toda):
        cfg = ScanConfig(
            potential=toda,
            matrix_kind=MatrixKind.HANKEL_EXP,
            depth=8,
            axes=(_axis(1.0, 500.0, 1.0), _axis(1.0, 5.0, 0.5, name="ex")),
        )
        # probes may sit off-grid (refinement does this); a divergent trial
        # energy must come back as an error record, not an exception
        point = evaluate_point(cfg, (1e60, 4.9))
        assert not point.feasible
        assert point.error == "Overflow"
        assert point.min_eigenvalue is None


class TestIslandExtraction:
    def test_two_intervals_get_labels_zero_and_one(self):
        values = _axis(0.9, 3.1, 0.01).values()
        feasible = lambda v: 1.00 - 1e-9 <= v <= 1.04 + 1e-9 or 2.98 - 1e-9 <= v <= 3.02 + 1e-9
        points = _synthetic_points(values, feasible)
        islands = extract_islands(points, (len(values),), (_axis(0.9, 3.1, 0.01),))
        assert [isl.label for isl in islands] == [0, 1]
        assert islands[0].bounds["E"] == (pytest.approx(1.00), pytest.approx(1.04))
        assert islands[1].bounds["E"] == (pytest.approx(2.98), pytest.approx(3.02))
        assert not islands[0].multi_level and not islands[1].multi_level

    def test_labels_ascend_in_energy(self):
        values = _axis(0.0, 10.0, 0.1).values()
        feasible = lambda v: any(abs(v - c) < 0.25 for c in (7.0, 1.0, 4.0))
        points = _synthetic_points(values, feasible)
        islands = extract_islands(points, (len(values),), (_axis(0.0, 10.0, 0.1),))
        mins = [isl.bounds["E"][0] for isl in islands]
        assert mins == sorted(mins)
        assert [isl.label for isl in islands] == [0, 1, 2]

    def test_anomalously_wide_island_flagged(self):
        values = _axis(0.0, 10.0, 0.01).values()
        feasible = lambda v: abs(v - 1.0) < 0.011 or abs(v - 2.0) < 0.011 or 5.0 <= v <= 8.0
        points = _synthetic_points(values, feasible)
        islands = extract_islands(points, (len(values),), (_axis(0.0, 10.0, 0.01),))
        assert [isl.multi_level for isl in islands] == [False, False, True]

    def test_diagonal_points_are_separate_islands(self):
        # adjacency is axis-aligned only
        points = []
        for i in range(2):
            for j in range(2):
                on = (i + j) % 2 == 0
                points.append(ScanPoint(coords=(float(i), float(j)), min_eigenvalue=0.0, feasible=on))
        axes = (_axis(0.0, 1.0, 1.0), _axis(0.0, 1.0, 1.0, name="x2"))
        islands = extract_islands(points, (2, 2), axes)
        assert len(islands) == 2

    def test_shape_mismatch_rejected(self):
        points = _synthetic_points([0.0, 1.0], lambda v: True)
        with pytest.raises(BadParameter):
            extract_islands(points, (3,), (_axis(0.0, 1.0, 1.0),))


class TestRunScan:
    def _cfg(self, pot, refine=False, max_refine_iters=25, lo=0.8, hi=1.2, step=0.05):
        return ScanConfig(
            potential=pot,
            matrix_kind=MatrixKind.HANKEL_X,
            depth=6,
            axes=(_axis(lo, hi, step),),
            refine=refine,
            max_refine_iters=max_refine_iters,
        )

    def test_ground_island_found(self, harmonic):
        region = run_scan(self._cfg(harmonic))
        assert region.shape == (9,)
        assert len(region.points) == 9
        assert len(region.islands) == 1
        lo, hi = region.islands[0].bounds["E"]
        assert lo <= 1.0 <= hi
        assert lo > 0.8 and hi < 1.2

    def test_grid_order_row_major(self, toda):
        cfg = ScanConfig(
            potential=toda,
            matrix_kind=MatrixKind.HANKEL_EXP,
            depth=2,
            axes=(_axis(1.5, 2.0, 0.5), _axis(1.2, 1.6, 0.2, name="ex")),
        )
        region = run_scan(cfg)
        coords = [p.coords for p in region.points]
        assert coords == [
            (1.5, 1.2), (1.5, 1.4), (1.5, 1.6),
            (2.0, 1.2), (2.0, 1.4), (2.0, 1.6),
        ]

    def test_deterministic_across_runs(self, harmonic):
        r1 = run_scan(self._cfg(harmonic))
        r2 = run_scan(self._cfg(harmonic))
        assert [(p.coords, p.min_eigenvalue, p.feasible) for p in r1.points] == [
            (p.coords, p.min_eigenvalue, p.feasible) for p in r2.points
        ]

    def test_worker_count_does_not_change_results(self, harmonic, monkeypatch):
        serial = run_scan(self._cfg(harmonic))
        monkeypatch.setenv("BOOTSTRAP_WORKERS", "2")
        parallel = run_scan(self._cfg(harmonic))
        assert [(p.coords, p.min_eigenvalue, p.feasible) for p in serial.points] == [
            (p.coords, p.min_eigenvalue, p.feasible) for p in parallel.points
        ]

    def test_worker_env_validated(self, harmonic, monkeypatch):
        monkeypatch.setenv("BOOTSTRAP_WORKERS", "many")
        with pytest.raises(BadParameter, match="BOOTSTRAP_WORKERS"):
            run_scan(self._cfg(harmonic))


class TestRefine:
    def test_faces_bisected_and_edges_marked(self, harmonic):
        cfg = ScanConfig(
            potential=harmonic,
            matrix_kind=MatrixKind.HANKEL_X,
            depth=6,
            axes=(_axis(0.9, 1.2, 0.05),),
            refine=True,
        )
        region = run_scan(cfg)
        refined = region.islands[0].refined
        assert refined is not None
        # the island reaches the low end of the window
        assert refined["E"][0] == GRID_EDGE
        # upper face of the depth-6 ground island sits near 1.1330
        assert refined["E"][1] == pytest.approx(1.1330152639, abs=1e-4)

    def test_zero_iters_returns_bracket_midpoint(self, harmonic):
        cfg = ScanConfig(
            potential=harmonic,
            matrix_kind=MatrixKind.HANKEL_X,
            depth=6,
            axes=(_axis(0.9, 1.2, 0.05),),
            refine=True,
            max_refine_iters=0,
        )
        region = run_scan(cfg)
        assert region.islands[0].refined["E"][1] == pytest.approx(1.125, abs=1e-12)

    def test_refined_bound_tightens_with_iterations(self, harmonic):
        wide = ScanConfig(
            potential=harmonic, matrix_kind=MatrixKind.HANKEL_X, depth=6,
            axes=(_axis(0.9, 1.2, 0.05),), refine=True, max_refine_iters=3,
        )
        tight = ScanConfig(
            potential=harmonic, matrix_kind=MatrixKind.HANKEL_X, depth=6,
            axes=(_axis(0.9, 1.2, 0.05),), refine=True, max_refine_iters=25,
        )
        edge = 1.1330152639
        err_wide = abs(run_scan(wide).islands[0].refined["E"][1] - edge)
        err_tight = abs(run_scan(tight).islands[0].refined["E"][1] - edge)
        assert err_tight < err_wide
