import numpy as np
import pytest

from discordlab.optimize import (
    BudgetExceededError,
    ObjectiveSpec,
    grid_search,
    multistart,
    nelder_mead,
)


def spec2(bounds=((-1.0, 1.0), (-1.0, 1.0)), tol=1e-9, max_evals=2000, seed=0):
    return ObjectiveSpec(
        dimension=len(bounds), bounds=tuple(bounds), tolerance=tol,
        max_evals=max_evals, seed=seed,
    )


def sphere(x):
    return float(np.dot(x, x))


def rosenbrock(x):
    return float((1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2)


class TestGridSearch:
    def test_centered_minimum(self):
        x, fx = grid_search(sphere, spec2(), 33)
        assert np.allclose(x, [0.0, 0.0])
        assert fx == 0.0

    def test_constant_returns_first_lattice_point(self):
        x, fx = grid_search(lambda x: 1.0, spec2(), 5)
        assert np.allclose(x, [-1.0, -1.0])
        assert fx == 1.0

    def test_matches_enumeration(self):
        spec = ObjectiveSpec(dimension=3, bounds=(((-2.0, 1.0),) * 3), max_evals=200)
        f = lambda x: float(np.sin(3 * x[0]) + x[1] ** 2 - 0.3 * x[2])
        axes = [np.linspace(-2, 1, 5)] * 3
        best = min(
            (f(np.array([a, b, c])), i)
            for i, (a, b, c) in enumerate(
                (a, b, c) for a in axes[0] for b in axes[1] for c in axes[2]
            )
        )
        _, fx = grid_search(f, spec, 5)
        assert fx == pytest.approx(best[0])

    def test_budget_exceeded(self):
        with pytest.raises(BudgetExceededError):
            grid_search(sphere, spec2(max_evals=100), 33)


class TestNelderMead:
    def test_quadratic_bowl(self):
        x, fx, conv = nelder_mead(sphere, spec2(), np.array([1.0, 1.0]))
        assert conv
        assert fx <= 1e-12
        assert np.max(np.abs(x)) <= 1e-6

    def test_rosenbrock_reaches_reference_minimum(self):
        spec = ObjectiveSpec(
            dimension=2, bounds=((-2.0, 2.0), (-1.0, 3.0)),
            tolerance=1e-9, max_evals=2000,
        )
        x, fx, conv = nelder_mead(rosenbrock, spec, np.array([-1.2, 1.0]))
        assert fx < 1e-8
        assert np.allclose(x, [1.0, 1.0], atol=1e-3)

    def test_already_optimal_start(self):
        x, fx, conv = nelder_mead(sphere, spec2(), np.array([0.0, 0.0]))
        assert conv
        assert fx <= 1e-15

    def test_budget_exhaustion_flags_unconverged(self):
        spec = ObjectiveSpec(
            dimension=2, bounds=((-2.0, 2.0), (-1.0, 3.0)),
            tolerance=1e-9, max_evals=20,
        )
        _, _, conv = nelder_mead(rosenbrock, spec, np.array([-1.2, 1.0]))
        assert not conv

    def test_respects_bounds(self):
        seen = []

        def f(x):
            seen.append(x.copy())
            return -float(x[0])  # pushes toward the upper bound

        nelder_mead(f, spec2(max_evals=200), np.array([0.9, 0.0]))
        arr = np.array(seen)
        assert arr[:, 0].max() <= 1.0 + 1e-15
        assert arr[:, 0].min() >= -1.0 - 1e-15


class TestMultistart:
    def test_multimodal_matches_dense_grid(self):
        spec = ObjectiveSpec(
            dimension=1, bounds=((-2.0, 2.0),), tolerance=1e-10,
            max_evals=2000, seed=3,
        )
        f = lambda x: float(np.sin(5 * x[0]) + x[0] ** 2)
        res = multistart(f, spec, n_starts=20, grid_points=33)
        xs = np.linspace(-2, 2, 400001)
        dense = np.sin(5 * xs) + xs**2
        assert res.value <= dense.min() + 1e-5
        assert abs(res.argmin[0] - xs[np.argmin(dense)]) <= 1e-4

    def test_single_start_equals_grid_plus_polish(self):
        spec = spec2(seed=1)
        res = multistart(sphere, spec, n_starts=1, grid_points=5)
        gx, _ = grid_search(sphere, spec, 5)
        x, fx, _ = nelder_mead(sphere, spec, gx)
        assert res.value == fx
        assert np.array_equal(res.argmin, x)

    def test_deterministic(self):
        spec = spec2(seed=42)
        f = lambda x: float(np.cos(3 * x[0]) * np.sin(2 * x[1]) + 0.1 * np.dot(x, x))
        r1 = multistart(f, spec, n_starts=8, grid_points=9)
        r2 = multistart(f, spec, n_starts=8, grid_points=9)
        assert r1.value == r2.value
        assert np.array_equal(r1.argmin, r2.argmin)
        assert r1.start_values == r2.start_values

    def test_never_exceeds_grid_seed(self):
        spec = spec2(seed=5)
        f = rosenbrock
        gx, gf = grid_search(f, spec, 9)
        res = multistart(f, spec, n_starts=4, grid_points=9)
        assert res.value <= gf + 1e-15

    def test_best_so_far_monotone(self):
        spec = spec2(seed=9)
        res = multistart(rosenbrock, spec, n_starts=10, grid_points=5)
        running = np.minimum.accumulate(res.start_values)
        assert res.value == running[-1]
        assert all(a >= b for a, b in zip(running, running[1:]))

    def test_extra_starts_included(self):
        spec = spec2(seed=2)
        res = multistart(sphere, spec, n_starts=3, extra_starts=[np.array([0.0, 0.0])])
        assert res.value <= 1e-15


class TestObjectiveSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            ObjectiveSpec(dimension=2, bounds=((0.0, 1.0),))
        with pytest.raises(ValueError):
            ObjectiveSpec(dimension=1, bounds=((1.0, 0.0),))
        with pytest.raises(ValueError):
            ObjectiveSpec(dimension=1, bounds=((0.0, 1.0),), tolerance=0.0)
