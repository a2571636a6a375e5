# SPDX-License-Identifier: Apache-2.0
"""Smoke tests for the python bindings.

scipy and scikit-learn double as independent oracles for the assignment
solver and the AMI stack.
"""

import math

import numpy as np
import pytest

import semfuse


def test_environment_generation_is_deterministic():
    grid = semfuse.GridSpec(16, 16)
    a = semfuse.generate_environment(seed=1, grid=grid, num_classes=4, patchiness=3.0)
    b = semfuse.generate_environment(seed=1, grid=grid, num_classes=4, patchiness=3.0)
    assert a.labels == b.labels
    assert set(a.labels) == {0, 1, 2, 3}


def test_similarity_hand_values():
    assert semfuse.topic_overlap([0.5, 0.5, 0.0], [0.5, 0.0, 0.5]) == pytest.approx(0.5)
    assert semfuse.cosine_similarity([1.0, 0.0], [0.5, 0.5]) == pytest.approx(
        math.sqrt(2.0) / 2.0
    )


def test_hungarian_matches_scipy():
    scipy_optimize = pytest.importorskip("scipy.optimize")
    rng = np.random.default_rng(7)
    for _ in range(25):
        rows, cols = rng.integers(1, 9, size=2)
        cost = rng.random((rows, cols))
        row_to_col, total = semfuse.hungarian_solve(cost)
        rr, cc = scipy_optimize.linear_sum_assignment(cost)
        assert total == pytest.approx(cost[rr, cc].sum(), abs=1e-9)
        assigned = [(i, j) for i, j in enumerate(row_to_col) if j >= 0]
        assert len(assigned) == min(rows, cols)


def test_ami_matches_sklearn_max_normalization():
    sklearn_metrics = pytest.importorskip("sklearn.metrics")
    rng = np.random.default_rng(11)
    for _ in range(20):
        n = int(rng.integers(20, 200))
        u = rng.integers(0, 5, size=n).tolist()
        v = rng.integers(0, 4, size=n).tolist()
        ours = semfuse.ami(semfuse.contingency_from_labels(u, v))
        theirs = sklearn_metrics.adjusted_mutual_info_score(u, v, average_method="max")
        assert ours == pytest.approx(theirs, abs=1e-9)


def test_wire_roundtrip():
    env = semfuse.make_environment(semfuse.env1_config())
    cfg = semfuse.TopicModelConfig()
    cfg.vocabulary_size = env.config.vocabulary_size
    cfg.seed = 3
    model = semfuse.TopicModel(0, env.map.grid, cfg)
    plan = semfuse.plan_coverage_trajectories(env.map, 12, 40, 5)
    for step in plan.robots[0]:
        model.ingest(semfuse.observe(env.map, env.emission, step.cell, 30, 5, 0, step.timestep))
    payload = semfuse.encode_map_payload(
        model.local_map(), model.descriptors(), env.map.grid, 40
    )
    assert len(payload) <= 100 * 1024
    back = semfuse.decode_map_payload(payload)
    assert back.robot_id == 0
    assert len(back.map.cells) == len(model.local_map().cells)
    with pytest.raises(semfuse.WireError):
        semfuse.decode_map_payload(b"\x42garbage")


def test_end_to_end_pipeline_favors_clear():
    env = semfuse.make_environment(semfuse.env2_config())
    plan = semfuse.plan_coverage_trajectories(env.map, 4, 120, 17)

    team, maps = [], []
    for robot in range(4):
        cfg = semfuse.TopicModelConfig()
        cfg.vocabulary_size = env.config.vocabulary_size
        cfg.seed = 100 + robot
        model = semfuse.TopicModel(robot, env.map.grid, cfg)
        for step in plan.robots[robot]:
            frame = semfuse.observe(
                env.map, env.emission, step.cell, 50, 17, robot, step.timestep
            )
            model.ingest(frame)
        assert model.tables_consistent()
        team.append((robot, model.descriptors()))
        maps.append(model.local_map())

    sim = semfuse.pairwise_similarity_matrix(team, metric="cosine")
    scores = np.asarray(sim.scores)
    assert np.allclose(scores, scores.T)
    assert scores.min() >= 0.0 and scores.max() <= 1.0

    graph = semfuse.build_association_graph(sim, sigma=0.75)
    assignment = semfuse.clear_rectify(graph)
    fused = semfuse.fuse_maps(maps, assignment, env.map.grid)
    clear_score = semfuse.ami(semfuse.contingency(env.map, fused))

    id_assignment = semfuse.id_based_match([(r, len(d)) for r, d in team])
    id_fused = semfuse.fuse_maps(maps, id_assignment, env.map.grid)
    id_score = semfuse.ami(semfuse.contingency(env.map, id_fused))

    assert -1.0 < id_score <= 1.0
    assert clear_score > id_score


def test_run_experiment_smoke():
    config = semfuse.ExperimentConfig()
    config.env = semfuse.env1_config()
    config.env.grid = semfuse.GridSpec(12, 12)
    config.env.num_classes = 3
    config.env.vocabulary_size = 50
    config.env.words_per_class = 6
    config.num_robots = 2
    config.observations_per_robot = 30
    config.repetitions = 1
    config.checkpoint_interval = 0
    config.words_per_obs = 20
    config.algorithms = [
        semfuse.AlgorithmSpec("clear", "cosine"),
        semfuse.AlgorithmSpec("id"),
    ]
    records = semfuse.run_experiment(config)
    assert len(records) > 0
    for record in records:
        assert -1.0 < record.ami <= 1.0
        assert 0.0 <= record.coverage_fraction <= 1.0
