import numpy as np
import pytest

from markov.order.data import Episode, TrajectoryDataset
from markov.order.envs import (
    LinearHmdpConfig,
    Policy,
    TigerConfig,
    TigerEnv,
    linear_hmdp_simulate,
    simulate
)


def make_dataset(observations, actions, rewards, action_set=('0', '1')):
    """ Build a dataset from per-episode lists. """

    episodes = tuple(
        Episode(o, a, r, episode_id=str(i))
        for i, (o, a, r) in enumerate(zip(observations, actions, rewards))
    )
    return TrajectoryDataset(
        episodes=episodes,
        action_set=action_set,
        obs_dim=np.asarray(observations[0], dtype=float).reshape(len(observations[0]), -1).shape[1]
    )


def random_dataset(seed, n_episodes=3, horizon=6, obs_dim=1, action_count=2):
    rng = np.random.default_rng(seed)
    return make_dataset(
        [rng.normal(size=(horizon + 1, obs_dim)) for _ in range(n_episodes)],
        [rng.integers(action_count, size=horizon) for _ in range(n_episodes)],
        [rng.normal(size=horizon) for _ in range(n_episodes)],
        action_set=tuple(str(a) for a in range(action_count))
    )


@pytest.fixture
def tiny_dataset():
    return make_dataset(
        [[[0.0], [1.0], [2.0], [3.0]], [[10.0], [11.0], [12.0]]],
        [[0, 1, 0], [1, 1]],
        [[0.5, 1.5, 2.5], [-1.0, -2.0]]
    )


@pytest.fixture
def tiger_data():
    env = TigerEnv(TigerConfig())
    return simulate(env, Policy.epsilon_listen(), n_episodes=20, horizon=15, seed=11)


@pytest.fixture
def revealed_tiger_data():
    env = TigerEnv(TigerConfig(reveal_state=True))
    return simulate(env, Policy.epsilon_listen(), n_episodes=200, horizon=30, seed=5)


@pytest.fixture
def linear_data():
    cfg = LinearHmdpConfig.default(1, noise_scale=1.0)
    return linear_hmdp_simulate(cfg, Policy.uniform(2), n=30, T=30, seed=3)
