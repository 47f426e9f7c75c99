#   Copyright (c) 2021, Zenqi

# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:

# The above copyright notice and this permission notice shall be included in
# all copies or substantial portions of the Software.

# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN
# THE SOFTWARE.

from markov.order.data import (
    Episode,
    TrajectoryDataset,
    augment_order,
    fold_rewards,
    load_dataset,
    save_dataset,
    standardize,
    transition_view
)
from markov.order.regress import RegressorSpec, fit, make_folds, predict
from markov.order.markov_test import (
    TestConfig,
    markov_test,
    order_test,
    select_order
)
from markov.order.envs import (
    LinearHmdpConfig,
    Policy,
    TigerConfig,
    TigerEnv,
    linear_hmdp_simulate,
    simulate,
    tabular_tiger_mdp,
    tiger_step
)
from markov.order.rl import RlConfig, dp_policy_value, fqe, fqi
from markov.order.ope import OpeConfig, cross_fit_ope, dr_estimate, fit_behavior, wald_ci

__version__ = "0.1.0"
__all__ = (
    'Episode', 'TrajectoryDataset', 'augment_order', 'fold_rewards',
    'load_dataset', 'save_dataset', 'standardize', 'transition_view',
    'RegressorSpec', 'fit', 'make_folds', 'predict',
    'TestConfig', 'markov_test', 'order_test', 'select_order',
    'LinearHmdpConfig', 'Policy', 'TigerConfig', 'TigerEnv', 'linear_hmdp_simulate',
    'simulate', 'tabular_tiger_mdp', 'tiger_step',
    'RlConfig', 'dp_policy_value', 'fqe', 'fqi',
    'OpeConfig', 'cross_fit_ope', 'dr_estimate', 'fit_behavior', 'wald_ci'
)
