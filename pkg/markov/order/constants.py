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

#: Defaults shared by the configuration dataclasses and the CLI.

#: Environment variables read by `markov.order.logs`
LOG_ENV = 'MOL_LOG'
LOG_DIR_ENV = 'MOL_LOG_DIR'
DEFAULT_LOG_LEVEL = 'WARNING'

#: Random-feature ridge regression
DEFAULT_NUM_FEATURES = 200
DEFAULT_RIDGE = 1e-3
MEDIAN_SUBSAMPLE = 500
FALLBACK_BANDWIDTH = 1.0
RIDGE_FLOOR = 1e-10

#: Markov test
DEFAULT_MAX_GAP = 6
DEFAULT_FORWARD_FREQS = 16
DEFAULT_BACKWARD_FREQS = 16
DEFAULT_FOLDS = 3
DEFAULT_BOOTSTRAP = 2000
DEFAULT_ALPHA = 0.05
MIN_BOOTSTRAP = 100
BOOTSTRAP_CHUNK = 250
SD_FLOOR = 1e-12
POMDP_SUSPECT = 'POMDP-suspect'
ORDER_INCONCLUSIVE = 'inconclusive'

#: Reinforcement learning / off-policy evaluation
DEFAULT_GAMMA = 0.9
DEFAULT_ITERATIONS = 50
DEFAULT_PROB_FLOOR = 0.01
DEFAULT_RATIO_CLIP = 100.0
DP_TOLERANCE = 1e-10

#: Tiger problem
TIGER_ACTIONS = ('open-left', 'open-right', 'listen')
OPEN_LEFT, OPEN_RIGHT, LISTEN = 0, 1, 2
TIGER_LEFT, TIGER_RIGHT = 0, 1
TIGER_STATES = ('left', 'right')
TIGER_SENTINEL = 0.5
DEFAULT_LISTEN_ERROR = 0.15
DEFAULT_REWARD_TIGER = -100.0
DEFAULT_REWARD_EMPTY = 10.0
DEFAULT_REWARD_LISTEN = -1.0
DEFAULT_LISTEN_PROB = 0.8

#: CLI exit codes (success is click's default 0)
EXIT_USAGE = 2
EXIT_DATA = 3
