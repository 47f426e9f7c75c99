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

#: A logger for loguru

import os
import sys
import pathlib
from typing import Optional

from loguru import logger

from .constants import (
    DEFAULT_LOG_LEVEL,
    LOG_DIR_ENV,
    LOG_ENV
)

LOG_FORMAT = '<green>[{time:HH:mm:ss}]</green> |  <magenta>{level}</magenta>  | <lvl>{message}</lvl>'


def configure_logging(
    level: Optional[str] = None,
    log_dir: Optional[str] = None
):
    """
    (Re)configure the sinks of the shared logger.

    Parameter:
        `level` (Optional[str]):
            A loguru level name. Falls back to `MOL_LOG`
            and then to WARNING.

        `log_dir` (Optional[str]):
            Directory for a rotating log file. Falls back
            to `MOL_LOG_DIR`; no file sink when unset.
    """

    level = (level or os.environ.get(LOG_ENV) or DEFAULT_LOG_LEVEL).upper()
    log_dir = log_dir or os.environ.get(LOG_DIR_ENV)

    logger.remove()
    logger.add(sys.stderr, format=LOG_FORMAT, level=level)

    if log_dir:
        log_dir = pathlib.Path(log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)
        logger.add(
            str((log_dir / 'markov-order.log').absolute()),
            rotation="100 MB",
            compression='zip',
            level='DEBUG'
        )

    return level


configure_logging()
