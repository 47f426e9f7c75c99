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

import sys
import zlib
from typing import (
    Iterable,
    Optional,
    Sequence,
    Union
)

import click
import numpy as np

StreamName = Union[str, int]


def stream_key(*names: StreamName) -> list:
    """
    Turn stream names into stable 32-bit integers. Strings are
    hashed with CRC32 so the key never depends on `PYTHONHASHSEED`.
    """

    key = []
    for name in names:
        if isinstance(name, (int, np.integer)):
            key.append(int(name) & 0xFFFFFFFF)
        else:
            key.append(zlib.crc32(str(name).encode('utf-8')))
    return key


def derive_rng(seed: int, *names: StreamName) -> np.random.Generator:
    """
    Derive an independent random stream from the root seed
    and a path of stream names.

    Example:
        >>> rng = derive_rng(7, 'bootstrap', 3)
        >>> rng.standard_normal(2)
    """

    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + stream_key(*names)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def derive_seed(seed: int, *names: StreamName) -> int:
    """
    A plain integer seed for APIs that want one (sklearn `random_state`).
    """

    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + stream_key(*names)
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


def one_hot(codes: Iterable[int], size: int) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    out = np.zeros((codes.shape[0], size))
    out[np.arange(codes.shape[0]), codes] = 1.0
    return out


def as_matrix(x, name: str = 'inputs') -> np.ndarray:
    """
    Coerce to a 2-d float matrix; vectors become a single column.
    """

    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ValueError('%s must be a matrix, got shape %s' % (name, x.shape))
    return x


def is_finite(x: np.ndarray) -> bool:
    return bool(np.all(np.isfinite(x)))


def parse_orders(order: Optional[str]) -> Sequence[int]:
    """
    Parse an order flag: `3` -> [3], `1..3` -> [1, 2, 3].
    """

    if order is None:
        return [1]
    text = str(order).strip()
    if '..' in text:
        low, high = text.split('..', 1)
        low, high = int(low), int(high)
        if low < 1 or high < low:
            raise ValueError('invalid order range: %s' % text)
        return list(range(low, high + 1))
    value = int(text)
    if value < 1:
        raise ValueError('order must be >= 1, got %s' % text)
    return [value]


def format_row(label: str, values: Sequence, width: int = 8) -> str:
    cells = []
    for value in values:
        if isinstance(value, float):
            cells.append(('%.3f' % value).rjust(width))
        else:
            cells.append(str(value).rjust(width))
    return '|%s|%s|' % (label.ljust(14), '|'.join(cells))


def print_banner(color: Optional[str] = 'magenta'):
    py = "%s.%s" % (
        sys.version_info.major,
        sys.version_info.minor
    )

    click.secho("""
  markov.order
    - Test the Markov order of offline RL trajectories
    - markov.order version: %s
    - Python Version: %s
""" % (__import__('markov.order').order.__version__, py), fg=color)
