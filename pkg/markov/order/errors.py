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

from typing import Optional


class MarkovOrderError(Exception):
    """
    Base error of `markov.order`. Every error keeps the plain
    message and the error code it was thrown with.
    """

    def __init__(
        self,
        formatted: str,
        message: Optional[str] = None,
        code: Optional[str] = None
    ):
        super().__init__(formatted)
        self.message = message if message is not None else formatted
        self.code = code

class DataError(MarkovOrderError):
    pass

class ConfigError(MarkovOrderError):
    pass

class RegressorError(MarkovOrderError):
    pass

class MarkovTestError(MarkovOrderError):
    pass

class SimulationError(MarkovOrderError):
    pass

class CoverageError(MarkovOrderError):
    pass

class PolicyError(MarkovOrderError):
    pass


def throw(
    error_cls: MarkovOrderError,
    message: str,
    code: str,
    line: Optional[str] = '─',
):

    """
    A error throwing with format given the error class,
    message and the code.
    """

    formatted = "\n\n%s\n\t[ERROR: %s] %s\n%s\n\n" % (
        line*70,
        code,
        message,
        line*70
    )

    if issubclass(error_cls, MarkovOrderError):
        raise error_cls(formatted, message=message, code=code)

    raise error_cls(formatted)


ERROR_CODES = {
    'unknown_error': '0000',
    'not_found': '0001',
    'parse_error': '0002',
    'invalid_config': '0003',
    'dimension_error': '0004',
    'too_short': '0005',
    'non_finite': '0006',
    'infeasible': '0007',
    'unstable': '0008',
    'coverage_error': '0009'
}
