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

import os
import math
import pathlib
import tempfile
import importlib
import dataclasses
from typing import (
    Any,
    Optional
)

import numpy as np


class BaseSerializer:
    """
    Base class for handling serializer. The class should have
    4 methods. `dump`, `dumps`, `load`, and `loads`.
    """

    def dump(self, *args, **kwargs):
        raise NotImplementedError

    def dumps(self, *args, **kwargs):
        raise NotImplementedError

    def load(self, *args, **kwargs):
        raise NotImplementedError

    def loads(self, *args, **kwargs):
        raise NotImplementedError


class JSONSerializer(BaseSerializer):
    """
    A JSON Serializer that picks its backend by name and
    falls back to the standard `json` module when the backend
    is not installed. Reports are always written with sorted
    keys and a fixed indent so reruns are byte-identical.

    Available serializer:
        `json`
        `simplejson`

    Example:
        >>> json = JSONSerializer(name='json')
        >>> json.dumps({'p_value': 0.5})
    """

    _available_serializer = [
        'json', 'simplejson'
    ]

    def __init__(self, name: Optional[str] = 'json'):

        if name not in self._available_serializer:
            raise ValueError('"%s" is not found' % (name))

        try:
            self.serializer = importlib.import_module(name)
        except ImportError:
            self.serializer = importlib.import_module('json')

    def dump(self, obj, fp, **kwargs):
        kwargs.setdefault('sort_keys', True)
        kwargs.setdefault('indent', 2)
        return self.serializer.dump(to_jsonable(obj), fp, **kwargs)

    def dumps(self, obj, **kwargs):
        kwargs.setdefault('sort_keys', True)
        kwargs.setdefault('indent', 2)
        return self.serializer.dumps(to_jsonable(obj), **kwargs)

    def load(self, *args, **kwargs):
        return self.serializer.load(*args, **kwargs)

    def loads(self, *args, **kwargs):
        return self.serializer.loads(*args, **kwargs)


def to_jsonable(obj: Any) -> Any:
    """
    Convert numpy values, tuples and dataclasses into plain
    JSON types. Non-finite floats become strings.
    """

    if hasattr(obj, 'to_dict') and not isinstance(obj, type):
        return to_jsonable(obj.to_dict())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        if math.isnan(value):
            return 'nan'
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return value
    if isinstance(obj, pathlib.PurePath):
        return str(obj)
    return obj


def write_json(obj: Any, path: str, serializer: Optional[JSONSerializer] = None):
    """
    Write `obj` to `path` atomically: the file appears only
    once it has been written completely.
    """

    serializer = serializer or JSONSerializer()
    path = pathlib.Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)

    text = serializer.dumps(obj) + '\n'
    fd, tmp = tempfile.mkstemp(dir=str(path.parent.absolute()), suffix='.tmp')
    try:
        with os.fdopen(fd, 'w', encoding='utf-8') as f:
            f.write(text)
        os.replace(tmp, str(path))
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise

    return path


def read_json(path: str, serializer: Optional[JSONSerializer] = None) -> Any:
    serializer = serializer or JSONSerializer()
    with open(path, 'r', encoding='utf-8') as f:
        return serializer.load(f)
