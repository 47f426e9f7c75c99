#               Copyright (c) 2021 Zenqi.

# Permission is hereby granted, free of charge, to any person obtaining
# a copy of this software and associated documentation files (the
# "Software"), to deal in the Software without restriction, including
# without limitation the rights to use, copy, modify, merge, publish,
# distribute, sublicense, and/or sell copies of the Software, and to
# permit persons to whom the Software is furnished to do so, subject to
# the following conditions:

# The above copyright notice and this permission notice shall be
# included in all copies or substantial portions of the Software.

# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND,
# EXPRESS OR IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF
# MERCHANTABILITY, FITNESS FOR A PARTICULAR PURPOSE AND
# NONINFRINGEMENT. IN NO EVENT SHALL THE AUTHORS OR COPYRIGHT HOLDERS BE
# LIABLE FOR ANY CLAIM, DAMAGES OR OTHER LIABILITY, WHETHER IN AN ACTION
# OF CONTRACT, TORT OR OTHERWISE, ARISING FROM, OUT OF OR IN CONNECTION
# WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE SOFTWARE.

import re
from setuptools import setup
from setuptools import find_packages

BASE_URL = 'https://github.com/znqi/markov.order'

def get_version():

    with open('markov/order/__init__.py', encoding='utf-8') as f:
        return re.search(r'__version__ = "([^"]+)"', f.read()).group(1)

def get_long_description():

    with open("README.md", encoding="utf-8") as f:
        readme = f.read()

    return readme

def get_requirements():

    with open('requirements.txt', 'r') as f:
        requirements = [r.strip() for r in f.read().split('\n')]

    return [r for r in requirements if r]

extras_require = {
    'test': ['pytest>=7.0']
}

entry_points = {
    "console_scripts": [
        'markov-order = markov.order.cli:app',
        'mol = markov.order.cli:app'
    ]
}

setup(

    name="markov.order",
    description="Test the Markov order of offline reinforcement-learning trajectories, select it, and evaluate policies under it",
    long_description=get_long_description(),
    long_description_content_type='text/markdown',
    project_urls={
        'Source': BASE_URL,
    },
    author = 'Zenqi',
    license = 'MIT',
    version = get_version(),
    python_requires='>=3.8',
    install_requires=get_requirements(),
    packages = [p for p in find_packages() if 'test' not in p],
    extras_require = extras_require,
    entry_points = entry_points
)
