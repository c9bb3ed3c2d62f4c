#!/usr/bin/env python

# Copyright 2019 The bohmergo authors
#
# This program is free software: you can redistribute it and/or modify it under
# the terms of the GNU Lesser General Public License as published by the Free
# Software Foundation, either version 3 of the License, or (at your option) any
# later version.
#
# This program is distributed in the hope that it will be useful, but WITHOUT
# ANY WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS
# FOR A PARTICULAR PURPOSE.  See the GNU Lesser General Public License for more
# details.
#
# You should have received a copy of the GNU Lesser General Public License
# along with this program.  If not, see <http://www.gnu.org/licenses/>.

from __future__ import print_function
from setuptools import setup, find_packages
import glob
import os.path


def find_version():
    # Importing bohmergo would pull in numpy and scipy before they are installed
    globals_ = {}
    with open(os.path.join(os.path.dirname(__file__), 'bohmergo', '_version.py')) as f:
        code = f.read()
    exec(code, globals_)
    return globals_['__version__']


with open(os.path.join(os.path.dirname(__file__), 'README.rst')) as readme_file:
    readme = readme_file.read()

setup(
    author='The bohmergo authors',
    name='bohmergo',
    version=find_version(),
    description='Two-particle Bohmian double-slit trajectories and ergodicity checks',
    long_description=readme,
    license='LGPLv3+',
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: GNU Lesser General Public License v3 or later (LGPLv3+)',
        'Operating System :: POSIX',
        'Programming Language :: Python :: 3',
        'Topic :: Scientific/Engineering :: Physics'],
    python_requires='>=3.7',
    install_requires=[
        'numpy>=1.17',
        'scipy>=1.6',
        'six'
    ],
    tests_require=[
        'nose; python_version<"3.10"',
        'pynose; python_version>="3.10"',
        'decorator'
    ],
    test_suite='nose.collector',
    packages=find_packages(),
    package_data={'bohmergo': ['presets/*.json']},
    scripts=glob.glob('scripts/*.py')
)
