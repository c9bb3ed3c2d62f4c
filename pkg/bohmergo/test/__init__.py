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

"""Helpers shared by the test modules."""

import os

from decorator import decorator
from nose.plugins.skip import SkipTest
from nose.tools import timed


#: Set to 1 to run the large-ensemble tests
RUN_SLOW = os.environ.get('BOHM_ERGO_SLOW') == '1'


@decorator
def slow(test, *args, **kwargs):
    """Skip a test unless ``BOHM_ERGO_SLOW=1``."""
    if not RUN_SLOW:
        raise SkipTest('set BOHM_ERGO_SLOW=1 to run')
    return test(*args, **kwargs)


def timed_class(limit):
    """Class decorator version of `nose.tools.timed`"""
    def wrap(cls):
        for key in list(cls.__dict__):
            if key.startswith('test_'):
                setattr(cls, key, timed(limit)(getattr(cls, key)))
        return cls
    return wrap
