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

"""Simulate two-particle Bohmian trajectories through a double slit, compare
joint detection probabilities between a Gibbs ensemble and a constrained
pair ensemble, and test time averages against space averages.

Run ``bohm_ergo.py <subcommand> --help`` for the options of each subcommand.
"""

import sys

from bohmergo.tools import bohm_ergo


sys.exit(bohm_ergo.main())
