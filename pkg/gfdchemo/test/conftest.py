# -*- coding: utf-8 -*-
"""
Puts this directory on sys.path so the tests' ``from context import ...``
resolves under pytest.
"""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
