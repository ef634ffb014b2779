#!/usr/bin/env python
"""
cvsstemporal - CVSS v2 scoring with scope-aware impact weights and
time-decaying exploitability
"""
from .cli import main

__version__ = "1.0.0"
