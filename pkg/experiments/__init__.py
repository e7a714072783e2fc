#!/usr/bin/env python
"""
Experiments Package - parameter sweeps behind the patience maps and utility curves
"""

from errors import ParameterDomainError
from .base_sweep import SweepResult
from .patience_sweep import PatienceCell, create_patience_sweep, patience_sweep
from .utility_sweep import ComparisonPoint, create_utility_sweep, utility_vs_c

# Registry of all sweeps
SWEEPS = {
    "patience": create_patience_sweep,
    "utility-vs-c": create_utility_sweep,
}

def get_sweep(mode: str):
    """Get sweep for a specific mode"""
    if mode not in SWEEPS:
        raise ParameterDomainError("mode", f"sweep mode {mode!r} not implemented (available: {get_available_modes()})")

    return SWEEPS[mode]()

def get_available_modes():
    """Get list of available sweep modes"""
    return list(SWEEPS.keys())

__all__ = [
    'ComparisonPoint',
    'PatienceCell',
    'SweepResult',
    'get_available_modes',
    'get_sweep',
    'patience_sweep',
    'utility_vs_c',
]
