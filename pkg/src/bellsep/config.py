"""Capacity caps. ``BELL_MAX_QUBITS`` overrides the qubit cap at call time."""

import os

DEFAULT_MAX_QUBITS = 12
LHV_ENUMERATION_CAP = 8
CLASSICAL_MAX_SITES = 5


def max_qubits() -> int:
    raw = os.environ.get("BELL_MAX_QUBITS")
    if raw is None or raw.strip() == "":
        return DEFAULT_MAX_QUBITS
    try:
        value = int(raw)
    except ValueError:
        return DEFAULT_MAX_QUBITS
    return max(1, value)


def max_dim() -> int:
    return 2 ** max_qubits()
