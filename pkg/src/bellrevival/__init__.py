"""Bell-nonlocality revival and dark-state lifetimes of two qubits in a structured waveguide."""

__version__ = "0.1.0"
