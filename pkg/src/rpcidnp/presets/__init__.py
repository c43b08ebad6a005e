"""Scenario files shipped with rpcidnp (loaded by name through importlib.resources)."""
