"""domainforge: learn PDDL domains from demonstrations, fuse them, plan new tasks."""

__version__ = "0.1.0"
