"""hazardctl: data-hazard verification for single-pipeline processor graphs."""

__version__ = "0.1.0"
