"""Wegner-estimate experiments for random Schroedinger operators on metric graphs."""
