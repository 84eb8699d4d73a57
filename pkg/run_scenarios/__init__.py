"""
Run Scenarios Package
Command scenarios, configuration and tests
"""
