"""Kernel independence testing for time series with a circular-shift null."""
