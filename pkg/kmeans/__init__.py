"""Flat k-means clustering used to split member sets during tree builds."""
