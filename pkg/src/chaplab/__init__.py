"""Exact characteristic-coordinate solver and blowup analysis for the 1D Chaplygin gas."""
