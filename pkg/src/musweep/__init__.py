"""Maximal structured singular value by parallel branch and bound."""
