"""Ms. Pac-Man vs ghost team simulation with partial observability."""
